//! Bounded convex polytopes in ℝⁿ given by integer half-spaces.
//!
//! Vertices are enumerated exactly over ℚ and the polytope is split into
//! simplices by a pulling triangulation, which makes uniform sampling and
//! closed-form kernel integration possible.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::projlin::IntMatrix;

pub type RatPoint = Vec<BigRational>;

/// Affine form `c₀ + Σ cⱼ xⱼ`; as a constraint it reads `form ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LinearForm(pub Vec<i64>);

impl LinearForm {
    /// `constant + Σ coeffs[j]·x_{j+1}`.
    pub fn new(constant: i64, coeffs: &[i64]) -> Self {
        let mut v = Vec::with_capacity(coeffs.len() + 1);
        v.push(constant);
        v.extend_from_slice(coeffs);
        Self(v)
    }

    /// `x_a − x_b` with `x₀ = 1`; `b = n + 1` denotes the implicit `x_{n+1} = 0`.
    pub fn difference(n: usize, a: usize, b: usize) -> Self {
        let mut v = vec![0; n + 1];
        if a <= n {
            v[a] += 1;
        }
        if b <= n {
            v[b] -= 1;
        }
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0[0] as f64 + self.0[1..].iter().zip(x).map(|(&c, &v)| c as f64 * v).sum::<f64>()
    }

    pub fn eval_exact(&self, x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::from_integer(BigInt::from(self.0[0]));
        for (&c, v) in self.0[1..].iter().zip(x) {
            if c != 0 {
                acc += v * BigRational::from_integer(BigInt::from(c));
            }
        }
        acc
    }

    pub fn negate(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &LinearForm) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LinearForm) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Pulls the form back through the fractional-linear map of `m`:
    /// the sign of `form(act(m, y))` equals the sign of the result at `y`
    /// wherever the denominator of `m` is positive.
    pub fn pull_back(&self, m: &IntMatrix) -> Result<Self> {
        let s = m.side();
        let mut out = vec![0i64; s];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            for (i, &c) in self.0.iter().enumerate() {
                acc += m.get(i, j) * c;
            }
            *o = acc.to_i64().ok_or_else(|| Error::InvalidParams("coefficient overflow".into()))?;
        }
        Ok(Self(out))
    }
}

/// A simplex with exact rational vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSimplex(pub Vec<RatPoint>);

impl ExactSimplex {
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn volume(&self) -> BigRational {
        let n = self.dim();
        if n == 0 {
            return BigRational::one();
        }
        let rows: Vec<Vec<BigRational>> = self.0[1..]
            .iter()
            .map(|v| v.iter().zip(&self.0[0]).map(|(a, b)| a - b).collect())
            .collect();
        let det = rational_det(rows);
        let fact: BigInt = (1..=n as u64).product::<u64>().into();
        det.abs() / BigRational::from_integer(fact)
    }

    /// Image under the fractional-linear map of `m`; `None` when a vertex is
    /// sent to infinity or the denominators change sign across vertices.
    pub fn map(&self, m: &IntMatrix) -> Option<ExactSimplex> {
        let mut sign = 0;
        let mut out = Vec::with_capacity(self.0.len());
        for v in &self.0 {
            let (img, den) = map_vertex(m, v);
            let s = if den.is_positive() { 1 } else if den.is_negative() { -1 } else { return None };
            if sign != 0 && s != sign {
                return None;
            }
            sign = s;
            out.push(img?);
        }
        Some(ExactSimplex(out))
    }

    pub fn to_f64(&self) -> Simplex {
        let vertices: Vec<Vec<f64>> = self.0.iter().map(|v| rat_point_to_f64(v)).collect();
        Simplex { vertices, volume: self.volume().to_f64().unwrap_or(0.0) }
    }
}

/// Floating-point simplex used for sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<Vec<f64>>,
    pub volume: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Uniform point via spacings of sorted uniforms (flat Dirichlet weights).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Vec<f64>, out: &mut [f64]) {
        let n = self.dim();
        scratch.clear();
        scratch.extend((0..n).map(|_| rng.gen::<f64>()));
        scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut prev = 0.0;
        for k in 0..=n {
            let next = if k < n { scratch[k] } else { 1.0 };
            let w = next - prev;
            prev = next;
            for (o, v) in out.iter_mut().zip(&self.vertices[k]) {
                *o += w * v;
            }
        }
    }
}

/// Image of a rational point; returns the image (if finite) and the
/// homogeneous denominator.
pub fn map_vertex(m: &IntMatrix, v: &[BigRational]) -> (Option<RatPoint>, BigRational) {
    let s = m.side();
    let hom: Vec<BigRational> = (0..s)
        .map(|i| {
            let mut acc = BigRational::from_integer(m.get(i, 0).clone());
            for (j, x) in v.iter().enumerate() {
                let c = m.get(i, j + 1);
                if !c.is_zero() {
                    acc += x * BigRational::from_integer(c.clone());
                }
            }
            acc
        })
        .collect();
    let den = hom[0].clone();
    if den.is_zero() {
        return (None, den);
    }
    (Some(hom[1..].iter().map(|h| h / &den).collect()), den)
}

pub fn rat_point_to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Bounded, full-dimensional convex polytope `{x : ℓ(x) ≥ 0 for all ℓ}`.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    constraints: Vec<LinearForm>,
    vertices: Vec<RatPoint>,
    simplices: Vec<ExactSimplex>,
}

impl Polytope {
    pub fn from_constraints(dim: usize, constraints: Vec<LinearForm>) -> Result<Self> {
        if constraints.iter().any(|c| c.dim() != dim) {
            return Err(Error::InvalidParams("constraint dimension mismatch".into()));
        }
        let vertices = enumerate_vertices(dim, &constraints);
        if vertices.len() < dim + 1 || affine_rank(&vertices, &(0..vertices.len()).collect::<Vec<_>>()) < dim {
            return Err(Error::InvalidParams("polytope is empty or not full-dimensional".into()));
        }
        let tight: Vec<BTreeSet<usize>> = constraints
            .iter()
            .map(|c| (0..vertices.len()).filter(|&v| c.eval_exact(&vertices[v]).is_zero()).collect())
            .collect();
        let all: BTreeSet<usize> = (0..vertices.len()).collect();
        let mut simplices = Vec::new();
        for s in pulling_triangulation(&vertices, &tight, &all, dim) {
            simplices.push(ExactSimplex(s.iter().map(|&i| vertices[i].clone()).collect()));
        }
        Ok(Self { dim, constraints, vertices, simplices })
    }

    /// The order simplex `1 ≥ x₁ ≥ … ≥ xₙ ≥ 0`.
    pub fn order_simplex(n: usize) -> Self {
        Self::from_constraints(n, order_simplex_constraints(n)).expect("order simplex is a valid polytope")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[LinearForm] {
        &self.constraints
    }

    pub fn vertices(&self) -> &[RatPoint] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[ExactSimplex] {
        &self.simplices
    }

    pub fn volume(&self) -> BigRational {
        self.simplices.iter().map(|s| s.volume()).fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| c.eval(x) >= -tol)
    }
}

/// Constraints of `1 ≥ x₁ ≥ … ≥ xₙ ≥ 0`.
pub fn order_simplex_constraints(n: usize) -> Vec<LinearForm> {
    (0..=n).map(|i| LinearForm::difference(n, i, i + 1)).collect()
}

fn enumerate_vertices(dim: usize, constraints: &[LinearForm]) -> Vec<RatPoint> {
    let mut out: Vec<RatPoint> = Vec::new();
    let m = constraints.len();
    let mut idx: Vec<usize> = (0..dim).collect();
    if m < dim {
        return out;
    }
    loop {
        // solve ℓ_i(x) = 0 for the chosen constraints
        let rows: Vec<Vec<BigRational>> = idx
            .iter()
            .map(|&i| {
                let c = &constraints[i].0;
                let mut r: Vec<BigRational> = c[1..].iter().map(|&v| BigRational::from_integer(v.into())).collect();
                r.push(BigRational::from_integer((-c[0]).into()));
                r
            })
            .collect();
        if let Some(x) = solve_square(rows) {
            if constraints.iter().all(|c| !c.eval_exact(&x).is_negative()) && !out.contains(&x) {
                out.push(x);
            }
        }
        // next combination
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] != k + m - dim {
                break;
            }
            if k == 0 {
                return out;
            }
        }
        idx[k] += 1;
        for j in k + 1..dim {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Solves an `n × (n+1)` augmented system; `None` when singular.
fn solve_square(mut a: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n].clone()).collect())
}

fn rational_det(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &p;
                for c in col..n {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
    }
    det
}

pub(crate) fn affine_rank(points: &[RatPoint], ids: &[usize]) -> usize {
    if ids.is_empty() {
        return 0;
    }
    let base = &points[ids[0]];
    let mut rows: Vec<Vec<BigRational>> =
        ids[1..].iter().map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let cols = base.len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let p = rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            if !rows[r][col].is_zero() {
                let f = &rows[r][col] / &p;
                for c in col..cols {
                    let sub = &f * &rows[rank][c];
                    rows[r][c] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pulling_triangulation(
    points: &[RatPoint],
    tight: &[BTreeSet<usize>],
    face: &BTreeSet<usize>,
    dim: usize,
) -> Vec<Vec<usize>> {
    if face.len() == dim + 1 {
        return vec![face.iter().copied().collect()];
    }
    let apex = *face.iter().next().unwrap();
    let mut facets: Vec<BTreeSet<usize>> = Vec::new();
    for t in tight {
        let sub: BTreeSet<usize> = face.intersection(t).copied().collect();
        if sub.len() < dim || sub.len() == face.len() || sub.contains(&apex) || facets.contains(&sub) {
            continue;
        }
        let ids: Vec<usize> = sub.iter().copied().collect();
        if affine_rank(points, &ids) == dim - 1 {
            facets.push(sub);
        }
    }
    let mut out = Vec::new();
    for f in &facets {
        for mut s in pulling_triangulation(points, tight, f, dim - 1) {
            s.insert(0, apex);
            out.push(s);
        }
    }
    out
}
