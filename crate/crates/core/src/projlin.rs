//! Exact integer matrices and their fractional-linear action on ℝⁿ.
//!
//! A square matrix `M` of side `n + 1` acts on a point `x ∈ ℝⁿ` through the
//! homogeneous lift `(1, x₁, …, xₙ)`: the image has coordinates
//!
//! ```text
//! yᵢ = (M[i][0] + Σⱼ M[i][j]·xⱼ) / (M[0][0] + Σⱼ M[0][j]·xⱼ)
//! ```
//!
//! Index 0 is the homogeneous coordinate throughout the crate, so matrix
//! literals are written row-by-row exactly as the branch maps are tabulated.
//! Matrix arithmetic is exact (arbitrary precision); only points are `f64`.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Square integer matrix of side `n + 1 ≥ 2`, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    side: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn identity(side: usize) -> Self {
        assert!(side >= 2, "matrix side must be at least 2");
        let mut m = Self::zeros(side);
        for i in 0..side {
            m.entries[i * side + i] = BigInt::one();
        }
        m
    }

    pub fn zeros(side: usize) -> Self {
        assert!(side >= 2, "matrix side must be at least 2");
        Self { side, entries: vec![BigInt::zero(); side * side] }
    }

    /// Builds a matrix from rows of machine integers.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let side = rows.len();
        if side < 2 {
            return Err(Error::InvalidMatrix(format!("side {side} < 2")));
        }
        let mut entries = Vec::with_capacity(side * side);
        for row in rows {
            let row = row.as_ref();
            if row.len() != side {
                return Err(Error::InvalidMatrix(format!(
                    "row of length {} in a {side}x{side} matrix",
                    row.len()
                )));
            }
            entries.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        Ok(Self { side, entries })
    }

    /// Builds a matrix from a generator `f(row, col)`.
    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        assert!(side >= 2, "matrix side must be at least 2");
        let mut entries = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                entries.push(BigInt::from(f(i, j)));
            }
        }
        Self { side, entries }
    }

    /// Matrix side, `n + 1`.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Dimension `n` of the space the matrix acts on.
    pub fn dim(&self) -> usize {
        self.side - 1
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: impl Into<BigInt>) {
        self.entries[row * self.side + col] = value.into();
    }

    pub fn rows(&self) -> impl Iterator<Item = &[BigInt]> {
        self.entries.chunks(self.side)
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.side)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.side).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Exact matrix product `self · rhs`; as maps, `rhs` is applied first.
    pub fn compose(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.side != rhs.side {
            return Err(Error::DimensionMismatch { left: self.side, right: rhs.side });
        }
        let s = self.side;
        let mut out = Self::zeros(s);
        for i in 0..s {
            for k in 0..s {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..s {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * s + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> IntMatrix {
        let s = self.side;
        let mut out = Self::zeros(s);
        for i in 0..s {
            for j in 0..s {
                out.entries[j * s + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u32) -> IntMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(self.side);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        bareiss_det(self.side, self.entries.clone())
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    /// Transposed cofactor matrix, `adj(A)·A = det(A)·I`. Acts projectively as
    /// the inverse whenever the determinant is nonzero.
    pub fn adjugate(&self) -> IntMatrix {
        let s = self.side;
        let mut out = Self::zeros(s);
        if s == 1 {
            out.entries[0] = BigInt::one();
            return out;
        }
        let mut minor = Vec::with_capacity((s - 1) * (s - 1));
        for i in 0..s {
            for j in 0..s {
                minor.clear();
                for r in (0..s).filter(|&r| r != i) {
                    for c in (0..s).filter(|&c| c != j) {
                        minor.push(self.get(r, c).clone());
                    }
                }
                let mut cof = bareiss_det(s - 1, minor.clone());
                if (i + j) % 2 == 1 {
                    cof = -cof;
                }
                out.entries[j * s + i] = cof;
            }
        }
        out
    }

    /// Exact integer inverse. Only unimodular matrices have one.
    pub fn inverse(&self) -> Result<IntMatrix> {
        let det = self.determinant();
        if !det.abs().is_one() {
            return Err(Error::NotUnimodular { det: det.to_string() });
        }
        let mut out = self.adjugate();
        for e in out.entries.iter_mut() {
            *e *= &det;
        }
        Ok(out)
    }

    /// Lossy conversion for hot evaluation loops.
    pub fn to_f64(&self) -> FloatMatrix {
        FloatMatrix {
            side: self.side,
            entries: self.entries.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }

    /// Row-major entries as `i64` where they fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.rows().map(|r| r.iter().map(|v| v.to_i64()).collect()).collect()
    }

    /// Applies the fractional-linear map to `x`.
    pub fn act(&self, x: &ProjPoint) -> Result<ProjPoint> {
        self.to_f64().act(x)
    }

    /// Absolute Jacobian determinant of `x ↦ act(self, x)` at `x`.
    pub fn jacobian(&self, x: &ProjPoint) -> Result<f64> {
        if !self.is_unimodular() {
            return Err(Error::NotUnimodular { det: self.determinant().to_string() });
        }
        self.to_f64().jacobian(x)
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.compose(rhs).expect("matrix sides must agree")
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Serialized as a row-major array of integer arrays. Entries beyond the
/// `i64` range are emitted as decimal strings.
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows()
            .map(|r| {
                r.iter()
                    .map(|v| match v.to_i64() {
                        Some(i) => serde_json::Value::from(i),
                        None => serde_json::Value::from(v.to_string()),
                    })
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

fn bareiss_det(side: usize, mut a: Vec<BigInt>) -> BigInt {
    if side == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..side - 1 {
        if a[k * side + k].is_zero() {
            let Some(p) = (k + 1..side).find(|&r| !a[r * side + k].is_zero()) else {
                return BigInt::zero();
            };
            for c in 0..side {
                a.swap(k * side + c, p * side + c);
            }
            sign = -sign;
        }
        for i in k + 1..side {
            for j in k + 1..side {
                let v = &a[i * side + j] * &a[k * side + k] - &a[i * side + k] * &a[k * side + j];
                a[i * side + j] = v / &prev;
            }
        }
        prev = a[k * side + k].clone();
    }
    sign * &a[side * side - 1]
}

/// A point of ℝⁿ; the homogeneous coordinate `x₀ = 1` is implicit.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProjPoint(Vec<f64>);

impl ProjPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParams("point must have at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("point coordinates must be finite".into()));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl From<ProjPoint> for Vec<f64> {
    fn from(p: ProjPoint) -> Self {
        p.0
    }
}

/// `f64` copy of an [`IntMatrix`] used inside sampling loops.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatMatrix {
    side: usize,
    entries: Vec<f64>,
}

impl FloatMatrix {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.side - 1
    }

    /// Homogeneous row `i` evaluated at `(1, x)`.
    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let row = &self.entries[i * self.side..(i + 1) * self.side];
        row[0] + row[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Writes the image of `x` into `out` and returns the denominator.
    /// Returns `SingularPoint` when the denominator vanishes.
    #[inline]
    pub fn act_into(&self, x: &[f64], out: &mut [f64]) -> Result<f64> {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let den = self.row_dot(0, x);
        if den == 0.0 || !den.is_finite() {
            return Err(Error::SingularPoint);
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(i + 1, x) / den;
        }
        Ok(den)
    }

    pub fn act(&self, x: &ProjPoint) -> Result<ProjPoint> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: x.dim() });
        }
        let mut out = vec![0.0; self.dim()];
        self.act_into(x.coords(), &mut out)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularPoint);
        }
        Ok(ProjPoint(out))
    }

    /// `|den|^{-(n+1)}`, the Jacobian of a unimodular map. The caller is
    /// responsible for unimodularity.
    pub fn jacobian(&self, x: &ProjPoint) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: x.dim() });
        }
        let den = self.row_dot(0, x.coords());
        if den == 0.0 || !den.is_finite() {
            return Err(Error::SingularPoint);
        }
        Ok(jacobian_from_denominator(den, self.side))
    }
}

#[inline]
pub fn jacobian_from_denominator(den: f64, side: usize) -> f64 {
    den.abs().powi(-(side as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    fn p(c: &[f64]) -> ProjPoint {
        ProjPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn identity_acts_trivially() {
        let y = IntMatrix::identity(3).act(&p(&[0.3, 0.2])).unwrap();
        assert_eq!(y.coords(), &[0.3, 0.2]);
    }

    #[test]
    fn gauss_branch_action() {
        let y = m(&[&[0, 1], &[1, -2]]).act(&p(&[0.4])).unwrap();
        assert!((y.coords()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn garrity_branch_action() {
        let y = m(&[&[0, 1, 0], &[0, 0, 1], &[1, -1, -1]]).act(&p(&[0.6, 0.3])).unwrap();
        assert!((y.coords()[0] - 0.5).abs() < 1e-15);
        assert!((y.coords()[1] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn singular_point_is_an_error() {
        // denominator x₁ vanishes at the origin
        let err = m(&[&[0, 1], &[1, -2]]).act(&p(&[0.0])).unwrap_err();
        assert_eq!(err, Error::SingularPoint);
    }

    #[test]
    fn compose_checks_dimensions() {
        let err = IntMatrix::identity(2).compose(&IntMatrix::identity(3)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn inverse_of_gauss_branch() {
        let a = m(&[&[0, 1], &[1, -3]]);
        assert_eq!(a.inverse().unwrap(), m(&[&[3, 1], &[1, 0]]));
        assert!((&a * &a.inverse().unwrap()).is_identity());
    }

    #[test]
    fn inverse_of_garrity_intertwiner() {
        let phi = m(&[&[1, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        assert_eq!(phi.inverse().unwrap(), m(&[&[0, 1, 0], &[1, -1, 0], &[0, 0, 1]]));
    }

    #[test]
    fn non_unimodular_has_no_integer_inverse() {
        let err = m(&[&[2, 0], &[0, 1]]).inverse().unwrap_err();
        assert_eq!(err, Error::NotUnimodular { det: "2".into() });
    }

    #[test]
    fn determinant_with_pivoting() {
        assert_eq!(m(&[&[0, 1, 0], &[0, 0, 1], &[1, -1, -5]]).determinant(), BigInt::from(1));
        assert_eq!(m(&[&[2, 1, 1], &[1, 1, 1], &[1, 1, 0]]).determinant(), BigInt::from(-1));
        assert_eq!(m(&[&[1, 2], &[2, 4]]).determinant(), BigInt::zero());
    }

    #[test]
    fn gauss_branch_is_symmetric() {
        let a = m(&[&[0, 1], &[1, -7]]);
        assert_eq!(a.transpose(), a);
    }

    #[test]
    fn transposed_garrity_branch_is_the_dual_map() {
        let k = 2;
        let at = m(&[&[0, 1, 0], &[0, 0, 1], &[1, -1, -k]]).transpose();
        let (x1, x2) = (0.7, 0.4);
        let y = at.act(&p(&[x1, x2])).unwrap();
        assert!((y.coords()[0] - (1.0 - x2) / x2).abs() < 1e-14);
        assert!((y.coords()[1] - (x1 - k as f64 * x2) / x2).abs() < 1e-14);
    }

    #[test]
    fn jacobian_of_gauss_inverse_branch() {
        let v = m(&[&[2, 1], &[1, 0]]);
        let j = v.jacobian(&p(&[0.5])).unwrap();
        assert!((j - 0.16).abs() < 1e-15);
        assert_eq!(IntMatrix::identity(4).jacobian(&p(&[0.1, 0.2, 0.3])).unwrap(), 1.0);
    }

    #[test]
    fn big_entries_survive_products() {
        let a = m(&[&[0, 1], &[1, -1_000_000_007]]);
        let big = a.pow(6);
        assert!(big.to_i64_rows().is_none());
        assert!(big.is_unimodular());
        assert!((&big * &big.inverse().unwrap()).is_identity());
    }

    #[test]
    fn serializes_row_major() {
        let s = serde_json::to_string(&m(&[&[0, 1], &[1, -2]])).unwrap();
        assert_eq!(s, "[[0,1],[1,-2]]");
    }
}
