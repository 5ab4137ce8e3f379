//! The duality kernel, its closed-form integrals, invariant densities and
//! Monte Carlo cylinder measures.
//!
//! All measures are unnormalized. The density of a full system is
//! `h(x) = ∫_{B#} K(x, y) dy`, evaluated in closed form: by iterated
//! antiderivatives on boxes and by `vol(S)/Π(1 + ⟨vᵢ, x⟩)` on simplices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::{affine_rank, Polytope, Simplex};
use crate::projlin::{jacobian_from_denominator, FloatMatrix, IntMatrix};
use crate::systems::{AxisBox, CylinderSpec, Digit, DomainSpec, FibredSystem, Side, FRAME_BOUND};

/// Axes with `xᵢ·(bᵢ − aᵢ)` below this fraction of the running constant are
/// integrated by quadrature instead of the cancelling antiderivative.
const DEGENERATE_RATIO: f64 = 0.05;
/// Attempts at drawing a regular point before a sample is given up.
const MAX_RESAMPLE: usize = 64;

/// `K(x, y) = (1 + ⟨x, y⟩)^{−(n+1)}`.
pub fn kernel(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let s: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (1.0 + s).powi(-(n as i32 + 1))
}

// Six-point Gauss–Legendre rule on [−1, 1].
const GL_NODES: [f64; 6] = [
    -0.932_469_514_203_152,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152,
];
const GL_WEIGHTS: [f64; 6] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_1,
    0.467_913_934_572_691_1,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

/// `∫_box K(x, y) dy`.
///
/// Integrates one axis at a time: `∫ₐᵇ (C + xᵢt)^{−m} dt` is
/// `[(C + xᵢa)^{1−m} − (C + xᵢb)^{1−m}] / ((m−1)xᵢ)`, and the remaining
/// axes see the exponent drop by one. Unrolled, this is the corner sum
/// `Σ_c ± (1 + ⟨x, c⟩)^{−1} / (n! Π xᵢ)`.
pub fn kernel_box_integral(x: &[f64], b: &AxisBox) -> Result<f64> {
    if x.len() != b.dim() {
        return Err(Error::DimensionMismatch { left: b.dim(), right: x.len() });
    }
    for (i, &xi) in x.iter().enumerate() {
        if !b.upper[i].is_finite() && xi <= 0.0 {
            return Err(Error::DivergentIntegral(format!("x{} = {xi} on an unbounded dual axis", i + 1)));
        }
    }
    let axes: Vec<usize> = (0..x.len()).collect();
    Ok(box_rec(x, b, 1.0, x.len() as i32 + 1, &axes))
}

fn box_rec(x: &[f64], b: &AxisBox, c: f64, m: i32, axes: &[usize]) -> f64 {
    let Some((&i, rest)) = axes.split_first() else {
        return c.powi(-m);
    };
    let (lo, hi, xi) = (b.lower[i], b.upper[i], x[i]);
    let mf = (m - 1) as f64;
    if !hi.is_finite() {
        return box_rec(x, b, c + xi * lo, m - 1, rest) / (mf * xi);
    }
    if xi * (hi - lo) <= DEGENERATE_RATIO * c {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        return half
            * GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(t, w)| w * box_rec(x, b, c + xi * (mid + half * t), m, rest))
                .sum::<f64>();
    }
    (box_rec(x, b, c + xi * lo, m - 1, rest) - box_rec(x, b, c + xi * hi, m - 1, rest)) / (mf * xi)
}

/// `∫_S K(x, y) dy = vol(S) / Π_v (1 + ⟨v, x⟩)` over the vertices of `S`.
pub fn kernel_simplex_integral(x: &[f64], s: &Simplex) -> f64 {
    s.vertices.iter().fold(s.volume, |acc, v| acc / (1.0 + v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()))
}

/// `∫_D K(x, y) dy` over a domain descriptor.
pub fn kernel_domain_integral(x: &[f64], d: &DomainSpec) -> Result<f64> {
    match d.bounds() {
        Some(b) => kernel_box_integral(x, b),
        None => Ok(d.simplices().iter().map(|s| kernel_simplex_integral(x, s)).sum()),
    }
}

fn require_full(system: &FibredSystem) -> Result<()> {
    if system.is_full() {
        Ok(())
    } else {
        Err(Error::NonFullSystem(system.name().to_string()))
    }
}

fn dual_domain(system: &FibredSystem) -> Result<&DomainSpec> {
    system.dual_domain().ok_or_else(|| Error::InvalidParams(format!("{} has no dual domain", system.label())))
}

/// Unnormalized invariant density `h(x) = ∫_{B#} K(x, y) dy`.
pub fn density(system: &FibredSystem, x: &[f64]) -> Result<f64> {
    require_full(system)?;
    if x.len() != system.n() {
        return Err(Error::DimensionMismatch { left: system.n(), right: x.len() });
    }
    kernel_domain_integral(x, dual_domain(system)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Uniform samples of the domain pushed through the inverse branch,
    /// weighted by its Jacobian.
    ChangeOfVariables,
    /// Uniform samples of the triangulated cylinder polytope.
    DirectPolytope,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cov" | "change-of-variables" => Ok(Method::ChangeOfVariables),
            "direct" | "direct-polytope" => Ok(Method::DirectPolytope),
            _ => Err(Error::InvalidParams(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureParams {
    pub samples: u64,
    pub seed: u64,
    pub method: Method,
    /// Number of RNG substreams; results are reproducible for a fixed value.
    pub workers: usize,
    /// Average each draw with its mirror `1 − u`.
    pub antithetic: bool,
    pub z_crit: f64,
}

impl Default for MeasureParams {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 42, method: Method::ChangeOfVariables, workers: 4, antithetic: false, z_crit: 5.0 }
    }
}

impl MeasureParams {
    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    /// Sample standard deviation over `√samples`.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub method: Method,
}

impl MeasureEstimate {
    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.value.abs()
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        if self.count == 0 {
            return o;
        }
        if o.count == 0 {
            return self;
        }
        let count = self.count + o.count;
        let d = o.mean - self.mean;
        let mean = self.mean + d * o.count as f64 / count as f64;
        let m2 = self.m2 + o.m2 + d * d * self.count as f64 * o.count as f64 / count as f64;
        Welford { count, mean, m2 }
    }
}

/// Scratch buffers owned by one worker.
struct Scratch {
    sort: Vec<f64>,
    lam: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

/// Monte Carlo mean of `f(u)` over `u ∈ [0,1)^dim`. Points where `f`
/// reports a singular or divergent value are redrawn.
fn monte_carlo<F>(dim: usize, n: usize, params: &MeasureParams, f: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64], &mut Scratch) -> Result<f64> + Sync,
{
    if params.samples < 2 {
        return Err(Error::InvalidParams("at least two samples are needed".into()));
    }
    let workers = params.workers.max(1) as u64;
    let per = params.samples / workers;
    let extra = params.samples % workers;
    let run = |w: u64| -> Result<Welford> {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(w);
        let count = per + u64::from(w < extra);
        let mut s = Scratch { sort: Vec::new(), lam: Vec::new(), x: vec![0.0; n], y: vec![0.0; n] };
        let mut u = vec![0.0; dim];
        let mut mirror = vec![0.0; dim];
        let mut acc = Welford::default();
        for _ in 0..count {
            let mut tries = 0;
            let v = loop {
                u.iter_mut().for_each(|v| *v = rng.gen::<f64>());
                let first = f(&u, &mut s);
                let r = if params.antithetic {
                    for (m, v) in mirror.iter_mut().zip(&u) {
                        *m = (1.0 - v).min(1.0 - f64::EPSILON);
                    }
                    first.and_then(|a| f(&mirror, &mut s).map(|b| 0.5 * (a + b)))
                } else {
                    first
                };
                match r {
                    Ok(v) if v.is_finite() => break v,
                    Ok(_) | Err(Error::SingularPoint) | Err(Error::DivergentIntegral(_)) => {
                        tries += 1;
                        if tries >= MAX_RESAMPLE {
                            return Err(Error::DivergentIntegral("integrand is singular on a set of positive measure".into()));
                        }
                    }
                    Err(e) => return Err(e),
                }
            };
            acc.push(v);
        }
        Ok(acc)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<Welford>> = {
        use rayon::prelude::*;
        (0..workers).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<Welford>> = (0..workers).map(run).collect();
    let mut total = Welford::default();
    for p in parts {
        total = total.merge(p?);
    }
    let var = total.m2 / (total.count - 1) as f64;
    Ok((total.mean, (var / total.count as f64).sqrt()))
}

/// Rejects cylinders whose closure meets the polar singularities of the
/// density on a set large enough to make the integral diverge.
///
/// On a box dual domain, `h` blows up like `1/Π_{i∈Z} xᵢ` near the faces
/// `{xᵢ = 0, i ∈ Z}` with `Z` a set of unbounded dual axes. The integral
/// over a polytope `P` diverges exactly when `P ∩ {xᵢ = 0, i ∈ Z}` has the
/// full dimension `n − |Z|` for some nonempty `Z`.
pub fn check_integrable(system: &FibredSystem, cyl: &CylinderSpec) -> Result<()> {
    if system.side() == Side::Dual {
        // μ#(B#(k_s…k₁)) = μ(B(k₁…k_s)); the dual integral inherits the verdict
        let primal = system.dualize()?;
        let rev: Vec<Digit> = cyl.digits.iter().rev().cloned().collect();
        return check_integrable(&primal, &primal.cylinder(&rev)?);
    }
    let Some(b) = dual_domain(system)?.bounds() else {
        return Ok(());
    };
    let inf = b.unbounded_axes();
    if inf.is_empty() {
        return Ok(());
    }
    let poly = system.cylinder_polytope(cyl, &[])?;
    let n = system.n();
    for mask in 1u32..(1 << inf.len()) {
        let zs: Vec<usize> = (0..inf.len()).filter(|k| mask >> k & 1 == 1).map(|k| inf[k]).collect();
        let ids: Vec<usize> = (0..poly.vertices().len())
            .filter(|&v| zs.iter().all(|&i| Zero::is_zero(&poly.vertices()[v][i])))
            .collect();
        if !ids.is_empty() && affine_rank(poly.vertices(), &ids) >= n - zs.len() {
            let axes: Vec<String> = zs.iter().map(|i| format!("x{}", i + 1)).collect();
            return Err(Error::DivergentIntegral(format!(
                "{} {} meets the singular face {{{} = 0}} of the density",
                system.label(),
                cyl.label(),
                axes.join(" = ")
            )));
        }
    }
    Ok(())
}

/// Sampler over a triangulated polytope. Simplices with a vertex on the
/// zero set of a singular form are tilted toward it: the barycentric mass
/// `t` of the vertices off the zero set is replaced by `t²`, which keeps the
/// variance of `1/ℓ(x)`-type integrands finite.
struct TiltedSampler {
    pieces: Vec<Piece>,
    cumulative: Vec<f64>,
    total: f64,
    dim: usize,
}

struct Piece {
    vertices: Vec<Vec<f64>>,
    on_face: Vec<bool>,
    off: i32,
    on: i32,
}

impl TiltedSampler {
    /// `singular` holds homogeneous rows `(c₀, c₁, …, cₙ)`.
    fn new(poly: &Polytope, singular: &[Vec<BigInt>]) -> Self {
        let mut pieces = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for s in poly.simplices() {
            let on_face: Vec<bool> = s
                .0
                .iter()
                .map(|v| {
                    singular.iter().any(|row| {
                        let mut sum = BigRational::from_integer(row[0].clone());
                        for (c, x) in row[1..].iter().zip(v) {
                            sum += x * BigRational::from_integer(c.clone());
                        }
                        sum.is_zero()
                    })
                })
                .collect();
            let on = on_face.iter().filter(|&&b| b).count() as i32;
            let off = on_face.len() as i32 - on;
            let f = s.to_f64();
            acc += f.volume;
            cumulative.push(acc);
            pieces.push(Piece { vertices: f.vertices, on_face, off, on });
        }
        Self { pieces, cumulative, total: acc, dim: poly.dim() }
    }

    fn uniforms(&self) -> usize {
        self.dim + usize::from(self.pieces.len() > 1)
    }

    fn sample(&self, u: &[f64], s: &mut Scratch) -> f64 {
        let (piece, rest) = if self.pieces.len() > 1 {
            let k = self.cumulative.partition_point(|&c| c <= u[0] * self.total).min(self.pieces.len() - 1);
            (&self.pieces[k], &u[1..])
        } else {
            (&self.pieces[0], u)
        };
        let n = self.dim;
        s.sort.clear();
        s.sort.extend_from_slice(&rest[..n]);
        s.sort.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.lam.clear();
        let mut prev = 0.0;
        for k in 0..=n {
            let next = if k < n { s.sort[k] } else { 1.0 };
            s.lam.push(next - prev);
            prev = next;
        }
        let mut weight = self.total;
        if piece.on > 0 && piece.off > 0 {
            let t: f64 = s.lam.iter().zip(&piece.on_face).filter(|(_, &on)| !on).map(|(l, _)| l).sum();
            if t > 0.0 && t < 1.0 {
                let r = t * t;
                let (a, b) = (r / t, (1.0 - r) / (1.0 - t));
                for (l, &on) in s.lam.iter_mut().zip(&piece.on_face) {
                    *l *= if on { b } else { a };
                }
                weight *= 2.0 * t.powi(piece.off) * (1.0 + t).powi(piece.on - 1);
            }
        }
        s.x.iter_mut().for_each(|o| *o = 0.0);
        for (l, v) in s.lam.iter().zip(&piece.vertices) {
            for (o, c) in s.x.iter_mut().zip(v) {
                *o += l * c;
            }
        }
        weight
    }
}

/// Homogeneous rows whose zero sets carry the singularities of the density
/// after the map `m`: the unbounded dual axes pulled back through `m`.
fn singular_rows(system: &FibredSystem, m: &IntMatrix) -> Result<Vec<Vec<BigInt>>> {
    let Some(b) = dual_domain(system)?.bounds() else {
        return Ok(Vec::new());
    };
    Ok(b.unbounded_axes().into_iter().map(|k| m.rows().nth(k + 1).unwrap().to_vec()).collect())
}

/// Monte Carlo estimate of `μ(B(k₁,…,k_s)) = ∫_B h(x) dx`.
pub fn cylinder_measure(system: &FibredSystem, digits: &[Digit], params: &MeasureParams) -> Result<MeasureEstimate> {
    let cyl = system.cylinder(digits)?;
    require_full(system)?;
    check_integrable(system, &cyl)?;
    let dual = dual_domain(system)?;
    let n = system.n();
    let side = n + 1;
    let (value, stderr) = match params.method {
        Method::ChangeOfVariables => {
            let dom = system.domain();
            let v = cyl.map.to_f64();
            match dom.polytope() {
                Some(poly) => {
                    let sampler = TiltedSampler::new(poly, &singular_rows(system, &cyl.map)?);
                    monte_carlo(sampler.uniforms(), n, params, |u, s| {
                        let w = sampler.sample(u, s);
                        let den = v.act_into(&s.x, &mut s.y)?;
                        Ok(w * kernel_domain_integral(&s.y, dual)? * jacobian_from_denominator(den, side))
                    })?
                }
                None => monte_carlo(dom.uniforms_per_sample(), n, params, |u, s| {
                    let w = dom.sample_from_uniforms(u, &mut s.sort, &mut s.x);
                    let den = v.act_into(&s.x, &mut s.y)?;
                    Ok(w * kernel_domain_integral(&s.y, dual)? * jacobian_from_denominator(den, side))
                })?,
            }
        }
        Method::DirectPolytope => {
            let poly = bounded_cylinder_polytope(system, &cyl)?;
            let sampler = TiltedSampler::new(&poly, &singular_rows(system, &IntMatrix::identity(side))?);
            monte_carlo(sampler.uniforms(), n, params, |u, s| {
                let w = sampler.sample(u, s);
                Ok(w * kernel_domain_integral(&s.x, dual)?)
            })?
        }
    };
    Ok(MeasureEstimate { value, stderr, samples: params.samples, seed: params.seed, method: params.method })
}

fn bounded_cylinder_polytope(system: &FibredSystem, cyl: &CylinderSpec) -> Result<Polytope> {
    let poly = system.cylinder_polytope(cyl, &[])?;
    if !system.domain().is_bounded() {
        let frame = num_rational::BigRational::from_integer(FRAME_BOUND.into());
        if poly.vertices().iter().flatten().any(|c| *c >= frame) {
            return Err(Error::InvalidParams(format!(
                "{} is unbounded; the direct-polytope method needs a bounded cylinder",
                cyl.label()
            )));
        }
    }
    Ok(poly)
}

/// `μ(B(k_s,…,k₁))`, the polar measure of `B(k₁,…,k_s)`.
pub fn polar_measure(system: &FibredSystem, digits: &[Digit], params: &MeasureParams) -> Result<MeasureEstimate> {
    let rev: Vec<Digit> = digits.iter().rev().cloned().collect();
    cylinder_measure(system, &rev, params)
}

/// `μ#(B#(k_s,…,k₁))`, measured on the dual system.
pub fn dual_measure(system: &FibredSystem, digits: &[Digit], params: &MeasureParams) -> Result<MeasureEstimate> {
    polar_measure(&system.dualize()?, digits, params)
}

/// `∫_D h(x) dx` over the whole domain.
pub fn total_measure(system: &FibredSystem, params: &MeasureParams) -> Result<MeasureEstimate> {
    require_full(system)?;
    let dual = dual_domain(system)?;
    let dom = system.domain();
    if let (Some(b), Some(p)) = (dual.bounds(), dom.polytope()) {
        let n = system.n();
        for i in b.unbounded_axes() {
            let ids: Vec<usize> =
                (0..p.vertices().len()).filter(|&v| Zero::is_zero(&p.vertices()[v][i])).collect();
            if !ids.is_empty() && affine_rank(p.vertices(), &ids) + 1 >= n {
                return Err(Error::DivergentIntegral(format!("{} has infinite total mass", system.label())));
            }
        }
    }
    let (value, stderr) = match dom.polytope() {
        Some(poly) => {
            let sampler = TiltedSampler::new(poly, &singular_rows(system, &IntMatrix::identity(system.n() + 1))?);
            monte_carlo(sampler.uniforms(), system.n(), params, |u, s| {
                let w = sampler.sample(u, s);
                Ok(w * kernel_domain_integral(&s.x, dual)?)
            })?
        }
        None => monte_carlo(dom.uniforms_per_sample(), system.n(), params, |u, s| {
            let w = dom.sample_from_uniforms(u, &mut s.sort, &mut s.x);
            Ok(w * kernel_domain_integral(&s.x, dual)?)
        })?,
    };
    Ok(MeasureEstimate { value, stderr, samples: params.samples, seed: params.seed, method: Method::ChangeOfVariables })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryVerdict {
    pub forward: MeasureEstimate,
    pub reversed: MeasureEstimate,
    /// `|forward − reversed| / √(σ_f² + σ_r²)`.
    pub z: f64,
    pub z_crit: f64,
    pub verdict: Verdict,
    /// Set when `3 < z ≤ z_crit`.
    pub warning: bool,
}

/// Seed of the reversed estimate, so the two estimates are independent.
pub fn reversed_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ 0xD1B5_4A32_D192_ED03
}

/// Compares `μ(B(k₁…k_s))` with `μ(B(k_s…k₁))`.
pub fn symmetry_test(system: &FibredSystem, digits: &[Digit], params: &MeasureParams) -> Result<SymmetryVerdict> {
    require_full(system)?;
    let forward = cylinder_measure(system, digits, params)?;
    let rev_params = MeasureParams { seed: reversed_seed(params.seed), ..*params };
    let reversed = polar_measure(system, digits, &rev_params)?;
    Ok(compare(forward, reversed, params.z_crit))
}

/// Builds a verdict from two independent estimates.
pub fn compare(forward: MeasureEstimate, reversed: MeasureEstimate, z_crit: f64) -> SymmetryVerdict {
    let diff = (forward.value - reversed.value).abs();
    let se = forward.stderr.hypot(reversed.stderr);
    let z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let verdict = if z > z_crit { Verdict::Violated } else { Verdict::Consistent };
    SymmetryVerdict { forward, reversed, z, z_crit, verdict, warning: z > 3.0 && z <= z_crit }
}

/// `|K(Vx, y)·ω_V(x) − K(x, V#y)·ω_{V#}(y)|` with `V = V(k₁…k_s)` and
/// `V# = V#(k_s…k₁)`, the dual inverse branch of the reversed string.
pub fn kernel_duality_residual(system: &FibredSystem, digits: &[Digit], x: &[f64], y: &[f64]) -> Result<f64> {
    let n = system.n();
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: if x.len() != n { x.len() } else { y.len() } });
    }
    let mut v = IntMatrix::identity(n + 1);
    let mut v_dual = IntMatrix::identity(n + 1);
    for d in digits {
        let a = system.branch_matrix(d)?;
        v = &v * &a.inverse()?;
    }
    for d in digits.iter().rev() {
        let a = system.branch_matrix(d)?.transpose();
        v_dual = &v_dual * &a.inverse()?;
    }
    let lhs = transported_kernel(&v.to_f64(), x, y)?;
    let rhs = transported_kernel(&v_dual.to_f64(), y, x)?;
    Ok((lhs - rhs).abs())
}

/// `K(act(m, a), b) · ω_m(a)`.
fn transported_kernel(m: &FloatMatrix, a: &[f64], b: &[f64]) -> Result<f64> {
    let mut img = vec![0.0; a.len()];
    let den = m.act_into(a, &mut img)?;
    Ok(kernel(&img, b) * jacobian_from_denominator(den, a.len() + 1))
}
