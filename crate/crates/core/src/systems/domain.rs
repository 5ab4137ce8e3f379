//! Domains of fibred systems and their samplers.

use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;

use crate::polytope::{LinearForm, Polytope, Simplex};

/// One half-space of a partition cell. `strict` cells exclude the boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellConstraint {
    pub form: LinearForm,
    pub strict: bool,
}

impl CellConstraint {
    pub fn closed(form: LinearForm) -> Self {
        Self { form, strict: false }
    }

    pub fn open(form: LinearForm) -> Self {
        Self { form, strict: true }
    }

    /// Scale used for the relative boundary tolerance.
    pub fn scale(&self) -> f64 {
        self.form.0.iter().map(|c| c.unsigned_abs() as f64).fold(1.0, f64::max)
    }
}

/// Axis-aligned box `Π [lowerᵢ, upperᵢ]`, upper bounds possibly `+∞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    #[serde(serialize_with = "serialize_upper")]
    pub upper: Vec<f64>,
}

fn serialize_upper<S: serde::Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element("inf")?;
        }
    }
    seq.end()
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> crate::Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(crate::Error::InvalidParams("box bounds must have equal, nonzero length".into()));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(a.is_finite() && *a >= 0.0 && b > a) {
                return Err(crate::Error::InvalidParams(format!("invalid box axis [{a}, {b}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.iter().all(|u| u.is_finite())
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&v, (&a, &b))| v >= a - tol && v <= b + tol)
    }

    /// Maps uniforms to a point and returns the importance weight `1/pdf`.
    /// Half-infinite axes use `u = a + t/(1−t)`.
    pub fn sample_from_uniforms(&self, u: &[f64], out: &mut [f64]) -> f64 {
        let mut weight = 1.0;
        for i in 0..self.dim() {
            let (a, b) = (self.lower[i], self.upper[i]);
            if b.is_finite() {
                out[i] = a + (b - a) * u[i];
                weight *= b - a;
            } else {
                let t = u[i];
                let s = 1.0 - t;
                out[i] = a + t / s;
                weight /= s * s;
            }
        }
        weight
    }

    /// Axes whose upper bound is infinite.
    pub fn unbounded_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !self.upper[i].is_finite()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    /// The order simplex `1 ≥ x₁ ≥ … ≥ xₙ ≥ 0`.
    Simplex,
    /// A box, possibly with infinite upper bounds.
    Box,
    /// A union of partition cells of a larger system.
    RestrictedUnion,
}

/// Domain descriptor: membership, sampler and (when bounded) exact geometry.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    kind: DomainKind,
    bounds: Option<AxisBox>,
    polytope: Option<Arc<Polytope>>,
    samplers: Vec<Simplex>,
    cumulative: Vec<f64>,
    volume: Option<f64>,
}

impl DomainSpec {
    pub fn from_polytope(kind: DomainKind, polytope: Polytope) -> Self {
        let samplers: Vec<Simplex> = polytope.simplices().iter().map(|s| s.to_f64()).collect();
        let volume = polytope.volume().to_f64();
        let mut acc = 0.0;
        let cumulative = samplers
            .iter()
            .map(|s| {
                acc += s.volume;
                acc
            })
            .collect();
        Self { kind, bounds: None, polytope: Some(Arc::new(polytope)), samplers, cumulative, volume }
    }

    pub fn order_simplex(n: usize) -> Self {
        Self::from_polytope(DomainKind::Simplex, Polytope::order_simplex(n))
    }

    pub fn from_box(bounds: AxisBox) -> Self {
        if bounds.is_bounded() {
            let n = bounds.dim();
            let mut cons = Vec::with_capacity(2 * n);
            for i in 0..n {
                let mut lo = vec![0; n];
                lo[i] = 1;
                cons.push(LinearForm::new(-(bounds.lower[i] as i64), &lo));
                let mut hi = vec![0; n];
                hi[i] = -1;
                cons.push(LinearForm::new(bounds.upper[i] as i64, &hi));
            }
            let poly = Polytope::from_constraints(n, cons).expect("integer box is a polytope");
            let mut d = Self::from_polytope(DomainKind::Box, poly);
            d.bounds = Some(bounds);
            d
        } else {
            Self { kind: DomainKind::Box, bounds: Some(bounds), polytope: None, samplers: vec![], cumulative: vec![], volume: None }
        }
    }

    /// `[0, ∞)^{free} × [0, 1)^{unit}` style boxes: `true` marks an infinite axis.
    pub fn orthant_box(infinite: &[bool]) -> Self {
        let lower = vec![0.0; infinite.len()];
        let upper = infinite.iter().map(|&inf| if inf { f64::INFINITY } else { 1.0 }).collect();
        Self::from_box(AxisBox::new(lower, upper).expect("valid box"))
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match (&self.bounds, &self.polytope) {
            (Some(b), _) => b.dim(),
            (None, Some(p)) => p.dim(),
            _ => unreachable!("domain has geometry"),
        }
    }

    pub fn bounds(&self) -> Option<&AxisBox> {
        self.bounds.as_ref()
    }

    pub fn polytope(&self) -> Option<&Polytope> {
        self.polytope.as_deref()
    }

    pub fn is_bounded(&self) -> bool {
        self.polytope.is_some()
    }

    pub fn volume(&self) -> Option<f64> {
        self.volume
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.samplers
    }

    /// Closed half-spaces cutting out the domain. Box bounds are assumed
    /// integral, which holds for every registered domain.
    pub fn constraints(&self) -> Vec<LinearForm> {
        if let Some(p) = &self.polytope {
            return p.constraints().to_vec();
        }
        let b = self.bounds.as_ref().expect("domain has geometry");
        let n = b.dim();
        let mut out = Vec::new();
        for i in 0..n {
            let mut c = vec![0; n];
            c[i] = 1;
            out.push(LinearForm::new(-(b.lower[i].round() as i64), &c));
            if b.upper[i].is_finite() {
                c[i] = -1;
                out.push(LinearForm::new(b.upper[i].round() as i64, &c));
            }
        }
        out
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match (&self.bounds, &self.polytope) {
            (Some(b), _) => b.contains(x, tol),
            (None, Some(p)) => p.contains(x, tol),
            _ => false,
        }
    }

    /// Number of uniforms consumed by [`DomainSpec::sample_from_uniforms`].
    pub fn uniforms_per_sample(&self) -> usize {
        match &self.polytope {
            Some(_) if self.samplers.len() > 1 => self.dim() + 1,
            Some(_) => self.dim(),
            None => self.dim(),
        }
    }

    /// Deterministic map from `uniforms_per_sample()` uniforms in `[0,1)` to a
    /// point of the domain; returns `1/pdf` at that point.
    pub fn sample_from_uniforms(&self, u: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> f64 {
        if let Some(b) = &self.bounds {
            return b.sample_from_uniforms(u, out);
        }
        let (simplex, rest) = if self.samplers.len() > 1 {
            let total = *self.cumulative.last().unwrap();
            let target = u[0] * total;
            let k = self.cumulative.partition_point(|&c| c <= target).min(self.samplers.len() - 1);
            (&self.samplers[k], &u[1..])
        } else {
            (&self.samplers[0], u)
        };
        sample_simplex_from_uniforms(simplex, rest, scratch, out);
        self.volume.unwrap_or(f64::NAN)
    }

    /// Draws one point; returns its importance weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        let mut u = vec![0.0; self.uniforms_per_sample()];
        u.iter_mut().for_each(|v| *v = rng.gen::<f64>());
        let mut scratch = Vec::new();
        self.sample_from_uniforms(&u, &mut scratch, out)
    }
}

/// Uniform point of a simplex from `dim` uniforms (sorted spacings).
pub fn sample_simplex_from_uniforms(simplex: &Simplex, u: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) {
    let n = simplex.dim();
    scratch.clear();
    scratch.extend_from_slice(&u[..n]);
    scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut prev = 0.0;
    for k in 0..=n {
        let next = if k < n { scratch[k] } else { 1.0 };
        let w = next - prev;
        prev = next;
        for (o, v) in out.iter_mut().zip(&simplex.vertices[k]) {
            *o += w * v;
        }
    }
}
