//! Registry of fibred systems: digits, branch matrices, partitions,
//! cylinders, duals and the flip-flop jump transformation.
//!
//! Every system acts on a domain in ℝⁿ through integer matrices, one per
//! digit. The dual system uses the transposed matrices on the dual domain.
//! Cells are described by integer half-spaces, which makes cylinder sets exact
//! polytopes (pull the cell constraints back along the orbit).

mod brun;
pub mod domain;
mod flipflop;
mod garrity;
mod gauss;
pub(crate) mod poincare;
mod selmer;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

pub use domain::{AxisBox, CellConstraint, DomainKind, DomainSpec};
pub use poincare::poincare_matrix;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::polytope::{LinearForm, Polytope};
use crate::projlin::{IntMatrix, ProjPoint};

/// Relative tolerance on the cell inequalities.
pub const EPS_CELL: f64 = 1e-12;
/// Absolute slack allowed on domain membership (orbit round-off).
pub const DOMAIN_TOL: f64 = 1e-10;
/// Unbounded domains are cut at this coordinate when a cylinder has to be
/// realised as a polytope.
pub const FRAME_BOUND: i64 = 1 << 20;

/// A digit of one of the registered alphabets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Digit {
    /// Integer digit, or a cell index for Selmer and Brun.
    Int(u64),
    /// Brun multiplicative `(i, N)`.
    Pair(usize, u64),
    /// Poincaré permutation digit.
    Perm(Permutation),
}

impl Digit {
    pub fn as_int(&self) -> Option<u64> {
        match self {
            Digit::Int(k) => Some(*k),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(usize, u64)> {
        match self {
            Digit::Pair(i, n) => Some((*i, *n)),
            _ => None,
        }
    }

    pub fn as_perm(&self) -> Option<&Permutation> {
        match self {
            Digit::Perm(p) => Some(p),
            _ => None,
        }
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Digit::Int(k) => write!(f, "{k}"),
            Digit::Pair(i, n) => write!(f, "{i}:{n}"),
            Digit::Perm(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Debug for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Digit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Comma-free rendering of a digit string, e.g. `(12),(123)` or `1,2`.
pub fn format_digits(digits: &[Digit]) -> String {
    digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Gauss,
    #[serde(rename = "gs")]
    GarritySchweiger,
    /// Selmer restricted to `X = Δ(n−1) ∪ Δ(n)`, where it is full.
    Selmer,
    /// Selmer on the whole simplex (not full, no dual).
    SelmerFull,
    Brun,
    BrunMult,
    Poincare,
    #[serde(rename = "flipflop")]
    FlipFlop,
    /// Jump transformation of flip-flop over its S-cell.
    #[serde(rename = "flipflop-jump")]
    FlipFlopJump,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Gauss,
        Algorithm::GarritySchweiger,
        Algorithm::Selmer,
        Algorithm::SelmerFull,
        Algorithm::Brun,
        Algorithm::BrunMult,
        Algorithm::Poincare,
        Algorithm::FlipFlop,
        Algorithm::FlipFlopJump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gauss => "gauss",
            Algorithm::GarritySchweiger => "gs",
            Algorithm::Selmer => "selmer",
            Algorithm::SelmerFull => "selmer-full",
            Algorithm::Brun => "brun",
            Algorithm::BrunMult => "brun-mult",
            Algorithm::Poincare => "poincare",
            Algorithm::FlipFlop => "flipflop",
            Algorithm::FlipFlopJump => "flipflop-jump",
        }
    }

    pub fn is_full(self) -> bool {
        !matches!(self, Algorithm::Brun | Algorithm::SelmerFull)
    }

    /// Smallest and largest supported dimension (`None` = unbounded).
    pub fn dimensions(self) -> (usize, Option<usize>) {
        match self {
            Algorithm::Gauss => (1, Some(1)),
            _ => (2, None),
        }
    }

    pub fn digit_kind(self) -> DigitKind {
        match self {
            Algorithm::Selmer | Algorithm::SelmerFull | Algorithm::Brun => DigitKind::Index,
            Algorithm::BrunMult => DigitKind::Pair,
            Algorithm::Poincare => DigitKind::Perm,
            _ => DigitKind::Int,
        }
    }

    pub fn alphabet(self) -> &'static str {
        match self {
            Algorithm::Gauss => "k >= 1",
            Algorithm::GarritySchweiger | Algorithm::FlipFlopJump => "k >= 0",
            Algorithm::Selmer => "i in {n-1, n}",
            Algorithm::SelmerFull | Algorithm::Brun => "i in 0..=n",
            Algorithm::BrunMult => "i:N with 1 <= i <= n, N >= 1",
            Algorithm::Poincare => "permutations of 1..=n+1 (cycle notation)",
            Algorithm::FlipFlop => "0 (S branch), 1 (B branch)",
        }
    }

    pub fn has_dual(self) -> bool {
        self != Algorithm::SelmerFull
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "gauss" => Algorithm::Gauss,
            "gs" | "garrity-schweiger" | "garrity" => Algorithm::GarritySchweiger,
            "selmer" => Algorithm::Selmer,
            "selmer-full" => Algorithm::SelmerFull,
            "brun" => Algorithm::Brun,
            "brun-mult" | "brun-multiplicative" => Algorithm::BrunMult,
            "poincare" => Algorithm::Poincare,
            "flipflop" | "flip-flop" => Algorithm::FlipFlop,
            "flipflop-jump" | "jump" => Algorithm::FlipFlopJump,
            _ => return Err(Error::UnknownAlgorithm(s.to_string())),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DigitKind {
    Int,
    Index,
    Pair,
    Perm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Primal,
    Dual,
}

/// Digit subset on which a self-duality claim is made.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "digits")]
pub enum DigitSet {
    All,
    List(Vec<Digit>),
    /// `w₀ · Inv(S_{n+1})` for Poincaré.
    W0Coset,
}

impl DigitSet {
    pub fn contains(&self, d: &Digit) -> bool {
        match self {
            DigitSet::All => true,
            DigitSet::List(v) => v.contains(d),
            DigitSet::W0Coset => match d {
                Digit::Perm(p) => {
                    let w0 = Permutation::reversal(p.degree());
                    w0.compose(p).is_involution()
                }
                _ => false,
            },
        }
    }
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitSet::All => write!(f, "all"),
            DigitSet::List(v) => write!(f, "{{{}}}", format_digits(v)),
            DigitSet::W0Coset => write!(f, "w0 Inv(S_(n+1))"),
        }
    }
}

/// Why an expansion stopped before the requested length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stop {
    BoundaryPoint,
    OutOfDomain,
    SingularPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expansion {
    pub digits: Vec<Digit>,
    /// Orbit point after the recorded digits.
    pub point: ProjPoint,
    pub stopped: Option<Stop>,
}

/// A cylinder set `B(k₁,…,k_s)`, the image of the composed inverse branch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderSpec {
    pub system: String,
    pub n: usize,
    pub side: Side,
    pub digits: Vec<Digit>,
    /// `V(k₁,…,k_s) = A(k₁)⁻¹ ⋯ A(k_s)⁻¹`.
    pub map: IntMatrix,
    /// `A(k_s) ⋯ A(k₁)`, the matrix of `T^s` on the cylinder.
    pub forward: IntMatrix,
}

impl CylinderSpec {
    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn label(&self) -> String {
        format!("[{}]", format_digits(&self.digits))
    }
}

/// A multidimensional continued fraction algorithm on one side of its
/// duality.
#[derive(Clone, Debug)]
pub struct FibredSystem {
    algorithm: Algorithm,
    n: usize,
    side: Side,
    domain: DomainSpec,
    dual_domain: Option<DomainSpec>,
}

/// Looks a system up by name.
pub fn registry(name: &str, n: usize) -> Result<FibredSystem> {
    FibredSystem::new(name.parse()?, n)
}

impl FibredSystem {
    pub fn new(algorithm: Algorithm, n: usize) -> Result<Self> {
        let (lo, hi) = algorithm.dimensions();
        if n < lo || hi.is_some_and(|h| n > h) {
            return Err(Error::UnsupportedDimension { system: algorithm.name().into(), n });
        }
        let domain = match algorithm {
            Algorithm::Selmer => selmer::restricted_domain(n),
            _ => DomainSpec::order_simplex(n),
        };
        let dual_domain = match algorithm {
            Algorithm::Gauss => Some(DomainSpec::order_simplex(1)),
            Algorithm::GarritySchweiger | Algorithm::FlipFlopJump => {
                let mut inf = vec![true; n];
                inf[n - 1] = false;
                Some(DomainSpec::orthant_box(&inf))
            }
            Algorithm::Selmer | Algorithm::Poincare | Algorithm::FlipFlop => Some(DomainSpec::orthant_box(&vec![true; n])),
            Algorithm::Brun => {
                let mut inf = vec![false; n];
                inf[0] = true;
                Some(DomainSpec::orthant_box(&inf))
            }
            Algorithm::BrunMult => Some(DomainSpec::orthant_box(&vec![false; n])),
            Algorithm::SelmerFull => None,
        };
        Ok(Self { algorithm, n, side: Side::Primal, domain, dual_domain })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn name(&self) -> &'static str {
        self.algorithm.name()
    }

    /// Name with a `#` suffix on the dual side.
    pub fn label(&self) -> String {
        match self.side {
            Side::Primal => self.name().to_string(),
            Side::Dual => format!("{}#", self.name()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn is_full(&self) -> bool {
        self.algorithm.is_full()
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn dual_domain(&self) -> Option<&DomainSpec> {
        self.dual_domain.as_ref()
    }

    /// Digits on which the algorithm is claimed to be algebraically self-dual.
    pub fn selfdual_digits(&self) -> Option<DigitSet> {
        let n = self.n;
        Some(match self.algorithm {
            Algorithm::Gauss | Algorithm::GarritySchweiger | Algorithm::FlipFlop | Algorithm::FlipFlopJump => DigitSet::All,
            Algorithm::Selmer => DigitSet::List(vec![Digit::Int(n as u64 - 1), Digit::Int(n as u64)]),
            Algorithm::Brun if n == 2 => DigitSet::All,
            Algorithm::Brun => DigitSet::List(vec![Digit::Int(0)]),
            Algorithm::Poincare => DigitSet::W0Coset,
            Algorithm::BrunMult | Algorithm::SelmerFull => return None,
        })
    }

    /// The transposed-matrix system on the dual domain.
    pub fn dualize(&self) -> Result<FibredSystem> {
        let other = self
            .dual_domain
            .clone()
            .ok_or_else(|| Error::InvalidParams(format!("{} has no dual domain", self.name())))?;
        Ok(Self {
            algorithm: self.algorithm,
            n: self.n,
            side: match self.side {
                Side::Primal => Side::Dual,
                Side::Dual => Side::Primal,
            },
            domain: other,
            dual_domain: Some(self.domain.clone()),
        })
    }

    /// Jump transformation of flip-flop over its S-cell: branches `B·S^k`.
    pub fn jump(&self) -> Result<FibredSystem> {
        if self.algorithm != Algorithm::FlipFlop || self.side != Side::Primal {
            return Err(Error::InvalidParams("the jump transformation is defined for the flip-flop map".into()));
        }
        Self::new(Algorithm::FlipFlopJump, self.n)
    }

    fn primal_branch(&self, d: &Digit) -> Result<IntMatrix> {
        let n = self.n;
        match self.algorithm {
            Algorithm::Gauss => gauss::branch(d),
            Algorithm::GarritySchweiger => garrity::branch(n, d),
            Algorithm::Selmer => selmer::branch(n, d, true),
            Algorithm::SelmerFull => selmer::branch(n, d, false),
            Algorithm::Brun => brun::branch(n, d),
            Algorithm::BrunMult => brun::mult_branch(n, d),
            Algorithm::Poincare => poincare::branch(n, d),
            Algorithm::FlipFlop => flipflop::branch(n, d),
            Algorithm::FlipFlopJump => flipflop::jump_branch(n, d),
        }
    }

    /// `A_T(d)`, or its transpose on the dual side.
    pub fn branch_matrix(&self, d: &Digit) -> Result<IntMatrix> {
        let m = self.primal_branch(d)?;
        Ok(match self.side {
            Side::Primal => m,
            Side::Dual => m.transpose(),
        })
    }

    /// Whether `d` belongs to the alphabet.
    pub fn accepts(&self, d: &Digit) -> bool {
        self.primal_branch(d).is_ok()
    }

    /// Half-spaces (within the domain) whose intersection is the cell of `d`.
    pub fn cell_constraints(&self, d: &Digit) -> Result<Vec<CellConstraint>> {
        self.primal_branch(d)?;
        let n = self.n;
        let side = self.side;
        match self.algorithm {
            Algorithm::Gauss => gauss::cell(d),
            Algorithm::GarritySchweiger => garrity::cell(n, side, d),
            Algorithm::Selmer | Algorithm::SelmerFull => selmer::cell(n, side, d),
            Algorithm::Brun => brun::cell(n, side, d),
            Algorithm::BrunMult => brun::mult_cell(n, side, d),
            Algorithm::Poincare => poincare::cell(n, side, d),
            Algorithm::FlipFlop => flipflop::cell(n, side, d),
            Algorithm::FlipFlopJump => flipflop::jump_cell(n, side, d),
        }
    }

    /// The digit whose cell contains `x`.
    ///
    /// Cells are half-open as in their defining inequalities; a point within
    /// [`EPS_CELL`] of a boundary is assigned to the side whose inequality is
    /// closed. Points with no closed side available (ties between strict
    /// inequalities) are rejected with `BoundaryPoint`.
    pub fn digit_of(&self, x: &[f64]) -> Result<Digit> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: x.len() });
        }
        if !self.domain.contains(x, DOMAIN_TOL) {
            return Err(Error::OutOfDomain);
        }
        let n = self.n;
        let side = self.side;
        let d = match self.algorithm {
            Algorithm::Gauss => gauss::digit(x)?,
            Algorithm::GarritySchweiger => garrity::digit(n, side, x)?,
            Algorithm::Selmer => selmer::digit(n, side, x, true)?,
            Algorithm::SelmerFull => selmer::digit(n, side, x, false)?,
            Algorithm::Brun => brun::digit(n, side, x)?,
            Algorithm::BrunMult => brun::mult_digit(n, side, x)?,
            Algorithm::Poincare => poincare::digit(n, side, x)?,
            Algorithm::FlipFlop => flipflop::digit(n, side, x)?,
            Algorithm::FlipFlopJump => flipflop::jump_digit(n, side, x)?,
        };
        for c in self.cell_constraints(&d)? {
            let v = c.form.eval(x);
            let tol = form_tolerance(&c.form, x);
            let ok = if c.strict { v > tol } else { v >= -tol };
            if !ok {
                return Err(Error::BoundaryPoint);
            }
        }
        Ok(d)
    }

    /// Digit of `y` under the dual system.
    pub fn dual_digit_of(&self, y: &[f64]) -> Result<Digit> {
        self.dualize()?.digit_of(y)
    }

    /// One application of the map: the digit and the image point.
    pub fn step(&self, x: &ProjPoint) -> Result<(Digit, ProjPoint)> {
        let d = self.digit_of(x.coords())?;
        let y = self.branch_matrix(&d)?.act(x)?;
        Ok((d, y))
    }

    /// First `s` digits of the orbit of `x`. Stops early (with the reason)
    /// when the orbit hits a cell boundary.
    pub fn expand(&self, x: &ProjPoint, s: usize) -> Result<Expansion> {
        if !self.domain.contains(x.coords(), DOMAIN_TOL) || x.dim() != self.n {
            return Err(Error::OutOfDomain);
        }
        let mut digits = Vec::with_capacity(s);
        let mut point = x.clone();
        for _ in 0..s {
            match self.step(&point) {
                Ok((d, y)) => {
                    digits.push(d);
                    point = y;
                }
                Err(e) => {
                    let stop = match e {
                        Error::BoundaryPoint => Stop::BoundaryPoint,
                        Error::OutOfDomain => Stop::OutOfDomain,
                        Error::SingularPoint => Stop::SingularPoint,
                        other => return Err(other),
                    };
                    return Ok(Expansion { digits, point, stopped: Some(stop) });
                }
            }
        }
        Ok(Expansion { digits, point, stopped: None })
    }

    /// The cylinder of a digit string with its exact composed inverse branch.
    /// For systems that are not full the cylinder is checked for
    /// nonemptiness.
    pub fn cylinder(&self, digits: &[Digit]) -> Result<CylinderSpec> {
        if digits.is_empty() {
            return Err(Error::InvalidParams("a cylinder needs at least one digit".into()));
        }
        let side = self.n + 1;
        let mut map = IntMatrix::identity(side);
        let mut forward = IntMatrix::identity(side);
        for d in digits {
            let a = self.branch_matrix(d)?;
            map = &map * &a.inverse()?;
            forward = &a * &forward;
        }
        let cyl = CylinderSpec { system: self.label(), n: self.n, side: self.side, digits: digits.to_vec(), map, forward };
        if !self.is_full() {
            self.cylinder_polytope(&cyl, &[])?;
        }
        Ok(cyl)
    }

    /// Closure of the cylinder as an exact polytope. Unbounded domains are cut
    /// at [`FRAME_BOUND`] unless `extra` supplies a tighter frame.
    pub fn cylinder_polytope(&self, cyl: &CylinderSpec, extra: &[LinearForm]) -> Result<Polytope> {
        let mut cons = self.domain.constraints();
        cons.extend_from_slice(extra);
        if !self.domain.is_bounded() && extra.is_empty() {
            cons.extend(frame_constraints(self.n, FRAME_BOUND));
        }
        let mut prefix = IntMatrix::identity(self.n + 1);
        for d in &cyl.digits {
            for c in self.cell_constraints(d)? {
                cons.push(c.form.pull_back(&prefix)?);
            }
            prefix = &self.branch_matrix(d)? * &prefix;
        }
        cons.sort_by(|a, b| a.0.cmp(&b.0));
        cons.dedup();
        Polytope::from_constraints(self.n, cons).map_err(|_| Error::EmptyCylinder(cyl.label()))
    }

    /// Whether `x` lies in the (open) cylinder, checked by re-expansion.
    pub fn cylinder_contains(&self, cyl: &CylinderSpec, x: &[f64]) -> Result<bool> {
        let p = ProjPoint::new(x.to_vec())?;
        let e = self.expand(&p, cyl.depth())?;
        Ok(e.stopped.is_none() && e.digits == cyl.digits)
    }

    /// Finite probe set of the alphabet; `bound` caps unbounded digits.
    pub fn probe_digits(&self, bound: u64) -> Vec<Digit> {
        let n = self.n as u64;
        match self.algorithm {
            Algorithm::Gauss => (1..=bound.max(1)).map(Digit::Int).collect(),
            Algorithm::GarritySchweiger | Algorithm::FlipFlopJump => (0..=bound).map(Digit::Int).collect(),
            Algorithm::Selmer => vec![Digit::Int(n - 1), Digit::Int(n)],
            Algorithm::SelmerFull | Algorithm::Brun => (0..=n).map(Digit::Int).collect(),
            Algorithm::BrunMult => (1..=self.n)
                .flat_map(|i| (1..=bound.max(1)).map(move |nn| Digit::Pair(i, nn)))
                .collect(),
            Algorithm::Poincare => Permutation::all(self.n + 1).into_iter().map(Digit::Perm).collect(),
            Algorithm::FlipFlop => vec![Digit::Int(0), Digit::Int(1)],
        }
    }

    pub fn parse_digit(&self, token: &str) -> Result<Digit> {
        let t = token.trim();
        let bad = |why: &str| Error::InvalidDigit(format!("`{t}` for {}: {why}", self.name()));
        let d = match self.algorithm.digit_kind() {
            DigitKind::Int | DigitKind::Index => {
                if self.algorithm == Algorithm::FlipFlop {
                    match t {
                        "S" | "s" => return Ok(Digit::Int(0)),
                        "B" | "b" => return Ok(Digit::Int(1)),
                        _ => {}
                    }
                }
                Digit::Int(t.parse().map_err(|_| bad("expected a nonnegative integer"))?)
            }
            DigitKind::Pair => {
                let body = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(t);
                let parts: Vec<&str> = body.split([':', ',', ' ']).filter(|s| !s.is_empty()).collect();
                if parts.len() != 2 {
                    return Err(bad("expected i:N"));
                }
                let i = parts[0].parse().map_err(|_| bad("bad index"))?;
                let nn = parts[1].parse().map_err(|_| bad("bad multiplier"))?;
                Digit::Pair(i, nn)
            }
            DigitKind::Perm => Digit::Perm(Permutation::parse_cycles(t, self.n + 1)?),
        };
        if !self.accepts(&d) {
            return Err(bad("not in the alphabet"));
        }
        Ok(d)
    }

    /// Parses a digit string: tokens separated by commas or whitespace outside
    /// parentheses.
    pub fn parse_digits(&self, s: &str) -> Result<Vec<Digit>> {
        split_top_level(s).iter().map(|t| self.parse_digit(t)).collect()
    }
}

/// Splits on commas and whitespace that are not inside parentheses.
pub fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            ',' | ' ' | '\t' | '\n' if depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// `xᵢ ≤ bound` for every axis.
pub fn frame_constraints(n: usize, bound: i64) -> Vec<LinearForm> {
    (0..n)
        .map(|i| {
            let mut c = vec![0; n];
            c[i] = -1;
            LinearForm::new(bound, &c)
        })
        .collect()
}

/// Tolerance used when evaluating `form` at `x`.
pub fn form_tolerance(form: &LinearForm, x: &[f64]) -> f64 {
    let scale = form.0[0].unsigned_abs() as f64
        + form.0[1..].iter().zip(x).map(|(&c, &v)| c.unsigned_abs() as f64 * v.abs()).sum::<f64>();
    EPS_CELL * scale
}

// ---- helpers shared by the rule modules ----

/// Affine form from `(index, coefficient)` terms; index 0 is the constant.
fn form(n: usize, terms: &[(usize, i64)]) -> LinearForm {
    let mut v = vec![0i64; n + 1];
    for &(i, c) in terms {
        v[i] += c;
    }
    LinearForm(v)
}

/// `⌊num/den⌋` for `den > 0`, snapped to the closed side `num − k·den ≥ 0`
/// when within tolerance of the next integer.
fn snap_floor(num: f64, den: f64) -> Result<u64> {
    if den <= 0.0 {
        return Err(Error::BoundaryPoint);
    }
    let q = num / den;
    if !q.is_finite() || q >= 9.0e15 {
        return Err(Error::BoundaryPoint);
    }
    let mut k = q.floor();
    let tol = |k: f64| EPS_CELL * (num.abs() + k.abs() * den);
    if num - (k + 1.0) * den >= -tol(k + 1.0) {
        k += 1.0;
    } else if num - k * den < -tol(k) {
        k -= 1.0;
    }
    if k < 0.0 {
        return Err(Error::OutOfDomain);
    }
    Ok(k as u64)
}

/// Index of the strict maximum; ties within tolerance are boundary points.
fn argmax_strict(v: &[f64]) -> Result<usize> {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    let tol = EPS_CELL * v[best].abs();
    if v.iter().enumerate().any(|(i, &x)| i != best && v[best] - x <= tol) {
        return Err(Error::BoundaryPoint);
    }
    Ok(best)
}

fn int_digit(d: &Digit, what: &str) -> Result<u64> {
    d.as_int().ok_or_else(|| Error::InvalidDigit(format!("{d} is not a valid {what} digit")))
}

fn as_coeff(k: u64) -> Result<i64> {
    i64::try_from(k).map_err(|_| Error::InvalidDigit(format!("digit {k} is too large")))
}

/// Matrix whose row `r` is the unit row `e_{rows[r]}`, with the given row
/// replaced by `special` (as `(column, value)` terms).
fn insertion_matrix(n: usize, i: usize, special: &[(usize, BigInt)], shift_before: bool) -> IntMatrix {
    let mut m = IntMatrix::zeros(n + 1);
    for r in 0..=n {
        if r == i {
            for (c, v) in special {
                let cur = m.get(r, *c).clone();
                m.set(r, *c, cur + v);
            }
        } else if r < i && shift_before {
            m.set(r, r + 1, 1);
        } else {
            m.set(r, r, 1);
        }
    }
    m
}

#[cfg(test)]
mod tests;
