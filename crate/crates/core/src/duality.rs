//! Intertwiners between a system and its dual: exact commutation checks,
//! sampled cell mapping, a bounded search, and the Poincaré involution sets.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::projlin::{IntMatrix, ProjPoint};
use crate::systems::poincare::poincare_matrix;
use crate::systems::{Algorithm, Digit, DigitSet, FibredSystem, Side};

/// Probe bound for unbounded alphabets.
pub const K_MAX: u64 = 50;
/// Residual tolerance of the functional commutation check.
pub const FUNCTIONAL_TOL: f64 = 1e-10;

/// Closed-form intertwiners that are not fractional-linear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedForm {
    /// `y ↦ (1, y₂, y₂y₃, …, y₂⋯yₙ)/(1+y₁)` on the Brun cell 0.
    BrunCellZero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "map")]
pub enum IntertwinerKind {
    Matrix(IntMatrix),
    ClosedForm(ClosedForm),
}

/// A map φ from the dual domain to the primal domain, claimed to conjugate
/// `T#` to `T` on the digits of `digits`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Intertwiner {
    pub system: String,
    pub n: usize,
    pub kind: IntertwinerKind,
    pub digits: DigitSet,
}

impl Intertwiner {
    pub fn from_matrix(system: &FibredSystem, m: IntMatrix, digits: DigitSet) -> Result<Self> {
        if m.side() != system.n() + 1 {
            return Err(Error::DimensionMismatch { left: m.side(), right: system.n() + 1 });
        }
        Ok(Self { system: system.name().to_string(), n: system.n(), kind: IntertwinerKind::Matrix(m), digits })
    }

    pub fn matrix(&self) -> Option<&IntMatrix> {
        match &self.kind {
            IntertwinerKind::Matrix(m) => Some(m),
            IntertwinerKind::ClosedForm(_) => None,
        }
    }

    /// φ(y), dual to primal.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        match &self.kind {
            IntertwinerKind::Matrix(m) => Ok(m.act(&ProjPoint::new(y.to_vec())?)?.into_coords()),
            IntertwinerKind::ClosedForm(ClosedForm::BrunCellZero) => {
                let den = 1.0 + y[0];
                if den == 0.0 {
                    return Err(Error::SingularPoint);
                }
                let mut out = Vec::with_capacity(y.len());
                let mut prod = 1.0;
                out.push(1.0 / den);
                for v in &y[1..] {
                    prod *= v;
                    out.push(prod / den);
                }
                Ok(out)
            }
        }
    }

    /// φ⁻¹(x), primal to dual. Matrix maps use the adjugate.
    pub fn apply_inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.kind {
            IntertwinerKind::Matrix(m) => Ok(m.adjugate().act(&ProjPoint::new(x.to_vec())?)?.into_coords()),
            IntertwinerKind::ClosedForm(ClosedForm::BrunCellZero) => {
                if x.contains(&0.0) {
                    return Err(Error::SingularPoint);
                }
                let mut out = Vec::with_capacity(x.len());
                out.push(1.0 / x[0] - 1.0);
                for j in 1..x.len() {
                    out.push(x[j] / x[j - 1]);
                }
                Ok(out)
            }
        }
    }
}

fn ones_where(side: usize, f: impl Fn(usize, usize) -> bool) -> IntMatrix {
    IntMatrix::from_fn(side, |i, j| i64::from(f(i, j)))
}

/// The intertwiners known for the registered systems.
pub fn known_intertwiner(name: &str, n: usize) -> Result<Intertwiner> {
    let system = crate::systems::registry(name, n)?;
    let none = || Error::NoKnownIntertwiner { system: name.to_string(), n };
    let digits = system.selfdual_digits().ok_or_else(none)?;
    let side = n + 1;
    let m = match system.algorithm() {
        Algorithm::Gauss => IntMatrix::identity(2),
        Algorithm::GarritySchweiger | Algorithm::FlipFlopJump => {
            ones_where(side, |i, j| (i < n && j < n && i + j < n) || (i == n && j == n))
        }
        Algorithm::Selmer => IntMatrix::from_fn(side, |i, j| match i + j {
            s if s + 2 <= n => 2,
            s if s == 2 * n => 0,
            _ => 1,
        }),
        Algorithm::Poincare | Algorithm::FlipFlop => ones_where(side, |i, j| i + j <= n),
        Algorithm::Brun if n == 2 => IntMatrix::from_rows(&[[1, 1, 0], [1, 0, 0], [0, 0, 1]])?,
        Algorithm::Brun => {
            return Ok(Intertwiner {
                system: system.name().to_string(),
                n,
                kind: IntertwinerKind::ClosedForm(ClosedForm::BrunCellZero),
                digits,
            })
        }
        Algorithm::BrunMult | Algorithm::SelmerFull => return Err(none()),
    };
    Intertwiner::from_matrix(&system, m, digits)
}

/// Finite probe of the digit set `D`, unbounded digits capped at `k_max`.
pub fn digit_probe(system: &FibredSystem, phi: &Intertwiner, k_max: u64) -> Vec<Digit> {
    system.probe_digits(k_max).into_iter().filter(|d| phi.digits.contains(d)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutationResult {
    pub digit: Digit,
    pub pass: bool,
    /// Largest residual of the sampled functional check (closed forms only).
    pub residual: Option<f64>,
}

fn primal(system: &FibredSystem) -> Result<FibredSystem> {
    match system.side() {
        Side::Primal => Ok(system.clone()),
        Side::Dual => system.dualize(),
    }
}

/// `A_φ·A_{T#}(d) = A_T(d)·A_φ` for each probed digit, exactly. Closed-form
/// intertwiners get a sampled check of `φ∘T# = T∘φ` instead.
pub fn verify_commutation(system: &FibredSystem, phi: &Intertwiner, probe: &[Digit]) -> Result<Vec<CommutationResult>> {
    let primal = primal(system)?;
    let dual = primal.dualize()?;
    probe
        .iter()
        .map(|d| {
            let a = primal.branch_matrix(d)?;
            match &phi.kind {
                IntertwinerKind::Matrix(m) => {
                    let pass = (m * &dual.branch_matrix(d)?) == (&a * m);
                    Ok(CommutationResult { digit: d.clone(), pass, residual: None })
                }
                IntertwinerKind::ClosedForm(_) => {
                    let r = functional_residual(&primal, &dual, phi, d, 10_000, 0x5eed)?;
                    Ok(CommutationResult { digit: d.clone(), pass: r < FUNCTIONAL_TOL, residual: Some(r) })
                }
            }
        })
        .collect()
}

/// Largest `|φ(T#(y)) − T(φ(y))|` over sampled `y` in the dual cell of `d`.
pub fn functional_residual(
    primal: &FibredSystem,
    dual: &FibredSystem,
    phi: &Intertwiner,
    d: &Digit,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = primal.branch_matrix(d)?;
    let at = dual.branch_matrix(d)?;
    let mut worst: f64 = 0.0;
    for y in sample_cell(dual, d, samples, &mut rng)? {
        let lhs = match at.act(&ProjPoint::new(y.clone())?).and_then(|t| phi.apply(t.coords())) {
            Ok(v) => v,
            Err(Error::SingularPoint) => continue,
            Err(e) => return Err(e),
        };
        let rhs = match phi.apply(&y).and_then(|x| a.act(&ProjPoint::new(x)?)) {
            Ok(v) => v.into_coords(),
            Err(Error::SingularPoint) => continue,
            Err(e) => return Err(e),
        };
        for (l, r) in lhs.iter().zip(&rhs) {
            worst = worst.max((l - r).abs() / (1.0 + l.abs()));
        }
    }
    Ok(worst)
}

/// Rejection-samples `count` interior points of the cell of `d`. Points on a
/// cell boundary and coordinates beyond 1e6 are skipped.
fn sample_cell(system: &FibredSystem, d: &Digit, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let n = system.n();
    let mut out = Vec::with_capacity(count);
    let mut x = vec![0.0; n];
    let cap = 2000 * count as u64 + 100_000;
    let mut tries = 0u64;
    while out.len() < count {
        tries += 1;
        if tries > cap {
            return Err(Error::InvalidParams(format!("cell {d} of {} is too thin to sample", system.label())));
        }
        system.domain().sample(rng, &mut x);
        if x.iter().any(|v| *v > 1e6) {
            continue;
        }
        if system.digit_of(&x).ok().as_ref() == Some(d) {
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// Membership counts of one direction of the cell-mapping check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MappingCounts {
    pub inside: usize,
    pub outside: usize,
    /// Images on a cell boundary or the singular set.
    pub excluded: usize,
}

impl MappingCounts {
    pub fn fraction(&self) -> f64 {
        let total = self.inside + self.outside;
        if total == 0 {
            0.0
        } else {
            self.inside as f64 / total as f64
        }
    }

    pub fn pass(&self) -> bool {
        self.outside == 0 && self.inside > 0
    }

    fn record(&mut self, r: Result<Digit>, d: &Digit) {
        match r {
            Ok(e) if &e == d => self.inside += 1,
            Ok(_) | Err(Error::OutOfDomain) => self.outside += 1,
            Err(_) => self.excluded += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellMapping {
    pub digit: Digit,
    /// φ applied to the dual cell, tested against the primal cell.
    pub forward: MappingCounts,
    /// φ⁻¹ applied to the primal cell, tested against the dual cell.
    pub inverse: MappingCounts,
}

impl CellMapping {
    pub fn pass(&self) -> bool {
        self.forward.pass() && self.inverse.pass()
    }

    pub fn fraction(&self) -> f64 {
        let total = self.forward.inside + self.forward.outside + self.inverse.inside + self.inverse.outside;
        if total == 0 {
            0.0
        } else {
            (self.forward.inside + self.inverse.inside) as f64 / total as f64
        }
    }
}

/// Samples both cells of `d` and checks that φ carries dual cell to primal
/// cell and φ⁻¹ carries it back.
pub fn verify_cell_mapping(
    system: &FibredSystem,
    phi: &Intertwiner,
    digit: &Digit,
    samples: usize,
    seed: u64,
) -> Result<CellMapping> {
    let primal = primal(system)?;
    let dual = primal.dualize()?;
    if !phi.digits.contains(digit) {
        return Err(Error::InvalidDigit(format!("{digit} is outside the intertwiner's digit set {}", phi.digits)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forward = MappingCounts::default();
    for y in sample_cell(&dual, digit, samples, &mut rng)? {
        forward.record(phi.apply(&y).and_then(|x| primal.digit_of(&x)), digit);
    }
    let mut inverse = MappingCounts::default();
    for x in sample_cell(&primal, digit, samples, &mut rng)? {
        inverse.record(phi.apply_inverse(&x).and_then(|y| dual.digit_of(&y)), digit);
    }
    Ok(CellMapping { digit: digit.clone(), forward, inverse })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub system: String,
    pub n: usize,
    pub intertwiner: Intertwiner,
    pub commutation: Vec<CommutationResult>,
    pub cell_mapping: Vec<CellMapping>,
    pub pass: bool,
}

impl DualityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("### {} n={}\n\nD = {}\n\n| digit | commutation | cell mapping |\n|---|---|---|\n", self.system, self.n, self.intertwiner.digits);
        for c in &self.commutation {
            let cell = self
                .cell_mapping
                .iter()
                .find(|m| m.digit == c.digit)
                .map(|m| format!("{:.2}%", 100.0 * m.fraction()))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "| {} | {} | {} |", c.digit, if c.pass { "pass" } else { "FAIL" }, cell);
        }
        let _ = writeln!(s, "\nverdict: {}", if self.pass { "pass" } else { "fail" });
        s
    }
}

/// Commutation on the whole probe plus cell mapping on the first
/// `cell_digits` probed digits.
pub fn duality_report(
    system: &FibredSystem,
    phi: &Intertwiner,
    probe: &[Digit],
    cell_digits: usize,
    samples: usize,
    seed: u64,
) -> Result<DualityReport> {
    let commutation = verify_commutation(system, phi, probe)?;
    let cell_mapping = probe
        .iter()
        .take(cell_digits)
        .enumerate()
        .map(|(i, d)| verify_cell_mapping(system, phi, d, samples, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let pass = commutation.iter().all(|c| c.pass) && cell_mapping.iter().all(|c| c.pass());
    Ok(DualityReport { system: system.name().to_string(), n: system.n(), intertwiner: phi.clone(), commutation, cell_mapping, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub matrix: IntMatrix,
    /// Fraction of probed digits whose cells map correctly.
    pub cell_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub examined: u64,
    pub candidates: Vec<Candidate>,
}

/// Reduced row echelon form over ℚ; returns the pivot columns.
fn rref(rows: &mut Vec<Vec<BigRational>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        rows[r].iter_mut().for_each(|v| *v *= &inv);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in 0..cols {
                    let sub = &f * &rows[r][k];
                    rows[i][k] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Divides by the gcd of the entries and makes the first nonzero entry
/// positive.
pub fn normalize(m: &IntMatrix) -> IntMatrix {
    let mut g = BigInt::zero();
    for e in m.entries() {
        g = g.gcd(e);
    }
    if g.is_zero() {
        return m.clone();
    }
    if m.entries().iter().find(|e| !e.is_zero()).is_some_and(|e| e.is_negative()) {
        g = -g;
    }
    let side = m.side();
    let mut out = IntMatrix::zeros(side);
    for i in 0..side {
        for j in 0..side {
            out.set(i, j, m.get(i, j) / &g);
        }
    }
    out
}

/// Symmetric integer matrices with entries in `[−bound, bound]` that commute
/// exactly with every probed digit, ranked by cell-mapping success.
///
/// The commutation equations are linear in the entries, so the search
/// enumerates only the free variables of their solution space.
pub fn search_intertwiner(
    system: &FibredSystem,
    bound: i64,
    probe: &[Digit],
    samples: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let primal = primal(system)?;
    let dual = primal.dualize()?;
    let side = primal.n() + 1;
    if side > 5 || !(1..=3).contains(&bound) {
        return Err(Error::InvalidParams("search needs matrix side ≤ 5 and entry bound in 1..=3".into()));
    }
    if probe.is_empty() {
        return Err(Error::InvalidParams("empty digit probe".into()));
    }
    let vars: Vec<(usize, usize)> = (0..side).flat_map(|i| (i..side).map(move |j| (i, j))).collect();
    let var = |i: usize, j: usize| vars.iter().position(|&v| v == (i.min(j), i.max(j))).unwrap();
    let nv = vars.len();
    let mut rows = Vec::new();
    for d in probe {
        let a = primal.branch_matrix(d)?;
        let at = dual.branch_matrix(d)?;
        for r in 0..side {
            for c in 0..side {
                // (X·A#)[r,c] − (A·X)[r,c]
                let mut row = vec![BigRational::zero(); nv];
                for k in 0..side {
                    row[var(r, k)] += BigRational::from(at.get(k, c).clone());
                    row[var(k, c)] -= BigRational::from(a.get(r, k).clone());
                }
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let pivots = rref(&mut rows, nv);
    let free: Vec<usize> = (0..nv).filter(|c| !pivots.contains(c)).collect();
    let values: Vec<i64> = (-bound..=bound).collect();
    let total = (values.len() as u64).checked_pow(free.len() as u32).unwrap_or(u64::MAX);
    if total > 50_000_000 {
        return Err(Error::InvalidParams(format!("{} free entries: search space too large", free.len())));
    }

    let solve = |index: u64| -> Option<IntMatrix> {
        let mut x = vec![BigRational::zero(); nv];
        let mut rest = index;
        for &f in &free {
            x[f] = BigRational::from_integer(values[(rest % values.len() as u64) as usize].into());
            rest /= values.len() as u64;
        }
        for (row, &p) in rows.iter().zip(&pivots) {
            let mut v = BigRational::zero();
            for &f in &free {
                v -= &row[f] * &x[f];
            }
            if !v.is_integer() || v.abs() > BigRational::from_integer(bound.into()) {
                return None;
            }
            x[p] = v;
        }
        let mut m = IntMatrix::zeros(side);
        for (k, &(i, j)) in vars.iter().enumerate() {
            m.set(i, j, x[k].to_integer());
            m.set(j, i, x[k].to_integer());
        }
        (!m.determinant().is_zero()).then(|| normalize(&m))
    };

    #[cfg(feature = "parallel")]
    let found: BTreeSet<IntMatrix> = {
        use rayon::prelude::*;
        (0..total).into_par_iter().filter_map(solve).collect::<Vec<_>>().into_iter().collect()
    };
    #[cfg(not(feature = "parallel"))]
    let found: BTreeSet<IntMatrix> = (0..total).filter_map(solve).collect();

    let mut candidates = Vec::new();
    for m in found {
        debug_assert!(probe.iter().all(|d| {
            let a = primal.branch_matrix(d).unwrap();
            &m * &dual.branch_matrix(d).unwrap() == &a * &m
        }));
        let phi = Intertwiner::from_matrix(&primal, m.clone(), DigitSet::List(probe.to_vec()))?;
        let mut passed = 0;
        for (i, d) in probe.iter().enumerate() {
            match verify_cell_mapping(&primal, &phi, d, samples, seed.wrapping_add(i as u64)) {
                Ok(c) if c.pass() => passed += 1,
                Ok(_) | Err(Error::InvalidParams(_)) => {}
                Err(e) => return Err(e),
            }
        }
        candidates.push(Candidate { matrix: m, cell_fraction: passed as f64 / probe.len() as f64 });
    }
    if candidates.is_empty() {
        return Err(Error::SearchSpaceExhausted { examined: total });
    }
    candidates.sort_by(|a, b| b.cell_fraction.total_cmp(&a.cell_fraction).then_with(|| a.matrix.cmp(&b.matrix)));
    Ok(SearchOutcome { examined: total, candidates })
}

/// Every σ ∈ S_m with σ² = e.
pub fn involutions(m: usize) -> Vec<Permutation> {
    Permutation::all(m).into_iter().filter(|p| p.is_involution()).collect()
}

/// `{w₀σ : σ ∈ Inv(S_m)}`.
pub fn w0_coset(m: usize) -> Vec<Permutation> {
    let w0 = Permutation::reversal(m);
    involutions(m).into_iter().map(|s| w0.compose(&s)).collect()
}

/// The σ whose Poincaré branch has monomial part `P = A(σ)·A(e)⁻¹` with
/// `B·Pᵗ = P·B`, `B` the reversal matrix.
pub fn involution_criterion_set(m: usize) -> Result<BTreeSet<Permutation>> {
    if m < 2 {
        return Err(Error::InvalidParams("the Poincaré map needs m ≥ 2".into()));
    }
    let n = m - 1;
    let base_inv = poincare_matrix(n, &Permutation::identity(m)).inverse()?;
    let b = IntMatrix::from_fn(m, |i, j| i64::from(i + j == n));
    let mut out = BTreeSet::new();
    for s in Permutation::all(m) {
        let p = &poincare_matrix(n, &s) * &base_inv;
        if &b * &p.transpose() == &p * &b {
            out.insert(s);
        }
    }
    Ok(out)
}

/// Whether the matrix criterion singles out exactly the w₀ coset.
pub fn involution_criterion_check(m: usize) -> Result<bool> {
    let coset: BTreeSet<Permutation> = w0_coset(m).into_iter().collect();
    Ok(involution_criterion_set(m)? == coset)
}

/// `I(m) = I(m−1) + (m−1)·I(m−2)`.
pub fn telephone_number(m: usize) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for k in 1..m {
        (a, b) = (b, b + k as u64 * a);
    }
    b
}

/// Short text form of an intertwiner for tables.
pub fn describe(phi: &Intertwiner) -> String {
    match &phi.kind {
        IntertwinerKind::Matrix(m) => {
            let rows: Vec<String> = m
                .rows()
                .map(|r| format!("[{}]", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
                .collect();
            format!("[{}] on {}", rows.join(","), phi.digits)
        }
        IntertwinerKind::ClosedForm(ClosedForm::BrunCellZero) => {
            format!("(1, y2, y2y3, ...)/(1+y1) on {}", phi.digits)
        }
    }
}
