//! Sorted Poincaré map: take successive differences of `(1, x₁, …, xₙ, 0)`
//! and sort them into nonincreasing order.
//!
//! The digit of `x` is the rank permutation `τ`: `τ(j)` is the rank of
//! `d_j = x_{j−1} − x_j` among the differences, largest first. Row `r` of
//! `A_T(τ)` is row `τ⁻¹(r)` of `A_T(e)` (1-based), so the image lists the
//! differences in decreasing order. On the dual side `τ(i)` is the position
//! of the `i`-th smallest entry of `(1, y₁, …, yₙ)`.

use super::{form, CellConstraint, Digit, Side, EPS_CELL};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::polytope::LinearForm;
use crate::projlin::IntMatrix;

fn perm(n: usize, d: &Digit) -> Result<&Permutation> {
    match d.as_perm() {
        Some(p) if p.degree() == n + 1 => Ok(p),
        _ => Err(Error::InvalidDigit(format!("{d} is not a permutation of 1..={}", n + 1))),
    }
}

pub(super) fn branch(n: usize, d: &Digit) -> Result<IntMatrix> {
    Ok(poincare_matrix(n, perm(n, d)?))
}

/// `A_T(τ)` for `τ ∈ S_{n+1}`; valid for every `n ≥ 1`.
pub fn poincare_matrix(n: usize, tau: &Permutation) -> IntMatrix {
    assert_eq!(tau.degree(), n + 1);
    let inv = tau.inverse();
    let mut m = IntMatrix::zeros(n + 1);
    for r in 0..=n {
        let q = inv.apply(r + 1);
        m.set(r, q - 1, 1);
        if q <= n {
            m.set(r, q, -1);
        }
    }
    m
}

/// Order of `values` (1-based positions), ties rejected.
fn ranked(values: &[f64], descending: bool) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = values[a].partial_cmp(&values[b]).unwrap();
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    for w in idx.windows(2) {
        let (a, b) = (values[w[0]], values[w[1]]);
        if (a - b).abs() <= EPS_CELL * (a.abs() + b.abs()).max(1.0) {
            return Err(Error::BoundaryPoint);
        }
    }
    Ok(idx)
}

pub(super) fn digit(n: usize, side: Side, x: &[f64]) -> Result<Digit> {
    match side {
        Side::Primal => {
            let mut d = Vec::with_capacity(n + 1);
            let mut prev = 1.0;
            for &v in x {
                d.push(prev - v);
                prev = v;
            }
            d.push(prev);
            let order = ranked(&d, true)?;
            let mut images = vec![0; n + 1];
            for (rank, &j) in order.iter().enumerate() {
                images[j] = rank + 1;
            }
            Ok(Digit::Perm(Permutation::from_images(images)?))
        }
        Side::Dual => {
            let mut z = Vec::with_capacity(n + 1);
            z.push(1.0);
            z.extend_from_slice(x);
            let order = ranked(&z, false)?;
            Ok(Digit::Perm(Permutation::from_images(order.iter().map(|&j| j + 1).collect())?))
        }
    }
}

/// Primal: `d_{τ⁻¹(r)} > d_{τ⁻¹(r+1)}` for `r = 1..n`.
/// Dual: `z_{τ(i)} < z_{τ(i+1)}` for `z = (1, y)`.
pub(super) fn cell(n: usize, side: Side, d: &Digit) -> Result<Vec<CellConstraint>> {
    let tau = perm(n, d)?;
    let diff = |j: usize| LinearForm::difference(n, j - 1, j);
    let coord = |k: usize| if k == 1 { form(n, &[(0, 1)]) } else { form(n, &[(k - 1, 1)]) };
    Ok(match side {
        Side::Primal => {
            let inv = tau.inverse();
            (1..=n).map(|r| CellConstraint::open(diff(inv.apply(r)).sub(&diff(inv.apply(r + 1))))).collect()
        }
        Side::Dual => (1..=n).map(|i| CellConstraint::open(coord(tau.apply(i + 1)).sub(&coord(tau.apply(i))))).collect(),
    })
}
