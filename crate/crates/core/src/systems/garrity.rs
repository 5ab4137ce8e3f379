//! Garrity–Schweiger map on the order simplex:
//! `T(x) = (x₂/x₁, …, xₙ/x₁, (1 − x₁ − k·xₙ)/x₁)` with `k = ⌊(1 − x₁)/xₙ⌋`.

use num_bigint::BigInt;

use super::{as_coeff, form, int_digit, snap_floor, CellConstraint, Digit, Side};
use crate::error::{Error, Result};
use crate::projlin::IntMatrix;

pub(super) fn branch(n: usize, d: &Digit) -> Result<IntMatrix> {
    let k = int_digit(d, "gs")?;
    Ok(gs_matrix(n, k))
}

/// Rows `e₁, …, eₙ` followed by `e₀ − e₁ − k·eₙ`.
pub(crate) fn gs_matrix(n: usize, k: u64) -> IntMatrix {
    let mut m = IntMatrix::zeros(n + 1);
    for r in 0..n {
        m.set(r, r + 1, 1);
    }
    m.set(n, 0, 1);
    m.set(n, 1, -1);
    m.set(n, n, -BigInt::from(k));
    m
}

pub(super) fn digit(n: usize, side: Side, x: &[f64]) -> Result<Digit> {
    let last = x[n - 1];
    if last <= 0.0 {
        return Err(Error::BoundaryPoint);
    }
    let k = match side {
        Side::Primal => snap_floor(1.0 - x[0], last)?,
        Side::Dual => snap_floor(x[n - 2], last)?,
    };
    Ok(Digit::Int(k))
}

/// Primal: `1 − x₁ − k·xₙ ≥ 0 > 1 − x₁ − (k+1)·xₙ`.
/// Dual: `x_{n−1} − k·xₙ ≥ 0 > x_{n−1} − (k+1)·xₙ`.
pub(super) fn cell(n: usize, side: Side, d: &Digit) -> Result<Vec<CellConstraint>> {
    let k = as_coeff(int_digit(d, "gs")?)?;
    Ok(match side {
        Side::Primal => vec![
            CellConstraint::closed(form(n, &[(0, 1), (1, -1), (n, -k)])),
            CellConstraint::open(form(n, &[(0, -1), (1, 1), (n, k + 1)])),
        ],
        Side::Dual => vec![
            CellConstraint::closed(form(n, &[(n - 1, 1), (n, -k)])),
            CellConstraint::open(form(n, &[(n - 1, -1), (n, k + 1)])),
        ],
    })
}
