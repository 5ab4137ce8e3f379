//! Brun's algorithm (subtract the second largest from the largest) and its
//! multiplicative version (subtract the largest multiple).

use num_bigint::BigInt;

use super::{argmax_strict, as_coeff, form, insertion_matrix, int_digit, snap_floor, CellConstraint, Digit, Side, EPS_CELL};
use crate::error::{Error, Result};
use crate::projlin::IntMatrix;

pub(super) fn branch(n: usize, d: &Digit) -> Result<IntMatrix> {
    let i = int_digit(d, "brun")? as usize;
    if i > n {
        return Err(Error::InvalidDigit(format!("brun digit {i} outside 0..={n}")));
    }
    Ok(insertion_matrix(n, i, &[(0, BigInt::from(1)), (1, BigInt::from(-1))], true))
}

fn pair(n: usize, d: &Digit) -> Result<(usize, u64)> {
    match d.as_pair() {
        Some((i, nn)) if (1..=n).contains(&i) && nn >= 1 => Ok((i, nn)),
        _ => Err(Error::InvalidDigit(format!("{d} is not a brun-mult digit i:N with 1 <= i <= {n}, N >= 1"))),
    }
}

pub(super) fn mult_branch(n: usize, d: &Digit) -> Result<IntMatrix> {
    let (i, nn) = pair(n, d)?;
    Ok(insertion_matrix(n, i, &[(0, BigInt::from(1)), (1, -BigInt::from(nn))], true))
}

/// Number of `j ≥ 1` with `x_j ≥ c`, closed side snapped.
fn insertion_index(x: &[f64], c: f64) -> usize {
    x.iter().filter(|&&v| v - c >= -EPS_CELL * (v.abs() + 1.0)).count()
}

pub(super) fn digit(n: usize, side: Side, x: &[f64]) -> Result<Digit> {
    let _ = n;
    match side {
        Side::Primal => Ok(Digit::Int(insertion_index(x, 1.0 - x[0]) as u64)),
        Side::Dual => {
            if x[0] - 1.0 >= -EPS_CELL * (x[0].abs() + 1.0) {
                return Ok(Digit::Int(0));
            }
            Ok(Digit::Int(argmax_strict(x)? as u64 + 1))
        }
    }
}

/// Primal: `xᵢ ≥ 1 − x₁ > x_{i+1}`.
/// Dual: `x₁ ≥ 1` for 0; `x₁ < 1` and `xⱼ < xᵢ` (`j ≠ i`) for `i ≥ 1`.
pub(super) fn cell(n: usize, side: Side, d: &Digit) -> Result<Vec<CellConstraint>> {
    let i = int_digit(d, "brun")? as usize;
    Ok(match side {
        Side::Primal => {
            let upper = if i == 0 { form(n, &[(1, 1)]) } else { form(n, &[(0, -1), (1, 1), (i, 1)]) };
            let lower = if i < n { form(n, &[(0, 1), (1, -1), (i + 1, -1)]) } else { form(n, &[(0, 1), (1, -1)]) };
            vec![CellConstraint::closed(upper), CellConstraint::open(lower)]
        }
        Side::Dual if i == 0 => vec![CellConstraint::closed(form(n, &[(0, -1), (1, 1)]))],
        Side::Dual => {
            let mut v = vec![CellConstraint::open(form(n, &[(0, 1), (1, -1)]))];
            v.extend((1..=n).filter(|&j| j != i).map(|j| CellConstraint::open(form(n, &[(i, 1), (j, -1)]))));
            v
        }
    })
}

pub(super) fn mult_digit(n: usize, side: Side, x: &[f64]) -> Result<Digit> {
    let _ = n;
    match side {
        Side::Primal => {
            if x[0] <= 0.0 {
                return Err(Error::BoundaryPoint);
            }
            let nn = snap_floor(1.0, x[0])?;
            let i = insertion_index(x, 1.0 - nn as f64 * x[0]);
            Ok(Digit::Pair(i, nn))
        }
        Side::Dual => {
            let i = argmax_strict(x)?;
            if x[i] <= 0.0 {
                return Err(Error::BoundaryPoint);
            }
            Ok(Digit::Pair(i + 1, snap_floor(1.0, x[i])?))
        }
    }
}

/// Primal: `N = ⌊1/x₁⌋` and `xᵢ ≥ 1 − N·x₁ > x_{i+1}`.
/// Dual: `i` is the strict argmax and `N = ⌊1/xᵢ⌋`.
pub(super) fn mult_cell(n: usize, side: Side, d: &Digit) -> Result<Vec<CellConstraint>> {
    let (i, nn) = pair(n, d)?;
    let nn = as_coeff(nn)?;
    Ok(match side {
        Side::Primal => {
            let lower = if i < n { form(n, &[(0, 1), (1, -nn), (i + 1, -1)]) } else { form(n, &[(0, 1), (1, -nn)]) };
            vec![
                CellConstraint::closed(form(n, &[(0, 1), (1, -nn)])),
                CellConstraint::open(form(n, &[(0, -1), (1, nn + 1)])),
                CellConstraint::closed(form(n, &[(0, -1), (1, nn), (i, 1)])),
                CellConstraint::open(lower),
            ]
        }
        Side::Dual => {
            let mut v = vec![
                CellConstraint::closed(form(n, &[(0, 1), (i, -nn)])),
                CellConstraint::open(form(n, &[(0, -1), (i, nn + 1)])),
            ];
            v.extend((1..=n).filter(|&j| j != i).map(|j| CellConstraint::open(form(n, &[(i, 1), (j, -1)]))));
            v
        }
    })
}
