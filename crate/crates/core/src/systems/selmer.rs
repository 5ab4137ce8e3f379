//! Selmer's algorithm: subtract the smallest coordinate from the largest and
//! re-sort. The restricted system lives on `X = Δ(n−1) ∪ Δ(n)`.

use num_bigint::BigInt;

use super::{form, insertion_matrix, int_digit, CellConstraint, Digit, DomainKind, DomainSpec, Side, EPS_CELL};
use crate::error::{Error, Result};
use crate::polytope::{order_simplex_constraints, Polytope};
use crate::projlin::IntMatrix;

/// `{x ∈ Δ : x_{n−1} + xₙ ≥ 1}`.
pub(super) fn restricted_domain(n: usize) -> DomainSpec {
    let mut cons = order_simplex_constraints(n);
    cons.push(form(n, &[(0, -1), (n - 1, 1), (n, 1)]));
    let poly = Polytope::from_constraints(n, cons).expect("X is a polytope");
    DomainSpec::from_polytope(DomainKind::RestrictedUnion, poly)
}

pub(super) fn branch(n: usize, d: &Digit, restricted: bool) -> Result<IntMatrix> {
    let i = int_digit(d, "selmer")? as usize;
    let lo = if restricted { n - 1 } else { 0 };
    if i < lo || i > n {
        return Err(Error::InvalidDigit(format!("selmer digit {i} outside {lo}..={n}")));
    }
    Ok(insertion_matrix(n, i, &[(0, BigInt::from(1)), (n, BigInt::from(-1))], true))
}

pub(super) fn digit(n: usize, side: Side, x: &[f64], restricted: bool) -> Result<Digit> {
    match side {
        Side::Primal => {
            let last = x[n - 1];
            if last <= 0.0 {
                return Err(Error::BoundaryPoint);
            }
            let c = 1.0 - last;
            let i = (1..=n).filter(|&j| x[j - 1] - c > EPS_CELL * (x[j - 1].abs() + 1.0)).count();
            if restricted && i + 1 < n {
                // only reachable within the domain tolerance of x_{n-1} + x_n = 1
                return Err(Error::BoundaryPoint);
            }
            Ok(Digit::Int(i as u64))
        }
        Side::Dual => {
            let (a, b) = (x[n - 2], x[n - 1]);
            if (b - a).abs() <= EPS_CELL * (a.abs() + b.abs()) {
                return Err(Error::BoundaryPoint);
            }
            Ok(Digit::Int(if a < b { n as u64 - 1 } else { n as u64 }))
        }
    }
}

/// Primal: `xᵢ > 1 − xₙ ≥ x_{i+1}` with `x₀ = 1`, `x_{n+1} = 0`.
/// Dual: `x_{n−1} < xₙ` for `n − 1`, `x_{n−1} > xₙ` for `n`.
pub(super) fn cell(n: usize, side: Side, d: &Digit) -> Result<Vec<CellConstraint>> {
    let i = int_digit(d, "selmer")? as usize;
    Ok(match side {
        Side::Primal => {
            let upper = if i == 0 { form(n, &[(n, 1)]) } else { form(n, &[(0, -1), (i, 1), (n, 1)]) };
            let lower = if i < n { form(n, &[(0, 1), (n, -1), (i + 1, -1)]) } else { form(n, &[(0, 1), (n, -1)]) };
            vec![CellConstraint::open(upper), CellConstraint::closed(lower)]
        }
        Side::Dual => {
            let f = form(n, &[(n, 1), (n - 1, -1)]);
            if i + 1 == n {
                vec![CellConstraint::open(f)]
            } else {
                vec![CellConstraint::open(f.negate())]
            }
        }
    })
}
