//! Flip-flop map: the Selmer branch `S` on `x₁ + xₙ ≤ 1` and the Brun
//! branch `B` on `x₁ + xₙ > 1`. Its jump transformation over the `S`-cell
//! has branches `B·S^k`.

use super::garrity::gs_matrix;
use super::{form, int_digit, CellConstraint, Digit, Side, EPS_CELL};
use crate::error::{Error, Result};
use crate::projlin::IntMatrix;

/// Longest run of `S` steps followed when computing a jump digit.
pub const JUMP_CAP: u64 = 1 << 20;

fn s_matrix(n: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(n + 1);
    m.set(0, n, -1);
    m
}

pub(super) fn branch(n: usize, d: &Digit) -> Result<IntMatrix> {
    match int_digit(d, "flipflop")? {
        0 => Ok(s_matrix(n)),
        1 => Ok(gs_matrix(n, 0)),
        k => Err(Error::InvalidDigit(format!("flipflop digit {k} (expected 0 = S or 1 = B)"))),
    }
}

pub(super) fn jump_branch(n: usize, d: &Digit) -> Result<IntMatrix> {
    let k = int_digit(d, "flipflop-jump")?;
    let k = u32::try_from(k).map_err(|_| Error::InvalidDigit(format!("jump digit {k} is too large")))?;
    Ok(&gs_matrix(n, 0) * &s_matrix(n).pow(k))
}

pub(super) fn digit(n: usize, side: Side, x: &[f64]) -> Result<Digit> {
    let last = x[n - 1];
    match side {
        Side::Primal => {
            let s = 1.0 - x[0] - last;
            if s >= -EPS_CELL * (1.0 + x[0].abs() + last.abs()) {
                if last <= 0.0 {
                    return Err(Error::BoundaryPoint);
                }
                Ok(Digit::Int(0))
            } else {
                Ok(Digit::Int(1))
            }
        }
        Side::Dual => {
            if last - 1.0 >= -EPS_CELL * (1.0 + last.abs()) {
                Ok(Digit::Int(0))
            } else if last <= 0.0 {
                Err(Error::BoundaryPoint)
            } else {
                Ok(Digit::Int(1))
            }
        }
    }
}

/// Primal: `S` on `1 − x₁ − xₙ ≥ 0, xₙ > 0`; `B` on `x₁ + xₙ − 1 > 0`.
/// Dual: `S#` on `yₙ ≥ 1`; `B#` on `0 < yₙ < 1`.
pub(super) fn cell(n: usize, side: Side, d: &Digit) -> Result<Vec<CellConstraint>> {
    let k = int_digit(d, "flipflop")?;
    Ok(match (side, k) {
        (Side::Primal, 0) => vec![
            CellConstraint::closed(form(n, &[(0, 1), (1, -1), (n, -1)])),
            CellConstraint::open(form(n, &[(n, 1)])),
        ],
        (Side::Primal, _) => vec![CellConstraint::open(form(n, &[(0, -1), (1, 1), (n, 1)]))],
        (Side::Dual, 0) => vec![CellConstraint::closed(form(n, &[(0, -1), (n, 1)]))],
        (Side::Dual, _) => {
            vec![CellConstraint::open(form(n, &[(0, 1), (n, -1)])), CellConstraint::open(form(n, &[(n, 1)]))]
        }
    })
}

/// Counts `S` steps until the orbit enters the `B`-cell (primal), or applies
/// `B#` and then counts `S#` steps (dual).
pub(super) fn jump_digit(n: usize, side: Side, x: &[f64]) -> Result<Digit> {
    let mut cur = x.to_vec();
    let mut buf = vec![0.0; n];
    let (first, repeat) = match side {
        Side::Primal => (None, s_matrix(n).to_f64()),
        Side::Dual => {
            if digit(n, side, x)? != Digit::Int(1) {
                return Err(Error::BoundaryPoint);
            }
            (Some(gs_matrix(n, 0).transpose().to_f64()), s_matrix(n).transpose().to_f64())
        }
    };
    if let Some(b) = first {
        b.act_into(&cur, &mut buf)?;
        std::mem::swap(&mut cur, &mut buf);
    }
    for k in 0..JUMP_CAP {
        if digit(n, side, &cur)? == Digit::Int(1) {
            return Ok(Digit::Int(k));
        }
        repeat.act_into(&cur, &mut buf)?;
        std::mem::swap(&mut cur, &mut buf);
    }
    Err(Error::InvalidParams(format!("orbit stays in the S-cell for more than {JUMP_CAP} steps")))
}

/// Pulls the flip-flop cells back along the `k + 1` steps of a jump branch.
pub(super) fn jump_cell(n: usize, side: Side, d: &Digit) -> Result<Vec<CellConstraint>> {
    let k = int_digit(d, "flipflop-jump")?;
    let s_digit = Digit::Int(0);
    let b_digit = Digit::Int(1);
    let mut out = Vec::new();
    let pull = |cells: Vec<CellConstraint>, m: &IntMatrix, out: &mut Vec<CellConstraint>| -> Result<()> {
        for c in cells {
            out.push(CellConstraint { form: c.form.pull_back(m)?, strict: c.strict });
        }
        Ok(())
    };
    match side {
        Side::Primal => {
            let s = s_matrix(n);
            let mut prefix = IntMatrix::identity(n + 1);
            for _ in 0..k {
                pull(cell(n, side, &s_digit)?, &prefix, &mut out)?;
                prefix = &s * &prefix;
            }
            pull(cell(n, side, &b_digit)?, &prefix, &mut out)?;
        }
        Side::Dual => {
            let st = s_matrix(n).transpose();
            let mut prefix = IntMatrix::identity(n + 1);
            pull(cell(n, side, &b_digit)?, &prefix, &mut out)?;
            prefix = gs_matrix(n, 0).transpose();
            for _ in 0..k {
                pull(cell(n, side, &s_digit)?, &prefix, &mut out)?;
                prefix = &st * &prefix;
            }
            // the image must leave the S#-cell: last coordinate below 1
            out.push(CellConstraint::open(form(n, &[(0, 1), (n, -1)]).pull_back(&prefix)?));
        }
    }
    Ok(out)
}
