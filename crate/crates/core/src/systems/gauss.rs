//! Regular continued fraction map `x ↦ 1/x − ⌊1/x⌋` on `[0, 1]`.
//! It coincides with its own dual.

use num_bigint::BigInt;

use super::{as_coeff, int_digit, snap_floor, CellConstraint, Digit};
use crate::error::{Error, Result};
use crate::polytope::LinearForm;
use crate::projlin::IntMatrix;

pub(super) fn branch(d: &Digit) -> Result<IntMatrix> {
    let k = int_digit(d, "gauss")?;
    if k == 0 {
        return Err(Error::InvalidDigit("gauss digits start at 1".into()));
    }
    let mut m = IntMatrix::from_rows(&[[0, 1], [1, 0]])?;
    m.set(1, 1, -BigInt::from(k));
    Ok(m)
}

pub(super) fn digit(x: &[f64]) -> Result<Digit> {
    if x[0] <= 0.0 {
        return Err(Error::BoundaryPoint);
    }
    snap_floor(1.0, x[0]).map(Digit::Int)
}

/// `1 − kx ≥ 0 > 1 − (k+1)x`.
pub(super) fn cell(d: &Digit) -> Result<Vec<CellConstraint>> {
    let k = as_coeff(int_digit(d, "gauss")?)?;
    Ok(vec![
        CellConstraint::closed(LinearForm::new(1, &[-k])),
        CellConstraint::open(LinearForm::new(-1, &[k + 1])),
    ])
}
