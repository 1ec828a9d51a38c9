//! Error norms and observed orders.

use crate::error::{Error, Result};
use crate::grid::ComplexField;

/// Relative discrete 2-norm error over all nodes.
pub fn eps2(approx: &ComplexField, exact: &ComplexField) -> Result<f64> {
    exact.grid().ensure_same(approx.grid())?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, e) in approx.values().iter().zip(exact.values()) {
        num += (a - e).norm_sqr();
        den += e.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((num / den).sqrt())
}

/// Relative max-norm error over all nodes.
pub fn eps_inf(approx: &ComplexField, exact: &ComplexField) -> Result<f64> {
    exact.grid().ensure_same(approx.grid())?;
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for (a, e) in approx.values().iter().zip(exact.values()) {
        num = num.max((a - e).norm());
        den = den.max(e.norm());
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// Observed order `log2(e_coarse / e_fine)` between grids a factor 2 apart.
pub fn noc(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0) {
        return Err(Error::Domain { func: "noc", x: e_coarse });
    }
    if !(e_fine > 0.0) {
        return Err(Error::Domain { func: "noc", x: e_fine });
    }
    Ok((e_coarse / e_fine).log2())
}
