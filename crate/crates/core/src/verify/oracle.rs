//! Dense linear-algebra oracles for the `p = 2` checks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Kernel};

/// Largest singular value of `W^{1/2} Θ W^{1/2}`, the `L² → L²` norm of the kernel operator.
pub fn top_singular_value(theta: &Kernel) -> f64 {
    let n = theta.size();
    let sw: Vec<f64> = theta.rule().weights().iter().map(|w| w.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| sw[i] * theta.get(i, j) * sw[j]);
    m.singular_values().max()
}

/// Weighted least-squares projection of `x` onto `span{y₁, y₂}`.
pub fn least_squares_projection(x: &GridFunction, y1: &GridFunction, y2: &GridFunction) -> Result<GridFunction> {
    x.ensure_compatible(y1)?;
    x.ensure_compatible(y2)?;
    let sw: Vec<f64> = x.rule().weights().iter().map(|w| w.sqrt()).collect();
    let n = sw.len();
    let a = DMatrix::from_fn(n, 2, |i, j| {
        sw[i] * if j == 0 { y1.samples()[i] } else { y2.samples()[i] }
    });
    let b = DVector::from_fn(n, |i, _| sw[i] * x.samples()[i]);
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Degenerate(format!("least squares failed: {e}")))?;
    y1.combine(coef[0], y2, coef[1])
}
