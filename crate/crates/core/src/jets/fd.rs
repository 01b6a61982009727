//! Central finite-difference oracle, independent of the jet arithmetic.
//!
//! Each index of the multi-index applies one central difference
//! `(f(z + h e_v) - f(z - h e_v)) / 2h`; the operators are nested, so a
//! derivative of degree `k` costs `2^k` value evaluations. Step sizes scale
//! with the derivative degree: `ε^(1/3)` for first derivatives (balances the
//! `h²` truncation against `ε/h` rounding), `ε^(1/4)` for second and `ε^(1/5)`
//! for third, each multiplied by `max(1, |coordinate|)`.

use super::field::ScalarField;
use super::sample::TangentSample;
use crate::error::{GeomError, Result};

/// Relative step for a derivative of the given total degree.
pub fn fd_step(degree: usize) -> f64 {
    let root = match degree {
        0 | 1 => 3.0,
        2 => 4.0,
        _ => 5.0,
    };
    f64::EPSILON.powf(1.0 / root)
}

/// Finite-difference estimate of `∂^|α| f` at `p`, where `vars` lists the
/// coordinate indices (`x` first, then `y`) with repetition.
pub fn fd_oracle(f: &dyn ScalarField, p: &TangentSample, vars: &[usize]) -> Result<f64> {
    if vars.len() > 3 {
        return Err(GeomError::Order {
            requested: vars.len(),
            max: 3,
        });
    }
    let base = p.coords();
    if let Some(&bad) = vars.iter().find(|&&v| v >= base.len()) {
        return Err(GeomError::Invalid(format!(
            "coordinate index {bad} out of range"
        )));
    }
    let rel = fd_step(vars.len());
    let steps: Vec<f64> = vars.iter().map(|&v| rel * base[v].abs().max(1.0)).collect();

    let mut total = 0.0;
    for mask in 0u32..(1 << vars.len()) {
        let mut z = base.clone();
        let mut sign = 1.0;
        for (k, (&v, &h)) in vars.iter().zip(&steps).enumerate() {
            if mask & (1 << k) != 0 {
                z[v] += h;
            } else {
                z[v] -= h;
                sign = -sign;
            }
        }
        let q = TangentSample::from_coords_unchecked(&z);
        total += sign * f.jet(&q, 0)?.value();
    }
    let denom: f64 = steps.iter().map(|h| 2.0 * h).product();
    Ok(total / denom)
}
