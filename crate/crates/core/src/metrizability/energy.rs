//! Residuals of the metrizability PDE system `L_𝒞 E = 2E`, `d_h E = 0` for a
//! candidate energy, and the regularity of its fiber Hessian.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::jets::{ScalarField, TangentSample, Var};
use crate::linalg::{numerical_rank, DEFAULT_RANK_REL_TOL};
use crate::spray::Spray;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCheck {
    /// `y^i ∂̇_i E - 2E`.
    pub homogeneity_residual: f64,
    /// `d_h E(δ/δx^i) = ∂_i E - N^j_i ∂̇_j E`.
    pub horizontal_residuals: Vec<f64>,
    pub hessian_det: f64,
    pub hessian_rank: usize,
}

impl EnergyCheck {
    pub fn max_residual(&self) -> f64 {
        self.horizontal_residuals
            .iter()
            .fold(self.homogeneity_residual.abs(), |m, r| m.max(r.abs()))
    }

    /// Residuals within `tol` and a nondegenerate Hessian.
    pub fn metricizes(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.hessian_rank == self.horizontal_residuals.len()
    }
}

/// `δf/δx^i = ∂_i f - N^j_i ∂̇_j f` for each `i`.
pub fn horizontal_derivative(
    f: &dyn ScalarField,
    spray: &Spray,
    p: &TangentSample,
) -> Result<DVector<f64>> {
    let n = p.dim();
    let fj = f.jet(p, 1)?;
    let g = spray.coefficients(p, 1)?;
    Ok(DVector::from_fn(n, |i, _| {
        let mut v = fj.derivative(&[Var::X(i).index(n)]);
        for (j, gj) in g.iter().enumerate() {
            v -= gj.derivative(&[Var::Y(i).index(n)]) * fj.derivative(&[Var::Y(j).index(n)]);
        }
        v
    }))
}

pub fn energy_check(
    energy: &dyn ScalarField,
    spray: &Spray,
    p: &TangentSample,
) -> Result<EnergyCheck> {
    let n = spray.dim();
    if energy.dim() != n || p.dim() != n {
        return Err(GeomError::Dimension {
            expected: n,
            got: if energy.dim() != n {
                energy.dim()
            } else {
                p.dim()
            },
        });
    }
    let e = energy.jet(p, 2)?;
    let y = |i: usize| Var::Y(i).index(n);
    let euler: f64 = (0..n).map(|i| p.y()[i] * e.derivative(&[y(i)])).sum();
    let horizontal = horizontal_derivative(energy, spray, p)?;
    let hess = DMatrix::from_fn(n, n, |i, j| e.derivative(&[y(i), y(j)]));
    Ok(EnergyCheck {
        homogeneity_residual: euler - 2.0 * e.value(),
        horizontal_residuals: horizontal.iter().copied().collect(),
        hessian_det: hess.determinant(),
        hessian_rank: numerical_rank(&hess, DEFAULT_RANK_REL_TOL).rank,
    })
}
