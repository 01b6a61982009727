//! Pullbacks of the unit-curvature Klein metric along affine maps
//! `x ↦ Ax + B`, `y ↦ Ay`, and the inverse question of which family members
//! arise this way.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{FinslerMetricDef, MetricKind};
use crate::error::{GeomError, Result};
use crate::jets::{Field, Jet};
use crate::oneform::OneFormCoefficients;

/// Smallest `|det A|` accepted as invertible.
const MIN_ABS_DET: f64 = 1e-12;
/// Eigenvalues of `C` below this fraction of the largest count as zero.
const EIGEN_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl AffineMap {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(GeomError::Dimension {
                expected: n,
                got: a.nrows(),
            });
        }
        if n < 2 {
            return Err(GeomError::Invalid("dimension must be at least 2".into()));
        }
        if a.determinant().abs() <= MIN_ABS_DET {
            return Err(GeomError::Invalid("A is not invertible".into()));
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            a: DMatrix::identity(n, n),
            b: DVector::zeros(n),
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.a * DVector::from_column_slice(x) + &self.b)
            .iter()
            .copied()
            .collect()
    }

    pub fn apply_linear(&self, y: &[f64]) -> Vec<f64> {
        (&self.a * DVector::from_column_slice(y))
            .iter()
            .copied()
            .collect()
    }
}

/// Family constants of the Klein pullback: `2C = A^T A`, `c' = A^T B`,
/// `2c = 1 + |B|²`.
pub fn affine_pullback_klein(map: &AffineMap) -> OneFormCoefficients {
    let ata = map.a.transpose() * &map.a;
    let c: Vec<f64> = (&ata * 0.5).transpose().iter().copied().collect();
    let cv = map.a.transpose() * &map.b;
    OneFormCoefficients::new(&c, cv.as_slice(), 0.5 * (1.0 + map.b.norm_squared()))
        .expect("an invertible map gives valid constants")
}

/// `F_1(Ax + B, Ay)` evaluated through jets.
pub fn klein_pullback_metric(map: &AffineMap) -> FinslerMetricDef {
    let m = map.clone();
    let field = Field::from_fn(map.dim(), move |v| {
        let n = v.dim();
        let lin = |src: &[Jet], shift: bool| -> Vec<Jet> {
            (0..n)
                .map(|i| {
                    let mut acc = v.constant(if shift { m.b[i] } else { 0.0 });
                    for (k, s) in src.iter().enumerate() {
                        if m.a[(i, k)] != 0.0 {
                            acc += s.scale(m.a[(i, k)]);
                        }
                    }
                    acc
                })
                .collect()
        };
        let xb = lin(&v.x, true);
        let yb = lin(&v.y, false);
        let dot = |a: &[Jet], b: &[Jet]| {
            let mut acc = v.constant(0.0);
            for (u, w) in a.iter().zip(b) {
                acc += u * w;
            }
            acc
        };
        let w = dot(&xb, &xb) + 1.0;
        let rad = &w * &dot(&yb, &yb) - dot(&xb, &yb).square();
        if rad.value() <= 0.0 {
            return Err(GeomError::domain("radicand is not positive"));
        }
        rad.sqrt()?.div(&w)
    });
    FinslerMetricDef::new(field, MetricKind::Klein)
}

/// Why a family member is not an affine pullback of the Klein metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RealizabilityWitness {
    /// `C` has eigenvalues of both signs, so no rescaling of `2C` equals `A^T A`.
    CIndefinite { eigenvalues: Vec<f64> },
    /// `C` is singular, so `A` would not be invertible.
    CSingular { eigenvalues: Vec<f64> },
    /// `2tc = 1 + |b|²` forces a scale `t` whose sign contradicts the
    /// definiteness of `C` (or no finite `t` exists).
    ScaleSign { required_scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Realizability {
    /// `F` of the constants equals `F_1 ∘ (map)`. The constants match the
    /// pullback of `map` after multiplying them by `scale`, which leaves `F`
    /// unchanged.
    Realizable {
        map: AffineMap,
        scale: f64,
    },
    NotRealizable {
        witness: RealizabilityWitness,
    },
}

impl Realizability {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Realizability::Realizable { .. })
    }
}

/// Looks for `A`, `B` and `t ≠ 0` with `2tC = A^T A`, `tc' = A^T B` and
/// `2tc = 1 + |B|²`.
///
/// Eliminating `B` gives `t (2c - ½ c'^T C^{-1} c') = 1`, so `t` is determined
/// once `C` is definite, and `tC` must be positive definite.
pub fn affine_realizability(coeffs: &OneFormCoefficients) -> Realizability {
    let c = coeffs.c_matrix().clone();
    let eig = c.clone().symmetric_eigen();
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let largest = eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let threshold = EIGEN_REL_TOL * largest;
    if largest == 0.0 || eigenvalues.iter().any(|e| e.abs() <= threshold) {
        return Realizability::NotRealizable {
            witness: RealizabilityWitness::CSingular { eigenvalues },
        };
    }
    let positive = eigenvalues.iter().all(|&e| e > 0.0);
    let negative = eigenvalues.iter().all(|&e| e < 0.0);
    if !positive && !negative {
        return Realizability::NotRealizable {
            witness: RealizabilityWitness::CIndefinite { eigenvalues },
        };
    }
    let cv = coeffs.c_vector().clone();
    let cinv_cv = c.clone().lu().solve(&cv).expect("C is nonsingular here");
    let denom = 2.0 * coeffs.c_scalar() - 0.5 * cv.dot(&cinv_cv);
    let t = 1.0 / denom;
    if !t.is_finite() || (t > 0.0) != positive {
        return Realizability::NotRealizable {
            witness: RealizabilityWitness::ScaleSign { required_scale: t },
        };
    }
    let two_tc = &c * (2.0 * t);
    let chol = two_tc
        .cholesky()
        .expect("2tC is positive definite by the sign check");
    let a = chol.l().transpose();
    let b = a
        .transpose()
        .lu()
        .solve(&(&cv * t))
        .expect("A is invertible");
    Realizability::Realizable {
        map: AffineMap { a, b },
        scale: t,
    }
}
