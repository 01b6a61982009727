//! The metrizable one-form family
//! `b_k(x) = -(2 c_{ik} x^i + c_k) / (2 h(x))`, `h(x) = c_{ij} x^i x^j + <c', x> + c`,
//! and the deformation spray `S = S_0 - 2β𝒞` it induces on a flat spray.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::jets::{Field, Jet, JetVars, TangentSample, Var};
use crate::linalg::{numerical_rank, DEFAULT_RANK_REL_TOL};
use crate::spray::{flat_spray, projective_deform, Spray};

/// Asymmetry above which symmetrizing `c_{ij}` is worth a warning.
const ASYMMETRY_WARN: f64 = 1e-12;

/// Constants `(c_{ij}, c', c)` of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormCoefficients {
    c: DMatrix<f64>,
    cvec: DVector<f64>,
    c0: f64,
}

impl OneFormCoefficients {
    /// `c_matrix` is row-major `n x n`; it is replaced by its symmetric part.
    pub fn new(c_matrix: &[f64], c_vector: &[f64], c_scalar: f64) -> Result<Self> {
        let n = c_vector.len();
        if n < 2 {
            return Err(GeomError::Invalid(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if c_matrix.len() != n * n {
            return Err(GeomError::Dimension {
                expected: n * n,
                got: c_matrix.len(),
            });
        }
        if c_matrix.iter().chain(c_vector).any(|v| !v.is_finite()) || !c_scalar.is_finite() {
            return Err(GeomError::Invalid("coefficients must be finite".into()));
        }
        let raw = DMatrix::from_row_slice(n, n, c_matrix);
        let asym = (&raw - raw.transpose()).abs().max();
        if asym > ASYMMETRY_WARN {
            log::warn!(
                "c_matrix is not symmetric (max |c_ij - c_ji| = {asym:e}); using (C + C^T)/2"
            );
        }
        let c = (&raw + raw.transpose()) * 0.5;
        Ok(OneFormCoefficients {
            c,
            cvec: DVector::from_column_slice(c_vector),
            c0: c_scalar,
        })
    }

    /// `c_{ij} = μ δ_{ij}`, `c' = 0`, `c = 1`.
    pub fn klein(n: usize, mu: f64) -> Result<Self> {
        let c: Vec<f64> = DMatrix::<f64>::identity(n, n)
            .scale(mu)
            .transpose()
            .iter()
            .copied()
            .collect();
        Self::new(&c, &vec![0.0; n], 1.0)
    }

    pub fn dim(&self) -> usize {
        self.cvec.len()
    }

    pub fn c_matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn c_vector(&self) -> &DVector<f64> {
        &self.cvec
    }

    pub fn c_scalar(&self) -> f64 {
        self.c0
    }

    /// Row-major copy of `c_{ij}`.
    pub fn c_row_major(&self) -> Vec<f64> {
        self.c.transpose().iter().copied().collect()
    }

    /// `h(x) = c_{ij} x^i x^j + <c', x> + c`.
    pub fn h(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        (xv.transpose() * &self.c * &xv)[(0, 0)] + self.cvec.dot(&xv) + self.c0
    }

    /// Quadratic and linear parts both vanish, so `b ≡ 0`.
    pub fn is_trivial(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0) && self.cvec.iter().all(|&v| v == 0.0)
    }

    pub(crate) fn h_jet(&self, v: &JetVars) -> Jet {
        let cm = self.c_row_major();
        v.bilinear(&cm, &v.x, &v.x) + v.dot_x(self.cvec.as_slice()) + self.c0
    }

    /// `2 c_{rs} x^r y^s + <c', y>`, i.e. `-2 h β`.
    pub(crate) fn u_jet(&self, v: &JetVars) -> Jet {
        let cm = self.c_row_major();
        v.bilinear(&cm, &v.x, &v.y).scale(2.0) + v.dot_y(self.cvec.as_slice())
    }

    pub(crate) fn nonzero_h(&self, v: &JetVars) -> Result<Jet> {
        let h = self.h_jet(v);
        if h.value() == 0.0 {
            return Err(GeomError::domain("h(x) = 0"));
        }
        Ok(h)
    }
}

/// A one-form `β = b_k(x) y^k` on `M`, with an optional known potential
/// `g(x)` satisfying `b = dg`.
#[derive(Debug, Clone)]
pub struct OneForm {
    components: Vec<Field>,
    beta: Field,
    potential: Option<Field>,
}

impl OneForm {
    /// From component fields `b_k`, which must not depend on `y`.
    pub fn from_components(components: Vec<Field>, potential: Option<Field>) -> Result<Self> {
        let n = components.len();
        if n < 2 {
            return Err(GeomError::Invalid(
                "a one-form needs at least 2 components".into(),
            ));
        }
        if let Some(f) = components.iter().chain(&potential).find(|f| f.dim() != n) {
            return Err(GeomError::Dimension {
                expected: n,
                got: f.dim(),
            });
        }
        let comps = components.clone();
        let beta = Field::from_fn(n, move |v| {
            let p = sample_of(v);
            let mut acc = v.constant(0.0);
            for (k, b) in comps.iter().enumerate() {
                acc += b.jet(&p, v.order())? * &v.y[k];
            }
            Ok(acc)
        });
        Ok(OneForm {
            components,
            beta,
            potential,
        })
    }

    /// Constant components `b_k`; potential `g = b_k x^k`.
    pub fn constant(b: &[f64]) -> Result<Self> {
        let n = b.len();
        let components = b.iter().map(|&bk| Field::constant(n, bk)).collect();
        let w = b.to_vec();
        let potential = Field::from_fn(n, move |v| Ok(v.dot_x(&w)));
        Self::from_components(components, Some(potential))
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Field] {
        &self.components
    }

    /// `β(x, y) = b_k(x) y^k`.
    pub fn beta(&self) -> &Field {
        &self.beta
    }

    pub fn potential(&self) -> Option<&Field> {
        self.potential.as_ref()
    }

    /// Values `b_k(x)` at a sample.
    pub fn values(&self, p: &TangentSample) -> Result<DVector<f64>> {
        let vals = self
            .components
            .iter()
            .map(|b| b.value(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }
}

fn sample_of(v: &JetVars) -> TangentSample {
    let x = v.x.iter().map(Jet::value).collect();
    let y = v.y.iter().map(Jet::value).collect();
    TangentSample::new(x, y).expect("JetVars are built from a valid sample")
}

/// The family one-form for the given constants, with `β` in closed form and
/// potential `g = -½ ln h`.
pub fn family_b(coeffs: &OneFormCoefficients) -> OneForm {
    let n = coeffs.dim();
    let components = (0..n)
        .map(|k| {
            let cf = coeffs.clone();
            Field::from_fn(n, move |v| {
                let h = cf.nonzero_h(v)?;
                let mut num = v.constant(cf.cvec[k]);
                for i in 0..n {
                    num += v.x[i].scale(2.0 * cf.c[(i, k)]);
                }
                (-num).div(&h.scale(2.0))
            })
        })
        .collect();
    let cf = coeffs.clone();
    let beta = Field::from_fn(n, move |v| {
        let h = cf.nonzero_h(v)?;
        (-cf.u_jet(v)).div(&h.scale(2.0))
    });
    OneForm {
        components,
        beta,
        potential: Some(potential(coeffs)),
    }
}

/// `g(x) = -½ ln h(x)`; defined where `h(x) > 0`.
pub fn potential(coeffs: &OneFormCoefficients) -> Field {
    let cf = coeffs.clone();
    Field::from_fn(coeffs.dim(), move |v| {
        let h = cf.h_jet(v);
        if h.value() <= 0.0 {
            return Err(GeomError::domain("potential needs h(x) > 0"));
        }
        Ok(h.ln()?.scale(-0.5))
    })
}

/// Pointwise closedness, regularity and potential diagnostics of a one-form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneFormDiagnostics {
    /// `max_{i<j} |∂_i b_j - ∂_j b_i|`.
    pub closedness_defect: f64,
    /// `det(∂_i b_j + b_i b_j)`.
    pub regularity_det: f64,
    pub regularity_rank: usize,
    /// `det(b_i b_j - ∂_(i b_j))`, half the `y`-Hessian of `β² - S_0 β`.
    pub ricci_regularity_det: f64,
    pub ricci_regularity_rank: usize,
    /// `max_i |b_i - ∂_i g|` when a potential is known.
    pub potential_residual: Option<f64>,
}

pub fn diagnostics(b: &OneForm, p: &TangentSample) -> Result<OneFormDiagnostics> {
    let n = b.dim();
    if p.dim() != n {
        return Err(GeomError::Dimension {
            expected: n,
            got: p.dim(),
        });
    }
    let jets = b
        .components
        .iter()
        .map(|f| f.jet(p, 1))
        .collect::<Result<Vec<_>>>()?;
    let bv = DVector::from_fn(n, |k, _| jets[k].value());
    // db[(i, j)] = ∂_i b_j
    let db = DMatrix::from_fn(n, n, |i, j| jets[j].derivative(&[Var::X(i).index(n)]));
    let mut closedness: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            closedness = closedness.max((db[(i, j)] - db[(j, i)]).abs());
        }
    }
    let outer = &bv * bv.transpose();
    let regularity = &db + &outer;
    let ricci_reg = &outer - (&db + db.transpose()) * 0.5;
    let potential_residual = match &b.potential {
        Some(g) => {
            let gj = g.jet(p, 1)?;
            Some(
                (0..n)
                    .map(|i| (bv[i] - gj.derivative(&[Var::X(i).index(n)])).abs())
                    .fold(0.0, f64::max),
            )
        }
        None => None,
    };
    Ok(OneFormDiagnostics {
        closedness_defect: closedness,
        regularity_det: regularity.determinant(),
        regularity_rank: numerical_rank(&regularity, DEFAULT_RANK_REL_TOL).rank,
        ricci_regularity_det: ricci_reg.determinant(),
        ricci_regularity_rank: numerical_rank(&ricci_reg, DEFAULT_RANK_REL_TOL).rank,
        potential_residual,
    })
}

/// `S = S_0 - 2β𝒞` for the family one-form; the flat spray when `b ≡ 0`.
pub fn deformation_spray(coeffs: &OneFormCoefficients) -> Spray {
    let flat = flat_spray(coeffs.dim()).expect("coefficients have dimension >= 2");
    if coeffs.is_trivial() {
        return flat;
    }
    projective_deform(&flat, family_b(coeffs).beta()).expect("family β is 1-homogeneous")
}
