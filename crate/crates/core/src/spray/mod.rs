//! Sprays, their nonlinear connection and Jacobi endomorphism.
//!
//! A spray on an open set of `R^n` is `S = y^i ∂/∂x^i - 2 G^i ∂/∂y^i` with
//! coefficients `G^i` positively 2-homogeneous in `y`.

mod geodesic;
pub mod samples;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::jets::{euler_defect, Field, Jet, SampleBox, Sampler, ScalarField, TangentSample, Var};
use crate::linalg::{least_squares, max_abs};

pub use geodesic::{
    collinearity_defect, collinearity_profile, geodesic_integrate, Trajectory, TrajectoryPoint,
};

/// Coefficient provider for a spray.
pub trait SprayField: Send + Sync {
    fn dim(&self) -> usize;

    /// Jets of `G^1..G^n` at `p` up to `order`.
    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>>;
}

/// Shared handle to a spray.
#[derive(Clone)]
pub struct Spray(Arc<dyn SprayField>);

impl fmt::Debug for Spray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Spray(dim = {})", self.0.dim())
    }
}

impl Spray {
    pub fn new(s: impl SprayField + 'static) -> Self {
        Spray(Arc::new(s))
    }

    /// Spray with the given coefficient fields.
    pub fn from_coefficients(fields: Vec<Field>) -> Result<Self> {
        let n = fields.len();
        if n < 2 {
            return Err(GeomError::Invalid(
                "a spray needs at least 2 coefficients".into(),
            ));
        }
        if let Some(f) = fields.iter().find(|f| f.dim() != n) {
            return Err(GeomError::Dimension {
                expected: n,
                got: f.dim(),
            });
        }
        Ok(Spray::new(CoefficientSpray { fields }))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        if p.dim() != self.dim() {
            return Err(GeomError::Dimension {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        self.0.coefficients(p, order)
    }

    pub fn values(&self, p: &TangentSample) -> Result<Vec<f64>> {
        Ok(self.coefficients(p, 0)?.iter().map(Jet::value).collect())
    }

    pub fn in_domain(&self, p: &TangentSample) -> bool {
        self.values(p)
            .map(|g| g.iter().all(|v| v.is_finite()))
            .unwrap_or(false)
    }

    /// The `i`-th coefficient as a standalone scalar field.
    pub fn coefficient_field(&self, i: usize) -> Field {
        Field::new(CoefficientOf {
            spray: self.clone(),
            index: i,
        })
    }
}

struct CoefficientSpray {
    fields: Vec<Field>,
}

impl SprayField for CoefficientSpray {
    fn dim(&self) -> usize {
        self.fields.len()
    }

    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        self.fields.iter().map(|f| f.jet(p, order)).collect()
    }
}

struct CoefficientOf {
    spray: Spray,
    index: usize,
}

impl ScalarField for CoefficientOf {
    fn dim(&self) -> usize {
        self.spray.dim()
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        Ok(self.spray.coefficients(p, order)?.swap_remove(self.index))
    }
}

struct FlatSpray {
    n: usize,
}

impl SprayField for FlatSpray {
    fn dim(&self) -> usize {
        self.n
    }

    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        let zero = Jet::constant(0.0, 2 * p.dim(), order)?;
        Ok(vec![zero; self.n])
    }
}

/// The flat spray `S_0 = y^i ∂/∂x^i` (all `G^i = 0`).
pub fn flat_spray(n: usize) -> Result<Spray> {
    if n < 2 {
        return Err(GeomError::Invalid(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    Ok(Spray::new(FlatSpray { n }))
}

struct ProjectiveDeformation {
    base: Spray,
    factor: Field,
}

impl SprayField for ProjectiveDeformation {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        let base = self.base.coefficients(p, order)?;
        let factor = self.factor.jet(p, order)?;
        let n = p.dim();
        base.into_iter()
            .enumerate()
            .map(|(i, g)| {
                let yi = Jet::variable(p.y()[i], Var::Y(i).index(n), 2 * n, order)?;
                Ok(g + &factor * &yi)
            })
            .collect()
    }
}

/// Number of candidate samples tried when probing a factor's homogeneity.
const HOMOGENEITY_PROBES: usize = 32;

/// `S̃ = S - 2 P 𝒞`, i.e. `G̃^i = G^i + P y^i`.
///
/// `P` must be 1-homogeneous in `y`; this is checked with the Euler relation
/// at the first probe sample inside `P`'s domain.
pub fn projective_deform(spray: &Spray, factor: &Field) -> Result<Spray> {
    let n = spray.dim();
    if factor.dim() != n {
        return Err(GeomError::Dimension {
            expected: n,
            got: factor.dim(),
        });
    }
    let mut sampler = Sampler::new(SampleBox::cube(n, 3.0), 0x5eed);
    let probe = (0..HOMOGENEITY_PROBES)
        .map(|_| sampler.draw())
        .find(|p| factor.in_domain(p))
        .ok_or_else(|| {
            GeomError::domain("no probe sample inside the projective factor's domain")
        })?;
    let defect = euler_defect(factor, &probe, 1.0)?;
    let value = factor.value(&probe)?;
    if defect.abs() > 1e-9 * value.abs().max(1.0) {
        return Err(GeomError::Homogeneity {
            degree: 1,
            euler: defect + value,
            expected: value,
        });
    }
    Ok(projective_deform_unchecked(spray, factor))
}

/// [`projective_deform`] without the homogeneity probe, for factors that are
/// 1-homogeneous by construction.
pub(crate) fn projective_deform_unchecked(spray: &Spray, factor: &Field) -> Spray {
    Spray::new(ProjectiveDeformation {
        base: spray.clone(),
        factor: factor.clone(),
    })
}

/// `N^i_j = ∂G^i/∂y^j` and `G^i_{jk} = ∂N^i_j/∂y^k` at a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionData {
    /// Row `i`, column `j`: `N^i_j`.
    pub n: DMatrix<f64>,
    /// `gjk[i][(j, k)] = G^i_{jk}`.
    pub gjk: Vec<DMatrix<f64>>,
}

pub fn nonlinear_connection(spray: &Spray, p: &TangentSample) -> Result<ConnectionData> {
    let n = p.dim();
    let g = spray.coefficients(p, 2)?;
    let y = |i: usize| Var::Y(i).index(n);
    let conn = DMatrix::from_fn(n, n, |i, j| g[i].derivative(&[y(j)]));
    let gjk = (0..n)
        .map(|i| DMatrix::from_fn(n, n, |j, k| g[i].derivative(&[y(j), y(k)])))
        .collect();
    Ok(ConnectionData { n: conn, gjk })
}

/// Jacobi endomorphism `R^i_j`, its trace and the Ricci scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiData {
    pub r: DMatrix<f64>,
    pub ric: f64,
    pub rho: f64,
}

impl JacobiData {
    fn from_matrix(r: DMatrix<f64>) -> Self {
        let ric = r.trace();
        let rho = ric / (r.nrows() as f64 - 1.0);
        JacobiData { r, ric, rho }
    }
}

/// Jets of `R^i_j = 2 ∂_j G^i - S(N^i_j) - N^i_k N^k_j` up to `order`.
///
/// Needs the spray coefficients two orders higher, so `order <= 1`.
pub fn jacobi_jets(spray: &Spray, p: &TangentSample, order: usize) -> Result<Vec<Vec<Jet>>> {
    let n = p.dim();
    let g = spray.coefficients(p, order + 2)?;
    let gv: Vec<Jet> = g.iter().map(|gi| gi.truncate(order)).collect();
    let ycoord: Vec<Jet> = (0..n)
        .map(|k| Jet::variable(p.y()[k], Var::Y(k).index(n), 2 * n, order))
        .collect::<Result<_>>()?;
    // N^i_j as order+1 jets.
    let conn: Vec<Vec<Jet>> = g
        .iter()
        .map(|gi| (0..n).map(|j| gi.partial(Var::Y(j).index(n))).collect())
        .collect::<Result<_>>()?;

    let mut r = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut rij = g[i].partial(Var::X(j).index(n))?.truncate(order).scale(2.0);
            // S(N^i_j) = y^k ∂_k N^i_j - 2 G^k ∂̇_k N^i_j
            let nij = &conn[i][j];
            for k in 0..n {
                let dx = nij.partial(Var::X(k).index(n))?;
                let dy = nij.partial(Var::Y(k).index(n))?;
                rij = rij - &ycoord[k] * &dx + (&gv[k] * &dy).scale(2.0);
            }
            for k in 0..n {
                rij = rij - conn[i][k].truncate(order) * conn[k][j].truncate(order);
            }
            row.push(rij);
        }
        r.push(row);
    }
    Ok(r)
}

pub fn jacobi(spray: &Spray, p: &TangentSample) -> Result<JacobiData> {
    let jets = jacobi_jets(spray, p, 0)?;
    let n = p.dim();
    Ok(JacobiData::from_matrix(DMatrix::from_fn(n, n, |i, j| {
        jets[i][j].value()
    })))
}

/// `R^i_j = 2∂_jG^i - y^k ∂_k N^i_j + 2 G^k G^i_{jk} - N^i_k N^k_j`, read
/// directly from the second-order Taylor data of the coefficients.
pub fn jacobi_alt(spray: &Spray, p: &TangentSample) -> Result<JacobiData> {
    let n = p.dim();
    let g = spray.coefficients(p, 2)?;
    let xi = |i: usize| Var::X(i).index(n);
    let yi = |i: usize| Var::Y(i).index(n);
    let gval: Vec<f64> = g.iter().map(Jet::value).collect();
    let conn = DMatrix::from_fn(n, n, |i, j| g[i].derivative(&[yi(j)]));
    let r = DMatrix::from_fn(n, n, |i, j| {
        let mut v = 2.0 * g[i].derivative(&[xi(j)]);
        for k in 0..n {
            v -= p.y()[k] * g[i].derivative(&[yi(j), xi(k)]);
            v += 2.0 * gval[k] * g[i].derivative(&[yi(j), yi(k)]);
            v -= conn[(i, k)] * conn[(k, j)];
        }
        v
    });
    Ok(JacobiData::from_matrix(r))
}

/// Ricci curvature `Tr Φ` of a spray as a scalar field (order at most 1).
pub fn ricci_field(spray: &Spray) -> Field {
    Field::new(RicciField {
        spray: spray.clone(),
    })
}

struct RicciField {
    spray: Spray,
}

impl ScalarField for RicciField {
    fn dim(&self) -> usize {
        self.spray.dim()
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        let r = jacobi_jets(&self.spray, p, order)?;
        let mut acc = r[0][0].clone();
        for (i, row) in r.iter().enumerate().skip(1) {
            acc += &row[i];
        }
        Ok(acc)
    }
}

/// Best fit of `Φ = ρ J - α ⊗ 𝒞`, i.e. `R^i_j ≈ ρ δ^i_j - α_j y^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyData {
    pub rho: f64,
    pub alpha: DVector<f64>,
    /// Max entrywise deviation of `R` from the fitted form.
    pub residual: f64,
}

impl IsotropyData {
    /// `i_S α = α_j y^j`.
    pub fn alpha_on_spray(&self, p: &TangentSample) -> f64 {
        self.alpha.iter().zip(p.y()).map(|(a, y)| a * y).sum()
    }
}

pub fn isotropy_decompose(spray: &Spray, p: &TangentSample) -> Result<IsotropyData> {
    let r = jacobi(spray, p)?.r;
    Ok(isotropy_fit(&r, p.y()))
}

pub(crate) fn isotropy_fit(r: &DMatrix<f64>, y: &[f64]) -> IsotropyData {
    let n = y.len();
    // Unknowns: (ρ, α_1..α_n); one equation per entry (i, j).
    let mut a = DMatrix::zeros(n * n, n + 1);
    let mut b = DVector::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            if i == j {
                a[(row, 0)] = 1.0;
            }
            a[(row, 1 + j)] = -y[i];
            b[row] = r[(i, j)];
        }
    }
    let sol = least_squares(&a, &b);
    let fitted = &a * &sol;
    let residual = max_abs((fitted - b).iter().copied());
    IsotropyData {
        rho: sol[0],
        alpha: sol.rows(1, n).into_owned(),
        residual,
    }
}

/// Horizontal lifts `δ/δx^i = ∂/∂x^i - N^j_i ∂/∂y^j` as `2n`-component vectors.
pub fn horizontal_frame(spray: &Spray, p: &TangentSample) -> Result<Vec<DVector<f64>>> {
    let n = p.dim();
    let g = spray.coefficients(p, 1)?;
    Ok((0..n)
        .map(|i| {
            let mut v = DVector::zeros(2 * n);
            v[i] = 1.0;
            for j in 0..n {
                v[n + j] = -g[j].derivative(&[Var::Y(i).index(n)]);
            }
            v
        })
        .collect())
}

/// The spray vector `(y, -2G)` at `p`.
pub fn spray_vector(spray: &Spray, p: &TangentSample) -> Result<DVector<f64>> {
    let n = p.dim();
    let g = spray.values(p)?;
    Ok(DVector::from_fn(2 * n, |a, _| {
        if a < n {
            p.y()[a]
        } else {
            -2.0 * g[a - n]
        }
    }))
}

/// Max over `i` of `|y^j ∂̇_j G^i - 2 G^i|` and `|y^j N^i_j - 2 G^i|`.
pub fn homogeneity_defect(spray: &Spray, p: &TangentSample) -> Result<f64> {
    let n = p.dim();
    let g = spray.coefficients(p, 1)?;
    let mut worst: f64 = 0.0;
    for gi in &g {
        let euler: f64 = (0..n)
            .map(|j| p.y()[j] * gi.derivative(&[Var::Y(j).index(n)]))
            .sum();
        worst = worst.max((euler - 2.0 * gi.value()).abs());
    }
    let conn = nonlinear_connection(spray, p)?;
    let y = DVector::from_column_slice(p.y());
    let contracted = &conn.n * y;
    for i in 0..n {
        worst = worst.max((contracted[i] - 2.0 * g[i].value()).abs());
    }
    Ok(worst)
}

/// Euler defect of a coefficient of the spray, exposed for property tests.
pub fn coefficient_euler_defect(spray: &Spray, i: usize, p: &TangentSample) -> Result<f64> {
    euler_defect(&spray.coefficient_field(i), p, 2.0)
}
