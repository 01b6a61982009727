//! Finsler metrics on open subsets of `R^n`: the projectively flat family and
//! its special cases, their geodesic sprays, flag curvature and the Hamel
//! test for projective flatness.

mod affine;
pub mod closed_form;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::jets::{Field, Jet, JetVars, ScalarField, TangentSample, Var, MAX_ORDER};
use crate::linalg::{least_squares, max_abs, numerical_rank, DEFAULT_RANK_REL_TOL};
use crate::oneform::OneFormCoefficients;
use crate::spray::{flat_spray, jacobi, projective_deform_unchecked, Spray, SprayField};

pub use affine::{
    affine_pullback_klein, affine_realizability, klein_pullback_metric, AffineMap, Realizability,
    RealizabilityWitness,
};

/// Where a metric came from. Every kind except `Custom` is projectively flat
/// by construction, and its geodesic spray is read off the projective factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Family,
    Klein,
    Randers,
    Funk,
    Euclidean,
    Custom,
}

impl MetricKind {
    pub fn is_projectively_flat(self) -> bool {
        self != MetricKind::Custom
    }
}

/// A Finsler function `F`, 1-homogeneous in `y` and positive on its domain.
#[derive(Clone)]
pub struct FinslerMetricDef {
    field: Field,
    kind: MetricKind,
}

impl fmt::Debug for FinslerMetricDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FinslerMetricDef({:?}, dim = {})",
            self.kind,
            self.field.dim()
        )
    }
}

impl FinslerMetricDef {
    pub fn new(field: Field, kind: MetricKind) -> Self {
        FinslerMetricDef { field, kind }
    }

    /// A metric with no projective-flatness assumption.
    pub fn custom(field: Field) -> Self {
        Self::new(field, MetricKind::Custom)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn value(&self, p: &TangentSample) -> Result<f64> {
        self.field.value(p)
    }

    /// `F` is defined, finite and positive at `p`.
    pub fn in_domain(&self, p: &TangentSample) -> bool {
        self.field
            .value(p)
            .map(|v| v.is_finite() && v > 0.0)
            .unwrap_or(false)
    }

    /// `E = ½ F²`.
    pub fn energy(&self) -> Field {
        let f = self.field.clone();
        Field::from_fn(self.dim(), move |v| {
            let fj = f.jet(&sample_of(v), v.order())?;
            Ok(fj.square().scale(0.5))
        })
    }
}

pub(crate) fn sample_of(v: &JetVars) -> TangentSample {
    let x = v.x.iter().map(Jet::value).collect();
    let y = v.y.iter().map(Jet::value).collect();
    TangentSample::new(x, y).expect("JetVars are built from a valid sample")
}

fn positive_sqrt(radicand: Jet) -> Result<Jet> {
    if radicand.value() <= 0.0 {
        return Err(GeomError::domain("radicand is not positive"));
    }
    radicand.sqrt()
}

/// The family `F = sqrt(4h c_{ij}y^iy^j - (2c_{ij}x^iy^j + <c',y>)²) / (2|h|)`,
/// defined where `h ≠ 0` and the radicand is positive.
pub fn family_metric(coeffs: &OneFormCoefficients) -> FinslerMetricDef {
    let cf = coeffs.clone();
    let field = Field::from_fn(coeffs.dim(), move |v| {
        let h = cf.nonzero_h(v)?;
        let cm = cf.c_row_major();
        let yy = v.bilinear(&cm, &v.y, &v.y);
        let u = cf.u_jet(v);
        let rad = (&h * &yy).scale(4.0) - u.square();
        let denom = h.scale(2.0 * h.value().signum());
        positive_sqrt(rad)?.div(&denom)
    });
    FinslerMetricDef::new(field, MetricKind::Family)
}

/// Klein metric of constant curvature `μ`:
/// `F_μ = sqrt((1 + μ|x|²)|y|² - μ<x,y>²) / (1 + μ|x|²)`.
pub fn klein_metric(n: usize, mu: f64) -> FinslerMetricDef {
    let field = Field::from_fn(n, move |v| {
        let id = identity(v.dim());
        let x2 = v.bilinear(&id, &v.x, &v.x);
        let y2 = v.bilinear(&id, &v.y, &v.y);
        let xy = v.bilinear(&id, &v.x, &v.y);
        let w = x2.scale(mu) + 1.0;
        if w.value() <= 0.0 {
            return Err(GeomError::domain("Klein metric needs 1 + μ|x|² > 0"));
        }
        let rad = &w * &y2 - xy.square().scale(mu);
        positive_sqrt(rad)?.div(&w)
    });
    FinslerMetricDef::new(field, MetricKind::Klein)
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// `F = |y|`.
pub fn euclidean_metric(n: usize) -> FinslerMetricDef {
    let field = Field::from_fn(n, move |v| {
        let y2 = v.bilinear(&identity(v.dim()), &v.y, &v.y);
        y2.sqrt()
    });
    FinslerMetricDef::new(field, MetricKind::Euclidean)
}

/// Constants `(λ, c', c)` of the Randers-type and Funk examples, which use
/// `c_{ij} = λ δ_{ij}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaParams {
    pub lambda: f64,
    pub c_vector: Vec<f64>,
    pub c_scalar: f64,
}

impl LambdaParams {
    pub fn new(lambda: f64, c_vector: Vec<f64>, c_scalar: f64) -> Result<Self> {
        if c_vector.len() < 2 {
            return Err(GeomError::Invalid("dimension must be at least 2".into()));
        }
        if !lambda.is_finite() || !c_scalar.is_finite() || c_vector.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::Invalid("parameters must be finite".into()));
        }
        Ok(LambdaParams {
            lambda,
            c_vector,
            c_scalar,
        })
    }

    pub fn dim(&self) -> usize {
        self.c_vector.len()
    }

    /// The family constants `(λδ, c', c)`.
    pub fn coefficients(&self) -> OneFormCoefficients {
        let n = self.dim();
        let mut c = identity(n);
        c.iter_mut().for_each(|v| *v *= self.lambda);
        OneFormCoefficients::new(&c, &self.c_vector, self.c_scalar).expect("validated parameters")
    }
}

/// `F̄ = (sqrt(4λH|y|² - 4λ²<x,y>² - 4λ<c',y><x,y> - <c',y>²) + 2λ<x,y> + <c',y>) / (2H)`
/// with `H = λ|x|² + <c',x> + c`; defined where `F̄ > 0`.
pub fn randers_example(params: &LambdaParams) -> FinslerMetricDef {
    let prm = params.clone();
    let field = Field::from_fn(params.dim(), move |v| {
        let (l, cv) = (prm.lambda, prm.c_vector.as_slice());
        let id = identity(v.dim());
        let x2 = v.bilinear(&id, &v.x, &v.x);
        let y2 = v.bilinear(&id, &v.y, &v.y);
        let xy = v.bilinear(&id, &v.x, &v.y);
        let cy = v.dot_y(cv);
        let hh = x2.scale(l) + v.dot_x(cv) + prm.c_scalar;
        if hh.value() == 0.0 {
            return Err(GeomError::domain("λ|x|² + <c',x> + c = 0"));
        }
        let rad = (&hh * &y2).scale(4.0 * l)
            - xy.square().scale(4.0 * l * l)
            - (&cy * &xy).scale(4.0 * l)
            - cy.square();
        let num = positive_sqrt(rad)? + xy.scale(2.0 * l) + cy;
        let f = num.div(&hh.scale(2.0))?;
        if f.value() <= 0.0 {
            return Err(GeomError::domain("F̄ is not positive here"));
        }
        Ok(f)
    });
    FinslerMetricDef::new(field, MetricKind::Randers)
}

/// Quadratic form `Q = (4λc δ - c' c'^T) / (4c²)` of `φ(y)² = y^T Q y`.
fn funk_quadratic(params: &LambdaParams) -> Result<DMatrix<f64>> {
    let n = params.dim();
    let (l, c) = (params.lambda, params.c_scalar);
    if l * c <= 0.0 {
        return Err(GeomError::Invalid("the Funk example needs λc > 0".into()));
    }
    let cv = DVector::from_column_slice(&params.c_vector);
    let q = (DMatrix::identity(n, n) * (4.0 * l * c) - &cv * cv.transpose()) / (4.0 * c * c);
    if q.clone().cholesky().is_none() {
        return Err(GeomError::Invalid(
            "φ is not a norm: 4λc δ - c'c'^T is not positive definite".into(),
        ));
    }
    Ok(q)
}

/// `φ(y) = sqrt((4λc|y|² - <c',y>²) / (4c²))`.
pub fn funk_norm(params: &LambdaParams, y: &[f64]) -> Result<f64> {
    let q = funk_quadratic(params)?;
    let yv = DVector::from_column_slice(y);
    Ok((yv.transpose() * q * &yv)[(0, 0)].sqrt())
}

/// The Funk metric `Θ` of `φ`, the positive root of `Θ² = φ(y + Θx)²`:
/// with `a = 1 - φ(x)²`, `b = x^T Q y`, `Θ = (b + sqrt(b² + a φ(y)²)) / a`.
/// Defined on `φ(x) < 1`.
pub fn funk_metric(params: &LambdaParams) -> Result<FinslerMetricDef> {
    let q = funk_quadratic(params)?;
    let qm: Vec<f64> = q.transpose().iter().copied().collect();
    let field = Field::from_fn(params.dim(), move |v| {
        let a = -v.bilinear(&qm, &v.x, &v.x) + 1.0;
        if a.value() <= 0.0 {
            return Err(GeomError::NoPositiveRoot);
        }
        let b = v.bilinear(&qm, &v.x, &v.y);
        let c = v.bilinear(&qm, &v.y, &v.y);
        let disc = b.square() + &a * &c;
        (b + positive_sqrt(disc)?).div(&a)
    });
    Ok(FinslerMetricDef::new(field, MetricKind::Funk))
}

/// `|Θ - φ(y + Θx)|` at `p`.
pub fn funk_residual(
    params: &LambdaParams,
    metric: &FinslerMetricDef,
    p: &TangentSample,
) -> Result<f64> {
    let theta = metric.value(p)?;
    let shifted: Vec<f64> = p
        .y()
        .iter()
        .zip(p.x())
        .map(|(y, x)| y + theta * x)
        .collect();
    Ok((theta - funk_norm(params, &shifted)?).abs())
}

/// `P = y^k ∂_k F / (2F)`; jets of order `r` need `F` at order `r + 1`.
pub fn projective_factor_field(metric: &FinslerMetricDef) -> Field {
    let f = metric.field.clone();
    Field::from_fn(metric.dim(), move |v| {
        let n = v.dim();
        let order = v.order();
        let fj = f.jet(&sample_of(v), order + 1)?;
        let mut s0f = v.constant(0.0);
        for k in 0..n {
            s0f += &v.y[k] * &fj.partial(Var::X(k).index(n))?;
        }
        s0f.div(&fj.truncate(order).scale(2.0))
    })
}

/// `max_i |y^j ∂̇_i ∂_j F - ∂_i F|`; zero exactly for projectively flat `F`.
pub fn hamel_defect(metric: &FinslerMetricDef, p: &TangentSample) -> Result<f64> {
    let n = p.dim();
    let f = metric.field.jet(p, 2)?;
    Ok((0..n)
        .map(|i| {
            let lhs: f64 = (0..n)
                .map(|j| p.y()[j] * f.derivative(&[Var::Y(i).index(n), Var::X(j).index(n)]))
                .sum();
            (lhs - f.derivative(&[Var::X(i).index(n)])).abs()
        })
        .fold(0.0, f64::max))
}

/// The geodesic spray. Projectively flat kinds use `G^i = P y^i`; custom
/// metrics go through the Euler-Lagrange equations of `E = ½F²`, which makes
/// their spray available only up to jet order 1.
pub fn geodesic_spray_of(metric: &FinslerMetricDef) -> Spray {
    let n = metric.dim();
    if metric.kind.is_projectively_flat() {
        let flat = flat_spray(n).expect("metric dimension is at least 2");
        projective_deform_unchecked(&flat, &projective_factor_field(metric))
    } else {
        euler_lagrange_spray(&metric.energy())
    }
}

/// Spray of a regular energy: `G^i = ½ g^{il} (y^k ∂_k ∂̇_l E - ∂_l E)`.
pub fn euler_lagrange_spray(energy: &Field) -> Spray {
    Spray::new(EulerLagrangeSpray {
        energy: energy.clone(),
    })
}

struct EulerLagrangeSpray {
    energy: Field,
}

impl SprayField for EulerLagrangeSpray {
    fn dim(&self) -> usize {
        self.energy.dim()
    }

    fn coefficients(&self, p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
        if order + 2 > MAX_ORDER {
            return Err(GeomError::Order {
                requested: order + 2,
                max: MAX_ORDER,
            });
        }
        let n = p.dim();
        let e = self.energy.jet(p, order + 2)?;
        let ycoord: Vec<Jet> = (0..n)
            .map(|k| Jet::variable(p.y()[k], Var::Y(k).index(n), 2 * n, order))
            .collect::<Result<_>>()?;
        let mut g = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for l in 0..n {
            let el = e.partial(Var::Y(l).index(n))?;
            let row = (0..n)
                .map(|i| el.partial(Var::Y(i).index(n)))
                .collect::<Result<Vec<_>>>()?;
            g.push(row);
            let mut r = -e.partial(Var::X(l).index(n))?.truncate(order);
            for (k, yk) in ycoord.iter().enumerate() {
                r += yk * &el.partial(Var::X(k).index(n))?;
            }
            rhs.push(r.scale(0.5));
        }
        let gv = DMatrix::from_fn(n, n, |i, j| g[i][j].value());
        let rank = numerical_rank(&gv, DEFAULT_RANK_REL_TOL).rank;
        if rank < n {
            return Err(GeomError::SingularMetric { rank, n });
        }
        solve_jets(g, rhs)
    }
}

/// Gaussian elimination with partial pivoting on jet-valued systems.
fn solve_jets(mut a: Vec<Vec<Jet>>, mut b: Vec<Jet>) -> Result<Vec<Jet>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
            .expect("non-empty range");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip()?;
        for r in (col + 1)..n {
            let factor = &a[r][col] * &inv;
            for c in col..n {
                let t = &factor * &a[col][c];
                a[r][c] = &a[r][c] - &t;
            }
            let t = &factor * &b[col];
            b[r] = &b[r] - &t;
        }
    }
    let mut z: Vec<Jet> = b.clone();
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in (r + 1)..n {
            acc = acc - &a[r][c] * &z[c];
        }
        z[r] = acc.div(&a[r][r])?;
    }
    Ok(z)
}

/// Best scalar `κ` with `R^i_j ≈ κ (F² δ^i_j - F ∂̇_j F y^i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlagCurvatureResult {
    pub kappa: f64,
    /// Max entrywise deviation of `R` from the fitted form.
    pub residual: f64,
}

pub fn flag_curvature(metric: &FinslerMetricDef, p: &TangentSample) -> Result<FlagCurvatureResult> {
    let spray = geodesic_spray_of(metric);
    let r = jacobi(&spray, p)?.r;
    let n = p.dim();
    let f = metric.field.jet(p, 1)?;
    let fv = f.value();
    let model = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { fv * fv } else { 0.0 };
        delta - fv * f.derivative(&[Var::Y(j).index(n)]) * p.y()[i]
    });
    let a = DMatrix::from_column_slice(n * n, 1, model.as_slice());
    let b = DVector::from_column_slice(r.as_slice());
    let kappa = least_squares(&a, &b)[0];
    let residual = max_abs((r - model * kappa).iter().copied());
    Ok(FlagCurvatureResult { kappa, residual })
}

/// Fiber Hessian `g_{ij} = ∂̇_i ∂̇_j E`, its determinant and numerical rank.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub g: DMatrix<f64>,
    pub det: f64,
    pub rank: usize,
}

pub fn metric_tensor(metric: &FinslerMetricDef, p: &TangentSample) -> Result<MetricTensor> {
    energy_tensor(&metric.energy(), p)
}

/// [`metric_tensor`] for an energy given directly.
pub fn energy_tensor(energy: &dyn ScalarField, p: &TangentSample) -> Result<MetricTensor> {
    let n = p.dim();
    let e = energy.jet(p, 2)?;
    let g = DMatrix::from_fn(n, n, |i, j| {
        e.derivative(&[Var::Y(i).index(n), Var::Y(j).index(n)])
    });
    Ok(MetricTensor {
        det: g.determinant(),
        rank: numerical_rank(&g, DEFAULT_RANK_REL_TOL).rank,
        g,
    })
}
