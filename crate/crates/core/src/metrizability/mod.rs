//! Metrizability of projective deformations `S = S_0 - 2P𝒞` of a flat spray
//! by a Finsler function of nonzero constant flag curvature.
//!
//! The three conditions checked pointwise are
//! 1. `d_J α = 0` for `α = P d_J P + d_J(S_0 P) - 3 d_{h_0} P`,
//! 2. `d_h ρ = 0` for `ρ = P² - S_0 P`,
//! 3. `rank dd_J ρ = 2n`.

mod energy;
mod holonomy;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::jets::{Field, Jet, ScalarField, TangentSample, Var};
use crate::linalg::{numerical_rank, DEFAULT_RANK_REL_TOL};
use crate::spray::Spray;

pub use energy::{energy_check, horizontal_derivative, EnergyCheck};
pub use holonomy::{
    coordinate_field, holonomy_span, horizontal_field, lie_bracket, liouville_field, BracketField,
    FnVectorField, HolonomyReport, VectorField, VectorFieldRef, DEFAULT_HOLONOMY_DEPTH,
};

fn ycoords(p: &TangentSample, order: usize) -> Result<Vec<Jet>> {
    let n = p.dim();
    (0..n)
        .map(|k| Jet::variable(p.y()[k], Var::Y(k).index(n), 2 * n, order))
        .collect()
}

/// `S_0 f = y^k ∂_k f` from a jet of `f` one order higher than the result.
fn flat_derivative(f: &Jet, y: &[Jet]) -> Result<Jet> {
    let n = y.len();
    let mut acc = y[0].lift(0.0);
    for (k, yk) in y.iter().enumerate() {
        acc += yk * &f.partial(Var::X(k).index(n))?;
    }
    Ok(acc)
}

struct RhoField {
    factor: Field,
}

impl ScalarField for RhoField {
    fn dim(&self) -> usize {
        self.factor.dim()
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        let pj = self.factor.jet(p, order + 1)?;
        let y = ycoords(p, order)?;
        let s0p = flat_derivative(&pj, &y)?;
        let pt = pj.truncate(order);
        Ok(&pt * &pt - s0p)
    }
}

/// `ρ = P² - S_0 P` as a scalar field. Jets of order `r` need `P` at order
/// `r + 1`, so `ρ` is available up to order 2.
pub fn rho_of_p(factor: &Field) -> Field {
    Field::new(RhoField {
        factor: factor.clone(),
    })
}

struct AlphaField {
    factor: Field,
    index: usize,
}

impl ScalarField for AlphaField {
    fn dim(&self) -> usize {
        self.factor.dim()
    }

    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        let n = p.dim();
        let i = self.index;
        let pj = self.factor.jet(p, order + 2)?;
        let y = ycoords(p, order + 1)?;
        let s0p = flat_derivative(&pj, &y)?;
        let dy = pj.partial(Var::Y(i).index(n))?.truncate(order);
        let dx = pj.partial(Var::X(i).index(n))?.truncate(order);
        let ds0p = s0p.partial(Var::Y(i).index(n))?;
        Ok(&pj.truncate(order) * &dy + ds0p - dx.scale(3.0))
    }
}

/// Components of `α_i = P ∂̇_i P + ∂̇_i(S_0 P) - 3 ∂_i P` as scalar fields
/// (available up to order 1).
pub fn alpha_fields(factor: &Field) -> Vec<Field> {
    (0..factor.dim())
        .map(|index| {
            Field::new(AlphaField {
                factor: factor.clone(),
                index,
            })
        })
        .collect()
}

/// The semi-basic form `α` at a sample.
pub fn alpha_semibasic(factor: &Field, p: &TangentSample) -> Result<DVector<f64>> {
    check_dim(factor.dim(), p)?;
    let vals = alpha_fields(factor)
        .iter()
        .map(|a| a.value(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(vals))
}

fn check_dim(n: usize, p: &TangentSample) -> Result<()> {
    if p.dim() != n {
        return Err(GeomError::Dimension {
            expected: n,
            got: p.dim(),
        });
    }
    Ok(())
}

/// `max_{i<j} |∂̇_i α_j - ∂̇_j α_i|` at one sample.
pub fn condition_i_defect(factor: &Field, p: &TangentSample) -> Result<f64> {
    check_dim(factor.dim(), p)?;
    let n = p.dim();
    let jets = alpha_fields(factor)
        .iter()
        .map(|a| a.jet(p, 1))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = jets[j].derivative(&[Var::Y(i).index(n)])
                - jets[i].derivative(&[Var::Y(j).index(n)]);
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}

/// `max_i |∂_i ρ - P ∂̇_i ρ - 2ρ ∂̇_i P|` at one sample.
pub fn condition_ii_defect(factor: &Field, p: &TangentSample) -> Result<f64> {
    check_dim(factor.dim(), p)?;
    let n = p.dim();
    let rho = rho_of_p(factor).jet(p, 1)?;
    let pj = factor.jet(p, 1)?;
    let (r, pv) = (rho.value(), pj.value());
    Ok((0..n)
        .map(|i| {
            let (xi, yi) = (Var::X(i).index(n), Var::Y(i).index(n));
            (rho.derivative(&[xi]) - pv * rho.derivative(&[yi]) - 2.0 * r * pj.derivative(&[yi]))
                .abs()
        })
        .fold(0.0, f64::max))
}

/// Max of [`condition_i_defect`] over the samples.
pub fn check_condition_i(factor: &Field, samples: &[TangentSample]) -> Result<f64> {
    samples
        .iter()
        .try_fold(0.0, |m: f64, p| Ok(m.max(condition_i_defect(factor, p)?)))
}

/// Max of [`condition_ii_defect`] over the samples that lie in the spray's
/// domain; a sample outside it is a domain error.
pub fn check_condition_ii(spray: &Spray, factor: &Field, samples: &[TangentSample]) -> Result<f64> {
    samples.iter().try_fold(0.0, |m: f64, p| {
        if !spray.in_domain(p) {
            return Err(GeomError::domain("sample outside the spray's domain"));
        }
        Ok(m.max(condition_ii_defect(factor, p)?))
    })
}

/// Coefficient matrix of the 2-form `dd_J f` in the basis `(dx, dy)`, its
/// numerical rank and spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DdjRank {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Blocks `[[A, -B], [B, 0]]` with `A_{ji} = ∂_j ∂̇_i f - ∂_i ∂̇_j f` and
    /// `B_{ij} = ∂̇_i ∂̇_j f`.
    pub matrix: DMatrix<f64>,
    /// `det B`.
    pub hessian_det: f64,
}

pub fn rank_ddj(f: &dyn ScalarField, p: &TangentSample, rel_tol: f64) -> Result<DdjRank> {
    check_dim(f.dim(), p)?;
    let n = p.dim();
    let j = f.jet(p, 2)?;
    let x = |i: usize| Var::X(i).index(n);
    let y = |i: usize| Var::Y(i).index(n);
    let b = DMatrix::from_fn(n, n, |i, k| j.derivative(&[y(i), y(k)]));
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            m[(r, c)] = j.derivative(&[x(r), y(c)]) - j.derivative(&[x(c), y(r)]);
            m[(r, n + c)] = -b[(r, c)];
            m[(n + r, c)] = b[(r, c)];
        }
    }
    let info = numerical_rank(&m, rel_tol);
    Ok(DdjRank {
        rank: info.rank,
        singular_values: info.singular_values,
        threshold: info.threshold,
        matrix: m,
        hessian_det: b.determinant(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    MetrizableCfc,
    FailsI,
    FailsIi,
    FailsIii,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::MetrizableCfc => "METRIZABLE_CFC",
            Verdict::FailsI => "FAILS_I",
            Verdict::FailsIi => "FAILS_II",
            Verdict::FailsIii => "FAILS_III",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictTolerances {
    /// Threshold for the condition (i) and (ii) defects, and for `ρ ≈ 0`.
    pub zero_tol: f64,
    pub rank_rel_tol: f64,
}

impl Default for VerdictTolerances {
    fn default() -> Self {
        VerdictTolerances {
            zero_tol: 1e-8,
            rank_rel_tol: DEFAULT_RANK_REL_TOL,
        }
    }
}

/// Per-sample results behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleDefects {
    pub dj_alpha_defect: f64,
    pub dh_rho_defect: f64,
    pub ddj_rho_rank: usize,
    pub ddj_rho_singular_values: Vec<f64>,
    /// `det(∂̇_i ∂̇_j ρ)`.
    pub rho_hessian_det: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionDefects {
    pub dj_alpha_defect: f64,
    pub dh_rho_defect: f64,
    /// Minimum rank over the probed samples.
    pub ddj_rho_rank: usize,
    /// Spectrum at the sample attaining the minimum rank.
    pub ddj_rho_singular_values: Vec<f64>,
    pub min_abs_rho_hessian_det: f64,
    pub verdict: Verdict,
    pub per_sample: Vec<SampleDefects>,
    pub probed: Vec<TangentSample>,
}

pub fn sample_defects(
    factor: &Field,
    p: &TangentSample,
    rank_rel_tol: f64,
) -> Result<SampleDefects> {
    let rho = rho_of_p(factor);
    let ddj = rank_ddj(&rho, p, rank_rel_tol)?;
    Ok(SampleDefects {
        dj_alpha_defect: condition_i_defect(factor, p)?,
        dh_rho_defect: condition_ii_defect(factor, p)?,
        ddj_rho_rank: ddj.rank,
        ddj_rho_singular_values: ddj.singular_values,
        rho_hessian_det: ddj.hessian_det,
        rho: rho.value(p)?,
    })
}

/// Aggregates the three conditions over the samples. The verdict is
/// `INCONCLUSIVE` when `ρ` vanishes at every sample, otherwise the first
/// failing condition, otherwise `METRIZABLE_CFC`.
pub fn metrizability_verdict(
    spray: &Spray,
    factor: &Field,
    samples: &[TangentSample],
    tol: VerdictTolerances,
) -> Result<ConditionDefects> {
    if samples.is_empty() {
        return Err(GeomError::Invalid("no samples to probe".into()));
    }
    let n = spray.dim();
    let mut per_sample = Vec::with_capacity(samples.len());
    for p in samples {
        if !spray.in_domain(p) {
            return Err(GeomError::domain("sample outside the spray's domain"));
        }
        per_sample.push(sample_defects(factor, p, tol.rank_rel_tol)?);
    }
    verdict_from_defects(n, per_sample, samples.to_vec(), tol)
}

pub fn verdict_from_defects(
    n: usize,
    per_sample: Vec<SampleDefects>,
    probed: Vec<TangentSample>,
    tol: VerdictTolerances,
) -> Result<ConditionDefects> {
    let worst_rank = per_sample
        .iter()
        .min_by_key(|d| d.ddj_rho_rank)
        .ok_or_else(|| GeomError::Invalid("no samples to probe".into()))?;
    let dj = per_sample
        .iter()
        .map(|d| d.dj_alpha_defect)
        .fold(0.0, f64::max);
    let dh = per_sample
        .iter()
        .map(|d| d.dh_rho_defect)
        .fold(0.0, f64::max);
    let all_flat = per_sample.iter().all(|d| d.rho.abs() <= tol.zero_tol);
    let verdict = if all_flat {
        Verdict::Inconclusive
    } else if dj > tol.zero_tol {
        Verdict::FailsI
    } else if dh > tol.zero_tol {
        Verdict::FailsIi
    } else if worst_rank.ddj_rho_rank < 2 * n {
        Verdict::FailsIii
    } else {
        Verdict::MetrizableCfc
    };
    Ok(ConditionDefects {
        dj_alpha_defect: dj,
        dh_rho_defect: dh,
        ddj_rho_rank: worst_rank.ddj_rho_rank,
        ddj_rho_singular_values: worst_rank.ddj_rho_singular_values.clone(),
        min_abs_rho_hessian_det: per_sample
            .iter()
            .map(|d| d.rho_hessian_det.abs())
            .fold(f64::INFINITY, f64::min),
        verdict,
        per_sample,
        probed,
    })
}
