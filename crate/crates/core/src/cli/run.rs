//! Scenario execution.

use std::fmt::Write as _;

use serde_json::json;

use super::config::{ConfigError, EnergyConfig, Scenario, ScenarioConfig, SprayConfig};
use super::report::{summary, AggregateRecord, Check, Collector, Info, ENGINE_VERSION};
use crate::error::GeomError;
use crate::jets::{euler_defect, Field, SampleSet, Sampler, TangentSample};
use crate::metrics::{
    affine_pullback_klein, affine_realizability, closed_form, euclidean_metric, family_metric,
    flag_curvature, funk_metric, funk_residual, hamel_defect, klein_pullback_metric,
    projective_factor_field, randers_example, AffineMap, FinslerMetricDef, Realizability,
};
use crate::metrizability::{
    energy_check, holonomy_span, sample_defects, verdict_from_defects, SampleDefects,
    VerdictTolerances,
};
use crate::oneform::{deformation_spray, family_b, OneForm};
use crate::spray::{
    collinearity_profile, flat_spray, geodesic_integrate, homogeneity_defect, jacobi, jacobi_alt,
    projective_deform, samples, Spray,
};

/// Relative Liouville residual that counts as membership in the holonomy span.
const LIOUVILLE_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    ConfigError = 2,
    ExcessiveRejection = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Sample records followed by the aggregate record, one JSON object per line.
    pub ndjson: String,
    pub summary: String,
    /// Geodesic trace for the `geodesics` scenario.
    pub csv: Option<String>,
    pub aggregate: AggregateRecord,
    pub status: ExitStatus,
}

/// Scenario-specific part of the aggregate.
struct Outcome {
    verdict: String,
    default_pass: bool,
    info: Info,
}

fn setup_error(e: GeomError) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

/// Runs a validated configuration. Sampling and evaluation are sequential, so
/// the output depends only on the configuration (including its seed).
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput, ConfigError> {
    cfg.validate()?;
    let mut col = Collector::new(cfg.scenario.as_str(), cfg.seed);
    let mut csv = None;
    let (set, outcome) = match cfg.scenario {
        Scenario::VerifyFamily => verify_family(cfg, &mut col)?,
        Scenario::CheckSpray => check_spray(cfg, &mut col)?,
        Scenario::Holonomy => holonomy(cfg, &mut col)?,
        Scenario::EnergyCheck => energy(cfg, &mut col)?,
        Scenario::Funk => funk(cfg, &mut col)?,
        Scenario::Randers => randers(cfg, &mut col)?,
        Scenario::Affine => affine(cfg, &mut col)?,
        Scenario::Geodesics => {
            let (set, outcome, trace) = geodesics(cfg, &mut col)?;
            csv = Some(trace);
            (set, outcome)
        }
    };
    let drawn = set.drawn();
    let rejected = set.rejected + col.errored;
    let status_fail = |pass: bool| {
        if pass {
            ExitStatus::Pass
        } else {
            ExitStatus::Fail
        }
    };
    let (verdict, pass, status) = if col.accepted == 0 {
        (
            "NO_SAMPLES".to_string(),
            false,
            ExitStatus::ExcessiveRejection,
        )
    } else {
        let pass = match &cfg.expect {
            Some(e) => e.verdict == outcome.verdict,
            None => outcome.default_pass,
        };
        let status = if rejected as f64 > 0.5 * drawn as f64 {
            ExitStatus::ExcessiveRejection
        } else {
            status_fail(pass)
        };
        (outcome.verdict, pass, status)
    };
    let aggregate = AggregateRecord {
        record: "aggregate",
        scenario: cfg.scenario.as_str(),
        verdict,
        expected_verdict: cfg.expect.as_ref().map(|e| e.verdict.clone()),
        pass,
        exit_status: status.code(),
        accepted: col.accepted,
        rejected,
        drawn,
        checks: col.summaries().to_vec(),
        info: outcome.info,
        engine_version: ENGINE_VERSION,
        seed: cfg.seed,
    };
    log::info!(
        "{}: {} evaluated, {} rejected, verdict {}",
        aggregate.scenario,
        aggregate.accepted,
        aggregate.rejected,
        aggregate.verdict
    );
    let summary = summary(&aggregate, cfg.dimension);
    Ok(RunOutput {
        ndjson: col.finish(&aggregate),
        summary,
        csv,
        aggregate,
        status,
    })
}

fn draw(
    cfg: &ScenarioConfig,
    accept: impl FnMut(&TangentSample) -> bool,
) -> Result<SampleSet, ConfigError> {
    let mut sampler = Sampler::new(cfg.sample_box()?, cfg.seed);
    Ok(sampler.draw_valid(cfg.num_samples, accept))
}

fn ok_value(f: &FinslerMetricDef, p: &TangentSample) -> bool {
    f.in_domain(p)
}

/// A spray together with the projective factor that deforms the flat spray
/// into it, when there is one.
fn build_spray(cfg: &ScenarioConfig) -> Result<(Spray, Option<Field>), ConfigError> {
    let n = cfg.dimension;
    let kind = cfg
        .spray
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("missing [spray]".into()))?;
    Ok(match kind {
        SprayConfig::Family => {
            let coeffs = cfg.coefficients()?;
            (
                deformation_spray(&coeffs),
                Some(family_b(&coeffs).beta().clone()),
            )
        }
        SprayConfig::Flat => (flat_spray(n).map_err(setup_error)?, Some(Field::zero(n))),
        SprayConfig::ConstantOneForm { b } => {
            let beta = OneForm::constant(b).map_err(setup_error)?.beta().clone();
            let flat = flat_spray(n).map_err(setup_error)?;
            (
                projective_deform(&flat, &beta).map_err(setup_error)?,
                Some(beta),
            )
        }
        SprayConfig::Example1 => (samples::example1(), None),
        SprayConfig::Example2 => (samples::example2(), Some(samples::sum_one_form())),
    })
}

fn verdict_tol(cfg: &ScenarioConfig) -> VerdictTolerances {
    VerdictTolerances {
        zero_tol: cfg.tolerances.zero_tol,
        rank_rel_tol: cfg.tolerances.rank_rel_tol,
    }
}

fn condition_checks(d: &SampleDefects, n: usize, zero_tol: f64) -> Vec<Check> {
    vec![
        Check::at_most("dj_alpha_defect", d.dj_alpha_defect, zero_tol),
        Check::at_most("dh_rho_defect", d.dh_rho_defect, zero_tol),
        Check::equals("ddj_rho_rank", d.ddj_rho_rank, 2 * n),
    ]
}

/// `max |R - R_alt|`, relative to the size of `R` when that exceeds 1.
fn jacobi_agreement(spray: &Spray, p: &TangentSample) -> Result<f64, GeomError> {
    let (a, b) = (jacobi(spray, p)?, jacobi_alt(spray, p)?);
    let scale = a.r.amax().max(1.0);
    Ok((&a.r - &b.r).amax() / scale)
}

fn curvature_checks(
    metric: &FinslerMetricDef,
    p: &TangentSample,
    expected: f64,
    tol: f64,
    info: &mut Info,
) -> Result<Vec<Check>, GeomError> {
    let k = flag_curvature(metric, p)?;
    info.insert("kappa".into(), json!(k.kappa));
    Ok(vec![
        Check::at_most("kappa_error", (k.kappa - expected).abs(), tol),
        Check::at_most("curvature_fit_residual", k.residual, tol),
    ])
}

fn verdict_outcome(
    n: usize,
    per_sample: Vec<SampleDefects>,
    probed: Vec<TangentSample>,
    cfg: &ScenarioConfig,
    col: &Collector,
) -> Outcome {
    if per_sample.is_empty() {
        return Outcome {
            verdict: "NO_SAMPLES".into(),
            default_pass: false,
            info: Info::new(),
        };
    }
    let defects =
        verdict_from_defects(n, per_sample, probed, verdict_tol(cfg)).expect("at least one sample");
    let mut info = Info::new();
    info.insert(
        "min_abs_rho_hessian_det".into(),
        json!(defects.min_abs_rho_hessian_det),
    );
    info.insert(
        "ddj_rho_singular_values".into(),
        json!(defects.ddj_rho_singular_values),
    );
    Outcome {
        verdict: defects.verdict.as_str().to_string(),
        default_pass: defects.verdict.as_str() == "METRIZABLE_CFC" && col.all_checks_pass(),
        info,
    }
}

fn verify_family(
    cfg: &ScenarioConfig,
    col: &mut Collector,
) -> Result<(SampleSet, Outcome), ConfigError> {
    let n = cfg.dimension;
    let tol = cfg.tolerances;
    let coeffs = cfg.coefficients()?;
    let metric = family_metric(&coeffs);
    let spray = deformation_spray(&coeffs);
    let factor = family_b(&coeffs).beta().clone();
    let set = draw(cfg, |p| ok_value(&metric, p) && spray.in_domain(p))?;
    let mut per_sample = Vec::new();
    let mut probed = Vec::new();
    for (index, p) in set.samples.iter().enumerate() {
        let mut info = Info::new();
        let mut eval = || -> Result<(Vec<Check>, SampleDefects), GeomError> {
            let f = metric.value(p)?;
            let d = sample_defects(&factor, p, tol.rank_rel_tol)?;
            let mut checks = vec![Check::at_most(
                "hamel_defect",
                hamel_defect(&metric, p)?,
                tol.zero_tol,
            )];
            checks.extend(curvature_checks(
                &metric,
                p,
                1.0,
                tol.curvature_tol,
                &mut info,
            )?);
            checks.extend(condition_checks(&d, n, tol.zero_tol));
            let target = (n as f64 - 1.0) * f * f;
            let ric = jacobi(&spray, p)?.ric;
            checks.push(Check::at_most(
                "ricci_trace_defect",
                (ric - target).abs() / target.max(1.0),
                tol.zero_tol,
            ));
            checks.push(Check::at_most(
                "jacobi_alt_defect",
                jacobi_agreement(&spray, p)?,
                tol.zero_tol,
            ));
            checks.push(Check::at_most(
                "spray_homogeneity_defect",
                homogeneity_defect(&spray, p)?,
                tol.identity_tol,
            ));
            checks.push(Check::at_most(
                "metric_euler_defect",
                euler_defect(metric.field(), p, 1.0)?.abs(),
                tol.identity_tol,
            ));
            Ok((checks, d))
        };
        match eval() {
            Ok((checks, d)) => {
                info.insert("rho_hessian_det".into(), json!(d.rho_hessian_det));
                per_sample.push(d);
                probed.push(p.clone());
                col.sample(index, p, checks, info);
            }
            Err(e) => col.error(index, p, e),
        }
    }
    let outcome = verdict_outcome(n, per_sample, probed, cfg, col);
    Ok((set, outcome))
}

fn check_spray(
    cfg: &ScenarioConfig,
    col: &mut Collector,
) -> Result<(SampleSet, Outcome), ConfigError> {
    let n = cfg.dimension;
    let tol = cfg.tolerances;
    let (spray, factor) = build_spray(cfg)?;
    let factor = factor.ok_or_else(|| {
        ConfigError::Invalid("check-spray needs a projective deformation of the flat spray".into())
    })?;
    let set = draw(cfg, |p| spray.in_domain(p) && factor.value(p).is_ok())?;
    let mut per_sample = Vec::new();
    let mut probed = Vec::new();
    for (index, p) in set.samples.iter().enumerate() {
        let eval = || -> Result<(Vec<Check>, SampleDefects), GeomError> {
            let d = sample_defects(&factor, p, tol.rank_rel_tol)?;
            let mut checks = condition_checks(&d, n, tol.zero_tol);
            checks.push(Check::at_most(
                "spray_homogeneity_defect",
                homogeneity_defect(&spray, p)?,
                tol.identity_tol,
            ));
            checks.push(Check::at_most(
                "jacobi_alt_defect",
                jacobi_agreement(&spray, p)?,
                tol.zero_tol,
            ));
            Ok((checks, d))
        };
        match eval() {
            Ok((checks, d)) => {
                let mut info = Info::new();
                info.insert("rho".into(), json!(d.rho));
                info.insert("rho_hessian_det".into(), json!(d.rho_hessian_det));
                per_sample.push(d);
                probed.push(p.clone());
                col.sample(index, p, checks, info);
            }
            Err(e) => col.error(index, p, e),
        }
    }
    let outcome = verdict_outcome(n, per_sample, probed, cfg, col);
    Ok((set, outcome))
}

fn holonomy(
    cfg: &ScenarioConfig,
    col: &mut Collector,
) -> Result<(SampleSet, Outcome), ConfigError> {
    let n = cfg.dimension;
    let (spray, _) = build_spray(cfg)?;
    let set = draw(cfg, |p| spray.in_domain(p))?;
    let (mut inside, mut outside) = (0usize, 0usize);
    for (index, p) in set.samples.iter().enumerate() {
        match holonomy_span(&spray, p, cfg.holonomy.depth, cfg.tolerances.rank_rel_tol) {
            Ok(r) => {
                let ynorm = p.y().iter().map(|v| v * v).sum::<f64>().sqrt();
                let checks = vec![
                    Check::equals("span_rank", r.span_rank, 2 * n),
                    Check::at_most(
                        "liouville_residual",
                        r.liouville_residual,
                        LIOUVILLE_REL_TOL * ynorm,
                    ),
                ];
                if r.liouville_in_span {
                    inside += 1;
                } else {
                    outside += 1;
                }
                let mut info = Info::new();
                info.insert("rank_by_depth".into(), json!(r.rank_by_depth));
                info.insert("depth_reached".into(), json!(r.depth));
                col.sample(index, p, checks, info);
            }
            Err(e) => col.error(index, p, e),
        }
    }
    let verdict = match (inside, outside) {
        (_, 0) => "LIOUVILLE_IN_SPAN",
        (0, _) => "LIOUVILLE_NOT_IN_SPAN",
        _ => "LIOUVILLE_MIXED",
    };
    let mut info = Info::new();
    info.insert("liouville_in_span_samples".into(), json!(inside));
    info.insert("liouville_outside_span_samples".into(), json!(outside));
    Ok((
        set,
        Outcome {
            verdict: verdict.into(),
            default_pass: verdict != "LIOUVILLE_MIXED",
            info,
        },
    ))
}

fn energy(cfg: &ScenarioConfig, col: &mut Collector) -> Result<(SampleSet, Outcome), ConfigError> {
    let n = cfg.dimension;
    let tol = cfg.tolerances;
    let (spray, _) = build_spray(cfg)?;
    let energy = match cfg.energy.as_ref().expect("validated") {
        EnergyConfig::Example2 => samples::example2_energy(),
        EnergyConfig::FamilyHalfSquare => family_metric(&cfg.coefficients()?).energy(),
        EnergyConfig::Euclidean => euclidean_metric(n).energy(),
    };
    let set = draw(cfg, |p| spray.in_domain(p) && energy.value(p).is_ok())?;
    let (mut solves, mut regular) = (true, true);
    for (index, p) in set.samples.iter().enumerate() {
        match energy_check(&energy, &spray, p) {
            Ok(e) => {
                let horizontal = e
                    .horizontal_residuals
                    .iter()
                    .fold(0.0f64, |m, r| m.max(r.abs()));
                let checks = vec![
                    Check::at_most(
                        "homogeneity_residual",
                        e.homogeneity_residual.abs(),
                        tol.zero_tol,
                    ),
                    Check::at_most("horizontal_residual", horizontal, tol.zero_tol),
                    Check::equals("hessian_rank", e.hessian_rank, n),
                ];
                solves &= checks[0].pass && checks[1].pass;
                regular &= checks[2].pass;
                let mut info = Info::new();
                info.insert("hessian_det".into(), json!(e.hessian_det));
                col.sample(index, p, checks, info);
            }
            Err(e) => col.error(index, p, e),
        }
    }
    let verdict = match (solves, regular) {
        (true, true) => "METRIZES",
        (true, false) => "SINGULAR_HESSIAN",
        (false, _) => "NOT_A_SOLUTION",
    };
    Ok((
        set,
        Outcome {
            verdict: verdict.into(),
            default_pass: verdict == "METRIZES",
            info: Info::new(),
        },
    ))
}

fn checks_outcome(col: &Collector, info: Info) -> Outcome {
    let pass = col.all_checks_pass();
    Outcome {
        verdict: if pass {
            "ALL_CHECKS_PASS"
        } else {
            "CHECKS_FAILED"
        }
        .into(),
        default_pass: pass,
        info,
    }
}

fn funk(cfg: &ScenarioConfig, col: &mut Collector) -> Result<(SampleSet, Outcome), ConfigError> {
    let tol = cfg.tolerances;
    let params = cfg.funk.as_ref().expect("validated").params()?;
    let metric = funk_metric(&params).map_err(setup_error)?;
    let factor = projective_factor_field(&metric);
    let set = draw(cfg, |p| ok_value(&metric, p))?;
    for (index, p) in set.samples.iter().enumerate() {
        let mut info = Info::new();
        let mut eval = || -> Result<Vec<Check>, GeomError> {
            let theta = metric.value(p)?;
            let mut checks = vec![
                Check::at_most(
                    "functional_residual",
                    funk_residual(&params, &metric, p)? / theta.max(1.0),
                    tol.identity_tol,
                ),
                Check::at_most("hamel_defect", hamel_defect(&metric, p)?, tol.zero_tol),
                Check::at_most(
                    "projective_factor_defect",
                    (factor.value(p)? - 0.5 * theta).abs() / theta.max(1.0),
                    tol.zero_tol,
                ),
            ];
            checks.extend(curvature_checks(
                &metric,
                p,
                -0.25,
                tol.curvature_tol,
                &mut info,
            )?);
            checks.push(Check::at_most(
                "metric_euler_defect",
                euler_defect(metric.field(), p, 1.0)?.abs() / theta.max(1.0),
                tol.identity_tol,
            ));
            info.insert("theta".into(), json!(theta));
            if let Ok(reference) = closed_form::funk_reference(&params, p) {
                info.insert("reference_closed_form".into(), json!(reference));
            }
            Ok(checks)
        };
        match eval() {
            Ok(checks) => col.sample(index, p, checks, info),
            Err(e) => col.error(index, p, e),
        }
    }
    Ok((set, checks_outcome(col, Info::new())))
}

fn randers(cfg: &ScenarioConfig, col: &mut Collector) -> Result<(SampleSet, Outcome), ConfigError> {
    let tol = cfg.tolerances;
    let params = cfg.randers.as_ref().expect("validated").params()?;
    let coeffs = params.coefficients();
    let metric = randers_example(&params);
    let family = family_metric(&coeffs);
    let beta = family_b(&coeffs).beta().clone();
    let factor = projective_factor_field(&metric);
    let set = draw(cfg, |p| {
        ok_value(&metric, p) && ok_value(&family, p) && coeffs.h(p.x()) > 0.0
    })?;
    let mut worst_reference = 0.0f64;
    for (index, p) in set.samples.iter().enumerate() {
        let mut info = Info::new();
        let mut eval = || -> Result<Vec<Check>, GeomError> {
            let fbar = metric.value(p)?;
            let f = family.value(p)?;
            let b = beta.value(p)?;
            let scale = fbar.max(1.0);
            let p_true = factor.value(p)?;
            let p_derived = (f * f + 2.0 * b * f - b * b) / (2.0 * (f - b));
            let checks = vec![
                Check::at_most("hamel_defect", hamel_defect(&metric, p)?, tol.zero_tol),
                Check::at_most(
                    "metric_euler_defect",
                    euler_defect(metric.field(), p, 1.0)?.abs() / scale,
                    tol.identity_tol,
                ),
                Check::at_most(
                    "randers_split_defect",
                    (fbar - (f - b)).abs() / scale,
                    tol.identity_tol,
                ),
                Check::at_most(
                    "projective_factor_defect",
                    (p_true - p_derived).abs() / scale,
                    tol.zero_tol,
                ),
            ];
            info.insert("projective_factor".into(), json!(p_true));
            if let Ok(reference) = closed_form::randers_reference_factor(&params, p) {
                let gap = (reference - p_true).abs();
                worst_reference = worst_reference.max(gap);
                info.insert("reference_projective_factor".into(), json!(reference));
                info.insert("reference_projective_factor_gap".into(), json!(gap));
            }
            Ok(checks)
        };
        match eval() {
            Ok(checks) => col.sample(index, p, checks, info),
            Err(e) => col.error(index, p, e),
        }
    }
    let mut info = Info::new();
    info.insert(
        "max_reference_projective_factor_gap".into(),
        json!(worst_reference),
    );
    Ok((set, checks_outcome(col, info)))
}

fn affine(cfg: &ScenarioConfig, col: &mut Collector) -> Result<(SampleSet, Outcome), ConfigError> {
    let n = cfg.dimension;
    let tol = cfg.tolerances;
    let map = match &cfg.affine {
        Some(a) => Some(
            AffineMap::new(
                nalgebra::DMatrix::from_row_slice(n, n, &a.a),
                nalgebra::DVector::from_column_slice(&a.b),
            )
            .map_err(setup_error)?,
        ),
        None => None,
    };
    let coeffs = match &map {
        Some(m) => affine_pullback_klein(m),
        None => cfg.coefficients()?,
    };
    let pullback = map.as_ref().map(klein_pullback_metric);
    let metric = family_metric(&coeffs);
    let spray = deformation_spray(&coeffs);
    let factor = family_b(&coeffs).beta().clone();

    let mut info = Info::new();
    info.insert("c_matrix".into(), json!(coeffs.c_row_major()));
    info.insert("c_vector".into(), json!(coeffs.c_vector().as_slice()));
    info.insert("c_scalar".into(), json!(coeffs.c_scalar()));
    let realizable = affine_realizability(&coeffs);
    match &realizable {
        Realizability::Realizable { map: found, scale } => {
            let back = affine_pullback_klein(found);
            let defect = (back.c_matrix() - coeffs.c_matrix() * *scale)
                .amax()
                .max((back.c_vector() - coeffs.c_vector() * *scale).amax())
                .max((back.c_scalar() - coeffs.c_scalar() * scale).abs());
            col.global(Check::at_most(
                "round_trip_defect",
                defect,
                tol.identity_tol,
            ));
            info.insert("scale".into(), json!(scale));
            info.insert("a".into(), json!(found.a().transpose().as_slice()));
            info.insert("b".into(), json!(found.b().as_slice()));
        }
        Realizability::NotRealizable { witness } => {
            info.insert("witness".into(), json!(witness));
        }
    }

    let set = draw(cfg, |p| {
        ok_value(&metric, p)
            && spray.in_domain(p)
            && pullback.as_ref().is_none_or(|m| ok_value(m, p))
    })?;
    for (index, p) in set.samples.iter().enumerate() {
        let mut sinfo = Info::new();
        let mut eval = || -> Result<Vec<Check>, GeomError> {
            let f = metric.value(p)?;
            let mut checks = Vec::new();
            if let Some(m) = &pullback {
                checks.push(Check::at_most(
                    "pullback_defect",
                    (f - m.value(p)?).abs() / f.max(1.0),
                    tol.identity_tol,
                ));
            }
            checks.push(Check::at_most(
                "hamel_defect",
                hamel_defect(&metric, p)?,
                tol.zero_tol,
            ));
            checks.extend(curvature_checks(
                &metric,
                p,
                1.0,
                tol.curvature_tol,
                &mut sinfo,
            )?);
            let d = sample_defects(&factor, p, tol.rank_rel_tol)?;
            checks.extend(condition_checks(&d, n, tol.zero_tol));
            Ok(checks)
        };
        match eval() {
            Ok(checks) => col.sample(index, p, checks, sinfo),
            Err(e) => col.error(index, p, e),
        }
    }
    Ok((
        set,
        Outcome {
            verdict: if realizable.is_realizable() {
                "REALIZABLE"
            } else {
                "NOT_REALIZABLE"
            }
            .into(),
            default_pass: col.all_checks_pass(),
            info,
        },
    ))
}

fn geodesics(
    cfg: &ScenarioConfig,
    col: &mut Collector,
) -> Result<(SampleSet, Outcome, String), ConfigError> {
    let n = cfg.dimension;
    let g = &cfg.geodesics;
    let (spray, _) = build_spray(cfg)?;
    let set = draw(cfg, |p| spray.in_domain(p))?;
    let mut csv = String::from("trajectory_id,t");
    for prefix in ["x", "y"] {
        for i in 1..=n {
            let _ = write!(csv, ",{prefix}{i}");
        }
    }
    csv.push_str(",collinearity_defect\n");
    let mut worst = 0.0f64;
    for (index, p) in set.samples.iter().enumerate() {
        match geodesic_integrate(&spray, p.x(), p.y(), g.t_end, g.steps) {
            Ok(traj) => {
                let profile = collinearity_profile(&traj);
                let defect = profile.iter().copied().fold(0.0, f64::max);
                worst = worst.max(defect);
                for (pt, d) in traj.points.iter().zip(&profile) {
                    let _ = write!(csv, "{index},{:.16e}", pt.t);
                    for v in pt.x.iter().chain(&pt.y) {
                        let _ = write!(csv, ",{v:.16e}");
                    }
                    let _ = writeln!(csv, ",{d:.16e}");
                }
                let mut info = Info::new();
                info.insert("path_length".into(), json!(traj.path_length()));
                info.insert("end_x".into(), json!(traj.last().x));
                col.sample(
                    index,
                    p,
                    vec![Check::at_most(
                        "collinearity_defect",
                        defect,
                        cfg.tolerances.ode_tol,
                    )],
                    info,
                );
            }
            Err(e) => col.error(index, p, e),
        }
    }
    let straight = col.all_checks_pass();
    let mut info = Info::new();
    info.insert("max_collinearity_defect".into(), json!(worst));
    Ok((
        set,
        Outcome {
            verdict: if straight { "STRAIGHT" } else { "NOT_STRAIGHT" }.into(),
            default_pass: straight,
            info,
        },
        csv,
    ))
}
