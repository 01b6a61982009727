//! Browser bindings for a planar member of the one-form family.
//!
//! Coefficients travel as seven numbers `[c11, c12, c21, c22, c1, c2, c]`.
//! Every exported function has a plain Rust twin returning
//! `Result<String, String>` so the logic can be tested without a browser.

use serde_json::{json, Value};
use spraylab::jets::TangentSample;
use spraylab::metrics::{family_metric, flag_curvature, hamel_defect};
use spraylab::metrizability::{metrizability_verdict, VerdictTolerances};
use spraylab::oneform::{deformation_spray, family_b, OneFormCoefficients};
use spraylab::spray::{collinearity_defect, geodesic_integrate, Trajectory};
use wasm_bindgen::prelude::*;

/// How often a fan ray is shortened before it is given up.
const MAX_HALVINGS: usize = 6;

fn coefficients(c: &[f64]) -> Result<OneFormCoefficients, String> {
    if c.len() != 7 {
        return Err(format!("expected 7 coefficients, got {}", c.len()));
    }
    OneFormCoefficients::new(&c[..4], &c[4..6], c[6]).map_err(|e| e.to_string())
}

fn point(x: &[f64], y: &[f64]) -> Result<TangentSample, String> {
    TangentSample::new(x.to_vec(), y.to_vec()).map_err(|e| e.to_string())
}

/// Integrates a geodesic, halving the time span whenever it runs out of the
/// domain. Returns the trajectory and the span actually used.
fn integrate_within_domain(
    coeffs: &OneFormCoefficients,
    x: &[f64],
    y: &[f64],
    t_end: f64,
    steps: usize,
) -> Option<(Trajectory, f64)> {
    let spray = deformation_spray(coeffs);
    let mut t = t_end;
    for _ in 0..=MAX_HALVINGS {
        if let Ok(traj) = geodesic_integrate(&spray, x, y, t, steps) {
            return Some((traj, t));
        }
        t *= 0.5;
    }
    None
}

/// Geodesics from `(x0, x1)` in `rays` evenly spaced Euclidean unit directions.
pub fn geodesic_fan_json(
    c: &[f64],
    x0: f64,
    x1: f64,
    rays: usize,
    t_end: f64,
) -> Result<String, String> {
    let coeffs = coefficients(c)?;
    if rays == 0 || rays > 360 {
        return Err("rays must be between 1 and 360".into());
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err("t_end must be positive".into());
    }
    let x = [x0, x1];
    let metric = family_metric(&coeffs);
    let mut out = Vec::with_capacity(rays);
    for k in 0..rays {
        let theta = std::f64::consts::TAU * k as f64 / rays as f64;
        let y = [theta.cos(), theta.sin()];
        let usable = point(&x, &y).map(|p| metric.in_domain(&p)).unwrap_or(false);
        let ray = match usable.then(|| integrate_within_domain(&coeffs, &x, &y, t_end, 200)) {
            Some(Some((traj, t))) => json!({
                "theta": theta,
                "t_end": t,
                "collinearity_defect": collinearity_defect(&traj),
                "points": traj.points.iter().map(|q| [q.x[0], q.x[1]]).collect::<Vec<_>>(),
            }),
            _ => json!({ "theta": theta, "points": [] }),
        };
        out.push(ray);
    }
    Ok(json!({ "rays": out }).to_string())
}

/// Points `u / F(x, u)` of the unit sphere of `F` at `x`, one per direction;
/// `null` where `(x, u)` is outside the metric's domain.
pub fn indicatrix_json(c: &[f64], x0: f64, x1: f64, directions: usize) -> Result<String, String> {
    let metric = family_metric(&coefficients(c)?);
    if directions < 3 || directions > 4096 {
        return Err("directions must be between 3 and 4096".into());
    }
    let x = [x0, x1];
    let pts: Vec<Value> = (0..directions)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / directions as f64;
            let u = [theta.cos(), theta.sin()];
            match point(&x, &u).and_then(|p| metric.value(&p).map_err(|e| e.to_string())) {
                Ok(f) if f > 0.0 && f.is_finite() => json!([u[0] / f, u[1] / f]),
                _ => Value::Null,
            }
        })
        .collect();
    Ok(json!({ "x": x, "points": pts }).to_string())
}

/// Flag curvature, Hamel defect and the three metrizability conditions at
/// one tangent vector.
pub fn curvature_probe_json(c: &[f64], x: &[f64], y: &[f64]) -> Result<String, String> {
    let coeffs = coefficients(c)?;
    let p = point(x, y)?;
    let metric = family_metric(&coeffs);
    if !metric.in_domain(&p) {
        return Err("(x, y) is outside the metric's domain".into());
    }
    let err = |e: spraylab::GeomError| e.to_string();
    let f = metric.value(&p).map_err(err)?;
    let k = flag_curvature(&metric, &p).map_err(err)?;
    let hamel = hamel_defect(&metric, &p).map_err(err)?;
    let d = metrizability_verdict(
        &deformation_spray(&coeffs),
        family_b(&coeffs).beta(),
        std::slice::from_ref(&p),
        VerdictTolerances::default(),
    )
    .map_err(err)?;
    Ok(json!({
        "F": f,
        "kappa": k.kappa,
        "curvature_residual": k.residual,
        "hamel_defect": hamel,
        "dj_alpha_defect": d.dj_alpha_defect,
        "dh_rho_defect": d.dh_rho_defect,
        "ddj_rho_rank": d.ddj_rho_rank,
        "verdict": d.verdict.to_string(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn geodesic_fan(
    c: &[f64],
    x0: f64,
    x1: f64,
    rays: usize,
    t_end: f64,
) -> Result<String, JsError> {
    geodesic_fan_json(c, x0, x1, rays, t_end).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn indicatrix(c: &[f64], x0: f64, x1: f64, directions: usize) -> Result<String, JsError> {
    indicatrix_json(c, x0, x1, directions).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn curvature_probe(c: &[f64], x: &[f64], y: &[f64]) -> Result<String, JsError> {
    curvature_probe_json(c, x, y).map_err(|e| JsError::new(&e))
}
