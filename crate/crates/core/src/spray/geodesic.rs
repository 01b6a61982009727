//! Fixed-step RK4 for the geodesic SODE `ẍ^i + 2 G^i(x, ẋ) = 0`.

use serde::Serialize;

use super::Spray;
use crate::error::{GeomError, Result};
use crate::jets::TangentSample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points
            .last()
            .expect("trajectory has at least the initial point")
    }

    /// Polygonal length of the base curve.
    pub fn path_length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(&w[0].x, &w[1].x)).sum()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

fn accel(spray: &Spray, x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let p = TangentSample::new(x.to_vec(), y.to_vec()).ok()?;
    let g = spray.values(&p).ok()?;
    if g.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(g.into_iter().map(|gi| -2.0 * gi).collect())
}

fn axpy(a: &[f64], k: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u + k * v).collect()
}

pub fn geodesic_integrate(
    spray: &Spray,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(GeomError::Invalid("steps must be at least 1".into()));
    }
    if !t_end.is_finite() {
        return Err(GeomError::Invalid("t_end must be finite".into()));
    }
    let start = TangentSample::new(x0.to_vec(), y0.to_vec())?;
    if !spray.in_domain(&start) {
        return Err(GeomError::domain(
            "initial point outside the spray's domain",
        ));
    }
    let dt = t_end / steps as f64;
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let mut points = Vec::with_capacity(steps + 1);
    points.push(TrajectoryPoint {
        t: 0.0,
        x: x.clone(),
        y: y.clone(),
    });
    for step in 0..steps {
        let t = step as f64 * dt;
        let left = || GeomError::LeftDomain {
            t,
            x: x.clone(),
            y: y.clone(),
        };
        let k1x = y.clone();
        let k1y = accel(spray, &x, &y).ok_or_else(left)?;
        let x2 = axpy(&x, 0.5 * dt, &k1x);
        let y2 = axpy(&y, 0.5 * dt, &k1y);
        let k2y = accel(spray, &x2, &y2).ok_or_else(left)?;
        let x3 = axpy(&x, 0.5 * dt, &y2);
        let y3 = axpy(&y, 0.5 * dt, &k2y);
        let k3y = accel(spray, &x3, &y3).ok_or_else(left)?;
        let x4 = axpy(&x, dt, &y3);
        let y4 = axpy(&y, dt, &k3y);
        let k4y = accel(spray, &x4, &y4).ok_or_else(left)?;
        let nx: Vec<f64> = (0..x.len())
            .map(|i| x[i] + dt / 6.0 * (k1x[i] + 2.0 * y2[i] + 2.0 * y3[i] + y4[i]))
            .collect();
        let ny: Vec<f64> = (0..y.len())
            .map(|i| y[i] + dt / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]))
            .collect();
        let next = TangentSample::new(nx.clone(), ny.clone());
        if next.map(|p| !spray.in_domain(&p)).unwrap_or(true) {
            return Err(left());
        }
        x = nx;
        y = ny;
        points.push(TrajectoryPoint {
            t: (step + 1) as f64 * dt,
            x: x.clone(),
            y: y.clone(),
        });
    }
    Ok(Trajectory { points })
}

/// Per-point distance from `x(t)` to the line `{x0 + s y0}`, divided by the
/// trajectory's path length.
pub fn collinearity_profile(traj: &Trajectory) -> Vec<f64> {
    let first = &traj.points[0];
    let (x0, y0) = (&first.x, &first.y);
    let ynorm2: f64 = y0.iter().map(|v| v * v).sum();
    let length = traj.path_length().max(f64::MIN_POSITIVE);
    traj.points
        .iter()
        .map(|pt| {
            let d: Vec<f64> = pt.x.iter().zip(x0).map(|(a, b)| a - b).collect();
            let s = d.iter().zip(y0).map(|(a, b)| a * b).sum::<f64>() / ynorm2;
            let perp: f64 = d
                .iter()
                .zip(y0)
                .map(|(a, b)| (a - s * b).powi(2))
                .sum::<f64>()
                .sqrt();
            perp / length
        })
        .collect()
}

/// Max of [`collinearity_profile`].
pub fn collinearity_defect(traj: &Trajectory) -> f64 {
    collinearity_profile(traj).into_iter().fold(0.0, f64::max)
}
