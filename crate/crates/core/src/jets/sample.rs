use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// A point `(x, y)` of the slit tangent bundle over an open set of `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(GeomError::Dimension {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(GeomError::InvalidSample(format!(
                "dimension must be at least 2, got {}",
                x.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidSample("non-finite coordinate".into()));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(GeomError::InvalidSample("y must be nonzero".into()));
        }
        Ok(TangentSample { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// All `2n` coordinates, `x` first.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    /// Rebuilds a sample from `2n` coordinates. Skips the nonzero-`y` check
    /// so that finite-difference stencils can probe freely.
    pub(crate) fn from_coords_unchecked(coords: &[f64]) -> Self {
        let n = coords.len() / 2;
        TangentSample {
            x: coords[..n].to_vec(),
            y: coords[n..].to_vec(),
        }
    }

    pub fn with_y_scaled(&self, lambda: f64) -> Self {
        TangentSample {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * lambda).collect(),
        }
    }
}

/// Box for base points and a radius band for fiber directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub x_intervals: Vec<(f64, f64)>,
    pub y_radius: (f64, f64),
    /// Optional sign pattern for `y`: `1` or `-1` pins the sign of that
    /// component, `0` leaves it free. Useful for metrics defined on a cone.
    #[serde(default)]
    pub y_signs: Option<Vec<i8>>,
}

impl SampleBox {
    pub fn cube(n: usize, half_width: f64) -> Self {
        SampleBox {
            x_intervals: vec![(-half_width, half_width); n],
            y_radius: (0.5, 1.5),
            y_signs: None,
        }
    }

    pub fn new(x_intervals: Vec<(f64, f64)>, y_radius: (f64, f64)) -> Result<Self> {
        let b = SampleBox {
            x_intervals,
            y_radius,
            y_signs: None,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.x_intervals.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_intervals.len() < 2 {
            return Err(GeomError::Invalid(
                "sample box needs at least 2 intervals".into(),
            ));
        }
        for (i, &(lo, hi)) in self.x_intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GeomError::Invalid(format!(
                    "x interval {i} is empty or degenerate: [{lo}, {hi}]"
                )));
            }
        }
        if let Some(signs) = &self.y_signs {
            if signs.len() != self.dim() || signs.iter().any(|s| !(-1..=1).contains(s)) {
                return Err(GeomError::Invalid(format!(
                    "y_signs needs {} entries from {{-1, 0, 1}}",
                    self.dim()
                )));
            }
        }
        let (rlo, rhi) = self.y_radius;
        if !(rlo.is_finite() && rhi.is_finite() && rlo > 0.0 && rlo <= rhi) {
            return Err(GeomError::Invalid(format!(
                "y radius band must satisfy 0 < lo <= hi, got [{rlo}, {rhi}]"
            )));
        }
        Ok(())
    }
}

/// Outcome of drawing samples subject to a domain predicate.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub samples: Vec<TangentSample>,
    pub rejected: usize,
}

impl SampleSet {
    pub fn drawn(&self) -> usize {
        self.samples.len() + self.rejected
    }

    pub fn rejection_fraction(&self) -> f64 {
        if self.drawn() == 0 {
            0.0
        } else {
            self.rejected as f64 / self.drawn() as f64
        }
    }
}

/// Seeded sampler: uniform `x` in the box, `y` uniform on the unit sphere
/// scaled by a radius drawn uniformly from the band.
#[derive(Debug, Clone)]
pub struct Sampler {
    bounds: SampleBox,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(bounds: SampleBox, seed: u64) -> Self {
        Sampler {
            bounds,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn draw(&mut self) -> TangentSample {
        let n = self.bounds.dim();
        let x: Vec<f64> = self
            .bounds
            .x_intervals
            .iter()
            .map(|&(lo, hi)| self.rng.random_range(lo..hi))
            .collect();
        let direction = loop {
            let mut v: Vec<f64> = (0..n).map(|_| self.rng.random_range(-1.0..1.0)).collect();
            if let Some(signs) = &self.bounds.y_signs {
                for (a, &s) in v.iter_mut().zip(signs) {
                    if s != 0 {
                        *a = a.abs() * f64::from(s);
                    }
                }
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-3 && norm <= 1.0 {
                break v.into_iter().map(|a| a / norm).collect::<Vec<_>>();
            }
        };
        let (rlo, rhi) = self.bounds.y_radius;
        let r = if rlo == rhi {
            rlo
        } else {
            self.rng.random_range(rlo..rhi)
        };
        let y = direction.into_iter().map(|a| a * r).collect();
        TangentSample { x, y }
    }

    /// Draws until `count` samples satisfy `accept` or `2 * count` candidates
    /// have been drawn.
    pub fn draw_valid(
        &mut self,
        count: usize,
        mut accept: impl FnMut(&TangentSample) -> bool,
    ) -> SampleSet {
        let mut samples = Vec::with_capacity(count);
        let mut rejected = 0;
        while samples.len() < count && samples.len() + rejected < 2 * count.max(1) {
            let p = self.draw();
            if accept(&p) {
                samples.push(p);
            } else {
                rejected += 1;
            }
        }
        SampleSet { samples, rejected }
    }
}
