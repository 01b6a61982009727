//! TOML scenario configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::SampleBox;
use crate::linalg::DEFAULT_RANK_REL_TOL;
use crate::metrics::LambdaParams;
use crate::oneform::OneFormCoefficients;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    VerifyFamily,
    CheckSpray,
    Holonomy,
    EnergyCheck,
    Funk,
    Randers,
    Affine,
    Geodesics,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::VerifyFamily => "verify-family",
            Scenario::CheckSpray => "check-spray",
            Scenario::Holonomy => "holonomy",
            Scenario::EnergyCheck => "energy-check",
            Scenario::Funk => "funk",
            Scenario::Randers => "randers",
            Scenario::Affine => "affine",
            Scenario::Geodesics => "geodesics",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    /// Row-major `n x n`.
    pub c_matrix: Vec<f64>,
    pub c_vector: Vec<f64>,
    pub c_scalar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBoxConfig {
    pub x_intervals: Vec<[f64; 2]>,
    #[serde(default = "default_y_radius")]
    pub y_radius: [f64; 2],
    pub y_signs: Option<Vec<i8>>,
}

fn default_y_radius() -> [f64; 2] {
    [0.5, 1.5]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Threshold for identities that should vanish (defects, residuals).
    pub zero_tol: f64,
    pub rank_rel_tol: f64,
    /// Collinearity threshold for integrated geodesics.
    pub ode_tol: f64,
    /// Threshold on `|κ - κ_expected|` and the flag-curvature fit residual.
    pub curvature_tol: f64,
    /// Threshold for exact algebraic identities (Euler relations, the Funk
    /// functional equation, pointwise metric comparisons).
    pub identity_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_tol: 1e-8,
            rank_rel_tol: DEFAULT_RANK_REL_TOL,
            ode_tol: 1e-6,
            curvature_tol: 1e-7,
            identity_tol: 1e-10,
        }
    }
}

/// Built-in sprays selectable by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SprayConfig {
    /// Flat spray deformed by the family one-form of `[coefficients]`.
    Family,
    Flat,
    /// Flat spray deformed by `β = b_k y^k` with constant `b`.
    ConstantOneForm {
        b: Vec<f64>,
    },
    /// `G^1 = (y^1)²/(2x^2)` on `x^2 > 2`, deformed by `β = y^1 + y^2`.
    Example1,
    /// Flat spray on `x^2 > 0` deformed by `β = y^1 + y^2`.
    Example2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnergyConfig {
    /// `E = e^{4(x^1+x^2)} (y^1+y^2)²`.
    Example2,
    /// `E = ½F²` for the family metric of `[coefficients]`.
    FamilyHalfSquare,
    /// `E = ½|y|²`.
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    pub lambda: f64,
    pub c_vector: Vec<f64>,
    pub c_scalar: f64,
}

impl LambdaConfig {
    pub fn params(&self) -> Result<LambdaParams, ConfigError> {
        LambdaParams::new(self.lambda, self.c_vector.clone(), self.c_scalar)
            .map_err(|e| invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineConfig {
    /// Row-major `n x n`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeodesicsConfig {
    pub t_end: f64,
    pub steps: usize,
    pub csv_path: Option<PathBuf>,
}

impl Default for GeodesicsConfig {
    fn default() -> Self {
        GeodesicsConfig {
            t_end: 1.0,
            steps: 1000,
            csv_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolonomyConfig {
    pub depth: usize,
}

impl Default for HolonomyConfig {
    fn default() -> Self {
        HolonomyConfig {
            depth: crate::metrizability::DEFAULT_HOLONOMY_DEPTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// The run passes exactly when the aggregate verdict equals this string.
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_num_samples")]
    pub num_samples: usize,
    pub output_path: Option<PathBuf>,
    pub coefficients: Option<CoefficientsConfig>,
    pub sample_box: Option<SampleBoxConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub spray: Option<SprayConfig>,
    pub energy: Option<EnergyConfig>,
    pub funk: Option<LambdaConfig>,
    pub randers: Option<LambdaConfig>,
    pub affine: Option<AffineConfig>,
    #[serde(default)]
    pub geodesics: GeodesicsConfig,
    #[serde(default)]
    pub holonomy: HolonomyConfig,
    pub expect: Option<Expect>,
}

fn default_num_samples() -> usize {
    100
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.dimension;
        if n < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {n}")));
        }
        if self.num_samples == 0 {
            return Err(invalid("num_samples must be at least 1"));
        }
        self.sample_box()?;
        let t = &self.tolerances;
        for (name, v) in [
            ("zero_tol", t.zero_tol),
            ("rank_rel_tol", t.rank_rel_tol),
            ("ode_tol", t.ode_tol),
            ("curvature_tol", t.curvature_tol),
            ("identity_tol", t.identity_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        if self.coefficients.is_some() {
            self.coefficients()?;
        }
        if let Some(spray) = &self.spray {
            match spray {
                SprayConfig::Family => {
                    self.coefficients()?;
                }
                SprayConfig::ConstantOneForm { b } if b.len() != n => {
                    return Err(invalid(format!(
                        "spray.b has {} entries, expected {n}",
                        b.len()
                    )));
                }
                SprayConfig::Example1 | SprayConfig::Example2 if n != 2 => {
                    return Err(invalid("the built-in examples live in dimension 2"));
                }
                _ => {}
            }
        }
        for (section, lc) in [("funk", &self.funk), ("randers", &self.randers)] {
            if let Some(lc) = lc {
                if lc.c_vector.len() != n {
                    return Err(invalid(format!(
                        "{section}.c_vector has {} entries, expected {n}",
                        lc.c_vector.len()
                    )));
                }
                lc.params()?;
            }
        }
        if let Some(a) = &self.affine {
            if a.a.len() != n * n || a.b.len() != n {
                return Err(invalid(format!(
                    "affine.a needs {} entries and affine.b {n}",
                    n * n
                )));
            }
        }
        if !(self.geodesics.t_end.is_finite()) || self.geodesics.steps == 0 {
            return Err(invalid(
                "geodesics.t_end must be finite and steps at least 1",
            ));
        }
        self.check_required_sections()
    }

    fn check_required_sections(&self) -> Result<(), ConfigError> {
        let need = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                Err(invalid(format!(
                    "scenario {} needs {what}",
                    self.scenario.as_str()
                )))
            }
        };
        match self.scenario {
            Scenario::VerifyFamily => need(self.coefficients.is_some(), "[coefficients]"),
            Scenario::CheckSpray => {
                need(self.spray.is_some(), "[spray]")?;
                if matches!(self.spray, Some(SprayConfig::Example1)) {
                    return Err(invalid(
                        "check-spray needs a deformation of the flat spray; example1 has a curved base",
                    ));
                }
                Ok(())
            }
            Scenario::Holonomy | Scenario::Geodesics => need(self.spray.is_some(), "[spray]"),
            Scenario::EnergyCheck => {
                need(self.spray.is_some(), "[spray]")?;
                need(self.energy.is_some(), "[energy]")?;
                if matches!(self.energy, Some(EnergyConfig::FamilyHalfSquare)) {
                    need(self.coefficients.is_some(), "[coefficients]")?;
                }
                if matches!(self.energy, Some(EnergyConfig::Example2)) && self.dimension != 2 {
                    return Err(invalid("the example energy lives in dimension 2"));
                }
                Ok(())
            }
            Scenario::Funk => need(self.funk.is_some(), "[funk]"),
            Scenario::Randers => need(self.randers.is_some(), "[randers]"),
            Scenario::Affine => need(
                self.affine.is_some() || self.coefficients.is_some(),
                "[affine] or [coefficients]",
            ),
        }
    }

    pub fn coefficients(&self) -> Result<OneFormCoefficients, ConfigError> {
        let c = self
            .coefficients
            .as_ref()
            .ok_or_else(|| invalid("missing [coefficients]"))?;
        let n = self.dimension;
        if c.c_vector.len() != n || c.c_matrix.len() != n * n {
            return Err(invalid(format!(
                "coefficients need {} c_matrix and {n} c_vector entries",
                n * n
            )));
        }
        OneFormCoefficients::new(&c.c_matrix, &c.c_vector, c.c_scalar)
            .map_err(|e| invalid(e.to_string()))
    }

    /// The configured box, or `[-0.5, 0.5]^n` with radii in `[0.5, 1.5]`.
    pub fn sample_box(&self) -> Result<SampleBox, ConfigError> {
        let n = self.dimension;
        let b = match &self.sample_box {
            None => SampleBox::cube(n, 0.5),
            Some(cfg) => {
                if cfg.x_intervals.len() != n {
                    return Err(invalid(format!(
                        "sample_box.x_intervals has {} intervals, expected {n}",
                        cfg.x_intervals.len()
                    )));
                }
                SampleBox {
                    x_intervals: cfg.x_intervals.iter().map(|&[lo, hi]| (lo, hi)).collect(),
                    y_radius: (cfg.y_radius[0], cfg.y_radius[1]),
                    y_signs: cfg.y_signs.clone(),
                }
            }
        };
        b.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(b)
    }
}
