//! TOML run configuration. Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cauchy::OperatorForm;
use crate::error::{Error, Result};
use crate::grid::OperationalGrid;
use crate::kernels::{SoninePair, DEFAULT_BESSEL_GROWTH};
use crate::timescales::{AgingScale, AmnesiaWeight, ScaleFamily, WeightFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    SonineCheck,
    SemigroupCheck,
    GeneratorCheck,
    OperatorsCheck,
    Equivalence,
    Neutralization,
    Inversion,
    Evolve,
    Envelope,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 9] = [
        Self::SonineCheck,
        Self::SemigroupCheck,
        Self::GeneratorCheck,
        Self::OperatorsCheck,
        Self::Equivalence,
        Self::Neutralization,
        Self::Inversion,
        Self::Evolve,
        Self::Envelope,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SonineCheck => "sonine-check",
            Self::SemigroupCheck => "semigroup-check",
            Self::GeneratorCheck => "generator-check",
            Self::OperatorsCheck => "operators-check",
            Self::Equivalence => "equivalence",
            Self::Neutralization => "neutralization",
            Self::Inversion => "inversion",
            Self::Evolve => "evolve",
            Self::Envelope => "envelope",
        }
    }
}

impl std::fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    PowerLaw {
        alpha: f64,
    },
    TemperedPowerLaw {
        alpha: f64,
        lambda: f64,
    },
    Bessel {
        alpha: f64,
        #[serde(default = "default_growth")]
        growth: f64,
    },
}

fn default_growth() -> f64 {
    DEFAULT_BESSEL_GROWTH
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::TemperedPowerLaw { alpha: 0.5, lambda: 1.0 }
    }
}

impl KernelSpec {
    pub fn alpha(&self) -> f64 {
        match *self {
            Self::PowerLaw { alpha } | Self::TemperedPowerLaw { alpha, .. } | Self::Bessel { alpha, .. } => alpha,
        }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        match self {
            Self::PowerLaw { .. } => Self::PowerLaw { alpha },
            Self::TemperedPowerLaw { lambda, .. } => Self::TemperedPowerLaw { alpha, lambda },
            Self::Bessel { growth, .. } => Self::Bessel { alpha, growth },
        }
    }

    pub fn build(&self) -> Result<SoninePair> {
        match *self {
            Self::PowerLaw { alpha } => SoninePair::power_law(alpha),
            Self::TemperedPowerLaw { alpha, lambda } => SoninePair::tempered_power_law(alpha, lambda),
            Self::Bessel { alpha, growth } => SoninePair::bessel_with_growth(alpha, growth),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::PowerLaw { alpha } => format!("power_law(alpha={alpha})"),
            Self::TemperedPowerLaw { alpha, lambda } => format!("tempered_power_law(alpha={alpha}, lambda={lambda})"),
            Self::Bessel { alpha, growth } => format!("bessel(alpha={alpha}, growth={growth})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -20.0, x_max: 20.0, n: 1024 }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<OperationalGrid> {
        OperationalGrid::new(self.x_min, self.x_max, self.n)
    }
}

/// Experiment-specific knobs; each experiment reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Orders swept by `sonine-check` and `inversion`.
    pub alphas: Option<Vec<f64>>,
    /// Number of random probe points.
    pub samples: Option<usize>,
    /// Upper end of the probe interval `(0, t_max]`.
    pub t_max: Option<f64>,
    /// Shift or difference steps.
    pub shifts: Option<Vec<f64>>,
    /// Frequencies for symbol diagnostics.
    pub xi: Option<Vec<f64>>,
    /// Centre and width of the Gaussian test datum.
    pub center: Option<f64>,
    pub width: Option<f64>,
    /// Marchaud cutoff for kernels without an integrable tail.
    pub cutoff: Option<f64>,
    /// Tail tolerance for the weighted cutoff.
    pub eps: Option<f64>,
    /// Largest history shift sampled by `neutralization`.
    pub s_max: Option<f64>,
    /// Observation band for `neutralization`.
    pub band: Option<[f64; 2]>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub sign: Option<f64>,
    pub allow_expansive: Option<bool>,
    pub form: Option<OperatorForm>,
    pub snapshot_every: Option<usize>,
    /// Also run at `2 dt` and `4 dt` to measure the time order.
    pub refine: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    #[serde(default = "default_scale")]
    pub scale: ScaleFamily,
    #[serde(default = "default_weight")]
    pub weight: WeightFamily,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub params: Params,
}

fn default_scale() -> ScaleFamily {
    ScaleFamily::Identity
}

fn default_weight() -> WeightFamily {
    WeightFamily::Constant
}

impl ExperimentConfig {
    pub fn new(name: ExperimentName) -> Self {
        Self {
            name,
            scale: default_scale(),
            weight: default_weight(),
            kernel: KernelSpec::default(),
            grid: GridSpec::default(),
            params: Params::default(),
        }
    }

    pub fn scale(&self) -> Result<AgingScale> {
        AgingScale::from_family(self.scale)
    }

    pub fn weight(&self) -> Result<AmnesiaWeight> {
        AmnesiaWeight::from_family(self.weight, self.scale()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("sonine-output")
}

pub const OUTPUT_ENV: &str = "SONINE_OUTPUT_DIR";

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        if cfg.experiments.is_empty() {
            return Err(Error::Config("config lists no [[experiment]] tables".into()));
        }
        Ok(cfg)
    }

    /// Reads the file and applies the output-directory override from the environment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = std::env::var_os(OUTPUT_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_table() {
        let cfg = RunConfig::parse(
            r#"
            output_dir = "out"
            seed = 3
            [[experiment]]
            name = "sonine-check"
            kernel = { family = "bessel", alpha = 0.5 }
            scale = { family = "sinh" }
            weight = { family = "exp_operational", beta = 1.0 }
            grid = { x_min = -10.0, x_max = 10.0, n = 256 }
            params = { alphas = [0.25, 0.5], samples = 4 }
            "#,
        )
        .unwrap();
        let e = &cfg.experiments[0];
        assert_eq!(e.name, ExperimentName::SonineCheck);
        assert_eq!(e.kernel, KernelSpec::Bessel { alpha: 0.5, growth: DEFAULT_BESSEL_GROWTH });
        assert_eq!(e.params.samples, Some(4));
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let err = RunConfig::parse("[[experiment]]\nname = \"evolve\"\nbogus = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
        assert!(RunConfig::parse("[[experiment]]\nname = \"evolve\"\nparams = { dtt = 1 }\n").is_err());
        assert!(RunConfig::parse("[[experiment]]\nname = \"nope\"\n").is_err());
        assert!(RunConfig::parse("seed = 1\n").is_err());
    }
}
