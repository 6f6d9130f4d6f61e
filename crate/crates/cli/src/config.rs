//! Experiment files and the circuit/noise/engine selections they share with
//! the single-shot subcommands.

use std::path::{Path, PathBuf};

use bellsim::circuit::{self, Circuit};
use bellsim::noise::{NoiseConfig, XyzProbs};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[serde(alias = "stabilizer")]
    Stab,
    #[serde(alias = "statevector")]
    Sv,
    #[default]
    Auto,
}

impl Engine {
    /// `Auto` picks the stabilizer engine exactly when the circuit is Clifford.
    pub fn resolve(self, c: &Circuit) -> CliResult<Engine> {
        match self {
            Engine::Auto if c.is_clifford() => Ok(Engine::Stab),
            Engine::Auto => Ok(Engine::Sv),
            Engine::Stab if !c.is_clifford() => Err(CliError::config("engine", "stabilizer engine needs a Clifford circuit")),
            e => Ok(e),
        }
    }
}

/// A circuit file, or a generator with its parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scrambling: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub const GENERATORS: &[&str] = &[
    "identity",
    "all_to_all_clifford",
    "brickwork_clifford",
    "crystalline_floquet",
    "clifford_plus_t",
];

impl CircuitSpec {
    /// Builds the circuit; relative files resolve against `base`. Errors
    /// name the offending field under `path`.
    pub fn build(&self, path: &str, base: &Path) -> CliResult<Circuit> {
        let field = |f: &str| format!("{path}.{f}");
        if let Some(file) = &self.file {
            if self.generator.is_some() {
                return Err(CliError::config(path, "give either `file` or `generator`, not both"));
            }
            let full = if file.is_absolute() { file.clone() } else { base.join(file) };
            let text = std::fs::read_to_string(&full)
                .map_err(|e| CliError::config(&field("file"), format!("{}: {e}", full.display())))?;
            return Circuit::from_json(&text).map_err(|e| CliError::config(&field("file"), e));
        }
        let Some(name) = &self.generator else {
            return Err(CliError::config(path, "needs `file` or `generator`"));
        };
        let n = self.n.ok_or_else(|| CliError::config(&field("n"), "required"))?;
        let depth = || self.depth.ok_or_else(|| CliError::config(&field("depth"), "required"));
        let seed = || self.seed.ok_or_else(|| CliError::config(&field("seed"), "required for random generators"));
        let built = match name.as_str() {
            "identity" => Ok(Circuit::new(n)),
            "all_to_all_clifford" => circuit::random_all_to_all_clifford(n, depth()?, seed()?),
            "brickwork_clifford" => circuit::brickwork_clifford(n, depth()?, self.closed.unwrap_or(false), seed()?),
            "crystalline_floquet" => circuit::crystalline_floquet(n, depth()?, self.scrambling.unwrap_or(true)),
            "clifford_plus_t" => circuit::clifford_plus_t_random(
                n,
                self.t.ok_or_else(|| CliError::config(&field("t"), "required"))?,
                depth()?,
                seed()?,
            ),
            other => {
                return Err(CliError::config(
                    &field("generator"),
                    format!("unknown generator `{other}`; expected one of {}", GENERATORS.join(", ")),
                ))
            }
        };
        built.map_err(|e| CliError::config(path, e))
    }
}

/// Noise sweep: every probability of the noise block is multiplied by each
/// value in turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub scale: Vec<f64>,
}

/// Estimators understood by `run`.
pub const ESTIMATORS: &[&str] = &[
    "dfe",
    "exact_fidelity",
    "purity",
    "root_purity",
    "corrected_fidelity",
    "xeb",
    "rejection_rate",
    "magic",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub circuit: CircuitSpec,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub shots: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub estimators: Vec<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| CliError::config("config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.estimators.is_empty() {
            return Err(CliError::config("estimators", "list is empty"));
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if !ESTIMATORS.contains(&e.as_str()) {
                return Err(CliError::config(
                    &format!("estimators[{i}]"),
                    format!("unknown estimator `{e}`; expected one of {}", ESTIMATORS.join(", ")),
                ));
            }
        }
        if let Some(s) = &self.sweep {
            if s.scale.is_empty() {
                return Err(CliError::config("sweep.scale", "list is empty"));
            }
            if let Some(i) = s.scale.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(CliError::config(&format!("sweep.scale[{i}]"), "must be finite and nonnegative"));
            }
        }
        if self.shots == Some(0) {
            return Err(CliError::config("shots", "must be positive"));
        }
        Ok(())
    }

    /// Noise block for each sweep point, paired with its label.
    pub fn points(&self) -> Vec<(f64, NoiseConfig)> {
        match &self.sweep {
            None => vec![(1.0, self.noise.clone())],
            Some(s) => s.scale.iter().map(|&k| (k, scale_noise(&self.noise, k))).collect(),
        }
    }
}

fn scale_probs(p: &XyzProbs, k: f64) -> XyzProbs {
    XyzProbs {
        px: p.px * k,
        py: p.py * k,
        pz: p.pz * k,
    }
}

pub fn scale_noise(n: &NoiseConfig, k: f64) -> NoiseConfig {
    NoiseConfig {
        channel: n.channel.as_ref().map(|p| scale_probs(p, k)),
        measurement: n.measurement.as_ref().map(|p| scale_probs(p, k)),
    }
}
