//! Sweep runner behind `bellsim run`.

use std::io::Write;

use bellsim::estimators::{
    corrected_fidelity, error_detect_filter, purity_power, root_purity_fidelity, subsystem_purity, xeb,
    EstimateWithError,
};
use bellsim::noise::NoiseConfig;
use bellsim::protocols::magic_estimate;
use bellsim::rng::derive_seed;
use bellsim::sources::DenseSource;
use bellsim::stabilizer::{dfe_estimate, simulate_tableau, CliffordCopySource, CopySource};
use bellsim::statevector::{bell_sample_trajectories, evolve_density, exact_fidelity, simulate_state};
use bellsim::stabilizer::bell_sample_clifford;
use bellsim::{BellSampleSet, Circuit, NoiseSpec};
use rayon::prelude::*;

use crate::config::{Engine, ExperimentConfig};
use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 7] = ["experiment", "point", "estimator", "value", "std_error", "M", "flags"];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub point: String,
    pub estimator: String,
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub m: usize,
    pub flags: Vec<String>,
}

impl Row {
    fn fields(&self) -> [String; 7] {
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.experiment.clone(),
            self.point.clone(),
            self.estimator.clone(),
            num(self.value),
            num(self.std_error),
            self.m.to_string(),
            self.flags.join(";"),
        ]
    }
}

pub fn write_csv<W: Write>(rows: &[Row], w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        out.write_record(r.fields())?;
    }
    out.flush()?;
    Ok(())
}

/// Inputs shared by every estimator at one sweep point.
struct Point<'a> {
    circuit: &'a Circuit,
    noise: NoiseSpec,
    engine: Engine,
    shots: usize,
    seed: u64,
}

impl Point<'_> {
    fn bell_samples(&self) -> bellsim::Result<BellSampleSet> {
        let seed = derive_seed(self.seed, 0);
        match self.engine {
            Engine::Stab => bell_sample_clifford(self.circuit, &self.noise, self.shots, seed),
            _ => bell_sample_trajectories(self.circuit, &self.noise, self.shots, seed),
        }
    }

    fn copy_source(&self) -> bellsim::Result<Box<dyn CopySource>> {
        Ok(match self.engine {
            Engine::Stab => Box::new(CliffordCopySource::new(self.circuit, &self.noise)?),
            _ => Box::new(DenseSource::new(self.circuit, &self.noise)?),
        })
    }

    fn dfe(&self) -> CliResult<EstimateWithError> {
        if !self.circuit.is_clifford() {
            return Err(CliError::config("estimators", "dfe needs a Clifford target"));
        }
        let target = simulate_tableau(self.circuit)?;
        let src = self.copy_source()?;
        Ok(dfe_estimate(&target, src.as_ref(), self.shots, derive_seed(self.seed, 1))?)
    }

    fn xeb(&self) -> CliResult<(Option<f64>, f64)> {
        let src = self.copy_source()?;
        let samples = src.sample_computational(self.shots, derive_seed(self.seed, 2))?;
        let r = if self.circuit.is_clifford() {
            xeb(&samples, &simulate_tableau(self.circuit)?.support())?
        } else {
            xeb(&samples, simulate_state(self.circuit)?.probabilities().as_slice())?
        };
        let se = if r.chi_ideal != 0.0 { r.chi_std_error / r.chi_ideal } else { f64::NAN };
        Ok((r.f_xeb, se))
    }
}

/// `(value, std_error, M, flags)` of one output row.
type Cells = (Option<f64>, Option<f64>, usize, Vec<String>);

fn estimate_row(est: &EstimateWithError) -> Cells {
    (Some(est.value), Some(est.std_error), est.m_used, est.flags.clone())
}

fn point_rows(cfg: &ExperimentConfig, label: f64, p: &Point<'_>) -> Vec<Row> {
    let needs_bell = cfg
        .estimators
        .iter()
        .any(|e| matches!(e.as_str(), "purity" | "root_purity" | "corrected_fidelity" | "rejection_rate" | "magic"));
    let bell = if needs_bell { Some(p.bell_samples().map_err(CliError::from)) } else { None };
    let n = p.circuit.num_qubits();
    cfg.estimators
        .iter()
        .map(|name| {
            let with_bell = |f: &dyn Fn(&BellSampleSet) -> CliResult<_>| match bell.as_ref().expect("sampled") {
                Ok(s) => f(s),
                Err(e) => Err(CliError {
                    kind: e.kind,
                    message: e.message.clone(),
                }),
            };
            let result: CliResult<Cells> = match name.as_str() {
                "dfe" => p.dfe().map(|e| estimate_row(&e)),
                "exact_fidelity" => evolve_density(p.circuit, &p.noise)
                    .and_then(|rho| exact_fidelity(&rho, p.circuit))
                    .map(|f| (Some(f), Some(0.0), 0, vec!["exact".into()]))
                    .map_err(CliError::from),
                "purity" => with_bell(&|s| {
                    let all: Vec<usize> = (0..n).collect();
                    Ok(estimate_row(&subsystem_purity(s, &all)?))
                }),
                "root_purity" => with_bell(&|s| Ok(estimate_row(&root_purity_fidelity(s)?))),
                "corrected_fidelity" => with_bell(&|s| {
                    let m = p.noise.two_qubit_gates;
                    if m == 0 {
                        // No gates: the exponent degenerates to the root map.
                        let pur = subsystem_purity(s, &(0..n).collect::<Vec<_>>())?;
                        return Ok(estimate_row(&purity_power(&pur, 0.5, n)));
                    }
                    Ok(estimate_row(&corrected_fidelity(s, m, n)?))
                }),
                "rejection_rate" => with_bell(&|s| {
                    let (_, rate) = error_detect_filter(s);
                    let se = (rate * (1.0 - rate) / s.len() as f64).sqrt();
                    Ok((Some(rate), Some(se), s.len(), vec![]))
                }),
                "magic" => with_bell(&|s| {
                    let m = magic_estimate(s)?;
                    let mut flags = vec![format!("nullity={}", m.nullity)];
                    if m.undersampled {
                        flags.push("undersampled".into());
                    }
                    Ok((Some(m.t_hat as f64), Some(0.0), s.len(), flags))
                }),
                "xeb" => p.xeb().map(|(f, se)| match f {
                    Some(v) => (Some(v), Some(se), p.shots, vec![]),
                    None => (None, None, p.shots, vec!["chi_ideal=0".into()]),
                }),
                other => Err(CliError::config("estimators", format!("unknown estimator `{other}`"))),
            };
            let (value, std_error, m, flags) = match result {
                Ok(r) => r,
                Err(e) => (None, None, 0, vec![format!("error={}", e.message)]),
            };
            Row {
                experiment: cfg.name.clone(),
                point: label.to_string(),
                estimator: name.clone(),
                value,
                std_error,
                m,
                flags,
            }
        })
        .collect()
}

/// Runs every sweep point. Point `i` draws from the stream derived from
/// `(seed, i)`, so the worker count never changes the output.
pub fn run(cfg: &ExperimentConfig, circuit: &Circuit, engine: Engine, shots: usize, seed: u64) -> CliResult<Vec<Row>> {
    let engine = engine.resolve(circuit)?;
    let points: Vec<(f64, NoiseConfig)> = cfg.points();
    let per_point: Vec<Vec<Row>> = points
        .par_iter()
        .enumerate()
        .map(|(i, (label, noise))| {
            let noise = match noise.attach(circuit) {
                Ok(n) => n,
                Err(e) => {
                    return cfg
                        .estimators
                        .iter()
                        .map(|name| Row {
                            experiment: cfg.name.clone(),
                            point: label.to_string(),
                            estimator: name.clone(),
                            value: None,
                            std_error: None,
                            m: 0,
                            flags: vec![format!("error={e}")],
                        })
                        .collect()
                }
            };
            let p = Point {
                circuit,
                noise,
                engine,
                shots,
                seed: derive_seed(seed, i as u64),
            };
            point_rows(cfg, *label, &p)
        })
        .collect();
    Ok(per_point.concat())
}
