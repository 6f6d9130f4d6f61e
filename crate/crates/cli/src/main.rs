//! `bellsim`: Bell-sampling experiments from the command line.

mod config;
mod error;
mod experiment;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellsim::circuit::{Architecture, Circuit};
use bellsim::noise::{NoiseConfig, XyzProbs};
use bellsim::protocols::{
    self, depth_test_avg, depth_test_max_on, learn_clifford_t, magic_estimate_with, page_table, reconstruct_state,
    DifferenceMode, LearnConfig, PageTable,
};
use bellsim::sources::DenseSource;
use bellsim::stabilizer::bell_sample_clifford;
use bellsim::statevector::bell_sample_trajectories;
use bellsim::BellSampleSet;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::{CircuitSpec, Engine, ExperimentConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "bellsim", version, about = "Bell-sampling simulation and verification experiments")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file and write one CSV row per (point, estimator).
    Run(RunArgs),
    /// Draw Bell samples of two copies of a circuit state.
    SampleBell(SampleArgs),
    /// Apply the sample-based estimators to a Bell-sample file.
    Estimate(EstimateArgs),
    /// Lower-bound circuit depth from subsystem entanglement.
    DepthTest(DepthArgs),
    /// Estimate the T-count lower bound from Bell-sample differences.
    Magic(MagicArgs),
    /// Learn a Clifford+T state and write its description.
    LearnCt(LearnArgs),
    /// Tabulate average entanglement by depth for an architecture.
    PageTable(PageArgs),
    /// Estimate an output probability through the two-copy gadget.
    GadgetP1(GadgetArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the file's shot count.
    #[arg(long)]
    shots: Option<usize>,
    /// Overrides the file's engine.
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CircuitArgs {
    /// Circuit JSON, or a generator spec JSON with a `generator` field.
    #[arg(long, conflicts_with = "generator")]
    circuit: Option<PathBuf>,
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    closed: bool,
    #[arg(long)]
    circuit_seed: Option<u64>,
}

impl CircuitArgs {
    fn build(&self) -> CliResult<Circuit> {
        if let Some(path) = &self.circuit {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config("--circuit", format!("{}: {e}", path.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::config("--circuit", e))?;
            if value.get("generator").is_some() {
                let spec: CircuitSpec = serde_json::from_value(value).map_err(|e| CliError::config("--circuit", e))?;
                let base = path.parent().unwrap_or(Path::new("."));
                return spec.build("circuit", base);
            }
            return Circuit::from_json(&text).map_err(|e| CliError::config("--circuit", e));
        }
        let spec = CircuitSpec {
            generator: Some(self.generator.clone().ok_or_else(|| CliError::config("--circuit", "give --circuit or --generator"))?),
            n: self.n,
            depth: self.depth,
            t: self.t,
            closed: Some(self.closed),
            scrambling: None,
            seed: self.circuit_seed,
            file: None,
        };
        spec.build("circuit", Path::new("."))
    }
}

#[derive(Args, Clone)]
struct NoiseArgs {
    /// Noise block JSON `{"channel": {...}, "measurement": {...}}`.
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    px: f64,
    #[arg(long, default_value_t = 0.0)]
    py: f64,
    #[arg(long, default_value_t = 0.0)]
    pz: f64,
    #[arg(long)]
    meas_px: Option<f64>,
    #[arg(long)]
    meas_py: Option<f64>,
    #[arg(long)]
    meas_pz: Option<f64>,
}

impl NoiseArgs {
    fn config(&self) -> CliResult<NoiseConfig> {
        if let Some(path) = &self.noise {
            let text = std::fs::read_to_string(path)?;
            return serde_json::from_str(&text).map_err(|e| CliError::config("--noise", e));
        }
        let gate = XyzProbs {
            px: self.px,
            py: self.py,
            pz: self.pz,
        };
        let meas = (self.meas_px.is_some() || self.meas_py.is_some() || self.meas_pz.is_some()).then(|| XyzProbs {
            px: self.meas_px.unwrap_or(0.0),
            py: self.meas_py.unwrap_or(0.0),
            pz: self.meas_pz.unwrap_or(0.0),
        });
        Ok(NoiseConfig {
            channel: Some(gate),
            measurement: meas,
        })
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    shots: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Engine::Auto)]
    engine: Engine,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Subsystem qubits for the purity estimate, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',')]
    subsystem: Option<Vec<usize>>,
    /// Pauli string for the squared-expectation and distillation estimates.
    #[arg(long)]
    pauli: Option<String>,
    /// Two-qubit gate count for the noise-corrected fidelity.
    #[arg(long)]
    gates: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arch {
    Chain,
    ClosedChain,
    AllToAll,
}

impl From<Arch> for Architecture {
    fn from(a: Arch) -> Self {
        match a {
            Arch::Chain => Architecture::Chain1D { closed: false },
            Arch::ClosedChain => Architecture::Chain1D { closed: true },
            Arch::AllToAll => Architecture::AllToAll,
        }
    }
}

#[derive(Args)]
struct DepthArgs {
    /// One file for the maximal-entanglement test; several (one per
    /// circuit) together with `--page-table` for the average test.
    #[arg(long, required = true, num_args = 1..)]
    samples: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Arch::Chain)]
    arch: Arch,
    #[arg(long, value_delimiter = ',')]
    subsystem: Option<Vec<usize>>,
    #[arg(long)]
    page_table: Option<PathBuf>,
    /// Purity tolerance; defaults to three standard errors.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    AllPairs,
    Disjoint,
}

#[derive(Args)]
struct MagicArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::AllPairs)]
    mode: Mode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    /// Destination of the learned-state JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PageArgs {
    #[arg(long, value_enum, default_value_t = Arch::ClosedChain)]
    arch: Arch,
    #[arg(long)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    depths: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    circuits: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GadgetArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[arg(long)]
    shots: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn writer(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(out: &Option<PathBuf>, value: &serde_json::Value) -> CliResult<()> {
    let mut w = writer(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_samples(path: &Path) -> CliResult<BellSampleSet> {
    let f = File::open(path).map_err(|e| CliError::config("--samples", format!("{}: {e}", path.display())))?;
    Ok(BellSampleSet::read_from(BufReader::new(f))?)
}

fn record(name: &str, e: &bellsim::EstimateWithError) -> serde_json::Value {
    json!({ "estimator": name, "value": e.value, "std_error": e.std_error, "M": e.m_used, "flags": e.flags })
}

fn cmd_run(a: RunArgs) -> CliResult<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let seed = a
        .seed
        .or(cfg.seed)
        .ok_or_else(|| CliError::config("seed", "required (in the file or via --seed)"))?;
    let shots = a
        .shots
        .or(cfg.shots)
        .ok_or_else(|| CliError::config("shots", "required (in the file or via --shots)"))?;
    if shots == 0 {
        return Err(CliError::config("shots", "must be positive"));
    }
    let base = a.config.parent().unwrap_or(Path::new("."));
    let circuit = cfg.circuit.build("circuit", base)?;
    let rows = experiment::run(&cfg, &circuit, a.engine.unwrap_or(cfg.engine), shots, seed)?;
    experiment::write_csv(&rows, writer(&a.out)?)
}

fn cmd_sample(a: SampleArgs) -> CliResult<()> {
    let c = a.circuit.build()?;
    let noise = a.noise.config()?.attach(&c)?;
    let samples = match a.engine.resolve(&c)? {
        Engine::Stab => bell_sample_clifford(&c, &noise, a.shots, a.seed)?,
        _ => bell_sample_trajectories(&c, &noise, a.shots, a.seed)?,
    };
    let mut w = writer(&a.out)?;
    samples.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> CliResult<()> {
    use bellsim::estimators as est;
    let s = read_samples(&a.samples)?;
    let n = s.num_qubits();
    let mut records = vec![
        record("overlap", &est::overlap_estimate(&s)?),
        record("root_purity", &est::root_purity_fidelity(&s)?),
    ];
    if let Some(m) = a.gates {
        records.push(record("corrected_fidelity", &est::corrected_fidelity(&s, m, n)?));
    }
    if let Some(sub) = &a.subsystem {
        records.push(record("subsystem_purity", &est::subsystem_purity(&s, sub)?));
    }
    let (_, rate) = est::error_detect_filter(&s);
    records.push(json!({
        "estimator": "rejection_rate",
        "value": rate,
        "std_error": (rate * (1.0 - rate) / s.len() as f64).sqrt(),
        "M": s.len(),
        "flags": [],
    }));
    if let Some(p) = &a.pauli {
        let p: bellsim::PauliVec = p.parse()?;
        records.push(record("pauli_sq", &est::pauli_sq_expectation(&s, &p)?));
        match est::virtual_distillation(&s, &p, 0.05) {
            Ok(v) => records.push(record("virtual_distillation", &v)),
            Err(e) => records.push(json!({
                "estimator": "virtual_distillation",
                "value": null,
                "std_error": null,
                "M": s.len(),
                "flags": [format!("error={e}")],
            })),
        }
    }
    emit_json(&a.out, &serde_json::Value::Array(records))
}

fn cmd_depth(a: DepthArgs) -> CliResult<()> {
    let sets = a.samples.iter().map(|p| read_samples(p)).collect::<CliResult<Vec<_>>>()?;
    let r = match &a.page_table {
        Some(path) => {
            let table = PageTable::from_json(&std::fs::read_to_string(path)?)?;
            depth_test_avg(&sets, &table, a.epsilon)?
        }
        None => {
            if sets.len() != 1 {
                return Err(CliError::config("--samples", "several files need --page-table"));
            }
            let n = sets[0].num_qubits();
            let sub = a.subsystem.clone().unwrap_or_else(|| protocols::default_subsystem(n));
            depth_test_max_on(&sets[0], &a.arch.into(), &sub, a.epsilon)?
        }
    };
    emit_json(
        &a.out,
        &json!({
            "d_lower": r.d_lower,
            "entropy_estimate": r.entropy_estimate,
            "subsystem": r.subsystem,
            "epsilon": r.epsilon,
            "purity": record("subsystem_purity", &r.purity),
            "saturated": r.saturated,
        }),
    )
}

fn cmd_magic(a: MagicArgs) -> CliResult<()> {
    let s = read_samples(&a.samples)?;
    let mode = match a.mode {
        Mode::AllPairs => DifferenceMode::AllPairs,
        Mode::Disjoint => DifferenceMode::Disjoint,
    };
    let m = magic_estimate_with(&s, mode)?;
    emit_json(
        &a.out,
        &json!({
            "t_hat": m.t_hat,
            "nullity": m.nullity,
            "dim_g_prime": m.g_prime.dim(),
            "undersampled": m.undersampled,
            "M": s.len(),
        }),
    )
}

fn cmd_learn(a: LearnArgs) -> CliResult<()> {
    let c = a.circuit.build()?;
    let noise = a.noise.config()?.attach(&c)?;
    let src = DenseSource::new(&c, &noise)?;
    let cfg = LearnConfig {
        epsilon: a.epsilon,
        delta: a.delta,
        seed: a.seed,
        ..LearnConfig::default()
    };
    let l = learn_clifford_t(&src, &src, &cfg)?;
    let fidelity = reconstruct_state(&l)?.fidelity(src.ideal())?;
    if let Some(path) = &a.out {
        std::fs::write(path, l.to_json())?;
    }
    emit_json(
        &None,
        &json!({
            "t_hat": l.t_hat,
            "x": l.x.to_string(),
            "bell_samples": l.bell_samples,
            "copies": l.copies,
            "x_frequency": l.x_frequency,
            "fidelity": fidelity,
            "state_file": a.out,
        }),
    )
}

fn cmd_page(a: PageArgs) -> CliResult<()> {
    let t = page_table(&a.arch.into(), a.n, &a.depths, a.circuits, a.seed)?;
    let mut w = writer(&a.out)?;
    writeln!(w, "{}", t.to_json())?;
    w.flush()?;
    Ok(())
}

fn cmd_gadget(a: GadgetArgs) -> CliResult<()> {
    let c = a.circuit.build()?;
    let g = protocols::gadget_p1(&c, a.shots, a.seed)?;
    emit_json(
        &a.out,
        &json!([record("p1_squared", &g.squared), record("p1", &g.p1)]),
    )
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::config("--workers", "must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::config("--workers", e))?;
    }
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::SampleBell(a) => cmd_sample(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::DepthTest(a) => cmd_depth(a),
        Command::Magic(a) => cmd_magic(a),
        Command::LearnCt(a) => cmd_learn(a),
        Command::PageTable(a) => cmd_page(a),
        Command::GadgetP1(a) => cmd_gadget(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
