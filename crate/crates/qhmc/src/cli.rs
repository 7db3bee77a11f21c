//! Command-line front end: sample, simulate-data, analyze, check-physical.
//!
//! Exit codes: 0 success, 2 configuration or input-validation error,
//! 3 initial point with zero density, 4 file-system error.

use crate::bb84;
use crate::chsh;
use crate::engine::{self, HmcConfig, SampleSet};
use crate::io::{self, RunManifest, SampleFormat, SampleTable};
use crate::leapfrog::TrajectoryConfig;
use crate::targets::{
    incomplete_pom_posterior_target, qubit_posterior_target, CountData, PomId,
    ReconstructionSpace, TargetDensity,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BAD_INITIAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
enum CliError {
    Config(String),
    BadInitial,
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::BadInitial => EXIT_BAD_INITIAL,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => format!("error: {m}"),
            CliError::BadInitial => {
                "error: the initial point has zero target density".into()
            }
            CliError::Io(m) => format!("error: {m}"),
        }
    }
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        match e {
            io::IoError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<engine::EngineError> for CliError {
    fn from(e: engine::EngineError) -> Self {
        match e {
            engine::EngineError::BadInitialPoint => CliError::BadInitial,
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<crate::targets::TargetError> for CliError {
    fn from(e: crate::targets::TargetError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<bb84::Bb84Error> for CliError {
    fn from(e: bb84::Bb84Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "qhmc", version, about = "Hamiltonian Monte Carlo over quantum state space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run HMC chains for a POM target and write the samples.
    Sample(SampleArgs),
    /// Draw multinomial counts from a known state.
    SimulateData(SimulateArgs),
    /// Diagnostics and CHSH summaries over a sample file.
    Analyze(AnalyzeArgs),
    /// Decide whether a BB84 probability table admits a physical state.
    CheckPhysical(CheckArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PomArg {
    Tetrahedron,
    Pauli,
    Trine,
    Crosshair,
    Bb84,
}

impl PomArg {
    fn id(self) -> PomId {
        match self {
            PomArg::Tetrahedron => PomId::Tetrahedron,
            PomArg::Pauli => PomId::Pauli,
            PomArg::Trine => PomId::Trine,
            PomArg::Crosshair => PomId::Crosshair,
            PomArg::Bb84 => PomId::Bb84DoubleCrosshair,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SpaceArg {
    Equatorial,
    Hemisphere,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PriorArg {
    /// Flat prior over the state space (no offset).
    Primitive,
    /// Jeffreys prior: every count offset by -1/2.
    Jeffreys,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl FormatArg {
    fn format(self) -> SampleFormat {
        match self {
            FormatArg::Csv => SampleFormat::Csv,
            FormatArg::Jsonl => SampleFormat::JsonLines,
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// POM whose posterior (or prior) is sampled.
    #[arg(long, value_enum, required_unless_present = "from_manifest")]
    pom: Option<PomArg>,
    /// Reconstruction space for trine/crosshair POMs.
    #[arg(long, value_enum, default_value = "equatorial")]
    space: SpaceArg,
    /// Count file (CSV outcome,count); omitted means zero counts.
    #[arg(long)]
    counts: Option<PathBuf>,
    /// Prior rule applied to the counts.
    #[arg(long, value_enum, default_value = "primitive")]
    prior: PriorArg,
    /// Mock counts added to the data (conjugate prior).
    #[arg(long)]
    mock_counts: Option<PathBuf>,
    /// Kept samples per chain (after burn-in and thinning).
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    #[arg(long, default_value_t = 1_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    thinning: usize,
    /// Leapfrog step size.
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    /// Leapfrog steps per trajectory.
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, default_value_t = 0.1)]
    jitter_tau: f64,
    #[arg(long, default_value_t = 0.1)]
    jitter_steps: f64,
    /// Number of chains; chain c uses RNG stream c of the same seed.
    #[arg(long, default_value_t = 1)]
    chains: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Starting angles, comma-separated; default is an interior point.
    #[arg(long)]
    initial: Option<String>,
    /// Skip the q-marginalization weights for the bb84 POM.
    #[arg(long, default_value_t = false)]
    no_reweight: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output sample table.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the run manifest (default: <out>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Reproduce the run recorded in this manifest; other sampling flags
    /// are ignored.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    pom: PomArg,
    /// True state for the bb84 POM.
    #[arg(long)]
    state: Option<String>,
    /// Isotropic noise strength applied to the named state.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// True Bloch vector "x,y,z" for single-qubit POMs.
    #[arg(long)]
    bloch: Option<String>,
    #[arg(long)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AnalyzeKind {
    Diagnostics,
    ChshFixed,
    ChshOptimized,
    Histogram,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, value_enum)]
    kind: AnalyzeKind,
    #[arg(long, default_value_t = 60)]
    bins: usize,
    /// Column for --kind histogram (theta_s, p_k, or q).
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value_t = chsh::STANDARD_SETTING.phi1)]
    phi1: f64,
    #[arg(long, default_value_t = chsh::STANDARD_SETTING.phi2)]
    phi2: f64,
    #[arg(long, default_value_t = chsh::STANDARD_SETTING.psi1)]
    psi1: f64,
    #[arg(long, default_value_t = chsh::STANDARD_SETTING.psi2)]
    psi2: f64,
    /// Main report file (CSV).
    #[arg(long)]
    out: PathBuf,
    /// JSON summary (default: <out>.summary.json).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Probability table: CSV outcome,count with 16 rows summing to 1.
    #[arg(long)]
    input: PathBuf,
    /// Optional JSON result file; default prints to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses the process arguments, runs the command, and returns the exit
/// code. Errors are reported on stderr.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::SimulateData(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::CheckPhysical(args) => cmd_check(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.message());
            e.code()
        }
    }
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

/// Fully resolved sampling plan, either from flags or from a manifest.
struct SamplePlan {
    pom: PomId,
    space: ReconstructionSpace,
    prior: PriorArg,
    counts: Vec<f64>,
    samples: usize,
    burn_in: usize,
    thinning: usize,
    trajectory: TrajectoryConfig,
    chains: u64,
    seed: u64,
    initial: Option<Vec<f64>>,
    reweight: bool,
    format: SampleFormat,
}

fn parse_pom_name(name: &str) -> Result<PomId, CliError> {
    match name {
        "tetrahedron" => Ok(PomId::Tetrahedron),
        "pauli" => Ok(PomId::Pauli),
        "trine" => Ok(PomId::Trine),
        "crosshair" => Ok(PomId::Crosshair),
        "bb84-double-crosshair" => Ok(PomId::Bb84DoubleCrosshair),
        other => Err(CliError::Config(format!("unknown pom '{other}' in manifest"))),
    }
}

fn plan_from_manifest(m: &RunManifest) -> Result<SamplePlan, CliError> {
    if m.rng_algorithm != engine::RNG_ALGORITHM {
        return Err(CliError::Config(format!(
            "manifest was produced with rng '{}', this build uses '{}'",
            m.rng_algorithm,
            engine::RNG_ALGORITHM
        )));
    }
    let space = match m.space.as_deref() {
        None | Some("equatorial") => ReconstructionSpace::Equatorial,
        Some("hemisphere") => ReconstructionSpace::Hemisphere,
        Some(other) => {
            return Err(CliError::Config(format!("unknown space '{other}' in manifest")))
        }
    };
    let prior = match m.prior.as_str() {
        "primitive" => PriorArg::Primitive,
        "jeffreys" => PriorArg::Jeffreys,
        other => return Err(CliError::Config(format!("unknown prior '{other}' in manifest"))),
    };
    if m.chain_length <= m.burn_in {
        return Err(CliError::Config("manifest chain_length <= burn_in".into()));
    }
    Ok(SamplePlan {
        pom: parse_pom_name(&m.pom)?,
        space,
        prior,
        counts: m.counts.clone(),
        samples: (m.chain_length - m.burn_in).div_ceil(m.thinning.max(1)),
        burn_in: m.burn_in,
        thinning: m.thinning.max(1),
        trajectory: m.trajectory,
        chains: m.chains,
        seed: m.seed,
        initial: None,
        reweight: m.reweighted,
        format: m.format,
    })
}

fn parse_float_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad float '{f}'")))
        })
        .collect()
}

fn plan_from_args(args: &SampleArgs) -> Result<SamplePlan, CliError> {
    let pom = args
        .pom
        .ok_or_else(|| CliError::Config("--pom is required".into()))?
        .id();
    let counts = match &args.counts {
        Some(path) => io::read_counts(path)?,
        None => vec![0.0; pom.outcomes()],
    };
    let counts = match &args.mock_counts {
        Some(path) => {
            let mock = io::read_counts(path)?;
            if mock.len() != counts.len() {
                return Err(CliError::Config(format!(
                    "mock counts have {} outcomes, data has {}",
                    mock.len(),
                    counts.len()
                )));
            }
            counts.iter().zip(&mock).map(|(a, b)| a + b).collect()
        }
        None => counts,
    };
    if args.samples == 0 {
        return Err(CliError::Config("--samples must be >= 1".into()));
    }
    Ok(SamplePlan {
        pom,
        space: match args.space {
            SpaceArg::Equatorial => ReconstructionSpace::Equatorial,
            SpaceArg::Hemisphere => ReconstructionSpace::Hemisphere,
        },
        prior: args.prior,
        counts,
        samples: args.samples,
        burn_in: args.burn_in,
        thinning: args.thinning,
        trajectory: TrajectoryConfig {
            tau: args.tau,
            steps: args.steps,
            jitter_tau: args.jitter_tau,
            jitter_steps: args.jitter_steps,
        },
        chains: args.chains,
        seed: args.seed,
        initial: args
            .initial
            .as_deref()
            .map(parse_float_list)
            .transpose()?,
        reweight: !args.no_reweight,
        format: args.format.format(),
    })
}

fn target_for(plan: &SamplePlan) -> Result<TargetDensity, CliError> {
    let mut counts = CountData::new(plan.counts.clone())?;
    if counts.len() != plan.pom.outcomes() {
        return Err(CliError::Config(format!(
            "pom '{}' has {} outcomes, got {} counts",
            plan.pom.name(),
            plan.pom.outcomes(),
            counts.len()
        )));
    }
    if plan.prior == PriorArg::Jeffreys {
        counts = counts.jeffreys();
    }
    Ok(match plan.pom {
        PomId::Tetrahedron | PomId::Pauli => qubit_posterior_target(plan.pom, &counts)?,
        PomId::Trine | PomId::Crosshair => {
            incomplete_pom_posterior_target(plan.pom, plan.space, &counts)?
        }
        PomId::Bb84DoubleCrosshair => bb84::bb84_target(&counts)?,
    })
}

/// Interior default start; spread across coordinates so no symmetry of the
/// map is hit exactly.
fn default_initial(dim: usize) -> Vec<f64> {
    (0..dim).map(|s| 0.4 + 0.1 * s as f64).collect()
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let t0 = std::time::Instant::now();
    let plan = match &args.from_manifest {
        Some(path) => plan_from_manifest(&io::read_manifest(path)?)?,
        None => plan_from_args(&args)?,
    };
    let target = target_for(&plan)?;
    if plan.chains == 0 {
        return Err(CliError::Config("--chains must be >= 1".into()));
    }
    let initial = match &plan.initial {
        Some(init) => {
            if init.len() != target.dim() {
                return Err(CliError::Config(format!(
                    "--initial needs {} angles, got {}",
                    target.dim(),
                    init.len()
                )));
            }
            init.clone()
        }
        None => default_initial(target.dim()),
    };
    if !plan.trajectory.validate() {
        return Err(CliError::Config(
            "invalid trajectory parameters (tau > 0, steps >= 1, jitters in [0, 0.5])".into(),
        ));
    }
    let cfg = HmcConfig {
        trajectory: plan.trajectory,
        chain_length: plan.burn_in + plan.samples * plan.thinning,
        burn_in: plan.burn_in,
        thinning: plan.thinning,
        seed: plan.seed,
        initial,
    };
    let mut sets: Vec<SampleSet> = Vec::with_capacity(plan.chains as usize);
    for chain in 0..plan.chains {
        let mut set = engine::run_chain_id(&target, &cfg, chain)?;
        if plan.pom == PomId::Bb84DoubleCrosshair && plan.reweight {
            set = bb84::reweight_marginal(&set)?;
        }
        sets.push(set);
    }
    io::write_samples(&args.out, &sets, plan.format)?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        target: target.label().into(),
        pom: plan.pom.name().into(),
        space: match plan.pom {
            PomId::Trine | PomId::Crosshair => Some(
                match plan.space {
                    ReconstructionSpace::Equatorial => "equatorial",
                    ReconstructionSpace::Hemisphere => "hemisphere",
                }
                .into(),
            ),
            _ => None,
        },
        prior: match plan.prior {
            PriorArg::Primitive => "primitive".into(),
            PriorArg::Jeffreys => "jeffreys".into(),
        },
        counts: plan.counts.clone(),
        chain_length: cfg.chain_length,
        burn_in: cfg.burn_in,
        thinning: cfg.thinning,
        chains: plan.chains,
        seed: plan.seed,
        rng_algorithm: engine::RNG_ALGORITHM.into(),
        trajectory: plan.trajectory,
        reweighted: plan.pom == PomId::Bb84DoubleCrosshair && plan.reweight,
        format: plan.format,
        acceptance_rates: sets.iter().map(|s| s.metadata.acceptance_rate).collect(),
        degenerate_count: sets.iter().map(|s| s.metadata.degenerate_count).sum(),
        wall_time_seconds: t0.elapsed().as_secs_f64(),
    };
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".manifest.json"));
    io::write_manifest(&manifest_path, &manifest)?;
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

// ---------------------------------------------------------------------------
// simulate-data
// ---------------------------------------------------------------------------

/// Multinomial draw: `shots` independent outcomes with the given weights.
fn sample_counts(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    let mut counts = vec![0.0; probs.len()];
    for _ in 0..shots {
        let mut u = rng.random::<f64>() * total;
        let mut chosen = probs.len() - 1;
        for (k, &p) in probs.iter().enumerate() {
            if u < p {
                chosen = k;
                break;
            }
            u -= p;
        }
        counts[chosen] += 1.0;
    }
    counts
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let pom = args.pom.id();
    if !(0.0..=1.0).contains(&args.noise) {
        return Err(CliError::Config("--noise must be in [0, 1]".into()));
    }
    let probs: Vec<f64> = match pom {
        PomId::Bb84DoubleCrosshair => {
            let name = args
                .state
                .as_deref()
                .ok_or_else(|| CliError::Config("bb84 needs --state".into()))?;
            let state: bb84::NamedState =
                name.parse().map_err(CliError::Config)?;
            let rho = bb84::named_state(state, args.noise);
            bb84::bb84_probs_from_physical(&rho)?.flat().to_vec()
        }
        _ => {
            let bloch = args
                .bloch
                .as_deref()
                .ok_or_else(|| CliError::Config("single-qubit poms need --bloch x,y,z".into()))?;
            let v = parse_float_list(bloch)?;
            if v.len() != 3 {
                return Err(CliError::Config("--bloch needs three components".into()));
            }
            let scaled: Vec<f64> = v.iter().map(|c| c * (1.0 - args.noise)).collect();
            let b = crate::param::BlochVector {
                x: scaled[0],
                y: scaled[1],
                z: scaled[2],
            };
            if b.norm_squared() > 1.0 + 1e-12 {
                return Err(CliError::Config("--bloch must lie in the unit ball".into()));
            }
            match pom {
                PomId::Tetrahedron => crate::targets::tetrahedron_probs(&b),
                PomId::Pauli => crate::targets::pauli_probs(&b),
                PomId::Trine => crate::targets::trine_probs(b.x, b.y),
                PomId::Crosshair => crate::targets::crosshair_probs(b.x, b.y),
                PomId::Bb84DoubleCrosshair => unreachable!(),
            }
        }
    };
    if probs.iter().any(|&p| p < -1e-12) {
        return Err(CliError::Config("state induces negative probabilities".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let counts = sample_counts(&probs, args.shots, &mut rng);
    io::write_counts(&args.out, &counts)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn read_nonempty(args: &AnalyzeArgs) -> Result<SampleTable, CliError> {
    let table = io::read_samples(&args.input, args.format.format())?;
    if table.is_empty() {
        return Err(CliError::Config("sample file has no rows".into()));
    }
    Ok(table)
}

#[derive(serde::Serialize)]
struct DiagnosticsSummary {
    rows: usize,
    integrated_autocorrelation: Vec<f64>,
    effective_sample_size: Vec<f64>,
    degenerate: bool,
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let table = read_nonempty(&args)?;
    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".summary.json"));
    match args.kind {
        AnalyzeKind::Diagnostics => {
            let set = table.to_sample_set();
            let report = engine::diagnostics(&set);
            let dim = report.acf.len();
            let mut out = String::new();
            out.push_str("lag");
            for s in 1..=dim {
                out.push_str(&format!(",acf_theta_{s}"));
            }
            out.push('\n');
            let max_lag = report.acf.first().map_or(0, |a| a.len());
            for lag in 0..max_lag {
                out.push_str(&lag.to_string());
                for a in &report.acf {
                    out.push_str(&format!(",{:.16e}", a[lag]));
                }
                out.push('\n');
            }
            std::fs::write(&args.out, out).map_err(|e| CliError::Io(e.to_string()))?;
            let summary = DiagnosticsSummary {
                rows: table.len(),
                integrated_autocorrelation: report.integrated_autocorrelation,
                effective_sample_size: report.effective_sample_size,
                degenerate: report.degenerate,
            };
            write_json(&summary_path, &summary)?;
        }
        AnalyzeKind::ChshFixed | AnalyzeKind::ChshOptimized => {
            if table.probs.first().map_or(0, |p| p.len()) != 16 {
                return Err(CliError::Config(
                    "CHSH analysis needs a bb84 sample table with 16 probability columns"
                        .into(),
                ));
            }
            let set = table.to_sample_set();
            let setting = chsh::ChshSetting {
                phi1: args.phi1,
                phi2: args.phi2,
                psi1: args.psi1,
                psi2: args.psi2,
            };
            let summary = match args.kind {
                AnalyzeKind::ChshFixed => {
                    chsh::chsh_sample_summary(&set, &setting, args.bins)?
                }
                _ => chsh::chsh_optimized_summary(&set, args.bins)?,
            };
            write_histogram_csv(&args.out, &summary.histogram)?;
            write_json(&summary_path, &summary)?;
        }
        AnalyzeKind::Histogram => {
            let column = args
                .column
                .as_deref()
                .ok_or_else(|| CliError::Config("--kind histogram needs --column".into()))?;
            let values = column_values(&table, column)?;
            let weights: Vec<f64> = (0..table.len()).map(|i| table.weight(i)).collect();
            let hist = chsh::weighted_histogram(&values, &weights, args.bins);
            write_histogram_csv(&args.out, &hist)?;
            #[derive(serde::Serialize)]
            struct ColumnSummary {
                column: String,
                rows: usize,
                weighted_mean: f64,
                weighted_median: f64,
            }
            let total: f64 = weights.iter().sum();
            let mean =
                values.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>() / total;
            write_json(
                &summary_path,
                &ColumnSummary {
                    column: column.into(),
                    rows: table.len(),
                    weighted_mean: mean,
                    weighted_median: chsh::weighted_quantile(&values, &weights, 0.5),
                },
            )?;
        }
    }
    Ok(())
}

fn column_values(table: &SampleTable, column: &str) -> Result<Vec<f64>, CliError> {
    if column == "q" {
        return table
            .q
            .clone()
            .ok_or_else(|| CliError::Config("table has no q column".into()));
    }
    if let Some(idx) = column.strip_prefix("theta_") {
        let s: usize = idx
            .parse()
            .map_err(|_| CliError::Config(format!("bad column '{column}'")))?;
        let dim = table.points.first().map_or(0, |p| p.len());
        if s == 0 || s > dim {
            return Err(CliError::Config(format!(
                "column '{column}' out of range (1..={dim})"
            )));
        }
        return Ok(table.points.iter().map(|p| p[s - 1]).collect());
    }
    if let Some(idx) = column.strip_prefix("p_") {
        let k: usize = idx
            .parse()
            .map_err(|_| CliError::Config(format!("bad column '{column}'")))?;
        let n = table.probs.first().map_or(0, |p| p.len());
        if k == 0 || k > n {
            return Err(CliError::Config(format!(
                "column '{column}' out of range (1..={n})"
            )));
        }
        return Ok(table.probs.iter().map(|p| p[k - 1]).collect());
    }
    Err(CliError::Config(format!(
        "unknown column '{column}' (use theta_s, p_k, or q)"
    )))
}

fn write_histogram_csv(path: &Path, bins: &[chsh::HistogramBin]) -> Result<(), CliError> {
    let mut out = String::from("bin_left,bin_right,weighted_density\n");
    for b in bins {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            b.left, b.right, b.density
        ));
    }
    std::fs::write(path, out).map_err(|e| CliError::Io(e.to_string()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| CliError::Io(e.to_string()))
}

// ---------------------------------------------------------------------------
// check-physical
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct CheckReport {
    physical: bool,
    q_min: Option<f64>,
    q_max: Option<f64>,
}

fn cmd_check(args: CheckArgs) -> Result<(), CliError> {
    let values = io::read_counts(&args.input)?;
    let flat: [f64; 16] = values
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Config(format!("need 16 probabilities, got {}", values.len())))?;
    // The linear constraints must hold before positivity is even a question.
    let physical = bb84::physicality_check_flat(&flat)?;
    let report = match (physical, bb84::Bb84Probabilities::new(flat)) {
        (true, Ok(p)) => {
            let b = bb84::q_bounds(&p)?;
            CheckReport {
                physical: true,
                q_min: Some(b.q_min),
                q_max: Some(b.q_max),
            }
        }
        _ => CheckReport {
            physical: false,
            q_min: None,
            q_max: None,
        },
    };
    match &args.out {
        Some(path) => write_json(path, &report)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?
        ),
    }
    Ok(())
}
