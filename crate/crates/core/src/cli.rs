//! Command-line front end. Every command writes `#`-prefixed manifest lines,
//! one CSV header row, then data rows.
//!
//! Exit codes: 0 ok, 1 internal error, 2 usage, 3 I/O, 4 bracket.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    find_threshold, sweep, AnalysisSettings, SweepRow, DEFAULT_F_TOL, DEFAULT_P_TOL, MAX_SWEEP_P,
};
use crate::error::Error;
use crate::protocol::{iterate_trajectory, purification_round, LocalOperation, ProtocolConfig};
use crate::states::{random_input_state, seeded_rng, werner_from_fidelity};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_BRACKET: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "purify",
    version,
    about = "Recurrence entanglement purification under depolarizing gate noise"
)]
struct Cli {
    /// Local operation applied to the kept pair between rounds.
    #[arg(long, value_enum, default_value_t = LocalOp::Rotation, global = true)]
    local_op: LocalOp,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LocalOp {
    Rotation,
    Twirl,
    None,
}

impl LocalOp {
    fn operation(self) -> LocalOperation {
        match self {
            LocalOp::Rotation => LocalOperation::BilateralRotation,
            LocalOp::Twirl => LocalOperation::Twirl,
            LocalOp::None => LocalOperation::None,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fidelity trajectories of random depolarized Bell inputs.
    Trajectories(TrajectoriesArgs),
    /// F_min and F_infty over a grid of gate error rates.
    Sweep(SweepArgs),
    /// Bisect for the gate error rate where purification stops.
    Threshold(ThresholdArgs),
    /// One round on a Werner input.
    Round(RoundArgs),
}

#[derive(Debug, Args)]
struct TrajectoriesArgs {
    #[arg(long, default_value_t = 0.0)]
    p_gate: f64,
    #[arg(long, default_value_t = 50)]
    states: usize,
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// start:stop:step
    #[arg(long, default_value = "0:0.1:0.01")]
    grid: String,
    #[arg(long, default_value_t = DEFAULT_F_TOL)]
    f_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    /// lo:hi
    #[arg(long, default_value = "0:0.2")]
    bracket: String,
    #[arg(long, default_value_t = DEFAULT_P_TOL)]
    p_tol: f64,
    #[arg(long, default_value_t = DEFAULT_F_TOL)]
    f_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RoundArgs {
    #[arg(long)]
    f0: f64,
    #[arg(long, default_value_t = 0.0)]
    p_gate: f64,
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
enum CommandError {
    Usage(String),
    Io(io::Error),
    Bracket(String),
    Internal(String),
}

impl CommandError {
    fn exit_code(&self) -> i32 {
        match self {
            CommandError::Usage(_) => EXIT_USAGE,
            CommandError::Io(_) => EXIT_IO,
            CommandError::Bracket(_) => EXIT_BRACKET,
            CommandError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Usage(msg) => write!(f, "usage error: {msg}"),
            CommandError::Io(e) => write!(f, "I/O error: {e}"),
            CommandError::Bracket(msg) => write!(f, "bracket error: {msg}"),
            CommandError::Internal(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl From<io::Error> for CommandError {
    fn from(e: io::Error) -> Self {
        CommandError::Io(e)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(msg) => CommandError::Usage(msg),
            Error::Bracket(msg) => CommandError::Bracket(msg),
            other => CommandError::Internal(other.to_string()),
        }
    }
}

/// Provenance written ahead of every CSV body.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: u64,
}

impl RunManifest {
    fn new(command: &str, local_op: LocalOp) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut manifest = Self {
            command: command.to_string(),
            parameters: Vec::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        };
        let op = local_op
            .to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default();
        manifest.param("local_op", op);
        manifest
    }

    fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    pub fn write_to(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "# command: {}", self.command)?;
        for (key, value) in &self.parameters {
            writeln!(out, "# {key}: {value}")?;
        }
        if let Some(seed) = self.seed {
            writeln!(out, "# seed: {seed}")?;
        }
        writeln!(out, "# version: {}", self.version)?;
        writeln!(out, "# timestamp: {}", self.timestamp)
    }
}

/// Fixed-point rendering with 10 significant digits; scientific below 1e-4.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if magnitude < -4 {
        return format!("{x:.9e}");
    }
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn format_optional(x: Option<f64>) -> String {
    x.map(format_sig10).unwrap_or_else(|| "NA".to_string())
}

/// `start:stop:step` with `stop` included when the grid lands on it.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts = parse_floats(spec, 3)?;
    let (start, stop, step) = (parts[0], parts[1], parts[2]);
    if !(step > 0.0) {
        return Err(format!("grid step {step} must be positive"));
    }
    if !(0.0 <= start && start < stop && stop <= MAX_SWEEP_P) {
        return Err(format!(
            "grid range must satisfy 0 <= start < stop <= {MAX_SWEEP_P}, got {start}:{stop}"
        ));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// `lo:hi`
pub fn parse_bracket(spec: &str) -> Result<(f64, f64), String> {
    let parts = parse_floats(spec, 2)?;
    let (lo, hi) = (parts[0], parts[1]);
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(format!("bracket must satisfy 0 <= lo < hi <= 1, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_floats(spec: &str, expected: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != expected {
        return Err(format!(
            "expected {expected} colon-separated numbers, got '{spec}'"
        ));
    }
    parts
        .iter()
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("invalid number '{s}': {e}"))
        })
        .collect()
}

fn open_output(
    path: &Option<PathBuf>,
    stdout: &mut dyn Write,
    body: &[u8],
) -> Result<(), CommandError> {
    match path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            file.write_all(body)?;
            file.flush()?;
        }
        None => stdout.write_all(body)?,
    }
    Ok(())
}

fn usage_if(condition: bool, msg: impl FnOnce() -> String) -> Result<(), CommandError> {
    if condition {
        Err(CommandError::Usage(msg()))
    } else {
        Ok(())
    }
}

fn cmd_trajectories(
    args: &TrajectoriesArgs,
    local_op: LocalOp,
    stdout: &mut dyn Write,
) -> Result<(), CommandError> {
    usage_if(!(0.0..=1.0).contains(&args.p_gate), || {
        format!("--p-gate {} not in [0, 1]", args.p_gate)
    })?;
    usage_if(args.rounds == 0, || "--rounds must be at least 1".into())?;
    let mut config = ProtocolConfig::with_p_gate(args.p_gate)?;
    config.local_operation = local_op.operation();
    config.max_rounds = args.rounds;

    let mut manifest = RunManifest::new("trajectories", local_op);
    manifest
        .param("p_gate", args.p_gate)
        .param("states", args.states)
        .param("rounds", args.rounds)
        .param("generator", "ChaCha8 (seed_from_u64)");
    manifest.seed = Some(args.seed);

    let mut body = Vec::new();
    manifest.write_to(&mut body)?;
    writeln!(body, "state_index,round,fidelity")?;
    let mut rng = seeded_rng(args.seed);
    for state_index in 0..args.states {
        let record = iterate_trajectory(&random_input_state(&mut rng), &config)?;
        writeln!(body, "{state_index},0,{}", format_sig10(record.input_fidelity))?;
        for (k, f) in record.fidelities.iter().enumerate() {
            writeln!(body, "{state_index},{},{}", k + 1, format_sig10(*f))?;
        }
    }
    open_output(&args.out, stdout, &body)
}

fn settings_for(local_op: LocalOp, f_tol: f64) -> Result<AnalysisSettings, CommandError> {
    usage_if(!(f_tol > 0.0), || format!("--f-tol {f_tol} must be positive"))?;
    Ok(AnalysisSettings {
        local_operation: local_op.operation(),
        f_tol,
        ..AnalysisSettings::default()
    })
}

fn write_sweep_rows(body: &mut Vec<u8>, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(body, "p_gate,f_min,f_infty")?;
    for row in rows {
        writeln!(
            body,
            "{},{},{}",
            format_sig10(row.p_gate),
            format_optional(row.f_min),
            format_optional(row.f_infty)
        )?;
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, local_op: LocalOp, stdout: &mut dyn Write) -> Result<(), CommandError> {
    let grid = parse_grid(&args.grid).map_err(CommandError::Usage)?;
    let settings = settings_for(local_op, args.f_tol)?;
    let rows = sweep(&grid, &settings)?;

    let mut manifest = RunManifest::new("sweep", local_op);
    manifest
        .param("grid", &args.grid)
        .param("f_tol", args.f_tol)
        .param("convergence_tol", settings.convergence_tol)
        .param("max_rounds", settings.max_rounds);
    let mut body = Vec::new();
    manifest.write_to(&mut body)?;
    write_sweep_rows(&mut body, &rows)?;
    open_output(&args.out, stdout, &body)
}

fn cmd_threshold(
    args: &ThresholdArgs,
    local_op: LocalOp,
    stdout: &mut dyn Write,
) -> Result<(), CommandError> {
    let (lo, hi) = parse_bracket(&args.bracket).map_err(CommandError::Usage)?;
    usage_if(!(args.p_tol > 0.0), || {
        format!("--p-tol {} must be positive", args.p_tol)
    })?;
    let settings = AnalysisSettings {
        p_tol: args.p_tol,
        ..settings_for(local_op, args.f_tol)?
    };
    let report = find_threshold(lo, hi, &settings)?;

    let mut manifest = RunManifest::new("threshold", local_op);
    manifest
        .param("bracket", &args.bracket)
        .param("p_tol", args.p_tol)
        .param("f_tol", args.f_tol);
    let mut body = Vec::new();
    manifest.write_to(&mut body)?;
    writeln!(body, "p_th,f_at_threshold,bracket_lo,bracket_hi")?;
    writeln!(
        body,
        "{},{},{},{}",
        format_sig10(report.p_th),
        format_sig10(report.f_at_threshold),
        format_sig10(report.bracket.0),
        format_sig10(report.bracket.1)
    )?;
    open_output(&args.out, stdout, &body)
}

fn cmd_round(args: &RoundArgs, local_op: LocalOp, stdout: &mut dyn Write) -> Result<(), CommandError> {
    usage_if(!(0.25..=1.0).contains(&args.f0), || {
        format!("--f0 {} not in [0.25, 1]", args.f0)
    })?;
    let config = ProtocolConfig::with_p_gate(args.p_gate)?;
    let outcome = purification_round(&werner_from_fidelity(args.f0)?, &config)?;

    let mut manifest = RunManifest::new("round", local_op);
    manifest.param("f0", args.f0).param("p_gate", args.p_gate);
    let mut body = Vec::new();
    manifest.write_to(&mut body)?;
    writeln!(body, "input_fidelity,output_fidelity,success_probability")?;
    writeln!(
        body,
        "{},{},{}",
        format_sig10(args.f0),
        format_sig10(outcome.output_fidelity),
        format_sig10(outcome.success_probability)
    )?;
    stdout.write_all(&body)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Trajectories(a) => cmd_trajectories(a, cli.local_op, stdout),
        Command::Sweep(a) => cmd_sweep(a, cli.local_op, stdout),
        Command::Threshold(a) => cmd_threshold(a, cli.local_op, stdout),
        Command::Round(a) => cmd_round(a, cli.local_op, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
