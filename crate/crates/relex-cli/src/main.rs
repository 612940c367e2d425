//! Command-line front end: channel-file ingestion, exponent sweeps,
//! ensemble verification runs, CSV emission with reproducible seeds.
//!
//! Exit codes: 0 success, 2 input error, 3 capability-cap refusal,
//! 4 verification flags raised under --strict.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod cmd_dmc;
mod cmd_mac;
mod cmd_verify;
mod manifest;

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "relex", version, about = "Reliability-function exponent bounds and ensemble verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent families for a point-to-point DMC over a rate or rate grid.
    DmcExponent(DmcArgs),
    /// Exponent families for a two-user MAC, optionally against the
    /// relaxed reference exponent.
    MacExponent(MacArgs),
    /// Ensemble verification runs: packing bands, sandwich, expurgation,
    /// typicality, empirical exponents.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct DmcArgs {
    /// Channel file (header `dmc |X| |Y|`).
    #[arg(long)]
    channel: PathBuf,
    /// Single rate in bits/symbol.
    #[arg(long, conflicts_with = "rate_grid")]
    rate: Option<f64>,
    /// Rate grid `a:b:step`.
    #[arg(long)]
    rate_grid: Option<String>,
    /// Decoding metric: ml | me.
    #[arg(long, default_value = "ml")]
    metric: String,
    /// Family: r | rL | T | TL | ex | all.
    #[arg(long, default_value = "all")]
    family: String,
    /// Composition: uniform | optimize | FILE with one probability row.
    #[arg(long, default_value = "uniform")]
    composition: String,
    #[arg(long, default_value_t = 40)]
    grid_denominator: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 700)]
    refine_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MacArgs {
    /// Channel file (header `mac |X| |Y| |Z|`).
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, conflicts_with = "rx_grid")]
    rx: Option<f64>,
    #[arg(long, conflicts_with = "ry_grid")]
    ry: Option<f64>,
    /// Rate grid `a:b:step` for user X.
    #[arg(long)]
    rx_grid: Option<String>,
    /// Rate grid `a:b:step` for user Y.
    #[arg(long)]
    ry_grid: Option<String>,
    /// Time-sharing alphabet size for sampled input distributions.
    #[arg(long, default_value_t = 1)]
    u_size: usize,
    /// Input distribution: FILE (header `macdist |U| |X| |Y|`) or sample:K.
    #[arg(long, default_value = "sample:1")]
    dist: String,
    /// Decoding metric: eq | ml.
    #[arg(long, default_value = "eq")]
    metric: String,
    /// Family: r | rL | T | TL | ex | all.
    #[arg(long, default_value = "ex")]
    family: String,
    /// Also compute the relaxed reference exponent and gaps (requires eq).
    #[arg(long, default_value_t = false)]
    compare_liu: bool,
    #[arg(long, default_value_t = 12)]
    grid_denominator: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 600)]
    refine_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct VerifyArgs {
    /// What to verify: packing-p2p | packing-mac | sandwich |
    /// expurgate-p2p | expurgate-mac | typicality | empirical-exponent.
    #[arg(long)]
    what: String,
    /// Channel file (required for sandwich / typicality / empirical-exponent).
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Blocklength list for empirical-exponent, e.g. `8,12,16,20`.
    #[arg(long)]
    n_list: Option<String>,
    /// Codebook size; 0 derives M = round(2^{nR}).
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    mx: usize,
    #[arg(long, default_value_t = 4)]
    my: usize,
    #[arg(long, default_value_t = 2)]
    u_size: usize,
    #[arg(long, default_value_t = 0.25)]
    rate: f64,
    #[arg(long)]
    rx: Option<f64>,
    #[arg(long)]
    ry: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Decoding metric: ml | me.
    #[arg(long, default_value = "ml")]
    metric: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Slope tolerance for empirical-exponent.
    #[arg(long, default_value_t = 0.1)]
    slope_tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit 4 when any verification row is flagged.
    #[arg(long, default_value_t = false)]
    strict: bool,
}

/// Collected CSV output: one manifest comment line, a header, and rows.
pub struct CsvOut {
    header: String,
    rows: Vec<String>,
    manifest_line: String,
}

impl CsvOut {
    pub fn new(header: &str, manifest: &RunManifest) -> Self {
        Self {
            header: header.to_string(),
            rows: Vec::new(),
            manifest_line: format!("# manifest: {}", manifest.render()),
        }
    }

    pub fn push(&mut self, row: String) {
        self.rows.push(row);
    }

    pub fn write(&self, output: &Option<PathBuf>) -> std::io::Result<()> {
        let mut text = String::new();
        text.push_str(&self.manifest_line);
        text.push('\n');
        text.push_str(&self.header);
        text.push('\n');
        for r in &self.rows {
            text.push_str(r);
            text.push('\n');
        }
        match output {
            Some(path) => std::fs::write(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Cap(String),
    FlagsRaised(usize),
}

impl From<relex::Error> for CliError {
    fn from(e: relex::Error) -> Self {
        match e {
            relex::Error::CapExceeded(m) => CliError::Cap(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!("bad grid spec {spec}; expected a:b:step")));
    }
    let a: f64 = parts[0].parse().map_err(|_| CliError::Input(format!("bad grid start {spec}")))?;
    let b: f64 = parts[1].parse().map_err(|_| CliError::Input(format!("bad grid end {spec}")))?;
    let step: f64 = parts[2].parse().map_err(|_| CliError::Input(format!("bad grid step {spec}")))?;
    if step <= 0.0 || b < a {
        return Err(CliError::Input(format!("empty grid {spec}")));
    }
    let count = ((b - a) / step + 0.5).floor() as usize;
    Ok((0..=count).map(|k| a + k as f64 * step).collect())
}

fn load_channel(path: &PathBuf, manifest: &mut RunManifest) -> Result<relex::Channel, CliError> {
    let bytes = std::fs::read(path)?;
    manifest.add_input(&path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::Input("channel file is not UTF-8".into()))?;
    Ok(relex::Channel::parse(&text)?)
}

fn main() -> ExitCode {
    if let Ok(workers) = std::env::var("RELEX_WORKERS") {
        if let Ok(k) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::DmcExponent(a) => cmd_dmc::run(a, &argv),
        Command::MacExponent(a) => cmd_mac::run(a, &argv),
        Command::Verify(a) => cmd_verify::run(a, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Cap(m)) => {
            eprintln!("capability cap: {m}");
            ExitCode::from(3)
        }
        Err(CliError::FlagsRaised(k)) => {
            eprintln!("verification raised {k} flag(s)");
            ExitCode::from(4)
        }
    }
}
