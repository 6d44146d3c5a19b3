use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use noma_pairing::fnoma::{Mode, PairingConfig};
use noma_pairing_cli::point::{self, PointArgs};
use noma_pairing_cli::{load_config, preset, run_sweep, CliError, Format, SweepResult, SweepSpec};

#[derive(Parser)]
#[command(name = "noma-pairing", version, about = "User pairing in NOMA: analytic probabilities and Monte Carlo checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability that F-NOMA has a lower sum rate than orthogonal MA.
    FnomaSumProb(PointOpts),
    /// Probability that the F-NOMA sum-rate gain is below R_gap.
    FnomaGap {
        #[command(flatten)]
        opts: PointOpts,
        /// Report the high-SNR error floor instead of simulating at --rho-db.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Probabilities that each paired user gains from F-NOMA individually.
    FnomaIndividual {
        #[command(flatten)]
        opts: PointOpts,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
    },
    /// CR-NOMA power share of the strong user for a given weak-user gain.
    CrnomaPower {
        #[arg(long = "gm")]
        g_m: f64,
        #[arg(long = "rho-db", default_value_t = 20.0, allow_negative_numbers = true)]
        rho_db: f64,
        #[arg(long = "I", default_value_t = 5.0)]
        sinr_target: f64,
    },
    /// CR-NOMA outage probability of the strong user.
    CrnomaOutage(PointOpts),
    /// Mean CR-NOMA rate of the strong user.
    CrnomaErgodic(PointOpts),
    /// Run a preset or a config file over a grid.
    Sweep(SweepOpts),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Highsnr,
}

#[derive(Args)]
struct PointOpts {
    #[arg(long = "M", default_value_t = 5)]
    users: usize,
    #[arg(long = "m", default_value_t = 1)]
    m: usize,
    #[arg(long = "n", default_value_t = 2)]
    n: usize,
    #[arg(long = "an2", default_value_t = 0.2)]
    an2: f64,
    #[arg(long = "rho-db", default_value_t = 20.0, allow_negative_numbers = true)]
    rho_db: f64,
    #[arg(long = "I", default_value_t = 5.0)]
    sinr_target: f64,
    #[arg(long = "rate-bpcu", default_value_t = 1.0)]
    rate_bpcu: f64,
    #[arg(long = "R-gap", visible_alias = "R", default_value_t = 0.0)]
    rate_gap: f64,
    #[command(flatten)]
    mc: McOpts,
}

#[derive(Args)]
struct McOpts {
    /// Monte Carlo trials (at least 1000); omitted means no simulation where a closed form exists.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepOpts {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (single curve) or directory (several curves).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long = "rho-start-db", allow_negative_numbers = true)]
    rho_start_db: Option<f64>,
    #[arg(long = "rho-stop-db", allow_negative_numbers = true)]
    rho_stop_db: Option<f64>,
    #[arg(long = "rho-step-db")]
    rho_step_db: Option<f64>,
    /// Overrides the trial count of every curve.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn default_workers(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

impl PointOpts {
    fn args(&self) -> PointArgs {
        let config = PairingConfig {
            users: self.users,
            weak: self.m,
            strong: self.n,
            rho: 1.0,
            a_n_sq: self.an2,
            rate_gap: self.rate_gap,
            rate_target: self.rate_bpcu,
            sinr_target: self.sinr_target,
        };
        PointArgs {
            trials: self.mc.trials,
            seed: self.mc.seed,
            workers: default_workers(self.mc.workers),
            ..PointArgs::new(config, self.rho_db)
        }
    }
}

fn print_json(v: &serde_json::Value) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).expect("in-memory value");
    writeln!(out).map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn render(r: &SweepResult) -> String {
    match r.spec.format {
        Format::Csv => r.to_csv(),
        Format::Json => r.to_json(),
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_result(r: &SweepResult, path: &Path) -> Result<(), CliError> {
    write_file(path, &render(r))?;
    if r.spec.format == Format::Csv {
        let meta = serde_json::to_string_pretty(&r.metadata()).expect("plain data") + "\n";
        write_file(&sidecar_path(path), &meta)?;
    }
    Ok(())
}

fn run_sweep_command(o: &SweepOpts) -> Result<(), CliError> {
    let (mut specs, label) = match (&o.preset, &o.config) {
        (Some(name), _) => (preset(name)?, name.clone()),
        (None, Some(path)) => (
            load_config(path)?,
            path.file_stem().map_or("sweep".into(), |s| s.to_string_lossy().into_owned()),
        ),
        (None, None) => unreachable!("clap requires one of --preset/--config"),
    };
    for s in &mut specs {
        apply_overrides(s, o);
    }
    let workers = default_workers(o.workers);
    // Everything is computed before anything is written.
    let results = specs
        .iter()
        .map(|s| run_sweep(s, workers))
        .collect::<Result<Vec<_>, _>>()?;

    if results.len() == 1 {
        let r = &results[0];
        match &o.out {
            Some(path) => write_result(r, path)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(render(r).as_bytes())
                    .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            }
        }
        return Ok(());
    }

    let dir = o.out.clone().unwrap_or_else(|| PathBuf::from(&label));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    for (i, r) in results.iter().enumerate() {
        let stem = if r.spec.name.is_empty() {
            format!("{label}-{i}")
        } else {
            r.spec.name.clone()
        };
        let ext = match r.spec.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let path = dir.join(format!("{stem}.{ext}"));
        write_result(r, &path)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn apply_overrides(s: &mut SweepSpec, o: &SweepOpts) {
    if let Some(f) = o.format {
        s.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(v) = o.rho_start_db {
        s.rho_start_db = v;
    }
    if let Some(v) = o.rho_stop_db {
        s.rho_stop_db = v;
    }
    if let Some(v) = o.rho_step_db {
        s.rho_step_db = v;
    }
    if let Some(v) = o.trials {
        s.trials = v;
    }
    if let Some(v) = o.seed {
        s.seed = v;
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::FnomaSumProb(o) => print_json(&point::fnoma_sum_prob(&o.args())?),
        Command::FnomaGap { opts, asymptotic } => {
            print_json(&point::fnoma_gap(&opts.args(), asymptotic)?)
        }
        Command::FnomaIndividual { opts, mode } => {
            let mode = match mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Highsnr => Mode::HighSnr,
            };
            print_json(&point::fnoma_individual(&opts.args(), mode)?)
        }
        Command::CrnomaPower {
            g_m,
            rho_db,
            sinr_target,
        } => print_json(&point::crnoma_power(g_m, rho_db, sinr_target)?),
        Command::CrnomaOutage(o) => print_json(&point::crnoma_outage(&o.args())?),
        Command::CrnomaErgodic(o) => print_json(&point::crnoma_ergodic(&o.args())?),
        Command::Sweep(o) => run_sweep_command(&o),
    }
}

fn report(err: &CliError) {
    let color = std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal();
    let prefix = if color { "\x1b[1;31merror\x1b[0m" } else { "error" };
    eprintln!("{prefix}: {err}");
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::FAILURE
        }
    }
}
