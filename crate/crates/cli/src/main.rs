use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mdcnet_core::coverage::ApCoverageModel;
use mdcnet_cli::commands::{self, parse_grid, parse_seed_range, Mode, SimSettings, SweepSpec};
use mdcnet_cli::rows::{write_rows, Row};
use mdcnet_cli::validate::{validate, ValidateOptions, VerdictRow};
use mdcnet_cli::{acceptance, CliError};
use mdcnet_sim::SimOptions;

#[derive(Parser)]
#[command(name = "mdcnet", version, about = "Analytic model and slotted simulation of sensor networks served by mobile data collectors")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Io {
    /// `key = value` config file; the baseline scenario when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// CSV output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Sim {
    /// Single replication seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Inclusive seed range, e.g. 1..10.
    #[arg(long, value_name = "N..M")]
    seeds: Option<String>,
    #[arg(long, default_value_t = 20_000)]
    horizon_slots: u64,
    #[arg(long, default_value_t = 0.1)]
    warmup_frac: f64,
    /// Start MDCs at the beginning of a pause instead of a random phase.
    #[arg(long)]
    cold_start: bool,
}

impl Sim {
    fn settings(&self) -> Result<SimSettings, CliError> {
        let seeds = match (&self.seed, &self.seeds) {
            (Some(s), _) => vec![*s],
            (None, Some(r)) => parse_seed_range(r).map_err(CliError::Config)?,
            (None, None) => SimSettings::default().seeds,
        };
        Ok(SimSettings {
            seeds,
            horizon_slots: self.horizon_slots,
            warmup_frac: self.warmup_frac,
            options: SimOptions { stationary_start: !self.cold_start, trace_every: 0 },
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ApModel {
    DiskAveraged,
    PlainPgfl,
}

impl From<ApModel> for ApCoverageModel {
    fn from(m: ApModel) -> Self {
        match m {
            ApModel::DiskAveraged => ApCoverageModel::DiskAveraged,
            ApModel::PlainPgfl => ApCoverageModel::PlainPgfl,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Full analytic report: contact, coverage, queue, delay and energy.
    Analytic {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "disk-averaged")]
        ap_model: ApModel,
    },
    /// Replicated simulation, pooled rows first.
    Simulate {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        sim: Sim,
    },
    /// One parameter over a grid, analytic and/or simulated.
    Sweep {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        sim: Sim,
        #[arg(long)]
        param: String,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_name = "CSV-LIST")]
        grid: String,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
    },
    /// Compare the model with simulation and oracles; exit 4 on any failure.
    Validate {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        sim: Sim,
        /// Run the pinned acceptance suite instead of the per-config checks.
        #[arg(long)]
        acceptance: bool,
        /// Restrict the acceptance suite to these criteria.
        #[arg(long, value_delimiter = ',', requires = "acceptance")]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = 200_000)]
        oracle_cycles: u64,
        #[arg(long, hide = true, default_value_t = 1.0)]
        perturb_ect: f64,
    },
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(path: Option<&Path>, rows: &[Row]) -> anyhow::Result<()> {
    write_rows(output(path)?, rows)?;
    Ok(())
}

fn emit_serialized<T: serde::Serialize>(path: Option<&Path>, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(output(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Analytic { io, ap_model } => {
            let (id, cfg) = commands::load_config(io.config.as_deref())?;
            let (rows, report) = commands::analytic(&id, &cfg, ap_model.into());
            eprint!("{}", commands::summary(&report));
            emit(io.out.as_deref(), &rows)?;
            if let Some(m) = commands::failure_message(&report) {
                return Err(CliError::Unstable(m).into());
            }
        }
        Cmd::Simulate { io, sim } => {
            let (id, cfg) = commands::load_config(io.config.as_deref())?;
            let rows = commands::simulate(&id, &cfg, &sim.settings()?)?;
            emit(io.out.as_deref(), &rows)?;
        }
        Cmd::Sweep { io, sim, param, grid, mode } => {
            let (id, cfg) = commands::load_config(io.config.as_deref())?;
            let grid = parse_grid(&grid).map_err(CliError::Config)?;
            let spec = SweepSpec::new(&param, grid, mode, sim.settings()?)?;
            emit(io.out.as_deref(), &commands::sweep(&id, &cfg, &spec))?;
        }
        Cmd::Validate { io, sim, acceptance: true, criteria, .. } => {
            let ids: Vec<u8> = if criteria.is_empty() { (1..=10).collect() } else { criteria };
            let mut checks = Vec::new();
            let mut failed = 0;
            for id in ids {
                let rep = acceptance::run(id).ok_or_else(|| CliError::Config(format!("no criterion {id}")))?;
                eprint!("{rep}");
                println!("{}", rep.line());
                failed += usize::from(!rep.pass());
                checks.extend(rep.checks.iter().map(|c| (rep.id, c.clone())));
            }
            let _ = sim;
            if let Some(path) = io.out.as_deref() {
                let rows: Vec<_> = checks
                    .iter()
                    .map(|(id, c)| AcceptanceRow { criterion: *id, check: &c.label, pass: c.pass, detail: &c.detail })
                    .collect();
                emit_serialized(Some(path), &rows)?;
            }
            if failed > 0 {
                return Err(CliError::ValidationFailed { failed, total: checks.len() }.into());
            }
        }
        Cmd::Validate { io, sim, oracle_cycles, perturb_ect, .. } => {
            let (id, cfg) = commands::load_config(io.config.as_deref())?;
            let opts = ValidateOptions { sim: sim.settings()?, oracle_cycles, ect_scale: perturb_ect };
            let verdicts = validate(&cfg, &opts)?;
            for v in &verdicts {
                eprintln!("{v}");
            }
            let rows: Vec<VerdictRow> = verdicts.iter().map(|v| VerdictRow::new(&id, v)).collect();
            emit_serialized(io.out.as_deref(), &rows)?;
            let failed = verdicts.iter().filter(|v| !v.pass).count();
            if failed > 0 {
                return Err(CliError::ValidationFailed { failed, total: verdicts.len() }.into());
            }
        }
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct AcceptanceRow<'a> {
    criterion: u8,
    check: &'a str,
    pass: bool,
    detail: &'a str,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
