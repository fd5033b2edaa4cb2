//! Argument parsing. Every configuration key is also a global `--<key>` flag.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Arg, ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use otto_core::Observable;

use crate::commands::{self, Horizon, JointArgs, PdfArgs, Quantity, Range, Status, SweepSpec, ValidateArgs};
use crate::config::{Config, KEYS};
use crate::error::{CliError, CliResult};
use crate::output::Output;

#[derive(Debug, Parser)]
#[command(name = "otto", version, about = "Work and heat statistics of a monitored two-level Otto engine")]
pub struct Cli {
    /// TOML configuration; missing keys take the reference defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    Work,
    Heat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    Power,
    Efficiency,
    Lambda2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Marginal work or heat density on a grid.
    Pdf {
        #[arg(long, value_enum, default_value = "work")]
        observable: ObservableArg,
        #[arg(long, allow_negative_numbers = true)]
        min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        max: Option<f64>,
        #[arg(long, default_value_t = 1024)]
        points: usize,
        /// Raw mixture components (JSON) instead of a density grid.
        #[arg(long)]
        components: bool,
    },
    /// Joint work-heat density from the path sum (at most two cycles).
    Joint {
        #[arg(long, allow_negative_numbers = true)]
        work_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        work_max: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        heat_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        heat_max: Option<f64>,
        /// Points per axis.
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        components: bool,
    },
    /// Means, variances, efficiency, reliability and power.
    Moments,
    /// Grid over work- and heat-stroke durations.
    Sweep {
        #[arg(long, default_value_t = 0.5)]
        t1_min: f64,
        #[arg(long, default_value_t = 10.0)]
        t1_max: f64,
        #[arg(long, default_value_t = 20)]
        t1_count: usize,
        #[arg(long, default_value_t = 1.0)]
        t2_min: f64,
        #[arg(long, default_value_t = 40.0)]
        t2_max: f64,
        #[arg(long, default_value_t = 20)]
        t2_count: usize,
        #[arg(long, value_enum, default_value = "power")]
        quantity: QuantityArg,
        /// `asymptotic`, or a cycle count.
        #[arg(long, default_value = "asymptotic", value_parser = parse_horizon)]
        horizon: Horizon,
    },
    /// Periodic-state work, heat and convergence rate.
    Asymptotic,
    /// Transition probability and phase for the configured `t1`.
    Lz,
    /// Consistency checks at the configured point; exits 1 on failure.
    Validate {
        #[arg(long, hide = true)]
        corrupt_suppression: Option<f64>,
    },
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn parse_horizon(s: &str) -> Result<Horizon, String> {
    match s {
        "asymptotic" => Ok(Horizon::Asymptotic),
        n => match n.parse::<usize>() {
            Ok(c) if c >= 1 => Ok(Horizon::Cycles(c)),
            _ => Err(format!("expected `asymptotic` or a positive cycle count, got `{s}`")),
        },
    }
}

fn command() -> clap::Command {
    let keys = KEYS.iter().map(|(key, section, _)| {
        Arg::new(*key)
            .long(*key)
            .global(true)
            .value_name("VALUE")
            .allow_negative_numbers(true)
            .help_heading("Configuration overrides")
            .help(format!("Override `{key}` in [{section}]"))
    });
    Cli::command().args(keys)
}

fn overrides(matches: &ArgMatches) -> Vec<(&'static str, String)> {
    let mut found: Vec<(&'static str, String)> = Vec::new();
    let mut level = Some(matches);
    while let Some(m) = level {
        for (key, _, _) in KEYS {
            if let Ok(Some(v)) = m.try_get_one::<String>(key) {
                if !found.iter().any(|(k, _)| k == key) {
                    found.push((key, v.clone()));
                }
            }
        }
        level = m.subcommand().map(|(_, sub)| sub);
    }
    found
}

/// Parses `args`, runs the command and writes its output.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(out, "{}", e.render())?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.render().to_string())),
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Config(e.to_string()))?;
    let base = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let flags = overrides(&matches);
    let config = base.with_overrides(flags.iter().map(|(k, v)| (*k, v.as_str())))?;

    let mut failures = 0;
    let output = match &cli.command {
        Command::ShowConfig => {
            let text = config.to_toml()?;
            return emit(&cli, out, |w| Ok(write!(w, "{text}")?));
        }
        Command::Lz => commands::lz(&config, None)?,
        Command::Sweep { t1_min, t1_max, t1_count, t2_min, t2_max, t2_count, quantity, horizon } => {
            let spec = SweepSpec {
                t1: Range { min: *t1_min, max: *t1_max, count: *t1_count },
                t2: Range { min: *t2_min, max: *t2_max, count: *t2_count },
                quantity: match quantity {
                    QuantityArg::Power => Quantity::Power,
                    QuantityArg::Efficiency => Quantity::Efficiency,
                    QuantityArg::Lambda2 => Quantity::Lambda2,
                },
                horizon: *horizon,
            };
            commands::sweep(&config, &spec)?
        }
        other => {
            let built = config.build()?;
            match other {
                Command::Pdf { observable, min, max, points, components } => {
                    let observable = match observable {
                        ObservableArg::Work => Observable::Work,
                        ObservableArg::Heat => Observable::Heat,
                    };
                    let args = PdfArgs { observable, min: *min, max: *max, points: *points, components: *components };
                    commands::pdf(&built, &args)?
                }
                Command::Joint { work_min, work_max, heat_min, heat_max, points, components } => {
                    let args = JointArgs {
                        work: (*work_min, *work_max),
                        heat: (*heat_min, *heat_max),
                        points: *points,
                        components: *components,
                    };
                    commands::joint(&built, &args)?
                }
                Command::Moments => commands::moments(&built)?,
                Command::Asymptotic => commands::asymptotic(&built)?,
                Command::Validate { corrupt_suppression } => {
                    let checks = commands::validation_checks(&built, &ValidateArgs { corrupt_suppression: *corrupt_suppression })?;
                    failures = checks.iter().filter(|c| c.status == Status::Fail).count();
                    Output::Table(commands::checks_table(&checks))
                }
                Command::ShowConfig | Command::Lz | Command::Sweep { .. } => unreachable!("handled above"),
            }
        }
    };
    emit(&cli, out, |w| output.write(w, cli.json))?;
    if failures > 0 {
        return Err(CliError::ValidationFailed(failures));
    }
    Ok(())
}

fn emit(cli: &Cli, out: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match &cli.output {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => body(out),
    }
}
