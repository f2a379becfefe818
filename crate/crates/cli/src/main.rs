#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use settings::{Key, Settings};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "tailrisk", version, about = "Market data cleaning, Data Models and stressed VAR/ES")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fill, detect and repair a series or panel; writes the cleaned CSV and a change log.
    Clean {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        clean: CleanArgs,
    },
    /// Stressed VAR and ES per window, maturity and Data Model, with the capital charge.
    Var {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        risk: RiskArgs,
        #[command(flatten)]
        clean: CleanArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        stress_window: Option<String>,
        #[arg(long)]
        window_id: Option<String>,
        #[arg(long)]
        as_of: Option<String>,
        /// `sum` or `two-max`.
        #[arg(long)]
        capital_mode: Option<String>,
        /// `auto`, `single-curve` or `multi-curve`.
        #[arg(long)]
        regime: Option<String>,
        /// Swap maturities in years, comma separated.
        #[arg(long)]
        maturities: Option<String>,
        /// `payer` or `receiver`.
        #[arg(long)]
        direction: Option<String>,
    },
    /// Bucketed move SDs against level and a polynomial level-function fit.
    AnalyzeLevel {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        column: Option<String>,
        #[arg(long = "holding", alias = "holding-days")]
        holding_days: Option<String>,
        #[arg(long)]
        bucket_bp: Option<String>,
        #[arg(long)]
        min_count: Option<String>,
        #[arg(long)]
        degree: Option<String>,
        /// `flat` or `poly`.
        #[arg(long)]
        extrapolate: Option<String>,
        /// `relative` or `absolute`.
        #[arg(long)]
        target: Option<String>,
        /// `unweighted` or `count`.
        #[arg(long)]
        weighting: Option<String>,
        #[arg(long)]
        boundary: Option<String>,
        #[arg(long)]
        max_level: Option<String>,
    },
    /// VAR/ES lookup table over Data Models, tenors and level buckets.
    Lookup {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        risk: RiskArgs,
        #[command(flatten)]
        clean: CleanArgs,
        #[arg(long)]
        models: Option<String>,
        #[arg(long)]
        level_fn: Option<String>,
        #[arg(long)]
        stress_window: Option<String>,
        #[arg(long)]
        window_id: Option<String>,
        #[arg(long)]
        bucket_bp: Option<String>,
        /// Level range `LO:HI` covered by the buckets.
        #[arg(long)]
        levels: Option<String>,
        /// Column ids, comma separated; all curve columns by default.
        #[arg(long)]
        tenors: Option<String>,
    },
    /// Availability and gap statistics of a name × date panel.
    Gapscan {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        as_of: Option<String>,
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        span: Option<String>,
        #[arg(long)]
        percentiles: Option<String>,
    },
    /// Rolling VAR and ES change caused by cleaning each window.
    Sensitivity {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        risk: RiskArgs,
        #[command(flatten)]
        clean: CleanArgs,
        #[arg(long)]
        column: Option<String>,
    },
}

#[derive(Args)]
struct IoArgs {
    /// Input CSV: `date,value` series or `date,<instrument-id>...` panel.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// `key = value` settings file; flags override it.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// `parallel` or `sequential`.
    #[arg(long)]
    exec: Option<String>,
}

#[derive(Args)]
struct RiskArgs {
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long = "holding", alias = "holding-days")]
    holding_days: Option<String>,
    #[arg(long = "window", alias = "window-days")]
    window_days: Option<String>,
}

#[derive(Args)]
struct CleanArgs {
    /// Seed for the Monte-Carlo detection threshold; required.
    #[arg(long)]
    seed: Option<String>,
    /// Also run the spike cleaner.
    #[arg(long)]
    spikes: bool,
    #[arg(long)]
    trim_fraction: Option<String>,
    #[arg(long)]
    mc_trials: Option<String>,
    #[arg(long)]
    threshold_sds: Option<String>,
    #[arg(long)]
    max_time_gap_days: Option<String>,
    #[arg(long)]
    spike_max_width_days: Option<String>,
    #[arg(long)]
    spike_return_tolerance: Option<String>,
}

#[derive(Args)]
struct ModelArgs {
    /// Data Models, comma separated: `absolute`, `relative`, `level-relative`.
    #[arg(long)]
    model: Option<String>,
    /// Level function: inline `a,b,c` or a JSON file.
    #[arg(long)]
    level_fn: Option<String>,
}

const IO_KEYS: [Key; 3] = [("input", None), ("out", None), ("exec", Some("parallel"))];
const RISK_KEYS: [Key; 4] =
    [("alpha", Some("0.99")), ("beta", Some("0.975")), ("holding_days", Some("10")), ("window_days", Some("260"))];
pub const CLEAN_KEYS: [Key; 8] = [
    ("seed", None),
    ("spikes", Some("false")),
    ("trim_fraction", Some("0.03")),
    ("mc_trials", Some("256")),
    ("threshold_sds", Some("5")),
    ("max_time_gap_days", Some("2")),
    ("spike_max_width_days", Some("5")),
    ("spike_return_tolerance", Some("0.1")),
];

fn put(s: &mut Settings, key: &'static str, v: &Option<String>) {
    if let Some(v) = v {
        s.set(key, v.clone());
    }
}

impl IoArgs {
    fn apply(&self, s: &mut Settings) -> Result<(), CliError> {
        if let Some(path) = &self.config {
            s.merge_file(&output::read_text(path)?)?;
        }
        put(s, "input", &self.input.as_ref().map(|p| p.display().to_string()));
        put(s, "out", &self.out.as_ref().map(|p| p.display().to_string()));
        put(s, "exec", &self.exec);
        Ok(())
    }
}

impl RiskArgs {
    fn apply(&self, s: &mut Settings) {
        put(s, "alpha", &self.alpha);
        put(s, "beta", &self.beta);
        put(s, "holding_days", &self.holding_days);
        put(s, "window_days", &self.window_days);
    }
}

impl CleanArgs {
    fn apply(&self, s: &mut Settings) {
        put(s, "seed", &self.seed);
        if self.spikes {
            s.set("spikes", "true".into());
        }
        put(s, "trim_fraction", &self.trim_fraction);
        put(s, "mc_trials", &self.mc_trials);
        put(s, "threshold_sds", &self.threshold_sds);
        put(s, "max_time_gap_days", &self.max_time_gap_days);
        put(s, "spike_max_width_days", &self.spike_max_width_days);
        put(s, "spike_return_tolerance", &self.spike_return_tolerance);
    }
}

fn keys(groups: &[&[Key]], extra: &[Key]) -> Vec<Key> {
    let mut out: Vec<Key> = Vec::new();
    for (k, d) in groups.iter().flat_map(|g| g.iter()).chain(extra) {
        // later groups override earlier defaults
        out.retain(|(o, _)| o != k);
        out.push((k, *d));
    }
    out
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Clean { io, clean } => {
            let mut s = Settings::new(keys(&[&IO_KEYS, &CLEAN_KEYS], &[]));
            io.apply(&mut s)?;
            clean.apply(&mut s);
            commands::clean(&s)
        }
        Command::Var {
            io,
            risk,
            clean,
            model,
            stress_window,
            window_id,
            as_of,
            capital_mode,
            regime,
            maturities,
            direction,
        } => {
            let extra = [
                ("model", Some("relative")),
                ("level_fn", None),
                ("stress_window", None),
                ("window_id", Some("stress")),
                ("as_of", None),
                ("capital_mode", Some("two-max")),
                ("regime", Some("auto")),
                ("maturities", Some("2,5,10")),
                ("direction", Some("payer")),
            ];
            let mut s = Settings::new(keys(&[&IO_KEYS, &RISK_KEYS, &CLEAN_KEYS], &extra));
            io.apply(&mut s)?;
            risk.apply(&mut s);
            clean.apply(&mut s);
            put(&mut s, "model", &model.model);
            put(&mut s, "level_fn", &model.level_fn);
            put(&mut s, "stress_window", &stress_window);
            put(&mut s, "window_id", &window_id);
            put(&mut s, "as_of", &as_of);
            put(&mut s, "capital_mode", &capital_mode);
            put(&mut s, "regime", &regime);
            put(&mut s, "maturities", &maturities);
            put(&mut s, "direction", &direction);
            commands::var(&s)
        }
        Command::AnalyzeLevel {
            io,
            column,
            holding_days,
            bucket_bp,
            min_count,
            degree,
            extrapolate,
            target,
            weighting,
            boundary,
            max_level,
        } => {
            let extra = [
                ("column", None),
                ("holding_days", Some("10")),
                ("bucket_bp", Some("25")),
                ("min_count", Some("20")),
                ("degree", Some("2")),
                ("extrapolate", Some("flat")),
                ("target", Some("relative")),
                ("weighting", Some("unweighted")),
                ("boundary", None),
                ("max_level", Some("0.2")),
            ];
            let mut s = Settings::new(keys(&[&IO_KEYS], &extra));
            io.apply(&mut s)?;
            put(&mut s, "column", &column);
            put(&mut s, "holding_days", &holding_days);
            put(&mut s, "bucket_bp", &bucket_bp);
            put(&mut s, "min_count", &min_count);
            put(&mut s, "degree", &degree);
            put(&mut s, "extrapolate", &extrapolate);
            put(&mut s, "target", &target);
            put(&mut s, "weighting", &weighting);
            put(&mut s, "boundary", &boundary);
            put(&mut s, "max_level", &max_level);
            commands::analyze_level(&s)
        }
        Command::Lookup { io, risk, clean, models, level_fn, stress_window, window_id, bucket_bp, levels, tenors } => {
            let extra = [
                ("models", Some("absolute,relative")),
                ("level_fn", None),
                ("stress_window", None),
                ("window_id", Some("stress")),
                ("bucket_bp", Some("25")),
                ("levels", Some("0:0.1")),
                ("tenors", None),
            ];
            let mut s = Settings::new(keys(&[&IO_KEYS, &RISK_KEYS, &CLEAN_KEYS], &extra));
            io.apply(&mut s)?;
            risk.apply(&mut s);
            clean.apply(&mut s);
            put(&mut s, "models", &models);
            put(&mut s, "level_fn", &level_fn);
            put(&mut s, "stress_window", &stress_window);
            put(&mut s, "window_id", &window_id);
            put(&mut s, "bucket_bp", &bucket_bp);
            put(&mut s, "levels", &levels);
            put(&mut s, "tenors", &tenors);
            commands::lookup(&s)
        }
        Command::Gapscan { io, as_of, window, k, span, percentiles } => {
            let extra = [("as_of", None), ("window", None), ("k", Some("3")), ("span", Some("10")), ("percentiles", Some("0.5,0.9"))];
            let mut s = Settings::new(keys(&[&IO_KEYS], &extra));
            io.apply(&mut s)?;
            put(&mut s, "as_of", &as_of);
            put(&mut s, "window", &window);
            put(&mut s, "k", &k);
            put(&mut s, "span", &span);
            put(&mut s, "percentiles", &percentiles);
            commands::gapscan(&s)
        }
        Command::Sensitivity { io, risk, clean, column } => {
            let mut s = Settings::new(keys(&[&IO_KEYS, &RISK_KEYS, &CLEAN_KEYS], &[("column", None)]));
            io.apply(&mut s)?;
            risk.apply(&mut s);
            clean.apply(&mut s);
            put(&mut s, "column", &column);
            commands::sensitivity(&s)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
