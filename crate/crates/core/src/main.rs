//! Command-line front end: discount-grid sweeps to CSV, figure-data
//! reproduction, the verification report, and repeated-game simulation.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use credible_promises::dynamics::{simulate_history, DeviationPolicy};
use credible_promises::equilibrium::{d_star_numeric, DiscountFactor, Variant};
use credible_promises::error::Error;
use credible_promises::payoffs::ClosedFormSource;
use credible_promises::report::verify_consistency;
use credible_promises::stage_game::{Reach, Reputation, Side};
use credible_promises::sweep::{emit_figures, run_sweep, write_file, SweepSpec};

#[derive(Parser)]
#[command(name = "credible-promises", version, about = "Repeated elections with credible campaign promises: sweeps, figure data, verification, simulation")]
struct Cli {
    /// Flat key=value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve d*(δ) on a discount grid and write one CSV row per point.
    Sweep {
        /// Variant: benchmark, nonnaive-g, nonnaive-b, limited (repeatable;
        /// default: all of them).
        #[arg(long)]
        variant: Vec<String>,
        /// Punishment scheme labels for the limited variant (repeatable;
        /// default: 1 2 3).
        #[arg(long)]
        k: Vec<u32>,
        #[arg(long)]
        delta_from: Option<f64>,
        #[arg(long)]
        delta_to: Option<f64>,
        #[arg(long)]
        steps: Option<u32>,
        /// Closed-form source: printed or faithful (repeatable; default printed).
        #[arg(long)]
        source: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write figure1.csv (variant comparison) and figure2.csv (limited
    /// punishment schemes) into a directory.
    Figures {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adjudicate the written-down formulas against the numeric oracles.
    Verify {
        /// Replace every check's default tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a repeated-game history and print it as CSV.
    Simulate {
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        delta: Option<f64>,
        /// Promise distance; defaults to the variant's numeric d*(δ).
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// never, always, or oneshot:<period>.
        #[arg(long)]
        policy_l: Option<String>,
        #[arg(long)]
        policy_r: Option<String>,
        #[arg(long)]
        source: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|source| {
                CliError::Io(Error::Io {
                    path: path.display().to_string(),
                    source,
                })
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Args(format!(
                        "{}:{}: expected key=value, got {line:?}",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Config(map))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::Args(format!("config key {key}: cannot parse {raw:?}"))
            }),
        }
    }

    /// Comma- or whitespace-separated list value.
    fn list(&self, key: &str) -> Vec<String> {
        self.0
            .get(key)
            .map(|raw| {
                raw.split([',', ' '])
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default()
    }
}

enum CliError {
    Args(String),
    Io(Error),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(msg) => CliError::Args(msg),
            io @ Error::Io { .. } => CliError::Io(io),
            Error::Convergence(msg) => CliError::Failed(msg),
        }
    }
}

fn parse_variants(names: &[String], ks: &[u32]) -> Result<Vec<Variant>, CliError> {
    let ks: Vec<u32> = if ks.is_empty() { vec![1, 2, 3] } else { ks.to_vec() };
    let names: Vec<String> = if names.is_empty() {
        ["benchmark", "nonnaive-g", "nonnaive-b", "limited"]
            .map(str::to_string)
            .to_vec()
    } else {
        names.to_vec()
    };
    let mut out = Vec::new();
    for name in &names {
        match name.as_str() {
            "benchmark" => out.push(Variant::Benchmark),
            "nonnaive-g" => out.push(Variant::NonNaiveG),
            "nonnaive-b" => out.push(Variant::NonNaiveB),
            "limited" => {
                for &k in &ks {
                    out.push(Variant::limited(k)?);
                }
            }
            other => {
                return Err(CliError::Args(format!(
                    "unknown variant {other:?}; expected benchmark, nonnaive-g, nonnaive-b, or limited"
                )))
            }
        }
    }
    Ok(out)
}

fn parse_sources(names: &[String]) -> Result<Vec<ClosedFormSource>, CliError> {
    if names.is_empty() {
        return Ok(vec![ClosedFormSource::AsPrinted]);
    }
    names
        .iter()
        .map(|name| match name.as_str() {
            "printed" => Ok(ClosedFormSource::AsPrinted),
            "faithful" => Ok(ClosedFormSource::IntegrandFaithful),
            other => Err(CliError::Args(format!(
                "unknown source {other:?}; expected printed or faithful"
            ))),
        })
        .collect()
}

fn parse_policy(raw: Option<&str>) -> Result<DeviationPolicy, CliError> {
    match raw.unwrap_or("never") {
        "never" => Ok(DeviationPolicy::Never),
        "always" => Ok(DeviationPolicy::Always),
        other => match other.strip_prefix("oneshot:").and_then(|t| t.parse().ok()) {
            Some(t) => Ok(DeviationPolicy::OneShotAtPeriod(t)),
            None => Err(CliError::Args(format!(
                "unknown policy {other:?}; expected never, always, or oneshot:<period>"
            ))),
        },
    }
}

fn merge<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn merge_list(flag: &[String], file: Vec<String>) -> Vec<String> {
    if flag.is_empty() {
        file
    } else {
        flag.to_vec()
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Sweep {
            variant,
            k,
            delta_from,
            delta_to,
            steps,
            source,
            out,
        } => {
            let ks: Vec<u32> = if k.is_empty() {
                cfg.list("k")
                    .iter()
                    .map(|s| {
                        s.parse()
                            .map_err(|_| CliError::Args(format!("config key k: cannot parse {s:?}")))
                    })
                    .collect::<Result<_, _>>()?
            } else {
                k
            };
            let spec = SweepSpec {
                variants: parse_variants(&merge_list(&variant, cfg.list("variant")), &ks)?,
                sources: parse_sources(&merge_list(&source, cfg.list("source")))?,
                delta_from: merge(delta_from, cfg.parsed("delta-from")?, 0.5),
                delta_to: merge(delta_to, cfg.parsed("delta-to")?, 0.99),
                steps: merge(steps, cfg.parsed("steps")?, 50),
            };
            let out = merge(out, cfg.parsed("out")?, PathBuf::from("sweep.csv"));
            run_sweep(&spec, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Figures { out } => {
            let dir = merge(out, cfg.parsed("out")?, PathBuf::from("."));
            emit_figures(&dir)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { tol, out } => {
            let tol = match tol.or(cfg.parsed("tol")?) {
                Some(t) if t > 0.0 => Some(t),
                Some(t) => {
                    return Err(CliError::Args(format!("tolerance must be positive, got {t}")))
                }
                None => None,
            };
            let report = verify_consistency(tol);
            let text = report.render();
            match out.or(cfg.parsed("out")?) {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Simulate {
            variant,
            k,
            delta,
            d,
            horizon,
            seed,
            policy_l,
            policy_r,
            source,
            out,
        } => {
            let mut names =
                merge_list(&variant.map(|v| vec![v]).unwrap_or_default(), cfg.list("variant"));
            if names.is_empty() {
                names.push("benchmark".to_string());
            }
            let ks = match k.or(cfg.parsed("k")?) {
                Some(k) => vec![k],
                None => vec![],
            };
            let variants = parse_variants(&names, &ks)?;
            if variants.len() != 1 {
                return Err(CliError::Args(
                    "simulate needs exactly one variant".to_string(),
                ));
            }
            let variant = variants[0];
            let sources = parse_sources(&merge_list(&source, cfg.list("source")))?;
            let delta = DiscountFactor::new(merge(delta, cfg.parsed("delta")?, 0.7))?;
            let d = match d.or(cfg.parsed("d")?) {
                Some(d) => Reach::new(d)?,
                None => d_star_numeric(variant, delta, Some(sources[0]))?.d_star,
            };
            let horizon = merge(horizon, cfg.parsed("horizon")?, 50);
            let seed = merge(seed, cfg.parsed("seed")?, 0);
            let policy_l = parse_policy(
                policy_l.or(cfg.parsed("policy-l")?).as_deref(),
            )?;
            let policy_r = parse_policy(
                policy_r.or(cfg.parsed("policy-r")?).as_deref(),
            )?;

            let traj = simulate_history(
                variant.regime(),
                delta,
                d,
                horizon,
                seed,
                policy_l,
                policy_r,
                (Reputation::Good, Reputation::Good),
            )?;
            let mut text = String::from(
                "period,x_l,x_r,rep_l,rep_r,winner,implemented,utility_l,utility_r,reneged,region\n",
            );
            for p in &traj.periods {
                text.push_str(&format!(
                    "{},{:.10},{:.10},{},{},{},{:.10},{:.10},{:.10},{},{}\n",
                    p.period,
                    p.x_l,
                    p.x_r,
                    rep_label(p.rep_l),
                    rep_label(p.rep_r),
                    match p.winner {
                        Side::Left => "L",
                        Side::Right => "R",
                    },
                    p.implemented.value(),
                    p.utility_l,
                    p.utility_r,
                    p.reneged,
                    p.region,
                ));
            }
            match out.or(cfg.parsed("out")?) {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
            eprintln!(
                "discounted utilities: L {:.10}, R {:.10} (delta {:.4}, d {:.10})",
                traj.discounted_l,
                traj.discounted_r,
                delta.get(),
                d.get()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn rep_label(rep: Reputation) -> String {
    match rep {
        Reputation::Good => "good".to_string(),
        Reputation::BadForever => "bad".to_string(),
        Reputation::BadFor(n) => format!("bad{}", n.get()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Args(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
