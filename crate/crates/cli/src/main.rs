//! `swarmsearch`: train, evaluate, sweep and replay decentralized search teams.
//!
//! Every configuration key is also a flag (`batch_size` becomes
//! `--batch-size`) and an environment variable (`SWARMSEARCH_BATCH_SIZE`).
//! Flags beat environment variables, which beat the `--config` file, which
//! beats the built-in defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand, ValueEnum};
use swarmsearch_core::baselines::SweepKind;
use swarmsearch_core::experiment::{self, moving_average, ExperimentError, RunConfig, KEYS, MOVING_AVERAGE_WINDOW};

#[derive(Debug, Parser)]
#[command(name = "swarmsearch", version, about = "Decentralized multi-drone search with per-agent actor-critic learners")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Train `runs` independent teams; writes metrics CSVs, checkpoints and an aggregate file.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a policy over `eval_episodes` episodes (`--episodes` is accepted
    /// as an alias here); writes a summary CSV.
    Eval {
        #[arg(long, value_enum)]
        policy: Policy,
        #[command(flatten)]
        common: Common,
    },
    /// Train and evaluate across team sizes or target counts; writes a sweep CSV.
    Sweep {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Team sizes for `--kind team-size` (default 2,3,4,5,6).
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Target counts for `--kind target-count` (default 2,3,4,5,6).
        #[arg(long, value_delimiter = ',')]
        counts: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Play one episode and write its trajectory to replay.csv.
    Replay {
        #[arg(long, value_enum, default_value = "learned")]
        policy: Policy,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Learned,
    Random,
    CollisionFree,
}

impl Policy {
    fn name(self) -> &'static str {
        match self {
            Policy::Learned => "learned",
            Policy::Random => "random",
            Policy::CollisionFree => "collision-free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    TeamSize,
    TargetCount,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: KeyFlags,
}

/// One optional flag per configuration key, collected as `(key, value)`.
#[derive(Debug, Clone, Default)]
struct KeyFlags(Vec<(String, String)>);

impl FromArgMatches for KeyFlags {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        Ok(Self(
            KEYS.iter()
                .filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
                .collect(),
        ))
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl Args for KeyFlags {
    fn augment_args(cmd: Command) -> Command {
        KEYS.iter().fold(cmd, |cmd, k| {
            cmd.arg(
                Arg::new(k.name)
                    .long(k.name.replace('_', "-"))
                    .value_name("VALUE")
                    .help(k.help)
                    .help_heading("Configuration"),
            )
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

fn resolve(common: &Common) -> Result<RunConfig, ExperimentError> {
    let cfg = RunConfig::resolve(common.config.as_deref(), std::env::vars(), &common.overrides.0)?;
    if cfg.threads > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    Ok(cfg)
}

fn sweep_values(kind: Kind, sizes: Vec<usize>, counts: Vec<usize>) -> Result<Vec<usize>, String> {
    let (given, other, flag) = match kind {
        Kind::TeamSize => (sizes, counts, "--counts"),
        Kind::TargetCount => (counts, sizes, "--sizes"),
    };
    if !other.is_empty() {
        return Err(format!("{flag} does not apply to this sweep kind"));
    }
    Ok(if given.is_empty() { (2..=6).collect() } else { given })
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Cmd::Train { common } => {
            let cfg = resolve(&common).map_err(|e| e.to_string())?;
            let mut history: Vec<f64> = Vec::new();
            let out = experiment::train(&cfg, |run, m| {
                if m.episode == 0 {
                    history.clear();
                }
                history.push(m.team_reward);
                if (m.episode + 1) % MOVING_AVERAGE_WINDOW == 0 {
                    let ma = moving_average(&history, MOVING_AVERAGE_WINDOW);
                    eprintln!("run {run} episode {}: moving average {:.1}", m.episode + 1, ma[m.episode]);
                }
            })
            .map_err(|e| e.to_string())?;
            std::fs::write(cfg.out_dir.join("config_used.txt"), cfg.to_config_text())
                .map_err(|e| format!("{}: {e}", cfg.out_dir.display()))?;
            for f in &out.metrics_files {
                println!("{}", f.display());
            }
            println!("{}", out.aggregate_file.display());
        }
        Cmd::Eval { policy, mut common } => {
            // For `eval`, `--episodes` counts evaluation episodes.
            for (key, _) in &mut common.overrides.0 {
                if key == "episodes" {
                    *key = "eval_episodes".to_string();
                }
            }
            let cfg = resolve(&common).map_err(|e| e.to_string())?;
            let kind = experiment::policy_from_name(policy.name(), &cfg).map_err(|e| e.to_string())?;
            let (s, path) = experiment::eval(&cfg, &kind).map_err(|e| e.to_string())?;
            println!(
                "{}: mean {:.2} std {:.2} detection {:.3} crash {:.3} -> {}",
                s.policy,
                s.mean_reward,
                s.std_reward,
                s.detection_rate,
                s.crash_rate,
                path.display()
            );
        }
        Cmd::Sweep {
            kind,
            sizes,
            counts,
            common,
        } => {
            let cfg = resolve(&common).map_err(|e| e.to_string())?;
            let values = sweep_values(kind, sizes, counts)?;
            let kind = match kind {
                Kind::TeamSize => SweepKind::TeamSize,
                Kind::TargetCount => SweepKind::TargetCount,
            };
            let (report, path) = experiment::sweep(&cfg, kind, &values).map_err(|e| e.to_string())?;
            for r in &report.rows {
                println!("{} {}: mean {:.2}", kind.label(), r.value, r.summary.mean_reward);
            }
            println!("fit: slope {:.3} r2 {:.3} -> {}", report.fit.slope, report.fit.r2, path.display());
        }
        Cmd::Replay { policy, common } => {
            let cfg = resolve(&common).map_err(|e| e.to_string())?;
            let kind = experiment::policy_from_name(policy.name(), &cfg).map_err(|e| e.to_string())?;
            let (log, path) = experiment::replay(&cfg, &kind).map_err(|e| e.to_string())?;
            println!("{} steps -> {}", log.records.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
