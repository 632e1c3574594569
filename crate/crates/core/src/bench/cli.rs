//! The `filter-lab` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::HarnessConfig;
use super::golden::{golden_diffs, compute_tables, render_table, EXPECTED};
use super::report::{audit_row, emit_report};
use super::sweep::{cell_file_name, growth_fits, run_sweep, write_atomic};
use super::trace::format_trace;
use crate::error::{configuration, LabError, Result};
use crate::irl::{
    chain_variance_closed_form, chain_variance_ratio, run, Algorithm, RunTranscript,
};

#[derive(Debug, Parser)]
#[command(name = "filter-lab", about = "Moment-matching imitation learning laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set run.rounds=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set run.algorithm=NAME`.
    #[arg(long)]
    algorithm: Option<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<HarnessConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(a) = &self.algorithm {
            Algorithm::parse(a)?;
            overrides.push(format!("run.algorithm=\"{a}\""));
        }
        HarnessConfig::load(self.config.as_deref(), &overrides)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one (env, algorithm, seed) cell and store its transcript.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Seed; defaults to the first of `sweep.seeds`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the sweep grid and emit the CSV report.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Print the per-round (policy, reward) choices of one run.
    Trace {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare suffix and trajectory discriminator-estimator variance.
    Variance {
        #[arg(long, default_value_t = 10)]
        horizon: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recompute the Forked Tree payoff tables and diff them.
    Golden,
    /// Re-audit and replay stored transcripts.
    Validate {
        /// Transcript files or directories holding `*.json` transcripts.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                LabError::Configuration(_) => 2,
                _ => 1,
            }
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run { cfg, seed } => cmd_run(&cfg.load()?, seed),
        Command::Sweep { cfg } => cmd_sweep(&cfg.load()?),
        Command::Trace { cfg, seed } => {
            let h = cfg.load()?;
            let inst = h.env.build()?;
            let t = run(&inst, &h.run, seed)?;
            print!("{}", format_trace(&t, &inst));
            Ok(0)
        }
        Command::Variance {
            horizon,
            samples,
            seed,
        } => cmd_variance(horizon, samples, seed),
        Command::Golden => cmd_golden(),
        Command::Validate { paths } => cmd_validate(&paths),
    }
}

fn cmd_run(h: &HarnessConfig, seed: Option<u64>) -> Result<i32> {
    let seed = match seed {
        Some(s) => s,
        None => *h
            .sweep
            .seeds
            .first()
            .ok_or_else(|| configuration("sweep.seeds: empty seed list"))?,
    };
    let inst = h.env.build()?;
    let t = run(&inst, &h.run, seed)?;
    let path = h
        .output
        .dir
        .join("transcripts")
        .join(cell_file_name(t.algorithm, &t.env, seed));
    write_atomic(&path, t.to_json()?.as_bytes())?;
    let a = audit_row(&t)?;
    let r = t.returned();
    println!(
        "{} on {} seed {seed}: {} rounds, stop {:?}, {} interactions",
        t.algorithm.name(),
        t.env.label(),
        t.iterates.len(),
        t.stop_reason,
        t.total_interactions
    );
    println!(
        "returned round {}: gap {:.6}, validation gap {:.6}",
        r.round, r.gap, r.validation_gap
    );
    println!(
        "eps_bar {:.6} delta_bar {:.6} eps_rl {:.6}; audit {}",
        a.eps_bar,
        a.delta_bar,
        a.eps_rl_bar,
        if a.holds { "holds" } else { "VIOLATED" }
    );
    println!("transcript: {}", path.display());
    Ok(0)
}

fn cmd_sweep(h: &HarnessConfig) -> Result<i32> {
    let spec = h.sweep_spec()?;
    let outcomes = run_sweep(&spec)?;
    let reused = outcomes.iter().filter(|o| o.reused).count();
    println!("{} cells ({reused} reused)", outcomes.len());
    let transcripts: Vec<RunTranscript> = outcomes.iter().map(|o| o.transcript.clone()).collect();
    let files = emit_report(&transcripts, &spec.output_dir)?;
    println!("report: {}", files.summary.parent().unwrap_or(Path::new(".")).display());
    for (algo, fit) in growth_fits(&outcomes)? {
        println!(
            "{}: {:?} (exp r2 {:.3}, poly r2 {:.3}, ratios {:?})",
            algo.name(),
            fit.model,
            fit.exponential_r2,
            fit.polynomial_r2,
            fit.successive_ratios()
        );
    }
    Ok(0)
}

fn cmd_variance(horizon: usize, samples: usize, seed: u64) -> Result<i32> {
    for dependent in [false, true] {
        let (suffix, traj) = chain_variance_ratio(horizon, dependent, samples, seed)?;
        let (cs, ct) = chain_variance_closed_form(horizon, dependent);
        println!(
            "{:<9} suffix {suffix:.3} trajectory {traj:.3} ratio {:.4} (closed form {:.4})",
            if dependent { "dependent" } else { "iid" },
            suffix / traj,
            cs / ct
        );
    }
    Ok(0)
}

fn cmd_golden() -> Result<i32> {
    for ((name, _), table) in EXPECTED.iter().zip(compute_tables()?) {
        println!("{}", render_table(name, &table));
    }
    let diffs = golden_diffs()?;
    for d in &diffs {
        println!(
            "DIFF {} [{}][{}]: expected {} got {}",
            d.table, d.row, d.col, d.expected, d.actual
        );
    }
    println!("{} diffs", diffs.len());
    Ok(if diffs.is_empty() { 0 } else { 1 })
}

fn transcript_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Bound audit plus byte-identical replay of one stored transcript.
pub fn validate_transcript(text: &str) -> Result<(bool, bool)> {
    let t = RunTranscript::from_json(text)?;
    let audit = audit_row(&t)?;
    let replay = run(&t.env.build()?, &t.config, t.seed)?.to_json()?;
    Ok((audit.holds, replay == text))
}

fn cmd_validate(paths: &[PathBuf]) -> Result<i32> {
    let files = transcript_files(paths)?;
    if files.is_empty() {
        return Err(configuration("validate: no transcripts found"));
    }
    let mut failures = 0;
    for f in &files {
        let text = std::fs::read_to_string(f)?;
        let status = match validate_transcript(&text) {
            Ok((true, true)) => "ok".to_string(),
            Ok((audit, replay)) => {
                failures += 1;
                format!("FAIL (audit {audit}, replay {replay})")
            }
            Err(e) => {
                failures += 1;
                format!("FAIL ({e})")
            }
        };
        println!("{}: {status}", f.display());
    }
    println!("{} transcripts, {failures} failures", files.len());
    Ok(if failures == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        main_with_args(std::iter::once("filter-lab").chain(args.iter().copied()))
    }

    #[test]
    fn unknown_subcommand_fails() {
        assert_ne!(code(&["frobnicate"]), 0);
    }

    #[test]
    fn golden_passes() {
        assert_eq!(code(&["golden"]), 0);
    }

    #[test]
    fn empty_seed_list_is_a_config_error() {
        assert_eq!(code(&["run", "--set", "sweep.seeds=[]"]), 2);
    }

    #[test]
    fn malformed_key_is_a_config_error() {
        assert_eq!(code(&["trace", "--set", "run.roundz=3"]), 2);
        assert_eq!(code(&["trace", "--algorithm", "gail"]), 2);
    }

    #[test]
    fn validate_accepts_a_fresh_transcript() {
        let dir = tempfile::tempdir().unwrap();
        let inst = crate::envs::EnvSpec::ForkedTree.build().unwrap();
        let t = run(&inst, &crate::irl::RunConfig::default(), 4).unwrap();
        let path = dir.path().join("t.json");
        std::fs::write(&path, t.to_json().unwrap()).unwrap();
        assert_eq!(code(&["validate", dir.path().to_str().unwrap()]), 0);
        let mut tampered = t.clone();
        tampered.total_interactions += 1;
        std::fs::write(&path, tampered.to_json().unwrap()).unwrap();
        assert_eq!(code(&["validate", path.to_str().unwrap()]), 1);
    }
}
