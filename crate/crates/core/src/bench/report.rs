//! CSV emission: per-run summary, bound audit and long-format per-round
//! metrics, plus a schema hash over the column sets.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::envs::{cliff_adversarial_policy, EnvSpec};
use crate::error::{configuration, Result};
use crate::game::SimplexWeights;
use crate::irl::{
    audit_transcript, expert_profile_for, stationary_errors, BoundAudit, Evaluator, RunErrors,
    RunTranscript, AUDIT_TOL,
};
use crate::mdp::PolicySequence;

pub const SUMMARY_COLUMNS: [&str; 9] = [
    "algorithm",
    "env",
    "seed",
    "rounds",
    "stop_reason",
    "total_interactions",
    "returned_round",
    "returned_gap",
    "returned_validation_gap",
];

pub const AUDIT_COLUMNS: [&str; 14] = [
    "algorithm",
    "env",
    "seed",
    "eps_bar",
    "delta_bar",
    "eps_rl_bar",
    "gap",
    "eps_bound",
    "mixed_bound",
    "rl_bound",
    "min_bound",
    "ratio",
    "checks",
    "holds",
];

pub const METRICS_COLUMNS: [&str; 11] = [
    "algorithm",
    "env",
    "seed",
    "round",
    "timestep",
    "env_interactions",
    "eps_i",
    "delta_i",
    "validation_gap",
    "gap",
    "alpha",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub env: String,
    pub seed: u64,
    pub rounds: usize,
    pub stop_reason: String,
    pub total_interactions: u64,
    pub returned_round: usize,
    pub returned_gap: f64,
    pub returned_validation_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub algorithm: String,
    pub env: String,
    pub seed: u64,
    pub eps_bar: f64,
    pub delta_bar: f64,
    pub eps_rl_bar: f64,
    /// Output gap for sequences, mixture gap for stationary runs.
    pub gap: f64,
    pub eps_bound: f64,
    pub mixed_bound: f64,
    pub rl_bound: f64,
    pub min_bound: f64,
    /// `gap / eps_bound`.
    pub ratio: f64,
    /// Names of the audited inequalities, `;`-separated.
    pub checks: String,
    pub holds: bool,
}

impl AuditRow {
    fn from_errors(algorithm: &str, env: &str, seed: u64, e: &RunErrors, checks: String, holds: bool) -> Self {
        let eps_bound = e.eps_bound();
        Self {
            algorithm: algorithm.into(),
            env: env.into(),
            seed,
            eps_bar: e.eps_bar,
            delta_bar: e.delta_bar,
            eps_rl_bar: e.eps_rl_bar,
            gap: e.mixture_gap,
            eps_bound,
            mixed_bound: e.mixed_bound(),
            rl_bound: e.eps_rl_bar * e.horizon as f64,
            min_bound: e.min_bound(),
            ratio: if eps_bound == 0.0 { f64::NAN } else { e.mixture_gap / eps_bound },
            checks,
            holds,
        }
    }

    pub fn from_audit(transcript: &RunTranscript, audit: &BoundAudit) -> Self {
        let names: Vec<&str> = audit.checks.iter().map(|c| c.name.as_str()).collect();
        Self::from_errors(
            transcript.algorithm.name(),
            &transcript.env.label(),
            transcript.seed,
            &audit.errors,
            names.join(";"),
            audit.holds(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub algorithm: String,
    pub env: String,
    pub seed: u64,
    pub round: usize,
    pub timestep: Option<usize>,
    pub env_interactions: u64,
    pub eps_i: f64,
    pub delta_i: f64,
    pub validation_gap: f64,
    pub gap: f64,
    pub alpha: f64,
}

pub fn summary_row(t: &RunTranscript) -> SummaryRow {
    let r = t.returned();
    SummaryRow {
        algorithm: t.algorithm.name().into(),
        env: t.env.label(),
        seed: t.seed,
        rounds: t.iterates.len(),
        stop_reason: format!("{:?}", t.stop_reason).to_lowercase(),
        total_interactions: t.total_interactions,
        returned_round: r.round,
        returned_gap: r.gap,
        returned_validation_gap: r.validation_gap,
    }
}

pub fn metrics_rows(t: &RunTranscript) -> Vec<MetricsRow> {
    let env = t.env.label();
    t.iterates
        .iter()
        .map(|r| MetricsRow {
            algorithm: t.algorithm.name().into(),
            env: env.clone(),
            seed: t.seed,
            round: r.round,
            timestep: r.timestep,
            env_interactions: r.env_interactions,
            eps_i: r.learner_loss,
            delta_i: r.adversary_loss,
            validation_gap: r.validation_gap,
            gap: r.gap,
            alpha: r.alpha,
        })
        .collect()
}

/// Re-derives the bound audit of a transcript from its environment.
pub fn audit_row(t: &RunTranscript) -> Result<AuditRow> {
    let inst = t.env.build()?;
    let profile = expert_profile_for(&inst, &t.config, t.seed)?;
    let audit = audit_transcript(t, &inst, &profile)?;
    Ok(AuditRow::from_audit(t, &audit))
}

/// Audit row of the Cliff adversarial policy played for `rounds` rounds
/// against the first reward, with per-step error `eps`.
pub fn cliff_witness_row(horizon: usize, eps: f64, rounds: usize) -> Result<AuditRow> {
    let inst = EnvSpec::Cliff { horizon }.build()?;
    let rho = inst.expert_profile()?;
    let ev = Evaluator::new(&inst.mdp, &rho, &inst.reward_class, &inst.policy_class)?;
    let pi = PolicySequence::repeat(&cliff_adversarial_policy(horizon, eps)?, horizon);
    let plays = vec![(pi, SimplexWeights::point(inst.reward_class.len(), 0)); rounds.max(1)];
    let e = stationary_errors(&ev, &inst.expert, &plays)?;
    let holds = e.mixture_gap <= e.eps_bound() + AUDIT_TOL && e.mixture_gap <= e.min_bound() + AUDIT_TOL;
    Ok(AuditRow::from_errors(
        "cliff-witness",
        &inst.spec.label(),
        0,
        &e,
        "mix-gap<=eps*T^2;mix-gap<=min-bound".into(),
        holds,
    ))
}

fn write_csv<R: Serialize>(path: &Path, columns: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(columns)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// SHA-256 over `file: col,col,...` lines of every emitted table.
pub fn schema_hash() -> String {
    let mut h = Sha256::new();
    for (file, cols) in [
        ("summary.csv", &SUMMARY_COLUMNS[..]),
        ("audit.csv", &AUDIT_COLUMNS[..]),
        ("metrics.csv", &METRICS_COLUMNS[..]),
    ] {
        h.update(format!("{file}: {}\n", cols.join(",")));
    }
    hex::encode(h.finalize())
}

/// Paths written by [`emit_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub audit: PathBuf,
    pub metrics: PathBuf,
    pub schema: PathBuf,
}

/// Writes `summary.csv`, `audit.csv`, `metrics.csv` and `schema.sha256`
/// into `dir`. Audit rows are extended by `extra_audit` (witness rows).
pub fn emit_report_with(
    transcripts: &[RunTranscript],
    extra_audit: &[AuditRow],
    dir: &Path,
) -> Result<ReportFiles> {
    if transcripts.is_empty() {
        return Err(configuration("report: no transcripts"));
    }
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        summary: dir.join("summary.csv"),
        audit: dir.join("audit.csv"),
        metrics: dir.join("metrics.csv"),
        schema: dir.join("schema.sha256"),
    };
    let summary: Vec<_> = transcripts.iter().map(summary_row).collect();
    let mut audit = transcripts.iter().map(audit_row).collect::<Result<Vec<_>>>()?;
    audit.extend_from_slice(extra_audit);
    let metrics: Vec<_> = transcripts.iter().flat_map(metrics_rows).collect();
    write_csv(&files.summary, &SUMMARY_COLUMNS, &summary)?;
    write_csv(&files.audit, &AUDIT_COLUMNS, &audit)?;
    write_csv(&files.metrics, &METRICS_COLUMNS, &metrics)?;
    std::fs::write(&files.schema, format!("{}\n", schema_hash()))?;
    Ok(files)
}

pub fn emit_report(transcripts: &[RunTranscript], dir: &Path) -> Result<ReportFiles> {
    emit_report_with(transcripts, &[], dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irl::{run, Algorithm, RunConfig};

    fn count_rows(path: &Path) -> usize {
        csv::Reader::from_path(path).unwrap().records().count()
    }

    fn header(path: &Path) -> Vec<String> {
        let mut r = csv::Reader::from_path(path).unwrap();
        r.headers().unwrap().iter().map(String::from).collect()
    }

    #[test]
    fn single_transcript_gives_one_summary_row() {
        let dir = tempfile::tempdir().unwrap();
        let inst = EnvSpec::ForkedTree.build().unwrap();
        let mut cfg = RunConfig::for_algorithm(Algorithm::NrmmBr);
        cfg.rounds = 6;
        let t = run(&inst, &cfg, 3).unwrap();
        let files = emit_report(&[t.clone()], dir.path()).unwrap();
        assert_eq!(count_rows(&files.summary), 1);
        let mut r = csv::Reader::from_path(&files.summary).unwrap();
        let row = r.records().next().unwrap().unwrap();
        assert_eq!(row[3].parse::<usize>().unwrap(), t.iterates.len());
    }

    #[test]
    fn metrics_rows_sum_rounds() {
        let dir = tempfile::tempdir().unwrap();
        let mut ts = Vec::new();
        for (env, algo, rounds) in [
            (EnvSpec::ForkedTree, Algorithm::NrmmNr, 5),
            (EnvSpec::Cliff { horizon: 4 }, Algorithm::Mmdp, 1),
            (EnvSpec::Cliff { horizon: 4 }, Algorithm::DualIrl, 7),
        ] {
            let mut cfg = RunConfig::for_algorithm(algo);
            cfg.rounds = rounds;
            ts.push(run(&env.build().unwrap(), &cfg, 0).unwrap());
        }
        let files = emit_report(&ts, dir.path()).unwrap();
        let expected: usize = ts.iter().map(|t| t.iterates.len()).sum();
        assert_eq!(count_rows(&files.metrics), expected);
        assert_eq!(count_rows(&files.audit), 3);
    }

    #[test]
    fn headers_match_schema_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let inst = EnvSpec::ForkedTree.build().unwrap();
        let t = run(&inst, &RunConfig::for_algorithm(Algorithm::Mmdp), 0).unwrap();
        let files = emit_report(&[t], dir.path()).unwrap();
        assert_eq!(header(&files.summary), SUMMARY_COLUMNS);
        assert_eq!(header(&files.audit), AUDIT_COLUMNS);
        assert_eq!(header(&files.metrics), METRICS_COLUMNS);
        let hash = std::fs::read_to_string(&files.schema).unwrap();
        assert_eq!(hash.trim(), schema_hash());
        assert_eq!(schema_hash().len(), 64);
    }

    #[test]
    fn cliff_witness_ratio_is_one() {
        for horizon in [4, 8, 16] {
            let row = cliff_witness_row(horizon, 1.0 / (2.0 * horizon as f64), 5).unwrap();
            assert!((row.ratio - 1.0).abs() < 1e-6, "{row:?}");
            assert!(row.holds);
        }
    }

    #[test]
    fn empty_input_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_report(&[], dir.path()).is_err());
    }
}
