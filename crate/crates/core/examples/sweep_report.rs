//! A small resumable sweep written to a temporary directory, followed by the
//! CSV report.

use filter_lab::bench::{emit_report_with, cliff_witness_row, run_sweep, StopSpec, SweepSpec};
use filter_lab::envs::EnvSpec;
use filter_lab::irl::{Algorithm, RunConfig};

fn main() -> filter_lab::error::Result<()> {
    let dir = std::env::temp_dir().join("filter-lab-sweep-report");
    let spec = SweepSpec {
        envs: vec![EnvSpec::ForkedTree, EnvSpec::Cliff { horizon: 4 }],
        algorithms: [Algorithm::NrmmBr, Algorithm::NrmmNr, Algorithm::Mmdp]
            .map(RunConfig::for_algorithm)
            .to_vec(),
        seeds: vec![0, 1, 2],
        stop: StopSpec {
            rounds: 10,
            eps_threshold: None,
            gap_threshold: None,
        },
        threshold: 0.5,
        output_dir: dir.clone(),
        workers: 2,
    };
    let outcomes = run_sweep(&spec)?;
    let reused = outcomes.iter().filter(|o| o.reused).count();
    println!("{} cells, {reused} reused from an earlier run", outcomes.len());
    let transcripts: Vec<_> = outcomes.into_iter().map(|o| o.transcript).collect();
    let files = emit_report_with(&transcripts, &[cliff_witness_row(4, 0.125, 1)?], &dir)?;
    println!("{}", std::fs::read_to_string(&files.audit)?);
    println!("report in {}", dir.display());
    Ok(())
}
