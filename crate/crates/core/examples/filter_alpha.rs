//! FILTER with different expert-reset probabilities on a binary tree:
//! sampled runs, interactions until the returned gap reaches 0.5.

use filter_lab::envs::EnvSpec;
use filter_lab::irl::{run, Algorithm, EvalMode, RunConfig};

fn main() -> filter_lab::error::Result<()> {
    let inst = EnvSpec::Tree { branching: 2, horizon: 4 }.build()?;
    for alpha in [1.0, 0.5, 0.0] {
        let mut cfg = RunConfig::for_algorithm(Algorithm::Filter);
        cfg.eval = EvalMode::Sampled;
        cfg.rounds = 40;
        cfg.filter.alpha = alpha;
        cfg.gap_threshold = Some(0.5);
        let mut hits = Vec::new();
        for seed in 0..10 {
            let t = run(&inst, &cfg, seed)?;
            hits.push(t.interactions_to_gap(0.5));
        }
        let solved = hits.iter().flatten().count();
        let mean = hits.iter().flatten().sum::<u64>() as f64 / solved.max(1) as f64;
        println!("alpha {alpha:.1}: {solved}/10 seeds reach gap 0.5, mean interactions {mean:.0}");
    }
    Ok(())
}
