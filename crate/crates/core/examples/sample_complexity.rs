//! Interactions-to-threshold on binary trees of growing depth: sampled dual
//! IRL (exploration oracle) against sampled MMDP (expert resets).
//!
//! ```text
//! cargo run --release --example sample_complexity -- [seeds] [max_depth]
//! ```

use filter_lab::bench::{growth_fits, run_sweep, GrowthModel, StopSpec, SweepSpec};
use filter_lab::envs::EnvSpec;
use filter_lab::irl::{Algorithm, EvalMode, RunConfig};

fn main() -> filter_lab::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let max_depth: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(6);

    let sampled = |a| RunConfig {
        eval: EvalMode::Sampled,
        ..RunConfig::for_algorithm(a)
    };
    let out = std::env::temp_dir().join(format!("filter-lab-sample-complexity-{}", std::process::id()));
    let spec = SweepSpec {
        envs: (2..=max_depth)
            .map(|horizon| EnvSpec::Tree { branching: 2, horizon })
            .collect(),
        algorithms: vec![sampled(Algorithm::DualIrl), sampled(Algorithm::Mmdp)],
        seeds: (0..seeds).collect(),
        stop: StopSpec {
            rounds: 50,
            eps_threshold: None,
            gap_threshold: Some(0.5),
        },
        threshold: 0.5,
        output_dir: out.clone(),
        workers: 0,
    };
    let outcomes = run_sweep(&spec)?;
    for (algo, fit) in growth_fits(&outcomes)? {
        println!("{}", algo.name());
        for (t, y) in fit.x.iter().zip(&fit.y) {
            println!("  T={t}  median interactions {y:>12.0}");
        }
        let shape = match fit.model {
            GrowthModel::Exponential { base } => format!("exponential, base {base:.2}"),
            GrowthModel::Polynomial { degree } => format!("polynomial, degree {degree:.2}"),
        };
        println!("  best fit: {shape} (r2 {:.3})", fit.fit_quality);
        println!("  successive ratios {:?}", fit.successive_ratios());
        println!("  log-log slope {:.2}", fit.loglog_slope());
    }
    let _ = std::fs::remove_dir_all(out);
    Ok(())
}
