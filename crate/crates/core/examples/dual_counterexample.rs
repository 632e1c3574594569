//! The Forked Tree traces: dual NRMM keeps alternating between the two
//! wrong branches while the primal algorithms reach the expert.

use filter_lab::bench::format_trace;
use filter_lab::envs::EnvSpec;
use filter_lab::irl::{run, Algorithm, RunConfig};

fn main() -> filter_lab::error::Result<()> {
    let inst = EnvSpec::ForkedTree.build()?;
    for (algo, rounds) in [
        (Algorithm::NrmmBr, 4),
        (Algorithm::NrmmNr, 4),
        (Algorithm::NrmmDual, 6),
        (Algorithm::DualIrl, 3),
        (Algorithm::PrimalIrl, 3),
    ] {
        let mut cfg = RunConfig::for_algorithm(algo);
        cfg.rounds = rounds;
        println!("{}", format_trace(&run(&inst, &cfg, 0)?, &inst));
    }

    let mut cfg = RunConfig::for_algorithm(Algorithm::NrmmDual);
    cfg.rounds = 100;
    let t = run(&inst, &cfg, 0)?;
    let hits = t.iterates.iter().filter(|r| r.policy.member() == Some(0)).count();
    println!("dual NRMM over 100 rounds picks pi_E {hits} times");
    Ok(())
}
