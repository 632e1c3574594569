//! Imitation on a seeded gridworld, with every run audited against its
//! error bound.

use filter_lab::envs::EnvSpec;
use filter_lab::irl::{audit_transcript, run, Algorithm, RunConfig};

fn main() -> filter_lab::error::Result<()> {
    let spec = EnvSpec::RandomGrid {
        width: 4,
        height: 3,
        horizon: 5,
        slip: 0.1,
        seed: 11,
    };
    let inst = spec.build()?;
    let profile = inst.expert_profile()?;
    println!("{}: {} states, {} policies", spec.label(), inst.mdp.num_states(), inst.policy_class.len());
    for algo in [Algorithm::Mmdp, Algorithm::NrmmBr, Algorithm::NrmmNr, Algorithm::BehavioralCloning] {
        let mut cfg = RunConfig::for_algorithm(algo);
        cfg.rounds = 30;
        let t = run(&inst, &cfg, 1)?;
        let audit = audit_transcript(&t, &inst, &profile)?;
        println!("{:<20} gap {:.4}", algo.name(), t.returned().gap);
        for c in &audit.checks {
            println!("    {:<26} {:.4} <= {:.4}  {}", c.name, c.measured, c.bound, if c.holds { "ok" } else { "VIOLATED" });
        }
    }
    Ok(())
}
