//! Dante's construction: behavioral cloning copies the expert's first step
//! and walks into the erring suffix, while MMDP accounts for the suffix and
//! goes up.

use filter_lab::envs::{EnvSpec, DANTE_STRAIGHT, DANTE_UP};
use filter_lab::irl::{run, Algorithm, RunConfig};

fn main() -> filter_lab::error::Result<()> {
    let (horizon, eps) = (10, 0.05);
    let inst = EnvSpec::Dante { horizon, eps }.build()?;
    let names = |k: usize| match k {
        k if k == DANTE_UP => "up",
        k if k == DANTE_STRAIGHT => "straight",
        _ => "down",
    };
    for algo in [Algorithm::BehavioralCloning, Algorithm::Mmdp] {
        let mut cfg = RunConfig::for_algorithm(algo);
        cfg.fixed_suffix = true;
        let t = run(&inst, &cfg, 0)?;
        let seq = t.output.as_ref().expect("sequence output");
        let first = seq.at(1);
        let choice = (0..inst.policy_class.len())
            .find(|&k| inst.policy_class[k] == *first)
            .map(names)
            .unwrap_or("mixed");
        println!("{:<20} t=1 action {choice:<8} gap {:.4}", algo.name(), t.returned().gap);
    }
    println!("eps*T*(T-1) = {:.4}", eps * (horizon * (horizon - 1)) as f64);
    Ok(())
}
