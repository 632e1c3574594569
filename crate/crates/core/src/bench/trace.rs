use crate::envs::Instance;
use crate::irl::{PolicyChoice, RunTranscript};

fn policy_label(choice: &PolicyChoice, inst: &Instance) -> String {
    match choice {
        PolicyChoice::Member(k) => inst.policy_names[*k].clone(),
        PolicyChoice::Mixture(w) => match w.as_point() {
            Some(k) => inst.policy_names[k].clone(),
            None => {
                let parts: Vec<String> = w
                    .as_slice()
                    .iter()
                    .zip(&inst.policy_names)
                    .filter(|(p, _)| **p > 0.0)
                    .map(|(p, n)| format!("{p:.2}*{n}"))
                    .collect();
                parts.join("+")
            }
        },
        PolicyChoice::Sequence(_) => "sequence".into(),
    }
}

/// Per-round `(policy, reward)` labels.
pub fn trace_rows(transcript: &RunTranscript, inst: &Instance) -> Vec<(usize, String, String)> {
    transcript
        .iterates
        .iter()
        .map(|r| {
            let reward = match r.reward_weights.as_point() {
                Some(j) => inst.reward_names[j].clone(),
                None => format!("~{}", inst.reward_names[r.reward_index]),
            };
            (r.round, policy_label(&r.policy, inst), reward)
        })
        .collect()
}

/// The trace as a `# | pi | f` table, one row per round.
pub fn format_trace(transcript: &RunTranscript, inst: &Instance) -> String {
    let mut out = format!(
        "{} on {}\n{:>4} | {:<12} | {}\n",
        transcript.algorithm.name(),
        inst.spec.label(),
        "#",
        "pi",
        "f"
    );
    for (round, pi, f) in trace_rows(transcript, inst) {
        out.push_str(&format!("{round:>4} | {pi:<12} | {f}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvSpec;
    use crate::irl::{run, Algorithm, RunConfig};

    #[test]
    fn dual_trace_cycles() {
        let inst = EnvSpec::ForkedTree.build().unwrap();
        let mut cfg = RunConfig::for_algorithm(Algorithm::NrmmDual);
        cfg.rounds = 4;
        let t = run(&inst, &cfg, 0).unwrap();
        let rows: Vec<_> = trace_rows(&t, &inst).into_iter().map(|(_, p, f)| (p, f)).collect();
        let expect = [("pi_1", "r~"), ("pi_2", "r~"), ("pi_1", "r~"), ("pi_2", "r~")];
        for ((p, f), (ep, ef)) in rows.iter().zip(expect) {
            assert_eq!((p.as_str(), f.as_str()), (ep, ef));
        }
        assert!(format_trace(&t, &inst).contains("pi_2"));
    }
}
