use std::io::{BufRead, Write};

use super::types::{Trajectory, VisitationProfile};
use crate::error::{configuration, structural, Result};

/// Per-timestep empirical `(state, action)` frequencies of full-horizon
/// demonstrations. No smoothing: unvisited pairs keep zero mass.
pub fn empirical_expert_visitation(
    demos: &[Trajectory],
    num_states: usize,
    num_actions: usize,
    horizon: usize,
) -> Result<VisitationProfile> {
    if demos.is_empty() {
        return Err(configuration("empirical visitation needs at least one demonstration"));
    }
    let mut counts = vec![vec![0.0; num_states * num_actions]; horizon];
    for (i, demo) in demos.iter().enumerate() {
        if demo.len() != horizon || demo.steps.first().map(|s| s.t) != Some(1) {
            return Err(structural(format!("demonstration {i} is not a full-horizon rollout")));
        }
        for st in &demo.steps {
            if st.state >= num_states || st.action >= num_actions {
                return Err(structural(format!("demonstration {i} leaves the state-action space")));
            }
            counts[st.t - 1][st.state * num_actions + st.action] += 1.0;
        }
    }
    let n = demos.len() as f64;
    for row in &mut counts {
        row.iter_mut().for_each(|c| *c /= n);
    }
    VisitationProfile::new(num_states, num_actions, counts)
}

/// Writes trajectories as JSON lines, one per line.
pub fn write_trajectories_jsonl<W: Write>(mut out: W, trajs: &[Trajectory]) -> Result<()> {
    for t in trajs {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads JSON-lines trajectories, skipping blank lines.
pub fn read_trajectories_jsonl<R: BufRead>(input: R) -> Result<Vec<Trajectory>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let traj: Trajectory = serde_json::from_str(&line)?;
        traj.check()?;
        out.push(traj);
    }
    Ok(out)
}
