//! Forked Tree payoff tables, recomputed from the constructed MDP and diffed
//! against the embedded expected values. Rows are `pi_E, pi_1, pi_2`,
//! columns `r, r~`.

use crate::envs::EnvSpec;
use crate::error::Result;
use crate::irl::Evaluator;

pub type Table = [[f64; 2]; 3];

/// `(name, expected)` for the four tables.
pub const EXPECTED: [(&str, Table); 4] = [
    ("J(pi,f) - J(pi_E,f)", [[0.0, 0.0], [-2.0, -3.0], [-2.0, -3.0]]),
    ("J_E^1(pi,f)", [[1.0, 1.5], [0.0, 0.0], [0.0, 2.0]]),
    ("J_E^2(pi,f)", [[1.0, 1.5], [0.0, 2.0], [0.0, 0.0]]),
    ("J_E^E(pi,f)", [[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]]),
];

/// One mismatching entry.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenDiff {
    pub table: &'static str,
    pub row: usize,
    pub col: usize,
    pub expected: f64,
    pub actual: f64,
}

fn to_table(rows: Vec<Vec<f64>>) -> Table {
    let mut out = [[0.0; 2]; 3];
    for (o, r) in out.iter_mut().zip(rows) {
        o.copy_from_slice(&r);
    }
    out
}

/// The four tables in the order of [`EXPECTED`].
pub fn compute_tables() -> Result<Vec<Table>> {
    let inst = EnvSpec::ForkedTree.build()?;
    let rho = inst.expert_profile()?;
    let ev = Evaluator::new(&inst.mdp, &rho, &inst.reward_class, &inst.policy_class)?;
    let moments = ev
        .class
        .iter()
        .map(|pi| ev.losses(pi).into_iter().map(|l| -l).collect())
        .collect();
    let reset = |k: usize| to_table(ev.reset_matrix(&ev.q_tables(&ev.class[k])));
    Ok(vec![to_table(moments), reset(1), reset(2), reset(0)])
}

/// Exact-equality diff of the computed tables against [`EXPECTED`].
pub fn golden_diffs() -> Result<Vec<GoldenDiff>> {
    let tables = compute_tables()?;
    let mut diffs = Vec::new();
    for ((name, expected), actual) in EXPECTED.iter().zip(&tables) {
        for row in 0..3 {
            for col in 0..2 {
                if expected[row][col] != actual[row][col] {
                    diffs.push(GoldenDiff {
                        table: name,
                        row,
                        col,
                        expected: expected[row][col],
                        actual: actual[row][col],
                    });
                }
            }
        }
    }
    Ok(diffs)
}

/// Plain-text rendering of a table with the Forked Tree labels.
pub fn render_table(name: &str, table: &Table) -> String {
    let mut out = format!("{name}\n          r      r~\n");
    for (label, row) in ["pi_E", "pi_1", "pi_2"].iter().zip(table) {
        out.push_str(&format!("{label:<6} {:>6} {:>6}\n", row[0] + 0.0, row[1] + 0.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_drift() {
        assert_eq!(golden_diffs().unwrap(), vec![]);
    }

    #[test]
    fn rendering_has_every_row() {
        let text = render_table(EXPECTED[1].0, &EXPECTED[1].1);
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("1.5"));
    }
}
