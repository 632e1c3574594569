//! Recompute the Forked Tree payoff tables and diff them against the
//! embedded expected values.

use filter_lab::bench::{compute_tables, golden_diffs, render_table, EXPECTED};

fn main() -> filter_lab::error::Result<()> {
    for ((name, _), table) in EXPECTED.iter().zip(compute_tables()?) {
        println!("{}", render_table(name, &table));
    }
    let diffs = golden_diffs()?;
    println!("{} diffs", diffs.len());
    if !diffs.is_empty() {
        std::process::exit(1);
    }
    Ok(())
}
