//! The Cliff construction meets the quadratic bound with equality: a policy
//! that errs with probability eps per step loses eps*T^2.

use filter_lab::bench::cliff_witness_row;

fn main() -> filter_lab::error::Result<()> {
    println!("{:>3} {:>8} {:>10} {:>10} {:>10} {:>10} {:>6}", "T", "eps", "eps_bar", "eps_rl", "gap", "eps*T^2", "ratio");
    for horizon in [4, 8, 16, 32] {
        let eps = 1.0 / (2.0 * horizon as f64);
        let row = cliff_witness_row(horizon, eps, 10)?;
        println!(
            "{horizon:>3} {eps:>8.4} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>6.3}",
            row.eps_bar, row.eps_rl_bar, row.gap, row.eps_bound, row.ratio
        );
    }
    Ok(())
}
