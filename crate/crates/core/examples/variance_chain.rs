//! Suffix-sum versus whole-trajectory discriminator estimates on a reward
//! chain, against the closed-form variances.

use filter_lab::irl::{chain_variance_closed_form, chain_variance_ratio};

fn main() -> filter_lab::error::Result<()> {
    let horizon = 10;
    for dependent in [false, true] {
        let (s, t) = chain_variance_ratio(horizon, dependent, 100_000, 7)?;
        let (cs, ct) = chain_variance_closed_form(horizon, dependent);
        println!(
            "{:<9} suffix var {s:>8.2} (exact {cs:>6.1})  trajectory var {t:>6.2} (exact {ct:>4.1})  ratio {:.3}",
            if dependent { "dependent" } else { "iid" },
            s / t
        );
    }
    println!("(T-1)/2 = {}, (T+1)/2 = {}, (T+1)(2T+1)/6 = {}", 4.5, 5.5, 38.5);
    Ok(())
}
