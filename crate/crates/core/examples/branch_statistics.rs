//! How much branch weight sits on records whose pair frequency is far from
//! |K|^2, as the number of measured pairs grows.
//!
//!     cargo run --release --example branch_statistics

use everett_epr::spin::{self, AngleDeg};
use everett_epr::statistics::{self, CountMode};

fn main() -> everett_epr::Result<()> {
    let p = spin::singlet_joint_probability(AngleDeg::new(90.0)?);
    let pair = (0, 0);
    let eps = 0.1;
    println!("pair {pair:?}, q = {:.6}, epsilon = {eps}", p.get(0, 0));
    for n in [1, 10, 100, 1_000, 10_000, 100_000] {
        let w = statistics::deviation_weight(&p, n, pair, eps)?;
        println!("  N = {n:>6}: deviant weight {w:.6e}");
    }

    // small N: the full count distribution, both ways
    let n = 4;
    let exact = statistics::branch_count_distribution(&p, n, CountMode::Enumerate)?;
    let compressed = statistics::branch_count_distribution(&p, n, CountMode::Multinomial)?;
    println!("N = {n}: {} count vectors, total weight {:.15}", exact.len(), exact.total_weight());
    let worst = exact
        .entries
        .iter()
        .zip(&compressed.entries)
        .map(|((_, a), (_, b))| (a - b).abs())
        .fold(0.0, f64::max);
    println!("  enumeration vs multinomial: max difference {worst:.2e}");
    for (counts, w) in exact.entries.iter().take(5) {
        println!("  counts {:?} weight {w:.6}", counts.counts());
    }
    Ok(())
}
