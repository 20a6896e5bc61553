//! Seeded Monte Carlo: draw N pairs per trial and watch the empirical
//! frequency of each outcome pair settle on |K|^2.
//!
//!     cargo run --release --example monte_carlo_records

use everett_epr::spin::{self, AngleDeg};
use everett_epr::statistics;

fn main() -> everett_epr::Result<()> {
    let theta = AngleDeg::new(60.0)?;
    let p = spin::singlet_joint_probability(theta);
    for n in [10, 100, 1_000, 10_000] {
        let table = statistics::sample_records(&p, n, 100, 7)?;
        print!("N = {n:>5}:");
        for i in 0..2 {
            for j in 0..2 {
                print!(
                    "  f{i}{j} = {:.4} (P = {:.4})",
                    table.mean_frequency((i, j)),
                    p.get(i, j)
                );
            }
        }
        println!();
    }
    Ok(())
}
