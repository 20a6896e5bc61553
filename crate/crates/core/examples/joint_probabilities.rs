//! Joint outcome probabilities and the correlation `E(theta)` of the singlet
//! across analyzer angles, next to `-cos(theta)`.
//!
//!     cargo run --example joint_probabilities

use everett_epr::epr::{marginal, Side};
use everett_epr::spin::{self, AngleDeg};

fn main() -> everett_epr::Result<()> {
    println!("theta    P00       P01       P10       P11       E(theta)   -cos(theta)  marginal_1");
    for theta in (0..=180).step_by(15) {
        let angle = AngleDeg::new(theta as f64)?;
        let p = spin::singlet_joint_probability(angle);
        let m = marginal(&p, Side::First);
        println!(
            "{:>5}  {:.6}  {:.6}  {:.6}  {:.6}  {:+.6}  {:+.6}    ({:.3}, {:.3})",
            theta,
            p.get(0, 0),
            p.get(0, 1),
            p.get(1, 0),
            p.get(1, 1),
            spin::correlation(angle),
            -angle.radians().cos(),
            m[0],
            m[1]
        );
    }
    Ok(())
}
