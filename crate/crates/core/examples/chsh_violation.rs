//! CHSH score of the singlet against the best deterministic local strategy,
//! plus an exhaustive search over a 1° grid of analyzer angles.
//!
//!     cargo run --release --example chsh_violation

use everett_epr::bell::{self, ChshSettings};

fn main() -> everett_epr::Result<()> {
    for settings in [
        ChshSettings::optimal(),
        ChshSettings::new(0.0, 0.0, 0.0, 0.0)?,
        ChshSettings::new(0.0, 90.0, 225.0, 315.0)?,
        ChshSettings::new(0.0, 60.0, 30.0, 90.0)?,
    ] {
        let r = bell::violation_report(&settings);
        println!(
            "a={:>5} a'={:>5} b={:>5} b'={:>5}  S={:+.6}  local max={}  violated={}  margin={:+.6}",
            settings.a.degrees(),
            settings.a_prime.degrees(),
            settings.b.degrees(),
            settings.b_prime.degrees(),
            r.quantum_score,
            r.classical_bound,
            r.violated,
            r.margin
        );
    }
    let (best, at) = bell::chsh_grid_maximum(1);
    println!(
        "1° grid maximum |S| = {best:.9} at ({}, {}, {}, {})",
        at.a.degrees(),
        at.a_prime.degrees(),
        at.b.degrees(),
        at.b_prime.degrees()
    );
    Ok(())
}
