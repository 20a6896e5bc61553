//! Two observers measure the halves of a spin singlet: observer 1 along z,
//! observer 2 along an axis tilted by `theta`. Each branch carries a pair of
//! records and its amplitude is the matching K-matrix entry.
//!
//!     cargo run --example epr_branches -- 60

use everett_epr::epr::{self, ObservableBasis};
use everett_epr::spin::{self, AngleDeg};

fn main() -> everett_epr::Result<()> {
    let theta: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("angle in degrees"))
        .unwrap_or(60.0);
    let theta = AngleDeg::new(theta)?;
    let c = spin::singlet();
    let tilted = spin::rotation_overlap(theta);

    let state = epr::run_epr(&c, &tilted)?;
    println!("singlet, z vs z' at {theta}: {} branches", state.branches().len());
    for b in state.branches() {
        let a = b.register(0)?.indices();
        let bb = b.register(1)?.indices();
        let amp = b.amplitude();
        println!(
            "  [S_z={:?}] [S_z'={:?}]  K = {:+.6}{:+.6}i  |K|^2 = {:.6}",
            a, bb, amp.re, amp.im, amp.norm_sqr()
        );
    }

    let k = epr::k_matrix(&c, &ObservableBasis::reference(2)?, &tilted)?;
    let grid = epr::branch_amplitude_grid(&state, 0, 1)?;
    println!(
        "max |branch amplitude - K| = {:.2e}",
        grid.max_abs_diff(k.matrix())?
    );
    Ok(())
}
