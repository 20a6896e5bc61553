//! Observer 1's outcome statistics do not depend on which basis observer 2
//! picks: a random entangled pair checked against many random bases.
//!
//!     cargo run --example no_signaling

use everett_epr::epr::{self, CoefficientMatrix, ObservableBasis};

fn main() -> everett_epr::Result<()> {
    let c = CoefficientMatrix::random(3, 3, 2024)?;
    let bases = (0..8)
        .map(|k| ObservableBasis::random(k + 1, 3, 100 + k as u64))
        .collect::<everett_epr::Result<Vec<_>>>()?;
    let report = epr::no_signaling_report(&c, &bases, 1e-10)?;
    println!("row weights of C:       {:?}", c.row_weights());
    for (k, m) in report.marginals.iter().enumerate() {
        println!("marginal under basis {k}: {m:?}");
    }
    println!(
        "max deviation {:.2e} (tol {:.0e}) -> {}",
        report.max_deviation,
        report.tol,
        if report.pass { "pass" } else { "FAIL" }
    );

    for dim in 2..=4 {
        let sweep = epr::no_signaling_sweep(100, dim, 1, 1e-10)?;
        println!(
            "sweep dim {dim}: 100 random triples, max deviation {:.2e}, pass {}",
            sweep.max_deviation, sweep.pass
        );
    }
    Ok(())
}
