//! A single particle in `(|0> + |1>)/√2` is measured twice in the same basis.
//! The observer's memory branches once; the second look repeats the record.
//!
//!     cargo run --example branching_measurement

use std::f64::consts::FRAC_1_SQRT_2;

use everett_epr::epr::ObservableBasis;
use everett_epr::linalg::Ket;
use everett_epr::relative_state::BranchedState;

fn show(title: &str, state: &BranchedState) {
    println!("{title}");
    for b in state.branches() {
        let records: Vec<_> = b.registers().iter().map(|r| r.indices()).collect();
        println!(
            "  amplitude {:+.6}{:+.6}i  records {:?}",
            b.amplitude().re,
            b.amplitude().im,
            records
        );
    }
    println!("  total weight {:.15}", state.total_weight());
}

fn main() -> everett_epr::Result<()> {
    let psi = Ket::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])?;
    let z = ObservableBasis::reference(2)?;

    let blank = BranchedState::initial_state(&[psi], 1)?;
    show("before measurement", &blank);

    let once = blank.measure(0, 0, &z)?;
    show("after one measurement", &once);

    let twice = once.remeasure_consistency(0, 0, &z)?;
    show("after measuring again in the same basis", &twice);
    Ok(())
}
