//! CHSH test for the singlet.
//!
//! Sign convention, used everywhere in this crate:
//!
//! ```text
//! S = E(a, b) - E(a, b') + E(a', b) + E(a', b')
//! ```
//!
//! Observer 1 chooses `a` or `a'`, observer 2 chooses `b` or `b'`. The singlet
//! is rotationally invariant, so `E(x, y)` only depends on `x - y` and is read
//! from [`spin::correlation`].
//!
//! The classical bound is found by enumerating all 16 deterministic local
//! strategies. Mixed local strategies are convex combinations of these, so
//! they cannot exceed the deterministic maximum.

use crate::spin::{self, AngleDeg};
use crate::Result;

/// The four analyzer angles of a CHSH run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshSettings {
    pub a: AngleDeg,
    pub a_prime: AngleDeg,
    pub b: AngleDeg,
    pub b_prime: AngleDeg,
}

impl ChshSettings {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        Ok(ChshSettings {
            a: AngleDeg::new(a)?,
            a_prime: AngleDeg::new(a_prime)?,
            b: AngleDeg::new(b)?,
            b_prime: AngleDeg::new(b_prime)?,
        })
    }

    /// `(0°, 90°, 45°, 135°)`, which gives `S = -2√2`.
    pub fn optimal() -> Self {
        ChshSettings::new(0.0, 90.0, 45.0, 135.0).expect("finite literals")
    }

    /// All four angles shifted by `offset` degrees.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        ChshSettings::new(
            self.a.degrees() + offset,
            self.a_prime.degrees() + offset,
            self.b.degrees() + offset,
            self.b_prime.degrees() + offset,
        )
    }
}

fn relative(x: AngleDeg, y: AngleDeg) -> AngleDeg {
    AngleDeg::new(x.degrees() - y.degrees()).expect("difference of finite angles")
}

fn score(e_ab: f64, e_abp: f64, e_apb: f64, e_apbp: f64) -> f64 {
    e_ab - e_abp + e_apb + e_apbp
}

/// Quantum CHSH score of the singlet.
pub fn chsh_score(settings: &ChshSettings) -> f64 {
    let e = |x, y| spin::correlation(relative(x, y));
    let s = settings;
    score(
        e(s.a, s.b),
        e(s.a, s.b_prime),
        e(s.a_prime, s.b),
        e(s.a_prime, s.b_prime),
    )
}

/// Largest `|S|` reachable by a deterministic local strategy.
///
/// A strategy fixes `A(a), A(a'), B(b), B(b')` in `{-1, +1}` independently and
/// replaces every correlator by the product of the two local outcomes. The
/// angles play no role, which is the point: a local assignment cannot see the
/// remote setting.
pub fn lhv_max_score(_settings: &ChshSettings) -> f64 {
    let sign = |bit: u32| if bit == 0 { 1.0 } else { -1.0 };
    (0u32..16)
        .map(|strategy| {
            let a = sign(strategy & 1);
            let ap = sign((strategy >> 1) & 1);
            let b = sign((strategy >> 2) & 1);
            let bp = sign((strategy >> 3) & 1);
            score(a * b, a * bp, ap * b, ap * bp).abs()
        })
        .fold(0.0, f64::max)
}

/// Quantum score against the local bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViolationReport {
    pub settings: ChshSettings,
    pub quantum_score: f64,
    pub classical_bound: f64,
    pub violated: bool,
    /// `|S| - classical_bound`; positive when violated.
    pub margin: f64,
}

pub fn violation_report(settings: &ChshSettings) -> ViolationReport {
    let quantum_score = chsh_score(settings);
    let classical_bound = lhv_max_score(settings);
    ViolationReport {
        settings: *settings,
        quantum_score,
        classical_bound,
        violated: quantum_score.abs() > classical_bound + 1e-12,
        margin: quantum_score.abs() - classical_bound,
    }
}

/// Exact maximum of `|S|` over every setting tuple on an integer-degree grid
/// `{0, step, 2 step, ...} ∩ [0, 180)`, together with a maximizing tuple.
///
/// Correlators are tabulated once per angle difference. For fixed `(a, a')`
/// the score separates into a `b` part and a `b'` part, so each is maximized
/// (and minimized) independently.
pub fn chsh_grid_maximum(step_deg: u32) -> (f64, ChshSettings) {
    let step = step_deg.max(1) as i64;
    let grid: Vec<i64> = (0..180).step_by(step as usize).collect();
    let table: Vec<f64> = (-179..=179)
        .map(|d| spin::correlation(AngleDeg::new(d as f64).expect("finite")))
        .collect();
    let e = |x: i64, y: i64| table[(x - y + 179) as usize];

    let mut best = (f64::NEG_INFINITY, [0i64; 4]);
    for &a in &grid {
        for &ap in &grid {
            // S = [E(a,b) + E(a',b)] + [E(a',b') - E(a,b')]
            let f = |b: i64| e(a, b) + e(ap, b);
            let g = |bp: i64| e(ap, bp) - e(a, bp);
            let argmax = |h: &dyn Fn(i64) -> f64, sign: f64| {
                grid.iter()
                    .copied()
                    .max_by(|&x, &y| (sign * h(x)).total_cmp(&(sign * h(y))))
                    .expect("non-empty grid")
            };
            for sign in [1.0, -1.0] {
                let b = argmax(&f, sign);
                let bp = argmax(&g, sign);
                let value = (f(b) + g(bp)).abs();
                if value > best.0 {
                    best = (value, [a, ap, b, bp]);
                }
            }
        }
    }
    let [a, ap, b, bp] = best.1;
    let settings =
        ChshSettings::new(a as f64, ap as f64, b as f64, bp as f64).expect("finite grid angles");
    (best.0, settings)
}
