//! Independent oracles shared by the integration tests. Nothing here calls
//! `k_matrix`, `measure`'s internals or the binomial tail code.

#![allow(dead_code)]

use std::collections::HashMap;

use everett_epr::epr::{CoefficientMatrix, JointDistribution, ObservableBasis};
use everett_epr::linalg::{self, ComplexMatrix, Ket};
use everett_epr::relative_state::{BranchedState, MemoryRegister};
use everett_epr::Complex64;

/// `(1/2) [[sin² θ/2, cos² θ/2], [cos² θ/2, sin² θ/2]]`.
pub fn singlet_probability_closed_form(theta_deg: f64) -> [[f64; 2]; 2] {
    let h = theta_deg.to_radians() / 2.0;
    let (s2, c2) = (h.sin().powi(2) / 2.0, h.cos().powi(2) / 2.0);
    [[s2, c2], [c2, s2]]
}

/// `(1/√2) [[i sin θ/2, cos θ/2], [-cos θ/2, -i sin θ/2]]`, worked out by
/// hand from the singlet coefficients and the rotated overlaps.
pub fn singlet_k_closed_form(theta_deg: f64) -> [[Complex64; 2]; 2] {
    let h = theta_deg.to_radians() / 2.0;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (s, c) = h.sin_cos();
    [
        [Complex64::new(0.0, r * s), Complex64::new(r * c, 0.0)],
        [Complex64::new(-r * c, 0.0), Complex64::new(0.0, -r * s)],
    ]
}

/// `K[i'][j'] = <a_i' ⊗ b_j' | Ψ>` evaluated with kets, tensor and inner.
pub fn k_by_projection(
    c: &CoefficientMatrix,
    basis_a: &ObservableBasis,
    basis_b: &ObservableBasis,
) -> ComplexMatrix {
    let psi = c.joint_ket();
    let mut entries = Vec::new();
    for ip in 0..c.d1() {
        for jp in 0..c.d2() {
            let bra = linalg::tensor(&basis_a.eigenket(ip), &basis_b.eigenket(jp)).unwrap();
            entries.push(linalg::inner(&bra, &psi).unwrap());
        }
    }
    ComplexMatrix::new(c.d1(), c.d2(), entries).unwrap()
}

/// Walks all `k^n` outcome sequences depth-first and sums the probability of
/// those where `pair`'s frequency is further than `eps` from `q`.
/// Boundary handling matches the library convention (strict, 1e-12 slack).
pub fn brute_force_deviant_weight(p: &JointDistribution, n: u64, pair: (usize, usize), eps: f64) -> f64 {
    let probs = p.probabilities().to_vec();
    let target = pair.0 * p.cols() + pair.1;
    struct Walk {
        probs: Vec<f64>,
        target: usize,
        n: u64,
        q: f64,
        eps: f64,
    }
    impl Walk {
        fn go(&self, depth: u64, hits: u64, w: f64) -> f64 {
            if w == 0.0 {
                return 0.0;
            }
            if depth == self.n {
                let f = hits as f64 / self.n as f64;
                return if (f - self.q).abs() - self.eps > 1e-12 { w } else { 0.0 };
            }
            self.probs
                .iter()
                .enumerate()
                .map(|(k, &pk)| self.go(depth + 1, hits + (k == self.target) as u64, w * pk))
                .sum()
        }
    }
    let q = probs[target];
    Walk { probs, target, n, q, eps }.go(0, 0, 1.0)
}

/// Exact binomial tail by direct summation in u128/f64 for small n.
pub fn direct_binomial_tail(n: u64, q: f64, eps: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..=n {
        let f = k as f64 / n as f64;
        if (f - q).abs() - eps > 1e-12 {
            let mut coef: f64 = 1.0;
            for i in 0..k {
                coef = coef * (n - i) as f64 / (i + 1) as f64;
            }
            total += coef * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
        }
    }
    total
}

/// For each distinct register history, the coherent sum of
/// `amplitude * full object ket` over branches with that history.
pub fn coherent_record_map(state: &BranchedState) -> HashMap<Vec<MemoryRegister>, Ket> {
    let dims = state.particle_dims().to_vec();
    let mut map: HashMap<Vec<MemoryRegister>, Ket> = HashMap::new();
    for b in state.branches() {
        let v = b.full_ket(&dims).scale(b.amplitude());
        map.entry(b.registers().to_vec())
            .and_modify(|acc| *acc = acc.add(&v).unwrap())
            .or_insert(v);
    }
    map
}

/// Max entrywise distance between two record maps; missing records count as zero kets.
pub fn record_map_distance(
    x: &HashMap<Vec<MemoryRegister>, Ket>,
    y: &HashMap<Vec<MemoryRegister>, Ket>,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, v) in x {
        worst = worst.max(match y.get(k) {
            Some(w) => v.max_abs_diff(w).unwrap(),
            None => v.amplitudes().iter().map(|z| z.norm()).fold(0.0, f64::max),
        });
    }
    for (k, w) in y {
        if !x.contains_key(k) {
            worst = worst.max(w.amplitudes().iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// Amplitudes in branch order, keyed by the index sequence of each register.
pub fn amplitudes_by_record(state: &BranchedState) -> Vec<(Vec<Vec<usize>>, Complex64)> {
    state
        .branches()
        .iter()
        .map(|b| (b.registers().iter().map(|r| r.indices()).collect(), b.amplitude()))
        .collect()
}
