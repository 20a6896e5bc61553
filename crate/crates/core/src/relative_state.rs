//! Measurement as branching of observer memory.
//!
//! A measuring interaction on an eigenstate writes the eigenvalue into the
//! observer's memory and leaves the object alone:
//! `U |a_i>|[ ]> = |a_i>|[a_i]>`. Applied linearly to a superposition it
//! produces one branch per outcome, each carrying its own record. Nothing is
//! ever collapsed; the branch weights are squared amplitudes.
//!
//! A [`BranchedState`] is a list of [`Branch`]es. Each branch holds an
//! amplitude, one memory register per observer, and the object state split
//! into factors. A factor is a ket over one or more particle slots; an
//! entangled pair stays a single joint factor until one of its slots is
//! measured, after which the measured slot holds the outcome eigenket and the
//! rest holds the normalized relative state.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::epr::{CoefficientMatrix, ObservableBasis};
use crate::linalg::{self, Ket, ALGEBRA_TOL};
use crate::{Error, Result};

/// Sub-branches with amplitude modulus below this are dropped.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-14;

/// Two branch states count as identical when `|<x|y>| >= 1 - MERGE_TOL`.
const MERGE_TOL: f64 = 1e-12;

/// One recorded outcome: which observable, and which eigenvalue index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeLabel {
    pub observable_id: u32,
    pub index: usize,
}

/// Append-only record of outcomes held by one observer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MemoryRegister {
    records: Vec<OutcomeLabel>,
}

impl MemoryRegister {
    pub fn records(&self) -> &[OutcomeLabel] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&OutcomeLabel> {
        self.records.last()
    }

    /// Outcome indices only, in record order.
    pub fn indices(&self) -> Vec<usize> {
        self.records.iter().map(|l| l.index).collect()
    }

    fn push(&mut self, label: OutcomeLabel) {
        self.records.push(label);
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Factor {
    /// Particle slots covered, ascending; the ket is their row-major product space.
    slots: Vec<usize>,
    ket: Ket,
}

/// One term of the branched superposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    amplitude: Complex64,
    factors: Vec<Factor>,
    registers: Vec<MemoryRegister>,
}

impl Branch {
    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn weight(&self) -> f64 {
        self.amplitude.norm_sqr()
    }

    pub fn registers(&self) -> &[MemoryRegister] {
        &self.registers
    }

    pub fn register(&self, observer: usize) -> Result<&MemoryRegister> {
        self.registers.get(observer).ok_or(Error::SlotOutOfRange {
            kind: "observer",
            index: observer,
            count: self.registers.len(),
        })
    }

    /// The state of `slot` when it is not entangled with other slots in this
    /// branch, `None` while it is still part of a joint factor.
    pub fn particle_state(&self, slot: usize) -> Option<&Ket> {
        self.factors
            .iter()
            .find(|f| f.slots == [slot])
            .map(|f| &f.ket)
    }

    /// The factor containing `slot`: its slot list and joint ket.
    pub fn factor_of(&self, slot: usize) -> Option<(&[usize], &Ket)> {
        self.factors
            .iter()
            .find(|f| f.slots.contains(&slot))
            .map(|f| (f.slots.as_slice(), &f.ket))
    }

    /// All factors as `(slots, ket)` pairs, ordered by first slot.
    pub fn factors(&self) -> impl Iterator<Item = (&[usize], &Ket)> {
        self.factors.iter().map(|f| (f.slots.as_slice(), &f.ket))
    }

    /// The object state of this branch expanded over all slots, slot 0 most
    /// significant (the usual tensor index convention).
    pub fn full_ket(&self, dims: &[usize]) -> Ket {
        let total: usize = dims.iter().product();
        let mut digits = vec![0usize; dims.len()];
        let mut amps = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            for s in (0..dims.len()).rev() {
                digits[s] = rest % dims[s];
                rest /= dims[s];
            }
            let mut z = Complex64::new(1.0, 0.0);
            for f in &self.factors {
                let mut idx = 0;
                for &s in &f.slots {
                    idx = idx * dims[s] + digits[s];
                }
                z *= f.ket.amplitudes()[idx];
            }
            amps.push(z);
        }
        Ket::new(amps).expect("products of finite amplitudes are finite")
    }

    /// Reference-basis outcome probabilities of `slot` within this branch.
    pub fn slot_probabilities(&self, slot: usize, dims: &[usize]) -> Vec<f64> {
        let (slots, ket) = self.factor_of(slot).expect("every slot belongs to a factor");
        let pos = slots.iter().position(|&s| s == slot).unwrap();
        let d = dims[slot];
        let right: usize = slots[pos + 1..].iter().map(|&s| dims[s]).product();
        let mut probs = vec![0.0; d];
        for (flat, z) in ket.amplitudes().iter().enumerate() {
            probs[(flat / right) % d] += z.norm_sqr();
        }
        probs
    }

    fn same_layout(&self, other: &Branch) -> bool {
        self.factors.len() == other.factors.len()
            && self
                .factors
                .iter()
                .zip(&other.factors)
                .all(|(a, b)| a.slots == b.slots)
    }

    /// `<self|other>` of the object states (registers are not compared).
    fn state_overlap(&self, other: &Branch, dims: &[usize]) -> Complex64 {
        if self.same_layout(other) {
            self.factors
                .iter()
                .zip(&other.factors)
                .map(|(a, b)| linalg::inner(&a.ket, &b.ket).expect("same layout"))
                .product()
        } else {
            linalg::inner(&self.full_ket(dims), &other.full_ket(dims)).expect("same dims")
        }
    }
}

/// A weighted superposition of branches over fixed particle and observer slots.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedState {
    branches: Vec<Branch>,
    particle_dims: Vec<usize>,
    observer_count: usize,
    prune_threshold: f64,
}

impl BranchedState {
    /// Unentangled particles, blank observer memories, one branch.
    pub fn initial_state(particle_kets: &[Ket], observer_count: usize) -> Result<Self> {
        if particle_kets.is_empty() {
            return Err(Error::InvalidArgument("at least one particle is required".into()));
        }
        for ket in particle_kets {
            if !ket.is_normalized(ALGEBRA_TOL) {
                return Err(Error::NotNormalized {
                    norm_sqr: ket.norm_sqr(),
                });
            }
        }
        let factors = particle_kets
            .iter()
            .enumerate()
            .map(|(slot, ket)| Factor {
                slots: vec![slot],
                ket: ket.clone(),
            })
            .collect();
        Ok(BranchedState {
            branches: vec![Branch {
                amplitude: Complex64::new(1.0, 0.0),
                factors,
                registers: vec![MemoryRegister::default(); observer_count],
            }],
            particle_dims: particle_kets.iter().map(Ket::dim).collect(),
            observer_count,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        })
    }

    /// The pair state `sum C[i][j] |i> ⊗ |j>` held as one joint factor, with
    /// two blank observers (observer 0 for particle 0, observer 1 for particle 1).
    pub fn from_coefficients(c: &CoefficientMatrix) -> Result<Self> {
        let ket = c.joint_ket();
        if !ket.is_normalized(ALGEBRA_TOL) {
            return Err(Error::NotNormalized {
                norm_sqr: ket.norm_sqr(),
            });
        }
        Ok(BranchedState {
            branches: vec![Branch {
                amplitude: Complex64::new(1.0, 0.0),
                factors: vec![Factor {
                    slots: vec![0, 1],
                    ket,
                }],
                registers: vec![MemoryRegister::default(); 2],
            }],
            particle_dims: vec![c.d1(), c.d2()],
            observer_count: 2,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        })
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn particle_dims(&self) -> &[usize] {
        &self.particle_dims
    }

    pub fn observer_count(&self) -> usize {
        self.observer_count
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    /// `sum |amplitude|^2` over branches.
    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(Branch::weight).sum()
    }

    /// Branch-weighted reference-basis outcome probabilities of `slot`.
    pub fn slot_probabilities(&self, slot: usize) -> Result<Vec<f64>> {
        self.check_particle(slot)?;
        let mut probs = vec![0.0; self.particle_dims[slot]];
        for b in &self.branches {
            for (acc, p) in probs
                .iter_mut()
                .zip(b.slot_probabilities(slot, &self.particle_dims))
            {
                *acc += b.weight() * p;
            }
        }
        Ok(probs)
    }

    fn check_particle(&self, particle: usize) -> Result<()> {
        if particle >= self.particle_dims.len() {
            return Err(Error::SlotOutOfRange {
                kind: "particle",
                index: particle,
                count: self.particle_dims.len(),
            });
        }
        Ok(())
    }

    fn check_observer(&self, observer: usize) -> Result<()> {
        if observer >= self.observer_count {
            return Err(Error::SlotOutOfRange {
                kind: "observer",
                index: observer,
                count: self.observer_count,
            });
        }
        Ok(())
    }

    /// Lets `observer` measure `particle` in `basis`.
    ///
    /// Every branch splits into one sub-branch per outcome `j` with amplitude
    /// `parent * <b_j|relative state>`; the particle slot becomes `|b_j>` and
    /// `(basis.id, j)` is appended to this observer's register only. Other
    /// factors and registers are copied untouched. Sub-branches below the
    /// prune threshold are dropped, then branches with identical registers and
    /// identical object states are merged coherently.
    pub fn measure(
        &self,
        particle: usize,
        observer: usize,
        basis: &ObservableBasis,
    ) -> Result<BranchedState> {
        self.check_particle(particle)?;
        self.check_observer(observer)?;
        let d = self.particle_dims[particle];
        if basis.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: basis.dim(),
            });
        }
        let eigenkets: Vec<Ket> = (0..d).map(|j| basis.eigenket(j)).collect();

        let mut out = Vec::with_capacity(self.branches.len() * d);
        for branch in &self.branches {
            let fi = branch
                .factors
                .iter()
                .position(|f| f.slots.contains(&particle))
                .expect("every slot belongs to a factor");
            let factor = &branch.factors[fi];
            let pos = factor.slots.iter().position(|&s| s == particle).unwrap();
            let right: usize = factor.slots[pos + 1..]
                .iter()
                .map(|&s| self.particle_dims[s])
                .product();
            let left: usize = factor.slots[..pos]
                .iter()
                .map(|&s| self.particle_dims[s])
                .product();
            let psi = factor.ket.amplitudes();
            let rest_slots: Vec<usize> = factor
                .slots
                .iter()
                .copied()
                .filter(|&s| s != particle)
                .collect();

            for (j, eigenket) in eigenkets.iter().enumerate() {
                // Unnormalized relative state of the rest of the factor.
                let mut rel = vec![Complex64::new(0.0, 0.0); left * right];
                for l in 0..left {
                    for r in 0..right {
                        rel[l * right + r] = (0..d)
                            .map(|k| basis.bra_overlap(j, k) * psi[(l * d + k) * right + r])
                            .sum();
                    }
                }
                let (amplitude, rest) = if rest_slots.is_empty() {
                    (branch.amplitude * rel[0], None)
                } else {
                    let norm = rel.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        continue;
                    }
                    // Gauge: the leading component of the relative state is
                    // real positive, its phase goes into the amplitude.
                    let peak = rel.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    let lead = rel
                        .iter()
                        .find(|z| z.norm() >= peak * (1.0 - 1e-12))
                        .expect("non-zero vector has a peak");
                    let phase = lead / lead.norm();
                    let scale = phase * norm;
                    let ket = Ket::new(rel.iter().map(|z| z / scale).collect())?;
                    (branch.amplitude * scale, Some(ket))
                };
                if amplitude.norm() < self.prune_threshold {
                    continue;
                }

                let mut factors = Vec::with_capacity(branch.factors.len() + 1);
                for (x, f) in branch.factors.iter().enumerate() {
                    if x != fi {
                        factors.push(f.clone());
                    }
                }
                factors.push(Factor {
                    slots: vec![particle],
                    ket: eigenket.clone(),
                });
                if let Some(ket) = rest {
                    factors.push(Factor {
                        slots: rest_slots.clone(),
                        ket,
                    });
                }
                factors.sort_by_key(|f| f.slots[0]);

                let mut registers = branch.registers.clone();
                registers[observer].push(OutcomeLabel {
                    observable_id: basis.id(),
                    index: j,
                });
                out.push(Branch {
                    amplitude,
                    factors,
                    registers,
                });
            }
        }

        Ok(BranchedState {
            branches: merge_branches(out, &self.particle_dims, self.prune_threshold),
            particle_dims: self.particle_dims.clone(),
            observer_count: self.observer_count,
            prune_threshold: self.prune_threshold,
        })
    }

    /// Measures again in a basis `observer` has just recorded, and checks that
    /// the new record repeats the previous one in every branch with unchanged
    /// branch count and amplitude moduli.
    pub fn remeasure_consistency(
        &self,
        particle: usize,
        observer: usize,
        basis: &ObservableBasis,
    ) -> Result<BranchedState> {
        self.check_observer(observer)?;
        for b in &self.branches {
            match b.registers[observer].last() {
                Some(label) if label.observable_id == basis.id() => {}
                _ => {
                    return Err(Error::NotPreviouslyMeasured {
                        observer,
                        basis_id: basis.id(),
                    })
                }
            }
        }
        let next = self.measure(particle, observer, basis)?;
        let consistent = next.branches.len() == self.branches.len()
            && next.branches.iter().zip(&self.branches).all(|(after, before)| {
                let recs = after.registers[observer].records();
                let n = recs.len();
                n >= 2
                    && recs[n - 1] == recs[n - 2]
                    && recs[..n - 1] == *before.registers[observer].records()
                    && (after.amplitude.norm() - before.amplitude.norm()).abs() <= ALGEBRA_TOL
            });
        if !consistent {
            return Err(Error::InvalidArgument(format!(
                "repeated measurement of particle {particle} by observer {observer} \
                 did not reproduce the earlier record"
            )));
        }
        Ok(next)
    }

    /// The coherent sum `sum_k c_k |state_k>`, with branches that share
    /// registers and object state merged. The result must be normalized.
    pub fn superpose(terms: &[(Complex64, &BranchedState)]) -> Result<BranchedState> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidArgument("empty superposition".into()));
        };
        for (_, s) in terms {
            if s.particle_dims != first.particle_dims {
                return Err(Error::InvalidArgument("particle slot layouts differ".into()));
            }
            if s.observer_count != first.observer_count {
                return Err(Error::DimensionMismatch {
                    expected: first.observer_count,
                    found: s.observer_count,
                });
            }
        }
        let scaled = terms
            .iter()
            .flat_map(|(c, s)| {
                s.branches.iter().map(move |b| Branch {
                    amplitude: b.amplitude * c,
                    ..b.clone()
                })
            })
            .collect();
        let state = BranchedState {
            branches: merge_branches(scaled, &first.particle_dims, first.prune_threshold),
            particle_dims: first.particle_dims.clone(),
            observer_count: first.observer_count,
            prune_threshold: first.prune_threshold,
        };
        let total = state.total_weight();
        if (total - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotNormalized { norm_sqr: total });
        }
        Ok(state)
    }
}

/// Coherently merges branches with identical registers whose object states
/// are parallel, keeping first-occurrence order.
fn merge_branches(branches: Vec<Branch>, dims: &[usize], prune: f64) -> Vec<Branch> {
    let mut merged: Vec<Branch> = Vec::with_capacity(branches.len());
    let mut by_record: HashMap<Vec<MemoryRegister>, Vec<usize>> = HashMap::new();
    for branch in branches {
        let slots = by_record.entry(branch.registers.clone()).or_default();
        let target = slots.iter().copied().find_map(|x| {
            let overlap = merged[x].state_overlap(&branch, dims);
            (overlap.norm() >= 1.0 - MERGE_TOL).then_some((x, overlap))
        });
        match target {
            // other = overlap * self (up to rounding), so a1|x> + a2|y> = (a1 + a2 overlap)|x>.
            Some((x, overlap)) => merged[x].amplitude += branch.amplitude * overlap,
            None => {
                slots.push(merged.len());
                merged.push(branch);
            }
        }
    }
    merged.retain(|b| b.amplitude.norm() >= prune);
    merged
}
