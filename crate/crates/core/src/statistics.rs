//! Record statistics over N identically prepared pairs.
//!
//! Measuring N pairs one after another produces branches whose amplitude is
//! the product `K[i][i'] K[j][j'] ... K[k][k']`, with the pair records
//! `(a_i b_i')(a_j b_j')...` stored in the two observers' memories. The weight
//! of all branches sharing a given count vector `n` (how often each outcome
//! pair occurs) is therefore multinomial: `N! / prod(n!) * prod(P^n)`.
//!
//! The deviant weight of an outcome pair is the total weight of branches in
//! which its relative frequency is further than `epsilon` from `P[pair]`.
//! A frequency exactly `epsilon` away is not deviant.

use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::epr::JointDistribution;
use crate::{Error, Result};

/// Largest `(d1 d2)^N` explicit sequence enumeration will walk.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;
/// Largest number of count vectors the compressed mode will list.
pub const COMPRESSED_LIMIT: u128 = 10_000_000;
/// Slack when comparing a frequency distance against `epsilon`, so that
/// boundary counts are not misclassified by rounding.
const BOUNDARY_TOL: f64 = 1e-12;

/// How often each outcome pair `(p, p')` occurs among N pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchCountVector {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl BranchCountVector {
    fn new(rows: usize, cols: usize, counts: Vec<u64>) -> Self {
        BranchCountVector { rows, cols, counts }
    }

    pub fn get(&self, p: usize, pp: usize) -> u64 {
        assert!(p < self.rows && pp < self.cols, "pair ({p}, {pp}) out of range");
        self.counts[p * self.cols + pp]
    }

    /// Row-major counts.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Count vectors with their total branch weight; zero-weight vectors are omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCountDistribution {
    pub n: u64,
    pub entries: Vec<(BranchCountVector, f64)>,
}

impl WeightedCountDistribution {
    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight_of(&self, counts: &[u64]) -> f64 {
        self.entries
            .iter()
            .find(|(v, _)| v.counts == counts)
            .map_or(0.0, |(_, w)| *w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// Walk every outcome sequence of length N and multiply probabilities.
    Enumerate,
    /// Walk count vectors and weight each by its multinomial coefficient.
    Multinomial,
}

fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// `ln C(n, k)`.
fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Whether `count` out of `n` is further than `epsilon` from `q`.
pub fn is_deviant(count: u64, n: u64, q: f64, epsilon: f64) -> bool {
    let freq = count as f64 / n as f64;
    (freq - q).abs() - epsilon > BOUNDARY_TOL
}

/// Weight distribution of pair-count vectors over all N-pair branches.
pub fn branch_count_distribution(
    p: &JointDistribution,
    n: u64,
    mode: CountMode,
) -> Result<WeightedCountDistribution> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let (rows, cols) = (p.rows(), p.cols());
    let probs = p.probabilities();
    let support: Vec<usize> = (0..probs.len()).filter(|&k| probs[k] > 0.0).collect();

    let mut weights: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    match mode {
        CountMode::Enumerate => {
            let requested = (probs.len() as u128)
                .checked_pow(n.min(u32::MAX as u64) as u32)
                .unwrap_or(u128::MAX);
            if requested > ENUMERATION_LIMIT {
                return Err(Error::Capacity {
                    what: "outcome sequences for explicit enumeration",
                    requested,
                    limit: ENUMERATION_LIMIT,
                });
            }
            let support_probs: Vec<f64> = support.iter().map(|&k| probs[k]).collect();
            for (support_counts, w) in enumerate_sequences(&support_probs, n) {
                let mut counts = vec![0u64; probs.len()];
                for (&k, c) in support.iter().zip(support_counts) {
                    counts[k] = c;
                }
                *weights.entry(counts).or_insert(0.0) += w;
            }
        }
        CountMode::Multinomial => {
            let s = support.len() as u128;
            let requested = binomial_u128(n as u128 + s - 1, s - 1);
            if requested > COMPRESSED_LIMIT {
                return Err(Error::Capacity {
                    what: "count vectors for multinomial compression",
                    requested,
                    limit: COMPRESSED_LIMIT,
                });
            }
            let ln_p: Vec<f64> = support.iter().map(|&k| probs[k].ln()).collect();
            let mut parts = vec![0u64; support.len()];
            for_each_composition(n, &mut parts, 0, &mut |parts| {
                let mut ln_w = ln_factorial(n);
                let mut counts = vec![0u64; probs.len()];
                for (x, &c) in parts.iter().enumerate() {
                    ln_w += c as f64 * ln_p[x] - ln_factorial(c);
                    counts[support[x]] = c;
                }
                weights.insert(counts, ln_w.exp());
            });
        }
    }
    Ok(finish(rows, cols, n, weights))
}

fn finish(rows: usize, cols: usize, n: u64, weights: BTreeMap<Vec<u64>, f64>) -> WeightedCountDistribution {
    WeightedCountDistribution {
        n,
        entries: weights
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(c, w)| (BranchCountVector::new(rows, cols, c), w))
            .collect(),
    }
}

/// Walks every length-`n` sequence over the outcomes in `probs` depth-first,
/// multiplying probabilities along the way, and returns the summed weight of
/// each count vector (indexed like `probs`).
fn enumerate_sequences(probs: &[f64], n: u64) -> Vec<(Vec<u64>, f64)> {
    struct Walk<'a> {
        probs: &'a [f64],
        counts: Vec<u64>,
        // Count vectors packed base n + 1 when that fits in a u64.
        strides: Option<Vec<u64>>,
        packed: HashMap<u64, f64>,
        unpacked: HashMap<Vec<u64>, f64>,
    }

    impl Walk<'_> {
        fn go(&mut self, left: u64, key: u64, w: f64) {
            if left == 0 {
                match self.strides {
                    Some(_) => *self.packed.entry(key).or_insert(0.0) += w,
                    None => *self.unpacked.entry(self.counts.clone()).or_insert(0.0) += w,
                }
                return;
            }
            for k in 0..self.probs.len() {
                let step = self.strides.as_ref().map_or(0, |s| s[k]);
                self.counts[k] += 1;
                self.go(left - 1, key + step, w * self.probs[k]);
                self.counts[k] -= 1;
            }
        }
    }

    let strides = (n + 1)
        .checked_pow(probs.len() as u32)
        .map(|_| (0..probs.len() as u32).map(|k| (n + 1).pow(k)).collect());
    let mut walk = Walk {
        probs,
        counts: vec![0; probs.len()],
        strides,
        packed: HashMap::new(),
        unpacked: HashMap::new(),
    };
    walk.go(n, 0, 1.0);
    let unpack = |mut key: u64| {
        (0..probs.len())
            .map(|_| {
                let c = key % (n + 1);
                key /= n + 1;
                c
            })
            .collect::<Vec<u64>>()
    };
    walk.packed
        .into_iter()
        .map(|(key, w)| (unpack(key), w))
        .chain(walk.unpacked)
        .collect()
}

/// Calls `f` with every split of `remaining` into `parts[at..]`.
fn for_each_composition(remaining: u64, parts: &mut [u64], at: usize, f: &mut dyn FnMut(&[u64])) {
    if at + 1 == parts.len() {
        parts[at] = remaining;
        f(parts);
        return;
    }
    for c in 0..=remaining {
        parts[at] = c;
        for_each_composition(remaining - c, parts, at + 1, f);
    }
}

fn check_pair_and_epsilon(p: &JointDistribution, pair: (usize, usize), epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if pair.0 >= p.rows() || pair.1 >= p.cols() {
        return Err(Error::InvalidArgument(format!(
            "pair ({}, {}) outside a {}x{} distribution",
            pair.0,
            pair.1,
            p.rows(),
            p.cols()
        )));
    }
    Ok(())
}

/// Total weight of N-pair branches whose frequency of `pair` deviates from
/// `P[pair]` by more than `epsilon`.
///
/// The frequency of a single pair is binomial, so this is the two-sided
/// binomial tail outside `[N(q - ε), N(q + ε)]`, summed from log-gamma
/// based log-probabilities.
pub fn deviation_weight(
    p: &JointDistribution,
    n: u64,
    pair: (usize, usize),
    epsilon: f64,
) -> Result<f64> {
    check_pair_and_epsilon(p, pair, epsilon)?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let q = p.get(pair.0, pair.1);
    // Degenerate q: the count is certain.
    if q <= 0.0 || q >= 1.0 {
        let sure = if q <= 0.0 { 0 } else { n };
        return Ok(if is_deviant(sure, n, q, epsilon) { 1.0 } else { 0.0 });
    }
    let (ln_q, ln_1mq) = (q.ln(), (-q).ln_1p());
    let total = (0..=n)
        .filter(|&k| is_deviant(k, n, q, epsilon))
        .map(|k| (ln_binomial(n, k) + k as f64 * ln_q + (n - k) as f64 * ln_1mq).exp())
        .sum::<f64>();
    Ok(total.min(1.0))
}

/// The same deviant weight, read off a count distribution.
pub fn deviation_weight_from_distribution(
    dist: &WeightedCountDistribution,
    q: f64,
    pair: (usize, usize),
    epsilon: f64,
) -> f64 {
    dist.entries
        .iter()
        .filter(|(v, _)| is_deviant(v.get(pair.0, pair.1), dist.n, q, epsilon))
        .map(|(_, w)| w)
        .sum()
}

/// Per-trial empirical counts from i.i.d. sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTable {
    pub n: u64,
    pub seed: u64,
    pub trials: Vec<BranchCountVector>,
}

impl SampleTable {
    /// Mean relative frequency of `pair` across trials.
    pub fn mean_frequency(&self, pair: (usize, usize)) -> f64 {
        let sum: u64 = self.trials.iter().map(|t| t.get(pair.0, pair.1)).sum();
        sum as f64 / (self.n as f64 * self.trials.len() as f64)
    }
}

/// Draws `trials` independent runs of `n` pairs from `P`. Trial `t` uses the
/// ChaCha8 stream `t` under `seed`, so results do not depend on trial order.
pub fn sample_records(p: &JointDistribution, n: u64, trials: usize, seed: u64) -> Result<SampleTable> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let dist = WeightedIndex::new(p.probabilities())
        .map_err(|e| Error::InvalidArgument(format!("bad distribution: {e}")))?;
    let table = (0..trials)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut counts = vec![0u64; p.probabilities().len()];
            for _ in 0..n {
                counts[dist.sample(&mut rng)] += 1;
            }
            BranchCountVector::new(p.rows(), p.cols(), counts)
        })
        .collect();
    Ok(SampleTable {
        n,
        seed,
        trials: table,
    })
}
