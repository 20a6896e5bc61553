//! Two-observer EPR computation.
//!
//! Observer 1 measures particle 1 and observer 2 measures particle 2. The
//! whole-system state after both measurements is `sum K[i][j'] |a_i b_j'>`
//! with records `([a_i], [b_j'])`, and the joint outcome probability is
//! `|K[i][j']|^2`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, ComplexMatrix, Ket, ALGEBRA_TOL, PRODUCT_TOL};
use crate::relative_state::BranchedState;
use crate::{Error, Result};

/// Observable id reserved for the reference basis.
pub const REFERENCE_BASIS_ID: u32 = 0;

/// Amplitudes `C[i][j]` of a two-particle state `sum C[i][j] |a_i>|a_j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    matrix: ComplexMatrix,
}

impl CoefficientMatrix {
    /// Rejects matrices whose squared Frobenius norm is not 1 within 1e-12.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let norm_sqr = matrix.frobenius_sqr();
        if (norm_sqr - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(CoefficientMatrix { matrix })
    }

    /// Product state `|a_i>|a_j>`.
    pub fn product(d1: usize, d2: usize, i: usize, j: usize) -> Result<Self> {
        let ket = linalg::tensor(&Ket::basis(d1, i)?, &Ket::basis(d2, j)?)?;
        CoefficientMatrix::new(ComplexMatrix::new(d1, d2, ket.amplitudes().to_vec())?)
    }

    /// Haar-like random pure state of the pair, reproducible from `rng`.
    pub fn random_with(d1: usize, d2: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        let ket = linalg::random_ket_with(d1 * d2, rng)?;
        CoefficientMatrix::new(ComplexMatrix::new(d1, d2, ket.amplitudes().to_vec())?)
    }

    pub fn random(d1: usize, d2: usize, seed: u64) -> Result<Self> {
        CoefficientMatrix::random_with(d1, d2, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn d1(&self) -> usize {
        self.matrix.rows()
    }

    pub fn d2(&self) -> usize {
        self.matrix.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The joint ket `sum C[i][j] |i> ⊗ |j>` (row-major flattening).
    pub fn joint_ket(&self) -> Ket {
        Ket::new(self.matrix.entries().to_vec()).expect("coefficient entries are finite")
    }

    /// `e^{i phi} C`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        CoefficientMatrix {
            matrix: self.matrix.scale(Complex64::from_polar(1.0, phi)),
        }
    }

    /// `(sum_j |C[i][j]|^2)_i`, the side-1 marginal before any measurement.
    pub fn row_weights(&self) -> Vec<f64> {
        (0..self.d1())
            .map(|i| self.matrix.row(i).iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }
}

/// A measurement basis given by its overlap matrix with the reference basis,
/// `M[i][j] = <a_i|b_j>`. Column `j` holds the reference coordinates of `|b_j>`.
///
/// Two bases are the same observable iff their ids match; the matrices are
/// never compared.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableBasis {
    id: u32,
    overlap: ComplexMatrix,
}

impl ObservableBasis {
    /// Rejects non-square or non-unitary (tol 1e-10) overlap matrices.
    pub fn new(id: u32, overlap: ComplexMatrix) -> Result<Self> {
        let deviation = linalg::unitarity_deviation(&overlap)?;
        if deviation > PRODUCT_TOL {
            return Err(Error::NotUnitary {
                deviation,
                tol: PRODUCT_TOL,
            });
        }
        Ok(ObservableBasis { id, overlap })
    }

    pub fn reference(dim: usize) -> Result<Self> {
        ObservableBasis::new(REFERENCE_BASIS_ID, ComplexMatrix::identity(dim)?)
    }

    pub fn random(id: u32, dim: usize, seed: u64) -> Result<Self> {
        ObservableBasis::new(id, linalg::random_unitary(dim, seed)?)
    }

    pub fn random_with(id: u32, dim: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        ObservableBasis::new(id, linalg::random_unitary_with(dim, rng)?)
    }

    /// Same matrix under a different observable id.
    pub fn with_id(self, id: u32) -> Self {
        ObservableBasis { id, ..self }
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.overlap.rows()
    }

    pub fn overlap(&self) -> &ComplexMatrix {
        &self.overlap
    }

    /// `|b_j>` in reference coordinates.
    pub fn eigenket(&self, j: usize) -> Ket {
        self.overlap.column(j)
    }

    /// `<b_j|a_k>` for the reference index `k`.
    pub fn bra_overlap(&self, j: usize, k: usize) -> Complex64 {
        self.overlap.get(k, j).conj()
    }
}

/// Amplitude grid of the whole-system state after both local measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct KMatrix {
    matrix: ComplexMatrix,
}

impl KMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

/// Real row-major joint outcome distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    /// Entries must be non-negative and sum to 1 within 1e-12.
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ZeroDimension);
        }
        if probs.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: probs.len(),
            });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotNormalized { norm_sqr: total });
        }
        Ok(JointDistribution { rows, cols, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged probability rows".into()));
        }
        JointDistribution::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        self.probs[i * self.cols + j]
    }

    /// Row-major probabilities.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

/// Which observer's marginal to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// `K[i'][j'] = sum_ij C[i][j] conj(A[i][i']) conj(B[j][j'])`.
///
/// This is the only place where overlaps are conjugated: `<b_j'|a_j>` is
/// `conj(B[j][j'])`. With `basis_a` the reference basis it reduces to
/// `K[i][j'] = sum_j C[i][j] <b_j'|a_j>`. The two-sided form is an
/// extension used by the CHSH harness.
pub fn k_matrix(
    c: &CoefficientMatrix,
    basis_a: &ObservableBasis,
    basis_b: &ObservableBasis,
) -> Result<KMatrix> {
    let (d1, d2) = (c.d1(), c.d2());
    if basis_a.dim() != d1 {
        return Err(Error::DimensionMismatch {
            expected: d1,
            found: basis_a.dim(),
        });
    }
    if basis_b.dim() != d2 {
        return Err(Error::DimensionMismatch {
            expected: d2,
            found: basis_b.dim(),
        });
    }
    // First contract particle 2: T[i][j'] = sum_j C[i][j] <b_j'|a_j>.
    let mut half = vec![Complex64::new(0.0, 0.0); d1 * d2];
    for i in 0..d1 {
        for jp in 0..d2 {
            half[i * d2 + jp] = (0..d2).map(|j| c.get(i, j) * basis_b.bra_overlap(jp, j)).sum();
        }
    }
    let mut k = vec![Complex64::new(0.0, 0.0); d1 * d2];
    for ip in 0..d1 {
        for jp in 0..d2 {
            k[ip * d2 + jp] = (0..d1)
                .map(|i| basis_a.bra_overlap(ip, i) * half[i * d2 + jp])
                .sum();
        }
    }
    Ok(KMatrix {
        matrix: ComplexMatrix::new(d1, d2, k)?,
    })
}

/// `P[p][p'] = |K[p][p']|^2`.
pub fn joint_probability(k: &KMatrix) -> JointDistribution {
    JointDistribution {
        rows: k.rows(),
        cols: k.cols(),
        probs: k.matrix.entries().iter().map(|z| z.norm_sqr()).collect(),
    }
}

/// Row sums (`Side::First`) or column sums (`Side::Second`).
pub fn marginal(p: &JointDistribution, side: Side) -> Vec<f64> {
    match side {
        Side::First => (0..p.rows)
            .map(|i| (0..p.cols).map(|j| p.get(i, j)).sum())
            .collect(),
        Side::Second => (0..p.cols)
            .map(|j| (0..p.rows).map(|i| p.get(i, j)).sum())
            .collect(),
    }
}

/// Observer-1 marginals under several observer-2 basis choices.
#[derive(Clone, Debug, PartialEq)]
pub struct NoSignalingReport {
    /// One side-1 marginal per supplied basis, in input order.
    pub marginals: Vec<Vec<f64>>,
    /// Largest max-norm difference between any two marginals.
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn no_signaling_report(
    c: &CoefficientMatrix,
    bases_b: &[ObservableBasis],
    tol: f64,
) -> Result<NoSignalingReport> {
    if bases_b.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "no-signaling check needs at least 2 bases, got {}",
            bases_b.len()
        )));
    }
    let reference = ObservableBasis::reference(c.d1())?;
    let marginals = bases_b
        .iter()
        .map(|b| Ok(marginal(&joint_probability(&k_matrix(c, &reference, b)?), Side::First)))
        .collect::<Result<Vec<_>>>()?;
    let mut max_deviation: f64 = 0.0;
    for (x, m1) in marginals.iter().enumerate() {
        for m2 in &marginals[x + 1..] {
            for (a, b) in m1.iter().zip(m2) {
                max_deviation = max_deviation.max((a - b).abs());
            }
        }
    }
    Ok(NoSignalingReport {
        marginals,
        max_deviation,
        tol,
        pass: max_deviation <= tol,
    })
}

/// Summary of a seeded random no-signaling sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub trials: usize,
    pub dim: usize,
    pub seed: u64,
    /// Largest pairwise marginal deviation seen across all trials.
    pub max_deviation: f64,
    /// Largest deviation of any marginal from `sum_j |C[i][j]|^2`.
    pub max_identity_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Draws `trials` random `(C, B1, B2)` triples at dimension `dim` from one
/// seeded stream and runs [`no_signaling_report`] on each.
pub fn no_signaling_sweep(trials: usize, dim: usize, seed: u64, tol: f64) -> Result<SweepReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation: f64 = 0.0;
    let mut max_identity_deviation: f64 = 0.0;
    for _ in 0..trials {
        let c = CoefficientMatrix::random_with(dim, dim, &mut rng)?;
        let b1 = ObservableBasis::random_with(1, dim, &mut rng)?;
        let b2 = ObservableBasis::random_with(2, dim, &mut rng)?;
        let report = no_signaling_report(&c, &[b1, b2], tol)?;
        max_deviation = max_deviation.max(report.max_deviation);
        let expected = c.row_weights();
        for m in &report.marginals {
            for (a, b) in m.iter().zip(&expected) {
                max_identity_deviation = max_identity_deviation.max((a - b).abs());
            }
        }
    }
    Ok(SweepReport {
        trials,
        dim,
        seed,
        max_deviation,
        max_identity_deviation,
        tol,
        pass: max_deviation <= tol && max_identity_deviation <= tol,
    })
}

/// Observer 1 measures particle 1 in the reference basis, then observer 2
/// measures particle 2 in `basis_b`. Records are `([a_i], [b_j'])`.
pub fn run_epr(c: &CoefficientMatrix, basis_b: &ObservableBasis) -> Result<BranchedState> {
    let reference = ObservableBasis::reference(c.d1())?;
    BranchedState::from_coefficients(c)?
        .measure(0, 0, &reference)?
        .measure(1, 1, basis_b)
}

/// Arranges branch amplitudes into a `d1 x d2` grid keyed by the last record
/// of observers `observer_a` and `observer_b`. Pruned branches read as zero.
pub fn branch_amplitude_grid(
    state: &BranchedState,
    observer_a: usize,
    observer_b: usize,
) -> Result<ComplexMatrix> {
    let dims = state.particle_dims();
    if dims.len() < 2 {
        return Err(Error::InvalidArgument("need a two-particle state".into()));
    }
    let (d1, d2) = (dims[0], dims[1]);
    let mut grid = vec![Complex64::new(0.0, 0.0); d1 * d2];
    for branch in state.branches() {
        let a = branch.register(observer_a)?.last();
        let b = branch.register(observer_b)?.last();
        let (Some(a), Some(b)) = (a, b) else {
            return Err(Error::InvalidArgument(
                "every branch must carry a record for both observers".into(),
            ));
        };
        if a.index >= d1 || b.index >= d2 {
            return Err(Error::InvalidArgument("record index outside grid".into()));
        }
        grid[a.index * d2 + b.index] += branch.amplitude();
    }
    ComplexMatrix::new(d1, d2, grid)
}
