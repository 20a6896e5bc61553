//! Minimal dense complex linear algebra.
//!
//! Everything here is tiny (dimensions up to a few dozen), so kets and
//! matrices are plain row-major `Vec<Complex64>` values with no views or
//! sparse forms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Tolerance for algebraic identities (normalization, conjugate symmetry).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for accumulated products (unitarity of generated matrices).
pub const PRODUCT_TOL: f64 = 1e-10;
/// Default cap on the number of amplitudes a tensor product may produce.
pub const DEFAULT_TENSOR_CAPACITY: usize = 1 << 20;

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// A column of complex amplitudes over an indexed orthonormal reference basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: Vec<Complex64>,
}

impl Ket {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::ZeroDimension);
        }
        check_finite(&amps)?;
        Ok(Ket { amps })
    }

    /// Builds a ket from real amplitudes.
    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Ket::new(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The reference basis vector `e_index` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if index >= dim {
            return Err(Error::SlotOutOfRange {
                kind: "basis",
                index,
                count: dim,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Ket { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Returns the unit ket along `self`; the zero ket is rejected.
    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm_sqr: 0.0 });
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Ket {
        Ket {
            amps: self.amps.iter().map(|z| z * c).collect(),
        }
    }

    /// `self + other`, dimensions must agree.
    pub fn add(&self, other: &Ket) -> Result<Ket> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let amps = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a + b)
            .collect();
        Ket::new(amps)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Ket) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `<u|v> = sum_k conj(u_k) v_k`.
pub fn inner(u: &Ket, v: &Ket) -> Result<Complex64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum())
}

/// Kronecker product with the default amplitude cap.
pub fn tensor(u: &Ket, v: &Ket) -> Result<Ket> {
    tensor_with_capacity(u, v, DEFAULT_TENSOR_CAPACITY)
}

/// Kronecker product; entry `(i, j)` lands at `i * v.dim() + j`.
pub fn tensor_with_capacity(u: &Ket, v: &Ket, capacity: usize) -> Result<Ket> {
    let requested = (u.dim() as u128) * (v.dim() as u128);
    if requested > capacity as u128 {
        return Err(Error::Capacity {
            what: "tensor product amplitudes",
            requested,
            limit: capacity as u128,
        });
    }
    let mut amps = Vec::with_capacity(requested as usize);
    for a in &u.amps {
        for b in &v.amps {
            amps.push(a * b);
        }
    }
    Ok(Ket { amps })
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ZeroDimension);
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        check_finite(&entries)?;
        Ok(ComplexMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        ComplexMatrix::new(rows.len(), cols, entries)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = ComplexMatrix::zeros(n, n)?;
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        ComplexMatrix::new(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entry `(i, j)`. Panics when out of range, like slice indexing.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Ket {
        Ket {
            amps: (0..self.rows).map(|i| self.get(i, j)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).conj());
            }
        }
        ComplexMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    entries[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    /// Matrix-vector product `M u`.
    pub fn apply(&self, u: &Ket) -> Result<Ket> {
        if self.cols != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: u.dim(),
            });
        }
        let amps = (0..self.rows)
            .map(|i| self.row(i).iter().zip(&u.amps).map(|(a, b)| a * b).sum())
            .collect();
        Ok(Ket { amps })
    }

    /// Sum of squared moduli of all entries.
    pub fn frobenius_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.entries.len(),
                found: other.entries.len(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Max-entry deviation of `M†M` from the identity.
pub fn unitarity_deviation(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let gram = m.adjoint().matmul(m)?;
    ComplexMatrix::identity(m.rows)?.max_abs_diff(&gram)
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(unitarity_deviation(m)? <= tol)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Draws a normalized ket with i.i.d. complex Gaussian components.
pub fn random_ket_with(dim: usize, rng: &mut ChaCha8Rng) -> Result<Ket> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    loop {
        let ket = Ket::new((0..dim).map(|_| gaussian(rng)).collect())?;
        if ket.norm() > 1e-8 {
            return ket.normalized();
        }
    }
}

pub fn random_ket(dim: usize, seed: u64) -> Result<Ket> {
    random_ket_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Seeded unitary: modified Gram-Schmidt over the columns of a complex
/// Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    random_unitary_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_unitary_with(dim: usize, rng: &mut ChaCha8Rng) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
        for q in &columns {
            let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, qk) in v.iter_mut().zip(q) {
                *x -= proj * qk;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // Degenerate draws have probability zero; redraw if one happens.
        if norm < 1e-8 {
            continue;
        }
        columns.push(v.into_iter().map(|z| z / norm).collect());
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for col in &columns {
            entries.push(col[i]);
        }
    }
    ComplexMatrix::new(dim, dim, entries)
}
