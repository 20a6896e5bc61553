//! Spin-1/2 singlet measured along `z` and along an axis `z'` tilted by `theta`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::epr::{
    joint_probability, k_matrix, CoefficientMatrix, JointDistribution, KMatrix, ObservableBasis,
};
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

/// Observable id used for the tilted `S_z'` analyzer basis.
pub const ROTATED_BASIS_ID: u32 = 1;

/// An analyzer angle in degrees.
///
/// The value is kept as given; reduction modulo 360 happens only in `Display`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct AngleDeg(f64);

impl AngleDeg {
    pub fn new(degrees: f64) -> Result<Self> {
        if !degrees.is_finite() {
            return Err(Error::InvalidArgument(format!("angle must be finite, got {degrees}")));
        }
        Ok(AngleDeg(degrees))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    /// The single degrees-to-radians conversion point.
    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

impl fmt::Display for AngleDeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0.rem_euclid(360.0))
    }
}

/// `(1/√2) [[0, 1], [-1, 0]]`.
pub fn singlet() -> CoefficientMatrix {
    let m = ComplexMatrix::from_real_rows(&[vec![0.0, FRAC_1_SQRT_2], vec![-FRAC_1_SQRT_2, 0.0]])
        .expect("2x2 literal");
    CoefficientMatrix::new(m).expect("singlet is normalized")
}

/// Overlaps `<S_z^i|S_z'^j>` for an analyzer tilted by `theta`:
/// `[[cos θ/2, -i sin θ/2], [-i sin θ/2, cos θ/2]]`.
pub fn rotation_overlap(theta: AngleDeg) -> ObservableBasis {
    let half = theta.radians() / 2.0;
    let (s, c) = half.sin_cos();
    let diag = Complex64::new(c, 0.0);
    let off = Complex64::new(0.0, -s);
    let m = ComplexMatrix::from_rows(&[vec![diag, off], vec![off, diag]]).expect("2x2 literal");
    ObservableBasis::new(ROTATED_BASIS_ID, m).expect("rotation overlap is unitary")
}

/// K-matrix of the singlet with observer 1 on `z` and observer 2 on `z'`.
pub fn singlet_k_matrix(theta: AngleDeg) -> KMatrix {
    let z = ObservableBasis::reference(2).expect("dim 2");
    k_matrix(&singlet(), &z, &rotation_overlap(theta)).expect("dimensions agree")
}

/// Joint distribution of `(S_z, S_z')` outcomes, computed through the K-matrix.
pub fn singlet_joint_probability(theta: AngleDeg) -> JointDistribution {
    joint_probability(&singlet_k_matrix(theta))
}

/// `E = P00 + P11 - P01 - P10`, which equals `-cos θ` for the singlet.
pub fn correlation(theta: AngleDeg) -> f64 {
    let p = singlet_joint_probability(theta);
    p.get(0, 0) + p.get(1, 1) - p.get(0, 1) - p.get(1, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn deg(x: f64) -> AngleDeg {
        AngleDeg::new(x).unwrap()
    }

    #[test]
    fn singlet_entries() {
        let c = singlet();
        assert_eq!(c.get(0, 1), Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_eq!(c.get(1, 0), Complex64::new(-FRAC_1_SQRT_2, 0.0));
        assert!((c.matrix().frobenius_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_overlap_special_angles() {
        let id = rotation_overlap(deg(0.0));
        assert_eq!(id.overlap(), &ComplexMatrix::identity(2).unwrap());

        let flip = rotation_overlap(deg(180.0));
        let expected = ComplexMatrix::from_rows(&[
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            vec![Complex64::new(0.0, -1.0), Complex64::new(0.0, 0.0)],
        ])
        .unwrap();
        assert!(flip.overlap().max_abs_diff(&expected).unwrap() < 1e-15);

        let quarter = rotation_overlap(deg(90.0));
        let h = 2f64.sqrt() / 2.0;
        let expected = ComplexMatrix::from_rows(&[
            vec![Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            vec![Complex64::new(0.0, -h), Complex64::new(h, 0.0)],
        ])
        .unwrap();
        assert!(quarter.overlap().max_abs_diff(&expected).unwrap() < 1e-15);
        assert!(linalg::is_unitary(quarter.overlap(), 1e-15).unwrap());
        assert!(linalg::is_unitary(rotation_overlap(deg(60.0)).overlap(), 1e-12).unwrap());
    }

    #[test]
    fn probabilities_at_reported_angles() {
        let cases = [
            (0.0, [[0.0, 0.5], [0.5, 0.0]]),
            (180.0, [[0.5, 0.0], [0.0, 0.5]]),
            (60.0, [[0.125, 0.375], [0.375, 0.125]]),
        ];
        for (theta, expected) in cases {
            let p = singlet_joint_probability(deg(theta));
            for (i, row) in expected.iter().enumerate() {
                for (j, want) in row.iter().enumerate() {
                    assert!(
                        (p.get(i, j) - want).abs() < 1e-12,
                        "theta {theta}: P[{i}][{j}] = {}",
                        p.get(i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn correlation_special_angles() {
        assert!((correlation(deg(0.0)) + 1.0).abs() < 1e-12);
        assert!(correlation(deg(90.0)).abs() < 1e-12);
        assert!((correlation(deg(180.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angle_validation_and_display() {
        assert!(AngleDeg::new(f64::NAN).is_err());
        assert!(AngleDeg::new(f64::INFINITY).is_err());
        let a = deg(-30.0);
        assert_eq!(a.degrees(), -30.0);
        assert_eq!(a.to_string(), "330°");
    }
}
