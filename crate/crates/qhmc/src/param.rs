//! Angle parameterization of the quantum state space.
//!
//! A state of a d-level system is written as rho = A^dagger A with A an
//! upper-triangular matrix whose entries live on a unit sphere, so every
//! angle vector maps to a physical state by construction. This module
//! builds the triangular factor, the density matrix, Bloch coordinates for
//! qubits, and the measure Jacobians that convert probability-space
//! densities into angle-space densities.

use crate::matrix::{C64, ComplexMatrix, DensityMatrix};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("dimension {dim} requires {expected} angles, got {got}")]
    BadDimension {
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("angles must be finite")]
    NonFiniteAngle,
    #[error("map output length {got} does not match the {expected} input coordinates")]
    BadOutputLength { expected: usize, got: usize },
    #[error("jacobian determinant is below 1e-14; the map is singular here")]
    SingularMap,
}

/// The S = d^2 - 1 angles parameterizing a d-level state.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleVector {
    dim: usize,
    angles: Vec<f64>,
}

impl AngleVector {
    pub fn new(dim: usize, angles: Vec<f64>) -> Result<Self, ParamError> {
        let expected = dim * dim - 1;
        if angles.len() != expected {
            return Err(ParamError::BadDimension {
                dim,
                expected,
                got: angles.len(),
            });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(ParamError::NonFiniteAngle);
        }
        Ok(Self { dim, angles })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Upper-triangular factor A with unit Frobenius norm and real diagonal.
#[derive(Clone, Debug)]
pub struct TriangularFactor {
    matrix: ComplexMatrix,
}

impl TriangularFactor {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Qubit Bloch coordinates (x, y, z) = (<sx>, <sy>, <sz>).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm_squared(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }
}

/// Spherical-to-Cartesian recursion:
/// C_1 = cos t_1, S_1 = sin t_1, C_k = S_{k-1} cos t_k, S_k = S_{k-1} sin t_k.
/// Returns (C_1, ..., C_n, S_n); the output has unit sum of squares.
pub fn spherical_cartesian(angles: &[f64]) -> Vec<f64> {
    assert!(!angles.is_empty(), "need at least one angle");
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut sin_prod = 1.0;
    for &t in angles {
        out.push(sin_prod * t.cos());
        sin_prod *= t.sin();
    }
    out.push(sin_prod);
    out
}

/// Number of spherical angles for dimension d: (d+2)(d-1)/2.
fn sphere_angle_count(d: usize) -> usize {
    (d + 2) * (d - 1) / 2
}

/// Builds the upper-triangular factor A from an angle vector.
///
/// The diagonal takes C_{k(k+1)/2} (and S at the last position), the
/// off-diagonal entry (j,k) takes C_m E_{m+n} with m = k(k-1)/2 + j and
/// n = (d+2)(d-1)/2 - (k-1), where E_k = exp(-i t_k). Indices here are the
/// 1-based ones of the assignment rule; the code shifts to 0-based storage.
pub fn build_factor(theta: &AngleVector) -> TriangularFactor {
    let d = theta.dim();
    let n_sph = sphere_angle_count(d);
    let coords = spherical_cartesian(&theta.angles()[..n_sph]);
    // coords[k-1] = C_k for 1 <= k <= n_sph; coords[n_sph] = S_{n_sph}.
    let c = |k: usize| coords[k - 1];
    let s_last = coords[n_sph];
    let phase = |k: usize| {
        let t = theta.angles()[k - 1];
        C64::new(t.cos(), -t.sin())
    };

    let matrix = ComplexMatrix::from_fn(d, |i0, j0| {
        let (j, k) = (i0 + 1, j0 + 1); // row j, column k, 1-based
        if j > k {
            C64::new(0.0, 0.0)
        } else if j == k && k < d {
            C64::new(c(k * (k + 1) / 2), 0.0)
        } else if j == k {
            C64::new(s_last, 0.0)
        } else {
            let m = k * (k - 1) / 2 + j;
            let n = n_sph - (k - 1);
            phase(m + n) * C64::new(c(m), 0.0)
        }
    });
    TriangularFactor { matrix }
}

/// rho = A^dagger A; physical for every finite angle vector.
pub fn build_density(theta: &AngleVector) -> DensityMatrix {
    let a = build_factor(theta);
    let rho = a.matrix().dagger().mul(a.matrix());
    DensityMatrix::try_new(rho).expect("A^dagger A is a density matrix by construction")
}

/// Bloch coordinates of a qubit angle vector:
/// x = sin(2t1) cos t2 cos t3, y = sin(2t1) cos t2 sin t3, z = cos(2t1).
pub fn bloch_from_angles(theta: &AngleVector) -> Result<BlochVector, ParamError> {
    if theta.dim() != 2 {
        return Err(ParamError::BadDimension {
            dim: 2,
            expected: 3,
            got: theta.angles().len(),
        });
    }
    let t = theta.angles();
    Ok(bloch_from_qubit_angles(t[0], t[1], t[2]))
}

pub(crate) fn bloch_from_qubit_angles(t1: f64, t2: f64, t3: f64) -> BlochVector {
    let s = (2.0 * t1).sin();
    BlochVector {
        x: s * t2.cos() * t3.cos(),
        y: s * t2.cos() * t3.sin(),
        z: (2.0 * t1).cos(),
    }
}

/// Measure factor |sin(2t1)^3 sin(2t2)| for the full qubit Bloch ball.
pub fn jacobian_qubit_full(t1: f64, t2: f64) -> f64 {
    ((2.0 * t1).sin().powi(3) * (2.0 * t2).sin()).abs()
}

/// Measure factor |sin(2t2)| for the equatorial-plane reconstruction space.
pub fn jacobian_equatorial(t2: f64) -> f64 {
    (2.0 * t2).sin().abs()
}

/// Measure factor |sin(4t1)| for the upper-hemisphere reconstruction space.
pub fn jacobian_hemisphere(t1: f64) -> f64 {
    (4.0 * t1).sin().abs()
}

/// Finite-difference step per coordinate: base h scaled by (1 + |t_s|).
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Absolute determinant of the central finite-difference Jacobian of `map`
/// at `theta`. The map must output exactly as many coordinates as it takes.
/// Determinants below 1e-14 are reported as `SingularMap`; use
/// [`numeric_jacobian_raw`] when legitimately tiny values are expected
/// (high-dimensional measure factors shrink fast).
pub fn numeric_jacobian(
    map: &dyn Fn(&[f64]) -> Vec<f64>,
    theta: &[f64],
    h: f64,
) -> Result<f64, ParamError> {
    let det = numeric_jacobian_raw(map, theta, h)?;
    if det < 1e-14 {
        return Err(ParamError::SingularMap);
    }
    Ok(det)
}

/// Like [`numeric_jacobian`] but without the singularity floor.
pub fn numeric_jacobian_raw(
    map: &dyn Fn(&[f64]) -> Vec<f64>,
    theta: &[f64],
    h: f64,
) -> Result<f64, ParamError> {
    let s = theta.len();
    let mut jac = DMatrix::<f64>::zeros(s, s);
    let mut work = theta.to_vec();
    for col in 0..s {
        let step = h * (1.0 + theta[col].abs());
        work[col] = theta[col] + step;
        let plus = map(&work);
        work[col] = theta[col] - step;
        let minus = map(&work);
        work[col] = theta[col];
        if plus.len() != s || minus.len() != s {
            return Err(ParamError::BadOutputLength {
                expected: s,
                got: plus.len(),
            });
        }
        for row in 0..s {
            jac[(row, col)] = (plus[row] - minus[row]) / (2.0 * step);
        }
    }
    Ok(jac.determinant().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn qubit(angles: [f64; 3]) -> AngleVector {
        AngleVector::new(2, angles.to_vec()).unwrap()
    }

    #[test]
    fn spherical_cartesian_base_cases() {
        let out = spherical_cartesian(&[0.0]);
        assert_abs_diff_eq!(out[0], 1.0);
        assert_abs_diff_eq!(out[1], 0.0);

        let out = spherical_cartesian(&[FRAC_PI_4, FRAC_PI_2]);
        assert_abs_diff_eq!(out[0], (2.0f64).sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[2], (2.0f64).sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn spherical_cartesian_unit_norm() {
        let out = spherical_cartesian(&[0.3, 1.1, -0.4, 2.2, 0.9]);
        assert_eq!(out.len(), 6);
        let norm2: f64 = out.iter().map(|c| c * c).sum();
        assert_abs_diff_eq!(norm2, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn build_factor_d2_maximally_mixed() {
        let a = build_factor(&qubit([FRAC_PI_4, FRAC_PI_2, 0.7]));
        let r = (2.0f64).sqrt() / 2.0;
        assert_abs_diff_eq!(a.matrix().get(0, 0).re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(a.matrix().get(0, 1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.matrix().get(1, 1).re, r, epsilon = 1e-15);
        let rho = build_density(&qubit([FRAC_PI_4, FRAC_PI_2, 0.0]));
        assert_abs_diff_eq!(rho.matrix().get(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix().get(0, 1).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn build_factor_d2_pure_pole() {
        // t1 = 0 kills every later coordinate; the state is pure with z = 1.
        let a = build_factor(&qubit([0.0, 0.3, 0.9]));
        assert_abs_diff_eq!(a.matrix().get(0, 0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.matrix().get(1, 1).re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.matrix().get(0, 1).norm(), 0.0, epsilon = 1e-15);
        let b = bloch_from_angles(&qubit([0.0, 0.3, 0.9])).unwrap();
        assert_abs_diff_eq!(b.z, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn build_factor_d3_layout() {
        // Middle matrix of the d = 2, 3, 4 display:
        // diagonal C1, C3, S5; off-diagonal C2 E6, C4 E7, C5 E8.
        let angles: Vec<f64> = vec![0.3, 0.5, 0.7, 0.9, 1.1, 0.2, 0.4, 0.6];
        let theta = AngleVector::new(3, angles.clone()).unwrap();
        let coords = spherical_cartesian(&angles[..5]);
        let e = |k: usize| C64::new(angles[k - 1].cos(), -angles[k - 1].sin());
        let a = build_factor(&theta);
        let m = a.matrix();
        assert_abs_diff_eq!(m.get(0, 0).re, coords[0], epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 1).re, coords[2], epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(2, 2).re, coords[5], epsilon = 1e-15);
        assert_abs_diff_eq!((m.get(0, 1) - e(6) * coords[1]).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((m.get(0, 2) - e(7) * coords[3]).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((m.get(1, 2) - e(8) * coords[4]).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 0).norm(), 0.0);
        assert_abs_diff_eq!(m.get(2, 0).norm(), 0.0);
        assert_abs_diff_eq!(m.get(2, 1).norm(), 0.0);
    }

    #[test]
    fn bloch_from_angles_examples() {
        let b = bloch_from_angles(&qubit([FRAC_PI_4, 0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(b.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.z, 0.0, epsilon = 1e-15);

        let b = bloch_from_angles(&qubit([0.0, 1.3, -2.1])).unwrap();
        assert_abs_diff_eq!(b.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.z, 1.0, epsilon = 1e-15);

        let b = bloch_from_angles(&qubit([FRAC_PI_4, FRAC_PI_2, 0.0])).unwrap();
        assert_abs_diff_eq!(b.norm_squared(), 0.0, epsilon = 1e-30);
    }

    #[test]
    fn bloch_agrees_with_pauli_expectations_of_density() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let th = qubit([
                rng.random::<f64>() * PI,
                rng.random::<f64>() * PI,
                rng.random::<f64>() * 2.0 * PI,
            ]);
            let rho = build_density(&th);
            let b = bloch_from_angles(&th).unwrap();
            let r01 = rho.matrix().get(0, 1);
            let z = rho.matrix().get(0, 0).re - rho.matrix().get(1, 1).re;
            assert_abs_diff_eq!(2.0 * r01.re, b.x, epsilon = 1e-12);
            assert_abs_diff_eq!(-2.0 * r01.im, b.y, epsilon = 1e-12);
            assert_abs_diff_eq!(z, b.z, epsilon = 1e-12);
        }
    }

    #[test]
    fn jacobian_values() {
        assert_abs_diff_eq!(jacobian_qubit_full(FRAC_PI_4, FRAC_PI_4), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jacobian_qubit_full(0.0, 1.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            jacobian_qubit_full(PI / 8.0, FRAC_PI_4),
            2.0f64.powf(-1.5),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(jacobian_equatorial(FRAC_PI_4), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jacobian_equatorial(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jacobian_equatorial(PI / 8.0), 2.0f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jacobian_hemisphere(PI / 8.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jacobian_hemisphere(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jacobian_hemisphere(PI / 16.0), 2.0f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    fn bloch_map(t: &[f64]) -> Vec<f64> {
        let b = bloch_from_qubit_angles(t[0], t[1], t[2]);
        vec![b.x, b.y, b.z]
    }

    #[test]
    fn numeric_jacobian_matches_analytic_qubit_measure() {
        let theta = [PI / 8.0, FRAC_PI_4, 0.3];
        let num = numeric_jacobian(&bloch_map, &theta, 1e-5).unwrap();
        let exact = jacobian_qubit_full(theta[0], theta[1]);
        assert!((num - exact).abs() / exact < 1e-6, "{num} vs {exact}");
    }

    #[test]
    fn numeric_jacobian_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 100 {
            let theta = [
                rng.random::<f64>() * PI,
                rng.random::<f64>() * PI,
                rng.random::<f64>() * 2.0 * PI,
            ];
            let exact = jacobian_qubit_full(theta[0], theta[1]);
            if exact < 1e-3 {
                continue; // skip near-singular points of the measure
            }
            let num = numeric_jacobian(&bloch_map, &theta, DEFAULT_FD_STEP).unwrap();
            assert!((num - exact).abs() / exact < 1e-6, "{num} vs {exact}");
            checked += 1;
        }
    }

    #[test]
    fn numeric_jacobian_exact_on_linear_map() {
        let m = [[2.0, 1.0, 0.0], [0.5, -1.0, 3.0], [0.0, 2.0, 1.0]];
        let map = move |t: &[f64]| {
            (0..3)
                .map(|i| (0..3).map(|j| m[i][j] * t[j]).sum())
                .collect::<Vec<f64>>()
        };
        let det = numeric_jacobian(&map, &[0.4, -1.2, 2.0], 1e-5).unwrap();
        // |det M| = |2(-1-6) - 1(0.5-0) + 0| = 14.5
        assert_abs_diff_eq!(det, 14.5, epsilon = 1e-10);
    }

    #[test]
    fn numeric_jacobian_singular_on_constant_map() {
        let map = |_: &[f64]| vec![1.0, 2.0, 3.0];
        assert_eq!(
            numeric_jacobian(&map, &[0.1, 0.2, 0.3], 1e-5),
            Err(ParamError::SingularMap)
        );
    }

    proptest! {
        #[test]
        fn factor_has_unit_frobenius_norm(
            angles in proptest::collection::vec(-10.0f64..10.0, 15)
        ) {
            let theta = AngleVector::new(4, angles).unwrap();
            let a = build_factor(&theta);
            let mut norm2 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    norm2 += a.matrix().get(i, j).norm_sqr();
                }
            }
            prop_assert!((norm2 - 1.0).abs() < 1e-12);
        }

        #[test]
        fn density_is_physical_and_periodic(
            angles in proptest::collection::vec(-10.0f64..10.0, 15),
            shift_at in 0usize..15
        ) {
            let theta = AngleVector::new(4, angles.clone()).unwrap();
            let rho = build_density(&theta);
            prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            prop_assert!(rho.matrix().min_eigenvalue().unwrap() >= -1e-10);

            let mut shifted = angles;
            shifted[shift_at] += 2.0 * PI;
            let rho2 = build_density(&AngleVector::new(4, shifted).unwrap());
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!(
                        (rho.matrix().get(i, j) - rho2.matrix().get(i, j)).norm() < 1e-12
                    );
                }
            }
        }

        #[test]
        fn bloch_norm_identity(t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, t3 in -3.0f64..3.0) {
            let b = bloch_from_qubit_angles(t1, t2, t3);
            let expected = 1.0 - ((2.0 * t1).sin() * t2.sin()).powi(2);
            prop_assert!((b.norm_squared() - expected).abs() < 1e-12);
        }
    }
}
