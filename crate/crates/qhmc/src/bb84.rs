//! Double-crosshair POM of BB84 for a qubit pair.
//!
//! The sixteen joint probabilities p_jk leave one state parameter free: the
//! correlation q = <sz x sz>. Positivity of the state pins q to an interval
//! [q_min(p), q_max(p)]. Sampling runs over nine angles (the real-factor
//! restriction of the general parameterization); marginalizing the
//! auxiliary q is done by importance weights 1/(q_max - q_min).
//!
//! The reconstruction space consists of real symmetric matrices in a basis
//! built from the +-x eigenstates (with a phase on the second vector so the
//! crosshair effects and sz x sz come out real). `recon_to_physical`
//! converts to the computational basis.

use crate::matrix::{C64, ComplexMatrix};
use crate::param::{numeric_jacobian_raw, DEFAULT_FD_STEP};
use crate::targets::{CountData, TargetDensity, TargetError};
use crate::engine::SampleSet;
use nalgebra::{Matrix2, Matrix4};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Bb84Error {
    #[error("probabilities violate the double-crosshair constraints: {0}")]
    ConstraintViolation(String),
    #[error("no q value makes the state positive semidefinite")]
    NotPhysical,
    #[error("sample set carries no auxiliary q values")]
    MissingAux,
}

/// The fixed direction sigma_z x sigma_z takes in the reconstruction basis.
fn sigma_real() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    )
}

/// Same matrix as a complex matrix, for callers working with operators.
pub fn sigma_matrix() -> ComplexMatrix {
    let s = sigma_real();
    ComplexMatrix::from_fn(4, |i, j| C64::new(s[(i, j)], 0.0))
}

/// Permissible range of the unmeasured correlation q.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QInterval {
    pub q_min: f64,
    pub q_max: f64,
}

impl QInterval {
    pub fn width(&self) -> f64 {
        self.q_max - self.q_min
    }

    pub fn contains(&self, q: f64, slack: f64) -> bool {
        q >= self.q_min - slack && q <= self.q_max + slack
    }
}

/// Joint probabilities p_jk of the double-crosshair POM, j for the first
/// qubit and k for the second, both 1-based in {1..4}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bb84Probabilities {
    p: [[f64; 4]; 4],
}

const LIN_TOL: f64 = 1e-10;

impl Bb84Probabilities {
    /// Validates and wraps a flat row-major table (index 4*(j-1) + (k-1)).
    pub fn new(flat: [f64; 16]) -> Result<Self, Bb84Error> {
        let mut p = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in 0..4 {
                p[j][k] = flat[4 * j + k];
            }
        }
        let out = Self { p };
        out.check_linear()?;
        for j in 0..4 {
            for k in 0..4 {
                if p[j][k] < -1e-12 {
                    return Err(Bb84Error::ConstraintViolation(format!(
                        "p[{}][{}] = {} is negative",
                        j + 1,
                        k + 1,
                        p[j][k]
                    )));
                }
            }
        }
        Ok(out)
    }

    fn check_linear(&self) -> Result<(), Bb84Error> {
        let p = &self.p;
        let sum: f64 = p.iter().flatten().sum();
        if (sum - 1.0).abs() > LIN_TOL {
            return Err(Bb84Error::ConstraintViolation(format!("sum {} != 1", sum)));
        }
        for j in 0..4 {
            let row = p[j][0] + p[j][2] - p[j][1] - p[j][3];
            if row.abs() > LIN_TOL {
                return Err(Bb84Error::ConstraintViolation(format!(
                    "row {} pair sums differ by {}",
                    j + 1,
                    row
                )));
            }
        }
        for k in 0..4 {
            let col = p[0][k] + p[2][k] - p[1][k] - p[3][k];
            if col.abs() > LIN_TOL {
                return Err(Bb84Error::ConstraintViolation(format!(
                    "column {} pair sums differ by {}",
                    k + 1,
                    col
                )));
            }
        }
        Ok(())
    }

    pub fn uniform() -> Self {
        Self {
            p: [[1.0 / 16.0; 4]; 4],
        }
    }

    /// p_jk with 1-based indices.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.p[j - 1][k - 1]
    }

    pub fn flat(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for j in 0..4 {
            for k in 0..4 {
                out[4 * j + k] = self.p[j][k];
            }
        }
        out
    }

    fn p_even(&self) -> f64 {
        self.get(2, 2) - self.get(2, 4) - self.get(4, 2) + self.get(4, 4)
    }
}

// ---------------------------------------------------------------------------
// Reconstruction-space operators
// ---------------------------------------------------------------------------

/// Crosshair effects (+x, +y, -x, -y) for one qubit, written in the
/// reconstruction basis where they are real.
fn crosshair_effects_recon() -> [Matrix2<f64>; 4] {
    let i = Matrix2::identity();
    let sz = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let sx = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    [
        (i + sz) * 0.25,
        (i - sx) * 0.25,
        (i - sz) * 0.25,
        (i + sx) * 0.25,
    ]
}

/// Joint effect matrices in the reconstruction basis; the first-qubit index
/// runs fastest, so the second qubit's factor sits on the slow side of the
/// Kronecker product.
fn joint_effects_recon() -> [[Matrix4<f64>; 4]; 4] {
    let eff = crosshair_effects_recon();
    std::array::from_fn(|j| std::array::from_fn(|k| eff[k].kronecker(&eff[j])))
}

fn probs_from_recon(rho: &Matrix4<f64>, effects: &[[Matrix4<f64>; 4]; 4]) -> [[f64; 4]; 4] {
    std::array::from_fn(|j| std::array::from_fn(|k| (rho * effects[j][k]).trace()))
}

fn q_from_recon(rho: &Matrix4<f64>) -> f64 {
    (rho * sigma_real()).trace()
}

// ---------------------------------------------------------------------------
// Reconstruction family rho(q) = rho0 + (q/4) Sigma
// ---------------------------------------------------------------------------

fn rho0_real(p: &Bb84Probabilities) -> Matrix4<f64> {
    // In this basis the +-y effects carry -sigma_x per qubit, so the single
    // coherences come with a minus sign: p_{2k} - p_{4k} = -rho_{...}/2.
    let pe = p.p_even();
    let d21 = -2.0 * (p.get(2, 1) - p.get(4, 1));
    let d12 = -2.0 * (p.get(1, 2) - p.get(1, 4));
    let d32 = -2.0 * (p.get(3, 2) - p.get(3, 4));
    let d23 = -2.0 * (p.get(2, 3) - p.get(4, 3));
    Matrix4::new(
        4.0 * p.get(1, 1), d21, d12, pe, //
        d21, 4.0 * p.get(3, 1), pe, d32, //
        d12, pe, 4.0 * p.get(1, 3), d23, //
        pe, d32, d23, 4.0 * p.get(3, 3),
    )
}

/// The probability-determined part rho0 of the reconstruction family.
pub fn rho0_from_probs(p: &Bb84Probabilities) -> ComplexMatrix {
    let r = rho0_real(p);
    ComplexMatrix::from_fn(4, |i, j| C64::new(r[(i, j)], 0.0))
}

fn rho_of_q_real(p: &Bb84Probabilities, q: f64) -> Matrix4<f64> {
    rho0_real(p) + sigma_real() * (q / 4.0)
}

/// rho = rho0 + (q/4) Sigma in the reconstruction basis.
pub fn rho_of_q(p: &Bb84Probabilities, q: f64) -> ComplexMatrix {
    let r = rho_of_q_real(p, q);
    ComplexMatrix::from_fn(4, |i, j| C64::new(r[(i, j)], 0.0))
}

fn min_eig4(m: &Matrix4<f64>) -> f64 {
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Coefficients (ascending in q) of det rho(q), a quartic in q. Determined
/// by evaluating the determinant at five points and solving the
/// interpolation system, which is exact for a quartic.
pub fn det_quartic(p: &Bb84Probabilities) -> [f64; 5] {
    let nodes = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut vander = nalgebra::Matrix5::<f64>::zeros();
    let mut rhs = nalgebra::Vector5::<f64>::zeros();
    for (i, &q) in nodes.iter().enumerate() {
        let mut pow = 1.0;
        for j in 0..5 {
            vander[(i, j)] = pow;
            pow *= q;
        }
        rhs[i] = rho_of_q_real(p, q).determinant();
    }
    let coeffs = vander
        .lu()
        .solve(&rhs)
        .expect("distinct interpolation nodes");
    [coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4]]
}

fn eval_poly(c: &[f64; 5], q: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * q + ck)
}

fn eval_poly_deriv(c: &[f64; 5], q: f64) -> f64 {
    (1..5).rev().fold(0.0, |acc, k| acc * q + k as f64 * c[k])
}

/// q interval from the second and third sorted real roots of the quartic,
/// clamped to [-1, 1]. Used as a cross-check for `q_bounds`.
pub fn q_bounds_from_quartic(p: &Bb84Probabilities) -> Option<QInterval> {
    let c = det_quartic(p);
    // Companion matrix of the monic quartic.
    let a: Vec<f64> = (0..4).map(|k| c[k] / c[4]).collect();
    let comp = Matrix4::new(
        0.0, 0.0, 0.0, -a[0], //
        1.0, 0.0, 0.0, -a[1], //
        0.0, 1.0, 0.0, -a[2], //
        0.0, 0.0, 1.0, -a[3],
    );
    let eig = comp.complex_eigenvalues();
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() < 1e-5)
        .map(|z| {
            // Newton polish on the exact polynomial.
            let mut r = z.re;
            for _ in 0..6 {
                let d = eval_poly_deriv(&c, r);
                if d.abs() < 1e-300 {
                    break;
                }
                r -= eval_poly(&c, r) / d;
            }
            r
        })
        .collect();
    if roots.len() != 4 {
        return None;
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    Some(QInterval {
        q_min: roots[1].clamp(-1.0, 1.0),
        q_max: roots[2].clamp(-1.0, 1.0),
    })
}

fn bisect_boundary(
    g: &impl Fn(f64) -> f64,
    mut feasible: f64,
    mut infeasible: f64,
    tol: f64,
) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (feasible + infeasible);
        if g(mid) >= tol {
            feasible = mid;
        } else {
            infeasible = mid;
        }
        if (feasible - infeasible).abs() < 1e-13 {
            break;
        }
    }
    feasible
}

fn q_bounds_from_feasible(g: &impl Fn(f64) -> f64, q_feasible: f64, tol: f64) -> QInterval {
    let q_min = if g(-1.0) >= tol {
        -1.0
    } else {
        bisect_boundary(g, q_feasible, -1.0, tol)
    };
    let q_max = if g(1.0) >= tol {
        1.0
    } else {
        bisect_boundary(g, q_feasible, 1.0, tol)
    };
    QInterval { q_min, q_max }
}

fn q_bounds_impl(rho0: &Matrix4<f64>) -> Result<QInterval, Bb84Error> {
    let sigma = sigma_real();
    let g = |q: f64| min_eig4(&(rho0 + sigma * (q / 4.0)));

    // g is concave in q (minimum eigenvalue of an affine symmetric family),
    // hence unimodal on [-1, 1]; ternary search finds its maximum without a
    // grid, which matters for nearly pure states whose feasible interval
    // can be arbitrarily narrow.
    let mut lo = -1.0;
    let mut hi = 1.0;
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if g(m1) < g(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let q_star = 0.5 * (lo + hi);
    let g_star = g(q_star);
    if g_star < -1e-9 {
        return Err(Bb84Error::NotPhysical);
    }
    let tol = (-1e-12f64).min(g_star);
    Ok(q_bounds_from_feasible(&g, q_star, tol))
}

/// Maximal interval of q on which rho(q) is positive semidefinite, found by
/// bisection on the smallest eigenvalue.
pub fn q_bounds(p: &Bb84Probabilities) -> Result<QInterval, Bb84Error> {
    q_bounds_impl(&rho0_real(p))
}

/// Like `q_bounds`, but seeded with a q value already known to be feasible
/// (as every sampled point's own q is); skips the grid search.
pub fn q_bounds_with_hint(p: &Bb84Probabilities, q_hint: f64) -> Result<QInterval, Bb84Error> {
    let rho0 = rho0_real(p);
    let sigma = sigma_real();
    let g = |q: f64| min_eig4(&(rho0 + sigma * (q / 4.0)));
    let gh = g(q_hint);
    if gh < -1e-9 {
        return q_bounds_impl(&rho0);
    }
    let tol = (-1e-12f64).min(gh);
    Ok(q_bounds_from_feasible(&g, q_hint, tol))
}

/// True iff some q makes rho(q) positive semidefinite.
pub fn physicality_check(p: &Bb84Probabilities) -> bool {
    q_bounds(p).is_ok()
}

/// Physicality check for a raw probability table that satisfies the linear
/// constraints; entries outside [0,1] are allowed in and will simply fail.
pub fn physicality_check_flat(flat: &[f64; 16]) -> Result<bool, Bb84Error> {
    let mut p = [[0.0; 4]; 4];
    for j in 0..4 {
        for k in 0..4 {
            p[j][k] = flat[4 * j + k];
        }
    }
    let probs = Bb84Probabilities { p };
    probs.check_linear()?;
    Ok(q_bounds_impl(&rho0_real(&probs)).is_ok())
}

// ---------------------------------------------------------------------------
// Nine-angle auxiliary parameterization
// ---------------------------------------------------------------------------

/// The nine angles of the real-factor restriction (all six phases pinned).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NineAngleState(pub [f64; 9]);

fn nine_rho(theta: &[f64]) -> Matrix4<f64> {
    // Real restriction of the triangular factor (all six phases pinned to
    // zero), written out directly because this sits in the sampler's inner
    // loop. `nine_rho_matches_general_factor` pins it to the general route.
    let c = crate::param::spherical_cartesian(&theta[..9]);
    let a = Matrix4::new(
        c[0], c[1], c[3], c[6], //
        0.0, c[2], c[4], c[7], //
        0.0, 0.0, c[5], c[8], //
        0.0, 0.0, 0.0, c[9],
    );
    a.transpose() * a
}

/// Maps nine angles to the joint probabilities and the correlation q.
pub fn nine_angle_map(state: &NineAngleState) -> (Bb84Probabilities, f64) {
    let rho = nine_rho(&state.0);
    let effects = joint_effects_recon();
    let p = Bb84Probabilities {
        p: probs_from_recon(&rho, &effects),
    };
    (p, q_from_recon(&rho))
}

/// The nine independent coordinates used for the measure Jacobian: seven
/// probability combinations, the even-parity combination carrying
/// <sy x sy>, and q. Any affinely independent choice differs only by a
/// constant factor, which the density drops anyway.
fn independent_coords(rho: &Matrix4<f64>) -> Vec<f64> {
    vec![
        rho[(0, 0)] / 4.0,                 // p11
        rho[(1, 1)] / 4.0,                 // p31
        rho[(2, 2)] / 4.0,                 // p13
        (rho[(0, 3)] + rho[(1, 2)]) / 2.0, // p_even
        -rho[(0, 1)] / 2.0,                // p21 - p41
        -rho[(0, 2)] / 2.0,                // p12 - p14
        -rho[(1, 3)] / 2.0,                // p32 - p34
        -rho[(2, 3)] / 2.0,                // p23 - p43
        2.0 * (rho[(1, 2)] - rho[(0, 3)]), // q
    ]
}

/// Posterior target over the nine angles: log w = log |measure Jacobian|
/// + sum n_jk log p_jk, with the force by finite differences. Counts are
/// indexed 4*(j-1) + (k-1).
pub fn bb84_target(counts: &CountData) -> Result<TargetDensity, TargetError> {
    if counts.len() != 16 {
        return Err(TargetError::BadCountLength {
            expected: 16,
            got: counts.len(),
        });
    }
    let n: [f64; 16] = counts.values().try_into().unwrap();
    let effects = Arc::new(joint_effects_recon());
    let map9 = |t: &[f64]| independent_coords(&nine_rho(t));

    let eff = effects.clone();
    let log_w: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(move |t: &[f64]| {
        // The nine-coordinate measure factor is legitimately tiny over much
        // of the space, so only an exactly singular map is rejected.
        let jac = match numeric_jacobian_raw(&map9, t, DEFAULT_FD_STEP) {
            Ok(j) if j > 0.0 && j.is_finite() => j,
            _ => return f64::NEG_INFINITY,
        };
        let mut acc = jac.ln();
        let rho = nine_rho(t);
        let p = probs_from_recon(&rho, &eff);
        for j in 0..4 {
            for k in 0..4 {
                let njk = n[4 * j + k];
                if njk == 0.0 {
                    continue;
                }
                if p[j][k] <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                acc += njk * p[j][k].ln();
            }
        }
        acc
    });

    let eff = effects.clone();
    let prob_map: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> = Arc::new(move |t: &[f64]| {
        let rho = nine_rho(t);
        probs_from_recon(&rho, &eff)
            .iter()
            .flatten()
            .copied()
            .collect()
    });
    let aux: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> =
        Arc::new(|t: &[f64]| q_from_recon(&nine_rho(t)));

    Ok(TargetDensity::with_numeric_force(9, "bb84-posterior", log_w)
        .with_prob_map(prob_map)
        .with_aux(aux))
}

/// Width below which the q interval counts as degenerate; such points get
/// the largest finite weight instead of overflowing.
pub const DEGENERATE_WIDTH: f64 = 1e-9;
pub const WEIGHT_CLAMP: f64 = 1e9;

/// Attaches the marginalization weight 1/(q_max - q_min) to every point.
/// The q values stay in the set as auxiliary data.
pub fn reweight_marginal(s: &SampleSet) -> Result<SampleSet, Bb84Error> {
    let qs = s.aux.as_ref().ok_or(Bb84Error::MissingAux)?;
    let mut weights = Vec::with_capacity(s.len());
    let mut degenerate = 0usize;
    for (probs, &q) in s.probs.iter().zip(qs) {
        let flat: [f64; 16] = probs
            .as_slice()
            .try_into()
            .map_err(|_| Bb84Error::ConstraintViolation("need 16 probabilities".into()))?;
        let p = Bb84Probabilities::new(flat)?;
        let bounds = q_bounds_with_hint(&p, q)?;
        if bounds.width() < DEGENERATE_WIDTH {
            degenerate += 1;
            weights.push(WEIGHT_CLAMP);
        } else {
            weights.push(1.0 / bounds.width());
        }
    }
    let mut out = s.clone();
    out.weights = Some(weights);
    out.metadata.degenerate_count = degenerate;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Physical-basis states and data synthesis
// ---------------------------------------------------------------------------

/// Named true states for data synthesis, in the computational basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedState {
    /// (|10> - |01>)/sqrt(2)
    Singlet,
    /// (|10> + |01>)/sqrt(2)
    Triplet,
    /// Maximally mixed two-qubit state.
    Mixed,
}

impl std::str::FromStr for NamedState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "singlet" => Ok(Self::Singlet),
            "triplet" => Ok(Self::Triplet),
            "mixed" => Ok(Self::Mixed),
            other => Err(format!("unknown state '{other}'")),
        }
    }
}

/// Builds a named state with isotropic noise lambda applied as
/// rho -> (1 - lambda) rho + lambda/4.
pub fn named_state(state: NamedState, noise: f64) -> ComplexMatrix {
    let pure = |v: [f64; 4]| {
        ComplexMatrix::from_fn(4, |i, j| C64::new(v[i] * v[j], 0.0))
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rho = match state {
        NamedState::Singlet => pure([0.0, -s, s, 0.0]),
        NamedState::Triplet => pure([0.0, s, s, 0.0]),
        NamedState::Mixed => ComplexMatrix::identity(4).scale(C64::new(0.25, 0.0)),
    };
    rho.scale(C64::new(1.0 - noise, 0.0))
        .add(&ComplexMatrix::identity(4).scale(C64::new(noise / 4.0, 0.0)))
}

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::new(2, vec![
        C64::new(0.0, 0.0), C64::new(1.0, 0.0),
        C64::new(1.0, 0.0), C64::new(0.0, 0.0),
    ]).unwrap()
}

fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, vec![
        C64::new(0.0, 0.0), C64::new(0.0, -1.0),
        C64::new(0.0, 1.0), C64::new(0.0, 0.0),
    ]).unwrap()
}

/// Crosshair effects (+x, +y, -x, -y) in the computational basis.
fn crosshair_effects_physical() -> [ComplexMatrix; 4] {
    let id = ComplexMatrix::identity(2);
    let quarter = C64::new(0.25, 0.0);
    let make = |op: ComplexMatrix, sign: f64| {
        id.add(&op.scale(C64::new(sign, 0.0))).scale(quarter)
    };
    [
        make(pauli_x(), 1.0),
        make(pauli_y(), 1.0),
        make(pauli_x(), -1.0),
        make(pauli_y(), -1.0),
    ]
}

/// Born-rule joint probabilities of a physical (computational-basis) state.
pub fn bb84_probs_from_physical(rho: &ComplexMatrix) -> Result<Bb84Probabilities, Bb84Error> {
    let eff = crosshair_effects_physical();
    let mut flat = [0.0; 16];
    for j in 0..4 {
        for k in 0..4 {
            let joint = eff[j].kron(&eff[k]); // first qubit on the slow index
            flat[4 * j + k] = rho.mul(&joint).trace().re;
        }
    }
    Bb84Probabilities::new(flat)
}

/// Change of basis V with the reconstruction basis vectors as columns,
/// expressed in the computational basis. Per qubit the vectors are |+x>
/// and i|-x>; the first-qubit index runs fastest in the reconstruction
/// ordering while the computational ordering keeps it slow.
pub fn recon_basis_change() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let b = [
        [C64::new(s, 0.0), C64::new(s, 0.0)],   // |+x>
        [C64::new(0.0, s), C64::new(0.0, -s)],  // i |-x>
    ];
    ComplexMatrix::from_fn(4, |row, col| {
        let (c1, c2) = (row / 2, row % 2); // computational: qubit 1 slow
        let (a1, a2) = (col % 2, col / 2); // reconstruction: qubit 1 fast
        b[a1][c1] * b[a2][c2]
    })
}

/// Converts a reconstruction-basis operator to the computational basis.
pub fn recon_to_physical(m: &ComplexMatrix) -> ComplexMatrix {
    let v = recon_basis_change();
    v.mul(m).mul(&v.dagger())
}

/// Converts a computational-basis operator to the reconstruction basis.
pub fn physical_to_recon(m: &ComplexMatrix) -> ComplexMatrix {
    let v = recon_basis_change();
    v.dagger().mul(m).mul(&v)
}
