//! Target densities in angle coordinates.
//!
//! A target bundles the log density log w(theta), its gradient ("force"),
//! and the map from angles to outcome probabilities for the chosen POM.
//! Densities are kept only up to an additive constant in the log, which is
//! all the sampler needs. Nonpositive density is reported as -infinity and
//! the engine treats such proposals as rejected.

use crate::param::{bloch_from_qubit_angles, jacobian_equatorial, jacobian_hemisphere,
                   jacobian_qubit_full, BlochVector};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TargetError {
    #[error("counts must be >= -1/2 and finite, got {0}")]
    BadCount(f64),
    #[error("expected {expected} counts, got {got}")]
    BadCountLength { expected: usize, got: usize },
}

/// The five POMs the library knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PomId {
    Tetrahedron,
    Pauli,
    Trine,
    Crosshair,
    Bb84DoubleCrosshair,
}

impl PomId {
    pub fn outcomes(&self) -> usize {
        match self {
            PomId::Tetrahedron => 4,
            PomId::Pauli => 6,
            PomId::Trine => 3,
            PomId::Crosshair => 4,
            PomId::Bb84DoubleCrosshair => 16,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PomId::Tetrahedron => "tetrahedron",
            PomId::Pauli => "pauli",
            PomId::Trine => "trine",
            PomId::Crosshair => "crosshair",
            PomId::Bb84DoubleCrosshair => "bb84-double-crosshair",
        }
    }
}

/// Reconstruction space for POMs that are not informationally complete.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReconstructionSpace {
    /// Equatorial plane of the Bloch ball; coordinates (t2, t3).
    #[default]
    Equatorial,
    /// Upper hemisphere of the Bloch sphere; coordinates (t1, t3).
    Hemisphere,
}

/// Measured (or mock) counts per outcome; -1/2 offsets are allowed so the
/// same machinery covers the primitive prior, the Jeffreys prior, and
/// conjugate priors given by mock data.
#[derive(Clone, Debug, PartialEq)]
pub struct CountData(Vec<f64>);

impl CountData {
    pub fn new(counts: Vec<f64>) -> Result<Self, TargetError> {
        for &n in &counts {
            if !n.is_finite() || n < -0.5 {
                return Err(TargetError::BadCount(n));
            }
        }
        Ok(Self(counts))
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    /// Offsets every count by -1/2 (Jeffreys prior rule).
    pub fn jeffreys(&self) -> Self {
        Self(self.0.iter().map(|n| n - 0.5).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

type DynFn<T> = Arc<dyn Fn(&[f64]) -> T + Send + Sync>;

/// A sampling target: log density, force, and derived quantities.
#[derive(Clone)]
pub struct TargetDensity {
    dim: usize,
    label: String,
    log_w: DynFn<f64>,
    force: DynFn<Vec<f64>>,
    prob_map: Option<DynFn<Vec<f64>>>,
    aux: Option<DynFn<f64>>,
}

impl TargetDensity {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        log_w: DynFn<f64>,
        force: DynFn<Vec<f64>>,
    ) -> Self {
        Self {
            dim,
            label: label.into(),
            log_w,
            force,
            prob_map: None,
            aux: None,
        }
    }

    /// Builds the force by central finite differences of log_w.
    pub fn with_numeric_force(
        dim: usize,
        label: impl Into<String>,
        log_w: DynFn<f64>,
    ) -> Self {
        let force = numeric_force(log_w.clone());
        Self::new(dim, label, log_w, force)
    }

    pub fn with_prob_map(mut self, map: DynFn<Vec<f64>>) -> Self {
        self.prob_map = Some(map);
        self
    }

    pub fn with_aux(mut self, aux: DynFn<f64>) -> Self {
        self.aux = Some(aux);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn log_w(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.dim);
        (self.log_w)(theta)
    }

    pub fn force(&self, theta: &[f64]) -> Vec<f64> {
        (self.force)(theta)
    }

    /// Outcome probabilities at this point, if the target carries a POM map.
    pub fn probs(&self, theta: &[f64]) -> Option<Vec<f64>> {
        self.prob_map.as_ref().map(|m| m(theta))
    }

    /// Auxiliary scalar (the unmeasured correlation q for BB84 targets).
    pub fn aux(&self, theta: &[f64]) -> Option<f64> {
        self.aux.as_ref().map(|a| a(theta))
    }
}

/// Step used by finite-difference forces, scaled by (1 + |t_s|).
pub const FORCE_FD_STEP: f64 = 1e-5;

fn numeric_force(log_w: DynFn<f64>) -> DynFn<Vec<f64>> {
    Arc::new(move |theta: &[f64]| {
        let mut work = theta.to_vec();
        let mut out = Vec::with_capacity(theta.len());
        for s in 0..theta.len() {
            let h = FORCE_FD_STEP * (1.0 + theta[s].abs());
            work[s] = theta[s] + h;
            let plus = log_w(&work);
            work[s] = theta[s] - h;
            let minus = log_w(&work);
            work[s] = theta[s];
            out.push((plus - minus) / (2.0 * h));
        }
        out
    })
}

// ---------------------------------------------------------------------------
// POM probability maps
// ---------------------------------------------------------------------------

const SQRT3: f64 = 1.732_050_807_568_877_3;

/// Tetrahedron POM probabilities (K = 4).
pub fn tetrahedron_probs(b: &BlochVector) -> Vec<f64> {
    let f = 1.0 / (4.0 * SQRT3);
    vec![
        0.25 + f * (b.x - b.y - b.z),
        0.25 + f * (b.y - b.z - b.x),
        0.25 + f * (b.z - b.x - b.y),
        0.25 + f * (b.x + b.y + b.z),
    ]
}

/// Pauli POM probabilities (K = 6): (1 +- x)/6, (1 +- y)/6, (1 +- z)/6.
pub fn pauli_probs(b: &BlochVector) -> Vec<f64> {
    vec![
        (1.0 + b.x) / 6.0,
        (1.0 + b.y) / 6.0,
        (1.0 + b.z) / 6.0,
        (1.0 - b.x) / 6.0,
        (1.0 - b.y) / 6.0,
        (1.0 - b.z) / 6.0,
    ]
}

/// Detector directions of the trine POM, 120 degrees apart.
pub const TRINE_ANGLES: [f64; 3] = [0.0, -2.0 * PI / 3.0, 2.0 * PI / 3.0];

/// Trine POM probabilities (K = 3) on the equatorial plane.
pub fn trine_probs(x: f64, y: f64) -> Vec<f64> {
    TRINE_ANGLES
        .iter()
        .map(|&d| (1.0 + x * d.cos() + y * d.sin()) / 3.0)
        .collect()
}

/// Crosshair POM probabilities (K = 4): (1 +- x)/4 and (1 +- y)/4.
pub fn crosshair_probs(x: f64, y: f64) -> Vec<f64> {
    vec![
        (1.0 + x) / 4.0,
        (1.0 + y) / 4.0,
        (1.0 - x) / 4.0,
        (1.0 - y) / 4.0,
    ]
}

/// Checks the step- and delta-function constraints of the named POM.
pub fn validate_constraints(p: &[f64], pom: PomId) -> bool {
    const TOL: f64 = 1e-10;
    if p.len() != pom.outcomes() {
        return false;
    }
    if p.iter().any(|&x| x < -1e-12) {
        return false;
    }
    let sum: f64 = p.iter().sum();
    let sum_sq: f64 = p.iter().map(|x| x * x).sum();
    match pom {
        PomId::Tetrahedron => (sum - 1.0).abs() <= TOL && sum_sq <= 1.0 / 3.0 + TOL,
        PomId::Pauli => {
            (0..3).all(|k| (p[k] + p[k + 3] - 1.0 / 3.0).abs() <= TOL)
                && (0..3).map(|k| (p[k] - p[k + 3]).powi(2)).sum::<f64>() <= 1.0 / 9.0 + TOL
        }
        PomId::Trine => (sum - 1.0).abs() <= TOL && sum_sq <= 0.5 + TOL,
        PomId::Crosshair => {
            (p[0] + p[2] - 0.5).abs() <= TOL
                && (p[1] + p[3] - 0.5).abs() <= TOL
                && (p[0] - p[2]).powi(2) + (p[1] - p[3]).powi(2) <= 0.25 + TOL
        }
        PomId::Bb84DoubleCrosshair => crate::bb84::Bb84Probabilities::new(
            p.try_into().expect("length checked above"),
        )
        .is_ok(),
    }
}

// ---------------------------------------------------------------------------
// Target constructors
// ---------------------------------------------------------------------------

/// Primitive-prior target for a qubit with an informationally complete POM:
/// log w = log |sin(2 t1)^3 sin(2 t2)| with the analytic force
/// (6 cot 2t1, 2 cot 2t2, 0). The tetrahedron and Pauli POMs share this
/// density; the POM only decides which probabilities are derived.
pub fn primitive_qubit_target(pom: PomId) -> TargetDensity {
    assert!(
        matches!(pom, PomId::Tetrahedron | PomId::Pauli),
        "primitive qubit target needs an informationally complete qubit POM"
    );
    let log_w: DynFn<f64> = Arc::new(|t: &[f64]| {
        let j = jacobian_qubit_full(t[0], t[1]);
        if j > 0.0 {
            j.ln()
        } else {
            f64::NEG_INFINITY
        }
    });
    let force: DynFn<Vec<f64>> = Arc::new(|t: &[f64]| {
        vec![
            6.0 * (2.0 * t[0]).cos() / (2.0 * t[0]).sin(),
            2.0 * (2.0 * t[1]).cos() / (2.0 * t[1]).sin(),
            0.0,
        ]
    });
    let prob_map = qubit_prob_map(pom);
    TargetDensity::new(3, format!("primitive-{}", pom.name()), log_w, force)
        .with_prob_map(prob_map)
}

fn qubit_prob_map(pom: PomId) -> DynFn<Vec<f64>> {
    Arc::new(move |t: &[f64]| {
        let b = bloch_from_qubit_angles(t[0], t[1], t[2]);
        match pom {
            PomId::Tetrahedron => tetrahedron_probs(&b),
            PomId::Pauli => pauli_probs(&b),
            _ => unreachable!(),
        }
    })
}

/// Posterior target for the trine POM on the equatorial plane, with the
/// analytic force. Coordinates are (t2, t3); counts may carry -1/2 offsets.
pub fn trine_posterior_target(counts: &CountData) -> Result<TargetDensity, TargetError> {
    if counts.len() != 3 {
        return Err(TargetError::BadCountLength {
            expected: 3,
            got: counts.len(),
        });
    }
    let n: [f64; 3] = counts.values().try_into().unwrap();
    let log_w: DynFn<f64> = Arc::new(move |t: &[f64]| {
        let measure = jacobian_equatorial(t[0]);
        if measure <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut acc = measure.ln();
        for (k, &d) in TRINE_ANGLES.iter().enumerate() {
            if n[k] == 0.0 {
                continue;
            }
            let factor = 1.0 + t[0].cos() * (t[1] - d).cos();
            if factor <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += n[k] * factor.ln();
        }
        acc
    });
    let force: DynFn<Vec<f64>> = Arc::new(move |t: &[f64]| {
        let (t2, t3) = (t[0], t[1]);
        let mut u2 = 2.0 * (2.0 * t2).cos() / (2.0 * t2).sin();
        let mut u3 = 0.0;
        for (k, &d) in TRINE_ANGLES.iter().enumerate() {
            let c = (t3 - d).cos();
            let denom = 1.0 + t2.cos() * c;
            u2 -= n[k] * t2.sin() * c / denom;
            u3 -= n[k] * t2.cos() * (t3 - d).sin() / denom;
        }
        vec![u2, u3]
    });
    let prob_map: DynFn<Vec<f64>> = Arc::new(|t: &[f64]| {
        trine_probs(t[0].cos() * t[1].cos(), t[0].cos() * t[1].sin())
    });
    Ok(TargetDensity::new(
        2,
        format!("trine-posterior{:?}", n),
        log_w,
        force,
    )
    .with_prob_map(prob_map))
}

/// Generic posterior: log w = log measure + sum_k n_k log p_k, force by
/// central finite differences. `prob_map` and `measure` must act on the
/// same angle coordinates.
pub fn generic_posterior_target(
    dim: usize,
    label: impl Into<String>,
    prob_map: DynFn<Vec<f64>>,
    measure: DynFn<f64>,
    counts: &CountData,
) -> TargetDensity {
    let n = counts.values().to_vec();
    let pm = prob_map.clone();
    let log_w: DynFn<f64> = Arc::new(move |t: &[f64]| {
        let m = measure(t);
        if m <= 0.0 || !m.is_finite() {
            return f64::NEG_INFINITY;
        }
        let mut acc = m.ln();
        let p = pm(t);
        for (k, &nk) in n.iter().enumerate() {
            if nk == 0.0 {
                continue;
            }
            if p[k] <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += nk * p[k].ln();
        }
        acc
    });
    TargetDensity::with_numeric_force(dim, label, log_w).with_prob_map(prob_map)
}

/// Posterior target for a full-ball qubit POM (tetrahedron or Pauli).
pub fn qubit_posterior_target(
    pom: PomId,
    counts: &CountData,
) -> Result<TargetDensity, TargetError> {
    if counts.len() != pom.outcomes() {
        return Err(TargetError::BadCountLength {
            expected: pom.outcomes(),
            got: counts.len(),
        });
    }
    let measure: DynFn<f64> = Arc::new(|t: &[f64]| jacobian_qubit_full(t[0], t[1]));
    Ok(generic_posterior_target(
        3,
        format!("{}-posterior", pom.name()),
        qubit_prob_map(pom),
        measure,
        counts,
    ))
}

/// Posterior target for an incomplete qubit POM (trine or crosshair) on the
/// chosen reconstruction space; two coordinates either way.
pub fn incomplete_pom_posterior_target(
    pom: PomId,
    space: ReconstructionSpace,
    counts: &CountData,
) -> Result<TargetDensity, TargetError> {
    assert!(matches!(pom, PomId::Trine | PomId::Crosshair));
    if counts.len() != pom.outcomes() {
        return Err(TargetError::BadCountLength {
            expected: pom.outcomes(),
            got: counts.len(),
        });
    }
    let plane_xy = move |t: &[f64]| -> (f64, f64) {
        match space {
            ReconstructionSpace::Equatorial => {
                (t[0].cos() * t[1].cos(), t[0].cos() * t[1].sin())
            }
            ReconstructionSpace::Hemisphere => {
                ((2.0 * t[0]).sin() * t[1].cos(), (2.0 * t[0]).sin() * t[1].sin())
            }
        }
    };
    let prob_map: DynFn<Vec<f64>> = Arc::new(move |t: &[f64]| {
        let (x, y) = plane_xy(t);
        match pom {
            PomId::Trine => trine_probs(x, y),
            PomId::Crosshair => crosshair_probs(x, y),
            _ => unreachable!(),
        }
    });
    let measure: DynFn<f64> = Arc::new(move |t: &[f64]| match space {
        ReconstructionSpace::Equatorial => jacobian_equatorial(t[0]),
        ReconstructionSpace::Hemisphere => jacobian_hemisphere(t[0]),
    });
    Ok(generic_posterior_target(
        2,
        format!("{}-posterior-{:?}", pom.name(), space),
        prob_map,
        measure,
        counts,
    ))
}
