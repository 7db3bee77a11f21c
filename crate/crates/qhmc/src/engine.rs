//! The HMC Markov chain, a random-walk Metropolis baseline, and chain
//! diagnostics.
//!
//! Chains are deterministic functions of (seed, config, target); the RNG is
//! ChaCha8 with one stream per chain, and the algorithm identifier is
//! recorded in the run metadata so results reproduce across machines.

use crate::leapfrog::{jitter, trajectory, TrajectoryConfig};
use crate::targets::TargetDensity;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// RNG identifier written into run metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("initial point has zero target density")]
    BadInitialPoint,
    #[error("invalid chain configuration: {0}")]
    BadConfig(String),
}

/// Chain configuration. `chain_length` counts every iteration of the walk;
/// the first `burn_in` points are discarded and every `thinning`-th of the
/// rest is kept.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HmcConfig {
    pub trajectory: TrajectoryConfig,
    pub chain_length: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub initial: Vec<f64>,
}

impl HmcConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.chain_length <= self.burn_in {
            return Err(EngineError::BadConfig(
                "chain_length must exceed burn_in".into(),
            ));
        }
        if self.thinning == 0 {
            return Err(EngineError::BadConfig("thinning must be >= 1".into()));
        }
        if !self.trajectory.validate() {
            return Err(EngineError::BadConfig("invalid trajectory config".into()));
        }
        Ok(())
    }

    /// Default interior starting point: every angle at pi/4, which has
    /// finite density for all the in-scope targets.
    pub fn default_for(dim: usize) -> Self {
        Self {
            trajectory: TrajectoryConfig::default(),
            chain_length: 51_000,
            burn_in: 1_000,
            thinning: 1,
            seed: 0,
            initial: vec![std::f64::consts::FRAC_PI_4; dim],
        }
    }
}

/// Run metadata attached to every sample set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub chain_id: u64,
    pub rng_algorithm: String,
    pub tau: f64,
    pub steps: usize,
    pub acceptance_rate: f64,
    pub target_label: String,
    pub degenerate_count: usize,
}

/// An ordered chain of kept points with derived probabilities, optional
/// importance weights, and run metadata.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub probs: Vec<Vec<f64>>,
    pub aux: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    pub metadata: RunMetadata,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }
}

/// H = kinetic + potential = (1/2) sum mom^2 - log w(theta).
pub fn hamiltonian(theta: &[f64], mom: &[f64], target: &TargetDensity) -> f64 {
    let kinetic: f64 = mom.iter().map(|v| 0.5 * v * v).sum();
    let log_w = target.log_w(theta);
    if log_w == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        kinetic - log_w
    }
}

/// Everything needed to recompute the acceptance via the general
/// Metropolis-Hastings form.
#[derive(Clone, Debug)]
pub struct ProposalRecord {
    pub mom_initial: Vec<f64>,
    pub mom_final: Vec<f64>,
    pub log_w_initial: f64,
    pub log_w_final: f64,
    pub h_initial: f64,
    pub h_final: f64,
    pub acceptance: f64,
    pub accepted: bool,
}

/// One HMC update: Gaussian momentum refresh, jittered leapfrog
/// trajectory, accept/reject on the energy difference.
pub fn hmc_step(
    theta: &[f64],
    target: &TargetDensity,
    cfg: &TrajectoryConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, ProposalRecord) {
    let mom: Vec<f64> = (0..theta.len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let (tau, steps) = jitter(cfg, rng);
    let log_w_initial = target.log_w(theta);
    let h_initial = hamiltonian(theta, &mom, target);

    let proposal = trajectory(theta, &mom, tau, steps, &|t| target.force(t)).ok();
    let (theta_star, mom_star, log_w_final, h_final) = match &proposal {
        Some((t, v)) => {
            let lw = target.log_w(t);
            (t.clone(), v.clone(), lw, hamiltonian(t, v, target))
        }
        // A non-finite force means an infinite-energy proposal.
        None => (theta.to_vec(), mom.clone(), f64::NEG_INFINITY, f64::INFINITY),
    };

    let acceptance = if h_final == f64::INFINITY {
        0.0
    } else {
        (h_initial - h_final).exp().min(1.0)
    };
    let b: f64 = rng.random();
    let accepted = acceptance > b;
    let next = if accepted { theta_star } else { theta.to_vec() };
    (
        next,
        ProposalRecord {
            mom_initial: mom,
            mom_final: mom_star,
            log_w_initial,
            log_w_final,
            h_initial,
            h_final,
            acceptance,
            accepted,
        },
    )
}

fn chain_rng(seed: u64, chain_id: u64) -> ChaCha8Rng {
    // Per-chain stream split: same seed, independent ChaCha stream.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain_id);
    rng
}

fn collect_chain(
    target: &TargetDensity,
    cfg: &HmcConfig,
    chain_id: u64,
    mut step: impl FnMut(&[f64], &mut ChaCha8Rng) -> (Vec<f64>, bool),
) -> Result<SampleSet, EngineError> {
    cfg.validate()?;
    if target.log_w(&cfg.initial) == f64::NEG_INFINITY {
        return Err(EngineError::BadInitialPoint);
    }
    let mut rng = chain_rng(cfg.seed, chain_id);
    let mut theta = cfg.initial.clone();
    let mut points = Vec::new();
    let mut accepted_post_burn_in = 0usize;
    let mut proposals_post_burn_in = 0usize;
    for j in 0..cfg.chain_length {
        let (next, accepted) = step(&theta, &mut rng);
        theta = next;
        if j >= cfg.burn_in {
            proposals_post_burn_in += 1;
            if accepted {
                accepted_post_burn_in += 1;
            }
            if (j - cfg.burn_in) % cfg.thinning == 0 {
                points.push(theta.clone());
            }
        }
    }
    let probs: Vec<Vec<f64>> = points
        .iter()
        .map(|t| target.probs(t).unwrap_or_default())
        .collect();
    let aux = target.aux(&cfg.initial).map(|_| {
        points
            .iter()
            .map(|t| target.aux(t).expect("aux defined for all points"))
            .collect()
    });
    Ok(SampleSet {
        points,
        probs,
        aux,
        weights: None,
        metadata: RunMetadata {
            seed: cfg.seed,
            chain_id,
            rng_algorithm: RNG_ALGORITHM.into(),
            tau: cfg.trajectory.tau,
            steps: cfg.trajectory.steps,
            acceptance_rate: accepted_post_burn_in as f64 / proposals_post_burn_in as f64,
            target_label: target.label().into(),
            degenerate_count: 0,
        },
    })
}

/// Runs one HMC chain.
pub fn run_chain(target: &TargetDensity, cfg: &HmcConfig) -> Result<SampleSet, EngineError> {
    run_chain_id(target, cfg, 0)
}

/// Runs one HMC chain with an explicit chain id (independent RNG stream).
pub fn run_chain_id(
    target: &TargetDensity,
    cfg: &HmcConfig,
    chain_id: u64,
) -> Result<SampleSet, EngineError> {
    let traj = cfg.trajectory;
    collect_chain(target, cfg, chain_id, |theta, rng| {
        let (next, rec) = hmc_step(theta, target, &traj, rng);
        (next, rec.accepted)
    })
}

/// Runs one HMC chain and logs every proposal record.
pub fn run_chain_logged(
    target: &TargetDensity,
    cfg: &HmcConfig,
) -> Result<(SampleSet, Vec<ProposalRecord>), EngineError> {
    let traj = cfg.trajectory;
    let mut log = Vec::with_capacity(cfg.chain_length);
    let set = collect_chain(target, cfg, 0, |theta, rng| {
        let (next, rec) = hmc_step(theta, target, &traj, rng);
        let accepted = rec.accepted;
        log.push(rec);
        (next, accepted)
    })?;
    Ok((set, log))
}

/// Random-walk Metropolis baseline with a symmetric Gaussian proposal.
pub fn rw_metropolis_chain(
    target: &TargetDensity,
    step_scale: f64,
    cfg: &HmcConfig,
) -> Result<SampleSet, EngineError> {
    collect_chain(target, cfg, 0, |theta, rng| {
        let proposal: Vec<f64> = theta
            .iter()
            .map(|t| t + step_scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let log_ratio = target.log_w(&proposal) - target.log_w(theta);
        let b: f64 = rng.random();
        if log_ratio.exp().min(1.0) > b {
            (proposal, true)
        } else {
            (theta.to_vec(), false)
        }
    })
}

/// Per-coordinate autocorrelations, integrated autocorrelation times, and
/// effective sample sizes.
#[derive(Clone, Debug)]
pub struct DiagnosticsReport {
    /// acf[s][k] is the lag-k autocorrelation of coordinate s (k <= 200).
    pub acf: Vec<Vec<f64>>,
    pub integrated_autocorrelation: Vec<f64>,
    pub effective_sample_size: Vec<f64>,
    pub acceptance_rate: f64,
    pub degenerate: bool,
}

pub const MAX_ACF_LAG: usize = 200;

/// Normalized autocorrelation function of one series up to `max_lag`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return vec![1.0; max_lag.min(n.saturating_sub(1)) + 1];
    }
    (0..=max_lag.min(n - 1))
        .map(|k| {
            let cov: f64 = (0..n - k)
                .map(|i| (series[i] - mean) * (series[i + k] - mean))
                .sum::<f64>()
                / n as f64;
            cov / var
        })
        .collect()
}

/// Integrated autocorrelation time with initial-positive-sequence
/// truncation: 1 + 2 sum of leading positive autocorrelations.
pub fn integrated_autocorrelation_time(acf: &[f64]) -> f64 {
    let mut tau = 1.0;
    for &rho in &acf[1..] {
        if rho <= 0.0 {
            break;
        }
        tau += 2.0 * rho;
    }
    tau
}

pub fn diagnostics(s: &SampleSet) -> DiagnosticsReport {
    let n = s.points.len();
    let dim = s.points.first().map_or(0, |p| p.len());
    let mut acf = Vec::with_capacity(dim);
    let mut iact = Vec::with_capacity(dim);
    let mut ess = Vec::with_capacity(dim);
    let mut degenerate = false;
    for coord in 0..dim {
        let series: Vec<f64> = s.points.iter().map(|p| p[coord]).collect();
        let mean = series.iter().sum::<f64>() / n as f64;
        let var: f64 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        if var <= 1e-300 {
            degenerate = true;
            acf.push(vec![1.0; MAX_ACF_LAG + 1]);
            iact.push(n as f64);
            ess.push(1.0);
            continue;
        }
        let a = autocorrelation(&series, MAX_ACF_LAG);
        let tau = integrated_autocorrelation_time(&a);
        acf.push(a);
        iact.push(tau);
        ess.push(n as f64 / tau);
    }
    DiagnosticsReport {
        acf,
        integrated_autocorrelation: iact,
        effective_sample_size: ess,
        acceptance_rate: s.metadata.acceptance_rate,
        degenerate,
    }
}
