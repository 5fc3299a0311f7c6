//! Monte Carlo check of the Cramér-Rao chain.
//!
//! Outcomes are drawn with `ChaCha20Rng::seed_from_u64(seed)`, one uniform
//! `f64` per trial mapped through the cumulative outcome distribution, so a
//! seed pins the counts exactly. Batch `b` of a run with master seed `s`
//! uses seed `s + b` (wrapping).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::circuit::{EncodingCircuit, ParamVector};
use crate::error::{Error, Result};
use crate::fisher::{classical_fim, Povm};
use crate::linalg::{invert_real, real_min_eigenvalue, RMatrix, DEFAULT_INVERT_TOL};

pub const DEFAULT_SEARCH_RADIUS: f64 = 0.5;
pub const MIN_BATCHES: usize = 30;
/// Grid points on each side of the current coordinate.
const GRID_HALF_WIDTH: usize = 8;
const GRID_SHRINK: f64 = 4.0;
const STEP_FLOOR: f64 = 1e-11;
const FLAT_TOL: f64 = 1e-10;
/// Probability used in place of zero inside the log-likelihood.
const LOG_FLOOR: f64 = 1e-300;

/// Outcome counts of `trials` independent measurements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBatch {
    pub seed: u64,
    pub counts: Vec<u64>,
    pub trials: u64,
}

pub fn sample_outcomes(
    circuit: &EncodingCircuit,
    theta: &ParamVector,
    povm: &Povm,
    trials: u64,
    seed: u64,
) -> Result<SampleBatch> {
    if trials == 0 {
        return Err(Error::Invalid("number of trials must be positive".into()));
    }
    let probs = povm.probabilities(circuit, theta)?;
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..trials {
        let u = rng.random::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[k] += 1;
    }
    Ok(SampleBatch { seed, counts, trials })
}

/// `Σ_k n_k log p(k|θ)`.
pub fn log_likelihood(
    batch: &SampleBatch,
    circuit: &EncodingCircuit,
    povm: &Povm,
    theta: &ParamVector,
) -> Result<f64> {
    if batch.counts.len() != povm.len() {
        return Err(Error::dim("outcome counts", povm.len(), batch.counts.len()));
    }
    let probs = povm.probabilities(circuit, theta)?;
    Ok(batch
        .counts
        .iter()
        .zip(&probs)
        .filter(|(n, _)| **n > 0)
        .map(|(n, p)| *n as f64 * p.max(LOG_FLOOR).ln())
        .sum())
}

/// Maximum-likelihood estimate inside the box `|θ_m − θ_init,m| ≤ search_radius`.
///
/// Coordinate descent over a grid of `2·8 + 1` points per coordinate; the
/// grid spacing shrinks by 4 whenever a full pass makes no progress.
pub fn mle_fit(
    batch: &SampleBatch,
    circuit: &EncodingCircuit,
    povm: &Povm,
    theta_init: &ParamVector,
    search_radius: f64,
) -> Result<ParamVector> {
    if theta_init.len() != circuit.num_params() {
        return Err(Error::dim("initial estimate", circuit.num_params(), theta_init.len()));
    }
    if !(search_radius > 0.0 && search_radius.is_finite()) {
        return Err(Error::Invalid(format!("search radius {search_radius} must be positive")));
    }
    let lo: Vec<f64> = theta_init.0.iter().map(|x| x - search_radius).collect();
    let hi: Vec<f64> = theta_init.0.iter().map(|x| x + search_radius).collect();
    let ll = |th: &ParamVector| log_likelihood(batch, circuit, povm, th);

    let mut best = theta_init.clone();
    let mut best_ll = ll(&best)?;
    let mut step = search_radius / GRID_HALF_WIDTH as f64;
    let mut first_pass = true;
    while step > STEP_FLOOR * search_radius.max(1.0) {
        let mut moved = false;
        for m in 0..best.len() {
            let centre = best.0[m];
            let mut lowest = best_ll;
            for k in 1..=GRID_HALF_WIDTH {
                for sign in [-1.0, 1.0] {
                    let x = (centre + sign * k as f64 * step).clamp(lo[m], hi[m]);
                    let mut trial = best.clone();
                    trial.0[m] = x;
                    let value = ll(&trial)?;
                    lowest = lowest.min(value);
                    if value > best_ll {
                        best_ll = value;
                        best = trial;
                        moved = true;
                    }
                }
            }
            if first_pass && best_ll - lowest <= FLAT_TOL * best_ll.abs().max(1.0) {
                return Err(Error::Unidentifiable);
            }
        }
        first_pass = false;
        if !moved {
            step /= GRID_SHRINK;
        }
    }
    Ok(best)
}

/// `−∂²ℓ/∂θ_i∂θ_j / N` by central differences at `theta`.
pub fn observed_information(
    batch: &SampleBatch,
    circuit: &EncodingCircuit,
    povm: &Povm,
    theta: &ParamVector,
    step: f64,
) -> Result<RMatrix> {
    let m = theta.len();
    let ll = |th: &ParamVector| log_likelihood(batch, circuit, povm, th);
    let centre = ll(theta)?;
    let mut info = RMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let value = if i == j {
                let plus = ll(&theta.shifted(i, step))?;
                let minus = ll(&theta.shifted(i, -step))?;
                (plus - 2.0 * centre + minus) / (step * step)
            } else {
                let pp = ll(&theta.shifted(i, step).shifted(j, step))?;
                let pm = ll(&theta.shifted(i, step).shifted(j, -step))?;
                let mp = ll(&theta.shifted(i, -step).shifted(j, step))?;
                let mm = ll(&theta.shifted(i, -step).shifted(j, -step))?;
                (pp - pm - mp + mm) / (4.0 * step * step)
            };
            info[(i, j)] = -value / batch.trials as f64;
            info[(j, i)] = info[(i, j)];
        }
    }
    Ok(info)
}

/// Empirical estimator covariance against the bound `[N I(θ)]⁻¹`.
#[derive(Debug, Clone)]
pub struct CrbComparison {
    pub mean: ParamVector,
    pub empirical_cov: RMatrix,
    pub bound: RMatrix,
    /// Smallest eigenvalue of `empirical_cov − bound`.
    pub slack: f64,
    pub batches: usize,
}

impl CrbComparison {
    /// Largest eigenvalue of the bound.
    pub fn bound_norm(&self) -> f64 {
        self.bound.clone().symmetric_eigen().eigenvalues.max()
    }

    /// `slack ≥ −fraction·‖bound‖`.
    pub fn within_soft_bound(&self, fraction: f64) -> bool {
        self.slack >= -fraction * self.bound_norm()
    }

    /// Diagonal ratio `cov_mm / bound_mm`.
    pub fn variance_ratio(&self, m: usize) -> f64 {
        self.empirical_cov[(m, m)] / self.bound[(m, m)]
    }
}

pub fn crb_comparison(
    estimates: &[ParamVector],
    circuit: &EncodingCircuit,
    theta_true: &ParamVector,
    povm: &Povm,
    trials: u64,
) -> Result<CrbComparison> {
    if estimates.len() < MIN_BATCHES {
        return Err(Error::Invalid(format!(
            "CRB comparison needs at least {MIN_BATCHES} batches, got {}",
            estimates.len()
        )));
    }
    if trials == 0 {
        return Err(Error::Invalid("number of trials must be positive".into()));
    }
    let m = circuit.num_params();
    if let Some(bad) = estimates.iter().find(|e| e.len() != m) {
        return Err(Error::dim("estimate", m, bad.len()));
    }
    let fim = classical_fim(circuit, theta_true, povm)?;
    let bound = invert_real(&(fim.matrix * trials as f64), DEFAULT_INVERT_TOL)?;

    // shift by the first estimate so identical estimates give an exact zero
    let origin = &estimates[0].0;
    let b = estimates.len() as f64;
    let offsets: Vec<f64> = (0..m)
        .map(|i| estimates.iter().map(|e| e.0[i] - origin[i]).sum::<f64>() / b)
        .collect();
    let mut cov = RMatrix::zeros(m, m);
    for e in estimates {
        for i in 0..m {
            for j in 0..m {
                cov[(i, j)] += (e.0[i] - origin[i] - offsets[i]) * (e.0[j] - origin[j] - offsets[j]);
            }
        }
    }
    let mean: Vec<f64> = origin.iter().zip(&offsets).map(|(o, d)| o + d).collect();
    cov /= b - 1.0;
    let slack = real_min_eigenvalue(&(&cov - &bound));
    Ok(CrbComparison {
        mean: ParamVector(mean),
        empirical_cov: cov,
        bound,
        slack,
        batches: estimates.len(),
    })
}

/// Settings for a full sample, fit and compare run.
#[derive(Debug, Clone)]
pub struct CrbRun {
    pub trials: u64,
    pub batches: usize,
    pub master_seed: u64,
    pub search_radius: f64,
}

/// Estimates of every batch, in batch order, together with their comparison.
#[derive(Debug, Clone)]
pub struct CrbOutcome {
    pub estimates: Vec<ParamVector>,
    pub comparison: CrbComparison,
}

pub fn run_crb(
    circuit: &EncodingCircuit,
    theta_true: &ParamVector,
    theta_init: &ParamVector,
    povm: &Povm,
    run: &CrbRun,
) -> Result<CrbOutcome> {
    let estimates = (0..run.batches)
        .into_par_iter()
        .map(|b| {
            let seed = run.master_seed.wrapping_add(b as u64);
            let batch = sample_outcomes(circuit, theta_true, povm, run.trials, seed)?;
            mle_fit(&batch, circuit, povm, theta_init, run.search_radius)
        })
        .collect::<Result<Vec<_>>>()?;
    let comparison = crb_comparison(&estimates, circuit, theta_true, povm, run.trials)?;
    Ok(CrbOutcome { estimates, comparison })
}
