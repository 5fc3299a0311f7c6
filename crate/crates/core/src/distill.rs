//! Lossless Fisher-information distillation.
//!
//! Given an estimate `θ⁰` of the true parameters, the Kraus operator
//! `K = (t − 1)|ψ_θ⁰⟩⟨ψ_θ⁰| + 1` attenuates the expected output state by `t`
//! and passes everything orthogonal to it. Conditioned on success, which
//! happens with probability close to `t²`, every QFIM entry grows by `1/t²`
//! up to corrections quadratic in `δ = θ − θ⁰`, so `p_ps · 𝓘_ps ≈ 𝓘`.
//!
//! The postselected QFIM is always evaluated exactly from the trace formula;
//! the `1/t²` law is only ever a prediction to compare against.

use rayon::prelude::*;

use crate::circuit::{EncodingCircuit, ParamVector, PureState};
use crate::error::{Error, Result};
use crate::fisher::{
    geometric_quantumness, learnability_interval, qfim_pure, uhlmann_curvature, Povm, Qfim,
    UhlmannCurvature,
};
use crate::linalg::{identity, real_max_norm, trace, CMatrix, RMatrix, C64};

pub const POSTSELECTION_FLOOR: f64 = 1e-12;

/// Lower and upper risk bounds.
pub type Interval = (f64, f64);

/// `Σδ²/t²` above which the first-order prediction is flagged as unreliable.
pub const REGIME_WARNING_THRESHOLD: f64 = 0.1;

/// Kraus operator built from an initial estimate.
#[derive(Debug, Clone)]
pub struct DistillationPlan {
    pub theta_guess: ParamVector,
    pub transmissivity: f64,
    pub kraus: CMatrix,
    /// `F = K†K = (t² − 1)ρ_θ⁰ + 1`
    pub postselection_effect: CMatrix,
}

pub fn kraus_from_estimate(
    circuit: &EncodingCircuit,
    theta_guess: &ParamVector,
    t: f64,
) -> Result<DistillationPlan> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Invalid(format!("transmissivity {t} outside (0, 1]")));
    }
    let rho_guess = circuit.evolve(theta_guess)?.density_matrix();
    let one = identity(circuit.dim());
    let kraus = &rho_guess * C64::new(t - 1.0, 0.0) + &one;
    let effect = &rho_guess * C64::new(t * t - 1.0, 0.0) + &one;
    // {F, 1 − F} must be a valid measurement
    Povm::two_outcome(effect.clone())?;
    Ok(DistillationPlan {
        theta_guess: theta_guess.clone(),
        transmissivity: t,
        kraus,
        postselection_effect: effect,
    })
}

/// `K|ψ_θ⟩/√p_ps` together with `p_ps = ⟨ψ_θ|F|ψ_θ⟩`.
pub fn postselect(
    circuit: &EncodingCircuit,
    theta: &ParamVector,
    plan: &DistillationPlan,
) -> Result<(PureState, f64)> {
    let psi = circuit.evolve(theta)?;
    if plan.kraus.nrows() != circuit.dim() {
        return Err(Error::dim("Kraus operator", circuit.dim(), plan.kraus.nrows()));
    }
    let out = &plan.kraus * psi.amplitudes();
    let p_ps = out.norm_squared();
    if p_ps.is_nan() || p_ps <= POSTSELECTION_FLOOR {
        return Err(Error::VanishingPostselection { p_ps });
    }
    Ok((PureState::normalized(out)?, p_ps))
}

/// QFIM, Uhlmann curvature and success probability of the postselected state.
#[derive(Debug, Clone)]
pub struct PostselectedGeometry {
    pub qfim: Qfim,
    pub curvature: UhlmannCurvature,
    pub p_ps: f64,
}

/// Exact postselected geometric tensor for an arbitrary effect `F`:
///
/// `G_ij = Tr[F Ã_j ρ Ã_i]/p − Tr[F ρ Ã_i] Tr[F Ã_j ρ]/p²`
///
/// with `𝓘 = 4 Re G` and `𝓙 = 4 Im G`.
pub fn postselected_geometry(
    circuit: &EncodingCircuit,
    theta: &ParamVector,
    effect: &CMatrix,
) -> Result<PostselectedGeometry> {
    if effect.nrows() != circuit.dim() || effect.ncols() != circuit.dim() {
        return Err(Error::dim("postselection effect", circuit.dim(), effect.nrows()));
    }
    let rho = circuit.evolve(theta)?.density_matrix();
    let tilde = circuit.tilde_generators(theta)?;
    let p_ps = trace(&(effect * &rho)).re;
    if p_ps.is_nan() || p_ps <= POSTSELECTION_FLOOR {
        return Err(Error::VanishingPostselection { p_ps });
    }
    let m = circuit.num_params();
    let f_rho = effect * &rho;
    let left: Vec<C64> = tilde.iter().map(|a| trace(&(&f_rho * a.matrix()))).collect();
    let f_a: Vec<CMatrix> = tilde.iter().map(|a| effect * a.matrix()).collect();
    let right: Vec<C64> = f_a.iter().map(|fa| trace(&(fa * &rho))).collect();
    let g = CMatrix::from_fn(m, m, |i, j| {
        let first = trace(&(&f_a[j] * &rho * tilde[i].matrix()));
        first / p_ps - left[i] * right[j] / (p_ps * p_ps)
    });
    Ok(PostselectedGeometry {
        qfim: Qfim::new(g.map(|z| 4.0 * z.re))?,
        curvature: UhlmannCurvature::from_upper(&g.map(|z| 4.0 * z.im)),
        p_ps,
    })
}

pub fn qfim_postselected(
    circuit: &EncodingCircuit,
    theta: &ParamVector,
    plan: &DistillationPlan,
) -> Result<Qfim> {
    Ok(postselected_geometry(circuit, theta, &plan.postselection_effect)?.qfim)
}

/// Exact versus first-order distillation outcome at one transmissivity.
#[derive(Debug, Clone)]
pub struct DistillationReport {
    pub t: f64,
    pub p_ps: f64,
    pub qfim_exact: Qfim,
    /// `𝓘/t²`
    pub qfim_predicted: Qfim,
    pub qfim_undistilled: Qfim,
    pub curvature_exact: UhlmannCurvature,
    pub curvature_undistilled: UhlmannCurvature,
    /// `‖p_ps 𝓘_ps − 𝓘‖_max`
    pub lossless_residual: f64,
    /// `Σ δ_m² / t²`
    pub regime_ratio: f64,
    /// Learnability interval with `W = 1`, `N = 1` before distillation; `None` if singular.
    pub risk_before: Option<(f64, f64)>,
    pub risk_after: Option<(f64, f64)>,
}

impl DistillationReport {
    pub fn regime_warning(&self) -> bool {
        self.regime_ratio > REGIME_WARNING_THRESHOLD
    }

    pub fn is_noop(&self) -> bool {
        self.t == 1.0
    }

    /// `‖𝓘_ps − 𝓘/t²‖_max`
    pub fn prediction_error(&self) -> f64 {
        real_max_norm(&(self.qfim_exact.matrix() - self.qfim_predicted.matrix()))
    }

    /// `‖𝓙_ps − 𝓙/t²‖_max`
    pub fn curvature_error(&self) -> f64 {
        let predicted = self.curvature_undistilled.matrix() / (self.t * self.t);
        real_max_norm(&(self.curvature_exact.matrix() - predicted))
    }

    /// Learnability intervals before and after distillation for an arbitrary
    /// weight and trial count.
    pub fn risks(&self, weight: &RMatrix, trials: u64) -> (Result<Interval>, Result<Interval>) {
        (
            learnability_interval(&self.qfim_undistilled, weight, trials),
            learnability_interval(&self.qfim_exact, weight, trials),
        )
    }

    /// Geometric quantumness before and after distillation.
    pub fn quantumness(&self) -> (Result<f64>, Result<f64>) {
        (
            geometric_quantumness(&self.qfim_undistilled, &self.curvature_undistilled),
            geometric_quantumness(&self.qfim_exact, &self.curvature_exact),
        )
    }
}

pub fn distillation_report(
    circuit: &EncodingCircuit,
    theta_true: &ParamVector,
    theta_guess: &ParamVector,
    t: f64,
) -> Result<DistillationReport> {
    if theta_guess.len() != theta_true.len() {
        return Err(Error::dim("initial estimate", theta_true.len(), theta_guess.len()));
    }
    let plan = kraus_from_estimate(circuit, theta_guess, t)?;
    let exact = postselected_geometry(circuit, theta_true, &plan.postselection_effect)?;
    let undistilled = qfim_pure(circuit, theta_true)?;
    let curvature = uhlmann_curvature(circuit, theta_true)?;
    let predicted = undistilled.scaled(1.0 / (t * t));
    let lossless_residual =
        real_max_norm(&(exact.qfim.matrix() * exact.p_ps - undistilled.matrix()));
    let delta_sq: f64 = theta_true.minus(theta_guess).0.iter().map(|d| d * d).sum();
    let unit = RMatrix::identity(circuit.num_params(), circuit.num_params());
    Ok(DistillationReport {
        t,
        p_ps: exact.p_ps,
        risk_before: learnability_interval(&undistilled, &unit, 1).ok(),
        risk_after: learnability_interval(&exact.qfim, &unit, 1).ok(),
        qfim_exact: exact.qfim,
        qfim_predicted: predicted,
        qfim_undistilled: undistilled,
        curvature_exact: exact.curvature,
        curvature_undistilled: curvature,
        lossless_residual,
        regime_ratio: delta_sq / (t * t),
    })
}

/// One report per transmissivity, in input order. Points fail independently.
pub fn t_sweep(
    circuit: &EncodingCircuit,
    theta_true: &ParamVector,
    theta_guess: &ParamVector,
    t_values: &[f64],
) -> Vec<Result<DistillationReport>> {
    t_values
        .par_iter()
        .map(|&t| distillation_report(circuit, theta_true, theta_guess, t))
        .collect()
}
