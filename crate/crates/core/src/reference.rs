//! Built-in two-parameter qubit benchmark.
//!
//! `|ψ₀⟩ = |0⟩`, generators `σ_x` then `(σ_x + σ_z)/√2`. The QFIM has the
//! closed form `[[4, 2√2], [2√2, 3 − cos 4θ₁]]`, independent of `θ₂`. The
//! initial estimate is off by `δ` in both parameters and the filter has
//! transmissivity `t`, so distillation should give `p_ps ≈ t²` and a QFIM
//! close to `𝓘/t²`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, SQRT_2};

use crate::circuit::{EncodingCircuit, ParamVector, PureState};
use crate::distill::{distillation_report, DistillationReport};
use crate::error::Result;
use crate::fisher::{learnability_interval, qfim_pure, Qfim};
use crate::linalg::{real_max_norm, CMatrix, Hermitian, RMatrix, C64};

pub const QFIM_TOL: f64 = 1e-9;
pub const P_PS_TOL: f64 = 0.02;
pub const RELATIVE_ENTRY_TOL: f64 = 0.25;
const GRID_POINTS: usize = 5;

pub fn circuit() -> EncodingCircuit {
    let x = CMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]);
    let z = CMatrix::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()]);
    let mixed = (&x + z) * C64::new(FRAC_1_SQRT_2, 0.0);
    EncodingCircuit::new(
        vec![Hermitian::new(x).unwrap(), Hermitian::new(mixed).unwrap()],
        PureState::basis(2, 0).unwrap(),
    )
    .expect("reference circuit is valid")
}

pub fn closed_form_qfim(theta1: f64) -> RMatrix {
    let off = 2.0 * SQRT_2;
    RMatrix::from_row_slice(2, 2, &[4.0, off, off, 3.0 - (4.0 * theta1).cos()])
}

#[derive(Debug, Clone)]
pub struct ReferenceExample {
    pub theta: ParamVector,
    /// Error of the initial estimate in every component.
    pub delta: f64,
    pub t: f64,
}

impl Default for ReferenceExample {
    fn default() -> Self {
        Self {
            theta: ParamVector(vec![FRAC_PI_4, 0.3]),
            delta: 0.1,
            t: 1.0 / 10f64.sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PinnedCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct ReferenceRun {
    pub qfim: Qfim,
    pub closed_form: RMatrix,
    pub risk: Result<(f64, f64)>,
    pub distillation: Result<DistillationReport>,
    pub checks: Vec<PinnedCheck>,
}

impl ReferenceRun {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl ReferenceExample {
    pub fn theta_guess(&self) -> ParamVector {
        ParamVector(self.theta.0.iter().map(|x| x + self.delta).collect())
    }

    pub fn run(&self) -> Result<ReferenceRun> {
        let circuit = circuit();
        let qfim = qfim_pure(&circuit, &self.theta)?;
        let closed_form = closed_form_qfim(self.theta.0[0]);
        let risk = learnability_interval(&qfim, &RMatrix::identity(2, 2), 1);
        let distillation = distillation_report(&circuit, &self.theta, &self.theta_guess(), self.t);

        let mut checks = vec![qfim_point_check(&qfim, &closed_form), qfim_grid_check(&circuit)?];
        match &distillation {
            Ok(report) => {
                checks.push(success_probability_check(report));
                checks.push(distilled_qfim_check(report, &closed_form));
            }
            Err(e) => checks.push(PinnedCheck {
                name: "distillation",
                passed: false,
                detail: e.to_string(),
            }),
        }
        Ok(ReferenceRun {
            qfim,
            closed_form,
            risk,
            distillation,
            checks,
        })
    }
}

fn qfim_point_check(qfim: &Qfim, closed_form: &RMatrix) -> PinnedCheck {
    let err = real_max_norm(&(qfim.matrix() - closed_form));
    PinnedCheck {
        name: "qfim closed form",
        passed: err <= QFIM_TOL,
        detail: format!("max deviation {err:.3e} (tolerance {QFIM_TOL:.0e})"),
    }
}

fn qfim_grid_check(circuit: &EncodingCircuit) -> Result<PinnedCheck> {
    let step = FRAC_PI_2 / (GRID_POINTS - 1) as f64;
    let mut worst = 0.0f64;
    for a in 0..GRID_POINTS {
        for b in 0..GRID_POINTS {
            let theta = ParamVector(vec![a as f64 * step, b as f64 * step]);
            let qfim = qfim_pure(circuit, &theta)?;
            worst = worst.max(real_max_norm(&(qfim.matrix() - closed_form_qfim(theta.0[0]))));
        }
    }
    Ok(PinnedCheck {
        name: "qfim closed form on 5x5 grid",
        passed: worst <= QFIM_TOL,
        detail: format!("max deviation {worst:.3e} over [0, pi/2]^2"),
    })
}

fn success_probability_check(report: &DistillationReport) -> PinnedCheck {
    let target = report.t * report.t;
    PinnedCheck {
        name: "success probability",
        passed: (report.p_ps - target).abs() <= P_PS_TOL,
        detail: format!(
            "p_ps = {:.6} (expected {:.6} +/- {P_PS_TOL})",
            report.p_ps, target
        ),
    }
}

fn distilled_qfim_check(report: &DistillationReport, closed_form: &RMatrix) -> PinnedCheck {
    let gain = 1.0 / (report.t * report.t);
    let target = closed_form * gain;
    let worst = report
        .qfim_exact
        .matrix()
        .iter()
        .zip(target.iter())
        .map(|(got, want)| ((got - want) / want).abs())
        .fold(0.0f64, f64::max);
    PinnedCheck {
        name: "distilled qfim",
        passed: worst <= RELATIVE_ENTRY_TOL,
        detail: format!(
            "worst relative deviation from {gain:.4} x closed form: {:.1}% (tolerance {:.0}%)",
            100.0 * worst,
            100.0 * RELATIVE_ENTRY_TOL
        ),
    }
}
