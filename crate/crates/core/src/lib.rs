//! Postselected multiparameter quantum metrology.
//!
//! Quantum Fisher information of sequential unitary encodings, lossless
//! information distillation through postselection, and the Kirkwood-Dirac
//! quasiprobability analysis that bounds what postselection can achieve.

pub mod circuit;
pub mod distill;
pub mod error;
pub mod estimator;
pub mod fisher;
pub mod kd;
pub mod linalg;
pub mod reference;
pub mod scenario;

pub use circuit::{spectral_gap, EncodingCircuit, ParamVector, PureState};
pub use distill::{
    distillation_report, kraus_from_estimate, postselect, postselected_geometry, qfim_postselected, t_sweep,
    DistillationPlan, DistillationReport, PostselectedGeometry,
};
pub use error::{Error, Result};
pub use estimator::{
    crb_comparison, mle_fit, observed_information, run_crb, sample_outcomes, CrbComparison, CrbOutcome, CrbRun,
    SampleBatch,
};
pub use fisher::{
    classical_fim, geometric_quantumness, learnability_interval, qfim_pure, scalar_risk,
    uhlmann_curvature, ClassicalFim, Povm, Qfim, UhlmannCurvature, WeightedRisk,
};
pub use kd::{
    condition_on_postselection, eigenprojectors, kd_analysis, kd_distribution, negativity_report, qfim_entry_kd,
    thm1_check, ConditionedKd, EigenProjectorSet, KdAnalysis, KdDistribution, NegativityReport,
};
pub use scenario::{Scenario, ScenarioConfig};
pub use linalg::{herm_eig, invert, spectral_norm, unitary_exp, CMatrix, CVector, Hermitian, RMatrix, C64};
