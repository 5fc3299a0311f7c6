//! Classical and quantum Fisher information for pure-state encodings.

use crate::circuit::{EncodingCircuit, ParamVector};
use crate::error::{Error, Result};
use crate::linalg::{
    check_finite, check_square, identity, invert_real, max_norm, min_eigenvalue,
    real_max_norm, real_min_eigenvalue, spectral_norm, CMatrix, RMatrix, C64, DEFAULT_INVERT_TOL,
};

/// Outcomes below this Born probability are dropped from Fisher sums.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// `|∂p|` above which a dropped outcome marks the Fisher matrix as divergent.
pub const DIVERGENCE_SLOPE: f64 = 1e-8;

const MATRIX_TOL: f64 = 1e-9;
const POVM_TOL: f64 = 1e-10;
const QUANTUMNESS_TOL: f64 = 1e-9;

/// Symmetric positive semidefinite Fisher-information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Qfim(RMatrix);

impl Qfim {
    /// Checks symmetry and positivity (relative to the max-norm), then
    /// replaces the input by its symmetric part.
    pub fn new(m: RMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("Fisher matrix".into()));
        }
        let scale = real_max_norm(&m).max(1.0);
        let asym = real_max_norm(&(&m - m.transpose()));
        if asym > MATRIX_TOL * scale {
            return Err(Error::Invalid(format!("Fisher matrix asymmetric by {asym:e}")));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let min_eig = real_min_eigenvalue(&sym);
        if min_eig < -MATRIX_TOL * scale {
            return Err(Error::Invalid(format!(
                "Fisher matrix not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self(sym))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }
}

/// Antisymmetric companion of the QFIM (imaginary part of the geometric tensor).
#[derive(Debug, Clone, PartialEq)]
pub struct UhlmannCurvature(RMatrix);

impl UhlmannCurvature {
    /// Keeps the strict upper triangle of `m` and mirrors it with a sign flip.
    pub fn from_upper(m: &RMatrix) -> Self {
        let n = m.nrows();
        Self(RMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => m[(i, j)],
            std::cmp::Ordering::Greater => -m[(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }
}

/// Positive operator-valued measure: PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::Invalid("POVM needs at least one effect".into()))?;
        let dim = check_square(first)?;
        let mut total = CMatrix::zeros(dim, dim);
        for (k, e) in elements.iter().enumerate() {
            if check_square(e)? != dim {
                return Err(Error::dim(format!("POVM effect {k}"), dim, e.nrows()));
            }
            check_finite(e, "POVM effect")?;
            let herm_dev = max_norm(&(e - e.adjoint()));
            if herm_dev > POVM_TOL {
                return Err(Error::NotHermitian { deviation: herm_dev });
            }
            let min = min_eigenvalue(e)?;
            if min < -POVM_TOL {
                return Err(Error::Invalid(format!(
                    "POVM effect {k} is not positive semidefinite (min eigenvalue {min:e})"
                )));
            }
            total += e;
        }
        let dev = max_norm(&(total - identity(dim)));
        if dev > POVM_TOL {
            return Err(Error::Invalid(format!(
                "POVM effects do not sum to identity (deviation {dev:e})"
            )));
        }
        Ok(Self { elements })
    }

    /// Rank-1 projective measurement onto the columns of a unitary.
    pub fn projective(basis: &CMatrix) -> Result<Self> {
        let effects = (0..basis.ncols())
            .map(|k| {
                let v = basis.column(k);
                v * v.adjoint()
            })
            .collect();
        Self::new(effects)
    }

    /// `{F, 1 − F}`.
    pub fn two_outcome(effect: CMatrix) -> Result<Self> {
        let dim = check_square(&effect)?;
        let complement = identity(dim) - &effect;
        Self::new(vec![effect, complement])
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Born probabilities `⟨ψ|F_k|ψ⟩`.
    pub fn probabilities(&self, circuit: &EncodingCircuit, theta: &ParamVector) -> Result<Vec<f64>> {
        self.check_circuit(circuit)?;
        let psi = circuit.evolve(theta)?;
        let v = psi.amplitudes();
        Ok(self.elements.iter().map(|e| v.dotc(&(e * v)).re).collect())
    }

    fn check_circuit(&self, circuit: &EncodingCircuit) -> Result<()> {
        if self.dim() != circuit.dim() {
            return Err(Error::dim("POVM", circuit.dim(), self.dim()));
        }
        Ok(())
    }
}

/// Classical Fisher matrix of a measurement, with a flag raised when an
/// outcome below [`PROBABILITY_FLOOR`] still had a non-vanishing slope.
#[derive(Debug, Clone)]
pub struct ClassicalFim {
    pub matrix: RMatrix,
    pub divergent: bool,
}

pub fn classical_fim(
    circuit: &EncodingCircuit,
    theta: &ParamVector,
    povm: &Povm,
) -> Result<ClassicalFim> {
    povm.check_circuit(circuit)?;
    let (psi, derivs) = circuit.derivative_states(theta)?;
    let v = psi.amplitudes();
    let m = circuit.num_params();
    let mut fim = RMatrix::zeros(m, m);
    let mut divergent = false;
    for effect in povm.elements() {
        let fv = effect * v;
        let p = v.dotc(&fv).re;
        // ∂_i p = 2 Re ⟨ψ|F|∂_iψ⟩
        let grad: Vec<f64> = derivs.iter().map(|d| 2.0 * fv.dotc(d).re).collect();
        if p < PROBABILITY_FLOOR {
            divergent |= grad.iter().any(|g| g.abs() > DIVERGENCE_SLOPE);
            continue;
        }
        for i in 0..m {
            for j in 0..m {
                fim[(i, j)] += grad[i] * grad[j] / p;
            }
        }
    }
    Ok(ClassicalFim {
        matrix: fim,
        divergent,
    })
}

/// Raw geometric tensor `⟨∂_iψ|∂_jψ⟩ − ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩`.
fn geometric_tensor(circuit: &EncodingCircuit, theta: &ParamVector) -> Result<CMatrix> {
    let (psi, derivs) = circuit.derivative_states(theta)?;
    let v = psi.amplitudes();
    let m = circuit.num_params();
    let overlaps: Vec<C64> = derivs.iter().map(|d| v.dotc(d)).collect();
    Ok(CMatrix::from_fn(m, m, |i, j| {
        derivs[i].dotc(&derivs[j]) - overlaps[i].conj() * overlaps[j]
    }))
}

/// Pure-state SLD quantum Fisher information matrix.
pub fn qfim_pure(circuit: &EncodingCircuit, theta: &ParamVector) -> Result<Qfim> {
    let g = geometric_tensor(circuit, theta)?;
    Qfim::new(g.map(|z| 4.0 * z.re))
}

pub fn uhlmann_curvature(circuit: &EncodingCircuit, theta: &ParamVector) -> Result<UhlmannCurvature> {
    let g = geometric_tensor(circuit, theta)?;
    Ok(UhlmannCurvature::from_upper(&g.map(|z| 4.0 * z.im)))
}

/// Scalar Cramér-Rao risk `Tr[W I⁻¹]/N` for a weight matrix `W` and `N` trials.
#[derive(Debug, Clone)]
pub struct WeightedRisk {
    pub weight: RMatrix,
    pub trials: u64,
    pub value: f64,
}

fn check_weight(weight: &RMatrix, dim: usize) -> Result<()> {
    if weight.nrows() != dim || weight.ncols() != dim {
        return Err(Error::dim("weight matrix", dim, weight.nrows()));
    }
    let scale = real_max_norm(weight).max(1.0);
    if real_max_norm(&(weight - weight.transpose())) > 1e-10 * scale {
        return Err(Error::Invalid("weight matrix is not symmetric".into()));
    }
    if real_min_eigenvalue(weight) <= 1e-10 * scale {
        return Err(Error::Invalid("weight matrix is not positive definite".into()));
    }
    Ok(())
}

pub fn scalar_risk(fim: &RMatrix, weight: &RMatrix, trials: u64) -> Result<WeightedRisk> {
    if trials == 0 {
        return Err(Error::Invalid("number of trials must be positive".into()));
    }
    check_weight(weight, fim.nrows())?;
    let inv = invert_real(fim, DEFAULT_INVERT_TOL)?;
    let value = (weight * inv).trace() / trials as f64;
    Ok(WeightedRisk {
        weight: weight.clone(),
        trials,
        value,
    })
}

/// Pure-state bracket `[Tr[W𝓘⁻¹]/N, 2Tr[W𝓘⁻¹]/N]` on the most-informative risk.
pub fn learnability_interval(qfim: &Qfim, weight: &RMatrix, trials: u64) -> Result<(f64, f64)> {
    let lower = scalar_risk(qfim.matrix(), weight, trials)?.value;
    Ok((lower, 2.0 * lower))
}

/// `‖i 𝓘⁻¹ 𝓙‖_∞`, the largest eigenvalue modulus.
pub fn geometric_quantumness(qfim: &Qfim, curvature: &UhlmannCurvature) -> Result<f64> {
    if qfim.dim() != curvature.dim() {
        return Err(Error::dim("Uhlmann curvature", qfim.dim(), curvature.dim()));
    }
    let inv = invert_real(qfim.matrix(), DEFAULT_INVERT_TOL)?;
    let x = (inv * curvature.matrix()).map(|v| C64::new(0.0, v));
    let q = spectral_norm(&x)?;
    if q > 1.0 + QUANTUMNESS_TOL {
        return Err(Error::QuantumnessOutOfRange(q));
    }
    Ok(q.min(1.0))
}
