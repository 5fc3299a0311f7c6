//! Sequential one-parameter encoding circuits.
//!
//! A circuit holds Hermitian generators `A_1, …, A_M` in *application order*:
//! `A_1` acts first on the initial state and `A_M` last, so the full unitary is
//! `U(θ) = U_M(θ_M) ⋯ U_1(θ_1)` with `U_m(θ) = exp(i θ A_m)`.
//!
//! Parameter and generator indices in this API are zero-based.

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, outer, CMatrix, CVector, EigenDecomposition, Hermitian, C64};

const NORM_TOL: f64 = 1e-10;

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(CVector);

impl PureState {
    /// Accepts a vector whose norm is 1 to within 1e-10.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Invalid("empty state vector".into()));
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("state vector".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invalid(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self(amplitudes))
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Invalid("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn density_matrix(&self) -> CMatrix {
        outer(&self.0)
    }
}

/// Parameter vector `θ`, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `self + step · e_index`
    pub fn shifted(&self, index: usize, step: f64) -> Self {
        let mut v = self.0.clone();
        v[index] += step;
        Self(v)
    }

    /// Componentwise `self - other`.
    pub fn minus(&self, other: &ParamVector) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone)]
struct Generator {
    operator: Hermitian,
    eig: EigenDecomposition,
}

/// `U(θ)|ψ₀⟩` with generators stored in application order.
#[derive(Debug, Clone)]
pub struct EncodingCircuit {
    generators: Vec<Generator>,
    initial_state: PureState,
}

impl EncodingCircuit {
    pub fn new(generators: Vec<Hermitian>, initial_state: PureState) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Invalid("circuit needs at least one generator".into()));
        }
        let dim = initial_state.dim();
        let generators = generators
            .into_iter()
            .enumerate()
            .map(|(m, operator)| {
                if operator.dim() != dim {
                    return Err(Error::dim(format!("generator {m}"), dim, operator.dim()));
                }
                let eig = herm_eig(&operator)?;
                Ok(Generator { operator, eig })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            generators,
            initial_state,
        })
    }

    pub fn dim(&self) -> usize {
        self.initial_state.dim()
    }

    /// Number of parameters `M`.
    pub fn num_params(&self) -> usize {
        self.generators.len()
    }

    pub fn generator(&self, m: usize) -> Result<&Hermitian> {
        self.generators
            .get(m)
            .map(|g| &g.operator)
            .ok_or(Error::IndexOutOfRange {
                index: m,
                len: self.num_params(),
            })
    }

    /// Ascending spectrum of generator `m`.
    pub fn generator_spectrum(&self, m: usize) -> Result<&[f64]> {
        self.generator(m)?;
        Ok(&self.generators[m].eig.eigenvalues)
    }

    pub fn initial_state(&self) -> &PureState {
        &self.initial_state
    }

    fn check_params(&self, theta: &ParamVector) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::dim("parameter vector", self.num_params(), theta.len()));
        }
        if !theta.0.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("parameter vector".into()));
        }
        Ok(())
    }

    fn check_index(&self, m: usize) -> Result<()> {
        if m >= self.num_params() {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.num_params(),
            });
        }
        Ok(())
    }

    /// `U_m(θ) = exp(i θ A_m)`.
    pub fn step_unitary(&self, m: usize, theta: f64) -> Result<CMatrix> {
        self.check_index(m)?;
        Ok(self.generators[m]
            .eig
            .map_spectrum(|a| C64::from_polar(1.0, theta * a)))
    }

    /// Full circuit unitary `U(θ)`.
    pub fn unitary(&self, theta: &ParamVector) -> Result<CMatrix> {
        self.check_params(theta)?;
        let mut u = CMatrix::identity(self.dim(), self.dim());
        for (m, &angle) in theta.0.iter().enumerate() {
            u = self.step_unitary(m, angle)? * u;
        }
        Ok(u)
    }

    /// `|ψ_θ⟩ = U(θ)|ψ₀⟩`.
    pub fn evolve(&self, theta: &ParamVector) -> Result<PureState> {
        self.check_params(theta)?;
        let mut v = self.initial_state.amplitudes().clone();
        for (m, &angle) in theta.0.iter().enumerate() {
            v = self.step_unitary(m, angle)? * v;
        }
        // keep the norm pinned at 1 against accumulated roundoff
        let norm = v.norm();
        Ok(PureState(v.unscale(norm)))
    }

    /// `Ã_m = (U_M ⋯ U_{m+1}) A_m (U_M ⋯ U_{m+1})†`; the last generator is
    /// returned unchanged.
    pub fn tilde_generator(&self, theta: &ParamVector, m: usize) -> Result<Hermitian> {
        self.check_params(theta)?;
        self.check_index(m)?;
        let mut later = CMatrix::identity(self.dim(), self.dim());
        for k in m + 1..self.num_params() {
            later = self.step_unitary(k, theta.0[k])? * later;
        }
        if m + 1 == self.num_params() {
            return Ok(self.generators[m].operator.clone());
        }
        Ok(self.generators[m].operator.conjugated(&later))
    }

    /// All conjugated generators at once, sharing the suffix products.
    pub fn tilde_generators(&self, theta: &ParamVector) -> Result<Vec<Hermitian>> {
        self.check_params(theta)?;
        let m_total = self.num_params();
        let mut out = vec![self.generators[m_total - 1].operator.clone(); m_total];
        let mut later = CMatrix::identity(self.dim(), self.dim());
        for m in (0..m_total - 1).rev() {
            later *= self.step_unitary(m + 1, theta.0[m + 1])?;
            out[m] = self.generators[m].operator.conjugated(&later);
        }
        Ok(out)
    }

    /// Tangent vector `∂_j|ψ_θ⟩ = i Ã_j |ψ_θ⟩`, unnormalized.
    pub fn derivative_state(&self, theta: &ParamVector, j: usize) -> Result<CVector> {
        let psi = self.evolve(theta)?;
        let tilde = self.tilde_generator(theta, j)?;
        Ok(tilde.matrix() * psi.amplitudes() * C64::new(0.0, 1.0))
    }

    /// All tangent vectors together with `|ψ_θ⟩`.
    pub fn derivative_states(&self, theta: &ParamVector) -> Result<(PureState, Vec<CVector>)> {
        let psi = self.evolve(theta)?;
        let derivs = self
            .tilde_generators(theta)?
            .iter()
            .map(|a| a.matrix() * psi.amplitudes() * C64::new(0.0, 1.0))
            .collect();
        Ok((psi, derivs))
    }
}

/// `a_max - a_min` of a Hermitian operator.
pub fn spectral_gap(a: &Hermitian) -> Result<f64> {
    let eig = herm_eig(a)?;
    let n = eig.eigenvalues.len();
    Ok(eig.eigenvalues[n - 1] - eig.eigenvalues[0])
}
