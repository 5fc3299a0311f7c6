//! Random scenario generators and independent reference computations shared
//! by the integration targets.
#![allow(dead_code)]

use psqfim::linalg::{herm_eig, identity};
use psqfim::{CMatrix, CVector, EncodingCircuit, Hermitian, ParamVector, PureState, RMatrix, C64};
use rand::Rng;

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()])
}

/// `|0⟩`, `σ_x` then `(σ_x + σ_z)/√2`.
pub fn qubit_circuit() -> EncodingCircuit {
    let mixed = (pauli_x() + pauli_z()) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    EncodingCircuit::new(
        vec![Hermitian::new(pauli_x()).unwrap(), Hermitian::new(mixed).unwrap()],
        PureState::basis(2, 0).unwrap(),
    )
    .unwrap()
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Hermitian matrix rescaled to unit spectral radius.
pub fn unit_hermitian<R: Rng>(rng: &mut R, dim: usize) -> Hermitian {
    let x = CMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    let h = (&x + x.adjoint()) * C64::new(0.5, 0.0);
    let radius = herm_eig(&Hermitian::new(h.clone()).unwrap())
        .unwrap()
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, a| m.max(a.abs()));
    Hermitian::new(h / C64::new(radius, 0.0)).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> PureState {
    PureState::normalized(CVector::from_fn(dim, |_, _| random_complex(rng))).unwrap()
}

pub fn random_circuit<R: Rng>(rng: &mut R, dim: usize, params: usize) -> EncodingCircuit {
    let generators = (0..params).map(|_| unit_hermitian(rng, dim)).collect();
    EncodingCircuit::new(generators, random_state(rng, dim)).unwrap()
}

pub fn random_params<R: Rng>(rng: &mut R, len: usize) -> ParamVector {
    ParamVector((0..len).map(|_| rng.random_range(-3.1..3.1)).collect())
}

/// Random unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    herm_eig(&unit_hermitian(rng, dim)).unwrap().eigenvectors
}

/// `|φ⟩⟨φ|` for a random `φ`.
pub fn rank_one_effect<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    random_state(rng, dim).density_matrix()
}

/// `U diag(w) U†` with weights in `[0, 1]`.
pub fn smeared_effect<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let u = random_unitary(rng, dim);
    let w = CMatrix::from_diagonal(&CVector::from_fn(dim, |_, _| C64::new(rng.random_range(0.0..1.0), 0.0)));
    let f = &u * w * u.adjoint();
    (&f + f.adjoint()) * C64::new(0.5, 0.0)
}

/// Central-difference derivative of the output state.
pub fn fd_derivative(circuit: &EncodingCircuit, theta: &ParamVector, j: usize, h: f64) -> CVector {
    let plus = circuit.evolve(&theta.shifted(j, h)).unwrap();
    let minus = circuit.evolve(&theta.shifted(j, -h)).unwrap();
    (plus.amplitudes() - minus.amplitudes()) / C64::new(2.0 * h, 0.0)
}

/// Geometric tensor from finite-difference derivatives of a state map.
pub fn fd_geometric_tensor(state: impl Fn(&ParamVector) -> CVector, theta: &ParamVector, h: f64) -> CMatrix {
    let psi = state(theta);
    let derivs: Vec<CVector> = (0..theta.len())
        .map(|j| (state(&theta.shifted(j, h)) - state(&theta.shifted(j, -h))) / C64::new(2.0 * h, 0.0))
        .collect();
    let m = theta.len();
    CMatrix::from_fn(m, m, |i, j| {
        derivs[i].dotc(&derivs[j]) - derivs[i].dotc(&psi) * psi.dotc(&derivs[j])
    })
}

pub fn real_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.re)
}

pub fn max_abs(m: &RMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

pub fn identity_effect(dim: usize) -> CMatrix {
    identity(dim)
}
