//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are plain `nalgebra` dynamic matrices over `Complex64`. The only
//! checked wrapper is [`Hermitian`], which carries the Hermiticity invariant
//! that eigendecompositions and unitary exponentials rely on.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;

/// Relative Hermiticity tolerance, scaled by the max-norm of the input.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Default relative singular-value threshold for [`invert`].
pub const DEFAULT_INVERT_TOL: f64 = 1e-10;

const EIG_MAX_ITER: usize = 10_000;

/// Largest absolute entry.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn real_max_norm(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// `|v><v|`
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub(crate) fn check_finite(m: &CMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

pub(crate) fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// A square complex matrix equal to its own adjoint.
///
/// Construction accepts inputs whose anti-Hermitian part is below
/// [`HERMITICITY_TOL`] times the max-norm and stores the symmetrized matrix
/// `(H + H†)/2`. Anything further off is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        if m.nrows() == 0 {
            return Err(Error::Invalid("empty matrix".into()));
        }
        check_finite(&m, "Hermitian matrix")?;
        let deviation = max_norm(&(&m - m.adjoint()));
        if deviation > HERMITICITY_TOL * max_norm(&m) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Builds from a real symmetric matrix.
    pub fn from_real(m: &RMatrix) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Hermitian((m + adj) * C64::new(0.5, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// `U H U†` for unitary `U`.
    pub fn conjugated(&self, unitary: &CMatrix) -> Self {
        Self::symmetrized(unitary * &self.0 * unitary.adjoint())
    }
}

impl AsRef<CMatrix> for Hermitian {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Eigenvalues in ascending order with matching unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// `V diag(a) V†`
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&a| C64::new(a, 0.0)),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    /// Applies `f` to the spectrum: `V diag(f(a)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &a) in self.eigenvalues.iter().enumerate() {
            let fa = f(a);
            for i in 0..n {
                scaled[(i, j)] *= fa;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }
}

pub fn herm_eig(h: &Hermitian) -> Result<EigenDecomposition> {
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(i θ A)` through the eigendecomposition of `A`.
pub fn unitary_exp(a: &Hermitian, theta: f64) -> Result<CMatrix> {
    Ok(herm_eig(a)?.map_spectrum(|x| C64::from_polar(1.0, theta * x)))
}

fn singular_guard(singular_values: &[f64], tol: f64) -> Result<()> {
    let largest = singular_values.iter().copied().fold(0.0, f64::max);
    let smallest = singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if largest == 0.0 || smallest < tol * largest {
        return Err(Error::Singular { smallest, largest });
    }
    Ok(())
}

/// Inverse of a square matrix, refusing to pseudo-invert.
///
/// Fails with [`Error::Singular`] when the smallest singular value is below
/// `tol` times the largest.
pub fn invert(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    check_square(m)?;
    check_finite(m, "matrix to invert")?;
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    singular_guard(svd.singular_values.as_slice(), tol)?;
    let u = svd.u.as_ref().ok_or(Error::NoConvergence)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::NoConvergence)?;
    let mut v = v_t.adjoint();
    for (j, s) in svd.singular_values.iter().enumerate() {
        v.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(v * u.adjoint())
}

/// Real counterpart of [`invert`] for Fisher-information matrices.
pub fn invert_real(m: &RMatrix, tol: f64) -> Result<RMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("matrix to invert".into()));
    }
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    singular_guard(svd.singular_values.as_slice(), tol)?;
    let u = svd.u.as_ref().ok_or(Error::NoConvergence)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::NoConvergence)?;
    let mut v = v_t.transpose();
    for (j, s) in svd.singular_values.iter().enumerate() {
        v.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(v * u.transpose())
}

/// Largest eigenvalue modulus of a diagonalizable matrix.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    check_square(m)?;
    check_finite(m, "matrix")?;
    let schur = Schur::try_new(m.clone(), f64::EPSILON, EIG_MAX_ITER).ok_or(Error::NoConvergence)?;
    let eigenvalues = schur.eigenvalues().ok_or(Error::NoConvergence)?;
    Ok(eigenvalues.iter().fold(0.0, |acc, z| acc.max(z.norm())))
}

/// Smallest eigenvalue of a Hermitian matrix given without the wrapper.
pub(crate) fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let h = Hermitian::symmetrized(m.clone());
    Ok(herm_eig(&h)?.eigenvalues[0])
}

pub(crate) fn real_min_eigenvalue(m: &RMatrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pauli_x_spectrum() {
        let eig = herm_eig(&Hermitian::new(pauli_x()).unwrap()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let eig = herm_eig(&Hermitian::new(identity(3)).unwrap()).unwrap();
        for a in &eig.eigenvalues {
            assert!((a - 1.0).abs() < 1e-12);
        }
        let v = &eig.eigenvectors;
        assert_close(&(v.adjoint() * v), &identity(3), 1e-10);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = Hermitian::new(random_hermitian(&mut rng, 4)).unwrap();
        let eig = herm_eig(&h).unwrap();
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_close(&eig.reconstruct(), h.matrix(), 1e-10);
        let v = &eig.eigenvectors;
        assert_close(&(v.adjoint() * v), &identity(4), 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = pauli_x();
        m[(0, 1)] = c(2.0);
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(Hermitian::new(rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let mut m = pauli_x();
        m[(0, 1)] = c(1.0 + 1e-14);
        let h = Hermitian::new(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
    }

    #[test]
    fn unitary_exp_examples() {
        let x = Hermitian::new(pauli_x()).unwrap();
        assert_close(&unitary_exp(&x, 0.0).unwrap(), &identity(2), 1e-12);
        let expected = pauli_x() * C64::new(0.0, 1.0);
        assert_close(&unitary_exp(&x, FRAC_PI_2).unwrap(), &expected, 1e-12);

        let d = Hermitian::new(CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.3), c(-1.7)])))
            .unwrap();
        let u = unitary_exp(&d, 0.9).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::from_polar(1.0, 0.9 * 0.3),
            C64::from_polar(1.0, -0.9 * 1.7),
        ]));
        assert_close(&u, &expected, 1e-12);
    }

    #[test]
    fn invert_examples() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(4.0), c(4.0)]));
        let inv = invert(&m, DEFAULT_INVERT_TOL).unwrap();
        assert_close(&inv, &(identity(2) * c(0.25)), 1e-14);

        let r = 2.0 * SQRT_2;
        let singular = CMatrix::from_row_slice(2, 2, &[c(4.0), c(r), c(r), c(2.0)]);
        match invert(&singular, DEFAULT_INVERT_TOL) {
            Err(Error::Singular { smallest, largest }) => {
                assert!(smallest < 1e-12 && (largest - 6.0).abs() < 1e-9)
            }
            other => panic!("expected singular failure, got {other:?}"),
        }

        let m = CMatrix::from_row_slice(2, 2, &[c(4.0), c(r), c(r), c(4.0)]);
        let expected =
            CMatrix::from_row_slice(2, 2, &[c(4.0), c(-r), c(-r), c(4.0)]) * c(1.0 / 8.0);
        assert_close(&invert(&m, DEFAULT_INVERT_TOL).unwrap(), &expected, 1e-14);
    }

    #[test]
    fn invert_real_matches_complex() {
        let r = RMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let a = invert_real(&r, DEFAULT_INVERT_TOL).unwrap();
        let b = invert(&r.map(|x| C64::new(x, 0.0)), DEFAULT_INVERT_TOL).unwrap();
        assert_close(&a.map(|x| C64::new(x, 0.0)), &b, 1e-14);
        assert!(invert_real(&RMatrix::zeros(2, 2), DEFAULT_INVERT_TOL).is_err());
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm(&identity(2)).unwrap() - 1.0).abs() < 1e-12);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.3), c(-0.7)]));
        assert!((spectral_norm(&d).unwrap() - 0.7).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = Hermitian::new(random_hermitian(&mut rng, 5)).unwrap();
        let eig = herm_eig(&h).unwrap();
        let expected = eig.eigenvalues.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        assert!((spectral_norm(h.matrix()).unwrap() - expected).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exp_inverse_and_group_law(seed in any::<u64>(), dim in 1usize..6,
                                     t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Hermitian::new(random_hermitian(&mut rng, dim)).unwrap();
            let u = unitary_exp(&a, t1).unwrap();
            let u_inv = unitary_exp(&a, -t1).unwrap();
            prop_assert!(max_norm(&(&u * &u_inv - identity(dim))) < 1e-10);
            prop_assert!(max_norm(&(&u * u.adjoint() - identity(dim))) < 1e-10);
            let joint = unitary_exp(&a, t1 + t2).unwrap();
            let product = &u * unitary_exp(&a, t2).unwrap();
            prop_assert!(max_norm(&(joint - product)) < 1e-10);
        }

        #[test]
        fn successful_inverse_is_inverse(seed in any::<u64>(), dim in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = CMatrix::from_fn(dim, dim, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            if let Ok(inv) = invert(&m, DEFAULT_INVERT_TOL) {
                prop_assert!(max_norm(&(inv * &m - identity(dim))) < 1e-9);
            }
        }
    }
}
