//! Kirkwood-Dirac quasiprobabilities over two eigenprojector sets and a
//! two-outcome postselection.
//!
//! For projector sets `{Π_k}` and `{Π_l}` and effects `{F, 1 − F}` the
//! distribution is `q[k,l,m] = Tr[Π_k F_m Π_l ρ]`. Conditioning on the first
//! effect gives `Q[k,l] = q[k,l,0] / p_ps`, and the postselected QFIM entry is
//! four times the quasi-covariance of the two spectra under `Q`. When `Q` is a
//! genuine probability distribution that covariance is capped by the product
//! of spectral gaps, so any entry above the cap witnesses nonclassical `Q`.

use crate::circuit::{EncodingCircuit, ParamVector};
use crate::error::{Error, Result};
use crate::fisher::Povm;
use crate::linalg::{check_square, herm_eig, max_norm, min_eigenvalue, trace, CMatrix, Hermitian, C64};

pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;
/// Tolerance on negativity and imaginary parts when deciding classicality.
pub const CLASSICALITY_TOL: f64 = 1e-9;
/// Below this success probability conditioning is refused.
pub const POSTSELECTION_FLOOR: f64 = 1e-12;

const PROJECTOR_TOL: f64 = 1e-9;

/// Projectors onto the eigenspaces of distinct eigenvalues, ascending.
#[derive(Debug, Clone)]
pub struct EigenProjectorSet {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<CMatrix>,
    pub degeneracy_tol: f64,
}

impl EigenProjectorSet {
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    /// `Σ a_k Π_k`
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(n, n), |acc, (a, p)| acc + p * C64::new(*a, 0.0))
    }
}

/// Groups eigenvalues whose consecutive spacing is below `degeneracy_tol` and
/// returns one projector per group.
pub fn eigenprojectors(a: &Hermitian, degeneracy_tol: f64) -> Result<EigenProjectorSet> {
    if degeneracy_tol.is_nan() || degeneracy_tol < 0.0 {
        return Err(Error::Invalid("degeneracy tolerance must be nonnegative".into()));
    }
    let eig = herm_eig(a)?;
    let n = a.dim();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(c) if eig.eigenvalues[k] - eig.eigenvalues[*c.last().unwrap()] <= degeneracy_tol => {
                c.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let mean = cluster.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / cluster.len() as f64;
        let mut p = CMatrix::zeros(n, n);
        for &k in cluster {
            let v = eig.eigenvectors.column(k);
            p += v * v.adjoint();
        }
        let p = Hermitian::symmetrized(p).into_inner();
        let defect = max_norm(&(&p * &p - &p));
        if defect > PROJECTOR_TOL {
            return Err(Error::NoConvergence);
        }
        eigenvalues.push(mean);
        projectors.push(p);
    }
    Ok(EigenProjectorSet {
        eigenvalues,
        projectors,
        degeneracy_tol,
    })
}

/// Unconditioned three-index distribution `q[k,l,m]`.
#[derive(Debug, Clone)]
pub struct KdDistribution {
    q: Vec<C64>,
    pub set_i: EigenProjectorSet,
    pub set_j: EigenProjectorSet,
    pub postselection: Povm,
}

impl KdDistribution {
    pub fn shape(&self) -> (usize, usize) {
        (self.set_i.len(), self.set_j.len())
    }

    pub fn get(&self, k: usize, l: usize, m: usize) -> C64 {
        let (_, nl) = self.shape();
        self.q[(k * nl + l) * 2 + m]
    }

    pub fn total(&self) -> C64 {
        self.q.iter().sum()
    }

    /// Marginal over `(l, m)`: Born probabilities of the first projector set.
    pub fn marginal_i(&self) -> Vec<C64> {
        let (nk, nl) = self.shape();
        (0..nk)
            .map(|k| (0..nl).flat_map(|l| (0..2).map(move |m| (l, m))).map(|(l, m)| self.get(k, l, m)).sum())
            .collect()
    }

    /// Marginal over `(k, m)`.
    pub fn marginal_j(&self) -> Vec<C64> {
        let (nk, nl) = self.shape();
        (0..nl)
            .map(|l| (0..nk).flat_map(|k| (0..2).map(move |m| (k, m))).map(|(k, m)| self.get(k, l, m)).sum())
            .collect()
    }

    /// Marginal over `(k, l)`: probabilities of the two postselection outcomes.
    pub fn marginal_post(&self) -> [C64; 2] {
        let (nk, nl) = self.shape();
        let mut out = [C64::new(0.0, 0.0); 2];
        for k in 0..nk {
            for l in 0..nl {
                for (m, slot) in out.iter_mut().enumerate() {
                    *slot += self.get(k, l, m);
                }
            }
        }
        out
    }
}

fn check_density(rho: &CMatrix) -> Result<usize> {
    let n = check_square(rho)?;
    let dev = max_norm(&(rho - rho.adjoint()));
    if dev > 1e-10 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("density matrix has trace {}", tr.re)));
    }
    if min_eigenvalue(rho)? < -1e-9 {
        return Err(Error::Invalid("density matrix is not positive semidefinite".into()));
    }
    Ok(n)
}

/// `q[k,l,m] = Tr[Π_k^(i) F_m Π_l^(j) ρ]`.
pub fn kd_distribution(
    rho: &CMatrix,
    set_i: &EigenProjectorSet,
    set_j: &EigenProjectorSet,
    postselection: &Povm,
) -> Result<KdDistribution> {
    let n = check_density(rho)?;
    if postselection.len() != 2 {
        return Err(Error::Invalid(format!(
            "postselection must have exactly two effects, found {}",
            postselection.len()
        )));
    }
    for (what, d) in [
        ("projector set i", set_i.dim()),
        ("projector set j", set_j.dim()),
        ("postselection", postselection.dim()),
    ] {
        if d != n {
            return Err(Error::dim(what, n, d));
        }
    }
    let mut q = Vec::with_capacity(set_i.len() * set_j.len() * 2);
    let right: Vec<CMatrix> = set_j.projectors.iter().map(|p| p * rho).collect();
    for pk in &set_i.projectors {
        for pl_rho in &right {
            for f in postselection.elements() {
                q.push(trace(&(pk * f * pl_rho)));
            }
        }
    }
    Ok(KdDistribution {
        q,
        set_i: set_i.clone(),
        set_j: set_j.clone(),
        postselection: postselection.clone(),
    })
}

/// `Q[k,l]`, the distribution conditioned on the first postselection outcome.
#[derive(Debug, Clone)]
pub struct ConditionedKd {
    q: Vec<C64>,
    rows: usize,
    cols: usize,
    pub success_prob: f64,
}

impl ConditionedKd {
    /// Builds directly from entries, row-major in `(k, l)`.
    pub fn from_entries(rows: usize, cols: usize, q: Vec<C64>, success_prob: f64) -> Result<Self> {
        if q.len() != rows * cols {
            return Err(Error::dim("conditioned distribution", rows * cols, q.len()));
        }
        Ok(Self {
            q,
            rows,
            cols,
            success_prob,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, k: usize, l: usize) -> C64 {
        self.q[k * self.cols + l]
    }

    pub fn entries(&self) -> &[C64] {
        &self.q
    }

    pub fn total(&self) -> C64 {
        self.q.iter().sum()
    }
}

pub fn condition_on_postselection(kd: &KdDistribution) -> Result<ConditionedKd> {
    let (nk, nl) = kd.shape();
    let p_ps = kd.marginal_post()[0].re;
    if p_ps.is_nan() || p_ps <= POSTSELECTION_FLOOR {
        return Err(Error::VanishingPostselection { p_ps });
    }
    let mut q = Vec::with_capacity(nk * nl);
    for k in 0..nk {
        for l in 0..nl {
            q.push(kd.get(k, l, 0) / p_ps);
        }
    }
    Ok(ConditionedKd {
        q,
        rows: nk,
        cols: nl,
        success_prob: p_ps,
    })
}

/// `4 Re{ Σ a_k b_l Q_kl − (Σ a_k Q_kl)(Σ b_l Q_kl) }`.
pub fn qfim_entry_kd(conditioned: &ConditionedKd, eigenvalues_i: &[f64], eigenvalues_j: &[f64]) -> Result<f64> {
    let (nk, nl) = conditioned.shape();
    if eigenvalues_i.len() != nk {
        return Err(Error::dim("eigenvalues i", nk, eigenvalues_i.len()));
    }
    if eigenvalues_j.len() != nl {
        return Err(Error::dim("eigenvalues j", nl, eigenvalues_j.len()));
    }
    let mut joint = C64::new(0.0, 0.0);
    let mut mean_i = C64::new(0.0, 0.0);
    let mut mean_j = C64::new(0.0, 0.0);
    for (k, a) in eigenvalues_i.iter().enumerate() {
        for (l, b) in eigenvalues_j.iter().enumerate() {
            let q = conditioned.get(k, l);
            joint += q * (a * b);
            mean_i += q * *a;
            mean_j += q * *b;
        }
    }
    Ok(4.0 * (joint - mean_i * mean_j).re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    pub min_real_part: f64,
    pub max_abs_value: f64,
    /// `Σ max(0, −Re Q) + Σ |Im Q|`
    pub total_negativity: f64,
    pub is_classical: bool,
}

pub fn negativity_report(conditioned: &ConditionedKd) -> NegativityReport {
    let mut min_real_part = f64::INFINITY;
    let mut max_abs_value: f64 = 0.0;
    let mut total_negativity = 0.0;
    let mut is_classical = true;
    for q in conditioned.entries() {
        min_real_part = min_real_part.min(q.re);
        max_abs_value = max_abs_value.max(q.norm());
        total_negativity += (-q.re).max(0.0) + q.im.abs();
        if q.re < -CLASSICALITY_TOL || q.re > 1.0 + CLASSICALITY_TOL || q.im.abs() > CLASSICALITY_TOL {
            is_classical = false;
        }
    }
    NegativityReport {
        min_real_part,
        max_abs_value,
        total_negativity,
        is_classical,
    }
}

/// The anomaly-implies-nonclassicality implication: true unless an entry
/// exceeds `gap_i · gap_j` while the distribution is classical.
pub fn thm1_check(qfim_ps_entry: f64, gap_i: f64, gap_j: f64, report: &NegativityReport) -> bool {
    let anomalous = qfim_ps_entry.abs() > gap_i * gap_j + CLASSICALITY_TOL;
    !anomalous || !report.is_classical
}

/// Everything the quasiprobability view says about one QFIM entry of a
/// postselected circuit.
#[derive(Debug, Clone)]
pub struct KdAnalysis {
    pub i: usize,
    pub j: usize,
    pub conditioned: ConditionedKd,
    pub eigenvalues_i: Vec<f64>,
    pub eigenvalues_j: Vec<f64>,
    pub report: NegativityReport,
    pub entry: f64,
    pub gap_i: f64,
    pub gap_j: f64,
}

impl KdAnalysis {
    pub fn anomalous(&self) -> bool {
        self.entry.abs() > self.gap_i * self.gap_j + CLASSICALITY_TOL
    }

    pub fn consistent(&self) -> bool {
        thm1_check(self.entry, self.gap_i, self.gap_j, &self.report)
    }
}

/// Builds the conditioned distribution from the eigenprojectors of the
/// conjugated generators `Ã_i`, `Ã_j` and evaluates the QFIM entry from it.
pub fn kd_analysis(
    circuit: &EncodingCircuit,
    theta: &ParamVector,
    effect: &CMatrix,
    i: usize,
    j: usize,
) -> Result<KdAnalysis> {
    let tilde_i = circuit.tilde_generator(theta, i)?;
    let tilde_j = circuit.tilde_generator(theta, j)?;
    let set_i = eigenprojectors(&tilde_i, DEFAULT_DEGENERACY_TOL)?;
    let set_j = eigenprojectors(&tilde_j, DEFAULT_DEGENERACY_TOL)?;
    let rho = circuit.evolve(theta)?.density_matrix();
    let post = Povm::two_outcome(effect.clone())?;
    let kd = kd_distribution(&rho, &set_i, &set_j, &post)?;
    let conditioned = condition_on_postselection(&kd)?;
    let entry = qfim_entry_kd(&conditioned, &set_i.eigenvalues, &set_j.eigenvalues)?;
    let gap = |s: &EigenProjectorSet| s.eigenvalues[s.len() - 1] - s.eigenvalues[0];
    Ok(KdAnalysis {
        i,
        j,
        report: negativity_report(&conditioned),
        gap_i: gap(&set_i),
        gap_j: gap(&set_j),
        eigenvalues_i: set_i.eigenvalues,
        eigenvalues_j: set_j.eigenvalues,
        conditioned,
        entry,
    })
}
