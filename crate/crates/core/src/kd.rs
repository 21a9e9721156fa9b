//! Kirkwood-Dirac distributions of pure states.
//!
//! For a state `ψ` and a transition matrix `U`,
//! `Q_ij = ⟨a_i|ψ⟩⟨ψ|b_j⟩⟨b_j|a_i⟩`. Rows sum to the A-marginal, columns to
//! the B-marginal, and the total is 1. The state is KD-classical when every
//! `Q_ij` is real and nonnegative; the ℓ1 mass `Σ|Q_ij|` exceeds 1 otherwise.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bases::TransitionMatrix;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub const DEFAULT_ETA: f64 = 1e-9;
pub const DEFAULT_TAU: f64 = 1e-9;
const NORM_TOL: f64 = 1e-10;

/// A pure state in A-coordinates, `amps[i] = ⟨a_i|ψ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let norm = l2(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    /// Rescales to unit norm; the zero vector is rejected.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = l2(&amps);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amps })
    }

    /// State given in B-coordinates, converted to A-coordinates via `U`.
    pub fn from_b_coordinates(u: &TransitionMatrix, b_amps: &[C64]) -> Result<Self> {
        if b_amps.len() != u.dim() {
            return Err(Error::DimensionMismatch { expected: u.dim(), found: b_amps.len() });
        }
        Self::new(u.from_b_coordinates(b_amps))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[i] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn with_phase(&self, theta: f64) -> Self {
        let p = C64::from_polar(1.0, theta);
        Self { amps: self.amps.iter().map(|a| a * p).collect() }
    }
}

pub(crate) fn l2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Debug)]
pub struct KdDistribution {
    q: ComplexMatrix,
}

impl KdDistribution {
    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.q
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.q[(i, j)]
    }

    pub fn total(&self) -> C64 {
        self.q.as_slice().iter().sum()
    }

    pub fn row_sums(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.q.row(i).iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<C64> {
        (0..self.dim()).map(|j| (0..self.dim()).map(|i| self.q[(i, j)]).sum()).collect()
    }
}

fn check_state(u: &TransitionMatrix, psi: &StateVector) -> Result<()> {
    if psi.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: psi.dim() });
    }
    let norm = l2(psi.amps());
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

pub fn kd_distribution(u: &TransitionMatrix, psi: &StateVector) -> Result<KdDistribution> {
    check_state(u, psi)?;
    let d = u.dim();
    let a = psi.amps();
    let b = u.to_b_coordinates(a);
    let q = ComplexMatrix::from_fn(d, d, |i, j| a[i] * b[j].conj() * u.entry(i, j).conj());
    Ok(KdDistribution { q })
}

/// `Σ_ij |Q_ij|` straight from amplitudes, without allocating the distribution.
pub(crate) fn ncc_of_amps(u: &TransitionMatrix, a: &[C64]) -> f64 {
    let b = u.to_b_coordinates(a);
    let m = u.matrix();
    let mut total = 0.0;
    for (i, ai) in a.iter().enumerate() {
        let ai = ai.norm();
        if ai == 0.0 {
            continue;
        }
        let row = m.row(i);
        let mut s = 0.0;
        for (bj, uij) in b.iter().zip(row) {
            s += bj.norm() * uij.norm();
        }
        total += ai * s;
    }
    total
}

/// The ℓ1 mass `Σ|Q_ij|`; 1 exactly for KD-classical states.
pub fn nonclassicality(q: &KdDistribution) -> f64 {
    q.q.as_slice().iter().map(|z| z.norm()).sum()
}

/// Outcome of [`is_kd_classical`]; `worst` names the entry furthest from
/// the nonnegative real axis when the state is not classical.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalityVerdict {
    pub classical: bool,
    pub worst: Option<(usize, usize, C64)>,
}

pub fn is_kd_classical(q: &KdDistribution, tau: f64) -> ClassicalityVerdict {
    let d = q.dim();
    let mut worst: Option<(usize, usize, C64, f64)> = None;
    for i in 0..d {
        for j in 0..d {
            let z = q.entry(i, j);
            let offence = z.im.abs().max(-z.re);
            if offence > tau && worst.is_none_or(|w| offence > w.3) {
                worst = Some((i, j, z, offence));
            }
        }
    }
    ClassicalityVerdict { classical: worst.is_none(), worst: worst.map(|(i, j, z, _)| (i, j, z)) }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportProfile {
    /// A-support `S`
    pub s: Vec<usize>,
    /// B-support `T`
    pub t: Vec<usize>,
    pub n_a: usize,
    pub n_b: usize,
    pub eta: f64,
}

impl SupportProfile {
    pub fn from_sets(s: Vec<usize>, t: Vec<usize>, eta: f64) -> Self {
        Self { n_a: s.len(), n_b: t.len(), s, t, eta }
    }

    /// `n_A + n_B`
    pub fn total(&self) -> usize {
        self.n_a + self.n_b
    }
}

pub(crate) fn support_of(v: &[C64], eta: f64) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, z)| z.norm() > eta).map(|(i, _)| i).collect()
}

pub fn support(u: &TransitionMatrix, psi: &StateVector, eta: f64) -> Result<SupportProfile> {
    check_state(u, psi)?;
    let s = support_of(psi.amps(), eta);
    let t = support_of(&u.to_b_coordinates(psi.amps()), eta);
    Ok(SupportProfile::from_sets(s, t, eta))
}

/// `M = max_ij |U_ij|`
pub fn max_overlap(u: &TransitionMatrix) -> f64 {
    u.matrix().max_abs()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n_a: usize,
    pub n_b: usize,
    /// `1/M²`, the lower bound on `n_A·n_B`
    pub product_lower_bound: f64,
    pub ncc: f64,
    /// `M·√(n_A·n_B)`
    pub ncc_upper_bound: f64,
    /// `d + 1`
    pub edge_value: usize,
}

const BOUND_SLACK: f64 = 1e-9;

/// Evaluates the product bound `n_A·n_B ≥ 1/M²` and the chain
/// `1 ≤ N_NC ≤ M·√(n_A·n_B)`; either failing is a bug, never physics.
pub fn bound_report(u: &TransitionMatrix, psi: &StateVector) -> Result<BoundReport> {
    let prof = support(u, psi, DEFAULT_ETA)?;
    let ncc = nonclassicality(&kd_distribution(u, psi)?);
    let m = max_overlap(u);
    let product = (prof.n_a * prof.n_b) as f64;
    let report = BoundReport {
        n_a: prof.n_a,
        n_b: prof.n_b,
        product_lower_bound: 1.0 / (m * m),
        ncc,
        ncc_upper_bound: m * product.sqrt(),
        edge_value: u.dim() + 1,
    };
    if product < report.product_lower_bound - BOUND_SLACK {
        return Err(Error::InternalInconsistency(format!(
            "support product {product} below 1/M^2 = {}",
            report.product_lower_bound
        )));
    }
    if ncc < 1.0 - BOUND_SLACK || ncc > report.ncc_upper_bound + BOUND_SLACK {
        return Err(Error::InternalInconsistency(format!(
            "nonclassicality {ncc} outside [1, {}]",
            report.ncc_upper_bound
        )));
    }
    Ok(report)
}

/// Uniform random state on the unit sphere of `C^d`, deterministic in `seed`.
pub fn random_state(d: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_with(d, &mut rng)
}

pub fn random_state_with<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..d).map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
        if let Ok(s) = StateVector::normalized(amps) {
            return s;
        }
    }
}

/// Random state with a random support size in one of the two bases: A-sparse
/// when `in_b` is false, B-sparse otherwise. Covers every `(n_A, n_B)` shape
/// reachable by sparsifying a single basis.
pub fn random_sparse_state_with<R: rand::Rng + ?Sized>(u: &TransitionMatrix, in_b: bool, rng: &mut R) -> StateVector {
    let d = u.dim();
    let k = rng.gen_range(1..=d);
    let support = rand::seq::index::sample(rng, d, k);
    let mut coords = vec![C64::new(0.0, 0.0); d];
    loop {
        for i in support.iter() {
            coords[i] = C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        }
        if l2(&coords) > 1e-3 {
            break;
        }
    }
    let amps = if in_b { u.from_b_coordinates(&coords) } else { coords };
    StateVector::normalized(amps).expect("nonzero by construction")
}
