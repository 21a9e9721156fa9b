//! Minimization of the nonclassicality over the unit sphere of a subspace.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bases::TransitionMatrix;
use crate::error::{Error, Result};
use crate::kd::{self, StateVector};
use crate::linalg::SubspaceBasis;
use crate::simplex::{self, SimplexOptions};

/// Knobs for the classicality search and the support bookkeeping around it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    /// Simplex stops once the spread of objective values is below this.
    pub conv_tol: f64,
    /// Amplitude modulus below which a coordinate counts as zero.
    pub eta: f64,
    /// A searched state is classical when `N_NC − 1 ≤ tau_class`.
    pub tau_class: f64,
    /// Support threshold applied to searched states: an optimum whose
    /// smallest in-support amplitude drops to this level is treated as having
    /// left the cell.
    pub witness_eta: f64,
    /// Relative singular-value cutoff for subspace computations.
    pub null_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 50,
            max_iter: 2000,
            conv_tol: 1e-10,
            eta: kd::DEFAULT_ETA,
            tau_class: 1e-6,
            witness_eta: 1e-4,
            null_tol: 1e-10,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.conv_tol, self.eta, self.tau_class, self.witness_eta, self.null_tol];
        if positive.iter().any(|v| !(*v > 0.0)) || self.restarts == 0 {
            return Err(Error::Parse("search tolerances must be positive and restarts at least 1".into()));
        }
        Ok(())
    }
}

/// A subspace together with `U`, prepared for fast objective evaluation.
pub(crate) struct SubspaceObjective {
    d: usize,
    k: usize,
    /// A-coordinates of the basis columns, row-major d×k
    a_cols: Vec<C64>,
    /// B-coordinates of the basis columns, row-major d×k
    b_cols: Vec<C64>,
    abs_u: Vec<f64>,
}

impl SubspaceObjective {
    pub(crate) fn new(u: &TransitionMatrix, basis: &SubspaceBasis) -> Self {
        let d = u.dim();
        let k = basis.dim();
        let b_of: Vec<Vec<C64>> = basis.columns().iter().map(|c| u.to_b_coordinates(c)).collect();
        let mut a_cols = Vec::with_capacity(d * k);
        let mut b_cols = Vec::with_capacity(d * k);
        for i in 0..d {
            a_cols.extend(basis.columns().iter().map(|c| c[i]));
            b_cols.extend(b_of.iter().map(|c| c[i]));
        }
        let abs_u = u.matrix().as_slice().iter().map(|z| z.norm()).collect();
        Self { d, k, a_cols, b_cols, abs_u }
    }

    pub(crate) fn dim(&self) -> usize {
        self.k
    }

    fn coords(&self, cols: &[C64], coeffs: &[C64]) -> Vec<C64> {
        (0..self.d).map(|i| cols[i * self.k..(i + 1) * self.k].iter().zip(coeffs).map(|(x, c)| x * c).sum()).collect()
    }

    /// `N_NC` of the normalized state with these coefficients.
    pub(crate) fn ncc(&self, coeffs: &[C64]) -> f64 {
        let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sqr > 0.0) {
            return f64::INFINITY;
        }
        let a = self.coords(&self.a_cols, coeffs);
        let b = self.coords(&self.b_cols, coeffs);
        let b_abs: Vec<f64> = b.iter().map(|z| z.norm()).collect();
        let mut total = 0.0;
        for (i, ai) in a.iter().enumerate() {
            let row = &self.abs_u[i * self.d..(i + 1) * self.d];
            total += ai.norm() * row.iter().zip(&b_abs).map(|(x, y)| x * y).sum::<f64>();
        }
        total / norm_sqr
    }

    pub(crate) fn ncc_real(&self, x: &[f64]) -> f64 {
        self.ncc(&to_complex(x))
    }

    /// Normalized A-coordinates and B-coordinates.
    pub(crate) fn state(&self, coeffs: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let scaled: Vec<C64> = coeffs.iter().map(|c| c / norm).collect();
        (self.coords(&self.a_cols, &scaled), self.coords(&self.b_cols, &scaled))
    }
}

pub(crate) fn to_complex(x: &[f64]) -> Vec<C64> {
    let k = x.len() / 2;
    (0..k).map(|m| C64::new(x[m], x[k + m])).collect()
}

pub(crate) fn gaussian_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// One simplex run from `x0`, returning the optimal coefficients and value.
pub(crate) fn descend(obj: &SubspaceObjective, x0: &[f64], cfg: &SearchConfig, target: Option<f64>) -> (Vec<C64>, f64) {
    let opts = SimplexOptions { max_iter: cfg.max_iter, f_tol: cfg.conv_tol, initial_step: 0.5, target };
    let res = simplex::minimize(|x| obj.ncc_real(x), x0, &opts);
    (to_complex(&res.x), res.fx)
}

/// Smallest `N_NC` over unit vectors of the span found by `cfg.restarts`
/// simplex descents from Gaussian starting points.
pub fn minimize_ncc_over_subspace(
    u: &TransitionMatrix,
    basis: &SubspaceBasis,
    cfg: &SearchConfig,
) -> Result<(f64, StateVector)> {
    if basis.is_empty() {
        return Err(Error::EmptySubspace);
    }
    if basis.ambient_dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: basis.ambient_dim() });
    }
    let obj = SubspaceObjective::new(u, basis);
    if obj.dim() == 1 {
        let state = StateVector::normalized(basis.columns()[0].clone())?;
        return Ok((kd::ncc_of_amps(u, state.amps()), state));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(f64, Vec<C64>)> = None;
    for _ in 0..cfg.restarts {
        let x0 = gaussian_point(&mut rng, 2 * obj.dim());
        let (coeffs, f) = descend(&obj, &x0, cfg, None);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, coeffs));
        }
    }
    let (f, coeffs) = best.expect("at least one restart");
    let (a, _) = obj.state(&coeffs);
    Ok((f, StateVector::normalized(a)?))
}
