//! Incompatibility of a basis pair.
//!
//! Strong incompatibility asks that no overlap `|U_ij|` be 0 or 1. Complete
//! incompatibility asks that `Π_A(S)H ∩ Π_B(T)H = {0}` whenever
//! `|S| + |T| ≤ d`, which holds exactly when no proper minor of `U` vanishes.
//! The minimal support uncertainty `n_min` is then `d + 1`; the report
//! computes both sides independently and refuses to disagree.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::TransitionMatrix;
use crate::diagram::{generic_support, support_subspace};
use crate::error::{Error, Result};
use crate::kd::DEFAULT_ETA;
use crate::linalg::lu_determinant;

pub const DEFAULT_MINOR_TOL: f64 = 1e-10;
/// Largest dimension for the minor scan (`Σ_k C(d,k)²` determinants).
pub const COINC_MAX_DIM: usize = 12;
/// Largest dimension for the subset-pair scan behind `n_min`.
pub const NMIN_MAX_DIM: usize = 8;

/// `m = min |U_ij|`, `M = max |U_ij|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapExtrema {
    pub m_ab: f64,
    #[serde(rename = "M_ab")]
    pub big_m_ab: f64,
}

impl OverlapExtrema {
    /// `1/M²`, the lower bound on `n_A·n_B`.
    pub fn inverse_max_sq(&self) -> f64 {
        1.0 / (self.big_m_ab * self.big_m_ab)
    }
}

pub fn overlap_extrema(u: &TransitionMatrix) -> OverlapExtrema {
    let moduli = u.matrix().as_slice().iter().map(|z| z.norm());
    let (m_ab, big_m_ab) = moduli.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
    OverlapExtrema { m_ab, big_m_ab }
}

pub fn is_stroinc(u: &TransitionMatrix, eta: f64) -> bool {
    let e = overlap_extrema(u);
    e.m_ab > eta && e.big_m_ab < 1.0 - eta
}

fn check_coinc_dim(u: &TransitionMatrix) -> Result<()> {
    if u.dim() > COINC_MAX_DIM {
        return Err(Error::DimensionTooLarge { d: u.dim(), cap: COINC_MAX_DIM });
    }
    Ok(())
}

/// Vanishing minor identified by its row and column sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VanishingMinor {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

fn minor_abs(u: &TransitionMatrix, rows: &[usize], cols: &[usize], buf: &mut Vec<num_complex::Complex64>) -> f64 {
    let k = rows.len();
    buf.clear();
    for &i in rows {
        buf.extend(cols.iter().map(|&j| u.entry(i, j)));
    }
    lu_determinant(buf, k).norm()
}

/// First minor with `|det| ≤ tol` in scan order: size `k = 1…d−1`, then row
/// set, then column set, both lexicographic. The full determinant is skipped
/// since it has modulus 1.
pub fn first_vanishing_minor(u: &TransitionMatrix, tol: f64) -> Result<Option<VanishingMinor>> {
    check_coinc_dim(u)?;
    let d = u.dim();
    for k in 1..d {
        let row_sets: Vec<Vec<usize>> = (0..d).combinations(k).collect();
        let hit = row_sets.par_iter().find_map_first(|rows| {
            let mut buf = Vec::with_capacity(k * k);
            (0..d)
                .combinations(k)
                .find(|cols| minor_abs(u, rows, cols, &mut buf) <= tol)
                .map(|cols| VanishingMinor { rows: rows.clone(), cols })
        });
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}

/// Number of proper minors with `|det| ≤ tol`.
pub fn vanishing_minor_count(u: &TransitionMatrix, tol: f64) -> Result<usize> {
    check_coinc_dim(u)?;
    let d = u.dim();
    let mut total = 0;
    for k in 1..d {
        let row_sets: Vec<Vec<usize>> = (0..d).combinations(k).collect();
        total += row_sets
            .par_iter()
            .map(|rows| {
                let mut buf = Vec::with_capacity(k * k);
                (0..d).combinations(k).filter(|cols| minor_abs(u, rows, cols, &mut buf) <= tol).count()
            })
            .sum::<usize>();
    }
    Ok(total)
}

pub fn is_coinc(u: &TransitionMatrix, tol: f64) -> Result<bool> {
    Ok(first_vanishing_minor(u, tol)?.is_none())
}

/// Index sets with `|S| + |T| = d` whose subspace is nontrivial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoincWitness {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
}

/// Turns the first vanishing minor `(R, C)` into `S = complement(R)`, `T = C`:
/// a kernel vector `β` of `U[R, C]` gives `ψ = Σ_{j∈C} β_j |b_j⟩`, which
/// vanishes on every `a_i` with `i ∈ R`.
pub fn coinc_witness(u: &TransitionMatrix, tol: f64) -> Result<Option<CoincWitness>> {
    let Some(minor) = first_vanishing_minor(u, tol)? else {
        return Ok(None);
    };
    let s: Vec<usize> = (0..u.dim()).filter(|i| !minor.rows.contains(i)).collect();
    let t = minor.cols;
    let dim = support_subspace(u, &s, &t).dim();
    if dim == 0 {
        return Err(Error::InternalInconsistency(format!(
            "vanishing minor rows {:?} cols {t:?} gave a trivial intersection",
            minor.rows
        )));
    }
    Ok(Some(CoincWitness { s, t }))
}

/// `min n_A(ψ) + n_B(ψ)` over nonzero states, from the generic supports of
/// all cells with `|S| + |T| ≤ d + 1`.
pub fn min_support_uncertainty(u: &TransitionMatrix) -> Result<usize> {
    let d = u.dim();
    if d > NMIN_MAX_DIM {
        return Err(Error::DimensionTooLarge { d, cap: NMIN_MAX_DIM });
    }
    let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for n_a in 1..=d {
        for n_b in 1..=(d + 1 - n_a).min(d) {
            for s in (0..d).combinations(n_a) {
                for t in (0..d).combinations(n_b) {
                    pairs.push((s.clone(), t));
                }
            }
        }
    }
    let best = pairs
        .par_iter()
        .filter_map(|(s, t)| {
            let basis = support_subspace(u, s, t);
            if basis.is_empty() {
                return None;
            }
            generic_support(&basis, u, DEFAULT_ETA).ok().map(|g| g.total())
        })
        .min();
    best.ok_or_else(|| Error::InternalInconsistency("no cell with |S|+|T| <= d+1 is nontrivial".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncompatReport {
    #[serde(flatten)]
    pub extrema: OverlapExtrema,
    pub stroinc: bool,
    pub coinc: bool,
    pub coinc_witness: Option<CoincWitness>,
    /// Absent above the enumeration cap.
    pub n_min: Option<usize>,
    /// `2/M`
    pub n_min_lower_bound: f64,
    /// `d + 1`
    pub edge: usize,
    /// `⌊3d/2⌋`
    pub legacy_bound: usize,
}

pub fn incompat_report(u: &TransitionMatrix, eta: f64, minor_tol: f64) -> Result<IncompatReport> {
    let d = u.dim();
    let extrema = overlap_extrema(u);
    let stroinc = is_stroinc(u, eta);
    let coinc_witness = coinc_witness(u, minor_tol)?;
    let coinc = coinc_witness.is_none();
    let n_min = if d <= NMIN_MAX_DIM { Some(min_support_uncertainty(u)?) } else { None };
    let report = IncompatReport {
        extrema,
        stroinc,
        coinc,
        coinc_witness,
        n_min,
        n_min_lower_bound: 2.0 / extrema.big_m_ab,
        edge: d + 1,
        legacy_bound: 3 * d / 2,
    };
    if let Some(n) = n_min {
        if coinc != (n == d + 1) {
            return Err(Error::InternalInconsistency(format!(
                "minor scan says coinc={coinc} but n_min={n} with d+1={}",
                d + 1
            )));
        }
        if (n as f64) < report.n_min_lower_bound.ceil() - 1e-9 {
            return Err(Error::InternalInconsistency(format!("n_min={n} below 2/M={}", report.n_min_lower_bound)));
        }
    }
    if coinc && !stroinc {
        return Err(Error::InternalInconsistency("complete incompatibility without strong incompatibility".into()));
    }
    Ok(report)
}
