//! Uncertainty diagrams.
//!
//! A pair of index sets `(S, T)` is a *cell*. Its subspace holds the states
//! with A-support inside `S` and B-support inside `T`. A cell whose generic
//! support is exactly `(S, T)` realizes the point `(|S|, |T|)`, and every state
//! with support exactly `(S, T)` lives in that cell. Each realized point is
//! classified by searching its cells for KD-classical and KD-nonclassical
//! states.

mod search;
mod states;

use std::cmp::Ordering;

use itertools::Itertools;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::TransitionMatrix;
use crate::error::{Error, Result};
use crate::incompat::{is_stroinc, overlap_extrema};
use crate::kd::{self, support_of, StateVector, SupportProfile};
use crate::linalg::{orthonormal_null_space, ComplexMatrix, SubspaceBasis};

pub use search::{minimize_ncc_over_subspace, SearchConfig};
pub use states::{dft6_two_support, dft_min_states, mub4_edge_states};

use search::{descend, gaussian_point, SubspaceObjective};

/// Largest dimension for which diagrams are enumerated.
pub const DIAGRAM_MAX_DIM: usize = 8;
pub const DEFAULT_NULL_TOL: f64 = 1e-10;

/// `Π_A(S)H ∩ Π_B(T)H` as an orthonormal basis in A-coordinates.
pub fn support_subspace(u: &TransitionMatrix, s: &[usize], t: &[usize]) -> SubspaceBasis {
    support_subspace_with_tol(u, s, t, DEFAULT_NULL_TOL)
}

pub fn support_subspace_with_tol(u: &TransitionMatrix, s: &[usize], t: &[usize], tol: f64) -> SubspaceBasis {
    let d = u.dim();
    assert!(s.iter().chain(t).all(|&i| i < d), "index sets must lie in 0..{d}");
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for i in (0..d).filter(|i| !s.contains(i)) {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[i] = C64::new(1.0, 0.0);
        rows.push(e);
    }
    for j in (0..d).filter(|j| !t.contains(j)) {
        // ⟨b_j|ψ⟩ = Σ_i conj(U_ij) ψ_i
        rows.push((0..d).map(|i| u.entry(i, j).conj()).collect());
    }
    let constraints = if rows.is_empty() {
        ComplexMatrix::zeros(0, d)
    } else {
        ComplexMatrix::from_rows(rows).expect("constraint rows share length d")
    };
    orthonormal_null_space(&constraints, tol)
}

/// Support pattern of a generic vector of the span: coordinates that do not
/// vanish on every basis column.
pub fn generic_support(basis: &SubspaceBasis, u: &TransitionMatrix, eta: f64) -> Result<SupportProfile> {
    if basis.is_empty() {
        return Err(Error::EmptySubspace);
    }
    let d = u.dim();
    let b_cols: Vec<Vec<C64>> = basis.columns().iter().map(|c| u.to_b_coordinates(c)).collect();
    let row_norm = |cols: &[Vec<C64>], i: usize| cols.iter().map(|c| c[i].norm_sqr()).sum::<f64>().sqrt();
    let s = (0..d).filter(|&i| row_norm(basis.columns(), i) > eta).collect();
    let t = (0..d).filter(|&j| row_norm(&b_cols, j) > eta).collect();
    Ok(SupportProfile::from_sets(s, t, eta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Empty,
    Classical,
    Nonclassical,
    Mixed,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Empty => "EMPTY",
            Classification::Classical => "CLASSICAL",
            Classification::Nonclassical => "NONCLASSICAL",
            Classification::Mixed => "MIXED",
        }
    }

    /// At least one KD-classical state was found at the point.
    pub fn has_classical(self) -> bool {
        matches!(self, Classification::Classical | Classification::Mixed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Classical,
    Nonclassical,
}

/// A state found at a diagram point, with the cell it came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub ncc: f64,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    #[serde(serialize_with = "serialize_state")]
    pub state: StateVector,
}

fn serialize_state<S: serde::Serializer>(state: &StateVector, ser: S) -> std::result::Result<S::Ok, S::Error> {
    crate::io::StateOut::new(state.amps()).serialize(ser)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramPoint {
    pub n_a: usize,
    pub n_b: usize,
    pub classification: Classification,
    /// Smallest `N_NC` among evaluated states with exactly this support.
    pub min_ncc_found: Option<f64>,
    /// Number of cells realizing the point.
    pub cells: usize,
    pub witnesses: Vec<Witness>,
}

impl DiagramPoint {
    fn empty(n_a: usize, n_b: usize) -> Self {
        Self { n_a, n_b, classification: Classification::Empty, min_ncc_found: None, cells: 0, witnesses: Vec::new() }
    }

    pub fn total(&self) -> usize {
        self.n_a + self.n_b
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagram {
    pub d: usize,
    /// Realized points sorted by `(n_a, n_b)`.
    pub points: Vec<DiagramPoint>,
    /// `1/M²`
    pub hyperbola_constant: f64,
    /// `d + 1`
    pub edge: usize,
    pub n_min: usize,
    pub stroinc: bool,
}

impl Diagram {
    pub fn point(&self, n_a: usize, n_b: usize) -> Option<&DiagramPoint> {
        self.points.iter().find(|p| p.n_a == n_a && p.n_b == n_b)
    }

    pub fn classification(&self, n_a: usize, n_b: usize) -> Classification {
        self.point(n_a, n_b).map_or(Classification::Empty, |p| p.classification)
    }

    pub fn realized(&self) -> Vec<(usize, usize)> {
        self.points.iter().map(|p| (p.n_a, p.n_b)).collect()
    }

    /// Full `d × d` lattice with `EMPTY` entries for unrealized points.
    pub fn grid(&self) -> Vec<DiagramPoint> {
        (1..=self.d)
            .cartesian_product(1..=self.d)
            .map(|(a, b)| self.point(a, b).cloned().unwrap_or_else(|| DiagramPoint::empty(a, b)))
            .collect()
    }
}

/// A cell whose generic support is exactly `(s, t)`.
struct Cell {
    s: Vec<usize>,
    t: Vec<usize>,
    basis: SubspaceBasis,
}

struct CellOutcome {
    min_ncc: Option<f64>,
    classical: Option<Witness>,
    nonclassical: Option<Witness>,
}

fn mask(set: &[usize]) -> u64 {
    set.iter().fold(0u64, |m, &i| m | (1 << i))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_seed(seed: u64, s: &[usize], t: &[usize]) -> u64 {
    splitmix(splitmix(seed) ^ splitmix(mask(s) << 32 | mask(t)))
}

fn check_dim(u: &TransitionMatrix) -> Result<()> {
    if u.dim() > DIAGRAM_MAX_DIM {
        return Err(Error::DimensionTooLarge { d: u.dim(), cap: DIAGRAM_MAX_DIM });
    }
    Ok(())
}

/// Cells with the given support sizes (all sizes when `None`), in canonical
/// order: by `n_a`, then `S` lexicographically, then `n_b`, then `T`.
fn closed_cells(u: &TransitionMatrix, sizes: Option<(usize, usize)>, cfg: &SearchConfig) -> Vec<Cell> {
    let d = u.dim();
    let m = overlap_extrema(u).big_m_ab;
    let hyperbola = 1.0 / (m * m);
    let mut candidates: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for n_a in 1..=d {
        if sizes.is_some_and(|(a, _)| a != n_a) {
            continue;
        }
        for s in (0..d).combinations(n_a) {
            for n_b in 1..=d {
                if sizes.is_some_and(|(_, b)| b != n_b) {
                    continue;
                }
                // product bound: such a cell cannot host any state
                if ((n_a * n_b) as f64) < hyperbola - 1e-9 {
                    continue;
                }
                for t in (0..d).combinations(n_b) {
                    candidates.push((s.clone(), t));
                }
            }
        }
    }
    candidates
        .into_par_iter()
        .filter_map(|(s, t)| {
            let basis = support_subspace_with_tol(u, &s, &t, cfg.null_tol);
            if basis.is_empty() {
                return None;
            }
            let g = generic_support(&basis, u, cfg.eta).ok()?;
            (g.s == s && g.t == t).then_some(Cell { s, t, basis })
        })
        .collect()
}

fn has_support(a: &[C64], b: &[C64], cell: &Cell, eta: f64) -> bool {
    support_of(a, eta) == cell.s && support_of(b, eta) == cell.t
}

fn evaluate_cell(u: &TransitionMatrix, cell: &Cell, cfg: &SearchConfig) -> CellOutcome {
    let threshold = 1.0 + cfg.tau_class;
    let mut out = CellOutcome { min_ncc: None, classical: None, nonclassical: None };
    let record = |a: Vec<C64>, ncc: f64, out: &mut CellOutcome| {
        out.min_ncc = Some(out.min_ncc.map_or(ncc, |m: f64| m.min(ncc)));
        let slot = if ncc <= threshold { &mut out.classical } else { &mut out.nonclassical };
        let kind = if ncc <= threshold { WitnessKind::Classical } else { WitnessKind::Nonclassical };
        let better = slot.as_ref().is_none_or(|w| match kind {
            WitnessKind::Classical => ncc < w.ncc,
            WitnessKind::Nonclassical => false,
        });
        if better {
            if let Ok(state) = StateVector::normalized(a) {
                *slot = Some(Witness { kind, ncc, s: cell.s.clone(), t: cell.t.clone(), state });
            }
        }
    };

    if cell.basis.dim() == 1 {
        let a = cell.basis.columns()[0].clone();
        let ncc = kd::ncc_of_amps(u, &a);
        record(a, ncc, &mut out);
        return out;
    }

    let obj = SubspaceObjective::new(u, &cell.basis);
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cfg.seed, &cell.s, &cell.t));
    let k = obj.dim();

    // a generic element of the span has exactly the cell's support
    for _ in 0..8 {
        let x = gaussian_point(&mut rng, 2 * k);
        let coeffs = search::to_complex(&x);
        let (a, b) = obj.state(&coeffs);
        if has_support(&a, &b, cell, cfg.witness_eta) {
            let ncc = obj.ncc(&coeffs);
            record(a, ncc, &mut out);
            break;
        }
    }

    // search for a classical state that keeps the full support
    let target = Some(1.0 + 0.01 * cfg.tau_class);
    for _ in 0..cfg.restarts {
        if out.classical.is_some() {
            break;
        }
        let x0 = gaussian_point(&mut rng, 2 * k);
        let (coeffs, f) = descend(&obj, &x0, cfg, target);
        let (a, b) = obj.state(&coeffs);
        if has_support(&a, &b, cell, cfg.witness_eta) {
            record(a, f, &mut out);
        }
    }
    out
}

fn aggregate(n_a: usize, n_b: usize, cells: &[Cell], outcomes: Vec<CellOutcome>) -> DiagramPoint {
    let mut point = DiagramPoint::empty(n_a, n_b);
    let mut classical: Option<Witness> = None;
    let mut nonclassical: Option<Witness> = None;
    for (_, o) in cells.iter().zip(outcomes) {
        point.cells += 1;
        if let Some(m) = o.min_ncc {
            point.min_ncc_found = Some(point.min_ncc_found.map_or(m, |x: f64| x.min(m)));
        }
        if classical.is_none() {
            classical = o.classical;
        }
        if nonclassical.is_none() {
            nonclassical = o.nonclassical;
        }
    }
    point.classification = match (&classical, &nonclassical) {
        (Some(_), Some(_)) => Classification::Mixed,
        (Some(_), None) => Classification::Classical,
        (None, _) if point.cells > 0 => Classification::Nonclassical,
        (None, _) => Classification::Empty,
    };
    point.witnesses = classical.into_iter().chain(nonclassical).collect();
    point
}

fn classify_cells(u: &TransitionMatrix, cells: Vec<Cell>, cfg: &SearchConfig) -> Vec<DiagramPoint> {
    let outcomes: Vec<CellOutcome> = cells.par_iter().map(|c| evaluate_cell(u, c, cfg)).collect();
    let mut grouped: Vec<((usize, usize), Vec<Cell>, Vec<CellOutcome>)> = Vec::new();
    let mut paired: Vec<(Cell, CellOutcome)> = cells.into_iter().zip(outcomes).collect();
    // stable sort keeps canonical order inside each point
    paired.sort_by_key(|(a, _)| (a.s.len(), a.t.len()));
    for (cell, outcome) in paired {
        let key = (cell.s.len(), cell.t.len());
        match grouped.last_mut() {
            Some((k, cs, os)) if *k == key => {
                cs.push(cell);
                os.push(outcome);
            }
            _ => grouped.push((key, vec![cell], vec![outcome])),
        }
    }
    grouped.into_iter().map(|((a, b), cs, os)| aggregate(a, b, &cs, os)).collect()
}

/// Classifies a single point `(n_a, n_b)`.
pub fn classify_point(u: &TransitionMatrix, n_a: usize, n_b: usize, cfg: &SearchConfig) -> Result<DiagramPoint> {
    check_dim(u)?;
    cfg.validate()?;
    let d = u.dim();
    if !(1..=d).contains(&n_a) || !(1..=d).contains(&n_b) {
        return Err(Error::IndexOutOfRange(format!("point ({n_a}, {n_b}) outside 1..={d}")));
    }
    let cells = closed_cells(u, Some((n_a, n_b)), cfg);
    Ok(classify_cells(u, cells, cfg).pop().unwrap_or_else(|| DiagramPoint::empty(n_a, n_b)))
}

/// Enumerates and classifies every realized point of the diagram of `u`.
pub fn uncertainty_diagram(u: &TransitionMatrix, cfg: &SearchConfig) -> Result<Diagram> {
    check_dim(u)?;
    cfg.validate()?;
    let d = u.dim();
    let m = overlap_extrema(u).big_m_ab;
    let cells = closed_cells(u, None, cfg);
    let points = classify_cells(u, cells, cfg);
    let n_min = points.iter().map(DiagramPoint::total).min().unwrap_or(d + 1);
    let diagram = Diagram {
        d,
        points,
        hyperbola_constant: 1.0 / (m * m),
        edge: d + 1,
        n_min,
        stroinc: is_stroinc(u, kd::DEFAULT_ETA),
    };
    check_diagram(&diagram)?;
    Ok(diagram)
}

fn check_diagram(diagram: &Diagram) -> Result<()> {
    for p in &diagram.points {
        if ((p.n_a * p.n_b) as f64) < diagram.hyperbola_constant - 1e-9 {
            return Err(Error::InternalInconsistency(format!(
                "point ({}, {}) lies below n_a·n_b = {}",
                p.n_a, p.n_b, diagram.hyperbola_constant
            )));
        }
        if diagram.stroinc && p.total().cmp(&diagram.edge) == Ordering::Greater && p.classification.has_classical() {
            return Err(Error::InternalInconsistency(format!(
                "classical state found above the edge at ({}, {})",
                p.n_a, p.n_b
            )));
        }
    }
    Ok(())
}
