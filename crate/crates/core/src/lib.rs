//! Kirkwood-Dirac quasi-probabilities for a pair of orthonormal bases.
//!
//! A basis pair is encoded by its transition matrix `U_ij = ⟨a_i|b_j⟩`. The
//! crate builds the standard families of transition matrices, computes KD
//! distributions and their nonclassicality, decides strong and complete
//! incompatibility, and enumerates support-uncertainty diagrams annotated by
//! KD-classicality.

pub mod bases;
pub mod cli;
pub mod diagram;
pub mod error;
pub mod incompat;
pub mod io;
pub mod kd;
pub mod linalg;
pub mod simplex;
pub mod svg;

pub use bases::{dft, mub4, perturbed, spin_transition, BasisSpec, Generator, TransitionMatrix};
pub use diagram::{classify_point, uncertainty_diagram, Classification, Diagram, DiagramPoint, SearchConfig};
pub use error::{Error, Result};
pub use incompat::{incompat_report, is_coinc, is_stroinc, min_support_uncertainty, overlap_extrema};
pub use kd::{kd_distribution, nonclassicality, support, KdDistribution, StateVector};
pub use linalg::ComplexMatrix;
