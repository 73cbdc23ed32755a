//! Entanglement percolation on two-dimensional quantum networks.
//!
//! Classical entanglement percolation (convert every bond, then percolate) is
//! compared with lattice transformations built from entanglement swapping.
//! The crate provides the majorization calculus for bond conversion, the
//! lattices and their transformations, Monte Carlo and exact percolation
//! estimators, high-density series, and the end-to-end protocol comparisons.

pub mod entanglement;
pub mod lattice;
pub mod percolation;
pub mod protocols;
pub mod report;
pub mod series;
