//! Classical entanglement percolation against the lattice transformations,
//! end to end.

mod crossover;
mod curves;
mod phase;

use thiserror::Error;

use crate::lattice::LatticeError;
use crate::percolation::{PercolationError, NEAR_CRITICAL_WINDOW};
use crate::report::{to_csv_string, Row};
use crate::series::SeriesError;

pub use crossover::{find_crossover, find_sign_change, CrossoverConfig, CrossoverResult, CurvePoint};
pub use curves::{
    bowtie_crossover, bowtie_margin, bowtie_split, cep2_threshold, dhex_crossover, dhex_qep_minus_cep2,
    dhex_three_way, doubling_point, kagome_vs_square, square_doubling, DoublingPoint, BOWTIE_BRACKET, DHEX_BRACKET,
};
pub use phase::{asym_phase_diagram, BoundaryPoint, PhaseConfig, PhaseDiagram, Region, Search};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Percolation(#[from] PercolationError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("invalid density grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("the difference does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("difference {diff} at p = {p} is within {sigmas} standard errors ({stderr}) of zero")]
    InsufficientSeparation { p: f64, diff: f64, stderr: f64, sigmas: f64 },
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// Separation, in standard errors, required before an advantage is claimed.
pub const ADVANTAGE_SIGMAS: f64 = 3.0;

/// Rows of one comparison, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub name: String,
    pub grid: Vec<f64>,
    pub l: usize,
    pub nsamples: usize,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub crossover: Option<CrossoverResult>,
}

impl CurveTable {
    fn new(name: &str, grid: &[f64], l: usize, nsamples: usize, seed: u64) -> Self {
        CurveTable {
            name: name.to_string(),
            grid: grid.to_vec(),
            l,
            nsamples,
            seed,
            rows: Vec::new(),
            crossover: None,
        }
    }

    /// Rows of `quantity`, in grid order.
    pub fn column<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }

    pub fn get(&self, quantity: &str, p: f64) -> Option<&Row> {
        self.rows.iter().find(|r| r.quantity == quantity && r.p == p)
    }

    /// CSV text; crossover results become `crossover` rows.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut comments = comments.to_vec();
        comments.insert(0, format!("table={}", self.name));
        let mut rows = self.rows.clone();
        if let Some(c) = &self.crossover {
            rows.push(c.row(&self.name, self.seed));
        }
        to_csv_string(&comments, &rows)
    }
}

/// Checks that a grid is non-empty, strictly increasing and inside `[0, 1]`.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(ProtocolError::InvalidGrid("empty".into()));
    }
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(ProtocolError::InvalidGrid("densities must lie in [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ProtocolError::InvalidGrid("densities must increase strictly".into()));
    }
    Ok(())
}

/// Points per comparison grid.
pub const GRID_POINTS: usize = 25;

/// `n` points on `[lo, hi]`, twice as dense within 0.05 of any `focus` point.
/// Both ends are included.
pub fn default_grid(lo: f64, hi: f64, focus: &[f64], n: usize) -> Vec<f64> {
    assert!(lo < hi && n >= 2);
    let weight = |p: f64| if focus.iter().any(|f| (p - f).abs() <= 0.05) { 2.0 } else { 1.0 };
    const FINE: usize = 10_000;
    let h = (hi - lo) / FINE as f64;
    let mut cum = vec![0.0; FINE + 1];
    for i in 0..FINE {
        cum[i + 1] = cum[i] + weight(lo + (i as f64 + 0.5) * h) * h;
    }
    let total = cum[FINE];
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let target = total * k as f64 / (n - 1) as f64;
        while j < FINE && cum[j + 1] < target {
            j += 1;
        }
        let p = if k == n - 1 {
            hi
        } else {
            let seg = cum[(j + 1).min(FINE)] - cum[j];
            let frac = if seg > 0.0 { (target - cum[j]) / seg } else { 0.0 };
            lo + (j as f64 + frac.clamp(0.0, 1.0)) * h
        };
        out.push((p * 1e6).round() / 1e6);
    }
    out.dedup();
    out
}

/// Independent seed for the `tag`-th sub-run of `seed` (SplitMix64 finalizer).
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Adds `near_pc` when `p` is within the near-critical window of any of `pcs`.
fn mark_near(row: &mut Row, pcs: &[f64]) {
    if pcs.iter().any(|pc| (row.p - pc).abs() <= NEAR_CRITICAL_WINDOW) {
        row.flag("near_pc");
    }
}

/// Marks a difference row `advantage` or `indistinguishable`.
fn mark_claim(row: &mut Row) {
    let se = row.stderr.unwrap_or(0.0);
    if row.mean > ADVANTAGE_SIGMAS * se && row.mean > 0.0 {
        row.flag("advantage");
    } else if row.mean < -ADVANTAGE_SIGMAS * se && row.mean < 0.0 {
        row.flag("disadvantage");
    } else {
        row.flag("indistinguishable");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = default_grid(0.5, 1.0, &[], GRID_POINTS);
        assert_eq!(g.len(), 25);
        assert_eq!((g[0], g[24]), (0.5, 1.0));
        assert!(validate_grid(&g).is_ok());
        assert!((g[1] - g[0] - 0.5 / 24.0).abs() < 1e-5);

        let g = default_grid(0.0, 1.0, &[0.5], 25);
        assert!(validate_grid(&g).is_ok());
        let near = g.iter().filter(|p| (*p - 0.5).abs() <= 0.05).count();
        let far = g.iter().filter(|p| (*p - 0.2).abs() <= 0.05).count();
        assert!(near >= 2 * far - 1 && near > far, "{g:?}");

        assert!(validate_grid(&[]).is_err());
        assert!(validate_grid(&[0.5, 0.5]).is_err());
        assert!(validate_grid(&[0.5, 1.2]).is_err());
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
        assert_eq!(sub_seed(5, 3), sub_seed(5, 3));
    }
}
