//! Bond percolation: sampling, cluster labeling and estimators.
//!
//! Sample `i` of a run with seed `s` draws its bonds from the ChaCha8 stream
//! `(s, i)`: one `u32` per edge in edge-list order, the edge being open when
//! the draw is below `p * 2^32`. Samples are therefore reproducible one at a
//! time, independent of worker count, and coupled across `p`.

mod cluster;
mod estimators;
mod exact;
mod threshold;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{Graph, LatticeError, LatticeKind};

pub use cluster::ClusterLabeling;
pub(crate) use cluster::Workspace;
pub use estimators::{
    omega, omega_estimate, omega_fixed, pi, pi_estimate, pi_fixed, spanning, spanning_probability, theta, theta_estimate,
    TranslatedTuples,
};
pub use exact::{exact_connectivity, Query, MAX_EXACT_EDGES};
pub use threshold::{
    bowtie_pc_exact, bowtie_polynomial, estimate_crossing, estimate_pc, finite_size_sweep,
    CrossingConfig, PcEstimate, SweepResult,
};

/// Estimates within this distance of a known threshold are flagged.
pub const NEAR_CRITICAL_WINDOW: f64 = 0.0005;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PercolationError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("node {0:?} is not a vertex of the graph")]
    NodeOutsideGraph((i32, i32)),
    #[error("need at least one sample")]
    NoSamples,
    #[error("the conditioning node was never in the largest cluster; raise nsamples")]
    NoConditioningEvents,
    #[error("{0} edges is too many for exhaustive enumeration (max {MAX_EXACT_EDGES})")]
    TooManyEdges(usize),
    #[error("bisection does not bracket a crossing on [{lo}, {hi}]")]
    NonBracketing { lo: f64, hi: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, PercolationError>;

/// One bond configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondConfig {
    pub open: Vec<bool>,
    pub seed: u64,
    pub index: u64,
}

impl BondConfig {
    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }
}

pub(crate) fn thresholds(g: &Graph) -> Vec<u64> {
    g.class_probs()
        .iter()
        .map(|&p| (p * 4_294_967_296.0) as u64)
        .collect()
}

pub(crate) fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws sample `index` of the run with `seed`.
pub fn sample(g: &Graph, seed: u64, index: u64) -> BondConfig {
    use rand::RngCore;
    let th = thresholds(g);
    let mut rng = stream(seed, index);
    let open = g
        .edges()
        .iter()
        .map(|e| (rng.next_u32() as u64) < th[e.class as usize])
        .collect();
    BondConfig { open, seed, index }
}

/// Labels the clusters of `config` on `g`.
pub fn label(g: &Graph, config: &BondConfig) -> ClusterLabeling {
    let mut ws = Workspace::new(g.vertex_count());
    ws.label_config(g, &config.open);
    ws.labeling()
}

/// Read access to the clusters of one sample.
pub struct Sample<'a> {
    ws: &'a mut Workspace,
    pub index: u64,
}

impl Sample<'_> {
    pub fn in_largest(&self, v: u32) -> bool {
        self.ws.in_largest(v)
    }

    pub fn largest_size(&self) -> usize {
        self.ws.largest_size()
    }

    pub fn largest_fraction(&self) -> f64 {
        self.ws.largest_size() as f64 / self.ws.vertex_count() as f64
    }

    pub fn connected(&self, a: u32, b: u32) -> bool {
        self.ws.root(a) == self.ws.root(b)
    }

    /// Whether one cluster touches both vertex sets.
    pub fn connects(&mut self, left: &[u32], right: &[u32]) -> bool {
        self.ws.connects(left, right)
    }

    pub fn labeling(&self) -> ClusterLabeling {
        self.ws.labeling()
    }
}

/// Runs `nsamples` samples of `g` on the current rayon pool and returns
/// `f(sample)` in sample order.
pub fn sample_records<R, F>(g: &Graph, nsamples: usize, seed: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(&mut Sample<'_>) -> R + Sync,
{
    let th = thresholds(g);
    (0..nsamples as u64)
        .into_par_iter()
        .map_init(
            || Workspace::new(g.vertex_count()),
            |ws, i| {
                let mut rng = stream(seed, i);
                ws.sample_and_label(g, &th, &mut rng);
                f(&mut Sample { ws, index: i })
            },
        )
        .collect()
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`),
/// accumulated in order.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

/// Ratio of means `Σx / Σy` with its delta-method standard error.
pub fn ratio_stderr(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    let sy: f64 = ys.iter().sum();
    if n == 0 || sy <= 0.0 {
        return None;
    }
    let r = xs.iter().sum::<f64>() / sy;
    if n == 1 {
        return Some((r, 0.0));
    }
    let ybar = sy / n as f64;
    let resid: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - r * y).collect();
    let (_, se) = mean_stderr(&resid);
    Some((r, se / ybar))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Theta,
    Pi,
    Omega,
    Spanning,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Theta => "theta",
            Quantity::Pi => "pi",
            Quantity::Omega => "omega",
            Quantity::Spanning => "spanning",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Monte Carlo estimate of a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub quantity: Quantity,
    pub mean: f64,
    pub stderr: f64,
    pub nsamples: usize,
    pub l: usize,
    pub seed: u64,
    /// Set when the density is within [`NEAR_CRITICAL_WINDOW`] of a known
    /// threshold, where finite-size bias is large.
    pub near_critical: bool,
}

impl Estimate {
    pub(crate) fn from_samples(quantity: Quantity, xs: &[f64], g: &Graph, seed: u64) -> Self {
        let (mean, stderr) = mean_stderr(xs);
        Estimate {
            quantity,
            mean,
            stderr,
            nsamples: xs.len(),
            l: g.l(),
            seed,
            near_critical: graph_near_critical(g),
        }
    }
}

/// Whether `p` is within [`NEAR_CRITICAL_WINDOW`] of `kind`'s threshold.
pub fn near_critical(kind: LatticeKind, p: f64) -> bool {
    kind.critical_density()
        .is_some_and(|pc| (p - pc).abs() <= NEAR_CRITICAL_WINDOW)
}

fn graph_near_critical(g: &Graph) -> bool {
    g.edges()
        .first()
        .is_some_and(|e| near_critical(g.kind(), g.edge_prob(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build, Boundary};

    #[test]
    fn extreme_probabilities() {
        let g = build(LatticeKind::Triangular, 6, Boundary::Periodic, &[1.0]).unwrap();
        assert!(sample(&g, 3, 0).open.iter().all(|&o| o));
        let g = g.with_probs(&[0.0]).unwrap();
        assert!(sample(&g, 3, 0).open.iter().all(|&o| !o));
    }

    #[test]
    fn open_fraction_is_binomial() {
        let g = build(LatticeKind::Square, 708, Boundary::Periodic, &[0.5]).unwrap();
        let c = sample(&g, 11, 0);
        let n = c.open.len() as f64;
        assert!(n >= 1e6);
        let frac = c.open_count() as f64 / n;
        let sigma = (0.25 / n).sqrt();
        assert!((frac - 0.5).abs() < 5.0 * sigma, "{frac}");
    }

    #[test]
    fn samples_are_reproducible_and_distinct() {
        let g = build(LatticeKind::Kagome, 8, Boundary::Periodic, &[0.5]).unwrap();
        assert_eq!(sample(&g, 1, 4), sample(&g, 1, 4));
        assert_ne!(sample(&g, 1, 4).open, sample(&g, 1, 5).open);
        assert_ne!(sample(&g, 1, 4).open, sample(&g, 2, 4).open);
    }

    #[test]
    fn records_match_standalone_labeling() {
        let g = build(LatticeKind::Bowtie, 8, Boundary::Periodic, &[0.45]).unwrap();
        let sizes = sample_records(&g, 5, 9, |s| s.labeling());
        for (i, lab) in sizes.iter().enumerate() {
            assert_eq!(*lab, label(&g, &sample(&g, 9, i as u64)));
        }
    }

    #[test]
    fn stats_helpers() {
        assert_eq!(mean_stderr(&[1.0]), (1.0, 0.0));
        assert_eq!(mean_stderr(&[1.0, 1.0, 1.0]), (1.0, 0.0));
        let (m, s) = mean_stderr(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((s - 0.5).abs() < 1e-15);
        assert_eq!(ratio_stderr(&[1.0, 1.0], &[0.0, 0.0]), None);
        assert_eq!(ratio_stderr(&[1.0, 1.0], &[2.0, 2.0]), Some((0.5, 0.0)));
    }

    #[test]
    fn near_critical_window() {
        assert!(near_critical(LatticeKind::Square, 0.5004));
        assert!(!near_critical(LatticeKind::Square, 0.501));
        assert!(!near_critical(LatticeKind::AsymmetricTriangular, 0.5));
    }
}
