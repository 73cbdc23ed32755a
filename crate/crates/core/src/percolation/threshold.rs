use super::{spanning, theta_estimate, Estimate, PercolationError, Result};
use crate::lattice::{build, Boundary, Graph, LatticeKind};

/// `1 - p - 6p^2 + 6p^3 - p^5`, whose root in (0, 1) is the bowtie threshold.
pub fn bowtie_polynomial(p: f64) -> f64 {
    1.0 - p - 6.0 * p * p + 6.0 * p.powi(3) - p.powi(5)
}

/// Bowtie bond threshold by bisection to 1e-12.
pub fn bowtie_pc_exact() -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if bowtie_polynomial(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Parameters of a spanning-probability crossing search.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingConfig {
    /// Smaller of the two patch sizes; the other is `2L`.
    pub l: usize,
    pub nsamples: usize,
    /// Requested half-width of the final interval.
    pub tolerance: f64,
    /// Half-width of the bracket placed around the `R_L = 1/2` point.
    pub window: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for CrossingConfig {
    fn default() -> Self {
        CrossingConfig {
            l: 64,
            nsamples: 2000,
            tolerance: 2e-3,
            window: 0.05,
            lo: 0.0,
            hi: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcEstimate {
    pub value: f64,
    pub half_width: f64,
    pub l: usize,
    pub nsamples: usize,
}

/// Locates the density where the spanning probabilities of the open patches
/// of size `L` and `2L` cross. `family(x, L)` builds the patch at density `x`.
///
/// Fails with `NonBracketing` when `R_L` does not cross 1/2 on `[lo, hi]`.
/// The search first bisects `R_L(x) = 1/2`, then bisects the sign of
/// `R_2L - R_L` inside `±window` of that point. All evaluations reuse the
/// same sample streams, so each `R` is monotone in `x`.
pub fn estimate_crossing<F>(family: F, cfg: &CrossingConfig, seed: u64) -> Result<PcEstimate>
where
    F: Fn(f64, usize) -> Result<Graph>,
{
    if !(cfg.tolerance > 0.0) || cfg.nsamples == 0 || cfg.lo >= cfg.hi {
        return Err(PercolationError::InvalidArgument(format!("{cfg:?}")));
    }
    let r = |x: f64, l: usize| -> Result<f64> {
        let g = family(x, l)?;
        if g.boundary() != Boundary::Open {
            return Err(PercolationError::InvalidArgument("crossing needs open patches".into()));
        }
        Ok(spanning(&g, cfg.nsamples, seed)?.mean)
    };

    let (mut a, mut b) = (cfg.lo, cfg.hi);
    if !(r(a, cfg.l)? < 0.5 && r(b, cfg.l)? >= 0.5) {
        return Err(PercolationError::NonBracketing { lo: a, hi: b });
    }
    while b - a > cfg.tolerance {
        let mid = 0.5 * (a + b);
        if r(mid, cfg.l)? < 0.5 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let half = 0.5 * (a + b);

    let diff = |x: f64| -> Result<f64> { Ok(r(x, 2 * cfg.l)? - r(x, cfg.l)?) };
    let (mut a, mut b) = ((half - cfg.window).max(cfg.lo), (half + cfg.window).min(cfg.hi));
    if !(diff(a)? < 0.0 && diff(b)? >= 0.0) {
        return Err(PercolationError::NonBracketing { lo: a, hi: b });
    }
    while 0.5 * (b - a) > cfg.tolerance {
        let mid = 0.5 * (a + b);
        if diff(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(PcEstimate {
        value: 0.5 * (a + b),
        half_width: 0.5 * (b - a),
        l: cfg.l,
        nsamples: cfg.nsamples,
    })
}

/// Bond threshold of `kind` from the `L`/`2L` spanning crossing.
pub fn estimate_pc(kind: LatticeKind, cfg: &CrossingConfig, seed: u64) -> Result<PcEstimate> {
    if kind.class_count() != 1 {
        return Err(PercolationError::InvalidArgument(format!(
            "{kind} has more than one bond class; use estimate_crossing"
        )));
    }
    estimate_crossing(|p, l| Ok(build(kind, l, Boundary::Open, &[p])?), cfg, seed)
}

/// θ at several sizes, with the size where `θ(L)` changes curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<(usize, Estimate)>,
    pub inflection_l: Option<usize>,
}

pub fn finite_size_sweep(
    kind: LatticeKind,
    p: f64,
    ls: &[usize],
    nsamples: usize,
    seed: u64,
) -> Result<SweepResult> {
    if ls.len() < 3 {
        return Err(PercolationError::InvalidArgument("need at least three sizes".into()));
    }
    if ls.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PercolationError::InvalidArgument("sizes must increase".into()));
    }
    let points = ls
        .iter()
        .map(|&l| theta_estimate(kind, p, l, nsamples, seed).map(|e| (l, e)))
        .collect::<Result<Vec<_>>>()?;
    let theta: Vec<f64> = points.iter().map(|(_, e)| e.mean).collect();
    let second: Vec<f64> = theta.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let inflection_l = second
        .windows(2)
        .position(|w| w[0] * w[1] < 0.0)
        .map(|i| ls[i + 2]);
    Ok(SweepResult {
        points,
        inflection_l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowtie_root() {
        assert_eq!(bowtie_polynomial(0.0), 1.0);
        assert_eq!(bowtie_polynomial(1.0), -1.0);
        let pc = bowtie_pc_exact();
        assert!(bowtie_polynomial(pc).abs() < 1e-11);
        assert!((pc - 0.4045).abs() < 1e-4);
        assert!((pc - crate::lattice::BOWTIE_PC).abs() < 1e-9);
    }

    #[test]
    fn sweep_at_full_density() {
        let s = finite_size_sweep(LatticeKind::Square, 1.0, &[4, 8, 16, 32], 2, 1).unwrap();
        assert!(s.points.iter().all(|(_, e)| e.mean == 1.0));
        assert_eq!(s.inflection_l, None);
        assert!(finite_size_sweep(LatticeKind::Square, 1.0, &[4, 8], 2, 1).is_err());
        assert!(finite_size_sweep(LatticeKind::Square, 1.0, &[8, 4, 16], 2, 1).is_err());
    }

    #[test]
    fn crossing_rejects_bad_config() {
        let cfg = CrossingConfig {
            nsamples: 0,
            ..CrossingConfig::default()
        };
        assert!(estimate_pc(LatticeKind::Square, &cfg, 0).is_err());
        assert!(estimate_pc(LatticeKind::AsymmetricTriangular, &CrossingConfig::default(), 0).is_err());
    }

    #[test]
    fn non_bracketing_window() {
        let cfg = CrossingConfig {
            l: 8,
            nsamples: 50,
            window: 0.0,
            tolerance: 0.05,
            ..CrossingConfig::default()
        };
        assert!(matches!(
            estimate_pc(LatticeKind::Square, &cfg, 0),
            Err(PercolationError::NonBracketing { .. })
        ));
    }
}
