use super::{ProtocolError, Result};
use crate::lattice::{build, Boundary, LatticeKind};
use crate::percolation::{estimate_crossing, CrossingConfig, PercolationError};
use crate::report::{to_csv_string, Provenance, Row};

/// Which line of the `(p, p′)` square a boundary search ran along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Search {
    /// `p` fixed, bisecting `p′`.
    FixP,
    /// `p′` fixed, bisecting `p`.
    FixP2,
    /// `p = p′`.
    Diagonal,
}

impl Search {
    pub fn name(self) -> &'static str {
        match self {
            Search::FixP => "fix_p",
            Search::FixP2 => "fix_p2",
            Search::Diagonal => "diagonal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub p: f64,
    pub p2: f64,
    pub half_width: f64,
    pub search: Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    BothSub,
    CepOnly,
    QepOnly,
    BothSuper,
    /// No boundary information covers the cell.
    Unknown,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::BothSub => "bothSub",
            Region::CepOnly => "cepOnly",
            Region::QepOnly => "qepOnly",
            Region::BothSuper => "bothSuper",
            Region::Unknown => "unknown",
        }
    }

    fn code(self) -> f64 {
        match self {
            Region::BothSub => 0.0,
            Region::CepOnly => 1.0,
            Region::QepOnly => 2.0,
            Region::BothSuper => 3.0,
            Region::Unknown => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    /// Grid points per axis, including both ends.
    pub resolution: usize,
    /// Smaller patch size of the spanning crossing.
    pub l: usize,
    pub nsamples: usize,
    /// Half-width of each boundary bisection.
    pub tolerance: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            resolution: 25,
            l: 64,
            nsamples: 1000,
            tolerance: 5e-3,
        }
    }
}

/// Supercritical regions of plain conversion and of the split on the
/// asymmetric triangular lattice with densities `p` (triangle bonds) and `p′`
/// (square bonds).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub config: PhaseConfig,
    pub seed: u64,
    /// Threshold of the triangular part after splitting; the square part's is 1/2.
    pub qep_threshold: f64,
    /// Measured boundary points, sorted by `p`.
    pub cep_boundary: Vec<BoundaryPoint>,
    /// Searches that did not bracket a crossing: `(search, fixed value)`.
    pub failed: Vec<(Search, f64)>,
    /// `(p, p′, region)` over the grid, `p′` fastest.
    pub cells: Vec<(f64, f64, Region)>,
    /// Monotone fit through `cep_boundary`: `(p, p′_c(p))`, sorted by `p`.
    fit: Vec<(f64, f64)>,
}

impl PhaseDiagram {
    /// Grid values along either axis.
    pub fn axis(&self) -> Vec<f64> {
        axis(self.config.resolution)
    }

    /// `p′` where the plain-conversion boundary crosses density `p`, from the
    /// monotone fit; `None` outside the measured range.
    pub fn cep_boundary_at(&self, p: f64) -> Option<f64> {
        let (first, last) = (self.fit.first()?, self.fit.last()?);
        if p < first.0 {
            return None;
        }
        if p > last.0 {
            return (last.1 == 0.0).then_some(0.0);
        }
        let i = self.fit.partition_point(|&(x, _)| x < p);
        if self.fit[i].0 == p || i == 0 {
            return Some(self.fit[i].1);
        }
        let ((x0, y0), (x1, y1)) = (self.fit[i - 1], self.fit[i]);
        Some(y0 + (y1 - y0) * (p - x0) / (x1 - x0))
    }

    /// Where `p` crosses the plain-conversion boundary at `p′ = 0`.
    pub fn cep_boundary_at_zero_p2(&self) -> Option<f64> {
        self.cep_boundary
            .iter()
            .find(|b| b.search == Search::FixP2 && b.p2 == 0.0)
            .map(|b| b.p)
    }

    pub fn cep_supercritical(&self, p: f64, p2: f64) -> Option<bool> {
        let last = self.fit.last()?;
        if p > last.0 && last.1 == 0.0 {
            return Some(p > last.0);
        }
        self.cep_boundary_at(p).map(|b| p2 > b)
    }

    /// At least one of the triangular and square parts is supercritical.
    pub fn qep_supercritical(&self, p: f64, p2: f64) -> bool {
        p > self.qep_threshold || p2 > 0.5
    }

    pub fn region(&self, p: f64, p2: f64) -> Region {
        match (self.cep_supercritical(p, p2), self.qep_supercritical(p, p2)) {
            (None, _) => Region::Unknown,
            (Some(false), false) => Region::BothSub,
            (Some(true), false) => Region::CepOnly,
            (Some(false), true) => Region::QepOnly,
            (Some(true), true) => Region::BothSuper,
        }
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let lattice = LatticeKind::AsymmetricTriangular.name();
        let cfg = &self.config;
        let mut rows = Vec::new();
        let mut row = |q: &str, p: f64, p2: f64, mean: f64, stderr: Option<f64>, prov, flag: &str| {
            let mut r = Row::new(q, lattice, p, mean, prov, self.seed);
            r.p2 = Some(p2);
            r.l = Some(cfg.l);
            r.nsamples = Some(cfg.nsamples);
            r.stderr = stderr;
            r.flag(flag);
            rows.push(r);
        };
        for b in &self.cep_boundary {
            let v = if b.search == Search::FixP2 { b.p } else { b.p2 };
            row("cep_boundary", b.p, b.p2, v, Some(b.half_width), Provenance::MonteCarlo, b.search.name());
        }
        for &(s, v) in &self.failed {
            let (p, p2) = match s {
                Search::FixP => (v, f64::NAN),
                Search::FixP2 => (f64::NAN, v),
                Search::Diagonal => (f64::NAN, f64::NAN),
            };
            row("cep_search_failed", p, p2, v, None, Provenance::MonteCarlo, s.name());
        }
        let pc = self.qep_threshold;
        row("qep_boundary", pc, 0.0, pc, None, Provenance::Derived, "vertical");
        row("qep_boundary", pc, 0.5, pc, None, Provenance::Derived, "vertical");
        row("qep_boundary", 0.0, 0.5, 0.5, None, Provenance::Derived, "horizontal");
        row("qep_boundary", pc, 0.5, 0.5, None, Provenance::Derived, "horizontal");
        for &(p, p2, r) in &self.cells {
            row("region", p, p2, r.code(), None, Provenance::Derived, r.name());
        }
        let mut comments = comments.to_vec();
        comments.insert(0, "table=asym_phase_diagram".to_string());
        to_csv_string(&comments, &rows)
    }
}

fn axis(resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|i| i as f64 / (resolution - 1) as f64)
        .collect()
}

/// Pool-adjacent-violators fit of a non-increasing sequence.
fn decreasing_fit(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    // Blocks of (sum, count, first index).
    let mut blocks: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &(_, y)) in points.iter().enumerate() {
        blocks.push((y, 1, i));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (a, b) = (blocks[n - 2], blocks[n - 1]);
            if a.0 / a.1 as f64 >= b.0 / b.1 as f64 {
                break;
            }
            blocks[n - 2] = (a.0 + b.0, a.1 + b.1, a.2);
            blocks.pop();
        }
    }
    let mut out = Vec::with_capacity(points.len());
    for (sum, count, start) in blocks {
        let y = sum / count as f64;
        out.extend(points[start..start + count].iter().map(|&(x, _)| (x, y)));
    }
    out
}

/// Builds the phase diagram. The plain-conversion boundary is measured by
/// spanning-probability crossings along every column `p = const`, along the
/// row `p′ = 0` and along the diagonal.
pub fn asym_phase_diagram(cfg: &PhaseConfig, seed: u64) -> Result<PhaseDiagram> {
    if cfg.resolution < 20 {
        return Err(ProtocolError::InvalidArgument(format!(
            "resolution {} is below 20",
            cfg.resolution
        )));
    }
    let crossing = CrossingConfig {
        l: cfg.l,
        nsamples: cfg.nsamples,
        tolerance: cfg.tolerance,
        ..CrossingConfig::default()
    };
    let kind = LatticeKind::AsymmetricTriangular;
    let search = |s: Search, v: f64| -> Result<Option<BoundaryPoint>> {
        let found = estimate_crossing(
            |x, l| {
                let probs = match s {
                    Search::FixP => [v, x],
                    Search::FixP2 => [x, v],
                    Search::Diagonal => [x, x],
                };
                Ok(build(kind, l, Boundary::Open, &probs)?)
            },
            &crossing,
            seed,
        );
        match found {
            Ok(e) => {
                let (p, p2) = match s {
                    Search::FixP => (v, e.value),
                    Search::FixP2 => (e.value, v),
                    Search::Diagonal => (e.value, e.value),
                };
                Ok(Some(BoundaryPoint {
                    p,
                    p2,
                    half_width: e.half_width,
                    search: s,
                }))
            }
            Err(PercolationError::NonBracketing { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };

    let grid = axis(cfg.resolution);
    let mut boundary = Vec::new();
    let mut failed = Vec::new();
    let mut runs: Vec<(Search, f64)> = grid.iter().map(|&p| (Search::FixP, p)).collect();
    runs.push((Search::FixP2, 0.0));
    runs.push((Search::Diagonal, 0.0));
    for (s, v) in runs {
        match search(s, v)? {
            Some(b) => boundary.push(b),
            None => failed.push((s, v)),
        }
    }
    // Searches along a column above the last crossing fail because the
    // whole column is supercritical; anchor the fit at p′ = 0 there.
    boundary.sort_by(|a, b| a.p.total_cmp(&b.p).then(b.p2.total_cmp(&a.p2)));
    let pts: Vec<(f64, f64)> = boundary.iter().map(|b| (b.p, b.p2)).collect();
    let fit = decreasing_fit(&pts);

    let mut d = PhaseDiagram {
        config: cfg.clone(),
        seed,
        qep_threshold: LatticeKind::Triangular.critical_density().expect("known"),
        cep_boundary: boundary,
        failed,
        cells: Vec::new(),
        fit,
    };
    for &p in &grid {
        for &p2 in &grid {
            d.cells.push((p, p2, d.region(p, p2)));
        }
    }
    Ok(d)
}
