use std::collections::HashMap;

use super::{ProtocolError, Result};
use crate::report::{Provenance, Row};

/// A curve value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverConfig {
    /// Requested half-width of the final interval.
    pub half_width: f64,
    /// Samples per evaluation at the start.
    pub nsamples: usize,
    /// Cap reached by doubling when a midpoint is not resolved.
    pub max_nsamples: usize,
    /// Separation required to decide the sign of the difference.
    pub sigmas: f64,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        CrossoverConfig {
            half_width: 5e-3,
            nsamples: 200,
            max_nsamples: 1600,
            sigmas: 2.0,
        }
    }
}

/// Where the sign of a difference flips.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverResult {
    pub p_star: f64,
    pub half_width: f64,
    pub method: &'static str,
    /// Every evaluation: `(p, difference, stderr, nsamples)`.
    pub evaluations: Vec<(f64, f64, f64, usize)>,
}

impl CrossoverResult {
    pub(crate) fn row(&self, lattice: &str, seed: u64) -> Row {
        let mut r = Row::new("crossover", lattice, self.p_star, self.p_star, Provenance::Derived, seed);
        r.stderr = Some(self.half_width);
        r.flag(self.method);
        r
    }
}

/// Locates the crossing of two curves. Each curve is evaluated as
/// `curve(p, nsamples)`; their standard errors are combined as independent.
pub fn find_crossover<A, B>(mut a: A, mut b: B, bracket: (f64, f64), cfg: &CrossoverConfig) -> Result<CrossoverResult>
where
    A: FnMut(f64, usize) -> Result<CurvePoint>,
    B: FnMut(f64, usize) -> Result<CurvePoint>,
{
    find_sign_change(
        |p, n| {
            let (x, y) = (a(p, n)?, b(p, n)?);
            Ok(CurvePoint {
                mean: x.mean - y.mean,
                stderr: x.stderr.hypot(y.stderr),
            })
        },
        bracket,
        cfg,
    )
}

/// Bisection on the sign of a difference curve.
///
/// Both bracket ends must be resolved at `cfg.sigmas` with opposite signs.
/// A point that is not resolved is re-evaluated with doubled sample counts
/// up to `cfg.max_nsamples`. An unresolved midpoint is replaced by the two
/// quarter points; when neither resolves, refinement stops and the current
/// interval is returned, so its half-width may exceed the requested one.
pub fn find_sign_change<D>(mut diff: D, bracket: (f64, f64), cfg: &CrossoverConfig) -> Result<CrossoverResult>
where
    D: FnMut(f64, usize) -> Result<CurvePoint>,
{
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(cfg.half_width > 0.0) || cfg.nsamples == 0 || cfg.max_nsamples < cfg.nsamples {
        return Err(ProtocolError::InvalidArgument(format!("{bracket:?} {cfg:?}")));
    }
    let mut evaluations = Vec::new();
    let mut seen: HashMap<u64, (Option<f64>, CurvePoint)> = HashMap::new();
    // Sign of the difference at p, or None when unresolved at the cap.
    let mut resolve = |p: f64, evaluations: &mut Vec<(f64, f64, f64, usize)>| -> Result<(Option<f64>, CurvePoint)> {
        if let Some(&hit) = seen.get(&p.to_bits()) {
            return Ok(hit);
        }
        let mut n = cfg.nsamples;
        let out = loop {
            let d = diff(p, n)?;
            evaluations.push((p, d.mean, d.stderr, n));
            if d.mean.abs() > cfg.sigmas * d.stderr && d.mean != 0.0 {
                break (Some(d.mean.signum()), d);
            }
            if n >= cfg.max_nsamples {
                break (None, d);
            }
            n = (2 * n).min(cfg.max_nsamples);
        };
        seen.insert(p.to_bits(), out);
        Ok(out)
    };

    let (s_lo, d_lo) = resolve(lo, &mut evaluations)?;
    let (s_hi, d_hi) = resolve(hi, &mut evaluations)?;
    for (s, d, p) in [(s_lo, d_lo, lo), (s_hi, d_hi, hi)] {
        if s.is_none() && d.stderr > 0.0 {
            return Err(ProtocolError::InsufficientSeparation {
                p,
                diff: d.mean,
                stderr: d.stderr,
                sigmas: cfg.sigmas,
            });
        }
    }
    let (s_lo, s_hi) = match (s_lo, s_hi) {
        (Some(a), Some(b)) if a != b => (a, b),
        _ => return Err(ProtocolError::NoSignChange { lo, hi }),
    };
    debug_assert_ne!(s_lo, s_hi);

    while 0.5 * (hi - lo) > cfg.half_width {
        let mid = 0.5 * (lo + hi);
        match resolve(mid, &mut evaluations)?.0 {
            Some(s) if s == s_lo => lo = mid,
            Some(_) => hi = mid,
            None => {
                // The crossing is close to `mid`; try to move the ends in.
                let (mut narrowed, q1, q3) = (false, 0.5 * (lo + mid), 0.5 * (mid + hi));
                match resolve(q1, &mut evaluations)?.0 {
                    Some(s) if s == s_lo => (lo, narrowed) = (q1, true),
                    Some(_) => (hi, narrowed) = (q1, true),
                    None => {}
                }
                if q3 < hi {
                    match resolve(q3, &mut evaluations)?.0 {
                        Some(s) if s == s_hi => (hi, narrowed) = (q3, true),
                        Some(_) => (lo, narrowed) = (q3, true),
                        None => {}
                    }
                }
                if !narrowed {
                    break;
                }
            }
        }
    }
    Ok(CrossoverResult {
        p_star: 0.5 * (lo + hi),
        half_width: 0.5 * (hi - lo),
        method: "mc_bisection",
        evaluations,
    })
}
