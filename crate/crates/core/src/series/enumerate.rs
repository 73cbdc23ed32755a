//! Perimeter-method enumeration of finite clusters around an origin.
//!
//! Connected site sets containing the origin are grown one site at a time.
//! For each set, every connected spanning subset of its internal bonds is a
//! cluster with `b` open bonds and `t` = (bonds leaving the set) + (closed
//! internal bonds) closed bonds, contributing `p^b q^t` to `1 - θ`. Growth
//! stops once the smallest boundary among all sets of a size has exceeded
//! `t_max` for [`STOP_WINDOW`] consecutive sizes.

use std::collections::{BTreeMap, HashSet};

use num_rational::Ratio;

use super::{Polynomial, SeriesError};
use crate::lattice::{Coord, LatticeKind};

/// Consecutive sizes whose minimum boundary must exceed `t_max` before the
/// site-set growth stops. Compact shapes can dip below the boundary of
/// smaller sets (the honeycomb hexagon has boundary 6 at 6 sites against 7
/// at 5 sites), so a single size is not enough.
pub const STOP_WINDOW: usize = 3;

/// Largest `t_max` accepted.
pub const MAX_T: u32 = 16;

/// Site sets kept per size before giving up.
const MAX_SETS: usize = 4_000_000;

/// Finite clusters with `s` sites, `b` bonds and `t` perimeter bonds;
/// `count` is the number of such clusters per lattice site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterClass {
    pub s: u32,
    pub b: u32,
    pub t: u32,
    pub count: Ratio<i64>,
}

impl ClusterClass {
    /// Rooted clusters through a fixed site, averaged over site classes.
    pub fn rooted(&self) -> Ratio<i64> {
        self.count * Ratio::from_integer(self.s as i64)
    }
}

/// Lattices with a θ enumeration, and their inequivalent origins.
pub fn origins(kind: LatticeKind) -> Result<&'static [Coord], SeriesError> {
    match kind {
        LatticeKind::Square | LatticeKind::Triangular => Ok(&[(0, 0)]),
        LatticeKind::Hexagonal => Ok(&[(1, 0), (2, 0)]),
        LatticeKind::Kagome => Ok(&[(0, 0), (1, 0), (0, 1)]),
        _ => Err(SeriesError::UnsupportedKind(kind)),
    }
}

/// Neighbours of a site of `kind` in the infinite plane.
pub fn neighbours(kind: LatticeKind, (x, y): Coord) -> Vec<Coord> {
    const TRI: [Coord; 6] = [(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)];
    match kind {
        LatticeKind::Square => vec![(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)],
        _ => TRI
            .iter()
            .map(|&(dx, dy)| (x + dx, y + dy))
            .filter(|&(a, b)| kind.has_site(a, b))
            .collect(),
    }
}

/// Rooted `(s, b, t) -> count` from one origin.
fn rooted_counts(kind: LatticeKind, origin: Coord, t_max: u32) -> Result<BTreeMap<(u32, u32, u32), i64>, SeriesError> {
    let mut out = BTreeMap::new();
    let mut level: HashSet<Vec<Coord>> = HashSet::from([vec![origin]]);
    let mut misses = 0;
    while !level.is_empty() && misses < STOP_WINDOW {
        let mut min_boundary = u32::MAX;
        for set in &level {
            let boundary = count_set(kind, set, t_max, &mut out);
            min_boundary = min_boundary.min(boundary);
        }
        misses = if min_boundary > t_max { misses + 1 } else { 0 };
        if misses >= STOP_WINDOW {
            break;
        }
        let mut next = HashSet::new();
        for set in &level {
            for &v in set {
                for w in neighbours(kind, v) {
                    if set.binary_search(&w).is_err() {
                        let mut grown = set.clone();
                        let pos = grown.binary_search(&w).unwrap_err();
                        grown.insert(pos, w);
                        next.insert(grown);
                    }
                }
            }
            if next.len() > MAX_SETS {
                return Err(SeriesError::ResourceLimit);
            }
        }
        level = next;
    }
    Ok(out)
}

/// Adds the clusters spanning `set` to `out`; returns the set's boundary.
fn count_set(kind: LatticeKind, set: &[Coord], t_max: u32, out: &mut BTreeMap<(u32, u32, u32), i64>) -> u32 {
    let index = |c: &Coord| set.binary_search(c).ok();
    let mut internal = Vec::new();
    let mut degree_sum = 0u32;
    for (i, &v) in set.iter().enumerate() {
        for w in neighbours(kind, v) {
            degree_sum += 1;
            if let Some(j) = index(&w) {
                if i < j {
                    internal.push((i, j));
                }
            }
        }
    }
    let m = internal.len() as u32;
    let boundary = degree_sum - 2 * m;
    if boundary > t_max {
        return boundary;
    }
    let s = set.len();
    let spare = t_max - boundary;
    let min_open = (s as u32 - 1).max(m.saturating_sub(spare));
    if m >= 63 {
        // Unreachable for the supported t_max.
        return boundary;
    }
    for mask in 0u64..(1u64 << m) {
        let b = mask.count_ones();
        if b < min_open {
            continue;
        }
        if spanning_connected(s, &internal, mask) {
            *out.entry((s as u32, b, boundary + m - b)).or_insert(0) += 1;
        }
    }
    boundary
}

fn spanning_connected(s: usize, edges: &[(usize, usize)], mask: u64) -> bool {
    let mut parent: Vec<usize> = (0..s).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = s;
    for (k, &(a, b)) in edges.iter().enumerate() {
        if mask >> k & 1 == 1 {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                components -= 1;
            }
        }
    }
    components == 1
}

/// All finite clusters through the origin with `t <= t_max`, averaged over
/// origin classes and grouped by `(s, b, t)`.
pub fn enumerate_clusters(kind: LatticeKind, t_max: u32) -> Result<Vec<ClusterClass>, SeriesError> {
    if t_max > MAX_T {
        return Err(SeriesError::OrderTooLarge {
            requested: t_max as usize,
            max: MAX_T as usize,
        });
    }
    let origins = origins(kind)?;
    let mut total: BTreeMap<(u32, u32, u32), i64> = BTreeMap::new();
    for &o in origins {
        for (key, n) in rooted_counts(kind, o, t_max)? {
            *total.entry(key).or_insert(0) += n;
        }
    }
    let classes = origins.len() as i64;
    Ok(total
        .into_iter()
        .map(|((s, b, t), n)| ClusterClass {
            s,
            b,
            t,
            count: Ratio::new(n, classes * s as i64),
        })
        .collect())
}

/// `θ = 1 - Σ s·count·p^b q^t`, expanded to `q^order`.
pub fn theta_series(kind: LatticeKind, order: usize) -> Result<Polynomial, SeriesError> {
    let classes = enumerate_clusters(kind, order as u32)?;
    Ok(series_from_classes(&classes, order))
}

pub fn series_from_classes(classes: &[ClusterClass], order: usize) -> Polynomial {
    let mut poly = Polynomial::constant(1, order);
    for c in classes {
        let term = Polynomial::monomial_pq(c.b, c.t, order);
        let weight = Polynomial::new(vec![c.rooted()], order);
        poly = &poly - &(&term * &weight).truncate(order);
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_sites_only_at_coordination_order() {
        let hex = enumerate_clusters(LatticeKind::Hexagonal, 3).unwrap();
        assert_eq!(
            hex,
            vec![ClusterClass {
                s: 1,
                b: 0,
                t: 3,
                count: Ratio::from_integer(1)
            }]
        );
        let sq = enumerate_clusters(LatticeKind::Square, 4).unwrap();
        assert_eq!(sq.len(), 1);
        assert_eq!((sq[0].s, sq[0].b, sq[0].t), (1, 0, 4));
    }

    #[test]
    fn zeroth_order_is_one() {
        for kind in [LatticeKind::Square, LatticeKind::Kagome] {
            assert_eq!(theta_series(kind, 0).unwrap(), Polynomial::constant(1, 0));
        }
    }

    #[test]
    fn unsupported() {
        assert_eq!(
            theta_series(LatticeKind::Bowtie, 4),
            Err(SeriesError::UnsupportedKind(LatticeKind::Bowtie))
        );
        assert!(matches!(
            theta_series(LatticeKind::Square, 40),
            Err(SeriesError::OrderTooLarge { .. })
        ));
    }
}
