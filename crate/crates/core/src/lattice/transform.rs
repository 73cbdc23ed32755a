//! Entanglement-swapping lattice transformations.
//!
//! A swap at node `s` consumes the bonds `s–(s+a)` and `s–(s+b)` and creates
//! the bond `(s+a)–(s+b)` with the swap SCP of the two consumed bonds. Each
//! rule is a fixed table of swaps per site class plus the set of sites that
//! disappear afterwards:
//!
//! * `KagomeToSquare`: every (even, even) site swaps `(left, down)` and
//!   `(up, right)` and is removed. The `x + y` odd sites form a square lattice
//!   with bonds `±(1,1)`, `±(1,-1)`.
//! * `DHexToTriangular`: every site with `(x + y) % 3 == 2` swaps each pair of
//!   its three neighbours, using a distinct copy of the double bond in each
//!   pair, and is removed. The remaining sites form a triangular lattice with
//!   bonds `(2,1)`, `(1,2)`, `(1,-1)`.
//! * `SquareDoubling`: every `x + y` odd site swaps its horizontal and its
//!   vertical pair and is removed. (even, even) and (odd, odd) sites form two
//!   square lattices with bonds `(2,0)`, `(0,2)`.
//! * `BowtieSplit`: degree-4 sites swap straight pairs and are removed;
//!   (odd, odd) sites swap their two diagonals. (even, even) sites form a
//!   triangular lattice, (odd, odd) sites a square lattice.
//! * `AsymTriangularSplit`: every site that is not (odd, odd) swaps its two
//!   class-0 bonds; (even, even) sites also apply the kagome swaps to their
//!   class-1 bonds and are removed. (odd, odd) sites form a triangular lattice
//!   with density p, `x + y` odd sites a square lattice with density p′.
//!
//! On open boundaries a swap with a missing bond is skipped; a leftover bond
//! that would join two output lattices is dropped.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{Coord, Edge, Graph, LatticeError, LatticeKind, Origin, VertexId, NO_VERTEX};
use crate::entanglement::swap_probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformRule {
    KagomeToSquare,
    DHexToTriangular,
    SquareDoubling,
    BowtieSplit,
    AsymTriangularSplit,
}

struct Swap {
    a: Coord,
    b: Coord,
    copy_a: usize,
    copy_b: usize,
}

const fn swap(a: Coord, b: Coord) -> Swap {
    Swap {
        a,
        b,
        copy_a: 0,
        copy_b: 0,
    }
}

const KAGOME_SWAPS: [Swap; 2] = [swap((-1, 0), (0, -1)), swap((0, 1), (1, 0))];
const STRAIGHT_SWAPS: [Swap; 2] = [swap((-1, 0), (1, 0)), swap((0, -1), (0, 1))];
const DIAGONAL_SWAP: Swap = swap((-1, -1), (1, 1));
const DHEX_SWAPS: [Swap; 3] = [
    Swap {
        a: (-1, 0),
        b: (0, -1),
        copy_a: 0,
        copy_b: 0,
    },
    Swap {
        a: (-1, 0),
        b: (1, 1),
        copy_a: 1,
        copy_b: 0,
    },
    Swap {
        a: (0, -1),
        b: (1, 1),
        copy_a: 1,
        copy_b: 1,
    },
];

fn parity(x: i32, y: i32) -> (i32, i32) {
    (x.rem_euclid(2), y.rem_euclid(2))
}

impl TransformRule {
    pub const ALL: [TransformRule; 5] = [
        TransformRule::KagomeToSquare,
        TransformRule::DHexToTriangular,
        TransformRule::SquareDoubling,
        TransformRule::BowtieSplit,
        TransformRule::AsymTriangularSplit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformRule::KagomeToSquare => "kagome-to-square",
            TransformRule::DHexToTriangular => "dhex-to-triangular",
            TransformRule::SquareDoubling => "square-doubling",
            TransformRule::BowtieSplit => "bowtie-split",
            TransformRule::AsymTriangularSplit => "asym-triangular-split",
        }
    }

    pub fn source(self) -> LatticeKind {
        match self {
            TransformRule::KagomeToSquare => LatticeKind::Kagome,
            TransformRule::DHexToTriangular => LatticeKind::DoubleBondHexagonal,
            TransformRule::SquareDoubling => LatticeKind::Square,
            TransformRule::BowtieSplit => LatticeKind::Bowtie,
            TransformRule::AsymTriangularSplit => LatticeKind::AsymmetricTriangular,
        }
    }

    /// Kinds of the output components, in output order.
    pub fn targets(self) -> &'static [LatticeKind] {
        match self {
            TransformRule::KagomeToSquare => &[LatticeKind::Square],
            TransformRule::DHexToTriangular => &[LatticeKind::Triangular],
            TransformRule::SquareDoubling => &[LatticeKind::Square, LatticeKind::Square],
            TransformRule::BowtieSplit | TransformRule::AsymTriangularSplit => {
                &[LatticeKind::Triangular, LatticeKind::Square]
            }
        }
    }

    fn output_cell(self) -> Coord {
        match self {
            TransformRule::DHexToTriangular => (3, 3),
            _ => (2, 2),
        }
    }

    fn min_periodic_l(self) -> usize {
        match self {
            TransformRule::KagomeToSquare | TransformRule::DHexToTriangular => 4,
            _ => 8,
        }
    }

    fn swaps(self, x: i32, y: i32) -> Vec<&'static Swap> {
        match self {
            TransformRule::KagomeToSquare => {
                if parity(x, y) == (0, 0) {
                    KAGOME_SWAPS.iter().collect()
                } else {
                    Vec::new()
                }
            }
            TransformRule::DHexToTriangular => {
                if (x + y).rem_euclid(3) == 2 {
                    DHEX_SWAPS.iter().collect()
                } else {
                    Vec::new()
                }
            }
            TransformRule::SquareDoubling => {
                if (x + y).rem_euclid(2) == 1 {
                    STRAIGHT_SWAPS.iter().collect()
                } else {
                    Vec::new()
                }
            }
            TransformRule::BowtieSplit => match parity(x, y) {
                (0, 1) | (1, 0) => STRAIGHT_SWAPS.iter().collect(),
                (1, 1) => vec![&DIAGONAL_SWAP],
                _ => Vec::new(),
            },
            TransformRule::AsymTriangularSplit => match parity(x, y) {
                (0, 0) => {
                    let mut s = vec![&DIAGONAL_SWAP];
                    s.extend(KAGOME_SWAPS.iter());
                    s
                }
                (1, 0) => vec![&STRAIGHT_SWAPS[1]],
                (0, 1) => vec![&STRAIGHT_SWAPS[0]],
                _ => Vec::new(),
            },
        }
    }

    fn removes(self, x: i32, y: i32) -> bool {
        match self {
            TransformRule::KagomeToSquare | TransformRule::AsymTriangularSplit => {
                parity(x, y) == (0, 0)
            }
            TransformRule::DHexToTriangular => (x + y).rem_euclid(3) == 2,
            TransformRule::SquareDoubling | TransformRule::BowtieSplit => {
                (x + y).rem_euclid(2) == 1
            }
        }
    }

    fn component(self, x: i32, y: i32) -> usize {
        match self {
            TransformRule::KagomeToSquare | TransformRule::DHexToTriangular => 0,
            TransformRule::SquareDoubling | TransformRule::BowtieSplit => {
                if parity(x, y) == (0, 0) {
                    0
                } else {
                    1
                }
            }
            TransformRule::AsymTriangularSplit => {
                if parity(x, y) == (1, 1) {
                    0
                } else {
                    1
                }
            }
        }
    }
}

impl fmt::Display for TransformRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformRule {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        TransformRule::ALL
            .into_iter()
            .find(|r| r.name() == key)
            .ok_or_else(|| LatticeError::UnknownRule(s.to_string()))
    }
}

/// Applies `rule` to a graph built as the rule's source lattice. Returns one
/// graph per output component, in the order of [`TransformRule::targets`].
pub fn transform(g: &Graph, rule: TransformRule) -> Result<Vec<Graph>, LatticeError> {
    if g.origin != Origin::Built || g.kind != rule.source() {
        let found = match g.origin {
            Origin::Built => g.kind.to_string(),
            Origin::Transformed { rule, .. } => format!("output of {rule}"),
        };
        return Err(LatticeError::RuleMismatch {
            rule,
            expected: rule.source(),
            found,
        });
    }
    if g.boundary == super::Boundary::Periodic && g.l < rule.min_periodic_l() {
        return Err(LatticeError::InvalidSize {
            kind: g.kind,
            l: g.l,
            reason: "too small a periodic patch for this transformation",
        });
    }

    // Edges leaving each vertex, keyed by displacement; parallel copies keep
    // their edge-list order.
    let mut by_offset: HashMap<(VertexId, Coord), Vec<usize>> = HashMap::new();
    for (i, e) in g.edges.iter().enumerate() {
        let (a, b) = (g.coord(e.u), g.coord(e.v));
        by_offset.entry((e.u, g.displacement(a, b))).or_default().push(i);
        by_offset.entry((e.v, g.displacement(b, a))).or_default().push(i);
    }

    let mut consumed = vec![false; g.edges.len()];
    let mut created: Vec<(Coord, Coord, u8, f64)> = Vec::new();
    for (id, &(x, y)) in g.coords.iter().enumerate() {
        for s in rule.swaps(x, y) {
            let pick = |off: Coord, copy: usize| {
                by_offset
                    .get(&(id as VertexId, off))
                    .and_then(|v| v.get(copy))
                    .copied()
            };
            let (Some(ea), Some(eb)) = (pick(s.a, s.copy_a), pick(s.b, s.copy_b)) else {
                continue;
            };
            debug_assert!(!consumed[ea] && !consumed[eb]);
            consumed[ea] = true;
            consumed[eb] = true;
            let (ca, cb) = (g.edges[ea].class, g.edges[eb].class);
            let prob = swap_probability(g.class_probs[ca as usize], g.class_probs[cb as usize])?;
            created.push((
                (x + s.a.0, y + s.a.1),
                (x + s.b.0, y + s.b.1),
                ca,
                prob.value(),
            ));
        }
    }

    let targets = rule.targets();
    let mut out: Vec<Graph> = targets
        .iter()
        .enumerate()
        .map(|(index, &kind)| {
            let mut h = Graph::empty(
                kind,
                Origin::Transformed { rule, index },
                g.l,
                g.boundary,
                rule.output_cell(),
            );
            h.class_probs = g.class_probs.clone();
            h
        })
        .collect();
    // Old vertex id -> (component, new id).
    let mut remap = vec![(usize::MAX, NO_VERTEX); g.coords.len()];
    for (id, &(x, y)) in g.coords.iter().enumerate() {
        if rule.removes(x, y) {
            continue;
        }
        let c = rule.component(x, y);
        remap[id] = (c, out[c].add_vertex((x, y)));
    }

    for (i, e) in g.edges.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        let ((cu, u), (cv, v)) = (remap[e.u as usize], remap[e.v as usize]);
        if u == NO_VERTEX || v == NO_VERTEX {
            debug_assert!(g.boundary == super::Boundary::Open, "unswapped bond at a removed site");
            continue;
        }
        if cu != cv {
            debug_assert!(g.boundary == super::Boundary::Open, "surviving bond joins two components");
            continue;
        }
        out[cu].edges.push(Edge { u, v, class: e.class });
    }
    for (a, b, class, prob) in created {
        let (Some(ua), Some(ub)) = (g.vertex_at(a), g.vertex_at(b)) else {
            continue;
        };
        let ((ca, u), (cb, v)) = (remap[ua as usize], remap[ub as usize]);
        if u == NO_VERTEX || v == NO_VERTEX {
            continue;
        }
        debug_assert_eq!(ca, cb, "created bond joins two components");
        debug_assert!((prob - g.class_probs[class as usize]).abs() < 1e-12);
        out[ca].edges.push(Edge { u, v, class });
    }
    Ok(out)
}

/// A small tuple of nodes and its translate by `separation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedNodes {
    pub near: Vec<VertexId>,
    pub far: Vec<VertexId>,
    pub near_coords: Vec<Coord>,
    pub far_coords: Vec<Coord>,
    pub separation: Coord,
}

/// Marked nodes for the splitting rules, in the source graph `g`:
///
/// * `SquareDoubling`: `A = (0,0)`, `A′ = (1,1)`, one per output lattice.
/// * `BowtieSplit`: `A = (2,2)` (degree 6, sent to the triangular lattice),
///   `A′ = (3,1)` and `A″ = (3,3)` (sent to the square lattice); `A″` shares
///   a diagonal bond with `A`.
///
/// The far tuple is shifted by `(s, 0)` with `s` rounded up to a multiple of
/// the translation cell.
pub fn marked_nodes(g: &Graph, rule: TransformRule, separation: usize) -> Result<MarkedNodes, LatticeError> {
    let near_coords: Vec<Coord> = match rule {
        TransformRule::SquareDoubling => vec![(0, 0), (1, 1)],
        TransformRule::BowtieSplit => vec![(2, 2), (3, 1), (3, 3)],
        _ => return Err(LatticeError::NoMarkedNodes(rule)),
    };
    if g.kind != rule.source() || g.origin != Origin::Built {
        return Err(LatticeError::RuleMismatch {
            rule,
            expected: rule.source(),
            found: g.kind.to_string(),
        });
    }
    if separation == 0 {
        return Err(LatticeError::InvalidSeparation);
    }
    let step = 2;
    let s = separation.div_ceil(step) * step;
    let sep = (s as i32, 0);
    let far_coords: Vec<Coord> = near_coords
        .iter()
        .map(|&(x, y)| (x + sep.0, y + sep.1))
        .collect();
    let lookup = |cs: &[Coord]| -> Result<Vec<VertexId>, LatticeError> {
        cs.iter()
            .map(|&c| g.vertex_at(c).ok_or(LatticeError::MissingNode(c)))
            .collect()
    };
    Ok(MarkedNodes {
        near: lookup(&near_coords)?,
        far: lookup(&far_coords)?,
        near_coords,
        far_coords,
        separation: sep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build, Boundary};

    #[test]
    fn output_sizes() {
        let kag = build(LatticeKind::Kagome, 8, Boundary::Periodic, &[0.4]).unwrap();
        let sq = transform(&kag, TransformRule::KagomeToSquare).unwrap();
        assert_eq!(sq.len(), 1);
        assert_eq!(sq[0].vertex_count(), 32);
        assert_eq!(sq[0].edge_count(), 64);
        assert!(sq[0].edges().iter().all(|e| sq[0].edge_prob(e) == 0.4));

        let dhex = build(LatticeKind::DoubleBondHexagonal, 6, Boundary::Periodic, &[0.4]).unwrap();
        let tri = transform(&dhex, TransformRule::DHexToTriangular).unwrap();
        assert_eq!(tri[0].vertex_count(), 12);
        assert_eq!(tri[0].edge_count(), 36);
    }

    #[test]
    fn rule_mismatch_and_idempotence() {
        let sq = build(LatticeKind::Square, 8, Boundary::Periodic, &[0.5]).unwrap();
        assert!(matches!(
            transform(&sq, TransformRule::BowtieSplit),
            Err(LatticeError::RuleMismatch { .. })
        ));
        let halves = transform(&sq, TransformRule::SquareDoubling).unwrap();
        for rule in TransformRule::ALL {
            assert!(transform(&halves[0], rule).is_err());
        }
    }

    #[test]
    fn marked_node_errors() {
        let kag = build(LatticeKind::Kagome, 8, Boundary::Periodic, &[0.4]).unwrap();
        assert_eq!(
            marked_nodes(&kag, TransformRule::KagomeToSquare, 4),
            Err(LatticeError::NoMarkedNodes(TransformRule::KagomeToSquare))
        );
        let sq = build(LatticeKind::Square, 8, Boundary::Periodic, &[0.5]).unwrap();
        assert_eq!(
            marked_nodes(&sq, TransformRule::SquareDoubling, 0),
            Err(LatticeError::InvalidSeparation)
        );
        let m = marked_nodes(&sq, TransformRule::SquareDoubling, 3).unwrap();
        assert_eq!(m.separation, (4, 0));
        assert_eq!(m.far_coords, vec![(4, 0), (5, 1)]);
    }

    #[test]
    fn asymmetric_split_keeps_both_densities() {
        let g = build(LatticeKind::AsymmetricTriangular, 8, Boundary::Periodic, &[0.3, 0.6]).unwrap();
        let out = transform(&g, TransformRule::AsymTriangularSplit).unwrap();
        assert!(out[0].edges().iter().all(|e| out[0].edge_prob(e) == 0.3));
        assert!(out[1].edges().iter().all(|e| out[1].edge_prob(e) == 0.6));
    }
}
