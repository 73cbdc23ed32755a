use super::{PercolationError, Result, Workspace};
use crate::lattice::{Graph, VertexId};

/// Largest edge count accepted by [`exact_connectivity`].
pub const MAX_EXACT_EDGES: usize = 22;

/// Event whose probability [`exact_connectivity`] computes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    /// Some source lies in the cluster of `target`.
    Connected { sources: Vec<VertexId>, target: VertexId },
    /// Some node lies in the largest cluster (ties to the smallest label).
    InLargest { nodes: Vec<VertexId> },
    /// Expected fraction of vertices in the largest cluster.
    LargestFraction,
}

/// Exact probability (or expectation) of `query`, summing the product measure
/// over all `2^B` bond configurations.
pub fn exact_connectivity(g: &Graph, query: &Query) -> Result<f64> {
    let b = g.edge_count();
    if b > MAX_EXACT_EDGES {
        return Err(PercolationError::TooManyEdges(b));
    }
    let n = g.vertex_count() as VertexId;
    let check = |v: VertexId| {
        if v < n {
            Ok(())
        } else {
            Err(PercolationError::InvalidArgument(format!("vertex {v} out of range")))
        }
    };
    match query {
        Query::Connected { sources, target } => {
            check(*target)?;
            sources.iter().try_for_each(|&v| check(v))?;
        }
        Query::InLargest { nodes } => nodes.iter().try_for_each(|&v| check(v))?,
        Query::LargestFraction => {}
    }

    let probs: Vec<f64> = g.edges().iter().map(|e| g.edge_prob(e)).collect();
    let mut ws = Workspace::new(g.vertex_count());
    let mut open = vec![false; b];
    let mut total = 0.0;
    for mask in 0u64..(1u64 << b) {
        let mut w = 1.0;
        for (i, o) in open.iter_mut().enumerate() {
            *o = mask >> i & 1 == 1;
            w *= if *o { probs[i] } else { 1.0 - probs[i] };
        }
        if w == 0.0 {
            continue;
        }
        ws.label_config(g, &open);
        let value = match query {
            Query::Connected { sources, target } => {
                let t = ws.root(*target);
                if sources.iter().any(|&s| ws.root(s) == t) {
                    1.0
                } else {
                    0.0
                }
            }
            Query::InLargest { nodes } => {
                if nodes.iter().any(|&v| ws.in_largest(v)) {
                    1.0
                } else {
                    0.0
                }
            }
            Query::LargestFraction => ws.largest_size() as f64 / n as f64,
        };
        total += w * value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build, Boundary, LatticeKind};

    #[test]
    fn single_edge() {
        let g = build(LatticeKind::Square, 2, Boundary::Open, &[0.3]).unwrap();
        let (a, b) = (g.vertex_at((0, 0)).unwrap(), g.vertex_at((1, 0)).unwrap());
        // P[a <-> b] on the 4-cycle: direct bond, or the three-bond detour.
        let p: f64 = 0.3;
        let want = p + (1.0 - p) * p.powi(3);
        let got = exact_connectivity(&g, &Query::Connected { sources: vec![a], target: b }).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn opposite_corners_of_a_cycle() {
        let g = build(LatticeKind::Square, 2, Boundary::Open, &[0.5]).unwrap();
        let (a, c) = (g.vertex_at((0, 0)).unwrap(), g.vertex_at((1, 1)).unwrap());
        let got = exact_connectivity(&g, &Query::Connected { sources: vec![a], target: c }).unwrap();
        assert_eq!(got, 0.4375);
    }

    #[test]
    fn certain_bonds_connect_everything() {
        let g = build(LatticeKind::Triangular, 3, Boundary::Open, &[1.0]).unwrap();
        for q in [
            Query::Connected { sources: vec![0], target: 8 },
            Query::InLargest { nodes: vec![4] },
            Query::LargestFraction,
        ] {
            assert_eq!(exact_connectivity(&g, &q).unwrap(), 1.0);
        }
    }

    #[test]
    fn too_many_edges() {
        let g = build(LatticeKind::Square, 5, Boundary::Open, &[0.5]).unwrap();
        assert_eq!(
            exact_connectivity(&g, &Query::LargestFraction),
            Err(PercolationError::TooManyEdges(40))
        );
    }
}
