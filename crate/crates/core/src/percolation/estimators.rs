use super::{ratio_stderr, sample_records, Estimate, PercolationError, Quantity, Result};
use crate::lattice::{build, Boundary, Coord, Graph, LatticeKind, VertexId};

/// A node tuple together with all its translates by the graph's translation
/// cell. On open patches only the tuple itself is used.
#[derive(Debug, Clone)]
pub struct TranslatedTuples {
    k: usize,
    ids: Vec<VertexId>,
}

impl TranslatedTuples {
    pub fn new(g: &Graph, nodes: &[Coord]) -> Result<Self> {
        Self::build(g, nodes, g.boundary() == Boundary::Periodic)
    }

    /// The tuple alone, without translates.
    pub fn single(g: &Graph, nodes: &[Coord]) -> Result<Self> {
        Self::build(g, nodes, false)
    }

    fn build(g: &Graph, nodes: &[Coord], translate: bool) -> Result<Self> {
        if nodes.is_empty() {
            return Err(PercolationError::InvalidArgument("empty node tuple".into()));
        }
        let mut ids = Vec::new();
        for &c in nodes {
            ids.push(g.vertex_at(c).ok_or(PercolationError::NodeOutsideGraph(c))?);
        }
        if translate {
            let (cx, cy) = g.translation_cell();
            let l = g.l() as i32;
            for ty in (0..l).step_by(cy as usize) {
                for tx in (0..l).step_by(cx as usize) {
                    if (tx, ty) == (0, 0) {
                        continue;
                    }
                    for &(x, y) in nodes {
                        let v = g
                            .vertex_at((x + tx, y + ty))
                            .expect("translation cell maps vertices to vertices");
                        ids.push(v);
                    }
                }
            }
        }
        Ok(TranslatedTuples {
            k: nodes.len(),
            ids,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[VertexId]> {
        self.ids.chunks_exact(self.k)
    }
}

/// Fraction of vertices in the largest cluster, averaged over samples.
pub fn theta(g: &Graph, nsamples: usize, seed: u64) -> Result<Estimate> {
    if nsamples == 0 {
        return Err(PercolationError::NoSamples);
    }
    let xs = sample_records(g, nsamples, seed, |s| s.largest_fraction());
    Ok(Estimate::from_samples(Quantity::Theta, &xs, g, seed))
}

/// Probability that at least one node of the tuple is in the largest cluster.
pub fn pi(g: &Graph, nodes: &[Coord], nsamples: usize, seed: u64) -> Result<Estimate> {
    pi_over(g, &TranslatedTuples::new(g, nodes)?, nsamples, seed)
}

/// [`pi`] for the given tuple only, without averaging over translates.
pub fn pi_fixed(g: &Graph, nodes: &[Coord], nsamples: usize, seed: u64) -> Result<Estimate> {
    pi_over(g, &TranslatedTuples::single(g, nodes)?, nsamples, seed)
}

fn pi_over(g: &Graph, tuples: &TranslatedTuples, nsamples: usize, seed: u64) -> Result<Estimate> {
    if nsamples == 0 {
        return Err(PercolationError::NoSamples);
    }
    let norm = tuples.len() as f64;
    let xs = sample_records(g, nsamples, seed, |s| {
        let hits = tuples
            .tuples()
            .filter(|t| t.iter().any(|&v| s.in_largest(v)))
            .count();
        hits as f64 / norm
    });
    Ok(Estimate::from_samples(Quantity::Pi, &xs, g, seed))
}

/// `P[A in C | A′ in C]` as a pooled ratio over samples and translates.
pub fn omega(g: &Graph, a: Coord, a_prime: Coord, nsamples: usize, seed: u64) -> Result<Estimate> {
    omega_over(g, &TranslatedTuples::new(g, &[a, a_prime])?, nsamples, seed)
}

/// [`omega`] for the given pair only.
pub fn omega_fixed(g: &Graph, a: Coord, a_prime: Coord, nsamples: usize, seed: u64) -> Result<Estimate> {
    omega_over(g, &TranslatedTuples::single(g, &[a, a_prime])?, nsamples, seed)
}

fn omega_over(g: &Graph, tuples: &TranslatedTuples, nsamples: usize, seed: u64) -> Result<Estimate> {
    if nsamples == 0 {
        return Err(PercolationError::NoSamples);
    }
    let norm = tuples.len() as f64;
    let rec = sample_records(g, nsamples, seed, |s| {
        let (mut both, mut cond) = (0usize, 0usize);
        for t in tuples.tuples() {
            if s.in_largest(t[1]) {
                cond += 1;
                if s.in_largest(t[0]) {
                    both += 1;
                }
            }
        }
        (both as f64 / norm, cond as f64 / norm)
    });
    let (xs, ys): (Vec<f64>, Vec<f64>) = rec.into_iter().unzip();
    let (mean, stderr) = ratio_stderr(&xs, &ys).ok_or(PercolationError::NoConditioningEvents)?;
    let mut est = Estimate::from_samples(Quantity::Omega, &xs, g, seed);
    est.mean = mean;
    est.stderr = stderr;
    Ok(est)
}

fn columns(g: &Graph) -> (Vec<VertexId>, Vec<VertexId>) {
    let last = g.l() as i32 - 1;
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (i, &(x, _)) in g.coords().iter().enumerate() {
        if x == 0 {
            left.push(i as VertexId);
        }
        if x == last {
            right.push(i as VertexId);
        }
    }
    (left, right)
}

/// Probability that one open cluster touches both the left and the right
/// column of an open patch.
pub fn spanning(g: &Graph, nsamples: usize, seed: u64) -> Result<Estimate> {
    if g.boundary() != Boundary::Open {
        return Err(PercolationError::InvalidArgument(
            "spanning probability needs open boundaries".into(),
        ));
    }
    if nsamples == 0 {
        return Err(PercolationError::NoSamples);
    }
    let (left, right) = columns(g);
    let xs = sample_records(g, nsamples, seed, |s| {
        if s.connects(&left, &right) {
            1.0
        } else {
            0.0
        }
    });
    Ok(Estimate::from_samples(Quantity::Spanning, &xs, g, seed))
}

fn periodic(kind: LatticeKind, p: f64, l: usize) -> Result<Graph> {
    Ok(build(kind, l, Boundary::Periodic, &vec![p; kind.class_count()])?)
}

/// θ on the periodic `L x L` lattice of `kind`, every bond class at `p`.
pub fn theta_estimate(kind: LatticeKind, p: f64, l: usize, nsamples: usize, seed: u64) -> Result<Estimate> {
    theta(&periodic(kind, p, l)?, nsamples, seed)
}

/// π for a node tuple on the periodic lattice of `kind`.
pub fn pi_estimate(
    kind: LatticeKind,
    p: f64,
    nodes: &[Coord],
    l: usize,
    nsamples: usize,
    seed: u64,
) -> Result<Estimate> {
    pi(&periodic(kind, p, l)?, nodes, nsamples, seed)
}

/// ω for the pair `(A, A′)` on the periodic lattice of `kind`.
pub fn omega_estimate(
    kind: LatticeKind,
    p: f64,
    pair: (Coord, Coord),
    l: usize,
    nsamples: usize,
    seed: u64,
) -> Result<Estimate> {
    omega(&periodic(kind, p, l)?, pair.0, pair.1, nsamples, seed)
}

/// Left-right spanning probability on the open `L x L` patch of `kind`.
pub fn spanning_probability(
    kind: LatticeKind,
    p: f64,
    l: usize,
    nsamples: usize,
    seed: u64,
) -> Result<Estimate> {
    let g = build(kind, l, Boundary::Open, &vec![p; kind.class_count()])?;
    spanning(&g, nsamples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certain_bonds() {
        let e = theta_estimate(LatticeKind::Square, 1.0, 8, 1, 0).unwrap();
        assert_eq!((e.mean, e.stderr, e.nsamples), (1.0, 0.0, 1));
        let e = pi_estimate(LatticeKind::Bowtie, 1.0, &[(2, 2), (3, 1)], 8, 3, 0).unwrap();
        assert_eq!(e.mean, 1.0);
        let e = omega_estimate(LatticeKind::Square, 1.0, ((0, 0), (1, 1)), 8, 3, 0).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(spanning_probability(LatticeKind::Kagome, 1.0, 8, 4, 0).unwrap().mean, 1.0);
        assert_eq!(spanning_probability(LatticeKind::Kagome, 0.0, 8, 4, 0).unwrap().mean, 0.0);
    }

    #[test]
    fn single_node_pi_is_theta_on_transitive_lattices() {
        for kind in [LatticeKind::Square, LatticeKind::Triangular] {
            let t = theta_estimate(kind, 0.6, 16, 20, 5).unwrap();
            let p = pi_estimate(kind, 0.6, &[(3, 4)], 16, 20, 5).unwrap();
            assert!((t.mean - p.mean).abs() < 1e-12);
        }
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(
            pi_estimate(LatticeKind::Kagome, 0.6, &[(1, 1)], 8, 4, 0),
            Err(PercolationError::NodeOutsideGraph((1, 1)))
        ));
        let g = build(LatticeKind::Square, 8, Boundary::Periodic, &[0.5]).unwrap();
        assert!(spanning(&g, 4, 0).is_err());
        assert!(matches!(theta(&g, 0, 0), Err(PercolationError::NoSamples)));
    }

    #[test]
    fn translates_cover_the_cell_lattice() {
        let g = build(LatticeKind::Kagome, 8, Boundary::Periodic, &[0.5]).unwrap();
        let t = TranslatedTuples::new(&g, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(t.len(), 16);
    }
}
