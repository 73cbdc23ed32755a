use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::lattice::{Graph, VertexId};

/// Per-vertex cluster labels from one bond configuration. A cluster's label
/// is its smallest vertex id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    labels: Vec<VertexId>,
    sizes: Vec<u32>,
    largest: VertexId,
}

impl ClusterLabeling {
    pub fn labels(&self) -> &[VertexId] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> VertexId {
        self.labels[v as usize]
    }

    /// Size of the cluster with the given label (0 if it is not a label).
    pub fn size_of(&self, label: VertexId) -> usize {
        self.sizes[label as usize] as usize
    }

    /// Label of the largest cluster; ties go to the smallest label.
    pub fn largest(&self) -> VertexId {
        self.largest
    }

    pub fn largest_size(&self) -> usize {
        self.size_of(self.largest)
    }

    pub fn in_largest(&self, v: VertexId) -> bool {
        self.labels[v as usize] == self.largest
    }

    pub fn cluster_count(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }

    /// `(label, size)` for every cluster, by label.
    pub fn clusters(&self) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.sizes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(l, &s)| (l as VertexId, s as usize))
    }
}

/// Union-find scratch space reused across samples on one graph.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    parent: Vec<u32>,
    size: Vec<u32>,
    min_vertex: Vec<u32>,
    root: Vec<u32>,
    largest_root: u32,
    stamp: Vec<u32>,
    epoch: u32,
}

impl Workspace {
    pub(crate) fn new(n: usize) -> Self {
        Workspace {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            min_vertex: (0..n as u32).collect(),
            root: vec![0; n],
            largest_root: 0,
            stamp: vec![0; n],
            epoch: 0,
        }
    }

    fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        for (i, m) in self.min_vertex.iter_mut().enumerate() {
            *m = i as u32;
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.min_vertex[ra as usize] = self.min_vertex[ra as usize].min(self.min_vertex[rb as usize]);
    }

    fn finish(&mut self) {
        let n = self.parent.len();
        let (mut best_size, mut best_min) = (0, u32::MAX);
        for v in 0..n as u32 {
            let r = self.find(v);
            self.root[v as usize] = r;
            if r == v {
                let (s, m) = (self.size[v as usize], self.min_vertex[v as usize]);
                if s > best_size || (s == best_size && m < best_min) {
                    best_size = s;
                    best_min = m;
                    self.largest_root = v;
                }
            }
        }
    }

    /// Samples every edge from `rng` (one `u32` per edge, in edge order) and
    /// labels the open clusters.
    pub(crate) fn sample_and_label(&mut self, g: &Graph, thresholds: &[u64], rng: &mut ChaCha8Rng) {
        self.reset();
        for e in g.edges() {
            if (rng.next_u32() as u64) < thresholds[e.class as usize] {
                self.union(e.u, e.v);
            }
        }
        self.finish();
    }

    pub(crate) fn label_config(&mut self, g: &Graph, open: &[bool]) {
        self.reset();
        for (e, &o) in g.edges().iter().zip(open) {
            if o {
                self.union(e.u, e.v);
            }
        }
        self.finish();
    }

    pub(crate) fn root(&self, v: VertexId) -> u32 {
        self.root[v as usize]
    }

    pub(crate) fn in_largest(&self, v: VertexId) -> bool {
        self.root[v as usize] == self.largest_root
    }

    pub(crate) fn largest_size(&self) -> usize {
        self.size[self.largest_root as usize] as usize
    }

    pub(crate) fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    /// Whether some cluster contains a vertex of `left` and one of `right`.
    pub(crate) fn connects(&mut self, left: &[VertexId], right: &[VertexId]) -> bool {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        for &v in left {
            let r = self.root[v as usize] as usize;
            self.stamp[r] = self.epoch;
        }
        right
            .iter()
            .any(|&v| self.stamp[self.root[v as usize] as usize] == self.epoch)
    }

    pub(crate) fn labeling(&self) -> ClusterLabeling {
        let n = self.parent.len();
        let mut labels = vec![0; n];
        let mut sizes = vec![0; n];
        for v in 0..n {
            let r = self.root[v] as usize;
            labels[v] = self.min_vertex[r];
            if r == v {
                sizes[self.min_vertex[r] as usize] = self.size[r];
            }
        }
        ClusterLabeling {
            labels,
            sizes,
            largest: self.min_vertex[self.largest_root as usize],
        }
    }
}
