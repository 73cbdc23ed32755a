//! Lattices embedded in the integer plane.
//!
//! Every kind lives on the square grid with nearest-neighbour bonds plus the
//! diagonal `(x, y) -> (x + 1, y + 1)`; individual kinds drop sites or bonds
//! of that host graph:
//!
//! | kind                    | sites                         | bonds                                    |
//! |-------------------------|-------------------------------|------------------------------------------|
//! | `Square`                | all                           | `(1,0)`, `(0,1)`                         |
//! | `Triangular`            | all                           | `(1,0)`, `(0,1)`, `(1,1)`                |
//! | `Hexagonal`             | `(x + y) % 3 != 0`            | triangular bonds between present sites   |
//! | `Kagome`                | not both coordinates odd      | triangular bonds between present sites   |
//! | `Bowtie`                | all                           | square bonds, `(1,1)` when `x + y` even  |
//! | `DoubleBondHexagonal`   | as `Hexagonal`                | every hexagonal bond twice               |
//! | `AsymmetricTriangular`  | all                           | triangular; class 0 (p) if an end is (odd, odd), else class 1 (p′) |
//!
//! Periodic lattices need `L >= 4` and `L` a multiple of [`LatticeKind::period`].

mod dump;
mod transform;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::entanglement::EntanglementError;

pub use dump::{parse_edge_list, write_edge_list, EdgeListHeader};
pub use transform::{marked_nodes, transform, MarkedNodes, TransformRule};

/// Point of the integer plane.
pub type Coord = (i32, i32);

/// Index into [`Graph::coords`].
pub type VertexId = u32;

const NO_VERTEX: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("unknown lattice kind `{0}`")]
    UnknownKind(String),
    #[error("unknown transformation `{0}`")]
    UnknownRule(String),
    #[error("{kind} with L = {l}: {reason}")]
    InvalidSize {
        kind: LatticeKind,
        l: usize,
        reason: &'static str,
    },
    #[error("{kind} needs {expected} bond probabilities, got {got}")]
    MissingProbability {
        kind: LatticeKind,
        expected: usize,
        got: usize,
    },
    #[error("bond probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("{rule} applies to {expected} lattices, not to {found}")]
    RuleMismatch {
        rule: TransformRule,
        expected: LatticeKind,
        found: String,
    },
    #[error("{0} has no marked-node prescription")]
    NoMarkedNodes(TransformRule),
    #[error("separation must be at least 1")]
    InvalidSeparation,
    #[error("marked node {0:?} is not a vertex of the graph")]
    MissingNode(Coord),
    #[error(transparent)]
    Swap(#[from] EntanglementError),
    #[error("edge list: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeKind {
    Square,
    Triangular,
    Hexagonal,
    Kagome,
    Bowtie,
    DoubleBondHexagonal,
    AsymmetricTriangular,
}

/// Root of `1 - p - 6p^2 + 6p^3 - p^5` in (0, 1).
pub const BOWTIE_PC: f64 = 0.404_518_319_3;

impl LatticeKind {
    pub const ALL: [LatticeKind; 7] = [
        LatticeKind::Square,
        LatticeKind::Triangular,
        LatticeKind::Hexagonal,
        LatticeKind::Kagome,
        LatticeKind::Bowtie,
        LatticeKind::DoubleBondHexagonal,
        LatticeKind::AsymmetricTriangular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Triangular => "triangular",
            LatticeKind::Hexagonal => "hexagonal",
            LatticeKind::Kagome => "kagome",
            LatticeKind::Bowtie => "bowtie",
            LatticeKind::DoubleBondHexagonal => "double-bond-hexagonal",
            LatticeKind::AsymmetricTriangular => "asymmetric-triangular",
        }
    }

    /// Bond percolation threshold, where one is known.
    ///
    /// The double-bond hexagonal value is in terms of the density of each
    /// copy, `1 - sqrt(1 - p_c(hex))`. The kagome value is a Monte Carlo
    /// estimate; the others are exact.
    pub fn critical_density(self) -> Option<f64> {
        let tri = 2.0 * (std::f64::consts::PI / 18.0).sin();
        match self {
            LatticeKind::Square => Some(0.5),
            LatticeKind::Triangular => Some(tri),
            LatticeKind::Hexagonal => Some(1.0 - tri),
            LatticeKind::Kagome => Some(0.524_405_3),
            LatticeKind::Bowtie => Some(BOWTIE_PC),
            LatticeKind::DoubleBondHexagonal => Some(1.0 - tri.sqrt()),
            LatticeKind::AsymmetricTriangular => None,
        }
    }

    /// Number of independent bond classes (probabilities) of the kind.
    pub fn class_count(self) -> usize {
        match self {
            LatticeKind::AsymmetricTriangular => 2,
            _ => 1,
        }
    }

    /// Vertex degrees that occur on a periodic lattice.
    pub fn coordination(self) -> &'static [usize] {
        match self {
            LatticeKind::Square | LatticeKind::Kagome => &[4],
            LatticeKind::Triangular
            | LatticeKind::DoubleBondHexagonal
            | LatticeKind::AsymmetricTriangular => &[6],
            LatticeKind::Hexagonal => &[3],
            LatticeKind::Bowtie => &[4, 6],
        }
    }

    /// Periodic `L` must be a multiple of this.
    pub fn period(self) -> usize {
        match self {
            LatticeKind::Square | LatticeKind::Triangular => 1,
            LatticeKind::Hexagonal | LatticeKind::DoubleBondHexagonal => 3,
            _ => 2,
        }
    }

    /// Smallest axis-aligned translations that map the lattice onto itself.
    pub fn translation_cell(self) -> Coord {
        let p = self.period() as i32;
        (p, p)
    }

    /// Vertex count of the periodic `L x L` lattice.
    pub fn vertex_count(self, l: usize) -> usize {
        match self {
            LatticeKind::Hexagonal | LatticeKind::DoubleBondHexagonal => 2 * l * l / 3,
            LatticeKind::Kagome => 3 * l * l / 4,
            _ => l * l,
        }
    }

    /// Edge count of the periodic `L x L` lattice.
    pub fn edge_count(self, l: usize) -> usize {
        let n = l * l;
        match self {
            LatticeKind::Square => 2 * n,
            LatticeKind::Triangular | LatticeKind::AsymmetricTriangular => 3 * n,
            LatticeKind::Hexagonal => n,
            LatticeKind::Kagome => 3 * n / 2,
            LatticeKind::Bowtie => 5 * n / 2,
            LatticeKind::DoubleBondHexagonal => 2 * n,
        }
    }

    pub(crate) fn has_site(self, x: i32, y: i32) -> bool {
        match self {
            LatticeKind::Hexagonal | LatticeKind::DoubleBondHexagonal => (x + y).rem_euclid(3) != 0,
            LatticeKind::Kagome => !(x.rem_euclid(2) == 1 && y.rem_euclid(2) == 1),
            _ => true,
        }
    }

    /// Forward bonds `(offset, class, copies)` leaving site `(x, y)`; the
    /// target site may still be absent.
    fn forward_bonds(self, x: i32, y: i32) -> Vec<(Coord, u8, usize)> {
        const NN: [Coord; 2] = [(1, 0), (0, 1)];
        const TRI: [Coord; 3] = [(1, 0), (0, 1), (1, 1)];
        match self {
            LatticeKind::Square => NN.iter().map(|&d| (d, 0, 1)).collect(),
            LatticeKind::Triangular | LatticeKind::Hexagonal | LatticeKind::Kagome => {
                TRI.iter().map(|&d| (d, 0, 1)).collect()
            }
            LatticeKind::DoubleBondHexagonal => TRI.iter().map(|&d| (d, 0, 2)).collect(),
            LatticeKind::Bowtie => {
                let mut b: Vec<_> = NN.iter().map(|&d| (d, 0, 1)).collect();
                if (x + y).rem_euclid(2) == 0 {
                    b.push(((1, 1), 0, 1));
                }
                b
            }
            LatticeKind::AsymmetricTriangular => {
                let odd = |a: i32, b: i32| a.rem_euclid(2) == 1 && b.rem_euclid(2) == 1;
                TRI.iter()
                    .map(|&(dx, dy)| {
                        let class = if odd(x, y) || odd(x + dx, y + dy) { 0 } else { 1 };
                        ((dx, dy), class, 1)
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let kind = match key.as_str() {
            "square" | "sq" => LatticeKind::Square,
            "triangular" | "tri" | "triangle" => LatticeKind::Triangular,
            "hexagonal" | "hex" | "honeycomb" => LatticeKind::Hexagonal,
            "kagome" | "kag" => LatticeKind::Kagome,
            "bowtie" | "bt" => LatticeKind::Bowtie,
            "double-bond-hexagonal" | "dhex" | "double-hexagonal" => {
                LatticeKind::DoubleBondHexagonal
            }
            "asymmetric-triangular" | "asym" | "asym-triangular" => {
                LatticeKind::AsymmetricTriangular
            }
            _ => return Err(LatticeError::UnknownKind(s.to_string())),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    Open,
    #[default]
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

impl FromStr for Boundary {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            _ => Err(LatticeError::Parse(format!("unknown boundary `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub class: u8,
}

/// How a graph came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Built,
    /// Component `index` of the output of a transformation.
    Transformed { rule: TransformRule, index: usize },
}

/// A lattice patch with an explicit edge list; parallel edges are allowed.
#[derive(Debug, Clone)]
pub struct Graph {
    kind: LatticeKind,
    origin: Origin,
    l: usize,
    boundary: Boundary,
    cell: Coord,
    coords: Vec<Coord>,
    lookup: Vec<u32>,
    edges: Vec<Edge>,
    class_probs: Vec<f64>,
}

impl Graph {
    fn empty(kind: LatticeKind, origin: Origin, l: usize, boundary: Boundary, cell: Coord) -> Self {
        Graph {
            kind,
            origin,
            l,
            boundary,
            cell,
            coords: Vec::new(),
            lookup: vec![NO_VERTEX; l * l],
            edges: Vec::new(),
            class_probs: Vec::new(),
        }
    }

    fn add_vertex(&mut self, c: Coord) -> VertexId {
        let id = self.coords.len() as u32;
        self.coords.push(c);
        let slot = self.slot(c).expect("vertex inside the patch");
        self.lookup[slot] = id;
        id
    }

    fn slot(&self, (x, y): Coord) -> Option<usize> {
        let l = self.l as i32;
        let (x, y) = match self.boundary {
            Boundary::Periodic => (x.rem_euclid(l), y.rem_euclid(l)),
            Boundary::Open => (x, y),
        };
        if (0..l).contains(&x) && (0..l).contains(&y) {
            Some((y * l + x) as usize)
        } else {
            None
        }
    }

    /// The lattice this graph is (isomorphic to).
    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    /// Side of the square patch of the plane the graph lives in.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Axis-aligned translation cell of the graph's symmetry group.
    pub fn translation_cell(&self) -> Coord {
        self.cell
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn coord(&self, v: VertexId) -> Coord {
        self.coords[v as usize]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn class_probs(&self) -> &[f64] {
        &self.class_probs
    }

    pub fn edge_prob(&self, e: &Edge) -> f64 {
        self.class_probs[e.class as usize]
    }

    /// Vertex at `c`, wrapping on periodic boundaries.
    pub fn vertex_at(&self, c: Coord) -> Option<VertexId> {
        self.slot(c)
            .map(|s| self.lookup[s])
            .filter(|&id| id != NO_VERTEX)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.coords.len()];
        for e in &self.edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        deg
    }

    /// Adjacency lists, one entry per edge end (parallel edges repeat).
    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.coords.len()];
        for e in &self.edges {
            adj[e.u as usize].push(e.v);
            adj[e.v as usize].push(e.u);
        }
        adj
    }

    /// Displacement `to - from`, using the minimal image on periodic patches.
    pub fn displacement(&self, from: Coord, to: Coord) -> Coord {
        let d = (to.0 - from.0, to.1 - from.1);
        match self.boundary {
            Boundary::Open => d,
            Boundary::Periodic => {
                let l = self.l as i32;
                let wrap = |c: i32| {
                    let c = c.rem_euclid(l);
                    if 2 * c > l {
                        c - l
                    } else {
                        c
                    }
                };
                (wrap(d.0), wrap(d.1))
            }
        }
    }

    /// Same graph with new class probabilities.
    pub fn with_probs(&self, probs: &[f64]) -> Result<Graph, LatticeError> {
        let probs = check_probs(self.kind_for_probs(), probs, self.class_probs.len())?;
        let mut g = self.clone();
        g.class_probs = probs;
        Ok(g)
    }

    fn kind_for_probs(&self) -> LatticeKind {
        match self.origin {
            Origin::Built => self.kind,
            Origin::Transformed { rule, .. } => rule.source(),
        }
    }
}

fn check_probs(kind: LatticeKind, probs: &[f64], expected: usize) -> Result<Vec<f64>, LatticeError> {
    if probs.len() < expected {
        return Err(LatticeError::MissingProbability {
            kind,
            expected,
            got: probs.len(),
        });
    }
    for &p in &probs[..expected] {
        if !(0.0..=1.0).contains(&p) {
            return Err(LatticeError::InvalidProbability(p));
        }
    }
    Ok(probs[..expected].to_vec())
}

/// Builds the `L x L` patch of `kind`. `probs` holds one open probability per
/// bond class.
pub fn build(
    kind: LatticeKind,
    l: usize,
    boundary: Boundary,
    probs: &[f64],
) -> Result<Graph, LatticeError> {
    let class_probs = check_probs(kind, probs, kind.class_count())?;
    if l < 2 {
        return Err(LatticeError::InvalidSize {
            kind,
            l,
            reason: "L must be at least 2",
        });
    }
    if boundary == Boundary::Periodic {
        if l < 4 {
            return Err(LatticeError::InvalidSize {
                kind,
                l,
                reason: "periodic lattices need L >= 4",
            });
        }
        if l % kind.period() != 0 {
            return Err(LatticeError::InvalidSize {
                kind,
                l,
                reason: "periodic L must be a multiple of the lattice period",
            });
        }
    }
    let mut g = Graph::empty(kind, Origin::Built, l, boundary, kind.translation_cell());
    g.class_probs = class_probs;
    let li = l as i32;
    for y in 0..li {
        for x in 0..li {
            if kind.has_site(x, y) {
                g.add_vertex((x, y));
            }
        }
    }
    for id in 0..g.coords.len() {
        let (x, y) = g.coords[id];
        for ((dx, dy), class, copies) in kind.forward_bonds(x, y) {
            let (tx, ty) = (x + dx, y + dy);
            if boundary == Boundary::Open && (tx >= li || ty >= li) {
                continue;
            }
            if !kind.has_site(tx.rem_euclid(li), ty.rem_euclid(li)) {
                continue;
            }
            if let Some(v) = g.vertex_at((tx, ty)) {
                for _ in 0..copies {
                    g.edges.push(Edge {
                        u: id as u32,
                        v,
                        class,
                    });
                }
            }
        }
    }
    Ok(g)
}

/// Multiset of neighbour displacements per vertex; handy for structural checks.
pub fn neighbour_offsets(g: &Graph) -> Vec<Vec<Coord>> {
    let mut out = vec![Vec::new(); g.vertex_count()];
    for e in g.edges() {
        let (a, b) = (g.coord(e.u), g.coord(e.v));
        out[e.u as usize].push(g.displacement(a, b));
        out[e.v as usize].push(g.displacement(b, a));
    }
    for o in &mut out {
        o.sort_unstable();
    }
    out
}

/// Counts edges per unordered vertex pair.
pub fn edge_multiplicities(g: &Graph) -> HashMap<(VertexId, VertexId), usize> {
    let mut m = HashMap::new();
    for e in g.edges() {
        let key = (e.u.min(e.v), e.u.max(e.v));
        *m.entry(key).or_insert(0) += 1;
    }
    m
}
