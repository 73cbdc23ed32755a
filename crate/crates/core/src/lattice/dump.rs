//! Plain-text edge lists: a `#` header line with kind, size and boundary, then
//! one `u_x u_y v_x v_y class` line per edge.

use std::fmt::Write as _;

use super::{Boundary, Coord, Graph, LatticeError, LatticeKind};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListHeader {
    pub kind: LatticeKind,
    pub l: usize,
    pub boundary: Boundary,
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("# kind={} L={} boundary={}\n", g.kind(), g.l(), g.boundary());
    for e in g.edges() {
        let (a, b) = (g.coord(e.u), g.coord(e.v));
        let _ = writeln!(out, "{} {} {} {} {}", a.0, a.1, b.0, b.1, e.class);
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<(EdgeListHeader, Vec<(Coord, Coord, u8)>), LatticeError> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| LatticeError::Parse("missing header".into()))?;
    let (mut kind, mut l, mut boundary) = (None, None, None);
    for field in head.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| LatticeError::Parse(format!("bad header field `{field}`")))?;
        match key {
            "kind" => kind = Some(value.parse()?),
            "L" => {
                l = Some(
                    value
                        .parse()
                        .map_err(|_| LatticeError::Parse(format!("bad L `{value}`")))?,
                )
            }
            "boundary" => boundary = Some(value.parse()?),
            _ => {}
        }
    }
    let header = match (kind, l, boundary) {
        (Some(kind), Some(l), Some(boundary)) => EdgeListHeader { kind, l, boundary },
        _ => return Err(LatticeError::Parse("incomplete header".into())),
    };
    let mut edges = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<i32> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| LatticeError::Parse(format!("line {}: `{line}`", n + 2)))?;
        let [ux, uy, vx, vy, c] = nums[..] else {
            return Err(LatticeError::Parse(format!("line {}: expected 5 fields", n + 2)));
        };
        edges.push(((ux, uy), (vx, vy), c as u8));
    }
    Ok((header, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build;

    #[test]
    fn round_trip() {
        let g = build(LatticeKind::Kagome, 4, Boundary::Open, &[0.5]).unwrap();
        let text = write_edge_list(&g);
        assert!(text.starts_with("# kind=kagome L=4 boundary=open\n"));
        let (h, edges) = parse_edge_list(&text).unwrap();
        assert_eq!(h.kind, LatticeKind::Kagome);
        assert_eq!(edges.len(), g.edge_count());
        assert_eq!(edges[0], (g.coord(g.edges()[0].u), g.coord(g.edges()[0].v), 0));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_edge_list("0 0 1 0 0\n").is_err());
        assert!(parse_edge_list("# kind=square L=4 boundary=open\n0 0 1\n").is_err());
    }
}
