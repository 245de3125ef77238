//! Edge-colored bipartite graphs: Feynman graphs (color 0 = propagator) and
//! boundary graphs (colors `1..=D`).

mod catalog;

pub use catalog::{catalog, classify, entry, fixture_json, BoundaryClass, CatalogEntry, Classification};

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    White,
    Black,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Internal,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub parity: Parity,
    pub kind: Kind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub color: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GraphJson {
    rank: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// Bipartite multigraph with at most one edge of each color per vertex.
///
/// Vertices are addressed by position in `vertices`; `id`s are carried along
/// for I/O only.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct ColoredGraph {
    rank: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    // adj[pos][color] = neighbor position
    adj: Vec<Vec<Option<usize>>>,
}

impl TryFrom<GraphJson> for ColoredGraph {
    type Error = Error;
    fn try_from(g: GraphJson) -> Result<Self> {
        ColoredGraph::new(g.rank, g.vertices, g.edges)
    }
}

impl From<ColoredGraph> for GraphJson {
    fn from(g: ColoredGraph) -> Self {
        GraphJson { rank: g.rank, vertices: g.vertices, edges: g.edges }
    }
}

impl PartialEq for ColoredGraph {
    fn eq(&self, other: &Self) -> bool {
        let key = |g: &ColoredGraph| {
            let mut e: Vec<(usize, usize, usize)> = g
                .edges
                .iter()
                .map(|e| (e.u.min(e.v), e.u.max(e.v), e.color))
                .collect();
            e.sort_unstable();
            e
        };
        self.rank == other.rank && self.vertices == other.vertices && key(self) == key(other)
    }
}

impl ColoredGraph {
    /// Endpoints in `edges` are vertex ids. Fails unless every edge joins a
    /// white and a black vertex and no vertex carries a color twice.
    pub fn new(rank: usize, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Structural("rank must be >= 1".into()));
        }
        let mut pos: HashMap<usize, usize> = HashMap::with_capacity(vertices.len());
        for (p, v) in vertices.iter().enumerate() {
            if pos.insert(v.id, p).is_some() {
                return Err(Error::Structural(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut adj = vec![vec![None; rank + 1]; vertices.len()];
        for e in &edges {
            if e.color > rank {
                return Err(Error::Structural(format!("edge color {} exceeds rank {rank}", e.color)));
            }
            let (pu, pv) = match (pos.get(&e.u), pos.get(&e.v)) {
                (Some(&a), Some(&b)) => (a, b),
                _ => return Err(Error::Structural(format!("edge ({}, {}) references a missing vertex", e.u, e.v))),
            };
            if vertices[pu].parity == vertices[pv].parity {
                return Err(Error::Structural(format!("edge ({}, {}) joins two vertices of equal parity", e.u, e.v)));
            }
            for p in [pu, pv] {
                if adj[p][e.color].is_some() {
                    return Err(Error::Structural(format!(
                        "vertex {} has two edges of color {}",
                        vertices[p].id, e.color
                    )));
                }
            }
            adj[pu][e.color] = Some(pv);
            adj[pv][e.color] = Some(pu);
        }
        let edges = edges
            .into_iter()
            .map(|e| {
                // store white endpoint first
                if vertices[pos[&e.u]].parity == Parity::White {
                    e
                } else {
                    Edge { u: e.v, v: e.u, color: e.color }
                }
            })
            .collect();
        Ok(ColoredGraph { rank, vertices, edges, adj })
    }

    /// Boundary graph with whites `0..k` and blacks `k..2k`; black `j` is
    /// joined in color `c` to white `blacks[j][c - 1]`.
    pub fn from_black_spec(blacks: &[[usize; 3]]) -> Result<Self> {
        let k = blacks.len();
        let mut vertices = Vec::with_capacity(2 * k);
        for i in 0..k {
            vertices.push(Vertex { id: i, parity: Parity::White, kind: Kind::External });
        }
        for j in 0..k {
            vertices.push(Vertex { id: k + j, parity: Parity::Black, kind: Kind::External });
        }
        let mut edges = Vec::with_capacity(3 * k);
        for (j, spec) in blacks.iter().enumerate() {
            for c in 1..=3 {
                let w = spec[c - 1];
                if w >= k {
                    return Err(Error::Structural(format!("black {j} points at missing white {w}")));
                }
                edges.push(Edge { u: w, v: k + j, color: c });
            }
        }
        ColoredGraph::new(3, vertices, edges)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn position(&self, id: usize) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Neighbor position of the vertex at `pos` along `color`.
    pub fn neighbor(&self, pos: usize, color: usize) -> Option<usize> {
        self.adj[pos].get(color).copied().flatten()
    }

    pub fn whites(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&p| self.vertices[p].parity == Parity::White).collect()
    }

    pub fn blacks(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&p| self.vertices[p].parity == Parity::Black).collect()
    }

    /// Fails unless every vertex carries exactly the colors `1..=D`.
    pub fn check_boundary(&self) -> Result<()> {
        for (p, v) in self.vertices.iter().enumerate() {
            if self.adj[p][0].is_some() {
                return Err(Error::Structural(format!("vertex {} carries a propagator edge", v.id)));
            }
            if let Some(c) = (1..=self.rank).find(|&c| self.adj[p][c].is_none()) {
                return Err(Error::Structural(format!("vertex {} is missing color {c}", v.id)));
            }
        }
        Ok(())
    }

    /// Traces the alternating `(0, c)` paths between external legs.
    pub fn boundary(&self) -> Result<ColoredGraph> {
        let ext: Vec<usize> = (0..self.vertices.len()).filter(|&p| self.vertices[p].kind == Kind::External).collect();
        if ext.len() < 2 || ext.len() % 2 == 1 {
            return Err(Error::Structural(format!("an open graph needs an even number >= 2 of legs, got {}", ext.len())));
        }
        for &p in &ext {
            if self.adj[p][0].is_none() {
                return Err(Error::Structural(format!("external vertex {} has no propagator", self.vertices[p].id)));
            }
        }
        let max_steps = self.vertices.len() + 1;
        let mut edges = Vec::with_capacity(ext.len() / 2 * self.rank);
        for &w in ext.iter().filter(|&&p| self.vertices[p].parity == Parity::White) {
            for c in 1..=self.rank {
                let mut cur = w;
                let mut steps = 0;
                let end = loop {
                    let n = self.adj[cur][0].ok_or_else(|| {
                        Error::Structural(format!("vertex {} is missing color 0", self.vertices[cur].id))
                    })?;
                    if self.vertices[n].kind == Kind::External {
                        break n;
                    }
                    cur = self.adj[n][c].ok_or_else(|| {
                        Error::Structural(format!("vertex {} is missing color {c}", self.vertices[n].id))
                    })?;
                    steps += 1;
                    if steps > max_steps {
                        return Err(Error::Structural("alternating path does not terminate".into()));
                    }
                };
                edges.push(Edge { u: self.vertices[w].id, v: self.vertices[end].id, color: c });
            }
        }
        let vertices = ext.iter().map(|&p| self.vertices[p]).collect();
        let b = ColoredGraph::new(self.rank, vertices, edges)?;
        b.check_boundary()?;
        Ok(b)
    }

    /// Vertex positions of each connected component, in order of first vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(p) = queue.pop_front() {
                for q in self.adj[p].iter().flatten() {
                    if comp[*q] == usize::MAX {
                        comp[*q] = id;
                        members.push(*q);
                        queue.push_back(*q);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn connected_components(&self) -> usize {
        self.components().len()
    }

    /// Bicolored cycles over all color pairs, restricted to `members`.
    fn face_count(&self, members: &[usize]) -> usize {
        let mut faces = 0;
        for i in 1..=self.rank {
            for j in (i + 1)..=self.rank {
                let mut seen: HashMap<usize, ()> = HashMap::new();
                for &start in members {
                    if seen.contains_key(&start) {
                        continue;
                    }
                    faces += 1;
                    let mut cur = start;
                    let mut color = i;
                    loop {
                        seen.insert(cur, ());
                        cur = self.adj[cur][color].expect("boundary graphs are regular");
                        color = if color == i { j } else { i };
                        if cur == start && color == i {
                            break;
                        }
                    }
                }
            }
        }
        faces
    }

    /// Sum over components of the genus from `V - E + F = 2 - 2g`, with `F`
    /// the bicolored faces. Defined for rank-3 boundary graphs.
    pub fn genus(&self) -> Result<u32> {
        if self.rank != 3 {
            return Err(Error::Structural("genus is defined here for rank-3 boundary graphs".into()));
        }
        self.check_boundary()?;
        let mut total = 0u32;
        for members in self.components() {
            let v = members.len() as i64;
            let e = v * self.rank as i64 / 2;
            let f = self.face_count(&members) as i64;
            let defect = 2 - (v - e + f);
            if defect < 0 || defect % 2 != 0 {
                return Err(Error::Structural(format!("Euler defect {defect} is not a non-negative even number")));
            }
            total += (defect / 2) as u32;
        }
        Ok(total)
    }

    /// Exchanges the far endpoints of the color-`a` edges at vertices `u`
    /// and `v` (ids, same parity).
    pub fn swap(&self, color: usize, u: usize, v: usize) -> Result<ColoredGraph> {
        if u == v {
            return Err(Error::Argument("swap needs two distinct vertices".into()));
        }
        if color == 0 || color > self.rank {
            return Err(Error::Argument(format!("swap color must lie in 1..={}", self.rank)));
        }
        let pu = self.position(u).ok_or_else(|| Error::Argument(format!("no vertex {u}")))?;
        let pv = self.position(v).ok_or_else(|| Error::Argument(format!("no vertex {v}")))?;
        if self.vertices[pu].parity != self.vertices[pv].parity {
            return Err(Error::Argument("swap endpoints must have equal parity".into()));
        }
        let nu = self.adj[pu][color].ok_or_else(|| Error::Argument(format!("vertex {u} has no color-{color} edge")))?;
        let nv = self.adj[pv][color].ok_or_else(|| Error::Argument(format!("vertex {v} has no color-{color} edge")))?;
        let (idu, idv) = (self.vertices[pu].id, self.vertices[pv].id);
        let (idnu, idnv) = (self.vertices[nu].id, self.vertices[nv].id);
        let edges = self
            .edges
            .iter()
            .map(|e| {
                if e.color != color {
                    return *e;
                }
                let touches = |x: usize| e.u == x || e.v == x;
                if touches(idu) && touches(idnu) {
                    Edge { u: idu, v: idnv, color }
                } else if touches(idv) && touches(idnv) {
                    Edge { u: idv, v: idnu, color }
                } else {
                    *e
                }
            })
            .collect();
        ColoredGraph::new(self.rank, self.vertices.clone(), edges)
    }

    fn signature(&self, p: usize) -> (Parity, Kind, u64) {
        let mask = self.adj[p]
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_some())
            .fold(0u64, |m, (c, _)| m | (1 << c));
        (self.vertices[p].parity, self.vertices[p].kind, mask)
    }

    /// Color-, parity- and kind-preserving isomorphisms `self -> other`, as
    /// position maps. Stops after `limit` maps when given.
    pub fn isomorphisms(&self, other: &ColoredGraph, limit: Option<usize>) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        if n != other.vertices.len() || self.rank != other.rank || self.edges.len() != other.edges.len() {
            return Vec::new();
        }
        // BFS order so that most vertices have an already-placed neighbor
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        for root in 0..n {
            if placed[root] {
                continue;
            }
            placed[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(p) = queue.pop_front() {
                order.push(p);
                for q in self.adj[p].iter().flatten() {
                    if !placed[*q] {
                        placed[*q] = true;
                        queue.push_back(*q);
                    }
                }
            }
        }
        let mut state = IsoState {
            a: self,
            b: other,
            order,
            map: vec![usize::MAX; n],
            used: vec![false; n],
            found: Vec::new(),
            limit,
        };
        state.search(0);
        state.found
    }

    pub fn is_isomorphic(&self, other: &ColoredGraph) -> bool {
        !self.isomorphisms(other, Some(1)).is_empty()
    }

    pub fn count_automorphisms(&self) -> usize {
        self.isomorphisms(self, None).len()
    }
}

struct IsoState<'g> {
    a: &'g ColoredGraph,
    b: &'g ColoredGraph,
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
    limit: Option<usize>,
}

impl IsoState<'_> {
    fn done(&self) -> bool {
        self.limit.is_some_and(|l| self.found.len() >= l)
    }

    fn consistent(&self, v: usize, cand: usize) -> bool {
        if self.used[cand] || self.a.signature(v) != self.b.signature(cand) {
            return false;
        }
        self.a.adj[v].iter().enumerate().all(|(c, n)| match n {
            Some(w) if self.map[*w] != usize::MAX => self.b.adj[cand][c] == Some(self.map[*w]),
            _ => true,
        })
    }

    fn search(&mut self, depth: usize) {
        if self.done() {
            return;
        }
        if depth == self.order.len() {
            self.found.push(self.map.clone());
            return;
        }
        let v = self.order[depth];
        let forced = self.a.adj[v].iter().enumerate().find_map(|(c, n)| match n {
            Some(w) if self.map[*w] != usize::MAX => Some(self.b.adj[self.map[*w]][c]),
            _ => None,
        });
        let candidates: Vec<usize> = match forced {
            Some(Some(c)) => vec![c],
            Some(None) => Vec::new(),
            None => (0..self.b.vertices.len()).collect(),
        };
        for cand in candidates {
            if !self.consistent(v, cand) {
                continue;
            }
            self.map[v] = cand;
            self.used[cand] = true;
            self.search(depth + 1);
            self.map[v] = usize::MAX;
            self.used[cand] = false;
            if self.done() {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn melon() -> ColoredGraph {
        ColoredGraph::from_black_spec(&[[0, 0, 0]]).unwrap()
    }

    #[test]
    fn rejects_same_parity_edge() {
        let v = vec![
            Vertex { id: 0, parity: Parity::White, kind: Kind::External },
            Vertex { id: 1, parity: Parity::White, kind: Kind::External },
        ];
        let e = vec![Edge { u: 0, v: 1, color: 1 }];
        assert!(matches!(ColoredGraph::new(3, v, e), Err(Error::Structural(_))));
    }

    #[test]
    fn rejects_repeated_color() {
        let v = vec![
            Vertex { id: 0, parity: Parity::White, kind: Kind::External },
            Vertex { id: 1, parity: Parity::Black, kind: Kind::External },
            Vertex { id: 2, parity: Parity::Black, kind: Kind::External },
        ];
        let e = vec![Edge { u: 0, v: 1, color: 1 }, Edge { u: 0, v: 2, color: 1 }];
        assert!(ColoredGraph::new(3, v, e).is_err());
    }

    #[test]
    fn melon_counts() {
        let m = melon();
        assert_eq!(m.connected_components(), 1);
        assert_eq!(m.genus().unwrap(), 0);
        assert_eq!(m.count_automorphisms(), 1);
    }

    #[test]
    fn bare_propagator_boundary_is_melon() {
        let v = vec![
            Vertex { id: 0, parity: Parity::White, kind: Kind::External },
            Vertex { id: 1, parity: Parity::Black, kind: Kind::External },
        ];
        let g = ColoredGraph::new(3, v, vec![Edge { u: 0, v: 1, color: 0 }]).unwrap();
        let b = g.boundary().unwrap();
        assert!(b.is_isomorphic(&melon()));
    }

    #[test]
    fn odd_leg_count_is_structural_error() {
        let v = vec![Vertex { id: 0, parity: Parity::White, kind: Kind::External }];
        let g = ColoredGraph::new(3, v, vec![]).unwrap();
        assert!(matches!(g.boundary(), Err(Error::Structural(_))));
    }

    #[test]
    fn json_roundtrip() {
        let g = ColoredGraph::from_black_spec(&[[0, 1, 1], [1, 0, 0]]).unwrap();
        let back = ColoredGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn swap_argument_errors() {
        let g = ColoredGraph::from_black_spec(&[[0, 1, 1], [1, 0, 0]]).unwrap();
        assert!(g.swap(1, 0, 0).is_err());
        assert!(g.swap(4, 0, 1).is_err());
        assert!(g.swap(0, 0, 1).is_err());
        assert!(g.swap(1, 0, 2).is_err());
    }
}
