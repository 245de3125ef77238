//! The sixteen rank-3 boundary classes with at most six vertices.
//!
//! Canonical representatives put whites `x, y, z` at ids `0, 1, 2` and the
//! blacks `p^1, p^2, p^3` after them. The black rows below list, per color,
//! the white each black is joined to; they fix the momentum conventions of
//! every correlator in the crate.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::ColoredGraph;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryClass {
    M,
    V(usize),
    MM,
    G(usize),
    K,
    F(usize),
    MV(usize),
    MMM,
}

impl BoundaryClass {
    pub fn all() -> Vec<BoundaryClass> {
        use BoundaryClass::*;
        let mut v = vec![M];
        v.extend((1..=3).map(V));
        v.push(MM);
        v.extend((1..=3).map(G));
        v.push(K);
        v.extend((1..=3).map(F));
        v.extend((1..=3).map(MV));
        v.push(MMM);
        v
    }

    pub fn name(&self) -> String {
        use BoundaryClass::*;
        match *self {
            M => "m".into(),
            V(a) => format!("V_{a}"),
            MM => "m|m".into(),
            G(a) => format!("G_{a}"),
            K => "K".into(),
            F(a) => {
                let (b, c) = others(a);
                format!("F_{{{a};{b}{c}}}")
            }
            MV(a) => format!("m|V_{a}"),
            MMM => "m|m|m".into(),
        }
    }

    /// Fixture file stem.
    pub fn file_stem(&self) -> String {
        use BoundaryClass::*;
        match *self {
            M => "m".into(),
            V(a) => format!("V{a}"),
            MM => "mm".into(),
            G(a) => format!("G{a}"),
            K => "K".into(),
            F(a) => {
                let (b, c) = others(a);
                format!("F{a}_{b}{c}")
            }
            MV(a) => format!("mV{a}"),
            MMM => "mmm".into(),
        }
    }

    /// Number of white vertices.
    pub fn k(&self) -> usize {
        use BoundaryClass::*;
        match self {
            M => 1,
            V(_) | MM => 2,
            _ => 3,
        }
    }

    /// Black rows of the canonical representative.
    pub fn black_spec(&self) -> Vec<[usize; 3]> {
        use BoundaryClass::*;
        let pillow = |a: usize, w1: usize, w2: usize| -> [[usize; 3]; 2] {
            // black 1: w2 with color a taken from w1; black 2: the converse
            let mut b1 = [w2; 3];
            b1[a - 1] = w1;
            let mut b2 = [w1; 3];
            b2[a - 1] = w2;
            [b1, b2]
        };
        match *self {
            M => vec![[0, 0, 0]],
            V(a) => pillow(a, 0, 1).to_vec(),
            MM => vec![[0, 0, 0], [1, 1, 1]],
            G(a) => (0..3)
                .map(|i| {
                    let mut b = [(i + 1) % 3; 3];
                    b[a - 1] = i;
                    b
                })
                .collect(),
            K => vec![[0, 1, 2], [1, 2, 0], [2, 0, 1]],
            F(a) => {
                let (b, c) = others(a);
                // rows are (a, b, c) components of u = 0, v = 1, w = 2
                let rows = [[0, 1, 0], [2, 2, 1], [1, 0, 2]];
                rows.iter()
                    .map(|r| {
                        let mut out = [0; 3];
                        out[a - 1] = r[0];
                        out[b - 1] = r[1];
                        out[c - 1] = r[2];
                        out
                    })
                    .collect()
            }
            MV(a) => {
                let [b1, b2] = pillow(a, 1, 2);
                vec![[0, 0, 0], b1, b2]
            }
            MMM => vec![[0, 0, 0], [1, 1, 1], [2, 2, 2]],
        }
    }
}

fn others(a: usize) -> (usize, usize) {
    match a {
        1 => (2, 3),
        2 => (1, 3),
        _ => (1, 2),
    }
}

impl fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for BoundaryClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundaryClass::all()
            .into_iter()
            .find(|c| c.name() == s || c.file_stem() == s)
            .ok_or_else(|| Error::Argument(format!("unknown boundary class '{s}'")))
    }
}

impl Serialize for BoundaryClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for BoundaryClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub class: BoundaryClass,
    pub graph: ColoredGraph,
    pub vertex_count: usize,
    pub components: usize,
    pub genus: u32,
}

macro_rules! fixtures {
    ($($stem:literal),* $(,)?) => {
        &[$(($stem, include_str!(concat!("../../catalog/", $stem, ".json")))),*]
    };
}

const FIXTURES: &[(&str, &str)] = fixtures!(
    "m", "V1", "V2", "V3", "mm", "G1", "G2", "G3", "K", "F1_23", "F2_13", "F3_12", "mV1", "mV2", "mV3", "mmm",
);

/// Raw fixture text for a class.
pub fn fixture_json(class: BoundaryClass) -> &'static str {
    let stem = class.file_stem();
    FIXTURES.iter().find(|(s, _)| *s == stem).map(|(_, j)| *j).expect("every class has a fixture")
}

/// Catalog loaded from the shipped fixtures, in [`BoundaryClass::all`] order.
pub fn catalog() -> &'static [CatalogEntry] {
    static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        BoundaryClass::all()
            .into_iter()
            .map(|class| {
                let graph = ColoredGraph::from_json(fixture_json(class)).expect("fixture parses");
                CatalogEntry {
                    class,
                    vertex_count: graph.vertex_count(),
                    components: graph.connected_components(),
                    genus: graph.genus().expect("fixture is a boundary graph"),
                    graph,
                }
            })
            .collect()
    })
}

pub fn entry(class: BoundaryClass) -> &'static CatalogEntry {
    catalog().iter().find(|e| e.class == class).expect("catalog is complete")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    /// `iso[p]` is the position in the classified graph of the canonical
    /// representative's vertex at position `p`.
    Known { class: BoundaryClass, iso: Vec<usize> },
    Unclassified { vertices: usize, components: usize, genus: u32 },
}

impl Classification {
    pub fn class(&self) -> Option<BoundaryClass> {
        match self {
            Classification::Known { class, .. } => Some(*class),
            Classification::Unclassified { .. } => None,
        }
    }
}

pub fn classify(g: &ColoredGraph) -> Result<Classification> {
    g.check_boundary()?;
    if g.rank() == 3 && g.vertex_count() <= 6 {
        for e in catalog() {
            if e.vertex_count != g.vertex_count() {
                continue;
            }
            if let Some(iso) = e.graph.isomorphisms(g, Some(1)).pop() {
                return Ok(Classification::Known { class: e.class, iso });
            }
        }
    }
    Ok(Classification::Unclassified {
        vertices: g.vertex_count(),
        components: g.connected_components(),
        genus: if g.rank() == 3 { g.genus()? } else { 0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_match_black_spec() {
        for class in BoundaryClass::all() {
            let built = ColoredGraph::from_black_spec(&class.black_spec()).unwrap();
            assert_eq!(entry(class).graph, built, "{class}");
        }
    }

    #[test]
    fn names_roundtrip() {
        for class in BoundaryClass::all() {
            assert_eq!(class.name().parse::<BoundaryClass>().unwrap(), class);
            assert_eq!(class.file_stem().parse::<BoundaryClass>().unwrap(), class);
        }
    }

    #[test]
    fn classes_pairwise_non_isomorphic() {
        let cat = catalog();
        for (i, a) in cat.iter().enumerate() {
            for b in &cat[i + 1..] {
                assert!(!a.graph.is_isomorphic(&b.graph), "{} ~ {}", a.class, b.class);
            }
        }
    }
}
