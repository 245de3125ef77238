use proptest::prelude::*;
use tensor_sde::colored_graph::{catalog, classify, BoundaryClass, ColoredGraph, Edge, Kind, Parity, Vertex};

fn class_of(g: &ColoredGraph) -> BoundaryClass {
    classify(g).unwrap().class().expect("catalog member")
}

fn graph(class: BoundaryClass) -> ColoredGraph {
    ColoredGraph::from_black_spec(&class.black_spec()).unwrap()
}

#[test]
fn pillow_swaps() {
    let v1 = graph(BoundaryClass::V(1));
    assert_eq!(class_of(&v1.swap(1, 0, 1).unwrap()), BoundaryClass::MM);
    assert_eq!(class_of(&v1.swap(2, 0, 1).unwrap()), BoundaryClass::V(3));
    assert_eq!(class_of(&v1.swap(3, 0, 1).unwrap()), BoundaryClass::V(2));
}

#[test]
fn automorphism_orders() {
    let expect = |c: BoundaryClass| match c {
        BoundaryClass::M => 1,
        BoundaryClass::V(_) | BoundaryClass::MM => 2,
        BoundaryClass::G(_) => 3,
        _ => 0,
    };
    for e in catalog() {
        let want = expect(e.class);
        if want > 0 {
            assert_eq!(e.graph.count_automorphisms(), want, "{}", e.class);
        }
    }
    // three identical melons permute freely; fixing colors leaves K only
    // its cyclic rotations
    assert_eq!(graph(BoundaryClass::MMM).count_automorphisms(), 6);
    assert_eq!(graph(BoundaryClass::K).count_automorphisms(), 3);
}

#[test]
fn catalog_invariants() {
    for e in catalog() {
        let want_b = match e.class {
            BoundaryClass::MM | BoundaryClass::MV(_) => 2,
            BoundaryClass::MMM => 3,
            _ => 1,
        };
        assert_eq!(e.components, want_b, "{}", e.class);
        let want_g = u32::from(e.class == BoundaryClass::K);
        assert_eq!(e.genus, want_g, "{}", e.class);
        assert_eq!(e.vertex_count, 2 * e.class.k());
    }
}

#[test]
fn complete_bipartite_is_k() {
    // every white meets every black, one color per pair in Latin-square order
    let g = ColoredGraph::from_black_spec(&[[2, 1, 0], [0, 2, 1], [1, 0, 2]]).unwrap();
    assert_eq!(class_of(&g), BoundaryClass::K);
}

#[test]
fn tadpole_boundary_is_melon() {
    // one V_1 vertex, nodes W1 B1 W2 B2; external W1 and B2 after closing
    // B1 with W2 by a propagator
    let v = |id, parity, kind| Vertex { id, parity, kind };
    let verts = vec![
        v(0, Parity::White, Kind::Internal),
        v(1, Parity::Black, Kind::Internal),
        v(2, Parity::White, Kind::Internal),
        v(3, Parity::Black, Kind::Internal),
        v(4, Parity::Black, Kind::External),
        v(5, Parity::White, Kind::External),
    ];
    let e = |u, v, color| Edge { u, v, color };
    let edges = vec![
        e(0, 1, 2),
        e(0, 1, 3),
        e(0, 3, 1),
        e(2, 1, 1),
        e(2, 3, 2),
        e(2, 3, 3),
        e(2, 1, 0),
        e(0, 4, 0),
        e(5, 3, 0),
    ];
    let g = ColoredGraph::new(3, verts, edges).unwrap();
    assert_eq!(class_of(&g.boundary().unwrap()), BoundaryClass::M);
}

#[test]
fn open_vertex_boundary_is_its_pattern() {
    // V_1 vertex with four external legs attached by propagators
    let v = |id, parity, kind| Vertex { id, parity, kind };
    let mut verts = vec![
        v(0, Parity::White, Kind::Internal),
        v(1, Parity::Black, Kind::Internal),
        v(2, Parity::White, Kind::Internal),
        v(3, Parity::Black, Kind::Internal),
    ];
    verts.push(v(4, Parity::Black, Kind::External));
    verts.push(v(5, Parity::White, Kind::External));
    verts.push(v(6, Parity::Black, Kind::External));
    verts.push(v(7, Parity::White, Kind::External));
    let e = |u, v, color| Edge { u, v, color };
    let edges = vec![
        e(0, 1, 2),
        e(0, 1, 3),
        e(0, 3, 1),
        e(2, 1, 1),
        e(2, 3, 2),
        e(2, 3, 3),
        e(0, 4, 0),
        e(5, 1, 0),
        e(2, 6, 0),
        e(7, 3, 0),
    ];
    let g = ColoredGraph::new(3, verts, edges).unwrap();
    assert!(matches!(class_of(&g.boundary().unwrap()), BoundaryClass::V(1)));
}

#[test]
fn catalog_closed_under_swaps() {
    for e in catalog() {
        let whites = e.graph.whites();
        for c in 1..=3 {
            for (i, &a) in whites.iter().enumerate() {
                for &b in &whites[i + 1..] {
                    let (ia, ib) = (e.graph.vertices()[a].id, e.graph.vertices()[b].id);
                    let s = e.graph.swap(c, ia, ib).unwrap();
                    assert!(classify(&s).unwrap().class().is_some(), "{} swap {c}", e.class);
                    assert_eq!(s.swap(c, ia, ib).unwrap(), e.graph, "{} involution", e.class);
                    let db = s.connected_components() as i64 - e.components as i64;
                    assert!(db.abs() <= 1);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn swap_is_involution_and_keeps_size(idx in 0usize..16, color in 1usize..=3, i in 0usize..3, j in 0usize..3) {
        let e = &catalog()[idx];
        let k = e.class.k();
        prop_assume!(i < k && j < k && i != j);
        let s = e.graph.swap(color, i, j).unwrap();
        prop_assert_eq!(s.vertex_count(), e.vertex_count);
        prop_assert!(s.check_boundary().is_ok());
        prop_assert_eq!(s.swap(color, i, j).unwrap(), e.graph.clone());
    }

    #[test]
    fn relabeling_colors_preserves_classification(idx in 0usize..16, perm in 0usize..6) {
        let perms = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
        let p = perms[perm];
        let e = &catalog()[idx];
        let edges = e.graph.edges().iter().map(|x| Edge { color: p[x.color - 1], ..*x }).collect();
        let g = ColoredGraph::new(3, e.graph.vertices().to_vec(), edges).unwrap();
        let c = classify(&g).unwrap();
        prop_assert!(c.class().is_some());
        prop_assert_eq!(g.genus().unwrap(), e.genus);
        prop_assert_eq!(g.count_automorphisms(), e.graph.count_automorphisms());
    }
}
