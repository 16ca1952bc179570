use std::f64::consts::PI;

use isodimer::geometry::{
    build_lozenge_with_diagonals, build_square_lattice, build_triangular_lattice, io, validate_isoradial, IsoradialGraph,
    LozengeTiling, TriangularRegion,
};
use isodimer::matching::find_perfect_matching;
use isodimer::Error;
use proptest::prelude::*;

fn honeycomb(cols: usize, rows: usize) -> IsoradialGraph {
    build_triangular_lattice(&TriangularRegion::Hexagons { cols, rows }).unwrap()
}

fn lozenge_diag(cols: usize, rows: usize) -> IsoradialGraph {
    let t = honeycomb(cols, rows);
    let m = find_perfect_matching(&t).unwrap();
    build_lozenge_with_diagonals(&LozengeTiling::from_matching(&t, &m).unwrap()).unwrap()
}

fn angles(g: &IsoradialGraph) -> Vec<f64> {
    (0..g.dual_edges().len()).map(|e| g.rhombus_angle(e).unwrap()).collect()
}

fn face_angle_sums(g: &IsoradialGraph) -> Vec<f64> {
    (0..g.num_faces()).map(|f| g.face_edges(f).iter().map(|&e| g.primal_theta(e)).sum()).collect()
}

#[test]
fn honeycomb_rhombi() {
    let g = honeycomb(4, 3);
    assert!(validate_isoradial(&g).passed);
    for (e, t) in angles(&g).into_iter().enumerate() {
        assert!((t - PI / 3.0).abs() < 1e-12);
        assert!((g.critical_weight(e).unwrap() - 3f64.sqrt()).abs() < 1e-12);
    }
    let interior: Vec<usize> = (0..g.vertices().len()).filter(|&v| g.is_interior_vertex(v)).collect();
    assert!(!interior.is_empty());
    for v in interior {
        assert!((g.dual_face_area(v).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }
    assert!(matches!(g.dual_face_area(g.reference_vertex()), Err(Error::BoundaryVertex(_))));
}

#[test]
fn square_rhombi() {
    let g = build_square_lattice(4, 4).unwrap();
    assert!(validate_isoradial(&g).passed);
    for (e, t) in angles(&g).into_iter().enumerate() {
        assert!((t - PI / 4.0).abs() < 1e-12);
        assert!((g.critical_weight(e).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn lozenge_diagonal_angles() {
    let g = lozenge_diag(3, 3);
    assert!(validate_isoradial(&g).passed);
    let mut seen = [false; 3];
    for t in angles(&g) {
        let k = [PI / 6.0, PI / 3.0, PI / 2.0].iter().position(|a| (t - a).abs() < 1e-12).expect("angle in {pi/6, pi/3, pi/2}");
        seen[k] = true;
    }
    assert_eq!(seen, [true; 3]);
}

#[test]
fn rhombus_angles_around_vertices_close_up() {
    for g in [honeycomb(5, 4), build_square_lattice(5, 5).unwrap(), lozenge_diag(4, 3)] {
        for v in (0..g.vertices().len()).filter(|&v| g.is_interior_vertex(v)) {
            let total: f64 = g.vertex_edges(v).iter().map(|&e| PI - 2.0 * g.primal_theta(e)).sum();
            assert!((total - 2.0 * PI).abs() < 1e-10, "vertex {v}: {total}");
        }
    }
}

#[test]
fn json_round_trip() {
    let g = lozenge_diag(3, 2);
    let text = io::to_json(&g, Some(serde_json::json!({"seed": 4}))).unwrap();
    let first_key = text.lines().nth(1).unwrap().trim();
    assert!(first_key.starts_with("\"header\""));
    let h = io::from_json(&text).unwrap();
    assert_eq!(h.vertices().len(), g.vertices().len());
    assert_eq!(h.dual_edges(), g.dual_edges());
    assert_eq!(angles(&h), angles(&g));
    assert!(validate_isoradial(&h).passed);
}

#[test]
fn validation_flags_a_moved_vertex() {
    let g = honeycomb(3, 3);
    let mut doc = io::GraphDocument::from_graph(&g);
    let v = (0..g.vertices().len()).find(|&v| g.is_interior_vertex(v)).unwrap();
    doc.primal_vertices[v].x += 0.05;
    let moved = doc.to_graph().unwrap();
    let report = validate_isoradial(&moved);
    assert!(!report.passed);
    assert!(!report.faces_with_bad_radius.is_empty());
}

#[test]
fn scaling_keeps_angles() {
    let g = honeycomb(3, 3);
    let eps = 0.125;
    let s = g.scale(eps).unwrap();
    assert!((s.mesh() - eps * g.mesh()).abs() < 1e-15);
    assert_eq!(angles(&s), angles(&g));
    assert!(validate_isoradial(&s).passed);
    let v = (0..g.vertices().len()).find(|&v| g.is_interior_vertex(v)).unwrap();
    assert!((s.dual_face_area(v).unwrap() - eps * eps * g.dual_face_area(v).unwrap()).abs() < 1e-14);
    assert!(g.scale(0.0).is_err());
}

#[test]
fn degenerate_regions_are_rejected() {
    for r in [
        TriangularRegion::Hexagons { cols: 0, rows: 3 },
        TriangularRegion::Parallelogram { width: 2, height: 0 },
        TriangularRegion::FlatHexagon { radius: 0 },
        TriangularRegion::Triangles(vec![]),
    ] {
        assert!(matches!(build_triangular_lattice(&r), Err(Error::DegenerateExtent(_))));
    }
    assert!(build_square_lattice(0, 2).is_err());
}

#[test]
fn flat_hexagon_is_symmetric() {
    let g = build_triangular_lattice(&TriangularRegion::FlatHexagon { radius: 3 }).unwrap();
    assert!(validate_isoradial(&g).passed);
    let coords = g.lattice_coords().unwrap();
    for &[i, j] in coords {
        assert!(g.vertex_at([-i - j, j]).is_some(), "mirror of [{i},{j}] missing");
        assert!(g.vertex_at([-i, -j]).is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hexagon_arrays_are_isoradial(cols in 1usize..6, rows in 1usize..5) {
        let g = honeycomb(cols, rows);
        prop_assert!(validate_isoradial(&g).passed);
        for s in face_angle_sums(&g) {
            prop_assert!((s - PI).abs() < 1e-10);
        }
        // a disc: V - E + F = 1
        let euler = g.vertices().len() as i64 - g.edges().len() as i64 + g.num_faces() as i64;
        prop_assert_eq!(euler, 1);
        prop_assert_eq!(g.whites().len(), g.blacks().len());
    }

    #[test]
    fn lozenge_faces_close_up(cols in 1usize..4, rows in 1usize..4) {
        let g = lozenge_diag(cols, rows);
        prop_assert!(validate_isoradial(&g).passed);
        for s in face_angle_sums(&g) {
            prop_assert!((s - PI).abs() < 1e-10);
        }
    }

    #[test]
    fn square_rectangles(w in 1usize..7, h in 1usize..7) {
        let g = build_square_lattice(w, h).unwrap();
        prop_assert!(validate_isoradial(&g).passed);
        prop_assert_eq!(g.num_faces(), w * h);
    }
}
