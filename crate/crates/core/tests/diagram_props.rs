use proptest::prelude::*;

use qualgebra::diagram::{builtin_diagram, in_degrees, well_orient, BUILTIN_DIAGRAMS};
use qualgebra::moves::{all_fixtures, apply_move, find_sites};
use qualgebra::{AbstractGraph, Diagram, Direction, MoveId};

#[test]
fn fixtures_are_valid_with_matching_boundaries() {
    let fx = all_fixtures();
    assert_eq!(fx.len(), 10);
    for f in fx {
        f.lhs.validate().unwrap();
        f.rhs.validate().unwrap();
        // boundary points correspond by position; arc names differ between sides
        let (l, r) = (f.lhs.boundary.unwrap(), f.rhs.boundary.unwrap());
        assert_eq!((l.inputs.len(), l.outputs.len()), (r.inputs.len(), r.outputs.len()));
    }
}

#[test]
fn insertion_then_removal_restores_the_diagram() {
    let mut trips = 0;
    for name in BUILTIN_DIAGRAMS {
        let d = builtin_diagram(name).unwrap();
        for id in MoveId::ALL {
            for site in find_sites(&d, id, Direction::Insert) {
                let e = apply_move(&d, id, Direction::Insert, &site).unwrap();
                let restored = find_sites(&e, id, Direction::Remove)
                    .iter()
                    .filter_map(|s| apply_move(&e, id, Direction::Remove, s).ok())
                    .any(|back| back.same_up_to_order(&d));
                assert!(restored, "{name}: {id} at {site:?}");
                trips += 1;
            }
        }
    }
    assert!(trips > 50);
}

#[test]
fn json_round_trip_of_builtins() {
    for name in BUILTIN_DIAGRAMS {
        let d = builtin_diagram(name).unwrap();
        assert_eq!(Diagram::from_json(&d.to_json()).unwrap(), d);
    }
}

/// Random 3-regular multigraph on `2k` vertices by pairing half-edges.
fn cubic_graph(k: usize, pairing: &[usize]) -> AbstractGraph {
    let n = 2 * k;
    let stubs: Vec<usize> = pairing.iter().map(|&i| i / 3).collect();
    let edges = stubs.chunks(2).map(|c| (c[0], c[1])).collect();
    AbstractGraph { vertices: n, edges }
}

proptest! {
    #[test]
    fn well_orientation_has_no_sources_or_sinks(
        (k, pairing) in (1usize..=5).prop_flat_map(|k| (Just(k), Just((0..6 * k).collect::<Vec<usize>>()).prop_shuffle()))
    ) {
        let g = cubic_graph(k, &pairing);
        let o = well_orient(&g).unwrap();
        prop_assert_eq!(o.len(), g.edges.len());
        for (&(u, v), &(t, h)) in g.edges.iter().zip(&o) {
            prop_assert!((t, h) == (u, v) || (t, h) == (v, u));
        }
        for d in in_degrees(g.vertices, &o) {
            prop_assert!(d == 1 || d == 2);
        }
    }
}

#[test]
fn non_trivalent_graphs_are_rejected() {
    let g = AbstractGraph { vertices: 2, edges: vec![(0, 1), (0, 1)] };
    assert!(well_orient(&g).is_err());
}
