use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qualgebra::algebra::squandle_of;
use qualgebra::builtins::{builtin_structure, builtin_structure_names, p_family, P, Q, S};
use qualgebra::cohomology::{coboundary_generators, cocycle_basis, is_cocycle, Lambda};
use qualgebra::coloring::{count_colorings, count_isosceles, enumerate_colorings, modes_for};
use qualgebra::diagram::{builtin_diagram, BUILTIN_DIAGRAMS};
use qualgebra::invariants::{weight, weight_multiset_in};
use qualgebra::moves::random_move;
use qualgebra::{CocyclePair, Diagram, Elem, Kind, Mode, Structure};

fn vertex_diagrams() -> Vec<(&'static str, Diagram)> {
    BUILTIN_DIAGRAMS.iter().map(|n| (*n, builtin_diagram(n).unwrap())).collect()
}

fn qualgebras() -> Vec<(String, Structure)> {
    builtin_structure_names()
        .into_iter()
        .map(|n| {
            let s = builtin_structure(&n).unwrap();
            (n, s)
        })
        .filter(|(_, s)| s.kind() == Kind::Qualgebra)
        .collect()
}

#[test]
fn isosceles_colorings_are_qualgebra_colorings() {
    for (name, s) in qualgebras() {
        let q = s.as_qualgebra().unwrap();
        for (dn, d) in vertex_diagrams() {
            let iso = count_isosceles(q, &d).unwrap();
            let all = count_colorings(&s, &d, Mode::Qualgebra).unwrap();
            assert!(iso <= all, "{name} {dn}");
            if d.vertices.is_empty() {
                assert_eq!(iso, all, "{name} {dn}");
            }
        }
    }
}

#[test]
fn isosceles_counts_only_see_squares() {
    for (name, s) in qualgebras() {
        let q = s.as_qualgebra().unwrap();
        let sq = Structure::Squandle(squandle_of(q));
        for (dn, d) in vertex_diagrams() {
            assert_eq!(
                count_colorings(&sq, &d, Mode::Squandle).unwrap(),
                count_isosceles(q, &d).unwrap(),
                "{name} {dn}"
            );
        }
    }
}

#[test]
fn theta_kt_has_diagonal_colorings() {
    let d = builtin_diagram("theta_kt").unwrap();
    for (name, s) in qualgebras() {
        let cs = enumerate_colorings(&s, &d, Mode::Isosceles, None).unwrap();
        for q in 0..s.n() {
            let diagonal = cs.iter().any(|c| {
                d.vertices.iter().all(|v| {
                    let (l, r, _) = v.legs();
                    c.color(l) == Some(q) && c.color(r) == Some(q)
                })
            });
            assert!(diagonal, "{name}: no diagonal coloring for {q}");
        }
    }
}

fn lambda_only(n: usize, on: impl Fn(Elem, Elem) -> bool) -> CocyclePair {
    let mut c = CocyclePair::zero(Kind::Qualgebra, n);
    let table = (0..n).map(|a| (0..n).map(|b| i64::from(on(a, b))).collect()).collect();
    c.lambda = Some(Lambda::Binary(table));
    c
}

/// Unzips minus zips whose co-oriented arcs carry colors accepted by `on`.
fn direct_count(d: &Diagram, c: &qualgebra::Coloring, on: &dyn Fn(Elem, Elem) -> bool) -> i128 {
    d.vertices
        .iter()
        .map(|v| {
            let (l, r, _) = v.legs();
            let hit = on(c.color(l).unwrap(), c.color(r).unwrap());
            match (hit, v.is_zip()) {
                (false, _) => 0,
                (true, true) => -1,
                (true, false) => 1,
            }
        })
        .sum()
}

#[test]
fn generator_weights_count_vertices() {
    let pair = |x: Elem, y: Elem| move |a: Elem, b: Elem| (a, b) == (x, y) || (a, b) == (y, x);
    let readings: Vec<(&str, Box<dyn Fn(Elem, Elem) -> bool>)> = vec![
        ("q,p", Box::new(pair(P, Q))),
        ("q,s", Box::new(move |a, b| pair(S, P)(a, b) || pair(S, Q)(a, b))),
        ("q,q", Box::new(|a, b| a == b && (a == P || a == Q))),
        ("s,s", Box::new(|a, b| a == S && b == S)),
    ];
    for (name, p) in p_family() {
        let s = Structure::Qualgebra(p);
        for (label, on) in &readings {
            let cp = lambda_only(4, on);
            assert!(is_cocycle(&s, &cp).unwrap(), "{name} {label}");
            for (_, d) in vertex_diagrams() {
                for c in enumerate_colorings(&s, &d, Mode::Qualgebra, None).unwrap() {
                    assert_eq!(weight(&d, &c, &cp).unwrap(), direct_count(&d, &c, on.as_ref()));
                }
            }
        }
    }
}

fn combination(gens: &[CocyclePair], coeffs: &[i64], kind: Kind, n: usize) -> CocyclePair {
    gens.iter()
        .zip(coeffs)
        .fold(CocyclePair::zero(kind, n), |acc, (g, &k)| acc.checked_add(&g.scaled(k).unwrap()).unwrap())
}

fn small_cocycle_structures() -> Vec<Structure> {
    builtin_structure_names()
        .into_iter()
        .map(|n| builtin_structure(&n).unwrap())
        .filter(|s| s.n() <= 12 && s.kind() != Kind::Quandle)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_depend_only_on_the_class(which in any::<prop::sample::Index>(), coeffs in prop::collection::vec(-3i64..=3, 40)) {
        let pool = small_cocycle_structures();
        let s = &pool[which.index(pool.len())];
        let basis = cocycle_basis(s).unwrap();
        let cob = coboundary_generators(s);
        let cp = combination(&basis, &coeffs, s.kind(), s.n());
        let shifted = cp.checked_add(&combination(&cob, &coeffs[basis.len().min(20)..], s.kind(), s.n())).unwrap();
        for (_, d) in vertex_diagrams() {
            for mode in modes_for(s) {
                let a = weight_multiset_in(s, &cp, &d, mode).unwrap();
                let b = weight_multiset_in(s, &shifted, &d, mode).unwrap();
                prop_assert_eq!(&a, &b);
                prop_assert_eq!(a.total(), count_colorings(s, &d, mode).unwrap());
            }
        }
    }

    #[test]
    fn weights_ignore_arc_names(which in any::<prop::sample::Index>(), coeffs in prop::collection::vec(-3i64..=3, 20)) {
        let pool = small_cocycle_structures();
        let s = &pool[which.index(pool.len())];
        let cp = combination(&cocycle_basis(s).unwrap(), &coeffs, s.kind(), s.n());
        for (_, d) in vertex_diagrams() {
            let mut renamed = d.clone();
            renamed.rename_arcs(|a| format!("z_{a}"));
            for mode in modes_for(s) {
                prop_assert_eq!(
                    weight_multiset_in(s, &cp, &d, mode).unwrap(),
                    weight_multiset_in(s, &cp, &renamed, mode).unwrap()
                );
            }
        }
    }

    #[test]
    fn random_moves_keep_counts_and_weights(seed in any::<u64>(), which in any::<prop::sample::Index>(), dn in 0usize..6) {
        let pool = small_cocycle_structures();
        let s = &pool[which.index(pool.len())];
        let basis = cocycle_basis(s).unwrap();
        let coeffs: Vec<i64> = (0..basis.len() as i64).map(|i| (seed as i64).wrapping_add(i) % 3).collect();
        let cp = combination(&basis, &coeffs, s.kind(), s.n());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d0 = builtin_diagram(BUILTIN_DIAGRAMS[dn]).unwrap();
        let mut d = d0.clone();
        for _ in 0..5 {
            if let Some((next, _)) = random_move(&d, &mut rng, true) {
                d = next;
            }
        }
        for mode in modes_for(s) {
            prop_assert_eq!(count_colorings(s, &d0, mode).unwrap(), count_colorings(s, &d, mode).unwrap());
            prop_assert_eq!(weight_multiset_in(s, &cp, &d0, mode).unwrap(), weight_multiset_in(s, &cp, &d, mode).unwrap());
        }
    }
}
