mod common;

use std::collections::HashSet;

use branchlab::autom::Elem;
use branchlab::groupdef::GroupDef;
use branchlab::hausdorff::{abelian_layer_log_index, log_index_sequence, Ambient};
use branchlab::quotient::{congruence_quotient, interval_subgroups, small_order, DEFAULT_NODE_CAP};
use branchlab::rigidity::{
    check_condition_n, check_condition_star, check_index_equation, cp2_dichotomy_check, filtration_search,
    FiltrationVerdict, Verdict,
};
use branchlab::tree::Vertex;
use num_bigint::BigUint;
use proptest::prelude::*;

use common::{def, ggs, gn};

fn word(def: &GroupDef, letters: &[(usize, bool)]) -> Elem {
    let gens = def.generators();
    letters.iter().fold(Elem::identity(def.automaton()), |acc, &(i, inv)| {
        let g = &gens[i % gens.len()].1;
        acc.compose(&if inv { g.invert() } else { g.clone() })
    })
}

fn letters() -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0usize..8, any::<bool>()), 0..16)
}

fn groups() -> Vec<GroupDef> {
    vec![def("grigorchuk"), def("basilica"), def("bsv"), ggs()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn truncation_is_a_homomorphism(which in 0usize..4, a in letters(), b in letters()) {
        let d = &groups()[which];
        let depth = if d.shape().regular_arity() == Some(2) { 5 } else { 2 };
        let (g, h) = (word(d, &a), word(d, &b));
        let (tg, th) = (g.truncate(depth).unwrap().perm, h.truncate(depth).unwrap().perm);
        prop_assert_eq!(g.compose(&h).truncate(depth).unwrap().perm, tg.mul(&th));
        prop_assert_eq!(g.invert().truncate(depth).unwrap().perm, tg.inverse());
        prop_assert!(g.compose(&g.invert()).truncate(depth).unwrap().perm.is_identity());
    }

    #[test]
    fn truncation_matches_vertex_action(which in 0usize..4, a in letters()) {
        let d = &groups()[which];
        let arity = d.shape().regular_arity().unwrap() as u32;
        let depth = if arity == 2 { 4 } else { 2 };
        let g = word(d, &a);
        prop_assert_eq!(g.truncate(depth).unwrap().perm.images().to_vec(), common::level_images(&g, arity, depth));
    }

    #[test]
    fn section_law(which in 0usize..4, a in letters(), v in prop::collection::vec(1u32..6, 0..3), u in prop::collection::vec(1u32..6, 0..3)) {
        let d = &groups()[which];
        let arity = d.shape().regular_arity().unwrap() as u32;
        let v = Vertex::new(v.into_iter().map(|x| (x - 1) % arity + 1).collect());
        let u = Vertex::new(u.into_iter().map(|x| (x - 1) % arity + 1).collect());
        let g = word(d, &a);
        let lhs = g.apply(&v.concat(&u)).unwrap();
        let rhs = g.apply(&v).unwrap().concat(&g.section(&v).unwrap().apply(&u).unwrap());
        prop_assert_eq!(lhs, rhs);
        // Sections of a product: (gh)|_v = g|_v h|_{v^g}.
        let h = word(d, &a.iter().rev().copied().collect::<Vec<_>>());
        let left = g.compose(&h).section(&v).unwrap();
        let right = g.section(&v).unwrap().compose(&h.section(&g.apply(&v).unwrap()).unwrap());
        prop_assert!(left.eq_at_depth(&right, 3).unwrap());
    }

    #[test]
    fn index_equation_matches_grid(p in prop::sample::select(vec![2u64, 3, 5, 7]), l in 1u32..5, budget in 0u64..12) {
        let r = check_index_equation(p, l, budget).unwrap();
        let mut grid = Vec::new();
        for ell in 0..l {
            for k in 1..=budget + 1 {
                let v = ell as u64 + k * p.pow(l - ell);
                if v <= budget {
                    grid.push((k, ell));
                }
            }
        }
        grid.sort_by_key(|&(k, ell)| (ell, k));
        prop_assert_eq!(&r.solutions, &grid);
        prop_assert_eq!(r.minimum, l as u64 - 1 + p);
        prop_assert_eq!(r.grid_minimum, r.minimum);
    }
}

#[test]
fn orbit_stabilizer_on_zoo_quotients() {
    let cases = [(def("grigorchuk"), 4), (def("basilica"), 4), (def("bsv"), 4), (def("odometer"), 4), (ggs(), 2), (gn(), 2)];
    for (d, depth) in cases {
        let q = congruence_quotient(&d, depth).unwrap();
        let gens = common::generator_images(&d, depth);
        let arity = q.levels().arity(0) as u32;
        for k in 1..=depth {
            for v in common::level(arity, k) {
                let orbit = q.orbit(&v).unwrap();
                let st = q.stabilizer(&v).unwrap();
                assert_eq!(BigUint::from(orbit.len()) * st.order(), q.order(), "{} {v}", d.source());
                let pt = q.levels().point_of(&v).unwrap();
                assert!(st.gens().iter().all(|g| q.levels().image(g, pt) == pt));
                if k == depth {
                    let idx = v.word().iter().fold(0u32, |acc, &x| acc * arity + (x - 1));
                    assert_eq!(common::orbit(&gens, idx).len(), orbit.len());
                }
            }
        }
    }
}

/// Every subgroup above `st(w)` is `{g : w^g in w^L}`; checked against brute force on
/// all quotients of order at most 512.
#[test]
fn orbit_determines_overgroup() {
    let cases = [(def("grigorchuk"), 3), (def("basilica"), 3), (def("bsv"), 3), (def("odometer"), 4), (gn(), 2)];
    for (d, depth) in cases {
        let q = congruence_quotient(&d, depth).unwrap();
        assert!(small_order(&q).is_some_and(|n| n <= 512));
        let degree = q.levels().degree();
        let all = common::closure(&common::generator_images(&d, depth), degree, 512).unwrap();
        let arity = q.levels().arity(0) as u32;
        for k in 1..=depth {
            for w in common::level(arity, k) {
                let st = q.stabilizer(&w).unwrap();
                let pt = q.levels().point_of(&w).unwrap();
                for m in interval_subgroups(&q, &st, &w, usize::MAX, DEFAULT_NODE_CAP).unwrap() {
                    let gens: Vec<Vec<u32>> = m.group.gens().iter().map(|g| g.images().to_vec()).collect();
                    let members = common::closure(&gens, degree, 512).unwrap();
                    let block: HashSet<u32> = m.block.iter().copied().collect();
                    let by_orbit: HashSet<Vec<u32>> =
                        all.iter().filter(|g| block.contains(&point_image(g, pt, &q))).cloned().collect();
                    assert_eq!(members, by_orbit, "{} w = {w} block {:?} gens {:?}", d.source(), m.block, gens);
                }
            }
        }
    }
}

/// Image of the engine point `pt` under an oracle element on the bottom level.
fn point_image(img: &[u32], pt: u32, q: &branchlab::quotient::Quotient) -> u32 {
    let lv = q.levels();
    let (k, r) = lv.locate(pt);
    let b = lv.block(k);
    lv.point(k, img[r * b] as usize / b)
}

#[test]
fn condition_n_routes_agree() {
    for (d, depth) in [(def("grigorchuk"), 3), (def("basilica"), 3), (ggs(), 2)] {
        let r = check_condition_n(&d, depth).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("routes agree")), "{}: {:?}", d.source(), r.notes);
    }
}

#[test]
fn index_algorithms_agree() {
    for (d, max) in [(def("grigorchuk"), 5), (def("basilica"), 5), (def("bsv"), 5), (ggs(), 3), (gn(), 3)] {
        let seq = log_index_sequence(&d, max, Ambient::WreathCyclic).unwrap().exact_values().unwrap();
        for n in 1..=max {
            let r = abelian_layer_log_index(&d, n).unwrap();
            assert!(!r.capped, "{} layer {n} capped", d.source());
            assert_eq!(seq[n] - seq[n - 1], r.rank as u64, "{} layer {n}", d.source());
        }
    }
}

/// Condition (*) and (N) to depth `D` leave no refuting filtration at depth `D - 1`.
#[test]
fn star_and_n_imply_consistent_filtrations() {
    for (d, depth) in [(def("grigorchuk"), 3), (ggs(), 3)] {
        assert_eq!(check_condition_star(&d, depth).unwrap().verdict, Verdict::HoldsToDepth);
        assert_eq!(check_condition_n(&d, depth).unwrap().verdict, Verdict::HoldsToDepth);
        let arity = d.shape().regular_arity().unwrap() as u32;
        for k in 1..depth {
            let w = Vertex::new(vec![1; k]);
            let max = (arity as usize).pow(k as u32);
            let r = filtration_search(&d, &w, depth - 1, max, DEFAULT_NODE_CAP).unwrap();
            assert_eq!(r.verdict, FiltrationVerdict::ConsistentWithRigidityToDepth, "{} w = {w}", d.source());
        }
    }
}

#[test]
fn filtration_counts_match_exhaustive_scan() {
    for (d, w, depth, max) in [(def("grigorchuk"), "1.1", 2, 4), (def("bsv"), "1.2", 3, 8), (gn(), "1.1", 2, 25)] {
        let r = filtration_search(&d, &w.parse().unwrap(), depth, max, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(r.exhaustive_count, Some(r.members.len()), "{}", d.source());
    }
}

#[test]
fn seeded_sampling_is_deterministic() {
    let a = serde_json::to_string(&cp2_dichotomy_check(&def("bsv"), 5, 40, 11).unwrap()).unwrap();
    let b = serde_json::to_string(&cp2_dichotomy_check(&def("bsv"), 5, 40, 11).unwrap()).unwrap();
    assert_eq!(a, b);
}
