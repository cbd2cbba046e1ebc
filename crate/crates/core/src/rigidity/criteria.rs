use std::collections::HashMap;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{children, level_orbit_reps, Criterion, CriterionReport, Verdict, Witness};
use crate::autom::Elem;
use crate::error::{Error, Result};
use crate::groupdef::{is_prime, GroupDef};
use crate::perm::{enumerate_group, orbit, Perm};
use crate::quotient::{congruence_quotient, is_level_transitive, Quotient, SubgroupHandle};
use crate::tree::Vertex;

const ONE_SIDED: &str = "checked on G/St_G(depth) only; a failure lifts to G, success is evidence up to this depth";

fn require_depth(depth: usize, min: usize, what: &str) -> Result<()> {
    if depth < min {
        return Err(Error::Precondition(format!("{what} needs depth >= {min}, got {depth}")));
    }
    Ok(())
}

/// Permutations induced on the children of `v` by the generators of `h`.
fn child_perms(q: &Quotient, h: &SubgroupHandle, v: &Vertex) -> Result<Vec<Perm>> {
    let lv = q.levels();
    let k = v.level();
    let a = lv.arity(k);
    let base = lv.rank_of(v)? * a;
    h.gens()
        .iter()
        .map(|g| Perm::from_images((0..a).map(|c| (lv.image_rank(g, k + 1, base + c) - base) as u32).collect()))
        .collect()
}

/// `None` when `st(v)` acts on the children of `v` as a transitive cyclic group
/// of prime order, else the reason it does not.
fn star_failure(q: &Quotient, v: &Vertex) -> Result<Option<String>> {
    let st = q.stabilizer(v)?;
    let a = q.levels().arity(v.level());
    let perms = child_perms(q, &st, v)?;
    let orbit_len = orbit(&perms, 0).len();
    if orbit_len != a {
        return Ok(Some(format!("not transitive on the {a} children (orbit of size {orbit_len})")));
    }
    if !is_prime(a as u64) {
        return Ok(Some(format!("transitive on {a} children, so its order is not prime")));
    }
    match enumerate_group(&perms, a, a) {
        Some(els) if els.len() == a => Ok(None),
        _ => Ok(Some(format!("transitive on {a} children but of order greater than {a}"))),
    }
}

/// Condition (*): each `st(v)` acts on the children of `v` as a cyclic group of prime order.
pub fn check_condition_star(def: &GroupDef, depth: usize) -> Result<CriterionReport> {
    require_depth(depth, 2, "condition (*)")?;
    let q = congruence_quotient(def, depth)?;
    let mut rep = CriterionReport::new(Criterion::Star, def.source(), depth, ONE_SIDED);
    rep.notes.push("one vertex per orbit is checked; the condition is invariant under conjugation".into());
    for k in 0..depth {
        for v in level_orbit_reps(&q, k) {
            rep.checked += 1;
            if let Some(reason) = star_failure(&q, &v)? {
                rep.fail(Witness { vertices: vec![v.to_string()], elements: Vec::new(), note: reason });
                return Ok(rep);
            }
        }
    }
    Ok(rep)
}

fn moves(q: &Quotient, h: &SubgroupHandle, v: &Vertex) -> Result<bool> {
    let pt = q.levels().point_of(v)?;
    Ok(h.gens().iter().any(|g| q.levels().image(g, pt) != pt))
}

/// Condition (**): for incomparable `u`, `u'` and a proper descendant `v` of `u`,
/// some element fixing `u'` moves `v`.
///
/// Moving `v` moves all its descendants, so only grandchildren of the meet of
/// `v` and `u'` need checking, with `u` the child of the meet above `v`.
pub fn check_condition_doublestar(def: &GroupDef, depth: usize) -> Result<CriterionReport> {
    require_depth(depth, 2, "condition (**)")?;
    let q = congruence_quotient(def, depth)?;
    let lv = q.levels().clone();
    let mut rep = CriterionReport::new(Criterion::DoubleStar, def.source(), depth, ONE_SIDED);
    for k in 1..=depth {
        for u2 in level_orbit_reps(&q, k) {
            let st = q.stabilizer(&u2)?;
            for m_len in 0..k {
                if m_len + 2 > depth {
                    break;
                }
                let meet = u2.prefix(m_len);
                let on_path = u2.prefix(m_len + 1);
                for u in children(&meet, lv.arity(m_len)).filter(|c| *c != on_path) {
                    for v in children(&u, lv.arity(m_len + 1)) {
                        rep.checked += 1;
                        if !moves(&q, &st, &v)? {
                            rep.fail(Witness {
                                vertices: vec![u.to_string(), u2.to_string(), v.to_string()],
                                elements: Vec::new(),
                                note: format!("st({u2}) fixes {v}"),
                            });
                            return Ok(rep);
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Outcome of condition (N) at one chain `v1 -> v2 -> v3`.
struct ChainCheck {
    core_index: BigUint,
    core_route_holds: bool,
    normal_route_holds: bool,
}

fn check_chain(q: &Quotient, v1: &Vertex, v2: &Vertex, v3: &Vertex, p: usize) -> Result<ChainCheck> {
    let st1 = q.stabilizer(v1)?;
    let st2 = q.stabilizer(v2)?;
    let st3 = q.stabilizer(v3)?;
    let core = st3.normal_core_in(&st1)?;
    let core_index = st2.order() / core.order();
    Ok(ChainCheck {
        core_route_holds: core_index > BigUint::from(p),
        normal_route_holds: !st3.is_normal_in(&st1),
        core_index,
    })
}

/// Condition (N) on chains `v1 -> v2 -> v3` of immediate descendants, through
/// the index of the normal core and, independently, through normality.
pub fn check_condition_n(def: &GroupDef, depth: usize) -> Result<CriterionReport> {
    require_depth(depth, 2, "condition (N)")?;
    let q = congruence_quotient(def, depth)?;
    let lv = q.levels().clone();
    let mut rep = CriterionReport::new(Criterion::N, def.source(), depth, ONE_SIDED);
    let mut disagreements = Vec::new();
    let mut vacuous = 0;
    for k in 0..=depth - 2 {
        let (p1, p2) = (lv.arity(k), lv.arity(k + 1));
        for v1 in level_orbit_reps(&q, k) {
            if p1 != p2 {
                rep.checked += 1;
                vacuous += 1;
                continue;
            }
            for v2 in children(&v1, p1) {
                for v3 in children(&v2, p2) {
                    rep.checked += 1;
                    let c = check_chain(&q, &v1, &v2, &v3, p1)?;
                    if c.core_route_holds != c.normal_route_holds {
                        disagreements.push(format!("{v1} -> {v2} -> {v3}"));
                    }
                    if !c.core_route_holds && rep.witness.is_none() {
                        rep.fail(Witness {
                            vertices: vec![v1.to_string(), v2.to_string(), v3.to_string()],
                            elements: Vec::new(),
                            note: format!(
                                "|st({v2}) : Core_st({v1})(st({v3}))| = {} <= {p1}; st({v3}) is {}normal in st({v1})",
                                c.core_index,
                                if c.normal_route_holds { "not " } else { "" }
                            ),
                        });
                    }
                }
            }
        }
    }
    if vacuous > 0 {
        rep.notes.push(format!("{vacuous} chain roots hold because p1 != p2"));
    }
    if disagreements.is_empty() {
        rep.notes.push("core-index and normality routes agree on every chain".into());
    } else {
        rep.notes.push(format!("routes disagree on: {}", disagreements.join(", ")));
    }
    Ok(rep)
}

/// Section at `v` of a bottom-level permutation fixing `v`.
fn section_perm(q: &Quotient, g: &Perm, v: &Vertex) -> Result<Perm> {
    let lv = q.levels();
    let m = lv.block(v.level());
    let base = (lv.rank_of(v)? * m) as u32;
    Perm::from_images((0..m as u32).map(|i| g.image(base + i) - base).collect())
}

/// Level transitivity and surjectivity of `st(v) -> G` at every vertex, up to depth.
pub fn check_fractal(def: &GroupDef, depth: usize) -> Result<CriterionReport> {
    require_depth(depth, 2, "fractality")?;
    let rep = CriterionReport::new(Criterion::Fractal, def.source(), depth, ONE_SIDED);
    if def.is_deleted_view() || def.shape().regular_arity().is_none() {
        return Ok(rep.inapplicable("fractality needs a regular tree".into()));
    }
    let mut rep = rep;
    rep.notes.push("self-similar by construction: sections of states are words in states".into());
    rep.notes.push("fractality does not imply weak branchness".into());
    let q = congruence_quotient(def, depth)?;
    let lv = q.levels().clone();
    for k in 1..=depth {
        rep.checked += 1;
        let size = q.orbit_points(lv.point(k, 0)).len();
        if size != lv.size(k) {
            rep.fail(Witness {
                vertices: vec![lv.vertex(k, 0).to_string()],
                elements: Vec::new(),
                note: format!("level {k} is not a single orbit (orbit of size {size} out of {})", lv.size(k)),
            });
            return Ok(rep);
        }
    }
    let mut targets: HashMap<usize, Quotient> = HashMap::new();
    for k in 1..depth {
        let sub = depth - k;
        if let std::collections::hash_map::Entry::Vacant(e) = targets.entry(sub) {
            e.insert(congruence_quotient(def, sub)?);
        }
        let target = &targets[&sub];
        for v in level_orbit_reps(&q, k) {
            rep.checked += 1;
            let st = q.stabilizer(&v)?;
            let secs = st.gens().iter().map(|g| section_perm(&q, g, &v)).collect::<Result<Vec<_>>>()?;
            let image = SubgroupHandle::new(target.levels().clone(), target.prime(), secs);
            let (have, want) = (image.order(), target.order());
            if have != want || !image.is_subgroup_of(target) {
                rep.fail(Witness {
                    vertices: vec![v.to_string()],
                    elements: Vec::new(),
                    note: format!("sections at {v} generate a group of order {have}, not |G/St_G({sub})| = {want}"),
                });
                return Ok(rep);
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem4Verdict {
    Rigid,
    NotRigid,
    Inapplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem4Report {
    pub group: String,
    pub verdict: Theorem4Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    /// `|G : St_G(2)|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_q2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<String>,
    pub fractal: Verdict,
    pub fractal_depth: usize,
    /// `s_1 = p - 1`, which holds exactly when `|G : St_G(2)| = p^2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s1_is_p_minus_1: Option<bool>,
    /// Generators of the index-`p` subgroup `K >= St_G(2)` that is not a vertex stabilizer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_k: Option<Vec<String>>,
    #[serde(skip)]
    pub witness_handle: Option<SubgroupHandle>,
    pub evidence: Vec<String>,
    pub caveat: String,
}

/// Rigidity on the `p`-adic tree from the structure of `G/St_G(2)`.
///
/// `|G/St_G(2)| > p^2` or a cyclic quotient of order `p^2` give `Rigid` when
/// fractality holds to `fractal_depth`; `C_p x C_p` gives `NotRigid`.
pub fn theorem4_classify(def: &GroupDef, fractal_depth: usize) -> Result<Theorem4Report> {
    let mut rep = Theorem4Report {
        group: def.source().to_string(),
        verdict: Theorem4Verdict::Inapplicable,
        p: None,
        order_q2: None,
        structure: None,
        fractal: Verdict::Inapplicable,
        fractal_depth,
        s1_is_p_minus_1: None,
        witness_k: None,
        witness_handle: None,
        evidence: Vec::new(),
        caveat: "weak branchness is assumed, not checked".into(),
    };
    let Some(p) = def.wreath_prime() else {
        rep.evidence.push("the group does not lie in W_p on the p-adic tree".into());
        return Ok(rep);
    };
    rep.p = Some(p);
    if !is_level_transitive(def, 2)? {
        return Err(Error::Precondition(format!("{} is not level-transitive to depth 2", def.source())));
    }
    let q2 = congruence_quotient(def, 2)?;
    let order = q2.order();
    let p2 = BigUint::from(p * p);
    rep.order_q2 = Some(order.to_string());
    rep.s1_is_p_minus_1 = Some(order == p2);
    if order < p2 {
        return Err(Error::Precondition(format!("|G:St_G(2)| = {order} < p^2 contradicts level transitivity")));
    }
    let fractal = check_fractal(def, fractal_depth)?;
    rep.fractal = fractal.verdict;
    let fractal_ok = fractal.verdict == Verdict::HoldsToDepth;
    if order > p2 {
        rep.structure = Some("order > p^2".into());
        rep.evidence.push(format!("|G:St_G(2)| = {order} > {p2}"));
    } else if q2.exponent(1 << 12)? == p2 {
        rep.structure = Some(format!("C_{p2} (cyclic)"));
        rep.evidence.push(format!("G/St_G(2) is cyclic of order {p2}"));
    } else {
        rep.structure = Some(format!("C_{p} x C_{p}"));
        let x = q2
            .gens()
            .iter()
            .find(|g| q2.levels().image_rank(g, 1, 0) != 0)
            .expect("a level-transitive group moves level 1")
            .clone();
        let k = q2.trivial().closure(&[x]);
        rep.evidence.push(format!("G/St_G(2) is elementary abelian of order {p2}"));
        rep.evidence.push(format!(
            "K = <St_G(2), x> has index {} and moves every non-root vertex to depth 2",
            q2.order() / k.order()
        ));
        rep.witness_k = Some(k.gens().iter().map(|g| g.to_cycle_string()).collect());
        rep.witness_handle = Some(k);
        rep.verdict = Theorem4Verdict::NotRigid;
        return Ok(rep);
    }
    if fractal_ok {
        rep.verdict = Theorem4Verdict::Rigid;
    } else {
        rep.evidence.push(format!("fractality not established to depth {fractal_depth}"));
    }
    Ok(rep)
}

fn word_string(names: &[(usize, bool)], def: &GroupDef) -> String {
    if names.is_empty() {
        return "1".into();
    }
    let gens = def.generators();
    names
        .iter()
        .map(|&(i, inv)| if inv { format!("{}^-1", gens[i].0) } else { gens[i].0.clone() })
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_word(text: &str, def: &GroupDef) -> Result<Elem> {
    let mut g = Elem::identity(def.automaton());
    for tok in text.split_whitespace().filter(|t| *t != "1") {
        let (name, inv) = match tok.strip_suffix("^-1") {
            Some(n) => (n, true),
            None => (tok, false),
        };
        let x = def.generator(name).ok_or_else(|| Error::InvalidParams(format!("unknown generator `{name}`")))?;
        g = g.compose(&if inv { x.invert() } else { x.clone() });
    }
    Ok(g)
}

fn is_full_cycle(g: &Perm) -> bool {
    matches!(g.cycles().as_slice(), [c] if c.len() == g.degree())
}

/// `None` when `g` satisfies the dichotomy at `v`, else the reason it fails.
fn dichotomy_failure(g: &Elem, v: &Vertex, depth: usize) -> Result<Option<String>> {
    let sec = g.section(v)?;
    let d = depth - v.level();
    if sec.truncate(1)?.perm.is_identity() {
        return Ok(None);
    }
    let order2 = sec.truncate(2)?.perm.order();
    let bottom = sec.truncate(d)?.perm;
    if is_full_cycle(&bottom) {
        return Ok(None);
    }
    Ok(Some(format!(
        "section at {v} moves the children, has order {order2} at depth 2, and is not transitive on level {d}"
    )))
}

/// Samples words and checks: a section at a fixed vertex either fixes the
/// children or acts transitively on every level examined.
pub fn cp2_dichotomy_check(def: &GroupDef, depth: usize, samples: usize, seed: u64) -> Result<CriterionReport> {
    require_depth(depth, 2, "the C_{p^2} dichotomy")?;
    let p = def
        .wreath_prime()
        .ok_or_else(|| Error::Precondition(format!("{} does not lie in W_p", def.source())))?;
    let q2 = congruence_quotient(def, 2)?;
    let p2 = BigUint::from(p * p);
    if q2.order() != p2 || q2.exponent(1 << 12)? != p2 {
        return Err(Error::Precondition("G/St_G(2) is not cyclic of order p^2".into()));
    }
    let mut rep = CriterionReport::new(
        Criterion::Cp2,
        def.source(),
        depth,
        "random sample of words; a violation is definitive, absence is evidence",
    );
    rep.notes.push(format!("seed {seed}, {samples} random words plus the identity and each generator"));
    let shape = def.shape();
    let ngens = def.generators().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
    words.extend((0..ngens).map(|i| vec![(i, false)]));
    for _ in 0..samples {
        let len = rng.gen_range(1..=24);
        words.push((0..len).map(|_| (rng.gen_range(0..ngens), rng.gen_bool(0.5))).collect());
    }
    let (mut fixing, mut transitive) = (0usize, 0usize);
    for w in &words {
        let text = word_string(w, def);
        let g = parse_word(&text, def)?;
        for k in 0..=depth - 2 {
            for idx in 0..def.level_count(k)? {
                let v = shape.vertex_at(k, idx)?;
                if g.apply(&v)? != v {
                    continue;
                }
                rep.checked += 1;
                match dichotomy_failure(&g, &v, depth)? {
                    None => {
                        if g.section(&v)?.truncate(1)?.perm.is_identity() {
                            fixing += 1;
                        } else {
                            transitive += 1;
                        }
                    }
                    Some(reason) => {
                        rep.fail(Witness { vertices: vec![v.to_string()], elements: vec![text], note: reason });
                        return Ok(rep);
                    }
                }
            }
        }
    }
    rep.notes.push(format!("{fixing} cases fix the children, {transitive} act transitively"));
    Ok(rep)
}

/// Re-derives the failure recorded in `report`; `true` when it reproduces.
pub fn replay_witness(def: &GroupDef, report: &CriterionReport) -> Result<bool> {
    let Some(w) = &report.witness else { return Ok(false) };
    let vs: Vec<Vertex> = w.vertices.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    let depth = report.depth;
    match report.criterion {
        Criterion::Star => {
            let q = congruence_quotient(def, depth)?;
            Ok(star_failure(&q, &vs[0])?.is_some())
        }
        Criterion::DoubleStar => {
            let q = congruence_quotient(def, depth)?;
            let (u, u2, v) = (&vs[0], &vs[1], &vs[2]);
            Ok(u.incomparable(u2) && u.is_prefix_of(v) && u != v && !moves(&q, &q.stabilizer(u2)?, v)?)
        }
        Criterion::N => {
            let q = congruence_quotient(def, depth)?;
            let p = q.levels().arity(vs[0].level());
            Ok(!check_chain(&q, &vs[0], &vs[1], &vs[2], p)?.core_route_holds)
        }
        Criterion::Fractal => {
            let again = check_fractal(def, depth)?;
            Ok(again.witness.as_ref() == Some(w))
        }
        Criterion::Cp2 => {
            let g = parse_word(&w.elements[0], def)?;
            Ok(g.apply(&vs[0])? == vs[0] && dichotomy_failure(&g, &vs[0], depth)?.is_some())
        }
        Criterion::Theorem4 => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupdef::{parse_group, zoo, ZooParams};

    fn def(name: &str) -> GroupDef {
        zoo(name, &ZooParams::default()).unwrap()
    }

    fn gn() -> GroupDef {
        zoo("gn", &ZooParams { p: Some(5), n: Some(1), ..Default::default() }).unwrap()
    }

    #[test]
    fn star() {
        assert_eq!(check_condition_star(&def("grigorchuk"), 4).unwrap().verdict, Verdict::HoldsToDepth);
        let sym4 = parse_group(
            "tree regular:4\na = perm((1 2)) sections(1,1,1,1)\nb = perm((1 2 3 4)) sections(1,1,1,1)\ngens a b\n",
        )
        .unwrap();
        let r = check_condition_star(&sym4, 2).unwrap();
        assert_eq!(r.verdict, Verdict::FailsWithWitness);
        assert_eq!(r.witness.as_ref().unwrap().vertices, vec!["root".to_string()]);
        assert!(replay_witness(&sym4, &r).unwrap());
    }

    #[test]
    fn doublestar() {
        assert_eq!(check_condition_doublestar(&def("grigorchuk"), 3).unwrap().verdict, Verdict::HoldsToDepth);
        for g in [def("odometer"), gn()] {
            let r = check_condition_doublestar(&g, 2).unwrap();
            assert_eq!(r.verdict, Verdict::FailsWithWitness, "{}", g.source());
            assert!(replay_witness(&g, &r).unwrap());
        }
    }

    #[test]
    fn condition_n() {
        let r = check_condition_n(&def("grigorchuk"), 3).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsToDepth);
        assert!(r.notes.iter().any(|n| n.contains("agree")));
        let r = check_condition_n(&gn(), 2).unwrap();
        assert_eq!(r.verdict, Verdict::FailsWithWitness);
        assert_eq!(r.witness.as_ref().unwrap().vertices[0], "root");
        assert!(replay_witness(&gn(), &r).unwrap());
    }

    #[test]
    fn fractal() {
        for name in ["grigorchuk", "basilica"] {
            assert_eq!(check_fractal(&def(name), 4).unwrap().verdict, Verdict::HoldsToDepth, "{name}");
        }
        assert_eq!(check_fractal(&def("odometer"), 3).unwrap().verdict, Verdict::HoldsToDepth);
    }

    #[test]
    fn theorem4_table() {
        for name in ["grigorchuk", "basilica", "bsv"] {
            assert_eq!(theorem4_classify(&def(name), 4).unwrap().verdict, Theorem4Verdict::Rigid, "{name}");
        }
        let bsv = theorem4_classify(&def("bsv"), 4).unwrap();
        assert!(bsv.structure.unwrap().contains("cyclic"));
        let r = theorem4_classify(&gn(), 3).unwrap();
        assert_eq!(r.verdict, Theorem4Verdict::NotRigid);
        assert_eq!(r.witness_handle.unwrap().order(), BigUint::from(5u32));
    }

    #[test]
    fn cp2() {
        let r = cp2_dichotomy_check(&def("bsv"), 6, 50, 7).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsToDepth);
        assert!(cp2_dichotomy_check(&def("grigorchuk"), 4, 5, 7).is_err());
        let c = def("bsv");
        let g = parse_word("c", &c).unwrap();
        assert_eq!(g.truncate(2).unwrap().perm.order(), BigUint::from(4u32));
        assert!(is_full_cycle(&g.truncate(6).unwrap().perm));
    }
}
