//! Checks specific to the groups `G_n`: the index equation and the divisibility
//! of layer indices for subgroups above a vertex stabilizer.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupdef::{zoo, GnParams, ZooParams};
use crate::perm::Perm;
use crate::quotient::{congruence_quotient, exact_log, Quotient, SubgroupHandle};
use crate::tree::Vertex;

/// Largest degree accepted by [`lemma63_sample_check`].
pub const LEMMA63_DEGREE_CAP: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexEquationReport {
    pub p: u64,
    pub l: u32,
    pub budget_log: u64,
    /// `(k, ell)` with `k >= 1`, `0 <= ell <= l-1` and `ell + k p^(l-ell) <= budget_log`.
    pub solutions: Vec<(u64, u32)>,
    pub minimum: u64,
    pub minimum_at: (u64, u32),
    /// `l - 1 + p`.
    pub expected_minimum: u64,
    /// Minimum over the full grid `1 <= k <= p^l`.
    pub grid_minimum: u64,
    pub agrees: bool,
}

/// Solutions of `ell + k p^(l - ell) <= budget_log` and the minimum of the left side.
pub fn check_index_equation(p: u64, l: u32, budget_log: u64) -> Result<IndexEquationReport> {
    if p < 2 || l < 1 {
        return Err(Error::InvalidParams(format!("need p >= 2 and l >= 1, got p = {p}, l = {l}")));
    }
    let pow = |e: u32| p.checked_pow(e).ok_or_else(|| Error::InvalidParams(format!("{p}^{e} overflows")));
    let value = |k: u64, ell: u32| -> Result<u64> {
        let step = pow(l - ell)?;
        k.checked_mul(step)
            .and_then(|x| x.checked_add(ell as u64))
            .ok_or_else(|| Error::InvalidParams("value overflows".into()))
    };
    let mut solutions = Vec::new();
    for ell in 0..l {
        let mut k = 1;
        while value(k, ell)? <= budget_log {
            solutions.push((k, ell));
            k += 1;
        }
    }
    let mut minimum = (u64::MAX, (0, 0));
    for ell in 0..l {
        let v = value(1, ell)?;
        if v < minimum.0 {
            minimum = (v, (1, ell));
        }
    }
    let mut grid_minimum = u64::MAX;
    for ell in 0..l {
        for k in 1..=pow(l)? {
            grid_minimum = grid_minimum.min(value(k, ell)?);
        }
    }
    let expected = l as u64 - 1 + p;
    Ok(IndexEquationReport {
        p,
        l,
        budget_log,
        solutions,
        minimum: minimum.0,
        minimum_at: minimum.1,
        expected_minimum: expected,
        grid_minimum,
        agrees: minimum.0 == expected && grid_minimum == expected,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma63Sample {
    pub label: String,
    pub log_order: usize,
    /// `log_p |G : H St(t_1)|`.
    pub ell: usize,
    /// `log_p |St(t_1) : H ∩ St(t_1)|`.
    pub lhs: usize,
    /// `p^(l_n - ell)`.
    pub modulus: u64,
    pub k: Option<u64>,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma63Report {
    pub p: u64,
    pub n: usize,
    pub depth: usize,
    pub l_n: u64,
    pub t1: u64,
    pub t2: u64,
    pub w: String,
    pub seed: u64,
    /// `log_p |G_n : St(depth)|`.
    pub log_order: usize,
    pub samples: Vec<Lemma63Sample>,
    pub all_hold: bool,
    pub notes: Vec<String>,
}

fn product(rows: &[Perm], exps: &[u64], id: &Perm) -> Perm {
    rows.iter().zip(exps).fold(id.clone(), |acc, (r, &e)| acc.mul(&r.pow(e as i64)))
}

struct GnSetup {
    p: u64,
    l_n: u64,
    t1: u64,
    t2: u64,
    degree: usize,
    q: Quotient,
    log_order: usize,
    st_t1: SubgroupHandle,
    st_1: Vec<Perm>,
    w: Vertex,
    st_w: SubgroupHandle,
}

impl GnSetup {
    fn new(p: u64, n: usize, depth: usize) -> Result<Self> {
        let params = GnParams::new(p, n)?;
        let l_n = params.l(n).ok_or_else(|| Error::InvalidParams("l_n overflows".into()))?;
        let t1 = params.t(1).ok_or_else(|| Error::InvalidParams("t_1 overflows".into()))?;
        let t2 = params.t(2).ok_or_else(|| Error::InvalidParams("t_2 overflows".into()))?;
        if (depth as u64) < t2 {
            return Err(Error::Precondition(format!("depth {depth} is above t_2 = {t2}")));
        }
        let degree = (p as u128).checked_pow(depth as u32).filter(|&d| d <= LEMMA63_DEGREE_CAP as u128);
        let degree = degree.ok_or_else(|| Error::DegreeLimit {
            degree: format!("{p}^{depth}"),
            limit: LEMMA63_DEGREE_CAP,
        })? as usize;
        let zp = ZooParams { p: Some(p), n: Some(n), e: None, degree_limit: Some(degree) };
        let q = congruence_quotient(&zoo("gn", &zp)?, depth)?;
        let pc = q.pc().ok_or_else(|| Error::NotWreathCyclic("G_n quotient has no layered chain".into()))?;
        let st_t1 = q.level_stabilizer(t1 as usize);
        let w = Vertex::new(vec![1; t2 as usize]);
        let st_w = q.stabilizer(&w)?;
        Ok(GnSetup {
            p,
            l_n,
            t1,
            t2,
            degree,
            log_order: pc.log_order(),
            st_1: pc.level_stabilizer_gens(1),
            q,
            st_t1,
            w,
            st_w,
        })
    }

    fn measure(&self, label: String, h: &SubgroupHandle) -> Lemma63Sample {
        let log = |h: &SubgroupHandle| h.log_order(self.p).expect("a p-group");
        let log_h = log(h);
        let log_hs = log(&h.closure(self.st_t1.gens()));
        let ell = self.log_order - log_hs;
        let lhs = log_hs - log_h;
        let modulus = self.p.pow((self.l_n as usize).saturating_sub(ell) as u32);
        let holds = (lhs as u64).is_multiple_of(modulus);
        Lemma63Sample { label, log_order: log_h, ell, lhs, modulus, k: holds.then(|| lhs as u64 / modulus), holds }
    }
}

/// Samples `st(w) <= H <= St(1)` with `w` on level `t_2` and checks that
/// `log_p |St(t_1) : H ∩ St(t_1)|` is a multiple of `p^(l_n - ell)`.
///
/// Since `H` contains `st(w)`, the index is the same before and after projecting
/// to the subtree at the level-1 vertex above `w`, so the global indices are used.
pub fn lemma63_sample_check(p: u64, n: usize, depth: usize, samples: usize, seed: u64) -> Result<Lemma63Report> {
    let s = GnSetup::new(p, n, depth)?;
    let mut out = vec![s.measure("St(t_1)".into(), &s.st_t1), s.measure("st(w)".into(), &s.st_w)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = s.q.identity();
    for i in 0..samples {
        let extra = rng.gen_range(1..=3);
        let gens: Vec<Perm> = (0..extra)
            .map(|_| {
                let exps: Vec<u64> = s.st_1.iter().map(|_| rng.gen_range(0..p)).collect();
                product(&s.st_1, &exps, &id)
            })
            .collect();
        out.push(s.measure(format!("random #{i} ({extra} extra generators)"), &s.st_w.closure(&gens)));
    }
    let all_hold = out.iter().all(|s| s.holds);
    let mut notes = vec![format!("subgroups sampled between st(w) and St(1); quotient degree {}", s.degree)];
    if !all_hold {
        notes.push("divisibility fails for at least one sample; see augmentation_witness".into());
    }
    Ok(Lemma63Report {
        p,
        n,
        depth,
        l_n: s.l_n,
        t1: s.t1,
        t2: s.t2,
        w: s.w.to_string(),
        seed,
        log_order: s.log_order,
        samples: out,
        all_hold,
        notes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AugmentationWitness {
    pub p: u64,
    pub n: usize,
    pub depth: usize,
    pub l_n: u64,
    pub t1: u64,
    pub t2: u64,
    pub w: String,
    /// `|w^G|`.
    pub orbit_size: usize,
    /// `|w^H|`.
    pub block_size: usize,
    /// Number of translates of `w^H` under `G`.
    pub block_images: usize,
    /// Whether the translates of `w^H` partition `w^G`.
    pub is_block: bool,
    /// `log_p |G:H|` from the orbit sizes.
    pub log_index: Option<usize>,
    /// Same index from the layered chain.
    pub log_index_pc: usize,
    pub fixes_level_one: bool,
    /// Generator word fixing level `t_1` that carries `w` outside `w^H`.
    pub escaping_element: Option<String>,
    pub contains_st_t1: bool,
    pub divisibility: Lemma63Sample,
    /// `|G:H| <= p^(l_n)`, `st(w) <= H` and `H` does not contain `St(t_1)`.
    pub climbing_fails: bool,
    /// `|G:H| = p^(l_n)`, the size of level 1 of `T_n`, so `G > H > st(w) > ...` is a
    /// filtration whose first member is not a vertex stabilizer.
    pub deleted_tree_filtration: bool,
    pub notes: Vec<String>,
}

/// `H = <st(w), x, [g, x]>` where `x` runs over the generators of `St(1)` outside
/// `St(t_1)` and `g` over generators of `St(t_1)`. The layer `St(t_1)/St(t_2)` seen
/// from `w` is a regular module for the image of `St(1)`; `H` picks up only its
/// augmentation submodule, which has codimension one.
///
/// The index and the containment of `St(t_1)` are verified from the orbit `w^H`
/// alone: it is checked to be a block of `G` on `w^G`, so `{g : w^g in w^H}` is a
/// subgroup above `st_G(w)` regardless of how `st(w)` was computed.
pub fn augmentation_witness(p: u64, n: usize, depth: usize) -> Result<AugmentationWitness> {
    let s = GnSetup::new(p, n, depth)?;
    let lv = s.q.levels().clone();
    let t1u = s.t1 as usize;
    let moves_t1 = |g: &Perm| lv.level_points(t1u).any(|x| lv.image(g, x) != x);
    let xs: Vec<Perm> = s.st_1.iter().filter(|g| moves_t1(g)).cloned().collect();
    let mut extra = xs.clone();
    for g in s.st_t1.gens() {
        for x in &xs {
            extra.push(g.commutator(x));
        }
    }
    let h = s.st_w.closure(&extra);

    let w_pt = lv.point_of(&s.w)?;
    let orbit: Vec<u32> = s.q.orbit_points(w_pt);
    let mut block = h.orbit_points(w_pt);
    block.sort_unstable();
    let mut images: HashSet<Vec<u32>> = HashSet::from([block.clone()]);
    let mut queue = vec![block.clone()];
    while let Some(b) = queue.pop() {
        for g in s.q.gens() {
            let mut c: Vec<u32> = b.iter().map(|&x| lv.image(g, x)).collect();
            c.sort_unstable();
            if images.insert(c.clone()) {
                queue.push(c);
            }
        }
    }
    let covered: HashSet<u32> = images.iter().flatten().copied().collect();
    let is_block = covered.len() == orbit.len() && images.len() * block.len() == orbit.len();
    let log_index = is_block.then(|| exact_log(&(images.len() as u64).into(), p)).flatten();

    let names = s.q.generator_names();
    let gens = s.q.gens();
    let mut escaping = None;
    'search: for (i, g) in gens.iter().enumerate() {
        let conjugates = gens.iter().enumerate().map(|(j, c)| (g.conj(c), format!("{}^{}", names[i], names[j])));
        for (e, word) in std::iter::once((g.clone(), names[i].clone())).chain(conjugates) {
            if !moves_t1(&e) && block.binary_search(&lv.image(&e, w_pt)).is_err() {
                escaping = Some(word);
                break 'search;
            }
        }
    }
    let fixes_level_one = h.gens().iter().all(|g| lv.level_points(1).all(|x| lv.image(g, x) == x));
    let log_h = h.log_order(p).expect("a p-group");
    let log_index_pc = s.log_order - log_h;
    let contains_st_t1 = escaping.is_none() && s.st_t1.is_subgroup_of(&h);
    let divisibility = s.measure("augmentation".into(), &h);
    let small = log_index.is_some_and(|k| k as u64 <= s.l_n);
    Ok(AugmentationWitness {
        p,
        n,
        depth,
        l_n: s.l_n,
        t1: s.t1,
        t2: s.t2,
        w: s.w.to_string(),
        orbit_size: orbit.len(),
        block_size: block.len(),
        block_images: images.len(),
        is_block,
        log_index,
        log_index_pc,
        fixes_level_one,
        escaping_element: escaping,
        contains_st_t1,
        divisibility,
        climbing_fails: is_block && small && fixes_level_one && !contains_st_t1,
        deleted_tree_filtration: is_block && log_index == Some(s.l_n as usize) && !contains_st_t1,
        notes: vec![format!("quotient degree {}", s.degree)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_equation() {
        let r = check_index_equation(5, 2, 2).unwrap();
        assert!(r.solutions.is_empty());
        assert_eq!((r.minimum, r.expected_minimum, r.grid_minimum), (6, 6, 6));
        let r = check_index_equation(2, 2, 2).unwrap();
        assert!(r.solutions.is_empty() && r.minimum == 3 && r.agrees);
        let r = check_index_equation(5, 2, 6).unwrap();
        assert_eq!(r.solutions, vec![(1, 1)]);
        for (p, l) in [(3, 2), (5, 5)] {
            assert!(check_index_equation(p, l, l as u64).unwrap().agrees);
        }
    }

    #[test]
    fn lemma63_shallow_depth_rejected() {
        assert!(matches!(lemma63_sample_check(5, 1, 3, 1, 0), Err(Error::Precondition(_))));
        assert!(matches!(augmentation_witness(5, 1, 6), Err(Error::Precondition(_))));
    }
}
