//! Congruence quotients `G/St_G(n)` as permutation groups on level `n`, and
//! subgroups of them.

mod interval;
mod pgroup;
mod schreier;

use std::collections::{HashMap, HashSet};
use std::ops::Deref;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

pub use interval::{interval_subgroups, interval_subgroups_exhaustive, IntervalMember, DEFAULT_NODE_CAP};
pub use pgroup::{check_cyclic_labels, PcChain};
pub use schreier::{Levels, StabChain};

use crate::error::{Error, Result};
use crate::groupdef::GroupDef;
use crate::perm::{enumerate_group, Perm};
use crate::tree::Vertex;

/// A subgroup of the automorphism group of a truncated tree, given by generators.
#[derive(Clone)]
pub struct SubgroupHandle {
    levels: Arc<Levels>,
    p: Option<u64>,
    gens: Vec<Perm>,
    chain: Arc<OnceLock<Arc<StabChain>>>,
    pc: Arc<OnceLock<Option<Arc<PcChain>>>>,
}

impl std::fmt::Debug for SubgroupHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubgroupHandle")
            .field("depth", &self.levels.depth())
            .field("gens", &self.gens.len())
            .finish()
    }
}

impl SubgroupHandle {
    /// `p`, when given, promises every element has labels in `<(1 2 ... p)>`.
    pub fn new(levels: Arc<Levels>, p: Option<u64>, gens: Vec<Perm>) -> Self {
        let mut seen = HashSet::new();
        let gens = gens
            .into_iter()
            .filter(|g| !g.is_identity() && seen.insert(g.clone()))
            .collect();
        SubgroupHandle {
            levels,
            p,
            gens,
            chain: Arc::new(OnceLock::new()),
            pc: Arc::new(OnceLock::new()),
        }
    }

    fn sibling(&self, gens: Vec<Perm>) -> Self {
        SubgroupHandle::new(self.levels.clone(), self.p, gens)
    }

    pub fn levels(&self) -> &Arc<Levels> {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.depth()
    }

    pub fn degree(&self) -> usize {
        self.levels.degree()
    }

    pub fn prime(&self) -> Option<u64> {
        self.p
    }

    pub fn gens(&self) -> &[Perm] {
        &self.gens
    }

    pub fn identity(&self) -> Perm {
        Perm::identity(self.degree())
    }

    pub fn trivial(&self) -> Self {
        self.sibling(Vec::new())
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    /// Stabilizer chain with the default base.
    pub fn chain(&self) -> Arc<StabChain> {
        self.chain
            .get_or_init(|| Arc::new(StabChain::new(self.levels.clone(), &self.gens, &[])))
            .clone()
    }

    /// Layered chain, available for subgroups of the iterated wreath product of `C_p`.
    pub fn pc(&self) -> Option<Arc<PcChain>> {
        self.pc
            .get_or_init(|| {
                let p = self.p?;
                PcChain::new(self.levels.clone(), p, &self.gens).ok().map(Arc::new)
            })
            .clone()
    }

    pub fn order(&self) -> BigUint {
        match self.pc() {
            Some(pc) => pc.order(),
            None => self.chain().order(),
        }
    }

    /// Order through Schreier–Sims regardless of the layered shortcut.
    pub fn order_schreier_sims(&self) -> BigUint {
        self.chain().order()
    }

    /// `log_p` of the order when it is a power of `p`.
    pub fn log_order(&self, p: u64) -> Option<usize> {
        if let Some(pc) = self.pc() {
            if pc.prime() == p {
                return Some(pc.log_order());
            }
        }
        exact_log(&self.order(), p)
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.degree() {
            return false;
        }
        match self.pc() {
            Some(pc) => pc.contains(g),
            None => self.chain().contains(g),
        }
    }

    pub fn is_subgroup_of(&self, other: &SubgroupHandle) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }

    pub fn same_group(&self, other: &SubgroupHandle) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other)
    }

    pub fn closure(&self, extra: &[Perm]) -> SubgroupHandle {
        let mut gens = self.gens.clone();
        gens.extend(extra.iter().filter(|g| !self.contains(g)).cloned());
        self.sibling(gens)
    }

    pub fn conjugate(&self, x: &Perm) -> SubgroupHandle {
        self.sibling(self.gens.iter().map(|g| g.conj(x)).collect())
    }

    pub fn is_abelian(&self) -> bool {
        self.gens
            .iter()
            .enumerate()
            .all(|(i, g)| self.gens[i + 1..].iter().all(|h| g.mul(h) == h.mul(g)))
    }

    /// All elements, or `None` past `limit`.
    pub fn elements(&self, limit: usize) -> Option<Vec<Perm>> {
        enumerate_group(&self.gens, self.degree(), limit)
    }

    /// Least common multiple of element orders (enumerates the group).
    pub fn exponent(&self, limit: usize) -> Result<BigUint> {
        let els = self.elements(limit).ok_or(Error::Budget { budget: limit, found: limit })?;
        Ok(els
            .iter()
            .fold(BigUint::one(), |acc, g| num_integer::Integer::lcm(&acc, &g.order())))
    }

    pub fn orbit_points(&self, pt: u32) -> Vec<u32> {
        let mut seen = HashSet::from([pt]);
        let mut out = vec![pt];
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            for g in &self.gens {
                let y = self.levels.image(g, x);
                if seen.insert(y) {
                    out.push(y);
                }
            }
            i += 1;
        }
        out
    }

    /// Orbit of `v` (`|v| <= depth`), sorted.
    pub fn orbit(&self, v: &Vertex) -> Result<Vec<Vertex>> {
        if v.is_root() {
            return Ok(vec![Vertex::root()]);
        }
        let pt = self.levels.point_of(v)?;
        let mut out: Vec<Vertex> = self.orbit_points(pt).into_iter().map(|x| self.levels.vertex_of(x)).collect();
        out.sort();
        Ok(out)
    }

    /// Orbit of `pt` with elements carrying `pt` to each orbit point.
    pub fn orbit_transversal(&self, pt: u32) -> Vec<(u32, Perm)> {
        let mut index = HashMap::from([(pt, 0usize)]);
        let mut out = vec![(pt, self.identity())];
        let mut i = 0;
        while i < out.len() {
            let (x, u) = out[i].clone();
            for g in &self.gens {
                let y = self.levels.image(g, x);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(y) {
                    e.insert(out.len());
                    out.push((y, u.mul(g)));
                }
            }
            i += 1;
        }
        out
    }

    /// Pointwise stabilizer of the given points.
    pub fn pointwise_stabilizer(&self, points: &[u32]) -> SubgroupHandle {
        if points.is_empty() {
            return self.clone();
        }
        let sc = StabChain::new(self.levels.clone(), &self.gens, points);
        self.sibling(sc.stabilizer_gens(points.len()))
    }

    /// `st(v)`.
    pub fn stabilizer(&self, v: &Vertex) -> Result<SubgroupHandle> {
        if v.is_root() {
            return Ok(self.clone());
        }
        let pt = self.levels.point_of(v)?;
        match (self.p, self.pc()) {
            (Some(p), Some(pc)) => Ok(self.descend_stabilizer(p, pc.level_stabilizer_gens(0), v)),
            _ => Ok(self.pointwise_stabilizer(&[pt])),
        }
    }

    /// `st(v)` for a subgroup of the iterated wreath product of `C_p`: walking down
    /// the path to `v`, the stabilizer of the next vertex is the kernel of the label
    /// exponent at the current one, a homomorphism onto `C_p` or trivial.
    fn descend_stabilizer(&self, p: u64, mut gens: Vec<Perm>, v: &Vertex) -> SubgroupHandle {
        let p32 = p as u32;
        for k in 0..v.level() {
            let r = self.levels.rank_of(&v.prefix(k)).expect("vertex within depth") * p as usize;
            let label = |g: &Perm| (self.levels.image_rank(g, k + 1, r) - r) as u32;
            let Some(j0) = gens.iter().position(|g| label(g) != 0) else { continue };
            let c0_inv = (1..p32).find(|x| (label(&gens[j0]) * x) % p32 == 1).expect("p is prime");
            let t: Vec<Perm> = (0..p as i64).map(|i| gens[j0].pow(i)).collect();
            let t_inv: Vec<Perm> = t.iter().map(|x| x.inverse()).collect();
            let mut schreier = Vec::with_capacity(t.len() * gens.len());
            for (i, ti) in t.iter().enumerate() {
                for s in &gens {
                    let j = (i as u32 + label(s) * c0_inv) % p32;
                    schreier.push(ti.mul(s).mul(&t_inv[j as usize]));
                }
            }
            let kernel = self.sibling(schreier);
            gens = match kernel.pc() {
                Some(pc) => pc.level_stabilizer_gens(0),
                None => kernel.gens,
            };
        }
        self.sibling(gens)
    }

    /// `St(k)`, the pointwise stabilizer of level `k`.
    pub fn level_stabilizer(&self, k: usize) -> SubgroupHandle {
        if k == 0 {
            return self.clone();
        }
        if let Some(pc) = self.pc() {
            return self.sibling(pc.level_stabilizer_gens(k));
        }
        let pts: Vec<u32> = self.levels.level_points(k).collect();
        self.pointwise_stabilizer(&pts)
    }

    /// Whether `self` is normalized by every generator of `ambient`.
    pub fn is_normal_in(&self, ambient: &SubgroupHandle) -> bool {
        ambient
            .gens
            .iter()
            .all(|x| self.gens.iter().all(|h| self.contains(&h.conj(x))))
    }

    /// Right coset representatives of `self` in `ambient`, and the action of the
    /// generators of `ambient` on them.
    pub fn coset_action(&self, ambient: &SubgroupHandle, limit: usize) -> Result<(Vec<Perm>, Vec<Perm>)> {
        let mut reps = vec![self.identity()];
        let mut inv = vec![self.identity()];
        let mut table: Vec<Vec<u32>> = vec![Vec::new(); ambient.gens.len()];
        let find = |reps_inv: &[Perm], g: &Perm| reps_inv.iter().position(|ri| self.contains(&g.mul(ri)));
        let mut i = 0;
        while i < reps.len() {
            for (gi, x) in ambient.gens.iter().enumerate() {
                let y = reps[i].mul(x);
                let j = match find(&inv, &y) {
                    Some(j) => j,
                    None => {
                        if reps.len() >= limit {
                            return Err(Error::Budget { budget: limit, found: reps.len() });
                        }
                        inv.push(y.inverse());
                        reps.push(y);
                        reps.len() - 1
                    }
                };
                table[gi].push(j as u32);
            }
            i += 1;
        }
        let perms = table
            .into_iter()
            .map(|t| Perm::from_images(t).expect("coset action is a permutation"))
            .collect();
        Ok((reps, perms))
    }

    /// `Core_ambient(self)`, the largest normal subgroup of `ambient` inside `self`.
    pub fn normal_core_in(&self, ambient: &SubgroupHandle) -> Result<SubgroupHandle> {
        let (reps, action) = self.coset_action(ambient, 1 << 16)?;
        let m = reps.len();
        if m == 1 {
            return Ok(ambient.clone());
        }
        let tree_pts = self.levels.num_points();
        let combined_levels = Arc::new(self.levels.with_extra(m));
        let n = self.degree();
        let gens: Vec<Perm> = ambient
            .gens
            .iter()
            .zip(&action)
            .map(|(g, a)| {
                let mut img = g.images().to_vec();
                img.extend(a.images().iter().map(|&x| x + n as u32));
                Perm::from_images(img).expect("combined action")
            })
            .collect();
        let extra: Vec<u32> = (0..m).map(|i| (tree_pts + i) as u32).collect();
        let sc = StabChain::new(combined_levels, &gens, &extra);
        let kernel = sc
            .stabilizer_gens(m)
            .into_iter()
            .map(|g| Perm::from_images(g.images()[..n].to_vec()).expect("restriction"))
            .collect();
        Ok(self.sibling(kernel))
    }

    /// Elements moving only bottom-level vertices below `v`.
    pub fn rist_in_quotient(&self, v: &Vertex) -> Result<SubgroupHandle> {
        if v.is_root() {
            return Ok(self.clone());
        }
        let r = self.levels.rank_of(v)?;
        let b = self.levels.block(v.level());
        let d = self.depth();
        let outside: Vec<u32> = (0..self.degree())
            .filter(|x| x / b != r)
            .map(|x| self.levels.point(d, x))
            .collect();
        Ok(self.pointwise_stabilizer(&outside))
    }

    /// Distinct conjugates of `self` under `ambient`.
    pub fn conjugates_in(&self, ambient: &SubgroupHandle, limit: usize) -> Result<Vec<SubgroupHandle>> {
        let mut out = vec![self.clone()];
        let mut i = 0;
        while i < out.len() {
            for x in &ambient.gens {
                let c = out[i].conjugate(x);
                if !out.iter().any(|o| o.same_group(&c)) {
                    if out.len() >= limit {
                        return Err(Error::Budget { budget: limit, found: out.len() });
                    }
                    out.push(c);
                }
            }
            i += 1;
        }
        Ok(out)
    }

    /// Whether the conjugates of `self` in `ambient` commute pairwise and generate
    /// their direct product.
    pub fn is_basal_in(&self, ambient: &SubgroupHandle) -> Result<bool> {
        if self.is_trivial() {
            return Ok(true);
        }
        let conj = self.conjugates_in(ambient, 4096)?;
        for i in 0..conj.len() {
            for j in i + 1..conj.len() {
                for g in &conj[i].gens {
                    for h in &conj[j].gens {
                        if g.mul(h) != h.mul(g) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        let all: Vec<Perm> = conj.iter().flat_map(|c| c.gens.iter().cloned()).collect();
        let product = conj.iter().fold(BigUint::one(), |acc, c| acc * c.order());
        Ok(self.sibling(all).order() == product)
    }
}

/// `k` with `n = p^k`, if any.
pub fn exact_log(n: &BigUint, p: u64) -> Option<usize> {
    let mut n = n.clone();
    let p = BigUint::from(p);
    let mut k = 0;
    while n > BigUint::one() {
        if &n % &p != BigUint::from(0u32) {
            return None;
        }
        n /= &p;
        k += 1;
    }
    Some(k)
}

/// `G/St_G(depth)` acting on level `depth`.
#[derive(Clone, Debug)]
pub struct Quotient {
    group: String,
    depth: usize,
    gen_names: Vec<String>,
    whole: SubgroupHandle,
}

impl Deref for Quotient {
    type Target = SubgroupHandle;
    fn deref(&self) -> &SubgroupHandle {
        &self.whole
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct QuotientReport {
    pub group: String,
    pub depth: usize,
    pub degree: usize,
    pub order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    pub generators: Vec<String>,
}

/// The image of `def` on level `depth` of its tree.
pub fn congruence_quotient(def: &GroupDef, depth: usize) -> Result<Quotient> {
    let mut sizes = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        sizes.push(def.level_count(k)?);
    }
    let levels = Arc::new(Levels::new(sizes)?);
    let gens = def.generator_perms(depth)?;
    let whole = SubgroupHandle::new(levels, def.wreath_prime(), gens);
    Ok(Quotient { group: def.source().to_string(), depth, gen_names: def.generator_names(), whole })
}

impl Quotient {
    pub fn group_name(&self) -> &str {
        &self.group
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn generator_names(&self) -> &[String] {
        &self.gen_names
    }

    pub fn handle(&self) -> &SubgroupHandle {
        &self.whole
    }

    pub fn report(&self) -> QuotientReport {
        let order = self.order();
        let p = self.prime().or_else(|| {
            let d = self.levels.arity(0) as u64;
            (self.depth > 0 && (0..self.depth).all(|k| self.levels.arity(k) as u64 == d)).then_some(d)
        });
        QuotientReport {
            group: self.group.clone(),
            depth: self.depth,
            degree: self.degree(),
            log_p: p.filter(|_| self.depth > 0).and_then(|p| exact_log(&order, p)),
            p: p.filter(|_| self.depth > 0),
            order: order.to_string(),
            generators: self.gen_names.clone(),
        }
    }

    /// Image of `St_G(k)`.
    pub fn level_stabilizer_image(&self, k: usize) -> Result<SubgroupHandle> {
        if k > self.depth {
            return Err(Error::Precondition(format!("level {k} is below depth {}", self.depth)));
        }
        Ok(self.level_stabilizer(k))
    }
}

/// Whether every level `k <= depth` is a single orbit.
pub fn is_level_transitive(def: &GroupDef, depth: usize) -> Result<bool> {
    let q = congruence_quotient(def, depth)?;
    Ok((1..=depth).all(|k| q.orbit_points(q.levels.point(k, 0)).len() == q.levels.size(k)))
}

/// `St_G(k)` in `G/St_G(depth)`.
pub fn level_stabilizer_image(def: &GroupDef, k: usize, depth: usize) -> Result<SubgroupHandle> {
    congruence_quotient(def, depth)?.level_stabilizer_image(k)
}

/// Number of elements as a machine integer, when small.
pub fn small_order(h: &SubgroupHandle) -> Option<usize> {
    h.order().to_usize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupdef::{zoo, ZooParams};

    fn q(name: &str, depth: usize) -> Quotient {
        congruence_quotient(&zoo(name, &ZooParams::default()).unwrap(), depth).unwrap()
    }

    #[test]
    fn grigorchuk_orders() {
        for (d, o) in [(0, 1u32), (1, 2), (2, 8), (3, 128)] {
            let q = q("grigorchuk", d);
            assert_eq!(q.order(), BigUint::from(o));
            assert_eq!(q.order_schreier_sims(), BigUint::from(o));
        }
    }

    #[test]
    fn small_orders() {
        assert_eq!(q("basilica", 2).order(), BigUint::from(8u32));
        assert_eq!(q("bsv", 2).order(), BigUint::from(4u32));
        assert!(q("bsv", 1).contains(&Perm::identity(2)));
    }

    #[test]
    fn gn_depth_two() {
        let def = zoo("gn", &ZooParams { p: Some(5), n: Some(1), ..Default::default() }).unwrap();
        let q = congruence_quotient(&def, 2).unwrap();
        assert_eq!(q.order(), BigUint::from(25u32));
        assert!(q.is_abelian());
        assert_eq!(q.exponent(100).unwrap(), BigUint::from(5u32));
        let v: Vertex = "3.2".parse().unwrap();
        assert!(q.stabilizer(&v).unwrap().is_trivial());
        assert_eq!(q.orbit(&"1".parse().unwrap()).unwrap().len(), 5);
        assert_eq!(q.orbit(&v).unwrap().len(), 25);
    }

    #[test]
    fn stabilizers_and_cores() {
        let q2 = q("grigorchuk", 2);
        let v: Vertex = "1.1".parse().unwrap();
        let st = q2.stabilizer(&v).unwrap();
        assert_eq!(st.order(), BigUint::from(2u32));
        let st1 = q2.stabilizer(&"1".parse().unwrap()).unwrap();
        let core = st1.normal_core_in(&q2).unwrap();
        assert!(core.same_group(&q2.level_stabilizer(1)));
        assert!(q2.handle().normal_core_in(&q2).unwrap().same_group(&q2));
        let q3 = q("grigorchuk", 3);
        let st3 = q3.stabilizer(&"1.1.1".parse().unwrap()).unwrap();
        assert!(!st3.is_normal_in(&q3));
    }

    #[test]
    fn rist_and_basal() {
        let q3 = q("grigorchuk", 3);
        assert!(q3.rist_in_quotient(&Vertex::root()).unwrap().same_group(&q3));
        let r = q3.rist_in_quotient(&"1".parse().unwrap()).unwrap();
        assert!(!r.is_trivial());
        let b = q3.levels().block(1);
        for g in r.gens() {
            for x in b..q3.degree() {
                assert_eq!(g.image(x as u32), x as u32);
            }
        }
        assert!(r.is_basal_in(&q3).unwrap());
    }

    #[test]
    fn level_transitivity() {
        let def = zoo("grigorchuk", &ZooParams::default()).unwrap();
        assert!(is_level_transitive(&def, 4).unwrap());
        let odd = crate::groupdef::parse_group(
            "tree regular:2\na = perm(id) sections(a,a)\nb = perm((1 2)) sections(a,a)\ngens a b\n",
        )
        .unwrap();
        assert!(!is_level_transitive(&odd, 2).unwrap());
    }

    #[test]
    fn descent_stabilizer_matches_chain() {
        for name in ["basilica", "grigorchuk"] {
            let q = q(name, 4);
            for pt in 0..q.levels.num_points() as u32 {
                let v = q.levels.vertex_of(pt);
                let fast = q.stabilizer(&v).unwrap();
                let slow = q.pointwise_stabilizer(&[pt]);
                assert!(fast.same_group(&slow), "{name} at {v}");
            }
        }
    }
}
