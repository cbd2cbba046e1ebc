//! Subgroups between a vertex stabilizer and the whole quotient.
//!
//! A subgroup `L` containing `st(w)` is determined by the orbit `w^L`, which is
//! a block of the action on `w^Q` containing `w`; conversely every such block
//! `B` gives `L = {g : w^g in B}`. Enumerating the interval therefore means
//! enumerating blocks that contain `w^H`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::SubgroupHandle;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::tree::Vertex;

pub const DEFAULT_NODE_CAP: usize = 100_000;

#[derive(Clone, Debug)]
pub struct IntervalMember {
    pub group: SubgroupHandle,
    pub index: usize,
    /// `w^L` as sorted point numbers.
    pub block: Vec<u32>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Smallest block of the action (given as index maps) containing `seed`, as sorted indices.
fn minimal_block(actions: &[Vec<usize>], n: usize, seed: &[usize]) -> Vec<usize> {
    let mut uf = UnionFind((0..n).collect());
    let mut queue = VecDeque::new();
    for &s in &seed[1..] {
        if uf.union(seed[0], s) {
            queue.push_back((seed[0], s));
        }
    }
    while let Some((a, b)) = queue.pop_front() {
        for act in actions {
            let (x, y) = (act[a], act[b]);
            if uf.union(x, y) {
                queue.push_back((x, y));
            }
        }
    }
    let root = uf.find(seed[0]);
    (0..n).filter(|&i| uf.find(i) == root).collect()
}

/// All `L` with `H <= L <= Q` and `|Q:L| <= max_index`, for `H` containing `st_Q(w)`.
pub fn interval_subgroups(
    q: &SubgroupHandle,
    h: &SubgroupHandle,
    w: &Vertex,
    max_index: usize,
    node_cap: usize,
) -> Result<Vec<IntervalMember>> {
    if !h.is_subgroup_of(q) {
        return Err(Error::Precondition("H is not a subgroup of Q".into()));
    }
    if w.is_root() {
        return Ok(vec![IntervalMember { group: q.clone(), index: 1, block: Vec::new() }]);
    }
    let st = q.stabilizer(w)?;
    if !st.is_subgroup_of(h) {
        return Err(Error::Precondition(format!("H does not contain the stabilizer of {w}")));
    }
    let pt = q.levels().point_of(w)?;
    let trans = q.orbit_transversal(pt);
    let n = trans.len();
    let index_of: HashMap<u32, usize> = trans.iter().enumerate().map(|(i, (x, _))| (*x, i)).collect();
    let actions: Vec<Vec<usize>> = q
        .gens()
        .iter()
        .map(|g| trans.iter().map(|(x, _)| index_of[&q.levels().image(g, *x)]).collect())
        .collect();
    let seed: Vec<usize> = h.orbit_points(pt).iter().map(|x| index_of[x]).collect();
    let b0 = minimal_block(&actions, n, &seed);

    let mut seen: HashSet<Vec<usize>> = HashSet::from([b0.clone()]);
    let mut queue = VecDeque::from([b0]);
    let mut found: Vec<Vec<usize>> = Vec::new();
    while let Some(b) = queue.pop_front() {
        if n / b.len() <= max_index {
            found.push(b.clone());
        }
        let inside: HashSet<usize> = b.iter().copied().collect();
        for x in 0..n {
            if inside.contains(&x) {
                continue;
            }
            let mut s = b.clone();
            s.push(x);
            let nb = minimal_block(&actions, n, &s);
            if seen.insert(nb.clone()) {
                if seen.len() > node_cap {
                    return Err(Error::Budget { budget: node_cap, found: found.len() });
                }
                queue.push_back(nb);
            }
        }
    }

    let mut out: Vec<IntervalMember> = found
        .into_iter()
        .map(|b| {
            let mut l = h.clone();
            let mut reach: HashSet<u32> = l.orbit_points(pt).into_iter().collect();
            for &i in &b {
                let (x, t) = &trans[i];
                if !reach.contains(x) {
                    l = l.closure(std::slice::from_ref(t));
                    reach = l.orbit_points(pt).into_iter().collect();
                }
            }
            let mut block: Vec<u32> = b.iter().map(|&i| trans[i].0).collect();
            block.sort_unstable();
            IntervalMember { group: l, index: n / b.len(), block }
        })
        .collect();
    out.sort_by(|a, b| (a.block.len(), &a.block).cmp(&(b.block.len(), &b.block)));
    Ok(out)
}

/// Interval by brute force over the elements of `Q` (`|Q| <= limit`).
pub fn interval_subgroups_exhaustive(
    q: &SubgroupHandle,
    h: &SubgroupHandle,
    max_index: usize,
    limit: usize,
) -> Result<Vec<(SubgroupHandle, usize)>> {
    let els = q.elements(limit).ok_or(Error::Budget { budget: limit, found: limit })?;
    let id_of: HashMap<Perm, usize> = els.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
    let close = |gens: &[usize]| -> BTreeSet<usize> {
        let mut set = BTreeSet::from([0usize]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = id_of[&els[x].mul(&els[g])];
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        set
    };
    let h_gens: Vec<usize> = h.gens().iter().map(|g| id_of[g]).collect();
    let start = close(&h_gens);
    let mut seen: HashMap<BTreeSet<usize>, Vec<usize>> = HashMap::from([(start.clone(), h_gens)]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let gens = seen[&s].clone();
        for g in 0..els.len() {
            if s.contains(&g) {
                continue;
            }
            let mut ng = gens.clone();
            ng.push(g);
            let t = close(&ng);
            if !seen.contains_key(&t) {
                seen.insert(t.clone(), ng);
                queue.push_back(t);
            }
        }
    }
    let total = els.len();
    let mut out: Vec<(SubgroupHandle, usize, BTreeSet<usize>)> = seen
        .into_iter()
        .filter(|(s, _)| total / s.len() <= max_index)
        .map(|(s, g)| {
            let gens = g.iter().map(|&i| els[i].clone()).collect();
            (SubgroupHandle::new(q.levels().clone(), q.prime(), gens), total / s.len(), s)
        })
        .collect();
    out.sort_by(|a, b| (a.1, &a.2).cmp(&(b.1, &b.2)));
    Ok(out.into_iter().map(|(g, i, _)| (g, i)).collect())
}
