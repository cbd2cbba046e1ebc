//! Deterministic Schreier–Sims over the vertices of a truncated tree.
//!
//! Group elements are permutations of the bottom level; every vertex of
//! levels `1..=depth` is a point, with its image read off the bottom level.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::tree::Vertex;

/// Level sizes of a truncated tree and the numbering of its vertices as points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Levels {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    extra: usize,
}

impl Levels {
    /// `sizes[k]` is the number of vertices at level `k`, for `k = 0..=depth`.
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.first() != Some(&1) {
            return Err(Error::Precondition("level 0 must have one vertex".into()));
        }
        for w in sizes.windows(2) {
            if w[1] % w[0] != 0 || w[1] <= w[0] {
                return Err(Error::Precondition(format!("level sizes {sizes:?} are not a tree")));
            }
        }
        let mut offsets = vec![0; sizes.len()];
        let mut acc = 0;
        for k in 1..sizes.len() {
            offsets[k] = acc;
            acc += sizes[k];
        }
        if u32::try_from(acc).is_err() {
            return Err(Error::DegreeLimit { degree: acc.to_string(), limit: u32::MAX as usize });
        }
        Ok(Levels { sizes, offsets, extra: 0 })
    }

    /// The same tree plus `extra` points outside it; permutations then carry
    /// the action on those points after the bottom level.
    pub fn with_extra(&self, extra: usize) -> Self {
        Levels { sizes: self.sizes.clone(), offsets: self.offsets.clone(), extra }
    }

    /// Degree of the permutations acting here.
    pub fn perm_degree(&self) -> usize {
        self.degree() + self.extra
    }

    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn size(&self, k: usize) -> usize {
        self.sizes[k]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn arity(&self, k: usize) -> usize {
        self.sizes[k + 1] / self.sizes[k]
    }

    /// Number of bottom-level vertices below a level-`k` vertex.
    pub fn block(&self, k: usize) -> usize {
        self.sizes[self.depth()] / self.sizes[k]
    }

    pub fn degree(&self) -> usize {
        self.sizes[self.depth()]
    }

    pub fn num_points(&self) -> usize {
        if self.depth() == 0 {
            return 0;
        }
        self.offsets[self.depth()] + self.sizes[self.depth()]
    }

    /// Point number of the level-`k` vertex of rank `r` (`k >= 1`).
    pub fn point(&self, k: usize, r: usize) -> u32 {
        (self.offsets[k] + r) as u32
    }

    pub fn level_points(&self, k: usize) -> impl Iterator<Item = u32> + '_ {
        (0..self.sizes[k]).map(move |r| self.point(k, r))
    }

    /// `(level, rank)` of a point.
    pub fn locate(&self, pt: u32) -> (usize, usize) {
        let pt = pt as usize;
        let k = match self.offsets[1..].binary_search(&pt) {
            Ok(i) => i + 1,
            Err(i) => i,
        };
        (k, pt - self.offsets[k])
    }

    #[inline]
    pub fn image(&self, g: &Perm, pt: u32) -> u32 {
        let tree = self.num_points();
        if pt as usize >= tree {
            let n = self.degree();
            return (g.image((n + pt as usize - tree) as u32) as usize - n + tree) as u32;
        }
        let (k, r) = self.locate(pt);
        let b = self.block(k);
        (self.offsets[k] + g.image((r * b) as u32) as usize / b) as u32
    }

    /// Image of a level-`k` rank.
    #[inline]
    pub fn image_rank(&self, g: &Perm, k: usize, r: usize) -> usize {
        let b = self.block(k);
        g.image((r * b) as u32) as usize / b
    }

    pub fn rank_of(&self, v: &Vertex) -> Result<usize> {
        if v.level() > self.depth() {
            return Err(Error::Vertex(format!("vertex {v} lies below depth {}", self.depth())));
        }
        let mut r = 0usize;
        for (i, &x) in v.word().iter().enumerate() {
            let a = self.arity(i);
            if x == 0 || x as usize > a {
                return Err(Error::Vertex(format!("entry {x} of {v} outside 1..={a}")));
            }
            r = r * a + (x as usize - 1);
        }
        Ok(r)
    }

    pub fn vertex(&self, k: usize, mut r: usize) -> Vertex {
        let mut w = vec![0u32; k];
        for i in (0..k).rev() {
            let a = self.arity(i);
            w[i] = (r % a) as u32 + 1;
            r /= a;
        }
        Vertex::new(w)
    }

    /// Point of a non-root vertex.
    pub fn point_of(&self, v: &Vertex) -> Result<u32> {
        if v.is_root() {
            return Err(Error::Vertex("the root is not a point".into()));
        }
        Ok(self.point(v.level(), self.rank_of(v)?))
    }

    pub fn vertex_of(&self, pt: u32) -> Vertex {
        let (k, r) = self.locate(pt);
        self.vertex(k, r)
    }
}

struct Level {
    base: u32,
    gens: Vec<usize>,
    orbit: Vec<u32>,
    trans: HashMap<u32, Perm>,
    tested: HashSet<(u32, usize)>,
}

/// Base and strong generating set of a group of tree automorphisms.
pub struct StabChain {
    levels: Arc<Levels>,
    strong: Vec<Perm>,
    chain: Vec<Level>,
}

impl StabChain {
    /// Builds the chain; the base starts with `base_prefix` (in order).
    pub fn new(levels: Arc<Levels>, gens: &[Perm], base_prefix: &[u32]) -> Self {
        let mut sc = StabChain { levels, strong: Vec::new(), chain: Vec::new() };
        for &b in base_prefix {
            sc.push_level(b);
        }
        for g in gens {
            if g.is_identity() || sc.strong.contains(g) {
                continue;
            }
            let j = sc.first_moved_level(g);
            if j == sc.chain.len() {
                let b = sc.first_moved_point(g);
                sc.push_level(b);
            }
            sc.add_strong(g.clone(), j);
        }
        sc.complete();
        sc
    }

    fn push_level(&mut self, base: u32) {
        let id = Perm::identity(self.levels.perm_degree());
        self.chain.push(Level {
            base,
            gens: Vec::new(),
            orbit: vec![base],
            trans: HashMap::from([(base, id)]),
            tested: HashSet::new(),
        });
    }

    /// Index of the first base point moved by `g` (chain length if none).
    fn first_moved_level(&self, g: &Perm) -> usize {
        self.chain
            .iter()
            .position(|l| self.levels.image(g, l.base) != l.base)
            .unwrap_or(self.chain.len())
    }

    fn first_moved_point(&self, g: &Perm) -> u32 {
        let lv = &self.levels;
        for k in 1..=lv.depth() {
            for r in 0..lv.size(k) {
                if lv.image_rank(g, k, r) != r {
                    return lv.point(k, r);
                }
            }
        }
        unreachable!("identity has no moved point")
    }

    /// Adds `h` (which fixes the first `j` base points) to levels `0..=j`.
    fn add_strong(&mut self, h: Perm, j: usize) {
        let idx = self.strong.len();
        self.strong.push(h);
        for l in 0..=j {
            self.chain[l].gens.push(idx);
            self.extend_orbit(l);
        }
    }

    fn extend_orbit(&mut self, l: usize) {
        let levels = self.levels.clone();
        let lvl = &mut self.chain[l];
        let mut i = 0;
        while i < lvl.orbit.len() {
            let beta = lvl.orbit[i];
            for &gi in &lvl.gens {
                let g = &self.strong[gi];
                let img = levels.image(g, beta);
                if !lvl.trans.contains_key(&img) {
                    let u = lvl.trans[&beta].mul(g);
                    lvl.trans.insert(img, u);
                    lvl.orbit.push(img);
                }
            }
            i += 1;
        }
    }

    /// Sifts `g` from level `from`; returns the residue and the level where it stopped.
    fn sift_from(&self, mut g: Perm, from: usize) -> (Perm, usize) {
        for (i, lvl) in self.chain.iter().enumerate().skip(from) {
            let beta = self.levels.image(&g, lvl.base);
            match lvl.trans.get(&beta) {
                Some(u) => g = g.mul(&u.inverse()),
                None => return (g, i),
            }
        }
        let n = self.chain.len();
        (g, n)
    }

    fn complete(&mut self) {
        let mut i = self.chain.len() as isize - 1;
        'outer: while i >= 0 {
            let li = i as usize;
            let pairs: Vec<(u32, usize)> = {
                let lvl = &self.chain[li];
                lvl.orbit
                    .iter()
                    .flat_map(|&b| lvl.gens.iter().map(move |&g| (b, g)))
                    .filter(|p| !lvl.tested.contains(p))
                    .collect()
            };
            for (beta, gi) in pairs {
                self.chain[li].tested.insert((beta, gi));
                let (sg, trivial) = {
                    let lvl = &self.chain[li];
                    let s = &self.strong[gi];
                    let ub_s = lvl.trans[&beta].mul(s);
                    let img = self.levels.image(s, beta);
                    let u_img = &lvl.trans[&img];
                    if &ub_s == u_img {
                        (ub_s, true)
                    } else {
                        (ub_s.mul(&u_img.inverse()), false)
                    }
                };
                if trivial {
                    continue;
                }
                let (h, j) = self.sift_from(sg, li + 1);
                if j < self.chain.len() || !h.is_identity() {
                    if j == self.chain.len() {
                        let b = self.first_moved_point(&h);
                        self.push_level(b);
                    }
                    self.add_strong(h, j);
                    i = j as isize;
                    continue 'outer;
                }
            }
            i -= 1;
        }
    }

    pub fn levels(&self) -> &Arc<Levels> {
        &self.levels
    }

    pub fn base(&self) -> Vec<u32> {
        self.chain.iter().map(|l| l.base).collect()
    }

    pub fn order(&self) -> BigUint {
        self.chain
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.chain.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.levels.perm_degree() {
            return false;
        }
        let (h, j) = self.sift_from(g.clone(), 0);
        j == self.chain.len() && h.is_identity()
    }

    pub fn strong_gens(&self) -> &[Perm] {
        &self.strong
    }

    /// Generators of the pointwise stabilizer of the first `m` base points.
    pub fn stabilizer_gens(&self, m: usize) -> Vec<Perm> {
        match self.chain.get(m) {
            Some(l) => l.gens.iter().map(|&i| self.strong[i].clone()).collect(),
            None => Vec::new(),
        }
    }

    /// Orbit of the `m`-th base point under the stabilizer of the earlier ones,
    /// with transversal elements.
    pub fn basic_orbit(&self, m: usize) -> Vec<(u32, &Perm)> {
        let l = &self.chain[m];
        l.orbit.iter().map(|b| (*b, &l.trans[b])).collect()
    }
}
