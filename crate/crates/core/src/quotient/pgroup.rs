//! Layered chain for subgroups of the iterated wreath product of `C_p`.
//!
//! For such groups `St(k)/St(k+1)` embeds in `F_p^{N_k}` through the label
//! exponents at level `k`. Each layer keeps echelon rows of that space with a
//! representative element; every element of the group is a unique ordered
//! product of row powers, so orders and level-stabilizer indices are exact.

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigUint;

use super::schreier::Levels;
use crate::error::{Error, Result};
use crate::perm::Perm;

struct Row {
    pivot: usize,
    vec: Vec<u32>,
    elem: Perm,
    inv: Perm,
}

pub struct PcChain {
    levels: Arc<Levels>,
    p: u32,
    layers: Vec<Vec<Row>>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    (1..p).find(|x| (a as u64 * *x as u64) % p as u64 == 1).expect("p is prime")
}

impl PcChain {
    /// Fails with [`Error::NotWreathCyclic`] when some generator has a label outside `<(1 2 ... p)>`.
    pub fn new(levels: Arc<Levels>, p: u64, gens: &[Perm]) -> Result<Self> {
        let depth = levels.depth();
        for k in 0..depth {
            if levels.arity(k) as u64 != p {
                return Err(Error::NotWreathCyclic(format!("level {k} has arity {}, not {p}", levels.arity(k))));
            }
        }
        let p32 = p as u32;
        for g in gens {
            check_cyclic_labels(&levels, p32, g)?;
        }
        let mut pc = PcChain { levels, p: p32, layers: (0..depth).map(|_| Vec::new()).collect() };
        let mut queue: VecDeque<Perm> = gens.iter().cloned().collect();
        while let Some(g) = queue.pop_front() {
            if let Some((k, g, vec)) = pc.sift(g) {
                let new = pc.insert(k, g, vec);
                let depth = pc.levels.depth();
                let row = &pc.layers[k][new];
                if k + 1 < depth {
                    queue.push_back(row.elem.pow(p as i64));
                    for y in &pc.layers[k][..new] {
                        queue.push_back(row.elem.commutator(&y.elem));
                    }
                }
                for x in gens {
                    queue.push_back(row.elem.conj(x));
                }
            }
        }
        Ok(pc)
    }

    /// Label exponents at level `k` of an element of `St(k)`.
    fn label_vec(&self, g: &Perm, k: usize) -> Vec<u32> {
        let p = self.p as usize;
        (0..self.levels.size(k))
            .map(|r| (self.levels.image_rank(g, k + 1, r * p) - r * p) as u32)
            .collect()
    }

    /// Reduces `g`; `None` if it lies in the group spanned so far, else the
    /// layer, the residue and its reduced label vector.
    fn sift(&self, mut g: Perm) -> Option<(usize, Perm, Vec<u32>)> {
        let p = self.p;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut vec = self.label_vec(&g, k);
            for row in layer {
                let c = vec[row.pivot];
                if c == 0 {
                    continue;
                }
                for _ in 0..c {
                    g = g.mul(&row.inv);
                }
                for (x, y) in vec.iter_mut().zip(&row.vec) {
                    *x = (*x + (p - c) * y) % p;
                }
            }
            if vec.iter().any(|&x| x != 0) {
                return Some((k, g, vec));
            }
        }
        None
    }

    fn insert(&mut self, k: usize, g: Perm, mut vec: Vec<u32>) -> usize {
        let p = self.p;
        let pivot = vec.iter().position(|&x| x != 0).expect("non-zero vector");
        let m = inv_mod(vec[pivot], p);
        for x in vec.iter_mut() {
            *x = (*x * m) % p;
        }
        let elem = g.pow(m as i64);
        let inv = elem.inverse();
        self.layers[k].push(Row { pivot, vec, elem, inv });
        self.layers[k].len() - 1
    }

    pub fn prime(&self) -> u64 {
        self.p as u64
    }

    /// `log_p |St(k) : St(k+1)|` for `k = 0..depth`.
    pub fn layer_ranks(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.len()).collect()
    }

    pub fn log_order(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.p).pow(self.log_order() as u32)
    }

    /// `log_p |G : St_G(k)|`.
    pub fn log_index_of_level_stabilizer(&self, k: usize) -> usize {
        self.layers[..k].iter().map(|l| l.len()).sum()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.levels.degree()
            && check_cyclic_labels(&self.levels, self.p, g).is_ok()
            && self.sift(g.clone()).is_none()
    }

    /// Generators of the level stabilizer `St_G(k)`.
    pub fn level_stabilizer_gens(&self, k: usize) -> Vec<Perm> {
        self.layers[k.min(self.layers.len())..]
            .iter()
            .flat_map(|l| l.iter().map(|r| r.elem.clone()))
            .collect()
    }
}

/// Checks that every label of `g` is a power of the standard `p`-cycle.
pub fn check_cyclic_labels(levels: &Levels, p: u32, g: &Perm) -> Result<()> {
    let p = p as usize;
    for k in 0..levels.depth() {
        for r in 0..levels.size(k) {
            let img0 = levels.image_rank(g, k + 1, r * p);
            let base = img0 - img0 % p;
            let e = img0 % p;
            for c in 1..p {
                if levels.image_rank(g, k + 1, r * p + c) != base + (c + e) % p {
                    return Err(Error::NotWreathCyclic(format!(
                        "label at level {k}, vertex rank {r} is not a power of (1 2 ... {p})"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::enumerate_group;

    #[test]
    fn full_binary_wreath() {
        let lv = Arc::new(Levels::new(vec![1, 2, 4, 8]).unwrap());
        let swap = |lo: usize, b: usize| {
            let mut img: Vec<u32> = (0..8).collect();
            for i in 0..b {
                img.swap(lo + i, lo + b + i);
            }
            Perm::from_images(img).unwrap()
        };
        let gens = vec![swap(0, 4), swap(0, 2), swap(0, 1)];
        let pc = PcChain::new(lv, 2, &gens).unwrap();
        assert_eq!(pc.layer_ranks(), vec![1, 2, 4]);
        assert_eq!(pc.order(), BigUint::from(128u32));
        for g in enumerate_group(&gens, 8, 200).unwrap() {
            assert!(pc.contains(&g));
        }
    }

    #[test]
    fn rejects_non_cyclic_labels() {
        let lv = Arc::new(Levels::new(vec![1, 3]).unwrap());
        let t = Perm::parse_cycles("(1 2)", 3).unwrap();
        assert!(matches!(PcChain::new(lv, 3, &[t]), Err(Error::NotWreathCyclic(_))));
    }
}
