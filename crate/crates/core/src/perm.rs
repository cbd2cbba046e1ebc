//! Permutations of `0..n` under the right-action convention: `x^(gh) = (x^g)^h`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    /// Builds a permutation from its image list, checking bijectivity.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::InvalidParams(format!("image list is not a permutation of 0..{n}")));
            }
            seen[x] = true;
        }
        Ok(Perm(images))
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        Perm(images)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    #[inline]
    pub fn image(&self, x: u32) -> u32 {
        self.0[x as usize]
    }

    /// `self` followed by `other`.
    pub fn mul(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn pow(&self, e: i64) -> Perm {
        let mut base = if e < 0 { self.inverse() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Perm::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `g^h = h^-1 g h`.
    pub fn conj(&self, h: &Perm) -> Perm {
        h.inverse().mul(self).mul(h)
    }

    /// `[g, h] = g^-1 h^-1 g h`.
    pub fn commutator(&self, h: &Perm) -> Perm {
        self.inverse().mul(&h.inverse()).mul(self).mul(h)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] as usize == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cyc.push(x as u32);
                x = self.0[x] as usize;
            }
            out.push(cyc);
        }
        out
    }

    pub fn order(&self) -> BigUint {
        self.cycles()
            .iter()
            .fold(BigUint::one(), |acc, c| acc.lcm(&BigUint::from(c.len())))
    }

    /// Parses 1-based cycle notation such as `(1 2)(3 4 5)` or `id`.
    pub fn parse_cycles(s: &str, degree: usize) -> Result<Perm> {
        let s = s.trim();
        let mut images: Vec<u32> = (0..degree as u32).collect();
        if s == "id" || s.is_empty() {
            return Ok(Perm(images));
        }
        let bad = |m: String| Error::InvalidParams(m);
        let mut rest = s;
        let mut seen = vec![false; degree];
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| bad(format!("expected `(` in cycle notation {s:?}")))?;
            let close = open
                .find(')')
                .ok_or_else(|| bad(format!("unclosed cycle in {s:?}")))?;
            let pts = open[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| bad(format!("bad point {t:?} in {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            for &x in &pts {
                if x == 0 || x > degree {
                    return Err(bad(format!("point {x} outside 1..{degree}")));
                }
                if seen[x - 1] {
                    return Err(bad(format!("point {x} repeated in {s:?}")));
                }
                seen[x - 1] = true;
            }
            for (i, &x) in pts.iter().enumerate() {
                images[x - 1] = (pts[(i + 1) % pts.len()] - 1) as u32;
            }
            rest = open[close + 1..].trim_start();
        }
        Ok(Perm(images))
    }

    /// 1-based cycle notation, `id` for the identity.
    pub fn to_cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "id".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                let pts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
                format!("({})", pts.join(" "))
            })
            .collect()
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycle_string())
    }
}

/// All elements of the group generated by `gens`, or `None` past `limit` elements.
pub fn enumerate_group(gens: &[Perm], degree: usize, limit: usize) -> Option<Vec<Perm>> {
    let id = Perm::identity(degree);
    let mut seen: HashSet<Perm> = HashSet::new();
    let mut order = vec![id.clone()];
    seen.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in gens {
            let h = g.mul(s);
            if seen.insert(h.clone()) {
                if seen.len() > limit {
                    return None;
                }
                order.push(h.clone());
                queue.push_back(h);
            }
        }
    }
    Some(order)
}

/// Orbit of `x` under the group generated by `gens`, in discovery order.
pub fn orbit(gens: &[Perm], x: u32) -> Vec<u32> {
    let mut seen = HashSet::from([x]);
    let mut out = vec![x];
    let mut i = 0;
    while i < out.len() {
        let y = out[i];
        for g in gens {
            let z = g.image(y);
            if seen.insert(z) {
                out.push(z);
            }
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_action_composition() {
        let a = Perm::parse_cycles("(1 2)", 3).unwrap();
        let b = Perm::parse_cycles("(2 3)", 3).unwrap();
        // 1 -a-> 2 -b-> 3
        assert_eq!(a.mul(&b).image(0), 2);
        assert_eq!(a.mul(&b).to_cycle_string(), "(1 3 2)");
    }

    #[test]
    fn cycle_roundtrip() {
        let p = Perm::parse_cycles("(1 2)(3 4 5)", 5).unwrap();
        assert_eq!(p.to_cycle_string(), "(1 2)(3 4 5)");
        assert_eq!(p.order(), BigUint::from(6u32));
        assert_eq!(Perm::parse_cycles("id", 4).unwrap(), Perm::identity(4));
        assert!(Perm::parse_cycles("(1 6)", 5).is_err());
        assert!(Perm::parse_cycles("(1 2)(2 3)", 5).is_err());
        assert!(Perm::parse_cycles("(1 2", 5).is_err());
    }

    #[test]
    fn powers_and_inverse() {
        let p = Perm::parse_cycles("(1 2 3 4 5)", 5).unwrap();
        assert!(p.pow(5).is_identity());
        assert_eq!(p.pow(-1), p.inverse());
        assert!(p.mul(&p.inverse()).is_identity());
        assert!(p.commutator(&p.pow(2)).is_identity());
    }

    #[test]
    fn sym3_enumeration() {
        let a = Perm::parse_cycles("(1 2)", 3).unwrap();
        let b = Perm::parse_cycles("(1 2 3)", 3).unwrap();
        assert_eq!(enumerate_group(&[a.clone(), b], 3, 100).unwrap().len(), 6);
        assert_eq!(orbit(&[a], 2), vec![2]);
    }
}
