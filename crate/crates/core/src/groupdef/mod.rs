//! Group definitions: a recursion table, a generating set and the tree the
//! group acts on (possibly with levels deleted).

mod parse;
mod zoo;

use std::sync::Arc;

pub use parse::{parse_group, parse_group_from};
pub use zoo::{gs_log_index, zoo, GnParams, ZooParams};

use crate::autom::{standard_cycle, Automaton, Elem};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::tree::{KeptLevels, TreeShape};

/// Default cap on the number of vertices of a level the tool will act on.
pub const DEFAULT_DEGREE_LIMIT: usize = 100_000;

#[derive(Clone, Debug)]
pub struct GroupDef {
    source: String,
    aut: Arc<Automaton>,
    base: TreeShape,
    kept: Option<KeptLevels>,
    gens: Vec<(String, Elem)>,
    gn: Option<GnParams>,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|i| i * i <= p).all(|i| !p.is_multiple_of(i))
}

impl GroupDef {
    pub(crate) fn new(
        source: String,
        aut: Arc<Automaton>,
        gens: Vec<(String, Elem)>,
        gn: Option<GnParams>,
    ) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::InvalidParams("the generating set is empty".into()));
        }
        let base = TreeShape::regular(aut.arity())?;
        Ok(GroupDef { source, aut, base, kept: None, gens, gn })
    }

    /// Zoo tag or file path the definition came from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn automaton(&self) -> &Arc<Automaton> {
        &self.aut
    }

    pub fn gn_params(&self) -> Option<&GnParams> {
        self.gn.as_ref()
    }

    /// The tree the group acts on.
    pub fn shape(&self) -> TreeShape {
        match &self.kept {
            Some(k) => self.base.delete_levels(k).expect("validated kept levels"),
            None => self.base.clone(),
        }
    }

    /// The regular tree of the recursion table.
    pub fn base_shape(&self) -> &TreeShape {
        &self.base
    }

    pub fn kept_levels(&self) -> Option<&KeptLevels> {
        self.kept.as_ref()
    }

    pub fn is_deleted_view(&self) -> bool {
        self.kept.is_some()
    }

    pub fn generators(&self) -> &[(String, Elem)] {
        &self.gens
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.gens.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn degree_limit(&self) -> usize {
        self.aut.degree_limit()
    }

    /// Level of the regular tree corresponding to level `k` of [`GroupDef::shape`].
    pub fn base_depth(&self, k: usize) -> Result<usize> {
        match &self.kept {
            None => Ok(k),
            Some(kept) => {
                let l = kept.level(k).ok_or(Error::LevelOverflow(k))?;
                usize::try_from(l).map_err(|_| Error::LevelOverflow(k))
            }
        }
    }

    /// Number of vertices at level `k` of the acting tree, checked against the degree limit.
    pub fn level_count(&self, k: usize) -> Result<usize> {
        self.aut.level_degree(self.base_depth(k)?)
    }

    /// Generator actions on level `k` of the acting tree.
    pub fn generator_perms(&self, k: usize) -> Result<Vec<Perm>> {
        let n = self.base_depth(k)?;
        self.gens.iter().map(|(_, g)| Ok(g.truncate(n)?.perm)).collect()
    }

    /// `Some(p)` when the group acts on the `p`-adic tree (no deleted levels) with
    /// every label a power of `(1 2 ... p)`.
    pub fn wreath_prime(&self) -> Option<u64> {
        if self.kept.is_some() {
            return None;
        }
        let p = self.aut.arity();
        if !is_prime(p) {
            return None;
        }
        let sigma = standard_cycle(p as usize);
        let powers: Vec<Perm> = (0..p as i64).map(|e| sigma.pow(e)).collect();
        self.aut
            .named_states()
            .iter()
            .all(|s| powers.contains(&s.label))
            .then_some(p)
    }

    /// The same group acting on the tree obtained by keeping only the levels in `kept`.
    pub fn induce_on_deleted(&self, kept: &KeptLevels) -> Result<GroupDef> {
        let composed = match &self.kept {
            None => kept.clone(),
            Some(old) => {
                let mut lv = Vec::new();
                for k in 0.. {
                    match kept.level(k).and_then(|x| old.level(x as usize)) {
                        Some(l) if k < 64 => lv.push(l),
                        _ => break,
                    }
                }
                KeptLevels::listed(lv)?
            }
        };
        self.base.delete_levels(&composed)?;
        let mut out = self.clone();
        out.kept = if composed.is_identity() { None } else { Some(composed) };
        Ok(out)
    }

    /// Named generator element by name.
    pub fn generator(&self, name: &str) -> Option<&Elem> {
        self.gens.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(is_prime(2) && is_prime(5) && !is_prime(4) && !is_prime(1));
    }

    #[test]
    fn grigorchuk_even_levels() {
        let g = zoo("grigorchuk", &ZooParams::default()).unwrap();
        let even = g.induce_on_deleted(&"keep:0,2".parse().unwrap()).unwrap();
        assert_eq!(even.shape().regular_arity(), Some(4));
        assert_eq!(even.generator_perms(1).unwrap(), g.generator_perms(2).unwrap());
        assert_eq!(even.generator_perms(2).unwrap(), g.generator_perms(4).unwrap());
        let same = g.induce_on_deleted(&"keep:0,1".parse().unwrap()).unwrap();
        assert!(!same.is_deleted_view());
        assert_eq!(same.generator_perms(3).unwrap(), g.generator_perms(3).unwrap());
    }

    #[test]
    fn gn_on_deleted_tree() {
        let g = zoo("gn", &ZooParams { p: Some(5), n: Some(1), ..Default::default() }).unwrap();
        let t1 = g.induce_on_deleted(&KeptLevels::gn(5, 1).unwrap()).unwrap();
        let s = t1.shape();
        assert_eq!(s.arity_at(0).unwrap(), 25);
        assert_eq!(s.arity_at(1).unwrap(), 3125);
        assert_eq!(t1.base_depth(2).unwrap(), 7);
        assert_eq!(t1.level_count(1).unwrap(), 25);
        assert!(t1.wreath_prime().is_none());
        assert_eq!(g.wreath_prime(), Some(5));
    }
}
