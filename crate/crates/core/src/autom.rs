//! Tree automorphisms given by wreath recursion, evaluated lazily.
//!
//! Every state has a root label and one section word per child. Besides the
//! named states of a recursion table there are the level-indexed families
//! used by the `G_n` groups: `d_i(a)` and the states `b_n` together with the
//! intermediate states met while descending from `b_n` to level `l_n`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::tree::{gn_level, Vertex};

/// A state of the automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Named(u32),
    /// `d_i(a)`: acts as `a` on every subtree at level `i`.
    Diag(u64),
    /// `b_n`.
    BRoot(u64),
    /// Subtree of `b_n` whose leaves, `m` levels down, carry `d_start(a), d_{start+1}(a), ...`.
    BRange { n: u64, m: u64, start: u64 },
    /// Rightmost path of `b_n`, `m` levels above `b_{n+1}`.
    BTail { n: u64, m: u64 },
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub state: State,
    pub inv: bool,
}

impl Letter {
    pub fn new(state: State) -> Self {
        Letter { state, inv: false }
    }

    pub fn inverse(self) -> Self {
        Letter { state: self.state, inv: !self.inv }
    }
}

/// A named state of a recursion table: root label and one section word per child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedState {
    pub name: String,
    pub label: Perm,
    pub sections: Vec<Vec<Letter>>,
}

type MemoKey = (State, bool, usize);

/// A recursion table over a regular tree plus the truncation memo.
pub struct Automaton {
    arity: u64,
    states: Vec<NamedState>,
    degree_limit: usize,
    memo: RwLock<HashMap<MemoKey, Arc<Perm>>>,
}

impl fmt::Debug for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Automaton")
            .field("arity", &self.arity)
            .field("states", &self.states)
            .finish()
    }
}

fn saturating_pow(p: u64, e: u64) -> u64 {
    match u32::try_from(e) {
        Ok(e) => p.saturating_pow(e),
        Err(_) => u64::MAX,
    }
}

fn l_of(p: u64, n: u64) -> u64 {
    gn_level(p, n as usize).unwrap_or(u64::MAX)
}

/// The standard `d`-cycle `(1 2 ... d)`.
pub fn standard_cycle(d: usize) -> Perm {
    Perm::from_images_unchecked((0..d as u32).map(|i| (i + 1) % d as u32).collect())
}

impl Automaton {
    pub fn new(arity: u64, states: Vec<NamedState>, degree_limit: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::Shape(format!("arity {arity} < 2")));
        }
        for s in &states {
            if s.label.degree() as u64 != arity {
                return Err(Error::DegreeMismatch {
                    name: s.name.clone(),
                    degree: s.label.degree(),
                    arity: arity as usize,
                });
            }
            if s.sections.len() as u64 != arity {
                return Err(Error::InvalidParams(format!(
                    "state `{}` has {} sections, expected {arity}",
                    s.name,
                    s.sections.len()
                )));
            }
        }
        Ok(Automaton { arity, states, degree_limit, memo: RwLock::new(HashMap::new()) })
    }

    pub fn arity(&self) -> u64 {
        self.arity
    }

    pub fn degree_limit(&self) -> usize {
        self.degree_limit
    }

    pub fn named_states(&self) -> &[NamedState] {
        &self.states
    }

    pub fn state_by_name(&self, name: &str) -> Option<State> {
        self.states
            .iter()
            .position(|s| s.name == name)
            .map(|i| State::Named(i as u32))
    }

    pub fn state_name(&self, s: State) -> String {
        match s {
            State::Named(i) => self.states[i as usize].name.clone(),
            State::Diag(i) => format!("d_{i}(a)"),
            State::BRoot(n) => format!("b_{n}"),
            State::BRange { n, m, start } => format!("b_{n}[range {m},{start}]"),
            State::BTail { n, m } => format!("b_{n}[tail {m}]"),
            State::Trivial => "1".into(),
        }
    }

    /// Smallest level carrying a non-trivial label; the state acts trivially above it.
    pub fn first_active(&self, s: State) -> u64 {
        let p = self.arity;
        match s {
            State::Named(_) => 0,
            State::Trivial => u64::MAX,
            State::Diag(i) => i,
            State::BRoot(n) => l_of(p, n),
            State::BRange { m, start, .. } => m.saturating_add(start),
            State::BTail { n, m } => m.saturating_add(l_of(p, n + 1)),
        }
    }

    /// Root label and per-child section words of a state.
    pub fn expand(&self, s: State) -> (Perm, Vec<Vec<Letter>>) {
        let d = self.arity as usize;
        let id = Perm::identity(d);
        let none = || vec![Vec::new(); d];
        match s {
            State::Named(i) => {
                let st = &self.states[i as usize];
                (st.label.clone(), st.sections.clone())
            }
            State::Trivial => (id, none()),
            State::Diag(0) => (standard_cycle(d), none()),
            State::Diag(i) => (id, vec![vec![Letter::new(State::Diag(i - 1))]; d]),
            State::BRoot(n) => {
                let l = l_of(self.arity, n);
                let mut secs = none();
                secs[0] = vec![Letter::new(State::BRange { n, m: l - 1, start: 0 })];
                secs[d - 1] = vec![Letter::new(State::BTail { n, m: l - 1 })];
                (id, secs)
            }
            State::BRange { n, m, start } => {
                let step = saturating_pow(self.arity, m - 1);
                let secs = (0..d as u64)
                    .map(|c| {
                        let st = if m == 1 {
                            State::Diag(start.saturating_add(c))
                        } else {
                            State::BRange { n, m: m - 1, start: start.saturating_add(c.saturating_mul(step)) }
                        };
                        vec![Letter::new(st)]
                    })
                    .collect();
                (id, secs)
            }
            State::BTail { n, m } => {
                let mut secs = none();
                let next = if m == 1 { State::BRoot(n + 1) } else { State::BTail { n, m: m - 1 } };
                secs[d - 1] = vec![Letter::new(next)];
                (id, secs)
            }
        }
    }

    fn letter_label(&self, l: Letter) -> Perm {
        let (label, _) = self.expand(l.state);
        if l.inv {
            label.inverse()
        } else {
            label
        }
    }

    /// Section word of a single letter at child `c` (0-based), and the image child.
    fn letter_step(&self, l: Letter, c: u32) -> (Vec<Letter>, u32) {
        if l.state == State::Trivial {
            return (Vec::new(), c);
        }
        let (label, secs) = self.expand(l.state);
        if !l.inv {
            (secs[c as usize].clone(), label.image(c))
        } else {
            let pre = label.inverse().image(c);
            let w = secs[pre as usize].iter().rev().map(|x| x.inverse()).collect();
            (w, pre)
        }
    }

    /// Number of vertices at level `n`, checked against the degree limit.
    pub fn level_degree(&self, n: usize) -> Result<usize> {
        let deg = u32::try_from(n)
            .ok()
            .and_then(|e| (self.arity as usize).checked_pow(e));
        match deg {
            Some(x) if x <= self.degree_limit => Ok(x),
            _ => Err(Error::DegreeLimit {
                degree: match deg {
                    Some(x) => x.to_string(),
                    None => format!("{}^{}", self.arity, n),
                },
                limit: self.degree_limit,
            }),
        }
    }

    /// Action of a letter on level `n`.
    pub fn truncate_letter(&self, l: Letter, n: usize) -> Result<Arc<Perm>> {
        let size = self.level_degree(n)?;
        if self.first_active(l.state) >= n as u64 {
            return Ok(Arc::new(Perm::identity(size)));
        }
        let key = (l.state, l.inv, n);
        if let Some(p) = self.memo.read().expect("memo lock").get(&key) {
            return Ok(p.clone());
        }
        let perm = if l.inv {
            self.truncate_letter(l.inverse(), n)?.inverse()
        } else {
            let d = self.arity as usize;
            let block = size / d;
            let (label, secs) = self.expand(l.state);
            let mut images = vec![0u32; size];
            for (c, w) in secs.iter().enumerate() {
                let tau = self.truncate_word(w, n - 1)?;
                let base = label.image(c as u32) as usize * block;
                for r in 0..block {
                    images[c * block + r] = (base + tau.image(r as u32) as usize) as u32;
                }
            }
            Perm::from_images_unchecked(images)
        };
        let perm = Arc::new(perm);
        self.memo
            .write()
            .expect("memo lock")
            .entry(key)
            .or_insert_with(|| perm.clone());
        Ok(perm)
    }

    pub fn truncate_word(&self, w: &[Letter], n: usize) -> Result<Perm> {
        let size = self.level_degree(n)?;
        let mut acc: Option<Perm> = None;
        for &l in w {
            if self.first_active(l.state) >= n as u64 {
                continue;
            }
            let p = self.truncate_letter(l, n)?;
            acc = Some(match acc {
                None => (*p).clone(),
                Some(a) => a.mul(&p),
            });
        }
        Ok(acc.unwrap_or_else(|| Perm::identity(size)))
    }
}

/// Free reduction; trivial letters vanish.
pub fn reduce(word: Vec<Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(word.len());
    for l in word {
        if l.state == State::Trivial {
            continue;
        }
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Permutation of the level-`depth` vertices, indexed by lexicographic rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelPerm {
    pub depth: usize,
    pub perm: Perm,
}

impl LevelPerm {
    /// Induced action on level `k <= depth` (regular tree of arity `d`).
    pub fn restrict(&self, d: usize, k: usize) -> LevelPerm {
        let size = d.pow(k as u32);
        let block = self.perm.degree() / size;
        let images = (0..size)
            .map(|r| self.perm.image((r * block) as u32) / block as u32)
            .collect();
        LevelPerm { depth: k, perm: Perm::from_images_unchecked(images) }
    }
}

/// A group element as a word over the states of an automaton.
#[derive(Clone)]
pub struct Elem {
    aut: Arc<Automaton>,
    word: Vec<Letter>,
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Elem({self})")
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .word
            .iter()
            .map(|l| {
                let n = self.aut.state_name(l.state);
                if l.inv {
                    format!("{n}^-1")
                } else {
                    n
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl Elem {
    pub fn identity(aut: &Arc<Automaton>) -> Self {
        Elem { aut: aut.clone(), word: Vec::new() }
    }

    pub fn from_word(aut: &Arc<Automaton>, word: Vec<Letter>) -> Self {
        Elem { aut: aut.clone(), word: reduce(word) }
    }

    pub fn state(aut: &Arc<Automaton>, s: State) -> Self {
        Elem::from_word(aut, vec![Letter::new(s)])
    }

    pub fn automaton(&self) -> &Arc<Automaton> {
        &self.aut
    }

    pub fn word(&self) -> &[Letter] {
        &self.word
    }

    /// Apply `self`, then `other`.
    pub fn compose(&self, other: &Elem) -> Elem {
        let mut w = self.word.clone();
        w.extend_from_slice(&other.word);
        Elem::from_word(&self.aut, w)
    }

    pub fn invert(&self) -> Elem {
        let w = self.word.iter().rev().map(|l| l.inverse()).collect();
        Elem::from_word(&self.aut, w)
    }

    fn check_vertex(&self, v: &Vertex) -> Result<()> {
        for &x in v.word() {
            if x == 0 || u64::from(x) > self.aut.arity {
                return Err(Error::Vertex(format!("vertex {v} outside the {}-regular tree", self.aut.arity)));
            }
        }
        Ok(())
    }

    /// `(v^g, g|_v)` by letter-wise descent.
    fn descend(&self, v: &Vertex) -> Result<(Vertex, Elem)> {
        self.check_vertex(v)?;
        let mut word = self.word.clone();
        let mut image = Vec::with_capacity(v.level());
        for &x in v.word() {
            let mut cur = x - 1;
            let mut next = Vec::new();
            for &l in &word {
                let (sec, to) = self.aut.letter_step(l, cur);
                next.extend(sec);
                cur = to;
            }
            word = reduce(next);
            image.push(cur + 1);
        }
        Ok((Vertex::new(image), Elem { aut: self.aut.clone(), word }))
    }

    /// `v^g`.
    pub fn apply(&self, v: &Vertex) -> Result<Vertex> {
        Ok(self.descend(v)?.0)
    }

    /// `g|_v`.
    pub fn section(&self, v: &Vertex) -> Result<Elem> {
        Ok(self.descend(v)?.1)
    }

    /// `g|_v^1`, the permutation of the children of `v`.
    pub fn label(&self, v: &Vertex) -> Result<Perm> {
        let s = self.section(v)?;
        let d = self.aut.arity as usize;
        Ok(s.word
            .iter()
            .fold(Perm::identity(d), |acc, &l| acc.mul(&self.aut.letter_label(l))))
    }

    pub fn truncate(&self, n: usize) -> Result<LevelPerm> {
        Ok(LevelPerm { depth: n, perm: self.aut.truncate_word(&self.word, n)? })
    }

    /// Equality of the actions on level `n`.
    pub fn eq_at_depth(&self, other: &Elem, n: usize) -> Result<bool> {
        Ok(self.truncate(n)? == other.truncate(n)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(i: u32) -> Letter {
        Letter::new(State::Named(i))
    }

    /// Basilica: a = (1, b), b = (1, a) sigma.
    fn basilica() -> Arc<Automaton> {
        let id = Perm::identity(2);
        let sw = standard_cycle(2);
        Arc::new(
            Automaton::new(
                2,
                vec![
                    NamedState { name: "a".into(), label: id, sections: vec![vec![], vec![l(1)]] },
                    NamedState { name: "b".into(), label: sw, sections: vec![vec![], vec![l(0)]] },
                ],
                1 << 20,
            )
            .unwrap(),
        )
    }

    fn gn5() -> Arc<Automaton> {
        Arc::new(Automaton::new(5, vec![], 1 << 20).unwrap())
    }

    #[test]
    fn basilica_sections() {
        let aut = basilica();
        let a = Elem::state(&aut, State::Named(0));
        let b = Elem::state(&aut, State::Named(1));
        let two: Vertex = "2".parse().unwrap();
        assert_eq!(a.section(&two).unwrap().word(), &[l(1)]);
        assert_eq!(b.section(&two).unwrap().word(), &[l(0)]);
        assert_eq!(a.label(&two).unwrap(), standard_cycle(2));
        assert_eq!(b.apply(&two).unwrap(), "1".parse().unwrap());
        let bb = b.compose(&b);
        assert!(bb.truncate(1).unwrap().perm.is_identity());
    }

    #[test]
    fn inverse_cancels() {
        let aut = basilica();
        let b = Elem::state(&aut, State::Named(1));
        assert!(b.compose(&b.invert()).word().is_empty());
        assert!(b.truncate(6).unwrap().perm.mul(&b.invert().truncate(6).unwrap().perm).is_identity());
    }

    #[test]
    fn restrict_is_prefix_compatible() {
        let aut = basilica();
        let w = Elem::from_word(&aut, vec![l(0), l(1).inverse(), l(1), l(1), l(0)]);
        let t5 = w.truncate(5).unwrap();
        for k in 0..5 {
            assert_eq!(t5.restrict(2, k), w.truncate(k).unwrap());
        }
    }

    #[test]
    fn diag_and_b_states() {
        let aut = gn5();
        let d1 = Elem::state(&aut, State::Diag(1));
        assert!(d1.truncate(1).unwrap().perm.is_identity());
        assert_eq!(d1.label(&"3".parse().unwrap()).unwrap(), standard_cycle(5));
        let b1 = Elem::state(&aut, State::BRoot(1));
        assert!(b1.truncate(2).unwrap().perm.is_identity());
        assert!(!b1.truncate(3).unwrap().perm.is_identity());
        // sections at level 2: d_0(a), ..., d_4(a), then trivial, then b_2 at the end
        for i in 0..5u32 {
            let v = Vertex::new(vec![1, i + 1]);
            assert_eq!(b1.section(&v).unwrap().word(), &[Letter::new(State::Diag(i as u64))]);
        }
        assert!(b1.section(&Vertex::new(vec![2, 1])).unwrap().word().is_empty());
        assert_eq!(b1.section(&Vertex::new(vec![5, 5])).unwrap().word(), &[Letter::new(State::BRoot(2))]);
        assert_eq!(aut.first_active(State::BRoot(1)), 2);
        assert_eq!(aut.first_active(State::BRoot(2)), 5);
        assert_eq!(aut.first_active(State::BRoot(3)), 625);
    }

    #[test]
    fn degree_limit_is_enforced() {
        let aut = Arc::new(Automaton::new(5, vec![], 1000).unwrap());
        let a = Elem::state(&aut, State::Diag(0));
        assert!(a.truncate(4).is_ok());
        assert!(matches!(a.truncate(5), Err(Error::DegreeLimit { .. })));
    }
}
