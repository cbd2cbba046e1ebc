//! Spherically homogeneous rooted trees: arity sequences, vertex addressing
//! and deletion of levels.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on a single arity.
pub const DEFAULT_ARITY_LIMIT: u64 = 1_000_000;

/// `l_1 = 2`, `l_{j+1} = p^(l_j - 1)`. `None` once the value leaves `u64`.
pub fn gn_level(p: u64, j: usize) -> Option<u64> {
    if j == 0 {
        return None;
    }
    let mut l: u64 = 2;
    for _ in 1..j {
        let e = u32::try_from(l - 1).ok()?;
        l = p.checked_pow(e)?;
    }
    Some(l)
}

/// `t_0 = 0`, `t_k = l_n + ... + l_{n+k-1}`.
pub fn gn_kept_level(p: u64, n: usize, k: usize) -> Option<u64> {
    let mut t: u64 = 0;
    for i in 0..k {
        t = t.checked_add(gn_level(p, n + i)?)?;
    }
    Some(t)
}

/// A strictly increasing sequence of kept levels starting at 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeptLevels {
    /// Listed prefix; afterwards the last gap repeats (a single `[0]` keeps every level).
    Listed(Vec<u64>),
    /// The levels `t_k^n` for the groups `G_n` over the `p`-adic tree.
    Gn { p: u64, n: usize },
}

impl KeptLevels {
    pub fn listed(levels: Vec<u64>) -> Result<Self> {
        if levels.first() != Some(&0) {
            return Err(Error::Shape("kept levels must start at 0".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Shape(format!(
                "kept levels must be strictly increasing, got {levels:?}"
            )));
        }
        Ok(KeptLevels::Listed(levels))
    }

    pub fn gn(p: u64, n: usize) -> Result<Self> {
        if p < 2 || n == 0 {
            return Err(Error::Shape(format!("keep:gn needs p >= 2 and n >= 1 (got p={p}, n={n})")));
        }
        Ok(KeptLevels::Gn { p, n })
    }

    /// Original level of new level `k`, or `None` when it does not fit in `u64`.
    pub fn level(&self, k: usize) -> Option<u64> {
        match self {
            KeptLevels::Listed(v) => {
                if k < v.len() {
                    return Some(v[k]);
                }
                let last = *v.last().expect("non-empty");
                let gap = if v.len() >= 2 { last - v[v.len() - 2] } else { 1 };
                let extra = u64::try_from(k - v.len() + 1).ok()?;
                last.checked_add(gap.checked_mul(extra)?)
            }
            KeptLevels::Gn { p, n } => gn_kept_level(*p, *n, k),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, KeptLevels::Listed(v) if v.len() == 1 || (v.len() == 2 && v[1] == 1))
    }
}

impl fmt::Display for KeptLevels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeptLevels::Listed(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "keep:{}", s.join(","))
            }
            KeptLevels::Gn { p, n } => write!(f, "keep:gn(p={p},n={n})"),
        }
    }
}

impl FromStr for KeptLevels {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("keep:")
            .ok_or_else(|| Error::Shape(format!("kept-level literal must start with `keep:`: {s:?}")))?;
        if let Some(args) = body.strip_prefix("gn(").and_then(|r| r.strip_suffix(')')) {
            let mut p = None;
            let mut n = None;
            for part in args.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::Shape(format!("bad gn argument {part:?}")))?;
                let v: u64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Shape(format!("bad gn argument {part:?}")))?;
                match k.trim() {
                    "p" => p = Some(v),
                    "n" => n = Some(v as usize),
                    _ => return Err(Error::Shape(format!("unknown gn argument {k:?}"))),
                }
            }
            let (p, n) = p
                .zip(n)
                .ok_or_else(|| Error::Shape("keep:gn needs both p and n".into()))?;
            return KeptLevels::gn(p, n);
        }
        let levels = body
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Shape(format!("bad kept level {x:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        KeptLevels::listed(levels)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum ShapeKind {
    Periodic { head: Vec<u64>, tail: Vec<u64> },
    Deleted { base: Box<TreeShape>, kept: KeptLevels },
}

/// The arity sequence of a spherically homogeneous rooted tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeShape {
    kind: ShapeKind,
    limit: u64,
}

impl TreeShape {
    pub fn regular(d: u64) -> Result<Self> {
        Self::periodic(Vec::new(), vec![d])
    }

    pub fn periodic(head: Vec<u64>, tail: Vec<u64>) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::Shape("the repeating tail must be non-empty".into()));
        }
        for (level, &a) in head.iter().chain(tail.iter()).enumerate() {
            if a < 2 {
                return Err(Error::Shape(format!("arity {a} < 2")));
            }
            if a > DEFAULT_ARITY_LIMIT {
                return Err(Error::ArityLimit { level, arity: a.to_string(), limit: DEFAULT_ARITY_LIMIT });
            }
        }
        Ok(TreeShape { kind: ShapeKind::Periodic { head, tail }, limit: DEFAULT_ARITY_LIMIT })
    }

    pub fn with_arity_limit(mut self, limit: u64) -> Self {
        self.limit = limit;
        self
    }

    pub fn arity_limit(&self) -> u64 {
        self.limit
    }

    /// `Some(d)` when every level has arity `d`.
    pub fn regular_arity(&self) -> Option<u64> {
        match &self.kind {
            ShapeKind::Periodic { head, tail } => {
                let d = tail[0];
                (tail.iter().all(|&a| a == d) && head.iter().all(|&a| a == d)).then_some(d)
            }
            ShapeKind::Deleted { base, kept } => {
                let d = base.regular_arity()?;
                let KeptLevels::Listed(v) = kept else { return None };
                let gap = if v.len() >= 2 { v[1] - v[0] } else { 1 };
                if v.windows(2).any(|w| w[1] - w[0] != gap) {
                    return None;
                }
                let a = d.checked_pow(u32::try_from(gap).ok()?)?;
                (a <= self.limit).then_some(a)
            }
        }
    }

    /// The tree and kept levels this shape was derived from, if any.
    pub fn deletion(&self) -> Option<(&TreeShape, &KeptLevels)> {
        match &self.kind {
            ShapeKind::Deleted { base, kept } => Some((base, kept)),
            ShapeKind::Periodic { .. } => None,
        }
    }

    fn periodic_arity(head: &[u64], tail: &[u64], level: usize) -> u64 {
        if level < head.len() {
            head[level]
        } else {
            tail[(level - head.len()) % tail.len()]
        }
    }

    /// Number of children of a vertex at `level`.
    pub fn arity_at(&self, level: usize) -> Result<u64> {
        match &self.kind {
            ShapeKind::Periodic { head, tail } => Ok(Self::periodic_arity(head, tail, level)),
            ShapeKind::Deleted { .. } => {
                let big = self.arity_big(level)?;
                match big.to_u64() {
                    Some(a) if a <= self.limit => Ok(a),
                    _ => Err(Error::ArityLimit {
                        level,
                        arity: display_big(&big),
                        limit: self.limit,
                    }),
                }
            }
        }
    }

    /// Exact arity, for levels whose arity exceeds the cap.
    pub fn arity_big(&self, level: usize) -> Result<BigUint> {
        match &self.kind {
            ShapeKind::Periodic { head, tail } => {
                Ok(BigUint::from(Self::periodic_arity(head, tail, level)))
            }
            ShapeKind::Deleted { base, kept } => {
                let lo = kept.level(level).ok_or(Error::LevelOverflow(level))?;
                let hi = kept.level(level + 1).ok_or(Error::LevelOverflow(level + 1))?;
                if let Some(d) = base.regular_arity() {
                    let e = u32::try_from(hi - lo).map_err(|_| Error::LevelOverflow(level + 1))?;
                    return Ok(BigUint::from(d).pow(e));
                }
                let mut prod = BigUint::one();
                for l in lo..hi {
                    prod *= base.arity_big(usize::try_from(l).map_err(|_| Error::LevelOverflow(level))?)?;
                }
                Ok(prod)
            }
        }
    }

    /// `N_n`, the number of vertices at level `n`.
    pub fn level_size(&self, n: usize) -> Result<BigUint> {
        match &self.kind {
            ShapeKind::Periodic { head, tail } => {
                let mut prod = BigUint::one();
                for l in 0..n {
                    prod *= Self::periodic_arity(head, tail, l);
                }
                Ok(prod)
            }
            ShapeKind::Deleted { base, kept } => {
                let l = kept.level(n).ok_or(Error::LevelOverflow(n))?;
                base.level_size(usize::try_from(l).map_err(|_| Error::LevelOverflow(n))?)
            }
        }
    }

    /// `N_n` as a machine integer, failing if it exceeds `limit`.
    pub fn level_count(&self, n: usize, limit: usize) -> Result<usize> {
        let big = self.level_size(n)?;
        match big.to_usize() {
            Some(c) if c <= limit => Ok(c),
            _ => Err(Error::DegreeLimit { degree: display_big(&big), limit }),
        }
    }

    /// Original level of level `k` of this shape (identity for non-deleted shapes).
    pub fn base_level(&self, k: usize) -> Result<usize> {
        match &self.kind {
            ShapeKind::Periodic { .. } => Ok(k),
            ShapeKind::Deleted { base, kept } => {
                let l = kept.level(k).ok_or(Error::LevelOverflow(k))?;
                base.base_level(usize::try_from(l).map_err(|_| Error::LevelOverflow(k))?)
            }
        }
    }

    /// The innermost non-deleted shape.
    pub fn root_shape(&self) -> &TreeShape {
        match &self.kind {
            ShapeKind::Periodic { .. } => self,
            ShapeKind::Deleted { base, .. } => base.root_shape(),
        }
    }

    /// Keep only the levels in `kept`; arities of merged levels multiply.
    pub fn delete_levels(&self, kept: &KeptLevels) -> Result<TreeShape> {
        if kept.level(0) != Some(0) {
            return Err(Error::Shape("kept levels must start at 0".into()));
        }
        if let KeptLevels::Listed(v) = kept {
            KeptLevels::listed(v.clone())?;
        }
        if kept.is_identity() {
            return Ok(self.clone());
        }
        Ok(TreeShape {
            kind: ShapeKind::Deleted { base: Box::new(self.clone()), kept: kept.clone() },
            limit: self.limit,
        })
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        v.0.iter().enumerate().all(|(i, &x)| {
            x >= 1 && self.arity_at(i).map(|a| u64::from(x) <= a).unwrap_or(false)
        })
    }

    pub fn child(&self, v: &Vertex, i: u32) -> Result<Vertex> {
        let a = self.arity_at(v.level())?;
        if i == 0 || u64::from(i) > a {
            return Err(Error::Vertex(format!("child index {i} out of range 1..={a}")));
        }
        let mut w = v.0.clone();
        w.push(i);
        Ok(Vertex(w))
    }

    pub fn parent(&self, v: &Vertex) -> Result<Vertex> {
        if v.is_root() {
            return Err(Error::Vertex("the root has no parent".into()));
        }
        Ok(Vertex(v.0[..v.0.len() - 1].to_vec()))
    }

    /// Lexicographic rank of `v` among the vertices of its level (0-based).
    pub fn index_of(&self, v: &Vertex) -> Result<usize> {
        let mut rank: usize = 0;
        for (i, &x) in v.0.iter().enumerate() {
            let a = self.arity_at(i)?;
            if x == 0 || u64::from(x) > a {
                return Err(Error::Vertex(format!("entry {x} at position {i} out of range 1..={a}")));
            }
            rank = rank
                .checked_mul(a as usize)
                .and_then(|r| r.checked_add(x as usize - 1))
                .ok_or(Error::LevelOverflow(v.level()))?;
        }
        Ok(rank)
    }

    /// Inverse of [`TreeShape::index_of`].
    pub fn vertex_at(&self, level: usize, index: usize) -> Result<Vertex> {
        let size = self.level_count(level, usize::MAX)?;
        if index >= size {
            return Err(Error::Vertex(format!("index {index} out of range for level {level} of size {size}")));
        }
        let mut word = vec![0u32; level];
        let mut rest = index;
        for i in (0..level).rev() {
            let a = self.arity_at(i)? as usize;
            word[i] = (rest % a) as u32 + 1;
            rest /= a;
        }
        Ok(Vertex(word))
    }

    /// Literal form accepted by [`TreeShape::from_str`] (deleted shapes print their base).
    pub fn literal(&self) -> String {
        match &self.kind {
            ShapeKind::Periodic { head, tail } => {
                if let Some(d) = self.regular_arity() {
                    return format!("regular:{d}");
                }
                let j = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                format!("arities:{};tail:{}", j(head), j(tail))
            }
            ShapeKind::Deleted { base, kept } => format!("{} {}", base.literal(), kept),
        }
    }
}

impl FromStr for TreeShape {
    type Err = Error;

    /// `regular:<d>` or `arities:<a0,a1,...>;tail:<t0,...>`, optionally followed
    /// by a space and a `keep:` literal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (main, keep) = match s.split_once(char::is_whitespace) {
            Some((m, k)) => (m, Some(k.trim())),
            None => (s, None),
        };
        let nums = |x: &str| -> Result<Vec<u64>> {
            if x.trim().is_empty() {
                return Ok(Vec::new());
            }
            x.split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Shape(format!("bad arity {t:?}"))))
                .collect()
        };
        let shape = if let Some(d) = main.strip_prefix("regular:") {
            TreeShape::regular(d.trim().parse().map_err(|_| Error::Shape(format!("bad arity {d:?}")))?)?
        } else if let Some(rest) = main.strip_prefix("arities:") {
            let (head, tail) = rest
                .split_once(";tail:")
                .ok_or_else(|| Error::Shape(format!("expected `;tail:` in {main:?}")))?;
            TreeShape::periodic(nums(head)?, nums(tail)?)?
        } else {
            return Err(Error::Shape(format!("unknown tree literal {main:?}")));
        };
        match keep {
            Some(k) => shape.delete_levels(&k.parse()?),
            None => Ok(shape),
        }
    }
}

pub(crate) fn display_big(b: &BigUint) -> String {
    let s = b.to_string();
    if s.len() <= 40 {
        s
    } else {
        format!("{}...({} digits)", &s[..12], s.len())
    }
}

/// A vertex as a word of 1-based child indices; the empty word is the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex(pub Vec<u32>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn new(word: Vec<u32>) -> Self {
        Vertex(word)
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn word(&self) -> &[u32] {
        &self.0
    }

    pub fn concat(&self, other: &Vertex) -> Vertex {
        let mut w = self.0.clone();
        w.extend_from_slice(&other.0);
        Vertex(w)
    }

    pub fn prefix(&self, len: usize) -> Vertex {
        Vertex(self.0[..len].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Vertex) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Neither is a descendant of the other.
    pub fn incomparable(&self, other: &Vertex) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// `root`, the empty string, or dot-separated 1-based indices such as `1.2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "root" {
            return Ok(Vertex::root());
        }
        s.split(['.', '·'])
            .map(|x| {
                x.trim()
                    .parse::<u32>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| Error::Vertex(format!("bad vertex {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Vertex)
    }
}
