//! Index sequences `log |G : St_G(n)|`, the `s_n` sequence and Hausdorff
//! dimension estimates.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupdef::{gs_log_index, is_prime, GroupDef};
use crate::perm::Perm;
use crate::quotient::{congruence_quotient, exact_log};
use crate::tree::TreeShape;

/// Default cap on the number of cosets enumerated by [`abelian_layer_log_index`].
pub const DEFAULT_COSET_CAP: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ambient {
    /// Iterated wreath product of `C_p`, logs in base `p`.
    WreathCyclic,
    /// The full automorphism group of the tree.
    Full,
}

impl FromStr for Ambient {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wp" | "wreath-cyclic" => Ok(Ambient::WreathCyclic),
            "full" => Ok(Ambient::Full),
            _ => Err(Error::InvalidParams(format!("unknown ambient `{s}` (expected wp or full)"))),
        }
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ambient::WreathCyclic => "wp",
            Ambient::Full => "full",
        })
    }
}

/// A logarithm, exact when it is an integer in the chosen base.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum LogValue {
    Exact(u64),
    Real(f64),
}

impl LogValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            LogValue::Exact(v) => v as f64,
            LogValue::Real(v) => v,
        }
    }

    pub fn exact(&self) -> Option<u64> {
        match *self {
            LogValue::Exact(v) => Some(v),
            LogValue::Real(_) => None,
        }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogValue::Exact(v) => write!(f, "{v}"),
            LogValue::Real(v) => write!(f, "{v:.6}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LogIndexEntry {
    pub depth: usize,
    pub value: LogValue,
    pub algorithm: &'static str,
}

/// `log |G : St_G(n)|` for `n = 0..=max_depth`.
#[derive(Clone, Debug, Serialize)]
pub struct LogIndexSeq {
    pub group: String,
    pub ambient: Ambient,
    /// Base of the logarithms.
    pub base: u64,
    #[serde(skip)]
    pub shape: TreeShape,
    pub entries: Vec<LogIndexEntry>,
}

impl LogIndexSeq {
    pub fn values(&self) -> Vec<LogValue> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn exact_values(&self) -> Option<Vec<u64>> {
        self.entries.iter().map(|e| e.value.exact()).collect()
    }
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 900;
        (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Arity of the regular tree below `shape`, together with the base level of view level `n`.
fn base_tree(shape: &TreeShape, n: usize) -> Result<(Option<u64>, usize)> {
    match shape.deletion() {
        Some((base, _)) => Ok((base.regular_arity(), shape.base_level(n)?)),
        None => Ok((shape.regular_arity(), n)),
    }
}

fn log_base(shape: &TreeShape) -> u64 {
    match shape.deletion() {
        Some((base, _)) => base.regular_arity().unwrap_or(shape.arity_at(0).unwrap_or(2)),
        None => shape.regular_arity().unwrap_or(shape.arity_at(0).unwrap_or(2)),
    }
}

/// `log |A : St_A(n)|` for the ambient group `A` acting on `shape`.
///
/// On a tree with deleted levels the wreath-cyclic ambient is the closure of
/// `W_p` acting on the kept levels, whose index is `(p^m - 1)/(p - 1)` for the
/// base level `m` of view level `n`.
pub fn ambient_log_index(shape: &TreeShape, ambient: Ambient, n: usize) -> Result<LogValue> {
    match ambient {
        Ambient::WreathCyclic => {
            let (p, m) = base_tree(shape, n)?;
            let p = p.filter(|&p| is_prime(p)).ok_or_else(|| {
                Error::NotWreathCyclic(format!("tree {} is not a p-adic tree", shape.literal()))
            })?;
            let num = BigUint::from(p).pow(m as u32) - 1u32;
            (num / (p - 1)).to_u64().map(LogValue::Exact).ok_or(Error::LevelOverflow(n))
        }
        Ambient::Full => {
            let b = (log_base(shape) as f64).ln();
            let mut total = 0.0;
            for k in 0..n {
                let count = shape.level_size(k)?.to_f64().unwrap_or(f64::INFINITY);
                total += count * ln_factorial(shape.arity_at(k)?) / b;
            }
            Ok(LogValue::Real(total))
        }
    }
}

/// `log |G : St_G(n)|` for `n = 0..=max_depth` from the orders of congruence quotients.
pub fn log_index_sequence(def: &GroupDef, max_depth: usize, ambient: Ambient) -> Result<LogIndexSeq> {
    let shape = def.shape();
    let base = log_base(&shape);
    if ambient == Ambient::WreathCyclic && !is_prime(base) {
        return Err(Error::NotWreathCyclic(format!("tree {} is not a p-adic tree", shape.literal())));
    }
    let mut entries = Vec::with_capacity(max_depth + 1);
    let top = congruence_quotient(def, max_depth)?;
    if let (Ambient::WreathCyclic, Some(pc)) = (ambient, top.pc()) {
        for n in 0..=max_depth {
            let value = LogValue::Exact(pc.log_index_of_level_stabilizer(n) as u64);
            entries.push(LogIndexEntry { depth: n, value, algorithm: "layered-chain" });
        }
    } else {
        for n in 0..=max_depth {
            let order = if n == max_depth { top.order() } else { congruence_quotient(def, n)?.order() };
            let value = match ambient {
                Ambient::WreathCyclic => {
                    let v = exact_log(&order, base).ok_or_else(|| {
                        Error::NotWreathCyclic(format!("|G:St_G({n})| = {order} is not a power of {base}"))
                    })?;
                    LogValue::Exact(v as u64)
                }
                Ambient::Full => LogValue::Real(ln_big(&order) / (base as f64).ln()),
            };
            entries.push(LogIndexEntry { depth: n, value, algorithm: "schreier-sims" });
        }
    }
    Ok(LogIndexSeq { group: def.source().to_string(), ambient, base, shape, entries })
}

/// Index sequence of the group `G_S` with `S_0 = <σ>`, `S_1` diagonal and
/// `S_n = S_{n-1}^p` beyond, read off from its layer structure.
pub fn gs_oracle_sequence(p: u64, max_depth: usize) -> Result<LogIndexSeq> {
    if !is_prime(p) {
        return Err(Error::InvalidParams(format!("p = {p} is not prime")));
    }
    let entries = (0..=max_depth)
        .map(|n| {
            let value = LogValue::Exact(gs_log_index(p, n)?);
            Ok(LogIndexEntry { depth: n, value, algorithm: "oracle" })
        })
        .collect::<Result<_>>()?;
    Ok(LogIndexSeq {
        group: format!("oracle:gs(p={p})"),
        ambient: Ambient::WreathCyclic,
        base: p,
        shape: TreeShape::regular(p)?,
        entries,
    })
}

/// `s_n = p (v_n - v_{n-1}) - (v_{n+1} - v_n)` for `n = 1..len-2`.
pub fn s_sequence(seq: &LogIndexSeq) -> Result<Vec<i64>> {
    if seq.ambient != Ambient::WreathCyclic || seq.shape.deletion().is_some() {
        return Err(Error::Precondition("s_n is defined for exact logs on the p-adic tree".into()));
    }
    let v = seq
        .exact_values()
        .ok_or_else(|| Error::Precondition("s_n needs exact base-p logs".into()))?;
    let p = seq.base as i64;
    Ok((1..v.len().saturating_sub(1))
        .map(|n| {
            let (a, b, c) = (v[n - 1] as i64, v[n] as i64, v[n + 1] as i64);
            p * (b - a) - (c - b)
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct HdimRow {
    pub depth: usize,
    pub log_index: LogValue,
    pub ambient_log: LogValue,
    pub s_n: Option<i64>,
    /// `1 - sum_{k <= n} s_k / p^k`, exact.
    pub partial_sum_exact: Option<String>,
    pub partial_sum: Option<f64>,
    /// `log_index / ambient_log`; undefined at depth 0.
    pub trace: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HdimReport {
    pub group: String,
    pub ambient: Ambient,
    pub base: u64,
    pub max_depth: usize,
    pub rows: Vec<HdimRow>,
    pub s: Vec<i64>,
    /// `s_1 = p - 1`, equivalently `|G : St_G(2)| = p^2` for level-transitive `G`.
    pub s1_is_p_minus_1: Option<bool>,
    pub notes: Vec<String>,
}

impl HdimReport {
    /// The last partial sum, an upper bound for the dimension of the closure.
    pub fn last_partial_sum(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.partial_sum)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["depth", "log_index", "ambient_log", "s_n", "partial_sum", "trace"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.depth.to_string(),
                r.log_index.to_string(),
                r.ambient_log.to_string(),
                r.s_n.map(|s| s.to_string()).unwrap_or_default(),
                r.partial_sum.map(|s| format!("{s:.6}")).unwrap_or_default(),
                r.trace.map(|t| format!("{t:.6}")).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Partial sums, trace and the `s_1` linkage for an index sequence.
pub fn hdim_report(seq: &LogIndexSeq) -> Result<HdimReport> {
    let max_depth = seq.entries.len().saturating_sub(1);
    let mut notes = Vec::new();
    let s = match s_sequence(seq) {
        Ok(s) => s,
        Err(e) => {
            notes.push(format!("no s_n sequence: {e}"));
            Vec::new()
        }
    };
    let p = BigInt::from(seq.base);
    let mut sum = BigRational::one();
    let mut pk = BigInt::one();
    let mut rows = Vec::with_capacity(max_depth + 1);
    for e in &seq.entries {
        let n = e.depth;
        let ambient_log = ambient_log_index(&seq.shape, seq.ambient, n)?;
        let s_n = (n >= 1).then(|| s.get(n - 1).copied()).flatten();
        let (partial_sum_exact, partial_sum) = match s_n {
            Some(sn) => {
                pk *= &p;
                sum -= BigRational::new(BigInt::from(sn), pk.clone());
                (Some(sum.to_string()), Some(rational_to_f64(&sum)))
            }
            None => (None, None),
        };
        let trace = (ambient_log.as_f64() > 0.0).then(|| e.value.as_f64() / ambient_log.as_f64());
        rows.push(HdimRow { depth: n, log_index: e.value, ambient_log, s_n, partial_sum_exact, partial_sum, trace });
    }
    if !s.is_empty() {
        notes.push(
            "partial sums are upper bounds for the dimension of the closure in W_p when the group is self-similar"
                .into(),
        );
        if s.iter().any(|&x| x < 0) {
            notes.push("negative s_n found: the group is not self-similar in W_p".into());
        }
    }
    let s1_is_p_minus_1 = s.first().map(|&s1| s1 == seq.base as i64 - 1);
    if s1_is_p_minus_1 == Some(true) {
        notes.push("s_1 = p - 1: |G:St_G(2)| = p^2 and the dimension is at most 1/p".into());
    }
    Ok(HdimReport {
        group: seq.group.clone(),
        ambient: seq.ambient,
        base: seq.base,
        max_depth,
        rows,
        s,
        s1_is_p_minus_1,
        notes,
    })
}

/// Result of the rank computation for one layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerRank {
    pub level: usize,
    pub rank: usize,
    pub cosets: usize,
    /// Whether the coset cap stopped enumeration, making `rank` a lower bound.
    pub capped: bool,
}

/// Splits a level-`n` permutation into its level-`(n-1)` permutation and the
/// label exponents at level `n-1`.
fn split_labels(g: &Perm, p: usize) -> Result<(Vec<u32>, Vec<u32>)> {
    let img = g.images();
    let m = img.len() / p;
    let mut pi = Vec::with_capacity(m);
    let mut e = Vec::with_capacity(m);
    for r in 0..m {
        let first = img[r * p] as usize;
        let (c, x) = (first / p, first % p);
        for i in 1..p {
            if img[r * p + i] as usize != c * p + (i + x) % p {
                return Err(Error::NotWreathCyclic(format!("a label at level {} is not a power of σ", m.ilog(p))));
            }
        }
        pi.push(c as u32);
        e.push(x as u32);
    }
    Ok((pi, e))
}

/// `log_p |St_G(n-1) : St_G(n)|` as the rank of the level-`(n-1)` label vectors of
/// Schreier generators of `St_G(n-1)`.
pub fn abelian_layer_log_index(def: &GroupDef, n: usize) -> Result<LayerRank> {
    abelian_layer_log_index_capped(def, n, DEFAULT_COSET_CAP)
}

pub fn abelian_layer_log_index_capped(def: &GroupDef, n: usize, cap: usize) -> Result<LayerRank> {
    if n == 0 {
        return Err(Error::InvalidParams("layer index needs n >= 1".into()));
    }
    let p = def
        .wreath_prime()
        .ok_or_else(|| Error::NotWreathCyclic(format!("{} has labels outside <σ>", def.source())))?;
    let pu = p as u32;
    let gens: Vec<(Vec<u32>, Vec<u32>)> =
        def.generator_perms(n)?.iter().map(|g| split_labels(g, p as usize)).collect::<Result<_>>()?;
    let width = gens.first().map_or(0, |g| g.0.len());

    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut reps: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    let id: Vec<u32> = (0..width as u32).collect();
    index.insert(id.clone(), 0);
    reps.push((id, vec![0; width]));

    let mut rows: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut capped = false;
    let mut i = 0;
    'bfs: while i < reps.len() {
        for (spi, se) in &gens {
            let (pi, e) = &reps[i];
            let pi_rs: Vec<u32> = pi.iter().map(|&x| spi[x as usize]).collect();
            let e_rs: Vec<u32> = (0..width).map(|u| (e[u] + se[pi[u] as usize]) % pu).collect();
            match index.get(&pi_rs) {
                None => {
                    if reps.len() >= cap {
                        capped = true;
                        break 'bfs;
                    }
                    index.insert(pi_rs.clone(), reps.len());
                    reps.push((pi_rs, e_rs));
                }
                Some(&j) => {
                    let mut v: Vec<u32> = e_rs.iter().zip(&reps[j].1).map(|(a, b)| (a + pu - b) % pu).collect();
                    reduce_into(&mut rows, &mut v, pu);
                    if rows.len() == width {
                        break 'bfs;
                    }
                }
            }
        }
        i += 1;
    }
    Ok(LayerRank { level: n, rank: rows.len(), cosets: reps.len(), capped })
}

fn reduce_into(rows: &mut Vec<(usize, Vec<u32>)>, v: &mut [u32], p: u32) {
    for (pivot, row) in rows.iter() {
        let c = v[*pivot];
        if c != 0 {
            for (x, y) in v.iter_mut().zip(row) {
                *x = (*x + (p - c) * y) % p;
            }
        }
    }
    if let Some(pivot) = v.iter().position(|&x| x != 0) {
        let inv = (1..p).find(|x| (v[pivot] * x) % p == 1).expect("p is prime");
        for x in v.iter_mut() {
            *x = (*x * inv) % p;
        }
        rows.push((pivot, v.to_vec()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupdef::{zoo, ZooParams};

    fn def(name: &str) -> GroupDef {
        zoo(name, &ZooParams::default()).unwrap()
    }

    fn exact(seq: &LogIndexSeq) -> Vec<u64> {
        seq.exact_values().unwrap()
    }

    #[test]
    fn grigorchuk_sequence() {
        let seq = log_index_sequence(&def("grigorchuk"), 3, Ambient::WreathCyclic).unwrap();
        assert_eq!(exact(&seq), vec![0, 1, 3, 7]);
        assert_eq!(s_sequence(&seq).unwrap()[0], 0);
        let zero = log_index_sequence(&def("basilica"), 0, Ambient::WreathCyclic).unwrap();
        assert_eq!(exact(&zero), vec![0]);
    }

    #[test]
    fn gn_sequence() {
        let g = zoo("gn", &ZooParams { p: Some(5), n: Some(1), ..Default::default() }).unwrap();
        let seq = log_index_sequence(&g, 2, Ambient::WreathCyclic).unwrap();
        assert_eq!(exact(&seq), vec![0, 1, 2]);
    }

    #[test]
    fn ambient_values() {
        let t2 = TreeShape::regular(2).unwrap();
        let t5 = TreeShape::regular(5).unwrap();
        assert_eq!(ambient_log_index(&t2, Ambient::WreathCyclic, 3).unwrap(), LogValue::Exact(7));
        assert_eq!(ambient_log_index(&t5, Ambient::WreathCyclic, 7).unwrap(), LogValue::Exact(19531));
        assert_eq!(ambient_log_index(&t5, Ambient::WreathCyclic, 0).unwrap(), LogValue::Exact(0));
        // |Sym(2)| = 2, so the full ambient on the binary tree is W_2.
        assert_eq!(ambient_log_index(&t2, Ambient::Full, 3).unwrap().as_f64(), 7.0);
    }

    #[test]
    fn gs_oracle() {
        for p in [2, 3, 5] {
            let r = hdim_report(&gs_oracle_sequence(p, 6).unwrap()).unwrap();
            assert_eq!(r.s[0], p as i64 - 1);
            assert!(r.s[1..].iter().all(|&x| x == 0));
            for row in &r.rows[1..6] {
                assert_eq!(row.partial_sum_exact.as_deref(), Some(format!("1/{p}").as_str()));
            }
            assert_eq!(r.s1_is_p_minus_1, Some(true));
        }
    }

    #[test]
    fn basilica_partial_sums_decrease() {
        let r = hdim_report(&log_index_sequence(&def("basilica"), 6, Ambient::WreathCyclic).unwrap()).unwrap();
        assert_eq!(r.s[0], 0);
        assert!(r.s.iter().all(|&x| x >= 0));
        let sums: Vec<f64> = r.rows.iter().filter_map(|x| x.partial_sum).collect();
        assert!(sums.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn layer_rank_matches_orders() {
        let g = def("grigorchuk");
        assert_eq!(abelian_layer_log_index(&g, 2).unwrap().rank, 2);
        assert_eq!(abelian_layer_log_index(&g, 3).unwrap().rank, 4);
        let seq = exact(&log_index_sequence(&g, 5, Ambient::WreathCyclic).unwrap());
        for n in 1..=5 {
            let r = abelian_layer_log_index(&g, n).unwrap();
            assert!(!r.capped);
            assert_eq!(r.rank as u64, seq[n] - seq[n - 1], "level {n}");
        }
        let capped = abelian_layer_log_index_capped(&g, 5, 4).unwrap();
        assert!(capped.capped && capped.rank as u64 <= seq[5] - seq[4]);
    }

    #[test]
    fn csv_columns() {
        let r = hdim_report(&gs_oracle_sequence(5, 3).unwrap()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("depth,log_index,ambient_log,s_n,partial_sum,trace\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
