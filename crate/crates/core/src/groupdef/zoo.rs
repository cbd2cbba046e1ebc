//! Built-in groups.

use std::sync::Arc;

use serde::Serialize;

use super::parse::parse_group_from;
use super::{is_prime, GroupDef, DEFAULT_DEGREE_LIMIT};
use crate::autom::{Automaton, Elem, State};
use crate::error::{Error, Result};
use crate::tree::{gn_kept_level, gn_level};

/// Parameters for the parameterized zoo entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ZooParams {
    pub p: Option<u64>,
    pub n: Option<usize>,
    pub e: Option<Vec<i64>>,
    pub degree_limit: Option<usize>,
}

const GRIGORCHUK: &str = "\
tree regular:2
a = perm((1 2)) sections(1,1)
b = perm(id) sections(a,c)
c = perm(id) sections(a,d)
d = perm(id) sections(1,b)
gens a b c d
";

const BASILICA: &str = "\
tree regular:2
a = perm(id) sections(1,b)
b = perm((1 2)) sections(1,a)
gens a b
";

const BSV: &str = "\
tree regular:2
c = perm((1 2)) sections(1,c)
d = perm((1 2)) sections(1,d^-1)
gens c d
";

const ODOMETER: &str = "\
tree regular:2
t = perm((1 2)) sections(1,t)
gens t
";

/// Parameters of the groups `G_n` over the `p`-adic tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GnParams {
    pub p: u64,
    pub n: usize,
}

impl GnParams {
    pub fn new(p: u64, n: usize) -> Result<Self> {
        if !is_prime(p) || p < 5 {
            return Err(Error::InvalidParams(format!(
                "gn needs a prime p >= 5 (got {p}); no construction is implemented for p = 2, 3"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParams("gn needs n >= 1".into()));
        }
        Ok(GnParams { p, n })
    }

    /// `l_j`.
    pub fn l(&self, j: usize) -> Option<u64> {
        gn_level(self.p, j)
    }

    /// `t_k^n`.
    pub fn t(&self, k: usize) -> Option<u64> {
        gn_kept_level(self.p, self.n, k)
    }

    /// Names of the generators of `A_n`: `d_0(a), ..., d_{l_n - 1}(a)`.
    pub fn a_names(&self) -> Vec<String> {
        (0..self.l(self.n).unwrap_or(0)).map(|i| format!("d_{i}(a)")).collect()
    }

    /// Names of the generators of `Ã_n`: `d_0(a), ..., d_{l_n - 2}(a)`.
    pub fn tilde_a_names(&self) -> Vec<String> {
        (0..self.l(self.n).unwrap_or(1) - 1).map(|i| format!("d_{i}(a)")).collect()
    }
}

fn gn_group(gp: GnParams, limit: usize) -> Result<GroupDef> {
    let l = gp
        .l(gp.n)
        .filter(|&l| l <= 10_000)
        .ok_or_else(|| Error::InvalidParams(format!("l_{} is too large to list the generators of A_{}", gp.n, gp.n)))?;
    let aut = Arc::new(Automaton::new(gp.p, Vec::new(), limit)?);
    let mut gens: Vec<(String, Elem)> = (0..l)
        .map(|i| (format!("d_{i}(a)"), Elem::state(&aut, State::Diag(i))))
        .collect();
    gens.push((format!("b_{}", gp.n), Elem::state(&aut, State::BRoot(gp.n as u64))));
    GroupDef::new(format!("zoo:gn(p={},n={})", gp.p, gp.n), aut, gens, Some(gp))
}

fn ggs_text(p: u64, e: &[i64]) -> Result<String> {
    if !is_prime(p) {
        return Err(Error::InvalidParams(format!("ggs needs a prime p (got {p})")));
    }
    if e.len() as u64 != p - 1 {
        return Err(Error::InvalidParams(format!("ggs needs a vector e of length {} (got {})", p - 1, e.len())));
    }
    let e: Vec<i64> = e.iter().map(|x| x.rem_euclid(p as i64)).collect();
    if e.iter().all(|&x| x == 0) {
        return Err(Error::InvalidParams(
            "ggs with e = 0 defines a group that is not branch; choose a non-zero vector".into(),
        ));
    }
    let cycle: Vec<String> = (1..=p).map(|i| i.to_string()).collect();
    let mut secs: Vec<String> = e
        .iter()
        .map(|&x| match x {
            0 => "1".to_string(),
            1 => "a".to_string(),
            k => format!("a^{k}"),
        })
        .collect();
    secs.push("b".into());
    let ones = vec!["1"; p as usize].join(",");
    Ok(format!(
        "tree regular:{p}\na = perm(({})) sections({ones})\nb = perm(id) sections({})\ngens a b\n",
        cycle.join(" "),
        secs.join(",")
    ))
}

/// Built-in groups: `grigorchuk`, `basilica`, `bsv`, `odometer`, `ggs` (needs `p`, `e`)
/// and `gn` (needs `p`, `n`).
pub fn zoo(name: &str, params: &ZooParams) -> Result<GroupDef> {
    let limit = params.degree_limit.unwrap_or(DEFAULT_DEGREE_LIMIT);
    let named = |text: &str, tag: &str| parse_group_from(text, &format!("zoo:{tag}"), limit);
    match name {
        "grigorchuk" => named(GRIGORCHUK, "grigorchuk"),
        "basilica" => named(BASILICA, "basilica"),
        "bsv" => named(BSV, "bsv"),
        "odometer" => named(ODOMETER, "odometer"),
        "ggs" => {
            let p = params.p.ok_or_else(|| Error::InvalidParams("ggs needs p".into()))?;
            let e = params.e.as_ref().ok_or_else(|| Error::InvalidParams("ggs needs e".into()))?;
            let es: Vec<String> = e.iter().map(|x| x.to_string()).collect();
            named(&ggs_text(p, e)?, &format!("ggs(p={p},e={})", es.join(",")))
        }
        "gn" => {
            let p = params.p.ok_or_else(|| Error::InvalidParams("gn needs p".into()))?;
            let n = params.n.ok_or_else(|| Error::InvalidParams("gn needs n".into()))?;
            gn_group(GnParams::new(p, n)?, limit)
        }
        other => Err(Error::InvalidParams(format!(
            "unknown zoo group `{other}` (known: grigorchuk, basilica, bsv, odometer, ggs, gn)"
        ))),
    }
}

/// `log_p |G_S : St(n)|` for the index oracle: 0, 1, 2, then `v(n) = v(n-1) + p^(n-2)`.
pub fn gs_log_index(p: u64, n: usize) -> Result<u64> {
    let overflow = || Error::InvalidParams(format!("log index of level {n} overflows for p = {p}"));
    match n {
        0..=2 => Ok(n as u64),
        _ => {
            let mut v: u64 = 2;
            for j in 3..=n {
                let term = p.checked_pow((j - 2) as u32).ok_or_else(overflow)?;
                v = v.checked_add(term).ok_or_else(overflow)?;
            }
            Ok(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autom::Letter;
    use crate::tree::Vertex;

    fn gp(p: u64, n: usize) -> ZooParams {
        ZooParams { p: Some(p), n: Some(n), ..Default::default() }
    }

    #[test]
    fn grigorchuk_table() {
        let g = zoo("grigorchuk", &ZooParams::default()).unwrap();
        assert_eq!(g.automaton().named_states().len(), 4);
        let a = g.generator("a").unwrap();
        assert_eq!(a.label(&Vertex::root()).unwrap().to_cycle_string(), "(1 2)");
        assert!(g.generator("b").unwrap().label(&Vertex::root()).unwrap().is_identity());
    }

    #[test]
    fn bsv_table() {
        let g = zoo("bsv", &ZooParams::default()).unwrap();
        assert_eq!(g.generator_names(), vec!["c", "d"]);
        let c = g.generator("c").unwrap();
        assert_eq!(c.section(&"2".parse().unwrap()).unwrap().word(), c.word());
    }

    #[test]
    fn ggs_params() {
        let ok = ZooParams { p: Some(5), e: Some(vec![1, 0, 0, 0]), ..Default::default() };
        let g = zoo("ggs", &ok).unwrap();
        assert_eq!(g.shape().regular_arity(), Some(5));
        assert_eq!(g.wreath_prime(), Some(5));
        let zero = ZooParams { p: Some(5), e: Some(vec![0, 0, 0, 0]), ..Default::default() };
        assert!(zoo("ggs", &zero).is_err());
        let short = ZooParams { p: Some(5), e: Some(vec![1]), ..Default::default() };
        assert!(zoo("ggs", &short).is_err());
    }

    #[test]
    fn gn_generators() {
        let g = zoo("gn", &gp(5, 1)).unwrap();
        assert_eq!(g.generator_names(), vec!["d_0(a)", "d_1(a)", "b_1"]);
        let b1 = g.generator("b_1").unwrap();
        // sections at level 2: d_0(a), ..., d_4(a), twenty trivial entries, b_2
        let level2: Vec<Vec<Letter>> = (0..25)
            .map(|r| b1.section(&Vertex::new(vec![r / 5 + 1, r % 5 + 1])).unwrap().word().to_vec())
            .collect();
        for (r, w) in level2.iter().enumerate() {
            let expect = match r {
                0..=4 => vec![Letter::new(State::Diag(r as u64))],
                24 => vec![Letter::new(State::BRoot(2))],
                _ => vec![],
            };
            assert_eq!(w, &expect, "vertex rank {r}");
        }
        assert!(zoo("gn", &gp(3, 1)).is_err());
        assert!(zoo("gn", &gp(6, 1)).is_err());
        let g2 = zoo("gn", &gp(5, 2)).unwrap();
        assert_eq!(g2.generators().len(), 6);
    }

    #[test]
    fn gn_params_sequences() {
        let p = GnParams::new(5, 1).unwrap();
        assert_eq!(p.a_names().len(), 2);
        assert_eq!(p.tilde_a_names(), vec!["d_0(a)"]);
        assert_eq!(p.t(2), Some(7));
    }

    #[test]
    fn gs_values() {
        assert_eq!(gs_log_index(5, 0).unwrap(), 0);
        assert_eq!(gs_log_index(5, 1).unwrap(), 1);
        assert_eq!(gs_log_index(5, 2).unwrap(), 2);
        assert_eq!(gs_log_index(5, 4).unwrap(), 32);
        assert!(gs_log_index(5, 60).is_err());
    }

    #[test]
    fn unknown_name() {
        assert!(zoo("lamplighter", &ZooParams::default()).is_err());
    }
}
