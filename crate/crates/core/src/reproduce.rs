//! The acceptance checks as a runnable suite: one named check per claim, run in a
//! small worker pool, results reported in a fixed order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autom::Elem;
use crate::error::{Error, Result};
use crate::groupdef::{zoo, GroupDef, ZooParams};
use crate::hausdorff::{
    abelian_layer_log_index, gs_oracle_sequence, hdim_report, log_index_sequence, Ambient,
};
use crate::perm::enumerate_group;
use crate::quotient::{congruence_quotient, DEFAULT_NODE_CAP};
use crate::rigidity::{
    augmentation_witness, check_condition_n, check_index_equation, filtration_search, lemma63_sample_check,
    theorem4_classify, Classification, FiltrationVerdict, Theorem4Verdict,
};
use crate::tree::{KeptLevels, Vertex};

/// Check ids in report order, with whether they need `--deep`.
pub const CHECKS: &[(&str, bool)] = &[
    ("quotient-oracle", false),
    ("theorem4-table", false),
    ("gn-depth2", false),
    ("hausdorff-partial-sums", false),
    ("gs-oracle", false),
    ("filtration", false),
    ("index-equation", false),
    ("laws", false),
    ("gn-depth7", true),
    ("lemma63-sampling", true),
    ("climb-levels-witness", true),
];

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub fn zoo_group(name: &str) -> Result<GroupDef> {
    zoo(name, &ZooParams::default())
}

pub fn ggs_group() -> Result<GroupDef> {
    zoo("ggs", &ZooParams { p: Some(5), e: Some(vec![1, 0, 0, 0]), ..Default::default() })
}

pub fn gn_group(degree_limit: Option<usize>) -> Result<GroupDef> {
    zoo("gn", &ZooParams { p: Some(5), n: Some(1), degree_limit, ..Default::default() })
}

/// `(passed, detail)`; a check that errors counts as failed.
type Check = Result<(bool, String)>;

fn quotient_oracle() -> Check {
    let cases = [
        (zoo_group("grigorchuk")?, 3),
        (zoo_group("basilica")?, 2),
        (zoo_group("bsv")?, 2),
        (ggs_group()?, 2),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (def, max) in &cases {
        let mut orders = Vec::new();
        for d in 1..=*max {
            let q = congruence_quotient(def, d)?;
            let ss = q.order_schreier_sims();
            let bfs = enumerate_group(q.gens(), q.degree(), 1 << 16)
                .ok_or(Error::Budget { budget: 1 << 16, found: 1 << 16 })?
                .len();
            ok &= ss == BigUint::from(bfs);
            orders.push(ss.to_string());
        }
        parts.push(format!("{} [{}]", def.source(), orders.join(", ")));
    }
    let grig = congruence_quotient(&cases[0].0, 3)?.order_schreier_sims();
    ok &= grig == BigUint::from(128u32);
    Ok((ok, parts.join("; ")))
}

fn theorem4_table() -> Check {
    let cases: Vec<(GroupDef, usize, Theorem4Verdict)> = vec![
        (zoo_group("grigorchuk")?, 4, Theorem4Verdict::Rigid),
        (zoo_group("basilica")?, 4, Theorem4Verdict::Rigid),
        (ggs_group()?, 3, Theorem4Verdict::Rigid),
        (zoo_group("bsv")?, 4, Theorem4Verdict::Rigid),
        (gn_group(None)?, 3, Theorem4Verdict::NotRigid),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (def, depth, want) in &cases {
        let r = theorem4_classify(def, *depth)?;
        let structure = r.structure.clone().unwrap_or_default();
        ok &= r.verdict == *want;
        if def.source() == "zoo:bsv" {
            ok &= structure.contains("cyclic");
        }
        if *want == Theorem4Verdict::NotRigid {
            ok &= r.witness_handle.as_ref().is_some_and(|k| k.order() == BigUint::from(5u32));
        }
        parts.push(format!("{}: {:?} ({structure})", def.source(), r.verdict));
    }
    Ok((ok, parts.join("; ")))
}

fn gn_depth2() -> Check {
    let q = congruence_quotient(&gn_group(None)?, 2)?;
    let order = q.order();
    let exponent = q.exponent(1 << 12)?;
    let ok = order == BigUint::from(25u32) && exponent == BigUint::from(5u32) && q.is_abelian();
    Ok((ok, format!("order {order}, exponent {exponent}, abelian {}", q.is_abelian())))
}

fn hausdorff_partial_sums() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, limit) in [("basilica", 2.0 / 3.0), ("bsv", 1.0 / 3.0)] {
        let seq = log_index_sequence(&zoo_group(name)?, 10, Ambient::WreathCyclic)?;
        let rep = hdim_report(&seq)?;
        let sums: Vec<f64> = rep.rows.iter().filter_map(|r| r.partial_sum).collect();
        let last = rep.last_partial_sum().unwrap_or(f64::NAN);
        let monotone = sums.windows(2).all(|w| w[1] <= w[0]);
        let nonneg = rep.s.iter().all(|&s| s >= 0);
        ok &= (limit..=limit + 0.05).contains(&last) && monotone && nonneg;
        parts.push(format!("{name}: {last:.6} (non-increasing {monotone}, s_n >= 0 {nonneg})"));
    }
    Ok((ok, parts.join("; ")))
}

fn gs_oracle() -> Check {
    let mut ok = true;
    for p in [2u64, 3, 5] {
        let rep = hdim_report(&gs_oracle_sequence(p, 8)?)?;
        let want = format!("1/{p}");
        let sums: Vec<&str> = rep.rows.iter().skip(1).filter_map(|r| r.partial_sum_exact.as_deref()).collect();
        ok &= sums.len() >= 6 && sums.iter().all(|s| *s == want);
    }
    Ok((ok, "every partial sum equals 1/p for p = 2, 3, 5".into()))
}

fn filtration() -> Check {
    let grig = filtration_search(&zoo_group("grigorchuk")?, &"1.1".parse()?, 2, 4, DEFAULT_NODE_CAP)?;
    let g_ok = grig.members.len() == 3
        && grig.members.iter().all(|m| m.classification != Classification::NonStabilizer)
        && grig.verdict == FiltrationVerdict::ConsistentWithRigidityToDepth;
    let gn = gn_group(None)?;
    let tp = filtration_search(&gn, &"1.1".parse()?, 2, 5, DEFAULT_NODE_CAP)?;
    let five: Vec<_> = tp.members.iter().filter(|m| m.index == 5).collect();
    let stabs = five.iter().filter(|m| m.classification != Classification::NonStabilizer).count();
    let tp_ok = five.len() == 6 && stabs == 1 && tp.verdict == FiltrationVerdict::RefutesRigidity;
    let t1 = gn.induce_on_deleted(&KeptLevels::gn(5, 1)?)?;
    let tn = filtration_search(&t1, &"1".parse()?, 1, 25, DEFAULT_NODE_CAP)?;
    let tn_ok = tn.verdict == FiltrationVerdict::ConsistentWithRigidityToDepth;
    Ok((
        g_ok && tp_ok && tn_ok,
        format!(
            "grigorchuk: {} members, {:?}; gn on T_p: {} of index 5, {stabs} stabilizer, {:?}; gn on T_1: {:?}",
            grig.members.len(),
            grig.verdict,
            five.len(),
            tp.verdict,
            tn.verdict
        ),
    ))
}

fn index_equation() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, l) in [(5u64, 2u32), (2, 2), (3, 2), (5, 5)] {
        let r = check_index_equation(p, l, l as u64)?;
        ok &= r.agrees && r.solutions.is_empty();
        parts.push(format!("({p},{l}) min {}", r.minimum));
    }
    Ok((ok, parts.join(", ")))
}

fn random_elem(def: &GroupDef, rng: &mut ChaCha8Rng) -> Elem {
    let gens = def.generators();
    let len = rng.gen_range(0..=12);
    (0..len).fold(Elem::identity(def.automaton()), |acc, _| {
        let g = &gens[rng.gen_range(0..gens.len())].1;
        acc.compose(&if rng.gen_bool(0.5) { g.clone() } else { g.invert() })
    })
}

/// Sampled automaton laws, orbit-stabilizer on zoo quotients, the two routes for
/// condition (N) and the two index algorithms.
fn laws(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grig = zoo_group("grigorchuk")?;
    let depth = 5;
    let mut ok = true;
    for _ in 0..1000 {
        let (g, h) = (random_elem(&grig, &mut rng), random_elem(&grig, &mut rng));
        let (tg, th) = (g.truncate(depth)?.perm, h.truncate(depth)?.perm);
        ok &= g.compose(&h).truncate(depth)?.perm == tg.mul(&th);
        ok &= g.invert().truncate(depth)?.perm == tg.inverse();
        let v = Vertex::new((0..2).map(|_| rng.gen_range(1..=2)).collect());
        let u = Vertex::new((0..2).map(|_| rng.gen_range(1..=2)).collect());
        let lhs = g.apply(&v.concat(&u))?;
        let rhs = g.apply(&v)?.concat(&g.section(&v)?.apply(&u)?);
        ok &= lhs == rhs;
    }
    let laws_ok = ok;

    let mut os_ok = true;
    for def in [zoo_group("grigorchuk")?, zoo_group("basilica")?, zoo_group("bsv")?, ggs_group()?, gn_group(None)?] {
        let q = congruence_quotient(&def, 2)?;
        for r in 0..q.levels().size(2) {
            let v = q.levels().vertex(2, r);
            let orbit = q.orbit(&v)?.len();
            os_ok &= BigUint::from(orbit) * q.stabilizer(&v)?.order() == q.order();
        }
    }

    let n = check_condition_n(&grig, 3)?;
    let n_ok = n.notes.iter().any(|s| s.contains("routes agree"));

    let mut idx_ok = true;
    let seq = log_index_sequence(&grig, 5, Ambient::WreathCyclic)?.exact_values().unwrap_or_default();
    for level in 1..=5 {
        let r = abelian_layer_log_index(&grig, level)?;
        idx_ok &= !r.capped && seq.get(level).zip(seq.get(level - 1)).is_some_and(|(a, b)| a - b == r.rank as u64);
    }
    Ok((
        laws_ok && os_ok && n_ok && idx_ok,
        format!("laws {laws_ok}, orbit-stabilizer {os_ok}, (N) routes {n_ok}, index algorithms {idx_ok}"),
    ))
}

fn gn_depth7() -> Check {
    let def = gn_group(Some(78125))?;
    let seq = log_index_sequence(&def, 7, Ambient::WreathCyclic)?;
    let rep = hdim_report(&seq)?;
    let values = seq.exact_values().unwrap_or_default();
    let log_order = values.last().copied().unwrap_or(0);
    let trace = rep.rows.last().and_then(|r| r.trace).unwrap_or(f64::NAN);
    let mut ranks_ok = true;
    for level in 1..=3 {
        let r = abelian_layer_log_index(&def, level)?;
        ranks_ok &= !r.capped && values[level] - values[level - 1] == r.rank as u64;
    }
    Ok((
        log_order == 27 && trace <= 0.01 && ranks_ok,
        format!("log_5 order {log_order}, trace {trace:.6}, layer ranks 1..3 agree {ranks_ok}"),
    ))
}

fn lemma63(seed: u64) -> Check {
    let r = lemma63_sample_check(5, 1, 7, 25, seed)?;
    let bad: Vec<String> = r
        .samples
        .iter()
        .filter(|s| !s.holds)
        .map(|s| format!("{}: ell {}, lhs {}, modulus {}", s.label, s.ell, s.lhs, s.modulus))
        .collect();
    let detail = if bad.is_empty() {
        format!("{} samples, divisibility holds (seed {seed})", r.samples.len())
    } else {
        format!("FINDING (seed {seed}): divisibility fails for {}", bad.join("; "))
    };
    Ok((r.all_hold, detail))
}

fn climb_levels() -> Check {
    let w = augmentation_witness(5, 1, 7)?;
    let detail = if w.climbing_fails {
        format!(
            "FINDING: H above st({}) with |G:H| = 5^{} is a block subgroup not containing St(2) \
             ({} escapes the block); it starts a T_1 filtration: {}",
            w.w,
            w.log_index.unwrap_or(0),
            w.escaping_element.clone().unwrap_or_default(),
            w.deleted_tree_filtration
        )
    } else {
        "no counterexample: the augmentation subgroup contains St(2) or is too small".into()
    };
    Ok((!w.climbing_fails, detail))
}

pub fn run_check(id: &str, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let res = match id {
        "quotient-oracle" => quotient_oracle(),
        "theorem4-table" => theorem4_table(),
        "gn-depth2" => gn_depth2(),
        "hausdorff-partial-sums" => hausdorff_partial_sums(),
        "gs-oracle" => gs_oracle(),
        "filtration" => filtration(),
        "index-equation" => index_equation(),
        "laws" => laws(seed),
        "gn-depth7" => gn_depth7(),
        "lemma63-sampling" => lemma63(seed),
        "climb-levels-witness" => climb_levels(),
        other => return Err(Error::InvalidParams(format!("unknown check `{other}`"))),
    };
    let (passed, detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
    Ok(CheckOutcome { id: id.to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() })
}

/// Selected checks in report order. Unknown ids in `only` are an error.
pub fn select(only: &[String], deep: bool) -> Result<Vec<&'static str>> {
    for id in only {
        if !CHECKS.iter().any(|(c, _)| c == id) {
            return Err(Error::InvalidParams(format!("unknown check `{id}`")));
        }
    }
    Ok(CHECKS
        .iter()
        .filter(|(id, needs_deep)| if only.is_empty() { deep || !needs_deep } else { only.iter().any(|o| o == id) })
        .map(|(id, _)| *id)
        .collect())
}

/// Runs `ids` on `threads` workers; outcomes come back in the order of `ids`.
pub fn run(ids: &[&str], seed: u64, threads: usize) -> Result<Vec<CheckOutcome>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<CheckOutcome>>> = Mutex::new(vec![None; ids.len()]);
    let first_err: Mutex<Option<Error>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..threads.max(1).min(ids.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(id) = ids.get(i) else { break };
                match run_check(id, seed) {
                    Ok(o) => slots.lock().expect("poisoned")[i] = Some(o),
                    Err(e) => {
                        first_err.lock().expect("poisoned").get_or_insert(e);
                    }
                }
            });
        }
    });
    if let Some(e) = first_err.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(slots.into_inner().expect("poisoned").into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        let all = select(&[], false).unwrap();
        assert!(all.contains(&"laws") && !all.contains(&"gn-depth7"));
        assert_eq!(select(&[], true).unwrap().len(), CHECKS.len());
        assert_eq!(select(&["theorem4-table".into()], false).unwrap(), vec!["theorem4-table"]);
        assert!(select(&["nope".into()], false).is_err());
    }

    #[test]
    fn ordered_results() {
        let ids = ["index-equation", "gs-oracle", "gn-depth2"];
        let out = run(&ids, 0, 3).unwrap();
        let got: Vec<&str> = out.iter().map(|o| o.id.as_str()).collect();
        assert_eq!(got, ids);
        assert!(out.iter().all(|o| o.passed), "{out:?}");
    }
}
