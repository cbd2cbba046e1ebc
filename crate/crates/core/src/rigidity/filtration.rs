//! Subgroups above a vertex stabilizer whose indices follow the level sizes of the tree.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupdef::GroupDef;
use crate::quotient::{
    congruence_quotient, interval_subgroups, interval_subgroups_exhaustive, small_order, Quotient, SubgroupHandle,
};
use crate::tree::Vertex;

const EXHAUSTIVE_LIMIT: usize = 512;
const CHAIN_LIMIT: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classification {
    VertexStabilizer { vertex: String },
    NonStabilizer,
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberInfo {
    pub index: usize,
    pub order: String,
    pub orbit_of_w: Vec<String>,
    pub classification: Classification,
    /// Whether the member sits in a chain `G = H_0 > H_1 > ... > st(w)` with `|G:H_k| = N_k`.
    pub in_chain: bool,
    pub generators: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiltrationVerdict {
    ConsistentWithRigidityToDepth,
    RefutesRigidity,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiltrationReport {
    pub group: String,
    pub w: String,
    pub depth: usize,
    pub max_index: usize,
    /// `N_0, ..., N_|w|`.
    pub index_pattern: Vec<usize>,
    pub members: Vec<MemberInfo>,
    /// Complete chains as positions in `members`, from the whole group down to `st(w)`.
    pub chains: Vec<Vec<usize>>,
    pub chains_truncated: bool,
    /// Interval size from brute force over the elements, for small quotients.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustive_count: Option<usize>,
    pub verdict: FiltrationVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refuting_member: Option<usize>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub handles: Vec<SubgroupHandle>,
}

/// `u` with `L = st(u)`, found among vertices whose orbit size is the index of `L`.
fn classify(q: &Quotient, l: &SubgroupHandle, index: usize, w_block: &[u32], w_pt: u32) -> Result<Classification> {
    let lv = q.levels();
    if index == 1 {
        return Ok(Classification::VertexStabilizer { vertex: Vertex::root().to_string() });
    }
    for k in 1..=q.depth() {
        let mut seen = vec![false; lv.size(k)];
        for r in 0..lv.size(k) {
            if seen[r] {
                continue;
            }
            let orbit = q.orbit_points(lv.point(k, r));
            for &pt in &orbit {
                seen[lv.locate(pt).1] = true;
            }
            if orbit.len() != index {
                continue;
            }
            for &pt in &orbit {
                if l.gens().iter().all(|g| lv.image(g, pt) == pt) {
                    let u = lv.vertex_of(pt);
                    let mut via_st: Vec<u32> = q.stabilizer(&u)?.orbit_points(w_pt);
                    via_st.sort_unstable();
                    if via_st == w_block {
                        return Ok(Classification::VertexStabilizer { vertex: u.to_string() });
                    }
                }
            }
        }
    }
    Ok(Classification::NonStabilizer)
}

/// Enumerates the interval above `st(w)` and looks for members of complete
/// filtrations that are not vertex stabilizers.
pub fn filtration_search(
    def: &GroupDef,
    w: &Vertex,
    depth: usize,
    max_index: usize,
    node_cap: usize,
) -> Result<FiltrationReport> {
    if w.level() > depth {
        return Err(Error::Precondition(format!("vertex {w} lies below depth {depth}")));
    }
    if w.is_root() {
        return Err(Error::Precondition("the base vertex must not be the root".into()));
    }
    let q = congruence_quotient(def, depth)?;
    let lv = q.levels().clone();
    let pattern: Vec<usize> = (0..=w.level()).map(|k| lv.size(k)).collect();
    let st_w = q.stabilizer(w)?;
    let w_pt = lv.point_of(w)?;
    let w_index = q.orbit_points(w_pt).len();
    let effective = max_index.max(w_index);
    let mut notes = vec![
        "refutation is sound; consistency is not a proof of rigidity".to_string(),
    ];
    if effective > max_index {
        notes.push(format!("max index raised to |G:st(w)| = {effective} so chains can reach st(w)"));
    }
    let found = interval_subgroups(&q, &st_w, w, effective, node_cap)?;

    // Member b lies below member a exactly when its orbit of w is contained in a's.
    let contains = |a: &[u32], b: &[u32]| b.iter().all(|x| a.binary_search(x).is_ok());
    let level_of: HashMap<usize, usize> = pattern.iter().enumerate().map(|(k, &n)| (n, k)).collect();
    let m = pattern.len();
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, f) in found.iter().enumerate() {
        if let Some(&k) = level_of.get(&f.index) {
            by_level[k].push(i);
        }
    }
    let mut chains = Vec::new();
    let mut truncated = false;
    let mut stack: Vec<Vec<usize>> = by_level[0].iter().map(|&i| vec![i]).collect();
    while let Some(path) = stack.pop() {
        if path.len() == m {
            if chains.len() >= CHAIN_LIMIT {
                truncated = true;
                break;
            }
            chains.push(path);
            continue;
        }
        let last = &found[*path.last().expect("non-empty path")].block;
        for &j in by_level[path.len()].iter().rev() {
            if contains(last, &found[j].block) {
                let mut next = path.clone();
                next.push(j);
                stack.push(next);
            }
        }
    }
    chains.sort();
    let mut in_chain = vec![false; found.len()];
    for c in &chains {
        for &i in c {
            in_chain[i] = true;
        }
    }

    let mut members = Vec::with_capacity(found.len());
    let mut refuting = None;
    for (i, f) in found.iter().enumerate() {
        let classification = classify(&q, &f.group, f.index, &f.block, w_pt)?;
        if in_chain[i] && classification == Classification::NonStabilizer && refuting.is_none() {
            refuting = Some(i);
        }
        members.push(MemberInfo {
            index: f.index,
            order: f.group.order().to_string(),
            orbit_of_w: f.block.iter().map(|&x| lv.vertex_of(x).to_string()).collect(),
            classification,
            in_chain: in_chain[i],
            generators: f.group.gens().iter().map(|g| g.to_cycle_string()).collect(),
        });
    }
    let exhaustive_count = match small_order(&q) {
        Some(n) if n <= EXHAUSTIVE_LIMIT => {
            Some(interval_subgroups_exhaustive(&q, &st_w, effective, EXHAUSTIVE_LIMIT)?.len())
        }
        _ => None,
    };
    Ok(FiltrationReport {
        group: def.source().to_string(),
        w: w.to_string(),
        depth,
        max_index,
        index_pattern: pattern,
        members,
        chains,
        chains_truncated: truncated,
        exhaustive_count,
        verdict: if refuting.is_some() {
            FiltrationVerdict::RefutesRigidity
        } else {
            FiltrationVerdict::ConsistentWithRigidityToDepth
        },
        refuting_member: refuting,
        notes,
        handles: found.into_iter().map(|f| f.group).collect(),
    })
}
