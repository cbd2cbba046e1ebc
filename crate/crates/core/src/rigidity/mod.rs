//! Rigidity criteria for branch actions, checked on congruence quotients.
//!
//! Every positive answer is only evidence up to the examined depth; a failure
//! comes with a witness that can be replayed with [`replay_witness`].

mod criteria;
mod filtration;
mod gn_checks;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quotient::Quotient;
use crate::tree::Vertex;

pub use criteria::{
    check_condition_doublestar, check_condition_n, check_condition_star, check_fractal, cp2_dichotomy_check,
    replay_witness, theorem4_classify, Theorem4Report, Theorem4Verdict,
};
pub use filtration::{filtration_search, Classification, FiltrationReport, FiltrationVerdict, MemberInfo};
pub use gn_checks::{
    augmentation_witness, check_index_equation, lemma63_sample_check, AugmentationWitness, IndexEquationReport,
    Lemma63Report, Lemma63Sample,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Criterion {
    #[serde(rename = "star")]
    Star,
    #[serde(rename = "doublestar")]
    DoubleStar,
    #[serde(rename = "N")]
    N,
    #[serde(rename = "fractal")]
    Fractal,
    #[serde(rename = "theorem4")]
    Theorem4,
    #[serde(rename = "cp2")]
    Cp2,
}

impl Criterion {
    pub const ALL: [Criterion; 6] =
        [Criterion::Star, Criterion::DoubleStar, Criterion::N, Criterion::Fractal, Criterion::Theorem4, Criterion::Cp2];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Star => "star",
            Criterion::DoubleStar => "doublestar",
            Criterion::N => "N",
            Criterion::Fractal => "fractal",
            Criterion::Theorem4 => "theorem4",
            Criterion::Cp2 => "cp2",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown criterion `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsToDepth,
    FailsWithWitness,
    Inapplicable,
}

/// Vertices and elements exhibiting a failure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub vertices: Vec<String>,
    pub elements: Vec<String>,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub group: String,
    pub depth: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Number of instances (vertices, pairs, chains or samples) examined.
    pub checked: usize,
    pub caveat: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CriterionReport {
    fn new(criterion: Criterion, group: &str, depth: usize, caveat: &str) -> Self {
        CriterionReport {
            criterion,
            group: group.to_string(),
            depth,
            verdict: Verdict::HoldsToDepth,
            witness: None,
            checked: 0,
            caveat: caveat.to_string(),
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, witness: Witness) {
        self.verdict = Verdict::FailsWithWitness;
        self.witness = Some(witness);
    }

    fn inapplicable(mut self, why: String) -> Self {
        self.verdict = Verdict::Inapplicable;
        self.notes.push(why);
        self
    }
}

/// One vertex from each orbit of the quotient on level `k`, smallest rank first.
pub(crate) fn level_orbit_reps(q: &Quotient, k: usize) -> Vec<Vertex> {
    if k == 0 {
        return vec![Vertex::root()];
    }
    let lv = q.levels();
    let mut seen = vec![false; lv.size(k)];
    let mut reps = Vec::new();
    for r in 0..lv.size(k) {
        if seen[r] {
            continue;
        }
        for pt in q.orbit_points(lv.point(k, r)) {
            seen[lv.locate(pt).1] = true;
        }
        reps.push(lv.vertex(k, r));
    }
    reps
}

/// Children of `v`, given the arity of its level.
pub(crate) fn children(v: &Vertex, arity: usize) -> impl Iterator<Item = Vertex> + '_ {
    (1..=arity as u32).map(move |i| v.concat(&Vertex::new(vec![i])))
}
