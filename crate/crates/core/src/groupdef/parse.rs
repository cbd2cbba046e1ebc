//! The line-oriented group-definition format.
//!
//! ```text
//! # comments run to the end of the line
//! tree regular:2
//! a = perm((1 2)) sections(1,1)
//! b = perm(id) sections(a,c)
//! c = perm(id) sections(a,d)
//! d = perm(id) sections(1,b)
//! gens a b c d
//! ```

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use super::{GroupDef, DEFAULT_DEGREE_LIMIT};
use crate::autom::{Automaton, Elem, Letter, NamedState, State};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::tree::TreeShape;

fn col(line: &str, offset: usize) -> usize {
    line[..offset.min(line.len())].chars().count() + 1
}

fn perr(line_no: usize, line: &str, offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { line: line_no, column: col(line, offset), message: message.into() }
}

fn valid_name(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && it.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Byte offset of the `)` closing the `(` at `open`.
fn matching_paren(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s[open..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + i);
                }
            }
            _ => {}
        }
    }
    None
}

struct RawState {
    name: String,
    line_no: usize,
    label: Perm,
    sections: Vec<Vec<(String, i64, usize)>>,
    line: String,
}

fn parse_perm(text: &str, name: &str, arity: usize, line_no: usize, line: &str, offset: usize) -> Result<Perm> {
    let t = text.trim();
    if t == "id" {
        return Ok(Perm::identity(arity));
    }
    let mut seen = HashSet::new();
    let mut max_pt = 0usize;
    for tok in t.split(|c: char| c == '(' || c == ')' || c == ',' || c.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        let x: usize = tok
            .parse()
            .map_err(|_| perr(line_no, line, offset, format!("bad point {tok:?} in permutation")))?;
        if x == 0 {
            return Err(perr(line_no, line, offset, "points are numbered from 1"));
        }
        if !seen.insert(x) {
            return Err(Error::NotBijective { name: name.to_string(), arity });
        }
        max_pt = max_pt.max(x);
    }
    if max_pt > arity {
        return Err(Error::DegreeMismatch { name: name.to_string(), degree: max_pt, arity });
    }
    Perm::parse_cycles(t, arity).map_err(|e| perr(line_no, line, offset, e.to_string()))
}

fn parse_word(
    text: &str,
    line_no: usize,
    line: &str,
    offset: usize,
) -> Result<Vec<(String, i64, usize)>> {
    let t = text.trim();
    if t == "1" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut pos = offset + (text.len() - text.trim_start().len());
    for factor in t.split('*') {
        let f = factor.trim();
        let (name, exp) = match f.split_once('^') {
            Some((n, e)) => {
                let e: i64 = e
                    .trim()
                    .parse()
                    .map_err(|_| perr(line_no, line, pos, format!("bad exponent in {f:?}")))?;
                (n.trim(), e)
            }
            None => (f, 1),
        };
        if !valid_name(name) {
            return Err(perr(line_no, line, pos, format!("expected a state name, found {f:?}")));
        }
        out.push((name.to_string(), exp, line_no));
        pos += factor.len() + 1;
    }
    Ok(out)
}

/// Parses a group-definition document.
pub fn parse_group(text: &str) -> Result<GroupDef> {
    parse_group_from(text, "<inline>", DEFAULT_DEGREE_LIMIT)
}

/// Parses a document, recording `source` as its provenance.
pub fn parse_group_from(text: &str, source: &str, degree_limit: usize) -> Result<GroupDef> {
    let mut arity: Option<usize> = None;
    let mut raw: Vec<RawState> = Vec::new();
    let mut gens: Option<(Vec<String>, usize, String)> = None;

    for (idx, full) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = full.split('#').next().unwrap_or("");
        let content = line.trim();
        if content.is_empty() {
            continue;
        }
        let lead = line.len() - line.trim_start().len();
        if gens.is_some() {
            return Err(perr(line_no, full, lead, "content after the `gens` line"));
        }
        if arity.is_none() {
            let lit = content
                .strip_prefix("tree ")
                .ok_or_else(|| perr(line_no, full, lead, "the first line must be `tree <shape>`"))?;
            let shape: TreeShape = lit
                .parse()
                .map_err(|e: Error| perr(line_no, full, lead + 5, e.to_string()))?;
            let d = shape.regular_arity().ok_or_else(|| {
                Error::Unsupported(format!(
                    "line {line_no}: recursion tables need a tree of constant arity, got {lit}"
                ))
            })?;
            arity = Some(d as usize);
            continue;
        }
        let d = arity.expect("tree line seen");
        if let Some(rest) = content.strip_prefix("gens") {
            if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
                return Err(perr(line_no, full, lead, "expected `gens <names>`"));
            }
            let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            if names.is_empty() {
                return Err(perr(line_no, full, lead, "`gens` needs at least one state"));
            }
            gens = Some((names, line_no, full.to_string()));
            continue;
        }
        let eq = content
            .find('=')
            .ok_or_else(|| perr(line_no, full, lead, "expected `<name> = perm(...) sections(...)`"))?;
        let name = content[..eq].trim();
        if !valid_name(name) {
            return Err(perr(line_no, full, lead, format!("invalid state name {name:?}")));
        }
        if raw.iter().any(|r| r.name == name) {
            return Err(perr(line_no, full, lead, format!("state `{name}` declared twice")));
        }
        let after = &content[eq + 1..];
        let after_off = lead + eq + 1 + (after.len() - after.trim_start().len());
        let body = after.trim_start();
        let perm_open = body
            .strip_prefix("perm")
            .map(|r| body.len() - r.len())
            .filter(|&i| body[i..].starts_with('('))
            .ok_or_else(|| perr(line_no, full, after_off, "expected `perm(`"))?;
        let perm_close = matching_paren(body, perm_open)
            .ok_or_else(|| perr(line_no, full, after_off + perm_open, "unclosed `perm(`"))?;
        let label = parse_perm(&body[perm_open + 1..perm_close], name, d, line_no, full, after_off + perm_open + 1)?;
        let rest = &body[perm_close + 1..];
        let rest_off = after_off + perm_close + 1 + (rest.len() - rest.trim_start().len());
        let rest = rest.trim_start();
        let inner = rest
            .strip_prefix("sections(")
            .ok_or_else(|| perr(line_no, full, rest_off, "expected `sections(`"))?;
        let close = inner
            .find(')')
            .ok_or_else(|| perr(line_no, full, rest_off, "unclosed `sections(`"))?;
        if !inner[close + 1..].trim().is_empty() {
            return Err(perr(line_no, full, rest_off + 9 + close + 1, "unexpected text after `sections(...)`"));
        }
        let mut sections = Vec::new();
        let mut off = rest_off + 9;
        for part in inner[..close].split(',') {
            sections.push(parse_word(part, line_no, full, off)?);
            off += part.len() + 1;
        }
        if sections.len() != d {
            return Err(perr(
                line_no,
                full,
                rest_off,
                format!("state `{name}` has {} sections, expected {d}", sections.len()),
            ));
        }
        raw.push(RawState { name: name.to_string(), line_no, label, sections, line: full.to_string() });
    }

    let d = arity.ok_or_else(|| Error::Parse { line: 1, column: 1, message: "empty document".into() })?;
    let (gen_names, gens_line, gens_text) = gens.ok_or_else(|| Error::Parse {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing `gens` line".into(),
    })?;
    let index: HashMap<&str, u32> = raw.iter().enumerate().map(|(i, r)| (r.name.as_str(), i as u32)).collect();
    let resolve = |name: &str, line: usize| -> Result<u32> {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UndeclaredState { name: name.to_string(), line })
    };

    let mut states = Vec::new();
    for r in &raw {
        let mut secs = Vec::new();
        for w in &r.sections {
            let mut letters = Vec::new();
            for (n, e, line) in w {
                let s = State::Named(resolve(n, *line)?);
                let l = if *e < 0 { Letter::new(s).inverse() } else { Letter::new(s) };
                for _ in 0..e.unsigned_abs() {
                    letters.push(l);
                }
            }
            secs.push(crate::autom::reduce(letters));
        }
        states.push(NamedState { name: r.name.clone(), label: r.label.clone(), sections: secs });
    }
    let gen_idx = gen_names
        .iter()
        .map(|n| resolve(n, gens_line))
        .collect::<Result<Vec<_>>>()?;

    let mut reached: HashSet<u32> = gen_idx.iter().copied().collect();
    let mut queue: VecDeque<u32> = gen_idx.iter().copied().collect();
    while let Some(i) = queue.pop_front() {
        for w in &states[i as usize].sections {
            for l in w {
                if let State::Named(j) = l.state {
                    if reached.insert(j) {
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    if let Some(r) = raw.iter().enumerate().find(|(i, _)| !reached.contains(&(*i as u32))).map(|(_, r)| r) {
        return Err(Error::Parse {
            line: r.line_no,
            column: col(&r.line, r.line.len() - r.line.trim_start().len()),
            message: format!("state `{}` is not reachable from the generators", r.name),
        });
    }
    let _ = gens_text;

    let aut = Arc::new(Automaton::new(d as u64, states, degree_limit)?);
    let gens = gen_names
        .iter()
        .zip(gen_idx)
        .map(|(n, i)| (n.clone(), Elem::state(&aut, State::Named(i))))
        .collect();
    GroupDef::new(source.to_string(), aut, gens, None)
}

fn word_text(aut: &Automaton, w: &[Letter]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let mut j = i;
        while j < w.len() && w[j] == w[i] {
            j += 1;
        }
        let name = aut.state_name(w[i].state);
        let k = (j - i) as i64 * if w[i].inv { -1 } else { 1 };
        parts.push(if k == 1 { name } else { format!("{name}^{k}") });
        i = j;
    }
    parts.join("*")
}

impl GroupDef {
    /// Serializes a definition built from named states.
    pub fn to_text(&self) -> Result<String> {
        if self.gn.is_some() || self.kept.is_some() {
            return Err(Error::Unsupported(
                "only recursion tables over named states on a regular tree can be printed".into(),
            ));
        }
        let aut = &self.aut;
        let mut out = format!("tree regular:{}\n", aut.arity());
        for s in aut.named_states() {
            let secs: Vec<String> = s.sections.iter().map(|w| word_text(aut, w)).collect();
            out.push_str(&format!("{} = perm({}) sections({})\n", s.name, s.label, secs.join(",")));
        }
        let mut names = Vec::new();
        for (_, g) in &self.gens {
            match g.word() {
                [l] if !l.inv => names.push(aut.state_name(l.state)),
                _ => return Err(Error::Unsupported("generators must be single named states".into())),
            }
        }
        out.push_str(&format!("gens {}\n", names.join(" ")));
        Ok(out)
    }

    /// Same definition with a different degree limit.
    pub fn with_degree_limit(&self, limit: usize) -> GroupDef {
        let aut = Arc::new(
            Automaton::new(self.aut.arity(), self.aut.named_states().to_vec(), limit)
                .expect("already validated"),
        );
        let mut out = self.clone();
        out.gens = self
            .gens
            .iter()
            .map(|(n, g)| (n.clone(), Elem::from_word(&aut, g.word().to_vec())))
            .collect();
        out.aut = aut;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASILICA: &str = "tree regular:2\na = perm(id) sections(1,b)\nb = perm((1 2)) sections(1,a)\ngens a b\n";

    #[test]
    fn basilica_document() {
        let g = parse_group(BASILICA).unwrap();
        assert_eq!(g.automaton().named_states().len(), 2);
        assert_eq!(g.shape().regular_arity(), Some(2));
        assert_eq!(g.generator_names(), vec!["a", "b"]);
    }

    #[test]
    fn roundtrip() {
        let g = parse_group(BASILICA).unwrap();
        let again = parse_group(&g.to_text().unwrap()).unwrap();
        for n in 0..=6 {
            assert_eq!(g.generator_perms(n).unwrap(), again.generator_perms(n).unwrap());
        }
    }

    #[test]
    fn exponents_and_comments() {
        let text = "# ggs-like\ntree regular:3\na = perm((1 2 3)) sections(1,1,1)\nb = perm(id) sections(a^2, a^-1*a*a, b) # trailing\ngens a b\n";
        let g = parse_group(text).unwrap();
        let b = &g.automaton().named_states()[1];
        assert_eq!(b.sections[0].len(), 2);
        assert_eq!(b.sections[1].len(), 1);
    }

    #[test]
    fn errors() {
        let undeclared = "tree regular:2\na = perm((1 2)) sections(1,x)\ngens a\n";
        match parse_group(undeclared) {
            Err(Error::UndeclaredState { name, line }) => {
                assert_eq!(name, "x");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        let degree = "tree regular:2\na = perm((1 3)) sections(1,1)\ngens a\n";
        assert!(matches!(parse_group(degree), Err(Error::DegreeMismatch { degree: 3, .. })));
        let bij = "tree regular:3\na = perm((1 2)(2 3)) sections(1,1,1)\ngens a\n";
        assert!(matches!(parse_group(bij), Err(Error::NotBijective { .. })));
        let syntax = "tree regular:2\na = perm((1 2) sections(1,1)\ngens a\n";
        assert!(matches!(parse_group(syntax), Err(Error::Parse { line: 2, .. })));
        let count = "tree regular:2\na = perm((1 2)) sections(1)\ngens a\n";
        assert!(matches!(parse_group(count), Err(Error::Parse { line: 2, .. })));
        let nogens = "tree regular:2\na = perm((1 2)) sections(1,1)\n";
        assert!(matches!(parse_group(nogens), Err(Error::Parse { .. })));
        let bad_tree = "tree arities:2;tail:3\n";
        assert!(matches!(parse_group(bad_tree), Err(Error::Unsupported(_))));
    }

    #[test]
    fn column_points_at_token() {
        let text = "tree regular:2\na = perm((1 2)) sections(1,1)\n   gens\n";
        match parse_group(text) {
            Err(Error::Parse { line: 3, column: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
