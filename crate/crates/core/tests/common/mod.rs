//! Brute-force oracles shared by the integration tests. Everything here works from
//! the vertex action of automaton elements and plain breadth-first closure, so it
//! shares no code with the stabilizer chains or the layered chains.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use branchlab::autom::Elem;
use branchlab::groupdef::{zoo, GroupDef, ZooParams};
use branchlab::tree::Vertex;

pub fn def(name: &str) -> GroupDef {
    zoo(name, &ZooParams::default()).unwrap()
}

pub fn ggs() -> GroupDef {
    zoo("ggs", &ZooParams { p: Some(5), e: Some(vec![1, 0, 0, 0]), ..Default::default() }).unwrap()
}

pub fn gn() -> GroupDef {
    zoo("gn", &ZooParams { p: Some(5), n: Some(1), ..Default::default() }).unwrap()
}

/// Vertices of level `n` of the `d`-regular tree in lexicographic order.
pub fn level(d: u32, n: usize) -> Vec<Vertex> {
    let mut out = vec![Vertex::root()];
    for _ in 0..n {
        out = out.iter().flat_map(|v| (1..=d).map(move |i| v.concat(&Vertex::new(vec![i])))).collect();
    }
    out
}

/// Action of `g` on level `n` as 0-based images, computed vertex by vertex.
pub fn level_images(g: &Elem, d: u32, n: usize) -> Vec<u32> {
    let vs = level(d, n);
    vs.iter()
        .map(|v| {
            let img = g.apply(v).unwrap();
            img.word().iter().fold(0u32, |acc, &x| acc * d + (x - 1))
        })
        .collect()
}

pub fn generator_images(def: &GroupDef, n: usize) -> Vec<Vec<u32>> {
    let d = def.shape().regular_arity().expect("regular tree") as u32;
    def.generators().iter().map(|(_, g)| level_images(g, d, n)).collect()
}

fn compose(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().map(|&x| b[x as usize]).collect()
}

/// All elements generated by `gens`, or `None` past `limit`.
pub fn closure(gens: &[Vec<u32>], degree: usize, limit: usize) -> Option<HashSet<Vec<u32>>> {
    let id: Vec<u32> = (0..degree as u32).collect();
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = compose(&x, g);
            if seen.insert(y.clone()) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(y);
            }
        }
    }
    Some(seen)
}

pub fn quotient_order(def: &GroupDef, n: usize) -> usize {
    let gens = generator_images(def, n);
    closure(&gens, gens[0].len(), 1 << 20).expect("small quotient").len()
}

pub fn orbit(gens: &[Vec<u32>], x: u32) -> HashSet<u32> {
    let mut seen = HashSet::from([x]);
    let mut queue = VecDeque::from([x]);
    while let Some(y) = queue.pop_front() {
        for g in gens {
            if seen.insert(g[y as usize]) {
                queue.push_back(g[y as usize]);
            }
        }
    }
    seen
}
