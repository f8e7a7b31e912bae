//! Brute-force oracles that share no code paths with the library's exact
//! algorithms beyond the data types.

#![allow(dead_code)]

use cantor_measure::borel::{BorelCode, Node};
use cantor_measure::cantor::{Bits, ClopenSet, Point};
use cantor_measure::dyadic::Dyadic;
use cantor_measure::l1::StepFunction;

/// Whether some generator of `s` is a prefix of `p`.
pub fn leaf_hits(s: &ClopenSet, p: &[bool]) -> bool {
    s.generators().iter().any(|g| p.starts_with(g.as_slice()))
}

/// Truth of `c` on every point extending `p`; needs `|p| ≥` every leaf
/// generator length.
pub fn truth(c: &BorelCode, p: &[bool]) -> bool {
    match c.node() {
        Node::Leaf(s) => leaf_hits(s, p),
        Node::Union(ch) => ch.values().any(|k| truth(k, p)),
        Node::Inter(ch) => ch.values().all(|k| truth(k, p)),
        Node::Compl(k) => !truth(k, p),
    }
}

pub fn max_leaf_len(c: &BorelCode) -> usize {
    match c.node() {
        Node::Leaf(s) => s.generators().iter().map(|g| g.len()).max().unwrap_or(0),
        Node::Compl(k) => max_leaf_len(k),
        Node::Union(ch) | Node::Inter(ch) => ch.values().map(|k| max_leaf_len(k)).max().unwrap_or(0),
    }
}

pub fn prefixes(d: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << d).map(move |i| (0..d).map(|b| (i >> (d - 1 - b)) & 1 == 1).collect())
}

/// `#{p ∈ 2^d : c holds on [p]} / 2^d` with `d` the longest generator.
pub fn counted_measure(c: &BorelCode) -> Dyadic {
    let d = max_leaf_len(c);
    let hits = prefixes(d).filter(|p| truth(c, p)).count();
    Dyadic::new(hits as i64, d as u32)
}

pub fn point_of(p: &[bool]) -> Point {
    Point::constant(false).tail_append(&Bits::from_bools(p.to_vec()))
}

/// Values of `f` on all depth-`d` cylinders, read through single points.
pub fn table(f: &StepFunction, d: usize) -> Vec<Dyadic> {
    prefixes(d).map(|p| f.eval(&point_of(&p))).collect()
}

pub fn sum(xs: impl IntoIterator<Item = Dyadic>) -> Dyadic {
    xs.into_iter().fold(Dyadic::zero(), |a, b| &a + &b)
}

/// `‖f − g‖₁` from depth-`d` tables.
pub fn l1(f: &StepFunction, g: &StepFunction) -> Dyadic {
    let d = f.depth().max(g.depth());
    let diffs = table(f, d).into_iter().zip(table(g, d)).map(|(a, b)| (&a - &b).abs());
    sum(diffs).mul_pow2(-(d as i64))
}

/// Cell averages of `f` at depth `i`, as a depth-`max(i, depth f)` table.
pub fn averaged_table(f: &StepFunction, i: usize) -> Vec<Dyadic> {
    let d = f.depth().max(i);
    let t = table(f, d);
    let block = 1usize << (d - i);
    t.chunks(block)
        .flat_map(|c| {
            let avg = sum(c.iter().cloned()).mul_pow2(-((d - i) as i64));
            std::iter::repeat_n(avg, block)
        })
        .collect()
}
