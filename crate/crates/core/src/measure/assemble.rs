//! The null set outside of which a decomposition evaluates the code
//! correctly.
//!
//! Components, per address `σ` in breadth-first order:
//! - convergence of the name `f_σ`,
//! - at leaves, agreement of `f_σ` with the characteristic name of the
//!   label (convergence of the interleaving),
//! - at unions and intersections, the tests of the diagonal argument for
//!   `h_i = sup_{n < N_i} f_{σn}` (or `inf`) against `f_σ`.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{MeasureDecomposition, MeasureError};
use crate::borel::{Address, BorelCode, EvalMap, Node};
use crate::cantor::{ClopenSet, Point};
use crate::dyadic::Dyadic;
use crate::gdelta::{combine, GDeltaError, LevelSource, RapidGDelta, Schedule};
use crate::l1::{
    diagonal_name, extremum_finite, interleave, name_distance, BadSets, Extremum, L1Name, PointEvaluator,
    PointValue, StepFunction, StepSequence,
};

/// `∩_k ∪_{n>k} A_n`: level `k` is the union of the bad sets above `k`.
struct Convergence {
    bad: BadSets,
}

impl Convergence {
    fn top(&self, k: usize) -> usize {
        self.bad.settled_level().max(k + 1)
    }
}

impl LevelSource for Convergence {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        let parts: Vec<ClopenSet> = (level + 1..=self.top(level)).map(|n| self.bad.stage(n, stage)).collect();
        Ok(ClopenSet::union_all(&parts))
    }

    fn limit(&self, level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        let parts: Vec<ClopenSet> = (level + 1..=self.top(level)).map(|n| self.bad.limit(n)).collect();
        Some(Ok(ClopenSet::union_all(&parts)))
    }
}

/// `C_k = ∪_{j>k} ∪_{n>j} A_n(h_j)` for a family held at its last member.
struct TailUnion {
    bads: Vec<BadSets>,
}

impl TailUnion {
    fn each(&self, k: usize, f: impl Fn(&BadSets, usize) -> ClopenSet) -> ClopenSet {
        let last = self.bads.len() - 1;
        let mut parts = Vec::new();
        for j in k + 1..last {
            let b = &self.bads[j];
            parts.extend((j + 1..=b.settled_level().max(j + 1)).map(|n| f(b, n)));
        }
        // every j ≥ last contributes ∪_{n>j} A_n(h_last); the smallest
        // such j gives the largest union
        let j = (k + 1).max(last);
        let b = &self.bads[last];
        parts.extend((j + 1..=b.settled_level().max(j + 1)).map(|n| f(b, n)));
        ClopenSet::union_all(&parts)
    }
}

impl LevelSource for TailUnion {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        Ok(self.each(level, |b, n| b.stage(n, stage)))
    }

    fn limit(&self, level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        Some(Ok(self.each(level, |b, n| b.limit(n))))
    }
}

fn convergence(label: String, seq: &StepSequence) -> RapidGDelta {
    RapidGDelta::new(label, Arc::new(Convergence { bad: BadSets::new(seq) }))
}

/// Indices `N_i`: the least `N` with `‖h_N − g‖₁ ≤ 2^{-i-1}`, until the
/// whole family is used.
fn rapid_subsequence(hs: &[L1Name], g: &L1Name) -> Vec<usize> {
    let k = hs.len() - 1;
    let mut out = Vec::new();
    for i in 0..64usize {
        let bound = Dyadic::pow2(-(i as i64) - 1);
        let n = (0..=k).find(|&n| *name_distance(&hs[n], g).hi() <= bound).unwrap_or(k);
        out.push(n);
        if n == k {
            break;
        }
    }
    out
}

fn extremum_tests(
    node: &BorelCode,
    addr: &Address,
    d: &MeasureDecomposition,
    g: &L1Name,
    op: Extremum,
) -> Result<Vec<RapidGDelta>, MeasureError> {
    let kids: Vec<L1Name> = node
        .children()
        .into_iter()
        .map(|(i, _)| d.get(&addr.child(i)).cloned().ok_or(MeasureError::MissingName(addr.child(i))))
        .collect::<Result<_, _>>()?;
    // h_N for N = 0..=K
    let hs: Vec<L1Name> = (0..=kids.len())
        .map(|n| extremum_finite(&kids[..n], op))
        .collect::<Result<_, _>>()?;
    let picked: Vec<L1Name> = rapid_subsequence(&hs, g).into_iter().map(|n| hs[n].clone()).collect();
    let diag = diagonal_name(&picked, true, Some(g))?;
    let tag = match op {
        Extremum::Sup => "union",
        Extremum::Inf => "inter",
    };
    let mut out = Vec::new();
    for (j, h) in picked.iter().enumerate() {
        out.push(convergence(format!("{tag}{addr}:h{j}"), h.seq()));
    }
    out.push(convergence(format!("{tag}{addr}:diagonal"), diag.name.seq()));
    out.push(convergence(format!("{tag}{addr}:agree"), &interleave(diag.name.seq(), g.seq())));
    let bads = picked.iter().map(BadSets::of_name).collect();
    out.push(RapidGDelta::new(format!("{tag}{addr}:tails"), Arc::new(TailUnion { bads })));
    Ok(out)
}

/// The component tests, in the order they are combined.
pub fn bad_components(c: &BorelCode, d: &MeasureDecomposition) -> Result<Vec<RapidGDelta>, MeasureError> {
    if !c.is_complement_free() {
        return Err(MeasureError::NotComplementFree);
    }
    let mut out = Vec::new();
    for addr in c.addresses() {
        let node = c.subtree(&addr).expect("own address");
        let name = d.get(&addr).ok_or_else(|| MeasureError::MissingName(addr.clone()))?;
        out.push(convergence(format!("name{addr}"), name.seq()));
        match node.node() {
            Node::Leaf(s) => {
                let chi = StepSequence::constant(StepFunction::indicator(s));
                out.push(convergence(format!("leaf{addr}"), &interleave(name.seq(), &chi)));
            }
            Node::Union(_) => out.extend(extremum_tests(node, &addr, d, name, Extremum::Sup)?),
            Node::Inter(_) => out.extend(extremum_tests(node, &addr, d, name, Extremum::Inf)?),
            Node::Compl(_) => unreachable!("checked complement-free"),
        }
    }
    Ok(out)
}

/// A single rapidly null test containing every component.
pub fn assemble_bad_gdelta(c: &BorelCode, d: &MeasureDecomposition) -> Result<RapidGDelta, MeasureError> {
    Ok(combine("bad", bad_components(c, d)?, Schedule::Diagonal))
}

/// `f(x)` to within `2^{-precision}` at the least avoidance level that is
/// not captured, together with that level.
pub fn pointwise_value(name: &L1Name, x: &Point, precision: usize) -> Result<(Dyadic, usize), MeasureError> {
    let top = BadSets::of_name(name).settled_level() + 1;
    for k in 0..=top {
        if let PointValue::Value(v) = PointEvaluator::new(name, k).value(x, precision)? {
            return Ok((v, k));
        }
    }
    unreachable!("levels past the settled one capture nothing")
}

/// The map `σ ↦ [f_σ(x) ≥ 1/2]` with each value read to `2^{-precision}`.
pub fn evaluation_from_decomposition(
    c: &BorelCode,
    d: &MeasureDecomposition,
    x: &Point,
    precision: usize,
) -> Result<EvalMap, MeasureError> {
    let half = Dyadic::new(1, 1);
    let mut values = BTreeMap::new();
    for addr in c.addresses() {
        let name = d.get(&addr).ok_or_else(|| MeasureError::MissingName(addr.clone()))?;
        let (v, _) = pointwise_value(name, x, precision)?;
        values.insert(addr, v >= half);
    }
    Ok(EvalMap::from_values(values))
}
