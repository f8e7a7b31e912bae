//! Seeded random inputs: codes, step functions, names and test families.
//! The same seed always produces the same corpus.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::borel::{BorelCode, Children, Node, NodeKind, Ordinal};
use crate::cantor::{Bits, ClopenSet, OpenSet};
use crate::dyadic::Dyadic;
use crate::gdelta::{LevelTable, RapidGDelta};
use crate::l1::{L1Name, StepFunction, StepSequence};

/// Size limits for random codes.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    /// Longest leaf generator.
    pub depth: usize,
    pub height: usize,
    pub nodes: usize,
    pub complements: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { depth: 8, height: 5, nodes: 50, complements: false }
    }
}

pub struct Corpus {
    rng: ChaCha8Rng,
}

impl Corpus {
    pub fn new(seed: u64) -> Self {
        Corpus { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn bits(&mut self, len: usize) -> Bits {
        Bits::from_bools((0..len).map(|_| self.rng.random()).collect())
    }

    pub fn bits_upto(&mut self, max_len: usize) -> Bits {
        let len = self.rng.random_range(0..=max_len);
        self.bits(len)
    }

    /// One to three generators of length at most `max_len`; occasionally
    /// empty.
    pub fn clopen(&mut self, max_len: usize) -> ClopenSet {
        if self.rng.random_bool(0.05) {
            return ClopenSet::empty();
        }
        let k = self.rng.random_range(1..=3);
        let gens: Vec<Bits> = (0..k).map(|_| self.bits_upto(max_len)).collect();
        ClopenSet::normalize(gens)
    }

    pub fn code(&mut self, shape: Shape) -> BorelCode {
        let mut left = shape.nodes.max(1);
        self.code_in(shape, shape.height, &mut left)
    }

    fn code_in(&mut self, shape: Shape, height: usize, left: &mut usize) -> BorelCode {
        *left -= 1;
        if height == 0 || *left < 2 || self.rng.random_bool(0.3) {
            return BorelCode::leaf(self.clopen(shape.depth));
        }
        if shape.complements && self.rng.random_bool(0.15) {
            return BorelCode::compl(self.code_in(shape, height - 1, left));
        }
        let want = self.rng.random_range(1..=4);
        let mut children = Vec::new();
        while children.len() < want && *left > 0 {
            children.push(self.code_in(shape, height - 1, left));
        }
        if self.rng.random() {
            BorelCode::union(children)
        } else {
            BorelCode::inter(children)
        }
    }

    /// An alternating, complement-free code with ranks strictly decreasing
    /// to the leaves. Ranks occasionally jump past `ω`; the root rank is at
    /// most `ω·3`.
    pub fn ranked_code(&mut self, shape: Shape) -> BorelCode {
        let plain = self.code(Shape { complements: false, ..shape }).make_alternating();
        self.rank(&plain, true)
    }

    fn rank(&mut self, c: &BorelCode, root: bool) -> BorelCode {
        let (ch, union) = match c.node() {
            Node::Union(ch) => (ch, true),
            Node::Inter(ch) => (ch, false),
            _ => return c.clone().with_rank(Ordinal::one()),
        };
        let ranked: Children = ch.iter().map(|(i, k)| (*i, Arc::new(self.rank(k, false)))).collect();
        let top = ranked.values().filter_map(|k| k.rank().cloned()).max().unwrap_or_else(Ordinal::zero);
        let rank = self.rank_above(&top, root);
        let node = if union { Node::Union(ranked) } else { Node::Inter(ranked) };
        BorelCode::from_node(node).with_rank(rank)
    }

    /// Inner nodes jump at most to `ω·2 + 2`, so only the root can reach
    /// `ω·3`.
    fn rank_above(&mut self, top: &Ordinal, root: bool) -> Ordinal {
        let next = top.succ();
        let roll = self.rng.random_range(0..10);
        let w = Ordinal::omega();
        let jump = match roll {
            0 => Some(Ordinal::omega_power(1, 1)),
            1 => Some(Ordinal::omega_power(1, 2)),
            2 if root => Some(Ordinal::omega_power(1, 3)),
            2 => Some(Ordinal::omega_power(1, 2).add(&Ordinal::finite(2))),
            3 => Some(w.add(&Ordinal::finite(2))),
            _ => None,
        };
        match jump {
            Some(j) if j > *top => j,
            _ if roll == 9 && next.as_finite().is_some() => next.succ(),
            _ => next,
        }
    }

    /// Depth at most `max_depth`, values `k/4` with `-4 ≤ k ≤ 8`.
    pub fn step_function(&mut self, max_depth: usize) -> StepFunction {
        let d = self.rng.random_range(0..=max_depth);
        let values: Vec<Dyadic> =
            (0..1usize << d).map(|_| Dyadic::new(self.rng.random_range(-4i64..=8), 2)).collect();
        StepFunction::from_table(d, &values)
    }

    /// A perturbation with `‖e‖₁ ≤ 2^{-(n+3)}`: a value in `[-1, 1]` on one
    /// cylinder of length `n + 3`.
    fn blip(&mut self, n: usize) -> StepFunction {
        let p = self.bits(n + 3);
        let v = Dyadic::new(self.rng.random_range(-4i64..=4), 2);
        StepFunction::on_cylinder(&p, v)
    }

    /// A certified name converging to `g` with `terms` materialized terms.
    /// About a third are eventually constant, ending on `g` exactly.
    pub fn name_toward(&mut self, g: &StepFunction, terms: usize) -> L1Name {
        let terms = terms.max(1);
        let settle = self.rng.random_range(0..3) == 0;
        let mut fs: Vec<StepFunction> = (0..terms).map(|n| g.add(&self.blip(n))).collect();
        if settle {
            *fs.last_mut().unwrap() = g.clone();
            L1Name::certify(StepSequence::eventually_constant(fs)).expect("blips are rapid")
        } else {
            L1Name::certify_terms(fs).expect("blips are rapid")
        }
    }

    pub fn name(&mut self, max_depth: usize, terms: usize) -> L1Name {
        let g = self.step_function(max_depth);
        self.name_toward(&g, terms)
    }

    /// A name for `χ_B`.
    pub fn char_name(&mut self, b: &ClopenSet, terms: usize) -> L1Name {
        self.name_toward(&StepFunction::indicator(b), terms)
    }

    /// `h_0, …, h_{count-1}` with `‖h_j − h_{j+1}‖₁ ≤ 2^{-j}`, converging
    /// to `g`: `h_j` names `g` plus a perturbation of norm `≤ 2^{-(j+3)}`.
    pub fn name_family(&mut self, g: &StepFunction, count: usize, terms: usize) -> Vec<L1Name> {
        (0..count)
            .map(|j| {
                let target = if j + 1 == count { g.clone() } else { g.add(&self.blip(j)) };
                self.name_toward(&target, terms)
            })
            .collect()
    }

    /// Level `j` accumulates up to `stages` cylinders of length
    /// `j + 2 ..= j + 4`, so every stage has measure at most `2^{-j}`.
    pub fn level_table(&mut self, levels: usize, stages: usize) -> LevelTable {
        let levels = (0..levels)
            .map(|j| {
                let k = self.rng.random_range(0..=stages.min(4));
                let parts: Vec<ClopenSet> = (0..k)
                    .map(|_| {
                        let len = j + self.rng.random_range(2..=4);
                        ClopenSet::cylinder(self.bits(len))
                    })
                    .collect();
                OpenSet::accumulate(parts)
            })
            .collect();
        LevelTable { levels }
    }

    pub fn test_family(&mut self, count: usize, levels: usize, stages: usize) -> Vec<RapidGDelta> {
        (0..count)
            .map(|i| RapidGDelta::from_table(format!("t{i}"), self.level_table(levels, stages)))
            .collect()
    }

    /// Kind of a random inner node, for callers building their own trees.
    pub fn kind(&mut self) -> NodeKind {
        if self.rng.random() {
            NodeKind::Union
        } else {
            NodeKind::Inter
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = Corpus::new(5).code(Shape::default());
        let b = Corpus::new(5).code(Shape::default());
        assert_eq!(a, b);
    }

    #[test]
    fn shapes_respected() {
        let mut c = Corpus::new(11);
        for _ in 0..200 {
            let code = c.code(Shape::default());
            assert!(code.node_count() <= 50);
            assert!(code.support_depth() <= 8);
            assert!(code.is_complement_free());
            let r = c.ranked_code(Shape { nodes: 20, ..Shape::default() });
            assert_eq!(r.check_rank(), Ok(true));
            assert!(r.is_alternating());
            assert!(*r.rank().unwrap() <= Ordinal::omega_power(1, 3));
        }
    }

    #[test]
    fn names_and_families_certify() {
        let mut c = Corpus::new(3);
        for _ in 0..50 {
            let g = c.step_function(3);
            let hs = c.name_family(&g, 4, 9);
            for j in 0..3 {
                let d = crate::l1::name_distance(&hs[j], &hs[j + 1]);
                assert!(*d.lo() <= Dyadic::pow2(-(j as i64)));
            }
            let t = c.level_table(5, 4);
            assert!(t.audit().within_budget());
        }
    }
}
