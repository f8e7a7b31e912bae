use serde::Serialize;

use super::{L1Error, L1Name, StepFunction, StepSequence, Tail};
use crate::cantor::{ClopenSet, OpenSet, Point};
use crate::dyadic::Dyadic;

/// The sets `A_n = {x : ∃N Σ_{i=2n+1}^N |f_i(x) − f_{i+1}(x)| > 2^{-n}}` of
/// a step sequence, staged by `N`.
///
/// Partial sums are precomputed once; for periodic tails any stage is
/// obtained in closed form, so `stage(n, N)` is cheap for every `N`.
#[derive(Clone, Debug)]
pub struct BadSets {
    /// `P(m) = Σ_{i<m} |f_i − f_{i+1}|` for `m ≤ prefix.len() - 1`.
    prefix: Vec<StepFunction>,
    /// `(s0, p, C)`: differences repeat with period `p` from `s0`, and `C`
    /// is the sum over one period.
    cycle: Option<(usize, usize, StepFunction)>,
}

impl BadSets {
    pub fn new(seq: &StepSequence) -> Self {
        let known = match seq.tail() {
            Tail::Open => seq.len() - 1,
            Tail::Cycle(_) => seq.len(),
        };
        let mut prefix = vec![StepFunction::zero()];
        for i in 0..known {
            let d = seq.term(i).unwrap().sub(seq.term(i + 1).unwrap()).abs();
            let next = prefix[i].add(&d);
            prefix.push(next);
        }
        let cycle = match seq.tail() {
            Tail::Open => None,
            Tail::Cycle(p) => {
                let s0 = seq.len() - p;
                Some((s0, p, prefix[s0 + p].sub(&prefix[s0])))
            }
        };
        BadSets { prefix, cycle }
    }

    pub fn of_name(name: &L1Name) -> Self {
        BadSets::new(name.seq())
    }

    /// `P(m)`, or `None` past the known differences of an open sequence.
    fn partial(&self, m: usize) -> Option<StepFunction> {
        if m < self.prefix.len() {
            return Some(self.prefix[m].clone());
        }
        let (s0, p, c) = self.cycle.as_ref()?;
        let q = (m - s0) / p;
        let r = (m - s0) % p;
        Some(self.prefix[s0 + r].add(&c.scale(&Dyadic::from_int(q as i64))))
    }

    /// Last stage index that differs from its predecessor for an open
    /// sequence; `None` for periodic tails.
    pub fn last_known_stage(&self) -> Option<usize> {
        match self.cycle {
            Some(_) => None,
            None => Some(self.prefix.len().saturating_sub(2)),
        }
    }

    /// `Σ_{i=2n+1}^{N} |f_i − f_{i+1}|`, clamped to known differences.
    pub fn sum(&self, level: usize, stage: usize) -> StepFunction {
        let lo = 2 * level + 1;
        let hi = match self.cycle {
            Some(_) => stage + 1,
            None => (stage + 1).min(self.prefix.len() - 1),
        };
        if hi <= lo {
            return StepFunction::zero();
        }
        self.partial(hi).unwrap().sub(&self.partial(lo).unwrap())
    }

    /// Stage `N` of `A_level`.
    pub fn stage(&self, level: usize, stage: usize) -> ClopenSet {
        let bound = Dyadic::pow2(-(level as i64));
        self.sum(level, stage).level_set(|v| *v > bound)
    }

    /// The union of all stages of `A_level`.
    pub fn limit(&self, level: usize) -> ClopenSet {
        match &self.cycle {
            None => self.stage(level, self.prefix.len()),
            Some((s0, _, c)) => {
                let lo = 2 * level + 1;
                let m = (*s0).max(lo);
                let settled = if m > lo {
                    self.partial(m).unwrap().sub(&self.partial(lo).unwrap())
                } else {
                    StepFunction::zero()
                };
                let bound = Dyadic::pow2(-(level as i64));
                settled
                    .level_set(|v| *v > bound)
                    .union(&c.level_set(|v| !v.is_zero()))
            }
        }
    }

    /// Levels beyond this one all have the same limit, empty for certified
    /// names.
    pub fn settled_level(&self) -> usize {
        let edge = match self.cycle {
            Some((s0, _, _)) => s0,
            None => self.prefix.len(),
        };
        edge / 2 + 1
    }

    pub fn staged(&self, level: usize, stages: usize) -> OpenSet {
        OpenSet::accumulate((0..stages).map(|s| self.stage(level, s)))
    }
}

/// The staged bad set `A_level` of a name, materialized through stage
/// `stages - 1`.
pub fn bad_set(name: &L1Name, level: usize, stages: usize) -> OpenSet {
    BadSets::of_name(name).staged(level, stages)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointValue {
    Value(Dyadic),
    Captured { level: usize },
}

impl PointValue {
    pub fn value(&self) -> Option<&Dyadic> {
        match self {
            PointValue::Value(v) => Some(v),
            PointValue::Captured { .. } => None,
        }
    }
}

/// Pointwise evaluation of a name outside `∪_{n ≥ k} A_n`, with the bad
/// sets for the avoidance level precomputed.
#[derive(Clone, Debug)]
pub struct PointEvaluator {
    name: L1Name,
    avoid: usize,
    captures: Vec<(usize, ClopenSet)>,
}

impl PointEvaluator {
    pub fn new(name: &L1Name, avoid: usize) -> Self {
        let bad = BadSets::of_name(name);
        let top = bad.settled_level().max(avoid);
        let captures = (avoid..=top)
            .map(|j| (j, bad.limit(j)))
            .filter(|(_, s)| !s.is_empty())
            .collect();
        PointEvaluator { name: name.clone(), avoid, captures }
    }

    /// The set of points captured at levels `≥ k`.
    pub fn captured_set(&self) -> ClopenSet {
        ClopenSet::union_all(self.captures.iter().map(|c| &c.1))
    }

    /// `f_m(x)` with `m = 2·max(ℓ, k) + 1`, which lies within `2^{-ℓ}` of the
    /// limit when `x` avoids every `A_j`, `j ≥ k`.
    pub fn value(&self, x: &Point, precision: usize) -> Result<PointValue, L1Error> {
        for (level, set) in &self.captures {
            if set.contains_point(x) {
                return Ok(PointValue::Captured { level: *level });
            }
        }
        let m = 2 * precision.max(self.avoid) + 1;
        let term = self.name.term(m).ok_or(L1Error::NotMaterialized { index: m })?;
        Ok(PointValue::Value(term.eval(x)))
    }
}

pub fn value_at(name: &L1Name, x: &Point, precision: usize, avoid: usize) -> Result<PointValue, L1Error> {
    PointEvaluator::new(name, avoid).value(x, precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::Bits;

    fn chi(p: &str) -> StepFunction {
        StepFunction::indicator(&ClopenSet::cylinder(Bits::from(p)))
    }

    fn cones(n: usize) -> L1Name {
        L1Name::certify_terms((0..n).map(|i| chi(&"0".repeat(i))).collect()).unwrap()
    }

    #[test]
    fn constant_names_have_empty_bad_sets() {
        let c = L1Name::constant(chi("01"));
        for level in 0..4 {
            assert!(bad_set(&c, level, 10).stages().iter().all(ClopenSet::is_empty));
        }
    }

    #[test]
    fn cone_sequence_budget() {
        // the partial sums are indicators of disjoint cones, so they never
        // exceed 2^0 strictly and A_0 stays empty
        let name = cones(30);
        let a0 = bad_set(&name, 0, 30);
        assert!(a0.last().is_empty());
        for level in 0..6 {
            let a = bad_set(&name, level, 30);
            for s in a.stages() {
                assert!(s.measure() <= Dyadic::pow2(-(level as i64)));
            }
        }
    }

    #[test]
    fn staged_sums_match_direct_sums() {
        let terms: Vec<StepFunction> = vec![
            chi(""),
            chi("0").scale(&Dyadic::new(3, 1)),
            chi("00"),
            chi("00").scale(&Dyadic::new(5, 2)),
        ];
        let seq = StepSequence::eventually_constant(terms.clone());
        let bad = BadSets::new(&seq);
        for n in 0..3usize {
            for big_n in 0..8usize {
                let mut direct = StepFunction::zero();
                for i in (2 * n + 1)..=big_n {
                    let a = seq.term(i).unwrap();
                    let b = seq.term(i + 1).unwrap();
                    direct = direct.add(&a.sub(b).abs());
                }
                assert_eq!(bad.sum(n, big_n), direct, "n={n} N={big_n}");
            }
        }
    }

    #[test]
    fn periodic_closed_form() {
        let seq = StepSequence::new(vec![chi("1"), chi("0"), chi("01")], Tail::Cycle(2));
        let bad = BadSets::new(&seq);
        for big_n in 0..40usize {
            let mut direct = StepFunction::zero();
            for i in 1..=big_n {
                direct = direct.add(&seq.term(i).unwrap().sub(seq.term(i + 1).unwrap()).abs());
            }
            assert_eq!(bad.sum(0, big_n), direct);
        }
        // the cycle differs on [00], so every level eventually captures it
        assert!(bad.limit(5).contains_cylinder(&"00".into()));
        assert!(bad.stage(5, 1000).contains_cylinder(&"00".into()));
    }

    #[test]
    fn pointwise_values() {
        let c = L1Name::constant(StepFunction::constant(Dyadic::new(3, 3)));
        let v = value_at(&c, &Point::seeded(4), 7, 0).unwrap();
        assert_eq!(v, PointValue::Value(Dyadic::new(3, 3)));
        let name = cones(40);
        let zero = Point::constant(false);
        for l in 0..8 {
            assert_eq!(value_at(&name, &zero, l, 0).unwrap(), PointValue::Value(Dyadic::one()));
        }
        // x = 0^5 1 0^ω: the strict bound keeps it out of A_0, but A_1 sums
        // from index 3 and picks up the jump at index 5
        let x = Point::constant(false).tail_append(&Bits::zeros_then_one(5));
        assert_eq!(value_at(&name, &x, 3, 0).unwrap(), PointValue::Captured { level: 1 });
        assert!(!BadSets::of_name(&name).limit(0).contains_point(&x));
        // 0^2 1 0^ω avoids every A_j; its value is within 2^{-ℓ} of the limit 0
        let y = Point::constant(false).tail_append(&Bits::zeros_then_one(2));
        assert_eq!(value_at(&name, &y, 3, 0).unwrap(), PointValue::Value(Dyadic::zero()));
        assert_eq!(value_at(&name, &y, 0, 0).unwrap(), PointValue::Value(Dyadic::one()));
        assert!(matches!(
            value_at(&name, &y, 30, 0),
            Err(L1Error::NotMaterialized { index: 61 })
        ));
    }

    #[test]
    fn capture_of_nonconvergent_points() {
        // a sequence that oscillates by 1/2 on [1] from index 1 on
        let half = chi("1").scale(&Dyadic::new(1, 1));
        let seq = StepSequence::new(vec![StepFunction::zero(), half.clone(), StepFunction::zero()], Tail::Cycle(2));
        let bad = BadSets::new(&seq);
        assert!(bad.limit(0).contains_cylinder(&"1".into()));
        assert!(!bad.limit(0).contains_cylinder(&"0".into()));
    }
}
