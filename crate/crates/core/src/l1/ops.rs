use serde::Serialize;

use super::{L1Error, L1Name, StepFunction, StepSequence};
use crate::dyadic::{Dyadic, DyadicInterval};

/// Bounds on `‖a − b‖₁` between the elements named by `a` and `b`, from
/// their best approximations.
pub fn name_distance(a: &L1Name, b: &L1Name) -> DyadicInterval {
    let (fa, ia) = a.best_approximation();
    let (fb, ib) = b.best_approximation();
    let slack = |i: Option<usize>| i.map(|i| Dyadic::pow2(1 - i as i64)).unwrap_or_default();
    let d = fa.l1_distance(fb);
    let s = slack(ia) + slack(ib);
    let lo = (&d - &s).max(Dyadic::zero());
    DyadicInterval::new(lo, d + s).expect("nonnegative width")
}

/// A checked instance of one of the diagonal bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub index: usize,
    pub value: Dyadic,
    pub bound: Dyadic,
}

#[derive(Clone, Debug)]
pub struct Diagonal {
    /// `f^i = h_i^{2i+1}` for every materialized `i`.
    pub raw: Vec<StepFunction>,
    /// The certified name `⟨f^{i+2}⟩`.
    pub name: L1Name,
    /// `∫|f^i − f^{i+1}|` against `2^{-2i} + 2^{-i} + 2^{-2i}`.
    pub step_checks: Vec<BoundCheck>,
    /// `∫|f^i − g|` against `2^{-2i} + 2^{-i+1}`, when `g` was supplied.
    pub limit_checks: Vec<BoundCheck>,
}

fn pow2(k: i64) -> Dyadic {
    Dyadic::pow2(k)
}

/// The diagonal `f^i = h_i^{2i+1}` of a rapidly converging sequence of
/// names. With `hold_last`, `h_j` for `j` past the list is the last member,
/// and the diagonal becomes eventually constant when that member is.
///
/// The premise `‖h_j − h_{j+1}‖₁ ≤ 2^{-j}` is checked first; any bound
/// failure afterwards is reported with its exact values.
pub fn diagonal_name(hs: &[L1Name], hold_last: bool, g: Option<&L1Name>) -> Result<Diagonal, L1Error> {
    if hs.is_empty() {
        return Err(L1Error::EmptyFamily);
    }
    for j in 0..hs.len() - 1 {
        let d = name_distance(&hs[j], &hs[j + 1]);
        if *d.lo() > pow2(-(j as i64)) {
            return Err(L1Error::RateFalsified { stage: j, norm: d.lo().clone() });
        }
    }
    let last = hs.last().unwrap();
    let member = |i: usize| if i < hs.len() { &hs[i] } else { last };
    let settled = hold_last && last.limit().is_some();
    let count = if settled {
        // past this index every f^i is the limit term of the last member
        hs.len().max(last.seq().len() / 2 + 1) + 3
    } else {
        hs.len()
    };
    let mut raw = Vec::with_capacity(count);
    for i in 0..count {
        let t = member(i).term(2 * i + 1).ok_or(L1Error::NotMaterialized { index: 2 * i + 1 })?;
        raw.push(t.clone());
    }
    let mut step_checks = Vec::new();
    for i in 0..raw.len().saturating_sub(1) {
        let value = raw[i].l1_distance(&raw[i + 1]);
        let bound = pow2(-2 * i as i64) + pow2(-(i as i64)) + pow2(-2 * i as i64);
        if value > bound {
            return Err(L1Error::BoundViolation { check: "step", index: i, value, bound });
        }
        step_checks.push(BoundCheck { index: i, value, bound });
    }
    let mut limit_checks = Vec::new();
    if let Some(g) = g {
        let (fg, ig) = g.best_approximation();
        let slack = ig.map(|i| pow2(1 - i as i64)).unwrap_or_default();
        for (i, f) in raw.iter().enumerate() {
            let value = f.l1_distance(fg);
            let bound = pow2(-2 * i as i64) + pow2(1 - i as i64);
            if value > &bound + &slack {
                return Err(L1Error::BoundViolation { check: "limit", index: i, value, bound });
            }
            limit_checks.push(BoundCheck { index: i, value, bound });
        }
    }
    let shifted: Vec<StepFunction> = raw.iter().skip(2).cloned().collect();
    let shifted = if shifted.is_empty() { vec![raw.last().unwrap().clone()] } else { shifted };
    let seq = if settled {
        StepSequence::eventually_constant(shifted)
    } else {
        StepSequence::open(shifted)
    };
    let name = L1Name::certify(seq)?;
    Ok(Diagonal { raw, name, step_checks, limit_checks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Sup,
    Inf,
}

impl Extremum {
    fn apply(self, a: &StepFunction, b: &StepFunction) -> StepFunction {
        match self {
            Extremum::Sup => a.max(b),
            Extremum::Inf => a.min(b),
        }
    }

    /// The value of the empty extremum on characteristic functions.
    fn identity(self) -> StepFunction {
        match self {
            Extremum::Sup => StepFunction::zero(),
            Extremum::Inf => StepFunction::one(),
        }
    }
}

fn ceil_log2(r: usize) -> usize {
    if r <= 1 {
        0
    } else {
        (usize::BITS - (r - 1).leading_zeros()) as usize
    }
}

/// `sup_n f_n` (or `inf_n`) named from a rate witness: the extremum over the
/// first `rate(s)` members is within `2^{-s}` of the full one.
///
/// Stage `s` takes member term `k_s = s + 1 + ⌈log₂ rate(s)⌉`, which keeps
/// the stage within `2^{-s+1}` of the limit; the output term `i` is stage
/// `i + 3`. Consecutive stages further than `3·2^{-s}` apart falsify the
/// witness.
pub fn extremum_name(
    family: &[L1Name],
    rate: &dyn Fn(usize) -> usize,
    stages: usize,
    op: Extremum,
) -> Result<L1Name, L1Error> {
    if family.is_empty() {
        return Ok(L1Name::constant(op.identity()));
    }
    let stage = |s: usize| -> Result<StepFunction, L1Error> {
        let r = rate(s).clamp(1, family.len());
        let k = s + 1 + ceil_log2(r);
        let mut acc: Option<StepFunction> = None;
        for f in &family[..r] {
            let t = f.term(k).ok_or(L1Error::NotMaterialized { index: k })?;
            acc = Some(match acc {
                None => t.clone(),
                Some(a) => op.apply(&a, t),
            });
        }
        Ok(acc.unwrap())
    };
    let stages = stages.max(1);
    let mut ts = Vec::with_capacity(stages + 1);
    for s in 3..stages + 4 {
        ts.push(stage(s)?);
    }
    for (k, w) in ts.windows(2).enumerate() {
        let s = k + 3;
        let norm = w[0].l1_distance(&w[1]);
        if norm > Dyadic::from_int(3).mul_pow2(-(s as i64)) {
            return Err(L1Error::RateFalsified { stage: s, norm });
        }
    }
    ts.pop();
    L1Name::certify(StepSequence::open(ts))
}

pub fn sup_name(family: &[L1Name], rate: &dyn Fn(usize) -> usize, stages: usize) -> Result<L1Name, L1Error> {
    extremum_name(family, rate, stages, Extremum::Sup)
}

pub fn inf_name(family: &[L1Name], rate: &dyn Fn(usize) -> usize, stages: usize) -> Result<L1Name, L1Error> {
    extremum_name(family, rate, stages, Extremum::Inf)
}

/// The extremum of a finite family. Exact (a constant name) when every
/// member is eventually constant; otherwise the whole family is used at
/// every stage.
pub fn extremum_finite(family: &[L1Name], op: Extremum) -> Result<L1Name, L1Error> {
    if family.is_empty() {
        return Ok(L1Name::constant(op.identity()));
    }
    let limits: Option<Vec<&StepFunction>> = family.iter().map(L1Name::limit).collect();
    if let Some(ls) = limits {
        let mut acc = ls[0].clone();
        for l in &ls[1..] {
            acc = op.apply(&acc, l);
        }
        return Ok(L1Name::constant(acc));
    }
    let usable = family
        .iter()
        .filter(|f| f.limit().is_none())
        .map(|f| f.deepest())
        .min()
        .unwrap();
    let spare = usable.saturating_sub(1 + ceil_log2(family.len()));
    if spare < 4 {
        return Err(L1Error::NotMaterialized { index: 4 + 1 + ceil_log2(family.len()) });
    }
    let n = family.len();
    extremum_name(family, &move |_| n, spare - 3, op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{Bits, ClopenSet};

    fn chi(p: &str) -> StepFunction {
        StepFunction::indicator(&ClopenSet::cylinder(Bits::from(p)))
    }

    fn cones(n: usize) -> L1Name {
        L1Name::certify_terms((0..n).map(|i| chi(&"0".repeat(i))).collect()).unwrap()
    }

    #[test]
    fn diagonal_of_a_constant_family_is_a_subsequence() {
        let g = cones(40);
        let hs = vec![g.clone(); 12];
        let d = diagonal_name(&hs, false, Some(&g)).unwrap();
        for (i, f) in d.raw.iter().enumerate() {
            assert_eq!(Some(f), g.term(2 * i + 1));
        }
        assert_eq!(d.name.term(0), g.term(5));
        assert_eq!(d.step_checks.len(), 11);
        assert_eq!(d.limit_checks.len(), 12);
    }

    #[test]
    fn diagonal_bounds_on_converging_family() {
        // h_j = χ_[0^{j+1}], then held at χ_[0^10]
        let hs: Vec<L1Name> = (0..10).map(|j| L1Name::constant(chi(&"0".repeat(j + 1)))).collect();
        let g = L1Name::constant(chi("0000000000"));
        let d = diagonal_name(&hs, true, Some(&g)).unwrap();
        for c in d.step_checks.iter().chain(&d.limit_checks) {
            assert!(c.value <= c.bound);
        }
        assert_eq!(d.name.limit(), Some(&chi("0000000000")));
    }

    #[test]
    fn false_rate_is_reported() {
        let one = L1Name::constant(StepFunction::one());
        let hs = vec![one.clone(), one, L1Name::constant(StepFunction::zero())];
        assert!(matches!(diagonal_name(&hs, false, None), Err(L1Error::RateFalsified { stage: 1, .. })));
    }

    #[test]
    fn extremum_examples() {
        let fam = [L1Name::constant(chi("0")), L1Name::constant(chi("1"))];
        let s = extremum_finite(&fam, Extremum::Sup).unwrap();
        assert_eq!(s.limit(), Some(&StepFunction::one()));
        let single = [cones(20)];
        let s = sup_name(&single, &|_| 1, 6).unwrap();
        assert_eq!(s.term(0), cones(20).term(4));
        assert!(extremum_finite(&[], Extremum::Sup).unwrap().limit() == Some(&StepFunction::zero()));
        assert!(extremum_finite(&[], Extremum::Inf).unwrap().limit() == Some(&StepFunction::one()));
    }

    #[test]
    fn decreasing_family_infimum() {
        let fam: Vec<L1Name> = (0..30).map(|n| L1Name::constant(chi(&"0".repeat(n)))).collect();
        let inf = inf_name(&fam, &|s| s + 1, 12).unwrap();
        for i in 0..12 {
            let t = inf.term(i).unwrap();
            assert_eq!(t.integral(), Dyadic::pow2(-(i as i64 + 3)));
        }
    }

    #[test]
    fn falsified_rate_witness() {
        // claims one member suffices although the second matters
        let fam = [L1Name::constant(StepFunction::zero()), L1Name::constant(StepFunction::one())];
        let bad = |s: usize| if s < 6 { 1 } else { 2 };
        assert!(matches!(sup_name(&fam, &bad, 8), Err(L1Error::RateFalsified { stage: 5, .. })));
    }
}
