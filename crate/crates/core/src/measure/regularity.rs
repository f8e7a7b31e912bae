//! Regularity approximations `(A, C)` with `A^c ⊆ B ⊆ C` and `A ∩ C`
//! rapidly null, and their exchange with L¹ names for `χ_B`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::MeasureError;
use crate::borel::BorelCode;
use crate::cantor::{Bits, ClopenSet, OpenSet, Point};
use crate::dyadic::Dyadic;
use crate::gdelta::{GDeltaError, LevelSource, RapidGDelta};
use crate::l1::{BoundCheck, L1Error, L1Name, StepFunction, StepSequence};

/// A `G_δ` set `∩_n U_n` given by staged levels, with no budget.
#[derive(Clone)]
pub struct StagedGDelta {
    label: String,
    source: Arc<dyn LevelSource>,
}

impl fmt::Debug for StagedGDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StagedGDelta({:?})", self.label)
    }
}

impl StagedGDelta {
    pub fn new(label: impl Into<String>, source: Arc<dyn LevelSource>) -> Self {
        StagedGDelta { label: label.into(), source }
    }

    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(usize, usize) -> ClopenSet + Send + Sync + 'static,
    ) -> Self {
        StagedGDelta::new(label, Arc::new(FnLevels(f)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        self.source.stage(level, stage)
    }

    pub fn limit(&self, level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        self.source.limit(level)
    }

    /// Levels `0..levels` through stages `0..stages`.
    pub fn to_stages(&self, levels: usize, stages: usize) -> Result<Vec<OpenSet>, GDeltaError> {
        (0..levels)
            .map(|n| (0..stages).map(|s| self.stage(n, s)).collect::<Result<Vec<_>, _>>().map(OpenSet::accumulate))
            .collect()
    }
}

struct FnLevels<F>(F);

impl<F: Fn(usize, usize) -> ClopenSet + Send + Sync> LevelSource for FnLevels<F> {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        Ok((self.0)(level, stage))
    }
}

#[derive(Clone, Debug)]
pub struct RegularityApprox {
    pub a: StagedGDelta,
    pub c: StagedGDelta,
}

/// `A_n ∩ C_n` stage by stage; materializing it checks the budget.
struct Overlap {
    a: StagedGDelta,
    c: StagedGDelta,
}

impl LevelSource for Overlap {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        Ok(self.a.stage(level, stage)?.intersection(&self.c.stage(level, stage)?))
    }

    fn limit(&self, level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        let a = self.a.limit(level)?;
        let c = self.c.limit(level)?;
        Some(a.and_then(|a| c.map(|c| a.intersection(&c))))
    }
}

/// Serialized form: both sides as staged open sets per level.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityTable {
    pub a: Vec<OpenSet>,
    pub c: Vec<OpenSet>,
}

impl RegularityApprox {
    pub fn new(a: StagedGDelta, c: StagedGDelta) -> Self {
        RegularityApprox { a, c }
    }

    /// `A ∩ C` as a budgeted test.
    pub fn overlap(&self) -> RapidGDelta {
        RapidGDelta::new("overlap", Arc::new(Overlap { a: self.a.clone(), c: self.c.clone() }))
    }

    /// `D_{n,s} = 2^ω \ (A_{n,s} ∪ C_{n,s})`.
    pub fn undecided(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        Ok(self.a.stage(level, stage)?.union(&self.c.stage(level, stage)?).complement())
    }

    pub fn to_table(&self, levels: usize, stages: usize) -> Result<RegularityTable, GDeltaError> {
        Ok(RegularityTable { a: self.a.to_stages(levels, stages)?, c: self.c.to_stages(levels, stages)? })
    }
}

/// `A_n = {f_{n+3} < 2/3}` and `C_n = {f_{n+3} > 1/3}`.
///
/// With term `m`, `μ(A ∩ C) ≤ 3·‖f_m − χ_B‖₁ ≤ 3·2^{-m+1}`; reading term
/// `n + 3` brings this under the level budget `2^{-n}`.
pub fn char_to_regularity(name: &L1Name) -> RegularityApprox {
    let level = |name: L1Name, lower: bool| {
        move |n: usize, _stage: usize| -> Result<ClopenSet, GDeltaError> {
            let f = name.term(n + 3).ok_or_else(|| GDeltaError::Unavailable {
                test: if lower { "A".into() } else { "C".into() },
                level: n,
                reason: format!("term {} is not materialized", n + 3),
            })?;
            Ok(sublevel(f, lower))
        }
    };
    RegularityApprox {
        a: StagedGDelta::new("A", Arc::new(ClopenLevels(level(name.clone(), true)))),
        c: StagedGDelta::new("C", Arc::new(ClopenLevels(level(name.clone(), false)))),
    }
}

fn sublevel(f: &StepFunction, lower: bool) -> ClopenSet {
    let two_thirds = |v: &Dyadic| v.cmp_ratio(2, 3).is_lt();
    let one_third = |v: &Dyadic| v.cmp_ratio(1, 3).is_gt();
    if lower {
        f.level_set(two_thirds)
    } else {
        f.level_set(one_third)
    }
}

/// Levels that are clopen at every stage.
struct ClopenLevels<F>(F);

impl<F: Fn(usize, usize) -> Result<ClopenSet, GDeltaError> + Send + Sync> LevelSource for ClopenLevels<F> {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        (self.0)(level, stage)
    }

    fn limit(&self, level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        Some((self.0)(level, 0))
    }
}

/// Checks, for terms `0..levels` of a name for `χ_B`, that the raw level
/// sets `{f_n < 2/3} ∩ {f_n > 1/3}` satisfy `μ ≤ 3·‖f_n − χ_B‖₁ ≤
/// 3·2^{-n+1}`. Every instance is returned with its exact values.
pub fn overlap_bounds(name: &L1Name, b: &ClopenSet, levels: usize) -> Result<Vec<BoundCheck>, MeasureError> {
    let chi = StepFunction::indicator(b);
    let mut out = Vec::with_capacity(levels);
    for n in 0..levels {
        let f = name.term(n).ok_or(L1Error::NotMaterialized { index: n })?;
        let value = sublevel(f, true).intersection(&sublevel(f, false)).measure();
        let by_norm = Dyadic::from_int(3) * f.l1_distance(&chi);
        let bound = Dyadic::from_int(3).mul_pow2(1 - n as i64);
        if value > by_norm || value > bound {
            return Err(L1Error::BoundViolation { check: "overlap", index: n, value, bound }.into());
        }
        out.push(BoundCheck { index: n, value, bound });
    }
    Ok(out)
}

/// The result of [`regularity_to_char`] with its exact checks.
#[derive(Clone, Debug)]
pub struct CharName {
    pub name: L1Name,
    /// `f_n = χ(C_{n+1, s(n)})`, before subsampling.
    pub raw: Vec<StepFunction>,
    /// `μ_I(D_{n+1, s(n)})` against `2^{-(n+1)}`.
    pub undecided: Vec<BoundCheck>,
    /// `‖f_n − f_m‖₁` against `2^{-n} + 2^{-m}` for all `n < m`.
    pub pairwise: Vec<(usize, usize, Dyadic)>,
}

/// A name for `χ_B` from a regularity approximation and a stage oracle:
/// `f_n` is the characteristic function of `C_{n+1, s(n)}`, provided
/// `μ_I(D_{n+1, s(n)}) < 2^{-(n+1)}`. The overlap budget is checked on the
/// same stages. The raw sequence satisfies `‖f_n − f_m‖₁ ≤ 2^{-n} + 2^{-m}`;
/// the name is `⟨f_{i+2}⟩`, which is strictly rapidly Cauchy.
pub fn regularity_to_char(
    r: &RegularityApprox,
    s: &dyn Fn(usize) -> usize,
    terms: usize,
) -> Result<CharName, MeasureError> {
    let count = terms.max(1) + 2;
    let overlap = r.overlap();
    let mut raw = Vec::with_capacity(count);
    let mut undecided = Vec::with_capacity(count);
    for n in 0..count {
        let stage = s(n);
        let level = n + 1;
        overlap.stage(level, stage)?;
        let d = r.undecided(level, stage)?.measure();
        let bound = Dyadic::pow2(-(level as i64));
        if d >= bound {
            return Err(MeasureError::Undecided { level, stage, measure: d });
        }
        undecided.push(BoundCheck { index: n, value: d, bound });
        raw.push(StepFunction::indicator(&r.c.stage(level, stage)?));
    }
    let mut pairwise = Vec::new();
    for n in 0..count {
        for m in n + 1..count {
            let dist = raw[n].l1_distance(&raw[m]);
            let bound = Dyadic::pow2(-(n as i64)) + Dyadic::pow2(-(m as i64));
            if dist > bound {
                return Err(L1Error::BoundViolation { check: "pairwise", index: n, value: dist, bound }.into());
            }
            pairwise.push((n, m, dist));
        }
    }
    let tail: Vec<StepFunction> = raw[2..].to_vec();
    let seq = if tail.windows(2).all(|w| w[0] == w[1]) {
        StepSequence::constant(tail[0].clone())
    } else {
        StepSequence::open(tail)
    };
    let name = L1Name::certify(seq)?;
    Ok(CharName { name, raw, undecided, pairwise })
}

/// The least stage `≤ max_stage` passing the undecided-measure check at
/// level `n + 1`.
pub fn search_stage(r: &RegularityApprox, n: usize, max_stage: usize) -> Result<Option<usize>, MeasureError> {
    let bound = Dyadic::pow2(-(n as i64) - 1);
    for s in 0..=max_stage {
        if r.undecided(n + 1, s)?.measure() < bound {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// [`regularity_to_char`] with the stage oracle found by search.
pub fn regularity_to_char_search(r: &RegularityApprox, terms: usize, max_stage: usize) -> Result<CharName, MeasureError> {
    let mut stages = Vec::new();
    for n in 0..terms.max(1) + 2 {
        match search_stage(r, n, max_stage)? {
            Some(s) => stages.push(s),
            None => {
                let measure = r.undecided(n + 1, max_stage)?.measure();
                return Err(MeasureError::Undecided { level: n + 1, stage: max_stage, measure });
            }
        }
    }
    regularity_to_char(r, &|n| stages[n], terms)
}

/// A point showing that `A^c ⊆ B ⊆ C` fails at some level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContainmentViolation {
    pub level: usize,
    pub point: String,
    /// `"outside A but not in B"` or `"in B but not in C"`.
    pub side: &'static str,
}

/// Checks `A_n^c ⊆ B ⊆ C_n` against `b` on the eventually periodic points
/// `u 0^ω` and `u 1^ω` with `|u| = k`, using level limits when available
/// and stage `stage` otherwise.
pub fn containment_report(
    r: &RegularityApprox,
    b: &BorelCode,
    levels: usize,
    stage: usize,
    k: usize,
) -> Result<Vec<ContainmentViolation>, MeasureError> {
    let pick = |g: &StagedGDelta, n: usize| -> Result<ClopenSet, GDeltaError> {
        match g.limit(n) {
            Some(l) => l,
            None => g.stage(n, stage),
        }
    };
    let points: Vec<Point> = Bits::all_of_length(k)
        .flat_map(|u| [false, true].map(|t| Point::periodic(u.clone(), Bits::from_bools(vec![t])).unwrap()))
        .collect();
    let mut out = Vec::new();
    for n in 0..levels {
        let a = pick(&r.a, n)?;
        let c = pick(&r.c, n)?;
        for x in &points {
            let in_b = b.contains(x);
            if !a.contains_point(x) && !in_b {
                out.push(ContainmentViolation { level: n, point: x.to_string(), side: "outside A but not in B" });
            }
            if in_b && !c.contains_point(x) {
                out.push(ContainmentViolation { level: n, point: x.to_string(), side: "in B but not in C" });
            }
        }
    }
    Ok(out)
}

/// `.p⌢1` as a dyadic.
fn dyadic_of(p: &Bits) -> Dyadic {
    let mut v = Dyadic::zero();
    for (i, b) in p.iter().chain(std::iter::once(true)).enumerate() {
        if b {
            v = v + Dyadic::pow2(-(i as i64) - 1);
        }
    }
    v
}

/// The open set of cylinders `[p⌢0]` with `.p⌢1 < a_n` for some `n`.
/// Stage `n` admits `|p| ≤ n` and `a_0, …, a_n`; its measure lies in
/// `[a_n − 2^{-n-1}, a_n]`.
pub fn sup_open_set(a: &[Dyadic]) -> Result<OpenSet, MeasureError> {
    for (i, v) in a.iter().enumerate() {
        if v.is_negative() || *v >= Dyadic::one() || (i > 0 && *v < a[i - 1]) {
            return Err(MeasureError::BadSequence { index: i });
        }
    }
    Ok(OpenSet::accumulate(a.iter().enumerate().map(|(n, an)| below(an, n))))
}

/// `{[p⌢0] : |p| ≤ n, .p⌢1 < a}`, built along the single path of `p` with
/// `.p < a` whose cylinder is not already covered.
fn below(a: &Dyadic, n: usize) -> ClopenSet {
    let mut gens = Vec::new();
    let mut p = Bits::empty();
    loop {
        if dyadic_of(&p) < *a {
            gens.push(p.with(false));
            // [p⌢0] is covered; only extensions of p⌢1 can add more
            p = p.with(true);
        } else {
            p = p.with(false);
        }
        if p.len() > n {
            break;
        }
    }
    ClopenSet::normalize(gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::l1::names_equal;

    fn chi(p: &str) -> StepFunction {
        StepFunction::indicator(&ClopenSet::cylinder(Bits::from(p)))
    }

    fn set(p: &str) -> ClopenSet {
        ClopenSet::cylinder(Bits::from(p))
    }

    #[test]
    fn constant_names() {
        let zero = char_to_regularity(&L1Name::constant(StepFunction::zero()));
        let one = char_to_regularity(&L1Name::constant(StepFunction::one()));
        for n in 0..5 {
            assert!(zero.a.stage(n, 0).unwrap().is_full());
            assert!(zero.c.stage(n, 0).unwrap().is_empty());
            assert!(one.a.stage(n, 0).unwrap().is_empty());
            assert!(one.c.stage(n, 0).unwrap().is_full());
        }
    }

    /// A name for `χ_[0]` whose term `i` is off by `1/2` on a cylinder of
    /// length `i + 2`.
    fn noisy_half() -> L1Name {
        let terms = (0..20)
            .map(|i| chi("0").add(&StepFunction::on_cylinder(&Bits::ones(i + 2), Dyadic::new(1, 1))))
            .collect();
        L1Name::certify_terms(terms).unwrap()
    }

    #[test]
    fn overlap_bound_on_a_converging_name() {
        let checks = overlap_bounds(&noisy_half(), &set("0"), 18).unwrap();
        assert!(checks.iter().all(|c| c.value <= c.bound));
        // 1/2 lies strictly between the thresholds, so the overlap is the
        // noise cylinder itself
        assert_eq!(checks[4].value, Dyadic::pow2(-6));
        let r = char_to_regularity(&noisy_half());
        for n in 0..15 {
            assert!(r.overlap().budget_report(n, 0).unwrap() <= Dyadic::pow2(-(n as i64)));
        }
    }

    #[test]
    fn round_trips() {
        let name = noisy_half();
        let r = char_to_regularity(&name);
        let back = regularity_to_char(&r, &|_| 0, 12).unwrap();
        assert!(names_equal(&name, &back.name, 64).equal);
        for (n, m, d) in &back.pairwise {
            assert!(*d <= Dyadic::pow2(-(*n as i64)) + Dyadic::pow2(-(*m as i64)));
        }
        let again = regularity_to_char(&char_to_regularity(&back.name), &|_| 0, 6).unwrap();
        assert!(names_equal(&back.name, &again.name, 64).equal);
        let c = L1Name::constant(chi("01"));
        let back = regularity_to_char_search(&char_to_regularity(&c), 10, 4).unwrap();
        assert_eq!(back.name.limit(), Some(&chi("01")));
    }

    #[test]
    fn degenerate_pairs_are_rejected() {
        // A and C both everything: the overlap budget fails at level 1
        let all = StagedGDelta::from_fn("all", |_, _| ClopenSet::full());
        let r = RegularityApprox::new(all.clone(), all);
        assert!(matches!(
            regularity_to_char(&r, &|_| 0, 4),
            Err(MeasureError::GDelta(GDeltaError::BudgetExceeded { level: 1, .. }))
        ));
        // an honest null A with C empty never decides enough
        let thin = StagedGDelta::from_fn("thin", |n, _| ClopenSet::cylinder(Bits::zeros(n + 1)));
        let none = StagedGDelta::from_fn("none", |_, _| ClopenSet::empty());
        let r = RegularityApprox::new(thin.clone(), none);
        assert!(matches!(search_stage(&r, 0, 20), Ok(None)));
        assert!(matches!(regularity_to_char(&r, &|_| 3, 4), Err(MeasureError::Undecided { level: 1, .. })));
        // an honest null A with C full is budget-correct, but A^c ⊆ B
        // fails for B = ∅ at a periodic point
        let full = StagedGDelta::from_fn("full", |_, _| ClopenSet::full());
        let r = RegularityApprox::new(thin, full);
        assert!(regularity_to_char(&r, &|_| 0, 4).is_ok());
        let v = containment_report(&r, &BorelCode::empty(), 3, 0, 4).unwrap();
        assert!(v.iter().any(|v| v.side == "outside A but not in B"));
    }

    #[test]
    fn containment_holds_for_exact_names() {
        let b = BorelCode::union(vec![BorelCode::cylinder("01".into()), BorelCode::cylinder("110".into())]);
        let f = StepFunction::indicator(&set("01").union(&set("110")));
        let r = char_to_regularity(&L1Name::constant(f));
        assert!(containment_report(&r, &b, 4, 0, 6).unwrap().is_empty());
    }

    #[test]
    fn sup_sets() {
        let zeros = sup_open_set(&vec![Dyadic::zero(); 6]).unwrap();
        assert!(zeros.last().is_empty());
        let half = sup_open_set(&vec![Dyadic::new(1, 1); 12]).unwrap();
        for n in 0..12 {
            let m = half.measure_at(n);
            assert!(m <= Dyadic::new(1, 1));
            assert!(Dyadic::new(1, 1) - m <= Dyadic::pow2(-(n as i64)));
        }
        let rising: Vec<Dyadic> = (0..16).map(|n| Dyadic::one() - Dyadic::pow2(-(n as i64))).collect();
        let s = sup_open_set(&rising).unwrap();
        for n in 0..16 {
            let m = s.measure_at(n);
            assert!(m <= rising[n]);
            assert!(&rising[n] - &m <= Dyadic::pow2(-(n as i64) - 1));
        }
        // within 2^-k of the supremum by stage k + 1
        for k in 0..14 {
            assert!(Dyadic::one() - s.measure_at(k + 1) <= Dyadic::pow2(-(k as i64)));
        }
        assert!(matches!(sup_open_set(&[Dyadic::new(1, 1), Dyadic::new(1, 2)]), Err(MeasureError::BadSequence { index: 1 })));
        assert!(matches!(sup_open_set(&[Dyadic::one()]), Err(MeasureError::BadSequence { index: 0 })));
    }
}
