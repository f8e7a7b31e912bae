//! Rapidly null `G_δ` sets as budgeted staged tests.
//!
//! Level `n` of a test is a staged open set whose intensional measure must
//! stay at or below `2^{-n}`; every materialization is checked.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::{Bits, ClopenSet, OpenSet, Point};
use crate::dyadic::Dyadic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GDeltaError {
    #[error("test {test:?} exceeds its budget at level {level}, stage {}: μ_I = {measure} > 2^-{level}", stage_name(*.stage))]
    BudgetExceeded { test: String, level: usize, stage: Option<usize>, measure: Dyadic },
    #[error("test {test:?} cannot materialize level {level}: {reason}")]
    Unavailable { test: String, level: usize, reason: String },
}

fn stage_name(s: Option<usize>) -> String {
    s.map_or_else(|| "limit".to_string(), |s| s.to_string())
}

/// Produces the stages of each level. Implementations need not check
/// budgets; [`RapidGDelta`] does.
pub trait LevelSource: Send + Sync {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError>;

    /// The union over all stages, when it is finitely computable.
    fn limit(&self, _level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        None
    }
}

/// A rapidly null `G_δ` set `∩_n U_n` given by staged levels.
#[derive(Clone)]
pub struct RapidGDelta {
    label: String,
    source: Arc<dyn LevelSource>,
}

impl fmt::Debug for RapidGDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RapidGDelta({:?})", self.label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Avoidance {
    /// Not in the materialized stage; says nothing about later stages.
    AvoidsSoFar,
    CapturedAt { level: usize, cylinder: Bits },
}

impl RapidGDelta {
    pub fn new(label: impl Into<String>, source: Arc<dyn LevelSource>) -> Self {
        RapidGDelta { label: label.into(), source }
    }

    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(usize, usize) -> ClopenSet + Send + Sync + 'static,
    ) -> Self {
        RapidGDelta::new(label, Arc::new(FnSource(f)))
    }

    pub fn empty(label: impl Into<String>) -> Self {
        RapidGDelta::from_table(label, LevelTable::default())
    }

    pub fn from_table(label: impl Into<String>, table: LevelTable) -> Self {
        RapidGDelta::new(label, Arc::new(table))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> &Arc<dyn LevelSource> {
        &self.source
    }

    fn checked(&self, level: usize, stage: Option<usize>, set: ClopenSet) -> Result<ClopenSet, GDeltaError> {
        let measure = set.measure();
        if measure > Dyadic::pow2(-(level as i64)) {
            return Err(GDeltaError::BudgetExceeded { test: self.label.clone(), level, stage, measure });
        }
        Ok(set)
    }

    /// Stage `stage` of level `level`, budget-checked.
    pub fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        let set = self.source.stage(level, stage)?;
        self.checked(level, Some(stage), set)
    }

    /// The stage without the budget check, for diagnostics.
    pub fn stage_unchecked(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        self.source.stage(level, stage)
    }

    /// The whole level, budget-checked, when it is finitely computable.
    pub fn limit(&self, level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        let set = self.source.limit(level)?;
        Some(set.and_then(|s| self.checked(level, None, s)))
    }

    /// The exact `μ_I` of a stage; errors when it exceeds `2^{-level}`.
    pub fn budget_report(&self, level: usize, stage: usize) -> Result<Dyadic, GDeltaError> {
        self.stage(level, stage).map(|s| s.measure())
    }

    /// Whether `x` lies in the materialized stage of `level`.
    pub fn avoids(&self, x: &Point, level: usize, stage: usize) -> Result<Avoidance, GDeltaError> {
        Ok(capture(&self.stage(level, stage)?, x, level))
    }

    /// As [`RapidGDelta::avoids`] against the whole level when computable.
    pub fn avoids_limit(&self, x: &Point, level: usize) -> Option<Result<Avoidance, GDeltaError>> {
        Some(self.limit(level)?.map(|s| capture(&s, x, level)))
    }

    /// Materializes levels `0..levels` through stages `0..stages`.
    pub fn to_table(&self, levels: usize, stages: usize) -> Result<LevelTable, GDeltaError> {
        let mut out = Vec::with_capacity(levels);
        for level in 0..levels {
            let st: Result<Vec<ClopenSet>, GDeltaError> = (0..stages).map(|s| self.stage(level, s)).collect();
            out.push(OpenSet::accumulate(st?));
        }
        Ok(LevelTable { levels: out })
    }
}

fn capture(set: &ClopenSet, x: &Point, level: usize) -> Avoidance {
    let prefix = x.prefix(set.max_len());
    match set.generators().iter().find(|g| g.is_prefix_of(&prefix)) {
        Some(g) => Avoidance::CapturedAt { level, cylinder: g.clone() },
        None => Avoidance::AvoidsSoFar,
    }
}

struct FnSource<F>(F);

impl<F: Fn(usize, usize) -> ClopenSet + Send + Sync> LevelSource for FnSource<F> {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        Ok((self.0)(level, stage))
    }
}

/// Finitely many materialized levels; absent levels are empty and stages
/// past the end repeat the last one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTable {
    pub levels: Vec<OpenSet>,
}

impl LevelSource for LevelTable {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        Ok(self.levels.get(level).map(|o| o.stage(stage)).unwrap_or_default())
    }

    fn limit(&self, level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        Some(Ok(self.levels.get(level).map(OpenSet::last).unwrap_or_default()))
    }
}

/// The audit form of a table: every stage with its measure and budget.
#[derive(Clone, Debug, Serialize)]
pub struct TableAudit {
    pub levels: Vec<LevelAudit>,
}

impl TableAudit {
    pub fn within_budget(&self) -> bool {
        self.levels.iter().all(|l| l.stages.iter().all(|s| s.measure <= l.budget))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelAudit {
    pub level: usize,
    pub budget: Dyadic,
    pub stages: Vec<StageAudit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageAudit {
    pub antichain: ClopenSet,
    pub measure: Dyadic,
}

impl LevelTable {
    pub fn audit(&self) -> TableAudit {
        TableAudit {
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(level, o)| LevelAudit {
                    level,
                    budget: Dyadic::pow2(-(level as i64)),
                    stages: o
                        .stages()
                        .iter()
                        .map(|s| StageAudit { antichain: s.clone(), measure: s.measure() })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// How many inputs a combined stage consults.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Stage `s` consults inputs `n ≤ s`.
    Diagonal,
    /// Every stage consults inputs `n ≤ bound`.
    Fixed(usize),
}

impl Schedule {
    pub fn bound(self, stage: usize) -> usize {
        match self {
            Schedule::Diagonal => stage,
            Schedule::Fixed(b) => b,
        }
    }
}

struct Combined {
    tests: Vec<RapidGDelta>,
    schedule: Schedule,
}

impl LevelSource for Combined {
    fn stage(&self, level: usize, stage: usize) -> Result<ClopenSet, GDeltaError> {
        let bound = self.schedule.bound(stage);
        let mut parts = Vec::new();
        for (n, t) in self.tests.iter().enumerate().take(bound.saturating_add(1)) {
            parts.push(t.stage(n + level + 1, stage)?);
        }
        Ok(ClopenSet::union_all(&parts))
    }

    fn limit(&self, level: usize) -> Option<Result<ClopenSet, GDeltaError>> {
        let mut parts = Vec::new();
        for (n, t) in self.tests.iter().enumerate() {
            match t.limit(n + level + 1)? {
                Ok(s) => parts.push(s),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(ClopenSet::union_all(&parts)))
    }
}

/// `U_j = ∪_n A_{n, n+j+1}`: level `j` of the result is the union of level
/// `n + j + 1` of input `n`, over the inputs the schedule admits at each
/// stage. Its budget is `Σ_n 2^{-(n+j+1)} ≤ 2^{-j}`.
pub fn combine(label: impl Into<String>, tests: Vec<RapidGDelta>, schedule: Schedule) -> RapidGDelta {
    RapidGDelta::new(label, Arc::new(Combined { tests, schedule }))
}

/// An eventually periodic point `u 0^ω` with `|u| = k` outside `set`, if
/// any. A set with generators no longer than `k` that misses none of these
/// points contains every cylinder of length `k`, so it is all of `2^ω`.
pub fn periodic_escape(set: &ClopenSet, k: usize) -> Option<Point> {
    Bits::all_of_length(k)
        .map(|u| Point::periodic(u, Bits::zeros(1)).unwrap())
        .find(|x| !set.contains_point(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(gens: &[&str]) -> ClopenSet {
        ClopenSet::normalize(gens.iter().map(|s| Bits::from(*s)))
    }

    /// Level `n` is the single cone `[0^{n+1}]` from stage 0.
    fn cones() -> RapidGDelta {
        RapidGDelta::from_fn("cones", |level, _| ClopenSet::cylinder(Bits::zeros(level + 1)))
    }

    #[test]
    fn empty_inputs() {
        let c = combine("c", vec![], Schedule::Diagonal);
        for j in 0..4 {
            assert!(c.stage(j, 7).unwrap().is_empty());
            assert_eq!(c.avoids(&Point::seeded(1), j, 7).unwrap(), Avoidance::AvoidsSoFar);
        }
        assert_eq!(RapidGDelta::empty("e").budget_report(3, 3).unwrap(), Dyadic::zero());
    }

    #[test]
    fn single_test_shifts_levels() {
        let c = combine("c", vec![cones()], Schedule::Diagonal);
        for j in 0..5 {
            assert_eq!(c.stage(j, 0).unwrap(), cones().stage(j + 1, 0).unwrap());
            assert_eq!(c.budget_report(j, 0).unwrap(), Dyadic::pow2(-(j as i64) - 2));
        }
    }

    #[test]
    fn disjoint_measures_add() {
        let ones = RapidGDelta::from_fn("ones", |level, _| ClopenSet::cylinder(Bits::ones(level + 1)));
        let c = combine("c", vec![cones(), ones], Schedule::Diagonal);
        let m = c.budget_report(0, 5).unwrap();
        assert_eq!(m, Dyadic::pow2(-2) + Dyadic::pow2(-3));
        assert!(m <= Dyadic::one());
        // stage 0 of the diagonal schedule consults only the first input
        assert_eq!(c.budget_report(0, 0).unwrap(), Dyadic::pow2(-2));
    }

    #[test]
    fn capture_reports_the_cylinder() {
        let t = RapidGDelta::from_table(
            "t",
            LevelTable { levels: vec![OpenSet::accumulate([set(&["00"])])] },
        );
        assert_eq!(
            t.avoids(&Point::constant(false), 0, 0).unwrap(),
            Avoidance::CapturedAt { level: 0, cylinder: "00".into() }
        );
        assert_eq!(t.avoids(&Point::constant(true), 0, 0).unwrap(), Avoidance::AvoidsSoFar);
    }

    #[test]
    fn budget_violations_name_the_test() {
        let fat = RapidGDelta::from_fn("fat", |_, _| set(&["0"]));
        assert!(fat.stage(1, 0).is_ok());
        let err = fat.stage(2, 4).unwrap_err();
        assert_eq!(
            err,
            GDeltaError::BudgetExceeded { test: "fat".into(), level: 2, stage: Some(4), measure: Dyadic::pow2(-1) }
        );
        let c = combine("c", vec![cones(), fat], Schedule::Diagonal);
        match c.stage(0, 3) {
            Err(GDeltaError::BudgetExceeded { test, level, .. }) => {
                assert_eq!(test, "fat");
                assert_eq!(level, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn captured_inputs_are_captured_by_the_combination() {
        let inner = RapidGDelta::from_fn("inner", |level, _| ClopenSet::cylinder(Bits::ones(level + 2)));
        let c = combine("c", vec![cones(), inner.clone()], Schedule::Diagonal);
        let x = Point::constant(true);
        for j in 0..6 {
            // (k, k + j + 1) with k = 1 is materialized from stage 1 on
            assert!(matches!(inner.avoids(&x, j + 2, 1).unwrap(), Avoidance::CapturedAt { .. }));
            assert!(matches!(c.avoids(&x, j, 1).unwrap(), Avoidance::CapturedAt { .. }));
        }
    }

    #[test]
    fn honest_levels_miss_a_periodic_point() {
        for k in 1..6 {
            let half = ClopenSet::cylinder(Bits::zeros(1));
            assert!(periodic_escape(&half, k).is_some());
            assert!(periodic_escape(&ClopenSet::full(), k).is_none());
        }
    }

    fn arb_set(max_len: usize) -> impl Strategy<Value = ClopenSet> {
        prop::collection::vec(prop::collection::vec(any::<bool>(), 1..=max_len), 0..5)
            .prop_map(|v| ClopenSet::normalize(v.into_iter().map(Bits::from_bools)))
    }

    proptest! {
        #[test]
        fn combined_budgets_hold(raw in prop::collection::vec(prop::collection::vec(arb_set(7), 8), 1..5)) {
            // clip every input stage to its budget by intersecting with a
            // cone of the right size
            let tests: Vec<RapidGDelta> = raw
                .into_iter()
                .enumerate()
                .map(|(n, sets)| {
                    let sets = Arc::new(sets);
                    RapidGDelta::from_fn(format!("t{n}"), move |level, stage| {
                        let s = ClopenSet::union_all(&sets[..=stage.min(7)]);
                        s.intersection(&ClopenSet::cylinder(Bits::zeros(level)))
                    })
                })
                .collect();
            let c = combine("c", tests.clone(), Schedule::Diagonal);
            for j in 0..4 {
                for s in 0..6 {
                    let stage = c.stage(j, s).unwrap();
                    prop_assert!(stage.measure() <= Dyadic::pow2(-(j as i64)));
                    for (n, t) in tests.iter().enumerate().take(s + 1) {
                        prop_assert!(t.stage(n + j + 1, s).unwrap().is_subset(&stage));
                    }
                    // honest levels never capture every short periodic point
                    if j >= 1 && stage.max_len() <= 6 {
                        prop_assert!(periodic_escape(&stage, 6).is_some());
                    }
                }
            }
        }
    }
}
