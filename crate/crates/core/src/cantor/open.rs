use serde::{Deserialize, Serialize};

use super::{Bits, CantorError, ClopenSet};
use crate::dyadic::Dyadic;

/// A finitely materialized staged enumeration of an open set.
///
/// Stage `s` is a canonical antichain; each stage covers the previous one.
/// Queries past the last materialized stage see the last stage.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSet {
    stages: Vec<ClopenSet>,
}

impl OpenSet {
    pub fn empty() -> Self {
        OpenSet { stages: Vec::new() }
    }

    pub fn from_stages(stages: Vec<ClopenSet>) -> Result<Self, CantorError> {
        for s in 1..stages.len() {
            if !stages[s - 1].is_subset(&stages[s]) {
                return Err(CantorError::NotMonotone { stage: s });
            }
        }
        Ok(OpenSet { stages })
    }

    /// Builds stages by accumulating: stage `s` is the union of the inputs
    /// up to `s`, so monotonicity holds by construction.
    pub fn accumulate<I: IntoIterator<Item = ClopenSet>>(parts: I) -> Self {
        let mut stages: Vec<ClopenSet> = Vec::new();
        for part in parts {
            let next = match stages.last() {
                Some(prev) => prev.union(&part),
                None => part,
            };
            stages.push(next);
        }
        OpenSet { stages }
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[ClopenSet] {
        &self.stages
    }

    pub fn stage(&self, s: usize) -> ClopenSet {
        match self.stages.get(s).or(self.stages.last()) {
            Some(c) => c.clone(),
            None => ClopenSet::empty(),
        }
    }

    pub fn last(&self) -> ClopenSet {
        self.stages.last().cloned().unwrap_or_default()
    }

    pub fn measure_at(&self, s: usize) -> Dyadic {
        self.stage(s).measure()
    }

    /// The first stage containing `[p]`, if any.
    pub fn first_covering(&self, p: &Bits) -> Option<usize> {
        self.stages.iter().position(|c| c.contains_cylinder(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(gens: &[&str]) -> ClopenSet {
        ClopenSet::normalize(gens.iter().map(|s| Bits::from(*s)))
    }

    #[test]
    fn accumulate_is_monotone() {
        let o = OpenSet::accumulate([set(&["00"]), set(&["01"]), set(&["11"])]);
        assert_eq!(o.stage(1), set(&["0"]));
        assert_eq!(o.stage(9), set(&["0", "11"]));
        assert_eq!(o.measure_at(2), Dyadic::new(3, 2));
        assert_eq!(o.first_covering(&"010".into()), Some(1));
        assert!(OpenSet::from_stages(o.stages().to_vec()).is_ok());
    }

    #[test]
    fn rejects_shrinking_stages() {
        let err = OpenSet::from_stages(vec![set(&["0"]), set(&["00"])]).unwrap_err();
        assert_eq!(err, CantorError::NotMonotone { stage: 1 });
        assert_eq!(OpenSet::empty().stage(3), ClopenSet::empty());
    }
}
