use serde::{Deserialize, Serialize};

use super::{L1Error, StepFunction};
use crate::dyadic::{Dyadic, DyadicInterval};

/// How a sequence continues past its materialized terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// Only the materialized terms are known.
    Open,
    /// The last `p` terms repeat forever; `Cycle(1)` is an eventually
    /// constant sequence.
    Cycle(usize),
}

/// A sequence of step functions, possibly with a periodic tail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSequence {
    terms: Vec<StepFunction>,
    tail: Tail,
}

impl StepSequence {
    pub fn new(terms: Vec<StepFunction>, tail: Tail) -> Self {
        assert!(!terms.is_empty(), "a sequence needs at least one term");
        if let Tail::Cycle(p) = tail {
            assert!(p >= 1 && p <= terms.len(), "cycle longer than the materialized terms");
        }
        StepSequence { terms, tail }
    }

    pub fn open(terms: Vec<StepFunction>) -> Self {
        StepSequence::new(terms, Tail::Open)
    }

    pub fn eventually_constant(terms: Vec<StepFunction>) -> Self {
        StepSequence::new(terms, Tail::Cycle(1))
    }

    pub fn constant(f: StepFunction) -> Self {
        StepSequence::eventually_constant(vec![f])
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn materialized(&self) -> &[StepFunction] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of indices with a known term; `None` when infinite.
    pub fn known_len(&self) -> Option<usize> {
        match self.tail {
            Tail::Open => Some(self.terms.len()),
            Tail::Cycle(_) => None,
        }
    }

    /// Start of the periodic part.
    pub fn cycle_start(&self) -> Option<usize> {
        match self.tail {
            Tail::Open => None,
            Tail::Cycle(p) => Some(self.terms.len() - p),
        }
    }

    pub fn term(&self, i: usize) -> Option<&StepFunction> {
        if i < self.terms.len() {
            return Some(&self.terms[i]);
        }
        match self.tail {
            Tail::Open => None,
            Tail::Cycle(p) => {
                let start = self.terms.len() - p;
                Some(&self.terms[start + (i - start) % p])
            }
        }
    }

    /// The exact pointwise limit of an eventually constant sequence.
    pub fn limit(&self) -> Option<&StepFunction> {
        match self.tail {
            Tail::Cycle(p) if p == 1 || self.cycle_is_constant() => self.terms.last(),
            _ => None,
        }
    }

    fn cycle_is_constant(&self) -> bool {
        match self.cycle_start() {
            Some(s) => self.terms[s..].windows(2).all(|w| w[0] == w[1]),
            None => false,
        }
    }

    /// Drops the first `k` terms; an open sequence keeps at least its last
    /// term.
    pub fn shift(&self, k: usize) -> StepSequence {
        match self.tail {
            Tail::Open => StepSequence::open(self.terms[k.min(self.terms.len() - 1)..].to_vec()),
            Tail::Cycle(p) => {
                let start = self.terms.len() - p;
                let terms: Vec<StepFunction> = (k..k.max(start) + p)
                    .map(|i| self.term(i).unwrap().clone())
                    .collect();
                StepSequence::new(terms, Tail::Cycle(p))
            }
        }
    }

    /// `‖f_i − f_{i+1}‖₁`, when both terms are known.
    pub fn step_norm(&self, i: usize) -> Option<Dyadic> {
        Some(self.term(i)?.l1_distance(self.term(i + 1)?))
    }

    pub fn map(&self, f: impl Fn(&StepFunction) -> StepFunction) -> StepSequence {
        StepSequence { terms: self.terms.iter().map(f).collect(), tail: self.tail }
    }
}

/// A certified L¹ name: a step sequence with `‖f_i − f_{i+1}‖₁ < 2^{-i}`
/// for every index, checked on construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct L1Name {
    seq: StepSequence,
    /// The certificate: the step norms of all materialized transitions.
    norms: Vec<Dyadic>,
}

impl<'de> Deserialize<'de> for L1Name {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            seq: StepSequence,
        }
        let raw = Raw::deserialize(deserializer)?;
        L1Name::certify(raw.seq).map_err(serde::de::Error::custom)
    }
}

impl L1Name {
    /// Checks the strict rapid-Cauchy bound at every index. For a periodic
    /// tail with a nonconstant cycle the bound must eventually fail, and the
    /// first failing index is reported.
    pub fn certify(seq: StepSequence) -> Result<L1Name, L1Error> {
        let upto = match seq.tail {
            Tail::Open => seq.terms.len() - 1,
            Tail::Cycle(p) => seq.terms.len() - 1 + p,
        };
        let mut norms = Vec::with_capacity(upto);
        for i in 0..upto {
            let n = seq.step_norm(i).expect("known term");
            if n >= Dyadic::pow2(-(i as i64)) {
                return Err(L1Error::NotRapid { index: i, norm: n });
            }
            norms.push(n);
        }
        if let Tail::Cycle(p) = seq.tail {
            let start = seq.terms.len() - p;
            let cycle: Vec<Dyadic> = (start..start + p).map(|i| seq.step_norm(i).unwrap()).collect();
            if cycle.iter().any(|n| !n.is_zero()) {
                let mut i = upto;
                loop {
                    let n = &cycle[(i - start) % p];
                    if *n >= Dyadic::pow2(-(i as i64)) {
                        return Err(L1Error::NotRapid { index: i, norm: n.clone() });
                    }
                    i += 1;
                }
            }
            norms.truncate(seq.terms.len().saturating_sub(1));
        }
        Ok(L1Name { seq, norms })
    }

    pub fn certify_terms(terms: Vec<StepFunction>) -> Result<L1Name, L1Error> {
        L1Name::certify(StepSequence::open(terms))
    }

    /// The constant name `⟨f, f, f, …⟩`.
    pub fn constant(f: StepFunction) -> L1Name {
        L1Name { seq: StepSequence::constant(f), norms: Vec::new() }
    }

    pub fn seq(&self) -> &StepSequence {
        &self.seq
    }

    pub fn norms(&self) -> &[Dyadic] {
        &self.norms
    }

    pub fn term(&self, i: usize) -> Option<&StepFunction> {
        self.seq.term(i)
    }

    /// Index of the deepest materialized term.
    pub fn deepest(&self) -> usize {
        self.seq.len() - 1
    }

    pub fn limit(&self) -> Option<&StepFunction> {
        self.seq.limit()
    }

    /// A term within `2^{-i+1}` of the limit together with that `i`, or the
    /// exact limit with `None`.
    pub fn best_approximation(&self) -> (&StepFunction, Option<usize>) {
        match self.limit() {
            Some(f) => (f, None),
            None => (&self.seq.terms[self.deepest()], Some(self.deepest())),
        }
    }

    /// `∫` of the named element. Exact for eventually constant names;
    /// otherwise `∫f_i ± 2^{-i+1}` at the deepest term.
    pub fn integral(&self) -> DyadicInterval {
        match self.best_approximation() {
            (f, None) => DyadicInterval::point(f.integral()),
            (f, Some(i)) => DyadicInterval::around(&f.integral(), &Dyadic::pow2(1 - i as i64)),
        }
    }

    /// Replaces term `i`; the result is re-certified.
    pub fn with_term(&self, i: usize, f: StepFunction) -> Result<L1Name, L1Error> {
        let mut terms = self.seq.terms.clone();
        terms[i] = f;
        L1Name::certify(StepSequence::new(terms, self.seq.tail))
    }
}

/// The outcome of comparing two names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NameComparison {
    pub equal: bool,
    /// `‖f_i − g_i‖₁` at the compared index, or the exact distance between
    /// limits when both are eventually constant.
    pub residual: Dyadic,
    pub index: usize,
    pub exact: bool,
}

/// Decides whether two names denote the same L¹ element. Eventually
/// constant names are compared exactly; otherwise at index `i = min(bound,
/// deepest)` they are declared equal when `‖f_i − g_i‖₁ ≤ 2^{-i+2}`.
pub fn names_equal(f: &L1Name, g: &L1Name, bound: usize) -> NameComparison {
    if let (Some(a), Some(b)) = (f.limit(), g.limit()) {
        let residual = a.l1_distance(b);
        return NameComparison {
            equal: residual.is_zero(),
            residual,
            index: f.seq.len().max(g.seq.len()),
            exact: true,
        };
    }
    let mut i = bound;
    if let Some(n) = f.seq.known_len() {
        i = i.min(n - 1);
    }
    if let Some(n) = g.seq.known_len() {
        i = i.min(n - 1);
    }
    let residual = f.term(i).unwrap().l1_distance(g.term(i).unwrap());
    NameComparison {
        equal: residual <= Dyadic::pow2(2 - i as i64),
        residual,
        index: i,
        exact: false,
    }
}

/// The interleaving `⟨f_2, g_3, f_4, g_5, …⟩`: term `k` is `f_{k+2}` for
/// even `k` and `g_{k+2}` for odd `k`.
pub fn interleave(f: &StepSequence, g: &StepSequence) -> StepSequence {
    let pick = |k: usize| if k % 2 == 0 { f.term(k + 2) } else { g.term(k + 2) };
    match (f.cycle_start(), g.cycle_start()) {
        (Some(sf), Some(sg)) => {
            // both tails periodic: the interleaving is periodic with an even
            // period past both cycle starts
            let pf = f.len() - sf;
            let pg = g.len() - sg;
            let period = 2 * num_integer::lcm(pf, pg);
            let start = sf.max(sg);
            let n = start + period;
            let terms: Vec<StepFunction> = (0..n).map(|k| pick(k).unwrap().clone()).collect();
            StepSequence::new(terms, Tail::Cycle(period))
        }
        _ => {
            let mut terms = Vec::new();
            let mut k = 0;
            while let Some(t) = pick(k) {
                terms.push(t.clone());
                k += 1;
            }
            if terms.is_empty() {
                terms.push(f.term(f.len() - 1).unwrap().clone());
            }
            StepSequence::open(terms)
        }
    }
}
