//! The decoration transform on ranked alternating codes.
//!
//! `decorate(T, h)` keeps original child `n` at index `2n` and adds, below a
//! node of rank `r`, one child at `2b̂ + 1` for every budget ordinal `b < r`
//! (`b̂` its budget position). At unions that child is `Decorate(P_b)`, at
//! intersections `Decorate(¬N_b)`. Decorated generator codes are built once
//! per `(b, kind)` and shared.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::borel::{evaluate_shared, Address, BorelCode, Children, Node, NodeKind, Ordinal};
use crate::cantor::{ClopenSet, Point};
use crate::dyadic::Dyadic;
use crate::exec::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecorateError {
    #[error("generator output for b = {b} rejected: {reason}")]
    Generator { b: Ordinal, reason: String },
    #[error("input rank laws fail at {0}")]
    NotRanked(Address),
    #[error("input is not alternating")]
    NotAlternating,
    #[error("input contains complement nodes")]
    NotComplementFree,
    #[error("bad budget: {0}")]
    BadBudget(String),
    #[error("targets for {a} and {b} overlap")]
    Overlap { a: Ordinal, b: Ordinal },
    #[error("target for b = {b} has measure {measure}, above 2^-{index}")]
    OverBudget { b: Ordinal, index: usize, measure: Dyadic },
}

/// A finite list of distinct ordinals `≥ 1`; position in the list is `b̂`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Ordinal>", into = "Vec<Ordinal>")]
pub struct Budget {
    ordinals: Vec<Ordinal>,
}

impl Budget {
    pub fn new(ordinals: Vec<Ordinal>) -> Result<Self, DecorateError> {
        for (i, b) in ordinals.iter().enumerate() {
            if b.is_zero() {
                return Err(DecorateError::BadBudget("0 cannot be a rank".into()));
            }
            if ordinals[..i].contains(b) {
                return Err(DecorateError::BadBudget(format!("{b} listed twice")));
            }
        }
        Ok(Budget { ordinals })
    }

    /// Every ordinal `1 ≤ b ≤ root` with coefficients at most 3.
    pub fn default_for(root: &Ordinal) -> Self {
        Budget { ordinals: root.enumerate_up_to(3) }
    }

    pub fn ordinals(&self) -> &[Ordinal] {
        &self.ordinals
    }

    pub fn index_of(&self, b: &Ordinal) -> Option<usize> {
        self.ordinals.iter().position(|o| o == b)
    }

    /// `(b̂, b)` for every budget ordinal strictly below `r`, by position.
    pub fn below<'a>(&'a self, r: &'a Ordinal) -> impl Iterator<Item = (usize, &'a Ordinal)> + 'a {
        self.ordinals.iter().enumerate().filter(move |(_, b)| *b < r)
    }
}

impl TryFrom<Vec<Ordinal>> for Budget {
    type Error = DecorateError;

    fn try_from(v: Vec<Ordinal>) -> Result<Self, Self::Error> {
        Budget::new(v)
    }
}

impl From<Budget> for Vec<Ordinal> {
    fn from(b: Budget) -> Self {
        b.ordinals
    }
}

impl FromStr for Budget {
    type Err = DecorateError;

    /// Comma-separated ordinal notations, e.g. `1,2,w,w+1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ordinals = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<Ordinal>().map_err(|e| DecorateError::BadBudget(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Budget::new(ordinals)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.ordinals.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Supplies the pair `(P_b, N_b)` for a budget ordinal `b` at position `b̂`.
pub trait DecorationGenerator: Send + Sync {
    fn describe(&self) -> String;

    fn pair(&self, b: &Ordinal, index: usize) -> Result<(BorelCode, BorelCode), DecorateError>;
}

/// `b`-ranked alternating code denoting `set`, rooted at `root` (or a leaf
/// when `b = 1`). Kinds alternate downwards; successors get one child of
/// the predecessor rank, limits two children at `b[1]` and `b[2]`.
pub fn chain_code(b: &Ordinal, root: NodeKind, set: &ClopenSet) -> BorelCode {
    assert!(!b.is_zero(), "rank 0 has no code");
    assert!(matches!(root, NodeKind::Union | NodeKind::Inter));
    let mut memo: BTreeMap<(Ordinal, bool), Arc<BorelCode>> = BTreeMap::new();
    (*chain(b, root == NodeKind::Union, set, &mut memo)).clone()
}

fn chain(
    b: &Ordinal,
    union: bool,
    set: &ClopenSet,
    memo: &mut BTreeMap<(Ordinal, bool), Arc<BorelCode>>,
) -> Arc<BorelCode> {
    if let Some(c) = memo.get(&(b.clone(), union)) {
        return c.clone();
    }
    let out = if *b == Ordinal::one() {
        BorelCode::leaf(set.clone()).with_rank(Ordinal::one())
    } else {
        let below: Vec<Ordinal> = match b.predecessor() {
            Some(p) => vec![p],
            None => vec![b.fundamental(1).unwrap(), b.fundamental(2).unwrap()],
        };
        let children: Children =
            below.iter().map(|r| chain(r, !union, set, memo)).enumerate().collect();
        let node = if union { Node::Union(children) } else { Node::Inter(children) };
        BorelCode::from_node(node).with_rank(b.clone())
    };
    let out = Arc::new(out);
    memo.insert((b.clone(), union), out.clone());
    out
}

/// A `b`-ranked alternating code for `∅` with a union root.
pub fn empty_set_code(b: &Ordinal) -> BorelCode {
    chain_code(b, NodeKind::Union, &ClopenSet::empty())
}

/// `P_b = N_b = ∅` for every `b`.
#[derive(Clone, Copy, Debug, Default)]
pub struct EmptyGenerator;

impl DecorationGenerator for EmptyGenerator {
    fn describe(&self) -> String {
        "empty".into()
    }

    fn pair(&self, b: &Ordinal, _index: usize) -> Result<(BorelCode, BorelCode), DecorateError> {
        let c = chain_code(b, NodeKind::Inter, &ClopenSet::empty());
        Ok((c.clone(), c))
    }
}

/// Disjoint small targets `S_b`, each split by its first unread bit
/// `t = max_len(S_b)`: `P_b = S_b ∩ {x(t) = 0}`, `N_b = S_b ∩ {x(t) = 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitGenerator {
    targets: BTreeMap<Ordinal, ClopenSet>,
}

impl SplitGenerator {
    /// Rejects overlapping targets. The measure bound depends on the
    /// budget position and is checked in `pair`.
    pub fn new(targets: BTreeMap<Ordinal, ClopenSet>) -> Result<Self, DecorateError> {
        let entries: Vec<(&Ordinal, &ClopenSet)> = targets.iter().collect();
        for (i, (a, sa)) in entries.iter().enumerate() {
            for (b, sb) in &entries[i + 1..] {
                if !sa.is_disjoint(sb) {
                    return Err(DecorateError::Overlap { a: (*a).clone(), b: (*b).clone() });
                }
            }
        }
        Ok(SplitGenerator { targets })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: SplitGenerator = serde_json::from_str(text).map_err(|e| e.to_string())?;
        SplitGenerator::new(raw.targets).map_err(|e| e.to_string())
    }

    pub fn target(&self, b: &Ordinal) -> ClopenSet {
        self.targets.get(b).cloned().unwrap_or_else(ClopenSet::empty)
    }

    pub fn targets(&self) -> &BTreeMap<Ordinal, ClopenSet> {
        &self.targets
    }
}

impl DecorationGenerator for SplitGenerator {
    fn describe(&self) -> String {
        format!("split({} targets)", self.targets.len())
    }

    fn pair(&self, b: &Ordinal, index: usize) -> Result<(BorelCode, BorelCode), DecorateError> {
        let s = self.target(b);
        let measure = s.measure();
        if measure > Dyadic::pow2(-(index as i64)) {
            return Err(DecorateError::OverBudget { b: b.clone(), index, measure });
        }
        let (zero, one) = s.split_at_bit(s.max_len());
        Ok((chain_code(b, NodeKind::Inter, &zero), chain_code(b, NodeKind::Inter, &one)))
    }
}

/// Generator output for one budget ordinal after validation.
#[derive(Clone, Debug)]
pub struct GeneratedPair {
    pub b: Ordinal,
    pub index: usize,
    pub positive: Arc<BorelCode>,
    pub negative: Arc<BorelCode>,
    /// `¬N_b`, complement-normalized.
    pub negative_compl: Arc<BorelCode>,
}

/// Validates `(P_b, N_b)`: rank laws with root rank `b`, alternation, and
/// an intersection or leaf at the root.
pub fn validate_pair(b: &Ordinal, p: &BorelCode, n: &BorelCode) -> Result<(), DecorateError> {
    let fail = |reason: String| DecorateError::Generator { b: b.clone(), reason };
    for (name, c) in [("P", p), ("N", n)] {
        if !c.is_complement_free() {
            return Err(fail(format!("{name} contains complements")));
        }
        if c.rank() != Some(b) {
            let got = c.rank().map(|r| r.to_string()).unwrap_or_else(|| "none".into());
            return Err(fail(format!("{name} has root rank {got}")));
        }
        if let Some(a) = c.rank_violation() {
            return Err(fail(format!("{name} breaks the rank laws at {a}")));
        }
        if !c.is_alternating_shared() {
            return Err(fail(format!("{name} is not alternating")));
        }
        if !matches!(c.kind(), NodeKind::Inter | NodeKind::Leaf) {
            return Err(fail(format!("{name} has a {:?} root", c.kind())));
        }
    }
    Ok(())
}

/// The result of decorating a code.
#[derive(Clone, Debug)]
pub struct Decorated {
    pub code: BorelCode,
    pub budget: Budget,
    pub pairs: Vec<GeneratedPair>,
}

impl Decorated {
    /// True iff `x` lies in some `|P_b| ∪ |N_b|` used by the decoration.
    pub fn in_generator_sets(&self, x: &Point) -> bool {
        self.pairs.iter().any(|g| g.positive.contains_shared(x) || g.negative.contains_shared(x))
    }
}

/// Checks that `t` is a ranked, alternating, complement-free code.
pub fn validate_input(t: &BorelCode) -> Result<(), DecorateError> {
    if !t.is_complement_free() {
        return Err(DecorateError::NotComplementFree);
    }
    if let Some(a) = t.rank_violation() {
        return Err(DecorateError::NotRanked(a));
    }
    if !t.is_alternating_shared() {
        return Err(DecorateError::NotAlternating);
    }
    Ok(())
}

pub fn decorate(
    t: &BorelCode,
    h: &dyn DecorationGenerator,
    budget: &Budget,
) -> Result<Decorated, DecorateError> {
    decorate_with(t, h, budget, Exec::default())
}

pub fn decorate_with(
    t: &BorelCode,
    h: &dyn DecorationGenerator,
    budget: &Budget,
    exec: Exec,
) -> Result<Decorated, DecorateError> {
    validate_input(t)?;
    let root = t.rank().expect("validated").clone();
    let mut used: Vec<(usize, &Ordinal)> = budget.below(&root).collect();
    used.sort_by(|a, b| a.1.cmp(b.1));

    let mut pairs = Vec::with_capacity(used.len());
    for &(index, b) in &used {
        let (p, n) = h.pair(b, index)?;
        validate_pair(b, &p, &n)?;
        let negative_compl = BorelCode::compl(n.clone()).normalize_demorgan();
        pairs.push(GeneratedPair {
            b: b.clone(),
            index,
            positive: Arc::new(p),
            negative: Arc::new(n),
            negative_compl: Arc::new(negative_compl),
        });
    }

    // Decorated `(P_b, ¬N_b)` by budget position, in ascending rank order so
    // each only refers to smaller ones.
    let mut table: HashMap<usize, (Arc<BorelCode>, Arc<BorelCode>)> = HashMap::new();
    for g in &pairs {
        let p = Arc::new(rebuild(&g.positive, budget, &table));
        let n = Arc::new(rebuild(&g.negative_compl, budget, &table));
        table.insert(g.index, (p, n));
    }

    let code = match t.node() {
        Node::Union(ch) | Node::Inter(ch) => {
            let kids: Vec<(&usize, &Arc<BorelCode>)> = ch.iter().collect();
            let rebuilt = exec.map(&kids, |(_, c)| Arc::new(rebuild(c, budget, &table)));
            let originals = kids.iter().map(|(i, _)| **i).zip(rebuilt).collect();
            assemble(t, originals, budget, &table)
        }
        _ => t.clone(),
    };
    Ok(Decorated { code, budget: budget.clone(), pairs })
}

type Table = HashMap<usize, (Arc<BorelCode>, Arc<BorelCode>)>;

fn rebuild(c: &BorelCode, budget: &Budget, table: &Table) -> BorelCode {
    match c.node() {
        Node::Union(ch) | Node::Inter(ch) => {
            let originals =
                ch.iter().map(|(i, k)| (*i, Arc::new(rebuild(k, budget, table)))).collect();
            assemble(c, originals, budget, table)
        }
        _ => c.clone(),
    }
}

fn assemble(
    c: &BorelCode,
    originals: Vec<(usize, Arc<BorelCode>)>,
    budget: &Budget,
    table: &Table,
) -> BorelCode {
    let rank = c.rank().expect("ranked");
    let union = c.kind() == NodeKind::Union;
    let mut children: Children = originals.into_iter().map(|(i, k)| (2 * i, k)).collect();
    for (index, _) in budget.below(rank) {
        let (p, n) = &table[&index];
        children.insert(2 * index + 1, if union { p.clone() } else { n.clone() });
    }
    let node = if union { Node::Union(children) } else { Node::Inter(children) };
    BorelCode::from_node(node).with_rank(rank.clone())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PreservationReport {
    pub points: usize,
    pub outside: usize,
    pub preserved: usize,
    pub inside: usize,
    pub unique: usize,
    pub failures: Vec<String>,
}

impl PreservationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Outside the generator sets membership must match `t`; inside them an
/// evaluation map of the decorated code must exist and be unique.
pub fn check_preservation(t: &BorelCode, d: &Decorated, points: &[Point]) -> PreservationReport {
    let mut r = PreservationReport { points: points.len(), ..Default::default() };
    for x in points {
        if d.in_generator_sets(x) {
            r.inside += 1;
            match evaluate_shared(&d.code, x) {
                Ok(_) => r.unique += 1,
                Err(e) => r.failures.push(format!("{x}: {e}")),
            }
        } else {
            r.outside += 1;
            if d.code.contains_shared(x) == t.contains(x) {
                r.preserved += 1;
            } else {
                r.failures.push(format!("{x}: membership changed"));
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::Bits;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn cyl(s: &str) -> BorelCode {
        BorelCode::cylinder(s.into())
    }

    fn ranked(c: BorelCode) -> BorelCode {
        c.make_alternating().with_height_ranks()
    }

    fn sample() -> BorelCode {
        ranked(BorelCode::union(vec![
            BorelCode::inter(vec![cyl("0"), BorelCode::union(vec![cyl("01"), cyl("11")])]),
            cyl("110"),
        ]))
    }

    fn brute_measure(c: &BorelCode, d: usize) -> Dyadic {
        let hits = Bits::all_of_length(d).filter(|p| c.contains_prefix(p)).count();
        Dyadic::new(hits as i64, d as u32)
    }

    #[test]
    fn empty_set_codes() {
        let one = empty_set_code(&Ordinal::one());
        assert_eq!(one.kind(), NodeKind::Leaf);
        assert!(one.label().unwrap().is_empty());
        for b in ["1", "3", "w", "w+2", "w*2", "w^2"] {
            let c = empty_set_code(&o(b));
            assert_eq!(c.rank(), Some(&o(b)));
            assert_eq!(c.check_rank(), Ok(true), "{b}");
            assert!(c.is_alternating(), "{b}");
            assert_eq!(brute_measure(&c, 0), Dyadic::zero());
        }
        let three = empty_set_code(&o("3"));
        assert_eq!(three.kind(), NodeKind::Union);
        assert_eq!(three.height(), 2);
        let w = empty_set_code(&o("w"));
        let ranks: Vec<Ordinal> = w.children().iter().map(|(_, c)| c.rank().unwrap().clone()).collect();
        assert_eq!(ranks, vec![o("1"), o("2")]);
    }

    #[test]
    fn budgets() {
        let b: Budget = "1,2,w".parse().unwrap();
        assert_eq!(b.index_of(&o("w")), Some(2));
        assert_eq!(b.to_string(), "1,2,w");
        assert!("1,1".parse::<Budget>().is_err());
        assert!("0".parse::<Budget>().is_err());
        let d = Budget::default_for(&o("w+1"));
        assert_eq!(d.ordinals(), &[o("1"), o("2"), o("3"), o("w"), o("w+1")]);
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, r#"["1","2","w"]"#);
        assert_eq!(serde_json::from_str::<Budget>(&json).unwrap(), b);
    }

    #[test]
    fn single_leaf_unchanged() {
        let t = cyl("01").with_rank(Ordinal::one());
        let d = decorate(&t, &EmptyGenerator, &Budget::default_for(&Ordinal::one())).unwrap();
        assert_eq!(d.code, t);
    }

    #[test]
    fn layout_and_preservation_under_empty_generator() {
        let t = sample();
        let root = t.rank().unwrap().clone();
        let budget = Budget::default_for(&root);
        let d = decorate(&t, &EmptyGenerator, &budget).unwrap();
        assert_eq!(d.code.rank(), Some(&root));
        assert_eq!(d.code.check_rank(), Ok(true));
        assert!(d.code.is_alternating_shared());
        for (i, c) in t.children() {
            assert_eq!(d.code.child(2 * i).unwrap().kind(), c.kind());
        }
        let odd: Vec<usize> = d.code.children().iter().map(|(i, _)| *i).filter(|i| i % 2 == 1).collect();
        let expect: Vec<usize> = budget.below(&root).map(|(k, _)| 2 * k + 1).collect();
        assert_eq!(odd, expect);
        // decoration children at unions denote ∅, at intersections everything
        let x = Point::seeded(3);
        for (i, c) in d.code.children() {
            if i % 2 == 1 {
                assert!(!c.contains_shared(&x));
            }
        }
        let inter = d.code.child(0).unwrap();
        assert_eq!(inter.kind(), NodeKind::Inter);
        for (i, c) in inter.children() {
            if i % 2 == 1 {
                assert!(c.contains_shared(&x));
            }
        }
        for p in Bits::all_of_length(t.support_depth()) {
            let x = Point::constant(false).tail_append(&p);
            assert_eq!(d.code.contains_shared(&x), t.contains(&x), "{p}");
        }
    }

    #[test]
    fn decorated_generators_are_shared() {
        let t = ranked(BorelCode::union(vec![
            BorelCode::inter(vec![BorelCode::union(vec![cyl("0"), BorelCode::inter(vec![cyl("1"), cyl("11")])]), cyl("1")]),
            BorelCode::inter(vec![BorelCode::union(vec![cyl("00"), BorelCode::inter(vec![cyl("10"), cyl("1")])]), cyl("0")]),
        ]));
        let budget = Budget::default_for(t.rank().unwrap());
        let d = decorate(&t, &EmptyGenerator, &budget).unwrap();
        assert!(d.code.distinct_node_count() < d.code.node_count());
    }

    #[test]
    fn split_generator_example() {
        let targets: BTreeMap<Ordinal, ClopenSet> =
            [(o("1"), ClopenSet::cylinder("00".into())), (o("2"), ClopenSet::cylinder("111".into()))]
                .into_iter()
                .collect();
        let g = SplitGenerator::new(targets).unwrap();
        let (p, n) = g.pair(&o("1"), 1).unwrap();
        assert_eq!(p.label().unwrap(), &ClopenSet::cylinder("000".into()));
        assert_eq!(n.label().unwrap(), &ClopenSet::cylinder("001".into()));
        let (p2, _) = g.pair(&o("2"), 2).unwrap();
        assert_eq!(p2.kind(), NodeKind::Inter);
        assert_eq!(p2.rank(), Some(&o("2")));
        assert!(matches!(g.pair(&o("2"), 4), Err(DecorateError::OverBudget { .. })));

        let overlap: BTreeMap<Ordinal, ClopenSet> =
            [(o("1"), ClopenSet::cylinder("0".into())), (o("2"), ClopenSet::cylinder("01".into()))]
                .into_iter()
                .collect();
        assert!(matches!(SplitGenerator::new(overlap), Err(DecorateError::Overlap { .. })));
    }

    #[test]
    fn empty_split_matches_empty_generator() {
        let t = sample();
        let budget = Budget::default_for(t.rank().unwrap());
        let a = decorate(&t, &EmptyGenerator, &budget).unwrap();
        let b = decorate(&t, &SplitGenerator::default(), &budget).unwrap();
        assert_eq!(a.code, b.code);
    }

    #[test]
    fn split_preservation() {
        let t = sample();
        let budget = Budget::default_for(t.rank().unwrap());
        // S_b = [1 0^{b̂+1}] for b̂ ≥ 1: 0^ω avoids every target
        let targets: BTreeMap<Ordinal, ClopenSet> = budget
            .ordinals()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, b)| {
                let mut p = Bits::from("1");
                for _ in 0..=k {
                    p = p.with(false);
                }
                (b.clone(), ClopenSet::cylinder(p.with(true)))
            })
            .collect();
        let g = SplitGenerator::new(targets).unwrap();
        let d = decorate(&t, &g, &budget).unwrap();
        assert_eq!(d.code.check_rank(), Ok(true));
        assert!(d.code.is_alternating_shared());
        let mut points = vec![Point::constant(false)];
        for p in Bits::all_of_length(7) {
            points.push(Point::constant(false).tail_append(&p));
            points.push(Point::constant(true).tail_append(&p));
        }
        let r = check_preservation(&t, &d, &points);
        assert!(r.passed(), "{:?}", r.failures);
        assert!(r.inside > 0 && r.outside > 0);
        assert_eq!(r.unique, r.inside);
        assert!(!d.in_generator_sets(&Point::constant(false)));
    }

    #[test]
    fn bad_generators_are_named() {
        struct Wrong;
        impl DecorationGenerator for Wrong {
            fn describe(&self) -> String {
                "wrong".into()
            }
            fn pair(&self, b: &Ordinal, _: usize) -> Result<(BorelCode, BorelCode), DecorateError> {
                let c = empty_set_code(b);
                Ok((c.clone(), c))
            }
        }
        let t = sample();
        let err = decorate(&t, &Wrong, &Budget::default_for(t.rank().unwrap())).unwrap_err();
        assert!(matches!(err, DecorateError::Generator { ref b, .. } if *b == o("2")), "{err}");
        let unranked = BorelCode::union(vec![cyl("0")]);
        assert!(matches!(
            decorate(&unranked, &EmptyGenerator, &"1".parse().unwrap()),
            Err(DecorateError::NotRanked(_))
        ));
    }

    #[test]
    fn modes_agree() {
        let t = sample();
        let budget = Budget::default_for(t.rank().unwrap());
        let a = decorate_with(&t, &EmptyGenerator, &budget, Exec::Sequential).unwrap();
        let b = decorate_with(&t, &EmptyGenerator, &budget, Exec::Parallel).unwrap();
        assert_eq!(a.code, b.code);
    }
}
