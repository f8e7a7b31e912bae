use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MeasureError;
use crate::borel::{Address, BorelCode, Node};
use crate::cantor::Bits;
use crate::dyadic::Dyadic;
use crate::exec::Exec;
use crate::l1::{extremum_finite, names_equal, Extremum, L1Name, StepFunction};

/// An L¹ name for every address of a code.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasureDecomposition {
    names: BTreeMap<Address, L1Name>,
}

/// Which clause of the definition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Leaf,
    Union,
    Inter,
    Missing,
}

impl std::fmt::Display for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Law::Leaf => "leaf",
            Law::Union => "union",
            Law::Inter => "intersection",
            Law::Missing => "missing name",
        };
        f.write_str(s)
    }
}

/// Child folding order for [`build_decomposition_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChildOrder {
    Forward,
    Reversed,
}

impl MeasureDecomposition {
    pub fn from_names(names: BTreeMap<Address, L1Name>) -> Self {
        MeasureDecomposition { names }
    }

    pub fn get(&self, addr: &Address) -> Option<&L1Name> {
        self.names.get(addr)
    }

    pub fn root(&self) -> Option<&L1Name> {
        self.names.get(&Address::root())
    }

    pub fn names(&self) -> &BTreeMap<Address, L1Name> {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn insert(&mut self, addr: Address, name: L1Name) -> Option<L1Name> {
        self.names.insert(addr, name)
    }

    /// Applies `f` to every name.
    pub fn map_names(&self, f: impl Fn(&Address, &L1Name) -> L1Name) -> MeasureDecomposition {
        MeasureDecomposition { names: self.names.iter().map(|(a, n)| (a.clone(), f(a, n))).collect() }
    }
}

fn require_complement_free(c: &BorelCode) -> Result<(), MeasureError> {
    if c.is_complement_free() {
        Ok(())
    } else {
        Err(MeasureError::NotComplementFree)
    }
}

/// Leaves get the constant name of their characteristic function, unions
/// and intersections the exact pointwise max and min of their children.
pub fn build_decomposition(c: &BorelCode) -> Result<MeasureDecomposition, MeasureError> {
    build_decomposition_with(c, ChildOrder::Forward)
}

pub fn build_decomposition_with(c: &BorelCode, order: ChildOrder) -> Result<MeasureDecomposition, MeasureError> {
    require_complement_free(c)?;
    let mut out = MeasureDecomposition::default();
    build(c, Address::root(), order, &mut out);
    Ok(out)
}

fn build(c: &BorelCode, addr: Address, order: ChildOrder, out: &mut MeasureDecomposition) -> StepFunction {
    let fold = |ch: Vec<(usize, &BorelCode)>, out: &mut MeasureDecomposition, sup: bool| {
        let mut acc = if sup { StepFunction::zero() } else { StepFunction::one() };
        let mut ch = ch;
        if order == ChildOrder::Reversed {
            ch.reverse();
        }
        for (i, child) in ch {
            let f = build(child, addr.child(i), order, out);
            acc = if sup { acc.max(&f) } else { acc.min(&f) };
        }
        acc
    };
    let f = match c.node() {
        Node::Leaf(s) => StepFunction::indicator(s),
        Node::Union(_) => fold(c.children(), out, true),
        Node::Inter(_) => fold(c.children(), out, false),
        Node::Compl(_) => unreachable!("checked complement-free"),
    };
    out.insert(addr, L1Name::constant(f.clone()));
    f
}

/// A failing law. Addresses are checked deepest first, so a perturbed name
/// is reported at its own address rather than at its parent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawViolation {
    pub address: Address,
    pub law: Law,
    pub residual: Option<Dyadic>,
}

/// Index used when comparing names that are not eventually constant.
const COMPARE_BOUND: usize = 64;

fn check_address(c: &BorelCode, d: &MeasureDecomposition, addr: &Address) -> Option<LawViolation> {
    let fail = |law, residual| Some(LawViolation { address: addr.clone(), law, residual });
    let node = c.subtree(addr)?;
    let Some(name) = d.get(addr) else {
        return fail(Law::Missing, None);
    };
    let (law, expected) = match node.node() {
        Node::Leaf(s) => (Law::Leaf, L1Name::constant(StepFunction::indicator(s))),
        Node::Union(_) | Node::Inter(_) => {
            let mut kids = Vec::new();
            for (i, _) in node.children() {
                match d.get(&addr.child(i)) {
                    Some(n) => kids.push(n.clone()),
                    None => {
                        return Some(LawViolation { address: addr.child(i), law: Law::Missing, residual: None })
                    }
                }
            }
            let (law, op) = match node.node() {
                Node::Union(_) => (Law::Union, Extremum::Sup),
                _ => (Law::Inter, Extremum::Inf),
            };
            match extremum_finite(&kids, op) {
                Ok(e) => (law, e),
                Err(_) => return fail(law, None),
            }
        }
        Node::Compl(_) => unreachable!("checked complement-free"),
    };
    let cmp = names_equal(name, &expected, COMPARE_BOUND);
    if cmp.equal {
        None
    } else {
        fail(law, Some(cmp.residual))
    }
}

/// Checks the leaf, union and intersection laws at every address of `c`.
pub fn verify_decomposition(c: &BorelCode, d: &MeasureDecomposition) -> Result<(), MeasureError> {
    verify_decomposition_with(c, d, Exec::default())
}

pub fn verify_decomposition_with(c: &BorelCode, d: &MeasureDecomposition, exec: Exec) -> Result<(), MeasureError> {
    require_complement_free(c)?;
    let mut addrs = c.addresses();
    addrs.reverse();
    let found = exec.find_first(0..addrs.len(), |k| check_address(c, d, &addrs[k]));
    match found {
        None => Ok(()),
        Some((_, v)) => Err(MeasureError::Law(v)),
    }
}

/// The exact measure of a finite code: the integral of the root name.
/// Complements are pushed to the leaves first.
pub fn measure_of_code(c: &BorelCode) -> Dyadic {
    let base = if c.is_complement_free() { c.clone() } else { c.normalize_demorgan() };
    let mut out = MeasureDecomposition::default();
    build(&base, Address::root(), ChildOrder::Forward, &mut out).integral()
}

/// Recovers a decomposition of `c` from a name for the membership function
/// of `tilde(c, h)`: address `σ` gets `i ↦ f_{i+m+1}(0^m 1 ⌢ ·)` with `m` the
/// first index of `σ` in `h`. The shift by `m + 1` keeps the restricted
/// sequence rapidly Cauchy, since restriction to a cone of measure
/// `2^{-(m+1)}` multiplies norms by `2^{m+1}`.
pub fn decomposition_from_membership(
    f: &L1Name,
    c: &BorelCode,
    h: &[Address],
) -> Result<MeasureDecomposition, MeasureError> {
    require_complement_free(c)?;
    let tilde = c.tilde(h)?;
    let target = StepFunction::indicator(&tilde_set(&tilde)?);
    let (approx, index) = f.best_approximation();
    let dist = approx.l1_distance(&target);
    let slack = index.map(|i| Dyadic::pow2(1 - i as i64)).unwrap_or_default();
    if dist > slack {
        return Err(MeasureError::NotMembership { distance: dist, slack });
    }
    let mut names = BTreeMap::new();
    for addr in c.addresses() {
        let m = h.iter().position(|a| *a == addr).expect("tilde checked surjectivity");
        let cone = Bits::zeros_then_one(m);
        let seq = f.seq().shift(m + 1).map(|t| t.restrict(&cone));
        names.insert(addr, L1Name::certify(seq)?);
    }
    let d = MeasureDecomposition::from_names(names);
    verify_decomposition(c, &d)?;
    Ok(d)
}

/// The clopen set denoted by a finite complement-free code.
pub fn code_set(c: &BorelCode) -> Result<crate::cantor::ClopenSet, MeasureError> {
    require_complement_free(c)?;
    Ok(tilde_set(c)?)
}

fn tilde_set(c: &BorelCode) -> Result<crate::cantor::ClopenSet, MeasureError> {
    use crate::cantor::ClopenSet;
    Ok(match c.node() {
        Node::Leaf(s) => s.clone(),
        Node::Union(_) => {
            let parts: Result<Vec<ClopenSet>, _> = c.children().into_iter().map(|(_, k)| tilde_set(k)).collect();
            ClopenSet::union_all(&parts?)
        }
        Node::Inter(_) => {
            let mut acc = ClopenSet::full();
            for (_, k) in c.children() {
                acc = acc.intersection(&tilde_set(k)?);
            }
            acc
        }
        Node::Compl(_) => return Err(MeasureError::NotComplementFree),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::ClopenSet;

    fn cyl(p: &str) -> BorelCode {
        BorelCode::cylinder(Bits::from(p))
    }

    fn chi(p: &str) -> StepFunction {
        StepFunction::indicator(&ClopenSet::cylinder(Bits::from(p)))
    }

    /// `|{p ∈ 2^d : [p] ⊆ |c|}| / 2^d`.
    fn counting(c: &BorelCode) -> Dyadic {
        let d = c.support_depth();
        let hits = Bits::all_of_length(d).filter(|p| c.contains_prefix(p)).count();
        Dyadic::new(hits as i64, d as u32)
    }

    #[test]
    fn worked_examples() {
        let d = build_decomposition(&cyl("0")).unwrap();
        assert_eq!(d.root().unwrap().limit(), Some(&chi("0")));
        let u = build_decomposition(&BorelCode::union(vec![cyl("0"), cyl("1")])).unwrap();
        assert_eq!(u.root().unwrap().limit(), Some(&StepFunction::one()));
        let code = BorelCode::inter(vec![cyl("0"), cyl("01")]);
        let i = build_decomposition(&code).unwrap();
        assert_eq!(i.root().unwrap().limit(), Some(&chi("01")));
        assert_eq!(measure_of_code(&code), Dyadic::new(1, 2));
        assert_eq!(measure_of_code(&code), counting(&code));
        assert_eq!(measure_of_code(&BorelCode::full()), Dyadic::one());
    }

    #[test]
    fn verification_and_faults() {
        let code = BorelCode::union(vec![BorelCode::inter(vec![cyl("0"), cyl("01")]), cyl("11")]);
        let d = build_decomposition(&code).unwrap();
        verify_decomposition(&code, &d).unwrap();
        let r = build_decomposition_with(&code, ChildOrder::Reversed).unwrap();
        verify_decomposition(&code, &r).unwrap();
        for (a, n) in d.names() {
            assert!(names_equal(n, r.get(a).unwrap(), 64).equal);
        }
        let leaf: Address = "<0,1>".parse().unwrap();
        let mut bad = d.clone();
        bad.insert(leaf.clone(), L1Name::constant(chi("0")));
        match verify_decomposition(&code, &bad) {
            Err(MeasureError::Law(v)) => {
                assert_eq!(v.address, leaf);
                assert_eq!(v.law, Law::Leaf);
                assert_eq!(v.residual, Some(Dyadic::new(1, 2)));
            }
            other => panic!("{other:?}"),
        }
        let mut missing = d.clone();
        missing.names.remove(&leaf);
        assert!(matches!(
            verify_decomposition(&code, &missing),
            Err(MeasureError::Law(LawViolation { law: Law::Missing, .. }))
        ));
        // a leaf name that disagrees with its label, consistent upward
        let single = cyl("01");
        let mut wrong = build_decomposition(&single).unwrap();
        wrong.insert(Address::root(), L1Name::constant(chi("0")));
        assert!(matches!(
            verify_decomposition(&single, &wrong),
            Err(MeasureError::Law(LawViolation { law: Law::Leaf, .. }))
        ));
    }

    #[test]
    fn membership_round_trip() {
        let code = BorelCode::union(vec![BorelCode::inter(vec![cyl("0"), cyl("01")]), BorelCode::inter(vec![])]);
        let h = code.addresses();
        let tilde = code.tilde(&h).unwrap();
        let f = build_decomposition(&tilde).unwrap().root().unwrap().clone();
        let d = decomposition_from_membership(&f, &code, &h).unwrap();
        for a in code.addresses() {
            let own = build_decomposition(code.subtree(&a).unwrap()).unwrap();
            assert!(names_equal(d.get(&a).unwrap(), own.root().unwrap(), 64).equal);
        }
        // a single leaf recovers its characteristic name
        let leaf = cyl("10");
        let h = vec![Address::root()];
        let f = build_decomposition(&leaf.tilde(&h).unwrap()).unwrap().root().unwrap().clone();
        let d = decomposition_from_membership(&f, &leaf, &h).unwrap();
        assert_eq!(d.root().unwrap().limit(), Some(&chi("10")));
        // a name for the wrong set is refused
        let wrong = L1Name::constant(chi("0"));
        assert!(matches!(
            decomposition_from_membership(&wrong, &leaf, &h),
            Err(MeasureError::NotMembership { .. })
        ));
    }

    #[test]
    fn repeated_addresses_use_the_first_index() {
        let code = BorelCode::inter(vec![cyl("1"), cyl("11")]);
        let mut h = code.addresses();
        h.insert(0, "<1>".parse().unwrap());
        let f = build_decomposition(&code.tilde(&h).unwrap()).unwrap().root().unwrap().clone();
        let d = decomposition_from_membership(&f, &code, &h).unwrap();
        assert_eq!(d.get(&"<1>".parse().unwrap()).unwrap().limit(), Some(&chi("11")));
    }
}
