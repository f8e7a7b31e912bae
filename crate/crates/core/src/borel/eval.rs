use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Address, BorelCode, BorelError, Node};
use crate::cantor::{ClopenSet, Point};

/// A 0/1 assignment to the nodes of a code.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalMap {
    values: BTreeMap<Address, bool>,
}

impl EvalMap {
    pub fn from_values(values: BTreeMap<Address, bool>) -> Self {
        EvalMap { values }
    }

    pub fn root(&self) -> bool {
        self.values[&Address::root()]
    }

    pub fn get(&self, addr: &Address) -> Option<bool> {
        self.values.get(addr).copied()
    }

    pub fn values(&self) -> &BTreeMap<Address, bool> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_flipped(&self, addr: &Address) -> EvalMap {
        let mut values = self.values.clone();
        if let Some(v) = values.get_mut(addr) {
            *v = !*v;
        }
        EvalMap { values }
    }

    /// The first address (breadth-first) where the evaluation clauses fail
    /// for `x`, or where the map has no value.
    pub fn check_clauses(&self, code: &BorelCode, x: &Point) -> Option<Address> {
        self.check_clauses_with(code, |s| s.contains_point(x))
    }

    /// As [`EvalMap::check_clauses`] with leaf truth supplied by `leaf`.
    pub fn check_clauses_with(
        &self,
        code: &BorelCode,
        leaf: impl Fn(&ClopenSet) -> bool,
    ) -> Option<Address> {
        for addr in code.addresses() {
            let node = code.subtree(&addr).expect("own address");
            let Some(v) = self.get(&addr) else {
                return Some(addr);
            };
            let child = |i: usize| self.get(&addr.child(i));
            let ok = match node.node() {
                Node::Leaf(s) => v == leaf(s),
                Node::Union(ch) => {
                    let vals: Option<Vec<bool>> = ch.keys().map(|i| child(*i)).collect();
                    vals.map(|vs| v == vs.into_iter().any(|b| b)).unwrap_or(false)
                }
                Node::Inter(ch) => {
                    let vals: Option<Vec<bool>> = ch.keys().map(|i| child(*i)).collect();
                    vals.map(|vs| v == vs.into_iter().all(|b| b)).unwrap_or(false)
                }
                Node::Compl(_) => child(0).map(|c| v != c).unwrap_or(false),
            };
            if !ok {
                return Some(addr);
            }
        }
        None
    }
}

/// The evaluation map of a finite complement-free code at `x`.
pub fn evaluate(code: &BorelCode, x: &Point) -> Result<EvalMap, BorelError> {
    if !code.is_complement_free() {
        return Err(BorelError::NotComplementFree);
    }
    let x = x.memoize(code.support_depth());
    let mut values = BTreeMap::new();
    fill(code, &Address::root(), &x, &mut values);
    Ok(EvalMap { values })
}

fn fill(code: &BorelCode, addr: &Address, x: &Point, out: &mut BTreeMap<Address, bool>) -> bool {
    let v = match code.node() {
        Node::Leaf(s) => s.contains_point(x),
        Node::Union(ch) => {
            let mut any = false;
            for (i, c) in ch {
                any |= fill(c, &addr.child(*i), x, out);
            }
            any
        }
        Node::Inter(ch) => {
            let mut all = true;
            for (i, c) in ch {
                all &= fill(c, &addr.child(*i), x, out);
            }
            all
        }
        Node::Compl(c) => !fill(c, &addr.child(0), x, out),
    };
    out.insert(addr.clone(), v);
    v
}

/// Node values over shared subtrees, each distinct node evaluated once.
/// The evaluation map at every address is the value of the node it names.
pub struct SharedEval {
    pub root: bool,
    pub distinct_nodes: usize,
}

/// Evaluates a possibly shared code and re-checks uniqueness: every node's
/// value is forced by its clause, so flipping any single value breaks the
/// clause at that node.
pub fn evaluate_shared(code: &BorelCode, x: &Point) -> Result<SharedEval, BorelError> {
    if !code.is_complement_free() {
        return Err(BorelError::NotComplementFree);
    }
    let x = x.memoize(code.support_depth());
    let mut memo = std::collections::HashMap::new();
    let root = code.contains_memo(&x, &mut memo);
    let mut checked = std::collections::HashSet::new();
    let mut stack = vec![code];
    while let Some(node) = stack.pop() {
        let key = node as *const BorelCode as usize;
        if !checked.insert(key) {
            continue;
        }
        let v = memo[&key];
        let value_of = |c: &BorelCode| memo[&(c as *const BorelCode as usize)];
        let forced = match node.node() {
            Node::Leaf(s) => s.contains_point(&x),
            Node::Union(ch) => ch.values().any(|c| value_of(c)),
            Node::Inter(ch) => ch.values().all(|c| value_of(c)),
            Node::Compl(c) => !value_of(c),
        };
        if v != forced {
            return Err(BorelError::ClauseViolation);
        }
        for (_, c) in node.children() {
            stack.push(c);
        }
    }
    Ok(SharedEval { root, distinct_nodes: checked.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::Bits;

    fn cyl(s: &str) -> BorelCode {
        BorelCode::cylinder(s.into())
    }

    #[test]
    fn examples() {
        let zero = Point::constant(false);
        assert!(evaluate(&cyl("0"), &zero).unwrap().root());
        let u = BorelCode::union(vec![cyl("00"), cyl("11")]);
        assert!(evaluate(&u, &zero).unwrap().root());
        let i = BorelCode::inter(vec![cyl("0"), cyl("01")]);
        let alt: Point = "u=:v=01".parse().unwrap();
        let m = evaluate(&i, &alt).unwrap();
        assert!(m.root());
        assert_eq!(m.len(), 3);
        assert_eq!(m.check_clauses(&i, &alt), None);
    }

    #[test]
    fn empty_conventions() {
        let x = Point::seeded(1);
        assert!(!evaluate(&BorelCode::union(vec![]), &x).unwrap().root());
        assert!(evaluate(&BorelCode::inter(vec![]), &x).unwrap().root());
    }

    #[test]
    fn every_single_flip_breaks_a_clause() {
        let c = BorelCode::union(vec![
            BorelCode::inter(vec![cyl("0"), BorelCode::union(vec![cyl("01"), cyl("1")])]),
            cyl("11"),
        ]);
        for p in Bits::all_of_length(3) {
            let x = Point::constant(false).tail_append(&p);
            let m = evaluate(&c, &x).unwrap();
            assert_eq!(m.check_clauses(&c, &x), None);
            for a in c.addresses() {
                assert!(m.with_flipped(&a).check_clauses(&c, &x).is_some(), "{a}");
            }
            let s = evaluate_shared(&c, &x).unwrap();
            assert_eq!(s.root, m.root());
        }
    }

    #[test]
    fn complement_rejected() {
        let c = BorelCode::compl(cyl("0"));
        assert_eq!(evaluate(&c, &Point::seeded(0)), Err(BorelError::NotComplementFree));
    }
}
