use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Address, BorelCode};
use crate::cantor::{Bits, ClopenSet};

/// A finite infinitary-logic formula tree with truth-valued leaves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaCode {
    Const(bool),
    Or(Vec<FormulaCode>),
    And(Vec<FormulaCode>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaEval {
    pub root: bool,
    pub values: BTreeMap<Address, bool>,
}

/// The unique determination map of a finite formula.
pub fn eval_formula(phi: &FormulaCode) -> FormulaEval {
    fn go(phi: &FormulaCode, addr: Address, out: &mut BTreeMap<Address, bool>) -> bool {
        let v = match phi {
            FormulaCode::Const(b) => *b,
            FormulaCode::Or(ch) => {
                let mut any = false;
                for (i, c) in ch.iter().enumerate() {
                    any |= go(c, addr.child(i), out);
                }
                any
            }
            FormulaCode::And(ch) => {
                let mut all = true;
                for (i, c) in ch.iter().enumerate() {
                    all &= go(c, addr.child(i), out);
                }
                all
            }
        };
        out.insert(addr, v);
        v
    }
    let mut values = BTreeMap::new();
    let root = go(phi, Address::root(), &mut values);
    FormulaEval { root, values }
}

/// The union over `n` of `φ_n` with true leaves replaced by `[0^n 1]` and
/// false leaves by `∅`.
///
/// An empty conjunction is true, so it becomes the leaf `[0^n 1]` as well.
pub fn encode_formulas(phis: &[FormulaCode]) -> BorelCode {
    fn convert(phi: &FormulaCode, cone: &ClopenSet) -> BorelCode {
        match phi {
            FormulaCode::Const(true) => BorelCode::leaf(cone.clone()),
            FormulaCode::Const(false) => BorelCode::empty(),
            FormulaCode::Or(ch) => BorelCode::union(ch.iter().map(|c| convert(c, cone)).collect()),
            FormulaCode::And(ch) if ch.is_empty() => BorelCode::leaf(cone.clone()),
            FormulaCode::And(ch) => BorelCode::inter(ch.iter().map(|c| convert(c, cone)).collect()),
        }
    }
    BorelCode::union(
        phis.iter()
            .enumerate()
            .map(|(n, phi)| convert(phi, &ClopenSet::cylinder(Bits::zeros_then_one(n))))
            .collect(),
    )
}
