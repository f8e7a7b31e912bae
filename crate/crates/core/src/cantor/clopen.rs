use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Bits, Point};
use crate::dyadic::Dyadic;

/// A clopen subset of Cantor space as a canonical prefix-free antichain.
///
/// Canonical means: no generator is a prefix of another, no sibling pair
/// `p0, p1` is present (it is merged into `p`), and generators are sorted.
/// Two clopen sets are equal iff their generator lists are equal.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClopenSet {
    gens: Vec<Bits>,
}

impl ClopenSet {
    pub fn empty() -> Self {
        ClopenSet { gens: Vec::new() }
    }

    pub fn full() -> Self {
        ClopenSet { gens: vec![Bits::empty()] }
    }

    pub fn cylinder(p: Bits) -> Self {
        ClopenSet { gens: vec![p] }
    }

    /// Canonical antichain denoting `∪ [p]` over the input strings.
    pub fn normalize<I: IntoIterator<Item = Bits>>(strings: I) -> Self {
        let mut raw: Vec<Bits> = strings.into_iter().collect();
        raw.sort();
        raw.dedup();
        let slices: Vec<&[bool]> = raw.iter().map(|b| b.as_slice()).collect();
        let mut out = Vec::new();
        normalize_into(&slices, &mut Vec::new(), &mut out);
        ClopenSet { gens: out }
    }

    pub fn generators(&self) -> &[Bits] {
        &self.gens
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.gens.len() == 1 && self.gens[0].is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.gens.iter().map(Bits::len).max().unwrap_or(0)
    }

    /// The intensional measure `Σ 2^{-|p|}`.
    pub fn measure(&self) -> Dyadic {
        let depth = self.max_len();
        let count: num_bigint::BigInt =
            self.gens.iter().map(|p| num_bigint::BigInt::from(1) << (depth - p.len())).sum();
        Dyadic::new(count, depth as u32)
    }

    /// True iff some generator is a prefix of `x`; reads at most
    /// `max_len()` bits.
    pub fn contains_point(&self, x: &Point) -> bool {
        if self.gens.is_empty() {
            return false;
        }
        let prefix = x.prefix(self.max_len());
        self.contains_cylinder(&prefix)
    }

    /// True iff `[p] ⊆ self`.
    pub fn contains_cylinder(&self, p: &Bits) -> bool {
        self.gens.iter().any(|g| g.is_prefix_of(p))
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        ClopenSet::normalize(self.gens.iter().chain(other.gens.iter()).cloned())
    }

    pub fn union_all<'a, I: IntoIterator<Item = &'a ClopenSet>>(sets: I) -> ClopenSet {
        ClopenSet::normalize(sets.into_iter().flat_map(|s| s.gens.iter().cloned()))
    }

    pub fn intersection(&self, other: &ClopenSet) -> ClopenSet {
        let a: Vec<&[bool]> = self.gens.iter().map(|b| b.as_slice()).collect();
        let b: Vec<&[bool]> = other.gens.iter().map(|b| b.as_slice()).collect();
        let mut out = Vec::new();
        intersect_into(&a, &b, &mut Vec::new(), &mut out);
        ClopenSet::normalize(out)
    }

    pub fn complement(&self) -> ClopenSet {
        let a: Vec<&[bool]> = self.gens.iter().map(|b| b.as_slice()).collect();
        let mut out = Vec::new();
        complement_into(&a, &mut Vec::new(), &mut out);
        ClopenSet::normalize(out)
    }

    pub fn difference(&self, other: &ClopenSet) -> ClopenSet {
        self.intersection(&other.complement())
    }

    pub fn is_subset(&self, other: &ClopenSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// `p⌢S = {p⌢y : y ∈ S}`.
    pub fn prefixed(&self, p: &Bits) -> ClopenSet {
        ClopenSet::normalize(self.gens.iter().map(|g| p.concat(g)))
    }

    /// `{y : p⌢y ∈ S}`.
    pub fn restrict(&self, p: &Bits) -> ClopenSet {
        if self.contains_cylinder(p) {
            return ClopenSet::full();
        }
        ClopenSet::normalize(
            self.gens.iter().filter(|g| p.is_prefix_of(g)).map(|g| g.drop_prefix(p.len())),
        )
    }

    /// Splits `S` into `S ∩ {x : x(t) = 0}` and `S ∩ {x : x(t) = 1}`.
    pub fn split_at_bit(&self, t: usize) -> (ClopenSet, ClopenSet) {
        let mut zero = Vec::new();
        let mut one = Vec::new();
        for g in &self.gens {
            if g.len() > t {
                if g.as_slice()[t] {
                    one.push(g.clone());
                } else {
                    zero.push(g.clone());
                }
            } else {
                for ext in Bits::all_of_length(t - g.len()) {
                    let base = g.concat(&ext);
                    zero.push(base.with(false));
                    one.push(base.with(true));
                }
            }
        }
        (ClopenSet::normalize(zero), ClopenSet::normalize(one))
    }
}

fn normalize_into(strings: &[&[bool]], path: &mut Vec<bool>, out: &mut Vec<Bits>) {
    if strings.is_empty() {
        return;
    }
    if strings.iter().any(|s| s.is_empty()) {
        out.push(Bits::from_bools(path.clone()));
        return;
    }
    let (zero, one): (Vec<&[bool]>, Vec<&[bool]>) = strings.iter().partition(|s| !s[0]);
    let zero: Vec<&[bool]> = zero.into_iter().map(|s| &s[1..]).collect();
    let one: Vec<&[bool]> = one.into_iter().map(|s| &s[1..]).collect();
    let mark = out.len();
    path.push(false);
    normalize_into(&zero, path, out);
    path.pop();
    let zero_full = out.len() == mark + 1 && out[mark].len() == path.len() + 1;
    let mid = out.len();
    path.push(true);
    normalize_into(&one, path, out);
    path.pop();
    let one_full = out.len() == mid + 1 && out[mid].len() == path.len() + 1;
    if zero_full && one_full {
        out.truncate(mark);
        out.push(Bits::from_bools(path.clone()));
    }
}

fn intersect_into(a: &[&[bool]], b: &[&[bool]], path: &mut Vec<bool>, out: &mut Vec<Bits>) {
    if a.is_empty() || b.is_empty() {
        return;
    }
    let prefixed = |xs: &[&[bool]], path: &Vec<bool>, out: &mut Vec<Bits>| {
        for x in xs {
            let mut v = path.clone();
            v.extend_from_slice(x);
            out.push(Bits::from_bools(v));
        }
    };
    if a.iter().any(|s| s.is_empty()) {
        prefixed(b, path, out);
        return;
    }
    if b.iter().any(|s| s.is_empty()) {
        prefixed(a, path, out);
        return;
    }
    for bit in [false, true] {
        let sa: Vec<&[bool]> = a.iter().filter(|s| s[0] == bit).map(|s| &s[1..]).collect();
        let sb: Vec<&[bool]> = b.iter().filter(|s| s[0] == bit).map(|s| &s[1..]).collect();
        path.push(bit);
        intersect_into(&sa, &sb, path, out);
        path.pop();
    }
}

fn complement_into(a: &[&[bool]], path: &mut Vec<bool>, out: &mut Vec<Bits>) {
    if a.is_empty() {
        out.push(Bits::from_bools(path.clone()));
        return;
    }
    if a.iter().any(|s| s.is_empty()) {
        return;
    }
    for bit in [false, true] {
        let sub: Vec<&[bool]> = a.iter().filter(|s| s[0] == bit).map(|s| &s[1..]).collect();
        path.push(bit);
        complement_into(&sub, path, out);
        path.pop();
    }
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, g) in self.gens.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if g.is_empty() {
                f.write_str("λ")?;
            } else {
                write!(f, "{g}")?;
            }
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for ClopenSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.gens.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClopenSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let gens = Vec::<Bits>::deserialize(deserializer)?;
        Ok(ClopenSet::normalize(gens))
    }
}
