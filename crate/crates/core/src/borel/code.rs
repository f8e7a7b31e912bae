use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BorelError, Ordinal};
use crate::cantor::{Bits, ClopenSet, Point};

/// Children keyed by their index. Indices need not be contiguous: decorated
/// codes place originals at even and decorations at odd positions.
pub type Children = BTreeMap<usize, Arc<BorelCode>>;

#[derive(Clone, PartialEq, Eq)]
pub enum Node {
    Leaf(ClopenSet),
    Union(Children),
    Inter(Children),
    /// Only present before `normalize_demorgan`.
    Compl(Arc<BorelCode>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Leaf,
    Union,
    Inter,
    Compl,
}

/// A path of child indices from the root; the root is the empty path.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address(pub Vec<usize>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn child(&self, i: usize) -> Address {
        let mut v = self.0.clone();
        v.push(i);
        Address(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(">")
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Address {
    type Err = BorelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BorelError::BadAddress(s.to_string());
        let inner = s.trim().strip_prefix('<').and_then(|r| r.strip_suffix('>')).ok_or_else(bad)?;
        if inner.trim().is_empty() {
            return Ok(Address::root());
        }
        inner
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()
            .map(Address)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite Borel code: a labeled tree with clopen leaves and union or
/// intersection inner nodes, optionally rank-annotated.
#[derive(Clone, PartialEq, Eq)]
pub struct BorelCode {
    node: Node,
    rank: Option<Ordinal>,
}

fn indexed(children: Vec<BorelCode>) -> Children {
    children.into_iter().map(Arc::new).enumerate().collect()
}

impl BorelCode {
    pub fn from_node(node: Node) -> Self {
        BorelCode { node, rank: None }
    }

    pub fn leaf(set: ClopenSet) -> Self {
        BorelCode::from_node(Node::Leaf(set))
    }

    pub fn cylinder(p: Bits) -> Self {
        BorelCode::leaf(ClopenSet::cylinder(p))
    }

    pub fn empty() -> Self {
        BorelCode::leaf(ClopenSet::empty())
    }

    pub fn full() -> Self {
        BorelCode::leaf(ClopenSet::full())
    }

    pub fn union(children: Vec<BorelCode>) -> Self {
        BorelCode::from_node(Node::Union(indexed(children)))
    }

    pub fn inter(children: Vec<BorelCode>) -> Self {
        BorelCode::from_node(Node::Inter(indexed(children)))
    }

    pub fn compl(child: BorelCode) -> Self {
        BorelCode::from_node(Node::Compl(Arc::new(child)))
    }

    pub fn with_rank(mut self, rank: Ordinal) -> Self {
        self.rank = Some(rank);
        self
    }

    pub fn without_ranks(&self) -> BorelCode {
        let node = match &self.node {
            Node::Leaf(s) => Node::Leaf(s.clone()),
            Node::Union(ch) => Node::Union(map_children(ch, |c| c.without_ranks())),
            Node::Inter(ch) => Node::Inter(map_children(ch, |c| c.without_ranks())),
            Node::Compl(c) => Node::Compl(Arc::new(c.without_ranks())),
        };
        BorelCode { node, rank: None }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn rank(&self) -> Option<&Ordinal> {
        self.rank.as_ref()
    }

    pub fn kind(&self) -> NodeKind {
        match self.node {
            Node::Leaf(_) => NodeKind::Leaf,
            Node::Union(_) => NodeKind::Union,
            Node::Inter(_) => NodeKind::Inter,
            Node::Compl(_) => NodeKind::Compl,
        }
    }

    pub fn label(&self) -> Option<&ClopenSet> {
        match &self.node {
            Node::Leaf(s) => Some(s),
            _ => None,
        }
    }

    /// Children of a union or intersection node; a complement node has its
    /// single child at index 0.
    pub fn children(&self) -> Vec<(usize, &BorelCode)> {
        match &self.node {
            Node::Leaf(_) => Vec::new(),
            Node::Union(ch) | Node::Inter(ch) => ch.iter().map(|(i, c)| (*i, c.as_ref())).collect(),
            Node::Compl(c) => vec![(0, c.as_ref())],
        }
    }

    pub fn child(&self, i: usize) -> Option<&BorelCode> {
        match &self.node {
            Node::Leaf(_) => None,
            Node::Union(ch) | Node::Inter(ch) => ch.get(&i).map(Arc::as_ref),
            Node::Compl(c) => (i == 0).then_some(c.as_ref()),
        }
    }

    pub fn subtree(&self, addr: &Address) -> Option<&BorelCode> {
        let mut cur = self;
        for &i in &addr.0 {
            cur = cur.child(i)?;
        }
        Some(cur)
    }

    /// All node addresses in breadth-first order, children by index.
    pub fn addresses(&self) -> Vec<Address> {
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(Address::root(), self)]);
        while let Some((addr, node)) = queue.pop_front() {
            for (i, c) in node.children() {
                queue.push_back((addr.child(i), c));
            }
            out.push(addr);
        }
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|(_, c)| c.node_count()).sum::<usize>()
    }

    /// Number of structurally distinct shared nodes (each `Arc` counted once).
    pub fn distinct_node_count(&self) -> usize {
        fn walk(c: &BorelCode, seen: &mut BTreeSet<usize>) {
            if seen.insert(c as *const BorelCode as usize) {
                for (_, ch) in c.children() {
                    walk(ch, seen);
                }
            }
        }
        let mut seen = BTreeSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    pub fn height(&self) -> usize {
        self.children().iter().map(|(_, c)| c.height() + 1).max().unwrap_or(0)
    }

    /// Memoized over shared subtrees, like the other whole-tree queries
    /// that decorated codes go through.
    pub fn is_complement_free(&self) -> bool {
        fn walk(c: &BorelCode, ok: &mut BTreeSet<usize>) -> bool {
            if !ok.insert(c as *const BorelCode as usize) {
                return true;
            }
            match &c.node {
                Node::Compl(_) => false,
                _ => c.children().iter().all(|(_, k)| walk(k, ok)),
            }
        }
        walk(self, &mut BTreeSet::new())
    }

    /// True iff no union has a union child and no intersection has an
    /// intersection child.
    pub fn is_alternating(&self) -> bool {
        let kind = self.kind();
        self.children().iter().all(|(_, c)| {
            let ck = c.kind();
            ck != NodeKind::Compl
                && !(kind == ck && kind != NodeKind::Leaf)
                && c.is_alternating()
        })
    }

    /// Maximum leaf generator length; membership depends on that many bits.
    pub fn support_depth(&self) -> usize {
        fn walk(c: &BorelCode, seen: &mut BTreeSet<usize>) -> usize {
            if !seen.insert(c as *const BorelCode as usize) {
                return 0;
            }
            match &c.node {
                Node::Leaf(s) => s.max_len(),
                _ => c.children().iter().map(|(_, k)| walk(k, seen)).max().unwrap_or(0),
            }
        }
        walk(self, &mut BTreeSet::new())
    }

    /// Membership by direct recursion. Complement nodes are honored.
    pub fn contains(&self, x: &Point) -> bool {
        match &self.node {
            Node::Leaf(s) => s.contains_point(x),
            Node::Union(ch) => ch.values().any(|c| c.contains(x)),
            Node::Inter(ch) => ch.values().all(|c| c.contains(x)),
            Node::Compl(c) => !c.contains(x),
        }
    }

    /// Membership of every point extending `p`, valid once
    /// `p.len() >= support_depth()`.
    pub fn contains_prefix(&self, p: &Bits) -> bool {
        match &self.node {
            Node::Leaf(s) => s.contains_cylinder(p),
            Node::Union(ch) => ch.values().any(|c| c.contains_prefix(p)),
            Node::Inter(ch) => ch.values().all(|c| c.contains_prefix(p)),
            Node::Compl(c) => !c.contains_prefix(p),
        }
    }

    /// Membership with one evaluation per shared subtree; linear in the
    /// number of distinct nodes even when decorations are reused.
    pub fn contains_shared(&self, x: &Point) -> bool {
        let x = x.memoize(self.support_depth());
        let mut memo = HashMap::new();
        self.contains_memo(&x, &mut memo)
    }

    pub(crate) fn contains_memo(&self, x: &Point, memo: &mut HashMap<usize, bool>) -> bool {
        let key = self as *const BorelCode as usize;
        if let Some(v) = memo.get(&key) {
            return *v;
        }
        let v = match &self.node {
            Node::Leaf(s) => s.contains_point(x),
            Node::Union(ch) => {
                let mut any = false;
                for c in ch.values() {
                    any |= c.contains_memo(x, memo);
                }
                any
            }
            Node::Inter(ch) => {
                let mut all = true;
                for c in ch.values() {
                    all &= c.contains_memo(x, memo);
                }
                all
            }
            Node::Compl(c) => !c.contains_memo(x, memo),
        };
        memo.insert(key, v);
        v
    }

    /// Pushes complements to the leaves. A complemented subtree keeps the
    /// rank annotations of the original.
    pub fn normalize_demorgan(&self) -> BorelCode {
        self.with_polarity(false)
    }

    fn with_polarity(&self, negate: bool) -> BorelCode {
        let node = match (&self.node, negate) {
            (Node::Leaf(s), false) => Node::Leaf(s.clone()),
            (Node::Leaf(s), true) => Node::Leaf(s.complement()),
            (Node::Union(ch), false) => Node::Union(map_children(ch, |c| c.with_polarity(false))),
            (Node::Union(ch), true) => Node::Inter(map_children(ch, |c| c.with_polarity(true))),
            (Node::Inter(ch), false) => Node::Inter(map_children(ch, |c| c.with_polarity(false))),
            (Node::Inter(ch), true) => Node::Union(map_children(ch, |c| c.with_polarity(true))),
            (Node::Compl(c), _) => {
                let inner = c.with_polarity(!negate);
                return BorelCode { node: inner.node, rank: inner.rank.or_else(|| self.rank.clone()) };
            }
        };
        BorelCode { node, rank: self.rank.clone() }
    }

    /// Fuses same-kind parent/child chains. Fused nodes are re-ranked as the
    /// successor of their largest child rank; children are re-indexed.
    pub fn make_alternating(&self) -> BorelCode {
        let base = if self.is_complement_free() { self.clone() } else { self.normalize_demorgan() };
        base.alternate()
    }

    fn alternate(&self) -> BorelCode {
        let kind = self.kind();
        let (ch, is_union) = match &self.node {
            Node::Union(ch) => (ch, true),
            Node::Inter(ch) => (ch, false),
            _ => return self.clone(),
        };
        let mut flat: Vec<Arc<BorelCode>> = Vec::new();
        let mut fused = false;
        for c in ch.values() {
            let c = c.alternate();
            if c.kind() == kind {
                fused = true;
                flat.extend(c.children().into_iter().map(|(_, g)| Arc::new(g.clone())));
            } else {
                flat.push(Arc::new(c));
            }
        }
        let rank = if fused {
            self.rank.as_ref().map(|_| {
                flat.iter()
                    .filter_map(|c| c.rank.clone())
                    .max()
                    .unwrap_or_else(Ordinal::zero)
                    .succ()
            })
        } else {
            self.rank.clone()
        };
        let children: Children = flat.into_iter().enumerate().collect();
        let node = if is_union { Node::Union(children) } else { Node::Inter(children) };
        BorelCode { node, rank }
    }

    /// Checks the rank laws: leaves have rank 1 and each child's rank is
    /// strictly below its parent's.
    pub fn check_rank(&self) -> Result<bool, BorelError> {
        self.check_rank_at(&Address::root())
    }

    fn check_rank_at(&self, addr: &Address) -> Result<bool, BorelError> {
        let rank = self.rank.as_ref().ok_or_else(|| BorelError::MissingRank(addr.clone()))?;
        if let Node::Leaf(_) = self.node {
            return Ok(*rank == Ordinal::one());
        }
        if rank.is_zero() {
            return Ok(false);
        }
        for (i, c) in self.children() {
            let cr = c.rank.as_ref().ok_or_else(|| BorelError::MissingRank(addr.child(i)))?;
            if cr >= rank || !c.check_rank_at(&addr.child(i))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The first address breaking the rank laws, memoized over shared
    /// subtrees.
    pub fn rank_violation(&self) -> Option<Address> {
        fn walk(c: &BorelCode, addr: &Address, ok: &mut BTreeSet<usize>) -> Option<Address> {
            let key = c as *const BorelCode as usize;
            if ok.contains(&key) {
                return None;
            }
            let rank = c.rank.as_ref()?;
            let bad = match c.node {
                Node::Leaf(_) => *rank != Ordinal::one(),
                _ => rank.is_zero(),
            };
            if bad {
                return Some(addr.clone());
            }
            for (i, ch) in c.children() {
                match ch.rank.as_ref() {
                    Some(r) if r < rank => {}
                    _ => return Some(addr.child(i)),
                }
                if let Some(a) = walk(ch, &addr.child(i), ok) {
                    return Some(a);
                }
            }
            ok.insert(key);
            None
        }
        if self.rank.is_none() {
            return Some(Address::root());
        }
        walk(self, &Address::root(), &mut BTreeSet::new())
    }

    /// Alternation check memoized over shared subtrees.
    pub fn is_alternating_shared(&self) -> bool {
        fn walk(c: &BorelCode, ok: &mut BTreeSet<usize>) -> bool {
            let key = c as *const BorelCode as usize;
            if ok.contains(&key) {
                return true;
            }
            let kind = c.kind();
            for (_, ch) in c.children() {
                let ck = ch.kind();
                if ck == NodeKind::Compl || (ck == kind && kind != NodeKind::Leaf) || !walk(ch, ok) {
                    return false;
                }
            }
            ok.insert(key);
            true
        }
        walk(self, &mut BTreeSet::new())
    }

    /// Annotates every node with its height-based rank: leaves 1, inner
    /// nodes the successor of the largest child rank.
    pub fn with_height_ranks(&self) -> BorelCode {
        let node = match &self.node {
            Node::Leaf(s) => Node::Leaf(s.clone()),
            Node::Union(ch) => Node::Union(map_children(ch, |c| c.with_height_ranks())),
            Node::Inter(ch) => Node::Inter(map_children(ch, |c| c.with_height_ranks())),
            Node::Compl(c) => Node::Compl(Arc::new(c.with_height_ranks())),
        };
        let rank = match &node {
            Node::Leaf(_) => Ordinal::one(),
            Node::Compl(c) => c.rank.clone().unwrap_or_else(Ordinal::one),
            Node::Union(ch) | Node::Inter(ch) => ch
                .values()
                .filter_map(|c| c.rank.clone())
                .max()
                .unwrap_or_else(Ordinal::zero)
                .succ(),
        };
        BorelCode { node, rank: Some(rank) }
    }

    /// `S[n]`: every leaf generator `p` becomes `0^n 1 p`.
    ///
    /// A childless intersection would denote all of `2^ω`; it becomes the
    /// leaf `[0^n 1]` so the result stays inside that cone.
    pub fn relocate(&self, n: usize) -> BorelCode {
        let cone = Bits::zeros_then_one(n);
        let base = if self.is_complement_free() { self.clone() } else { self.normalize_demorgan() };
        base.relocate_with(&cone)
    }

    fn relocate_with(&self, cone: &Bits) -> BorelCode {
        let node = match &self.node {
            Node::Leaf(s) => Node::Leaf(s.prefixed(cone)),
            Node::Union(ch) => Node::Union(map_children(ch, |c| c.relocate_with(cone))),
            Node::Inter(ch) if ch.is_empty() => {
                let rank = self.rank.as_ref().map(|_| Ordinal::one());
                return BorelCode { node: Node::Leaf(ClopenSet::cylinder(cone.clone())), rank };
            }
            Node::Inter(ch) => Node::Inter(map_children(ch, |c| c.relocate_with(cone))),
            Node::Compl(_) => unreachable!("relocate runs on complement-free codes"),
        };
        BorelCode { node, rank: self.rank.clone() }
    }

    /// `T̃ = ∪_{n ≤ k} T_{h(n)}[n]`, where `h` lists one address per index
    /// and must cover every address of `self`.
    pub fn tilde(&self, h: &[Address]) -> Result<BorelCode, BorelError> {
        let mut children = Vec::with_capacity(h.len());
        for a in h {
            let sub = self.subtree(a).ok_or_else(|| BorelError::NoSuchAddress(a.clone()))?;
            children.push(sub.relocate(children.len()));
        }
        let hit: BTreeSet<&Address> = h.iter().collect();
        if let Some(missed) = self.addresses().into_iter().find(|a| !hit.contains(a)) {
            return Err(BorelError::NotSurjective(missed));
        }
        Ok(BorelCode::union(children))
    }

    /// The child indices reversed: child `i` of `k` children moves to
    /// `k - 1 - i`, recursively. Denotation is unchanged.
    pub fn reversed(&self) -> BorelCode {
        let rev = |ch: &Children| -> Children {
            let v: Vec<Arc<BorelCode>> = ch.values().rev().map(|c| Arc::new(c.reversed())).collect();
            v.into_iter().enumerate().collect()
        };
        let node = match &self.node {
            Node::Leaf(s) => Node::Leaf(s.clone()),
            Node::Union(ch) => Node::Union(rev(ch)),
            Node::Inter(ch) => Node::Inter(rev(ch)),
            Node::Compl(c) => Node::Compl(Arc::new(c.reversed())),
        };
        BorelCode { node, rank: self.rank.clone() }
    }

    /// Replaces the leaf label at `addr`.
    pub fn with_leaf_at(&self, addr: &Address, set: ClopenSet) -> Result<BorelCode, BorelError> {
        if addr.is_root() {
            return match self.node {
                Node::Leaf(_) => Ok(BorelCode { node: Node::Leaf(set), rank: self.rank.clone() }),
                _ => Err(BorelError::NoSuchAddress(addr.clone())),
            };
        }
        let head = addr.0[0];
        let rest = Address(addr.0[1..].to_vec());
        let replace = |ch: &Children| -> Result<Children, BorelError> {
            let c = ch.get(&head).ok_or_else(|| BorelError::NoSuchAddress(addr.clone()))?;
            let mut out = ch.clone();
            out.insert(head, Arc::new(c.with_leaf_at(&rest, set.clone())?));
            Ok(out)
        };
        let node = match &self.node {
            Node::Union(ch) => Node::Union(replace(ch)?),
            Node::Inter(ch) => Node::Inter(replace(ch)?),
            _ => return Err(BorelError::NoSuchAddress(addr.clone())),
        };
        Ok(BorelCode { node, rank: self.rank.clone() })
    }
}

pub(crate) fn map_children(ch: &Children, f: impl Fn(&BorelCode) -> BorelCode) -> Children {
    ch.iter().map(|(i, c)| (*i, Arc::new(f(c)))).collect()
}

impl fmt::Debug for BorelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Leaf(s) => write!(f, "leaf{s}")?,
            Node::Compl(c) => write!(f, "compl({c:?})")?,
            Node::Union(ch) | Node::Inter(ch) => {
                f.write_str(if self.kind() == NodeKind::Union { "union(" } else { "inter(" })?;
                for (k, (i, c)) in ch.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{i}:{c:?}")?;
                }
                f.write_str(")")?;
            }
        }
        if let Some(r) = &self.rank {
            write!(f, "@{r}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<ClopenSet>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rank: Option<Ordinal>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    children: Vec<(usize, CodeJson)>,
}

impl CodeJson {
    fn from_code(c: &BorelCode) -> Self {
        CodeJson {
            kind: c.kind(),
            label: c.label().cloned(),
            rank: c.rank.clone(),
            children: c.children().into_iter().map(|(i, c)| (i, CodeJson::from_code(c))).collect(),
        }
    }

    fn into_code(self) -> Result<BorelCode, String> {
        let children = || -> Result<Children, String> {
            let mut ch = Children::new();
            for (i, c) in self.children {
                if ch.insert(i, Arc::new(c.into_code()?)).is_some() {
                    return Err(format!("duplicate child index {i}"));
                }
            }
            Ok(ch)
        };
        let node = match self.kind {
            NodeKind::Leaf => Node::Leaf(self.label.ok_or("leaf without label")?),
            NodeKind::Union => Node::Union(children()?),
            NodeKind::Inter => Node::Inter(children()?),
            NodeKind::Compl => {
                let ch = children()?;
                let mut it = ch.into_values();
                match (it.next(), it.next()) {
                    (Some(c), None) => Node::Compl(c),
                    _ => return Err("complement needs exactly one child".into()),
                }
            }
        };
        Ok(BorelCode { node, rank: self.rank })
    }
}

impl Serialize for BorelCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CodeJson::from_code(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BorelCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        CodeJson::deserialize(deserializer)?.into_code().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyl(s: &str) -> BorelCode {
        BorelCode::cylinder(s.into())
    }

    fn denotation(c: &BorelCode, d: usize) -> Vec<bool> {
        Bits::all_of_length(d).map(|p| c.contains_prefix(&p)).collect()
    }

    #[test]
    fn demorgan_examples() {
        let c = BorelCode::compl(BorelCode::union(vec![cyl("0"), cyl("11")]));
        let n = c.normalize_demorgan();
        assert_eq!(n.kind(), NodeKind::Inter);
        assert!(n.is_complement_free());
        assert_eq!(denotation(&n, 2), denotation(&c, 2));
        assert_eq!(BorelCode::compl(cyl("0")).normalize_demorgan(), cyl("1"));
        let twice = BorelCode::compl(BorelCode::compl(cyl("01")));
        assert_eq!(twice.normalize_demorgan(), cyl("01"));
    }

    #[test]
    fn alternating_examples() {
        let c = BorelCode::union(vec![BorelCode::union(vec![cyl("00"), cyl("01")]), cyl("11")]);
        let a = c.make_alternating();
        assert_eq!(a, BorelCode::union(vec![cyl("00"), cyl("01"), cyl("11")]));
        assert_eq!(denotation(&a, 2), denotation(&c, 2));
        let alt = BorelCode::union(vec![BorelCode::inter(vec![cyl("0")]), cyl("1")]);
        assert!(alt.is_alternating());
        assert_eq!(alt.make_alternating(), alt);
        assert_eq!(cyl("0").make_alternating(), cyl("0"));
    }

    #[test]
    fn rank_examples() {
        let one = Ordinal::one();
        assert!(cyl("0").with_rank(one.clone()).check_rank().unwrap());
        let eq = BorelCode::union(vec![cyl("0").with_rank(one.clone())]).with_rank(one.clone());
        assert!(!eq.check_rank().unwrap());
        let mut chain = cyl("0").with_rank(one);
        for n in 2..=6u64 {
            chain = BorelCode::union(vec![chain]).with_rank(Ordinal::finite(n));
        }
        assert!(chain.check_rank().unwrap());
        let missing = BorelCode::union(vec![cyl("0")]).with_rank(Ordinal::finite(2));
        assert_eq!(
            missing.check_rank(),
            Err(BorelError::MissingRank(Address(vec![0])))
        );
    }

    #[test]
    fn fused_ranks_stay_valid() {
        let c = BorelCode::union(vec![BorelCode::union(vec![cyl("00"), cyl("1")]), cyl("01")])
            .with_height_ranks();
        assert!(c.check_rank().unwrap());
        let a = c.make_alternating();
        assert!(a.check_rank().unwrap());
        assert_eq!(a.rank(), Some(&Ordinal::finite(2)));
    }

    #[test]
    fn relocation() {
        assert_eq!(cyl("0").relocate(0), cyl("10"));
        let c = BorelCode::union(vec![cyl("0"), BorelCode::inter(vec![])]);
        let r = c.relocate(2);
        for p in Bits::all_of_length(5) {
            if r.contains_prefix(&p) {
                assert!(Bits::from("001").is_prefix_of(&p));
            }
        }
        assert!(r.contains_prefix(&"00111".into()));
    }

    #[test]
    fn tilde_requires_surjection() {
        let c = BorelCode::union(vec![cyl("0"), cyl("11")]);
        let h = c.addresses();
        let t = c.tilde(&h).unwrap();
        assert_eq!(t.children().len(), 3);
        assert_eq!(
            c.tilde(&h[..2]),
            Err(BorelError::NotSurjective(Address(vec![1])))
        );
        assert!(matches!(c.tilde(&[Address(vec![7])]), Err(BorelError::NoSuchAddress(_))));
        let leaf = cyl("1");
        assert_eq!(leaf.tilde(&[Address::root()]).unwrap(), BorelCode::union(vec![cyl("11")]));
    }

    #[test]
    fn support_depths() {
        assert_eq!(BorelCode::full().support_depth(), 0);
        assert_eq!(BorelCode::union(vec![cyl("00"), cyl("1")]).support_depth(), 2);
    }

    #[test]
    fn addresses_are_breadth_first() {
        let c = BorelCode::union(vec![BorelCode::inter(vec![cyl("0"), cyl("1")]), cyl("1")]);
        let a: Vec<String> = c.addresses().iter().map(|a| a.to_string()).collect();
        assert_eq!(a, ["<>", "<0>", "<1>", "<0,0>", "<0,1>"]);
        assert_eq!("<0,1>".parse::<Address>().unwrap(), Address(vec![0, 1]));
        assert_eq!("<>".parse::<Address>().unwrap(), Address::root());
    }

    #[test]
    fn json_roundtrip() {
        let c = BorelCode::union(vec![BorelCode::inter(vec![cyl("0"), cyl("01")]), cyl("1")])
            .with_height_ranks();
        let s = serde_json::to_string(&c).unwrap();
        let back: BorelCode = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
