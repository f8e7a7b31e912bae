use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cantor::{Bits, ClopenSet, Point};
use crate::dyadic::Dyadic;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Cell {
    Const(Dyadic),
    Split(Arc<Cell>, Arc<Cell>),
}

/// A function on `2^ω` constant on the cylinders of some finite depth.
///
/// Stored as a binary decision tree; sibling cells with equal constant
/// values are always merged, so the tree has minimal depth and equality of
/// functions is structural equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StepFunction(Arc<Cell>);

fn split(a: Arc<Cell>, b: Arc<Cell>) -> Arc<Cell> {
    match (&*a, &*b) {
        (Cell::Const(x), Cell::Const(y)) if x == y => a,
        _ => Arc::new(Cell::Split(a, b)),
    }
}

fn halves(c: &Arc<Cell>) -> (Arc<Cell>, Arc<Cell>) {
    match &**c {
        Cell::Const(_) => (c.clone(), c.clone()),
        Cell::Split(a, b) => (a.clone(), b.clone()),
    }
}

impl StepFunction {
    pub fn constant(c: Dyadic) -> Self {
        StepFunction(Arc::new(Cell::Const(c)))
    }

    pub fn zero() -> Self {
        StepFunction::constant(Dyadic::zero())
    }

    pub fn one() -> Self {
        StepFunction::constant(Dyadic::one())
    }

    /// The characteristic function `χ_S`.
    pub fn indicator(s: &ClopenSet) -> Self {
        fn build(gens: &[&[bool]]) -> Arc<Cell> {
            if gens.is_empty() {
                return Arc::new(Cell::Const(Dyadic::zero()));
            }
            if gens.iter().any(|g| g.is_empty()) {
                return Arc::new(Cell::Const(Dyadic::one()));
            }
            let zero: Vec<&[bool]> = gens.iter().filter(|g| !g[0]).map(|g| &g[1..]).collect();
            let one: Vec<&[bool]> = gens.iter().filter(|g| g[0]).map(|g| &g[1..]).collect();
            split(build(&zero), build(&one))
        }
        let gens: Vec<&[bool]> = s.generators().iter().map(|b| b.as_slice()).collect();
        StepFunction(build(&gens))
    }

    /// `c · χ_[p]`.
    pub fn on_cylinder(p: &Bits, c: Dyadic) -> Self {
        StepFunction::indicator(&ClopenSet::cylinder(p.clone())).scale(&c)
    }

    /// Builds from the values on the `2^depth` cylinders in lexicographic
    /// order.
    pub fn from_table(depth: usize, values: &[Dyadic]) -> Self {
        assert_eq!(values.len(), 1usize << depth, "table size must be 2^depth");
        fn build(values: &[Dyadic]) -> Arc<Cell> {
            if values.len() == 1 {
                return Arc::new(Cell::Const(values[0].clone()));
            }
            let (a, b) = values.split_at(values.len() / 2);
            split(build(a), build(b))
        }
        StepFunction(build(values))
    }

    /// Values on the `2^depth` cylinders in lexicographic order.
    pub fn to_table(&self, depth: usize) -> Vec<Dyadic> {
        Bits::all_of_length(depth).map(|p| self.eval_prefix(&p)).collect()
    }

    /// Minimal depth at which the function is cylinder-wise constant.
    pub fn depth(&self) -> usize {
        fn go(c: &Cell) -> usize {
            match c {
                Cell::Const(_) => 0,
                Cell::Split(a, b) => 1 + go(a).max(go(b)),
            }
        }
        go(&self.0)
    }

    pub fn as_constant(&self) -> Option<&Dyadic> {
        match &*self.0 {
            Cell::Const(c) => Some(c),
            Cell::Split(..) => None,
        }
    }

    /// The maximal cells `(p, value)` in lexicographic order.
    pub fn cells(&self) -> Vec<(Bits, Dyadic)> {
        fn go(c: &Cell, path: &mut Vec<bool>, out: &mut Vec<(Bits, Dyadic)>) {
            match c {
                Cell::Const(v) => out.push((Bits::from_bools(path.clone()), v.clone())),
                Cell::Split(a, b) => {
                    path.push(false);
                    go(a, path, out);
                    path.pop();
                    path.push(true);
                    go(b, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(&self.0, &mut Vec::new(), &mut out);
        out
    }

    pub fn from_cells(cells: &[(Bits, Dyadic)]) -> Option<Self> {
        fn build(cells: &[(&[bool], &Dyadic)]) -> Option<Arc<Cell>> {
            match cells {
                [] => None,
                [(p, v)] if p.is_empty() => Some(Arc::new(Cell::Const((*v).clone()))),
                _ if cells.iter().any(|(p, _)| p.is_empty()) => None,
                _ => {
                    let zero: Vec<_> = cells.iter().filter(|c| !c.0[0]).map(|(p, v)| (&p[1..], *v)).collect();
                    let one: Vec<_> = cells.iter().filter(|c| c.0[0]).map(|(p, v)| (&p[1..], *v)).collect();
                    Some(split(build(&zero)?, build(&one)?))
                }
            }
        }
        let view: Vec<(&[bool], &Dyadic)> = cells.iter().map(|(p, v)| (p.as_slice(), v)).collect();
        build(&view).map(StepFunction)
    }

    /// Value at any point extending `p`; `p` must reach a constant cell.
    pub fn eval_prefix(&self, p: &Bits) -> Dyadic {
        let mut cur = &self.0;
        let mut bits = p.iter();
        loop {
            match &**cur {
                Cell::Const(v) => return v.clone(),
                Cell::Split(a, b) => {
                    let bit = bits.next().expect("prefix shorter than the step depth");
                    cur = if bit { b } else { a };
                }
            }
        }
    }

    pub fn eval(&self, x: &Point) -> Dyadic {
        let mut cur = &self.0;
        let mut pos = 0u128;
        loop {
            match &**cur {
                Cell::Const(v) => return v.clone(),
                Cell::Split(a, b) => {
                    cur = if x.bit(pos) { b } else { a };
                    pos += 1;
                }
            }
        }
    }

    pub fn map(&self, f: &impl Fn(&Dyadic) -> Dyadic) -> StepFunction {
        fn go(c: &Arc<Cell>, f: &impl Fn(&Dyadic) -> Dyadic) -> Arc<Cell> {
            match &**c {
                Cell::Const(v) => Arc::new(Cell::Const(f(v))),
                Cell::Split(a, b) => split(go(a, f), go(b, f)),
            }
        }
        StepFunction(go(&self.0, f))
    }

    pub fn zip_with(&self, other: &StepFunction, f: &impl Fn(&Dyadic, &Dyadic) -> Dyadic) -> StepFunction {
        fn go(x: &Arc<Cell>, y: &Arc<Cell>, f: &impl Fn(&Dyadic, &Dyadic) -> Dyadic) -> Arc<Cell> {
            match (&**x, &**y) {
                (Cell::Const(a), Cell::Const(b)) => Arc::new(Cell::Const(f(a, b))),
                _ => {
                    let (x0, x1) = halves(x);
                    let (y0, y1) = halves(y);
                    split(go(&x0, &y0, f), go(&x1, &y1, f))
                }
            }
        }
        StepFunction(go(&self.0, &other.0, f))
    }

    pub fn add(&self, other: &StepFunction) -> StepFunction {
        self.zip_with(other, &|a, b| a + b)
    }

    pub fn sub(&self, other: &StepFunction) -> StepFunction {
        self.zip_with(other, &|a, b| a - b)
    }

    pub fn max(&self, other: &StepFunction) -> StepFunction {
        self.zip_with(other, &|a, b| a.clone().max(b.clone()))
    }

    pub fn min(&self, other: &StepFunction) -> StepFunction {
        self.zip_with(other, &|a, b| a.clone().min(b.clone()))
    }

    pub fn abs(&self) -> StepFunction {
        self.map(&|a| a.abs())
    }

    pub fn scale(&self, c: &Dyadic) -> StepFunction {
        self.map(&|a| a * c)
    }

    /// `∫ f` over `2^ω` with the fair-coin measure.
    pub fn integral(&self) -> Dyadic {
        fn go(c: &Cell) -> Dyadic {
            match c {
                Cell::Const(v) => v.clone(),
                Cell::Split(a, b) => (go(a) + go(b)).mul_pow2(-1),
            }
        }
        go(&self.0)
    }

    /// `‖f − g‖₁`.
    pub fn l1_distance(&self, other: &StepFunction) -> Dyadic {
        self.zip_with(other, &|a, b| (a - b).abs()).integral()
    }

    /// `x ↦ f(p⌢x)`.
    pub fn restrict(&self, p: &Bits) -> StepFunction {
        let mut cur = self.0.clone();
        for bit in p.iter() {
            let (a, b) = halves(&cur);
            cur = if bit { b } else { a };
        }
        StepFunction(cur)
    }

    /// The conditional average `h_i`: on each `[p]` with `|p| = i` the value
    /// `2^i ∫_[p] f`.
    pub fn conditional_average(&self, i: usize) -> StepFunction {
        fn go(c: &Arc<Cell>, i: usize) -> Arc<Cell> {
            match &**c {
                Cell::Const(_) => c.clone(),
                Cell::Split(..) if i == 0 => Arc::new(Cell::Const(StepFunction(c.clone()).integral())),
                Cell::Split(a, b) => split(go(a, i - 1), go(b, i - 1)),
            }
        }
        StepFunction(go(&self.0, i))
    }

    /// The clopen set `{x : pred(f(x))}`.
    pub fn level_set(&self, pred: impl Fn(&Dyadic) -> bool) -> ClopenSet {
        ClopenSet::normalize(self.cells().into_iter().filter(|(_, v)| pred(v)).map(|(p, _)| p))
    }

    pub fn max_value(&self) -> Dyadic {
        self.cells().into_iter().map(|c| c.1).max().expect("at least one cell")
    }

    pub fn min_value(&self) -> Dyadic {
        self.cells().into_iter().map(|c| c.1).min().expect("at least one cell")
    }
}

impl From<Dyadic> for StepFunction {
    fn from(c: Dyadic) -> Self {
        StepFunction::constant(c)
    }
}

impl fmt::Debug for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_constant() {
            return write!(f, "const({c})");
        }
        f.write_str("step{")?;
        for (i, (p, v)) in self.cells().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}:{v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Serialize, Deserialize)]
struct StepJson {
    depth: usize,
    cells: Vec<(Bits, Dyadic)>,
}

/// Serialized as the depth plus the list of maximal cells, which is the
/// value table with equal sibling entries merged.
impl Serialize for StepFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StepJson { depth: self.depth(), cells: self.cells() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let j = StepJson::deserialize(deserializer)?;
        StepFunction::from_cells(&j.cells)
            .ok_or_else(|| serde::de::Error::custom("cells do not partition 2^ω"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: i64, e: u32) -> Dyadic {
        Dyadic::new(n, e)
    }

    fn chi(gens: &[&str]) -> StepFunction {
        StepFunction::indicator(&ClopenSet::normalize(gens.iter().map(|s| Bits::from(*s))))
    }

    #[test]
    fn norms() {
        let f = chi(&["0"]);
        assert_eq!(f.l1_distance(&f), Dyadic::zero());
        assert_eq!(chi(&["0"]).l1_distance(&chi(&["1"])), Dyadic::one());
        assert_eq!(chi(&[""]).l1_distance(&chi(&["0"])), d(1, 1));
    }

    #[test]
    fn integrals() {
        assert_eq!(chi(&[""]).integral(), Dyadic::one());
        assert_eq!(chi(&["0", "10"]).integral(), d(3, 2));
    }

    #[test]
    fn canonical_depth() {
        let f = StepFunction::from_table(2, &[d(1, 0), d(1, 0), d(1, 0), d(1, 0)]);
        assert_eq!(f.depth(), 0);
        assert_eq!(f, StepFunction::one());
        let g = StepFunction::from_table(2, &[d(1, 0), d(1, 0), d(0, 0), d(1, 1)]);
        assert_eq!(g.depth(), 2);
        assert_eq!(g.to_table(2), vec![d(1, 0), d(1, 0), d(0, 0), d(1, 1)]);
        assert_eq!(g.cells().len(), 3);
    }

    #[test]
    fn conditional_average_examples() {
        let f = chi(&["00"]);
        assert_eq!(f.conditional_average(0), StepFunction::constant(d(1, 2)));
        assert_eq!(f.conditional_average(1), chi(&["0"]).scale(&d(1, 1)));
        assert_eq!(f.conditional_average(2), f);
        assert_eq!(f.conditional_average(7), f);
    }

    #[test]
    fn restriction_and_level_sets() {
        let f = chi(&["01", "1"]);
        assert_eq!(f.restrict(&"0".into()), chi(&["1"]));
        assert_eq!(f.restrict(&"11".into()), StepFunction::one());
        let half = f.scale(&d(1, 1)).add(&chi(&["1"]).scale(&d(1, 2)));
        assert_eq!(half.level_set(|v| v.cmp_ratio(2, 3).is_gt()), ClopenSet::cylinder("1".into()));
    }

    #[test]
    fn point_evaluation() {
        let f = chi(&["010"]);
        assert_eq!(f.eval(&"u=:v=01".parse().unwrap()), Dyadic::one());
        assert_eq!(f.eval(&Point::constant(false)), Dyadic::zero());
    }

    #[test]
    fn json_roundtrip() {
        let f = StepFunction::from_table(2, &[d(1, 0), d(3, 2), d(0, 0), d(0, 0)]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<StepFunction>(&s).unwrap(), f);
    }

    fn arb_step(depth: usize) -> impl Strategy<Value = StepFunction> {
        prop::collection::vec(-8i64..8, 1usize << depth)
            .prop_map(move |v| {
                let vals: Vec<Dyadic> = v.into_iter().map(|n| Dyadic::new(n, 2)).collect();
                StepFunction::from_table(depth, &vals)
            })
    }

    proptest! {
        #[test]
        fn triangle_inequality(f in arb_step(3), g in arb_step(3), h in arb_step(2)) {
            prop_assert!(f.l1_distance(&h) <= f.l1_distance(&g) + g.l1_distance(&h));
            prop_assert_eq!(f.l1_distance(&g), g.l1_distance(&f));
        }

        #[test]
        fn table_oracle(f in arb_step(3), g in arb_step(3)) {
            let tf = f.to_table(3);
            let tg = g.to_table(3);
            let sum: Dyadic = tf.iter().zip(&tg).map(|(a, b)| (a - b).abs()).sum();
            prop_assert_eq!(f.l1_distance(&g), sum.mul_pow2(-3));
            let avg: Dyadic = tf.iter().sum::<Dyadic>().mul_pow2(-3);
            prop_assert_eq!(f.integral(), avg);
            let h1 = f.conditional_average(1).to_table(3);
            let left: Dyadic = tf[..4].iter().sum::<Dyadic>().mul_pow2(-2);
            prop_assert_eq!(&h1[0], &left);
        }
    }
}
