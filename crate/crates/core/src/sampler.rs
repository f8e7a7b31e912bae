//! Monte Carlo estimates over the columns `R^[j]` of a sampling point, and
//! exact conditional averages for comparison.
//!
//! Accumulation is exact; only the final division rounds, to 64 fractional
//! bits.

use serde::Serialize;
use thiserror::Error;

use crate::borel::{Address, BorelCode};
use crate::cantor::{cantor_pair, Bits, Point};
use crate::dyadic::Dyadic;
use crate::exec::Exec;
use crate::l1::{L1Error, L1Name, PointEvaluator, PointValue, StepFunction};

/// Default precision `ℓ` for reading names at points.
pub const DEFAULT_PRECISION: usize = 20;

/// Fractional bits kept by the final division.
const QUOTIENT_BITS: u32 = 64;

/// Samples per parallel work unit.
const CHUNK: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("{captured} of {trials} samples fell in bad sets (more than 1%)")]
    TooManyCaptured { captured: u64, trials: u64 },
    #[error("the number of trials must be positive")]
    NoTrials,
    #[error("no subtree at {0}")]
    NoSuchAddress(Address),
    #[error(transparent)]
    L1(#[from] L1Error),
}

/// A function sampled at points.
#[derive(Clone, Debug)]
pub enum Integrand {
    Step(StepFunction),
    /// A name read to `2^{-precision}` outside the bad sets above
    /// `precision`.
    Name { evaluator: PointEvaluator, precision: usize, depth: usize },
    /// Membership in a finite code.
    Code(BorelCode),
}

impl Integrand {
    pub fn step(f: StepFunction) -> Self {
        Integrand::Step(f)
    }

    pub fn name(name: &L1Name, precision: usize) -> Result<Self, SampleError> {
        let evaluator = PointEvaluator::new(name, precision);
        let m = 2 * precision + 1;
        let term = name.term(m).ok_or(L1Error::NotMaterialized { index: m })?;
        let depth = term.depth().max(evaluator.captured_set().max_len());
        Ok(Integrand::Name { evaluator, precision, depth })
    }

    pub fn code(c: &BorelCode) -> Self {
        Integrand::Code(c.clone())
    }

    /// Bits of the argument the value can depend on.
    pub fn depth(&self) -> usize {
        match self {
            Integrand::Step(f) => f.depth(),
            Integrand::Name { depth, .. } => *depth,
            Integrand::Code(c) => c.support_depth(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Integrand::Step(f) => format!("step function of depth {}", f.depth()),
            Integrand::Name { precision, .. } => format!("name read at precision {precision}"),
            Integrand::Code(c) => format!("membership in a code with {} nodes", c.node_count()),
        }
    }

    /// `None` when the point is captured by a bad set.
    pub fn eval(&self, x: &Point) -> Result<Option<Dyadic>, SampleError> {
        Ok(match self {
            Integrand::Step(f) => Some(f.eval(x)),
            Integrand::Name { evaluator, precision, .. } => match evaluator.value(x, *precision)? {
                PointValue::Value(v) => Some(v),
                PointValue::Captured { .. } => None,
            },
            Integrand::Code(c) => Some(if c.contains(x) { Dyadic::one() } else { Dyadic::zero() }),
        })
    }
}

/// A reproducible average: `(seed, trials, target)` determine `value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Estimate {
    pub value: Dyadic,
    pub trials: u64,
    pub seed: Option<u64>,
    pub target: String,
    pub captured: u64,
}

impl Estimate {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

#[derive(Default)]
struct Tally {
    sum: Dyadic,
    used: u64,
    captured: u64,
}

impl Tally {
    fn push(&mut self, v: Option<Dyadic>) {
        match v {
            Some(v) => {
                self.sum = std::mem::take(&mut self.sum) + v;
                self.used += 1;
            }
            None => self.captured += 1,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.sum = self.sum + other.sum;
        self.used += other.used;
        self.captured += other.captured;
        self
    }

    fn finish(self, trials: u64, seed: Option<u64>, target: String) -> Result<Estimate, SampleError> {
        if self.captured * 100 > trials {
            return Err(SampleError::TooManyCaptured { captured: self.captured, trials });
        }
        let value = if self.used == 0 { Dyadic::zero() } else { self.sum.div_round(self.used, QUOTIENT_BITS) };
        Ok(Estimate { value, trials, seed, target, captured: self.captured })
    }
}

fn tally(
    exec: Exec,
    n: u64,
    sample: impl Fn(u64) -> Result<Option<Dyadic>, SampleError> + Sync + Send,
) -> Result<Tally, SampleError> {
    let fold = |r: std::ops::Range<usize>| -> Result<Tally, SampleError> {
        let mut t = Tally::default();
        for j in r {
            t.push(sample(j as u64)?);
        }
        Ok(t)
    };
    let merged = exec.chunked(0..n as usize, CHUNK, fold, |a, b| Ok(a?.merge(b?)));
    merged.unwrap_or_else(|| Ok(Tally::default()))
}

/// `(1/N) Σ_{j<N} f(R^[j])`.
pub fn mc_integral(f: &Integrand, r: &Point, n: u64) -> Result<Estimate, SampleError> {
    mc_integral_with(f, r, n, Exec::default())
}

pub fn mc_integral_with(f: &Integrand, r: &Point, n: u64, exec: Exec) -> Result<Estimate, SampleError> {
    if n == 0 {
        return Err(SampleError::NoTrials);
    }
    let depth = f.depth();
    let t = tally(exec, n, |j| f.eval(&r.column(j as u128).memoize(depth)))?;
    t.finish(n, r.seed(), f.describe())
}

/// `h_i = Σ_{p ∈ 2^i} (2^i ∫_[p] f) χ_[p]`, exactly.
pub fn conditional_average(f: &StepFunction, i: usize) -> StepFunction {
    f.conditional_average(i)
}

/// The depth-`i` step function whose value on `[p]` is the column average
/// of `x ↦ f(p⌢x)`. Each column prefix is read once and shared by all `p`.
pub fn sampled_average(f: &Integrand, i: usize, r: &Point, n: u64) -> Result<StepFunction, SampleError> {
    sampled_average_with(f, i, r, n, Exec::default())
}

pub fn sampled_average_with(
    f: &Integrand,
    i: usize,
    r: &Point,
    n: u64,
    exec: Exec,
) -> Result<StepFunction, SampleError> {
    if n == 0 {
        return Err(SampleError::NoTrials);
    }
    let cells: Vec<Bits> = Bits::all_of_length(i).collect();
    let tail = f.depth().saturating_sub(i);
    let fold = |range: std::ops::Range<usize>| -> Result<Vec<Tally>, SampleError> {
        let mut ts: Vec<Tally> = cells.iter().map(|_| Tally::default()).collect();
        for j in range {
            let col = r.column(j as u128).memoize(tail);
            for (p, t) in cells.iter().zip(ts.iter_mut()) {
                t.push(f.eval(&col.tail_append(p))?);
            }
        }
        Ok(ts)
    };
    let merge = |a: Result<Vec<Tally>, SampleError>, b: Result<Vec<Tally>, SampleError>| {
        Ok(a?.into_iter().zip(b?).map(|(x, y)| x.merge(y)).collect())
    };
    let tallies = exec.chunked(0..n as usize, CHUNK, fold, merge).expect("n > 0")?;
    let mut values = Vec::with_capacity(cells.len());
    for t in tallies {
        values.push(t.finish(n, r.seed(), String::new())?.value);
    }
    Ok(StepFunction::from_table(i, &values))
}

/// Breadth-first position of `addr` in `c`.
pub fn bfs_index(c: &BorelCode, addr: &Address) -> Option<usize> {
    c.addresses().iter().position(|a| a == addr)
}

/// The frequency over `j < N` of `p⌢R^[⟨σ̂, j⟩] ∈ |T_σ|`, where `σ̂` is the
/// breadth-first index of `σ`. It estimates `2^{|p|}·μ(|T_σ| ∩ [p])`.
pub fn membership_frequency(
    c: &BorelCode,
    sigma: &Address,
    p: &Bits,
    r: &Point,
    n: u64,
) -> Result<Estimate, SampleError> {
    membership_frequency_with(c, sigma, p, r, n, Exec::default())
}

pub fn membership_frequency_with(
    c: &BorelCode,
    sigma: &Address,
    p: &Bits,
    r: &Point,
    n: u64,
    exec: Exec,
) -> Result<Estimate, SampleError> {
    if n == 0 {
        return Err(SampleError::NoTrials);
    }
    let sub = c.subtree(sigma).ok_or_else(|| SampleError::NoSuchAddress(sigma.clone()))?;
    let k = bfs_index(c, sigma).expect("subtree exists") as u128;
    let tail = sub.support_depth().saturating_sub(p.len());
    let t = tally(exec, n, |j| {
        let col = r.column(cantor_pair(k, j as u128)).memoize(tail);
        Ok(Some(if sub.contains(&col.tail_append(p)) { Dyadic::one() } else { Dyadic::zero() }))
    })?;
    t.finish(n, r.seed(), format!("membership at {sigma} under {p}"))
}
