use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::BorelError;

/// An ordinal below `ω^ω` in Cantor normal form.
///
/// Terms are `(exponent, coefficient)` with strictly decreasing exponents and
/// positive coefficients; the empty form is `0`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<(u32, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::finite(1)
    }

    pub fn finite(n: u64) -> Self {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal { terms: vec![(0, n)] }
        }
    }

    pub fn omega() -> Self {
        Ordinal { terms: vec![(1, 1)] }
    }

    /// `ω^e · c`.
    pub fn omega_power(e: u32, c: u64) -> Self {
        if c == 0 {
            Ordinal::zero()
        } else {
            Ordinal { terms: vec![(e, c)] }
        }
    }

    /// Builds from arbitrary terms, sorting and merging into normal form.
    pub fn from_terms(terms: &[(u32, u64)]) -> Self {
        let mut acc = Ordinal::zero();
        let mut sorted: Vec<(u32, u64)> = terms.iter().copied().filter(|t| t.1 > 0).collect();
        sorted.sort_by(|a, b| b.0.cmp(&a.0));
        for (e, c) in sorted {
            acc = acc.add(&Ordinal::omega_power(e, c));
        }
        acc
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.terms.last(), Some((e, _)) if *e > 0)
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(0, n)] => Some(*n),
            _ => None,
        }
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.terms.first().map(|t| t.0)
    }

    pub fn succ(&self) -> Self {
        self.add(&Ordinal::one())
    }

    /// The predecessor of a successor ordinal.
    pub fn predecessor(&self) -> Option<Self> {
        let mut terms = self.terms.clone();
        match terms.last_mut() {
            Some((0, c)) => {
                *c -= 1;
                if *c == 0 {
                    terms.pop();
                }
                Some(Ordinal { terms })
            }
            _ => None,
        }
    }

    /// The `n`-th element of the standard fundamental sequence of a limit:
    /// `(β + ω^{e+1})[n] = β + ω^e · n`.
    pub fn fundamental(&self, n: u64) -> Option<Self> {
        if !self.is_limit() {
            return None;
        }
        let mut terms = self.terms.clone();
        let (e, c) = terms.pop().unwrap();
        if c > 1 {
            terms.push((e, c - 1));
        }
        Some(Ordinal { terms }.add(&Ordinal::omega_power(e - 1, n)))
    }

    /// A canonical ordinal strictly below `self` and at least 1, when one
    /// exists: the predecessor, or `self[1]` at limits.
    pub fn step_down(&self) -> Option<Self> {
        let below = if self.is_limit() { self.fundamental(1) } else { self.predecessor() };
        below.filter(|b| !b.is_zero())
    }

    /// Ordinal addition; absorbs terms of `self` below the leading term of `rhs`.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(&(e, c)) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(u32, u64)> = self.terms.iter().copied().filter(|t| t.0 >= e).collect();
        match terms.last_mut() {
            Some(last) if last.0 == e => last.1 += c,
            _ => terms.push((e, c)),
        }
        terms.extend_from_slice(&rhs.terms[1..]);
        Ordinal { terms }
    }

    /// All ordinals `b` with `1 ≤ b ≤ self`, exponents at most the leading
    /// exponent of `self` and every coefficient at most `max_coef`, ascending.
    pub fn enumerate_up_to(&self, max_coef: u64) -> Vec<Ordinal> {
        let top = self.leading_exponent().unwrap_or(0);
        let mut out = Vec::new();
        let mut digits = vec![0u64; top as usize + 1];
        loop {
            let terms: Vec<(u32, u64)> = (0..=top)
                .rev()
                .map(|e| (e, digits[e as usize]))
                .filter(|t| t.1 > 0)
                .collect();
            let b = Ordinal { terms };
            if !b.is_zero() && b <= *self {
                out.push(b);
            }
            let mut i = 0;
            loop {
                if i == digits.len() {
                    out.sort();
                    return out;
                }
                if digits[i] < max_coef {
                    digits[i] += 1;
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

/// Prints like `w^2*3+w+1`; zero prints as `0`.
impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, &(e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match (e, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => f.write_str("w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts sums of `n`, `w`, `w*c`, `w^e`, `w^e*c`; `ω` may replace `w`.
/// Terms must already be in normal form order.
impl FromStr for Ordinal {
    type Err = BorelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BorelError::BadOrdinal(s.to_string());
        let norm = s.replace('ω', "w").replace(' ', "");
        if norm.is_empty() {
            return Err(bad());
        }
        let mut terms: Vec<(u32, u64)> = Vec::new();
        for part in norm.split('+') {
            let (base, coef) = match part.split_once('*') {
                Some((b, c)) => (b, c.parse::<u64>().map_err(|_| bad())?),
                None => (part, 1),
            };
            let exp = if let Some(rest) = base.strip_prefix('w') {
                match rest.strip_prefix('^') {
                    Some(e) => e.parse::<u32>().map_err(|_| bad())?,
                    None if rest.is_empty() => 1,
                    None => return Err(bad()),
                }
            } else {
                if part.contains('*') {
                    return Err(bad());
                }
                let n = base.parse::<u64>().map_err(|_| bad())?;
                if n == 0 && norm == "0" {
                    return Ok(Ordinal::zero());
                }
                terms.push((0, n));
                continue;
            };
            terms.push((exp, coef));
        }
        let strictly_decreasing = terms.windows(2).all(|w| w[0].0 > w[1].0);
        if !strictly_decreasing || terms.iter().any(|t| t.1 == 0) {
            return Err(bad());
        }
        Ok(Ordinal { terms })
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}
