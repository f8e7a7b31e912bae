use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Bits, CantorError};

/// An infinite bit stream `X ∈ 2^ω` with total, deterministic bit access.
///
/// Two base realizations exist: eventually periodic streams `u v v v …` and
/// seeded pseudo-random streams. Columns and prefixed tails are lazy views
/// over another point. Cloning is cheap.
#[derive(Clone)]
pub struct Point(Arc<Realization>);

#[derive(Debug)]
enum Realization {
    Periodic { head: Bits, cycle: Bits },
    Seeded { seed: u64 },
    Column { base: Point, k: u128 },
    Prefixed { head: Bits, tail: Point },
    Memo { bits: Bits, rest: Point },
}

/// The Cantor pairing `⟨k, n⟩ = (k + n)(k + n + 1)/2 + n`.
pub fn cantor_pair(k: u128, n: u128) -> u128 {
    let s = k.checked_add(n).expect("pairing overflow");
    s.checked_mul(s + 1).expect("pairing overflow") / 2 + n
}

impl Point {
    /// The eventually periodic point `u v v v …`; `v` must be nonempty.
    pub fn periodic(u: Bits, v: Bits) -> Result<Self, CantorError> {
        if v.is_empty() {
            return Err(CantorError::EmptyPeriod);
        }
        Ok(Point(Arc::new(Realization::Periodic { head: u, cycle: v })))
    }

    pub fn constant(bit: bool) -> Self {
        let v = if bit { Bits::ones(1) } else { Bits::zeros(1) };
        Point::periodic(Bits::empty(), v).unwrap()
    }

    pub fn seeded(seed: u64) -> Self {
        Point(Arc::new(Realization::Seeded { seed }))
    }

    /// Bit `pos` of the stream.
    pub fn bit(&self, pos: u128) -> bool {
        match &*self.0 {
            Realization::Periodic { head, cycle } => {
                let h = head.len() as u128;
                if pos < h {
                    head.as_slice()[pos as usize]
                } else {
                    cycle.as_slice()[((pos - h) % cycle.len() as u128) as usize]
                }
            }
            Realization::Seeded { seed } => seeded_bit(*seed, pos),
            Realization::Column { base, k } => base.bit(cantor_pair(*k, pos)),
            Realization::Prefixed { head, tail } => {
                let h = head.len() as u128;
                if pos < h {
                    head.as_slice()[pos as usize]
                } else {
                    tail.bit(pos - h)
                }
            }
            Realization::Memo { bits, rest } => {
                if pos < bits.len() as u128 {
                    bits.as_slice()[pos as usize]
                } else {
                    rest.bit(pos)
                }
            }
        }
    }

    pub fn prefix(&self, len: usize) -> Bits {
        Bits::from_bools((0..len as u128).map(|i| self.bit(i)).collect())
    }

    /// The `k`-th column `R^[k]`, with `R^[k](n) = R(⟨k, n⟩)`.
    pub fn column(&self, k: u128) -> Point {
        Point(Arc::new(Realization::Column { base: self.clone(), k }))
    }

    /// The point `p⌢X`.
    pub fn tail_append(&self, p: &Bits) -> Point {
        if p.is_empty() {
            return self.clone();
        }
        Point(Arc::new(Realization::Prefixed { head: p.clone(), tail: self.clone() }))
    }

    /// Same stream with the first `len` bits cached.
    pub fn memoize(&self, len: usize) -> Point {
        Point(Arc::new(Realization::Memo { bits: self.prefix(len), rest: self.clone() }))
    }

    /// The seed when this point is a seeded stream or a view over one.
    pub fn seed(&self) -> Option<u64> {
        match &*self.0 {
            Realization::Seeded { seed } => Some(*seed),
            Realization::Periodic { .. } => None,
            Realization::Column { base, .. } => base.seed(),
            Realization::Prefixed { tail, .. } => tail.seed(),
            Realization::Memo { rest, .. } => rest.seed(),
        }
    }

    /// `(u, v)` for eventually periodic points.
    pub fn as_periodic(&self) -> Option<(&Bits, &Bits)> {
        match &*self.0 {
            Realization::Periodic { head, cycle } => Some((head, cycle)),
            _ => None,
        }
    }
}

/// Bit `pos` of the ChaCha8 keystream for `seed`; a pure function of its
/// arguments. Positions beyond one 2^64-word stream spill into later streams.
fn seeded_bit(seed: u64, pos: u128) -> bool {
    let word = pos / 32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((word >> 64) as u64);
    rng.set_word_pos(word & u128::from(u64::MAX));
    (rng.next_u32() >> (pos % 32)) & 1 == 1
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Realization::Periodic { head, cycle } => write!(f, "u={head}:v={cycle}"),
            Realization::Seeded { seed } => write!(f, "seed={seed}"),
            Realization::Column { base, k } => write!(f, "column({base},{k})"),
            Realization::Prefixed { head, tail } => write!(f, "{head}^({tail})"),
            Realization::Memo { rest, .. } => write!(f, "{rest}"),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({self})")
    }
}

/// Parses `u=<bits>:v=<bits>` or `seed=<int>`.
impl FromStr for Point {
    type Err = CantorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CantorError::BadPoint(s.to_string());
        if let Some(seed) = s.strip_prefix("seed=") {
            return seed.trim().parse().map(Point::seeded).map_err(|_| bad());
        }
        let (u, v) = s.split_once(':').ok_or_else(bad)?;
        let u = u.trim().strip_prefix("u=").ok_or_else(bad)?;
        let v = v.trim().strip_prefix("v=").ok_or_else(bad)?;
        Point::periodic(u.parse()?, v.parse()?)
    }
}
