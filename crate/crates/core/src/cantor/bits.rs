use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CantorError;

/// A finite binary string. The empty string is λ.
///
/// Ordering is lexicographic with a proper prefix sorting first.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn empty() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Bits(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Bits(vec![true; n])
    }

    /// The string `0^n 1` naming the cone used to relocate codes.
    pub fn zeros_then_one(n: usize) -> Self {
        let mut v = vec![false; n];
        v.push(true);
        Bits(v)
    }

    /// The `len`-bit big-endian encoding of `index`.
    pub fn from_index(index: u64, len: usize) -> Self {
        Bits((0..len).map(|i| (index >> (len - 1 - i)) & 1 == 1).collect())
    }

    /// All strings of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = Bits> {
        assert!(len < 64, "prefix enumeration depth too large");
        (0..(1u64 << len)).map(move |i| Bits::from_index(i, len))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn with(&self, b: bool) -> Bits {
        let mut v = self.0.clone();
        v.push(b);
        Bits(v)
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Bits(v)
    }

    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        other.0.starts_with(&self.0)
    }

    /// The string with the first `n` bits removed.
    pub fn drop_prefix(&self, n: usize) -> Bits {
        Bits(self.0[n.min(self.len())..].to_vec())
    }

    pub fn truncate(&self, n: usize) -> Bits {
        Bits(self.0[..n.min(self.len())].to_vec())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("λ")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

impl FromStr for Bits {
    type Err = CantorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(CantorError::BadBits(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

impl From<&str> for Bits {
    /// Panics on characters other than `0` and `1`; intended for literals.
    fn from(s: &str) -> Self {
        s.parse().expect("bit string literal")
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_lexicographic() {
        let mut v: Vec<Bits> = ["1", "01", "0", "", "00"].iter().map(|s| Bits::from(*s)).collect();
        v.sort();
        let s: Vec<String> = v.iter().map(|b| b.to_string()).collect();
        assert_eq!(s, ["", "0", "00", "01", "1"]);
    }

    #[test]
    fn index_encoding() {
        assert_eq!(Bits::from_index(5, 4).to_string(), "0101");
        assert_eq!(Bits::all_of_length(2).count(), 4);
        assert_eq!(Bits::zeros_then_one(3).to_string(), "0001");
    }

    #[test]
    fn rejects_non_binary() {
        assert!("012".parse::<Bits>().is_err());
        assert_eq!("".parse::<Bits>().unwrap(), Bits::empty());
    }
}
