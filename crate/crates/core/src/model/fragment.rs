use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::ModelError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainInterval {
    pub id: String,
    pub lo: i64,
    pub hi: i64,
    pub labels: Vec<bool>,
}

impl ChainInterval {
    pub fn new(id: &str, lo: i64, labels: Vec<bool>) -> Self {
        let hi = lo + labels.len() as i64 - 1;
        ChainInterval { id: id.to_string(), lo, hi, labels }
    }

    /// Parses a `0`/`1` string.
    pub fn from_bits(id: &str, lo: i64, bits: &str) -> Result<Self, ModelError> {
        let labels = parse_bits(bits).ok_or_else(|| ModelError::MalformedLabels {
            chain: id.to_string(),
            expected: bits.len(),
            found: 0,
        })?;
        Ok(Self::new(id, lo, labels))
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, pos: i64) -> bool {
        self.lo <= pos && pos <= self.hi
    }

    pub fn label(&self, pos: i64) -> Option<bool> {
        self.contains(pos).then(|| self.labels[(pos - self.lo) as usize])
    }
}

pub fn parse_bits(bits: &str) -> Option<Vec<bool>> {
    bits.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

/// An element: a chain index and a position. Positions outside the stored
/// interval are allowed as values (distances stay exact); only their labels
/// are unavailable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Element {
    pub chain: usize,
    pub pos: i64,
}

impl Element {
    pub fn new(chain: usize, pos: i64) -> Self {
        Element { chain, pos }
    }

    pub fn offset(self, k: i64) -> Self {
        Element { chain: self.chain, pos: self.pos + k }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chain, self.pos)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SignedDistance {
    Finite(i64),
    Infinite,
}

impl SignedDistance {
    pub fn between(a: Element, b: Element) -> Self {
        if a.chain == b.chain {
            SignedDistance::Finite(b.pos - a.pos)
        } else {
            SignedDistance::Infinite
        }
    }

    /// `Some(k)` when finite with `|k| <= r`.
    pub fn within(self, r: u64) -> Option<i64> {
        match self {
            SignedDistance::Finite(k) if k.unsigned_abs() <= r => Some(k),
            _ => None,
        }
    }

    pub fn negate(self) -> Self {
        match self {
            SignedDistance::Finite(k) => SignedDistance::Finite(-k),
            SignedDistance::Infinite => SignedDistance::Infinite,
        }
    }
}

impl fmt::Display for SignedDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignedDistance::Finite(k) => write!(f, "{k}"),
            SignedDistance::Infinite => f.write_str("inf"),
        }
    }
}

/// A finite union of labelled chain intervals, one of which carries zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelFragment {
    chains: Vec<ChainInterval>,
    zero: Element,
    offsets: Vec<usize>,
}

impl ModelFragment {
    pub fn new(chains: Vec<ChainInterval>, zero_chain: &str, zero_pos: i64) -> Result<Self, ModelError> {
        for (i, c) in chains.iter().enumerate() {
            if c.lo > c.hi {
                return Err(ModelError::BadInterval { chain: c.id.clone(), lo: c.lo, hi: c.hi });
            }
            let expected = (c.hi - c.lo + 1) as usize;
            if c.labels.len() != expected {
                return Err(ModelError::MalformedLabels { chain: c.id.clone(), expected, found: c.labels.len() });
            }
            if chains[..i].iter().any(|d| d.id == c.id) {
                return Err(ModelError::DuplicateChain(c.id.clone()));
            }
        }
        let chain = chains
            .iter()
            .position(|c| c.id == zero_chain)
            .ok_or_else(|| ModelError::UnknownChain(zero_chain.to_string()))?;
        if !chains[chain].contains(zero_pos) {
            return Err(ModelError::UnknownElement { chain, pos: zero_pos });
        }
        let mut offsets = Vec::with_capacity(chains.len() + 1);
        let mut acc = 0;
        for c in &chains {
            offsets.push(acc);
            acc += c.len();
        }
        offsets.push(acc);
        Ok(ModelFragment { chains, zero: Element::new(chain, zero_pos), offsets })
    }

    pub fn chains(&self) -> &[ChainInterval] {
        &self.chains
    }

    pub fn chain(&self, i: usize) -> &ChainInterval {
        &self.chains[i]
    }

    pub fn chain_index(&self, id: &str) -> Option<usize> {
        self.chains.iter().position(|c| c.id == id)
    }

    pub fn zero(&self) -> Element {
        self.zero
    }

    /// Number of stored elements.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, e: Element) -> bool {
        self.chains.get(e.chain).is_some_and(|c| c.contains(e.pos))
    }

    pub fn check(&self, e: Element) -> Result<(), ModelError> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(ModelError::UnknownElement { chain: e.chain, pos: e.pos })
        }
    }

    pub fn label(&self, e: Element) -> Result<bool, ModelError> {
        self.chains
            .get(e.chain)
            .and_then(|c| c.label(e.pos))
            .ok_or(ModelError::InteriorViolation { chain: e.chain, pos: e.pos })
    }

    /// Dense index of a stored element.
    pub fn id(&self, e: Element) -> Option<usize> {
        let c = self.chains.get(e.chain)?;
        c.contains(e.pos).then(|| self.offsets[e.chain] + (e.pos - c.lo) as usize)
    }

    pub fn element(&self, id: usize) -> Option<Element> {
        if id >= self.len() {
            return None;
        }
        let chain = self.offsets.partition_point(|&o| o <= id) - 1;
        Some(Element::new(chain, self.chains[chain].lo + (id - self.offsets[chain]) as i64))
    }

    /// All stored elements in (chain, position) order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.chains.iter().enumerate().flat_map(|(i, c)| (c.lo..=c.hi).map(move |p| Element::new(i, p)))
    }

    pub fn signed_distance(&self, a: Element, b: Element) -> Result<SignedDistance, ModelError> {
        self.check(a)?;
        self.check(b)?;
        Ok(SignedDistance::between(a, b))
    }

    /// True when `[a - k, a + k]` lies inside `a`'s stored interval.
    pub fn is_interior(&self, a: Element, k: u64) -> bool {
        let k = k as i64;
        self.chains.get(a.chain).is_some_and(|c| c.lo <= a.pos - k && a.pos + k <= c.hi)
    }

    /// The `k`-neighbourhood of `a` in position order.
    pub fn neighborhood(&self, a: Element, k: u64) -> Result<Vec<Element>, ModelError> {
        self.check(a)?;
        let k = k as i64;
        if !self.is_interior(a, k as u64) {
            let c = &self.chains[a.chain];
            let bad = if a.pos - k < c.lo { a.pos - k } else { a.pos + k };
            return Err(ModelError::InteriorViolation { chain: a.chain, pos: bad });
        }
        Ok((-k..=k).map(|d| a.offset(d)).collect())
    }

    /// Labels of `a - r .. a + r`.
    pub fn nbhd_type(&self, a: Element, r: u64) -> Result<Vec<bool>, ModelError> {
        let r = r as i64;
        (-r..=r).map(|d| self.label(a.offset(d))).collect()
    }

    /// Bits `⟦A(0)⟧ .. ⟦A(n)⟧` read from the zero chain.
    pub fn extract_path(&self, n: usize) -> Result<Vec<bool>, ModelError> {
        (0..=n as i64).map(|i| self.label(self.zero.offset(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_chain() -> ModelFragment {
        let c = ChainInterval::from_bits("a", -4, "101010101").unwrap();
        ModelFragment::new(alloc::vec![c], "a", 0).unwrap()
    }

    #[test]
    fn builds_and_indexes() {
        let m = one_chain();
        assert_eq!(m.len(), 9);
        for (i, e) in m.elements().enumerate() {
            assert_eq!(m.id(e), Some(i));
            assert_eq!(m.element(i), Some(e));
        }
        let bad = ChainInterval { id: "b".into(), lo: 0, hi: 3, labels: alloc::vec![true] };
        assert!(matches!(
            ModelFragment::new(alloc::vec![bad], "b", 0),
            Err(ModelError::MalformedLabels { expected: 4, found: 1, .. })
        ));
    }

    #[test]
    fn distances() {
        let a = ChainInterval::from_bits("a", -4, "101010101").unwrap();
        let b = ChainInterval::from_bits("b", 0, "11").unwrap();
        let m = ModelFragment::new(alloc::vec![a, b], "a", 0).unwrap();
        let x = Element::new(0, -1);
        assert_eq!(m.signed_distance(x, x).unwrap(), SignedDistance::Finite(0));
        assert_eq!(m.signed_distance(x, x.offset(3)).unwrap(), SignedDistance::Finite(3));
        assert_eq!(m.signed_distance(x.offset(3), x).unwrap(), SignedDistance::Finite(-3));
        assert_eq!(m.signed_distance(x, Element::new(1, 0)).unwrap(), SignedDistance::Infinite);
        assert!(m.signed_distance(x, Element::new(1, 7)).is_err());
    }

    #[test]
    fn neighborhoods() {
        let m = one_chain();
        let z = m.zero();
        assert_eq!(m.neighborhood(z, 0).unwrap(), alloc::vec![z]);
        let n: Vec<i64> = m.neighborhood(z, 2).unwrap().iter().map(|e| e.pos).collect();
        assert_eq!(n, alloc::vec![-2, -1, 0, 1, 2]);
        assert_eq!(m.neighborhood(Element::new(0, 4), 2), Err(ModelError::InteriorViolation { chain: 0, pos: 6 }));
    }

    #[test]
    fn extracts_path() {
        let m = one_chain();
        assert_eq!(bits_to_string(&m.extract_path(2).unwrap()), "101");
        assert_eq!(m.extract_path(0).unwrap().len(), 1);
        assert!(m.extract_path(5).is_err());
    }
}
