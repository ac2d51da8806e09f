use alloc::vec;
use alloc::vec::Vec;

use super::fragment::{Element, ModelFragment};
use crate::error::ModelError;

/// A finite set of stored elements over which quantifiers range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    elems: Vec<Element>,
    mask: Vec<bool>,
}

impl Window {
    pub fn full(m: &ModelFragment) -> Self {
        Window { elems: m.elements().collect(), mask: vec![true; m.len()] }
    }

    pub fn from_elements(m: &ModelFragment, it: impl IntoIterator<Item = Element>) -> Result<Self, ModelError> {
        let mut mask = vec![false; m.len()];
        for e in it {
            let id = m.id(e).ok_or(ModelError::UnknownElement { chain: e.chain, pos: e.pos })?;
            mask[id] = true;
        }
        let elems = (0..mask.len()).filter(|&i| mask[i]).filter_map(|i| m.element(i)).collect();
        Ok(Window { elems, mask })
    }

    /// Every stored element whose `margin`-neighbourhood is stored.
    pub fn interior(m: &ModelFragment, margin: u64) -> Self {
        Self::from_elements(m, m.elements().filter(|e| m.is_interior(*e, margin))).expect("stored elements")
    }

    pub fn contains(&self, m: &ModelFragment, e: Element) -> bool {
        m.id(e).is_some_and(|i| self.mask[i])
    }

    /// True when the `k`-neighbourhood of `e` lies inside the window.
    pub fn is_deep(&self, m: &ModelFragment, e: Element, k: u64) -> bool {
        let k = k as i64;
        (-k..=k).all(|d| self.contains(m, e.offset(d)))
    }

    pub fn elements(&self) -> &[Element] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn union(&self, m: &ModelFragment, other: &Window) -> Window {
        Self::from_elements(m, self.elems.iter().chain(other.elems.iter()).copied()).expect("stored elements")
    }
}
