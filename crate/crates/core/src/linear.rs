//! Finite linear combinations with exact rational coefficients.

use crate::rational::Rat;
use num::Zero;
use std::collections::BTreeMap;

/// A map from (canonical) basis elements to non-zero rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinComb<K: Ord> {
    terms: BTreeMap<K, Rat>,
}

impl<K: Ord> Default for LinComb<K> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> LinComb<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(k: K, c: Rat) -> Self {
        let mut out = Self::new();
        out.add(k, c);
        out
    }

    pub fn add(&mut self, k: K, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_all(&mut self, other: &LinComb<K>) {
        for (k, c) in other.iter() {
            self.add(k.clone(), c.clone());
        }
    }

    pub fn sub_all(&mut self, other: &LinComb<K>) {
        for (k, c) in other.iter() {
            self.add(k.clone(), -c.clone());
        }
    }

    pub fn scaled(&self, s: &Rat) -> Self {
        let mut out = Self::new();
        for (k, c) in self.iter() {
            out.add(k.clone(), c * s);
        }
        out
    }

    pub fn map_keys<J: Ord + Clone>(&self, f: impl Fn(&K) -> J) -> LinComb<J> {
        let mut out = LinComb::new();
        for (k, c) in self.iter() {
            out.add(f(k), c.clone());
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&K) -> bool) -> Self {
        let mut out = Self::new();
        for (k, c) in self.iter() {
            if keep(k) {
                out.add(k.clone(), c.clone());
            }
        }
        out
    }

    pub fn coeff(&self, k: &K) -> Rat {
        self.terms.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rat)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total(&self) -> Rat {
        self.terms.values().fold(Rat::zero(), |a, c| a + c)
    }
}

impl<K: Ord + Clone> FromIterator<(K, Rat)> for LinComb<K> {
    fn from_iter<I: IntoIterator<Item = (K, Rat)>>(iter: I) -> Self {
        let mut out = LinComb::new();
        for (k, c) in iter {
            out.add(k, c);
        }
        out
    }
}
