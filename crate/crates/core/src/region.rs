use bitvec::prelude::*;
use serde::{Serialize, Serializer};
use std::fmt;

/// A set of vertices (arena states or product vertices) over a fixed carrier `0..len`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Region {
    bits: BitVec<usize, Lsb0>,
}

impl Region {
    pub fn empty(len: usize) -> Self {
        Region { bits: bitvec![usize, Lsb0; 0; len] }
    }

    pub fn full(len: usize) -> Self {
        Region { bits: bitvec![usize, Lsb0; 1; len] }
    }

    pub fn from_ids(len: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut r = Region::empty(len);
        for v in ids {
            r.insert(v);
        }
        r
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        Region::from_ids(len, (0..len).filter(|&v| f(v)))
    }

    /// Size of the carrier set.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn is_full(&self) -> bool {
        self.bits.all()
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.bits.len() && self.bits[v]
    }

    pub fn insert(&mut self, v: usize) -> bool {
        let fresh = !self.bits[v];
        self.bits.set(v, true);
        fresh
    }

    pub fn remove(&mut self, v: usize) {
        self.bits.set(v, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn first(&self) -> Option<usize> {
        self.bits.first_one()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &Region) {
        debug_assert_eq!(self.universe(), other.universe());
        for (a, b) in self.bits.as_raw_mut_slice().iter_mut().zip(other.bits.as_raw_slice()) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &Region) {
        debug_assert_eq!(self.universe(), other.universe());
        for (a, b) in self.bits.as_raw_mut_slice().iter_mut().zip(other.bits.as_raw_slice()) {
            *a &= *b;
        }
    }

    pub fn subtract(&mut self, other: &Region) {
        debug_assert_eq!(self.universe(), other.universe());
        for (a, b) in self.bits.as_raw_mut_slice().iter_mut().zip(other.bits.as_raw_slice()) {
            *a &= !*b;
        }
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut r = self.clone();
        r.union_with(other);
        r
    }

    pub fn intersection(&self, other: &Region) -> Region {
        let mut r = self.clone();
        r.intersect_with(other);
        r
    }

    pub fn difference(&self, other: &Region) -> Region {
        let mut r = self.clone();
        r.subtract(other);
        r
    }

    pub fn complement(&self) -> Region {
        Region { bits: !self.bits.clone() }
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.iter().any(|v| other.contains(v))
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}
