//! Total order plumbing and the canonical finite multiset.
//!
//! Every carrier in this library is tracked by a [`Multiset`] of its
//! elements: sorting may reorder, never add or drop. The multiset is stored
//! as an ordered count map, so equal contents always produce structurally
//! equal values, and min/max queries are cheap.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use im::OrdMap;

/// Bound on what a sortable element must provide. The order must be total
/// and agree with `Eq`/`Hash`.
pub trait Element: Ord + Clone + Hash {}

impl<T: Ord + Clone + Hash> Element for T {}

/// Outcome of a total-order comparison. Ties report `LeftLeq`, so every
/// decision point in the algorithms breaks ties the same way and duplicate
/// elements keep a deterministic layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeqWitness {
    LeftLeq,
    RightLeq,
}

/// Compare two elements, reporting which side may go first.
pub fn compare_total<T: Ord>(a: &T, b: &T) -> LeqWitness {
    if a <= b {
        LeqWitness::LeftLeq
    } else {
        LeqWitness::RightLeq
    }
}

/// Which side of a multiset an element must bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `x` must be less than or equal to every element of the multiset.
    Below,
    /// `x` must be greater than or equal to every element of the multiset.
    Above,
}

/// `true` iff `x` bounds `m` from the given side. Empty multisets are
/// bounded by anything.
pub fn bound_check<T: Element>(bound: Bound, x: &T, m: &Multiset<T>) -> bool {
    match bound {
        Bound::Below => m.min().is_none_or(|lo| x <= lo),
        Bound::Above => m.max().is_none_or(|hi| x >= hi),
    }
}

// Two independent 64-bit mixes of an element's hash, packed into a u128.
// Summed with wrapping arithmetic over all occurrences this gives a
// commutative fingerprint: insertions add, removals subtract, unions add
// whole fingerprints. Used as a constant-time consistency check on the
// index claims that step values carry; exact equality stays map-based.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

pub(crate) fn element_fingerprint<T: Hash>(x: &T) -> u128 {
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    let seed = h.finish();
    let lo = splitmix64(seed);
    let hi = splitmix64(seed ^ 0xa5a5_a5a5_a5a5_a5a5);
    ((hi as u128) << 64) | lo as u128
}

/// A finite multiset: element -> occurrence count, counts always >= 1.
///
/// The representation is canonical, so `==` means "same contents". Values
/// are persistent: the consuming operations (`insert`, `remove_one`,
/// `union`) return the updated multiset in O(log n) even when the original
/// is still shared elsewhere. Cloning is O(1). These costs matter because
/// the step values flowing through the schemes each carry one of these.
pub struct Multiset<T: Element> {
    map: OrdMap<T, usize>,
    len: usize,
    fp: u128,
}

impl<T: Element> Clone for Multiset<T> {
    fn clone(&self) -> Self {
        Multiset {
            map: self.map.clone(),
            len: self.len,
            fp: self.fp,
        }
    }
}

impl<T: Element> Default for Multiset<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Element> Multiset<T> {
    /// The empty multiset.
    pub fn new() -> Self {
        Multiset {
            map: OrdMap::new(),
            len: 0,
            fp: 0,
        }
    }

    /// Total number of occurrences, counting multiplicity.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Occurrences of `x`.
    pub fn count(&self, x: &T) -> usize {
        self.map.get(x).copied().unwrap_or(0)
    }

    /// Number of distinct elements.
    pub fn distinct(&self) -> usize {
        self.map.len()
    }

    /// Smallest element, if any.
    pub fn min(&self) -> Option<&T> {
        self.map.get_min().map(|(k, _)| k)
    }

    /// Largest element, if any.
    pub fn max(&self) -> Option<&T> {
        self.map.get_max().map(|(k, _)| k)
    }

    /// Add one occurrence of `x`.
    pub fn insert(mut self, x: T) -> Self {
        self.fp = self.fp.wrapping_add(element_fingerprint(&x));
        self.len = self.len.checked_add(1).expect("multiset size overflow");
        let n = self.map.get(&x).copied().unwrap_or(0);
        self.map.insert(x, n + 1);
        self
    }

    /// Remove one occurrence of `x`. `None` if `x` is absent.
    pub fn remove_one(mut self, x: &T) -> Option<Self> {
        let n = self.count(x);
        if n == 0 {
            return None;
        }
        self.fp = self.fp.wrapping_sub(element_fingerprint(x));
        self.len -= 1;
        if n == 1 {
            self.map.remove(x);
        } else {
            self.map.insert(x.clone(), n - 1);
        }
        Some(self)
    }

    /// Multiset union: counts add.
    pub fn union(self, other: Self) -> Self {
        // Fold the smaller side into the larger.
        let (mut big, small) = if self.distinct() >= other.distinct() {
            (self, other)
        } else {
            (other, self)
        };
        big.fp = big.fp.wrapping_add(small.fp);
        big.len = big
            .len
            .checked_add(small.len)
            .expect("multiset size overflow");
        for (x, n) in small.map.iter() {
            let m = big.map.get(x).copied().unwrap_or(0);
            big.map.insert(x.clone(), m + n);
        }
        big
    }

    /// Iterate `(element, count)` pairs in ascending element order.
    pub fn iter(&self) -> impl Iterator<Item = (&T, usize)> {
        self.map.iter().map(|(k, &n)| (k, n))
    }

    /// Iterate elements with multiplicity, ascending.
    pub fn elements(&self) -> impl Iterator<Item = &T> {
        self.map
            .iter()
            .flat_map(|(k, &n)| std::iter::repeat_n(k, n))
    }

    /// Commutative fingerprint of the contents.
    pub fn fingerprint(&self) -> u128 {
        self.fp
    }

    /// Cheap consistency check: size and fingerprint agree. A mismatch
    /// proves the multisets differ; a match is what every honestly derived
    /// index produces. Exact comparison is `==`.
    pub fn fingerprint_eq(&self, other: &Self) -> bool {
        self.len == other.len && self.fp == other.fp
    }
}

impl<T: Element> PartialEq for Multiset<T> {
    fn eq(&self, other: &Self) -> bool {
        if self.len != other.len || self.fp != other.fp {
            return false;
        }
        self.map.ptr_eq(&other.map) || self.map == other.map
    }
}

impl<T: Element> Eq for Multiset<T> {}

impl<T: Element> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        iter.into_iter().fold(Multiset::new(), Multiset::insert)
    }
}

impl<T: Element + fmt::Debug> fmt::Debug for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.map.iter()).finish()
    }
}

/// Multiset of the elements of a sequence.
pub fn elements_of<'a, T, I>(items: I) -> Multiset<T>
where
    T: Element + 'a,
    I: IntoIterator<Item = &'a T>,
{
    items.into_iter().cloned().collect()
}
