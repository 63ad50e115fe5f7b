//! Persistent cons list.
//!
//! Carriers store their elements in a `Seq` so that tails can be shared:
//! a paramorphism hands every layer its original tail, and an apomorphism
//! splices an already-finished suffix into its output, both without
//! copying. Cloning is O(1).

use std::fmt;
use std::sync::Arc;

struct Node<T> {
    head: T,
    tail: Link<T>,
}

type Link<T> = Option<Arc<Node<T>>>;

pub struct Seq<T> {
    link: Link<T>,
}

impl<T> Seq<T> {
    pub fn new() -> Self {
        Seq { link: None }
    }

    pub fn is_empty(&self) -> bool {
        self.link.is_none()
    }

    /// Prepend an element. O(1).
    pub fn cons(head: T, mut tail: Seq<T>) -> Seq<T> {
        Seq {
            link: Some(Arc::new(Node {
                head,
                tail: tail.link.take(),
            })),
        }
    }

    /// Head and shared tail, unless empty. O(1).
    pub fn split_first(&self) -> Option<(&T, Seq<T>)> {
        self.link.as_ref().map(|node| {
            (
                &node.head,
                Seq {
                    link: node.tail.clone(),
                },
            )
        })
    }

    pub fn first(&self) -> Option<&T> {
        self.link.as_ref().map(|node| &node.head)
    }

    pub fn iter(&self) -> Iter<'_, T> {
        Iter {
            link: self.link.as_deref(),
        }
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }
}

impl<T: Clone> Seq<T> {
    pub fn to_vec(&self) -> Vec<T> {
        self.iter().cloned().collect()
    }

    /// Build by consing `items` in reverse onto `suffix`, so the result
    /// reads `items` then `suffix`.
    pub fn prepend_all(items: Vec<T>, suffix: Seq<T>) -> Seq<T> {
        items
            .into_iter()
            .rev()
            .fold(suffix, |acc, x| Seq::cons(x, acc))
    }
}

impl<T> Default for Seq<T> {
    fn default() -> Self {
        Seq::new()
    }
}

impl<T> Clone for Seq<T> {
    fn clone(&self) -> Self {
        Seq {
            link: self.link.clone(),
        }
    }
}

impl<T> Drop for Seq<T> {
    // Unlink iteratively; the derived drop would recurse per node and
    // overflow the stack on long unshared lists.
    fn drop(&mut self) {
        let mut link = self.link.take();
        while let Some(node) = link {
            match Arc::try_unwrap(node) {
                Ok(mut inner) => link = inner.tail.take(),
                Err(_) => break, // shared beyond this list: someone else drops the rest
            }
        }
    }
}

pub struct Iter<'a, T> {
    link: Option<&'a Node<T>>,
}

impl<'a, T> Iterator for Iter<'a, T> {
    type Item = &'a T;

    fn next(&mut self) -> Option<&'a T> {
        let node = self.link?;
        self.link = node.tail.as_deref();
        Some(&node.head)
    }
}

impl<T> FromIterator<T> for Seq<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let items: Vec<T> = iter.into_iter().collect();
        items.into_iter().rev().fold(Seq::new(), |acc, x| Seq::cons(x, acc))
    }
}

impl<T: PartialEq> PartialEq for Seq<T> {
    fn eq(&self, other: &Self) -> bool {
        self.iter().eq(other.iter())
    }
}

impl<T: Eq> Eq for Seq<T> {}

impl<T: fmt::Debug> fmt::Debug for Seq<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let s: Seq<i64> = [1, 2, 3].into_iter().collect();
        assert_eq!(s.to_vec(), vec![1, 2, 3]);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn split_shares_tail() {
        let s: Seq<i64> = [1, 2, 3].into_iter().collect();
        let (h, t) = s.split_first().unwrap();
        assert_eq!(*h, 1);
        assert_eq!(t.to_vec(), vec![2, 3]);
        // original untouched
        assert_eq!(s.to_vec(), vec![1, 2, 3]);
    }

    #[test]
    fn prepend_all_keeps_order() {
        let suffix: Seq<i64> = [4, 5].into_iter().collect();
        let s = Seq::prepend_all(vec![1, 2, 3], suffix);
        assert_eq!(s.to_vec(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn long_list_drops_without_overflow() {
        let s: Seq<u32> = (0..200_000).collect();
        assert_eq!(s.len(), 200_000);
        drop(s);
    }
}
