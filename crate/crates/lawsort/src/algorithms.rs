//! The sorting algorithms assembled from laws and schemes.
//!
//! Every algorithm here is a composition, not a from-scratch loop:
//!
//! * insertion sort folds the input, inserting each element with an
//!   apomorphic run of [`swap`];
//! * selection sort unfolds the output, finding each minimum with a
//!   paramorphic run of [`swap`];
//! * the tree sorts build a search tree (element-wise [`sprout`]
//!   insertion, or head-pivot partitioning) and flatten it (merge on the
//!   way back up a fold, or repeated minimum extraction);
//! * heapsort builds a heap by folded [`heap_sift`] insertion and
//!   flattens it by repeated root removal, melding the orphaned subtrees
//!   the way [`heap_blend`](crate::laws::heap_blend) dictates.
//!
//! Minimum extraction only touches a spine, so rather than re-running a
//! whole-structure scheme per extracted element, the extraction loops
//! here walk the spine directly and rebuild through the checked layer
//! constructors. Tests pin them to the scheme-driven forms they shortcut.
//!
//! Every run returns a [`Tally`] of law applications alongside the sorted
//! list, which is what the termination and early-return diagnostics in
//! the test harness are built on.

use crate::core::{compare_total, Element, LeqWitness, Multiset};
use crate::functors::{
    Either, HeapStep, Indexed, ListStep, MinHeap, Mode, OrderedList, OrderedStep, PlainList,
    SearchTree, TreeStep,
};
use crate::laws::{heap_sift, sprout, swap};
use crate::schemes::{
    apo_heap, apo_olist, apo_tree, fold_heap, fold_list, fold_tree, unfold_olist, unfold_tree,
    SchemeError,
};
use crate::seq::Seq;
use std::fmt;

/// Which half of a build/flatten pair runs as a fold and which as an
/// unfold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Fold,
    Unfold,
}

/// Identifier for one of the eight derived sorting pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Fold the input, insert into an ordered list: insertion sort.
    Insert,
    /// Unfold the output, select minima from a plain list: selection sort.
    Select,
    /// Via a search tree. `Unfold`/`Unfold` is quicksort.
    Tree { build: Strategy, flatten: Strategy },
    /// Via a min-heap; the build is always a fold of sift insertions.
    Heap { flatten: Strategy },
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Insert,
        Algorithm::Select,
        Algorithm::Tree {
            build: Strategy::Fold,
            flatten: Strategy::Fold,
        },
        Algorithm::Tree {
            build: Strategy::Fold,
            flatten: Strategy::Unfold,
        },
        Algorithm::Tree {
            build: Strategy::Unfold,
            flatten: Strategy::Fold,
        },
        Algorithm::Tree {
            build: Strategy::Unfold,
            flatten: Strategy::Unfold,
        },
        Algorithm::Heap {
            flatten: Strategy::Unfold,
        },
        Algorithm::Heap {
            flatten: Strategy::Fold,
        },
    ];

    /// Stable name, also the command-line spelling. Tree variants encode
    /// build then flatten: `tree-fu` builds by fold and flattens by
    /// unfold. Plain `heap` is the usual heapsort (flatten by unfold);
    /// `heap-ff` folds the flatten as well.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Insert => "insert",
            Algorithm::Select => "select",
            Algorithm::Tree {
                build: Strategy::Fold,
                flatten: Strategy::Fold,
            } => "tree-ff",
            Algorithm::Tree {
                build: Strategy::Fold,
                flatten: Strategy::Unfold,
            } => "tree-fu",
            Algorithm::Tree {
                build: Strategy::Unfold,
                flatten: Strategy::Fold,
            } => "tree-uf",
            Algorithm::Tree {
                build: Strategy::Unfold,
                flatten: Strategy::Unfold,
            } => "tree-uu",
            Algorithm::Heap {
                flatten: Strategy::Unfold,
            } => "heap",
            Algorithm::Heap {
                flatten: Strategy::Fold,
            } => "heap-ff",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Counts of law applications and scheme steps taken by one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    /// List-layer routing decisions (insertion and selection sort).
    pub swap: u64,
    /// Tree-layer routing decisions (element-wise tree build).
    pub sprout: u64,
    /// Tree spine layers visited while extracting minima.
    pub wither: u64,
    /// Heap-layer routing decisions (heap build).
    pub sift: u64,
    /// Heap meld layers visited while extracting minima.
    pub blend: u64,
    /// Steps taken merging already-ordered runs (fold-style flattens).
    pub merge: u64,
    /// Applications of an output-producing coalgebra.
    pub unfold_steps: u64,
    /// Nodes produced by the partitioning tree build.
    pub tree_nodes: u64,
}

/// Failure of a single-element structure operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmError {
    /// Asked to remove the minimum of an empty structure.
    EmptyStructure,
    /// A layer constructor or scheme rejected the operation.
    Scheme(SchemeError),
}

impl fmt::Display for AlgorithmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmError::EmptyStructure => write!(f, "empty structure has no minimum"),
            AlgorithmError::Scheme(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AlgorithmError {}

impl From<SchemeError> for AlgorithmError {
    fn from(e: SchemeError) -> Self {
        AlgorithmError::Scheme(e)
    }
}

/// Sort a slice with the chosen pipeline, returning the ordered list and
/// the law-application tally.
pub fn run<T: Element>(
    mode: Mode,
    algo: Algorithm,
    xs: &[T],
) -> Result<(OrderedList<T>, Tally), SchemeError> {
    let list = PlainList::from_vec(xs.to_vec());
    let mut tally = Tally::default();
    let out = match algo {
        Algorithm::Insert => insert_run(mode, list, &mut tally)?,
        Algorithm::Select => select_run(mode, list, &mut tally)?,
        Algorithm::Tree { build, flatten } => {
            let (t, t_index) = match build {
                Strategy::Fold => build_tree_fold(mode, list, &mut tally)?,
                Strategy::Unfold => build_tree_unfold(mode, list, &mut tally)?,
            };
            match flatten {
                Strategy::Fold => flatten_tree_fold(mode, t, &mut tally)?,
                Strategy::Unfold => flatten_tree_unfold(mode, t, t_index, &mut tally)?,
            }
        }
        Algorithm::Heap { flatten } => {
            let (h, h_index) = build_heap_fold(mode, list, &mut tally)?;
            match flatten {
                Strategy::Fold => flatten_heap_fold(mode, h, &mut tally)?,
                Strategy::Unfold => flatten_heap_unfold(mode, h, h_index, &mut tally)?,
            }
        }
    };
    Ok((out, tally))
}

pub fn insert_sort<T: Element>(mode: Mode, xs: &[T]) -> Result<OrderedList<T>, SchemeError> {
    run(mode, Algorithm::Insert, xs).map(|(out, _)| out)
}

pub fn select_sort<T: Element>(mode: Mode, xs: &[T]) -> Result<OrderedList<T>, SchemeError> {
    run(mode, Algorithm::Select, xs).map(|(out, _)| out)
}

pub fn tree_sort<T: Element>(
    mode: Mode,
    build: Strategy,
    flatten: Strategy,
    xs: &[T],
) -> Result<OrderedList<T>, SchemeError> {
    run(mode, Algorithm::Tree { build, flatten }, xs).map(|(out, _)| out)
}

pub fn heap_sort<T: Element>(
    mode: Mode,
    flatten: Strategy,
    xs: &[T],
) -> Result<OrderedList<T>, SchemeError> {
    run(mode, Algorithm::Heap { flatten }, xs).map(|(out, _)| out)
}

// ---- insertion and selection ----

fn insert_run<T: Element>(
    mode: Mode,
    xs: PlainList<T>,
    tally: &mut Tally,
) -> Result<OrderedList<T>, SchemeError> {
    fold_list(xs, |step| match step {
        ListStep::Nil => Ok(OrderedList::empty()),
        ListStep::Cons(a, acc) => {
            let index = acc.index().clone().insert(a.clone());
            insert_once(mode, a, acc, index, tally)
        }
    })
}

/// One apomorphic insertion: runs [`swap`] down the list until the
/// element fits, then splices the untouched rest back in one step.
fn insert_once<T: Element>(
    mode: Mode,
    x: T,
    acc: OrderedList<T>,
    index: Multiset<T>,
    tally: &mut Tally,
) -> Result<OrderedList<T>, SchemeError> {
    apo_olist(
        mode,
        Indexed::new(ListStep::Cons(x, acc), index),
        |s: ListStep<T, OrderedList<T>>| {
            tally.swap += 1;
            Ok(swap(s.map(|r| {
                let view = r.clone().out_olist();
                (r, view)
            })))
        },
    )
}

fn select_run<T: Element>(
    mode: Mode,
    xs: PlainList<T>,
    tally: &mut Tally,
) -> Result<OrderedList<T>, SchemeError> {
    let index = xs.index().clone();
    unfold_olist(mode, Indexed::new(xs, index), |xs: PlainList<T>| {
        tally.unfold_steps += 1;
        // One paramorphic pass of swap bubbles the minimum to the front
        // and leaves the rest in input order.
        crate::schemes::para_list(
            xs,
            |s: ListStep<T, (PlainList<T>, OrderedStep<T, PlainList<T>>)>| {
                tally.swap += 1;
                Ok(swap(s).map(|e| match e {
                    Either::Left(r) => r,
                    Either::Right(ls) => PlainList::in_list(ls),
                }))
            },
        )
    })
}

// ---- tree builds ----

fn sprout_insert<T: Element>(
    mode: Mode,
    x: T,
    t: SearchTree<T>,
    index: Multiset<T>,
    tally: &mut Tally,
) -> Result<SearchTree<T>, SchemeError> {
    apo_tree(
        mode,
        Indexed::new(ListStep::Cons(x, t), index),
        |s: ListStep<T, SearchTree<T>>| {
            tally.sprout += 1;
            Ok(sprout(s.map(|t| {
                let view = t.clone().out_tree();
                (t, view)
            })))
        },
    )
}

/// The build fold threads the true index alongside the tree so trusted
/// runs, whose trees are untracked, still seed each insertion honestly.
fn build_tree_fold<T: Element>(
    mode: Mode,
    xs: PlainList<T>,
    tally: &mut Tally,
) -> Result<(SearchTree<T>, Multiset<T>), SchemeError> {
    fold_list(xs, |step| match step {
        ListStep::Nil => Ok((SearchTree::leaf(), Multiset::new())),
        ListStep::Cons(a, (t, t_index)) => {
            let index = t_index.insert(a.clone());
            let t = sprout_insert(mode, a, t, index.clone(), tally)?;
            Ok((t, index))
        }
    })
}

/// Head-pivot partitioning: the quicksort way to grow the tree.
fn partition_step<T: Element>(xs: PlainList<T>, tally: &mut Tally) -> TreeStep<T, PlainList<T>> {
    match xs.items().split_first() {
        None => TreeStep::Leaf,
        Some((pivot, rest)) => {
            tally.tree_nodes += 1;
            let pivot = pivot.clone();
            let mut below = Vec::new();
            let mut above = Vec::new();
            let mut below_index = Multiset::new();
            let mut above_index = Multiset::new();
            for x in rest.iter() {
                match compare_total(x, &pivot) {
                    LeqWitness::LeftLeq => {
                        below_index = below_index.insert(x.clone());
                        below.push(x.clone());
                    }
                    LeqWitness::RightLeq => {
                        above_index = above_index.insert(x.clone());
                        above.push(x.clone());
                    }
                }
            }
            TreeStep::Node {
                left: PlainList::from_parts(
                    Seq::prepend_all(below, Seq::new()),
                    below_index.clone(),
                ),
                right: PlainList::from_parts(
                    Seq::prepend_all(above, Seq::new()),
                    above_index.clone(),
                ),
                pivot,
                left_index: below_index,
                right_index: above_index,
            }
        }
    }
}

fn build_tree_unfold<T: Element>(
    mode: Mode,
    xs: PlainList<T>,
    tally: &mut Tally,
) -> Result<(SearchTree<T>, Multiset<T>), SchemeError> {
    let index = xs.index().clone();
    let t = unfold_tree(mode, Indexed::new(xs, index.clone()), |xs: PlainList<T>| {
        Ok(partition_step(xs, tally))
    })?;
    Ok((t, index))
}

// ---- ordered-run merging (shared by the fold-style flattens) ----

/// Merge two ordered lists apomorphically: pop the smaller head until one
/// side runs dry, then splice the survivor whole.
fn merge_runs<T: Element>(
    mode: Mode,
    a: OrderedList<T>,
    b: OrderedList<T>,
    tally: &mut Tally,
) -> Result<OrderedList<T>, SchemeError> {
    if a.is_empty() {
        return Ok(b);
    }
    if b.is_empty() {
        return Ok(a);
    }
    type MergeSeed<T> = (OrderedList<T>, OrderedList<T>, Multiset<T>);
    let remaining = a.index().clone().union(b.index().clone());
    apo_olist(
        mode,
        Indexed::new((a, b, remaining.clone()), remaining),
        |(a, b, remaining): MergeSeed<T>| {
            tally.merge += 1;
            let a_first = match (a.head(), b.head()) {
                (None, None) => return Ok(OrderedStep::Nil),
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(x), Some(y)) => matches!(compare_total(x, y), LeqWitness::LeftLeq),
            };
            let (winner, loser) = if a_first { (a, b) } else { (b, a) };
            match winner.out_olist() {
                OrderedStep::Nil => unreachable!("winner side has a head"),
                OrderedStep::Cons { head, tail, .. } => {
                    let remaining = remaining
                        .remove_one(&head)
                        .expect("merge emits only seeded elements");
                    if tail.is_empty() {
                        Ok(OrderedStep::Cons {
                            head,
                            tail_index: loser.index().clone(),
                            tail: Either::Left(loser),
                        })
                    } else if loser.is_empty() {
                        Ok(OrderedStep::Cons {
                            head,
                            tail_index: tail.index().clone(),
                            tail: Either::Left(tail),
                        })
                    } else {
                        Ok(OrderedStep::Cons {
                            head,
                            tail_index: remaining.clone(),
                            tail: Either::Right((tail, loser, remaining)),
                        })
                    }
                }
            }
        },
    )
}

// ---- tree flattens ----

/// Flattening by fold: left result, pivot, right result, merged on the
/// way up. The pivot cons is where the search-tree invariant gets spent.
fn flatten_tree_fold<T: Element>(
    mode: Mode,
    t: SearchTree<T>,
    tally: &mut Tally,
) -> Result<OrderedList<T>, SchemeError> {
    fold_tree(t, |step| match step {
        TreeStep::Leaf => Ok(OrderedList::empty()),
        TreeStep::Node {
            left, pivot, right, ..
        } => {
            let with_pivot = OrderedList::in_olist(
                mode,
                OrderedStep::Cons {
                    head: pivot,
                    tail_index: right.index().clone(),
                    tail: right,
                },
            )?;
            merge_runs(mode, left, with_pivot, tally)
        }
    })
}

/// Remove the least element of a nonempty tree: walk the left spine,
/// detach its end, and rebuild each layer through the checked
/// constructor. One spine layer is one wither decision.
fn tree_pop_min<T: Element>(
    mode: Mode,
    t: SearchTree<T>,
    tally: &mut Tally,
) -> Result<Option<(T, SearchTree<T>)>, SchemeError> {
    let TreeStep::Node {
        mut left,
        mut pivot,
        mut right,
        ..
    } = t.out_tree()
    else {
        return Ok(None);
    };
    let mut frames: Vec<(T, SearchTree<T>)> = Vec::new();
    loop {
        tally.wither += 1;
        if left.is_leaf() {
            let mut acc = right;
            while let Some((p, r)) = frames.pop() {
                acc = SearchTree::in_tree(
                    mode,
                    TreeStep::Node {
                        left_index: acc.index(),
                        right_index: r.index(),
                        left: acc,
                        pivot: p,
                        right: r,
                    },
                )?;
            }
            return Ok(Some((pivot, acc)));
        }
        frames.push((pivot, right));
        let TreeStep::Node {
            left: l,
            pivot: p,
            right: r,
            ..
        } = left.out_tree()
        else {
            unreachable!("checked non-leaf above");
        };
        left = l;
        pivot = p;
        right = r;
    }
}

fn flatten_tree_unfold<T: Element>(
    mode: Mode,
    t: SearchTree<T>,
    t_index: Multiset<T>,
    tally: &mut Tally,
) -> Result<OrderedList<T>, SchemeError> {
    unfold_olist(mode, Indexed::new(t, t_index), |t: SearchTree<T>| {
        tally.unfold_steps += 1;
        match tree_pop_min(mode, t, tally)? {
            None => Ok(OrderedStep::Nil),
            Some((m, rest)) => Ok(OrderedStep::Cons {
                head: m,
                tail_index: rest.index(),
                tail: rest,
            }),
        }
    })
}

// ---- heap build and flattens ----

fn sift_insert<T: Element>(
    mode: Mode,
    x: T,
    h: MinHeap<T>,
    index: Multiset<T>,
    tally: &mut Tally,
) -> Result<MinHeap<T>, SchemeError> {
    apo_heap(
        mode,
        Indexed::new(ListStep::Cons(x, h), index),
        |s: ListStep<T, MinHeap<T>>| {
            tally.sift += 1;
            Ok(heap_sift(s.map(|h| {
                let view = h.clone().out_heap();
                (h, view)
            })))
        },
    )
}

fn build_heap_fold<T: Element>(
    mode: Mode,
    xs: PlainList<T>,
    tally: &mut Tally,
) -> Result<(MinHeap<T>, Multiset<T>), SchemeError> {
    fold_list(xs, |step| match step {
        ListStep::Nil => Ok((MinHeap::leaf(), Multiset::new())),
        ListStep::Cons(a, (h, h_index)) => {
            let index = h_index.insert(a.clone());
            let h = sift_insert(mode, a, h, index.clone(), tally)?;
            Ok((h, index))
        }
    })
}

/// Meld two heaps: repeatedly take the smaller root, hang its left
/// subtree as the new right side, and keep melding its right subtree
/// against the other heap. The blend law, run as a loop.
fn meld<T: Element>(
    mode: Mode,
    mut a: MinHeap<T>,
    mut b: MinHeap<T>,
    tally: &mut Tally,
) -> Result<MinHeap<T>, SchemeError> {
    let mut frames = Vec::new();
    let mut acc = loop {
        if a.is_leaf() {
            break b;
        }
        if b.is_leaf() {
            break a;
        }
        tally.blend += 1;
        let a_first = {
            let x = a.peek_min().expect("nonempty");
            let y = b.peek_min().expect("nonempty");
            matches!(compare_total(x, y), LeqWitness::LeftLeq)
        };
        let (winner, loser) = if a_first { (a, b) } else { (b, a) };
        let HeapStep::Node {
            root, left, right, ..
        } = winner.out_heap()
        else {
            unreachable!("winner side has a root");
        };
        frames.push((root, left));
        a = right;
        b = loser;
    };
    while let Some((root, keep)) = frames.pop() {
        acc = MinHeap::in_heap(
            mode,
            HeapStep::Node {
                left_index: acc.index(),
                right_index: keep.index(),
                left: acc,
                right: keep,
                root,
            },
        )?;
    }
    Ok(acc)
}

fn heap_pop_min<T: Element>(
    mode: Mode,
    h: MinHeap<T>,
    tally: &mut Tally,
) -> Result<Option<(T, MinHeap<T>)>, SchemeError> {
    let HeapStep::Node {
        root, left, right, ..
    } = h.out_heap()
    else {
        return Ok(None);
    };
    let rest = meld(mode, left, right, tally)?;
    Ok(Some((root, rest)))
}

fn flatten_heap_unfold<T: Element>(
    mode: Mode,
    h: MinHeap<T>,
    h_index: Multiset<T>,
    tally: &mut Tally,
) -> Result<OrderedList<T>, SchemeError> {
    unfold_olist(mode, Indexed::new(h, h_index), |h: MinHeap<T>| {
        tally.unfold_steps += 1;
        match heap_pop_min(mode, h, tally)? {
            None => Ok(OrderedStep::Nil),
            Some((m, rest)) => Ok(OrderedStep::Cons {
                head: m,
                tail_index: rest.index(),
                tail: rest,
            }),
        }
    })
}

fn flatten_heap_fold<T: Element>(
    mode: Mode,
    h: MinHeap<T>,
    tally: &mut Tally,
) -> Result<OrderedList<T>, SchemeError> {
    fold_heap(h, |step| match step {
        HeapStep::Leaf => Ok(OrderedList::empty()),
        HeapStep::Node {
            root, left, right, ..
        } => {
            let merged = merge_runs(mode, left, right, tally)?;
            OrderedList::in_olist(
                mode,
                OrderedStep::Cons {
                    head: root,
                    tail_index: merged.index().clone(),
                    tail: merged,
                },
            )
        }
    })
}

// ---- single-element structure operations ----

/// Insert one element into a search tree, preserving tracking. A tree
/// built without bookkeeping is re-tracked first (one linear pass), so
/// the insertion's checks have something true to check against.
pub fn stree_insert<T: Element>(
    mode: Mode,
    x: T,
    t: SearchTree<T>,
) -> Result<SearchTree<T>, SchemeError> {
    let t = if t.is_leaf() || !t.index().is_empty() {
        t
    } else {
        t.retracked()
    };
    let index = t.index().insert(x.clone());
    let mut tally = Tally::default();
    sprout_insert(mode, x, t, index, &mut tally)
}

/// Insert one element into a min-heap, preserving tracking; untracked
/// heaps are re-tracked first, as in [`stree_insert`].
pub fn heap_insert<T: Element>(mode: Mode, x: T, h: MinHeap<T>) -> Result<MinHeap<T>, SchemeError> {
    let h = if h.is_leaf() || !h.index().is_empty() {
        h
    } else {
        h.retracked()
    };
    let index = h.index().insert(x.clone());
    let mut tally = Tally::default();
    sift_insert(mode, x, h, index, &mut tally)
}

/// Remove the least element of a search tree.
pub fn delete_min<T: Element>(
    mode: Mode,
    t: SearchTree<T>,
) -> Result<(T, SearchTree<T>), AlgorithmError> {
    let mut tally = Tally::default();
    tree_pop_min(mode, t, &mut tally)?.ok_or(AlgorithmError::EmptyStructure)
}

/// Remove the least element of a min-heap.
pub fn heap_delete_min<T: Element>(
    mode: Mode,
    h: MinHeap<T>,
) -> Result<(T, MinHeap<T>), AlgorithmError> {
    let mut tally = Tally::default();
    heap_pop_min(mode, h, &mut tally)?.ok_or(AlgorithmError::EmptyStructure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::elements_of;
    use crate::laws::{heap_blend, wither};
    use proptest::prelude::*;
    // proptest's prelude also exports a `Strategy`; ours wins here.
    use super::Strategy;

    fn sorted_copy(xs: &[i64]) -> Vec<i64> {
        let mut v = xs.to_vec();
        v.sort_unstable();
        v
    }

    fn all_lists(max_len: usize, alphabet: &[i64]) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max_len {
            layer = layer
                .iter()
                .flat_map(|xs| {
                    alphabet.iter().map(move |&a| {
                        let mut ys = xs.clone();
                        ys.push(a);
                        ys
                    })
                })
                .collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    #[test]
    fn names_are_distinct_and_parse_back() {
        for algo in Algorithm::ALL {
            assert_eq!(Algorithm::parse(algo.name()), Some(algo));
        }
        let mut names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), Algorithm::ALL.len());
        assert_eq!(Algorithm::parse("bubble"), None);
    }

    #[test]
    fn every_algorithm_sorts_fixed_cases() {
        let cases: Vec<Vec<i64>> = vec![
            vec![],
            vec![7],
            vec![2, 1],
            vec![3, 1, 2],
            vec![1, 2, 3, 4, 5],
            vec![5, 4, 3, 2, 1],
            vec![2, 2, 2, 2],
            vec![5, -1, 5, 0, -1, 5, 3],
        ];
        for xs in &cases {
            let want = sorted_copy(xs);
            for algo in Algorithm::ALL {
                for mode in [Mode::Checked, Mode::Trusted] {
                    let (out, _) = run(mode, algo, xs)
                        .unwrap_or_else(|e| panic!("{algo} in {mode:?} on {xs:?}: {e}"));
                    assert_eq!(out.to_vec(), want, "{algo} in {mode:?} on {xs:?}");
                    assert!(out.validate(), "{algo} result fails validation");
                    assert_eq!(out.index(), &elements_of(xs), "{algo} index drifted");
                }
            }
        }
    }

    #[test]
    fn smallest_interesting_case() {
        let out = insert_sort(Mode::Checked, &[2i64, 1]).unwrap();
        assert_eq!(out.to_vec(), vec![1, 2]);
    }

    proptest! {
        #[test]
        fn agrees_with_the_standard_sort(xs in proptest::collection::vec(-50i64..50, 0..40)) {
            let want = sorted_copy(&xs);
            for algo in Algorithm::ALL {
                let (checked, _) = run(Mode::Checked, algo, &xs).unwrap();
                prop_assert_eq!(checked.to_vec(), want.clone(), "{} checked", algo);
                prop_assert!(checked.validate());
                let (trusted, _) = run(Mode::Trusted, algo, &xs).unwrap();
                prop_assert_eq!(trusted.to_vec(), want.clone(), "{} trusted", algo);
            }
        }
    }

    #[test]
    fn selection_applies_its_coalgebra_n_plus_one_times() {
        for xs in [vec![], vec![4], vec![9, 1, 4, 4, 2], (0..33).rev().collect::<Vec<i64>>()] {
            let (_, tally) = run(Mode::Checked, Algorithm::Select, &xs).unwrap();
            assert_eq!(tally.unfold_steps, xs.len() as u64 + 1);
        }
    }

    #[test]
    fn partitioning_build_produces_one_node_per_element() {
        for xs in [vec![], vec![4], vec![9, 1, 4, 4, 2], (0..57).collect::<Vec<i64>>()] {
            for flatten in [Strategy::Fold, Strategy::Unfold] {
                let algo = Algorithm::Tree {
                    build: Strategy::Unfold,
                    flatten,
                };
                let (_, tally) = run(Mode::Checked, algo, &xs).unwrap();
                assert_eq!(tally.tree_nodes, xs.len() as u64);
            }
        }
    }

    #[test]
    fn insertion_work_tracks_presortedness() {
        let n = 60u64;
        let sorted: Vec<i64> = (0..n as i64).collect();
        let (_, tally) = run(Mode::Checked, Algorithm::Insert, &sorted).unwrap();
        assert!(
            tally.swap <= 2 * n,
            "sorted input took {} swaps, expected at most {}",
            tally.swap,
            2 * n
        );
        let reversed: Vec<i64> = (0..n as i64).rev().collect();
        let (_, tally) = run(Mode::Checked, Algorithm::Insert, &reversed).unwrap();
        assert!(
            tally.swap >= n * (n - 1) / 2,
            "reversed input took only {} swaps",
            tally.swap
        );
    }

    /// The spine-walking extraction must produce exactly what one
    /// paramorphic pass of the wither law produces.
    #[test]
    fn tree_extraction_matches_the_law_run_as_a_scheme() {
        let mode = Mode::Checked;
        for xs in all_lists(5, &[0, 1, 2]) {
            let mut tally = Tally::default();
            let (t, _) = build_tree_fold(mode, PlainList::from_vec(xs.clone()), &mut tally).unwrap();

            let by_law = crate::schemes::para_tree(
                t.clone(),
                |step: TreeStep<i64, (SearchTree<i64>, OrderedStep<i64, SearchTree<i64>>)>| {
                    match wither(step) {
                        OrderedStep::Nil => Ok(OrderedStep::Nil),
                        OrderedStep::Cons {
                            head,
                            tail,
                            tail_index,
                        } => Ok(OrderedStep::Cons {
                            head,
                            tail: match tail {
                                Either::Left(t) => t,
                                Either::Right(ts) => SearchTree::in_tree(mode, ts)?,
                            },
                            tail_index,
                        }),
                    }
                },
            )
            .unwrap();

            let by_driver = tree_pop_min(mode, t, &mut tally).unwrap();
            match (by_law, by_driver) {
                (OrderedStep::Nil, None) => {}
                (
                    OrderedStep::Cons {
                        head,
                        tail,
                        tail_index,
                    },
                    Some((m, rest)),
                ) => {
                    assert_eq!(head, m, "on {xs:?}");
                    assert_eq!(tail, rest, "on {xs:?}");
                    assert_eq!(tail_index, rest.index(), "on {xs:?}");
                }
                (law, driver) => panic!("disagree on {xs:?}: law {law:?} driver {driver:?}"),
            }
        }
    }

    /// The meld loop must produce exactly what the blend law run as an
    /// apomorphism produces.
    #[test]
    fn meld_matches_the_law_run_as_a_scheme() {
        let mode = Mode::Checked;
        let heap_of = |xs: &[i64]| {
            let mut tally = Tally::default();
            build_heap_fold(mode, PlainList::from_vec(xs.to_vec()), &mut tally)
                .unwrap()
                .0
        };
        let samples: Vec<Vec<i64>> = all_lists(4, &[0, 1, 2]);
        for a in &samples {
            for b in &samples {
                let (ha, hb) = (heap_of(a), heap_of(b));
                let combined = ha.index().union(hb.index());
                let by_law = apo_heap(
                    mode,
                    Indexed::new((ha.clone(), hb.clone()), combined),
                    |pair| Ok(heap_blend(pair)),
                )
                .unwrap();
                let mut tally = Tally::default();
                let by_driver = meld(mode, ha, hb, &mut tally).unwrap();
                assert_eq!(by_law, by_driver, "meld of {a:?} and {b:?}");
            }
        }
    }

    #[test]
    fn structure_ops_roundtrip() {
        let mode = Mode::Checked;
        let mut t = SearchTree::leaf();
        let mut h = MinHeap::leaf();
        let xs = [5i64, 1, 4, 1, 5, 9, 2, 6];
        for &x in &xs {
            t = stree_insert(mode, x, t).unwrap();
            h = heap_insert(mode, x, h).unwrap();
            assert!(t.validate() && h.validate());
        }
        assert_eq!(t.index(), elements_of(&xs));
        assert_eq!(h.index(), elements_of(&xs));

        let mut drained_t = Vec::new();
        let mut drained_h = Vec::new();
        while !t.is_leaf() {
            let (m, rest) = delete_min(mode, t).unwrap();
            drained_t.push(m);
            t = rest;
            assert!(t.validate());
        }
        while !h.is_leaf() {
            let (m, rest) = heap_delete_min(mode, h).unwrap();
            drained_h.push(m);
            h = rest;
            assert!(h.validate());
        }
        assert_eq!(drained_t, sorted_copy(&xs));
        assert_eq!(drained_h, sorted_copy(&xs));
        assert_eq!(
            delete_min(mode, SearchTree::<i64>::leaf()),
            Err(AlgorithmError::EmptyStructure)
        );
        assert_eq!(
            heap_delete_min(mode, MinHeap::<i64>::leaf()),
            Err(AlgorithmError::EmptyStructure)
        );
    }

    /// Single-element inserts recover the index of structures built
    /// without bookkeeping instead of seeding themselves a lie.
    #[test]
    fn inserts_work_on_untracked_structures() {
        let mut tally = Tally::default();
        let (t, _) =
            build_tree_fold(Mode::Trusted, PlainList::from_vec(vec![4i64, 2, 6]), &mut tally)
                .unwrap();
        assert!(t.index().is_empty(), "trusted build is untracked");
        let t = stree_insert(Mode::Checked, 3, t).unwrap();
        assert!(t.validate());
        assert_eq!(t.index(), elements_of(&[2, 3, 4, 6]));

        let (h, _) =
            build_heap_fold(Mode::Trusted, PlainList::from_vec(vec![4i64, 2, 6]), &mut tally)
                .unwrap();
        let h = heap_insert(Mode::Checked, 3, h).unwrap();
        assert!(h.validate());
        assert_eq!(h.peek_min(), Some(&2));
    }

    #[test]
    fn merge_splices_the_survivor() {
        let mode = Mode::Checked;
        let run_of = |xs: &[i64]| insert_sort(mode, xs).unwrap();
        let mut tally = Tally::default();
        // Disjoint ranges: after the left run drains, the right run must
        // splice in one step, not element by element.
        let merged = merge_runs(mode, run_of(&[1, 2, 3]), run_of(&[10, 11, 12, 13]), &mut tally)
            .unwrap();
        assert_eq!(merged.to_vec(), vec![1, 2, 3, 10, 11, 12, 13]);
        assert!(merged.validate());
        assert_eq!(tally.merge, 3, "three pops then a splice");

        let mut tally = Tally::default();
        let merged = merge_runs(mode, run_of(&[1, 5, 9]), run_of(&[2, 5, 8]), &mut tally).unwrap();
        assert_eq!(merged.to_vec(), vec![1, 2, 5, 5, 8, 9]);
        assert_eq!(tally.merge, 5, "interleaved until one side drains");
    }

    #[test]
    fn intermediate_structures_validate_in_checked_mode() {
        let xs = [9i64, 3, 7, 3, 1, 8, 0];
        let mut tally = Tally::default();
        let list = PlainList::from_vec(xs.to_vec());
        let (t, _) = build_tree_fold(Mode::Checked, list.clone(), &mut tally).unwrap();
        assert!(t.validate());
        let (t, _) = build_tree_unfold(Mode::Checked, list.clone(), &mut tally).unwrap();
        assert!(t.validate());
        let (h, _) = build_heap_fold(Mode::Checked, list, &mut tally).unwrap();
        assert!(h.validate());
    }
}
