//! The element-routing rules every sorting algorithm here is derived from.
//!
//! Each law looks at exactly one layer of structure and decides where one
//! element goes, without recursing. The schemes then run a law either as
//! part of a fold (consuming input one element at a time) or as part of an
//! unfold (producing output one element at a time), and those two readings
//! of the same law are the paired algorithms: [`swap`] gives insertion and
//! selection sort, [`sprout`] gives the two tree builds, [`wither`] the
//! two tree flattens, [`heap_sift`] and [`heap_blend`] heap construction
//! and heap merge.
//!
//! Laws are pure and never fail. Each output step carries index claims
//! derived from the input step's claims; if a caller hands a law an
//! inconsistent view, the claims come out wrong and the surrounding
//! checked-mode scheme or constructor rejects them. The recursive
//! positions are a type parameter: a law cannot inspect the structures it
//! routes, only move them.
//!
//! Ties always resolve as "left operand first" (see
//! [`compare_total`](crate::core::compare_total)), so duplicate elements
//! take a deterministic path through every algorithm.

use crate::core::{compare_total, Element, LeqWitness, Multiset};
use crate::functors::{Either, HeapStep, ListStep, MinHeap, OrderedStep, TreeStep};

/// Route one element into one layer of an ordered list.
///
/// Given `Cons(a, (r, view))` where `view` is the opened first layer of
/// `r`: if `a` is below the view's head, `a` goes first and the untouched
/// `r` is finished business (`Left`); otherwise the view's head goes first
/// and `a` continues into the tail (`Right`).
pub fn swap<T: Element, R>(
    step: ListStep<T, (R, OrderedStep<T, R>)>,
) -> OrderedStep<T, Either<R, ListStep<T, R>>> {
    match step {
        ListStep::Nil => OrderedStep::Nil,
        ListStep::Cons(a, (r, OrderedStep::Nil)) => OrderedStep::Cons {
            head: a,
            tail: Either::Left(r),
            tail_index: Multiset::new(),
        },
        ListStep::Cons(
            a,
            (
                r,
                OrderedStep::Cons {
                    head: b,
                    tail: r_tail,
                    tail_index,
                },
            ),
        ) => match compare_total(&a, &b) {
            LeqWitness::LeftLeq => OrderedStep::Cons {
                head: a,
                tail: Either::Left(r),
                tail_index: tail_index.insert(b),
            },
            LeqWitness::RightLeq => OrderedStep::Cons {
                head: b,
                tail_index: tail_index.insert(a.clone()),
                tail: Either::Right(ListStep::Cons(a, r_tail)),
            },
        },
    }
}

/// Route one element into one layer of a search tree.
///
/// The element slides toward the side of the pivot it belongs on and the
/// untouched side is finished business. Ties go left.
pub fn sprout<T: Element, R>(
    step: ListStep<T, (R, TreeStep<T, R>)>,
) -> TreeStep<T, Either<R, ListStep<T, R>>> {
    match step {
        ListStep::Nil => TreeStep::Leaf,
        ListStep::Cons(a, (_t, TreeStep::Leaf)) => TreeStep::Node {
            left: Either::Right(ListStep::Nil),
            pivot: a,
            right: Either::Right(ListStep::Nil),
            left_index: Multiset::new(),
            right_index: Multiset::new(),
        },
        ListStep::Cons(
            a,
            (
                _t,
                TreeStep::Node {
                    left,
                    pivot,
                    right,
                    left_index,
                    right_index,
                },
            ),
        ) => match compare_total(&a, &pivot) {
            LeqWitness::LeftLeq => TreeStep::Node {
                left_index: left_index.insert(a.clone()),
                left: Either::Right(ListStep::Cons(a, left)),
                pivot,
                right: Either::Left(right),
                right_index,
            },
            LeqWitness::RightLeq => TreeStep::Node {
                left: Either::Left(left),
                left_index,
                pivot,
                right_index: right_index.insert(a.clone()),
                right: Either::Right(ListStep::Cons(a, right)),
            },
        },
    }
}

/// Extract the minimum from one layer of a search tree.
///
/// The minimum lives down the left spine: with an empty left side the
/// pivot itself is the minimum and the right subtree is finished; with a
/// nonempty left side, its head is the minimum and the node is rebuilt
/// around what remains of the left side.
pub fn wither<T: Element, R>(
    step: TreeStep<T, (R, OrderedStep<T, R>)>,
) -> OrderedStep<T, Either<R, TreeStep<T, R>>> {
    match step {
        TreeStep::Leaf => OrderedStep::Nil,
        TreeStep::Node {
            left: (_l, OrderedStep::Nil),
            pivot,
            right: (r, _),
            right_index,
            ..
        } => OrderedStep::Cons {
            head: pivot,
            tail: Either::Left(r),
            tail_index: right_index,
        },
        TreeStep::Node {
            left:
                (
                    _l,
                    OrderedStep::Cons {
                        head: m,
                        tail: l_rest,
                        tail_index: l_rest_index,
                    },
                ),
            pivot,
            right: (r, _),
            right_index,
            ..
        } => OrderedStep::Cons {
            head: m,
            tail_index: l_rest_index
                .clone()
                .union(right_index.clone())
                .insert(pivot.clone()),
            tail: Either::Right(TreeStep::Node {
                left: l_rest,
                pivot,
                right: r,
                left_index: l_rest_index,
                right_index,
            }),
        },
    }
}

/// Route one element into one layer of a min-heap.
///
/// An element at or below the root caps the whole heap from above in one
/// step. A larger element displaces nothing: it continues into the old
/// right subtree while the old left subtree is finished business, and the
/// two change places. The side swap keeps repeated insertion from piling
/// everything onto one spine.
pub fn heap_sift<T: Element, R>(
    step: ListStep<T, (R, HeapStep<T, R>)>,
) -> HeapStep<T, Either<R, ListStep<T, R>>> {
    match step {
        ListStep::Nil => HeapStep::Leaf,
        ListStep::Cons(x, (_h, HeapStep::Leaf)) => HeapStep::Node {
            root: x,
            left: Either::Right(ListStep::Nil),
            right: Either::Right(ListStep::Nil),
            left_index: Multiset::new(),
            right_index: Multiset::new(),
        },
        ListStep::Cons(x, (h, view @ HeapStep::Node { .. })) => {
            let whole = view.step_index();
            let HeapStep::Node {
                root: b,
                left,
                right,
                left_index,
                right_index,
            } = view
            else {
                unreachable!("matched Node above");
            };
            match compare_total(&x, &b) {
                LeqWitness::LeftLeq => HeapStep::Node {
                    root: x,
                    left: Either::Left(h),
                    right: Either::Right(ListStep::Nil),
                    left_index: whole,
                    right_index: Multiset::new(),
                },
                LeqWitness::RightLeq => HeapStep::Node {
                    root: b,
                    left_index: right_index.insert(x.clone()),
                    left: Either::Right(ListStep::Cons(x, right)),
                    right: Either::Left(left),
                    right_index: left_index,
                },
            }
        }
    }
}

/// Merge two heaps one layer at a time.
///
/// The smaller root is emitted; its left subtree is finished business and
/// becomes the new right side, while merging continues between its right
/// subtree and the entire other heap. Once either side is empty the other
/// is re-rooted with both children finished. This one works on heap
/// carriers directly: a two-heap seed does not fit the one-functor layer
/// shape the other laws use.
pub fn heap_blend<T: Element>(
    pair: (MinHeap<T>, MinHeap<T>),
) -> HeapStep<T, Either<MinHeap<T>, (MinHeap<T>, MinHeap<T>)>> {
    let (a, b) = pair;
    let (winner, other) = match (a.peek_min(), b.peek_min()) {
        (None, None) => return HeapStep::Leaf,
        (Some(_), None) => (a, b),
        (None, Some(_)) => (b, a),
        (Some(x), Some(y)) => match compare_total(x, y) {
            LeqWitness::LeftLeq => (a, b),
            LeqWitness::RightLeq => (b, a),
        },
    };
    match winner.out_heap() {
        HeapStep::Leaf => unreachable!("winner has a root"),
        HeapStep::Node {
            root,
            left,
            right,
            left_index,
            right_index,
        } => {
            if other.is_leaf() {
                // Nothing left to merge with: both children are finished.
                HeapStep::Node {
                    root,
                    left: Either::Left(left),
                    right: Either::Left(right),
                    left_index,
                    right_index,
                }
            } else {
                HeapStep::Node {
                    root,
                    left_index: right_index.union(other.index()),
                    left: Either::Right((right, other)),
                    right: Either::Left(left),
                    right_index: left_index,
                }
            }
        }
    }
}
