//! Structured recursion over the carriers.
//!
//! Folds and paramorphisms consume a structure bottom-up; unfolds and
//! apomorphisms grow one from a seed. The unfolds are where termination
//! and honesty are enforced: every producing step must account for the
//! elements it claims to place, the running index shrinks strictly, and a
//! fuel counter equal to the theoretical step bound makes divergence
//! impossible even when a coalgebra lies in trusted mode.
//!
//! All drivers are iterative. Stack depth does not scale with input size,
//! so a hundred-thousand-element list or a spine-shaped tree is fine.

use std::error::Error;
use std::fmt;

use crate::core::{bound_check, element_fingerprint, Bound, Element, Multiset};
use crate::functors::{
    Either, HeapStep, Indexed, ListStep, MinHeap, Mode, OrderedList, OrderedStep, PlainList,
    SearchTree, TreeStep,
};
use crate::seq::Seq;

/// How a checked run fails. Produced by the schemes and by the carrier
/// constructors; never by a valid algebra/coalgebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeError {
    /// A step claimed an index it cannot have: emitted an element the seed
    /// does not contain, stopped while elements remain, or stated a
    /// residual that disagrees with the elements actually left.
    IndexMismatch(&'static str),
    /// An ordering obligation failed: a head above its tail, a pivot not
    /// separating its subtrees, a heap root above a child.
    EvidenceViolation(&'static str),
    /// The defensive step bound was hit. Unreachable when per-step checks
    /// run, since a checked coalgebra must shrink the index every step;
    /// in trusted mode this is what stops a divergent coalgebra.
    FuelExhausted(&'static str),
}

impl fmt::Display for SchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeError::IndexMismatch(msg) => write!(f, "index mismatch: {msg}"),
            SchemeError::EvidenceViolation(msg) => write!(f, "evidence violation: {msg}"),
            SchemeError::FuelExhausted(msg) => write!(f, "fuel exhausted: {msg}"),
        }
    }
}

impl Error for SchemeError {}

/// Fold a list bottom-up: replace `Nil` by `alg(Nil)` and each `Cons` by
/// `alg(Cons(head, result))`, rightmost first.
pub fn fold_list<T, X, A>(xs: PlainList<T>, mut alg: A) -> Result<X, SchemeError>
where
    T: Element,
    A: FnMut(ListStep<T, X>) -> Result<X, SchemeError>,
{
    let items = xs.to_vec();
    let mut acc = alg(ListStep::Nil)?;
    for x in items.into_iter().rev() {
        acc = alg(ListStep::Cons(x, acc))?;
    }
    Ok(acc)
}

/// Fold where each `Cons` also sees the original tail next to the result
/// computed for it.
pub fn para_list<T, X, A>(xs: PlainList<T>, mut alg: A) -> Result<X, SchemeError>
where
    T: Element,
    A: FnMut(ListStep<T, (PlainList<T>, X)>) -> Result<X, SchemeError>,
{
    // Collect (head, original tail) frames front to back, then fold back
    // to front. Tails share structure; their indices are peeled one
    // element at a time.
    let mut frames = Vec::with_capacity(xs.len());
    let mut index = xs.index().clone();
    let mut rest = xs.items().clone();
    while let Some((head, tail)) = rest.split_first() {
        let head = head.clone();
        index = index
            .remove_one(&head)
            .expect("list index tracks its items");
        frames.push((head, PlainList::from_parts(tail.clone(), index.clone())));
        rest = tail;
    }
    let mut acc = alg(ListStep::Nil)?;
    for (head, tail) in frames.into_iter().rev() {
        acc = alg(ListStep::Cons(head, (tail, acc)))?;
    }
    Ok(acc)
}

/// Grow an ordered list from a seed. The coalgebra is applied exactly
/// `index.len() + 1` times for any honest run: once per element plus the
/// closing `Nil`. In checked mode every step must remove a present
/// element, claim the true residual, and emit below the remaining
/// minimum; the result then carries the seed's index by construction.
pub fn unfold_olist<T, S, C>(
    mode: Mode,
    seed: Indexed<S, T>,
    mut coalg: C,
) -> Result<OrderedList<T>, SchemeError>
where
    T: Element,
    C: FnMut(S) -> Result<OrderedStep<T, S>, SchemeError>,
{
    let Indexed {
        value: mut cur,
        index: original,
    } = seed;
    let mut truth = original.clone();
    let mut emitted: Vec<T> = Vec::with_capacity(original.len());
    let mut fuel = original.len() + 1;
    loop {
        if fuel == 0 {
            return Err(SchemeError::FuelExhausted(
                "ordered unfold ran past its size bound",
            ));
        }
        fuel -= 1;
        match coalg(cur)? {
            OrderedStep::Nil => {
                if mode.checked() && !truth.is_empty() {
                    return Err(SchemeError::IndexMismatch(
                        "unfold stopped while elements remain unplaced",
                    ));
                }
                break;
            }
            OrderedStep::Cons {
                head,
                tail,
                tail_index,
            } => {
                if mode.checked() {
                    truth = truth.remove_one(&head).ok_or(SchemeError::IndexMismatch(
                        "unfold emitted an element its seed index does not contain",
                    ))?;
                    if !tail_index.fingerprint_eq(&truth) {
                        return Err(SchemeError::IndexMismatch(
                            "claimed residual diverges from the elements actually left",
                        ));
                    }
                    if !bound_check(Bound::Below, &head, &tail_index) {
                        return Err(SchemeError::EvidenceViolation(
                            "unfold emitted an element above the remaining minimum",
                        ));
                    }
                }
                emitted.push(head);
                cur = tail;
            }
        }
    }
    Ok(OrderedList::from_parts(
        Seq::prepend_all(emitted, Seq::new()),
        original,
    ))
}

/// Like [`unfold_olist`], but the coalgebra may finish early by returning
/// an already-built ordered list, which is spliced in verbatim. The splice
/// is validated against the claimed residual through the carrier's stored
/// index; the carrier itself is correct by construction.
pub fn apo_olist<T, S, C>(
    mode: Mode,
    seed: Indexed<S, T>,
    mut coalg: C,
) -> Result<OrderedList<T>, SchemeError>
where
    T: Element,
    C: FnMut(S) -> Result<OrderedStep<T, Either<OrderedList<T>, S>>, SchemeError>,
{
    let Indexed {
        value: mut cur,
        index: original,
    } = seed;
    let mut truth = original.clone();
    let mut emitted: Vec<T> = Vec::with_capacity(original.len());
    let mut fuel = original.len() + 1;
    loop {
        if fuel == 0 {
            return Err(SchemeError::FuelExhausted(
                "ordered apomorphism ran past its size bound",
            ));
        }
        fuel -= 1;
        match coalg(cur)? {
            OrderedStep::Nil => {
                if mode.checked() && !truth.is_empty() {
                    return Err(SchemeError::IndexMismatch(
                        "apomorphism stopped while elements remain unplaced",
                    ));
                }
                return Ok(OrderedList::from_parts(
                    Seq::prepend_all(emitted, Seq::new()),
                    original,
                ));
            }
            OrderedStep::Cons {
                head,
                tail,
                tail_index,
            } => {
                if mode.checked() {
                    truth = truth.remove_one(&head).ok_or(SchemeError::IndexMismatch(
                        "apomorphism emitted an element its seed index does not contain",
                    ))?;
                    if !tail_index.fingerprint_eq(&truth) {
                        return Err(SchemeError::IndexMismatch(
                            "claimed residual diverges from the elements actually left",
                        ));
                    }
                    if !bound_check(Bound::Below, &head, &tail_index) {
                        return Err(SchemeError::EvidenceViolation(
                            "apomorphism emitted an element above the remaining minimum",
                        ));
                    }
                }
                emitted.push(head);
                match tail {
                    Either::Right(next) => cur = next,
                    Either::Left(fin) => {
                        if mode.checked() && !fin.index().fingerprint_eq(&tail_index) {
                            return Err(SchemeError::IndexMismatch(
                                "spliced list's stored index disagrees with the claimed residual",
                            ));
                        }
                        return Ok(OrderedList::from_parts(
                            Seq::prepend_all(emitted, fin.items().clone()),
                            original,
                        ));
                    }
                }
            }
        }
    }
}

enum BuildTask<T: Element, S> {
    Expand { seed: S, claim: Multiset<T> },
    Assemble { pivot: T, claim: Multiset<T> },
}

/// Grow a search tree from a seed. Each `Node` output must split the
/// claimed index exactly: child claims plus the pivot reassemble it, and
/// the pivot separates them. Node count is bounded by the index size, so
/// the coalgebra runs at most `2 * index.len() + 1` times (every node plus
/// every leaf). Checked mode stores real subtree indices on every node;
/// trusted mode leaves them untracked.
pub fn unfold_tree<T, S, C>(
    mode: Mode,
    seed: Indexed<S, T>,
    mut coalg: C,
) -> Result<SearchTree<T>, SchemeError>
where
    T: Element,
    C: FnMut(S) -> Result<TreeStep<T, S>, SchemeError>,
{
    let Indexed {
        value: root_seed,
        index: original,
    } = seed;
    let mut fuel = 2 * original.len() + 1;
    let mut tasks = vec![BuildTask::Expand {
        seed: root_seed,
        claim: original,
    }];
    // (subtree link, its real index when checked)
    let mut built: Vec<(crate::functors::TreeLink<T>, Multiset<T>)> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            BuildTask::Expand { seed, claim } => {
                if fuel == 0 {
                    return Err(SchemeError::FuelExhausted(
                        "tree unfold ran past its size bound",
                    ));
                }
                fuel -= 1;
                match coalg(seed)? {
                    TreeStep::Leaf => {
                        if mode.checked() && !claim.is_empty() {
                            return Err(SchemeError::IndexMismatch(
                                "leaf produced while elements remain unplaced",
                            ));
                        }
                        built.push((None, Multiset::new()));
                    }
                    TreeStep::Node {
                        left,
                        pivot,
                        right,
                        left_index,
                        right_index,
                    } => {
                        if mode.checked() {
                            let len_ok = left_index
                                .len()
                                .checked_add(right_index.len())
                                .and_then(|n| n.checked_add(1))
                                == Some(claim.len());
                            let fp_ok = left_index
                                .fingerprint()
                                .wrapping_add(right_index.fingerprint())
                                .wrapping_add(element_fingerprint(&pivot))
                                == claim.fingerprint();
                            if !(len_ok && fp_ok) {
                                return Err(SchemeError::IndexMismatch(
                                    "node split does not reassemble the claimed index",
                                ));
                            }
                            if !bound_check(Bound::Above, &pivot, &left_index) {
                                return Err(SchemeError::EvidenceViolation(
                                    "pivot is below an element claimed for its left subtree",
                                ));
                            }
                            if !bound_check(Bound::Below, &pivot, &right_index) {
                                return Err(SchemeError::EvidenceViolation(
                                    "pivot is above an element claimed for its right subtree",
                                ));
                            }
                        }
                        tasks.push(BuildTask::Assemble { pivot, claim });
                        tasks.push(BuildTask::Expand {
                            seed: right,
                            claim: right_index,
                        });
                        tasks.push(BuildTask::Expand {
                            seed: left,
                            claim: left_index,
                        });
                    }
                }
            }
            BuildTask::Assemble { pivot, claim } => {
                let (right, right_ms) = built.pop().expect("assembly follows two expansions");
                let (left, left_ms) = built.pop().expect("assembly follows two expansions");
                let index = if mode.checked() {
                    let real = left_ms.union(right_ms).insert(pivot.clone());
                    if !real.fingerprint_eq(&claim) {
                        return Err(SchemeError::IndexMismatch(
                            "assembled subtree does not carry its claimed index",
                        ));
                    }
                    real
                } else {
                    Multiset::new()
                };
                built.push((
                    Some(std::sync::Arc::new(crate::functors::TreeNode {
                        left,
                        pivot,
                        right,
                        index: index.clone(),
                    })),
                    index,
                ));
            }
        }
    }
    let (root, _) = built.pop().expect("unfold built exactly one tree");
    Ok(SearchTree { root })
}

/// Like [`unfold_tree`], but a child position may be filled by an
/// already-built subtree (`Left`), validated against the claim through its
/// stored index and spliced without being walked.
pub fn apo_tree<T, S, C>(
    mode: Mode,
    seed: Indexed<S, T>,
    mut coalg: C,
) -> Result<SearchTree<T>, SchemeError>
where
    T: Element,
    C: FnMut(S) -> Result<TreeStep<T, Either<SearchTree<T>, S>>, SchemeError>,
{
    let Indexed {
        value: root_seed,
        index: original,
    } = seed;
    let mut fuel = 2 * original.len() + 1;
    let mut tasks = vec![BuildTask::Expand {
        seed: Either::<SearchTree<T>, S>::Right(root_seed),
        claim: original,
    }];
    let mut built: Vec<(crate::functors::TreeLink<T>, Multiset<T>)> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            BuildTask::Expand {
                seed: Either::Left(done),
                claim,
            } => {
                if mode.checked() && !done.index().fingerprint_eq(&claim) {
                    return Err(SchemeError::IndexMismatch(
                        "spliced subtree's stored index disagrees with its claimed position",
                    ));
                }
                let index = done.index();
                built.push((done.take_root(), index));
            }
            BuildTask::Expand {
                seed: Either::Right(seed),
                claim,
            } => {
                if fuel == 0 {
                    return Err(SchemeError::FuelExhausted(
                        "tree apomorphism ran past its size bound",
                    ));
                }
                fuel -= 1;
                match coalg(seed)? {
                    TreeStep::Leaf => {
                        if mode.checked() && !claim.is_empty() {
                            return Err(SchemeError::IndexMismatch(
                                "leaf produced while elements remain unplaced",
                            ));
                        }
                        built.push((None, Multiset::new()));
                    }
                    TreeStep::Node {
                        left,
                        pivot,
                        right,
                        left_index,
                        right_index,
                    } => {
                        if mode.checked() {
                            let len_ok = left_index
                                .len()
                                .checked_add(right_index.len())
                                .and_then(|n| n.checked_add(1))
                                == Some(claim.len());
                            let fp_ok = left_index
                                .fingerprint()
                                .wrapping_add(right_index.fingerprint())
                                .wrapping_add(element_fingerprint(&pivot))
                                == claim.fingerprint();
                            if !(len_ok && fp_ok) {
                                return Err(SchemeError::IndexMismatch(
                                    "node split does not reassemble the claimed index",
                                ));
                            }
                            if !bound_check(Bound::Above, &pivot, &left_index) {
                                return Err(SchemeError::EvidenceViolation(
                                    "pivot is below an element claimed for its left subtree",
                                ));
                            }
                            if !bound_check(Bound::Below, &pivot, &right_index) {
                                return Err(SchemeError::EvidenceViolation(
                                    "pivot is above an element claimed for its right subtree",
                                ));
                            }
                        }
                        tasks.push(BuildTask::Assemble { pivot, claim });
                        tasks.push(BuildTask::Expand {
                            seed: right,
                            claim: right_index,
                        });
                        tasks.push(BuildTask::Expand {
                            seed: left,
                            claim: left_index,
                        });
                    }
                }
            }
            BuildTask::Assemble { pivot, claim } => {
                let (right, right_ms) = built.pop().expect("assembly follows two expansions");
                let (left, left_ms) = built.pop().expect("assembly follows two expansions");
                let index = if mode.checked() {
                    let real = left_ms.union(right_ms).insert(pivot.clone());
                    if !real.fingerprint_eq(&claim) {
                        return Err(SchemeError::IndexMismatch(
                            "assembled subtree does not carry its claimed index",
                        ));
                    }
                    real
                } else {
                    Multiset::new()
                };
                built.push((
                    Some(std::sync::Arc::new(crate::functors::TreeNode {
                        left,
                        pivot,
                        right,
                        index: index.clone(),
                    })),
                    index,
                ));
            }
        }
    }
    let (root, _) = built.pop().expect("apomorphism built exactly one tree");
    Ok(SearchTree { root })
}

/// Fold a search tree bottom-up. The step handed to the algebra carries
/// the children's stored indices (empty when the tree was built untracked).
pub fn fold_tree<T, X, A>(t: SearchTree<T>, mut alg: A) -> Result<X, SchemeError>
where
    T: Element,
    A: FnMut(TreeStep<T, X>) -> Result<X, SchemeError>,
{
    enum Task<T: Element> {
        Expand(crate::functors::TreeLink<T>),
        Combine {
            pivot: T,
            left_index: Multiset<T>,
            right_index: Multiset<T>,
        },
    }
    let mut tasks = vec![Task::Expand(t.take_root())];
    let mut results: Vec<X> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            Task::Expand(None) => results.push(alg(TreeStep::Leaf)?),
            Task::Expand(Some(node)) => {
                let node =
                    std::sync::Arc::try_unwrap(node).unwrap_or_else(|shared| (*shared).clone());
                let left_index = node
                    .left
                    .as_ref()
                    .map(|n| n.index.clone())
                    .unwrap_or_default();
                let right_index = node
                    .right
                    .as_ref()
                    .map(|n| n.index.clone())
                    .unwrap_or_default();
                tasks.push(Task::Combine {
                    pivot: node.pivot,
                    left_index,
                    right_index,
                });
                tasks.push(Task::Expand(node.right));
                tasks.push(Task::Expand(node.left));
            }
            Task::Combine {
                pivot,
                left_index,
                right_index,
            } => {
                let right = results.pop().expect("combine follows two expansions");
                let left = results.pop().expect("combine follows two expansions");
                results.push(alg(TreeStep::Node {
                    left,
                    pivot,
                    right,
                    left_index,
                    right_index,
                })?);
            }
        }
    }
    Ok(results.pop().expect("fold produced exactly one result"))
}

/// Tree fold where each child position also sees the original subtree.
pub fn para_tree<T, X, A>(t: SearchTree<T>, mut alg: A) -> Result<X, SchemeError>
where
    T: Element,
    A: FnMut(TreeStep<T, (SearchTree<T>, X)>) -> Result<X, SchemeError>,
{
    enum Task<T: Element> {
        Expand(crate::functors::TreeLink<T>),
        Combine {
            pivot: T,
            left_orig: SearchTree<T>,
            right_orig: SearchTree<T>,
            left_index: Multiset<T>,
            right_index: Multiset<T>,
        },
    }
    let mut tasks = vec![Task::Expand(t.take_root())];
    let mut results: Vec<X> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            Task::Expand(None) => results.push(alg(TreeStep::Leaf)?),
            Task::Expand(Some(node)) => {
                let node =
                    std::sync::Arc::try_unwrap(node).unwrap_or_else(|shared| (*shared).clone());
                let left_orig = SearchTree {
                    root: node.left.clone(),
                };
                let right_orig = SearchTree {
                    root: node.right.clone(),
                };
                tasks.push(Task::Combine {
                    pivot: node.pivot,
                    left_index: left_orig.index(),
                    right_index: right_orig.index(),
                    left_orig,
                    right_orig,
                });
                tasks.push(Task::Expand(node.right));
                tasks.push(Task::Expand(node.left));
            }
            Task::Combine {
                pivot,
                left_orig,
                right_orig,
                left_index,
                right_index,
            } => {
                let right = results.pop().expect("combine follows two expansions");
                let left = results.pop().expect("combine follows two expansions");
                results.push(alg(TreeStep::Node {
                    left: (left_orig, left),
                    pivot,
                    right: (right_orig, right),
                    left_index,
                    right_index,
                })?);
            }
        }
    }
    Ok(results.pop().expect("fold produced exactly one result"))
}

/// Grow a heap from a seed; the heap sibling of [`unfold_tree`], with the
/// root bounding both claimed children from below.
pub fn unfold_heap<T, S, C>(
    mode: Mode,
    seed: Indexed<S, T>,
    mut coalg: C,
) -> Result<MinHeap<T>, SchemeError>
where
    T: Element,
    C: FnMut(S) -> Result<HeapStep<T, S>, SchemeError>,
{
    apo_heap(mode, seed, move |s| {
        Ok(coalg(s)?.map(Either::<MinHeap<T>, S>::Right))
    })
}

/// Heap apomorphism: grow a heap, splicing in finished subheaps early.
pub fn apo_heap<T, S, C>(
    mode: Mode,
    seed: Indexed<S, T>,
    mut coalg: C,
) -> Result<MinHeap<T>, SchemeError>
where
    T: Element,
    C: FnMut(S) -> Result<HeapStep<T, Either<MinHeap<T>, S>>, SchemeError>,
{
    enum Task<T: Element, S> {
        Expand {
            seed: Either<MinHeap<T>, S>,
            claim: Multiset<T>,
        },
        Assemble {
            root: T,
            claim: Multiset<T>,
        },
    }
    let Indexed {
        value: root_seed,
        index: original,
    } = seed;
    let mut fuel = 2 * original.len() + 1;
    let mut tasks = vec![Task::Expand {
        seed: Either::Right(root_seed),
        claim: original,
    }];
    let mut built: Vec<(crate::functors::HeapLink<T>, Multiset<T>)> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            Task::Expand {
                seed: Either::Left(done),
                claim,
            } => {
                if mode.checked() && !done.index().fingerprint_eq(&claim) {
                    return Err(SchemeError::IndexMismatch(
                        "spliced subheap's stored index disagrees with its claimed position",
                    ));
                }
                let index = done.index();
                built.push((done.take_root(), index));
            }
            Task::Expand {
                seed: Either::Right(seed),
                claim,
            } => {
                if fuel == 0 {
                    return Err(SchemeError::FuelExhausted(
                        "heap production ran past its size bound",
                    ));
                }
                fuel -= 1;
                match coalg(seed)? {
                    HeapStep::Leaf => {
                        if mode.checked() && !claim.is_empty() {
                            return Err(SchemeError::IndexMismatch(
                                "leaf produced while elements remain unplaced",
                            ));
                        }
                        built.push((None, Multiset::new()));
                    }
                    HeapStep::Node {
                        root,
                        left,
                        right,
                        left_index,
                        right_index,
                    } => {
                        if mode.checked() {
                            let len_ok = left_index
                                .len()
                                .checked_add(right_index.len())
                                .and_then(|n| n.checked_add(1))
                                == Some(claim.len());
                            let fp_ok = left_index
                                .fingerprint()
                                .wrapping_add(right_index.fingerprint())
                                .wrapping_add(element_fingerprint(&root))
                                == claim.fingerprint();
                            if !(len_ok && fp_ok) {
                                return Err(SchemeError::IndexMismatch(
                                    "node split does not reassemble the claimed index",
                                ));
                            }
                            if !(bound_check(Bound::Below, &root, &left_index)
                                && bound_check(Bound::Below, &root, &right_index))
                            {
                                return Err(SchemeError::EvidenceViolation(
                                    "heap root is above an element claimed for a child",
                                ));
                            }
                        }
                        tasks.push(Task::Assemble { root, claim });
                        tasks.push(Task::Expand {
                            seed: right,
                            claim: right_index,
                        });
                        tasks.push(Task::Expand {
                            seed: left,
                            claim: left_index,
                        });
                    }
                }
            }
            Task::Assemble { root, claim } => {
                let (right, right_ms) = built.pop().expect("assembly follows two expansions");
                let (left, left_ms) = built.pop().expect("assembly follows two expansions");
                let index = if mode.checked() {
                    let real = left_ms.union(right_ms).insert(root.clone());
                    if !real.fingerprint_eq(&claim) {
                        return Err(SchemeError::IndexMismatch(
                            "assembled subheap does not carry its claimed index",
                        ));
                    }
                    real
                } else {
                    Multiset::new()
                };
                built.push((
                    Some(std::sync::Arc::new(crate::functors::HeapNode {
                        root,
                        left,
                        right,
                        index: index.clone(),
                    })),
                    index,
                ));
            }
        }
    }
    let (root, _) = built.pop().expect("heap production built exactly one heap");
    Ok(MinHeap { root })
}

/// Fold a heap bottom-up; the heap sibling of [`fold_tree`].
pub fn fold_heap<T, X, A>(h: MinHeap<T>, mut alg: A) -> Result<X, SchemeError>
where
    T: Element,
    A: FnMut(HeapStep<T, X>) -> Result<X, SchemeError>,
{
    enum Task<T: Element> {
        Expand(crate::functors::HeapLink<T>),
        Combine {
            root: T,
            left_index: Multiset<T>,
            right_index: Multiset<T>,
        },
    }
    let mut tasks = vec![Task::Expand(h.take_root())];
    let mut results: Vec<X> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            Task::Expand(None) => results.push(alg(HeapStep::Leaf)?),
            Task::Expand(Some(node)) => {
                let node =
                    std::sync::Arc::try_unwrap(node).unwrap_or_else(|shared| (*shared).clone());
                let left_index = node
                    .left
                    .as_ref()
                    .map(|n| n.index.clone())
                    .unwrap_or_default();
                let right_index = node
                    .right
                    .as_ref()
                    .map(|n| n.index.clone())
                    .unwrap_or_default();
                tasks.push(Task::Combine {
                    root: node.root,
                    left_index,
                    right_index,
                });
                tasks.push(Task::Expand(node.right));
                tasks.push(Task::Expand(node.left));
            }
            Task::Combine {
                root,
                left_index,
                right_index,
            } => {
                let right = results.pop().expect("combine follows two expansions");
                let left = results.pop().expect("combine follows two expansions");
                results.push(alg(HeapStep::Node {
                    root,
                    left,
                    right,
                    left_index,
                    right_index,
                })?);
            }
        }
    }
    Ok(results.pop().expect("fold produced exactly one result"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::elements_of;

    fn plain(xs: &[i64]) -> PlainList<i64> {
        PlainList::from_vec(xs.to_vec())
    }

    /// Straightforward min-extraction coalgebra over a multiset seed; the
    /// reference "honest producer" for the unfold tests.
    fn min_stream(s: Multiset<i64>) -> Result<OrderedStep<i64, Multiset<i64>>, SchemeError> {
        match s.min().cloned() {
            None => Ok(OrderedStep::Nil),
            Some(m) => {
                let rest = s.remove_one(&m).expect("min is present");
                Ok(OrderedStep::Cons {
                    head: m,
                    tail: rest.clone(),
                    tail_index: rest,
                })
            }
        }
    }

    #[test]
    fn fold_computes_length() {
        let n = fold_list(plain(&[4, 2, 7]), |step| {
            Ok(match step {
                ListStep::Nil => 0usize,
                ListStep::Cons(_, n) => n + 1,
            })
        })
        .unwrap();
        assert_eq!(n, 3);
    }

    #[test]
    fn fold_of_constructor_is_identity() {
        let xs = plain(&[3, 1, 2, 2]);
        let back = fold_list(xs.clone(), |step| Ok(PlainList::in_list(step))).unwrap();
        assert_eq!(back, xs);
    }

    #[test]
    fn para_exposes_original_tail() {
        let tail = para_list(plain(&[1, 2, 3]), |step| {
            Ok(match step {
                ListStep::Nil => PlainList::empty(),
                ListStep::Cons(_, (orig_tail, _)) => orig_tail,
            })
        })
        .unwrap();
        assert_eq!(tail.to_vec(), vec![2, 3]);
        assert!(tail.validate());
    }

    #[test]
    fn para_agrees_with_its_fold_encoding() {
        // para(p) must equal the second half of a fold that rebuilds the
        // list alongside running p.
        let xs = plain(&[2, 9, 4, 4, 1]);
        let sum_tails = |step: ListStep<i64, (PlainList<i64>, i64)>| {
            Ok(match step {
                ListStep::Nil => 0,
                ListStep::Cons(x, (orig, acc)) => x + orig.len() as i64 + acc,
            })
        };
        let direct = para_list(xs.clone(), sum_tails).unwrap();
        let encoded = fold_list(xs, |step: ListStep<i64, (PlainList<i64>, i64)>| {
            let rebuilt = PlainList::in_list(match &step {
                ListStep::Nil => ListStep::Nil,
                ListStep::Cons(x, (orig, _)) => ListStep::Cons(x.clone(), orig.clone()),
            });
            let value = sum_tails(step)?;
            Ok((rebuilt, value))
        })
        .unwrap()
        .1;
        assert_eq!(direct, encoded);
    }

    #[test]
    fn unfold_sorts_via_min_extraction() {
        let index = elements_of(&[3, 1, 2]);
        let calls = std::cell::Cell::new(0usize);
        let out = unfold_olist(
            Mode::Checked,
            Indexed::new(index.clone(), index.clone()),
            |s| {
                calls.set(calls.get() + 1);
                min_stream(s)
            },
        )
        .unwrap();
        assert_eq!(out.to_vec(), vec![1, 2, 3]);
        assert_eq!(out.index(), &index);
        assert!(out.validate());
        assert_eq!(calls.get(), 4, "one application per element plus the close");
    }

    #[test]
    fn empty_index_forces_nil() {
        let out = unfold_olist(
            Mode::Checked,
            Indexed::new(Multiset::<i64>::new(), Multiset::new()),
            min_stream,
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn constant_stream_is_caught() {
        // Emits 7 forever without shrinking anything.
        let index = elements_of(&[7, 7, 7]);
        let stream = |s: Multiset<i64>| {
            Ok(OrderedStep::Cons {
                head: 7,
                tail: s.clone(),
                tail_index: s,
            })
        };
        let checked = unfold_olist(
            Mode::Checked,
            Indexed::new(index.clone(), index.clone()),
            stream,
        );
        // The claimed residual never shrinks, so the very first step lies.
        assert!(matches!(checked, Err(SchemeError::IndexMismatch(_))));
        let trusted = unfold_olist(Mode::Trusted, Indexed::new(index.clone(), index), stream);
        assert!(matches!(trusted, Err(SchemeError::FuelExhausted(_))));
    }

    #[test]
    fn premature_nil_is_caught() {
        let index = elements_of(&[1, 2]);
        let out = unfold_olist(
            Mode::Checked,
            Indexed::new(index.clone(), index),
            |_: Multiset<i64>| Ok(OrderedStep::Nil),
        );
        assert!(matches!(out, Err(SchemeError::IndexMismatch(_))));
    }

    #[test]
    fn foreign_element_is_caught() {
        let index = elements_of(&[1, 2]);
        let out = unfold_olist(Mode::Checked, Indexed::new(index.clone(), index), |s| {
            Ok(OrderedStep::Cons {
                head: 99,
                tail: s.clone(),
                tail_index: s,
            })
        });
        assert!(matches!(out, Err(SchemeError::IndexMismatch(_))));
    }

    #[test]
    fn out_of_order_emission_is_caught() {
        // Emits max first: the index arithmetic is right, the order wrong.
        let index = elements_of(&[1, 2]);
        let out = unfold_olist(
            Mode::Checked,
            Indexed::new(index.clone(), index),
            |s: Multiset<i64>| match s.max().cloned() {
                None => Ok(OrderedStep::Nil),
                Some(m) => {
                    let rest = s.remove_one(&m).expect("max is present");
                    Ok(OrderedStep::Cons {
                        head: m,
                        tail: rest.clone(),
                        tail_index: rest,
                    })
                }
            },
        );
        assert!(matches!(out, Err(SchemeError::EvidenceViolation(_))));
    }

    #[test]
    fn unfold_of_destructor_is_identity() {
        let sorted = unfold_olist(
            Mode::Checked,
            Indexed::new(elements_of(&[1, 2, 3]), elements_of(&[1, 2, 3])),
            min_stream,
        )
        .unwrap();
        let back = unfold_olist(
            Mode::Checked,
            Indexed::new(sorted.clone(), sorted.index().clone()),
            |ol: OrderedList<i64>| Ok(ol.out_olist()),
        )
        .unwrap();
        assert_eq!(back, sorted);
    }

    #[test]
    fn apo_splices_a_finished_list() {
        // Emit the minimum once, then hand the remainder back finished.
        let index = elements_of(&[5, 1, 3]);
        let pre_sorted = unfold_olist(
            Mode::Checked,
            Indexed::new(elements_of(&[3, 5]), elements_of(&[3, 5])),
            min_stream,
        )
        .unwrap();
        let out = apo_olist(
            Mode::Checked,
            Indexed::new(index.clone(), index),
            move |s: Multiset<i64>| {
                let m = s.min().cloned().expect("nonempty");
                Ok(OrderedStep::Cons {
                    head: m,
                    tail_index: pre_sorted.index().clone(),
                    tail: Either::Left(pre_sorted.clone()),
                })
            },
        )
        .unwrap();
        assert_eq!(out.to_vec(), vec![1, 3, 5]);
        assert!(out.validate());
    }

    #[test]
    fn apo_rejects_a_lying_splice() {
        // The spliced carrier holds {3,5}; the claim says {3,5} too, but
        // the residual truth is {2,3}: caught against the truth.
        let index = elements_of(&[1, 2, 3]);
        let foreign = unfold_olist(
            Mode::Checked,
            Indexed::new(elements_of(&[3, 5]), elements_of(&[3, 5])),
            min_stream,
        )
        .unwrap();
        let out = apo_olist(
            Mode::Checked,
            Indexed::new(index.clone(), index),
            move |s: Multiset<i64>| {
                let m = s.min().cloned().expect("nonempty");
                Ok(OrderedStep::Cons {
                    head: m,
                    tail_index: foreign.index().clone(),
                    tail: Either::Left(foreign.clone()),
                })
            },
        );
        assert!(matches!(out, Err(SchemeError::IndexMismatch(_))));
    }

    #[test]
    fn apo_rejects_a_stale_claim_on_the_splice() {
        // Claim matches the residual, but the carrier does not match the
        // claim: caught against the carrier's stored index.
        let index = elements_of(&[1, 2, 3]);
        let foreign = unfold_olist(
            Mode::Checked,
            Indexed::new(elements_of(&[3, 5]), elements_of(&[3, 5])),
            min_stream,
        )
        .unwrap();
        let out = apo_olist(
            Mode::Checked,
            Indexed::new(index.clone(), index),
            move |s: Multiset<i64>| {
                let m = s.min().cloned().expect("nonempty");
                let rest = s.remove_one(&m).expect("min is present");
                Ok(OrderedStep::Cons {
                    head: m,
                    tail_index: rest,
                    tail: Either::Left(foreign.clone()),
                })
            },
        );
        assert!(matches!(out, Err(SchemeError::IndexMismatch(_))));
    }

    /// Head-pivot partition coalgebra over a plain vector seed.
    fn partition(s: Vec<i64>) -> Result<TreeStep<i64, Vec<i64>>, SchemeError> {
        match s.split_first() {
            None => Ok(TreeStep::Leaf),
            Some((&pivot, rest)) => {
                let left: Vec<i64> = rest.iter().copied().filter(|&x| x <= pivot).collect();
                let right: Vec<i64> = rest.iter().copied().filter(|&x| x > pivot).collect();
                Ok(TreeStep::Node {
                    left_index: elements_of(&left),
                    right_index: elements_of(&right),
                    left,
                    pivot,
                    right,
                })
            }
        }
    }

    #[test]
    fn unfold_tree_partitions() {
        let seed = vec![2, 1, 3];
        let t = unfold_tree(
            Mode::Checked,
            Indexed::new(seed.clone(), elements_of(&seed)),
            partition,
        )
        .unwrap();
        assert!(t.validate());
        assert_eq!(format!("{t:?}"), "((. 1 .) 2 (. 3 .))");
        assert_eq!(t.index(), elements_of(&[1, 2, 3]));
    }

    #[test]
    fn unfold_tree_rejects_dropped_elements() {
        // Claims conserve but the right partition is simply discarded.
        let seed = vec![2, 1, 3];
        let out = unfold_tree(
            Mode::Checked,
            Indexed::new(seed.clone(), elements_of(&seed)),
            |s: Vec<i64>| match s.split_first() {
                None => Ok(TreeStep::Leaf),
                Some((&pivot, rest)) => Ok(TreeStep::Node {
                    left_index: elements_of(rest),
                    right_index: Multiset::new(),
                    left: rest.to_vec(),
                    pivot,
                    right: Vec::new(),
                }),
            },
        );
        assert!(out.is_err());
    }

    #[test]
    fn unfold_tree_rejects_foreign_pivot() {
        let out = unfold_tree(
            Mode::Checked,
            Indexed::new(vec![1, 2], elements_of(&[1, 2])),
            |_s: Vec<i64>| {
                Ok(TreeStep::Node {
                    left_index: elements_of(&[1]),
                    right_index: Multiset::new(),
                    left: vec![1],
                    pivot: 42,
                    right: Vec::new(),
                })
            },
        );
        assert!(matches!(out, Err(SchemeError::IndexMismatch(_))));
    }

    #[test]
    fn divergent_tree_coalgebra_hits_fuel_in_trusted_mode() {
        let out = unfold_tree(
            Mode::Trusted,
            Indexed::new(vec![1, 2, 3], elements_of(&[1, 2, 3])),
            |s: Vec<i64>| {
                Ok(TreeStep::Node {
                    left_index: Multiset::new(),
                    right_index: Multiset::new(),
                    left: s.clone(),
                    pivot: 1,
                    right: s,
                })
            },
        );
        assert!(matches!(out, Err(SchemeError::FuelExhausted(_))));
    }

    #[test]
    fn fold_tree_collects_in_order() {
        let t = unfold_tree(
            Mode::Checked,
            Indexed::new(vec![4, 2, 6, 1, 3, 5, 7], elements_of(&[1, 2, 3, 4, 5, 6, 7])),
            partition,
        )
        .unwrap();
        let collected = fold_tree(t, |step: TreeStep<i64, Vec<i64>>| {
            Ok(match step {
                TreeStep::Leaf => Vec::new(),
                TreeStep::Node {
                    left, pivot, right, ..
                } => {
                    let mut v = left;
                    v.push(pivot);
                    v.extend(right);
                    v
                }
            })
        })
        .unwrap();
        assert_eq!(collected, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn para_tree_sees_subtrees() {
        let t = unfold_tree(
            Mode::Checked,
            Indexed::new(vec![2, 1, 3], elements_of(&[1, 2, 3])),
            partition,
        )
        .unwrap();
        // Collect each pivot with the size of its original left subtree.
        type Pairs = Vec<(i64, usize)>;
        let pairs = para_tree(t, |step: TreeStep<i64, (SearchTree<i64>, Pairs)>| {
            Ok(match step {
                TreeStep::Leaf => Vec::new(),
                TreeStep::Node {
                    left: (orig, mut acc),
                    pivot,
                    right: (_, racc),
                    ..
                } => {
                    acc.push((pivot, orig.len()));
                    acc.extend(racc);
                    acc
                }
            })
        })
        .unwrap();
        assert_eq!(pairs, vec![(1, 0), (2, 1), (3, 0)]);
    }

    #[test]
    fn apo_tree_rejects_mismatched_splice() {
        let donor = unfold_tree(
            Mode::Checked,
            Indexed::new(vec![9], elements_of(&[9])),
            partition,
        )
        .unwrap();
        // Claim position {1} but splice a {9} subtree.
        let out = apo_tree(
            Mode::Checked,
            Indexed::new(vec![2, 1], elements_of(&[1, 2])),
            move |_s: Vec<i64>| {
                Ok(TreeStep::Node {
                    left_index: elements_of(&[1]),
                    right_index: Multiset::new(),
                    left: Either::Left(donor.clone()),
                    pivot: 2,
                    right: Either::Left(SearchTree::leaf()),
                })
            },
        );
        assert!(matches!(out, Err(SchemeError::IndexMismatch(_))));
    }

    #[test]
    fn heap_production_checks_root_bound() {
        // A "heap" whose root is its maximum is rejected at the first node.
        let out = unfold_heap(
            Mode::Checked,
            Indexed::new(vec![1, 9], elements_of(&[1, 9])),
            |s: Vec<i64>| match s.split_first() {
                None => Ok(HeapStep::Leaf),
                Some((&root, rest)) => Ok(HeapStep::Node {
                    left_index: elements_of(rest),
                    right_index: Multiset::new(),
                    root: root.max(*rest.iter().max().unwrap_or(&root)) + 1,
                    left: rest.to_vec(),
                    right: Vec::new(),
                }),
            },
        );
        assert!(out.is_err());

        let good = unfold_heap(
            Mode::Checked,
            Indexed::new(vec![9, 1, 5], elements_of(&[1, 5, 9])),
            |mut s: Vec<i64>| {
                s.sort();
                match s.split_first() {
                    None => Ok(HeapStep::Leaf),
                    Some((&root, rest)) => Ok(HeapStep::Node {
                        left_index: elements_of(rest),
                        right_index: Multiset::new(),
                        root,
                        left: rest.to_vec(),
                        right: Vec::new(),
                    }),
                }
            },
        )
        .unwrap();
        assert!(good.validate());
        assert_eq!(good.peek_min(), Some(&1));
        assert_eq!(good.index(), elements_of(&[1, 5, 9]));
    }

    #[test]
    fn fold_heap_reaches_every_element() {
        let h = unfold_heap(
            Mode::Checked,
            Indexed::new(vec![3, 1, 2], elements_of(&[1, 2, 3])),
            |mut s: Vec<i64>| {
                s.sort();
                match s.split_first() {
                    None => Ok(HeapStep::Leaf),
                    Some((&root, rest)) => {
                        let (l, r) = rest.split_at(rest.len() / 2);
                        Ok(HeapStep::Node {
                            left_index: elements_of(l),
                            right_index: elements_of(r),
                            root,
                            left: l.to_vec(),
                            right: r.to_vec(),
                        })
                    }
                }
            },
        )
        .unwrap();
        let sum = fold_heap(h, |step| {
            Ok(match step {
                HeapStep::Leaf => 0,
                HeapStep::Node {
                    root, left, right, ..
                } => root + left + right,
            })
        })
        .unwrap();
        assert_eq!(sum, 6);
    }
}
