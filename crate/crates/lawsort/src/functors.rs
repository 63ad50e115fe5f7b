//! Step shapes and the carriers built from them.
//!
//! Each recursive structure in this library is described one layer at a
//! time by a step value: a list layer, an ordered-list layer, a search-tree
//! layer, a heap layer. Step values are plain data, polymorphic in what
//! sits at the recursive positions, and they carry the multiset index of
//! each recursive position as an explicit field. That field is the ghost
//! data everything else checks against: the distributive laws derive their
//! output indices from it, and the schemes compare it per step against the
//! index they know to be true.
//!
//! The carriers ([`PlainList`], [`OrderedList`], [`SearchTree`],
//! [`MinHeap`]) tie the step shapes closed and store real indices:
//! lists at the root, trees at every node. Construction goes through
//! mode-aware operations: [`Mode::Checked`] validates evidence and index
//! claims at every layer, [`Mode::Trusted`] skips the validation (and, for
//! the schemes, the per-node ghost bookkeeping) while keeping structure
//! and fuel bounds intact.

use std::fmt;
use std::sync::Arc;

use crate::core::{bound_check, Bound, Element, Multiset};
use crate::schemes::SchemeError;
use crate::seq::Seq;

/// Build mode, fixed once per run and threaded through every constructor
/// and scheme, never toggled per call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Validate evidence and index claims at every layer.
    Checked,
    /// Skip validation; termination fuel still applies. For benchmarks.
    Trusted,
}

impl Mode {
    pub fn checked(self) -> bool {
        matches!(self, Mode::Checked)
    }
}

/// Two-way sum, used by the apomorphisms: `Left` is a finished structure
/// spliced into the output, `Right` a seed to keep expanding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Either<A, B> {
    Left(A),
    Right(B),
}

/// A value paired with the multiset index it claims to have.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indexed<V, T: Element> {
    pub value: V,
    pub index: Multiset<T>,
}

impl<V, T: Element> Indexed<V, T> {
    pub fn new(value: V, index: Multiset<T>) -> Self {
        Indexed { value, index }
    }
}

/// Things that can report a multiset index for themselves.
pub trait HasIndex<T: Element> {
    fn index_of(&self) -> Multiset<T>;
}

impl<V, T: Element> HasIndex<T> for Indexed<V, T> {
    fn index_of(&self) -> Multiset<T> {
        self.index.clone()
    }
}

/// One layer of a plain list. No ordering constraint, so no index fields:
/// a list layer claims nothing beyond its shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ListStep<T, R> {
    Nil,
    Cons(T, R),
}

impl<T, R> ListStep<T, R> {
    pub fn map<R2>(self, mut f: impl FnMut(R) -> R2) -> ListStep<T, R2> {
        match self {
            ListStep::Nil => ListStep::Nil,
            ListStep::Cons(x, r) => ListStep::Cons(x, f(r)),
        }
    }
}

impl<T: Element, R: HasIndex<T>> ListStep<T, R> {
    /// Index of the whole layer: the element plus the tail's index.
    pub fn step_index(&self) -> Multiset<T> {
        match self {
            ListStep::Nil => Multiset::new(),
            ListStep::Cons(x, r) => r.index_of().insert(x.clone()),
        }
    }
}

/// One layer of an ordered list. `tail_index` is the claimed index of
/// `tail`; the head must bound it from below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderedStep<T: Element, R> {
    Nil,
    Cons {
        head: T,
        tail: R,
        tail_index: Multiset<T>,
    },
}

impl<T: Element, R> OrderedStep<T, R> {
    pub fn map<R2>(self, mut f: impl FnMut(R) -> R2) -> OrderedStep<T, R2> {
        match self {
            OrderedStep::Nil => OrderedStep::Nil,
            OrderedStep::Cons {
                head,
                tail,
                tail_index,
            } => OrderedStep::Cons {
                head,
                tail: f(tail),
                tail_index,
            },
        }
    }

    pub fn step_index(&self) -> Multiset<T> {
        match self {
            OrderedStep::Nil => Multiset::new(),
            OrderedStep::Cons {
                head, tail_index, ..
            } => tail_index.clone().insert(head.clone()),
        }
    }
}

/// One layer of a binary search tree: everything left of the pivot must
/// sit at or below it, everything right at or above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeStep<T: Element, R> {
    Leaf,
    Node {
        left: R,
        pivot: T,
        right: R,
        left_index: Multiset<T>,
        right_index: Multiset<T>,
    },
}

impl<T: Element, R> TreeStep<T, R> {
    pub fn map<R2>(self, mut f: impl FnMut(R) -> R2) -> TreeStep<T, R2> {
        match self {
            TreeStep::Leaf => TreeStep::Leaf,
            TreeStep::Node {
                left,
                pivot,
                right,
                left_index,
                right_index,
            } => TreeStep::Node {
                left: f(left),
                pivot,
                right: f(right),
                left_index,
                right_index,
            },
        }
    }

    pub fn step_index(&self) -> Multiset<T> {
        match self {
            TreeStep::Leaf => Multiset::new(),
            TreeStep::Node {
                pivot,
                left_index,
                right_index,
                ..
            } => left_index
                .clone()
                .union(right_index.clone())
                .insert(pivot.clone()),
        }
    }
}

/// One layer of a min-heap: the root must bound both children from below.
/// Siblings are unordered relative to each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeapStep<T: Element, R> {
    Leaf,
    Node {
        root: T,
        left: R,
        right: R,
        left_index: Multiset<T>,
        right_index: Multiset<T>,
    },
}

impl<T: Element, R> HeapStep<T, R> {
    pub fn map<R2>(self, mut f: impl FnMut(R) -> R2) -> HeapStep<T, R2> {
        match self {
            HeapStep::Leaf => HeapStep::Leaf,
            HeapStep::Node {
                root,
                left,
                right,
                left_index,
                right_index,
            } => HeapStep::Node {
                root,
                left: f(left),
                right: f(right),
                left_index,
                right_index,
            },
        }
    }

    pub fn step_index(&self) -> Multiset<T> {
        match self {
            HeapStep::Leaf => Multiset::new(),
            HeapStep::Node {
                root,
                left_index,
                right_index,
                ..
            } => left_index
                .clone()
                .union(right_index.clone())
                .insert(root.clone()),
        }
    }
}

/// A guaranteed-nonempty list layer, used to seed single insertions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsStep<T, R> {
    pub head: T,
    pub tail: R,
}

impl<T, R> ConsStep<T, R> {
    pub fn map<R2>(self, f: impl FnOnce(R) -> R2) -> ConsStep<T, R2> {
        ConsStep {
            head: self.head,
            tail: f(self.tail),
        }
    }
}

impl<T: Element, R: HasIndex<T>> ConsStep<T, R> {
    pub fn step_index(&self) -> Multiset<T> {
        self.tail.index_of().insert(self.head.clone())
    }
}

/// Build an ordered-list layer, verifying in checked mode that the head
/// bounds the tail's index from below.
pub fn mk_ocons<T: Element, R>(
    mode: Mode,
    head: T,
    tail: Indexed<R, T>,
) -> Result<OrderedStep<T, R>, SchemeError> {
    if mode.checked() && !bound_check(Bound::Below, &head, &tail.index) {
        return Err(SchemeError::EvidenceViolation(
            "ordered-list head exceeds an element of its tail",
        ));
    }
    Ok(OrderedStep::Cons {
        head,
        tail: tail.value,
        tail_index: tail.index,
    })
}

/// Build a search-tree layer, verifying in checked mode that the pivot
/// bounds the left index from above and the right index from below.
pub fn mk_tree_node<T: Element, R>(
    mode: Mode,
    left: Indexed<R, T>,
    pivot: T,
    right: Indexed<R, T>,
) -> Result<TreeStep<T, R>, SchemeError> {
    if mode.checked() {
        if !bound_check(Bound::Above, &pivot, &left.index) {
            return Err(SchemeError::EvidenceViolation(
                "tree pivot is below an element of its left subtree",
            ));
        }
        if !bound_check(Bound::Below, &pivot, &right.index) {
            return Err(SchemeError::EvidenceViolation(
                "tree pivot is above an element of its right subtree",
            ));
        }
    }
    Ok(TreeStep::Node {
        left: left.value,
        pivot,
        right: right.value,
        left_index: left.index,
        right_index: right.index,
    })
}

/// Build a heap layer, verifying in checked mode that the root bounds both
/// children's indices from below.
pub fn mk_heap_node<T: Element, R>(
    mode: Mode,
    root: T,
    left: Indexed<R, T>,
    right: Indexed<R, T>,
) -> Result<HeapStep<T, R>, SchemeError> {
    if mode.checked()
        && !(bound_check(Bound::Below, &root, &left.index)
            && bound_check(Bound::Below, &root, &right.index))
    {
        return Err(SchemeError::EvidenceViolation(
            "heap root is above an element of a child",
        ));
    }
    Ok(HeapStep::Node {
        root,
        left: left.value,
        right: right.value,
        left_index: left.index,
        right_index: right.index,
    })
}

/// An unconstrained list of elements together with its index. The index
/// adds nothing a list could violate; it is carried anyway so every
/// carrier answers the same questions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainList<T: Element> {
    items: Seq<T>,
    index: Multiset<T>,
}

impl<T: Element> PlainList<T> {
    pub fn empty() -> Self {
        PlainList {
            items: Seq::new(),
            index: Multiset::new(),
        }
    }

    pub fn from_vec(items: Vec<T>) -> Self {
        let index = items.iter().cloned().collect();
        PlainList {
            items: items.into_iter().collect(),
            index,
        }
    }

    pub(crate) fn from_parts(items: Seq<T>, index: Multiset<T>) -> Self {
        PlainList { items, index }
    }

    pub fn items(&self) -> &Seq<T> {
        &self.items
    }

    pub fn index(&self) -> &Multiset<T> {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.items.to_vec()
    }

    /// Close one list layer over carriers.
    pub fn in_list(step: ListStep<T, PlainList<T>>) -> PlainList<T> {
        match step {
            ListStep::Nil => PlainList::empty(),
            ListStep::Cons(x, tail) => PlainList {
                index: tail.index.insert(x.clone()),
                items: Seq::cons(x, tail.items),
            },
        }
    }

    /// Open one list layer. Consumes the list; the tail shares structure.
    pub fn out_list(self) -> ListStep<T, PlainList<T>> {
        match self.items.split_first() {
            None => ListStep::Nil,
            Some((head, tail)) => {
                let head = head.clone();
                let index = self
                    .index
                    .remove_one(&head)
                    .expect("list index tracks its items");
                ListStep::Cons(head, PlainList { items: tail, index })
            }
        }
    }

    /// True iff the stored index matches the stored items.
    pub fn validate(&self) -> bool {
        crate::core::elements_of(self.items.iter()) == self.index
    }
}

impl<T: Element> HasIndex<T> for PlainList<T> {
    fn index_of(&self) -> Multiset<T> {
        self.index.clone()
    }
}

/// A nondecreasing list of elements with its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedList<T: Element> {
    items: Seq<T>,
    index: Multiset<T>,
}

impl<T: Element> OrderedList<T> {
    pub fn empty() -> Self {
        OrderedList {
            items: Seq::new(),
            index: Multiset::new(),
        }
    }

    pub(crate) fn from_parts(items: Seq<T>, index: Multiset<T>) -> Self {
        OrderedList { items, index }
    }

    pub fn items(&self) -> &Seq<T> {
        &self.items
    }

    pub fn index(&self) -> &Multiset<T> {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn head(&self) -> Option<&T> {
        self.items.first()
    }

    /// Forget the ordering evidence: just the elements, in order.
    pub fn to_vec(&self) -> Vec<T> {
        self.items.to_vec()
    }

    /// Close one ordered layer. In checked mode the tail's claimed index
    /// must be consistent with the tail itself, and the head must bound it.
    pub fn in_olist(
        mode: Mode,
        step: OrderedStep<T, OrderedList<T>>,
    ) -> Result<OrderedList<T>, SchemeError> {
        match step {
            OrderedStep::Nil => Ok(OrderedList::empty()),
            OrderedStep::Cons {
                head,
                tail,
                tail_index,
            } => {
                if mode.checked() {
                    if !tail_index.fingerprint_eq(tail.index()) {
                        return Err(SchemeError::IndexMismatch(
                            "ordered-list layer claims a tail index its tail does not have",
                        ));
                    }
                    if !bound_check(Bound::Below, &head, &tail_index) {
                        return Err(SchemeError::EvidenceViolation(
                            "ordered-list head exceeds an element of its tail",
                        ));
                    }
                }
                Ok(OrderedList {
                    index: tail.index.insert(head.clone()),
                    items: Seq::cons(head, tail.items),
                })
            }
        }
    }

    /// Open one ordered layer. Consumes the list; the tail shares structure.
    pub fn out_olist(self) -> OrderedStep<T, OrderedList<T>> {
        match self.items.split_first() {
            None => OrderedStep::Nil,
            Some((head, tail)) => {
                let head = head.clone();
                let index = self
                    .index
                    .remove_one(&head)
                    .expect("ordered-list index tracks its items");
                OrderedStep::Cons {
                    head,
                    tail_index: index.clone(),
                    tail: OrderedList { items: tail, index },
                }
            }
        }
    }

    /// True iff the items are nondecreasing and the index matches them.
    pub fn validate(&self) -> bool {
        let sorted = self
            .items
            .iter()
            .zip(self.items.iter().skip(1))
            .all(|(a, b)| a <= b);
        sorted && crate::core::elements_of(self.items.iter()) == self.index
    }
}

impl<T: Element> HasIndex<T> for OrderedList<T> {
    fn index_of(&self) -> Multiset<T> {
        self.index.clone()
    }
}

pub(crate) struct TreeNode<T: Element> {
    pub(crate) left: TreeLink<T>,
    pub(crate) pivot: T,
    pub(crate) right: TreeLink<T>,
    /// Index of this whole subtree, pivot included. Empty means the node
    /// was built without ghost bookkeeping (trusted-mode schemes); a node
    /// always contains at least its pivot, so emptiness is unambiguous.
    pub(crate) index: Multiset<T>,
}

pub(crate) type TreeLink<T> = Option<Arc<TreeNode<T>>>;

impl<T: Element> Clone for TreeNode<T> {
    fn clone(&self) -> Self {
        TreeNode {
            left: self.left.clone(),
            pivot: self.pivot.clone(),
            right: self.right.clone(),
            index: self.index.clone(),
        }
    }
}

/// A binary search tree with a cached subtree index at every node.
/// Unbalanced on purpose: shape is wherever the insertion order and pivot
/// choices put it.
#[derive(Clone)]
pub struct SearchTree<T: Element> {
    pub(crate) root: TreeLink<T>,
}

impl<T: Element> SearchTree<T> {
    pub fn leaf() -> Self {
        SearchTree { root: None }
    }

    pub fn is_leaf(&self) -> bool {
        self.root.is_none()
    }

    /// Index of the whole tree. Empty for leaves and for trees built
    /// without ghost bookkeeping.
    pub fn index(&self) -> Multiset<T> {
        match &self.root {
            None => Multiset::new(),
            Some(node) => node.index.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.iter_count()
    }

    pub fn is_empty(&self) -> bool {
        self.is_leaf()
    }

    fn iter_count(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![&self.root];
        while let Some(link) = stack.pop() {
            if let Some(node) = link {
                n += 1;
                stack.push(&node.left);
                stack.push(&node.right);
            }
        }
        n
    }

    /// Rebuild every node's stored index bottom-up. Turns an untracked
    /// tree into a tracked one without touching its shape; the checked
    /// single-element operations use this to adopt trees built without
    /// bookkeeping.
    pub(crate) fn retracked(self) -> Self {
        enum Task<T: Element> {
            Expand(TreeLink<T>),
            Rebuild { pivot: T },
        }
        let mut tasks = vec![Task::Expand(self.take_root())];
        let mut done: Vec<(TreeLink<T>, Multiset<T>)> = Vec::new();
        while let Some(task) = tasks.pop() {
            match task {
                Task::Expand(None) => done.push((None, Multiset::new())),
                Task::Expand(Some(node)) => {
                    let node = Arc::try_unwrap(node).unwrap_or_else(|shared| (*shared).clone());
                    tasks.push(Task::Rebuild { pivot: node.pivot });
                    tasks.push(Task::Expand(node.right));
                    tasks.push(Task::Expand(node.left));
                }
                Task::Rebuild { pivot } => {
                    let (right, right_index) = done.pop().expect("right child rebuilt");
                    let (left, left_index) = done.pop().expect("left child rebuilt");
                    let index = left_index.union(right_index).insert(pivot.clone());
                    done.push((
                        Some(Arc::new(TreeNode {
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
        let (root, _) = done.pop().expect("whole tree rebuilt");
        SearchTree { root }
    }

    pub(crate) fn take_root(mut self) -> TreeLink<T> {
        self.root.take()
    }

    /// Close one tree layer. Checked mode verifies the claimed child
    /// indices against the children and the pivot bounds against the
    /// claims; trusted mode stores whatever was claimed.
    pub fn in_tree(
        mode: Mode,
        step: TreeStep<T, SearchTree<T>>,
    ) -> Result<SearchTree<T>, SchemeError> {
        match step {
            TreeStep::Leaf => Ok(SearchTree::leaf()),
            TreeStep::Node {
                left,
                pivot,
                right,
                left_index,
                right_index,
            } => {
                if mode.checked() {
                    if !left_index.fingerprint_eq(&left.index())
                        || !right_index.fingerprint_eq(&right.index())
                    {
                        return Err(SchemeError::IndexMismatch(
                            "tree layer claims a child index its child does not have",
                        ));
                    }
                    if !bound_check(Bound::Above, &pivot, &left_index) {
                        return Err(SchemeError::EvidenceViolation(
                            "tree pivot is below an element of its left subtree",
                        ));
                    }
                    if !bound_check(Bound::Below, &pivot, &right_index) {
                        return Err(SchemeError::EvidenceViolation(
                            "tree pivot is above an element of its right subtree",
                        ));
                    }
                }
                let index = left_index.union(right_index).insert(pivot.clone());
                Ok(SearchTree {
                    root: Some(Arc::new(TreeNode {
                        left: left.take_root(),
                        pivot,
                        right: right.take_root(),
                        index,
                    })),
                })
            }
        }
    }

    /// Open one tree layer. Consumes the tree; subtrees share structure.
    pub fn out_tree(self) -> TreeStep<T, SearchTree<T>> {
        match self.take_root() {
            None => TreeStep::Leaf,
            Some(node) => {
                let node = Arc::try_unwrap(node).unwrap_or_else(|rc| (*rc).clone());
                let left = SearchTree { root: node.left };
                let right = SearchTree { root: node.right };
                TreeStep::Node {
                    left_index: left.index(),
                    right_index: right.index(),
                    left,
                    pivot: node.pivot,
                    right,
                }
            }
        }
    }

    /// Deep check: every cached index matches the subtree below it (nodes
    /// built without bookkeeping are exempt from the index comparison) and
    /// every pivot actually separates its subtrees.
    pub fn validate(&self) -> bool {
        fn walk<T: Element>(link: &TreeLink<T>) -> Option<Multiset<T>> {
            match link {
                None => Some(Multiset::new()),
                Some(node) => {
                    let l = walk(&node.left)?;
                    let r = walk(&node.right)?;
                    if !bound_check(Bound::Above, &node.pivot, &l)
                        || !bound_check(Bound::Below, &node.pivot, &r)
                    {
                        return None;
                    }
                    let whole = l.union(r).insert(node.pivot.clone());
                    if !node.index.is_empty() && node.index != whole {
                        return None;
                    }
                    Some(whole)
                }
            }
        }
        // Recursion depth equals tree depth; validation is a test-and-desk
        // operation, run it on a dedicated stack when the tree may be deep.
        walk(&self.root).is_some()
    }
}

impl<T: Element> HasIndex<T> for SearchTree<T> {
    fn index_of(&self) -> Multiset<T> {
        self.index()
    }
}

impl<T: Element> Drop for SearchTree<T> {
    fn drop(&mut self) {
        // Unlink iteratively; a spine-shaped tree would otherwise recurse.
        let mut stack = Vec::new();
        if let Some(node) = self.root.take() {
            stack.push(node);
        }
        while let Some(node) = stack.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(node) {
                if let Some(l) = inner.left.take() {
                    stack.push(l);
                }
                if let Some(r) = inner.right.take() {
                    stack.push(r);
                }
            }
        }
    }
}

impl<T: Element + fmt::Debug> fmt::Debug for SearchTree<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn node<T: Element + fmt::Debug>(
            link: &TreeLink<T>,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            match link {
                None => write!(f, "."),
                Some(n) => {
                    write!(f, "(")?;
                    node(&n.left, f)?;
                    write!(f, " {:?} ", n.pivot)?;
                    node(&n.right, f)?;
                    write!(f, ")")
                }
            }
        }
        node(&self.root, f)
    }
}

impl<T: Element> PartialEq for SearchTree<T> {
    fn eq(&self, other: &Self) -> bool {
        fn eq_link<T: Element>(a: &TreeLink<T>, b: &TreeLink<T>) -> bool {
            match (a, b) {
                (None, None) => true,
                (Some(x), Some(y)) => {
                    x.pivot == y.pivot
                        && x.index == y.index
                        && eq_link(&x.left, &y.left)
                        && eq_link(&x.right, &y.right)
                }
                _ => false,
            }
        }
        eq_link(&self.root, &other.root)
    }
}

impl<T: Element> Eq for SearchTree<T> {}

pub(crate) struct HeapNode<T: Element> {
    pub(crate) root: T,
    pub(crate) left: HeapLink<T>,
    pub(crate) right: HeapLink<T>,
    /// Index of this whole subheap; empty means untracked, as for trees.
    pub(crate) index: Multiset<T>,
}

pub(crate) type HeapLink<T> = Option<Arc<HeapNode<T>>>;

impl<T: Element> Clone for HeapNode<T> {
    fn clone(&self) -> Self {
        HeapNode {
            root: self.root.clone(),
            left: self.left.clone(),
            right: self.right.clone(),
            index: self.index.clone(),
        }
    }
}

/// A min-heap-ordered binary tree with a cached subheap index per node.
#[derive(Clone)]
pub struct MinHeap<T: Element> {
    pub(crate) root: HeapLink<T>,
}

impl<T: Element> MinHeap<T> {
    pub fn leaf() -> Self {
        MinHeap { root: None }
    }

    pub fn is_leaf(&self) -> bool {
        self.root.is_none()
    }

    pub fn peek_min(&self) -> Option<&T> {
        self.root.as_ref().map(|n| &n.root)
    }

    pub fn index(&self) -> Multiset<T> {
        match &self.root {
            None => Multiset::new(),
            Some(node) => node.index.clone(),
        }
    }

    pub fn len(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![&self.root];
        while let Some(link) = stack.pop() {
            if let Some(node) = link {
                n += 1;
                stack.push(&node.left);
                stack.push(&node.right);
            }
        }
        n
    }

    pub fn is_empty(&self) -> bool {
        self.is_leaf()
    }

    /// Rebuild every node's stored index bottom-up; see
    /// [`SearchTree::retracked`].
    pub(crate) fn retracked(self) -> Self {
        enum Task<T: Element> {
            Expand(HeapLink<T>),
            Rebuild { root: T },
        }
        let mut tasks = vec![Task::Expand(self.take_root())];
        let mut done: Vec<(HeapLink<T>, Multiset<T>)> = Vec::new();
        while let Some(task) = tasks.pop() {
            match task {
                Task::Expand(None) => done.push((None, Multiset::new())),
                Task::Expand(Some(node)) => {
                    let node = Arc::try_unwrap(node).unwrap_or_else(|shared| (*shared).clone());
                    tasks.push(Task::Rebuild { root: node.root });
                    tasks.push(Task::Expand(node.right));
                    tasks.push(Task::Expand(node.left));
                }
                Task::Rebuild { root } => {
                    let (right, right_index) = done.pop().expect("right child rebuilt");
                    let (left, left_index) = done.pop().expect("left child rebuilt");
                    let index = left_index.union(right_index).insert(root.clone());
                    done.push((
                        Some(Arc::new(HeapNode {
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
        let (root, _) = done.pop().expect("whole heap rebuilt");
        MinHeap { root }
    }

    pub(crate) fn take_root(mut self) -> HeapLink<T> {
        self.root.take()
    }

    /// Close one heap layer; checks mirror [`SearchTree::in_tree`].
    pub fn in_heap(mode: Mode, step: HeapStep<T, MinHeap<T>>) -> Result<MinHeap<T>, SchemeError> {
        match step {
            HeapStep::Leaf => Ok(MinHeap::leaf()),
            HeapStep::Node {
                root,
                left,
                right,
                left_index,
                right_index,
            } => {
                if mode.checked() {
                    if !left_index.fingerprint_eq(&left.index())
                        || !right_index.fingerprint_eq(&right.index())
                    {
                        return Err(SchemeError::IndexMismatch(
                            "heap layer claims a child index its child does not have",
                        ));
                    }
                    if !(bound_check(Bound::Below, &root, &left_index)
                        && bound_check(Bound::Below, &root, &right_index))
                    {
                        return Err(SchemeError::EvidenceViolation(
                            "heap root is above an element of a child",
                        ));
                    }
                }
                let index = left_index.union(right_index).insert(root.clone());
                Ok(MinHeap {
                    root: Some(Arc::new(HeapNode {
                        root,
                        left: left.take_root(),
                        right: right.take_root(),
                        index,
                    })),
                })
            }
        }
    }

    /// Open one heap layer. Consumes the heap; subheaps share structure.
    pub fn out_heap(self) -> HeapStep<T, MinHeap<T>> {
        match self.take_root() {
            None => HeapStep::Leaf,
            Some(node) => {
                let node = Arc::try_unwrap(node).unwrap_or_else(|rc| (*rc).clone());
                let left = MinHeap { root: node.left };
                let right = MinHeap { root: node.right };
                HeapStep::Node {
                    left_index: left.index(),
                    right_index: right.index(),
                    root: node.root,
                    left,
                    right,
                }
            }
        }
    }

    /// Deep check of heap order and cached indices.
    pub fn validate(&self) -> bool {
        fn walk<T: Element>(link: &HeapLink<T>) -> Option<Multiset<T>> {
            match link {
                None => Some(Multiset::new()),
                Some(node) => {
                    let l = walk(&node.left)?;
                    let r = walk(&node.right)?;
                    if !(bound_check(Bound::Below, &node.root, &l)
                        && bound_check(Bound::Below, &node.root, &r))
                    {
                        return None;
                    }
                    let whole = l.union(r).insert(node.root.clone());
                    if !node.index.is_empty() && node.index != whole {
                        return None;
                    }
                    Some(whole)
                }
            }
        }
        walk(&self.root).is_some()
    }
}

impl<T: Element> HasIndex<T> for MinHeap<T> {
    fn index_of(&self) -> Multiset<T> {
        self.index()
    }
}

impl<T: Element> PartialEq for MinHeap<T> {
    fn eq(&self, other: &Self) -> bool {
        fn eq_link<T: Element>(a: &HeapLink<T>, b: &HeapLink<T>) -> bool {
            match (a, b) {
                (None, None) => true,
                (Some(x), Some(y)) => {
                    x.root == y.root
                        && x.index == y.index
                        && eq_link(&x.left, &y.left)
                        && eq_link(&x.right, &y.right)
                }
                _ => false,
            }
        }
        eq_link(&self.root, &other.root)
    }
}

impl<T: Element> Eq for MinHeap<T> {}

impl<T: Element> Drop for MinHeap<T> {
    fn drop(&mut self) {
        let mut stack = Vec::new();
        if let Some(node) = self.root.take() {
            stack.push(node);
        }
        while let Some(node) = stack.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(node) {
                if let Some(l) = inner.left.take() {
                    stack.push(l);
                }
                if let Some(r) = inner.right.take() {
                    stack.push(r);
                }
            }
        }
    }
}

impl<T: Element + fmt::Debug> fmt::Debug for MinHeap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn node<T: Element + fmt::Debug>(
            link: &HeapLink<T>,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            match link {
                None => write!(f, "."),
                Some(n) => {
                    write!(f, "[{:?} ", n.root)?;
                    node(&n.left, f)?;
                    write!(f, " ")?;
                    node(&n.right, f)?;
                    write!(f, "]")
                }
            }
        }
        node(&self.root, f)
    }
}
