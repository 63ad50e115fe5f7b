//! Sorting algorithms that carry their own correctness bookkeeping.
//!
//! Every structure in this crate is indexed by the multiset of elements it
//! contains, and every construction step states what that index will be.
//! In checked mode the claims are verified as the structures are built; in
//! trusted mode they are skipped for speed. One pair of element-routing
//! rules yields insertion and selection sort; a second pair yields four
//! tree sorts and heapsort. See the module docs for the layering.

pub mod algorithms;
pub mod core;
pub mod functors;
pub mod laws;
pub mod schemes;
pub mod seq;
