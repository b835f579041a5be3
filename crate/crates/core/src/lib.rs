//! Index for grammar-compressed (SLP) strings supporting constant-work
//! random access and longest-common-extension queries.
//!
//! The pipeline: restructure the grammar so the string factors into short
//! blocks ([`restructure`]), nest decompositions into layers with explicit
//! strings at the bottom ([`block_index`]), then attach difference-cover
//! sampled LCE structures per layer ([`lce_index`]). Everything is checked
//! against brute-force oracles in [`slp`].

pub mod block_index;
pub mod diffcover;
pub mod format;
pub mod index_file;
pub mod lce_core;
pub mod lce_index;
pub mod repair;
pub mod restructure;
pub mod slp;
pub mod synth;

pub use block_index::{LayerParams, LayeredIndex, SpaceReport};
pub use diffcover::DifferenceCover;
pub use index_file::SlpIndex;
pub use lce_core::{FullLce, SparseLce};
pub use lce_index::LceIndex;
pub use restructure::{decompose, BlockDecomposition};
pub use slp::{Rule, Slp, Symbol};

#[cfg(test)]
mod concurrency_contract {
    // Indexes are immutable after construction; shared references must be
    // usable from any thread.
    fn readable_everywhere<T: Send + Sync>() {}

    #[test]
    fn index_types_are_share_safe() {
        readable_everywhere::<crate::Slp>();
        readable_everywhere::<crate::BlockDecomposition>();
        readable_everywhere::<crate::LayeredIndex>();
        readable_everywhere::<crate::LceIndex>();
        readable_everywhere::<crate::SlpIndex>();
        readable_everywhere::<crate::DifferenceCover>();
        readable_everywhere::<crate::FullLce>();
        readable_everywhere::<crate::SparseLce>();
    }
}
