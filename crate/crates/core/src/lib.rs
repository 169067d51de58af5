//! Mutually unbiased bases (MUBs) and promise quantum random access codes (pQRACs).
//!
//! The crate covers four connected tasks:
//!
//! - building complete MUB families in prime-power dimensions and measuring how
//!   unbiased an arbitrary set of bases is ([`bases`]),
//! - evaluating QRAC and pQRAC success probabilities for fixed measurement bases
//!   ([`games`]),
//! - searching for unbiased bases by alternating optimization of encodings and
//!   measurements ([`seesaw`]),
//! - upper-bounding pQRAC values with a group-symmetrized moment-matrix
//!   relaxation solved by a small interior-point SDP solver ([`hierarchy`], [`sdp`]).
//!
//! Everything is deterministic given its inputs and seeds; see [`numerics::random`]
//! for how random streams are derived.

pub mod bases;
pub mod error;
pub mod experiments;
pub mod games;
pub mod hierarchy;
pub mod numerics;
pub mod sdp;
pub mod seesaw;

pub use error::{Error, Result};

pub(crate) mod par {
    //! Order-preserving parallel map, sequential when the `parallel` feature is off.

    #[cfg(feature = "parallel")]
    pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        F: Fn(&T) -> R,
    {
        items.iter().map(f).collect()
    }
}
