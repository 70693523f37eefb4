//! Workbench for circular traces of sparse binary strings.
//!
//! A k-sparse circular binary string is written in gap form as the tuple of
//! zero-run lengths between consecutive ones, `x = 1 0^{x_1} 1 0^{x_2} ... 1 0^{x_k}`
//! read cyclically. The deletion channel drops every bit independently with
//! probability `p` and then applies a uniformly random cyclic shift, so a trace
//! carries no alignment information.
//!
//! The crate provides:
//!
//! - [`gapseq`]: conversions between gap tuples and bit strings, cyclic
//!   equality and canonical rotations;
//! - [`cyclicstats`]: cyclic power-sum statistics mod a divisor of k, the
//!   order-6 separation check, and exhaustive verification at small sizes;
//! - [`fourier`]: DFT spectra of gap tuples, gcd classes of coefficients, and
//!   the number theory (coprime sum representations, CRT) behind the
//!   zero-pattern arguments;
//! - [`channel`]: trace sampling, exact trace probabilities in rational
//!   arithmetic, and a brute-force distribution oracle;
//! - [`partition`]: threshold clustering of scaled gap values with
//!   deterministic labels;
//! - [`distinguish`]: the two trace-based testers that decide which of two
//!   known strings a stream of traces came from;
//! - [`lowerbound`]: statistic-matched pair constructions, exact probability
//!   ratios, and the Hellinger sample-count bound.

pub mod channel;
pub mod cyclicstats;
pub mod distinguish;
pub mod fourier;
pub mod gapseq;
pub mod lowerbound;
pub mod partition;

pub use gapseq::{BinaryString, GapSequence};
