//! Polar code toolbox for designing nested, rate-compatible symmetric
//! code sequences.
//!
//! The crate covers the full pipeline:
//!
//! * [`code`] / [`upo`] / [`transform`] — information sets, the universal
//!   partial order on synthetic channels, code enumeration, nesting, and
//!   polar encoding.
//! * [`symmetry`] — block profiles and stabilizers of information sets,
//!   and sampling of block-lower-triangular affine automorphisms.
//! * [`decode`] — successive cancellation decoding and automorphism
//!   ensemble SC decoding with maximum-likelihood selection.
//! * [`channel`] — BPSK/AWGN simulation, Monte-Carlo block-error-rate
//!   estimation, required-SNR search, and Gaussian-approximation density
//!   evolution.
//! * [`design`] — the graph search over (code, zero-padding) designs that
//!   produces rate-compatible sequences, its nested multi-length variant,
//!   and disambiguation into a single reliability order.
//! * [`files`] — the on-disk formats shared with the command-line tool.

pub mod channel;
pub mod code;
pub mod decode;
pub mod design;
pub mod error;
pub mod files;
pub mod gf2;
pub mod symmetry;
pub mod transform;
pub mod upo;

pub use code::{code_from_order, nested_subcodes, supercode, InformationSet, MinInfoSet, TotalOrder};
pub use error::{Error, Result};
pub use upo::{enumerate_upo_codes, min_info_set, upo_closure, upo_leq};
