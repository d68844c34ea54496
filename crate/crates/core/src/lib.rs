//! Cyclically covering subspaces of F_q^n.
//!
//! A vector v *works* if every x ∈ F_q^n has a cyclic shift orthogonal to v; vectors *work
//! together* if one shift serves all of them simultaneously. h_q(n) is the largest number
//! of independent vectors that work together, equivalently the largest codimension of a
//! subspace whose cyclic shifts cover F_q^n.

pub mod bits;
pub mod bounds;
pub mod cayley;
pub mod cli;
pub mod conjecture;
pub mod covering;
pub mod error;
pub mod gf;
pub mod poly;
pub mod search;

pub use error::{Error, Result};
pub use gf::{Ambient, Basis, CycVec};
