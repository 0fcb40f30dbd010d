//! Relational algebraic theories over finite structures.
//!
//! Horn theories over relational signatures are saturated and reflected on
//! finite carriers; on top of them sit algebras for signatures with
//! structured arities, a proof system with checkable proof trees, truncated
//! free algebras and the extraction of theories from monads.

pub mod catalog;
pub mod error;
pub mod extract;
pub mod free;
pub mod horn;
pub mod logic;
pub mod par;
pub mod rational;
pub mod sigma;
pub mod structops;

pub use error::{Error, Result};
pub use rational::{Bound, Rat};
