//! Operation signatures with structured arities, Σ-algebras on finite
//! models, varieties and the algebra enumerator.

pub mod algebra;
pub mod construct;
pub mod enumerate;
pub mod term;
pub mod variety;

pub use algebra::{is_homomorphism, Interp, SigmaAlgebra, Table};
pub use construct::{product_algebra, subalgebra_check};
pub use enumerate::{carrier_palette, enumerate_algebras, point_names, Palette};
pub use term::{terms_up_to, OpSignature, OpSymbol, Term};
pub use variety::{counterexample, holds_at, in_variety, satisfies, violated_axiom, SigmaRelation, TermEdge, Variety};
