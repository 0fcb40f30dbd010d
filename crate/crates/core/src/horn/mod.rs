//! Relational signatures, Horn theories, saturation and reflection.

pub mod builtin;
pub mod engine;
pub mod metric;
pub mod reflect;
pub mod structure;
pub mod theory;

pub use builtin::{builtin_theory, Builtin, PartialOp};
pub use engine::{check_derivation, entails, saturate, Derivation, Entailment, Fact, FactKey, Step};
pub use metric::{metric_to_structure, structure_to_metric};
pub use reflect::{is_model, reflect, Model, Reflection};
pub use structure::{Edge, EdgeSet, PreStructure, RelSymbol, Signature, SymId, SymbolKind};
pub use theory::{
    Atom, AtomSym, EqWitness, HornAxiom, HornTheory, IndexExpr, LatticeTable, LimitRule, SideCondition,
    SideRelation,
};
