//! The deduction system for relational judgements over terms: proof
//! objects, the checker, bounded saturation and the admissible rules.

pub mod admissible;
pub mod bank;
pub mod calculus;
pub mod fuzz;

pub use admissible::{admissible_arity, admissible_subterm, admissible_substitute};
pub use bank::{derive, saturate_judgements, BankConfig, Derived, JudgementBank, Scope, TermId};
pub use calculus::{check_proof, rule_instance, subterm_at, Calculus, IArEntry, Judgement, Proof, Rule};
pub use fuzz::{apply_mutation, mutation_sites, Mutation};
