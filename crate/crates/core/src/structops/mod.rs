//! Morphisms, internal homs, tensor products and related checks on finite
//! structures.

pub mod closed;
pub mod enriched;
pub mod generated;
pub mod hom;

pub use closed::{check_tensor_hom_adjunction, internal_hom, manhattan, pair_index, tensor, AdjunctionReport, InternalHom};
pub use enriched::{check_enriched, ConstantFunctor, IdentityFunctor, StructureFunctor};
pub use generated::{find_generating_subset, is_generated_by, GeneratednessWitness};
pub use hom::{all_isomorphisms, compose, find_isomorphism, hom_maps, is_embedding, morphisms, render_map, Morphism};
