//! Theories read off from monads on finite models.

pub mod induced;
pub mod oracle;

pub use induced::{canonical_algebra, induce_theory, verify_roundtrip, AxiomFamily, InducedTheory, RoundtripReport};
pub use oracle::{
    check_kleisli_laws, IdentityMonad, KleisliLaw, LawReport, LawViolation, MonadFunctor, MonadOracle, RegisteredOracle,
};
