//! Free algebras of derivably defined terms and the free-algebra monad.

pub mod approx;
pub mod monad;

pub use approx::{free_algebra, homomorphic_extensions, universal_extension, FreeAlgebraApprox, PartialTables};
pub use monad::{check_monad_laws, kleisli_extension, monad_unit, FreeMonad};
