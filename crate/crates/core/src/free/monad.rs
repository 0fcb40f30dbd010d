//! The free-algebra monad in Kleisli form.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::extract::oracle::{check_kleisli_laws, LawReport, MonadOracle};
use crate::free::approx::{universal_extension, FreeAlgebraApprox};
use crate::horn::structure::PreStructure;
use crate::horn::theory::HornTheory;
use crate::logic::Calculus;
use crate::par::Budget;
use crate::sigma::variety::Variety;

/// `X ↦ F X` at a fixed depth, with free algebras computed on demand and
/// cached.
pub struct FreeMonad {
    calc: Arc<Calculus>,
    depth: usize,
    budget: Budget,
    cache: RwLock<HashMap<PreStructure, Arc<FreeAlgebraApprox>>>,
}

impl FreeMonad {
    pub fn new(variety: &Arc<Variety>, depth: usize, budget: Budget) -> Result<FreeMonad> {
        Ok(FreeMonad {
            calc: Arc::new(Calculus::new(Arc::clone(variety))?),
            depth,
            budget,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn variety(&self) -> &Arc<Variety> {
        &self.calc.variety
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn free(&self, x: &PreStructure) -> Result<Arc<FreeAlgebraApprox>> {
        if let Some(f) = self.cache.read().expect("cache lock").get(x) {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(FreeAlgebraApprox::build(&self.calc, x, self.depth, self.budget)?);
        self.cache.write().expect("cache lock").insert(x.clone(), Arc::clone(&f));
        Ok(f)
    }

    /// The free algebra over `x`, refused unless it stabilized.
    pub fn stable(&self, x: &PreStructure) -> Result<Arc<FreeAlgebraApprox>> {
        let f = self.free(x)?;
        if !f.stabilized() {
            return Err(Error::NotStabilized(self.depth));
        }
        Ok(f)
    }
}

impl MonadOracle for FreeMonad {
    fn theory(&self) -> &Arc<HornTheory> {
        self.calc.variety.signature().theory()
    }

    fn object(&self, x: &PreStructure) -> Result<PreStructure> {
        Ok(self.stable(x)?.carrier().clone())
    }

    fn unit(&self, x: &PreStructure) -> Result<Vec<usize>> {
        Ok(monad_unit(&*self.stable(x)?))
    }

    fn extend(&self, x: &PreStructure, y: &PreStructure, f: &[usize]) -> Result<Vec<usize>> {
        kleisli_extension(&*self.stable(x)?, &*self.stable(y)?, f, self.budget)
    }
}

pub fn monad_unit(free: &FreeAlgebraApprox) -> Vec<usize> {
    free.unit().to_vec()
}

/// `f*: F X → F Y` for `f: X → |F Y|`.
pub fn kleisli_extension(
    fx: &FreeAlgebraApprox,
    fy: &FreeAlgebraApprox,
    f: &[usize],
    budget: Budget,
) -> Result<Vec<usize>> {
    if !fy.stabilized() {
        return Err(Error::NotStabilized(fy.depth()));
    }
    universal_extension(fx, f, fy.algebra()?, budget)
}

/// The three Kleisli laws and enrichment of the free-algebra monad over the
/// given objects.
pub fn check_monad_laws(variety: &Arc<Variety>, objects: &[PreStructure], depth: usize, budget: Budget) -> Result<LawReport> {
    let monad = FreeMonad::new(variety, depth, budget)?;
    check_kleisli_laws(&monad, objects, budget)
}
