//! Enrichment check for functors between categories of finite structures.

use crate::error::{Error, Result};
use crate::horn::structure::{PreStructure, Signature};
use crate::par::Budget;
use crate::structops::closed::internal_hom;
use crate::structops::hom::{compose, hom_maps};

/// A structure-to-structure map with an action on morphisms.
pub trait StructureFunctor {
    fn object(&self, x: &PreStructure) -> Result<PreStructure>;
    /// Image of the morphism `f: x → y`, as a carrier map `F x → F y`.
    fn morphism(&self, x: &PreStructure, y: &PreStructure, f: &[usize]) -> Result<Vec<usize>>;
}

pub struct IdentityFunctor;

impl StructureFunctor for IdentityFunctor {
    fn object(&self, x: &PreStructure) -> Result<PreStructure> {
        Ok(x.clone())
    }

    fn morphism(&self, _: &PreStructure, _: &PreStructure, f: &[usize]) -> Result<Vec<usize>> {
        Ok(f.to_vec())
    }
}

/// Constant functor onto a fixed structure, sending morphisms to the identity.
pub struct ConstantFunctor(pub PreStructure);

impl StructureFunctor for ConstantFunctor {
    fn object(&self, _: &PreStructure) -> Result<PreStructure> {
        Ok(self.0.clone())
    }

    fn morphism(&self, _: &PreStructure, _: &PreStructure, _: &[usize]) -> Result<Vec<usize>> {
        Ok((0..self.0.size()).collect())
    }
}

fn check_functorial<F: StructureFunctor + ?Sized>(
    functor: &F,
    x: &PreStructure,
    y: &PreStructure,
    budget: Budget,
) -> Result<()> {
    let fx = functor.object(x)?;
    let fy = functor.object(y)?;
    let id: Vec<usize> = (0..x.size()).collect();
    if functor.morphism(x, x, &id)? != (0..fx.size()).collect::<Vec<_>>() {
        return Err(Error::Functoriality("identity is not preserved".into()));
    }
    let xy = hom_maps(x, y, budget)?;
    let yx = hom_maps(y, x, budget)?;
    for f in &xy {
        let ff = functor.morphism(x, y, f)?;
        if ff.len() != fx.size() || ff.iter().any(|&p| p >= fy.size()) || !fx.preserves(&fy, &ff) {
            return Err(Error::Functoriality("image of a morphism is not a morphism".into()));
        }
        for g in &yx {
            let lhs = functor.morphism(x, x, &compose(f, g))?;
            let rhs = compose(&ff, &functor.morphism(y, x, g)?);
            if lhs != rhs {
                return Err(Error::Functoriality("composition is not preserved".into()));
            }
        }
    }
    Ok(())
}

/// Whether `functor` maps every edge of `[x, y]` to an edge of
/// `[F x, F y]`. Violations of functoriality on the samples are reported as
/// errors.
pub fn check_enriched<F: StructureFunctor + ?Sized>(
    functor: &F,
    sig: &Signature,
    x: &PreStructure,
    y: &PreStructure,
    budget: Budget,
) -> Result<bool> {
    check_functorial(functor, x, y, budget)?;
    let hom = internal_hom(sig, x, y, budget)?;
    let fx = functor.object(x)?;
    let fy = functor.object(y)?;
    let images: Vec<Vec<usize>> = hom.maps.iter().map(|f| functor.morphism(x, y, f)).collect::<Result<_>>()?;
    let enriched = hom.structure.edges().iter().all(|e| {
        (0..fx.size()).all(|p| {
            let mut img = e.clone();
            img.points = e.points.iter().map(|&i| images[i][p]).collect();
            fy.edges().contains(&img)
        })
    });
    Ok(enriched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::builtin;
    use crate::horn::structure::{Edge, EdgeSet};

    #[test]
    fn identity_and_constant_are_enriched() {
        let pos = builtin::pos().unwrap();
        let es: EdgeSet = [(0, 0), (1, 1), (0, 1)].iter().map(|&(a, b)| Edge::plain(0, vec![a, b])).collect();
        let c = PreStructure::discrete(["a", "b"]).with_edges(es);
        assert!(check_enriched(&IdentityFunctor, &pos.signature, &c, &c, Budget::default()).unwrap());
        let pt = PreStructure::discrete(["*"]).with_edges([Edge::plain(0, vec![0, 0])].into_iter().collect());
        assert!(check_enriched(&ConstantFunctor(pt), &pos.signature, &c, &c, Budget::default()).unwrap());
    }
}
