//! Models and the reflection of pre-structures into models.

use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::horn::engine;
use crate::horn::structure::{EdgeSet, PreStructure};
use crate::horn::theory::HornTheory;

/// A pre-structure that satisfies its theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    underlying: PreStructure,
    theory: Arc<HornTheory>,
}

impl Model {
    /// Checks the model property.
    pub fn new(theory: Arc<HornTheory>, underlying: PreStructure) -> Result<Model> {
        if !is_model(&theory, &underlying) {
            return Err(Error::NotModel(format!("structure does not satisfy `{}`", theory.name)));
        }
        Ok(Model { underlying, theory })
    }

    pub fn underlying(&self) -> &PreStructure {
        &self.underlying
    }

    pub fn theory(&self) -> &Arc<HornTheory> {
        &self.theory
    }

    pub fn size(&self) -> usize {
        self.underlying.size()
    }

    pub fn edges(&self) -> &EdgeSet {
        self.underlying.edges()
    }

    pub fn into_underlying(self) -> PreStructure {
        self.underlying
    }
}

/// The reflection `R X` with its surjective quotient map `X → R X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reflection {
    pub model: Model,
    pub quotient: Vec<usize>,
}

/// Saturates, identifies points with derivable equalities and pushes the
/// saturated edges along the quotient. Classes are named by their member of
/// least index.
pub fn reflect(theory: &Arc<HornTheory>, pre: &PreStructure) -> Reflection {
    let sat = engine::saturate(theory, pre);
    let n = pre.size();
    let mut uf = UnionFind::<usize>::new(n);
    for (a, b) in sat.equalities() {
        uf.union(a, b);
    }
    let mut class_of_root = vec![usize::MAX; n];
    let mut names = Vec::new();
    let mut quotient = Vec::with_capacity(n);
    for p in 0..n {
        let r = uf.find(p);
        if class_of_root[r] == usize::MAX {
            class_of_root[r] = names.len();
            names.push(pre.point_name(p).to_string());
        }
        quotient.push(class_of_root[r]);
    }
    let edges = sat.edges().map(&quotient);
    let underlying = PreStructure::new(names, edges).expect("quotient edges stay in the carrier");
    Reflection { model: Model { underlying, theory: Arc::clone(theory) }, quotient }
}

/// Whether saturation adds no edge and derives no equality of distinct points.
pub fn is_model(theory: &HornTheory, pre: &PreStructure) -> bool {
    let sat = engine::saturate(theory, pre);
    sat.equalities().is_empty() && sat.edges() == *pre.edges()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::builtin;
    use crate::horn::structure::Edge;

    fn le(a: usize, b: usize) -> Edge {
        Edge::plain(0, vec![a, b])
    }

    #[test]
    fn antisymmetry_collapses() {
        let pos = Arc::new(builtin::pos().unwrap());
        let pre = PreStructure::discrete(["a", "b"]).with_edges([le(0, 1), le(1, 0)].into_iter().collect());
        let r = reflect(&pos, &pre);
        assert_eq!(r.model.size(), 1);
        assert_eq!(r.quotient, vec![0, 0]);
        assert!(!is_model(&pos, &pre));
    }

    #[test]
    fn chain_is_model() {
        let pos = Arc::new(builtin::pos().unwrap());
        let pre = PreStructure::discrete(["a", "b"])
            .with_edges([le(0, 0), le(1, 1), le(0, 1)].into_iter().collect());
        assert!(is_model(&pos, &pre));
        let r = reflect(&pos, &pre);
        assert_eq!(r.quotient, vec![0, 1]);
        assert_eq!(r.model.underlying(), &pre);
    }

    #[test]
    fn empty_carrier() {
        let pos = Arc::new(builtin::pos().unwrap());
        let r = reflect(&pos, &PreStructure::empty());
        assert_eq!(r.model.size(), 0);
        assert!(is_model(&pos, &PreStructure::empty()));
    }
}
