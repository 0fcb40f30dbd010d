//! Σ-relations, varieties and satisfaction.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::horn::reflect::is_model;
use crate::horn::structure::{Edge, EdgeSet, PreStructure, SymId, SymbolKind};
use crate::par::{self, Budget};
use crate::rational::{Bound, Rat};
use crate::sigma::algebra::SigmaAlgebra;
use crate::sigma::term::{OpSignature, Term};
use crate::structops::{hom_maps, is_generated_by};

/// An edge `α(t₁,…,t_k)` over terms; family symbols carry a closed index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermEdge {
    pub sym: SymId,
    pub index: Option<Rat>,
    pub terms: Vec<Term>,
}

impl TermEdge {
    /// The edge over carrier values.
    pub fn at(&self, points: Vec<usize>) -> Edge {
        Edge { sym: self.sym, index: self.index.map(Bound::closed), points }
    }
}

/// `X ⊢ α(f)`, with the context given by a presentation `(Y, E)`: the
/// context is the model generated by the edges `E` on the points `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaRelation {
    pub name: String,
    pub context: PreStructure,
    pub presentation: EdgeSet,
    pub relation: TermEdge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variety {
    pub name: String,
    sig: Arc<OpSignature>,
    axioms: Vec<SigmaRelation>,
}

impl Variety {
    pub fn new(name: impl Into<String>, sig: Arc<OpSignature>, axioms: Vec<SigmaRelation>) -> Result<Variety> {
        let theory = sig.theory();
        for ax in &axioms {
            let err = |m: String| Error::Variety(format!("axiom `{}`: {m}", ax.name));
            if !is_model(theory, &ax.context) {
                return Err(err("context is not a model".into()));
            }
            if !ax.presentation.is_subset(ax.context.edges()) || !is_generated_by(theory, &ax.context, &ax.presentation) {
                return Err(err("presentation does not generate the context".into()));
            }
            let r = &ax.relation;
            if r.sym >= theory.signature.len() {
                return Err(err("unknown relation symbol".into()));
            }
            let sym = theory.signature.symbol(r.sym);
            if sym.arity != r.terms.len() {
                return Err(err(format!("`{}` expects {} terms", sym.name, sym.arity)));
            }
            match (sym.kind, r.index) {
                (SymbolKind::Plain, None) => {}
                (SymbolKind::Family, Some(q)) if q.in_unit_interval() => {}
                _ => return Err(err(format!("bad index for `{}`", sym.name))),
            }
            for t in &r.terms {
                t.validate(&sig, ax.context.size()).map_err(|e| err(e.to_string()))?;
            }
        }
        Ok(Variety { name: name.into(), sig, axioms })
    }

    pub fn signature(&self) -> &Arc<OpSignature> {
        &self.sig
    }

    pub fn axioms(&self) -> &[SigmaRelation] {
        &self.axioms
    }

    pub fn axiom(&self, name: &str) -> Option<&SigmaRelation> {
        self.axioms.iter().find(|a| a.name == name)
    }
}

/// Whether one assignment satisfies the relation: all terms are defined and
/// their values stand in the relation.
pub fn holds_at(a: &SigmaAlgebra, r: &TermEdge, e: &[usize]) -> bool {
    let vals: Option<Vec<usize>> = r.terms.iter().map(|t| a.evaluate(e, t)).collect();
    vals.is_some_and(|v| a.carrier().edges().contains(&r.at(v)))
}

/// A relation-preserving assignment of the context under which the relation
/// fails, if any.
pub fn counterexample(a: &SigmaAlgebra, r: &SigmaRelation, budget: Budget) -> Result<Option<Vec<usize>>> {
    let assignments = hom_maps(&r.context, a.carrier(), budget)?;
    let bad = par::filter_map(budget.exec, &assignments, |e| (!holds_at(a, &r.relation, e)).then(|| e.clone()));
    Ok(bad.into_iter().next())
}

pub fn satisfies(a: &SigmaAlgebra, r: &SigmaRelation, budget: Budget) -> Result<bool> {
    Ok(counterexample(a, r, budget)?.is_none())
}

/// Name of the first violated axiom, if any.
pub fn violated_axiom(a: &SigmaAlgebra, v: &Variety, budget: Budget) -> Result<Option<String>> {
    for ax in v.axioms() {
        if !satisfies(a, ax, budget)? {
            return Ok(Some(ax.name.clone()));
        }
    }
    Ok(None)
}

pub fn in_variety(a: &SigmaAlgebra, v: &Variety, budget: Budget) -> Result<bool> {
    Ok(violated_axiom(a, v, budget)?.is_none())
}
