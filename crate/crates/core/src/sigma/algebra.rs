//! Σ-algebras on finite models, partial evaluation and homomorphisms.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::horn::reflect::is_model;
use crate::horn::structure::PreStructure;
use crate::par::Budget;
use crate::sigma::term::{OpSignature, Term};
use crate::structops::{hom_maps, internal_hom};

/// Interpretation of one operation `σ_A: [ar(σ), A] → A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interp {
    /// Explicit table over the morphisms `ar(σ) → A`.
    Table(Table),
    /// Evaluation at a point of the arity, always relation-preserving.
    Projection(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    maps: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    values: Vec<usize>,
}

impl Table {
    /// Pairs `maps[i] ↦ values[i]`.
    pub fn new(maps: Vec<Vec<usize>>, values: Vec<usize>) -> Table {
        let index = maps.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Table { maps, index, values }
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, args: &[usize]) -> Option<usize> {
        self.index.get(args).map(|&i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaAlgebra {
    sig: Arc<OpSignature>,
    carrier: PreStructure,
    interps: Vec<Interp>,
}

impl SigmaAlgebra {
    /// Validates the carrier and that every table is a total,
    /// relation-preserving map `[ar(σ), A] → A`.
    pub fn new(sig: Arc<OpSignature>, carrier: PreStructure, interps: Vec<Interp>, budget: Budget) -> Result<SigmaAlgebra> {
        if interps.len() != sig.len() {
            return Err(Error::Algebra(format!("{} interpretations for {} operations", interps.len(), sig.len())));
        }
        if !is_model(sig.theory(), &carrier) {
            return Err(Error::Algebra("carrier is not a model".into()));
        }
        for (op, interp) in interps.iter().enumerate() {
            let sym = sig.op(op);
            match interp {
                Interp::Projection(p) if *p < sym.arity.size() => {}
                Interp::Projection(_) => {
                    return Err(Error::Algebra(format!("projection outside the arity of `{}`", sym.name)))
                }
                Interp::Table(t) => {
                    let hom = internal_hom(&sig.theory().signature, &sym.arity, &carrier, budget)?;
                    if hom.maps.len() != t.maps.len() || hom.maps.iter().any(|m| !t.index.contains_key(m)) {
                        return Err(Error::Algebra(format!("table of `{}` is not defined on [ar, A]", sym.name)));
                    }
                    if t.values.iter().any(|&v| v >= carrier.size()) {
                        return Err(Error::Algebra(format!("table of `{}` leaves the carrier", sym.name)));
                    }
                    let remap: Vec<usize> = hom.maps.iter().map(|m| t.get(m).unwrap()).collect();
                    if !hom.structure.preserves(&carrier, &remap) {
                        return Err(Error::Algebra(format!("`{}` is not relation-preserving", sym.name)));
                    }
                }
            }
        }
        Ok(SigmaAlgebra { sig, carrier, interps })
    }

    /// Tabulates `f(op, args)` over every morphism `args: ar(op) → A`.
    pub fn from_fn(
        sig: Arc<OpSignature>,
        carrier: PreStructure,
        f: impl Fn(usize, &[usize]) -> usize,
        budget: Budget,
    ) -> Result<SigmaAlgebra> {
        let mut interps = Vec::with_capacity(sig.len());
        for (op, sym) in sig.ops().iter().enumerate() {
            let maps = hom_maps(&sym.arity, &carrier, budget)?;
            let values = maps.iter().map(|m| f(op, m)).collect();
            interps.push(Interp::Table(Table::new(maps, values)));
        }
        SigmaAlgebra::new(sig, carrier, interps, budget)
    }

    pub(crate) fn new_unchecked(sig: Arc<OpSignature>, carrier: PreStructure, interps: Vec<Interp>) -> SigmaAlgebra {
        SigmaAlgebra { sig, carrier, interps }
    }

    pub fn signature(&self) -> &Arc<OpSignature> {
        &self.sig
    }

    pub fn carrier(&self) -> &PreStructure {
        &self.carrier
    }

    pub fn size(&self) -> usize {
        self.carrier.size()
    }

    pub fn interps(&self) -> &[Interp] {
        &self.interps
    }

    /// `σ_A(args)`; `None` when `args` is not a morphism `ar(σ) → A`.
    pub fn apply(&self, op: usize, args: &[usize]) -> Option<usize> {
        match &self.interps[op] {
            Interp::Table(t) => t.get(args),
            Interp::Projection(p) => {
                let arity = &self.sig.op(op).arity;
                (args.len() == arity.size() && arity.preserves(&self.carrier, args)).then(|| args[*p])
            }
        }
    }

    /// Partial evaluation `e#(t)` under an assignment of the context points.
    pub fn evaluate(&self, e: &[usize], t: &Term) -> Option<usize> {
        match t {
            Term::Var(x) => Some(e[*x]),
            Term::App(op, args) => {
                let vals: Option<Vec<usize>> = args.iter().map(|a| self.evaluate(e, a)).collect();
                let vals = vals?;
                if !self.sig.op(*op).arity.preserves(&self.carrier, &vals) {
                    return None;
                }
                self.apply(*op, &vals)
            }
        }
    }

    /// The graph of every operation as `(op, args, value)`.
    pub fn graph(&self, budget: Budget) -> Result<Vec<(usize, Vec<usize>, usize)>> {
        let mut out = Vec::new();
        for (op, sym) in self.sig.ops().iter().enumerate() {
            for m in hom_maps(&sym.arity, &self.carrier, budget)? {
                let v = self.apply(op, &m).expect("interpretation is total on morphisms");
                out.push((op, m, v));
            }
        }
        Ok(out)
    }
}

/// Whether `h: A → B` is relation-preserving and commutes with every
/// operation on all of `[ar(σ), A]`.
pub fn is_homomorphism(h: &[usize], a: &SigmaAlgebra, b: &SigmaAlgebra, budget: Budget) -> Result<bool> {
    if h.len() != a.size() || h.iter().any(|&p| p >= b.size()) || !a.carrier.preserves(&b.carrier, h) {
        return Ok(false);
    }
    for (op, sym) in a.sig.ops().iter().enumerate() {
        for f in hom_maps(&sym.arity, &a.carrier, budget)? {
            let hf: Vec<usize> = f.iter().map(|&p| h[p]).collect();
            let lhs = a.apply(op, &f).map(|v| h[v]);
            if lhs.is_none() || lhs != b.apply(op, &hf) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
