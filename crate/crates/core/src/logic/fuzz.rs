//! Single-node corruptions of proof trees that the checker must reject.

use std::sync::Arc;

use serde::Serialize;

use crate::horn::structure::PreStructure;
use crate::logic::calculus::{rule_instance, Calculus, Judgement, Proof, Rule};
use crate::sigma::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Mutation {
    /// Removes one premise.
    DropPremise { premise: usize },
    /// Replaces a premise by a subproof, found elsewhere in the tree, whose
    /// conclusion does not imply what the rule needs there.
    SwapPremise { premise: usize, with: Vec<usize> },
    /// Replaces one term of a conclusion fixed by the rule's data.
    AlterTerm { position: usize, term: Term },
    /// Makes a conclusion mention a variable outside the context.
    ForgeVariable,
}

impl Mutation {
    pub fn kind(&self) -> &'static str {
        match self {
            Mutation::DropPremise { .. } => "drop-premise",
            Mutation::SwapPremise { .. } => "swap-premise",
            Mutation::AlterTerm { .. } => "alter-term",
            Mutation::ForgeVariable => "forge-variable",
        }
    }
}

fn with_terms(j: &Judgement, terms: Vec<Term>) -> Judgement {
    match j {
        Judgement::Def(_) => Judgement::Def(terms.into_iter().next().expect("one term")),
        Judgement::Rel { sym, index, .. } => Judgement::Rel { sym: *sym, index: *index, terms },
    }
}

/// A variable different from `t`, or an application when the context has a
/// single point.
fn other_term(t: &Term, context_size: usize, calc: &Calculus) -> Option<Term> {
    if let Some(v) = (0..context_size).map(Term::Var).find(|v| v != t) {
        return Some(v);
    }
    let sig = calc.variety.signature();
    (0..sig.len())
        .map(|op| Term::App(op, vec![Term::Var(0); sig.op(op).arity.size()]))
        .find(|a| a != t && context_size > 0)
}

/// Every single-node corruption of `proof`, as `(path, mutation)`.
pub fn mutation_sites(calc: &Calculus, context: &PreStructure, proof: &Proof) -> Vec<(Vec<usize>, Mutation)> {
    let nodes = proof.nodes();
    let mut out = Vec::new();
    for (path, node) in &nodes {
        for premise in 0..node.premises.len() {
            out.push((path.clone(), Mutation::DropPremise { premise }));
        }
        if let Ok((want, _)) = rule_instance(calc, context, node) {
            for (premise, w) in want.iter().enumerate() {
                if let Some((with, _)) = nodes.iter().find(|(_, q)| !q.conclusion.implies(w)) {
                    out.push((path.clone(), Mutation::SwapPremise { premise, with: with.clone() }));
                }
            }
        }
        if !matches!(node.rule, Rule::Var | Rule::Ctx) {
            let terms = node.conclusion.terms();
            if let Some((position, term)) = terms
                .iter()
                .enumerate()
                .find_map(|(k, t)| other_term(t, context.size(), calc).map(|o| (k, o)))
            {
                out.push((path.clone(), Mutation::AlterTerm { position, term }));
            }
        }
        if !node.conclusion.terms().is_empty() {
            out.push((path.clone(), Mutation::ForgeVariable));
        }
    }
    out
}

fn node_at<'p>(proof: &'p Arc<Proof>, path: &[usize]) -> &'p Arc<Proof> {
    path.iter().fold(proof, |p, &i| &p.premises[i])
}

/// The proof with the node at `path` corrupted by `mutation`; every other
/// node is shared with the original.
pub fn apply_mutation(proof: &Arc<Proof>, path: &[usize], mutation: &Mutation, context_size: usize) -> Arc<Proof> {
    let node = node_at(proof, path);
    let mut changed = Proof::clone(node);
    match mutation {
        Mutation::DropPremise { premise } => {
            changed.premises.remove(*premise);
        }
        Mutation::SwapPremise { premise, with } => {
            changed.premises[*premise] = Arc::clone(node_at(proof, with));
        }
        Mutation::AlterTerm { position, term } => {
            let mut terms: Vec<Term> = changed.conclusion.terms().into_iter().cloned().collect();
            terms[*position] = term.clone();
            changed.conclusion = with_terms(&changed.conclusion, terms);
        }
        Mutation::ForgeVariable => {
            let mut terms: Vec<Term> = changed.conclusion.terms().into_iter().cloned().collect();
            terms[0] = Term::Var(context_size);
            changed.conclusion = with_terms(&changed.conclusion, terms);
        }
    }
    rebuild(proof, path, Arc::new(changed))
}

fn rebuild(proof: &Arc<Proof>, path: &[usize], replacement: Arc<Proof>) -> Arc<Proof> {
    match path.split_first() {
        None => replacement,
        Some((&i, rest)) => {
            let mut p = Proof::clone(proof);
            p.premises[i] = rebuild(&proof.premises[i], rest, replacement);
            Arc::new(p)
        }
    }
}
