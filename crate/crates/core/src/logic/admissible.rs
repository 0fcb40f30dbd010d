//! The admissible rules (Arity), (Subterm) and substitution, as
//! transformations of proof trees.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::horn::structure::{Edge, PreStructure};
use crate::logic::calculus::{edge_judgement, subterm_at, Calculus, Judgement, Proof, Rule};
use crate::sigma::term::Term;

/// From a proof of `↓σ(m)` and an edge `α(f)` of the arity of `σ`, a proof
/// of `α(m·f)`.
pub fn admissible_arity(calc: &Calculus, proof: &Arc<Proof>, edge: &Edge) -> Result<Arc<Proof>> {
    let Judgement::Def(Term::App(op, _)) = &proof.conclusion else {
        return Err(Error::Proof("(Arity) needs the definedness of an application".into()));
    };
    let Rule::EAr { .. } = &proof.rule else {
        return Err(Error::Proof("definedness of an application must end in (E-Ar)".into()));
    };
    let arity = &calc.variety.signature().op(*op).arity;
    let k = arity
        .edges()
        .iter()
        .position(|e| e == *edge)
        .ok_or_else(|| Error::Proof("the edge is not an edge of the arity".into()))?;
    Ok(Arc::clone(&proof.premises[k]))
}

/// From a proof of any judgement and a subterm `u` of one of its terms, a
/// proof of `↓u`.
pub fn admissible_subterm(calc: &Calculus, proof: &Arc<Proof>, u: &Term) -> Result<Arc<Proof>> {
    if !proof.conclusion.terms().iter().any(|t| t.subterms().contains(&u)) {
        return Err(Error::Proof("not a subterm of the judgement".into()));
    }
    subterm_of(calc, proof, u)
}

fn defining_premise<'p>(premises: &'p [Arc<Proof>], u: &Term) -> Option<&'p Arc<Proof>> {
    premises
        .iter()
        .find(|p| matches!(&p.conclusion, Judgement::Def(t) if t.subterms().contains(&u)))
}

fn subterm_of(calc: &Calculus, proof: &Arc<Proof>, u: &Term) -> Result<Arc<Proof>> {
    if proof.conclusion == Judgement::Def(u.clone()) {
        return Ok(Arc::clone(proof));
    }
    match &proof.rule {
        Rule::Var | Rule::Ctx => match u {
            Term::Var(_) => Ok(Arc::new(Proof { conclusion: Judgement::Def(u.clone()), rule: Rule::Var, premises: vec![] })),
            _ => Err(Error::Proof("only variables occur in (Var) and (Ctx)".into())),
        },
        Rule::EAr { .. } | Rule::Mor { .. } | Rule::RelAx { .. } => {
            let p = defining_premise(&proof.premises, u)
                .ok_or_else(|| Error::Proof(format!("({}) has no definedness premise covering the subterm", proof.rule.name())))?;
            subterm_of(calc, p, u)
        }
        Rule::Ax { axiom, subst, .. } => {
            let terms = calc.variety.axioms()[*axiom].relation.terms.clone();
            from_axiom(calc, proof, *axiom, subst, &terms.iter().enumerate().map(|(i, t)| (i, vec![], t.clone())).collect::<Vec<_>>(), u)
        }
        Rule::IAr { axiom, position, path, edge, subst } => {
            let whole = &calc.variety.axioms()[*axiom].relation.terms[*position];
            let Some(Term::App(_, h)) = subterm_at(whole, path) else {
                return Err(Error::Proof("(I-Ar) records no application".into()));
            };
            let roots: Vec<(usize, Vec<usize>, Term)> = edge
                .points
                .iter()
                .map(|&p| {
                    let mut q = path.clone();
                    q.push(p);
                    (*position, q, h[p].clone())
                })
                .collect();
            from_axiom(calc, proof, *axiom, subst, &roots, u)
        }
    }
}

/// `↓u` for `u` inside `τ·w` for one of the rooted axiom subterms `w`.
fn from_axiom(
    calc: &Calculus,
    node: &Arc<Proof>,
    axiom: usize,
    subst: &[Term],
    roots: &[(usize, Vec<usize>, Term)],
    u: &Term,
) -> Result<Arc<Proof>> {
    let n_pres = calc.variety.axioms()[axiom].presentation.len();
    let defs = &node.premises[n_pres..];
    if let Some(p) = defining_premise(defs, u) {
        return subterm_of(calc, p, u);
    }
    for (position, path, w) in roots {
        if let Some((q, sub)) = find_instance(w, path.clone(), subst, u) {
            return instance_def(calc, node, axiom, *position, &q, &sub, subst);
        }
    }
    Err(Error::Proof("the subterm is not an instance of the axiom's terms".into()))
}

fn find_instance(w: &Term, path: Vec<usize>, subst: &[Term], u: &Term) -> Option<(Vec<usize>, Term)> {
    if &w.substitute(subst) == u {
        return Some((path, w.clone()));
    }
    if let Term::App(_, args) = w {
        for (i, a) in args.iter().enumerate() {
            let mut q = path.clone();
            q.push(i);
            if let Some(hit) = find_instance(a, q, subst, u) {
                return Some(hit);
            }
        }
    }
    None
}

/// `↓(τ·w)` for a subterm `w` at `path` of an axiom term, from the premises
/// of an (Ax) or (I-Ar) node of that axiom: (E-Ar) over (I-Ar) instances.
fn instance_def(
    calc: &Calculus,
    node: &Arc<Proof>,
    axiom: usize,
    position: usize,
    path: &[usize],
    w: &Term,
    subst: &[Term],
) -> Result<Arc<Proof>> {
    let n_pres = calc.variety.axioms()[axiom].presentation.len();
    match w {
        Term::Var(y) => Ok(Arc::clone(&node.premises[n_pres + y])),
        Term::App(op, h) => {
            let arity = &calc.variety.signature().op(*op).arity;
            let mut premises = Vec::new();
            for e in arity.edges().iter() {
                let conclusion = edge_judgement(&e, e.points.iter().map(|&p| h[p].substitute(subst)).collect())?;
                premises.push(Arc::new(Proof {
                    conclusion,
                    rule: Rule::IAr { axiom, position, path: path.to_vec(), edge: e, subst: subst.to_vec() },
                    premises: node.premises.clone(),
                }));
            }
            for (i, a) in h.iter().enumerate() {
                let mut q = path.to_vec();
                q.push(i);
                premises.push(instance_def(calc, node, axiom, position, &q, a, subst)?);
            }
            let map: Vec<Term> = h.iter().map(|a| a.substitute(subst)).collect();
            Ok(Arc::new(Proof {
                conclusion: Judgement::Def(w.substitute(subst)),
                rule: Rule::EAr { op: *op, map },
                premises,
            }))
        }
    }
}

/// Transports a proof over the context `source` along `tau` (source points
/// to terms over the target context), given proofs of `↓τ(y)` for every
/// point and of `α(τ·f)` for every edge of `source`.
pub fn admissible_substitute(
    source: &PreStructure,
    tau: &[Term],
    def_proofs: &[Arc<Proof>],
    edge_proofs: &[(Edge, Arc<Proof>)],
    proof: &Arc<Proof>,
) -> Result<Arc<Proof>> {
    if tau.len() != source.size() || def_proofs.len() != source.size() {
        return Err(Error::Proof("the substitution must cover the source context".into()));
    }
    for (y, p) in def_proofs.iter().enumerate() {
        if p.conclusion != Judgement::Def(tau[y].clone()) {
            return Err(Error::Proof(format!("missing definedness premise for point {}", source.point_name(y))));
        }
    }
    let mut edges = HashMap::new();
    for (e, p) in edge_proofs {
        let need = edge_judgement(e, e.points.iter().map(|&q| tau[q].clone()).collect())?;
        if !p.conclusion.implies(&need) {
            return Err(Error::Proof("an edge premise does not establish its substituted edge".into()));
        }
        edges.insert(e.clone(), Arc::clone(p));
    }
    let mut memo = HashMap::new();
    transport(proof, tau, def_proofs, &edges, &mut memo)
}

fn transport(
    p: &Arc<Proof>,
    tau: &[Term],
    defs: &[Arc<Proof>],
    edges: &HashMap<Edge, Arc<Proof>>,
    memo: &mut HashMap<*const Proof, Arc<Proof>>,
) -> Result<Arc<Proof>> {
    let ptr = Arc::as_ptr(p);
    if let Some(q) = memo.get(&ptr) {
        return Ok(Arc::clone(q));
    }
    let sub = |ts: &[Term]| -> Vec<Term> { ts.iter().map(|t| t.substitute(tau)).collect() };
    let out = match &p.rule {
        Rule::Var => match &p.conclusion {
            Judgement::Def(Term::Var(y)) => Arc::clone(&defs[*y]),
            _ => return Err(Error::Proof("malformed (Var) node".into())),
        },
        Rule::Ctx => {
            let Judgement::Rel { sym, index, terms } = &p.conclusion else {
                return Err(Error::Proof("malformed (Ctx) node".into()));
            };
            let points: Vec<usize> = terms
                .iter()
                .map(|t| match t {
                    Term::Var(y) => Ok(*y),
                    _ => Err(Error::Proof("malformed (Ctx) node".into())),
                })
                .collect::<Result<_>>()?;
            let e = Edge { sym: *sym, index: index.map(crate::rational::Bound::closed), points };
            edges
                .get(&e)
                .cloned()
                .ok_or_else(|| Error::Proof("missing premise for a context edge".into()))?
        }
        rule => {
            let premises = p
                .premises
                .iter()
                .map(|q| transport(q, tau, defs, edges, memo))
                .collect::<Result<Vec<_>>>()?;
            let rule = match rule {
                Rule::Mor { op, maps } => Rule::Mor { op: *op, maps: maps.iter().map(|f| sub(f)).collect() },
                Rule::EAr { op, map } => Rule::EAr { op: *op, map: sub(map) },
                Rule::IAr { axiom, position, path, edge, subst } => Rule::IAr {
                    axiom: *axiom,
                    position: *position,
                    path: path.clone(),
                    edge: edge.clone(),
                    subst: sub(subst),
                },
                Rule::RelAx { axiom, name, subst, metas } => {
                    Rule::RelAx { axiom: *axiom, name: name.clone(), subst: sub(subst), metas: metas.clone() }
                }
                Rule::Ax { axiom, name, subst } => Rule::Ax { axiom: *axiom, name: name.clone(), subst: sub(subst) },
                Rule::Var | Rule::Ctx => unreachable!(),
            };
            Arc::new(Proof { conclusion: p.conclusion.substitute(tau), rule, premises })
        }
    };
    memo.insert(ptr, Arc::clone(&out));
    Ok(out)
}
