//! Judgements, proof trees and the independent proof checker.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horn::engine::side_holds;
use crate::horn::structure::{Edge, PreStructure, SymId, SymbolKind};
use crate::horn::theory::{Atom, AtomSym, EqWitness, HornAxiom, HornTheory, IndexExpr, LimitRule};
use crate::rational::{Bound, Rat};
use crate::sigma::term::Term;
use crate::sigma::variety::Variety;

/// A judgement over a context: a relational edge between terms, or the
/// definedness of a term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Judgement {
    Rel { sym: SymId, index: Option<Rat>, terms: Vec<Term> },
    Def(Term),
}

impl Judgement {
    pub fn rel(sym: SymId, index: Option<Rat>, terms: Vec<Term>) -> Judgement {
        Judgement::Rel { sym, index, terms }
    }

    /// Same edge with an index at least as strong, or the same definedness.
    pub fn implies(&self, other: &Judgement) -> bool {
        match (self, other) {
            (Judgement::Def(a), Judgement::Def(b)) => a == b,
            (
                Judgement::Rel { sym: s, index: i, terms: t },
                Judgement::Rel { sym: s2, index: i2, terms: t2 },
            ) => {
                s == s2
                    && t == t2
                    && match (i, i2) {
                        (None, None) => true,
                        (Some(a), Some(b)) => a <= b,
                        _ => false,
                    }
            }
            _ => false,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Judgement::Rel { terms, .. } => terms.iter().collect(),
            Judgement::Def(t) => vec![t],
        }
    }

    pub fn substitute(&self, tau: &[Term]) -> Judgement {
        match self {
            Judgement::Rel { sym, index, terms } => Judgement::Rel {
                sym: *sym,
                index: *index,
                terms: terms.iter().map(|t| t.substitute(tau)).collect(),
            },
            Judgement::Def(t) => Judgement::Def(t.substitute(tau)),
        }
    }

    pub fn render(&self, calc: &Calculus, context: &[String]) -> String {
        let sig = calc.variety.signature();
        match self {
            Judgement::Def(t) => format!("def {}", t.render(sig, context)),
            Judgement::Rel { sym, index, terms } => {
                let name = &calc.relational.signature.symbol(*sym).name;
                let args: Vec<String> = terms.iter().map(|t| t.render(sig, context)).collect();
                match index {
                    Some(q) => format!("{name}[{q}]({})", args.join(", ")),
                    None => format!("{name}({})", args.join(", ")),
                }
            }
        }
    }
}

/// The rule instance at a proof node, with all side data needed to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    Var,
    Ctx,
    /// `maps[i]` is the argument map of the `i`-th term of the conclusion.
    Mor { op: usize, maps: Vec<Vec<Term>> },
    EAr { op: usize, map: Vec<Term> },
    /// Unpacks the arity edge `edge` of the operation at `path` inside term
    /// `position` of variety axiom `axiom`.
    IAr { axiom: usize, position: usize, path: Vec<usize>, edge: Edge, subst: Vec<Term> },
    /// Instance of axiom `axiom` of the relational closure of the theory.
    RelAx { axiom: usize, name: String, subst: Vec<Term>, metas: Vec<Bound> },
    Ax { axiom: usize, name: String, subst: Vec<Term> },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Var => "Var",
            Rule::Ctx => "Ctx",
            Rule::Mor { .. } => "Mor",
            Rule::EAr { .. } => "E-Ar",
            Rule::IAr { .. } => "I-Ar",
            Rule::RelAx { .. } => "RelAx",
            Rule::Ax { .. } => "Ax",
        }
    }
}

/// A proof tree; premises may be shared.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Proof {
    pub conclusion: Judgement,
    pub rule: Rule,
    pub premises: Vec<Arc<Proof>>,
}

impl Proof {
    /// Number of nodes counted as a tree.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(|p| p.height()).max().unwrap_or(0)
    }

    /// Indented rendering, one node per line.
    pub fn render(&self, calc: &Calculus, context: &[String]) -> String {
        let mut out = String::new();
        self.render_into(calc, context, 0, &mut out);
        out
    }

    fn render_into(&self, calc: &Calculus, context: &[String], indent: usize, out: &mut String) {
        let detail = match &self.rule {
            Rule::RelAx { name, .. } | Rule::Ax { name, .. } => format!(" {name}"),
            Rule::IAr { axiom, .. } => format!(" {}", calc.variety.axioms()[*axiom].name),
            Rule::Mor { op, .. } | Rule::EAr { op, .. } => format!(" {}", calc.variety.signature().op(*op).name),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "{:indent$}{}  [{}{}]",
            "",
            self.conclusion.render(calc, context),
            self.rule.name(),
            detail,
            indent = indent
        );
        for p in &self.premises {
            p.render_into(calc, context, indent + 2, out);
        }
    }

    /// Every node in pre-order, with its path of premise positions.
    pub fn nodes(&self) -> Vec<(Vec<usize>, &Proof)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((path, p)) = stack.pop() {
            for (i, q) in p.premises.iter().enumerate().rev() {
                let mut qp = path.clone();
                qp.push(i);
                stack.push((qp, q.as_ref()));
            }
            out.push((path, p));
        }
        out
    }
}

/// A static `(axiom, subterm, arity edge)` triple for rule (I-Ar).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IArEntry {
    pub axiom: usize,
    pub position: usize,
    pub path: Vec<usize>,
    pub op: usize,
    pub args: Vec<Term>,
    pub edge: Edge,
}

/// A variety together with the data its deduction system is read from.
#[derive(Debug, Clone)]
pub struct Calculus {
    pub variety: Arc<Variety>,
    /// The theory's axioms with equality conclusions replaced by the Eq
    /// witness edges and listed meets made explicit; no limit rules.
    pub relational: HornTheory,
    /// Eq witness templates in the variables `0`, `1`.
    pub eq_templates: Vec<Atom>,
    pub iar: Vec<IArEntry>,
}

impl Calculus {
    pub fn new(variety: Arc<Variety>) -> Result<Calculus> {
        let base = variety.signature().theory().with_equality_predicate();
        let EqWitness::Edges(templates) = &base.eq_witness else {
            unreachable!("equality predicate added")
        };
        let templates = templates.clone();
        let mut axioms = Vec::new();
        for ax in &base.axioms {
            if ax.conclusion.sym != AtomSym::Eq {
                axioms.push(ax.clone());
                continue;
            }
            let (x, y) = (ax.conclusion.args[0], ax.conclusion.args[1]);
            for (k, w) in templates.iter().enumerate() {
                let mut e = ax.clone();
                e.name = if templates.len() == 1 { ax.name.clone() } else { format!("{}#{}", ax.name, k + 1) };
                e.conclusion = Atom {
                    sym: w.sym,
                    index: w.index.clone(),
                    args: w.args.iter().map(|&a| if a == 0 { x } else { y }).collect(),
                };
                axioms.push(e);
            }
        }
        for rule in &base.limit_rules {
            if let LimitRule::LatticeArch { table, symbols } = rule {
                for (&(a, b), &m) in &table.meets {
                    if table.leq[a][b] || table.leq[b][a] {
                        continue;
                    }
                    let k = base.signature.symbol(symbols[a]).arity;
                    let args: Vec<usize> = (0..k).collect();
                    axioms.push(HornAxiom {
                        name: format!("meet-{}-{}", table.elements[a], table.elements[b]),
                        vars: (0..k).map(|i| format!("x{i}")).collect(),
                        metas: vec![],
                        premises: vec![Atom::rel(symbols[a], args.clone()), Atom::rel(symbols[b], args.clone())],
                        conclusion: Atom::rel(symbols[m], args),
                        side: vec![],
                    });
                }
            }
        }
        let relational = HornTheory::unchecked(
            base.name.clone(),
            base.signature.clone(),
            axioms,
            EqWitness::Edges(templates.clone()),
        )?;
        let iar = iar_table(&variety);
        Ok(Calculus { variety, relational, eq_templates: templates, iar })
    }

    /// `Eq(s, t)` as relational judgements.
    pub fn eq_judgements(&self, s: &Term, t: &Term) -> Vec<Judgement> {
        self.eq_templates
            .iter()
            .map(|w| Judgement::Rel {
                sym: match w.sym {
                    AtomSym::Rel(r) => r,
                    AtomSym::Eq => unreachable!("templates are relational"),
                },
                index: w.index.as_ref().map(|ix| match ix {
                    IndexExpr::Const(c) => *c,
                    _ => unreachable!("template indices are constants"),
                }),
                terms: w.args.iter().map(|&a| if a == 0 { s.clone() } else { t.clone() }).collect(),
            })
            .collect()
    }

    pub fn is_family(&self, sym: SymId) -> bool {
        self.relational.signature.symbol(sym).kind == SymbolKind::Family
    }
}

fn iar_table(v: &Variety) -> Vec<IArEntry> {
    fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize, Vec<Term>)>) {
        if let Term::App(op, args) = t {
            out.push((path.clone(), *op, args.clone()));
            for (i, a) in args.iter().enumerate() {
                path.push(i);
                walk(a, path, out);
                path.pop();
            }
        }
    }
    let sig = v.signature();
    let mut out: Vec<IArEntry> = Vec::new();
    for (ai, ax) in v.axioms().iter().enumerate() {
        for (pos, t) in ax.relation.terms.iter().enumerate() {
            let mut subs = Vec::new();
            walk(t, &mut Vec::new(), &mut subs);
            for (path, op, args) in subs {
                for edge in sig.op(op).arity.edges().iter() {
                    let dup = out.iter().any(|e| e.axiom == ai && e.op == op && e.args == args && e.edge == edge);
                    if !dup {
                        out.push(IArEntry { axiom: ai, position: pos, path: path.clone(), op, args: args.clone(), edge });
                    }
                }
            }
        }
    }
    out
}

/// The subterm at `path` below `t`.
pub fn subterm_at<'a>(t: &'a Term, path: &[usize]) -> Option<&'a Term> {
    let mut cur = t;
    for &i in path {
        match cur {
            Term::App(_, args) => cur = args.get(i)?,
            Term::Var(_) => return None,
        }
    }
    Some(cur)
}

/// A closed index as a rational.
pub fn closed_index(b: Option<Bound>) -> Result<Option<Rat>> {
    match b {
        None => Ok(None),
        Some(b) if !b.strict => Ok(Some(b.value)),
        Some(b) => Err(Error::Proof(format!("open index {b} has no judgement form"))),
    }
}

pub(crate) fn edge_judgement(e: &Edge, terms: Vec<Term>) -> Result<Judgement> {
    Ok(Judgement::Rel { sym: e.sym, index: closed_index(e.index)?, terms })
}

/// Premises shared by (Ax) and (I-Ar): the presentation edges of the axiom
/// context under `subst`, then definedness of every substituted variable.
fn axiom_premises(calc: &Calculus, axiom: usize, subst: &[Term]) -> Result<Vec<Judgement>> {
    let ax = &calc.variety.axioms()[axiom];
    if subst.len() != ax.context.size() {
        return Err(Error::Proof("substitution does not cover the axiom context".into()));
    }
    let mut out = Vec::new();
    for e in ax.presentation.iter() {
        out.push(edge_judgement(&e, e.points.iter().map(|&p| subst[p].clone()).collect())?);
    }
    out.extend(subst.iter().cloned().map(Judgement::Def));
    Ok(out)
}

fn instantiate_atom(a: &Atom, subst: &[Term], metas: &[Bound]) -> Result<Judgement> {
    let AtomSym::Rel(sym) = a.sym else {
        return Err(Error::Proof("equality atom in the relational closure".into()));
    };
    Ok(Judgement::Rel {
        sym,
        index: closed_index(a.index.as_ref().map(|ix| ix.eval(metas)))?,
        terms: a.args.iter().map(|&v| subst[v].clone()).collect(),
    })
}

/// The premises a rule instance requires and the conclusion it yields.
pub fn rule_instance(calc: &Calculus, context: &PreStructure, node: &Proof) -> Result<(Vec<Judgement>, Judgement)> {
    let sig = calc.variety.signature();
    let fail = |m: String| Err(Error::Proof(m));
    match &node.rule {
        Rule::Var => match &node.conclusion {
            Judgement::Def(Term::Var(x)) if *x < context.size() => Ok((vec![], node.conclusion.clone())),
            _ => fail("(Var) concludes definedness of a context variable".into()),
        },
        Rule::Ctx => match &node.conclusion {
            Judgement::Rel { sym, index, terms } => {
                let mut points = Vec::new();
                for t in terms {
                    match t {
                        Term::Var(x) if *x < context.size() => points.push(*x),
                        _ => return fail("(Ctx) relates context variables only".into()),
                    }
                }
                let e = Edge { sym: *sym, index: index.map(Bound::closed), points };
                if context.edges().contains(&e) {
                    Ok((vec![], node.conclusion.clone()))
                } else {
                    fail("(Ctx) cites an edge the context does not have".into())
                }
            }
            _ => fail("(Ctx) concludes a relational judgement".into()),
        },
        Rule::Mor { op, maps } => {
            let Judgement::Rel { sym, index, terms } = &node.conclusion else {
                return fail("(Mor) concludes a relational judgement".into());
            };
            let op_sym = sig.ops().get(*op).ok_or_else(|| Error::Proof("(Mor) unknown operation".into()))?;
            let m = op_sym.arity.size();
            if maps.len() != terms.len() || maps.iter().any(|f| f.len() != m) {
                return fail("(Mor) argument maps have the wrong shape".into());
            }
            let mut prem = Vec::new();
            for j in 0..m {
                prem.push(Judgement::Rel { sym: *sym, index: *index, terms: maps.iter().map(|f| f[j].clone()).collect() });
            }
            let concl_terms: Vec<Term> = maps.iter().map(|f| Term::App(*op, f.clone())).collect();
            prem.extend(concl_terms.iter().cloned().map(Judgement::Def));
            Ok((prem, Judgement::Rel { sym: *sym, index: *index, terms: concl_terms }))
        }
        Rule::EAr { op, map } => {
            let op_sym = sig.ops().get(*op).ok_or_else(|| Error::Proof("(E-Ar) unknown operation".into()))?;
            if map.len() != op_sym.arity.size() {
                return fail("(E-Ar) argument map has the wrong shape".into());
            }
            let mut prem = Vec::new();
            for e in op_sym.arity.edges().iter() {
                prem.push(edge_judgement(&e, e.points.iter().map(|&p| map[p].clone()).collect())?);
            }
            prem.extend(map.iter().cloned().map(Judgement::Def));
            Ok((prem, Judgement::Def(Term::App(*op, map.clone()))))
        }
        Rule::Ax { axiom, name, subst } => {
            let ax = calc
                .variety
                .axioms()
                .get(*axiom)
                .filter(|a| &a.name == name)
                .ok_or_else(|| Error::Proof(format!("(Ax) unknown axiom `{name}`")))?;
            let prem = axiom_premises(calc, *axiom, subst)?;
            let r = &ax.relation;
            Ok((
                prem,
                Judgement::Rel { sym: r.sym, index: r.index, terms: r.terms.iter().map(|t| t.substitute(subst)).collect() },
            ))
        }
        Rule::IAr { axiom, position, path, edge, subst } => {
            let ax = calc.variety.axioms().get(*axiom).ok_or_else(|| Error::Proof("(I-Ar) unknown axiom".into()))?;
            let w = ax
                .relation
                .terms
                .get(*position)
                .and_then(|t| subterm_at(t, path))
                .ok_or_else(|| Error::Proof("(I-Ar) no subterm at the recorded path".into()))?;
            let Term::App(op, h) = w else {
                return fail("(I-Ar) the recorded subterm is a variable".into());
            };
            let arity = &sig.op(*op).arity;
            if edge.points.iter().any(|&p| p >= arity.size()) || !arity.edges().contains(edge) {
                return fail(format!("(I-Ar) the arity of `{}` does not satisfy the recorded edge", sig.op(*op).name));
            }
            let prem = axiom_premises(calc, *axiom, subst)?;
            let concl = edge_judgement(edge, edge.points.iter().map(|&p| h[p].substitute(subst)).collect())?;
            Ok((prem, concl))
        }
        Rule::RelAx { axiom, name, subst, metas } => {
            let ax = calc
                .relational
                .axioms
                .get(*axiom)
                .filter(|a| &a.name == name)
                .ok_or_else(|| Error::Proof(format!("(RelAx) unknown axiom `{name}`")))?;
            if subst.len() != ax.vars.len() || metas.len() != ax.metas.len() {
                return fail(format!("(RelAx) `{name}` instance has the wrong shape"));
            }
            if !side_holds(ax, metas) {
                return fail(format!("(RelAx) `{name}` side condition violated"));
            }
            let mut prem = Vec::new();
            for a in &ax.premises {
                prem.push(instantiate_atom(a, subst, metas)?);
            }
            for &v in &ax.conclusion.args {
                prem.push(Judgement::Def(subst[v].clone()));
            }
            Ok((prem, instantiate_atom(&ax.conclusion, subst, metas)?))
        }
    }
}

/// Replays every node; the first invalid node is reported with its path.
pub fn check_proof(calc: &Calculus, context: &PreStructure, proof: &Proof) -> Result<()> {
    let mut seen = HashSet::new();
    check_node(calc, context, proof, &mut Vec::new(), &mut seen)
}

fn check_node(
    calc: &Calculus,
    context: &PreStructure,
    node: &Proof,
    path: &mut Vec<usize>,
    seen: &mut HashSet<*const Proof>,
) -> Result<()> {
    if !seen.insert(node as *const Proof) {
        return Ok(());
    }
    let at = |m: String| Error::Proof(format!("node {path:?} ({}): {m}", node.rule.name()));
    for t in node.conclusion.terms() {
        t.validate(calc.variety.signature(), context.size()).map_err(|e| at(e.to_string()))?;
    }
    let (want, concl) = rule_instance(calc, context, node).map_err(|e| at(e.to_string()))?;
    if concl != node.conclusion {
        return Err(at("the rule instance does not yield the recorded conclusion".into()));
    }
    if want.len() != node.premises.len() {
        return Err(at(format!("expected {} premises, found {}", want.len(), node.premises.len())));
    }
    for (i, (w, p)) in want.iter().zip(&node.premises).enumerate() {
        if !p.conclusion.implies(w) {
            return Err(at(format!("premise {i} does not establish the required judgement")));
        }
    }
    for (i, p) in node.premises.iter().enumerate() {
        path.push(i);
        check_node(calc, context, p, path, seen)?;
        path.pop();
    }
    Ok(())
}

impl Calculus {
    /// Rewrites a proof of `α[p](t)` into one of `α[q](t)` for `p <= q`
    /// through a weakening axiom `α[e](x) ⟹ α[e+f](x)` of the theory, when
    /// there is one; otherwise returns the proof unchanged.
    pub fn weaken(&self, proof: Arc<Proof>, goal: &Judgement) -> Arc<Proof> {
        let (
            Judgement::Rel { sym, index: Some(have), terms },
            Judgement::Rel { sym: gsym, index: Some(want), terms: gterms },
        ) = (&proof.conclusion, goal)
        else {
            return proof;
        };
        if sym != gsym || terms != gterms || have >= want {
            return proof;
        }
        for (ai, ax) in self.relational.axioms.iter().enumerate() {
            let [prem] = ax.premises.as_slice() else { continue };
            let concl = &ax.conclusion;
            if prem.sym != AtomSym::Rel(*sym) || concl.sym != prem.sym || prem.args != concl.args {
                continue;
            }
            let (Some(IndexExpr::Meta(a)), Some(IndexExpr::Sum(parts))) = (&prem.index, &concl.index) else {
                continue;
            };
            let b = match parts.as_slice() {
                [IndexExpr::Meta(x), IndexExpr::Meta(y)] if x == a && y != a => *y,
                [IndexExpr::Meta(y), IndexExpr::Meta(x)] if x == a && y != a => *y,
                _ => continue,
            };
            if ax.metas.len() != 2 {
                continue;
            }
            let mut subst: Vec<Option<Term>> = vec![None; ax.vars.len()];
            for (&v, t) in prem.args.iter().zip(terms) {
                subst[v] = Some(t.clone());
            }
            let Some(subst) = subst.into_iter().collect::<Option<Vec<Term>>>() else { continue };
            let mut metas = vec![Bound::closed(Rat::ZERO); 2];
            metas[*a] = Bound::closed(*have);
            metas[b] = Bound::closed(want.checked_sub(*have));
            let mut premises = vec![Arc::clone(&proof)];
            let mut ok = true;
            for t in terms {
                match crate::logic::admissible::admissible_subterm(self, &proof, t) {
                    Ok(p) => premises.push(p),
                    Err(_) => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let candidate = Proof {
                conclusion: goal.clone(),
                rule: Rule::RelAx { axiom: ai, name: ax.name.clone(), subst, metas },
                premises,
            };
            if rule_instance(self, &PreStructure::empty(), &candidate).is_ok_and(|(_, c)| &c == goal) {
                return Arc::new(candidate);
            }
        }
        proof
    }
}
