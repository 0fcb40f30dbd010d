//! Standard varieties used by the examples, tests and command-line tool.

use std::sync::Arc;

use crate::error::Result;
use crate::horn::builtin;
use crate::horn::metric::metric_to_structure;
use crate::horn::reflect::reflect;
use crate::horn::structure::{Edge, EdgeSet, PreStructure};
use crate::horn::theory::HornTheory;
use crate::rational::{Bound, Rat};
use crate::sigma::term::{OpSignature, OpSymbol, Term};
use crate::sigma::variety::{SigmaRelation, TermEdge, Variety};

/// The model generated by `edges` on the named points, with `edges` as its
/// presentation.
pub fn presented(theory: &Arc<HornTheory>, names: &[&str], edges: Vec<Edge>) -> (PreStructure, EdgeSet) {
    let pres: EdgeSet = edges.into_iter().collect();
    let pre = PreStructure::new(names.iter().map(|s| s.to_string()).collect(), pres.clone()).expect("points in range");
    let r = reflect(theory, &pre);
    assert_eq!(r.model.size(), names.len(), "presentation merges points");
    (r.model.into_underlying(), pres)
}

/// A finite metric space presented by its distances between distinct points.
pub fn metric_context(names: &[&str], d: &[Vec<Rat>]) -> Result<(PreStructure, EdgeSet)> {
    let model = metric_to_structure(names.iter().map(|s| s.to_string()).collect(), d)?;
    let mut pres = EdgeSet::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            pres.insert(Edge::graded(0, Bound::closed(d[i][j]), vec![i, j]));
        }
    }
    Ok((model, pres))
}

fn le(a: usize, b: usize) -> Edge {
    Edge::plain(0, vec![a, b])
}

fn axiom(name: &str, ctx: (PreStructure, EdgeSet), relation: TermEdge) -> SigmaRelation {
    SigmaRelation { name: name.to_string(), context: ctx.0, presentation: ctx.1, relation }
}

/// Join-semilattices over posets: one operation `join` on a discrete
/// two-point arity, bounded above by every upper bound of its arguments.
pub fn semilattice() -> Result<Variety> {
    let pos = Arc::new(builtin::pos()?);
    let (arity, _) = presented(&pos, &["x", "y"], vec![]);
    let sig = Arc::new(OpSignature::new(Arc::clone(&pos), vec![OpSymbol { name: "join".into(), arity }])?);
    let join = |a: Term, b: Term| Term::App(0, vec![a, b]);
    let (x, y, z) = (Term::Var(0), Term::Var(1), Term::Var(2));
    let rel = |a: Term, b: Term| TermEdge { sym: 0, index: None, terms: vec![a, b] };
    let axioms = vec![
        axiom("upper-left", presented(&pos, &["x", "y"], vec![]), rel(x.clone(), join(x.clone(), y.clone()))),
        axiom("upper-right", presented(&pos, &["x", "y"], vec![]), rel(y.clone(), join(x.clone(), y.clone()))),
        axiom(
            "least",
            presented(&pos, &["x", "y", "z"], vec![le(0, 2), le(1, 2)]),
            rel(join(x, y), z),
        ),
    ];
    Variety::new("semilattice", sig, axioms)
}

/// The variety with no operations and no axioms over `theory`.
pub fn empty_variety(theory: Arc<HornTheory>) -> Result<Variety> {
    let sig = Arc::new(OpSignature::new(theory, vec![])?);
    Variety::new("empty", sig, vec![])
}

/// Metric spaces with a non-expansive retraction `s` moving every point by
/// at most 1/4, and a guarded operation `c` defined on pairs at distance at
/// most 1/2 that returns its first argument.
pub fn met_guarded() -> Result<Variety> {
    let met = Arc::new(builtin::met()?);
    let z = Rat::ZERO;
    let h = Rat::frac(1, 2);
    let point = || metric_context(&["x"], &[vec![z]]);
    let close_pair = || metric_context(&["p", "q"], &[vec![z, h], vec![h, z]]);
    let sig = Arc::new(OpSignature::new(
        Arc::clone(&met),
        vec![
            OpSymbol { name: "s".into(), arity: point()?.0 },
            OpSymbol { name: "c".into(), arity: close_pair()?.0 },
        ],
    )?);
    let s = |t: Term| Term::App(0, vec![t]);
    let d = |q: Rat, a: Term, b: Term| TermEdge { sym: 0, index: Some(q), terms: vec![a, b] };
    let (x, p, q) = (Term::Var(0), Term::Var(0), Term::Var(1));
    let axioms = vec![
        axiom("near", point()?, d(Rat::frac(1, 4), s(x.clone()), x.clone())),
        axiom("retract", point()?, d(z, s(s(x.clone())), s(x))),
        axiom("first", close_pair()?, d(z, Term::App(1, vec![p.clone(), q]), p)),
    ];
    Variety::new("met-guarded", sig, axioms)
}

/// Names `x1, …, xk` of the Cauchy prefix.
pub fn cauchy_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

/// The prefix `x_1, …, x_k` of the sequence `1/n` as a metric space.
pub fn cauchy_distances(k: usize) -> Vec<Vec<Rat>> {
    (1..=k as i64)
        .map(|n| (1..=k as i64).map(|m| Rat::frac(1, n).abs_diff(Rat::frac(1, m))).collect())
        .collect()
}

/// Metric spaces with a limit operation for the Cauchy prefix of length `k`:
/// `lim` has the prefix as arity and satisfies `lim(x) =_{1/n} x_n`.
pub fn cauchy_limit(k: usize) -> Result<Variety> {
    let met = Arc::new(builtin::met()?);
    let names = cauchy_names(k);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let d = cauchy_distances(k);
    let ctx = || metric_context(&refs, &d);
    let sig = Arc::new(OpSignature::new(Arc::clone(&met), vec![OpSymbol { name: "lim".into(), arity: ctx()?.0 }])?);
    let lim = Term::App(0, (0..k).map(Term::Var).collect());
    let mut axioms = Vec::new();
    for n in 1..=k {
        axioms.push(axiom(
            &format!("limit-{n}"),
            ctx()?,
            TermEdge { sym: 0, index: Some(Rat::frac(1, n as i64)), terms: vec![lim.clone(), Term::Var(n - 1)] },
        ));
    }
    Variety::new("cauchy-limit", sig, axioms)
}
