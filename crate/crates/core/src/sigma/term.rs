//! Operation signatures with structured arities, and terms over a context.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horn::reflect::is_model;
use crate::horn::structure::PreStructure;
use crate::horn::theory::HornTheory;

/// An operation symbol whose arity is a finite model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpSymbol {
    pub name: String,
    pub arity: PreStructure,
}

/// Operation symbols over a Horn theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpSignature {
    theory: Arc<HornTheory>,
    ops: Vec<OpSymbol>,
}

impl OpSignature {
    pub fn new(theory: Arc<HornTheory>, ops: Vec<OpSymbol>) -> Result<OpSignature> {
        let mut names = BTreeSet::new();
        for op in &ops {
            if !names.insert(op.name.as_str()) {
                return Err(Error::Variety(format!("duplicate operation `{}`", op.name)));
            }
            if !is_model(&theory, &op.arity) {
                return Err(Error::Variety(format!("arity of `{}` is not a model of `{}`", op.name, theory.name)));
            }
        }
        Ok(OpSignature { theory, ops })
    }

    pub fn theory(&self) -> &Arc<HornTheory> {
        &self.theory
    }

    pub fn ops(&self) -> &[OpSymbol] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &OpSymbol {
        &self.ops[i]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }
}

/// A term over a context: a context point, or an operation applied to a
/// total map from its arity's carrier (by point index) to terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(usize),
    App(usize, Vec<Term>),
}

impl Term {
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// `sub(t)`, without duplicates, in pre-order of first occurrence.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out: Vec<&Term> = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if out.contains(&t) {
                continue;
            }
            out.push(t);
            if let Term::App(_, args) = t {
                stack.extend(args.iter().rev());
            }
        }
        out
    }

    /// `τ̄(t)` for a substitution sending context point `i` to `tau[i]`.
    pub fn substitute(&self, tau: &[Term]) -> Term {
        match self {
            Term::Var(x) => tau[*x].clone(),
            Term::App(op, args) => Term::App(*op, args.iter().map(|a| a.substitute(tau)).collect()),
        }
    }

    /// Checks variables against the context size and argument counts
    /// against arity carriers.
    pub fn validate(&self, sig: &OpSignature, context_size: usize) -> Result<()> {
        match self {
            Term::Var(x) if *x < context_size => Ok(()),
            Term::Var(x) => Err(Error::Term(format!("variable #{x} outside a context of {context_size} points"))),
            Term::App(op, args) => {
                let sym = sig
                    .ops
                    .get(*op)
                    .ok_or_else(|| Error::Term(format!("unknown operation #{op}")))?;
                if args.len() != sym.arity.size() {
                    return Err(Error::Term(format!(
                        "`{}` takes {} arguments, got {}",
                        sym.name,
                        sym.arity.size(),
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| a.validate(sig, context_size))
            }
        }
    }

    /// Renders as `op{p->t,q->u}` with context point names for variables.
    pub fn render(&self, sig: &OpSignature, context: &[String]) -> String {
        let mut s = String::new();
        self.render_into(sig, context, &mut s);
        s
    }

    fn render_into(&self, sig: &OpSignature, context: &[String], out: &mut String) {
        match self {
            Term::Var(x) => out.push_str(&context[*x]),
            Term::App(op, args) => {
                let sym = &sig.ops[*op];
                out.push_str(&sym.name);
                out.push('{');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{}->", sym.arity.point_name(i));
                    a.render_into(sig, context, out);
                }
                out.push('}');
            }
        }
    }
}

/// All terms over `context_size` variables of depth at most `depth`.
pub fn terms_up_to(sig: &OpSignature, context_size: usize, depth: usize) -> Vec<Term> {
    let mut all: Vec<Term> = (0..context_size).map(Term::Var).collect();
    for _ in 0..depth {
        let mut next = all.clone();
        for (op, sym) in sig.ops.iter().enumerate() {
            for args in itertools::Itertools::multi_cartesian_product(
                std::iter::repeat_n(all.iter().cloned(), sym.arity.size()),
            ) {
                let t = Term::App(op, args);
                if !next.contains(&t) {
                    next.push(t);
                }
            }
            if sym.arity.size() == 0 && !next.contains(&Term::App(op, vec![])) {
                next.push(Term::App(op, vec![]));
            }
        }
        all = next;
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::builtin;

    fn sig() -> OpSignature {
        let set = Arc::new(builtin::set().unwrap());
        OpSignature::new(
            set,
            vec![
                OpSymbol { name: "f".into(), arity: PreStructure::discrete(["l", "r"]) },
                OpSymbol { name: "c".into(), arity: PreStructure::empty() },
            ],
        )
        .unwrap()
    }

    #[test]
    fn depth_and_subterms() {
        let t = Term::App(0, vec![Term::Var(0), Term::App(0, vec![Term::Var(0), Term::Var(1)])]);
        assert_eq!(t.depth(), 2);
        assert_eq!(t.subterms().len(), 4);
        let names = ["x".to_string(), "y".to_string()];
        assert_eq!(t.render(&sig(), &names), "f{l->x,r->f{l->x,r->y}}");
        let s = t.substitute(&[Term::App(1, vec![]), Term::Var(0)]);
        assert_eq!(s.render(&sig(), &names), "f{l->c{},r->f{l->c{},r->x}}");
    }

    #[test]
    fn term_counts() {
        // depth 1 over one variable: x, c, f(x,x)
        assert_eq!(terms_up_to(&sig(), 1, 0).len(), 1);
        assert_eq!(terms_up_to(&sig(), 1, 1).len(), 3);
        assert!(Term::App(0, vec![Term::Var(0)]).validate(&sig(), 1).is_err());
    }
}
