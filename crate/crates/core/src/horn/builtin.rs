//! The standard theories: sets, posets, 1-bounded metric spaces, L-valued
//! relations and partial algebras.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horn::structure::{RelSymbol, Signature, SymbolKind};
use crate::horn::theory::{
    Atom, EqWitness, HornAxiom, HornTheory, IndexExpr, LatticeTable, LimitRule,
};
use crate::rational::Rat;

/// A partial operation symbol with finite arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialOp {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Builtin {
    Set,
    Pos,
    Met,
    LValued(LatticeTable),
    Partial(Vec<PartialOp>),
}

impl Builtin {
    /// Parses the parameterless names `set`, `pos`, `met`.
    pub fn by_name(name: &str) -> Result<Builtin> {
        match name {
            "set" => Ok(Builtin::Set),
            "pos" => Ok(Builtin::Pos),
            "met" => Ok(Builtin::Met),
            other => Err(Error::UnknownTheory(other.to_string())),
        }
    }
}

fn axiom(name: &str, vars: &[&str], metas: &[&str], premises: Vec<Atom>, conclusion: Atom) -> HornAxiom {
    HornAxiom {
        name: name.to_string(),
        vars: vars.iter().map(|s| s.to_string()).collect(),
        metas: metas.iter().map(|s| s.to_string()).collect(),
        premises,
        conclusion,
        side: vec![],
    }
}

pub fn builtin_theory(which: &Builtin) -> Result<HornTheory> {
    match which {
        Builtin::Set => set(),
        Builtin::Pos => pos(),
        Builtin::Met => met(),
        Builtin::LValued(table) => lvalued(table),
        Builtin::Partial(ops) => partial(ops),
    }
}

pub fn set() -> Result<HornTheory> {
    HornTheory::new("set", Signature::default(), vec![], vec![], EqWitness::Implicit)
}

pub fn pos() -> Result<HornTheory> {
    let sig = Signature::new(vec![RelSymbol { name: "le".into(), arity: 2, kind: SymbolKind::Plain }])?;
    let le = |a, b| Atom::rel(0, vec![a, b]);
    let axioms = vec![
        axiom("refl", &["x"], &[], vec![], le(0, 0)),
        axiom("trans", &["x", "y", "z"], &[], vec![le(0, 1), le(1, 2)], le(0, 2)),
        axiom("antisym", &["x", "y"], &[], vec![le(0, 1), le(1, 0)], Atom::eq(0, 1)),
    ];
    HornTheory::new("pos", sig, axioms, vec![], EqWitness::Edges(vec![le(0, 1), le(1, 0)]))
}

pub fn met() -> Result<HornTheory> {
    let sig = Signature::new(vec![RelSymbol { name: "eq".into(), arity: 2, kind: SymbolKind::Family }])?;
    let d = |ix: IndexExpr, a, b| Atom::graded(0, ix, vec![a, b]);
    let zero = || IndexExpr::Const(Rat::ZERO);
    let e = || IndexExpr::Meta(0);
    let f = || IndexExpr::Meta(1);
    let sum = || IndexExpr::Sum(vec![e(), f()]);
    let axioms = vec![
        axiom("refl", &["x"], &[], vec![], d(zero(), 0, 0)),
        axiom("equal", &["x", "y"], &[], vec![d(zero(), 0, 1)], Atom::eq(0, 1)),
        axiom("sym", &["x", "y"], &["e"], vec![d(e(), 0, 1)], d(e(), 1, 0)),
        axiom(
            "triang",
            &["x", "y", "z"],
            &["e", "f"],
            vec![d(e(), 0, 1), d(f(), 1, 2)],
            d(sum(), 0, 2),
        ),
        axiom("up", &["x", "y"], &["e", "f"], vec![d(e(), 0, 1)], d(sum(), 0, 1)),
    ];
    HornTheory::new(
        "met",
        sig,
        axioms,
        vec![LimitRule::MetArch],
        EqWitness::Edges(vec![d(zero(), 0, 1)]),
    )
}

pub fn lvalued(table: &LatticeTable) -> Result<HornTheory> {
    let sig = Signature::new(
        table
            .elements
            .iter()
            .map(|p| RelSymbol { name: format!("alpha_{p}"), arity: 2, kind: SymbolKind::Plain })
            .collect(),
    )?;
    let n = table.elements.len();
    let mut axioms = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if p != q && table.leq[p][q] {
                axioms.push(axiom(
                    &format!("up-{}-{}", table.elements[p], table.elements[q]),
                    &["x", "y"],
                    &[],
                    vec![Atom::rel(p, vec![0, 1])],
                    Atom::rel(q, vec![0, 1]),
                ));
            }
        }
    }
    HornTheory::new(
        "lvalued",
        sig,
        axioms,
        vec![LimitRule::LatticeArch { table: table.clone(), symbols: (0..n).collect() }],
        EqWitness::Implicit,
    )
}

pub fn partial(ops: &[PartialOp]) -> Result<HornTheory> {
    let sig = Signature::new(
        ops.iter()
            .map(|op| RelSymbol { name: format!("alpha_{}", op.name), arity: op.arity + 1, kind: SymbolKind::Plain })
            .collect(),
    )?;
    let mut axioms = Vec::new();
    for (s, op) in ops.iter().enumerate() {
        let k = op.arity;
        let mut vars: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
        vars.push("y".into());
        vars.push("z".into());
        let mut left: Vec<usize> = (0..k).collect();
        let mut right = left.clone();
        left.push(k);
        right.push(k + 1);
        axioms.push(HornAxiom {
            name: format!("functional-{}", op.name),
            vars,
            metas: vec![],
            premises: vec![Atom::rel(s, left), Atom::rel(s, right)],
            conclusion: Atom::eq(k, k + 1),
            side: vec![],
        });
    }
    HornTheory::new("partial", sig, axioms, vec![], EqWitness::Implicit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let s = set().unwrap();
        assert!(s.signature.is_empty() && s.axioms.is_empty());
        let p = pos().unwrap();
        assert_eq!(p.signature.len(), 1);
        assert_eq!(p.axioms.len(), 3);
        let part = partial(&[PartialOp { name: "f".into(), arity: 2 }]).unwrap();
        assert_eq!(part.signature.symbol(0).name, "alpha_f");
        assert_eq!(part.signature.symbol(0).arity, 3);
        assert_eq!(part.axioms.len(), 1);
    }

    #[test]
    fn lattice_theory_loads() {
        // 0 < a, b < 1 with a ∧ b = 0
        let els = ["0", "a", "b", "1"].map(String::from).to_vec();
        let pair = |a: &str, b: &str| (a.to_string(), b.to_string());
        let order = vec![pair("0", "a"), pair("0", "b"), pair("a", "1"), pair("b", "1")];
        let meets = vec![("a".to_string(), "b".to_string(), "0".to_string())];
        let t = LatticeTable::new(els, &order, &meets).unwrap();
        let th = lvalued(&t).unwrap();
        assert_eq!(th.signature.len(), 4);
        assert!(th.with_equality_predicate().eq_edges(0, 1).is_some());
    }
}
