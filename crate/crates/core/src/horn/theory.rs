//! Horn axioms, axiom schemes over rational indices, limit rules and theories.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horn::engine;
use crate::horn::structure::{Edge, EdgeSet, PreStructure, Signature, SymId, SymbolKind};
use crate::rational::{Bound, Rat};

/// Index expression of a scheme: constants, metavariables and capped sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexExpr {
    Const(Rat),
    Meta(usize),
    Sum(Vec<IndexExpr>),
}

impl IndexExpr {
    pub fn eval(&self, metas: &[Bound]) -> Bound {
        match self {
            IndexExpr::Const(c) => Bound::closed(*c),
            IndexExpr::Meta(m) => metas[*m],
            IndexExpr::Sum(xs) => xs
                .iter()
                .map(|x| x.eval(metas))
                .fold(Bound::closed(Rat::ZERO), Bound::capped_add),
        }
    }

    fn metas(&self, out: &mut Vec<usize>) {
        match self {
            IndexExpr::Const(_) => {}
            IndexExpr::Meta(m) => out.push(*m),
            IndexExpr::Sum(xs) => xs.iter().for_each(|x| x.metas(out)),
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        match self {
            IndexExpr::Const(c) => c.to_string(),
            IndexExpr::Meta(m) => names[*m].clone(),
            IndexExpr::Sum(xs) => xs.iter().map(|x| x.render(names)).collect::<Vec<_>>().join("+"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomSym {
    Rel(SymId),
    /// The distinguished equality symbol, kept out of the signature.
    Eq,
}

/// An edge over the variables of an axiom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub sym: AtomSym,
    pub index: Option<IndexExpr>,
    pub args: Vec<usize>,
}

impl Atom {
    pub fn rel(sym: SymId, args: Vec<usize>) -> Atom {
        Atom { sym: AtomSym::Rel(sym), index: None, args }
    }

    pub fn graded(sym: SymId, index: IndexExpr, args: Vec<usize>) -> Atom {
        Atom { sym: AtomSym::Rel(sym), index: Some(index), args }
    }

    pub fn eq(x: usize, y: usize) -> Atom {
        Atom { sym: AtomSym::Eq, index: None, args: vec![x, y] }
    }

    pub fn instantiate(&self, valuation: &[usize], metas: &[Bound]) -> Option<Edge> {
        match self.sym {
            AtomSym::Eq => None,
            AtomSym::Rel(s) => Some(Edge {
                sym: s,
                index: self.index.as_ref().map(|i| i.eval(metas)),
                points: self.args.iter().map(|&v| valuation[v]).collect(),
            }),
        }
    }
}

/// Side condition `meta ⋈ expr` on a scheme's metavariables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SideCondition {
    pub meta: usize,
    pub relation: SideRelation,
    pub expr: IndexExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SideRelation {
    Gt,
    Ge,
    Lt,
    Le,
}

impl SideRelation {
    pub fn symbol(self) -> &'static str {
        match self {
            SideRelation::Gt => ">",
            SideRelation::Ge => ">=",
            SideRelation::Lt => "<",
            SideRelation::Le => "<=",
        }
    }
}

/// `premises ⟹ conclusion`, possibly a scheme over rational metavariables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HornAxiom {
    pub name: String,
    pub vars: Vec<String>,
    pub metas: Vec<String>,
    pub premises: Vec<Atom>,
    pub conclusion: Atom,
    pub side: Vec<SideCondition>,
}

impl HornAxiom {
    pub fn is_scheme(&self) -> bool {
        !self.metas.is_empty()
    }

    /// Variables that occur in the conclusion but in no premise; they range
    /// over the whole carrier.
    pub fn free_vars(&self) -> Vec<usize> {
        let mut bound = vec![false; self.vars.len()];
        for p in &self.premises {
            for &a in &p.args {
                bound[a] = true;
            }
        }
        let mut free: Vec<usize> = self.conclusion.args.iter().copied().filter(|&v| !bound[v]).collect();
        free.sort_unstable();
        free.dedup();
        free
    }

    /// Metavariables that no premise index mentions.
    pub fn free_metas(&self) -> Vec<usize> {
        let mut bound = vec![false; self.metas.len()];
        for p in &self.premises {
            if let Some(IndexExpr::Meta(m)) = p.index {
                bound[m] = true;
            }
        }
        (0..self.metas.len()).filter(|&m| !bound[m]).collect()
    }

    /// Resolves metavariable values from the bounds matched by the premises
    /// (`None` for unmatched), applying side conditions. Returns `None` when a
    /// side condition fails.
    pub fn resolve_metas(&self, matched: &[Option<Bound>]) -> Option<Vec<Bound>> {
        let mut metas: Vec<Bound> = matched
            .iter()
            .map(|m| m.unwrap_or(Bound::closed(Rat::ZERO)))
            .collect();
        for sc in &self.side {
            let rhs = sc.expr.eval(&metas);
            match sc.relation {
                SideRelation::Ge => metas[sc.meta] = metas[sc.meta].join(rhs),
                SideRelation::Gt => {
                    metas[sc.meta] = metas[sc.meta].join(Bound::open(rhs.value))
                }
                SideRelation::Le | SideRelation::Lt => {}
            }
        }
        for sc in &self.side {
            let lhs = metas[sc.meta];
            let rhs = sc.expr.eval(&metas);
            let ok = match sc.relation {
                SideRelation::Ge => rhs.implies(&lhs),
                SideRelation::Gt => Bound::open(rhs.value).implies(&lhs),
                SideRelation::Le => lhs.implies(&rhs),
                SideRelation::Lt => lhs.value < rhs.value,
            };
            if !ok {
                return None;
            }
        }
        Some(metas)
    }

    fn validate(&self, sig: &Signature, internal: bool) -> Result<()> {
        let err = |reason: String| Error::Scheme { axiom: self.name.clone(), reason };
        let check_atom = |a: &Atom, premise: bool| -> Result<()> {
            if a.args.iter().any(|&v| v >= self.vars.len()) {
                return Err(err("variable out of range".into()));
            }
            match a.sym {
                AtomSym::Eq => {
                    if a.args.len() != 2 || a.index.is_some() {
                        return Err(err("malformed equality atom".into()));
                    }
                    if premise && !internal {
                        return Err(err("equality may only appear in conclusions".into()));
                    }
                }
                AtomSym::Rel(s) => {
                    if s >= sig.len() {
                        return Err(err("unknown symbol".into()));
                    }
                    let sym = sig.symbol(s);
                    if sym.arity != a.args.len() {
                        return Err(err(format!("`{}` expects {} arguments", sym.name, sym.arity)));
                    }
                    match (sym.kind, &a.index) {
                        (SymbolKind::Plain, None) => {}
                        (SymbolKind::Family, Some(ix)) => {
                            let mut ms = vec![];
                            ix.metas(&mut ms);
                            if ms.iter().any(|&m| m >= self.metas.len()) {
                                return Err(err("metavariable out of range".into()));
                            }
                            if premise && matches!(ix, IndexExpr::Sum(_)) {
                                return Err(err(
                                    "premise indices must be constants or metavariables".into(),
                                ));
                            }
                            if let IndexExpr::Const(c) = ix {
                                if !c.in_unit_interval() {
                                    return Err(err(format!("index {c} outside [0,1]")));
                                }
                            }
                        }
                        (SymbolKind::Plain, Some(_)) => {
                            return Err(err(format!("`{}` takes no index", sym.name)))
                        }
                        (SymbolKind::Family, None) => {
                            return Err(err(format!("`{}` needs an index", sym.name)))
                        }
                    }
                }
            }
            Ok(())
        };
        for p in &self.premises {
            check_atom(p, true)?;
        }
        check_atom(&self.conclusion, false)?;
        for sc in &self.side {
            if sc.meta >= self.metas.len() {
                return Err(err("side condition on unknown metavariable".into()));
            }
            let mut ms = vec![];
            sc.expr.metas(&mut ms);
            if ms.iter().any(|&m| m >= self.metas.len()) {
                return Err(err("side condition mentions unknown metavariable".into()));
            }
            if ms.contains(&sc.meta) {
                return Err(err("self-referential side condition".into()));
            }
        }
        Ok(())
    }
}

/// A finite meet-semilattice fragment `L0` with its order and listed meets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeTable {
    pub elements: Vec<String>,
    /// `leq[a][b]` iff `a ≤ b`.
    pub leq: Vec<Vec<bool>>,
    pub meets: BTreeMap<(usize, usize), usize>,
}

impl LatticeTable {
    /// Builds the table from generating order pairs and listed meets
    /// `(a, b, a ∧ b)`; the order is closed reflexively and transitively.
    pub fn new(
        elements: Vec<String>,
        order: &[(String, String)],
        meets: &[(String, String, String)],
    ) -> Result<LatticeTable> {
        let n = elements.len();
        let idx = |s: &str| {
            elements
                .iter()
                .position(|e| e == s)
                .ok_or_else(|| Error::Lattice(format!("unknown element `{s}`")))
        };
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in order {
            let (a, b) = (idx(a)?, idx(b)?);
            leq[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i][k] && leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(Error::Lattice(format!(
                        "order is not antisymmetric on `{}` and `{}`",
                        elements[i], elements[j]
                    )));
                }
            }
        }
        let mut table = BTreeMap::new();
        for (a, b, c) in meets {
            let (a, b) = (idx(a)?, idx(b)?);
            let c = idx(c).map_err(|_| {
                Error::Lattice(format!("meet of `{}` and `{}` is not listed as an element", elements[a], elements[b]))
            })?;
            let lower = |x: usize| leq[x][a] && leq[x][b];
            if !lower(c) || (0..n).any(|x| lower(x) && !leq[x][c]) {
                return Err(Error::Lattice(format!(
                    "`{}` is not the meet of `{}` and `{}`",
                    elements[c], elements[a], elements[b]
                )));
            }
            table.insert((a.min(b), a.max(b)), c);
        }
        Ok(LatticeTable { elements, leq, meets: table })
    }

    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        if self.leq[a][b] {
            return Some(a);
        }
        if self.leq[b][a] {
            return Some(b);
        }
        self.meets.get(&(a.min(b), a.max(b))).copied()
    }
}

/// Computable closure operators standing in for infinitary axiom schemes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LimitRule {
    /// Infimum closure on every family symbol: an open bound becomes closed.
    MetArch,
    /// Meet closure for the symbols `symbols[p]` of an L-valued theory.
    LatticeArch { table: LatticeTable, symbols: Vec<SymId> },
}

impl LimitRule {
    pub fn name(&self) -> &'static str {
        match self {
            LimitRule::MetArch => "met-arch",
            LimitRule::LatticeArch { .. } => "lattice-arch",
        }
    }

    /// Applies the closure once to an edge set.
    pub fn close(&self, sig: &Signature, edges: &EdgeSet) -> EdgeSet {
        let mut out = edges.clone();
        match self {
            LimitRule::MetArch => {
                for (s, p, b) in edges.graded_edges() {
                    if sig.symbol(s).kind == SymbolKind::Family && b.strict {
                        out.insert(Edge::graded(s, Bound::closed(b.value), p.to_vec()));
                    }
                }
            }
            LimitRule::LatticeArch { table, symbols } => loop {
                let mut grew = false;
                let snapshot = out.clone();
                let tuples: std::collections::BTreeSet<Vec<usize>> = snapshot
                    .plain_edges()
                    .filter(|(s, _)| symbols.contains(s))
                    .map(|(_, p)| p.to_vec())
                    .collect();
                for t in tuples {
                    let held: Vec<usize> = (0..symbols.len())
                        .filter(|&p| snapshot.contains_plain(symbols[p], &t))
                        .collect();
                    for &a in &held {
                        for &b in &held {
                            if let Some(m) = table.meet(a, b) {
                                grew |= out.insert(Edge::plain(symbols[m], t.clone()));
                            }
                        }
                    }
                }
                if !grew {
                    break;
                }
            },
        }
        out
    }
}

/// How a theory expresses equality inside its relational signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EqWitness {
    /// Edge templates in the variables `0 = x`, `1 = y`.
    Edges(Vec<Atom>),
    /// No predicate in the natural presentation; see
    /// [`HornTheory::with_equality_predicate`].
    Implicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HornTheory {
    pub name: String,
    pub signature: Signature,
    pub axioms: Vec<HornAxiom>,
    pub limit_rules: Vec<LimitRule>,
    pub eq_witness: EqWitness,
    /// Axioms plus the equivalence and congruence axioms for `=`.
    #[serde(skip)]
    closure: Vec<HornAxiom>,
}

impl HornTheory {
    /// Validates the axioms and the equality witness.
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        axioms: Vec<HornAxiom>,
        limit_rules: Vec<LimitRule>,
        eq_witness: EqWitness,
    ) -> Result<HornTheory> {
        for ax in &axioms {
            ax.validate(&signature, false)?;
        }
        if let EqWitness::Edges(ws) = &eq_witness {
            for w in ws {
                if w.args.iter().any(|&v| v > 1) || w.sym == AtomSym::Eq {
                    return Err(Error::EqWitness("templates must be edges in x, y".into()));
                }
                if let Some(ix) = &w.index {
                    if !matches!(ix, IndexExpr::Const(_)) {
                        return Err(Error::EqWitness("template indices must be constants".into()));
                    }
                }
            }
        }
        let closure = closure_axioms(&signature, &axioms);
        let theory = HornTheory {
            name: name.into(),
            signature,
            axioms,
            limit_rules,
            eq_witness,
            closure,
        };
        theory.check_eq_witness()?;
        Ok(theory)
    }

    /// Builds a theory without the equality-witness check; the axioms are
    /// still validated.
    pub(crate) fn unchecked(
        name: impl Into<String>,
        signature: Signature,
        axioms: Vec<HornAxiom>,
        eq_witness: EqWitness,
    ) -> Result<HornTheory> {
        for ax in &axioms {
            ax.validate(&signature, false)?;
        }
        let closure = closure_axioms(&signature, &axioms);
        Ok(HornTheory { name: name.into(), signature, axioms, limit_rules: vec![], eq_witness, closure })
    }

    pub(crate) fn closure_axioms(&self) -> &[HornAxiom] {
        &self.closure
    }

    /// Extends the theory with a fresh binary predicate that the theory
    /// forces to be the diagonal, making equality expressible. Theories with
    /// an edge witness are returned unchanged.
    pub fn with_equality_predicate(&self) -> HornTheory {
        if matches!(self.eq_witness, EqWitness::Edges(_)) {
            return self.clone();
        }
        let mut sig = self.signature.clone();
        let mut name = "same".to_string();
        while sig.lookup(&name).is_some() {
            name.push('_');
        }
        let same = sig
            .push(crate::horn::structure::RelSymbol { name, arity: 2, kind: SymbolKind::Plain })
            .expect("fresh symbol");
        let mut axioms = self.axioms.clone();
        let xy = || vec!["x".to_string(), "y".to_string()];
        axioms.push(HornAxiom {
            name: "same-refl".into(),
            vars: vec!["x".into()],
            metas: vec![],
            premises: vec![],
            conclusion: Atom::rel(same, vec![0, 0]),
            side: vec![],
        });
        axioms.push(HornAxiom {
            name: "same-eq".into(),
            vars: xy(),
            metas: vec![],
            premises: vec![Atom::rel(same, vec![0, 1])],
            conclusion: Atom::eq(0, 1),
            side: vec![],
        });
        for s in 0..sig.len() {
            let sym = sig.symbol(s).clone();
            for pos in 0..sym.arity {
                let mut vars: Vec<String> = (0..sym.arity).map(|i| format!("x{i}")).collect();
                vars.push("y".into());
                let y = sym.arity;
                let src: Vec<usize> = (0..sym.arity).collect();
                let mut dst = src.clone();
                dst[pos] = y;
                let (metas, index) = match sym.kind {
                    SymbolKind::Plain => (vec![], None),
                    SymbolKind::Family => (vec!["e".to_string()], Some(IndexExpr::Meta(0))),
                };
                axioms.push(HornAxiom {
                    name: format!("same-cong-{}-{}", sym.name, pos),
                    vars,
                    metas,
                    premises: vec![
                        Atom::rel(same, vec![pos, y]),
                        Atom { sym: AtomSym::Rel(s), index: index.clone(), args: src },
                    ],
                    conclusion: Atom { sym: AtomSym::Rel(s), index, args: dst },
                    side: vec![],
                });
            }
        }
        HornTheory::new(
            self.name.clone(),
            sig,
            axioms,
            self.limit_rules.clone(),
            EqWitness::Edges(vec![Atom::rel(same, vec![0, 1])]),
        )
        .expect("equality extension is well-formed")
    }

    /// `Eq(x, y)` instantiated at points `x`, `y`.
    pub fn eq_edges(&self, x: usize, y: usize) -> Option<Vec<Edge>> {
        match &self.eq_witness {
            EqWitness::Implicit => None,
            EqWitness::Edges(ws) => Some(
                ws.iter()
                    .map(|w| w.instantiate(&[x, y], &[]).expect("relational template"))
                    .collect(),
            ),
        }
    }

    fn check_eq_witness(&self) -> Result<()> {
        let EqWitness::Edges(_) = &self.eq_witness else {
            return Ok(());
        };
        let two = PreStructure::discrete(["x", "y"]);
        let base: EdgeSet = self.eq_edges(0, 1).unwrap().into_iter().collect();
        let sat = engine::saturate(self, &two.with_edges(base));
        if !sat.equal(0, 1) {
            return Err(Error::EqWitness(format!("{}: Eq(x,y) does not entail x = y", self.name)));
        }
        let one = PreStructure::discrete(["x"]);
        let sat = engine::saturate(self, &one);
        for e in self.eq_edges(0, 0).unwrap() {
            if !sat.edges().contains(&e) {
                return Err(Error::EqWitness(format!(
                    "{}: Eq(x,x) edge is not entailed by the empty set",
                    self.name
                )));
            }
        }
        // Every relation must be closed under Eq by the axioms alone.
        for s in 0..self.signature.len() {
            let sym = self.signature.symbol(s);
            for pos in 0..sym.arity {
                let n = sym.arity + 1;
                let y = sym.arity;
                let src: Vec<usize> = (0..sym.arity).collect();
                let mut dst = src.clone();
                dst[pos] = y;
                let index = match sym.kind {
                    SymbolKind::Plain => None,
                    SymbolKind::Family => Some(Bound::closed(Rat::frac(1, 2))),
                };
                let mut base: EdgeSet = self.eq_edges(pos, y).unwrap().into_iter().collect();
                base.insert(Edge { sym: s, index, points: src });
                let scratch = PreStructure::anonymous(n, base).expect("scratch carrier");
                let sat = engine::saturate_without_equality(self, &scratch);
                if !sat.contains(&Edge { sym: s, index, points: dst }) {
                    return Err(Error::EqWitness(format!(
                        "{}: `{}` is not closed under Eq in position {}",
                        self.name, sym.name, pos
                    )));
                }
            }
        }
        Ok(())
    }

    /// Equality up to axiom names and variable naming.
    pub fn structurally_eq(&self, other: &HornTheory) -> bool {
        let strip = |t: &HornTheory| -> Vec<(Vec<Atom>, Atom, Vec<SideCondition>)> {
            t.axioms
                .iter()
                .map(|a| (a.premises.clone(), a.conclusion.clone(), a.side.clone()))
                .collect()
        };
        self.signature == other.signature
            && strip(self) == strip(other)
            && self.limit_rules == other.limit_rules
            && self.eq_witness == other.eq_witness
    }

    pub fn render_edge(&self, e: &Edge, names: &[String]) -> String {
        let sym = self.signature.symbol(e.sym);
        let args = e.points.iter().map(|&p| names[p].as_str()).collect::<Vec<_>>().join(",");
        match e.index {
            Some(b) => format!("{}[{}]({})", sym.name, b, args),
            None => format!("{}({})", sym.name, args),
        }
    }

    pub fn render_atom(&self, a: &Atom, vars: &[String], metas: &[String]) -> String {
        let args: Vec<&str> = a.args.iter().map(|&v| vars[v].as_str()).collect();
        match a.sym {
            AtomSym::Eq => format!("{} = {}", args[0], args[1]),
            AtomSym::Rel(s) => {
                let name = &self.signature.symbol(s).name;
                match &a.index {
                    Some(ix) => format!("{}[{}]({})", name, ix.render(metas), args.join(",")),
                    None => format!("{}({})", name, args.join(",")),
                }
            }
        }
    }
}

impl fmt::Display for HornAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Axioms, then reflexivity, symmetry and transitivity of `=`, then
/// congruence of every relation under `=` in each position.
fn closure_axioms(sig: &Signature, axioms: &[HornAxiom]) -> Vec<HornAxiom> {
    let mut out = axioms.to_vec();
    let ax = |name: &str, vars: &[&str], metas: Vec<String>, premises: Vec<Atom>, conclusion: Atom| HornAxiom {
        name: name.to_string(),
        vars: vars.iter().map(|s| s.to_string()).collect(),
        metas,
        premises,
        conclusion,
        side: vec![],
    };
    out.push(ax("=refl", &["x"], vec![], vec![], Atom::eq(0, 0)));
    out.push(ax("=sym", &["x", "y"], vec![], vec![Atom::eq(0, 1)], Atom::eq(1, 0)));
    out.push(ax(
        "=trans",
        &["x", "y", "z"],
        vec![],
        vec![Atom::eq(0, 1), Atom::eq(1, 2)],
        Atom::eq(0, 2),
    ));
    for s in 0..sig.len() {
        let sym = sig.symbol(s);
        for pos in 0..sym.arity {
            let mut vars: Vec<String> = (0..sym.arity).map(|i| format!("x{i}")).collect();
            vars.push("y".into());
            let y = sym.arity;
            let src: Vec<usize> = (0..sym.arity).collect();
            let mut dst = src.clone();
            dst[pos] = y;
            let (metas, index) = match sym.kind {
                SymbolKind::Plain => (vec![], None),
                SymbolKind::Family => (vec!["e".to_string()], Some(IndexExpr::Meta(0))),
            };
            let a = HornAxiom {
                name: format!("=cong-{}-{}", sym.name, pos),
                vars,
                metas,
                premises: vec![
                    Atom::eq(pos, y),
                    Atom { sym: AtomSym::Rel(s), index: index.clone(), args: src },
                ],
                conclusion: Atom { sym: AtomSym::Rel(s), index, args: dst },
                side: vec![],
            };
            debug_assert!(a.validate(sig, true).is_ok());
            out.push(a);
        }
    }
    out
}
