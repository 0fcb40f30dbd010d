//! Forward-chaining saturation over a finite carrier, with provenance.
//!
//! Facts are edges (or equalities) over carrier points. Family symbols are
//! kept canonically as the strongest known bound per tuple, so upward closure
//! is implicit and every scheme instance is evaluated at its strongest
//! valuation; together with finiteness of the carrier this guarantees a
//! fixpoint. Each fact keeps the history of its bounds together with the
//! axiom instance that produced them, from which derivations are rebuilt.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::horn::structure::{Edge, EdgeSet, PreStructure};
use crate::horn::theory::{AtomSym, HornAxiom, HornTheory, IndexExpr, LimitRule, SideRelation};
use crate::rational::Bound;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactKey {
    pub sym: AtomSym,
    pub args: Vec<usize>,
}

/// An edge or equality over a carrier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub key: FactKey,
    pub bound: Option<Bound>,
}

impl Fact {
    pub fn edge(e: &Edge) -> Fact {
        Fact { key: FactKey { sym: AtomSym::Rel(e.sym), args: e.points.clone() }, bound: e.index }
    }

    pub fn equal(a: usize, b: usize) -> Fact {
        Fact { key: FactKey { sym: AtomSym::Eq, args: vec![a, b] }, bound: None }
    }

    pub fn as_edge(&self) -> Option<Edge> {
        match self.key.sym {
            AtomSym::Eq => None,
            AtomSym::Rel(s) => Some(Edge { sym: s, index: self.bound, points: self.key.args.clone() }),
        }
    }

    /// Whether this fact entails `other` (same tuple, stronger or equal bound).
    pub fn implies(&self, other: &Fact) -> bool {
        self.key == other.key
            && match (&self.bound, &other.bound) {
                (None, None) => true,
                (Some(a), Some(b)) => a.implies(b),
                _ => false,
            }
    }
}

#[derive(Debug, Clone)]
enum Just {
    Given,
    Axiom {
        axiom: usize,
        valuation: Vec<usize>,
        metas: Vec<Bound>,
        premises: Vec<Fact>,
    },
    Limit {
        rule: usize,
        premises: Vec<Fact>,
    },
}

#[derive(Debug, Clone)]
struct Entry {
    bound: Option<Bound>,
    seq: usize,
    just: Just,
}

/// One rule instance in a derivation tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// The fact is (implied by) an edge of the input set.
    Given,
    /// Instance of the closure axiom `index` under `valuation` (variables to
    /// carrier points) and metavariable values `metas`.
    Axiom {
        axiom: String,
        index: usize,
        valuation: Vec<usize>,
        metas: Vec<Bound>,
    },
    /// Firing of the theory's limit rule `index`.
    Limit { rule: String, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub fact: Fact,
    pub step: Step,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RunOutcome {
    Fixpoint,
    GoalReached,
    FuelExhausted,
}

/// The saturation workspace and its result.
#[derive(Debug, Clone)]
pub struct Saturation<'t> {
    theory: &'t HornTheory,
    carrier: usize,
    facts: HashMap<FactKey, Vec<Entry>>,
    by_sym: BTreeMap<AtomSym, Vec<FactKey>>,
    seq: usize,
    with_equality: bool,
}

impl<'t> Saturation<'t> {
    fn new(theory: &'t HornTheory, pre: &PreStructure, with_equality: bool) -> Saturation<'t> {
        let mut s = Saturation {
            theory,
            carrier: pre.size(),
            facts: HashMap::new(),
            by_sym: BTreeMap::new(),
            seq: 0,
            with_equality,
        };
        for e in pre.edges().iter() {
            s.insert(Fact::edge(&e), Just::Given);
        }
        s
    }

    fn current(&self, key: &FactKey) -> Option<&Entry> {
        self.facts.get(key).and_then(|h| h.last())
    }

    fn improves(&self, f: &Fact) -> bool {
        if let Some(b) = f.bound {
            if b.is_empty() {
                return false;
            }
        }
        match self.current(&f.key) {
            None => true,
            Some(e) => match (e.bound, f.bound) {
                (Some(cur), Some(new)) => new.implies(&cur) && new != cur,
                _ => false,
            },
        }
    }

    fn insert(&mut self, f: Fact, just: Just) -> bool {
        if !self.improves(&f) {
            return false;
        }
        self.seq += 1;
        let entry = Entry { bound: f.bound, seq: self.seq, just };
        match self.facts.get_mut(&f.key) {
            Some(h) => h.push(entry),
            None => {
                self.by_sym.entry(f.key.sym).or_default().push(f.key.clone());
                self.facts.insert(f.key, vec![entry]);
            }
        }
        true
    }

    fn axioms(&self) -> &'t [HornAxiom] {
        if self.with_equality {
            self.theory.closure_axioms()
        } else {
            &self.theory.axioms
        }
    }

    fn candidates(&self) -> Vec<(Fact, Just)> {
        let mut out = Vec::new();
        for (ai, ax) in self.axioms().iter().enumerate() {
            if !self.with_equality && ax.conclusion.sym == AtomSym::Eq {
                continue;
            }
            let mut valuation = vec![None; ax.vars.len()];
            let mut matched = vec![None; ax.metas.len()];
            let mut premises = Vec::with_capacity(ax.premises.len());
            self.match_premises(ax, 0, &mut valuation, &mut matched, &mut premises, &mut |val, metas, prem| {
                let concl = &ax.conclusion;
                let fact = Fact {
                    key: FactKey { sym: concl.sym, args: concl.args.iter().map(|&v| val[v]).collect() },
                    bound: concl.index.as_ref().map(|ix| ix.eval(metas)),
                };
                if self.improves(&fact) {
                    out.push((
                        fact,
                        Just::Axiom {
                            axiom: ai,
                            valuation: val.to_vec(),
                            metas: metas.to_vec(),
                            premises: prem.to_vec(),
                        },
                    ));
                }
            });
        }
        for (ri, rule) in self.theory.limit_rules.iter().enumerate() {
            match rule {
                LimitRule::MetArch => {
                    for (key, hist) in &self.facts {
                        let e = hist.last().unwrap();
                        if let Some(b) = e.bound {
                            if b.strict {
                                let prem = Fact { key: key.clone(), bound: Some(b) };
                                out.push((
                                    Fact { key: key.clone(), bound: Some(Bound::closed(b.value)) },
                                    Just::Limit { rule: ri, premises: vec![prem] },
                                ));
                            }
                        }
                    }
                }
                LimitRule::LatticeArch { table, symbols } => {
                    let mut held: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
                    for (p, &s) in symbols.iter().enumerate() {
                        for key in self.by_sym.get(&AtomSym::Rel(s)).into_iter().flatten() {
                            held.entry(&key.args).or_default().push(p);
                        }
                    }
                    for (args, ps) in held {
                        for &a in &ps {
                            for &b in &ps {
                                if let Some(m) = table.meet(a, b) {
                                    let f = Fact {
                                        key: FactKey { sym: AtomSym::Rel(symbols[m]), args: args.to_vec() },
                                        bound: None,
                                    };
                                    if self.improves(&f) {
                                        let pf = |p: usize| Fact {
                                            key: FactKey { sym: AtomSym::Rel(symbols[p]), args: args.to_vec() },
                                            bound: None,
                                        };
                                        out.push((f, Just::Limit { rule: ri, premises: vec![pf(a), pf(b)] }));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn match_premises(
        &self,
        ax: &HornAxiom,
        i: usize,
        valuation: &mut Vec<Option<usize>>,
        matched: &mut Vec<Option<Bound>>,
        premises: &mut Vec<Fact>,
        emit: &mut dyn FnMut(&[usize], &[Bound], &[Fact]),
    ) {
        if i == ax.premises.len() {
            let free: Vec<usize> = (0..ax.vars.len()).filter(|&v| valuation[v].is_none()).collect();
            let Some(metas) = ax.resolve_metas(matched) else { return };
            let mut val: Vec<usize> = valuation.iter().map(|v| v.unwrap_or(0)).collect();
            if free.is_empty() {
                emit(&val, &metas, premises);
                return;
            }
            if self.carrier == 0 {
                return;
            }
            // odometer over the free variables
            let mut digits = vec![0usize; free.len()];
            loop {
                for (k, &v) in free.iter().enumerate() {
                    val[v] = digits[k];
                }
                emit(&val, &metas, premises);
                let mut k = 0;
                loop {
                    if k == digits.len() {
                        return;
                    }
                    digits[k] += 1;
                    if digits[k] < self.carrier {
                        break;
                    }
                    digits[k] = 0;
                    k += 1;
                }
            }
        }
        let atom = &ax.premises[i];
        let Some(keys) = self.by_sym.get(&atom.sym) else { return };
        for key in keys {
            let entry = self.current(key).unwrap();
            let mut bound_here = Vec::new();
            let mut ok = true;
            for (&v, &p) in atom.args.iter().zip(&key.args) {
                match valuation[v] {
                    Some(q) if q != p => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        valuation[v] = Some(p);
                        bound_here.push(v);
                    }
                }
            }
            let mut saved_meta = None;
            if ok {
                match (&atom.index, entry.bound) {
                    (None, None) => {}
                    (Some(IndexExpr::Const(c)), Some(b)) => ok = b.admits(*c),
                    (Some(IndexExpr::Meta(m)), Some(b)) => {
                        saved_meta = Some((*m, matched[*m]));
                        matched[*m] = Some(match matched[*m] {
                            Some(prev) => prev.join(b),
                            None => b,
                        });
                    }
                    _ => ok = false,
                }
            }
            if ok {
                premises.push(Fact { key: key.clone(), bound: entry.bound });
                self.match_premises(ax, i + 1, valuation, matched, premises, emit);
                premises.pop();
            }
            if let Some((m, prev)) = saved_meta {
                matched[m] = prev;
            }
            for v in bound_here {
                valuation[v] = None;
            }
        }
    }

    pub(crate) fn run(&mut self, fuel: usize, goal: Option<&Fact>) -> RunOutcome {
        let mut steps = 0usize;
        if goal.is_some_and(|g| self.holds(g)) {
            return RunOutcome::GoalReached;
        }
        loop {
            let cands = self.candidates();
            let mut grew = false;
            for (f, j) in cands {
                if !self.improves(&f) {
                    continue;
                }
                if steps >= fuel {
                    return RunOutcome::FuelExhausted;
                }
                self.insert(f, j);
                steps += 1;
                grew = true;
                if goal.is_some_and(|g| self.holds(g)) {
                    return RunOutcome::GoalReached;
                }
            }
            if !grew {
                return RunOutcome::Fixpoint;
            }
        }
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    /// Whether the saturated set contains (a fact implying) `f`.
    pub fn holds(&self, f: &Fact) -> bool {
        if f.key.sym == AtomSym::Eq && f.key.args[0] == f.key.args[1] && self.with_equality {
            return true;
        }
        self.current(&f.key).is_some_and(|e| match (e.bound, f.bound) {
            (None, None) => true,
            (Some(a), Some(b)) => a.implies(&b),
            _ => false,
        })
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.holds(&Fact::edge(e))
    }

    pub fn equal(&self, a: usize, b: usize) -> bool {
        a == b || self.holds(&Fact::equal(a, b))
    }

    /// All derived edges over the signature.
    pub fn edges(&self) -> EdgeSet {
        self.facts
            .iter()
            .filter_map(|(k, h)| match k.sym {
                AtomSym::Eq => None,
                AtomSym::Rel(s) => Some(Edge { sym: s, index: h.last().unwrap().bound, points: k.args.clone() }),
            })
            .collect()
    }

    /// Derived equalities `a = b` with `a ≠ b`, sorted.
    pub fn equalities(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .by_sym
            .get(&AtomSym::Eq)
            .into_iter()
            .flatten()
            .map(|k| (k.args[0], k.args[1]))
            .filter(|(a, b)| a != b)
            .collect();
        v.sort_unstable();
        v
    }

    /// Rebuilds a derivation for `goal`, if it holds.
    pub fn derivation(&self, goal: &Fact) -> Option<Derivation> {
        if !self.holds(goal) {
            return None;
        }
        if goal.key.sym == AtomSym::Eq && goal.key.args[0] == goal.key.args[1] && self.current(&goal.key).is_none() {
            // reflexivity with no recorded entry
            let x = goal.key.args[0];
            let idx = self.theory.closure_axioms().iter().position(|a| a.name == "=refl").unwrap();
            return Some(Derivation {
                fact: goal.clone(),
                step: Step::Axiom { axiom: "=refl".into(), index: idx, valuation: vec![x], metas: vec![] },
                premises: vec![],
            });
        }
        Some(self.build(goal, usize::MAX))
    }

    fn build(&self, needed: &Fact, before: usize) -> Derivation {
        let hist = &self.facts[&needed.key];
        let entry = hist
            .iter()
            .rev()
            .find(|e| {
                e.seq < before
                    && match (e.bound, needed.bound) {
                        (Some(a), Some(b)) => a.implies(&b),
                        (None, None) => true,
                        _ => false,
                    }
            })
            .expect("provenance history covers every needed premise");
        let fact = Fact { key: needed.key.clone(), bound: entry.bound };
        let axioms = self.axioms();
        match &entry.just {
            Just::Given => Derivation { fact, step: Step::Given, premises: vec![] },
            Just::Axiom { axiom, valuation, metas, premises } => Derivation {
                fact,
                step: Step::Axiom {
                    axiom: axioms[*axiom].name.clone(),
                    index: *axiom,
                    valuation: valuation.clone(),
                    metas: metas.clone(),
                },
                premises: premises.iter().map(|p| self.build(p, entry.seq)).collect(),
            },
            Just::Limit { rule, premises } => Derivation {
                fact,
                step: Step::Limit { rule: self.theory.limit_rules[*rule].name().into(), index: *rule },
                premises: premises.iter().map(|p| self.build(p, entry.seq)).collect(),
            },
        }
    }
}

/// Least fixpoint of axiom application and limit-rule closure over the
/// carrier of `pre`.
pub fn saturate<'t>(theory: &'t HornTheory, pre: &PreStructure) -> Saturation<'t> {
    let mut s = Saturation::new(theory, pre, true);
    s.run(usize::MAX, None);
    s
}

/// Saturation under the theory's own axioms only, without the equivalence
/// and congruence axioms of `=`.
pub fn saturate_without_equality<'t>(theory: &'t HornTheory, pre: &PreStructure) -> Saturation<'t> {
    let mut s = Saturation::new(theory, pre, false);
    s.run(usize::MAX, None);
    s
}

/// Result of an entailment query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entailment {
    Entailed(Derivation),
    /// Saturation reached its fixpoint without the goal.
    NotEntailed,
    /// The step budget ran out before either the goal or the fixpoint.
    FuelExhausted,
}

impl Entailment {
    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            Entailment::Entailed(d) => Some(d),
            _ => None,
        }
    }
}

/// Whether the edges of `base` entail `goal`, with `fuel` bounding the
/// number of new facts the search may add.
pub fn entails(theory: &HornTheory, base: &PreStructure, goal: &Fact, fuel: usize) -> Entailment {
    let mut s = Saturation::new(theory, base, true);
    match s.run(fuel, Some(goal)) {
        RunOutcome::GoalReached => Entailment::Entailed(s.derivation(goal).expect("goal holds")),
        RunOutcome::Fixpoint => Entailment::NotEntailed,
        RunOutcome::FuelExhausted => Entailment::FuelExhausted,
    }
}

pub(crate) fn side_holds(ax: &HornAxiom, metas: &[Bound]) -> bool {
    ax.side.iter().all(|sc| {
        let lhs = metas[sc.meta];
        let rhs = sc.expr.eval(metas);
        match sc.relation {
            SideRelation::Ge => rhs.implies(&lhs),
            SideRelation::Gt => Bound::open(rhs.value).implies(&lhs),
            SideRelation::Le => lhs.implies(&rhs),
            SideRelation::Lt => lhs.value < rhs.value,
        }
    })
}

/// Replays a derivation against the theory and the input edges. Returns the
/// first invalid step.
pub fn check_derivation(theory: &HornTheory, base: &PreStructure, d: &Derivation) -> Result<(), String> {
    let n = base.size();
    if d.fact.key.args.iter().any(|&p| p >= n) {
        return Err(format!("fact {:?} leaves the carrier", d.fact));
    }
    for p in &d.premises {
        check_derivation(theory, base, p)?;
    }
    match &d.step {
        Step::Given => match d.fact.as_edge() {
            Some(e) if base.edges().contains(&e) => Ok(()),
            _ => Err(format!("{:?} is not an input edge", d.fact)),
        },
        Step::Axiom { axiom, index, valuation, metas } => {
            let ax = theory
                .closure_axioms()
                .get(*index)
                .filter(|a| &a.name == axiom)
                .ok_or_else(|| format!("unknown axiom `{axiom}`"))?;
            if valuation.len() != ax.vars.len() || metas.len() != ax.metas.len() {
                return Err(format!("{axiom}: instance has the wrong shape"));
            }
            if valuation.iter().any(|&p| p >= n) {
                return Err(format!("{axiom}: valuation leaves the carrier"));
            }
            if !side_holds(ax, metas) {
                return Err(format!("{axiom}: side condition violated"));
            }
            if d.premises.len() != ax.premises.len() {
                return Err(format!("{axiom}: expected {} premises", ax.premises.len()));
            }
            for (atom, p) in ax.premises.iter().zip(&d.premises) {
                let want = Fact {
                    key: FactKey { sym: atom.sym, args: atom.args.iter().map(|&v| valuation[v]).collect() },
                    bound: atom.index.as_ref().map(|ix| ix.eval(metas)),
                };
                if !p.fact.implies(&want) {
                    return Err(format!("{axiom}: premise {:?} does not match {:?}", p.fact, want));
                }
            }
            let c = &ax.conclusion;
            let got = Fact {
                key: FactKey { sym: c.sym, args: c.args.iter().map(|&v| valuation[v]).collect() },
                bound: c.index.as_ref().map(|ix| ix.eval(metas)),
            };
            if got.implies(&d.fact) {
                Ok(())
            } else {
                Err(format!("{axiom}: conclusion {:?} does not yield {:?}", got, d.fact))
            }
        }
        Step::Limit { rule, index } => {
            let lr = theory
                .limit_rules
                .get(*index)
                .filter(|r| r.name() == rule)
                .ok_or_else(|| format!("unknown limit rule `{rule}`"))?;
            match lr {
                LimitRule::MetArch => match (d.premises.as_slice(), d.fact.bound) {
                    ([p], Some(b)) if p.fact.key == d.fact.key && p.fact.bound.is_some() => {
                        let pb = p.fact.bound.unwrap();
                        if Bound::closed(pb.value).implies(&b) {
                            Ok(())
                        } else {
                            Err("met-arch: conclusion is not the infimum of the premise family".into())
                        }
                    }
                    _ => Err("met-arch: malformed instance".into()),
                },
                LimitRule::LatticeArch { table, symbols } => {
                    let sym_of = |f: &Fact| match f.key.sym {
                        AtomSym::Rel(s) => symbols.iter().position(|&t| t == s),
                        AtomSym::Eq => None,
                    };
                    match d.premises.as_slice() {
                        [a, b] if a.fact.key.args == d.fact.key.args && b.fact.key.args == d.fact.key.args => {
                            let (Some(pa), Some(pb), Some(pc)) = (sym_of(&a.fact), sym_of(&b.fact), sym_of(&d.fact)) else {
                                return Err("lattice-arch: symbol outside the lattice".into());
                            };
                            if table.meet(pa, pb) == Some(pc) {
                                Ok(())
                            } else {
                                Err("lattice-arch: conclusion is not the meet".into())
                            }
                        }
                        _ => Err("lattice-arch: malformed instance".into()),
                    }
                }
            }
        }
    }
}
