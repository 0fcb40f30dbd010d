//! Saturation of derivable judgements over a finite context.
//!
//! Terms are interned; every stored fact is over derivably defined terms and
//! keeps each bound it was derived at, with a sequence number and the rule
//! instance that produced it. Premises of a stored instance always resolve
//! to entries with smaller sequence numbers, so proofs are read back without
//! search.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::horn::engine::{saturate_without_equality, Derivation, Fact, Step};
use crate::horn::structure::{Edge, EdgeSet, PreStructure, SymId};
use crate::horn::theory::AtomSym;
use crate::logic::calculus::{closed_index, Calculus, Judgement, Proof, Rule};
use crate::rational::Bound;
use crate::sigma::term::Term;
use crate::sigma::variety::Variety;

pub type TermId = usize;

/// Which terms the bank may introduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    /// Every term up to the depth bound, generated over class representatives.
    #[default]
    Full,
    /// Only the context variables and the subterms of the seeds.
    Relevant,
}

#[derive(Debug, Clone)]
pub struct BankConfig {
    pub depth: usize,
    pub scope: Scope,
    /// Terms materialized up front, for instance the terms of a goal.
    pub seeds: Vec<Term>,
    pub max_terms: usize,
    pub max_rounds: usize,
}

impl Default for BankConfig {
    fn default() -> BankConfig {
        BankConfig { depth: 2, scope: Scope::Full, seeds: vec![], max_terms: 4000, max_rounds: 200 }
    }
}

impl BankConfig {
    pub fn depth(depth: usize) -> BankConfig {
        BankConfig { depth, ..BankConfig::default() }
    }

    pub fn relevant(depth: usize, seeds: Vec<Term>) -> BankConfig {
        BankConfig { depth, scope: Scope::Relevant, seeds, ..BankConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum NodeKey {
    Var(usize),
    App(usize, Vec<TermId>),
}

#[derive(Debug, Clone)]
struct Node {
    key: NodeKey,
    term: Term,
    depth: usize,
}

#[derive(Debug, Clone)]
enum DefJust {
    Var,
    EAr,
}

#[derive(Debug, Clone)]
struct DefEntry {
    seq: u64,
    just: DefJust,
}

#[derive(Debug, Clone)]
enum FactJust {
    Ctx,
    Mor { op: usize },
    Ax { axiom: usize, subst: Vec<TermId> },
    IAr { entry: usize, subst: Vec<TermId> },
    Horn { axiom: usize, valuation: Vec<TermId>, metas: Vec<Bound> },
}

#[derive(Debug, Clone)]
struct FactEntry {
    bound: Option<Bound>,
    seq: u64,
    just: FactJust,
}

type FactKey = (SymId, Vec<TermId>);

/// Result of a bounded derivation query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derived {
    /// A checked proof whose conclusion implies the goal.
    Proof(Arc<Proof>),
    /// The bank reached its fixpoint within the bound and the goal is not in it.
    Absent,
    /// The bound or a guard cut the search short; the goal was not found.
    Exhausted,
}

/// The derivable judgements over a context within a term-depth bound.
#[derive(Debug, Clone)]
pub struct JudgementBank {
    calc: Arc<Calculus>,
    context: PreStructure,
    depth: usize,
    scope: Scope,
    nodes: Vec<Node>,
    index: HashMap<NodeKey, TermId>,
    defs: Vec<Option<DefEntry>>,
    facts: HashMap<FactKey, Vec<FactEntry>>,
    best: HashMap<FactKey, Option<Bound>>,
    seq: u64,
    truncated: bool,
    growing: bool,
    frozen: Option<Vec<TermId>>,
    complete: bool,
    rounds: usize,
    reps: Vec<TermId>,
    congruence: HashMap<(usize, Vec<TermId>), TermId>,
}

/// Saturates with the full scope at the given depth.
pub fn saturate_judgements(variety: &Arc<Variety>, context: &PreStructure, depth: usize) -> Result<JudgementBank> {
    let calc = Arc::new(Calculus::new(Arc::clone(variety))?);
    JudgementBank::build(calc, context, &BankConfig::depth(depth))
}

/// Looks for a proof of `goal`, materializing its terms first.
pub fn derive(calc: &Arc<Calculus>, context: &PreStructure, goal: &Judgement, config: &BankConfig) -> Result<Derived> {
    for t in goal.terms() {
        t.validate(calc.variety.signature(), context.size())?;
    }
    let mut config = config.clone();
    if config.scope == Scope::Full && goal.terms().iter().any(|t| t.depth() > config.depth) {
        return Ok(Derived::Exhausted);
    }
    config.seeds.extend(goal.terms().into_iter().cloned());
    let bank = JudgementBank::build(Arc::clone(calc), context, &config)?;
    bank.answer(goal)
}

impl JudgementBank {
    pub fn build(calc: Arc<Calculus>, context: &PreStructure, config: &BankConfig) -> Result<JudgementBank> {
        let sig = calc.variety.signature();
        for e in context.edges().iter() {
            if e.index.is_some_and(|b| b.strict) {
                return Err(Error::Proof("contexts with open indices are not supported".into()));
            }
            if e.sym >= sig.theory().signature.len() {
                return Err(Error::Proof("context edge over an unknown symbol".into()));
            }
        }
        for s in &config.seeds {
            s.validate(sig, context.size())?;
        }
        let mut bank = JudgementBank {
            calc,
            context: context.clone(),
            depth: config.depth,
            scope: config.scope,
            nodes: vec![],
            index: HashMap::new(),
            defs: vec![],
            facts: HashMap::new(),
            best: HashMap::new(),
            seq: 0,
            truncated: false,
            growing: false,
            frozen: None,
            complete: false,
            rounds: 0,
            reps: vec![],
            congruence: HashMap::new(),
        };
        for x in 0..context.size() {
            let id = bank.intern(&Term::Var(x));
            bank.define(id, DefJust::Var);
        }
        for e in context.edges().iter() {
            bank.insert_fact((e.sym, e.points.clone()), e.index, FactJust::Ctx);
        }
        for s in &config.seeds {
            if config.scope == Scope::Relevant || s.depth() <= config.depth {
                bank.intern(s);
            }
        }
        bank.run(config);
        bank.finish();
        Ok(bank)
    }

    pub fn calculus(&self) -> &Arc<Calculus> {
        &self.calc
    }

    pub fn context(&self) -> &PreStructure {
        &self.context
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    /// Whether saturation reached its fixpoint without cutting off a term.
    pub fn complete(&self) -> bool {
        self.complete
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.nodes[id].term
    }

    pub fn lookup(&self, t: &Term) -> Option<TermId> {
        let key = match t {
            Term::Var(x) => NodeKey::Var(*x),
            Term::App(op, args) => NodeKey::App(*op, args.iter().map(|a| self.lookup(a)).collect::<Option<_>>()?),
        };
        self.index.get(&key).copied()
    }

    pub fn is_defined(&self, id: TermId) -> bool {
        self.defs[id].is_some()
    }

    /// Derivably defined terms, in order of introduction.
    pub fn defined(&self) -> Vec<TermId> {
        (0..self.nodes.len()).filter(|&i| self.is_defined(i)).collect()
    }

    /// The representative of the class of a defined term.
    pub fn rep(&self, id: TermId) -> TermId {
        self.reps[id]
    }

    /// Classes of defined terms under derivable equality, each listed from its
    /// representative, ordered by representative.
    pub fn classes(&self) -> Vec<Vec<TermId>> {
        let mut by_rep: BTreeMap<(usize, &Term), Vec<TermId>> = BTreeMap::new();
        for id in self.defined() {
            let r = self.reps[id];
            by_rep.entry((self.nodes[r].depth, &self.nodes[r].term)).or_default().push(id);
        }
        by_rep
            .into_values()
            .map(|mut ids| {
                let r = self.reps[ids[0]];
                ids.retain(|&i| i != r);
                ids.insert(0, r);
                ids
            })
            .collect()
    }

    /// The representative of the class of an arbitrary term, if it is
    /// derivably defined.
    pub fn canonical(&self, t: &Term) -> Option<TermId> {
        match t {
            Term::Var(_) => self.lookup(t).filter(|&i| self.is_defined(i)).map(|i| self.reps[i]),
            Term::App(op, args) => {
                let rs: Vec<TermId> = args.iter().map(|a| self.canonical(a)).collect::<Option<_>>()?;
                self.congruence.get(&(*op, rs)).copied()
            }
        }
    }

    /// Strongest derived bound between defined terms; `Some(None)` for a
    /// plain edge.
    pub fn bound(&self, sym: SymId, ids: &[TermId]) -> Option<Option<Bound>> {
        self.best.get(&(sym, ids.to_vec())).copied()
    }

    /// Whether a relation between defined terms is derivable at `need`.
    pub fn holds_ids(&self, sym: SymId, ids: &[TermId], need: Option<Bound>) -> bool {
        match (self.bound(sym, ids), need) {
            (Some(None), None) => true,
            (Some(Some(b)), Some(n)) => b.implies(&n),
            _ => false,
        }
    }

    /// Whether the judgement is derivable, up to derivable equality of its
    /// terms.
    pub fn holds(&self, j: &Judgement) -> bool {
        match j {
            Judgement::Def(t) => self.canonical(t).is_some(),
            Judgement::Rel { sym, index, terms } => {
                let Some(ids) = terms.iter().map(|t| self.canonical(t)).collect::<Option<Vec<_>>>() else {
                    return false;
                };
                self.holds_ids(*sym, &ids, index.map(Bound::closed))
            }
        }
    }

    /// Derived relations between defined terms at their strongest bound,
    /// ordered by symbol and terms.
    pub fn relations(&self) -> Vec<(SymId, Vec<TermId>, Option<Bound>)> {
        let mut out: Vec<_> = self.best.iter().map(|((s, ids), b)| (*s, ids.clone(), *b)).collect();
        out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        out
    }

    /// Every stored judgement at its strongest bound.
    pub fn judgements(&self) -> Vec<Judgement> {
        let mut out: Vec<Judgement> = self.defined().into_iter().map(|i| Judgement::Def(self.term(i).clone())).collect();
        let mut rel: Vec<Judgement> = self
            .best
            .iter()
            .map(|((sym, ids), b)| Judgement::Rel {
                sym: *sym,
                index: b.map(|b| b.value),
                terms: ids.iter().map(|&i| self.term(i).clone()).collect(),
            })
            .collect();
        rel.sort();
        out.extend(rel);
        out
    }

    pub fn len(&self) -> usize {
        self.defined().len() + self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn answer(&self, goal: &Judgement) -> Result<Derived> {
        if let Some(p) = self.proof(goal)? {
            return Ok(Derived::Proof(self.calc.weaken(p, goal)));
        }
        Ok(if self.complete { Derived::Absent } else { Derived::Exhausted })
    }

    /// A proof of a judgement whose terms are materialized in the bank; the
    /// conclusion may carry a stronger index than asked for.
    pub fn proof(&self, goal: &Judgement) -> Result<Option<Arc<Proof>>> {
        let mut memo = Memo::default();
        match goal {
            Judgement::Def(t) => match self.lookup(t) {
                Some(id) if self.is_defined(id) => Ok(Some(self.def_proof(id, &mut memo)?)),
                _ => Ok(None),
            },
            Judgement::Rel { sym, index, terms } => {
                let Some(ids) = terms.iter().map(|t| self.lookup(t)).collect::<Option<Vec<_>>>() else {
                    return Ok(None);
                };
                let need = index.map(Bound::closed);
                let key = (*sym, ids);
                let Some(hist) = self.facts.get(&key) else { return Ok(None) };
                let Some(pos) = hist.iter().position(|e| bound_implies(e.bound, need)) else {
                    return Ok(None);
                };
                Ok(Some(self.fact_proof(&key, pos, &mut memo)?))
            }
        }
    }

    // ---- construction -------------------------------------------------

    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn intern(&mut self, t: &Term) -> TermId {
        let key = match t {
            Term::Var(x) => NodeKey::Var(*x),
            Term::App(op, args) => NodeKey::App(*op, args.iter().map(|a| self.intern(a)).collect()),
        };
        self.intern_key(key)
    }

    fn intern_key(&mut self, key: NodeKey) -> TermId {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let (term, depth) = match &key {
            NodeKey::Var(x) => (Term::Var(*x), 0),
            NodeKey::App(op, args) => (
                Term::App(*op, args.iter().map(|&a| self.nodes[a].term.clone()).collect()),
                1 + args.iter().map(|&a| self.nodes[a].depth).max().unwrap_or(0),
            ),
        };
        let id = self.nodes.len();
        self.nodes.push(Node { key: key.clone(), term, depth });
        self.defs.push(None);
        self.reps.push(id);
        self.index.insert(key, id);
        id
    }

    fn define(&mut self, id: TermId, just: DefJust) -> bool {
        if self.defs[id].is_some() {
            return false;
        }
        let seq = self.next_seq();
        self.defs[id] = Some(DefEntry { seq, just });
        true
    }

    fn insert_fact(&mut self, key: FactKey, bound: Option<Bound>, just: FactJust) -> bool {
        if bound.is_some_and(|b| b.strict) {
            return false;
        }
        if let Some(cur) = self.best.get(&key) {
            if bound_implies(*cur, bound) {
                return false;
            }
        }
        let seq = self.next_seq();
        self.best.insert(key.clone(), bound);
        self.facts.entry(key).or_default().push(FactEntry { bound, seq, just });
        true
    }

    /// Closes the facts over the current terms, then adds one layer of
    /// terms over the class representatives, until neither changes anything.
    fn run(&mut self, config: &BankConfig) {
        let mut guard_hit = false;
        self.refresh_reps();
        'outer: loop {
            loop {
                self.rounds += 1;
                if self.rounds > config.max_rounds || self.nodes.len() > config.max_terms {
                    guard_hit = true;
                    break 'outer;
                }
                let horn = self.horn_phase();
                self.refresh_reps();
                let ops = self.op_phase();
                self.refresh_reps();
                if !horn && !ops {
                    break;
                }
            }
            if self.scope == Scope::Relevant {
                break;
            }
            let before = self.nodes.len();
            self.growing = true;
            self.frozen = Some(self.allowed());
            let grew = self.rule_ear() | self.rule_ax() | self.rule_iar();
            self.growing = false;
            self.frozen = None;
            self.refresh_reps();
            if !grew && self.nodes.len() == before {
                break;
            }
        }
        self.complete = !guard_hit && !self.truncated && self.scope == Scope::Full;
    }

    fn allowed(&self) -> Vec<TermId> {
        if let Some(f) = &self.frozen {
            return f.clone();
        }
        match self.scope {
            Scope::Full => {
                let mut r: Vec<TermId> = self.defined().into_iter().filter(|&i| self.reps[i] == i).collect();
                r.sort_by(|&a, &b| self.order(a, b));
                r
            }
            Scope::Relevant => self.defined(),
        }
    }

    fn order(&self, a: TermId, b: TermId) -> std::cmp::Ordering {
        (self.nodes[a].depth, &self.nodes[a].term).cmp(&(self.nodes[b].depth, &self.nodes[b].term))
    }

    fn eq_pair_holds(&self, s: TermId, t: TermId) -> bool {
        self.calc.eq_templates.iter().all(|w| {
            let AtomSym::Rel(sym) = w.sym else { return false };
            let ids: Vec<TermId> = w.args.iter().map(|&a| if a == 0 { s } else { t }).collect();
            self.holds_ids(sym, &ids, w.index.as_ref().map(|ix| ix.eval(&[])))
        })
    }

    fn refresh_reps(&mut self) {
        let n = self.nodes.len();
        let mut uf: UnionFind<usize> = UnionFind::new(n);
        let first = &self.calc.eq_templates[0];
        let AtomSym::Rel(sym0) = first.sym else { unreachable!("relational template") };
        let (p0, p1) = (first.args.iter().position(|&a| a == 0), first.args.iter().position(|&a| a == 1));
        if let (Some(p0), Some(p1)) = (p0, p1) {
            let pairs: Vec<(TermId, TermId)> = self
                .best
                .keys()
                .filter(|(s, _)| *s == sym0)
                .map(|(_, ids)| (ids[p0], ids[p1]))
                .filter(|&(s, t)| s != t)
                .collect();
            for (s, t) in pairs {
                if self.eq_pair_holds(s, t) {
                    uf.union(s, t);
                }
            }
        }
        let mut best: HashMap<usize, TermId> = HashMap::new();
        for id in 0..n {
            if !self.is_defined(id) {
                continue;
            }
            let root = uf.find(id);
            match best.get(&root) {
                Some(&cur) if self.order(cur, id).is_le() => {}
                _ => {
                    best.insert(root, id);
                }
            }
        }
        self.reps = (0..n).map(|id| if self.is_defined(id) { best[&uf.find(id)] } else { id }).collect();
    }

    fn finish(&mut self) {
        let mut cong = HashMap::new();
        for id in 0..self.nodes.len() {
            if !self.is_defined(id) {
                continue;
            }
            if let NodeKey::App(op, args) = &self.nodes[id].key {
                let rs: Vec<TermId> = args.iter().map(|&a| self.reps[a]).collect();
                cong.entry((*op, rs)).or_insert(self.reps[id]);
            }
        }
        self.congruence = cong;
    }

    fn edge_holds(&self, e: &Edge, f: &[TermId]) -> bool {
        let ids: Vec<TermId> = e.points.iter().map(|&p| f[p]).collect();
        self.holds_ids(e.sym, &ids, e.index)
    }

    /// Assignments of `n` variables to `allowed` terms satisfying every
    /// constraint, extending `init`.
    fn search(
        &self,
        n: usize,
        constraints: &[Edge],
        allowed: &[TermId],
        init: Vec<Option<TermId>>,
        visit: &mut dyn FnMut(&[TermId]),
    ) {
        let mut order: Vec<usize> = (0..n).filter(|&v| init[v].is_none()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(constraints.iter().filter(|e| e.points.contains(&v)).count()));
        let assigned_at = |v: usize, order: &[usize]| order.iter().position(|&w| w == v);
        // constraints checked once their last variable is assigned
        let mut due: Vec<Vec<&Edge>> = vec![vec![]; order.len() + 1];
        for e in constraints {
            let last = e.points.iter().map(|&p| assigned_at(p, &order).map_or(0, |k| k + 1)).max().unwrap_or(0);
            due[last].push(e);
        }
        let mut cur: Vec<TermId> = init.iter().map(|v| v.unwrap_or(usize::MAX)).collect();
        if due[0].iter().any(|e| !self.edge_holds(e, &cur)) {
            return;
        }
        self.search_from(0, &order, &due, allowed, &mut cur, visit);
    }

    fn search_from(
        &self,
        k: usize,
        order: &[usize],
        due: &[Vec<&Edge>],
        allowed: &[TermId],
        cur: &mut Vec<TermId>,
        visit: &mut dyn FnMut(&[TermId]),
    ) {
        if k == order.len() {
            visit(cur);
            return;
        }
        for &t in allowed {
            cur[order[k]] = t;
            if due[k + 1].iter().all(|e| self.edge_holds(e, cur)) {
                self.search_from(k + 1, order, due, allowed, cur, visit);
            }
        }
        cur[order[k]] = usize::MAX;
    }

    /// Matches a pattern term against a stored term.
    fn unify(&self, pat: &Term, id: TermId, tau: &mut [Option<TermId>]) -> bool {
        match pat {
            Term::Var(v) => match tau[*v] {
                Some(t) => t == id,
                None => {
                    tau[*v] = Some(id);
                    true
                }
            },
            Term::App(op, args) => match &self.nodes[id].key {
                NodeKey::App(op2, kids) if op2 == op && kids.len() == args.len() => {
                    let kids = kids.clone();
                    args.iter().zip(kids).all(|(a, k)| self.unify(a, k, tau))
                }
                _ => false,
            },
        }
    }

    /// Materializes `t` under `tau` if the scope allows; `None` when it
    /// cannot exist in this bank.
    fn place(&mut self, t: &Term, tau: &[TermId]) -> Option<TermId> {
        match t {
            Term::Var(v) => Some(tau[*v]),
            Term::App(op, args) => {
                let kids: Vec<TermId> = args.iter().map(|a| self.place(a, tau)).collect::<Option<_>>()?;
                let key = NodeKey::App(*op, kids);
                if let Some(&id) = self.index.get(&key) {
                    return Some(id);
                }
                if !self.growing {
                    return None;
                }
                let NodeKey::App(_, kids) = &key else { unreachable!() };
                let depth = 1 + kids.iter().map(|&k| self.nodes[k].depth).max().unwrap_or(0);
                if depth > self.depth {
                    self.truncated = true;
                    return None;
                }
                Some(self.intern_key(key))
            }
        }
    }

    fn op_phase(&mut self) -> bool {
        let before = self.nodes.len();
        let mut changed = false;
        changed |= self.rule_ear();
        changed |= self.rule_mor();
        changed |= self.rule_ax();
        changed |= self.rule_iar();
        changed || self.nodes.len() > before
    }

    fn rule_ear(&mut self) -> bool {
        let calc = Arc::clone(&self.calc);
        let sig = calc.variety.signature();
        let mut changed = false;
        // seeded or instantiated terms whose arguments are defined
        for id in 0..self.nodes.len() {
            if self.is_defined(id) {
                continue;
            }
            let NodeKey::App(op, kids) = self.nodes[id].key.clone() else { continue };
            if kids.iter().all(|&k| self.is_defined(k))
                && sig.op(op).arity.edges().iter().all(|e| self.edge_holds(&e, &kids))
            {
                changed |= self.define(id, DefJust::EAr);
            }
        }
        if self.growing {
            let allowed = self.allowed();
            for (op, sym) in sig.ops().iter().enumerate() {
                let constraints: Vec<Edge> = sym.arity.edges().iter().collect();
                let mut found = Vec::new();
                self.search(sym.arity.size(), &constraints, &allowed, vec![None; sym.arity.size()], &mut |f| {
                    found.push(f.to_vec())
                });
                for f in found {
                    let key = NodeKey::App(op, f);
                    let id = match self.index.get(&key) {
                        Some(&id) => id,
                        None => {
                            let NodeKey::App(_, f) = &key else { unreachable!() };
                            let depth = 1 + f.iter().map(|&k| self.nodes[k].depth).max().unwrap_or(0);
                            if depth > self.depth {
                                self.truncated = true;
                                continue;
                            }
                            changed = true;
                            self.intern_key(key)
                        }
                    };
                    changed |= self.define(id, DefJust::EAr);
                }
            }
        }
        changed
    }

    fn rule_mor(&mut self) -> bool {
        let calc = Arc::clone(&self.calc);
        let sig = calc.variety.signature();
        let rel = &calc.relational.signature;
        let mut changed = false;
        for op in 0..sig.len() {
            let m = sig.op(op).arity.size();
            let terms: Vec<(TermId, Vec<TermId>)> = (0..self.nodes.len())
                .filter(|&i| self.is_defined(i))
                .filter_map(|i| match &self.nodes[i].key {
                    NodeKey::App(o, kids) if *o == op => Some((i, kids.clone())),
                    _ => None,
                })
                .collect();
            if terms.is_empty() {
                continue;
            }
            for sym in 0..rel.len() {
                let k = rel.symbol(sym).arity;
                let graded = calc.is_family(sym);
                let mut found: Vec<(Vec<TermId>, Option<Bound>)> = Vec::new();
                let mut tuple = Vec::with_capacity(k);
                self.mor_tuples(&terms, k, m, sym, graded, &mut tuple, &mut found);
                for (ids, bound) in found {
                    changed |= self.insert_fact((sym, ids), bound, FactJust::Mor { op });
                }
            }
        }
        changed
    }

    #[allow(clippy::too_many_arguments)]
    fn mor_tuples(
        &self,
        terms: &[(TermId, Vec<TermId>)],
        k: usize,
        m: usize,
        sym: SymId,
        graded: bool,
        tuple: &mut Vec<usize>,
        out: &mut Vec<(Vec<TermId>, Option<Bound>)>,
    ) {
        if tuple.len() == k {
            let mut bound = graded.then(|| Bound::closed(crate::rational::Rat::ZERO));
            for j in 0..m {
                let ids: Vec<TermId> = tuple.iter().map(|&t| terms[t].1[j]).collect();
                match (self.bound(sym, &ids), bound) {
                    (Some(None), None) => {}
                    (Some(Some(b)), Some(acc)) => bound = Some(acc.join(b)),
                    _ => return,
                }
            }
            let ids: Vec<TermId> = tuple.iter().map(|&t| terms[t].0).collect();
            let improves = match self.bound(sym, &ids) {
                None => true,
                Some(cur) => !bound_implies(cur, bound),
            };
            if improves {
                out.push((ids, bound));
            }
            return;
        }
        for t in 0..terms.len() {
            // prune on the partial tuple when a relation of arity 2 is checked
            tuple.push(t);
            self.mor_tuples(terms, k, m, sym, graded, tuple, out);
            tuple.pop();
        }
    }

    fn axiom_candidates(&self, axiom: usize, anchor: Option<&Term>) -> Vec<Vec<TermId>> {
        let ax = &self.calc.variety.axioms()[axiom];
        let n = ax.context.size();
        let constraints: Vec<Edge> = ax.presentation.iter().collect();
        let allowed = self.allowed();
        let mut out = Vec::new();
        match (self.scope, anchor) {
            (Scope::Relevant, Some(pat)) if matches!(pat, Term::App(..)) => {
                for id in 0..self.nodes.len() {
                    let mut tau = vec![None; n];
                    if !self.unify(pat, id, &mut tau) {
                        continue;
                    }
                    if tau.iter().flatten().any(|&t| !self.is_defined(t)) {
                        continue;
                    }
                    self.search(n, &constraints, &allowed, tau, &mut |f| out.push(f.to_vec()));
                }
            }
            _ => self.search(n, &constraints, &allowed, vec![None; n], &mut |f| out.push(f.to_vec())),
        }
        out
    }

    fn rule_ax(&mut self) -> bool {
        let calc = Arc::clone(&self.calc);
        let mut changed = false;
        for (ai, ax) in calc.variety.axioms().iter().enumerate() {
            let anchor = ax.relation.terms.iter().find(|t| matches!(t, Term::App(..)));
            for tau in self.axiom_candidates(ai, anchor) {
                let ids: Option<Vec<TermId>> = ax.relation.terms.iter().map(|t| self.place(t, &tau)).collect();
                let Some(ids) = ids else { continue };
                if ids.iter().all(|&i| self.is_defined(i)) {
                    let b = ax.relation.index.map(Bound::closed);
                    changed |= self.insert_fact((ax.relation.sym, ids), b, FactJust::Ax { axiom: ai, subst: tau });
                }
            }
        }
        changed
    }

    fn rule_iar(&mut self) -> bool {
        let calc = Arc::clone(&self.calc);
        let mut changed = false;
        for (ei, entry) in calc.iar.iter().enumerate() {
            let whole = Term::App(entry.op, entry.args.clone());
            for tau in self.axiom_candidates(entry.axiom, Some(&whole)) {
                if self.scope == Scope::Full && whole_depth(&whole, &tau, &self.nodes) > self.depth {
                    if self.growing {
                        self.truncated = true;
                    }
                    continue;
                }
                let ids: Option<Vec<TermId>> =
                    entry.edge.points.iter().map(|&p| self.place(&entry.args[p], &tau)).collect();
                let Some(ids) = ids else { continue };
                if ids.iter().all(|&i| self.is_defined(i)) {
                    changed |= self.insert_fact(
                        (entry.edge.sym, ids),
                        entry.edge.index,
                        FactJust::IAr { entry: ei, subst: tau },
                    );
                }
            }
        }
        changed
    }

    fn horn_phase(&mut self) -> bool {
        let points = self.defined();
        let mut at = vec![usize::MAX; self.nodes.len()];
        for (k, &id) in points.iter().enumerate() {
            at[id] = k;
        }
        let mut edges = EdgeSet::new();
        for ((sym, ids), b) in &self.best {
            edges.insert(Edge { sym: *sym, index: *b, points: ids.iter().map(|&i| at[i]).collect() });
        }
        let pre = PreStructure::anonymous(points.len(), edges).expect("points in range");
        let calc = Arc::clone(&self.calc);
        let sat = saturate_without_equality(&calc.relational, &pre);
        let mut changed = false;
        let mut new_edges: Vec<Edge> = sat
            .edges()
            .iter()
            .filter(|e| {
                let ids: Vec<TermId> = e.points.iter().map(|&p| points[p]).collect();
                match self.best.get(&(e.sym, ids)) {
                    None => true,
                    Some(cur) => !bound_implies(*cur, e.index),
                }
            })
            .collect();
        new_edges.sort_by(|a, b| (a.sym, &a.points).cmp(&(b.sym, &b.points)));
        for e in new_edges {
            if let Some(d) = sat.derivation(&Fact::edge(&e)) {
                changed |= self.record(&d, &points);
            }
        }
        changed
    }

    /// Stores the new facts of a derivation, premises first.
    fn record(&mut self, d: &Derivation, points: &[TermId]) -> bool {
        let mut changed = false;
        for p in &d.premises {
            if !matches!(p.step, Step::Given) {
                changed |= self.record(p, points);
            }
        }
        let Step::Axiom { index, valuation, metas, .. } = &d.step else {
            return changed;
        };
        let Some(e) = d.fact.as_edge() else { return changed };
        let ids: Vec<TermId> = e.points.iter().map(|&p| points[p]).collect();
        let valuation: Vec<TermId> = valuation.iter().map(|&p| points[p]).collect();
        changed | self.insert_fact((e.sym, ids), e.index, FactJust::Horn { axiom: *index, valuation, metas: metas.clone() })
    }

    // ---- proof extraction ---------------------------------------------

    fn resolve_def(&self, id: TermId, before: u64, memo: &mut Memo) -> Result<Arc<Proof>> {
        match &self.defs[id] {
            Some(d) if d.seq < before => self.def_proof(id, memo),
            _ => Err(Error::Proof(format!("no earlier definedness of term #{id}"))),
        }
    }

    fn resolve_fact(&self, sym: SymId, ids: Vec<TermId>, need: Option<Bound>, before: u64, memo: &mut Memo) -> Result<Arc<Proof>> {
        let key = (sym, ids);
        let pos = self
            .facts
            .get(&key)
            .and_then(|h| h.iter().position(|e| e.seq < before && bound_implies(e.bound, need)))
            .ok_or_else(|| Error::Proof("a stored premise has no earlier justification".into()))?;
        self.fact_proof(&key, pos, memo)
    }

    fn def_proof(&self, id: TermId, memo: &mut Memo) -> Result<Arc<Proof>> {
        if let Some(p) = memo.defs.get(&id) {
            return Ok(Arc::clone(p));
        }
        let entry = self.defs[id].as_ref().ok_or_else(|| Error::Proof("term is not defined".into()))?;
        let conclusion = Judgement::Def(self.term(id).clone());
        let proof = match (&entry.just, &self.nodes[id].key) {
            (DefJust::Var, _) => Proof { conclusion, rule: Rule::Var, premises: vec![] },
            (DefJust::EAr, NodeKey::App(op, kids)) => {
                let arity = &self.calc.variety.signature().op(*op).arity;
                let mut premises = Vec::new();
                for e in arity.edges().iter() {
                    let ids: Vec<TermId> = e.points.iter().map(|&p| kids[p]).collect();
                    premises.push(self.resolve_fact(e.sym, ids, e.index, entry.seq, memo)?);
                }
                for &k in kids {
                    premises.push(self.resolve_def(k, entry.seq, memo)?);
                }
                let map = kids.iter().map(|&k| self.term(k).clone()).collect();
                Proof { conclusion, rule: Rule::EAr { op: *op, map }, premises }
            }
            (DefJust::EAr, NodeKey::Var(_)) => unreachable!("variables are defined by (Var)"),
        };
        let p = Arc::new(proof);
        memo.defs.insert(id, Arc::clone(&p));
        Ok(p)
    }

    fn fact_proof(&self, key: &FactKey, pos: usize, memo: &mut Memo) -> Result<Arc<Proof>> {
        if let Some(p) = memo.facts.get(&(key.clone(), pos)) {
            return Ok(Arc::clone(p));
        }
        let entry = &self.facts[key][pos];
        let (sym, ids) = key;
        let seq = entry.seq;
        let conclusion = Judgement::Rel {
            sym: *sym,
            index: closed_index(entry.bound)?,
            terms: ids.iter().map(|&i| self.term(i).clone()).collect(),
        };
        let terms = |v: &[TermId]| -> Vec<Term> { v.iter().map(|&i| self.term(i).clone()).collect() };
        let proof = match &entry.just {
            FactJust::Ctx => Proof { conclusion, rule: Rule::Ctx, premises: vec![] },
            FactJust::Mor { op } => {
                let kids: Vec<Vec<TermId>> = ids
                    .iter()
                    .map(|&i| match &self.nodes[i].key {
                        NodeKey::App(_, k) => k.clone(),
                        NodeKey::Var(_) => unreachable!("(Mor) relates applications"),
                    })
                    .collect();
                let m = self.calc.variety.signature().op(*op).arity.size();
                let mut premises = Vec::new();
                for j in 0..m {
                    let row: Vec<TermId> = kids.iter().map(|k| k[j]).collect();
                    premises.push(self.resolve_fact(*sym, row, entry.bound, seq, memo)?);
                }
                for &i in ids {
                    premises.push(self.resolve_def(i, seq, memo)?);
                }
                let maps = kids.iter().map(|k| terms(k)).collect();
                Proof { conclusion, rule: Rule::Mor { op: *op, maps }, premises }
            }
            FactJust::Ax { axiom, subst } => {
                let premises = self.axiom_premise_proofs(*axiom, subst, seq, memo)?;
                let name = self.calc.variety.axioms()[*axiom].name.clone();
                Proof { conclusion, rule: Rule::Ax { axiom: *axiom, name, subst: terms(subst) }, premises }
            }
            FactJust::IAr { entry: ei, subst } => {
                let e = &self.calc.iar[*ei];
                let premises = self.axiom_premise_proofs(e.axiom, subst, seq, memo)?;
                Proof {
                    conclusion,
                    rule: Rule::IAr {
                        axiom: e.axiom,
                        position: e.position,
                        path: e.path.clone(),
                        edge: e.edge.clone(),
                        subst: terms(subst),
                    },
                    premises,
                }
            }
            FactJust::Horn { axiom, valuation, metas } => {
                let ax = &self.calc.relational.axioms[*axiom];
                let mut premises = Vec::new();
                for a in &ax.premises {
                    let AtomSym::Rel(s) = a.sym else {
                        return Err(Error::Proof("equality premise in the relational closure".into()));
                    };
                    let need = a.index.as_ref().map(|ix| ix.eval(metas));
                    premises.push(self.resolve_fact(s, a.args.iter().map(|&v| valuation[v]).collect(), need, seq, memo)?);
                }
                for &v in &ax.conclusion.args {
                    premises.push(self.resolve_def(valuation[v], seq, memo)?);
                }
                Proof {
                    conclusion,
                    rule: Rule::RelAx { axiom: *axiom, name: ax.name.clone(), subst: terms(valuation), metas: metas.clone() },
                    premises,
                }
            }
        };
        let p = Arc::new(proof);
        memo.facts.insert((key.clone(), pos), Arc::clone(&p));
        Ok(p)
    }

    fn axiom_premise_proofs(&self, axiom: usize, subst: &[TermId], seq: u64, memo: &mut Memo) -> Result<Vec<Arc<Proof>>> {
        let ax = &self.calc.variety.axioms()[axiom];
        let mut out = Vec::new();
        for e in ax.presentation.iter() {
            let ids = e.points.iter().map(|&p| subst[p]).collect();
            out.push(self.resolve_fact(e.sym, ids, e.index, seq, memo)?);
        }
        for &t in subst {
            out.push(self.resolve_def(t, seq, memo)?);
        }
        Ok(out)
    }

    /// Proofs of every stored judgement, sharing subproofs.
    pub fn all_proofs(&self) -> Result<Vec<Arc<Proof>>> {
        let mut memo = Memo::default();
        let mut out = Vec::new();
        for id in self.defined() {
            out.push(self.def_proof(id, &mut memo)?);
        }
        let mut keys: Vec<&FactKey> = self.facts.keys().collect();
        keys.sort();
        for key in keys {
            for pos in 0..self.facts[key].len() {
                out.push(self.fact_proof(key, pos, &mut memo)?);
            }
        }
        Ok(out)
    }

    /// Distinct terms appearing in the bank whose definedness is not yet
    /// derived.
    pub fn pending(&self) -> Vec<TermId> {
        (0..self.nodes.len()).filter(|&i| !self.is_defined(i)).collect()
    }

    /// The set of representatives.
    pub fn representatives(&self) -> Vec<TermId> {
        let set: HashSet<TermId> = self.defined().into_iter().map(|i| self.reps[i]).collect();
        let mut v: Vec<TermId> = set.into_iter().collect();
        v.sort_by(|&a, &b| self.order(a, b));
        v
    }
}

fn whole_depth(t: &Term, tau: &[TermId], nodes: &[Node]) -> usize {
    match t {
        Term::Var(v) => nodes[tau[*v]].depth,
        Term::App(_, args) => 1 + args.iter().map(|a| whole_depth(a, tau, nodes)).max().unwrap_or(0),
    }
}

fn bound_implies(have: Option<Bound>, need: Option<Bound>) -> bool {
    match (have, need) {
        (None, None) => true,
        (Some(a), Some(b)) => a.implies(&b),
        _ => false,
    }
}

#[derive(Default)]
struct Memo {
    defs: HashMap<TermId, Arc<Proof>>,
    facts: HashMap<(FactKey, usize), Arc<Proof>>,
}
