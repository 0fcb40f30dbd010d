//! Free algebras of defined terms modulo derivable equality, truncated at a
//! term depth.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::horn::structure::{Edge, EdgeSet, PreStructure};
use crate::logic::{Calculus, Judgement, JudgementBank, BankConfig, TermId};
use crate::par::Budget;
use crate::sigma::algebra::{is_homomorphism, Interp, SigmaAlgebra, Table};
use crate::sigma::term::Term;
use crate::sigma::variety::Variety;
use crate::structops::{compose, hom_maps};

/// Operation tables on classes; `None` where the application leaves the
/// depth bound.
pub type PartialTables = Vec<Vec<(Vec<usize>, Option<usize>)>>;

/// The quotient of the derivably defined terms over `X` by derivable
/// equality, computed from a judgement bank of bounded depth.
#[derive(Debug, Clone)]
pub struct FreeAlgebraApprox {
    generators: PreStructure,
    bank: JudgementBank,
    /// The next-depth bank, kept when the bank itself is not at its fixpoint.
    probe: Option<(JudgementBank, HashMap<TermId, usize>)>,
    classes: Vec<Vec<TermId>>,
    splitting: Vec<TermId>,
    class_of: HashMap<TermId, usize>,
    carrier: PreStructure,
    tables: PartialTables,
    algebra: Option<SigmaAlgebra>,
    unit: Vec<usize>,
    stabilized: bool,
}

/// Builds `F X` from the depth-`depth` bank over `x`. The result is flagged
/// stabilized when the banks at `depth` and `depth + 1` give isomorphic
/// quotients.
pub fn free_algebra(variety: &Arc<Variety>, x: &PreStructure, depth: usize, budget: Budget) -> Result<FreeAlgebraApprox> {
    let calc = Arc::new(Calculus::new(Arc::clone(variety))?);
    FreeAlgebraApprox::build(&calc, x, depth, budget)
}

impl FreeAlgebraApprox {
    pub fn build(calc: &Arc<Calculus>, x: &PreStructure, depth: usize, budget: Budget) -> Result<FreeAlgebraApprox> {
        let bank = JudgementBank::build(Arc::clone(calc), x, &BankConfig::depth(depth))?;
        let classes = bank.classes();
        let splitting: Vec<TermId> = classes.iter().map(|c| c[0]).collect();
        let class_of: HashMap<TermId, usize> =
            classes.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |&t| (t, i))).collect();
        let carrier = quotient_carrier(&bank, &splitting, &class_of, x)?;
        let unit: Vec<usize> = (0..x.size())
            .map(|v| bank.lookup(&Term::Var(v)).map(|id| class_of[&bank.rep(id)]).expect("variables are defined"))
            .collect();
        let mut approx = FreeAlgebraApprox {
            generators: x.clone(),
            bank,
            probe: None,
            classes,
            splitting,
            class_of,
            carrier,
            tables: vec![],
            algebra: None,
            unit,
            stabilized: false,
        };
        if approx.bank.complete() {
            approx.stabilized = true;
        } else {
            let next = JudgementBank::build(Arc::clone(calc), x, &BankConfig::depth(depth + 1))?;
            let (map, same) = approx.compare(&next)?;
            approx.stabilized = same;
            approx.probe = Some((next, map));
        }
        approx.tables = approx.operation_tables(budget)?;
        if approx.tables.iter().all(|t| t.iter().all(|(_, v)| v.is_some())) {
            let interps = approx
                .tables
                .iter()
                .map(|t| {
                    let (maps, values) = t.iter().map(|(m, v)| (m.clone(), v.unwrap())).unzip();
                    Interp::Table(Table::new(maps, values))
                })
                .collect();
            let sig = Arc::clone(calc.variety.signature());
            approx.algebra = Some(SigmaAlgebra::new(sig, approx.carrier.clone(), interps, budget)?);
        } else {
            approx.stabilized = false;
        }
        Ok(approx)
    }

    /// Maps every class into the classes of `next` and decides whether the
    /// two quotients agree.
    fn compare(&self, next: &JudgementBank) -> Result<(HashMap<TermId, usize>, bool)> {
        let next_classes = next.classes();
        let next_index: HashMap<TermId, usize> = next_classes.iter().enumerate().map(|(i, c)| (c[0], i)).collect();
        let mut to_next = Vec::with_capacity(self.classes.len());
        for &r in &self.splitting {
            match next.canonical(self.bank.term(r)) {
                Some(id) => to_next.push(next_index[&id]),
                None => return Ok((HashMap::new(), false)),
            }
        }
        let mut sorted = to_next.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let bijective = sorted.len() == to_next.len() && to_next.len() == next_classes.len();
        let back: HashMap<TermId, usize> = to_next.iter().enumerate().map(|(i, &j)| (next_classes[j][0], i)).collect();
        if !bijective {
            return Ok((back, false));
        }
        let next_splitting: Vec<TermId> = to_next.iter().map(|&j| next_classes[j][0]).collect();
        let next_class_of: HashMap<TermId, usize> =
            next_classes.iter().flat_map(|c| c.iter().map(|&t| (t, back[&c[0]]))).collect();
        let next_carrier = quotient_carrier(next, &next_splitting, &next_class_of, &self.generators)?;
        Ok((back, next_carrier.edges() == self.carrier.edges()))
    }

    fn class_in_probe(&self, t: &Term) -> Option<usize> {
        let (next, back) = self.probe.as_ref()?;
        next.canonical(t).and_then(|id| back.get(&id).copied())
    }

    fn operation_tables(&self, budget: Budget) -> Result<PartialTables> {
        let sig = self.bank.calculus().variety.signature();
        let mut out = Vec::with_capacity(sig.len());
        for (op, sym) in sig.ops().iter().enumerate() {
            let mut table = Vec::new();
            for f in hom_maps(&sym.arity, &self.carrier, budget)? {
                let t = Term::App(op, f.iter().map(|&c| self.rep_term(c).clone()).collect());
                table.push((f, self.class_of_term(&t)));
            }
            out.push(table);
        }
        Ok(out)
    }

    pub fn generators(&self) -> &PreStructure {
        &self.generators
    }

    pub fn bank(&self) -> &JudgementBank {
        &self.bank
    }

    pub fn depth(&self) -> usize {
        self.bank.depth()
    }

    pub fn variety(&self) -> &Arc<Variety> {
        &self.bank.calculus().variety
    }

    /// Classes of derivably defined terms, each led by its representative.
    pub fn classes(&self) -> &[Vec<TermId>] {
        &self.classes
    }

    pub fn splitting(&self) -> &[TermId] {
        &self.splitting
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn rep_term(&self, class: usize) -> &Term {
        self.bank.term(self.splitting[class])
    }

    /// The class of a term; terms past the bank's depth are looked up in the
    /// next-depth bank.
    pub fn class_of_term(&self, t: &Term) -> Option<usize> {
        match self.bank.canonical(t) {
            Some(id) => Some(self.class_of[&id]),
            None => self.class_in_probe(t),
        }
    }

    pub fn class_of_id(&self, id: TermId) -> Option<usize> {
        self.class_of.get(&id).copied()
    }

    /// The quotient structure on classes.
    pub fn carrier(&self) -> &PreStructure {
        &self.carrier
    }

    pub fn tables(&self) -> &PartialTables {
        &self.tables
    }

    /// The algebra `F X`; refused while any operation leaves the bound.
    pub fn algebra(&self) -> Result<&SigmaAlgebra> {
        self.algebra.as_ref().ok_or(Error::NotStabilized(self.depth()))
    }

    /// `η_X(x) = [x]`.
    pub fn unit(&self) -> &[usize] {
        &self.unit
    }

    pub fn stabilized(&self) -> bool {
        self.stabilized
    }

    /// Whether `F X` satisfies the judgement at the generators: the terms
    /// evaluate along the unit and their values stand in the relation.
    pub fn satisfies(&self, j: &Judgement) -> Result<bool> {
        let a = self.algebra()?;
        Ok(match j {
            Judgement::Def(t) => a.evaluate(&self.unit, t).is_some(),
            Judgement::Rel { sym, index, terms } => {
                let vals: Option<Vec<usize>> = terms.iter().map(|t| a.evaluate(&self.unit, t)).collect();
                vals.is_some_and(|points| {
                    let e = Edge { sym: *sym, index: index.map(crate::rational::Bound::closed), points };
                    self.carrier.edges().contains(&e)
                })
            }
        })
    }

    /// Quotient edges and operation values computed through another choice
    /// of class members. Operations whose application is not materialized in
    /// the bank are looked up by congruence.
    pub fn quotient_under(&self, splitting: &[TermId], budget: Budget) -> Result<(EdgeSet, PartialTables)> {
        if splitting.len() != self.classes.len()
            || splitting.iter().enumerate().any(|(i, t)| self.class_of.get(t) != Some(&i))
        {
            return Err(Error::Algebra("not a splitting of the classes".into()));
        }
        let carrier = quotient_carrier(&self.bank, splitting, &self.class_of, &self.generators)?;
        let sig = self.bank.calculus().variety.signature();
        let mut tables = Vec::with_capacity(sig.len());
        for (op, sym) in sig.ops().iter().enumerate() {
            let mut table = Vec::new();
            for f in hom_maps(&sym.arity, &self.carrier, budget)? {
                let t = Term::App(op, f.iter().map(|&c| self.bank.term(splitting[c]).clone()).collect());
                let v = match self.bank.lookup(&t).filter(|&id| self.bank.is_defined(id)) {
                    Some(id) => Some(self.class_of[&self.bank.rep(id)]),
                    None => self.class_of_term(&t),
                };
                table.push((f, v));
            }
            tables.push(table);
        }
        Ok((carrier.edges().clone(), tables))
    }
}

/// Classes as points; an edge between classes for every relation the bank
/// derives between the chosen members.
fn quotient_carrier(
    bank: &JudgementBank,
    splitting: &[TermId],
    class_of: &HashMap<TermId, usize>,
    x: &PreStructure,
) -> Result<PreStructure> {
    let sig = bank.calculus().variety.signature();
    let n_syms = sig.theory().signature.len();
    let chosen: HashMap<TermId, usize> = splitting.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut edges = EdgeSet::new();
    for (sym, ids, bound) in bank.relations() {
        if sym >= n_syms || bound.is_some_and(|b| b.strict) {
            continue;
        }
        let Some(points) = ids.iter().map(|t| chosen.get(t).copied()).collect::<Option<Vec<_>>>() else {
            continue;
        };
        edges.insert(Edge { sym, index: bound, points });
    }
    let names: Vec<String> = x.points().to_vec();
    let points = splitting.iter().map(|&t| bank.term(t).render(sig, &names)).collect();
    debug_assert!(splitting.iter().enumerate().all(|(i, t)| class_of[t] == i));
    PreStructure::new(points, edges)
}

/// `f̄([t]) = f#(t)`: the homomorphism `F X → A` extending `f: X → A`.
pub fn universal_extension(
    free: &FreeAlgebraApprox,
    f: &[usize],
    target: &SigmaAlgebra,
    budget: Budget,
) -> Result<Vec<usize>> {
    if !free.stabilized() {
        return Err(Error::NotStabilized(free.depth()));
    }
    let x = free.generators();
    if f.len() != x.size() || f.iter().any(|&p| p >= target.size()) || !x.preserves(target.carrier(), f) {
        return Err(Error::Algebra("generator map is not relation-preserving".into()));
    }
    let source = free.algebra()?;
    let map = (0..free.len())
        .map(|c| {
            target.evaluate(f, free.rep_term(c)).ok_or_else(|| {
                Error::Algebra(format!("`{}` is undefined in the target", free.carrier().point_name(c)))
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    if !is_homomorphism(&map, source, target, budget)? {
        return Err(Error::Algebra("the extension is not a homomorphism; the target lies outside the variety".into()));
    }
    Ok(map)
}

/// Every homomorphism `F X → A` restricting to `f` along the unit.
pub fn homomorphic_extensions(
    free: &FreeAlgebraApprox,
    f: &[usize],
    target: &SigmaAlgebra,
    budget: Budget,
) -> Result<Vec<Vec<usize>>> {
    let source = free.algebra()?;
    let mut out = Vec::new();
    for h in hom_maps(free.carrier(), target.carrier(), budget)? {
        if compose(free.unit(), &h) == f && is_homomorphism(&h, source, target, budget)? {
            out.push(h);
        }
    }
    Ok(out)
}
