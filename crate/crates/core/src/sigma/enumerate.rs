//! Exhaustive enumeration of carriers and of algebras in a variety.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::horn::engine::saturate;
use crate::horn::reflect::is_model;
use crate::horn::structure::{Edge, EdgeSet, PreStructure, SymbolKind};
use crate::horn::theory::HornTheory;
use crate::par::{self, power, Budget};
use crate::rational::{Bound, Rat};
use crate::sigma::algebra::{Interp, SigmaAlgebra, Table};
use crate::sigma::term::Term;
use crate::sigma::variety::Variety;
use crate::structops::{all_isomorphisms, find_isomorphism, hom_maps, internal_hom};

/// Values available to family symbols when enumerating carriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    pub values: Vec<Rat>,
}

impl Default for Palette {
    fn default() -> Palette {
        Palette { values: vec![Rat::frac(1, 4), Rat::frac(1, 2), Rat::frac(3, 4), Rat::ONE] }
    }
}

/// Point names `a, b, …, z, a1, …`.
pub fn point_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let c = char::from(b'a' + (i % 26) as u8);
            if i < 26 {
                c.to_string()
            } else {
                format!("{c}{}", i / 26)
            }
        })
        .collect()
}

/// All non-empty models with at most `max_points` points, up to
/// isomorphism. Plain
/// tuples not forced by the empty structure are switched on or off; binary
/// family symbols take a symmetric value from the palette (or none) on each
/// pair of distinct points.
pub fn carrier_palette(theory: &HornTheory, max_points: usize, palette: &Palette, budget: Budget) -> Result<Vec<PreStructure>> {
    let families: Vec<usize> = theory.signature.families().collect();
    for &f in &families {
        if theory.signature.symbol(f).arity != 2 {
            return Err(Error::Algebra(format!(
                "no palette for family `{}` of arity {}",
                theory.signature.symbol(f).name,
                theory.signature.symbol(f).arity
            )));
        }
    }
    if !families.is_empty() && palette.values.is_empty() {
        return Err(Error::Algebra("family symbols need a non-empty value palette".into()));
    }
    let mut out: Vec<PreStructure> = Vec::new();
    for n in 1..=max_points {
        let names = point_names(n);
        let forced = saturate(theory, &PreStructure::new(names.clone(), EdgeSet::new())?).edges();
        let mut plain_slots = Vec::new();
        for (s, sym) in theory.signature.symbols().iter().enumerate() {
            if sym.kind == SymbolKind::Plain {
                for t in std::iter::repeat_n(0..n, sym.arity).multi_cartesian_product() {
                    let e = Edge::plain(s, t);
                    if !forced.contains(&e) {
                        plain_slots.push(e);
                    }
                }
            }
        }
        let pairs: Vec<(usize, usize, usize)> = families
            .iter()
            .flat_map(|&f| (0..n).tuple_combinations().map(move |(a, b)| (f, a, b)))
            .collect();
        let choices = palette.values.len() + 1;
        let total = power(2, plain_slots.len()).saturating_mul(power(choices, pairs.len()));
        budget.check(total)?;
        let total = total as usize;
        let candidates: Vec<usize> = (0..total).collect();
        let models = par::filter_map(budget.exec, &candidates, |&code| {
            let mut edges = forced.clone();
            let mut c = code;
            for e in &plain_slots {
                if c % 2 == 1 {
                    edges.insert(e.clone());
                }
                c /= 2;
            }
            for &(f, a, b) in &pairs {
                let k = c % choices;
                c /= choices;
                if k > 0 {
                    let q = Bound::closed(palette.values[k - 1]);
                    edges.insert(Edge::graded(f, q, vec![a, b]));
                    edges.insert(Edge::graded(f, q, vec![b, a]));
                }
            }
            let s = PreStructure::new(names.clone(), edges).ok()?;
            is_model(theory, &s).then_some(s)
        });
        let mut kept: Vec<PreStructure> = Vec::new();
        for m in models {
            if !kept.iter().any(|k| find_isomorphism(k, &m).is_some()) {
                kept.push(m);
            }
        }
        out.extend(kept);
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tri {
    Val(usize),
    Undef,
    Unknown,
}

struct Search<'a> {
    algebra_ops: Vec<OpData>,
    carrier: &'a PreStructure,
    /// `(op, map index)` in assignment order.
    vars: Vec<(usize, usize)>,
    /// Preservation constraints per variable: edges over map indices of one
    /// operation whose last-assigned index is that variable.
    constraints: Vec<Vec<(usize, Edge)>>,
    instances: Vec<Instance<'a>>,
}

struct OpData {
    arity: PreStructure,
    maps: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

struct Instance<'a> {
    assignment: Vec<usize>,
    relation: &'a crate::sigma::variety::TermEdge,
}

impl Search<'_> {
    fn eval(&self, t: &Term, e: &[usize], tables: &[Vec<Option<usize>>]) -> Tri {
        match t {
            Term::Var(x) => Tri::Val(e[*x]),
            Term::App(op, args) => {
                let mut vals = Vec::with_capacity(args.len());
                let mut unknown = false;
                for a in args {
                    match self.eval(a, e, tables) {
                        Tri::Val(v) => vals.push(v),
                        Tri::Undef => return Tri::Undef,
                        Tri::Unknown => unknown = true,
                    }
                }
                if unknown {
                    return Tri::Unknown;
                }
                let d = &self.algebra_ops[*op];
                if !d.arity.preserves(self.carrier, &vals) {
                    return Tri::Undef;
                }
                match tables[*op][d.index[&vals]] {
                    Some(v) => Tri::Val(v),
                    None => Tri::Unknown,
                }
            }
        }
    }

    /// `Some(true)` satisfied, `Some(false)` violated, `None` undetermined.
    fn status(&self, inst: &Instance<'_>, tables: &[Vec<Option<usize>>]) -> Option<bool> {
        let mut vals = Vec::with_capacity(inst.relation.terms.len());
        let mut unknown = false;
        for t in &inst.relation.terms {
            match self.eval(t, &inst.assignment, tables) {
                Tri::Val(v) => vals.push(v),
                Tri::Undef => return Some(false),
                Tri::Unknown => unknown = true,
            }
        }
        if unknown {
            None
        } else {
            Some(self.carrier.edges().contains(&inst.relation.at(vals)))
        }
    }

    fn consistent(&self, k: usize, tables: &[Vec<Option<usize>>]) -> bool {
        self.constraints[k].iter().all(|(op, e)| {
            let pts: Vec<usize> = e.points.iter().map(|&i| tables[*op][i].unwrap()).collect();
            self.carrier.edges().contains(&Edge { points: pts, ..e.clone() })
        })
    }

    fn run(&self, k: usize, tables: &mut Vec<Vec<Option<usize>>>, pending: Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if k == self.vars.len() {
            if pending.is_empty() {
                out.push(tables.iter().map(|t| t.iter().map(|v| v.unwrap()).collect()).collect());
            }
            return;
        }
        let (op, i) = self.vars[k];
        for v in 0..self.carrier.size() {
            tables[op][i] = Some(v);
            if self.consistent(k, tables) {
                let mut next = Vec::with_capacity(pending.len());
                let mut dead = false;
                for &p in &pending {
                    match self.status(&self.instances[p], tables) {
                        Some(true) => {}
                        Some(false) => {
                            dead = true;
                            break;
                        }
                        None => next.push(p),
                    }
                }
                if !dead {
                    self.run(k + 1, tables, next, out);
                }
            }
            tables[op][i] = None;
        }
    }
}

fn algebras_on(v: &Variety, carrier: &PreStructure, budget: Budget) -> Result<Vec<SigmaAlgebra>> {
    let sig = v.signature();
    let inner = budget.with_exec(par::Exec::Sequential);
    let mut ops = Vec::new();
    let mut vars = Vec::new();
    let mut constraint_edges = Vec::new();
    for (op, sym) in sig.ops().iter().enumerate() {
        let hom = internal_hom(&sig.theory().signature, &sym.arity, carrier, inner)?;
        for i in 0..hom.maps.len() {
            vars.push((op, i));
        }
        for e in hom.structure.edges().iter() {
            constraint_edges.push((op, e));
        }
        let index = hom.maps.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        ops.push(OpData { arity: sym.arity.clone(), maps: hom.maps, index });
    }
    let position: HashMap<(usize, usize), usize> = vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut constraints = vec![Vec::new(); vars.len()];
    for (op, e) in constraint_edges {
        let last = e.points.iter().map(|&i| position[&(op, i)]).max().expect("positive arity");
        constraints[last].push((op, e));
    }
    let mut instances = Vec::new();
    for ax in v.axioms() {
        let assignments = hom_maps(&ax.context, carrier, inner)?;
        budget.check(instances.len() as u128 + assignments.len() as u128)?;
        instances.extend(assignments.into_iter().map(|assignment| Instance { assignment, relation: &ax.relation }));
    }
    let search = Search { algebra_ops: ops, carrier, vars, constraints, instances };
    let mut tables: Vec<Vec<Option<usize>>> = search.algebra_ops.iter().map(|d| vec![None; d.maps.len()]).collect();
    let mut pending = Vec::new();
    for (p, inst) in search.instances.iter().enumerate() {
        match search.status(inst, &tables) {
            Some(true) => {}
            Some(false) => return Ok(vec![]),
            None => pending.push(p),
        }
    }
    let mut found = Vec::new();
    search.run(0, &mut tables, pending, &mut found);

    // keep one algebra per orbit of the carrier's automorphism group
    let autos = all_isomorphisms(carrier, carrier);
    let mut seen: HashSet<Vec<Vec<usize>>> = HashSet::new();
    let mut out = Vec::new();
    for t in found {
        let canonical = autos
            .iter()
            .map(|pi| transport(&search.algebra_ops, &t, pi))
            .min()
            .unwrap_or_else(|| t.clone());
        if seen.insert(canonical) {
            let interps = search
                .algebra_ops
                .iter()
                .zip(t)
                .map(|(d, values)| Interp::Table(Table::new(d.maps.clone(), values)))
                .collect();
            out.push(SigmaAlgebra::new_unchecked(Arc::clone(sig), carrier.clone(), interps));
        }
    }
    Ok(out)
}

/// Tables of the algebra transported along the automorphism `pi`:
/// `σ'(f) = π(σ(π⁻¹ ∘ f))`.
fn transport(ops: &[OpData], tables: &[Vec<usize>], pi: &[usize]) -> Vec<Vec<usize>> {
    let mut inv = vec![0; pi.len()];
    for (i, &j) in pi.iter().enumerate() {
        inv[j] = i;
    }
    ops.iter()
        .zip(tables)
        .map(|(d, t)| {
            d.maps
                .iter()
                .map(|f| {
                    let pulled: Vec<usize> = f.iter().map(|&p| inv[p]).collect();
                    pi[t[d.index[&pulled]]]
                })
                .collect()
        })
        .collect()
}

/// Every algebra of `v` on the given carriers with at most `carrier_bound`
/// points, one per isomorphism class provided the carriers are pairwise
/// non-isomorphic.
pub fn enumerate_algebras(
    v: &Variety,
    carriers: &[PreStructure],
    carrier_bound: usize,
    budget: Budget,
) -> Result<Vec<SigmaAlgebra>> {
    let chosen: Vec<&PreStructure> = carriers.iter().filter(|c| c.size() <= carrier_bound).collect();
    let per: Vec<Result<Vec<SigmaAlgebra>>> = par::map(budget.exec, &chosen, |c| algebras_on(v, c, budget));
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}
