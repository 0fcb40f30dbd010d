//! The theory induced by a monad on a finite list of arities, its canonical
//! algebras and the roundtrip through the free-algebra monad.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extract::oracle::MonadOracle;
use crate::free::FreeMonad;
use crate::horn::structure::{Edge, PreStructure};
use crate::par::{power, Budget};
use crate::sigma::algebra::{is_homomorphism, Interp, SigmaAlgebra, Table};
use crate::sigma::enumerate::{carrier_palette, enumerate_algebras, Palette};
use crate::sigma::term::{OpSignature, OpSymbol, Term};
use crate::sigma::variety::{violated_axiom, SigmaRelation, TermEdge, Variety};
use crate::structops::{compose, hom_maps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxiomFamily {
    /// `Γ ⊢ α(σ₁, …, σ_k)` for an edge of `T Γ`.
    Edge,
    /// `Γ ⊢ f*(σ) = σ(f)` for `f: Δ → T Γ` and `σ ∈ T Δ`.
    Extension,
    /// `Γ ⊢ η_Γ(x) = x`.
    Unit,
}

/// One operation per element of `T Γ` for each listed arity `Γ`, and the
/// three axiom families.
#[derive(Debug, Clone)]
pub struct InducedTheory {
    pub arities: Vec<PreStructure>,
    /// `T Γ` for each arity.
    pub objects: Vec<PreStructure>,
    pub units: Vec<Vec<usize>>,
    /// `ops[i][σ]` is the operation of element `σ` of `T Γ_i`.
    pub ops: Vec<Vec<usize>>,
    /// Family of each axiom of the variety, in order.
    pub families: Vec<AxiomFamily>,
    pub variety: Arc<Variety>,
}

impl InducedTheory {
    /// `σ(u_Γ)`: the operation applied to the points of its arity.
    pub fn generic_term(&self, arity: usize, element: usize) -> Term {
        Term::App(self.ops[arity][element], (0..self.arities[arity].size()).map(Term::Var).collect())
    }

    pub fn family_count(&self, family: AxiomFamily) -> usize {
        self.families.iter().filter(|&&f| f == family).count()
    }
}

/// `Γ ⊢ s = t` as one relation per edge of the equality witness.
fn equalities(eq: &[Edge], s: &Term, t: &Term) -> Vec<TermEdge> {
    eq.iter()
        .map(|e| TermEdge {
            sym: e.sym,
            index: e.index.map(|b| b.value),
            terms: e.points.iter().map(|&p| if p == 0 { s.clone() } else { t.clone() }).collect(),
        })
        .collect()
}

fn numbered(name: String, k: usize, n: usize) -> String {
    if n == 1 {
        name
    } else {
        format!("{name}.{}", k + 1)
    }
}

pub fn induce_theory<M: MonadOracle + ?Sized>(m: &M, arities: &[PreStructure], budget: Budget) -> Result<InducedTheory> {
    let theory = m.theory();
    let eq = theory
        .eq_edges(0, 1)
        .ok_or_else(|| Error::Oracle(format!("theory `{}` has no equality witness", theory.name)))?;
    let objects: Vec<PreStructure> = arities.iter().map(|g| m.object(g)).collect::<Result<_>>()?;
    let units: Vec<Vec<usize>> = arities.iter().map(|g| m.unit(g)).collect::<Result<_>>()?;
    let mut symbols = Vec::new();
    let mut ops = Vec::new();
    for (i, (g, t)) in arities.iter().zip(&objects).enumerate() {
        let mut row = Vec::new();
        for s in 0..t.size() {
            row.push(symbols.len());
            symbols.push(OpSymbol { name: format!("g{i}[{}]", t.point_name(s)), arity: g.clone() });
        }
        ops.push(row);
    }
    let sig = Arc::new(OpSignature::new(Arc::clone(theory), symbols)?);
    let generic = |i: usize, s: usize| Term::App(ops[i][s], (0..arities[i].size()).map(Term::Var).collect());

    let mut axioms = Vec::new();
    let mut families = Vec::new();
    let mut push = |name: String, context: &PreStructure, relation: TermEdge, family: AxiomFamily| {
        axioms.push(SigmaRelation {
            name,
            context: context.clone(),
            presentation: context.edges().clone(),
            relation,
        });
        families.push(family);
    };
    for (i, t) in objects.iter().enumerate() {
        for (k, e) in t.edges().iter().enumerate() {
            if e.index.is_some_and(|b| b.strict) {
                continue;
            }
            let relation = TermEdge {
                sym: e.sym,
                index: e.index.map(|b| b.value),
                terms: e.points.iter().map(|&s| generic(i, s)).collect(),
            };
            push(format!("edge:{i}:{k}"), &arities[i], relation, AxiomFamily::Edge);
        }
    }
    for (j, delta) in arities.iter().enumerate() {
        for (i, gamma) in arities.iter().enumerate() {
            budget.check(power(objects[i].size(), delta.size()))?;
            for (n, f) in hom_maps(delta, &objects[i], budget)?.into_iter().enumerate() {
                let ext = m.extend(delta, gamma, &f)?;
                let args: Vec<Term> = f.iter().map(|&s| generic(i, s)).collect();
                for s in 0..objects[j].size() {
                    let lhs = generic(i, ext[s]);
                    let rhs = Term::App(ops[j][s], args.clone());
                    let rels = equalities(&eq, &lhs, &rhs);
                    let count = rels.len();
                    for (k, r) in rels.into_iter().enumerate() {
                        push(numbered(format!("ext:{j}>{i}:{n}:{s}"), k, count), gamma, r, AxiomFamily::Extension);
                    }
                }
            }
        }
    }
    for (i, gamma) in arities.iter().enumerate() {
        for x in 0..gamma.size() {
            let rels = equalities(&eq, &generic(i, units[i][x]), &Term::Var(x));
            let count = rels.len();
            for (k, r) in rels.into_iter().enumerate() {
                push(numbered(format!("unit:{i}:{x}"), k, count), gamma, r, AxiomFamily::Unit);
            }
        }
    }
    let variety = Arc::new(Variety::new("induced", sig, axioms)?);
    Ok(InducedTheory { arities: arities.to_vec(), objects, units, ops, families, variety })
}

/// `T X` with `σ_{TX}(f) = f*(σ)`.
pub fn canonical_algebra<M: MonadOracle + ?Sized>(
    m: &M,
    induced: &InducedTheory,
    x: &PreStructure,
    budget: Budget,
) -> Result<SigmaAlgebra> {
    let tx = m.object(x)?;
    let sig = induced.variety.signature();
    let mut interps: Vec<Option<Interp>> = vec![None; sig.len()];
    for (i, gamma) in induced.arities.iter().enumerate() {
        budget.check(power(tx.size(), gamma.size()))?;
        let maps = hom_maps(gamma, &tx, budget)?;
        let exts: Vec<Vec<usize>> = maps.iter().map(|f| m.extend(gamma, x, f)).collect::<Result<_>>()?;
        for (s, &op) in induced.ops[i].iter().enumerate() {
            let values = exts.iter().map(|e| e[s]).collect();
            interps[op] = Some(Interp::Table(Table::new(maps.clone(), values)));
        }
    }
    let interps = interps.into_iter().map(|i| i.expect("every operation belongs to an arity")).collect();
    SigmaAlgebra::new(Arc::clone(sig), tx, interps, budget)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RoundtripReport {
    pub arities: usize,
    pub operations: usize,
    pub axioms: [usize; 3],
    /// Axioms failing in a canonical algebra, as `(arity, axiom)`.
    pub canonical_violations: Vec<(usize, String)>,
    pub algebras: usize,
    pub extensions: usize,
    pub violations: Vec<String>,
}

impl RoundtripReport {
    pub fn passes(&self) -> bool {
        self.canonical_violations.is_empty() && self.violations.is_empty()
    }
}

/// Induces the theory of the free-algebra monad of `variety` on the
/// arities and checks that each `T Γ` is free over `Γ` among the induced
/// algebras with at most `carrier_bound` points: `f̄(σ) = σ_A(f)` is the
/// unique homomorphism extending every generator map.
pub fn verify_roundtrip(
    variety: &Arc<Variety>,
    arities: &[PreStructure],
    depth: usize,
    carrier_bound: usize,
    budget: Budget,
) -> Result<RoundtripReport> {
    let monad = FreeMonad::new(variety, depth, budget)?;
    for g in arities {
        monad.stable(g)?;
    }
    let induced = induce_theory(&monad, arities, budget)?;
    let mut report = RoundtripReport {
        arities: arities.len(),
        operations: induced.variety.signature().len(),
        axioms: [
            induced.family_count(AxiomFamily::Edge),
            induced.family_count(AxiomFamily::Extension),
            induced.family_count(AxiomFamily::Unit),
        ],
        ..RoundtripReport::default()
    };
    let canonical: Vec<SigmaAlgebra> =
        arities.iter().map(|g| canonical_algebra(&monad, &induced, g, budget)).collect::<Result<_>>()?;
    for (i, c) in canonical.iter().enumerate() {
        for ax in induced.variety.axioms() {
            if !crate::sigma::variety::satisfies(c, ax, budget)? {
                report.canonical_violations.push((i, ax.name.clone()));
            }
        }
    }
    let theory = variety.signature().theory();
    let carriers = carrier_palette(theory, carrier_bound, &Palette::default(), budget)?;
    let algebras = enumerate_algebras(&induced.variety, &carriers, carrier_bound, budget)?;
    report.algebras = algebras.len();
    for (a_index, a) in algebras.iter().enumerate() {
        debug_assert!(violated_axiom(a, &induced.variety, budget)?.is_none());
        for (i, gamma) in arities.iter().enumerate() {
            for f in hom_maps(gamma, a.carrier(), budget)? {
                report.extensions += 1;
                let fbar: Option<Vec<usize>> = induced.ops[i].iter().map(|&op| a.apply(op, &f)).collect();
                let witness = format!("algebra #{a_index} arity #{i} f={f:?}");
                let Some(fbar) = fbar else {
                    report.violations.push(format!("{witness}: an operation is undefined at f"));
                    continue;
                };
                if compose(&induced.units[i], &fbar) != f {
                    report.violations.push(format!("{witness}: extension does not restrict to f"));
                }
                if !is_homomorphism(&fbar, &canonical[i], a, budget)? {
                    report.violations.push(format!("{witness}: extension is not a homomorphism"));
                }
                let mut others = 0;
                for h in hom_maps(canonical[i].carrier(), a.carrier(), budget)? {
                    if h != fbar && compose(&induced.units[i], &h) == f && is_homomorphism(&h, &canonical[i], a, budget)? {
                        others += 1;
                    }
                }
                if others > 0 {
                    report.violations.push(format!("{witness}: {others} further homomorphic extensions"));
                }
            }
        }
    }
    Ok(report)
}
