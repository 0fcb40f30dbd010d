//! Monads on finite models given in Kleisli form, and the law checker.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::horn::reflect::is_model;
use crate::horn::structure::PreStructure;
use crate::horn::theory::HornTheory;
use crate::par::Budget;
use crate::structops::{check_enriched, compose, hom_maps, StructureFunctor};

/// A monad on the models of a Horn theory, answered object by object:
/// `X ↦ T X`, `η_X: X → T X` and `f ↦ f*: T X → T Y` for `f: X → |T Y|`.
pub trait MonadOracle: Send + Sync {
    fn theory(&self) -> &Arc<HornTheory>;
    fn object(&self, x: &PreStructure) -> Result<PreStructure>;
    fn unit(&self, x: &PreStructure) -> Result<Vec<usize>>;
    fn extend(&self, x: &PreStructure, y: &PreStructure, f: &[usize]) -> Result<Vec<usize>>;
}

/// `T X = X`.
pub struct IdentityMonad {
    pub theory: Arc<HornTheory>,
}

impl MonadOracle for IdentityMonad {
    fn theory(&self) -> &Arc<HornTheory> {
        &self.theory
    }

    fn object(&self, x: &PreStructure) -> Result<PreStructure> {
        Ok(x.clone())
    }

    fn unit(&self, x: &PreStructure) -> Result<Vec<usize>> {
        Ok((0..x.size()).collect())
    }

    fn extend(&self, _: &PreStructure, _: &PreStructure, f: &[usize]) -> Result<Vec<usize>> {
        Ok(f.to_vec())
    }
}

/// The underlying functor `T f = (η_Y · f)*`.
pub struct MonadFunctor<'a, M: ?Sized>(pub &'a M);

impl<M: MonadOracle + ?Sized> StructureFunctor for MonadFunctor<'_, M> {
    fn object(&self, x: &PreStructure) -> Result<PreStructure> {
        self.0.object(x)
    }

    fn morphism(&self, x: &PreStructure, y: &PreStructure, f: &[usize]) -> Result<Vec<usize>> {
        let eta = self.0.unit(y)?;
        self.0.extend(x, y, &compose(f, &eta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KleisliLaw {
    /// `η_X* = id`.
    UnitExtension,
    /// `f* · η_X = f`.
    ExtensionUnit,
    /// `g* · f* = (g* · f)*`.
    Composition,
    /// The functor maps edges of `[X, Y]` to edges of `[T X, T Y]`.
    Enrichment,
}

impl fmt::Display for KleisliLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KleisliLaw::UnitExtension => "unit-extension",
            KleisliLaw::ExtensionUnit => "extension-unit",
            KleisliLaw::Composition => "composition",
            KleisliLaw::Enrichment => "enrichment",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawViolation {
    pub law: KleisliLaw,
    pub witness: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub objects: usize,
    pub unit_checks: usize,
    pub extension_checks: usize,
    pub composition_checks: usize,
    pub enriched_pairs: usize,
    pub violations: Vec<LawViolation>,
}

impl LawReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

fn maps_witness(parts: &[(&str, &[usize])]) -> String {
    parts.iter().map(|(n, m)| format!("{n}={m:?}")).collect::<Vec<_>>().join(" ")
}

/// Checks the Kleisli laws pointwise for every `f: X → |T Y|` and
/// `g: Y → |T Z|` over the objects, and enrichment of the underlying
/// functor on every pair.
pub fn check_kleisli_laws<M: MonadOracle + ?Sized>(m: &M, objects: &[PreStructure], budget: Budget) -> Result<LawReport> {
    let mut report = LawReport { objects: objects.len(), ..LawReport::default() };
    let t: Vec<PreStructure> = objects.iter().map(|x| m.object(x)).collect::<Result<_>>()?;
    let eta: Vec<Vec<usize>> = objects.iter().map(|x| m.unit(x)).collect::<Result<_>>()?;
    for (i, x) in objects.iter().enumerate() {
        report.unit_checks += 1;
        let id: Vec<usize> = (0..t[i].size()).collect();
        let ext = m.extend(x, x, &eta[i])?;
        if ext != id {
            report.violations.push(LawViolation {
                law: KleisliLaw::UnitExtension,
                witness: format!("X#{i} {}", maps_witness(&[("unit*", &ext)])),
            });
        }
    }
    for (i, x) in objects.iter().enumerate() {
        for (j, y) in objects.iter().enumerate() {
            let fs = hom_maps(x, &t[j], budget)?;
            let exts: Vec<Vec<usize>> = fs.iter().map(|f| m.extend(x, y, f)).collect::<Result<_>>()?;
            for (f, fe) in fs.iter().zip(&exts) {
                report.extension_checks += 1;
                if compose(&eta[i], fe) != *f {
                    report.violations.push(LawViolation {
                        law: KleisliLaw::ExtensionUnit,
                        witness: format!("X#{i} Y#{j} {}", maps_witness(&[("f", f), ("f*", fe)])),
                    });
                }
            }
            for (k, z) in objects.iter().enumerate() {
                let gs = hom_maps(y, &t[k], budget)?;
                budget.check(fs.len() as u128 * gs.len() as u128)?;
                for g in &gs {
                    let ge = m.extend(y, z, g)?;
                    for (f, fe) in fs.iter().zip(&exts) {
                        report.composition_checks += 1;
                        let lhs = compose(fe, &ge);
                        let rhs = m.extend(x, z, &compose(f, &ge))?;
                        if lhs != rhs {
                            report.violations.push(LawViolation {
                                law: KleisliLaw::Composition,
                                witness: format!(
                                    "X#{i} Y#{j} Z#{k} {}",
                                    maps_witness(&[("f", f), ("g", g), ("g*f*", &lhs), ("(g*f)*", &rhs)])
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    let functor = MonadFunctor(m);
    for (i, x) in objects.iter().enumerate() {
        for (j, y) in objects.iter().enumerate() {
            report.enriched_pairs += 1;
            let witness = match check_enriched(&functor, &m.theory().signature, x, y, budget) {
                Ok(true) => None,
                Ok(false) => Some("an edge of the hom is not preserved".to_string()),
                Err(Error::Functoriality(msg)) => Some(msg),
                Err(e) => return Err(e),
            };
            if let Some(w) = witness {
                report.violations.push(LawViolation { law: KleisliLaw::Enrichment, witness: format!("X#{i} Y#{j} {w}") });
            }
        }
    }
    Ok(report)
}

/// An oracle together with a finite universe of models on which its laws
/// were verified.
pub struct RegisteredOracle<M> {
    oracle: M,
    universe: Vec<PreStructure>,
    report: LawReport,
}

impl<M: MonadOracle> RegisteredOracle<M> {
    /// Validates the universe and the Kleisli laws on it.
    pub fn register(oracle: M, universe: Vec<PreStructure>, budget: Budget) -> Result<RegisteredOracle<M>> {
        for (i, x) in universe.iter().enumerate() {
            if !is_model(oracle.theory(), x) {
                return Err(Error::Oracle(format!("universe object #{i} is not a model")));
            }
            let tx = oracle.object(x)?;
            if !is_model(oracle.theory(), &tx) {
                return Err(Error::Oracle(format!("T of universe object #{i} is not a model")));
            }
            let eta = oracle.unit(x)?;
            if eta.len() != x.size() || eta.iter().any(|&p| p >= tx.size()) || !x.preserves(&tx, &eta) {
                return Err(Error::Oracle(format!("unit at universe object #{i} is not a morphism")));
            }
        }
        let report = check_kleisli_laws(&oracle, &universe, budget)?;
        if let Some(v) = report.violations.first() {
            return Err(Error::Oracle(format!("{} law fails: {}", v.law, v.witness)));
        }
        Ok(RegisteredOracle { oracle, universe, report })
    }

    pub fn oracle(&self) -> &M {
        &self.oracle
    }

    pub fn universe(&self) -> &[PreStructure] {
        &self.universe
    }

    pub fn report(&self) -> &LawReport {
        &self.report
    }
}
