//! Products and subalgebras.

use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::horn::structure::{Edge, EdgeSet, PreStructure, SymbolKind};
use crate::par::{power, Budget};
use crate::rational::{Bound, Rat};
use crate::sigma::algebra::{Interp, SigmaAlgebra, Table};
use crate::sigma::term::OpSignature;
use crate::structops::hom_maps;

/// Mixed-radix coordinates of product point `p`.
fn decode(mut p: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for i in (0..sizes.len()).rev() {
        out[i] = p % sizes[i];
        p /= sizes[i];
    }
    out
}

fn encode(coords: &[usize], sizes: &[usize]) -> usize {
    coords.iter().zip(sizes).fold(0, |acc, (&c, &s)| acc * s + c)
}

/// The product with componentwise edges and operations; the empty product
/// is the terminal one-point algebra.
pub fn product_algebra(sig: &Arc<OpSignature>, factors: &[SigmaAlgebra], budget: Budget) -> Result<SigmaAlgebra> {
    let theory = sig.theory();
    let sizes: Vec<usize> = factors.iter().map(SigmaAlgebra::size).collect();
    let total = sizes.iter().fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
    budget.check(total)?;
    let n = total as usize;
    let names: Vec<String> = (0..n)
        .map(|p| {
            if factors.is_empty() {
                return "*".to_string();
            }
            let parts: Vec<&str> = decode(p, &sizes)
                .iter()
                .zip(factors)
                .map(|(&c, a)| a.carrier().point_name(c))
                .collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let mut edges = EdgeSet::new();
    for (s, sym) in theory.signature.symbols().iter().enumerate() {
        budget.check(power(n, sym.arity))?;
        for tuple in std::iter::repeat_n(0..n, sym.arity).multi_cartesian_product() {
            let coords: Vec<Vec<usize>> = tuple.iter().map(|&p| decode(p, &sizes)).collect();
            let component = |i: usize| -> Vec<usize> { coords.iter().map(|c| c[i]).collect() };
            match sym.kind {
                SymbolKind::Plain => {
                    if factors.iter().enumerate().all(|(i, a)| a.carrier().edges().contains_plain(s, &component(i))) {
                        edges.insert(Edge::plain(s, tuple));
                    }
                }
                SymbolKind::Family => {
                    let mut acc = Some(Bound::closed(Rat::ZERO));
                    for (i, a) in factors.iter().enumerate() {
                        acc = match (acc, a.carrier().edges().bound(s, &component(i))) {
                            (Some(x), Some(y)) => Some(x.join(y)),
                            _ => None,
                        };
                    }
                    if let Some(b) = acc {
                        edges.insert(Edge::graded(s, b, tuple));
                    }
                }
            }
        }
    }
    let carrier = PreStructure::new(names, edges)?;
    let mut interps = Vec::with_capacity(sig.len());
    for (op, sym) in sig.ops().iter().enumerate() {
        let maps = hom_maps(&sym.arity, &carrier, budget)?;
        let mut values = Vec::with_capacity(maps.len());
        for f in &maps {
            let coords: Vec<Vec<usize>> = f.iter().map(|&p| decode(p, &sizes)).collect();
            let mut out = Vec::with_capacity(factors.len());
            for (i, a) in factors.iter().enumerate() {
                let proj: Vec<usize> = coords.iter().map(|c| c[i]).collect();
                out.push(a.apply(op, &proj).ok_or_else(|| Error::Algebra("factor is not total on its homs".into()))?);
            }
            values.push(encode(&out, &sizes));
        }
        interps.push(Interp::Table(Table::new(maps, values)));
    }
    SigmaAlgebra::new(Arc::clone(sig), carrier, interps, budget)
}

/// The subalgebra on `subset` (carrier indices of `a`), or an error naming
/// an operation and argument tuple whose value leaves the subset.
pub fn subalgebra_check(a: &SigmaAlgebra, subset: &[usize], budget: Budget) -> Result<SigmaAlgebra> {
    let mut pts: Vec<usize> = subset.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.iter().any(|&p| p >= a.size()) {
        return Err(Error::Algebra("subset leaves the carrier".into()));
    }
    let mut local = vec![None; a.size()];
    for (i, &p) in pts.iter().enumerate() {
        local[p] = Some(i);
    }
    let edges: EdgeSet = a
        .carrier()
        .edges()
        .iter()
        .filter_map(|e| {
            let points: Option<Vec<usize>> = e.points.iter().map(|&p| local[p]).collect();
            points.map(|points| Edge { points, ..e })
        })
        .collect();
    let names = pts.iter().map(|&p| a.carrier().point_name(p).to_string()).collect();
    let carrier = PreStructure::new(names, edges)?;
    let sig = a.signature();
    let mut interps = Vec::with_capacity(sig.len());
    for (op, sym) in sig.ops().iter().enumerate() {
        let maps = hom_maps(&sym.arity, &carrier, budget)?;
        let mut values = Vec::with_capacity(maps.len());
        for f in &maps {
            let args: Vec<usize> = f.iter().map(|&i| pts[i]).collect();
            let v = a.apply(op, &args).expect("inclusion is a morphism");
            let named: Vec<&str> = args.iter().map(|&p| a.carrier().point_name(p)).collect();
            let lv = local[v].ok_or_else(|| {
                Error::Algebra(format!(
                    "`{}` applied to ({}) gives `{}` outside the subset",
                    sym.name,
                    named.join(","),
                    a.carrier().point_name(v)
                ))
            })?;
            values.push(lv);
        }
        interps.push(Interp::Table(Table::new(maps, values)));
    }
    SigmaAlgebra::new(Arc::clone(sig), carrier, interps, budget)
}
