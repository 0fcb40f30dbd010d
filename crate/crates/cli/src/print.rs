//! Pretty-printers producing text the parsers read back.

use std::fmt::Write as _;

use relat_core::horn::{EqWitness, HornAxiom, HornTheory, LimitRule, PreStructure, SymbolKind};
use relat_core::sigma::{TermEdge, Variety};

pub fn print_theory(t: &HornTheory) -> String {
    let mut out = format!("theory {}\n", t.name);
    for s in t.signature.symbols() {
        match s.kind {
            SymbolKind::Plain => writeln!(out, "rel {} {}", s.name, s.arity),
            SymbolKind::Family if s.arity == 2 => writeln!(out, "relfam {} rational", s.name),
            SymbolKind::Family => writeln!(out, "relfam {} rational {}", s.name, s.arity),
        }
        .unwrap();
    }
    for ax in &t.axioms {
        writeln!(out, "axiom {}", print_axiom(t, ax)).unwrap();
    }
    if let EqWitness::Edges(atoms) = &t.eq_witness {
        let vars = ["x".to_string(), "y".to_string()];
        let atoms: Vec<String> = atoms.iter().map(|a| t.render_atom(a, &vars, &[])).collect();
        writeln!(out, "eq {}", atoms.join(", ")).unwrap();
    }
    for rule in &t.limit_rules {
        match rule {
            LimitRule::MetArch => out.push_str("limitrule met-arch\n"),
            LimitRule::LatticeArch { table, symbols } => {
                writeln!(out, "lattice {}", table.elements.join(" ")).unwrap();
                for (a, row) in table.leq.iter().enumerate() {
                    for (b, &le) in row.iter().enumerate() {
                        if le && a != b {
                            writeln!(out, "order {} {}", table.elements[a], table.elements[b]).unwrap();
                        }
                    }
                }
                for (&(a, b), &m) in &table.meets {
                    let e = &table.elements;
                    writeln!(out, "meet {} {} {}", e[a], e[b], e[m]).unwrap();
                }
                let syms: Vec<&str> = symbols.iter().map(|&s| t.signature.symbol(s).name.as_str()).collect();
                writeln!(out, "limitrule lattice-arch {}", syms.join(" ")).unwrap();
            }
        }
    }
    out
}

fn print_axiom(t: &HornTheory, ax: &HornAxiom) -> String {
    let atom = |a| t.render_atom(a, &ax.vars, &ax.metas);
    let premises: Vec<String> = ax.premises.iter().map(atom).collect();
    let mut s = format!("{}: ", ax.name);
    if !premises.is_empty() {
        s.push_str(&premises.join(", "));
        s.push(' ');
    }
    write!(s, "=> {}", atom(&ax.conclusion)).unwrap();
    if !ax.side.is_empty() {
        let conds: Vec<String> = ax
            .side
            .iter()
            .map(|c| format!("{} {} {}", ax.metas[c.meta], c.relation.symbol(), c.expr.render(&ax.metas)))
            .collect();
        write!(s, " where {}", conds.join(", ")).unwrap();
    }
    s
}

/// `points` and `edge` lines of a structure.
fn print_block(theory: &HornTheory, points: &[String], edges: impl Iterator<Item = relat_core::horn::Edge>) -> String {
    let mut out = String::new();
    if !points.is_empty() {
        writeln!(out, "points {}", points.join(" ")).unwrap();
    }
    for e in edges {
        writeln!(out, "edge {}", theory.render_edge(&e, points)).unwrap();
    }
    out
}

pub fn print_structure(name: &str, theory: &HornTheory, s: &PreStructure) -> String {
    format!("structure {name} over {}\n{}", theory.name, print_block(theory, s.points(), s.edges().iter()))
}

fn print_relation(v: &Variety, r: &TermEdge, context: &[String]) -> String {
    let theory = v.signature().theory();
    let name = &theory.signature.symbol(r.sym).name;
    let terms: Vec<String> = r.terms.iter().map(|t| t.render(v.signature(), context)).collect();
    match r.index {
        Some(q) => format!("{name}[{q}]({})", terms.join(", ")),
        None => format!("{name}({})", terms.join(", ")),
    }
}

/// Arities and contexts become inline structure blocks named after the
/// operation or axiom.
pub fn print_variety(v: &Variety) -> String {
    let sig = v.signature();
    let theory = sig.theory();
    let mut out = format!("variety {} over {}\n", v.name, theory.name);
    for op in sig.ops() {
        writeln!(out, "\nstructure arity-{}", op.name).unwrap();
        out.push_str(&print_block(theory, op.arity.points(), op.arity.edges().iter()));
        writeln!(out, "op {} arity arity-{}", op.name, op.name).unwrap();
    }
    for ax in v.axioms() {
        writeln!(out, "\nstructure context-{}", ax.name).unwrap();
        out.push_str(&print_block(theory, ax.context.points(), ax.presentation.iter()));
        let rel = print_relation(v, &ax.relation, ax.context.points());
        writeln!(out, "axiom {} context context-{} : {rel}", ax.name, ax.name).unwrap();
    }
    out
}
