use std::sync::Arc;

use proptest::prelude::*;
use relat_cli::document::ProofDocument;
use relat_cli::parse::{parse_algebra, parse_goal, parse_structure, parse_theory, parse_variety, Library};
use relat_cli::print::{print_structure, print_theory, print_variety};
use relat_cli::syntax::ParseError;
use relat_core::catalog;
use relat_core::horn::{builtin, Edge, EdgeSet, HornTheory, LatticeTable, PreStructure};
use relat_core::logic::{check_proof, derive, BankConfig, Calculus, Derived, Judgement};
use relat_core::par::Budget;
use relat_core::sigma::{in_variety, Term, Variety};
use relat_core::{Bound, Rat};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{FIXTURES}/{name}")).unwrap()
}

fn no_files(_: &str) -> Result<Option<PreStructure>, String> {
    Ok(None)
}

fn fixture_files(r: &str) -> Result<Option<PreStructure>, String> {
    let path = format!("{FIXTURES}/{r}");
    match std::fs::read_to_string(path) {
        Ok(text) => parse_structure(&text, &Library::default()).map(|s| Some(s.pre)).map_err(|e| e.to_string()),
        Err(_) => Ok(None),
    }
}

fn variety_fixture(name: &str) -> Variety {
    parse_variety(&fixture(name), &Library::default(), &mut fixture_files).unwrap().variety
}

fn err(r: Result<impl std::fmt::Debug, ParseError>) -> ParseError {
    r.expect_err("expected a parse error")
}

#[test]
fn pos_file_matches_builtin() {
    let t = parse_theory(&fixture("pos.rt")).unwrap();
    assert!(t.structurally_eq(&builtin::pos().unwrap()));
}

#[test]
fn met_file_matches_builtin() {
    let t = parse_theory(&fixture("met.rt")).unwrap();
    assert!(t.structurally_eq(&builtin::met().unwrap()));
}

#[test]
fn theory_differing_in_an_axiom_is_not_the_builtin() {
    let text = fixture("pos.rt").replace("le(x,y), le(y,z) => le(x,z)", "le(x,y), le(y,z) => le(z,x)");
    assert!(!parse_theory(&text).unwrap().structurally_eq(&builtin::pos().unwrap()));
}

#[test]
fn edge_over_undeclared_point_names_it() {
    let e = err(parse_structure("structure s over pos\npoints a b\nedge le(a,c)\n", &Library::default()));
    assert_eq!((e.line, e.column), (3, 11));
    assert!(e.message.contains("`c`"), "{e}");
}

#[test]
fn index_out_of_range_is_rejected() {
    let e = err(parse_structure("structure s over met\npoints a b\nedge eq[3/2](a,b)\n", &Library::default()));
    assert_eq!((e.line, e.column), (3, 9));
    assert!(e.message.contains("out of [0,1]"), "{e}");
    let e = err(parse_theory("theory t\nrelfam d rational\naxiom => d[3/2](x,x)\n"));
    assert_eq!(e.line, 3);
}

#[test]
fn unknown_symbol_and_arity_mismatch() {
    let e = err(parse_theory("theory t\nrel le 2\naxiom le(x,y) => lt(x,y)\n"));
    assert_eq!((e.line, e.column), (3, 18));
    assert!(e.message.contains("unknown symbol `lt`"));
    let e = err(parse_theory("theory t\nrel le 2\naxiom le(x) => le(x,x)\n"));
    assert!(e.message.contains("arity mismatch"), "{e}");
    let e = err(parse_structure("structure s over pos\npoints a\nedge le[1/2](a,a)\n", &Library::default()));
    assert!(e.message.contains("takes no index"), "{e}");
    let e = err(parse_structure("structure s over met\npoints a\nedge eq(a,a)\n", &Library::default()));
    assert!(e.message.contains("needs an index"), "{e}");
}

#[test]
fn eq_witness_failure_points_at_the_eq_line() {
    let e = err(parse_theory("theory t\nrel le 2\nrel m 2\n\n# witness\neq m(x,y)\n"));
    assert_eq!(e.line, 6);
    assert!(e.message.contains("equality witness"), "{e}");
}

#[test]
fn unknown_theory_and_missing_header() {
    let e = err(parse_structure("structure s over nothing\n", &Library::default()));
    assert_eq!((e.line, e.column), (1, 18));
    let e = err(parse_theory("rel le 2\n"));
    assert_eq!(e.line, 1);
}

#[test]
fn variety_context_that_merges_points_is_rejected() {
    let text = "variety v over pos\nstructure c\npoints x y\nedge le(x,y), le(y,x)\naxiom a context c : le(x, y)\n";
    let e = err(parse_variety(text, &Library::default(), &mut no_files));
    assert_eq!(e.line, 5);
    assert!(e.message.contains("equal"), "{e}");
}

#[test]
fn variety_term_errors_are_anchored() {
    let base = "variety v over pos\nstructure two\npoints x y\nop join arity two\n";
    let e = err(parse_variety(&format!("{base}axiom a context two : le(join(x), y)\n"), &Library::default(), &mut no_files));
    assert_eq!((e.line, e.column), (5, 26));
    let e = err(parse_variety(&format!("{base}axiom a context two : le(meet(x, y), y)\n"), &Library::default(), &mut no_files));
    assert!(e.message.contains("`meet`"), "{e}");
    let e = err(parse_variety(&format!("{base}axiom a context two : le(join{{x->x}}, y)\n"), &Library::default(), &mut no_files));
    assert!(e.message.contains("missing"), "{e}");
}

#[test]
fn semilattice_file_is_the_catalog_variety() {
    let v = variety_fixture("semilattice.rv");
    let c = catalog::semilattice().unwrap();
    assert_eq!(v.axioms(), c.axioms());
    assert_eq!(v.signature().ops(), c.signature().ops());
}

#[test]
fn equations_expand_through_the_witness() {
    let v = variety_fixture("idempotent.rv");
    let names: Vec<&str> = v.axioms().iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["collapse.1", "collapse.2"]);
    let goals = parse_goal("twice(x) = x", v.signature(), &["x".to_string()]).unwrap();
    assert_eq!(goals.len(), 2);
    let goals = parse_goal("defined(twice(twice(x)))", v.signature(), &["x".to_string()]).unwrap();
    assert_eq!(goals, [Judgement::Def(Term::App(0, vec![Term::App(0, vec![Term::Var(0)])]))]);
}

fn roundtrip_theory(t: &HornTheory) {
    let text = print_theory(t);
    let back = parse_theory(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(&back, t, "{text}");
    assert_eq!(print_theory(&back), text);
}

#[test]
fn builtin_theories_roundtrip() {
    roundtrip_theory(&builtin::pos().unwrap());
    roundtrip_theory(&builtin::met().unwrap());
    let table = LatticeTable::new(
        vec!["bot".into(), "a".into(), "b".into(), "top".into()],
        &[("bot".into(), "a".into()), ("bot".into(), "b".into()), ("a".into(), "top".into()), ("b".into(), "top".into())],
        &[("a".into(), "b".into(), "bot".into())],
    )
    .unwrap();
    roundtrip_theory(&builtin::lvalued(&table).unwrap());
}

fn roundtrip_variety(v: &Variety) {
    let text = print_variety(v);
    let back = parse_variety(&text, &Library::default(), &mut no_files).unwrap_or_else(|e| panic!("{e}\n{text}")).variety;
    assert_eq!(&back, v, "{text}");
    assert_eq!(print_variety(&back), text);
}

#[test]
fn varieties_roundtrip() {
    roundtrip_variety(&catalog::semilattice().unwrap());
    roundtrip_variety(&catalog::met_guarded().unwrap());
    roundtrip_variety(&catalog::cauchy_limit(4).unwrap());
    roundtrip_variety(&variety_fixture("idempotent.rv"));
}

#[test]
fn algebra_files() {
    let v = variety_fixture("semilattice.rv");
    let max = parse_algebra(&fixture("max.ra"), &v, Budget::default()).unwrap();
    assert!(in_variety(&max, &v, Budget::default()).unwrap());
    let min = parse_algebra(&fixture("min.ra"), &v, Budget::default()).unwrap();
    assert!(!in_variety(&min, &v, Budget::default()).unwrap());
    let partial = fixture("max.ra").replace("value join(hi,hi) = hi\n", "");
    let e = err(parse_algebra(&partial, &v, Budget::default()));
    assert!(e.message.contains("no value at [x->hi,y->hi]"), "{e}");
    let projected = "algebra p of semilattice\npoints a\nproject join x\n";
    assert!(parse_algebra(projected, &v, Budget::default()).is_ok());
}

#[test]
fn proof_documents_roundtrip_and_check() {
    let v = Arc::new(variety_fixture("semilattice.rv"));
    let ctx = parse_structure(&fixture("chain.rs"), &Library::default()).unwrap().pre;
    let calc = Arc::new(Calculus::new(Arc::clone(&v)).unwrap());
    let mut proofs = Vec::new();
    for goal in ["le(join(x, y), y)", "le(x, join(x, join(x, y)))"] {
        for j in parse_goal(goal, v.signature(), ctx.points()).unwrap() {
            match derive(&calc, &ctx, &j, &BankConfig::depth(3)).unwrap() {
                Derived::Proof(p) => proofs.push(p),
                other => panic!("{goal}: {other:?}"),
            }
        }
    }
    let doc = ProofDocument::new(&calc, &ctx, "both", 3, &proofs, &|_| None);
    let json = serde_json::to_string(&doc).unwrap();
    let back: ProofDocument = serde_json::from_str(&json).unwrap();
    assert_eq!(back, doc);
    let rebuilt = back.proofs().unwrap();
    assert_eq!(rebuilt.len(), 2);
    for (p, q) in rebuilt.iter().zip(&proofs) {
        assert_eq!(p, q);
        check_proof(&calc, &ctx, p).unwrap();
    }
    let tree_nodes: usize = proofs.iter().map(|p| p.size()).sum();
    assert!(doc.nodes.len() <= tree_nodes);
}

#[test]
fn document_with_forward_premise_is_refused() {
    let v = Arc::new(variety_fixture("semilattice.rv"));
    let ctx = parse_structure(&fixture("chain.rs"), &Library::default()).unwrap().pre;
    let calc = Arc::new(Calculus::new(Arc::clone(&v)).unwrap());
    let j = parse_goal("le(join(x, y), y)", v.signature(), ctx.points()).unwrap().remove(0);
    let Derived::Proof(p) = derive(&calc, &ctx, &j, &BankConfig::depth(2)).unwrap() else { panic!() };
    let mut doc = ProofDocument::new(&calc, &ctx, "g", 2, &[p], &|_| None);
    let last = doc.nodes.len() - 1;
    doc.nodes[0].premises.push(last);
    assert!(doc.proofs().is_err());
}

fn arb_structure(theory: HornTheory) -> impl Strategy<Value = (HornTheory, PreStructure)> {
    let family = theory.signature.families().next().is_some();
    (1usize..5).prop_flat_map(move |n| {
        let theory = theory.clone();
        let edge = (0..n, 0..n, 0i64..=4, any::<bool>());
        proptest::collection::vec(edge, 0..8).prop_map(move |edges| {
            let mut set = EdgeSet::new();
            for (a, b, q, strict) in edges {
                if family {
                    let b4 = Rat::frac(q, 4);
                    let bound = if strict && q < 4 { Bound::open(b4) } else { Bound::closed(b4) };
                    set.insert(Edge::graded(0, bound, vec![a, b]));
                } else {
                    set.insert(Edge::plain(0, vec![a, b]));
                }
            }
            let names = (0..n).map(|i| format!("p{i}")).collect();
            (theory.clone(), PreStructure::new(names, set).unwrap())
        })
    })
}

proptest! {
    #[test]
    fn structures_roundtrip(
        (theory, s) in prop_oneof![arb_structure(builtin::pos().unwrap()), arb_structure(builtin::met().unwrap())]
    ) {
        let text = print_structure("s", &theory, &s);
        let back = parse_structure(&text, &Library::default()).unwrap();
        prop_assert_eq!(&back.pre, &s);
        prop_assert_eq!(&back.theory.name, &theory.name);
        prop_assert_eq!(print_structure("s", &theory, &back.pre), text);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored(pad in "[ \t]{0,3}", comment in "[a-z ]{0,10}") {
        let text = format!("\n# {comment}\n{pad}structure s over pos {pad}# {comment}\n\n{pad}points a b\nedge le(a, b) # {comment}\n");
        let s = parse_structure(&text, &Library::default()).unwrap();
        prop_assert_eq!(s.pre.size(), 2);
        prop_assert_eq!(s.pre.edges().len(), 1);
    }
}
