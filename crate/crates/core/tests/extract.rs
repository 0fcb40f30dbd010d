use std::sync::Arc;

use relat_core::catalog;
use relat_core::extract::*;
use relat_core::free::FreeMonad;
use relat_core::horn::{builtin, reflect, Edge, PreStructure};
use relat_core::par::Budget;
use relat_core::sigma::{in_variety, Term, Variety};
use relat_core::structops::hom_maps;
use relat_core::{Error, Rat};

fn b() -> Budget {
    Budget::default()
}

fn pos_model(names: &[&str], le: &[(usize, usize)]) -> PreStructure {
    let pos = Arc::new(builtin::pos().unwrap());
    let pre = PreStructure::discrete(names.iter().copied()).with_edges(le.iter().map(|&(a, c)| Edge::plain(0, vec![a, c])).collect());
    reflect(&pos, &pre).model.into_underlying()
}

fn semilattice() -> Arc<Variety> {
    Arc::new(catalog::semilattice().unwrap())
}

fn one() -> PreStructure {
    pos_model(&["x"], &[])
}

fn two() -> PreStructure {
    pos_model(&["x", "y"], &[])
}

#[test]
fn identity_monad_gives_constants_for_points() {
    let m = IdentityMonad { theory: Arc::new(builtin::pos().unwrap()) };
    let induced = induce_theory(&m, &[one()], b()).unwrap();
    assert_eq!(induced.variety.signature().len(), 1);
    assert_eq!(induced.family_count(AxiomFamily::Unit), 2);
    let t = canonical_algebra(&m, &induced, &two(), b()).unwrap();
    assert!(in_variety(&t, &induced.variety, b()).unwrap());
    // the single operation is the projection onto its one argument
    for p in 0..2 {
        assert_eq!(t.apply(0, &[p]), Some(p));
    }
}

#[test]
fn semilattice_monad_operations_are_the_free_elements() {
    let monad = FreeMonad::new(&semilattice(), 2, b()).unwrap();
    let induced = induce_theory(&monad, &[two()], b()).unwrap();
    let names: Vec<&str> = induced.variety.signature().ops().iter().map(|o| o.name.as_str()).collect();
    assert_eq!(names, ["g0[x]", "g0[y]", "g0[join{x->x,y->y}]"]);
    // f: 2 → T2 has 9 choices, each with 3 elements, each equality as two order edges
    assert_eq!(induced.family_count(AxiomFamily::Extension), 9 * 3 * 2);
    assert_eq!(induced.family_count(AxiomFamily::Unit), 2 * 2);
}

#[test]
fn edge_family_mirrors_the_free_order() {
    let monad = FreeMonad::new(&semilattice(), 2, b()).unwrap();
    let induced = induce_theory(&monad, &[two()], b()).unwrap();
    let f2 = monad.free(&two()).unwrap();
    let mirrored: Vec<Vec<usize>> = induced
        .variety
        .axioms()
        .iter()
        .zip(&induced.families)
        .filter(|(_, f)| **f == AxiomFamily::Edge)
        .map(|(ax, _)| {
            ax.relation
                .terms
                .iter()
                .map(|t| match t {
                    Term::App(op, _) => induced.ops[0].iter().position(|o| o == op).unwrap(),
                    _ => panic!("edge axioms relate generic terms"),
                })
                .collect()
        })
        .collect();
    let expected: Vec<Vec<usize>> = f2.carrier().edges().iter().map(|e| e.points).collect();
    assert_eq!(mirrored, expected);
}

#[test]
fn canonical_algebra_matches_the_free_algebra() {
    let v = semilattice();
    let monad = FreeMonad::new(&v, 2, b()).unwrap();
    let induced = induce_theory(&monad, &[one(), two()], b()).unwrap();
    let t2 = canonical_algebra(&monad, &induced, &two(), b()).unwrap();
    assert!(in_variety(&t2, &induced.variety, b()).unwrap());
    let f2 = monad.free(&two()).unwrap();
    let free = f2.algebra().unwrap();
    // the operation of the join element acts as join on T2
    let join_op = induced.ops[1][2];
    for args in hom_maps(&induced.arities[1], t2.carrier(), b()).unwrap() {
        assert_eq!(t2.apply(join_op, &args), free.apply(0, &args));
    }
}

#[test]
fn unit_terms_evaluate_to_generators() {
    let monad = FreeMonad::new(&semilattice(), 2, b()).unwrap();
    let induced = induce_theory(&monad, &[one(), two()], b()).unwrap();
    for x in [one(), two()] {
        let tx = canonical_algebra(&monad, &induced, &x, b()).unwrap();
        for (i, gamma) in induced.arities.iter().enumerate() {
            for f in hom_maps(gamma, tx.carrier(), b()).unwrap() {
                for (p, &s) in induced.units[i].iter().enumerate() {
                    assert_eq!(tx.evaluate(&f, &induced.generic_term(i, s)), Some(f[p]));
                }
            }
        }
    }
}

#[test]
fn evaluation_of_generic_terms_is_extension() {
    let monad = FreeMonad::new(&semilattice(), 2, b()).unwrap();
    let induced = induce_theory(&monad, &[one(), two()], b()).unwrap();
    let x = pos_model(&["a", "b"], &[(0, 1)]);
    let tx = canonical_algebra(&monad, &induced, &x, b()).unwrap();
    for (i, gamma) in induced.arities.iter().enumerate() {
        for f in hom_maps(gamma, tx.carrier(), b()).unwrap() {
            let ext = monad.extend(gamma, &x, &f).unwrap();
            for s in 0..induced.objects[i].size() {
                assert_eq!(tx.evaluate(&f, &induced.generic_term(i, s)), Some(ext[s]));
            }
        }
    }
}

#[test]
fn roundtrip_for_semilattices() {
    let report = verify_roundtrip(&semilattice(), &[one(), two()], 2, 3, b()).unwrap();
    assert!(report.passes(), "{report:?}");
    assert!(report.algebras > 0);
    assert!(report.extensions > report.algebras);
}

#[test]
fn roundtrip_for_the_empty_signature() {
    let v = Arc::new(catalog::empty_variety(Arc::new(builtin::pos().unwrap())).unwrap());
    let report = verify_roundtrip(&v, &[one(), two()], 1, 2, b()).unwrap();
    assert!(report.passes(), "{report:?}");
}

#[test]
fn guarded_metric_monad_satisfies_its_extension_axioms() {
    let v = Arc::new(catalog::met_guarded().unwrap());
    let half = catalog::metric_context(&["x", "y"], &[vec![Rat::ZERO, Rat::frac(1, 2)], vec![Rat::frac(1, 2), Rat::ZERO]])
        .unwrap()
        .0;
    let monad = FreeMonad::new(&v, 3, b()).unwrap();
    let induced = induce_theory(&monad, &[half.clone()], b()).unwrap();
    assert!(induced.family_count(AxiomFamily::Extension) > 0);
    let t = canonical_algebra(&monad, &induced, &half, b()).unwrap();
    assert!(in_variety(&t, &induced.variety, b()).unwrap());
}

#[test]
fn non_stabilized_monads_are_refused() {
    let pos = Arc::new(builtin::pos().unwrap());
    let (arity, _) = catalog::presented(&pos, &["p", "q"], vec![]);
    let sig = Arc::new(
        relat_core::sigma::OpSignature::new(pos, vec![relat_core::sigma::OpSymbol { name: "m".into(), arity }]).unwrap(),
    );
    let v = Arc::new(Variety::new("magma", sig, vec![]).unwrap());
    assert!(matches!(verify_roundtrip(&v, &[one()], 2, 2, b()), Err(Error::NotStabilized(2))));
}

#[test]
fn registration_validates_the_laws() {
    let reg = RegisteredOracle::register(FreeMonad::new(&semilattice(), 2, b()).unwrap(), vec![one(), two()], b()).unwrap();
    assert!(reg.report().passes());

    // unit-extension fails: the extension of the unit is constant
    struct Constant(Arc<relat_core::horn::HornTheory>);
    impl MonadOracle for Constant {
        fn theory(&self) -> &Arc<relat_core::horn::HornTheory> {
            &self.0
        }
        fn object(&self, _: &PreStructure) -> relat_core::Result<PreStructure> {
            Ok(pos_model(&["a", "b"], &[]))
        }
        fn unit(&self, x: &PreStructure) -> relat_core::Result<Vec<usize>> {
            Ok(vec![0; x.size()])
        }
        fn extend(&self, _: &PreStructure, _: &PreStructure, _: &[usize]) -> relat_core::Result<Vec<usize>> {
            Ok(vec![0, 0])
        }
    }
    let bad = RegisteredOracle::register(Constant(Arc::new(builtin::pos().unwrap())), vec![two()], b());
    assert!(matches!(bad, Err(Error::Oracle(_))));
}
