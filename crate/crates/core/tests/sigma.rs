use std::sync::Arc;

use itertools::Itertools;
use proptest::prelude::*;
use relat_core::catalog;
use relat_core::horn::*;
use relat_core::par::Budget;
use relat_core::sigma::*;
use relat_core::structops::{hom_maps, is_embedding, Morphism};
use relat_core::Rat;

fn b() -> Budget {
    Budget::default()
}

fn semilattice_algebras(bound: usize) -> (Variety, Vec<SigmaAlgebra>) {
    let v = catalog::semilattice().unwrap();
    let carriers = carrier_palette(v.signature().theory(), bound, &Palette::default(), b()).unwrap();
    let algs = enumerate_algebras(&v, &carriers, bound, b()).unwrap();
    (v, algs)
}

fn met_guarded_algebras(bound: usize) -> (Variety, Vec<SigmaAlgebra>) {
    let v = catalog::met_guarded().unwrap();
    let carriers = carrier_palette(v.signature().theory(), bound, &Palette::default(), b()).unwrap();
    let algs = enumerate_algebras(&v, &carriers, bound, b()).unwrap();
    (v, algs)
}

fn chain(names: [&str; 2]) -> PreStructure {
    let es: EdgeSet = [(0, 0), (1, 1), (0, 1)].iter().map(|&(a, c)| Edge::plain(0, vec![a, c])).collect();
    PreStructure::discrete(names).with_edges(es)
}

fn two_chain_semilattice(v: &Variety, first_projection: bool) -> relat_core::Result<SigmaAlgebra> {
    SigmaAlgebra::from_fn(
        Arc::clone(v.signature()),
        chain(["a", "b"]),
        |_, args| if first_projection { args[0] } else { args[0].max(args[1]) },
        b(),
    )
}

#[test]
fn evaluation_respects_arity_constraints() {
    let v = catalog::met_guarded().unwrap();
    let q = Rat::frac(1, 4);
    let h = Rat::frac(1, 2);
    let t = Rat::frac(3, 4);
    let z = Rat::ZERO;
    let carrier = metric_to_structure(
        vec!["a".into(), "b".into(), "c".into()],
        &[vec![z, t, q], vec![t, z, h], vec![q, h, z]],
    )
    .unwrap();
    let alg = SigmaAlgebra::new(
        Arc::clone(v.signature()),
        carrier,
        vec![Interp::Projection(0), Interp::Projection(0)],
        b(),
    )
    .unwrap();
    let c = Term::App(1, vec![Term::Var(0), Term::Var(1)]);
    assert_eq!(alg.evaluate(&[0, 1], &c), None);
    assert_eq!(alg.evaluate(&[0, 2], &c), Some(0));
    assert_eq!(alg.evaluate(&[2, 1], &c), Some(2));
    assert_eq!(alg.evaluate(&[1, 2], &Term::Var(0)), Some(1));
}

#[test]
fn satisfaction_of_semilattice_axioms() {
    let v = catalog::semilattice().unwrap();
    let join = two_chain_semilattice(&v, false).unwrap();
    assert!(in_variety(&join, &v, b()).unwrap());
    let proj = two_chain_semilattice(&v, true).unwrap();
    let ax = v.axiom("upper-right").unwrap();
    let witness = counterexample(&proj, ax, b()).unwrap().unwrap();
    assert_eq!(witness, vec![0, 1]);
    assert!(!holds_at(&proj, &ax.relation, &witness));
}

#[test]
fn closed_axioms_use_the_empty_assignment() {
    let pos = Arc::new(builtin::pos().unwrap());
    let sig = Arc::new(
        OpSignature::new(
            Arc::clone(&pos),
            vec![
                OpSymbol { name: "lo".into(), arity: PreStructure::empty() },
                OpSymbol { name: "hi".into(), arity: PreStructure::empty() },
            ],
        )
        .unwrap(),
    );
    let closed = SigmaRelation {
        name: "ordered".into(),
        context: PreStructure::empty(),
        presentation: EdgeSet::new(),
        relation: TermEdge { sym: 0, index: None, terms: vec![Term::App(1, vec![]), Term::App(0, vec![])] },
    };
    let v = Variety::new("consts", Arc::clone(&sig), vec![closed]).unwrap();
    let ok = SigmaAlgebra::from_fn(Arc::clone(&sig), chain(["a", "b"]), |op, _| 1 - op, b()).unwrap();
    let bad = SigmaAlgebra::from_fn(Arc::clone(&sig), chain(["a", "b"]), |op, _| op, b()).unwrap();
    assert!(in_variety(&ok, &v, b()).unwrap());
    assert_eq!(counterexample(&bad, &v.axioms()[0], b()).unwrap(), Some(vec![]));
    // on the two-point antichain the constants must coincide
    let anti = PreStructure::discrete(["a", "b"]).with_edges([Edge::plain(0, vec![0, 0]), Edge::plain(0, vec![1, 1])].into_iter().collect());
    let algs = enumerate_algebras(&v, &[anti], 2, b()).unwrap();
    assert_eq!(algs.len(), 1);
}

#[test]
fn unsatisfiable_on_palette_gives_no_algebras() {
    // every antichain has no upper bounds for distinct points
    let v = catalog::semilattice().unwrap();
    let anti = PreStructure::discrete(["a", "b"]).with_edges([Edge::plain(0, vec![0, 0]), Edge::plain(0, vec![1, 1])].into_iter().collect());
    assert!(enumerate_algebras(&v, &[anti], 2, b()).unwrap().is_empty());
}

#[test]
fn empty_signature_enumerates_posets() {
    let pos = Arc::new(builtin::pos().unwrap());
    let v = catalog::empty_variety(Arc::clone(&pos)).unwrap();
    let carriers = carrier_palette(&pos, 2, &Palette::default(), b()).unwrap();
    assert_eq!(enumerate_algebras(&v, &carriers, 2, b()).unwrap().len(), 3);
    let carriers = carrier_palette(&pos, 3, &Palette::default(), b()).unwrap();
    // unlabelled posets on 1, 2, 3 points: 1 + 2 + 5
    assert_eq!(carriers.len(), 8);
}

#[test]
fn semilattice_algebras_compute_joins() {
    let (_, algs) = semilattice_algebras(3);
    // 1-point, 2-chain, 3-chain, and the 3-point "V" with a top
    assert_eq!(algs.len(), 4);
    for a in &algs {
        let le = |x: usize, y: usize| a.carrier().edges().contains(&Edge::plain(0, vec![x, y]));
        for (x, y) in (0..a.size()).cartesian_product(0..a.size()) {
            let j = a.apply(0, &[x, y]).unwrap();
            assert!(le(x, j) && le(y, j));
            assert!((0..a.size()).filter(|&z| le(x, z) && le(y, z)).all(|z| le(j, z)));
        }
    }
}

#[test]
fn products_and_subalgebras() {
    let v = catalog::semilattice().unwrap();
    let c = two_chain_semilattice(&v, false).unwrap();
    let grid = product_algebra(v.signature(), &[c.clone(), c.clone()], b()).unwrap();
    assert_eq!(grid.size(), 4);
    assert!(in_variety(&grid, &v, b()).unwrap());
    assert_eq!(grid.carrier().point_name(1), "(a,b)");
    assert_eq!(grid.apply(0, &[1, 2]), Some(3));
    let unit = product_algebra(v.signature(), &[], b()).unwrap();
    assert_eq!(unit.size(), 1);
    assert!(in_variety(&unit, &v, b()).unwrap());
    let err = subalgebra_check(&grid, &[1, 2], b()).unwrap_err();
    assert!(err.to_string().contains("join"));
    let sub = subalgebra_check(&grid, &[0, 1, 3], b()).unwrap();
    assert!(in_variety(&sub, &v, b()).unwrap());
}

#[test]
fn homomorphism_examples() {
    let v = catalog::semilattice().unwrap();
    let c = two_chain_semilattice(&v, false).unwrap();
    assert!(is_homomorphism(&[0, 1], &c, &c, b()).unwrap());
    assert!(!is_homomorphism(&[1, 0], &c, &c, b()).unwrap());
    let grid = product_algebra(v.signature(), &[c.clone(), c.clone()], b()).unwrap();
    // first projection of the product is a homomorphism
    assert!(is_homomorphism(&[0, 0, 1, 1], &grid, &c, b()).unwrap());
}

#[test]
fn variety_closure_under_products_and_subalgebras() {
    for (v, algs) in [semilattice_algebras(3), met_guarded_algebras(2)] {
        assert!(!algs.is_empty());
        for a in &algs {
            assert!(in_variety(a, &v, b()).unwrap());
            for c in &algs {
                if a.size() * c.size() <= 4 {
                    let p = product_algebra(v.signature(), &[a.clone(), c.clone()], b()).unwrap();
                    assert!(in_variety(&p, &v, b()).unwrap());
                }
            }
            for k in 1..=a.size() {
                for subset in (0..a.size()).combinations(k) {
                    if let Ok(s) = subalgebra_check(a, &subset, b()) {
                        assert!(in_variety(&s, &v, b()).unwrap());
                    }
                }
            }
        }
    }
}

fn homs(a: &SigmaAlgebra, c: &SigmaAlgebra) -> Vec<Vec<usize>> {
    hom_maps(a.carrier(), c.carrier(), b())
        .unwrap()
        .into_iter()
        .filter(|h| is_homomorphism(h, a, c, b()).unwrap())
        .collect()
}

fn check_homomorphism_lemma(v: &Variety, algs: &[SigmaAlgebra], ctx: &PreStructure, depth: usize) {
    let terms = terms_up_to(v.signature(), ctx.size(), depth);
    for a in algs {
        for c in algs {
            for h in homs(a, c) {
                let emb = is_embedding(&Morphism::new(
                    Arc::new(a.carrier().clone()),
                    Arc::new(c.carrier().clone()),
                    h.clone(),
                )
                .unwrap());
                for e in hom_maps(ctx, a.carrier(), b()).unwrap() {
                    let he: Vec<usize> = e.iter().map(|&p| h[p]).collect();
                    for t in &terms {
                        let left = a.evaluate(&e, t);
                        let right = c.evaluate(&he, t);
                        if let Some(x) = left {
                            assert_eq!(right, Some(h[x]));
                        } else if emb {
                            assert_eq!(right, None);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn homomorphism_evaluation_lemma_semilattice() {
    let (v, algs) = semilattice_algebras(3);
    let pos = Arc::clone(v.signature().theory());
    let (ctx, _) = catalog::presented(&pos, &["x", "y"], vec![]);
    check_homomorphism_lemma(&v, &algs, &ctx, 3);
}

#[test]
fn homomorphism_evaluation_lemma_met() {
    let (v, algs) = met_guarded_algebras(2);
    let h = Rat::frac(1, 2);
    let (ctx, _) = catalog::metric_context(&["x", "y"], &[vec![Rat::ZERO, h], vec![h, Rat::ZERO]]).unwrap();
    check_homomorphism_lemma(&v, &algs, &ctx, 2);
}

#[test]
fn evaluation_is_hereditary() {
    let (v, algs) = met_guarded_algebras(2);
    let terms = terms_up_to(v.signature(), 2, 2);
    for a in &algs {
        for e in (0..2).map(|_| 0..a.size()).multi_cartesian_product() {
            for t in &terms {
                if a.evaluate(&e, t).is_some() {
                    for s in t.subterms() {
                        assert!(a.evaluate(&e, s).is_some());
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn substitution_lemma(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (v, algs) = met_guarded_algebras(2);
        let terms = terms_up_to(v.signature(), 2, 2);
        let a = &algs[rng.gen_range(0..algs.len())];
        let tau: Vec<Term> = (0..2).map(|_| terms[rng.gen_range(0..terms.len())].clone()).collect();
        let e: Vec<usize> = (0..2).map(|_| rng.gen_range(0..a.size())).collect();
        let e_tau: Option<Vec<usize>> = tau.iter().map(|t| a.evaluate(&e, t)).collect();
        if let Some(e_tau) = e_tau {
            for t in &terms {
                prop_assert_eq!(a.evaluate(&e, &t.substitute(&tau)), a.evaluate(&e_tau, t));
            }
        }
    }
}
