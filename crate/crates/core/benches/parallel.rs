//! Sequential against rayon-parallel execution of the exhaustive loops.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use relat_core::catalog;
use relat_core::free::check_monad_laws;
use relat_core::horn::{builtin, reflect, Edge, PreStructure};
use relat_core::par::{Budget, Exec};
use relat_core::sigma::{carrier_palette, enumerate_algebras, Palette};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn enumeration(c: &mut Criterion) {
    let v = catalog::met_guarded().unwrap();
    let mut group = c.benchmark_group("enumerate-met-guarded-3");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        let budget = Budget::default().with_exec(exec);
        let carriers = carrier_palette(v.signature().theory(), 3, &Palette::default(), budget).unwrap();
        group.bench_function(name, |bench| {
            bench.iter(|| enumerate_algebras(black_box(&v), &carriers, 3, budget).unwrap().len())
        });
    }
    group.finish();
}

fn monad_laws(c: &mut Criterion) {
    let v = Arc::new(catalog::semilattice().unwrap());
    let pos = Arc::new(builtin::pos().unwrap());
    let model = |names: &[&str], le: &[(usize, usize)]| {
        let pre = PreStructure::discrete(names.iter().copied()).with_edges(le.iter().map(|&(a, b)| Edge::plain(0, vec![a, b])).collect());
        reflect(&pos, &pre).model.into_underlying()
    };
    let objects = vec![model(&["x"], &[]), model(&["x", "y"], &[]), model(&["x", "y"], &[(0, 1)])];
    let mut group = c.benchmark_group("kleisli-laws-semilattice");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        let budget = Budget::default().with_exec(exec);
        group.bench_function(name, |bench| bench.iter(|| check_monad_laws(&v, black_box(&objects), 2, budget).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, enumeration, monad_laws);
criterion_main!(benches);
