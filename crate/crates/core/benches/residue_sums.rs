use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use padelic::linalg::Matrix;
use padelic::rational::{int, ratio};
use padelic::residue::{residue_sum, BallSpec, QuadraticPhase, Strategy};
use padelic::Prime;

fn cases() -> Vec<(&'static str, Prime, QuadraticPhase, Vec<BallSpec>)> {
    let one_dim = QuadraticPhase::new(Matrix::diagonal(&[ratio(2, 9)]), vec![ratio(1, 3)], int(0)).unwrap();
    let two_dim = QuadraticPhase::new(
        Matrix::from_rows(vec![vec![ratio(1, 3), int(1)], vec![int(1), ratio(2, 3)]]).unwrap(),
        vec![ratio(1, 3), int(0)],
        int(0),
    )
    .unwrap();
    vec![
        ("1d p=7", Prime::new(7).unwrap(), one_dim, vec![BallSpec::new(4, 4).unwrap()]),
        ("2d p=3", Prime::new(3).unwrap(), two_dim, vec![BallSpec::new(3, 3).unwrap(); 2]),
    ]
}

fn strategies(c: &mut Criterion) {
    let mut group = c.benchmark_group("residue_sum");
    group.sample_size(20);
    for (name, p, phase, axes) in cases() {
        for (label, strategy) in [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, name), &strategy, |b, &s| {
                b.iter(|| residue_sum(&p, &phase, &axes, u64::MAX, s).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, strategies);
criterion_main!(benches);
