use arnold_bench::{canonical_roof, constructed, golden};
use arnold_core::birkhoff::{birkhoff_sum, SumMethod};
use arnold_core::orbit::{closest_return, Method};
use arnold_core::roof::Roof;
use arnold_core::{CirclePoint, Rotation};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn sums(c: &mut Criterion) {
  let rot = Rotation::new(&constructed(30)).unwrap();
  let roof = Roof::Arnold(canonical_roof());
  let x = CirclePoint::from_f64(0.4142);
  let mut g = c.benchmark_group("birkhoff_sum");
  g.sample_size(10);
  for n in [10_000i64, 1_000_000] {
    for (name, method) in [
      ("naive", SumMethod::NaiveCompensated),
      ("blocked", SumMethod::OstrowskiBlocked),
    ] {
      g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
        b.iter(|| birkhoff_sum(&roof, &rot, black_box(x), n, 1, method).unwrap())
      });
    }
  }
  g.bench_function("blocked/10000000", |b| {
    b.iter(|| {
      birkhoff_sum(
        &roof,
        &rot,
        black_box(x),
        10_000_000,
        1,
        SumMethod::OstrowskiBlocked,
      )
      .unwrap()
    })
  });
  g.finish();
}

fn returns(c: &mut Criterion) {
  let rot = Rotation::new(&golden(45)).unwrap();
  let x = CirclePoint::from_f64(0.2718);
  let mut g = c.benchmark_group("closest_return");
  g.sample_size(10);
  for n in [20usize, 30] {
    let q = rot.q(n).unwrap();
    g.bench_with_input(BenchmarkId::new("naive", q), &n, |b, &n| {
      b.iter(|| closest_return(&rot, black_box(x), n, Method::Naive).unwrap())
    });
    g.bench_with_input(BenchmarkId::new("accelerated", q), &n, |b, &n| {
      b.iter(|| closest_return(&rot, black_box(x), n, Method::Accelerated).unwrap())
    });
  }
  g.finish();
}

criterion_group!(benches, sums, returns);
criterion_main!(benches);
