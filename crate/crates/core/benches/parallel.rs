use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use isodimer::geometry::{build_triangular_lattice, TriangularRegion};
use isodimer::kernel::InfiniteKernel;
use isodimer::mc::{par_map, seq_map};
use isodimer::sampler::{RngStream, Sampler};

fn sampling(c: &mut Criterion) {
    let g = build_triangular_lattice(&TriangularRegion::Hexagons { cols: 8, rows: 6 }).unwrap();
    let sampler = Sampler::new(&g).unwrap();
    let streams: Vec<u64> = (0..64).collect();
    let draw = |&i: &u64| sampler.sample(&mut RngStream::new(3, i)).unwrap().edges.len();
    let mut group = c.benchmark_group("sample_64");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", g.num_faces()), |b| b.iter(|| seq_map(&streams, draw)));
    group.bench_function(BenchmarkId::new("parallel", g.num_faces()), |b| b.iter(|| par_map(&streams, draw)));
    group.finish();
}

fn kernel_table(c: &mut Criterion) {
    let g = build_triangular_lattice(&TriangularRegion::Hexagons { cols: 6, rows: 5 }).unwrap();
    let (blacks, whites) = (g.blacks(), g.whites());
    let pairs: Vec<(usize, usize)> =
        blacks.iter().step_by(3).flat_map(|&b| whites.iter().step_by(3).map(move |&w| (b, w))).collect();
    let mut group = c.benchmark_group("kernel_inverse");
    group.sample_size(10);
    // a fresh kernel per iteration so the integral cache starts empty
    group.bench_function(BenchmarkId::new("sequential", pairs.len()), |b| {
        b.iter(|| {
            let k = InfiniteKernel::new(&g).unwrap();
            seq_map(&pairs, |&(b, w)| k.inverse(b, w).unwrap())
        })
    });
    group.bench_function(BenchmarkId::new("parallel", pairs.len()), |b| {
        b.iter(|| {
            let k = InfiniteKernel::new(&g).unwrap();
            par_map(&pairs, |&(b, w)| k.inverse(b, w).unwrap())
        })
    });
    group.finish();
}

criterion_group!(benches, sampling, kernel_table);
criterion_main!(benches);
