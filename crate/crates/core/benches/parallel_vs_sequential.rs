use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use nondiv::count::{enumerate_n2, IntPoly};
use nondiv::orbit;
use nondiv::par;
use nondiv::polytope::{build_omega, VolumeMethod};
use nondiv::torus::split_torus;

fn modes(c: &mut Criterion, name: &str, mut f: impl FnMut()) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    for (label, seq) in [("parallel", false), ("sequential", true)] {
        par::set_sequential(seq);
        group.bench_function(BenchmarkId::from_parameter(label), |b| b.iter(&mut f));
    }
    par::set_sequential(false);
    group.finish();
}

fn benches(c: &mut Criterion) {
    let p = IntPoly::parse("1,-3,2").unwrap();
    modes(c, "enumerate_n2_R4096", || {
        black_box(enumerate_n2(&p, 4096.0).unwrap());
    });

    let spec4 = split_torus(4).unwrap();
    let b = nondiv::graph::unipotent(4, &[((0, 1), 30.0), ((1, 2), 30.0), ((2, 3), 30.0), ((0, 3), 900.0)]);
    let omega = build_omega(&spec4, &b, 0.5).unwrap();
    modes(c, "monte_carlo_volume_200k", || {
        black_box(omega.volume(VolumeMethod::MonteCarlo { samples: 200_000, seed: 1 }).unwrap());
    });

    let spec1 = orbit::example1_torus(2).unwrap();
    let g = orbit::example1_translator(1e4, 1e4);
    let region = orbit::omega_piece(&spec1, &g, 0.1, 1.0, vec![(0.0, orbit::unit_period(2).unwrap())]).unwrap();
    modes(c, "orbit_siegel_4096", || {
        let s = orbit::sample_orbit(&spec1, &g, &region, 4096, 7).unwrap();
        black_box(orbit::siegel_statistic(&s, 2.0).unwrap());
    });
}

criterion_group!(parallel_vs_sequential, benches);
criterion_main!(parallel_vs_sequential);
