//! The parallel and sequential paths produce identical results.

use nondiv::count::{enumerate_n2, enumerate_n3, IntPoly, DEFAULT_BUDGET};
use nondiv::orbit;
use nondiv::par;
use nondiv::polytope::{build_omega, VolumeMethod};
use nondiv::torus::split_torus;

fn run() -> (u64, u64, Vec<f64>, f64, f64) {
    let n2 = enumerate_n2(&IntPoly::parse("1,-3,2").unwrap(), 700.0).unwrap();
    let n3 = enumerate_n3(&IntPoly::parse("1,0,-1,0").unwrap(), 4.0, DEFAULT_BUDGET).unwrap();
    let spec = orbit::example1_torus(2).unwrap();
    let g = orbit::example1_translator(50.0, 50.0);
    let region = orbit::omega_piece(&spec, &g, 0.1, 1.0, vec![(0.0, orbit::unit_period(2).unwrap())]).unwrap();
    let s = orbit::sample_orbit(&spec, &g, &region, 3000, 5).unwrap();
    let systoles: Vec<f64> = s.samples.iter().map(|(_, l)| nondiv::lattice::systole(l).unwrap()).collect();
    let siegel = orbit::siegel_statistic(&s, 2.0).unwrap().mean;
    let spec4 = split_torus(4).unwrap();
    let b = nondiv::graph::unipotent(4, &[((0, 1), 3.0), ((1, 2), 3.0), ((2, 3), 3.0)]);
    let vol = build_omega(&spec4, &b, 0.5)
        .unwrap()
        .volume(VolumeMethod::MonteCarlo { samples: 50_000, seed: 9 })
        .unwrap()
        .value;
    (n2, n3, systoles, siegel, vol)
}

#[test]
fn parallel_and_sequential_agree() {
    par::set_sequential(false);
    let a = run();
    par::set_sequential(true);
    assert!(!par::is_parallel());
    let b = run();
    par::set_sequential(false);
    assert_eq!(a, b);
}
