use std::collections::HashSet;

use nalgebra::DMatrix;
use proptest::prelude::*;

use nondiv::count::{enumerate_n2, list_n2, IntPoly};
use nondiv::graph::{
    enumerate_uds, weight_vector_action, DivergenceGraph, VertexLayout, WeightAction, DEFAULT_SAMPLES, ZERO_TOL,
};
use nondiv::polytope::build_omega;
use nondiv::torus::split_torus;

fn sl3(l: [f64; 3], u: [f64; 3]) -> DMatrix<f64> {
    let lower = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, l[0], 1.0, 0.0, l[1], l[2], 1.0]);
    let upper = DMatrix::from_row_slice(3, 3, &[1.0, u[0], u[1], 0.0, 1.0, u[2], 0.0, 0.0, 1.0]);
    lower * upper
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_invariant_under_negation(t in -6i64..=6, d in -12i64..=12, r in 1u32..30) {
        let p = IntPoly::new(vec![1, -t, d]).unwrap();
        prop_assert_eq!(enumerate_n2(&p, r as f64).unwrap(), enumerate_n2(&p.negated(), r as f64).unwrap());
    }

    #[test]
    fn counted_set_closed_under_norm_preserving_conjugation(t in -4i64..=4, d in -8i64..=8, r in 1u32..16) {
        let p = IntPoly::new(vec![1, -t, d]).unwrap();
        let set: HashSet<[i64; 4]> = list_n2(&p, r as f64).unwrap().into_iter().collect();
        for &[a, b, c, dd] in &set {
            // transpose, and conjugation by the swap and by diag(1, −1)
            prop_assert!(set.contains(&[a, c, b, dd]));
            prop_assert!(set.contains(&[dd, c, b, a]));
            prop_assert!(set.contains(&[a, -b, -c, dd]));
        }
    }

    #[test]
    fn weight_action_constant_exactly_on_uds(mask in 0u64..64, subset in 1u32..15) {
        // u_i = I + i·Σ_{edges a<b} E_ab on 4 ordered vertices
        let g = DivergenceGraph::from_edge_mask(4, mask);
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let sampler = move |i: f64| {
            let mut u = DMatrix::<f64>::identity(4, 4);
            for &(a, b) in &edges {
                u[(a.min(b), a.max(b))] = i;
            }
            u
        };
        let vertices: Vec<usize> = (0..4).filter(|v| subset >> v & 1 == 1).collect();
        let action = weight_vector_action(&sampler, &VertexLayout::split(4), &vertices, &DEFAULT_SAMPLES, ZERO_TOL).unwrap();
        let is_uds = enumerate_uds(&g).unwrap().iter().any(|s| s.vertices == vertices);
        prop_assert_eq!(action == WeightAction::ConstantEqual, is_uds);
    }

    #[test]
    fn omega_shrinks_as_epsilon_grows(
        l in prop::array::uniform3(-3.0f64..3.0),
        u in prop::array::uniform3(-3.0f64..3.0),
        e1 in 0.05f64..0.5,
        de in 0.01f64..0.5,
    ) {
        let spec = split_torus(3).unwrap();
        let b = sl3(l, u);
        let big = build_omega(&spec, &b, e1).unwrap();
        let small = build_omega(&spec, &b, e1 + de).unwrap();
        match small.chebyshev() {
            Ok(_) => prop_assert!(big.contains(&small).unwrap()),
            Err(nondiv::Error::EmptyPolytope) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}
