use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;
use wignerlab_core::dynamics::characteristic;
use wignerlab_core::freeconv::{ComplexPoint, DiagonalPotential, FreeConvolution};
use wignerlab_core::io::{decode_matrix, encode_matrix};
use wignerlab_core::matrix::{Beta, SymmetricMatrix};
use wignerlab_core::momentflow::{
    build_generator, enumerate, transition_kernel, Boundary, EvolveOptions, Range, Window,
};
use wignerlab_core::semicircle;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Distinct sorted levels: cumulative sums of positive gaps.
fn levels(gaps: Vec<f64>) -> Vec<f64> {
    gaps.iter().scan(-2.0, |x, g| {
        *x += g;
        Some(*x)
    })
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_root_is_in_upper_half_plane(
        d in prop::collection::vec(-2.0..2.0f64, 5..40),
        e in -3.0..3.0f64,
        eta in 1e-3..2.0f64,
        t in 0.01..2.0f64,
    ) {
        let fc = FreeConvolution::new(DiagonalPotential::new(sorted(d.clone()), "random").unwrap(), t).unwrap();
        let z = Complex64::new(e, eta);
        let m = fc.solve_m(ComplexPoint::new(e, eta).unwrap()).unwrap();
        prop_assert!(m.im > 0.0);
        // Independent residual of m = (1/N) Σ 1/(D_k − z − t m).
        let rhs: Complex64 = d.iter().map(|&dk| 1.0 / (dk - z - t * m)).sum::<Complex64>() / d.len() as f64;
        prop_assert!((m - rhs).norm() <= 1e-10 * m.norm().max(1.0));
    }

    #[test]
    fn characteristics_transport_the_semicircle(
        e in -3.0..3.0f64,
        eta in 1e-3..3.0f64,
        tau in 1e-3..1.0f64,
    ) {
        let z = Complex64::new(e, eta);
        let zt = characteristic(z, tau).unwrap();
        prop_assert!(zt.im >= eta);
        let lhs = semicircle::stieltjes(zt);
        let rhs = (-tau / 2.0).exp() * semicircle::stieltjes(z);
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn generator_rows_sum_to_zero(
        gaps in prop::collection::vec(0.05..0.6f64, 7),
        particles in 1usize..4,
        ell in 1usize..4,
    ) {
        let lambda = levels(gaps);
        let space = Arc::new(enumerate(Window::new(0, 6).unwrap(), particles).unwrap());
        for range in [Range::Full, Range::Short(ell), Range::Long(ell)] {
            let gen = build_generator(&space, &lambda, range, Boundary::Reflect).unwrap();
            for r in 0..gen.len() {
                prop_assert!(gen.row_sum(r).abs() <= 1e-12 * gen.max_exit_rate().max(1.0));
            }
        }
    }

    #[test]
    fn transition_kernel_is_a_probability_vector(
        gaps in prop::collection::vec(0.05..0.6f64, 8),
        tau in 1e-3..0.05f64,
        start in 0usize..36,
    ) {
        let lambda = levels(gaps);
        let space = Arc::new(enumerate(Window::new(0, 7).unwrap(), 2).unwrap());
        let gen = build_generator(&space, &lambda, Range::Short(2), Boundary::Absorb).unwrap();
        let row = transition_kernel(&gen, start % space.len(), tau, EvolveOptions::default()).unwrap();
        prop_assert!(row.probs.iter().all(|&p| p >= -1e-14));
        prop_assert!(row.outside >= -1e-14);
        prop_assert!((row.total() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn matrix_dump_round_trips(
        n in 1usize..8,
        vals in prop::collection::vec(-5.0..5.0f64, 64),
        complex in any::<bool>(),
    ) {
        let beta = if complex { Beta::Complex } else { Beta::Real };
        let mut h = SymmetricMatrix::zeros(n, beta);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in i..n {
                let re = *it.next().unwrap();
                let im = if complex && i != j { *it.next().unwrap() } else { 0.0 };
                h.set(i, j, Complex64::new(re, im));
            }
        }
        let back = decode_matrix(&encode_matrix(&h)).unwrap();
        prop_assert_eq!(back, h);
    }
}
