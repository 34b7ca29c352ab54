use proptest::prelude::*;
use sarseg_core::grid::{convolve, div_adjoint, grad_forward, KernelSpec};
use sarseg_core::metrics::{dice, pp_uniformity, RegionPartition};
use sarseg_core::model::{delta, heaviside};
use sarseg_core::solvers::{shrink_scalar, threshold_mask, Fprd1State, Fprd2State, SolverConfig, Algorithm};
use sarseg_core::{Axis, Mask, ScalarField};

fn field(h: usize, w: usize, lo: f64, hi: f64) -> impl Strategy<Value = ScalarField> {
    prop::collection::vec(lo..hi, h * w).prop_map(move |v| ScalarField::new(h, w, v).unwrap())
}

fn shaped_pair() -> impl Strategy<Value = (ScalarField, ScalarField)> {
    (2usize..12, 2usize..12).prop_flat_map(|(h, w)| (field(h, w, -5.0, 5.0), field(h, w, -5.0, 5.0)))
}

fn l2(a: &ScalarField, b: &ScalarField) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn gradient_and_divergence_are_adjoint((u, p) in shaped_pair()) {
        for axis in [Axis::X, Axis::Y] {
            let lhs = grad_forward(&u, axis).unwrap().dot(&p);
            let rhs = u.dot(&div_adjoint(&p, axis).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn convolution_is_linear(
        (u, v) in (8usize..16, 8usize..16).prop_flat_map(|(h, w)| (field(h, w, -3.0, 3.0), field(h, w, -3.0, 3.0))),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        sigma in 0.3f64..3.0,
        isef in any::<bool>(),
    ) {
        let spec = if isef { KernelSpec::isef(sigma) } else { KernelSpec::gaussian(sigma) };
        let spec = KernelSpec { radius: spec.radius.min(u.height().min(u.width()) - 1), ..spec };
        let combo = u.zip_map(&v, |x, y| a * x + b * y);
        let lhs = convolve(&combo, &spec).unwrap();
        let (cu, cv) = (convolve(&u, &spec).unwrap(), convolve(&v, &spec).unwrap());
        let rhs = cu.zip_map(&cv, |x, y| a * x + b * y);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
        let total: f64 = spec.weights().unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn shrink_is_nonexpansive(a in -100.0f64..100.0, b in -100.0f64..100.0, tau in 0.0f64..50.0) {
        prop_assert!((shrink_scalar(a, tau) - shrink_scalar(b, tau)).abs() <= (a - b).abs() + 1e-12);
        prop_assert!(shrink_scalar(a, tau).abs() <= a.abs());
    }

    #[test]
    fn smoothed_step_is_odd_about_one_half(x in -50.0f64..50.0, eps in 0.05f64..5.0) {
        prop_assert!((heaviside(x, eps) + heaviside(-x, eps) - 1.0).abs() <= 1e-12);
        prop_assert!(delta(x, eps) > 0.0);
        prop_assert_eq!(delta(x, eps), delta(-x, eps));
    }

    #[test]
    fn threshold_matches_entrywise_comparison(phi in field(6, 9, 0.0, 1.0), gamma in 0.01f64..0.99) {
        let mask = threshold_mask(&phi, gamma);
        for (m, &v) in mask.as_slice().iter().zip(phi.as_slice()) {
            prop_assert_eq!(*m, v > gamma);
        }
        // Thresholding a 0/1 field gives the same mask back.
        prop_assert_eq!(threshold_mask(&mask.to_field(), gamma), mask);
    }

    #[test]
    fn pp_ignores_affine_rescaling(
        f in field(7, 7, 1.0, 255.0),
        bits in prop::collection::vec(any::<bool>(), 49),
        scale in 0.01f64..100.0,
        shift in -50.0f64..50.0,
    ) {
        let mask = Mask::new(7, 7, bits).unwrap();
        prop_assume!(mask.count() > 0 && mask.count() < 49);
        let part = RegionPartition::from(&mask);
        let a = pp_uniformity(&f, &part).unwrap();
        let b = pp_uniformity(&f.map(|v| scale * v + shift), &part).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn dice_is_symmetric(
        a in prop::collection::vec(any::<bool>(), 30),
        b in prop::collection::vec(any::<bool>(), 30),
    ) {
        let (a, b) = (Mask::new(5, 6, a).unwrap(), Mask::new(5, 6, b).unwrap());
        prop_assert_eq!(dice(&a, &b).unwrap(), dice(&b, &a).unwrap());
    }

    #[test]
    fn fixed_point_maps_are_nonexpansive(
        (a, b) in (3usize..10, 3usize..10).prop_flat_map(|(h, w)| (field(h, w, 0.0, 1.0), field(h, w, 0.0, 1.0))),
        gmin in 0.01f64..1.0,
    ) {
        let (h, w) = a.shape();
        let g = ScalarField::from_fn(h, w, |i, j| gmin + (1.0 - gmin) * (((i * 5 + j * 3) % 7) as f64 / 6.0));
        let eta = ScalarField::zeros(h, w);
        for alg in [Algorithm::Fprd1, Algorithm::Fprd2] {
            let cfg = SolverConfig::standard(alg);
            let (fa, fb) = match alg {
                Algorithm::Fprd1 => {
                    let (mut sa, mut sb) = (Fprd1State::new(a.clone(), &g, &cfg), Fprd1State::new(b.clone(), &g, &cfg));
                    sa.advance(&eta);
                    sb.advance(&eta);
                    (sa.phi, sb.phi)
                }
                _ => {
                    let (mut sa, mut sb) = (Fprd2State::new(a.clone(), &g, &cfg), Fprd2State::new(b.clone(), &g, &cfg));
                    sa.advance(&eta);
                    sb.advance(&eta);
                    (sa.psi, sb.psi)
                }
            };
            prop_assert!(l2(&fa, &fb) <= l2(&a, &b) + 1e-12, "{alg}");
        }
    }
}
