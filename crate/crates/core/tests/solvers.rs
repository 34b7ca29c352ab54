use sarseg_core::metrics::dice;
use sarseg_core::solvers::{
    convex_energy, segment, segment_observed, Algorithm, Problem, SolverConfig, StopReason, STABLE_MASK_ITERATIONS,
};
use sarseg_core::speckle::{make_phantom, Geometry, SpeckleSpec};
use sarseg_core::ScalarField;

fn speckled(geometry: Geometry, size: usize, seed: u64) -> (ScalarField, sarseg_core::Mask) {
    let p = make_phantom((size, size), 200.0, 50.0, geometry, Some(SpeckleSpec::new(4, seed))).unwrap();
    // Same rounding and range as an 8-bit image file.
    (p.noisy.map(|v| v.round().clamp(1.0, 255.0)), p.mask)
}

#[test]
fn noiseless_phantoms_are_recovered_exactly() {
    for geometry in Geometry::ALL {
        let p = make_phantom((64, 64), 200.0, 50.0, geometry, None).unwrap();
        for alg in Algorithm::ALL {
            let mut cfg = SolverConfig::standard(alg);
            cfg.max_iter = 200;
            let mut masks = Vec::new();
            let seg = segment_observed(&p.noisy, &cfg, |it| masks.push(it.mask.clone())).unwrap();
            assert_eq!(dice(&seg.mask, &p.mask).unwrap(), 1.0, "{alg} on {geometry}");
            assert!(seg.iterations <= 200);
            if seg.stop == StopReason::MaskStable {
                let tail = &masks[masks.len() - STABLE_MASK_ITERATIONS..];
                assert!(tail.iter().all(|m| *m == seg.mask), "{alg} on {geometry}");
            }
        }
    }
}

#[test]
fn convex_iterates_stay_in_unit_interval() {
    let (f, _) = speckled(Geometry::TwoDisks, 40, 11);
    for alg in [Algorithm::Sbrd, Algorithm::Fprd1, Algorithm::Fprd2] {
        for cfg in [SolverConfig::standard(alg), SolverConfig::phantom_profile(alg)] {
            let mut seen = 0;
            segment_observed(&f, &cfg, |it| {
                seen += 1;
                assert!(it.phi.as_slice().iter().all(|v| (0.0..=1.0).contains(v)), "{alg} at {}", it.iteration);
            })
            .unwrap();
            assert!(seen > 0);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let (f, _) = speckled(Geometry::Annulus, 48, 5);
    for alg in Algorithm::ALL {
        let cfg = SolverConfig::phantom_profile(alg);
        let a = segment(&f, &cfg).unwrap();
        let b = segment(&f, &cfg).unwrap();
        assert_eq!(a, b, "{alg}");
    }
}

#[test]
fn convex_energy_decreases_over_a_run() {
    // η and g frozen at their final values; FPRD's α is a step size, not a
    // term of its objective.
    for geometry in [Geometry::Disk, Geometry::TwoDisks, Geometry::Annulus] {
        let (f, _) = speckled(geometry, 64, 2);
        for alg in [Algorithm::Sbrd, Algorithm::Fprd1, Algorithm::Fprd2] {
            let cfg = SolverConfig::phantom_profile(alg);
            let problem = Problem::new(&f, &cfg).unwrap();
            let phi0 = problem.initial_phi();
            let seg = segment(&f, &cfg).unwrap();
            let eta = problem.force_from_mask(&seg.mask).unwrap();
            let alpha = if alg == Algorithm::Sbrd { cfg.alpha } else { 0.0 };
            let energy = |phi: &ScalarField| convex_energy(phi, &problem.g, &eta, cfg.model.mu, alpha).unwrap();
            let (start, end) = (energy(&phi0), energy(&seg.phi));
            assert!(end < start, "{alg} on {geometry}: {start} -> {end}");
        }
    }
}

#[test]
fn undersized_or_nonpositive_images_are_rejected() {
    let cfg = SolverConfig::standard(Algorithm::Fprd1);
    assert!(segment(&ScalarField::filled(2, 8, 5.0), &cfg).is_err());
    let mut f = ScalarField::filled(20, 20, 5.0);
    f.set(3, 3, 0.0);
    assert!(segment(&f, &cfg).is_err());
}
