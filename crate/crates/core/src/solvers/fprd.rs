//! Fixed-point solvers built on the relaxed dual iteration
//! `b ← t·b + (1 − t)·(I − shrink_{g/λ})(∇φ + b)`.
//!
//! `(I − shrink_τ)(v)` is the clip of `v` to `[−τ, τ]`, so the dual variables
//! stay bounded by `g/λ` and neither solver needs a linear solve.

use alloc::vec::Vec;

use crate::error::Result;
use crate::field::{Axis, ScalarField};
use crate::grid::{div_adjoint_into, grad_forward_into};

use super::{drive, shrink_threshold, threshold_mask, Iterate, Problem, Segmentation, SolverConfig, Stepper};

/// Dual variables and the buffers of their update.
struct Dual {
    bx: ScalarField,
    by: ScalarField,
    tau: Vec<f64>,
    t: f64,
    grad: ScalarField,
    adj: ScalarField,
    scratch: ScalarField,
}

impl Dual {
    fn new(shape: (usize, usize), g: &ScalarField, lambda: f64, t: f64) -> Self {
        let z = ScalarField::zeros(shape.0, shape.1);
        Self {
            bx: z.clone(),
            by: z.clone(),
            tau: shrink_threshold(g, lambda),
            t,
            grad: z.clone(),
            adj: z.clone(),
            scratch: z,
        }
    }

    /// Relaxed update of `b_x`, `b_y` from `φ`, leaving
    /// `∇ᵀ_x b_x + ∇ᵀ_y b_y` in `self.adj`.
    fn update(&mut self, phi: &ScalarField) {
        let t = self.t;
        for axis in [Axis::X, Axis::Y] {
            grad_forward_into(phi, axis, &mut self.grad);
            let b = match axis {
                Axis::X => &mut self.bx,
                Axis::Y => &mut self.by,
            };
            for ((bk, &gk), &tau) in b.as_mut_slice().iter_mut().zip(self.grad.as_slice()).zip(&self.tau) {
                let v = gk + *bk;
                *bk = t * *bk + (1.0 - t) * v.clamp(-tau, tau);
            }
        }
        div_adjoint_into(&self.bx, Axis::X, &mut self.adj);
        div_adjoint_into(&self.by, Axis::Y, &mut self.scratch);
        for (a, &s) in self.adj.as_mut_slice().iter_mut().zip(self.scratch.as_slice()) {
            *a += s;
        }
    }
}

/// State of FPRD1: `φ ← clamp(φ − μη/α − (λ/α)∇ᵀb, 0, 1)`.
pub struct Fprd1State {
    pub phi: ScalarField,
    dual: Dual,
    mu_over_alpha: f64,
    step: f64,
}

impl Fprd1State {
    pub fn new(phi: ScalarField, g: &ScalarField, cfg: &SolverConfig) -> Self {
        Self {
            dual: Dual::new(phi.shape(), g, cfg.lambda, cfg.t),
            phi,
            mu_over_alpha: cfg.model.mu / cfg.alpha,
            step: cfg.lambda / cfg.alpha,
        }
    }

    pub fn bx(&self) -> &ScalarField {
        &self.dual.bx
    }

    pub fn by(&self) -> &ScalarField {
        &self.dual.by
    }

    /// One iteration with data force `eta`; returns `‖Δφ‖_∞`.
    pub fn advance(&mut self, eta: &ScalarField) -> f64 {
        self.dual.update(&self.phi);
        let mut change: f64 = 0.0;
        for ((p, &e), &a) in self.phi.as_mut_slice().iter_mut().zip(eta.as_slice()).zip(self.dual.adj.as_slice()) {
            let next = (*p - self.mu_over_alpha * e - self.step * a).clamp(0.0, 1.0);
            change = change.max((next - *p).abs());
            *p = next;
        }
        change
    }
}

impl Stepper for Fprd1State {
    fn step(&mut self, eta: &ScalarField) -> f64 {
        self.advance(eta)
    }

    fn current(&self) -> &ScalarField {
        &self.phi
    }

    fn force(&self, problem: &Problem<'_>, gamma: f64) -> Result<ScalarField> {
        problem.force_from_mask(&threshold_mask(&self.phi, gamma))
    }

    fn into_current(self) -> ScalarField {
        self.phi
    }
}

/// State of FPRD2: an unconstrained smoothing variable `φ`, the projected
/// variable `ψ ∈ [0, 1]` that carries the segmentation, and the multiplier
/// `c` that ties them together.
pub struct Fprd2State {
    pub phi: ScalarField,
    pub psi: ScalarField,
    pub c: ScalarField,
    dual: Dual,
    mu_over_alpha: f64,
    step: f64,
}

impl Fprd2State {
    /// Starts from `φ = ψ = phi0` and `c = 0`.
    pub fn new(phi0: ScalarField, g: &ScalarField, cfg: &SolverConfig) -> Self {
        let (h, w) = phi0.shape();
        Self {
            dual: Dual::new((h, w), g, cfg.lambda, cfg.t),
            psi: phi0.clone(),
            phi: phi0,
            c: ScalarField::zeros(h, w),
            mu_over_alpha: cfg.model.mu / cfg.alpha,
            step: cfg.lambda / cfg.alpha,
        }
    }

    /// One iteration with data force `eta`; returns `‖Δψ‖_∞`.
    ///
    /// `φ ← ψ + c − (λ/α)∇ᵀb`, `ψ ← clamp(φ − c − (μ/α)η, 0, 1)`,
    /// `c ← c + ψ − φ`.
    pub fn advance(&mut self, eta: &ScalarField) -> f64 {
        self.dual.update(&self.phi);
        let mut change: f64 = 0.0;
        let it = self
            .phi
            .as_mut_slice()
            .iter_mut()
            .zip(self.psi.as_mut_slice())
            .zip(self.c.as_mut_slice())
            .zip(eta.as_slice())
            .zip(self.dual.adj.as_slice());
        for ((((phi, psi), c), &e), &a) in it {
            let phi_next = *psi + *c - self.step * a;
            let psi_next = (phi_next - *c - self.mu_over_alpha * e).clamp(0.0, 1.0);
            *c += psi_next - phi_next;
            change = change.max((psi_next - *psi).abs());
            *phi = phi_next;
            *psi = psi_next;
        }
        change
    }
}

impl Stepper for Fprd2State {
    fn step(&mut self, eta: &ScalarField) -> f64 {
        self.advance(eta)
    }

    fn current(&self) -> &ScalarField {
        &self.psi
    }

    fn force(&self, problem: &Problem<'_>, gamma: f64) -> Result<ScalarField> {
        problem.force_from_mask(&threshold_mask(&self.psi, gamma))
    }

    fn into_current(self) -> ScalarField {
        self.psi
    }
}

pub(super) fn run_fprd1(
    problem: &Problem<'_>,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<Segmentation> {
    let state = Fprd1State::new(problem.initial_phi(), &problem.g, cfg);
    drive(state, problem, cfg, observer)
}

pub(super) fn run_fprd2(
    problem: &Problem<'_>,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<Segmentation> {
    let state = Fprd2State::new(problem.initial_phi(), &problem.g, cfg);
    drive(state, problem, cfg, observer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::Algorithm;

    #[test]
    fn fprd2_constant_state_is_a_fixed_point() {
        let mut cfg = SolverConfig::standard(Algorithm::Fprd2);
        cfg.model.mu = 1.0;
        let g = ScalarField::filled(10, 10, 1.0);
        let mut s = Fprd2State::new(ScalarField::filled(10, 10, 0.6), &g, &cfg);
        let eta = ScalarField::zeros(10, 10);
        for _ in 0..25 {
            assert_eq!(s.advance(&eta), 0.0);
        }
        assert!(s.psi.as_slice().iter().all(|&v| v == 0.6));
        assert!(s.phi.as_slice().iter().all(|&v| v == 0.6));
        assert!(s.c.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dual_stays_within_shrink_threshold() {
        let cfg = SolverConfig::standard(Algorithm::Fprd1);
        let g = ScalarField::from_fn(12, 12, |i, j| 0.1 + 0.05 * ((i + j) % 7) as f64);
        let phi = ScalarField::from_fn(12, 12, |i, j| ((i * 7 + j * 3) % 5) as f64 / 4.0);
        let mut s = Fprd1State::new(phi, &g, &cfg);
        let eta = ScalarField::from_fn(12, 12, |i, _| i as f64 - 6.0);
        for _ in 0..10 {
            s.advance(&eta);
            for (b, gv) in s.bx().as_slice().iter().chain(s.by().as_slice()).zip(g.as_slice().iter().cycle()) {
                assert!(b.abs() <= gv / cfg.lambda + 1e-15);
            }
            assert!(s.phi.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
