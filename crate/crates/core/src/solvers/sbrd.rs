//! Split Bregman solver for the convex relaxation.

use alloc::vec::Vec;

use crate::error::Result;
use crate::field::{Axis, ScalarField};
use crate::grid::{div_adjoint_into, grad_forward_into};

use super::{drive, shrink_scalar, shrink_threshold, Iterate, Problem, Segmentation, SolverConfig, Stepper};

/// One in-place Gauss–Seidel sweep (raster order) for
/// `(αI − λΔ)φ = α/2 − μη + λ·adj`, projected onto `[0, 1]`.
///
/// `adj` is `∇ᵀ_x(d_x − b_x) + ∇ᵀ_y(d_y − b_y)`. Boundary neighbours are
/// reflected, which makes `Δ` the Neumann Laplacian `−∇ᵀ∇`.
pub fn gauss_seidel_sweep(
    phi: &mut ScalarField,
    adj: &ScalarField,
    eta: &ScalarField,
    mu: f64,
    lambda: f64,
    alpha: f64,
) {
    let (h, w) = phi.shape();
    let inv = 1.0 / (alpha + 4.0 * lambda);
    let a = adj.as_slice();
    let e = eta.as_slice();
    let p = phi.as_mut_slice();
    for i in 0..h {
        let up = if i == 0 { 0 } else { i - 1 };
        let down = if i + 1 == h { i } else { i + 1 };
        for j in 0..w {
            let left = if j == 0 { 0 } else { j - 1 };
            let right = if j + 1 == w { j } else { j + 1 };
            let k = i * w + j;
            let nbrs = p[up * w + j] + p[down * w + j] + p[i * w + left] + p[i * w + right];
            let beta = (lambda * (nbrs + a[k]) + 0.5 * alpha - mu * e[k]) * inv;
            p[k] = beta.clamp(0.0, 1.0);
        }
    }
}

/// Primal, split and Bregman variables of an SBRD run.
pub struct SbrdState {
    pub phi: ScalarField,
    pub dx: ScalarField,
    pub dy: ScalarField,
    pub bx: ScalarField,
    pub by: ScalarField,
    tau: Vec<f64>,
    mu: f64,
    lambda: f64,
    alpha: f64,
    adj: ScalarField,
    scratch: ScalarField,
    prev: ScalarField,
}

impl SbrdState {
    /// Zero split and Bregman variables, as the method prescribes.
    pub fn new(phi: ScalarField, g: &ScalarField, cfg: &SolverConfig) -> Self {
        let (h, w) = phi.shape();
        let z = ScalarField::zeros(h, w);
        Self {
            tau: shrink_threshold(g, cfg.lambda),
            mu: cfg.model.mu,
            lambda: cfg.lambda,
            alpha: cfg.alpha,
            dx: z.clone(),
            dy: z.clone(),
            bx: z.clone(),
            by: z.clone(),
            adj: z.clone(),
            scratch: z,
            prev: phi.clone(),
            phi,
        }
    }

    fn update_adjoint(&mut self) {
        let diff_x = self.dx.zip_map(&self.bx, |d, b| d - b);
        let diff_y = self.dy.zip_map(&self.by, |d, b| d - b);
        div_adjoint_into(&diff_x, Axis::X, &mut self.adj);
        div_adjoint_into(&diff_y, Axis::Y, &mut self.scratch);
        for (a, &s) in self.adj.as_mut_slice().iter_mut().zip(self.scratch.as_slice()) {
            *a += s;
        }
    }

    /// `d ← shrink(∇φ + b, g/λ)`, then `b ← b + ∇φ − d`.
    fn update_split(&mut self, axis: Axis) {
        grad_forward_into(&self.phi, axis, &mut self.scratch);
        let (d, b) = match axis {
            Axis::X => (&mut self.dx, &mut self.bx),
            Axis::Y => (&mut self.dy, &mut self.by),
        };
        let it = d.as_mut_slice().iter_mut().zip(b.as_mut_slice()).zip(self.scratch.as_slice()).zip(&self.tau);
        for (((dk, bk), &gk), &tau) in it {
            let v = gk + *bk;
            *dk = shrink_scalar(v, tau);
            *bk = v - *dk;
        }
    }
}

impl Stepper for SbrdState {
    fn step(&mut self, eta: &ScalarField) -> f64 {
        self.prev.clone_from(&self.phi);
        self.update_adjoint();
        gauss_seidel_sweep(&mut self.phi, &self.adj, eta, self.mu, self.lambda, self.alpha);
        self.update_split(Axis::X);
        self.update_split(Axis::Y);
        self.phi.max_abs_diff(&self.prev)
    }

    fn current(&self) -> &ScalarField {
        &self.phi
    }

    fn force(&self, problem: &Problem<'_>, gamma: f64) -> Result<ScalarField> {
        problem.force_from_mask(&super::threshold_mask(&self.phi, gamma))
    }

    fn into_current(self) -> ScalarField {
        self.phi
    }
}

pub(super) fn run(
    problem: &Problem<'_>,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<Segmentation> {
    let state = SbrdState::new(problem.initial_phi(), &problem.g, cfg);
    drive(state, problem, cfg, observer)
}
