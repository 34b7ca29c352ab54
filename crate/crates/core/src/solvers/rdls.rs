//! Reaction–diffusion level-set evolution.
//!
//! Each iteration takes an explicit reaction step driven by the weighted
//! curvature and the data force, then one explicit heat step that keeps the
//! level set regular without re-initialization.

use crate::error::Result;
use crate::field::ScalarField;
use crate::grid;
use crate::model;

use super::{drive, Iterate, Problem, Segmentation, SolverConfig, Stepper};

/// Level set and fixed inputs of an RDLS run.
///
/// The smoothed Heaviside and delta are centered on the threshold, i.e. they
/// are evaluated at `φ − γ`, so the zero crossing of the evolving front is
/// the same `{φ = γ}` contour that defines the output mask.
pub struct RdlsState<'a> {
    pub phi: ScalarField,
    g: &'a ScalarField,
    mu: f64,
    eps: f64,
    gamma: f64,
    reaction_step: f64,
    diffusion_step: f64,
}

impl<'a> RdlsState<'a> {
    pub fn new(phi: ScalarField, g: &'a ScalarField, cfg: &SolverConfig) -> Self {
        Self {
            phi,
            g,
            mu: cfg.model.mu,
            eps: cfg.model.eps,
            gamma: cfg.gamma,
            reaction_step: cfg.dt1 / cfg.xi,
            diffusion_step: cfg.dt2 * cfg.xi,
        }
    }

    /// One reaction step followed by one diffusion step.
    pub fn advance(&mut self, eta: &ScalarField) -> Result<f64> {
        let curvature = model::weighted_curvature(&self.phi, self.g)?;
        let mut half = self.phi.clone();
        for ((p, &k), &e) in half.as_mut_slice().iter_mut().zip(curvature.as_slice()).zip(eta.as_slice()) {
            let d = model::delta(*p - self.gamma, self.eps);
            *p += self.reaction_step * d * (k - self.mu * e);
        }
        let lap = grid::laplacian(&half)?;
        for (p, &l) in half.as_mut_slice().iter_mut().zip(lap.as_slice()) {
            *p += self.diffusion_step * l;
        }
        let change = half.max_abs_diff(&self.phi);
        self.phi = half;
        Ok(change)
    }
}

impl Stepper for RdlsState<'_> {
    fn step(&mut self, eta: &ScalarField) -> f64 {
        // Shapes were validated when the problem was built.
        self.advance(eta).expect("field of at least 3x3")
    }

    fn current(&self) -> &ScalarField {
        &self.phi
    }

    fn force(&self, problem: &Problem<'_>, gamma: f64) -> Result<ScalarField> {
        problem.force_from_level_set(&self.phi, gamma)
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
    let state = RdlsState::new(problem.initial_phi(), &problem.g, cfg);
    drive(state, problem, cfg, observer)
}
