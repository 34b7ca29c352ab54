//! Terms of the locally statistical active-contour energy.
//!
//! The fidelity is the I-divergence `u − f·log u` of the Gamma speckle model
//! with `u` piecewise constant, `u = C₁H(φ) + C₂(1 − H(φ))`, and `C₁`, `C₂`
//! replaced by kernel-weighted local means. The edge-weighted curvature and
//! the resulting data force `η` drive every solver in [`crate::solvers`].

use core::f64::consts::PI;

use alloc::format;

use crate::error::{invalid, Result};
use crate::field::{Axis, ScalarField};
use crate::grid::{self, Kernel, KernelSpec};

/// Lower bound applied to the kernel-weighted region mass in [`local_means`].
pub const MEANS_DENOMINATOR_FLOOR: f64 = 1e-8;

/// Regularization of `|∇φ|` in [`weighted_curvature`].
pub const CURVATURE_EPS: f64 = 1e-8;

/// Form of the region fitting term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DataTerm {
    /// `C − f·log C`, consistent with the I-divergence fidelity and with the
    /// weighted-mean update of `C₁`, `C₂`.
    #[default]
    Log,
    /// `C − f·C`, kept for comparison.
    Linear,
}

impl DataTerm {
    pub fn name(self) -> &'static str {
        match self {
            DataTerm::Log => "log",
            DataTerm::Linear => "linear",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "log" => Some(DataTerm::Log),
            "linear" => Some(DataTerm::Linear),
            _ => None,
        }
    }
}

/// Model weights shared by all four solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Weight μ of the data term.
    pub mu: f64,
    /// Edge-detector sensitivity β.
    pub beta: f64,
    /// Width ε of the smoothed Heaviside.
    pub eps: f64,
    /// Scale σ of the ISEF pre-smoothing in the edge detector.
    pub sigma: f64,
    /// Scale of the Gaussian window `K_σ` used for the local means.
    pub kernel_sigma: f64,
    pub data_term: DataTerm,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { mu: 0.15, beta: 20.0, eps: 1.0, sigma: 15.0, kernel_sigma: 3.0, data_term: DataTerm::Log }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mu", self.mu),
            ("beta", self.beta),
            ("eps", self.eps),
            ("sigma", self.sigma),
            ("kernel_sigma", self.kernel_sigma),
        ];
        for (name, v) in named {
            if !(v > 0.0) || !v.is_finite() {
                return Err(crate::Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// `H_ε(φ) = ½[1 + (2/π)·atan(φ/ε)]`, a smooth step with values in (0, 1).
#[inline]
pub fn heaviside(phi: f64, eps: f64) -> f64 {
    0.5 * (1.0 + (2.0 / PI) * libm::atan(phi / eps))
}

/// `δ_ε(φ) = (1/π)·ε/(ε² + φ²)`, the derivative of [`heaviside`].
#[inline]
pub fn delta(phi: f64, eps: f64) -> f64 {
    eps / (PI * (eps * eps + phi * phi))
}

pub fn heaviside_eps(phi: &ScalarField, eps: f64) -> ScalarField {
    phi.map(|v| heaviside(v, eps))
}

pub fn delta_eps(phi: &ScalarField, eps: f64) -> ScalarField {
    phi.map(|v| delta(v, eps))
}

/// Edge indicator `g = 1/(1 + β|∇(f ∗ ISEF_σ)|²)`, with values in (0, 1].
pub fn edge_detector(f: &ScalarField, beta: f64, sigma: f64) -> Result<ScalarField> {
    if !f.all_finite() {
        return Err(invalid("edge detector input has non-finite values"));
    }
    let smooth = grid::isef_smooth(f, sigma)?;
    let gx = grid::grad_forward(&smooth, Axis::X)?;
    let gy = grid::grad_forward(&smooth, Axis::Y)?;
    Ok(gx.zip_map(&gy, |a, b| 1.0 / (1.0 + beta * (a * a + b * b))))
}

/// Local region intensities `C₁`, `C₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMeans {
    pub c1: ScalarField,
    pub c2: ScalarField,
    /// Pixels where the region-1 (resp. region-2) weight fell below
    /// [`MEANS_DENOMINATOR_FLOOR`], i.e. no pixel of that region lies inside
    /// the window.
    pub degenerate: (usize, usize),
}

/// Kernel-weighted region means
/// `C₁ = K∗(h·f) / K∗h` and `C₂ = K∗((1−h)·f) / K∗(1−h)`.
///
/// `h` is the (smoothed or hard) indicator of region 1. Denominators are
/// clamped at [`MEANS_DENOMINATOR_FLOOR`]; clamped pixels are counted in
/// [`LocalMeans::degenerate`].
pub fn local_means(f: &ScalarField, h_eps: &ScalarField, kernel_sigma: f64) -> Result<LocalMeans> {
    let kernel = Kernel::new(KernelSpec::gaussian(kernel_sigma))?;
    local_means_with(&kernel, f, h_eps)
}

pub(crate) fn local_means_with(kernel: &Kernel, f: &ScalarField, h: &ScalarField) -> Result<LocalMeans> {
    f.ensure_same_shape(h, "local_means indicator")?;
    let hf = h.zip_map(f, |a, b| a * b);
    let num1 = kernel.apply(&hf)?;
    let den1 = kernel.apply(h)?;
    let num2 = kernel.apply(&f.zip_map(&hf, |a, b| a - b))?;
    let den2 = kernel.apply(&h.map(|v| 1.0 - v))?;
    let mut degenerate = (0, 0);
    let c1 = num1.zip_map(&den1, |n, d| {
        if d < MEANS_DENOMINATOR_FLOOR {
            degenerate.0 += 1;
        }
        n / d.max(MEANS_DENOMINATOR_FLOOR)
    });
    let c2 = num2.zip_map(&den2, |n, d| {
        if d < MEANS_DENOMINATOR_FLOOR {
            degenerate.1 += 1;
        }
        n / d.max(MEANS_DENOMINATOR_FLOOR)
    });
    Ok(LocalMeans { c1, c2, degenerate })
}

/// Data force `η` of the level-set flow.
///
/// With [`DataTerm::Log`]:
/// `η(x) = [K∗C₁ − K∗C₂](x) − f(x)·[K∗log C₁ − K∗log C₂](x)`;
/// with [`DataTerm::Linear`] the logarithms are dropped. Negative `η` pulls a
/// pixel into region 1.
pub fn data_force(
    f: &ScalarField,
    means: &LocalMeans,
    kernel_sigma: f64,
    data_term: DataTerm,
) -> Result<ScalarField> {
    let kernel = Kernel::new(KernelSpec::gaussian(kernel_sigma))?;
    data_force_with(&kernel, f, means, data_term)
}

pub(crate) fn data_force_with(
    kernel: &Kernel,
    f: &ScalarField,
    means: &LocalMeans,
    data_term: DataTerm,
) -> Result<ScalarField> {
    f.ensure_same_shape(&means.c1, "data_force C1")?;
    f.ensure_same_shape(&means.c2, "data_force C2")?;
    let diff = kernel.apply(&means.c1.zip_map(&means.c2, |a, b| a - b))?;
    let weight = match data_term {
        DataTerm::Log => {
            if means.c1.min() <= 0.0 || means.c2.min() <= 0.0 {
                return Err(invalid("log data term needs strictly positive region means"));
            }
            kernel.apply(&means.c1.zip_map(&means.c2, |a, b| libm::log(a) - libm::log(b)))?
        }
        DataTerm::Linear => diff.clone(),
    };
    let mut eta = diff;
    for ((e, &w), &fx) in eta.as_mut_slice().iter_mut().zip(weight.as_slice()).zip(f.as_slice()) {
        *e -= fx * w;
    }
    Ok(eta)
}

/// `div(g ∇φ / |∇φ|)` with forward differences and the adjoint divergence.
pub fn weighted_curvature(phi: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    phi.ensure_same_shape(g, "weighted_curvature edge map")?;
    let mut px = grid::grad_forward(phi, Axis::X)?;
    let mut py = grid::grad_forward(phi, Axis::Y)?;
    for ((x, y), &gw) in px.as_mut_slice().iter_mut().zip(py.as_mut_slice()).zip(g.as_slice()) {
        let norm = libm::sqrt(*x * *x + *y * *y + CURVATURE_EPS * CURVATURE_EPS);
        *x *= gw / norm;
        *y *= gw / norm;
    }
    let dx = grid::div_adjoint(&px, Axis::X)?;
    let dy = grid::div_adjoint(&py, Axis::Y)?;
    Ok(dx.zip_map(&dy, |a, b| -(a + b)))
}
