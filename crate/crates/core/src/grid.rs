//! Discrete differential and filtering operators on [`ScalarField`]s.
//!
//! All operators use homogeneous Neumann boundaries: forward differences
//! vanish on the last sample of each line, and the Laplacian and the
//! convolutions reflect the field about its edges (`u[-1] = u[0]`). With
//! that choice [`div_adjoint`] is the exact transpose of [`grad_forward`]
//! and `laplacian(u) = -(∇ᵀ_x ∇_x + ∇ᵀ_y ∇_y) u`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::field::{Axis, ScalarField};

/// Half-width of the 15×15 ISEF window used by the edge detector.
pub const ISEF_RADIUS: usize = 7;

fn ensure_len(u: &ScalarField, axis: Axis, min: usize, op: &str) -> Result<()> {
    let n = match axis {
        Axis::X => u.width(),
        Axis::Y => u.height(),
    };
    if n < min {
        return Err(invalid(format!(
            "{op} needs at least {min} samples along {axis:?}, field has {n}"
        )));
    }
    Ok(())
}

/// Forward difference `u[k+1] − u[k]` along `axis`, zero on the last sample.
pub fn grad_forward(u: &ScalarField, axis: Axis) -> Result<ScalarField> {
    ensure_len(u, axis, 2, "grad_forward")?;
    let mut out = ScalarField::zeros(u.height(), u.width());
    grad_forward_into(u, axis, &mut out);
    Ok(out)
}

/// Transpose of [`grad_forward`]: `⟨∇u, p⟩ = ⟨u, ∇ᵀp⟩`.
///
/// On each line of length `n` this is `−p[0]` at the first sample,
/// `p[k−1] − p[k]` inside and `p[n−2]` at the last sample, i.e. minus the
/// backward-difference divergence.
pub fn div_adjoint(p: &ScalarField, axis: Axis) -> Result<ScalarField> {
    ensure_len(p, axis, 2, "div_adjoint")?;
    let mut out = ScalarField::zeros(p.height(), p.width());
    div_adjoint_into(p, axis, &mut out);
    Ok(out)
}

pub(crate) fn grad_forward_into(u: &ScalarField, axis: Axis, out: &mut ScalarField) {
    let (h, w) = u.shape();
    let src = u.as_slice();
    let dst = out.as_mut_slice();
    match axis {
        Axis::X => {
            for i in 0..h {
                let row = &src[i * w..(i + 1) * w];
                let orow = &mut dst[i * w..(i + 1) * w];
                for j in 0..w - 1 {
                    orow[j] = row[j + 1] - row[j];
                }
                orow[w - 1] = 0.0;
            }
        }
        Axis::Y => {
            for i in 0..h - 1 {
                for j in 0..w {
                    dst[i * w + j] = src[(i + 1) * w + j] - src[i * w + j];
                }
            }
            dst[(h - 1) * w..].fill(0.0);
        }
    }
}

pub(crate) fn div_adjoint_into(p: &ScalarField, axis: Axis, out: &mut ScalarField) {
    let (h, w) = p.shape();
    let src = p.as_slice();
    let dst = out.as_mut_slice();
    match axis {
        Axis::X => {
            for i in 0..h {
                let row = &src[i * w..(i + 1) * w];
                let orow = &mut dst[i * w..(i + 1) * w];
                orow[0] = -row[0];
                for j in 1..w - 1 {
                    orow[j] = row[j - 1] - row[j];
                }
                orow[w - 1] = row[w - 2];
            }
        }
        Axis::Y => {
            for j in 0..w {
                dst[j] = -src[j];
            }
            for i in 1..h - 1 {
                for j in 0..w {
                    dst[i * w + j] = src[(i - 1) * w + j] - src[i * w + j];
                }
            }
            for j in 0..w {
                dst[(h - 1) * w + j] = src[(h - 2) * w + j];
            }
        }
    }
}

/// Five-point Laplacian with reflected (Neumann) boundaries.
pub fn laplacian(u: &ScalarField) -> Result<ScalarField> {
    if u.height() < 3 || u.width() < 3 {
        return Err(invalid("laplacian needs a field of at least 3x3"));
    }
    let (h, w) = u.shape();
    let s = u.as_slice();
    let mut out = ScalarField::zeros(h, w);
    let d = out.as_mut_slice();
    for i in 0..h {
        let up = if i == 0 { 0 } else { i - 1 };
        let down = if i + 1 == h { i } else { i + 1 };
        for j in 0..w {
            let left = if j == 0 { 0 } else { j - 1 };
            let right = if j + 1 == w { j } else { j + 1 };
            let c = s[i * w + j];
            d[i * w + j] =
                s[up * w + j] + s[down * w + j] + s[i * w + left] + s[i * w + right] - 4.0 * c;
        }
    }
    Ok(out)
}

/// Shape of a smoothing kernel's 1-D profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// `exp(−x²/2σ²)`
    Gaussian,
    /// Infinite symmetric exponential filter, `exp(−|x|/σ)`.
    Isef,
}

/// A separable, truncated, normalized smoothing kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub sigma: f64,
    /// Half-width of the truncation window; the window has `2·radius + 1` taps.
    pub radius: usize,
}

impl KernelSpec {
    /// Gaussian truncated at `⌈2σ⌉`.
    pub fn gaussian(sigma: f64) -> Self {
        Self { kind: KernelKind::Gaussian, sigma, radius: libm::ceil(2.0 * sigma) as usize }
    }

    /// ISEF on the fixed 15×15 window.
    pub fn isef(sigma: f64) -> Self {
        Self { kind: KernelKind::Isef, sigma, radius: ISEF_RADIUS }
    }

    /// Normalized 1-D weights for offsets `−radius..=radius`.
    pub fn weights(&self) -> Result<Vec<f64>> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid(format!("kernel sigma must be positive, got {}", self.sigma)));
        }
        let r = self.radius as isize;
        let mut w: Vec<f64> = (-r..=r)
            .map(|d| {
                let x = d as f64;
                match self.kind {
                    KernelKind::Gaussian => libm::exp(-x * x / (2.0 * self.sigma * self.sigma)),
                    KernelKind::Isef => libm::exp(-x.abs() / self.sigma),
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total;
        }
        Ok(w)
    }
}

/// A [`KernelSpec`] with its weights computed once, for repeated use.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    spec: KernelSpec,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        let weights = spec.weights()?;
        Ok(Self { spec, weights })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Separable convolution with half-sample reflection at the borders.
    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        let (h, w) = u.shape();
        let r = self.spec.radius;
        if r >= h.min(w) {
            return Err(invalid(format!(
                "kernel radius {r} must be smaller than the field's smaller side {}",
                h.min(w)
            )));
        }
        if r == 0 {
            return Ok(u.clone());
        }
        let mut tmp = ScalarField::zeros(h, w);
        let mut out = ScalarField::zeros(h, w);
        let col_idx = reflected_indices(w, r);
        let row_idx = reflected_indices(h, r);
        let src = u.as_slice();
        let wts = &self.weights;

        // Horizontal pass into `tmp`, working on a reflected copy of each row.
        let mut line = Vec::with_capacity(w + 2 * r);
        {
            let t = tmp.as_mut_slice();
            for i in 0..h {
                let row = &src[i * w..(i + 1) * w];
                line.clear();
                line.extend(col_idx.iter().map(|&k| row[k]));
                let trow = &mut t[i * w..(i + 1) * w];
                for (j, o) in trow.iter_mut().enumerate() {
                    *o = dot(&line[j..j + 2 * r + 1], wts);
                }
            }
        }
        // Vertical pass: accumulate whole rows for cache-friendly access.
        let t = tmp.as_slice();
        let o = out.as_mut_slice();
        for i in 0..h {
            let orow = &mut o[i * w..(i + 1) * w];
            for (k, &wk) in wts.iter().enumerate() {
                let src_row = row_idx[i + k];
                let srow = &t[src_row * w..(src_row + 1) * w];
                for (dst, &s) in orow.iter_mut().zip(srow) {
                    *dst += wk * s;
                }
            }
        }
        Ok(out)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Source index for each position of a line padded by `r` on both sides.
fn reflected_indices(n: usize, r: usize) -> Vec<usize> {
    (0..n + 2 * r)
        .map(|p| {
            let k = p as isize - r as isize;
            if k < 0 {
                (-k - 1) as usize
            } else if k as usize >= n {
                2 * n - 1 - k as usize
            } else {
                k as usize
            }
        })
        .collect()
}

/// Separable 2-D convolution of `u` with the normalized kernel `k`.
pub fn convolve(u: &ScalarField, k: &KernelSpec) -> Result<ScalarField> {
    Kernel::new(*k)?.apply(u)
}

/// ISEF smoothing on the 15×15 window.
pub fn isef_smooth(u: &ScalarField, sigma: f64) -> Result<ScalarField> {
    convolve(u, &KernelSpec::isef(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lcg_field(h: usize, w: usize, seed: u64) -> ScalarField {
        let mut s = seed;
        ScalarField::from_fn(h, w, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn grad_of_constant_is_zero() {
        let u = ScalarField::filled(4, 5, 3.5);
        for axis in [Axis::X, Axis::Y] {
            assert!(grad_forward(&u, axis).unwrap().as_slice().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn grad_of_column_ramp() {
        let u = ScalarField::from_fn(3, 4, |_, j| j as f64);
        let g = grad_forward(&u, Axis::X).unwrap();
        for i in 0..3 {
            assert_eq!(g.get(i, 3), 0.0);
            for j in 0..3 {
                assert_eq!(g.get(i, j), 1.0);
            }
        }
    }

    #[test]
    fn grad_matches_brute_force() {
        let u = lcg_field(3, 3, 11);
        let gx = grad_forward(&u, Axis::X).unwrap();
        let gy = grad_forward(&u, Axis::Y).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let ex = if j < 2 { u.get(i, j + 1) - u.get(i, j) } else { 0.0 };
                let ey = if i < 2 { u.get(i + 1, j) - u.get(i, j) } else { 0.0 };
                assert_eq!(gx.get(i, j), ex);
                assert_eq!(gy.get(i, j), ey);
            }
        }
    }

    #[test]
    fn grad_rejects_single_sample_axis() {
        let u = ScalarField::zeros(1, 4);
        assert!(matches!(grad_forward(&u, Axis::Y), Err(crate::Error::InvalidInput(_))));
        assert!(grad_forward(&u, Axis::X).is_ok());
    }

    #[test]
    fn adjoint_of_zero_is_zero() {
        let p = ScalarField::zeros(4, 4);
        assert!(div_adjoint(&p, Axis::X).unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_of_constant_one() {
        let p = ScalarField::filled(4, 4, 1.0);
        let d = div_adjoint(&p, Axis::X).unwrap();
        for i in 0..4 {
            assert_eq!(d.get(i, 0), -1.0);
            assert_eq!(d.get(i, 1), 0.0);
            assert_eq!(d.get(i, 2), 0.0);
            assert_eq!(d.get(i, 3), 1.0);
        }
        let d = div_adjoint(&p, Axis::Y).unwrap();
        assert_eq!(d.get(0, 2), -1.0);
        assert_eq!(d.get(3, 2), 1.0);
        assert_eq!(d.get(1, 2), 0.0);
    }

    #[test]
    fn adjoint_identity_4x4() {
        let u = lcg_field(4, 4, 1);
        let p = lcg_field(4, 4, 2);
        for axis in [Axis::X, Axis::Y] {
            let lhs = grad_forward(&u, axis).unwrap().dot(&p);
            let rhs = u.dot(&div_adjoint(&p, axis).unwrap());
            assert!((lhs - rhs).abs() <= 1e-12, "{axis:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn laplacian_cases() {
        let c = ScalarField::filled(5, 5, 2.0);
        assert!(laplacian(&c).unwrap().as_slice().iter().all(|&v| v == 0.0));

        let q = ScalarField::from_fn(6, 5, |i, _| (i * i) as f64);
        let l = laplacian(&q).unwrap();
        for i in 1..5 {
            for j in 0..5 {
                assert_eq!(l.get(i, j), 2.0);
            }
        }
        assert!(laplacian(&ScalarField::zeros(2, 5)).is_err());
    }

    #[test]
    fn laplacian_matches_stencil_oracle() {
        let u = lcg_field(3, 3, 5);
        let l = laplacian(&u).unwrap();
        let at = |i: isize, j: isize| {
            let i = i.clamp(0, 2) as usize;
            let j = j.clamp(0, 2) as usize;
            u.get(i, j)
        };
        for i in 0..3isize {
            for j in 0..3isize {
                let e = at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * at(i, j);
                assert!((l.get(i as usize, j as usize) - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_is_minus_grad_adjoint_grad() {
        let u = lcg_field(7, 6, 9);
        let l = laplacian(&u).unwrap();
        let mut expect = ScalarField::zeros(7, 6);
        for axis in [Axis::X, Axis::Y] {
            let t = div_adjoint(&grad_forward(&u, axis).unwrap(), axis).unwrap();
            expect = expect.zip_map(&t, |a, b| a - b);
        }
        assert!(l.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn kernel_weights_sum_to_one() {
        for spec in [KernelSpec::gaussian(0.7), KernelSpec::gaussian(3.0), KernelSpec::isef(15.0), KernelSpec::isef(0.5)] {
            let w = spec.weights().unwrap();
            assert_eq!(w.len(), 2 * spec.radius + 1);
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(w.iter().all(|&v| v >= 0.0));
        }
        assert_eq!(KernelSpec::gaussian(3.0).radius, 6);
        assert_eq!(KernelSpec::gaussian(1.2).radius, 3);
    }

    #[test]
    fn constant_field_survives_convolution() {
        let u = ScalarField::filled(9, 10, 4.25);
        for spec in [KernelSpec::gaussian(1.5), KernelSpec::isef(2.0)] {
            let out = convolve(&u, &spec).unwrap();
            assert!(out.as_slice().iter().all(|&v| (v - 4.25).abs() < 1e-12));
        }
    }

    #[test]
    fn zero_radius_is_identity() {
        let u = lcg_field(4, 6, 3);
        let spec = KernelSpec { kind: KernelKind::Gaussian, sigma: 1.0, radius: 0 };
        assert_eq!(convolve(&u, &spec).unwrap(), u);
    }

    #[test]
    fn oversized_radius_is_rejected() {
        let u = ScalarField::zeros(7, 20);
        assert!(isef_smooth(&u, 2.0).is_err());
        assert!(isef_smooth(&ScalarField::zeros(8, 8), 2.0).is_ok());
    }

    #[test]
    fn impulse_response_is_outer_product() {
        let mut u = ScalarField::zeros(5, 5);
        u.set(2, 2, 1.0);
        let spec = KernelSpec { kind: KernelKind::Gaussian, sigma: 1.0, radius: 2 };
        let out = convolve(&u, &spec).unwrap();
        // Dense 2-D sum over the unnormalized profile, normalized by its total.
        let mut dense = vec![0.0; 25];
        let mut total = 0.0;
        for a in -2i32..=2 {
            for b in -2i32..=2 {
                total += libm::exp(-((a * a + b * b) as f64) / 2.0);
            }
        }
        for i in 0..5i32 {
            for j in 0..5i32 {
                let (a, b) = (i - 2, j - 2);
                dense[(i * 5 + j) as usize] = libm::exp(-((a * a + b * b) as f64) / 2.0) / total;
            }
        }
        for (o, d) in out.as_slice().iter().zip(&dense) {
            assert!((o - d).abs() < 1e-14);
        }
    }

    #[test]
    fn isef_profile() {
        let sigma = 2.5;
        let w = KernelSpec::isef(sigma).weights().unwrap();
        let c = ISEF_RADIUS;
        for d in 1..=ISEF_RADIUS {
            assert_eq!(w[c - d], w[c + d]);
        }
        assert!((w[c] / w[c + 1] - libm::exp(1.0 / sigma)).abs() < 1e-12);

        // A single-row impulse smoothed horizontally keeps the same ratio.
        let mut u = ScalarField::zeros(15, 15);
        for i in 0..15 {
            u.set(i, 7, 1.0);
        }
        let out = isef_smooth(&u, sigma).unwrap();
        assert!((out.get(7, 7) / out.get(7, 8) - libm::exp(1.0 / sigma)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(KernelSpec::gaussian(0.0).weights().is_err());
        assert!(KernelSpec::isef(-1.0).weights().is_err());
    }
}
