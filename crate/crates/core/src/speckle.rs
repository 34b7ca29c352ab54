//! Multiplicative Gamma speckle and synthetic two-phase phantoms.

use alloc::format;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid, Result};
use crate::field::{Mask, ScalarField};

/// Speckle parameters: `looks` is the equivalent number of looks `L`.
///
/// Each noise sample is `Gamma(L, 1/L)`, so it has mean 1 and variance 1/L.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpeckleSpec {
    pub looks: u32,
    pub seed: u64,
}

impl SpeckleSpec {
    pub fn new(looks: u32, seed: u64) -> Self {
        Self { looks, seed }
    }
}

/// Uniform sample in the open interval (0, 1).
#[inline]
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// I.i.d. `Gamma(L, 1/L)` samples, drawn as the mean of `L` unit exponentials.
///
/// The stream is a pure function of `spec.seed`; every sample is strictly
/// positive.
pub fn gamma_speckle(shape: (usize, usize), spec: SpeckleSpec) -> Result<ScalarField> {
    let (h, w) = shape;
    if spec.looks == 0 {
        return Err(invalid("number of looks must be at least 1"));
    }
    if h == 0 || w == 0 {
        return Err(invalid("speckle field dimensions must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let scale = 1.0 / spec.looks as f64;
    Ok(ScalarField::from_fn(h, w, |_, _| {
        let mut acc = 0.0;
        for _ in 0..spec.looks {
            acc -= libm::log(open_unit(&mut rng));
        }
        acc * scale
    }))
}

/// Foreground shape of a synthetic phantom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Centered disk of radius `0.3·min(h, w)`.
    Disk,
    /// Two disjoint disks of radius `0.18·min(h, w)` side by side.
    TwoDisks,
    /// Centered ring with radii `0.18·min(h, w)` and `0.35·min(h, w)`; it has
    /// both an exterior and an interior boundary.
    Annulus,
    /// Axis-aligned rectangle covering the central half of the rows and 60%
    /// of the columns.
    Rectangle,
}

impl Geometry {
    pub const ALL: [Geometry; 4] =
        [Geometry::Disk, Geometry::TwoDisks, Geometry::Annulus, Geometry::Rectangle];

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Disk => "disk",
            Geometry::TwoDisks => "two_disks",
            Geometry::Annulus => "annulus",
            Geometry::Rectangle => "rectangle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == name)
    }

    /// Rasterizes the shape: a pixel belongs to it when its center does.
    pub fn rasterize(self, shape: (usize, usize)) -> Mask {
        let (h, w) = shape;
        let (hf, wf) = (h as f64, w as f64);
        let m = hf.min(wf);
        let (ci, cj) = (hf / 2.0, wf / 2.0);
        let inside_disk = |y: f64, x: f64, cy: f64, cx: f64, r: f64| {
            let (dy, dx) = (y - cy, x - cx);
            dy * dy + dx * dx <= r * r
        };
        Mask::from_fn(h, w, |i, j| {
            let (y, x) = (i as f64 + 0.5, j as f64 + 0.5);
            match self {
                Geometry::Disk => inside_disk(y, x, ci, cj, 0.3 * m),
                Geometry::TwoDisks => {
                    let r = 0.18 * m;
                    inside_disk(y, x, ci, 0.28 * wf, r) || inside_disk(y, x, ci, 0.72 * wf, r)
                }
                Geometry::Annulus => {
                    inside_disk(y, x, ci, cj, 0.35 * m) && !inside_disk(y, x, ci, cj, 0.18 * m)
                }
                Geometry::Rectangle => {
                    y >= 0.25 * hf && y < 0.75 * hf && x >= 0.2 * wf && x < 0.8 * wf
                }
            }
        })
    }
}

impl core::fmt::Display for Geometry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// A piecewise-constant two-phase test image with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Phantom {
    /// `c1` on the foreground, `c2` elsewhere.
    pub clean: ScalarField,
    /// Ground-truth foreground Ω₁.
    pub mask: Mask,
    /// `clean ⊙ n` with Gamma speckle `n`, or `clean` itself when no
    /// speckle was requested.
    pub noisy: ScalarField,
}

/// Builds a phantom with intensity `c1` inside `geometry` and `c2` outside.
///
/// `speckle = None` is the noiseless (infinite-looks) limit.
pub fn make_phantom(
    shape: (usize, usize),
    c1: f64,
    c2: f64,
    geometry: Geometry,
    speckle: Option<SpeckleSpec>,
) -> Result<Phantom> {
    if !(c1 > 0.0 && c2 > 0.0) || !c1.is_finite() || !c2.is_finite() {
        return Err(invalid(format!("phantom intensities must be positive, got {c1} and {c2}")));
    }
    if c1 == c2 {
        return Err(invalid("phantom intensities must differ"));
    }
    let (h, w) = shape;
    if h == 0 || w == 0 {
        return Err(invalid("phantom dimensions must be positive"));
    }
    let mask = geometry.rasterize(shape);
    let area = mask.count();
    if area == 0 || area == h * w {
        return Err(invalid(format!("{geometry} geometry is degenerate on a {h}x{w} grid")));
    }
    let clean = ScalarField::from_fn(h, w, |i, j| if mask.get(i, j) { c1 } else { c2 });
    let noisy = match speckle {
        Some(spec) => clean.zip_map(&gamma_speckle(shape, spec)?, |u, n| u * n),
        None => clean.clone(),
    };
    Ok(Phantom { clean, mask, noisy })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(field: &ScalarField) -> (f64, f64) {
        let n = field.len() as f64;
        let mean = field.sum() / n;
        let var = field.as_slice().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn zero_looks_rejected() {
        assert!(matches!(
            gamma_speckle((4, 4), SpeckleSpec::new(0, 1)),
            Err(crate::Error::InvalidInput(_))
        ));
    }

    #[test]
    fn four_look_moments() {
        let n = gamma_speckle((1000, 1000), SpeckleSpec::new(4, 42)).unwrap();
        let (mean, var) = moments(&n);
        assert!((mean - 1.0).abs() <= 0.01, "mean {mean}");
        assert!((var - 0.25).abs() <= 0.05 * 0.25, "variance {var}");
        assert!(n.min() > 0.0);
    }

    #[test]
    fn seeded_streams_are_reproducible() {
        let a = gamma_speckle((16, 9), SpeckleSpec::new(3, 7)).unwrap();
        let b = gamma_speckle((16, 9), SpeckleSpec::new(3, 7)).unwrap();
        let c = gamma_speckle((16, 9), SpeckleSpec::new(3, 8)).unwrap();
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_phantom_is_clean() {
        let p = make_phantom((64, 64), 200.0, 50.0, Geometry::Disk, None).unwrap();
        assert_eq!(p.noisy, p.clean);
        let mut values: alloc::vec::Vec<f64> = p.clean.as_slice().to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        assert_eq!(values, [50.0, 200.0]);
    }

    #[test]
    fn disk_area_within_perimeter_band() {
        for size in [32usize, 64, 101, 128] {
            let mask = Geometry::Disk.rasterize((size, size));
            let r = 0.3 * size as f64;
            let area = core::f64::consts::PI * r * r;
            let perimeter = 2.0 * core::f64::consts::PI * r;
            assert!((mask.count() as f64 - area).abs() <= perimeter, "size {size}");
        }
    }

    #[test]
    fn annulus_has_two_contours() {
        let p = make_phantom((128, 128), 200.0, 50.0, Geometry::Annulus, None).unwrap();
        assert_eq!(p.mask.count_contours(), 2);
        let p = make_phantom((128, 128), 200.0, 50.0, Geometry::TwoDisks, None).unwrap();
        assert_eq!(p.mask.count_contours(), 2);
        let p = make_phantom((128, 128), 200.0, 50.0, Geometry::Disk, None).unwrap();
        assert_eq!(p.mask.count_contours(), 1);
    }

    #[test]
    fn invalid_phantoms() {
        assert!(make_phantom((32, 32), 100.0, 100.0, Geometry::Disk, None).is_err());
        assert!(make_phantom((32, 32), -1.0, 100.0, Geometry::Disk, None).is_err());
        // Too small for the disk to cover any pixel center.
        assert!(make_phantom((1, 1), 200.0, 50.0, Geometry::Disk, None).is_err());
    }

    #[test]
    fn noisy_is_clean_times_speckle() {
        let spec = SpeckleSpec::new(4, 3);
        let p = make_phantom((20, 24), 200.0, 50.0, Geometry::Rectangle, Some(spec)).unwrap();
        let n = gamma_speckle((20, 24), spec).unwrap();
        for ((&y, &u), &s) in p.noisy.as_slice().iter().zip(p.clean.as_slice()).zip(n.as_slice()) {
            assert_eq!(y, u * s);
            assert!(y > 0.0);
        }
    }

    #[test]
    fn geometry_names_round_trip() {
        for g in Geometry::ALL {
            assert_eq!(Geometry::from_name(g.name()), Some(g));
        }
        assert_eq!(Geometry::from_name("hexagon"), None);
    }
}
