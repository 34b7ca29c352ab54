use std::path::{Path, PathBuf};
use std::time::Instant;

use sarseg_core::metrics::{dice, pp_uniformity, RegionPartition};
use sarseg_core::solvers::{segment, SolverConfig, StopReason};
use sarseg_core::speckle::{make_phantom, Geometry, Phantom, SpeckleSpec};
use sarseg_core::{Mask, ScalarField};

use crate::error::CliResult;
use crate::imageio;

/// Phantom intensities inside and outside the shape.
pub const PHANTOM_C1: f64 = 200.0;
pub const PHANTOM_C2: f64 = 50.0;

/// A finished segmentation with its timing and scores.
#[derive(Clone, Debug)]
pub struct SegmentationResult {
    pub phi: ScalarField,
    pub mask: Mask,
    pub iterations: usize,
    pub stop: StopReason,
    pub wall_seconds: f64,
    /// Uniformity of `f` over the predicted partition.
    pub pp: f64,
    pub dice: Option<f64>,
}

/// pp of `f` over the two-region partition of `mask`; an empty region
/// means the split explains nothing and scores 0.
pub fn mask_pp(f: &ScalarField, mask: &Mask) -> CliResult<f64> {
    let n = mask.count();
    if n == 0 || n == mask.as_slice().len() {
        return Ok(if f.min() == f.max() { 1.0 } else { 0.0 });
    }
    Ok(pp_uniformity(f, &RegionPartition::from(mask))?)
}

pub fn run_segmentation(f: &ScalarField, truth: Option<&Mask>, cfg: &SolverConfig) -> CliResult<SegmentationResult> {
    let start = Instant::now();
    let seg = segment(f, cfg)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let pp = mask_pp(f, &seg.mask)?;
    let dice = truth.map(|t| dice(&seg.mask, t)).transpose()?;
    Ok(SegmentationResult {
        phi: seg.phi,
        mask: seg.mask,
        iterations: seg.iterations,
        stop: seg.stop,
        wall_seconds,
        pp,
        dice,
    })
}

/// The 8-bit phantom a PGM round trip would produce: gray levels rounded,
/// noisy image floored at 1 so it stays positive.
pub fn quantized_phantom(shape: (usize, usize), geometry: Geometry, speckle: SpeckleSpec) -> CliResult<Phantom> {
    let mut p = make_phantom(shape, PHANTOM_C1, PHANTOM_C2, geometry, Some(speckle))?;
    p.clean = imageio::quantize(&p.clean);
    p.noisy = imageio::quantize(&p.noisy).map(|v| v.max(1.0));
    Ok(p)
}

/// Writes `<prefix>_clean.pgm`, `<prefix>_noisy.pgm`, `<prefix>_mask.pgm`.
pub fn export_phantom(prefix: &Path, geometry: Geometry, size: usize, speckle: SpeckleSpec) -> CliResult<[PathBuf; 3]> {
    let p = quantized_phantom((size, size), geometry, speckle)?;
    let paths = [suffixed(prefix, "_clean.pgm"), suffixed(prefix, "_noisy.pgm"), suffixed(prefix, "_mask.pgm")];
    imageio::write_pgm(&paths[0], &imageio::field_to_gray(&p.clean), false)?;
    imageio::write_pgm(&paths[1], &imageio::field_to_gray(&p.noisy), false)?;
    imageio::write_pgm(&paths[2], &imageio::mask_to_gray(&p.mask), false)?;
    Ok(paths)
}

/// `prefix` with `suffix` appended to its file name.
pub fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
