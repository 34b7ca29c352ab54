//! Benchmark sweeps over (image, algorithm) cells.

use std::io::Write;
use std::path::{Path, PathBuf};

use sarseg_core::solvers::{Algorithm, SolverConfig};
use sarseg_core::speckle::{Geometry, SpeckleSpec};
use sarseg_core::{Mask, ScalarField};

use crate::config::params_digest;
use crate::error::{CliError, CliResult};
use crate::imageio;
use crate::run::{quantized_phantom, run_segmentation};

pub const CSV_HEADER: [&str; 7] =
    ["image_id", "algorithm", "iterations", "wall_seconds_median", "pp", "dice", "params_digest"];

/// One benchmark cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub image_id: String,
    pub algorithm: String,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub pp: f64,
    pub dice: Option<f64>,
    pub params_digest: String,
}

pub struct BenchImage {
    pub id: String,
    pub f: ScalarField,
    pub truth: Option<Mask>,
}

/// `n` phantoms cycling through the geometries; image `k` uses seed `seed + k`.
pub fn synthetic_suite(n: usize, size: usize, looks: u32, seed: u64) -> CliResult<Vec<BenchImage>> {
    (0..n)
        .map(|k| {
            let geometry = Geometry::ALL[k % Geometry::ALL.len()];
            let p = quantized_phantom((size, size), geometry, SpeckleSpec::new(looks, seed + k as u64))?;
            Ok(BenchImage { id: format!("synthetic{k}_{}", geometry.name()), f: p.noisy, truth: Some(p.mask) })
        })
        .collect()
}

/// Manifest lines are `image_id path [truth_path]`; `#` starts a comment.
/// Relative paths are taken from the manifest's directory.
pub fn read_manifest(path: &Path) -> CliResult<Vec<BenchImage>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
    };
    let mut images = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(CliError::Usage(format!(
                "{}:{}: expected `image_id path [truth_path]`",
                path.display(),
                n + 1
            )));
        }
        let f = imageio::read_image(&resolve(fields[1]))?;
        let truth = fields.get(2).map(|t| imageio::read_mask(&resolve(t))).transpose()?;
        images.push(BenchImage { id: fields[0].to_string(), f, truth });
    }
    if images.is_empty() {
        return Err(CliError::Usage(format!("manifest {} lists no images", path.display())));
    }
    Ok(images)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) }
}

/// Runs every cell `repeat` times in image-major order. Results other
/// than wall time come from the first repeat; solvers are deterministic.
pub fn benchmark(
    images: &[BenchImage],
    configs: &[SolverConfig],
    repeat: usize,
) -> CliResult<Vec<RunRecord>> {
    if images.is_empty() {
        return Err(CliError::Usage("no images to benchmark".into()));
    }
    if repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(images.len() * configs.len());
    for img in images {
        for cfg in configs {
            let first = run_segmentation(&img.f, img.truth.as_ref(), cfg)?;
            let mut times = vec![first.wall_seconds];
            for _ in 1..repeat {
                times.push(run_segmentation(&img.f, img.truth.as_ref(), cfg)?.wall_seconds);
            }
            records.push(RunRecord {
                image_id: img.id.clone(),
                algorithm: cfg.algorithm.name().to_string(),
                iterations: first.iterations,
                wall_seconds: median(&mut times),
                pp: first.pp,
                dice: first.dice,
                params_digest: params_digest(cfg),
            });
        }
    }
    Ok(records)
}

pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.image_id.clone(),
            r.algorithm.clone(),
            r.iterations.to_string(),
            format!("{:.6}", r.wall_seconds),
            format!("{:.6}", r.pp),
            r.dice.map(|d| format!("{d:.6}")).unwrap_or_default(),
            r.params_digest.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a comma-separated algorithm list.
pub fn parse_algorithms(list: &str) -> CliResult<Vec<Algorithm>> {
    list.split(',')
        .map(|s| Algorithm::from_name(s.trim()).ok_or_else(|| CliError::Usage(format!("unknown algorithm `{s}`"))))
        .collect()
}
