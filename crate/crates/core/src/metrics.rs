//! Segmentation quality measures.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::field::{Mask, ScalarField};

/// A labelling of every pixel with a region index in `0..regions`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionPartition {
    height: usize,
    width: usize,
    labels: Vec<u32>,
    regions: u32,
}

impl RegionPartition {
    pub fn new(height: usize, width: usize, labels: Vec<u32>) -> Result<Self> {
        if height == 0 || width == 0 || labels.len() != height * width {
            return Err(invalid("partition dimensions do not match its labels"));
        }
        let regions = labels.iter().copied().max().unwrap_or(0) + 1;
        Ok(Self { height, width, labels, regions })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn regions(&self) -> u32 {
        self.regions
    }
}

/// Background is label 0 (Ω₂), foreground label 1 (Ω₁).
impl From<&Mask> for RegionPartition {
    fn from(mask: &Mask) -> Self {
        Self {
            height: mask.height(),
            width: mask.width(),
            labels: mask.as_slice().iter().map(|&b| b as u32).collect(),
            regions: 2,
        }
    }
}

/// Region-uniformity score
/// `pp = 1 − Σ_i Σ_{x∈R_i} (f(x) − f̄_i)² / Σ_x (f(x) − f̄)²`.
///
/// The normalization is the total scatter of `f`, so `pp = 1` for a
/// partition with constant regions and `pp = 0` for one that explains none
/// of the variation. A constant image scores 1. Every label in
/// `0..regions` must occur.
pub fn pp_uniformity(f: &ScalarField, regions: &RegionPartition) -> Result<f64> {
    if f.shape() != regions.shape() {
        return Err(invalid(format!(
            "image shape {:?} does not match partition shape {:?}",
            f.shape(),
            regions.shape()
        )));
    }
    let r = regions.regions() as usize;
    let mut sum = vec![0.0; r];
    let mut count = vec![0usize; r];
    for (&v, &l) in f.as_slice().iter().zip(regions.labels()) {
        sum[l as usize] += v;
        count[l as usize] += 1;
    }
    if let Some(empty) = count.iter().position(|&c| c == 0) {
        return Err(invalid(format!("region {empty} is empty")));
    }
    let means: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
    let global = f.mean();
    let (mut within, mut total) = (0.0, 0.0);
    for (&v, &l) in f.as_slice().iter().zip(regions.labels()) {
        let d = v - means[l as usize];
        within += d * d;
        total += (v - global) * (v - global);
    }
    if total == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - within / total).clamp(0.0, 1.0))
}

/// Dice overlap `2|A∩B| / (|A| + |B|)`; two empty masks score 1.
pub fn dice(mask: &Mask, truth: &Mask) -> Result<f64> {
    if mask.shape() != truth.shape() {
        return Err(invalid(format!(
            "mask shape {:?} does not match ground truth {:?}",
            mask.shape(),
            truth.shape()
        )));
    }
    let (mut both, mut a, mut b) = (0usize, 0usize, 0usize);
    for (&x, &y) in mask.as_slice().iter().zip(truth.as_slice()) {
        a += x as usize;
        b += y as usize;
        both += (x && y) as usize;
    }
    if a + b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (a + b) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_partitions() {
        let f = ScalarField::new(2, 2, vec![0.0, 0.0, 10.0, 10.0]).unwrap();
        let by_rows = RegionPartition::new(2, 2, vec![0, 0, 1, 1]).unwrap();
        let by_cols = RegionPartition::new(2, 2, vec![0, 1, 0, 1]).unwrap();
        // Splitting along the intensity step leaves no within-region scatter;
        // splitting across it leaves all of it.
        assert_eq!(pp_uniformity(&f, &by_rows).unwrap(), 1.0);
        assert_eq!(pp_uniformity(&f, &by_cols).unwrap(), 0.0);
    }

    #[test]
    fn exact_partition_of_two_value_image() {
        let mask = crate::speckle::Geometry::Annulus.rasterize((30, 30));
        let f = ScalarField::from_fn(30, 30, |i, j| if mask.get(i, j) { 17.0 } else { 3.0 });
        assert_eq!(pp_uniformity(&f, &RegionPartition::from(&mask)).unwrap(), 1.0);
    }

    #[test]
    fn constant_image_scores_one() {
        let f = ScalarField::filled(4, 4, 9.0);
        let p = RegionPartition::new(4, 4, (0..16).map(|k| (k % 2) as u32).collect()).unwrap();
        assert_eq!(pp_uniformity(&f, &p).unwrap(), 1.0);
    }

    #[test]
    fn empty_region_is_rejected() {
        let f = ScalarField::filled(2, 2, 1.0);
        let all_fg = Mask::from_fn(2, 2, |_, _| true);
        assert!(pp_uniformity(&f, &RegionPartition::from(&all_fg)).is_err());
    }

    #[test]
    fn dice_cases() {
        let a = Mask::from_fn(10, 20, |_, j| j < 10);
        let b = Mask::from_fn(10, 20, |_, j| j >= 10);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        assert_eq!(dice(&a, &b).unwrap(), 0.0);
        let c = Mask::from_fn(10, 20, |_, j| (5..15).contains(&j));
        assert_eq!(a.count(), 100);
        assert_eq!(c.count(), 100);
        assert_eq!(dice(&a, &c).unwrap(), 0.5);
        assert_eq!(dice(&Mask::empty(3, 3), &Mask::empty(3, 3)).unwrap(), 1.0);
        assert!(dice(&a, &Mask::empty(20, 10)).is_err());
    }
}
