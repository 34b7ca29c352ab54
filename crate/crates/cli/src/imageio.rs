//! Grayscale PGM/PNG input, PGM and overlay PNG output.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, ExtendedColorType, GrayImage, ImageEncoder, ImageReader, Rgb, RgbImage};
use sarseg_core::{Mask, ScalarField};

use crate::error::{CliError, CliResult};

/// Overlay contour color.
pub const CONTOUR_RGB: [u8; 3] = [255, 0, 0];

/// Reads an 8-bit grayscale PGM (P2 or P5) or PNG.
pub fn read_gray(path: &Path) -> CliResult<GrayImage> {
    let img = ImageReader::open(path)
        .map_err(|e| CliError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| CliError::io(path, e))?
        .decode()
        .map_err(|e| CliError::io(path, e))?;
    if img.color() != ColorType::L8 {
        return Err(CliError::io(
            path,
            format!("expected an 8-bit grayscale image, found {:?}", img.color()),
        ));
    }
    Ok(img.into_luma8())
}

pub fn gray_to_field(img: &GrayImage) -> ScalarField {
    let (w, h) = img.dimensions();
    ScalarField::from_fn(h as usize, w as usize, |i, j| img.get_pixel(j as u32, i as u32)[0] as f64)
}

/// Reads an image as the positive field the solvers expect, `f ← max(f, 1)`.
pub fn read_image(path: &Path) -> CliResult<ScalarField> {
    Ok(gray_to_field(&read_gray(path)?).map(|v| v.max(1.0)))
}

/// Reads a binary mask; pixels of 128 and above are foreground.
pub fn read_mask(path: &Path) -> CliResult<Mask> {
    let img = read_gray(path)?;
    let (w, h) = img.dimensions();
    Ok(Mask::from_fn(h as usize, w as usize, |i, j| img.get_pixel(j as u32, i as u32)[0] >= 128))
}

/// Rounds to the nearest gray level in 0–255.
pub fn quantize(f: &ScalarField) -> ScalarField {
    f.map(|v| v.round().clamp(0.0, 255.0))
}

pub fn field_to_gray(f: &ScalarField) -> GrayImage {
    let (h, w) = f.shape();
    let bytes = quantize(f).as_slice().iter().map(|&v| v as u8).collect();
    GrayImage::from_raw(w as u32, h as u32, bytes).expect("buffer sized from the field")
}

pub fn mask_to_gray(mask: &Mask) -> GrayImage {
    let (h, w) = mask.shape();
    let bytes = mask.as_slice().iter().map(|&b| if b { 255 } else { 0 }).collect();
    GrayImage::from_raw(w as u32, h as u32, bytes).expect("buffer sized from the mask")
}

/// Min-max rescale of a level set to 0–255; a flat field maps to 0.
pub fn phi_to_gray(phi: &ScalarField) -> GrayImage {
    let (lo, hi) = (phi.min(), phi.max());
    let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
    field_to_gray(&phi.map(|v| (v - lo) * scale))
}

pub fn write_pgm(path: &Path, img: &GrayImage, ascii: bool) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let encoding = if ascii { SampleEncoding::Ascii } else { SampleEncoding::Binary };
    PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(encoding))
        .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::L8)
        .map_err(|e| CliError::io(path, e))
}

/// The input in gray with the mask boundary drawn in [`CONTOUR_RGB`].
pub fn overlay(f: &ScalarField, mask: &Mask) -> RgbImage {
    let gray = field_to_gray(f);
    let edge = mask.boundary();
    RgbImage::from_fn(gray.width(), gray.height(), |x, y| {
        if edge.get(y as usize, x as usize) {
            Rgb(CONTOUR_RGB)
        } else {
            let v = gray.get_pixel(x, y)[0];
            Rgb([v, v, v])
        }
    })
}

pub fn write_png(path: &Path, img: &RgbImage) -> CliResult<()> {
    img.save_with_format(path, image::ImageFormat::Png).map_err(|e| CliError::io(path, e))
}
