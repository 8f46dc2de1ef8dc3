//! Segmentation of crack networks from grayscale photographs.
//!
//! The chain is: bottom-hat transform to enhance dark thin structures,
//! adaptive thresholding against the local mean, removal of small
//! components, and thinning down to a one-pixel-wide skeleton.

mod skeletonize;

pub use skeletonize::skeletonize;

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("empty input")]
    EmptyInput,
    #[error("adaptive threshold window must be odd and >= 3, got {0}")]
    BadWindow(u32),
    #[error("window {window} exceeds both image dimensions {width}x{height}")]
    WindowTooLarge { window: u32, width: u32, height: u32 },
    #[error("structuring element radius must be >= 1")]
    BadRadius,
    #[error("intensity out of range at index {0}")]
    BadIntensity(usize),
    #[error("unsupported image format: {0}")]
    Unsupported(String),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Grayscale image with row-major intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 || data.is_empty() {
            return Err(ImagingError::EmptyInput);
        }
        assert_eq!(data.len(), (width as usize) * (height as usize));
        if let Some(i) = data.iter().position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            return Err(ImagingError::BadIntensity(i));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: f64) -> Self {
        Self { width, height, data: vec![value; (width as usize) * (height as usize)] }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[(y as usize) * (self.width as usize) + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: f64) {
        self.data[(y as usize) * (self.width as usize) + x as usize] = v;
    }

    /// Intensities rescaled to [0,1] from 8/16-bit at load, so parameter
    /// values stay independent of bit depth.
    pub fn load(path: &Path) -> Result<Self, ImagingError> {
        let img = image::open(path)?;
        let (width, height) = (img.width(), img.height());
        let data = match img {
            image::DynamicImage::ImageLuma8(buf) => {
                buf.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect()
            }
            image::DynamicImage::ImageLuma16(buf) => {
                buf.into_raw().into_iter().map(|v| f64::from(v) / 65535.0).collect()
            }
            other => {
                let buf = other.into_luma16();
                buf.into_raw().into_iter().map(|v| f64::from(v) / 65535.0).collect()
            }
        };
        GrayImage::new(width, height, data)
    }

    pub fn save_png(&self, path: &Path) -> Result<(), ImagingError> {
        let buf: Vec<u8> = self.data.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        let img = image::GrayImage::from_raw(self.width, self.height, buf)
            .expect("buffer length matches dimensions");
        img.save(path)?;
        Ok(())
    }
}

/// Binary mask with the same dimensions as its source image (true = crack).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: u32,
    pub height: u32,
    pub data: Vec<bool>,
}

impl BinaryMask {
    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self { width, height, data: vec![value; (width as usize) * (height as usize)] }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[(y as usize) * (self.width as usize) + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.data[(y as usize) * (self.width as usize) + x as usize] = v;
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }

    /// Writes the mask as an 8-bit PNG with values 0/255.
    pub fn save_png(&self, path: &Path) -> Result<(), ImagingError> {
        let buf: Vec<u8> = self.data.iter().map(|v| if *v { 255u8 } else { 0u8 }).collect();
        let img = image::GrayImage::from_raw(self.width, self.height, buf)
            .expect("buffer length matches dimensions");
        img.save(path)?;
        Ok(())
    }

    /// Reads a 0/255 PNG or PGM back into a mask (any nonzero pixel is true).
    pub fn load(path: &Path) -> Result<Self, ImagingError> {
        let img = image::open(path)?.into_luma8();
        let (width, height) = (img.width(), img.height());
        let data = img.into_raw().into_iter().map(|v| v > 0).collect();
        Ok(Self { width, height, data })
    }
}

/// Parameters of the segmentation chain.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentationParams {
    /// Radius of the disk structuring element for the bottom-hat transform.
    pub strel_radius: u32,
    /// Side of the local-mean window for adaptive thresholding (odd, >= 3).
    pub adapt_window: u32,
    /// A pixel is kept when it exceeds (1 + sensitivity) x local mean.
    pub adapt_sensitivity: f64,
    /// Components smaller than this many pixels are removed.
    pub min_area: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self { strel_radius: 7, adapt_window: 31, adapt_sensitivity: 0.15, min_area: 30 }
    }
}

/// Half-widths of the disk x^2 + y^2 <= r^2, one entry per row offset dy in -r..=r.
fn disk_half_widths(radius: u32) -> Vec<i64> {
    let r = i64::from(radius);
    (-r..=r).map(|dy| (((r * r - dy * dy) as f64).sqrt().floor()) as i64).collect()
}

/// Sliding-window max per row with half-width `w`, clamped at image borders.
/// Monotonic-deque, O(N) per row.
fn row_window_extreme(src: &[f64], width: usize, height: usize, w: i64, max: bool) -> Vec<f64> {
    let mut out = vec![0.0; src.len()];
    let w = w as usize;
    let mut deque: Vec<usize> = Vec::with_capacity(width);
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        deque.clear();
        let better = |a: f64, b: f64| if max { a >= b } else { a <= b };
        let mut head = 0usize;
        for x in 0..width + w {
            if x < width {
                while deque.len() > head && better(row[x], row[*deque.last().unwrap()]) {
                    deque.pop();
                }
                deque.push(x);
            }
            if x >= w {
                let center = x - w;
                while deque[head] + w < center {
                    head += 1;
                }
                out[y * width + center] = row[deque[head]];
            }
        }
    }
    out
}

/// Dilation (max=true) or erosion (max=false) with a disk structuring element,
/// neighborhoods clamped to the image domain. Decomposes the disk into
/// horizontal runs: one sliding-window pass per distinct half-width, then a
/// vertical combine, O(N*r) overall.
fn disk_extreme(img: &GrayImage, radius: u32, max: bool) -> GrayImage {
    let (width, height) = (img.width as usize, img.height as usize);
    let half_widths = disk_half_widths(radius);
    let mut by_width: Vec<(i64, Vec<f64>)> = Vec::new();
    for &w in &half_widths {
        if !by_width.iter().any(|(bw, _)| *bw == w) {
            by_width.push((w, row_window_extreme(&img.data, width, height, w, max)));
        }
    }
    let mut out = vec![if max { f64::NEG_INFINITY } else { f64::INFINITY }; img.data.len()];
    let r = i64::from(radius);
    for (i, dy) in (-r..=r).enumerate() {
        let w = half_widths[i];
        let rows = &by_width.iter().find(|(bw, _)| *bw == w).unwrap().1;
        for y in 0..height as i64 {
            let sy = y + dy;
            if sy < 0 || sy >= height as i64 {
                continue;
            }
            let dst = &mut out[(y as usize) * width..(y as usize + 1) * width];
            let src = &rows[(sy as usize) * width..(sy as usize + 1) * width];
            if max {
                for x in 0..width {
                    if src[x] > dst[x] {
                        dst[x] = src[x];
                    }
                }
            } else {
                for x in 0..width {
                    if src[x] < dst[x] {
                        dst[x] = src[x];
                    }
                }
            }
        }
    }
    GrayImage { width: img.width, height: img.height, data: out }
}

/// Black top-hat (bottom-hat) transform: morphological closing with a disk of
/// the given radius, minus the image. Dark structures thinner than the disk
/// come out bright; everything else goes to zero.
pub fn bottom_hat(img: &GrayImage, strel_radius: u32) -> Result<GrayImage, ImagingError> {
    if img.data.is_empty() {
        return Err(ImagingError::EmptyInput);
    }
    if strel_radius < 1 {
        return Err(ImagingError::BadRadius);
    }
    let dilated = disk_extreme(img, strel_radius, true);
    let closed = disk_extreme(&dilated, strel_radius, false);
    let data = closed
        .data
        .iter()
        .zip(&img.data)
        .map(|(c, i)| (c - i).max(0.0))
        .collect();
    Ok(GrayImage { width: img.width, height: img.height, data })
}

/// Thresholds against the local mean: a pixel is kept iff its value exceeds
/// `(1 + sensitivity) * mean` over a `window x window` neighborhood clamped
/// to the image. The local mean comes from an integral image.
pub fn adaptive_threshold(
    img: &GrayImage,
    window: u32,
    sensitivity: f64,
) -> Result<BinaryMask, ImagingError> {
    if img.data.is_empty() {
        return Err(ImagingError::EmptyInput);
    }
    if window < 3 || window % 2 == 0 {
        return Err(ImagingError::BadWindow(window));
    }
    if window > img.width && window > img.height {
        return Err(ImagingError::WindowTooLarge { window, width: img.width, height: img.height });
    }
    let (width, height) = (img.width as usize, img.height as usize);
    // integral[y][x] = sum of img[0..y][0..x]
    let mut integral = vec![0.0f64; (width + 1) * (height + 1)];
    for y in 0..height {
        let mut row_sum = 0.0;
        for x in 0..width {
            row_sum += img.data[y * width + x];
            integral[(y + 1) * (width + 1) + x + 1] = integral[y * (width + 1) + x + 1] + row_sum;
        }
    }
    let half = (window / 2) as i64;
    let mut data = vec![false; img.data.len()];
    for y in 0..height {
        let y0 = (y as i64 - half).max(0) as usize;
        let y1 = ((y as i64 + half) as usize).min(height - 1);
        for x in 0..width {
            let x0 = (x as i64 - half).max(0) as usize;
            let x1 = ((x as i64 + half) as usize).min(width - 1);
            let sum = integral[(y1 + 1) * (width + 1) + x1 + 1]
                - integral[y0 * (width + 1) + x1 + 1]
                - integral[(y1 + 1) * (width + 1) + x0]
                + integral[y0 * (width + 1) + x0];
            let count = ((y1 - y0 + 1) * (x1 - x0 + 1)) as f64;
            let mean = sum / count;
            data[y * width + x] = img.data[y * width + x] > (1.0 + sensitivity) * mean;
        }
    }
    Ok(BinaryMask { width: img.width, height: img.height, data })
}

/// Removes every 8-connected component of true pixels with area below
/// `min_area`; larger components pass through unchanged.
pub fn area_clean(mask: &BinaryMask, min_area: usize) -> BinaryMask {
    if min_area == 0 {
        return mask.clone();
    }
    let (width, height) = (mask.width as usize, mask.height as usize);
    let mut labels = vec![usize::MAX; mask.data.len()];
    let mut areas: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for start in 0..mask.data.len() {
        if !mask.data[start] || labels[start] != usize::MAX {
            continue;
        }
        let label = areas.len();
        let mut area = 0usize;
        labels[start] = label;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            area += 1;
            let (x, y) = (idx % width, idx / width);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    let nidx = (ny as usize) * width + nx as usize;
                    if mask.data[nidx] && labels[nidx] == usize::MAX {
                        labels[nidx] = label;
                        stack.push(nidx);
                    }
                }
            }
        }
        areas.push(area);
    }
    let data = mask
        .data
        .iter()
        .zip(&labels)
        .map(|(v, l)| *v && areas[*l] >= min_area)
        .collect();
    BinaryMask { width: mask.width, height: mask.height, data }
}

/// Full segmentation chain: bottom-hat, adaptive threshold, area clean,
/// skeletonize.
pub fn segment(img: &GrayImage, params: &SegmentationParams) -> Result<BinaryMask, ImagingError> {
    let enhanced = bottom_hat(img, params.strel_radius)?;
    let mask = adaptive_threshold(&enhanced, params.adapt_window, params.adapt_sensitivity)?;
    let cleaned = area_clean(&mask, params.min_area);
    Ok(skeletonize(&cleaned))
}
