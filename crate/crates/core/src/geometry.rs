//! Boxes, masks and the two coefficients that drive adaptive perturbation.
//!
//! Pixel `(row r, col c)` covers the half-open square `[c, c+1) x [r, r+1)`
//! in continuous coordinates; `x` runs along columns and `y` along rows.

use crate::error::{Error, Result};

/// Default lower clamp for the size coefficient.
pub const DEFAULT_THETA_FLOOR: f64 = 0.01;

/// Row-major 2D grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type BinaryMask = Grid<bool>;
pub type ImageGrid = Grid<f64>;

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid(format!("zero-sized grid {width}x{height}")));
        }
        Ok(Self { width, height, data: vec![value; width * height] })
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid(format!("zero-sized grid {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {width}x{height} grid",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::from_vec(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid { width: self.width, height: self.height, data: self.data.iter().map(f).collect() }
    }

    pub fn same_dims<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { left: self.dims(), right: other.dims() })
        }
    }
}

impl Grid<bool> {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// `(row, col)` of every true pixel, row-major.
    pub fn true_pixels(&self) -> Vec<(usize, usize)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / self.width, i % self.width))
            .collect()
    }
}

/// Axis-aligned box in continuous pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let ok = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite())
            && x_min < x_max
            && y_min < y_max;
        if ok {
            Ok(Self { x_min, y_min, x_max, y_max })
        } else {
            Err(Error::InvalidBox { x_min, y_min, x_max, y_max })
        }
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    /// Same box with the axes swapped.
    pub fn transpose(&self) -> Self {
        Self { x_min: self.y_min, y_min: self.x_min, x_max: self.y_max, y_max: self.x_max }
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    pub fn within_image(&self, width: usize, height: usize) -> bool {
        self.x_min >= 0.0 && self.y_min >= 0.0 && self.x_max <= width as f64 && self.y_max <= height as f64
    }

    pub fn check_within(&self, width: usize, height: usize) -> Result<()> {
        if self.within_image(width, height) {
            Ok(())
        } else {
            Err(Error::BoxOutOfBounds {
                x_min: self.x_min,
                y_min: self.y_min,
                x_max: self.x_max,
                y_max: self.y_max,
                width,
                height,
            })
        }
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let iw = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let ih = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        let inter = iw * ih;
        inter / (self.area() + other.area() - inter)
    }
}

/// The size and aspect coefficients of one box within its image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub theta_omega: f64,
    pub xi: f64,
}

impl Coefficients {
    pub fn for_box(b: &BoundingBox, image_w: usize, image_h: usize, theta_floor: f64) -> Result<Self> {
        Ok(Self {
            theta_omega: similarity_coefficient_theta(b, image_w, image_h, theta_floor)?,
            xi: scale_coefficient_xi(b),
        })
    }

    /// Coefficients that leave offsets unscaled.
    pub fn unit() -> Self {
        Self { theta_omega: 1.0, xi: 1.0 }
    }
}

/// Tightest box covering every true pixel square.
pub fn box_from_mask(mask: &BinaryMask) -> Result<BoundingBox> {
    let (mut r0, mut c0, mut r1, mut c1) = (usize::MAX, usize::MAX, 0usize, 0usize);
    let mut any = false;
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if *mask.get(r, c) {
                any = true;
                r0 = r0.min(r);
                r1 = r1.max(r);
                c0 = c0.min(c);
                c1 = c1.max(c);
            }
        }
    }
    if !any {
        return Err(Error::EmptyMask);
    }
    BoundingBox::new(c0 as f64, r0 as f64, (c1 + 1) as f64, (r1 + 1) as f64)
}

/// Aspect coefficient: box width over box height.
pub fn scale_coefficient_xi(b: &BoundingBox) -> f64 {
    b.width() / b.height()
}

/// Size coefficient: `sqrt(box area / image area)` clamped to `[theta_floor, 1]`.
pub fn similarity_coefficient_theta(
    b: &BoundingBox,
    image_w: usize,
    image_h: usize,
    theta_floor: f64,
) -> Result<f64> {
    if !(theta_floor > 0.0 && theta_floor <= 1.0) {
        return Err(Error::Config(format!("theta_floor {theta_floor} outside (0, 1]")));
    }
    b.check_within(image_w, image_h)?;
    let ratio = b.area() / (image_w as f64 * image_h as f64);
    Ok(ratio.sqrt().clamp(theta_floor, 1.0))
}
