use crate::error::Result;
use crate::geometry::{BoundingBox, Grid, ImageGrid};

pub const FEATURE_COUNT: usize = 6;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] =
    ["bias", "intensity", "inside_box", "signed_edge_distance", "center_offset_x", "center_offset_y"];

/// `[1, intensity, inside, signed distance, |dx|/W, |dy|/H]` for one pixel.
///
/// The signed distance is measured from the pixel center to the nearest box
/// edge (positive inside), divided by half the shorter box side and clamped
/// to `[-1, 1]`.
pub type FeatureVector = [f64; FEATURE_COUNT];

#[inline]
pub(crate) fn pixel_features(intensity: f64, x: f64, y: f64, b: &BoundingBox, half_short: f64, center: (f64, f64)) -> FeatureVector {
    let inside = x >= b.x_min && x <= b.x_max && y >= b.y_min && y <= b.y_max;
    let signed = if inside {
        (x - b.x_min).min(b.x_max - x).min(y - b.y_min).min(b.y_max - y)
    } else {
        let dx = (b.x_min - x).max(x - b.x_max).max(0.0);
        let dy = (b.y_min - y).max(y - b.y_max).max(0.0);
        -(dx * dx + dy * dy).sqrt()
    };
    [
        1.0,
        intensity,
        inside as u8 as f64,
        (signed / half_short).clamp(-1.0, 1.0),
        (x - center.0).abs() / b.width(),
        (y - center.1).abs() / b.height(),
    ]
}

pub fn featurize(image: &ImageGrid, b: &BoundingBox) -> Result<Grid<FeatureVector>> {
    b.check_within(image.width(), image.height())?;
    let half_short = 0.5 * b.width().min(b.height());
    let center = b.center();
    Grid::from_fn(image.width(), image.height(), |r, c| {
        pixel_features(*image.get(r, c), c as f64 + 0.5, r as f64 + 0.5, b, half_short, center)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(n: usize) -> ImageGrid {
        Grid::from_fn(n, n, |r, c| ((r + c) % 7) as f64 / 7.0).unwrap()
    }

    #[test]
    fn center_pixel() {
        let b = BoundingBox::new(10.0, 10.0, 21.0, 21.0).unwrap();
        let f = featurize(&image(32), &b).unwrap();
        let v = f.get(15, 15);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[2], 1.0);
        assert_eq!((v[4], v[5]), (0.0, 0.0));
        assert_eq!(v[3], 1.0);
    }

    #[test]
    fn far_outside_pixel() {
        let b = BoundingBox::new(10.0, 10.0, 20.0, 20.0).unwrap();
        let f = featurize(&image(64), &b).unwrap();
        let v = f.get(60, 2);
        assert_eq!(v[2], 0.0);
        assert_eq!(v[3], -1.0);
        assert!(v[4] > 0.5 && v[5] > 0.5);
    }

    #[test]
    fn corner_pixel_near_zero() {
        let b = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let f = featurize(&image(16), &b).unwrap();
        for (r, c) in [(0, 0), (0, 9), (9, 0), (9, 9)] {
            let v = f.get(r, c);
            assert_eq!(v[2], 1.0);
            assert!(v[3].abs() <= 1.0 / 5.0, "{:?}", v);
        }
        assert!(f.get(10, 10)[3] < 0.0);
    }

    #[test]
    fn bounds() {
        let b = BoundingBox::new(3.5, 7.25, 20.0, 11.0).unwrap();
        let img = image(24);
        let f = featurize(&img, &b).unwrap();
        for (v, &i) in f.as_slice().iter().zip(img.as_slice()) {
            assert_eq!(v[1], i);
            assert!(v[2] == 0.0 || v[2] == 1.0);
            assert!((-1.0..=1.0).contains(&v[3]));
            assert!(v[4] >= 0.0 && v[5] >= 0.0);
        }
        let outside = BoundingBox::new(3.5, 7.25, 25.0, 11.0).unwrap();
        assert!(featurize(&img, &outside).is_err());
    }
}
