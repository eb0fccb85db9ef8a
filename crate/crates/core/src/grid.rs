//! 2D scalar image container.
//!
//! Pixels are stored in row-major (lexicographic) order, so a grid doubles
//! as the vector `x ∈ R^{w·h}` that the sparse operators act on. Intensities
//! are dimensionless; 8/16-bit sources are normalized into [0, 1] at the I/O
//! boundary.

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid<S> {
    width: usize,
    height: usize,
    values: Vec<S>,
}

impl<S: Scalar> ImageGrid<S> {
    /// Zero-filled grid.
    pub fn new(width: usize, height: usize) -> Self {
        ImageGrid {
            width,
            height,
            values: vec![S::zero(); width * height],
        }
    }

    pub fn constant(width: usize, height: usize, value: S) -> Self {
        ImageGrid {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    /// Wraps a row-major value buffer. Rejects length mismatches and
    /// non-finite entries.
    pub fn from_vec(width: usize, height: usize, values: Vec<S>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::contract(format!(
                "grid buffer has {} values, expected {}x{} = {}",
                values.len(),
                width,
                height,
                width * height
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("grid contains non-finite values"));
        }
        Ok(ImageGrid {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> S {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: S) {
        self.values[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[S] {
        &self.values[row * self.width..(row + 1) * self.width]
    }

    /// Largest absolute pixel-wise difference against another grid of the
    /// same dimensions.
    pub fn max_abs_diff(&self, other: &ImageGrid<S>) -> S {
        assert_eq!(self.width, other.width);
        assert_eq!(self.height, other.height);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(S::zero(), S::max)
    }

    /// Bilinear upsampling by an integer factor, center-aligned: the sample
    /// of low-res pixel (u, v) lands at high-res position
    /// (f·u + (f−1)/2, f·v + (f−1)/2), matching the center of the box that
    /// decimation averages over. Border reads clamp.
    pub fn bilinear_upsample(&self, factor: usize) -> ImageGrid<S> {
        if factor == 1 {
            return self.clone();
        }
        let hw = self.width * factor;
        let hh = self.height * factor;
        let f = factor as f64;
        let off = (f - 1.0) / 2.0;
        let mut out = Vec::with_capacity(hw * hh);
        for i in 0..hh {
            let sy = ((i as f64 - off) / f).clamp(0.0, (self.height - 1) as f64);
            let y0 = sy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let fy = sy - y0 as f64;
            for j in 0..hw {
                let sx = ((j as f64 - off) / f).clamp(0.0, (self.width - 1) as f64);
                let x0 = sx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let fx = sx - x0 as f64;
                let w00 = crate::cast::<S>((1.0 - fy) * (1.0 - fx));
                let w01 = crate::cast::<S>((1.0 - fy) * fx);
                let w10 = crate::cast::<S>(fy * (1.0 - fx));
                let w11 = crate::cast::<S>(fy * fx);
                let v = w00 * self.get(y0, x0)
                    + w01 * self.get(y0, x1)
                    + w10 * self.get(y1, x0)
                    + w11 * self.get(y1, x1);
                out.push(v);
            }
        }
        ImageGrid {
            width: hw,
            height: hh,
            values: out,
        }
    }

    /// Converts the scalar type (used by the f32 harness lane).
    pub fn convert<T: Scalar>(&self) -> ImageGrid<T> {
        ImageGrid {
            width: self.width,
            height: self.height,
            values: self
                .values
                .iter()
                .map(|v| T::from_f64(v.to_f64().unwrap()).unwrap())
                .collect(),
        }
    }
}
