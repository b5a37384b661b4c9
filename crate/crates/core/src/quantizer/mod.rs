//! Scalar quantizers for prior probabilities and their Lloyd-Max design.

mod design;
mod prior;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use design::{
    centroid_mbre, centroid_minimax, lloyd_max, max_bre, mbre, nn_boundary, Criterion, Design,
    DesignOptions, Designer, Diagnostic,
};
pub use prior::PriorDensity;

use crate::{Error, Result};

/// A `K`-cell quantizer on `[0, 1]`.
///
/// Cells are `[b_{k-1}, b_k)` with the last one closed at 1. Representation
/// points are free: designed quantizers keep each one inside its cell, but
/// quantizers split off a diverse bank may put them anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarQuantizer {
    boundaries: Vec<f64>,
    reps: Vec<f64>,
}

/// One cell of a (possibly composite) quantizer and the prior it reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
    pub rep: f64,
}

/// Anything that maps each `p0` to one perceived prior, cell by cell.
pub trait Quantization {
    /// Cells covering `[0, 1]` in increasing order. The reported value is
    /// constant on each cell.
    fn cells(&self) -> Vec<Cell>;
}

impl ScalarQuantizer {
    pub fn new(boundaries: Vec<f64>, reps: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::invalid(
                "quantizer",
                "needs at least the boundaries 0 and 1",
            ));
        }
        if boundaries.len() != reps.len() + 1 {
            return Err(Error::invalid(
                "quantizer",
                format!(
                    "{} boundaries for {} representation points",
                    boundaries.len(),
                    reps.len()
                ),
            ));
        }
        if boundaries[0] != 0.0 || boundaries[boundaries.len() - 1] != 1.0 {
            return Err(Error::invalid(
                "quantizer",
                "boundaries must start at 0 and end at 1",
            ));
        }
        if let Some(w) = boundaries.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::invalid(
                "quantizer",
                format!("boundaries must strictly increase ({} then {})", w[0], w[1]),
            ));
        }
        if let Some(r) = reps.iter().find(|r| !r.is_finite()) {
            return Err(Error::invalid(
                "quantizer",
                format!("non-finite representation point {r}"),
            ));
        }
        Ok(Self { boundaries, reps })
    }

    /// The one-cell quantizer mapping everything to `rep`.
    pub fn constant(rep: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![rep])
    }

    /// `k` equal cells with midpoint representation points.
    pub fn uniform_midpoints(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("levels", "K must be at least 1"));
        }
        let boundaries: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let reps = boundaries.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Self::new(boundaries, reps)
    }

    pub fn levels(&self) -> usize {
        self.reps.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn interior_boundaries(&self) -> &[f64] {
        &self.boundaries[1..self.boundaries.len() - 1]
    }

    pub fn reps(&self) -> &[f64] {
        &self.reps
    }

    /// Index of the cell containing `p0` (values outside `[0, 1]` land in the end cells).
    pub fn cell_index(&self, p0: f64) -> usize {
        self.interior_boundaries().partition_point(|&b| b <= p0)
    }

    pub fn quantize(&self, p0: f64) -> f64 {
        self.reps[self.cell_index(p0)]
    }

    /// Every representation point lies inside its own cell.
    pub fn is_regular(&self) -> bool {
        self.reps
            .iter()
            .zip(self.boundaries.windows(2))
            .all(|(&a, w)| w[0] <= a && a <= w[1])
    }
}

impl Quantization for ScalarQuantizer {
    fn cells(&self) -> Vec<Cell> {
        self.boundaries
            .windows(2)
            .zip(&self.reps)
            .map(|(w, &rep)| Cell {
                lo: w[0],
                hi: w[1],
                rep,
            })
            .collect()
    }
}

/// `q(p0)`
pub fn quantize(q: &ScalarQuantizer, p0: f64) -> f64 {
    q.quantize(p0)
}
