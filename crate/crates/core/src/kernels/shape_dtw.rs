//! DTW over per-point shape descriptors.
//!
//! Point `i` is described by the length-`width` subsequence centred on it
//! (boundary values replicated) concatenated with the first differences of
//! that subsequence. Local cost is the Euclidean distance between
//! descriptors, so `width = 1` reduces to plain DTW.

use serde::{Deserialize, Serialize};

use super::dtw::accumulated_cost;
use crate::error::{Error, Result};

pub const DEFAULT_DESCRIPTOR_WIDTH: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeDtwParams {
    /// Subsequence length; must be odd.
    pub width: usize,
    /// Append first differences of the subsequence to the descriptor.
    pub derivative: bool,
    pub band: Option<usize>,
}

impl Default for ShapeDtwParams {
    fn default() -> Self {
        Self {
            width: DEFAULT_DESCRIPTOR_WIDTH,
            derivative: true,
            band: None,
        }
    }
}

impl ShapeDtwParams {
    pub fn validate(&self) -> Result<()> {
        if self.width.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "shapeDTW descriptor width must be odd and positive, got {}",
                self.width
            )));
        }
        Ok(())
    }

    pub fn descriptor_len(&self) -> usize {
        if self.derivative {
            2 * self.width - 1
        } else {
            self.width
        }
    }
}

/// Row-major `len x descriptor_len` descriptor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptors {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Descriptors {
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

pub fn descriptors(x: &[f64], params: &ShapeDtwParams) -> Result<Descriptors> {
    params.validate()?;
    if x.is_empty() {
        return Err(Error::EmptySeries);
    }
    let half = (params.width / 2) as isize;
    let last = x.len() as isize - 1;
    let dim = params.descriptor_len();
    let mut data = Vec::with_capacity(x.len() * dim);
    let mut window = vec![0.0; params.width];
    for i in 0..x.len() as isize {
        for (k, slot) in window.iter_mut().enumerate() {
            let pos = (i - half + k as isize).clamp(0, last);
            *slot = x[pos as usize];
        }
        data.extend_from_slice(&window);
        if params.derivative {
            data.extend(window.windows(2).map(|w| w[1] - w[0]));
        }
    }
    Ok(Descriptors { dim, data })
}

pub(crate) fn descriptor_distance(a: &Descriptors, b: &Descriptors, band: Option<usize>) -> f64 {
    if a.dim == 1 {
        return accumulated_cost(a.len(), b.len(), band, |i, j| (a.data[i] - b.data[j]).abs());
    }
    accumulated_cost(a.len(), b.len(), band, |i, j| {
        a.row(i)
            .iter()
            .zip(b.row(j))
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    })
}

pub fn shape_dtw(x: &[f64], y: &[f64], params: &ShapeDtwParams) -> Result<f64> {
    let a = descriptors(x, params)?;
    let b = descriptors(y, params)?;
    Ok(descriptor_distance(&a, &b, params.band))
}
