//! DTW over a shapelet representation matrix.
//!
//! Every length-`window` sliding window of a series is scored against an
//! ordered dictionary of local patterns. Column `t` of the representation
//! holds those scores for the window starting at `t`; DTW then aligns the
//! columns under Euclidean distance.
//!
//! With `c` the mean-centred window and `p` a centred unit-norm pattern, the
//! score is `<c, p> / (|c| + flat_scale)`, in `(-1, 1)`. A constant pattern
//! scores `flat_scale / (|c| + flat_scale)`, close to 1 for a flat window
//! and decaying as the window gains variation.

use serde::{Deserialize, Serialize};

use super::dtw::accumulated_cost;
use crate::error::{Error, Result};

pub const DEFAULT_SHAPELET_WINDOW: usize = 5;
pub const DEFAULT_FLAT_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shapelet {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeletConfig {
    pub window: usize,
    pub flat_scale: f64,
    pub patterns: Vec<Shapelet>,
}

impl Default for ShapeletConfig {
    fn default() -> Self {
        Self::standard(DEFAULT_SHAPELET_WINDOW, DEFAULT_FLAT_SCALE)
    }
}

impl ShapeletConfig {
    /// Linear up, linear down, peak, valley and flat patterns of the given length.
    pub fn standard(window: usize, flat_scale: f64) -> Self {
        let w = window.max(1);
        let pos = |k: usize| {
            if w == 1 {
                0.0
            } else {
                -1.0 + 2.0 * k as f64 / (w - 1) as f64
            }
        };
        let up: Vec<f64> = (0..w).map(pos).collect();
        let down: Vec<f64> = up.iter().rev().copied().collect();
        let peak: Vec<f64> = (0..w).map(|k| 1.0 - pos(k).abs()).collect();
        let valley: Vec<f64> = peak.iter().map(|v| -v).collect();
        let flat = vec![0.0; w];
        let mk = |name: &str, values: Vec<f64>| Shapelet {
            name: name.to_string(),
            values,
        };
        Self {
            window,
            flat_scale,
            patterns: vec![
                mk("up", up),
                mk("down", down),
                mk("peak", peak),
                mk("valley", valley),
                mk("flat", flat),
            ],
        }
    }

    /// True when this is the standard dictionary for its window and scale.
    pub fn is_standard(&self) -> bool {
        *self == Self::standard(self.window, self.flat_scale)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::invalid("shapelet window must be at least 2"));
        }
        if !(self.flat_scale > 0.0 && self.flat_scale.is_finite()) {
            return Err(Error::invalid("shapelet flat_scale must be positive"));
        }
        if self.patterns.is_empty() {
            return Err(Error::invalid("shapelet dictionary is empty"));
        }
        for p in &self.patterns {
            if p.values.len() != self.window {
                return Err(Error::invalid(format!(
                    "shapelet `{}` has length {}, window is {}",
                    p.name,
                    p.values.len(),
                    self.window
                )));
            }
        }
        Ok(())
    }
}

enum Pattern {
    Shaped(Vec<f64>),
    Flat,
}

fn centred(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    (c, norm)
}

fn prepare_patterns(cfg: &ShapeletConfig) -> Vec<Pattern> {
    cfg.patterns
        .iter()
        .map(|p| {
            let (c, norm) = centred(&p.values);
            if norm == 0.0 {
                Pattern::Flat
            } else {
                Pattern::Shaped(c.into_iter().map(|v| v / norm).collect())
            }
        })
        .collect()
}

/// Column-major representation: `columns x patterns`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeletMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl ShapeletMatrix {
    pub fn columns(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn column(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }
}

pub fn shapelet_matrix(x: &[f64], cfg: &ShapeletConfig) -> Result<ShapeletMatrix> {
    cfg.validate()?;
    if x.len() < cfg.window {
        return Err(Error::invalid(format!(
            "series of length {} is shorter than the shapelet window {}",
            x.len(),
            cfg.window
        )));
    }
    let patterns = prepare_patterns(cfg);
    let dim = patterns.len();
    let mut data = Vec::with_capacity((x.len() - cfg.window + 1) * dim);
    for win in x.windows(cfg.window) {
        let (c, norm) = centred(win);
        let denom = norm + cfg.flat_scale;
        data.extend(patterns.iter().map(|p| match p {
            Pattern::Shaped(p) => c.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / denom,
            Pattern::Flat => cfg.flat_scale / denom,
        }));
    }
    Ok(ShapeletMatrix { dim, data })
}

pub(crate) fn matrix_distance(a: &ShapeletMatrix, b: &ShapeletMatrix) -> f64 {
    accumulated_cost(a.columns(), b.columns(), None, |i, j| {
        a.column(i)
            .iter()
            .zip(b.column(j))
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    })
}

pub fn dtw_plus_s(x: &[f64], y: &[f64], cfg: &ShapeletConfig) -> Result<f64> {
    let a = shapelet_matrix(x, cfg)?;
    let b = shapelet_matrix(y, cfg)?;
    Ok(matrix_distance(&a, &b))
}
