//! Dynamic time warping with symmetric unit steps.
//!
//! `D(i, j) = c(i, j) + min(D(i-1, j), D(i, j-1), D(i-1, j-1))` with
//! `c(i, j) = |x_i - y_j|`. An optional Sakoe-Chiba band restricts
//! `|i - j|`; the band is widened to the length difference so the end cell
//! stays reachable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DtwParams {
    /// Sakoe-Chiba half-width; `None` is unconstrained.
    pub band: Option<usize>,
}

pub fn dtw(x: &[f64], y: &[f64]) -> Result<f64> {
    dtw_banded(x, y, None)
}

pub fn dtw_banded(x: &[f64], y: &[f64], band: Option<usize>) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(accumulated_cost(x.len(), y.len(), band, |i, j| {
        (x[i] - y[j]).abs()
    }))
}

fn band_range(i: usize, m: usize, band: Option<usize>) -> (usize, usize) {
    match band {
        None => (0, m),
        Some(w) => (i.saturating_sub(w), (i + w + 1).min(m)),
    }
}

#[inline(always)]
fn min2(a: f64, b: f64) -> f64 {
    // costs are never NaN, so skip the NaN handling of f64::min
    if a < b {
        a
    } else {
        b
    }
}

/// Total cost of the cheapest warping path over an `n x m` grid whose local
/// cost is `cost(i, j)`. Uses two rows of storage.
pub(crate) fn accumulated_cost<F>(n: usize, m: usize, band: Option<usize>, cost: F) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    debug_assert!(n > 0 && m > 0);
    let band = band.map(|w| w.max(n.abs_diff(m)));
    // prev[j + 1] holds D(i-1, j); index 0 is the virtual column j = -1.
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 0..n {
        let (lo, hi) = band_range(i, m, band);
        // cells outside the band stay infinite
        if band.is_some() {
            curr[..=lo].fill(f64::INFINITY);
            curr[hi + 1..].fill(f64::INFINITY);
        }
        let mut left = f64::INFINITY;
        let up = &prev[lo..=hi];
        let out = &mut curr[lo + 1..=hi];
        for (k, slot) in out.iter_mut().enumerate() {
            let best = min2(min2(up[k], up[k + 1]), left);
            left = cost(i, lo + k) + best;
            *slot = left;
        }
        if i == 0 {
            prev[0] = f64::INFINITY;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

/// Full accumulated-cost table and the optimal warping path from `(0, 0)` to
/// `(n-1, m-1)`.
pub(crate) fn optimal_path<F>(n: usize, m: usize, cost: F) -> (f64, Vec<(usize, usize)>)
where
    F: Fn(usize, usize) -> f64,
{
    debug_assert!(n > 0 && m > 0);
    let idx = |i: usize, j: usize| i * m + j;
    let mut table = vec![f64::INFINITY; n * m];
    for i in 0..n {
        for j in 0..m {
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let up = if i > 0 {
                    table[idx(i - 1, j)]
                } else {
                    f64::INFINITY
                };
                let left = if j > 0 {
                    table[idx(i, j - 1)]
                } else {
                    f64::INFINITY
                };
                let diag = if i > 0 && j > 0 {
                    table[idx(i - 1, j - 1)]
                } else {
                    f64::INFINITY
                };
                up.min(left).min(diag)
            };
            table[idx(i, j)] = cost(i, j) + best;
        }
    }

    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while i > 0 || j > 0 {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = table[idx(i - 1, j - 1)];
            let up = table[idx(i - 1, j)];
            let left = table[idx(i, j - 1)];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        path.push((i, j));
    }
    path.reverse();
    (table[idx(n - 1, m - 1)], path)
}

/// Warping path under absolute-difference cost.
pub fn dtw_path(x: &[f64], y: &[f64]) -> Result<(f64, Vec<(usize, usize)>)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(optimal_path(x.len(), y.len(), |i, j| (x[i] - y[j]).abs()))
}
