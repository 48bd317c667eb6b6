//! Shape-based distance: one minus the largest norm-normalised
//! cross-correlation over all integer shifts, with zero padding.

use crate::error::{Error, Result};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Zero-padded cross-correlation `sum_i x[i] * y[i - shift]`.
pub fn cross_correlation(x: &[f64], y: &[f64], shift: isize) -> f64 {
    let (n, m) = (x.len() as isize, y.len() as isize);
    let lo = shift.max(0);
    let hi = n.min(m + shift);
    (lo..hi)
        .map(|i| x[i as usize] * y[(i - shift) as usize])
        .sum()
}

/// Maximum normalised cross-correlation and the shift attaining it.
pub fn max_ncc(x: &[f64], y: &[f64]) -> Result<(f64, isize)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 && ny == 0.0 {
        return Err(Error::UndefinedNormalization);
    }
    let denom = nx * ny;
    if denom == 0.0 {
        // One side is all zeros: every shift correlates to 0.
        return Ok((0.0, 0));
    }
    let shifts = -(y.len() as isize - 1)..=(x.len() as isize - 1);
    let mut best = (f64::NEG_INFINITY, 0);
    for s in shifts {
        let cc = cross_correlation(x, y, s) / denom;
        if cc > best.0 {
            best = (cc, s);
        }
    }
    Ok(best)
}

pub fn sbd(x: &[f64], y: &[f64]) -> Result<f64> {
    let (ncc, _) = max_ncc(x, y)?;
    Ok((1.0 - ncc).clamp(0.0, 2.0))
}
