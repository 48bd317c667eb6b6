//! Time warp edit distance.
//!
//! Both series are padded with a leading zero at time 0; point `i` (1-based)
//! sits at time `i * dt`. Match and delete costs follow the usual
//! formulation with stiffness `nu` and gap penalty `lambda`. For `nu > 0`
//! and `lambda >= 0` the result is a metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STIFFNESS: f64 = 0.001;
pub const DEFAULT_GAP_PENALTY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwedParams {
    /// `nu`, weight on time-stamp differences.
    pub stiffness: f64,
    /// `lambda`, constant cost of a delete.
    pub gap_penalty: f64,
}

impl Default for TwedParams {
    fn default() -> Self {
        Self {
            stiffness: DEFAULT_STIFFNESS,
            gap_penalty: DEFAULT_GAP_PENALTY,
        }
    }
}

impl TwedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.stiffness > 0.0 && self.stiffness.is_finite()) {
            return Err(Error::invalid(format!(
                "TWED stiffness must be positive, got {}",
                self.stiffness
            )));
        }
        if !(self.gap_penalty >= 0.0 && self.gap_penalty.is_finite()) {
            return Err(Error::invalid(format!(
                "TWED gap penalty must be non-negative, got {}",
                self.gap_penalty
            )));
        }
        Ok(())
    }
}

pub fn twed(x: &[f64], y: &[f64], dt: f64, params: &TwedParams) -> Result<f64> {
    params.validate()?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let nu = params.stiffness;
    let lambda = params.gap_penalty;
    let val = |s: &[f64], i: usize| if i == 0 { 0.0 } else { s[i - 1] };
    let time = |i: usize| i as f64 * dt;

    let m = y.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=x.len() {
        curr[0] = f64::INFINITY;
        let (xi, xp) = (val(x, i), val(x, i - 1));
        let (ti, tp) = (time(i), time(i - 1));
        for j in 1..=m {
            let (yj, yp) = (val(y, j), val(y, j - 1));
            let (tj, tq) = (time(j), time(j - 1));
            let delete_x = prev[j] + (xi - xp).abs() + nu * (ti - tp) + lambda;
            let delete_y = curr[j - 1] + (yj - yp).abs() + nu * (tj - tq) + lambda;
            let matched = prev[j - 1]
                + (xi - yj).abs()
                + (xp - yp).abs()
                + nu * ((ti - tj).abs() + (tp - tq).abs());
            curr[j] = matched.min(delete_x).min(delete_y);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let x = [0.5, 1.5, 0.25, 3.0];
        assert_eq!(twed(&x, &x, 1.0, &TwedParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn single_points() {
        let p = TwedParams::default();
        assert_eq!(twed(&[1.0], &[1.0], 0.02, &p).unwrap(), 0.0);
        assert_eq!(twed(&[0.0], &[3.0], 0.02, &p).unwrap(), 3.0);
    }

    #[test]
    fn rejects_bad_params() {
        let bad = TwedParams {
            stiffness: 0.0,
            gap_penalty: 1.0,
        };
        assert!(twed(&[1.0], &[1.0], 1.0, &bad).is_err());
        let bad = TwedParams {
            stiffness: 0.1,
            gap_penalty: -1.0,
        };
        assert!(twed(&[1.0], &[1.0], 1.0, &bad).is_err());
        assert!(matches!(
            twed(&[], &[1.0], 1.0, &TwedParams::default()),
            Err(Error::EmptySeries)
        ));
    }
}
