//! DTW barycenter averaging, used to draw a per-user signature.
//!
//! Alignment and the objective use squared point differences, the cost
//! under which the per-index mean update never increases the summed
//! alignment cost.

use crate::error::{Error, Result};
use crate::kernels::{accumulated_cost, optimal_path};
use crate::signal::BlowSeries;

pub const DEFAULT_DBA_ITERATIONS: usize = 10;

fn sq_dtw(x: &[f64], y: &[f64]) -> f64 {
    accumulated_cost(x.len(), y.len(), None, |i, j| (x[i] - y[j]) * (x[i] - y[j]))
}

/// Summed squared-cost DTW from `centre` to every series.
pub fn dba_inertia(centre: &[f64], series: &[&[f64]]) -> f64 {
    series.iter().map(|s| sq_dtw(centre, s)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbaResult {
    pub signature: Vec<f64>,
    /// Objective before the first update and after each iteration.
    pub inertia: Vec<f64>,
}

pub fn dba(series: &[&[f64]], iterations: usize) -> Result<DbaResult> {
    if series.is_empty() {
        return Err(Error::invalid("DBA needs at least one series"));
    }
    if series.iter().any(|s| s.is_empty()) {
        return Err(Error::EmptySeries);
    }
    let medoid = (0..series.len())
        .map(|i| (i, dba_inertia(series[i], series)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    let mut centre = series[medoid].to_vec();
    let mut inertia = vec![dba_inertia(&centre, series)];

    for _ in 0..iterations {
        let mut sums = vec![0.0; centre.len()];
        let mut counts = vec![0usize; centre.len()];
        for s in series {
            let (_, path) = optimal_path(centre.len(), s.len(), |i, j| {
                (centre[i] - s[j]) * (centre[i] - s[j])
            });
            for (i, j) in path {
                sums[i] += s[j];
                counts[i] += 1;
            }
        }
        let next: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| s / c as f64)
            .collect();
        let cost = dba_inertia(&next, series);
        centre = next;
        inertia.push(cost);
        log::debug!("dba iteration {}: inertia {cost}", inertia.len() - 1);
    }
    Ok(DbaResult {
        signature: centre,
        inertia,
    })
}

/// Signature of a set of sessions; the output has the medoid's length.
pub fn dba_signature(sessions: &[BlowSeries], iterations: usize) -> Result<BlowSeries> {
    let views: Vec<&[f64]> = sessions.iter().map(|s| s.values()).collect();
    let out = dba(&views, iterations)?;
    let dt = sessions[0].dt();
    BlowSeries::new(out.signature.into_iter().map(|v| v.max(0.0)).collect(), dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_series_is_its_own_signature() {
        let s = BlowSeries::new(vec![0.1, 0.5, 0.3], 0.02).unwrap();
        assert_eq!(dba_signature(std::slice::from_ref(&s), 5).unwrap(), s);
    }

    #[test]
    fn identical_series_fixed_point() {
        let s = BlowSeries::new(vec![0.1, 0.5, 0.3, 0.0], 0.02).unwrap();
        let many = vec![s.clone(); 4];
        assert_eq!(dba_signature(&many, 10).unwrap(), s);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(dba_signature(&[], 3).is_err());
    }

    #[test]
    fn inertia_never_increases() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let series: Vec<Vec<f64>> = (0..3)
                .map(|_| {
                    let n = rng.gen_range(3..9);
                    (0..n).map(|_| rng.gen_range(0.0..5.0)).collect()
                })
                .collect();
            let views: Vec<&[f64]> = series.iter().map(|s| s.as_slice()).collect();
            let out = dba(&views, 8).unwrap();
            for w in out.inertia.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{:?}", out.inertia);
            }
        }
    }
}
