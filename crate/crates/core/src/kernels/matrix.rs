use rayon::prelude::*;

use super::Kernel;
use crate::dataset::SessionRecord;
use crate::error::{Error, Result};
use crate::signal::BlowSeries;

/// Dense symmetric matrix of pairwise distances between labelled sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    ids: Vec<String>,
    kernel: String,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(ids: Vec<String>, kernel: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "{} ids need {} cells, got {}",
                n,
                n * n,
                values.len()
            )));
        }
        Ok(Self {
            ids,
            kernel: kernel.into(),
            values,
        })
    }

    /// Builds a matrix from a symmetric pair function evaluated for `i < j`.
    pub fn from_pairs<F>(ids: Vec<String>, kernel: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let n = ids.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?;
        let mut values = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, d) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self::new(ids, kernel, values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn kernel(&self) -> &str {
        &self.kernel
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Restriction to the given rows/columns, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> ScoreMatrix {
        let values = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        ScoreMatrix {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            kernel: self.kernel.clone(),
            values,
        }
    }

    /// Smallest and largest off-diagonal entry.
    pub fn off_diagonal_bounds(&self) -> Option<(f64, f64)> {
        let n = self.len();
        let mut out: Option<(f64, f64)> = None;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = self.get(i, j);
                    out = Some(match out {
                        None => (v, v),
                        Some((lo, hi)) => (lo.min(v), hi.max(v)),
                    });
                }
            }
        }
        out
    }
}

/// Pairwise distances between labelled series. Each unordered pair is
/// evaluated once and mirrored.
pub fn pairwise_series(
    ids: Vec<String>,
    series: &[&BlowSeries],
    kernel: &Kernel,
) -> Result<ScoreMatrix> {
    if ids.len() != series.len() {
        return Err(Error::invalid("ids and series differ in length"));
    }
    kernel.validate()?;
    let prepared = series
        .iter()
        .zip(&ids)
        .map(|(s, id)| {
            kernel.prepare(s).map_err(|e| Error::Pair {
                kernel: kernel.to_string(),
                left: id.clone(),
                right: id.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let label = kernel.to_string();
    ScoreMatrix::from_pairs(ids.clone(), label.clone(), |i, j| {
        kernel
            .distance_prepared(&prepared[i], &prepared[j])
            .map_err(|e| Error::Pair {
                kernel: label.clone(),
                left: ids[i].clone(),
                right: ids[j].clone(),
                source: Box::new(e),
            })
    })
}

pub fn pairwise_matrix(sessions: &[SessionRecord], kernel: &Kernel) -> Result<ScoreMatrix> {
    let ids = sessions.iter().map(|s| s.key()).collect();
    let series: Vec<&BlowSeries> = sessions.iter().map(|s| &s.series).collect();
    pairwise_series(ids, &series, kernel)
}
