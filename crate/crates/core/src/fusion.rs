//! Score normalisation, fusion, kNN aggregation and per-user thresholds.
//!
//! Every score here is a distance: an attempt is accepted when its score is
//! at most the user's threshold `tau`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;

const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Which biometric channel feeds the decision score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Blow,
    Face,
    Fused,
}

impl Channel {
    pub fn all() -> [Channel; 3] {
        [Channel::Blow, Channel::Face, Channel::Fused]
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Blow => "blow",
            Channel::Face => "face",
            Channel::Fused => "fused",
        })
    }
}

impl FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blow" => Ok(Channel::Blow),
            "face" => Ok(Channel::Face),
            "fused" | "fusion" => Ok(Channel::Fused),
            other => Err(Error::invalid(format!("unknown channel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub blow: f64,
    pub face: f64,
}

impl FusionWeights {
    pub const EQUAL: FusionWeights = FusionWeights {
        blow: 0.5,
        face: 0.5,
    };
    pub const BLOW_ONLY: FusionWeights = FusionWeights {
        blow: 1.0,
        face: 0.0,
    };
    pub const FACE_ONLY: FusionWeights = FusionWeights {
        blow: 0.0,
        face: 1.0,
    };

    pub fn new(blow: f64, face: f64) -> Result<Self> {
        let w = Self { blow, face };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.blow >= 0.0 && self.face >= 0.0) {
            return Err(Error::invalid("fusion weights must be non-negative"));
        }
        if (self.blow + self.face - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::invalid(format!(
                "fusion weights must sum to 1, got {} + {}",
                self.blow, self.face
            )));
        }
        Ok(())
    }

    /// Effective weights for a channel: single channels ignore `self`.
    pub fn for_channel(&self, channel: Channel) -> FusionWeights {
        match channel {
            Channel::Blow => Self::BLOW_ONLY,
            Channel::Face => Self::FACE_ONLY,
            Channel::Fused => *self,
        }
    }

    pub fn channel(&self) -> Channel {
        match (self.blow > 0.0, self.face > 0.0) {
            (true, false) => Channel::Blow,
            (false, true) => Channel::Face,
            _ => Channel::Fused,
        }
    }
}

impl Default for FusionWeights {
    fn default() -> Self {
        Self::EQUAL
    }
}

/// How the `k` nearest enrolled distances collapse into one score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnnAggregation {
    /// Mean of the `k` smallest distances.
    #[default]
    Mean,
    /// Largest of the `k` smallest distances: all `k` neighbours must pass.
    Max,
}

impl fmt::Display for KnnAggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KnnAggregation::Mean => "mean",
            KnnAggregation::Max => "max",
        })
    }
}

impl FromStr for KnnAggregation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mean" => Ok(KnnAggregation::Mean),
            "max" => Ok(KnnAggregation::Max),
            other => Err(Error::invalid(format!("unknown kNN aggregation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecisionConfig {
    pub kernel: Kernel,
    pub k: usize,
    pub q: usize,
    pub weights: FusionWeights,
    pub aggregation: KnnAggregation,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        Self {
            kernel: Kernel::default(),
            k: 1,
            q: 10,
            weights: FusionWeights::EQUAL,
            aggregation: KnnAggregation::Mean,
        }
    }
}

impl DecisionConfig {
    /// Checks `k` and `q` against a user with `n` sessions: leave-one-out
    /// scoring needs `k <= n - 1`, calibration needs `q <= n`.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.weights.validate()?;
        self.kernel.validate()?;
        if self.k == 0 || self.k + 1 > n {
            return Err(Error::invalid(format!(
                "k = {} needs 1 <= k <= {} for {} sessions",
                self.k,
                n.saturating_sub(1),
                n
            )));
        }
        if self.q == 0 || self.q > n {
            return Err(Error::invalid(format!(
                "q = {} needs 1 <= q <= {n} for {n} sessions",
                self.q
            )));
        }
        Ok(())
    }
}

/// Min-max bounds fitted on a score population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub min: f64,
    pub max: f64,
}

impl NormBounds {
    pub fn fit(scores: &[f64]) -> Result<Self> {
        let mut it = scores.iter().copied();
        let first = it.next().ok_or(Error::EmptySeries)?;
        let (min, max) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Ok(Self { min, max })
    }

    /// Maps into `[0, 1]`, clamping values outside the fitted range. A
    /// degenerate range maps everything to 0.
    pub fn apply(&self, score: f64) -> f64 {
        let span = self.max - self.min;
        if span <= 0.0 {
            0.0
        } else {
            ((score - self.min) / span).clamp(0.0, 1.0)
        }
    }
}

pub fn min_max_normalize(scores: &[f64]) -> Result<Vec<f64>> {
    let b = NormBounds::fit(scores)?;
    Ok(scores.iter().map(|&s| b.apply(s)).collect())
}

pub fn fuse(blow_norm: f64, face_norm: f64, weights: &FusionWeights) -> Result<f64> {
    weights.validate()?;
    Ok(weights.blow * blow_norm + weights.face * face_norm)
}

pub fn knn_score(distances: &[f64], k: usize, aggregation: KnnAggregation) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > distances.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {} available distances",
            distances.len()
        )));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nearest = &sorted[..k];
    Ok(match aggregation {
        KnnAggregation::Mean => nearest.iter().sum::<f64>() / k as f64,
        KnnAggregation::Max => nearest[k - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Deny,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

/// Normalisation bounds for each channel contributing to a fused score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelBounds {
    pub blow: Option<NormBounds>,
    pub face: Option<NormBounds>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub user_id: String,
    pub tau: f64,
    pub config: DecisionConfig,
    pub bounds: ChannelBounds,
}

/// The `q`-th smallest score.
pub fn order_statistic(scores: &[f64], q: usize) -> Result<f64> {
    if q == 0 || q > scores.len() {
        return Err(Error::invalid(format!(
            "q = {q} out of range for {} scores",
            scores.len()
        )));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[q - 1])
}

/// Picks `tau` so that `q` of the user's leave-one-out genuine scores are
/// accepted (more when scores tie at `tau`).
pub fn calibrate_threshold(
    user_id: &str,
    genuine_scores: &[f64],
    config: &DecisionConfig,
    bounds: ChannelBounds,
) -> Result<Threshold> {
    let tau = order_statistic(genuine_scores, config.q)?;
    Ok(Threshold {
        user_id: user_id.to_string(),
        tau,
        config: config.clone(),
        bounds,
    })
}

pub fn authenticate(query_score: f64, threshold: &Threshold) -> Decision {
    accept_at(query_score, threshold.tau)
}

pub(crate) fn accept_at(score: f64, tau: f64) -> Decision {
    if score <= tau {
        Decision::Accept
    } else {
        Decision::Deny
    }
}
