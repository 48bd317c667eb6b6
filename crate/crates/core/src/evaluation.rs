//! Authentication protocol: leave-one-out genuine attempts, cross-user
//! impostor attempts, per-user calibrated thresholds and pooled EER.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, ModeFilter};
use crate::error::{Error, Result};
use crate::face::cosine_distance;
use crate::fusion::{
    accept_at, calibrate_threshold, knn_score, Channel, ChannelBounds, DecisionConfig,
    KnnAggregation, NormBounds, Threshold,
};
use crate::kernels::{pairwise_matrix, Kernel, ScoreMatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_neg: u64,
    pub false_pos: u64,
    pub true_neg: u64,
}

impl ConfusionCounts {
    pub fn genuine(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    pub fn impostor(&self) -> u64 {
        self.false_pos + self.true_neg
    }

    pub fn total(&self) -> u64 {
        self.genuine() + self.impostor()
    }
}

impl std::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.true_pos += o.true_pos;
        self.false_neg += o.false_neg;
        self.false_pos += o.false_pos;
        self.true_neg += o.true_neg;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub far: f64,
    pub frr: f64,
    pub accuracy: f64,
}

pub fn rates(c: &ConfusionCounts) -> Result<Rates> {
    if c.impostor() == 0 {
        return Err(Error::UndefinedRate("FAR"));
    }
    if c.genuine() == 0 {
        return Err(Error::UndefinedRate("FRR"));
    }
    Ok(Rates {
        far: c.false_pos as f64 / c.impostor() as f64,
        frr: c.false_neg as f64 / c.genuine() as f64,
        accuracy: (c.true_pos + c.true_neg) as f64 / c.total() as f64,
    })
}

/// Minimum over thresholds of `max(FAR, FRR)` under accept-iff-`<=`, sweeping
/// `-inf` and every observed score.
pub fn eer(genuine: &[f64], impostor: &[f64]) -> Result<f64> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::invalid(
            "EER needs non-empty genuine and impostor scores",
        ));
    }
    let mut g = genuine.to_vec();
    let mut i = impostor.to_vec();
    g.sort_by(f64::total_cmp);
    i.sort_by(f64::total_cmp);
    let (ng, ni) = (g.len(), i.len());
    let at = |accepted_g: usize, accepted_i: usize| {
        let far = accepted_i as f64 / ni as f64;
        let frr = (ng - accepted_g) as f64 / ng as f64;
        far.max(frr)
    };

    let mut best = at(0, 0);
    let (mut pg, mut pi) = (0, 0);
    while pg < ng || pi < ni {
        let tau = match (g.get(pg), i.get(pi)) {
            (Some(a), Some(b)) => a.min(*b),
            (Some(a), None) => *a,
            (None, Some(b)) => *b,
            (None, None) => unreachable!(),
        };
        while pg < ng && g[pg] <= tau {
            pg += 1;
        }
        while pi < ni && i[pi] <= tau {
            pi += 1;
        }
        best = best.min(at(pg, pi));
    }
    Ok(best)
}

/// For each member, the kNN score against the other members.
pub fn genuine_scores(
    matrix: &ScoreMatrix,
    members: &[usize],
    k: usize,
    aggregation: KnnAggregation,
) -> Result<Vec<f64>> {
    if members.len() < k + 1 {
        return Err(Error::invalid(format!(
            "leave-one-out scoring with k = {k} needs at least {} sessions, got {}",
            k + 1,
            members.len()
        )));
    }
    members
        .iter()
        .map(|&s| {
            let d: Vec<f64> = members
                .iter()
                .filter(|&&o| o != s)
                .map(|&o| matrix.get(s, o))
                .collect();
            knn_score(&d, k, aggregation)
        })
        .collect()
}

/// For each query, the kNN score against all enrolled sessions of the target.
pub fn impostor_scores(
    matrix: &ScoreMatrix,
    enrolled: &[usize],
    queries: &[usize],
    k: usize,
    aggregation: KnnAggregation,
) -> Result<Vec<f64>> {
    queries
        .iter()
        .map(|&qi| {
            let d: Vec<f64> = enrolled.iter().map(|&e| matrix.get(qi, e)).collect();
            knn_score(&d, k, aggregation)
        })
        .collect()
}

/// Target recall, absolute or relative to each user's session count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TargetRecall {
    Count(usize),
    /// `n - r` for a user with `n` sessions.
    AllBut(usize),
}

impl TargetRecall {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let q = match *self {
            TargetRecall::Count(q) => q,
            TargetRecall::AllBut(r) => n.saturating_sub(r),
        };
        if q == 0 || q > n {
            return Err(Error::invalid(format!(
                "target recall {self} is out of range for {n} sessions"
            )));
        }
        Ok(q)
    }
}

impl fmt::Display for TargetRecall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetRecall::Count(q) => write!(f, "{q}"),
            TargetRecall::AllBut(0) => f.write_str("n"),
            TargetRecall::AllBut(r) => write!(f, "n-{r}"),
        }
    }
}

impl FromStr for TargetRecall {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::invalid(format!(
                "bad target recall `{s}`; use an integer, `n` or `n-<r>`"
            ))
        };
        if s == "n" {
            return Ok(TargetRecall::AllBut(0));
        }
        if let Some(r) = s.strip_prefix("n-") {
            return r.parse().map(TargetRecall::AllBut).map_err(|_| bad());
        }
        s.parse().map(TargetRecall::Count).map_err(|_| bad())
    }
}

impl From<TargetRecall> for String {
    fn from(t: TargetRecall) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for TargetRecall {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub series: String,
    pub channel: Channel,
    pub kernel: Kernel,
    pub mode: ModeFilter,
    pub k: usize,
    pub q: usize,
    pub eer: f64,
    pub accuracy: f64,
    pub far: f64,
    pub frr: f64,
    pub counts: ConfusionCounts,
}

/// Label for the series column: the kernel, `Face`, or `Fusion(<kernel>)`.
pub fn series_label(channel: Channel, kernel: &Kernel) -> String {
    match channel {
        Channel::Blow => kernel.label().to_string(),
        Channel::Face => "Face".to_string(),
        Channel::Fused => format!("Fusion({})", kernel.label()),
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub row: ReportRow,
    pub thresholds: Vec<Threshold>,
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
}

/// Cosine-distance matrix over the dataset's face embeddings.
pub fn face_matrix(dataset: &Dataset) -> Result<ScoreMatrix> {
    let embeddings = dataset
        .records
        .iter()
        .map(|r| {
            r.embedding
                .as_ref()
                .ok_or_else(|| Error::MissingEmbedding(r.key()))
        })
        .collect::<Result<Vec<_>>>()?;
    let ids = dataset.records.iter().map(|r| r.key()).collect();
    ScoreMatrix::from_pairs(ids, "face", |i, j| {
        cosine_distance(embeddings[i], embeddings[j])
    })
}

/// Fused distance matrix and the bounds each channel was normalised with.
/// Bounds span all off-diagonal (genuine and impostor) pairs.
pub fn fused_matrix(
    blow: &ScoreMatrix,
    face: &ScoreMatrix,
    weights: &crate::fusion::FusionWeights,
) -> Result<(ScoreMatrix, ChannelBounds)> {
    weights.validate()?;
    if blow.ids() != face.ids() {
        return Err(Error::invalid(
            "blow and face matrices cover different sessions",
        ));
    }
    let n = blow.len();
    let fit = |m: &ScoreMatrix| {
        m.off_diagonal_bounds()
            .map(|(min, max)| NormBounds { min, max })
            .unwrap_or(NormBounds { min: 0.0, max: 0.0 })
    };
    let (bb, fb) = (fit(blow), fit(face));
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i * n + j] = weights.blow * bb.apply(blow.get(i, j))
                    + weights.face * fb.apply(face.get(i, j));
            }
        }
    }
    let label = format!("fused:{}", blow.kernel());
    Ok((
        ScoreMatrix::new(blow.ids().to_vec(), label, values)?,
        ChannelBounds {
            blow: Some(bb),
            face: Some(fb),
        },
    ))
}

/// Caches per-kernel and face matrices over a whole dataset so that many
/// (mode, q, channel) configurations reuse them.
pub struct Evaluator<'a> {
    dataset: &'a Dataset,
    blow: BTreeMap<String, ScoreMatrix>,
    face: Option<ScoreMatrix>,
}

impl<'a> Evaluator<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        Self {
            dataset,
            blow: BTreeMap::new(),
            face: None,
        }
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn blow_matrix(&mut self, kernel: &Kernel) -> Result<&ScoreMatrix> {
        let key = kernel.to_string();
        if !self.blow.contains_key(&key) {
            let m = pairwise_matrix(&self.dataset.records, kernel)?;
            self.blow.insert(key.clone(), m);
        }
        Ok(&self.blow[&key])
    }

    pub fn face_matrix(&mut self) -> Result<&ScoreMatrix> {
        if self.face.is_none() {
            self.face = Some(face_matrix(self.dataset)?);
        }
        Ok(self.face.as_ref().expect("just set"))
    }

    /// Checks `k` and `q` against every user's filtered session count.
    pub fn validate(&self, config: &DecisionConfig, mode: ModeFilter) -> Result<()> {
        let counts = self.dataset.session_counts(mode);
        if counts.is_empty() {
            return Err(Error::invalid(format!("no sessions match mode {mode}")));
        }
        if counts.len() < 2 {
            return Err(Error::invalid("impostor attempts need at least two users"));
        }
        for (user, &n) in &counts {
            config
                .validate_for(n)
                .map_err(|e| Error::InsufficientSessions {
                    user: user.clone(),
                    message: format!("mode {mode}: {e}"),
                })?;
        }
        Ok(())
    }

    pub fn run(
        &mut self,
        config: &DecisionConfig,
        mode: ModeFilter,
        channel: Channel,
    ) -> Result<ProtocolOutcome> {
        self.validate(config, mode)?;
        let indices = self.dataset.indices(mode);
        let weights = config.weights.for_channel(channel);
        let (matrix, bounds) = match channel {
            Channel::Blow => {
                let m = self.blow_matrix(&config.kernel)?.submatrix(&indices);
                let b = m
                    .off_diagonal_bounds()
                    .map(|(min, max)| NormBounds { min, max });
                (
                    m,
                    ChannelBounds {
                        blow: b,
                        face: None,
                    },
                )
            }
            Channel::Face => {
                let m = self.face_matrix()?.submatrix(&indices);
                let b = m
                    .off_diagonal_bounds()
                    .map(|(min, max)| NormBounds { min, max });
                (
                    m,
                    ChannelBounds {
                        blow: None,
                        face: b,
                    },
                )
            }
            Channel::Fused => {
                let face = self.face_matrix()?.submatrix(&indices);
                let blow = self.blow_matrix(&config.kernel)?.submatrix(&indices);
                fused_matrix(&blow, &face, &weights)?
            }
        };
        let users: Vec<String> = indices
            .iter()
            .map(|&i| self.dataset.records[i].user_id.clone())
            .collect();
        let config = DecisionConfig {
            weights,
            ..config.clone()
        };
        let row_label = series_label(channel, &config.kernel);
        evaluate_matrix(&matrix, &users, &config, bounds).map(|mut out| {
            out.row.series = row_label;
            out.row.channel = channel;
            out.row.mode = mode;
            out
        })
    }
}

/// Runs the protocol over one mode-filtered dataset and channel.
pub fn run_protocol(
    dataset: &Dataset,
    config: &DecisionConfig,
    mode: ModeFilter,
    channel: Channel,
) -> Result<ReportRow> {
    Evaluator::new(dataset)
        .run(config, mode, channel)
        .map(|o| o.row)
}

struct UserOutcome {
    threshold: Threshold,
    counts: ConfusionCounts,
    genuine: Vec<f64>,
    impostor: Vec<f64>,
}

/// Protocol over a precomputed decision matrix. `users[i]` owns row `i`.
pub fn evaluate_matrix(
    matrix: &ScoreMatrix,
    users: &[String],
    config: &DecisionConfig,
    bounds: ChannelBounds,
) -> Result<ProtocolOutcome> {
    if users.len() != matrix.len() {
        return Err(Error::invalid("user labels do not match matrix size"));
    }
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, u) in users.iter().enumerate() {
        members.entry(u.as_str()).or_default().push(i);
    }
    let groups: Vec<(&str, Vec<usize>)> = members.into_iter().collect();

    let outcomes: Vec<UserOutcome> = groups
        .par_iter()
        .map(|(user, own)| {
            config
                .validate_for(own.len())
                .map_err(|e| Error::InsufficientSessions {
                    user: user.to_string(),
                    message: e.to_string(),
                })?;
            let genuine = genuine_scores(matrix, own, config.k, config.aggregation)?;
            let threshold = calibrate_threshold(user, &genuine, config, bounds)?;
            let others: Vec<usize> = (0..users.len()).filter(|&i| users[i] != *user).collect();
            let impostor = impostor_scores(matrix, own, &others, config.k, config.aggregation)?;
            let tau = threshold.tau;
            let tp = genuine
                .iter()
                .filter(|&&s| accept_at(s, tau).is_accept())
                .count() as u64;
            let fp = impostor
                .iter()
                .filter(|&&s| accept_at(s, tau).is_accept())
                .count() as u64;
            Ok(UserOutcome {
                counts: ConfusionCounts {
                    true_pos: tp,
                    false_neg: genuine.len() as u64 - tp,
                    false_pos: fp,
                    true_neg: impostor.len() as u64 - fp,
                },
                threshold,
                genuine,
                impostor,
            })
        })
        .collect::<Result<_>>()?;

    let mut counts = ConfusionCounts::default();
    let mut genuine = Vec::new();
    let mut impostor = Vec::new();
    let mut thresholds = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        counts += o.counts;
        genuine.extend(o.genuine);
        impostor.extend(o.impostor);
        thresholds.push(o.threshold);
    }
    let r = rates(&counts)?;
    let row = ReportRow {
        series: config.kernel.label().to_string(),
        channel: config.weights.channel(),
        kernel: config.kernel.clone(),
        mode: ModeFilter::Both,
        k: config.k,
        q: config.q,
        eer: eer(&genuine, &impostor)?,
        accuracy: r.accuracy,
        far: r.far,
        frr: r.frr,
        counts,
    };
    Ok(ProtocolOutcome {
        row,
        thresholds,
        genuine,
        impostor,
    })
}
