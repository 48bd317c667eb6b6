//! Session datasets: the long-format session CSV, synthetic generators and
//! embedding attachment.
//!
//! The canonical session file has columns `user_id,session_id,mode,t_index,value`
//! and may start with a `# values=<kind>` line, where `<kind>` is `samples`
//! (raw audio amplitudes), `rms` (per-window RMS, smoothing still to apply)
//! or `smoothed` (ready to compare).
//!
//! Synthetic data uses ChaCha8 seeded from a `u64` with `rand_distr`
//! normal sampling, so a seed reproduces the same dataset on every platform.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face::FaceEmbedding;
use crate::signal::{preprocess_session, sma_values, BlowSeries, PreprocessConfig, RawAudio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sit,
    Stand,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sit => "sit",
            Mode::Stand => "stand",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sit" | "sitting" => Ok(Mode::Sit),
            "stand" | "standing" => Ok(Mode::Stand),
            other => Err(Error::invalid(format!("unknown mode `{other}`"))),
        }
    }
}

/// Posture restriction applied to both enrolment and queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeFilter {
    Sit,
    Stand,
    Both,
}

impl ModeFilter {
    pub fn all() -> [ModeFilter; 3] {
        [ModeFilter::Sit, ModeFilter::Stand, ModeFilter::Both]
    }

    pub fn admits(self, mode: Mode) -> bool {
        match self {
            ModeFilter::Sit => mode == Mode::Sit,
            ModeFilter::Stand => mode == Mode::Stand,
            ModeFilter::Both => true,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModeFilter::Sit => "Sit",
            ModeFilter::Stand => "Stand",
            ModeFilter::Both => "Both",
        }
    }
}

impl fmt::Display for ModeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeFilter::Sit => "sit",
            ModeFilter::Stand => "stand",
            ModeFilter::Both => "both",
        })
    }
}

impl FromStr for ModeFilter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sit" | "sitting" => Ok(ModeFilter::Sit),
            "stand" | "standing" => Ok(ModeFilter::Stand),
            "both" | "all" => Ok(ModeFilter::Both),
            other => Err(Error::invalid(format!("unknown mode filter `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub user_id: String,
    pub session_id: String,
    pub mode: Mode,
    pub series: BlowSeries,
    pub embedding: Option<FaceEmbedding>,
}

impl SessionRecord {
    /// `user_id/session_id`.
    pub fn key(&self) -> String {
        format!("{}/{}", self.user_id, self.session_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Published,
    Synthetic,
    RawAudio,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<SessionRecord>,
    pub provenance: Provenance,
    pub preprocess: PreprocessConfig,
}

impl Dataset {
    /// Sorts records by `(user_id, session_id)` and rejects duplicate keys.
    pub fn new(
        mut records: Vec<SessionRecord>,
        provenance: Provenance,
        preprocess: PreprocessConfig,
    ) -> Result<Self> {
        records.sort_by(|a, b| (&a.user_id, &a.session_id).cmp(&(&b.user_id, &b.session_id)));
        for pair in records.windows(2) {
            if pair[0].user_id == pair[1].user_id && pair[0].session_id == pair[1].session_id {
                return Err(Error::invalid(format!(
                    "duplicate session {}",
                    pair[0].key()
                )));
            }
        }
        Ok(Self {
            records,
            provenance,
            preprocess,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn users(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| r.user_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Indices of records admitted by `filter`, in dataset order.
    pub fn indices(&self, filter: ModeFilter) -> Vec<usize> {
        (0..self.records.len())
            .filter(|&i| filter.admits(self.records[i].mode))
            .collect()
    }

    /// Sessions per user after filtering.
    pub fn session_counts(&self, filter: ModeFilter) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for r in self.records.iter().filter(|r| filter.admits(r.mode)) {
            *counts.entry(r.user_id.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn has_embeddings(&self) -> bool {
        self.records.iter().all(|r| r.embedding.is_some())
    }

    /// Attaches embeddings by `(user_id, session_id)`. An embedding with no
    /// matching session is an error; sessions without one stay `None`.
    pub fn attach_embeddings(&mut self, embeddings: Vec<FaceEmbedding>) -> Result<()> {
        let mut index: HashMap<(String, String), usize> = HashMap::new();
        for (i, r) in self.records.iter().enumerate() {
            index.insert((r.user_id.clone(), r.session_id.clone()), i);
        }
        for e in embeddings {
            let key = (e.user_id.clone(), e.session_id.clone());
            let &i = index.get(&key).ok_or_else(|| {
                Error::invalid(format!("embedding for unknown session {}/{}", key.0, key.1))
            })?;
            self.records[i].embedding = Some(e);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    /// Raw amplitude samples; full preprocessing applies.
    Samples,
    /// Per-window RMS values; only smoothing applies.
    #[default]
    Rms,
    /// Already smoothed.
    Smoothed,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Samples => "samples",
            ValueKind::Rms => "rms",
            ValueKind::Smoothed => "smoothed",
        })
    }
}

impl FromStr for ValueKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "samples" | "raw" => Ok(ValueKind::Samples),
            "rms" => Ok(ValueKind::Rms),
            "smoothed" | "series" => Ok(ValueKind::Smoothed),
            other => Err(Error::invalid(format!("unknown value kind `{other}`"))),
        }
    }
}

/// Column mapping for session CSV files whose layout differs from the canonical one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionSchema {
    pub user_column: String,
    pub session_column: String,
    pub mode_column: String,
    pub index_column: String,
    pub value_column: String,
    /// Used when the file has no `# values=` line.
    pub values: ValueKind,
}

impl Default for SessionSchema {
    fn default() -> Self {
        Self {
            user_column: "user_id".into(),
            session_column: "session_id".into(),
            mode_column: "mode".into(),
            index_column: "t_index".into(),
            value_column: "value".into(),
            values: ValueKind::Rms,
        }
    }
}

fn split_value_flag(text: &str) -> (Option<&str>, &str) {
    match text.strip_prefix('#') {
        Some(rest) => {
            let (line, body) = rest.split_once('\n').unwrap_or((rest, ""));
            (Some(line.trim()), body)
        }
        None => (None, text),
    }
}

struct RawSession {
    mode: Mode,
    points: Vec<(i64, f64, u64)>,
}

pub fn load_sessions_csv(path: &Path, cfg: &PreprocessConfig) -> Result<Dataset> {
    load_sessions_csv_with(path, cfg, &SessionSchema::default())
}

pub fn load_sessions_csv_with(
    path: &Path,
    cfg: &PreprocessConfig,
    schema: &SessionSchema,
) -> Result<Dataset> {
    cfg.validate()?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (flag, body) = split_value_flag(&text);
    let line_offset = u64::from(flag.is_some());
    let kind = match flag {
        Some(flag) => {
            let value = flag.strip_prefix("values=").ok_or_else(|| {
                Error::parse(path, Some(1), format!("unrecognised header line `#{flag}`"))
            })?;
            value
                .parse()
                .map_err(|e: Error| Error::parse(path, Some(1), e.to_string()))?
        }
        None => schema.values,
    };

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, Some(1 + line_offset), e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::parse(
                path,
                Some(1 + line_offset),
                format!("missing column `{name}`"),
            )
        })
    };
    let cu = column(&schema.user_column)?;
    let cs = column(&schema.session_column)?;
    let cm = column(&schema.mode_column)?;
    let ct = column(&schema.index_column)?;
    let cv = column(&schema.value_column)?;

    let mut sessions: BTreeMap<(String, String), RawSession> = BTreeMap::new();
    for (idx, rec) in reader.records().enumerate() {
        let line = idx as u64 + 2 + line_offset;
        let rec = rec.map_err(|e| Error::parse(path, Some(line), e.to_string()))?;
        let field = |c: usize| {
            rec.get(c)
                .ok_or_else(|| Error::parse(path, Some(line), "short row"))
        };
        let user = field(cu)?.to_string();
        let session = field(cs)?.to_string();
        let mode: Mode = field(cm)?
            .parse()
            .map_err(|e: Error| Error::parse(path, Some(line), e.to_string()))?;
        let t: i64 = field(ct)?
            .parse()
            .map_err(|_| Error::parse(path, Some(line), format!("bad t_index `{}`", &rec[ct])))?;
        let v: f64 = field(cv)?
            .parse()
            .map_err(|_| Error::parse(path, Some(line), format!("bad value `{}`", &rec[cv])))?;
        if !v.is_finite() {
            return Err(Error::parse(path, Some(line), "non-finite value"));
        }
        let entry = sessions
            .entry((user.clone(), session.clone()))
            .or_insert_with(|| RawSession {
                mode,
                points: Vec::new(),
            });
        if entry.mode != mode {
            return Err(Error::parse(
                path,
                Some(line),
                format!(
                    "session {user}/{session} switches mode from {} to {mode}",
                    entry.mode
                ),
            ));
        }
        entry.points.push((t, v, line));
    }

    let mut records = Vec::with_capacity(sessions.len());
    for ((user, session), mut raw) in sessions {
        raw.points.sort_by_key(|p| (p.0, p.2));
        for pair in raw.points.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.0 == b.0 {
                return Err(Error::parse(
                    path,
                    Some(b.2),
                    format!(
                        "duplicate t_index {} in session {user}/{session} (first at line {})",
                        b.0, a.2
                    ),
                ));
            }
            if b.0 != a.0 + 1 {
                return Err(Error::parse(
                    path,
                    Some(b.2),
                    format!(
                        "t_index jumps from {} to {} in session {user}/{session}",
                        a.0, b.0
                    ),
                ));
            }
        }
        let values: Vec<f64> = raw.points.iter().map(|p| p.1).collect();
        let located = |e: Error| Error::parse(path, None, format!("session {user}/{session}: {e}"));
        let series = match kind {
            ValueKind::Samples => {
                let audio = RawAudio::new(values, cfg.sample_rate).map_err(located)?;
                preprocess_session(&audio, cfg).map_err(located)?
            }
            ValueKind::Rms => BlowSeries::new(
                sma_values(&values, cfg.sma_window).map_err(located)?,
                cfg.dt(),
            )
            .map_err(located)?,
            ValueKind::Smoothed => BlowSeries::new(values, cfg.dt()).map_err(located)?,
        };
        records.push(SessionRecord {
            user_id: user,
            session_id: session,
            mode: raw.mode,
            series,
            embedding: None,
        });
    }
    let provenance = match kind {
        ValueKind::Samples => Provenance::RawAudio,
        _ => Provenance::Published,
    };
    Dataset::new(records, provenance, *cfg)
}

/// Writes the canonical long format with a `# values=smoothed` line.
pub fn save_sessions_csv(path: &Path, records: &[SessionRecord]) -> Result<()> {
    let mut out = String::from("# values=smoothed\nuser_id,session_id,mode,t_index,value\n");
    for r in records {
        for (t, v) in r.series.values().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.user_id, r.session_id, r.mode, t, v
            ));
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn synthetic_user_id(index: usize) -> String {
    format!("user{index:02}")
}

pub fn synthetic_session_id(index: usize) -> String {
    format!("s{index:02}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_users: usize,
    pub sessions_per_user: usize,
    pub length: usize,
    pub dt: f64,
    /// Standard deviation of onset shifts, in seconds.
    pub time_jitter: f64,
    /// Relative standard deviation of gain and bump heights; half of it
    /// drives per-point multiplicative noise.
    pub amplitude_jitter: f64,
    /// Smoothing window applied to generated series.
    pub sma_window: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_users: 10,
            sessions_per_user: 10,
            length: 250,
            dt: 0.02,
            time_jitter: 0.04,
            amplitude_jitter: 0.1,
            sma_window: crate::signal::DEFAULT_SMA_WINDOW,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn is_degenerate(&self) -> bool {
        self.time_jitter == 0.0 && self.amplitude_jitter == 0.0
    }

    fn validate(&self) -> Result<()> {
        if self.n_users == 0 || self.sessions_per_user == 0 || self.length == 0 {
            return Err(Error::invalid(
                "user, session and length counts must be at least 1",
            ));
        }
        if !(self.time_jitter >= 0.0 && self.amplitude_jitter >= 0.0) {
            return Err(Error::invalid("jitter must be non-negative"));
        }
        if self.dt.is_nan() || self.dt <= 0.0 || self.sma_window == 0 {
            return Err(Error::invalid("dt and sma_window must be positive"));
        }
        Ok(())
    }
}

struct Bump {
    centre: f64,
    width: f64,
    height: f64,
}

fn gaussian(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    z * sd
}

/// Desk-scale dataset: each user's archetype is a sum of 2 to 4 Gaussian
/// bumps; each session shifts and rescales it and adds multiplicative
/// noise. The first half of a user's sessions are `sit`, the rest `stand`.
pub fn synth_dataset(params: &SynthParams) -> Result<Dataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let duration = params.length as f64 * params.dt;
    let sit_count = params.sessions_per_user.div_ceil(2);
    let noise_sd = params.amplitude_jitter / 2.0;
    let mut records = Vec::with_capacity(params.n_users * params.sessions_per_user);

    for u in 0..params.n_users {
        let n_bumps = rng.gen_range(2..=4);
        let bumps: Vec<Bump> = (0..n_bumps)
            .map(|_| Bump {
                centre: rng.gen_range(0.15..0.85) * duration,
                width: rng.gen_range(0.03..0.10) * duration,
                height: rng.gen_range(0.05..0.5),
            })
            .collect();
        let baseline = rng.gen_range(0.002..0.02);

        for s in 0..params.sessions_per_user {
            let shift = gaussian(&mut rng, params.time_jitter);
            let gain = (1.0 + gaussian(&mut rng, params.amplitude_jitter)).max(0.05);
            let local: Vec<(f64, f64)> = bumps
                .iter()
                .map(|_| {
                    (
                        gaussian(&mut rng, params.time_jitter / 2.0),
                        (1.0 + gaussian(&mut rng, params.amplitude_jitter / 2.0)).max(0.0),
                    )
                })
                .collect();
            let raw: Vec<f64> = (0..params.length)
                .map(|t| {
                    let time = t as f64 * params.dt;
                    let envelope: f64 = bumps
                        .iter()
                        .zip(&local)
                        .map(|(b, (ds, dh))| {
                            let z = (time - b.centre - shift - ds) / b.width;
                            b.height * dh * (-0.5 * z * z).exp()
                        })
                        .sum();
                    let noise = 1.0 + gaussian(&mut rng, noise_sd);
                    ((gain * envelope + baseline) * noise).max(0.0)
                })
                .collect();
            let values = sma_values(&raw, params.sma_window)?;
            records.push(SessionRecord {
                user_id: synthetic_user_id(u),
                session_id: synthetic_session_id(s),
                mode: if s < sit_count {
                    Mode::Sit
                } else {
                    Mode::Stand
                },
                series: BlowSeries::new(values, params.dt)?,
                embedding: None,
            });
        }
    }
    let preprocess = PreprocessConfig {
        sma_window: params.sma_window,
        ..PreprocessConfig::default()
    };
    Dataset::new(records, Provenance::Synthetic, preprocess)
}

/// Blow-like audio whose per-window RMS follows `envelope`: Gaussian noise
/// scaled by the envelope value of its window.
pub fn synth_audio(
    envelope: &[f64],
    window_size: usize,
    sample_rate: u32,
    seed: u64,
) -> Result<RawAudio> {
    if envelope.is_empty() || window_size == 0 {
        return Err(Error::invalid("need a non-empty envelope and window"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let samples = envelope
        .iter()
        .flat_map(|&level| {
            (0..window_size)
                .map(|_| level * unit.sample(&mut rng))
                .collect::<Vec<_>>()
        })
        .collect();
    RawAudio::new(samples, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::dtw;

    fn write(dir: &Path, text: &str) -> std::path::PathBuf {
        let p = dir.join("sessions.csv");
        std::fs::write(&p, text).unwrap();
        p
    }

    fn smoothed_cfg() -> PreprocessConfig {
        PreprocessConfig {
            sma_window: 1,
            ..Default::default()
        }
    }

    #[test]
    fn one_session_of_250_points() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("user_id,session_id,mode,t_index,value\n");
        for t in 0..250 {
            text.push_str(&format!("p1,1,sit,{t},{}\n", t as f64 * 0.001));
        }
        let ds =
            load_sessions_csv(&write(dir.path(), &text), &PreprocessConfig::default()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.records[0].series.len(), 250);
        assert_eq!(ds.records[0].mode, Mode::Sit);
    }

    #[test]
    fn duplicate_t_index_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let text = "user_id,session_id,mode,t_index,value\np1,1,sit,0,0.1\np1,1,sit,1,0.2\np1,1,sit,1,0.3\n";
        let err = load_sessions_csv(&write(dir.path(), text), &smoothed_cfg())
            .unwrap_err()
            .to_string();
        assert!(
            err.contains(":4:") && err.contains("duplicate t_index 1"),
            "{err}"
        );
    }

    #[test]
    fn gap_and_missing_column_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let text = "user_id,session_id,mode,t_index,value\np1,1,sit,0,0.1\np1,1,sit,2,0.2\n";
        let err = load_sessions_csv(&write(dir.path(), text), &smoothed_cfg())
            .unwrap_err()
            .to_string();
        assert!(err.contains("jumps from 0 to 2"), "{err}");

        let text = "user_id,session_id,t_index,value\np1,1,0,0.1\n";
        let err = load_sessions_csv(&write(dir.path(), text), &smoothed_cfg())
            .unwrap_err()
            .to_string();
        assert!(err.contains("missing column `mode`"), "{err}");
    }

    #[test]
    fn value_flag_selects_preprocessing() {
        let dir = tempfile::tempdir().unwrap();
        let body = "user_id,session_id,mode,t_index,value\nu,1,stand,0,1\nu,1,stand,1,3\n";
        let cfg = PreprocessConfig {
            sma_window: 2,
            ..Default::default()
        };
        let rms =
            load_sessions_csv(&write(dir.path(), &format!("# values=rms\n{body}")), &cfg).unwrap();
        assert_eq!(rms.records[0].series.values(), &[1.0, 2.0]);
        let smoothed = load_sessions_csv(
            &write(dir.path(), &format!("# values=smoothed\n{body}")),
            &cfg,
        )
        .unwrap();
        assert_eq!(smoothed.records[0].series.values(), &[1.0, 3.0]);

        let cfg = PreprocessConfig {
            window_size: 2,
            sma_window: 1,
            sample_rate: 100,
        };
        let samples = load_sessions_csv(
            &write(dir.path(), &format!("# values=samples\n{body}")),
            &cfg,
        )
        .unwrap();
        assert_eq!(samples.records[0].series.values(), &[5.0f64.sqrt()]);
        assert_eq!(samples.provenance, Provenance::RawAudio);
    }

    #[test]
    fn schema_mapping() {
        let dir = tempfile::tempdir().unwrap();
        let text = "participant,trial,posture,frame,rms\nA,3,Sitting,1,0.5\nA,3,Sitting,2,0.25\n";
        let schema = SessionSchema {
            user_column: "participant".into(),
            session_column: "trial".into(),
            mode_column: "posture".into(),
            index_column: "frame".into(),
            value_column: "rms".into(),
            values: ValueKind::Smoothed,
        };
        let ds = load_sessions_csv_with(
            &write(dir.path(), text),
            &PreprocessConfig::default(),
            &schema,
        )
        .unwrap();
        assert_eq!(ds.records[0].key(), "A/3");
        assert_eq!(ds.records[0].series.values(), &[0.5, 0.25]);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = synth_dataset(&SynthParams {
            n_users: 2,
            sessions_per_user: 3,
            length: 20,
            ..Default::default()
        })
        .unwrap();
        let p = dir.path().join("s.csv");
        save_sessions_csv(&p, &ds.records).unwrap();
        let back = load_sessions_csv(&p, &ds.preprocess).unwrap();
        assert_eq!(back.records, ds.records);
    }

    #[test]
    fn no_jitter_gives_identical_sessions() {
        let ds = synth_dataset(&SynthParams {
            n_users: 3,
            sessions_per_user: 4,
            time_jitter: 0.0,
            amplitude_jitter: 0.0,
            ..Default::default()
        })
        .unwrap();
        for user in ds.records.chunks(4) {
            for r in user {
                assert_eq!(
                    dtw(r.series.values(), user[0].series.values()).unwrap(),
                    0.0
                );
            }
        }
    }

    #[test]
    fn synth_is_deterministic_and_split_by_mode() {
        let p = SynthParams {
            n_users: 2,
            sessions_per_user: 5,
            length: 40,
            seed: 5,
            ..Default::default()
        };
        let a = synth_dataset(&p).unwrap();
        assert_eq!(a, synth_dataset(&p).unwrap());
        assert_ne!(a, synth_dataset(&SynthParams { seed: 6, ..p }).unwrap());
        assert_eq!(a.session_counts(ModeFilter::Sit)["user00"], 3);
        assert_eq!(a.session_counts(ModeFilter::Stand)["user00"], 2);
    }

    #[test]
    fn synthetic_users_are_separable_under_dtw() {
        let (mut wins, mut total) = (0, 0);
        for seed in 0..20 {
            let ds = synth_dataset(&SynthParams {
                n_users: 10,
                sessions_per_user: 4,
                length: 100,
                dt: 0.05,
                seed,
                ..Default::default()
            })
            .unwrap();
            let users: Vec<&[SessionRecord]> = ds.records.chunks(4).collect();
            let mean = |a: &[SessionRecord], b: &[SessionRecord], same: bool| {
                let mut sum = 0.0;
                let mut n = 0;
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        if !same || i < j {
                            sum += dtw(x.series.values(), y.series.values()).unwrap();
                            n += 1;
                        }
                    }
                }
                sum / n as f64
            };
            let within: Vec<f64> = users.iter().map(|u| mean(u, u, true)).collect();
            for a in 0..users.len() {
                for b in (a + 1)..users.len() {
                    total += 1;
                    let cross = mean(users[a], users[b], false);
                    if within[a] < cross && within[b] < cross {
                        wins += 1;
                    }
                }
            }
        }
        assert!(wins as f64 >= 0.95 * total as f64, "{wins}/{total}");
    }

    #[test]
    fn attach_embeddings_by_key() {
        let mut ds = synth_dataset(&SynthParams {
            n_users: 2,
            sessions_per_user: 2,
            length: 10,
            ..Default::default()
        })
        .unwrap();
        assert!(!ds.has_embeddings());
        let e = crate::face::synth_embeddings(2, 2, 0.05, 1).unwrap();
        ds.attach_embeddings(e).unwrap();
        assert!(ds.has_embeddings());
        let extra = crate::face::synth_embeddings(3, 2, 0.05, 1).unwrap();
        assert!(ds.attach_embeddings(extra).is_err());
    }

    #[test]
    fn synthetic_audio_tracks_envelope() {
        let env = [0.1, 0.4, 0.2];
        let audio = synth_audio(&env, 960, 48_000, 3).unwrap();
        let rms = crate::signal::rms_windows(&audio, 960).unwrap();
        for (r, e) in rms.values().iter().zip(env) {
            assert!((r - e).abs() < 0.15 * e, "{r} vs {e}");
        }
    }
}
