//! Batch front end: a [`RunManifest`] records every parameter of a run and
//! [`execute`] carries it out. The `blowmatch` binary only builds manifests.
//!
//! Data artifacts go to files in the output directory; progress and timing
//! go through `log` to standard error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::artifacts;
use crate::dataset::{
    load_sessions_csv_with, save_sessions_csv, synth_dataset, Dataset, Mode, ModeFilter,
    SessionRecord, SessionSchema, SynthParams,
};
use crate::error::{Error, Result};
use crate::evaluation::{Evaluator, TargetRecall};
use crate::face::{load_embeddings, save_embeddings, synth_embeddings};
use crate::fusion::{Channel, DecisionConfig, FusionWeights, KnnAggregation};
use crate::kernels::Kernel;
use crate::report::EvalReport;
use crate::signal::{preprocess_session, read_sample_column, read_wav, PreprocessConfig};

pub const SESSIONS_FILE: &str = "sessions.csv";
pub const EMBEDDINGS_FILE: &str = "embeddings.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const THRESHOLD_DIR: &str = "thresholds";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Preprocess,
    Simmatrix,
    #[default]
    Evaluate,
    Synth,
}

/// The sweep requested from `evaluate`, expanded into one
/// [`DecisionConfig`] per (kernel, q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalPlan {
    #[serde(with = "kernel_strings")]
    pub kernels: Vec<Kernel>,
    pub k: usize,
    pub q: Vec<TargetRecall>,
    pub modes: Vec<ModeFilter>,
    pub channels: Vec<Channel>,
    /// Weights used by the fused channel.
    pub weights: FusionWeights,
    pub aggregation: KnnAggregation,
}

impl Default for EvalPlan {
    fn default() -> Self {
        Self {
            kernels: vec![Kernel::default()],
            k: 1,
            q: vec![TargetRecall::Count(10)],
            modes: vec![ModeFilter::Both],
            channels: vec![Channel::Blow],
            weights: FusionWeights::EQUAL,
            aggregation: KnnAggregation::Mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthPlan {
    pub params: SynthParams,
    /// Also write face embeddings with this noise level.
    pub face_sigma: Option<f64>,
}

impl Default for SynthPlan {
    fn default() -> Self {
        Self {
            params: SynthParams::default(),
            face_sigma: Some(0.05),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunManifest {
    pub subcommand: Subcommand,
    /// Raw files or directories for `preprocess`; one session CSV otherwise.
    pub inputs: Vec<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub preprocess: PreprocessConfig,
    pub schema: SessionSchema,
    pub evaluate: EvalPlan,
    pub synth: SynthPlan,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            subcommand: Subcommand::default(),
            inputs: Vec::new(),
            embeddings: None,
            out: PathBuf::from("out"),
            seed: 0,
            preprocess: PreprocessConfig::default(),
            schema: SessionSchema::default(),
            evaluate: EvalPlan::default(),
            synth: SynthPlan::default(),
        }
    }
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, None, e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::invalid(format!("manifest does not serialise: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    /// Checks parameters and that every referenced path exists.
    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        match self.subcommand {
            Subcommand::Synth => {}
            Subcommand::Preprocess => {
                if self.inputs.is_empty() {
                    return Err(Error::invalid("preprocess needs at least one input"));
                }
            }
            Subcommand::Simmatrix | Subcommand::Evaluate => {
                if self.inputs.len() != 1 {
                    return Err(Error::invalid(format!(
                        "{:?} takes exactly one session CSV, got {}",
                        self.subcommand,
                        self.inputs.len()
                    )));
                }
            }
        }
        for p in self.inputs.iter().chain(&self.embeddings) {
            if !p.exists() {
                return Err(Error::io(
                    p,
                    std::io::Error::from(std::io::ErrorKind::NotFound),
                ));
            }
        }
        let plan = &self.evaluate;
        if plan.kernels.is_empty() {
            return Err(Error::invalid("no kernels requested"));
        }
        for k in &plan.kernels {
            k.validate()?;
        }
        if self.subcommand == Subcommand::Evaluate {
            if plan.q.is_empty() || plan.modes.is_empty() || plan.channels.is_empty() {
                return Err(Error::invalid(
                    "q, mode and channel lists must be non-empty",
                ));
            }
            plan.weights.validate()?;
        }
        Ok(())
    }
}

/// Runs the manifest, writing its artifacts and a copy of the manifest into
/// the output directory.
pub fn execute(manifest: &RunManifest) -> Result<()> {
    manifest.validate()?;
    std::fs::create_dir_all(&manifest.out).map_err(|e| Error::io(&manifest.out, e))?;
    match manifest.subcommand {
        Subcommand::Preprocess => drop(cmd_preprocess(manifest)?),
        Subcommand::Simmatrix => drop(cmd_simmatrix(manifest)?),
        Subcommand::Evaluate => drop(cmd_evaluate(manifest)?),
        Subcommand::Synth => drop(cmd_synth(manifest)?),
    }
    manifest.save(&manifest.out.join(MANIFEST_FILE))
}

/// Expands directories into their `.wav` and `.csv` files, sorted by name.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && matches!(extension(f).as_deref(), Some("wav" | "csv")))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::invalid("no .wav or .csv inputs found"));
    }
    Ok(files)
}

fn extension(p: &Path) -> Option<String> {
    p.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
}

/// Parses `<user>_<session>_<mode>.<ext>`; the user id may contain underscores.
pub fn parse_session_name(path: &Path) -> Result<(String, String, Mode)> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let bad = || {
        Error::parse(
            path,
            None,
            "file name must look like <user>_<session>_<sit|stand>",
        )
    };
    let (rest, mode) = stem.rsplit_once('_').ok_or_else(bad)?;
    let (user, session) = rest.rsplit_once('_').ok_or_else(bad)?;
    if user.is_empty() || session.is_empty() {
        return Err(bad());
    }
    let mode: Mode = mode.parse().map_err(|_| bad())?;
    Ok((user.to_string(), session.to_string(), mode))
}

fn preprocess_file(path: &Path, cfg: &PreprocessConfig) -> Result<SessionRecord> {
    let (user_id, session_id, mode) = parse_session_name(path)?;
    let audio = match extension(path).as_deref() {
        Some("wav") => read_wav(path)?,
        Some("csv") => read_sample_column(path, cfg.sample_rate)?,
        _ => return Err(Error::parse(path, None, "expected a .wav or .csv file")),
    };
    let series = preprocess_session(&audio, cfg)?;
    Ok(SessionRecord {
        user_id,
        session_id,
        mode,
        series,
        embedding: None,
    })
}

/// Preprocesses every input into `sessions.csv`. All files are attempted;
/// failures are reported per file and make the command fail.
pub fn cmd_preprocess(manifest: &RunManifest) -> Result<PathBuf> {
    let files = collect_inputs(&manifest.inputs)?;
    let mut records = Vec::with_capacity(files.len());
    let mut messages = Vec::new();
    for f in &files {
        match preprocess_file(f, &manifest.preprocess) {
            Ok(r) => {
                log::info!("{}: {} points", r.key(), r.series.len());
                records.push(r);
            }
            Err(e) => {
                let msg = match e {
                    Error::Io { .. } | Error::Wav { .. } | Error::Parse { .. } => e.to_string(),
                    other => format!("{}: {other}", f.display()),
                };
                log::error!("{msg}");
                messages.push(msg);
            }
        }
    }
    if !messages.is_empty() {
        return Err(Error::Batch {
            failed: messages.len(),
            total: files.len(),
            messages,
        });
    }
    let dataset = Dataset::new(
        records,
        crate::dataset::Provenance::RawAudio,
        manifest.preprocess,
    )?;
    let out = manifest.out.join(SESSIONS_FILE);
    save_sessions_csv(&out, &dataset.records)?;
    log::info!("wrote {} sessions to {}", dataset.len(), out.display());
    Ok(out)
}

fn load_dataset(manifest: &RunManifest) -> Result<Dataset> {
    let mut ds =
        load_sessions_csv_with(&manifest.inputs[0], &manifest.preprocess, &manifest.schema)?;
    if let Some(p) = &manifest.embeddings {
        ds.attach_embeddings(load_embeddings(p)?)?;
    }
    log::info!(
        "loaded {} sessions from {}",
        ds.len(),
        manifest.inputs[0].display()
    );
    Ok(ds)
}

/// File-name-safe form of a kernel spec, e.g. `twed(nu=0.5)` → `twed_nu_0.5`.
pub fn kernel_slug(kernel: &Kernel) -> String {
    let s: String = kernel
        .to_string()
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    s.trim_end_matches('_').to_string()
}

pub fn matrix_file_name(kernel: &Kernel) -> String {
    format!("scores_{}.csv", kernel_slug(kernel))
}

/// Writes one score matrix per requested kernel.
pub fn cmd_simmatrix(manifest: &RunManifest) -> Result<Vec<PathBuf>> {
    let ds = load_dataset(manifest)?;
    let mut written = Vec::new();
    for kernel in &manifest.evaluate.kernels {
        let start = Instant::now();
        let m = crate::kernels::pairwise_matrix(&ds.records, kernel)?;
        log::info!(
            "{kernel}: {n}x{n} matrix in {:.3} s",
            start.elapsed().as_secs_f64(),
            n = m.len()
        );
        let path = manifest.out.join(matrix_file_name(kernel));
        artifacts::save_score_matrix(&path, &m)?;
        written.push(path);
    }
    Ok(written)
}

/// One evaluation in the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedRun {
    pub channel: Channel,
    pub mode: ModeFilter,
    pub config: DecisionConfig,
}

/// Expands the sweep and resolves relative q against each mode's smallest
/// per-user session count. Face rows do not depend on the kernel and are
/// emitted once.
pub fn plan_runs(plan: &EvalPlan, dataset: &Dataset) -> Result<Vec<PlannedRun>> {
    let mut runs = Vec::new();
    for &channel in &plan.channels {
        let kernels = if channel == Channel::Face {
            &plan.kernels[..1]
        } else {
            &plan.kernels[..]
        };
        for kernel in kernels {
            for &mode in &plan.modes {
                let counts = dataset.session_counts(mode);
                let n = counts.values().copied().min().unwrap_or(0);
                for q in &plan.q {
                    let q = q.resolve(n).map_err(|_| {
                        Error::invalid(format!(
                            "mode {mode}: target recall {q} is out of range for {n} sessions"
                        ))
                    })?;
                    runs.push(PlannedRun {
                        channel,
                        mode,
                        config: DecisionConfig {
                            kernel: kernel.clone(),
                            k: plan.k,
                            q,
                            weights: plan.weights,
                            aggregation: plan.aggregation,
                        },
                    });
                }
            }
        }
    }
    Ok(runs)
}

pub fn threshold_file_name(run: &PlannedRun) -> String {
    let kernel = if run.channel == Channel::Face {
        "face".to_string()
    } else {
        kernel_slug(&run.config.kernel)
    };
    format!(
        "{}_{}_{}_k{}_q{}.csv",
        run.channel, kernel, run.mode, run.config.k, run.config.q
    )
}

/// Runs the whole sweep. Every (k, q, mode) combination is validated
/// against the dataset before any distance is computed.
pub fn cmd_evaluate(manifest: &RunManifest) -> Result<EvalReport> {
    let ds = load_dataset(manifest)?;
    let runs = plan_runs(&manifest.evaluate, &ds)?;
    let needs_face = runs.iter().any(|r| r.channel != Channel::Blow);
    if needs_face && !ds.has_embeddings() {
        return Err(Error::invalid(
            "face and fused channels need embeddings for every session",
        ));
    }
    let mut evaluator = Evaluator::new(&ds);
    for r in &runs {
        evaluator.validate(&r.config, r.mode)?;
    }

    let thresholds_dir = manifest.out.join(THRESHOLD_DIR);
    std::fs::create_dir_all(&thresholds_dir).map_err(|e| Error::io(&thresholds_dir, e))?;
    let mut rows = Vec::with_capacity(runs.len());
    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    for r in &runs {
        let start = Instant::now();
        let outcome = evaluator.run(&r.config, r.mode, r.channel)?;
        *timings.entry(outcome.row.series.clone()).or_default() += start.elapsed().as_secs_f64();
        log::info!(
            "{} {} q={}: EER {:.4} accuracy {:.4}",
            outcome.row.series,
            r.mode,
            r.config.q,
            outcome.row.eer,
            outcome.row.accuracy
        );
        artifacts::save_thresholds(
            &thresholds_dir.join(threshold_file_name(r)),
            &outcome.thresholds,
        )?;
        rows.push(outcome.row);
    }
    for (series, secs) in &timings {
        log::info!("{series}: {secs:.3} s");
    }
    let report = EvalReport::new(rows);
    artifacts::save_report(&manifest.out.join(REPORT_CSV), &report)?;
    let txt = manifest.out.join(REPORT_TXT);
    std::fs::write(&txt, report.to_text()).map_err(|e| Error::io(&txt, e))?;
    Ok(report)
}

/// Writes a synthetic session CSV and, optionally, matching embeddings. The
/// manifest seed overrides the one inside the synthesis parameters.
pub fn cmd_synth(manifest: &RunManifest) -> Result<Dataset> {
    let params = SynthParams {
        seed: manifest.seed,
        ..manifest.synth.params
    };
    if params.is_degenerate() {
        log::warn!(
            "time and amplitude jitter are both zero: every user's sessions will be identical"
        );
    }
    let ds = synth_dataset(&params)?;
    save_sessions_csv(&manifest.out.join(SESSIONS_FILE), &ds.records)?;
    if let Some(sigma) = manifest.synth.face_sigma {
        if sigma == 0.0 {
            log::warn!("face sigma is zero: every user's embeddings will be identical");
        }
        // offset so the face stream is independent of the blow stream
        let emb = synth_embeddings(
            params.n_users,
            params.sessions_per_user,
            sigma,
            manifest.seed ^ 0x9e37_79b9,
        )?;
        save_embeddings(&manifest.out.join(EMBEDDINGS_FILE), &emb)?;
    }
    log::info!(
        "synthesised {} users x {} sessions of {} points",
        params.n_users,
        params.sessions_per_user,
        params.length
    );
    Ok(ds)
}

/// Splits a comma-separated list, ignoring commas inside parentheses so
/// that `dtw,twed(nu=0.5,lambda=0)` yields two items.
pub fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Kernel list from flags; `all` expands to every kernel with defaults.
pub fn parse_kernels(items: &[String]) -> Result<Vec<Kernel>> {
    let mut out = Vec::new();
    for item in items.iter().flat_map(|s| split_list(s)) {
        if item.eq_ignore_ascii_case("all") {
            out.extend(Kernel::all_defaults());
        } else {
            out.push(item.parse()?);
        }
    }
    Ok(out)
}

pub fn parse_list<T>(items: &[String]) -> Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    items
        .iter()
        .flat_map(|s| split_list(s))
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Error::invalid(format!("`{s}`: {e}")))
        })
        .collect()
}

mod kernel_strings {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::kernels::Kernel;

    pub fn serialize<S: Serializer>(kernels: &[Kernel], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(kernels.iter().map(|k| k.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Kernel>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}
