//! CSV persistence for score matrices, thresholds and evaluation reports.
//!
//! Each file starts with a `# blowmatch <kind> v<version>` line; loading
//! rejects any other kind or version. Floats are written in Rust's shortest
//! round-trip form, so `save(load(save(x)))` reproduces `save(x)` byte for byte.

use std::path::Path;

use crate::dataset::ModeFilter;
use crate::error::{Error, Result};
use crate::evaluation::{ConfusionCounts, ReportRow};
use crate::fusion::{ChannelBounds, DecisionConfig, FusionWeights, NormBounds, Threshold};
use crate::kernels::{Kernel, ScoreMatrix};
use crate::report::EvalReport;

pub const FORMAT_VERSION: u32 = 1;

const MATRIX_KIND: &str = "score_matrix";
const THRESHOLD_KIND: &str = "thresholds";
const REPORT_KIND: &str = "eval_report";

const THRESHOLD_HEADER: [&str; 12] = [
    "user_id",
    "kernel",
    "k",
    "q",
    "tau",
    "w_blow",
    "w_face",
    "norm_min_blow",
    "norm_max_blow",
    "norm_min_face",
    "norm_max_face",
    "aggregation",
];

const REPORT_HEADER: [&str; 14] = [
    "series", "channel", "kernel", "mode", "k", "q", "eer", "accuracy", "far", "frr", "tp", "fn",
    "fp", "tn",
];

fn preamble(kind: &str, extra: &str) -> String {
    if extra.is_empty() {
        format!("# blowmatch {kind} v{FORMAT_VERSION}\n")
    } else {
        format!("# blowmatch {kind} v{FORMAT_VERSION} {extra}\n")
    }
}

/// Splits off and checks the preamble; returns its trailing fields and the CSV body.
fn check_preamble<'a>(path: &Path, text: &'a str, kind: &str) -> Result<(&'a str, &'a str)> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let expected = format!("# blowmatch {kind} v{FORMAT_VERSION}");
    let rest = first.strip_prefix(&expected).ok_or_else(|| Error::Schema {
        path: path.to_path_buf(),
        expected: expected.clone(),
        found: first.to_string(),
    })?;
    if !(rest.is_empty() || rest.starts_with(' ')) {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            expected,
            found: first.to_string(),
        });
    }
    Ok((rest.trim(), body))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(path: &Path, head: String, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let body = w
        .into_inner()
        .map_err(|e| Error::parse(path, None, e.to_string()))?;
    let mut bytes = head.into_bytes();
    bytes.extend(body);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::parse(path, Some(line), format!("bad {name} `{raw}`")))
}

fn optional(
    path: &Path,
    line: u64,
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<Option<f64>> {
    match rec.get(i).unwrap_or("") {
        "" => Ok(None),
        _ => field(path, line, rec, i, name).map(Some),
    }
}

fn opt_str(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::parse(path, None, e.to_string())
}

pub fn save_score_matrix(path: &Path, m: &ScoreMatrix) -> Result<()> {
    let mut w = csv_writer();
    let mut header = vec!["session".to_string()];
    header.extend(m.ids().iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, id) in m.ids().iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(m.row(i).iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    finish(
        path,
        preamble(MATRIX_KIND, &format!("kernel={}", m.kernel())),
        w,
    )
}

pub fn load_score_matrix(path: &Path) -> Result<ScoreMatrix> {
    let text = read(path)?;
    let (extra, body) = check_preamble(path, &text, MATRIX_KIND)?;
    let kernel = extra
        .strip_prefix("kernel=")
        .ok_or_else(|| Error::parse(path, Some(1), "missing kernel= in preamble"))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.get(0) != Some("session") {
        return Err(Error::parse(
            path,
            Some(2),
            "first header cell must be `session`",
        ));
    }
    let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut values = Vec::with_capacity(ids.len() * ids.len());
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let line = i as u64 + 3;
        let rec = rec.map_err(|e| Error::parse(path, Some(line), e.to_string()))?;
        if rec.get(0) != ids.get(i).map(String::as_str) {
            return Err(Error::parse(
                path,
                Some(line),
                "row label does not match column order",
            ));
        }
        for c in 1..=ids.len() {
            values.push(field::<f64>(path, line, &rec, c, "distance")?);
        }
        rows += 1;
    }
    if rows != ids.len() {
        return Err(Error::parse(
            path,
            None,
            format!("expected {} rows, found {rows}", ids.len()),
        ));
    }
    ScoreMatrix::new(ids, kernel, values)
}

pub fn save_thresholds(path: &Path, thresholds: &[Threshold]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(THRESHOLD_HEADER).map_err(csv_err(path))?;
    for t in thresholds {
        let c = &t.config;
        w.write_record([
            t.user_id.clone(),
            c.kernel.to_string(),
            c.k.to_string(),
            c.q.to_string(),
            t.tau.to_string(),
            c.weights.blow.to_string(),
            c.weights.face.to_string(),
            opt_str(t.bounds.blow.map(|b| b.min)),
            opt_str(t.bounds.blow.map(|b| b.max)),
            opt_str(t.bounds.face.map(|b| b.min)),
            opt_str(t.bounds.face.map(|b| b.max)),
            c.aggregation.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    finish(path, preamble(THRESHOLD_KIND, ""), w)
}

fn bounds(
    path: &Path,
    line: u64,
    min: Option<f64>,
    max: Option<f64>,
) -> Result<Option<NormBounds>> {
    match (min, max) {
        (Some(min), Some(max)) => Ok(Some(NormBounds { min, max })),
        (None, None) => Ok(None),
        _ => Err(Error::parse(
            path,
            Some(line),
            "normalisation bounds need both min and max",
        )),
    }
}

pub fn load_thresholds(path: &Path) -> Result<Vec<Threshold>> {
    let text = read(path)?;
    let (_, body) = check_preamble(path, &text, THRESHOLD_KIND)?;
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    check_header(
        path,
        &r.headers().map_err(csv_err(path))?.clone(),
        &THRESHOLD_HEADER,
    )?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i as u64 + 3;
        let rec = rec.map_err(|e| Error::parse(path, Some(line), e.to_string()))?;
        let kernel: Kernel = field(path, line, &rec, 1, "kernel")?;
        let weights = FusionWeights {
            blow: field(path, line, &rec, 5, "w_blow")?,
            face: field(path, line, &rec, 6, "w_face")?,
        };
        weights
            .validate()
            .map_err(|e| Error::parse(path, Some(line), e.to_string()))?;
        out.push(Threshold {
            user_id: rec[0].to_string(),
            tau: field(path, line, &rec, 4, "tau")?,
            config: DecisionConfig {
                kernel,
                k: field(path, line, &rec, 2, "k")?,
                q: field(path, line, &rec, 3, "q")?,
                weights,
                aggregation: field(path, line, &rec, 11, "aggregation")?,
            },
            bounds: ChannelBounds {
                blow: bounds(
                    path,
                    line,
                    optional(path, line, &rec, 7, "norm_min_blow")?,
                    optional(path, line, &rec, 8, "norm_max_blow")?,
                )?,
                face: bounds(
                    path,
                    line,
                    optional(path, line, &rec, 9, "norm_min_face")?,
                    optional(path, line, &rec, 10, "norm_max_face")?,
                )?,
            },
        });
    }
    Ok(out)
}

pub fn save_report(path: &Path, report: &EvalReport) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(REPORT_HEADER).map_err(csv_err(path))?;
    for r in &report.rows {
        w.write_record([
            r.series.clone(),
            r.channel.to_string(),
            r.kernel.to_string(),
            r.mode.to_string(),
            r.k.to_string(),
            r.q.to_string(),
            r.eer.to_string(),
            r.accuracy.to_string(),
            r.far.to_string(),
            r.frr.to_string(),
            r.counts.true_pos.to_string(),
            r.counts.false_neg.to_string(),
            r.counts.false_pos.to_string(),
            r.counts.true_neg.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    finish(path, preamble(REPORT_KIND, ""), w)
}

pub fn load_report(path: &Path) -> Result<EvalReport> {
    let text = read(path)?;
    let (_, body) = check_preamble(path, &text, REPORT_KIND)?;
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    check_header(
        path,
        &r.headers().map_err(csv_err(path))?.clone(),
        &REPORT_HEADER,
    )?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i as u64 + 3;
        let rec = rec.map_err(|e| Error::parse(path, Some(line), e.to_string()))?;
        let mode: ModeFilter = field(path, line, &rec, 3, "mode")?;
        rows.push(ReportRow {
            series: rec[0].to_string(),
            channel: field(path, line, &rec, 1, "channel")?,
            kernel: field(path, line, &rec, 2, "kernel")?,
            mode,
            k: field(path, line, &rec, 4, "k")?,
            q: field(path, line, &rec, 5, "q")?,
            eer: field(path, line, &rec, 6, "eer")?,
            accuracy: field(path, line, &rec, 7, "accuracy")?,
            far: field(path, line, &rec, 8, "far")?,
            frr: field(path, line, &rec, 9, "frr")?,
            counts: ConfusionCounts {
                true_pos: field(path, line, &rec, 10, "tp")?,
                false_neg: field(path, line, &rec, 11, "fn")?,
                false_pos: field(path, line, &rec, 12, "fp")?,
                true_neg: field(path, line, &rec, 13, "tn")?,
            },
        });
    }
    Ok(EvalReport::new(rows))
}
