//! Face channel: cosine distance between precomputed 512-d embeddings.

use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{synthetic_session_id, synthetic_user_id};
use crate::error::{Error, Result};

pub const EMBEDDING_DIM: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct FaceEmbedding {
    pub user_id: String,
    pub session_id: String,
    vector: Vec<f64>,
}

impl FaceEmbedding {
    pub fn new(
        user_id: impl Into<String>,
        session_id: impl Into<String>,
        vector: Vec<f64>,
    ) -> Result<Self> {
        if vector.len() != EMBEDDING_DIM {
            return Err(Error::invalid(format!(
                "embedding must have {EMBEDDING_DIM} dimensions, got {}",
                vector.len()
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding contains non-finite values"));
        }
        if norm(&vector) == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            user_id: user_id.into(),
            session_id: session_id.into(),
            vector,
        })
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `1 - cos(a, b)`, clamped to `[0, 2]`.
pub fn cosine_distance_vectors(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((1.0 - dot / (na * nb)).clamp(0.0, 2.0))
}

pub fn cosine_distance(a: &FaceEmbedding, b: &FaceEmbedding) -> Result<f64> {
    cosine_distance_vectors(&a.vector, &b.vector)
}

/// Reads `user_id,session_id,e0..e511` rows. Row numbers in errors count the
/// header as line 1.
pub fn load_embeddings(path: &Path) -> Result<Vec<FaceEmbedding>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, Some(1), e.to_string()))?
        .clone();
    if headers.get(0) != Some("user_id") || headers.get(1) != Some("session_id") {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            expected: "user_id,session_id,e0..e511".into(),
            found: headers.iter().take(3).collect::<Vec<_>>().join(","),
        });
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| Error::parse(path, Some(line), e.to_string()))?;
        let found = record.len().saturating_sub(2);
        if found != EMBEDDING_DIM {
            return Err(Error::parse(
                path,
                Some(line),
                format!("expected {EMBEDDING_DIM} embedding values, found {found}"),
            ));
        }
        let user = record[0].to_string();
        let session = record[1].to_string();
        let vector = record
            .iter()
            .skip(2)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(path, Some(line), format!("bad float `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !seen.insert((user.clone(), session.clone())) {
            return Err(Error::parse(
                path,
                Some(line),
                format!("duplicate embedding for {user}/{session}"),
            ));
        }
        let emb = FaceEmbedding::new(user, session, vector)
            .map_err(|e| Error::parse(path, Some(line), e.to_string()))?;
        out.push(emb);
    }
    Ok(out)
}

pub fn save_embeddings(path: &Path, embeddings: &[FaceEmbedding]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| Error::parse(path, None, e.to_string()))?;
    let mut header = vec!["user_id".to_string(), "session_id".to_string()];
    header.extend((0..EMBEDDING_DIM).map(|i| format!("e{i}")));
    let csv_err = |e: csv::Error| Error::parse(path, None, e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for e in embeddings {
        let mut row = vec![e.user_id.clone(), e.session_id.clone()];
        row.extend(e.vector.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per user a random unit anchor; each session is the anchor plus isotropic
/// Gaussian noise of standard deviation `sigma`, renormalised to unit length.
/// Ids match [`crate::dataset::synth_dataset`].
pub fn synth_embeddings(
    n_users: usize,
    sessions_per_user: usize,
    sigma: f64,
    seed: u64,
) -> Result<Vec<FaceEmbedding>> {
    if n_users == 0 || sessions_per_user == 0 {
        return Err(Error::invalid("need at least one user and one session"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let noise = Normal::new(0.0, sigma).expect("sigma checked above");
    let mut out = Vec::with_capacity(n_users * sessions_per_user);
    for u in 0..n_users {
        let anchor = loop {
            let v: Vec<f64> = (0..EMBEDDING_DIM).map(|_| unit.sample(&mut rng)).collect();
            let n = norm(&v);
            if n > 0.0 {
                break v.into_iter().map(|x| x / n).collect::<Vec<f64>>();
            }
        };
        for s in 0..sessions_per_user {
            let mut v: Vec<f64> = anchor.iter().map(|a| a + noise.sample(&mut rng)).collect();
            let n = norm(&v);
            if n == 0.0 {
                v.clone_from(&anchor);
            } else {
                v.iter_mut().for_each(|x| *x /= n);
            }
            out.push(FaceEmbedding::new(
                synthetic_user_id(u),
                synthetic_session_id(s),
                v,
            )?);
        }
    }
    Ok(out)
}
