//! Time-series distance kernels and batch pairwise evaluation.
//!
//! All kernels return a non-negative distance (smaller is more similar), are
//! symmetric, and give zero for identical inputs.

mod dtw;
mod euclidean;
mod matrix;
mod sbd;
mod shape_dtw;
mod shapelet;
mod twed;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::BlowSeries;

pub(crate) use self::dtw::{accumulated_cost, optimal_path};
pub use self::dtw::{dtw, dtw_banded, dtw_path, DtwParams};
pub use self::euclidean::euclidean;
pub use self::matrix::{pairwise_matrix, pairwise_series, ScoreMatrix};
pub use self::sbd::{cross_correlation, max_ncc, sbd};
pub use self::shape_dtw::{descriptors, shape_dtw, Descriptors, ShapeDtwParams};
pub use self::shapelet::{dtw_plus_s, shapelet_matrix, Shapelet, ShapeletConfig, ShapeletMatrix};
pub use self::twed::{twed, TwedParams};

/// A configured distance kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    #[serde(rename = "ed")]
    Euclidean,
    Dtw(DtwParams),
    #[serde(rename = "shapedtw")]
    ShapeDtw(ShapeDtwParams),
    #[serde(rename = "dtws")]
    DtwS(ShapeletConfig),
    Sbd,
    Twed(TwedParams),
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Dtw(DtwParams::default())
    }
}

impl Kernel {
    /// The six kernels with default parameters, in reporting order.
    pub fn all_defaults() -> Vec<Kernel> {
        vec![
            Kernel::Euclidean,
            Kernel::Dtw(DtwParams::default()),
            Kernel::ShapeDtw(ShapeDtwParams::default()),
            Kernel::DtwS(ShapeletConfig::default()),
            Kernel::Sbd,
            Kernel::Twed(TwedParams::default()),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Euclidean => "ed",
            Kernel::Dtw(_) => "dtw",
            Kernel::ShapeDtw(_) => "shapedtw",
            Kernel::DtwS(_) => "dtws",
            Kernel::Sbd => "sbd",
            Kernel::Twed(_) => "twed",
        }
    }

    /// Display label used in report tables.
    pub fn label(&self) -> &'static str {
        match self {
            Kernel::Euclidean => "ED",
            Kernel::Dtw(_) => "DTW",
            Kernel::ShapeDtw(_) => "shapeDTW",
            Kernel::DtwS(_) => "DTW+S",
            Kernel::Sbd => "SBD",
            Kernel::Twed(_) => "TWED",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::ShapeDtw(p) => p.validate(),
            Kernel::DtwS(c) => c.validate(),
            Kernel::Twed(p) => p.validate(),
            _ => Ok(()),
        }
    }

    pub fn distance(&self, x: &BlowSeries, y: &BlowSeries) -> Result<f64> {
        let a = self.prepare(x)?;
        let b = self.prepare(y)?;
        self.distance_prepared(&a, &b)
    }

    /// Precomputes the per-series representation so a series can be compared
    /// against many others without rebuilding it.
    pub fn prepare<'a>(&self, series: &'a BlowSeries) -> Result<Prepared<'a>> {
        let values = series.values();
        Ok(match self {
            Kernel::ShapeDtw(p) => Prepared::Descriptors(descriptors(values, p)?),
            Kernel::DtwS(c) => Prepared::Shapelets(shapelet_matrix(values, c)?),
            _ => Prepared::Raw {
                values,
                dt: series.dt(),
            },
        })
    }

    pub fn distance_prepared(&self, a: &Prepared<'_>, b: &Prepared<'_>) -> Result<f64> {
        use Prepared::*;
        match (self, a, b) {
            (Kernel::Euclidean, Raw { values: x, .. }, Raw { values: y, .. }) => euclidean(x, y),
            (Kernel::Dtw(p), Raw { values: x, .. }, Raw { values: y, .. }) => {
                dtw_banded(x, y, p.band)
            }
            (Kernel::Sbd, Raw { values: x, .. }, Raw { values: y, .. }) => sbd(x, y),
            (Kernel::Twed(p), Raw { values: x, dt: dx }, Raw { values: y, dt: dy }) => {
                if dx != dy {
                    return Err(Error::invalid(format!(
                        "TWED needs a common sampling interval, got {dx} and {dy}"
                    )));
                }
                twed(x, y, *dx, p)
            }
            (Kernel::ShapeDtw(p), Descriptors(x), Descriptors(y)) => {
                Ok(shape_dtw::descriptor_distance(x, y, p.band))
            }
            (Kernel::DtwS(_), Shapelets(x), Shapelets(y)) => Ok(shapelet::matrix_distance(x, y)),
            _ => Err(Error::invalid(format!(
                "representation does not match kernel {}",
                self.name()
            ))),
        }
    }
}

/// Kernel-specific representation of one series.
#[derive(Debug, Clone)]
pub enum Prepared<'a> {
    Raw { values: &'a [f64], dt: f64 },
    Descriptors(Descriptors),
    Shapelets(ShapeletMatrix),
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut params: Vec<String> = Vec::new();
        match self {
            Kernel::Dtw(p) => {
                if let Some(b) = p.band {
                    params.push(format!("band={b}"));
                }
            }
            Kernel::ShapeDtw(p) => {
                let d = ShapeDtwParams::default();
                if p.width != d.width {
                    params.push(format!("l={}", p.width));
                }
                if p.derivative != d.derivative {
                    params.push(format!("deriv={}", p.derivative));
                }
                if let Some(b) = p.band {
                    params.push(format!("band={b}"));
                }
            }
            Kernel::DtwS(c) => {
                let d = ShapeletConfig::default();
                if c.window != d.window {
                    params.push(format!("w={}", c.window));
                }
                if c.flat_scale != d.flat_scale {
                    params.push(format!("eps={}", c.flat_scale));
                }
                if !c.is_standard() {
                    params.push("custom".to_string());
                }
            }
            Kernel::Twed(p) => {
                let d = TwedParams::default();
                if p.stiffness != d.stiffness {
                    params.push(format!("nu={}", p.stiffness));
                }
                if p.gap_penalty != d.gap_penalty {
                    params.push(format!("lambda={}", p.gap_penalty));
                }
            }
            Kernel::Euclidean | Kernel::Sbd => {}
        }
        if params.is_empty() {
            f.write_str(self.name())
        } else {
            write!(f, "{}({})", self.name(), params.join(","))
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// Parses `name` or `name(key=value,...)`, e.g. `twed(nu=0.01,lambda=0.5)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::invalid(format!("unbalanced parentheses in `{s}`")))?;
                (&s[..open], inner)
            }
            None => (s, ""),
        };
        let mut pairs = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value, got `{part}`")))?;
            pairs.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
        let bad = |k: &str| Error::invalid(format!("unknown parameter `{k}` for kernel `{name}`"));
        fn num<T: FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::invalid(format!("bad value `{v}` for `{k}`")))
        }

        let kernel = match name.trim().to_ascii_lowercase().as_str() {
            "ed" | "euclidean" => {
                if let Some((k, _)) = pairs.first() {
                    return Err(bad(k));
                }
                Kernel::Euclidean
            }
            "dtw" => {
                let mut p = DtwParams::default();
                for (k, v) in &pairs {
                    match k.as_str() {
                        "band" => p.band = Some(num(k, v)?),
                        _ => return Err(bad(k)),
                    }
                }
                Kernel::Dtw(p)
            }
            "shapedtw" => {
                let mut p = ShapeDtwParams::default();
                for (k, v) in &pairs {
                    match k.as_str() {
                        "l" | "width" => p.width = num(k, v)?,
                        "deriv" | "derivative" => p.derivative = num(k, v)?,
                        "band" => p.band = Some(num(k, v)?),
                        _ => return Err(bad(k)),
                    }
                }
                Kernel::ShapeDtw(p)
            }
            "dtws" | "dtw+s" => {
                let d = ShapeletConfig::default();
                let (mut w, mut eps) = (d.window, d.flat_scale);
                for (k, v) in &pairs {
                    match k.as_str() {
                        "w" | "window" => w = num(k, v)?,
                        "eps" | "flat_scale" => eps = num(k, v)?,
                        _ => return Err(bad(k)),
                    }
                }
                Kernel::DtwS(ShapeletConfig::standard(w, eps))
            }
            "sbd" => {
                if let Some((k, _)) = pairs.first() {
                    return Err(bad(k));
                }
                Kernel::Sbd
            }
            "twed" => {
                let mut p = TwedParams::default();
                for (k, v) in &pairs {
                    match k.as_str() {
                        "nu" | "stiffness" => p.stiffness = num(k, v)?,
                        "lambda" | "gap_penalty" => p.gap_penalty = num(k, v)?,
                        _ => return Err(bad(k)),
                    }
                }
                Kernel::Twed(p)
            }
            other => return Err(Error::invalid(format!("unknown kernel `{other}`"))),
        };
        kernel.validate()?;
        Ok(kernel)
    }
}
