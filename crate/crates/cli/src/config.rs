//! Flat TOML run configuration. Every key is optional; command-line flags win.
//!
//! Keys:
//!
//! | key            | used by                    | default            |
//! |----------------|----------------------------|--------------------|
//! | `order`        | expand, correlate, renorm-eq | 2                |
//! | `d`            | diagrams, correlate, renorm-eq, sd, kernel | 3  |
//! | `nmax`         | diagrams                   | threshold for `d`  |
//! | `power`        | sd                         | 1                  |
//! | `sd_lambda_min`, `sd_lambda_max`, `sd_points` | sd | 0.05, 1.0, 6   |
//! | `n`            | kernel                     | 1                  |
//! | `a`, `b`       | kernel                     | 1.0, 2.0           |
//! | `kappa`        | kernel                     | 1.0                |
//! | `tol`          | kernel                     | 1e-10              |
//! | `kl_points`    | kernel --kl                | 20                 |
//! | `fit_functions`| kernel --fit               | 6                  |
//! | `seed`, `samples` | mc, kernel --kl         | 7, 10000           |
//! | `lambda`       | mc                         | 0.1                |
//! | `shift`        | mc                         | true               |
//! | `nx`, `nt`, `dx`, `dt`, `eps`, `t_window` | mc | lattice defaults |

use anyhow::Context;
use phi3ren::Error;
use serde::Deserialize;
use std::path::Path;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub order: Option<i64>,
    pub d: Option<u32>,
    pub nmax: Option<usize>,
    pub power: Option<u32>,
    pub sd_lambda_min: Option<f64>,
    pub sd_lambda_max: Option<f64>,
    pub sd_points: Option<usize>,
    pub n: Option<u32>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub kappa: Option<f64>,
    pub tol: Option<f64>,
    pub kl_points: Option<usize>,
    pub fit_functions: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub lambda: Option<f64>,
    pub shift: Option<bool>,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub eps: Option<f64>,
    pub t_window: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())).into())
    }
}
