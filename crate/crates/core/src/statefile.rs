//! JSON state files.
//!
//! A file holds a `label` and exactly one of
//!
//! ```json
//! "density_matrix": { "re": [[...], ...], "im": [[...], ...] }
//! "correlation_matrix": [[R00, R01, R02, R03], ...]
//! ```
//!
//! Matrices are 4x4 and row-major. `im` may be omitted for real matrices.
//! Correlation entries are `R_mn = Tr(rho sigma_m (x) sigma_n)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::state::{from_correlation_array, to_correlation, DensityMatrix};

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DenseParts {
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawStateFile {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density_matrix: Option<DenseParts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    correlation_matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateFile {
    pub label: String,
    pub state: DensityMatrix,
}

fn square4(rows: &[Vec<f64>], field: &str) -> Result<[[f64; 4]; 4]> {
    if rows.len() != 4 {
        return Err(Error::Parse(format!("{field}: expected 4 rows, found {}", rows.len())));
    }
    let mut out = [[0.0; 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        if row.len() != 4 {
            return Err(Error::Parse(format!("{field}[{i}]: expected 4 entries, found {}", row.len())));
        }
        out[i].copy_from_slice(row);
    }
    Ok(out)
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawStateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let state = match (&raw.density_matrix, &raw.correlation_matrix) {
            (Some(d), None) => {
                let re = square4(&d.re, "density_matrix.re")?;
                let im = match &d.im {
                    Some(im) => square4(im, "density_matrix.im")?,
                    None => [[0.0; 4]; 4],
                };
                let entries: Vec<C64> =
                    (0..16).map(|k| C64::new(re[k / 4][k % 4], im[k / 4][k % 4])).collect();
                DensityMatrix::new(ComplexMatrix::from_row_major(4, &entries)?)?
            }
            (None, Some(r)) => from_correlation_array(&square4(r, "correlation_matrix")?)?,
            (Some(_), Some(_)) => {
                return Err(Error::Parse("give either density_matrix or correlation_matrix, not both".into()))
            }
            (None, None) => return Err(Error::Parse("missing density_matrix or correlation_matrix".into())),
        };
        Ok(Self { label: raw.label, state })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Dense representation as pretty JSON.
    pub fn to_json(&self) -> String {
        let m = self.state.matrix();
        let part = |f: fn(C64) -> f64| (0..4).map(|i| (0..4).map(|j| f(m.get(i, j))).collect()).collect();
        let raw = RawStateFile {
            label: self.label.clone(),
            density_matrix: Some(DenseParts { re: part(|z| z.re), im: Some(part(|z| z.im)) }),
            correlation_matrix: None,
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }

    /// Correlation-matrix representation as pretty JSON.
    pub fn to_correlation_json(&self) -> Result<String> {
        let r = to_correlation(&self.state)?;
        let raw = RawStateFile {
            label: self.label.clone(),
            density_matrix: None,
            correlation_matrix: Some(r.as_array().iter().map(|row| row.to_vec()).collect()),
        };
        Ok(serde_json::to_string_pretty(&raw).expect("plain data serializes"))
    }
}
