//! Side-by-side distance reports: spectral oracle, overlap formulas and,
//! optionally, interferometric estimates.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::estimation::{EstimationReport, Measure};
use crate::oracle::{distance_set, DistanceSet, InequalityCheck};
use crate::overlap::{distances_from_overlaps, moments_from_overlaps, overlap_set};
use crate::state::DensityMatrix;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Slack for the bound-chain audit.
pub const AUDIT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureRow {
    pub name: &'static str,
    pub oracle: f64,
    pub formula: Option<f64>,
    pub estimate: Option<f64>,
    pub std_err: Option<f64>,
    pub shots: Option<u64>,
    pub photon_pairs: Option<usize>,
}

impl MeasureRow {
    /// `|estimate - oracle| / std_err`.
    pub fn z_score(&self) -> Option<f64> {
        Some((self.estimate? - self.oracle).abs() / self.std_err?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub version: &'static str,
    pub seed: u64,
    pub labels: [String; 2],
    pub rows: Vec<MeasureRow>,
    pub oracle: DistanceSet,
    pub audit: Vec<InequalityCheck>,
    pub estimation: Option<EstimationReport>,
}

impl DistanceReport {
    pub fn build(
        labels: [&str; 2],
        rho1: &DensityMatrix,
        rho2: &DensityMatrix,
        seed: u64,
        estimation: Option<EstimationReport>,
    ) -> Result<Self> {
        let oracle = distance_set(rho1, rho2)?;
        let overlaps = overlap_set(rho1, rho2)?;
        let formula = distances_from_overlaps(&overlaps, &moments_from_overlaps(&overlaps))?;
        let est = |m: Measure| estimation.as_ref().and_then(|e| e.get(m).copied());
        let row = |name, oracle, formula: Option<f64>, m: Option<Measure>| {
            let e = m.and_then(est);
            MeasureRow {
                name,
                oracle,
                formula,
                estimate: e.map(|e| e.estimate),
                std_err: e.map(|e| e.std_err),
                shots: e.map(|e| e.shots),
                photon_pairs: e.map(|e| e.photon_pairs),
            }
        };
        let rows = vec![
            row("F", oracle.fidelity, None, None),
            row("E", oracle.subfidelity, Some(formula.subfidelity), Some(Measure::Subfidelity)),
            row("G", oracle.superfidelity, Some(formula.superfidelity), Some(Measure::Superfidelity)),
            row("H", oracle.hilbert_schmidt, Some(formula.hilbert_schmidt), Some(Measure::HilbertSchmidt)),
            row("T", oracle.trace_distance, Some(formula.trace_distance), Some(Measure::TraceDistance)),
        ];
        Ok(Self {
            version: VERSION,
            seed,
            labels: [labels[0].to_string(), labels[1].to_string()],
            rows,
            audit: oracle.audit(AUDIT_SLACK),
            oracle,
            estimation,
        })
    }

    pub fn row(&self, name: &str) -> Option<&MeasureRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn audit_passed(&self) -> bool {
        self.audit.iter().all(|c| c.pass)
    }

    pub fn violations(&self) -> Vec<&InequalityCheck> {
        self.audit.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "qdistance {}  seed {}", self.version, self.seed);
        let _ = writeln!(s, "rho1: {}\nrho2: {}\n", self.labels[0], self.labels[1]);
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(
            s,
            "{:<3} {:>10} {:>10} {:>10} {:>10} {:>12} {:>6}",
            "", "oracle", "formula", "estimate", "std_err", "shots", "pairs"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<3} {:>10.6} {:>10} {:>10} {:>10} {:>12} {:>6}",
                r.name,
                r.oracle,
                opt(r.formula),
                opt(r.estimate),
                r.std_err.map_or("-".to_string(), |v| format!("{v:.2e}")),
                r.shots.map_or("-".to_string(), |v| v.to_string()),
                r.photon_pairs.map_or("-".to_string(), |v| v.to_string()),
            );
        }
        if let Some(e) = &self.estimation {
            let _ = writeln!(
                s,
                "\n{} configurations, {} photon pairs per round, {} shots each",
                e.configurations, e.photon_pairs, e.shots_per_configuration
            );
        }
        let _ = writeln!(s, "\naudit (slack {AUDIT_SLACK:.0e}):");
        for c in &self.audit {
            let _ = writeln!(s, "  {:<4} {:<24} margin {:+.3e}", if c.pass { "ok" } else { "FAIL" }, c.name, c.margin);
        }
        s
    }
}
