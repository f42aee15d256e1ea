//! Shot-count sweeps of estimator bias, RMSE and error calibration against
//! the spectral oracle.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{EstimationOptions, EstimationSetup, Measure, PreparedExperiment};
use crate::oracle;
use crate::state::{derive_seed, random_state, DensityMatrix, RandomMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Ensemble {
    Ginibre,
    Pure,
    Rank(usize),
    /// Both states equal, drawn from the Ginibre ensemble.
    Identical,
}

impl Ensemble {
    pub fn pair(self, seed: u64) -> Result<(DensityMatrix, DensityMatrix)> {
        let measure = match self {
            Ensemble::Ginibre | Ensemble::Identical => RandomMeasure::Ginibre,
            Ensemble::Pure => RandomMeasure::Pure,
            Ensemble::Rank(k) => RandomMeasure::Rank(k),
        };
        let a = random_state(4, measure, derive_seed(seed, 0))?;
        let b = match self {
            Ensemble::Identical => a.clone(),
            _ => random_state(4, measure, derive_seed(seed, 1))?,
        };
        Ok((a, b))
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ensemble::Ginibre => f.write_str("ginibre"),
            Ensemble::Pure => f.write_str("pure"),
            Ensemble::Rank(k) => write!(f, "rank{k}"),
            Ensemble::Identical => f.write_str("identical"),
        }
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ginibre" => Ok(Ensemble::Ginibre),
            "pure" => Ok(Ensemble::Pure),
            "identical" => Ok(Ensemble::Identical),
            _ => s
                .strip_prefix("rank")
                .and_then(|k| k.parse().ok())
                .filter(|k| (1..=4).contains(k))
                .map(Ensemble::Rank)
                .ok_or_else(|| Error::Parse(format!("unknown ensemble {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepOptions {
    pub pairs: usize,
    /// Independent runs per pair and shot count.
    pub repeats: usize,
    pub shots: Vec<u64>,
    pub seed: u64,
    pub ensemble: Ensemble,
    pub measures: Vec<Measure>,
    pub bootstrap: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            pairs: 20,
            repeats: 5,
            shots: vec![10_000, 100_000, 1_000_000],
            seed: 1,
            ensemble: Ensemble::Ginibre,
            measures: Measure::ALL.to_vec(),
            bootstrap: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub shots: u64,
    pub measure: Measure,
    pub bias: f64,
    pub rmse: f64,
    pub mean_std_err: f64,
    /// Fraction of runs whose 4-sigma interval contains the oracle value.
    pub coverage: f64,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub options: SweepOptions,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, shots: u64, m: Measure) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.shots == shots && r.measure == m)
    }

    /// `rmse(lo) / rmse(hi)`.
    pub fn rmse_ratio(&self, m: Measure, lo: u64, hi: u64) -> Option<f64> {
        Some(self.row(lo, m)?.rmse / self.row(hi, m)?.rmse)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(["N", "measure", "bias", "rmse", "mean_std_err"]).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record([
                r.shots.to_string(),
                r.measure.to_string(),
                format!("{:.6e}", r.bias),
                format!("{:.6e}", r.rmse),
                format!("{:.6e}", r.mean_std_err),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn oracle_value(m: Measure, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    Ok(match m {
        Measure::HilbertSchmidtSq => oracle::hilbert_schmidt(rho1, rho2)?.powi(2),
        Measure::HilbertSchmidt => oracle::hilbert_schmidt(rho1, rho2)?,
        Measure::Superfidelity => oracle::sub_super_fidelity(rho1, rho2)?.1,
        Measure::Subfidelity => oracle::sub_super_fidelity(rho1, rho2)?.0,
        Measure::TraceDistance => oracle::trace_distance(rho1, rho2)?,
    })
}

/// Runs every pair at every shot count. Results depend only on the options.
pub fn run_sweep(setup: &EstimationSetup, opts: &SweepOptions) -> Result<SweepResult> {
    if opts.pairs == 0 || opts.repeats == 0 || opts.shots.is_empty() || opts.measures.is_empty() {
        return Err(Error::Parse("sweep needs pairs, repeats, shot counts and measures".into()));
    }
    let plan = setup.plan(&opts.measures)?;
    let pair_root = derive_seed(opts.seed, 0);
    let run_root = derive_seed(opts.seed, 1);
    // errors[pair][shot index][repeat][measure] = (estimate - oracle, std_err)
    let per_pair = (0..opts.pairs)
        .into_par_iter()
        .map(|i| {
            let (rho1, rho2) = opts.ensemble.pair(derive_seed(pair_root, i as u64))?;
            let truth = opts.measures.iter().map(|&m| oracle_value(m, &rho1, &rho2)).collect::<Result<Vec<_>>>()?;
            let exp = PreparedExperiment::new(setup, &plan, &opts.measures, &rho1, &rho2)?;
            let pair_seed = derive_seed(run_root, i as u64);
            opts.shots
                .iter()
                .enumerate()
                .map(|(k, &shots)| {
                    (0..opts.repeats)
                        .map(|r| {
                            let seed = derive_seed(derive_seed(pair_seed, k as u64), r as u64);
                            let rep = exp.run(&EstimationOptions { shots, seed, bootstrap: opts.bootstrap })?;
                            Ok(rep.estimates.iter().zip(&truth).map(|(e, t)| (e.estimate - t, e.std_err)).collect())
                        })
                        .collect::<Result<Vec<Vec<(f64, f64)>>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (k, &shots) in opts.shots.iter().enumerate() {
        for (j, &measure) in opts.measures.iter().enumerate() {
            let runs: Vec<(f64, f64)> = per_pair.iter().flat_map(|p| p[k].iter().map(|r| r[j])).collect();
            let n = runs.len() as f64;
            let covered = runs.iter().filter(|(d, s)| d.abs() <= 4.0 * s).count();
            rows.push(SweepRow {
                shots,
                measure,
                bias: runs.iter().map(|r| r.0).sum::<f64>() / n,
                rmse: (runs.iter().map(|r| r.0 * r.0).sum::<f64>() / n).sqrt(),
                mean_std_err: runs.iter().map(|r| r.1).sum::<f64>() / n,
                coverage: covered as f64 / n,
                runs: runs.len(),
            });
        }
    }
    Ok(SweepResult { options: opts.clone(), rows })
}
