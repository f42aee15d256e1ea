//! Distance estimates from simulated interferometric counts.
//!
//! Each fitted decomposition turns estimated graph probabilities into an
//! overlap or moment. Standard errors follow from the first-order delta
//! method: within one configuration the frequencies of "all pairs in `A`
//! gave the singlet" and "all pairs in `B` did" have covariance
//! `(q(A u B) - q(A) q(B)) / N`, and different configurations are
//! independent. The trace distance goes through the quartic, whose root map
//! has no useful Jacobian near degeneracies, so its error is a parametric
//! bootstrap over resampled counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::derive::{build_basis, fit_many, CoefficientVector, FitOptions, Target};
use crate::error::{Error, Result};
use crate::graph::{subset_probabilities, MeasurementGraph};
use crate::interferometer::{joint_from_subsets, multinomial, plan_configurations, ConfigurationPlan};
use crate::overlap::{trace_distance_via_moments_lenient, MomentSet};
use crate::state::{assemble, derive_seed, rng_from_seed, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Measure {
    /// `H^2 = Pi2`.
    HilbertSchmidtSq,
    HilbertSchmidt,
    Superfidelity,
    Subfidelity,
    TraceDistance,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::HilbertSchmidtSq,
        Measure::HilbertSchmidt,
        Measure::Superfidelity,
        Measure::Subfidelity,
        Measure::TraceDistance,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Measure::HilbertSchmidtSq => "H2",
            Measure::HilbertSchmidt => "H",
            Measure::Superfidelity => "G",
            Measure::Subfidelity => "E",
            Measure::TraceDistance => "T",
        }
    }

    /// Names of the fitted decompositions the measure is built from.
    pub fn fits(self) -> &'static [&'static str] {
        match self {
            Measure::HilbertSchmidtSq | Measure::HilbertSchmidt => &["pi2"],
            Measure::Superfidelity => &["11", "22", "12"],
            Measure::Subfidelity => &["12", "1212"],
            Measure::TraceDistance => &["pi2", "pi3", "pi4"],
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.symbol().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown measure {s:?}")))
    }
}

/// The decompositions needed by every measure.
#[derive(Clone, Debug)]
pub struct EstimationSetup {
    fits: BTreeMap<String, CoefficientVector>,
}

impl EstimationSetup {
    /// Fits `pi2`, `11`, `22`, `12` on the two-copy basis and `1212`, `pi3`,
    /// `pi4` on the four-copy basis.
    pub fn new(opts: &FitOptions) -> Result<Self> {
        let two: Vec<Target> = ["pi2", "11", "22", "12"].iter().map(|s| s.parse()).collect::<Result<_>>()?;
        let four: Vec<Target> = ["1212", "pi3", "pi4"].iter().map(|s| s.parse()).collect::<Result<_>>()?;
        let mut fits = fit_many(&two, &build_basis(2)?, opts)?;
        fits.extend(fit_many(&four, &build_basis(4)?, opts)?);
        Ok(Self::from_fits(fits))
    }

    /// Setup with default fit options, built once per process.
    pub fn standard() -> Result<&'static Self> {
        static CELL: OnceLock<std::result::Result<EstimationSetup, String>> = OnceLock::new();
        CELL.get_or_init(|| Self::new(&FitOptions::default()).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Setup(e.clone()))
    }

    pub fn from_fits(fits: Vec<CoefficientVector>) -> Self {
        Self { fits: fits.into_iter().map(|f| (f.target.clone(), f)).collect() }
    }

    pub fn fit(&self, name: &str) -> Option<&CoefficientVector> {
        self.fits.get(name)
    }

    pub fn fits(&self) -> impl Iterator<Item = &CoefficientVector> {
        self.fits.values()
    }

    fn fit_or_err(&self, name: &str) -> Result<&CoefficientVector> {
        self.fit(name).ok_or_else(|| Error::MissingGraphs(vec![format!("decomposition {name}")]))
    }

    pub fn required_graphs(&self, measures: &[Measure]) -> Result<Vec<MeasurementGraph>> {
        let mut set = BTreeSet::new();
        for m in measures {
            for f in m.fits() {
                set.extend(self.fit_or_err(f)?.support_graphs());
            }
        }
        Ok(set.into_iter().collect())
    }

    pub fn plan(&self, measures: &[Measure]) -> Result<ConfigurationPlan> {
        Ok(plan_configurations(&self.required_graphs(measures)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimationOptions {
    pub shots: u64,
    pub seed: u64,
    /// Bootstrap replicates for the trace distance.
    pub bootstrap: usize,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        Self { shots: 1_000_000, seed: 1, bootstrap: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub measure: Measure,
    pub estimate: f64,
    pub std_err: f64,
    pub configurations: usize,
    /// Copies consumed per round of the measure's configurations.
    pub photon_pairs: usize,
    pub shots: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimationReport {
    pub seed: u64,
    pub shots_per_configuration: u64,
    pub configurations: usize,
    pub photon_pairs: usize,
    pub estimates: Vec<MeasureEstimate>,
    /// Estimated decompositions with delta-method errors, by name.
    pub quantities: BTreeMap<String, (f64, f64)>,
}

impl EstimationReport {
    pub fn get(&self, m: Measure) -> Option<&MeasureEstimate> {
        self.estimates.iter().find(|e| e.measure == m)
    }
}

/// A plan bound to a state pair with exact joint outcome probabilities per
/// configuration, ready for repeated sampling.
#[derive(Clone, Debug)]
pub struct PreparedExperiment<'a> {
    setup: &'a EstimationSetup,
    plan: &'a ConfigurationPlan,
    measures: Vec<Measure>,
    joint: Vec<Vec<f64>>,
    /// `(configuration, mask)` of every required graph.
    slots: BTreeMap<MeasurementGraph, Option<(usize, usize)>>,
}

/// Value and gradient with respect to the `(configuration, mask)`
/// frequencies.
#[derive(Clone, Debug, Default)]
struct Lin {
    value: f64,
    grad: BTreeMap<(usize, usize), f64>,
}

impl Lin {
    fn constant(v: f64) -> Self {
        Self { value: v, grad: BTreeMap::new() }
    }

    fn axpy(mut self, a: f64, other: &Lin) -> Self {
        self.value += a * other.value;
        for (k, g) in &other.grad {
            *self.grad.entry(*k).or_default() += a * g;
        }
        self
    }

    fn mul(&self, other: &Lin) -> Self {
        let mut out = Lin::constant(self.value * other.value);
        for (k, g) in &self.grad {
            *out.grad.entry(*k).or_default() += g * other.value;
        }
        for (k, g) in &other.grad {
            *out.grad.entry(*k).or_default() += g * self.value;
        }
        out
    }

    fn scale_grad(mut self, s: f64, value: f64) -> Self {
        self.grad.values_mut().for_each(|g| *g *= s);
        self.value = value;
        self
    }
}

struct Frequencies<'b> {
    q: &'b [Vec<f64>],
    shots: f64,
}

impl Frequencies<'_> {
    fn variance(&self, l: &Lin) -> f64 {
        let mut v = 0.0;
        for (&(c1, m1), g1) in &l.grad {
            for (&(c2, m2), g2) in &l.grad {
                if c1 == c2 {
                    let q = &self.q[c1];
                    v += g1 * g2 * (q[m1 | m2] - q[m1] * q[m2]);
                }
            }
        }
        (v / self.shots).max(0.0)
    }

    /// Square root whose slope is capped at the scale of the argument's
    /// own noise, so a radicand near zero does not blow up the error.
    fn sqrt(&self, x: &Lin) -> Lin {
        let floor = self.variance(x).sqrt().sqrt();
        let r = x.value.max(0.0).sqrt();
        x.clone().scale_grad(0.5 / r.max(floor).max(f64::MIN_POSITIVE), r)
    }
}

impl<'a> PreparedExperiment<'a> {
    pub fn new(
        setup: &'a EstimationSetup,
        plan: &'a ConfigurationPlan,
        measures: &[Measure],
        rho1: &DensityMatrix,
        rho2: &DensityMatrix,
    ) -> Result<Self> {
        let required = setup.required_graphs(measures)?;
        let missing = plan.missing(&required);
        if !missing.is_empty() {
            return Err(Error::MissingGraphs(missing.iter().map(|g| g.to_string()).collect()));
        }
        let states = [rho1.clone(), rho2.clone()];
        let joint = plan
            .configurations
            .par_iter()
            .map(|c| Ok(joint_from_subsets(&subset_probabilities(&assemble(&states, &c.layout)?, &c.pairs))))
            .collect::<Result<Vec<_>>>()?;
        let slots = required
            .into_iter()
            .map(|g| {
                let p = plan.placement(&g).expect("coverage checked");
                let slot = p.configuration.map(|c| (c, p.mask));
                (g, slot)
            })
            .collect();
        Ok(Self { setup, plan, measures: measures.to_vec(), joint, slots })
    }

    /// Exact joint outcome probabilities per configuration.
    pub fn joint_probabilities(&self) -> &[Vec<f64>] {
        &self.joint
    }

    fn sample_counts(&self, probs: &[Vec<f64>], shots: u64, seed: u64) -> Vec<Vec<u64>> {
        probs
            .par_iter()
            .enumerate()
            .map(|(c, p)| multinomial(&mut rng_from_seed(derive_seed(seed, c as u64)), shots, p))
            .collect()
    }

    /// "All pairs in the mask gave the singlet" frequencies.
    fn subset_frequencies(counts: &[Vec<u64>], shots: u64) -> Vec<Vec<f64>> {
        counts
            .iter()
            .map(|c| {
                (0..c.len())
                    .map(|mask| {
                        c.iter().enumerate().filter(|(o, _)| o & mask == mask).map(|(_, n)| *n).sum::<u64>() as f64
                            / shots as f64
                    })
                    .collect()
            })
            .collect()
    }

    fn linear(&self, fit: &CoefficientVector, q: &[Vec<f64>]) -> Lin {
        let prob = |g: &MeasurementGraph| -> Lin {
            match self.slots.get(g).copied().flatten() {
                Some((c, m)) => Lin { value: q[c][m], grad: BTreeMap::from([((c, m), 1.0)]) },
                None => Lin::constant(1.0),
            }
        };
        let mut acc = Lin::constant(0.0);
        for t in &fit.terms {
            let mut prod = Lin::constant(1.0);
            for g in &t.graphs {
                prod = prod.mul(&prob(g));
            }
            acc = acc.axpy(t.coefficient.value(), &prod);
        }
        acc
    }

    fn moments(&self, q: &[Vec<f64>]) -> Result<MomentSet> {
        let v = |n: &str| -> Result<f64> { Ok(self.linear(self.setup.fit_or_err(n)?, q).value) };
        Ok(MomentSet { pi1: 0.0, pi2: v("pi2")?, pi3: v("pi3")?, pi4: v("pi4")? })
    }

    pub fn run(&self, opts: &EstimationOptions) -> Result<EstimationReport> {
        if opts.shots == 0 {
            return Err(Error::InvalidGraph("at least one shot is required".into()));
        }
        let counts = self.sample_counts(&self.joint, opts.shots, opts.seed);
        let q = Self::subset_frequencies(&counts, opts.shots);
        let freq = Frequencies { q: &q, shots: opts.shots as f64 };

        let names: BTreeSet<&str> = self.measures.iter().flat_map(|m| m.fits().iter().copied()).collect();
        let mut lin = BTreeMap::new();
        for n in names {
            lin.insert(n, self.linear(self.setup.fit_or_err(n)?, &q));
        }
        let quantities = lin.iter().map(|(n, l)| (n.to_string(), (l.value, freq.variance(l).sqrt()))).collect();

        let mut estimates = Vec::new();
        for &m in &self.measures {
            let (estimate, std_err) = match m {
                Measure::HilbertSchmidtSq => {
                    let p = &lin["pi2"];
                    (p.value, freq.variance(p).sqrt())
                }
                Measure::HilbertSchmidt => {
                    let h = freq.sqrt(&lin["pi2"]);
                    (h.value, freq.variance(&h).sqrt())
                }
                Measure::Superfidelity => {
                    let one = Lin::constant(1.0);
                    let a = one.clone().axpy(-1.0, &lin["11"]);
                    let b = one.axpy(-1.0, &lin["22"]);
                    let g = lin["12"].clone().axpy(1.0, &freq.sqrt(&a.mul(&b)));
                    (g.value, freq.variance(&g).sqrt())
                }
                Measure::Subfidelity => {
                    let o = &lin["12"];
                    let rad = o.mul(o).axpy(-1.0, &lin["1212"]);
                    let rad = Lin::constant(0.0).axpy(2.0, &rad);
                    let e = o.clone().axpy(1.0, &freq.sqrt(&rad));
                    (e.value, freq.variance(&e).sqrt())
                }
                Measure::TraceDistance => {
                    let t = trace_distance_via_moments_lenient(&self.moments(&q)?);
                    (t, self.bootstrap_t(&counts, opts)?)
                }
            };
            let confs: BTreeSet<usize> = m
                .fits()
                .iter()
                .flat_map(|n| self.setup.fit(n).into_iter().flat_map(|f| f.support_graphs()))
                .filter_map(|g| self.slots.get(&g).copied().flatten().map(|(c, _)| c))
                .collect();
            estimates.push(MeasureEstimate {
                measure: m,
                estimate,
                std_err,
                configurations: confs.len(),
                photon_pairs: confs.iter().map(|&c| self.plan.configurations[c].photon_pairs).sum(),
                shots: confs.len() as u64 * opts.shots,
            });
        }
        Ok(EstimationReport {
            seed: opts.seed,
            shots_per_configuration: opts.shots,
            configurations: self.plan.configurations.len(),
            photon_pairs: self.plan.total_photon_pairs(),
            estimates,
            quantities,
        })
    }

    fn bootstrap_t(&self, counts: &[Vec<u64>], opts: &EstimationOptions) -> Result<f64> {
        if opts.bootstrap < 2 {
            return Ok(f64::NAN);
        }
        let n = opts.shots as f64;
        let p_hat: Vec<Vec<f64>> = counts.iter().map(|c| c.iter().map(|&k| k as f64 / n).collect()).collect();
        let root = derive_seed(opts.seed, u64::MAX);
        let reps: Vec<f64> = (0..opts.bootstrap)
            .into_par_iter()
            .map(|b| {
                let c = self.sample_counts(&p_hat, opts.shots, derive_seed(root, b as u64));
                let q = Self::subset_frequencies(&c, opts.shots);
                Ok(trace_distance_via_moments_lenient(&self.moments(&q)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let finite: Vec<f64> = reps.into_iter().filter(|v| v.is_finite()).collect();
        if finite.len() < 2 {
            return Ok(f64::NAN);
        }
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (finite.len() - 1) as f64;
        Ok(var.sqrt())
    }
}

/// Samples every configuration of `plan` and reconstructs the requested
/// measures with standard errors.
pub fn estimate_distances(
    setup: &EstimationSetup,
    plan: &ConfigurationPlan,
    measures: &[Measure],
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    opts: &EstimationOptions,
) -> Result<EstimationReport> {
    PreparedExperiment::new(setup, plan, measures, rho1, rho2)?.run(opts)
}
