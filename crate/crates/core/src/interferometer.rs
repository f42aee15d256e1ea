//! Simulated singlet-projection interferometry at the qubit level.
//!
//! A photon pair is one copy of a two-qubit state and an antibunching event
//! is the singlet outcome of the two-outcome measurement `{P-, 1 - P-}` on a
//! pair of modes. One configuration measures several disjoint mode pairs at
//! once; its joint outcome statistics give the probability of every graph
//! whose edges are a subset of those pairs.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{graph_probability, subset_probabilities, MeasurementGraph};
use crate::state::{assemble, rng_from_seed, DensityMatrix, ModeLayout, MAX_COPIES};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GraphOutcome {
    pub probability: f64,
    pub shots: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_err: f64,
}

impl GraphOutcome {
    pub fn new(probability: f64, shots: u64, successes: u64) -> Self {
        let estimate = if shots == 0 { 0.0 } else { successes as f64 / shots as f64 };
        let std_err = if shots == 0 { 0.0 } else { (estimate * (1.0 - estimate) / shots as f64).sqrt() };
        Self { probability, shots, successes, estimate, std_err }
    }
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("probability in (0, 1)").sample(rng)
}

/// Multinomial draw by successive conditional binomials.
pub(crate) fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut left = n;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == probs.len() {
            out[k] = left;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        out[k] = binomial(rng, left, q);
        left -= out[k];
        mass -= p;
    }
    out
}

/// Binomial counting of successful runs of `g` over `shots` repetitions.
pub fn sample_graph(
    g: &MeasurementGraph,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    shots: u64,
    seed: u64,
) -> Result<GraphOutcome> {
    if shots == 0 {
        return Err(Error::InvalidGraph("at least one shot is required".into()));
    }
    let p = graph_probability(g, rho1, rho2)?;
    let k = binomial(&mut rng_from_seed(seed), shots, p);
    Ok(GraphOutcome::new(p, shots, k))
}

/// Per-shot joint outcomes of a set of disjoint pair measurements. Bit `k`
/// of an outcome index is set when pair `k` gave the singlet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointCounts {
    pairs: Vec<(usize, usize)>,
    shots: u64,
    counts: Vec<u64>,
}

impl JointCounts {
    pub fn new(pairs: Vec<(usize, usize)>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != 1 << pairs.len() {
            return Err(Error::InvalidGraph(format!("{} counts for {} pairs", counts.len(), pairs.len())));
        }
        Ok(Self { pairs, shots: counts.iter().sum(), counts })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Shots in which every pair of `mask` gave the singlet, whatever the
    /// other pairs did.
    pub fn all_singlet_count(&self, mask: usize) -> u64 {
        self.counts.iter().enumerate().filter(|(o, _)| o & mask == mask).map(|(_, c)| c).sum()
    }

    pub fn all_singlet_frequency(&self, mask: usize) -> f64 {
        self.all_singlet_count(mask) as f64 / self.shots as f64
    }

    /// `[non-singlet, singlet]` counts of one pair.
    pub fn marginal(&self, pair: usize) -> [u64; 2] {
        let s = self.all_singlet_count(1 << pair);
        [self.shots - s, s]
    }
}

fn disjoint_pairs(layout: &ModeLayout, pairs: &[(usize, usize)]) -> Result<()> {
    MeasurementGraph::new(layout.clone(), pairs.to_vec()).map(|_| ())
}

/// Exact probability of every joint outcome, from subset probabilities by
/// inclusion-exclusion.
pub fn joint_probabilities(
    layout: &ModeLayout,
    pairs: &[(usize, usize)],
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<Vec<f64>> {
    disjoint_pairs(layout, pairs)?;
    let rho = assemble(&[rho1.clone(), rho2.clone()], layout)?;
    Ok(joint_from_subsets(&subset_probabilities(&rho, pairs)))
}

pub(crate) fn joint_from_subsets(q: &[f64]) -> Vec<f64> {
    let full = q.len() - 1;
    let mut p: Vec<f64> = (0..q.len())
        .map(|a| {
            let rest = full & !a;
            let mut acc = 0.0;
            let mut sub = rest;
            loop {
                let sign = if sub.count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                acc += sign * q[a | sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            acc.max(0.0)
        })
        .collect();
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|v| *v /= total);
    }
    p
}

/// Samples the joint singlet/non-singlet outcomes of all `pairs` per shot.
pub fn v_observable_sample(
    layout: &ModeLayout,
    pairs: &[(usize, usize)],
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    shots: u64,
    seed: u64,
) -> Result<JointCounts> {
    let p = joint_probabilities(layout, pairs, rho1, rho2)?;
    JointCounts::new(pairs.to_vec(), multinomial(&mut rng_from_seed(seed), shots, &p))
}

/// One interferometric setup: disjoint pair measurements on an assembled
/// multi-copy state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Configuration {
    #[serde(serialize_with = "serialize_layout")]
    pub layout: ModeLayout,
    pub pairs: Vec<(usize, usize)>,
    /// Indices into [`ConfigurationPlan::placements`] of the maximal graphs
    /// measured here.
    pub maximal: Vec<usize>,
    /// Copies consumed per shot.
    pub photon_pairs: usize,
}

fn serialize_layout<S: serde::Serializer>(l: &ModeLayout, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&l.to_string())
}

/// Where a required graph's probability is read off.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPlacement {
    pub graph: MeasurementGraph,
    /// `None` for a graph without edges, whose probability is 1.
    pub configuration: Option<usize>,
    /// Subset of the configuration's pairs forming the graph.
    pub mask: usize,
    /// Obtained from a larger graph's joint statistics.
    pub free: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConfigurationPlan {
    pub configurations: Vec<Configuration>,
    pub placements: Vec<GraphPlacement>,
}

impl ConfigurationPlan {
    pub fn total_photon_pairs(&self) -> usize {
        self.configurations.iter().map(|c| c.photon_pairs).sum()
    }

    pub fn maximal_count(&self) -> usize {
        self.placements.iter().filter(|p| p.configuration.is_some() && !p.free).count()
    }

    pub fn placement(&self, g: &MeasurementGraph) -> Option<&GraphPlacement> {
        let c = g.canonical();
        self.placements.iter().find(|p| p.graph == c)
    }

    /// Required graphs that the plan cannot supply.
    pub fn missing(&self, required: &[MeasurementGraph]) -> Vec<MeasurementGraph> {
        required.iter().filter(|g| g.edge_count() > 0 && self.placement(g).is_none()).cloned().collect()
    }
}

/// Keeps the graphs that do not embed into another required graph, then
/// packs them first-fit by decreasing copy count into configurations of at
/// most four copies. Every other graph is read from a host's statistics.
pub fn plan_configurations(required: &[MeasurementGraph]) -> ConfigurationPlan {
    let mut graphs: Vec<MeasurementGraph> = required.iter().map(|g| g.canonical()).collect();
    graphs.sort();
    graphs.dedup();
    let measured: Vec<&MeasurementGraph> = graphs.iter().filter(|g| g.edge_count() > 0).collect();
    let mut maximal: Vec<&MeasurementGraph> = measured
        .iter()
        .copied()
        .filter(|g| !measured.iter().any(|h| h != g && g.embedding_into(h).is_some()))
        .collect();
    maximal.sort_by(|a, b| b.copy_count().cmp(&a.copy_count()).then(a.cmp(b)));

    let mut bins: Vec<Vec<usize>> = Vec::new();
    let mut load: Vec<usize> = Vec::new();
    for (i, g) in maximal.iter().enumerate() {
        match load.iter().position(|&l| l + g.copy_count() <= MAX_COPIES) {
            Some(b) => {
                bins[b].push(i);
                load[b] += g.copy_count();
            }
            None => {
                bins.push(vec![i]);
                load.push(g.copy_count());
            }
        }
    }

    // (configuration, first pair index) of each maximal graph
    let mut seat = vec![(0usize, 0usize); maximal.len()];
    let mut plan = ConfigurationPlan::default();
    for (b, members) in bins.iter().enumerate() {
        let mut states = Vec::new();
        let mut pairs = Vec::new();
        for &i in members {
            let off = states.len();
            seat[i] = (b, pairs.len());
            states.extend(maximal[i].layout().states());
            pairs.extend(maximal[i].edges().iter().map(|&(x, y)| (x + 2 * off, y + 2 * off)));
        }
        let layout = ModeLayout::from_states(&states).expect("packing respects the copy limit");
        plan.configurations.push(Configuration { photon_pairs: layout.copy_count(), layout, pairs, maximal: Vec::new() });
    }

    for g in &graphs {
        if g.edge_count() == 0 {
            plan.placements.push(GraphPlacement { graph: g.clone(), configuration: None, mask: 0, free: true });
            continue;
        }
        let (host, map) = maximal
            .iter()
            .enumerate()
            .find_map(|(i, h)| g.embedding_into(h).map(|m| (i, m)))
            .expect("every graph embeds into a maximal graph");
        let (conf, first) = seat[host];
        let host_edges = maximal[host].edges();
        let mut mask = 0usize;
        for &(a, b) in g.edges() {
            let (x, y) = (2 * map[a / 2] + a % 2, 2 * map[b / 2] + b % 2);
            let k = host_edges.iter().position(|&e| e == (x.min(y), x.max(y))).expect("embedding maps edges");
            mask |= 1 << (first + k);
        }
        let free = maximal[host] != g;
        if !free {
            plan.configurations[conf].maximal.push(plan.placements.len());
        }
        plan.placements.push(GraphPlacement { graph: g.clone(), configuration: Some(conf), mask, free });
    }
    plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::state::{random_state, RandomMeasure};

    fn g(s: &str) -> MeasurementGraph {
        s.parse().unwrap()
    }

    fn singlet_state() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        DensityMatrix::from_pure(&[z, C64::new(h, 0.0), C64::new(-h, 0.0), z]).unwrap()
    }

    #[test]
    fn closed_form_probabilities() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let s = singlet_state();
        assert_eq!(graph_probability(&g("12:"), &s, &mixed).unwrap(), 1.0);
        assert!((graph_probability(&g("1:a1-b1"), &s, &mixed).unwrap() - 1.0).abs() < 1e-14);
        assert!((graph_probability(&g("22:a1-a2"), &s, &mixed).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn sampling_extremes() {
        let s = singlet_state();
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let one = sample_graph(&g("1:a1-b1"), &s, &mixed, 1000, 3).unwrap();
        assert_eq!(one.successes, 1000);
        let phi = {
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let z = C64::new(0.0, 0.0);
            DensityMatrix::from_pure(&[h, z, z, h]).unwrap()
        };
        let zero = sample_graph(&g("1:a1-b1"), &phi, &mixed, 1000, 3).unwrap();
        assert_eq!(zero.successes, 0);
    }

    #[test]
    fn joint_counts_marginalize() {
        let a = random_state(4, RandomMeasure::Ginibre, 1).unwrap();
        let b = random_state(4, RandomMeasure::Ginibre, 2).unwrap();
        let layout = ModeLayout::canonical(1, 1).unwrap();
        let c = v_observable_sample(&layout, &[(0, 2), (1, 3)], &a, &b, 10_000, 9).unwrap();
        assert_eq!(c.marginal(0)[0] + c.marginal(0)[1], c.shots());
        assert_eq!(c.counts()[0b01] + c.counts()[0b11], c.marginal(0)[1]);
        assert!(v_observable_sample(&layout, &[(0, 2), (2, 3)], &a, &b, 10, 9).is_err());
    }

    #[test]
    fn subgraph_is_free() {
        let plan = plan_configurations(&[g("12:a1-a2,b1-b2"), g("12:a1-a2")]);
        assert_eq!(plan.configurations.len(), 1);
        assert!(plan.placement(&g("12:a1-a2")).unwrap().free);
        assert!(!plan.placement(&g("12:a1-a2,b1-b2")).unwrap().free);
        assert!(plan.missing(&[g("11:a1-a2")]).len() == 1);
    }
}
