//! Measurement graphs: sets of simultaneous singlet projections on modes of
//! several copies of the two states.
//!
//! A graph lives on a [`ModeLayout`]; copy `c` owns modes `2c` (a) and
//! `2c + 1` (b). Each edge is one projection onto the two-qubit singlet.
//! Graphs print as `<layout>:<edges>`, for example `1122:a1-a3,b1-b3`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::state::{assemble, CorrelationMatrix, DensityMatrix, ModeLayout, StateId};

/// Sign of `sigma_l (x) sigma_l` in `P- = (1 - sum_i sigma_i (x) sigma_i) / 4`.
const SINGLET_SIGN: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

#[derive(Clone, Debug)]
pub struct MeasurementGraph {
    layout: ModeLayout,
    edges: Vec<(usize, usize)>,
    label: Option<String>,
}

impl MeasurementGraph {
    /// Validates that the edges form a matching on the layout's modes.
    pub fn new(layout: ModeLayout, edges: Vec<(usize, usize)>) -> Result<Self> {
        let modes = layout.mode_count();
        let mut used = vec![false; modes];
        let mut norm = Vec::with_capacity(edges.len());
        for (i, j) in edges {
            for m in [i, j] {
                if m >= modes {
                    return Err(Error::InvalidMode { mode: m, modes });
                }
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("edge joins mode {i} to itself")));
            }
            for m in [i, j] {
                if used[m] {
                    return Err(Error::InvalidGraph(format!("mode {} is in two edges", layout.mode_name(m))));
                }
                used[m] = true;
            }
            norm.push((i.min(j), i.max(j)));
        }
        norm.sort_unstable();
        Ok(Self { layout, edges: norm, label: None })
    }

    pub fn empty(layout: ModeLayout) -> Self {
        Self { layout, edges: Vec::new(), label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn copy_count(&self) -> usize {
        self.layout.copy_count()
    }

    /// Number of copies of state 1 and of state 2.
    pub fn signature(&self) -> (usize, usize) {
        let s = self.layout.states();
        let n1 = s.iter().filter(|&&x| x == StateId::One).count();
        (n1, s.len() - n1)
    }

    /// Representative under reordering of copies of the same state: copies
    /// of state 1 first, then the lexicographically smallest edge list.
    pub fn canonical(&self) -> Self {
        let states = self.layout.states();
        let (n1, n2) = self.signature();
        let layout = ModeLayout::canonical(n1, n2).expect("copy count already validated");
        let target = layout.states();
        let mut best: Option<Vec<(usize, usize)>> = None;
        for perm in permutations(states.len()) {
            if (0..states.len()).any(|i| states[perm[i]] != target[i]) {
                continue;
            }
            let mut inv = vec![0; perm.len()];
            for (new, &old) in perm.iter().enumerate() {
                inv[old] = new;
            }
            let mut e: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (2 * inv[a / 2] + a % 2, 2 * inv[b / 2] + b % 2);
                    (x.min(y), x.max(y))
                })
                .collect();
            e.sort_unstable();
            if best.as_ref().is_none_or(|b| e < *b) {
                best = Some(e);
            }
        }
        Self { layout, edges: best.unwrap_or_default(), label: self.label.clone() }
    }

    /// True if every copy carries an edge and the copies form one component.
    pub fn is_connected(&self) -> bool {
        let k = self.copy_count();
        if k == 0 {
            return false;
        }
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &[usize], mut x: usize) -> usize {
            while p[x] != x {
                x = p[x];
            }
            x
        }
        let mut touched = vec![false; k];
        for &(a, b) in &self.edges {
            touched[a / 2] = true;
            touched[b / 2] = true;
            let (x, y) = (find(&parent, a / 2), find(&parent, b / 2));
            parent[x] = y;
        }
        touched.iter().all(|&t| t) && (0..k).all(|c| find(&parent, c) == find(&parent, 0))
    }

    /// A state-preserving injection of this graph's copies into `host`'s
    /// copies that maps every edge onto a host edge.
    pub fn embedding_into(&self, host: &MeasurementGraph) -> Option<Vec<usize>> {
        let (k, hk) = (self.copy_count(), host.copy_count());
        if k > hk || self.edge_count() > host.edge_count() {
            return None;
        }
        let mine = self.layout.states();
        let theirs = host.layout.states();
        let host_edges: BTreeSet<(usize, usize)> = host.edges.iter().copied().collect();
        let mut map = vec![0usize; k];
        let mut used = vec![false; hk];
        fn search(
            c: usize,
            map: &mut [usize],
            used: &mut [bool],
            mine: &[StateId],
            theirs: &[StateId],
            edges: &[(usize, usize)],
            host_edges: &BTreeSet<(usize, usize)>,
        ) -> bool {
            if c == map.len() {
                return edges.iter().all(|&(a, b)| {
                    let (x, y) = (2 * map[a / 2] + a % 2, 2 * map[b / 2] + b % 2);
                    host_edges.contains(&(x.min(y), x.max(y)))
                });
            }
            for h in 0..theirs.len() {
                if !used[h] && theirs[h] == mine[c] {
                    used[h] = true;
                    map[c] = h;
                    if search(c + 1, map, used, mine, theirs, edges, host_edges) {
                        return true;
                    }
                    used[h] = false;
                }
            }
            false
        }
        search(0, &mut map, &mut used, &mine, &theirs, &self.edges, &host_edges).then_some(map)
    }

    fn key(&self) -> (Vec<StateId>, &[(usize, usize)]) {
        (self.layout.states(), &self.edges)
    }
}

impl PartialEq for MeasurementGraph {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for MeasurementGraph {}

impl Hash for MeasurementGraph {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for MeasurementGraph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MeasurementGraph {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.len().cmp(&b.0.len()).then(a.cmp(&b))
    }
}

impl fmt::Display for MeasurementGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.layout)?;
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}-{}", self.layout.mode_name(a), self.layout.mode_name(b))?;
        }
        Ok(())
    }
}

fn parse_mode(s: &str, copies: usize) -> Result<usize> {
    let bad = || Error::Parse(format!("bad mode name {s:?}"));
    let side = match s.chars().next() {
        Some('a') => 0,
        Some('b') => 1,
        _ => return Err(bad()),
    };
    let copy: usize = s[1..].parse().map_err(|_| bad())?;
    if copy == 0 || copy > copies {
        return Err(bad());
    }
    Ok(2 * (copy - 1) + side)
}

impl FromStr for MeasurementGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (layout, edges) = s.trim().split_once(':').ok_or_else(|| Error::Parse(format!("graph {s:?} lacks ':'")))?;
        let states = layout
            .chars()
            .map(|c| match c {
                '1' => Ok(StateId::One),
                '2' => Ok(StateId::Two),
                _ => Err(Error::Parse(format!("bad layout digit {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let layout = ModeLayout::from_states(&states)?;
        let mut list = Vec::new();
        for e in edges.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (a, b) = e.split_once('-').ok_or_else(|| Error::Parse(format!("bad edge {e:?}")))?;
            list.push((parse_mode(a, states.len())?, parse_mode(b, states.len())?));
        }
        Self::new(layout, list)
    }
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut cur, &mut used, &mut out);
    out
}

/// Bit permutation of computational basis indices exchanging the qubits of
/// each pair; qubit `q` of `n` is bit `n - 1 - q`.
fn swap_index(x: usize, pairs: &[(usize, usize)], n: usize) -> usize {
    let mut y = x;
    for &(i, j) in pairs {
        let (bi, bj) = (n - 1 - i, n - 1 - j);
        if ((y >> bi) & 1) != ((y >> bj) & 1) {
            y ^= (1 << bi) | (1 << bj);
        }
    }
    y
}

/// Probabilities that every pair in each subset of `pairs` gives the
/// singlet outcome, indexed by subset bitmask, on an assembled state.
///
/// Each singlet projector is `(1 - SWAP) / 2`, so the product over a subset
/// expands into traces of the state against qubit permutations.
pub fn subset_probabilities(rho: &DensityMatrix, pairs: &[(usize, usize)]) -> Vec<f64> {
    let n = rho.qubits();
    let dim = rho.dim();
    let m = rho.matrix();
    let k = pairs.len();
    let swap_trace: Vec<f64> = (0..1usize << k)
        .map(|mask| {
            let chosen: Vec<(usize, usize)> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
            (0..dim).map(|x| m.get(x, swap_index(x, &chosen, n))).sum::<C64>().re
        })
        .collect();
    (0..1usize << k)
        .map(|mask| {
            let mut acc = 0.0;
            let mut sub = mask;
            loop {
                let sign = if sub.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * swap_trace[sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
            (acc / f64::from(1u32 << mask.count_ones())).clamp(0.0, 1.0)
        })
        .collect()
}

fn check_pair_states(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<()> {
    for r in [rho1, rho2] {
        if r.dim() != 4 {
            return Err(Error::DimensionMismatch(r.dim(), 4));
        }
    }
    Ok(())
}

/// Success probability of every projection in `g` on the assembled copies,
/// computed on the dense multi-copy state.
pub fn graph_probability(g: &MeasurementGraph, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_pair_states(rho1, rho2)?;
    if g.edges.is_empty() {
        return Ok(1.0);
    }
    let rho = assemble(&[rho1.clone(), rho2.clone()], &g.layout)?;
    let p = subset_probabilities(&rho, &g.edges);
    Ok(p[p.len() - 1])
}

/// Expansion of a graph probability into products of correlation-matrix
/// entries, one factor per copy.
#[derive(Clone, Debug)]
pub struct BlochExpansion {
    terms: Vec<(f64, Vec<(usize, usize, usize)>)>,
}

impl BlochExpansion {
    pub fn new(g: &MeasurementGraph) -> Self {
        let states = g.layout.states();
        let e = g.edges.len();
        let mut terms = Vec::with_capacity(1 << (2 * e));
        let norm = 0.25f64.powi(e as i32);
        for code in 0..1usize << (2 * e) {
            let mut lab = vec![0usize; 2 * states.len()];
            let mut coef = norm;
            for (k, &(a, b)) in g.edges.iter().enumerate() {
                let l = (code >> (2 * k)) & 3;
                lab[a] = l;
                lab[b] = l;
                coef *= SINGLET_SIGN[l];
            }
            let factors = states.iter().enumerate().map(|(c, s)| (s.index(), lab[2 * c], lab[2 * c + 1])).collect();
            terms.push((coef, factors));
        }
        Self { terms }
    }

    pub fn evaluate(&self, r1: &CorrelationMatrix, r2: &CorrelationMatrix) -> f64 {
        let r = [r1.as_array(), r2.as_array()];
        self.terms
            .iter()
            .map(|(coef, f)| f.iter().fold(*coef, |acc, &(s, m, n)| acc * r[s][m][n]))
            .sum()
    }
}

/// The same probability from correlation matrices alone; no multi-copy
/// state is formed.
pub fn graph_probability_bloch(g: &MeasurementGraph, r1: &CorrelationMatrix, r2: &CorrelationMatrix) -> f64 {
    BlochExpansion::new(g).evaluate(r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{random_state, to_correlation, RandomMeasure};

    fn g(s: &str) -> MeasurementGraph {
        s.parse().unwrap()
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["12:a1-a2,b1-b2", "1122:a1-a3,b2-b4", "1:", "22:a1-b2"] {
            assert_eq!(g(s).to_string(), s);
        }
        assert!("12:a1-a1".parse::<MeasurementGraph>().is_err());
        assert!("12:a1-a2,a1-b2".parse::<MeasurementGraph>().is_err());
        assert!("12:a1-a3".parse::<MeasurementGraph>().is_err());
        assert!("13:".parse::<MeasurementGraph>().is_err());
    }

    #[test]
    fn canonical_sorts_copies_and_minimizes() {
        let a = g("2112:a1-a2,b3-b4").canonical();
        assert_eq!(a.layout().to_string(), "1122");
        let b = g("1212:a1-a2,b3-b4").canonical();
        assert_eq!(a, b.canonical());
        assert_eq!(g("11:a2-b2").canonical(), g("11:a1-b1"));
    }

    #[test]
    fn connectivity() {
        assert!(g("12:a1-a2").is_connected());
        assert!(!g("12:a1-b1").is_connected());
        assert!(!g("1122:a1-a2,a3-a4").is_connected());
        assert!(g("1122:a1-a2,b2-a3,b3-a4").is_connected());
    }

    #[test]
    fn embedding() {
        let host = g("1122:a1-a3,b1-b3,a2-a4");
        assert!(g("12:a1-a2").embedding_into(&host).is_some());
        assert_eq!(g("12:a1-a2,b1-b2").embedding_into(&host), Some(vec![0, 2]));
        assert!(g("11:a1-a2").embedding_into(&host).is_none());
    }

    #[test]
    fn dense_and_bloch_routes_agree() {
        let a = random_state(4, RandomMeasure::Ginibre, 11).unwrap();
        let b = random_state(4, RandomMeasure::Ginibre, 12).unwrap();
        let (r1, r2) = (to_correlation(&a).unwrap(), to_correlation(&b).unwrap());
        for s in ["12:a1-a2", "1122:a1-a3,b1-b4,a2-b2", "1212:a1-b4,b1-a2,b2-a3,b3-a4", "2:a1-b1"] {
            let graph = g(s);
            let d = graph_probability(&graph, &a, &b).unwrap();
            let f = graph_probability_bloch(&graph, &r1, &r2);
            assert!((d - f).abs() < 1e-13, "{s}: {d} vs {f}");
        }
    }
}
