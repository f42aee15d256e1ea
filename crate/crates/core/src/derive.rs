//! Numerical rederivation of graph decompositions.
//!
//! Every target functional of a state pair (a moment `Tr(rho1 - rho2)^n` or
//! a trace of a word in the two states) is a polynomial in measurement-graph
//! probabilities. The coefficients are recovered by evaluating the target
//! and every candidate monomial on random state pairs, selecting an
//! independent set of columns, solving by least squares and snapping to
//! thirds. A fit is accepted only if it reproduces the target on fresh
//! held-out pairs.
//!
//! Columns are scanned with the monomials carrying the most projections
//! first; a column enters the selection when its Gram-Schmidt residual
//! against the columns already chosen exceeds `1e-8` of its norm. The
//! resulting support is a basic solution; [`FitOptions::prune`] further
//! removes graphs one at a time while a representation survives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BlochExpansion, MeasurementGraph};
use crate::interferometer::plan_configurations;
use crate::overlap::Word;
use crate::state::{
    derive_seed, random_state_with, rng_from_seed, to_correlation, CorrelationMatrix, DensityMatrix, ModeLayout,
    RandomMeasure, MAX_COPIES,
};

/// Gram-Schmidt acceptance threshold relative to the column norm.
pub const INDEPENDENCE_TOL: f64 = 1e-8;
/// Coefficients at or below this magnitude are dropped.
pub const COEFFICIENT_TOL: f64 = 1e-7;
/// Distance to the nearest multiple of 1/3 within which a coefficient snaps.
pub const SNAP_TOL: f64 = 1e-7;
pub const HELD_OUT_TOL: f64 = 1e-8;
pub const FINGERPRINT_TOL: f64 = 1e-10;
/// Published number of distinct eight-mode graph classes.
pub const PUBLISHED_CLASS_COUNT: usize = 63;

/// Every partial matching (including the empty one) on `modes` vertices.
pub fn matchings(modes: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &[usize], out: &mut Vec<Vec<(usize, usize)>>, cur: &mut Vec<(usize, usize)>) {
        let Some((&first, rest)) = free.split_first() else {
            out.push(cur.clone());
            return;
        };
        rec(rest, out, cur);
        for (i, &o) in rest.iter().enumerate() {
            let remaining: Vec<usize> = rest[..i].iter().chain(&rest[i + 1..]).copied().collect();
            cur.push((first, o));
            rec(&remaining, out, cur);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&(0..modes).collect::<Vec<_>>(), &mut out, &mut Vec::new());
    out
}

/// `sum_k C(n, 2k) (2k - 1)!!`.
pub fn matching_count_formula(modes: u64) -> u64 {
    let binom = |n: u64, k: u64| (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
    let odd_fact = |k: u64| (1..2 * k).step_by(2).product::<u64>();
    (0..=modes / 2).map(|k| binom(modes, 2 * k) * odd_fact(k)).sum()
}

/// Connected graphs on `n1` copies of state 1 and `n2` of state 2, one per
/// copy-exchange class, in canonical form.
pub fn connected_graphs(n1: usize, n2: usize) -> Result<Vec<MeasurementGraph>> {
    let layout = ModeLayout::canonical(n1, n2)?;
    let mut set = BTreeSet::new();
    for m in matchings(layout.mode_count()) {
        let g = MeasurementGraph::new(layout.clone(), m)?;
        if g.is_connected() {
            set.insert(g.canonical());
        }
    }
    Ok(set.into_iter().collect())
}

/// Random state pairs with their correlation matrices.
#[derive(Clone, Debug)]
pub struct SamplePairs {
    pub states: Vec<(DensityMatrix, DensityMatrix)>,
    pub correlations: Vec<(CorrelationMatrix, CorrelationMatrix)>,
}

impl SamplePairs {
    /// Pair `i` is drawn from the stream `derive_seed(seed, i)`.
    pub fn ginibre(count: usize, seed: u64) -> Result<Self> {
        let states: Vec<(DensityMatrix, DensityMatrix)> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_from_seed(derive_seed(seed, i as u64));
                Ok((
                    random_state_with(4, RandomMeasure::Ginibre, &mut rng)?,
                    random_state_with(4, RandomMeasure::Ginibre, &mut rng)?,
                ))
            })
            .collect::<Result<_>>()?;
        let correlations =
            states.iter().map(|(a, b)| Ok((to_correlation(a)?, to_correlation(b)?))).collect::<Result<_>>()?;
        Ok(Self { states, correlations })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Connected graphs up to a copy budget and all their products that fit in
/// the budget.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    max_copies: usize,
    graphs: Vec<MeasurementGraph>,
    expansions: Vec<BlochExpansion>,
    monomials: Vec<Vec<usize>>,
    fingerprint_merged: usize,
}

impl MonomialBasis {
    pub fn max_copies(&self) -> usize {
        self.max_copies
    }

    pub fn graphs(&self) -> &[MeasurementGraph] {
        &self.graphs
    }

    /// Multisets of graph indices, sorted, the empty monomial first.
    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monomials
    }

    /// Graphs dropped because their probability fingerprint duplicated an
    /// earlier graph's.
    pub fn fingerprint_merged(&self) -> usize {
        self.fingerprint_merged
    }

    pub fn monomial_signature(&self, i: usize) -> (usize, usize) {
        self.monomials[i].iter().fold((0, 0), |(a, b), &g| {
            let s = self.graphs[g].signature();
            (a + s.0, b + s.1)
        })
    }

    pub fn monomial_edges(&self, i: usize) -> usize {
        self.monomials[i].iter().map(|&g| self.graphs[g].edge_count()).sum()
    }

    pub fn monomial_graphs(&self, i: usize) -> Vec<MeasurementGraph> {
        self.monomials[i].iter().map(|&g| self.graphs[g].clone()).collect()
    }

    /// Probabilities of every basis graph on each sample pair.
    pub fn graph_table(&self, samples: &SamplePairs) -> Vec<Vec<f64>> {
        samples
            .correlations
            .par_iter()
            .map(|(r1, r2)| self.expansions.iter().map(|e| e.evaluate(r1, r2)).collect())
            .collect()
    }

    fn monomial_value(&self, i: usize, row: &[f64]) -> f64 {
        self.monomials[i].iter().map(|&g| row[g]).product()
    }
}

/// Builds the basis for up to `max_copies` copies (two for `Pi2` and other
/// two-copy functionals, four for the rest). Graphs are deduplicated by
/// canonical form and checked for equal probability fingerprints on 50
/// random pairs.
pub fn build_basis(max_copies: usize) -> Result<MonomialBasis> {
    if !(1..=MAX_COPIES).contains(&max_copies) {
        return Err(Error::UnsupportedDimension(max_copies));
    }
    let mut graphs = Vec::new();
    for total in 1..=max_copies {
        for n1 in 0..=total {
            graphs.extend(connected_graphs(n1, total - n1)?);
        }
    }
    let probe = SamplePairs::ginibre(50, 0x5eed_f1a9)?;
    let mut kept: Vec<MeasurementGraph> = Vec::new();
    let mut prints: Vec<Vec<f64>> = Vec::new();
    let mut merged = 0;
    for g in graphs {
        let e = BlochExpansion::new(&g);
        let fp: Vec<f64> = probe.correlations.iter().map(|(a, b)| e.evaluate(a, b)).collect();
        if prints.iter().any(|p| p.iter().zip(&fp).all(|(x, y)| (x - y).abs() < FINGERPRINT_TOL)) {
            merged += 1;
            continue;
        }
        prints.push(fp);
        kept.push(g);
    }
    let sig: Vec<usize> = kept.iter().map(|g| g.copy_count()).collect();
    let mut monomials = vec![Vec::new()];
    fn rec(start: usize, cur: &mut Vec<usize>, used: usize, max: usize, sig: &[usize], out: &mut Vec<Vec<usize>>) {
        for i in start..sig.len() {
            if used + sig[i] <= max {
                cur.push(i);
                out.push(cur.clone());
                rec(i, cur, used + sig[i], max, sig, out);
                cur.pop();
            }
        }
    }
    rec(0, &mut Vec::new(), 0, max_copies, &sig, &mut monomials);
    let expansions = kept.iter().map(BlochExpansion::new).collect();
    Ok(MonomialBasis { max_copies, graphs: kept, expansions, monomials, fingerprint_merged: merged })
}

/// A functional of the state pair to decompose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Pi2,
    Pi3,
    Pi4,
    Word(Word),
    Constant,
}

impl Target {
    pub fn name(&self) -> String {
        match self {
            Target::Pi2 => "pi2".into(),
            Target::Pi3 => "pi3".into(),
            Target::Pi4 => "pi4".into(),
            Target::Word(w) => w.to_string(),
            Target::Constant => "const".into(),
        }
    }

    /// Copies needed by the target's monomials.
    pub fn copies(&self) -> usize {
        match self {
            Target::Pi2 => 2,
            Target::Pi3 => 3,
            Target::Pi4 => 4,
            Target::Word(w) => w.len(),
            Target::Constant => 0,
        }
    }

    /// Basis size used by default: two copies when they suffice, else four.
    pub fn default_basis(&self) -> usize {
        if self.copies() <= 2 {
            2
        } else {
            4
        }
    }

    /// Per-state copy limits for a word; moments use every copy freely.
    pub fn budget(&self) -> Option<(usize, usize)> {
        match self {
            Target::Word(w) => Some(w.signature()),
            _ => None,
        }
    }

    pub fn evaluate(&self, rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
        let moment = |n: u32| (rho1.matrix() - rho2.matrix()).pow(n).trace().re;
        match self {
            Target::Pi2 => moment(2),
            Target::Pi3 => moment(3),
            Target::Pi4 => moment(4),
            Target::Word(w) => w.matrix_trace(rho1, rho2),
            Target::Constant => 1.0,
        }
    }

    /// The nine functionals with published decompositions.
    pub fn standard() -> Vec<Target> {
        let mut v = vec![Target::Pi2, Target::Pi3, Target::Pi4];
        for w in ["1111", "1112", "1122", "1212", "1222", "2222"] {
            v.push(Target::Word(w.parse().expect("literal word")));
        }
        v
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pi2" => Ok(Target::Pi2),
            "pi3" => Ok(Target::Pi3),
            "pi4" => Ok(Target::Pi4),
            "o2" => Ok(Target::Word("1212".parse()?)),
            "const" | "1" => Ok(Target::Constant),
            w => Ok(Target::Word(w.parse()?)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    Exact(Rational64),
    /// Kept as fitted because no multiple of 1/3 is within tolerance.
    Float(f64),
}

impl Coefficient {
    pub fn value(&self) -> f64 {
        match self {
            Coefficient::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Coefficient::Float(x) => *x,
        }
    }

    pub fn snap(x: f64) -> Self {
        let k = (3.0 * x).round();
        if (x - k / 3.0).abs() <= SNAP_TOL && k.abs() < 1e15 {
            Coefficient::Exact(Rational64::new(k as i64, 3))
        } else {
            Coefficient::Float(x)
        }
    }

    /// True for exact values whose reduced denominator divides 3.
    pub fn is_thirds(&self) -> bool {
        matches!(self, Coefficient::Exact(r) if 3 % r.denom() == 0)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Coefficient::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Coefficient::Float(x) => write!(f, "~{x:e}"),
        }
    }
}

impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad coefficient {s:?}"));
        if let Some(x) = s.strip_prefix('~') {
            return x.parse().map(Coefficient::Float).map_err(|_| bad());
        }
        let (p, q) = s.split_once('/').unwrap_or((s, "1"));
        let (p, q): (i64, i64) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
        if q == 0 {
            return Err(bad());
        }
        Ok(Coefficient::Exact(Rational64::new(p, q)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    /// Multiset of canonical graphs; empty for the constant monomial.
    pub graphs: Vec<MeasurementGraph>,
    pub coefficient: Coefficient,
}

/// A fitted decomposition `target = sum_j c_j x_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    pub target: String,
    pub terms: Vec<Term>,
    pub train_residual: f64,
    pub held_out_residual: f64,
    /// Independent columns among the candidates.
    pub rank: usize,
    pub candidates: usize,
    /// The candidate monomials are linearly dependent, so other
    /// decompositions exist.
    pub non_unique: bool,
}

impl CoefficientVector {
    pub fn support_graphs(&self) -> BTreeSet<MeasurementGraph> {
        self.terms.iter().flat_map(|t| t.graphs.iter().cloned()).collect()
    }

    pub fn all_thirds(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_thirds())
    }

    pub fn denominators(&self) -> BTreeSet<i64> {
        self.terms
            .iter()
            .filter_map(|t| match t.coefficient {
                Coefficient::Exact(r) => Some(*r.denom()),
                Coefficient::Float(_) => None,
            })
            .collect()
    }

    /// Evaluates the polynomial given each graph's probability.
    pub fn evaluate(&self, prob: impl Fn(&MeasurementGraph) -> f64) -> f64 {
        self.terms.iter().map(|t| t.coefficient.value() * t.graphs.iter().map(&prob).product::<f64>()).sum()
    }

    /// Evaluates with exact probabilities from correlation matrices.
    pub fn evaluate_states(&self, r1: &CorrelationMatrix, r2: &CorrelationMatrix) -> f64 {
        let cache: BTreeMap<&MeasurementGraph, f64> = self
            .terms
            .iter()
            .flat_map(|t| &t.graphs)
            .map(|g| (g, BlochExpansion::new(g).evaluate(r1, r2)))
            .collect();
        self.evaluate(|g| cache[g])
    }

    /// Text table: `#` header lines, then one `coefficient<TAB>monomial` line
    /// per term, the monomial being graphs joined by ` * ` or `1`.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "# target: {}\n# held-out residual: {:.3e}\n# rank: {} of {} candidate monomials{}\n# graphs: {}\n",
            self.target,
            self.held_out_residual,
            self.rank,
            self.candidates,
            if self.non_unique { " (decomposition not unique)" } else { "" },
            self.support_graphs().len(),
        );
        for t in &self.terms {
            let mono = if t.graphs.is_empty() {
                "1".to_string()
            } else {
                t.graphs.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" * ")
            };
            s.push_str(&format!("{}\t{}\n", t.coefficient, mono));
        }
        s
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut target = None;
        let mut terms = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                if let Some(t) = h.trim().strip_prefix("target:") {
                    target = Some(t.trim().to_string());
                }
                continue;
            }
            let (c, m) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("line {}: expected coefficient and monomial", n + 1)))?;
            let coefficient: Coefficient = c.trim().parse()?;
            let graphs = if m.trim() == "1" {
                Vec::new()
            } else {
                m.split(" * ").map(|g| g.parse::<MeasurementGraph>().map(|g| g.canonical())).collect::<Result<_>>()?
            };
            terms.push(Term { graphs, coefficient });
        }
        Ok(Self {
            target: target.ok_or_else(|| Error::Parse("missing '# target:' header".into()))?,
            terms,
            train_residual: f64::NAN,
            held_out_residual: f64::NAN,
            rank: 0,
            candidates: 0,
            non_unique: false,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Training pairs; `None` means 2.5 times the candidate count.
    pub samples: Option<usize>,
    pub seed: u64,
    pub held_out: usize,
    pub prune: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { samples: None, seed: 1, held_out: 500, prune: false }
    }
}

fn candidate_columns(target: &Target, basis: &MonomialBasis) -> Result<Vec<usize>> {
    if target.copies() > basis.max_copies() {
        return Err(Error::InvalidGraph(format!(
            "{} needs {} copies but the basis has {}",
            target.name(),
            target.copies(),
            basis.max_copies()
        )));
    }
    let budget = target.budget();
    let mut cols: Vec<usize> = (0..basis.monomials().len())
        .filter(|&j| {
            let (a, b) = basis.monomial_signature(j);
            budget.is_none_or(|(x, y)| a <= x && b <= y)
        })
        .collect();
    cols.sort_by_key(|&j| (std::cmp::Reverse(basis.monomial_edges(j)), std::cmp::Reverse(basis.monomials()[j].len()), j));
    Ok(cols)
}

/// Greedy Gram-Schmidt selection with one reorthogonalization pass.
fn independent_columns(m: &[Vec<f64>], order: &[usize]) -> Vec<usize> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut sel = Vec::new();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for &j in order {
        let col = &m[j];
        let norm = dot(col, col).sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut v = col.clone();
        for _ in 0..2 {
            for b in &q {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let r = dot(&v, &v).sqrt();
        if r > INDEPENDENCE_TOL * norm {
            v.iter_mut().for_each(|x| *x /= r);
            q.push(v);
            sel.push(j);
        }
        if q.len() == m[j].len() {
            break;
        }
    }
    sel
}

fn least_squares(m: &[Vec<f64>], cols: &[usize], t: &[f64]) -> Vec<f64> {
    if cols.is_empty() {
        return Vec::new();
    }
    let a = DMatrix::from_fn(t.len(), cols.len(), |i, k| m[cols[k]][i]);
    let b = DVector::from_column_slice(t);
    let svd = a.svd(true, true);
    let eps = 1e-14 * svd.singular_values.max();
    svd.solve(&b, eps).map(|x| x.iter().copied().collect()).unwrap_or_else(|_| vec![0.0; cols.len()])
}

fn max_residual(m: &[Vec<f64>], cols: &[usize], x: &[f64], t: &[f64]) -> f64 {
    (0..t.len())
        .map(|i| (cols.iter().zip(x).map(|(&j, c)| c * m[j][i]).sum::<f64>() - t[i]).abs())
        .fold(0.0, f64::max)
}

struct Solved {
    cols: Vec<usize>,
    coefs: Vec<Coefficient>,
    rank: usize,
}

/// Selects columns, solves, drops negligible coefficients and refits.
fn solve_on(m: &[Vec<f64>], order: &[usize], t: &[f64]) -> Solved {
    let sel = independent_columns(m, order);
    let x = least_squares(m, &sel, t);
    let kept: Vec<usize> = sel.iter().zip(&x).filter(|(_, c)| c.abs() > COEFFICIENT_TOL).map(|(&j, _)| j).collect();
    let x = least_squares(m, &kept, t);
    Solved { coefs: x.iter().map(|&c| Coefficient::snap(c)).collect(), cols: kept, rank: sel.len() }
}

/// Column-major monomial values over the samples.
fn monomial_matrix(basis: &MonomialBasis, table: &[Vec<f64>], cols: &[usize]) -> Vec<Vec<f64>> {
    let mut m = vec![Vec::new(); basis.monomials().len()];
    for &j in cols {
        m[j] = table.iter().map(|row| basis.monomial_value(j, row)).collect();
    }
    m
}

/// Fits several targets on one shared set of training pairs.
pub fn fit_many(targets: &[Target], basis: &MonomialBasis, opts: &FitOptions) -> Result<Vec<CoefficientVector>> {
    let columns: Vec<Vec<usize>> = targets.iter().map(|t| candidate_columns(t, basis)).collect::<Result<_>>()?;
    let widest = columns.iter().map(Vec::len).max().unwrap_or(0);
    let n = opts.samples.unwrap_or((5 * widest).div_ceil(2).max(8));
    if n < 2 * widest {
        return Err(Error::InvalidGraph(format!("{n} samples for {widest} candidate monomials; need at least twice as many")));
    }
    let train = SamplePairs::ginibre(n, opts.seed)?;
    let test = SamplePairs::ginibre(opts.held_out, derive_seed(opts.seed, u64::MAX))?;
    let table = basis.graph_table(&train);
    let test_table = basis.graph_table(&test);
    let all: Vec<usize> = (0..basis.monomials().len()).collect();
    let m = monomial_matrix(basis, &table, &all);

    targets
        .iter()
        .zip(&columns)
        .map(|(target, order)| {
            let t: Vec<f64> = train.states.iter().map(|(a, b)| target.evaluate(a, b)).collect();
            let mut solved = solve_on(&m, order, &t);
            let rank = solved.rank;
            if opts.prune {
                solved = prune(basis, &m, order, &t, solved);
            }
            let values: Vec<f64> = solved.coefs.iter().map(Coefficient::value).collect();
            let train_residual = max_residual(&m, &solved.cols, &values, &t);
            let held_out_residual = test
                .states
                .iter()
                .zip(&test_table)
                .map(|((a, b), row)| {
                    let v: f64 = solved.cols.iter().zip(&values).map(|(&j, c)| c * basis.monomial_value(j, row)).sum();
                    (v - target.evaluate(a, b)).abs()
                })
                .fold(0.0, f64::max);
            if !held_out_residual.is_finite() || held_out_residual >= HELD_OUT_TOL {
                return Err(Error::Residual { target: target.name(), residual: held_out_residual });
            }
            let mut terms: Vec<Term> = solved
                .cols
                .iter()
                .zip(&solved.coefs)
                .map(|(&j, &c)| Term { graphs: basis.monomial_graphs(j), coefficient: c })
                .collect();
            terms.sort_by(|a, b| a.graphs.cmp(&b.graphs));
            Ok(CoefficientVector {
                target: target.name(),
                terms,
                train_residual,
                held_out_residual,
                rank,
                candidates: order.len(),
                non_unique: rank < order.len(),
            })
        })
        .collect()
}

pub fn fit_coefficients(target: &Target, basis: &MonomialBasis, opts: &FitOptions) -> Result<CoefficientVector> {
    Ok(fit_many(std::slice::from_ref(target), basis, opts)?.remove(0))
}

/// Removes support graphs, most projections first, while the target stays
/// representable on the training pairs.
fn prune(basis: &MonomialBasis, m: &[Vec<f64>], order: &[usize], t: &[f64], start: Solved) -> Solved {
    let mut alive: BTreeSet<usize> = start.cols.iter().flat_map(|&j| basis.monomials()[j].iter().copied()).collect();
    let mut by_size: Vec<usize> = alive.iter().copied().collect();
    by_size.sort_by_key(|&g| (std::cmp::Reverse(basis.graphs()[g].edge_count()), std::cmp::Reverse(basis.graphs()[g].copy_count()), g));
    let restricted = |alive: &BTreeSet<usize>| -> Vec<usize> {
        order.iter().copied().filter(|&j| basis.monomials()[j].iter().all(|g| alive.contains(g))).collect()
    };
    let fits = |s: &Solved| {
        let v: Vec<f64> = s.coefs.iter().map(Coefficient::value).collect();
        max_residual(m, &s.cols, &v, t) < 1e-9
    };
    let mut best = start;
    for g in by_size {
        let mut trial = alive.clone();
        trial.remove(&g);
        let s = solve_on(m, &restricted(&trial), t);
        if fits(&s) {
            alive = trial;
            best = s;
        }
    }
    best
}

/// One structural claim and the value this implementation reaches.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub published: String,
    pub achieved: Option<usize>,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimReport {
    pub claims: Vec<Claim>,
}

impl ClaimReport {
    pub fn all_matched(&self) -> bool {
        self.claims.iter().all(|c| c.matched)
    }

    pub fn get(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ClaimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.claims {
            let got = c.achieved.map_or("missing".to_string(), |v| v.to_string());
            writeln!(f, "{:<5} {:<42} published {:<6} achieved {}", if c.matched { "MATCH" } else { "DIFF" }, c.name, c.published, got)?;
        }
        Ok(())
    }
}

/// Compares graph and photon-pair counts of the fitted decompositions with
/// the published counts. Expects fits named `pi2` (two-copy
/// basis), `1212`, `pi3` and `pi4` (four-copy basis); absent fits are
/// reported as missing.
pub fn verify_table_claims(fits: &[CoefficientVector]) -> ClaimReport {
    let find = |name: &str| fits.iter().find(|f| f.target == name);
    let support = |names: &[&str]| -> Option<Vec<MeasurementGraph>> {
        let mut set = BTreeSet::new();
        for n in names {
            set.extend(find(n)?.support_graphs());
        }
        Some(set.into_iter().collect())
    };
    let mut claims = Vec::new();
    let mut push = |name: &str, published: &str, achieved: Option<usize>, ok: &dyn Fn(usize) -> bool| {
        claims.push(Claim { name: name.into(), published: published.into(), achieved, matched: achieved.is_some_and(ok) });
    };

    let pi2 = support(&["pi2"]);
    let pi2_plan = pi2.as_ref().map(|g| plan_configurations(g));
    push("Pi2 prime measurements", "<= 9", pi2.as_ref().map(Vec::len), &|n| n <= 9);
    push("Pi2 maximal graphs", "3", pi2_plan.as_ref().map(|p| p.maximal_count()), &|n| n == 3);
    push("Pi2 photon pairs", "6", pi2_plan.as_ref().map(|p| p.total_photon_pairs()), &|n| n == 6);
    push("H workflow projective measurements", "10", pi2.as_ref().map(Vec::len), &|n| n == 10);

    let o2 = support(&["1212"]);
    let o2_plan = o2.as_ref().map(|g| plan_configurations(g));
    push("O2 workflow projections", "41", o2.as_ref().map(Vec::len), &|n| n == 41);
    push("O2 workflow configurations", "10", o2_plan.as_ref().map(|p| p.configurations.len()), &|n| n == 10);
    push("O2 workflow photon pairs", "20", o2_plan.as_ref().map(|p| p.total_photon_pairs()), &|n| n == 20);

    let t = support(&["pi3", "pi4"]);
    let t_plan = t.as_ref().map(|g| plan_configurations(g));
    push("T workflow projections", "51", t.as_ref().map(Vec::len), &|n| n == 51);
    push("T workflow photon pairs", "104", t_plan.as_ref().map(|p| p.total_photon_pairs()), &|n| n == 104);

    for f in fits {
        let name = format!("{} coefficients in thirds", f.target);
        claims.push(Claim { name, published: "3".into(), achieved: f.denominators().into_iter().max().map(|d| d as usize), matched: f.all_thirds() });
    }
    ClaimReport { claims }
}

/// Class counts of the eight-mode graphs under each symmetry convention.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    pub raw_matchings: usize,
    pub formula: u64,
    pub nonempty: usize,
    /// Classes of nonempty matchings on copies `1122` under exchange of the
    /// two copies of each state.
    pub copy_exchange: usize,
    /// Additionally identifying graphs under exchange of the two states.
    pub role_exchange: usize,
    /// Distinct probability fingerprints among the copy-exchange classes.
    pub fingerprint: usize,
    /// Connected classes on exactly two copies of each state.
    pub connected_two_two: usize,
    /// Connected classes on one to four copies of any signature.
    pub connected_up_to_four: usize,
    pub published: usize,
}

impl ClassReport {
    /// `(convention, count, equals the published count)` per convention.
    pub fn comparisons(&self) -> Vec<(&'static str, usize, bool)> {
        [
            ("copy exchange", self.copy_exchange),
            ("copy and role exchange", self.role_exchange),
            ("probability fingerprint", self.fingerprint),
            ("connected, two copies of each state", self.connected_two_two),
            ("connected, up to four copies", self.connected_up_to_four),
        ]
        .into_iter()
        .map(|(n, c)| (n, c, c == self.published))
        .collect()
    }
}

pub fn class_report(seed: u64) -> Result<ClassReport> {
    let raw = matchings(8);
    let layout = ModeLayout::canonical(2, 2)?;
    let act = |m: &[(usize, usize)], perm: &[usize]| {
        let mut e: Vec<(usize, usize)> = m
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (2 * perm[a / 2] + a % 2, 2 * perm[b / 2] + b % 2);
                (x.min(y), x.max(y))
            })
            .collect();
        e.sort_unstable();
        e
    };
    let copy_group: Vec<Vec<usize>> = vec![vec![0, 1, 2, 3], vec![1, 0, 2, 3], vec![0, 1, 3, 2], vec![1, 0, 3, 2]];
    let role_group: Vec<Vec<usize>> = copy_group.iter().flat_map(|p| [p.clone(), vec![p[2], p[3], p[0], p[1]]]).collect();
    let classes = |group: &[Vec<usize>]| -> BTreeSet<Vec<(usize, usize)>> {
        raw.iter().filter(|m| !m.is_empty()).map(|m| group.iter().map(|p| act(m, p)).min().expect("nonempty group")).collect()
    };
    let copy_classes = classes(&copy_group);
    let role = classes(&role_group).len();

    let probe = SamplePairs::ginibre(50, seed)?;
    let mut prints: Vec<Vec<f64>> = Vec::new();
    for edges in &copy_classes {
        let g = MeasurementGraph::new(layout.clone(), edges.clone())?;
        let e = BlochExpansion::new(&g);
        let fp: Vec<f64> = probe.correlations.iter().map(|(a, b)| e.evaluate(a, b)).collect();
        if !prints.iter().any(|p| p.iter().zip(&fp).all(|(x, y)| (x - y).abs() < FINGERPRINT_TOL)) {
            prints.push(fp);
        }
    }
    let mut up_to_four = 0;
    for total in 1..=4 {
        for n1 in 0..=total {
            up_to_four += connected_graphs(n1, total - n1)?.len();
        }
    }
    Ok(ClassReport {
        raw_matchings: raw.len(),
        formula: matching_count_formula(8),
        nonempty: raw.len() - 1,
        copy_exchange: copy_classes.len(),
        role_exchange: role,
        fingerprint: prints.len(),
        connected_two_two: connected_graphs(2, 2)?.len(),
        connected_up_to_four: up_to_four,
        published: PUBLISHED_CLASS_COUNT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_counts() {
        for n in 0..=8 {
            assert_eq!(matchings(n).len() as u64, matching_count_formula(n as u64), "n={n}");
        }
        assert_eq!(matching_count_formula(8), 764);
    }

    #[test]
    fn two_copy_basis() {
        let b = build_basis(2).unwrap();
        assert_eq!(b.graphs().len(), 18);
        assert_eq!(b.monomials().len(), 22);
        assert_eq!(b.fingerprint_merged(), 0);
    }

    #[test]
    fn coefficient_text() {
        for s in ["1/3", "-2", "16/3", "~1.5e-2"] {
            let c: Coefficient = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!(Coefficient::snap(2.0 / 3.0 + 1e-9).is_thirds());
        assert!(!Coefficient::snap(0.1).is_thirds());
    }

    #[test]
    fn constant_target() {
        let b = build_basis(2).unwrap();
        let f = fit_coefficients(&Target::Constant, &b, &FitOptions::default()).unwrap();
        assert_eq!(f.terms.len(), 1);
        assert!(f.terms[0].graphs.is_empty());
        assert_eq!(f.terms[0].coefficient, Coefficient::Exact(Rational64::from_integer(1)));
    }
}
