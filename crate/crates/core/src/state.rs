//! Validated density matrices, correlation matrices, multi-copy layouts and
//! random test states.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::pauli::pauli_pair;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = -1e-10;
pub const MAX_COPIES: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if !dim.is_power_of_two() || !(2..=256).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let herm = matrix.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = matrix.eigvalsh()[0];
        if min < PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidTrace(0.0));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        let m = ComplexMatrix::from_fn(v.len(), |i, j| v[i] * v[j].conj());
        Self::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)))
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_fn(p.len(), |i, j| if i == j { C64::new(p[i], 0.0) } else { C64::new(0.0, 0.0) }))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    /// `U rho U^dag`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch(u.dim(), self.dim()));
        }
        let m = &(u * &self.matrix) * &u.adjoint();
        let h = &m + &m.adjoint();
        Ok(Self::new_unchecked(h.scale(C64::new(0.5, 0.0))))
    }
}

/// Real 4x4 matrix `R_mn = Tr(rho sigma_m (x) sigma_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    r: [[f64; 4]; 4],
}

impl CorrelationMatrix {
    pub fn new(r: [[f64; 4]; 4]) -> Result<Self> {
        if (r[0][0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCorrelation(format!("R[0][0] = {}, expected 1", r[0][0])));
        }
        for (m, row) in r.iter().enumerate() {
            for (n, &v) in row.iter().enumerate() {
                if !v.is_finite() || v.abs() > 1.0 + 1e-12 {
                    return Err(Error::InvalidCorrelation(format!("|R[{m}][{n}]| = {v} exceeds 1")));
                }
            }
        }
        Ok(Self { r })
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.r[m][n]
    }

    pub fn as_array(&self) -> &[[f64; 4]; 4] {
        &self.r
    }
}

pub fn to_correlation(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(rho.dim(), 4));
    }
    let mut r = [[0.0; 4]; 4];
    for (m, row) in r.iter_mut().enumerate() {
        for (n, slot) in row.iter_mut().enumerate() {
            let z = rho.matrix().trace_product(pauli_pair(m, n));
            if z.im.abs() > 1e-9 {
                return Err(Error::ImaginaryResidue(z.im));
            }
            *slot = z.re;
        }
    }
    CorrelationMatrix::new(r)
}

pub fn from_correlation(r: &CorrelationMatrix) -> Result<DensityMatrix> {
    from_correlation_array(r.as_array())
}

/// Builds `1/4 sum R_mn sigma_m (x) sigma_n` from raw coefficients; a
/// non-physical `R` is reported through the minimum eigenvalue.
pub fn from_correlation_array(r: &[[f64; 4]; 4]) -> Result<DensityMatrix> {
    if (r[0][0] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidCorrelation(format!("R[0][0] = {}, expected 1", r[0][0])));
    }
    let mut acc = ComplexMatrix::zeros(4);
    for (m, row) in r.iter().enumerate() {
        for (n, &v) in row.iter().enumerate() {
            acc = &acc + &pauli_pair(m, n).scale(C64::new(0.25 * v, 0.0));
        }
    }
    DensityMatrix::new(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

pub fn partial_trace(rho: &DensityMatrix, keep: Keep) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(rho.dim(), 4));
    }
    let q = match keep {
        Keep::First => 0,
        Keep::Second => 1,
    };
    partial_trace_qubits(rho, &[q])
}

/// Reduced state on the listed qubits (kept in ascending order).
pub fn partial_trace_qubits(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.qubits();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.iter().any(|&q| q >= n) {
        return Err(Error::Layout(format!("cannot keep qubits {keep:?} of {n}")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let compose = |k: usize, t: usize| -> usize {
        let mut x = 0;
        for (i, &q) in kept.iter().enumerate() {
            x |= ((k >> (kept.len() - 1 - i)) & 1) << (n - 1 - q);
        }
        for (i, &q) in traced.iter().enumerate() {
            x |= ((t >> (traced.len() - 1 - i)) & 1) << (n - 1 - q);
        }
        x
    };
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(dk, |i, j| (0..dt).map(|t| m.get(compose(i, t), compose(j, t))).sum());
    Ok(DensityMatrix::new_unchecked(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateId {
    One,
    Two,
}

impl StateId {
    pub fn index(self) -> usize {
        match self {
            StateId::One => 0,
            StateId::Two => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            StateId::One => StateId::Two,
            StateId::Two => StateId::One,
        }
    }

    pub fn digit(self) -> char {
        match self {
            StateId::One => '1',
            StateId::Two => '2',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CopySlot {
    pub state: StateId,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Ordered copies of two-qubit states; copy `c` owns modes `2c` (a) and
/// `2c + 1` (b).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLayout {
    copies: Vec<CopySlot>,
}

impl ModeLayout {
    pub fn new(copies: Vec<CopySlot>) -> Result<Self> {
        if copies.len() > MAX_COPIES {
            return Err(Error::Layout(format!("{} copies exceed the limit of {MAX_COPIES}", copies.len())));
        }
        for (i, a) in copies.iter().enumerate() {
            if copies[..i].contains(a) {
                return Err(Error::Layout(format!("duplicate copy {a:?}")));
            }
        }
        Ok(Self { copies })
    }

    /// Copies in the given state order, numbered per state.
    pub fn from_states(states: &[StateId]) -> Result<Self> {
        let mut seen = [0usize; 2];
        let copies = states
            .iter()
            .map(|&s| {
                seen[s.index()] += 1;
                CopySlot { state: s, index: seen[s.index()] - 1 }
            })
            .collect();
        Self::new(copies)
    }

    /// `n1` copies of state 1 followed by `n2` copies of state 2.
    pub fn canonical(n1: usize, n2: usize) -> Result<Self> {
        let mut s = vec![StateId::One; n1];
        s.extend(std::iter::repeat_n(StateId::Two, n2));
        Self::from_states(&s)
    }

    pub fn copies(&self) -> &[CopySlot] {
        &self.copies
    }

    pub fn states(&self) -> Vec<StateId> {
        self.copies.iter().map(|c| c.state).collect()
    }

    pub fn copy_count(&self) -> usize {
        self.copies.len()
    }

    pub fn mode_count(&self) -> usize {
        2 * self.copies.len()
    }

    pub fn mode(&self, copy: usize, side: Side) -> usize {
        2 * copy + if side == Side::A { 0 } else { 1 }
    }

    pub fn mode_name(&self, mode: usize) -> String {
        format!("{}{}", if mode.is_multiple_of(2) { 'a' } else { 'b' }, mode / 2 + 1)
    }
}

impl fmt::Display for ModeLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.copies {
            write!(f, "{}", c.state.digit())?;
        }
        Ok(())
    }
}

/// Tensor product of the copies in `layout`; `states[0]` is state 1 and
/// `states[1]` state 2.
pub fn assemble(states: &[DensityMatrix], layout: &ModeLayout) -> Result<DensityMatrix> {
    if layout.copy_count() == 0 {
        return Err(Error::Layout("empty layout".into()));
    }
    let mut acc = ComplexMatrix::identity(1);
    for c in layout.copies() {
        let rho = states
            .get(c.state.index())
            .ok_or_else(|| Error::Layout(format!("no state supplied for {:?}", c.state)))?;
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch(rho.dim(), 4));
        }
        acc = acc.kron(rho.matrix());
    }
    Ok(DensityMatrix::new_unchecked(acc))
}

/// Conjugation by the unitary exchanging single-qubit modes `i` and `j`.
pub fn swap_modes(rho: &DensityMatrix, i: usize, j: usize) -> Result<DensityMatrix> {
    let n = rho.qubits();
    for m in [i, j] {
        if m >= n {
            return Err(Error::InvalidMode { mode: m, modes: n });
        }
    }
    if i == j {
        return Err(Error::Layout(format!("cannot swap mode {i} with itself")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(i, j);
    Ok(DensityMatrix::new_unchecked(rho.matrix().permute_qubits(&perm)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RandomMeasure {
    /// Hilbert-Schmidt measure, `G G^dag / Tr` with square Ginibre `G`.
    Ginibre,
    Pure,
    /// Rank-`k` Ginibre state.
    Rank(usize),
}

/// Mixes a root seed with a task index so parallel tasks get independent,
/// schedule-free streams.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_state(dim: usize, measure: RandomMeasure, seed: u64) -> Result<DensityMatrix> {
    random_state_with(dim, measure, &mut rng_from_seed(seed))
}

pub fn random_state_with<R: Rng + ?Sized>(dim: usize, measure: RandomMeasure, rng: &mut R) -> Result<DensityMatrix> {
    if dim != 2 && dim != 4 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let k = match measure {
        RandomMeasure::Ginibre => dim,
        RandomMeasure::Pure => 1,
        RandomMeasure::Rank(k) if (1..=dim).contains(&k) => k,
        RandomMeasure::Rank(k) => return Err(Error::UnsupportedDimension(k)),
    };
    let g = DMatrix::from_fn(dim, k, |_, _| complex_normal(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let m = ComplexMatrix::from_dmatrix(w.map(|z| z / tr))?;
    let h = &m + &m.adjoint();
    Ok(DensityMatrix::new_unchecked(h.scale(C64::new(0.5, 0.0))))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let z = DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = d / d.norm();
        for i in 0..dim {
            q[(i, c)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix(q).expect("finite unitary")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singlet() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        DensityMatrix::from_pure(&[z, C64::new(h, 0.0), C64::new(-h, 0.0), z]).unwrap()
    }

    #[test]
    fn maximally_mixed_correlations() {
        let r = to_correlation(&DensityMatrix::maximally_mixed(4).unwrap()).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                let want = if m == 0 && n == 0 { 1.0 } else { 0.0 };
                assert!((r.get(m, n) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn singlet_correlations() {
        let r = to_correlation(&singlet()).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                let want = match (m, n) {
                    (0, 0) => 1.0,
                    (a, b) if a == b => -1.0,
                    _ => 0.0,
                };
                assert!((r.get(m, n) - want).abs() < 1e-15, "R[{m}][{n}]");
            }
        }
    }

    #[test]
    fn unit_correlation_is_maximally_mixed() {
        let mut a = [[0.0; 4]; 4];
        a[0][0] = 1.0;
        let rho = from_correlation(&CorrelationMatrix::new(a).unwrap()).unwrap();
        assert!(rho.matrix().max_abs_diff(DensityMatrix::maximally_mixed(4).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn unphysical_correlation_reports_min_eigenvalue() {
        let mut a = [[0.0; 4]; 4];
        a[0][0] = 1.0;
        a[3][3] = 2.0;
        match from_correlation_array(&a) {
            Err(Error::NotPositive(min)) => assert!((min + 0.25).abs() < 1e-12),
            other => panic!("expected PSD violation, got {other:?}"),
        }
        assert!(CorrelationMatrix::new(a).is_err());
    }

    #[test]
    fn singlet_reduced_states_are_maximally_mixed() {
        let half = DensityMatrix::maximally_mixed(2).unwrap();
        for keep in [Keep::First, Keep::Second] {
            let r = partial_trace(&singlet(), keep).unwrap();
            assert!(r.matrix().max_abs_diff(half.matrix()) < 1e-15);
        }
    }

    #[test]
    fn product_state_partial_trace() {
        let a = random_state(2, RandomMeasure::Ginibre, 1).unwrap();
        let b = random_state(2, RandomMeasure::Ginibre, 2).unwrap();
        let ab = DensityMatrix::new(a.matrix().kron(b.matrix())).unwrap();
        assert!(partial_trace(&ab, Keep::First).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(partial_trace(&ab, Keep::Second).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn two_mixed_copies_give_identity_over_16() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let layout = ModeLayout::canonical(2, 0).unwrap();
        let big = assemble(&[mixed], &layout).unwrap();
        assert!(big.matrix().max_abs_diff(&ComplexMatrix::identity(16).scale(C64::new(1.0 / 16.0, 0.0))) < 1e-15);
    }

    #[test]
    fn assemble_then_trace_out_a_copy() {
        let r1 = random_state(4, RandomMeasure::Ginibre, 3).unwrap();
        let r2 = random_state(4, RandomMeasure::Ginibre, 4).unwrap();
        let big = assemble(&[r1.clone(), r2.clone()], &ModeLayout::canonical(1, 1).unwrap()).unwrap();
        assert!(partial_trace_qubits(&big, &[2, 3]).unwrap().matrix().max_abs_diff(r2.matrix()) < 1e-15);
        assert!(partial_trace_qubits(&big, &[0, 1]).unwrap().matrix().max_abs_diff(r1.matrix()) < 1e-15);
    }

    #[test]
    fn four_copies_have_unit_trace() {
        let r1 = random_state(4, RandomMeasure::Ginibre, 5).unwrap();
        let r2 = random_state(4, RandomMeasure::Ginibre, 6).unwrap();
        let big = assemble(&[r1, r2], &ModeLayout::canonical(2, 2).unwrap()).unwrap();
        assert_eq!(big.dim(), 256);
        assert!((big.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layout_limits() {
        assert!(ModeLayout::canonical(3, 2).is_err());
        let bad = ModeLayout::new(vec![CopySlot { state: StateId::One, index: 0 }; 2]);
        assert!(bad.is_err());
    }

    #[test]
    fn swap_modes_is_involutive_and_symmetric() {
        let r = random_state(4, RandomMeasure::Ginibre, 7).unwrap();
        let big = assemble(&[r], &ModeLayout::canonical(2, 0).unwrap()).unwrap();
        let once = swap_modes(&big, 1, 2).unwrap();
        assert!(swap_modes(&once, 1, 2).unwrap().matrix().max_abs_diff(big.matrix()) < 1e-15);
        assert!((once.matrix().trace() - big.matrix().trace()).norm() < 1e-15);
        let both = swap_modes(&swap_modes(&big, 0, 2).unwrap(), 1, 3).unwrap();
        assert!(both.matrix().max_abs_diff(big.matrix()) < 1e-15);
        assert!(swap_modes(&big, 0, 4).is_err());
    }

    #[test]
    fn random_states_are_valid_and_reproducible() {
        let p = random_state(4, RandomMeasure::Pure, 11).unwrap();
        assert!((p.purity() - 1.0).abs() < 1e-12);
        let g = random_state(4, RandomMeasure::Ginibre, 12).unwrap();
        DensityMatrix::new(g.matrix().clone()).unwrap();
        assert!(g.matrix().eigvalsh()[0] > 0.0);
        assert_eq!(g, random_state(4, RandomMeasure::Ginibre, 12).unwrap());
        assert!(random_state(8, RandomMeasure::Ginibre, 1).is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(4, &mut rng_from_seed(9));
        assert!((&u * &u.adjoint()).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-13);
    }
}
