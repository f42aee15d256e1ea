//! Overlap algebra on correlation matrices.
//!
//! A two-qubit state is `rho = 1/4 R_mn sigma_m (x) sigma_n`. Traces of
//! products of such states reduce to contractions of correlation matrices
//! against state-independent tensors built from Kronecker deltas and the
//! Pauli structure constants `f_{mkc}`:
//!
//! * first-order overlap: `Tr(rho1 rho2) = 1/4 R1_mn R2_mn`;
//! * second-order overlap: `Tr[(rho1 rho2)^2] = R1_mn R2_kl R1_xy R2_rs
//!   (A1 - A2 - A3 + A4)_{mnklxyrs}`.
//!
//! The tensors come from writing the exchange of two two-qubit copies as a
//! product of single-mode swaps `S = 1 - 2P^-` on the a-modes and on the
//! b-modes, with `P^- = 1/4 (1 - sum_i sigma_i sigma_i)` the singlet
//! projector. Expanding `(1 - 2P^-_a)(1 - 2P^-_b)` gives four terms. With
//! `g(m,k,x,r) = d_mk d_xr - sum_{i=1..3} f_{mki} f_{xri}` acting on the
//! a-indices `(m,k,x,r)` and the b-indices `(n,l,y,s)`:
//!
//! ```text
//! A1 = 2^-4 d_mk d_xr d_nl d_ys
//! A2 = 2^-5 g(m,k,x,r) d_nl d_ys
//! A3 = 2^-5 d_mk d_xr g(n,l,y,s)
//! A4 = 2^-6 g(m,k,x,r) g(n,l,y,s)
//! ```
//!
//! Moments `Pi_n = Tr(rho1 - rho2)^n` expand into overlaps of words such as
//! `Tr(rho1^2 rho2^2)`. Each word is evaluated twice, from matrix products
//! and from products of Bloch coefficient matrices, and the two routes must
//! agree. The trace distance then follows from the roots of the
//! characteristic polynomial of `rho1 - rho2`, written in terms of moments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hessenberg_eigenvalues, ComplexMatrix, C64};
use crate::oracle::clipped_sqrt;
use crate::pauli::{pauli_product, structure_constant};
use crate::state::{to_correlation, CorrelationMatrix, DensityMatrix, StateId};

/// Agreement required between the matrix-product and Bloch routes.
pub const ROUTE_TOL: f64 = 1e-10;
/// Imaginary residue above which a tensor contraction is rejected.
pub const IMAG_TOL: f64 = 1e-9;
/// Largest imaginary part accepted on a cleaned characteristic root.
pub const ROOT_IMAG_TOL: f64 = 1e-7;
/// Real roots closer than this, on the axis rescaled by `sqrt(Pi2)`, are
/// treated as one perturbed multiple root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-3;
/// Cluster radius around roots with an imaginary part. Moments obtained
/// from overlaps lose relative precision as the states approach each other,
/// and a triple root then splits by the cube root of that loss.
pub const ROOT_COMPLEX_CLUSTER_TOL: f64 = 1e-2;
/// Negative radicands down to this value are accepted in overlap formulas.
pub const OVERLAP_RADICAND_TOL: f64 = 1e-9;

/// A product of states under the trace, e.g. `1122` is `Tr(rho1^2 rho2^2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<StateId>);

impl Word {
    pub fn new(letters: Vec<StateId>) -> Result<Self> {
        if letters.is_empty() || letters.len() > 4 {
            return Err(Error::Parse(format!("word length {} outside 1..=4", letters.len())));
        }
        Ok(Self(letters))
    }

    pub fn letters(&self) -> &[StateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copies of state 1 and state 2 in the word.
    pub fn signature(&self) -> (usize, usize) {
        let ones = self.0.iter().filter(|&&s| s == StateId::One).count();
        (ones, self.0.len() - ones)
    }

    /// The word with the roles of the two states exchanged.
    pub fn swapped(&self) -> Self {
        Self(self.0.iter().map(|s| s.other()).collect())
    }

    pub fn matrix_trace(&self, rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
        let pick = |s: StateId| if s == StateId::One { rho1.matrix() } else { rho2.matrix() };
        let n = self.0.len();
        if n == 1 {
            return pick(self.0[0]).trace().re;
        }
        let mut acc = pick(self.0[0]).clone();
        for &s in &self.0[1..n - 1] {
            acc = &acc * pick(s);
        }
        acc.trace_product(pick(self.0[n - 1])).re
    }

    pub fn bloch_trace(&self, r1: &CorrelationMatrix, r2: &CorrelationMatrix) -> C64 {
        let pick = |s: StateId| BlochOperator::from_correlation(if s == StateId::One { r1 } else { r2 });
        let mut acc = pick(self.0[0]);
        for &s in &self.0[1..] {
            acc = acc.mul(&pick(s));
        }
        acc.trace()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.digit())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                '1' => Ok(StateId::One),
                '2' => Ok(StateId::Two),
                _ => Err(Error::Parse(format!("word '{s}' may only contain 1 and 2"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

/// Words entering the moment expansions up to fourth order.
pub const MOMENT_WORDS: [&str; 13] =
    ["11", "22", "12", "111", "112", "122", "222", "1111", "1112", "1122", "1212", "1222", "2222"];

/// Operator `1/4 sum C_mn sigma_m (x) sigma_n` with complex coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochOperator([[C64; 4]; 4]);

impl BlochOperator {
    pub fn from_correlation(r: &CorrelationMatrix) -> Self {
        let mut c = [[C64::new(0.0, 0.0); 4]; 4];
        for (m, row) in c.iter_mut().enumerate() {
            for (n, slot) in row.iter_mut().enumerate() {
                *slot = C64::new(r.get(m, n), 0.0);
            }
        }
        Self(c)
    }

    pub fn coefficient(&self, m: usize, n: usize) -> C64 {
        self.0[m][n]
    }

    /// Product through the structure constants, no matrices involved.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = [[C64::new(0.0, 0.0); 4]; 4];
        for m in 0..4 {
            for k in 0..4 {
                let (c, pa) = pauli_product(m, k);
                for n in 0..4 {
                    let a = self.0[m][n] * pa;
                    for l in 0..4 {
                        let (d, pb) = pauli_product(n, l);
                        out[c][d] += a * other.0[k][l] * pb * 0.25;
                    }
                }
            }
        }
        Self(out)
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0]
    }
}

/// Tr(rho1 rho2) from correlation matrices.
pub fn overlap_first(r1: &CorrelationMatrix, r2: &CorrelationMatrix) -> f64 {
    let mut acc = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            acc += r1.get(m, n) * r2.get(m, n);
        }
    }
    0.25 * acc
}

/// The four rank-8 tensors, index order `(m, n, k, l, x, y, r, s)` matching
/// the contraction `R1_mn R2_kl R1_xy R2_rs`.
pub struct ATensors {
    a: [Vec<C64>; 4],
}

const TENSOR_LEN: usize = 1 << 16;

fn tensor_index(m: usize, n: usize, k: usize, l: usize, x: usize, y: usize, r: usize, s: usize) -> usize {
    (((((((m * 4 + n) * 4 + k) * 4 + l) * 4 + x) * 4 + y) * 4 + r) * 4) + s
}

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn g_factor(m: usize, k: usize, x: usize, r: usize) -> C64 {
    let mut acc = C64::new(kd(m, k) * kd(x, r), 0.0);
    for i in 1..4 {
        acc -= structure_constant(m, k, i) * structure_constant(x, r, i);
    }
    acc
}

static A_TENSORS: LazyLock<ATensors> = LazyLock::new(|| {
    let mut a: [Vec<C64>; 4] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); TENSOR_LEN]);
    let mut ga = [C64::new(0.0, 0.0); 256];
    for (w, slot) in ga.iter_mut().enumerate() {
        *slot = g_factor(w >> 6, (w >> 4) & 3, (w >> 2) & 3, w & 3);
    }
    let dd = |i: usize, j: usize, p: usize, q: usize| kd(i, j) * kd(p, q);
    for idx in 0..TENSOR_LEN {
        let d = |shift: usize| (idx >> (2 * shift)) & 3;
        let (m, n, k, l, x, y, r, s) = (d(7), d(6), d(5), d(4), d(3), d(2), d(1), d(0));
        let g_a = ga[(m << 6) | (k << 4) | (x << 2) | r];
        let g_b = ga[(n << 6) | (l << 4) | (y << 2) | s];
        let da = dd(m, k, x, r);
        let db = dd(n, l, y, s);
        debug_assert_eq!(idx, tensor_index(m, n, k, l, x, y, r, s));
        a[0][idx] = C64::new(da * db / 16.0, 0.0);
        a[1][idx] = g_a * db / 32.0;
        a[2][idx] = g_b * da / 32.0;
        a[3][idx] = g_a * g_b / 64.0;
    }
    ATensors { a }
});

impl ATensors {
    /// Entry of `A_which` (1-based) at `(m, n, k, l, x, y, r, s)`.
    pub fn get(&self, which: usize, idx: [usize; 8]) -> C64 {
        let [m, n, k, l, x, y, r, s] = idx;
        self.a[which - 1][tensor_index(m, n, k, l, x, y, r, s)]
    }

    /// Contractions of `R1 R2 R1 R2` with each tensor, in order A1..A4.
    pub fn contract(&self, r1: &CorrelationMatrix, r2: &CorrelationMatrix) -> [C64; 4] {
        let mut acc = [C64::new(0.0, 0.0); 4];
        let mut w = vec![0.0; TENSOR_LEN];
        for m in 0..4 {
            for n in 0..4 {
                let a = r1.get(m, n);
                for k in 0..4 {
                    for l in 0..4 {
                        let b = a * r2.get(k, l);
                        for x in 0..4 {
                            for y in 0..4 {
                                let c = b * r1.get(x, y);
                                for r in 0..4 {
                                    for s in 0..4 {
                                        w[tensor_index(m, n, k, l, x, y, r, s)] = c * r2.get(r, s);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for (t, slot) in acc.iter_mut().enumerate() {
            *slot = self.a[t].iter().zip(&w).map(|(a, &w)| a * w).sum();
        }
        acc
    }
}

pub fn a_tensors() -> &'static ATensors {
    &A_TENSORS
}

/// `Tr[(rho1 rho2)^2]` from the A-tensor contraction.
pub fn overlap_second_from(r1: &CorrelationMatrix, r2: &CorrelationMatrix) -> Result<f64> {
    let [a1, a2, a3, a4] = a_tensors().contract(r1, r2);
    let total = a1 - a2 - a3 + a4;
    if total.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidue(total.im));
    }
    Ok(total.re)
}

pub fn overlap_second(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    overlap_second_from(&to_correlation(rho1)?, &to_correlation(rho2)?)
}

/// Places a two-qubit operator on qubits `(i, j)` of an `n`-qubit register.
pub fn embed_pair(op: &ComplexMatrix, i: usize, j: usize, n: usize) -> Result<ComplexMatrix> {
    if i >= n || j >= n || i == j {
        return Err(Error::InvalidMode { mode: i.max(j), modes: n });
    }
    let full = op.kron(&ComplexMatrix::identity(1 << (n - 2)));
    let mut rest = (0..n).filter(|&q| q != i && q != j);
    let perm: Vec<usize> = (0..n).map(|q| match q { 0 => i, 1 => j, _ => rest.next().unwrap() }).collect();
    full.permute_qubits(&perm)
}

fn singlet_projector() -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(4).into_dmatrix();
    p[(1, 1)] = C64::new(0.5, 0.0);
    p[(2, 2)] = C64::new(0.5, 0.0);
    p[(1, 2)] = C64::new(-0.5, 0.0);
    p[(2, 1)] = C64::new(-0.5, 0.0);
    ComplexMatrix::from_dmatrix(p).expect("finite")
}

/// `P^- = |Psi^-><Psi^-|` on two qubits.
pub fn singlet() -> &'static ComplexMatrix {
    static P: LazyLock<ComplexMatrix> = LazyLock::new(singlet_projector);
    &P
}

/// `V = 2I - 4P^-`.
pub fn v_operator() -> ComplexMatrix {
    &ComplexMatrix::identity(4).scale(C64::new(2.0, 0.0)) - &singlet().scale(C64::new(4.0, 0.0))
}

fn qubit_swap_1based(i: usize, j: usize) -> ComplexMatrix {
    ComplexMatrix::qubit_swap(4, i - 1, j - 1).expect("valid qubits")
}

/// `S = S23 S34 S12 S23` on four qubits.
pub fn shift_operator() -> &'static ComplexMatrix {
    static S: LazyLock<ComplexMatrix> = LazyLock::new(|| {
        let s23 = qubit_swap_1based(2, 3);
        let s34 = qubit_swap_1based(3, 4);
        let s12 = qubit_swap_1based(1, 2);
        &(&(&s23 * &s34) * &s12) * &s23
    });
    &S
}

/// `Tr[S (rho1 rho2) (x) (rho1 rho2)]`, with the non-Hermitian product on
/// qubits 1-2 and again on qubits 3-4.
pub fn shift_operator_check(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let x = rho1.matrix() * rho2.matrix();
    let z = shift_operator().trace_product(&x.kron(&x));
    if z.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// Cyclic shift of four two-qubit copy slots (256x256), built from swaps
/// of neighbouring copies.
pub fn four_copy_shift() -> &'static ComplexMatrix {
    static W: LazyLock<ComplexMatrix> = LazyLock::new(|| {
        let copy_swap = |c: usize| {
            let mut perm: Vec<usize> = (0..8).collect();
            perm.swap(2 * c, 2 * c + 2);
            perm.swap(2 * c + 1, 2 * c + 3);
            ComplexMatrix::qubit_permutation(&perm).expect("valid permutation")
        };
        &(&copy_swap(0) * &copy_swap(1)) * &copy_swap(2)
    });
    &W
}

/// `Tr[W (rho1 (x) rho2 (x) rho1 (x) rho2)]` on the 256-dimensional space.
pub fn four_copy_shift_check(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let stacked = rho1.matrix().kron(rho2.matrix()).kron(rho1.matrix()).kron(rho2.matrix());
    let z = four_copy_shift().trace_product(&stacked);
    if z.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

fn sigma_dot(i: usize, j: usize, n: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(1 << n);
    for a in 1..4 {
        let si = ComplexMatrix::embed(crate::pauli::sigma(a), i, n);
        let sj = ComplexMatrix::embed(crate::pauli::sigma(a), j, n);
        acc = &acc + &(&si * &sj);
    }
    acc
}

/// Largest entrywise difference between `S34 S12` and its four-term Pauli
/// form `1/4 (1 + s.s_12 + s.s_34 + s.s_12 s.s_34)`, both embedded as
/// 256x256 operators.
pub fn s_prime_residual() -> f64 {
    let direct = &qubit_swap_1based(3, 4) * &qubit_swap_1based(1, 2);
    let d12 = sigma_dot(0, 1, 4);
    let d34 = sigma_dot(2, 3, 4);
    let id = ComplexMatrix::identity(16);
    let expanded = (&(&(&id + &d12) + &d34) + &(&d12 * &d34)).scale(C64::new(0.25, 0.0));
    let pad = ComplexMatrix::identity(16);
    direct.kron(&pad).max_abs_diff(&expanded.kron(&pad))
}

/// Largest deviation, over all `(m, k)`, of the singlet-projection product
/// rule. With qubits ordered `1a 1b 2a 2b`:
/// `sum_{n=1..3} R1_mn R2_nk = Tr[(rho1 (x) rho2) sigma_m^{1a} sigma_k^{2b} (1 - 4P^-)_{1b,2a}]`
/// and the full sum over `n = 0..3` uses `V = 2I - 4P^-` instead.
pub fn product_rule_residual(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let r1 = to_correlation(rho1)?;
    let r2 = to_correlation(rho2)?;
    let joint = rho1.matrix().kron(rho2.matrix());
    let p = embed_pair(singlet(), 1, 2, 4)?;
    let id = ComplexMatrix::identity(16);
    let spatial = &id - &p.scale(C64::new(4.0, 0.0));
    let full = &id.scale(C64::new(2.0, 0.0)) - &p.scale(C64::new(4.0, 0.0));
    let mut worst = 0.0f64;
    for m in 0..4 {
        for k in 0..4 {
            let local = &ComplexMatrix::embed(crate::pauli::sigma(m), 0, 4) * &ComplexMatrix::embed(crate::pauli::sigma(k), 3, 4);
            let lhs_spatial: f64 = (1..4).map(|n| r1.get(m, n) * r2.get(n, k)).sum();
            let lhs_full = lhs_spatial + r1.get(m, 0) * r2.get(0, k);
            let a = joint.trace_product(&(&local * &spatial));
            let b = joint.trace_product(&(&local * &full));
            worst = worst.max((a - lhs_spatial).norm()).max((b - lhs_full).norm());
        }
    }
    Ok(worst)
}

/// `S_{a2b1} (V_{a1a2} (x) V_{b1b2}) S_{a2b1}` on modes ordered `a1 b1 a2 b2`.
pub fn overlap_operator() -> ComplexMatrix {
    let s = ComplexMatrix::qubit_swap(4, 1, 2).expect("valid qubits");
    let v = v_operator();
    &(&s * &v.kron(&v)) * &s
}

/// `Tr[overlap_operator (rho1 (x) rho2)]`, which equals `4 Tr(rho1 rho2)`.
pub fn overlap_operator_check(rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
    overlap_operator().trace_product(&rho1.matrix().kron(rho2.matrix())).re
}

/// Overlaps of a state pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapSet {
    pub o11: f64,
    pub o22: f64,
    pub o12: f64,
    pub o2_12: f64,
    /// Every word in [`MOMENT_WORDS`], keyed by its digit string.
    pub mixed: BTreeMap<String, f64>,
}

impl OverlapSet {
    pub fn word(&self, w: &str) -> f64 {
        self.mixed.get(w).copied().unwrap_or(f64::NAN)
    }
}

/// Computes every overlap by matrix products and by Bloch contractions,
/// failing if the two routes disagree. `O2_12` additionally goes through the
/// A-tensors.
pub fn overlap_set(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<OverlapSet> {
    let r1 = to_correlation(rho1)?;
    let r2 = to_correlation(rho2)?;
    let mut mixed = BTreeMap::new();
    for w in MOMENT_WORDS {
        let word: Word = w.parse()?;
        let a = word.matrix_trace(rho1, rho2);
        let b = word.bloch_trace(&r1, &r2);
        if (a - b.re).abs() > ROUTE_TOL || b.im.abs() > ROUTE_TOL {
            return Err(Error::RouteMismatch { what: format!("word {w}"), a, b: b.re });
        }
        mixed.insert(w.to_string(), a);
    }
    let o12 = overlap_first(&r1, &r2);
    if (o12 - mixed["12"]).abs() > ROUTE_TOL {
        return Err(Error::RouteMismatch { what: "O(rho1, rho2)".into(), a: o12, b: mixed["12"] });
    }
    let o2 = overlap_second_from(&r1, &r2)?;
    if (o2 - mixed["1212"]).abs() > ROUTE_TOL {
        return Err(Error::RouteMismatch { what: "O2(rho1, rho2)".into(), a: o2, b: mixed["1212"] });
    }
    Ok(OverlapSet {
        o11: overlap_first(&r1, &r1),
        o22: overlap_first(&r2, &r2),
        o12,
        o2_12: o2,
        mixed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentSet {
    pub pi1: f64,
    pub pi2: f64,
    pub pi3: f64,
    pub pi4: f64,
}

/// Expands `Tr(rho1 - rho2)^n` into overlaps:
///
/// ```text
/// Pi2 = O11 + O22 - 2 O12
/// Pi3 = Tr rho1^3 - 3 Tr(rho1^2 rho2) + 3 Tr(rho1 rho2^2) - Tr rho2^3
/// Pi4 = Tr rho1^4 + Tr rho2^4 - 4 Tr(rho1^3 rho2) - 4 Tr(rho1 rho2^3)
///       + 4 Tr(rho1^2 rho2^2) + 2 O2(rho1, rho2)
/// ```
pub fn moments_from_overlaps(o: &OverlapSet) -> MomentSet {
    let w = |s: &str| o.word(s);
    MomentSet {
        pi1: 0.0,
        pi2: o.o11 + o.o22 - 2.0 * o.o12,
        pi3: w("111") - 3.0 * w("112") + 3.0 * w("122") - w("222"),
        pi4: w("1111") + w("2222") - 4.0 * w("1112") - 4.0 * w("1222") + 4.0 * w("1122") + 2.0 * o.o2_12,
    }
}

pub fn moments(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<MomentSet> {
    Ok(moments_from_overlaps(&overlap_set(rho1, rho2)?))
}

/// Roots of `l^4 - Pi2/2 l^2 - Pi3/3 l + det = 0`, `det = (Pi2^2/2 - Pi4)/4`.
///
/// The polynomial is rescaled by `s = sqrt(Pi2)` so the roots are of order
/// one, solved through companion-matrix eigenvalues, and near-coincident
/// roots are merged. `Pi2 <= 0` yields four zero roots.
pub fn characteristic_roots(m: &MomentSet) -> Result<[C64; 4]> {
    let zero = C64::new(0.0, 0.0);
    if m.pi2 <= 0.0 {
        return Ok([zero; 4]);
    }
    let s = m.pi2.sqrt();
    let c2 = -0.5;
    let c1 = -m.pi3 / (3.0 * s * s * s);
    let c0 = 0.25 * (0.5 * m.pi2 * m.pi2 - m.pi4) / (m.pi2 * m.pi2);
    let companion = vec![
        vec![0.0, 0.0, 0.0, -c0],
        vec![1.0, 0.0, 0.0, -c1],
        vec![0.0, 1.0, 0.0, -c2],
        vec![0.0, 0.0, 1.0, 0.0],
    ];
    let ev = hessenberg_eigenvalues(&companion).ok_or(Error::IllConditionedMoments(f64::NAN))?;
    Ok(cleanup_roots([ev[0], ev[1], ev[2], ev[3]]).map(|z| z * s))
}

/// A multiple real root perturbed by rounding splits into a small cluster,
/// complex or straddling its true value; such clusters are replaced by
/// their mean, which is accurate to rounding.
fn cleanup_roots(z: [C64; 4]) -> [C64; 4] {
    fn find(p: &[usize; 4], mut i: usize) -> usize {
        while p[i] != i {
            i = p[i];
        }
        i
    }
    let real = |w: C64| w.im.abs() <= 1e-12;
    let mut parent = [0usize, 1, 2, 3];
    for i in 0..4 {
        for j in i + 1..4 {
            let d = (z[i] - z[j]).norm();
            let tol = if real(z[i]) && real(z[j]) { ROOT_CLUSTER_TOL } else { ROOT_COMPLEX_CLUSTER_TOL };
            if d < tol {
                let (a, b) = (find(&parent, i), find(&parent, j));
                parent[a] = b;
            }
        }
    }
    let mut out = z;
    for root in 0..4 {
        let members: Vec<usize> = (0..4).filter(|&i| find(&parent, i) == root).collect();
        if members.len() > 1 {
            let mean = members.iter().map(|&i| z[i]).sum::<C64>() / members.len() as f64;
            for &i in &members {
                out[i] = mean;
            }
        }
    }
    out
}

/// Trace distance `1/2 sum |l_i|` over the characteristic roots; fails when
/// the moments do not describe a Hermitian difference.
pub fn trace_distance_via_moments(m: &MomentSet) -> Result<f64> {
    if m.pi2 <= 0.0 && (m.pi3.abs() > 1e-12 || m.pi4.abs() > 1e-12) {
        return Err(Error::IllConditionedMoments(m.pi4.abs().max(m.pi3.abs())));
    }
    let roots = characteristic_roots(m)?;
    let imag = roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > ROOT_IMAG_TOL {
        return Err(Error::IllConditionedMoments(imag));
    }
    let sum: C64 = roots.iter().sum();
    if sum.norm() > 1e-8 {
        return Err(Error::IllConditionedMoments(sum.norm()));
    }
    Ok(0.5 * roots.iter().map(|z| z.re.abs()).sum::<f64>())
}

/// As [`trace_distance_via_moments`] but projects complex roots onto the
/// real axis; meant for noisy moment estimates.
pub fn trace_distance_via_moments_lenient(m: &MomentSet) -> f64 {
    match characteristic_roots(m) {
        Ok(roots) => 0.5 * roots.iter().map(|z| z.re.abs()).sum::<f64>(),
        Err(_) => f64::NAN,
    }
}

/// Distances reachable from overlaps alone; the fidelity itself is only
/// bracketed by `E` and `G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapDistances {
    pub subfidelity: f64,
    pub superfidelity: f64,
    pub hilbert_schmidt: f64,
    pub trace_distance: f64,
}

pub fn distances_from_overlaps(o: &OverlapSet, m: &MomentSet) -> Result<OverlapDistances> {
    let tol = OVERLAP_RADICAND_TOL;
    Ok(OverlapDistances {
        subfidelity: o.o12 + clipped_sqrt(2.0 * (o.o12 * o.o12 - o.o2_12), tol, "subfidelity")?,
        superfidelity: o.o12 + clipped_sqrt((1.0 - o.o11) * (1.0 - o.o22), tol, "superfidelity")?,
        hilbert_schmidt: clipped_sqrt(m.pi2, tol, "Hilbert-Schmidt distance")?,
        trace_distance: trace_distance_via_moments(m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::state::{random_state, RandomMeasure};

    fn bell() -> DensityMatrix {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        DensityMatrix::from_pure(&[h, z, z, h]).unwrap()
    }

    fn pair(seed: u64) -> (DensityMatrix, DensityMatrix) {
        (
            random_state(4, RandomMeasure::Ginibre, 2 * seed).unwrap(),
            random_state(4, RandomMeasure::Ginibre, 2 * seed + 1).unwrap(),
        )
    }

    #[test]
    fn first_overlap_closed_forms() {
        let mixed = to_correlation(&DensityMatrix::maximally_mixed(4).unwrap()).unwrap();
        assert!((overlap_first(&mixed, &mixed) - 0.25).abs() < 1e-15);
        let b = to_correlation(&bell()).unwrap();
        assert!((overlap_first(&b, &b) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn a_tensor_closed_forms() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!((overlap_second(&mixed, &mixed).unwrap() - 1.0 / 64.0).abs() < 1e-15);
        assert!((overlap_second(&bell(), &bell()).unwrap() - 1.0).abs() < 1e-13);
        let t = a_tensors();
        assert!((t.get(1, [0; 8]) - C64::new(1.0 / 16.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn a_tensor_contraction_matches_products() {
        for s in 0..20 {
            let (a, b) = pair(s);
            let want = oracle::second_overlap(&a, &b).unwrap();
            assert!((overlap_second(&a, &b).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_operator_is_pair_exchange() {
        let direct = ComplexMatrix::qubit_permutation(&[2, 3, 0, 1]).unwrap();
        assert!(shift_operator().max_abs_diff(&direct) < 1e-15);
        let (a, b) = pair(3);
        let want = oracle::second_overlap(&a, &b).unwrap();
        assert!((shift_operator_check(&a, &b).unwrap() - want).abs() < 1e-13);
        assert!((four_copy_shift_check(&a, &b).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn shift_on_equal_states_gives_fourth_power() {
        let (a, _) = pair(4);
        let want = a.matrix().pow(4).trace().re;
        assert!((shift_operator_check(&a, &a).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn shift_on_commuting_diagonals() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.4, 0.1, 0.25, 0.25];
        let a = DensityMatrix::diagonal(&p).unwrap();
        let b = DensityMatrix::diagonal(&q).unwrap();
        let want: f64 = p.iter().zip(&q).map(|(x, y)| (x * y) * (x * y)).sum();
        assert!((shift_operator_check(&a, &b).unwrap() - want).abs() < 1e-15);
        let o = overlap_set(&a, &b).unwrap();
        let o12: f64 = p.iter().zip(&q).map(|(x, y)| x * y).sum();
        assert!((o.o12 - o12).abs() < 1e-15);
    }

    #[test]
    fn s_prime_four_term_form() {
        assert!(s_prime_residual() < 1e-12);
    }

    #[test]
    fn product_rule_and_overlap_operator() {
        let (a, b) = pair(5);
        assert!(product_rule_residual(&a, &b).unwrap() < 1e-12);
        let o = oracle::overlap(&a, &b).unwrap();
        assert!((overlap_operator_check(&a, &b) - 4.0 * o).abs() < 1e-12);
    }

    #[test]
    fn moments_match_direct_powers() {
        for s in 0..20 {
            let (a, b) = pair(s + 10);
            let m = moments(&a, &b).unwrap();
            let d = a.matrix() - b.matrix();
            assert!((m.pi2 - d.pow(2).trace().re).abs() < 1e-12);
            assert!((m.pi3 - d.pow(3).trace().re).abs() < 1e-12);
            assert!((m.pi4 - d.pow(4).trace().re).abs() < 1e-12);
        }
    }

    #[test]
    fn moment_closed_forms() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let m = moments(&bell(), &mixed).unwrap();
        assert!((m.pi2 - 0.75).abs() < 1e-14);
        let z = moments(&mixed, &mixed).unwrap();
        assert!(z.pi2.abs() < 1e-15 && z.pi3.abs() < 1e-15 && z.pi4.abs() < 1e-15);
        assert_eq!(trace_distance_via_moments(&z).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_pure_spectrum() {
        let m = MomentSet { pi1: 0.0, pi2: 2.0, pi3: 0.0, pi4: 2.0 };
        assert!((trace_distance_via_moments(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_versus_mixed_triple_degeneracy() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let m = moments(&bell(), &mixed).unwrap();
        assert!((trace_distance_via_moments(&m).unwrap() - 0.75).abs() < 1e-8);
    }

    #[test]
    fn inconsistent_moments_are_rejected() {
        // Pi2 = 0 with Pi4 > 0 is impossible for a Hermitian difference.
        let m = MomentSet { pi1: 0.0, pi2: 0.0, pi3: 0.0, pi4: 1.0 };
        assert!(matches!(trace_distance_via_moments(&m), Err(Error::IllConditionedMoments(_))));
    }

    #[test]
    fn overlap_distances_for_worked_pair() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let o = overlap_set(&bell(), &mixed).unwrap();
        let d = distances_from_overlaps(&o, &moments_from_overlaps(&o)).unwrap();
        assert!((d.subfidelity - 0.25).abs() < 1e-12);
        assert!((d.superfidelity - 0.25).abs() < 1e-12);
        assert!((d.hilbert_schmidt - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((d.trace_distance - 0.75).abs() < 1e-8);
    }

    #[test]
    fn word_parsing() {
        assert_eq!("1122".parse::<Word>().unwrap().signature(), (2, 2));
        assert!("13".parse::<Word>().is_err());
        assert!("".parse::<Word>().is_err());
        assert_eq!("112".parse::<Word>().unwrap().swapped().to_string(), "221");
    }
}
