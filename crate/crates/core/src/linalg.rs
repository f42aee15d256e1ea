//! Dense complex matrices backed by `nalgebra`.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of the basis index,
//! so `kron(A, B)` puts `A` on the lower-numbered qubits.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Eigenvalues below this fraction of the spectral radius are treated as zero
/// when taking square roots of positive semidefinite matrices.
pub const SPECTRAL_CUTOFF: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

/// Spectrum of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::NotSquare { rows: dim, cols: entries.len() / dim.max(1) });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub(crate) fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n * n).map(|k| self.0[(k / n, k % n)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * other.0[(j, i)];
            }
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Eigendecomposition of the Hermitian part `(A + A^dag) / 2`.
    pub fn eigh(&self) -> HermitianEigen {
        let h = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let eig = [f64::EPSILON, 1e-14, 1e-12]
            .into_iter()
            .find_map(|eps| SymmetricEigen::try_new(h.clone(), eps, 10_000))
            .expect("Hermitian eigensolver converges");
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), order.len(), |i, c| eig.eigenvectors[(i, order[c])]);
        HermitianEigen { values, vectors }
    }

    pub fn eigvalsh(&self) -> Vec<f64> {
        self.eigh().values
    }

    /// Rebuilds `V f(D) V^dag` from the Hermitian spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let HermitianEigen { values, vectors } = self.eigh();
        let n = self.dim();
        let mut scaled = vectors.clone();
        for (c, &v) in values.iter().enumerate() {
            let fv = f(v);
            for i in 0..n {
                scaled[(i, c)] *= fv;
            }
        }
        Self(scaled * vectors.adjoint())
    }

    /// Square root of a positive semidefinite matrix; eigenvalues under the
    /// relative cutoff are set to zero.
    pub fn psd_sqrt(&self) -> Self {
        let values = self.eigvalsh();
        let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = SPECTRAL_CUTOFF * radius.max(f64::MIN_POSITIVE);
        self.map_spectrum(|v| if v > cut { v.sqrt() } else { 0.0 })
    }

    /// Reorders qubits: input qubit `q` lands on position `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        if 1usize << n != self.dim() {
            return Err(Error::DimensionMismatch(1 << n, self.dim()));
        }
        validate_perm(perm)?;
        let map: Vec<usize> = (0..self.dim()).map(|x| permute_index(x, perm)).collect();
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                out[(map[i], map[j])] = self.0[(i, j)];
            }
        }
        Ok(Self(out))
    }

    /// Permutation unitary moving qubit `q` to position `perm[q]`.
    pub fn qubit_permutation(perm: &[usize]) -> Result<Self> {
        validate_perm(perm)?;
        let dim = 1usize << perm.len();
        let mut m = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            m[(permute_index(x, perm), x)] = C64::new(1.0, 0.0);
        }
        Ok(Self(m))
    }

    /// Swap unitary exchanging qubits `i` and `j` of an `n`-qubit register.
    pub fn qubit_swap(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::InvalidMode { mode: i.max(j), modes: n });
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(i, j);
        Self::qubit_permutation(&perm)
    }

    /// Embeds a single-qubit operator on qubit `q` of an `n`-qubit register.
    pub fn embed(op: &Self, q: usize, n: usize) -> Self {
        let mut out = Self::identity(1);
        for k in 0..n {
            out = if k == q { out.kron(op) } else { out.kron(&Self::identity(2)) };
        }
        out
    }
}

/// Eigenvalues of a real upper-Hessenberg matrix (row-major) by balancing
/// followed by Francis double-shift QR with exceptional shifts. Returns
/// `None` if an eigenvalue fails to converge within `30 max(n, 10)`
/// iterations.
pub fn hessenberg_eigenvalues(h: &[Vec<f64>]) -> Option<Vec<C64>> {
    let n = h.len();
    let mut a: Vec<Vec<f64>> = h.to_vec();
    balance(&mut a);
    let sign = |a: f64, b: f64| if b >= 0.0 { a.abs() } else { -a.abs() };
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for (i, row) in a.iter().enumerate() {
        for v in &row[i.saturating_sub(1)..] {
            anorm += v.abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let u = nn as usize;
            let mut l = u;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[u][u];
            if l == u {
                wr[u] = x + t;
                nn -= 1;
                break;
            }
            let mut y = a[u - 1][u - 1];
            let mut w = a[u][u - 1] * a[u - 1][u];
            if l == u - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[u - 1] = x + z;
                    wr[u] = if z != 0.0 { x - w / z } else { x + z };
                } else {
                    wr[u - 1] = x + p;
                    wr[u] = x + p;
                    wi[u - 1] = -z;
                    wi[u] = z;
                }
                nn -= 2;
                break;
            }
            if its == 30 * n.max(10) {
                return None;
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(u + 1) {
                    row[i] -= x;
                }
                let s = a[u][u - 1].abs() + a[u - 1][u - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r);
            let mut m = u - 2;
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u1 = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v1 = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u1 + v1 == v1 {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=u {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < u {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != u - 1 { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=u {
                        let mut pj = a[k][j] + q * a[k + 1][j];
                        if k != u - 1 {
                            pj += r * a[k + 2][j];
                            a[k + 2][j] -= pj * z;
                        }
                        a[k + 1][j] -= pj * y;
                        a[k][j] -= pj * x;
                    }
                    let last = u.min(k + 3);
                    for row in a.iter_mut().take(last + 1).skip(l) {
                        let mut pi = x * row[k] + y * row[k + 1];
                        if k != u - 1 {
                            pi += z * row[k + 2];
                            row[k + 2] -= pi * r;
                        }
                        row[k + 1] -= pi * q;
                        row[k] -= pi;
                    }
                }
                k += 1;
            }
        }
    }
    Some(wr.into_iter().zip(wi).map(|(re, im)| C64::new(re, im)).collect())
}

/// Diagonal similarity scaling rows and columns to comparable norms.
fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let s = c + r;
                let mut f = 1.0;
                let mut g = r / RADIX;
                while c < g {
                    f *= RADIX;
                    c *= RADIX * RADIX;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= RADIX * RADIX;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    for v in a[i].iter_mut() {
                        *v /= f;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn validate_perm(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::Layout(format!("not a permutation: {perm:?}")));
        }
        seen[p] = true;
    }
    Ok(())
}

fn permute_index(x: usize, perm: &[usize]) -> usize {
    let n = perm.len();
    let mut y = 0;
    for (q, &p) in perm.iter().enumerate() {
        let bit = (x >> (n - 1 - q)) & 1;
        y |= bit << (n - 1 - p);
    }
    y
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_non_square_and_nan() {
        assert!(ComplexMatrix::from_dmatrix(DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::zeros(2, 2);
        m[(1, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(ComplexMatrix::from_dmatrix(m), Err(Error::NonFinite { row: 1, col: 0 })));
    }

    #[test]
    fn hermitian_eigen_of_known_matrix() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = ComplexMatrix::from_row_major(2, &[c(2., 0.), c(0., 1.), c(0., -1.), c(2., 0.)]).unwrap();
        let v = m.eigvalsh();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 3.0).abs() < 1e-14);
        let back = m.map_spectrum(|x| x);
        assert!(back.max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = ComplexMatrix::from_row_major(2, &[c(0.7, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.)]).unwrap();
        let s = m.psd_sqrt();
        assert!((&s * &s).max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn swap_moves_kron_factors() {
        let a = ComplexMatrix::from_row_major(2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 1.)]).unwrap();
        let b = ComplexMatrix::from_row_major(2, &[c(0., 1.), c(5., 0.), c(6., 0.), c(7., 0.)]).unwrap();
        let s = ComplexMatrix::qubit_swap(2, 0, 1).unwrap();
        let lhs = &(&s * &a.kron(&b)) * &s.adjoint();
        assert!(lhs.max_abs_diff(&b.kron(&a)) < 1e-15);
        assert!(a.kron(&b).permute_qubits(&[1, 0]).unwrap().max_abs_diff(&b.kron(&a)) < 1e-15);
    }

    fn companion(c: &[f64]) -> Vec<Vec<f64>> {
        // monic x^n + c[n-1] x^{n-1} + ... + c[0]
        let n = c.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 1..n {
            a[i][i - 1] = 1.0;
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[n - 1] = -c[i];
        }
        a
    }

    fn sorted_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn hessenberg_distinct_real_roots() {
        // (x-1)(x-2)(x+3)(x+0.5)
        let ev = sorted_re(hessenberg_eigenvalues(&companion(&[3.0, 2.5, -7.0, 0.5])).unwrap());
        for (z, want) in ev.iter().zip([-3.0, -0.5, 1.0, 2.0]) {
            assert!((z - C64::new(want, 0.0)).norm() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn hessenberg_two_double_roots() {
        // (x^2 - 1/4)^2
        let ev = hessenberg_eigenvalues(&companion(&[0.0625, 0.0, -0.5, 0.0])).unwrap();
        let abs_sum: f64 = ev.iter().map(|z| z.re.abs()).sum();
        assert!((abs_sum - 2.0).abs() < 1e-7, "{ev:?}");
        assert!(ev.iter().all(|z| (z.re.abs() - 0.5).abs() < 1e-7));
    }

    #[test]
    fn hessenberg_complex_pair() {
        // (x^2 + 1)(x - 2)(x + 2)
        let ev = sorted_re(hessenberg_eigenvalues(&companion(&[-4.0, 0.0, -3.0, 0.0])).unwrap());
        assert!((ev[0] - C64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[2] - C64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((ev[3] - C64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_product_matches_product() {
        let a = ComplexMatrix::from_row_major(2, &[c(1., 2.), c(2., 0.), c(3., -1.), c(4., 1.)]).unwrap();
        let b = ComplexMatrix::from_row_major(2, &[c(0., 1.), c(5., 0.), c(6., 2.), c(7., 0.)]).unwrap();
        assert!((a.trace_product(&b) - (&a * &b).trace()).norm() < 1e-13);
    }
}
