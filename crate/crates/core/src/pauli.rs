//! Pauli basis and its structure constants.
//!
//! `sigma(0)` is the identity and `sigma(3) = diag(1, -1)`; `sigma(1)` and
//! `sigma(2)` follow the textbook phase convention.

use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

static PAULI: LazyLock<[ComplexMatrix; 4]> = LazyLock::new(|| {
    let m = |a: [C64; 4]| ComplexMatrix::from_row_major(2, &a).expect("2x2 literal");
    [
        m([ONE, ZERO, ZERO, ONE]),
        m([ZERO, ONE, ONE, ZERO]),
        m([ZERO, -I, I, ZERO]),
        m([ONE, ZERO, ZERO, -ONE]),
    ]
});

static PAULI_PAIRS: LazyLock<Vec<ComplexMatrix>> = LazyLock::new(|| {
    (0..16).map(|k| PAULI[k / 4].kron(&PAULI[k % 4])).collect()
});

static PRODUCTS: LazyLock<[[(usize, C64); 4]; 4]> = LazyLock::new(|| {
    let mut table = [[(0usize, ZERO); 4]; 4];
    for (m, row) in table.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            let c = (0..4)
                .find(|&c| structure_constant(m, k, c).norm() > 0.0)
                .expect("every Pauli product is a single Pauli");
            *slot = (c, structure_constant(m, k, c));
        }
    }
    table
});

pub fn pauli(m: usize) -> Result<ComplexMatrix> {
    PAULI.get(m).cloned().ok_or(Error::PauliIndex(m))
}

pub(crate) fn sigma(m: usize) -> &'static ComplexMatrix {
    &PAULI[m]
}

/// `sigma_m (x) sigma_n` as a 4x4 matrix.
pub fn pauli_pair(m: usize, n: usize) -> &'static ComplexMatrix {
    &PAULI_PAIRS[4 * m + n]
}

/// Kronecker delta restricted to spatial indices 1..=3.
pub fn delta3(a: usize, b: usize) -> f64 {
    if a == b && a != 0 {
        1.0
    } else {
        0.0
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Levi-Civita symbol on spatial indices, zero if any index is 0.
pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
        _ => 0.0,
    }
}

/// `f_{mkc}` with `sigma_m sigma_k = sum_c f_{mkc} sigma_c`.
pub fn structure_constant(m: usize, k: usize, c: usize) -> C64 {
    let re = delta3(c, m) * delta(k, 0)
        + delta3(c, k) * delta(m, 0)
        + delta3(m, k) * delta(c, 0)
        + delta(c, 0) * delta(m, 0) * delta(k, 0);
    C64::new(re, levi_civita(m, k, c))
}

/// The single `(c, phase)` with `sigma_m sigma_k = phase * sigma_c`.
pub fn pauli_product(m: usize, k: usize) -> (usize, C64) {
    PRODUCTS[m][k]
}

/// Trace of a product of single-qubit Pauli matrices.
pub fn pauli_word_trace(word: &[usize]) -> C64 {
    let mut acc = (0usize, ONE);
    for &m in word {
        let (c, phase) = pauli_product(acc.0, m);
        acc = (c, acc.1 * phase);
    }
    if acc.0 == 0 {
        acc.1 * 2.0
    } else {
        ZERO
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_index() {
        assert!(matches!(pauli(4), Err(Error::PauliIndex(4))));
    }

    #[test]
    fn trace_orthogonality() {
        for a in 0..4 {
            for b in 0..4 {
                let t = (sigma(a) * sigma(b)).trace();
                assert!((t - C64::new(2.0 * delta(a, b), 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn xy_is_iz() {
        let lhs = sigma(1) * sigma(2);
        assert!(lhs.max_abs_diff(&sigma(3).scale(I)) < 1e-15);
    }

    #[test]
    fn structure_constants_reproduce_products() {
        for m in 0..4 {
            for k in 0..4 {
                let prod = sigma(m) * sigma(k);
                let mut expand = ComplexMatrix::zeros(2);
                for c in 0..4 {
                    expand = &expand + &sigma(c).scale(structure_constant(m, k, c));
                }
                assert!(prod.max_abs_diff(&expand) < 1e-15, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn word_traces_match_matrices() {
        for w in 0..256usize {
            let word = [w >> 6, (w >> 4) & 3, (w >> 2) & 3, w & 3];
            let mut p = ComplexMatrix::identity(2);
            for &m in &word {
                p = &p * sigma(m);
            }
            assert!((p.trace() - pauli_word_trace(&word)).norm() < 1e-15);
        }
    }
}
