#![allow(dead_code)]

use qdistance::linalg::{ComplexMatrix, C64};
use qdistance::state::{derive_seed, random_state, random_unitary, rng_from_seed, DensityMatrix, RandomMeasure};
use rand::Rng;

pub fn ginibre_pair(seed: u64) -> (DensityMatrix, DensityMatrix) {
    (
        random_state(4, RandomMeasure::Ginibre, derive_seed(seed, 0)).unwrap(),
        random_state(4, RandomMeasure::Ginibre, derive_seed(seed, 1)).unwrap(),
    )
}

pub fn pure_pair(seed: u64) -> (DensityMatrix, DensityMatrix) {
    (
        random_state(4, RandomMeasure::Pure, derive_seed(seed, 0)).unwrap(),
        random_state(4, RandomMeasure::Pure, derive_seed(seed, 1)).unwrap(),
    )
}

pub fn qubit_pair(seed: u64) -> (DensityMatrix, DensityMatrix) {
    (
        random_state(2, RandomMeasure::Ginibre, derive_seed(seed, 0)).unwrap(),
        random_state(2, RandomMeasure::Ginibre, derive_seed(seed, 1)).unwrap(),
    )
}

pub fn bell() -> DensityMatrix {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    DensityMatrix::from_pure(&[h, z, z, h]).unwrap()
}

pub fn mixed() -> DensityMatrix {
    DensityMatrix::maximally_mixed(4).unwrap()
}

fn rotated(u: &ComplexMatrix, spectrum: &[f64; 4]) -> DensityMatrix {
    DensityMatrix::diagonal(spectrum).unwrap().conjugate(u).unwrap()
}

/// Pairs sharing an eigenbasis whose difference has a repeated eigenvalue.
/// `kind % 3` selects a triple root `{d, d, d, -3d}`, two double roots
/// `{e, e, -e, -e}`, or two swapped eigenvalues `{a, -a, 0, 0}` with
/// `a >= 0.05`.
pub fn degenerate_pair(kind: usize, seed: u64) -> (DensityMatrix, DensityMatrix) {
    let mut rng = rng_from_seed(seed);
    let u = random_unitary(4, &mut rng);
    let w: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
    let total: f64 = w.iter().sum();
    let p: [f64; 4] = std::array::from_fn(|i| 0.2 + 0.2 * w[i] / total);
    let delta = match kind % 3 {
        0 => {
            let d = rng.random_range(0.02..0.06) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            [d, d, d, -3.0 * d]
        }
        1 => {
            let e = rng.random_range(0.01..0.1);
            [e, e, -e, -e]
        }
        _ => {
            // A gap well above rounding keeps the pair away from the
            // near-identical regime, where moments cancel.
            let a = rng.random_range(0.05..0.2);
            let (v, w) = (rng.random_range(0.1..0.4), rng.random_range(0.1..0.4));
            let total = 2.0 * 0.3 - a + v + w;
            let p = [0.3 / total, (0.3 - a) / total, v / total, w / total];
            let q = [p[1], p[0], p[2], p[3]];
            return (rotated(&u, &p), rotated(&u, &q));
        }
    };
    let q: [f64; 4] = std::array::from_fn(|i| p[i] - delta[i]);
    (rotated(&u, &p), rotated(&u, &q))
}
