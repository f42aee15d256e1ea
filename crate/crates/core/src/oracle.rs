//! Spectral reference values for every distance measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SPECTRAL_CUTOFF;
use crate::state::DensityMatrix;

/// Negative radicands down to this value are treated as rounding noise.
pub const RADICAND_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceSet {
    pub fidelity: f64,
    pub sqrt_fidelity: f64,
    pub bures_sq: f64,
    pub trace_distance: f64,
    pub hilbert_schmidt: f64,
    pub subfidelity: f64,
    pub superfidelity: f64,
    pub linear_entropy_1: f64,
    pub linear_entropy_2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    /// `rhs - lhs`; negative beyond the slack means a violation.
    pub margin: f64,
    pub pass: bool,
}

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

pub(crate) fn clipped_sqrt(x: f64, tol: f64, what: &'static str) -> Result<f64> {
    if x < -tol {
        return Err(Error::NegativeRadicand(x, what));
    }
    Ok(x.max(0.0).sqrt())
}

/// Uhlmann-Jozsa fidelity `[Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))]^2`.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    same_dim(rho1, rho2)?;
    let s = rho1.matrix().psd_sqrt();
    let inner = &(&s * rho2.matrix()) * &s;
    let values = inner.eigvalsh();
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = SPECTRAL_CUTOFF * radius;
    let root: f64 = values.iter().filter(|&&v| v > cut).map(|v| v.sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// Square root of [`fidelity`], the other common convention.
pub fn root_fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    Ok(fidelity(rho1, rho2)?.sqrt())
}

pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    same_dim(rho1, rho2)?;
    let diff = rho1.matrix() - rho2.matrix();
    Ok(0.5 * diff.eigvalsh().iter().map(|v| v.abs()).sum::<f64>())
}

pub fn hilbert_schmidt(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    same_dim(rho1, rho2)?;
    let diff = rho1.matrix() - rho2.matrix();
    Ok(diff.trace_product(&diff).re.max(0.0).sqrt())
}

/// `Tr(rho1 rho2)`.
pub fn overlap(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    same_dim(rho1, rho2)?;
    Ok(rho1.matrix().trace_product(rho2.matrix()).re)
}

/// `Tr[(rho1 rho2)^2]`.
pub fn second_overlap(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    same_dim(rho1, rho2)?;
    let p = rho1.matrix() * rho2.matrix();
    Ok(p.trace_product(&p).re)
}

/// `1 - Tr(rho^2)`, with rounding-level values snapped to zero so that pure
/// states give exactly zero.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    let s = 1.0 - rho.purity();
    if s < 1e-13 {
        0.0
    } else {
        s
    }
}

/// `E = O + sqrt(2 [O^2 - O2])`. The difference is computed from two terms
/// of size `O^2`, so values within rounding of zero count as zero.
pub fn subfidelity_from(o: f64, o2: f64) -> Result<f64> {
    let mut x = 2.0 * (o * o - o2);
    if x.abs() <= 64.0 * f64::EPSILON * o * o {
        x = 0.0;
    }
    Ok(o + clipped_sqrt(x, RADICAND_TOL, "subfidelity")?)
}

pub fn superfidelity_from(o: f64, s1: f64, s2: f64) -> Result<f64> {
    Ok(o + clipped_sqrt(s1 * s2, RADICAND_TOL, "superfidelity")?)
}

/// Subfidelity `E` and superfidelity `G`.
pub fn sub_super_fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<(f64, f64)> {
    let o = overlap(rho1, rho2)?;
    let e = subfidelity_from(o, second_overlap(rho1, rho2)?)?;
    let g = superfidelity_from(o, linear_entropy(rho1), linear_entropy(rho2))?;
    Ok((e, g))
}

pub fn distance_set(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<DistanceSet> {
    let f = fidelity(rho1, rho2)?;
    let (e, g) = sub_super_fidelity(rho1, rho2)?;
    Ok(DistanceSet {
        fidelity: f,
        sqrt_fidelity: f.sqrt(),
        bures_sq: 2.0 * (1.0 - f.sqrt()),
        trace_distance: trace_distance(rho1, rho2)?,
        hilbert_schmidt: hilbert_schmidt(rho1, rho2)?,
        subfidelity: e,
        superfidelity: g,
        linear_entropy_1: linear_entropy(rho1),
        linear_entropy_2: linear_entropy(rho2),
    })
}

impl DistanceSet {
    /// Checks the bound chain. The trace-distance bounds use the root
    /// fidelity `f = sqrt(F)`: `1 - f <= T <= sqrt(1 - f^2)`.
    pub fn audit(&self, slack: f64) -> Vec<InequalityCheck> {
        let f = self.fidelity;
        let rf = self.sqrt_fidelity;
        let t = self.trace_distance;
        let h = self.hilbert_schmidt;
        let check = |name, margin: f64| InequalityCheck { name, margin, pass: margin >= -slack };
        vec![
            check("E <= F", f - self.subfidelity),
            check("F <= G", self.superfidelity - f),
            check("1 - sqrt(F) <= T", t - (1.0 - rf)),
            check("T <= sqrt(1 - F)", (1.0 - rf * rf).max(0.0).sqrt() - t),
            check("0 <= H", h),
            check("H <= 2T", 2.0 * t - h),
            check("D_B^2 = 2(1 - sqrt(F))", -(self.bures_sq - 2.0 * (1.0 - rf)).abs()),
        ]
    }
}
