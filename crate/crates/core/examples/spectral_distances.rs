//! Reference distances from eigendecompositions, and the bound chain they
//! satisfy.

use qdistance::linalg::C64;
use qdistance::oracle::distance_set;
use qdistance::state::DensityMatrix;

fn main() -> qdistance::Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let bell = DensityMatrix::from_pure(&[C64::new(h, 0.0), z, z, C64::new(h, 0.0)])?;
    let mixed = DensityMatrix::maximally_mixed(4)?;

    let d = distance_set(&bell, &mixed)?;
    println!("Bell vs I/4");
    println!("  F = {:.6}  E = {:.6}  G = {:.6}", d.fidelity, d.subfidelity, d.superfidelity);
    println!("  T = {:.6}  H = {:.6}  D_B^2 = {:.6}", d.trace_distance, d.hilbert_schmidt, d.bures_sq);
    for c in d.audit(1e-9) {
        println!("  {:<24} {}  margin {:+.3e}", c.name, if c.pass { "ok" } else { "FAIL" }, c.margin);
    }
    Ok(())
}
