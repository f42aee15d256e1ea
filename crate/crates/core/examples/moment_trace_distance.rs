//! Trace distance without diagonalizing `rho1 - rho2`: the moments
//! `Pi_n = Tr(rho1 - rho2)^n` fix a quartic whose roots are the eigenvalues.

use qdistance::oracle;
use qdistance::overlap::{characteristic_roots, moments, trace_distance_via_moments};
use qdistance::state::{random_state, DensityMatrix, RandomMeasure};

fn main() -> qdistance::Result<()> {
    let pairs = [
        ("ginibre pair", random_state(4, RandomMeasure::Ginibre, 3)?, random_state(4, RandomMeasure::Ginibre, 4)?),
        ("pure pair", random_state(4, RandomMeasure::Pure, 5)?, random_state(4, RandomMeasure::Pure, 6)?),
        (
            "degenerate",
            DensityMatrix::diagonal(&[0.4, 0.2, 0.2, 0.2])?,
            DensityMatrix::diagonal(&[0.1, 0.3, 0.3, 0.3])?,
        ),
    ];
    for (name, a, b) in &pairs {
        let m = moments(a, b)?;
        let roots = characteristic_roots(&m)?;
        println!("{name}");
        println!("  Pi2 {:+.6}  Pi3 {:+.6}  Pi4 {:+.6}", m.pi2, m.pi3, m.pi4);
        println!("  roots {:?}", roots.map(|z| format!("{:+.6}", z.re)));
        println!(
            "  T moments {:.12}  spectral {:.12}",
            trace_distance_via_moments(&m)?,
            oracle::trace_distance(a, b)?
        );
    }
    Ok(())
}
