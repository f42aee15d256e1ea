//! Round trip between a density matrix and its correlation matrix
//! `R_mn = Tr(rho sigma_m (x) sigma_n)`, with the overlap read off as
//! `Tr(rho1 rho2) = 1/4 sum R1_mn R2_mn`.

use qdistance::oracle;
use qdistance::overlap::overlap_first;
use qdistance::state::{from_correlation, random_state, to_correlation, RandomMeasure};

fn main() -> qdistance::Result<()> {
    let rho1 = random_state(4, RandomMeasure::Ginibre, 7)?;
    let rho2 = random_state(4, RandomMeasure::Pure, 8)?;
    let r1 = to_correlation(&rho1)?;
    let r2 = to_correlation(&rho2)?;

    println!("correlation matrix of rho1:");
    for row in r1.as_array() {
        println!("  {}", row.iter().map(|v| format!("{v:+.4}")).collect::<Vec<_>>().join(" "));
    }

    let back = from_correlation(&r1)?;
    println!("round-trip error      {:.2e}", back.matrix().max_abs_diff(rho1.matrix()));
    println!("Tr(rho1 rho2) matrix  {:.12}", oracle::overlap(&rho1, &rho2)?);
    println!("Tr(rho1 rho2) Bloch   {:.12}", overlap_first(&r1, &r2));
    println!("purity of rho2 (Bloch) {:.12}", overlap_first(&r2, &r2));
    Ok(())
}
