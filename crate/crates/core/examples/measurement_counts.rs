//! How many projections, configurations and photon pairs each workflow
//! needs, and how the counts compare with the published ones.

use qdistance::derive::{build_basis, fit_many, verify_table_claims, FitOptions, Target};
use qdistance::interferometer::plan_configurations;

fn main() -> qdistance::Result<()> {
    let opts = FitOptions::default();
    let mut fits = fit_many(&[Target::Pi2], &build_basis(2)?, &opts)?;
    let four: Vec<Target> = ["o2", "pi3", "pi4"].iter().map(|s| s.parse()).collect::<qdistance::Result<_>>()?;
    fits.extend(fit_many(&four, &build_basis(4)?, &opts)?);

    for f in &fits {
        let graphs: Vec<_> = f.support_graphs().into_iter().collect();
        let plan = plan_configurations(&graphs);
        println!(
            "{:<5} {:>3} graphs  {:>2} maximal  {:>2} configurations  {:>3} photon pairs",
            f.target,
            graphs.len(),
            plan.maximal_count(),
            plan.configurations.len(),
            plan.total_photon_pairs()
        );
    }
    println!();
    print!("{}", verify_table_claims(&fits));
    Ok(())
}
