//! Simulated interferometric estimation of H, G, E and T with standard
//! errors, for a random pair and for the Bell / maximally mixed pair.

use qdistance::estimation::{estimate_distances, EstimationOptions, EstimationSetup, Measure};
use qdistance::sweep::oracle_value;
use qdistance::state::{random_state, DensityMatrix, RandomMeasure};

fn main() -> qdistance::Result<()> {
    let setup = EstimationSetup::standard()?;
    let measures = [Measure::HilbertSchmidt, Measure::Superfidelity, Measure::Subfidelity, Measure::TraceDistance];
    let plan = setup.plan(&measures)?;
    println!("{} configurations, {} photon pairs per round", plan.configurations.len(), plan.total_photon_pairs());

    let rho1 = random_state(4, RandomMeasure::Ginibre, 31)?;
    let rho2 = random_state(4, RandomMeasure::Ginibre, 32)?;
    let opts = EstimationOptions { shots: 1_000_000, seed: 5, bootstrap: 200 };
    let report = estimate_distances(setup, &plan, &measures, &rho1, &rho2, &opts)?;
    for e in &report.estimates {
        let truth = oracle_value(e.measure, &rho1, &rho2)?;
        println!(
            "{:<2} estimate {:.5} +- {:.5}  oracle {:.5}  z {:.2}",
            e.measure.symbol(),
            e.estimate,
            e.std_err,
            truth,
            (e.estimate - truth) / e.std_err
        );
    }
    for (name, (v, s)) in &report.quantities {
        println!("  {name:<5} {v:+.5} +- {s:.5}");
    }

    let bell = DensityMatrix::from_pure(&[
        qdistance::linalg::C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Default::default(),
        Default::default(),
        qdistance::linalg::C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ])?;
    let mixed = DensityMatrix::maximally_mixed(4)?;
    let h = estimate_distances(setup, &plan, &[Measure::HilbertSchmidt], &bell, &mixed, &opts)?;
    let e = h.get(Measure::HilbertSchmidt).expect("requested");
    println!("\nBell vs I/4: H = {:.5} +- {:.5} (exact {:.5})", e.estimate, e.std_err, 3f64.sqrt() / 2.0);
    Ok(())
}
