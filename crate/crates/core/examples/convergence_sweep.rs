//! A small convergence sweep written as CSV to stdout.

use qdistance::estimation::{EstimationSetup, Measure};
use qdistance::sweep::{run_sweep, Ensemble, SweepOptions};

fn main() -> qdistance::Result<()> {
    let setup = EstimationSetup::standard()?;
    let opts = SweepOptions {
        pairs: 6,
        repeats: 3,
        shots: vec![10_000, 100_000],
        ensemble: Ensemble::Ginibre,
        measures: vec![Measure::HilbertSchmidtSq, Measure::Superfidelity],
        bootstrap: 0,
        ..Default::default()
    };
    let result = run_sweep(setup, &opts)?;
    result.write_csv(std::io::stdout())?;
    for m in &opts.measures {
        if let Some(r) = result.rmse_ratio(*m, 10_000, 100_000) {
            eprintln!("{m}: rmse ratio {r:.2}");
        }
    }
    Ok(())
}
