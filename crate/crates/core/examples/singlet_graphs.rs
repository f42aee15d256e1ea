//! Measurement graphs: singlet projections on pairs of modes across copies
//! of the two states. A graph's probability is computed on the assembled
//! multi-copy state and, independently, from the correlation matrices.

use qdistance::graph::{graph_probability, graph_probability_bloch, MeasurementGraph};
use qdistance::state::{random_state, to_correlation, RandomMeasure};

fn main() -> qdistance::Result<()> {
    let rho1 = random_state(4, RandomMeasure::Ginibre, 21)?;
    let rho2 = random_state(4, RandomMeasure::Ginibre, 22)?;
    let (r1, r2) = (to_correlation(&rho1)?, to_correlation(&rho2)?);

    for text in ["12:a1-a2", "12:a1-a2,b1-b2", "1122:a1-a3,b2-b4", "1212:a1-b2,a2-b3,a3-b4,a4-b1"] {
        let g: MeasurementGraph = text.parse()?;
        let dense = graph_probability(&g, &rho1, &rho2)?;
        let bloch = graph_probability_bloch(&g, &r1, &r2);
        println!(
            "{:<34} canonical {:<34} connected {:<5} p = {:.10}  ({:.1e})",
            g.to_string(),
            g.canonical().to_string(),
            g.is_connected(),
            dense,
            (dense - bloch).abs()
        );
    }
    Ok(())
}
