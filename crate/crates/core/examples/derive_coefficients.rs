//! Recovers graph-probability decompositions of `Pi2` and `O2` by fitting
//! random state pairs, snapping coefficients to thirds.

use qdistance::derive::{build_basis, fit_coefficients, FitOptions, Target};

fn main() -> qdistance::Result<()> {
    let opts = FitOptions::default();
    let two = build_basis(2)?;
    println!("two-copy basis: {} graphs, {} monomials", two.graphs().len(), two.monomials().len());

    let pi2 = fit_coefficients(&Target::Pi2, &two, &opts)?;
    print!("{}", pi2.to_table());
    println!("held-out residual {:.2e}\n", pi2.held_out_residual);

    let four = build_basis(4)?;
    println!("four-copy basis: {} graphs, {} monomials", four.graphs().len(), four.monomials().len());
    let o2 = fit_coefficients(&"o2".parse()?, &four, &opts)?;
    println!(
        "O2: {} graphs, {} terms, denominators {:?}, held-out residual {:.2e}",
        o2.support_graphs().len(),
        o2.terms.len(),
        o2.denominators(),
        o2.held_out_residual
    );
    Ok(())
}
