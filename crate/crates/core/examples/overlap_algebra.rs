//! The second overlap `Tr[(rho1 rho2)^2]` three ways: matrix products, the
//! Bloch-tensor contraction, and a shift operator on two copies of
//! `rho1 (x) rho2`.

use qdistance::oracle;
use qdistance::overlap::{overlap_second, overlap_set, shift_operator_check};
use qdistance::state::{random_state, RandomMeasure};

fn main() -> qdistance::Result<()> {
    let rho1 = random_state(4, RandomMeasure::Ginibre, 11)?;
    let rho2 = random_state(4, RandomMeasure::Ginibre, 12)?;

    println!("matrix   {:.14}", oracle::second_overlap(&rho1, &rho2)?);
    println!("tensors  {:.14}", overlap_second(&rho1, &rho2)?);
    println!("shift    {:.14}", shift_operator_check(&rho1, &rho2)?);

    let set = overlap_set(&rho1, &rho2)?;
    println!("\nO11 {:.6}  O22 {:.6}  O12 {:.6}", set.o11, set.o22, set.o12);
    for (word, v) in &set.mixed {
        println!("  Tr[{word:>4}] = {v:+.8}");
    }
    Ok(())
}
