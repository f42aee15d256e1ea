//! Loading the shipped state files and writing a state in both formats.

use qdistance::statefile::StateFile;
use qdistance::state::{random_state, RandomMeasure};

fn main() -> qdistance::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../states");
    for name in ["bell.json", "mixed.json"] {
        let s = StateFile::load(format!("{root}/{name}"))?;
        println!("{name}: {} (purity {:.3})", s.label, s.state.purity());
    }
    let s = StateFile { label: "random".into(), state: random_state(4, RandomMeasure::Rank(2), 9)? };
    println!("{}", s.to_correlation_json()?);
    let bad = r#"{"label": "x", "correlation_matrix": [[1,0,0,0],[0,2,0,0],[0,0,2,0],[0,0,0,2]]}"#;
    println!("invalid state: {}", StateFile::parse(bad).unwrap_err());
    Ok(())
}
