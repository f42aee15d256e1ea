mod common;

use common::{bell, ginibre_pair, mixed};
use qdistance::derive::{build_basis, fit_coefficients, FitOptions, Target};
use qdistance::estimation::{estimate_distances, EstimationOptions, EstimationSetup, Measure};
use qdistance::graph::MeasurementGraph;
use qdistance::interferometer::{plan_configurations, sample_graph, v_observable_sample};
use qdistance::oracle;
use qdistance::state::{random_state, ModeLayout, RandomMeasure, StateId};
use qdistance::statefile::StateFile;
use qdistance::sweep::{run_sweep, Ensemble, SweepOptions};
use qdistance::Error;

fn opts(shots: u64, seed: u64) -> EstimationOptions {
    EstimationOptions { shots, seed, bootstrap: 100 }
}

#[test]
fn two_pair_configuration_reconstructs_overlap() {
    let (a, b) = ginibre_pair(41);
    let layout = ModeLayout::from_states(&[StateId::One, StateId::Two]).unwrap();
    let n = 1_000_000;
    let counts = v_observable_sample(&layout, &[(0, 2), (1, 3)], &a, &b, n, 7).unwrap();
    let (pa, pb, pab) = (counts.all_singlet_frequency(1), counts.all_singlet_frequency(2), counts.all_singlet_frequency(3));
    let o = 1.0 - 2.0 * pa - 2.0 * pb + 4.0 * pab;
    // Single-shot values of 1 - 2x_a - 2x_b + 4x_a x_b are (1 - 2x_a)(1 - 2x_b) = +-1.
    let sigma = ((1.0 - o * o) / n as f64).sqrt();
    let exact = oracle::overlap(&a, &b).unwrap();
    assert!((o - exact).abs() <= 4.0 * sigma, "{o} vs {exact} (sigma {sigma})");
    assert_eq!(counts.marginal(0).iter().sum::<u64>(), n);
}

#[test]
fn graph_samples_are_consistent() {
    let (a, b) = ginibre_pair(42);
    let g: MeasurementGraph = "1122:a1-a3,b2-b4".parse().unwrap();
    for shots in [1, 10, 1000] {
        let out = sample_graph(&g, &a, &b, shots, 3).unwrap();
        assert!(out.successes <= shots);
        assert!((0.0..=1.0).contains(&out.probability));
    }
    assert!(matches!(sample_graph(&g, &a, &b, 0, 3), Err(Error::InvalidGraph(_))));
}

#[test]
fn bell_against_mixed_estimate() {
    let setup = EstimationSetup::standard().unwrap();
    let m = [Measure::HilbertSchmidt];
    let r = estimate_distances(setup, &setup.plan(&m).unwrap(), &m, &bell(), &mixed(), &opts(1_000_000, 2)).unwrap();
    let h = r.get(Measure::HilbertSchmidt).unwrap();
    assert!((h.estimate - 3f64.sqrt() / 2.0).abs() <= 4.0 * h.std_err);
    assert_eq!(r.seed, 2);
}

#[test]
fn identical_states_give_zero_within_errors() {
    let setup = EstimationSetup::standard().unwrap();
    let m = [Measure::HilbertSchmidtSq, Measure::HilbertSchmidt];
    let plan = setup.plan(&m).unwrap();
    let rho = random_state(4, RandomMeasure::Ginibre, 43).unwrap();
    for seed in 0..5 {
        let r = estimate_distances(setup, &plan, &m, &rho, &rho, &opts(1_000_000, seed)).unwrap();
        for e in &r.estimates {
            assert!(e.estimate.abs() <= 4.0 * e.std_err, "{e:?}");
        }
    }
}

#[test]
fn subfidelity_below_superfidelity_for_separated_states() {
    let setup = EstimationSetup::standard().unwrap();
    let m = [Measure::Subfidelity, Measure::Superfidelity];
    let plan = setup.plan(&m).unwrap();
    let mut checked = 0;
    for i in 0..20 {
        let a = random_state(4, RandomMeasure::Ginibre, 100 + i).unwrap();
        let b = random_state(4, RandomMeasure::Ginibre, 200 + i).unwrap();
        let (e, g) = oracle::sub_super_fidelity(&a, &b).unwrap();
        let r = estimate_distances(setup, &plan, &m, &a, &b, &opts(1_000_000, i)).unwrap();
        let (ee, ge) = (r.get(Measure::Subfidelity).unwrap(), r.get(Measure::Superfidelity).unwrap());
        if g - e > 5.0 * (ee.std_err + ge.std_err) {
            assert!(ee.estimate <= ge.estimate, "pair {i}: E {ee:?} G {ge:?}");
            checked += 1;
        }
    }
    assert!(checked >= 5, "only {checked} well-separated pairs");
}

#[test]
fn uncovered_graphs_are_reported() {
    let setup = EstimationSetup::standard().unwrap();
    let plan = setup.plan(&[Measure::HilbertSchmidt]).unwrap();
    let (a, b) = ginibre_pair(44);
    let err = estimate_distances(setup, &plan, &[Measure::TraceDistance], &a, &b, &opts(1000, 1)).unwrap_err();
    assert!(matches!(err, Error::MissingGraphs(ref v) if !v.is_empty()), "{err}");
}

#[test]
fn pi2_plan_counts() {
    let setup = EstimationSetup::standard().unwrap();
    let graphs: Vec<_> = setup.fit("pi2").unwrap().support_graphs().into_iter().collect();
    let plan = plan_configurations(&graphs);
    assert_eq!(graphs.len(), 9);
    assert_eq!(plan.maximal_count(), 3);
    assert_eq!(plan.total_photon_pairs(), 6);
    assert!(plan.missing(&graphs).is_empty());
}

#[test]
fn zero_distance_sweep_is_unbiased_in_h_squared() {
    let setup = EstimationSetup::standard().unwrap();
    let opts = SweepOptions {
        pairs: 10,
        repeats: 4,
        shots: vec![100_000],
        ensemble: Ensemble::Identical,
        measures: vec![Measure::HilbertSchmidtSq],
        bootstrap: 0,
        seed: 4,
    };
    let r = run_sweep(setup, &opts).unwrap();
    let row = r.row(100_000, Measure::HilbertSchmidtSq).unwrap();
    assert!(row.bias.abs() <= 4.0 * row.rmse / (row.runs as f64).sqrt(), "{row:?}");
}

#[test]
fn shipped_states_load() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../states");
    let b = StateFile::load(format!("{root}/bell.json")).unwrap();
    let m = StateFile::load(format!("{root}/mixed.json")).unwrap();
    assert!(b.state.matrix().max_abs_diff(bell().matrix()) < 1e-15);
    assert!(m.state.matrix().max_abs_diff(mixed().matrix()) < 1e-15);
}

#[test]
fn fits_are_deterministic() {
    let basis = build_basis(2).unwrap();
    let o = FitOptions::default();
    let t: Target = "12".parse().unwrap();
    assert_eq!(fit_coefficients(&t, &basis, &o).unwrap(), fit_coefficients(&t, &basis, &o).unwrap());
}
