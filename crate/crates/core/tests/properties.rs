mod common;

use common::{degenerate_pair, ginibre_pair, pure_pair};
use proptest::prelude::*;
use qdistance::derive::{Coefficient, CoefficientVector};
use qdistance::estimation::{EstimationOptions, EstimationSetup, Measure, PreparedExperiment};
use qdistance::graph::{graph_probability, graph_probability_bloch, MeasurementGraph};
use qdistance::interferometer::joint_probabilities;
use qdistance::oracle::{self, distance_set};
use qdistance::overlap::{moments, overlap_set, trace_distance_via_moments};
use qdistance::state::{
    assemble, from_correlation, random_state, random_unitary, rng_from_seed, swap_modes, to_correlation, DensityMatrix,
    ModeLayout, RandomMeasure, StateId,
};
use qdistance::statefile::StateFile;

fn state(seed: u64, kind: u8) -> DensityMatrix {
    let m = match kind % 3 {
        0 => RandomMeasure::Ginibre,
        1 => RandomMeasure::Pure,
        _ => RandomMeasure::Rank(2),
    };
    random_state(4, m, seed).unwrap()
}

fn spectrum(rho: &DensityMatrix) -> Vec<f64> {
    let mut v = rho.matrix().eigvalsh();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn graph_on(layout: &str, edges: &str) -> MeasurementGraph {
    format!("{layout}:{edges}").parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlation_round_trip(seed in any::<u64>(), kind in 0u8..3) {
        let rho = state(seed, kind);
        let r = to_correlation(&rho).unwrap();
        prop_assert!((r.get(0, 0) - 1.0).abs() < 1e-12);
        prop_assert!(r.as_array().iter().flatten().all(|v| v.abs() <= 1.0 + 1e-12));
        prop_assert!(from_correlation(&r).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn distances_are_symmetric(s1 in any::<u64>(), s2 in any::<u64>(), k1 in 0u8..3, k2 in 0u8..3) {
        let (a, b) = (state(s1, k1), state(s2, k2));
        let (x, y) = (distance_set(&a, &b).unwrap(), distance_set(&b, &a).unwrap());
        for (u, v) in [
            (x.fidelity, y.fidelity),
            (x.trace_distance, y.trace_distance),
            (x.hilbert_schmidt, y.hilbert_schmidt),
            (x.subfidelity, y.subfidelity),
            (x.superfidelity, y.superfidelity),
        ] {
            prop_assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
    }

    #[test]
    fn bound_chain_holds(s1 in any::<u64>(), s2 in any::<u64>(), k1 in 0u8..3, k2 in 0u8..3) {
        let d = distance_set(&state(s1, k1), &state(s2, k2)).unwrap();
        for c in d.audit(1e-9) {
            prop_assert!(c.pass, "{} margin {}", c.name, c.margin);
        }
    }

    #[test]
    fn unitary_invariance(s1 in any::<u64>(), s2 in any::<u64>(), su in any::<u64>()) {
        let (a, b) = (state(s1, 0), state(s2, 1));
        let u = random_unitary(4, &mut rng_from_seed(su));
        let (ua, ub) = (a.conjugate(&u).unwrap(), b.conjugate(&u).unwrap());
        let (x, y) = (distance_set(&a, &b).unwrap(), distance_set(&ua, &ub).unwrap());
        prop_assert!((x.trace_distance - y.trace_distance).abs() < 1e-10);
        prop_assert!((x.hilbert_schmidt - y.hilbert_schmidt).abs() < 1e-10);
        prop_assert!((x.fidelity - y.fidelity).abs() < 1e-10);
        prop_assert!((x.subfidelity - y.subfidelity).abs() < 1e-10);
    }

    #[test]
    fn triangle_inequality(s in any::<u64>()) {
        let (a, b, c) = (state(s, 0), state(s ^ 1, 1), state(s ^ 2, 2));
        for d in [oracle::trace_distance, oracle::hilbert_schmidt] {
            prop_assert!(d(&a, &c).unwrap() <= d(&a, &b).unwrap() + d(&b, &c).unwrap() + 1e-10);
        }
    }

    #[test]
    fn overlap_ranges(seed in any::<u64>()) {
        let (a, b) = ginibre_pair(seed);
        let o = overlap_set(&a, &b).unwrap();
        prop_assert!(o.o11 >= 0.25 - 1e-12 && o.o11 <= 1.0 + 1e-12);
        prop_assert!(o.o22 >= 0.25 - 1e-12 && o.o22 <= 1.0 + 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&o.o12));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&o.o2_12));
    }

    #[test]
    fn moment_bounds(seed in any::<u64>(), kind in 0usize..4) {
        let (a, b) = if kind == 3 { ginibre_pair(seed) } else { degenerate_pair(kind, seed) };
        let m = moments(&a, &b).unwrap();
        prop_assert_eq!(m.pi1, 0.0);
        prop_assert!(m.pi2 >= -1e-12 && m.pi4 >= -1e-12);
        prop_assert!(m.pi4 <= m.pi2 * m.pi2 + 1e-12);
        let t = trace_distance_via_moments(&m).unwrap();
        prop_assert!((t - oracle::trace_distance(&a, &b).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn pure_pairs_saturate_upper_bound(seed in any::<u64>()) {
        let (a, b) = pure_pair(seed);
        let d = distance_set(&a, &b).unwrap();
        prop_assert!((d.trace_distance - (1.0 - d.fidelity).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn assembly_and_swaps_keep_spectrum(seed in any::<u64>(), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let (a, b) = ginibre_pair(seed);
        let layout = ModeLayout::from_states(&[StateId::One, StateId::Two]).unwrap();
        let rho = assemble(&[a, b], &layout).unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let before = spectrum(&rho);
        prop_assert!(before[0] > -1e-10);
        let after = spectrum(&swap_modes(&rho, i, j).unwrap());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn graph_routes_agree(seed in any::<u64>(), pick in 0usize..6) {
        let text = [
            ("12", "a1-a2"),
            ("12", "a1-b2,b1-a2"),
            ("1122", "a1-a3,b2-b4"),
            ("1212", "a1-b2,a2-b3,a3-b4,a4-b1"),
            ("112", "a1-a3,b2-b3"),
            ("1222", "a1-b4,b1-a2,b2-a3,b3-a4"),
        ][pick];
        let g = graph_on(text.0, text.1);
        let (a, b) = ginibre_pair(seed);
        let dense = graph_probability(&g, &a, &b).unwrap();
        let bloch = graph_probability_bloch(&g, &to_correlation(&a).unwrap(), &to_correlation(&b).unwrap());
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&dense));
        prop_assert!((dense - bloch).abs() < 1e-12);
        prop_assert!((graph_probability(&g.canonical(), &a, &b).unwrap() - dense).abs() < 1e-12);
        prop_assert_eq!(g.canonical().canonical(), g.canonical());
        prop_assert_eq!(g.to_string().parse::<MeasurementGraph>().unwrap(), g);
    }

    #[test]
    fn disjoint_copies_factorize(seed in any::<u64>()) {
        let (a, b) = ginibre_pair(seed);
        let left = graph_on("12", "a1-a2");
        let right = graph_on("12", "a1-b2,b1-a2");
        let union = graph_on("1212", "a1-a2,a3-b4,b3-a4");
        let p = graph_probability(&union, &a, &b).unwrap();
        let q = graph_probability(&left, &a, &b).unwrap() * graph_probability(&right, &a, &b).unwrap();
        prop_assert!((p - q).abs() < 1e-12);
    }

    #[test]
    fn copy_exchange_symmetry(seed in any::<u64>()) {
        let (a, b) = ginibre_pair(seed);
        let g = graph_on("1122", "a1-b3,b1-a4,a2-b4");
        let swapped = graph_on("1122", "a2-b3,b2-a4,a1-b4");
        let p = graph_probability(&g, &a, &b).unwrap();
        prop_assert!((p - graph_probability(&swapped, &a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn joint_outcomes_form_a_distribution(seed in any::<u64>()) {
        let (a, b) = ginibre_pair(seed);
        let layout = ModeLayout::from_states(&[StateId::One, StateId::Two, StateId::One, StateId::Two]).unwrap();
        let p = joint_probabilities(&layout, &[(0, 2), (1, 3), (4, 7), (5, 6)], &a, &b).unwrap();
        prop_assert_eq!(p.len(), 16);
        prop_assert!(p.iter().all(|&x| x >= -1e-12));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_text_round_trip(num in -60i64..60, den in prop::sample::select(vec![1i64, 3])) {
        let c = Coefficient::snap(num as f64 / den as f64);
        prop_assert!(c.is_thirds());
        let back: Coefficient = c.to_string().parse().unwrap();
        prop_assert!((back.value() - c.value()).abs() < 1e-15);
    }

    #[test]
    fn state_file_round_trip(seed in any::<u64>(), kind in 0u8..3) {
        let s = StateFile { label: format!("state {seed}"), state: state(seed, kind) };
        let dense = StateFile::parse(&s.to_json()).unwrap();
        let corr = StateFile::parse(&s.to_correlation_json().unwrap()).unwrap();
        prop_assert_eq!(&dense.label, &s.label);
        prop_assert!(dense.state.matrix().max_abs_diff(s.state.matrix()) < 1e-12);
        prop_assert!(corr.state.matrix().max_abs_diff(s.state.matrix()) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fits_vanish_on_identical_states(seed in any::<u64>()) {
        let setup = EstimationSetup::standard().unwrap();
        let r = to_correlation(&state(seed, 0)).unwrap();
        for name in ["pi2", "pi3", "pi4"] {
            prop_assert!(setup.fit(name).unwrap().evaluate_states(&r, &r).abs() < 1e-10);
        }
        let (a, b) = ginibre_pair(seed);
        let (ra, rb) = (to_correlation(&a).unwrap(), to_correlation(&b).unwrap());
        prop_assert!(setup.fit("pi2").unwrap().evaluate_states(&ra, &rb) >= -1e-9);
    }

    #[test]
    fn fit_tables_round_trip(pick in 0usize..7) {
        let setup = EstimationSetup::standard().unwrap();
        let fit = setup.fits().nth(pick).unwrap();
        let back = CoefficientVector::from_table(&fit.to_table()).unwrap();
        prop_assert_eq!(back.terms.len(), fit.terms.len());
        let (a, b) = ginibre_pair(pick as u64);
        let (ra, rb) = (to_correlation(&a).unwrap(), to_correlation(&b).unwrap());
        prop_assert!((back.evaluate_states(&ra, &rb) - fit.evaluate_states(&ra, &rb)).abs() < 1e-12);
    }

    #[test]
    fn estimation_is_deterministic(seed in any::<u64>(), shots in 1_000u64..50_000) {
        let setup = EstimationSetup::standard().unwrap();
        let measures = [Measure::HilbertSchmidtSq, Measure::Superfidelity];
        let plan = setup.plan(&measures).unwrap();
        let (a, b) = ginibre_pair(seed);
        let exp = PreparedExperiment::new(setup, &plan, &measures, &a, &b).unwrap();
        let opts = EstimationOptions { shots, seed, bootstrap: 0 };
        prop_assert_eq!(exp.run(&opts).unwrap(), exp.run(&opts).unwrap());
    }
}
