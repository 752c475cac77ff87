use proptest::prelude::*;

use ppstat_core::diagnostics::{eval_linear_statistic, estimate_fluctuation, PalmSampler, TestFunction};
use ppstat_core::generators::sample_poisson;
use ppstat_core::matching::{stable_match, verify_stability};
use ppstat_core::percolation::build_boolean_model;
use ppstat_core::{
    superpose, GeneratorSpec, Label, Metric, MetricKind, PerturbationSpec, PointPattern, Process, RngSpec, Window,
};

fn plane(side: f64) -> Window {
    Window::cube(2, side).unwrap()
}

fn processes() -> Vec<Process> {
    vec![
        Process::Poisson { intensity: 0.7 },
        Process::ShiftedLattice,
        Process::ShiftedSitePercolation { p: 0.6 },
        Process::PerturbedLattice { perturbation: PerturbationSpec::Gaussian { sigma: 0.4 }, shift: true },
        Process::PerturbedLattice { perturbation: PerturbationSpec::UniformBall { radius: 0.3 }, shift: false },
        Process::DoubledPerturbedLattice { radius: 0.25 },
        Process::ColumnDeletedStack { p: 0.5, site_p: 0.75 },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samplers_are_deterministic_and_simple(seed in any::<u64>(), k in 0usize..7, torus in any::<bool>()) {
        let process = processes()[k].clone();
        let metric = if torus { MetricKind::Toroidal } else { MetricKind::Euclidean };
        let spec = GeneratorSpec::new(process, plane(12.0), metric);
        let rng = RngSpec::new(seed, 3);
        let a = spec.sample(rng).unwrap();
        let b = spec.sample(rng).unwrap();
        prop_assert_eq!(a.coords(), b.coords());
        // reconstructing from the coordinates must pass the simplicity and window checks
        let again = PointPattern::from_flat(a.window().clone(), a.metric().clone(), a.coords().to_vec(), a.label());
        prop_assert!(again.is_ok());
    }

    #[test]
    fn linear_statistic_adds_over_superposition(seed in any::<u64>(), scale in 1.0..9.0f64) {
        let w = plane(20.0);
        let a = sample_poisson(0.5, &w, &Metric::Euclidean, RngSpec::new(seed, 0)).unwrap();
        let b = sample_poisson(0.5, &w, &Metric::Euclidean, RngSpec::new(seed, 1)).unwrap();
        let both = superpose(&a, &b).unwrap();
        let tf = TestFunction::tent(2, scale);
        let c = [10.0, 10.0];
        let sum = eval_linear_statistic(&a, &tf, &c).unwrap() + eval_linear_statistic(&b, &tf, &c).unwrap();
        let whole = eval_linear_statistic(&both, &tf, &c).unwrap();
        prop_assert!((whole - sum).abs() <= 1e-12 * sum.abs().max(1.0));
    }

    #[test]
    fn linear_statistic_grows_on_the_plateau(seed in any::<u64>(), small in 0.5..4.0f64, extra in 0.0..4.0f64) {
        let large = small + extra;
        let w = plane(20.0);
        let c = [10.0, 10.0];
        // every point inside B(c, large / 2)
        let p = sample_poisson(2.0, &w, &Metric::Euclidean, RngSpec::new(seed, 2)).unwrap();
        let kept: Vec<Vec<f64>> = p.points().filter(|x| Metric::Euclidean.dist(x, &c) < large / 2.0).map(|x| x.to_vec()).collect();
        let q = PointPattern::new(w, Metric::Euclidean, kept, Label::None).unwrap();
        let s = eval_linear_statistic(&q, &TestFunction::tent(2, small), &c).unwrap();
        let l = eval_linear_statistic(&q, &TestFunction::tent(2, large), &c).unwrap();
        prop_assert!(l >= s);
        prop_assert_eq!(l, q.len() as f64);
    }

    #[test]
    fn cluster_count_is_monotone_in_radius(seed in any::<u64>(), d in 1usize..4) {
        let w = Window::cube(d, 10.0).unwrap();
        let p = sample_poisson(if d == 3 { 0.3 } else { 1.0 }, &w, &Metric::Euclidean, RngSpec::new(seed, 4)).unwrap();
        let counts: Vec<usize> = (1..=10)
            .map(|k| build_boolean_model(&p, 0.1 * k as f64).unwrap().clusters.len())
            .collect();
        prop_assert!(counts.windows(2).all(|c| c[1] <= c[0]), "{:?}", counts);
    }

    #[test]
    fn matching_is_stable_on_every_metric(seed in any::<u64>(), torus in any::<bool>(), two in any::<bool>()) {
        let w = plane(15.0);
        let metric = if torus { Metric::Toroidal { periods: vec![15.0, 15.0] } } else { Metric::Euclidean };
        let red = sample_poisson(1.0, &w, &metric, RngSpec::new(seed, 5)).unwrap();
        let blue = two.then(|| sample_poisson(1.0, &w, &metric, RngSpec::new(seed, 6)).unwrap().with_label(Label::Blue));
        let m = stable_match(&red, blue.as_ref(), &metric).unwrap();
        prop_assert!(verify_stability(&m, &red, blue.as_ref()).stable);
        // in one-colour mode at most one point is left over
        if !two {
            prop_assert!(m.unmatched().len() <= 1);
        }
    }
}

#[test]
fn palm_samples_contain_the_origin() {
    for process in [Process::Poisson { intensity: 1.0 }, Process::ShiftedLattice, Process::DoubledPerturbedLattice { radius: 0.2 }] {
        let spec = GeneratorSpec::new(process, plane(10.0), MetricKind::Euclidean);
        let s = PalmSampler::new(&spec, RngSpec::new(17, 0)).unwrap();
        for i in 0..50 {
            let p = s.sample(i).unwrap();
            assert!(p.find(&[0.0, 0.0]).is_some());
            assert!(p.window().contains(&[0.0, 0.0]));
        }
    }
}

#[test]
fn doubling_reps_halves_variance_of_variance() {
    let spec = GeneratorSpec::new(Process::Poisson { intensity: 1.0 }, plane(20.0), MetricKind::Euclidean);
    let small = estimate_fluctuation(&spec, &[5.0], 2000, RngSpec::new(23, 0)).unwrap();
    let large = estimate_fluctuation(&spec, &[5.0], 4000, RngSpec::new(23, 1)).unwrap();
    let ratio = (small.var_se[0] / large.var_se[0]).powi(2);
    assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
}
