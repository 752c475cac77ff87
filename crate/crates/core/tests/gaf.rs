use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use ppstat_core::gaf::{hyperbolic_degree, sample_gaf_hyperbolic, sample_gaf_planar, GafSeries};
use ppstat_core::stats::{chi_square_gof, Summary};
use ppstat_core::RngSpec;

const REPS: u64 = 500;

fn planar_zeros(seed: u64) -> Vec<Vec<Vec<f64>>> {
    (0..REPS)
        .into_par_iter()
        .map(|i| {
            let zs = sample_gaf_planar(5.0, RngSpec::new(seed, i)).unwrap();
            zs.pattern.points().map(|x| x.to_vec()).collect()
        })
        .collect()
}

#[test]
fn residuals_are_below_the_scaled_threshold() {
    for i in 0..20 {
        let zs = sample_gaf_planar(6.0, RngSpec::new(31, i)).unwrap();
        let scale = zs.series.scale(6.0);
        for x in zs.pattern.points() {
            let v = zs.series.eval(Complex64::new(x[0], x[1])).norm();
            assert!(v <= 1e-10 * scale, "residual {v} against scale {scale}");
        }
    }
}

#[test]
fn intensity_is_translation_invariant() {
    // two congruent 3 x 3 boxes on either side of the origin
    let zeros = planar_zeros(32);
    let count = |lo: f64| -> Vec<f64> {
        zeros
            .iter()
            .map(|zs| zs.iter().filter(|x| x[0] >= lo && x[0] < lo + 3.0 && x[1].abs() < 1.5).count() as f64)
            .collect()
    };
    let (a, b) = (Summary::of(&count(-3.5)), Summary::of(&count(0.5)));
    let se = (a.se_mean().powi(2) + b.se_mean().powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 4.0 * se, "{} vs {} (se {se})", a.mean, b.mean);
    // nominal count 9 / pi
    assert!((a.mean - 9.0 / PI).abs() < 4.0 * a.se_mean());
}

#[test]
fn sector_counts_are_rotation_invariant() {
    let zeros = planar_zeros(33);
    let sectors = 8;
    let mut counts = vec![0.0; sectors];
    for zs in &zeros {
        for x in zs {
            let t = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
            counts[((t / (2.0 * PI) * sectors as f64) as usize).min(sectors - 1)] += 1.0;
        }
    }
    let total: f64 = counts.iter().sum();
    let expected = vec![total / sectors as f64; sectors];
    let chi = chi_square_gof(&counts, &expected);
    assert!(chi.p_value > 0.001, "{counts:?} p = {}", chi.p_value);
}

#[test]
fn palm_first_coefficient_has_the_stated_density() {
    // |c1| has density 2 r^3 exp(-r^2), so P(|c1| <= r) = 1 - (1 + r^2) exp(-r^2)
    let degree = hyperbolic_degree(0.5).unwrap();
    let draws: Vec<f64> = (0..10_000).map(|i| GafSeries::hyperbolic(degree, RngSpec::new(34, i), true).coefficient(1).norm()).collect();
    let edges = [0.0, 0.6, 0.9, 1.1, 1.3, 1.5, 1.8, 2.2, f64::INFINITY];
    let cdf = |r: f64| if r.is_infinite() { 1.0 } else { 1.0 - (1.0 + r * r) * (-r * r).exp() };
    let mut observed = vec![0.0; edges.len() - 1];
    for &v in &draws {
        let k = edges.windows(2).position(|e| v >= e[0] && v < e[1]).unwrap();
        observed[k] += 1.0;
    }
    let expected: Vec<f64> = edges.windows(2).map(|e| draws.len() as f64 * (cdf(e[1]) - cdf(e[0]))).collect();
    let chi = chi_square_gof(&observed, &expected);
    assert!(chi.p_value > 0.001, "{observed:?} vs {expected:?}");
}

#[test]
fn hyperbolic_palm_zero_at_origin_and_plain_not() {
    for i in 0..50 {
        let palm = sample_gaf_hyperbolic(0.7, RngSpec::new(35, i), true).unwrap();
        assert!(palm.pattern.find(&[0.0, 0.0]).is_some());
        let plain = sample_gaf_hyperbolic(0.7, RngSpec::new(35, i), false).unwrap();
        assert!(plain.pattern.find(&[0.0, 0.0]).is_none());
    }
}
