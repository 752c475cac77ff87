//! Fluctuation diagnostics: linear statistics of a tent profile across
//! scales, the one-dimensional count discrepancy `N_n`, transport constants
//! of perturbed lattices, empirical Palm sampling, and a heuristic tolerance
//! report built from them.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{GeneratorSpec, PerturbationSpec};
use crate::geometry::{Metric, Window};
use crate::pattern::{fmt_num, PointPattern};
use crate::rng::{tags, RngSpec};
use crate::stats::{covariance, kendall_tau, Summary};

pub const MIN_REPS: usize = 100;
pub const MAX_EMPTY_CORES: usize = 100;
pub const MAX_PALM_ATTEMPTS: usize = 100_000;
const PILOT_SAMPLES: u64 = 16;
/// Trend thresholds on the Kendall tau of variance against scale.
pub const TREND_TAU: f64 = 0.8;
pub const TREND_RATIO: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `h(x) = clamp(2 - 2|x|, 0, 1)`.
    Tent,
    /// `h(x) = 1` on `(-1, 1]`, one-dimensional only.
    Indicator,
}

/// `h_n(x) = h(x / n)` for a fixed profile `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub profile: Profile,
    pub scale: f64,
    pub dimension: usize,
}

impl TestFunction {
    pub const LIPSCHITZ: f64 = 2.0;

    pub fn tent(dimension: usize, scale: f64) -> Self {
        Self {
            profile: Profile::Tent,
            scale,
            dimension,
        }
    }

    pub fn indicator(scale: f64) -> Self {
        Self {
            profile: Profile::Indicator,
            scale,
            dimension: 1,
        }
    }

    /// Value at displacement `x` from the centre.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.profile {
            Profile::Tent => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt() / self.scale;
                (2.0 - 2.0 * r).clamp(0.0, 1.0)
            }
            Profile::Indicator => {
                let t = x[0] / self.scale;
                if t > -1.0 && t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn check_scale(window: &Window, metric: &Metric, center: &[f64], scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale {scale}")));
    }
    let fits = window.contains_ball(center, scale)
        && match metric {
            // the support must not meet its own periodic image
            Metric::Toroidal { periods } => periods.iter().all(|p| 2.0 * scale < *p),
            _ => true,
        };
    if fits {
        Ok(())
    } else {
        Err(Error::WindowTooSmall(format!(
            "ball of radius {scale} around {center:?}"
        )))
    }
}

/// `sum_x h_n(x - center)` over the pattern.
pub fn eval_linear_statistic(p: &PointPattern, tf: &TestFunction, center: &[f64]) -> Result<f64> {
    if center.len() != p.dimension() || tf.dimension != p.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            got: center.len(),
        });
    }
    check_scale(p.window(), p.metric(), center, tf.scale)?;
    Ok(p.points()
        .map(|x| tf.eval(&p.metric().displacement(x, center)))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Decaying,
    Bounded,
    Growing,
    Inconclusive,
}

/// Decaying or growing when `|tau| >= 0.8` and the max/min variance ratio is
/// at least 2; bounded otherwise. Fewer than four scales are inconclusive.
pub fn classify_trend(scales: &[f64], variances: &[f64]) -> (Trend, f64, f64) {
    if scales.len() < 4 {
        return (Trend::Inconclusive, f64::NAN, f64::NAN);
    }
    let max = variances.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = variances.iter().cloned().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        return (Trend::Bounded, 0.0, 1.0);
    }
    let tau = kendall_tau(scales, variances);
    let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
    let trend = if tau.abs() >= TREND_TAU && ratio >= TREND_RATIO {
        if tau > 0.0 {
            Trend::Growing
        } else {
            Trend::Decaying
        }
    } else {
        Trend::Bounded
    };
    (trend, tau, ratio)
}

/// Replicate summaries of `Pi(h_n)` at several scales.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateStats {
    pub scales: Vec<f64>,
    pub reps: usize,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub var_se: Vec<f64>,
    /// `cov[i][j]` between scales `i` and `j`.
    pub cov: Vec<Vec<f64>>,
    pub tau: f64,
    pub trend: Trend,
    /// `values[r][s]`: statistic of replicate `r` at scale `s`.
    pub values: Vec<Vec<f64>>,
}

impl ReplicateStats {
    fn from_values(scales: &[f64], values: Vec<Vec<f64>>) -> Self {
        let k = scales.len();
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|s| values.iter().map(|v| v[s]).collect())
            .collect();
        let sums: Vec<Summary> = cols.iter().map(|c| Summary::of(c)).collect();
        let cov = (0..k)
            .map(|i| (0..k).map(|j| covariance(&cols[i], &cols[j])).collect())
            .collect();
        let var: Vec<f64> = sums.iter().map(|s| s.var).collect();
        let (trend, tau, _) = classify_trend(scales, &var);
        Self {
            scales: scales.to_vec(),
            reps: values.len(),
            mean: sums.iter().map(|s| s.mean).collect(),
            var_se: sums.iter().map(|s| s.se_var()).collect(),
            var,
            cov,
            tau,
            trend,
            values,
        }
    }

    /// `scale,reps,mean,var,var_se`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scale,reps,mean,var,var_se\n");
        for i in 0..self.scales.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                fmt_num(self.scales[i]),
                self.reps,
                fmt_num(self.mean[i]),
                fmt_num(self.var[i]),
                fmt_num(self.var_se[i])
            );
        }
        s
    }

    /// `scale_i,scale_j,cov`.
    pub fn covariance_csv(&self) -> String {
        let mut s = String::from("scale_i,scale_j,cov\n");
        for (i, row) in self.cov.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    fmt_num(self.scales[i]),
                    fmt_num(self.scales[j]),
                    fmt_num(*c)
                );
            }
        }
        s
    }
}

fn sample_all<T: Send>(
    reps: usize,
    rng: RngSpec,
    f: impl Fn(RngSpec) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|i| f(rng.replicate(i)))
        .collect()
}

/// Tent statistics about the window centre at each scale, over `reps`
/// independent samples of `gen`.
pub fn estimate_fluctuation(
    gen: &GeneratorSpec,
    scales: &[f64],
    reps: usize,
    rng: RngSpec,
) -> Result<ReplicateStats> {
    estimate_fluctuation_with(gen, scales, reps, rng, Profile::Tent)
}

pub fn estimate_fluctuation_with(
    gen: &GeneratorSpec,
    scales: &[f64],
    reps: usize,
    rng: RngSpec,
    profile: Profile,
) -> Result<ReplicateStats> {
    if reps < MIN_REPS {
        return Err(Error::InvalidParameter(format!(
            "{reps} replicates, need at least {MIN_REPS}"
        )));
    }
    if scales.is_empty() {
        return Err(Error::InvalidParameter("no scales".into()));
    }
    gen.validate()?;
    let d = gen.window.dimension();
    if profile == Profile::Indicator && d != 1 {
        return Err(Error::InvalidParameter(
            "indicator profile is one-dimensional".into(),
        ));
    }
    let center = gen.window.center();
    let metric = Metric::for_window(gen.metric, &gen.window)?;
    for &s in scales {
        check_scale(&gen.window, &metric, &center, s)?;
    }
    let tfs: Vec<TestFunction> = scales
        .iter()
        .map(|&s| TestFunction {
            profile,
            scale: s,
            dimension: d,
        })
        .collect();
    let values = sample_all(reps, rng, |r| {
        let p = gen.sample(r)?;
        tfs.iter()
            .map(|tf| eval_linear_statistic(&p, tf, &center))
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(ReplicateStats::from_values(scales, values))
}

/// `Lambda(c - n, c + n] - 2n` for a one-dimensional pattern, with `c` the
/// window midpoint.
pub fn n1_statistic(p: &PointPattern, n: u32) -> Result<i64> {
    if p.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: p.dimension(),
        });
    }
    let c = p.window().center()[0];
    let nf = n as f64;
    let [lo, hi] = p.window().bounding_box()[0];
    if c - nf < lo || c + nf > hi {
        return Err(Error::WindowTooSmall(format!("(-{n}, {n}] around {c}")));
    }
    let count = p
        .points()
        .filter(|x| x[0] > c - nf && x[0] <= c + nf)
        .count();
    Ok(count as i64 - 2 * n as i64)
}

/// `N_n` over `reps` samples of a one-dimensional generator.
pub fn n1_samples(gen: &GeneratorSpec, n: u32, reps: usize, rng: RngSpec) -> Result<Vec<i64>> {
    sample_all(reps, rng, |r| n1_statistic(&gen.sample(r)?, n))
}

/// `(K+, K-)` for a one-dimensional perturbed lattice: the expected number of
/// sites on one half-line whose perturbed point lands on the other,
/// `K+ = sum_{k >= 0} P(Y >= k)` and `K- = sum_{k >= 0} P(Y <= -k)`.
/// The laws are symmetric, so the two agree.
pub fn transport_constants(spec: &PerturbationSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let k = match *spec {
        PerturbationSpec::Zero => 1.0,
        PerturbationSpec::HeavyTail { alpha } if alpha <= 1.0 => {
            return Err(Error::Divergent(format!(
                "heavy tail alpha {alpha} has infinite mean"
            )));
        }
        PerturbationSpec::HeavyTail { alpha } => {
            // 1/2 + 1/2 sum_{k>=1} (1+k)^-alpha, head summed directly and the
            // tail by Euler-Maclaurin
            const HEAD: usize = 10_000;
            let f = |x: f64| (1.0 + x).powf(-alpha);
            let head: f64 = (1..HEAD).map(|k| f(k as f64)).sum();
            let x = HEAD as f64;
            let tail = (1.0 + x).powf(1.0 - alpha) / (alpha - 1.0)
                + f(x) / 2.0
                + alpha * (1.0 + x).powf(-alpha - 1.0) / 12.0;
            0.5 + 0.5 * (head + tail)
        }
        _ => {
            let mut sum = 0.5;
            let mut k = 1.0;
            loop {
                let term = 0.5 * spec.norm_tail(1, k);
                sum += term;
                if term < 1e-12 * sum {
                    break;
                }
                k += 1.0;
            }
            sum
        }
    };
    Ok((k, k))
}

/// Re-rooting sampler: draws realizations size-biased by their number of
/// points in the core (the central half-volume box) and translates a uniform
/// core point to the origin.
#[derive(Debug, Clone)]
pub struct PalmSampler {
    gen: GeneratorSpec,
    core: Vec<[f64; 2]>,
    cap: f64,
    rng: RngSpec,
}

impl PalmSampler {
    pub fn new(gen: &GeneratorSpec, rng: RngSpec) -> Result<Self> {
        gen.validate()?;
        let bounds = match &gen.window {
            Window::Box { bounds } => bounds.clone(),
            Window::Disc { .. } => {
                return Err(Error::InvalidWindow(
                    "palm sampling needs a box window".into(),
                ))
            }
        };
        let shrink = 0.5f64.powf(1.0 / bounds.len() as f64);
        let core: Vec<[f64; 2]> = bounds
            .iter()
            .map(|[a, b]| {
                let (c, h) = ((a + b) / 2.0, (b - a) / 2.0 * shrink);
                [c - h, c + h]
            })
            .collect();
        let mut sampler = Self {
            gen: gen.clone(),
            core,
            cap: 0.0,
            rng,
        };
        let pilot = rng.derive(tags::PILOT);
        let counts: Vec<f64> = (0..PILOT_SAMPLES)
            .map(|i| Ok(sampler.core_points(&gen.sample(pilot.replicate(i))?).len() as f64))
            .collect::<Result<_>>()?;
        let s = Summary::of(&counts);
        let max = counts.iter().cloned().fold(0.0, f64::max);
        sampler.cap = max + 6.0 * s.var.sqrt() + 5.0;
        Ok(sampler)
    }

    fn core_points(&self, p: &PointPattern) -> Vec<usize> {
        (0..p.len())
            .filter(|&i| {
                p.point(i)
                    .iter()
                    .zip(&self.core)
                    .all(|(v, [a, b])| *v >= *a && *v < *b)
            })
            .collect()
    }

    /// The `i`-th re-rooted sample.
    pub fn sample(&self, i: u64) -> Result<PointPattern> {
        let base = self.rng.replicate(i);
        let mut choice = base.derive(tags::PALM).rng();
        let mut empty_run = 0;
        for attempt in 0..MAX_PALM_ATTEMPTS as u64 {
            let p = self.gen.sample(base.derive(attempt))?;
            let core = self.core_points(&p);
            if core.is_empty() {
                empty_run += 1;
                if empty_run >= MAX_EMPTY_CORES {
                    return Err(Error::Exhausted(format!(
                        "{MAX_EMPTY_CORES} consecutive empty cores"
                    )));
                }
                continue;
            }
            empty_run = 0;
            let u: f64 = choice.random();
            if u * self.cap >= core.len() as f64 {
                continue;
            }
            let root = core[choice.random_range(0..core.len())];
            return reroot(&p, root);
        }
        Err(Error::Exhausted(format!(
            "no acceptance in {MAX_PALM_ATTEMPTS} attempts"
        )))
    }
}

/// Translates the pattern (and its window) so that point `i` sits at the origin.
pub fn reroot(p: &PointPattern, i: usize) -> Result<PointPattern> {
    let x = p.point(i).to_vec();
    let by: Vec<f64> = x.iter().map(|v| -v).collect();
    let coords: Vec<f64> = p
        .points()
        .flat_map(|y| y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>())
        .collect();
    let window = p.window().translated(&by);
    PointPattern::from_flat(window, p.metric().clone(), coords, p.label())
}

/// One re-rooted sample; see [`PalmSampler`].
pub fn palm_sample_empirical(gen: &GeneratorSpec, rng: RngSpec) -> Result<PointPattern> {
    PalmSampler::new(gen, rng)?.sample(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EvidenceAgainstTolerance,
    ConsistentWithTolerance,
    Inconclusive,
}

/// Unit-ball counts about the window centre across replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountProbe {
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    /// Variance over mean.
    pub dispersion: f64,
    pub rigid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub trend: Trend,
    pub tau: f64,
    pub variance_ratio: f64,
    pub scales: Vec<f64>,
    pub variances: Vec<f64>,
    pub count_probe: CountProbe,
    pub verdict: Verdict,
    pub caveat: String,
}

impl ToleranceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOptions {
    /// Defaults to four evenly spaced scales up to the largest ball that fits.
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default = "default_reps")]
    pub reps: usize,
}

fn default_reps() -> usize {
    200
}

impl Default for ToleranceOptions {
    fn default() -> Self {
        Self {
            scales: None,
            reps: default_reps(),
        }
    }
}

/// Counts are rigid when they barely fluctuate (dispersion below 1/2) or
/// never reach zero.
pub fn count_probe(counts: &[u64]) -> CountProbe {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let s = Summary::of(&xs);
    let min = counts.iter().copied().min().unwrap_or(0);
    let max = counts.iter().copied().max().unwrap_or(0);
    let dispersion = if s.mean > 0.0 { s.var / s.mean } else { 0.0 };
    CountProbe {
        min,
        max,
        mean: s.mean,
        dispersion,
        rigid: dispersion < 0.5 || min >= 1,
    }
}

pub fn verdict(trend: Trend, rigid: bool) -> Verdict {
    match (trend, rigid) {
        (Trend::Decaying | Trend::Bounded, true) => Verdict::EvidenceAgainstTolerance,
        (Trend::Growing, false) => Verdict::ConsistentWithTolerance,
        _ => Verdict::Inconclusive,
    }
}

/// Heuristic verdict on insertion/deletion tolerance from the variance trend
/// of the tent statistic and from unit-ball count rigidity.
pub fn tolerance_report(
    gen: &GeneratorSpec,
    rng: RngSpec,
    opts: &ToleranceOptions,
) -> Result<ToleranceReport> {
    tolerance_report_with_stats(gen, rng, opts).map(|(report, _)| report)
}

/// [`tolerance_report`] together with the replicate summaries behind it.
pub fn tolerance_report_with_stats(
    gen: &GeneratorSpec,
    rng: RngSpec,
    opts: &ToleranceOptions,
) -> Result<(ToleranceReport, ReplicateStats)> {
    gen.validate()?;
    let center = gen.window.center();
    let metric = Metric::for_window(gen.metric, &gen.window)?;
    let mut reach = gen.window.distance_to_boundary(&center);
    if let Metric::Toroidal { periods } = &metric {
        let half = periods.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
        reach = reach.min(half * 0.999);
    }
    let scales = match &opts.scales {
        Some(s) => s.clone(),
        None => (1..=4).map(|k| reach * k as f64 / 4.0).collect(),
    };
    if reach < 1.0 {
        return Err(Error::WindowTooSmall("no room for a unit ball".into()));
    }
    let stats = estimate_fluctuation(gen, &scales, opts.reps, rng)?;
    let counts: Vec<u64> = sample_all(opts.reps, rng.derive(tags::PROBE), |r| {
        let p = gen.sample(r)?;
        Ok(p.points().filter(|x| metric.dist(x, &center) < 1.0).count() as u64)
    })?;
    let probe = count_probe(&counts);
    let (trend, tau, ratio) = classify_trend(&scales, &stats.var);
    let report = ToleranceReport {
        trend,
        tau,
        variance_ratio: ratio,
        scales,
        variances: stats.var.clone(),
        count_probe: probe,
        verdict: verdict(trend, probe.rigid),
        caveat: "heuristic".into(),
    };
    Ok((report, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Process;
    use crate::geometry::MetricKind;
    use crate::pattern::Label;

    fn plane(pts: Vec<Vec<f64>>) -> PointPattern {
        PointPattern::new(
            Window::cube(2, 20.0).unwrap(),
            Metric::Euclidean,
            pts,
            Label::None,
        )
        .unwrap()
    }

    #[test]
    fn tent_examples() {
        let c = [10.0, 10.0];
        let tf = TestFunction::tent(2, 4.0);
        let p = plane(vec![vec![10.5, 10.0], vec![9.0, 10.5], vec![10.0, 11.9]]);
        assert_eq!(eval_linear_statistic(&p, &tf, &c).unwrap(), 3.0);
        let p = plane(vec![vec![13.0, 10.0]]);
        assert!((eval_linear_statistic(&p, &tf, &c).unwrap() - 0.5).abs() < 1e-15);
        let p = plane(vec![vec![14.5, 10.0]]);
        assert_eq!(eval_linear_statistic(&p, &tf, &c).unwrap(), 0.0);
        assert!(matches!(
            eval_linear_statistic(&p, &TestFunction::tent(2, 11.0), &c),
            Err(Error::WindowTooSmall(_))
        ));
    }

    #[test]
    fn indicator_is_half_open() {
        let tf = TestFunction::indicator(2.0);
        assert_eq!(tf.eval(&[2.0]), 1.0);
        assert_eq!(tf.eval(&[-2.0]), 0.0);
    }

    #[test]
    fn trend_rules() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(classify_trend(&s, &[1.0, 2.0, 4.0, 8.0]).0, Trend::Growing);
        assert_eq!(classify_trend(&s, &[8.0, 4.0, 2.0, 1.0]).0, Trend::Decaying);
        assert_eq!(classify_trend(&s, &[1.0, 1.2, 1.1, 1.3]).0, Trend::Bounded);
        assert_eq!(
            classify_trend(&s[..3], &[1.0, 2.0, 4.0]).0,
            Trend::Inconclusive
        );
        assert_eq!(classify_trend(&s, &[0.0; 4]).0, Trend::Bounded);
    }

    #[test]
    fn n1_lattice_is_zero() {
        let gen = GeneratorSpec::new(
            Process::ShiftedLattice,
            Window::cube(1, 50.0).unwrap(),
            MetricKind::Euclidean,
        );
        for i in 0..20 {
            let p = gen.sample(RngSpec::new(i, 0)).unwrap();
            for n in [1, 5, 20, 25] {
                assert_eq!(n1_statistic(&p, n).unwrap(), 0);
            }
            assert!(n1_statistic(&p, 26).is_err());
        }
    }

    #[test]
    fn transport_constants_values() {
        assert_eq!(
            transport_constants(&PerturbationSpec::Zero).unwrap(),
            (1.0, 1.0)
        );
        let (k, _) = transport_constants(&PerturbationSpec::Gaussian { sigma: 1.0 }).unwrap();
        // 1/2 + sum_k Phi-bar(k)
        assert!((k - 0.682_8).abs() < 1e-3, "{k}");
        assert!(transport_constants(&PerturbationSpec::HeavyTail { alpha: 1.0 }).is_err());
        // alpha = 2: 1/2 + (zeta(2) - 1)/2
        let (k, _) = transport_constants(&PerturbationSpec::HeavyTail { alpha: 2.0 }).unwrap();
        let want = 0.5 + (std::f64::consts::PI.powi(2) / 6.0 - 1.0) / 2.0;
        assert!((k - want).abs() < 1e-9, "{k} vs {want}");
    }

    #[test]
    fn palm_lattice_is_integer() {
        let gen = GeneratorSpec::new(
            Process::ShiftedLattice,
            Window::cube(2, 10.0).unwrap(),
            MetricKind::Euclidean,
        );
        let s = PalmSampler::new(&gen, RngSpec::new(5, 0)).unwrap();
        for i in 0..10 {
            let p = s.sample(i).unwrap();
            assert!(p.find(&[0.0, 0.0]).is_some());
            assert!(p.coords().iter().all(|v| v.fract() == 0.0));
            assert_eq!(p.len(), 100);
        }
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(
            verdict(Trend::Bounded, true),
            Verdict::EvidenceAgainstTolerance
        );
        assert_eq!(
            verdict(Trend::Growing, false),
            Verdict::ConsistentWithTolerance
        );
        assert_eq!(verdict(Trend::Growing, true), Verdict::Inconclusive);
        assert!(count_probe(&[1, 1, 1]).rigid);
        assert!(!count_probe(&[0, 3, 1, 5, 2]).rigid);
    }
}
