//! Zeros of Gaussian analytic functions.
//!
//! The planar function `f(z) = sum a_n z^n / sqrt(n!)` and the hyperbolic
//! `g(z) = sum a_n z^n` are truncated at a degree chosen from the domain
//! radius, and their zeros are found by simultaneous iteration. All work
//! happens in the rescaled variable `u = z / s`, with `s` the domain radius,
//! so planar coefficients never underflow.

pub mod roots;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{Metric, Window};
use crate::pattern::{Label, PointPattern};
use crate::rng::{tags, RngSpec};

pub use roots::{aberth, eval_with_derivative};

/// Smallest truncation degree accepted by the samplers.
pub const MIN_DEGREE: usize = 8;
pub const MAX_PLANAR_RADIUS: f64 = 20.0;
pub const MAX_HYPERBOLIC_RADIUS: f64 = 0.995;
/// Trapezoid nodes on the counting contour.
pub const CONTOUR_NODES: usize = 4096;
pub const JITTER_RETRIES: usize = 5;

const ROOT_TOL: f64 = 1e-14;
const ROOT_MAX_ITER: usize = 2000;
const RESIDUAL_FACTOR: f64 = 1e-10;
const DISTINCT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GafKind {
    Planar,
    Hyperbolic,
}

/// A truncated random power series.
///
/// `a` holds the standard complex gaussians (after the Palm modification,
/// if any); the actual coefficient is `a_n / sqrt(n!)` for the planar kind
/// and `a_n` for the hyperbolic one.
#[derive(Debug, Clone)]
pub struct GafSeries {
    pub kind: GafKind,
    pub a: Vec<Complex64>,
    pub rng: Option<RngSpec>,
    pub palm: bool,
}

/// Standard complex gaussian: density `exp(-|z|^2) / pi`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Modulus with density `2 r^3 exp(-r^2)`: the square root of a Gamma(2, 1) draw.
pub fn palm_modulus<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = 1.0 - rng.random::<f64>();
    (-(u1 * u2).ln()).sqrt()
}

pub fn planar_degree(rho: f64) -> usize {
    MIN_DEGREE
        .max(32)
        .max((rho * rho + 12.0 * rho + 25.0).ceil() as usize)
}

pub fn hyperbolic_degree(rmax: f64) -> Result<usize> {
    if !(rmax > 0.0 && rmax < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rmax {rmax} not in (0, 1)"
        )));
    }
    if rmax > MAX_HYPERBOLIC_RADIUS {
        return Err(Error::Truncation(format!(
            "rmax {rmax} exceeds {MAX_HYPERBOLIC_RADIUS}"
        )));
    }
    let n = ((1e-12 * (1.0 - rmax)).ln() / rmax.ln()).ceil();
    Ok(MIN_DEGREE.max(n as usize))
}

impl GafSeries {
    /// Draws `a_0..a_degree` in order from the stream.
    fn draw(kind: GafKind, degree: usize, rng: RngSpec, palm: bool) -> Self {
        let mut r = rng.rng();
        let mut a: Vec<Complex64> = (0..=degree).map(|_| complex_gaussian(&mut r)).collect();
        if palm {
            a[0] = Complex64::new(0.0, 0.0);
            if degree >= 1 {
                let modulus = palm_modulus(&mut rng.derive(tags::PALM).rng());
                a[1] = Complex64::from_polar(modulus, a[1].arg());
            }
        }
        Self {
            kind,
            a,
            rng: Some(rng),
            palm,
        }
    }

    /// Planar series of a given degree. Degrees below the automatic choice are
    /// allowed here for testing; the samplers always use [`planar_degree`].
    pub fn planar(degree: usize, rng: RngSpec) -> Self {
        Self::draw(GafKind::Planar, degree, rng, false)
    }

    pub fn hyperbolic(degree: usize, rng: RngSpec, palm: bool) -> Self {
        Self::draw(GafKind::Hyperbolic, degree, rng, palm)
    }

    /// Series with given gaussian parts (the `a_n`), no random provenance.
    pub fn from_parts(kind: GafKind, a: Vec<Complex64>) -> Self {
        Self {
            kind,
            a,
            rng: None,
            palm: false,
        }
    }

    pub fn degree(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    /// The coefficient `c_n`.
    pub fn coefficient(&self, n: usize) -> Complex64 {
        match self.kind {
            GafKind::Hyperbolic => self.a[n],
            GafKind::Planar => self.a[n] * (-0.5 * ln_gamma(n as f64 + 1.0)).exp(),
        }
    }

    /// Coefficients of `u -> f(s u)`, i.e. `c_n s^n`.
    pub fn scaled(&self, s: f64) -> Vec<Complex64> {
        let ls = s.ln();
        self.a
            .iter()
            .enumerate()
            .map(|(n, a)| {
                let log = match self.kind {
                    GafKind::Hyperbolic => n as f64 * ls,
                    GafKind::Planar => n as f64 * ls - 0.5 * ln_gamma(n as f64 + 1.0),
                };
                a * log.exp()
            })
            .collect()
    }

    /// `max_n |c_n| r^n`.
    pub fn scale(&self, r: f64) -> f64 {
        self.scaled(r).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let s = z.norm().max(1.0);
        eval_with_derivative(&self.scaled(s), z / s).0
    }

    /// Polished zeros with `|z| < radius` (or `<= radius` when `closed`),
    /// each with its residual `|f(z)|` and polish status.
    pub fn zeros_within(&self, radius: f64, closed: bool) -> Result<Vec<Zero>> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius {radius}")));
        }
        let b = self.scaled(radius);
        let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let threshold = RESIDUAL_FACTOR * scale;
        let found = aberth(&b, ROOT_MAX_ITER, ROOT_TOL)?;
        let inside = |u: Complex64| {
            if closed {
                u.norm() <= 1.0
            } else {
                u.norm() < 1.0
            }
        };
        let mut out = Vec::new();
        for (u, conv) in found.roots.into_iter().zip(found.converged) {
            // only roots near the domain matter; far ones may stall harmlessly
            if u.norm() > 1.1 {
                continue;
            }
            if !conv {
                return Err(Error::NoConvergence(format!(
                    "root near |z| = {}",
                    u.norm() * radius
                )));
            }
            let (u, _) = roots::polish(&b, u, 3);
            if !inside(u) {
                continue;
            }
            let residual = eval_with_derivative(&b, u).0.norm();
            let polished = residual <= threshold;
            if !polished {
                return Err(Error::NoConvergence(format!(
                    "residual {residual:e} above {threshold:e}"
                )));
            }
            out.push(Zero {
                z: u * radius,
                residual,
                polished,
            });
        }
        for i in 0..out.len() {
            for j in 0..i {
                if (out[i].z - out[j].z).norm() <= DISTINCT {
                    return Err(Error::NoConvergence(format!(
                        "zeros closer than {DISTINCT} at {}",
                        out[i].z
                    )));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub z: Complex64,
    pub residual: f64,
    pub polished: bool,
}

/// Zeros of one series as a pattern, with per-zero diagnostics aligned to the
/// pattern's canonical point order.
#[derive(Debug, Clone)]
pub struct ZeroSet {
    pub pattern: PointPattern,
    pub residuals: Vec<f64>,
    pub polished: Vec<bool>,
    pub series: GafSeries,
}

impl ZeroSet {
    fn build(window: Window, metric: Metric, zeros: Vec<Zero>, series: GafSeries) -> Result<Self> {
        let pts: Vec<Vec<f64>> = zeros.iter().map(|z| vec![z.z.re, z.z.im]).collect();
        let pattern = PointPattern::new(window, metric, pts, Label::None)?;
        let mut residuals = Vec::with_capacity(zeros.len());
        let mut polished = Vec::with_capacity(zeros.len());
        for p in pattern.points() {
            let z = zeros
                .iter()
                .find(|z| z.z.re == p[0] && z.z.im == p[1])
                .expect("zero present");
            residuals.push(z.residual);
            polished.push(z.polished);
        }
        Ok(Self {
            pattern,
            residuals,
            polished,
            series,
        })
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    /// Sidecar document: residuals, polish flags, degree and coefficient seed.
    pub fn sidecar_json(&self) -> String {
        let doc = serde_json::json!({
            "kind": self.series.kind,
            "degree": self.series.degree(),
            "palm": self.series.palm,
            "rng": self.series.rng,
            "residuals": self.residuals,
            "polished": self.polished,
        });
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }
}

/// Zeros of the planar function in `|z| < rho`, reported on the box `[-rho, rho]^2`.
pub fn sample_gaf_planar(rho: f64, rng: RngSpec) -> Result<ZeroSet> {
    check_planar_radius(rho)?;
    planar_zero_set(GafSeries::planar(planar_degree(rho), rng), rho)
}

/// Same as [`sample_gaf_planar`] with an explicit truncation degree.
pub fn sample_gaf_planar_with_degree(rho: f64, degree: usize, rng: RngSpec) -> Result<ZeroSet> {
    check_planar_radius(rho)?;
    planar_zero_set(GafSeries::planar(degree, rng), rho)
}

fn check_planar_radius(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= MAX_PLANAR_RADIUS) {
        return Err(Error::InvalidParameter(format!(
            "rho {rho} not in (0, {MAX_PLANAR_RADIUS}]"
        )));
    }
    Ok(())
}

fn planar_zero_set(series: GafSeries, rho: f64) -> Result<ZeroSet> {
    let zeros = series.zeros_within(rho, false)?;
    let window = Window::new_box(vec![[-rho, rho]; 2])?;
    ZeroSet::build(window, Metric::Euclidean, zeros, series)
}

/// Planar zeros inside a two-dimensional box: a covering disc about the
/// origin is sampled and the result restricted to the box.
pub fn sample_gaf_planar_window(window: &Window, rng: RngSpec) -> Result<PointPattern> {
    let bounds = match window {
        Window::Box { bounds } if bounds.len() == 2 => bounds,
        _ => {
            return Err(Error::InvalidWindow(
                "planar GAF zeros need a two-dimensional box".into(),
            ))
        }
    };
    let rho = bounds[0]
        .iter()
        .flat_map(|x| bounds[1].iter().map(move |y| x.hypot(*y)))
        .fold(0.0, f64::max);
    check_planar_radius(rho)?;
    let zs = sample_gaf_planar(rho, rng)?;
    let pts: Vec<Vec<f64>> = zs
        .pattern
        .points()
        .filter(|p| window.contains(p))
        .map(|p| p.to_vec())
        .collect();
    PointPattern::new(window.clone(), Metric::Euclidean, pts, Label::None)
}

/// Zeros of the hyperbolic function in `|z| <= rmax`, on the disc window with
/// the hyperbolic metric. With `palm`, `c_0 = 0` and `|c_1|` has density
/// `2 r^3 exp(-r^2)`, phase taken from the plain draw.
pub fn sample_gaf_hyperbolic(rmax: f64, rng: RngSpec, palm: bool) -> Result<ZeroSet> {
    sample_gaf_hyperbolic_with_degree(rmax, hyperbolic_degree(rmax)?, rng, palm)
}

pub fn sample_gaf_hyperbolic_with_degree(
    rmax: f64,
    degree: usize,
    rng: RngSpec,
    palm: bool,
) -> Result<ZeroSet> {
    hyperbolic_degree(rmax)?;
    let series = GafSeries::hyperbolic(degree, rng, palm);
    let zeros = series.zeros_within(rmax, true)?;
    ZeroSet::build(
        Window::unit_disc(rmax)?,
        Metric::HyperbolicDisc,
        zeros,
        series,
    )
}

/// Result of a contour count: the count and the radius actually used
/// (which differs from the requested one after a jitter retry).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourCount {
    pub count: usize,
    pub radius: f64,
}

/// Number of zeros of the truncated series inside `|z| < radius`, from the
/// trapezoid rule applied to `(1 / 2 pi i) \oint f'/f`.
pub fn count_zeros_argument_principle(series: &GafSeries, radius: f64) -> Result<ContourCount> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {radius}")));
    }
    const FACTORS: [f64; JITTER_RETRIES + 1] = [1.0, 1.004, 0.996, 1.008, 0.992, 1.012];
    for f in FACTORS {
        let r = radius * f;
        if let Some(count) = contour_count(series, r) {
            return Ok(ContourCount { count, radius: r });
        }
    }
    Err(Error::ContourTooClose(radius))
}

fn contour_count(series: &GafSeries, r: f64) -> Option<usize> {
    let b = series.scaled(r);
    let k = CONTOUR_NODES;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..k {
        let u = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64);
        let (p, dp) = eval_with_derivative(&b, u);
        if p.norm() == 0.0 {
            return None;
        }
        // u g'(u) / g(u) equals z f'(z) / f(z) on |z| = r
        sum += u * dp / p;
    }
    let mean = sum / k as f64;
    let n = mean.re.round();
    if (mean.re - n).abs() <= 1e-3 && mean.im.abs() <= 1e-3 && n >= 0.0 {
        Some(n as usize)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_series() {
        let s = GafSeries::planar(1, RngSpec::new(3, 0));
        let z0 = -s.coefficient(0) / s.coefficient(1);
        let zs = s.zeros_within(z0.norm() * 2.0, false).unwrap();
        assert_eq!(zs.len(), 1);
        assert!((zs[0].z - z0).norm() < 1e-12 * z0.norm().max(1.0));
    }

    #[test]
    fn contour_trivial_examples() {
        let one = GafSeries::from_parts(GafKind::Hyperbolic, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(count_zeros_argument_principle(&one, 2.0).unwrap().count, 1);
        let three = GafSeries::from_parts(GafKind::Hyperbolic, vec![c(3.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(
            count_zeros_argument_principle(&three, 2.0).unwrap().count,
            0
        );
    }

    #[test]
    fn contour_jitters_off_a_zero() {
        let s = GafSeries::from_parts(GafKind::Hyperbolic, vec![c(-2.0, 0.0), c(1.0, 0.0)]);
        let cc = count_zeros_argument_principle(&s, 2.0).unwrap();
        assert_ne!(cc.radius, 2.0);
        assert_eq!(cc.count, usize::from(cc.radius > 2.0));
    }

    #[test]
    fn degrees() {
        assert_eq!(planar_degree(5.0), 110);
        assert_eq!(planar_degree(0.1), 32);
        assert_eq!(hyperbolic_degree(0.9).unwrap(), 285);
        assert!(matches!(
            hyperbolic_degree(0.999),
            Err(Error::Truncation(_))
        ));
        assert!(sample_gaf_planar(21.0, RngSpec::new(0, 0)).is_err());
    }

    #[test]
    fn palm_has_origin_zero() {
        for i in 0..5 {
            let zs = sample_gaf_hyperbolic(0.8, RngSpec::new(i, 1), true).unwrap();
            assert!(zs.pattern.find(&[0.0, 0.0]).is_some());
        }
    }

    #[test]
    fn palm_and_plain_share_the_tail() {
        let rng = RngSpec::new(9, 2);
        let plain = GafSeries::hyperbolic(40, rng, false);
        let palm = GafSeries::hyperbolic(40, rng, true);
        assert_eq!(plain.a[2..], palm.a[2..]);
        assert!((plain.a[1].arg() - palm.a[1].arg()).abs() < 1e-12);
    }

    #[test]
    fn planar_counts_agree_and_residuals_small() {
        for i in 0..10 {
            let zs = sample_gaf_planar(5.0, RngSpec::new(i, 0)).unwrap();
            let cc = count_zeros_argument_principle(&zs.series, 5.0).unwrap();
            let direct = zs.series.zeros_within(cc.radius, false).unwrap().len();
            assert_eq!(cc.count, direct);
            let scale = zs.series.scale(5.0);
            assert!(zs.residuals.iter().all(|r| *r <= 1e-10 * scale));
            assert!(zs.polished.iter().all(|p| *p));
        }
    }

    #[test]
    fn window_restriction() {
        let w = Window::new_box(vec![[-2.0, 3.0], [0.0, 4.0]]).unwrap();
        let p = sample_gaf_planar_window(&w, RngSpec::new(4, 0)).unwrap();
        assert!(p.points().all(|x| w.contains(x)));
        assert!(!p.is_empty());
    }

    #[test]
    fn sidecar_fields() {
        let zs = sample_gaf_hyperbolic(0.7, RngSpec::new(1, 5), false).unwrap();
        let v: serde_json::Value = serde_json::from_str(&zs.sidecar_json()).unwrap();
        assert_eq!(v["kind"], "hyperbolic");
        assert_eq!(v["rng"]["seed"], 1);
        assert_eq!(v["residuals"].as_array().unwrap().len(), zs.len());
    }
}
