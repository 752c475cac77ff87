//! Samplers for the concrete processes: Poisson, shifted lattices, site
//! percolation, perturbed and doubled perturbed lattices, stacked lattices with
//! deleted rows, and (through [`crate::gaf`]) planar Gaussian zeros.
//!
//! Lattice generators have two boundary regimes, chosen by the metric:
//!
//! * toroidal: the window must have integer side lengths; every lattice site of
//!   the window is simulated and the resulting points are wrapped periodically,
//!   so the pattern is an exact sample of the periodic process;
//! * euclidean: sites in a buffered window are simulated and points landing in
//!   the window are kept. The buffer is wide enough that the expected number of
//!   points missed from sites beyond it is below [`BUFFER_TOLERANCE`].
//!
//! Random lattice shifts are drawn on a `2^-40` grid so that differences of
//! lattice points are exact in floating point.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::geometry::{Metric, MetricKind, Window};
use crate::pattern::{Label, PointPattern};
use crate::rng::{tags, RngSpec};

pub const MAX_POINTS: f64 = 1e8;
pub const BUFFER_TOLERANCE: f64 = 1e-6;

/// Isotropic perturbation law of a single lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PerturbationSpec {
    Zero,
    UniformBall {
        radius: f64,
    },
    Gaussian {
        sigma: f64,
    },
    /// Uniform direction, radial law `P(R > r) = (1 + r)^-alpha`.
    HeavyTail {
        alpha: f64,
    },
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PerturbationSpec::Zero => true,
            PerturbationSpec::UniformBall { radius } => radius > 0.0 && radius.is_finite(),
            PerturbationSpec::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            PerturbationSpec::HeavyTail { alpha } => alpha > 0.0 && alpha.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Vec<f64> {
        match *self {
            PerturbationSpec::Zero => vec![0.0; d],
            PerturbationSpec::UniformBall { radius } => uniform_in_ball(d, radius, rng),
            PerturbationSpec::Gaussian { sigma } => (0..d)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            PerturbationSpec::HeavyTail { alpha } => {
                let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
                let r = u.powf(-1.0 / alpha) - 1.0;
                unit_direction(d, rng).into_iter().map(|c| c * r).collect()
            }
        }
    }

    /// `P(|Y| >= r)` for the euclidean norm of a `d`-dimensional perturbation.
    pub fn norm_tail(&self, d: usize, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        match *self {
            PerturbationSpec::Zero => 0.0,
            PerturbationSpec::UniformBall { radius } => {
                if r >= radius {
                    0.0
                } else {
                    1.0 - (r / radius).powi(d as i32)
                }
            }
            PerturbationSpec::Gaussian { sigma } => {
                let chi = ChiSquared::new(d as f64).expect("positive degrees of freedom");
                chi.sf((r / sigma).powi(2))
            }
            PerturbationSpec::HeavyTail { alpha } => (1.0 + r).powf(-alpha),
        }
    }
}

fn unit_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    if d == 1 {
        return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let g: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point of the open euclidean ball `B(0, radius)`.
pub fn uniform_in_ball<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d)
            .map(|_| radius * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        if x.iter().map(|v| v * v).sum::<f64>() < radius * radius {
            return x;
        }
    }
}

/// Uniform shift in `[0,1)^d` on a `2^-40` grid.
fn lattice_shift<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d)
        .map(|_| (rng.random::<u64>() >> 24) as f64 * (-40f64).exp2())
        .collect()
}

/// Which process a [`GeneratorSpec`] samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Process {
    Poisson {
        intensity: f64,
    },
    ShiftedLattice,
    ShiftedSitePercolation {
        p: f64,
    },
    PerturbedLattice {
        perturbation: PerturbationSpec,
        #[serde(default)]
        shift: bool,
    },
    DoubledPerturbedLattice {
        radius: f64,
    },
    ColumnDeletedStack {
        p: f64,
        /// Retention of the site percolation inside each plane (d = 3 only).
        #[serde(default = "default_plane_retention")]
        site_p: f64,
    },
    /// Zeros of the planar Gaussian analytic function, restricted to the window.
    GafPlanar,
}

fn default_plane_retention() -> f64 {
    0.75
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub process: Process,
    pub window: Window,
    #[serde(default)]
    pub metric: MetricKind,
}

impl GeneratorSpec {
    pub fn new(process: Process, window: Window, metric: MetricKind) -> Self {
        Self {
            process,
            window,
            metric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        Metric::for_window(self.metric, &self.window)?;
        match &self.process {
            Process::Poisson { intensity } if !(*intensity > 0.0 && intensity.is_finite()) => {
                Err(Error::InvalidParameter(format!("intensity {intensity}")))
            }
            Process::ShiftedSitePercolation { p } if !(0.0..=1.0).contains(p) => {
                Err(Error::InvalidParameter(format!("retention {p}")))
            }
            Process::PerturbedLattice { perturbation, .. } => perturbation.validate(),
            Process::DoubledPerturbedLattice { radius } if !(*radius > 0.0 && *radius <= 0.25) => {
                Err(Error::InvalidParameter(format!(
                    "radius {radius} not in (0, 1/4]"
                )))
            }
            Process::ColumnDeletedStack { p, site_p }
                if !((0.0..=1.0).contains(p) && (0.0..=1.0).contains(site_p)) =>
            {
                Err(Error::InvalidParameter(format!("retention {p}, {site_p}")))
            }
            Process::GafPlanar
                if self.metric != MetricKind::Euclidean || self.window.dimension() != 2 =>
            {
                Err(Error::InvalidParameter(
                    "GAF zeros need a planar euclidean box".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Nominal intensity (points per unit volume), when known in closed form.
    pub fn intensity(&self) -> Option<f64> {
        match &self.process {
            Process::Poisson { intensity } => Some(*intensity),
            Process::ShiftedLattice | Process::PerturbedLattice { .. } => Some(1.0),
            Process::ShiftedSitePercolation { p } => Some(*p),
            Process::DoubledPerturbedLattice { .. } => Some(2.0),
            Process::ColumnDeletedStack { p, site_p } => Some(if self.window.dimension() == 3 {
                p * site_p
            } else {
                *p
            }),
            Process::GafPlanar => Some(std::f64::consts::FRAC_1_PI),
        }
    }

    pub fn sample(&self, rng: RngSpec) -> Result<PointPattern> {
        self.validate()?;
        let metric = Metric::for_window(self.metric, &self.window)?;
        let w = &self.window;
        match &self.process {
            Process::Poisson { intensity } => sample_poisson(*intensity, w, &metric, rng),
            Process::ShiftedLattice => sample_shifted_lattice(w, &metric, rng),
            Process::ShiftedSitePercolation { p } => sample_site_percolation(*p, w, &metric, rng),
            Process::PerturbedLattice {
                perturbation,
                shift,
            } => sample_perturbed_lattice(perturbation, w, &metric, rng, *shift),
            Process::DoubledPerturbedLattice { radius } => {
                sample_doubled_perturbed_lattice(*radius, w, &metric, rng)
            }
            Process::ColumnDeletedStack { p, site_p } => {
                sample_column_deleted_stack(*p, *site_p, w, &metric, rng)
            }
            Process::GafPlanar => crate::gaf::sample_gaf_planar_window(w, rng),
        }
    }
}

fn require_box(window: &Window) -> Result<&[[f64; 2]]> {
    match window {
        Window::Box { bounds } => Ok(bounds),
        Window::Disc { .. } => Err(Error::InvalidWindow("sampler needs a box window".into())),
    }
}

/// Homogeneous Poisson process of the given intensity on a box window.
pub fn sample_poisson(
    intensity: f64,
    window: &Window,
    metric: &Metric,
    rng: RngSpec,
) -> Result<PointPattern> {
    require_box(window)?;
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::InvalidParameter(format!("intensity {intensity}")));
    }
    let mean = intensity * window.volume();
    if mean > MAX_POINTS {
        return Err(Error::TooManyPoints(mean));
    }
    let mut r = rng.rng();
    let n = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .sample(&mut r) as usize;
    let bounds = window.bounding_box();
    let mut coords = Vec::with_capacity(n * bounds.len());
    let mut seen = std::collections::HashSet::new();
    while coords.len() < n * bounds.len() {
        let p: Vec<f64> = bounds
            .iter()
            .map(|[a, b]| a + (b - a) * r.random::<f64>())
            .collect();
        // floating-point collisions are resampled
        if seen.insert(p.iter().map(|v| v.to_bits()).collect::<Vec<_>>()) {
            coords.extend_from_slice(&p);
        }
    }
    PointPattern::from_flat(window.clone(), metric.clone(), coords, Label::None)
}

/// Lattice geometry shared by the lattice samplers.
struct LatticeFrame<'a> {
    bounds: &'a [[f64; 2]],
    torus: bool,
}

impl<'a> LatticeFrame<'a> {
    fn new(window: &'a Window, metric: &Metric) -> Result<Self> {
        let bounds = require_box(window)?;
        let torus = metric.is_toroidal();
        if torus {
            for [a, b] in bounds {
                let side = b - a;
                if (side - side.round()).abs() > 1e-9 || side.round() < 1.0 {
                    return Err(Error::InvalidWindow(format!(
                        "periodic lattice needs integer side lengths, got {side}"
                    )));
                }
            }
        }
        Ok(Self { bounds, torus })
    }

    fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Integer sites `k` whose shifted position `k + shift` may land in the window
    /// after a perturbation of size at most `margin`.
    fn sites(&self, shift: &[f64], margin: f64) -> Vec<Vec<i64>> {
        let ranges: Vec<(i64, i64)> = if self.torus {
            self.bounds
                .iter()
                .map(|[a, b]| (0, (b - a).round() as i64 - 1))
                .collect()
        } else {
            self.bounds
                .iter()
                .zip(shift)
                .map(|([a, b], s)| {
                    (
                        (a - s - margin).ceil() as i64,
                        (b - s + margin).floor() as i64,
                    )
                })
                .collect()
        };
        let mut out = Vec::new();
        if ranges.iter().any(|(lo, hi)| hi < lo) {
            return out;
        }
        let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(cur.clone());
            let mut k = 0;
            loop {
                if k == cur.len() {
                    return out;
                }
                cur[k] += 1;
                if cur[k] <= ranges[k].1 {
                    break;
                }
                cur[k] = ranges[k].0;
                k += 1;
            }
        }
    }

    /// Position of a site plus offset, wrapped on the torus. `None` when it falls
    /// outside a euclidean window.
    fn place(&self, site: &[i64], shift: &[f64], offset: &[f64]) -> Option<Vec<f64>> {
        let mut x = Vec::with_capacity(site.len());
        for (i, [a, b]) in self.bounds.iter().enumerate() {
            if self.torus {
                let side = b - a;
                let v = site[i] as f64 + shift[i] + offset[i];
                let mut w = v - side * (v / side).floor();
                if w >= side {
                    w = 0.0;
                }
                x.push(a + w);
            } else {
                let v = site[i] as f64 + shift[i] + offset[i];
                if v < *a || v > *b {
                    return None;
                }
                x.push(v);
            }
        }
        Some(x)
    }
}

fn finish(window: &Window, metric: &Metric, points: Vec<Vec<f64>>) -> Result<PointPattern> {
    PointPattern::new(window.clone(), metric.clone(), points, Label::None)
}

/// `U + Z^d` restricted to the window, `U` uniform in `[0,1)^d`.
pub fn sample_shifted_lattice(
    window: &Window,
    metric: &Metric,
    rng: RngSpec,
) -> Result<PointPattern> {
    sample_site_percolation(1.0, window, metric, rng)
}

/// Shifted lattice with each site kept independently with probability `p`.
/// With `p = 1` this is exactly [`sample_shifted_lattice`] for the same stream.
pub fn sample_site_percolation(
    p: f64,
    window: &Window,
    metric: &Metric,
    rng: RngSpec,
) -> Result<PointPattern> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("retention {p}")));
    }
    let frame = LatticeFrame::new(window, metric)?;
    let d = frame.dim();
    let shift = lattice_shift(d, &mut rng.rng());
    let mut keep = rng.derive(tags::RETAIN).rng();
    let zero = vec![0.0; d];
    let mut pts = Vec::new();
    for site in frame.sites(&shift, 0.0) {
        if p < 1.0 && keep.random::<f64>() >= p {
            continue;
        }
        if let Some(x) = frame.place(&site, &shift, &zero) {
            pts.push(x);
        }
    }
    finish(window, metric, pts)
}

/// Number of lattice sites at sup-distance in `[k, k+1)` from the box.
fn shell_sites(sides: &[f64], k: f64) -> f64 {
    let outer: f64 = sides.iter().map(|s| s + 2.0 * k + 3.0).product();
    let inner: f64 = sides.iter().map(|s| (s + 2.0 * k - 1.0).max(0.0)).product();
    outer - inner
}

/// Buffer margin such that the expected number of window points coming from
/// sites beyond the margin is below [`BUFFER_TOLERANCE`].
pub fn buffer_margin(spec: &PerturbationSpec, window: &Window) -> Result<f64> {
    spec.validate()?;
    let sides = window
        .sides()
        .ok_or_else(|| Error::InvalidWindow("box window required".into()))?;
    let d = sides.len();
    let diameter = sides.iter().map(|s| s * s).sum::<f64>().sqrt();
    let limit = 10.0 * diameter;
    match *spec {
        PerturbationSpec::Zero => return Ok(0.0),
        PerturbationSpec::UniformBall { radius } => return Ok(radius),
        _ => {}
    }
    if let PerturbationSpec::HeavyTail { alpha } = *spec {
        if alpha <= d as f64 {
            return Err(Error::WindowTooSmall(format!(
                "heavy tail alpha = {alpha} <= d: no finite buffer; use a toroidal window"
            )));
        }
    }
    let tail_from = |m: f64| -> f64 {
        let mut total = 0.0;
        let mut k = m;
        loop {
            let term = shell_sites(&sides, k) * spec.norm_tail(d, k);
            total += term;
            if term < 1e-15 * total.max(1e-300) || k > m + 1e6 {
                break;
            }
            k += 1.0;
        }
        if let PerturbationSpec::HeavyTail { alpha } = *spec {
            // integral bound on the truncated remainder
            let s = sides.iter().sum::<f64>() + 2.0 * k + 3.0;
            let c = 2.0 * d as f64 * 2f64.powi(d as i32 - 1) * s.powi(d as i32 - 1);
            total += c * (1.0 + k).powf(1.0 - alpha) / (alpha - 1.0);
        }
        total
    };
    let mut m = 0.0;
    while m <= limit {
        if tail_from(m) < BUFFER_TOLERANCE {
            return Ok(m);
        }
        m += 1.0;
    }
    Err(Error::WindowTooSmall(format!(
        "perturbation buffer exceeds 10x the window diameter ({limit})"
    )))
}

/// `{z + Y_z}` over the lattice, optionally preceded by a uniform shift `U`.
///
/// Perturbations are drawn from per-site streams, so enlarging the buffer never
/// changes the perturbation of a site already simulated.
pub fn sample_perturbed_lattice(
    spec: &PerturbationSpec,
    window: &Window,
    metric: &Metric,
    rng: RngSpec,
    shift: bool,
) -> Result<PointPattern> {
    let margin = if metric.is_toroidal() {
        0.0
    } else {
        buffer_margin(spec, window)?
    };
    sample_perturbed_lattice_with_margin(spec, window, metric, rng, shift, margin)
}

/// [`sample_perturbed_lattice`] with an explicit euclidean buffer margin.
pub fn sample_perturbed_lattice_with_margin(
    spec: &PerturbationSpec,
    window: &Window,
    metric: &Metric,
    rng: RngSpec,
    shift: bool,
    margin: f64,
) -> Result<PointPattern> {
    spec.validate()?;
    let frame = LatticeFrame::new(window, metric)?;
    let d = frame.dim();
    let u = if shift {
        lattice_shift(d, &mut rng.rng())
    } else {
        vec![0.0; d]
    };
    let per_site = rng.derive(tags::PERTURB);
    let mut pts = Vec::new();
    for site in frame.sites(&u, margin) {
        let y = spec.sample(d, &mut per_site.keyed(&site).rng());
        if let Some(x) = frame.place(&site, &u, &y) {
            pts.push(x);
        }
    }
    finish(window, metric, pts)
}

/// `U + {i + W_i, i + Y_i}` with `W_i`, `Y_i` uniform in `B(0, radius)`.
pub fn sample_doubled_perturbed_lattice(
    radius: f64,
    window: &Window,
    metric: &Metric,
    rng: RngSpec,
) -> Result<PointPattern> {
    if !(radius > 0.0 && radius <= 0.25) {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} not in (0, 1/4]"
        )));
    }
    let frame = LatticeFrame::new(window, metric)?;
    let d = frame.dim();
    let u = lattice_shift(d, &mut rng.rng());
    let per_site = rng.derive(tags::PERTURB);
    let margin = if frame.torus { 0.0 } else { radius };
    let mut pts = Vec::new();
    for site in frame.sites(&u, margin) {
        let mut r = per_site.keyed(&site).rng();
        for _ in 0..2 {
            let y = uniform_in_ball(d, radius, &mut r);
            if let Some(x) = frame.place(&site, &u, &y) {
                pts.push(x);
            }
        }
    }
    finish(window, metric, pts)
}

/// Shifted lattice with whole rows deleted.
///
/// d = 2: rows `{x_2 = j}` are kept independently with probability `p`.
/// d = 3: independent shifted site-percolation planes (retention `site_p`)
/// stacked at the kept integer heights.
pub fn sample_column_deleted_stack(
    p: f64,
    site_p: f64,
    window: &Window,
    metric: &Metric,
    rng: RngSpec,
) -> Result<PointPattern> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&site_p) {
        return Err(Error::InvalidParameter(format!("retention {p}, {site_p}")));
    }
    let frame = LatticeFrame::new(window, metric)?;
    let rows = rng.derive(tags::RETAIN);
    let kept = |j: i64| p >= 1.0 || rows.keyed(&[j]).rng().random::<f64>() < p;
    let mut pts = Vec::new();
    match frame.dim() {
        2 => {
            let u = lattice_shift(2, &mut rng.rng());
            for site in frame.sites(&u, 0.0) {
                if !kept(site[1]) {
                    continue;
                }
                if let Some(x) = frame.place(&site, &u, &[0.0, 0.0]) {
                    pts.push(x);
                }
            }
        }
        3 => {
            let planes = rng.derive(tags::SECOND);
            for site in frame.sites(&[0.0, 0.0, 0.0], 1.0) {
                let h = site[2];
                if !kept(h) {
                    continue;
                }
                let plane = planes.keyed(&[h]);
                let u = lattice_shift(2, &mut plane.rng());
                if site_p < 1.0 && plane.keyed(&site[..2]).rng().random::<f64>() >= site_p {
                    continue;
                }
                let shift = [u[0], u[1], 0.0];
                if let Some(x) = frame.place(&site, &shift, &[0.0; 3]) {
                    pts.push(x);
                }
            }
        }
        d => {
            return Err(Error::InvalidParameter(format!(
                "row-deleted stack needs d in {{2,3}}, got {d}"
            )))
        }
    }
    finish(window, metric, pts)
}
