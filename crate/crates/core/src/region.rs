//! Finite unions of boxes and balls.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::rng::{tags, RngSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Shape {
    Box { bounds: Vec<[f64; 2]> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Shape {
    fn dimension(&self) -> usize {
        match self {
            Shape::Box { bounds } => bounds.len(),
            Shape::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Shape::Box { bounds } => x.iter().zip(bounds).all(|(v, [a, b])| *v >= *a && *v <= *b),
            Shape::Ball { center, radius } => {
                x.iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    < radius * radius
            }
        }
    }

    fn bounding_box(&self) -> Vec<[f64; 2]> {
        match self {
            Shape::Box { bounds } => bounds.clone(),
            Shape::Ball { center, radius } => {
                center.iter().map(|c| [c - radius, c + radius]).collect()
            }
        }
    }

    fn volume(&self) -> f64 {
        match self {
            Shape::Box { bounds } => bounds.iter().map(|[a, b]| b - a).product(),
            Shape::Ball { center, radius } => ball_volume(center.len(), *radius),
        }
    }
}

/// Volume of a euclidean ball of radius `r` in dimension `d`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    // V_d = pi^{d/2} / Gamma(d/2 + 1) r^d, via the two-step recursion V_d = 2 pi / d V_{d-2}.
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v * r.powi(d as i32)
}

/// Lebesgue measure with an error estimate (zero when computed exactly).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measure {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub shapes: Vec<Shape>,
}

fn boxes_overlap(a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
    a.iter()
        .zip(b)
        .all(|([a0, a1], [b0, b1])| a0 < b1 && b0 < a1)
}

fn shapes_overlap(a: &Shape, b: &Shape) -> bool {
    match (a, b) {
        (
            Shape::Ball {
                center: c1,
                radius: r1,
            },
            Shape::Ball {
                center: c2,
                radius: r2,
            },
        ) => {
            let d2: f64 = c1.iter().zip(c2).map(|(x, y)| (x - y) * (x - y)).sum();
            d2 < (r1 + r2) * (r1 + r2)
        }
        (Shape::Ball { center, radius }, Shape::Box { bounds })
        | (Shape::Box { bounds }, Shape::Ball { center, radius }) => {
            let d2: f64 = center
                .iter()
                .zip(bounds)
                .map(|(c, [a, b])| {
                    let q = c.clamp(*a, *b);
                    (c - q) * (c - q)
                })
                .sum();
            d2 < radius * radius
        }
        _ => boxes_overlap(&a.bounding_box(), &b.bounding_box()),
    }
}

/// Radical-inverse (van der Corput) in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

impl Region {
    pub fn new(shapes: Vec<Shape>) -> Result<Self> {
        let r = Region { shapes };
        r.validate()?;
        Ok(r)
    }

    pub fn from_box(bounds: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(vec![Shape::Box { bounds }])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(vec![Shape::Ball { center, radius }])
    }

    /// The whole (box) window as a region.
    pub fn from_window(w: &Window) -> Result<Self> {
        match w {
            Window::Box { bounds } => Self::from_box(bounds.clone()),
            Window::Disc { center, radius } => Self::ball(center.to_vec(), *radius),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension();
        for s in &self.shapes {
            if s.dimension() != d || d == 0 {
                return Err(Error::InvalidRegion("members disagree on dimension".into()));
            }
            match s {
                Shape::Box { bounds } => {
                    if bounds
                        .iter()
                        .any(|[a, b]| !(a.is_finite() && b.is_finite() && b >= a))
                    {
                        return Err(Error::InvalidRegion(format!("bad box {bounds:?}")));
                    }
                }
                Shape::Ball { center, radius } => {
                    if !(radius.is_finite() && *radius >= 0.0)
                        || center.iter().any(|c| !c.is_finite())
                    {
                        return Err(Error::InvalidRegion(format!("bad ball radius {radius}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.shapes.first().map(Shape::dimension).unwrap_or(0)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.shapes.iter().any(|s| s.contains(x))
    }

    pub fn bounding_box(&self) -> Vec<[f64; 2]> {
        let d = self.dimension();
        let mut bb = vec![[f64::INFINITY, f64::NEG_INFINITY]; d];
        for s in &self.shapes {
            for (acc, [a, b]) in bb.iter_mut().zip(s.bounding_box()) {
                acc[0] = acc[0].min(a);
                acc[1] = acc[1].max(b);
            }
        }
        bb
    }

    /// Whether every member lies inside the window (checked on bounding boxes,
    /// and exactly for balls inside a disc window).
    pub fn inside(&self, w: &Window) -> bool {
        if self.dimension() != w.dimension() {
            return false;
        }
        self.shapes.iter().all(|s| match (s, w) {
            (Shape::Ball { center, radius }, Window::Disc { .. }) => {
                w.contains_ball(center, *radius)
            }
            _ => {
                let bb = s.bounding_box();
                let wb = w.bounding_box();
                bb.iter()
                    .zip(&wb)
                    .all(|([a, b], [wa, wbb])| a >= wa && b <= wbb)
            }
        })
    }

    fn pairwise_disjoint(&self) -> bool {
        for (i, a) in self.shapes.iter().enumerate() {
            for b in &self.shapes[i + 1..] {
                if shapes_overlap(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// Lebesgue measure. Exact for disjoint members and for unions made only of
    /// boxes; otherwise a randomized Halton estimate with a standard error.
    pub fn measure(&self) -> Measure {
        if self.pairwise_disjoint() {
            return Measure {
                value: self.shapes.iter().map(Shape::volume).sum(),
                error: 0.0,
            };
        }
        if self.shapes.iter().all(|s| matches!(s, Shape::Box { .. })) {
            return Measure {
                value: self.box_union_volume(),
                error: 0.0,
            };
        }
        self.qmc_measure(RngSpec::new(0, tags::QMC), 16, 1 << 14)
    }

    /// Exact union volume of boxes by coordinate compression.
    fn box_union_volume(&self) -> f64 {
        let d = self.dimension();
        let boxes: Vec<&Vec<[f64; 2]>> = self
            .shapes
            .iter()
            .map(|s| match s {
                Shape::Box { bounds } => bounds,
                Shape::Ball { .. } => unreachable!(),
            })
            .collect();
        let cuts: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let mut c: Vec<f64> = boxes.iter().flat_map(|b| [b[k][0], b[k][1]]).collect();
                c.sort_by(f64::total_cmp);
                c.dedup();
                c
            })
            .collect();
        let dims: Vec<usize> = cuts.iter().map(|c| c.len().saturating_sub(1)).collect();
        if dims.contains(&0) {
            return 0.0;
        }
        let total: usize = dims.iter().product();
        let mut vol = 0.0;
        let mut mid = vec![0.0; d];
        for cell in 0..total {
            let mut rem = cell;
            let mut v = 1.0;
            for k in 0..d {
                let j = rem % dims[k];
                rem /= dims[k];
                mid[k] = 0.5 * (cuts[k][j] + cuts[k][j + 1]);
                v *= cuts[k][j + 1] - cuts[k][j];
            }
            if boxes
                .iter()
                .any(|b| b.iter().zip(&mid).all(|([a, bb], m)| m > a && m < bb))
            {
                vol += v;
            }
        }
        vol
    }

    /// Randomly shifted Halton estimate: `shifts` independent Cranley-Patterson
    /// rotations of an `n`-point sequence; the error is the standard error across shifts.
    pub fn qmc_measure(&self, rng: RngSpec, shifts: usize, n: u64) -> Measure {
        let d = self.dimension();
        let bb = self.bounding_box();
        let bb_vol: f64 = bb.iter().map(|[a, b]| b - a).product();
        let mut r = rng.rng();
        let mut estimates = Vec::with_capacity(shifts);
        let mut x = vec![0.0; d];
        for _ in 0..shifts {
            let shift: Vec<f64> = (0..d).map(|_| r.random::<f64>()).collect();
            let mut hits = 0u64;
            for i in 1..=n {
                for k in 0..d {
                    let u = (radical_inverse(i, PRIMES[k % PRIMES.len()]) + shift[k]).fract();
                    x[k] = bb[k][0] + u * (bb[k][1] - bb[k][0]);
                }
                if self.contains(&x) {
                    hits += 1;
                }
            }
            estimates.push(bb_vol * hits as f64 / n as f64);
        }
        let m = estimates.iter().sum::<f64>() / shifts as f64;
        let var = estimates.iter().map(|e| (e - m) * (e - m)).sum::<f64>()
            / (shifts as f64 - 1.0).max(1.0);
        Measure {
            value: m,
            error: (var / shifts as f64).sqrt(),
        }
    }

    /// A uniform point of the region, by rejection from its bounding box.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let bb = self.bounding_box();
        for _ in 0..1_000_000 {
            let x: Vec<f64> = bb
                .iter()
                .map(|[a, b]| a + (b - a) * rng.random::<f64>())
                .collect();
            if self.contains(&x) {
                return Ok(x);
            }
        }
        Err(Error::InvalidRegion(
            "rejection sampling found no interior point".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(1, 2.0) - 4.0).abs() < 1e-15);
        assert!((ball_volume(2, 1.0) - std::f64::consts::PI).abs() < 1e-15);
        assert!((ball_volume(3, 1.0) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn disjoint_members_exact() {
        let r = Region::new(vec![
            Shape::Box {
                bounds: vec![[0.0, 1.0], [0.0, 2.0]],
            },
            Shape::Ball {
                center: vec![5.0, 5.0],
                radius: 1.0,
            },
        ])
        .unwrap();
        let m = r.measure();
        assert_eq!(m.error, 0.0);
        assert!((m.value - (2.0 + std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn overlapping_boxes_exact() {
        let r = Region::new(vec![
            Shape::Box {
                bounds: vec![[0.0, 2.0], [0.0, 2.0]],
            },
            Shape::Box {
                bounds: vec![[1.0, 3.0], [1.0, 3.0]],
            },
        ])
        .unwrap();
        let m = r.measure();
        assert_eq!(m.error, 0.0);
        assert!((m.value - 7.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_balls_estimated() {
        // Two unit discs at distance 1: union = 2 pi - lens, lens = 2 acos(1/2) - sqrt(3)/2
        let r = Region::new(vec![
            Shape::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
            Shape::Ball {
                center: vec![1.0, 0.0],
                radius: 1.0,
            },
        ])
        .unwrap();
        let lens = 2.0 * (0.5f64).acos() - 3f64.sqrt() / 2.0;
        let exact = 2.0 * std::f64::consts::PI - lens;
        let m = r.measure();
        assert!(m.error > 0.0);
        assert!(
            (m.value - exact).abs() < 6.0 * m.error + 1e-6,
            "{m:?} vs {exact}"
        );
    }

    #[test]
    fn rejects_mixed_dimensions() {
        assert!(Region::new(vec![
            Shape::Box {
                bounds: vec![[0.0, 1.0]]
            },
            Shape::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0
            },
        ])
        .is_err());
    }
}
