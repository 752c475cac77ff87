//! Observation windows and metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite observation region of a pattern.
///
/// Boxes are closed per-axis intervals. The disc kind is reserved for the
/// hyperbolic unit disc and must have radius in (0, 1); it is treated as closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Window {
    Box { bounds: Vec<[f64; 2]> },
    Disc { center: [f64; 2], radius: f64 },
}

impl Window {
    pub fn new_box(bounds: Vec<[f64; 2]>) -> Result<Self> {
        let w = Window::Box { bounds };
        w.validate()?;
        Ok(w)
    }

    /// `[0, side]^dim`.
    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        Self::new_box(vec![[0.0, side]; dim])
    }

    pub fn unit_disc(radius: f64) -> Result<Self> {
        let w = Window::Disc {
            center: [0.0, 0.0],
            radius,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Window::Box { bounds } => {
                if bounds.is_empty() {
                    return Err(Error::InvalidWindow("box needs at least one axis".into()));
                }
                for (i, [a, b]) in bounds.iter().enumerate() {
                    if !(a.is_finite() && b.is_finite() && b > a) {
                        return Err(Error::InvalidWindow(format!(
                            "axis {i}: [{a}, {b}] is empty"
                        )));
                    }
                }
                Ok(())
            }
            Window::Disc { center, radius } => {
                if !(center.iter().all(|c| c.is_finite()) && *radius > 0.0 && *radius < 1.0) {
                    return Err(Error::InvalidWindow(format!(
                        "disc radius {radius} not in (0,1)"
                    )));
                }
                if center[0].hypot(center[1]) + radius >= 1.0 {
                    return Err(Error::InvalidWindow("disc leaves the unit disc".into()));
                }
                Ok(())
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Window::Box { bounds } => bounds.len(),
            Window::Disc { .. } => 2,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Window::Box { bounds } => {
                x.len() == bounds.len()
                    && x.iter().zip(bounds).all(|(v, [a, b])| *v >= *a && *v <= *b)
            }
            Window::Disc { center, radius } => {
                x.len() == 2 && (x[0] - center[0]).hypot(x[1] - center[1]) <= *radius
            }
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> Vec<[f64; 2]> {
        match self {
            Window::Box { bounds } => bounds.clone(),
            Window::Disc { center, radius } => {
                vec![
                    [center[0] - radius, center[0] + radius],
                    [center[1] - radius, center[1] + radius],
                ]
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Window::Box { bounds } => bounds.iter().map(|[a, b]| b - a).product(),
            Window::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            Window::Box { bounds } => bounds.iter().map(|[a, b]| 0.5 * (a + b)).collect(),
            Window::Disc { center, .. } => center.to_vec(),
        }
    }

    /// Side lengths of a box window.
    pub fn sides(&self) -> Option<Vec<f64>> {
        match self {
            Window::Box { bounds } => Some(bounds.iter().map(|[a, b]| b - a).collect()),
            Window::Disc { .. } => None,
        }
    }

    /// Euclidean distance from `x` to the window boundary (0 outside).
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        match self {
            Window::Box { bounds } => bounds
                .iter()
                .zip(x)
                .map(|([a, b], v)| (v - a).min(b - v))
                .fold(f64::INFINITY, f64::min),
            Window::Disc { center, radius } => radius - (x[0] - center[0]).hypot(x[1] - center[1]),
        }
    }

    /// Whether the closed euclidean ball `B(center, r)` lies inside the window.
    pub fn contains_ball(&self, center: &[f64], r: f64) -> bool {
        self.contains(center) && self.distance_to_boundary(center) >= r
    }

    pub fn translated(&self, by: &[f64]) -> Window {
        match self {
            Window::Box { bounds } => Window::Box {
                bounds: bounds
                    .iter()
                    .zip(by)
                    .map(|([a, b], t)| [a + t, b + t])
                    .collect(),
            },
            Window::Disc { center, radius } => Window::Disc {
                center: [center[0] + by[0], center[1] + by[1]],
                radius: *radius,
            },
        }
    }
}

/// Serialized form of a [`Metric`]; toroidal periods come from the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    #[default]
    Euclidean,
    Toroidal,
    HyperbolicDisc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Euclidean,
    Toroidal { periods: Vec<f64> },
    HyperbolicDisc,
}

impl Metric {
    pub fn for_window(kind: MetricKind, window: &Window) -> Result<Self> {
        match (kind, window) {
            (MetricKind::Euclidean, _) => Ok(Metric::Euclidean),
            (MetricKind::Toroidal, Window::Box { .. }) => Ok(Metric::Toroidal {
                periods: window.sides().unwrap_or_default(),
            }),
            (MetricKind::Toroidal, Window::Disc { .. }) => Err(Error::InvalidWindow(
                "toroidal metric needs a box window".into(),
            )),
            (MetricKind::HyperbolicDisc, w) if w.dimension() == 2 => Ok(Metric::HyperbolicDisc),
            (MetricKind::HyperbolicDisc, _) => {
                Err(Error::InvalidWindow("hyperbolic metric is planar".into()))
            }
        }
    }

    pub fn kind(&self) -> MetricKind {
        match self {
            Metric::Euclidean => MetricKind::Euclidean,
            Metric::Toroidal { .. } => MetricKind::Toroidal,
            Metric::HyperbolicDisc => MetricKind::HyperbolicDisc,
        }
    }

    pub fn is_toroidal(&self) -> bool {
        matches!(self, Metric::Toroidal { .. })
    }

    /// Distance without argument validation. Callers guarantee dimensions.
    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Toroidal { periods } => a
                .iter()
                .zip(b)
                .zip(periods)
                .map(|((x, y), p)| {
                    let d = (x - y).abs() % p;
                    let d = d.min(p - d);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            Metric::HyperbolicDisc => {
                // arctanh |(z - w) / (1 - conj(w) z)|
                let (zr, zi, wr, wi) = (a[0], a[1], b[0], b[1]);
                let nr = zr - wr;
                let ni = zi - wi;
                let dr = 1.0 - (wr * zr + wi * zi);
                let di = -(wr * zi - wi * zr);
                let rho = (nr.hypot(ni) / dr.hypot(di)).min(1.0);
                rho.atanh()
            }
        }
    }

    /// Coordinate difference `a - b`, wrapped to the nearest image on a torus.
    pub fn displacement(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        match self {
            Metric::Toroidal { periods } => a
                .iter()
                .zip(b)
                .zip(periods)
                .map(|((x, y), p)| {
                    let d = x - y;
                    d - p * (d / p).round()
                })
                .collect(),
            _ => a.iter().zip(b).map(|(x, y)| x - y).collect(),
        }
    }
}

/// Checked distance between two coordinate vectors.
pub fn distance(metric: &Metric, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    match metric {
        Metric::Toroidal { periods } if periods.len() != a.len() => {
            return Err(Error::DimensionMismatch {
                expected: periods.len(),
                got: a.len(),
            });
        }
        Metric::HyperbolicDisc => {
            if a.len() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: a.len(),
                });
            }
            for p in [a, b] {
                if p[0].hypot(p[1]) >= 1.0 {
                    return Err(Error::OutsideUnitDisc(p.to_vec()));
                }
            }
        }
        _ => {}
    }
    Ok(metric.dist(a, b))
}
