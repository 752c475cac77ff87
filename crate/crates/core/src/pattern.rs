//! Finite simple point patterns and their JSON file format.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Metric, MetricKind, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Red,
    Blue,
    #[default]
    None,
}

impl Label {
    fn as_str(self) -> &'static str {
        match self {
            Label::Red => "red",
            Label::Blue => "blue",
            Label::None => "none",
        }
    }
}

/// A finite simple point set inside a window, stored in canonical
/// (lexicographic) order so equal sets compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    dim: usize,
    window: Window,
    metric: Metric,
    coords: Vec<f64>,
    label: Label,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

impl PointPattern {
    /// Builds a pattern from arbitrary-order points, validating every invariant.
    pub fn new(
        window: Window,
        metric: Metric,
        points: Vec<Vec<f64>>,
        label: Label,
    ) -> Result<Self> {
        let dim = window.dimension();
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(window, metric, flat, label)
    }

    /// Same as [`PointPattern::new`] with coordinates packed point after point.
    pub fn from_flat(
        window: Window,
        metric: Metric,
        coords: Vec<f64>,
        label: Label,
    ) -> Result<Self> {
        window.validate()?;
        let dim = window.dimension();
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Metric::Toroidal { periods } = &metric {
            if periods.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: periods.len(),
                });
            }
        }
        for p in coords.chunks_exact(dim) {
            if p.iter().any(|v| !v.is_finite()) || !window.contains(p) {
                return Err(Error::OutsideWindow(p.to_vec()));
            }
        }
        let n = coords.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            lex_cmp(
                &coords[i * dim..(i + 1) * dim],
                &coords[j * dim..(j + 1) * dim],
            )
        });
        let mut sorted = Vec::with_capacity(coords.len());
        for &i in &order {
            sorted.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
        }
        for w in 1..n {
            let a = &sorted[(w - 1) * dim..w * dim];
            let b = &sorted[w * dim..(w + 1) * dim];
            if lex_cmp(a, b) == Ordering::Equal {
                return Err(Error::NotSimple(a.to_vec()));
            }
        }
        Ok(Self {
            dim,
            window,
            metric,
            coords: sorted,
            label,
        })
    }

    pub fn empty(window: Window, metric: Metric, label: Label) -> Result<Self> {
        Self::from_flat(window, metric, Vec::new(), label)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Distance between points `i` and `j` under the pattern's metric.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.dist(self.point(i), self.point(j))
    }

    /// Index of a point with exactly these coordinates.
    pub fn find(&self, x: &[f64]) -> Option<usize> {
        let n = self.len();
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match lex_cmp(self.point(mid), x) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Serializes to the pattern file format; numbers carry 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"dimension\": {},", self.dim);
        s.push_str("  \"window\": ");
        match &self.window {
            Window::Box { bounds } => {
                s.push_str("{\"kind\": \"box\", \"bounds\": [");
                for (i, [a, b]) in bounds.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    let _ = write!(s, "[{}, {}]", fmt_num(*a), fmt_num(*b));
                }
                s.push_str("]},\n");
            }
            Window::Disc { center, radius } => {
                let _ = writeln!(
                    s,
                    "{{\"kind\": \"disc\", \"center\": [{}, {}], \"radius\": {}}},",
                    fmt_num(center[0]),
                    fmt_num(center[1]),
                    fmt_num(*radius)
                );
            }
        }
        let kind = match self.metric.kind() {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Toroidal => "toroidal",
            MetricKind::HyperbolicDisc => "hyperbolic-disc",
        };
        let _ = writeln!(s, "  \"metric\": {{\"kind\": \"{kind}\"}},");
        let _ = writeln!(s, "  \"label\": \"{}\",", self.label.as_str());
        s.push_str("  \"points\": [");
        for (i, p) in self.points().enumerate() {
            s.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
            for (k, v) in p.iter().enumerate() {
                if k > 0 {
                    s.push_str(", ");
                }
                s.push_str(&fmt_num(*v));
            }
            s.push(']');
        }
        if !self.is_empty() {
            s.push_str("\n  ");
        }
        s.push_str("]\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PatternFile =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        if f.dimension != f.window.dimension() {
            return Err(Error::DimensionMismatch {
                expected: f.window.dimension(),
                got: f.dimension,
            });
        }
        let metric = Metric::for_window(f.metric.kind, &f.window)?;
        Self::new(f.window, metric, f.points, f.label)
    }
}

/// Formats with 17 significant digits, enough for a bit-faithful round trip.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricField {
    kind: MetricKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternFile {
    dimension: usize,
    window: Window,
    metric: MetricField,
    #[serde(default)]
    label: Label,
    points: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> Window {
        Window::cube(2, 1.0).unwrap()
    }

    #[test]
    fn canonical_order() {
        let a = PointPattern::new(
            unit_square(),
            Metric::Euclidean,
            vec![vec![0.5, 0.1], vec![0.2, 0.9]],
            Label::None,
        )
        .unwrap();
        let b = PointPattern::new(
            unit_square(),
            Metric::Euclidean,
            vec![vec![0.2, 0.9], vec![0.5, 0.1]],
            Label::None,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.point(0), &[0.2, 0.9]);
        assert_eq!(a.find(&[0.5, 0.1]), Some(1));
        assert_eq!(a.find(&[0.5, 0.2]), None);
    }

    #[test]
    fn rejects_coincident_and_outside() {
        let dup = PointPattern::new(
            unit_square(),
            Metric::Euclidean,
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            Label::None,
        );
        assert!(matches!(dup, Err(Error::NotSimple(_))));
        let out = PointPattern::new(
            unit_square(),
            Metric::Euclidean,
            vec![vec![1.5, 0.5]],
            Label::None,
        );
        assert!(matches!(out, Err(Error::OutsideWindow(_))));
    }

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(5.0), "5.0000000000000000e0");
    }

    #[test]
    fn json_shape() {
        let p = PointPattern::new(
            Window::cube(1, 2.0).unwrap(),
            Metric::Euclidean,
            vec![vec![1.0]],
            Label::Red,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["dimension"], 1);
        assert_eq!(v["window"]["kind"], "box");
        assert_eq!(v["metric"]["kind"], "euclidean");
        assert_eq!(v["label"], "red");
        assert_eq!(v["points"][0][0], 1.0);
        assert!(PointPattern::from_json(r#"{"dimension":1,"window":{"kind":"box","bounds":[[0,1]]},"metric":{"kind":"euclidean"},"points":[],"extra":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(pts in prop::collection::vec(prop::array::uniform2(-3.0..7.0f64), 0..40),
                                        torus in any::<bool>()) {
            let w = Window::new_box(vec![[-3.0, 7.0], [-3.0, 7.0]]).unwrap();
            let kind = if torus { MetricKind::Toroidal } else { MetricKind::Euclidean };
            let m = Metric::for_window(kind, &w).unwrap();
            let mut pts: Vec<Vec<f64>> = pts.into_iter().map(|p| p.to_vec()).collect();
            pts.sort_by(|a, b| lex_cmp(a, b));
            pts.dedup();
            let p = PointPattern::new(w, m, pts, Label::Blue).unwrap();
            let q = PointPattern::from_json(&p.to_json()).unwrap();
            prop_assert_eq!(&p, &q);
            prop_assert_eq!(p.to_json(), q.to_json());
        }
    }
}
