//! Boolean continuum percolation: clusters of the union of open balls of
//! radius `R` around the points, their contact with the window faces, and
//! branch counts of the origin's cluster outside a ball.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Metric, Window};
use crate::pattern::{fmt_num, PointPattern};
use crate::spatial::Grid;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns whether they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub size: usize,
    pub bbox: Vec<[f64; 2]>,
    /// Per axis: contact with the low face and with the high face.
    pub touches: Vec<[bool; 2]>,
}

impl Cluster {
    pub fn touches_any(&self) -> bool {
        self.touches.iter().any(|t| t[0] || t[1])
    }
}

/// Cluster ids are `0..clusters.len()`, numbered by first appearance in the
/// pattern's canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabels {
    pub radius: f64,
    pub label: Vec<usize>,
    pub clusters: Vec<Cluster>,
}

fn window_bounds(p: &PointPattern) -> Result<&[[f64; 2]]> {
    match p.window() {
        Window::Box { bounds } => Ok(bounds),
        Window::Disc { .. } => Err(Error::InvalidWindow(
            "percolation needs a box window".into(),
        )),
    }
}

/// Calls `f(i, j)` for each pair `i < j` among `subset` at distance `< 2r`.
fn close_pairs(
    p: &PointPattern,
    subset: &[usize],
    r: f64,
    mut f: impl FnMut(usize, usize),
) -> Result<()> {
    let bounds = window_bounds(p)?;
    let dim = p.dimension();
    let coords: Vec<f64> = subset
        .iter()
        .flat_map(|&i| p.point(i).iter().copied())
        .collect();
    let grid = Grid::new(&coords, dim, bounds, 2.0 * r, false);
    for (a, &i) in subset.iter().enumerate() {
        grid.candidates_within(p.point(i), 2.0 * r, |b| {
            if b > a && p.dist(i, subset[b]) < 2.0 * r {
                f(a, b);
            }
        });
    }
    Ok(())
}

fn face_contact(bounds: &[[f64; 2]], x: &[f64], r: f64) -> Vec<[bool; 2]> {
    bounds
        .iter()
        .zip(x)
        .map(|([lo, hi], v)| [v - lo <= r, hi - v <= r])
        .collect()
}

/// Clusters of the occupied region `union B(x, R)`: two points share a
/// cluster iff joined by a chain with consecutive distances below `2R`.
pub fn build_boolean_model(p: &PointPattern, radius: f64) -> Result<ClusterLabels> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {radius}")));
    }
    if *p.metric() != Metric::Euclidean {
        return Err(Error::InvalidParameter(
            "percolation uses the euclidean metric".into(),
        ));
    }
    let bounds = window_bounds(p)?;
    let n = p.len();
    let mut uf = UnionFind::new(n);
    let all: Vec<usize> = (0..n).collect();
    close_pairs(p, &all, radius, |a, b| {
        uf.union(a, b);
    })?;
    let mut id = vec![usize::MAX; n];
    let mut label = vec![0; n];
    let mut clusters: Vec<Cluster> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        if id[root] == usize::MAX {
            id[root] = clusters.len();
            clusters.push(Cluster {
                size: 0,
                bbox: p.point(i).iter().map(|&v| [v, v]).collect(),
                touches: vec![[false; 2]; p.dimension()],
            });
        }
        let c = &mut clusters[id[root]];
        label[i] = id[root];
        c.size += 1;
        for (k, &v) in p.point(i).iter().enumerate() {
            c.bbox[k][0] = c.bbox[k][0].min(v);
            c.bbox[k][1] = c.bbox[k][1].max(v);
        }
        for (t, f) in c
            .touches
            .iter_mut()
            .zip(face_contact(bounds, p.point(i), radius))
        {
            t[0] |= f[0];
            t[1] |= f[1];
        }
    }
    Ok(ClusterLabels {
        radius,
        label,
        clusters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpanMode {
    TouchAllFaces,
    /// Both faces orthogonal to `axis` (any axis when absent). Axis 0 is horizontal.
    TouchTwoOpposite {
        #[serde(default)]
        axis: Option<usize>,
    },
}

pub fn is_spanning(c: &Cluster, mode: SpanMode) -> bool {
    match mode {
        SpanMode::TouchAllFaces => c.touches.iter().all(|t| t[0] && t[1]),
        SpanMode::TouchTwoOpposite { axis: Some(k) } => {
            c.touches.get(k).is_some_and(|t| t[0] && t[1])
        }
        SpanMode::TouchTwoOpposite { axis: None } => c.touches.iter().any(|t| t[0] && t[1]),
    }
}

pub fn count_spanning_clusters(labels: &ClusterLabels, mode: SpanMode) -> usize {
    labels
        .clusters
        .iter()
        .filter(|c| is_spanning(c, mode))
        .count()
}

/// Cluster whose occupied region covers `x`: that of the nearest point, if it
/// lies within `R`.
pub fn cluster_at(labels: &ClusterLabels, p: &PointPattern, x: &[f64]) -> Option<usize> {
    (0..p.len())
        .map(|i| (i, p.metric().dist(p.point(i), x)))
        .filter(|&(_, d)| d < labels.radius)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| labels.label[i])
}

/// Components of the origin's cluster outside `B(origin, M)` that reach the
/// window boundary. The cut keeps the cluster's points farther than `M - R`
/// from the origin, since their balls may protrude past the sphere.
pub fn count_m_branches(
    labels: &ClusterLabels,
    p: &PointPattern,
    origin: &[f64],
    m: f64,
) -> Result<usize> {
    if origin.len() != p.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            got: origin.len(),
        });
    }
    let Some(w) = cluster_at(labels, p, origin) else {
        return Ok(0);
    };
    let r = labels.radius;
    let bounds = window_bounds(p)?;
    let outside: Vec<usize> = (0..p.len())
        .filter(|&i| labels.label[i] == w && p.metric().dist(p.point(i), origin) > m - r)
        .collect();
    let mut uf = UnionFind::new(outside.len());
    close_pairs(p, &outside, r, |a, b| {
        uf.union(a, b);
    })?;
    let mut touching = vec![false; outside.len()];
    for (a, &i) in outside.iter().enumerate() {
        if face_contact(bounds, p.point(i), r)
            .iter()
            .any(|t| t[0] || t[1])
        {
            let root = uf.find(a);
            touching[root] = true;
        }
    }
    Ok(touching.iter().filter(|&&t| t).count())
}

/// One replicate of a percolation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercolationRecord {
    pub replicate: u64,
    pub n_points: usize,
    pub radius: f64,
    pub n_clusters: usize,
    pub n_spanning: usize,
    pub m_branches: Option<usize>,
}

pub fn records_to_csv(records: &[PercolationRecord]) -> String {
    let mut s = String::from("replicate,n_points,R,n_clusters,n_spanning,m_branches\n");
    for r in records {
        let mb = r.m_branches.map(|m| m.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.replicate,
            r.n_points,
            fmt_num(r.radius),
            r.n_clusters,
            r.n_spanning,
            mb
        );
    }
    s
}

/// Frequencies of each spanning count and each branch count.
pub fn summary_json(records: &[PercolationRecord]) -> String {
    fn freq(values: impl Iterator<Item = usize>, n: usize) -> serde_json::Value {
        let mut counts = std::collections::BTreeMap::new();
        for v in values {
            *counts.entry(v.to_string()).or_insert(0usize) += 1;
        }
        let m: serde_json::Map<String, serde_json::Value> = counts
            .into_iter()
            .map(|(k, c)| (k, serde_json::json!(c as f64 / n as f64)))
            .collect();
        serde_json::Value::Object(m)
    }
    let n = records.len().max(1);
    let with_branches: Vec<usize> = records.iter().filter_map(|r| r.m_branches).collect();
    let doc = serde_json::json!({
        "replicates": records.len(),
        "spanning_frequency": freq(records.iter().map(|r| r.n_spanning), n),
        "m_branch_frequency": freq(with_branches.iter().copied(), with_branches.len().max(1)),
        "mean_clusters": records.iter().map(|r| r.n_clusters as f64).sum::<f64>() / n as f64,
    });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::sample_shifted_lattice;
    use crate::pattern::Label;
    use crate::rng::RngSpec;

    fn plane(pts: Vec<Vec<f64>>, side: f64) -> PointPattern {
        PointPattern::new(
            Window::cube(2, side).unwrap(),
            Metric::Euclidean,
            pts,
            Label::None,
        )
        .unwrap()
    }

    #[test]
    fn pair_thresholds() {
        let a = plane(vec![vec![1.0, 1.0], vec![2.9, 1.0]], 5.0);
        assert_eq!(build_boolean_model(&a, 1.0).unwrap().clusters.len(), 1);
        let b = plane(vec![vec![1.0, 1.0], vec![3.1, 1.0]], 5.0);
        assert_eq!(build_boolean_model(&b, 1.0).unwrap().clusters.len(), 2);
        assert!(build_boolean_model(&b, 0.0).is_err());
    }

    #[test]
    fn spanning_examples() {
        let w = Window::cube(2, 20.0).unwrap();
        let p = sample_shifted_lattice(&w, &Metric::Euclidean, RngSpec::new(1, 0)).unwrap();
        let l = build_boolean_model(&p, 2.0).unwrap();
        assert_eq!(count_spanning_clusters(&l, SpanMode::TouchAllFaces), 1);
        let e = plane(vec![], 5.0);
        let l = build_boolean_model(&e, 1.0).unwrap();
        assert_eq!(
            count_spanning_clusters(&l, SpanMode::TouchTwoOpposite { axis: None }),
            0
        );
    }

    #[test]
    fn branch_examples() {
        let row: Vec<Vec<f64>> = (0..21).map(|i| vec![i as f64 - 10.0 + 0.5, 0.25]).collect();
        let w = Window::new_box(vec![[-10.0, 11.0], [-5.0, 5.0]]).unwrap();
        let p = PointPattern::new(w, Metric::Euclidean, row, Label::None).unwrap();
        let l = build_boolean_model(&p, 1.0).unwrap();
        assert_eq!(count_m_branches(&l, &p, &[0.0, 0.0], 3.0).unwrap(), 2);

        let blob = plane(vec![vec![5.0, 5.0], vec![5.5, 5.0]], 10.0);
        let l = build_boolean_model(&blob, 1.0).unwrap();
        assert_eq!(count_m_branches(&l, &blob, &[5.2, 5.0], 3.0).unwrap(), 0);

        let w = Window::cube(2, 40.0).unwrap();
        let p = sample_shifted_lattice(&w, &Metric::Euclidean, RngSpec::new(2, 0)).unwrap();
        let l = build_boolean_model(&p, 2.0).unwrap();
        assert_eq!(count_m_branches(&l, &p, &[20.0, 20.0], 5.0).unwrap(), 1);
    }

    #[test]
    fn csv_and_summary() {
        let rec = PercolationRecord {
            replicate: 0,
            n_points: 3,
            radius: 1.0,
            n_clusters: 2,
            n_spanning: 1,
            m_branches: Some(2),
        };
        let csv = records_to_csv(&[rec]);
        assert_eq!(csv.lines().count(), 2);
        let v: serde_json::Value = serde_json::from_str(&summary_json(&[rec, rec])).unwrap();
        assert_eq!(v["spanning_frequency"]["1"], 1.0);
    }
}
