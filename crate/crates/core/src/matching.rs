//! Stable matching by iterated removal of mutually-closest pairs.
//!
//! One-colour mode matches points of a single pattern among themselves;
//! two-colour mode matches red points to blue points only. Each point
//! prefers nearer partners, and a matching is stable when no two points
//! would both rather be matched to each other.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Metric, Window};
use crate::pattern::{fmt_num, PointPattern};
use crate::spatial::Grid;
use crate::stats::Summary;

/// Relative tolerance under which two distances count as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;
pub const MAX_CHAIN: usize = 64;
/// Out-degree of the neighbour graph searched for descending chains.
pub const CHAIN_NEIGHBORS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    OneColour,
    TwoColour,
}

/// A partial matching.
///
/// One-colour: `pairs` hold two indices into the same pattern, smaller first,
/// and `partner` is indexed by that pattern. Two-colour: each pair is
/// `(red, blue)`; `partner` is indexed by red and `blue_partner` by blue.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub mode: MatchMode,
    pub pairs: Vec<(usize, usize)>,
    pub partner: Vec<Option<usize>>,
    pub blue_partner: Vec<Option<usize>>,
    /// Match distance per red (or only) point, infinite when unmatched.
    pub distance: Vec<f64>,
    pub blue_distance: Vec<f64>,
    pub metric: Metric,
}

impl Matching {
    /// One-colour matching from explicit pairs over `pattern`.
    pub fn from_pairs(pattern: &PointPattern, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = pattern.len();
        let mut partner = vec![None; n];
        let mut distance = vec![f64::INFINITY; n];
        let mut out = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a >= n || b >= n || a == b || partner[a].is_some() || partner[b].is_some() {
                return Err(Error::InvalidParameter(format!("pair ({a}, {b}) invalid")));
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
            let d = pattern.dist(a, b);
            distance[a] = d;
            distance[b] = d;
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        Ok(Self {
            mode: MatchMode::OneColour,
            pairs: out,
            partner,
            blue_partner: Vec::new(),
            distance,
            blue_distance: Vec::new(),
            metric: pattern.metric().clone(),
        })
    }

    /// Two-colour matching from explicit `(red, blue)` pairs.
    pub fn from_pairs_two(
        red: &PointPattern,
        blue: &PointPattern,
        pairs: &[(usize, usize)],
    ) -> Result<Self> {
        let metric = red.metric().clone();
        let mut partner = vec![None; red.len()];
        let mut blue_partner = vec![None; blue.len()];
        let mut distance = vec![f64::INFINITY; red.len()];
        let mut blue_distance = vec![f64::INFINITY; blue.len()];
        for &(r, b) in pairs {
            if r >= red.len()
                || b >= blue.len()
                || partner[r].is_some()
                || blue_partner[b].is_some()
            {
                return Err(Error::InvalidParameter(format!("pair ({r}, {b}) invalid")));
            }
            partner[r] = Some(b);
            blue_partner[b] = Some(r);
            let d = metric.dist(red.point(r), blue.point(b));
            distance[r] = d;
            blue_distance[b] = d;
        }
        let mut pairs = pairs.to_vec();
        pairs.sort_unstable();
        Ok(Self {
            mode: MatchMode::TwoColour,
            pairs,
            partner,
            blue_partner,
            distance,
            blue_distance,
            metric,
        })
    }

    /// Unmatched indices of the red (or only) pattern.
    pub fn unmatched(&self) -> Vec<usize> {
        (0..self.partner.len())
            .filter(|&i| self.partner[i].is_none())
            .collect()
    }

    pub fn unmatched_blue(&self) -> Vec<usize> {
        (0..self.blue_partner.len())
            .filter(|&i| self.blue_partner[i].is_none())
            .collect()
    }

    /// `{mode, pairs, unmatched}`; two-colour output adds `unmatched_blue`.
    pub fn to_json(&self) -> String {
        let mut doc = serde_json::json!({
            "mode": self.mode,
            "pairs": self.pairs.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
            "unmatched": self.unmatched(),
        });
        if self.mode == MatchMode::TwoColour {
            doc["unmatched_blue"] = serde_json::json!(self.unmatched_blue());
        }
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Nearest-neighbour lookups over one pattern, grid-backed where a grid applies.
struct Index<'a> {
    coords: &'a [f64],
    dim: usize,
    metric: &'a Metric,
    grid: Option<Grid>,
}

impl<'a> Index<'a> {
    fn new(p: &'a PointPattern, metric: &'a Metric) -> Self {
        let grid = match (p.window(), metric) {
            (_, Metric::HyperbolicDisc) => None,
            _ if p.len() < 32 => None,
            (w @ Window::Box { .. }, m) => Some(Grid::auto(
                p.coords(),
                p.dimension(),
                &w.bounding_box(),
                m.is_toroidal(),
                2.0,
            )),
            _ => None,
        };
        Self {
            coords: p.coords(),
            dim: p.dimension(),
            metric,
            grid,
        }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn nearest_two(&self, q: &[f64], keep: impl Fn(usize) -> bool) -> [Option<(usize, f64)>; 2] {
        if let Some(g) = &self.grid {
            return g.nearest_two(self.coords, self.metric, q, keep);
        }
        let mut best: [Option<(usize, f64)>; 2] = [None, None];
        for i in 0..self.coords.len() / self.dim {
            if !keep(i) {
                continue;
            }
            let d = self.metric.dist(q, self.point(i));
            if best[0].is_none_or(|(_, b)| d < b) {
                best[1] = best[0];
                best[0] = Some((i, d));
            } else if best[1].is_none_or(|(_, b)| d < b) {
                best[1] = Some((i, d));
            }
        }
        best
    }
}

fn is_tie(d: f64, second: Option<(usize, f64)>) -> Result<()> {
    match second {
        Some((_, d2)) if d2 <= d * (1.0 + TIE_TOLERANCE) => Err(Error::Tie(d, d2)),
        _ => Ok(()),
    }
}

fn check_compatible(a: &PointPattern, metric: &Metric) -> Result<()> {
    if let Metric::Toroidal { periods } = metric {
        if periods.len() != a.dimension() {
            return Err(Error::DimensionMismatch {
                expected: a.dimension(),
                got: periods.len(),
            });
        }
    }
    if matches!(metric, Metric::HyperbolicDisc) && a.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: a.dimension(),
        });
    }
    Ok(())
}

/// The stable matching of `red` alone (one-colour) or of `red` against `blue`
/// (two-colour), found by repeatedly matching the globally closest available
/// pair, which is always mutually closest.
///
/// Fails with [`Error::Tie`] if, when a pair is matched, either member has
/// another available candidate at the same distance within [`TIE_TOLERANCE`].
pub fn stable_match(
    red: &PointPattern,
    blue: Option<&PointPattern>,
    metric: &Metric,
) -> Result<Matching> {
    check_compatible(red, metric)?;
    match blue {
        None => one_colour(red, metric),
        Some(b) => {
            if b.dimension() != red.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: red.dimension(),
                    got: b.dimension(),
                });
            }
            two_colour(red, b, metric)
        }
    }
}

fn one_colour(p: &PointPattern, metric: &Metric) -> Result<Matching> {
    let n = p.len();
    let idx = Index::new(p, metric);
    let mut alive = vec![true; n];
    let mut heap = BinaryHeap::new();
    for i in 0..n {
        if let Some((j, d)) = idx.nearest_two(p.point(i), |k| k != i)[0] {
            heap.push(Reverse((Key(d), i, j)));
        }
    }
    let mut pairs = Vec::new();
    // every live point keeps an entry whose key is at most its current
    // nearest-neighbour distance, so a popped entry with both ends alive is a
    // global minimum over live pairs
    while let Some(Reverse((Key(d), i, j))) = heap.pop() {
        if !alive[i] {
            continue;
        }
        if !alive[j] {
            if let Some((k, dk)) = idx.nearest_two(p.point(i), |k| k != i && alive[k])[0] {
                heap.push(Reverse((Key(dk), i, k)));
            }
            continue;
        }
        is_tie(d, idx.nearest_two(p.point(i), |k| k != i && alive[k])[1])?;
        is_tie(d, idx.nearest_two(p.point(j), |k| k != j && alive[k])[1])?;
        alive[i] = false;
        alive[j] = false;
        pairs.push((i, j));
    }
    Matching::from_pairs(p, &pairs).map(|mut m| {
        m.metric = metric.clone();
        m
    })
}

fn two_colour(red: &PointPattern, blue: &PointPattern, metric: &Metric) -> Result<Matching> {
    let ri = Index::new(red, metric);
    let bi = Index::new(blue, metric);
    let mut red_alive = vec![true; red.len()];
    let mut blue_alive = vec![true; blue.len()];
    let mut heap = BinaryHeap::new();
    for i in 0..red.len() {
        if let Some((j, d)) = bi.nearest_two(red.point(i), |_| true)[0] {
            heap.push(Reverse((Key(d), i, j)));
        }
    }
    let mut pairs = Vec::new();
    while let Some(Reverse((Key(d), i, j))) = heap.pop() {
        if !red_alive[i] {
            continue;
        }
        if !blue_alive[j] {
            if let Some((k, dk)) = bi.nearest_two(red.point(i), |k| blue_alive[k])[0] {
                heap.push(Reverse((Key(dk), i, k)));
            }
            continue;
        }
        is_tie(d, bi.nearest_two(red.point(i), |k| blue_alive[k])[1])?;
        is_tie(d, ri.nearest_two(blue.point(j), |k| red_alive[k])[1])?;
        red_alive[i] = false;
        blue_alive[j] = false;
        pairs.push((i, j));
    }
    let mut m = Matching::from_pairs_two(red, blue, &pairs)?;
    m.metric = metric.clone();
    Ok(m)
}

/// Result of an exhaustive stability scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stability {
    pub stable: bool,
    /// First violating pair found, `(red, blue)` in two-colour mode.
    pub violation: Option<(usize, usize)>,
}

/// Checks that no two points (of opposite colours in two-colour mode) are
/// strictly closer to each other than both are to their partners.
pub fn verify_stability(
    m: &Matching,
    red: &PointPattern,
    blue: Option<&PointPattern>,
) -> Stability {
    let metric = &m.metric;
    match (m.mode, blue) {
        (MatchMode::TwoColour, Some(blue)) => {
            for x in 0..red.len() {
                for y in 0..blue.len() {
                    let d = metric.dist(red.point(x), blue.point(y));
                    if d < m.distance[x].min(m.blue_distance[y]) {
                        return Stability {
                            stable: false,
                            violation: Some((x, y)),
                        };
                    }
                }
            }
        }
        _ => {
            for x in 0..red.len() {
                for y in x + 1..red.len() {
                    let d = metric.dist(red.point(x), red.point(y));
                    if d < m.distance[x].min(m.distance[y]) {
                        return Stability {
                            stable: false,
                            violation: Some((x, y)),
                        };
                    }
                }
            }
        }
    }
    Stability {
        stable: true,
        violation: None,
    }
}

/// Whether all pairwise distances differ by more than `tol` relative.
pub fn check_non_equidistant(p: &PointPattern, tol: f64) -> bool {
    let n = p.len();
    let mut ds = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            ds.push(p.dist(i, j));
        }
    }
    ds.sort_by(f64::total_cmp);
    ds.windows(2).all(|w| w[1] - w[0] > tol * w[1])
}

/// Longest chain `x_0, x_1, ...` with strictly decreasing step lengths, where
/// each step goes to one of the [`CHAIN_NEIGHBORS`] nearest neighbours of the
/// current point. Capped at `max_len`.
pub fn check_descending_chain(p: &PointPattern, max_len: usize) -> Result<usize> {
    check_descending_chain_with(p, max_len, CHAIN_NEIGHBORS)
}

pub fn check_descending_chain_with(
    p: &PointPattern,
    max_len: usize,
    neighbors: usize,
) -> Result<usize> {
    if max_len > MAX_CHAIN {
        return Err(Error::InvalidParameter(format!(
            "chain length {max_len} above {MAX_CHAIN}"
        )));
    }
    let n = p.len();
    if n == 0 {
        return Ok(0);
    }
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * neighbors);
    for u in 0..n {
        let mut near: Vec<(f64, usize)> = (0..n)
            .filter(|&v| v != u)
            .map(|v| (p.dist(u, v), v))
            .collect();
        let k = neighbors.min(near.len());
        if k == 0 {
            continue;
        }
        near.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
        edges.extend(near[..k].iter().map(|&(d, v)| (d, u, v)));
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    // g[u]: most points on a chain starting at u using only edges processed so far
    let mut g = vec![1usize; n];
    let mut s = 0;
    while s < edges.len() {
        let mut e = s;
        while e < edges.len() && edges[e].0 == edges[s].0 {
            e += 1;
        }
        let updates: Vec<(usize, usize)> =
            edges[s..e].iter().map(|&(_, u, v)| (u, g[v] + 1)).collect();
        for (u, val) in updates {
            g[u] = g[u].max(val);
        }
        s = e;
    }
    Ok(g.into_iter().max().unwrap_or(0).min(max_len))
}

/// Points whose match distance exceeds their distance to `center` minus `epsilon`.
pub fn compute_h(p: &PointPattern, m: &Matching, epsilon: f64, center: &[f64]) -> Vec<usize> {
    (0..p.len())
        .filter(|&i| m.distance[i] > m.metric.dist(p.point(i), center) - epsilon)
        .collect()
}

/// Points, other than one located at `y`, that would prefer `y` to their partner.
pub fn compute_n(p: &PointPattern, m: &Matching, y: &[f64]) -> Vec<usize> {
    (0..p.len())
        .filter(|&i| p.point(i) != y && m.distance[i] > m.metric.dist(p.point(i), y))
        .collect()
}

/// Empirical distribution of match distances over retained matched points.
#[derive(Debug, Clone, PartialEq)]
pub struct PalmMatchStats {
    pub dimension: usize,
    /// Sorted match distances of the retained points.
    pub distances: Vec<f64>,
    pub mean: f64,
    pub mean_se: f64,
    /// `E*[X^d]` and its standard error.
    pub moment_d: f64,
    pub moment_d_se: f64,
    /// `(r, P(X > r))` on a doubling grid of radii.
    pub tail: Vec<(f64, f64)>,
}

impl PalmMatchStats {
    pub fn n(&self) -> usize {
        self.distances.len()
    }

    /// `F(r)`: fraction of retained distances at most `r`.
    pub fn cdf(&self, r: f64) -> f64 {
        self.distances.partition_point(|&x| x <= r) as f64 / self.n() as f64
    }

    /// `r,F,count` at every distinct observed distance.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,F,count\n");
        let n = self.n();
        for (i, &r) in self.distances.iter().enumerate() {
            if i + 1 < n && self.distances[i + 1] == r {
                continue;
            }
            let _ = writeln!(
                s,
                "{},{},{}",
                fmt_num(r),
                fmt_num((i + 1) as f64 / n as f64),
                i + 1
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "n": self.n(),
            "mean": self.mean,
            "mean_se": self.mean_se,
            "moment_d": self.moment_d,
            "moment_d_se": self.moment_d_se,
            "tail": self.tail.iter().map(|&(r, p)| [r, p]).collect::<Vec<_>>(),
        });
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }
}

/// Match-distance statistics of the red (or only) pattern. On a euclidean
/// window, points within `boundary_margin` of the boundary are dropped; on a
/// torus every point is kept.
pub fn match_stats(m: &Matching, p: &PointPattern, boundary_margin: f64) -> Result<PalmMatchStats> {
    if !(boundary_margin >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "boundary margin {boundary_margin}"
        )));
    }
    let torus = m.metric.is_toroidal();
    let distances: Vec<f64> = (0..p.len())
        .filter(|&i| m.distance[i].is_finite())
        .filter(|&i| torus || p.window().distance_to_boundary(p.point(i)) >= boundary_margin)
        .map(|i| m.distance[i])
        .collect();
    PalmMatchStats::from_distances(p.dimension(), distances)
}

impl PalmMatchStats {
    /// Statistics of an arbitrary sample of match distances, for instance the
    /// pooled distances of several replicates.
    pub fn from_distances(dimension: usize, mut distances: Vec<f64>) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::EmptySelection(
                "no matched point left after boundary exclusion".into(),
            ));
        }
        distances.sort_by(f64::total_cmp);
        let first = Summary::of(&distances);
        let powd: Vec<f64> = distances.iter().map(|x| x.powi(dimension as i32)).collect();
        let moment = Summary::of(&powd);
        let n = distances.len() as f64;
        let max = *distances.last().expect("nonempty");
        let mut tail = Vec::new();
        let mut r = 1.0 / 16.0;
        while r <= 2.0 * max.max(1.0) {
            let above = distances.len() - distances.partition_point(|&x| x <= r);
            tail.push((r, above as f64 / n));
            r *= 2.0;
        }
        Ok(PalmMatchStats {
            dimension,
            mean: first.mean,
            mean_se: first.se_mean(),
            moment_d: moment.mean,
            moment_d_se: moment.se_mean(),
            tail,
            distances,
        })
    }

    /// `r,tail` on the doubling grid.
    pub fn tail_csv(&self) -> String {
        let mut s = String::from("r,tail\n");
        for &(r, t) in &self.tail {
            let _ = writeln!(s, "{},{}", fmt_num(r), fmt_num(t));
        }
        s
    }
}
