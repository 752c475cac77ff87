//! Uniform-grid spatial index over box windows, with optional periodic wrap.
//!
//! Nearest-neighbour queries walk Chebyshev rings of cells outward from the
//! query cell and stop as soon as no unvisited cell can beat the current
//! candidates. Membership filters let callers treat removed points as absent
//! without rebuilding the index.

use crate::geometry::Metric;

#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    lo: Vec<f64>,
    cell: Vec<f64>,
    ncells: Vec<usize>,
    periodic: bool,
    /// CSR layout: items of cell `c` are `items[start[c]..start[c + 1]]`.
    start: Vec<usize>,
    items: Vec<u32>,
}

impl Grid {
    /// Indexes the points `coords` (packed, `dim` per point) over `bounds`,
    /// with cells of side roughly `target_cell` (never more than `max_cells` in total).
    pub fn new(
        coords: &[f64],
        dim: usize,
        bounds: &[[f64; 2]],
        target_cell: f64,
        periodic: bool,
    ) -> Self {
        let n = coords.len() / dim;
        let max_cells = (4 * n).max(64);
        let mut target = target_cell.max(1e-12);
        let ncells = loop {
            let nc: Vec<usize> = bounds
                .iter()
                .map(|[a, b]| (((b - a) / target).floor() as usize).max(1))
                .collect();
            if nc.iter().product::<usize>() <= max_cells {
                break nc;
            }
            target *= 1.5;
        };
        let cell: Vec<f64> = bounds
            .iter()
            .zip(&ncells)
            .map(|([a, b], n)| (b - a) / *n as f64)
            .collect();
        let lo: Vec<f64> = bounds.iter().map(|[a, _]| *a).collect();
        let total: usize = ncells.iter().product();
        let mut grid = Self {
            dim,
            lo,
            cell,
            ncells,
            periodic,
            start: vec![0; total + 1],
            items: vec![0; n],
        };
        let cells: Vec<usize> = coords
            .chunks_exact(dim)
            .map(|p| grid.flat(&grid.cell_of(p)))
            .collect();
        for &c in &cells {
            grid.start[c + 1] += 1;
        }
        for c in 0..total {
            grid.start[c + 1] += grid.start[c];
        }
        let mut fill = grid.start.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.items[fill[c]] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    /// Chooses a cell size giving about `per_cell` points per cell.
    pub fn auto(
        coords: &[f64],
        dim: usize,
        bounds: &[[f64; 2]],
        periodic: bool,
        per_cell: f64,
    ) -> Self {
        let n = (coords.len() / dim).max(1) as f64;
        let vol: f64 = bounds.iter().map(|[a, b]| b - a).product();
        let side = (per_cell * vol / n).powf(1.0 / dim as f64);
        Self::new(coords, dim, bounds, side, periodic)
    }

    fn cell_of(&self, p: &[f64]) -> Vec<usize> {
        (0..self.dim)
            .map(|k| {
                let v = ((p[k] - self.lo[k]) / self.cell[k]).floor();
                let n = self.ncells[k] as f64;
                let v = if self.periodic {
                    v.rem_euclid(n)
                } else {
                    v.clamp(0.0, n - 1.0)
                };
                (v as usize).min(self.ncells[k] - 1)
            })
            .collect()
    }

    fn flat(&self, c: &[usize]) -> usize {
        let mut f = 0;
        for k in (0..self.dim).rev() {
            f = f * self.ncells[k] + c[k];
        }
        f
    }

    fn cell_items(&self, c: usize) -> &[u32] {
        &self.items[self.start[c]..self.start[c + 1]]
    }

    /// Offset range per axis. Periodic axes use one representative per residue.
    fn offset_range(&self, k: usize) -> (i64, i64) {
        let n = self.ncells[k] as i64;
        if self.periodic {
            (-((n - 1) / 2), n / 2)
        } else {
            (-(n - 1), n - 1)
        }
    }

    /// Visits every cell at Chebyshev ring `r` around `base` exactly once.
    fn for_ring(&self, base: &[usize], r: i64, mut f: impl FnMut(usize)) {
        let d = self.dim;
        let ranges: Vec<(i64, i64)> = (0..d).map(|k| self.offset_range(k)).collect();
        let mut off = vec![0i64; d];
        // the first axis reaching |o| = r is `j`; axes before it stay strictly inside
        for j in 0..d {
            let sides: &[i64] = if r == 0 { &[0] } else { &[-r, r] };
            for &oj in sides {
                if oj < ranges[j].0 || oj > ranges[j].1 {
                    continue;
                }
                off[j] = oj;
                self.ring_rec(base, r, j, 0, &ranges, &mut off, &mut f);
            }
            if r == 0 {
                break;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn ring_rec(
        &self,
        base: &[usize],
        r: i64,
        j: usize,
        k: usize,
        ranges: &[(i64, i64)],
        off: &mut Vec<i64>,
        f: &mut impl FnMut(usize),
    ) {
        if k == self.dim {
            let mut c = vec![0usize; self.dim];
            for a in 0..self.dim {
                let n = self.ncells[a] as i64;
                let v = base[a] as i64 + off[a];
                if self.periodic {
                    c[a] = v.rem_euclid(n) as usize;
                } else if v < 0 || v >= n {
                    return;
                } else {
                    c[a] = v as usize;
                }
            }
            f(self.flat(&c));
            return;
        }
        if k == j {
            return self.ring_rec(base, r, j, k + 1, ranges, off, f);
        }
        let lim = if k < j { r - 1 } else { r };
        let lo = (-lim).max(ranges[k].0);
        let hi = lim.min(ranges[k].1);
        for o in lo..=hi {
            off[k] = o;
            self.ring_rec(base, r, j, k + 1, ranges, off, f);
        }
        off[k] = 0;
    }

    fn max_ring(&self) -> i64 {
        (0..self.dim)
            .map(|k| {
                let (lo, hi) = self.offset_range(k);
                lo.abs().max(hi)
            })
            .max()
            .unwrap_or(0)
    }

    /// The (up to) two nearest indexed points to `query` among those accepted by
    /// `keep`, sorted by distance.
    pub fn nearest_two(
        &self,
        coords: &[f64],
        metric: &Metric,
        query: &[f64],
        keep: impl FnMut(usize) -> bool,
    ) -> [Option<(usize, f64)>; 2] {
        self.nearest_k(coords, metric, query, keep, 2)
    }

    /// Nearest accepted point only; the second slot is filled opportunistically.
    pub fn nearest(
        &self,
        coords: &[f64],
        metric: &Metric,
        query: &[f64],
        keep: impl FnMut(usize) -> bool,
    ) -> Option<(usize, f64)> {
        self.nearest_k(coords, metric, query, keep, 1)[0]
    }

    fn nearest_k(
        &self,
        coords: &[f64],
        metric: &Metric,
        query: &[f64],
        mut keep: impl FnMut(usize) -> bool,
        want: usize,
    ) -> [Option<(usize, f64)>; 2] {
        let base = self.cell_of(query);
        let min_cell = self.cell.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut best: [Option<(usize, f64)>; 2] = [None, None];
        let max_r = self.max_ring();
        for r in 0..=max_r {
            self.for_ring(&base, r, |c| {
                for &i in self.cell_items(c) {
                    let i = i as usize;
                    if !keep(i) {
                        continue;
                    }
                    let d = metric.dist(query, &coords[i * self.dim..(i + 1) * self.dim]);
                    match best {
                        [None, _] => best[0] = Some((i, d)),
                        [Some((_, d0)), _] if d < d0 => {
                            best[1] = best[0];
                            best[0] = Some((i, d));
                        }
                        [_, None] => best[1] = Some((i, d)),
                        [_, Some((_, d1))] if d < d1 => best[1] = Some((i, d)),
                        _ => {}
                    }
                }
            });
            if let Some((_, d1)) = best[want - 1] {
                if d1 <= r as f64 * min_cell {
                    break;
                }
            }
        }
        best
    }

    /// Calls `f(i)` for every indexed point whose cell lies within `radius` (per
    /// axis) of the query cell; callers filter by exact distance.
    pub fn candidates_within(&self, query: &[f64], radius: f64, mut f: impl FnMut(usize)) {
        let base = self.cell_of(query);
        let reach: Vec<i64> = self
            .cell
            .iter()
            .map(|c| (radius / c).ceil() as i64)
            .collect();
        let mut off = vec![0i64; self.dim];
        let mut lo = vec![0i64; self.dim];
        let mut hi = vec![0i64; self.dim];
        for k in 0..self.dim {
            let (a, b) = self.offset_range(k);
            lo[k] = (-reach[k]).max(a);
            hi[k] = reach[k].min(b);
            off[k] = lo[k];
        }
        loop {
            let mut inside = true;
            let mut c = vec![0usize; self.dim];
            for k in 0..self.dim {
                let n = self.ncells[k] as i64;
                let v = base[k] as i64 + off[k];
                if self.periodic {
                    c[k] = v.rem_euclid(n) as usize;
                } else if v < 0 || v >= n {
                    inside = false;
                    break;
                } else {
                    c[k] = v as usize;
                }
            }
            if inside {
                for &i in self.cell_items(self.flat(&c)) {
                    f(i as usize);
                }
            }
            let mut k = 0;
            loop {
                if k == self.dim {
                    return;
                }
                off[k] += 1;
                if off[k] <= hi[k] {
                    break;
                }
                off[k] = lo[k];
                k += 1;
            }
        }
    }
}
