//! Insertion, deletion, restriction and superposition of patterns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::PointPattern;
use crate::region::Region;
use crate::rng::RngSpec;

/// Attempts per inserted point before a collision is reported.
pub const MAX_RESAMPLE: usize = 100;

/// Adds `count` i.i.d. uniform points of `region` to `pattern`.
pub fn insert_uniform(
    pattern: &PointPattern,
    region: &Region,
    count: usize,
    rng: RngSpec,
) -> Result<PointPattern> {
    if count == 0 {
        return Ok(pattern.clone());
    }
    if region.dimension() != pattern.dimension() {
        return Err(Error::DimensionMismatch {
            expected: pattern.dimension(),
            got: region.dimension(),
        });
    }
    if !region.inside(pattern.window()) {
        return Err(Error::InvalidRegion(
            "region is not inside the window".into(),
        ));
    }
    if region.measure().value <= 0.0 {
        return Err(Error::InvalidRegion("region has zero measure".into()));
    }
    let mut r = rng.rng();
    let mut coords = pattern.coords().to_vec();
    let mut added: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..MAX_RESAMPLE {
            let x = region.sample_uniform(&mut r)?;
            let clash = pattern.find(&x).is_some() || added.contains(&x);
            if !clash && pattern.window().contains(&x) {
                added.push(x);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Collision(MAX_RESAMPLE));
        }
    }
    for a in &added {
        coords.extend_from_slice(a);
    }
    PointPattern::from_flat(
        pattern.window().clone(),
        pattern.metric().clone(),
        coords,
        pattern.label(),
    )
}

/// Which points [`delete_points`] removes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PointSelector {
    /// Explicit indices into the pattern's canonical order.
    Indices { indices: Vec<usize> },
    /// The point nearest to the coordinate origin.
    NearestToOrigin,
    /// d = 1 only. If the first unit interval `[i, i+1)`, `i >= 0`, holding any
    /// point holds exactly two, the one closer to the origin; otherwise the
    /// nearest point left of the origin.
    FirstInterval,
}

/// Indices picked by a selector (canonical order, deduplicated).
pub fn select(pattern: &PointPattern, selector: &PointSelector) -> Result<Vec<usize>> {
    match selector {
        PointSelector::Indices { indices } => {
            let mut v = indices.clone();
            v.sort_unstable();
            v.dedup();
            if let Some(&bad) = v.iter().find(|&&i| i >= pattern.len()) {
                return Err(Error::InvalidParameter(format!("index {bad} out of range")));
            }
            Ok(v)
        }
        PointSelector::NearestToOrigin => {
            let origin = vec![0.0; pattern.dimension()];
            let metric = pattern.metric();
            (0..pattern.len())
                .map(|i| (i, metric.dist(pattern.point(i), &origin)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| vec![i])
                .ok_or_else(|| {
                    Error::EmptySelection("nearest-to-origin on an empty pattern".into())
                })
        }
        PointSelector::FirstInterval => {
            if pattern.dimension() != 1 {
                return Err(Error::InvalidParameter(
                    "first-interval selector is one-dimensional".into(),
                ));
            }
            // canonical order is ascending in d = 1
            let xs: Vec<f64> = pattern.points().map(|p| p[0]).collect();
            let first_right = xs.iter().position(|&x| x >= 0.0);
            if let Some(k) = first_right {
                let cell = xs[k].floor();
                let in_cell = xs[k..].iter().take_while(|&&x| x < cell + 1.0).count();
                if in_cell == 2 {
                    return Ok(vec![k]);
                }
            }
            let left_end = first_right.unwrap_or(xs.len());
            if left_end == 0 {
                return Err(Error::EmptySelection("no point left of the origin".into()));
            }
            Ok(vec![left_end - 1])
        }
    }
}

/// Removes the selected points.
pub fn delete_points(pattern: &PointPattern, selector: &PointSelector) -> Result<PointPattern> {
    let chosen = select(pattern, selector)?;
    let mut drop = vec![false; pattern.len()];
    for i in chosen {
        drop[i] = true;
    }
    let mut coords = Vec::with_capacity(pattern.coords().len());
    for (i, p) in pattern.points().enumerate() {
        if !drop[i] {
            coords.extend_from_slice(p);
        }
    }
    PointPattern::from_flat(
        pattern.window().clone(),
        pattern.metric().clone(),
        coords,
        pattern.label(),
    )
}

/// Keeps the points inside `region`, or outside it when `complement` is set.
pub fn restrict(pattern: &PointPattern, region: &Region, complement: bool) -> Result<PointPattern> {
    region.validate()?;
    if region.dimension() != pattern.dimension() {
        return Err(Error::DimensionMismatch {
            expected: pattern.dimension(),
            got: region.dimension(),
        });
    }
    let mut coords = Vec::new();
    for p in pattern.points() {
        if region.contains(p) != complement {
            coords.extend_from_slice(p);
        }
    }
    PointPattern::from_flat(
        pattern.window().clone(),
        pattern.metric().clone(),
        coords,
        pattern.label(),
    )
}

/// Union of two patterns on the same window and metric with disjoint supports.
pub fn superpose(a: &PointPattern, b: &PointPattern) -> Result<PointPattern> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    if a.window() != b.window() || a.metric() != b.metric() {
        return Err(Error::Incompatible("windows or metrics differ".into()));
    }
    if let Some(p) = b.points().find(|p| a.find(p).is_some()) {
        return Err(Error::NotSimple(p.to_vec()));
    }
    let mut coords = a.coords().to_vec();
    coords.extend_from_slice(b.coords());
    let label = if a.label() == b.label() {
        a.label()
    } else {
        crate::pattern::Label::None
    };
    PointPattern::from_flat(a.window().clone(), a.metric().clone(), coords, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Metric, Window};
    use crate::pattern::Label;
    use proptest::prelude::*;
    use rand::Rng;

    fn pat1(xs: &[f64], window: [f64; 2]) -> PointPattern {
        let w = Window::new_box(vec![window]).unwrap();
        PointPattern::new(
            w,
            Metric::Euclidean,
            xs.iter().map(|&x| vec![x]).collect(),
            Label::None,
        )
        .unwrap()
    }

    #[test]
    fn insert_zero_is_identity() {
        let p = pat1(&[0.1, 0.7], [0.0, 1.0]);
        let r = Region::from_box(vec![[0.0, 1.0]]).unwrap();
        assert_eq!(insert_uniform(&p, &r, 0, RngSpec::new(1, 0)).unwrap(), p);
    }

    #[test]
    fn insert_into_empty() {
        let w = Window::cube(2, 1.0).unwrap();
        let p = PointPattern::empty(w.clone(), Metric::Euclidean, Label::None).unwrap();
        let r = Region::from_window(&w).unwrap();
        let q = insert_uniform(&p, &r, 3, RngSpec::new(9, 2)).unwrap();
        assert_eq!(q.len(), 3);
        assert!(q.points().all(|x| r.contains(x)));
        assert!(p.is_empty());
    }

    #[test]
    fn insert_errors() {
        let p = pat1(&[0.5], [0.0, 1.0]);
        let flat = Region::from_box(vec![[0.2, 0.2]]).unwrap();
        assert!(matches!(
            insert_uniform(&p, &flat, 1, RngSpec::new(0, 0)),
            Err(Error::InvalidRegion(_))
        ));
        let outside = Region::from_box(vec![[2.0, 3.0]]).unwrap();
        assert!(matches!(
            insert_uniform(&p, &outside, 1, RngSpec::new(0, 0)),
            Err(Error::InvalidRegion(_))
        ));
    }

    #[test]
    fn insert_mean_is_uniform() {
        // mean of 10^4 uniform points on [0,1] over 20 seeds: each mean has SE 1/sqrt(12e4)
        let p = pat1(&[], [0.0, 1.0]);
        let r = Region::from_box(vec![[0.0, 1.0]]).unwrap();
        let se = (1.0 / 12.0 / 1e4f64).sqrt();
        for seed in 0..20 {
            let q = insert_uniform(&p, &r, 10_000, RngSpec::new(seed, 0)).unwrap();
            let m = q.points().map(|x| x[0]).sum::<f64>() / q.len() as f64;
            assert!((m - 0.5).abs() < 4.0 * se, "seed {seed}: mean {m}");
        }
    }

    #[test]
    fn delete_explicit_empty() {
        let p = pat1(&[0.1, 0.7], [0.0, 1.0]);
        assert_eq!(
            delete_points(&p, &PointSelector::Indices { indices: vec![] }).unwrap(),
            p
        );
    }

    #[test]
    fn delete_nearest_to_origin() {
        let w = Window::new_box(vec![[-5.0, 5.0], [-5.0, 5.0]]).unwrap();
        let p = PointPattern::new(
            w,
            Metric::Euclidean,
            vec![vec![1.0, 0.0], vec![-3.0, 0.0]],
            Label::None,
        )
        .unwrap();
        let q = delete_points(&p, &PointSelector::NearestToOrigin).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.point(0), &[-3.0, 0.0]);
        let e = PointPattern::empty(p.window().clone(), Metric::Euclidean, Label::None).unwrap();
        assert!(matches!(
            delete_points(&e, &PointSelector::NearestToOrigin),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn first_interval_rule() {
        // two points in [2,3), none in [0,2): remove the one closer to 0
        let p = pat1(&[-1.5, 2.7, 2.2, 5.5], [-10.0, 10.0]);
        let q = delete_points(&p, &PointSelector::FirstInterval).unwrap();
        let xs: Vec<f64> = q.points().map(|x| x[0]).collect();
        assert_eq!(xs, vec![-1.5, 2.7, 5.5]);
        // one point in the first occupied interval: remove the nearest point left of 0
        let p = pat1(&[-4.0, -1.5, 2.2, 5.5], [-10.0, 10.0]);
        let q = delete_points(&p, &PointSelector::FirstInterval).unwrap();
        let xs: Vec<f64> = q.points().map(|x| x[0]).collect();
        assert_eq!(xs, vec![-4.0, 2.2, 5.5]);
        // three points in the interval behave like "otherwise"
        let p = pat1(&[-0.5, 0.1, 0.2, 0.3], [-10.0, 10.0]);
        let q = delete_points(&p, &PointSelector::FirstInterval).unwrap();
        assert_eq!(q.point(0), &[0.1]);
    }

    #[test]
    fn restrict_whole_window() {
        let p = pat1(&[0.1, 0.7], [0.0, 1.0]);
        let r = Region::from_window(p.window()).unwrap();
        assert_eq!(restrict(&p, &r, false).unwrap(), p);
        assert!(restrict(&p, &r, true).unwrap().is_empty());
    }

    #[test]
    fn counter_example_pipeline() {
        // lattice restricted to the complement of the union of radius-5 balls around Poisson points
        let w = Window::cube(1, 200.0).unwrap();
        let lattice =
            crate::generators::sample_shifted_lattice(&w, &Metric::Euclidean, RngSpec::new(3, 0))
                .unwrap();
        let poisson =
            crate::generators::sample_poisson(0.05, &w, &Metric::Euclidean, RngSpec::new(3, 1))
                .unwrap();
        let balls = Region::new(
            poisson
                .points()
                .map(|x| crate::region::Shape::Ball {
                    center: x.to_vec(),
                    radius: 5.0,
                })
                .collect(),
        )
        .unwrap();
        let kept = restrict(&lattice, &balls, true).unwrap();
        assert!(!kept.is_empty() && kept.len() < lattice.len());
        for x in kept.points() {
            for y in poisson.points() {
                assert!((x[0] - y[0]).abs() >= 5.0);
            }
        }
    }

    #[test]
    fn superpose_cases() {
        let a = pat1(&[0.0], [0.0, 1.0]);
        let b = pat1(&[1.0], [0.0, 1.0]);
        let e = pat1(&[], [0.0, 1.0]);
        assert_eq!(superpose(&a, &e).unwrap(), a);
        assert_eq!(superpose(&a, &b).unwrap(), pat1(&[0.0, 1.0], [0.0, 1.0]));
        assert!(matches!(superpose(&a, &a), Err(Error::NotSimple(_))));
        let other = pat1(&[0.5], [0.0, 2.0]);
        assert!(matches!(superpose(&a, &other), Err(Error::Incompatible(_))));
    }

    #[test]
    fn superpose_poisson_and_lattice() {
        let w = Window::cube(2, 20.0).unwrap();
        let p = crate::generators::sample_poisson(1.0, &w, &Metric::Euclidean, RngSpec::new(5, 0))
            .unwrap();
        let l =
            crate::generators::sample_shifted_lattice(&w, &Metric::Euclidean, RngSpec::new(5, 1))
                .unwrap();
        assert_eq!(superpose(&p, &l).unwrap().len(), p.len() + l.len());
    }

    proptest! {
        #[test]
        fn restrict_partitions(seed in 0u64..1000, lo in 0.0..5.0f64, width in 0.1..5.0f64) {
            let w = Window::cube(2, 10.0).unwrap();
            let mut r = RngSpec::new(seed, 0).rng();
            let pts: Vec<Vec<f64>> = (0..30).map(|_| vec![10.0 * r.random::<f64>(), 10.0 * r.random::<f64>()]).collect();
            let p = PointPattern::new(w, Metric::Euclidean, pts, Label::None).unwrap();
            let snapshot = p.clone();
            let reg = Region::new(vec![
                crate::region::Shape::Box { bounds: vec![[lo, lo + width], [0.0, 10.0]] },
                crate::region::Shape::Ball { center: vec![7.0, 7.0], radius: width },
            ]).unwrap();
            let inside = restrict(&p, &reg, false).unwrap();
            let outside = restrict(&p, &reg, true).unwrap();
            prop_assert_eq!(inside.len() + outside.len(), p.len());
            prop_assert_eq!(superpose(&inside, &outside).unwrap(), p.clone());
            prop_assert_eq!(p, snapshot);
        }
    }
}
