//! Hutchinson operator `F[A] = ∪ f_i[A]` on finite point sets and
//! deterministic attractor iteration.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::Ifs;
use crate::space::{hausdorff_with, Distance, FinitePointSet, Point};

pub const DEFAULT_SNAP: f64 = 1e-6;
pub const DEFAULT_SIZE_CAP: usize = 1_000_000;

/// Union of the images of `set` under every map, in map-major order.
///
/// With `snap > 0` coordinates are rounded to the nearest multiple of
/// `snap` (then clamped to the box) before deduplication; `snap = 0` keeps
/// exact coordinates.
pub fn hutchinson_apply(ifs: &Ifs, set: &FinitePointSet, snap: f64) -> Result<FinitePointSet> {
    if !(snap.is_finite() && snap >= 0.0) {
        return Err(Error::Params(format!(
            "snap must be finite and nonnegative, got {snap}"
        )));
    }
    let domain = ifs.domain();
    set.check_inside(domain)?;
    let images: Vec<Vec<Point>> = (0..ifs.len())
        .into_par_iter()
        .map(|i| {
            set.iter()
                .map(|p| {
                    let mut q = ifs.eval_map(i, p)?.into_coords();
                    if snap > 0.0 {
                        for c in q.iter_mut() {
                            *c = (*c / snap).round() * snap;
                        }
                        domain.clamp_in_place(&mut q);
                    }
                    Point::new(q)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    FinitePointSet::new(images.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    /// Transition `A_step → A_{step+1}`.
    pub step: usize,
    /// `|A_{step+1}|`.
    pub size: usize,
    /// `d_H(A_step, A_{step+1})` under each logged metric, in order.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    pub snap: f64,
    pub initial_size: usize,
    pub metrics: Vec<String>,
    pub steps: Vec<StepRecord>,
    /// Iteration stopped because the next set would exceed the size cap.
    pub capped: bool,
}

/// A distance oracle with a label for the log.
pub struct LoggedMetric<'a> {
    pub name: String,
    pub metric: &'a dyn Distance,
}

impl<'a> LoggedMetric<'a> {
    pub fn new(name: impl Into<String>, metric: &'a dyn Distance) -> Self {
        LoggedMetric {
            name: name.into(),
            metric,
        }
    }
}

/// Applies the Hutchinson operator `steps` times from `initial`, logging the
/// Hausdorff distance between consecutive sets under every metric. Stops
/// early, keeping the last accepted set, if a set would exceed `size_cap`.
pub fn attractor_iterate(
    ifs: &Ifs,
    initial: &FinitePointSet,
    steps: usize,
    snap: f64,
    metrics: &[LoggedMetric<'_>],
    size_cap: usize,
) -> Result<(FinitePointSet, IterationLog)> {
    if steps == 0 {
        return Err(Error::Params("steps must be at least 1".into()));
    }
    let mut log = IterationLog {
        snap,
        initial_size: initial.len(),
        metrics: metrics.iter().map(|m| m.name.clone()).collect(),
        steps: Vec::with_capacity(steps),
        capped: false,
    };
    let mut current = initial.clone();
    for step in 0..steps {
        let next = hutchinson_apply(ifs, &current, snap)?;
        if next.len() > size_cap {
            log.capped = true;
            break;
        }
        push_step(&mut log, step, &current, &next, metrics)?;
        current = next;
    }
    Ok((current, log))
}

fn push_step(
    log: &mut IterationLog,
    step: usize,
    current: &FinitePointSet,
    next: &FinitePointSet,
    metrics: &[LoggedMetric<'_>],
) -> Result<()> {
    let distances = metrics
        .iter()
        .map(|m| hausdorff_with(m.metric, current, next))
        .collect::<Result<_>>()?;
    log.steps.push(StepRecord {
        step,
        size: next.len(),
        distances,
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapSpec;
    use crate::space::{BoxDomain, MetricSpace};

    fn cantor() -> Ifs {
        Ifs::new(
            MetricSpace::euclidean(BoxDomain::unit_interval()),
            vec![
                MapSpec::affine_1d(1.0 / 3.0, 0.0),
                MapSpec::affine_1d(1.0 / 3.0, 2.0 / 3.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn cantor_first_step() {
        let a = FinitePointSet::from_scalars(&[0.0, 1.0]).unwrap();
        let b = hutchinson_apply(&cantor(), &a, 0.0).unwrap();
        let expected = FinitePointSet::from_scalars(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        assert!(b.set_eq(&expected), "{b:?}");
    }

    #[test]
    fn common_fixed_point_is_invariant() {
        let ifs = Ifs::new(
            MetricSpace::euclidean(BoxDomain::unit_interval()),
            vec![MapSpec::affine_1d(0.5, 0.0), MapSpec::power(2.0)],
        )
        .unwrap();
        let a = FinitePointSet::from_scalars(&[0.0]).unwrap();
        assert_eq!(hutchinson_apply(&ifs, &a, 0.0).unwrap(), a);
    }

    #[test]
    fn snapping_merges_nearby_images() {
        let a = FinitePointSet::from_scalars(&[0.0, 1e-9, 1.0]).unwrap();
        let exact = hutchinson_apply(&cantor(), &a, 0.0).unwrap();
        let snapped = hutchinson_apply(&cantor(), &a, 1e-6).unwrap();
        assert_eq!(exact.len(), 6);
        assert_eq!(snapped.len(), 4);
        assert!(hutchinson_apply(&cantor(), &a, -1.0).is_err());
    }

    #[test]
    fn single_contraction_orbit() {
        let ifs = Ifs::new(
            MetricSpace::euclidean(BoxDomain::unit_interval()),
            vec![MapSpec::affine_1d(0.5, 0.0)],
        )
        .unwrap();
        let a0 = FinitePointSet::from_scalars(&[1.0]).unwrap();
        let base = ifs.space().clone();
        let metrics = [LoggedMetric::new("base", &base)];
        let (a, log) = attractor_iterate(&ifs, &a0, 10, 0.0, &metrics, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(a.points()[0][0], 2f64.powi(-10));
        assert_eq!(log.steps.len(), 10);
        for (t, s) in log.steps.iter().enumerate() {
            assert_eq!(s.distances[0], 2f64.powi(-(t as i32) - 1));
        }
    }

    #[test]
    fn cap_stops_early() {
        let a0 = FinitePointSet::from_scalars(&[0.0, 1.0]).unwrap();
        let (a, log) = attractor_iterate(&cantor(), &a0, 10, 0.0, &[], 64).unwrap();
        assert!(log.capped);
        assert_eq!(a.len(), 64);
        assert_eq!(log.steps.len(), 5);
    }
}
