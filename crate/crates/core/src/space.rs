//! Base metric spaces on boxes in `R^k`, the `d / (1 + d)` normalization and
//! the Hausdorff distance between finite point sets.

use std::ops::Deref;

use hashbrown::HashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute per-coordinate slack for closed-box membership.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

/// A point of `R^k` with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Dimension {
                expected: 1,
                found: 0,
            });
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Numeric(format!("non-finite coordinate {c}")));
        }
        Ok(Point(coords))
    }

    /// One-dimensional point. Panics on a non-finite value.
    pub fn scalar(value: f64) -> Self {
        Point::new(vec![value]).expect("finite scalar")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point(coords)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

/// Closed axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Point,
    upper: Point,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let lower = Point::new(lower)?;
        let upper = Point::new(upper)?;
        if lower.dim() != upper.dim() {
            return Err(Error::Dimension {
                expected: lower.dim(),
                found: upper.dim(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if lo >= hi {
                return Err(Error::Domain(format!(
                    "coordinate {i}: lower {lo} is not below upper {hi}"
                )));
            }
        }
        Ok(BoxDomain { lower, upper })
    }

    /// The unit interval `[0, 1]`.
    pub fn unit_interval() -> Self {
        BoxDomain::new(vec![0.0], vec![1.0]).expect("valid box")
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    /// Euclidean length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        euclidean(&self.lower, &self.upper)
    }

    pub fn center(&self) -> Point {
        Point::from_raw(
            self.lower
                .iter()
                .zip(self.upper.iter())
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect(),
        )
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(c, (lo, hi))| *c >= lo - DOMAIN_TOLERANCE && *c <= hi + DOMAIN_TOLERANCE)
    }

    pub(crate) fn clamp_in_place(&self, x: &mut [f64]) {
        for (c, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(self.upper.iter())) {
            *c = c.clamp(*lo, *hi);
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(Error::Domain(format!("point {x:?} lies outside the box")));
        }
        Ok(())
    }

    /// All `2^k` corners, ordered by the binary expansion of their index
    /// (bit `i` set selects the upper bound on axis `i`).
    pub fn corners(&self) -> Vec<Point> {
        let k = self.dim();
        (0..1usize << k)
            .map(|mask| {
                Point::from_raw(
                    (0..k)
                        .map(|i| {
                            if mask >> i & 1 == 1 {
                                self.upper[i]
                            } else {
                                self.lower[i]
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }

    /// Regular grid with `per_axis >= 2` nodes on every axis, endpoints
    /// included. Row-major with the last axis varying fastest.
    pub fn grid(&self, per_axis: usize) -> Vec<Point> {
        let per_axis = per_axis.max(2);
        let k = self.dim();
        let total = per_axis.pow(k as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; k];
        for _ in 0..total {
            let coords = (0..k)
                .map(|i| {
                    let t = idx[i] as f64 / (per_axis - 1) as f64;
                    if idx[i] == per_axis - 1 {
                        self.upper[i]
                    } else {
                        self.lower[i] + t * (self.upper[i] - self.lower[i])
                    }
                })
                .collect();
            out.push(Point::from_raw(coords));
            for i in (0..k).rev() {
                idx[i] += 1;
                if idx[i] < per_axis {
                    break;
                }
                idx[i] = 0;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseMetric {
    Euclidean,
    /// `|x - y| / (1 + |x - y|)`, bounded by 1.
    NormalizedEuclidean,
}

/// Anything that measures the distance between two coordinate slices.
pub trait Distance: Sync {
    fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64>;
}

/// A box together with a base metric and an upper bound on the metric over
/// the box.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    domain: BoxDomain,
    base: BaseMetric,
    diameter_bound: f64,
}

impl MetricSpace {
    pub fn new(domain: BoxDomain, base: BaseMetric) -> Self {
        let diameter_bound = match base {
            BaseMetric::Euclidean => domain.diameter(),
            BaseMetric::NormalizedEuclidean => 1.0,
        };
        MetricSpace {
            domain,
            base,
            diameter_bound,
        }
    }

    pub fn euclidean(domain: BoxDomain) -> Self {
        MetricSpace::new(domain, BaseMetric::Euclidean)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn base(&self) -> BaseMetric {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    /// Distance between two points of the space.
    pub fn base_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.raw_distance(x, y))
    }

    /// Returns a space whose metric is bounded by 1. Euclidean spaces with a
    /// diagonal longer than 1 switch to the normalized metric; anything already
    /// bounded by 1 is returned as is.
    pub fn normalize(&self) -> MetricSpace {
        match self.base {
            BaseMetric::Euclidean if self.diameter_bound > 1.0 => {
                MetricSpace::new(self.domain.clone(), BaseMetric::NormalizedEuclidean)
            }
            _ => self.clone(),
        }
    }

    pub(crate) fn raw_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let e = euclidean(x, y);
        match self.base {
            BaseMetric::Euclidean => e,
            BaseMetric::NormalizedEuclidean => e / (1.0 + e),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

impl Distance for MetricSpace {
    fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.base_distance(x, y)
    }
}

pub(crate) fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    if x.len() == 1 {
        return (x[0] - y[0]).abs();
    }
    let scale = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let t = (a - b).abs() / scale;
            t * t
        })
        .sum();
    scale * sum.sqrt()
}

/// Bit pattern used for exact coordinate equality; `-0.0` and `0.0` collide.
#[inline]
pub(crate) fn coord_key(c: f64) -> u64 {
    if c == 0.0 {
        0
    } else {
        c.to_bits()
    }
}

/// Finite nonempty point set without coordinate-identical duplicates.
/// Insertion order is preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePointSet {
    dim: usize,
    points: Vec<Point>,
}

impl FinitePointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet)?;
        let dim = first.dim();
        let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(points.len());
        let mut kept = Vec::with_capacity(points.len());
        for p in points {
            if p.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if seen.insert(p.iter().map(|c| coord_key(*c)).collect()) {
                kept.push(p);
            }
        }
        Ok(FinitePointSet { dim, points: kept })
    }

    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        FinitePointSet::new(
            values
                .iter()
                .map(|v| Point::new(vec![*v]))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> {
        self.points.iter()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.points
            .iter()
            .any(|q| q.iter().zip(p).all(|(a, b)| coord_key(*a) == coord_key(*b)))
    }

    pub fn is_subset(&self, other: &FinitePointSet) -> bool {
        let keys: HashSet<Vec<u64>> = other
            .points
            .iter()
            .map(|p| p.iter().map(|c| coord_key(*c)).collect())
            .collect();
        self.points
            .iter()
            .all(|p| keys.contains(&p.iter().map(|c| coord_key(*c)).collect::<Vec<_>>()))
    }

    /// Same points regardless of order.
    pub fn set_eq(&self, other: &FinitePointSet) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }

    pub fn check_inside(&self, domain: &BoxDomain) -> Result<()> {
        self.points.iter().try_for_each(|p| domain.check_point(p))
    }
}

/// Hausdorff distance between two finite sets under the base metric.
pub fn hausdorff(space: &MetricSpace, a: &FinitePointSet, b: &FinitePointSet) -> Result<f64> {
    hausdorff_with(space, a, b)
}

/// Hausdorff distance under an arbitrary distance oracle.
///
/// Each directed pass keeps the running maximum of nearest-neighbour
/// distances and abandons an inner scan as soon as some candidate is closer
/// than that maximum, since such a point can no longer raise it. The value is
/// identical to the exhaustive double loop.
pub fn hausdorff_with<D: Distance + ?Sized>(
    metric: &D,
    a: &FinitePointSet,
    b: &FinitePointSet,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let ab = directed_hausdorff(metric, a.points(), b.points())?;
    let ba = directed_hausdorff(metric, b.points(), a.points())?;
    Ok(ab.max(ba))
}

fn directed_hausdorff<D: Distance + ?Sized>(
    metric: &D,
    from: &[Point],
    to: &[Point],
) -> Result<f64> {
    let mut cmax = 0.0f64;
    for p in from {
        let mut cmin = f64::INFINITY;
        let mut dominated = false;
        for q in to {
            let d = metric.distance(p, q)?;
            if d < cmax {
                dominated = true;
                break;
            }
            if d < cmin {
                cmin = d;
            }
        }
        if !dominated && cmin > cmax {
            cmax = cmin;
        }
    }
    Ok(cmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> MetricSpace {
        MetricSpace::euclidean(BoxDomain::unit_interval())
    }

    #[test]
    fn base_distance_examples() {
        let s = unit();
        assert_eq!(s.base_distance(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(s.base_distance(&[0.3], &[0.3]).unwrap(), 0.0);
        let n = MetricSpace::new(BoxDomain::unit_interval(), BaseMetric::NormalizedEuclidean);
        assert_eq!(n.base_distance(&[0.0], &[1.0]).unwrap(), 0.5);
        assert_eq!(n.diameter_bound(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let err = unit().base_distance(&[0.0], &[0.0, 1.0]).unwrap_err();
        assert!(err.to_string().starts_with("dimension"));
    }

    #[test]
    fn normalize_examples() {
        let s = unit();
        assert_eq!(s.normalize(), s);

        let wide = MetricSpace::euclidean(BoxDomain::new(vec![0.0], vec![3.0]).unwrap());
        let n = wide.normalize();
        assert_eq!(n.base(), BaseMetric::NormalizedEuclidean);
        assert_eq!(n.diameter_bound(), 1.0);
        assert_eq!(n.base_distance(&[0.0], &[3.0]).unwrap(), 0.75);
        assert_eq!(n.normalize(), n);
    }

    #[test]
    fn box_rejects_degenerate_axis() {
        assert!(BoxDomain::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn membership_tolerance() {
        let d = BoxDomain::unit_interval();
        assert!(d.contains(&[1.0 + 5e-13]));
        assert!(!d.contains(&[1.0 + 1e-11]));
        assert!(d.contains(&[-5e-13]));
    }

    #[test]
    fn grid_and_corners() {
        let d = BoxDomain::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let g = d.grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0].coords(), &[0.0, -1.0]);
        assert_eq!(g[8].coords(), &[1.0, 1.0]);
        assert_eq!(d.corners().len(), 4);
    }

    #[test]
    fn point_sets_deduplicate() {
        let s = FinitePointSet::from_scalars(&[0.0, -0.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert!(FinitePointSet::new(vec![]).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let s = unit();
        let a = FinitePointSet::from_scalars(&[0.0]).unwrap();
        let b = FinitePointSet::from_scalars(&[0.0, 1.0]).unwrap();
        assert_eq!(hausdorff(&s, &a, &b).unwrap(), 1.0);
        assert_eq!(hausdorff(&s, &b, &b).unwrap(), 0.0);
        let c = FinitePointSet::from_scalars(&[0.5]).unwrap();
        assert_eq!(hausdorff(&s, &b, &c).unwrap(), 0.5);
    }
}
