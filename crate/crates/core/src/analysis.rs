//! Sampled Lipschitz constants, the generalized joint spectral radius
//! `lim L(F^n)^{1/n}`, and equicontinuity probes.
//!
//! Everything here is estimated from finitely many sample pairs. Lipschitz
//! values are lower bounds of the true supremum and are never extrapolated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{eval_word, level_image_pairs, level_sup, Ifs, MapSpec, Word};
use crate::remetric::{remetric_distance, RemetricParams};
use crate::space::{BaseMetric, BoxDomain, Distance, MetricSpace, Point};

/// Step sizes `10^-1 … 10^-12` for near-diagonal pairs.
pub fn default_ladder() -> Vec<f64> {
    (1..=12).map(|e| 10f64.powi(-e)).collect()
}

/// Deterministic source of sample pairs: near-diagonal pairs `(a, a + h e_i)`
/// around anchor points, all pairs of a regular grid, and uniform random
/// pairs.
///
/// Anchors are the lower corner, the upper corner, the center, then
/// `random_anchors` uniform points. Near-diagonal pairs are the only pairs
/// that expose blow-up such as `√x` at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSampler {
    pub seed: u64,
    pub random_pairs: usize,
    /// Nodes per axis of the grid; below 2 disables grid pairs.
    pub grid_per_axis: usize,
    pub ladder: Vec<f64>,
    pub random_anchors: usize,
}

impl Default for PairSampler {
    fn default() -> Self {
        PairSampler {
            seed: 0,
            random_pairs: 256,
            grid_per_axis: 5,
            ladder: default_ladder(),
            random_anchors: 4,
        }
    }
}

impl PairSampler {
    pub fn with_seed(seed: u64) -> Self {
        PairSampler {
            seed,
            ..PairSampler::default()
        }
    }

    /// Sampler that produces exactly `total` pairs: the structured pairs
    /// first, topped up with random pairs.
    pub fn sized(seed: u64, total: usize, domain: &BoxDomain) -> Self {
        let mut s = PairSampler {
            seed,
            random_pairs: 0,
            ..PairSampler::default()
        };
        let structured = s.sample(domain).len();
        s.random_pairs = total.saturating_sub(structured);
        s
    }

    /// Near-diagonal and uniform random pairs only.
    pub fn near_diagonal(seed: u64, random_pairs: usize) -> Self {
        PairSampler {
            seed,
            random_pairs,
            grid_per_axis: 0,
            ..PairSampler::default()
        }
    }

    pub fn sample(&self, domain: &BoxDomain) -> Vec<(Point, Point)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut anchors = vec![
            domain.lower().clone(),
            domain.upper().clone(),
            domain.center(),
        ];
        for _ in 0..self.random_anchors {
            anchors.push(uniform_point(&mut rng, domain));
        }

        let mut out = Vec::new();
        for a in &anchors {
            for axis in 0..domain.dim() {
                for &h in &self.ladder {
                    if let Some(b) = step_along(domain, a, axis, h) {
                        out.push((a.clone(), b));
                    }
                }
            }
        }
        if self.grid_per_axis >= 2 {
            let grid = domain.grid(self.grid_per_axis);
            for (i, a) in grid.iter().enumerate() {
                for b in &grid[i + 1..] {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        for _ in 0..self.random_pairs {
            let a = uniform_point(&mut rng, domain);
            let b = uniform_point(&mut rng, domain);
            out.push((a, b));
        }
        out
    }
}

fn uniform_point(rng: &mut ChaCha8Rng, domain: &BoxDomain) -> Point {
    Point::from_raw(
        domain
            .lower()
            .iter()
            .zip(domain.upper().iter())
            .map(|(lo, hi)| rng.gen_range(*lo..=*hi))
            .collect(),
    )
}

/// `a + h e_axis`, or `a - h e_axis` when the forward step leaves the box.
fn step_along(domain: &BoxDomain, a: &Point, axis: usize, h: f64) -> Option<Point> {
    let mut b = a.coords().to_vec();
    let fwd = a[axis] + h;
    let back = a[axis] - h;
    b[axis] = if fwd <= domain.upper()[axis] {
        fwd
    } else if back >= domain.lower()[axis] {
        back
    } else {
        return None;
    };
    (b[axis] != a[axis]).then(|| Point::from_raw(b))
}

/// Largest observed ratio `d(f(x), f(y)) / d(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub witness: (Point, Point),
    pub sample_count: usize,
    /// False when some level enumeration was cut by the budget.
    pub exact_levels: bool,
}

fn reduce_ratios(
    pairs: &[(Point, Point)],
    ratios: Vec<Option<(f64, bool)>>,
) -> Result<LipschitzEstimate> {
    let mut best: Option<(f64, usize)> = None;
    let mut count = 0;
    let mut exact = true;
    for (i, r) in ratios.into_iter().enumerate() {
        let Some((r, ex)) = r else { continue };
        count += 1;
        exact &= ex;
        if best.map_or(true, |(b, _)| r > b) {
            best = Some((r, i));
        }
    }
    let (value, i) = best.ok_or(Error::NoPairs)?;
    Ok(LipschitzEstimate {
        value,
        witness: pairs[i].clone(),
        sample_count: count,
        exact_levels: exact,
    })
}

/// Lower bound for the Lipschitz constant of `map` under `metric`. Pairs
/// at distance zero are skipped.
pub fn lipschitz_estimate<D: Distance + ?Sized>(
    map: &MapSpec,
    domain: &BoxDomain,
    metric: &D,
    pairs: &[(Point, Point)],
) -> Result<LipschitzEstimate> {
    map.check_shape(domain.dim())?;
    let ratios = pairs
        .par_iter()
        .map(|(x, y)| -> Result<Option<(f64, bool)>> {
            let d = metric.distance(x, y)?;
            if d == 0.0 {
                return Ok(None);
            }
            let fx = map.eval(domain, x)?;
            let fy = map.eval(domain, y)?;
            Ok(Some((metric.distance(&fx, &fy)? / d, true)))
        })
        .collect::<Result<Vec<_>>>()?;
    reduce_ratios(pairs, ratios)
}

/// Lower bound for `L(F^n) = sup_{f ∈ F^n} L(f)`.
pub fn family_lipschitz_estimate<D: Distance + ?Sized>(
    ifs: &Ifs,
    n: usize,
    metric: &D,
    pairs: &[(Point, Point)],
    budget: usize,
) -> Result<LipschitzEstimate> {
    let ratios = pairs
        .par_iter()
        .map(|(x, y)| -> Result<Option<(f64, bool)>> {
            let d = metric.distance(x, y)?;
            if d == 0.0 {
                return Ok(None);
            }
            let level = level_image_pairs(ifs, x, y, n, budget)?;
            let mut best = 0.0f64;
            for (a, b) in &level.pairs {
                best = best.max(metric.distance(a, b)?);
            }
            Ok(Some((best / d, level.exact)))
        })
        .collect::<Result<Vec<_>>>()?;
    reduce_ratios(pairs, ratios)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsrLevel {
    pub n: usize,
    pub lipschitz: f64,
    /// `lipschitz^{1/n}`.
    pub root: f64,
    pub exact_levels: bool,
}

/// Per-level estimates of `L(F^n)^{1/n}`. Heuristic: each level value is a
/// sampled lower bound and the limit is not extrapolated, so values near 1
/// do not decide on which side of 1 the radius lies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsrEstimate {
    pub per_level: Vec<JsrLevel>,
    pub final_root: f64,
}

pub fn jsr_estimate<D: Distance + ?Sized>(
    ifs: &Ifs,
    metric: &D,
    pairs: &[(Point, Point)],
    n_max: usize,
    budget: usize,
) -> Result<JsrEstimate> {
    if n_max == 0 {
        return Err(Error::Params("n_max must be at least 1".into()));
    }
    let mut per_level = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let est = family_lipschitz_estimate(ifs, n, metric, pairs, budget)?;
        per_level.push(JsrLevel {
            n,
            lipschitz: est.value,
            root: est.value.powf(1.0 / n as f64),
            exact_levels: est.exact_levels,
        });
    }
    let final_root = per_level.last().map(|l| l.root).unwrap_or_default();
    Ok(JsrEstimate {
        per_level,
        final_root,
    })
}

/// One rejected radius and the sample that broke it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRejection {
    pub radius: f64,
    pub witness: Point,
    pub image_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusProbe {
    pub point: Point,
    pub eps_out: f64,
    pub level: usize,
    /// Largest listed radius for which no sample violated the bound.
    pub accepted: Option<f64>,
    pub rejections: Vec<RadiusRejection>,
}

const PROBE_FRACTIONS: [f64; 11] = [
    1.0 - 1e-9,
    0.999,
    0.99,
    0.9,
    0.75,
    0.5,
    0.25,
    0.1,
    1e-2,
    1e-3,
    1e-6,
];

fn probe_points(
    space: &MetricSpace,
    x: &Point,
    radius: f64,
    rng: &mut ChaCha8Rng,
    random_samples: usize,
) -> Vec<Point> {
    let domain = space.domain();
    // euclidean reach of the metric ball of `radius`
    let reach = match space.base() {
        BaseMetric::Euclidean => radius,
        BaseMetric::NormalizedEuclidean if radius < 1.0 => radius / (1.0 - radius),
        BaseMetric::NormalizedEuclidean => domain.diameter(),
    };
    let mut candidates = Vec::new();
    for axis in 0..x.dim() {
        for t in PROBE_FRACTIONS {
            for sign in [1.0, -1.0] {
                let mut y = x.coords().to_vec();
                y[axis] += sign * t * reach;
                candidates.push(y);
            }
        }
    }
    for _ in 0..random_samples {
        candidates.push(
            x.iter()
                .map(|c| c + reach * rng.gen_range(-1.0..=1.0))
                .collect(),
        );
    }
    candidates
        .into_iter()
        .filter_map(|mut y| {
            domain.clamp_in_place(&mut y);
            let d = space.raw_distance(x, &y);
            (d > 0.0 && d < radius).then(|| Point::from_raw(y))
        })
        .collect()
}

fn check_radii(eps_out: f64, radii: &[f64]) -> Result<()> {
    if !(eps_out.is_finite() && eps_out > 0.0) {
        return Err(Error::Params(format!(
            "eps_out must be positive, got {eps_out}"
        )));
    }
    if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Params("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Params("radii must be strictly decreasing".into()));
    }
    Ok(())
}

/// Pointwise equicontinuity probe of the family `F^level` at `x`: walks the
/// decreasing `radii` and returns the first radius δ for which every sampled
/// `y` with `d(x, y) < δ` satisfies `max_f d(f(x), f(y)) < eps_out`.
///
/// One-sided: an accepted radius is only as good as the sample, while each
/// rejection carries a concrete witness.
pub fn modulus_probe(
    ifs: &Ifs,
    level: usize,
    x: &Point,
    eps_out: f64,
    radii: &[f64],
    seed: u64,
    random_samples: usize,
) -> Result<ModulusProbe> {
    check_radii(eps_out, radii)?;
    let space = ifs.space();
    space.domain().check_point(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejections = Vec::new();
    let mut accepted = None;
    for &radius in radii {
        let ys = probe_points(space, x, radius, &mut rng, random_samples);
        let mut worst: Option<(f64, &Point)> = None;
        for y in &ys {
            let (sup, _) = level_sup(ifs, x, y, level, crate::maps::DEFAULT_BUDGET)?;
            if sup >= eps_out && worst.map_or(true, |(w, _)| sup > w) {
                worst = Some((sup, y));
            }
        }
        match worst {
            None => {
                accepted = Some(radius);
                break;
            }
            Some((image_distance, y)) => rejections.push(RadiusRejection {
                radius,
                witness: y.clone(),
                image_distance,
            }),
        }
    }
    Ok(ModulusProbe {
        point: x.clone(),
        eps_out,
        level,
        accepted,
        rejections,
    })
}

/// Pointwise probes at every grid point; the uniform modulus estimate is
/// the smallest accepted radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformModulus {
    pub eps_out: f64,
    pub level: usize,
    pub points: usize,
    /// `None` when some grid point accepted no listed radius.
    pub min_delta: Option<f64>,
    pub worst_point: Point,
}

pub fn uniform_modulus_probe(
    ifs: &Ifs,
    level: usize,
    eps_out: f64,
    radii: &[f64],
    grid_per_axis: usize,
    seed: u64,
    random_samples: usize,
) -> Result<UniformModulus> {
    check_radii(eps_out, radii)?;
    let grid = ifs.domain().grid(grid_per_axis);
    let probes = grid
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            modulus_probe(
                ifs,
                level,
                x,
                eps_out,
                radii,
                seed.wrapping_add(i as u64),
                random_samples,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut min_delta = Some(f64::INFINITY);
    let mut worst_point = grid[0].clone();
    for p in &probes {
        match (min_delta, p.accepted) {
            (Some(_), None) => {
                min_delta = None;
                worst_point = p.point.clone();
            }
            (Some(m), Some(d)) if d < m => {
                min_delta = Some(d);
                worst_point = p.point.clone();
            }
            _ => {}
        }
    }
    Ok(UniformModulus {
        eps_out,
        level,
        points: grid.len(),
        min_delta,
        worst_point,
    })
}

/// Result of checking `lower(g(x), g(y)) ≤ (1 + ε)^n · upper(x, y)` over all
/// words `g` of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBoundReport {
    pub n: usize,
    pub bound: f64,
    /// Number of (pair, word) checks.
    pub checked: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub witness: Option<(Point, Point, Word)>,
    pub all_exact: bool,
}

impl PowerBoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Certified check that every composition of `n` maps is
/// `(1 + ε)^n`-Lipschitz for the truncated remetrized distance.
pub fn verify_power_bound(
    ifs: &Ifs,
    params: &RemetricParams,
    pairs: &[(Point, Point)],
    n: usize,
) -> Result<PowerBoundReport> {
    if n == 0 {
        return Err(Error::Params("n must be at least 1".into()));
    }
    let bound = params.lipschitz_bound().powi(n as i32);
    let words: Vec<Word> = Word::all(ifs.len(), n).collect();
    let space = ifs.space();
    type Row = Vec<(f64, bool, bool)>;
    let rows: Vec<Option<Row>> = pairs
        .par_iter()
        .map(|(x, y)| -> Result<Option<Row>> {
            if space.base_distance(x, y)? == 0.0 {
                return Ok(None);
            }
            let rhs = remetric_distance(ifs, params, x, y)?;
            words
                .iter()
                .map(|w| {
                    let gx = eval_word(ifs, w, x)?;
                    let gy = eval_word(ifs, w, y)?;
                    let lhs = remetric_distance(ifs, params, &gx, &gy)?;
                    Ok((
                        lhs.lower / rhs.upper,
                        lhs.lower > bound * rhs.upper,
                        lhs.exact_levels && rhs.exact_levels,
                    ))
                })
                .collect::<Result<Row>>()
                .map(Some)
        })
        .collect::<Result<_>>()?;

    let mut report = PowerBoundReport {
        n,
        bound,
        checked: 0,
        violations: 0,
        worst_ratio: 0.0,
        witness: None,
        all_exact: true,
    };
    for (row, (x, y)) in rows.iter().zip(pairs) {
        let Some(row) = row else { continue };
        for ((ratio, violated, exact), w) in row.iter().zip(&words) {
            report.checked += 1;
            report.violations += usize::from(*violated);
            report.all_exact &= exact;
            if report.witness.is_none() || *ratio > report.worst_ratio {
                report.worst_ratio = *ratio;
                report.witness = Some((x.clone(), y.clone(), w.clone()));
            }
        }
    }
    Ok(report)
}
