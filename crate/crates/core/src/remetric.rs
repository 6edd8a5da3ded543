//! The remetrized distance
//!
//! ```text
//! d_ε(x, y) = d(x, y) + Σ_{n≥1} sup{ d(f(x), f(y)) : f ∈ F^n } / (1 + ε)^n
//! ```
//!
//! under which every member of the family is `(1 + ε)`-Lipschitz. The series
//! is truncated after `N` levels; since every term is bounded by the space's
//! diameter bound `D`, the discarded tail is at most `D (1 + ε)^{-N} / ε` and
//! the true value lies in `[lower, lower + tail]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{Ifs, LevelWalker, MapSpec, DEFAULT_BUDGET};
use crate::space::{Distance, MetricSpace, Point};

/// Default cap on the projected number of image pairs evaluated per query,
/// as a multiple of the per-level budget.
pub const DEFAULT_WORK_FACTOR: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemetricParams {
    epsilon: f64,
    depth: usize,
    budget: usize,
    tail_tol: Option<f64>,
}

/// How the truncation depth was chosen from a tail tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthSelection {
    /// Smallest depth meeting the tolerance.
    pub requested: usize,
    /// Depth actually used.
    pub depth: usize,
    /// Tail bound at `depth`; exceeds the tolerance when `capped`.
    pub tail_bound: f64,
    pub capped: bool,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Params(format!(
            "epsilon must be finite and strictly positive, got {epsilon}"
        )));
    }
    Ok(())
}

impl RemetricParams {
    pub fn new(epsilon: f64, depth: usize) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(RemetricParams {
            epsilon,
            depth,
            budget: DEFAULT_BUDGET,
            tail_tol: None,
        })
    }

    pub fn with_budget(mut self, budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::Params("budget must be at least 1".into()));
        }
        self.budget = budget;
        Ok(self)
    }

    /// Picks the smallest depth whose tail bound is within `tail_tol`, then
    /// lowers it while the projected pair count `Σ_{n≤N} min(k^n, budget)`
    /// exceeds `work_cap`.
    pub fn for_tail_tolerance(
        ifs: &Ifs,
        epsilon: f64,
        tail_tol: f64,
        budget: usize,
        work_cap: usize,
    ) -> Result<(Self, DepthSelection)> {
        check_epsilon(epsilon)?;
        if !(tail_tol.is_finite() && tail_tol > 0.0) {
            return Err(Error::Params(format!(
                "tail tolerance must be positive, got {tail_tol}"
            )));
        }
        let space = ifs.space();
        let d = space.diameter_bound();
        let mut requested = ((d / (epsilon * tail_tol)).ln() / epsilon.ln_1p()).ceil();
        if !requested.is_finite() || requested < 0.0 {
            requested = 0.0;
        }
        let mut requested = requested as usize;
        while tail_bound(space, epsilon, requested)? > tail_tol {
            requested += 1;
        }
        while requested > 0 && tail_bound(space, epsilon, requested - 1)? <= tail_tol {
            requested -= 1;
        }

        let k = ifs.len();
        let mut depth = requested;
        while depth > 0 && projected_pairs(k, depth, budget) > work_cap {
            depth -= 1;
        }
        let params = RemetricParams {
            epsilon,
            depth,
            budget,
            tail_tol: Some(tail_tol),
        }
        .with_budget(budget)?;
        Ok((
            params,
            DepthSelection {
                requested,
                depth,
                tail_bound: tail_bound(space, epsilon, depth)?,
                capped: depth < requested,
            },
        ))
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn tail_tol(&self) -> Option<f64> {
        self.tail_tol
    }

    /// The Lipschitz bound `1 + ε`.
    pub fn lipschitz_bound(&self) -> f64 {
        1.0 + self.epsilon
    }
}

/// `Σ_{n=1}^{depth} min(k^n, budget)`, saturating.
pub fn projected_pairs(family_size: usize, depth: usize, budget: usize) -> usize {
    let mut level = 1usize;
    let mut total = 0usize;
    for _ in 0..depth {
        level = level.saturating_mul(family_size).min(budget);
        total = total.saturating_add(level);
    }
    total
}

/// `D · Σ_{n>N} (1 + ε)^{-n} = D (1 + ε)^{-N} / ε`.
pub fn tail_bound(space: &MetricSpace, epsilon: f64, depth: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    let depth = i32::try_from(depth).map_err(|_| Error::Params("depth too large".into()))?;
    Ok(space.diameter_bound() * (1.0 + epsilon).powi(-depth) / epsilon)
}

/// Bracket `[lower, upper]` around the remetrized distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedDistance {
    pub lower: f64,
    pub upper: f64,
    /// Every level sup was taken over the complete level. When false the
    /// lower end is still a lower bound but `upper` is not certified.
    pub exact_levels: bool,
}

impl CertifiedDistance {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// The upper end, if it is certified.
    pub fn certified_upper(&self) -> Option<f64> {
        self.exact_levels.then_some(self.upper)
    }
}

/// Truncated remetrized distance with its certified bracket.
pub fn remetric_distance(
    ifs: &Ifs,
    params: &RemetricParams,
    x: &[f64],
    y: &[f64],
) -> Result<CertifiedDistance> {
    let space = ifs.space();
    let mut walker = LevelWalker::new(ifs, x, y, params.budget)?;
    let ratio = 1.0 / (1.0 + params.epsilon);
    let mut lower = space.raw_distance(x, y);
    let mut weight = 1.0;
    let mut exact = true;
    for n in 1..=params.depth {
        weight *= ratio;
        let (sup, level_exact) = if n < params.depth {
            walker.advance()?;
            (walker.sup(), walker.is_exact())
        } else {
            walker.next_level_sup()?
        };
        lower += sup * weight;
        exact = level_exact;
    }
    Ok(CertifiedDistance {
        lower,
        upper: lower + tail_bound(space, params.epsilon, params.depth)?,
        exact_levels: exact,
    })
}

/// Remetrized distance for the one-map family `{f}`, following the single
/// orbit pair `(f^n(x), f^n(y))`.
pub fn single_map_distance(
    map: &MapSpec,
    space: &MetricSpace,
    params: &RemetricParams,
    x: &[f64],
    y: &[f64],
) -> Result<CertifiedDistance> {
    let domain = space.domain();
    domain.check_point(x)?;
    domain.check_point(y)?;
    map.check_shape(domain.dim())?;
    let ratio = 1.0 / (1.0 + params.epsilon);
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    let mut next = vec![0.0; a.len()];
    let mut lower = space.raw_distance(x, y);
    let mut weight = 1.0;
    for _ in 0..params.depth {
        weight *= ratio;
        map.eval_into(domain, &a, &mut next)?;
        std::mem::swap(&mut a, &mut next);
        map.eval_into(domain, &b, &mut next)?;
        std::mem::swap(&mut b, &mut next);
        lower += space.raw_distance(&a, &b) * weight;
    }
    Ok(CertifiedDistance {
        lower,
        upper: lower + tail_bound(space, params.epsilon, params.depth)?,
        exact_levels: true,
    })
}

/// The truncated remetrized distance (`lower` end) as a distance oracle.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedRemetric<'a> {
    pub ifs: &'a Ifs,
    pub params: RemetricParams,
}

impl Distance for TruncatedRemetric<'_> {
    fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(remetric_distance(self.ifs, &self.params, x, y)?.lower)
    }
}

/// Worst certified ratio observed for one map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapBoundReport {
    pub map_index: usize,
    /// `max lower(g(x), g(y)) / upper(x, y)` over the checked pairs.
    pub worst_ratio: f64,
    pub witness: Option<(Point, Point)>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzCertificate {
    pub epsilon: f64,
    pub depth: usize,
    pub bound: f64,
    pub tail_bound: f64,
    pub checked_pairs: usize,
    /// Pairs with `d(x, y) = 0`.
    pub skipped_pairs: usize,
    /// Every bracket involved was exact.
    pub all_exact: bool,
    pub maps: Vec<MapBoundReport>,
}

impl LipschitzCertificate {
    pub fn passed(&self) -> bool {
        self.maps.iter().all(|m| m.violations == 0)
    }
}

struct PairOutcome {
    ratios: Vec<f64>,
    violated: Vec<bool>,
    exact: bool,
}

/// Checks `lower(g(x), g(y)) ≤ (1 + ε) · upper(x, y)` for every map `g` and
/// every pair. The inequality follows from the construction, so a violation
/// means a defect in the computation, not a property of the input.
pub fn verify_lipschitz_bound(
    ifs: &Ifs,
    params: &RemetricParams,
    pairs: &[(Point, Point)],
) -> Result<LipschitzCertificate> {
    let space = ifs.space();
    let bound = params.lipschitz_bound();
    let outcomes: Vec<Option<PairOutcome>> = pairs
        .par_iter()
        .map(|(x, y)| -> Result<Option<PairOutcome>> {
            space.domain().check_point(x)?;
            space.domain().check_point(y)?;
            if space.raw_distance(x, y) == 0.0 {
                return Ok(None);
            }
            let rhs = remetric_distance(ifs, params, x, y)?;
            let mut exact = rhs.exact_levels;
            let mut ratios = Vec::with_capacity(ifs.len());
            let mut violated = Vec::with_capacity(ifs.len());
            for i in 0..ifs.len() {
                let gx = ifs.eval_map(i, x)?;
                let gy = ifs.eval_map(i, y)?;
                let lhs = remetric_distance(ifs, params, &gx, &gy)?;
                exact &= lhs.exact_levels;
                ratios.push(lhs.lower / rhs.upper);
                violated.push(lhs.lower > bound * rhs.upper);
            }
            Ok(Some(PairOutcome {
                ratios,
                violated,
                exact,
            }))
        })
        .collect::<Result<_>>()?;

    let mut maps: Vec<MapBoundReport> = (0..ifs.len())
        .map(|map_index| MapBoundReport {
            map_index,
            worst_ratio: 0.0,
            witness: None,
            violations: 0,
        })
        .collect();
    let mut checked = 0;
    let mut all_exact = true;
    for (outcome, (x, y)) in outcomes.iter().zip(pairs) {
        let Some(o) = outcome else { continue };
        checked += 1;
        all_exact &= o.exact;
        for (m, (&r, &v)) in maps.iter_mut().zip(o.ratios.iter().zip(&o.violated)) {
            if m.witness.is_none() || r > m.worst_ratio {
                m.worst_ratio = r;
                m.witness = Some((x.clone(), y.clone()));
            }
            m.violations += usize::from(v);
        }
    }
    Ok(LipschitzCertificate {
        epsilon: params.epsilon,
        depth: params.depth,
        bound,
        tail_bound: tail_bound(space, params.epsilon, params.depth)?,
        checked_pairs: checked,
        skipped_pairs: pairs.len() - checked,
        all_exact,
        maps,
    })
}
