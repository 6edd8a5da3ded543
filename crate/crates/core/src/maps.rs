//! Map expression trees, iterated function systems, composition words and
//! the level-by-level enumeration of image pairs `{(f(x), f(y)) : f ∈ F^n}`.
//!
//! Words compose right to left: the word `(w0, w1, …, w_{n-1})` denotes
//! `f_{w0} ∘ f_{w1} ∘ … ∘ f_{w_{n-1}}`, so `w_{n-1}` is applied first.
//! Every quantity computed from a whole level (sup, image-pair set) is
//! independent of this convention.

use std::hash::{BuildHasher, Hasher};

use hashbrown::{DefaultHashBuilder, HashTable};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{coord_key, BoxDomain, MetricSpace, Point};

/// Default number of image pairs kept per level.
pub const DEFAULT_BUDGET: usize = 1 << 20;

/// A continuous map of the domain box, as an expression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapSpec {
    /// `x ↦ A x + b`.
    Affine {
        #[serde(rename = "A")]
        matrix: Vec<Vec<f64>>,
        #[serde(rename = "b")]
        offset: Vec<f64>,
    },
    /// Coordinatewise `x_i ↦ x_i^p`; defined on nonnegative coordinates only.
    Power {
        #[serde(rename = "p")]
        exponent: f64,
    },
    /// Projection onto the domain box.
    Clamp,
    /// `outer ∘ inner`.
    Compose {
        outer: Box<MapSpec>,
        inner: Box<MapSpec>,
    },
}

impl MapSpec {
    /// One-dimensional affine map `x ↦ slope·x + offset`.
    pub fn affine_1d(slope: f64, offset: f64) -> Self {
        MapSpec::Affine {
            matrix: vec![vec![slope]],
            offset: vec![offset],
        }
    }

    pub fn identity(dim: usize) -> Self {
        MapSpec::Affine {
            matrix: (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            offset: vec![0.0; dim],
        }
    }

    /// The constant map onto `value`.
    pub fn constant(value: &[f64]) -> Self {
        let dim = value.len();
        MapSpec::Affine {
            matrix: vec![vec![0.0; dim]; dim],
            offset: value.to_vec(),
        }
    }

    pub fn power(exponent: f64) -> Self {
        MapSpec::Power { exponent }
    }

    pub fn sqrt() -> Self {
        MapSpec::Power { exponent: 0.5 }
    }

    pub fn compose(outer: MapSpec, inner: MapSpec) -> Self {
        MapSpec::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    /// Checks matrix shapes and parameter ranges against the dimension.
    pub fn check_shape(&self, dim: usize) -> Result<()> {
        match self {
            MapSpec::Affine { matrix, offset } => {
                if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
                    return Err(Error::Map(format!("affine matrix must be {dim}x{dim}")));
                }
                if offset.len() != dim {
                    return Err(Error::Map(format!("affine offset must have {dim} entries")));
                }
                if matrix
                    .iter()
                    .flatten()
                    .chain(offset)
                    .any(|v| !v.is_finite())
                {
                    return Err(Error::Map("affine coefficients must be finite".into()));
                }
                Ok(())
            }
            MapSpec::Power { exponent } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::Map(format!(
                        "power exponent must be finite and positive, got {exponent}"
                    )));
                }
                Ok(())
            }
            MapSpec::Clamp => Ok(()),
            MapSpec::Compose { outer, inner } => {
                inner.check_shape(dim)?;
                outer.check_shape(dim)
            }
        }
    }

    /// Evaluates the map at `x`.
    pub fn eval(&self, domain: &BoxDomain, x: &[f64]) -> Result<Point> {
        if x.len() != domain.dim() {
            return Err(Error::Dimension {
                expected: domain.dim(),
                found: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        self.eval_into(domain, x, &mut out)?;
        Ok(Point::from_raw(out))
    }

    /// Writes `self(x)` into `out`. Both slices must have the domain's
    /// dimension.
    pub(crate) fn eval_into(&self, domain: &BoxDomain, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.eval_node(domain, x, out)?;
        if out.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric(format!("map produced {out:?} from {x:?}")));
        }
        Ok(())
    }

    fn eval_node(&self, domain: &BoxDomain, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            MapSpec::Affine { matrix, offset } => {
                for ((o, row), b) in out.iter_mut().zip(matrix).zip(offset) {
                    let mut acc = *b;
                    for (a, xi) in row.iter().zip(x) {
                        acc += a * xi;
                    }
                    *o = acc;
                }
            }
            MapSpec::Power { exponent } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    if *xi < 0.0 {
                        return Err(Error::NegativeBase { value: *xi });
                    }
                    *o = if *exponent == 0.5 {
                        xi.sqrt()
                    } else if *exponent == 1.0 {
                        *xi
                    } else {
                        xi.powf(*exponent)
                    };
                }
            }
            MapSpec::Clamp => {
                out.copy_from_slice(x);
                domain.clamp_in_place(out);
            }
            MapSpec::Compose { outer, inner } => {
                let mut mid = vec![0.0; x.len()];
                inner.eval_node(domain, x, &mut mid)?;
                outer.eval_node(domain, &mid, out)?;
            }
        }
        Ok(())
    }
}

/// Outcome of sampled self-map validation.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationReport {
    /// Every sampled image stayed in the box.
    Sampled { samples: usize },
    /// First image found outside the box.
    Violation {
        map_index: usize,
        input: Point,
        image: Point,
    },
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationReport::Sampled { .. })
    }
}

/// Evaluates every map at the box corners and on a regular grid and reports
/// the first image that leaves the box. Sample-based; a pass is not a proof.
pub fn validate_maps(
    space: &MetricSpace,
    maps: &[MapSpec],
    grid_points_per_axis: usize,
) -> Result<ValidationReport> {
    let domain = space.domain();
    let mut probes = domain.corners();
    probes.extend(domain.grid(grid_points_per_axis));
    for (map_index, m) in maps.iter().enumerate() {
        m.check_shape(domain.dim())
            .map_err(|e| Error::Map(format!("map {map_index}: {e}")))?;
        for x in &probes {
            let image = m
                .eval(domain, x)
                .map_err(|e| Error::Map(format!("map {map_index} at {:?}: {e}", x.coords())))?;
            if !domain.contains(&image) {
                return Ok(ValidationReport::Violation {
                    map_index,
                    input: x.clone(),
                    image,
                });
            }
        }
    }
    Ok(ValidationReport::Sampled {
        samples: probes.len() * maps.len(),
    })
}

/// Grid density used by [`Ifs::new`]: 11 nodes per axis, thinned in high
/// dimension so the grid stays below roughly 10^5 points.
pub fn default_validation_grid(dim: usize) -> usize {
    let mut per_axis = 11usize;
    while per_axis > 2 && (per_axis as f64).powi(dim as i32) > 1e5 {
        per_axis -= 1;
    }
    per_axis
}

/// A finite ordered family of self-maps of a metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ifs {
    space: MetricSpace,
    maps: Vec<MapSpec>,
    validation_grid: usize,
}

impl Ifs {
    /// Builds the system, rejecting maps that leave the box on the default
    /// validation grid.
    pub fn new(space: MetricSpace, maps: Vec<MapSpec>) -> Result<Self> {
        let grid = default_validation_grid(space.dim());
        Ifs::with_validation_grid(space, maps, grid)
    }

    pub fn with_validation_grid(
        space: MetricSpace,
        maps: Vec<MapSpec>,
        grid_points_per_axis: usize,
    ) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Map("an IFS needs at least one map".into()));
        }
        match validate_maps(&space, &maps, grid_points_per_axis)? {
            ValidationReport::Sampled { .. } => Ok(Ifs {
                space,
                maps,
                validation_grid: grid_points_per_axis,
            }),
            ValidationReport::Violation {
                map_index,
                input,
                image,
            } => Err(Error::NotSelfMap {
                map: map_index,
                input: input.into_coords(),
                image: image.into_coords(),
            }),
        }
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn domain(&self) -> &BoxDomain {
        self.space.domain()
    }

    pub fn maps(&self) -> &[MapSpec] {
        &self.maps
    }

    /// Number of maps in the family.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn validation_grid(&self) -> usize {
        self.validation_grid
    }

    /// Re-runs sampled validation at another density.
    pub fn validate(&self, grid_points_per_axis: usize) -> Result<ValidationReport> {
        validate_maps(&self.space, &self.maps, grid_points_per_axis)
    }

    pub fn eval_map(&self, index: usize, x: &[f64]) -> Result<Point> {
        let m = self.maps.get(index).ok_or(Error::Word {
            index,
            family_size: self.len(),
        })?;
        m.eval(self.domain(), x)
    }

    /// The one-map system `{maps[index]}` on the same space.
    pub fn single(&self, index: usize) -> Result<Ifs> {
        let m = self.maps.get(index).ok_or(Error::Word {
            index,
            family_size: self.len(),
        })?;
        Ok(Ifs {
            space: self.space.clone(),
            maps: vec![m.clone()],
            validation_grid: self.validation_grid,
        })
    }
}

/// Index sequence naming one composition in `F^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(indices: Vec<usize>, family_size: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Params("a word has length at least 1".into()));
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= family_size) {
            return Err(Error::Word { index, family_size });
        }
        Ok(Word(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All `family_size^n` words of length `n` in lexicographic order.
    pub fn all(family_size: usize, n: usize) -> impl Iterator<Item = Word> {
        let total = if n == 0 || family_size == 0 {
            0
        } else {
            family_size.pow(n as u32)
        };
        (0..total).map(move |mut code| {
            let mut idx = vec![0; n];
            for slot in idx.iter_mut().rev() {
                *slot = code % family_size;
                code /= family_size;
            }
            Word(idx)
        })
    }
}

/// Evaluates `f_{w0} ∘ … ∘ f_{w_{n-1}}` at `x`.
pub fn eval_word(ifs: &Ifs, word: &Word, x: &[f64]) -> Result<Point> {
    if let Some(&index) = word.indices().iter().find(|&&i| i >= ifs.len()) {
        return Err(Error::Word {
            index,
            family_size: ifs.len(),
        });
    }
    let domain = ifs.domain();
    let mut cur = x.to_vec();
    let mut next = vec![0.0; cur.len()];
    for &i in word.indices().iter().rev() {
        ifs.maps[i].eval_into(domain, &cur, &mut next)?;
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Point::from_raw(cur))
}

/// The deduplicated image pairs of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPairs {
    pub pairs: Vec<(Point, Point)>,
    /// False when the budget forced pairs to be dropped at some level.
    pub exact: bool,
}

/// Image pairs `{(f(x), f(y)) : f ∈ F^n}` with duplicates merged.
pub fn level_image_pairs(
    ifs: &Ifs,
    x: &[f64],
    y: &[f64],
    n: usize,
    budget: usize,
) -> Result<LevelPairs> {
    if n == 0 {
        return Err(Error::Params("level depth must be at least 1".into()));
    }
    let mut walker = LevelWalker::new(ifs, x, y, budget)?;
    for _ in 0..n {
        walker.advance()?;
    }
    Ok(LevelPairs {
        pairs: walker
            .pairs()
            .map(|(a, b)| (Point::from_raw(a.to_vec()), Point::from_raw(b.to_vec())))
            .collect(),
        exact: walker.is_exact(),
    })
}

/// `sup { d(f(x), f(y)) : f ∈ F^n }` and whether it was computed over the
/// whole level. An inexact value is a lower bound.
pub fn level_sup(ifs: &Ifs, x: &[f64], y: &[f64], n: usize, budget: usize) -> Result<(f64, bool)> {
    if n == 0 {
        return Err(Error::Params("level depth must be at least 1".into()));
    }
    let mut walker = LevelWalker::new(ifs, x, y, budget)?;
    for _ in 1..n {
        walker.advance()?;
    }
    walker.next_level_sup()
}

/// Incremental enumeration of `P_0 = {(x, y)}`,
/// `P_{m+1} = {(f_i(a), f_i(b)) : (a, b) ∈ P_m}`.
///
/// Pairs live in one flat buffer (`2·dim` values per pair) and are
/// deduplicated under exact coordinate equality. When `|P_m|·k` would exceed
/// the budget, only the `max(1, budget / k)` pairs of largest current
/// distance are expanded and the walker becomes inexact.
pub struct LevelWalker<'a> {
    ifs: &'a Ifs,
    budget: usize,
    dim: usize,
    level: usize,
    exact: bool,
    pairs: Vec<f64>,
    scratch: Vec<f64>,
    table: HashTable<(u32, u64)>,
    hasher: DefaultHashBuilder,
}

impl<'a> LevelWalker<'a> {
    pub fn new(ifs: &'a Ifs, x: &[f64], y: &[f64], budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::Params("budget must be at least 1".into()));
        }
        if budget > u32::MAX as usize {
            return Err(Error::Params(format!("budget above {}", u32::MAX)));
        }
        let domain = ifs.domain();
        domain.check_point(x)?;
        domain.check_point(y)?;
        let mut pairs = Vec::with_capacity(2 * x.len());
        pairs.extend_from_slice(x);
        pairs.extend_from_slice(y);
        Ok(LevelWalker {
            ifs,
            budget,
            dim: x.len(),
            level: 0,
            exact: true,
            pairs,
            scratch: Vec::new(),
            table: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.pairs.len() / self.stride()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.pairs
            .chunks_exact(self.stride())
            .map(move |p| p.split_at(self.dim))
    }

    /// Largest base distance over the current level.
    pub fn sup(&self) -> f64 {
        let space = self.ifs.space();
        self.pairs()
            .map(|(a, b)| space.raw_distance(a, b))
            .fold(0.0, f64::max)
    }

    fn stride(&self) -> usize {
        2 * self.dim
    }

    /// Indices of the pairs to expand, or `None` when all of them fit.
    fn expansion_selection(&self) -> Option<Vec<usize>> {
        let k = self.ifs.len();
        let len = self.len();
        if len.saturating_mul(k) <= self.budget {
            return None;
        }
        let keep = (self.budget / k).max(1);
        if keep >= len {
            return None;
        }
        let space = self.ifs.space();
        let dists: Vec<f64> = self
            .pairs()
            .map(|(a, b)| space.raw_distance(a, b))
            .collect();
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&i, &j| dists[j].total_cmp(&dists[i]).then(i.cmp(&j)));
        order.truncate(keep);
        order.sort_unstable();
        Some(order)
    }

    /// Sup over the next level without materializing it.
    pub fn next_level_sup(&self) -> Result<(f64, bool)> {
        let selection = self.expansion_selection();
        let mut exact = self.exact && selection.is_none();
        let expanded = selection.as_ref().map_or(self.len(), Vec::len);
        if expanded.saturating_mul(self.ifs.len()) > self.budget {
            exact = false;
        }
        let domain = self.ifs.domain();
        let space = self.ifs.space();
        let dim = self.dim;
        let mut fa = vec![0.0; dim];
        let mut fb = vec![0.0; dim];
        let mut sup = 0.0f64;
        let mut visit = |pair: &[f64]| -> Result<()> {
            let (a, b) = pair.split_at(dim);
            for m in self.ifs.maps() {
                m.eval_into(domain, a, &mut fa)?;
                m.eval_into(domain, b, &mut fb)?;
                sup = sup.max(space.raw_distance(&fa, &fb));
            }
            Ok(())
        };
        let stride = self.stride();
        match selection {
            None => self.pairs.chunks_exact(stride).try_for_each(&mut visit)?,
            Some(idx) => idx
                .iter()
                .try_for_each(|&i| visit(&self.pairs[i * stride..(i + 1) * stride]))?,
        }
        Ok((sup, exact))
    }

    /// Replaces `P_m` by `P_{m+1}`.
    pub fn advance(&mut self) -> Result<()> {
        let selection = self.expansion_selection();
        if selection.is_some() {
            self.exact = false;
        }
        let stride = self.stride();
        let dim = self.dim;
        let domain = self.ifs.domain();
        let maps = self.ifs.maps();
        let expanded = selection.as_ref().map_or(self.len(), Vec::len);

        let mut next = std::mem::take(&mut self.scratch);
        next.clear();
        next.reserve(expanded * maps.len() * stride);
        self.table.clear();
        self.table.reserve(expanded * maps.len(), |&(_, h)| h);
        let mut img = vec![0.0; stride];

        let mut expand = |pair: &[f64]| -> Result<()> {
            let (a, b) = pair.split_at(dim);
            for m in maps {
                {
                    let (fa, fb) = img.split_at_mut(dim);
                    m.eval_into(domain, a, fa)?;
                    m.eval_into(domain, b, fb)?;
                }
                let mut h = self.hasher.build_hasher();
                for c in &img {
                    h.write_u64(coord_key(*c));
                }
                let hash = h.finish();
                let found = self
                    .table
                    .find(hash, |&(idx, hh)| {
                        hh == hash
                            && next[idx as usize * stride..(idx as usize + 1) * stride]
                                .iter()
                                .zip(&img)
                                .all(|(p, q)| coord_key(*p) == coord_key(*q))
                    })
                    .is_some();
                if !found {
                    let idx = (next.len() / stride) as u32;
                    self.table.insert_unique(hash, (idx, hash), |&(_, h)| h);
                    next.extend_from_slice(&img);
                }
            }
            Ok(())
        };
        match &selection {
            None => self.pairs.chunks_exact(stride).try_for_each(&mut expand)?,
            Some(idx) => idx
                .iter()
                .try_for_each(|&i| expand(&self.pairs[i * stride..(i + 1) * stride]))?,
        }

        self.scratch = std::mem::replace(&mut self.pairs, next);
        self.level += 1;

        if self.len() > self.budget {
            self.truncate_to(self.budget);
            self.exact = false;
        }
        Ok(())
    }

    fn truncate_to(&mut self, keep: usize) {
        let stride = self.stride();
        let space = self.ifs.space();
        let dists: Vec<f64> = self
            .pairs()
            .map(|(a, b)| space.raw_distance(a, b))
            .collect();
        let mut order: Vec<usize> = (0..dists.len()).collect();
        order.sort_by(|&i, &j| dists[j].total_cmp(&dists[i]).then(i.cmp(&j)));
        order.truncate(keep);
        order.sort_unstable();
        let mut kept = Vec::with_capacity(keep * stride);
        for i in order {
            kept.extend_from_slice(&self.pairs[i * stride..(i + 1) * stride]);
        }
        self.pairs = kept;
    }
}
