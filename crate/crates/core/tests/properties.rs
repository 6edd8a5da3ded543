use proptest::prelude::*;
use remetrica::analysis::{family_lipschitz_estimate, lipschitz_estimate, PairSampler};
use remetrica::hutchinson::hutchinson_apply;
use remetrica::maps::{eval_word, level_image_pairs, level_sup, Word, DEFAULT_BUDGET};
use remetrica::remetric::{
    remetric_distance, single_map_distance, verify_lipschitz_bound, RemetricParams,
};
use remetrica::space::{hausdorff, BaseMetric, BoxDomain, FinitePointSet, MetricSpace, Point};
use remetrica::{Ifs, MapSpec};

fn unit() -> MetricSpace {
    MetricSpace::euclidean(BoxDomain::unit_interval())
}

fn box3() -> BoxDomain {
    BoxDomain::new(vec![0.0, -1.0, 2.0], vec![1.0, 3.0, 2.5]).unwrap()
}

fn arb_point3() -> impl Strategy<Value = Point> {
    (0.0..=1.0f64, -1.0..=3.0f64, 2.0..=2.5f64)
        .prop_map(|(a, b, c)| Point::new(vec![a, b, c]).unwrap())
}

fn arb_unit() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64]
}

fn arb_set(max: usize) -> impl Strategy<Value = FinitePointSet> {
    prop::collection::vec(0.0..=1.0f64, 1..max)
        .prop_map(|v| FinitePointSet::from_scalars(&v).unwrap())
}

/// One of a few small families on [0, 1], mixing affine and power maps.
fn arb_family() -> impl Strategy<Value = Vec<MapSpec>> {
    let map = prop_oneof![
        (-1.0..=1.0f64, 0.0..=1.0f64).prop_map(|(s, u)| {
            let lo = (-s).max(0.0);
            let hi = (1.0 - s).min(1.0);
            MapSpec::affine_1d(s, lo + u * (hi - lo))
        }),
        (0.2..=3.0f64).prop_map(MapSpec::power),
        Just(MapSpec::sqrt()),
        Just(MapSpec::affine_1d(-0.5, 1.0)),
    ];
    prop::collection::vec(map, 1..=3)
}

fn naive_hausdorff(space: &MetricSpace, a: &FinitePointSet, b: &FinitePointSet) -> f64 {
    let directed = |p: &FinitePointSet, q: &FinitePointSet| {
        p.iter()
            .map(|x| {
                q.iter()
                    .map(|y| space.base_distance(x, y).unwrap())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn base_metric_axioms(x in arb_point3(), y in arb_point3(), z in arb_point3(), normalized in any::<bool>()) {
        let base = if normalized { BaseMetric::NormalizedEuclidean } else { BaseMetric::Euclidean };
        let s = MetricSpace::new(box3(), base);
        let d = |a: &Point, b: &Point| s.base_distance(a, b).unwrap();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!(d(&x, &y) <= s.diameter_bound() * (1.0 + 1e-15));
        prop_assert!(d(&x, &z) <= (d(&x, &y) + d(&y, &z)) * (1.0 + 1e-12));
        if x != y {
            prop_assert!(d(&x, &y) > 0.0);
        }
    }

    #[test]
    fn normalization_is_idempotent_and_order_preserving(pts in prop::collection::vec(arb_point3(), 4..12)) {
        let s = MetricSpace::euclidean(box3());
        let n = s.normalize();
        let nn = n.normalize();
        let mut pairs = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                prop_assert_eq!(n.base_distance(&pts[i], &pts[j]).unwrap(), nn.base_distance(&pts[i], &pts[j]).unwrap());
                pairs.push((s.base_distance(&pts[i], &pts[j]).unwrap(), n.base_distance(&pts[i], &pts[j]).unwrap()));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            prop_assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn hausdorff_metric_and_oracle(a in arb_set(200), b in arb_set(200), c in arb_set(40)) {
        let s = unit();
        let ab = hausdorff(&s, &a, &b).unwrap();
        prop_assert_eq!(ab, naive_hausdorff(&s, &a, &b));
        prop_assert_eq!(ab, hausdorff(&s, &b, &a).unwrap());
        prop_assert_eq!(hausdorff(&s, &a, &a).unwrap(), 0.0);
        if ab == 0.0 {
            prop_assert!(a.set_eq(&b));
        }
        let ac = hausdorff(&s, &a, &c).unwrap();
        let cb = hausdorff(&s, &c, &b).unwrap();
        prop_assert!(ab <= (ac + cb) * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn level_pairs_match_word_enumeration(maps in arb_family(), x in arb_unit(), y in arb_unit(), n in 1usize..=6) {
        let ifs = Ifs::new(unit(), maps).unwrap();
        let level = level_image_pairs(&ifs, &[x], &[y], n, usize::MAX >> 40).unwrap();
        prop_assert!(level.exact);
        let by_words: Vec<(Point, Point)> = Word::all(ifs.len(), n)
            .map(|w| (eval_word(&ifs, &w, &[x]).unwrap(), eval_word(&ifs, &w, &[y]).unwrap()))
            .collect();
        prop_assert!(level.pairs.len() <= by_words.len());
        for p in &by_words {
            prop_assert!(level.pairs.contains(p));
        }
        for p in &level.pairs {
            prop_assert!(by_words.contains(p));
        }
        // merging duplicates leaves the supremum unchanged
        let word_max = by_words.iter().map(|(a, b)| (a[0] - b[0]).abs()).fold(0.0, f64::max);
        let (sup, exact) = level_sup(&ifs, &[x], &[y], n, DEFAULT_BUDGET).unwrap();
        prop_assert!(exact);
        prop_assert_eq!(sup, word_max);
    }

    #[test]
    fn level_sup_monotone_in_budget(maps in arb_family(), x in arb_unit(), y in arb_unit(), b in 1usize..40) {
        let ifs = Ifs::new(unit(), maps).unwrap();
        let small = level_sup(&ifs, &[x], &[y], 5, b).unwrap();
        let large = level_sup(&ifs, &[x], &[y], 5, 2 * b).unwrap();
        let full = level_sup(&ifs, &[x], &[y], 5, DEFAULT_BUDGET).unwrap();
        prop_assert!(small.0 <= large.0);
        prop_assert!(large.0 <= full.0);
        if small.1 {
            prop_assert_eq!(small.0, full.0);
        }
    }

    #[test]
    fn single_map_level_is_orbit_distance(maps in arb_family(), x in arb_unit(), y in arb_unit(), n in 1usize..=8) {
        let ifs = Ifs::new(unit(), vec![maps[0].clone()]).unwrap();
        let w = Word::new(vec![0; n], 1).unwrap();
        let fx = eval_word(&ifs, &w, &[x]).unwrap();
        let fy = eval_word(&ifs, &w, &[y]).unwrap();
        prop_assert_eq!(level_sup(&ifs, &[x], &[y], n, 1).unwrap(), ((fx[0] - fy[0]).abs(), true));
    }

    #[test]
    fn remetric_bracket_properties(maps in arb_family(), x in arb_unit(), y in arb_unit(), eps in 0.05..3.0f64, depth in 0usize..9) {
        let ifs = Ifs::new(unit(), maps).unwrap();
        let p = RemetricParams::new(eps, depth).unwrap();
        let p_next = RemetricParams::new(eps, depth + 1).unwrap();
        let p_looser = RemetricParams::new(eps * 1.5, depth).unwrap();
        let c = remetric_distance(&ifs, &p, &[x], &[y]).unwrap();
        let c_next = remetric_distance(&ifs, &p_next, &[x], &[y]).unwrap();
        let c_looser = remetric_distance(&ifs, &p_looser, &[x], &[y]).unwrap();
        prop_assert!(c.exact_levels);
        prop_assert!(c.lower <= c.upper);
        prop_assert!(c.lower >= (x - y).abs());
        prop_assert!(c_next.lower >= c.lower);
        prop_assert!(c_next.upper <= c.upper * (1.0 + 1e-15));
        prop_assert!(c_looser.lower <= c.lower);
        prop_assert_eq!(c, remetric_distance(&ifs, &p, &[y], &[x]).unwrap());
    }

    #[test]
    fn single_map_matches_general(maps in arb_family(), x in arb_unit(), y in arb_unit(), depth in 0usize..40) {
        let space = unit();
        let ifs = Ifs::new(space.clone(), vec![maps[0].clone()]).unwrap();
        let p = RemetricParams::new(0.5, depth).unwrap();
        prop_assert_eq!(
            single_map_distance(&maps[0], &space, &p, &[x], &[y]).unwrap(),
            remetric_distance(&ifs, &p, &[x], &[y]).unwrap()
        );
    }

    #[test]
    fn certified_lipschitz_inequality(maps in arb_family(), seed in any::<u64>(), eps in 0.1..2.0f64) {
        let ifs = Ifs::new(unit(), maps).unwrap();
        let p = RemetricParams::new(eps, 10).unwrap();
        let pairs = PairSampler::near_diagonal(seed, 16).sample(ifs.domain());
        let cert = verify_lipschitz_bound(&ifs, &p, &pairs).unwrap();
        prop_assert!(cert.passed(), "{:?}", cert);
    }

    #[test]
    fn lipschitz_estimate_monotone_in_sample(maps in arb_family(), seed in any::<u64>()) {
        let space = unit();
        let pairs = PairSampler::near_diagonal(seed, 24).sample(space.domain());
        let (head, _) = pairs.split_at(pairs.len() / 2);
        let m = &maps[0];
        let part = lipschitz_estimate(m, space.domain(), &space, head).unwrap();
        let whole = lipschitz_estimate(m, space.domain(), &space, &pairs).unwrap();
        prop_assert!(whole.value >= part.value);
    }

    #[test]
    fn family_level_one_is_max_over_maps(maps in arb_family(), seed in any::<u64>()) {
        let space = unit();
        let ifs = Ifs::new(space.clone(), maps.clone()).unwrap();
        let pairs = PairSampler::with_seed(seed).sample(space.domain());
        let fam = family_lipschitz_estimate(&ifs, 1, &space, &pairs, DEFAULT_BUDGET).unwrap();
        let best = maps
            .iter()
            .map(|m| lipschitz_estimate(m, space.domain(), &space, &pairs).unwrap().value)
            .fold(0.0, f64::max);
        prop_assert_eq!(fam.value, best);
    }

    #[test]
    fn affine_lipschitz_is_slope(slope in -1.0..=1.0f64, seed in any::<u64>(), k in 0i32..8) {
        let space = unit();
        let offset = if slope < 0.0 { -slope } else { 0.0 };
        let m = MapSpec::affine_1d(slope, offset);
        let mut sampler = PairSampler::with_seed(seed);
        sampler.ladder.clear();
        let pairs: Vec<_> = sampler
            .sample(space.domain())
            .into_iter()
            .filter(|(x, y)| (x[0] - y[0]).abs() > 1e-3)
            .collect();
        let est = lipschitz_estimate(&m, space.domain(), &space, &pairs).unwrap();
        prop_assert!((est.value - slope.abs()).abs() <= 1e-9);
        // dyadic slopes without offset are exact on every pair, near-diagonal included
        let dyadic = MapSpec::affine_1d(2f64.powi(-k), 0.0);
        let all = PairSampler::with_seed(seed).sample(space.domain());
        prop_assert_eq!(lipschitz_estimate(&dyadic, space.domain(), &space, &all).unwrap().value, 2f64.powi(-k));
    }

    #[test]
    fn affine_family_submultiplicative(a in 0.0..=1.0f64, b in 0.0..=1.0f64, m in 1usize..4, n in 1usize..4) {
        let space = unit();
        let ifs = Ifs::new(space.clone(), vec![MapSpec::affine_1d(a, 0.0), MapSpec::affine_1d(b, 1.0 - b)]).unwrap();
        // well-separated pairs keep rounding in the offsets out of the ratios
        let mut sampler = PairSampler::with_seed(0);
        sampler.ladder.clear();
        let pairs: Vec<_> = sampler
            .sample(space.domain())
            .into_iter()
            .filter(|(x, y)| (x[0] - y[0]).abs() > 1e-3)
            .collect();
        let est = |k| family_lipschitz_estimate(&ifs, k, &space, &pairs, DEFAULT_BUDGET).unwrap().value;
        prop_assert!(est(m + n) <= est(m) * est(n) + 1e-9);
    }

    #[test]
    fn hutchinson_monotone(a in arb_set(30), extra in arb_set(30)) {
        let ifs = Ifs::new(unit(), vec![MapSpec::sqrt(), MapSpec::affine_1d(0.5, 0.25)]).unwrap();
        let mut all: Vec<Point> = a.points().to_vec();
        all.extend(extra.points().iter().cloned());
        let b = FinitePointSet::new(all).unwrap();
        let fa = hutchinson_apply(&ifs, &a, 0.0).unwrap();
        let fb = hutchinson_apply(&ifs, &b, 0.0).unwrap();
        prop_assert!(fa.is_subset(&fb));
        prop_assert!(fa.len() <= ifs.len() * a.len());
    }

    #[test]
    fn hutchinson_contracts_hausdorff(a in arb_set(40), b in arb_set(40), c1 in 0.0..0.9f64, c2 in 0.0..0.9f64) {
        let space = unit();
        let ifs = Ifs::new(space.clone(), vec![MapSpec::affine_1d(c1, 0.0), MapSpec::affine_1d(-c2, 1.0)]).unwrap();
        let c = c1.max(c2);
        let fa = hutchinson_apply(&ifs, &a, 0.0).unwrap();
        let fb = hutchinson_apply(&ifs, &b, 0.0).unwrap();
        prop_assert!(hausdorff(&space, &fa, &fb).unwrap() <= c * hausdorff(&space, &a, &b).unwrap() + 1e-12);
    }
}

#[test]
fn cantor_approximants_are_nested() {
    let cantor = Ifs::new(
        unit(),
        vec![
            MapSpec::affine_1d(1.0 / 3.0, 0.0),
            MapSpec::affine_1d(1.0 / 3.0, 2.0 / 3.0),
        ],
    )
    .unwrap();
    let mut a = FinitePointSet::from_scalars(&[0.0, 1.0]).unwrap();
    for _ in 0..8 {
        let next = hutchinson_apply(&cantor, &a, 0.0).unwrap();
        assert!(a.is_subset(&next));
        a = next;
    }
}
