use remetrica::analysis::uniform_modulus_probe;
use remetrica::hutchinson::attractor_iterate;
use remetrica::maps::ValidationReport;
use remetrica::remetric::DEFAULT_WORK_FACTOR;
use remetrica::{
    family_lipschitz_estimate, jsr_estimate, lipschitz_estimate, modulus_probe, remetric_distance,
    verify_lipschitz_bound, Distance, Ifs, IfsDocument, LoggedMetric, PairSampler, Point,
    RemetricParams, TruncatedRemetric,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::io;
use crate::{CliError, Outcome};

pub fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Remetric(a) => remetric(a),
        Command::Verify(a) => verify(a),
        Command::Lipschitz(a) => lipschitz(a),
        Command::Jsr(a) => jsr(a),
        Command::Attractor(a) => attractor(a),
        Command::Modulus(a) => modulus(a),
        Command::Validate(a) => validate(a),
    }
}

fn load_ifs(doc: &DocArg) -> Result<Ifs, CliError> {
    io::load_document(&doc.doc)?
        .to_ifs()
        .map_err(|e| CliError::input(format!("{}: {e}", doc.doc.display())))
}

const DEFAULT_TAIL_TOL: f64 = 1e-6;

fn params(ifs: &Ifs, a: &DepthArgs) -> Result<(RemetricParams, Value), CliError> {
    match a.depth {
        Some(depth) => {
            let p = RemetricParams::new(a.epsilon, depth)?.with_budget(a.budget)?;
            let tail = remetrica::tail_bound(ifs.space(), a.epsilon, depth)?;
            Ok((p, json!({ "depth": depth, "tail_bound": tail })))
        }
        None => {
            let tol = a.tail_tol.unwrap_or(DEFAULT_TAIL_TOL);
            let cap = a
                .work_cap
                .unwrap_or_else(|| a.budget.saturating_mul(DEFAULT_WORK_FACTOR));
            let (p, sel) = RemetricParams::for_tail_tolerance(ifs, a.epsilon, tol, a.budget, cap)?;
            Ok((p, serde_json::to_value(sel).expect("selection serializes")))
        }
    }
}

fn remetric(a: RemetricArgs) -> Result<Outcome, CliError> {
    let ifs = load_ifs(&a.doc)?;
    let (p, selection) = params(&ifs, &a.depth)?;
    let pairs = match (&a.pairs, &a.x, &a.y) {
        (Some(path), _, _) => io::load_pairs(path)?,
        (None, Some(x), Some(y)) => vec![(io::parse_point(x)?, io::parse_point(y)?)],
        _ => return Err(CliError::input("give --pairs or both --x and --y")),
    };
    let records = pairs
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let c = remetric_distance(&ifs, &p, x, y)
                .map_err(|e| CliError::input(format!("pair {i}: {e}")))?;
            Ok(json!({ "x": x, "y": y, "lower": c.lower, "upper": c.upper, "exact": c.exact_levels }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Outcome::ok(json!({
        "epsilon": p.epsilon(),
        "budget": p.budget(),
        "selection": selection,
        "records": records,
    })))
}

fn verify(a: VerifyArgs) -> Result<Outcome, CliError> {
    let ifs = load_ifs(&a.doc)?;
    let (p, selection) = params(&ifs, &a.depth)?;
    let pairs =
        PairSampler::sized(a.sample.seed, a.sample.samples, ifs.domain()).sample(ifs.domain());
    let cert = verify_lipschitz_bound(&ifs, &p, &pairs)?;
    let passed = cert.passed();
    Ok(Outcome {
        body: crate::Body::Json(json!({
            "passed": passed,
            "seed": a.sample.seed,
            "selection": selection,
            "certificate": cert,
        })),
        passed,
    })
}

fn sample(ifs: &Ifs, s: &SampleArgs) -> Vec<(Point, Point)> {
    PairSampler::sized(s.seed, s.samples, ifs.domain()).sample(ifs.domain())
}

fn metric_params(m: &MetricArgs) -> Result<RemetricParams, CliError> {
    Ok(RemetricParams::new(m.epsilon, m.depth)?.with_budget(m.budget)?)
}

fn lipschitz(a: LipschitzArgs) -> Result<Outcome, CliError> {
    let ifs = load_ifs(&a.doc)?;
    let pairs = sample(&ifs, &a.sample);
    let remetric;
    let metric: &dyn Distance = match a.metric.metric {
        MetricChoice::Base => ifs.space(),
        MetricChoice::Remetric => {
            remetric = TruncatedRemetric {
                ifs: &ifs,
                params: metric_params(&a.metric)?,
            };
            &remetric
        }
    };
    let est = match (a.map_index, a.family_depth) {
        (Some(i), _) => {
            let map = ifs.maps().get(i).ok_or_else(|| {
                CliError::input(format!("map index {i} out of range for {} maps", ifs.len()))
            })?;
            lipschitz_estimate(map, ifs.domain(), metric, &pairs)?
        }
        (None, Some(n)) => family_lipschitz_estimate(&ifs, n, metric, &pairs, a.metric.budget)?,
        (None, None) => return Err(CliError::input("give --map-index or --family-depth")),
    };
    Ok(Outcome::ok(
        serde_json::to_value(est).expect("estimate serializes"),
    ))
}

fn jsr(a: JsrArgs) -> Result<Outcome, CliError> {
    let ifs = load_ifs(&a.doc)?;
    let pairs = sample(&ifs, &a.sample);
    let est = match a.metric.metric {
        MetricChoice::Base => jsr_estimate(&ifs, ifs.space(), &pairs, a.nmax, a.metric.budget)?,
        MetricChoice::Remetric => {
            let m = TruncatedRemetric {
                ifs: &ifs,
                params: metric_params(&a.metric)?,
            };
            jsr_estimate(&ifs, &m, &pairs, a.nmax, a.metric.budget)?
        }
    };
    Ok(Outcome::ok(
        serde_json::to_value(est).expect("estimate serializes"),
    ))
}

enum OutFormat {
    Csv,
    Svg,
}

fn out_format(path: &std::path::Path) -> Result<OutFormat, CliError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => Ok(OutFormat::Csv),
        Some(e) if e.eq_ignore_ascii_case("svg") => Ok(OutFormat::Svg),
        _ => Err(CliError::input(format!(
            "{}: output must end in .csv or .svg",
            path.display()
        ))),
    }
}

fn attractor(a: AttractorArgs) -> Result<Outcome, CliError> {
    let ifs = load_ifs(&a.doc)?;
    let formats = a
        .out
        .iter()
        .map(|p| out_format(p))
        .collect::<Result<Vec<_>, _>>()?;
    let initial = match &a.seed_set {
        Some(path) => io::load_point_csv(path)?,
        None => remetrica::FinitePointSet::new(ifs.domain().corners())?,
    };
    let remetric = match a.remetric_epsilon {
        Some(eps) => Some(TruncatedRemetric {
            ifs: &ifs,
            params: RemetricParams::new(eps, a.remetric_depth)?,
        }),
        None => None,
    };
    let mut metrics = vec![LoggedMetric::new("base", ifs.space())];
    if let Some(m) = &remetric {
        metrics.push(LoggedMetric::new("remetric", m));
    }
    let (set, log) = attractor_iterate(&ifs, &initial, a.steps, a.snap, &metrics, a.size_cap)?;
    for (path, fmt) in a.out.iter().zip(&formats) {
        let text = match fmt {
            OutFormat::Csv => io::points_csv(&set),
            OutFormat::Svg => io::points_svg(&set, ifs.domain()),
        };
        io::write_file(path, &text)?;
    }
    Ok(Outcome::ok(json!({
        "final_size": set.len(),
        "outputs": a.out,
        "log": log,
    })))
}

fn modulus(a: ModulusArgs) -> Result<Outcome, CliError> {
    let ifs = load_ifs(&a.doc)?;
    let radii = io::parse_coords(&a.radii)?;
    let value = match (&a.point, a.grid) {
        (Some(point), _) => {
            let x = io::parse_point(point)?;
            let probe = modulus_probe(
                &ifs,
                a.level,
                &x,
                a.eps_out,
                &radii,
                a.seed,
                a.random_samples,
            )?;
            json!({ "delta": probe.accepted, "probe": probe })
        }
        (None, Some(grid)) => {
            let probe = uniform_modulus_probe(
                &ifs,
                a.level,
                a.eps_out,
                &radii,
                grid,
                a.seed,
                a.random_samples,
            )?;
            json!({ "delta": probe.min_delta, "uniform": probe })
        }
        (None, None) => return Err(CliError::input("give --point or --grid")),
    };
    Ok(Outcome::ok(value))
}

fn validate(a: ValidateArgs) -> Result<Outcome, CliError> {
    let ifs = load_ifs(&a.doc)?;
    let grid = a.grid.unwrap_or(ifs.validation_grid());
    let samples = match ifs.validate(grid)? {
        ValidationReport::Sampled { samples } => samples,
        ValidationReport::Violation {
            map_index,
            input,
            image,
        } => {
            return Err(CliError::input(format!(
                "{}: map {map_index} sends {:?} to {:?}, outside the domain",
                a.doc.doc.display(),
                input.coords(),
                image.coords()
            )))
        }
    };
    if a.canonical {
        return Ok(Outcome::raw(
            IfsDocument::from_ifs(&ifs).to_canonical_json(),
        ));
    }
    Ok(Outcome::ok(json!({
        "valid": true,
        "dim": ifs.space().dim(),
        "maps": ifs.len(),
        "grid_per_axis": grid,
        "samples": samples,
    })))
}
