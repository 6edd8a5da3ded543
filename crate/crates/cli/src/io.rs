use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use remetrica::{BoxDomain, FinitePointSet, IfsDocument, Point};
use serde::Deserialize;

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn load_document(path: &Path) -> Result<IfsDocument, CliError> {
    IfsDocument::from_json(&read_text(path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn parse_coords(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::input(format!("bad number {t:?}: {e}")))
        })
        .collect()
}

pub fn parse_point(text: &str) -> Result<Point, CliError> {
    Point::new(parse_coords(text)?).map_err(CliError::from)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Scalar(f64),
    Coords(Vec<f64>),
}

impl PointRepr {
    fn into_point(self) -> remetrica::Result<Point> {
        match self {
            PointRepr::Scalar(v) => Point::new(vec![v]),
            PointRepr::Coords(c) => Point::new(c),
        }
    }
}

/// Reads `[[x, y], ...]` where every point is a number or an array of numbers.
pub fn load_pairs(path: &Path) -> Result<Vec<(Point, Point)>, CliError> {
    let raw: Vec<(PointRepr, PointRepr)> = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::input(format!("{}: parse: {e}", path.display())))?;
    raw.into_iter()
        .map(|(x, y)| Ok((x.into_point()?, y.into_point()?)))
        .collect::<remetrica::Result<_>>()
        .map_err(CliError::from)
}

/// One point per line, coordinates separated by commas. Blank lines and
/// lines starting with `#` are skipped.
pub fn load_point_csv(path: &Path) -> Result<FinitePointSet, CliError> {
    let text = read_text(path)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = parse_point(line)
            .map_err(|e| CliError::input(format!("{}:{}: {}", path.display(), i + 1, e.message)))?;
        points.push(p);
    }
    FinitePointSet::new(points).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn points_csv(set: &FinitePointSet) -> String {
    let mut out = String::new();
    for p in set.iter() {
        let row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

const VIEW: f64 = 1000.0;
const MARGIN: f64 = 20.0;

fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        MARGIN + (VIEW - 2.0 * MARGIN) * (v - lo) / (hi - lo)
    } else {
        VIEW / 2.0
    }
}

/// Scatter plot of the first two coordinates, scaled from the domain box
/// to a 1000×1000 viewport. One-dimensional sets are drawn on the midline.
pub fn points_svg(set: &FinitePointSet, domain: &BoxDomain) -> String {
    let lo = domain.lower();
    let hi = domain.upper();
    let mut out = String::new();
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" viewBox=\"0 0 1000 1000\">\n",
    );
    out.push_str("<rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n");
    for p in set.iter() {
        let cx = scale(p[0], lo[0], hi[0]);
        let cy = if p.dim() > 1 {
            VIEW - scale(p[1], lo[1], hi[1])
        } else {
            VIEW / 2.0
        };
        let _ = writeln!(
            out,
            "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"1.5\" fill=\"black\"/>"
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
