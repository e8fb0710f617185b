use std::fmt::Write as _;

use super::{ContourSet, ScalarField};
use crate::error::{Error, Result};
use crate::Scalar;

fn comments(out: &mut String, header: &[String]) {
    for line in header {
        for part in line.lines() {
            let _ = writeln!(out, "# {part}");
        }
    }
}

/// One row per node (coordinates, then value), first axis fastest. Grid
/// metadata goes in `#` lines so [`parse_field_csv`] can rebuild the field.
pub fn field_csv<S: Scalar>(field: &ScalarField<S>, header: &[String]) -> String {
    let mut out = String::new();
    comments(&mut out, header);
    let res: Vec<String> = field.resolution().iter().map(usize::to_string).collect();
    let bounds: Vec<String> = field.bounds().iter().map(|(lo, hi)| format!("{lo:?}:{hi:?}")).collect();
    let _ = writeln!(out, "# resolution = {}", res.join(","));
    let _ = writeln!(out, "# bounds = {}", bounds.join(","));
    let _ = writeln!(out, "{},value", field.names().join(","));
    for (flat, v) in field.values().iter().enumerate() {
        for c in field.node(flat) {
            let _ = write!(out, "{c:?},");
        }
        let _ = writeln!(out, "{v:?}");
    }
    out
}

pub fn contour_csv<S: Scalar>(contours: &ContourSet<S>, header: &[String]) -> String {
    let mut out = String::new();
    comments(&mut out, header);
    let _ = writeln!(out, "polyline,closed,x,y");
    for (id, line) in contours.polylines.iter().enumerate() {
        for p in &line.points {
            let _ = writeln!(out, "{id},{},{:?},{:?}", line.closed, p[0], p[1]);
        }
    }
    out
}

pub fn parse_field_csv<S: Scalar>(text: &str) -> Result<ScalarField<S>> {
    let bad = |why: String| Error::InvalidGrid(format!("field csv: {why}"));
    let mut resolution: Option<Vec<usize>> = None;
    let mut bounds: Option<Vec<(S, S)>> = None;
    let mut names: Option<Vec<String>> = None;
    let mut values = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once('=') {
                match k.trim() {
                    "resolution" => {
                        resolution = Some(
                            v.trim()
                                .split(',')
                                .map(|n| n.parse().map_err(|_| bad(format!("bad resolution {n}"))))
                                .collect::<Result<_>>()?,
                        )
                    }
                    "bounds" => {
                        bounds = Some(
                            v.trim()
                                .split(',')
                                .map(|b| {
                                    let (lo, hi) = b.split_once(':').ok_or_else(|| bad(format!("bad bound {b}")))?;
                                    let p = |t: &str| t.parse::<S>().map_err(|_| bad(format!("bad number {t}")));
                                    Ok((p(lo)?, p(hi)?))
                                })
                                .collect::<Result<_>>()?,
                        )
                    }
                    _ => {}
                }
            }
            continue;
        }
        if names.is_none() {
            let mut cols: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if cols.pop().as_deref() != Some("value") {
                return Err(bad("last column must be value".into()));
            }
            names = Some(cols);
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or_default();
        values.push(last.trim().parse::<S>().map_err(|_| bad(format!("bad value {last}")))?);
    }
    ScalarField::new(
        bounds.ok_or_else(|| bad("missing bounds".into()))?,
        resolution.ok_or_else(|| bad("missing resolution".into()))?,
        values,
        names.ok_or_else(|| bad("missing header row".into()))?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip() {
        let values: Vec<f64> = (0..12).map(|k| (k as f64 * 0.7).sin() / 3.0).collect();
        let f =
            ScalarField::new(vec![(-1.0, 2.0), (0.1, 0.3)], vec![4, 3], values, vec!["x".into(), "y".into()]).unwrap();
        let text = field_csv(&f, &["made by a test".to_string()]);
        assert!(text.starts_with("# made by a test\n"));
        assert!(text.contains("\nx,y,value\n-1.0,0.1,0.0\n"));
        let back: ScalarField<f64> = parse_field_csv(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn contour_rows() {
        let c = ContourSet {
            polylines: vec![super::super::Polyline { points: vec![[0.5, 1.0], [1.5, 2.0]], closed: false }],
        };
        assert_eq!(contour_csv(&c, &[]), "polyline,closed,x,y\n0,false,0.5,1.0\n0,false,1.5,2.0\n");
    }
}
