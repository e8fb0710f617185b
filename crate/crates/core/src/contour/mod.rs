//! Sampling regions on regular grids and extracting their zero level sets.

mod csv;
mod svg;

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::Region;
use crate::Scalar;

pub use csv::{contour_csv, field_csv, parse_field_csv};
pub use svg::{render_svg, Layer, SvgStyle};

/// Values of a region's function at the nodes of a regular grid, stored
/// with the first axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<S> {
    bounds: Vec<(S, S)>,
    resolution: Vec<usize>,
    values: Vec<S>,
    names: Vec<String>,
}

impl<S: Scalar> ScalarField<S> {
    pub fn new(bounds: Vec<(S, S)>, resolution: Vec<usize>, values: Vec<S>, names: Vec<String>) -> Result<Self> {
        if bounds.len() != resolution.len() || names.len() != bounds.len() || bounds.is_empty() {
            return Err(Error::InvalidGrid("bounds, resolution and names must have one entry per axis".into()));
        }
        if bounds.iter().any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::InvalidGrid("each axis needs finite min < max".into()));
        }
        if resolution.iter().any(|&n| n < 2) {
            return Err(Error::InvalidGrid("each axis needs at least 2 nodes".into()));
        }
        let count: usize = resolution.iter().product();
        if values.len() != count {
            return Err(Error::InvalidGrid(format!("expected {count} values, got {}", values.len())));
        }
        Ok(Self { bounds, resolution, values, names })
    }

    pub fn bounds(&self) -> &[(S, S)] {
        &self.bounds
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coordinate(&self, axis: usize, i: usize) -> S {
        node_coordinate(self.bounds[axis], self.resolution[axis], i)
    }

    /// Grid spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> S {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / S::from_usize_lossy(self.resolution[axis] - 1)
    }

    /// Value at multi-index `idx`.
    pub fn at(&self, idx: &[usize]) -> S {
        let mut flat = 0;
        for axis in (0..idx.len()).rev() {
            flat = flat * self.resolution[axis] + idx[axis];
        }
        self.values[flat]
    }

    /// Coordinates of the node at flat position `flat`.
    pub fn node(&self, mut flat: usize) -> Vec<S> {
        (0..self.dim())
            .map(|axis| {
                let n = self.resolution[axis];
                let i = flat % n;
                flat /= n;
                self.coordinate(axis, i)
            })
            .collect()
    }

    /// Share of nodes with value `>= 0`.
    pub fn inside_fraction(&self) -> f64 {
        let inside = self.values.iter().filter(|&&v| v >= S::zero()).count();
        inside as f64 / self.values.len() as f64
    }
}

fn node_coordinate<S: Scalar>((lo, hi): (S, S), n: usize, i: usize) -> S {
    lo + S::from_usize_lossy(i) * (hi - lo) / S::from_usize_lossy(n - 1)
}

/// Evaluates `region` at every node of the grid spanned by `bounds` and
/// `resolution` (2 or 3 axes). Rows are computed in parallel; the result is
/// identical to a sequential sweep.
pub fn grid_eval<S: Scalar>(region: &Region<S>, bounds: &[(S, S)], resolution: &[usize]) -> Result<ScalarField<S>> {
    let d = bounds.len();
    if !(2..=3).contains(&d) {
        return Err(Error::DimensionMismatch { expected: 2, found: d });
    }
    if region.dim() != d {
        return Err(Error::DimensionMismatch { expected: region.dim(), found: d });
    }
    if resolution.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: resolution.len() });
    }
    // validates bounds and resolution before any work
    let names: Vec<String> = region.var_names().iter().map(|s| s.to_string()).collect();
    let count: usize = resolution.iter().product();
    ScalarField::new(bounds.to_vec(), resolution.to_vec(), vec![S::zero(); count], names.clone())?;

    let nx = resolution[0];
    let rows = count / nx;
    let coords: Vec<Vec<S>> =
        (0..d).map(|a| (0..resolution[a]).map(|i| node_coordinate(bounds[a], resolution[a], i)).collect()).collect();
    let values: Vec<Vec<S>> = (0..rows)
        .into_par_iter()
        .map(|row| {
            let mut point = vec![S::zero(); d];
            let mut rest = row;
            for a in 1..d {
                point[a] = coords[a][rest % resolution[a]];
                rest /= resolution[a];
            }
            (0..nx)
                .map(|i| {
                    point[0] = coords[0][i];
                    region.eval_at(&point)
                })
                .collect::<Result<Vec<S>>>()
        })
        .collect::<Result<_>>()?;
    ScalarField::new(bounds.to_vec(), resolution.to_vec(), values.concat(), names)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline<S> {
    pub points: Vec<[S; 2]>,
    /// The last point connects back to the first.
    pub closed: bool,
}

/// Zero level set of a 2D field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContourSet<S> {
    pub polylines: Vec<Polyline<S>>,
}

impl<S: Scalar> ContourSet<S> {
    pub fn iso_value(&self) -> S {
        S::zero()
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.polylines.iter().map(|p| p.points.len()).sum()
    }
}

/// Edge ids: horizontal edge from node `(i, j)` is `2 (j nx + i)`, vertical
/// edge from node `(i, j)` is `2 (j nx + i) + 1`.
fn crossing<S: Scalar>(field: &ScalarField<S>, edge: usize) -> [S; 2] {
    let nx = field.resolution[0];
    let node = edge / 2;
    let (i, j) = (node % nx, node / nx);
    let (i2, j2) = if edge % 2 == 0 { (i + 1, j) } else { (i, j + 1) };
    let a = field.values[j * nx + i];
    let b = field.values[j2 * nx + i2];
    let t = a / (a - b);
    let (x0, y0) = (field.coordinate(0, i), field.coordinate(1, j));
    let (x1, y1) = (field.coordinate(0, i2), field.coordinate(1, j2));
    [x0 + t * (x1 - x0), y0 + t * (y1 - y0)]
}

/// Extracts the zero level set of a 2D field. A node counts as positive when
/// its value is `>= 0`; saddle cells are split according to the sign of the
/// mean of their four corners.
pub fn marching_squares<S: Scalar>(field: &ScalarField<S>) -> Result<ContourSet<S>> {
    if field.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: field.dim() });
    }
    let (nx, ny) = (field.resolution[0], field.resolution[1]);
    let pos = |i: usize, j: usize| field.values[j * nx + i] >= S::zero();
    let mut segments: Vec<[usize; 2]> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corners = [pos(i, j), pos(i + 1, j), pos(i + 1, j + 1), pos(i, j + 1)];
            let bottom = 2 * (j * nx + i);
            let top = 2 * ((j + 1) * nx + i);
            let left = 2 * (j * nx + i) + 1;
            let right = 2 * (j * nx + i + 1) + 1;
            // edge k joins corner k and corner k+1
            let edges = [bottom, right, top, left];
            let cut: Vec<usize> = (0..4).filter(|&k| corners[k] != corners[(k + 1) % 4]).map(|k| edges[k]).collect();
            match cut.len() {
                0 => {}
                2 => segments.push([cut[0], cut[1]]),
                _ => {
                    let centre = (field.values[j * nx + i]
                        + field.values[j * nx + i + 1]
                        + field.values[(j + 1) * nx + i + 1]
                        + field.values[(j + 1) * nx + i])
                        / S::lit(4.0);
                    // corners 0 and 2 share a sign; if the centre joins them,
                    // corners 1 and 3 are cut off individually
                    let centre_pos = centre >= S::zero();
                    if centre_pos == corners[0] {
                        segments.push([bottom, right]);
                        segments.push([top, left]);
                    } else {
                        segments.push([left, bottom]);
                        segments.push([right, top]);
                    }
                }
            }
        }
    }
    Ok(ContourSet { polylines: chain(field, &segments) })
}

fn chain<S: Scalar>(field: &ScalarField<S>, segments: &[[usize; 2]]) -> Vec<Polyline<S>> {
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            by_edge.entry(e).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start: usize, from_edge: usize, used: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut edges = vec![from_edge];
        let mut seg = start;
        let mut edge = from_edge;
        loop {
            used[seg] = true;
            let next_edge = if segments[seg][0] == edge { segments[seg][1] } else { segments[seg][0] };
            if next_edge == from_edge {
                return (edges, true);
            }
            edges.push(next_edge);
            edge = next_edge;
            match by_edge[&edge].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return (edges, false),
            }
        }
    };
    // open curves start at an edge owned by a single segment
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        if let Some(&end) = segments[s].iter().find(|e| by_edge[*e].len() == 1) {
            let (edges, closed) = walk(s, end, &mut used);
            out.push((edges, closed));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            let (edges, closed) = walk(s, segments[s][0], &mut used);
            out.push((edges, closed));
        }
    }
    out.into_iter()
        .map(|(edges, closed)| Polyline { points: edges.iter().map(|&e| crossing(field, e)).collect(), closed })
        .collect()
}

/// The 2D field of a 3D region on the plane `third = z`.
pub fn slice_field<S: Scalar>(
    region: &Region<S>,
    bounds: &[(S, S)],
    resolution: [usize; 2],
    z: S,
) -> Result<ScalarField<S>> {
    if region.dim() != 3 || bounds.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: region.dim().min(bounds.len()) });
    }
    let third = region.vars()[2].name.clone();
    let plane = region.fix(&third, z)?;
    grid_eval(&plane, &bounds[..2], &resolution)
}

/// Heights of `n` evenly spaced slices through `(lo, hi)`, ends included;
/// a single slice sits at the midpoint.
pub fn slice_levels<S: Scalar>((lo, hi): (S, S), n: usize) -> Vec<S> {
    if n == 1 {
        return vec![(lo + hi) / S::lit(2.0)];
    }
    (0..n).map(|k| node_coordinate((lo, hi), n, k)).collect()
}

/// Contours of a 3D region on `n_slices` planes of constant third variable.
#[allow(clippy::type_complexity)]
pub fn slice_contours_3d<S: Scalar>(
    region: &Region<S>,
    bounds: &[(S, S)],
    resolution: [usize; 2],
    n_slices: usize,
) -> Result<Vec<(S, ContourSet<S>, ScalarField<S>)>> {
    if n_slices == 0 {
        return Err(Error::InvalidArgument("at least one slice is required".into()));
    }
    if bounds.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: bounds.len() });
    }
    slice_levels(bounds[2], n_slices)
        .into_par_iter()
        .map(|z| {
            let field = slice_field(region, bounds, resolution, z)?;
            Ok((z, marching_squares(&field)?, field))
        })
        .collect()
}
