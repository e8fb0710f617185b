//! Base-2 Sobol sequences (unscrambled, Gray-code order) and affine scaling
//! into parameter boxes.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::Scalar;

/// Direction-number table shipped with the crate; see the file header for
/// the row format.
pub const DIRECTION_TABLE: &str = include_str!("../../data/sobol_directions.txt");

/// SHA-256 of [`DIRECTION_TABLE`].
pub const DIRECTION_TABLE_SHA256: &str = "b806a129615492fc93be88aa4a010adc8166cb59042f5dda8ca3aa3f2fe5583b";

pub const MAX_DIM: usize = 16;

const BITS: usize = 32;

/// Convention: index 0 (the origin) is skipped.
pub const DEFAULT_SKIP: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<S> {
    pub dim: usize,
    pub points: Vec<Vec<S>>,
    /// Sequence index of the first point.
    pub skip: u64,
    /// Box the points were mapped into, `None` while still in `[0, 1)^d`.
    pub bounds: Option<Vec<(S, S)>>,
}

impl<S> SampleSet<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionRow {
    pub dim: usize,
    pub degree: usize,
    pub coeffs: u32,
    pub m: Vec<u32>,
}

/// Parses the direction-number table format.
pub fn parse_direction_table(text: &str) -> Result<Vec<DirectionRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: &str| Error::InvalidArgument(format!("direction table line {}: {why}", lineno + 1));
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<u32>().map_err(|_| bad("non-integer field")))
            .collect::<Result<Vec<_>>>()?;
        if nums.len() < 3 {
            return Err(bad("too few fields"));
        }
        let (dim, degree, coeffs) = (nums[0] as usize, nums[1] as usize, nums[2]);
        let m = nums[3..].to_vec();
        if m.len() != degree {
            return Err(bad("m count differs from degree"));
        }
        if m.iter().enumerate().any(|(i, &mi)| mi % 2 == 0 || (mi as u64) >= (1u64 << (i + 1))) {
            return Err(bad("m_i must be odd and below 2^i"));
        }
        if dim != rows.len() + 1 {
            return Err(bad("dimensions must be consecutive from 1"));
        }
        rows.push(DirectionRow { dim, degree, coeffs, m });
    }
    Ok(rows)
}

/// Expands one table row into the 32 direction integers `v_1..v_32`.
fn directions(row: &DirectionRow) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    let s = row.degree;
    if s == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    for k in 0..BITS.min(s) {
        v[k] = row.m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (row.coeffs >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

fn table() -> &'static [[u32; BITS]] {
    static TABLE: OnceLock<Vec<[u32; BITS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        parse_direction_table(DIRECTION_TABLE)
            .expect("bundled direction table is well formed")
            .iter()
            .map(directions)
            .collect()
    })
}

fn to_unit<S: Scalar>(x: u32) -> S {
    let v = S::lit(x as f64 / 4294967296.0);
    // narrow types can round up to 1
    if v >= S::one() {
        S::one() - S::epsilon() / S::lit(2.0)
    } else {
        v
    }
}

/// `n` points of the `d`-dimensional sequence starting at index `skip`.
///
/// Points are produced in Gray-code order, so with `skip = 1` the first
/// point is `(0.5, ..., 0.5)`.
pub fn sobol<S: Scalar>(d: usize, n: usize, skip: u64) -> Result<SampleSet<S>> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::DimensionUnsupported(d));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if skip.checked_add(n as u64).map_or(true, |end| end > 1u64 << BITS) {
        return Err(Error::TooManyPoints);
    }
    let dirs = &table()[..d];
    // state at index `skip`: XOR of directions selected by gray(skip)
    let gray = skip ^ (skip >> 1);
    let mut state: Vec<u32> =
        dirs.iter().map(|v| (0..BITS).filter(|&b| (gray >> b) & 1 == 1).fold(0u32, |acc, b| acc ^ v[b])).collect();
    let mut points = Vec::with_capacity(n);
    let mut index = skip;
    for _ in 0..n {
        points.push(state.iter().map(|&x| to_unit::<S>(x)).collect());
        // the bit that flips between gray(i) and gray(i+1)
        let c = (!index).trailing_zeros() as usize;
        if c < BITS {
            for (x, v) in state.iter_mut().zip(dirs) {
                *x ^= v[c];
            }
        }
        index += 1;
    }
    Ok(SampleSet { dim: d, points, skip, bounds: None })
}

fn check_bounds<S: Scalar>(d: usize, bounds: &[(S, S)]) -> Result<()> {
    if bounds.len() != d || bounds.iter().any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(Error::BoundsMismatch);
    }
    Ok(())
}

/// Maps unit-cube points into `bounds`, `x ← lo + x (hi - lo)`.
pub fn scale<S: Scalar>(samples: &SampleSet<S>, bounds: &[(S, S)]) -> Result<SampleSet<S>> {
    check_bounds(samples.dim, bounds)?;
    let points = samples
        .points
        .iter()
        .map(|p| p.iter().zip(bounds).map(|(&x, &(lo, hi))| lo + x * (hi - lo)).collect())
        .collect();
    Ok(SampleSet { dim: samples.dim, points, skip: samples.skip, bounds: Some(bounds.to_vec()) })
}

/// Inverse of [`scale`].
pub fn unscale<S: Scalar>(samples: &SampleSet<S>) -> Result<SampleSet<S>> {
    let bounds = samples.bounds.as_ref().ok_or(Error::BoundsMismatch)?;
    let points = samples
        .points
        .iter()
        .map(|p| p.iter().zip(bounds).map(|(&x, &(lo, hi))| (x - lo) / (hi - lo)).collect())
        .collect();
    Ok(SampleSet { dim: samples.dim, points, skip: samples.skip, bounds: None })
}
