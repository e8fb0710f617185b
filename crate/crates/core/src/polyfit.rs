//! Ordinary least-squares polynomial metamodels over a declared monomial basis.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{back_substitute, householder_qr, singular_values, Matrix};
use crate::Scalar;

/// Relative singular-value floor below which a design matrix counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Residual level under which constant data counts as exactly fitted.
pub const EXACT_RESIDUAL: f64 = 1e-12;

/// A list of monomials, each given as one exponent per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpec {
    vars: Vec<String>,
    monomials: Vec<Vec<u32>>,
}

impl BasisSpec {
    pub fn new<V: Into<String>>(vars: impl IntoIterator<Item = V>, monomials: Vec<Vec<u32>>) -> Result<Self> {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        if vars.is_empty() || monomials.is_empty() {
            return Err(Error::InvalidBasis("basis needs at least one variable and one monomial".into()));
        }
        let mut seen_vars = HashSet::new();
        if let Some(v) = vars.iter().find(|v| !seen_vars.insert(v.as_str())) {
            return Err(Error::InvalidBasis(format!("variable {v} listed twice")));
        }
        let mut seen = HashSet::new();
        for m in &monomials {
            if m.len() != vars.len() {
                return Err(Error::InvalidBasis(format!(
                    "monomial {m:?} has {} exponents for {} variables",
                    m.len(),
                    vars.len()
                )));
            }
            if !seen.insert(m.clone()) {
                return Err(Error::InvalidBasis(format!("duplicate monomial {m:?}")));
            }
        }
        Ok(Self { vars, monomials })
    }

    /// `{1, T, T², t, t·T}` over `(T, t)`.
    pub fn reactor() -> Self {
        Self::new(["T", "t"], vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![0, 1], vec![1, 1]])
            .expect("static basis is valid")
    }

    /// All monomials of total degree `<= degree`, graded then reverse-lexicographic
    /// (`1, x, y, x², xy, y², ...` for two variables).
    pub fn total_degree<V: Into<String>>(vars: impl IntoIterator<Item = V>, degree: u32) -> Result<Self> {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        let mut monomials = Vec::new();
        for total in 0..=degree {
            let mut current = vec![0; vars.len()];
            push_compositions(total, 0, &mut current, &mut monomials);
        }
        Self::new(vars, monomials)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// One design-matrix row.
    pub fn row<S: Scalar>(&self, point: &[S]) -> Result<Vec<S>> {
        if point.len() != self.vars.len() {
            return Err(Error::DimensionMismatch { expected: self.vars.len(), found: point.len() });
        }
        Ok(self
            .monomials
            .iter()
            .map(|m| m.iter().zip(point).fold(S::one(), |acc, (&e, &x)| acc * x.powi(e as i32)))
            .collect())
    }

    /// Human-readable name of monomial `j`, e.g. `T^2*t`, or `1`.
    pub fn monomial_label(&self, j: usize) -> String {
        let parts: Vec<String> = self.monomials[j]
            .iter()
            .zip(&self.vars)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, v)| if e == 1 { v.clone() } else { format!("{v}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

fn push_compositions(remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        push_compositions(remaining - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

pub fn design_matrix<S: Scalar>(points: &[Vec<S>], basis: &BasisSpec) -> Result<Matrix<S>> {
    let rows = points.iter().map(|p| basis.row(p)).collect::<Result<Vec<_>>>()?;
    let mut m = Matrix::from_rows(&rows);
    if rows.is_empty() {
        m = Matrix::zeros(0, basis.len());
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    /// Scale each design column to unit max-abs before factorizing.
    pub scale_columns: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { scale_columns: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<S> {
    pub basis: BasisSpec,
    pub coefficients: Vec<S>,
    pub r_squared: S,
    pub n_points: usize,
    pub residual_max_abs: S,
}

pub fn fit_least_squares<S: Scalar>(points: &[Vec<S>], values: &[S], basis: &BasisSpec) -> Result<FitResult<S>> {
    fit_least_squares_with(points, values, basis, FitOptions::default())
}

pub fn fit_least_squares_with<S: Scalar>(
    points: &[Vec<S>],
    values: &[S],
    basis: &BasisSpec,
    options: FitOptions,
) -> Result<FitResult<S>> {
    if values.len() != points.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), found: values.len() });
    }
    if points.len() < basis.len() {
        return Err(Error::InsufficientPoints { points: points.len(), terms: basis.len() });
    }
    let mut a = design_matrix(points, basis)?;
    let n = basis.len();
    let mut scales = vec![S::one(); n];
    if options.scale_columns {
        for (j, s) in scales.iter_mut().enumerate() {
            let max = (0..a.rows()).fold(S::zero(), |acc, i| acc.max(a[(i, j)].abs()));
            if max > S::zero() {
                *s = max;
                for i in 0..a.rows() {
                    a[(i, j)] = a[(i, j)] / max;
                }
            }
        }
    }
    let (r, qtb) = householder_qr(&a, values);
    let sv = singular_values(&r);
    let (smax, smin) = (sv[0], sv[n - 1]);
    if smax == S::zero() || smin / smax < S::lit(RANK_TOL) || !smin.is_finite() {
        let ratio = if smax == S::zero() { 0.0 } else { (smin / smax).as_f64() };
        return Err(Error::RankDeficient(ratio));
    }
    let coefficients: Vec<S> = back_substitute(&r, &qtb).into_iter().zip(&scales).map(|(c, &s)| c / s).collect();

    let mut fit = FitResult {
        basis: basis.clone(),
        coefficients,
        r_squared: S::zero(),
        n_points: points.len(),
        residual_max_abs: S::zero(),
    };
    let residuals: Vec<S> = points.iter().zip(values).map(|(p, &y)| y - fit.predict_unchecked(p)).collect();
    fit.residual_max_abs = residuals.iter().fold(S::zero(), |acc, r| acc.max(r.abs()));
    fit.r_squared = r_squared(values, &residuals);
    Ok(fit)
}

/// `1 - SS_res/SS_tot`; for constant data, 1 if the residuals vanish, else 0.
pub fn r_squared<S: Scalar>(values: &[S], residuals: &[S]) -> S {
    let n = S::from_usize_lossy(values.len());
    let mean = values.iter().fold(S::zero(), |acc, &v| acc + v) / n;
    let ss_tot = values.iter().fold(S::zero(), |acc, &v| acc + (v - mean) * (v - mean));
    let ss_res = residuals.iter().fold(S::zero(), |acc, &r| acc + r * r);
    if ss_tot == S::zero() {
        let exact = residuals.iter().all(|r| r.abs() <= S::lit(EXACT_RESIDUAL));
        return if exact { S::one() } else { S::zero() };
    }
    S::one() - ss_res / ss_tot
}

impl<S: Scalar> FitResult<S> {
    pub fn predict(&self, point: &[S]) -> Result<S> {
        let row = self.basis.row(point)?;
        Ok(row.iter().zip(&self.coefficients).fold(S::zero(), |acc, (&m, &c)| acc + m * c))
    }

    fn predict_unchecked(&self, point: &[S]) -> S {
        self.predict(point).expect("point dimension checked by design_matrix")
    }

    /// Sum of `coefficient * monomial` terms; zero coefficients are dropped.
    pub fn to_expr(&self) -> Expr<S> {
        let mut terms =
            self.coefficients.iter().zip(self.basis.monomials()).filter(|(c, _)| **c != S::zero()).map(|(&c, m)| {
                m.iter().zip(self.basis.vars()).filter(|(&e, _)| e > 0).fold(Expr::Const(c), |acc, (&e, v)| {
                    let factor = if e == 1 { Expr::var(v.as_str()) } else { Expr::var(v.as_str()).pow(e) };
                    acc * factor
                })
            });
        match terms.next() {
            None => Expr::Const(S::zero()),
            Some(first) => terms.fold(first, |acc, t| acc + t),
        }
    }

    /// Key-value lines; every key is prefixed with `prefix` (e.g. `purity.`).
    pub fn write_report(&self, prefix: &str, out: &mut String) {
        let monos: Vec<String> =
            self.basis.monomials().iter().map(|m| m.iter().map(u32::to_string).collect::<Vec<_>>().join(",")).collect();
        let _ = writeln!(out, "{prefix}vars = {}", self.basis.vars().join(" "));
        let _ = writeln!(out, "{prefix}monomials = {}", monos.join(" "));
        let coeffs: Vec<String> = self.coefficients.iter().map(|c| format!("{c:?}")).collect();
        let _ = writeln!(out, "{prefix}coefficients = {}", coeffs.join(" "));
        let _ = writeln!(out, "{prefix}r_squared = {:?}", self.r_squared);
        let _ = writeln!(out, "{prefix}n_points = {}", self.n_points);
        let _ = writeln!(out, "{prefix}residual_max_abs = {:?}", self.residual_max_abs);
    }

    /// Inverse of [`write_report`](Self::write_report) over already-split key-value pairs.
    pub fn from_report(prefix: &str, kv: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| {
            kv.get(&format!("{prefix}{key}"))
                .map(String::as_str)
                .ok_or_else(|| Error::InvalidArgument(format!("report lacks {prefix}{key}")))
        };
        let bad = |key: &str| Error::InvalidArgument(format!("malformed {prefix}{key}"));
        let num = |key: &str, text: &str| text.parse::<S>().map_err(|_| bad(key));
        let vars: Vec<&str> = get("vars")?.split_whitespace().collect();
        let monomials = get("monomials")?
            .split_whitespace()
            .map(|m| m.split(',').map(|e| e.parse::<u32>().map_err(|_| bad("monomials"))).collect())
            .collect::<Result<Vec<Vec<u32>>>>()?;
        let basis = BasisSpec::new(vars, monomials)?;
        let coefficients =
            get("coefficients")?.split_whitespace().map(|c| num("coefficients", c)).collect::<Result<Vec<S>>>()?;
        if coefficients.len() != basis.len() {
            return Err(bad("coefficients"));
        }
        Ok(Self {
            basis,
            coefficients,
            r_squared: num("r_squared", get("r_squared")?)?,
            n_points: get("n_points")?.parse().map_err(|_| bad("n_points"))?,
            residual_max_abs: num("residual_max_abs", get("residual_max_abs")?)?,
        })
    }
}
