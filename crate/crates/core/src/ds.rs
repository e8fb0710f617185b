//! Design-space identification: polynomial metamodels of each quality
//! attribute, turned into implicit functions `φᵢ = ĝᵢ − g*ᵢ` and joined by an
//! R-conjunction into a single analytical membership expression.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::contour::{grid_eval, marching_squares, ContourSet};
use crate::error::{Error, Result};
use crate::expr::{
    canonicalize_alpha1, compose, expand_rfunctions, parse, serialize, Alpha, BoolTree, Expr, Format, Region, SignClass,
};
use crate::ode::StepControl;
use crate::polyfit::{fit_least_squares, r_squared, BasisSpec, FitResult};
use crate::qmc::{scale, sobol, DEFAULT_SKIP};
use crate::reactor::{self, KineticParams, OperatingPoint, ReactorBox};
use crate::Scalar;

/// Band half-width used by [`membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const REPORT_FORMAT: &str = "1";

/// A process model mapping a parameter vector to all of its quality
/// attributes in one run.
pub trait CqaModel<S>: Sync {
    fn dim(&self) -> usize;
    fn outputs(&self) -> usize;
    fn evaluate(&self, u: &[S]) -> Result<Vec<S>>;
}

/// Wraps a closure as a [`CqaModel`].
pub struct FnModel<F> {
    pub dim: usize,
    pub outputs: usize,
    pub f: F,
}

impl<S, F> CqaModel<S> for FnModel<F>
where
    F: Fn(&[S]) -> Vec<S> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn outputs(&self) -> usize {
        self.outputs
    }

    fn evaluate(&self, u: &[S]) -> Result<Vec<S>> {
        Ok((self.f)(u))
    }
}

/// Purity and profit of the batch reactor over `(T, t)`.
#[derive(Debug, Clone, Copy)]
pub struct ReactorModel<S> {
    pub params: KineticParams<S>,
    pub control: StepControl<S>,
}

impl<S: Scalar> Default for ReactorModel<S> {
    fn default() -> Self {
        Self { params: KineticParams::default(), control: reactor::default_control() }
    }
}

impl<S: Scalar> CqaModel<S> for ReactorModel<S> {
    fn dim(&self) -> usize {
        2
    }

    fn outputs(&self) -> usize {
        2
    }

    fn evaluate(&self, u: &[S]) -> Result<Vec<S>> {
        let o = reactor::simulate_with(&OperatingPoint::new(u[0], u[1]), &self.params, &self.control)?;
        Ok(vec![o.purity, o.profit])
    }
}

/// `model output[output] >= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec<S> {
    pub name: String,
    pub output: usize,
    pub threshold: S,
}

impl<S: Scalar> ConstraintSpec<S> {
    pub fn new(name: impl Into<String>, output: usize, threshold: S) -> Self {
        Self { name: name.into(), output, threshold }
    }
}

/// `Purity >= 0.8` and `Profit >= 128`.
pub fn reactor_constraints<S: Scalar>() -> Vec<ConstraintSpec<S>> {
    vec![
        ConstraintSpec::new("purity", 0, S::lit(reactor::PURITY_THRESHOLD)),
        ConstraintSpec::new("profit", 1, S::lit(reactor::PROFIT_THRESHOLD)),
    ]
}

/// Named axis-aligned parameter box.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox<S> {
    pub names: Vec<String>,
    pub bounds: Vec<(S, S)>,
}

impl<S: Scalar> ParamBox<S> {
    pub fn new<N: Into<String>>(names: impl IntoIterator<Item = N>, bounds: Vec<(S, S)>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != bounds.len()
            || bounds.iter().any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::BoundsMismatch);
        }
        Ok(Self { names, bounds })
    }

    pub fn reactor(b: &ReactorBox<S>) -> Self {
        Self { names: vec!["T".into(), "t".into()], bounds: b.bounds() }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn contains(&self, u: &[S]) -> bool {
        u.len() == self.dim() && u.iter().zip(&self.bounds).all(|(&x, &(lo, hi))| lo <= x && x <= hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentifyOptions<S> {
    pub n_samples: usize,
    /// Sequence index of the first training point.
    pub skip: u64,
    pub alpha: S,
    /// Size of the held-out Sobol set, `None` to skip validation.
    pub validation_points: Option<usize>,
    /// Nodes per axis for the boundary contours (2D boxes only).
    pub contour_grid: Option<usize>,
}

impl<S: Scalar> Default for IdentifyOptions<S> {
    fn default() -> Self {
        Self {
            n_samples: 64,
            skip: DEFAULT_SKIP,
            alpha: S::one(),
            validation_points: Some(256),
            contour_grid: Some(101),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFit<S> {
    pub name: String,
    pub output: usize,
    pub threshold: S,
    pub fit: FitResult<S>,
    /// `φ = fit − threshold`.
    pub region: Region<S>,
    pub validation_r_squared: Option<S>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationStats {
    pub points: usize,
    pub skip: u64,
    /// Share of points where the joint expression and direct thresholding agree.
    pub agreement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsReport<S> {
    pub names: Vec<String>,
    pub bounds: Vec<(S, S)>,
    pub alpha: S,
    pub n_samples: usize,
    pub skip: u64,
    pub constraints: Vec<ConstraintFit<S>>,
    pub joint: Region<S>,
    pub validation: Option<ValidationStats>,
    pub contour_grid: Option<usize>,
    /// `(label, curves)` for each `φᵢ = 0` and for the joint boundary;
    /// not persisted in the text report.
    pub contours: Vec<(String, ContourSet<S>)>,
    /// Files holding the contours, recorded by whoever wrote them.
    pub contour_files: Vec<String>,
}

/// Smallest multiple of `block` at or after `index`.
fn aligned_skip(index: u64, block: u64) -> u64 {
    index.div_ceil(block) * block
}

fn sample_box<S: Scalar>(bx: &ParamBox<S>, n: usize, skip: u64) -> Result<Vec<Vec<S>>> {
    Ok(scale(&sobol::<S>(bx.dim(), n, skip)?, &bx.bounds)?.points)
}

fn evaluate_all<S: Scalar, M: CqaModel<S>>(model: &M, points: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
    let outputs: Vec<Vec<S>> = points.par_iter().map(|u| model.evaluate(u)).collect::<Result<_>>()?;
    if let Some(bad) = outputs.iter().find(|o| o.len() != model.outputs()) {
        return Err(Error::DimensionMismatch { expected: model.outputs(), found: bad.len() });
    }
    Ok(outputs)
}

fn direct_inside<S: Scalar>(outputs: &[S], constraints: &[ConstraintFit<S>]) -> bool {
    constraints.iter().all(|c| outputs[c.output] >= c.threshold)
}

pub fn identify<S: Scalar, M: CqaModel<S>>(
    model: &M,
    constraints: &[ConstraintSpec<S>],
    bx: &ParamBox<S>,
    basis: &BasisSpec,
    options: &IdentifyOptions<S>,
) -> Result<DsReport<S>> {
    if constraints.is_empty() {
        return Err(Error::EmptyConstraintList);
    }
    Alpha::new(options.alpha)?;
    if model.dim() != bx.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: bx.dim() });
    }
    if basis.vars() != bx.names.as_slice() {
        return Err(Error::InvalidBasis(format!(
            "basis variables {:?} differ from box variables {:?}",
            basis.vars(),
            bx.names
        )));
    }
    for c in constraints {
        if c.output >= model.outputs() {
            return Err(Error::InvalidArgument(format!(
                "constraint {} reads output {} of {}",
                c.name,
                c.output,
                model.outputs()
            )));
        }
        if c.name.is_empty() || c.name.contains(char::is_whitespace) || c.name.contains(']') {
            return Err(Error::InvalidArgument(format!("constraint name {:?} must be a single word", c.name)));
        }
        if !c.threshold.is_finite() {
            return Err(Error::InvalidArgument(format!("threshold of {} is not finite", c.name)));
        }
    }
    if options.n_samples < basis.len() {
        return Err(Error::InsufficientPoints { points: options.n_samples, terms: basis.len() });
    }

    let points = sample_box(bx, options.n_samples, options.skip)?;
    let outputs = evaluate_all(model, &points)?;
    let names: Vec<&str> = bx.names.iter().map(String::as_str).collect();

    let mut fits = Vec::with_capacity(constraints.len());
    for c in constraints {
        let values: Vec<S> = outputs.iter().map(|o| o[c.output]).collect();
        let fit = fit_least_squares(&points, &values, basis)?;
        let region = Region::with_names(fit.to_expr() - Expr::Const(c.threshold), &names)?
            .described(format!("{} >= {:?}", c.name, c.threshold));
        fits.push(ConstraintFit {
            name: c.name.clone(),
            output: c.output,
            threshold: c.threshold,
            fit,
            region,
            validation_r_squared: None,
        });
    }
    let joint = joint_region(&fits, options.alpha)?;

    let validation = match options.validation_points {
        None => None,
        Some(m) => {
            let skip = aligned_skip(options.skip + options.n_samples as u64, m as u64);
            let vpoints = sample_box(bx, m, skip)?;
            let vout = evaluate_all(model, &vpoints)?;
            for f in &mut fits {
                let truth: Vec<S> = vout.iter().map(|o| o[f.output]).collect();
                let resid =
                    vpoints.iter().zip(&truth).map(|(p, &y)| Ok(y - f.fit.predict(p)?)).collect::<Result<Vec<S>>>()?;
                f.validation_r_squared = Some(r_squared(&truth, &resid));
            }
            let mut agree = 0;
            for (p, o) in vpoints.iter().zip(&vout) {
                if joint.contains(p)? == direct_inside(o, &fits) {
                    agree += 1;
                }
            }
            Some(ValidationStats { points: m, skip, agreement: agree as f64 / m as f64 })
        }
    };

    let mut contours = Vec::new();
    if let (Some(n), 2) = (options.contour_grid, bx.dim()) {
        for f in &fits {
            contours.push((f.name.clone(), marching_squares(&grid_eval(&f.region, &bx.bounds, &[n, n])?)?));
        }
        contours.push(("joint".to_string(), marching_squares(&grid_eval(&joint, &bx.bounds, &[n, n])?)?));
    }

    Ok(DsReport {
        names: bx.names.clone(),
        bounds: bx.bounds.clone(),
        alpha: options.alpha,
        n_samples: options.n_samples,
        skip: options.skip,
        constraints: fits,
        joint,
        validation,
        contour_grid: if bx.dim() == 2 { options.contour_grid } else { None },
        contours,
        contour_files: Vec::new(),
    })
}

fn joint_region<S: Scalar>(fits: &[ConstraintFit<S>], alpha: S) -> Result<Region<S>> {
    let tree = BoolTree::And(fits.iter().map(|f| BoolTree::leaf(f.region.clone())).collect());
    Ok(compose(&tree, alpha)?.described("joint design space"))
}

/// Classifies `u` with the joint expression alone; the process model is
/// never consulted.
pub fn membership<S: Scalar>(report: &DsReport<S>, u: &[S]) -> Result<SignClass> {
    if u.len() != report.names.len() {
        return Err(Error::DimensionMismatch { expected: report.names.len(), found: u.len() });
    }
    if !u.iter().zip(&report.bounds).all(|(&x, &(lo, hi))| lo <= x && x <= hi) {
        return Err(Error::OutOfBox);
    }
    report.joint.sign_class(u, S::lit(MEMBERSHIP_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointFormat {
    Tree,
    /// Infix with `rand(a, b, α)` calls.
    Infix,
    /// `α = 1` conjunctions written as `0.5*((a+b)-abs(a-b))`.
    InfixAbs,
    /// R-functions written out with square roots.
    InfixSqrt,
}

pub fn joint_expression<S: Scalar>(report: &DsReport<S>, format: JointFormat) -> String {
    let e = report.joint.expr();
    match format {
        JointFormat::Tree => serialize(e, Format::Tree),
        JointFormat::Infix => serialize(e, Format::Infix),
        JointFormat::InfixAbs => serialize(&expand_rfunctions(&canonicalize_alpha1(e)), Format::Infix),
        JointFormat::InfixSqrt => serialize(&expand_rfunctions(e), Format::Infix),
    }
}

/// Number of 2D plots needed to show a `d`-dimensional design space: each
/// of the `d(d−1)/2` pairs, with every other parameter at one of three levels.
pub fn plot_count(d: u32) -> Result<u64> {
    if d < 2 {
        return Err(Error::DTooSmall(d));
    }
    let d = d as u64;
    let pairs = d * (d - 1) / 2;
    3u64.checked_pow((d - 2) as u32)
        .and_then(|p| p.checked_mul(pairs))
        .ok_or_else(|| Error::InvalidArgument(format!("plot count for d = {d} overflows")))
}

/// Comparison of the joint expression with direct model thresholding on a
/// regular grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridAgreement {
    pub nodes: usize,
    pub agree: usize,
    /// Disagreements where no `|φᵢ|` is within that constraint's largest
    /// training residual.
    pub outside_band: usize,
}

impl GridAgreement {
    pub fn rate(&self) -> f64 {
        self.agree as f64 / self.nodes as f64
    }
}

pub fn grid_agreement<S: Scalar, M: CqaModel<S>>(
    report: &DsReport<S>,
    model: &M,
    resolution: usize,
) -> Result<GridAgreement> {
    if resolution < 2 {
        return Err(Error::InvalidGrid("need at least 2 nodes per axis".into()));
    }
    let d = report.names.len();
    let total = resolution.pow(d as u32);
    let nodes: Vec<Vec<S>> = (0..total)
        .map(|mut flat| {
            report
                .bounds
                .iter()
                .map(|&(lo, hi)| {
                    let i = flat % resolution;
                    flat /= resolution;
                    lo + S::from_usize_lossy(i) * (hi - lo) / S::from_usize_lossy(resolution - 1)
                })
                .collect()
        })
        .collect();
    let outputs = evaluate_all(model, &nodes)?;
    let mut stats = GridAgreement { nodes: total, agree: 0, outside_band: 0 };
    for (u, o) in nodes.iter().zip(&outputs) {
        if report.joint.contains(u)? == direct_inside(o, &report.constraints) {
            stats.agree += 1;
            continue;
        }
        let mut in_band = false;
        for c in &report.constraints {
            in_band |= c.region.eval_at(u)?.abs() <= c.fit.residual_max_abs;
        }
        if !in_band {
            stats.outside_band += 1;
        }
    }
    Ok(stats)
}

impl<S: Scalar> DsReport<S> {
    /// Structured text form; `header` lines become leading `#` comments.
    pub fn to_text(&self, header: &[String]) -> String {
        let mut s = String::new();
        for h in header {
            for line in h.lines() {
                let _ = writeln!(s, "# {line}");
            }
        }
        let bounds: Vec<String> = self.bounds.iter().map(|(lo, hi)| format!("{lo:?}:{hi:?}")).collect();
        let names: Vec<&str> = self.constraints.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(s, "[metadata]");
        let _ = writeln!(s, "format = {REPORT_FORMAT}");
        let _ = writeln!(s, "variables = {}", self.names.join(" "));
        let _ = writeln!(s, "bounds = {}", bounds.join(" "));
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "n_samples = {}", self.n_samples);
        let _ = writeln!(s, "skip = {}", self.skip);
        let _ = writeln!(s, "constraints = {}", names.join(" "));
        for c in &self.constraints {
            let _ = writeln!(s, "\n[constraint {}]", c.name);
            let _ = writeln!(s, "output = {}", c.output);
            let _ = writeln!(s, "threshold = {:?}", c.threshold);
            c.fit.write_report("", &mut s);
            if let Some(r2) = c.validation_r_squared {
                let _ = writeln!(s, "validation_r_squared = {r2:?}");
            }
            let _ = writeln!(s, "phi = {}", serialize(c.region.expr(), Format::Infix));
        }
        let _ = writeln!(s, "\n[joint]");
        let _ = writeln!(s, "tree = {}", joint_expression(self, JointFormat::Tree));
        let _ = writeln!(s, "infix = {}", joint_expression(self, JointFormat::Infix));
        let _ = writeln!(s, "infix_abs = {}", joint_expression(self, JointFormat::InfixAbs));
        let _ = writeln!(s, "infix_sqrt = {}", joint_expression(self, JointFormat::InfixSqrt));
        if let Some(v) = &self.validation {
            let _ = writeln!(s, "\n[validation]");
            let _ = writeln!(s, "points = {}", v.points);
            let _ = writeln!(s, "skip = {}", v.skip);
            let _ = writeln!(s, "agreement = {:?}", v.agreement);
        }
        if self.contour_grid.is_some() || !self.contour_files.is_empty() {
            let _ = writeln!(s, "\n[contours]");
            if let Some(n) = self.contour_grid {
                let _ = writeln!(s, "grid = {n}");
            }
            let _ = writeln!(s, "files = {}", self.contour_files.join(" "));
        }
        s
    }

    /// Rebuilds a report from [`to_text`](Self::to_text) output. Contour
    /// polylines are not stored in the text and come back empty.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = Some(name.to_string());
                sections.entry(name.to_string()).or_default();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("report line {}: expected key = value", no + 1)))?;
            let sec = current
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument(format!("report line {}: value outside a section", no + 1)))?;
            sections.get_mut(sec).expect("section registered").insert(k.trim().to_string(), v.trim().to_string());
        }
        let section = |name: &str| {
            sections.get(name).ok_or_else(|| Error::InvalidArgument(format!("report lacks section [{name}]")))
        };
        let field = |sec: &BTreeMap<String, String>, key: &str| -> Result<String> {
            sec.get(key).cloned().ok_or_else(|| Error::InvalidArgument(format!("report lacks {key}")))
        };
        let bad = |what: &str| Error::InvalidArgument(format!("malformed {what} in report"));
        let num = |text: &str, what: &str| text.parse::<S>().map_err(|_| bad(what));

        let meta = section("metadata")?;
        if field(meta, "format")? != REPORT_FORMAT {
            return Err(bad("format version"));
        }
        let names: Vec<String> = field(meta, "variables")?.split_whitespace().map(String::from).collect();
        let bounds = field(meta, "bounds")?
            .split_whitespace()
            .map(|b| {
                let (lo, hi) = b.split_once(':').ok_or_else(|| bad("bounds"))?;
                Ok((num(lo, "bounds")?, num(hi, "bounds")?))
            })
            .collect::<Result<Vec<_>>>()?;
        let bx = ParamBox::new(names.clone(), bounds)?;
        let alpha = num(&field(meta, "alpha")?, "alpha")?;
        Alpha::new(alpha)?;
        let n_samples = field(meta, "n_samples")?.parse().map_err(|_| bad("n_samples"))?;
        let skip = field(meta, "skip")?.parse().map_err(|_| bad("skip"))?;
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();

        let mut constraints = Vec::new();
        for cname in field(meta, "constraints")?.split_whitespace() {
            let sec = section(&format!("constraint {cname}"))?;
            let fit = FitResult::<S>::from_report("", sec)?;
            if fit.basis.vars() != names.as_slice() {
                return Err(bad("basis variables"));
            }
            let threshold = num(&field(sec, "threshold")?, "threshold")?;
            let region = Region::with_names(fit.to_expr() - Expr::Const(threshold), &name_refs)?
                .described(format!("{cname} >= {threshold:?}"));
            let validation_r_squared =
                sec.get("validation_r_squared").map(|v| num(v, "validation_r_squared")).transpose()?;
            constraints.push(ConstraintFit {
                name: cname.to_string(),
                output: field(sec, "output")?.parse().map_err(|_| bad("output"))?,
                threshold,
                fit,
                region,
                validation_r_squared,
            });
        }
        if constraints.is_empty() {
            return Err(Error::EmptyConstraintList);
        }
        let joint_text = field(section("joint")?, "tree")?;
        let joint =
            Region::with_names(parse::<S>(&joint_text, Format::Tree)?, &name_refs)?.described("joint design space");
        if joint != joint_region(&constraints, alpha)? {
            return Err(Error::InvalidArgument("joint expression does not match the constraint fits".into()));
        }

        let validation = match sections.get("validation") {
            None => None,
            Some(v) => Some(ValidationStats {
                points: field(v, "points")?.parse().map_err(|_| bad("validation points"))?,
                skip: field(v, "skip")?.parse().map_err(|_| bad("validation skip"))?,
                agreement: field(v, "agreement")?.parse().map_err(|_| bad("agreement"))?,
            }),
        };
        let (contour_grid, contour_files) = match sections.get("contours") {
            None => (None, Vec::new()),
            Some(c) => (
                c.get("grid").map(|g| g.parse().map_err(|_| bad("contour grid"))).transpose()?,
                c.get("files").map(|f| f.split_whitespace().map(String::from).collect()).unwrap_or_default(),
            ),
        };
        Ok(Self {
            names: bx.names,
            bounds: bx.bounds,
            alpha,
            n_samples,
            skip,
            constraints,
            joint,
            validation,
            contour_grid,
            contours: Vec::new(),
            contour_files,
        })
    }
}
