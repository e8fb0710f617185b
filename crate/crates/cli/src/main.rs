//! `rds`: demos of composed implicit regions, design-space identification
//! for the batch reactor, membership checks against a saved report, and
//! Sobol point generation.
//!
//! Exit codes: 0 success (or `check` inside), 1 IO, integrator or fit
//! failure, 2 bad arguments or malformed input, 3 `check` outside,
//! 4 `check` boundary.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rds_core::contour::{
    contour_csv, field_csv, grid_eval, marching_squares, render_svg, slice_contours_3d, ContourSet, Layer, ScalarField,
    SvgStyle,
};
use rds_core::ds::{
    identify, joint_expression, membership, reactor_constraints, DsReport, IdentifyOptions, JointFormat, ParamBox,
    ReactorModel,
};
use rds_core::expr::{canonicalize_alpha1, expand_rfunctions, serialize, Format};
use rds_core::geometry::testcase;
use rds_core::polyfit::BasisSpec;
use rds_core::qmc::{sobol, DEFAULT_SKIP};
use rds_core::reactor::{default_control, KineticParams, ReactorBox};
use rds_core::{compose, Error, Expr, SignClass};

use config::RunConfig;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const STROKES: [&str; 3] = ["#c0392b", "#1f5fa8", "#222222"];

#[derive(Parser)]
#[command(name = "rds", version, about = "Implicit-region composition and analytical design spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one of the reference compositions: circles-4.1, parabolas-4.2,
    /// slabs-A1, paraboloid-cylinders-A2
    Demo(DemoArgs),
    /// Identify the reactor design space from a small number of simulations
    Identify(IdentifyArgs),
    /// Classify a point against a saved design-space report
    Check(CheckArgs),
    /// Print Sobol points in the unit cube as CSV
    Sobol(SobolArgs),
}

#[derive(Args)]
struct DemoArgs {
    name: String,
    /// Grid nodes per axis
    #[arg(long, default_value_t = 201)]
    grid: usize,
    /// Number of z slices for 3D cases
    #[arg(long, default_value_t = 5)]
    slices: usize,
    /// R-function parameter in (-1, 1]
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct IdentifyArgs {
    /// Training simulations
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Contour grid nodes per axis
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Sobol index of the first training point
    #[arg(long, default_value_t = DEFAULT_SKIP)]
    skip: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// TOML file whose values override these flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Integrator relative tolerance
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Integrator absolute tolerance
    #[arg(long)]
    tol_abs: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    report: PathBuf,
    /// Comma-separated coordinates, e.g. 290,280
    #[arg(allow_hyphen_values = true)]
    point: String,
}

#[derive(Args)]
struct SobolArgs {
    d: usize,
    n: usize,
    #[arg(long, default_value_t = DEFAULT_SKIP)]
    skip: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: 1, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::IntegratorFailure(_) | Error::ToleranceNotMet(_) | Error::RankDeficient(_) => 1,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Demo(a) => demo(&a),
        Command::Identify(a) => run_identify(&a),
        Command::Check(a) => check(&a),
        Command::Sobol(a) => print_sobol(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("rds: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn provenance() -> Vec<String> {
    let argv: Vec<String> = std::env::args().collect();
    vec![format!("rds {VERSION}"), format!("invocation: {}", argv.join(" "))]
}

fn write(dir: &Path, name: &str, text: &str) -> Result<String, Failure> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
    Ok(name.to_string())
}

fn svg_style(title: String, axis_names: [String; 2]) -> SvgStyle {
    SvgStyle { title: Some(title), description: Some(provenance().join("\n")), axis_names, ..SvgStyle::default() }
}

fn expression_forms(expr: &Expr<f64>) -> [(&'static str, String); 4] {
    [
        ("tree", serialize(expr, Format::Tree)),
        ("infix", serialize(expr, Format::Infix)),
        ("infix_abs", serialize(&expand_rfunctions(&canonicalize_alpha1(expr)), Format::Infix)),
        ("infix_sqrt", serialize(&expand_rfunctions(expr), Format::Infix)),
    ]
}

fn axis_pair(names: &[String]) -> [String; 2] {
    [names[0].clone(), names[1].clone()]
}

fn demo(a: &DemoArgs) -> Outcome {
    if a.grid < 2 {
        return Err(Failure::usage("--grid must be at least 2"));
    }
    if a.slices == 0 {
        return Err(Failure::usage("--slices must be at least 1"));
    }
    let (_, _, case) = testcase::<f64>(&a.name)?;
    let regions = [compose(&case.trees[0], a.alpha)?, compose(&case.trees[1], a.alpha)?];
    fs::create_dir_all(&a.out).map_err(|e| Failure::io(&a.out, e))?;
    let header = provenance();
    let name = &a.name;

    let mut expressions = String::new();
    for line in &header {
        expressions.push_str(&format!("# {line}\n"));
    }
    for (label, region) in case.labels.iter().zip(&regions) {
        expressions.push_str(&format!("\n[{label}]\nvariables = {}\n", region.var_names().join(" ")));
        for (key, text) in expression_forms(region.expr()) {
            expressions.push_str(&format!("{key} = {text}\n"));
        }
    }
    write(&a.out, &format!("{name}-expressions.txt"), &expressions)?;

    for (k, (label, region)) in case.labels.iter().zip(&regions).enumerate() {
        let stroke = STROKES[k].to_string();
        if case.dim() == 2 {
            let field = grid_eval(region, &case.bounds, &[a.grid, a.grid])?;
            let curves = marching_squares(&field)?;
            let layer = Layer { contours: &curves, stroke, label: Some(label.to_string()) };
            let style = svg_style(format!("{name} {label}"), axis_pair(field.names()));
            let b = [case.bounds[0], case.bounds[1]];
            write(&a.out, &format!("{name}-{label}.svg"), &render_svg(b, &[layer], Some(&field), &style))?;
            write(&a.out, &format!("{name}-{label}-field.csv"), &field_csv(&field, &header))?;
            write(&a.out, &format!("{name}-{label}-contour.csv"), &contour_csv(&curves, &header))?;
        } else {
            let slices = slice_contours_3d(region, &case.bounds, [a.grid, a.grid], a.slices)?;
            let zname = &region.var_names()[2].to_string();
            for (s, (z, curves, field)) in slices.iter().enumerate() {
                let layer = Layer { contours: curves, stroke: stroke.clone(), label: Some(format!("{zname} = {z}")) };
                let style = svg_style(format!("{name} {label}, {zname} = {z}"), axis_pair(field.names()));
                let b = [case.bounds[0], case.bounds[1]];
                let mut slice_header = header.clone();
                slice_header.push(format!("slice {zname} = {z:?}"));
                write(
                    &a.out,
                    &format!("{name}-{label}-slice{s:02}.svg"),
                    &render_svg(b, &[layer], Some(field), &style),
                )?;
                write(&a.out, &format!("{name}-{label}-slice{s:02}-field.csv"), &field_csv(field, &slice_header))?;
                write(&a.out, &format!("{name}-{label}-slice{s:02}-contour.csv"), &contour_csv(curves, &slice_header))?;
            }
        }
    }
    println!("wrote {name} outputs to {}", a.out.display());
    Ok(0)
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::usage(format!("{name} must be positive, got {v}")))
    }
}

fn run_identify(a: &IdentifyArgs) -> Outcome {
    let cfg = match &a.config {
        None => RunConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            RunConfig::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
    };
    let n = cfg.identify.n.unwrap_or(a.n);
    let alpha = cfg.identify.alpha.unwrap_or(a.alpha);
    let grid = cfg.identify.grid.unwrap_or(a.grid);
    let skip = cfg.identify.skip.unwrap_or(a.skip);
    let basis = BasisSpec::reactor();
    if n < basis.len() {
        return Err(Failure::usage(format!("--n must be at least {} (the basis size), got {n}", basis.len())));
    }
    if grid < 2 {
        return Err(Failure::usage("--grid must be at least 2"));
    }

    let mut control = default_control::<f64>();
    if let Some(v) = cfg.tolerances.rel.or(a.tol_rel) {
        control.rtol = positive("relative tolerance", v)?;
    }
    if let Some(v) = cfg.tolerances.abs.or(a.tol_abs) {
        control.atol = positive("absolute tolerance", v)?;
    }
    let k = &cfg.kinetics;
    let base = KineticParams::<f64>::default();
    let params = KineticParams {
        e1: k.e1.unwrap_or(base.e1),
        e2: k.e2.unwrap_or(base.e2),
        k1_ref: k.k1_ref.unwrap_or(base.k1_ref),
        k2_ref: k.k2_ref.unwrap_or(base.k2_ref),
        r_gas: k.r_gas.unwrap_or(base.r_gas),
        ca0: k.ca0.unwrap_or(base.ca0),
        volume: k.volume.unwrap_or(base.volume),
    };
    params.validate()?;
    let default_box = ReactorBox::<f64>::default();
    let rbox = ReactorBox {
        temperature: cfg.bounds.temperature.unwrap_or(default_box.temperature),
        time: cfg.bounds.time.unwrap_or(default_box.time),
    };
    if rbox.temperature.0 <= 0.0 {
        return Err(Failure::usage("temperatures must be positive"));
    }
    let pbox = ParamBox::new(["T", "t"], rbox.bounds())?;

    let options = IdentifyOptions {
        n_samples: n,
        skip,
        alpha,
        validation_points: Some(cfg.identify.validation_points.unwrap_or(256)),
        contour_grid: Some(grid),
    };
    let model = ReactorModel { params, control };
    let mut report = identify(&model, &reactor_constraints(), &pbox, &basis, &options)?;

    fs::create_dir_all(&a.out).map_err(|e| Failure::io(&a.out, e))?;
    let header = provenance();
    let joint_field = grid_eval(&report.joint, &report.bounds, &[grid, grid])?;
    let mut files = Vec::new();
    for (label, curves) in &report.contours {
        files.push(write(&a.out, &format!("{label}-contour.csv"), &contour_csv(curves, &header))?);
    }
    files.push(write(&a.out, "joint-field.csv", &field_csv(&joint_field, &header))?);

    let axes = axis_pair(&report.names);
    let b = [report.bounds[0], report.bounds[1]];
    let joint_curves = contours_of(&report, "joint");
    let joint_layer =
        Layer { contours: &joint_curves, stroke: STROKES[2].into(), label: Some("joint boundary".into()) };
    let svg = render_svg(b, &[joint_layer], Some(&joint_field), &svg_style("joint design space".into(), axes.clone()));
    files.push(write(&a.out, "joint_ds.svg", &svg)?);

    let per: Vec<ContourSet<f64>> = report.constraints.iter().map(|c| contours_of(&report, &c.name)).collect();
    let layers: Vec<Layer<'_, f64>> = report
        .constraints
        .iter()
        .zip(&per)
        .enumerate()
        .map(|(k, (c, curves))| Layer {
            contours: curves,
            stroke: STROKES[k % 2].into(),
            label: Some(format!("{} = {}", c.name, c.threshold)),
        })
        .collect();
    let svg = render_svg(b, &layers, None, &svg_style("constraint boundaries".into(), axes));
    files.push(write(&a.out, "constraints.svg", &svg)?);

    report.contour_files = files;
    write(&a.out, "ds_report.txt", &report.to_text(&header))?;
    summarize(&report, &joint_field);
    Ok(0)
}

fn contours_of(report: &DsReport<f64>, label: &str) -> ContourSet<f64> {
    report.contours.iter().find(|(l, _)| l == label).map(|(_, c)| c.clone()).unwrap_or_default()
}

fn summarize(report: &DsReport<f64>, joint_field: &ScalarField<f64>) {
    for c in &report.constraints {
        let val = c.validation_r_squared.map_or("n/a".to_string(), |r| format!("{r:.6}"));
        println!(
            "{}: training R^2 = {:.6}, validation R^2 = {val}, max training residual = {:e}",
            c.name, c.fit.r_squared, c.fit.residual_max_abs
        );
    }
    if let Some(v) = &report.validation {
        println!("membership agreement on {} validation points: {:.4}", v.points, v.agreement);
    }
    println!("design-space share of the box: {:.4}", joint_field.inside_fraction());
    println!("joint = {}", joint_expression(report, JointFormat::InfixAbs));
}

fn parse_point(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::usage(format!("bad coordinate `{}` in point `{text}`", c.trim())))
        })
        .collect()
}

fn check(a: &CheckArgs) -> Outcome {
    let text = fs::read_to_string(&a.report).map_err(|e| Failure::io(&a.report, e))?;
    let report =
        DsReport::<f64>::from_text(&text).map_err(|e| Failure::usage(format!("{}: {e}", a.report.display())))?;
    let u = parse_point(&a.point)?;
    let class = membership(&report, &u)?;
    let value = report.joint.eval_at(&u)?;
    println!("{class}");
    println!("joint value = {value:?}");
    Ok(match class {
        SignClass::Inside => 0,
        SignClass::Outside => 3,
        SignClass::Boundary => 4,
    })
}

fn print_sobol(a: &SobolArgs) -> Outcome {
    let set = sobol::<f64>(a.d, a.n, a.skip)?;
    let mut out = String::new();
    for p in &set.points {
        let row: Vec<String> = p.iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    print!("{out}");
    Ok(0)
}
