use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rds_core::ds::{identify, ConstraintSpec, FnModel, IdentifyOptions, ParamBox};
use rds_core::expr::{parse, Format};
use rds_core::polyfit::BasisSpec;
use rds_core::reactor::ReactorBox;

fn rds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rds")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn files_with(dir: &Path, suffix: &str) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(suffix))
        .collect();
    v.sort();
    v
}

fn write_synthetic_report(dir: &Path, constraints: &[ConstraintSpec<f64>]) -> String {
    let model = FnModel { dim: 2, outputs: 2, f: |u: &[f64]| vec![u[0] + u[1], u[0] * u[1]] };
    let bx = ParamBox::reactor(&ReactorBox::default());
    let report = identify(&model, constraints, &bx, &BasisSpec::reactor(), &IdentifyOptions::default()).unwrap();
    let path = dir.join("report.txt");
    fs::write(&path, report.to_text(&[])).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn demo_circles_writes_two_svgs_and_expressions() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_string_lossy().into_owned();
    let o = rds(&["demo", "circles-4.1", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files_with(tmp.path(), ".svg"), ["circles-4.1-and.svg", "circles-4.1-or.svg"]);
    assert_eq!(files_with(tmp.path(), "expressions.txt").len(), 1);
    let svg = fs::read_to_string(tmp.path().join("circles-4.1-and.svg")).unwrap();
    assert!(svg.contains(&format!("<desc>rds {}", env!("CARGO_PKG_VERSION"))));
    assert!(svg.contains("invocation: "));
    let csv = fs::read_to_string(tmp.path().join("circles-4.1-or-field.csv")).unwrap();
    assert!(csv.starts_with(&format!("# rds {}\n# invocation: ", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn demo_slabs_writes_one_svg_per_slice() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_string_lossy().into_owned();
    let o = rds(&["demo", "slabs-A1", "--slices", "9", "--grid", "41", "--out", &out]);
    assert_eq!(code(&o), 0);
    let svgs = files_with(tmp.path(), ".svg");
    assert_eq!(svgs.iter().filter(|n| n.starts_with("slabs-A1-and-slice")).count(), 9);
    assert_eq!(svgs.iter().filter(|n| n.starts_with("slabs-A1-or-slice")).count(), 9);
}

#[test]
fn demo_parabola_expressions_match_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_string_lossy().into_owned();
    assert_eq!(code(&rds(&["demo", "parabolas-4.2", "--grid", "21", "--out", &out])), 0);
    let text = fs::read_to_string(tmp.path().join("parabolas-4.2-expressions.txt")).unwrap();
    let and_block = text.split("[and]").nth(1).unwrap().split("[or]").next().unwrap();
    for key in ["infix = ", "infix_abs = ", "infix_sqrt = "] {
        let line = and_block.lines().find(|l| l.starts_with(key)).unwrap();
        let e = parse::<f64>(&line[key.len()..], Format::Infix).unwrap();
        for j in 0..50 {
            for i in 0..50 {
                let x = -2.0 + 6.0 * i as f64 / 49.0;
                let y = -6.0 + 8.0 * j as f64 / 49.0;
                let exact = 2.0 * x - x * x - (4.0 * y + 9.0).abs() / 4.0 - 0.25;
                let got = e.eval_pairs(&[("x", x), ("y", y)]).unwrap();
                assert!((got - exact).abs() <= 1e-9, "{key}({x}, {y}): {got} vs {exact}");
            }
        }
    }
}

#[test]
fn demo_rejects_unknown_names_and_bad_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_string_lossy().into_owned();
    assert_eq!(code(&rds(&["demo", "spheres", "--out", &out])), 2);
    assert_eq!(code(&rds(&["demo", "circles-4.1", "--alpha", "-1", "--out", &out])), 2);
    assert_eq!(code(&rds(&["demo", "circles-4.1", "--grid", "1", "--out", &out])), 2);
    assert_eq!(code(&rds(&["demo"])), 2);
}

#[test]
fn identify_writes_report_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_string_lossy().into_owned();
    let o = rds(&["identify", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["ds_report.txt", "joint_ds.svg", "constraints.svg", "joint-field.csv"] {
        assert!(tmp.path().join(name).exists(), "{name}");
    }
    let summary = stdout(&o);
    for line in summary.lines().filter(|l| l.contains("training R^2")) {
        let r2: f64 = line.split("training R^2 = ").nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert!(r2 >= 0.99, "{line}");
    }
    let report = fs::read_to_string(tmp.path().join("ds_report.txt")).unwrap();
    assert!(report.contains("[constraint purity]") && report.contains("[constraint profit]"));
    assert!(report.contains("files = purity-contour.csv profit-contour.csv joint-contour.csv"));
    // the report is usable by check without the model
    let path = tmp.path().join("ds_report.txt").to_string_lossy().into_owned();
    assert_eq!(code(&rds(&["check", &path, "275,275"])), 3);
}

#[test]
fn identify_preconditions_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o").to_string_lossy().into_owned();
    assert_eq!(code(&rds(&["identify", "--n", "4", "--out", &out])), 2);
    assert_eq!(code(&rds(&["identify", "--tol-rel", "-1", "--out", &out])), 2);
    assert_eq!(code(&rds(&["identify", "--alpha", "1.5", "--out", &out])), 2);
    assert!(!tmp.path().join("o").join("ds_report.txt").exists());
}

#[test]
fn config_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    let out = tmp.path().join("o").to_string_lossy().into_owned();
    fs::write(&cfg, "[identify]\nn = 4\n").unwrap();
    let cfg_s = cfg.to_string_lossy().into_owned();
    assert_eq!(code(&rds(&["identify", "--n", "64", "--config", &cfg_s, "--out", &out])), 2);
    fs::write(&cfg, "[identify]\nn = 16\ngrid = 11\nvalidation_points = 32\n").unwrap();
    assert_eq!(code(&rds(&["identify", "--n", "3", "--config", &cfg_s, "--out", &out])), 0);
    let report = fs::read_to_string(tmp.path().join("o").join("ds_report.txt")).unwrap();
    assert!(report.contains("n_samples = 16") && report.contains("grid = 11") && report.contains("points = 32"));
    fs::write(&cfg, "[identify]\nsamples = 16\n").unwrap();
    assert_eq!(code(&rds(&["identify", "--config", &cfg_s, "--out", &out])), 2);
    let missing = tmp.path().join("missing.toml").to_string_lossy().into_owned();
    assert_eq!(code(&rds(&["identify", "--config", &missing, "--out", &out])), 1);
}

#[test]
fn check_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let two = write_synthetic_report(
        tmp.path(),
        &[ConstraintSpec::new("sum", 0, 550.0), ConstraintSpec::new("product", 1, 75625.0)],
    );
    let o = rds(&["check", &two, "300,300"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("inside\njoint value = "));
    assert_eq!(code(&rds(&["check", &two, "250,250"])), 3);
    assert_eq!(code(&rds(&["check", &two, "301,280"])), 2);
    assert_eq!(code(&rds(&["check", &two, "280"])), 2);
    assert_eq!(code(&rds(&["check", &two, "280,abc"])), 2);

    let one = write_synthetic_report(tmp.path(), &[ConstraintSpec::new("sum", 0, 550.0)]);
    let o = rds(&["check", &one, "270,280"]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("boundary\n"));

    let bad = tmp.path().join("bad.txt");
    fs::write(&bad, "[metadata]\nformat = 1\n").unwrap();
    assert_eq!(code(&rds(&["check", &bad.to_string_lossy(), "280,280"])), 2);
    let missing = tmp.path().join("none.txt").to_string_lossy().into_owned();
    assert_eq!(code(&rds(&["check", &missing, "280,280"])), 1);
}

#[test]
fn sobol_output() {
    let o = rds(&["sobol", "1", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "0.5\n");
    let rows: Vec<String> = stdout(&rds(&["sobol", "2", "3"])).lines().map(String::from).collect();
    assert_eq!(rows, ["0.5,0.5", "0.75,0.25", "0.25,0.75"]);
    assert_eq!(stdout(&rds(&["sobol", "1", "2", "--skip", "2"])), "0.75\n0.25\n");
    assert_eq!(code(&rds(&["sobol", "0", "1"])), 2);
    assert_eq!(code(&rds(&["sobol", "17", "1"])), 2);
    assert_eq!(code(&rds(&["sobol", "two", "1"])), 2);
}

#[test]
fn help_succeeds() {
    let o = rds(&["--help"]);
    assert_eq!(code(&o), 0);
    for cmd in ["demo", "identify", "check", "sobol"] {
        assert!(stdout(&o).contains(cmd));
    }
}
