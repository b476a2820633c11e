use std::process::Command;

use fuzzycm::cli::{run_command, Body, Report, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use fuzzycm::contractions::Witness;

fn run(args: &[&str]) -> fuzzycm::cli::Outcome {
    run_command(std::iter::once("fuzzycm").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (i32, Report, String) {
    let mut a = args.to_vec();
    a.extend(["--format", "json-like"]);
    let out = run(&a);
    let report = Report::from_json(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stderr));
    (out.code, report, out.stdout)
}

#[test]
fn paper_passes_and_is_deterministic() {
    let (code, report, a) = json(&["paper", "--seed", "7"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(report.version, 1);
    let Body::Paper { suites } = &report.body else {
        panic!()
    };
    assert_eq!(suites.len(), 4);
    assert!(suites.iter().all(|s| s.passed));
    let (_, _, b) = json(&["paper", "--seed", "7"]);
    assert_eq!(a, b);
}

#[test]
fn reports_round_trip() {
    for args in [
        &["paper"][..],
        &["classify-map", "--scenario", "ex63", "--route", "cm"],
        &["solve", "--scenario", "ex63", "--route", "cm-strong"],
        &["check-space", "--scenario", "ex63"],
        &["gauge", "--scenario", "ex61"],
    ] {
        let (_, report, text) = json(args);
        assert_eq!(report.to_json(), text, "{args:?}");
    }
}

#[test]
fn ex63_cm_obstruction_exit_one() {
    let (code, report, _) = json(&["classify-map", "--scenario", "ex63", "--route", "cm"]);
    assert_eq!(code, EXIT_FAIL);
    let Body::Classification { report } = report.body else {
        panic!()
    };
    match report.conditions[0].witness {
        Some(Witness::Pair { x, y, .. }) => assert_eq!((x, y), (0.0, 1.0)),
        ref w => panic!("{w:?}"),
    }
}

#[test]
fn ex63_m_route_passes() {
    assert_eq!(
        run(&["classify-map", "--scenario", "ex63", "--route", "m"]).code,
        EXIT_PASS
    );
    assert_eq!(run(&["solve", "--scenario", "ex63"]).code, EXIT_PASS);
}

#[test]
fn iterate_ex62_orbit() {
    let (code, report, _) = json(&[
        "iterate",
        "--scenario",
        "ex62",
        "--x0",
        "0.7",
        "--max-len",
        "50",
    ]);
    assert_eq!(code, EXIT_PASS);
    let Body::Iterate { trace, .. } = report.body else {
        panic!()
    };
    assert!(trace.len >= 4);
    assert_eq!(&trace.points[..4], &[0.7, 0.5, 1.0 / 3.0, 0.25]);
}

#[test]
fn out_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let csv = dir.path().join("t.csv");
    let o = run(&[
        "iterate",
        "--scenario",
        "ex63",
        "--x0",
        "5",
        "--format",
        "json-like",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_PASS);
    assert!(o.stdout.is_empty());
    assert!(Report::from_json(&std::fs::read_to_string(&out).unwrap()).is_ok());
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("n,x,t=0.01"));
    assert_eq!(rows.lines().nth(1).unwrap().split(',').nth(1), Some("5"));
}

#[test]
fn usage_and_schema_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(run(&["check-space"]).code, EXIT_USAGE);
    assert_eq!(
        run(&["check-space", "--scenario", "nope.toml"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        run(&["solve", "--scenario", "ex63", "--x0", "abc"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        run(&["solve", "--scenario", "ex63", "--x0", "3"]).code,
        EXIT_USAGE
    );
    assert_eq!(run(&["paper", "--r-grid", "0.5,1"]).code, EXIT_PASS);
    assert_eq!(
        run(&["classify-map", "--scenario", "ex63", "--r-grid", "0.5,1"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        run(&[
            "classify-map",
            "--scenario",
            "ex63",
            "--t-grid",
            "log:0:1:3"
        ])
        .code,
        EXIT_USAGE
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = fuzzycm::cli::BUILTIN[2]
        .1
        .replace("r = \"default\"", "r = [0.5, 1.0]");
    std::fs::write(&bad, text).unwrap();
    let o = run(&["check-space", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(
        o.stderr.contains("grids.r[1]: r must lie in (0,1)"),
        "{}",
        o.stderr
    );
    std::fs::write(&bad, "[space\n").unwrap();
    assert_eq!(
        run(&["check-space", "--scenario", bad.to_str().unwrap()]).code,
        EXIT_USAGE
    );
}

#[test]
fn table_scenario_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.toml");
    std::fs::write(
        &path,
        r#"
name = "contraction"
[space]
carrier = { points = [0, 1, 2] }
constructor = "standard"
complete = true
[map]
table = [[0, 0], [1, 0], [2, 0]]
[grids]
t = [0.5, 1, 2]
r = "0.25, 0.5, 0.75"
[solver]
x0 = 2
"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(run(&["classify-map", "--scenario", p]).code, EXIT_PASS);
    let (code, report, _) = json(&["solve", "--scenario", p]);
    assert_eq!(code, EXIT_PASS);
    let Body::Solve { result } = report.body else {
        panic!()
    };
    assert_eq!((result.z, result.iterations), (Some(0.0), 1));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fuzzycm");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(
        code(&["classify-map", "--scenario", "ex63", "--route", "cm"]),
        Some(1)
    );
    assert_eq!(code(&["check-space", "--scenario", "ex63"]), Some(0));
    assert_eq!(code(&["check-space", "--format", "yaml"]), Some(2));
}
