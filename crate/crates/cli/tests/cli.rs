use std::path::PathBuf;
use std::process::{Command, Output};

use intervene_core::{parse_network, what_if_table, Evidence, TargetRef};
use serde_json::Value;

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_intervene"));
    cmd.args(args).env_remove("INTERVENE_BN_CAP");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["-q", "validate", &data("models/demo.json")]);
    assert_eq!(code(&ok), 0);
    assert!(ok.stdout.is_empty());

    let broken = run(&["-q", "validate", &data("demo/broken-row-sum.json")]);
    assert_eq!(code(&broken), 1);
    let out = stdout(&broken);
    assert_eq!(out.lines().count(), 1, "{out}");
    assert!(out.starts_with("Y\trow-sum\t"), "{out}");

    let missing = run(&["-q", "validate", "/definitely/not/here.json"]);
    assert_eq!(code(&missing), 2);
    let err = stderr(&missing);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: io: "), "{err}");
}

#[test]
fn validate_reports_syntax_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"name\": ").unwrap();
    let o = run(&["-q", "validate", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("-\tsyntax\t"));
}

#[test]
fn bounds_text_and_empty_space() {
    let o = run(&[
        "-q",
        "bounds",
        &data("models/demo.json"),
        &data("demo/space.json"),
        "--target",
        "Y=y1",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "0.900000 witness: X=x1\nexplored: 3\n");

    let min = run(&[
        "-q",
        "bounds",
        &data("models/demo.json"),
        &data("demo/space.json"),
        "--target",
        "Y=y1",
        "--direction",
        "min",
    ]);
    assert_eq!(stdout(&min), "0.200000 witness: X=x0\nexplored: 3\n");

    let empty = run(&[
        "-q",
        "bounds",
        &data("models/demo.json"),
        &data("demo/empty-space.json"),
        "--target",
        "Y=y1",
    ]);
    let query = run(&[
        "-q",
        "--json",
        "query",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
    ]);
    let observational = json(&query)["probability"].as_f64().unwrap();
    assert_eq!(
        stdout(&empty),
        format!("{observational:.6} witness: none\nexplored: 1\n")
    );
}

#[test]
fn cap_and_usage_exit_codes() {
    let capped = run_env(
        &[
            "-q",
            "bounds",
            &data("models/demo.json"),
            &data("demo/space.json"),
            "--target",
            "Y=y1",
        ],
        &[("INTERVENE_BN_CAP", "1")],
    );
    assert_eq!(code(&capped), 3);
    assert!(stderr(&capped).starts_with("error: cap-exceeded: "));

    assert_eq!(
        code(&run(&[
            "-q",
            "query",
            &data("models/demo.json"),
            "--target",
            "Y"
        ])),
        4
    );
    assert_eq!(code(&run(&["-q", "frobnicate"])), 4);
    assert_eq!(code(&run(&["-q"])), 4);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn domain_errors_exit_one() {
    let o = run(&["-q", "query", &data("models/demo.json"), "--target", "Y=y9"]);
    assert_eq!(code(&o), 1);
    assert_eq!(
        stderr(&o),
        "error: unknown-state: variable `Y` has no state `y9`\n"
    );

    let o = run(&[
        "-q",
        "query",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
        "--evidence",
        "X=x0",
        "--do",
        "X=x1",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn query_and_intervene() {
    let o = run(&["-q", "query", &data("models/demo.json"), "--target", "Y=y1"]);
    assert_eq!(stdout(&o), "Y=y1\t0.410000\tHigh\n");
    let o = run(&[
        "-q",
        "intervene",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
        "--do",
        "X=x0",
    ]);
    assert_eq!(stdout(&o), "Y=y1\t0.200000\tHigh-intermediate\n");
    assert_eq!(
        code(&run(&[
            "-q",
            "intervene",
            &data("models/demo.json"),
            "--target",
            "Y=y1"
        ])),
        4
    );
}

#[test]
fn explicit_risk_table_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.json");
    std::fs::write(
        &table,
        r#"[{"lower": 0.0, "upper": 0.5, "label": "lower half"}, {"lower": 0.5, "upper": 1.0, "label": "upper half"}]"#,
    )
    .unwrap();
    let o = run(&[
        "-q",
        "query",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
        "--risk-table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "Y=y1\t0.410000\tlower half\n");
}

#[test]
fn json_matches_text() {
    let text = stdout(&run(&[
        "-q",
        "bounds",
        &data("models/demo.json"),
        &data("demo/space.json"),
        "--target",
        "Y=y1",
    ]));
    let j = json(&run(&[
        "-q",
        "--json",
        "bounds",
        &data("models/demo.json"),
        &data("demo/space.json"),
        "--target",
        "Y=y1",
    ]));
    assert_eq!(
        text,
        format!(
            "{}\nexplored: {}\n",
            j["rendered"].as_str().unwrap(),
            j["explored"]
        )
    );
    assert_eq!(j["value"].as_f64().unwrap(), 0.9);
    assert_eq!(j["witness"]["X"], "x1");

    let text = stdout(&run(&[
        "-q",
        "query",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
        "--evidence",
        "X=x0",
    ]));
    let j = json(&run(&[
        "-q",
        "--json",
        "query",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
        "--evidence",
        "X=x0",
    ]));
    let p = j["probability"].as_f64().unwrap();
    assert_eq!(
        text,
        format!("Y=y1\t{p:.6}\t{}\n", j["risk_group"].as_str().unwrap())
    );
    assert_eq!(j["distribution"]["states"][1], "y1");
    assert_eq!(j["distribution"]["probs"][1].as_f64().unwrap(), p);

    let j = json(&run(&[
        "-q",
        "--json",
        "classify",
        &data("models/demo.json"),
        &data("demo/classifier.json"),
        "--feature",
        "X=x1",
    ]));
    assert_eq!(j["label"], "positive");
    assert!((j["posterior"].as_f64().unwrap() - 0.9).abs() < 1e-12);
    let text = stdout(&run(&[
        "-q",
        "classify",
        &data("models/demo.json"),
        &data("demo/classifier.json"),
        "--feature",
        "X=x1",
    ]));
    assert_eq!(
        text,
        format!(
            "positive\t{:.6}\t{}\n",
            j["posterior"].as_f64().unwrap(),
            j["risk_group"].as_str().unwrap()
        )
    );
}

#[test]
fn percent_rendering() {
    let o = run(&[
        "-q",
        "--percent",
        "query",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
    ]);
    assert_eq!(stdout(&o), "Y=y1\t41.0\tHigh\n");
    let o = run(&[
        "-q",
        "bounds",
        "--percent",
        &data("models/demo.json"),
        &data("demo/space.json"),
        "--target",
        "Y=y1",
    ]);
    assert_eq!(stdout(&o), "90.0 witness: X=x1\nexplored: 3\n");
}

#[test]
fn run_report_goes_to_stderr_unless_quiet() {
    let o = run(&["query", &data("models/demo.json"), "--target", "Y=y1"]);
    assert_eq!(stdout(&o), "Y=y1\t0.410000\tHigh\n");
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    let report: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(report["command"], "query");
    assert_eq!(report["exit_code"], 0);
    assert_eq!(report["engine_version"], intervene_core::VERSION);
    assert_eq!(report["inputs_digest"].as_str().unwrap().len(), 64);
    assert!(report["wall_time_ms"].as_f64().unwrap() >= 0.0);

    let again = run(&["query", &data("models/demo.json"), "--target", "Y=y1"]);
    let again: Value = serde_json::from_str(stderr(&again).trim()).unwrap();
    assert_eq!(again["inputs_digest"], report["inputs_digest"]);

    let failed = run(&["validate", "/definitely/not/here.json"]);
    let lines: Vec<&str> = std::str::from_utf8(&failed.stderr)
        .unwrap()
        .lines()
        .collect();
    assert_eq!(lines.len(), 2);
    let report: Value = serde_json::from_str(lines[1]).unwrap();
    assert_eq!(report["exit_code"], 2);

    assert!(
        run(&["-q", "query", &data("models/demo.json"), "--target", "Y=y1"])
            .stderr
            .is_empty()
    );
}

#[test]
fn output_is_deterministic() {
    let args = [
        "-q",
        "whatif",
        &data("models/demo.json"),
        &data("demo/whatif.json"),
        "--target",
        "Y=y1",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn whatif_two_rows_match_library() {
    let o = run(&[
        "-q",
        "whatif",
        &data("models/demo.json"),
        &data("demo/whatif.json"),
        "--target",
        "Y=y1",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3, "{out}");
    assert_eq!(lines[0], "evidence\tmodalities\tY=y1");

    let net = parse_network(&std::fs::read_to_string(data("models/demo.json")).unwrap()).unwrap();
    let sets: Vec<Evidence> =
        serde_json::from_str(&std::fs::read_to_string(data("demo/whatif.json")).unwrap()).unwrap();
    let rows = what_if_table(&net, &[TargetRef::new("Y", "y1")], &sets).unwrap();
    for (line, row) in lines[1..].iter().zip(&rows) {
        let last = line.rsplit('\t').next().unwrap();
        assert_eq!(last, format!("{:.6}", row.posteriors[0].1));
    }

    let rows = run(&[
        "-q",
        "whatif",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
        "--row",
        "",
        "--row",
        "X=x1",
    ]);
    assert_eq!(stdout(&rows), out);
}

#[test]
fn compiled_diagram_agrees_with_classify() {
    let dir = tempfile::tempdir().unwrap();
    let odd = dir.path().join("demo.odd");
    let o = run(&[
        "-q",
        "compile",
        &data("models/demo.json"),
        &data("demo/classifier.json"),
        "--out",
        odd.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let printed = stdout(&run(&[
        "-q",
        "compile",
        &data("models/demo.json"),
        &data("demo/classifier.json"),
    ]));
    assert_eq!(std::fs::read_to_string(&odd).unwrap(), printed);

    for state in ["x0", "x1"] {
        let feature = format!("X={state}");
        let direct = json(&run(&[
            "-q",
            "--json",
            "classify",
            &data("models/demo.json"),
            &data("demo/classifier.json"),
            "--feature",
            &feature,
        ]));
        let via = json(&run(&[
            "-q",
            "--json",
            "classify",
            &data("models/demo.json"),
            &data("demo/classifier.json"),
            "--feature",
            &feature,
            "--diagram",
            odd.to_str().unwrap(),
        ]));
        assert_eq!(direct["label"], via["label"], "{state}");
        assert_eq!(direct["posterior"], via["posterior"]);
    }
}

#[test]
fn classify_text() {
    let o = run(&[
        "-q",
        "classify",
        &data("models/demo.json"),
        &data("demo/classifier.json"),
        "--feature",
        "X=x0",
    ]);
    assert_eq!(stdout(&o), "negative\t0.200000\tHigh-intermediate\n");
    let o = run(&[
        "-q",
        "classify",
        &data("models/demo.json"),
        &data("demo/classifier.json"),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("error: partial-assignment: "));
}

#[test]
fn error_bound_and_sensitivity() {
    let o = run(&[
        "-q",
        "error-bound",
        &data("models/demo.json"),
        &data("demo/classifier.json"),
        &data("demo/space.json"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(
        stdout(&o).starts_with("0.200000 witness: X=x0\n"),
        "{}",
        stdout(&o)
    );

    let o = run(&[
        "-q",
        "sensitivity",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
    ]);
    assert_eq!(
        stdout(&o),
        "variable\tspread\tposteriors\nX\t0.700000\tx0=0.200000,x1=0.900000\nsuggested: X\n"
    );
    let o = run(&[
        "-q",
        "sensitivity",
        &data("models/demo.json"),
        "--target",
        "Y=y1",
        "--cutoff",
        "0.8",
    ]);
    assert!(stdout(&o).ends_with("suggested: none\n"));
}

#[test]
fn serve_reports_bind_failure() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port().to_string();
    let o = run(&["-q", "serve", "--models", &data("models"), "--port", &port]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).lines().any(|l| l.starts_with("error: io: ")));
}
