use serde_json::Value;
use std::f64::consts::PI;
use std::process::{Command, Output};

fn stokes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokes"))
        .args(args)
        .env_remove("STOKES_REL_TOL")
        .env_remove("STOKES_ROOT_FLOOR")
        .env_remove("STOKES_ANGULAR_TOL")
        .env_remove("STOKES_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn schema() -> jsonschema::JSONSchema {
    let text = include_str!("../../../schema/result-document.v1.json");
    let value: Value = serde_json::from_str(text).unwrap();
    jsonschema::JSONSchema::compile(&value).expect("schema compiles")
}

fn assert_valid(doc: &Value) {
    let schema = schema();
    let msgs: Vec<String> = match schema.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    panic!("{}\n{doc:#}", msgs.join("\n"));
}

fn value(doc: &Value, i: usize) -> (f64, f64) {
    let v = &doc["payload"]["values"][i]["value"];
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

#[test]
fn eval_closed_forms() {
    let out = stokes(&["eval", "--m", "3", "--fn", "C", "--E", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    let (re, im) = value(&doc, 0);
    let w = 2.0 * PI / 5.0;
    assert!((re - (1.0 + w.cos())).abs() < 1e-9 && (im - w.sin()).abs() < 1e-9);

    let doc = json(&stokes(&["eval", "--m", "3", "--fn", "f", "--E", "0"]));
    let (re, im) = value(&doc, 0);
    let c = (PI / 5.0).cos();
    assert!((re - (1.0 - 4.0 * c * c)).abs() < 1e-9 && im.abs() < 1e-9);

    let doc = json(&stokes(&["eval", "--m", "3", "--fn", "W", "--n", "0", "--k", "0", "--E", "1+2i"]));
    assert_eq!(value(&doc, 0), (0.0, 0.0));
}

#[test]
fn eval_accepts_several_energies() {
    let doc = json(&stokes(&["eval", "--m", "4", "--fn", "h", "--E", "0,-1.5+2i", "--E", "3e-1i"]));
    assert_eq!(doc["payload"]["values"].as_array().unwrap().len(), 3);
    let e = &doc["payload"]["values"][1]["E"];
    assert_eq!((e["re"].as_f64(), e["im"].as_f64()), (Some(-1.5), Some(2.0)));
}

#[test]
fn csv_grid_output() {
    let out = stokes(&["eval", "--fn", "C", "--segment", "0", "4", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "re_E,im_E,re_value,im_value,err");
    assert_eq!(lines.len(), 6);
    let row: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row.len(), 5);
    assert_eq!(row[0], 2.0);

    let out = stokes(&["eval", "--fn", "C", "--circle", "2", "7", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 8);

    // CSV is for grids only
    let out = stokes(&["eval", "--fn", "C", "--E", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quartic_eigenvalues() {
    let out = stokes(&["roots", "--m", "4", "--eig", "0", "3", "--rect", "-10", "0", "-1", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    let roots = doc["payload"]["roots"].as_array().unwrap();
    let expected = [1.0603620904841829, 3.7996730298013941, 7.4556979379867383];
    assert_eq!(roots.len(), expected.len());
    for (r, lam) in roots.iter().zip(expected) {
        let re = r["location"]["re"].as_f64().unwrap();
        assert!((re + lam).abs() < 1e-6 * lam, "{re}");
        assert_eq!(r["winding_certificate"], 1);
    }
    assert_eq!(doc["payload"]["radial"]["pass"], true);
    assert!((doc["payload"]["radial"]["angles"][0].as_f64().unwrap() - PI).abs() < 1e-15);
}

#[test]
fn zeros_of_c_are_positive() {
    let out = stokes(&["roots", "--m", "3", "--fn", "C", "--disk", "0", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_valid(&doc);
    let roots = doc["payload"]["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 4);
    let moduli: Vec<f64> = roots.iter().map(|r| r["modulus"].as_f64().unwrap()).collect();
    assert!(moduli.windows(2).all(|w| w[0] <= w[1]));
    assert!((moduli[0] - 1.156267071988).abs() < 1e-9);
    assert_eq!(doc["payload"]["radial"]["pass"], true);
}

#[test]
fn one_points_lie_on_the_rotated_rays() {
    let out = stokes(&["roots", "--m", "3", "--fn", "f-1", "--disk", "0", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let roots = doc["payload"]["roots"].as_array().unwrap();
    assert!(!roots.is_empty());
    for r in roots {
        let arg = r["argument"].as_f64().unwrap();
        assert!((arg.abs() - 2.0 * PI / 5.0).abs() < 1e-6, "{arg}");
    }
}

#[test]
fn verify_suites() {
    let out = stokes(&["verify", "--m", "4", "--suite", "oracles"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["payload"]["failed"], 0);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.lines().all(|l| l.starts_with("PASS ")));

    let out = stokes(&["verify", "--m", "3", "--suite", "consistency"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_valid(&json(&out));

    let out = stokes(&["verify", "--m", "3", "--suite", "thm2", "--radius", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_valid(&doc);
    assert!(doc["payload"]["checks"].as_array().unwrap().len() >= 8);
}

#[test]
fn failed_checks_exit_with_one() {
    // no certificate can meet a zero residual floor
    let out = stokes(&["verify", "--m", "3", "--suite", "thm2", "--radius", "4", "--root-floor", "1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["status"], "check_failed");
    assert!(doc["payload"]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["verify", "--m", "2", "--suite", "oracles"][..],
        &["eval", "--fn", "q", "--E", "0"],
        &["eval", "--fn", "C", "--E", "1+"],
        &["rays", "check", "--a", "0", "--b", "x/5pi"],
        &["rays", "three-ray", "--alpha", "4"],
        &["roots", "--fn", "C", "--disk", "0", "30", "--max-roots", "1"],
        &["eval", "--fn", "C", "--E", "0", "--rel-tol", "-1"],
    ] {
        let out = stokes(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let doc = json(&out);
        assert_valid(&doc);
        assert_eq!(doc["status"], "error");
        assert_eq!(doc["payload"]["error"]["kind"], "usage");
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    // far beyond what double precision can integrate
    let out = stokes(&["eval", "--fn", "C", "--E", "1e20"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = json(&out);
    assert_valid(&doc);
    assert_eq!(doc["payload"]["error"]["kind"], "numerical");
}

#[test]
fn ray_commands() {
    let doc = json(&stokes(&["rays", "check", "--a", "0", "--b", "2/5pi,-2/5pi"]));
    assert_valid(&doc);
    let report = &doc["payload"]["report"];
    assert_eq!(report["admissible"], true);
    assert!((report["rho"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-12);

    let doc = json(&stokes(&["rays", "three-ray", "--alpha", "2.5"]));
    assert_eq!(doc["payload"]["verdict"]["kind"], "inadmissible");

    let doc = json(&stokes(&["rays", "classify-lines", "--parallel"]));
    assert_eq!(doc["payload"]["permitted_forms"], serde_json::json!(["P(exp(a z))"]));

    let doc = json(&stokes(&["rays", "classify-lines", "--line1", "0@0", "--line2", "1+1i@pi/2"]));
    assert_eq!(doc["payload"]["geometry"]["kind"], "intersecting");
    assert_eq!(doc["payload"]["permitted_forms"].as_array().unwrap().len(), 3);

    let doc = json(&stokes(&["rays", "classify-lines", "--identical"]));
    assert_eq!(doc["payload"]["unconstrained"], true);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let cases: [&[&str]; 3] = [
        &["eval", "--m", "5", "--fn", "g", "--circle", "6", "12"],
        &["roots", "--m", "3", "--fn", "C", "--disk", "0", "8"],
        &["verify", "--m", "3", "--suite", "consistency", "--seed", "7"],
    ];
    for args in cases {
        let one = stokes(&[args, &["--threads", "1"]].concat());
        let two = stokes(&[args, &["--threads", "2"]].concat());
        assert_eq!(one.status.code(), Some(0), "{args:?}");
        assert_eq!(one.stdout, two.stdout, "{args:?}");
    }
}

#[test]
fn environment_overrides_default_tolerances() {
    let run = |flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_stokes"));
        cmd.args(["eval", "--fn", "C", "--E", "1"]).env("STOKES_REL_TOL", "1e-10");
        if let Some(f) = flag {
            cmd.args(["--rel-tol", f]);
        }
        let out = cmd.output().unwrap();
        json(&out)["config"]["rel_tol"].as_f64().unwrap()
    };
    assert_eq!(run(None), 1e-10);
    assert_eq!(run(Some("1e-11")), 1e-11);
}

#[test]
fn documents_echo_command_and_config() {
    let doc = json(&stokes(&["eval", "--m", "4", "--fn", "C", "--E", "2", "--seed", "9", "--timing"]));
    assert_valid(&doc);
    assert_eq!(doc["schema_version"], "stokes-result/v1");
    assert_eq!(doc["command"]["name"], "eval");
    assert_eq!(doc["config"]["m"], 4);
    assert_eq!(doc["config"]["seed"], 9);
    assert!(doc["config"].get("threads").is_none());
    assert!(doc["timing"]["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}
