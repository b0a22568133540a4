use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_santalo-lab"))
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SANTALO_LAB_THREADS", t),
        None => cmd.env_remove("SANTALO_LAB_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

// small but still concentrated enough for the tail diagnostics
const QUICK_REPRODUCE: &[&str] = &["reproduce", "--dim", "200", "--samples", "2000", "--grid-points", "16", "--seed", "7"];

#[test]
fn reproduce_is_byte_identical_across_runs_and_threads() {
    let a = run(QUICK_REPRODUCE, None);
    let b = run(QUICK_REPRODUCE, Some("1"));
    let c = run(QUICK_REPRODUCE, Some("3"));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert!(a.stdout.len() > 500);
}

#[test]
fn stochastic_commands_are_deterministic() {
    for args in [
        &["intersect", "--dim", "5", "--p", "1", "--q", "2", "--s", "0.8", "--samples", "20000"][..],
        &["sections", "--dim", "200", "--grid-points", "8", "--samples", "1000", "--format", "csv"][..],
        &["santalo", "--dim", "3", "--body", "l1-ball", "--samples", "4000"][..],
    ] {
        let a = run(args, Some("1"));
        let b = run(args, Some("2"));
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let s1 = json(&run(&["intersect", "--dim", "5", "--samples", "5000", "--seed", "1"], None));
    let s2 = json(&run(&["intersect", "--dim", "5", "--samples", "5000", "--seed", "2"], None));
    assert_ne!(s1["fraction"], s2["fraction"]);
}

#[test]
fn progress_goes_to_stderr_only() {
    let out = run(&["sections", "--dim", "200", "--grid-points", "4", "--samples", "500"], None);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sections: 4/4"), "{err}");
    let v = json(&out);
    assert_eq!(v["points"].as_array().unwrap().len(), 4);
}

#[test]
fn reproduce_report_constants() {
    let out = run(QUICK_REPRODUCE, None);
    let v = json(&out);
    let s0 = v["constants"]["s0"].as_f64().unwrap();
    assert_eq!(format!("{s0:.6}"), "-0.290815");
    assert_eq!(v["constants"]["target_lo"].as_f64().unwrap(), 0.142673);
    assert_eq!(v["constants"]["target_hi"].as_f64().unwrap(), 0.18383);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["gamma"].as_f64().unwrap(), 0.05);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["measured"]["ratio_over_polar_chord"].as_f64().unwrap() < v["measured"]["ratio_over_hull_height"].as_f64().unwrap());
}

// Checks `type`, `required`, `properties`, `items`, `enum`, `const` and `minimum`.
fn validate(schema: &Value, v: &Value, path: &str) -> Vec<String> {
    let mut errs = Vec::new();
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|x| x.as_str()).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "number" => v.is_number(),
            "integer" => v.is_i64() || v.is_u64(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            errs.push(format!("{path}: expected {types:?}, got {v}"));
            return errs;
        }
    }
    if let Some(c) = schema.get("const") {
        if c != v {
            errs.push(format!("{path}: expected {c}, got {v}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(v) {
            errs.push(format!("{path}: {v} not in {options:?}"));
        }
    }
    if let (Some(m), Some(x)) = (schema.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < m {
            errs.push(format!("{path}: {x} < {m}"));
        }
    }
    if let Some(Value::Array(req)) = schema.get("required") {
        for k in req.iter().filter_map(Value::as_str) {
            if v.get(k).is_none() {
                errs.push(format!("{path}: missing {k}"));
            }
        }
    }
    if let Some(Value::Object(props)) = schema.get("properties") {
        for (k, sub) in props {
            if let Some(x) = v.get(k) {
                errs.extend(validate(sub, x, &format!("{path}.{k}")));
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            errs.extend(validate(items, x, &format!("{path}[{i}]")));
        }
    }
    errs
}

#[test]
fn reproduce_report_matches_schema() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/reproduce.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let v = json(&run(QUICK_REPRODUCE, None));
    let errs = validate(&schema, &v, "$");
    assert!(errs.is_empty(), "{errs:#?}");
    assert!(!v["checks"].as_array().unwrap().is_empty());

    let bad = serde_json::json!({ "version": 1, "config": {} });
    assert!(!validate(&schema, &bad, "$").is_empty());
}

#[test]
fn centroid_hull_limit_gap() {
    let v = json(&run(&["centroid-hull", "--dim", "2000"], None));
    assert!(v["limit_gap"].as_f64().unwrap() < 0.01);
    assert_eq!(v["config"]["dim"], 2000);
    assert_eq!(v["config"]["samples"], 100000);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["reproduce", "--format", "xml"][..],
        &["no-such-command"][..],
        &["ball-volume", "--dim", "ten"][..],
        &["intersect", "--p", "0.5"][..],
        &[][..],
    ] {
        let out = run(args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
    assert_eq!(run(&["--help"], None).status.code(), Some(0));
}

#[test]
fn numeric_failures_exit_1_with_json() {
    // too few dimensions for the section mass to concentrate in the window
    let out = run(&["polar-centroid", "--dim", "5", "--samples", "1000", "--grid-points", "16"], None);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "diagnostics");
    assert_eq!(v["config"]["dim"], 5);

    let out = run(&["half-ball", "--dims", "1"], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "domain");

    let out = run(&["santalo", "--dim", "3", "--search", "grid"], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "unsupported");
}

#[test]
fn csv_is_key_value() {
    let out = run(&["ball-volume", "--dim", "3", "--p", "1", "--format", "csv"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    let row = text.lines().find(|l| l.starts_with("log_volume,")).unwrap();
    let x: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((x - (4.0f64 / 3.0).ln()).abs() < 1e-12);
    assert!(text.lines().all(|l| l.split(',').count() == 2));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("santalo-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&["mixed-volume", "--dim", "2", "--t", "0.5", "--out", path.to_str().unwrap()], None);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let want = (std::f64::consts::PI + 4.0 + 1.0).ln();
    assert!((v["log_minkowski_volume"].as_f64().unwrap() - want).abs() < 1e-13);
    std::fs::remove_dir_all(dir).unwrap();
}
