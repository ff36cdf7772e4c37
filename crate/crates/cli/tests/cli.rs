use std::process::{Command, Output};

fn gst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gst"))
        .args(args)
        .env_remove("GST_SEED")
        .output()
        .expect("gst runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn form_reports_inertia_and_slice() {
    let o = gst(&["form", "--n", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("(3, 1, 3)"), "{text}");
    assert!(text.contains("I × S² × S²"));

    let o = gst(&["form", "--n", "5", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 5);
    assert_eq!(v["inertia"], serde_json::json!([2, 1, 2]));
}

#[test]
fn invalid_n_is_usage_error() {
    assert_eq!(gst(&["form", "--n", "2"]).status.code(), Some(2));
    assert_eq!(gst(&["restricted", "--n", "1"]).status.code(), Some(2));
    assert_eq!(gst(&["oracle", "--n", "17"]).status.code(), Some(2));
    assert_eq!(gst(&["form"]).status.code(), Some(2));
}

#[test]
fn restricted_examples() {
    let text = stdout(&gst(&["restricted", "--n", "5"]));
    assert!(text.contains("-3(x1 - x3)^2"), "{text}");
    assert!(text.contains("kernel dim: 2"));
    assert!(text.contains("b2 match=true"));

    let v = json(&gst(&["restricted", "--n", "6", "--format", "json"]));
    assert_eq!(v["kernel"], serde_json::json!([["1", "1", "1", "1", "1", "1"]]));

    let o = gst(&["restricted", "--n", "9", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["comparison"], "n/a");
    assert_eq!(v["b2_comparison"], "n/a");
}

#[test]
fn oracle_examples() {
    let o = gst(&["oracle", "--n", "4", "--trials", "100", "--seed", "7", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["tally"], "100/100");

    let o = gst(&["oracle", "--n", "3", "--trials", "1", "--x", "1,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("residual = -1/16"));

    let o = gst(&["oracle", "--n", "4", "--x", "1,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn components_check_and_warning() {
    let o = gst(&["components", "--n", "4", "--samples", "3000", "--check", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["stable_count"], 2);
    assert_eq!(v["separation"]["opposite_edges_below_gap"], 0);

    let o = gst(&["components", "--n", "4", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no stable plateau"));

    let o = gst(&["components", "--n", "4", "--samples", "10", "--check"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn components_explicit_grid_and_csv() {
    let o = gst(&[
        "components", "--n", "5", "--samples", "500", "--eps-min", "0.05", "--eps-max", "5",
        "--eps-steps", "9", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("eps,count"));
    assert_eq!(text.lines().count(), 10);

    let bad = gst(&["components", "--n", "5", "--eps-min", "1", "--eps-max", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn cloud_export() {
    let dir = std::env::temp_dir().join(format!("gst-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("cloud.csv");
    let o = gst(&["components", "--n", "4", "--samples", "200", "--cloud-out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("n,t,margin,x1,x2,x3,x4,y1,y2,y3,y4,cyl\n"));
    assert_eq!(body.lines().count(), 201);
    let js = dir.join("cloud.json");
    gst(&["components", "--n", "4", "--samples", "200", "--cloud-out", js.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&js).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 200);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn path_examples() {
    let o = gst(&["path", "--n", "5", "--random-pair", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("validation: pass"));

    let o = gst(&["path", "--n", "4", "--random-pair", "--opposite-cylinders"]);
    assert_eq!(o.status.code(), Some(3));

    let o = gst(&["path", "--n", "6", "--random-pair", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["validation"]["ok"], true);
    assert!(v["validation"]["max_abs_psi"].as_f64().unwrap() < 1e-8);
}

#[test]
fn path_with_given_endpoints() {
    // a point is in GST_n when it is psi-free and not palindromic
    let o = gst(&["path", "--n", "5", "--p", "0.5,0.5,0.5,0.5,0.5", "--q", "0.5,0.5,0.5,0.5,0.5"]);
    assert_eq!(o.status.code(), Some(2));

    let v = json(&gst(&["path", "--n", "7", "--random-pair", "--seed", "4", "--format", "json"]));
    let p: Vec<String> = v["p"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
    let q: Vec<String> = v["q"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
    // the rounded endpoints are still psi-free to about 1e-12
    let dir = std::env::temp_dir().join(format!("gst-path-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("w.csv");
    let o = gst(&[
        "path", "--n", "7", "--p", &p.join(","), "--q", &q.join(","), "--waypoints-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("index,x1,x2,x3,x4,x5,x6,x7\n"));
    assert!(body.lines().count() > 2);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn report_truncated_and_deterministic() {
    let args = ["report", "--nmax", "5", "--samples", "2000", "--trials", "20", "--seed", "3"];
    let a = gst(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let v = json(&a);
    assert_eq!(v["components"], serde_json::json!({"3": 2, "4": 2, "5": 1}));
    assert_eq!(v["passed"], true);
    assert!(v["inertia"].get("6").is_none());
    assert_eq!(gst(&args).stdout, a.stdout);
}

#[test]
fn seed_from_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_gst"))
            .args(["path", "--n", "5", "--random-pair", "--format", "json"])
            .env("GST_SEED", seed)
            .output()
            .unwrap()
    };
    let a = json(&run("11"));
    assert_eq!(a["seed"], 11);
    assert_eq!(json(&gst(&["path", "--n", "5", "--random-pair", "--seed", "11", "--format", "json"])), a);
}
