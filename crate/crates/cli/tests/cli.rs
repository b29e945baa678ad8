use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fbk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbk"))
        .args(args)
        .output()
        .expect("fbk runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

/// Clockwise unit circle in ℝ⁴ framed by (V, e₃, e₄), the first two fields
/// rotated `turns` times. Index is `turns` mod 2.
fn plane_link(samples: usize, turns: f64) -> Value {
    let mut points = Vec::new();
    let mut f = vec![Vec::new(), Vec::new(), Vec::new()];
    for k in 0..samples {
        let s = k as f64 / samples as f64;
        let (c, sn) = ((TAU * s).cos(), -(TAU * s).sin());
        points.push(json!([c, sn, 0.0, 0.0]));
        let (a, b) = ((TAU * turns * s).cos(), (TAU * turns * s).sin());
        f[0].push(json!([a * c, a * sn, b, 0.0]));
        f[1].push(json!([-b * c, -b * sn, a, 0.0]));
        f[2].push(json!([0.0, 0.0, 0.0, 1.0]));
    }
    json!({
        "ambient": {"kind": "euclidean", "dimension": 4},
        "components": [{"points": points, "framing": f}]
    })
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_names_every_scenario() {
    let o = fbk(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "pontryagin-circle",
        "suspended-hopf",
        "s5-alt-section",
        "cylinder-spin",
    ] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn scenario_report_shape() {
    let o = fbk(&[
        "scenario",
        "pontryagin-circle",
        "--set",
        "turns=1",
        "--check",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["kappa"], 1);
    assert_eq!(r["delta"], 1);
    assert_eq!(r["nonzero_count_mod2"], 1);
    assert_eq!(r["components"].as_array().unwrap().len(), 1);
    assert!(r["diagnostics"]["tolerances"]["closure_tol"].is_number());
}

#[test]
fn all_scenarios_check() {
    let o = fbk(&["scenario", "all", "--check"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o).as_array().unwrap().len(), 8);
}

#[test]
fn output_is_byte_identical() {
    for name in ["suspended-hopf", "s5-vector-fields", "cylinder-spin"] {
        let a = fbk(&["scenario", name]);
        let b = fbk(&["scenario", name]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(code(&fbk(&["scenario", "no-such-thing"])), 5);
    assert_eq!(
        code(&fbk(&[
            "scenario",
            "pontryagin-circle",
            "--set",
            "colour=red"
        ])),
        3
    );
    assert_eq!(
        code(&fbk(&[
            "scenario",
            "pontryagin-circle",
            "--set",
            "turns=two"
        ])),
        3
    );
    assert_eq!(
        code(&fbk(&["scenario", "suspended-hopf", "--set", "turns=1"])),
        3
    );
    assert_eq!(
        code(&fbk(&["scenario", "cylinder-spin", "--set", "circles=3"])),
        3
    );
    assert_eq!(
        code(&fbk(&[
            "scenario",
            "suspended-hopf",
            "--set",
            "value=1,0,0,0"
        ])),
        3
    );
    assert_eq!(
        code(&fbk(&[
            "scenario",
            "pontryagin-circle",
            "--set",
            "newton_tol=-1"
        ])),
        3
    );
    assert_eq!(code(&fbk(&["frobnicate"])), 3);
    assert_eq!(code(&fbk(&["link", "/nonexistent/link.json"])), 3);
}

#[test]
fn csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("csv");
    let o = fbk(&["scenario", "suspended-hopf", "--csv", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(out.join("component_0.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "s,x1,x2,x3,x4,x5");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 16);
    for r in &rows {
        let norm: f64 = r[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-8);
    }
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
}

#[test]
fn link_file_invariant() {
    let dir = tempfile::tempdir().unwrap();
    for (turns, kappa) in [(0.0, 0), (1.0, 1), (2.0, 0)] {
        let path = write(dir.path(), "link.json", &plane_link(256, turns));
        let o = fbk(&["link", &path]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let r = stdout_json(&o);
        assert_eq!(r["kappa"], kappa, "turns {turns}");
        assert_eq!(r["delta"], kappa);
    }
    let path = write(dir.path(), "link.json", &plane_link(64, 1.0));
    let csv = dir.path().join("out");
    assert_eq!(
        code(&fbk(&["link", &path, "--csv", csv.to_str().unwrap()])),
        0
    );
    assert!(csv.join("component_0.csv").exists());
}

#[test]
fn invalid_link_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.json");
    std::fs::write(
        &p,
        "{\"ambient\": {\"kind\": \"euclidean\",\n\"dimension\": 4},\n\"components\": [",
    )
    .unwrap();
    let o = fbk(&["link", p.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let mut off = plane_link(64, 0.0);
    off["ambient"] = json!({"kind": "sphere", "dimension": 4});
    assert_eq!(
        code(&fbk(&["link", &write(dir.path(), "off.json", &off)])),
        3
    );

    let mut spin = plane_link(64, 0.0);
    spin["ambient"]["spin_twist"] = json!("nonstandard");
    assert_eq!(
        code(&fbk(&["link", &write(dir.path(), "spin.json", &spin)])),
        3
    );

    let mut dependent = plane_link(64, 0.0);
    dependent["components"][0]["framing"][2] = dependent["components"][0]["framing"][1].clone();
    assert_eq!(
        code(&fbk(&["link", &write(dir.path(), "dep.json", &dependent)])),
        3
    );

    let mut short = plane_link(64, 0.0);
    short["components"][0]["framing"]
        .as_array_mut()
        .unwrap()
        .pop();
    assert_eq!(
        code(&fbk(&["link", &write(dir.path(), "short.json", &short)])),
        3
    );

    assert_eq!(
        code(&fbk(&[
            "link",
            &write(dir.path(), "few.json", &plane_link(8, 0.0))
        ])),
        3
    );
    let path = write(dir.path(), "ok.json", &plane_link(64, 0.0));
    assert_eq!(code(&fbk(&["link", &path, "--set", "turns=1"])), 3);
}

#[test]
fn coarse_link_cannot_refine() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "coarse.json", &plane_link(16, 3.0));
    let o = fbk(&["link", &path, "--set", "lift_angle_max=0.05"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}
