use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn holeburn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holeburn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

#[test]
fn hoa_sweep_has_one_row_per_point() {
    let out = holeburn(&[
        "witness",
        "hoa",
        "--family",
        "bs",
        "--engineering",
        "all",
        "--m",
        "10",
        "--order",
        "1",
        "--sweep",
        "p=0.01:0.99:99",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 100);
    for label in ["BS", "VFBS", "PABS"] {
        assert_eq!(column(&text, &format!("{label}_hoa1_formula")).len(), 99);
    }
    assert!(column(&text, "PABS_hoa1_nonclassical").iter().all(|v| v == "1"));
}

#[test]
fn reals_use_twelve_significant_digits() {
    let out = holeburn(&["witness", "hos", "--family", "ks", "--alpha", "2", "--order", "2"]);
    let text = stdout(&out);
    let v = &column(&text, "KS_hos2_formula")[0];
    let mantissa = v.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 12, "{v}");
}

#[test]
fn squeezing_appears_above_threshold_alpha() {
    let out = holeburn(&[
        "witness",
        "hos",
        "--family",
        "ks",
        "--chi",
        "0.02",
        "--order",
        "2,4",
        "--sweep",
        "alpha=0:3:31",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let flags = column(&text, "KS_hos2_nonclassical");
    let first = flags.iter().position(|f| f == "1").expect("squeezing somewhere");
    assert!(first > 0, "no squeezing at alpha = 0");
}

#[test]
fn two_point_grid_is_valid_csv() {
    let out = holeburn(&["entropy", "--family", "ecs", "--sweep", "alpha=1:1.5:1"]);
    assert!(out.status.success());
    assert_eq!(column(&stdout(&out), "ECS_entropy").len(), 2);
}

#[test]
fn failing_point_sets_status_and_exit_code() {
    let out = holeburn(&["witness", "hoa", "--family", "bs", "--engineering", "vf", "--p", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(column(&stdout(&out), "status"), ["2"]);

    let out = holeburn(&[
        "witness",
        "hoa",
        "--family",
        "bs",
        "--engineering",
        "vf",
        "--sweep",
        "p=0:0.5:3",
    ]);
    assert!(out.status.success());
    assert_eq!(column(&stdout(&out), "status"), ["2", "0", "0"]);
}

#[test]
fn invalid_arguments_exit_with_two() {
    assert_eq!(holeburn(&["witness", "hoa", "--family", "qq"]).status.code(), Some(2));
    assert_eq!(
        holeburn(&["witness", "hos", "--family", "ks", "--order", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(holeburn(&["reproduce", "fig9z"]).status.code(), Some(2));
    assert_eq!(
        holeburn(&["state", "--family", "ecs", "--alpha", "-1"]).status.code(),
        Some(2)
    );
}

#[test]
fn state_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pabs.json");
    let out = holeburn(&[
        "state",
        "--family",
        "bs",
        "--engineering",
        "pa",
        "--p",
        "0.3",
        "--m",
        "10",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let p: Vec<f64> = v["probabilities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(p.len(), 12);
    assert_eq!(p[0], 0.0);
    let norm: f64 = v["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a[0].as_f64().unwrap().powi(2) + a[1].as_f64().unwrap().powi(2))
        .sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn entropy_closed_form_column() {
    let out = holeburn(&["entropy", "--family", "ecs", "--alpha", "1", "--closed-form"]);
    let text = stdout(&out);
    let a: f64 = column(&text, "ECS_entropy")[0].parse().unwrap();
    let b: f64 = column(&text, "ECS_entropy_closed_form")[0].parse().unwrap();
    assert!((a - b).abs() < 1e-10);
}

fn reproduce_into(dir: &Path, serial: bool) {
    let mut args = vec![
        "reproduce",
        "fig3a",
        "--contour-points",
        "9",
        "--out",
        dir.to_str().unwrap(),
    ];
    if serial {
        args.push("--serial");
    }
    assert!(holeburn(&args).status.success());
}

#[test]
fn reproduce_is_deterministic_across_runs_and_modes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    reproduce_into(a.path(), false);
    reproduce_into(b.path(), true);
    for name in ["fig3a.csv", "fig3a.manifest.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("fig3a.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["fixed_parameters"]["alpha"], 3.0);
    assert_eq!(manifest["fixed_parameters"]["order"], 4.0);
    assert_eq!(
        column(&fs::read_to_string(a.path().join("fig3a.csv")).unwrap(), "chi").len(),
        81
    );
}
