use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn w2d(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_w2d"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = w2d(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic_and_manifested() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        ok(
            d,
            &[
                "gen", "--family", "noise", "--seed", "3", "--N", "33", "--out", "n.gf",
            ],
        );
    }
    let bytes = fs::read(a.path().join("n.gf")).unwrap();
    assert_eq!(bytes, fs::read(b.path().join("n.gf")).unwrap());
    let m = json(&a.path().join("n.gf.manifest.json"));
    assert_eq!(m["command"], "gen");
    assert_eq!(m["flags"]["N"], 33);
    assert_eq!(m["outputs"][0]["path"], "n.gf");
    assert_eq!(
        m["outputs"][0]["sha256"],
        format!("{:x}", Sha256::digest(&bytes))
    );
}

#[test]
fn different_seeds_differ() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &[
            "gen", "--family", "noise", "--seed", "1", "--N", "17", "--out", "a.gf",
        ],
    );
    ok(
        d.path(),
        &[
            "gen", "--family", "noise", "--seed", "2", "--N", "17", "--out", "b.gf",
        ],
    );
    assert_ne!(
        fs::read(d.path().join("a.gf")).unwrap(),
        fs::read(d.path().join("b.gf")).unwrap()
    );
}

#[test]
fn failed_run_leaves_no_outputs() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["gen", "--family", "cone", "--N", "17", "--out", "u.gf"],
    );
    let out = w2d(
        d.path(),
        &[
            "decay", "--in", "u.gf", "--M", "1", "--out", "d.csv", "--report", "fit.json",
        ],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    for name in ["d.csv", "fit.json", "d.csv.manifest.json"] {
        assert!(!d.path().join(name).exists(), "{name} left behind");
    }
}

#[test]
fn refuses_to_overwrite_input() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["gen", "--family", "cone", "--N", "17", "--out", "u.gf"],
    );
    let before = fs::read(d.path().join("u.gf")).unwrap();
    let out = w2d(d.path(), &["maximal", "--in", "u.gf", "--out", "u.gf"]);
    assert!(!out.status.success());
    assert_eq!(fs::read(d.path().join("u.gf")).unwrap(), before);
}

#[test]
fn decay_csv_has_header_and_one_row_per_level() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["gen", "--family", "cone", "--N", "17", "--out", "u.gf"],
    );
    ok(
        d.path(),
        &["decay", "--in", "u.gf", "--kmax", "3", "--out", "d.csv"],
    );
    let text = fs::read_to_string(d.path().join("d.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,kappa,alpha");
    assert_eq!(lines.len(), 5);
    for (k, line) in lines[1..].iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], k.to_string());
        assert_eq!(cols[1].parse::<f64>().unwrap(), 2f64.powi(k as i32));
    }
}

#[test]
fn verify_on_zero_pair_reports_undefined_ratio() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &[
            "gen", "--family", "constant", "--c", "0", "--N", "33", "--out", "u.gf",
        ],
    );
    ok(
        d.path(),
        &[
            "gen", "--family", "constant", "--c", "0", "--N", "33", "--out", "f.gf",
        ],
    );
    ok(
        d.path(),
        &["verify", "--u", "u.gf", "--f", "f.gf", "--report", "r.json"],
    );
    let r = json(&d.path().join("r.json"));
    assert_eq!(r["ratio_undefined"], true);
    assert!(r["ratio"].is_null());
    assert_eq!(r["w2d_contact"], 0.0);
}

#[test]
fn lpsum_brackets_the_quadrature() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &[
            "gen", "--family", "noise", "--seed", "5", "--N", "33", "--out", "g.gf",
        ],
    );
    ok(d.path(), &["maximal", "--in", "g.gf", "--out", "mg.gf"]);
    ok(
        d.path(),
        &[
            "lpsum", "--in", "mg.gf", "--eta", "0.25", "--p", "1.5", "--out", "s.json",
        ],
    );
    let r = json(&d.path().join("s.json"));
    let text = r.to_string();
    let get = |k: &str| {
        r[k].as_f64()
            .unwrap_or_else(|| panic!("{k} missing in {text}"))
    };
    let q = get("quadrature");
    assert!(get("lower") <= q && q <= get("upper"));
}
