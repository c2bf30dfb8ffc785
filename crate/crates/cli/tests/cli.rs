use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use symtrig_cli::{load_valid, CoefficientFile, System};
use symtrig_core::generators::gen_trig;
use symtrig_core::trig::validate_trig;
use tempfile::TempDir;

fn symtrig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symtrig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &TempDir, name: &str, kind: &str, n: &str, horizon: &str, seed: &str) -> PathBuf {
    let out = path(dir, name);
    let o = symtrig(&[
        "generate", "--kind", kind, "--n", n, "--N", horizon, "--seed", seed, "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn csv_rows(p: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(p).unwrap();
    r.records().map(Result::unwrap).collect()
}

#[test]
fn generated_trig_file_validates() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "t.json", "trig", "3", "64", "7");
    match load_valid(&f).unwrap() {
        System::Trig(c) => {
            assert_eq!((c.n(), c.horizon()), (3, 64));
            assert!(validate_trig(&c, 1e-12).all_pass());
        }
        other => panic!("wrong kind {:?}", other.kind()),
    }
    let json: Value = serde_json::from_str(&fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(json["kind"], "trig");
    assert_eq!(json["N"], 64);
    assert_eq!(json["seed"], 7);
    assert_eq!(json["P"].as_array().unwrap().len(), 65);
    assert_eq!(json["Q"][0].as_array().unwrap().len(), 9);
}

#[test]
fn generate_matches_the_library_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "t.json", "trig", "2", "5", "11");
    let file = CoefficientFile::read(&f).unwrap();
    let direct = CoefficientFile::from_trig(&gen_trig(2, 5, 1.0, 11).unwrap());
    assert_eq!(file.P, direct.P);
    assert_eq!(file.Q, direct.Q);
}

#[test]
fn generate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    for kind in ["trig", "hyperbolic"] {
        let a = generate(&dir, "a.json", kind, "3", "16", "9");
        let a = fs::read(a).unwrap();
        let b = generate(&dir, "b.json", kind, "3", "16", "9");
        assert_eq!(a, fs::read(b).unwrap());
    }
}

#[test]
fn generate_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "x.json");
    let o = symtrig(&["generate", "--kind", "trig", "--n", "0", "--N", "4", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
    let o = symtrig(&["generate", "--kind", "trig", "--n", "2", "--N", "-1", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    let o = symtrig(&[
        "generate", "--kind", "hyperbolic", "--n", "2", "--N", "4", "--sign-diag", "1,0.5",
        "--out", s(&out),
    ]);
    assert_eq!(code(&o), 3);
    let o = symtrig(&["generate", "--kind", "sine", "--n", "2", "--N", "4", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("missing").join("x.json");
    let o = symtrig(&["generate", "--kind", "trig", "--n", "1", "--N", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&symtrig(&["--help"])), 0);
    assert_eq!(code(&symtrig(&["--version"])), 0);
    assert_eq!(code(&symtrig(&["verify", "--help"])), 0);
    assert_eq!(code(&symtrig(&[])), 3);
}

#[test]
fn negative_sign_diagonal_is_recorded() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "h.json");
    let o = symtrig(&[
        "generate", "--kind", "hyperbolic", "--n", "2", "--N", "3", "--sign-diag", "1,-1",
        "--seed", "2", "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let file = CoefficientFile::read(&out).unwrap();
    assert_eq!(file.sign_diag, Some(vec![1.0, -1.0]));
    assert!(file.P.unwrap().iter().all(|p| p[3] < 0.0));
}

#[test]
fn simulate_row_count_and_format() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "t.json", "trig", "2", "10", "3");
    let out = path(&dir, "traj.csv");
    let o = symtrig(&["simulate", s(&f), "--k0", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("k,i,j,X,U\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 12 * 4);
    assert_eq!(&rows[0][3], "0.0000000000000000e0");
    assert_eq!(&rows[0][4], "1.0000000000000000e0");
    for r in &rows {
        let x: f64 = r[3].parse().unwrap();
        assert_eq!(format!("{x:.16e}"), r[3]);
    }
}

#[test]
fn simulate_zero_trig_system() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "z.json");
    let eye = vec![1.0, 0.0, 0.0, 1.0];
    let zero = vec![0.0; 4];
    let json = serde_json::json!({
        "kind": "trig", "n": 2, "N": 3,
        "P": vec![eye; 4], "Q": vec![zero; 4],
    });
    fs::write(&f, json.to_string()).unwrap();
    let out = path(&dir, "traj.csv");
    assert_eq!(code(&symtrig(&["simulate", s(&f), "--out", s(&out)])), 0);
    for r in csv_rows(&out) {
        let x: f64 = r[3].parse().unwrap();
        let u: f64 = r[4].parse().unwrap();
        assert_eq!(x, 0.0);
        assert_eq!(u, if r[1] == r[2] { 1.0 } else { 0.0 });
    }
}

#[test]
fn simulate_scalar_hyperbolic_ln_two() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "h.json");
    let json = serde_json::json!({
        "kind": "hyperbolic", "n": 1, "N": 4,
        "P": vec![vec![1.25]; 5], "Q": vec![vec![0.75]; 5],
    });
    fs::write(&f, json.to_string()).unwrap();
    let out = path(&dir, "traj.csv");
    assert_eq!(code(&symtrig(&["simulate", s(&f), "--out", s(&out)])), 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 6);
    let row = rows.iter().find(|r| &r[0] == "2").unwrap();
    assert_eq!(row[3].parse::<f64>().unwrap(), 1.875);
    assert_eq!(row[4].parse::<f64>().unwrap(), 2.125);
}

#[test]
fn simulate_rejects_invalid_coefficients() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "bad.json");
    let json = serde_json::json!({
        "kind": "trig", "n": 1, "N": 1, "P": [[1.0], [0.9]], "Q": [[0.0], [0.0]],
    });
    fs::write(&f, json.to_string()).unwrap();
    let out = path(&dir, "traj.csv");
    let o = symtrig(&["simulate", s(&f), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("eq10"), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn simulate_interior_base_point() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "t.json", "trig", "1", "6", "1");
    let out = path(&dir, "traj.csv");
    assert_eq!(code(&symtrig(&["simulate", s(&f), "--k0", "3", "--out", s(&out)])), 0);
    let rows = csv_rows(&out);
    assert_eq!(&rows[3][3], "0.0000000000000000e0");
    assert_eq!(&rows[3][4], "1.0000000000000000e0");
    let o = symtrig(&["simulate", s(&f), "--k0", "8", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn malformed_files_are_rejected() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "bad.json");
    let out = path(&dir, "o");
    fs::write(&f, "{ not json").unwrap();
    assert_eq!(code(&symtrig(&["simulate", s(&f), "--out", s(&out)])), 2);
    let json = serde_json::json!({"kind": "trig", "n": 2, "N": 1, "P": [[1,0,0,1]], "Q": [[0,0,0,0]]});
    fs::write(&f, json.to_string()).unwrap();
    assert_eq!(code(&symtrig(&["verify", s(&f), "--out", s(&out)])), 2);
    let missing = path(&dir, "missing.json");
    assert_eq!(code(&symtrig(&["verify", s(&missing), "--out", s(&out)])), 3);
}

fn report(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_generated_trig_system() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "t.json", "trig", "2", "32", "1");
    let out = path(&dir, "r.json");
    let o = symtrig(&["verify", s(&f), "--tol", "1e-9", "--partner-seed", "5", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["partner_seed"], 5);
    assert_eq!(r["tol"], 1e-9);
    let ids: Vec<&str> = r["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["id"].as_str().unwrap())
        .collect();
    for id in ["eq4", "eq9", "eq13", "eq17", "eq36", "eq52", "wronskian"] {
        assert!(ids.contains(&id), "missing {id}");
    }
    let mut sorted = ids.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), ids.len());
}

#[test]
fn verify_reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "h.json", "hyperbolic", "2", "16", "4");
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    assert_eq!(code(&symtrig(&["verify", s(&f), "--out", s(&a)])), 0);
    assert_eq!(code(&symtrig(&["verify", s(&f), "--out", s(&b)])), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let r = report(&a);
    assert_eq!(r["kind"], "hyperbolic");
    assert_eq!(r["tol"], 1e-8);
    assert!(r["records"].as_array().unwrap().iter().any(|x| x["id"] == "eq91"));
}

#[test]
fn corrupted_entry_fails_pythagoras() {
    let dir = TempDir::new().unwrap();
    let f = generate(&dir, "t.json", "trig", "2", "16", "2");
    let mut file = CoefficientFile::read(&f).unwrap();
    file.Q.as_mut().unwrap()[5][1] += 1e-3;
    file.write(&f).unwrap();
    let out = path(&dir, "r.json");
    let o = symtrig(&["verify", s(&f), "--out", s(&out)]);
    assert_ne!(code(&o), 0);
    let r = report(&out);
    assert_eq!(r["pass"], false);
    let eq13 = r["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|x| x["id"] == "eq13")
        .unwrap();
    assert_eq!(eq13["pass"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("eq13"));
}

#[test]
fn verify_zero_system_skips_cotangents() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "z.json");
    let json = serde_json::json!({
        "kind": "trig", "n": 1, "N": 4, "P": vec![vec![1.0]; 5], "Q": vec![vec![0.0]; 5],
    });
    fs::write(&f, json.to_string()).unwrap();
    let out = path(&dir, "r.json");
    assert_eq!(code(&symtrig(&["verify", s(&f), "--out", s(&out)])), 0);
    let r = report(&out);
    let rec = |id: &str| {
        r["records"]
            .as_array()
            .unwrap()
            .iter()
            .find(|x| x["id"] == id)
            .unwrap()
            .clone()
    };
    for id in ["eq38", "eq39", "eq40"] {
        let x = rec(id);
        assert_eq!(x["pass"], true);
        assert_eq!(x["evaluated"], 0, "{id}");
    }
}

#[test]
fn verify_symplectic_file() {
    let dir = TempDir::new().unwrap();
    let seq = symtrig_core::generators::gen_hyp(2, 8, 0.3, None, 3).unwrap().blocks();
    let f = path(&dir, "s.json");
    CoefficientFile::from_symplectic(&seq).write(&f).unwrap();
    let out = path(&dir, "r.json");
    let o = symtrig(&["verify", s(&f), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let ids: Vec<&str> = r["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["eq4", "eq5", "eq6", "eq7", "eq8", "eq9", "wronskian"]);
    assert!(r.get("partner_seed").is_none());
}

#[test]
fn scalar_demo_trig() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "d.csv");
    let o = symtrig(&[
        "scalar-demo", "--kind", "trig", "--steps", "12", "--angle", "0.5235987755982988",
        "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("max abs_err"));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("k,recurrence,closed_form,abs_err\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 13);
    for r in rows {
        assert!(r[3].parse::<f64>().unwrap() <= 1e-13);
    }
}

#[test]
fn scalar_demo_hyperbolic_is_dyadic() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "d.csv");
    let o = symtrig(&[
        "scalar-demo", "--kind", "hyperbolic", "--steps", "10", "--a",
        &std::f64::consts::LN_2.to_string(), "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0);
    for r in csv_rows(&out) {
        let k: i32 = r[0].parse().unwrap();
        let expected = (2f64.powi(k) - 2f64.powi(-k)) / 2.0;
        assert_eq!(r[1].parse::<f64>().unwrap(), expected, "k={k}");
    }
}

#[test]
fn scalar_demo_rejects_zero_steps() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "d.csv");
    let o = symtrig(&["scalar-demo", "--kind", "trig", "--steps", "0", "--angle", "0.1", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}
