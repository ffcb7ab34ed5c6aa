use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loccode"))
}

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("loccode-cli-{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn code_report_shape() {
    let out = bin()
        .arg("code")
        .arg(specs().join("c21_15.json"))
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["n"], 21);
    assert_eq!(report["k"], 15);
    assert_eq!(report["zeros"], serde_json::json!([0, 3, 6, 7, 12, 14]));
    assert_eq!(report["g_coeffs"].as_array().unwrap().len(), 7);
}

#[test]
fn code_report_locality_of_the_long_code() {
    let out = bin()
        .arg("code")
        .arg(specs().join("c255_192.json"))
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["k"], 192);
    let locality = report["locality"].as_array().unwrap();
    let at17 = locality.iter().find(|e| e["n1"] == 17).unwrap();
    assert_eq!(at17["r"], 16);
    assert_eq!(at17["delta"], 2);
    assert_eq!(at17["punctured_zeros"], serde_json::json!([0]));
}

#[test]
fn order_permutation_and_bad_chain() {
    let out = bin()
        .arg("order")
        .arg(specs().join("c63_51.json"))
        .args(["--chain", "3,21"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["n"], 63);
    assert_eq!(report["chain"], serde_json::json!([3, 21]));
    let perm: Vec<usize> = serde_json::from_value(report["permutation"].clone()).unwrap();
    assert_eq!(&perm[..6], &[0, 21, 42, 3, 24, 45]);
    let mut sorted = perm.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, (0..63).collect::<Vec<_>>());

    let out = bin()
        .arg("order")
        .arg(specs().join("c63_51.json"))
        .args(["--chain", "5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn trellis_report_files_and_out_dir() {
    let dir = temp_dir("trellis");
    let out = bin()
        .arg("trellis")
        .arg(specs().join("c63_48.json"))
        .args(["--chain", "3,21"])
        .args(["--export", "t.json", "--profile", "p.csv"])
        .env("LOCCODE_OUT_DIR", &dir)
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["vertices"], 15998);
    assert_eq!(report["edges"], 29180);
    assert_eq!(report["per_bit_additions"], 608);
    assert_eq!(report["per_bit_comparisons"], 275);
    assert_eq!(report["max_state_bound"], 9);
    assert_eq!(report["analytic_only"], false);

    // Relative output paths landed in LOCCODE_OUT_DIR.
    let profile = std::fs::read_to_string(dir.join("p.csv")).unwrap();
    assert!(profile.starts_with("i,p_i,f_i,p_up_i,f_up_i,s_i,mu_i,mu_perp_i\n"));
    assert_eq!(profile.lines().count(), 65);
    let export: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("t.json")).unwrap()).unwrap();
    assert_eq!(export["n"], 63);
    assert_eq!(export["levels"].as_array().unwrap().len(), 64);
    assert_eq!(export["edges"].as_array().unwrap().len(), 63);
}

#[test]
fn trellis_identity_order_and_long_code_flag() {
    let out = bin()
        .arg("trellis")
        .arg(specs().join("c255_206.json"))
        .args(["--chain", "17,85"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["analytic_only"], true);
    assert!(report["max_state_dim"].as_u64().unwrap() <= 49);

    // No --chain means the identity order; the bound column is absent.
    let out = bin()
        .arg("trellis")
        .arg(specs().join("c15_7.json"))
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["chain"], serde_json::json!([]));
    assert!(report["max_state_bound"].is_null());
}

#[test]
fn decode_roundtrip_all_schemes() {
    let dir = temp_dir("decode");
    let y: Vec<f64> = vec![1.0; 63];
    std::fs::write(dir.join("y.json"), serde_json::to_string(&y).unwrap()).unwrap();

    let out = bin()
        .arg("decode")
        .arg(specs().join("c63_51.json"))
        .args(["--y", dir.join("y.json").to_str().unwrap()])
        .args(["--scheme", "osd", "--order", "1"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["weight"], 0);
    assert_eq!(report["stage"], "osd");
    assert_eq!(report["candidates"], 52);
    assert_eq!(report["score"], 63.0);

    let out = bin()
        .arg("decode")
        .arg(specs().join("c63_36.json"))
        .args(["--y", dir.join("y.json").to_str().unwrap()])
        .args(["--scheme", "locality-aware", "--order", "0"])
        .args(["--structure", specs().join("s63_36_spc.json").to_str().unwrap()])
        .args(["--n0", "0.5"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["stage"], "qmld");
    assert_eq!(report["ml_certified"], true);
    assert_eq!(report["weight"], 0);

    let out = bin()
        .arg("decode")
        .arg(specs().join("c63_51.json"))
        .args(["--y", dir.join("y.json").to_str().unwrap()])
        .args(["--scheme", "viterbi", "--chain", "3,21"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["stage"], "viterbi");
    assert_eq!(report["weight"], 0);

    // Locality-aware without a structure file is a usage error.
    let out = bin()
        .arg("decode")
        .arg(specs().join("c63_36.json"))
        .args(["--y", dir.join("y.json").to_str().unwrap()])
        .args(["--scheme", "locality-aware", "--n0", "0.5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--structure"));
}

#[test]
fn sim_csv_deterministic_and_redirected() {
    let dir = temp_dir("sim");
    std::fs::copy(specs().join("c15_7.json"), dir.join("c15_7.json")).unwrap();
    let sim = serde_json::json!({
        "code": "c15_7.json",
        "scheme": {"kind": "osd", "order": 1},
        "snr_db": [2.0, 4.0],
        "convention": "symbol_energy",
        "max_trials": 512,
        "max_frame_errors": 100000,
        "seed": 5
    });
    std::fs::write(dir.join("sim.json"), serde_json::to_string(&sim).unwrap()).unwrap();

    let run = |workers: &str, out_name: &str| -> String {
        let out = bin()
            .arg("sim")
            .arg(dir.join("sim.json"))
            .args(["--workers", workers, "--out", out_name])
            .env("LOCCODE_OUT_DIR", &dir)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read_to_string(dir.join(out_name)).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("4", "b.csv");
    assert!(a.starts_with("# loccode-sim-csv v1\n"));
    assert_eq!(a.lines().count(), 4);
    let strip_seconds = |text: &str| -> Vec<String> {
        text.lines()
            .map(|l| l.rsplit_once(',').map_or(l.to_string(), |(h, _)| h.to_string()))
            .collect()
    };
    assert_eq!(strip_seconds(&a), strip_seconds(&b));
    let fields: Vec<&str> = a.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(fields[0], "2");
    assert_eq!(fields[2], "512");
}

#[test]
fn parse_errors_name_the_file() {
    let dir = temp_dir("badspec");
    std::fs::write(dir.join("bad.json"), "{\"n\": 63,").unwrap();
    let out = bin().arg("code").arg(dir.join("bad.json")).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.json"), "stderr: {stderr}");
}
