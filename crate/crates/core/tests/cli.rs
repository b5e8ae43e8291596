use std::path::PathBuf;
use std::process::Command as Proc;

use k2reg::cli::{parse_args, run, Format, Verb, EXIT_FAILED, EXIT_OK, EXIT_USAGE};

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Proc::new(env!("CARGO_BIN_EXE_k2reg"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn parses_verb_and_config() {
    let c = parse_args(["genus", "cfg.json"]).unwrap();
    assert_eq!(c.verb, Verb::Genus);
    assert_eq!(c.config.unwrap().to_str(), Some("cfg.json"));
    assert_eq!(c.seed, 0);
    assert_eq!(c.format, Format::Json);
}

#[test]
fn t_list_sorted_by_decreasing_modulus() {
    let c = parse_args(["sweep", "cfg.json", "--t-list", "1e-4,1e-6,1e-8"]).unwrap();
    assert_eq!(c.t_list.unwrap(), vec![1e-4, 1e-6, 1e-8]);
    let c = parse_args(["sweep", "cfg.json", "--t-list", "1e-8,-1e-4,1e-6"]).unwrap();
    assert_eq!(c.t_list.unwrap(), vec![-1e-4, 1e-6, 1e-8]);
}

#[test]
fn usage_errors() {
    for argv in [
        vec!["regulator"],
        vec!["frobnicate", "cfg.json"],
        vec!["sweep", "cfg.json", "--t", "1e-4"],
        vec!["sweep", "cfg.json", "--t-list", "1e-4,-1e-4"],
        vec!["sweep", "cfg.json", "--t-list", "0"],
        vec!["hyperelliptic", "cfg.json"],
        vec!["validate", "cfg.json", "--format", "csv"],
        vec!["prop53"],
        vec!["prop53", "cfg.json", "--lambda", "1", "--alphas", "1"],
        vec!["regulator", "cfg.json", "--quad-tol", "-1"],
        vec!["regulator", "cfg.json", "--t", "0"],
        vec!["local-limit", "--t-list", "1e-2"],
    ] {
        assert!(parse_args(argv.clone()).is_err(), "{argv:?}");
    }
}

#[test]
fn tolerances_and_seed_carried() {
    let c = parse_args([
        "regulator",
        "c.json",
        "--t",
        "1/1000",
        "--quad-tol",
        "1e-9",
        "--seed",
        "3",
    ])
    .unwrap();
    assert_eq!(c.tol.quad, 1e-9);
    assert_eq!(c.seed, 3);
    assert_eq!(c.t.as_deref(), Some("1/1000"));
}

#[test]
fn genus_reports_both_forms() {
    let c = parse_args(["genus".to_string(), config("cfg_c.json")]).unwrap();
    let out = run(&c);
    assert_eq!(out.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out.output).unwrap();
    assert_eq!(v["genus"], 4);
    assert_eq!(v["pairwise"], 4);
    assert_eq!(v["binomial"], 4);
}

#[test]
fn tame_check_cfg_c_passes() {
    let out = run(&parse_args(["tame-check".to_string(), config("cfg_c.json")]).unwrap());
    assert_eq!(out.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out.output).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["generators"].as_array().unwrap().len(), 4);
}

#[test]
fn elements_map_covers_special_set() {
    let out = run(&parse_args(["elements".to_string(), config("cfg_b.json")]).unwrap());
    assert_eq!(out.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out.output).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 1);
    assert_eq!(v["m_for_point"].as_object().unwrap().len(), 1);
}

#[test]
fn hyperelliptic_table_exit_zero() {
    let out = run(&parse_args(["hyperelliptic", "--format", "csv"]).unwrap());
    assert_eq!(out.code, EXIT_OK);
    assert!(out
        .output
        .starts_with("N1,N2,N3,g,dim,2g-1,span_on_curve,hyperelliptic\n"));
    assert!(out.output.contains("\n2,2,1,4,9,7,9,false\n"));
}

#[test]
fn sweep_csv_normalized_column_approaches_one() {
    let out = run(&parse_args([
        "sweep".to_string(),
        config("cfg_a.json"),
        "--format".into(),
        "csv".into(),
    ])
    .unwrap());
    assert_eq!(out.code, EXIT_OK);
    let dev: Vec<f64> = out
        .output
        .lines()
        .skip(1)
        .map(|l| (l.split(',').nth(1).unwrap().parse::<f64>().unwrap() - 1.0).abs())
        .collect();
    assert_eq!(dev.len(), 3);
    assert!(dev.windows(2).all(|w| w[1] <= w[0]));
    assert!(dev[2] < 0.1);
}

#[test]
fn missing_file_is_input_error() {
    let out = run(&parse_args(["genus", "/nonexistent/cfg.json"]).unwrap());
    assert_eq!(out.code, EXIT_USAGE);
    assert!(!out.diagnostics.is_empty());
}

#[test]
fn prop53_wrong_shape_is_input_error() {
    let out = run(&parse_args(["prop53".to_string(), config("cfg_c.json")]).unwrap());
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn prop53_from_config_and_explicit() {
    let out = run(&parse_args(["prop53".to_string(), config("three_groups_g2.json")]).unwrap());
    assert_eq!(out.code, EXIT_OK, "{:?}", out.diagnostics);
    let out = run(&parse_args(["prop53", "--lambda", "2", "--alphas", "1,2"]).unwrap());
    assert_eq!(out.code, EXIT_OK, "{:?}", out.diagnostics);
}

#[test]
fn local_limit_slope_within_tolerance() {
    let out = run(&parse_args([
        "local-limit",
        "--a",
        "2",
        "--b",
        "1",
        "--t-list",
        "1e-2,1e-4",
    ])
    .unwrap());
    assert_eq!(out.code, EXIT_OK);
    let out = run(&parse_args(["local-limit", "--a", "0"]).unwrap());
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn binary_exit_codes_and_determinism() {
    let (code, _, err) = bin(&["regulator"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(!err.is_empty());
    let cfg = config("cfg_b.json");
    let (c1, o1, _) = bin(&["regulator", &cfg, "--t", "1e-6"]);
    let (c2, o2, _) = bin(&["regulator", &cfg, "--t", "1e-6"]);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(o1, o2);
    let v: serde_json::Value = serde_json::from_str(&o1).unwrap();
    assert!((v["normalized"].as_f64().unwrap() - 1.0).abs() < 0.15);
}

#[test]
fn binary_writes_output_file() {
    let dir = std::env::temp_dir().join(format!("k2reg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("genus.json");
    let (code, stdout, _) = bin(&[
        "genus",
        &config("cfg_a.json"),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["genus"], 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn failed_computation_exit_one() {
    // t far too large for the safe loop parameter
    let dir = std::env::temp_dir().join(format!("k2reg-cli-big-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(config("cfg_c.json"))
        .unwrap()
        .replace("1/10000", "1/2");
    let path = dir.join("big.json");
    std::fs::write(&path, text).unwrap();
    let out = run(&parse_args(["regulator", path.to_str().unwrap()]).unwrap());
    assert_eq!(out.code, EXIT_FAILED, "{:?}", out.diagnostics);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = bin(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("relations-check"));
}
