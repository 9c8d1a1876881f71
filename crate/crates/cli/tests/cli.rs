use std::fs;
use std::path::Path;
use std::process::Command;

use proptest::prelude::*;

use gkdv_cli::config::{parse_real, KEYS};
use gkdv_cli::{parse_pairs, run, RunConfig};

fn gkdv(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gkdv")).args(args).output().expect("binary runs")
}

fn load(text: &str) -> RunConfig {
    let pairs = parse_pairs(text).unwrap();
    RunConfig::from_pairs(pairs.iter().map(|(_, k, v)| (k.as_str(), v.as_str()))).unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

const SMALL_ESTIMATE: &str = "command = estimate\nestimate.ids = lin2,bil\nestimate.trials = 6\n\
                              estimate.lab.n = 32\nestimate.lab.n_t = 32\nseed = 9\n";

#[test]
fn identical_config_gives_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = load(SMALL_ESTIMATE);
    cfg.out = tmp.path().join("a");
    run(&cfg).unwrap();
    cfg.out = tmp.path().join("b");
    cfg.threads = 1;
    run(&cfg).unwrap();
    assert_eq!(files(&tmp.path().join("a")), files(&tmp.path().join("b")));
}

#[test]
fn every_artifact_names_the_manifest_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = load("command = solve\nsolve.T = 0.01\nsolve.stride = 20\nsolve.dump = true\n");
    cfg.out = tmp.path().to_path_buf();
    let outcome = run(&cfg).unwrap();
    let tag = format!("manifest_hash={}", outcome.manifest_hash);
    for (name, bytes) in files(tmp.path()) {
        let text = String::from_utf8_lossy(&bytes);
        if name.ends_with(".csv") {
            assert_eq!(text.lines().next().unwrap(), format!("# {tag}"), "{name}");
        } else if name == "manifest.json" {
            assert!(text.contains(&format!("\"hash\": \"{}\"", outcome.manifest_hash)));
        } else if name.ends_with(".json") {
            assert!(text.contains(&format!("\"manifest_hash\": \"{}\"", outcome.manifest_hash)), "{name}");
        }
    }
    let dump = fs::read(tmp.path().join("trajectory.gksd")).unwrap();
    let decoded = gkdv_core::solver::decode_spectral_dump(&dump).unwrap();
    assert_eq!(decoded.times.len(), 6);
}

#[test]
fn manifest_hash_tracks_the_configuration() {
    let a = gkdv_cli::manifest::Manifest::new(&load("command = validate\nseed = 1"));
    let b = gkdv_cli::manifest::Manifest::new(&load("seed = 1\ncommand = validate\n# same"));
    let c = gkdv_cli::manifest::Manifest::new(&load("command = validate\nseed = 2"));
    assert_eq!(a.hash, b.hash);
    assert_ne!(a.hash, c.hash);
    assert_eq!(a.hash.len(), 64);
}

#[test]
fn globalize_with_step_cap_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = gkdv(&["globalize", "--out", out, "--set", "globalize.cap_steps=10", "--set", "globalize.T_list=4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("globalize_T4.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let report = &v["report"];
    assert_eq!(report["success"], true);
    assert!(report["steps"].as_array().unwrap().len() <= 10);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(gkdv(&["estimate", "--out", out, "--set", "estimate.b=0.5"]).status.code(), Some(2));
    assert_eq!(gkdv(&["validate", "--out", out, "--set", "no.such.key=1"]).status.code(), Some(2));
    assert_eq!(gkdv(&["validate", "--config", "/no/such/file"]).status.code(), Some(1));
    // a large gaussian in the focusing equation at a coarse step
    let blow = gkdv(&[
        "solve", "--out", out, "--set", "solve.preset=gaussian", "--set", "data.amplitude=40",
        "--set", "solver.dt=0.01", "--set", "grid.n=128", "--set", "grid.L=20",
    ]);
    assert_eq!(blow.status.code(), Some(3), "{}", String::from_utf8_lossy(&blow.stderr));
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("run.cfg");
    fs::write(&path, "# demo\ncommand = solve\nseed = 3\ngrid.n = 256\n").unwrap();
    let sets = vec!["grid.n = 128".to_string()];
    let cfg = RunConfig::load(
        gkdv_cli::config::Command::Validate,
        Some(&path),
        &sets,
        Some(11),
        tmp.path().into(),
        2,
    )
    .unwrap();
    assert_eq!(cfg.command, gkdv_cli::config::Command::Validate);
    assert_eq!(cfg.seed, 11);
    assert_eq!(cfg.solver.grid.n(), 128);
    assert_eq!(cfg.threads, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn echo_is_a_fixed_point(seed in 0u64..1000, n in 5usize..10, trials in 1usize..50, b in 0.51f64..0.9) {
        let text = format!(
            "command = estimate\nseed = {seed}\nestimate.lab.n = {}\nestimate.trials = {trials}\nestimate.b = {b}\n",
            1usize << n
        );
        let cfg = load(&text);
        prop_assert_eq!(load(&cfg.to_text()), cfg);
    }

    #[test]
    fn fractions_parse(p in -1000i32..1000, q in 1i32..1000) {
        let x = parse_real(&format!("{p}/{q}")).unwrap();
        prop_assert!((x - p as f64 / q as f64).abs() <= 1e-15 * x.abs().max(1.0));
    }

    #[test]
    fn parser_never_panics(text in "\\PC*") {
        let _ = parse_pairs(&text);
    }

    #[test]
    fn unknown_keys_rejected(key in "[a-z]{1,8}\\.[a-z]{1,8}") {
        prop_assume!(!KEYS.iter().any(|(k, _, _)| *k == key));
        let text = format!("{key} = 1\n");
        let pairs = parse_pairs(&text).unwrap();
        prop_assert!(RunConfig::from_pairs(pairs.iter().map(|(_, k, v)| (k.as_str(), v.as_str()))).is_err());
    }
}
