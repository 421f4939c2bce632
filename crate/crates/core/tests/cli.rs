use std::path::{Path, PathBuf};
use std::process::Command;

use catchwise::cli::{run, EXIT_DATA, EXIT_NO_INPUT, EXIT_USAGE};

fn regs(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/regs").join(name).display().to_string()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/golden").join(name)
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run(std::iter::once("catchwise").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn ems_commands_print_volts_and_newtons() {
    assert_eq!(cli(&["ems", "calc", "--current", "0.020", "--resistance", "21800"]), (0, "436 V\n".into()));
    assert_eq!(cli(&["ems", "calc", "--current", "0.020"]), (0, "436 V\n".into()));
    assert_eq!(cli(&["ems", "tension", "--current", "0.090", "--mass-g", "200"]), (0, "2 N\n".into()));
    assert_eq!(cli(&["ems", "calc", "--current=-1"]).0, EXIT_USAGE);
}

#[test]
fn regs_check_exit_codes() {
    let file = regs("lake.json");
    let check = |extra: &[&str]| {
        let mut args = vec!["regs", "check", "--file", &file, "--date", "2026-06-01"];
        args.extend_from_slice(extra);
        cli(&args)
    };
    assert_eq!(check(&["--species", "walleye", "--length-cm", "45"]), (0, "KEEP_ALLOWED\n".into()));
    assert_eq!(check(&["--species", "walleye", "--length-cm", "30", "--bag", "3"]), (1, "MUST_RELEASE UNDERSIZE,BAG_LIMIT_REACHED\n".into()));
    assert_eq!(check(&["--species", "carp", "--length-cm", "30"]), (2, "NO_RULE\n".into()));
    assert_eq!(cli(&["regs", "check", "--file", &regs("bad_min_max.json"), "--species", "walleye", "--date", "2026-06-01"]).0, EXIT_DATA);
    assert_eq!(cli(&["regs", "check", "--file", &regs("missing.json"), "--species", "walleye", "--date", "2026-06-01"]).0, EXIT_NO_INPUT);
    assert_eq!(check(&["--species", "walleye", "--length-cm", "not-a-number"]).0, EXIT_USAGE);
}

#[test]
fn help_and_usage() {
    let bin = env!("CARGO_BIN_EXE_catchwise");
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["augment", "regs", "ems", "bob", "engine", "replay"] {
        assert!(text.contains(sub), "help lacks {sub}");
    }
    for path in [&["augment", "--help"][..], &["bob", "simulate", "--help"], &["engine", "run", "--help"]] {
        assert_eq!(Command::new(bin).args(path).output().unwrap().status.code(), Some(0), "{path:?}");
    }
    let bad = Command::new(bin).arg("fly").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert_eq!(cli(&[]).0, EXIT_USAGE);
}

#[test]
fn config_file_fills_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"ems": {"current": 0.01}, "resistance": 1000}"#).unwrap();
    let cfg = cfg.display().to_string();
    assert_eq!(cli(&["--config", &cfg, "ems", "calc"]), (0, "10 V\n".into()));
    // The command line wins over the file.
    assert_eq!(cli(&["--config", &cfg, "ems", "calc", "--current", "0.02"]), (0, "20 V\n".into()));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"curent": 0.01}"#).unwrap();
    assert_eq!(cli(&["--config", &bad.display().to_string(), "ems", "calc", "--current", "1"]).0, EXIT_DATA);
    assert_eq!(cli(&["--config", "/nonexistent/cfg.json", "ems", "calc", "--current", "1"]).0, EXIT_NO_INPUT);
}

#[test]
fn replay_matches_golden_and_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.log");
    let trace = golden("happy_path.trace").display().to_string();
    let expect = golden("happy_path.log").display().to_string();
    let (code, _) = cli(&["replay", &trace, "--out", &out.display().to_string(), "--expect", &expect]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(golden("happy_path.log")).unwrap());

    let wrong = dir.path().join("wrong.log");
    std::fs::write(&wrong, "").unwrap();
    assert_eq!(cli(&["replay", &trace, "--expect", &wrong.display().to_string()]).0, 1);
}

#[test]
fn seeded_corpus_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let make = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let args = ["--seed", seed, "augment", "corpus", "--out", out.to_str().unwrap(), "--uniques", "2", "--variants", "2", "--size", "16"];
        assert_eq!(cli(&args).0, 0);
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    let a = make("a", "3");
    assert_eq!(a.len(), 4);
    assert_eq!(a, make("b", "3"));
    assert_ne!(a, make("c", "4"));
}

#[test]
fn augment_run_and_dedup_over_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let aug = dir.path().join("aug");
    let manifest = dir.path().join("manifest.json");
    let s = |p: &Path| p.display().to_string();
    assert_eq!(cli(&["augment", "corpus", "--out", &s(&corpus), "--uniques", "3", "--variants", "4", "--size", "32"]).0, 0);
    assert_eq!(
        cli(&["augment", "run", "--in", &s(&corpus), "--out", &s(&aug), "--fisheye", "40", "--contrast", "0.8:1.0", "--noise", "2", "--blur", "3:0"]).0,
        0
    );
    assert_eq!(std::fs::read_dir(&aug).unwrap().count(), 12);
    assert_eq!(cli(&["augment", "dedup", "--in", &s(&corpus), "--manifest", &s(&manifest)]).0, 0);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["total"], 12);
    let kept = m["kept"].as_array().map_or_else(|| m["kept"].as_u64().unwrap() as usize, |k| k.len());
    assert_eq!(kept + m["dropped"].as_array().unwrap().len(), 12);
    assert_eq!(cli(&["augment", "dedup", "--in", &s(&dir.path().join("none"))]).0, EXIT_NO_INPUT);
}
