use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn newsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newsim")).args(args).output().unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/mini_corpus")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Ingests the mini-corpus into `dir` and writes a config pointing at it.
fn setup(dir: &Path) -> PathBuf {
    let out = newsim(&["ingest", s(&fixtures().join("pairs.csv")), s(dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let config = format!(
        r#"{{
            "corpus": {{"pairs": {:?}, "store": "articles"}},
            "provider": "stub",
            "split": {{"ratio": 0.67, "seed": 7}},
            "train": {{"learning_rate": 0.01, "momentum": 0.9, "epochs": 8, "seed": 7}},
            "output_dir": "out"
        }}"#,
        fixtures().join("pairs.csv")
    );
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    path
}

#[test]
fn every_subcommand_has_help() {
    for cmd in ["ingest", "features", "embed", "train", "evaluate", "predict", "report", "pipeline"] {
        let out = newsim(&[cmd, "--help"]);
        assert!(out.status.success(), "{cmd}");
        assert!(stdout(&out).contains("Usage"), "{cmd}");
    }
    assert!(newsim(&["--help"]).status.success());
}

#[test]
fn ingest_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = newsim(&["ingest", s(&fixtures().join("pairs_bad_url.csv")), s(tmp.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("22 articles stored"), "{}", stdout(&out));
    assert!(stdout(&out).contains("1 failures"));

    let out = newsim(&["ingest", s(&tmp.path().join("missing.csv")), s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.csv"));
}

#[test]
fn stagewise_run_matches_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let config = setup(tmp.path());
    let c = s(&config);
    for cmd in ["features", "embed", "train", "evaluate"] {
        let out = newsim(&[cmd, "-c", c]);
        assert!(out.status.success(), "{cmd}: {}", stderr(&out));
    }
    let stagewise = std::fs::read(tmp.path().join("out/report.json")).unwrap();

    let other = tmp.path().join("again");
    let out = newsim(&["pipeline", "-c", c, "--output-dir", s(&other)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("baseline-cosine"));
    assert_eq!(std::fs::read(other.join("report.json")).unwrap(), stagewise);

    let out = newsim(&["report", "-c", c]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), std::fs::read_to_string(tmp.path().join("out/report.txt")).unwrap());
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = setup(tmp.path());
    let out = newsim(&["pipeline", "-c", s(&config), "--epochs", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let ck: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/checkpoints/tone.json")).unwrap()).unwrap();
    assert_eq!(ck["loss_history"].as_array().unwrap().len(), 3);
}

#[test]
fn predict_output_and_missing_checkpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let config = setup(tmp.path());
    let c = s(&config);
    let a = tmp.path().join("articles/1005.json");
    let b = tmp.path().join("articles/1006.json");

    let out = newsim(&["predict", "-c", c, s(&a), s(&b)]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));

    assert!(newsim(&["pipeline", "-c", c]).status.success());
    let out = newsim(&["predict", "-c", c, s(&a), s(&a)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for m in ["narrative", "style", "tone", "overall", "geography"] {
        assert_eq!(v["metrics"][m]["baseline"], 1.0, "{m}");
    }
    assert_eq!(v["metrics"]["geography"]["fallback_used"], serde_json::json!([true, true]));
    for m in v["metrics"].as_object().unwrap().values() {
        let score = m["score"].as_f64().unwrap();
        assert!(score > 0.0 && score < 1.0);
    }

    let first = newsim(&["predict", "-c", c, s(&a), s(&b)]);
    let second = newsim(&["predict", "-c", c, s(&a), s(&b)]);
    assert_eq!(first.stdout, second.stdout);

    let out = newsim(&["predict", "-c", c, s(&a), s(&tmp.path().join("nope.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_cache_entry_names_key() {
    let tmp = tempfile::tempdir().unwrap();
    let config = setup(tmp.path());
    let c = s(&config);
    assert!(newsim(&["features", "-c", c]).status.success());
    let requests = tmp.path().join("requests.jsonl");
    let out = newsim(&["embed", "-c", c, "--export-requests", s(&requests)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&requests)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());

    // a cache holding every key but the first
    let dim = 4;
    let mut cache = format!("dim={dim} provider=test\n");
    for l in &lines[1..] {
        cache += &format!("{}\t1.0\t0.5\t0.25\t0.125\n", l["key"].as_str().unwrap());
    }
    std::fs::write(tmp.path().join("cache.tsv"), cache).unwrap();
    let missing = lines[0]["key"].as_str().unwrap();

    let out = newsim(&["pipeline", "-c", c, "--provider", &format!("cache:{}", s(&tmp.path().join("cache.tsv")))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains(missing), "{}", stderr(&out));
    let manifest = std::fs::read_to_string(tmp.path().join("out/MANIFEST.json")).unwrap();
    assert!(manifest.contains(r#""failed_stage": "embed""#), "{manifest}");
}

#[test]
fn invalid_config_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = setup(tmp.path());
    let text = std::fs::read_to_string(&config).unwrap().replace(r#""seed": 7}"#, r#""seed": 7, "bogus": 1}"#);
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(newsim(&["pipeline", "-c", s(&bad)]).status.code(), Some(2));

    let out = newsim(&["pipeline", "-c", s(&config), "--store", s(&tmp.path().join("nowhere"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nowhere"));
}
