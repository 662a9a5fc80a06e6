//! Drives the `pricesent` binary: exit codes and provenance stamps.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pricesent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pricesent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    pricesent(args).status.code().expect("exit code")
}

fn synth(dir: &Path) {
    let out = pricesent(&[
        "synth",
        "--out-dir",
        dir.to_str().unwrap(),
        "--n-tweets",
        "2500",
        "--start",
        "2016-09-01",
        "--end",
        "2016-11-30",
        "--noise-words",
        "500",
        "--seed",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn exit_codes_by_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(&d.join("syn"));
    let tweets = d.join("syn/tweets.jsonl");
    let bars = d.join("syn/bars.csv");

    assert_eq!(code(&["train", "--ranker", "svm"]), 2);
    let cfg = d.join("bad.toml");
    fs::write(&cfg, "colour = \"red\"\n").unwrap();
    assert_eq!(code(&["label", "--config", cfg.to_str().unwrap()]), 2);

    let broken = d.join("broken.csv");
    fs::write(
        &broken,
        "date,time,open,high,low,close,volume\n2016-09-01,10:00,10.00,9.00,11.00,10.00,5\n",
    )
    .unwrap();
    let out = pricesent(&[
        "label",
        "--tweets",
        tweets.to_str().unwrap(),
        "--bars",
        broken.to_str().unwrap(),
        "--out-dir",
        d.join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    assert_eq!(code(&["significance", "--n", "2", "--k", "3"]), 4);
    assert_eq!(
        code(&[
            "sharpe",
            "--returns",
            "0.01,0.02",
            "--benchmark-returns",
            "0.0,0.01"
        ]),
        4
    );

    let missing = d.join("nope.jsonl");
    assert_eq!(
        code(&[
            "label",
            "--tweets",
            missing.to_str().unwrap(),
            "--bars",
            bars.to_str().unwrap()
        ]),
        5
    );

    assert_eq!(
        code(&[
            "significance",
            "--n",
            "468",
            "--k",
            "253",
            "--frames",
            "4.25"
        ]),
        0
    );
}

#[test]
fn missing_test_month_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(&d.join("syn"));
    let out = pricesent(&[
        "label",
        "--tweets",
        d.join("syn/tweets.jsonl").to_str().unwrap(),
        "--bars",
        d.join("syn/bars.csv").to_str().unwrap(),
        "--out-dir",
        d.join("out").to_str().unwrap(),
        "--test-start",
        "2016-12-01",
        "--test-end",
        "2016-12-31",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("2016-12-01") && err.contains("2016-12-31"),
        "{err}"
    );
}

#[test]
fn every_output_carries_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(&d.join("syn"));
    let out_dir = d.join("out");
    let pos = d.join("syn/buy_words.txt");
    let neg = d.join("syn/sell_words.txt");
    let (tweets, bars, out_s) = (
        d.join("syn/tweets.jsonl"),
        d.join("syn/bars.csv"),
        out_dir.to_str().unwrap().to_string(),
    );
    let common = [
        "--tweets",
        tweets.to_str().unwrap(),
        "--bars",
        bars.to_str().unwrap(),
        "--out-dir",
        &out_s,
        "--test-start",
        "2016-11-01",
        "--test-end",
        "2016-11-30",
        "--k",
        "200",
        "--training-window-months",
        "2",
        "--positive",
        pos.to_str().unwrap(),
        "--negative",
        neg.to_str().unwrap(),
    ];
    let run = |extra: &[&str]| {
        let mut args: Vec<&str> = extra.to_vec();
        args.extend_from_slice(&common);
        let out = pricesent(&args);
        assert!(
            out.status.success(),
            "{extra:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&["label"]);
    run(&["train"]);
    run(&["evaluate", "--baseline", "always-sell"]);
    run(&["sweep-features", "--sizes", "50,100", "--rankers", "cs,mi"]);
    run(&["sweep-window", "--max-months", "2"]);
    run(&["backtest", "--method", "a,c"]);
    run(&["report"]);

    let mut hashes = std::collections::BTreeSet::new();
    let mut n = 0;
    for entry in fs::read_dir(&out_dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let hash = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                v["provenance"]["config_hash"].as_str().map(str::to_string)
            }
            Some("svg") => text
                .split("config_hash=")
                .nth(1)
                .map(|s| s[..64].to_string()),
            _ => text
                .lines()
                .next()
                .and_then(|l| l.strip_prefix("# config_hash="))
                .map(|s| s[..64].to_string()),
        };
        let hash = hash.unwrap_or_else(|| panic!("{} has no provenance", path.display()));
        assert!(hash.chars().all(|c| c.is_ascii_hexdigit()) && hash.len() == 64);
        hashes.insert(hash);
        n += 1;
    }
    assert!(n >= 15, "{n} outputs");
    assert_eq!(hashes.len(), 1, "one configuration, one hash: {hashes:?}");
}
