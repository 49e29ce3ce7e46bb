use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hnd(dir: &Path, args: &[&str]) -> (i32, Value, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_hnd"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    let summary = serde_json::from_slice(&stdout)
        .unwrap_or_else(|_| panic!("stdout is not json: {}", String::from_utf8_lossy(&stdout)));
    (
        status.code().unwrap(),
        summary,
        String::from_utf8_lossy(&stderr).into_owned(),
    )
}

#[test]
fn gen_small_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, v, _) = hnd(tmp.path(), &["gen", "--start", "1", "--end", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["records"], 4);
    assert_eq!(v["shards"].as_array().unwrap().len(), 1);
    let text = fs::read_to_string(tmp.path().join("dataset/shard_0.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("3,4,5,pos,-,1"));
    assert_eq!(text.lines().count(), 4);
    assert!(tmp.path().join("dataset/shard_0.manifest.json").exists());
    assert!(tmp.path().join("dataset/dataset.json").exists());
}

#[test]
fn gen_is_reproducible_across_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let base = [
        "gen",
        "--start",
        "100",
        "--end",
        "2099",
        "--shard-size",
        "300",
        "--ratio",
        "0.4",
        "--mix",
        "PA01=0.25,AR02=0.25,ST03=0.5",
        "--seed",
        "9",
    ];
    let mut one = base.to_vec();
    one.extend(["--out", "a", "--workers", "1"]);
    let mut many = base.to_vec();
    many.extend(["--out", "b", "--workers", "4"]);
    assert_eq!(hnd(tmp.path(), &one).0, 0);
    assert_eq!(hnd(tmp.path(), &many).0, 0);
    for entry in fs::read_dir(tmp.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(tmp.path().join("a").join(&name)).unwrap(),
            fs::read(tmp.path().join("b").join(&name)).unwrap(),
            "{name:?}"
        );
    }
    let (code, v, _) = hnd(tmp.path(), &["shard", "--verify", "a"]);
    assert_eq!(code, 0);
    assert_eq!(v["shard_count"], 12);
}

#[test]
fn tampered_shard_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        hnd(
            tmp.path(),
            &["gen", "--start", "1", "--end", "20", "--out", "d"]
        )
        .0,
        0
    );
    let (code, v, _) = hnd(tmp.path(), &["verify", "--in", "d/shard_0.csv"]);
    assert_eq!(code, 0);
    assert_eq!(v["digest_ok"], true);

    let path = tmp.path().join("d/shard_0.csv");
    let text = fs::read_to_string(&path)
        .unwrap()
        .replacen("7,24,25,pos", "7,24,26,pos", 1);
    fs::write(&path, text).unwrap();
    let (code, v, stderr) = hnd(tmp.path(), &["verify", "--in", "d/shard_0.csv"]);
    assert_eq!(code, 1);
    assert_eq!(v["digest_ok"], false);
    assert_eq!(v["failures"][0]["line"], 3);
    assert!(stderr.contains("shard_0.csv:3:"), "{stderr}");

    let (code, v, _) = hnd(
        tmp.path(),
        &["verify", "--in", "d/shard_0.csv", "--records-only"],
    );
    assert_eq!(code, 1);
    assert_eq!(v["digest_ok"], Value::Null);
    assert_eq!(hnd(tmp.path(), &["shard", "--verify", "d"]).0, 1);
}

#[test]
fn attack_stream() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "attack",
        "--code",
        "PA01",
        "--count",
        "50",
        "--seed",
        "3",
        "--base-start",
        "1000",
    ];
    let (code, v, _) = hnd(tmp.path(), &args);
    assert_eq!(code, 0);
    assert_eq!(v["labels"]["neg_eq"], 50);
    let first = fs::read(tmp.path().join("attack_PA01.csv")).unwrap();
    hnd(tmp.path(), &args);
    assert_eq!(first, fs::read(tmp.path().join("attack_PA01.csv")).unwrap());
    let (code, v, _) = hnd(tmp.path(), &["verify", "--in", "attack_PA01.csv"]);
    assert_eq!(code, 0);
    assert_eq!(v["records"], 50);
    assert_eq!(v["manifest"], Value::Null);

    let (code, _, _) = hnd(
        tmp.path(),
        &[
            "attack",
            "--code",
            "PA06",
            "--count",
            "5",
            "--seed",
            "1",
            "--base-start",
            "10",
            "--out",
            "t.csv",
        ],
    );
    assert_eq!(code, 0);
    assert!(fs::read_to_string(tmp.path().join("t.csv"))
        .unwrap()
        .contains(",PA03,"));
}

#[test]
fn floatwall_table() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, v, _) = hnd(
        tmp.path(),
        &[
            "floatwall",
            "--min-exp",
            "15",
            "--max-exp",
            "19",
            "--out",
            "wall.csv",
        ],
    );
    assert_eq!(code, 0);
    let row18 = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["decimal_exp"] == 18)
        .unwrap();
    assert_eq!(row18["ulp_gap"], "256");
    assert_eq!(row18["collision"], true);
    let table = fs::read_to_string(tmp.path().join("wall.csv")).unwrap();
    assert!(table.starts_with("decimal_exp,n,b_digits,ulp_gap,collision\n15,"));
    assert!(table.contains("\n18,1000000000,19,256,true\n"));
}

#[test]
fn features_file_and_meta() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("r.csv"),
        "3,4,5,pos,-,1\n3,4,6,neg_eq,PA01,1\n",
    )
    .unwrap();
    let (code, v, _) = hnd(
        tmp.path(),
        &[
            "features",
            "--in",
            "r.csv",
            "--path",
            "exact",
            "--out",
            "features_0.csv",
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(v["rows"], 2);
    let text = fs::read_to_string(tmp.path().join("features_0.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "f_gap,f_ratio,f_res,label,path");
    assert!(lines[1].starts_with("1,1.33333333333333333333333333333,"));
    assert!(lines[2].starts_with("2,1.33333333333333333333333333333,2.39789527"));
    let meta: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("features_0.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["epsilon"], 1e-12);
    assert_eq!(meta["log_base"], "e");
    assert_eq!(meta["path"], "exact");

    let (code, _, _) = hnd(
        tmp.path(),
        &[
            "features", "--in", "r.csv", "--path", "float", "--out", "f.csv",
        ],
    );
    assert_eq!(code, 0);
    assert!(fs::read_to_string(tmp.path().join("f.csv"))
        .unwrap()
        .contains("1.0,1.3333333333333333,"));
}

#[test]
fn usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        hnd(
            tmp.path(),
            &["gen", "--start", "1", "--end", "4", "--unknown"]
        )
        .0,
        2
    );
    assert_eq!(
        hnd(
            tmp.path(),
            &[
                "features",
                "--in",
                "missing.csv",
                "--path",
                "exact",
                "--out",
                "x"
            ]
        )
        .0,
        2
    );
    assert_eq!(
        hnd(
            tmp.path(),
            &["features", "--in", "x", "--path", "decimal", "--out", "x"]
        )
        .0,
        2
    );
    assert_eq!(hnd(tmp.path(), &["shard", "--verify", "nowhere"]).0, 2);
    assert_eq!(
        hnd(
            tmp.path(),
            &["gen", "--start", "1", "--end", "4", "--ratio", "0.5", "--mix", "PA01=0.4"]
        )
        .0,
        2
    );
}
