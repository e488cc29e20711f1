use std::path::PathBuf;
use std::process::{Command, Output};

use permjunta_core::io::family_to_json;
use permjunta_core::perm::{all_permutations, PermFamily, RestrictionClass};

fn permjunta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permjunta"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn star_file(dir: &tempdir::Dir) -> PathBuf {
    let star = PermFamily::from_members(
        RestrictionClass::full(4),
        all_permutations(4)
            .unwrap()
            .into_iter()
            .filter(|p| p.image(0) == 0),
    )
    .unwrap();
    let path = dir.path.join("star.json");
    std::fs::write(&path, family_to_json(&star)).unwrap();
    path
}

/// Minimal scratch directory that cleans up after itself.
mod tempdir {
    pub struct Dir {
        pub path: std::path::PathBuf,
    }

    impl Dir {
        pub fn new(tag: &str) -> Dir {
            let path = std::env::temp_dir().join(format!(
                "permjunta-cli-{tag}-{}",
                std::process::id()
            ));
            std::fs::create_dir_all(&path).unwrap();
            Dir { path }
        }
    }

    impl Drop for Dir {
        fn drop(&mut self) {
            let _ = std::fs::remove_dir_all(&self.path);
        }
    }
}

#[test]
fn spectrum_emits_the_table_and_respects_the_ceiling() {
    let out = permjunta(&["spectrum", "--n", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("partition,dimension,lambda_num,lambda_den,lambda_float"));
    assert!(text.contains("\n4,1,1,1,1\n"));

    let out = permjunta(&["spectrum", "--n", "9"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("n <= 8"));
}

#[test]
fn spectrum_output_is_byte_identical_across_runs() {
    let a = stdout(&permjunta(&["spectrum", "--n", "5", "--a", "1"]));
    let b = stdout(&permjunta(&["spectrum", "--n", "5", "--a", "1"]));
    assert_eq!(a, b);
}

#[test]
fn search_reports_the_known_maximum_with_certificate() {
    let out = permjunta(&["search", "--n", "4", "--forbidden-agreements", "0"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["size"], 6);
    assert_eq!(doc["hoffman_bound"], "6/1");
    assert_eq!(doc["family"]["members"].as_array().unwrap().len(), 6);
}

#[test]
fn check_dispatches_and_rejects_malformed_input() {
    let dir = tempdir::Dir::new("check");
    let star = star_file(&dir);
    let out = permjunta(&["check", "--family", star.to_str().unwrap(), "--t-intersecting", "1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["verdict"], true);

    let bad = dir.path.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = permjunta(&["check", "--family", bad.to_str().unwrap(), "--t-intersecting", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("line"));
}

#[test]
fn decompose_finds_the_single_generator_of_a_star() {
    let dir = tempdir::Dir::new("decompose");
    let star = star_file(&dir);
    let out = permjunta(&["decompose", "--family", star.to_str().unwrap(), "--r", "2", "--s", "3"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["junta"].as_array().unwrap().len(), 1);
    assert_eq!(doc["junta"][0][0][0], 1);
    assert_eq!(doc["remainder"].as_array().unwrap().len(), 0);
}

#[test]
fn surgery_demo_prints_a_replayable_step() {
    let out = permjunta(&["surgery-demo", "--kind", "cycle"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["kind"], "cycle");
    assert_eq!(doc["n_before"], 6);
    assert_eq!(doc["n_after"], 4);

    let out = permjunta(&["surgery-demo", "--kind", "odd-paths"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gate"));
}

#[test]
fn pipeline_enforces_gates_and_passes_when_waived() {
    let out = permjunta(&["pipeline"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gate"));

    let out = permjunta(&["pipeline", "--waive"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("result: PASS"));
    assert!(text.contains("gate WAIVED"));
}
