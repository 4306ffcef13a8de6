use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn rotorlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotorlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rotorlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn goldbug_report() {
    let v = json_of(&rotorlab(&["goldbug", "--bugs", "117", "--report", "-"]));
    assert_eq!(v["cup_left"], 72);
    assert_eq!(v["cup_right"], 45);
    assert_eq!(v["fib0"], 117);
    assert_eq!(v["config"]["bugs"], 117);

    let csv = scratch("g.csv");
    assert!(
        rotorlab(&["goldbug", "--bugs", "13", "--report", csv.to_str().unwrap()])
            .status
            .success()
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,cup_left,cup_right,"));
    assert!(text.lines().nth(1).unwrap().starts_with("13,8,5,"));
}

#[test]
fn rotor_stats_for_one_bug() {
    let v = json_of(&rotorlab(&["rotor", "--bugs", "1", "--stats", "-"]));
    assert_eq!(v["site_count"], 1);
    assert_eq!(v["max_occupied_dist2"], 0);
    assert_eq!(v["min_vacant_dist2"], 1);
    assert_eq!(v["config"]["command"], "rotor");
    assert_eq!(v["config"]["swarm_seed"], Value::Null);
}

#[test]
fn swarm_matches_plain_run() {
    let plain = json_of(&rotorlab(&[
        "rotor",
        "--bugs",
        "300",
        "--stats",
        "-",
        "--check-invariants",
    ]));
    let swarm = json_of(&rotorlab(&[
        "rotor",
        "--bugs",
        "300",
        "--stats",
        "-",
        "--swarm-seed",
        "9",
    ]));
    for key in ["site_count", "max_occupied_dist2", "min_vacant_dist2"] {
        assert_eq!(plain[key], swarm[key], "{key}");
    }
    assert_eq!(swarm["config"]["swarm_seed"], 9);
}

#[test]
fn images_are_ppm_and_repeatable() {
    let a = rotorlab(&["rotor", "--bugs", "1000", "--image", "-"]);
    let b = rotorlab(&["rotor", "--bugs", "1000", "--image", "-"]);
    assert!(a.status.success());
    assert!(a.stdout.starts_with(b"P6\n"));
    assert_eq!(a.stdout, b.stdout);

    let path = scratch("pile.ppm");
    let out = rotorlab(&[
        "sandpile",
        "--grains",
        "1000",
        "--variant",
        "standard",
        "--order",
        "random:3",
        "--image",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let systematic = rotorlab(&[
        "sandpile",
        "--grains",
        "1000",
        "--variant",
        "standard",
        "--image",
        "-",
    ]);
    assert_eq!(std::fs::read(&path).unwrap(), systematic.stdout);
}

#[test]
fn sandpile_stats_echo_config() {
    let v = json_of(&rotorlab(&[
        "sandpile",
        "--grains",
        "100",
        "--variant",
        "greedy",
        "--order",
        "random:2",
        "--stats",
        "-",
    ]));
    assert_eq!(v["config"]["order"], "random:2");
    assert_eq!(v["config"]["variant"], "greedy");
    assert_eq!(v["dihedral_symmetric"], true);
}

#[test]
fn idla_runs_and_couples_with_rotor_cards() {
    let a = json_of(&rotorlab(&[
        "idla", "--bugs", "500", "--seed", "4", "--stats", "-",
    ]));
    let b = json_of(&rotorlab(&[
        "idla", "--bugs", "500", "--seed", "4", "--stats", "-",
    ]));
    assert_eq!(a, b);
    assert_eq!(a["site_count"], 500);
    assert_eq!(a["config"]["seed"], 4);

    let cards = scratch("cards.txt");
    assert!(
        rotorlab(&["rotor", "--bugs", "200", "--cards", cards.to_str().unwrap()])
            .status
            .success()
    );
    let c = json_of(&rotorlab(&[
        "idla",
        "--bugs",
        "200",
        "--cards",
        cards.to_str().unwrap(),
        "--stats",
        "-",
    ]));
    let settled = c["settled"].as_u64().unwrap();
    assert!((1..=200).contains(&settled));
    assert_eq!(c["config"]["seed"], 0);
}

#[test]
fn discrepancy_trace() {
    let out = rotorlab(&[
        "discrepancy",
        "--dim",
        "1",
        "--steps",
        "20",
        "--rotor-init",
        "random:5",
        "--trace",
        "-",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Value =
        serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(header["rotor_init"], "random:5");
    assert_eq!(lines.next(), Some("t,discrepancy"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["sandpile", "--grains", "5", "--variant", "sticky"][..],
        &["discrepancy", "--dim", "3", "--steps", "5"],
        &[
            "sandpile",
            "--grains",
            "5",
            "--variant",
            "greedy",
            "--order",
            "random:x",
        ],
        &["rotor"],
        &["teleport"],
    ] {
        let out = rotorlab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let bad = scratch("bad-cards.txt");
    std::fs::write(&bad, "0 0 1 2\n").unwrap();
    let out = rotorlab(&["idla", "--bugs", "3", "--cards", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_levels() {
    let quick = rotorlab(&["verify"]);
    assert!(
        quick.status.success(),
        "{}",
        String::from_utf8_lossy(&quick.stdout)
    );
    let slow = rotorlab(&["verify", "--level", "slow"]);
    let text = String::from_utf8_lossy(&slow.stdout);
    assert!(slow.status.success(), "{text}");
    assert!(text.contains("max dist2 956609, min vacant dist2 953461"));
    assert!(!text.contains("FAIL"));
}
