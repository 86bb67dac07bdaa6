use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use pag_core::ReportDocument;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn pag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pag"))
        .args(args)
        .env_remove("PAG_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn line() -> String {
    data("line3.scn").to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_line_game() {
    let out = pag(&["validate", &line()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("3 countries"));
}

#[test]
fn validate_rejects_strong_preference_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    let text = fs::read_to_string(data("line3.scn")).unwrap().replace(
        "order 1: [1,1,1] ~ [1,1,0] > [1,0,1] ~ [1,0,0] > [0,1,0]",
        "order 1: [0,1,0] > [1,1,1] ~ [1,1,0] > [1,0,1] ~ [1,0,0]",
    );
    fs::write(&path, text).unwrap();
    let out = pag(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("country 1"));
}

#[test]
fn enumerate_writes_versioned_json() {
    let out = pag(&["enumerate", &line()]);
    assert!(out.status.success());
    let doc = ReportDocument::from_json(&stdout(&out)).unwrap();
    let e = doc.enumeration.unwrap();
    assert_eq!(e.variables, ["u[1,2]", "u[2,1]", "u[2,3]", "u[3,2]"]);
    let labels: Vec<String> = e.classes.iter().map(|c| c.label.to_string()).collect();
    assert!(labels.contains(&"SPP".to_string()));
    assert!(e.classes.iter().all(|c| !c.polytopes.is_empty() && c.volume.is_none()));
    assert_eq!(doc.countries.len(), 3);
}

#[test]
fn enumerate_volumes_and_csv() {
    let out = pag(&[
        "enumerate",
        &line(),
        "--volume-samples",
        "2000",
        "--seed",
        "5",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("section,class,country,metric,value\n"));
    assert!(text.contains("enumeration,,,strategy_space_volume,1012.5"));
    assert!(text.contains(",volume_hits,"));
}

#[test]
fn exit_codes_are_distinct() {
    assert_eq!(pag(&["enumerate", &line(), "--cap", "2"]).status.code(), Some(6));
    assert_eq!(pag(&["validate", "/nonexistent/game.scn"]).status.code(), Some(3));
    assert_eq!(pag(&["enumerate", &line(), "--bogus"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.scn");
    fs::write(&path, "countries: 2\npower: 1 1\nrelations:\n1 2 7 0.5\n").unwrap();
    let out = pag(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let args = ["simulate", &line(), "--q", "60", "--seed", "3"];
    let one = Command::new(env!("CARGO_BIN_EXE_pag"))
        .args(args)
        .env("PAG_THREADS", "1")
        .output()
        .unwrap();
    let three = Command::new(env!("CARGO_BIN_EXE_pag"))
        .args(args)
        .env("PAG_THREADS", "3")
        .output()
        .unwrap();
    assert!(one.status.success() && three.status.success());
    assert_eq!(one.stdout, three.stdout);
    let doc = ReportDocument::from_json(&stdout(&one)).unwrap();
    let sim = doc.simulation.unwrap();
    assert_eq!((sim.config.q, sim.config.rounds, sim.config.seed), (60, 50, 3));
    assert_eq!(sim.summary.all.survival.len(), 3);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_pag"))
        .args(["validate", &line()])
        .env("PAG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_uses_scenario_defaults_and_warns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.scn");
    let text = "countries: 2\npower: 2 3\nsim.q: 25\nsim.mode: sync\nsim.seed: 9\nrelations:\n1 2 -1 0.5\n";
    fs::write(&path, text).unwrap();
    let out = pag(&["simulate", path.to_str().unwrap(), "--rounds", "7"]);
    assert!(out.status.success());
    let sim = ReportDocument::from_json(&stdout(&out)).unwrap().simulation.unwrap();
    assert_eq!((sim.config.q, sim.config.rounds, sim.config.seed), (25, 7, 9));
    assert_eq!(sim.config.mode.to_string(), "sync");

    fs::write(&path, "countries: 2\npower: 2 3\nrelations:\n1 2 0 0.5\n").unwrap();
    let out = pag(&["simulate", path.to_str().unwrap(), "--q", "5"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn report_converts_json_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("run.json");
    let out = pag(&[
        "simulate",
        &line(),
        "--q",
        "20",
        "--seed",
        "1",
        "--output",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let doc = ReportDocument::from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    let csv = pag(&["report", json.to_str().unwrap(), "--format", "csv"]);
    assert!(csv.status.success());
    assert_eq!(stdout(&csv), doc.to_csv().unwrap());
    let again = pag(&["report", json.to_str().unwrap()]);
    assert_eq!(stdout(&again), fs::read_to_string(&json).unwrap());
}

#[test]
fn randomize_produces_a_valid_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let power = dir.path().join("power.txt");
    fs::write(&power, "0.139, 0.218 0.035\n").unwrap();
    let scn = dir.path().join("random.scn");
    let args = [
        "randomize",
        "--n",
        "3",
        "--power",
        power.to_str().unwrap(),
        "--seed",
        "4",
        "-o",
        scn.to_str().unwrap(),
    ];
    assert!(pag(&args).status.success());
    let first = fs::read_to_string(&scn).unwrap();
    assert!(first.contains("power: 0.139 0.218 0.035"));
    assert!(pag(&["validate", scn.to_str().unwrap()]).status.success());
    assert!(pag(&args).status.success());
    assert_eq!(fs::read_to_string(&scn).unwrap(), first);
    assert_eq!(
        pag(&[
            "randomize",
            "--n",
            "2",
            "--power",
            power.to_str().unwrap(),
            "--seed",
            "4"
        ])
        .status
        .code(),
        Some(4)
    );
}
