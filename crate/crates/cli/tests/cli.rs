use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use liarwalk::parityforge::ParityGrid;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liarwalk")).args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_liarwalk"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn lines(o: &Output) -> Vec<Value> {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("liarwalk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn as_u64s(v: &Value) -> Vec<u64> {
    v.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

#[test]
fn simulate_window_follows_odd_progression() {
    let recs = lines(&run(&["simulate", "--config", "{0:1,2:11}", "--steps", "4", "--e", "1"]));
    let windows: Vec<Vec<u64>> = recs.iter().map(|r| as_u64s(&r["window"])).collect();
    assert_eq!(windows, vec![vec![1, 11], vec![0, 7], vec![0, 3], vec![0, 1], vec![0, 0]]);
}

#[test]
fn simulate_empty_config_stays_empty() {
    let recs = lines(&run(&["simulate", "--config", "{}", "--steps", "3"]));
    assert_eq!(recs.len(), 4);
    assert!(recs.iter().all(|r| r["chips"].as_array().unwrap().is_empty()));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["simulate", "--seed", "9", "--steps", "20"][..],
        &["discrepancy", "--seed", "3", "--steps", "128"][..],
        &["bounds", "--n", "100,200", "--f", "1/4"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let path = scratch("sim.jsonl");
    let p = path.to_str().unwrap();
    let direct = run(&["simulate", "--config", "{0:5}", "--steps", "6"]);
    let o = run(&["simulate", "--config", "{0:5}", "--steps", "6", "--out", p]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn solve_reports_first_question() {
    let recs = lines(&run(&["game", "solve", "--x0", "1,11", "--n", "4", "--e", "1"]));
    assert_eq!(recs[0]["paul_wins"], Value::Bool(true));
    assert_eq!(as_u64s(&recs[0]["first_question"]), vec![1, 4]);
}

#[test]
fn solve_empty_state_loses() {
    let recs = lines(&run(&["game", "solve", "--x0", "0", "--n", "3"]));
    assert_eq!(recs[0]["paul_wins"], Value::Bool(false));
}

#[test]
fn odd_run_has_four_rounds_ending_empty() {
    let recs = lines(&run(&["game", "odd-run", "--x0", "1,11", "--n", "4", "--e", "1"]));
    let states: Vec<Vec<u64>> = recs.iter().map(|r| as_u64s(&r["state"])).collect();
    assert_eq!(states, vec![vec![0, 7], vec![0, 3], vec![0, 1], vec![0, 0]]);
}

#[test]
fn machine_mode_agrees_with_odd_run() {
    let recs = lines(&run(&["game", "machine", "--x0", "1,11", "--n", "4"]));
    assert_eq!(recs[0]["machine_wins"], Value::Bool(false));
    assert_eq!(recs[0]["window_sum"].as_u64(), Some(0));
    let recs = lines(&run(&["game", "machine", "--m", "12", "--e", "1", "--n", "4"]));
    assert_eq!(recs[0]["machine_wins"], Value::Bool(true));
    let solved = lines(&run(&["game", "solve", "--m", "12", "--e", "1", "--n", "4"]));
    assert_eq!(solved[0]["paul_wins"], Value::Bool(true));
}

#[test]
fn interactive_replays_answers() {
    let o = run_stdin(&["game", "interactive", "--x0", "1,11", "--n", "4"], "yes\nno\nno\nyes\n");
    let recs = lines(&o);
    assert_eq!(recs.len(), 5);
    assert_eq!(recs[1]["answer"], "no");
    assert_eq!(as_u64s(&recs[4]["state"]), vec![0, 1]);
    assert_eq!(recs[4]["paul_wins"], Value::Bool(true));
}

#[test]
fn interactive_rejects_bad_answer_and_short_input() {
    let o = run_stdin(&["game", "interactive", "--x0", "1,11", "--n", "4"], "maybe\n");
    assert_eq!(o.status.code(), Some(2));
    let o = run_stdin(&["game", "interactive", "--x0", "1,11", "--n", "4"], "yes\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn small_pointwise_sweep_is_within_bound() {
    let o = run(&["discrepancy", "--config", "{0:1}", "--steps", "64", "--t-min", "8"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let ts: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(ts, vec!["8", "16", "32", "64"]);
    for r in rows {
        let cols: Vec<&str> = r.split(',').collect();
        let ratio: f64 = cols[5].parse().unwrap();
        assert!(ratio < 1.0, "{r}");
        assert_eq!(cols[7], "true");
    }
}

#[test]
fn interval_sweep_has_width_column() {
    let o = run(&["discrepancy", "--seed", "4", "--steps", "32", "--interval", "-2:6", "--cprime", "2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for r in text.lines().skip(1) {
        assert_eq!(r.split(',').nth(1), Some("8"));
    }
}

#[test]
fn bounds_row_matches_stage_split() {
    let o = run(&["bounds", "--n", "100", "--f", "0.25"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut it = text.lines();
    let header: Vec<&str> = it.next().unwrap().split(',').collect();
    let row: Vec<&str> = it.next().unwrap().split(',').collect();
    let get = |k: &str| row[header.iter().position(|h| *h == k).unwrap()];
    assert_eq!((get("n1"), get("n2"), get("F"), get("F1"), get("F2")), ("76", "24", "25", "19", "6"));
}

#[test]
fn force_parity_on_zero_grid_is_empty() {
    let path = scratch("zero.grid");
    std::fs::write(&path, ParityGrid::zeros(6, 5, liarwalk::chipfield::Parity::Even).unwrap().to_text()).unwrap();
    let o = run(&["force-parity", "--config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with('#')), "{text}");
}

#[test]
fn force_parity_output_reproduces_grid() {
    let mut g = ParityGrid::zeros(8, 6, liarwalk::chipfield::Parity::Even).unwrap();
    g.set(2, 0, true).unwrap();
    g.set(5, 1, true).unwrap();
    g.set(4, 4, true).unwrap();
    let grid_path = scratch("some.grid");
    std::fs::write(&grid_path, g.to_text()).unwrap();
    let out = scratch("forced.txt");
    let o = run(&["force-parity", "--config", grid_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = lines(&run(&["simulate", "--config", out.to_str().unwrap(), "--steps", "5"]));
    for (t, r) in recs.iter().enumerate() {
        for i in 0..8usize {
            if !g.reachable(i, t) {
                continue;
            }
            let count = r["chips"]
                .as_array()
                .unwrap()
                .iter()
                .find(|c| c[0].as_i64() == Some(i as i64))
                .map_or(0, |c| c[1].as_u64().unwrap());
            assert_eq!(count % 2 == 1, g.get(i, t), "site {i} t {t}");
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["simulate", "--config", "{0:1", "--steps", "2"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--config", "{0:1,1:1}", "--steps", "2"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--n", "10", "--f", "x"]).status.code(), Some(2));
    assert_eq!(run(&["discrepancy", "--seed", "1", "--steps", "8", "--interval", "5:1"]).status.code(), Some(2));
    assert_eq!(
        run(&["simulate", "--config", "{0:1}", "--steps", "100", "--max-window", "10"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["game", "solve", "--x0", "3,40,100", "--n", "12", "--max-nodes", "10"]).status.code(),
        Some(3)
    );
}
