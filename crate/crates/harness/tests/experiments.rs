use std::fs;
use std::path::Path;
use std::process::Command;

use safe_rl_harness::output::{
    read_checkpoints, read_run, summarize_checkpoints, summarize_runs, write_checkpoint_summary, write_run_summary,
};
use safe_rl_harness::runner::{CHECKPOINT_SUMMARY_FILE, MANIFEST_FILE, SUMMARY_FILE};
use safe_rl_harness::{run_experiment, ExperimentConfig};

fn config(dir: &Path, body: &str) -> ExperimentConfig {
    let out = dir.join("out");
    let text = format!(r#"{{{body}, "output_dir": {}}}"#, serde_json::to_string(&out).unwrap());
    ExperimentConfig::from_json(&text).unwrap()
}

const MINIMAL: &str = r#""agent":"sucbvi","env":"grid5x5","episodes":10,"delta":0.005,"tau":0.5,"seeds":[1,2]"#;

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> =
        fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    names
}

#[test]
fn minimal_config_writes_runs_summary_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), MINIMAL);
    let manifest = run_experiment(&cfg, None, None).unwrap();
    let out = tmp.path().join("out");
    assert_eq!(files(&out), ["manifest.json", "sucbvi_seed1.csv", "sucbvi_seed2.csv", "summary.csv"]);
    assert_eq!(manifest.runs.len(), 2);
    assert_eq!(manifest.env.safe_value, Some(4.0));

    for seed in [1, 2] {
        let rows = read_run(&out.join(format!("sucbvi_seed{seed}.csv"))).unwrap();
        assert_eq!(rows.len(), 10);
        let (mut regret, mut violation) = (0.0, 0.0);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.episode, i + 1);
            regret += r.regret;
            violation += r.violation;
            assert_eq!(r.cumulative_regret, regret);
            assert_eq!(r.cumulative_violation, violation);
            assert_eq!(r.regret, 4.0 - r.policy_value);
            assert_eq!(r.wall_ms, 0.0);
        }
    }
    let summary = fs::read_to_string(out.join(SUMMARY_FILE)).unwrap();
    assert_eq!(summary.lines().count(), 11);
    assert!(summary.starts_with("agent,episode,n,return_mean,return_lo,return_hi,"));
    let manifest_json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest_json["config_hash"], cfg.hash());
}

#[test]
fn summary_is_recomputable_from_run_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &MINIMAL.replace("[1,2]", "[1,2,3]"));
    run_experiment(&cfg, None, None).unwrap();
    let out = tmp.path().join("out");
    let runs: Vec<_> = [1, 2, 3].iter().map(|s| read_run(&out.join(format!("sucbvi_seed{s}.csv"))).unwrap()).collect();
    let again = tmp.path().join("again.csv");
    write_run_summary(&again, "sucbvi", &summarize_runs(&runs)).unwrap();
    assert_eq!(fs::read(&again).unwrap(), fs::read(out.join(SUMMARY_FILE)).unwrap());
}

#[test]
fn reruns_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let body = r#""agent":"ucbvi","env":"grid5x5","episodes":50,"delta":0.005,"tau":0.5,"seeds":[5,9,13]"#;
    run_experiment(&config(a.path(), body), None, None).unwrap();
    run_experiment(&config(b.path(), body), None, None).unwrap();
    let (da, db) = (a.path().join("out"), b.path().join("out"));
    for name in files(&da) {
        if name == MANIFEST_FILE {
            continue; // embeds the output directory
        }
        assert_eq!(fs::read(da.join(&name)).unwrap(), fs::read(db.join(&name)).unwrap(), "{name}");
    }
}

#[test]
fn reward_free_runs_write_checkpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#""agent":"srf-ucrl","env":"rfe11","epsilon":0.5,"delta":0.005,"tau":0.5,
        "seeds":[0,1],"episode_cap":60,"checkpoint_every":20"#;
    let manifest = run_experiment(&config(tmp.path(), body), None, None).unwrap();
    let out = tmp.path().join("out");
    let mut all = Vec::new();
    for r in &manifest.runs {
        assert_eq!(r.episodes, 60);
        assert_eq!(r.converged, Some(false));
        let cps = read_checkpoints(&out.join(r.checkpoints_csv.as_ref().unwrap())).unwrap();
        assert_eq!(cps.iter().map(|c| c.episode).collect::<Vec<_>>(), [20, 40, 60]);
        all.push(cps);
    }
    let again = tmp.path().join("again.csv");
    write_checkpoint_summary(&again, "srf-ucrl", &summarize_checkpoints(&all)).unwrap();
    let written = fs::read_to_string(out.join(CHECKPOINT_SUMMARY_FILE)).unwrap();
    assert_eq!(fs::read_to_string(&again).unwrap(), written);
    assert!(written.lines().last().unwrap().starts_with("srf-ucrl,final,2,"));
}

#[test]
fn game_runs_and_timing() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#""agent":"safe-game","env":"ledge","episodes":30,"delta":0.05,"tau":0.5,"seeds":[4],
        "adversary":"best-response","timing":true"#;
    let manifest = run_experiment(&config(tmp.path(), body), None, None).unwrap();
    let rows = read_run(&tmp.path().join("out").join(&manifest.runs[0].csv)).unwrap();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.wall_ms >= 0.0));
    assert!(rows.iter().any(|r| r.wall_ms > 0.0));
}

#[test]
fn mismatched_or_infeasible_envs_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let game_on_mdp = config(tmp.path(), &MINIMAL.replace("\"sucbvi\"", "\"safe-game\""));
    assert_eq!(run_experiment(&game_on_mdp, None, None).unwrap_err().exit_code(), 2);
    let mdp_on_game = config(tmp.path(), &MINIMAL.replace("grid5x5", "ledge"));
    assert_eq!(run_experiment(&mdp_on_game, None, None).unwrap_err().exit_code(), 2);

    let boxed = tmp.path().join("boxed.json");
    fs::write(&boxed, r#"{"S":1,"A":1,"H":1,"P":[[[[1.0]]]],"r":[[[0.0]]],"c":[1.0],"tau":0.5,"s1":0,"noise":"none"}"#)
        .unwrap();
    let infeasible = config(tmp.path(), &MINIMAL.replace("grid5x5", boxed.to_str().unwrap()));
    assert_eq!(run_experiment(&infeasible, None, None).unwrap_err().exit_code(), 2);
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_safe-rl")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("cfg.json");
    fs::write(&cfg_path, format!("{{{MINIMAL}, \"output_dir\": \"runs\"}}")).unwrap();
    let (code, stdout) = cli(&["run", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("config "));
    // relative output dirs resolve against the config's directory
    assert!(tmp.path().join("runs").join(SUMMARY_FILE).is_file());

    fs::write(&cfg_path, MINIMAL.replace("sucbvi", "dqn")).unwrap();
    assert_eq!(cli(&["run", "--config", cfg_path.to_str().unwrap()]).0, 2);
    assert_eq!(cli(&["env", "describe", "--env", "nowhere"]).0, 2);
    let (code, stdout) = cli(&["env", "describe", "--env", "grid5x5"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("safe value      4"));
    let (code, stdout) = cli(&["analyze", "--env", "grid5x5"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("V*_1(s1)=4"));
    let (code, stdout) = cli(&["verify", "--size", "tiny", "--seed", "2"]);
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7);
}

#[test]
fn exported_files_load_back() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["rfe11", "ledge"] {
        let path = tmp.path().join(format!("{name}.json"));
        assert_eq!(cli(&["env", "export", "--env", name, "--out", path.to_str().unwrap()]).0, 0);
        let (_, from_file) = cli(&["env", "describe", "--env", path.to_str().unwrap()]);
        let (_, builtin) = cli(&["env", "describe", "--env", name]);
        assert_eq!(from_file, builtin);
    }
}
