//! End-to-end checks of the command-line binary: exit codes, stdout shape,
//! and artifacts written by each subcommand.

use std::fs;
use std::process::{Command, Output};

fn ftforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn codes_lists_builtins() {
    let out = ftforge(&["codes"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["steane_7_1_3", "shor_9_1_3", "perfect_5_1_3", "surface17_9_1_3"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
    assert!(text.contains("[[7,1,3]]"));
}

#[test]
fn canon_reproduces_reference_form() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tab.txt");
    fs::write(
        &path,
        "+ZZZZZZZ\n+ZIZIZIZ\n+XIXIXIX\n+IZZIIZZ\n+IXXIIXX\n+IIIZZZZ\n+IIIXXXX\n",
    )
    .unwrap();
    let out = ftforge(&["canon", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "+XIXIXIX\n+ZIIIIZZ\n+IXXIIXX\n+IZIIZIZ\n+IIZIZZI\n+IIIXXXX\n+IIIZZZZ\n"
    );
}

const STEANE_ZERO_PREP: &str = "H 1\nH 2\nH 3\nCX 1 0\nCX 3 5\nCX 2 6\nCX 1 4\nCX 2 0\nCX 3 6\nCX 1 5\nCX 6 4\n";

#[test]
fn verify_exit_codes_distinguish_ft_from_harmful() {
    let dir = tempfile::tempdir().unwrap();
    let flagged = dir.path().join("flagged.circ");
    fs::write(
        &flagged,
        format!("qubits 7 1\n{STEANE_ZERO_PREP}CX 0 7\nCX 6 7\nCX 5 7\n"),
    )
    .unwrap();
    let out = ftforge(&["verify", flagged.to_str().unwrap(), "--code", "steane_7_1_3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("FT=yes"));

    let bare = dir.path().join("bare.circ");
    fs::write(&bare, format!("qubits 7 0\n{STEANE_ZERO_PREP}")).unwrap();
    let out = ftforge(&["verify", bare.to_str().unwrap(), "--code", "steane_7_1_3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FT=no"));
}

#[test]
fn bad_input_exits_2() {
    let out = ftforge(&["verify", "/nonexistent.circ", "--code", "steane_7_1_3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ftforge(&["canon", "/nonexistent.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_writes_artifacts_and_evaluate_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    let out_path = dir.path().join("out");
    let config = serde_json::json!({
        "task": "lsp",
        "code": "ghz3",
        "state": "plus",
        "gates": ["H", "CX"],
        "max_gates": 10,
        "seed": 0,
        "ppo": {
            "n_agents": 1,
            "n_envs": 8,
            "total_timesteps": 8192,
            "stop_at_size": 3
        },
        "out_dir": out_path
    });
    fs::write(&cfg_path, serde_json::to_vec_pretty(&config).unwrap()).unwrap();
    let out = ftforge(&["train", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}\n{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    assert!(out_path.join("training_log.csv").exists());
    assert!(out_path.join("agent0.ftag").exists());
    let circ_path = out_path.join("best_agent0.circ");
    let circ = fs::read_to_string(&circ_path).unwrap();
    assert!(circ.starts_with("qubits 3 0"), "unexpected circuit:\n{circ}");

    // The emitted circuit evaluates cleanly at p = 0 (acceptance 1, no
    // logical errors).
    let out = ftforge(&[
        "evaluate",
        circ_path.to_str().unwrap(),
        "--code",
        "ghz3",
        "--state",
        "plus",
        "--p-list",
        "0.0",
        "--trials",
        "100",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}\n{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(out_path.join("eval_report.csv")).unwrap();
    assert!(report.starts_with(
        "p,trials,accepted,acceptance_rate,logical_errors,logical_error_rate,ler_ci_low,ler_ci_high"
    ));
    assert!(report.contains("\n0,100,100,1,0,0,"), "unexpected report:\n{report}");
}
