//! Binary-level session tests: exit codes, stdout formats, and the JSON
//! switch, driven through the actual `valx` executable.

use std::io::Write;
use std::process::Command;

fn run_session(text: &str, json: bool) -> (i32, String, String) {
    let mut path = std::env::temp_dir();
    path.push(format!("valx-session-{}-{:x}.vx", std::process::id(), text.len() * 31 + text.as_bytes().iter().map(|&b| b as usize).sum::<usize>()));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(text.as_bytes()).unwrap();
    drop(f);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_valx"));
    cmd.arg(&path);
    if json {
        cmd.arg("--json");
    }
    let out = cmd.output().unwrap();
    std::fs::remove_file(&path).ok();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn golden_session_runs_clean() {
    let (code, stdout, stderr) = run_session(
        "base padic 3\next a : x^3 - 1/3 @ -1/3\ngamma rational 1/5\npair a\nkras\nreport\n",
        false,
    );
    assert_eq!(code, 0, "stderr: {}", stderr);
    assert!(stdout.contains("kras = 1/6"));
    assert!(stdout.contains("omegaQ = 8/15"));
    assert!(stdout.contains("index_e = 5"));
    assert!(stdout.contains("valuegroup = (1/15)Z"));
}

#[test]
fn parse_error_exits_2() {
    let (code, _, stderr) = run_session("base padic 3\nfrobnicate\n", false);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 2"));
    // use before declaration is also a parse-stage failure
    let (code, _, _) = run_session("base padic 3\nic\n", false);
    assert_eq!(code, 2);
}

#[test]
fn construction_error_exits_3() {
    let (code, _, stderr) =
        run_session("base ratfun F3 t\next a : x^2 - 1/t @ -1/3\n", false);
    assert_eq!(code, 3);
    assert!(stderr.contains("Newton polygon"), "stderr: {}", stderr);
}

#[test]
fn empty_command_list_exits_0_with_no_output() {
    let (code, stdout, _) = run_session("base padic 3\next a : x^3 - 1/3 @ -1/3\n", false);
    assert_eq!(code, 0);
    assert_eq!(stdout, "");
}

#[test]
fn json_objects_parse() {
    let (code, stdout, _) = run_session(
        "base padic 3\next a : x^3 - 1/3 @ -1/3\ngamma rational 1/5\npair a\nkras\nic\nreport\n",
        true,
    );
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    for l in lines {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v.get("cmd").is_some());
    }
}

#[test]
fn missing_file_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_valx"))
        .arg("/nonexistent/definitely-not-here.vx")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
