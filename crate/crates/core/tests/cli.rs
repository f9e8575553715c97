use std::process::Command;

fn simlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simlab"))
}

#[test]
fn validate_exits_zero_and_reports_every_check() {
    let out = simlab().args(["validate", "--seed", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 9);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn unknown_key_is_rejected_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "scheme = ssk\nsnr = 10\n").unwrap();
    let out = simlab().args(["ber", "--config"]).arg(&conf).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn zero_threads_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("z.conf");
    std::fs::write(&conf, "scheme = ssk\nzdc_trials = 10\n").unwrap();
    let out = simlab().args(["zdc", "--threads", "0", "--config"]).arg(&conf).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zdc_to_stdout_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("z.conf");
    std::fs::write(&conf, "scheme = ssk, qssk\nrho = 0, 0.5\nn_subbands = 1, 3\nzdc_trials = 50\n").unwrap();
    let run = |seed: &str| simlab().args(["zdc", "--seed", seed, "--config"]).arg(&conf).output().unwrap().stdout;
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
    assert_eq!(String::from_utf8(run("5")).unwrap().lines().count(), 1 + 2 * 2 * 2);
}
