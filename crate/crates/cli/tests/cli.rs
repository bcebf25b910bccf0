use std::process::{Command as Proc, Output};

use cfstat_cli::{dispatch, parse_args, CliError, Command, Format};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_cfstat"))
        .args(args)
        .env_remove("CFSTAT_WORKERS")
        .output()
        .expect("spawn cfstat")
}

fn dispatch_str(args: &[&str]) -> (i32, String) {
    let cfg = parse_args(args.iter().copied()).unwrap();
    let mut buf = Vec::new();
    let code = dispatch(&cfg, &mut buf);
    (code, String::from_utf8(buf).unwrap())
}

#[test]
fn parses_subcommands_and_globals() {
    let cfg = parse_args([
        "--workers",
        "3",
        "--format",
        "tsv",
        "verify",
        "perm.J1",
        "--n",
        "5",
    ])
    .unwrap();
    assert_eq!(cfg.workers, 3);
    assert_eq!(cfg.format, Format::Tsv);
    assert_eq!(
        cfg.command,
        Command::Verify {
            id: "perm.J1".into(),
            n: Some(5),
            order: None
        }
    );

    let cfg = parse_args(["conjecture"]).unwrap();
    assert_eq!(cfg.command, Command::Conjecture { n: 7, order: None });
    assert_eq!(cfg.format, Format::Json);
    assert!(!cfg.timing);
}

#[test]
fn rejects_bad_usage() {
    assert!(matches!(parse_args(["verify"]), Err(CliError::Usage(_))));
    assert!(matches!(
        parse_args(["--workers", "0", "list"]),
        Err(CliError::Usage(_))
    ));
    assert!(matches!(
        parse_args(["frobnicate"]),
        Err(CliError::Usage(_))
    ));
    let help = parse_args(["--help"]).unwrap_err();
    assert_eq!(help.exit_code(), 0);
}

#[test]
fn stats_for_a_transposition() {
    let (code, out) = dispatch_str(&["stats", "--object", "perm", "--oneline", "2,1,3"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["inv"], 1);
    assert_eq!(v["exc"], 1);
    assert_eq!(v["cyc"], 2);
    assert_eq!(v["fix"], 1);
}

#[test]
fn encode_then_decode() {
    let (code, path) = dispatch_str(&["encode", "--bijection", "fz", "--oneline", "3,1,4,2"]);
    assert_eq!(code, 0);
    let (code, back) = dispatch_str(&["decode", "--bijection", "fz", "--path", path.trim()]);
    assert_eq!(code, 0);
    assert!(back.contains("[3,1,4,2]"), "{back}");
}

#[test]
fn exit_codes() {
    let ok = run(&["verify", "perm.J1", "--n", "5"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["passed"], true);

    assert_eq!(run(&["verify"]).status.code(), Some(2));
    let unknown = run(&["verify", "no.such.theorem"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stdout).contains("error"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_does_not_depend_on_worker_count() {
    for args in [
        &["verify", "sp.pq.J", "--n", "8"][..],
        &["enumerate", "--object", "matching", "--n", "5"][..],
    ] {
        let one = run(&[&["--workers", "1"][..], args].concat());
        let three = run(&[&["--workers", "3"][..], args].concat());
        assert_eq!(one.status.code(), Some(0));
        assert_eq!(one.stdout, three.stdout);
    }
}

#[test]
fn workers_from_environment() {
    let out = Proc::new(env!("CARGO_BIN_EXE_cfstat"))
        .args(["list"])
        .env("CFSTAT_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn conjecture_passes_at_seven() {
    let out = run(&["conjecture", "--n", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_all_passes() {
    let out = run(&["--format", "tsv", "verify-all", "--budget", "600"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(!String::from_utf8_lossy(&out.stdout).contains("\tfalse\t"));
}
