use std::path::{Path, PathBuf};
use std::process::{Command as Process, Output};

use twolocal::scenarios::{Law, Report, Shape, Verdict};
use twolocal_cli::{exit_status, kv_reports, parse_scenario_str, run_files, Command, Exit, Flags, InputError, Position};

const THREE_LINES: &str = r#"
name = "three lines"

[chart]
inner = "u"
outer = "t"

[point]
x = "0"

[[branch]]
name = "u = 0"
kind = "horizontal"
u = "q"
t = "p"
[[branch]]
name = "u = t"
kind = "horizontal"
u = "p + q"
t = "p"
[[branch]]
name = "fiber"
kind = "fiber"
u = "p"
t = "q"

[form]
omega = "1/(u*t*(u-t))"

[check]
law = "point"
precision = 8
seed = 4
"#;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_twolocal"))
}

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(rel)
}

fn write(dir: &Path, name: &str, doc: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, doc).unwrap();
    p
}

fn run(args: &[&std::ffi::OsStr]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn parses_branches_form_and_check() {
    let sc = parse_scenario_str(Path::new("x.toml"), THREE_LINES).unwrap();
    assert_eq!(sc.branches.len(), 3);
    assert_eq!(sc.branches[0].shape, Shape::Horizontal);
    assert_eq!(sc.branches[2].shape, Shape::Fiber);
    assert_eq!(sc.check.law, Law::Point);
    assert_eq!(sc.check.precision.caps(), [8, 8]);
    assert_eq!(sc.check.seed, 4);
    assert!(sc.form.is_some() && sc.ext.is_none());
}

#[test]
fn expression_errors_point_into_the_file() {
    let doc = THREE_LINES.replace("1/(u*t*(u-t))", "1/(u*");
    let err = parse_scenario_str(Path::new("x.toml"), &doc).unwrap_err();
    let line = doc.lines().position(|l| l.starts_with("omega")).unwrap() + 1;
    let col = doc.lines().nth(line - 1).unwrap().find('(').unwrap() + 1;
    match err {
        InputError::Syntax { at, message, .. } => {
            assert_eq!(at, Position { line, column: col });
            assert!(message.contains("unclosed parenthesis"), "{message}");
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let doc = THREE_LINES.replace("seed = 4", "seed = 4\ntolerance = 1");
    assert!(matches!(parse_scenario_str(Path::new("x.toml"), &doc), Err(InputError::Syntax { .. })));
}

#[test]
fn singular_branch_names_the_jacobian() {
    let dir = tempfile::tempdir().unwrap();
    let doc = THREE_LINES.replace("u = \"p + q\"\nt = \"p\"", "u = \"p + q\"\nt = \"p + q\"");
    assert_ne!(doc, THREE_LINES);
    let path = write(dir.path(), "singular.toml", &doc);
    let out = run(&["verify".as_ref(), path.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Jacobian condition violated"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", THREE_LINES);
    let cut = THREE_LINES.replace("[[branch]]\nname = \"u = t\"\nkind = \"horizontal\"\nu = \"p + q\"\nt = \"p\"\n", "");
    let bad = write(dir.path(), "bad.toml", &cut);
    let missing = dir.path().join("missing.toml");

    assert_eq!(run(&["verify".as_ref(), good.as_os_str()]).status.code(), Some(0));
    assert_eq!(run(&["verify".as_ref(), bad.as_os_str()]).status.code(), Some(1));
    assert_eq!(run(&["verify".as_ref(), missing.as_os_str()]).status.code(), Some(2));
    assert_eq!(run(&["verify".as_ref(), good.as_os_str(), "--precision".as_ref(), "1".as_ref()]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate".as_ref(), good.as_os_str()]).status.code(), Some(2));
    assert_eq!(run(&["--help".as_ref()]).status.code(), Some(0));
}

#[test]
fn report_round_trips_and_keeps_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        corpus("symbol-point/u_and_t.toml"),
        write(dir.path(), "first.toml", THREE_LINES),
        corpus("fiber/dz_over_z.toml"),
    ];
    let report = dir.path().join("out.kv");
    let mut args: Vec<&std::ffi::OsStr> = vec!["verify".as_ref()];
    args.extend(files.iter().map(|f| f.as_os_str()));
    args.extend(["--report".as_ref(), report.as_os_str(), "--seed".as_ref(), "9".as_ref()]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let reports = Report::from_kv_many(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.scenario.as_str()).collect();
    assert_eq!(names, ["u and t", "three lines", "dz/z at 0 and ∞"]);
    assert!(reports.iter().all(|r| r.verdict == Verdict::Pass && r.seed == 9));

    let outcomes = run_files(Command::Verify, &files, &Flags { precision: None, seed: Some(9) });
    assert_eq!(exit_status(&outcomes), Exit::Pass);
    let again = Report::from_kv_many(&kv_reports(&outcomes)).unwrap();
    assert_eq!(again, reports);
}

#[test]
fn worst_outcome_wins() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", THREE_LINES);
    let missing = dir.path().join("missing.toml");
    let outcomes = run_files(Command::Verify, &[good, missing], &Flags::default());
    assert_eq!(outcomes[0].exit(), Exit::Pass);
    assert_eq!(outcomes[1].exit(), Exit::InputError);
    assert_eq!(exit_status(&outcomes), Exit::InputError);
}

#[test]
fn computing_commands_succeed() {
    let path = corpus("point/three_lines.toml");
    for cmd in ["expand", "residue", "pushforward"] {
        let out = run(&[cmd.as_ref(), path.as_os_str()]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("branch.0"), "{cmd}");
    }
    let out = run(&["symbol".as_ref(), corpus("symbol-point/u_and_t.toml").as_os_str()]);
    assert_eq!(out.status.code(), Some(0));
}
