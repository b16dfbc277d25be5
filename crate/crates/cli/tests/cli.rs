use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ncschur"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(summary: &str, key: &str) -> f64 {
    summary
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {summary}"))
        .parse()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn roundtrip_selftest_passes() {
    let o = run(&["roundtrip-selftest", "--letters", "2", "--degree", "4", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("status=ok"));
    assert!(field(&s, "max_err") < 1e-9);
}

#[test]
fn malformed_word_reports_pointer() {
    let dir = scratch("malformed");
    let input = dir.join("bad.json");
    std::fs::write(
        &input,
        r#"{"N":2,"in_dim":1,"out_dim":1,"max_degree":2,"coeffs":[{"word":[0,3],"value":[[[0.1,0]]]}]}"#,
    )
    .unwrap();
    let o = run(&["schur-analyze", "--input", p(&input)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/coeffs/0/word/0"));
}

#[test]
fn infeasible_pick_fails_with_negative_eigenvalue() {
    let dir = scratch("pick");
    let pts = dir.join("pts.json");
    let vals = dir.join("vals.json");
    std::fs::write(&pts, "[[[0,0]]]").unwrap();
    std::fs::write(&vals, "[[1.2,0]]").unwrap();
    let o = run(&["pick-check", "--points", p(&pts), "--values", p(&vals)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(field(&stdout(&o), "min_eig") < 0.0);
}

#[test]
fn unknown_subcommand_is_rejected() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn analysis_realization_transfer_chain() {
    let dir = scratch("chain");
    let (t, params, sys, t2, t3) = (
        dir.join("t.json"),
        dir.join("p.json"),
        dir.join("s.json"),
        dir.join("t2.json"),
        dir.join("t3.json"),
    );
    let ok = |args: &[&str]| {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    ok(&["random-schur", "--letters", "2", "--degree", "3", "--seed", "4", "--output", p(&t)]);
    ok(&["verify-displacement", "--input", p(&t), "--levels", "3"]);
    ok(&["schur-analyze", "--input", p(&t), "--depth", "3", "--output", p(&params)]);
    ok(&["schur-synthesize", "--input", p(&params), "--output", p(&t2)]);
    let s = ok(&["realize", "--input", p(&params), "--output", p(&sys)]);
    assert!(field(&s, "coisometry") < 1e-10);
    ok(&["transfer", "--input", p(&sys), "--degree", "3", "--output", p(&t3)]);
    let read = |f: &Path| {
        let v = ncschur_cli::json::parse_text(&std::fs::read_to_string(f).unwrap()).unwrap();
        ncschur_cli::json::series_from_json(&v).unwrap()
    };
    let (a, b, c) = (read(&t), read(&t2), read(&t3));
    assert!(a.max_coeff_diff(&b, 3) < 1e-9);
    assert!(a.max_coeff_diff(&c, 3) < 1e-9);
}

#[test]
fn kernel_round_trip_through_files() {
    let dir = scratch("kernel");
    let (sym, z, back) = (dir.join("sym.json"), dir.join("z.json"), dir.join("back.json"));
    std::fs::write(
        &sym,
        r#"{"N":2,"e_dim":1,"entries":[{"word":[1],"value":[[[0.3,0]]]},{"word":[2,1],"value":[[[0,0.2]]]}]}"#,
    )
    .unwrap();
    assert_eq!(run(&["kernel-check", "--input", p(&sym), "--degree", "3"]).status.code(), Some(0));
    assert_eq!(
        run(&["kernel-to-schur", "--input", p(&sym), "--degree", "3", "--output", p(&z)]).status.code(),
        Some(0)
    );
    assert_eq!(run(&["schur-to-kernel", "--input", p(&z), "--output", p(&back)]).status.code(), Some(0));
    let read = |f: &Path| {
        let v = ncschur_cli::json::parse_text(&std::fs::read_to_string(f).unwrap()).unwrap();
        ncschur_cli::json::symbol_from_json(&v).unwrap()
    };
    assert!(read(&sym).max_diff(&read(&back), 3) < 1e-12);
}

#[test]
fn scatter_solve_interpolates() {
    let dir = scratch("scatter");
    let input = dir.join("pick.json");
    std::fs::write(
        &input,
        r#"{"points":[[[0.3,0.1],[-0.2,0]],[[0.1,0],[0,0.35]]],"values":[[0.1,0.2],[-0.25,0]]}"#,
    )
    .unwrap();
    let o = run(&["scatter-solve", "--input", p(&input), "--degree", "2", "--output", p(&dir.join("t.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&stdout(&o), "max_residual") < 1e-6);
}
