use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symwcet"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn wcet(file: &str, bindings: &[&str]) -> u64 {
    let path = data(file);
    let mut args = vec!["wcet", "-i", path.to_str().unwrap(), "--self-check"];
    for b in bindings {
        args.extend(["--bind", b]);
    }
    stdout(&run(&args)).trim().parse().unwrap()
}

#[test]
fn zero_cost_program_has_zero_wcet() {
    let doc = serde_json::json!({
        "name": "zero",
        "blocks": [{"id": "a", "wcet": 0}, {"id": "h", "wcet": 0}, {"id": "b", "wcet": 0}, {"id": "e", "wcet": 0}],
        "edges": [["a", "h"], ["h", "b"], ["b", "h"], ["h", "e"]],
        "entry": "a",
        "exit": "e",
        "loop_bounds": {"h": "k"}
    });
    let path = std::env::temp_dir().join("symwcet-cli-zero.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let path = path.to_str().unwrap();
    assert_eq!(
        stdout(&run(&["formula", "-i", path])).trim(),
        "(l=TOP,[|0])"
    );
    assert_eq!(
        stdout(&run(&["wcet", "-i", path, "--bind", "k=7"])).trim(),
        "0"
    );
}

#[test]
fn wcet_grows_with_the_bound() {
    let values: Vec<u64> = (1..8)
        .map(|n| wcet("triangular.json", &[&format!("n={n}")]))
        .collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
    assert_eq!(wcet("nested.json", &["$n=2"]), 69);
}

#[test]
fn stats_report_operand_counts() {
    let path = data("nested.json");
    let out = stdout(&run(&["formula", "-i", path.to_str().unwrap(), "--stats"]));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].contains('n'));
    assert!(lines.iter().any(|l| l.starts_with("initial operands: ")));
    assert!(lines.iter().any(|l| l.starts_with("final operands: ")));
}

#[test]
fn concrete_bindings_collapse_the_formula() {
    let path = data("nested.json");
    let out = stdout(&run(&[
        "formula",
        "-i",
        path.to_str().unwrap(),
        "--bind",
        "n=2",
    ]));
    assert_eq!(out.trim(), "(l=TOP,[|69])");
}

#[test]
fn tree_is_printed_as_an_s_expression() {
    let path = data("nested.json");
    let out = stdout(&run(&["tree", "-i", path.to_str().unwrap()]));
    assert!(out.starts_with("(seq (loop b1"), "{out}");
}

#[test]
fn help_exits_cleanly() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("sweep"));
}
