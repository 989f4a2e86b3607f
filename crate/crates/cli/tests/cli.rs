use std::process::{Command, Output};

fn morita(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morita"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn gamma_values() {
    let o = morita(&["gamma", "--p", "5", "--prec", "6", "--x", "5", "--residue"]);
    assert!(o.status.success());
    // -24 mod 5^6
    assert_eq!(stdout(&o).trim(), (15625 - 24).to_string());
    let o = morita(&["gamma", "--p", "5", "--prec", "6", "--x", "5"]);
    assert_eq!(stdout(&o).trim(), "5^0 * (1 + 0*5 + 4*5^2 + 4*5^3 + 4*5^4 + 4*5^5) + O(5^6)");
    let o = morita(&["gamma", "--p", "2", "--prec", "4", "--x", "4", "--residue"]);
    assert_eq!(stdout(&o).trim(), "3");
    assert!(stderr(&o).is_empty());
}

#[test]
fn gamma_rejects_non_integral_input() {
    let o = morita(&["gamma", "--p", "5", "--prec", "6", "--x", "3,1", "--v", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not a p-adic integer"));
    assert!(stdout(&o).is_empty());
    let o = morita(&["gamma", "--p", "3", "--prec", "6", "--x", "1/3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_configurations_exit_2() {
    assert_eq!(morita(&["gamma", "--p", "6", "--prec", "6", "--x", "1"]).status.code(), Some(2));
    assert_eq!(morita(&["gamma", "--p", "5", "--prec", "0", "--x", "1"]).status.code(), Some(2));
    let o = morita(&["--max-bits", "50", "gamma", "--p", "5", "--prec", "60", "--x", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("work limit"));
    assert_eq!(morita(&["falsify", "--prec", "12"]).status.code(), Some(2));
    assert_eq!(morita(&["falsify", "--d", "0"]).status.code(), Some(2));
    assert_eq!(morita(&["falsify", "--samples", "3"]).status.code(), Some(2));
}

#[test]
fn checks_pass() {
    let o = morita(&["check", "wilson", "--max-p", "200"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("wilson: 46 of 46 primes pass\n"));

    let o = morita(&["check", "functional", "--p", "7", "--samples", "100", "--seed", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 101);

    let o = morita(&["check", "pstep", "--p", "3", "--samples", "20", "--seed", "4"]);
    assert!(o.status.success());

    let o = morita(&["check", "leibniz", "--p", "5", "--n", "2", "--m", "4", "--prec", "40", "--samples", "5"]);
    assert!(o.status.success());
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert!(first.starts_with("sample 0: g^(0) "), "{first}");
    assert!(first.contains("g^(2) "));
}

#[test]
fn checks_are_seeded() {
    let args = ["check", "pstep", "--p", "5", "--samples", "10", "--seed", "9"];
    assert_eq!(morita(&args).stdout, morita(&args).stdout);
}

#[test]
fn dpoly_operations() {
    let o = morita(&["dpoly", "lt", "--expr", "X*Y0^2*Y1 + Y0^7"]);
    assert_eq!(stdout(&o).trim(), "X*Y0^2*Y1");
    let o = morita(&["dpoly", "transform", "--p", "3", "--expr", "Y0"]);
    assert_eq!(stdout(&o).trim(), "(-X^2-3*X-2)*Y0");
    let o = morita(&["dpoly", "divide", "--expr", "(X^2-1)*Y0^2", "--expr2", "(X+1)*Y0^2"]);
    assert_eq!(stdout(&o).trim(), "X-1");
    let o = morita(&["dpoly", "r", "--p", "3", "--expr", "Y0"]);
    assert_eq!(stdout(&o).trim(), "-X^2-3*X-2");
    let o = morita(&["dpoly", "eval", "--p", "5", "--expr", "X*Y0 + Y1", "--x", "2", "--y", "3,4"]);
    assert_eq!(stdout(&o).trim(), "5^1 * (2) + O(5^20)");
}

#[test]
fn dpoly_json() {
    let o = morita(&["dpoly", "lt", "--json", "--expr", "(X^2+1)*Y0^2*Y1 + 3*Y0^3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["terms"][0]["alpha"], serde_json::json!([2, 1]));
    assert_eq!(v["terms"][0]["coeff"], "X^2+1");
}

#[test]
fn dpoly_errors() {
    let o = morita(&["dpoly", "divide", "--expr", "Y1", "--expr2", "Y0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not divisible"));

    let o = morita(&["dpoly", "lt", "--expr", "Y0 + + Y1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines[1], "expr: Y0 + + Y1");
    // caret under the second '+'
    assert_eq!(lines[2].find('^'), Some("expr: Y0 + ".len()));
}

#[test]
fn falsify_gamma_finds_nothing() {
    let dir = std::env::temp_dir();
    let a = dir.join(format!("morita-cli-{}-a.json", std::process::id()));
    let b = dir.join(format!("morita-cli-{}-b.json", std::process::id()));
    let args = |out: &str| {
        vec![
            "falsify", "--p", "5", "--n", "1", "--d", "2", "--e", "2", "--prec", "60", "--m", "4", "--samples", "64",
            "--seed", "7", "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([out.to_string()])
        .collect::<Vec<_>>()
    };
    for path in [&a, &b] {
        let argv = args(path.to_str().unwrap());
        let o = morita(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("none_at_precision: rank 18/18"));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["status"], "none_at_precision");
    assert_eq!(v["rank"], v["columns"]);
    assert!(v["certified_digits"].as_i64().unwrap() >= 10);
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn falsify_controls() {
    let o = morita(&["falsify", "--control", "identity", "--n", "1", "--d", "1", "--e", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "found");
    assert_eq!(v["annihilator"]["text"], "-1 + Y1");

    let o = morita(&["falsify", "--control", "reciprocal", "--p", "3", "--n", "1", "--d", "2", "--e", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["annihilator"]["text"], "Y1 + Y0^2");
}
