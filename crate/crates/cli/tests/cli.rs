use std::fs;

use defeq::cli::run;

fn tn(args: &[&str]) -> defeq::cli::Outcome {
    run(std::iter::once("defeq").chain(args.iter().copied()))
}

fn fragment_file(dir: &tempfile::TempDir) -> String {
    let p = dir.path().join("m.frag");
    fs::write(
        &p,
        "# test fragment\nchain c0 lo=-20 hi=20 labels=10101010101011010011010101010101010101010\nchain c1 lo=0 hi=9 labels=1010101010\nzero=c0:0\n",
    )
    .unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn parse_reports_prenex_and_radius() {
    let o = tn(&["parse", "(exists y (and (A (S y)) (= x (P y))))"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("radius: 4"));
    let j = tn(&["--json", "parse", "(A (S x))"]);
    let v: serde_json::Value = serde_json::from_str(&j.stdout).unwrap();
    assert_eq!(v["report"], "parse");
    assert_eq!(v["radius"], 1);
}

#[test]
fn translate_round_trip_through_swap() {
    let f = tn(&["translate", "--dict", "swap", "(A (S x))"]);
    assert!(f.stdout.contains("output: (A' (P' x))"), "{}", f.stdout);
    let b = tn(&["translate", "--dict", "swap", "--backward", "(A' (P' x))"]);
    assert!(b.stdout.contains("output: (A (S x))"), "{}", b.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tn(&["bogus"]).code, 2);
    assert_eq!(tn(&["parse", "(foo x)"]).code, 2);
    assert_eq!(tn(&["parse", "(and (A x)"]).code, 2);
    assert_eq!(tn(&["demo-pipeline"]).code, 2);
    assert_eq!(tn(&["eval", "--model", "/nonexistent/file", "(A x)"]).code, 2);
    assert_eq!(tn(&["--help"]).code, 0);
}

#[test]
fn eval_rtype_verify_and_ma() {
    let dir = tempfile::tempdir().unwrap();
    let m = fragment_file(&dir);
    let e = tn(&["eval", "--model", &m, "--tuple", "c0:-20", "(A x)"]);
    assert!(e.stdout.contains("value: true"), "{}", e.stdout);
    let t = tn(&["eval", "--model", &m, "--dict", "a-shift", "--tuple", "c0:-18", "(A' x)"]);
    assert_eq!(t.code, 0, "{}", t.stderr);
    let r = tn(&["rtype", "--model", &m, "--tuple", "c0:3,c1:4", "--r", "1"]);
    assert!(r.stdout.contains("table=[0,inf,inf,inf,0,inf,inf,inf,0]"), "{}", r.stdout);
    let v = tn(&["verify", "indiscern", "--model", &m, "(exists y (and (A y) (= x (S y))))"]);
    assert_eq!(v.code, 0);
    assert!(v.stdout.contains("ok: true"));
    let q = tn(&["verify", "qe", "--model", &m, "(A (S x))"]);
    assert_eq!(q.code, 0, "{}", q.stdout);
    let a = tn(&["ma", "--model", &m, "--k", "1", "(= y (S x))"]);
    assert!(a.stdout.contains("mutually_algebraic: true"));
    // no proper split of one coordinate
    let b = tn(&["ma", "--model", &m, "--k", "0", "(A x)"]);
    assert!(b.stdout.contains("mutually_algebraic: true"));
    let c = tn(&["ma", "--model", &m, "--k", "3", "(and (A x) (A y))"]);
    assert!(c.stdout.contains("mutually_algebraic: false"), "{}", c.stdout);
}

#[test]
fn sat_gates_hidden_access() {
    let dir = tempfile::tempdir().unwrap();
    let m = fragment_file(&dir);
    let f = "(exists y (and (A' y) (= y (S' x))))";
    assert_eq!(tn(&["sat", "--model", &m, "--dict", "swap", "--at", "c0:2", f]).code, 2);
    assert_eq!(tn(&["sat", "--model", &m, "--dict", "swap", "--tuple", "3", "--U", "auto:2", f]).code, 2);
    let o = tn(&["--ground-truth", "sat", "--model", &m, "--dict", "swap", "--at", "c0:2", "--U", "auto:2", f]);
    assert_eq!(o.code, 0, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("U_adequate: true"));
    let plain = tn(&["sat", "--model", &m, "--dict", "swap", "--tuple", "3", f]);
    assert_eq!(plain.code, 0);
    assert!(!plain.stdout.contains("truth"));
}

#[test]
fn tree_levels_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.tree");
    fs::write(&p, "table\n0: -\n1: 0 1\n2: 00 10 11\n").unwrap();
    let o = tn(&["tree", "--tree", p.to_str().unwrap(), "--n", "2"]);
    assert!(o.stdout.contains("members: 3"), "{}", o.stdout);
    let d = tn(&["tree", "--tree", "rule diagonal depth=8 guessers=zeros,ones", "--n", "6"]);
    assert_eq!(d.code, 0, "{}", d.stderr);
    assert!(!d.stdout.contains("000000\n"));
}

#[test]
fn guess_and_warmup_with_ground_truth() {
    let g = tn(&["--ground-truth", "guess", "--dict", "a-shift", "--n", "8"]);
    assert_eq!(g.code, 0, "{}", g.stdout);
    assert!(g.stdout.contains("hit: true"));
    let blind = tn(&["guess", "--dict", "a-shift", "--n", "8"]);
    assert_eq!(blind.code, 0);
    assert!(!blind.stdout.contains("hit:"));
    let starved = tn(&["--ground-truth", "guess", "--dict", "swap", "--n", "8", "--fuel", "5"]);
    assert_eq!(starved.code, 1);
    let w = tn(&["--ground-truth", "warmup", "--dict", "identity", "--n", "16"]);
    assert!(w.stdout.contains("match: true"), "{}", w.stdout);
}

#[test]
fn logs_and_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("calls.log");
    let rep = dir.path().join("r.json");
    let o = tn(&[
        "--json",
        "--report",
        rep.to_str().unwrap(),
        "warmup",
        "--dict",
        "swap",
        "--n",
        "4",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0);
    assert_eq!(fs::read_to_string(&rep).unwrap(), o.stdout);
    let entries = defeq::oracle_log::parse_log(&fs::read_to_string(&log).unwrap()).unwrap();
    assert!(entries.len() > 10);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["--json", "--seed", "9", "guess", "--dict", "swap", "--n", "16", "--psi", "adversarial"];
    assert_eq!(tn(&args), tn(&args));
    let other = tn(&["--json", "--seed", "10", "guess", "--dict", "swap", "--n", "16", "--psi", "adversarial"]);
    assert_ne!(tn(&args).stdout, other.stdout);
}
