//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use defeq::harness::{
    guessing_suite, indiscern_suite, ma_suite, qe_suite, satisfaction_suite, warmup_suite, SuiteResult,
};

const SEED: u64 = 20_241;

struct Line {
    ok: bool,
    text: String,
}

fn suite(label: &str, min: usize, limit: Option<Duration>, f: impl FnOnce() -> SuiteResult) -> Line {
    let t = Instant::now();
    let r = f();
    let took = t.elapsed();
    let in_time = limit.is_none_or(|l| took <= l);
    let ok = r.passed(min) && in_time;
    let mut text = format!(
        "{} {label}: cases={} (need {min}) failures={} time={:.1}s",
        if ok { "PASS" } else { "FAIL" },
        r.cases,
        r.failures,
        took.as_secs_f64()
    );
    for n in &r.notes {
        text.push_str(&format!("\n    {n}"));
    }
    Line { ok, text }
}

fn determinism() -> Line {
    let runs = |seed: &str| {
        [
            vec!["--json", "--seed", seed, "--ground-truth", "guess", "--dict", "a-shift", "--n", "16"],
            vec!["--json", "--seed", seed, "--ground-truth", "warmup", "--dict", "swap", "--n", "32"],
            vec!["--json", "--seed", seed, "--ground-truth", "demo-pipeline", "--dict", "identity", "--n", "4,8"],
            vec!["--seed", seed, "guess", "--dict", "swap", "--psi", "adversarial", "--n", "8"],
        ]
        .iter()
        .map(|a| defeq::cli::run(std::iter::once("defeq").chain(a.iter().copied())).stdout)
        .collect::<Vec<_>>()
    };
    let a = runs("5");
    let b = runs("5");
    let suites_same = indiscern_suite(3, 40).ok() == indiscern_suite(3, 40).ok()
        && satisfaction_suite(3, 6, 3).ok() == satisfaction_suite(3, 6, 3).ok();
    let ok = a == b && a.iter().all(|s| !s.is_empty()) && suites_same;
    Line {
        ok,
        text: format!(
            "{} determinism: {} reports byte-identical across two runs, suite summaries identical: {suites_same}",
            if ok { "PASS" } else { "FAIL" },
            a.iter().zip(&b).filter(|(x, y)| x == y).count()
        ),
    }
}

fn main() {
    let lines = vec![
        suite("indiscernability", 1000, Some(Duration::from_secs(300)), || indiscern_suite(SEED, 1200).unwrap()),
        suite("qe soundness", 200, None, || qe_suite(SEED, 250).unwrap()),
        suite("satisfaction", 500, None, || satisfaction_suite(SEED, 150, 5).unwrap()),
        suite("warm-up", 15, None, || warmup_suite(SEED, &[0, 4, 8, 16, 32]).unwrap()),
        suite("guessing pipeline", 36, None, || guessing_suite(SEED, &[4, 8, 16, 32]).unwrap()),
        suite("mutual algebraicity", 380, None, || ma_suite(SEED, 320, 60).unwrap()),
        determinism(),
    ];
    let mut failed = 0;
    for l in &lines {
        println!("{}", l.text);
        failed += usize::from(!l.ok);
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
