use std::path::PathBuf;

use defeq::cli::run;
use defeq::io::{load_dictionary, load_fragment, load_tree};
use defeq_core::model::{check_dictionary, Window};

fn sample(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "samples", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn tn(args: &[&str]) -> defeq::cli::Outcome {
    run(std::iter::once("defeq").chain(args.iter().copied()))
}

#[test]
fn sample_files_load() {
    let m = load_fragment(&sample("banded.frag")).unwrap();
    assert_eq!(m.chains().len(), 2);
    let d = load_dictionary(&sample("swap-shift.dict")).unwrap();
    check_dictionary(&m, &d, &Window::interior(&m, 4)).unwrap();
    assert_eq!(load_tree(&sample("small.tree")).unwrap().level(4).unwrap().len(), 8);
    assert!(load_tree(&sample("diagonal.tree")).unwrap().level(40).is_ok());
}

#[test]
fn file_dictionary_drives_the_pipeline() {
    let d = sample("swap-shift.dict");
    let w = tn(&["--ground-truth", "warmup", "--dict", &d, "--n", "16"]);
    assert!(w.stdout.contains("match: true"), "{}{}", w.stdout, w.stderr);
    let t = sample("small.tree");
    let g = tn(&["--ground-truth", "guess", "--dict", &d, "--tree", &t, "--n", "8"]);
    assert_eq!(g.code, 0, "{}{}", g.stdout, g.stderr);
    assert!(g.stdout.contains("truth_in_tree: true"));
}

#[test]
fn sample_fragment_with_builtin_dictionary() {
    let m = sample("banded.frag");
    let o = tn(&["--ground-truth", "warmup", "--model", &m, "--dict", "a-shift", "--n", "32"]);
    assert!(o.stdout.contains("match: true"), "{}{}", o.stdout, o.stderr);
}
