//! Runs depend on the structure behind the oracle, not on how its
//! elements are labelled.

use defeq::harness::{pipeline_fragment, sat_radius_of, witness_kit, PIPELINE_MARGIN};
use defeq::oracle_log::{replay, LoggingOracle};
use defeq_core::formula::builtin;
use defeq_core::guessing::{guess_a, Fuel, SuccessorApprox};
use defeq_core::model::{Handle, OracleModel, Window};
use defeq_core::satisfaction::{warmup_compute_a, SatContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair(dict: &str, s1: u64, s2: u64) -> (OracleModel, OracleModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let path: Vec<bool> = (0..40).map(|_| rng.gen_bool(0.5)).collect();
    let m = pipeline_fragment(&mut rng, &path);
    let w = Window::interior(&m, PIPELINE_MARGIN);
    let d = builtin::by_name(dict).unwrap();
    (OracleModel::new(m.clone(), d.clone(), w.clone(), s1).unwrap(), OracleModel::new(m, d, w, s2).unwrap())
}

fn relabel<'a>(o1: &'a OracleModel, o2: &'a OracleModel) -> impl Fn(Handle) -> Handle + 'a {
    move |h| o2.hidden().handle(o1.hidden().element(h).unwrap()).unwrap()
}

#[test]
fn warmup_log_replays_under_relabelling() {
    for dict in ["identity", "swap", "a-shift"] {
        let (o1, o2) = pair(dict, 11, 12);
        let d = o1.dictionary();
        let phi_a = sat_radius_of(&o1, &d.phi_label().unwrap()).unwrap();
        let lo = LoggingOracle::new(&o1);
        let ctx = SatContext::new(&lo, witness_kit(&o1, &[phi_a.kit_shape()]).unwrap());
        let bits = warmup_compute_a(&ctx, &d.phi_zero().unwrap(), &d.phi_succ().unwrap(), &phi_a, 12).unwrap();

        let map = relabel(&o1, &o2);
        let out = replay(&o2, &lo.entries(), &lo.formulas(), &map).unwrap();
        assert!(out.evals > 0);
        assert_eq!(out.mismatches, 0, "{dict}");

        // the run on the relabelled oracle reads the same bits
        let phi_a2 = sat_radius_of(&o2, &d.phi_label().unwrap()).unwrap();
        let ctx2 = SatContext::new(&o2, witness_kit(&o2, &[phi_a2.kit_shape()]).unwrap());
        let bits2 = warmup_compute_a(&ctx2, &d.phi_zero().unwrap(), &d.phi_succ().unwrap(), &phi_a2, 12).unwrap();
        assert_eq!(bits, bits2);
    }
}

#[test]
fn guessing_log_replays_under_relabelling() {
    let (o1, o2) = pair("a-shift", 3, 4);
    let d = o1.dictionary();
    let psi = d.phi_succ().unwrap();
    let sa = SuccessorApprox::build(&o1, &psi, 2).unwrap();
    let phi_s = sat_radius_of(&o1, &psi).unwrap();
    let phi_a = sat_radius_of(&o1, &d.phi_label().unwrap()).unwrap();
    let phi_0 = sat_radius_of(&o1, &d.phi_zero().unwrap()).unwrap();
    let kit = witness_kit(&o1, &[phi_s.kit_shape(), phi_a.kit_shape(), phi_0.kit_shape()]).unwrap();
    let lo = LoggingOracle::new(&o1);
    let ctx = SatContext::new(&lo, kit);
    let batch = guess_a(&ctx, &sa, &phi_s, &phi_a, &phi_0, 6, &mut Fuel::unlimited()).unwrap();
    assert!(!batch.guesses.is_empty());
    let out = replay(&o2, &lo.entries(), &lo.formulas(), &relabel(&o1, &o2)).unwrap();
    assert!(out.evals > 100);
    assert_eq!(out.mismatches, 0);
    // without relabelling the answers differ
    let raw = replay(&o2, &lo.entries(), &lo.formulas(), &|h| h).unwrap();
    assert!(raw.mismatches > 0);
}
