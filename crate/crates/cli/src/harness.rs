//! Runs of the algorithms against generated structures, with optional
//! comparison against the hidden fragment, and the randomized suites.

use defeq_core::formula::{builtin, radius, radius_in, DefDictionary, Formula};
use defeq_core::guessing::{adversarial_psi, guess_a, Constants, Fuel, SuccessorApprox};
use defeq_core::indiscern::{check_indiscernability, check_qe, deep_elements, IndiscernConfig};
use defeq_core::ma::{fragment_resolver, is_mutually_algebraic, qe1_construct, satisfying_tuples, MaVerdict};
use defeq_core::model::{
    eval_windowed, Assignment, Element, Handle, Hidden, ModelFragment, OracleModel, SignedDistance, Window,
};
use defeq_core::satisfaction::{
    build_witness_kit, sat_existential, sat_general, satisfaction_radius, warmup_compute_a, SatContext, SatRadius,
    WitnessKit,
};
use defeq_core::tree::{builtin_guesser, diagonal_tree, BinaryTree};
use defeq_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::gen::{banded_fragment, random_dnf, random_formula, random_period, FormulaSpec, FragmentSpec, Vocabulary};
use crate::io::show_bits;
use crate::oracle_log::LoggingOracle;
use crate::report::Report;

pub fn case_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Handles of the `r`-neighbourhoods of the given handles, sorted.
pub fn nbhd_handles(h: &Hidden<'_>, hs: &[Handle], r: u64) -> Vec<Handle> {
    let mut out: Vec<Handle> = hs
        .iter()
        .filter_map(|&x| h.element(x))
        .flat_map(|e| (-(r as i64)..=r as i64).map(move |d| e.offset(d)))
        .filter_map(|e| h.handle(e))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// True when `U` holds the `r`-neighbourhood of every argument.
pub fn u_is_adequate(h: &Hidden<'_>, args: &[Handle], u: &[Handle], r: u64) -> bool {
    args.iter().all(|&a| {
        let Some(e) = h.element(a) else { return false };
        (-(r as i64)..=r as i64).all(|d| h.handle(e.offset(d)).is_some_and(|x| u.binary_search(&x).is_ok()))
    })
}

pub fn sat_radius_of(o: &OracleModel, f: &Formula) -> Result<SatRadius, Error> {
    let h = o.hidden();
    satisfaction_radius(f, h.fragment(), o.dictionary(), h.domain(), &|x| h.element(x))
}

/// Witness kit covering every shape, in handles.
pub fn witness_kit(o: &OracleModel, shapes: &[(u64, usize, usize)]) -> Result<WitnessKit<Handle>, Error> {
    let r = shapes.iter().map(|s| s.0).max().unwrap_or(0);
    let n = shapes.iter().map(|s| s.1).max().unwrap_or(0);
    let m = shapes.iter().map(|s| s.2).max().unwrap_or(0);
    let h = o.hidden();
    build_witness_kit(h.fragment(), h.domain(), r, n, m)?.to_handles(&h)
}

pub fn kit_context<'a>(
    o: &'a OracleModel,
    shapes: &[(u64, usize, usize)],
) -> Result<SatContext<'a, OracleModel>, Error> {
    Ok(SatContext::new(o, witness_kit(o, shapes)?))
}

#[derive(Clone, Debug)]
pub enum PsiChoice {
    /// The successor graph formula itself.
    Graph,
    Adversarial,
    Given(Formula),
}

#[derive(Clone, Debug)]
pub struct GuessConfig {
    pub n: usize,
    pub fuel: Option<u64>,
    pub psi: PsiChoice,
    /// Bound handed to the mutual-algebraicity check of `ψ`.
    pub k: usize,
    /// Overrides the computed guessing constant.
    pub c: Option<u64>,
    pub seed: u64,
}

/// Runs the path guesser at level `n`. Budget checks are always made; the
/// hit, alg1 distance and tree checks need `ground_truth`.
pub fn guess_report(
    o: &OracleModel,
    cfg: &GuessConfig,
    ground_truth: bool,
    tree: Option<&BinaryTree>,
) -> Result<(Report, bool), Error> {
    guess_report_logged(o, cfg, ground_truth, tree, false).map(|(r, ok, _)| (r, ok))
}

/// As [`guess_report`], optionally recording the oracle calls of the
/// guessing run (the setup of `ψ` and the satisfaction radii is harness
/// work and is not logged).
pub fn guess_report_logged(
    o: &OracleModel,
    cfg: &GuessConfig,
    ground_truth: bool,
    tree: Option<&BinaryTree>,
    log: bool,
) -> Result<(Report, bool, Option<String>), Error> {
    let d = o.dictionary();
    let psi = match &cfg.psi {
        PsiChoice::Graph => d.phi_succ()?,
        PsiChoice::Adversarial => adversarial_psi(d)?,
        PsiChoice::Given(f) => f.clone(),
    };
    let sa = SuccessorApprox::build(o, &psi, cfg.k)?;
    let phi_s = sat_radius_of(o, &d.phi_succ()?)?;
    let phi_a = sat_radius_of(o, &d.phi_label()?)?;
    let phi_0 = sat_radius_of(o, &d.phi_zero()?)?;
    let kit = witness_kit(o, &[phi_s.kit_shape(), phi_a.kit_shape(), phi_0.kit_shape()])?;
    let mut fuel = cfg.fuel.map_or_else(Fuel::unlimited, Fuel::limited);
    let (batch, evals, log_text) = if log {
        let lo = LoggingOracle::new(o);
        let ctx = SatContext::new(&lo, kit);
        let b = guess_a(&ctx, &sa, &phi_s, &phi_a, &phi_0, cfg.n, &mut fuel)?;
        (b, ctx.evals(), Some(lo.render()))
    } else {
        let ctx = SatContext::new(o, kit);
        let b = guess_a(&ctx, &sa, &phi_s, &phi_a, &phi_0, cfg.n, &mut fuel)?;
        (b, ctx.evals(), None)
    };
    let k = batch.constants;
    let constants = Constants { c: cfg.c.unwrap_or(k.c), ..k };
    let n = cfg.n;
    let big_n = k.big_n(n);
    let bound = k.r1 * (2 * big_n + 1).pow(2);
    let inner_n = k.inner_n(n);
    let inner_bound = k.r1 * (2 * inner_n + 1).pow(2);
    let c_budget = constants.c * (n.max(1) as u64).pow(2);
    let count = batch.pre_dedup as u64;
    let budget_ok = count <= bound && count <= inner_bound && count <= c_budget;
    let mut r = Report::new("guess");
    r.push("dictionary", &d.name)
        .push("seed", cfg.seed)
        .push("fuel", cfg.fuel.map_or("unlimited".to_string(), |f| f.to_string()))
        .push("n", n)
        .push("psi", psi.to_string())
        .push(
            "constants",
            json!({"r1": k.r1, "r2": k.r2, "r_A": k.r_a, "C": constants.c, "N": big_n, "N_inner": inner_n}),
        )
        .push("exceptions", sa.exceptions.len())
        .push("zero_handle", batch.zero)
        .push("neighbourhood_guesses", batch.nbhd.guesses.len())
        .push("complete", batch.nbhd.complete)
        .push("fuel_spent", batch.nbhd.fuel_spent)
        .push("sat_evals", evals)
        .push("pre_dedup_count", count)
        .push("distinct_guesses", batch.guesses.len())
        .push("bound_r1_2N1_sq", bound)
        .push("bound_inner", inner_bound)
        .push("bound_C_n_sq", c_budget)
        .push("budget_ok", budget_ok)
        .push("guesses", batch.guesses.iter().map(|g| show_bits(g)).collect::<Vec<_>>());
    let mut ok = budget_ok && batch.nbhd.complete;
    if ground_truth {
        let h = o.hidden();
        let truth = h.fragment().extract_path(n)?[..n].to_vec();
        let hit = batch.guesses.contains(&truth);
        let far: usize = batch
            .nbhd
            .alg1_log
            .iter()
            .map(|res| {
                res.succ
                    .iter()
                    .chain(&res.pred)
                    .filter(|&&b| h.distance(res.source, b).and_then(|d| d.within(sa.r)).is_none())
                    .count()
            })
            .sum();
        r.push("truth", show_bits(&truth)).push("hit", hit).push("alg1_far_candidates", far);
        ok &= hit && far == 0;
        if let Some(t) = tree {
            let member = t.contains(&truth);
            r.push("tree", t.label()).push("truth_in_tree", member);
            ok &= member;
        }
    }
    r.push("ok", ok);
    Ok((r, ok, log_text))
}

/// Reads `A(0..=n)` by the oracle-only warm-up walk.
pub fn warmup_report(o: &OracleModel, n: usize, seed: u64, ground_truth: bool) -> Result<(Report, bool), Error> {
    warmup_report_logged(o, n, seed, ground_truth, false).map(|(r, ok, _)| (r, ok))
}

pub fn warmup_report_logged(
    o: &OracleModel,
    n: usize,
    seed: u64,
    ground_truth: bool,
    log: bool,
) -> Result<(Report, bool, Option<String>), Error> {
    let d = o.dictionary();
    let phi_a = sat_radius_of(o, &d.phi_label()?)?;
    let kit = witness_kit(o, &[phi_a.kit_shape()])?;
    let (phi_0, phi_s) = (d.phi_zero()?, d.phi_succ()?);
    let (bits, evals, log_text) = if log {
        let lo = LoggingOracle::new(o);
        let ctx = SatContext::new(&lo, kit);
        let b = warmup_compute_a(&ctx, &phi_0, &phi_s, &phi_a, n)?;
        (b, ctx.evals(), Some(lo.render()))
    } else {
        let ctx = SatContext::new(o, kit);
        let b = warmup_compute_a(&ctx, &phi_0, &phi_s, &phi_a, n)?;
        (b, ctx.evals(), None)
    };
    let mut r = Report::new("warmup");
    r.push("dictionary", &d.name)
        .push("seed", seed)
        .push("n", n)
        .push("r_A", phi_a.value)
        .push("oracle_evals", evals)
        .push("bits", show_bits(&bits));
    let mut ok = true;
    if ground_truth {
        let truth = o.hidden().fragment().extract_path(n)?;
        ok = truth == bits;
        r.push("truth", show_bits(&truth)).push("match", ok);
    }
    r.push("ok", ok);
    Ok((r, ok, log_text))
}

/// A fragment whose zero chain carries `path` from position 0, flanked by
/// random labels and periodic bands, with one fully periodic extra chain.
pub fn pipeline_fragment(rng: &mut impl Rng, path: &[bool]) -> ModelFragment {
    let spec = FragmentSpec {
        lens: vec![129, 97],
        band: 14,
        period: vec![true, false],
        path: Some(path.to_vec()),
        periodic_extra: true,
    };
    banded_fragment(rng, &spec)
}

pub const PIPELINE_MARGIN: u64 = 8;

pub fn pipeline_oracle(d: &DefDictionary, path: &[bool], seed: u64) -> Result<OracleModel, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = pipeline_fragment(&mut rng, path);
    let w = Window::interior(&m, PIPELINE_MARGIN);
    Ok(OracleModel::new(m, d.clone(), w, seed)?)
}

pub fn diagonal_default(depth: usize) -> Result<BinaryTree, Error> {
    let gs: Vec<_> = ["zeros", "ones", "alternating", "sparse"].iter().filter_map(|g| builtin_guesser(g)).collect();
    diagonal_tree(&gs, depth)
}

/// One report line per `n`, for a tree and dictionary.
pub fn demo_pipeline(
    d: &DefDictionary,
    tree: &BinaryTree,
    ns: &[usize],
    seed: u64,
    fuel: Option<u64>,
    psi: PsiChoice,
) -> Result<(Report, bool), Error> {
    let depth = ns.iter().copied().max().unwrap_or(0) + 8;
    let path = tree.leftmost_path(depth);
    let o = pipeline_oracle(d, &path, seed)?;
    let mut r = Report::new("demo-pipeline");
    r.push("dictionary", &d.name).push("tree", tree.label()).push("seed", seed).push("path", show_bits(&path));
    let mut ok = true;
    let mut rows = Vec::new();
    for &n in ns {
        let cfg = GuessConfig { n, fuel, psi: psi.clone(), k: 2, c: None, seed };
        let (g, good) = guess_report(&o, &cfg, true, Some(tree))?;
        ok &= good;
        let pick = |k: &str| g.get(k).cloned().unwrap_or_default();
        rows.push(json!({
            "n": n,
            "constants": pick("constants"),
            "pre_dedup_count": pick("pre_dedup_count"),
            "distinct_guesses": pick("distinct_guesses"),
            "bound_r1_2N1_sq": pick("bound_r1_2N1_sq"),
            "budget_ok": pick("budget_ok"),
            "hit": pick("hit"),
            "alg1_far_candidates": pick("alg1_far_candidates"),
            "truth_in_tree": pick("truth_in_tree"),
        }));
    }
    r.push("runs", rows).push("ok", ok);
    Ok((r, ok))
}

/// Outcome of a randomized suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub notes: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult { name: name.into(), cases: 0, failures: 0, notes: Vec::new() }
    }

    pub fn passed(&self, min_cases: usize) -> bool {
        self.failures == 0 && self.cases >= min_cases
    }

    fn fail(&mut self, note: String) {
        self.failures += 1;
        if self.notes.len() < 20 {
            self.notes.push(note);
        }
    }
}

pub fn fragment_for(rng: &mut ChaCha8Rng, chains: usize, len: (usize, usize), r: u64) -> ModelFragment {
    let period = random_period(rng);
    let band = 3 * r as usize + 2 + 2 * period.len();
    let lens = (0..chains).map(|_| rng.gen_range(len.0..=len.1).max(2 * band + 5)).collect();
    banded_fragment(rng, &FragmentSpec { lens, band, period, path: None, periodic_extra: false })
}

/// Same-type deep tuples agree on random prenex formulas.
pub fn indiscern_suite(seed: u64, cases: usize) -> Result<SuiteResult, Error> {
    let mut out = SuiteResult::new("indiscernability");
    let mut warnings = 0;
    let mut pairs = 0u64;
    for i in 0..cases {
        let mut rng = case_rng(seed, i);
        let q = i % 3;
        let arity = rng.gen_range(0..=2usize).max(usize::from(q == 0));
        let steps = rng.gen_range(0..=(8usize >> q));
        let atoms = rng.gen_range(1..=3);
        let free: Vec<String> = ["x", "y"][..arity].iter().map(|s| s.to_string()).collect();
        let f = random_formula(
            &mut rng,
            &Vocabulary::base(),
            &FormulaSpec { free, quantifiers: q, universal: true, steps, atoms },
        );
        let r = radius(&f)?;
        let chains = rng.gen_range(1..=if q == 0 { 3 } else { 2 });
        let len = [(33, 129), (33, 129), (33, 97)][q];
        let m = fragment_for(&mut rng, chains, len, r);
        let w = Window::interior(&m, r);
        let cfg =
            IndiscernConfig { max_pairs: 10_000, max_tuples: if q == 2 { 400 } else { 2000 }, seed: seed ^ i as u64 };
        let rep = check_indiscernability(&m, &f, &w, &cfg)?;
        out.cases += 1;
        pairs += rep.pairs_checked;
        warnings += usize::from(!rep.warnings.is_empty());
        if !rep.ok() {
            let v = &rep.violations[0];
            out.fail(format!("case {i}: {f} at {:?} vs {:?}", v.left, v.right));
        }
    }
    out.notes.insert(0, format!("pairs checked {pairs}, cases with window warnings {warnings}"));
    Ok(out)
}

/// The r-type normal form agrees with direct evaluation.
pub fn qe_suite(seed: u64, cases: usize) -> Result<SuiteResult, Error> {
    let mut out = SuiteResult::new("qe soundness");
    for i in 0..cases {
        let mut rng = case_rng(seed.wrapping_add(1), i);
        let arity = if i % 4 == 3 { 2 } else { 1 };
        let q = rng.gen_range(0..=1usize);
        let steps = if arity == 2 { 1 } else { rng.gen_range(0..=2) };
        let atoms = rng.gen_range(1..=3);
        let free: Vec<String> = ["x", "y"][..arity].iter().map(|s| s.to_string()).collect();
        let f = random_formula(
            &mut rng,
            &Vocabulary::base(),
            &FormulaSpec { free, quantifiers: q, universal: true, steps, atoms },
        );
        let r = radius(&f)?;
        let len = if arity == 2 { (31, 41) } else { (41, 97) };
        let m = fragment_for(&mut rng, 1, len, r);
        let rep = check_qe(&m, &f, &Window::interior(&m, r))?;
        out.cases += 1;
        if rep.disagreements > 0 {
            out.fail(format!("case {i}: {f}: {} of {} tuples disagree", rep.disagreements, rep.checked));
        }
    }
    Ok(out)
}

pub const SAT_DICTS: [&str; 3] = ["identity", "swap", "a-shift"];

/// Satisfaction against ground truth. Cases whose witness kit falls short
/// of its quota are counted separately; for those only the absence of
/// false positives from `sat_existential` is required.
pub fn satisfaction_suite(seed: u64, formulas: usize, tuples_per: usize) -> Result<SuiteResult, Error> {
    let mut out = SuiteResult::new("satisfaction");
    let mut inadequate_kit = 0;
    let mut false_pos_checks = 0;
    for i in 0..formulas {
        let mut rng = case_rng(seed.wrapping_add(2), i);
        let d = builtin::by_name(SAT_DICTS[i % 3]).expect("builtin");
        let spec = FragmentSpec {
            lens: vec![129, 129, 129],
            band: 40,
            period: vec![true, false],
            path: None,
            periodic_extra: true,
        };
        let m = banded_fragment(&mut rng, &spec);
        let w = Window::interior(&m, 12);
        let o = OracleModel::new(m, d.clone(), w, seed ^ i as u64)?;
        let h = o.hidden();
        let general = i % 2 == 1;
        let spec = FormulaSpec {
            free: vec!["x".into()],
            quantifiers: rng.gen_range(0..=if general { 1 } else { 2 }),
            universal: general,
            steps: rng.gen_range(0..=1),
            atoms: rng.gen_range(1..=2),
        };
        let f = random_formula(&mut rng, &Vocabulary::primed(), &spec);
        let vars = f.free_var_list();
        let (sr, r) = if general {
            let sr = sat_radius_of(&o, &f)?;
            let r = sr.value.max(sr.type_radius);
            (Some(sr), r)
        } else {
            (None, radius_in(&f, &d)?)
        };
        let shape = match &sr {
            Some(s) => s.kit_shape(),
            None => (r, vars.len(), f.quantifier_count()),
        };
        let ctx = kit_context(&o, &[shape])?;
        let kit_ok = ctx.kit.is_adequate();
        let deep: Vec<Element> = deep_elements(h.fragment(), h.domain(), r);
        for t in 0..tuples_per {
            let tuple: Vec<Handle> = if vars.is_empty() {
                Vec::new()
            } else {
                let e = deep[(t * 7919 + rng.gen_range(0..deep.len())) % deep.len()];
                vec![h.handle(e).expect("domain element")]
            };
            let truth = h.truth(&f, &vars, &tuple)?;
            let u = nbhd_handles(&h, &tuple, r);
            debug_assert!(u_is_adequate(&h, &tuple, &u, r));
            let got = match &sr {
                Some(s) => sat_general(&ctx, s, &tuple, &u, &[])?,
                None => sat_existential(&ctx, &f, &tuple, &u)?,
            };
            if kit_ok {
                out.cases += 1;
                if got != truth {
                    out.fail(format!("formula {i} ({}) {f} at {tuple:?}: got {got}, truth {truth}", d.name));
                }
            } else {
                inadequate_kit += 1;
            }
            // inadequate U: only the tuple itself
            let tiny = match &sr {
                Some(s) => sat_general(&ctx, s, &tuple, &tuple, &[])?,
                None => sat_existential(&ctx, &f, &tuple, &tuple)?,
            };
            false_pos_checks += 2;
            if (tiny || got) && !truth {
                out.fail(format!("false positive for {f} at {tuple:?} (tiny U {tiny}, adequate U {got})"));
            }
        }
    }
    out.notes.insert(
        0,
        format!("cases with a short witness kit {inadequate_kit}, false-positive checks {false_pos_checks}"),
    );
    Ok(out)
}

/// The oracle-only warm-up reproduces the path for every dictionary with
/// quantifier-free successor.
pub fn warmup_suite(seed: u64, ns: &[usize]) -> Result<SuiteResult, Error> {
    let mut out = SuiteResult::new("warm-up");
    for (di, name) in SAT_DICTS.iter().enumerate() {
        let d = builtin::by_name(name).expect("builtin");
        let mut rng = case_rng(seed.wrapping_add(3), di);
        let path: Vec<bool> = (0..40).map(|_| rng.gen_bool(0.5)).collect();
        let o = pipeline_oracle(&d, &path, seed ^ di as u64)?;
        for &n in ns {
            let (_, ok) = warmup_report(&o, n, seed, true)?;
            out.cases += 1;
            if !ok {
                out.fail(format!("{name} n={n}"));
            }
        }
    }
    let rel = builtin::rel23();
    out.notes.push(format!("{} skipped: successor definition has a quantifier ({})", rel.name, rel.phi_succ()?));
    Ok(out)
}

pub fn pipeline_trees(seed: u64) -> Result<Vec<BinaryTree>, Error> {
    let mut rng = case_rng(seed.wrapping_add(4), 0);
    let single: Vec<bool> = (0..48).map(|_| rng.gen_bool(0.5)).collect();
    Ok(vec![BinaryTree::single_path(single), BinaryTree::periodic(vec![true, true, false])?, diagonal_default(48)?])
}

/// Every dictionary and tree at every `n`: hit, budget and alg1 distance.
pub fn guessing_suite(seed: u64, ns: &[usize]) -> Result<SuiteResult, Error> {
    let mut out = SuiteResult::new("guessing pipeline");
    let trees = pipeline_trees(seed)?;
    for name in SAT_DICTS {
        let d = builtin::by_name(name).expect("builtin");
        for t in &trees {
            let (rep, ok) = demo_pipeline(&d, t, ns, seed, None, PsiChoice::Graph)?;
            out.cases += ns.len();
            if !ok {
                out.fail(format!("{name} / {}: {}", t.label(), rep.text()));
            }
        }
        let (rep, ok) = demo_pipeline(&d, &trees[2], &[4, 8], seed, None, PsiChoice::Adversarial)?;
        out.cases += 2;
        if !ok {
            out.fail(format!("{name} adversarial: {}", rep.text()));
        }
    }
    Ok(out)
}

/// Independent double loop: for every split of the coordinates and every
/// value of the fixed part, count completions by direct evaluation.
pub fn ma_brute_force(m: &ModelFragment, f: &Formula, w: &Window, k: usize) -> Result<(bool, usize), Error> {
    let vars = f.free_var_list();
    let n = vars.len();
    let resolve = fragment_resolver(m);
    let holds = |vals: &[Element]| -> Result<bool, Error> {
        let mut asg = Assignment::new();
        for (v, &e) in vars.iter().zip(vals) {
            asg = asg.bind(v, e);
        }
        for hd in f.handles() {
            asg = asg.handle(hd, resolve(hd).ok_or(defeq_core::ModelError::UnknownHandle(hd))?);
        }
        Ok(eval_windowed(m, f, &asg, w)?)
    };
    let elems = w.elements();
    let mut worst = 0;
    if n >= 2 {
        for mask in 1..(1usize << n) - 1 {
            let fixed: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let free: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
            let outer = elems.len().pow(fixed.len() as u32);
            let inner = elems.len().pow(free.len() as u32);
            for a in 0..outer {
                let mut count = 0;
                for b in 0..inner {
                    let mut vals = vec![elems[0]; n];
                    let (mut x, mut y) = (a, b);
                    for &i in &fixed {
                        vals[i] = elems[x % elems.len()];
                        x /= elems.len();
                    }
                    for &i in &free {
                        vals[i] = elems[y % elems.len()];
                        y /= elems.len();
                    }
                    if holds(&vals)? {
                        count += 1;
                    }
                }
                worst = worst.max(count);
            }
        }
    }
    Ok((worst <= k, worst))
}

/// Mutual algebraicity against the brute-force oracle, and the qe1
/// construction's self-checks.
pub fn ma_suite(seed: u64, cases: usize, qe1_cases: usize) -> Result<SuiteResult, Error> {
    let mut out = SuiteResult::new("mutual algebraicity");
    let mut yes = 0;
    for i in 0..cases {
        let mut rng = case_rng(seed.wrapping_add(5), i);
        let arity = if i % 3 == 2 { 3 } else { 2 };
        let q = usize::from(arity == 2 && rng.gen_ratio(1, 3));
        let free: Vec<String> = ["x", "y", "z"][..arity].iter().map(|s| s.to_string()).collect();
        let spec =
            FormulaSpec { free: free.clone(), quantifiers: q, universal: false, steps: 2, atoms: rng.gen_range(2..=3) };
        let mut f = random_formula(&mut rng, &Vocabulary::base(), &spec);
        // make sure every coordinate is present
        for v in &free {
            if !f.free_vars().contains(v) {
                f = Formula::and(f, Formula::eq(defeq_core::formula::Term::var(v), defeq_core::formula::Term::var(v)));
            }
        }
        let len = if arity == 3 { rng.gen_range(10..=14) } else { rng.gen_range(16..=24) };
        let m = fragment_for(&mut rng, 1, (len, len), 2);
        let w = Window::interior(&m, 4);
        let w = Window::from_elements(&m, w.elements().iter().copied().take(if arity == 3 { 12 } else { 24 }))?;
        let k = rng.gen_range(0..=4);
        let fast = is_mutually_algebraic(&m, &f, &w, k, &|_| None)?;
        let (slow_yes, worst) = ma_brute_force(&m, &f, &w, k)?;
        out.cases += 1;
        let agree = match &fast {
            MaVerdict::Yes(wit) => slow_yes && wit.k == worst,
            MaVerdict::No(c) => !slow_yes && c.completions.len() == worst,
        };
        yes += usize::from(fast.is_yes());
        if !agree {
            out.fail(format!("case {i}: {f} k={k}: {fast:?} vs brute force ({slow_yes}, {worst})"));
        }
    }
    let mut qe1_ok = 0;
    for i in 0..qe1_cases {
        let mut rng = case_rng(seed.wrapping_add(6), i);
        let arity = rng.gen_range(1..=3usize);
        let vars: Vec<String> = ["x", "y", "z"][..arity].iter().map(|s| s.to_string()).collect();
        let k = rng.gen_range(1..=3);
        let dnf = random_dnf(&mut rng, &vars, k);
        let m = fragment_for(&mut rng, 1, (40, 40), 2);
        let w = Window::interior(&m, 4);
        let w = Window::from_elements(
            &m,
            w.elements().iter().copied().filter(|e| e.pos.abs() <= if arity == 3 { 6 } else { 14 }),
        )?;
        let res = qe1_construct(&m, &dnf, &w, 2)?;
        out.cases += 1;
        if res.ok() {
            qe1_ok += 1;
        } else {
            out.fail(format!(
                "qe1 case {i}: implication {}, bound {} budget {}",
                res.implication_holds, res.gamma_bound, res.budget
            ));
        }
    }
    out.notes.insert(0, format!("MA verdicts yes: {yes}; qe1 instances passing self-checks: {qe1_ok}"));
    Ok(out)
}

/// The MA verdict on a window agrees with the verdict on a larger one.
pub fn ma_stability(m: &ModelFragment, f: &Formula, small: &Window, large: &Window, k: usize) -> Result<bool, Error> {
    defeq_core::ma::ma_stable(m, f, small, large, k, &fragment_resolver(m))
}

/// Pairs of `f` on a window more than `r` apart, for reports.
pub fn far_pairs(m: &ModelFragment, f: &Formula, w: &Window, r: u64) -> Result<usize, Error> {
    let (_, sat) = satisfying_tuples(m, f, w, &fragment_resolver(m))?;
    Ok(sat.iter().filter(|t| t.len() == 2 && SignedDistance::between(t[0], t[1]).within(r).is_none()).count())
}
