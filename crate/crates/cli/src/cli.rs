//! Command-line driver. `run` parses arguments, executes, and returns the
//! exit code with the rendered output so tests can call it in-process.

use clap::{Args, Parser, Subcommand};
use defeq_core::formula::{parse, radius, radius_in, to_prenex, DefDictionary, Direction, Formula, Signature};
use defeq_core::indiscern::{check_indiscernability, check_qe, IndiscernConfig};
use defeq_core::ma::{fragment_resolver, is_mutually_algebraic, MaVerdict};
use defeq_core::model::{eval_windowed, r_type, Assignment, Handle, ModelFragment, OracleModel, Window};
use defeq_core::satisfaction::{sat_existential, sat_general, SatContext};
use defeq_core::tree::{axiom_for_level, BinaryTree};
use defeq_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harness::{
    demo_pipeline, guess_report_logged, nbhd_handles, pipeline_oracle, sat_radius_of, u_is_adequate,
    warmup_report_logged, witness_kit, GuessConfig, PsiChoice, PIPELINE_MARGIN,
};
use crate::io::{
    file_or_inline, load_dictionary, load_fragment, load_tree, parse_elements, parse_handles, show_bits, show_element,
    IoError,
};
use crate::oracle_log::LoggingOracle;
use crate::report::Report;

#[derive(Parser, Debug)]
#[command(
    name = "defeq",
    version,
    about = "Definitional partners of (Z, S, 0, A) and path guessing from oracle access"
)]
pub struct Cli {
    /// Print reports as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Allow checks against the hidden fragment.
    #[arg(long, global = true)]
    pub ground_truth: bool,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub report: Option<String>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Parse a formula and show its prenex form and radius.
    Parse {
        formula: String,
        /// Parse in the target language of this dictionary.
        #[arg(long)]
        dict: Option<String>,
    },
    /// Translate a formula through a dictionary.
    Translate {
        formula: String,
        #[arg(long)]
        dict: String,
        /// From the target language back to the base language.
        #[arg(long)]
        backward: bool,
    },
    /// Evaluate a formula on a fragment.
    Eval {
        formula: String,
        #[arg(long)]
        model: String,
        /// Elements for the free variables, in sorted variable order.
        #[arg(long, default_value = "")]
        tuple: String,
        /// Read the formula in this dictionary's target language.
        #[arg(long)]
        dict: Option<String>,
    },
    /// Show the r-type of a tuple.
    Rtype {
        #[arg(long)]
        model: String,
        #[arg(long)]
        tuple: String,
        #[arg(long)]
        r: u64,
    },
    /// Check indiscernability or the r-type normal form on a fragment.
    #[command(subcommand)]
    Verify(Verify),
    /// Decide a target-language formula at handles through the oracle.
    Sat(SatArgs),
    /// Mutual algebraicity of a base-language formula on a window.
    Ma {
        formula: String,
        #[arg(long)]
        model: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        margin: u64,
    },
    /// Levels and axioms of a tree.
    Tree {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        n: usize,
        /// Show at most this many members.
        #[arg(long, default_value_t = 32)]
        show: usize,
    },
    /// Guess the first n path bits from oracle access.
    Guess(GuessArgs),
    /// Read the first n+1 path bits by walking successors from zero.
    Warmup {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        log: Option<String>,
    },
    /// Guessing runs over several levels for one tree and dictionary.
    DemoPipeline {
        #[arg(long, default_value = "a-shift")]
        dict: String,
        /// Tree file or inline rule; defaults to a diagonal tree.
        #[arg(long)]
        tree: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        n: Vec<usize>,
        #[arg(long)]
        fuel: Option<u64>,
        #[arg(long)]
        adversarial: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum Verify {
    /// Same-type deep tuples agree on the formula.
    Indiscern {
        formula: String,
        #[arg(long)]
        model: String,
        /// Window margin; defaults to the radius.
        #[arg(long)]
        margin: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        max_pairs: usize,
        #[arg(long, default_value_t = 20_000)]
        max_tuples: usize,
    },
    /// The r-type normal form agrees with the formula on deep tuples.
    Qe {
        formula: String,
        #[arg(long)]
        model: String,
        #[arg(long)]
        margin: Option<u64>,
    },
}

/// Where the oracle's hidden fragment comes from.
#[derive(Args, Debug)]
pub struct Source {
    #[arg(long, default_value = "a-shift")]
    pub dict: String,
    /// Fragment file; otherwise one is generated around a path.
    #[arg(long)]
    pub model: Option<String>,
    /// Generate the fragment around this tree's leftmost path.
    #[arg(long)]
    pub tree: Option<String>,
    /// Oracle domain is the fragment minus this margin.
    #[arg(long, default_value_t = PIPELINE_MARGIN)]
    pub margin: u64,
}

#[derive(Args, Debug)]
pub struct SatArgs {
    pub formula: String,
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value = "a-shift")]
    pub dict: String,
    /// Handles, comma separated.
    #[arg(long, default_value = "")]
    pub tuple: String,
    /// Elements instead of handles (needs --ground-truth).
    #[arg(long)]
    pub at: Option<String>,
    /// Handles, or auto:R for the R-neighbourhood of the tuple (needs --ground-truth).
    #[arg(long = "U", default_value = "")]
    pub u: String,
    #[arg(long, default_value_t = PIPELINE_MARGIN)]
    pub margin: u64,
    #[arg(long)]
    pub log: Option<String>,
}

#[derive(Args, Debug)]
pub struct GuessArgs {
    #[command(flatten)]
    pub src: Source,
    #[arg(long)]
    pub n: usize,
    /// graph, adversarial, or a target-language formula in x, y.
    #[arg(long, default_value = "graph")]
    pub psi: String,
    #[arg(long)]
    pub fuel: Option<u64>,
    /// Override the constant C.
    #[arg(long = "C")]
    pub c: Option<u64>,
    /// Bound for the mutual algebraicity check of psi.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub log: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] Error),
}

impl From<defeq_core::FormulaError> for CliError {
    fn from(e: defeq_core::FormulaError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Core(Error::Formula(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

/// Exit code and the text for stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok((report, ok)) => {
            let out = report.render(cli.json);
            if let Some(path) = &cli.report {
                if let Err(e) = std::fs::write(path, &out) {
                    return Outcome { code: 2, stdout: out, stderr: format!("cannot write {path}: {e}\n") };
                }
            }
            Outcome { code: if ok { 0 } else { 1 }, stdout: out, stderr: String::new() }
        }
        Err(e) => Outcome { code: e.code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn formula_in(arg: &str, sig: &Signature) -> Result<Formula, CliError> {
    Ok(parse(file_or_inline(arg)?.trim(), sig).map_err(Error::from)?)
}

fn write_log(path: &Option<String>, text: Option<String>) -> Result<(), CliError> {
    if let (Some(p), Some(t)) = (path, text) {
        std::fs::write(p, t).map_err(|e| CliError::Usage(format!("cannot write {p}: {e}")))?;
    }
    Ok(())
}

fn need_truth(cli: &Cli, what: &str) -> Result<(), CliError> {
    if cli.ground_truth {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} reads the hidden fragment; pass --ground-truth")))
    }
}

fn oracle_from(src: &Source, seed: u64, min_path: usize) -> Result<(OracleModel, Option<BinaryTree>), CliError> {
    let d = load_dictionary(&src.dict)?;
    let tree = src.tree.as_deref().map(load_tree).transpose()?;
    if let Some(path) = &src.model {
        let m = load_fragment(path)?;
        let w = Window::interior(&m, src.margin);
        return Ok((OracleModel::new(m, d, w, seed).map_err(Error::from)?, tree));
    }
    let path = match &tree {
        Some(t) => t.leftmost_path(min_path.max(40)),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..min_path.max(40)).map(|_| rng.gen_bool(0.5)).collect()
        }
    };
    Ok((pipeline_oracle(&d, &path, seed)?, tree))
}

fn execute(cli: &Cli) -> Result<(Report, bool), CliError> {
    match &cli.cmd {
        Cmd::Parse { formula, dict } => {
            let d = dict.as_deref().map(load_dictionary).transpose()?;
            let sig = d.as_ref().map_or_else(Signature::base, |d| d.target.clone());
            let f = formula_in(formula, &sig)?;
            let p = to_prenex(&f);
            let mut r = Report::new("parse");
            r.push("formula", f.to_string())
                .push("language", &sig.name)
                .push("free_vars", f.free_var_list())
                .push("quantifiers", f.quantifier_count())
                .push("prenex", p.to_string());
            match &d {
                Some(d) => r.push("radius_in", radius_in(&f, d)?),
                None => r.push("radius", radius(&p)?),
            };
            Ok((r, true))
        }
        Cmd::Translate { formula, dict, backward } => {
            let d = load_dictionary(dict)?;
            let (sig, dir) = if *backward {
                (d.target.clone(), Direction::Backward)
            } else {
                (Signature::base(), Direction::Forward)
            };
            let f = formula_in(formula, &sig)?;
            let t = d.translate(&f, dir).map_err(Error::from)?;
            let mut r = Report::new("translate");
            r.push("dictionary", &d.name)
                .push("direction", if *backward { "backward" } else { "forward" })
                .push("input", f.to_string())
                .push("output", t.to_string());
            if *backward {
                r.push("radius", radius(&to_prenex(&t))?);
            } else {
                r.push("radius_in", radius_in(&t, &d)?);
            }
            Ok((r, true))
        }
        Cmd::Eval { formula, model, tuple, dict } => {
            let m = load_fragment(model)?;
            let d = dict.as_deref().map(load_dictionary).transpose()?;
            let f = match &d {
                Some(d) => {
                    let g = formula_in(formula, &d.target)?;
                    d.translate(&g, Direction::Backward).map_err(Error::from)?
                }
                None => formula_in(formula, &Signature::base())?,
            };
            let vars = f.free_var_list();
            let es = if tuple.trim().is_empty() { Vec::new() } else { parse_elements(tuple, &m)? };
            if es.len() != vars.len() {
                return Err(CliError::Usage(format!("formula has free variables {vars:?}; got {} elements", es.len())));
            }
            let resolve = fragment_resolver(&m);
            let mut asg = Assignment::from_tuple(&vars, &es);
            for h in f.handles() {
                let e = resolve(h).ok_or_else(|| CliError::Usage(format!("no element with id {h}")))?;
                asg = asg.handle(h, e);
            }
            let v = eval_windowed(&m, &f, &asg, &Window::full(&m)).map_err(Error::from)?;
            let mut r = Report::new("eval");
            r.push("formula", f.to_string())
                .push("vars", vars)
                .push("tuple", es.iter().map(|&e| show_element(&m, e)).collect::<Vec<_>>())
                .push("value", v);
            Ok((r, true))
        }
        Cmd::Rtype { model, tuple, r: rad } => {
            let m = load_fragment(model)?;
            let es = parse_elements(tuple, &m)?;
            let t = r_type(&m, &es, *rad).map_err(Error::from)?;
            let vars: Vec<String> = (0..es.len()).map(|i| format!("x{i}")).collect();
            let mut r = Report::new("rtype");
            r.push("tuple", es.iter().map(|&e| show_element(&m, e)).collect::<Vec<_>>())
                .push("r", rad)
                .push("type", t.to_string())
                .push("formula", t.to_formula(&vars).to_string());
            Ok((r, true))
        }
        Cmd::Verify(Verify::Indiscern { formula, model, margin, max_pairs, max_tuples }) => {
            let m = load_fragment(model)?;
            let f = formula_in(formula, &Signature::base())?;
            let rad = radius(&to_prenex(&f))?;
            let w = Window::interior(&m, margin.unwrap_or(rad));
            let cfg = IndiscernConfig { max_pairs: *max_pairs, max_tuples: *max_tuples, seed: cli.seed };
            let rep = check_indiscernability(&m, &f, &w, &cfg)?;
            let mut r = Report::new("verify indiscern");
            r.push("formula", &rep.formula)
                .push("r", rep.r)
                .push("arity", rep.arity)
                .push("window", w.len())
                .push("deep_tuples", rep.tuples)
                .push("types", rep.types)
                .push("pairs_checked", rep.pairs_checked)
                .push("tuples_sampled", rep.tuples_sampled)
                .push("pairs_sampled", rep.pairs_sampled)
                .push(
                    "violations",
                    rep.violations
                        .iter()
                        .map(|v| {
                            let show = |t: &[_]| t.iter().map(|&e| show_element(&m, e)).collect::<Vec<_>>().join(",");
                            format!("{} vs {}", show(&v.left), show(&v.right))
                        })
                        .collect::<Vec<_>>(),
                )
                .push("warnings", &rep.warnings)
                .push("ok", rep.ok());
            Ok((r, rep.ok()))
        }
        Cmd::Verify(Verify::Qe { formula, model, margin }) => {
            let m = load_fragment(model)?;
            let f = formula_in(formula, &Signature::base())?;
            let rad = radius(&to_prenex(&f))?;
            let w = Window::interior(&m, margin.unwrap_or(rad));
            let rep = check_qe(&m, &f, &w)?;
            let ok = rep.disagreements == 0;
            let mut r = Report::new("verify qe");
            r.push("formula", &rep.formula)
                .push("r", rep.r)
                .push("types", rep.types)
                .push("checked", rep.checked)
                .push("disagreements", rep.disagreements)
                .push("ok", ok);
            Ok((r, ok))
        }
        Cmd::Sat(a) => sat(cli, a),
        Cmd::Ma { formula, model, k, margin } => {
            let m = load_fragment(model)?;
            let f = formula_in(formula, &Signature::base())?;
            let w = Window::interior(&m, *margin);
            let v = is_mutually_algebraic(&m, &f, &w, *k, &fragment_resolver(&m))?;
            let mut r = Report::new("ma");
            r.push("formula", f.to_string())
                .push("k", k)
                .push("window", w.len())
                .push("mutually_algebraic", v.is_yes());
            match &v {
                MaVerdict::Yes(wit) => {
                    r.push("max_completions", wit.k).push("satisfying", wit.satisfying);
                }
                MaVerdict::No(c) => {
                    let show = |es: &[_]| es.iter().map(|&e| show_element(&m, e)).collect::<Vec<_>>().join(",");
                    r.push("fixed_coordinates", &c.fixed)
                        .push("fixed_values", show(&c.values))
                        .push("completions", c.completions.len());
                }
            }
            Ok((r, true))
        }
        Cmd::Tree { tree, n, show } => {
            let t = load_tree(tree)?;
            let lv = t.level(*n)?;
            let mut r = Report::new("tree");
            r.push("tree", t.label())
                .push("n", n)
                .push("members", lv.len())
                .push("shown", lv.iter().take(*show).map(|b| show_bits(b)).collect::<Vec<_>>())
                .push("leftmost_path", show_bits(&t.leftmost_path(*n)))
                .push("axiom", axiom_for_level(&t, *n)?.to_string());
            Ok((r, true))
        }
        Cmd::Guess(a) => {
            let (o, tree) = oracle_from(&a.src, cli.seed, a.n + 8)?;
            let psi = match a.psi.as_str() {
                "graph" => PsiChoice::Graph,
                "adversarial" => PsiChoice::Adversarial,
                other => PsiChoice::Given(formula_in(other, &o.dictionary().target)?),
            };
            let cfg = GuessConfig { n: a.n, fuel: a.fuel, psi, k: a.k, c: a.c, seed: cli.seed };
            let (r, ok, log) = guess_report_logged(&o, &cfg, cli.ground_truth, tree.as_ref(), a.log.is_some())?;
            write_log(&a.log, log)?;
            Ok((r, ok))
        }
        Cmd::Warmup { src, n, log } => {
            let (o, _) = oracle_from(src, cli.seed, n + 8)?;
            let (r, ok, text) = warmup_report_logged(&o, *n, cli.seed, cli.ground_truth, log.is_some())?;
            write_log(log, text)?;
            Ok((r, ok))
        }
        Cmd::DemoPipeline { dict, tree, n, fuel, adversarial } => {
            need_truth(cli, "demo-pipeline")?;
            let d = load_dictionary(dict)?;
            let t = match tree {
                Some(t) => load_tree(t)?,
                None => crate::harness::diagonal_default(n.iter().copied().max().unwrap_or(0) + 8)?,
            };
            let psi = if *adversarial { PsiChoice::Adversarial } else { PsiChoice::Graph };
            Ok(demo_pipeline(&d, &t, n, cli.seed, *fuel, psi)?)
        }
    }
}

fn sat(cli: &Cli, a: &SatArgs) -> Result<(Report, bool), CliError> {
    let d: DefDictionary = load_dictionary(&a.dict)?;
    let m: ModelFragment = load_fragment(&a.model)?;
    let w = Window::interior(&m, a.margin);
    let o = OracleModel::new(m, d.clone(), w, cli.seed).map_err(Error::from)?;
    let h = o.hidden();
    let f = formula_in(&a.formula, &d.target)?;
    let vars = f.free_var_list();
    let args: Vec<Handle> = match &a.at {
        Some(es) => {
            need_truth(cli, "--at")?;
            parse_elements(es, h.fragment())?
                .into_iter()
                .map(|e| h.handle(e).ok_or_else(|| CliError::Usage(format!("{e:?} is outside the oracle domain"))))
                .collect::<Result<_, _>>()?
        }
        None if a.tuple.trim().is_empty() => Vec::new(),
        None => parse_handles(&a.tuple)?,
    };
    if args.len() != vars.len() {
        return Err(CliError::Usage(format!("formula has free variables {vars:?}; got {} handles", args.len())));
    }
    let pf = to_prenex(&f);
    let existential = pf.is_existential();
    let sr = if existential { None } else { Some(sat_radius_of(&o, &f)?) };
    let need_r = match &sr {
        Some(s) => s.value,
        None => radius_in(&f, &d)?,
    };
    let u: Vec<Handle> = match a.u.strip_prefix("auto:") {
        Some(rad) => {
            need_truth(cli, "--U auto")?;
            let rad = rad.parse().map_err(|_| CliError::Usage(format!("bad radius in --U {}", a.u)))?;
            nbhd_handles(&h, &args, rad)
        }
        None if a.u.trim().is_empty() => Vec::new(),
        None => parse_handles(&a.u)?,
    };
    let shape = match &sr {
        Some(s) => s.kit_shape(),
        None => (need_r, vars.len(), f.quantifier_count()),
    };
    let kit = witness_kit(&o, &[shape])?;
    let kit_ok = kit.is_adequate();
    let lo = LoggingOracle::new(&o);
    let ctx = SatContext::new(&lo, kit);
    let verdict = match &sr {
        Some(s) => sat_general(&ctx, s, &args, &u, &[])?,
        None => sat_existential(&ctx, &pf, &args, &u)?,
    };
    if a.log.is_some() {
        write_log(&a.log, Some(lo.render()))?;
    }
    let mut r = Report::new("sat");
    r.push("formula", f.to_string())
        .push("dictionary", &d.name)
        .push("method", if existential { "existential" } else { "general" })
        .push("tuple", &args)
        .push("U_size", u.len())
        .push(
            "precondition",
            format!("U contains the {need_r}-neighbourhood of every argument; the witness kit meets its quota"),
        )
        .push("kit_adequate", kit_ok)
        .push("oracle_evals", ctx.evals())
        .push("verdict", verdict);
    let mut ok = true;
    if cli.ground_truth {
        let truth = h.truth(&f, &vars, &args).map_err(Error::from)?;
        let adequate = u_is_adequate(&h, &args, &u, need_r);
        r.push("truth", truth).push("U_adequate", adequate);
        ok = if adequate && kit_ok { verdict == truth } else { !existential || !verdict || truth };
        r.push("ok", ok);
    }
    Ok((r, ok))
}
