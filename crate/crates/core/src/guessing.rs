//! Guessing successors, neighbourhoods of an element, and initial segments
//! of the path `A(0) A(1) ...` using only oracle access and a few
//! hard-coded facts.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::formula::{radius_in, to_prenex, Direction, Formula, Term};
use crate::ma::{is_mutually_algebraic, satisfying_tuples, MaVerdict};
use crate::model::{Element, Handle, ModelFragment, Oracle, OracleModel, SignedDistance, Window};
use crate::satisfaction::{sat_general, SatContext, SatRadius};
use crate::tree::Bits;

/// A step budget; one unit per oracle evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    limit: Option<u64>,
    spent: u64,
}

impl Fuel {
    pub fn unlimited() -> Self {
        Fuel { limit: None, spent: 0 }
    }

    pub fn limited(n: u64) -> Self {
        Fuel { limit: Some(n), spent: 0 }
    }

    /// Takes one unit; false once the budget is gone.
    pub fn spend(&mut self) -> bool {
        if self.limit.is_some_and(|l| self.spent >= l) {
            return false;
        }
        self.spent += 1;
        true
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }
}

/// An existential L'-formula `ψ(x, y)` implied by the successor graph and
/// mutually algebraic, with its exception set `X` and the true successor
/// and predecessor of each member of `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessorApprox {
    pub psi: Formula,
    pub r: u64,
    pub ma_k: usize,
    pub exceptions: BTreeSet<Handle>,
    pub succ: BTreeMap<Handle, Handle>,
    pub pred: BTreeMap<Handle, Handle>,
}

/// `(S' x) = y ∨ (S' (S' x)) = y`, written through the dictionary's
/// forward successor so that it is implied by the successor graph.
pub fn adversarial_psi(d: &crate::formula::DefDictionary) -> Result<Formula, Error> {
    let l = Formula::or(
        Formula::eq(Term::app("S", alloc::vec![Term::var("x")]), Term::var("y")),
        Formula::eq(Term::var("x").shift(2), Term::var("y")),
    );
    Ok(to_prenex(&d.translate(&l, Direction::Forward)?))
}

impl SuccessorApprox {
    /// Harness-side construction from the hidden structure.
    pub fn build(o: &OracleModel, psi: &Formula, k: usize) -> Result<Self, Error> {
        let d = o.dictionary();
        let psi = to_prenex(psi);
        if !psi.is_existential() {
            return Err(Error::Precondition("psi is not existential".into()));
        }
        if psi.free_var_list() != ["x", "y"] {
            return Err(Error::Precondition("psi must have free variables x, y".into()));
        }
        let r = radius_in(&psi, d)?;
        let h = o.hidden();
        let m = h.fragment();
        let vars = psi.free_var_list();
        for &e in h.domain().elements() {
            if let (Some(a), Some(b)) = (h.handle(e), h.handle(e.offset(1))) {
                if !h.truth(&psi, &vars, &[a, b])? {
                    return Err(Error::Precondition(alloc::format!(
                        "psi fails at the successor pair {e}, {}",
                        e.offset(1)
                    )));
                }
            }
        }
        let lpsi = to_prenex(&d.translate(&psi, Direction::Backward)?);
        let resolve = |x: Handle| h.element(x);
        let (x, ma_k) = exception_set(m, &lpsi, r, h.domain(), k, &resolve)?;
        let mut exceptions = BTreeSet::new();
        let mut succ = BTreeMap::new();
        let mut pred = BTreeMap::new();
        for e in x {
            let Some(a) = h.handle(e) else { continue };
            exceptions.insert(a);
            if let Some(b) = h.handle(e.offset(1)) {
                succ.insert(a, b);
            }
            if let Some(b) = h.handle(e.offset(-1)) {
                pred.insert(a, b);
            }
        }
        Ok(SuccessorApprox { psi, r, ma_k, exceptions, succ, pred })
    }
}

/// A small set `X` such that every pair satisfying the L-formula `psi`
/// either lies within distance `r` or meets `X`: the r-neighbourhoods of
/// the parameters plus an inclusion-minimal cover of the remaining far
/// pairs. Also returns the completion bound found by the
/// mutual-algebraicity check against `k`.
pub fn exception_set(
    m: &ModelFragment,
    psi: &Formula,
    r: u64,
    window: &Window,
    k: usize,
    resolve: &dyn Fn(u32) -> Option<Element>,
) -> Result<(BTreeSet<Element>, usize), Error> {
    let ma_k = match is_mutually_algebraic(m, psi, window, k, resolve)? {
        MaVerdict::Yes(w) => w.k,
        MaVerdict::No(c) => {
            return Err(Error::NotMutuallyAlgebraic(alloc::format!(
                "{} completions of coordinates {:?} at {:?}",
                c.completions.len(),
                c.fixed,
                c.values
            )))
        }
    };
    let mut x = BTreeSet::new();
    for p in psi.handles() {
        let e = resolve(p).ok_or(crate::error::ModelError::UnknownHandle(p))?;
        for d in -(r as i64)..=r as i64 {
            if window.contains(m, e.offset(d)) {
                x.insert(e.offset(d));
            }
        }
    }
    let (_, sat) = satisfying_tuples(m, psi, window, resolve)?;
    let far: Vec<(Element, Element)> = sat
        .iter()
        .map(|t| (t[0], t[1]))
        .filter(|&(a, b)| SignedDistance::between(a, b).within(r).is_none())
        .filter(|(a, b)| !x.contains(a) && !x.contains(b))
        .collect();
    let mut cover: BTreeSet<Element> = far.iter().flat_map(|&(a, b)| [a, b]).collect();
    for v in cover.clone() {
        let needed = far.iter().any(|&(a, b)| (a == v && !cover.contains(&b)) || (b == v && !cover.contains(&a)));
        if !needed {
            cover.remove(&v);
        }
    }
    x.extend(cover);
    Ok((x, ma_k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alg1Result {
    pub source: Handle,
    pub succ: Vec<Handle>,
    pub pred: Vec<Handle>,
    pub complete: bool,
}

fn psi_holds<O: Oracle>(
    o: &O,
    q: &O::Query,
    k: usize,
    x: Handle,
    y: Handle,
    hs: &[Handle],
    fuel: &mut Fuel,
) -> Result<Option<bool>, Error> {
    let mut tuple = alloc::vec![x, y];
    tuple.resize(2 + k, 0);
    let mut idx = alloc::vec![0usize; k];
    if k > 0 && hs.is_empty() {
        return Ok(Some(false));
    }
    loop {
        for (j, &i) in idx.iter().enumerate() {
            tuple[2 + j] = hs[i];
        }
        if !fuel.spend() {
            return Ok(None);
        }
        if o.eval(q, &tuple)? {
            return Ok(Some(true));
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(Some(false));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < hs.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Candidates for the successor and predecessor of `a`: every `b` with
/// `ψ(a, b)` (resp. `ψ(b, a)`), filtered through the hard-coded table when
/// `a` or `b` is exceptional.
pub fn guess_succ_pred<O: Oracle>(
    o: &O,
    sa: &SuccessorApprox,
    a: Handle,
    fuel: &mut Fuel,
) -> Result<Alg1Result, Error> {
    let (prefix, matrix) = sa.psi.prenex_parts().expect("prenex");
    let mut vars: Vec<String> = alloc::vec!["x".into(), "y".into()];
    vars.extend(prefix.iter().map(|(_, v)| String::from(*v)));
    let q = o.prepare(matrix, &vars)?;
    let hs = o.handles();
    let mut out = Alg1Result { source: a, succ: Vec::new(), pred: Vec::new(), complete: true };
    for &b in &hs {
        for forward in [true, false] {
            let (x, y) = if forward { (a, b) } else { (b, a) };
            match psi_holds(o, &q, prefix.len(), x, y, &hs, fuel)? {
                None => {
                    out.complete = false;
                    return Ok(out);
                }
                Some(false) => {}
                Some(true) => {
                    let keep = if sa.exceptions.contains(&a) {
                        let t = if forward { &sa.succ } else { &sa.pred };
                        t.get(&a) == Some(&b)
                    } else if sa.exceptions.contains(&b) {
                        let t = if forward { &sa.pred } else { &sa.succ };
                        t.get(&b) == Some(&a)
                    } else {
                        true
                    };
                    if keep {
                        if forward {
                            out.succ.push(b);
                        } else {
                            out.pred.push(b);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub i: i64,
    pub m: usize,
    pub guess: Option<Vec<Handle>>,
}

/// Output of the neighbourhood guesser: candidate lists
/// `[a-n, ..., a, ..., a+n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodGuesses {
    pub a: Handle,
    pub n: usize,
    pub big_n: usize,
    pub r1: u64,
    pub r2: u64,
    pub guesses: Vec<Vec<Handle>>,
    pub pre_dedup: usize,
    pub branches: Vec<Branch>,
    pub alg1_log: Vec<Alg1Result>,
    /// `U_{-N} .. U_N` at the end of the enumeration.
    pub sets: Vec<Vec<Handle>>,
    pub complete: bool,
    pub fuel_spent: u64,
}

impl NeighborhoodGuesses {
    /// `r1 (2N+1)^2`.
    pub fn bound(&self) -> u64 {
        let w = 2 * self.big_n as u64 + 1;
        self.r1 * w * w
    }
}

fn phase2<O: Oracle>(
    ctx: &SatContext<'_, O>,
    phi_s: &SatRadius,
    a: Handle,
    n: usize,
    big_n: usize,
    sets: &[Vec<Handle>],
    fuel: &mut Fuel,
) -> Result<Option<Vec<Handle>>, Error> {
    let mut u: Vec<Handle> = sets.iter().flatten().copied().collect();
    u.sort_unstable();
    u.dedup();
    let mut guess = alloc::vec![a; 2 * n + 1];
    for dir in [1i64, -1] {
        let mut cur = a;
        for i in 1..=n as i64 {
            let mut cands = sets[(big_n as i64 + dir * i) as usize].clone();
            cands.sort_unstable();
            let mut found = None;
            for b in cands {
                let before = ctx.evals();
                let args = if dir > 0 { [cur, b] } else { [b, cur] };
                let ok = sat_general(ctx, phi_s, &args, &u, &[])?;
                for _ in before..ctx.evals() {
                    if !fuel.spend() {
                        return Ok(None);
                    }
                }
                if ok {
                    found = Some(b);
                    break;
                }
            }
            let Some(b) = found else { return Ok(None) };
            guess[(n as i64 + dir * i) as usize] = b;
            cur = b;
        }
    }
    Ok(Some(guess))
}

/// Lists at most `r1 (2N+1)^2` candidates for the `n`-neighbourhood of `a`,
/// `N = r1 n + r2`, one of which is correct when the enumeration finishes.
pub fn guess_neighborhood<O: Oracle>(
    ctx: &SatContext<'_, O>,
    sa: &SuccessorApprox,
    phi_s: &SatRadius,
    a: Handle,
    n: usize,
    fuel: &mut Fuel,
) -> Result<NeighborhoodGuesses, Error> {
    if sa.r == 0 {
        return Err(Error::Precondition("psi has radius 0".into()));
    }
    let r1 = sa.r;
    let r2 = phi_s.value;
    let big_n = (r1 as usize) * n + r2 as usize;
    let big_n = big_n.max(n);
    let width = 2 * big_n + 1;
    let idx = |i: i64| (big_n as i64 + i) as usize;
    let mut sets: Vec<Vec<Handle>> = alloc::vec![Vec::new(); width];
    sets[big_n].push(a);
    let mut events: Vec<(i64, Handle)> = alloc::vec![(0, a)];
    let mut queue: VecDeque<(i64, Handle)> = VecDeque::from([(0i64, a)]);
    let mut memo: BTreeMap<Handle, Alg1Result> = BTreeMap::new();
    let mut log = Vec::new();
    let mut complete = true;
    'outer: while let Some((i, b)) = queue.pop_front() {
        if i.unsigned_abs() as usize >= big_n {
            continue;
        }
        let res = match memo.get(&b) {
            Some(r) => r.clone(),
            None => {
                let r = guess_succ_pred(ctx.oracle, sa, b, fuel)?;
                log.push(r.clone());
                if !r.complete {
                    complete = false;
                    break 'outer;
                }
                memo.insert(b, r.clone());
                r
            }
        };
        let mut step = |j: i64, cands: &[Handle]| {
            for &c in cands {
                if !sets[idx(j)].contains(&c) {
                    sets[idx(j)].push(c);
                    events.push((j, c));
                    queue.push_back((j, c));
                }
            }
        };
        if i >= 0 {
            step(i + 1, &res.succ);
        }
        if i <= 0 {
            step(i - 1, &res.pred);
        }
    }
    let mut snapshot: Vec<Vec<Handle>> = alloc::vec![Vec::new(); width];
    let mut branches = Vec::new();
    let mut guesses: Vec<Vec<Handle>> = Vec::new();
    let mut pre_dedup = 0;
    for &(j, c) in &events {
        snapshot[idx(j)].push(c);
        let m = snapshot[idx(j)].len();
        let guess = if complete || fuel.limit().is_none_or(|l| fuel.spent() < l) {
            phase2(ctx, phi_s, a, n, big_n, &snapshot, fuel)?
        } else {
            None
        };
        if let Some(g) = &guess {
            pre_dedup += 1;
            if !guesses.contains(g) {
                guesses.push(g.clone());
            }
        }
        branches.push(Branch { i: j, m, guess });
    }
    Ok(NeighborhoodGuesses {
        a,
        n,
        big_n,
        r1,
        r2,
        guesses,
        pre_dedup,
        branches,
        alg1_log: log,
        sets,
        complete,
        fuel_spent: fuel.spent(),
    })
}

/// The constants of a path guesser built from a dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constants {
    pub r1: u64,
    pub r2: u64,
    pub r_a: u64,
    /// Guesses at level `n` are at most `c · max(n, 1)^2`.
    pub c: u64,
}

impl Constants {
    pub fn new(r1: u64, r2: u64, r_a: u64) -> Self {
        let w = 2 * r1 * (1 + r_a) + 2 * r2 + 1;
        Constants { r1, r2, r_a, c: r1 * w * w }
    }

    /// `r1 n + r2`.
    pub fn big_n(&self, n: usize) -> u64 {
        self.r1 * n as u64 + self.r2
    }

    /// `N` for the inner neighbourhood call, `r1 (n + r_A) + r2`.
    pub fn inner_n(&self, n: usize) -> u64 {
        self.big_n(n + self.r_a as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuessBatch {
    pub n: usize,
    pub zero: Handle,
    pub constants: Constants,
    pub nbhd: NeighborhoodGuesses,
    /// Candidates for `A(0) .. A(n-1)`, deduplicated in emission order.
    pub guesses: Vec<Bits>,
    pub pre_dedup: usize,
}

/// Locates zero by `φ_0`, guesses its `(n + r_A)`-neighbourhood, and reads
/// one candidate string of length `n` from each neighbourhood guess.
pub fn guess_a<O: Oracle>(
    ctx: &SatContext<'_, O>,
    sa: &SuccessorApprox,
    phi_s: &SatRadius,
    phi_a: &SatRadius,
    phi_0: &SatRadius,
    n: usize,
    fuel: &mut Fuel,
) -> Result<GuessBatch, Error> {
    let mut zero = None;
    for h in ctx.oracle.handles() {
        if sat_general(ctx, phi_0, &[h], &[h], &[])? {
            zero = Some(h);
            break;
        }
    }
    let zero = zero.ok_or_else(|| Error::Precondition("no element satisfies the zero formula".into()))?;
    let constants = Constants::new(sa.r, phi_s.value, phi_a.value);
    let inner = n + phi_a.value as usize;
    let nbhd = guess_neighborhood(ctx, sa, phi_s, zero, inner, fuel)?;
    let mut guesses: Vec<Bits> = Vec::new();
    let mut pre_dedup = 0;
    for b in &nbhd.branches {
        let Some(g) = &b.guess else { continue };
        let mut u = g.clone();
        u.sort_unstable();
        u.dedup();
        let bits =
            (0..n).map(|i| sat_general(ctx, phi_a, &[g[inner + i]], &u, &[])).collect::<Result<Bits, Error>>()?;
        pre_dedup += 1;
        if !guesses.contains(&bits) {
            guesses.push(bits);
        }
    }
    Ok(GuessBatch { n, zero, constants, nbhd, guesses, pre_dedup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{builtin, parse, DefDictionary};
    use crate::model::{ChainInterval, Hidden};
    use crate::satisfaction::{build_witness_kit, satisfaction_radius};

    fn frag() -> ModelFragment {
        let mut bits = String::new();
        for _ in 0..30 {
            bits.push_str("10");
        }
        bits.push_str("1101001110001011");
        for _ in 0..30 {
            bits.push_str("10");
        }
        let a = ChainInterval::from_bits("a", -66, &bits).unwrap();
        let b = ChainInterval::from_bits("b", 0, &"10".repeat(20)).unwrap();
        ModelFragment::new(alloc::vec![a, b], "a", 0).unwrap()
    }

    struct Setup {
        o: OracleModel,
        d: DefDictionary,
    }

    fn setup(d: DefDictionary) -> Setup {
        let m = frag();
        let w = Window::interior(&m, 6);
        Setup { o: OracleModel::new(m, d.clone(), w, 11).unwrap(), d }
    }

    fn sr(s: &Setup, f: &Formula) -> SatRadius {
        let h = s.o.hidden();
        satisfaction_radius(f, h.fragment(), &s.d, h.domain(), &|x| h.element(x)).unwrap()
    }

    fn ctx<'a>(s: &'a Setup, r: u64) -> SatContext<'a, OracleModel> {
        let h = s.o.hidden();
        let kit = build_witness_kit(h.fragment(), h.domain(), r, 2, 0).unwrap();
        SatContext::new(&s.o, kit.to_handles(&h).unwrap())
    }

    fn true_nbhd(h: &Hidden<'_>, a: Handle, n: usize) -> Option<Vec<Handle>> {
        let e = h.element(a)?;
        (-(n as i64)..=n as i64).map(|d| h.handle(e.offset(d))).collect()
    }

    #[test]
    fn fuel_runs_out() {
        let mut f = Fuel::limited(2);
        assert!(f.spend() && f.spend());
        assert!(!f.spend());
        assert_eq!(f.spent(), 2);
    }

    #[test]
    fn alg1_candidates_are_close() {
        for d in [builtin::identity(), builtin::swap()] {
            let s = setup(d.clone());
            let psi = adversarial_psi(&d).unwrap();
            let sa = SuccessorApprox::build(&s.o, &psi, 2).unwrap();
            assert_eq!(sa.r, 3);
            assert!(sa.exceptions.is_empty());
            let h = s.o.hidden();
            for a in s.o.handles().into_iter().step_by(7) {
                let res = guess_succ_pred(&s.o, &sa, a, &mut Fuel::unlimited()).unwrap();
                let e = h.element(a).unwrap();
                for &b in res.succ.iter().chain(&res.pred) {
                    let dist = SignedDistance::between(e, h.element(b).unwrap()).within(sa.r);
                    assert!(dist.is_some());
                }
                if let Some(b) = h.handle(e.offset(1)) {
                    assert!(res.succ.contains(&b));
                }
            }
        }
    }

    #[test]
    fn far_parameters_become_exceptions() {
        let d = builtin::identity();
        let s = setup(d.clone());
        let h = s.o.hidden();
        let p = h.handle(Element::new(0, 20)).unwrap();
        let q = h.handle(Element::new(1, 10)).unwrap();
        let text = alloc::format!("(or (= (S' x) y) (and (= x (handle {p})) (= y (handle {q}))))");
        let psi = parse(&text, &d.target).unwrap();
        let sa = SuccessorApprox::build(&s.o, &psi, 2).unwrap();
        assert!(sa.exceptions.contains(&p) && sa.exceptions.contains(&q));
        let res = guess_succ_pred(&s.o, &sa, p, &mut Fuel::unlimited()).unwrap();
        assert_eq!(res.succ, alloc::vec![h.handle(Element::new(0, 21)).unwrap()]);
    }

    #[test]
    fn non_ma_psi_is_rejected() {
        let d = builtin::identity();
        let s = setup(d.clone());
        let psi = parse("(or (= (S' x) y) (and (A' x) (A' y)))", &d.target).unwrap();
        assert!(matches!(SuccessorApprox::build(&s.o, &psi, 3), Err(Error::NotMutuallyAlgebraic(_))));
    }

    #[test]
    fn neighborhood_guess_contains_truth() {
        for (d, adv) in [(builtin::identity(), false), (builtin::swap(), true), (builtin::a_shift(), true)] {
            let s = setup(d.clone());
            let psi = if adv { adversarial_psi(&d).unwrap() } else { d.phi_succ().unwrap() };
            let sa = SuccessorApprox::build(&s.o, &psi, 2).unwrap();
            let phi_s = sr(&s, &d.phi_succ().unwrap());
            let c = ctx(&s, phi_s.value);
            let h = s.o.hidden();
            let a = h.handle(h.fragment().zero()).unwrap();
            for n in [0, 1, 3] {
                let g = guess_neighborhood(&c, &sa, &phi_s, a, n, &mut Fuel::unlimited()).unwrap();
                assert!(g.complete);
                assert!(g.guesses.contains(&true_nbhd(&h, a, n).unwrap()), "{} n={n}", d.name);
                assert!(g.pre_dedup as u64 <= g.bound());
            }
        }
    }

    #[test]
    fn starved_fuel_is_flagged() {
        let d = builtin::identity();
        let s = setup(d.clone());
        let sa = SuccessorApprox::build(&s.o, &d.phi_succ().unwrap(), 1).unwrap();
        let phi_s = sr(&s, &d.phi_succ().unwrap());
        let c = ctx(&s, phi_s.value);
        let a = s.o.hidden().handle(s.o.hidden().fragment().zero()).unwrap();
        let g = guess_neighborhood(&c, &sa, &phi_s, a, 3, &mut Fuel::limited(50)).unwrap();
        assert!(!g.complete);
    }

    #[test]
    fn path_guess_contains_truth() {
        for d in [builtin::identity(), builtin::swap(), builtin::a_shift()] {
            let s = setup(d.clone());
            let sa = SuccessorApprox::build(&s.o, &d.phi_succ().unwrap(), 1).unwrap();
            let phi_s = sr(&s, &d.phi_succ().unwrap());
            let phi_a = sr(&s, &d.phi_label().unwrap());
            let phi_0 = sr(&s, &d.phi_zero().unwrap());
            let c = ctx(&s, phi_s.value.max(phi_a.value));
            let h = s.o.hidden();
            for n in [0, 2, 5] {
                let b = guess_a(&c, &sa, &phi_s, &phi_a, &phi_0, n, &mut Fuel::unlimited()).unwrap();
                let path = h.fragment().extract_path(n).unwrap()[..n].to_vec();
                assert!(b.guesses.contains(&path), "{} n={n}", d.name);
                assert!(b.pre_dedup as u64 <= b.constants.c * (n.max(1) as u64).pow(2));
                assert_eq!(h.element(b.zero), Some(h.fragment().zero()));
            }
        }
    }
}
