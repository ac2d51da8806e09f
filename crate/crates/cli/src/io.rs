//! Text formats for fragments, dictionaries, trees, formulas and tuples.

use std::fmt::Write as _;
use std::path::Path;

use defeq_core::formula::{builtin, parse, DefBody, DefDictionary, Direction, Formula, Signature};
use defeq_core::model::{bits_to_string, parse_bits, ChainInterval, Element, Handle, ModelFragment};
use defeq_core::tree::{builtin_guesser, diagonal_tree, BinaryTree, Bits, TreeRule};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] defeq_core::Error),
}

impl From<defeq_core::FormulaError> for IoError {
    fn from(e: defeq_core::FormulaError) -> Self {
        IoError::Core(e.into())
    }
}

impl From<defeq_core::ModelError> for IoError {
    fn from(e: defeq_core::ModelError) -> Self {
        IoError::Core(e.into())
    }
}

fn perr(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

/// Non-empty lines with `#` comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn key_value<'a>(line: usize, tok: &'a str, key: &str) -> Result<&'a str, IoError> {
    tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')).ok_or_else(|| perr(line, format!("expected {key}=...")))
}

pub fn parse_fragment(text: &str) -> Result<ModelFragment, IoError> {
    let mut chains = Vec::new();
    let mut zero = None;
    for (no, l) in lines(text) {
        if let Some(z) = l.strip_prefix("zero=") {
            let (c, p) = z.rsplit_once(':').ok_or_else(|| perr(no, "zero=<chain>:<pos>"))?;
            let p: i64 = p.parse().map_err(|_| perr(no, "bad zero position"))?;
            if zero.replace((c.to_string(), p)).is_some() {
                return Err(perr(no, "second zero line"));
            }
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["chain", id, lo, hi, labels] => {
                let lo: i64 = key_value(no, lo, "lo")?.parse().map_err(|_| perr(no, "bad lo"))?;
                let hi: i64 = key_value(no, hi, "hi")?.parse().map_err(|_| perr(no, "bad hi"))?;
                let bits =
                    parse_bits(key_value(no, labels, "labels")?).ok_or_else(|| perr(no, "labels must be 0/1"))?;
                if hi - lo + 1 != bits.len() as i64 {
                    return Err(perr(no, format!("hi-lo+1 = {} but {} labels", hi - lo + 1, bits.len())));
                }
                chains.push(ChainInterval::new(id, lo, bits));
            }
            _ => return Err(perr(no, format!("unrecognised line '{l}'"))),
        }
    }
    let (zc, zp) = zero.ok_or_else(|| perr(0, "missing zero= line"))?;
    Ok(ModelFragment::new(chains, &zc, zp)?)
}

pub fn write_fragment(m: &ModelFragment) -> String {
    let mut out = String::new();
    for c in m.chains() {
        let _ = writeln!(out, "chain {} lo={} hi={} labels={}", c.id, c.lo, c.hi, bits_to_string(&c.labels));
    }
    let z = m.zero();
    let _ = writeln!(out, "zero={}:{}", m.chain(z.chain).id, z.pos);
    out
}

/// `a:3,b:-1` with chains named by id.
pub fn parse_elements(s: &str, m: &ModelFragment) -> Result<Vec<Element>, IoError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let (c, p) = t.trim().rsplit_once(':').ok_or_else(|| perr(0, format!("element '{t}' is not chain:pos")))?;
            let chain = m.chain_index(c).ok_or_else(|| perr(0, format!("unknown chain '{c}'")))?;
            let pos = p.parse().map_err(|_| perr(0, format!("bad position in '{t}'")))?;
            let e = Element::new(chain, pos);
            m.check(e)?;
            Ok(e)
        })
        .collect()
}

pub fn show_element(m: &ModelFragment, e: Element) -> String {
    format!("{}:{}", m.chain(e.chain).id, e.pos)
}

pub fn parse_handles(s: &str) -> Result<Vec<Handle>, IoError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| perr(0, format!("bad handle '{t}'")))).collect()
}

/// A path to an existing file, or inline text.
pub fn file_or_inline(arg: &str) -> Result<String, IoError> {
    let p = Path::new(arg);
    if p.is_file() {
        read_file(p)
    } else {
        Ok(arg.to_string())
    }
}

pub fn load_formula(arg: &str, sig: &Signature) -> Result<Formula, IoError> {
    Ok(parse(&file_or_inline(arg)?, sig)?)
}

pub fn load_fragment(path: &str) -> Result<ModelFragment, IoError> {
    parse_fragment(&read_file(Path::new(path))?)
}

/// A built-in dictionary name or a dictionary file.
pub fn load_dictionary(arg: &str) -> Result<DefDictionary, IoError> {
    if let Some(d) = builtin::by_name(arg) {
        return Ok(d);
    }
    parse_dictionary(&read_file(Path::new(arg))?)
}

#[derive(PartialEq)]
enum Section {
    Head,
    Signature,
    Forward,
    Backward,
}

/// ```text
/// name: identity
/// signature: L'
/// const 0'
/// fun S' 1
/// rel A' 1
/// forward:
/// S x => (S' x)
/// A x := (A' x)
/// backward:
/// ...
/// ```
/// `=>` introduces a term definition, `:=` a formula definition.
pub fn parse_dictionary(text: &str) -> Result<DefDictionary, IoError> {
    let mut name = None;
    let mut sig: Option<Signature> = None;
    let mut defs: Vec<(Direction, usize, String, Vec<String>, String, bool)> = Vec::new();
    let mut section = Section::Head;
    for (no, l) in lines(text) {
        if let Some(n) = l.strip_prefix("name:") {
            name = Some(n.trim().to_string());
            continue;
        }
        if let Some(s) = l.strip_prefix("signature:") {
            sig = Some(Signature::new(s.trim()));
            section = Section::Signature;
            continue;
        }
        match l {
            "forward:" => {
                section = Section::Forward;
                continue;
            }
            "backward:" => {
                section = Section::Backward;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Head => return Err(perr(no, "expected name:, signature:, forward: or backward:")),
            Section::Signature => {
                let s = sig.take().expect("signature section");
                let toks: Vec<&str> = l.split_whitespace().collect();
                let arity = |t: &str| t.parse::<usize>().map_err(|_| perr(no, "bad arity"));
                sig = Some(match toks.as_slice() {
                    ["const", c] => s.with_constant(c),
                    ["fun", f, a] => s.with_function(f, arity(a)?),
                    ["rel", r, a] => s.with_relation(r, arity(a)?),
                    _ => return Err(perr(no, format!("bad signature line '{l}'"))),
                });
            }
            Section::Forward | Section::Backward => {
                let dir = if section == Section::Forward { Direction::Forward } else { Direction::Backward };
                let (lhs, rhs, is_term) = if let Some((a, b)) = l.split_once("=>") {
                    (a, b, true)
                } else if let Some((a, b)) = l.split_once(":=") {
                    (a, b, false)
                } else {
                    return Err(perr(no, "definition needs => or :="));
                };
                let mut toks = lhs.split_whitespace();
                let sym = toks.next().ok_or_else(|| perr(no, "missing symbol"))?.to_string();
                let params = toks.map(str::to_string).collect();
                defs.push((dir, no, sym, params, rhs.trim().to_string(), is_term));
            }
        }
    }
    let sig = sig.ok_or_else(|| perr(0, "missing signature:"))?;
    let mut d = DefDictionary::new(&name.unwrap_or_else(|| "unnamed".into()), sig);
    for (dir, no, sym, params, body, is_term) in defs {
        let ps: Vec<&str> = params.iter().map(String::as_str).collect();
        d.define(dir, &sym, &ps, &body, is_term).map_err(|e| perr(no, e.to_string()))?;
    }
    d.validate()?;
    Ok(d)
}

pub fn write_dictionary(d: &DefDictionary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name: {}", d.name);
    let _ = writeln!(out, "signature: {}", d.target.name);
    for c in &d.target.constants {
        let _ = writeln!(out, "const {c}");
    }
    for (f, a) in &d.target.functions {
        let _ = writeln!(out, "fun {f} {a}");
    }
    for (r, a) in &d.target.relations {
        let _ = writeln!(out, "rel {r} {a}");
    }
    for (head, defs) in [("forward:", &d.forward), ("backward:", &d.backward)] {
        let _ = writeln!(out, "{head}");
        for def in defs {
            let mut lhs = def.symbol.clone();
            for p in &def.params {
                lhs.push(' ');
                lhs.push_str(p);
            }
            let _ = match &def.body {
                DefBody::Term(t) => writeln!(out, "{lhs} => {t}"),
                DefBody::Formula(f) => writeln!(out, "{lhs} := {f}"),
            };
        }
    }
    out
}

fn bits(no: usize, s: &str) -> Result<Bits, IoError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    parse_bits(s).ok_or_else(|| perr(no, format!("'{s}' is not a bit string")))
}

/// `table` followed by `<level>: <members...>` lines (`-` is the empty
/// string), or a single `rule` line:
/// `rule full`, `rule single-path <bits>`, `rule periodic <bits>`,
/// `rule diagonal depth=<n> guessers=<name,...>`.
pub fn parse_tree(text: &str) -> Result<BinaryTree, IoError> {
    let mut it = lines(text);
    let (no, head) = it.next().ok_or_else(|| perr(0, "empty tree file"))?;
    let toks: Vec<&str> = head.split_whitespace().collect();
    match toks.as_slice() {
        ["table"] => {
            let mut levels: Vec<Vec<Bits>> = Vec::new();
            for (no, l) in it {
                let (lv, members) = l.split_once(':').ok_or_else(|| perr(no, "expected <level>: <members>"))?;
                let lv: usize = lv.trim().parse().map_err(|_| perr(no, "bad level"))?;
                if lv != levels.len() {
                    return Err(perr(no, format!("expected level {}", levels.len())));
                }
                levels.push(members.split_whitespace().map(|m| bits(no, m)).collect::<Result<_, _>>()?);
            }
            Ok(BinaryTree::table(levels)?)
        }
        ["rule", "full"] => Ok(BinaryTree::full()),
        ["rule", "single-path", b] => Ok(BinaryTree::single_path(bits(no, b)?)),
        ["rule", "periodic", b] => Ok(BinaryTree::periodic(bits(no, b)?)?),
        ["rule", "diagonal", depth, gs] => {
            let depth: usize = key_value(no, depth, "depth")?.parse().map_err(|_| perr(no, "bad depth"))?;
            let guessers = key_value(no, gs, "guessers")?
                .split(',')
                .map(|g| builtin_guesser(g).ok_or_else(|| perr(no, format!("unknown guesser '{g}'"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(diagonal_tree(&guessers, depth)?)
        }
        _ => Err(perr(no, format!("unrecognised tree header '{head}'"))),
    }
}

pub fn write_tree(t: &BinaryTree) -> String {
    match t.rule() {
        TreeRule::Full => "rule full\n".into(),
        TreeRule::SinglePath(b) => format!("rule single-path {}\n", show_bits(b)),
        TreeRule::Periodic(b) => format!("rule periodic {}\n", show_bits(b)),
        TreeRule::Table(levels) => {
            let mut out = String::from("table\n");
            for (i, l) in levels.iter().enumerate() {
                let ms: Vec<String> = l.iter().map(|b| show_bits(b)).collect();
                let _ = writeln!(out, "{i}: {}", ms.join(" "));
            }
            out
        }
    }
}

pub fn show_bits(b: &[bool]) -> String {
    if b.is_empty() {
        "-".into()
    } else {
        bits_to_string(b)
    }
}

pub fn load_tree(arg: &str) -> Result<BinaryTree, IoError> {
    parse_tree(&file_or_inline(arg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragment_round_trip() {
        let text = "# two chains\nchain a lo=-2 hi=2 labels=01101\nchain b lo=0 hi=2 labels=111\nzero=a:0\n";
        let m = parse_fragment(text).unwrap();
        assert_eq!(m.len(), 8);
        assert_eq!(parse_fragment(&write_fragment(&m)).unwrap(), m);
        assert!(parse_fragment("chain a lo=0 hi=3 labels=01\nzero=a:0").is_err());
        assert!(parse_fragment("chain a lo=0 hi=1 labels=01\n").is_err());
    }

    #[test]
    fn dictionary_round_trip() {
        for name in builtin::NAMES {
            let d = builtin::by_name(name).unwrap();
            let back = parse_dictionary(&write_dictionary(&d)).unwrap();
            assert_eq!(back, d, "{name}");
        }
    }

    #[test]
    fn tree_formats() {
        let t = parse_tree("table\n0: -\n1: 0 1\n2: 00 01 10\n").unwrap();
        assert_eq!(t.level(2).unwrap().len(), 3);
        assert_eq!(parse_tree(&write_tree(&t)).unwrap().level(2).unwrap(), t.level(2).unwrap());
        assert!(parse_tree("table\n0: -\n1: 1\n2: 00\n").is_err());
        let d = parse_tree("rule diagonal depth=6 guessers=zeros,ones").unwrap();
        assert!(!d.contains(&[false; 4]));
        assert_eq!(parse_tree("rule periodic 10").unwrap().level(3).unwrap(), vec![vec![true, false, true]]);
    }

    #[test]
    fn elements_and_handles() {
        let m = parse_fragment("chain a lo=-2 hi=2 labels=01101\nzero=a:0").unwrap();
        let es = parse_elements("a:1, a:-2", &m).unwrap();
        assert_eq!(es, vec![Element::new(0, 1), Element::new(0, -2)]);
        assert!(parse_elements("a:7", &m).is_err());
        assert_eq!(parse_handles("3,1").unwrap(), vec![3, 1]);
    }
}
