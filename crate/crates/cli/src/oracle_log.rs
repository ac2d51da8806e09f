//! An oracle wrapper that records every call as a line-oriented log, and
//! replay of such logs against another oracle.

use std::cell::RefCell;
use std::collections::BTreeMap;

use defeq_core::formula::{Formula, Signature};
use defeq_core::model::{Handle, Oracle};
use defeq_core::ModelError;
use sha2::{Digest, Sha256};

/// First 16 hex digits of SHA-256 over the formula and its variable order.
pub fn formula_hash(f: &Formula, vars: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(f.to_string().as_bytes());
    h.update(b"|");
    h.update(vars.join(",").as_bytes());
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogEntry {
    Enum { i: usize, h: Option<Handle> },
    Eval { hash: String, args: Vec<Handle>, result: bool },
}

impl std::fmt::Display for LogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LogEntry::Enum { i, h: Some(h) } => write!(f, "ENUM {i} -> {h}"),
            LogEntry::Enum { i, h: None } => write!(f, "ENUM {i} -> none"),
            LogEntry::Eval { hash, args, result } => {
                write!(f, "EVAL {hash}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, " -> {}", u8::from(*result))
            }
        }
    }
}

pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(no, l)| {
            let bad = || format!("log line {}: '{l}'", no + 1);
            let (lhs, rhs) = l.split_once(" -> ").ok_or_else(bad)?;
            let mut toks = lhs.split_whitespace();
            match toks.next() {
                Some("ENUM") => {
                    let i = toks.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    let h = if rhs == "none" { None } else { Some(rhs.parse().map_err(|_| bad())?) };
                    Ok(LogEntry::Enum { i, h })
                }
                Some("EVAL") => {
                    let hash = toks.next().ok_or_else(bad)?.to_string();
                    let args = toks.map(|t| t.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
                    let result = match rhs {
                        "0" => false,
                        "1" => true,
                        _ => return Err(bad()),
                    };
                    Ok(LogEntry::Eval { hash, args, result })
                }
                _ => Err(bad()),
            }
        })
        .collect()
}

/// Wraps an oracle and logs each call.
pub struct LoggingOracle<'a, O: Oracle> {
    inner: &'a O,
    log: RefCell<Vec<LogEntry>>,
    formulas: RefCell<BTreeMap<String, (Formula, Vec<String>)>>,
}

pub struct LoggedQuery<Q> {
    inner: Q,
    hash: String,
}

impl<'a, O: Oracle> LoggingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        LoggingOracle { inner, log: RefCell::new(Vec::new()), formulas: RefCell::new(BTreeMap::new()) }
    }

    pub fn entries(&self) -> Vec<LogEntry> {
        self.log.borrow().clone()
    }

    /// Prepared formulas by hash.
    pub fn formulas(&self) -> BTreeMap<String, (Formula, Vec<String>)> {
        self.formulas.borrow().clone()
    }

    pub fn render(&self) -> String {
        self.log.borrow().iter().map(|e| format!("{e}\n")).collect()
    }
}

impl<O: Oracle> Oracle for LoggingOracle<'_, O> {
    type Query = LoggedQuery<O::Query>;

    fn signature(&self) -> &Signature {
        self.inner.signature()
    }

    fn enumerate(&self, i: usize) -> Option<Handle> {
        let h = self.inner.enumerate(i);
        self.log.borrow_mut().push(LogEntry::Enum { i, h });
        h
    }

    // one pass over the inner enumeration, logged as individual ENUM calls
    fn handles(&self) -> Vec<Handle> {
        (0..).map_while(|i| self.enumerate(i)).collect()
    }

    fn prepare(&self, f: &Formula, vars: &[String]) -> Result<Self::Query, ModelError> {
        let inner = self.inner.prepare(f, vars)?;
        let hash = formula_hash(f, vars);
        self.formulas.borrow_mut().entry(hash.clone()).or_insert_with(|| (f.clone(), vars.to_vec()));
        Ok(LoggedQuery { inner, hash })
    }

    fn eval(&self, q: &Self::Query, args: &[Handle]) -> Result<bool, ModelError> {
        let result = self.inner.eval(&q.inner, args)?;
        self.log.borrow_mut().push(LogEntry::Eval { hash: q.hash.clone(), args: args.to_vec(), result });
        Ok(result)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub evals: usize,
    pub mismatches: usize,
    pub enum_differences: usize,
}

/// Re-asks every logged query of `o`, with handles passed through `map`.
/// The formulas come from `formulas` and are re-prepared with handle
/// parameters mapped too.
pub fn replay<O: Oracle>(
    o: &O,
    log: &[LogEntry],
    formulas: &BTreeMap<String, (Formula, Vec<String>)>,
    map: &dyn Fn(Handle) -> Handle,
) -> Result<ReplayOutcome, String> {
    let mut prepared: BTreeMap<&str, O::Query> = BTreeMap::new();
    let mut out = ReplayOutcome { evals: 0, mismatches: 0, enum_differences: 0 };
    for e in log {
        match e {
            LogEntry::Enum { i, h } => {
                if o.enumerate(*i) != *h {
                    out.enum_differences += 1;
                }
            }
            LogEntry::Eval { hash, args, result } => {
                if !prepared.contains_key(hash.as_str()) {
                    let (f, vars) = formulas.get(hash).ok_or_else(|| format!("unknown formula hash {hash}"))?;
                    let q = o.prepare(&f.map_handles(map), vars).map_err(|e| e.to_string())?;
                    prepared.insert(hash, q);
                }
                let mapped: Vec<Handle> = args.iter().map(|&a| map(a)).collect();
                let got = o.eval(&prepared[hash.as_str()], &mapped).map_err(|e| e.to_string())?;
                out.evals += 1;
                if got != *result {
                    out.mismatches += 1;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_round_trip() {
        let text = "ENUM 0 -> 5\nENUM 9 -> none\nEVAL 00ff 1 2 -> 1\nEVAL 00ff -> 0\n";
        let log = parse_log(text).unwrap();
        assert_eq!(log.len(), 4);
        let back: String = log.iter().map(|e| format!("{e}\n")).collect();
        assert_eq!(back, text);
        assert!(parse_log("EVAL x 1 -> 2").is_err());
    }
}
