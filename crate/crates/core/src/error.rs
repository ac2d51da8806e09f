use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulaError {
    Syntax { pos: usize, msg: String },
    UnknownSymbol(String),
    Arity { symbol: String, expected: usize, found: usize },
    DuplicateSymbol(String),
    ReservedSymbol(String),
    NotPrenex,
    NotQuantifierFree,
    MissingDefinition(String),
    Dictionary(String),
}

impl fmt::Display for FormulaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaError::Syntax { pos, msg } => write!(f, "syntax error at byte {pos}: {msg}"),
            FormulaError::UnknownSymbol(s) => write!(f, "unknown symbol '{s}'"),
            FormulaError::Arity { symbol, expected, found } => {
                write!(f, "'{symbol}' expects {expected} arguments, got {found}")
            }
            FormulaError::DuplicateSymbol(s) => write!(f, "symbol '{s}' declared twice"),
            FormulaError::ReservedSymbol(s) => write!(f, "'{s}' is a reserved word"),
            FormulaError::NotPrenex => f.write_str("formula is not in prenex form"),
            FormulaError::NotQuantifierFree => f.write_str("formula is not quantifier-free"),
            FormulaError::MissingDefinition(s) => write!(f, "no definition for '{s}'"),
            FormulaError::Dictionary(s) => write!(f, "dictionary: {s}"),
        }
    }
}

impl core::error::Error for FormulaError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelError {
    /// An operation needed the label of a position outside the stored
    /// interval of its chain.
    InteriorViolation {
        chain: usize,
        pos: i64,
    },
    UnknownElement {
        chain: usize,
        pos: i64,
    },
    UnknownChain(String),
    DuplicateChain(String),
    DuplicateZero,
    MissingZero,
    BadInterval {
        chain: String,
        lo: i64,
        hi: i64,
    },
    MalformedLabels {
        chain: String,
        expected: usize,
        found: usize,
    },
    UnboundVariable(String),
    UnknownHandle(u32),
    /// A tuple of the wrong length for a compiled formula.
    Arity {
        expected: usize,
        found: usize,
    },
    Unsupported(String),
    /// A dictionary definition is not functional or total on the interior.
    Definition(String),
    Formula(FormulaError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InteriorViolation { chain, pos } => {
                write!(f, "interior violation at chain {chain} position {pos}; enlarge the fragment")
            }
            ModelError::UnknownElement { chain, pos } => write!(f, "no element {chain}:{pos}"),
            ModelError::Arity { expected, found } => write!(f, "expected {expected} arguments, got {found}"),
            ModelError::UnknownChain(c) => write!(f, "unknown chain '{c}'"),
            ModelError::DuplicateChain(c) => write!(f, "chain '{c}' declared twice"),
            ModelError::DuplicateZero => f.write_str("zero declared twice"),
            ModelError::MissingZero => f.write_str("no zero declared"),
            ModelError::BadInterval { chain, lo, hi } => write!(f, "chain '{chain}': lo={lo} > hi={hi}"),
            ModelError::MalformedLabels { chain, expected, found } => {
                write!(f, "chain '{chain}': expected {expected} labels, found {found}")
            }
            ModelError::UnboundVariable(v) => write!(f, "unbound variable '{v}'"),
            ModelError::UnknownHandle(h) => write!(f, "unknown handle {h}"),
            ModelError::Unsupported(s) => write!(f, "unsupported: {s}"),
            ModelError::Definition(s) => write!(f, "definition check failed: {s}"),
            ModelError::Formula(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ModelError {}

impl From<FormulaError> for ModelError {
    fn from(e: FormulaError) -> Self {
        ModelError::Formula(e)
    }
}

/// Errors from the higher-level algorithms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    Formula(FormulaError),
    Model(ModelError),
    Tree(String),
    /// Two same-type tuples disagreed; the window is inadequate or there is a bug.
    Indiscernability {
        formula: String,
        left: String,
        right: String,
    },
    /// A witness kit could not be built.
    Kit(String),
    NotMutuallyAlgebraic(String),
    Precondition(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Formula(e) => write!(f, "{e}"),
            Error::Model(e) => write!(f, "{e}"),
            Error::Tree(s) => write!(f, "tree: {s}"),
            Error::Indiscernability { formula, left, right } => {
                write!(f, "indiscernability violated for {formula} at {left} vs {right}")
            }
            Error::Kit(s) => write!(f, "witness kit: {s}"),
            Error::NotMutuallyAlgebraic(s) => write!(f, "not mutually algebraic: {s}"),
            Error::Precondition(s) => write!(f, "precondition failed: {s}"),
        }
    }
}

impl core::error::Error for Error {}

impl From<FormulaError> for Error {
    fn from(e: FormulaError) -> Self {
        Error::Formula(e)
    }
}

impl From<ModelError> for Error {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Formula(f) => Error::Formula(f),
            other => Error::Model(other),
        }
    }
}
