//! Finite fragments of labelled Z-chain structures.

mod eval;
mod fragment;
mod oracle;
mod rtype;
mod window;

pub use eval::{eval_qf, eval_windowed, Assignment, Compiled};
pub use fragment::{bits_to_string, parse_bits, ChainInterval, Element, ModelFragment, SignedDistance};
pub use oracle::{check_dictionary, Handle, Hidden, Oracle, OracleModel, OracleQuery};
pub use rtype::{r_type, rtype_count_bound, RType};
pub use window::Window;
