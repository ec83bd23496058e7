//! Terms, triples, graphs and prefix maps shared by every other module.

mod graph;
mod prefix;
mod term;

pub use graph::TripleGraph;
pub use prefix::{PrefixError, PrefixMap};
pub(crate) use prefix::is_local_char;
pub use term::{Literal, Term, TermError, Triple, is_absolute_iri};
pub(crate) use term::escape_string;
