use std::fmt;

use thiserror::Error;

use crate::vocab::{RDF_LANG_STRING, XSD_STRING};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("not an absolute IRI: {0}")]
    RelativeIri(String),
    #[error("{position} may not be {term}")]
    BadTriplePosition { position: &'static str, term: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub datatype: String,
    pub lang: Option<String>,
}

impl Literal {
    /// Plain literal, typed `xsd:string`.
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: XSD_STRING.to_string(), lang: None }
    }

    pub fn lang(lexical: impl Into<String>, tag: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: RDF_LANG_STRING.to_string(),
            lang: Some(tag.into()),
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: datatype.into(), lang: None }
    }
}

/// The atoms of arguments and triples.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal(Literal),
    Blank(String),
    Variable(String),
    None,
    List(Vec<Term>),
}

/// `scheme ":" ...` with an RFC 3986 scheme.
pub fn is_absolute_iri(s: &str) -> bool {
    let Some((scheme, _)) = s.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && !s.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Term, TermError> {
        let value = value.into();
        if is_absolute_iri(&value) { Ok(Term::Iri(value)) } else { Err(TermError::RelativeIri(value)) }
    }

    pub fn literal(lexical: impl Into<String>) -> Term {
        Term::Literal(Literal::plain(lexical))
    }

    pub fn lang_literal(lexical: impl Into<String>, tag: impl Into<String>) -> Term {
        Term::Literal(Literal::lang(lexical, tag))
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Term {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn blank(label: impl Into<String>) -> Term {
        Term::Blank(label.into())
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    /// True when the term (recursively) contains no variables.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) => false,
            Term::List(items) => items.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Term::Iri(_) => "an IRI",
            Term::Literal(_) => "a literal",
            Term::Blank(_) => "a blank node",
            Term::Variable(_) => "a variable",
            Term::None => "none",
            Term::List(_) => "a list",
        }
    }

    /// Calls `f` on this term and every nested list member.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::List(items) = self {
            for item in items {
                item.visit(f);
            }
        }
    }
}

fn write_escaped_iri(f: &mut fmt::Formatter<'_>, iri: &str) -> fmt::Result {
    f.write_str("<")?;
    for c in iri.chars() {
        match c {
            '\u{0}'..='\u{20}' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                write!(f, "\\u{:04X}", c as u32)?
            }
            _ => write!(f, "{c}")?,
        }
    }
    f.write_str(">")
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Canonical N-Triples syntax. Variables, `none` and lists have no N-Triples
/// form and are rendered in the template syntax instead.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write_escaped_iri(f, iri),
            Term::Literal(lit) => {
                write!(f, "\"{}\"", escape_string(&lit.lexical))?;
                if let Some(tag) = &lit.lang {
                    write!(f, "@{tag}")
                } else if lit.datatype != XSD_STRING {
                    f.write_str("^^")?;
                    write_escaped_iri(f, &lit.datatype)
                } else {
                    Ok(())
                }
            }
            Term::Blank(label) => write!(f, "_:{label}"),
            Term::Variable(name) => write!(f, "?{name}"),
            Term::None => f.write_str("none"),
            Term::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A ground RDF triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple, TermError> {
        let bad = |position, term: &Term| TermError::BadTriplePosition { position, term: term.to_string() };
        if !matches!(subject, Term::Iri(_) | Term::Blank(_)) {
            return Err(bad("subject", &subject));
        }
        if !matches!(predicate, Term::Iri(_)) {
            return Err(bad("predicate", &predicate));
        }
        if !matches!(object, Term::Iri(_) | Term::Blank(_) | Term::Literal(_)) {
            return Err(bad("object", &object));
        }
        Ok(Triple { subject, predicate, object })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
