//! The stOTTR-style template syntax: parsing and serialization.
//!
//! ```text
//! file        = { prefixDecl | stmt } ;
//! prefixDecl  = "@prefix" PNAME ":" IRIREF "." ;
//! stmt        = templateDef | instance "." ;
//! templateDef = name "[" [ param { "," param } ] "]" [ "::" "{" [ instance { "," instance } ] "}" ] "." ;
//! param       = [ "?" | "!" | "?!" | "!?" ] [ ptype ] VARIABLE [ "=" term ] ;
//! ptype       = name | "List" "<" ptype ">" ;
//! instance    = [ ("cross"|"zipMin"|"zipMax") "|" ] name "(" [ arg { "," arg } ] ")" ;
//! arg         = [ "++" ] ( term | VARIABLE | "none" | "(" [ arg { "," arg } ] ")" ) ;
//! term        = name | LITERAL | BLANK ;
//! name        = PNAME ":" LOCAL | IRIREF ;
//! ```
//!
//! `#` starts a comment. When an instance has an expansion mode but no
//! argument is marked with `++`, every list-valued argument is expanded.

mod ast;
mod lexer;
mod parser;
mod writer;

use std::fmt;

pub use ast::{Argument, ExpansionMode, Instance, Library, ParamType, Parameter, TemplateDefinition};
pub use parser::{parse_instances, parse_library, parse_term, parse_type};
pub(crate) use parser::body_variables;
pub use writer::{instance_text, serialize_instances, serialize_library, template_text, term_text};

/// A syntax or resolution error with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;
    use crate::vocab::{OTTR_TRIPLE, RDF_LANG_STRING};

    pub(crate) const PIZZA: &str = r#"
@prefix ax: <http://tpl.ex.org/axiom/> .
@prefix pz: <http://tpl.ex.org/pizza/> .

ax:SubClassOf[ottr:IRI ?sub, ottr:IRI ?super] :: {
    ottr:Triple(?sub, rdfs:subClassOf, ?super)
} .

pz:Pizza[ottr:IRI ?name, rdf:langString ?label] :: {
    ottr:Triple(?name, rdf:type, owl:Class),
    ax:SubClassOf(?name, pz:Pizza),
    ottr:Triple(?name, rdfs:label, ?label)
} .
"#;

    #[test]
    fn pizza_library_shape() {
        let lib = parse_library(PIZZA).unwrap();
        assert_eq!(lib.templates.len(), 2);
        assert_eq!(lib.get("http://tpl.ex.org/axiom/SubClassOf").unwrap().arity(), 2);
        let pizza = lib.get("http://tpl.ex.org/pizza/Pizza").unwrap();
        assert_eq!(pizza.arity(), 2);
        assert_eq!(pizza.parameters[1].ptype, ParamType::Literal(RDF_LANG_STRING.into()));
        assert_eq!(pizza.body_instances()[0].template, OTTR_TRIPLE);
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_library("").unwrap(), Library::default());
        assert_eq!(parse_library("  # only a comment\n").unwrap().templates.len(), 0);
    }

    #[test]
    fn unclosed_argument_list_points_at_brace() {
        let text = "pz:Broken[?x] :: { ottr:Triple(?x, }";
        let diags = parse_library(text).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!((diags[0].line, diags[0].column), (1, text.find('}').unwrap() + 1));
    }

    #[test]
    fn instance_with_language_literal() {
        let lib = parse_library(PIZZA).unwrap();
        let text = "@prefix p: <http://ex.org/pizzas/> .\npz:Pizza(p:Margherita, \"Margherita\"@en) .";
        let insts = parse_instances(text, &lib).unwrap();
        assert_eq!(
            insts,
            vec![Instance::new(
                "http://tpl.ex.org/pizza/Pizza",
                [Term::Iri("http://ex.org/pizzas/Margherita".into()), Term::lang_literal("Margherita", "en")]
            )]
        );
    }

    #[test]
    fn cross_marks_list_arguments() {
        let lib = parse_library("@prefix ex: <http://ex.org/> .").unwrap();
        let insts = parse_instances("cross | ex:T((ex:a, ex:b), ex:c) .", &lib).unwrap();
        assert_eq!(insts.len(), 1);
        assert_eq!(insts[0].mode, Some(ExpansionMode::Cross));
        let a = Term::Iri("http://ex.org/a".into());
        let b = Term::Iri("http://ex.org/b".into());
        assert_eq!(insts[0].arguments[0], Argument { term: Term::List(vec![a, b]), expand: true });
        assert_eq!(insts[0].arguments[1], Argument { term: Term::Iri("http://ex.org/c".into()), expand: false });
    }

    #[test]
    fn none_keyword() {
        let lib = parse_library("@prefix ex: <http://ex.org/> .").unwrap();
        let insts = parse_instances("ex:T(none) .", &lib).unwrap();
        assert_eq!(insts, vec![Instance::new("http://ex.org/T", [Term::None])]);
    }

    #[test]
    fn resolution_errors() {
        let diags = parse_library("xx:T[?a] .").unwrap_err();
        assert!(diags[0].message.contains("unbound prefix 'xx'"));

        let diags = parse_library("@prefix ex: <http://ex.org/> .\nex:T[?a] .\nex:T[?b] .").unwrap_err();
        assert!(diags[0].message.contains("duplicate"));
        assert_eq!(diags[0].line, 3);

        let diags = parse_library("ottr:Triple[?a] .").unwrap_err();
        assert!(diags[0].message.contains("cannot be redefined"));

        let diags = parse_library("@prefix ex: <http://ex.org/> .\n@prefix ex: <http://ex.com/> .").unwrap_err();
        assert!(diags[0].message.contains("cannot rebind"));

        let diags =
            parse_library("@prefix ex: <http://ex.org/> .\nex:T[?a] :: { ottr:Triple(?a, ex:p, ?b) } .").unwrap_err();
        assert!(diags[0].message.contains("?b"));
    }

    #[test]
    fn unknown_escape_in_instances() {
        let lib = parse_library("@prefix ex: <http://ex.org/> .").unwrap();
        let diags = parse_instances(r#"ex:T("a\z") ."#, &lib).unwrap_err();
        assert!(diags[0].message.starts_with("UnknownEscape"));
    }

    #[test]
    fn instances_rejected_in_library_and_vice_versa() {
        assert!(parse_library("@prefix ex: <http://ex.org/> .\nex:T(ex:a) .").is_err());
        let lib = parse_library("@prefix ex: <http://ex.org/> .").unwrap();
        assert!(parse_instances("ex:T[?a] .", &lib).is_err());
        assert!(parse_instances("ex:T(?a) .", &lib).is_err());
    }

    #[test]
    fn modifiers_defaults_and_signature_only() {
        let text = r#"@prefix ex: <http://ex.org/> .
ex:T[?!ottr:IRI ?a, ? ?b = "x", !List<List<xsd:int>> ?c, ?d] ."#;
        let lib = parse_library(text).unwrap();
        let t = lib.get("http://ex.org/T").unwrap();
        assert!(t.body.is_none());
        assert!(t.parameters[0].optional && t.parameters[0].nonblank);
        assert_eq!(t.parameters[0].ptype, ParamType::Iri);
        assert!(t.parameters[1].optional && !t.parameters[1].nonblank);
        assert_eq!(t.parameters[1].default, Some(Term::literal("x")));
        assert!(t.parameters[2].nonblank);
        assert_eq!(t.parameters[2].ptype.list_depth(), 2);
        assert_eq!(t.parameters[3].ptype, ParamType::Top);
        let out = serialize_library(&lib);
        assert!(!out.contains("::"));
        assert_eq!(parse_library(&out).unwrap(), lib);
    }

    #[test]
    fn optional_list_type() {
        let lib = parse_library("@prefix ex: <http://ex.org/> .\nex:T[?List<ottr:IRI> ?xs] .").unwrap();
        let p = &lib.get("http://ex.org/T").unwrap().parameters[0];
        assert!(p.optional);
        assert_eq!(p.ptype, ParamType::list_of(ParamType::Iri));
        assert_eq!(parse_library(&serialize_library(&lib)).unwrap(), lib);
    }

    #[test]
    fn list_nesting_limit() {
        assert!(parse_library("@prefix ex: <http://ex.org/> .\nex:T[List<List<List<ottr:IRI>>> ?a] .").is_err());
    }

    #[test]
    fn pizza_round_trip() {
        let lib = parse_library(PIZZA).unwrap();
        let text = serialize_library(&lib);
        assert_eq!(parse_library(&text).unwrap(), lib);
        assert_eq!(serialize_library(&parse_library(&text).unwrap()), text);
    }

    #[test]
    fn empty_library_serializes_to_prefixes_only() {
        let lib = parse_library("@prefix ex: <http://ex.org/> .").unwrap();
        assert_eq!(serialize_library(&lib), "@prefix ex: <http://ex.org/> .\n");
        assert_eq!(serialize_library(&Library::default()), "");
    }

    #[test]
    fn single_terms() {
        let p = crate::model::PrefixMap::well_known();
        assert_eq!(parse_term("\"21.5\"^^xsd:double", &p).unwrap(), Term::typed_literal("21.5", crate::vocab::XSD.to_owned() + "double"));
        assert!(parse_term("?x", &p).is_err());
        assert!(parse_term("ex:a", &p).is_err());
        assert_eq!(parse_type("List<ottr:IRI>", &p).unwrap(), ParamType::list_of(ParamType::Iri));
    }
}
