//! Well-known namespaces and IRIs.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const OTTR: &str = "http://ns.ottr.xyz/0.4/";

pub const OTTR_TRIPLE: &str = "http://ns.ottr.xyz/0.4/Triple";
/// Parameter type accepting IRIs only.
pub const OTTR_IRI: &str = "http://ns.ottr.xyz/0.4/IRI";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
/// Top of the parameter type lattice.
pub const RDFS_RESOURCE: &str = "http://www.w3.org/2000/01/rdf-schema#Resource";
/// Accepts any literal.
pub const RDFS_LITERAL: &str = "http://www.w3.org/2000/01/rdf-schema#Literal";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

pub const DEFAULT_PREFIXES: [(&str, &str); 5] = [
    ("ottr", OTTR),
    ("owl", OWL),
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("xsd", XSD),
];

/// Namespaces ignored by connectivity analysis unless configured otherwise.
pub const DEFAULT_EXCLUDED_NAMESPACES: [&str; 4] = [RDF, RDFS, OWL, XSD];
