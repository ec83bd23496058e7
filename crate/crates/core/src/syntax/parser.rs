use std::collections::{BTreeMap, BTreeSet};

use super::ParseDiagnostic;
use super::ast::{Argument, ExpansionMode, Instance, Library, ParamType, Parameter, TemplateDefinition};
use super::lexer::{Pos, Tok, Token, tokenize};
use crate::model::{Literal, PrefixMap, Term, is_absolute_iri};
use crate::vocab::{OTTR_TRIPLE, XSD_STRING};

#[derive(Debug, Clone)]
enum RawName {
    Prefixed { label: String, local: String },
    Iri(String),
}

#[derive(Debug, Clone)]
enum RawTerm {
    Name(RawName, Pos),
    Literal { lexical: String, lang: Option<String>, datatype: Option<(RawName, Pos)> },
    Blank(String),
    Var(String, Pos),
    None,
    List(Vec<RawTerm>),
}

#[derive(Debug, Clone)]
enum RawType {
    Name(RawName, Pos),
    List(Box<RawType>),
}

#[derive(Debug, Clone)]
struct RawParam {
    optional: bool,
    nonblank: bool,
    ptype: Option<RawType>,
    name: String,
    default: Option<RawTerm>,
    pos: Pos,
}

#[derive(Debug, Clone)]
struct RawInstance {
    mode: Option<ExpansionMode>,
    name: RawName,
    args: Vec<(RawTerm, bool)>,
    pos: Pos,
}

#[derive(Debug, Clone)]
enum RawStmt {
    Prefix { label: String, namespace: String, pos: Pos },
    Template { name: RawName, params: Vec<RawParam>, body: Option<Vec<RawInstance>>, pos: Pos },
    Instance(RawInstance),
}

struct Parser {
    tokens: Vec<Token>,
    i: usize,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.i].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let j = (self.i + n).min(self.tokens.len() - 1);
        &self.tokens[j].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.i].pos
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.i].clone();
        if self.i + 1 < self.tokens.len() {
            self.i += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseDiagnostic {
        let pos = self.pos();
        ParseDiagnostic {
            line: pos.line,
            column: pos.column,
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn file(&mut self) -> PResult<Vec<RawStmt>> {
        let mut stmts = Vec::new();
        while *self.peek() != Tok::Eof {
            stmts.push(self.statement()?);
        }
        Ok(stmts)
    }

    fn statement(&mut self) -> PResult<RawStmt> {
        let pos = self.pos();
        if *self.peek() == Tok::PrefixKw {
            self.next();
            let label = match self.peek().clone() {
                Tok::PName { label, local } if local.is_empty() => {
                    self.next();
                    label
                }
                _ => return Err(self.error("prefix label such as 'ex:'")),
            };
            let namespace = match self.peek().clone() {
                Tok::IriRef(iri) => {
                    self.next();
                    iri
                }
                _ => return Err(self.error("namespace IRI")),
            };
            self.expect(Tok::Dot, "'.'")?;
            return Ok(RawStmt::Prefix { label, namespace, pos });
        }
        let is_template = matches!(self.peek(), Tok::PName { .. } | Tok::IriRef(_)) && *self.peek_at(1) == Tok::LBracket;
        if is_template {
            let name = self.name()?;
            self.expect(Tok::LBracket, "'['")?;
            let mut params = Vec::new();
            if *self.peek() != Tok::RBracket {
                params.push(self.parameter()?);
                while self.eat(&Tok::Comma) {
                    params.push(self.parameter()?);
                }
            }
            self.expect(Tok::RBracket, "',' or ']'")?;
            let body = if self.eat(&Tok::DColon) {
                self.expect(Tok::LBrace, "'{'")?;
                let mut body = Vec::new();
                if *self.peek() != Tok::RBrace {
                    body.push(self.instance()?);
                    while self.eat(&Tok::Comma) {
                        body.push(self.instance()?);
                    }
                }
                self.expect(Tok::RBrace, "',' or '}'")?;
                Some(body)
            } else {
                None
            };
            self.expect(Tok::Dot, "'.'")?;
            Ok(RawStmt::Template { name, params, body, pos })
        } else {
            let inst = self.instance()?;
            self.expect(Tok::Dot, "'.'")?;
            Ok(RawStmt::Instance(inst))
        }
    }

    fn name(&mut self) -> PResult<RawName> {
        match self.peek().clone() {
            Tok::PName { label, local } => {
                self.next();
                Ok(RawName::Prefixed { label, local })
            }
            Tok::IriRef(iri) => {
                self.next();
                Ok(RawName::Iri(iri))
            }
            _ => Err(self.error("a name")),
        }
    }

    fn parameter(&mut self) -> PResult<RawParam> {
        let pos = self.pos();
        let (mut optional, mut nonblank) = (false, false);
        loop {
            match self.peek() {
                Tok::Question if !optional => optional = true,
                Tok::Bang if !nonblank => nonblank = true,
                _ => break,
            }
            self.next();
        }
        let ptype = match self.peek() {
            Tok::Var(_) => None,
            _ => Some(self.ptype()?),
        };
        let name = match self.peek().clone() {
            Tok::Var(v) => {
                self.next();
                v
            }
            _ => return Err(self.error("parameter variable")),
        };
        let default = if self.eat(&Tok::Eq) { Some(self.arg_term(false)?) } else { None };
        Ok(RawParam { optional, nonblank, ptype, name, default, pos })
    }

    fn ptype(&mut self) -> PResult<RawType> {
        let pos = self.pos();
        if matches!(self.peek(), Tok::Ident(w) if w == "List") {
            self.next();
            self.expect(Tok::Lt, "'<'")?;
            let inner = self.ptype()?;
            self.expect(Tok::Gt, "'>'")?;
            return Ok(RawType::List(Box::new(inner)));
        }
        match self.peek() {
            Tok::PName { .. } | Tok::IriRef(_) => Ok(RawType::Name(self.name()?, pos)),
            _ => Err(self.error("parameter type or variable")),
        }
    }

    fn instance(&mut self) -> PResult<RawInstance> {
        let pos = self.pos();
        let mode = match self.peek() {
            Tok::Ident(w) => match ExpansionMode::from_keyword(w) {
                Some(mode) => {
                    self.next();
                    self.expect(Tok::Pipe, "'|'")?;
                    Some(mode)
                }
                None => return Err(self.error("template name")),
            },
            _ => None,
        };
        let name = match self.peek() {
            Tok::PName { .. } | Tok::IriRef(_) => self.name()?,
            _ => return Err(self.error("template name")),
        };
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.argument()?);
            while self.eat(&Tok::Comma) {
                args.push(self.argument()?);
            }
        }
        self.expect(Tok::RParen, "',' or ')'")?;
        Ok(RawInstance { mode, name, args, pos })
    }

    fn argument(&mut self) -> PResult<(RawTerm, bool)> {
        let expand = self.eat(&Tok::PlusPlus);
        Ok((self.arg_term(true)?, expand))
    }

    fn arg_term(&mut self, allow_var: bool) -> PResult<RawTerm> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let mut items = Vec::new();
                if *self.peek() != Tok::RParen {
                    items.push(self.arg_term(allow_var)?);
                    while self.eat(&Tok::Comma) {
                        items.push(self.arg_term(allow_var)?);
                    }
                }
                self.expect(Tok::RParen, "',' or ')'")?;
                Ok(RawTerm::List(items))
            }
            Tok::Var(v) if allow_var => {
                self.next();
                Ok(RawTerm::Var(v, pos))
            }
            Tok::Ident(w) if w == "none" => {
                self.next();
                Ok(RawTerm::None)
            }
            Tok::PName { .. } | Tok::IriRef(_) => Ok(RawTerm::Name(self.name()?, pos)),
            Tok::Blank(b) => {
                self.next();
                Ok(RawTerm::Blank(b))
            }
            Tok::Str(lexical) => {
                self.next();
                match self.peek().clone() {
                    Tok::LangTag(tag) => {
                        self.next();
                        Ok(RawTerm::Literal { lexical, lang: Some(tag), datatype: None })
                    }
                    Tok::Caret2 => {
                        self.next();
                        let dpos = self.pos();
                        let dt = self.name()?;
                        Ok(RawTerm::Literal { lexical, lang: None, datatype: Some((dt, dpos)) })
                    }
                    _ => Ok(RawTerm::Literal { lexical, lang: None, datatype: None }),
                }
            }
            _ => Err(self.error(if allow_var { "argument" } else { "term" })),
        }
    }
}

/// Turns raw syntax into resolved model values, collecting diagnostics.
struct Resolver {
    prefixes: PrefixMap,
    diagnostics: Vec<ParseDiagnostic>,
}

impl Resolver {
    fn diag(&mut self, pos: Pos, message: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic { line: pos.line, column: pos.column, message: message.into() });
    }

    fn name(&mut self, name: &RawName, pos: Pos) -> Option<String> {
        match name {
            RawName::Iri(iri) if is_absolute_iri(iri) => Some(iri.clone()),
            RawName::Iri(iri) => {
                self.diag(pos, format!("relative IRI <{iri}> is not allowed"));
                None
            }
            RawName::Prefixed { label, local } => match self.prefixes.get(label) {
                Some(ns) => Some(format!("{ns}{local}")),
                None => {
                    self.diag(pos, format!("unbound prefix '{label}'"));
                    None
                }
            },
        }
    }

    fn ptype(&mut self, raw: &RawType) -> Option<ParamType> {
        match raw {
            RawType::Name(name, pos) => self.name(name, *pos).map(|iri| ParamType::from_iri(&iri)),
            RawType::List(inner) => self.ptype(inner).map(ParamType::list_of),
        }
    }

    /// `scope` lists the variables in scope; `None` means variables are not allowed.
    fn term(&mut self, raw: &RawTerm, scope: Option<&BTreeMap<String, ParamType>>) -> Option<Term> {
        Some(match raw {
            RawTerm::Name(name, pos) => Term::Iri(self.name(name, *pos)?),
            RawTerm::Literal { lexical, lang: Some(tag), .. } => Term::Literal(Literal::lang(lexical, tag)),
            RawTerm::Literal { lexical, datatype: Some((dt, pos)), .. } => {
                Term::Literal(Literal::typed(lexical, self.name(dt, *pos)?))
            }
            RawTerm::Literal { lexical, .. } => Term::Literal(Literal::typed(lexical, XSD_STRING)),
            RawTerm::Blank(label) => Term::Blank(label.clone()),
            RawTerm::None => Term::None,
            RawTerm::Var(name, pos) => match scope {
                Some(vars) if vars.contains_key(name) => Term::Variable(name.clone()),
                Some(_) => {
                    self.diag(*pos, format!("variable ?{name} is not a parameter of the template"));
                    return None;
                }
                None => {
                    self.diag(*pos, format!("variable ?{name} outside a template body"));
                    return None;
                }
            },
            RawTerm::List(items) => {
                let resolved: Vec<Option<Term>> = items.iter().map(|t| self.term(t, scope)).collect();
                Term::List(resolved.into_iter().collect::<Option<Vec<_>>>()?)
            }
        })
    }

    fn instance(&mut self, raw: &RawInstance, scope: Option<&BTreeMap<String, ParamType>>) -> Option<Instance> {
        let template = self.name(&raw.name, raw.pos);
        let args: Vec<Option<Argument>> = raw
            .args
            .iter()
            .map(|(t, expand)| self.term(t, scope).map(|term| Argument { term, expand: *expand }))
            .collect();
        let mut arguments = args.into_iter().collect::<Option<Vec<_>>>()?;
        let template = template?;
        if let Some(mode) = raw.mode {
            if !arguments.iter().any(|a| a.expand) {
                // no explicit `++`: every list-valued argument is expanded
                for arg in &mut arguments {
                    arg.expand = match &arg.term {
                        Term::List(_) => true,
                        Term::Variable(v) => {
                            matches!(scope.and_then(|s| s.get(v)), Some(ParamType::List(_)))
                        }
                        _ => false,
                    };
                }
            }
            if !arguments.iter().any(|a| a.expand) {
                self.diag(raw.pos, format!("{} expansion needs at least one list argument", mode.keyword()));
                return None;
            }
        } else if arguments.iter().any(|a| a.expand) {
            self.diag(raw.pos, "'++' marker without an expansion mode");
            return None;
        }
        Some(Instance { template, arguments, mode: raw.mode })
    }

    fn template(&mut self, name: &RawName, params: &[RawParam], body: Option<&[RawInstance]>, pos: Pos) -> Option<TemplateDefinition> {
        let iri = self.name(name, pos);
        let mut parameters = Vec::new();
        let mut ok = true;
        for p in params {
            let ptype = match &p.ptype {
                Some(t) => self.ptype(t),
                None => Some(ParamType::Top),
            };
            let default = match &p.default {
                Some(RawTerm::None) => {
                    self.diag(p.pos, format!("default of ?{} cannot be none", p.name));
                    None
                }
                Some(d) => self.term(d, None).map(Some),
                None => Some(None),
            };
            match (ptype, default) {
                (Some(ptype), Some(default)) => {
                    if ptype.list_depth() > 2 {
                        self.diag(p.pos, format!("type of ?{} nests lists deeper than two levels", p.name));
                        ok = false;
                    }
                    parameters.push(Parameter {
                        name: p.name.clone(),
                        ptype,
                        optional: p.optional,
                        nonblank: p.nonblank,
                        default,
                    });
                }
                _ => ok = false,
            }
        }
        let scope: BTreeMap<String, ParamType> =
            parameters.iter().map(|p| (p.name.clone(), p.ptype.clone())).collect();
        let body = match body {
            Some(instances) => {
                let resolved: Vec<Option<Instance>> = instances.iter().map(|i| self.instance(i, Some(&scope))).collect();
                Some(resolved.into_iter().collect::<Option<Vec<_>>>())
            }
            None => None,
        };
        let iri = iri?;
        if !ok {
            return None;
        }
        let body = match body {
            Some(b) => Some(b?),
            None => None,
        };
        Some(TemplateDefinition { iri, parameters, body })
    }
}

fn collect_prefixes(stmts: &[RawStmt], diagnostics: &mut Vec<ParseDiagnostic>) -> PrefixMap {
    let mut declared = PrefixMap::new();
    for stmt in stmts {
        if let RawStmt::Prefix { label, namespace, pos } = stmt
            && let Err(e) = declared.insert(label.clone(), namespace.clone())
        {
            diagnostics.push(ParseDiagnostic { line: pos.line, column: pos.column, message: e.to_string() });
        }
    }
    declared
}

/// Parsed file contents before they are split into library and instances.
struct Document {
    declared: PrefixMap,
    templates: Vec<(TemplateDefinition, Pos)>,
    instances: Vec<(Instance, Pos)>,
}

fn parse_document(text: &str, base: &PrefixMap) -> Result<Document, Vec<ParseDiagnostic>> {
    let tokens = tokenize(text).map_err(|d| vec![d])?;
    let stmts = Parser { tokens, i: 0 }.file().map_err(|d| vec![d])?;
    let mut diagnostics = Vec::new();
    let declared = collect_prefixes(&stmts, &mut diagnostics);
    let mut resolver = Resolver { prefixes: declared.layered_over(base), diagnostics };
    let mut templates = Vec::new();
    let mut instances = Vec::new();
    for stmt in &stmts {
        match stmt {
            RawStmt::Prefix { .. } => {}
            RawStmt::Template { name, params, body, pos } => {
                if let Some(t) = resolver.template(name, params, body.as_deref(), *pos) {
                    templates.push((t, *pos));
                }
            }
            RawStmt::Instance(raw) => {
                if let Some(i) = resolver.instance(raw, None) {
                    instances.push((i, raw.pos));
                }
            }
        }
    }
    if resolver.diagnostics.is_empty() {
        Ok(Document { declared, templates, instances })
    } else {
        resolver.diagnostics.sort_by_key(|d| (d.line, d.column));
        Err(resolver.diagnostics)
    }
}

/// Parses a template library.
pub fn parse_library(text: &str) -> Result<Library, Vec<ParseDiagnostic>> {
    let doc = parse_document(text, &PrefixMap::well_known())?;
    let mut diagnostics = Vec::new();
    let mut lib = Library { prefixes: doc.declared, templates: BTreeMap::new() };
    for (_, pos) in doc.instances {
        diagnostics.push(ParseDiagnostic {
            line: pos.line,
            column: pos.column,
            message: "template instances are not allowed in a library file".into(),
        });
    }
    for (template, pos) in doc.templates {
        let at = |message: String| ParseDiagnostic { line: pos.line, column: pos.column, message };
        if template.iri == OTTR_TRIPLE {
            diagnostics.push(at("ottr:Triple is built in and cannot be redefined".into()));
        } else if lib.templates.contains_key(&template.iri) {
            diagnostics.push(at(format!("duplicate definition of template <{}>", template.iri)));
        } else {
            lib.insert(template);
        }
    }
    if diagnostics.is_empty() {
        Ok(lib)
    } else {
        diagnostics.sort_by_key(|d| (d.line, d.column));
        Err(diagnostics)
    }
}

/// Parses an instance file. Prefixes come from `library` plus any the file declares.
pub fn parse_instances(text: &str, library: &Library) -> Result<Vec<Instance>, Vec<ParseDiagnostic>> {
    let doc = parse_document(text, &library.effective_prefixes())?;
    if let Some((_, pos)) = doc.templates.first() {
        return Err(vec![ParseDiagnostic {
            line: pos.line,
            column: pos.column,
            message: "template definitions are not allowed in an instance file".into(),
        }]);
    }
    Ok(doc.instances.into_iter().map(|(i, _)| i).collect())
}

/// Parses a single ground term such as `ex:a`, `"x"@en` or `(ex:a, ex:b)`.
pub fn parse_term(text: &str, prefixes: &PrefixMap) -> Result<Term, ParseDiagnostic> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, i: 0 };
    let raw = parser.arg_term(false)?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error("end of term"));
    }
    let mut resolver = Resolver { prefixes: prefixes.clone(), diagnostics: Vec::new() };
    match resolver.term(&raw, None) {
        Some(t) => Ok(t),
        None => Err(resolver.diagnostics.remove(0)),
    }
}

/// Parses a parameter type such as `ottr:IRI` or `List<xsd:string>`.
pub fn parse_type(text: &str, prefixes: &PrefixMap) -> Result<ParamType, ParseDiagnostic> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, i: 0 };
    let raw = parser.ptype()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error("end of type"));
    }
    let mut resolver = Resolver { prefixes: prefixes.clone(), diagnostics: Vec::new() };
    resolver.ptype(&raw).ok_or_else(|| resolver.diagnostics.remove(0))
}

/// Variables used anywhere in a template body.
pub(crate) fn body_variables(body: &[Instance]) -> BTreeSet<&str> {
    let mut vars = BTreeSet::new();
    for inst in body {
        for term in inst.terms() {
            term.visit(&mut |t| {
                if let Term::Variable(v) = t {
                    vars.insert(v.as_str());
                }
            });
        }
    }
    vars
}
