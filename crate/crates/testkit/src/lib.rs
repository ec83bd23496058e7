//! Test support: seeded random template libraries and an independent
//! brute-force expansion oracle.

use std::collections::HashMap;

use ottrkit::model::{Term, Triple, TripleGraph};
use ottrkit::vocab::{OTTR_TRIPLE, XSD};
use ottrkit::{Argument, ExpansionMode, Instance, Library, ParamType, Parameter, PrefixMap, TemplateDefinition};
use rand::prelude::*;
use rand::seq::IndexedRandom;
use rand_chacha::ChaCha8Rng;

pub const GEN_NS: &str = "http://ex.org/gen/";

/// Bounds for generated libraries.
#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_templates: usize,
    pub max_params: usize,
    pub max_nesting: usize,
    pub max_list_len: usize,
    pub max_body: usize,
    pub max_instances: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_templates: 6, max_params: 4, max_nesting: 3, max_list_len: 3, max_body: 3, max_instances: 4 }
    }
}

fn iri(local: impl std::fmt::Display) -> Term {
    Term::Iri(format!("{GEN_NS}{local}"))
}

fn xsd(local: &str) -> String {
    format!("{XSD}{local}")
}

fn random_type(rng: &mut ChaCha8Rng) -> ParamType {
    match rng.random_range(0..7) {
        0 => ParamType::Top,
        1 | 2 => ParamType::Iri,
        3 => ParamType::Literal(xsd("string")),
        4 => ParamType::Literal(xsd("integer")),
        5 => ParamType::list_of(ParamType::Iri),
        _ => ParamType::list_of(ParamType::Literal(xsd("string"))),
    }
}

/// A ground, non-`none` value of type `ptype`. Blank nodes only when allowed.
pub fn random_value(rng: &mut ChaCha8Rng, ptype: &ParamType, allow_blank: bool, max_list: usize) -> Term {
    match ptype {
        ParamType::Iri => iri(format!("v{}", rng.random_range(0..6))),
        ParamType::Literal(dt) if dt == &xsd("integer") => {
            Term::typed_literal(rng.random_range(-5..50).to_string(), dt.clone())
        }
        ParamType::Literal(dt) => match rng.random_range(0..3) {
            0 => Term::literal(format!("s{}", rng.random_range(0..4))),
            1 => Term::typed_literal(format!("t\"{}\\", rng.random_range(0..3)), dt.clone()),
            _ => Term::typed_literal(format!("s {}", rng.random_range(0..4)), dt.clone()),
        },
        ParamType::List(inner) => {
            let n = rng.random_range(0..=max_list);
            Term::List((0..n).map(|_| random_value(rng, inner, false, max_list)).collect())
        }
        ParamType::Top => match rng.random_range(0..5) {
            0 if allow_blank => Term::blank(format!("x{}", rng.random_range(0..3))),
            0 | 1 => Term::lang_literal(format!("l{}", rng.random_range(0..3)), "en"),
            2 => Term::literal(format!("s{}", rng.random_range(0..4))),
            _ => iri(format!("v{}", rng.random_range(0..6))),
        },
    }
}

fn random_params(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Vec<Parameter> {
    let n = rng.random_range(0..=cfg.max_params);
    (0..n)
        .map(|k| {
            let ptype = random_type(rng);
            let mut p = Parameter::new(format!("p{k}"), ptype.clone());
            if rng.random_bool(0.25) {
                p = p.optional();
            }
            if rng.random_bool(0.15) {
                p = p.nonblank();
            }
            if rng.random_bool(0.2) {
                p = p.with_default(random_value(rng, &ptype, false, cfg.max_list_len));
            }
            p
        })
        .collect()
}

fn var(p: &Parameter) -> Term {
    Term::Variable(p.name.clone())
}

fn random_mode(rng: &mut ChaCha8Rng) -> ExpansionMode {
    *[ExpansionMode::Cross, ExpansionMode::ZipMin, ExpansionMode::ZipMax].choose(rng).expect("non-empty")
}

/// A body instance of `ottr:Triple` over the given parameters.
fn triple_call(rng: &mut ChaCha8Rng, params: &[Parameter], cfg: &GenConfig) -> Instance {
    let iri_vars: Vec<&Parameter> = params.iter().filter(|p| p.ptype == ParamType::Iri).collect();
    let iri_lists: Vec<&Parameter> = params.iter().filter(|p| p.ptype == ParamType::list_of(ParamType::Iri)).collect();
    let lit_lists: Vec<&Parameter> = params
        .iter()
        .filter(|p| matches!(&p.ptype, ParamType::List(inner) if matches!(**inner, ParamType::Literal(_))))
        .collect();
    let scalar_vars: Vec<&Parameter> = params.iter().filter(|p| !matches!(p.ptype, ParamType::List(_))).collect();

    let mut marked = Vec::new();
    let subject = match rng.random_range(0..4) {
        0 if !iri_lists.is_empty() => {
            marked.push(0);
            var(iri_lists.choose(rng).expect("non-empty"))
        }
        0 | 1 if !iri_vars.is_empty() => var(iri_vars.choose(rng).expect("non-empty")),
        2 => Term::blank(format!("n{}", rng.random_range(0..2))),
        _ => iri(format!("s{}", rng.random_range(0..4))),
    };
    let predicate = match rng.random_range(0..5) {
        0 if !iri_vars.is_empty() => var(iri_vars.choose(rng).expect("non-empty")),
        _ => iri(format!("p{}", rng.random_range(0..4))),
    };
    let object = match rng.random_range(0..5) {
        0 if !lit_lists.is_empty() || !iri_lists.is_empty() => {
            marked.push(2);
            let pool: Vec<&&Parameter> = lit_lists.iter().chain(iri_lists.iter()).collect();
            var(pool.choose(rng).expect("non-empty"))
        }
        0..=2 if !scalar_vars.is_empty() => var(scalar_vars.choose(rng).expect("non-empty")),
        3 => Term::blank(format!("n{}", rng.random_range(0..2))),
        _ => random_value(rng, &ParamType::Top, false, cfg.max_list_len),
    };
    let inst = Instance::new(OTTR_TRIPLE, [subject, predicate, object]);
    if marked.is_empty() { inst } else { inst.expanded(random_mode(rng), &marked) }
}

/// A body instance of `callee`, with arguments drawn from `params`.
fn template_call(rng: &mut ChaCha8Rng, callee: &TemplateDefinition, params: &[Parameter], cfg: &GenConfig) -> Instance {
    let mut args = Vec::with_capacity(callee.arity());
    let mut marked = Vec::new();
    for (i, q) in callee.parameters.iter().enumerate() {
        let same: Vec<&Parameter> = params
            .iter()
            .filter(|p| ottrkit::typecheck::type_compatible(&p.ptype, &q.ptype))
            .filter(|p| !matches!(p.ptype, ParamType::List(_)) || matches!(q.ptype, ParamType::List(_)))
            .collect();
        let lists: Vec<&Parameter> = params
            .iter()
            .filter(|p| matches!(&p.ptype, ParamType::List(inner) if ottrkit::typecheck::type_compatible(inner, &q.ptype)))
            .collect();
        let term = match rng.random_range(0..6) {
            0 if !q.rejects_none() => Term::None,
            1 if !lists.is_empty() => {
                marked.push(i);
                var(lists.choose(rng).expect("non-empty"))
            }
            0..=3 if !same.is_empty() => var(same.choose(rng).expect("non-empty")),
            _ => random_value(rng, &q.ptype, !q.nonblank, cfg.max_list_len),
        };
        args.push(term);
    }
    let inst = Instance::new(callee.iri.clone(), args);
    if marked.is_empty() { inst } else { inst.expanded(random_mode(rng), &marked) }
}

/// A random acyclic, well-typed library. Template `i` may only call
/// templates `j < i`, and nesting never exceeds `cfg.max_nesting`.
pub fn random_library(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Library {
    let mut lib = Library::default();
    lib.prefixes.insert("ex", GEN_NS).expect("fresh prefix map");
    let n = rng.random_range(1..=cfg.max_templates);
    let mut levels: Vec<usize> = Vec::with_capacity(n);
    let mut defs: Vec<TemplateDefinition> = Vec::with_capacity(n);
    for i in 0..n {
        let parameters = random_params(rng, cfg);
        let callable: Vec<usize> = (0..i).filter(|&j| levels[j] < cfg.max_nesting).collect();
        let body_len = rng.random_range(1..=cfg.max_body);
        let mut body = Vec::with_capacity(body_len);
        let mut level = 1;
        for _ in 0..body_len {
            if !callable.is_empty() && rng.random_bool(0.5) {
                let j = *callable.choose(rng).expect("non-empty");
                level = level.max(levels[j] + 1);
                body.push(template_call(rng, &defs[j], &parameters, cfg));
            } else {
                body.push(triple_call(rng, &parameters, cfg));
            }
        }
        let def = TemplateDefinition {
            iri: format!("{GEN_NS}T{i}"),
            parameters,
            body: Some(body),
        };
        levels.push(level);
        defs.push(def);
    }
    for def in defs {
        lib.insert(def);
    }
    lib
}

/// Random ground top-level instances of templates in `lib`.
pub fn random_instances(rng: &mut ChaCha8Rng, lib: &Library, cfg: &GenConfig) -> Vec<Instance> {
    let templates: Vec<&TemplateDefinition> = lib.templates.values().collect();
    if templates.is_empty() {
        return Vec::new();
    }
    let n = rng.random_range(1..=cfg.max_instances);
    (0..n)
        .map(|_| {
            let t = templates.choose(rng).expect("non-empty");
            let mut marked = Vec::new();
            let args: Vec<Term> = t
                .parameters
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    if !p.rejects_none() && rng.random_bool(0.3) {
                        Term::None
                    } else if matches!(p.ptype, ParamType::Iri | ParamType::Top) && rng.random_bool(0.2) {
                        marked.push(i);
                        random_value(rng, &ParamType::list_of(ParamType::Iri), false, cfg.max_list_len)
                    } else {
                        random_value(rng, &p.ptype, !p.nonblank, cfg.max_list_len)
                    }
                })
                .collect();
            let inst = Instance::new(t.iri.clone(), args);
            if marked.is_empty() { inst } else { inst.expanded(random_mode(rng), &marked) }
        })
        .collect()
}

/// A library and instances from one seed.
pub fn random_case(seed: u64, cfg: &GenConfig) -> (Library, Vec<Instance>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lib = random_library(&mut rng, cfg);
    let instances = random_instances(&mut rng, &lib, cfg);
    (lib, instances)
}

pub fn gen_prefixes() -> PrefixMap {
    let mut p = PrefixMap::well_known();
    p.insert("ex", GEN_NS).expect("fresh label");
    p
}

/// A pending instance in the oracle's worklist.
struct Work {
    template: String,
    args: Vec<Argument>,
    mode: Option<ExpansionMode>,
    /// Index of the top-level instance this work item descends from.
    origin: usize,
    depth: usize,
}

/// Expansion by repeated rewriting: pop an instance, replace it by its
/// list-expanded copies or its substituted body, until only triples remain.
///
/// Semantics: list expansion (`cross` is the product over marked lists,
/// `zipMin`/`zipMax` zip to the shortest/longest, padding with `none`, a
/// marked `none` stays as is); `none` takes the parameter default, and an
/// instance with `none` left on a non-optional parameter produces nothing;
/// blank nodes written in a body of the expansion of top-level instance `k`
/// become `b{k}_{label}`.
pub fn oracle_expand(lib: &Library, instances: &[Instance], max_depth: usize) -> Result<TripleGraph, String> {
    let mut graph = TripleGraph::new();
    let mut work: Vec<Work> = instances
        .iter()
        .enumerate()
        .rev()
        .map(|(k, inst)| Work { template: inst.template.clone(), args: inst.arguments.clone(), mode: inst.mode, origin: k, depth: 1 })
        .collect();

    while let Some(item) = work.pop() {
        if item.depth > max_depth {
            return Err("depth".into());
        }
        let template = lib.get(&item.template).ok_or_else(|| format!("unknown {}", item.template))?;
        if template.parameters.len() != item.args.len() {
            return Err("arity".into());
        }

        if let Some(mode) = item.mode {
            let lists: Vec<(usize, Vec<Term>)> = item
                .args
                .iter()
                .enumerate()
                .filter(|(_, a)| a.expand && a.term != Term::None)
                .map(|(i, a)| match &a.term {
                    Term::List(xs) => Ok((i, xs.clone())),
                    _ => Err("not a list".to_string()),
                })
                .collect::<Result<_, _>>()?;
            let rows: Vec<Vec<Term>> = match mode {
                ExpansionMode::Cross => {
                    // odometer over all index combinations
                    let total: usize = lists.iter().map(|(_, xs)| xs.len()).product();
                    (0..total)
                        .map(|mut n| {
                            let mut picks = vec![Term::None; lists.len()];
                            for (slot, (_, xs)) in lists.iter().enumerate().rev() {
                                picks[slot] = xs[n % xs.len()].clone();
                                n /= xs.len();
                            }
                            picks
                        })
                        .collect()
                }
                ExpansionMode::ZipMin | ExpansionMode::ZipMax => {
                    let len = if lists.is_empty() {
                        1
                    } else if mode == ExpansionMode::ZipMin {
                        lists.iter().map(|(_, xs)| xs.len()).min().unwrap_or(0)
                    } else {
                        lists.iter().map(|(_, xs)| xs.len()).max().unwrap_or(0)
                    };
                    (0..len).map(|r| lists.iter().map(|(_, xs)| xs.get(r).cloned().unwrap_or(Term::None)).collect()).collect()
                }
            };
            let mut expanded = Vec::new();
            for row in rows {
                let mut args: Vec<Argument> =
                    item.args.iter().map(|a| Argument { term: a.term.clone(), expand: false }).collect();
                for ((i, _), t) in lists.iter().zip(row) {
                    args[*i].term = t;
                }
                expanded.push(Work { template: item.template.clone(), args, mode: None, origin: item.origin, depth: item.depth });
            }
            // keep left-to-right order on the stack
            work.extend(expanded.into_iter().rev());
            continue;
        }

        let mut env: HashMap<String, Term> = HashMap::new();
        let mut dropped = false;
        for (p, a) in template.parameters.iter().zip(&item.args) {
            let v = if a.term == Term::None { p.default.clone().unwrap_or(Term::None) } else { a.term.clone() };
            if v == Term::None && !p.optional && p.default.is_none() {
                dropped = true;
            }
            env.insert(p.name.clone(), v);
        }
        if dropped {
            continue;
        }
        if template.iri == OTTR_TRIPLE {
            let s = env.remove("subject").expect("triple signature");
            let p = env.remove("predicate").expect("triple signature");
            let o = env.remove("object").expect("triple signature");
            let ok_s = matches!(s, Term::Iri(_) | Term::Blank(_));
            let ok_p = matches!(p, Term::Iri(_));
            let ok_o = matches!(o, Term::Iri(_) | Term::Blank(_) | Term::Literal(_));
            if !(ok_s && ok_p && ok_o) {
                return Err("bad triple".into());
            }
            graph.insert(Triple::new(s, p, o).map_err(|e| e.to_string())?);
            continue;
        }
        let body = template.body.as_ref().ok_or("no body")?;
        let mut children = Vec::with_capacity(body.len());
        for b in body {
            let args = b
                .arguments
                .iter()
                .map(|a| Argument { term: substitute(&a.term, &env, item.origin), expand: a.expand })
                .collect();
            children.push(Work { template: b.template.clone(), args, mode: b.mode, origin: item.origin, depth: item.depth + 1 });
        }
        work.extend(children.into_iter().rev());
    }
    Ok(graph)
}

fn substitute(term: &Term, env: &HashMap<String, Term>, origin: usize) -> Term {
    match term {
        Term::Variable(name) => env.get(name).cloned().unwrap_or_else(|| term.clone()),
        Term::Blank(label) => Term::Blank(format!("b{origin}_{label}")),
        Term::List(xs) => Term::List(xs.iter().map(|x| substitute(x, env, origin)).collect()),
        _ => term.clone(),
    }
}
