//! HTTP API over a loaded library: template schemas, instantiation sessions
//! with a live graph, linting and guided workflows.
//!
//! Each session is persisted as an append-only log in the state directory.
//! The log holds one instance per line in full-IRI syntax, preceded by
//! `# mint <param> <iri>` annotations, plus `# advance <workflow> <step>`
//! events. Replaying the log on startup restores the session exactly.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{StatusCode, header};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ottrkit::docgen::{TemplateDoc, classify_user_facing, signature_doc};
use ottrkit::lint::{LintConfig, lint_all};
use ottrkit::syntax::{instance_text, parse_instances, parse_term, term_text};
use ottrkit::typecheck::{check_instance, has_errors};
use ottrkit::workflow::{Binding, Workflow, resolve_name, suggest_order};
use ottrkit::{Diagnostic, DiagnosticCode, Expander, Instance, Library, PrefixMap, Term, TripleGraph};
use serde::Deserialize;
use serde_json::{Value, json};

pub struct ServiceConfig {
    pub library: Library,
    pub base: String,
    pub state_dir: Option<PathBuf>,
    pub workflows: Vec<Workflow>,
    pub docs: BTreeMap<String, TemplateDoc>,
    pub lint: LintConfig,
}

pub struct AppState {
    config: ServiceConfig,
    prefixes: PrefixMap,
    user_facing: BTreeMap<String, bool>,
    sessions: Mutex<BTreeMap<String, Arc<tokio::sync::Mutex<Session>>>>,
    next_session: AtomicU64,
}

pub type SharedState = Arc<AppState>;

struct Issued {
    step: String,
    template: String,
    completed_by: Option<usize>,
}

struct Run {
    workflow: String,
    order: Vec<String>,
    issued: Vec<Issued>,
}

impl Run {
    fn completed(&self, step: &str) -> Option<usize> {
        self.issued.iter().find(|i| i.step == step).and_then(|i| i.completed_by)
    }

    fn finished(&self) -> bool {
        self.issued.len() == self.order.len() && self.issued.iter().all(|i| i.completed_by.is_some())
    }
}

struct Session {
    id: String,
    instances: Vec<Instance>,
    graph: TripleGraph,
    minted: u64,
    run: Option<Run>,
    log: Option<PathBuf>,
}

impl Session {
    fn append(&self, lines: &[String]) -> Result<(), ApiError> {
        let Some(path) = &self.log else { return Ok(()) };
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ApiError::internal(format!("session log: {e}")))?;
        let mut text = lines.join("\n");
        text.push('\n');
        f.write_all(text.as_bytes()).map_err(|e| ApiError::internal(format!("session log: {e}")))?;
        f.sync_data().map_err(|e| ApiError::internal(format!("session log: {e}")))
    }

    /// Adds an already validated instance; returns the number of new triples.
    fn apply_instance(&mut self, inst: Instance, graph: TripleGraph) -> usize {
        let before = self.graph.len();
        let index = self.instances.len();
        if let Some(run) = &mut self.run
            && let Some(pending) = run.issued.iter_mut().find(|i| i.completed_by.is_none() && i.template == inst.template)
        {
            pending.completed_by = Some(index);
        }
        self.instances.push(inst);
        self.graph.extend(graph);
        self.graph.len() - before
    }

    fn apply_advance(&mut self, workflow: &Workflow, step: &str) {
        let restart = self.run.as_ref().is_none_or(|r| r.workflow != workflow.name || r.finished());
        if restart {
            let order = suggest_order(workflow).unwrap_or_default();
            self.run = Some(Run { workflow: workflow.name.clone(), order, issued: Vec::new() });
        }
        let run = self.run.as_mut().expect("run started");
        if run.issued.iter().all(|i| i.step != step) {
            let template = workflow.step(step).map(|s| s.template.clone()).unwrap_or_default();
            run.issued.push(Issued { step: step.to_string(), template, completed_by: None });
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": error, "message": message.into() }) }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    fn invalid(diagnostics: &[Diagnostic]) -> Self {
        let message = diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ");
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({ "error": "invalid_instance", "message": message, "diagnostics": diagnostics }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

impl AppState {
    /// Builds the state, replaying any session logs in the state directory.
    pub fn open(config: ServiceConfig) -> Result<SharedState, String> {
        let prefixes = config.library.effective_prefixes();
        let user_facing = classify_user_facing(&config.library);
        let state = AppState {
            config,
            prefixes,
            user_facing,
            sessions: Mutex::new(BTreeMap::new()),
            next_session: AtomicU64::new(1),
        };
        if let Some(dir) = &state.config.state_dir {
            std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let mut logs: Vec<(u64, PathBuf)> = Vec::new();
            for entry in std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))? {
                let path = entry.map_err(|e| e.to_string())?.path();
                let n = path
                    .file_name()
                    .and_then(|n| n.to_str())
                    .and_then(|n| n.strip_suffix(".log"))
                    .and_then(|n| n.strip_prefix('s'))
                    .and_then(|n| n.parse().ok());
                if let Some(n) = n {
                    logs.push((n, path));
                }
            }
            logs.sort();
            for (n, path) in logs {
                let session = state.replay(&format!("s{n}"), &path)?;
                state.sessions.lock().unwrap().insert(session.id.clone(), Arc::new(tokio::sync::Mutex::new(session)));
                state.next_session.fetch_max(n + 1, Ordering::SeqCst);
            }
        }
        Ok(Arc::new(state))
    }

    fn replay(&self, id: &str, path: &std::path::Path) -> Result<Session, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut session = Session {
            id: id.to_string(),
            instances: Vec::new(),
            graph: TripleGraph::new(),
            minted: 0,
            run: None,
            log: Some(path.to_path_buf()),
        };
        let expander = Expander::new(&self.config.library);
        for (n, line) in text.lines().enumerate() {
            let at = |m: String| format!("{}:{}: {m}", path.display(), n + 1);
            if line.starts_with("# mint ") {
                session.minted += 1;
            } else if let Some(rest) = line.strip_prefix("# advance ") {
                let (name, step) = rest.split_once(' ').ok_or_else(|| at("malformed advance event".into()))?;
                let wf = self.workflow(name).ok_or_else(|| at(format!("unknown workflow {name}")))?;
                session.apply_advance(wf, step);
            } else if line.starts_with('#') || line.trim().is_empty() {
                continue;
            } else {
                let insts = parse_instances(line, &self.config.library)
                    .map_err(|e| at(e.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")))?;
                for inst in insts {
                    let graph = expander.expand_instance(&inst, session.instances.len() as u64).map_err(|e| at(e.to_string()))?;
                    session.apply_instance(inst, graph);
                }
            }
        }
        Ok(session)
    }

    fn workflow(&self, name: &str) -> Option<&Workflow> {
        self.config.workflows.iter().find(|w| w.name == name)
    }

    fn session(&self, id: &str) -> ApiResult<Arc<tokio::sync::Mutex<Session>>> {
        self.sessions.lock().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))
    }

    fn template_iri(&self, name: &str) -> ApiResult<String> {
        let iri = resolve_name(name, &self.prefixes).map_err(|_| ApiError::not_found(format!("unknown template {name}")))?;
        if self.config.library.templates.contains_key(&iri) {
            Ok(iri)
        } else {
            Err(ApiError::not_found(format!("unknown template {name}")))
        }
    }
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/templates", get(list_templates))
        .route("/api/templates/{iri}/schema", get(template_schema))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(session_info))
        .route("/api/sessions/{id}/instances", post(add_instance))
        .route("/api/sessions/{id}/graph", get(session_graph))
        .route("/api/sessions/{id}/lint", post(lint_session))
        .route("/api/workflows", get(list_workflows))
        .route("/api/sessions/{id}/workflow/{name}/advance", post(advance))
        .with_state(state)
}

async fn list_templates(State(st): State<SharedState>) -> Json<Value> {
    let list: Vec<Value> = st
        .config
        .library
        .templates
        .keys()
        .map(|iri| {
            json!({
                "iri": iri,
                "name": st.prefixes.display_iri(iri),
                "userFacing": st.user_facing.get(iri).copied().unwrap_or(false),
            })
        })
        .collect();
    Json(Value::Array(list))
}

async fn template_schema(State(st): State<SharedState>, Path(name): Path<String>) -> ApiResult<Json<Value>> {
    let iri = st.template_iri(&name)?;
    let doc = match st.config.docs.get(&iri) {
        Some(d) => d.clone(),
        None => signature_doc(&st.config.library, &iri).ok_or_else(|| ApiError::not_found(format!("unknown template {name}")))?,
    };
    let t = st.config.library.get(&iri).expect("resolved template");
    let params: Vec<Value> = doc
        .parameters
        .iter()
        .zip(&t.parameters)
        .map(|(d, p)| {
            json!({
                "name": d.name,
                "type": d.ptype,
                "optional": d.optional,
                "nonblank": p.nonblank,
                "default": d.default,
                "description": d.description,
                "exampleValue": d.example,
            })
        })
        .collect();
    Ok(Json(json!({
        "iri": iri,
        "name": st.prefixes.display_iri(&iri),
        "userFacing": doc.user_facing,
        "description": doc.description,
        "parameters": params,
    })))
}

async fn create_session(State(st): State<SharedState>) -> ApiResult<(StatusCode, Json<Value>)> {
    let n = st.next_session.fetch_add(1, Ordering::SeqCst);
    let id = format!("s{n}");
    let log = st.config.state_dir.as_ref().map(|d| d.join(format!("{id}.log")));
    let session = Session { id: id.clone(), instances: Vec::new(), graph: TripleGraph::new(), minted: 0, run: None, log };
    session.append(&[format!("# session {id}")])?;
    st.sessions.lock().unwrap().insert(id.clone(), Arc::new(tokio::sync::Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(json!({ "sessionId": id }))))
}

async fn session_info(State(st): State<SharedState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = st.session(&id)?;
    let s = session.lock().await;
    let workflow = s.run.as_ref().map(|r| {
        json!({
            "name": r.workflow,
            "order": r.order,
            "issued": r.issued.iter().map(|i| json!({ "stepId": i.step, "completedBy": i.completed_by })).collect::<Vec<_>>(),
        })
    });
    Ok(Json(json!({
        "sessionId": s.id,
        "instances": s.instances.iter().map(|i| instance_text(i, &st.prefixes)).collect::<Vec<_>>(),
        "mintCounter": s.minted,
        "totalTriples": s.graph.len(),
        "connectedComponents": s.graph.component_count(),
        "workflow": workflow,
    })))
}

#[derive(Deserialize)]
struct InstanceRequest {
    template: String,
    #[serde(default)]
    args: Vec<Option<String>>,
    #[serde(default)]
    mint: Vec<String>,
}

async fn add_instance(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    Json(req): Json<InstanceRequest>,
) -> ApiResult<Json<Value>> {
    let session = st.session(&id)?;
    let iri = st.template_iri(&req.template)?;
    let template = st.config.library.get(&iri).expect("resolved template");
    for m in &req.mint {
        if template.parameter(m).is_none() {
            return Err(ApiError::invalid(&[Diagnostic::new(
                DiagnosticCode::WfUnboundParam,
                Some(&iri),
                format!("cannot mint unknown parameter ?{m}"),
            )]));
        }
    }

    let mut parsed = Vec::with_capacity(req.args.len());
    for (i, arg) in req.args.iter().enumerate() {
        let term = match arg {
            None => Term::None,
            Some(text) => parse_term(text, &st.prefixes).map_err(|e| {
                ApiError::invalid(&[Diagnostic::new(DiagnosticCode::Type, Some(&iri), format!("argument {}: {e}", i + 1))])
            })?,
        };
        parsed.push(term);
    }

    let mut s = session.lock().await;
    let prefix = format!("{}/{}", st.config.base.trim_end_matches('/'), s.id);
    let mut minted: Vec<(String, String)> = Vec::new();
    let mut mint_iri = |param: &str| {
        let iri = format!("{prefix}/{}", s.minted + minted.len() as u64 + 1);
        minted.push((param.to_string(), iri.clone()));
        Term::Iri(iri)
    };
    let is_minted = |param: &str| req.mint.iter().any(|m| m == param);
    let terms: Vec<Term> = if parsed.len() == template.arity() {
        template
            .parameters
            .iter()
            .zip(parsed)
            .map(|(p, t)| if is_minted(&p.name) { mint_iri(&p.name) } else { t })
            .collect()
    } else if !req.mint.is_empty() && parsed.len() + req.mint.len() == template.arity() {
        let mut given = parsed.into_iter();
        template
            .parameters
            .iter()
            .map(|p| if is_minted(&p.name) { mint_iri(&p.name) } else { given.next().expect("arity checked") })
            .collect()
    } else {
        parsed
    };
    let inst = Instance::new(iri.clone(), terms);

    let diags = check_instance(&inst, None, &st.config.library);
    if has_errors(&diags) {
        return Err(ApiError::invalid(&diags));
    }
    let index = s.instances.len();
    let graph = Expander::new(&st.config.library)
        .expand_instance(&inst, index as u64)
        .map_err(|e| ApiError::invalid(&[Diagnostic::new(DiagnosticCode::Type, Some(&iri), e.to_string())]))?;

    let mut lines: Vec<String> = minted.iter().map(|(p, i)| format!("# mint {p} {i}")).collect();
    lines.push(instance_text(&inst, &PrefixMap::new()) + " .");
    s.append(&lines)?;
    s.minted += minted.len() as u64;
    let added = s.apply_instance(inst, graph);
    let minted_map: BTreeMap<String, String> = minted.into_iter().collect();
    Ok(Json(json!({
        "instanceIndex": index,
        "mintedIris": minted_map,
        "triplesAdded": added,
        "totalTriples": s.graph.len(),
        "connectedComponents": s.graph.component_count(),
    })))
}

#[derive(Deserialize)]
struct GraphQuery {
    format: Option<String>,
}

async fn session_graph(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    Query(q): Query<GraphQuery>,
) -> ApiResult<Response> {
    let session = st.session(&id)?;
    let s = session.lock().await;
    let (body, mime) = match q.format.as_deref().unwrap_or("ntriples") {
        "ntriples" | "nt" => (s.graph.to_ntriples(), "application/n-triples"),
        "turtle" | "ttl" => (s.graph.to_turtle(&st.prefixes), "text/turtle"),
        other => return Err(ApiError::bad_request(format!("unknown format {other}"))),
    };
    Ok(([(header::CONTENT_TYPE, mime)], body).into_response())
}

async fn lint_session(State(st): State<SharedState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = st.session(&id)?;
    let s = session.lock().await;
    let report = lint_all(&st.config.library, Some(&s.instances), &st.config.lint)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(json!({
        "findingCount": report.findings.len(),
        "hasErrors": report.has_errors(),
        "findings": report.to_json(&st.prefixes),
    })))
}

async fn list_workflows(State(st): State<SharedState>) -> Json<Value> {
    let list: Vec<Value> = st
        .config
        .workflows
        .iter()
        .map(|wf| {
            let steps: Vec<Value> = wf
                .steps
                .iter()
                .map(|s| {
                    let bindings: BTreeMap<&str, String> =
                        s.bindings.iter().map(|(k, b)| (k.as_str(), b.text(&st.prefixes))).collect();
                    json!({
                        "id": s.id,
                        "template": s.template,
                        "after": s.after,
                        "bindings": bindings,
                    })
                })
                .collect();
            json!({ "name": wf.name, "order": suggest_order(wf).ok(), "steps": steps })
        })
        .collect();
    Json(Value::Array(list))
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase")]
struct AdvanceRequest {
    step_id: Option<String>,
}

fn dependencies(wf: &Workflow, step: &str) -> Vec<String> {
    let Some(s) = wf.step(step) else { return Vec::new() };
    let mut deps = s.after.clone();
    for b in s.bindings.values() {
        if let Binding::Ref { step, .. } = b
            && !deps.contains(step)
        {
            deps.push(step.clone());
        }
    }
    deps
}

async fn advance(
    State(st): State<SharedState>,
    Path((id, name)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let session = st.session(&id)?;
    let wf = st.workflow(&name).ok_or_else(|| ApiError::not_found(format!("unknown workflow {name}")))?;
    let req: AdvanceRequest = if body.iter().all(u8::is_ascii_whitespace) {
        AdvanceRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    let order = suggest_order(wf).map_err(|d| ApiError::conflict(d.message))?;
    let mut s = session.lock().await;

    // a finished run stays finished until a step is requested explicitly
    if req.step_id.is_none() && s.run.as_ref().is_some_and(|r| r.workflow == wf.name && r.finished()) {
        return Ok(Json(json!({ "nextStep": null, "finished": true })));
    }
    let current = s.run.as_ref().filter(|r| r.workflow == wf.name && !r.finished());
    if let Some(other) = s.run.as_ref().filter(|r| r.workflow != wf.name && !r.finished()) {
        return Err(ApiError::conflict(format!("workflow {} is in progress", other.workflow)));
    }
    let issued = |step: &str| current.is_some_and(|r| r.issued.iter().any(|i| i.step == step));
    let completed = |step: &str| current.and_then(|r| r.completed(step));

    let target = match &req.step_id {
        Some(step) => {
            if wf.step(step).is_none() {
                return Err(ApiError::not_found(format!("workflow {name} has no step {step}")));
            }
            step.clone()
        }
        None => match order.iter().find(|step| !issued(step)) {
            Some(step) => step.clone(),
            None => match current.and_then(|r| r.issued.iter().find(|i| i.completed_by.is_none())) {
                Some(pending) => pending.step.clone(),
                None => return Ok(Json(json!({ "nextStep": null, "finished": true }))),
            },
        },
    };
    if completed(&target).is_some() {
        return Err(ApiError::conflict(format!("step {target} is already completed")));
    }
    let unmet: Vec<String> = dependencies(wf, &target).into_iter().filter(|d| completed(d).is_none()).collect();
    if !unmet.is_empty() {
        return Err(ApiError::conflict(format!("step {target} requires {} to be completed first", unmet.join(", "))));
    }

    let step = wf.step(&target).expect("known step");
    let mut prefilled = serde_json::Map::new();
    for (param, binding) in &step.bindings {
        let v = match binding {
            Binding::Const(t) => json!({ "kind": "const", "value": term_text(t, &st.prefixes) }),
            Binding::MintAuto => json!({ "kind": "mint" }),
            Binding::UserInput(t) => json!({ "kind": "input", "type": t.display(&st.prefixes) }),
            Binding::Ref { step: from, param: p } => {
                let value = completed(from).and_then(|i| {
                    let inst = &s.instances[i];
                    let t = st.config.library.get(&inst.template)?;
                    let pos = t.parameters.iter().position(|x| &x.name == p)?;
                    Some(term_text(&inst.arguments[pos].term, &st.prefixes))
                });
                json!({ "kind": "ref", "from": format!("{from}.{p}"), "value": value })
            }
        };
        prefilled.insert(param.clone(), v);
    }

    if !issued(&target) {
        s.append(&[format!("# advance {} {target}", wf.name)])?;
        s.apply_advance(wf, &target);
    }
    Ok(Json(json!({
        "nextStep": {
            "stepId": target,
            "template": st.prefixes.display_iri(&step.template),
            "prefilledBindings": prefilled,
        },
        "finished": false,
    })))
}
