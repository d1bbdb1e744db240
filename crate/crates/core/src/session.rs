//! Analysis sessions: a sequence of enhanced cubes built by submitting
//! intentions and cube queries, with each result bound to a name.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;
use serde_json::{json, Value};

use crate::catalog::SharedCatalog;
use crate::error::Error;
use crate::intents::{execute, Context, EnhancedCube};
use crate::iql::{is_keyword, parse_statement, ParseError, Statement};

/// Seed used by seeded models when `ENGINE_SEED` is not set.
pub const DEFAULT_SEED: u64 = 42;

pub fn seed_from_env() -> u64 {
    std::env::var("ENGINE_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Error reported to clients: the failing stage, a message and, for syntax
/// errors, the position in the submitted text.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmitError {
    pub stage: String,
    pub message: String,
    pub position: Option<(usize, usize, usize)>,
}

impl SubmitError {
    pub fn to_json(&self) -> Value {
        let mut v = json!({"stage": self.stage, "message": self.message});
        if let Some((line, column, offset)) = self.position {
            v["position"] = json!({"line": line, "column": column, "offset": offset});
        }
        v
    }
}

impl std::fmt::Display for SubmitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} error: {}", self.stage, self.message)
    }
}

impl std::error::Error for SubmitError {}

impl From<Error> for SubmitError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => p.into(),
            other => SubmitError {
                stage: other.stage().to_string(),
                message: other.to_string(),
                position: None,
            },
        }
    }
}

impl From<ParseError> for SubmitError {
    fn from(p: ParseError) -> Self {
        SubmitError {
            stage: "parse".into(),
            position: Some((p.line, p.column, p.offset)),
            message: p.to_string(),
        }
    }
}

/// Splits an optional `name =` prefix off a submission. Returns the name and
/// the byte offset where the statement starts.
pub fn split_binding(text: &str) -> (Option<&str>, usize) {
    let lead = text.len() - text.trim_start().len();
    let rest = &text[lead..];
    let end = rest
        .char_indices()
        .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
        .map_or(rest.len(), |(i, _)| i);
    let ident = &rest[..end];
    let starts_ok = ident.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_');
    if !starts_ok || is_keyword(ident) {
        return (None, 0);
    }
    let after = &rest[end..];
    let ws = after.len() - after.trim_start().len();
    let after = &after[ws..];
    if after.starts_with('=') && !after.starts_with("==") {
        (Some(ident), lead + end + ws + 1)
    } else {
        (None, 0)
    }
}

/// One analyst's session. Results are appended in execution order.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: u64,
    pub seed: u64,
    bindings: BTreeMap<String, crate::cube::Cube>,
    dashboard: Vec<Value>,
    counter: usize,
}

impl Session {
    pub fn new(id: u64, seed: u64) -> Self {
        Session {
            id,
            seed,
            bindings: BTreeMap::new(),
            dashboard: Vec::new(),
            counter: 0,
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }

    /// Parses, plans and executes `text`, binds the result and appends its
    /// document to the dashboard.
    pub fn submit(&mut self, catalog: &SharedCatalog, text: &str) -> Result<Value, SubmitError> {
        let (binding, start) = split_binding(text);
        let stmt = parse_statement(&text[start..]).map_err(|mut p| {
            p.offset += start;
            let (line, column) = crate::iql::position(text, p.offset);
            p.line = line;
            p.column = column;
            p
        })?;
        let cat = catalog.read();
        let name = match binding {
            Some(n) => {
                if self.bindings.contains_key(n) || cat.cubes.contains_key(n) || cat.queries.contains_key(n) {
                    return Err(Error::Duplicate(n.to_string()).into());
                }
                n.to_string()
            }
            None => loop {
                self.counter += 1;
                let n = format!("r{}", self.counter);
                if !self.bindings.contains_key(&n) && !cat.cubes.contains_key(&n) {
                    break n;
                }
            },
        };
        let result = match &stmt {
            Statement::Intention(i) => {
                let ctx = Context {
                    catalog: &cat,
                    bindings: &self.bindings,
                    seed: self.seed,
                };
                execute(&ctx, i, text, &name)?
            }
            Statement::Query(q) => EnhancedCube::plain(cat.eval_query(q, &name)?, text),
        };
        drop(cat);
        let mut doc = result.to_json();
        doc["name"] = json!(name);
        self.bindings.insert(name, result.cube);
        self.dashboard.push(doc.clone());
        Ok(doc)
    }

    pub fn dashboard(&self) -> &[Value] {
        &self.dashboard
    }
}

/// All sessions of a running engine. Sessions execute independently; one
/// submission at a time per session.
pub struct SessionManager {
    pub catalog: SharedCatalog,
    pub seed: u64,
    next: AtomicU64,
    sessions: Mutex<BTreeMap<u64, Arc<Mutex<Session>>>>,
}

impl SessionManager {
    pub fn new(catalog: SharedCatalog, seed: u64) -> Self {
        SessionManager {
            catalog,
            seed,
            next: AtomicU64::new(1),
            sessions: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn create(&self) -> u64 {
        let id = self.next.fetch_add(1, Ordering::SeqCst);
        self.sessions.lock().insert(id, Arc::new(Mutex::new(Session::new(id, self.seed))));
        id
    }

    fn get(&self, id: u64) -> Result<Arc<Mutex<Session>>, SubmitError> {
        self.sessions.lock().get(&id).cloned().ok_or_else(|| SubmitError {
            stage: "session".into(),
            message: format!("unknown session {id}"),
            position: None,
        })
    }

    pub fn submit(&self, id: u64, text: &str) -> Result<Value, SubmitError> {
        let s = self.get(id)?;
        let mut guard = s.lock();
        guard.submit(&self.catalog, text)
    }

    pub fn dashboard(&self, id: u64) -> Result<Value, SubmitError> {
        let s = self.get(id)?;
        let guard = s.lock();
        Ok(Value::Array(guard.dashboard().to_vec()))
    }

    pub fn close(&self, id: u64) -> bool {
        self.sessions.lock().remove(&id).is_some()
    }
}
