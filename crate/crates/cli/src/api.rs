//! JSON-over-HTTP surface. [`handle`] is a plain function of the request so
//! it can be tested without a socket; [`router`] mounts it on axum.

use std::sync::Arc;

use axum::body::Bytes;
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use hyperview::linguistic::Style;
use hyperview::viz::render_svg;

use crate::ops::{self, LoadOptions, PointSpec, ViewKind};
use crate::session::{ApiError, Command, Committed, Effect, Session, Store};

/// A response before it meets the transport.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub status: u16,
    pub content_type: &'static str,
    pub body: String,
    /// Session revision the response reflects, sent as `x-revision`.
    pub revision: Option<u64>,
}

impl Reply {
    fn json(status: u16, body: String, revision: Option<u64>) -> Self {
        Reply {
            status,
            content_type: "application/json",
            body,
            revision,
        }
    }

    fn error(e: &ApiError) -> Self {
        let body = json!({ "error": e.message, "field": e.field });
        Reply::json(e.status, body.to_string(), None)
    }
}

/// Field path of a deserialization failure. Missing fields are reported by
/// serde at the parent path, so pull the name out of the message.
fn error_field(path: &str, message: &str) -> String {
    let name = message
        .strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next());
    match (path, name) {
        (".", Some(n)) => n.to_string(),
        (p, Some(n)) => format!("{p}.{n}"),
        (".", None) => "body".to_string(),
        (p, None) => p.to_string(),
    }
}

fn parse<T: DeserializeOwned>(value: Value) -> Result<T, ApiError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        ApiError::bad(error_field(&path, &inner), inner)
    })
}

/// JSON object body, with the optional `revision` taken out.
fn body_object(body: &[u8]) -> Result<(Map<String, Value>, Option<u64>), ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok((Map::new(), None));
    }
    let value: Value = serde_json::from_slice(body).map_err(|e| ApiError::bad("body", e))?;
    let Value::Object(mut map) = value else {
        return Err(ApiError::bad("body", "expected a JSON object"));
    };
    let revision = match map.remove("revision") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| ApiError::bad("revision", "expected a non-negative integer"))?,
        ),
    };
    Ok((map, revision))
}

fn command(op: &str, map: Map<String, Value>) -> Result<Command, ApiError> {
    let body = Value::Object(map);
    Ok(match op {
        "hyperblocks" => Command::Hyperblocks(parse(body)?),
        "merge" => Command::Merge(parse(body)?),
        "learn" => Command::Learn(parse(body)?),
        "axis_shift" => Command::AxisShift(parse(body)?),
        "straighten" => Command::Straighten(parse(body)?),
        "subsets" => Command::Subsets(parse(body)?),
        "view" => Command::View(parse(body)?),
        _ => unreachable!("routed ops only"),
    })
}

fn query_pairs(query: &str) -> Vec<(&str, &str)> {
    query
        .split('&')
        .filter(|p| !p.is_empty())
        .map(|p| p.split_once('=').unwrap_or((p, "")))
        .collect()
}

fn query_get<'a>(query: &'a str, key: &str) -> Option<&'a str> {
    query_pairs(query)
        .into_iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
}

#[derive(Debug, Serialize)]
struct Mutation<'a> {
    revision: u64,
    state_hash: String,
    result: &'a Effect,
}

fn mutation_reply(
    store: &Store,
    session: &Session,
    committed: &Committed,
    effect: &Effect,
) -> Reply {
    store.persist(session);
    let body = Mutation {
        revision: committed.revision,
        state_hash: format!("{:016x}", committed.state.hash()),
        result: effect,
    };
    Reply::json(
        200,
        serde_json::to_string(&body).expect("reply serializes"),
        Some(committed.revision),
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    csv: String,
    #[serde(default)]
    options: LoadOptions,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyBody {
    point: PointSpec,
}

/// Linguistic description request; shared with `describe` on the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescribeQuery {
    pub style: Style,
    pub cutoff: f64,
    /// Describe the session's blocks instead of the classes.
    pub blocks: bool,
}

impl DescribeQuery {
    fn parse(query: &str) -> Result<Self, ApiError> {
        let mut q = DescribeQuery {
            style: Style::Structured,
            cutoff: 0.5,
            blocks: false,
        };
        for (k, v) in query_pairs(query) {
            match k {
                "style" => {
                    q.style = match v {
                        "structured" => Style::Structured,
                        "sentence" => Style::Sentence,
                        _ => return Err(ApiError::bad("style", format!("unknown style `{v}`"))),
                    }
                }
                "cutoff" => {
                    q.cutoff = v
                        .parse()
                        .ok()
                        .filter(|c: &f64| (0.0..=1.0).contains(c))
                        .ok_or_else(|| ApiError::bad("cutoff", format!("`{v}` is not in [0, 1]")))?
                }
                "blocks" => q.blocks = matches!(v, "" | "true" | "1"),
                _ => return Err(ApiError::bad(k, "unknown query parameter")),
            }
        }
        Ok(q)
    }
}

fn session_get(session: &Arc<Session>, rest: &[&str], query: &str) -> Result<Reply, ApiError> {
    let cur = session.current();
    let st = &cur.state;
    match rest {
        ["scene"] => {
            let view = match query_get(query, "view") {
                Some(v) => v
                    .parse::<ViewKind>()
                    .map_err(|e| ApiError::bad("view", e))?,
                None => ViewKind::Polylines,
            };
            let scene = match (view, &st.scene) {
                (ViewKind::Polylines, Some(s)) => (**s).clone(),
                _ => ops::render(&st.data, st.blocks.as_deref(), view, &st.view)
                    .map_err(|e| ApiError::bad("view", e))?,
            };
            match query_get(query, "format") {
                None | Some("json") => Ok(Reply::json(200, scene.to_json(), Some(cur.revision))),
                Some("svg") => Ok(Reply {
                    status: 200,
                    content_type: "image/svg+xml",
                    body: render_svg(&scene),
                    revision: Some(cur.revision),
                }),
                Some(f) => Err(ApiError::bad("format", format!("unknown format `{f}`"))),
            }
        }
        ["linguistic"] => {
            let q = DescribeQuery::parse(query)?;
            let d = if q.blocks {
                let blocks = st
                    .blocks
                    .as_ref()
                    .ok_or_else(|| ApiError::bad("blocks", "no hyperblocks yet"))?;
                ops::describe_blocks(blocks, &st.points, q.style, q.cutoff)
            } else {
                ops::describe_classes(&st.data, q.style, q.cutoff)
            };
            Ok(Reply::json(
                200,
                serde_json::to_string(&d).expect("serializes"),
                Some(cur.revision),
            ))
        }
        ["report"] => {
            let report = json!({
                "id": session.id,
                "revision": cur.revision,
                "state_hash": format!("{:016x}", st.hash()),
                "summary": ops::summary(&st.data.base),
                "blocks": st.blocks.as_ref().map(|b| ops::blocks_summary(b, &st.points, &st.data)),
                "model": st.model.as_ref().map(|m| ops::model_summary(m)),
                "view": st.view,
                "log": cur.log,
            });
            Ok(Reply::json(200, report.to_string(), Some(cur.revision)))
        }
        _ => Err(ApiError::not_found("no such endpoint")),
    }
}

fn session_post(
    store: &Store,
    session: &Arc<Session>,
    rest: &[&str],
    body: &[u8],
) -> Result<Reply, ApiError> {
    let (map, expected) = body_object(body)?;
    let op = match rest {
        ["hyperblocks"] => "hyperblocks",
        ["hyperblocks", "merge"] => "merge",
        ["learn"] => "learn",
        ["axis-shift"] => "axis_shift",
        ["straighten"] => "straighten",
        ["subsets"] => "subsets",
        ["view"] => "view",
        ["undo"] => {
            if !map.is_empty() {
                let k = map.keys().next().expect("non-empty");
                return Err(ApiError::bad(k.as_str(), "unknown field"));
            }
            let committed = session.undo(expected)?;
            return Ok(mutation_reply(store, session, &committed, &Effect::None));
        }
        ["classify"] => {
            let cur = session.current();
            let model = cur
                .state
                .model
                .as_ref()
                .ok_or_else(|| ApiError::bad("model", "no model learned in this session"))?;
            let b: ClassifyBody = parse(Value::Object(map))?;
            let raw = ops::raw_point(&cur.state.data.base, &b.point, "point")?;
            let p = ops::classify(model, &cur.state.data, &raw);
            return Ok(Reply::json(
                200,
                serde_json::to_string(&p).expect("serializes"),
                Some(cur.revision),
            ));
        }
        _ => return Err(ApiError::not_found("no such endpoint")),
    };
    let cmd = command(op, map)?;
    let (committed, effect) = session.execute(cmd, expected)?;
    Ok(mutation_reply(store, session, &committed, &effect))
}

fn route(
    store: &Store,
    method: &str,
    path: &str,
    query: &str,
    body: &[u8],
) -> Result<Reply, ApiError> {
    let segs: Vec<&str> = path
        .trim_matches('/')
        .split('/')
        .filter(|s| !s.is_empty())
        .collect();
    match (method, segs.as_slice()) {
        ("POST", ["sessions"]) => {
            let value: Value =
                serde_json::from_slice(body).map_err(|e| ApiError::bad("body", e))?;
            let b: CreateBody = parse(value)?;
            let s = store.create(b.csv, b.options)?;
            let cur = s.current();
            let body = json!({
                "id": s.id,
                "revision": cur.revision,
                "summary": ops::summary(&cur.state.data.base),
            });
            Ok(Reply::json(201, body.to_string(), Some(cur.revision)))
        }
        (m, ["sessions", id, rest @ ..]) if !rest.is_empty() => {
            let session = store.get(id)?;
            match m {
                "GET" => session_get(&session, rest, query),
                "POST" => session_post(store, &session, rest, body),
                _ => Err(ApiError {
                    status: 405,
                    field: None,
                    message: format!("method {m} not allowed"),
                }),
            }
        }
        _ => Err(ApiError::not_found("no such endpoint")),
    }
}

/// Answer one request.
pub fn handle(store: &Store, method: &str, path: &str, query: &str, body: &[u8]) -> Reply {
    route(store, method, path, query, body).unwrap_or_else(|e| Reply::error(&e))
}

async fn dispatch(store: Arc<Store>, method: Method, uri: Uri, body: Bytes) -> Response {
    let path = uri.path().to_string();
    let query = uri.query().unwrap_or("").to_string();
    let reply =
        tokio::task::spawn_blocking(move || handle(&store, method.as_str(), &path, &query, &body))
            .await;
    let reply = match reply {
        Ok(r) => r,
        Err(e) => Reply::error(&ApiError {
            status: 500,
            field: None,
            message: e.to_string(),
        }),
    };
    let status = StatusCode::from_u16(reply.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let mut resp = (status, reply.body).into_response();
    let headers = resp.headers_mut();
    headers.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static(reply.content_type),
    );
    if let Some(r) = reply.revision {
        headers.insert("x-revision", HeaderValue::from(r));
    }
    resp
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new().fallback(move |method: Method, uri: Uri, body: Bytes| {
        dispatch(store.clone(), method, uri, body)
    })
}

pub async fn serve(store: Arc<Store>, port: u16) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store)).await?;
    Ok(())
}
