//! JSON API under `/api/v1`.

use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, Request, State};
use axum::http::{HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ontoserv_core::catalog::{ServiceRecord, Upsert};
use ontoserv_core::LanguageCode;
use serde::Deserialize;

use crate::engine::{Engine, Feedback, SearchRequest};
use crate::error::ApiError;

type Shared = State<Arc<Engine>>;

pub fn router(engine: Arc<Engine>) -> Router {
    let api = Router::new()
        .route("/search", get(search))
        .route("/feedback", post(feedback))
        .route("/recommendations", get(recommendations))
        .route("/services", post(create_service))
        .route("/services/{id}", get(get_service).put(put_service).delete(delete_service))
        .route("/ontology/expand", get(expand));
    Router::new()
        .nest("/api/v1", api)
        .route("/healthz", get(|| async { "ok" }))
        .layer(middleware::from_fn(server_timing))
        .with_state(engine)
}

async fn server_timing(req: Request, next: Next) -> Response {
    let start = Instant::now();
    let mut res = next.run(req).await;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    if let Ok(v) = HeaderValue::from_str(&format!("total;dur={ms:.3}")) {
        res.headers_mut().insert("server-timing", v);
    }
    res
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(t)| t).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn json<T>(j: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    j.map(|Json(t)| t).map_err(|e| ApiError::bad_request(e.body_text()))
}

/// `lang` is optional; an empty value or `auto` asks for detection.
fn language(lang: Option<&str>) -> Result<Option<LanguageCode>, ApiError> {
    match lang.map(str::trim) {
        None | Some("") | Some("auto") => Ok(None),
        Some(code) => Ok(Some(LanguageCode::new(code)?)),
    }
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: Option<String>,
    lang: Option<String>,
    user: Option<String>,
    k: Option<usize>,
}

async fn search(State(engine): Shared, params: Result<Query<SearchParams>, QueryRejection>) -> Result<Response, ApiError> {
    let p = query(params)?;
    let req = SearchRequest {
        q: p.q.unwrap_or_default(),
        lang: language(p.lang.as_deref())?,
        user: p.user.filter(|u| !u.is_empty()),
        k: p.k,
    };
    Ok(Json(engine.search(&req)?).into_response())
}

async fn feedback(State(engine): Shared, body: Result<Json<Feedback>, JsonRejection>) -> Result<StatusCode, ApiError> {
    engine.feedback(&json(body)?)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
struct RecommendParams {
    user: String,
    k: Option<usize>,
}

async fn recommendations(
    State(engine): Shared,
    params: Result<Query<RecommendParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let p = query(params)?;
    Ok(Json(engine.recommend(&p.user, p.k)?).into_response())
}

async fn get_service(State(engine): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(engine.service(&id)?).into_response())
}

async fn put_service(
    State(engine): Shared,
    Path(id): Path<String>,
    body: Result<Json<ServiceRecord>, JsonRejection>,
) -> Result<Response, ApiError> {
    let record = json(body)?;
    let status = match engine.put_service(&id, record.clone())? {
        Upsert::Created => StatusCode::CREATED,
        Upsert::Replaced => StatusCode::OK,
    };
    Ok((status, Json(record)).into_response())
}

async fn create_service(State(engine): Shared, body: Result<Json<ServiceRecord>, JsonRejection>) -> Result<Response, ApiError> {
    let record = json(body)?;
    engine.create_service(record.clone())?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

async fn delete_service(State(engine): Shared, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    engine.delete_service(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
struct ExpandParams {
    term: Option<String>,
    lang: Option<String>,
}

async fn expand(State(engine): Shared, params: Result<Query<ExpandParams>, QueryRejection>) -> Result<Response, ApiError> {
    let p = query(params)?;
    let term = p.term.unwrap_or_default();
    if term.trim().is_empty() {
        return Err(ApiError::bad_request("missing term"));
    }
    Ok(Json(engine.expand(&term, language(p.lang.as_deref())?)?).into_response())
}
