// SPDX-License-Identifier: Apache-2.0

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use harmnet_core::graph::GraphError;
use harmnet_core::paths::PathError;
use harmnet_core::whatif::WhatIfError;
use harmnet_core::MetricsError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        FieldError {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Error body: `{"error": {"status", "code", "message", "fields"}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub fields: Vec<FieldError>,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            fields: Vec::new(),
        }
    }

    pub fn invalid(fields: Vec<FieldError>) -> Self {
        let message = match fields.as_slice() {
            [one] => format!("invalid `{}`: {}", one.field, one.message),
            _ => format!("{} invalid fields", fields.len()),
        };
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message,
            fields,
        }
    }

    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self::invalid(vec![FieldError::new(field, message)])
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    pub fn unavailable() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "graph is not loaded yet")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            status: self.status.as_u16(),
            code: code(self.status).to_string(),
            message: self.message.clone(),
            fields: self.fields.clone(),
        }
    }
}

fn code(status: StatusCode) -> &'static str {
    match status {
        StatusCode::BAD_REQUEST => "bad_request",
        StatusCode::NOT_FOUND => "not_found",
        StatusCode::CONFLICT => "conflict",
        StatusCode::UNPROCESSABLE_ENTITY => "unprocessable",
        StatusCode::SERVICE_UNAVAILABLE => "unavailable",
        _ => "internal",
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.body() });
        (self.status, Json(body)).into_response()
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::UnknownNode(_) => ApiError::not_found(e.to_string()),
            GraphError::HarmOutOfRange { .. } => ApiError::field("harm", e.to_string()),
            _ => ApiError::internal(e.to_string()),
        }
    }
}

impl From<MetricsError> for ApiError {
    fn from(e: MetricsError) -> Self {
        let msg = e.to_string();
        match e {
            MetricsError::Graph(g) => g.into(),
            MetricsError::AlphaOutOfRange(_) | MetricsError::DivergentConfig { .. } => {
                ApiError::field("config.alpha", msg)
            }
            MetricsError::InvalidTopK(_) => ApiError::field("config", msg),
            MetricsError::UnboundedWalks | MetricsError::Path(PathError::InvalidMMax(_)) => {
                ApiError::field("config.mmax", msg)
            }
            MetricsError::Path(PathError::UnknownNode(_)) => ApiError::not_found(msg),
            MetricsError::Path(PathError::TargetRemoved(_)) => ApiError::conflict(msg),
            MetricsError::Path(PathError::BudgetExceeded { .. })
            | MetricsError::Path(PathError::MultiplicityOverflow { .. }) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, msg)
            }
            _ => ApiError::internal(msg),
        }
    }
}

impl From<WhatIfError> for ApiError {
    fn from(e: WhatIfError) -> Self {
        let msg = e.to_string();
        match e {
            WhatIfError::Metrics(m) => m.into(),
            WhatIfError::Graph(g) => g.into(),
            WhatIfError::SelfQuery(_) => ApiError::field("node", msg),
            WhatIfError::InvalidOverlay(_) => ApiError::field("harm", msg),
            WhatIfError::Conflict(_) => ApiError::conflict(msg),
        }
    }
}
