use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {what} = {value} lies outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("cannot invert generator: {0}")]
    Inversion(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("evaluation error at columns {start}..{end}: {message}")]
    Eval {
        start: usize,
        end: usize,
        message: String,
    },

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("point {0} is not in the carrier")]
    NotInCarrier(f64),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("scenario has {} schema error(s): {}", .0.len(), .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Schema(Vec<SchemaError>),

    #[error("i/o error: {0}")]
    Io(String),
}

/// One validation failure inside a scenario document, located by key path.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_unit(what: &'static str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Domain {
            what,
            value: v,
            domain: "[0, 1]",
        })
    }
}

pub(crate) fn check_positive(what: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain {
            what,
            value: v,
            domain: "(0, inf)",
        })
    }
}
