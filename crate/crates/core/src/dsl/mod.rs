//! The `.field` text format: scalar expressions, vector fields, metrics,
//! volume forms and 1-forms.
//!
//! The grammar is documented in `docs/field-format.md`.

mod document;
mod format;
mod lexer;
mod parser;

use std::fmt;

use serde::Serialize;

pub use document::{parse_document, parse_field_spec, serialize_document, serialize_field_spec, Document, FieldSpec};
pub use format::{format_expr, format_scalar, format_trig};
pub use parser::{parse_scalar, parse_scalar_with, Params};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A located message about a source text. `start..end` is a byte range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub start: usize,
    pub end: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(start: usize, end: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic { start, end, message: message.into(), severity: Severity::Error }
    }

    pub fn warning(start: usize, end: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic { start, end, message: message.into(), severity: Severity::Warning }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub(crate) fn shifted(mut self, offset: usize) -> Self {
        self.start += offset;
        self.end += offset;
        self
    }

    /// `line:col: severity: message`, with 1-based line and column.
    pub fn render(&self, src: &str) -> String {
        let before = &src[..self.start.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        format!("{line}:{col}: {sev}: {}", self.message)
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}: {}", self.start, self.end, self.message)
    }
}

/// A successfully parsed value with any warnings raised along the way.
#[derive(Clone, Debug)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<ParseDiagnostic>,
}
