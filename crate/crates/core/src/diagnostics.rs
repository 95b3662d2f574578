use crate::ast::Span;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, code: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { span, severity: Severity::Error, code: code.into(), message: message.into() }
    }

    /// `file:line:col-line:col severity code message`
    pub fn render(&self, file: &str) -> String {
        let Span { start, end } = self.span;
        format!(
            "{file}:{}:{}-{}:{} {} {} {}",
            start.line, start.col, end.line, end.col, self.severity, self.code, self.message
        )
    }
}

impl From<crate::ast::Violation> for Diagnostic {
    fn from(v: crate::ast::Violation) -> Self {
        Diagnostic::error(v.span, v.kind.code(), v.kind.to_string())
    }
}
