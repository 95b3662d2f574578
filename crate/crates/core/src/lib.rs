//! Nested session types: signatures, type equality, grammar translation,
//! type checking and an asynchronous runtime.

pub mod ast;
pub mod cfst;
pub mod checker;
pub mod corpus;
pub mod diagnostics;
pub mod equality;
pub mod grammar;
pub mod rename;
pub mod runtime;
pub mod syntax;

pub use ast::{Proc, ProcDecl, ProcDef, ProcKind, Signature, Span, TypeDef, TypeExpr};
pub use diagnostics::Diagnostic;
