//! Abstract syntax for nested session types, signatures and processes.
//!
//! Types are plain owned trees. Branch lists keep source order so that
//! printing is stable; comparisons of label sets elsewhere ignore order.

mod process;
mod validate;

pub use process::{Proc, ProcDecl, ProcDef, ProcKind};
pub use validate::{validate_signature, Violation, ViolationKind};

use indexmap::IndexMap;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// 1-based line/column position in a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

/// Source extent, inclusive start and exclusive end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span { start: self.start, end: other.end }
    }
}

pub type Branches = Vec<(String, TypeExpr)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    /// `+{l : A, ...}`
    Internal(Branches),
    /// `&{l : A, ...}`
    External(Branches),
    Tensor(Box<TypeExpr>, Box<TypeExpr>),
    Lolli(Box<TypeExpr>, Box<TypeExpr>),
    One,
    Var(String),
    Named(String, Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn var(name: &str) -> Self {
        TypeExpr::Var(name.to_string())
    }

    pub fn named(name: &str, args: Vec<TypeExpr>) -> Self {
        TypeExpr::Named(name.to_string(), args)
    }

    pub fn tensor(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Tensor(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Lolli(Box::new(a), Box::new(b))
    }

    pub fn internal<'a>(branches: impl IntoIterator<Item = (&'a str, TypeExpr)>) -> Self {
        TypeExpr::Internal(branches.into_iter().map(|(l, t)| (l.to_string(), t)).collect())
    }

    pub fn external<'a>(branches: impl IntoIterator<Item = (&'a str, TypeExpr)>) -> Self {
        TypeExpr::External(branches.into_iter().map(|(l, t)| (l.to_string(), t)).collect())
    }

    /// Anything that is not a type name application.
    pub fn is_structural(&self) -> bool {
        !matches!(self, TypeExpr::Named(..))
    }

    /// Choice, tensor or lolli: the constructors that get a fresh name when renaming.
    pub fn is_compound(&self) -> bool {
        matches!(
            self,
            TypeExpr::Internal(_) | TypeExpr::External(_) | TypeExpr::Tensor(..) | TypeExpr::Lolli(..)
        )
    }

    /// Free type variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            TypeExpr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            TypeExpr::One => {}
            TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
                for (_, t) in bs {
                    t.collect_vars(out);
                }
            }
            TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            TypeExpr::Named(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Every type name referenced, with the number of arguments it was applied to.
    pub fn name_uses(&self, out: &mut Vec<(String, usize)>) {
        match self {
            TypeExpr::Var(_) | TypeExpr::One => {}
            TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
                for (_, t) in bs {
                    t.name_uses(out);
                }
            }
            TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) => {
                a.name_uses(out);
                b.name_uses(out);
            }
            TypeExpr::Named(n, args) => {
                out.push((n.clone(), args.len()));
                for a in args {
                    a.name_uses(out);
                }
            }
        }
    }

    /// Simultaneous substitution of type variables. Types have no binders.
    pub fn subst(&self, sigma: &HashMap<String, TypeExpr>) -> TypeExpr {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            TypeExpr::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| self.clone()),
            TypeExpr::One => TypeExpr::One,
            TypeExpr::Internal(bs) => TypeExpr::Internal(subst_branches(bs, sigma)),
            TypeExpr::External(bs) => TypeExpr::External(subst_branches(bs, sigma)),
            TypeExpr::Tensor(a, b) => TypeExpr::tensor(a.subst(sigma), b.subst(sigma)),
            TypeExpr::Lolli(a, b) => TypeExpr::lolli(a.subst(sigma), b.subst(sigma)),
            TypeExpr::Named(n, args) => {
                TypeExpr::Named(n.clone(), args.iter().map(|a| a.subst(sigma)).collect())
            }
        }
    }

    pub fn labels(&self) -> Option<BTreeSet<&str>> {
        match self {
            TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
                Some(bs.iter().map(|(l, _)| l.as_str()).collect())
            }
            _ => None,
        }
    }

    /// Short description of the head constructor, used in messages.
    pub fn head(&self) -> &'static str {
        match self {
            TypeExpr::Internal(_) => "+{}",
            TypeExpr::External(_) => "&{}",
            TypeExpr::Tensor(..) => "*",
            TypeExpr::Lolli(..) => "-o",
            TypeExpr::One => "1",
            TypeExpr::Var(_) => "variable",
            TypeExpr::Named(..) => "name",
        }
    }

    pub fn size(&self) -> usize {
        match self {
            TypeExpr::Var(_) | TypeExpr::One => 1,
            TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
                1 + bs.iter().map(|(_, t)| t.size()).sum::<usize>()
            }
            TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) => 1 + a.size() + b.size(),
            TypeExpr::Named(_, args) => 1 + args.iter().map(TypeExpr::size).sum::<usize>(),
        }
    }
}

fn subst_branches(bs: &Branches, sigma: &HashMap<String, TypeExpr>) -> Branches {
    bs.iter().map(|(l, t)| (l.clone(), t.subst(sigma))).collect()
}

/// Builds the substitution `params := args`.
pub fn substitution(params: &[String], args: &[TypeExpr]) -> HashMap<String, TypeExpr> {
    params.iter().cloned().zip(args.iter().cloned()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: TypeExpr,
    pub span: Span,
}

/// `eqtype A = B`; `vars` are the free variables of both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqTypeDecl {
    pub vars: Vec<String>,
    pub left: TypeExpr,
    pub right: TypeExpr,
    pub span: Span,
}

/// Anything that can resolve type names to definitions.
pub trait TypeEnv {
    fn typedef(&self, name: &str) -> Option<&TypeDef>;
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub types: IndexMap<String, TypeDef>,
    pub decls: IndexMap<String, ProcDecl>,
    pub defs: IndexMap<String, ProcDef>,
    pub eqtypes: Vec<EqTypeDecl>,
}

impl TypeEnv for Signature {
    fn typedef(&self, name: &str) -> Option<&TypeDef> {
        self.types.get(name)
    }
}

impl Signature {
    pub fn unfold(&self, t: &TypeExpr) -> Result<TypeExpr, UnfoldError> {
        unfold(self, t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldError {
    #[error("undefined type name `{0}`")]
    UndefinedTypeName(String),
    #[error("type `{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
}

/// `unfold(V[B]) = body[B/params]`; every other type is returned unchanged.
pub fn unfold(env: &impl TypeEnv, t: &TypeExpr) -> Result<TypeExpr, UnfoldError> {
    match t {
        TypeExpr::Named(name, args) => {
            let def = env
                .typedef(name)
                .ok_or_else(|| UnfoldError::UndefinedTypeName(name.clone()))?;
            if def.params.len() != args.len() {
                return Err(UnfoldError::ArityMismatch {
                    name: name.clone(),
                    expected: def.params.len(),
                    found: args.len(),
                });
            }
            Ok(def.body.subst(&substitution(&def.params, args)))
        }
        _ => Ok(t.clone()),
    }
}
