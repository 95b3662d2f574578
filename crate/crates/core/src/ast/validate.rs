use super::{Signature, Span, TypeExpr};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViolationKind {
    #[error("undefined type name `{0}`")]
    UndefinedTypeName(String),
    #[error("type `{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("definition of `{0}` is not contractive")]
    NonContractive(String),
    #[error("`{owner}` declares parameter `{param}` twice")]
    DuplicateParam { owner: String, param: String },
    #[error("type variable `{var}` is not bound in `{owner}`")]
    UnboundTypeVar { owner: String, var: String },
    #[error("label `{label}` occurs twice in one choice")]
    DuplicateLabel { label: String },
    #[error("`{owner}` names channel `{chan}` twice")]
    DuplicateChannel { owner: String, chan: String },
}

impl ViolationKind {
    pub fn code(&self) -> &'static str {
        match self {
            ViolationKind::UndefinedTypeName(_) => "undefined-type-name",
            ViolationKind::ArityMismatch { .. } => "arity-mismatch",
            ViolationKind::NonContractive(_) => "non-contractive",
            ViolationKind::DuplicateParam { .. } => "duplicate-param",
            ViolationKind::UnboundTypeVar { .. } => "unbound-type-var",
            ViolationKind::DuplicateLabel { .. } => "duplicate-label",
            ViolationKind::DuplicateChannel { .. } => "duplicate-channel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub span: Span,
}

struct Validator<'a> {
    sig: &'a Signature,
    out: Vec<Violation>,
}

impl Validator<'_> {
    fn push(&mut self, kind: ViolationKind, span: Span) {
        let v = Violation { kind, span };
        if !self.out.contains(&v) {
            self.out.push(v);
        }
    }

    fn params(&mut self, owner: &str, params: &[String], span: Span) {
        let mut seen = HashSet::new();
        for p in params {
            if !seen.insert(p) {
                self.push(
                    ViolationKind::DuplicateParam { owner: owner.into(), param: p.clone() },
                    span,
                );
            }
        }
    }

    fn channels<'c>(&mut self, owner: &str, chans: impl IntoIterator<Item = &'c String>, span: Span) {
        let mut seen = HashSet::new();
        for c in chans {
            if !seen.insert(c) {
                self.push(
                    ViolationKind::DuplicateChannel { owner: owner.into(), chan: c.clone() },
                    span,
                );
            }
        }
    }

    /// Names defined with matching arity, labels distinct, variables bound.
    fn ty(&mut self, owner: &str, t: &TypeExpr, scope: &[String], span: Span) {
        match t {
            TypeExpr::One => {}
            TypeExpr::Var(v) => {
                if !scope.contains(v) {
                    self.push(
                        ViolationKind::UnboundTypeVar { owner: owner.into(), var: v.clone() },
                        span,
                    );
                }
            }
            TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
                let mut seen = HashSet::new();
                for (l, b) in bs {
                    if !seen.insert(l) {
                        self.push(ViolationKind::DuplicateLabel { label: l.clone() }, span);
                    }
                    self.ty(owner, b, scope, span);
                }
            }
            TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) => {
                self.ty(owner, a, scope, span);
                self.ty(owner, b, scope, span);
            }
            TypeExpr::Named(n, args) => {
                match self.sig.types.get(n) {
                    None => self.push(ViolationKind::UndefinedTypeName(n.clone()), span),
                    Some(d) if d.params.len() != args.len() => self.push(
                        ViolationKind::ArityMismatch {
                            name: n.clone(),
                            expected: d.params.len(),
                            found: args.len(),
                        },
                        span,
                    ),
                    Some(_) => {}
                }
                for a in args {
                    self.ty(owner, a, scope, span);
                }
            }
        }
    }
}

/// Checks every well-formedness condition and reports all violations.
pub fn validate_signature(sig: &Signature) -> Vec<Violation> {
    let mut v = Validator { sig, out: Vec::new() };
    for def in sig.types.values() {
        v.params(&def.name, &def.params, def.span);
        if matches!(def.body, TypeExpr::Named(..) | TypeExpr::Var(_)) {
            v.push(ViolationKind::NonContractive(def.name.clone()), def.span);
        }
        v.ty(&def.name, &def.body, &def.params, def.span);
    }
    for eq in &sig.eqtypes {
        v.ty("eqtype", &eq.left, &eq.vars, eq.span);
        v.ty("eqtype", &eq.right, &eq.vars, eq.span);
    }
    for decl in sig.decls.values() {
        v.params(&decl.name, &decl.params, decl.span);
        v.channels(
            &decl.name,
            decl.uses.iter().map(|(c, _)| c).chain(std::iter::once(&decl.offer.0)),
            decl.span,
        );
        for (_, t) in decl.uses.iter().chain(std::iter::once(&decl.offer)) {
            v.ty(&decl.name, t, &decl.params, decl.span);
        }
    }
    for def in sig.defs.values() {
        v.params(&def.name, &def.params, def.span);
        v.channels(&def.name, def.args.iter().chain(std::iter::once(&def.offer)), def.span);
        for (_, args, span) in def.body.calls() {
            for a in args {
                v.ty(&def.name, a, &def.params, span);
            }
        }
    }
    v.out
}
