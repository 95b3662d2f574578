//! Bidirectional type checking of processes against their declarations.
//!
//! Types are unfolded lazily when a rule needs to see a constructor. Wherever
//! two types must agree (forwarding, passing channels, calling a process) the
//! equality module decides.

use crate::ast::{
    substitution, unfold, validate_signature, Proc, ProcDecl, ProcDef, ProcKind, Signature, Span,
    TypeExpr, Violation,
};
use crate::diagnostics::Diagnostic;
use crate::equality::{seed_and_validate, Closure, EqualityChecker, InvalidEqtype, Verdict};
use crate::rename::{rename_signature, RenamedSignature};
use crate::syntax::{print_type_with, CompressionMap};
use indexmap::IndexMap;
use std::collections::BTreeSet;
use thiserror::Error;

/// `𝒱 ; Δ ⊢ P :: (x : A)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypingContext {
    pub typevars: Vec<String>,
    pub channels: IndexMap<String, TypeExpr>,
    pub offered: (String, TypeExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("{0}")]
    LinearityViolation(String),
    #[error("label set mismatch: expected {{{}}}, found {{{}}}", expected.join(", "), found.join(", "))]
    LabelSetMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("type mismatch: expected {expected}, found {found} ({verdict})")]
    TypeMismatch { expected: String, found: String, verdict: Box<Verdict> },
    #[error("channel `{chan}` of type {found} does not allow {action}")]
    ProtocolMismatch { chan: String, found: String, action: String },
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("process `{0}` is declared but not defined")]
    MissingDefinition(String),
    #[error("`{name}` expects {expected} type argument(s), found {found}")]
    TypeArityMismatch { name: String, expected: usize, found: usize },
    #[error("`{name}` expects {expected} channel argument(s), found {found}")]
    ChannelArityMismatch { name: String, expected: usize, found: usize },
    #[error("channel `{0}` is already in scope")]
    Shadowing(String),
    #[error("{0}")]
    IllFormedType(String),
}

impl TypeErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            TypeErrorKind::UnknownChannel(_) => "unknown-channel",
            TypeErrorKind::LinearityViolation(_) => "linearity",
            TypeErrorKind::LabelSetMismatch { .. } => "label-set-mismatch",
            TypeErrorKind::TypeMismatch { .. } => "type-mismatch",
            TypeErrorKind::ProtocolMismatch { .. } => "protocol-mismatch",
            TypeErrorKind::UnknownProcess(_) => "unknown-process",
            TypeErrorKind::MissingDefinition(_) => "missing-definition",
            TypeErrorKind::TypeArityMismatch { .. } => "type-arity-mismatch",
            TypeErrorKind::ChannelArityMismatch { .. } => "channel-arity-mismatch",
            TypeErrorKind::Shadowing(_) => "shadowing",
            TypeErrorKind::IllFormedType(_) => "ill-formed-type",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub span: Span,
    pub process: String,
}

impl From<&TypeError> for Diagnostic {
    fn from(e: &TypeError) -> Self {
        Diagnostic::error(e.span, e.kind.code(), format!("in `{}`: {}", e.process, e.kind))
    }
}

/// One equality question asked while checking.
#[derive(Debug, Clone)]
pub struct QueryRecord {
    pub expected: TypeExpr,
    pub found: TypeExpr,
    pub verdict: Verdict,
}

pub struct Checker<'s> {
    sig: &'s Signature,
    eq: EqualityChecker<'s>,
    cmap: CompressionMap,
    fresh: usize,
    process: String,
    pub queries: Vec<QueryRecord>,
}

type TResult = Result<(), TypeError>;

impl<'s> Checker<'s> {
    /// `sig` is the signature as written; `renamed` is its renaming, used for equality.
    pub fn new(
        sig: &'s Signature,
        renamed: &'s RenamedSignature,
        seeds: Vec<Closure>,
        depth_bound: usize,
    ) -> Self {
        Checker {
            sig,
            eq: EqualityChecker::new(renamed, depth_bound).with_seeds(seeds),
            cmap: CompressionMap::new(),
            fresh: 0,
            process: String::new(),
            queries: Vec::new(),
        }
    }

    /// Name used to attribute subsequent errors.
    pub fn set_process(&mut self, name: &str) {
        self.process = name.to_string();
    }

    fn err<T>(&self, kind: TypeErrorKind, span: Span) -> Result<T, TypeError> {
        Err(TypeError { kind, span, process: self.process.clone() })
    }

    fn show(&self, t: &TypeExpr) -> String {
        print_type_with(t, Some(&self.cmap))
    }

    fn unfold(&mut self, t: &TypeExpr, span: Span) -> Result<TypeExpr, TypeError> {
        match unfold(self.sig, t) {
            Ok(u) => {
                if u != *t {
                    self.cmap.record(&u, t);
                }
                Ok(u)
            }
            Err(e) => self.err(TypeErrorKind::IllFormedType(e.to_string()), span),
        }
    }

    fn equal(&mut self, vars: &[String], expected: &TypeExpr, found: &TypeExpr, span: Span) -> TResult {
        let verdict = self.eq.check(vars, expected, found);
        let ok = verdict.is_equal();
        self.queries.push(QueryRecord {
            expected: expected.clone(),
            found: found.clone(),
            verdict: verdict.clone(),
        });
        if ok {
            Ok(())
        } else {
            let kind = TypeErrorKind::TypeMismatch {
                expected: self.show(expected),
                found: self.show(found),
                verdict: Box::new(verdict),
            };
            self.err(kind, span)
        }
    }

    fn protocol<T>(&self, chan: &str, found: &TypeExpr, action: &str, span: Span) -> Result<T, TypeError> {
        let kind = TypeErrorKind::ProtocolMismatch {
            chan: chan.into(),
            found: self.show(found),
            action: action.into(),
        };
        self.err(kind, span)
    }

    fn fresh_name(&self, ctx: &TypingContext, x: &str, span: Span) -> TResult {
        if ctx.channels.contains_key(x) || ctx.offered.0 == x {
            return self.err(TypeErrorKind::Shadowing(x.into()), span);
        }
        Ok(())
    }

    fn client_type(&self, ctx: &TypingContext, c: &str, span: Span) -> Result<TypeExpr, TypeError> {
        match ctx.channels.get(c) {
            Some(t) => Ok(t.clone()),
            None => self.err(TypeErrorKind::UnknownChannel(c.into()), span),
        }
    }

    /// Checks one definition against its declaration.
    pub fn check_def(&mut self, def: &ProcDef, decl: &ProcDecl) -> TResult {
        self.process = def.name.clone();
        if def.params.len() != decl.params.len() {
            let kind = TypeErrorKind::TypeArityMismatch {
                name: def.name.clone(),
                expected: decl.params.len(),
                found: def.params.len(),
            };
            return self.err(kind, def.span);
        }
        if def.args.len() != decl.uses.len() {
            let kind = TypeErrorKind::ChannelArityMismatch {
                name: def.name.clone(),
                expected: decl.uses.len(),
                found: def.args.len(),
            };
            return self.err(kind, def.span);
        }
        let sigma = substitution(
            &decl.params,
            &def.params.iter().cloned().map(TypeExpr::Var).collect::<Vec<_>>(),
        );
        let ctx = TypingContext {
            typevars: def.params.clone(),
            channels: def
                .args
                .iter()
                .zip(&decl.uses)
                .map(|(c, (_, t))| (c.clone(), t.subst(&sigma)))
                .collect(),
            offered: (def.offer.clone(), decl.offer.1.subst(&sigma)),
        };
        self.check_process(ctx, &def.body)
    }

    /// Checks `ctx ⊢ p`, under whatever process name was last set.
    pub fn check_process(&mut self, mut ctx: TypingContext, p: &Proc) -> TResult {
        let span = p.span;
        match &p.kind {
            ProcKind::SendLabel { chan, label, cont } => {
                let providing = *chan == ctx.offered.0;
                let t = if providing { ctx.offered.1.clone() } else { self.client_type(&ctx, chan, span)? };
                let u = self.unfold(&t, span)?;
                let bs = match (&u, providing) {
                    (TypeExpr::Internal(bs), true) | (TypeExpr::External(bs), false) => bs,
                    _ => return self.protocol(chan, &t, &format!("sending label `{label}`"), span),
                };
                let Some((_, next)) = bs.iter().find(|(l, _)| l == label) else {
                    let kind = TypeErrorKind::LabelSetMismatch {
                        expected: bs.iter().map(|(l, _)| l.clone()).collect(),
                        found: vec![label.clone()],
                    };
                    return self.err(kind, span);
                };
                let next = next.clone();
                if providing {
                    ctx.offered.1 = next;
                } else {
                    ctx.channels.insert(chan.clone(), next);
                }
                self.check_process(ctx, cont)
            }
            ProcKind::Case { chan, branches } => {
                let providing = *chan == ctx.offered.0;
                let t = if providing { ctx.offered.1.clone() } else { self.client_type(&ctx, chan, span)? };
                let u = self.unfold(&t, span)?;
                let bs = match (&u, providing) {
                    (TypeExpr::External(bs), true) | (TypeExpr::Internal(bs), false) => bs.clone(),
                    _ => return self.protocol(chan, &t, "case analysis", span),
                };
                let expected: BTreeSet<&String> = bs.iter().map(|(l, _)| l).collect();
                let found: BTreeSet<&String> = branches.iter().map(|(l, _)| l).collect();
                if expected != found || found.len() != branches.len() {
                    let kind = TypeErrorKind::LabelSetMismatch {
                        expected: expected.into_iter().cloned().collect(),
                        found: branches.iter().map(|(l, _)| l.clone()).collect(),
                    };
                    return self.err(kind, span);
                }
                for (l, body) in branches {
                    let next = bs.iter().find(|(m, _)| m == l).expect("label sets agree").1.clone();
                    let mut c2 = ctx.clone();
                    if providing {
                        c2.offered.1 = next;
                    } else {
                        c2.channels.insert(chan.clone(), next);
                    }
                    self.check_process(c2, body)?;
                }
                Ok(())
            }
            ProcKind::SendChan { chan, payload, cont } => {
                if payload == chan || *payload == ctx.offered.0 {
                    let msg = format!("channel `{payload}` cannot be sent along `{chan}`");
                    return self.err(TypeErrorKind::LinearityViolation(msg), span);
                }
                let providing = *chan == ctx.offered.0;
                let t = if providing { ctx.offered.1.clone() } else { self.client_type(&ctx, chan, span)? };
                let u = self.unfold(&t, span)?;
                let (a, b) = match (&u, providing) {
                    (TypeExpr::Tensor(a, b), true) | (TypeExpr::Lolli(a, b), false) => {
                        ((**a).clone(), (**b).clone())
                    }
                    _ => return self.protocol(chan, &t, "sending a channel", span),
                };
                let found = self.client_type(&ctx, payload, span)?;
                self.equal(&ctx.typevars, &a, &found, span)?;
                ctx.channels.shift_remove(payload);
                if providing {
                    ctx.offered.1 = b;
                } else {
                    ctx.channels.insert(chan.clone(), b);
                }
                self.check_process(ctx, cont)
            }
            ProcKind::RecvChan { chan, bound, cont } => {
                self.fresh_name(&ctx, bound, span)?;
                let providing = *chan == ctx.offered.0;
                let t = if providing { ctx.offered.1.clone() } else { self.client_type(&ctx, chan, span)? };
                let u = self.unfold(&t, span)?;
                let (a, b) = match (&u, providing) {
                    (TypeExpr::Lolli(a, b), true) | (TypeExpr::Tensor(a, b), false) => {
                        ((**a).clone(), (**b).clone())
                    }
                    _ => return self.protocol(chan, &t, "receiving a channel", span),
                };
                if providing {
                    ctx.offered.1 = b;
                } else {
                    ctx.channels.insert(chan.clone(), b);
                }
                ctx.channels.insert(bound.clone(), a);
                self.check_process(ctx, cont)
            }
            ProcKind::Close { chan } => {
                if *chan != ctx.offered.0 {
                    let t = self.client_type(&ctx, chan, span)?;
                    return self.protocol(chan, &t, "close (only the offered channel can be closed)", span);
                }
                let t = ctx.offered.1.clone();
                if self.unfold(&t, span)? != TypeExpr::One {
                    return self.protocol(chan, &t, "close", span);
                }
                if !ctx.channels.is_empty() {
                    let left: Vec<&str> = ctx.channels.keys().map(String::as_str).collect();
                    let msg = format!("channels left unused: {}", left.join(", "));
                    return self.err(TypeErrorKind::LinearityViolation(msg), span);
                }
                Ok(())
            }
            ProcKind::Wait { chan, cont } => {
                let t = if *chan == ctx.offered.0 {
                    return self.protocol(chan, &ctx.offered.1.clone(), "wait on the offered channel", span);
                } else {
                    self.client_type(&ctx, chan, span)?
                };
                if self.unfold(&t, span)? != TypeExpr::One {
                    return self.protocol(chan, &t, "wait", span);
                }
                ctx.channels.shift_remove(chan);
                self.check_process(ctx, cont)
            }
            ProcKind::Forward { offer, target } => {
                if *offer != ctx.offered.0 {
                    let msg = format!("`{offer}` is not the offered channel `{}`", ctx.offered.0);
                    return self.err(TypeErrorKind::LinearityViolation(msg), span);
                }
                let found = self.client_type(&ctx, target, span)?;
                if ctx.channels.len() != 1 {
                    let rest: Vec<&str> =
                        ctx.channels.keys().filter(|c| *c != target).map(String::as_str).collect();
                    let msg = format!("channels left unused: {}", rest.join(", "));
                    return self.err(TypeErrorKind::LinearityViolation(msg), span);
                }
                let expected = ctx.offered.1.clone();
                self.equal(&ctx.typevars, &expected, &found, span)
            }
            ProcKind::Spawn { bound, name, type_args, chan_args, cont } => {
                let result = self.call(&mut ctx, name, type_args, chan_args, span)?;
                self.fresh_name(&ctx, bound, span)?;
                ctx.channels.insert(bound.clone(), result);
                self.check_process(ctx, cont)
            }
            ProcKind::TailCall { offer, name, type_args, chan_args } => {
                let tmp = format!("%tail{}", self.fresh);
                self.fresh += 1;
                let fwd = Proc::new(ProcKind::Forward { offer: offer.clone(), target: tmp.clone() }, span);
                let spawn = ProcKind::Spawn {
                    bound: tmp,
                    name: name.clone(),
                    type_args: type_args.clone(),
                    chan_args: chan_args.clone(),
                    cont: Box::new(fwd),
                };
                self.check_process(ctx, &Proc::new(spawn, span))
            }
        }
    }

    /// Consumes the arguments of a call and returns the type it offers.
    fn call(
        &mut self,
        ctx: &mut TypingContext,
        name: &str,
        type_args: &[TypeExpr],
        chan_args: &[String],
        span: Span,
    ) -> Result<TypeExpr, TypeError> {
        let Some(decl) = self.sig.decls.get(name) else {
            return self.err(TypeErrorKind::UnknownProcess(name.into()), span);
        };
        if type_args.len() != decl.params.len() {
            let kind = TypeErrorKind::TypeArityMismatch {
                name: name.into(),
                expected: decl.params.len(),
                found: type_args.len(),
            };
            return self.err(kind, span);
        }
        if chan_args.len() != decl.uses.len() {
            let kind = TypeErrorKind::ChannelArityMismatch {
                name: name.into(),
                expected: decl.uses.len(),
                found: chan_args.len(),
            };
            return self.err(kind, span);
        }
        let sigma = substitution(&decl.params, type_args);
        let uses: Vec<TypeExpr> = decl.uses.iter().map(|(_, t)| t.subst(&sigma)).collect();
        let offer = decl.offer.1.subst(&sigma);
        for (i, (y, expected)) in chan_args.iter().zip(&uses).enumerate() {
            if chan_args[..i].contains(y) || *y == ctx.offered.0 {
                let msg = format!("channel `{y}` is passed to `{name}` more than once or is the offered channel");
                return self.err(TypeErrorKind::LinearityViolation(msg), span);
            }
            let found = self.client_type(ctx, y, span)?;
            self.equal(&ctx.typevars, expected, &found, span)?;
        }
        for y in chan_args {
            ctx.channels.shift_remove(y);
        }
        Ok(offer)
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
    pub invalid_eqtypes: Vec<InvalidEqtype>,
    pub errors: Vec<TypeError>,
    /// Definitions that checked successfully, in source order.
    pub checked: Vec<String>,
    pub queries: Vec<QueryRecord>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.invalid_eqtypes.is_empty() && self.errors.is_empty()
    }

    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> = self.violations.iter().cloned().map(Diagnostic::from).collect();
        out.extend(
            self.invalid_eqtypes
                .iter()
                .map(|e| Diagnostic::error(e.span(), "invalid-eqtype", e.message())),
        );
        out.extend(self.errors.iter().map(Diagnostic::from));
        out
    }
}

/// Validates, seeds and checks every process definition, reporting all failures.
pub fn check_all(sig: &Signature, depth_bound: usize) -> CheckReport {
    let mut report = CheckReport { violations: validate_signature(sig), ..CheckReport::default() };
    if !report.violations.is_empty() {
        return report;
    }
    let renamed = rename_signature(sig);
    let seeds = match seed_and_validate(&renamed, depth_bound) {
        Ok(s) => s,
        Err(bad) => {
            report.invalid_eqtypes = bad;
            return report;
        }
    };
    let mut checker = Checker::new(sig, &renamed, seeds, depth_bound);
    for decl in sig.decls.values() {
        if !sig.defs.contains_key(&decl.name) {
            report.errors.push(TypeError {
                kind: TypeErrorKind::MissingDefinition(decl.name.clone()),
                span: decl.span,
                process: decl.name.clone(),
            });
        }
    }
    for def in sig.defs.values() {
        let res = match sig.decls.get(&def.name) {
            Some(decl) => checker.check_def(def, decl),
            None => Err(TypeError {
                kind: TypeErrorKind::UnknownProcess(def.name.clone()),
                span: def.span,
                process: def.name.clone(),
            }),
        };
        match res {
            Ok(()) => report.checked.push(def.name.clone()),
            Err(e) => report.errors.push(e),
        }
    }
    report.queries = std::mem::take(&mut checker.queries);
    report
}
