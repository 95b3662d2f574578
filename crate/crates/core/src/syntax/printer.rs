use crate::ast::{EqTypeDecl, Proc, ProcDecl, ProcDef, ProcKind, Signature, TypeDef, TypeExpr};
use std::collections::HashMap;
use std::fmt::Write;

/// Maps expanded type bodies back to the name application they came from.
#[derive(Debug, Clone, Default)]
pub struct CompressionMap {
    map: HashMap<TypeExpr, TypeExpr>,
}

impl CompressionMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Remembers that `expanded` is the unfolding of `app`. The first entry wins.
    pub fn record(&mut self, expanded: &TypeExpr, app: &TypeExpr) {
        if expanded.is_structural() && !self.map.contains_key(expanded) {
            self.map.insert(expanded.clone(), app.clone());
        }
    }

    pub fn lookup(&self, t: &TypeExpr) -> Option<&TypeExpr> {
        self.map.get(t)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

pub fn print_type(t: &TypeExpr) -> String {
    print_type_with(t, None)
}

/// Prints `t`, replacing the outermost subterms found in `cmap` by their names.
pub fn print_type_with(t: &TypeExpr, cmap: Option<&CompressionMap>) -> String {
    let mut s = String::new();
    write_type(&mut s, t, cmap);
    s
}

fn write_type(s: &mut String, t: &TypeExpr, cmap: Option<&CompressionMap>) {
    if let Some(app) = cmap.and_then(|m| m.lookup(t)) {
        write_type(s, app, None);
        return;
    }
    match t {
        TypeExpr::One => s.push('1'),
        TypeExpr::Var(v) => s.push_str(v),
        TypeExpr::Named(n, args) => {
            s.push_str(n);
            for a in args {
                s.push('[');
                write_type(s, a, cmap);
                s.push(']');
            }
        }
        TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
            s.push(if matches!(t, TypeExpr::Internal(_)) { '+' } else { '&' });
            s.push('{');
            for (i, (l, b)) in bs.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{l} : ");
                write_type(s, b, cmap);
            }
            s.push('}');
        }
        TypeExpr::Tensor(a, b) => {
            write_operand(s, a, matches!(**a, TypeExpr::Tensor(..) | TypeExpr::Lolli(..)), cmap);
            s.push_str(" * ");
            write_operand(s, b, matches!(**b, TypeExpr::Lolli(..)), cmap);
        }
        TypeExpr::Lolli(a, b) => {
            write_operand(s, a, matches!(**a, TypeExpr::Lolli(..)), cmap);
            s.push_str(" -o ");
            write_type(s, b, cmap);
        }
    }
}

fn write_operand(s: &mut String, t: &TypeExpr, paren: bool, cmap: Option<&CompressionMap>) {
    // A compressed operand prints as a name and needs no parentheses.
    let paren = paren && cmap.and_then(|m| m.lookup(t)).is_none();
    if paren {
        s.push('(');
    }
    write_type(s, t, cmap);
    if paren {
        s.push(')');
    }
}

fn type_args(args: &[TypeExpr]) -> String {
    args.iter().map(|a| format!("[{}]", print_type(a))).collect()
}

fn params(ps: &[String]) -> String {
    ps.iter().map(|p| format!("[{p}]")).collect()
}

/// One-line rendering of a process term.
pub fn print_proc(p: &Proc) -> String {
    match &p.kind {
        ProcKind::SendLabel { chan, label, cont } => format!("{chan}.{label} ; {}", print_proc(cont)),
        ProcKind::Case { chan, branches } => {
            let bs: Vec<String> =
                branches.iter().map(|(l, b)| format!("{l} => {}", print_proc(b))).collect();
            format!("case {chan} ( {} )", bs.join(" | "))
        }
        ProcKind::SendChan { chan, payload, cont } => {
            format!("send {chan} {payload} ; {}", print_proc(cont))
        }
        ProcKind::RecvChan { chan, bound, cont } => {
            format!("{bound} <- recv {chan} ; {}", print_proc(cont))
        }
        ProcKind::Close { chan } => format!("close {chan}"),
        ProcKind::Wait { chan, cont } => format!("wait {chan} ; {}", print_proc(cont)),
        ProcKind::Forward { offer, target } => format!("{offer} <-> {target}"),
        ProcKind::Spawn { bound, name, type_args: ts, chan_args, cont } => {
            let mut head = format!("{bound} <- {name}{}", type_args(ts));
            for c in chan_args {
                head.push(' ');
                head.push_str(c);
            }
            format!("{head} ; {}", print_proc(cont))
        }
        ProcKind::TailCall { offer, name, type_args: ts, chan_args } => {
            let mut s = format!("{offer} <- {name}{}", type_args(ts));
            for c in chan_args {
                s.push(' ');
                s.push_str(c);
            }
            s
        }
    }
}

pub fn print_typedef(d: &TypeDef) -> String {
    format!("type {}{} = {}", d.name, params(&d.params), print_type(&d.body))
}

pub fn print_eqtype(e: &EqTypeDecl) -> String {
    format!("eqtype {} = {}", print_type(&e.left), print_type(&e.right))
}

pub fn print_decl(d: &ProcDecl) -> String {
    let ctx = if d.uses.is_empty() {
        ".".to_string()
    } else {
        let parts: Vec<String> =
            d.uses.iter().map(|(c, t)| format!("({c} : {})", print_type(t))).collect();
        parts.join(" ")
    };
    format!(
        "decl {}{} : {ctx} |- ({} : {})",
        d.name,
        params(&d.params),
        d.offer.0,
        print_type(&d.offer.1)
    )
}

pub fn print_def(d: &ProcDef) -> String {
    let mut head = format!("proc {} <- {}{}", d.offer, d.name, params(&d.params));
    for a in &d.args {
        head.push(' ');
        head.push_str(a);
    }
    format!("{head} = {}", print_proc(&d.body))
}

/// Prints a whole signature, one declaration per line.
pub fn print_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for d in sig.types.values() {
        out.push_str(&print_typedef(d));
        out.push('\n');
    }
    for e in &sig.eqtypes {
        out.push_str(&print_eqtype(e));
        out.push('\n');
    }
    for d in sig.decls.values() {
        out.push_str(&print_decl(d));
        out.push('\n');
        if let Some(def) = sig.defs.get(&d.name) {
            out.push_str(&print_def(def));
            out.push('\n');
        }
    }
    for d in sig.defs.values().filter(|d| !sig.decls.contains_key(&d.name)) {
        out.push_str(&print_def(d));
        out.push('\n');
    }
    out
}
