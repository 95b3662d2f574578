use super::{Span, TypeExpr};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proc {
    pub kind: ProcKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcKind {
    /// `c.k ; P`
    SendLabel { chan: String, label: String, cont: Box<Proc> },
    /// `case c ( l => P | ... )`
    Case { chan: String, branches: Vec<(String, Proc)> },
    /// `send c d ; P`
    SendChan { chan: String, payload: String, cont: Box<Proc> },
    /// `y <- recv c ; P`
    RecvChan { chan: String, bound: String, cont: Box<Proc> },
    /// `close c`
    Close { chan: String },
    /// `wait c ; P`
    Wait { chan: String, cont: Box<Proc> },
    /// `c <-> d`
    Forward { offer: String, target: String },
    /// `x <- f[A]... y1 ... yn ; P`
    Spawn {
        bound: String,
        name: String,
        type_args: Vec<TypeExpr>,
        chan_args: Vec<String>,
        cont: Box<Proc>,
    },
    /// `c <- f[A]... y1 ... yn`
    TailCall { offer: String, name: String, type_args: Vec<TypeExpr>, chan_args: Vec<String> },
}

impl Proc {
    pub fn new(kind: ProcKind, span: Span) -> Self {
        Proc { kind, span }
    }

    /// Free channel names in first-occurrence order.
    pub fn free_channels(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let mut note = |c: &String, bound: &Vec<String>| {
            if !bound.contains(c) && !out.contains(c) {
                out.push(c.clone());
            }
        };
        match &self.kind {
            ProcKind::SendLabel { chan, cont, .. } => {
                note(chan, bound);
                cont.collect_free(bound, out);
            }
            ProcKind::Case { chan, branches } => {
                note(chan, bound);
                for (_, p) in branches {
                    p.collect_free(bound, out);
                }
            }
            ProcKind::SendChan { chan, payload, cont } => {
                note(chan, bound);
                note(payload, bound);
                cont.collect_free(bound, out);
            }
            ProcKind::RecvChan { chan, bound: y, cont } => {
                note(chan, bound);
                bound.push(y.clone());
                cont.collect_free(bound, out);
                bound.pop();
            }
            ProcKind::Close { chan } => note(chan, bound),
            ProcKind::Wait { chan, cont } => {
                note(chan, bound);
                cont.collect_free(bound, out);
            }
            ProcKind::Forward { offer, target } => {
                note(offer, bound);
                note(target, bound);
            }
            ProcKind::Spawn { bound: x, chan_args, cont, .. } => {
                for c in chan_args {
                    note(c, bound);
                }
                bound.push(x.clone());
                cont.collect_free(bound, out);
                bound.pop();
            }
            ProcKind::TailCall { offer, chan_args, .. } => {
                note(offer, bound);
                for c in chan_args {
                    note(c, bound);
                }
            }
        }
    }

    /// Simultaneous renaming of free channels; binders shadow.
    pub fn subst_chans(&self, map: &HashMap<String, String>) -> Proc {
        if map.is_empty() {
            return self.clone();
        }
        let r = |c: &String| map.get(c).cloned().unwrap_or_else(|| c.clone());
        let without = |x: &String| {
            let mut m = map.clone();
            m.remove(x);
            m
        };
        let kind = match &self.kind {
            ProcKind::SendLabel { chan, label, cont } => ProcKind::SendLabel {
                chan: r(chan),
                label: label.clone(),
                cont: Box::new(cont.subst_chans(map)),
            },
            ProcKind::Case { chan, branches } => ProcKind::Case {
                chan: r(chan),
                branches: branches.iter().map(|(l, p)| (l.clone(), p.subst_chans(map))).collect(),
            },
            ProcKind::SendChan { chan, payload, cont } => ProcKind::SendChan {
                chan: r(chan),
                payload: r(payload),
                cont: Box::new(cont.subst_chans(map)),
            },
            ProcKind::RecvChan { chan, bound, cont } => ProcKind::RecvChan {
                chan: r(chan),
                bound: bound.clone(),
                cont: Box::new(cont.subst_chans(&without(bound))),
            },
            ProcKind::Close { chan } => ProcKind::Close { chan: r(chan) },
            ProcKind::Wait { chan, cont } => {
                ProcKind::Wait { chan: r(chan), cont: Box::new(cont.subst_chans(map)) }
            }
            ProcKind::Forward { offer, target } => {
                ProcKind::Forward { offer: r(offer), target: r(target) }
            }
            ProcKind::Spawn { bound, name, type_args, chan_args, cont } => ProcKind::Spawn {
                bound: bound.clone(),
                name: name.clone(),
                type_args: type_args.clone(),
                chan_args: chan_args.iter().map(r).collect(),
                cont: Box::new(cont.subst_chans(&without(bound))),
            },
            ProcKind::TailCall { offer, name, type_args, chan_args } => ProcKind::TailCall {
                offer: r(offer),
                name: name.clone(),
                type_args: type_args.clone(),
                chan_args: chan_args.iter().map(r).collect(),
            },
        };
        Proc { kind, span: self.span }
    }

    /// Substitutes type variables inside the type arguments of calls.
    pub fn subst_types(&self, sigma: &HashMap<String, TypeExpr>) -> Proc {
        if sigma.is_empty() {
            return self.clone();
        }
        let kind = match &self.kind {
            ProcKind::SendLabel { chan, label, cont } => ProcKind::SendLabel {
                chan: chan.clone(),
                label: label.clone(),
                cont: Box::new(cont.subst_types(sigma)),
            },
            ProcKind::Case { chan, branches } => ProcKind::Case {
                chan: chan.clone(),
                branches: branches.iter().map(|(l, p)| (l.clone(), p.subst_types(sigma))).collect(),
            },
            ProcKind::SendChan { chan, payload, cont } => ProcKind::SendChan {
                chan: chan.clone(),
                payload: payload.clone(),
                cont: Box::new(cont.subst_types(sigma)),
            },
            ProcKind::RecvChan { chan, bound, cont } => ProcKind::RecvChan {
                chan: chan.clone(),
                bound: bound.clone(),
                cont: Box::new(cont.subst_types(sigma)),
            },
            ProcKind::Close { .. } | ProcKind::Forward { .. } => self.kind.clone(),
            ProcKind::Wait { chan, cont } => {
                ProcKind::Wait { chan: chan.clone(), cont: Box::new(cont.subst_types(sigma)) }
            }
            ProcKind::Spawn { bound, name, type_args, chan_args, cont } => ProcKind::Spawn {
                bound: bound.clone(),
                name: name.clone(),
                type_args: type_args.iter().map(|t| t.subst(sigma)).collect(),
                chan_args: chan_args.clone(),
                cont: Box::new(cont.subst_types(sigma)),
            },
            ProcKind::TailCall { offer, name, type_args, chan_args } => ProcKind::TailCall {
                offer: offer.clone(),
                name: name.clone(),
                type_args: type_args.iter().map(|t| t.subst(sigma)).collect(),
                chan_args: chan_args.clone(),
            },
        };
        Proc { kind, span: self.span }
    }

    /// Calls this process makes, with their type arguments.
    pub fn calls(&self) -> Vec<(&str, &[TypeExpr], Span)> {
        let mut out = Vec::new();
        self.collect_calls(&mut out);
        out
    }

    fn collect_calls<'a>(&'a self, out: &mut Vec<(&'a str, &'a [TypeExpr], Span)>) {
        match &self.kind {
            ProcKind::SendLabel { cont, .. }
            | ProcKind::SendChan { cont, .. }
            | ProcKind::RecvChan { cont, .. }
            | ProcKind::Wait { cont, .. } => cont.collect_calls(out),
            ProcKind::Case { branches, .. } => {
                for (_, p) in branches {
                    p.collect_calls(out);
                }
            }
            ProcKind::Close { .. } | ProcKind::Forward { .. } => {}
            ProcKind::Spawn { name, type_args, cont, .. } => {
                out.push((name, type_args, self.span));
                cont.collect_calls(out);
            }
            ProcKind::TailCall { name, type_args, .. } => out.push((name, type_args, self.span)),
        }
    }
}

/// `decl f[x]... : (c1 : A1) ... (cn : An) |- (c : A)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcDecl {
    pub name: String,
    pub params: Vec<String>,
    pub uses: Vec<(String, TypeExpr)>,
    pub offer: (String, TypeExpr),
    pub span: Span,
}

/// `proc c <- f[x]... c1 ... cn = P`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcDef {
    pub name: String,
    pub params: Vec<String>,
    pub offer: String,
    pub args: Vec<String>,
    pub body: Proc,
    pub span: Span,
}
