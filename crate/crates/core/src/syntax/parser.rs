use super::lexer::{lex, Tok, Token};
use crate::ast::{
    EqTypeDecl, Pos, Proc, ProcDecl, ProcDef, ProcKind, Signature, Span, TypeDef, TypeExpr,
};
use crate::diagnostics::Diagnostic;

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    prev_end: Pos,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        self.prev_end = t.span.end;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            self.span(),
            "syntax",
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(&tok.describe())
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    fn from(&self, start: Pos) -> Span {
        Span::new(start, self.prev_end)
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<TypeExpr> {
        let lhs = self.tensor()?;
        if self.eat(&Tok::Lolli) {
            Ok(TypeExpr::lolli(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn tensor(&mut self) -> PResult<TypeExpr> {
        let lhs = self.atom()?;
        if self.eat(&Tok::Star) {
            Ok(TypeExpr::tensor(lhs, self.tensor()?))
        } else {
            Ok(lhs)
        }
    }

    fn atom(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::One => {
                self.bump();
                Ok(TypeExpr::One)
            }
            Tok::Plus => {
                self.bump();
                Ok(TypeExpr::Internal(self.branches()?))
            }
            Tok::Amp => {
                self.bump();
                Ok(TypeExpr::External(self.branches()?))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(TypeExpr::Named(name, self.type_args()?))
            }
            _ => self.error("a type"),
        }
    }

    fn branches(&mut self) -> PResult<Vec<(String, TypeExpr)>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                let l = self.ident("a label")?;
                self.expect(Tok::Colon)?;
                out.push((l, self.ty()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        }
        Ok(out)
    }

    /// `[A][B]` or `[A, B]`.
    fn type_args(&mut self) -> PResult<Vec<TypeExpr>> {
        let mut out = Vec::new();
        while self.eat(&Tok::LBracket) {
            loop {
                out.push(self.ty()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(out)
    }

    fn params(&mut self) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        while self.eat(&Tok::LBracket) {
            loop {
                out.push(self.ident("a type parameter")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(out)
    }

    // ---- processes ----

    fn process(&mut self) -> PResult<Proc> {
        let start = self.span().start;
        let kind = match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let p = self.process()?;
                self.expect(Tok::RParen)?;
                return Ok(p);
            }
            Tok::Case => {
                self.bump();
                let chan = self.ident("a channel")?;
                self.expect(Tok::LParen)?;
                let mut branches = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        let l = self.ident("a label")?;
                        self.expect(Tok::FatArrow)?;
                        branches.push((l, self.process()?));
                        if !self.eat(&Tok::Bar) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                }
                ProcKind::Case { chan, branches }
            }
            Tok::Send => {
                self.bump();
                let chan = self.ident("a channel")?;
                let payload = self.ident("a channel")?;
                self.expect(Tok::Semi)?;
                ProcKind::SendChan { chan, payload, cont: Box::new(self.process()?) }
            }
            Tok::Close => {
                self.bump();
                ProcKind::Close { chan: self.ident("a channel")? }
            }
            Tok::Wait => {
                self.bump();
                let chan = self.ident("a channel")?;
                self.expect(Tok::Semi)?;
                ProcKind::Wait { chan, cont: Box::new(self.process()?) }
            }
            Tok::Ident(c) => match self.peek_at(1) {
                Tok::Dot => {
                    self.bump();
                    self.bump();
                    let label = self.ident("a label")?;
                    self.expect(Tok::Semi)?;
                    ProcKind::SendLabel { chan: c, label, cont: Box::new(self.process()?) }
                }
                Tok::Fwd => {
                    self.bump();
                    self.bump();
                    ProcKind::Forward { offer: c, target: self.ident("a channel")? }
                }
                Tok::LArrow => {
                    self.bump();
                    self.bump();
                    if self.eat(&Tok::Recv) {
                        let chan = self.ident("a channel")?;
                        self.expect(Tok::Semi)?;
                        ProcKind::RecvChan { chan, bound: c, cont: Box::new(self.process()?) }
                    } else {
                        let name = self.ident("a process name or `recv`")?;
                        let type_args = self.type_args()?;
                        let mut chan_args = Vec::new();
                        while let Tok::Ident(a) = self.peek().clone() {
                            self.bump();
                            chan_args.push(a);
                        }
                        if self.eat(&Tok::Semi) {
                            let cont = Box::new(self.process()?);
                            ProcKind::Spawn { bound: c, name, type_args, chan_args, cont }
                        } else {
                            ProcKind::TailCall { offer: c, name, type_args, chan_args }
                        }
                    }
                }
                _ => {
                    self.bump();
                    return self.error("`.`, `<-` or `<->`");
                }
            },
            _ => return self.error("a process"),
        };
        Ok(Proc::new(kind, self.from(start)))
    }

    // ---- declarations ----

    fn typedef(&mut self) -> PResult<TypeDef> {
        let start = self.span().start;
        self.expect(Tok::Type)?;
        let name = self.ident("a type name")?;
        let params = self.params()?;
        self.expect(Tok::Eq)?;
        let body = self.ty()?;
        let body = resolve(&body, &|n| params.iter().any(|p| p == n));
        Ok(TypeDef { name, params, body, span: self.from(start) })
    }

    fn decl(&mut self) -> PResult<ProcDecl> {
        let start = self.span().start;
        self.expect(Tok::Decl)?;
        let name = self.ident("a process name")?;
        let params = self.params()?;
        self.expect(Tok::Colon)?;
        let mut uses = Vec::new();
        if !self.eat(&Tok::Dot) {
            while self.peek() == &Tok::LParen {
                uses.push(self.typed_chan()?);
            }
        }
        self.expect(Tok::Turnstile)?;
        let offer = self.typed_chan()?;
        let is_param = |n: &str| params.iter().any(|p| p == n);
        let uses = uses.into_iter().map(|(c, t)| (c, resolve(&t, &is_param))).collect();
        let offer = (offer.0, resolve(&offer.1, &is_param));
        Ok(ProcDecl { name, params, uses, offer, span: self.from(start) })
    }

    fn typed_chan(&mut self) -> PResult<(String, TypeExpr)> {
        self.expect(Tok::LParen)?;
        let c = self.ident("a channel")?;
        self.expect(Tok::Colon)?;
        let t = self.ty()?;
        self.expect(Tok::RParen)?;
        Ok((c, t))
    }

    fn procdef(&mut self) -> PResult<ProcDef> {
        let start = self.span().start;
        self.expect(Tok::Proc)?;
        let offer = self.ident("a channel")?;
        self.expect(Tok::LArrow)?;
        let name = self.ident("a process name")?;
        let params = self.params()?;
        let mut args = Vec::new();
        while let Tok::Ident(a) = self.peek().clone() {
            self.bump();
            args.push(a);
        }
        self.expect(Tok::Eq)?;
        let body = self.process()?;
        let body = resolve_proc(&body, &|n| params.iter().any(|p| p == n));
        Ok(ProcDef { name, params, offer, args, body, span: self.from(start) })
    }

    fn eqtype(&mut self) -> PResult<EqTypeDecl> {
        let start = self.span().start;
        self.expect(Tok::Eqtype)?;
        let left = self.ty()?;
        self.expect(Tok::Eq)?;
        let right = self.ty()?;
        Ok(EqTypeDecl { vars: Vec::new(), left, right, span: self.from(start) })
    }

    fn recover(&mut self) {
        self.bump();
        while !self.peek().is_decl_start() && self.peek() != &Tok::Eof {
            self.bump();
        }
    }
}

/// Turns nullary names satisfying `is_var` into type variables.
fn resolve(t: &TypeExpr, is_var: &dyn Fn(&str) -> bool) -> TypeExpr {
    match t {
        TypeExpr::Named(n, args) if args.is_empty() && is_var(n) => TypeExpr::Var(n.clone()),
        TypeExpr::Named(n, args) => {
            TypeExpr::Named(n.clone(), args.iter().map(|a| resolve(a, is_var)).collect())
        }
        TypeExpr::Internal(bs) => {
            TypeExpr::Internal(bs.iter().map(|(l, b)| (l.clone(), resolve(b, is_var))).collect())
        }
        TypeExpr::External(bs) => {
            TypeExpr::External(bs.iter().map(|(l, b)| (l.clone(), resolve(b, is_var))).collect())
        }
        TypeExpr::Tensor(a, b) => TypeExpr::tensor(resolve(a, is_var), resolve(b, is_var)),
        TypeExpr::Lolli(a, b) => TypeExpr::lolli(resolve(a, is_var), resolve(b, is_var)),
        TypeExpr::One | TypeExpr::Var(_) => t.clone(),
    }
}

fn resolve_proc(p: &Proc, is_var: &dyn Fn(&str) -> bool) -> Proc {
    let kind = match &p.kind {
        ProcKind::SendLabel { chan, label, cont } => ProcKind::SendLabel {
            chan: chan.clone(),
            label: label.clone(),
            cont: Box::new(resolve_proc(cont, is_var)),
        },
        ProcKind::Case { chan, branches } => ProcKind::Case {
            chan: chan.clone(),
            branches: branches.iter().map(|(l, b)| (l.clone(), resolve_proc(b, is_var))).collect(),
        },
        ProcKind::SendChan { chan, payload, cont } => ProcKind::SendChan {
            chan: chan.clone(),
            payload: payload.clone(),
            cont: Box::new(resolve_proc(cont, is_var)),
        },
        ProcKind::RecvChan { chan, bound, cont } => ProcKind::RecvChan {
            chan: chan.clone(),
            bound: bound.clone(),
            cont: Box::new(resolve_proc(cont, is_var)),
        },
        ProcKind::Wait { chan, cont } => {
            ProcKind::Wait { chan: chan.clone(), cont: Box::new(resolve_proc(cont, is_var)) }
        }
        ProcKind::Close { .. } | ProcKind::Forward { .. } => p.kind.clone(),
        ProcKind::Spawn { bound, name, type_args, chan_args, cont } => ProcKind::Spawn {
            bound: bound.clone(),
            name: name.clone(),
            type_args: type_args.iter().map(|t| resolve(t, is_var)).collect(),
            chan_args: chan_args.clone(),
            cont: Box::new(resolve_proc(cont, is_var)),
        },
        ProcKind::TailCall { offer, name, type_args, chan_args } => ProcKind::TailCall {
            offer: offer.clone(),
            name: name.clone(),
            type_args: type_args.iter().map(|t| resolve(t, is_var)).collect(),
            chan_args: chan_args.clone(),
        },
    };
    Proc::new(kind, p.span)
}

/// Parses a whole `.nst` file. Errors recover at the next top-level declaration.
pub fn parse_signature(src: &str) -> (Signature, Vec<Diagnostic>) {
    let (toks, mut diags) = lex(src);
    let mut p = Parser { toks, pos: 0, prev_end: Pos { line: 1, col: 1 } };
    let mut sig = Signature::default();
    let duplicate =
        |span, what: &str, name: &str| Diagnostic::error(span, "duplicate-definition", format!("{what} `{name}` is defined twice"));

    while p.peek() != &Tok::Eof {
        let res = match p.peek() {
            Tok::Type => p.typedef().map(|d| {
                if sig.types.contains_key(&d.name) {
                    diags.push(duplicate(d.span, "type", &d.name));
                } else {
                    sig.types.insert(d.name.clone(), d);
                }
            }),
            Tok::Decl => p.decl().map(|d| {
                if sig.decls.contains_key(&d.name) {
                    diags.push(duplicate(d.span, "declaration of", &d.name));
                } else {
                    sig.decls.insert(d.name.clone(), d);
                }
            }),
            Tok::Proc => p.procdef().map(|d| {
                if sig.defs.contains_key(&d.name) {
                    diags.push(duplicate(d.span, "process", &d.name));
                } else {
                    sig.defs.insert(d.name.clone(), d);
                }
            }),
            Tok::Eqtype => p.eqtype().map(|e| sig.eqtypes.push(e)),
            _ => p.error("`type`, `decl`, `proc` or `eqtype`"),
        };
        if let Err(d) = res {
            diags.push(d);
            p.recover();
        }
    }

    // Names that are not defined types are the variables of an eqtype.
    let defined: Vec<String> = sig.types.keys().cloned().collect();
    let is_var = |n: &str| !defined.iter().any(|d| d == n);
    for eq in &mut sig.eqtypes {
        eq.left = resolve(&eq.left, &is_var);
        eq.right = resolve(&eq.right, &is_var);
        let mut vars = eq.left.free_vars();
        for v in eq.right.free_vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        eq.vars = vars;
    }
    (sig, diags)
}

/// Parses a standalone type against `sig`; undefined nullary names become variables.
pub fn parse_type(src: &str, sig: &Signature) -> Result<TypeExpr, Diagnostic> {
    let (toks, diags) = lex(src);
    if let Some(d) = diags.into_iter().next() {
        return Err(d);
    }
    let mut p = Parser { toks, pos: 0, prev_end: Pos { line: 1, col: 1 } };
    let t = p.ty()?;
    if p.peek() != &Tok::Eof {
        return p.error("end of input");
    }
    Ok(resolve(&t, &|n| !sig.types.contains_key(n)))
}
