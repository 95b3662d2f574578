//! Context-free session types and their embedding into unary type
//! constructors, where the parameter stands for the continuation.

use crate::ast::{Signature, Span, TypeDef, TypeExpr};
use crate::diagnostics::Diagnostic;
use crate::syntax::{lex, Tok, Token};
use indexmap::IndexMap;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cfst {
    Skip,
    Seq(Box<Cfst>, Box<Cfst>),
    IChoice(Vec<(String, Cfst)>),
    EChoice(Vec<(String, Cfst)>),
    Name(String),
}

impl Cfst {
    pub fn seq(a: Cfst, b: Cfst) -> Cfst {
        Cfst::Seq(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for Cfst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let branches = |f: &mut fmt::Formatter<'_>, op: &str, bs: &[(String, Cfst)]| {
            write!(f, "{op}{{")?;
            for (i, (l, s)) in bs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l} : {s}")?;
            }
            f.write_str("}")
        };
        match self {
            Cfst::Skip => f.write_str("skip"),
            Cfst::Name(n) => f.write_str(n),
            Cfst::IChoice(bs) => branches(f, "+", bs),
            Cfst::EChoice(bs) => branches(f, "&", bs),
            Cfst::Seq(a, b) => {
                if matches!(**a, Cfst::Seq(..)) {
                    write!(f, "({a}) ; {b}")
                } else {
                    write!(f, "{a} ; {b}")
                }
            }
        }
    }
}

/// Drops redundant `skip`s, nests sequences to the right and pushes
/// continuations into choices.
pub fn normalize(e: &Cfst) -> Cfst {
    match e {
        Cfst::Skip | Cfst::Name(_) => e.clone(),
        Cfst::IChoice(bs) => Cfst::IChoice(bs.iter().map(|(l, s)| (l.clone(), normalize(s))).collect()),
        Cfst::EChoice(bs) => Cfst::EChoice(bs.iter().map(|(l, s)| (l.clone(), normalize(s))).collect()),
        Cfst::Seq(a, b) => then(normalize(a), &normalize(b)),
    }
}

/// `x ; k` for normalized `x` and `k`.
fn then(x: Cfst, k: &Cfst) -> Cfst {
    if *k == Cfst::Skip {
        return x;
    }
    match x {
        Cfst::Skip => k.clone(),
        Cfst::Seq(p, q) => then(*p, &then(*q, k)),
        Cfst::IChoice(bs) => Cfst::IChoice(bs.into_iter().map(|(l, s)| (l, then(s, k))).collect()),
        Cfst::EChoice(bs) => Cfst::EChoice(bs.into_iter().map(|(l, s)| (l, then(s, k))).collect()),
        Cfst::Name(_) => Cfst::seq(x, k.clone()),
    }
}

/// One equation `type s = T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub name: String,
    pub body: Cfst,
    pub span: Span,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            self.toks[self.pos].span,
            "syntax",
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
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

    fn seq(&mut self) -> PResult<Cfst> {
        let first = self.atom()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            Ok(Cfst::seq(first, self.seq()?))
        } else {
            Ok(first)
        }
    }

    fn atom(&mut self) -> PResult<Cfst> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "skip" => {
                self.bump();
                Ok(Cfst::Skip)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Cfst::Name(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.seq()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Plus | Tok::Amp => {
                let internal = self.bump().tok == Tok::Plus;
                self.expect(Tok::LBrace)?;
                let mut bs = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        let l = self.ident("a label")?;
                        self.expect(Tok::Colon)?;
                        bs.push((l, self.seq()?));
                        if *self.peek() != Tok::Comma {
                            break;
                        }
                        self.bump();
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(if internal { Cfst::IChoice(bs) } else { Cfst::EChoice(bs) })
            }
            _ => self.error("a context-free session type"),
        }
    }

    fn equation(&mut self) -> PResult<Equation> {
        let start = self.toks[self.pos].span;
        self.expect(Tok::Type)?;
        let name = self.ident("a type name")?;
        self.expect(Tok::Eq)?;
        let body = self.seq()?;
        let end = self.toks[self.pos.saturating_sub(1)].span;
        Ok(Equation { name, body, span: start.to(end) })
    }
}

/// Parses `type s = T` equations; `%` starts a comment.
pub fn parse_cfst(src: &str) -> Result<Vec<Equation>, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(src);
    let mut p = Parser { toks, pos: 0 };
    let mut eqs = Vec::new();
    while *p.peek() != Tok::Eof {
        match p.equation() {
            Ok(e) => eqs.push(e),
            Err(d) => {
                diags.push(d);
                p.bump();
                while !matches!(p.peek(), Tok::Type | Tok::Eof) {
                    p.bump();
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(eqs)
    } else {
        Err(diags)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfstError {
    #[error("`{0}` would translate to a non-contractive definition")]
    NonContractive(String),
    #[error("undefined context-free type `{0}`")]
    Undefined(String),
    #[error("`{0}` is defined twice")]
    Duplicate(String),
}

/// Name of the constructor for a context-free name: one trailing `'` is dropped.
pub fn target_name(s: &str) -> String {
    s.strip_suffix('\'').unwrap_or(s).to_string()
}

/// Parameter of every embedded constructor.
pub const PARAM: &str = "x";

/// Fresh continuation variables for sequential composition.
#[derive(Debug, Default)]
pub struct Tau {
    next: usize,
}

impl Tau {
    pub fn new() -> Self {
        Tau::default()
    }

    /// `τ_k(e)`, with `k` the continuation.
    pub fn embed(&mut self, e: &Cfst, k: &TypeExpr) -> TypeExpr {
        match e {
            Cfst::Skip => k.clone(),
            Cfst::Name(s) => TypeExpr::Named(target_name(s), vec![k.clone()]),
            Cfst::IChoice(bs) => {
                TypeExpr::Internal(bs.iter().map(|(l, s)| (l.clone(), self.embed(s, k))).collect())
            }
            Cfst::EChoice(bs) => {
                TypeExpr::External(bs.iter().map(|(l, s)| (l.clone(), self.embed(s, k))).collect())
            }
            Cfst::Seq(s, t) => {
                let beta = format!("%b{}", self.next);
                self.next += 1;
                let first = self.embed(s, &TypeExpr::Var(beta.clone()));
                let rest = self.embed(t, k);
                first.subst(&HashMap::from([(beta, rest)]))
            }
        }
    }
}

/// Embeds normalized equations as unary type definitions `s[x] = τ_x(T)`.
pub fn tau_embed(eqs: &[Equation]) -> Result<Signature, CfstError> {
    let mut names: IndexMap<String, &Equation> = IndexMap::new();
    for e in eqs {
        if names.insert(e.name.clone(), e).is_some() {
            return Err(CfstError::Duplicate(e.name.clone()));
        }
    }
    let mut sig = Signature::default();
    let mut tau = Tau::new();
    for e in eqs {
        check_names(&e.body, &names)?;
        let body = tau.embed(&normalize(&e.body), &TypeExpr::var(PARAM));
        if !body.is_compound() {
            return Err(CfstError::NonContractive(e.name.clone()));
        }
        let name = target_name(&e.name);
        if sig.types.contains_key(&name) {
            return Err(CfstError::Duplicate(name));
        }
        sig.types.insert(name.clone(), TypeDef { name, params: vec![PARAM.into()], body, span: e.span });
    }
    Ok(sig)
}

fn check_names(e: &Cfst, names: &IndexMap<String, &Equation>) -> Result<(), CfstError> {
    match e {
        Cfst::Skip => Ok(()),
        Cfst::Name(s) if names.contains_key(s) => Ok(()),
        Cfst::Name(s) => Err(CfstError::Undefined(s.clone())),
        Cfst::Seq(a, b) => check_names(a, names).and_then(|_| check_names(b, names)),
        Cfst::IChoice(bs) | Cfst::EChoice(bs) => bs.iter().try_for_each(|(_, s)| check_names(s, names)),
    }
}
