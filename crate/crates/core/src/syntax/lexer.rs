use crate::ast::{Pos, Span};
use crate::diagnostics::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    One,
    Type,
    Decl,
    Proc,
    Eqtype,
    Case,
    Send,
    Recv,
    Close,
    Wait,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Plus,
    Amp,
    Star,
    Lolli,
    Turnstile,
    LArrow,
    Fwd,
    FatArrow,
    Eq,
    Colon,
    Comma,
    Semi,
    Bar,
    Dot,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::One => "1",
            Tok::Type => "type",
            Tok::Decl => "decl",
            Tok::Proc => "proc",
            Tok::Eqtype => "eqtype",
            Tok::Case => "case",
            Tok::Send => "send",
            Tok::Recv => "recv",
            Tok::Close => "close",
            Tok::Wait => "wait",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Plus => "+",
            Tok::Amp => "&",
            Tok::Star => "*",
            Tok::Lolli => "-o",
            Tok::Turnstile => "|-",
            Tok::LArrow => "<-",
            Tok::Fwd => "<->",
            Tok::FatArrow => "=>",
            Tok::Eq => "=",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Bar => "|",
            Tok::Dot => ".",
            Tok::Eof => "",
        }
    }

    pub fn is_decl_start(&self) -> bool {
        matches!(self, Tok::Type | Tok::Decl | Tok::Proc | Tok::Eqtype)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$' || c == '\''
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "type" => Tok::Type,
        "decl" => Tok::Decl,
        "proc" => Tok::Proc,
        "eqtype" => Tok::Eqtype,
        "case" => Tok::Case,
        "send" => Tok::Send,
        "recv" => Tok::Recv,
        "close" => Tok::Close,
        "wait" => Tok::Wait,
        _ => return None,
    })
}

pub fn is_keyword(s: &str) -> bool {
    keyword(s).is_some()
}

/// Tokenizes `src`. Unknown characters produce diagnostics and are skipped.
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        let start = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let peek = |k: usize| chars.get(i + k).copied();
        let (tok, len) = if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            (keyword(&word).unwrap_or(Tok::Ident(word)), j - i)
        } else {
            match (c, peek(1), peek(2)) {
                ('1', next, _) if !next.is_some_and(is_ident_char) => (Tok::One, 1),
                ('-', Some('o'), _) => (Tok::Lolli, 2),
                ('|', Some('-'), _) => (Tok::Turnstile, 2),
                ('<', Some('-'), Some('>')) => (Tok::Fwd, 3),
                ('<', Some('-'), _) => (Tok::LArrow, 2),
                ('=', Some('>'), _) => (Tok::FatArrow, 2),
                ('[', ..) => (Tok::LBracket, 1),
                (']', ..) => (Tok::RBracket, 1),
                ('{', ..) => (Tok::LBrace, 1),
                ('}', ..) => (Tok::RBrace, 1),
                ('(', ..) => (Tok::LParen, 1),
                (')', ..) => (Tok::RParen, 1),
                ('+', ..) => (Tok::Plus, 1),
                ('&', ..) => (Tok::Amp, 1),
                ('*', ..) => (Tok::Star, 1),
                ('=', ..) => (Tok::Eq, 1),
                (':', ..) => (Tok::Colon, 1),
                (',', ..) => (Tok::Comma, 1),
                (';', ..) => (Tok::Semi, 1),
                ('|', ..) => (Tok::Bar, 1),
                ('.', ..) => (Tok::Dot, 1),
                _ => {
                    let end = Pos { line, col: col + 1 };
                    diags.push(Diagnostic::error(
                        Span::new(start, end),
                        "lex",
                        format!("unexpected character `{c}`"),
                    ));
                    i += 1;
                    col += 1;
                    continue;
                }
            }
        };
        i += len;
        col += len as u32;
        toks.push(Token { tok, span: Span::new(start, Pos { line, col }) });
    }
    let end = Pos { line, col };
    toks.push(Token { tok: Tok::Eof, span: Span::new(end, end) });
    (toks, diags)
}
