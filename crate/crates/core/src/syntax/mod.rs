//! Concrete syntax: lexer, parser and pretty-printer for `.nst` files.
//!
//! Comments run from `%` to the end of the line.

mod lexer;
mod parser;
mod printer;

pub use lexer::{is_ident_char, is_ident_start, is_keyword};
pub use parser::{parse_signature, parse_type};
pub use printer::{
    print_decl, print_def, print_eqtype, print_proc, print_signature, print_type,
    print_type_with, print_typedef, CompressionMap,
};

pub(crate) use lexer::{lex, Tok, Token};
