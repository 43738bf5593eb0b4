//! Pulse-sequence text: lexing, parsing, canonical printing and
//! compilation to executable programs.

mod compile;
mod expr;
mod lexer;
mod parser;

pub use compile::{compile_sequence, CompiledProgram};
pub use expr::Expr;
pub use lexer::{ParseError, ParseErrorKind};
pub use parser::{parse_sequence, parse_sequence_file, pretty_print, DelaySpec, Item, PulseAxis, SequenceAst};
