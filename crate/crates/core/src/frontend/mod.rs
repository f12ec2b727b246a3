//! Scripts to a resolved declaration table: lexing, parsing, imports and
//! name resolution.

pub mod ast;
mod error;
pub mod lexer;
pub mod loader;
pub mod parser;
pub mod resolve;

pub use ast::{Clause, Decl, Expr, NamespacePath, Pattern, ScopedDecl, SurfaceModule};
pub use error::{FrontendError, Position};
pub use lexer::{tokenize, Token, TokenKind};
pub use loader::{parse_source, Loader};
pub use parser::{parse_expression, parse_module};
pub use resolve::{qualify, resolve, system_table, Entry, EntryKind, ResolvedTable};
