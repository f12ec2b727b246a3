use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("{pos}: {message}")]
    Lex { pos: Position, message: String },

    #[error("{pos}: expected {expected}, found {found}")]
    Syntax {
        pos: Position,
        expected: String,
        found: String,
    },

    #[error("{pos}: unbalanced namespace parentheses: {message}")]
    Unbalanced { pos: Position, message: String },

    #[error("{file}: {source}")]
    InFile {
        file: String,
        #[source]
        source: Box<FrontendError>,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("import {name:?} not found")]
    ImportNotFound { name: String },

    #[error("import cycle: {}", chain.join(" -> "))]
    ImportCycle { chain: Vec<String> },

    #[error("unresolved identifier `{name}` in `{context}`")]
    Unresolved { name: String, context: String },

    #[error("unbound variable `{name}` in `{context}`")]
    UnboundVariable { name: String, context: String },

    #[error("duplicate definition of `{name}`")]
    Duplicate { name: String },

    #[error("ambiguous identifier `{name}` in `{context}`: could be {}", candidates.join(" or "))]
    Ambiguous {
        name: String,
        context: String,
        candidates: Vec<String>,
    },

    #[error("unknown namespace `{name}` in using")]
    UnknownNamespace { name: String },

    #[error("`main` must be a zero-argument definition")]
    MainArity,
}
