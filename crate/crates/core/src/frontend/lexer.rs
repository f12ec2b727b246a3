//! Tokenizer for scripts.
//!
//! Identifier case carries meaning: uppercase names are pattern variables,
//! lowercase names are constants. A name may be qualified with `::`
//! (`List::cons`, `System::+`); the last segment decides its kind.

use std::fmt;

use super::error::{FrontendError, Position};

pub const KEYWORDS: &[&str] = &["import", "namespace", "using", "data", "def", "try", "catch"];

const OPERATOR_CHARS: &str = "+-*/<>=!&%^~.:$?@\\";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    UpperIdent,
    LowerIdent,
    Operator,
    Integer,
    Text,
    Punctuation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub pos: Position,
    /// Byte offset of the lexeme in the source.
    pub offset: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_punct(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Punctuation, lexeme)
    }

    pub fn is_keyword(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Keyword, lexeme)
    }

    /// Whether this token can end an operand, which makes a following `-`
    /// a binary operator rather than the sign of a literal.
    fn ends_operand(&self) -> bool {
        match self.kind {
            TokenKind::UpperIdent
            | TokenKind::LowerIdent
            | TokenKind::Integer
            | TokenKind::Text => true,
            TokenKind::Punctuation => self.lexeme == ")" || self.lexeme == "]",
            _ => false,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.lexeme)
    }
}

pub fn is_operator_char(c: char) -> bool {
    OPERATOR_CHARS.contains(c)
}

struct Lexer<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.offset..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn push(&mut self, kind: TokenKind, start: usize, pos: Position) {
        self.tokens.push(Token {
            kind,
            lexeme: self.src[start..self.offset].to_string(),
            pos,
            offset: start,
        });
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }

    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        while let Some(c) = self.peek() {
            let start = self.offset;
            let pos = self.pos();
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                self.eat_while(|c| c != '\n');
            } else if c.is_ascii_digit() {
                self.eat_while(|c| c.is_ascii_digit());
                self.push(TokenKind::Integer, start, pos);
            } else if c == '-'
                && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())
                && !self.tokens.last().is_some_and(Token::ends_operand)
            {
                self.bump();
                self.eat_while(|c| c.is_ascii_digit());
                self.push(TokenKind::Integer, start, pos);
            } else if c == '"' {
                self.text(start, pos)?;
            } else if c.is_alphabetic() || c == '_' {
                let kind = self.name();
                let kind = if kind == TokenKind::LowerIdent
                    && KEYWORDS.contains(&&self.src[start..self.offset])
                {
                    TokenKind::Keyword
                } else {
                    kind
                };
                self.push(kind, start, pos);
            } else if "()[]|,".contains(c) {
                self.bump();
                self.push(TokenKind::Punctuation, start, pos);
            } else if is_operator_char(c) {
                self.eat_while(is_operator_char);
                let kind = if &self.src[start..self.offset] == "->" {
                    TokenKind::Punctuation
                } else {
                    TokenKind::Operator
                };
                self.push(kind, start, pos);
            } else {
                return Err(FrontendError::Lex {
                    pos,
                    message: format!("illegal character {c:?}"),
                });
            }
        }
        Ok(self.tokens)
    }

    fn text(&mut self, start: usize, pos: Position) -> Result<(), FrontendError> {
        self.bump();
        loop {
            match self.bump() {
                None => {
                    return Err(FrontendError::Lex {
                        pos,
                        message: "unterminated text literal".into(),
                    })
                }
                Some('"') => break,
                Some('\\') => {
                    if self.bump().is_none() {
                        return Err(FrontendError::Lex {
                            pos,
                            message: "unterminated text literal".into(),
                        });
                    }
                }
                Some(_) => {}
            }
        }
        self.push(TokenKind::Text, start, pos);
        Ok(())
    }

    /// Lexes a possibly qualified name and returns the kind of its last
    /// segment.
    fn name(&mut self) -> TokenKind {
        loop {
            let first = self.peek().unwrap_or('a');
            self.eat_while(|c| c.is_alphanumeric() || c == '_');
            let kind = if first.is_uppercase() || first == '_' {
                TokenKind::UpperIdent
            } else {
                TokenKind::LowerIdent
            };
            // Only namespaces (uppercase) can be followed by `::`.
            let qualifies = kind == TokenKind::UpperIdent
                && self.peek() == Some(':')
                && self.peek_at(1) == Some(':')
                && self
                    .peek_at(2)
                    .is_some_and(|c| c.is_alphabetic() || is_operator_char(c));
            if !qualifies {
                return kind;
            }
            self.bump();
            self.bump();
            if self.peek().is_some_and(is_operator_char) {
                self.eat_while(is_operator_char);
                return TokenKind::Operator;
            }
        }
    }
}

/// Splits source text into tokens, skipping whitespace and `#` comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    Lexer {
        src: source,
        offset: 0,
        line: 1,
        column: 1,
        tokens: Vec::new(),
    }
    .run()
}

/// Decodes the body of a text literal lexeme (including its quotes).
pub fn unescape_text(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

pub fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn main_definition() {
        use TokenKind::*;
        let expected = vec![
            (Keyword, "def".to_string()),
            (LowerIdent, "main".to_string()),
            (Operator, "=".to_string()),
            (LowerIdent, "fib".to_string()),
            (Integer, "5".to_string()),
        ];
        assert_eq!(kinds("def main = fib 5"), expected);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  # only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn fib_body_punctuation() {
        let toks = tokenize("[ 0 -> 1 | 1 -> 1 | N -> fib (N - 2) + fib (N - 1) ]").unwrap();
        let count = |l: &str| toks.iter().filter(|t| t.is_punct(l)).count();
        assert_eq!(count("[") + count("]"), 2);
        assert_eq!(count("|"), 2);
        assert_eq!(count("->"), 3);
    }

    #[test]
    fn minus_is_binary_after_operand() {
        use TokenKind::*;
        let toks = kinds("N - 2 N -2 (-3) [ -4 -> 0 ]");
        let ints: Vec<_> = toks.iter().filter(|t| t.0 == Integer).map(|t| t.1.as_str()).collect();
        assert_eq!(ints, vec!["2", "2", "-3", "-4", "0"]);
    }

    #[test]
    fn qualified_names() {
        use TokenKind::*;
        assert_eq!(
            kinds("List::cons System::+ A::B Fibonacci"),
            vec![
                (LowerIdent, "List::cons".to_string()),
                (Operator, "System::+".to_string()),
                (UpperIdent, "A::B".to_string()),
                (UpperIdent, "Fibonacci".to_string()),
            ]
        );
    }

    #[test]
    fn text_literals() {
        let toks = tokenize(r#"import "prelude.eg" "a\"b""#).unwrap();
        assert_eq!(toks[1].kind, TokenKind::Text);
        assert_eq!(unescape_text(&toks[1].lexeme), "prelude.eg");
        assert_eq!(unescape_text(&toks[2].lexeme), "a\"b");
        assert_eq!(escape_text("a\"b\n"), r#""a\"b\n""#);
    }

    #[test]
    fn unterminated_text_reports_position() {
        let err = tokenize("def x =\n  \"abc").unwrap_err();
        match err {
            FrontendError::Lex { pos, message } => {
                assert_eq!(pos, Position { line: 2, column: 3 });
                assert!(message.contains("unterminated"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn illegal_character() {
        let err = tokenize("def x = 1 ; 2").unwrap_err();
        assert!(matches!(err, FrontendError::Lex { pos, .. } if pos.column == 11));
    }
}
