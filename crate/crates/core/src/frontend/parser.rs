//! Recursive-descent parser.
//!
//! ```text
//! module  := (import | decl)*
//! decl    := 'namespace' PATH '(' decl* ')' | 'using' PATH (',' PATH)*
//!          | 'data' lower (',' lower)* | 'def' (lower | op) '=' expr
//! expr    := 'try' expr 'catch' expr | app (op app)*
//! app     := atom atom*
//! atom    := int | text | Upper | lower | '(' op ')' | '(' expr ')' | '[' clause ('|' clause)* ']'
//! clause  := pattern* '->' expr
//! pattern := int | text | Upper | '_' | lower | '(' lower pattern+ ')' | '(' pattern ')'
//! ```
//!
//! All infix operators share one left-associative precedence level below
//! application.

use super::ast::{Clause, Decl, Expr, Pattern, ScopedDecl, SurfaceModule};
use super::error::{FrontendError, Position};
use super::lexer::{unescape_text, Token, TokenKind};

pub struct Parser<'t> {
    tokens: &'t [Token],
    at: usize,
}

fn parse_int(tok: &Token) -> Result<i64, FrontendError> {
    tok.lexeme.parse().map_err(|_| FrontendError::Lex {
        pos: tok.pos,
        message: format!("integer literal {} out of range", tok.lexeme),
    })
}

impl<'t> Parser<'t> {
    pub fn new(tokens: &'t [Token]) -> Self {
        Parser { tokens, at: 0 }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.at)
    }

    fn advance(&mut self) -> Option<&'t Token> {
        let tok = self.tokens.get(self.at);
        self.at += 1;
        tok
    }

    fn end_pos(&self) -> Position {
        match self.tokens.last() {
            Some(t) => Position {
                line: t.pos.line,
                column: t.pos.column + t.lexeme.chars().count(),
            },
            None => Position { line: 1, column: 1 },
        }
    }

    fn error<T>(&self, expected: &str) -> Result<T, FrontendError> {
        let (pos, found) = match self.peek() {
            Some(t) => (t.pos, t.to_string()),
            None => (self.end_pos(), "end of input".to_string()),
        };
        Err(FrontendError::Syntax {
            pos,
            expected: expected.to_string(),
            found,
        })
    }

    fn expect_punct(&mut self, lexeme: &str) -> Result<&'t Token, FrontendError> {
        match self.peek() {
            Some(t) if t.is_punct(lexeme) => Ok(self.advance().unwrap()),
            _ => self.error(&format!("`{lexeme}`")),
        }
    }

    fn eat_punct(&mut self, lexeme: &str) -> bool {
        if self.peek().is_some_and(|t| t.is_punct(lexeme)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub fn at_end(&self) -> bool {
        self.at >= self.tokens.len()
    }

    pub fn module(&mut self) -> Result<SurfaceModule, FrontendError> {
        let mut module = SurfaceModule {
            imports: Vec::new(),
            declarations: Vec::new(),
        };
        while let Some(tok) = self.peek() {
            if tok.is_keyword("import") {
                self.advance();
                match self.advance() {
                    Some(t) if t.kind == TokenKind::Text => {
                        module.imports.push(unescape_text(&t.lexeme))
                    }
                    _ => {
                        self.at -= 1;
                        return self.error("a file name after `import`");
                    }
                }
            } else if tok.is_punct(")") {
                return Err(FrontendError::Unbalanced {
                    pos: tok.pos,
                    message: "`)` without an open namespace".into(),
                });
            } else {
                self.declaration(&[], &mut module.declarations)?;
            }
        }
        Ok(module)
    }

    fn namespace_path(&mut self) -> Result<Vec<String>, FrontendError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::UpperIdent && t.lexeme != "_" => {
                self.advance();
                Ok(t.lexeme.split("::").map(str::to_string).collect())
            }
            _ => self.error("a namespace name"),
        }
    }

    fn declaration(
        &mut self,
        namespace: &[String],
        out: &mut Vec<ScopedDecl>,
    ) -> Result<(), FrontendError> {
        let Some(tok) = self.peek() else {
            return self.error("a declaration");
        };
        let scoped = |decl| ScopedDecl {
            namespace: namespace.to_vec(),
            decl,
        };
        match tok.lexeme.as_str() {
            "namespace" if tok.kind == TokenKind::Keyword => {
                self.advance();
                let mut path = namespace.to_vec();
                path.extend(self.namespace_path()?);
                let open = self.expect_punct("(")?;
                loop {
                    match self.peek() {
                        None => {
                            return Err(FrontendError::Unbalanced {
                                pos: open.pos,
                                message: format!("namespace {} is never closed", path.join("::")),
                            })
                        }
                        Some(t) if t.is_punct(")") => {
                            self.advance();
                            break;
                        }
                        Some(_) => self.declaration(&path, out)?,
                    }
                }
            }
            "using" if tok.kind == TokenKind::Keyword => {
                self.advance();
                loop {
                    let path = self.namespace_path()?;
                    out.push(scoped(Decl::Using(path)));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            "data" if tok.kind == TokenKind::Keyword => {
                self.advance();
                let mut tags = Vec::new();
                loop {
                    match self.peek() {
                        Some(t) if t.kind == TokenKind::LowerIdent && !t.lexeme.contains("::") => {
                            self.advance();
                            tags.push(t.lexeme.clone());
                        }
                        _ => return self.error("a data tag name"),
                    }
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                out.push(scoped(Decl::Data(tags)));
            }
            "def" if tok.kind == TokenKind::Keyword => {
                self.advance();
                let name = match self.peek() {
                    Some(t)
                        if matches!(t.kind, TokenKind::LowerIdent | TokenKind::Operator)
                            && !t.lexeme.contains("::")
                            && t.lexeme != "=" =>
                    {
                        self.advance();
                        t.lexeme.clone()
                    }
                    _ => return self.error("a definition name"),
                };
                match self.peek() {
                    Some(t) if t.is(TokenKind::Operator, "=") => {
                        self.advance();
                    }
                    _ => return self.error("`=`"),
                }
                let body = self.expr()?;
                out.push(scoped(Decl::Def(name, body)));
            }
            _ => return self.error("a declaration"),
        }
        Ok(())
    }

    pub fn expr(&mut self) -> Result<Expr, FrontendError> {
        if self.peek().is_some_and(|t| t.is_keyword("try")) {
            self.advance();
            let body = self.expr()?;
            match self.peek() {
                Some(t) if t.is_keyword("catch") => {
                    self.advance();
                }
                _ => return self.error("`catch`"),
            }
            let handler = self.expr()?;
            return Ok(Expr::Try(Box::new(body), Box::new(handler)));
        }
        let mut left = self.application()?;
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Operator || t.lexeme == "=" {
                break;
            }
            self.advance();
            let right = self.application()?;
            left = Expr::BinaryOp(t.lexeme.clone(), Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn starts_atom(tok: &Token) -> bool {
        match tok.kind {
            TokenKind::Integer | TokenKind::Text | TokenKind::UpperIdent | TokenKind::LowerIdent => {
                true
            }
            TokenKind::Punctuation => tok.lexeme == "(" || tok.lexeme == "[",
            _ => false,
        }
    }

    fn application(&mut self) -> Result<Expr, FrontendError> {
        let mut expr = self.atom()?;
        while self.peek().is_some_and(Self::starts_atom) {
            let arg = self.atom()?;
            expr = Expr::apply(expr, arg);
        }
        Ok(expr)
    }

    fn atom(&mut self) -> Result<Expr, FrontendError> {
        let Some(tok) = self.peek() else {
            return self.error("an expression");
        };
        match tok.kind {
            TokenKind::Integer => {
                self.advance();
                Ok(Expr::Int(parse_int(tok)?))
            }
            TokenKind::Text => {
                self.advance();
                Ok(Expr::Text(unescape_text(&tok.lexeme)))
            }
            TokenKind::UpperIdent if tok.lexeme != "_" && !tok.lexeme.contains("::") => {
                self.advance();
                Ok(Expr::Variable(tok.lexeme.clone()))
            }
            TokenKind::LowerIdent => {
                self.advance();
                Ok(Expr::Constant(tok.lexeme.clone()))
            }
            TokenKind::Punctuation if tok.lexeme == "(" => {
                self.advance();
                if let Some(op) = self.peek().filter(|t| t.kind == TokenKind::Operator) {
                    if self.tokens.get(self.at + 1).is_some_and(|t| t.is_punct(")")) {
                        self.at += 2;
                        return Ok(Expr::Constant(op.lexeme.clone()));
                    }
                }
                let inner = self.expr()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            TokenKind::Punctuation if tok.lexeme == "[" => {
                self.advance();
                let mut clauses = vec![self.clause()?];
                while self.eat_punct("|") {
                    clauses.push(self.clause()?);
                }
                self.expect_punct("]")?;
                Ok(Expr::Abstraction(clauses))
            }
            _ => self.error("an expression"),
        }
    }

    fn clause(&mut self) -> Result<Clause, FrontendError> {
        let mut patterns = Vec::new();
        while !self.peek().is_some_and(|t| t.is_punct("->")) {
            patterns.push(self.pattern(true)?);
        }
        self.advance();
        let body = self.expr()?;
        Ok(Clause { patterns, body })
    }

    fn pattern(&mut self, top: bool) -> Result<Pattern, FrontendError> {
        let Some(tok) = self.peek() else {
            return self.error(if top { "a pattern or `->`" } else { "a pattern" });
        };
        match tok.kind {
            TokenKind::Integer => {
                self.advance();
                Ok(Pattern::Int(parse_int(tok)?))
            }
            TokenKind::Text => {
                self.advance();
                Ok(Pattern::Text(unescape_text(&tok.lexeme)))
            }
            TokenKind::UpperIdent if tok.lexeme == "_" => {
                self.advance();
                Ok(Pattern::Wildcard)
            }
            TokenKind::UpperIdent if !tok.lexeme.contains("::") => {
                self.advance();
                Ok(Pattern::Var(tok.lexeme.clone()))
            }
            TokenKind::LowerIdent => {
                self.advance();
                Ok(Pattern::Tag(tok.lexeme.clone()))
            }
            TokenKind::Punctuation if tok.lexeme == "(" => {
                self.advance();
                let head = match self.peek() {
                    Some(t) if t.kind == TokenKind::LowerIdent => Some(t.lexeme.clone()),
                    Some(t)
                        if t.kind == TokenKind::Operator
                            && self.tokens.get(self.at + 1).is_some_and(|n| n.is_punct(")")) =>
                    {
                        Some(t.lexeme.clone())
                    }
                    _ => None,
                };
                let pattern = match head {
                    Some(tag) => {
                        self.advance();
                        let mut subs = Vec::new();
                        while !self.peek().is_some_and(|t| t.is_punct(")")) {
                            subs.push(self.pattern(false)?);
                        }
                        if subs.is_empty() {
                            Pattern::Tag(tag)
                        } else {
                            Pattern::Compound(tag, subs)
                        }
                    }
                    None => self.pattern(false)?,
                };
                self.expect_punct(")")?;
                Ok(pattern)
            }
            _ => self.error(if top { "a pattern or `->`" } else { "a pattern" }),
        }
    }
}

/// Parses a whole script.
pub fn parse_module(tokens: &[Token]) -> Result<SurfaceModule, FrontendError> {
    Parser::new(tokens).module()
}

/// Parses a single expression that must span all tokens.
pub fn parse_expression(tokens: &[Token]) -> Result<Expr, FrontendError> {
    let mut parser = Parser::new(tokens);
    let expr = parser.expr()?;
    if !parser.at_end() {
        return parser.error("end of expression");
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::lexer::tokenize;

    fn parse(src: &str) -> Result<SurfaceModule, FrontendError> {
        parse_module(&tokenize(src).unwrap())
    }

    fn expr(src: &str) -> Expr {
        parse_expression(&tokenize(src).unwrap()).unwrap()
    }

    #[test]
    fn minimal_definition() {
        let m = parse("def x = 1").unwrap();
        assert!(m.imports.is_empty());
        assert_eq!(
            m.declarations,
            vec![ScopedDecl {
                namespace: vec![],
                decl: Decl::Def("x".into(), Expr::Int(1)),
            }]
        );
    }

    #[test]
    fn application_is_left_associative() {
        assert_eq!(
            expr("f a b"),
            Expr::apply(
                Expr::apply(Expr::Constant("f".into()), Expr::Constant("a".into())),
                Expr::Constant("b".into())
            )
        );
    }

    #[test]
    fn operators_share_one_level() {
        let e = expr("a + b * c - d");
        let Expr::BinaryOp(op, l, _) = e else { panic!() };
        assert_eq!(op, "-");
        let Expr::BinaryOp(op, l, _) = *l else { panic!() };
        assert_eq!(op, "*");
        assert!(matches!(*l, Expr::BinaryOp(ref op, ..) if op == "+"));
    }

    #[test]
    fn operator_section() {
        assert_eq!(
            expr("(+) 1"),
            Expr::apply(Expr::Constant("+".into()), Expr::Int(1))
        );
    }

    #[test]
    fn try_catch() {
        let e = expr("try 1 + throw 7 catch [E -> E + 1]");
        let Expr::Try(body, handler) = e else { panic!() };
        assert!(matches!(*body, Expr::BinaryOp(..)));
        assert!(matches!(*handler, Expr::Abstraction(ref cs) if cs.len() == 1));
    }

    #[test]
    fn patterns() {
        let e = expr("[ (cons X XX) YY -> 0 | (nil) _ -> 1 | (-1) \"t\" -> 2 | -> 3 ]");
        let Expr::Abstraction(cs) = e else { panic!() };
        assert_eq!(
            cs[0].patterns,
            vec![
                Pattern::Compound(
                    "cons".into(),
                    vec![Pattern::Var("X".into()), Pattern::Var("XX".into())]
                ),
                Pattern::Var("YY".into())
            ]
        );
        assert_eq!(cs[1].patterns, vec![Pattern::Tag("nil".into()), Pattern::Wildcard]);
        assert_eq!(cs[2].patterns, vec![Pattern::Int(-1), Pattern::Text("t".into())]);
        assert_eq!(cs[3].arity(), 0);
    }

    #[test]
    fn nested_namespaces_and_usings() {
        let m = parse("namespace A ( using B, C namespace D ( data x ) def y = 1 ) using A::D")
            .unwrap();
        let ns: Vec<_> = m.declarations.iter().map(|d| d.namespace.join("::")).collect();
        assert_eq!(ns, vec!["A", "A", "A::D", "A", ""]);
        assert_eq!(m.declarations[4].decl, Decl::Using(vec!["A".into(), "D".into()]));
    }

    #[test]
    fn syntax_error_reports_expected() {
        let err = parse("def x = ").unwrap_err();
        assert!(matches!(err, FrontendError::Syntax { ref expected, .. } if expected == "an expression"));
        let err = parse("def = 1").unwrap_err();
        assert!(matches!(err, FrontendError::Syntax { ref expected, .. } if expected == "a definition name"));
    }

    #[test]
    fn unbalanced_namespace() {
        assert!(matches!(
            parse("namespace A ( def x = 1").unwrap_err(),
            FrontendError::Unbalanced { .. }
        ));
        assert!(matches!(
            parse("def x = 1 )").unwrap_err(),
            FrontendError::Unbalanced { .. }
        ));
    }
}
