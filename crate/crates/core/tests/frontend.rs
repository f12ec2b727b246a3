use std::path::PathBuf;

use proptest::prelude::*;
use twistvm_core::frontend::{
    parse_expression, parse_module, parse_source, resolve, tokenize, Clause, Decl, Expr, Pattern,
    ScopedDecl, SurfaceModule, TokenKind,
};
use twistvm_testkit::{golden, load};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

#[test]
fn fib_script_matches_golden_ast() {
    let module = parse_source(&read("fib.eg")).unwrap();
    golden(fixture("fib.ast"), &format!("{module:#?}\n"));

    assert_eq!(module.imports, vec!["prelude.eg".to_string()]);
    let in_fib: Vec<&Decl> = module
        .declarations
        .iter()
        .filter(|d| d.namespace == ["Fibonacci"])
        .map(|d| &d.decl)
        .collect();
    assert!(matches!(in_fib[..], [Decl::Using(_), Decl::Def(..)]));
    let top: Vec<&Decl> = module
        .declarations
        .iter()
        .filter(|d| d.namespace.is_empty())
        .map(|d| &d.decl)
        .collect();
    assert!(matches!(top[..], [Decl::Using(_), Decl::Def(..)]));
    let Decl::Def(name, Expr::Abstraction(clauses)) = in_fib[1] else {
        panic!("fib is not an abstraction");
    };
    assert_eq!(name, "fib");
    assert_eq!(clauses.len(), 3);
}

#[test]
fn list_script_matches_golden_ast() {
    let module = parse_source(&read("list.eg")).unwrap();
    golden(fixture("list.ast"), &format!("{module:#?}\n"));

    assert_eq!(module.declarations.len(), 2);
    assert!(module.declarations.iter().all(|d| d.namespace == ["List"]));
    assert_eq!(module.declarations[0].decl, Decl::Data(vec!["nil".into(), "cons".into()]));
    let Decl::Def(name, Expr::Abstraction(clauses)) = &module.declarations[1].decl else {
        panic!("++ is not an abstraction");
    };
    assert_eq!(name, "++");
    assert_eq!(clauses.len(), 2);
    assert_eq!(
        clauses[1].patterns,
        vec![
            Pattern::Compound("cons".into(), vec![Pattern::Var("X".into()), Pattern::Var("XX".into())]),
            Pattern::Var("YY".into()),
        ]
    );
}

#[test]
fn fib_resolves_to_qualified_names() {
    let table = resolve(&load(&read("fib.eg")).unwrap()).unwrap();
    let Some(entry) = table.get("main") else { panic!("no main") };
    let twistvm_core::frontend::EntryKind::Def(body) = &entry.kind else { panic!() };
    assert_eq!(
        *body,
        Expr::apply(Expr::Constant("Fibonacci::fib".into()), Expr::Int(5))
    );
    assert_eq!(resolve(&load(&read("fib.eg")).unwrap()).unwrap(), table);
}

#[test]
fn nil_inside_list_resolves_locally() {
    let src = format!("{}\nusing List\ndef main = nil ++ nil", read("list.eg"));
    let table = resolve(&load(&src).unwrap()).unwrap();
    let twistvm_core::frontend::EntryKind::Def(Expr::Abstraction(clauses)) = &table.get("List::++").unwrap().kind
    else {
        panic!()
    };
    assert_eq!(clauses[0].patterns[0], Pattern::Tag("List::nil".into()));
}

#[test]
fn bogus_is_unresolved() {
    let err = resolve(&load("def main = bogus").unwrap()).unwrap_err();
    assert!(err.to_string().contains("bogus"), "{err}");
}

const UPPER: &[&str] = &["X", "Y", "N", "XX", "YY"];
const LOWER: &[&str] = &["f", "nil", "cons", "List::cons", "fib", "+", "++", "-"];
const TAGS: &[&str] = &["nil", "cons", "List::cons"];
const OPS: &[&str] = &["+", "-", "++", "*", "<", "=="];

fn text() -> impl Strategy<Value = String> {
    "[a-z \"\\\\\n\t#λ]{0,6}"
}

fn pattern() -> impl Strategy<Value = Pattern> {
    let leaf = prop_oneof![
        prop::sample::select(UPPER).prop_map(|v| Pattern::Var(v.into())),
        Just(Pattern::Wildcard),
        any::<i64>().prop_map(Pattern::Int),
        text().prop_map(Pattern::Text),
        prop::sample::select(LOWER).prop_map(|t| Pattern::Tag(t.into())),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        (prop::sample::select(TAGS), prop::collection::vec(inner, 1..3))
            .prop_map(|(t, subs)| Pattern::Compound(t.into(), subs))
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop::sample::select(UPPER).prop_map(|v| Expr::Variable(v.into())),
        prop::sample::select(LOWER).prop_map(|c| Expr::Constant(c.into())),
        any::<i64>().prop_map(Expr::Int),
        text().prop_map(Expr::Text),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Expr::apply(f, a)),
            (prop::sample::select(OPS), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::BinaryOp(op.into(), Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(b, h)| Expr::Try(Box::new(b), Box::new(h))),
            prop::collection::vec((prop::collection::vec(pattern(), 0..3), inner), 1..3).prop_map(|cs| {
                Expr::Abstraction(
                    cs.into_iter()
                        .map(|(patterns, body)| Clause { patterns, body })
                        .collect(),
                )
            }),
        ]
    })
}

fn declaration() -> impl Strategy<Value = ScopedDecl> {
    let namespace = prop_oneof![
        Just(Vec::<String>::new()),
        Just(vec!["A".to_string()]),
        Just(vec!["A".to_string(), "B".to_string()]),
    ];
    let decl = prop_oneof![
        prop::collection::vec(prop::sample::select(&["nil", "cons", "leaf"][..]), 1..3)
            .prop_map(|ts| Decl::Data(ts.into_iter().map(String::from).collect())),
        (prop::sample::select(&["main", "f", "++"][..]), expr()).prop_map(|(n, e)| Decl::Def(n.into(), e)),
        Just(Decl::Using(vec!["List".into()])),
    ];
    (namespace, decl).prop_map(|(namespace, decl)| ScopedDecl { namespace, decl })
}

proptest! {
    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let printed = e.to_string();
        let reparsed = parse_expression(&tokenize(&printed).unwrap()).unwrap();
        prop_assert_eq!(reparsed, e, "{}", printed);
    }

    #[test]
    fn printed_modules_parse_back(
        imports in prop::collection::vec("[a-z]{1,5}\\.eg", 0..2),
        declarations in prop::collection::vec(declaration(), 0..5),
    ) {
        let module = SurfaceModule { imports, declarations };
        let printed = module.to_string();
        let reparsed = parse_module(&tokenize(&printed).unwrap()).unwrap();
        prop_assert_eq!(reparsed, module, "{}", printed);
    }

    #[test]
    fn lexemes_are_slices_of_the_source(src in "([a-zA-Z_0-9]{1,4}|[-+*<=>:]{1,2}|\"[a-z ]{0,3}\"|[ \n\t]|#[a-z ]*\n|[()\\[\\]|,])*") {
        let Ok(tokens) = tokenize(&src) else { return Ok(()) };
        let mut end = 0;
        let mut last_pos = None;
        for t in &tokens {
            prop_assert!(!t.lexeme.is_empty());
            prop_assert_eq!(&src[t.offset..t.offset + t.lexeme.len()], t.lexeme.as_str());
            let gap = &src[end..t.offset];
            prop_assert!(only_blanks_and_comments(gap), "gap {:?}", gap);
            prop_assert!(last_pos.is_none_or(|p| p < t.pos));
            last_pos = Some(t.pos);
            end = t.offset + t.lexeme.len();
        }
        prop_assert!(only_blanks_and_comments(&src[end..]));
    }

    #[test]
    fn identifier_case_decides_the_class(name in "[a-zA-Z][a-zA-Z0-9_]{0,6}") {
        let tokens = tokenize(&name).unwrap();
        prop_assert_eq!(tokens.len(), 1);
        let upper = name.starts_with(|c: char| c.is_ascii_uppercase());
        let kind = tokens[0].kind;
        if upper {
            prop_assert_eq!(kind, TokenKind::UpperIdent);
        } else {
            prop_assert!(kind == TokenKind::LowerIdent || kind == TokenKind::Keyword);
        }
    }
}

fn only_blanks_and_comments(gap: &str) -> bool {
    let mut in_comment = false;
    gap.chars().all(|c| {
        if in_comment {
            in_comment = c != '\n';
            true
        } else if c == '#' {
            in_comment = true;
            true
        } else {
            c.is_whitespace()
        }
    })
}
