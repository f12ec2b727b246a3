//! Name resolution.
//!
//! A `using` declared in namespace `P` is visible to every declaration whose
//! namespace has `P` as a prefix; top-level usings are therefore global,
//! including across imported files. Unqualified names are looked up in the
//! enclosing namespaces first (innermost out), then in used namespaces.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::{Clause, Decl, Expr, Pattern, SurfaceModule};
use super::error::FrontendError;
use crate::builtins::{self, Builtin};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Data,
    Builtin(Builtin),
    /// A definition body; every constant in it is fully qualified.
    Def(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub name: String,
    pub kind: EntryKind,
}

/// The global table of data tags, builtins and definitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResolvedTable {
    entries: Vec<Entry>,
    index: HashMap<String, usize>,
}

impl ResolvedTable {
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn push(&mut self, entry: Entry) -> Result<(), FrontendError> {
        if self.index.contains_key(&entry.name) {
            return Err(FrontendError::Duplicate { name: entry.name });
        }
        self.index.insert(entry.name.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn into_entries(self) -> Vec<Entry> {
        self.entries
    }
}

pub fn qualify(namespace: &[String], name: &str) -> String {
    if namespace.is_empty() {
        name.to_string()
    } else {
        format!("{}::{name}", namespace.join("::"))
    }
}

struct Scopes {
    namespaces: HashSet<String>,
    /// (scope, used namespace), both joined with `::`.
    usings: Vec<(Vec<String>, String)>,
}

impl Scopes {
    fn visible_usings<'a>(&'a self, scope: &'a [String]) -> impl Iterator<Item = &'a str> + 'a {
        self.usings
            .iter()
            .filter(move |(s, _)| scope.starts_with(s))
            .map(|(_, u)| u.as_str())
    }
}

struct Resolver<'a> {
    table: &'a ResolvedTable,
    scopes: &'a Scopes,
    scope: &'a [String],
    context: &'a str,
    bound: Vec<String>,
}

impl Resolver<'_> {
    fn name(&self, name: &str) -> Result<String, FrontendError> {
        for depth in (0..=self.scope.len()).rev() {
            let candidate = qualify(&self.scope[..depth], name);
            if self.table.contains(&candidate) {
                return Ok(candidate);
            }
        }
        let found: BTreeSet<String> = self
            .scopes
            .visible_usings(self.scope)
            .map(|u| format!("{u}::{name}"))
            .filter(|c| self.table.contains(c))
            .collect();
        let mut found: Vec<String> = found.into_iter().collect();
        // The builtins are visible everywhere, behind every other scope.
        let system = builtins::qualified(name);
        if found.is_empty() && self.table.contains(&system) {
            return Ok(system);
        }
        match found.len() {
            0 => Err(FrontendError::Unresolved {
                name: name.to_string(),
                context: self.context.to_string(),
            }),
            1 => Ok(found.pop().unwrap()),
            _ => Err(FrontendError::Ambiguous {
                name: name.to_string(),
                context: self.context.to_string(),
                candidates: found,
            }),
        }
    }

    fn pattern(&self, p: &Pattern) -> Result<Pattern, FrontendError> {
        Ok(match p {
            Pattern::Tag(t) => Pattern::Tag(self.name(t)?),
            Pattern::Compound(t, subs) => Pattern::Compound(
                self.name(t)?,
                subs.iter().map(|s| self.pattern(s)).collect::<Result<_, _>>()?,
            ),
            other => other.clone(),
        })
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr, FrontendError> {
        Ok(match e {
            Expr::Variable(v) => {
                if !self.bound.iter().any(|b| b == v) {
                    return Err(FrontendError::UnboundVariable {
                        name: v.clone(),
                        context: self.context.to_string(),
                    });
                }
                e.clone()
            }
            Expr::Constant(c) => Expr::Constant(self.name(c)?),
            Expr::Int(_) | Expr::Text(_) => e.clone(),
            Expr::Apply(f, a) => Expr::apply(self.expr(f)?, self.expr(a)?),
            Expr::BinaryOp(op, l, r) => Expr::apply_all(
                Expr::Constant(self.name(op)?),
                [self.expr(l)?, self.expr(r)?],
            ),
            Expr::Try(body, handler) => {
                Expr::Try(Box::new(self.expr(body)?), Box::new(self.expr(handler)?))
            }
            Expr::Abstraction(clauses) => {
                let mut out = Vec::with_capacity(clauses.len());
                for clause in clauses {
                    let patterns = clause
                        .patterns
                        .iter()
                        .map(|p| self.pattern(p))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut vars = Vec::new();
                    patterns.iter().for_each(|p| p.variables(&mut vars));
                    let mark = self.bound.len();
                    self.bound.extend(vars.into_iter().map(str::to_string));
                    let body = self.expr(&clause.body);
                    self.bound.truncate(mark);
                    out.push(Clause {
                        patterns,
                        body: body?,
                    });
                }
                Expr::Abstraction(out)
            }
        })
    }
}

/// The table every program starts from: the `System` builtins and tags.
pub fn system_table() -> ResolvedTable {
    let mut table = ResolvedTable::default();
    for &(name, op) in builtins::BUILTINS {
        table
            .push(Entry {
                name: builtins::qualified(name),
                kind: EntryKind::Builtin(op),
            })
            .expect("builtin names are distinct");
    }
    for tag in builtins::SYSTEM_TAGS {
        table
            .push(Entry {
                name: builtins::qualified(tag),
                kind: EntryKind::Data,
            })
            .expect("builtin names are distinct");
    }
    table
}

/// Resolves modules, given in dependency order, into one global table.
pub fn resolve(modules: &[SurfaceModule]) -> Result<ResolvedTable, FrontendError> {
    let mut table = system_table();
    let mut namespaces: HashSet<String> = HashSet::new();
    namespaces.insert(builtins::SYSTEM.to_string());

    let decls: Vec<_> = modules.iter().flat_map(|m| &m.declarations).collect();
    // Declare every name first so definitions may refer to each other freely.
    let mut bodies = Vec::new();
    for scoped in &decls {
        for depth in 1..=scoped.namespace.len() {
            namespaces.insert(scoped.namespace[..depth].join("::"));
        }
        match &scoped.decl {
            Decl::Data(tags) => {
                for tag in tags {
                    table.push(Entry {
                        name: qualify(&scoped.namespace, tag),
                        kind: EntryKind::Data,
                    })?;
                }
            }
            Decl::Def(name, body) => {
                let name = qualify(&scoped.namespace, name);
                table.push(Entry {
                    name: name.clone(),
                    kind: EntryKind::Def(Expr::Int(0)),
                })?;
                bodies.push((name, &scoped.namespace, body));
            }
            Decl::Using(_) => {}
        }
    }

    let mut scopes = Scopes {
        namespaces,
        usings: Vec::new(),
    };
    for scoped in &decls {
        if let Decl::Using(path) = &scoped.decl {
            let target = (0..=scoped.namespace.len())
                .rev()
                .map(|d| qualify(&scoped.namespace[..d], &path.join("::")))
                .find(|c| scopes.namespaces.contains(c))
                .ok_or_else(|| FrontendError::UnknownNamespace {
                    name: path.join("::"),
                })?;
            let using = (scoped.namespace.clone(), target);
            if !scopes.usings.contains(&using) {
                scopes.usings.push(using);
            }
        }
    }

    let mut resolved = Vec::with_capacity(bodies.len());
    for (name, scope, body) in bodies {
        let mut resolver = Resolver {
            table: &table,
            scopes: &scopes,
            scope,
            context: &name,
            bound: Vec::new(),
        };
        let body = resolver.expr(body)?;
        if name == "main" && matches!(body, Expr::Abstraction(_)) {
            return Err(FrontendError::MainArity);
        }
        resolved.push((name, body));
    }
    for (name, body) in resolved {
        let i = table.index[&name];
        table.entries[i].kind = EntryKind::Def(body);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{lexer::tokenize, parser::parse_module};

    fn module(src: &str) -> SurfaceModule {
        parse_module(&tokenize(src).unwrap()).unwrap()
    }

    fn body(table: &ResolvedTable, name: &str) -> Expr {
        match &table.get(name).unwrap().kind {
            EntryKind::Def(e) => e.clone(),
            other => panic!("{other:?}"),
        }
    }

    const LISTS: &str = "namespace List (
        data nil, cons
        def ++ =
            [ nil YY -> YY
            | (cons X XX) YY -> cons X (XX ++ YY) ]
    )";

    #[test]
    fn using_brings_names_into_scope() {
        let t = resolve(&[module(
            "namespace Fibonacci ( using System def fib = [ N -> N - 1 ] )
             using Fibonacci
             def main = fib 5",
        )])
        .unwrap();
        assert_eq!(
            body(&t, "main"),
            Expr::apply(Expr::Constant("Fibonacci::fib".into()), Expr::Int(5))
        );
        let Expr::Abstraction(cs) = body(&t, "Fibonacci::fib") else { panic!() };
        let (head, _) = cs[0].body.spine();
        assert_eq!(head, &Expr::Constant("System::-".into()));
    }

    #[test]
    fn enclosing_namespace_names_need_no_qualification() {
        let t = resolve(&[module(LISTS)]).unwrap();
        let Expr::Abstraction(cs) = body(&t, "List::++") else { panic!() };
        assert_eq!(cs[0].patterns[0], Pattern::Tag("List::nil".into()));
        let (head, args) = cs[1].body.spine();
        assert_eq!(head, &Expr::Constant("List::cons".into()));
        let (inner, _) = args[1].spine();
        assert_eq!(inner, &Expr::Constant("List::++".into()));
    }

    #[test]
    fn unresolved_identifier() {
        let err = resolve(&[module("def main = bogus")]).unwrap_err();
        assert!(matches!(err, FrontendError::Unresolved { ref name, .. } if name == "bogus"));
    }

    #[test]
    fn unbound_variable() {
        let err = resolve(&[module("def f = [ X -> Y ]")]).unwrap_err();
        assert!(matches!(err, FrontendError::UnboundVariable { ref name, .. } if name == "Y"));
    }

    #[test]
    fn duplicate_definition() {
        let err = resolve(&[module("namespace A ( def x = 1 def x = 2 )")]).unwrap_err();
        assert!(matches!(err, FrontendError::Duplicate { ref name } if name == "A::x"));
        // Same name in different namespaces is fine.
        resolve(&[module("namespace A ( def x = 1 ) namespace B ( def x = 2 )")]).unwrap();
    }

    #[test]
    fn ambiguous_using() {
        let err = resolve(&[module(
            "namespace A ( def x = 1 ) namespace B ( def x = 2 ) using A, B def main = x",
        )])
        .unwrap_err();
        assert!(matches!(err, FrontendError::Ambiguous { ref candidates, .. } if candidates.len() == 2));
    }

    #[test]
    fn using_is_scoped_to_its_namespace() {
        let err = resolve(&[module(
            "namespace A ( def x = 1 ) namespace B ( using A def y = x ) def main = x",
        )])
        .unwrap_err();
        assert!(matches!(err, FrontendError::Unresolved { ref context, .. } if context == "main"));
    }

    #[test]
    fn main_must_take_no_arguments() {
        let err = resolve(&[module("def main = [ X -> X ]")]).unwrap_err();
        assert!(matches!(err, FrontendError::MainArity));
    }

    #[test]
    fn deterministic() {
        let ms = [module(LISTS), module("using List def main = cons 1 nil ++ nil")];
        assert_eq!(resolve(&ms).unwrap(), resolve(&ms).unwrap());
    }
}
