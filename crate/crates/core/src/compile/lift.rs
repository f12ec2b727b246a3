//! Lambda lifting.
//!
//! Every abstraction nested inside an expression becomes a fresh top-level
//! definition named `<parent>/lift<k>`, numbered innermost first. Its captured
//! variables, in order of first occurrence, become leading parameters, and
//! the abstraction is replaced by the new constant applied to them.

use crate::frontend::{Clause, Entry, EntryKind, Expr, Pattern, ResolvedTable};

struct Lifter<'a> {
    parent: &'a str,
    counter: usize,
    lifted: Vec<Entry>,
}

fn free_variables(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match e {
        Expr::Variable(v) => {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        }
        Expr::Apply(f, a) => {
            free_variables(f, bound, out);
            free_variables(a, bound, out);
        }
        Expr::BinaryOp(_, l, r) | Expr::Try(l, r) => {
            free_variables(l, bound, out);
            free_variables(r, bound, out);
        }
        Expr::Abstraction(clauses) => {
            for c in clauses {
                let mark = bound.len();
                let mut vars = Vec::new();
                c.patterns.iter().for_each(|p| p.variables(&mut vars));
                bound.extend(vars.into_iter().map(str::to_string));
                free_variables(&c.body, bound, out);
                bound.truncate(mark);
            }
        }
        Expr::Constant(_) | Expr::Int(_) | Expr::Text(_) => {}
    }
}

impl Lifter<'_> {
    fn expr(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::Apply(f, a) => Expr::apply(self.expr(f), self.expr(a)),
            Expr::BinaryOp(op, l, r) => {
                Expr::BinaryOp(op.clone(), Box::new(self.expr(l)), Box::new(self.expr(r)))
            }
            Expr::Try(b, h) => Expr::Try(Box::new(self.expr(b)), Box::new(self.expr(h))),
            Expr::Abstraction(clauses) => {
                let clauses = self.clauses(clauses);
                let mut captured = Vec::new();
                free_variables(&Expr::Abstraction(clauses.clone()), &mut Vec::new(), &mut captured);
                let name = format!("{}/lift{}", self.parent, self.counter);
                self.counter += 1;
                let clauses = clauses
                    .into_iter()
                    .map(|c| {
                        let mut own = Vec::new();
                        c.patterns.iter().for_each(|p| p.variables(&mut own));
                        // A clause that rebinds a captured name shadows it.
                        let mut patterns: Vec<Pattern> = captured
                            .iter()
                            .map(|v| {
                                if own.contains(&v.as_str()) {
                                    Pattern::Wildcard
                                } else {
                                    Pattern::Var(v.clone())
                                }
                            })
                            .collect();
                        patterns.extend(c.patterns);
                        Clause {
                            patterns,
                            body: c.body,
                        }
                    })
                    .collect();
                self.lifted.push(Entry {
                    name: name.clone(),
                    kind: EntryKind::Def(Expr::Abstraction(clauses)),
                });
                Expr::apply_all(Expr::Constant(name), captured.into_iter().map(Expr::Variable))
            }
            other => other.clone(),
        }
    }

    fn clauses(&mut self, clauses: &[Clause]) -> Vec<Clause> {
        clauses
            .iter()
            .map(|c| Clause {
                patterns: c.patterns.clone(),
                body: self.expr(&c.body),
            })
            .collect()
    }
}

/// Hoists nested abstractions so that an abstraction only ever appears as
/// the whole body of a definition.
pub fn lift_lambdas(table: &ResolvedTable) -> ResolvedTable {
    let mut out = ResolvedTable::default();
    for entry in table.entries() {
        let EntryKind::Def(body) = &entry.kind else {
            out.push(entry.clone()).expect("names are unique");
            continue;
        };
        let mut lifter = Lifter {
            parent: &entry.name,
            counter: 0,
            lifted: Vec::new(),
        };
        let body = match body {
            Expr::Abstraction(clauses) => Expr::Abstraction(lifter.clauses(clauses)),
            other => lifter.expr(other),
        };
        out.push(Entry {
            name: entry.name.clone(),
            kind: EntryKind::Def(body),
        })
        .expect("names are unique");
        for lifted in lifter.lifted {
            out.push(lifted).expect("lift names are unique");
        }
    }
    out
}

/// Whether `e` contains an abstraction anywhere.
pub fn contains_abstraction(e: &Expr) -> bool {
    match e {
        Expr::Abstraction(_) => true,
        Expr::Apply(l, r) | Expr::BinaryOp(_, l, r) | Expr::Try(l, r) => {
            contains_abstraction(l) || contains_abstraction(r)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_source, resolve};

    fn lifted(src: &str) -> ResolvedTable {
        lift_lambdas(&resolve(&[parse_source(src).unwrap()]).unwrap())
    }

    fn body<'a>(t: &'a ResolvedTable, name: &str) -> &'a Expr {
        match &t.get(name).unwrap().kind {
            EntryKind::Def(e) => e,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inner_lambda_capturing_a_variable() {
        let t = lifted("def f = [ X -> [ Y -> X ] ]");
        let Expr::Abstraction(cs) = body(&t, "f/lift0") else { panic!() };
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].patterns, vec![Pattern::Var("X".into()), Pattern::Var("Y".into())]);
        assert_eq!(cs[0].body, Expr::Variable("X".into()));
        let Expr::Abstraction(cs) = body(&t, "f") else { panic!() };
        assert_eq!(
            cs[0].body,
            Expr::apply(Expr::Constant("f/lift0".into()), Expr::Variable("X".into()))
        );
    }

    #[test]
    fn top_level_abstraction_is_unchanged() {
        let src = "def g = [ X -> X ]";
        let before = resolve(&[parse_source(src).unwrap()]).unwrap();
        assert_eq!(lift_lambdas(&before), before);
    }

    #[test]
    fn lifted_names_are_numbered_innermost_first() {
        let t = lifted("namespace N ( def h = [ X -> [ Y -> [ Z -> X Y Z ] ] ] )");
        let Expr::Abstraction(inner) = body(&t, "N::h/lift0") else { panic!() };
        assert_eq!(inner[0].patterns.len(), 3);
        let Expr::Abstraction(middle) = body(&t, "N::h/lift1") else { panic!() };
        assert_eq!(middle[0].patterns, vec![Pattern::Var("X".into()), Pattern::Var("Y".into())]);
        for e in t.entries() {
            if let EntryKind::Def(Expr::Abstraction(cs)) = &e.kind {
                assert!(cs.iter().all(|c| !contains_abstraction(&c.body)));
            }
        }
    }

    #[test]
    fn shadowed_capture_becomes_wildcard() {
        let t = lifted("def k = [ X -> [ X -> X | Y -> X ] ]");
        let Expr::Abstraction(cs) = body(&t, "k/lift0") else { panic!() };
        assert_eq!(cs[0].patterns, vec![Pattern::Wildcard, Pattern::Var("X".into())]);
        assert_eq!(cs[1].patterns, vec![Pattern::Var("X".into()), Pattern::Var("Y".into())]);
    }

    #[test]
    fn non_abstraction_bodies_are_lifted_into() {
        let t = lifted("using System def main = [ X -> X + 1 ] 2");
        assert!(t.get("main/lift0").is_some());
        assert!(!contains_abstraction(body(&t, "main")));
    }
}
