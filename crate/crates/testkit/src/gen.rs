//! Random closed first-order programs over integers, booleans and lists.
//!
//! Expressions are generated by type so most of them actually compute,
//! with a small share of deliberately odd subterms: type faults, stuck
//! applications, partial applications, `throw`, and division by values that
//! may be zero. Functions only call functions defined before them, except
//! for two recursion shapes that always terminate: structural recursion on
//! the tail of a list, and a countdown on `mod N 10` through a helper that
//! dispatches on `N < 1`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ty {
    Int,
    List,
    Bool,
}

const TYS: [Ty; 3] = [Ty::Int, Ty::List, Ty::Bool];

#[derive(Clone)]
struct Func {
    name: String,
    params: Vec<Ty>,
    ret: Ty,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    funcs: Vec<Func>,
    fresh: usize,
}

type Scope = Vec<(String, Ty)>;

impl<R: Rng> Gen<'_, R> {
    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("V{}", self.fresh)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn int_lit(&mut self) -> String {
        let v: i64 = self.rng.gen_range(-3..10);
        if v < 0 {
            format!("({v})")
        } else {
            v.to_string()
        }
    }

    fn leaf(&mut self, ty: Ty, scope: &Scope) -> String {
        let vars: Vec<&String> = scope.iter().filter(|(_, t)| *t == ty).map(|(v, _)| v).collect();
        if !vars.is_empty() && self.chance(0.6) {
            return vars.choose(self.rng).unwrap().to_string();
        }
        match ty {
            Ty::Int => self.int_lit(),
            Ty::List => "nil".into(),
            Ty::Bool => ["true", "false"].choose(self.rng).unwrap().to_string(),
        }
    }

    /// Something that does not fit: a stuck term, a partial application,
    /// text, or a throw.
    fn odd(&mut self, depth: usize, scope: &Scope) -> String {
        match self.rng.gen_range(0..4) {
            0 => format!("({} {})", self.int_lit(), self.expr(Ty::Int, depth, scope)),
            1 => "\"t\"".into(),
            2 => format!("(throw {})", self.expr(Ty::Int, depth, scope)),
            _ => {
                let callable: Vec<Func> = self.funcs.iter().filter(|f| !f.params.is_empty()).cloned().collect();
                match callable.choose(self.rng) {
                    Some(f) => {
                        let n = self.rng.gen_range(0..f.params.len());
                        self.call(f, n, depth, scope)
                    }
                    None => "\"t\"".into(),
                }
            }
        }
    }

    fn call(&mut self, f: &Func, n: usize, depth: usize, scope: &Scope) -> String {
        let mut args = Vec::new();
        for i in 0..n {
            let ty = f.params.get(i).copied().unwrap_or(Ty::Int);
            args.push(self.expr(ty, depth, scope));
        }
        if args.is_empty() {
            f.name.clone()
        } else {
            format!("({} {})", f.name, args.join(" "))
        }
    }

    fn expr(&mut self, ty: Ty, depth: usize, scope: &Scope) -> String {
        if depth == 0 || self.chance(0.2) {
            return self.leaf(ty, scope);
        }
        let d = depth - 1;
        if self.chance(0.012) {
            return self.odd(d, scope);
        }
        if self.chance(0.07) {
            let e = self.var();
            let mut inner = scope.clone();
            inner.push((e.clone(), Ty::Int));
            let body = self.expr(ty, d, scope);
            let handler = if self.chance(0.5) {
                self.expr(ty, d, scope)
            } else {
                self.expr(ty, d, &inner)
            };
            return format!("(try {body} catch [ {e} -> {handler} ])");
        }
        let returning: Vec<Func> = self.funcs.iter().filter(|f| f.ret == ty).cloned().collect();
        if !returning.is_empty() && self.chance(0.45) {
            let f = returning.choose(self.rng).unwrap().clone();
            let mut n = f.params.len();
            // Surplus arguments stick to the result.
            if self.chance(0.05) {
                n += 1;
            }
            return self.call(&f, n, d, scope);
        }
        match ty {
            Ty::Int => {
                let (a, b) = (self.expr(Ty::Int, d, scope), self.expr(Ty::Int, d, scope));
                if self.chance(0.05) {
                    let op = *["div", "mod"].choose(self.rng).unwrap();
                    format!("({op} {a} {b})")
                } else {
                    let op = *["+", "-", "*"].choose(self.rng).unwrap();
                    format!("({a} {op} {b})")
                }
            }
            Ty::List => {
                let head = if self.chance(0.1) {
                    let t = *TYS.choose(self.rng).unwrap();
                    self.expr(t, d, scope)
                } else {
                    self.expr(Ty::Int, d, scope)
                };
                format!("(cons {head} {})", self.expr(Ty::List, d, scope))
            }
            Ty::Bool => {
                let op = *["<", "<=", "=="].choose(self.rng).unwrap();
                let t = if op == "==" { *TYS.choose(self.rng).unwrap() } else { Ty::Int };
                let (a, b) = (self.expr(t, d, scope), self.expr(t, d, scope));
                format!("({a} {op} {b})")
            }
        }
    }

    fn pattern(&mut self, ty: Ty, scope: &mut Scope) -> String {
        let bind = |g: &mut Self, scope: &mut Scope, t| {
            let v = g.var();
            scope.push((v.clone(), t));
            v
        };
        match (ty, self.rng.gen_range(0..4)) {
            (_, 0) => bind(self, scope, ty),
            (_, 1) => "_".into(),
            (Ty::Int, _) => self.rng.gen_range(0..4).to_string(),
            (Ty::Bool, _) => ["true", "false"].choose(self.rng).unwrap().to_string(),
            (Ty::List, 2) => "nil".into(),
            (Ty::List, _) => {
                let x = bind(self, scope, Ty::Int);
                let xs = bind(self, scope, Ty::List);
                format!("(cons {x} {xs})")
            }
        }
    }

    fn params(&mut self, scope: &mut Scope, tys: &[Ty]) -> Vec<String> {
        tys.iter()
            .map(|t| {
                let v = self.var();
                scope.push((v.clone(), *t));
                v
            })
            .collect()
    }

    fn plain(&mut self, name: &str, params: &[Ty], ret: Ty) -> String {
        if params.is_empty() {
            return format!("def {name} = {}\n", self.expr(ret, 3, &Vec::new()));
        }
        let mut clauses = Vec::new();
        let count = self.rng.gen_range(1..=3);
        for i in 0..count {
            let mut scope = Vec::new();
            let last = i + 1 == count && self.chance(0.9);
            let pats: Vec<String> = if last {
                self.params(&mut scope, params)
            } else {
                params.iter().map(|t| self.pattern(*t, &mut scope)).collect()
            };
            let body = self.expr(ret, 3, &scope);
            clauses.push(format!("{} -> {body}", pats.join(" ")));
        }
        format!("def {name} = [ {} ]\n", clauses.join(" | "))
    }

    fn combine(&mut self, ret: Ty, rec: String, scope: &Scope) -> String {
        match ret {
            Ty::Int => {
                let op = *["+", "-", "*"].choose(self.rng).unwrap();
                format!("({} {op} {rec})", self.expr(Ty::Int, 2, scope))
            }
            Ty::List => format!("(cons {} {rec})", self.expr(Ty::Int, 2, scope)),
            Ty::Bool => format!("({} == {rec})", self.expr(Ty::Bool, 2, scope)),
        }
    }

    fn list_recursion(&mut self, name: &str, rest: &[Ty], ret: Ty) -> String {
        let mut base_scope = Vec::new();
        let base_params = self.params(&mut base_scope, rest);
        let base = self.expr(ret, 2, &base_scope);

        let mut scope = Vec::new();
        let (x, xs) = (self.var(), self.var());
        scope.push((x.clone(), Ty::Int));
        scope.push((xs.clone(), Ty::List));
        let ps = self.params(&mut scope, rest);
        let rec_args: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
        let rec = format!("({name} {xs} {})", rec_args.join(" ")).replace(" )", ")");
        let step = self.combine(ret, rec, &scope);
        format!(
            "def {name} = [ nil {} -> {base} | (cons {x} {xs}) {} -> {step} ]\n",
            base_params.join(" "),
            ps.join(" ")
        )
        .replace("  ->", " ->")
    }

    fn countdown(&mut self, name: &str, rest: &[Ty], ret: Ty) -> String {
        let helper = format!("{name}_go");
        let mut scope = Vec::new();
        let n = self.var();
        scope.push((n.clone(), Ty::Int));
        let ps = self.params(&mut scope, rest);
        let entry = format!(
            "def {name} = [ {n} {} -> ({helper} ({n} < 1) (mod {n} 10) {}) ]\n",
            ps.join(" "),
            ps.join(" ")
        );

        let mut base_scope = Vec::new();
        let bn = self.var();
        base_scope.push((bn.clone(), Ty::Int));
        let bps = self.params(&mut base_scope, rest);
        let base = self.expr(ret, 2, &base_scope);

        let mut step_scope = Vec::new();
        let sn = self.var();
        step_scope.push((sn.clone(), Ty::Int));
        let sps = self.params(&mut step_scope, rest);
        let rec = format!("({name} ({sn} - 1) {})", sps.join(" "));
        let step = self.combine(ret, rec, &step_scope);
        let helper_def = format!(
            "def {helper} = [ true {bn} {} -> {base} | false {sn} {} -> {step} ]\n",
            bps.join(" "),
            sps.join(" ")
        );
        (entry + &helper_def).replace("  ", " ").replace(" )", ")")
    }

    fn program(&mut self) -> String {
        let mut out = String::from("data nil, cons\n");
        for i in 0..self.rng.gen_range(1..=6) {
            let name = format!("f{i}");
            let ret = *TYS.choose(self.rng).unwrap();
            let extra: Vec<Ty> = (0..self.rng.gen_range(0..=2)).map(|_| *TYS.choose(self.rng).unwrap()).collect();
            let (def, params) = match self.rng.gen_range(0..5) {
                0 => {
                    let mut params = vec![Ty::List];
                    params.extend(&extra);
                    (self.list_recursion(&name, &extra, ret), params)
                }
                1 => {
                    let mut params = vec![Ty::Int];
                    params.extend(&extra);
                    (self.countdown(&name, &extra, ret), params)
                }
                _ => (self.plain(&name, &extra, ret), extra.clone()),
            };
            out.push_str(&def);
            self.funcs.push(Func { name, params, ret });
        }
        let last = self.funcs.last().cloned().unwrap();
        let main = if self.chance(0.7) {
            self.call(&last, last.params.len(), 3, &Vec::new())
        } else {
            let ty = *TYS.choose(self.rng).unwrap();
            self.expr(ty, 4, &Vec::new())
        };
        out.push_str(&format!("def main = {main}\n"));
        out
    }
}

pub fn random_program(rng: &mut impl Rng) -> String {
    Gen {
        rng,
        funcs: Vec::new(),
        fresh: 0,
    }
    .program()
}

/// The `index`-th program of a fixed, reproducible sequence.
pub fn seeded_program(seed: u64, index: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index);
    random_program(&mut rng)
}

/// Integer programs built from nested, variable-capturing abstractions:
/// applied lambdas, multi-clause lambdas, lambdas passed as arguments and
/// curried top-level definitions.
struct Lambdas<'r, R: Rng> {
    rng: &'r mut R,
    defs: usize,
    fresh: usize,
}

impl<R: Rng> Lambdas<'_, R> {
    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("X{}", self.fresh)
    }

    fn expr(&mut self, depth: usize, scope: &[String]) -> String {
        if depth == 0 || self.rng.gen_bool(0.15) {
            if !scope.is_empty() && self.rng.gen_bool(0.7) {
                return scope.choose(self.rng).unwrap().clone();
            }
            return self.rng.gen_range(0..6).to_string();
        }
        let d = depth - 1;
        let extend = |scope: &[String], v: &str| {
            let mut s = scope.to_vec();
            s.push(v.to_string());
            s
        };
        match self.rng.gen_range(0..9) {
            0 | 1 => {
                let op = *["+", "-", "*"].choose(self.rng).unwrap();
                format!("({} {op} {})", self.expr(d, scope), self.expr(d, scope))
            }
            2 => {
                let v = self.var();
                let body = self.expr(d, &extend(scope, &v));
                format!("([ {v} -> {body} ] {})", self.expr(d, scope))
            }
            3 => {
                let v = self.var();
                let zero = self.expr(d, scope);
                let other = self.expr(d, &extend(scope, &v));
                format!("([ 0 -> {zero} | {v} -> {other} ] {})", self.expr(d, scope))
            }
            4 => {
                let (a, b) = (self.var(), self.var());
                let body = self.expr(d, &extend(&extend(scope, &a), &b));
                format!("([ {a} {b} -> {body} ] {} {})", self.expr(d, scope), self.expr(d, scope))
            }
            5 => {
                let (f, v) = (self.var(), self.var());
                let arg = self.expr(d, scope);
                let body = self.expr(d, &extend(scope, &v));
                format!("([ {f} -> ({f} {arg}) ] [ {v} -> {body} ])")
            }
            6 if self.defs > 0 => {
                let g = self.rng.gen_range(0..self.defs);
                format!("(g{g} {} {})", self.expr(d, scope), self.expr(d, scope))
            }
            7 => {
                let e = self.var();
                let body = if self.rng.gen_bool(0.5) {
                    format!("(throw {})", self.expr(d, scope))
                } else {
                    self.expr(d, scope)
                };
                let handler = self.expr(d, &extend(scope, &e));
                format!("(try {body} catch [ {e} -> {handler} ])")
            }
            _ => self.expr(d, scope),
        }
    }

    fn program(&mut self) -> String {
        let mut out = String::new();
        for i in 0..self.rng.gen_range(0..=3) {
            let (x, y) = (self.var(), self.var());
            let body = self.expr(3, &[x.clone(), y.clone()]);
            if self.rng.gen_bool(0.5) {
                out.push_str(&format!("def g{i} = [ {x} -> [ {y} -> {body} ] ]\n"));
            } else {
                out.push_str(&format!("def g{i} = [ {x} {y} -> {body} ]\n"));
            }
            self.defs += 1;
        }
        let main = self.expr(5, &[]);
        out.push_str(&format!("def main = {main}\n"));
        out
    }
}

pub fn lambda_program(rng: &mut impl Rng) -> String {
    Lambdas {
        rng,
        defs: 0,
        fresh: 0,
    }
    .program()
}
