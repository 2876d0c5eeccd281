//! Test-side oracles, independent of the engine's suspension machinery:
//! a named-term normalizer with capture-avoiding substitution, a random
//! generator of well-typed terms, and a ground-instance matcher.

#![allow(dead_code)]

use std::collections::HashMap;

use hopu::normalize::Nf;
use hopu::term::{Store, SymId, TermId};

// ---------------------------------------------------------------------------
// Named lambda terms and the naive normalizer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum NT {
    V(String),
    C(String),
    App(Box<NT>, Box<NT>),
    Lam(String, Box<NT>),
}

pub fn v(s: &str) -> NT {
    NT::V(s.into())
}
pub fn c(s: &str) -> NT {
    NT::C(s.into())
}
pub fn app(f: NT, a: NT) -> NT {
    NT::App(Box::new(f), Box::new(a))
}
pub fn lam(x: &str, b: NT) -> NT {
    NT::Lam(x.into(), Box::new(b))
}

fn free_in(t: &NT, x: &str) -> bool {
    match t {
        NT::V(y) => y == x,
        NT::C(_) => false,
        NT::App(f, a) => free_in(f, x) || free_in(a, x),
        NT::Lam(y, b) => y != x && free_in(b, x),
    }
}

/// Capture-avoiding substitution `t[x := s]`, renaming binders as
/// needed with the given counter.
pub fn subst(t: &NT, x: &str, s: &NT, fresh: &mut u64) -> NT {
    match t {
        NT::V(y) => {
            if y == x {
                s.clone()
            } else {
                t.clone()
            }
        }
        NT::C(_) => t.clone(),
        NT::App(f, a) => app(subst(f, x, s, fresh), subst(a, x, s, fresh)),
        NT::Lam(y, b) => {
            if y == x {
                t.clone()
            } else if free_in(s, y) {
                *fresh += 1;
                let y2 = format!("{}%{}", y, fresh);
                let renamed = subst(b, y, &NT::V(y2.clone()), fresh);
                lam(&y2, subst(&renamed, x, s, fresh))
            } else {
                lam(y, subst(b, x, s, fresh))
            }
        }
    }
}

/// Full beta normalization by repeated contraction; terminates on
/// well-typed input.
pub fn normalize(t: &NT, fresh: &mut u64) -> NT {
    match t {
        NT::V(_) | NT::C(_) => t.clone(),
        NT::Lam(x, b) => lam(x, normalize(b, fresh)),
        NT::App(f, a) => {
            let f2 = normalize(f, fresh);
            if let NT::Lam(x, b) = f2 {
                let contracted = subst(&b, &x, a, fresh);
                normalize(&contracted, fresh)
            } else {
                app(f2, normalize(a, fresh))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// The comparison tree: nameless, flattened, consolidated
// ---------------------------------------------------------------------------

/// Alpha-invariant comparison form shared by the oracle and the engine:
/// de Bruijn indexes, flattened application spines, consolidated
/// binders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum T {
    C(String),
    /// Free (logic) variable by numeric key.
    V(u32),
    Ix(u32),
    App(Box<T>, Vec<T>),
    Abs(u32, Box<T>),
}

/// Converts a normalized named term; free variables are resolved
/// through `vars` (name to key).
pub fn nt_to_t(t: &NT, binders: &mut Vec<String>, vars: &HashMap<String, u32>) -> T {
    match t {
        NT::C(name) => T::C(name.clone()),
        NT::V(x) => {
            if let Some(pos) = binders.iter().rposition(|b| b == x) {
                T::Ix((binders.len() - pos) as u32)
            } else {
                T::V(*vars.get(x).unwrap_or_else(|| panic!("free name {}", x)))
            }
        }
        NT::Lam(..) => {
            let mut names = Vec::new();
            let mut cur = t;
            while let NT::Lam(x, b) = cur {
                names.push(x.clone());
                cur = b;
            }
            let n = names.len() as u32;
            binders.extend(names);
            let body = nt_to_t(cur, binders, vars);
            for _ in 0..n {
                binders.pop();
            }
            T::Abs(n, Box::new(body))
        }
        NT::App(..) => {
            let mut args = Vec::new();
            let mut cur = t;
            while let NT::App(f, a) = cur {
                args.push(a.as_ref());
                cur = f;
            }
            args.reverse();
            let head = nt_to_t(cur, binders, vars);
            let args = args
                .into_iter()
                .map(|a| nt_to_t(a, binders, vars))
                .collect();
            T::App(Box::new(head), args)
        }
    }
}

/// Converts the engine's normalized form; constant names come from the
/// store, unbound variables keep their numeric ids.
pub fn nf_to_t(st: &Store, nf: &Nf) -> T {
    match nf {
        Nf::Const { sym, .. } => T::C(st.sym_name(*sym).to_string()),
        Nf::Var { id } => T::V(*id),
        Nf::Db(i) => T::Ix(*i),
        Nf::App { head, args } => T::App(
            Box::new(nf_to_t(st, head)),
            args.iter().map(|a| nf_to_t(st, a)).collect(),
        ),
        Nf::Abs { n, body } => T::Abs(*n, Box::new(nf_to_t(st, body))),
    }
}

// ---------------------------------------------------------------------------
// Encoding named terms into the kernel
// ---------------------------------------------------------------------------

/// Builds the kernel representation of a named term; `consts` maps
/// constant names to interned symbols (with universes), `vars` maps
/// free names to logic variable nodes.
pub fn encode_nt(
    st: &mut Store,
    consts: &HashMap<String, (SymId, u32)>,
    vars: &HashMap<String, TermId>,
    t: &NT,
    binders: &mut Vec<String>,
) -> TermId {
    match t {
        NT::C(name) => {
            let (sym, univ) = consts[name];
            st.mk_const(sym, univ, vec![])
        }
        NT::V(x) => {
            if let Some(pos) = binders.iter().rposition(|b| b == x) {
                st.mk_db((binders.len() - pos) as u32)
            } else {
                vars[x]
            }
        }
        NT::Lam(x, b) => {
            binders.push(x.clone());
            let body = encode_nt(st, consts, vars, b, binders);
            binders.pop();
            st.mk_abs(1, body)
        }
        NT::App(f, a) => {
            let fe = encode_nt(st, consts, vars, f, binders);
            let ae = encode_nt(st, consts, vars, a, binders);
            st.mk_app(fe, vec![ae])
        }
    }
}

// ---------------------------------------------------------------------------
// Random well-typed closed terms over a five-constant signature
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    I,
    Arr(Box<Ty>, Box<Ty>),
}

pub fn arr(a: Ty, b: Ty) -> Ty {
    Ty::Arr(Box::new(a), Box::new(b))
}

/// The five-constant signature: a, b : i; f : i -> i; g : i -> i -> i;
/// h : (i -> i) -> i.
pub fn signature() -> Vec<(String, Ty)> {
    vec![
        ("a".into(), Ty::I),
        ("b".into(), Ty::I),
        ("f".into(), arr(Ty::I, Ty::I)),
        ("g".into(), arr(Ty::I, arr(Ty::I, Ty::I))),
        ("h".into(), arr(arr(Ty::I, Ty::I), Ty::I)),
    ]
}

pub struct Gen<R> {
    pub rng: R,
    pub sig: Vec<(String, Ty)>,
    counter: u64,
}

impl<R: rand::Rng> Gen<R> {
    pub fn new(rng: R) -> Gen<R> {
        Gen {
            rng,
            sig: signature(),
            counter: 0,
        }
    }

    /// A random closed term of the given type with at most `fuel` nodes.
    pub fn term(&mut self, ty: &Ty, fuel: &mut u32) -> NT {
        let mut ctx = Vec::new();
        self.gen(ty, &mut ctx, fuel)
    }

    fn gen(&mut self, ty: &Ty, ctx: &mut Vec<(String, Ty)>, fuel: &mut u32) -> NT {
        if *fuel > 0 {
            *fuel -= 1;
        }
        let atoms: Vec<NT> = self.fitting(ty, ctx);
        if *fuel == 0 {
            if let Some(t) = self.smallest(ty, &atoms, ctx) {
                return t;
            }
        }
        let mut choices: Vec<u32> = Vec::new();
        if !atoms.is_empty() {
            choices.push(0);
        }
        if matches!(ty, Ty::Arr(..)) {
            choices.push(1);
        }
        choices.push(2); // application
        let pick = choices[self.rng.gen_range(0..choices.len())];
        match pick {
            0 => atoms[self.rng.gen_range(0..atoms.len())].clone(),
            1 => {
                let (d, cod) = match ty {
                    Ty::Arr(d, c) => (d.as_ref().clone(), c.as_ref().clone()),
                    _ => unreachable!(),
                };
                self.counter += 1;
                let x = format!("v{}", self.counter);
                ctx.push((x.clone(), d));
                let b = self.gen(&cod, ctx, fuel);
                ctx.pop();
                lam(&x, b)
            }
            _ => {
                // an application producing ty, with a small argument type
                let argty = if self.rng.gen_bool(0.7) {
                    Ty::I
                } else {
                    arr(Ty::I, Ty::I)
                };
                let fun = self.gen(&arr(argty.clone(), ty.clone()), ctx, fuel);
                let a = self.gen(&argty, ctx, fuel);
                app(fun, a)
            }
        }
    }

    fn fitting(&self, ty: &Ty, ctx: &[(String, Ty)]) -> Vec<NT> {
        let mut out = Vec::new();
        for (x, t) in ctx {
            if t == ty {
                out.push(v(x));
            }
        }
        for (name, t) in &self.sig {
            if t == ty {
                out.push(c(name));
            }
        }
        out
    }

    /// The cheapest closed inhabitant when fuel has run out.
    fn smallest(&mut self, ty: &Ty, atoms: &[NT], _ctx: &[(String, Ty)]) -> Option<NT> {
        if !atoms.is_empty() {
            return Some(atoms[0].clone());
        }
        match ty {
            Ty::I => Some(c("a")),
            Ty::Arr(d, cod) => {
                self.counter += 1;
                let x = format!("v{}", self.counter);
                let _ = d;
                let body = self.smallest(cod, &[], &[])?;
                Some(lam(&x, body))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Ground-instance matching
// ---------------------------------------------------------------------------

/// Does a consistent assignment to the numeric (free) variables of the
/// patterns make each pattern equal to its ground partner? Flexible
/// subterms are variables applied to atoms; matching inverts the ground
/// side over those atoms, backtracking across candidate inversions.
pub fn match_instances(pairs: &[(T, T)]) -> bool {
    let mut h: HashMap<u32, (u32, T)> = HashMap::new();
    match_list(pairs, 0, &mut h)
}

fn match_list(pairs: &[(T, T)], i: usize, h: &mut HashMap<u32, (u32, T)>) -> bool {
    if i == pairs.len() {
        return true;
    }
    match_one(&pairs[i].0, &pairs[i].1, h, &|h2| {
        match_list(pairs, i + 1, h2)
    })
}

fn match_one(
    p: &T,
    g: &T,
    h: &mut HashMap<u32, (u32, T)>,
    k: &dyn Fn(&mut HashMap<u32, (u32, T)>) -> bool,
) -> bool {
    match (p, g) {
        (T::C(c1), T::C(c2)) => c1 == c2 && k(h),
        (T::Ix(i), T::Ix(j)) => i == j && k(h),
        (T::Abs(n, p2), T::Abs(m, g2)) => n == m && match_one(p2, g2, h, k),
        (T::V(x), _) => match_flex(*x, &[], g, h, k),
        (T::App(ph, pargs), _) => {
            if let T::V(x) = &**ph {
                return match_flex(*x, pargs, g, h, k);
            }
            if let T::App(gh, gargs) = g {
                if pargs.len() != gargs.len() {
                    return false;
                }
                let mut all: Vec<(T, T)> = vec![((**ph).clone(), (**gh).clone())];
                all.extend(pargs.iter().cloned().zip(gargs.iter().cloned()));
                return match_list(&all, 0, h);
            }
            false
        }
        _ => false,
    }
}

fn match_flex(
    x: u32,
    args: &[T],
    g: &T,
    h: &mut HashMap<u32, (u32, T)>,
    k: &dyn Fn(&mut HashMap<u32, (u32, T)>) -> bool,
) -> bool {
    let m = args.len() as u32;
    if let Some((arity, body)) = h.get(&x) {
        let expanded = apply_binding(*arity, &body.clone(), args);
        return expanded == *g && k(h);
    }
    for body in invert(g, args, 0) {
        h.insert(x, (m, body));
        if k(h) {
            return true;
        }
        h.remove(&x);
    }
    false
}

/// `apply_binding(m, body, args)`: body lives under `m` binders;
/// replace `#j` (above any local binders) by the matching argument.
fn apply_binding(m: u32, body: &T, args: &[T]) -> T {
    fn shift_atom(a: &T, d: u32) -> T {
        match a {
            T::Ix(i) => T::Ix(i + d),
            other => other.clone(),
        }
    }
    fn go(m: u32, t: &T, d: u32, args: &[T]) -> T {
        match t {
            T::C(_) | T::V(_) => t.clone(),
            T::Ix(j) => {
                if *j <= d {
                    t.clone()
                } else {
                    let k = j - d;
                    assert!(k <= m, "binding body must be closed");
                    shift_atom(&args[(m - k) as usize], d)
                }
            }
            T::App(h2, a2) => T::App(
                Box::new(go(m, h2, d, args)),
                a2.iter().map(|a| go(m, a, d, args)).collect(),
            ),
            T::Abs(k, b) => T::Abs(*k, Box::new(go(m, b, d + k, args))),
        }
    }
    go(m, body, 0, args)
}

/// All bodies `t` (under `args.len()` binders) with `t[args] = g`;
/// `d` counts binders entered inside `g` itself.
fn invert(g: &T, args: &[T], d: u32) -> Vec<T> {
    let m = args.len() as u32;
    let mut out = Vec::new();
    for (i, z) in args.iter().enumerate() {
        if g == z {
            out.push(T::Ix(m - i as u32 + d));
        }
    }
    match g {
        T::C(name) => out.push(T::C(name.clone())),
        T::Ix(j) => {
            if *j <= d {
                out.push(T::Ix(*j)); // bound inside the ground term
            }
        }
        T::V(_) => {}
        T::App(h2, a2) => {
            let heads = invert(h2, args, d);
            let argopts: Vec<Vec<T>> = a2.iter().map(|a| invert(a, args, d)).collect();
            let mut combos: Vec<Vec<T>> = vec![Vec::new()];
            for opts in &argopts {
                let mut next = Vec::new();
                for combo in &combos {
                    for o in opts {
                        let mut c2 = combo.clone();
                        c2.push(o.clone());
                        next.push(c2);
                    }
                }
                combos = next;
            }
            for hh in heads {
                for combo in &combos {
                    out.push(T::App(Box::new(hh.clone()), combo.clone()));
                }
            }
        }
        T::Abs(k, b) => {
            // entering the binder shifts the candidate atoms
            let shifted: Vec<T> = args
                .iter()
                .map(|z| match z {
                    T::Ix(i) => T::Ix(i + k),
                    other => other.clone(),
                })
                .collect();
            for body in invert(b, &shifted, d + k) {
                out.push(T::Abs(*k, Box::new(body)));
            }
        }
    }
    out
}
