//! Head normalization and full beta-normalization over suspension terms.
//!
//! The reducer threads an implicit suspension `(ol, nl, env)` through
//! the traversal instead of allocating intermediate suspension nodes.
//! Beta-contractions follow the leftmost-outermost discipline, nested
//! redex substitutions are merged into one environment, and the
//! arguments of a head normal form are left as (possibly trivial)
//! suspensions. Destructive updates fire only when the surrounding
//! implicit suspension is trivial, so shared subterms are rewritten at
//! most once and never under a context-dependent environment.

use crate::term::{Env, EnvItem, Node, Store, TermId};

/// An implicit suspension: the value `[t, ol, nl, env]`.
#[derive(Clone, Debug)]
pub struct Quad {
    pub t: TermId,
    pub ol: u32,
    pub nl: u32,
    pub env: Env,
}

impl Quad {
    fn trivial(t: TermId) -> Quad {
        Quad {
            t,
            ol: 0,
            nl: 0,
            env: Env::nil(),
        }
    }

    fn is_trivial(&self) -> bool {
        self.ol == 0 && self.nl == 0
    }
}

/// The decomposition of a head normal form: binder length, an atomic
/// head (constant, de Bruijn index or unbound logic variable) and the
/// argument vector, whose members may still be suspensions.
#[derive(Clone, Debug)]
pub struct HeadNormView {
    pub binder: u32,
    pub head: TermId,
    pub args: Vec<TermId>,
    /// The rewritten node the view was read from.
    pub source: TermId,
}

/// Suspends `a` under `(ol, nl, env)`, reading atoms eagerly: constants
/// and logic variables drop the environment outright, and an index is
/// resolved through the environment in constant time. Everything else
/// becomes an explicit suspension node.
pub fn suspend(st: &mut Store, a: TermId, ol: u32, nl: u32, env: &Env) -> TermId {
    if ol == 0 && nl == 0 {
        return a;
    }
    let d = st.deref(a);
    match st.node(d) {
        Node::Const { .. } | Node::Var { .. } => d,
        Node::Db(i) => {
            let i = *i;
            if i > ol {
                st.mk_db(i - ol + nl)
            } else {
                match env.get(i).clone() {
                    EnvItem::Dum(l) => st.mk_db(nl - l),
                    EnvItem::Bind(s, l) => {
                        let sd = st.deref(s);
                        if let Node::Susp {
                            body,
                            ol: o2,
                            nl: n2,
                            env: e2,
                        } = st.node(sd)
                        {
                            let (body, o2, n2, e2) = (*body, *o2, *n2, e2.clone());
                            st.mk_susp(body, o2, n2 + (nl - l), e2)
                        } else if nl == l {
                            sd
                        } else {
                            st.mk_susp(sd, 0, nl - l, Env::nil())
                        }
                    }
                }
            }
        }
        _ => st.mk_susp(d, ol, nl, env.clone()),
    }
}

/// Core of the reducer. Returns an implicit suspension that denotes the
/// same term as `[t, ol, nl, env]`; the result suspension is non-trivial
/// only when `whnf` is set and the term component is an abstraction.
pub fn hnorm(st: &mut Store, t: TermId, ol: u32, nl: u32, env: &Env, whnf: bool) -> Quad {
    match st.node(t).clone() {
        Node::Ref(t2) => hnorm(st, t2, ol, nl, env, whnf),
        Node::Var { bind: Some(b), .. } => {
            // Substitutions cannot reach through a logic variable, so the
            // environment is dropped before following the binding.
            hnorm(st, b, 0, 0, &Env::nil(), whnf)
        }
        Node::Var { bind: None, .. } | Node::Const { .. } => Quad::trivial(t),
        Node::Db(i) => {
            if ol == 0 && nl == 0 {
                return Quad::trivial(t);
            }
            if i > ol {
                let t2 = st.mk_db(i - ol + nl);
                return Quad::trivial(t2);
            }
            match env.get(i).clone() {
                EnvItem::Dum(l) => {
                    let t2 = st.mk_db(nl - l);
                    Quad::trivial(t2)
                }
                EnvItem::Bind(s, l) => {
                    let sd = st.deref(s);
                    if let Node::Susp {
                        body,
                        ol: o2,
                        nl: n2,
                        env: e2,
                    } = st.node(sd).clone()
                    {
                        hnorm(st, body, o2, n2 + (nl - l), &e2, whnf)
                    } else {
                        hnorm(st, sd, 0, nl - l, &Env::nil(), whnf)
                    }
                }
            }
        }
        Node::Abs { n, body } => {
            if whnf {
                return Quad {
                    t,
                    ol,
                    nl,
                    env: env.clone(),
                };
            }
            if ol == 0 && nl == 0 {
                let q = hnorm(st, body, 0, 0, &Env::nil(), false);
                debug_assert!(q.is_trivial());
                // The body has been rewritten in place; the node itself
                // still denotes the normal form.
                Quad::trivial(t)
            } else {
                let mut e2 = env.clone();
                for k in 0..n {
                    e2 = Env::cons(EnvItem::Dum(nl + k), &e2);
                }
                let q = hnorm(st, body, ol + n, nl + n, &e2, false);
                debug_assert!(q.is_trivial());
                let t2 = st.mk_abs(n, q.t);
                Quad::trivial(t2)
            }
        }
        Node::App { head, args } => hnorm_app(st, t, head, &args, ol, nl, env, whnf),
        Node::Susp {
            body,
            ol: il,
            nl: inl,
            env: ienv,
        } => {
            let q = hnorm(st, body, il, inl, &ienv, whnf);
            let s = mk_explicit(st, &q);
            st.assign(t, s);
            if ol == 0 && nl == 0 {
                Quad::trivial(s)
            } else {
                hnorm(st, s, ol, nl, env, whnf)
            }
        }
    }
}

/// Turns a non-trivial abstraction suspension into an explicit term by
/// pushing the environment under the binder.
fn mk_explicit(st: &mut Store, q: &Quad) -> TermId {
    if q.is_trivial() {
        return q.t;
    }
    let d = st.deref(q.t);
    match st.node(d).clone() {
        Node::Abs { n, body } => {
            let mut e2 = q.env.clone();
            for k in 0..n {
                e2 = Env::cons(EnvItem::Dum(q.nl + k), &e2);
            }
            let inner = st.mk_susp(body, q.ol + n, q.nl + n, e2);
            st.mk_abs(n, inner)
        }
        _ => st.mk_susp(d, q.ol, q.nl, q.env.clone()),
    }
}

#[allow(clippy::too_many_arguments)]
fn hnorm_app(
    st: &mut Store,
    t: TermId,
    head: TermId,
    args: &[TermId],
    ol: u32,
    nl: u32,
    env: &Env,
    whnf: bool,
) -> Quad {
    let mut f = hnorm(st, head, ol, nl, env, true);
    let mut consumed = 0usize;

    // Walk down the spine contracting redexes; each consumed argument
    // merges into the function's environment without an intermediate
    // suspension node.
    loop {
        let fd = st.deref(f.t);
        let (n, body) = match st.node(fd) {
            Node::Abs { n, body } => (*n, *body),
            _ => break,
        };
        if consumed == args.len() {
            break;
        }
        let take = (n as usize).min(args.len() - consumed);
        let mut fe = f.env.clone();
        for _ in 0..take {
            let arg = suspend(st, args[consumed], ol, nl, env);
            fe = Env::cons(EnvItem::Bind(arg, f.nl), &fe);
            consumed += 1;
        }
        let fol = f.ol + take as u32;
        if (take as u32) < n {
            let rest = st.mk_abs(n - take as u32, body);
            f = Quad {
                t: rest,
                ol: fol,
                nl: f.nl,
                env: fe,
            };
        } else {
            f = hnorm(st, body, fol, f.nl, &fe, true);
        }
    }

    if consumed == args.len() {
        // The whole application reduced to the function value.
        let fd = st.deref(f.t);
        let is_abs = matches!(st.node(fd), Node::Abs { .. });
        let result = if is_abs && !whnf {
            let q = hnorm(st, f.t, f.ol, f.nl, &f.env, false);
            debug_assert!(q.is_trivial());
            q
        } else if is_abs && whnf {
            // Keep the suspension implicit; the caller deals with it.
            let out = f.clone();
            if ol == 0 && nl == 0 && out.is_trivial() {
                st.assign(t, out.t);
            }
            return out;
        } else {
            debug_assert!(f.is_trivial());
            Quad::trivial(f.t)
        };
        if ol == 0 && nl == 0 && result.is_trivial() {
            st.assign(t, result.t);
        }
        return result;
    }

    // Atomic (or applied-atomic) head with arguments left over: build
    // the head normal application, suspending the remaining arguments.
    debug_assert!(f.is_trivial());
    let fd = st.deref(f.t);
    if consumed == 0 && fd == st.deref(head) && ol == 0 && nl == 0 {
        // Nothing changed: the node is already in head normal form.
        return Quad::trivial(t);
    }
    let rest: Vec<TermId> = args[consumed..]
        .iter()
        .map(|a| suspend(st, *a, ol, nl, env))
        .collect();
    let new = st.mk_app(fd, rest);
    if ol == 0 && nl == 0 {
        st.assign(t, new);
    }
    Quad::trivial(new)
}

/// Rewrites `t` to head normal form and decomposes it.
pub fn head_norm(st: &mut Store, t: TermId) -> HeadNormView {
    let q = hnorm(st, t, 0, 0, &Env::nil(), false);
    debug_assert!(q.is_trivial());
    view_of(st, q.t)
}

/// Reads the binder, head and arguments off an already normal term.
pub fn view_of(st: &Store, t: TermId) -> HeadNormView {
    let source = t;
    let mut binder = 0u32;
    let mut cur = st.deref(t);
    while let Node::Abs { n, body } = st.node(cur) {
        binder += n;
        cur = st.deref(*body);
    }
    // Nested applications can arise through Ref chains; flatten them.
    let mut args: Vec<TermId> = Vec::new();
    let mut head = cur;
    while let Node::App { head: h, args: a } = st.node(head) {
        let mut front = a.to_vec();
        front.extend(args);
        args = front;
        head = st.deref(*h);
    }
    debug_assert!(
        matches!(
            st.node(head),
            Node::Const { .. } | Node::Db(_) | Node::Var { bind: None, .. }
        ),
        "head normal form with non-atomic head"
    );
    HeadNormView {
        binder,
        head,
        args,
        source,
    }
}

/// Extends the binder of a head normal view by `extra` abstractions,
/// shifting the arguments and appending `#extra ... #1`. A de Bruijn
/// head is renumbered; constant and logic-variable heads are unchanged.
pub fn eta_adjust(st: &mut Store, v: &HeadNormView, extra: u32) -> HeadNormView {
    assert!(extra > 0, "eta_adjust: extra must be positive");
    let mut args: Vec<TermId> = v
        .args
        .iter()
        .map(|a| suspend(st, *a, 0, extra, &Env::nil()))
        .collect();
    for i in (1..=extra).rev() {
        let db = st.mk_db(i);
        args.push(db);
    }
    let head = match st.node(v.head) {
        Node::Db(i) => st.mk_db(i + extra),
        _ => v.head,
    };
    HeadNormView {
        binder: v.binder + extra,
        head,
        args,
        source: v.source,
    }
}

/// A detached, suspension-free, beta-normal de Bruijn term. Used for
/// answer display and oracle comparison; structural equality is
/// alpha-equivalence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nf {
    Const {
        sym: crate::term::SymId,
        anns: Vec<TyNf>,
    },
    Var {
        id: u32,
    },
    Db(u32),
    App {
        head: Box<Nf>,
        args: Vec<Nf>,
    },
    Abs {
        n: u32,
        body: Box<Nf>,
    },
}

/// A detached type tree for annotations and answer display.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TyNf {
    Var(u32),
    Sort(crate::ty::TyConId),
    App(crate::ty::TyConId, Vec<TyNf>),
}

pub fn ty_nf(st: &Store, t: crate::ty::TyId) -> TyNf {
    use crate::ty::TyNode;
    let t = st.ty_deref(t);
    match st.ty_node(t) {
        TyNode::Var { id, .. } => TyNf::Var(*id),
        TyNode::Sort(c) => TyNf::Sort(*c),
        TyNode::App { con, args } => {
            let args = args.iter().map(|a| ty_nf(st, *a)).collect();
            TyNf::App(*con, args)
        }
    }
}

/// Fully normalizes `t`: head normalization applied recursively to all
/// arguments, producing a suspension-free de Bruijn tree.
pub fn full_normalize(st: &mut Store, t: TermId) -> Nf {
    let v = head_norm(st, t);
    let head = match st.node(v.head).clone() {
        Node::Const { sym, anns, .. } => Nf::Const {
            sym,
            anns: anns.iter().map(|a| ty_nf(st, *a)).collect(),
        },
        Node::Db(i) => Nf::Db(i),
        Node::Var { bind: None, id, .. } => Nf::Var { id },
        other => panic!("full_normalize: non-atomic head {:?}", other),
    };
    let args: Vec<Nf> = v.args.iter().map(|a| full_normalize(st, *a)).collect();
    let body = if args.is_empty() {
        head
    } else {
        Nf::App {
            head: Box::new(head),
            args,
        }
    };
    if v.binder == 0 {
        body
    } else {
        match body {
            Nf::Abs { n, body } => Nf::Abs {
                n: v.binder + n,
                body,
            },
            other => Nf::Abs {
                n: v.binder,
                body: Box::new(other),
            },
        }
    }
}
