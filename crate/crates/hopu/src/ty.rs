//! Polymorphic type expressions and first-order type unification.
//!
//! Types are first-order terms over sorts and constructors; the
//! function arrow is an ordinary binary constructor. Type variables are
//! mutable cells whose bindings go through the shared trail.

use std::fmt;
use std::rc::Rc;

use crate::term::Store;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TyId(pub u32);

impl fmt::Debug for TyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ty{}", self.0)
    }
}

/// A type constructor or sort, identified by index into the kind table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct TyConId(pub u32);

#[derive(Clone, Debug, PartialEq)]
pub enum TyNode {
    Var { bind: Option<TyId>, id: u32 },
    Sort(TyConId),
    App { con: TyConId, args: Rc<[TyId]> },
}

#[derive(Clone, Debug)]
pub struct TyConInfo {
    pub name: String,
    pub arity: u32,
}

/// Kind table: names and arities of declared sorts and constructors.
#[derive(Clone, Default)]
pub struct TyCons {
    list: Vec<TyConInfo>,
}

impl TyCons {
    pub fn intern(&mut self, name: &str, arity: u32) -> TyConId {
        let id = TyConId(self.list.len() as u32);
        self.list.push(TyConInfo {
            name: name.to_string(),
            arity,
        });
        id
    }

    pub fn lookup(&self, name: &str) -> Option<TyConId> {
        self.list
            .iter()
            .position(|c| c.name == name)
            .map(|i| TyConId(i as u32))
    }

    pub fn info(&self, c: TyConId) -> &TyConInfo {
        &self.list[c.0 as usize]
    }
}

impl Store {
    pub fn ty_alloc(&mut self, n: TyNode) -> TyId {
        let id = TyId(self.types.len() as u32);
        self.types.push(n);
        id
    }

    pub fn ty_node(&self, t: TyId) -> &TyNode {
        &self.types[t.0 as usize]
    }

    pub fn fresh_tyvar(&mut self) -> TyId {
        let id = self.next_tyvar_id();
        self.ty_alloc(TyNode::Var { bind: None, id })
    }

    pub fn mk_sort(&mut self, con: TyConId) -> TyId {
        self.ty_alloc(TyNode::Sort(con))
    }

    pub fn mk_tyapp(&mut self, con: TyConId, args: Vec<TyId>) -> TyId {
        if args.is_empty() {
            return self.mk_sort(con);
        }
        self.ty_alloc(TyNode::App {
            con,
            args: args.into(),
        })
    }

    pub fn ty_deref(&self, t: TyId) -> TyId {
        let mut cur = t;
        loop {
            match self.ty_node(cur) {
                TyNode::Var { bind: Some(t2), .. } => cur = *t2,
                _ => return cur,
            }
        }
    }

    fn ty_bind(&mut self, v: TyId, t: TyId) {
        let id = match self.ty_node(v) {
            TyNode::Var { bind: None, id } => *id,
            _ => panic!("ty_bind: not an unbound type variable"),
        };
        self.overwrite_type(v, TyNode::Var { bind: Some(t), id });
    }

    fn ty_occurs(&self, v: TyId, t: TyId) -> bool {
        let t = self.ty_deref(t);
        if t == v {
            return true;
        }
        match self.ty_node(t) {
            TyNode::App { args, .. } => args.iter().any(|a| self.ty_occurs(v, *a)),
            _ => false,
        }
    }

    /// Standard first-order unification with occurs check; bindings are
    /// trailed, the caller unwinds on failure.
    pub fn type_unify(&mut self, a: TyId, b: TyId) -> bool {
        let a = self.ty_deref(a);
        let b = self.ty_deref(b);
        if a == b {
            return true;
        }
        match (self.ty_node(a).clone(), self.ty_node(b).clone()) {
            (TyNode::Var { .. }, _) => {
                if self.ty_occurs(a, b) {
                    false
                } else {
                    self.ty_bind(a, b);
                    true
                }
            }
            (_, TyNode::Var { .. }) => {
                if self.ty_occurs(b, a) {
                    false
                } else {
                    self.ty_bind(b, a);
                    true
                }
            }
            (TyNode::Sort(c1), TyNode::Sort(c2)) => c1 == c2,
            (
                TyNode::App {
                    con: c1,
                    args: args1,
                },
                TyNode::App {
                    con: c2,
                    args: args2,
                },
            ) => {
                c1 == c2
                    && args1.len() == args2.len()
                    && args1
                        .iter()
                        .zip(args2.iter())
                        .all(|(x, y)| self.type_unify(*x, *y))
            }
            _ => false,
        }
    }

    /// Copies `t`, replacing each variable appearing in `map` by its
    /// image. Variables not in the map are kept as is.
    pub fn ty_copy(&mut self, t: TyId, map: &[(TyId, TyId)]) -> TyId {
        let t = self.ty_deref(t);
        if let Some((_, img)) = map.iter().find(|(from, _)| *from == t) {
            return *img;
        }
        match self.ty_node(t).clone() {
            TyNode::Var { .. } | TyNode::Sort(_) => t,
            TyNode::App { con, args } => {
                let new_args: Vec<TyId> = args.iter().map(|a| self.ty_copy(*a, map)).collect();
                if new_args.iter().zip(args.iter()).all(|(x, y)| x == y) {
                    t
                } else {
                    self.mk_tyapp(con, new_args)
                }
            }
        }
    }

    /// Free (unbound) variables of `t` in first-occurrence order.
    pub fn ty_free_vars(&self, t: TyId, acc: &mut Vec<TyId>) {
        let t = self.ty_deref(t);
        match self.ty_node(t) {
            TyNode::Var { .. } => {
                if !acc.contains(&t) {
                    acc.push(t);
                }
            }
            TyNode::Sort(_) => {}
            TyNode::App { args, .. } => {
                for a in args.iter() {
                    self.ty_free_vars(*a, acc);
                }
            }
        }
    }

    /// Does the variable `v` occur (free) in `t`?
    pub fn ty_mentions(&self, t: TyId, v: TyId) -> bool {
        self.ty_occurs(self.ty_deref(v), t)
    }
}

/// Decomposes a (dereferenced) arrow type into argument types and target.
pub fn arrow_parts(st: &Store, arrow: TyConId, mut t: TyId) -> (Vec<TyId>, TyId) {
    let mut args = Vec::new();
    loop {
        t = st.ty_deref(t);
        match st.ty_node(t) {
            TyNode::App { con, args: a } if *con == arrow && a.len() == 2 => {
                args.push(a[0]);
                t = a[1];
            }
            _ => return (args, t),
        }
    }
}
