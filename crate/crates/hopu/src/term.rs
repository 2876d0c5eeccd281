//! The term graph: suspension-calculus terms with logic variables,
//! destructive binding and a trail for exact state restoration.
//!
//! Terms live in an arena and are referenced by [`TermId`]. Every
//! destructive update goes through [`Store::overwrite`] or
//! [`Store::bind`], both of which record the previous cell contents on
//! the trail so that [`Store::undo_to`] can restore any earlier state
//! bit for bit.

use std::fmt;
use std::rc::Rc;

use crate::ty::{TyId, TyNode};

/// Reference to a term node in the arena.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermId(pub u32);

impl fmt::Debug for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// Interned constant symbol. Distinct generic constants introduced by
/// universal goals get distinct symbols even when their display names
/// collide.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SymId(pub u32);

/// One entry of a suspension environment: either a dummy for an
/// abstraction that persists, or a binding produced by a beta-contraction.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvItem {
    Dum(u32),
    Bind(TermId, u32),
}

/// Immutable cons-list environment with O(1) length.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<EnvCell>>);

pub struct EnvCell {
    item: EnvItem,
    rest: Env,
    len: u32,
}

impl Env {
    pub fn nil() -> Env {
        Env(None)
    }

    pub fn cons(item: EnvItem, rest: &Env) -> Env {
        let len = rest.len() + 1;
        Env(Some(Rc::new(EnvCell {
            item,
            rest: rest.clone(),
            len,
        })))
    }

    pub fn len(&self) -> u32 {
        self.0.as_ref().map_or(0, |c| c.len)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    /// 1-based indexing; panics if out of range.
    pub fn get(&self, i: u32) -> &EnvItem {
        debug_assert!(i >= 1);
        let mut cur = self;
        let mut i = i;
        loop {
            let cell = cur.0.as_ref().expect("environment index out of range");
            if i == 1 {
                return &cell.item;
            }
            i -= 1;
            cur = &cell.rest;
        }
    }

    pub fn iter(&self) -> EnvIter<'_> {
        EnvIter(self)
    }
}

pub struct EnvIter<'a>(&'a Env);

impl<'a> Iterator for EnvIter<'a> {
    type Item = &'a EnvItem;
    fn next(&mut self) -> Option<&'a EnvItem> {
        match self.0 .0.as_ref() {
            None => None,
            Some(cell) => {
                self.0 = &cell.rest;
                Some(&cell.item)
            }
        }
    }
}

impl PartialEq for Env {
    fn eq(&self, other: &Env) -> bool {
        if self.len() != other.len() {
            return false;
        }
        self.iter().zip(other.iter()).all(|(a, b)| a == b)
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

/// A term-graph node.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// A constant with a universe tag and (possibly empty) runtime type
    /// annotations.
    Const {
        sym: SymId,
        univ: u32,
        anns: Rc<[TyId]>,
    },
    /// A logic variable; `bind` is set destructively and only unset by
    /// trail unwinding.
    Var {
        bind: Option<TermId>,
        univ: u32,
        id: u32,
    },
    /// De Bruijn index (>= 1).
    Db(u32),
    /// Application with a flattened argument vector; `head` is never an
    /// `App` when constructed through [`Store::mk_app`].
    App { head: TermId, args: Rc<[TermId]> },
    /// Consolidated abstraction: `n` binders over `body`.
    Abs { n: u32, body: TermId },
    /// Suspension `[body, ol, nl, env]` with `env.len() == ol`.
    Susp {
        body: TermId,
        ol: u32,
        nl: u32,
        env: Env,
    },
    /// Indirection cell used for shared destructive rewriting.
    Ref(TermId),
}

/// One undo record: the previous contents of a mutated cell.
#[derive(Debug)]
pub enum TrailEntry {
    Term(TermId, Node),
    Type(TyId, TyNode),
}

/// A trail height; `undo_to` restores everything recorded above it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TrailMark(pub usize);

/// Information recorded per constant symbol.
#[derive(Clone, Debug)]
pub struct SymInfo {
    pub name: String,
    pub univ: u32,
}

/// The term arena plus the type arena and the shared trail.
pub struct Store {
    pub(crate) terms: Vec<Node>,
    pub(crate) types: Vec<TyNode>,
    trail: Vec<TrailEntry>,
    syms: Vec<SymInfo>,
    next_var: u32,
    next_tyvar: u32,
    trailing: bool,
    /// Counts destructive rewrites of term cells; used by tests that
    /// check sharing and laziness.
    pub rewrite_count: u64,
}

impl Store {
    pub fn new() -> Store {
        Store {
            terms: Vec::new(),
            types: Vec::new(),
            trail: Vec::new(),
            syms: Vec::new(),
            next_var: 0,
            next_tyvar: 0,
            trailing: true,
            rewrite_count: 0,
        }
    }

    /// Turns trail recording on or off, returning the previous setting.
    /// Mutations made while recording is off are permanent: loading and
    /// query preparation use this, solving never does.
    pub fn set_trailing(&mut self, on: bool) -> bool {
        std::mem::replace(&mut self.trailing, on)
    }

    // ---- symbols ----

    pub fn intern_sym(&mut self, name: &str, univ: u32) -> SymId {
        let id = SymId(self.syms.len() as u32);
        self.syms.push(SymInfo {
            name: name.to_string(),
            univ,
        });
        id
    }

    pub fn sym_name(&self, s: SymId) -> &str {
        &self.syms[s.0 as usize].name
    }

    pub fn sym_univ(&self, s: SymId) -> u32 {
        self.syms[s.0 as usize].univ
    }

    pub(crate) fn next_tyvar_id(&mut self) -> u32 {
        let id = self.next_tyvar;
        self.next_tyvar += 1;
        id
    }

    // ---- node construction ----

    pub fn alloc(&mut self, n: Node) -> TermId {
        let id = TermId(self.terms.len() as u32);
        self.terms.push(n);
        id
    }

    pub fn node(&self, t: TermId) -> &Node {
        &self.terms[t.0 as usize]
    }

    pub fn mk_const(&mut self, sym: SymId, univ: u32, anns: Vec<TyId>) -> TermId {
        self.alloc(Node::Const {
            sym,
            univ,
            anns: anns.into(),
        })
    }

    pub fn fresh_var(&mut self, univ: u32) -> TermId {
        let id = self.next_var;
        self.next_var += 1;
        self.alloc(Node::Var {
            bind: None,
            univ,
            id,
        })
    }

    pub fn mk_db(&mut self, i: u32) -> TermId {
        debug_assert!(i >= 1);
        self.alloc(Node::Db(i))
    }

    /// Builds an application, flattening a nested application head and
    /// dropping the node entirely when `args` is empty.
    pub fn mk_app(&mut self, head: TermId, args: Vec<TermId>) -> TermId {
        if args.is_empty() {
            return head;
        }
        if let Node::App { head: h2, args: a2 } = self.node(head) {
            let h2 = *h2;
            let mut all: Vec<TermId> = a2.to_vec();
            all.extend(args);
            return self.alloc(Node::App {
                head: h2,
                args: all.into(),
            });
        }
        self.alloc(Node::App {
            head,
            args: args.into(),
        })
    }

    /// Builds an abstraction, consolidating an immediately nested one.
    pub fn mk_abs(&mut self, n: u32, body: TermId) -> TermId {
        if n == 0 {
            return body;
        }
        if let Node::Abs { n: n2, body: b2 } = self.node(body) {
            let (n2, b2) = (*n2, *b2);
            return self.alloc(Node::Abs {
                n: n + n2,
                body: b2,
            });
        }
        self.alloc(Node::Abs { n, body })
    }

    pub fn mk_susp(&mut self, body: TermId, ol: u32, nl: u32, env: Env) -> TermId {
        debug_assert_eq!(env.len(), ol, "environment length must equal ol");
        #[cfg(debug_assertions)]
        for item in env.iter() {
            match item {
                EnvItem::Dum(l) => debug_assert!(*l < nl, "ill-formed suspension: dum level"),
                EnvItem::Bind(_, l) => debug_assert!(*l <= nl, "ill-formed suspension: bind level"),
            }
        }
        self.alloc(Node::Susp { body, ol, nl, env })
    }

    // ---- dereferencing and destructive update ----

    /// Follows `Ref` chains and bound variables to the first
    /// representative node. Does not mutate.
    pub fn deref(&self, t: TermId) -> TermId {
        let mut cur = t;
        let mut guard = 0u32;
        loop {
            match self.node(cur) {
                Node::Ref(t2) => cur = *t2,
                Node::Var { bind: Some(t2), .. } => cur = *t2,
                _ => return cur,
            }
            guard += 1;
            assert!(
                guard < 1_000_000,
                "internal corruption: cyclic reference chain"
            );
        }
    }

    /// Replaces the contents of `t` (after following `Ref` chains, so a
    /// shared cell is rewritten once) with an indirection to `val`,
    /// recording the old contents on the trail.
    pub fn assign(&mut self, t: TermId, val: TermId) {
        let mut cur = t;
        while let Node::Ref(t2) = self.node(cur) {
            cur = *t2;
        }
        if cur == val {
            return;
        }
        if self.trailing {
            let old = self.terms[cur.0 as usize].clone();
            self.trail.push(TrailEntry::Term(cur, old));
        }
        self.terms[cur.0 as usize] = Node::Ref(val);
        self.rewrite_count += 1;
    }

    /// Overwrites a term cell with arbitrary new contents (trailed).
    pub fn overwrite(&mut self, t: TermId, new: Node) {
        if self.trailing {
            let old = self.terms[t.0 as usize].clone();
            self.trail.push(TrailEntry::Term(t, old));
        }
        self.terms[t.0 as usize] = new;
        self.rewrite_count += 1;
    }

    pub(crate) fn overwrite_type(&mut self, t: TyId, new: TyNode) {
        if self.trailing {
            let old = self.types[t.0 as usize].clone();
            self.trail.push(TrailEntry::Type(t, old));
        }
        self.types[t.0 as usize] = new;
    }

    /// Binds the logic variable `x` to `t`. `x` must be unbound.
    ///
    /// Binding also lowers the universe of every unbound variable
    /// reachable in `t` to at most `univ(x)`: this is the labeling
    /// induced by a substitution, and it is what makes later scope
    /// checks against those variables sound.
    pub fn bind(&mut self, x: TermId, t: TermId) {
        let xr = self.deref(x);
        let (univ, id) = match self.node(xr) {
            Node::Var {
                bind: None,
                univ,
                id,
            } => (*univ, *id),
            _ => panic!("bind: not an unbound logic variable"),
        };
        self.lower_universes(t, univ, xr);
        self.overwrite(
            xr,
            Node::Var {
                bind: Some(t),
                univ,
                id,
            },
        );
    }

    /// Binding for callers that have already established the induced
    /// labeling of the bound term (the unifier constructs its bindings
    /// that way); skips the relabeling scan.
    pub(crate) fn bind_noscan(&mut self, x: TermId, t: TermId) {
        let xr = self.deref(x);
        let (univ, id) = match self.node(xr) {
            Node::Var {
                bind: None,
                univ,
                id,
            } => (*univ, *id),
            _ => panic!("bind: not an unbound logic variable"),
        };
        self.overwrite(
            xr,
            Node::Var {
                bind: Some(t),
                univ,
                id,
            },
        );
    }

    /// Frees arena space above the given sizes. Callers must first have
    /// unwound the trail to a state in which no live node refers above
    /// the cut (the solver does this when a query's stream is done).
    pub fn truncate_arenas(&mut self, terms: usize, types: usize) {
        debug_assert!(terms <= self.terms.len() && types <= self.types.len());
        self.terms.truncate(terms);
        self.types.truncate(types);
    }

    pub fn arena_sizes(&self) -> (usize, usize) {
        (self.terms.len(), self.types.len())
    }

    fn lower_universes(&mut self, t: TermId, cap: u32, binder: TermId) {
        let mut stack = vec![t];
        let mut seen = std::collections::HashSet::new();
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur) {
                continue;
            }
            match self.node(cur).clone() {
                Node::Ref(t2) => stack.push(t2),
                Node::Var { bind, univ, id } => {
                    assert!(cur != binder, "internal error: occurs violation in bind");
                    match bind {
                        Some(t2) => stack.push(t2),
                        None => {
                            if univ > cap {
                                self.overwrite(
                                    cur,
                                    Node::Var {
                                        bind: None,
                                        univ: cap,
                                        id,
                                    },
                                );
                            }
                        }
                    }
                }
                Node::App { head, args } => {
                    stack.push(head);
                    stack.extend(args.iter().copied());
                }
                Node::Abs { body, .. } => stack.push(body),
                Node::Susp { body, env, .. } => {
                    stack.push(body);
                    for item in env.iter() {
                        if let EnvItem::Bind(s, _) = item {
                            stack.push(*s);
                        }
                    }
                }
                Node::Const { .. } | Node::Db(_) => {}
            }
        }
    }

    // ---- trail ----

    pub fn mark(&self) -> TrailMark {
        TrailMark(self.trail.len())
    }

    /// Restores every cell mutated since `mark` and truncates the trail.
    pub fn undo_to(&mut self, mark: TrailMark) {
        assert!(mark.0 <= self.trail.len(), "undo_to: mark above trail top");
        while self.trail.len() > mark.0 {
            match self.trail.pop().unwrap() {
                TrailEntry::Term(t, old) => self.terms[t.0 as usize] = old,
                TrailEntry::Type(t, old) => self.types[t.0 as usize] = old,
            }
        }
    }

    // ---- snapshots (used by tests and the backtracking-integrity check) ----

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            terms: self.terms.clone(),
            types: self.types.clone(),
            trail_len: self.trail.len(),
        }
    }

    /// Structural equality of all nodes that existed when the snapshot
    /// was taken. Nodes allocated afterwards are garbage and ignored.
    pub fn agrees_with(&self, snap: &Snapshot) -> bool {
        self.trail.len() == snap.trail_len
            && self.terms[..snap.terms.len()] == snap.terms[..]
            && self.types[..snap.types.len()] == snap.types[..]
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    // ---- debug validation ----

    /// Walks the graph below `t` checking suspension well-formedness and
    /// acyclicity; shared nodes are visited once, nodes still on the
    /// walk stack signal a cycle. Debug builds only.
    #[cfg(debug_assertions)]
    pub fn validate(&self, t: TermId) {
        // false = on the current path, true = fully checked
        let mut state: std::collections::HashMap<TermId, bool> = std::collections::HashMap::new();
        self.validate_node(t, &mut state);
    }

    #[cfg(debug_assertions)]
    fn validate_node(&self, t: TermId, state: &mut std::collections::HashMap<TermId, bool>) {
        match state.get(&t) {
            Some(true) => return,
            Some(false) => panic!("term graph contains a cycle at {:?}", t),
            None => {}
        }
        state.insert(t, false);
        match self.node(t) {
            Node::Ref(t2) => self.validate_node(*t2, state),
            Node::Var { bind: Some(b), .. } => self.validate_node(*b, state),
            Node::Var { bind: None, .. } | Node::Const { .. } | Node::Db(_) => {}
            Node::App { head, args } => {
                self.validate_node(*head, state);
                for a in args.iter() {
                    self.validate_node(*a, state);
                }
            }
            Node::Abs { body, .. } => self.validate_node(*body, state),
            Node::Susp { body, ol, nl, env } => {
                assert_eq!(env.len(), *ol, "suspension env length != ol");
                for item in env.iter() {
                    match item {
                        EnvItem::Dum(l) => assert!(l < nl, "dum level not below nl"),
                        EnvItem::Bind(s, l) => {
                            assert!(l <= nl, "bind level above nl");
                            self.validate_node(*s, state);
                        }
                    }
                }
                self.validate_node(*body, state);
            }
        }
        state.insert(t, true);
    }
}

impl Default for Store {
    fn default() -> Store {
        Store::new()
    }
}

/// A deep structural snapshot of the arenas.
pub struct Snapshot {
    terms: Vec<Node>,
    types: Vec<TyNode>,
    trail_len: usize,
}
