//! Higher-order pattern unification with universe-level scoping.
//!
//! A disagreement pair is processed by head-normalizing both sides,
//! equalizing binder lengths with the eta rule, and then either
//! decomposing rigid-rigid pairs (unifying constant type annotations on
//! the way) or computing a binding for a flexible side. Pairs whose
//! flexible side falls outside the pattern fragment are deferred to the
//! residual list and re-examined whenever new bindings accrue.

use std::collections::VecDeque;

use crate::normalize::{eta_adjust, head_norm, HeadNormView};
use crate::term::{Node, Store, SymId, TermId};

/// Why unification failed. All variants abort the current resolution
/// step; the caller unwinds the trail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnifyFail {
    /// Rigid-rigid head clash (distinct constants or indexes, or an
    /// out-of-scope constant, or unequal argument counts).
    Clash,
    /// The variable being solved for occurs rigidly in the other side.
    OccursCheck,
    /// Type annotations of two occurrences of a constant do not unify.
    TypeClash,
}

enum BndErr {
    Fail(UnifyFail),
    /// A flexible (sub)term violates the pattern restriction; the whole
    /// pair is deferred.
    NonPattern,
}

/// Disagreement pairs deferred as outside the pattern fragment, plus a
/// dirty flag raised whenever any logic variable gets bound.
#[derive(Default)]
pub struct Residuals {
    pub pairs: Vec<(TermId, TermId)>,
    pub dirty: bool,
}

impl Residuals {
    pub fn snapshot(&self) -> (Vec<(TermId, TermId)>, bool) {
        (self.pairs.clone(), self.dirty)
    }

    pub fn restore(&mut self, snap: (Vec<(TermId, TermId)>, bool)) {
        self.pairs = snap.0;
        self.dirty = snap.1;
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct UnifyOutcome {
    /// At least one variable (term or type) was bound.
    pub bound: bool,
    /// Number of pairs newly deferred to the residual list.
    pub deferred: usize,
}

/// An argument of a flexible term, reduced to atomic form.
#[derive(Clone, Copy, Debug)]
pub struct Atom {
    pub term: TermId,
    pub val: AtomVal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomVal {
    /// Constant (symbol identity decides equality) with its universe.
    C(SymId, u32),
    /// De Bruijn index.
    I(u32),
}

/// Reduces `t` to an atom if its normal form is a bare constant or
/// de Bruijn index.
fn classify_atom(st: &mut Store, t: TermId) -> Option<Atom> {
    let v = head_norm(st, t);
    if v.binder != 0 || !v.args.is_empty() {
        return None;
    }
    match st.node(v.head) {
        Node::Const { sym, univ, .. } => Some(Atom {
            term: v.head,
            val: AtomVal::C(*sym, *univ),
        }),
        Node::Db(i) => Some(Atom {
            term: v.head,
            val: AtomVal::I(*i),
        }),
        _ => None,
    }
}

/// The pattern condition: every argument is a de Bruijn index or a
/// constant with universe strictly greater than the head variable's,
/// and all arguments are pairwise distinct.
pub fn check_llambda(st: &mut Store, head_univ: u32, args: &[TermId]) -> Option<Vec<Atom>> {
    let mut atoms = Vec::with_capacity(args.len());
    for &a in args {
        let atom = classify_atom(st, a)?;
        if let AtomVal::C(_, u) = atom.val {
            if u <= head_univ {
                return None;
            }
        }
        if atoms.iter().any(|b: &Atom| b.val == atom.val) {
            return None;
        }
        atoms.push(atom);
    }
    Some(atoms)
}

/// For each element of `zl` (all of which must occur in `al`), the
/// de Bruijn index referencing its position in `al` counted from the
/// right: position `i` in a list of length `n` maps to `#(n - i + 1)`.
pub fn select_down(zl: &[Atom], al: &[Atom]) -> Vec<u32> {
    let n = al.len() as u32;
    zl.iter()
        .map(|z| {
            let p = al
                .iter()
                .position(|a| a.val == z.val)
                .expect("select_down: element not in target list") as u32;
            n - (p + 1) + 1
        })
        .collect()
}

/// The constants of `al` whose universe is at most `univ`, in `al`
/// order. Indexes are never included.
pub fn raise_up(al: &[Atom], univ: u32) -> Vec<Atom> {
    al.iter()
        .filter(|a| matches!(a.val, AtomVal::C(_, u) if u <= univ))
        .copied()
        .collect()
}

pub struct Unifier<'a> {
    pub st: &'a mut Store,
    pub res: &'a mut Residuals,
    pub trace: bool,
    /// Binds a bare variable to an unexamined term directly, skipping
    /// the occurs check and the scope traversal. Sound only when the
    /// variable is known fresh (a first occurrence); off by default.
    pub fast_bind: bool,
    bound: bool,
    deferred: usize,
    /// Per-binding-computation memo: a shared subterm met twice at the
    /// same depth maps to the same fragment, keeping the traversal
    /// linear in the graph rather than the unfolded tree.
    bnd_memo: std::collections::HashMap<(TermId, u32), TermId>,
}

impl<'a> Unifier<'a> {
    pub fn new(st: &'a mut Store, res: &'a mut Residuals) -> Unifier<'a> {
        Unifier {
            st,
            res,
            trace: false,
            fast_bind: false,
            bound: false,
            deferred: 0,
            bnd_memo: std::collections::HashMap::new(),
        }
    }

    fn bind(&mut self, x: TermId, t: TermId) {
        if self.trace {
            eprintln!("[unify] bind {:?} := {:?}", x, t);
        }
        // bindings built by mksubst/bnd already carry the induced
        // labeling, so the kernel's relabeling scan is unnecessary
        self.st.bind_noscan(x, t);
        #[cfg(debug_assertions)]
        self.st.validate(t);
        self.bound = true;
        self.res.dirty = true;
    }

    /// Solves every pair in `pairs`, deferring non-pattern pairs.
    pub fn unify_pairs(
        &mut self,
        pairs: impl IntoIterator<Item = (TermId, TermId)>,
    ) -> Result<UnifyOutcome, UnifyFail> {
        let mut work: VecDeque<(TermId, TermId)> = pairs.into_iter().collect();
        while let Some((t, s)) = work.pop_front() {
            self.solve_pair(t, s, &mut work)?;
        }
        Ok(UnifyOutcome {
            bound: self.bound,
            deferred: self.deferred,
        })
    }

    fn defer(&mut self, t: TermId, s: TermId) {
        if self.trace {
            eprintln!("[unify] defer {:?} = {:?}", t, s);
        }
        self.res.pairs.push((t, s));
        self.deferred += 1;
    }

    fn solve_pair(
        &mut self,
        t: TermId,
        s: TermId,
        work: &mut VecDeque<(TermId, TermId)>,
    ) -> Result<(), UnifyFail> {
        if self.trace {
            eprintln!("[unify] pair {:?} = {:?}", t, s);
        }
        let mut vt = head_norm(self.st, t);
        let mut vs = head_norm(self.st, s);
        if vt.binder < vs.binder {
            vt = eta_adjust(self.st, &vt, vs.binder - vt.binder);
        } else if vs.binder < vt.binder {
            vs = eta_adjust(self.st, &vs, vt.binder - vs.binder);
        }
        // The equalized binders are common context from here on; strip
        // them (indexes referring to them behave like scoped constants).
        vt.binder = 0;
        vs.binder = 0;

        let lhs_flex = matches!(self.st.node(vt.head), Node::Var { bind: None, .. });
        let rhs_flex = matches!(self.st.node(vs.head), Node::Var { bind: None, .. });

        match (lhs_flex, rhs_flex) {
            (false, false) => self.rigid_rigid(&vt, &vs, work),
            _ => {
                if vt.head == vs.head && vt.args.is_empty() && vs.args.is_empty() {
                    return Ok(()); // identical variables
                }
                let mark = self.st.mark();
                if lhs_flex {
                    match self.try_mksubst(&vt, &vs) {
                        Ok(()) => return Ok(()),
                        Err(BndErr::Fail(f)) => return Err(f),
                        Err(BndErr::NonPattern) => self.st.undo_to(mark),
                    }
                }
                if rhs_flex {
                    match self.try_mksubst(&vs, &vt) {
                        Ok(()) => return Ok(()),
                        Err(BndErr::Fail(f)) => return Err(f),
                        Err(BndErr::NonPattern) => self.st.undo_to(mark),
                    }
                }
                // store the pair flexible side first
                if lhs_flex {
                    self.defer(t, s);
                } else {
                    self.defer(s, t);
                }
                Ok(())
            }
        }
    }

    fn rigid_rigid(
        &mut self,
        vt: &HeadNormView,
        vs: &HeadNormView,
        work: &mut VecDeque<(TermId, TermId)>,
    ) -> Result<(), UnifyFail> {
        match (self.st.node(vt.head).clone(), self.st.node(vs.head).clone()) {
            (Node::Db(i), Node::Db(j)) => {
                if i != j || vt.args.len() != vs.args.len() {
                    return Err(UnifyFail::Clash);
                }
            }
            (
                Node::Const {
                    sym: c1,
                    anns: anns1,
                    ..
                },
                Node::Const {
                    sym: c2,
                    anns: anns2,
                    ..
                },
            ) => {
                if c1 != c2 || vt.args.len() != vs.args.len() {
                    return Err(UnifyFail::Clash);
                }
                // A pair of bare constants of equal type needs no type
                // unification; otherwise the annotation vectors (the
                // instantiations of the skeleton's argument-only type
                // variables) are unified by first-order unification.
                if !vt.args.is_empty() && !anns1.is_empty() {
                    debug_assert_eq!(anns1.len(), anns2.len());
                    for (a, b) in anns1.iter().zip(anns2.iter()) {
                        if !self.st.type_unify(*a, *b) {
                            return Err(UnifyFail::TypeClash);
                        }
                    }
                    self.bound = true;
                    self.res.dirty = true;
                }
            }
            _ => return Err(UnifyFail::Clash),
        }
        for (a, b) in vt.args.iter().zip(vs.args.iter()) {
            work.push_back((*a, *b));
        }
        Ok(())
    }

    /// Attempts rule (5): the flexible side `vf` must satisfy the
    /// pattern condition, after which a most general binding for its
    /// head is computed against `vo`.
    fn try_mksubst(&mut self, vf: &HeadNormView, vo: &HeadNormView) -> Result<(), BndErr> {
        let x = vf.head;
        let xuniv = match self.st.node(x) {
            Node::Var {
                bind: None, univ, ..
            } => *univ,
            _ => return Err(BndErr::NonPattern),
        };
        if self.fast_bind
            && vf.args.is_empty()
            && vf.binder == 0
            && vo.binder == 0
            && self.st.deref(vo.head) != x
            && matches!(self.st.node(vo.head), Node::Const { univ, .. } if *univ <= xuniv)
        {
            self.bind(x, vo.source);
            return Ok(());
        }
        let xatoms = match check_llambda(self.st, xuniv, &vf.args) {
            Some(a) => a,
            None => return Err(BndErr::NonPattern),
        };
        self.mksubst_view(x, xuniv, &xatoms, vo)
    }

    /// Top-level control for calculating variable bindings. `vo` is the
    /// other term of the pair, already head-normalized and with binders
    /// equalized away.
    fn mksubst_view(
        &mut self,
        x: TermId,
        xuniv: u32,
        args: &[Atom],
        vo: &HeadNormView,
    ) -> Result<(), BndErr> {
        let n = args.len() as u32;
        if self.st.deref(vo.head) == x {
            // Same variable on both sides: keep exactly the argument
            // positions on which the two lists agree.
            let batoms = match check_llambda(self.st, xuniv, &vo.args) {
                Some(b) => b,
                None => return Err(BndErr::NonPattern),
            };
            if batoms.len() != args.len() {
                return Err(BndErr::NonPattern);
            }
            if batoms.iter().zip(args.iter()).all(|(b, a)| b.val == a.val) {
                return Ok(()); // no constraint
            }
            let h = self.st.fresh_var(xuniv);
            let mut ws = Vec::new();
            for (i, (a, b)) in args.iter().zip(batoms.iter()).enumerate() {
                if a.val == b.val {
                    let idx = n - (i as u32 + 1) + 1;
                    let db = self.st.mk_db(idx);
                    ws.push(db);
                }
            }
            let body = self.st.mk_app(h, ws);
            let binding = self.st.mk_abs(n, body);
            self.bind(x, binding);
            return Ok(());
        }
        // the top-level view may have had its binder equalized away, so
        // its source node must not be reused as-is
        self.bnd_memo.clear();
        let s = self.bnd_view(x, xuniv, args, vo, 0, false)?;
        let binding = self.st.mk_abs(n, s);
        self.bind(x, binding);
        Ok(())
    }

    /// One recursive pass over the rigid term computing the body of the
    /// binding for `x`; side bindings for flexible subterms happen along
    /// the way. `l` is the abstraction depth entered so far. Subterms
    /// that come through unchanged are shared, not rebuilt.
    fn bnd_view(
        &mut self,
        x: TermId,
        xuniv: u32,
        args: &[Atom],
        v: &HeadNormView,
        l: u32,
        source_ok: bool,
    ) -> Result<TermId, BndErr> {
        let l2 = l + v.binder;
        let head_node = self.st.node(v.head).clone();
        let new_head = match head_node {
            Node::Const { sym, univ, .. } => {
                if univ <= xuniv {
                    v.head // copied as is, annotations shared
                } else {
                    self.project(args, l2, AtomVal::C(sym, univ))?
                }
            }
            Node::Db(i) => {
                if i <= l2 {
                    v.head
                } else {
                    self.project(args, l2, AtomVal::I(i))?
                }
            }
            Node::Var {
                bind: None,
                univ: yuniv,
                ..
            } => {
                let y = v.head;
                if y == x {
                    return Err(BndErr::Fail(UnifyFail::OccursCheck));
                }
                let frag = self.bnd_flexible(x, xuniv, args, y, yuniv, &v.args, l2)?;
                if source_ok && frag == v.head && v.args.is_empty() {
                    return Ok(v.source);
                }
                return Ok(self.st.mk_abs(v.binder, frag));
            }
            other => panic!("bnd: non-atomic head {:?}", other),
        };
        // fold the binding calculation over the argument list
        let mut changed = new_head != v.head;
        let mut new_args = Vec::with_capacity(v.args.len());
        for &a in &v.args {
            let sa = match self.bnd_memo.get(&(a, l2)) {
                Some(r) => *r,
                None => {
                    let va = head_norm(self.st, a);
                    let r = self.bnd_view(x, xuniv, args, &va, l2, true)?;
                    self.bnd_memo.insert((a, l2), r);
                    r
                }
            };
            changed |= sa != a;
            new_args.push(sa);
        }
        if source_ok && !changed {
            return Ok(v.source);
        }
        let app = self.st.mk_app(new_head, new_args);
        Ok(self.st.mk_abs(v.binder, app))
    }

    /// Maps a rigid head that cannot be copied through the shifted
    /// argument list `[a1', ..., an', #l, ..., #1]`.
    fn project(&mut self, args: &[Atom], l: u32, val: AtomVal) -> Result<TermId, BndErr> {
        let val = match val {
            // an index above l refers outside the traversed binders;
            // compare against the unshifted argument atoms
            AtomVal::I(i) => AtomVal::I(i - l),
            c => c,
        };
        match args.iter().position(|a| a.val == val) {
            Some(p) => {
                let n = args.len() as u32 + l;
                let idx = n - (p as u32 + 1) + 1;
                Ok(self.st.mk_db(idx))
            }
            None => Err(BndErr::Fail(UnifyFail::Clash)),
        }
    }

    /// The two flexible-flexible rules with raising and pruning. Binds
    /// `y` as a side effect and returns the fragment that stands in the
    /// binding of `x`.
    #[allow(clippy::too_many_arguments)]
    fn bnd_flexible(
        &mut self,
        x: TermId,
        xuniv: u32,
        args: &[Atom],
        y: TermId,
        yuniv: u32,
        yargs: &[TermId],
        l: u32,
    ) -> Result<TermId, BndErr> {
        debug_assert_ne!(x, y, "occurs case handled by the caller");
        // A bare variable that is already sufficiently scoped passes
        // through; one whose scope is too wide and has nothing to be
        // raised over is narrowed in place. Both avoid a fresh variable
        // whose only role would be to rename this one.
        if yargs.is_empty() {
            if yuniv <= xuniv {
                return Ok(y);
            }
            let raisable = args
                .iter()
                .any(|a| matches!(a.val, AtomVal::C(_, u) if u <= yuniv));
            if !raisable {
                let node = self.st.node(y).clone();
                if let Node::Var { bind: None, id, .. } = node {
                    self.st.overwrite(
                        y,
                        Node::Var {
                            bind: None,
                            univ: xuniv,
                            id,
                        },
                    );
                }
                return Ok(y);
            }
        }
        let batoms = match check_llambda(self.st, yuniv, yargs) {
            Some(b) => b,
            None => return Err(BndErr::NonPattern),
        };
        let m = batoms.len() as u32;
        // al = [shift(a1,l), ..., shift(an,l), #l, ..., #1]
        let mut als: Vec<Atom> = Vec::with_capacity(args.len() + l as usize);
        for a in args {
            als.push(self.shift_atom(*a, l));
        }
        for i in (1..=l).rev() {
            let db = self.st.mk_db(i);
            als.push(Atom {
                term: db,
                val: AtomVal::I(i),
            });
        }
        // common elements of the two argument lists, in al order
        let zl: Vec<Atom> = als
            .iter()
            .filter(|a| batoms.iter().any(|b| b.val == a.val))
            .copied()
            .collect();
        // the binding of y immediately lowers the fresh variable to the
        // smaller of the two universes (the induced labeling)
        let h = self.st.fresh_var(xuniv.min(yuniv));
        if xuniv < yuniv {
            // raise y over the constants it may legally depend on
            let cs = raise_up(&als, yuniv);
            let ws = select_down(&cs, &als);
            let us = select_down(&zl, &batoms);
            let vs = select_down(&zl, &als);
            let mut yb_args: Vec<TermId> = cs.iter().map(|c| c.term).collect();
            for i in us {
                let db = self.st.mk_db(i);
                yb_args.push(db);
            }
            let yb_body = self.st.mk_app(h, yb_args);
            let yb = self.st.mk_abs(m, yb_body);
            self.bind(y, yb);
            let mut xs_args: Vec<TermId> = Vec::new();
            for i in ws.into_iter().chain(vs) {
                let db = self.st.mk_db(i);
                xs_args.push(db);
            }
            Ok(self.st.mk_app(h, xs_args))
        } else {
            let cs = raise_up(&batoms, xuniv);
            let ws = select_down(&cs, &batoms);
            let vs = select_down(&zl, &batoms);
            let us = select_down(&zl, &als);
            let mut yb_args: Vec<TermId> = Vec::new();
            for i in ws.into_iter().chain(vs) {
                let db = self.st.mk_db(i);
                yb_args.push(db);
            }
            let yb_body = self.st.mk_app(h, yb_args);
            let yb = self.st.mk_abs(m, yb_body);
            self.bind(y, yb);
            let mut xs_args: Vec<TermId> = cs.iter().map(|c| c.term).collect();
            for i in us {
                let db = self.st.mk_db(i);
                xs_args.push(db);
            }
            Ok(self.st.mk_app(h, xs_args))
        }
    }

    fn shift_atom(&mut self, a: Atom, l: u32) -> Atom {
        match a.val {
            AtomVal::C(..) => a,
            AtomVal::I(i) => {
                let t = self.st.mk_db(i + l);
                Atom {
                    term: t,
                    val: AtomVal::I(i + l),
                }
            }
        }
    }
}

/// Convenience entry point: unifies a list of pairs against a store and
/// residual set.
pub fn unify_pairs(
    st: &mut Store,
    res: &mut Residuals,
    pairs: Vec<(TermId, TermId)>,
) -> Result<UnifyOutcome, UnifyFail> {
    Unifier::new(st, res).unify_pairs(pairs)
}

/// Public form of the binding calculation: computes and installs a most
/// general binding for `x` applied to `args` against the term `t`.
/// `Ok(false)` means the problem is outside the pattern fragment.
pub fn mksubst(
    st: &mut Store,
    res: &mut Residuals,
    x: TermId,
    t: TermId,
    args: &[TermId],
) -> Result<bool, UnifyFail> {
    let xd = st.deref(x);
    let xuniv = match st.node(xd) {
        Node::Var {
            bind: None, univ, ..
        } => *univ,
        _ => panic!("mksubst: head must be an unbound variable"),
    };
    let xatoms = match check_llambda(st, xuniv, args) {
        Some(a) => a,
        None => return Ok(false),
    };
    let vo = head_norm(st, t);
    let mut u = Unifier::new(st, res);
    match u.mksubst_view(xd, xuniv, &xatoms, &vo) {
        Ok(()) => Ok(true),
        Err(BndErr::NonPattern) => Ok(false),
        Err(BndErr::Fail(f)) => Err(f),
    }
}

/// Re-runs unification over the residual list until quiescence: pairs
/// that have become patterns are solved (possibly enabling more), pairs
/// still outside the fragment are retained. Clears the dirty flag.
pub fn recheck_residuals(st: &mut Store, res: &mut Residuals) -> Result<UnifyOutcome, UnifyFail> {
    let mut total = UnifyOutcome::default();
    loop {
        if res.pairs.is_empty() {
            res.dirty = false;
            return Ok(total);
        }
        let pending = std::mem::take(&mut res.pairs);
        let out = {
            let mut u = Unifier::new(st, res);
            u.unify_pairs(pending)?
        };
        total.deferred = res.pairs.len();
        if out.bound {
            total.bound = true;
        } else {
            res.dirty = false;
            return Ok(total);
        }
    }
}
