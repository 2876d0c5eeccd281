//! From checked syntax to runtime clauses: clause elaboration,
//! disjunctive-goal elimination, the neededness fixpoint, and encoding
//! of named trees into de Bruijn kernel terms.

use std::collections::HashMap;

use crate::ast::{Ast, AstId, Quant, TermKind};
use crate::term::{Node, Store, SymId, TermId};
use crate::ty::TyId;
use crate::typecheck::{CheckError, Checked, ConstIdx, OccInsts, Sig, TypeOpt};

/// A clause reduced to `forall prefix. head :- body` form.
#[derive(Clone, Debug)]
pub struct ElabClause {
    /// Explicitly quantified variable names, outermost first.
    pub prefix: Vec<String>,
    pub head: AstId,
    pub body: Option<AstId>,
}

fn cerr<T>(msg: impl Into<String>, pos: crate::ast::Pos) -> Result<T, CheckError> {
    Err(CheckError {
        msg: msg.into(),
        pos,
    })
}

/// Splits a source clause into its universally prefixed atomic or
/// implicational components: conjunctions are split and universal
/// quantifiers distributed.
pub fn elab(ast: &mut Ast, clause: AstId) -> Result<Vec<ElabClause>, CheckError> {
    match ast.kind(clause).clone() {
        TermKind::And(d1, d2) => {
            let mut out = elab(ast, d1)?;
            out.extend(elab(ast, d2)?);
            Ok(out)
        }
        TermKind::Quantified(Quant::Forall, arg) => match ast.kind(arg).clone() {
            TermKind::Lam(x, b) => {
                let mut out = elab(ast, b)?;
                for c in &mut out {
                    c.prefix.insert(0, x.clone());
                }
                Ok(out)
            }
            _ => cerr(
                "clause-level universal quantifier needs an abstraction",
                ast.pos(arg),
            ),
        },
        TermKind::Quantified(Quant::Exists, _) => {
            cerr("existential quantifier in clause position", ast.pos(clause))
        }
        TermKind::Imp(g, d) => {
            // G => D distributes over the elaboration of D, conjoining G
            // onto each component's body.
            let mut out = elab(ast, d)?;
            for c in &mut out {
                let pos = ast.pos(g);
                c.body = Some(match c.body {
                    None => g,
                    Some(b) => ast.add(TermKind::And(g, b), pos),
                });
            }
            Ok(out)
        }
        TermKind::App(..) | TermKind::Ident(_) => Ok(vec![ElabClause {
            prefix: Vec::new(),
            head: clause,
            body: None,
        }]),
        TermKind::UVar(_) => cerr("clause head must be rigid", ast.pos(clause)),
        _ => cerr("not a legal program clause", ast.pos(clause)),
    }
}

// ---------------------------------------------------------------------------
// Disjunctive-goal elimination
// ---------------------------------------------------------------------------

pub struct DisjElim<'a> {
    ast: &'a mut Ast,
    st: &'a mut Store,
    sig: &'a mut Sig,
    counter: &'a mut u32,
    generated: Vec<ElabClause>,
}

/// Replaces every disjunctive goal in the bodies of `clauses` by a call
/// to a fresh predicate over the free variables of the disjunction,
/// adding two generated clauses per disjunction.
pub fn eliminate_disjunctions(
    ast: &mut Ast,
    st: &mut Store,
    sig: &mut Sig,
    clauses: Vec<ElabClause>,
    counter: &mut u32,
) -> Result<Vec<ElabClause>, CheckError> {
    let mut out = Vec::new();
    let mut all_generated = Vec::new();
    for mut c in clauses {
        if let Some(b) = c.body {
            let mut de = DisjElim {
                ast,
                st,
                sig,
                counter,
                generated: Vec::new(),
            };
            let mut scope: Vec<String> = c.prefix.clone();
            let b2 = de.walk_goal(b, &mut scope)?;
            c.body = Some(b2);
            all_generated.extend(de.generated);
        }
        out.push(c);
    }
    out.extend(all_generated);
    Ok(out)
}

impl<'a> DisjElim<'a> {
    fn walk_goal(&mut self, id: AstId, scope: &mut Vec<String>) -> Result<AstId, CheckError> {
        let pos = self.ast.pos(id);
        match self.ast.kind(id).clone() {
            TermKind::And(a, b) => {
                let a2 = self.walk_goal(a, scope)?;
                let b2 = self.walk_goal(b, scope)?;
                Ok(if a2 == a && b2 == b {
                    id
                } else {
                    self.ast.add(TermKind::And(a2, b2), pos)
                })
            }
            TermKind::Or(a, b) => {
                let a2 = self.walk_goal(a, scope)?;
                let b2 = self.walk_goal(b, scope)?;
                // free variables of the disjunction, first occurrence order
                let mut fv: Vec<(String, bool)> = Vec::new();
                let mut local = Vec::new();
                free_vars(self.ast, a2, scope, &mut local, &mut fv);
                free_vars(self.ast, b2, scope, &mut local, &mut fv);
                let name = format!("$disj_{}", *self.counter);
                *self.counter += 1;
                // declare $disj_k : A1 -> ... -> An -> o
                let o = self.st.mk_sort(self.sig.o);
                let mut ty = o;
                for _ in 0..fv.len() {
                    let a = self.st.fresh_tyvar();
                    ty = self.sig.mk_arrow(self.st, a, ty);
                }
                self.sig.declare_internal(self.st, &name, ty);
                let head_id = self.ast.add(TermKind::Ident(name), pos);
                let args: Vec<AstId> = fv
                    .iter()
                    .map(|(n, is_uvar)| {
                        let kind = if *is_uvar {
                            TermKind::UVar(n.clone())
                        } else {
                            TermKind::Ident(n.clone())
                        };
                        self.ast.add(kind, pos)
                    })
                    .collect();
                let atom = if args.is_empty() {
                    head_id
                } else {
                    self.ast.add(TermKind::App(head_id, args), pos)
                };
                let prefix: Vec<String> = fv.iter().map(|(n, _)| n.clone()).collect();
                self.generated.push(ElabClause {
                    prefix: prefix.clone(),
                    head: atom,
                    body: Some(a2),
                });
                self.generated.push(ElabClause {
                    prefix,
                    head: atom,
                    body: Some(b2),
                });
                Ok(atom)
            }
            TermKind::Imp(d, g) => {
                let d2 = self.walk_embedded(d, scope)?;
                let g2 = self.walk_goal(g, scope)?;
                Ok(if d2 == d && g2 == g {
                    id
                } else {
                    self.ast.add(TermKind::Imp(d2, g2), pos)
                })
            }
            TermKind::Quantified(q, arg) => match self.ast.kind(arg).clone() {
                TermKind::Lam(x, b) => {
                    scope.push(x.clone());
                    let b2 = self.walk_goal(b, scope)?;
                    scope.pop();
                    Ok(if b2 == b {
                        id
                    } else {
                        let lpos = self.ast.pos(arg);
                        let lam = self.ast.add(TermKind::Lam(x, b2), lpos);
                        self.ast.add(TermKind::Quantified(q, lam), pos)
                    })
                }
                _ => Ok(id),
            },
            _ => Ok(id), // atoms, true
        }
    }

    fn walk_embedded(&mut self, id: AstId, scope: &mut Vec<String>) -> Result<AstId, CheckError> {
        let pos = self.ast.pos(id);
        match self.ast.kind(id).clone() {
            TermKind::And(a, b) => {
                let a2 = self.walk_embedded(a, scope)?;
                let b2 = self.walk_embedded(b, scope)?;
                Ok(if a2 == a && b2 == b {
                    id
                } else {
                    self.ast.add(TermKind::And(a2, b2), pos)
                })
            }
            TermKind::Quantified(Quant::Forall, arg) => match self.ast.kind(arg).clone() {
                TermKind::Lam(x, b) => {
                    scope.push(x.clone());
                    let b2 = self.walk_embedded(b, scope)?;
                    scope.pop();
                    Ok(if b2 == b {
                        id
                    } else {
                        let lpos = self.ast.pos(arg);
                        let lam = self.ast.add(TermKind::Lam(x, b2), lpos);
                        self.ast.add(TermKind::Quantified(Quant::Forall, lam), pos)
                    })
                }
                _ => Ok(id),
            },
            TermKind::Imp(g, a) => {
                let g2 = self.walk_goal(g, scope)?;
                let a2 = self.walk_embedded(a, scope)?;
                Ok(if g2 == g && a2 == a {
                    id
                } else {
                    self.ast.add(TermKind::Imp(g2, a2), pos)
                })
            }
            _ => Ok(id),
        }
    }
}

/// Collects free variables of a subtree: implicitly quantified names
/// and names bound in the enclosing scope. `local` tracks binders
/// entered inside the subtree (those are not free).
fn free_vars(
    ast: &Ast,
    id: AstId,
    outer: &[String],
    local: &mut Vec<String>,
    acc: &mut Vec<(String, bool)>,
) {
    match ast.kind(id) {
        TermKind::UVar(n) => {
            if n != "_" && !local.contains(n) && !acc.iter().any(|(m, _)| m == n) {
                acc.push((n.clone(), true));
            }
        }
        TermKind::Ident(n) => {
            if !local.contains(n)
                && outer.iter().any(|m| m == n)
                && !acc.iter().any(|(m, _)| m == n)
            {
                acc.push((n.clone(), false));
            }
        }
        TermKind::App(h, args) => {
            free_vars(ast, *h, outer, local, acc);
            for a in args {
                free_vars(ast, *a, outer, local, acc);
            }
        }
        TermKind::Lam(x, b) => {
            local.push(x.clone());
            free_vars(ast, *b, outer, local, acc);
            local.pop();
        }
        TermKind::And(a, b) | TermKind::Or(a, b) | TermKind::Imp(a, b) => {
            free_vars(ast, *a, outer, local, acc);
            free_vars(ast, *b, outer, local, acc);
        }
        TermKind::Quantified(_, a) => free_vars(ast, *a, outer, local, acc),
        _ => {}
    }
}

// ---------------------------------------------------------------------------
// Neededness analysis
// ---------------------------------------------------------------------------

/// `needed[p][i]`: does position `i` of predicate `p`'s skeleton-level
/// annotation list influence any computation?
pub type NeededMatrix = HashMap<ConstIdx, Vec<bool>>;

struct NeedCtx<'a> {
    st: &'a Store,
    sig: &'a Sig,
    ast: &'a Ast,
}

/// Runs the init-plus-fixpoint analysis over the elaborated clauses.
pub fn find_needed(
    st: &Store,
    sig: &Sig,
    ast: &Ast,
    clauses: &[(ElabClause, Checked)],
) -> NeededMatrix {
    let mut needed: NeededMatrix = HashMap::new();
    let cx = NeedCtx { st, sig, ast };

    // predicates extended by embedded clauses get everything marked
    for (c, _) in clauses {
        if let Some(b) = c.body {
            cx.mark_embedded_preds(b, &mut needed);
        }
    }

    // head-driven initialization
    for (c, ck) in clauses {
        let Some((p, head_insts)) = cx.atom_pred(c.head, &ck.insts) else {
            continue;
        };
        let k = head_insts.len();
        needed
            .entry(p)
            .or_insert_with(|| vec![false; sig.decl(p).skel_vars.len()]);
        for i in 0..k {
            if needed[&p][i] {
                continue;
            }
            let ti = st.ty_deref(head_insts[i]);
            let is_var = matches!(st.ty_node(ti), crate::ty::TyNode::Var { .. });
            if !is_var {
                needed.get_mut(&p).unwrap()[i] = true;
                continue;
            }
            // variable annotation: needed when it occurs in another head
            // annotation, in a term-position constant's annotations, or
            // in an embedded clause head's annotations
            let mut hit = head_insts
                .iter()
                .enumerate()
                .any(|(j, t)| j != i && st.ty_mentions(*t, ti));
            if !hit {
                let mut term_insts = Vec::new();
                let mut embedded_insts = Vec::new();
                cx.collect_clause_insts(c, &ck.insts, &mut term_insts, &mut embedded_insts);
                hit = term_insts.iter().any(|t| st.ty_mentions(*t, ti))
                    || embedded_insts.iter().any(|t| st.ty_mentions(*t, ti));
            }
            if hit {
                needed.get_mut(&p).unwrap()[i] = true;
            }
        }
    }

    // fixpoint: a head variable flowing into a needed position of a
    // body goal's predicate becomes needed
    loop {
        let mut changed = false;
        for (c, ck) in clauses {
            let Some(b) = c.body else { continue };
            let Some((p, head_insts)) = cx.atom_pred(c.head, &ck.insts) else {
                continue;
            };
            for i in 0..head_insts.len() {
                if needed.get(&p).is_some_and(|row| row[i]) {
                    continue;
                }
                let ti = st.ty_deref(head_insts[i]);
                if !matches!(st.ty_node(ti), crate::ty::TyNode::Var { .. }) {
                    continue;
                }
                if cx.process_body(b, ti, &ck.insts, &needed) {
                    needed.get_mut(&p).unwrap()[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    needed
}

impl<'a> NeedCtx<'a> {
    /// Resolves an atom to its predicate constant and the skeleton-level
    /// instantiation list of its head occurrence.
    fn atom_pred(&self, atom: AstId, insts: &OccInsts) -> Option<(ConstIdx, Vec<TyId>)> {
        let h = match self.ast.kind(atom) {
            TermKind::App(h, _) => *h,
            _ => atom,
        };
        match self.ast.kind(h) {
            TermKind::Ident(name) => {
                let idx = self.sig.lookup(name)?;
                let map = insts.get(&h)?;
                let decl = self.sig.decl(idx);
                let ordered: Vec<TyId> = decl
                    .skel_vars
                    .iter()
                    .map(|v| {
                        map.iter()
                            .find(|(from, _)| from == v)
                            .map(|(_, t)| *t)
                            .expect("instantiation missing for skeleton variable")
                    })
                    .collect();
                Some((idx, ordered))
            }
            _ => None,
        }
    }

    fn mark_embedded_preds(&self, goal: AstId, needed: &mut NeededMatrix) {
        match self.ast.kind(goal) {
            TermKind::And(a, b) | TermKind::Or(a, b) => {
                self.mark_embedded_preds(*a, needed);
                self.mark_embedded_preds(*b, needed);
            }
            TermKind::Imp(d, g) => {
                self.mark_clause_heads(*d, needed);
                self.mark_embedded_preds(*g, needed);
            }
            TermKind::Quantified(_, arg) => {
                if let TermKind::Lam(_, b) = self.ast.kind(*arg) {
                    self.mark_embedded_preds(*b, needed);
                }
            }
            _ => {}
        }
    }

    fn mark_clause_heads(&self, d: AstId, needed: &mut NeededMatrix) {
        match self.ast.kind(d) {
            TermKind::And(a, b) => {
                self.mark_clause_heads(*a, needed);
                self.mark_clause_heads(*b, needed);
            }
            TermKind::Quantified(Quant::Forall, arg) => {
                if let TermKind::Lam(_, b) = self.ast.kind(*arg) {
                    self.mark_clause_heads(*b, needed);
                }
            }
            TermKind::Imp(g, a) => {
                self.mark_embedded_preds(*g, needed);
                self.mark_clause_heads(*a, needed);
            }
            _ => {
                let h = match self.ast.kind(d) {
                    TermKind::App(h2, _) => *h2,
                    _ => d,
                };
                if let TermKind::Ident(name) = self.ast.kind(h) {
                    if let Some(idx) = self.sig.lookup(name) {
                        let len = self.sig.decl(idx).skel_vars.len();
                        needed.insert(idx, vec![true; len]);
                    }
                }
            }
        }
    }

    /// Gathers the instantiation types of constants in term positions
    /// and of embedded clause heads throughout the clause.
    fn collect_clause_insts(
        &self,
        c: &ElabClause,
        insts: &OccInsts,
        term_out: &mut Vec<TyId>,
        embedded_out: &mut Vec<TyId>,
    ) {
        self.collect_atom_args(c.head, insts, term_out);
        if let Some(b) = c.body {
            self.collect_goal(b, insts, term_out, embedded_out);
        }
    }

    fn collect_goal(
        &self,
        g: AstId,
        insts: &OccInsts,
        term_out: &mut Vec<TyId>,
        embedded_out: &mut Vec<TyId>,
    ) {
        match self.ast.kind(g) {
            TermKind::And(a, b) | TermKind::Or(a, b) => {
                self.collect_goal(*a, insts, term_out, embedded_out);
                self.collect_goal(*b, insts, term_out, embedded_out);
            }
            TermKind::Imp(d, g2) => {
                self.collect_embedded(*d, insts, term_out, embedded_out);
                self.collect_goal(*g2, insts, term_out, embedded_out);
            }
            TermKind::Quantified(_, arg) => {
                if let TermKind::Lam(_, b) = self.ast.kind(*arg) {
                    self.collect_goal(*b, insts, term_out, embedded_out);
                } else {
                    self.collect_term(*arg, insts, term_out);
                }
            }
            _ => self.collect_atom_args(g, insts, term_out),
        }
    }

    fn collect_embedded(
        &self,
        d: AstId,
        insts: &OccInsts,
        term_out: &mut Vec<TyId>,
        embedded_out: &mut Vec<TyId>,
    ) {
        match self.ast.kind(d) {
            TermKind::And(a, b) => {
                self.collect_embedded(*a, insts, term_out, embedded_out);
                self.collect_embedded(*b, insts, term_out, embedded_out);
            }
            TermKind::Quantified(Quant::Forall, arg) => {
                if let TermKind::Lam(_, b) = self.ast.kind(*arg) {
                    self.collect_embedded(*b, insts, term_out, embedded_out);
                }
            }
            TermKind::Imp(g, a) => {
                self.collect_goal(*g, insts, term_out, embedded_out);
                self.collect_embedded(*a, insts, term_out, embedded_out);
            }
            _ => {
                // embedded clause head: its own annotations count as
                // embedded-head instantiations, its arguments as terms
                let h = match self.ast.kind(d) {
                    TermKind::App(h, _) => *h,
                    _ => d,
                };
                if let Some(map) = insts.get(&h) {
                    for (_, t) in map {
                        embedded_out.push(*t);
                    }
                }
                self.collect_atom_args(d, insts, term_out);
            }
        }
    }

    /// Arguments of an atom are term positions; the head is not.
    fn collect_atom_args(&self, atom: AstId, insts: &OccInsts, term_out: &mut Vec<TyId>) {
        if let TermKind::App(_, args) = self.ast.kind(atom) {
            for a in args.clone() {
                self.collect_term(a, insts, term_out);
            }
        }
    }

    fn collect_term(&self, t: AstId, insts: &OccInsts, term_out: &mut Vec<TyId>) {
        if let Some(map) = insts.get(&t) {
            // Only the skeleton-reduced annotation list travels with a
            // term occurrence; instantiations of variables determined
            // by the target type are dropped before they reach runtime.
            match self.ast.kind(t) {
                TermKind::Ident(name) => {
                    if let Some(idx) = self.sig.lookup(name) {
                        let decl = self.sig.decl(idx);
                        for (from, ty) in map {
                            if decl.arg_only_vars.contains(from) {
                                term_out.push(*ty);
                            }
                        }
                    }
                }
                _ => {
                    for (_, ty) in map {
                        term_out.push(*ty);
                    }
                }
            }
        }
        match self.ast.kind(t) {
            TermKind::App(h, args) => {
                self.collect_term(*h, insts, term_out);
                for a in args {
                    self.collect_term(*a, insts, term_out);
                }
            }
            TermKind::Lam(_, b) => self.collect_term(*b, insts, term_out),
            TermKind::And(a, b) | TermKind::Or(a, b) => {
                self.collect_term(*a, insts, term_out);
                self.collect_term(*b, insts, term_out);
            }
            TermKind::Quantified(_, a) => self.collect_term(*a, insts, term_out),
            _ => {}
        }
    }

    /// Does the head variable `v` flow into a needed position of some
    /// body goal's predicate?
    fn process_body(&self, g: AstId, v: TyId, insts: &OccInsts, needed: &NeededMatrix) -> bool {
        match self.ast.kind(g) {
            TermKind::And(a, b) | TermKind::Or(a, b) => {
                self.process_body(*a, v, insts, needed) || self.process_body(*b, v, insts, needed)
            }
            TermKind::Imp(d, g2) => {
                self.process_body(*g2, v, insts, needed)
                    || self.process_embedded_body(*d, v, insts, needed)
            }
            TermKind::Quantified(_, arg) => {
                if let TermKind::Lam(_, b) = self.ast.kind(*arg) {
                    self.process_body(*b, v, insts, needed)
                } else {
                    false
                }
            }
            TermKind::True => false,
            _ => match self.atom_pred(g, insts) {
                Some((q, anns)) => anns.iter().enumerate().any(|(i, t)| {
                    self.st.ty_mentions(*t, v) && needed.get(&q).is_some_and(|row| row[i])
                }),
                None => false, // flexible atom: argument flow was covered at init
            },
        }
    }

    fn process_embedded_body(
        &self,
        d: AstId,
        v: TyId,
        insts: &OccInsts,
        needed: &NeededMatrix,
    ) -> bool {
        match self.ast.kind(d) {
            TermKind::And(a, b) => {
                self.process_embedded_body(*a, v, insts, needed)
                    || self.process_embedded_body(*b, v, insts, needed)
            }
            TermKind::Quantified(Quant::Forall, arg) => {
                if let TermKind::Lam(_, b) = self.ast.kind(*arg) {
                    self.process_embedded_body(*b, v, insts, needed)
                } else {
                    false
                }
            }
            TermKind::Imp(g, _a) => self.process_body(*g, v, insts, needed),
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Encoding into kernel terms
// ---------------------------------------------------------------------------

/// A compiled clause: head and body live under `nvars` binders; the
/// `tyvars` are template type variables refreshed per activation.
#[derive(Clone, Debug)]
pub struct Clause {
    pub pred: SymId,
    pub nvars: u32,
    pub tyvars: Vec<TyId>,
    pub head: TermId,
    pub body: Option<TermId>,
    /// Head symbol of the first argument when it is a constant; used as
    /// a clause-selection prefilter.
    pub first_arg: Option<SymId>,
}

/// The loaded program: signature, compiled clauses grouped by
/// predicate, and the neededness matrix when one was computed.
pub struct Program {
    pub sig: Sig,
    pub clauses: Vec<Clause>,
    pub by_pred: HashMap<SymId, Vec<usize>>,
    pub needed: NeededMatrix,
    pub opt: TypeOpt,
}

struct FreezeState {
    map: Vec<(TyId, TyId)>,
    tyvars: Vec<TyId>,
}

fn freeze_ty(st: &mut Store, t: TyId, fs: &mut FreezeState) -> TyId {
    use crate::ty::TyNode;
    let t = st.ty_deref(t);
    match st.ty_node(t).clone() {
        TyNode::Var { .. } => {
            if let Some((_, f)) = fs.map.iter().find(|(from, _)| *from == t) {
                *f
            } else {
                let f = st.fresh_tyvar();
                fs.map.push((t, f));
                fs.tyvars.push(f);
                f
            }
        }
        TyNode::Sort(_) => t,
        TyNode::App { con, args } => {
            let new: Vec<TyId> = args.iter().map(|a| freeze_ty(st, *a, fs)).collect();
            if new.iter().zip(args.iter()).all(|(a, b)| a == b) {
                t
            } else {
                st.mk_tyapp(con, new)
            }
        }
    }
}

pub struct Encoder<'a> {
    pub st: &'a mut Store,
    pub sig: &'a Sig,
    ast: &'a Ast,
    insts: &'a OccInsts,
    lam: Vec<String>,
    prefix: Vec<String>,
    freeze: Option<FreezeState>,
    /// Query mode: implicitly existential variables, in occurrence order.
    qvars: Option<Vec<(String, TermId)>>,
}

impl<'a> Encoder<'a> {
    fn resolve_ann(&mut self, occ: AstId, idx: ConstIdx, goal_head: bool) -> Vec<TyId> {
        let decl = self.sig.decl(idx);
        let plan: Vec<TyId> = if goal_head {
            decl.ann_plan[..decl.pred_ann_len].to_vec()
        } else {
            decl.ann_plan.clone()
        };
        let map = self.insts.get(&occ);
        plan.iter()
            .map(|v| {
                let live = map
                    .and_then(|m| m.iter().find(|(from, _)| from == v).map(|(_, t)| *t))
                    .expect("missing instantiation for annotated occurrence");
                match &mut self.freeze {
                    Some(fs) => freeze_ty(self.st, live, fs),
                    None => live,
                }
            })
            .collect()
    }

    fn const_node(&mut self, occ: AstId, idx: ConstIdx, goal_head: bool) -> TermId {
        let anns = self.resolve_ann(occ, idx, goal_head);
        let sym = self.sig.decl(idx).sym;
        self.st.mk_const(sym, 0, anns)
    }

    /// Looks a name up in the lambda scope and the clause prefix.
    fn resolve_bound(&mut self, name: &str) -> Option<TermId> {
        for (k, n) in self.lam.iter().rev().enumerate() {
            if n == name {
                return Some(self.st.mk_db(k as u32 + 1));
            }
        }
        let plen = self.prefix.len();
        if let Some(p) = self.prefix.iter().rposition(|n| n == name) {
            let idx = self.lam.len() as u32 + (plen - p) as u32;
            return Some(self.st.mk_db(idx));
        }
        None
    }

    /// Resolves an implicitly quantified variable in query mode.
    fn resolve_qvar(&mut self, name: &str) -> TermId {
        let qv = self
            .qvars
            .as_mut()
            .expect("free variable outside query mode");
        if let Some((_, t)) = qv.iter().find(|(n, _)| n == name) {
            return *t;
        }
        let v = self.st.fresh_var(0);
        self.qvars.as_mut().unwrap().push((name.to_string(), v));
        v
    }

    pub fn encode_term(&mut self, id: AstId) -> TermId {
        match self.ast.kind(id).clone() {
            TermKind::Ident(name) => {
                if let Some(t) = self.resolve_bound(&name) {
                    return t;
                }
                let idx = self
                    .sig
                    .lookup(&name)
                    .expect("unresolved identifier survived checking");
                self.const_node(id, idx, false)
            }
            TermKind::UVar(name) => {
                let key = if name == "_" {
                    format!("_{}", id)
                } else {
                    name
                };
                if let Some(t) = self.resolve_bound(&key) {
                    return t;
                }
                self.resolve_qvar(&key)
            }
            TermKind::Int(n) => {
                let idx = self.sig.int_lookup(n).expect("literal not interned");
                self.const_node(id, idx, false)
            }
            TermKind::Str(s) => {
                let idx = self.sig.str_lookup(&s).expect("literal not interned");
                self.const_node(id, idx, false)
            }
            TermKind::True => {
                let idx = self.sig.c_true;
                self.const_node(id, idx, false)
            }
            TermKind::Lam(..) => {
                // consolidate a lambda spine into one abstraction
                let mut names = Vec::new();
                let mut cur = id;
                while let TermKind::Lam(x, b) = self.ast.kind(cur) {
                    names.push(x.clone());
                    cur = *b;
                }
                let n = names.len() as u32;
                for x in names {
                    self.lam.push(x);
                }
                let body = self.encode_term(cur);
                for _ in 0..n {
                    self.lam.pop();
                }
                self.st.mk_abs(n, body)
            }
            TermKind::App(h, args) => {
                let head = self.encode_term(h);
                let eargs: Vec<TermId> = args.iter().map(|a| self.encode_term(*a)).collect();
                self.st.mk_app(head, eargs)
            }
            TermKind::And(a, b) => self.connective(self.sig.c_and, id, a, b),
            TermKind::Or(a, b) => self.connective(self.sig.c_or, id, a, b),
            TermKind::Imp(a, b) => self.connective(self.sig.c_imp, id, a, b),
            TermKind::Quantified(q, arg) => {
                let idx = match q {
                    Quant::Forall => self.sig.c_pi,
                    Quant::Exists => self.sig.c_sigma,
                };
                let c = self.const_node(id, idx, false);
                let body = self.encode_term(arg);
                self.st.mk_app(c, vec![body])
            }
        }
    }

    fn connective(&mut self, idx: ConstIdx, _id: AstId, a: AstId, b: AstId) -> TermId {
        let ea = self.encode_goalish(a);
        let eb = self.encode_goalish(b);
        let sym = self.sig.decl(idx).sym;
        let c = self.st.mk_const(sym, 0, vec![]);
        self.st.mk_app(c, vec![ea, eb])
    }

    /// Encodes a goal or embedded clause; atoms get predicate-level
    /// annotation trimming on their heads.
    fn encode_goalish(&mut self, id: AstId) -> TermId {
        match self.ast.kind(id).clone() {
            TermKind::And(a, b) => self.connective(self.sig.c_and, id, a, b),
            TermKind::Or(a, b) => self.connective(self.sig.c_or, id, a, b),
            TermKind::Imp(a, b) => self.connective(self.sig.c_imp, id, a, b),
            TermKind::Quantified(q, arg) => {
                let idx = match q {
                    Quant::Forall => self.sig.c_pi,
                    Quant::Exists => self.sig.c_sigma,
                };
                let c = self.const_node(id, idx, false);
                let body = match self.ast.kind(arg).clone() {
                    TermKind::Lam(x, b) => {
                        self.lam.push(x);
                        let eb = self.encode_goalish(b);
                        self.lam.pop();
                        self.st.mk_abs(1, eb)
                    }
                    _ => self.encode_term(arg),
                };
                self.st.mk_app(c, vec![body])
            }
            TermKind::True => self.const_node(id, self.sig.c_true, false),
            TermKind::App(h, args) => {
                let head = match self.ast.kind(h).clone() {
                    TermKind::Ident(name) => match self.resolve_bound(&name) {
                        Some(t) => t,
                        None => {
                            let idx = self
                                .sig
                                .lookup(&name)
                                .expect("unresolved identifier survived checking");
                            self.const_node(h, idx, true)
                        }
                    },
                    _ => self.encode_term(h),
                };
                let eargs: Vec<TermId> = args.iter().map(|a| self.encode_term(*a)).collect();
                self.st.mk_app(head, eargs)
            }
            TermKind::Ident(name) => match self.resolve_bound(&name) {
                Some(t) => t,
                None => {
                    let idx = self
                        .sig
                        .lookup(&name)
                        .expect("unresolved identifier survived checking");
                    self.const_node(id, idx, true)
                }
            },
            _ => self.encode_term(id),
        }
    }
}

/// Collects the implicitly quantified variables of a clause in textual
/// order, skipping the explicit prefix. `_` occurrences become fresh
/// singleton variables.
fn collect_caps(
    ast: &Ast,
    id: AstId,
    explicit: &[String],
    local: &mut Vec<String>,
    acc: &mut Vec<String>,
) {
    match ast.kind(id) {
        TermKind::UVar(n) => {
            let name = if n == "_" {
                format!("_{}", id)
            } else {
                n.clone()
            };
            if n != "_" && (local.contains(n) || explicit.contains(n)) {
                return;
            }
            if !acc.contains(&name) {
                acc.push(name);
            }
        }
        TermKind::App(h, args) => {
            collect_caps(ast, *h, explicit, local, acc);
            for a in args {
                collect_caps(ast, *a, explicit, local, acc);
            }
        }
        TermKind::Lam(x, b) => {
            local.push(x.clone());
            collect_caps(ast, *b, explicit, local, acc);
            local.pop();
        }
        TermKind::And(a, b) | TermKind::Or(a, b) | TermKind::Imp(a, b) => {
            collect_caps(ast, *a, explicit, local, acc);
            collect_caps(ast, *b, explicit, local, acc);
        }
        TermKind::Quantified(_, a) => collect_caps(ast, *a, explicit, local, acc),
        _ => {}
    }
}

/// Encodes one elaborated, checked clause into a compiled clause.
pub fn encode_clause(
    st: &mut Store,
    sig: &Sig,
    ast: &Ast,
    c: &ElabClause,
    ck: &Checked,
) -> Result<Clause, CheckError> {
    // full prefix: implicit variables outermost, then the explicit ones
    let mut caps = Vec::new();
    let mut local = Vec::new();
    collect_caps(ast, c.head, &c.prefix, &mut local, &mut caps);
    if let Some(b) = c.body {
        collect_caps(ast, b, &c.prefix, &mut local, &mut caps);
    }
    let mut prefix = caps;
    prefix.extend(c.prefix.iter().cloned());

    let mut enc = Encoder {
        st,
        sig,
        ast,
        insts: &ck.insts,
        lam: Vec::new(),
        prefix,
        freeze: Some(FreezeState {
            map: Vec::new(),
            tyvars: Vec::new(),
        }),
        qvars: None,
    };
    let head = enc.encode_goalish(c.head);
    let body = c.body.map(|b| enc.encode_goalish(b));
    let nvars = enc.prefix.len() as u32;
    let tyvars = enc.freeze.take().unwrap().tyvars;

    // the head must be a rigid application of a constant
    let (pred, first_arg) = head_info(st, head).ok_or_else(|| CheckError {
        msg: "clause head must be a rigid atom".into(),
        pos: ast.pos(c.head),
    })?;
    Ok(Clause {
        pred,
        nvars,
        tyvars,
        head,
        body,
        first_arg,
    })
}

fn head_info(st: &Store, head: TermId) -> Option<(SymId, Option<SymId>)> {
    match st.node(head) {
        Node::Const { sym, .. } => Some((*sym, None)),
        Node::App { head: h, args } => {
            let pred = match st.node(*h) {
                Node::Const { sym, .. } => *sym,
                _ => return None,
            };
            let first = args.first().map(|a| first_arg_sym(st, *a)).unwrap_or(None);
            Some((pred, first))
        }
        _ => None,
    }
}

/// The constant heading the first argument, looking through binders.
fn first_arg_sym(st: &Store, mut t: TermId) -> Option<SymId> {
    loop {
        match st.node(t) {
            Node::Abs { body, .. } => t = *body,
            Node::App { head, .. } => t = *head,
            Node::Const { sym, .. } => return Some(*sym),
            _ => return None,
        }
    }
}

/// Encodes a checked standalone term (all constants carry their
/// term-occurrence annotations). Free capitalized names become fresh
/// variables, returned alongside.
pub fn encode_ground(
    st: &mut Store,
    sig: &Sig,
    ast: &Ast,
    id: AstId,
    ck: &Checked,
) -> (TermId, Vec<(String, TermId)>) {
    let mut enc = Encoder {
        st,
        sig,
        ast,
        insts: &ck.insts,
        lam: Vec::new(),
        prefix: Vec::new(),
        freeze: None,
        qvars: Some(Vec::new()),
    };
    let t = enc.encode_term(id);
    (t, enc.qvars.take().unwrap())
}

/// Encodes a checked query: returns the goal term, the named query
/// variables in occurrence order, and the query's free type variables.
pub fn encode_query(
    st: &mut Store,
    sig: &Sig,
    ast: &Ast,
    goal: AstId,
    ck: &Checked,
) -> (TermId, Vec<(String, TermId)>, Vec<TyId>) {
    let mut enc = Encoder {
        st,
        sig,
        ast,
        insts: &ck.insts,
        lam: Vec::new(),
        prefix: Vec::new(),
        freeze: None,
        qvars: Some(Vec::new()),
    };
    let g = enc.encode_goalish(goal);
    let mut qvars = enc.qvars.take().unwrap();
    qvars.retain(|(n, _)| !n.starts_with('_'));
    // free type variables of the query's annotations, in textual
    // occurrence order, for answer display
    let mut tyvars: Vec<TyId> = Vec::new();
    let mut occs: Vec<&AstId> = ck.insts.keys().collect();
    occs.sort();
    for occ in occs {
        for (_, t) in &ck.insts[occ] {
            st.ty_free_vars(*t, &mut tyvars);
        }
    }
    (g, qvars, tyvars)
}
