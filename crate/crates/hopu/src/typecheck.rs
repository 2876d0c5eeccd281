//! Signature management, type inference, skeleton splitting and the
//! neededness analysis that trims runtime type annotations.
//!
//! Every constant declaration is split once into a compile-time
//! skeleton and the list of type variables whose instantiations must
//! travel with occurrences at runtime. Which subset actually travels
//! depends on the optimization level: all skeleton variables, only
//! those not determined by the target type, or (for predicates) only
//! the positions the fixpoint analysis marks as needed.

use std::collections::HashMap;

use crate::ast::{Ast, AstId, Pos, Quant, TermKind, TypeAst};
use crate::term::{Store, SymId};
use crate::ty::{arrow_parts, TyConId, TyCons, TyId, TyNode};

#[derive(Debug)]
pub struct CheckError {
    pub msg: String,
    pub pos: Pos,
}

impl std::fmt::Display for CheckError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "type error at {}: {}", self.pos, self.msg)
    }
}

fn err<T>(msg: impl Into<String>, pos: Pos) -> Result<T, CheckError> {
    Err(CheckError {
        msg: msg.into(),
        pos,
    })
}

/// Runtime type-processing level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeOpt {
    /// Annotate every skeleton variable.
    None,
    /// Skeleton reduction: drop variables that occur in the target type.
    Skeleton,
    /// Skeleton reduction plus the neededness mask on predicates.
    Full,
}

/// Index into the constant table.
pub type ConstIdx = usize;

#[derive(Clone, Debug)]
pub struct ConstDecl {
    pub name: String,
    pub sym: SymId,
    /// Frozen declared type (the skeleton).
    pub ty: TyId,
    /// Free variables of the skeleton in first-occurrence order.
    pub skel_vars: Vec<TyId>,
    /// Skeleton variables that do not occur in the target type.
    pub arg_only_vars: Vec<TyId>,
    pub is_pred: bool,
    /// Ordered annotation list carried by term occurrences.
    pub ann_plan: Vec<TyId>,
    /// Prefix of `ann_plan` carried by goal and clause-head occurrences.
    pub pred_ann_len: usize,
}

/// The signature: kinds plus declared constants, including builtins.
pub struct Sig {
    pub tycons: TyCons,
    pub consts: Vec<ConstDecl>,
    by_name: HashMap<String, ConstIdx>,
    by_sym: HashMap<SymId, ConstIdx>,
    int_consts: HashMap<i64, ConstIdx>,
    str_consts: HashMap<String, ConstIdx>,
    pub arrow: TyConId,
    pub o: TyConId,
    pub int: TyConId,
    pub string: TyConId,
    pub real: TyConId,
    pub list: TyConId,
    pub c_true: ConstIdx,
    pub c_and: ConstIdx,
    pub c_or: ConstIdx,
    pub c_imp: ConstIdx,
    pub c_sigma: ConstIdx,
    pub c_pi: ConstIdx,
    pub c_cons: ConstIdx,
    pub c_nil: ConstIdx,
}

impl Sig {
    pub fn new(st: &mut Store) -> Sig {
        let mut tycons = TyCons::default();
        let arrow = tycons.intern("->", 2);
        let o = tycons.intern("o", 0);
        let int = tycons.intern("int", 0);
        let string = tycons.intern("string", 0);
        let real = tycons.intern("real", 0);
        let list = tycons.intern("list", 1);
        let mut sig = Sig {
            tycons,
            consts: Vec::new(),
            by_name: HashMap::new(),
            by_sym: HashMap::new(),
            int_consts: HashMap::new(),
            str_consts: HashMap::new(),
            arrow,
            o,
            int,
            string,
            real,
            list,
            c_true: 0,
            c_and: 0,
            c_or: 0,
            c_imp: 0,
            c_sigma: 0,
            c_pi: 0,
            c_cons: 0,
            c_nil: 0,
        };
        let oo = st.mk_sort(o);
        let ooo = sig.mk_arrow(st, oo, oo);
        let oooo = sig.mk_arrow(st, oo, ooo);
        sig.c_true = sig.add_const(st, "true", oo);
        sig.c_and = sig.add_const(st, ",", oooo);
        sig.c_or = sig.add_const(st, ";", oooo);
        sig.c_imp = sig.add_const(st, "=>", oooo);
        // sigma, pi : (A -> o) -> o
        for (name, slot) in [("sigma", 0usize), ("pi", 1usize)] {
            let a = st.fresh_tyvar();
            let ao = sig.mk_arrow(st, a, oo);
            let ty = sig.mk_arrow(st, ao, oo);
            let idx = sig.add_const(st, name, ty);
            if slot == 0 {
                sig.c_sigma = idx;
            } else {
                sig.c_pi = idx;
            }
        }
        // :: : A -> list A -> list A ;  nil : list A
        let a = st.fresh_tyvar();
        let la = st.mk_tyapp(list, vec![a]);
        let cons_ty = {
            let tail = sig.mk_arrow(st, la, la);
            sig.mk_arrow(st, a, tail)
        };
        sig.c_cons = sig.add_const(st, "::", cons_ty);
        let b = st.fresh_tyvar();
        let lb = st.mk_tyapp(list, vec![b]);
        sig.c_nil = sig.add_const(st, "nil", lb);
        sig
    }

    pub fn mk_arrow(&self, st: &mut Store, a: TyId, b: TyId) -> TyId {
        st.mk_tyapp(self.arrow, vec![a, b])
    }

    fn add_const(&mut self, st: &mut Store, name: &str, ty: TyId) -> ConstIdx {
        let sym = st.intern_sym(name, 0);
        let (skel_vars, arg_only_vars, is_pred) = split_skeleton(st, self.arrow, self.o, ty);
        let idx = self.consts.len();
        self.consts.push(ConstDecl {
            name: name.to_string(),
            sym,
            ty,
            skel_vars: skel_vars.clone(),
            arg_only_vars,
            is_pred,
            ann_plan: skel_vars,
            pred_ann_len: 0,
        });
        self.by_name.insert(name.to_string(), idx);
        self.by_sym.insert(sym, idx);
        idx
    }

    pub fn lookup(&self, name: &str) -> Option<ConstIdx> {
        self.by_name.get(name).copied()
    }

    pub fn by_sym(&self, sym: SymId) -> Option<ConstIdx> {
        self.by_sym.get(&sym).copied()
    }

    pub fn decl(&self, i: ConstIdx) -> &ConstDecl {
        &self.consts[i]
    }

    pub fn declare_kind(&mut self, name: &str, arity: u32, pos: Pos) -> Result<(), CheckError> {
        if self.tycons.lookup(name).is_some() {
            return err(format!("type constructor '{}' redeclared", name), pos);
        }
        self.tycons.intern(name, arity);
        Ok(())
    }

    pub fn declare_type(
        &mut self,
        st: &mut Store,
        name: &str,
        ty_ast: &TypeAst,
        pos: Pos,
    ) -> Result<ConstIdx, CheckError> {
        if self.by_name.contains_key(name) {
            return err(format!("constant '{}' redeclared", name), pos);
        }
        let mut vars: Vec<(String, TyId)> = Vec::new();
        let ty = self.build_type(st, ty_ast, &mut vars)?;
        Ok(self.add_const(st, name, ty))
    }

    pub fn build_type(
        &self,
        st: &mut Store,
        t: &TypeAst,
        vars: &mut Vec<(String, TyId)>,
    ) -> Result<TyId, CheckError> {
        match t {
            TypeAst::Var(name, _) => {
                if let Some((_, v)) = vars.iter().find(|(n, _)| n == name) {
                    Ok(*v)
                } else {
                    let v = st.fresh_tyvar();
                    vars.push((name.clone(), v));
                    Ok(v)
                }
            }
            TypeAst::Con(name, args, pos) => {
                let con = match self.tycons.lookup(name) {
                    Some(c) => c,
                    None => {
                        return err(format!("unknown sort or type constructor '{}'", name), *pos)
                    }
                };
                let info = self.tycons.info(con);
                if info.arity as usize != args.len() {
                    return err(
                        format!(
                            "'{}' expects {} argument(s), got {}",
                            name,
                            info.arity,
                            args.len()
                        ),
                        *pos,
                    );
                }
                let mut built = Vec::with_capacity(args.len());
                for a in args {
                    built.push(self.build_type(st, a, vars)?);
                }
                Ok(st.mk_tyapp(con, built))
            }
            TypeAst::Arrow(a, b) => {
                let l = self.build_type(st, a, vars)?;
                let r = self.build_type(st, b, vars)?;
                Ok(self.mk_arrow(st, l, r))
            }
        }
    }

    /// Registers a compiler-generated predicate (no source declaration).
    pub(crate) fn declare_internal(&mut self, st: &mut Store, name: &str, ty: TyId) -> ConstIdx {
        self.add_const(st, name, ty)
    }

    pub fn int_lookup(&self, n: i64) -> Option<ConstIdx> {
        self.int_consts.get(&n).copied()
    }

    pub fn str_lookup(&self, s: &str) -> Option<ConstIdx> {
        self.str_consts.get(s).copied()
    }

    /// Interns an integer literal as a monomorphic constant.
    pub fn int_const(&mut self, st: &mut Store, n: i64) -> ConstIdx {
        if let Some(i) = self.int_consts.get(&n) {
            return *i;
        }
        let ty = st.mk_sort(self.int);
        let idx = self.add_const_literal(st, &n.to_string(), ty);
        self.int_consts.insert(n, idx);
        idx
    }

    /// Interns a string literal as a monomorphic constant.
    pub fn str_const(&mut self, st: &mut Store, s: &str) -> ConstIdx {
        if let Some(i) = self.str_consts.get(s) {
            return *i;
        }
        let ty = st.mk_sort(self.string);
        let display = format!("\"{}\"", s);
        let sym = st.intern_sym(&display, 0);
        let idx = self.consts.len();
        self.consts.push(ConstDecl {
            name: display,
            sym,
            ty,
            skel_vars: Vec::new(),
            arg_only_vars: Vec::new(),
            is_pred: false,
            ann_plan: Vec::new(),
            pred_ann_len: 0,
        });
        self.by_sym.insert(sym, idx);
        self.str_consts.insert(s.to_string(), idx);
        idx
    }

    fn add_const_literal(&mut self, st: &mut Store, name: &str, ty: TyId) -> ConstIdx {
        let sym = st.intern_sym(name, 0);
        let idx = self.consts.len();
        self.consts.push(ConstDecl {
            name: name.to_string(),
            sym,
            ty,
            skel_vars: Vec::new(),
            arg_only_vars: Vec::new(),
            is_pred: false,
            ann_plan: Vec::new(),
            pred_ann_len: 0,
        });
        self.by_sym.insert(sym, idx);
        idx
    }

    /// Installs the annotation plans for the chosen optimization level.
    /// `needed` maps a predicate's constant index to its per-position
    /// mask (positions index `skel_vars`).
    pub fn finalize_plans(&mut self, opt: TypeOpt, needed: &HashMap<ConstIdx, Vec<bool>>) {
        for (idx, d) in self.consts.iter_mut().enumerate() {
            match opt {
                TypeOpt::None => {
                    d.ann_plan = d.skel_vars.clone();
                    d.pred_ann_len = d.ann_plan.len();
                }
                TypeOpt::Skeleton => {
                    d.ann_plan = d.arg_only_vars.clone();
                    d.pred_ann_len = d.ann_plan.len();
                }
                TypeOpt::Full => {
                    if d.is_pred {
                        if let Some(mask) = needed.get(&idx) {
                            let mut plan: Vec<TyId> = Vec::new();
                            for (v, m) in d.skel_vars.iter().zip(mask.iter()) {
                                if *m {
                                    plan.push(*v);
                                }
                            }
                            let needed_len = plan.len();
                            for (v, m) in d.skel_vars.iter().zip(mask.iter()) {
                                if !*m {
                                    plan.push(*v);
                                }
                            }
                            d.ann_plan = plan;
                            d.pred_ann_len = needed_len;
                        } else {
                            // no clauses seen: keep the skeleton plan with
                            // nothing needed at the head
                            d.ann_plan = d.arg_only_vars.clone();
                            d.pred_ann_len = 0;
                        }
                    } else {
                        d.ann_plan = d.arg_only_vars.clone();
                        d.pred_ann_len = d.ann_plan.len();
                    }
                }
            }
        }
        // The structural constants are interpreted by the engine, never
        // resolved through clauses; they keep their term-level plans.
        for idx in [self.c_sigma, self.c_pi] {
            let d = &mut self.consts[idx];
            d.ann_plan = d.skel_vars.clone();
            d.pred_ann_len = d.ann_plan.len();
        }
    }
}

/// Splits a declared type into its skeleton variables (first-occurrence
/// order), the subset not occurring in the target type, and whether the
/// target type is `o`.
pub fn split_skeleton(
    st: &Store,
    arrow: TyConId,
    o: TyConId,
    ty: TyId,
) -> (Vec<TyId>, Vec<TyId>, bool) {
    let mut all = Vec::new();
    st.ty_free_vars(ty, &mut all);
    let (_, target) = arrow_parts(st, arrow, ty);
    let mut target_vars = Vec::new();
    st.ty_free_vars(target, &mut target_vars);
    let arg_only: Vec<TyId> = all
        .iter()
        .filter(|v| !target_vars.contains(v))
        .copied()
        .collect();
    let is_pred = matches!(st.ty_node(st.ty_deref(target)), TyNode::Sort(s) if *s == o);
    (all, arg_only, is_pred)
}

/// Per-occurrence instantiations recorded while checking a clause or
/// query: the list pairs each skeleton variable of the occurring
/// constant with the (live) type it was instantiated to.
pub type OccInsts = HashMap<AstId, Vec<(TyId, TyId)>>;

/// The result of checking one clause or query.
#[derive(Debug)]
pub struct Checked {
    /// Instantiations per constant occurrence.
    pub insts: OccInsts,
    /// Types of the clause's implicitly quantified variables.
    pub var_tys: Vec<(String, TyId)>,
}

enum NameRef {
    Lam(TyId),
    Prefix(TyId),
    Const(ConstIdx),
}

pub struct Checker<'a> {
    pub st: &'a mut Store,
    pub sig: &'a mut Sig,
    binders: Vec<(String, TyId)>,
    prefix: Vec<(String, TyId)>,
    vars: Vec<(String, TyId)>,
    insts: OccInsts,
}

impl<'a> Checker<'a> {
    pub fn new(st: &'a mut Store, sig: &'a mut Sig) -> Checker<'a> {
        Checker {
            st,
            sig,
            binders: Vec::new(),
            prefix: Vec::new(),
            vars: Vec::new(),
            insts: HashMap::new(),
        }
    }

    /// Checks an elaborated clause `prefix |- head :- body` and returns
    /// the occurrence instantiations.
    pub fn check_clause(
        &mut self,
        ast: &Ast,
        prefix: &[String],
        head: AstId,
        body: Option<AstId>,
    ) -> Result<Checked, CheckError> {
        for name in prefix {
            let tv = self.st.fresh_tyvar();
            self.prefix.push((name.clone(), tv));
        }
        self.check_clause_head(ast, head)?;
        if let Some(b) = body {
            self.infer_goal(ast, b)?;
        }
        Ok(Checked {
            insts: std::mem::take(&mut self.insts),
            var_tys: std::mem::take(&mut self.vars),
        })
    }

    /// Checks a query goal.
    pub fn check_query(&mut self, ast: &Ast, goal: AstId) -> Result<Checked, CheckError> {
        self.infer_goal(ast, goal)?;
        Ok(Checked {
            insts: std::mem::take(&mut self.insts),
            var_tys: std::mem::take(&mut self.vars),
        })
    }

    /// Checks a standalone term of any type.
    pub fn check_term(&mut self, ast: &Ast, id: AstId) -> Result<(Checked, TyId), CheckError> {
        let ty = self.infer_term(ast, id)?;
        Ok((
            Checked {
                insts: std::mem::take(&mut self.insts),
                var_tys: std::mem::take(&mut self.vars),
            },
            ty,
        ))
    }

    fn check_clause_head(&mut self, ast: &Ast, head: AstId) -> Result<(), CheckError> {
        // head must be a rigid atom: a declared constant, possibly applied
        let (h, _args) = match ast.kind(head) {
            TermKind::App(h, args) => (*h, args.as_slice()),
            _ => (head, &[][..]),
        };
        match ast.kind(h) {
            TermKind::Ident(name) => {
                if self
                    .lookup_name(name)
                    .is_some_and(|r| !matches!(r, NameRef::Const(_)))
                {
                    return err("clause head must be a constant", ast.pos(h));
                }
            }
            TermKind::UVar(_) => return err("clause head must be rigid", ast.pos(h)),
            _ => return err("malformed clause head", ast.pos(h)),
        }
        let ty = self.infer_term(ast, head)?;
        let o = self.st.mk_sort(self.sig.o);
        if !self.st.type_unify(ty, o) {
            return err("clause head is not a proposition", ast.pos(head));
        }
        Ok(())
    }

    fn lookup_name(&self, name: &str) -> Option<NameRef> {
        if let Some((_, ty)) = self.binders.iter().rev().find(|(n, _)| n == name) {
            return Some(NameRef::Lam(*ty));
        }
        if let Some((_, ty)) = self.prefix.iter().rev().find(|(n, _)| n == name) {
            return Some(NameRef::Prefix(*ty));
        }
        self.sig.lookup(name).map(NameRef::Const)
    }

    pub fn infer_goal(&mut self, ast: &Ast, id: AstId) -> Result<(), CheckError> {
        match ast.kind(id).clone() {
            TermKind::True => Ok(()),
            TermKind::And(a, b) | TermKind::Or(a, b) => {
                self.infer_goal(ast, a)?;
                self.infer_goal(ast, b)
            }
            TermKind::Imp(d, g) => {
                self.infer_embedded_clause(ast, d)?;
                self.infer_goal(ast, g)
            }
            TermKind::Quantified(q, arg) => self.infer_quant_body(ast, id, q, arg, true),
            _ => {
                // atomic goal (rigid or flexible head)
                let ty = self.infer_term(ast, id)?;
                let o = self.st.mk_sort(self.sig.o);
                if !self.st.type_unify(ty, o) {
                    return err("goal must have type o", ast.pos(id));
                }
                Ok(())
            }
        }
    }

    fn infer_embedded_clause(&mut self, ast: &Ast, id: AstId) -> Result<(), CheckError> {
        match ast.kind(id).clone() {
            TermKind::And(a, b) => {
                self.infer_embedded_clause(ast, a)?;
                self.infer_embedded_clause(ast, b)
            }
            TermKind::Imp(g, a) => {
                self.infer_goal(ast, g)?;
                self.infer_embedded_clause(ast, a)
            }
            TermKind::Quantified(Quant::Forall, arg) => {
                self.infer_quant_body(ast, id, Quant::Forall, arg, false)
            }
            TermKind::Quantified(Quant::Exists, _) => {
                err("existential quantifier in clause position", ast.pos(id))
            }
            TermKind::Or(..) => err("disjunction in clause position", ast.pos(id)),
            TermKind::True => err("'true' is not a program clause", ast.pos(id)),
            _ => {
                let ty = self.infer_term(ast, id)?;
                let o = self.st.mk_sort(self.sig.o);
                if !self.st.type_unify(ty, o) {
                    return err("clause head is not a proposition", ast.pos(id));
                }
                Ok(())
            }
        }
    }

    /// Types the body of `Pi t` / `Sigma t`; when `t` is a lambda the
    /// bound name scopes over a goal, otherwise `t` must have type
    /// `A -> o`. Records the quantifier's annotation instantiation.
    fn infer_quant_body(
        &mut self,
        ast: &Ast,
        quant_id: AstId,
        q: Quant,
        arg: AstId,
        goal: bool,
    ) -> Result<(), CheckError> {
        let a = self.st.fresh_tyvar();
        self.record_quant_inst(quant_id, q, a);
        match ast.kind(arg).clone() {
            TermKind::Lam(x, b) => {
                self.binders.push((x, a));
                let r = if goal {
                    self.infer_goal(ast, b)
                } else {
                    self.infer_embedded_clause(ast, b)
                };
                self.binders.pop();
                r
            }
            _ => {
                let ty = self.infer_term(ast, arg)?;
                let o = self.st.mk_sort(self.sig.o);
                let ao = self.sig.mk_arrow(self.st, a, o);
                if !self.st.type_unify(ty, ao) {
                    return err(
                        "quantified term must be a predicate abstraction",
                        ast.pos(arg),
                    );
                }
                Ok(())
            }
        }
    }

    fn record_quant_inst(&mut self, quant_id: AstId, q: Quant, a: TyId) {
        let idx = match q {
            Quant::Forall => self.sig.c_pi,
            Quant::Exists => self.sig.c_sigma,
        };
        let skel = self.sig.decl(idx).skel_vars[0];
        self.insts.insert(quant_id, vec![(skel, a)]);
    }

    pub fn infer_term(&mut self, ast: &Ast, id: AstId) -> Result<TyId, CheckError> {
        match ast.kind(id).clone() {
            TermKind::Int(n) => {
                self.sig.int_const(self.st, n);
                Ok(self.st.mk_sort(self.sig.int))
            }
            TermKind::Str(s) => {
                self.sig.str_const(self.st, &s);
                Ok(self.st.mk_sort(self.sig.string))
            }
            TermKind::True => Ok(self.st.mk_sort(self.sig.o)),
            TermKind::Ident(name) => match self.lookup_name(&name) {
                Some(NameRef::Lam(ty)) | Some(NameRef::Prefix(ty)) => Ok(ty),
                Some(NameRef::Const(idx)) => Ok(self.instantiate_const(idx, id)),
                None => err(format!("undeclared identifier '{}'", name), ast.pos(id)),
            },
            TermKind::UVar(name) => {
                if name == "_" {
                    return Ok(self.st.fresh_tyvar());
                }
                if let Some((_, ty)) = self.binders.iter().rev().find(|(n, _)| *n == name) {
                    return Ok(*ty);
                }
                if let Some((_, ty)) = self.prefix.iter().rev().find(|(n, _)| *n == name) {
                    return Ok(*ty);
                }
                if let Some((_, ty)) = self.vars.iter().find(|(n, _)| *n == name) {
                    Ok(*ty)
                } else {
                    let ty = self.st.fresh_tyvar();
                    self.vars.push((name, ty));
                    Ok(ty)
                }
            }
            TermKind::Lam(x, b) => {
                let a = self.st.fresh_tyvar();
                self.binders.push((x, a));
                let tb = self.infer_term(ast, b)?;
                self.binders.pop();
                Ok(self.sig.mk_arrow(self.st, a, tb))
            }
            TermKind::App(h, args) => {
                let mut th = self.infer_term(ast, h)?;
                for a in args {
                    let ta = self.infer_term(ast, a)?;
                    let res = self.st.fresh_tyvar();
                    let want = self.sig.mk_arrow(self.st, ta, res);
                    if !self.st.type_unify(th, want) {
                        return err("argument type mismatch", ast.pos(a));
                    }
                    th = res;
                }
                Ok(th)
            }
            // positive terms: conjunction, disjunction and quantifiers may
            // appear inside arguments, implication may not
            TermKind::And(a, b) | TermKind::Or(a, b) => {
                let o = self.st.mk_sort(self.sig.o);
                let ta = self.infer_term(ast, a)?;
                if !self.st.type_unify(ta, o) {
                    return err("connective argument must have type o", ast.pos(a));
                }
                let tb = self.infer_term(ast, b)?;
                if !self.st.type_unify(tb, o) {
                    return err("connective argument must have type o", ast.pos(b));
                }
                Ok(o)
            }
            TermKind::Quantified(q, arg) => {
                let a = self.st.fresh_tyvar();
                self.record_quant_inst(id, q, a);
                let ty = self.infer_term(ast, arg)?;
                let o = self.st.mk_sort(self.sig.o);
                let ao = self.sig.mk_arrow(self.st, a, o);
                if !self.st.type_unify(ty, ao) {
                    return err("quantifier needs an abstraction", ast.pos(arg));
                }
                Ok(o)
            }
            TermKind::Imp(..) => err(
                "implication may not occur inside argument terms",
                ast.pos(id),
            ),
        }
    }

    /// Instantiates a constant's skeleton with fresh type variables and
    /// records the instantiation for the occurrence.
    fn instantiate_const(&mut self, idx: ConstIdx, occ: AstId) -> TyId {
        let decl = self.sig.decl(idx);
        let skel_vars = decl.skel_vars.clone();
        let ty = decl.ty;
        let map: Vec<(TyId, TyId)> = skel_vars
            .iter()
            .map(|v| (*v, self.st.fresh_tyvar()))
            .collect();
        let inst = self.st.ty_copy(ty, &map);
        self.insts.insert(occ, map);
        inst
    }
}
