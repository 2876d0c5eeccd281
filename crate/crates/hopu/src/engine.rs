//! The abstract interpreter: depth-first, backtracking search over a
//! goal agenda with universe-counter management, dynamic program
//! extension for augment goals, flexible-goal dispatch and answer
//! extraction.
//!
//! Goals are ordinary kernel terms of type `o`; the interpreter head
//! normalizes a goal and dispatches on the exposed head. This makes
//! dynamically formed goals (a flexible head instantiated to a term
//! built from connectives and quantifiers) follow exactly the same
//! paths as static ones.

use std::collections::HashMap;
use std::rc::Rc;

use crate::compile::{self, Clause, Program};
use crate::normalize::{full_normalize, head_norm, ty_nf, Nf, TyNf};
use crate::parser;
use crate::term::{Env, EnvItem, Node, Store, SymId, TermId, TrailMark};
use crate::ty::TyId;
use crate::typecheck::{Checker, TypeOpt};
use crate::unify::{recheck_residuals, Residuals, Unifier};

#[derive(Debug)]
pub enum LoadError {
    Parse(parser::ParseError),
    Check(crate::typecheck::CheckError),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Parse(e) => write!(f, "{}", e),
            LoadError::Check(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for LoadError {}

impl From<parser::ParseError> for LoadError {
    fn from(e: parser::ParseError) -> Self {
        LoadError::Parse(e)
    }
}

impl From<crate::typecheck::CheckError> for LoadError {
    fn from(e: crate::typecheck::CheckError) -> Self {
        LoadError::Check(e)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Trace {
    pub unify: bool,
    pub normalize: bool,
    pub clauses: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveLimits {
    pub max_answers: usize,
    pub max_steps: u64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_answers: 10,
            max_steps: u64::MAX,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Config {
    pub type_opt: TypeOpt,
    pub limits: SolveLimits,
    pub trace: Trace,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            type_opt: TypeOpt::Full,
            limits: SolveLimits::default(),
            trace: Trace::default(),
        }
    }
}

/// One answer: bindings of the query's named variables (normalized),
/// bindings of its free type variables, and any surviving residual
/// (non-pattern) disagreement pairs.
#[derive(Clone, Debug)]
pub struct Answer {
    pub bindings: Vec<(String, Nf)>,
    pub ty_bindings: Vec<(String, TyNf, bool)>,
    pub residuals: Vec<(Nf, Nf)>,
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub answers: Vec<Answer>,
    /// The stream was cut off by the step limit.
    pub truncated: bool,
    pub steps: u64,
}

pub struct Engine {
    pub st: Store,
    pub program: Program,
    pub config: Config,
    generic_counter: u32,
    syms: Bsyms,
}

/// Cached symbols of the structural constants.
#[derive(Clone, Copy)]
struct Bsyms {
    tru: SymId,
    and: SymId,
    or: SymId,
    imp: SymId,
    sigma: SymId,
    pi: SymId,
}

impl Bsyms {
    fn of(sig: &crate::typecheck::Sig) -> Bsyms {
        Bsyms {
            tru: sig.decl(sig.c_true).sym,
            and: sig.decl(sig.c_and).sym,
            or: sig.decl(sig.c_or).sym,
            imp: sig.decl(sig.c_imp).sym,
            sigma: sig.decl(sig.c_sigma).sym,
            pi: sig.decl(sig.c_pi).sym,
        }
    }
}

impl Engine {
    /// Loads a program from source text.
    pub fn load(text: &str, config: Config) -> Result<Engine, LoadError> {
        let mut st = Store::new();
        // everything built while loading is permanent
        st.set_trailing(false);
        let mut sig = crate::typecheck::Sig::new(&mut st);
        let mut prog_ast = parser::parse_program(text)?;
        for d in &prog_ast.decls {
            match d {
                crate::ast::Decl::Kind { name, arity, pos } => {
                    sig.declare_kind(name, *arity, *pos)?;
                }
                crate::ast::Decl::Type { name, ty, pos } => {
                    sig.declare_type(&mut st, name, ty, *pos)?;
                }
            }
        }
        // clause elaboration and disjunction elimination
        let mut elabbed = Vec::new();
        for c in prog_ast.clauses.clone() {
            elabbed.extend(compile::elab(&mut prog_ast.ast, c)?);
        }
        let mut disj_counter = 1u32;
        let elabbed = compile::eliminate_disjunctions(
            &mut prog_ast.ast,
            &mut st,
            &mut sig,
            elabbed,
            &mut disj_counter,
        )?;
        // type inference per clause
        let mut checked = Vec::new();
        for c in elabbed {
            let ck = {
                let mut checker = Checker::new(&mut st, &mut sig);
                checker.check_clause(&prog_ast.ast, &c.prefix, c.head, c.body)?
            };
            checked.push((c, ck));
        }
        // neededness analysis and annotation plans
        let needed = compile::find_needed(&st, &sig, &prog_ast.ast, &checked);
        sig.finalize_plans(config.type_opt, &needed);
        // encoding
        let mut clauses = Vec::new();
        let mut by_pred: HashMap<SymId, Vec<usize>> = HashMap::new();
        for (c, ck) in &checked {
            let clause = compile::encode_clause(&mut st, &sig, &prog_ast.ast, c, ck)?;
            by_pred.entry(clause.pred).or_default().push(clauses.len());
            clauses.push(clause);
        }
        let syms = Bsyms::of(&sig);
        st.set_trailing(true);
        Ok(Engine {
            st,
            program: Program {
                sig,
                clauses,
                by_pred,
                needed,
                opt: config.type_opt,
            },
            config,
            generic_counter: 0,
            syms,
        })
    }

    /// Parses, checks and encodes a query against the loaded program.
    fn prepare(&mut self, query: &str) -> Result<Prepared, LoadError> {
        let prev = self.st.set_trailing(false);
        let r = self.prepare_inner(query);
        self.st.set_trailing(prev);
        r
    }

    fn prepare_inner(&mut self, query: &str) -> Result<Prepared, LoadError> {
        let mut ast = crate::ast::Ast::default();
        let goal = parser::parse_query(query, &mut ast)?;
        let ck = {
            let mut checker = Checker::new(&mut self.st, &mut self.program.sig);
            checker.check_query(&ast, goal)?
        };
        let (g, qvars, qtyvars) =
            compile::encode_query(&mut self.st, &self.program.sig, &ast, goal, &ck);
        Ok(Prepared {
            goal: g,
            qvars,
            qtyvars,
        })
    }

    /// Runs a query to completion (up to the configured limits).
    pub fn solve(&mut self, query: &str) -> Result<SolveOutcome, LoadError> {
        self.solve_with(query, self.config.limits)
    }

    /// Runs a query under explicit limits.
    pub fn solve_with(
        &mut self,
        query: &str,
        limits: SolveLimits,
    ) -> Result<SolveOutcome, LoadError> {
        let saved = self.config.limits;
        self.config.limits = limits;
        let r = self.solve_inner(query);
        self.config.limits = saved;
        r
    }

    fn solve_inner(&mut self, query: &str) -> Result<SolveOutcome, LoadError> {
        let max = self.config.limits.max_answers;
        let mut solver = self.solver(query)?;
        let mut answers = Vec::new();
        while answers.len() < max {
            match solver.next_answer() {
                Some(a) => answers.push(a),
                None => break,
            }
        }
        let truncated = solver.truncated;
        let steps = solver.steps;
        drop(solver);
        Ok(SolveOutcome {
            answers,
            truncated,
            steps,
        })
    }

    /// Starts an incremental answer stream for a query.
    pub fn solver(&mut self, query: &str) -> Result<Solver<'_>, LoadError> {
        let sizes = self.st.arena_sizes();
        let prepared = self.prepare(query)?;
        let mark = self.st.mark();
        let goal = prepared.goal;
        Ok(Solver {
            base_sizes: sizes,
            eng: self,
            agenda: vec![GoalEntry {
                goal,
                ctx: None,
                univ: 0,
            }],
            choices: Vec::new(),
            residuals: Residuals::default(),
            qvars: prepared.qvars,
            qtyvars: prepared.qtyvars,
            base_mark: mark,
            steps: 0,
            truncated: false,
            state: StreamState::Fresh,
        })
    }

    /// Parses and normalizes a closed term against the loaded program's
    /// signature; handy for stating expected answers in tests and
    /// examples.
    pub fn ground_term(&mut self, text: &str) -> Result<Nf, LoadError> {
        let prev = self.st.set_trailing(false);
        let r = self.ground_term_inner(text);
        self.st.set_trailing(prev);
        r
    }

    fn ground_term_inner(&mut self, text: &str) -> Result<Nf, LoadError> {
        let mut ast = crate::ast::Ast::default();
        let t = parser::parse_query(text, &mut ast)?;
        let ck = {
            let mut checker = Checker::new(&mut self.st, &mut self.program.sig);
            checker.check_term(&ast, t)?.0
        };
        let (g, qvars) = compile::encode_ground(&mut self.st, &self.program.sig, &ast, t, &ck);
        assert!(qvars.is_empty(), "ground term contains free variables");
        Ok(full_normalize(&mut self.st, g))
    }

    fn fresh_generic(&mut self, univ: u32) -> TermId {
        self.generic_counter += 1;
        let name = format!("c#{}", self.generic_counter);
        let sym = self.st.intern_sym(&name, univ);
        self.st.mk_const(sym, univ, vec![])
    }
}

struct Prepared {
    goal: TermId,
    qvars: Vec<(String, TermId)>,
    qtyvars: Vec<TyId>,
}

/// Program context: the base program extended by a stack of dynamic
/// clause blocks, newest first.
type Ctx = Option<Rc<CtxBlock>>;

struct CtxBlock {
    clauses: Vec<Rc<Clause>>,
    parent: Ctx,
}

#[derive(Clone)]
struct GoalEntry {
    goal: TermId,
    ctx: Ctx,
    univ: u32,
}

#[derive(Clone)]
enum CRef {
    Static(usize),
    Dyn(Rc<Clause>),
}

enum Alt {
    OrRight(GoalEntry),
    Clauses {
        atom: TermId,
        ctx: Ctx,
        univ: u32,
        cands: Rc<Vec<CRef>>,
        next: usize,
    },
}

struct ChoicePoint {
    agenda: Vec<GoalEntry>,
    alt: Alt,
    mark: TrailMark,
    res_snap: (Vec<(TermId, TermId)>, bool),
    uc: u32,
}

enum StreamState {
    Fresh,
    Running,
    Exhausted,
}

pub struct Solver<'e> {
    base_sizes: (usize, usize),
    eng: &'e mut Engine,
    agenda: Vec<GoalEntry>,
    choices: Vec<ChoicePoint>,
    residuals: Residuals,
    qvars: Vec<(String, TermId)>,
    qtyvars: Vec<TyId>,
    base_mark: TrailMark,
    pub steps: u64,
    pub truncated: bool,
    state: StreamState,
}

impl<'e> Drop for Solver<'e> {
    fn drop(&mut self) {
        self.eng.st.undo_to(self.base_mark);
        // everything allocated for this query (including its prepared
        // goal) is unreachable now; reclaim the space
        self.eng
            .st
            .truncate_arenas(self.base_sizes.0, self.base_sizes.1);
    }
}

impl<'e> Solver<'e> {
    /// Read access to the engine, e.g. for printing answers.
    pub fn engine(&self) -> &Engine {
        self.eng
    }

    /// Produces the next answer in depth-first order, or `None` when the
    /// stream is exhausted (at which point all bindings are unwound).
    pub fn next_answer(&mut self) -> Option<Answer> {
        match self.state {
            StreamState::Exhausted => return None,
            StreamState::Fresh => {
                self.state = StreamState::Running;
            }
            StreamState::Running => {
                // resume by backtracking into the remaining alternatives
                if !self.backtrack() {
                    return self.exhaust();
                }
            }
        }
        loop {
            if self.steps >= self.eng.config.limits.max_steps {
                self.truncated = true;
                return self.exhaust();
            }
            match self.agenda.pop() {
                None => return Some(self.extract_answer()),
                Some(entry) => {
                    if !self.reduce(entry) && !self.backtrack() {
                        return self.exhaust();
                    }
                }
            }
        }
    }

    fn exhaust(&mut self) -> Option<Answer> {
        self.state = StreamState::Exhausted;
        self.eng.st.undo_to(self.base_mark);
        self.choices.clear();
        self.agenda.clear();
        None
    }

    /// One derivation step. Returns false on failure.
    fn reduce(&mut self, entry: GoalEntry) -> bool {
        self.steps += 1;
        if self.eng.config.trace.normalize {
            eprintln!("[normalize] goal {:?}", entry.goal);
        }
        let v = head_norm(&mut self.eng.st, entry.goal);
        debug_assert_eq!(v.binder, 0, "goal with nonzero binder");
        let bs = self.eng.syms;
        let head_node = self.eng.st.node(v.head).clone();
        match head_node {
            Node::Const { sym, .. } => {
                if sym == bs.tru {
                    true
                } else if sym == bs.and {
                    debug_assert_eq!(v.args.len(), 2);
                    self.agenda.push(GoalEntry {
                        goal: v.args[1],
                        ctx: entry.ctx.clone(),
                        univ: entry.univ,
                    });
                    self.agenda.push(GoalEntry {
                        goal: v.args[0],
                        ..entry
                    });
                    true
                } else if sym == bs.or {
                    debug_assert_eq!(v.args.len(), 2);
                    let right = GoalEntry {
                        goal: v.args[1],
                        ctx: entry.ctx.clone(),
                        univ: entry.univ,
                    };
                    self.push_choice(Alt::OrRight(right));
                    self.agenda.push(GoalEntry {
                        goal: v.args[0],
                        ..entry
                    });
                    true
                } else if sym == bs.imp {
                    debug_assert_eq!(v.args.len(), 2);
                    let eng = &mut *self.eng;
                    let blocks = elab_term(&mut eng.st, bs, v.args[0]);
                    let ctx2 = Some(Rc::new(CtxBlock {
                        clauses: blocks,
                        parent: entry.ctx.clone(),
                    }));
                    self.agenda.push(GoalEntry {
                        goal: v.args[1],
                        ctx: ctx2,
                        univ: entry.univ,
                    });
                    true
                } else if sym == bs.sigma {
                    debug_assert_eq!(v.args.len(), 1);
                    let x = self.eng.st.fresh_var(entry.univ);
                    let sub = self.eng.st.mk_app(v.args[0], vec![x]);
                    self.agenda.push(GoalEntry { goal: sub, ..entry });
                    true
                } else if sym == bs.pi {
                    debug_assert_eq!(v.args.len(), 1);
                    let c = self.eng.fresh_generic(entry.univ + 1);
                    let sub = self.eng.st.mk_app(v.args[0], vec![c]);
                    self.agenda.push(GoalEntry {
                        goal: sub,
                        ctx: entry.ctx,
                        univ: entry.univ + 1,
                    });
                    true
                } else {
                    self.resolve_atom(entry, v.source, sym)
                }
            }
            Node::Var { bind: None, .. } => {
                // still-flexible atom: solve it with an instantiation
                // that makes the goal trivially true
                let n = v.args.len() as u32;
                let st = &mut self.eng.st;
                let tru = st.mk_const(bs.tru, 0, vec![]);
                let binding = st.mk_abs(n, tru);
                st.bind(v.head, binding);
                self.residuals.dirty = true;
                if !self.residuals.pairs.is_empty()
                    && recheck_residuals(st, &mut self.residuals).is_err()
                {
                    return false;
                }
                true
            }
            other => panic!("goal head is not atomic: {:?}", other),
        }
    }

    fn push_choice(&mut self, alt: Alt) {
        self.choices.push(ChoicePoint {
            agenda: self.agenda.clone(),
            alt,
            mark: self.eng.st.mark(),
            res_snap: self.residuals.snapshot(),
            uc: self.eng.generic_counter,
        });
    }

    /// Rigid atomic goal: collect the candidate clauses from the context
    /// stack (newest block first, then the base program) and try them in
    /// order, leaving a choice point when alternatives remain.
    fn resolve_atom(&mut self, entry: GoalEntry, atom: TermId, pred: SymId) -> bool {
        let atom = self.trim_goal_annotations(atom, pred);
        // prefilter on the rigid constant head of the first argument
        let filter = {
            let st = &mut self.eng.st;
            match st.node(st.deref(atom)) {
                Node::App { args, .. } if !args.is_empty() => {
                    let a0 = args[0];
                    let va = head_norm(st, a0);
                    match st.node(va.head) {
                        Node::Const { sym, .. } => Some(*sym),
                        _ => None,
                    }
                }
                _ => None,
            }
        };
        let mut cands: Vec<CRef> = Vec::new();
        let mut ctx = entry.ctx.clone();
        while let Some(block) = ctx {
            for c in &block.clauses {
                if c.pred == pred && compatible(filter, c.first_arg) {
                    cands.push(CRef::Dyn(c.clone()));
                }
            }
            ctx = block.parent.clone();
        }
        if let Some(ixs) = self.eng.program.by_pred.get(&pred) {
            for &i in ixs {
                let c = &self.eng.program.clauses[i];
                if compatible(filter, c.first_arg) {
                    cands.push(CRef::Static(i));
                }
            }
        }
        if cands.is_empty() {
            return false;
        }
        let first = cands[0].clone();
        if cands.len() > 1 {
            self.push_choice(Alt::Clauses {
                atom,
                ctx: entry.ctx.clone(),
                univ: entry.univ,
                cands: Rc::new(cands),
                next: 1,
            });
        }
        self.try_clause(&first, atom, &entry.ctx, entry.univ)
    }

    /// Removes annotation entries a dynamically formed goal head carries
    /// beyond what predicate occurrences use.
    fn trim_goal_annotations(&mut self, atom: TermId, pred: SymId) -> TermId {
        let Some(idx) = self.eng.program.sig.by_sym(pred) else {
            return atom;
        };
        let plen = self.eng.program.sig.decl(idx).pred_ann_len;
        let st = &mut self.eng.st;
        let d = st.deref(atom);
        let (head, args) = match st.node(d).clone() {
            Node::App { head, args } => (st.deref(head), args.to_vec()),
            _ => (d, Vec::new()),
        };
        match st.node(head).clone() {
            Node::Const { sym, univ, anns } if anns.len() > plen => {
                let trimmed = anns[..plen].to_vec();
                let c2 = st.mk_const(sym, univ, trimmed);
                st.mk_app(c2, args)
            }
            _ => atom,
        }
    }

    fn try_clause(&mut self, cref: &CRef, atom: TermId, ctx: &Ctx, univ: u32) -> bool {
        let clause = match cref {
            CRef::Static(i) => self.eng.program.clauses[*i].clone(),
            CRef::Dyn(c) => (**c).clone(),
        };
        if self.eng.config.trace.clauses {
            eprintln!(
                "[clauses] trying clause for '{}'",
                self.eng.st.sym_name(clause.pred)
            );
        }
        let (head, body) = instantiate(&mut self.eng.st, &clause, univ);
        let ok = {
            let mut u = Unifier::new(&mut self.eng.st, &mut self.residuals);
            u.trace = self.eng.config.trace.unify;
            u.unify_pairs(vec![(atom, head)]).is_ok()
        };
        if !ok {
            return false;
        }
        if self.residuals.dirty
            && !self.residuals.pairs.is_empty()
            && recheck_residuals(&mut self.eng.st, &mut self.residuals).is_err()
        {
            return false;
        }
        if let Some(b) = body {
            self.agenda.push(GoalEntry {
                goal: b,
                ctx: ctx.clone(),
                univ,
            });
        }
        true
    }

    /// Restores the most recent choice point with remaining
    /// alternatives. Returns false when none is left.
    fn backtrack(&mut self) -> bool {
        loop {
            let Some(cp) = self.choices.last() else {
                return false;
            };
            self.eng.st.undo_to(cp.mark);
            self.residuals.restore(cp.res_snap.clone());
            self.eng.generic_counter = cp.uc;
            match &cp.alt {
                Alt::OrRight(right) => {
                    self.agenda = cp.agenda.clone();
                    let right = right.clone();
                    self.choices.pop();
                    self.agenda.push(right);
                    return true;
                }
                Alt::Clauses { cands, next, .. } => {
                    let (cands, next) = (cands.clone(), *next);
                    if next >= cands.len() {
                        self.choices.pop();
                        continue;
                    }
                    let (atom, ctx, univ) = match &self.choices.last().unwrap().alt {
                        Alt::Clauses {
                            atom, ctx, univ, ..
                        } => (*atom, ctx.clone(), *univ),
                        _ => unreachable!(),
                    };
                    self.agenda = self.choices.last().unwrap().agenda.clone();
                    let is_last = next + 1 == cands.len();
                    if is_last {
                        self.choices.pop();
                    } else if let Alt::Clauses { next: n, .. } =
                        &mut self.choices.last_mut().unwrap().alt
                    {
                        *n = next + 1;
                    }
                    if self.try_clause(&cands[next], atom, &ctx, univ) {
                        return true;
                    }
                    // this candidate failed; loop to undo and continue
                }
            }
        }
    }

    fn extract_answer(&mut self) -> Answer {
        let st = &mut self.eng.st;
        let bindings = self
            .qvars
            .iter()
            .map(|(n, v)| (n.clone(), full_normalize(st, *v)))
            .collect();
        let residuals = self
            .residuals
            .pairs
            .clone()
            .into_iter()
            .map(|(l, r)| (full_normalize(st, l), full_normalize(st, r)))
            .collect();
        let ty_bindings = self
            .qtyvars
            .iter()
            .enumerate()
            .map(|(i, tv)| {
                let d = st.ty_deref(*tv);
                let bound = !matches!(st.ty_node(d), crate::ty::TyNode::Var { .. });
                (format!("A{}", i + 1), ty_nf(st, *tv), bound)
            })
            .collect();
        Answer {
            bindings,
            ty_bindings,
            residuals,
        }
    }
}

fn compatible(goal_first: Option<SymId>, clause_first: Option<SymId>) -> bool {
    match (goal_first, clause_first) {
        (Some(a), Some(b)) => a == b,
        _ => true,
    }
}

/// Instantiates a clause at universe `univ`: template type variables
/// are refreshed by copying the annotated spine, the term prefix by a
/// suspension over fresh logic variables.
fn instantiate(st: &mut Store, clause: &Clause, univ: u32) -> (TermId, Option<TermId>) {
    let (mut h, mut b) = (clause.head, clause.body);
    if !clause.tyvars.is_empty() {
        let tymap: Vec<(TyId, TyId)> = clause
            .tyvars
            .iter()
            .map(|v| (*v, st.fresh_tyvar()))
            .collect();
        let mut memo = HashMap::new();
        h = copy_term_types(st, h, &tymap, &mut memo);
        b = b.map(|x| copy_term_types(st, x, &tymap, &mut memo));
    }
    if clause.nvars > 0 {
        let mut env = Env::nil();
        for _ in 0..clause.nvars {
            let v = st.fresh_var(univ);
            env = Env::cons(EnvItem::Bind(v, 0), &env);
        }
        h = st.mk_susp(h, clause.nvars, 0, env.clone());
        b = b.map(|x| st.mk_susp(x, clause.nvars, 0, env.clone()));
    }
    (h, b)
}

/// Rebuilds the paths of a clause template that carry type annotations,
/// substituting fresh type variables; everything else is shared.
fn copy_term_types(
    st: &mut Store,
    t: TermId,
    tymap: &[(TyId, TyId)],
    memo: &mut HashMap<TermId, TermId>,
) -> TermId {
    if let Some(r) = memo.get(&t) {
        return *r;
    }
    let out = match st.node(t).clone() {
        Node::Const { sym, univ, anns } if !anns.is_empty() => {
            let new: Vec<TyId> = anns.iter().map(|a| st.ty_copy(*a, tymap)).collect();
            if new.iter().zip(anns.iter()).all(|(a, b)| a == b) {
                t
            } else {
                st.mk_const(sym, univ, new)
            }
        }
        Node::App { head, args } => {
            let h2 = copy_term_types(st, head, tymap, memo);
            let a2: Vec<TermId> = args
                .iter()
                .map(|a| copy_term_types(st, *a, tymap, memo))
                .collect();
            if h2 == head && a2.iter().zip(args.iter()).all(|(x, y)| x == y) {
                t
            } else {
                st.alloc(Node::App {
                    head: h2,
                    args: a2.into(),
                })
            }
        }
        Node::Abs { n, body } => {
            let b2 = copy_term_types(st, body, tymap, memo);
            if b2 == body {
                t
            } else {
                st.alloc(Node::Abs { n, body: b2 })
            }
        }
        _ => t,
    };
    memo.insert(t, out);
    out
}

/// Elaborates a dynamically formed clause term (the left side of an
/// augment goal) into its atomic or implicational components.
fn elab_term(st: &mut Store, bs: Bsyms, t: TermId) -> Vec<Rc<Clause>> {
    let mut out = Vec::new();
    elab_term_rec(st, bs, t, 0, &mut out);
    out
}

fn elab_term_rec(st: &mut Store, bs: Bsyms, t: TermId, nprefix: u32, out: &mut Vec<Rc<Clause>>) {
    let v = head_norm(st, t);
    debug_assert_eq!(v.binder, 0, "clause term with nonzero binder");
    let head_node = st.node(v.head).clone();
    match head_node {
        Node::Const { sym, .. } if sym == bs.and => {
            elab_term_rec(st, bs, v.args[0], nprefix, out);
            elab_term_rec(st, bs, v.args[1], nprefix, out);
        }
        Node::Const { sym, .. } if sym == bs.pi => {
            let f = v.args[0];
            let q = crate::normalize::hnorm(st, f, 0, 0, &Env::nil(), false);
            let fd = st.deref(q.t);
            match st.node(fd).clone() {
                Node::Abs { n, body } => {
                    let rest = if n > 1 { st.mk_abs(n - 1, body) } else { body };
                    elab_term_rec(st, bs, rest, nprefix + 1, out);
                }
                _ => {
                    // eta: treat f as x\ (f x)
                    let fs = crate::normalize::suspend(st, fd, 0, 1, &Env::nil());
                    let db = st.mk_db(1);
                    let app = st.mk_app(fs, vec![db]);
                    elab_term_rec(st, bs, app, nprefix + 1, out);
                }
            }
        }
        Node::Const { sym, .. } if sym == bs.imp => {
            let head = v.args[1];
            let body = v.args[0];
            let pred = clause_head_pred(st, head);
            out.push(Rc::new(Clause {
                pred,
                nvars: nprefix,
                tyvars: Vec::new(),
                head,
                body: Some(body),
                first_arg: None,
            }));
        }
        Node::Const { sym, .. } => {
            out.push(Rc::new(Clause {
                pred: sym,
                nvars: nprefix,
                tyvars: Vec::new(),
                head: v.source,
                body: None,
                first_arg: None,
            }));
        }
        other => panic!("dynamic clause with non-rigid structure: {:?}", other),
    }
}

fn clause_head_pred(st: &mut Store, head: TermId) -> SymId {
    let v = head_norm(st, head);
    match st.node(v.head) {
        Node::Const { sym, .. } => *sym,
        other => panic!("dynamic clause head is not rigid: {:?}", other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::Nf;

    fn engine(text: &str) -> Engine {
        Engine::load(text, Config::default()).unwrap()
    }

    fn corpus(name: &str) -> String {
        std::fs::read_to_string(format!("{}/corpus/{}", env!("CARGO_MANIFEST_DIR"), name)).unwrap()
    }

    #[test]
    fn copy_roundtrips_a_first_order_term() {
        let mut e = engine(&corpus("copy.lp"));
        let out = e.solve("copy (app a a) R.").unwrap();
        assert_eq!(out.answers.len(), 1);
        let (name, nf) = &out.answers[0].bindings[0];
        assert_eq!(name, "R");
        match nf {
            Nf::App { args, .. } => assert_eq!(args.len(), 2),
            other => panic!("expected app a a, got {:?}", other),
        }
        assert!(out.answers[0].residuals.is_empty());
    }

    #[test]
    fn copy_roundtrips_an_abstraction() {
        let mut e = engine(&corpus("copy.lp"));
        let out = e.solve("copy (abs x\\ app x x) R.").unwrap();
        assert_eq!(out.answers.len(), 1);
        let (_, nf) = &out.answers[0].bindings[0];
        // R = abs (x\ app x x)
        match nf {
            Nf::App { head, args } => {
                assert!(matches!(**head, Nf::Const { .. }));
                assert!(matches!(args[0], Nf::Abs { n: 1, .. }));
            }
            other => panic!("expected abs _, got {:?}", other),
        }
    }

    #[test]
    fn augment_goal_extent_is_dynamic() {
        let text = "kind i type.\ntype k i.\ntype q i -> o.\n";
        let mut e = engine(text);
        let out = e.solve("q k => q k.").unwrap();
        assert_eq!(out.answers.len(), 1);
        let out = e.solve("(q k => q k), q k.").unwrap();
        assert_eq!(out.answers.len(), 0);
    }

    #[test]
    fn quantifier_scope_is_respected() {
        let text = "kind i type.\ntype p i -> i -> o.\np X X.\n";
        let mut e = engine(text);
        let out = e.solve("Sigma y\\ (Pi z\\ (p y z)).").unwrap();
        assert_eq!(out.answers.len(), 0, "escaping constant must be rejected");
        let out = e.solve("Pi z\\ (Sigma y\\ (p y z)).").unwrap();
        assert_eq!(out.answers.len(), 1);
    }

    #[test]
    fn mappred_with_predicate_constant() {
        let mut e = engine(&corpus("mappred.lp"));
        let out = e.solve("mappred (bob::sue::nil) parent L.").unwrap();
        assert_eq!(out.answers.len(), 1);
        let mut p = crate::pretty::Printer::new(&e.st, &e.program.sig.tycons);
        let s = p.term(&out.answers[0].bindings[0].1);
        assert_eq!(s, "john :: dick :: nil");
    }

    #[test]
    fn mappred_with_dynamic_goal_structure() {
        let mut e = engine(&corpus("mappred.lp"));
        let out = e
            .solve("mappred (bob::sue::nil) (x\\ y\\ (Sigma z\\ (parent x z, parent z y))) L.")
            .unwrap();
        assert_eq!(out.answers.len(), 1);
        let mut p = crate::pretty::Printer::new(&e.st, &e.program.sig.tycons);
        let s = p.term(&out.answers[0].bindings[0].1);
        assert_eq!(s, "mary :: kate :: nil");
    }

    #[test]
    fn mapfun_defers_a_residual_pair() {
        let mut e = engine(&corpus("mapfun.lp"));
        let out = e.solve("mapfun (a::nil) F ((g a)::nil).").unwrap();
        assert_eq!(out.answers.len(), 1, "exactly one qualified answer");
        let ans = &out.answers[0];
        // F reported unbound
        assert!(matches!(ans.bindings[0].1, Nf::Var { .. }));
        assert_eq!(ans.residuals.len(), 1);
        let mut p = crate::pretty::Printer::new(&e.st, &e.program.sig.tycons);
        p.adopt_answer_names(ans);
        let l = p.term(&ans.residuals[0].0);
        let r = p.term(&ans.residuals[0].1);
        assert_eq!((l.as_str(), r.as_str()), ("F a", "g a"));
    }

    #[test]
    fn backtracking_restores_the_store() {
        let mut e = engine(&corpus("copy.lp"));
        let snap = e.st.snapshot();
        let out = e.solve("copy (app (abs x\\ x) a) R.").unwrap();
        assert_eq!(out.answers.len(), 1);
        assert!(e.st.agrees_with(&snap), "trail and graph fully restored");
    }
}
