//! Printing of normalized terms, types and answers.
//!
//! Bound-variable display names are generated `x1, x2, ...`
//! outermost-first; unbound logic variables reuse the query variable's
//! name when the variable is the query variable itself, and get `_1`,
//! `_2`, ... otherwise. Answer text is a deterministic function of the
//! program, the query and the configuration.

use std::collections::HashMap;

use crate::engine::Answer;
use crate::normalize::{Nf, TyNf};
use crate::term::Store;
use crate::ty::TyCons;

pub struct Printer<'a> {
    st: &'a Store,
    tycons: &'a TyCons,
    var_names: HashMap<u32, String>,
    next_anon: u32,
    binder_depth: u32,
}

const P_TOP: u8 = 0;
const P_CONS: u8 = 1;
const P_APP: u8 = 2;

impl<'a> Printer<'a> {
    pub fn new(st: &'a Store, tycons: &'a TyCons) -> Printer<'a> {
        Printer {
            st,
            tycons,
            var_names: HashMap::new(),
            next_anon: 0,
            binder_depth: 0,
        }
    }

    /// Gives unbound variables appearing as direct answer bindings the
    /// name of the query variable they answer.
    pub fn adopt_answer_names(&mut self, answer: &Answer) {
        for (name, nf) in &answer.bindings {
            if let Nf::Var { id } = nf {
                self.var_names.entry(*id).or_insert_with(|| name.clone());
            }
        }
    }

    pub fn term(&mut self, nf: &Nf) -> String {
        let mut binders = Vec::new();
        self.go(nf, P_TOP, &mut binders)
    }

    fn var_name(&mut self, id: u32) -> String {
        if let Some(n) = self.var_names.get(&id) {
            return n.clone();
        }
        self.next_anon += 1;
        let n = format!("_{}", self.next_anon);
        self.var_names.insert(id, n.clone());
        n
    }

    fn go(&mut self, nf: &Nf, prec: u8, binders: &mut Vec<String>) -> String {
        match nf {
            Nf::Const { sym, .. } => self.st.sym_name(*sym).to_string(),
            Nf::Var { id } => self.var_name(*id),
            Nf::Db(i) => {
                let i = *i as usize;
                if i <= binders.len() {
                    binders[binders.len() - i].clone()
                } else {
                    format!("#{}", i)
                }
            }
            Nf::Abs { n, body } => {
                let mut names = Vec::new();
                for _ in 0..*n {
                    self.binder_depth += 1;
                    names.push(format!("x{}", self.binder_depth));
                }
                binders.extend(names.iter().cloned());
                let inner = self.go(body, P_TOP, binders);
                for _ in 0..*n {
                    binders.pop();
                }
                self.binder_depth -= n;
                let mut out = String::new();
                for nm in &names {
                    out.push_str(nm);
                    out.push_str("\\ ");
                }
                out.push_str(&inner);
                parens_if(prec > P_TOP, out)
            }
            Nf::App { head, args } => {
                if let Nf::Const { sym, .. } = &**head {
                    let name = self.st.sym_name(*sym);
                    if args.len() == 2 {
                        match name {
                            "::" => {
                                let l = self.go(&args[0], P_APP, binders);
                                let r = self.go(&args[1], P_CONS, binders);
                                return parens_if(prec > P_CONS, format!("{} :: {}", l, r));
                            }
                            "," | ";" | "=>" => {
                                let l = self.go(&args[0], P_CONS, binders);
                                let r = self.go(&args[1], P_TOP, binders);
                                let sep = if name == "," {
                                    ", ".to_string()
                                } else {
                                    format!(" {} ", name)
                                };
                                return parens_if(prec > P_TOP, format!("{}{}{}", l, sep, r));
                            }
                            _ => {}
                        }
                    }
                }
                let h = self.go(head, P_APP + 1, binders);
                let mut out = h;
                for a in args {
                    out.push(' ');
                    out.push_str(&self.go(a, P_APP + 1, binders));
                }
                parens_if(prec > P_APP, out)
            }
        }
    }

    pub fn ty(&self, t: &TyNf) -> String {
        self.ty_prec(t, false)
    }

    fn ty_prec(&self, t: &TyNf, arg: bool) -> String {
        match t {
            TyNf::Var(id) => format!("A{}", id),
            TyNf::Sort(c) => self.tycons.info(*c).name.clone(),
            TyNf::App(c, args) => {
                let name = &self.tycons.info(*c).name;
                if name == "->" && args.len() == 2 {
                    let l = self.ty_prec(&args[0], true);
                    let r = self.ty_prec(&args[1], false);
                    parens_if(arg, format!("{} -> {}", l, r))
                } else {
                    let mut out = name.clone();
                    for a in args {
                        out.push(' ');
                        out.push_str(&self.ty_prec(a, true));
                    }
                    parens_if(arg && !args.is_empty(), out)
                }
            }
        }
    }

    /// Renders one answer: `X = t, Y = s` plus `| <l, r>` residual lines.
    /// An answer with no visible bindings renders as `yes`.
    pub fn answer(&mut self, ans: &Answer) -> Vec<String> {
        self.adopt_answer_names(ans);
        let mut lines = Vec::new();
        let mut parts: Vec<String> = Vec::new();
        for (name, nf) in &ans.bindings {
            let t = self.term(nf);
            parts.push(format!("{} = {}", name, t));
        }
        for (name, ty, bound) in &ans.ty_bindings {
            if *bound {
                parts.push(format!("{} = {}", name, self.ty(ty)));
            }
        }
        if parts.is_empty() {
            lines.push("yes".to_string());
        } else {
            lines.push(parts.join(", "));
        }
        for (l, r) in &ans.residuals {
            let ls = self.term(l);
            let rs = self.term(r);
            lines.push(format!("| <{}, {}>", ls, rs));
        }
        lines
    }
}

fn parens_if(cond: bool, s: String) -> String {
    if cond {
        format!("({})", s)
    } else {
        s
    }
}
