//! Concrete-syntax trees for declarations, clauses and goals.
//!
//! Goals and argument terms share one tree language: connectives and
//! quantifiers are ordinary nodes, and the clause/goal grammar is
//! enforced during checking rather than in the parser.

/// Source position (1-based line and column).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

pub type AstId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quant {
    Forall,
    Exists,
}

#[derive(Clone, Debug)]
pub enum TermKind {
    /// Lowercase identifier: a constant or a lambda-bound name,
    /// resolved by scope during checking.
    Ident(String),
    /// Capitalized identifier: an implicitly quantified variable
    /// (universal in clauses, existential in queries). `_` is an
    /// anonymous variable, fresh at each occurrence.
    UVar(String),
    Int(i64),
    Str(String),
    /// Application with flattened argument list.
    App(AstId, Vec<AstId>),
    /// `x\ body`
    Lam(String, AstId),
    /// `G1, G2`
    And(AstId, AstId),
    /// `G1; G2`
    Or(AstId, AstId),
    /// `D => G` (also produced from `A :- G`, reversed)
    Imp(AstId, AstId),
    /// `Pi t` / `Sigma t`; the argument is usually a lambda.
    Quantified(Quant, AstId),
    True,
}

/// Arena of term nodes; clauses and queries are node ids into it.
#[derive(Default, Debug)]
pub struct Ast {
    nodes: Vec<(TermKind, Pos)>,
}

impl Ast {
    pub fn add(&mut self, kind: TermKind, pos: Pos) -> AstId {
        let id = self.nodes.len() as AstId;
        self.nodes.push((kind, pos));
        id
    }

    pub fn kind(&self, id: AstId) -> &TermKind {
        &self.nodes[id as usize].0
    }

    pub fn pos(&self, id: AstId) -> Pos {
        self.nodes[id as usize].1
    }
}

/// A type expression as written in a `type` declaration.
#[derive(Clone, Debug)]
pub enum TypeAst {
    /// Lowercase name: sort or constructor applied to arguments.
    Con(String, Vec<TypeAst>, Pos),
    /// Capitalized name: type variable.
    Var(String, Pos),
    Arrow(Box<TypeAst>, Box<TypeAst>),
}

impl TypeAst {
    pub fn pos(&self) -> Pos {
        match self {
            TypeAst::Con(_, _, p) | TypeAst::Var(_, p) => *p,
            TypeAst::Arrow(a, _) => a.pos(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Decl {
    /// `kind c type -> ... -> type.`
    Kind { name: String, arity: u32, pos: Pos },
    /// `type c <type>.`
    Type { name: String, ty: TypeAst, pos: Pos },
}

/// A parsed program: declarations and clauses in textual order.
#[derive(Default, Debug)]
pub struct ProgramAst {
    pub ast: Ast,
    pub decls: Vec<Decl>,
    pub clauses: Vec<AstId>,
}
