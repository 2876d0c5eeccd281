//! Recursive-descent parser for programs, clauses and queries.
//!
//! Operator scopes, tightest first: application, `::`, `,`, `;`, `=>`,
//! `:-` (top level only). `::`, `,`, `;` and `=>` are right
//! associative. A lambda body extends over one application-level term,
//! so composite bodies are parenthesized.

use crate::ast::{Ast, AstId, Decl, Pos, ProgramAst, Quant, TermKind, TypeAst};
use crate::lexer::{lex, LexError, Tok, Token};

#[derive(Debug)]
pub struct ParseError {
    pub msg: String,
    pub pos: Pos,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "parse error at {}: {}", self.pos, self.msg)
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> ParseError {
        ParseError {
            msg: e.msg,
            pos: e.pos,
        }
    }
}

pub struct Parser {
    toks: Vec<Token>,
    i: usize,
}

/// Parses a whole program: declarations and clauses in textual order.
pub fn parse_program(text: &str) -> Result<ProgramAst, ParseError> {
    let mut p = Parser::new(text)?;
    let mut prog = ProgramAst::default();
    while !p.at_end() {
        if p.peek_is(&Tok::KwKind) {
            prog.decls.push(p.parse_kind_decl()?);
        } else if p.peek_is(&Tok::KwType) && p.peek2_is_ident() {
            prog.decls.push(p.parse_type_decl()?);
        } else {
            let clause = p.parse_clause(&mut prog.ast)?;
            prog.clauses.push(clause);
        }
    }
    Ok(prog)
}

/// Parses a single query: a goal terminated by an optional period.
pub fn parse_query(text: &str, ast: &mut Ast) -> Result<AstId, ParseError> {
    let mut p = Parser::new(text)?;
    let g = p.parse_term(ast, Level::Imp)?;
    if p.peek_is(&Tok::Dot) {
        p.next();
    }
    if !p.at_end() {
        return Err(p.err_here("trailing input after query"));
    }
    Ok(g)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    App,
    Cons,
    Comma,
    Semi,
    Imp,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            i: 0,
        })
    }

    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_is(&self, t: &Tok) -> bool {
        self.peek() == Some(t)
    }

    fn peek2_is_ident(&self) -> bool {
        matches!(
            self.toks.get(self.i + 1).map(|t| &t.tok),
            Some(Tok::Ident(_))
        )
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.i.min(self.toks.len().saturating_sub(1)))
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn err_here(&self, msg: &str) -> ParseError {
        ParseError {
            msg: msg.to_string(),
            pos: self.pos(),
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<Pos, ParseError> {
        match self.next() {
            Some(tok) if &tok.tok == t => Ok(tok.pos),
            Some(tok) => Err(ParseError {
                msg: format!("expected {}", what),
                pos: tok.pos,
            }),
            None => Err(ParseError {
                msg: format!("expected {}, found end of input", what),
                pos: Pos { line: 0, col: 0 },
            }),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::Ident(s),
                pos,
            }) => Ok((s, pos)),
            Some(tok) => Err(ParseError {
                msg: format!("expected {}", what),
                pos: tok.pos,
            }),
            None => Err(ParseError {
                msg: format!("expected {}, found end of input", what),
                pos: Pos { line: 0, col: 0 },
            }),
        }
    }

    // ---- declarations ----

    fn parse_kind_decl(&mut self) -> Result<Decl, ParseError> {
        let pos = self.expect(&Tok::KwKind, "'kind'")?;
        let (name, _) = self.expect_ident("kind name")?;
        // arity = number of 'type' occurrences minus one
        let mut count = 0u32;
        loop {
            self.expect(&Tok::KwType, "'type'")?;
            count += 1;
            if self.peek_is(&Tok::Arrow) {
                self.next();
            } else {
                break;
            }
        }
        self.expect(&Tok::Dot, "'.'")?;
        Ok(Decl::Kind {
            name,
            arity: count - 1,
            pos,
        })
    }

    fn parse_type_decl(&mut self) -> Result<Decl, ParseError> {
        let pos = self.expect(&Tok::KwType, "'type'")?;
        let (name, _) = self.expect_ident("constant name")?;
        let ty = self.parse_type()?;
        self.expect(&Tok::Dot, "'.'")?;
        Ok(Decl::Type { name, ty, pos })
    }

    fn parse_type(&mut self) -> Result<TypeAst, ParseError> {
        let lhs = self.parse_type_app()?;
        if self.peek_is(&Tok::Arrow) {
            self.next();
            let rhs = self.parse_type()?; // right associative
            Ok(TypeAst::Arrow(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_type_app(&mut self) -> Result<TypeAst, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let (name, pos) = self.expect_ident("type name")?;
                let mut args = Vec::new();
                while self.type_atom_starts() {
                    args.push(self.parse_type_atom()?);
                }
                Ok(TypeAst::Con(name, args, pos))
            }
            _ => self.parse_type_atom(),
        }
    }

    fn type_atom_starts(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_)) | Some(Tok::UIdent(_)) | Some(Tok::LPar)
        )
    }

    fn parse_type_atom(&mut self) -> Result<TypeAst, ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::Ident(s),
                pos,
            }) => Ok(TypeAst::Con(s, Vec::new(), pos)),
            Some(Token {
                tok: Tok::UIdent(s),
                pos,
            }) => Ok(TypeAst::Var(s, pos)),
            Some(Token { tok: Tok::LPar, .. }) => {
                let t = self.parse_type()?;
                self.expect(&Tok::RPar, "')'")?;
                Ok(t)
            }
            Some(tok) => Err(ParseError {
                msg: "expected a type".into(),
                pos: tok.pos,
            }),
            None => Err(self.err_here("expected a type")),
        }
    }

    // ---- terms, goals and clauses ----

    fn parse_clause(&mut self, ast: &mut Ast) -> Result<AstId, ParseError> {
        let head = self.parse_term(ast, Level::Imp)?;
        let clause = if self.peek_is(&Tok::ColonDash) {
            let pos = self.next().unwrap().pos;
            if self.peek_is(&Tok::Dot) {
                return Err(ParseError {
                    msg: "clause body missing after ':-'".into(),
                    pos: self.pos(),
                });
            }
            let body = self.parse_term(ast, Level::Imp)?;
            ast.add(TermKind::Imp(body, head), pos)
        } else {
            head
        };
        self.expect(&Tok::Dot, "'.' at end of clause")?;
        Ok(clause)
    }

    fn parse_term(&mut self, ast: &mut Ast, level: Level) -> Result<AstId, ParseError> {
        let lhs = if level == Level::App {
            return self.parse_app(ast);
        } else {
            let sub = smaller(level);
            self.parse_term(ast, sub)?
        };
        match (level, self.peek()) {
            (Level::Cons, Some(Tok::Cons)) => {
                let pos = self.next().unwrap().pos;
                let rhs = self.parse_term(ast, Level::Cons)?;
                let head = ast.add(TermKind::Ident("::".into()), pos);
                Ok(ast.add(TermKind::App(head, vec![lhs, rhs]), pos))
            }
            (Level::Comma, Some(Tok::Comma)) => {
                let pos = self.next().unwrap().pos;
                let rhs = self.parse_term(ast, Level::Comma)?;
                Ok(ast.add(TermKind::And(lhs, rhs), pos))
            }
            (Level::Semi, Some(Tok::Semi)) => {
                let pos = self.next().unwrap().pos;
                let rhs = self.parse_term(ast, Level::Semi)?;
                Ok(ast.add(TermKind::Or(lhs, rhs), pos))
            }
            (Level::Imp, Some(Tok::FatArrow)) => {
                let pos = self.next().unwrap().pos;
                let rhs = self.parse_term(ast, Level::Imp)?;
                Ok(ast.add(TermKind::Imp(lhs, rhs), pos))
            }
            _ => Ok(lhs),
        }
    }

    fn parse_app(&mut self, ast: &mut Ast) -> Result<AstId, ParseError> {
        let head = self.parse_prefix(ast)?;
        let mut args = Vec::new();
        while self.atom_starts() {
            args.push(self.parse_prefix(ast)?);
        }
        if args.is_empty() {
            Ok(head)
        } else {
            let pos = ast.pos(head);
            Ok(ast.add(TermKind::App(head, args), pos))
        }
    }

    fn atom_starts(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_))
                | Some(Tok::UIdent(_))
                | Some(Tok::Int(_))
                | Some(Tok::Str(_))
                | Some(Tok::LPar)
                | Some(Tok::LBrack)
                | Some(Tok::KwPi)
                | Some(Tok::KwSigma)
        )
    }

    /// An atom, a lambda `x\ body`, or a quantified term.
    fn parse_prefix(&mut self, ast: &mut Ast) -> Result<AstId, ParseError> {
        match self.peek() {
            Some(Tok::KwPi) | Some(Tok::KwSigma) => {
                let tok = self.next().unwrap();
                let q = if tok.tok == Tok::KwPi {
                    Quant::Forall
                } else {
                    Quant::Exists
                };
                let body = self.parse_prefix(ast)?;
                Ok(ast.add(TermKind::Quantified(q, body), tok.pos))
            }
            Some(Tok::Ident(_)) | Some(Tok::UIdent(_)) => {
                // possibly a lambda binder
                if matches!(
                    self.toks.get(self.i + 1).map(|t| &t.tok),
                    Some(Tok::Backslash)
                ) {
                    let tok = self.next().unwrap();
                    let name = match tok.tok {
                        Tok::Ident(s) | Tok::UIdent(s) => s,
                        _ => unreachable!(),
                    };
                    self.next(); // backslash
                    let body = self.parse_app(ast)?;
                    Ok(ast.add(TermKind::Lam(name, body), tok.pos))
                } else {
                    self.parse_atom(ast)
                }
            }
            _ => self.parse_atom(ast),
        }
    }

    fn parse_atom(&mut self, ast: &mut Ast) -> Result<AstId, ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::Ident(s),
                pos,
            }) => {
                if s == "true" {
                    Ok(ast.add(TermKind::True, pos))
                } else {
                    Ok(ast.add(TermKind::Ident(s), pos))
                }
            }
            Some(Token {
                tok: Tok::UIdent(s),
                pos,
            }) => Ok(ast.add(TermKind::UVar(s), pos)),
            Some(Token {
                tok: Tok::Int(n),
                pos,
            }) => Ok(ast.add(TermKind::Int(n), pos)),
            Some(Token {
                tok: Tok::Str(s),
                pos,
            }) => Ok(ast.add(TermKind::Str(s), pos)),
            Some(Token { tok: Tok::LPar, .. }) => {
                let t = self.parse_term(ast, Level::Imp)?;
                // a parenthesized clause may use the reversed arrow
                let t = if self.peek_is(&Tok::ColonDash) {
                    let pos = self.next().unwrap().pos;
                    let body = self.parse_term(ast, Level::Imp)?;
                    ast.add(TermKind::Imp(body, t), pos)
                } else {
                    t
                };
                self.expect(&Tok::RPar, "')'")?;
                Ok(t)
            }
            Some(Token {
                tok: Tok::LBrack,
                pos,
            }) => self.parse_list(ast, pos),
            Some(tok) => Err(ParseError {
                msg: "expected a term".into(),
                pos: tok.pos,
            }),
            None => Err(self.err_here("expected a term, found end of input")),
        }
    }

    /// `[a, b | T]` and `[]` list sugar.
    fn parse_list(&mut self, ast: &mut Ast, pos: Pos) -> Result<AstId, ParseError> {
        let mut elems = Vec::new();
        if !self.peek_is(&Tok::RBrack) {
            loop {
                elems.push(self.parse_term(ast, Level::Cons)?);
                if self.peek_is(&Tok::Comma) {
                    self.next();
                } else {
                    break;
                }
            }
        }
        let tail = if self.peek_is(&Tok::Bar) {
            self.next();
            Some(self.parse_term(ast, Level::Cons)?)
        } else {
            None
        };
        self.expect(&Tok::RBrack, "']'")?;
        let mut acc = match tail {
            Some(t) => t,
            None => ast.add(TermKind::Ident("nil".into()), pos),
        };
        for e in elems.into_iter().rev() {
            let head = ast.add(TermKind::Ident("::".into()), pos);
            acc = ast.add(TermKind::App(head, vec![e, acc]), pos);
        }
        Ok(acc)
    }
}

fn smaller(l: Level) -> Level {
    match l {
        Level::Imp => Level::Semi,
        Level::Semi => Level::Comma,
        Level::Comma => Level::Cons,
        Level::Cons => Level::App,
        Level::App => Level::App,
    }
}
