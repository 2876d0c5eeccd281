//! Tokenizer for the concrete syntax.

use crate::ast::Pos;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    UIdent(String),
    Int(i64),
    Str(String),
    KwKind,
    KwType,
    KwPi,
    KwSigma,
    Dot,
    Comma,
    Semi,
    LPar,
    RPar,
    LBrack,
    RBrack,
    Bar,
    Backslash,
    Arrow,     // ->
    FatArrow,  // =>
    ColonDash, // :-
    Cons,      // ::
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug)]
pub struct LexError {
    pub msg: String,
    pub pos: Pos,
}

impl std::fmt::Display for LexError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "lex error at {}: {}", self.pos, self.msg)
    }
}

pub fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! pos {
        () => {
            Pos { line, col }
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let p = pos!();
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => {
                col += 1;
                i += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push(Token {
                    tok: Tok::LPar,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            ')' => {
                out.push(Token {
                    tok: Tok::RPar,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            '[' => {
                out.push(Token {
                    tok: Tok::LBrack,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            ']' => {
                out.push(Token {
                    tok: Tok::RBrack,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            '|' => {
                out.push(Token {
                    tok: Tok::Bar,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            ',' => {
                out.push(Token {
                    tok: Tok::Comma,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            ';' => {
                out.push(Token {
                    tok: Tok::Semi,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            '.' => {
                out.push(Token {
                    tok: Tok::Dot,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            '\\' => {
                out.push(Token {
                    tok: Tok::Backslash,
                    pos: p,
                });
                i += 1;
                col += 1;
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    out.push(Token {
                        tok: Tok::Arrow,
                        pos: p,
                    });
                    i += 2;
                    col += 2;
                } else {
                    return Err(LexError {
                        msg: "expected '->'".into(),
                        pos: p,
                    });
                }
            }
            '=' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    out.push(Token {
                        tok: Tok::FatArrow,
                        pos: p,
                    });
                    i += 2;
                    col += 2;
                } else {
                    return Err(LexError {
                        msg: "expected '=>'".into(),
                        pos: p,
                    });
                }
            }
            ':' => {
                if i + 1 < chars.len() && chars[i + 1] == '-' {
                    out.push(Token {
                        tok: Tok::ColonDash,
                        pos: p,
                    });
                    i += 2;
                    col += 2;
                } else if i + 1 < chars.len() && chars[i + 1] == ':' {
                    out.push(Token {
                        tok: Tok::Cons,
                        pos: p,
                    });
                    i += 2;
                    col += 2;
                } else {
                    return Err(LexError {
                        msg: "expected ':-' or '::'".into(),
                        pos: p,
                    });
                }
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                col += 1;
                loop {
                    if i >= chars.len() {
                        return Err(LexError {
                            msg: "unterminated string literal".into(),
                            pos: p,
                        });
                    }
                    let c2 = chars[i];
                    if c2 == '"' {
                        i += 1;
                        col += 1;
                        break;
                    }
                    if c2 == '\n' {
                        return Err(LexError {
                            msg: "newline in string literal".into(),
                            pos: p,
                        });
                    }
                    s.push(c2);
                    i += 1;
                    col += 1;
                }
                out.push(Token {
                    tok: Tok::Str(s),
                    pos: p,
                });
            }
            c if c.is_ascii_digit() => {
                let mut n: i64 = 0;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    n = n * 10 + (chars[i] as i64 - '0' as i64);
                    i += 1;
                    col += 1;
                }
                out.push(Token {
                    tok: Tok::Int(n),
                    pos: p,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                let tok = match s.as_str() {
                    "kind" => Tok::KwKind,
                    "type" => Tok::KwType,
                    "Pi" => Tok::KwPi,
                    "Sigma" => Tok::KwSigma,
                    _ => {
                        let first = s.chars().next().unwrap();
                        if first.is_uppercase() || first == '_' {
                            Tok::UIdent(s)
                        } else {
                            Tok::Ident(s)
                        }
                    }
                };
                out.push(Token { tok, pos: p });
            }
            other => {
                return Err(LexError {
                    msg: format!("unexpected character '{}'", other),
                    pos: p,
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_clause_syntax() {
        let toks = lex("copy (app T1 T2) (app T3 T4) :- copy T1 T3, copy T2 T4.").unwrap();
        assert!(matches!(toks[0].tok, Tok::Ident(ref s) if s == "copy"));
        assert!(toks.iter().any(|t| t.tok == Tok::ColonDash));
        assert!(toks.iter().any(|t| t.tok == Tok::Comma));
        assert_eq!(toks.last().unwrap().tok, Tok::Dot);
    }

    #[test]
    fn lexes_lambda_and_quantifier() {
        let toks = lex("Pi c\\ (copy c c => copy (T1 c) (T2 c))").unwrap();
        assert_eq!(toks[0].tok, Tok::KwPi);
        assert!(toks.iter().any(|t| t.tok == Tok::Backslash));
        assert!(toks.iter().any(|t| t.tok == Tok::FatArrow));
    }

    #[test]
    fn lexes_lists_and_literals() {
        let toks = lex("[1, 2 | T] \"abc\" 42").unwrap();
        assert_eq!(toks[0].tok, Tok::LBrack);
        assert!(toks.iter().any(|t| t.tok == Tok::Bar));
        assert!(toks
            .iter()
            .any(|t| matches!(t.tok, Tok::Str(ref s) if s == "abc")));
        assert!(toks.iter().any(|t| t.tok == Tok::Int(42)));
    }

    #[test]
    fn comments_are_skipped() {
        let toks = lex("a % comment , with stuff\nb").unwrap();
        assert_eq!(toks.len(), 2);
    }

    #[test]
    fn reports_position() {
        let err = lex("foo\n  @").unwrap_err();
        assert_eq!(err.pos.line, 2);
        assert_eq!(err.pos.col, 3);
    }
}
