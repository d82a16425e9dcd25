//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := disj
//! disj    := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | ('exists' | 'forall') ident (',' ident)* '.' formula | primary
//! primary := '(' formula ')' | 'true' | 'false' | ident '(' vars ')'
//!          | ident ('=' | '!=') ident
//!          | '[' 'lfp' ident '(' vars ')' '.' formula ']' '(' vars ')'
//! ```

use thiserror::Error;

use super::ast::{check_positive, Formula, LfpNode, Var};
use crate::relstruct::Vocabulary;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown predicate `{name}` at {pos}")]
    UnknownPredicate { pos: usize, name: String },
    #[error("arity mismatch for `{name}` at {pos}: expected {expected}, got {got}")]
    ArityMismatch {
        pos: usize,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("relation variable `{name}` occurs negatively in lfp at {pos}")]
    NegativeOccurrence { pos: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Bang,
    Amp,
    Pipe,
    Equals,
    NotEquals,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((i, t));
            i += 1;
        } else if c == '!' {
            if bytes.get(i + 1) == Some(&b'=') {
                toks.push((i, Tok::NotEquals));
                i += 2;
            } else {
                toks.push((i, Tok::Bang));
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            toks.push((start, Tok::Ident(text[start..i].to_string())));
        } else {
            return Err(ParseError::Syntax {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    toks.push((text.len(), Tok::End));
    Ok(toks)
}

const KEYWORDS: [&str; 5] = ["exists", "forall", "lfp", "true", "false"];

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    vocab: &'a Vocabulary,
    /// Relation variables in scope, innermost last: (name, arity).
    relvars: Vec<(String, usize)>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.syntax(format!("expected {what}")),
        }
    }

    fn var_list(&mut self) -> Result<Vec<Var>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut vars = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                vars.push(self.ident("variable")?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(vars)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Tok::Ident(kw) if kw == "exists" || kw == "forall" => {
                self.bump();
                let mut vars = vec![self.ident("bound variable")?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    vars.push(self.ident("bound variable")?);
                }
                self.expect(Tok::Dot, "`.` after quantified variables")?;
                let mut body = self.formula()?;
                for v in vars.into_iter().rev() {
                    body = if kw == "exists" {
                        Formula::Exists(v, Box::new(body))
                    } else {
                        Formula::Forall(v, Box::new(body))
                    };
                }
                Ok(body)
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::LBrack => self.lfp(),
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(_) => {
                let name = self.ident("identifier")?;
                match self.peek() {
                    Tok::LParen => {
                        let args = self.var_list()?;
                        let expected = self.resolve(&name, start)?;
                        if expected != args.len() {
                            return Err(ParseError::ArityMismatch {
                                pos: start,
                                name,
                                expected,
                                got: args.len(),
                            });
                        }
                        Ok(Formula::Atom { pred: name, args })
                    }
                    Tok::Equals => {
                        self.bump();
                        Ok(Formula::Eq(name, self.ident("variable")?))
                    }
                    Tok::NotEquals => {
                        self.bump();
                        Ok(Formula::Eq(name, self.ident("variable")?).negate())
                    }
                    _ => self.syntax("expected `(`, `=` or `!=` after identifier"),
                }
            }
            _ => self.syntax("expected formula"),
        }
    }

    fn resolve(&self, name: &str, pos: usize) -> Result<usize, ParseError> {
        if let Some((_, arity)) = self.relvars.iter().rev().find(|(r, _)| r == name) {
            return Ok(*arity);
        }
        self.vocab.arity(name).ok_or_else(|| ParseError::UnknownPredicate {
            pos,
            name: name.to_string(),
        })
    }

    fn lfp(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos();
        self.expect(Tok::LBrack, "`[`")?;
        match self.bump() {
            Tok::Ident(kw) if kw == "lfp" => {}
            _ => {
                self.at -= 1;
                return self.syntax("expected `lfp`");
            }
        }
        let rel = self.ident("relation variable")?;
        let params = self.var_list()?;
        if params.is_empty() {
            return self.syntax("lfp relation needs at least one parameter");
        }
        for (i, p) in params.iter().enumerate() {
            if params[..i].contains(p) {
                return self.syntax(format!("repeated lfp parameter `{p}`"));
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        self.relvars.push((rel.clone(), params.len()));
        let body = self.formula();
        self.relvars.pop();
        let body = body?;
        self.expect(Tok::RBrack, "`]`")?;
        let args = self.var_list()?;
        if args.len() != params.len() {
            return Err(ParseError::ArityMismatch {
                pos: start,
                name: rel,
                expected: params.len(),
                got: args.len(),
            });
        }
        if !check_positive(&body, &rel) {
            return Err(ParseError::NegativeOccurrence { pos: start, name: rel });
        }
        Ok(Formula::Lfp(Box::new(LfpNode { rel, params, body, args })))
    }
}

/// Parses `text` against `vocab`, resolving predicate arities.
pub fn parse(text: &str, vocab: &Vocabulary) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        vocab,
        relvars: Vec::new(),
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.syntax("unexpected trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::ast::{atom, exists};

    fn dg() -> Vocabulary {
        Vocabulary::digraph_pair()
    }

    #[test]
    fn exists_with_free_x() {
        let f = parse("exists y. R2(x,y)", &dg()).unwrap();
        assert_eq!(f, exists("y", atom("R2", ["x", "y"])));
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["x"]);
    }

    #[test]
    fn transitive_closure() {
        let f = parse("[lfp T(u,v). R1(u,v) | exists w.(R1(u,w) & T(w,v))](x,y)", &dg()).unwrap();
        let Formula::Lfp(l) = &f else { panic!("not an lfp node") };
        assert_eq!(l.rel, "T");
        assert_eq!(l.params, vec!["u", "v"]);
        assert_eq!(l.args, vec!["x", "y"]);
        assert_eq!(f.free_vars().len(), 2);
    }

    #[test]
    fn negative_occurrence_rejected() {
        let err = parse("[lfp T(u). !T(u)](x)", &dg()).unwrap_err();
        assert!(matches!(err, ParseError::NegativeOccurrence { .. }));
        assert!(err.to_string().contains("occurs negatively"));
    }

    #[test]
    fn precedence_and_binds_tighter() {
        let f = parse("R1(x,y) | R2(x,y) & x = y", &dg()).unwrap();
        assert!(matches!(&f, Formula::Or(parts) if matches!(parts[1], Formula::And(_))));
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse("Q(x)", &dg()), Err(ParseError::UnknownPredicate { pos: 0, .. })));
        assert!(matches!(
            parse("x = y & R1(x)", &dg()),
            Err(ParseError::ArityMismatch { pos: 8, expected: 2, got: 1, .. })
        ));
        assert!(matches!(parse("exists . R1(x,y)", &dg()), Err(ParseError::Syntax { pos: 7, .. })));
        assert!(matches!(parse("R1(x,y) R2(x,y)", &dg()), Err(ParseError::Syntax { pos: 8, .. })));
        assert!(matches!(parse("[lfp T(u). T(u)](x,y)", &dg()), Err(ParseError::ArityMismatch { .. })));
    }

    #[test]
    fn display_reparses() {
        let texts = [
            "exists y. R2(x,y)",
            "!(R1(x,y) & R2(y,x)) | forall z. (z = x | R1(x,z))",
            "[lfp T(u,v). R1(u,v) | exists w. R1(u,w) & T(w,v)](x,y) & x != y",
            "exists a, b. R1(a,b) & !R2(b,a)",
        ];
        for t in texts {
            let f = parse(t, &dg()).unwrap();
            let printed = f.to_string();
            assert_eq!(parse(&printed, &dg()).unwrap(), f, "{t} -> {printed}");
        }
    }
}
