//! Parser for the formula surface syntax.
//!
//! Prefix operators (negation and the modalities) bind tightest; `&` binds
//! tighter than `|`, which binds tighter than `->`; `->` associates to the
//! right, `&` and `|` to the left. `K`, `Khat`, `B`, `Bhat`, `true`, `false`
//! are reserved words.

use thiserror::Error;

use crate::formula::Formula;
use crate::model::{Agent, Prop};

#[derive(Error, Clone, PartialEq, Eq, Debug)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, msg: msg.into() })
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Nat(u32),
    True,
    False,
    Know,
    KnowHat,
    Belief,
    BeliefHat,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Hash,
    BoxOp,
    DiamondOp,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Nat(n) => format!("number {n}"),
            Tok::True => "'true'".into(),
            Tok::False => "'false'".into(),
            Tok::Know => "'K'".into(),
            Tok::KnowHat => "'Khat'".into(),
            Tok::Belief => "'B'".into(),
            Tok::BeliefHat => "'Bhat'".into(),
            Tok::Tilde => "'~'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::LBrack => "'['".into(),
            Tok::RBrack => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Hash => "'#'".into(),
            Tok::BoxOp => "'[]'".into(),
            Tok::DiamondOp => "'<>'".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '~' => {
                toks.push((i, Tok::Tilde));
                i += 1;
            }
            '&' => {
                toks.push((i, Tok::Amp));
                i += 1;
            }
            '|' => {
                toks.push((i, Tok::Pipe));
                i += 1;
            }
            '#' => {
                toks.push((i, Tok::Hash));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '[' => {
                if bytes.get(i + 1) == Some(&b']') {
                    toks.push((i, Tok::BoxOp));
                    i += 2;
                } else {
                    toks.push((i, Tok::LBrack));
                    i += 1;
                }
            }
            ']' => {
                toks.push((i, Tok::RBrack));
                i += 1;
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::DiamondOp));
                    i += 2;
                } else {
                    return err(i, "expected '<>'");
                }
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Arrow));
                    i += 2;
                } else {
                    return err(i, "expected '->'");
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let raw = &text[start..i];
                match raw.parse::<u32>() {
                    Ok(n) => toks.push((start, Tok::Nat(n))),
                    Err(_) => return err(start, format!("number {raw} is out of range")),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_ascii_alphanumeric() || c == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "K" => Tok::Know,
                    "Khat" => Tok::KnowHat,
                    "B" => Tok::Belief,
                    "Bhat" => Tok::BeliefHat,
                    _ => Tok::Ident(word.to_owned()),
                };
                toks.push((start, tok));
            }
            _ => return err(i, format!("unexpected character {c:?}")),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(_, t)| t.clone());
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.i += 1;
                Ok(())
            }
            Some(t) => err(self.pos(), format!("expected {}, found {}", want.describe(), t.describe())),
            None => err(self.end, format!("expected {}, found end of input", want.describe())),
        }
    }

    fn agent(&mut self) -> Result<Agent, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(s)) => {
                Agent::new(s).map_err(|e| ParseError { pos, msg: e.to_string() })
            }
            Some(t) => err(pos, format!("expected agent name, found {}", t.describe())),
            None => err(self.end, "expected agent name, found end of input"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.or_level()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.i += 1;
            let right = self.formula()?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and_level()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.i += 1;
            let r = self.and_level()?;
            f = Formula::or(f, r);
        }
        Ok(f)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.i += 1;
            let r = self.unary()?;
            f = Formula::and(f, r);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Tilde) => {
                self.i += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Know) => {
                self.i += 1;
                self.expect(Tok::LBrack)?;
                let a = self.agent()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::know(a, self.unary()?))
            }
            Some(Tok::KnowHat) => {
                self.i += 1;
                self.expect(Tok::LBrack)?;
                let a = self.agent()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::khat(a, self.unary()?))
            }
            Some(Tok::Belief) => {
                self.i += 1;
                self.expect(Tok::LBrack)?;
                let a = self.agent()?;
                match self.peek() {
                    Some(Tok::RBrack) => {
                        self.i += 1;
                        Ok(Formula::belief(a, self.unary()?))
                    }
                    Some(Tok::Pipe) => {
                        self.i += 1;
                        let cond = self.formula()?;
                        self.expect(Tok::RBrack)?;
                        Ok(Formula::cond_belief(a, cond, self.unary()?))
                    }
                    Some(Tok::Hash) => {
                        self.i += 1;
                        let pos = self.pos();
                        let n = match self.bump() {
                            Some(Tok::Nat(n)) => n,
                            Some(t) => return err(pos, format!("expected degree, found {}", t.describe())),
                            None => return err(self.end, "expected degree, found end of input"),
                        };
                        self.expect(Tok::RBrack)?;
                        Ok(Formula::deg_belief(a, n, self.unary()?))
                    }
                    Some(t) => err(self.pos(), format!("expected ']', '|' or '#', found {}", t.describe())),
                    None => err(self.end, "expected ']', '|' or '#', found end of input"),
                }
            }
            Some(Tok::BeliefHat) => {
                self.i += 1;
                self.expect(Tok::LBrack)?;
                let a = self.agent()?;
                self.expect(Tok::Pipe)?;
                let cond = self.formula()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::bhat(a, cond, self.unary()?))
            }
            Some(Tok::BoxOp) => {
                self.i += 1;
                self.expect(Tok::LBrack)?;
                let a = self.agent()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::safe(a, self.unary()?))
            }
            Some(Tok::DiamondOp) => {
                self.i += 1;
                self.expect(Tok::LBrack)?;
                let a = self.agent()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::diamond(a, self.unary()?))
            }
            Some(Tok::True) => {
                self.i += 1;
                Ok(Formula::Top)
            }
            Some(Tok::False) => {
                self.i += 1;
                Ok(Formula::Bot)
            }
            Some(Tok::Ident(_)) => {
                let Some(Tok::Ident(s)) = self.bump() else { unreachable!() };
                Prop::new(s)
                    .map(Formula::Atom)
                    .map_err(|e| ParseError { pos, msg: e.to_string() })
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(t) => err(pos, format!("expected a formula, found {}", t.describe())),
            None => err(self.end, "expected a formula, found end of input"),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, i: 0, end: text.len() };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        return err(p.pos(), format!("trailing input: {}", t.describe()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula as F;
    use crate::model::{Agent, Prop};

    fn a() -> Agent {
        Agent::new("a").unwrap()
    }

    fn b() -> Agent {
        Agent::new("b").unwrap()
    }

    fn q() -> F {
        F::atom(Prop::new("q").unwrap())
    }

    fn p() -> F {
        F::atom(Prop::new("p").unwrap())
    }

    #[test]
    fn conditional_belief_with_nested_condition() {
        let f = parse("B[a | ~B[b] q] K[b] ~q").unwrap();
        let expected = F::cond_belief(
            a(),
            F::not(F::belief(b(), q())),
            F::know(b(), F::not(q())),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn box_and_diamond() {
        let f = parse("[][a] <>[b] p").unwrap();
        assert_eq!(f, F::safe(a(), F::diamond(b(), p())));
    }

    #[test]
    fn degrees_and_duals() {
        assert_eq!(parse("B[a # 2] ~q").unwrap(), F::deg_belief(a(), 2, F::not(q())));
        assert_eq!(parse("Khat[b] q").unwrap(), F::khat(b(), q()));
        assert_eq!(parse("Bhat[a | p] q").unwrap(), F::bhat(a(), p(), q()));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("p & q | p -> q").unwrap(),
            F::implies(F::or(F::and(p(), q()), p()), q())
        );
        assert_eq!(
            parse("p -> q -> p").unwrap(),
            F::implies(p(), F::implies(q(), p())),
            "-> is right-associative"
        );
        assert_eq!(parse("p & q & p").unwrap(), F::and(F::and(p(), q()), p()));
        assert_eq!(parse("~K[a] ~p").unwrap(), F::khat(a(), p()), "same shape as the sugar");
    }

    #[test]
    fn or_inside_condition_brackets() {
        assert_eq!(
            parse("B[a | p | q] p").unwrap(),
            F::cond_belief(a(), F::or(p(), q()), p())
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("p &").unwrap_err();
        assert_eq!(e.pos, 3);
        assert!(parse("B[a | p q").is_err());
        assert!(parse("p q").unwrap_err().msg.contains("trailing"));
        assert!(parse("B[a # x] p").is_err());
        assert!(parse("<p").is_err());
        assert!(parse("K[true] p").is_err(), "reserved words are not agent names");
    }

    #[test]
    fn print_parse_round_trip_on_worked_formulas() {
        // the conjunction needs no parentheses under an implication, so the
        // printer drops them
        assert_eq!(
            parse("K[a] p -> (B[a] B[b] q & ~K[a] B[b] q)").unwrap(),
            parse("K[a] p -> B[a] B[b] q & ~K[a] B[b] q").unwrap()
        );
        for text in [
            "K[a] p -> B[a] B[b] q & ~K[a] B[b] q",
            "B[a | ~B[b] q] K[b] ~q",
            "K[a] p -> B[a | Khat[b] q] B[b] q",
            "[][a] Khat[b] q",
            "B[a # 2] ~q",
            "p | q -> p & q",
            "Khat[a] (p & [][a] (p -> q))",
        ] {
            let f = parse(text).unwrap();
            assert_eq!(f.to_string(), text, "printer output matches the source text");
            assert_eq!(parse(&f.to_string()).unwrap(), f);
        }
    }
}
