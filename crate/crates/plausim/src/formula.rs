//! Formula AST shared by the three belief logics, with classification,
//! modal depth, sugar removal, and the canonical printer.
//!
//! Dual operators have no constructors of their own: `Khat`, `Bhat`, `<>`
//! parse to their primitive negation forms, and the printer re-sugars those
//! exact patterns. `B[a] f` abbreviates `B[a | true] f`.

use std::fmt;

use crate::model::{Agent, Prop};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Top,
    Bot,
    Atom(Prop),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// K[a] f
    Know(Agent, Box<Formula>),
    /// B[a | cond] f
    CondBelief(Agent, Box<Formula>, Box<Formula>),
    /// B[a # n] f
    DegBelief(Agent, u32, Box<Formula>),
    /// [][a] f
    SafeBelief(Agent, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn know(a: Agent, f: Formula) -> Formula {
        Formula::Know(a, Box::new(f))
    }

    /// Khat[a] f, i.e. ~K[a] ~f.
    pub fn khat(a: Agent, f: Formula) -> Formula {
        Formula::not(Formula::know(a, Formula::not(f)))
    }

    pub fn cond_belief(a: Agent, cond: Formula, f: Formula) -> Formula {
        Formula::CondBelief(a, Box::new(cond), Box::new(f))
    }

    /// B[a] f, i.e. B[a | true] f.
    pub fn belief(a: Agent, f: Formula) -> Formula {
        Formula::cond_belief(a, Formula::Top, f)
    }

    /// Bhat[a | cond] f, i.e. ~B[a | cond] ~f.
    pub fn bhat(a: Agent, cond: Formula, f: Formula) -> Formula {
        Formula::not(Formula::cond_belief(a, cond, Formula::not(f)))
    }

    pub fn deg_belief(a: Agent, n: u32, f: Formula) -> Formula {
        Formula::DegBelief(a, n, Box::new(f))
    }

    /// ~B[a # n] ~f.
    pub fn bhat_deg(a: Agent, n: u32, f: Formula) -> Formula {
        Formula::not(Formula::deg_belief(a, n, Formula::not(f)))
    }

    pub fn safe(a: Agent, f: Formula) -> Formula {
        Formula::SafeBelief(a, Box::new(f))
    }

    /// <>[a] f, i.e. ~[][a] ~f.
    pub fn diamond(a: Agent, f: Formula) -> Formula {
        Formula::not(Formula::safe(a, Formula::not(f)))
    }

    pub fn atom(p: Prop) -> Formula {
        Formula::Atom(p)
    }
}

/// Which belief modalities a formula uses. Atoms, booleans, and knowledge
/// belong to every sublanguage, so the empty tag is the common base.
#[derive(Clone, Copy, PartialEq, Eq, Default, Debug)]
pub struct LanguageTag {
    pub cond: bool,
    pub deg: bool,
    pub safe: bool,
}

impl LanguageTag {
    pub const BASE: LanguageTag = LanguageTag { cond: false, deg: false, safe: false };
    pub const C: LanguageTag = LanguageTag { cond: true, deg: false, safe: false };
    pub const D: LanguageTag = LanguageTag { cond: false, deg: true, safe: false };
    pub const S: LanguageTag = LanguageTag { cond: false, deg: false, safe: true };
    pub const CD: LanguageTag = LanguageTag { cond: true, deg: true, safe: false };

    pub fn union(self, other: LanguageTag) -> LanguageTag {
        LanguageTag {
            cond: self.cond || other.cond,
            deg: self.deg || other.deg,
            safe: self.safe || other.safe,
        }
    }

    pub fn is_subset(self, other: LanguageTag) -> bool {
        (!self.cond || other.cond) && (!self.deg || other.deg) && (!self.safe || other.safe)
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == LanguageTag::BASE {
            return f.write_str("base");
        }
        if self.cond {
            f.write_str("C")?;
        }
        if self.deg {
            f.write_str("D")?;
        }
        if self.safe {
            f.write_str("S")?;
        }
        Ok(())
    }
}

/// The minimal language tag covering the modalities the formula uses.
pub fn classify(f: &Formula) -> LanguageTag {
    match f {
        Formula::Top | Formula::Bot | Formula::Atom(_) => LanguageTag::BASE,
        Formula::Not(g) => classify(g),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            classify(l).union(classify(r))
        }
        Formula::Know(_, g) => classify(g),
        Formula::CondBelief(_, c, g) => LanguageTag::C.union(classify(c)).union(classify(g)),
        Formula::DegBelief(_, _, g) => LanguageTag::D.union(classify(g)),
        Formula::SafeBelief(_, g) => LanguageTag::S.union(classify(g)),
    }
}

/// Nesting depth of modal operators; a conditional belief counts the deeper of
/// its condition and its body.
pub fn modal_depth(f: &Formula) -> u32 {
    match f {
        Formula::Top | Formula::Bot | Formula::Atom(_) => 0,
        Formula::Not(g) => modal_depth(g),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            modal_depth(l).max(modal_depth(r))
        }
        Formula::Know(_, g) | Formula::DegBelief(_, _, g) | Formula::SafeBelief(_, g) => {
            1 + modal_depth(g)
        }
        Formula::CondBelief(_, c, g) => 1 + modal_depth(c).max(modal_depth(g)),
    }
}

/// Rewrite Top/Bot/Or/Implies into atoms, negation, and conjunction. The
/// constants borrow a throwaway proposition: `p & ~p` is false in every model
/// whether or not `p` occurs in it.
pub fn desugar(f: &Formula) -> Formula {
    let falsum = || {
        let p = Prop::new("p").expect("p is a valid name");
        Formula::and(Formula::atom(p.clone()), Formula::not(Formula::atom(p)))
    };
    match f {
        Formula::Top => Formula::not(falsum()),
        Formula::Bot => falsum(),
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(desugar(g)),
        Formula::And(l, r) => Formula::and(desugar(l), desugar(r)),
        Formula::Or(l, r) => Formula::not(Formula::and(
            Formula::not(desugar(l)),
            Formula::not(desugar(r)),
        )),
        Formula::Implies(l, r) => Formula::not(Formula::and(desugar(l), Formula::not(desugar(r)))),
        Formula::Know(a, g) => Formula::know(a.clone(), desugar(g)),
        Formula::CondBelief(a, c, g) => Formula::cond_belief(a.clone(), desugar(c), desugar(g)),
        Formula::DegBelief(a, n, g) => Formula::deg_belief(a.clone(), *n, desugar(g)),
        Formula::SafeBelief(a, g) => Formula::safe(a.clone(), desugar(g)),
    }
}

// Printer precedence levels: Implies = 1, Or = 2, And = 3, prefix = 4.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Implies(_, _) => 1,
        Formula::Or(_, _) => 2,
        Formula::And(_, _) => 3,
        Formula::Not(_)
        | Formula::Know(_, _)
        | Formula::CondBelief(_, _, _)
        | Formula::DegBelief(_, _, _)
        | Formula::SafeBelief(_, _) => 4,
        Formula::Top | Formula::Bot | Formula::Atom(_) => 5,
    }
}

fn write_at(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let needs_parens = prec(f) < min;
    if needs_parens {
        out.write_str("(")?;
    }
    match f {
        Formula::Top => out.write_str("true")?,
        Formula::Bot => out.write_str("false")?,
        Formula::Atom(p) => write!(out, "{p}")?,
        // re-sugared dual forms, checked before plain negation
        Formula::Not(g) => match g.as_ref() {
            Formula::Know(a, h) => {
                if let Formula::Not(body) = h.as_ref() {
                    write!(out, "Khat[{a}] ")?;
                    write_at(body, 4, out)?;
                } else {
                    out.write_str("~")?;
                    write_at(g, 4, out)?;
                }
            }
            Formula::CondBelief(a, c, h) => {
                if let Formula::Not(body) = h.as_ref() {
                    write!(out, "Bhat[{a} | ")?;
                    write_at(c, 1, out)?;
                    out.write_str("] ")?;
                    write_at(body, 4, out)?;
                } else {
                    out.write_str("~")?;
                    write_at(g, 4, out)?;
                }
            }
            Formula::SafeBelief(a, h) => {
                if let Formula::Not(body) = h.as_ref() {
                    write!(out, "<>[{a}] ")?;
                    write_at(body, 4, out)?;
                } else {
                    out.write_str("~")?;
                    write_at(g, 4, out)?;
                }
            }
            _ => {
                out.write_str("~")?;
                write_at(g, 4, out)?;
            }
        },
        Formula::And(l, r) => {
            write_at(l, 3, out)?;
            out.write_str(" & ")?;
            write_at(r, 4, out)?;
        }
        Formula::Or(l, r) => {
            write_at(l, 2, out)?;
            out.write_str(" | ")?;
            write_at(r, 3, out)?;
        }
        Formula::Implies(l, r) => {
            write_at(l, 2, out)?;
            out.write_str(" -> ")?;
            write_at(r, 1, out)?;
        }
        Formula::Know(a, g) => {
            write!(out, "K[{a}] ")?;
            write_at(g, 4, out)?;
        }
        Formula::CondBelief(a, c, g) => {
            if **c == Formula::Top {
                write!(out, "B[{a}] ")?;
            } else {
                write!(out, "B[{a} | ")?;
                write_at(c, 1, out)?;
                out.write_str("] ")?;
            }
            write_at(g, 4, out)?;
        }
        Formula::DegBelief(a, n, g) => {
            write!(out, "B[{a} # {n}] ")?;
            write_at(g, 4, out)?;
        }
        Formula::SafeBelief(a, g) => {
            write!(out, "[][{a}] ")?;
            write_at(g, 4, out)?;
        }
    }
    if needs_parens {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Agent {
        Agent::new("a").unwrap()
    }

    fn b() -> Agent {
        Agent::new("b").unwrap()
    }

    fn p() -> Formula {
        Formula::atom(Prop::new("p").unwrap())
    }

    fn q() -> Formula {
        Formula::atom(Prop::new("q").unwrap())
    }

    #[test]
    fn depth_counts_conditions() {
        assert_eq!(modal_depth(&p()), 0);
        assert_eq!(modal_depth(&Formula::know(a(), p())), 1);
        let f = Formula::cond_belief(a(), Formula::know(b(), p()), q());
        assert_eq!(modal_depth(&f), 2);
        assert_eq!(modal_depth(&Formula::and(p(), Formula::not(q()))), 0);
    }

    #[test]
    fn classify_per_modality() {
        assert_eq!(classify(&Formula::cond_belief(a(), p(), q())), LanguageTag::C);
        assert_eq!(classify(&Formula::deg_belief(a(), 1, p())), LanguageTag::D);
        assert_eq!(classify(&Formula::safe(a(), p())), LanguageTag::S);
        assert_eq!(classify(&Formula::know(a(), p())), LanguageTag::BASE);
        let mixed = Formula::and(Formula::cond_belief(a(), p(), q()), Formula::deg_belief(a(), 0, p()));
        assert_eq!(classify(&mixed), LanguageTag::CD);
        assert!(LanguageTag::BASE.is_subset(LanguageTag::S));
        assert!(!LanguageTag::CD.is_subset(LanguageTag::C));
    }

    #[test]
    fn printer_resugars_duals_and_plain_belief() {
        assert_eq!(Formula::khat(b(), q()).to_string(), "Khat[b] q");
        assert_eq!(Formula::belief(a(), q()).to_string(), "B[a] q");
        assert_eq!(Formula::bhat(a(), p(), q()).to_string(), "Bhat[a | p] q");
        assert_eq!(Formula::diamond(a(), p()).to_string(), "<>[a] p");
        assert_eq!(Formula::deg_belief(a(), 2, Formula::not(q())).to_string(), "B[a # 2] ~q");
        assert_eq!(
            Formula::bhat_deg(a(), 1, q()).to_string(),
            "~B[a # 1] ~q",
            "no degree dual in the grammar, so none in the printer"
        );
    }

    #[test]
    fn printer_places_parens_by_precedence() {
        let f = Formula::implies(Formula::or(p(), q()), Formula::and(p(), q()));
        assert_eq!(f.to_string(), "p | q -> p & q");
        let g = Formula::and(Formula::or(p(), q()), p());
        assert_eq!(g.to_string(), "(p | q) & p");
        let h = Formula::implies(Formula::implies(p(), q()), p());
        assert_eq!(h.to_string(), "(p -> q) -> p");
        let i = Formula::not(Formula::and(p(), q()));
        assert_eq!(i.to_string(), "~(p & q)");
        let j = Formula::know(a(), Formula::not(p()));
        assert_eq!(j.to_string(), "K[a] ~p");
    }
}
