//! Translations between the belief languages: the global rewrite from
//! conditional belief into safe belief, expansion of knowledge into
//! conditional belief, and the model/world-relative translation from
//! conditional belief into degrees of belief.
//!
//! The degree translation is built around `layer_index`: the degree that a
//! condition's most plausible worlds occupy in the normal-mode layer
//! decomposition. Unlike the safe-belief rewrite it depends on the model and
//! on the evaluation world, and its output is only guaranteed to agree with
//! the input at the world it was built for.

use std::collections::HashMap;

use thiserror::Error;

use crate::bisim::normal_data;
use crate::formula::{classify, Formula, LanguageTag};
use crate::model::{Agent, PlausibilityModel, WorldId};
use crate::semantics::{eval, formula_agent, layer_decomposition, SemError, SemanticsMode};

#[derive(Error, Debug)]
pub enum TranslateError {
    #[error("formula is outside the conditional-belief language (uses {found})")]
    NotConditionalLanguage { found: LanguageTag },
    #[error("condition holds nowhere in the epistemic class of {world}")]
    EmptyRestriction { world: WorldId },
    #[error(transparent)]
    Semantics(#[from] SemError),
}

fn require_conditional(f: &Formula) -> Result<(), TranslateError> {
    let found = classify(f);
    if found.is_subset(LanguageTag::C) {
        Ok(())
    } else {
        Err(TranslateError::NotConditionalLanguage { found })
    }
}

/// Rewrite every knowledge operator as a conditional belief:
/// `K[a] f` becomes `B[a | ~f] false`. Truth values are preserved at every
/// world of every model.
pub fn expand_knowledge(f: &Formula) -> Formula {
    match f {
        Formula::Top | Formula::Bot | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(expand_knowledge(g)),
        Formula::And(l, r) => Formula::and(expand_knowledge(l), expand_knowledge(r)),
        Formula::Or(l, r) => Formula::or(expand_knowledge(l), expand_knowledge(r)),
        Formula::Implies(l, r) => Formula::implies(expand_knowledge(l), expand_knowledge(r)),
        Formula::Know(a, g) => {
            Formula::cond_belief(a.clone(), Formula::not(expand_knowledge(g)), Formula::Bot)
        }
        Formula::CondBelief(a, c, g) => {
            Formula::cond_belief(a.clone(), expand_knowledge(c), expand_knowledge(g))
        }
        Formula::DegBelief(a, n, g) => Formula::deg_belief(a.clone(), *n, expand_knowledge(g)),
        Formula::SafeBelief(a, g) => Formula::safe(a.clone(), expand_knowledge(g)),
    }
}

/// Translate a conditional-belief formula into safe belief, model-free:
/// `B[a | c] f` becomes `Khat[a] c' -> Khat[a] (c' & [][a] (c' -> f'))`.
/// The two formulas agree at every world of every model.
pub fn cond_to_safe(f: &Formula) -> Result<Formula, TranslateError> {
    require_conditional(f)?;
    Ok(to_safe(f))
}

fn to_safe(f: &Formula) -> Formula {
    match f {
        Formula::Top | Formula::Bot | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(to_safe(g)),
        Formula::And(l, r) => Formula::and(to_safe(l), to_safe(r)),
        Formula::Or(l, r) => Formula::or(to_safe(l), to_safe(r)),
        Formula::Implies(l, r) => Formula::implies(to_safe(l), to_safe(r)),
        Formula::Know(a, g) => Formula::know(a.clone(), to_safe(g)),
        Formula::CondBelief(a, c, g) => {
            let c2 = to_safe(c);
            let g2 = to_safe(g);
            Formula::implies(
                Formula::khat(a.clone(), c2.clone()),
                Formula::khat(
                    a.clone(),
                    Formula::and(c2.clone(), Formula::safe(a.clone(), Formula::implies(c2, g2))),
                ),
            )
        }
        Formula::DegBelief(_, _, _) | Formula::SafeBelief(_, _) => {
            unreachable!("rejected by the language check")
        }
    }
}

/// The index of the normal-mode layer holding the most plausible
/// `cond`-worlds of `world`'s epistemic class. The most plausible worlds of
/// a definable set always sit inside a single layer, so the index is unique;
/// an empty restriction is an error.
pub fn layer_index(
    m: &PlausibilityModel,
    world: &WorldId,
    agent: &Agent,
    cond: &Formula,
) -> Result<u32, TranslateError> {
    let wi = m.require_world(world).map_err(SemError::from)?;
    let ai = formula_agent(m, agent)?;
    layer_index_at(m, wi, ai, cond)
}

fn layer_index_at(
    m: &PlausibilityModel,
    wi: usize,
    ai: usize,
    cond: &Formula,
) -> Result<u32, TranslateError> {
    let restricted = eval(m, cond, SemanticsMode::Normal)?.and(m.class_mask(ai, wi));
    if restricted.is_empty() {
        return Err(TranslateError::EmptyRestriction { world: m.world_at(wi).clone() });
    }
    let nd = normal_data(m).map_err(SemError::from)?;
    let min = nd.rels[ai].min_of(&restricted);
    let ld = layer_decomposition(
        m,
        &m.agents()[ai],
        m.world_at(wi),
        SemanticsMode::Normal,
    )?;
    let min_set = m.to_world_set(&min);
    let k = ld
        .layers
        .iter()
        .position(|layer| min_set.iter().next().map(|w| layer.contains(w)).unwrap_or(false))
        .expect("most plausible worlds lie in the class");
    assert!(
        min_set.iter().all(|w| ld.layers[k].contains(w)),
        "most plausible worlds of a definable set must share one layer"
    );
    Ok(k as u32)
}

/// Sort by printed form, drop duplicates, and fold into a right-nested
/// disjunction. Canonical shape makes the degree translation independent of
/// which bisimilar world it was built at.
fn canonical_or(items: Vec<Formula>) -> Formula {
    let mut keyed: Vec<(String, Formula)> = items.into_iter().map(|f| (f.to_string(), f)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    let mut rev = keyed.into_iter().map(|(_, f)| f).rev();
    let last = rev.next().expect("an epistemic class is never empty");
    rev.fold(last, |acc, f| Formula::or(f, acc))
}

type SigmaMemo = HashMap<(usize, Formula), Formula>;

/// Translate a conditional-belief formula into degrees of belief, relative
/// to the model and evaluation world. The result agrees with the input at
/// `world` (and only there is agreement guaranteed), and is syntactically
/// identical when built at bisimilar worlds of the same model.
///
/// The agreement guarantee holds for single-agent models. With several
/// agents it can fail once conditionals nest across agents: each disjunct
/// inside the output is built against one reference world's classes, and at
/// a sibling world that partitions differently for another agent, a
/// disjunct built for a world whose class contains condition-worlds can
/// come out false where the conditional holds vacuously (or vice versa once
/// negated). The layer indices and case splits baked into the formula have
/// no way to adapt to the class the evaluation world actually inhabits.
pub fn cond_to_degrees(
    m: &PlausibilityModel,
    world: &WorldId,
    f: &Formula,
) -> Result<Formula, TranslateError> {
    require_conditional(f)?;
    let wi = m.require_world(world).map_err(SemError::from)?;
    let expanded = expand_knowledge(f);
    let mut memo = SigmaMemo::new();
    sigma(m, wi, &expanded, &mut memo)
}

fn sigma(
    m: &PlausibilityModel,
    wi: usize,
    f: &Formula,
    memo: &mut SigmaMemo,
) -> Result<Formula, TranslateError> {
    let key = (wi, f.clone());
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.clone());
    }
    let out = match f {
        Formula::Top | Formula::Bot | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(sigma(m, wi, g, memo)?),
        Formula::And(l, r) => Formula::and(sigma(m, wi, l, memo)?, sigma(m, wi, r, memo)?),
        Formula::Or(l, r) => Formula::or(sigma(m, wi, l, memo)?, sigma(m, wi, r, memo)?),
        Formula::Implies(l, r) => {
            Formula::implies(sigma(m, wi, l, memo)?, sigma(m, wi, r, memo)?)
        }
        Formula::CondBelief(a, c, g) => {
            let ai = formula_agent(m, a)?;
            let class = m.class_mask(ai, wi).clone();
            let members: Vec<usize> = class.iter_ones().collect();
            let restricted = eval(m, c, SemanticsMode::Normal)?.and(&class);
            if restricted.is_empty() {
                // the condition is impossible for the agent here, and the
                // vacuously true conditional becomes knowledge of that
                let neg = Formula::not((**c).clone());
                let mut disjuncts = Vec::with_capacity(members.len());
                for &u in &members {
                    disjuncts.push(sigma(m, u, &neg, memo)?);
                }
                Formula::know(a.clone(), canonical_or(disjuncts))
            } else {
                let k = layer_index_at(m, wi, ai, c)?;
                let imp = Formula::implies((**c).clone(), (**g).clone());
                let mut body = Vec::with_capacity(members.len());
                let mut cond = Vec::with_capacity(members.len());
                for &u in &members {
                    body.push(sigma(m, u, &imp, memo)?);
                    cond.push(sigma(m, u, c, memo)?);
                }
                Formula::and(
                    Formula::deg_belief(a.clone(), k, canonical_or(body)),
                    Formula::bhat_deg(a.clone(), k, canonical_or(cond)),
                )
            }
        }
        Formula::Know(_, _) => unreachable!("knowledge is expanded before translating"),
        Formula::DegBelief(_, _, _) | Formula::SafeBelief(_, _) => {
            unreachable!("rejected by the language check")
        }
    };
    memo.insert(key, out.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_model, FixtureId};
    use crate::parser::parse;
    use crate::semantics::satisfies;

    fn wid(s: &str) -> WorldId {
        WorldId::new(s).unwrap()
    }

    fn agent(s: &str) -> Agent {
        Agent::new(s).unwrap()
    }

    #[test]
    fn safe_rewrite_matches_worked_example() {
        let f = parse("B[a | p] q").unwrap();
        let t = cond_to_safe(&f).unwrap();
        assert_eq!(t.to_string(), "Khat[a] p -> Khat[a] (p & [][a] (p -> q))");
        assert!(classify(&t).is_subset(LanguageTag::S));
    }

    #[test]
    fn safe_rewrite_rejects_other_modalities() {
        for text in ["B[a # 1] p", "[][a] p", "B[a | p] B[a # 0] q"] {
            let f = parse(text).unwrap();
            assert!(matches!(
                cond_to_safe(&f),
                Err(TranslateError::NotConditionalLanguage { .. })
            ));
        }
    }

    #[test]
    fn safe_rewrite_agrees_everywhere() {
        let formulas = [
            "B[a | ~B[b] q] K[b] ~q",
            "B[a | Khat[b] q] B[b] q",
            "B[b | q] q & ~B[a | q] ~p",
            "K[a] p -> B[a] B[b] q",
        ];
        for id in [FixtureId::Ml, FixtureId::Mc, FixtureId::Mr] {
            let m = fixture_model(id).unwrap();
            for text in formulas {
                let f = parse(text).unwrap();
                let t = cond_to_safe(&f).unwrap();
                for w in m.worlds() {
                    assert_eq!(
                        satisfies(&m, w, &f, SemanticsMode::Normal).unwrap(),
                        satisfies(&m, w, &t, SemanticsMode::Normal).unwrap(),
                        "{id} {w}: {text}"
                    );
                }
            }
        }
    }

    #[test]
    fn knowledge_expands_to_conditional_belief() {
        let f = parse("K[a] p").unwrap();
        assert_eq!(expand_knowledge(&f).to_string(), "B[a | ~p] false");

        let m = fixture_model(FixtureId::Mc).unwrap();
        for text in ["K[a] p", "K[a] K[b] q", "Khat[b] q -> K[b] ~p"] {
            let g = parse(text).unwrap();
            let e = expand_knowledge(&g);
            for w in m.worlds() {
                for mode in [SemanticsMode::Normal, SemanticsMode::Raw] {
                    assert_eq!(
                        satisfies(&m, w, &g, mode).unwrap(),
                        satisfies(&m, w, &e, mode).unwrap(),
                        "{w} {mode}: {text}"
                    );
                }
            }
        }
    }

    #[test]
    fn layer_index_points_into_normal_layers() {
        let mc = fixture_model(FixtureId::Mc).unwrap();
        let khat = parse("Khat[b] q").unwrap();
        assert_eq!(layer_index(&mc, &wid("v1"), &agent("a"), &khat).unwrap(), 0);
        assert_eq!(
            layer_index(&mc, &wid("v1"), &agent("a"), &Formula::Top).unwrap(),
            0
        );
        assert_eq!(
            layer_index(&mc, &wid("v2"), &agent("a"), &parse("~p").unwrap()).unwrap_err().to_string(),
            "condition holds nowhere in the epistemic class of v2"
        );

        // the q-worlds of the graded chain sit one layer above the top chain world
        let mk = fixture_model(FixtureId::Mk(2)).unwrap();
        assert_eq!(
            layer_index(&mk, &wid("w0"), &agent("a"), &parse("q").unwrap()).unwrap(),
            3
        );

        // normal-mode layers: w1 and w3 share the bottom layer
        let ml = fixture_model(FixtureId::Ml).unwrap();
        assert_eq!(
            layer_index(&ml, &wid("w2"), &agent("a"), &parse("p").unwrap()).unwrap(),
            0
        );
    }

    #[test]
    fn degree_translation_of_propositional_is_identity() {
        let m = fixture_model(FixtureId::Mc).unwrap();
        let f = parse("p & ~(q | false)").unwrap();
        assert_eq!(cond_to_degrees(&m, &wid("v1"), &f).unwrap(), f);
    }

    #[test]
    fn degree_translation_matches_worked_example() {
        let m = fixture_model(FixtureId::Mc).unwrap();
        let f = parse("B[a | Khat[b] q] B[b] q").unwrap();
        let t = cond_to_degrees(&m, &wid("v1"), &f).unwrap();
        // the condition's most plausible world sits in layer 0, so the
        // translation is a degree-0 belief conjoined with its dual
        match &t {
            Formula::And(l, r) => {
                assert!(matches!(l.as_ref(), Formula::DegBelief(_, 0, _)), "{t}");
                assert!(
                    matches!(r.as_ref(), Formula::Not(g) if matches!(g.as_ref(), Formula::DegBelief(_, 0, _))),
                    "{t}"
                );
            }
            other => panic!("expected a degree conjunction, got {other}"),
        }
        assert!(classify(&t).is_subset(LanguageTag::D));
        assert!(satisfies(&m, &wid("v1"), &f, SemanticsMode::Normal).unwrap());
        assert!(satisfies(&m, &wid("v1"), &t, SemanticsMode::Normal).unwrap());
    }

    #[test]
    fn degree_translation_agrees_at_its_world() {
        let formulas = [
            "B[a | ~B[b] q] K[b] ~q",
            "B[a | Khat[b] q] B[b] q",
            "B[a | q & ~q] p",
            "K[a] p -> B[a] B[b] q",
            "~B[b | p | q] (p -> K[b] p)",
        ];
        for id in [FixtureId::Ml, FixtureId::Mc, FixtureId::Mr, FixtureId::P] {
            let m = fixture_model(id).unwrap();
            for text in formulas {
                let f = parse(text).unwrap();
                for w in m.worlds() {
                    let t = match cond_to_degrees(&m, w, &f) {
                        Ok(t) => t,
                        Err(TranslateError::Semantics(SemError::UnknownAgentInFormula(_))) => {
                            continue // P is single-agent; skip b-formulas there
                        }
                        Err(e) => panic!("{id} {w}: {e}"),
                    };
                    assert_eq!(
                        satisfies(&m, w, &f, SemanticsMode::Normal).unwrap(),
                        satisfies(&m, w, &t, SemanticsMode::Normal).unwrap(),
                        "{id} {w}: {text} vs {t}"
                    );
                }
            }
        }
    }

    #[test]
    fn degree_translation_canonical_across_bisimilar_worlds() {
        // w1 and w3 are bisimilar within ML; u1 and u3 within MR, where they
        // even sit in different b-classes
        let cases = [
            (FixtureId::Ml, "w1", "w3"),
            (FixtureId::Mr, "u1", "u3"),
        ];
        let formulas = ["B[a | p] (p & ~q)", "B[b | q] q", "K[b] ~q -> B[b | p] p"];
        for (id, x, y) in cases {
            let m = fixture_model(id).unwrap();
            for text in formulas {
                let f = parse(text).unwrap();
                let tx = cond_to_degrees(&m, &wid(x), &f).unwrap();
                let ty = cond_to_degrees(&m, &wid(y), &f).unwrap();
                assert_eq!(tx, ty, "{id} {x}/{y}: {text}");
            }
        }
    }

    #[test]
    fn empty_condition_becomes_knowledge() {
        let m = fixture_model(FixtureId::Mc).unwrap();
        let f = parse("B[a | q & ~q] p").unwrap();
        let t = cond_to_degrees(&m, &wid("v1"), &f).unwrap();
        assert!(matches!(&t, Formula::Know(_, _)), "{t}");
        assert!(satisfies(&m, &wid("v1"), &f, SemanticsMode::Normal).unwrap());
        assert!(satisfies(&m, &wid("v1"), &t, SemanticsMode::Normal).unwrap());
    }
}
