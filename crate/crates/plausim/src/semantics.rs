//! Model checking: truth at a world, extensions, validity on a model, and
//! the layer decomposition behind graded belief.
//!
//! Two evaluation modes exist. Raw mode reads the stored plausibility order;
//! normal mode first replaces it by the order derived from the largest
//! autobisimulation. Knowledge ranges over epistemic classes and conditional
//! belief always minimizes in the stored order, so neither depends on the
//! mode; graded belief (via the layers) and safe belief consult the mode's
//! order and genuinely differ on models that are not already normal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bisim::{normal_data, EngineError};
use crate::bits::Bits;
use crate::formula::Formula;
use crate::model::{Agent, ModelError, PlausibilityModel, Prop, Rel, WorldId};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SemanticsMode {
    Normal,
    Raw,
}

impl SemanticsMode {
    fn cache_slot(self) -> usize {
        match self {
            SemanticsMode::Raw => 0,
            SemanticsMode::Normal => 1,
        }
    }
}

impl fmt::Display for SemanticsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemanticsMode::Normal => "normal",
            SemanticsMode::Raw => "raw",
        })
    }
}

#[derive(Error, Debug)]
pub enum SemError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("formula mentions agent {0}, which the model does not declare")]
    UnknownAgentInFormula(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub(crate) fn formula_agent(m: &PlausibilityModel, a: &Agent) -> Result<usize, SemError> {
    m.agent_idx(a).ok_or_else(|| SemError::UnknownAgentInFormula(a.as_str().to_owned()))
}

type AgentLayers = Vec<BTreeMap<usize, Vec<Bits>>>;

fn compute_layers(m: &PlausibilityModel, rels: &[Rel]) -> AgentLayers {
    (0..m.agents().len())
        .map(|ai| {
            let mut per_class = BTreeMap::new();
            for (cid, members) in m.agent_classes(ai).members.iter().enumerate() {
                let mut layers = Vec::new();
                let mut rest = members.clone();
                while !rest.is_empty() {
                    let min = rels[ai].min_of(&rest);
                    if min.is_empty() {
                        // not a well-preorder; stop rather than spin
                        break;
                    }
                    rest.sub_with(&min);
                    layers.push(min);
                }
                per_class.insert(cid, layers);
            }
            per_class
        })
        .collect()
}

fn layers_for(m: &PlausibilityModel, mode: SemanticsMode) -> Result<&AgentLayers, EngineError> {
    let slot = &m.extras.layers[mode.cache_slot()];
    match mode {
        SemanticsMode::Raw => Ok(slot.get_or_init(|| compute_layers(m, m.all_rels()))),
        SemanticsMode::Normal => {
            let nd = normal_data(m)?;
            Ok(slot.get_or_init(|| compute_layers(m, &nd.rels)))
        }
    }
}

/// The plausibility layers of one world's epistemic class: `layers[0]` holds
/// the most plausible worlds, and each sphere is the union of the layers up
/// to its index. Any degree above `max_degree` behaves like `max_degree`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LayerDecomposition {
    pub agent: Agent,
    pub class: BTreeSet<WorldId>,
    pub layers: Vec<BTreeSet<WorldId>>,
    pub spheres: Vec<BTreeSet<WorldId>>,
    pub max_degree: u32,
}

pub fn layer_decomposition(
    m: &PlausibilityModel,
    agent: &Agent,
    world: &WorldId,
    mode: SemanticsMode,
) -> Result<LayerDecomposition, SemError> {
    let ai = m.require_agent(agent)?;
    let wi = m.require_world(world)?;
    let all = layers_for(m, mode)?;
    let cid = m.agent_classes(ai).class_of[wi];
    let layers: Vec<BTreeSet<WorldId>> =
        all[ai][&cid].iter().map(|b| m.to_world_set(b)).collect();
    let mut spheres = Vec::with_capacity(layers.len());
    let mut acc = BTreeSet::new();
    for layer in &layers {
        acc.extend(layer.iter().cloned());
        spheres.push(acc.clone());
    }
    Ok(LayerDecomposition {
        agent: agent.clone(),
        class: m.to_world_set(m.class_mask(ai, wi)),
        max_degree: layers.len().saturating_sub(1) as u32,
        layers,
        spheres,
    })
}

pub(crate) fn eval(m: &PlausibilityModel, f: &Formula, mode: SemanticsMode) -> Result<Bits, SemError> {
    let n = m.n();
    Ok(match f {
        Formula::Top => Bits::full(n),
        Formula::Bot => Bits::new(n),
        Formula::Atom(p) => m.prop_extension(p),
        Formula::Not(g) => eval(m, g, mode)?.complement(),
        Formula::And(l, r) => eval(m, l, mode)?.and(&eval(m, r, mode)?),
        Formula::Or(l, r) => {
            let mut out = eval(m, l, mode)?;
            out.or_with(&eval(m, r, mode)?);
            out
        }
        Formula::Implies(l, r) => {
            let mut out = eval(m, l, mode)?.complement();
            out.or_with(&eval(m, r, mode)?);
            out
        }
        Formula::Know(a, g) => {
            let ai = formula_agent(m, a)?;
            let ge = eval(m, g, mode)?;
            let mut out = Bits::new(n);
            for members in &m.agent_classes(ai).members {
                if members.is_subset(&ge) {
                    out.or_with(members);
                }
            }
            out
        }
        Formula::CondBelief(a, cond, g) => {
            let ai = formula_agent(m, a)?;
            let ce = eval(m, cond, mode)?;
            let ge = eval(m, g, mode)?;
            let mut out = Bits::new(n);
            for members in &m.agent_classes(ai).members {
                let min = m.min_in(ai, &ce.and(members));
                if min.is_subset(&ge) {
                    out.or_with(members);
                }
            }
            out
        }
        Formula::DegBelief(a, deg, g) => {
            let ai = formula_agent(m, a)?;
            let ge = eval(m, g, mode)?;
            let layers = &layers_for(m, mode)?[ai];
            let mut out = Bits::new(n);
            for (cid, members) in m.agent_classes(ai).members.iter().enumerate() {
                let class_layers = &layers[&cid];
                let take = (*deg as usize + 1).min(class_layers.len());
                let mut sphere = Bits::new(n);
                for layer in &class_layers[..take] {
                    sphere.or_with(layer);
                }
                if sphere.is_subset(&ge) {
                    out.or_with(members);
                }
            }
            out
        }
        Formula::SafeBelief(a, g) => {
            let ai = formula_agent(m, a)?;
            let ge = eval(m, g, mode)?;
            let rel = match mode {
                SemanticsMode::Raw => m.rel(ai),
                SemanticsMode::Normal => &normal_data(m)?.rels[ai],
            };
            let mut out = Bits::new(n);
            for w in 0..n {
                if rel.row(w).is_subset(&ge) {
                    out.set(w);
                }
            }
            out
        }
    })
}

pub fn satisfies(
    m: &PlausibilityModel,
    world: &WorldId,
    f: &Formula,
    mode: SemanticsMode,
) -> Result<bool, SemError> {
    let wi = m.require_world(world)?;
    Ok(eval(m, f, mode)?.get(wi))
}

pub fn extension(
    m: &PlausibilityModel,
    f: &Formula,
    mode: SemanticsMode,
) -> Result<BTreeSet<WorldId>, SemError> {
    Ok(m.to_world_set(&eval(m, f, mode)?))
}

pub fn valid_on_model(
    m: &PlausibilityModel,
    f: &Formula,
    mode: SemanticsMode,
) -> Result<bool, SemError> {
    Ok(eval(m, f, mode)?.count() == m.n())
}

/// Depth-n counting formula over agent `a` and proposition `p`: the base case
/// is `true`, and each step wraps `<>[a](_ & p)` for even n, `<>[a](_ & ~p)`
/// for odd n. Under raw semantics these tell chain models of different
/// lengths apart.
pub fn counting_formula(n: u32) -> Formula {
    let a = Agent::new("a").expect("agent a");
    let p = Prop::new("p").expect("proposition p");
    let mut f = Formula::Top;
    for i in 1..=n {
        let lit = if i % 2 == 0 {
            Formula::atom(p.clone())
        } else {
            Formula::not(Formula::atom(p.clone()))
        };
        f = Formula::diamond(a.clone(), Formula::and(f, lit));
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_model, FixtureId};
    use crate::parser::parse;

    fn w(s: &str) -> WorldId {
        WorldId::new(s).unwrap()
    }

    fn ag(s: &str) -> Agent {
        Agent::new(s).unwrap()
    }

    fn ws(ids: &[&str]) -> BTreeSet<WorldId> {
        ids.iter().map(|s| w(s)).collect()
    }

    fn holds(m: &PlausibilityModel, world: &str, f: &str, mode: SemanticsMode) -> bool {
        satisfies(m, &w(world), &parse(f).unwrap(), mode).unwrap()
    }

    #[test]
    fn booleans_and_atoms() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        let ext = |f: &str| extension(&m, &parse(f).unwrap(), SemanticsMode::Raw).unwrap();
        assert_eq!(ext("p"), ws(&["w1", "w2", "w3"]));
        assert_eq!(ext("~p & ~q"), ws(&[]));
        assert_eq!(ext("p | q"), ws(&["w1", "w2", "w3", "w4", "w5"]));
        assert_eq!(ext("q -> p"), ws(&["w1", "w2", "w3"]));
        assert_eq!(ext("false"), ws(&[]));
        assert_eq!(ext("nosuchprop"), ws(&[]), "unlisted atoms are false everywhere");
    }

    #[test]
    fn knowledge_ranges_over_classes() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        for mode in [SemanticsMode::Raw, SemanticsMode::Normal] {
            assert!(holds(&m, "w1", "K[a] p", mode));
            assert!(!holds(&m, "w1", "K[b] p", mode), "w4 is b-reachable");
            assert!(holds(&m, "w1", "Khat[b] q", mode));
            assert!(!holds(&m, "w2", "Khat[b] q", mode), "w2 is b-isolated");
            assert!(holds(&m, "w4", "K[b] (p | q)", mode));
        }
    }

    #[test]
    fn conditional_belief_minimizes_the_condition() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        for mode in [SemanticsMode::Raw, SemanticsMode::Normal] {
            assert!(holds(&m, "w3", "B[a] p", mode));
            assert!(holds(&m, "w1", "B[b] q", mode), "w4 is the most plausible b-world");
            assert!(!holds(&m, "w2", "B[b] q", mode), "w2's b-class is just itself");
            assert!(holds(&m, "w1", "B[a | q] false", mode), "empty condition set");
        }
    }

    #[test]
    fn graded_belief_layers_differ_by_mode() {
        let m = fixture_model(FixtureId::P).unwrap();
        let raw = layer_decomposition(&m, &ag("a"), &w("w"), SemanticsMode::Raw).unwrap();
        assert_eq!(raw.layers, vec![ws(&["w"]), ws(&["z"]), ws(&["y"]), ws(&["x"])]);
        assert_eq!(raw.max_degree, 3);
        let normal = layer_decomposition(&m, &ag("a"), &w("w"), SemanticsMode::Normal).unwrap();
        assert_eq!(normal.layers, vec![ws(&["w", "y"]), ws(&["z"]), ws(&["x"])]);
        assert_eq!(normal.spheres[1], ws(&["w", "y", "z"]));
        assert_eq!(normal.max_degree, 2);
        // the sphere of degree 2 reaches the q-world only in the normal order
        assert!(holds(&m, "w", "B[a # 2] ~q", SemanticsMode::Raw));
        assert!(!holds(&m, "w", "B[a # 2] ~q", SemanticsMode::Normal));
        // degrees beyond the last layer saturate
        assert_eq!(
            holds(&m, "w", "B[a # 9] ~q", SemanticsMode::Raw),
            holds(&m, "w", "B[a # 3] ~q", SemanticsMode::Raw)
        );
    }

    #[test]
    fn safe_belief_reads_the_mode_order() {
        let m = fixture_model(FixtureId::P).unwrap();
        // raw: y sits above z and w, so p fails below y
        assert!(!holds(&m, "y", "[][a] p", SemanticsMode::Raw));
        assert!(holds(&m, "w", "[][a] p", SemanticsMode::Raw));
        // normal: y is equiplausible with w, so everything below y satisfies p
        assert!(holds(&m, "y", "[][a] p", SemanticsMode::Normal));
        assert!(holds(&m, "w", "<>[a] p", SemanticsMode::Raw));
    }

    #[test]
    fn conditional_belief_beats_degrees_on_the_graded_chain() {
        let mk = fixture_model(FixtureId::Mk(2)).unwrap();
        let nk = fixture_model(FixtureId::Nk(2)).unwrap();
        assert!(holds(&mk, "w0", "B[a | q] r", SemanticsMode::Raw));
        assert!(!holds(&nk, "w0'", "B[a | q] r", SemanticsMode::Raw));
        // degrees up to k see only the shared part of the chains
        for deg in 0..=2 {
            let f = format!("B[a # {deg}] ~q");
            assert_eq!(
                holds(&mk, "w0", &f, SemanticsMode::Raw),
                holds(&nk, "w0'", &f, SemanticsMode::Raw)
            );
        }
    }

    #[test]
    fn counting_formulas_measure_chain_length() {
        for k in 1..=4u32 {
            let m = fixture_model(FixtureId::DemeyChain(k)).unwrap();
            let top = format!("w{k}");
            assert!(
                satisfies(&m, &w(&top), &counting_formula(k), SemanticsMode::Raw).unwrap(),
                "chain {k} satisfies its own counting formula"
            );
            assert!(
                !satisfies(&m, &w(&top), &counting_formula(k + 1), SemanticsMode::Raw).unwrap(),
                "chain {k} rejects the next counting formula"
            );
        }
    }

    #[test]
    fn unknown_agent_in_formula_is_reported() {
        let m = fixture_model(FixtureId::P).unwrap();
        let err = satisfies(&m, &w("w"), &parse("K[c] p").unwrap(), SemanticsMode::Raw).unwrap_err();
        assert!(matches!(err, SemError::UnknownAgentInFormula(_)), "{err}");
        let err = satisfies(&m, &w("nope"), &parse("p").unwrap(), SemanticsMode::Raw).unwrap_err();
        assert!(matches!(err, SemError::Model(ModelError::UnknownWorld(_))), "{err}");
    }

    #[test]
    fn validity_on_a_model() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        assert!(valid_on_model(&m, &parse("p | q").unwrap(), SemanticsMode::Raw).unwrap());
        assert!(!valid_on_model(&m, &parse("p").unwrap(), SemanticsMode::Raw).unwrap());
    }
}
