//! Brute-force reference implementation of the largest autobisimulation,
//! plus seeded random model and formula generators for differential testing.
//!
//! The reference check shares no machinery with the engine: it enumerates
//! every partition of the world set (as restricted growth strings), re-checks
//! the bisimulation clauses with plain sets and the raw order alone, and
//! takes the union of everything that passes. The engine is correct on a
//! model exactly when it reproduces this answer.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{Formula, LanguageTag};
use crate::model::{Agent, PlausibilityModel, Prop, WorldId};

/// Largest world count the exhaustive search accepts by default.
pub const DEFAULT_ORACLE_BOUND: usize = 8;

#[derive(Error, Debug)]
pub enum OracleError {
    #[error("model has {n} worlds, above the exhaustive-search bound of {max}")]
    DomainTooLarge { n: usize, max: usize },
    #[error("no unique coarsest autobisimulation: the union of the passing partitions fails the clause check")]
    NoLargest,
}

/// Largest autobisimulation by exhaustive enumeration, as blocks of world
/// ids in ascending order of their least member.
pub fn oracle_largest(m: &PlausibilityModel) -> Result<Vec<BTreeSet<WorldId>>, OracleError> {
    oracle_largest_bounded(m, DEFAULT_ORACLE_BOUND)
}

pub fn oracle_largest_bounded(
    m: &PlausibilityModel,
    max: usize,
) -> Result<Vec<BTreeSet<WorldId>>, OracleError> {
    let n = m.n();
    if n > max {
        return Err(OracleError::DomainTooLarge { n, max });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let classes: Vec<Vec<usize>> =
        (0..m.agents().len()).map(|ai| epistemic_classes(m, ai)).collect();

    // union of every partition that passes the clause check, maintained as
    // a union-find with least-member roots
    let mut parent: Vec<usize> = (0..n).collect();
    let mut labels = vec![0usize; n];
    enumerate_partitions(&mut labels, 1, 0, &mut |labels| {
        if partition_passes(m, &classes, labels) {
            for i in 0..n {
                let first = (0..i).find(|&j| labels[j] == labels[i]).unwrap_or(i);
                union(&mut parent, first, i);
            }
        }
    });

    let union_labels: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    if !partition_passes(m, &classes, &union_labels) {
        return Err(OracleError::NoLargest);
    }
    let mut blocks: BTreeMap<usize, BTreeSet<WorldId>> = BTreeMap::new();
    for (i, &r) in union_labels.iter().enumerate() {
        blocks.entry(r).or_default().insert(m.worlds()[i].clone());
    }
    Ok(blocks.into_values().collect())
}

/// Every partition of {0..labels.len()-1} as a restricted growth string:
/// labels[0] = 0 and each later entry is at most one above the running max.
fn enumerate_partitions(
    labels: &mut Vec<usize>,
    i: usize,
    max_label: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if i >= labels.len() {
        f(labels);
        return;
    }
    for l in 0..=max_label + 1 {
        labels[i] = l;
        enumerate_partitions(labels, i + 1, max_label.max(l), f);
    }
}

fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut Vec<usize>, a: usize, b: usize) {
    let ra = find(parent, a);
    let rb = find(parent, b);
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    parent[hi] = lo;
}

/// Epistemic class labels from the raw order alone: connected components of
/// the edge set, taking edges in both directions.
fn epistemic_classes(m: &PlausibilityModel, ai: usize) -> Vec<usize> {
    let n = m.n();
    let mut parent: Vec<usize> = (0..n).collect();
    for x in 0..n {
        for y in 0..n {
            if m.ge_idx(ai, x, y) {
                union(&mut parent, x, y);
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// The order each agent compares worlds by once the partition is treated as
/// an autobisimulation candidate: w sits above v when every most plausible
/// world of w's block-within-class sits at or above every most plausible
/// world of v's.
fn naive_derived(
    m: &PlausibilityModel,
    ai: usize,
    classes: &[usize],
    labels: &[usize],
) -> Vec<Vec<bool>> {
    let n = m.n();
    let mins: Vec<BTreeSet<usize>> = (0..n)
        .map(|w| {
            let s: BTreeSet<usize> = (0..n)
                .filter(|&v| classes[v] == classes[w] && labels[v] == labels[w])
                .collect();
            s.iter()
                .copied()
                .filter(|&y| s.iter().all(|&y2| m.ge_idx(ai, y2, y)))
                .collect()
        })
        .collect();
    (0..n)
        .map(|w| {
            (0..n)
                .map(|v| {
                    mins[w]
                        .iter()
                        .all(|&y| mins[v].iter().all(|&z| m.ge_idx(ai, y, z)))
                })
                .collect()
        })
        .collect()
}

fn partition_passes(m: &PlausibilityModel, classes: &[Vec<usize>], labels: &[usize]) -> bool {
    let n = m.n();
    for w in 0..n {
        for v in 0..n {
            if labels[w] == labels[v] && m.val_at(w) != m.val_at(v) {
                return false;
            }
        }
    }
    for ai in 0..m.agents().len() {
        let ge = naive_derived(m, ai, &classes[ai], labels);
        for w in 0..n {
            for v in 0..n {
                if labels[w] != labels[v] {
                    continue;
                }
                // one step up (or down) from w must be matched by a step up
                // (or down) from v into the same block; running over both
                // pair orders covers the two back clauses as well
                for u in 0..n {
                    if ge[u][w] && !(0..n).any(|u2| labels[u2] == labels[u] && ge[u2][v]) {
                        return false;
                    }
                    if ge[w][u] && !(0..n).any(|u2| labels[u2] == labels[u] && ge[v][u2]) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

// --- seeded generators -------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ModelBounds {
    pub max_worlds: usize,
    pub max_agents: usize,
    pub max_props: usize,
}

impl Default for ModelBounds {
    fn default() -> Self {
        ModelBounds { max_worlds: 8, max_agents: 3, max_props: 4 }
    }
}

const AGENT_POOL: [&str; 3] = ["a", "b", "c"];
const PROP_POOL: [&str; 4] = ["p", "q", "r", "s"];

/// Deterministic random model: a seed always yields the same model, byte for
/// byte. Plausibility is drawn as a random partition into classes plus a
/// random rank per world, so every draw is a valid model.
pub fn random_model(seed: u64, bounds: &ModelBounds) -> PlausibilityModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=bounds.max_worlds.clamp(1, 8));
    let n_agents = rng.gen_range(1..=bounds.max_agents.clamp(1, AGENT_POOL.len()));
    let n_props = rng.gen_range(1..=bounds.max_props.clamp(1, PROP_POOL.len()));
    let agents: Vec<Agent> = AGENT_POOL[..n_agents]
        .iter()
        .map(|s| Agent::new(*s).expect("pool agent id"))
        .collect();
    let props: Vec<Prop> = PROP_POOL[..n_props]
        .iter()
        .map(|s| Prop::new(*s).expect("pool proposition"))
        .collect();
    let worlds: Vec<(WorldId, BTreeSet<Prop>)> = (0..n)
        .map(|i| {
            let val: BTreeSet<Prop> =
                props.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            (WorldId::new(format!("w{i}")).expect("generated world id"), val)
        })
        .collect();
    let mut plaus: BTreeMap<Agent, Vec<(WorldId, WorldId)>> = BTreeMap::new();
    for agent in &agents {
        let n_classes = rng.gen_range(1..=n);
        let class_of: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
        let rank: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        let mut edges = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if x != y && class_of[x] == class_of[y] && rank[x] >= rank[y] {
                    edges.push((worlds[x].0.clone(), worlds[y].0.clone()));
                }
            }
        }
        plaus.insert(agent.clone(), edges);
    }
    PlausibilityModel::new(worlds, agents, &plaus)
        .expect("class-plus-rank construction always yields a valid model")
}

#[derive(Clone, Debug)]
pub struct FormulaBounds {
    pub language: LanguageTag,
    pub max_depth: u32,
    pub max_degree: u32,
    pub props: Vec<Prop>,
    pub agents: Vec<Agent>,
}

impl FormulaBounds {
    /// Bounds drawing from a model's own vocabulary.
    pub fn for_model(m: &PlausibilityModel, language: LanguageTag) -> Self {
        FormulaBounds {
            language,
            max_depth: 4,
            max_degree: 3,
            props: m.props().into_iter().collect(),
            agents: m.agents().to_vec(),
        }
    }
}

/// Deterministic random formula within the given language fragment.
pub fn random_formula(seed: u64, bounds: &FormulaBounds) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_formula(&mut rng, bounds, bounds.max_depth)
}

fn gen_leaf(rng: &mut ChaCha8Rng, bounds: &FormulaBounds) -> Formula {
    if !bounds.props.is_empty() && rng.gen_range(0..8) < 7 {
        Formula::atom(bounds.props[rng.gen_range(0..bounds.props.len())].clone())
    } else if rng.gen_bool(0.5) {
        Formula::Top
    } else {
        Formula::Bot
    }
}

fn gen_formula(rng: &mut ChaCha8Rng, bounds: &FormulaBounds, depth: u32) -> Formula {
    if depth == 0 {
        return gen_leaf(rng, bounds);
    }
    // two leaf entries keep formulas from always saturating the depth budget
    let mut ops: Vec<u8> = vec![0, 0, 1, 2, 3, 4];
    if !bounds.agents.is_empty() {
        ops.extend([5, 6]);
        if LanguageTag::C.is_subset(bounds.language) {
            ops.extend([7, 8, 9]);
        }
        if LanguageTag::D.is_subset(bounds.language) {
            ops.extend([10, 11]);
        }
        if LanguageTag::S.is_subset(bounds.language) {
            ops.extend([12, 13]);
        }
    }
    let op = ops[rng.gen_range(0..ops.len())];
    let agent = |rng: &mut ChaCha8Rng| bounds.agents[rng.gen_range(0..bounds.agents.len())].clone();
    match op {
        0 => gen_leaf(rng, bounds),
        1 => Formula::not(gen_formula(rng, bounds, depth - 1)),
        2 => Formula::and(gen_formula(rng, bounds, depth - 1), gen_formula(rng, bounds, depth - 1)),
        3 => Formula::or(gen_formula(rng, bounds, depth - 1), gen_formula(rng, bounds, depth - 1)),
        4 => Formula::implies(
            gen_formula(rng, bounds, depth - 1),
            gen_formula(rng, bounds, depth - 1),
        ),
        5 => Formula::know(agent(rng), gen_formula(rng, bounds, depth - 1)),
        6 => Formula::khat(agent(rng), gen_formula(rng, bounds, depth - 1)),
        7 => Formula::cond_belief(
            agent(rng),
            gen_formula(rng, bounds, depth - 1),
            gen_formula(rng, bounds, depth - 1),
        ),
        8 => Formula::belief(agent(rng), gen_formula(rng, bounds, depth - 1)),
        9 => Formula::bhat(
            agent(rng),
            gen_formula(rng, bounds, depth - 1),
            gen_formula(rng, bounds, depth - 1),
        ),
        10 => Formula::deg_belief(
            agent(rng),
            rng.gen_range(0..=bounds.max_degree),
            gen_formula(rng, bounds, depth - 1),
        ),
        11 => Formula::bhat_deg(
            agent(rng),
            rng.gen_range(0..=bounds.max_degree),
            gen_formula(rng, bounds, depth - 1),
        ),
        12 => Formula::safe(agent(rng), gen_formula(rng, bounds, depth - 1)),
        _ => Formula::diamond(agent(rng), gen_formula(rng, bounds, depth - 1)),
    }
}
