//! Plausibility models: finite worlds, a valuation, and one plausibility
//! preorder per agent.
//!
//! The stored relation is always reflexively and transitively closed; loading
//! closes the listed edges before anything else looks at them. An edge pair
//! `[x, y]` means `x >=_a y`: y is at least as plausible as x. The epistemic
//! relation `~_a` is the symmetric closure of `>=_a`, and a model is valid
//! when every `>=_a` is a total preorder on each `~_a`-class (a well-preorder,
//! since everything here is finite).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;

/// World identifier. Letters, digits, underscore, plus `:` and `'`, which are
/// reserved for generated names (`L:`/`R:` in disjoint unions, `c:` in
/// contractions, primed fixture worlds).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct WorldId(String);

/// Agent name: a plain identifier, so it can appear inside formulas.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Agent(String);

/// Proposition name: a plain identifier, so it can appear inside formulas.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Prop(String);

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_world_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == ':' || c == '\'')
}

impl WorldId {
    pub fn new(s: impl Into<String>) -> Result<Self, ModelError> {
        let s = s.into();
        if is_world_token(&s) {
            Ok(WorldId(s))
        } else {
            Err(ModelError::BadWorldId(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Agent {
    pub fn new(s: impl Into<String>) -> Result<Self, ModelError> {
        let s = s.into();
        if is_ident(&s) {
            Ok(Agent(s))
        } else {
            Err(ModelError::BadName(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Prop {
    pub fn new(s: impl Into<String>) -> Result<Self, ModelError> {
        let s = s.into();
        if is_ident(&s) {
            Ok(Prop(s))
        } else {
            Err(ModelError::BadName(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WorldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Square boolean matrix for one agent's plausibility relation, kept with both
/// row (successor) and column (predecessor) views.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Rel {
    n: usize,
    rows: Vec<Bits>,
    cols: Vec<Bits>,
}

impl Rel {
    pub fn new(n: usize) -> Self {
        Rel { n, rows: vec![Bits::new(n); n], cols: vec![Bits::new(n); n] }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.rows[x].get(y)
    }

    pub fn set(&mut self, x: usize, y: usize) {
        self.rows[x].set(y);
        self.cols[y].set(x);
    }

    /// Successors of x: every y with x >= y.
    pub fn row(&self, x: usize) -> &Bits {
        &self.rows[x]
    }

    /// Predecessors of y: every x with x >= y.
    pub fn col(&self, y: usize) -> &Bits {
        &self.cols[y]
    }

    /// Minimum of ys under this order: the members every element of ys sits
    /// above.
    pub fn min_of(&self, ys: &Bits) -> Bits {
        let mut out = Bits::new(self.n);
        for y in ys.iter_ones() {
            if ys.is_subset(&self.cols[y]) {
                out.set(y);
            }
        }
        out
    }

    pub fn close_reflexive_transitive(&mut self) {
        for i in 0..self.n {
            self.rows[i].set(i);
        }
        for k in 0..self.n {
            let kr = self.rows[k].clone();
            for x in 0..self.n {
                if self.rows[x].get(k) {
                    self.rows[x].or_with(&kr);
                }
            }
        }
        // rebuild columns
        for c in &mut self.cols {
            *c = Bits::new(self.n);
        }
        for x in 0..self.n {
            for y in self.rows[x].clone().iter_ones() {
                self.cols[y].set(x);
            }
        }
    }
}

/// Per-agent epistemic classes: connected components of the symmetric closure.
#[derive(Clone, Debug)]
pub(crate) struct AgentClasses {
    pub class_of: Vec<usize>,
    pub members: Vec<Bits>,
}

fn components(n: usize, rel: &Rel) -> AgentClasses {
    let mut class_of = vec![usize::MAX; n];
    let mut members = Vec::new();
    for start in 0..n {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut mask = Bits::new(n);
        let mut stack = vec![start];
        class_of[start] = id;
        mask.set(start);
        while let Some(x) = stack.pop() {
            let mut nbrs = rel.row(x).clone();
            nbrs.or_with(rel.col(x));
            for y in nbrs.iter_ones() {
                if class_of[y] == usize::MAX {
                    class_of[y] = id;
                    mask.set(y);
                    stack.push(y);
                }
            }
        }
        members.push(mask);
    }
    AgentClasses { class_of, members }
}

/// Caches computed lazily per model value: the largest autobisimulation with
/// the normal relations derived from it, and the layer decompositions per
/// semantics mode. Write-once; never observable through the public API except
/// as saved work.
#[derive(Default)]
pub(crate) struct Extras {
    pub(crate) normal: OnceLock<Result<crate::bisim::NormalData, crate::bisim::EngineError>>,
    pub(crate) layers: [OnceLock<Vec<BTreeMap<usize, Vec<Bits>>>>; 2],
}

pub struct PlausibilityModel {
    worlds: Vec<WorldId>,
    agents: Vec<Agent>,
    valuation: Vec<BTreeSet<Prop>>,
    rels: Vec<Rel>,
    classes: Vec<AgentClasses>,
    pub(crate) extras: Extras,
}

impl Clone for PlausibilityModel {
    fn clone(&self) -> Self {
        PlausibilityModel {
            worlds: self.worlds.clone(),
            agents: self.agents.clone(),
            valuation: self.valuation.clone(),
            rels: self.rels.clone(),
            classes: self.classes.clone(),
            extras: Extras::default(),
        }
    }
}

impl PartialEq for PlausibilityModel {
    fn eq(&self, other: &Self) -> bool {
        self.worlds == other.worlds
            && self.agents == other.agents
            && self.valuation == other.valuation
            && self.rels == other.rels
    }
}

impl Eq for PlausibilityModel {}

// Debug by hand keeps the cache out of the output.
impl fmt::Debug for PlausibilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlausibilityModel")
            .field("worlds", &self.worlds)
            .field("agents", &self.agents)
            .field("valuation", &self.valuation)
            .finish_non_exhaustive()
    }
}

/// A model with a designated world.
#[derive(Clone, PartialEq, Debug)]
pub struct PointedModel {
    pub model: PlausibilityModel,
    pub world: WorldId,
}

impl PointedModel {
    pub fn new(model: PlausibilityModel, world: WorldId) -> Result<Self, ModelError> {
        if model.idx(&world).is_none() {
            return Err(ModelError::UnknownWorld(world.as_str().to_owned()));
        }
        Ok(PointedModel { model, world })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InvariantKind {
    NoAgents,
    NotReflexive,
    NotTransitive,
    IncomparableWithinClass,
    CrossClassEdge,
}

impl fmt::Display for InvariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InvariantKind::NoAgents => "agent set is empty",
            InvariantKind::NotReflexive => "relation is not reflexive",
            InvariantKind::NotTransitive => "relation is not transitive",
            InvariantKind::IncomparableWithinClass => "incomparable worlds within an epistemic class",
            InvariantKind::CrossClassEdge => "plausibility edge crosses epistemic classes",
        };
        f.write_str(s)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    pub invariant: InvariantKind,
    pub agent: Option<Agent>,
    pub witness: Option<(WorldId, WorldId)>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.invariant)?;
        if let Some(a) = &self.agent {
            write!(f, " (agent {a}")?;
            if let Some((x, y)) = &self.witness {
                write!(f, ", witness {x}, {y}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ViolationList(pub Vec<Violation>);

impl fmt::Display for ViolationList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Error, Debug)]
pub enum ModelError {
    #[error("model JSON: {0}")]
    Json(String),
    #[error("invalid world id {0:?}: allowed characters are letters, digits, underscore, colon, apostrophe")]
    BadWorldId(String),
    #[error("invalid name {0:?}: agent and proposition names are identifiers")]
    BadName(String),
    #[error("duplicate world id {0}")]
    DuplicateWorld(String),
    #[error("duplicate agent {0}")]
    DuplicateAgent(String),
    #[error("edge for agent {agent} mentions unknown world {world}")]
    UnknownWorldInEdge { agent: String, world: String },
    #[error("plausibility map mentions undeclared agent {0}")]
    UnknownAgentInPlaus(String),
    #[error("unknown world {0}")]
    UnknownWorld(String),
    #[error("unknown agent {0}")]
    UnknownAgent(String),
    #[error("worlds {0} and {1} lie in different epistemic classes")]
    MultiClass(String, String),
    #[error("model violates plausibility invariants: {0}")]
    Invalid(ViolationList),
    #[error("world renaming is not usable: {0}")]
    BadRenaming(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldDoc {
    id: String,
    #[serde(default)]
    val: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    worlds: Vec<WorldDoc>,
    agents: Vec<String>,
    #[serde(default)]
    plaus: BTreeMap<String, Vec<(String, String)>>,
}

impl PlausibilityModel {
    /// Build from parts, closing the relation, without the validity gate.
    /// Structural problems (bad ids, duplicates, unknown references) are
    /// still errors; plausibility invariants are left to [`validate`].
    ///
    /// [`validate`]: PlausibilityModel::validate
    pub fn from_parts(
        worlds: Vec<(WorldId, BTreeSet<Prop>)>,
        agents: Vec<Agent>,
        edges: &BTreeMap<Agent, Vec<(WorldId, WorldId)>>,
    ) -> Result<Self, ModelError> {
        let mut worlds = worlds;
        worlds.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in worlds.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ModelError::DuplicateWorld(pair[0].0.as_str().to_owned()));
            }
        }
        let mut agents = agents;
        agents.sort();
        for pair in agents.windows(2) {
            if pair[0] == pair[1] {
                return Err(ModelError::DuplicateAgent(pair[0].as_str().to_owned()));
            }
        }
        let n = worlds.len();
        let (world_ids, valuation): (Vec<_>, Vec<_>) = worlds.into_iter().unzip();
        let idx_of = |w: &WorldId| world_ids.binary_search(w).ok();
        let mut rels = vec![Rel::new(n); agents.len()];
        for (agent, pairs) in edges {
            let ai = agents
                .binary_search(agent)
                .map_err(|_| ModelError::UnknownAgentInPlaus(agent.as_str().to_owned()))?;
            for (x, y) in pairs {
                let xi = idx_of(x).ok_or_else(|| ModelError::UnknownWorldInEdge {
                    agent: agent.as_str().to_owned(),
                    world: x.as_str().to_owned(),
                })?;
                let yi = idx_of(y).ok_or_else(|| ModelError::UnknownWorldInEdge {
                    agent: agent.as_str().to_owned(),
                    world: y.as_str().to_owned(),
                })?;
                rels[ai].set(xi, yi);
            }
        }
        for rel in &mut rels {
            rel.close_reflexive_transitive();
        }
        Ok(Self::from_matrices(world_ids, valuation, agents, rels))
    }

    /// `from_parts` plus the validity gate: any violated invariant is an error.
    pub fn new(
        worlds: Vec<(WorldId, BTreeSet<Prop>)>,
        agents: Vec<Agent>,
        edges: &BTreeMap<Agent, Vec<(WorldId, WorldId)>>,
    ) -> Result<Self, ModelError> {
        let m = Self::from_parts(worlds, agents, edges)?;
        let violations = m.validate();
        if violations.is_empty() {
            Ok(m)
        } else {
            Err(ModelError::Invalid(ViolationList(violations)))
        }
    }

    /// Internal constructor over already-closed matrices. Worlds and agents
    /// must already be sorted and unique.
    pub(crate) fn from_matrices(
        worlds: Vec<WorldId>,
        valuation: Vec<BTreeSet<Prop>>,
        agents: Vec<Agent>,
        rels: Vec<Rel>,
    ) -> Self {
        debug_assert!(worlds.windows(2).all(|p| p[0] < p[1]));
        debug_assert!(agents.windows(2).all(|p| p[0] < p[1]));
        let n = worlds.len();
        let classes = rels.iter().map(|r| components(n, r)).collect();
        PlausibilityModel { worlds, agents, valuation, rels, classes, extras: Extras::default() }
    }

    pub fn n(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn valuation(&self, w: &WorldId) -> Result<&BTreeSet<Prop>, ModelError> {
        let i = self.idx(w).ok_or_else(|| ModelError::UnknownWorld(w.as_str().to_owned()))?;
        Ok(&self.valuation[i])
    }

    /// Raw plausibility test: does x >=_a y hold?
    pub fn ge(&self, agent: &Agent, x: &WorldId, y: &WorldId) -> Result<bool, ModelError> {
        let ai = self.require_agent(agent)?;
        let xi = self.require_world(x)?;
        let yi = self.require_world(y)?;
        Ok(self.rels[ai].get(xi, yi))
    }

    pub(crate) fn idx(&self, w: &WorldId) -> Option<usize> {
        self.worlds.binary_search(w).ok()
    }

    pub(crate) fn agent_idx(&self, a: &Agent) -> Option<usize> {
        self.agents.binary_search(a).ok()
    }

    pub(crate) fn require_world(&self, w: &WorldId) -> Result<usize, ModelError> {
        self.idx(w).ok_or_else(|| ModelError::UnknownWorld(w.as_str().to_owned()))
    }

    pub(crate) fn require_agent(&self, a: &Agent) -> Result<usize, ModelError> {
        self.agent_idx(a).ok_or_else(|| ModelError::UnknownAgent(a.as_str().to_owned()))
    }

    pub(crate) fn world_at(&self, i: usize) -> &WorldId {
        &self.worlds[i]
    }

    pub(crate) fn val_at(&self, i: usize) -> &BTreeSet<Prop> {
        &self.valuation[i]
    }

    pub(crate) fn rel(&self, ai: usize) -> &Rel {
        &self.rels[ai]
    }

    pub(crate) fn all_rels(&self) -> &[Rel] {
        &self.rels
    }

    pub(crate) fn agent_classes(&self, ai: usize) -> &AgentClasses {
        &self.classes[ai]
    }

    pub(crate) fn class_mask(&self, ai: usize, wi: usize) -> &Bits {
        &self.classes[ai].members[self.classes[ai].class_of[wi]]
    }

    pub(crate) fn ge_idx(&self, ai: usize, x: usize, y: usize) -> bool {
        self.rels[ai].get(x, y)
    }

    /// Minimum of ys under raw >=_a: the members every element of ys sits above.
    pub(crate) fn min_in(&self, ai: usize, ys: &Bits) -> Bits {
        self.rels[ai].min_of(ys)
    }

    /// Set-lifted comparison: every y in ys has every z in zs at least as
    /// plausible. Vacuously true when either side is empty.
    pub(crate) fn set_leq_idx(&self, ai: usize, ys: &Bits, zs: &Bits) -> bool {
        ys.iter_ones().all(|y| zs.is_subset(self.rels[ai].row(y)))
    }

    pub(crate) fn to_world_set(&self, bits: &Bits) -> BTreeSet<WorldId> {
        bits.iter_ones().map(|i| self.worlds[i].clone()).collect()
    }

    pub(crate) fn to_bits(&self, ws: &BTreeSet<WorldId>) -> Result<Bits, ModelError> {
        let mut out = Bits::new(self.n());
        for w in ws {
            out.set(self.require_world(w)?);
        }
        Ok(out)
    }

    pub(crate) fn prop_extension(&self, p: &Prop) -> Bits {
        let mut out = Bits::new(self.n());
        for (i, val) in self.valuation.iter().enumerate() {
            if val.contains(p) {
                out.set(i);
            }
        }
        out
    }

    /// All propositions appearing in some valuation, sorted.
    pub fn props(&self) -> BTreeSet<Prop> {
        self.valuation.iter().flatten().cloned().collect()
    }

    /// The epistemic class of w: the connected component of w under the
    /// symmetric closure of >=_a.
    pub fn epistemic_class(&self, agent: &Agent, w: &WorldId) -> Result<BTreeSet<WorldId>, ModelError> {
        let ai = self.require_agent(agent)?;
        let wi = self.require_world(w)?;
        Ok(self.to_world_set(self.class_mask(ai, wi)))
    }

    /// Most plausible members of ys. ys must sit inside one epistemic class.
    pub fn min_set(&self, agent: &Agent, ys: &BTreeSet<WorldId>) -> Result<BTreeSet<WorldId>, ModelError> {
        let ai = self.require_agent(agent)?;
        let bits = self.to_bits(ys)?;
        let mut seen_class: Option<usize> = None;
        for y in bits.iter_ones() {
            let c = self.classes[ai].class_of[y];
            match seen_class {
                None => seen_class = Some(c),
                Some(c0) if c0 != c => {
                    let first = self.classes[ai]
                        .members[c0]
                        .and(&bits)
                        .iter_ones()
                        .next()
                        .expect("class already seen");
                    return Err(ModelError::MultiClass(
                        self.worlds[first].as_str().to_owned(),
                        self.worlds[y].as_str().to_owned(),
                    ));
                }
                _ => {}
            }
        }
        Ok(self.to_world_set(&self.min_in(ai, &bits)))
    }

    /// Set-lifted >=_a on world sets; vacuously true when a side is empty.
    pub fn set_leq(
        &self,
        agent: &Agent,
        ys: &BTreeSet<WorldId>,
        zs: &BTreeSet<WorldId>,
    ) -> Result<bool, ModelError> {
        let ai = self.require_agent(agent)?;
        let ys = self.to_bits(ys)?;
        let zs = self.to_bits(zs)?;
        Ok(self.set_leq_idx(ai, &ys, &zs))
    }

    /// Check the plausibility invariants on the stored (closed) relations.
    /// Returns every violation found; an empty list means the model is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.agents.is_empty() {
            out.push(Violation { invariant: InvariantKind::NoAgents, agent: None, witness: None });
        }
        let n = self.n();
        for (ai, agent) in self.agents.iter().enumerate() {
            let rel = &self.rels[ai];
            for w in 0..n {
                if !rel.get(w, w) {
                    out.push(Violation {
                        invariant: InvariantKind::NotReflexive,
                        agent: Some(agent.clone()),
                        witness: Some((self.worlds[w].clone(), self.worlds[w].clone())),
                    });
                }
            }
            'trans: for x in 0..n {
                for y in rel.row(x).iter_ones() {
                    if !rel.row(y).is_subset(rel.row(x)) {
                        let z = rel
                            .row(y)
                            .iter_ones()
                            .find(|z| !rel.get(x, *z))
                            .expect("subset check failed");
                        out.push(Violation {
                            invariant: InvariantKind::NotTransitive,
                            agent: Some(agent.clone()),
                            witness: Some((self.worlds[x].clone(), self.worlds[z].clone())),
                        });
                        break 'trans;
                    }
                }
            }
            for x in 0..n {
                for y in rel.row(x).iter_ones() {
                    if self.classes[ai].class_of[x] != self.classes[ai].class_of[y] {
                        out.push(Violation {
                            invariant: InvariantKind::CrossClassEdge,
                            agent: Some(agent.clone()),
                            witness: Some((self.worlds[x].clone(), self.worlds[y].clone())),
                        });
                    }
                }
            }
            for members in &self.classes[ai].members {
                let ws: Vec<usize> = members.iter_ones().collect();
                for (i, &x) in ws.iter().enumerate() {
                    for &y in &ws[i + 1..] {
                        if !rel.get(x, y) && !rel.get(y, x) {
                            out.push(Violation {
                                invariant: InvariantKind::IncomparableWithinClass,
                                agent: Some(agent.clone()),
                                witness: Some((self.worlds[x].clone(), self.worlds[y].clone())),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Disjoint union. Left worlds are renamed `L:<id>`, right worlds `R:<id>`;
    /// the returned maps record the renaming. Agents are shared; an agent
    /// missing on one side relates that side's worlds only reflexively.
    pub fn disjoint_union(
        &self,
        other: &Self,
    ) -> (Self, BTreeMap<WorldId, WorldId>, BTreeMap<WorldId, WorldId>) {
        let mk = |prefix: &str, w: &WorldId| {
            WorldId::new(format!("{prefix}{w}")).expect("prefixed id keeps the allowed charset")
        };
        let lmap: BTreeMap<WorldId, WorldId> =
            self.worlds.iter().map(|w| (w.clone(), mk("L:", w))).collect();
        let rmap: BTreeMap<WorldId, WorldId> =
            other.worlds.iter().map(|w| (w.clone(), mk("R:", w))).collect();
        let mut worlds: Vec<(WorldId, BTreeSet<Prop>)> = Vec::new();
        for (i, w) in self.worlds.iter().enumerate() {
            worlds.push((lmap[w].clone(), self.valuation[i].clone()));
        }
        for (i, w) in other.worlds.iter().enumerate() {
            worlds.push((rmap[w].clone(), other.valuation[i].clone()));
        }
        let agents: Vec<Agent> = {
            let mut s: BTreeSet<Agent> = self.agents.iter().cloned().collect();
            s.extend(other.agents.iter().cloned());
            s.into_iter().collect()
        };
        let mut edges: BTreeMap<Agent, Vec<(WorldId, WorldId)>> = BTreeMap::new();
        for (ai, agent) in self.agents.iter().enumerate() {
            let list = edges.entry(agent.clone()).or_default();
            for x in 0..self.n() {
                for y in self.rels[ai].row(x).iter_ones() {
                    list.push((lmap[&self.worlds[x]].clone(), lmap[&self.worlds[y]].clone()));
                }
            }
        }
        for (ai, agent) in other.agents.iter().enumerate() {
            let list = edges.entry(agent.clone()).or_default();
            for x in 0..other.n() {
                for y in other.rels[ai].row(x).iter_ones() {
                    list.push((rmap[&other.worlds[x]].clone(), rmap[&other.worlds[y]].clone()));
                }
            }
        }
        let union = Self::from_parts(worlds, agents, &edges)
            .expect("disjoint union of well-formed models is well-formed");
        (union, lmap, rmap)
    }

    /// Rebuild the model with worlds renamed through a total injective map.
    pub fn rename_worlds(&self, map: &BTreeMap<WorldId, WorldId>) -> Result<Self, ModelError> {
        let lookup = |w: &WorldId| -> Result<WorldId, ModelError> {
            map.get(w)
                .cloned()
                .ok_or_else(|| ModelError::BadRenaming(format!("world {w} has no image")))
        };
        let images: BTreeSet<&WorldId> = map.values().collect();
        if images.len() != map.len() {
            return Err(ModelError::BadRenaming("map is not injective".to_owned()));
        }
        let mut worlds = Vec::new();
        for (i, w) in self.worlds.iter().enumerate() {
            worlds.push((lookup(w)?, self.valuation[i].clone()));
        }
        let mut edges: BTreeMap<Agent, Vec<(WorldId, WorldId)>> = BTreeMap::new();
        for (ai, agent) in self.agents.iter().enumerate() {
            let list = edges.entry(agent.clone()).or_default();
            for x in 0..self.n() {
                for y in self.rels[ai].row(x).iter_ones() {
                    list.push((lookup(&self.worlds[x])?, lookup(&self.worlds[y])?));
                }
            }
        }
        Self::from_parts(worlds, self.agents.clone(), &edges)
    }

    /// Serialize to the interface JSON: worlds and agents sorted, and each
    /// agent's closed relation listed as its sorted non-reflexive pairs.
    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            worlds: self
                .worlds
                .iter()
                .zip(&self.valuation)
                .map(|(w, val)| WorldDoc {
                    id: w.as_str().to_owned(),
                    val: val.iter().map(|p| p.as_str().to_owned()).collect(),
                })
                .collect(),
            agents: self.agents.iter().map(|a| a.as_str().to_owned()).collect(),
            plaus: self
                .agents
                .iter()
                .enumerate()
                .map(|(ai, a)| {
                    let mut pairs = Vec::new();
                    for x in 0..self.n() {
                        for y in self.rels[ai].row(x).iter_ones() {
                            if x != y {
                                pairs.push((
                                    self.worlds[x].as_str().to_owned(),
                                    self.worlds[y].as_str().to_owned(),
                                ));
                            }
                        }
                    }
                    pairs.sort();
                    (a.as_str().to_owned(), pairs)
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("model document serializes");
        s.push('\n');
        s
    }
}

/// Parse the interface JSON without the validity gate (the relation is still
/// closed). Use this to inspect violations of an ill-formed model.
pub fn parse_model_json(text: &str) -> Result<PlausibilityModel, ModelError> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
    let mut worlds = Vec::new();
    for w in doc.worlds {
        let id = WorldId::new(w.id)?;
        let mut val = BTreeSet::new();
        for p in w.val {
            val.insert(Prop::new(p)?);
        }
        worlds.push((id, val));
    }
    let mut agents = Vec::new();
    for a in doc.agents {
        agents.push(Agent::new(a)?);
    }
    let mut edges: BTreeMap<Agent, Vec<(WorldId, WorldId)>> = BTreeMap::new();
    for (a, pairs) in doc.plaus {
        let agent = Agent::new(a)?;
        let list = edges.entry(agent).or_default();
        for (x, y) in pairs {
            list.push((WorldId::new(x)?, WorldId::new(y)?));
        }
    }
    PlausibilityModel::from_parts(worlds, agents, &edges)
}

/// Load a model from the interface JSON: parse, close, validate. Any violated
/// invariant is an error.
pub fn load_model(text: &str) -> Result<PlausibilityModel, ModelError> {
    let m = parse_model_json(text)?;
    let violations = m.validate();
    if violations.is_empty() {
        Ok(m)
    } else {
        Err(ModelError::Invalid(ViolationList(violations)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ml_json() -> &'static str {
        r#"{
  "worlds": [
    {"id": "w1", "val": ["p"]},
    {"id": "w2", "val": ["p"]},
    {"id": "w3", "val": ["p"]},
    {"id": "w4", "val": ["q"]},
    {"id": "w5", "val": ["q"]}
  ],
  "agents": ["a", "b"],
  "plaus": {
    "a": [["w3", "w2"], ["w2", "w1"], ["w3", "w1"]],
    "b": [["w1", "w4"], ["w3", "w5"]]
  }
}"#
    }

    fn w(s: &str) -> WorldId {
        WorldId::new(s).unwrap()
    }

    fn ag(s: &str) -> Agent {
        Agent::new(s).unwrap()
    }

    fn ws(ids: &[&str]) -> BTreeSet<WorldId> {
        ids.iter().map(|s| w(s)).collect()
    }

    #[test]
    fn load_closes_reflexively_and_transitively() {
        let m = load_model(
            r#"{"worlds":[{"id":"x","val":[]},{"id":"y","val":[]},{"id":"z","val":[]}],
                "agents":["a"],
                "plaus":{"a":[["x","y"],["y","z"]]}}"#,
        )
        .unwrap();
        assert!(m.ge(&ag("a"), &w("x"), &w("z")).unwrap(), "transitive edge x >= z");
        assert!(m.ge(&ag("a"), &w("y"), &w("y")).unwrap(), "reflexive edge");
        assert!(!m.ge(&ag("a"), &w("z"), &w("x")).unwrap());
    }

    #[test]
    fn ml_epistemic_classes() {
        let m = load_model(ml_json()).unwrap();
        assert_eq!(m.epistemic_class(&ag("a"), &w("w1")).unwrap(), ws(&["w1", "w2", "w3"]));
        assert_eq!(m.epistemic_class(&ag("a"), &w("w4")).unwrap(), ws(&["w4"]));
        assert_eq!(m.epistemic_class(&ag("b"), &w("w1")).unwrap(), ws(&["w1", "w4"]));
        assert_eq!(m.epistemic_class(&ag("b"), &w("w3")).unwrap(), ws(&["w3", "w5"]));
        assert_eq!(m.epistemic_class(&ag("b"), &w("w2")).unwrap(), ws(&["w2"]));
    }

    #[test]
    fn ml_min_set_and_set_leq() {
        let m = load_model(ml_json()).unwrap();
        let a = ag("a");
        assert_eq!(m.min_set(&a, &ws(&["w1", "w2", "w3"])).unwrap(), ws(&["w1"]));
        assert_eq!(m.min_set(&a, &ws(&["w1", "w3"])).unwrap(), ws(&["w1"]));
        assert_eq!(m.min_set(&a, &ws(&[])).unwrap(), ws(&[]));
        assert!(matches!(
            m.min_set(&a, &ws(&["w1", "w4"])),
            Err(ModelError::MultiClass(_, _))
        ));
        assert!(m.set_leq(&a, &ws(&["w2"]), &ws(&["w1"])).unwrap());
        assert!(!m.set_leq(&a, &ws(&["w1"]), &ws(&["w2"])).unwrap());
        assert!(m.set_leq(&a, &ws(&[]), &ws(&["w1"])).unwrap(), "vacuous on empty side");
        assert!(m.set_leq(&a, &ws(&["w2", "w3"]), &ws(&["w1"])).unwrap());
    }

    #[test]
    fn validate_reports_incomparable_within_class() {
        // x and z are epistemically connected through y but incomparable.
        let m = parse_model_json(
            r#"{"worlds":[{"id":"x"},{"id":"y"},{"id":"z"}],
                "agents":["a"],
                "plaus":{"a":[["x","y"],["z","y"]]}}"#,
        )
        .unwrap();
        let vs = m.validate();
        assert_eq!(vs.len(), 1, "{vs:?}");
        assert_eq!(vs[0].invariant, InvariantKind::IncomparableWithinClass);
        assert_eq!(vs[0].witness, Some((w("x"), w("z"))));
    }

    #[test]
    fn validate_reports_empty_agent_set() {
        let m = parse_model_json(r#"{"worlds":[{"id":"x"}],"agents":[]}"#).unwrap();
        let vs = m.validate();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].invariant, InvariantKind::NoAgents);
    }

    #[test]
    fn valid_model_has_no_violations() {
        assert!(load_model(ml_json()).unwrap().validate().is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = load_model(r#"{"worlds":[{"id":"x"}],"agents":["a"],"extra":1}"#).unwrap_err();
        assert!(matches!(err, ModelError::Json(_)), "{err}");
    }

    #[test]
    fn unknown_world_in_edge_is_an_error() {
        let err = load_model(
            r#"{"worlds":[{"id":"x"}],"agents":["a"],"plaus":{"a":[["x","nope"]]}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::UnknownWorldInEdge { .. }), "{err}");
    }

    #[test]
    fn undeclared_agent_in_plaus_is_an_error() {
        let err = load_model(
            r#"{"worlds":[{"id":"x"}],"agents":["a"],"plaus":{"c":[["x","x"]]}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::UnknownAgentInPlaus(_)), "{err}");
    }

    #[test]
    fn json_round_trip_is_stable() {
        let m = load_model(ml_json()).unwrap();
        let emitted = m.to_json();
        let m2 = load_model(&emitted).unwrap();
        assert_eq!(m, m2);
        assert_eq!(emitted, m2.to_json(), "emission is a fixed point");
    }

    #[test]
    fn disjoint_union_preserves_structure() {
        let m = load_model(ml_json()).unwrap();
        let single = load_model(r#"{"worlds":[{"id":"w1","val":["q"]}],"agents":["a"]}"#).unwrap();
        let (u, lmap, rmap) = m.disjoint_union(&single);
        assert_eq!(u.n(), 6);
        assert_eq!(lmap[&w("w1")], w("L:w1"));
        assert_eq!(rmap[&w("w1")], w("R:w1"));
        assert!(u.validate().is_empty());
        assert_eq!(
            u.epistemic_class(&ag("a"), &w("L:w1")).unwrap(),
            ws(&["L:w1", "L:w2", "L:w3"])
        );
        assert_eq!(u.epistemic_class(&ag("b"), &w("R:w1")).unwrap(), ws(&["R:w1"]));
        assert!(u.ge(&ag("a"), &w("L:w3"), &w("L:w1")).unwrap());
        assert!(!u.ge(&ag("a"), &w("L:w1"), &w("R:w1")).unwrap());
        // self-union works because the prefixes keep ids distinct
        let (uu, _, _) = m.disjoint_union(&m);
        assert_eq!(uu.n(), 10);
        assert!(uu.validate().is_empty());
    }

    #[test]
    fn empty_min_on_singleton_class() {
        let m = load_model(r#"{"worlds":[{"id":"x","val":[]}],"agents":["a"]}"#).unwrap();
        assert_eq!(m.min_set(&ag("a"), &ws(&["x"])).unwrap(), ws(&["x"]));
    }

    #[test]
    fn world_ids_allow_generated_charset() {
        assert!(WorldId::new("c:u1").is_ok());
        assert!(WorldId::new("x'").is_ok());
        assert!(WorldId::new("w 1").is_err());
        assert!(WorldId::new("").is_err());
        assert!(Agent::new("a'").is_err());
        assert!(Prop::new("1p").is_err());
    }
}
