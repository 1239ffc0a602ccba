//! Bisimulation machinery for plausibility models.
//!
//! Everything pivots on one construction: a relation R between worlds induces,
//! for each agent, a *derived* plausibility order. Writing [w] for the class
//! of w under the equivalence closure of R, the derived order puts w above v
//! exactly when `Min_a([w] ∩ class_a(w)) >=_a Min_a([v] ∩ class_a(v))` under
//! the set lift. The bisimulation clauses quantify over this derived order
//! rather than the raw one; an autobisimulation is a non-empty R on one model
//! whose pairs agree on atoms and satisfy the four zig-zag clauses in both
//! order directions.
//!
//! The largest autobisimulation is computed by signature refinement starting
//! from the valuation partition and verified against the clause checker; if
//! verification ever failed, an exhaustive search over equivalence partitions
//! (bounded by `max_brute` worlds) would take over.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bits::Bits;
use crate::model::{Agent, ModelError, PlausibilityModel, PointedModel, Rel, WorldId};
use crate::partition::Partition;

/// Default world-count cap for the exhaustive fallback search.
pub const DEFAULT_MAX_BRUTE: usize = 8;

#[derive(Error, Clone, PartialEq, Eq, Debug)]
pub enum EngineError {
    #[error("refined partition failed verification on a model with {n} worlds; exhaustive search is capped at {max}")]
    FallbackExhausted { n: usize, max: usize },
    #[error("no largest autobisimulation: the union of verified candidates fails the clauses")]
    NoLargest,
}

/// Largest autobisimulation as a partition, with the derived (normal)
/// relations it induces. Cached per model value.
pub(crate) struct NormalData {
    pub(crate) part: Partition,
    pub(crate) rels: Vec<Rel>,
}

fn closure_partition(
    m: &PlausibilityModel,
    pairs: &[(WorldId, WorldId)],
) -> Result<Partition, ModelError> {
    let mut idx = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        idx.push((m.require_world(x)?, m.require_world(y)?));
    }
    Ok(Partition::from_pairs(m.n(), idx))
}

/// Equivalence closure of a world relation, as blocks sorted by least member.
pub fn equivalence_closure(
    m: &PlausibilityModel,
    pairs: &[(WorldId, WorldId)],
) -> Result<Vec<BTreeSet<WorldId>>, ModelError> {
    let part = closure_partition(m, pairs)?;
    Ok(part.blocks().iter().map(|b| m.to_world_set(b)).collect())
}

/// Derived order for one agent over the blocks of `part`.
pub(crate) fn derived_rel_for(m: &PlausibilityModel, ai: usize, part: &Partition) -> Rel {
    let n = m.n();
    let mut cache: BTreeMap<(usize, usize), Bits> = BTreeMap::new();
    let mins: Vec<Bits> = (0..n)
        .map(|w| {
            let cls = m.agent_classes(ai).class_of[w];
            cache
                .entry((part.rep_of(w), cls))
                .or_insert_with(|| {
                    let t = part.block_of(w).and(m.class_mask(ai, w));
                    m.min_in(ai, &t)
                })
                .clone()
        })
        .collect();
    let mut rel = Rel::new(n);
    for x in 0..n {
        for y in 0..n {
            if m.set_leq_idx(ai, &mins[x], &mins[y]) {
                rel.set(x, y);
            }
        }
    }
    rel
}

pub(crate) fn derived_rels(m: &PlausibilityModel, part: &Partition) -> Vec<Rel> {
    (0..m.agents().len()).map(|ai| derived_rel_for(m, ai, part)).collect()
}

/// Derived order for one agent, as the full list of ordered pairs `(x, y)`
/// with x derived-above y. The given relation is closed to an equivalence
/// first; pairs are sorted by world id.
pub fn derived_relation(
    m: &PlausibilityModel,
    agent: &Agent,
    pairs: &[(WorldId, WorldId)],
) -> Result<Vec<(WorldId, WorldId)>, ModelError> {
    let ai = m.require_agent(agent)?;
    let part = closure_partition(m, pairs)?;
    let rel = derived_rel_for(m, ai, &part);
    let mut out = Vec::new();
    for x in 0..m.n() {
        for y in rel.row(x).iter_ones() {
            out.push((m.world_at(x).clone(), m.world_at(y).clone()));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BisimClause {
    NonEmpty,
    Atoms,
    ForthGe,
    ForthLe,
    BackGe,
    BackLe,
}

impl fmt::Display for BisimClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BisimClause::NonEmpty => "non-empty",
            BisimClause::Atoms => "atoms",
            BisimClause::ForthGe => "forth-ge",
            BisimClause::ForthLe => "forth-le",
            BisimClause::BackGe => "back-ge",
            BisimClause::BackLe => "back-le",
        };
        f.write_str(s)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BisimViolation {
    pub clause: BisimClause,
    pub agent: Option<Agent>,
    pub pair: Option<(WorldId, WorldId)>,
    /// For a forth clause the unmatched world sits on the left side of the
    /// pair; for a back clause, on the right.
    pub witness: Option<WorldId>,
}

impl fmt::Display for BisimViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause {} fails", self.clause)?;
        if let Some((w, v)) = &self.pair {
            write!(f, " for pair ({w}, {v})")?;
        }
        if let Some(a) = &self.agent {
            write!(f, ", agent {a}")?;
        }
        if let Some(u) = &self.witness {
            write!(f, ", witness {u}")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BisimReport {
    pub holds: bool,
    pub violations: Vec<BisimViolation>,
}

/// Check whether `pairs` (as given, not closed) is an autobisimulation.
/// Reports one witness per failing clause, agent, and pair.
pub fn check_autobisimulation(
    m: &PlausibilityModel,
    pairs: &[(WorldId, WorldId)],
) -> Result<BisimReport, ModelError> {
    let mut rset: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (x, y) in pairs {
        rset.insert((m.require_world(x)?, m.require_world(y)?));
    }
    let mut violations = Vec::new();
    if rset.is_empty() {
        violations.push(BisimViolation {
            clause: BisimClause::NonEmpty,
            agent: None,
            pair: None,
            witness: None,
        });
        return Ok(BisimReport { holds: false, violations });
    }
    let part = Partition::from_pairs(m.n(), rset.iter().copied());
    let drels = derived_rels(m, &part);
    let wid = |i: usize| m.world_at(i).clone();
    for &(w, v) in &rset {
        if m.val_at(w) != m.val_at(v) {
            violations.push(BisimViolation {
                clause: BisimClause::Atoms,
                agent: None,
                pair: Some((wid(w), wid(v))),
                witness: None,
            });
        }
        for (ai, agent) in m.agents().iter().enumerate() {
            let d = &drels[ai];
            let mut push = |clause: BisimClause, witness: usize| {
                violations.push(BisimViolation {
                    clause,
                    agent: Some(agent.clone()),
                    pair: Some((wid(w), wid(v))),
                    witness: Some(wid(witness)),
                });
            };
            // forth-ge: every w' derived-above w needs v' derived-above v, w'Rv'
            if let Some(wp) = d
                .col(w)
                .iter_ones()
                .find(|&wp| !d.col(v).iter_ones().any(|vp| rset.contains(&(wp, vp))))
            {
                push(BisimClause::ForthGe, wp);
            }
            // forth-le: every w' derived-below w needs v' derived-below v, w'Rv'
            if let Some(wp) = d
                .row(w)
                .iter_ones()
                .find(|&wp| !d.row(v).iter_ones().any(|vp| rset.contains(&(wp, vp))))
            {
                push(BisimClause::ForthLe, wp);
            }
            // back-ge: every v' derived-above v needs w' derived-above w, w'Rv'
            if let Some(vp) = d
                .col(v)
                .iter_ones()
                .find(|&vp| !d.col(w).iter_ones().any(|wp| rset.contains(&(wp, vp))))
            {
                push(BisimClause::BackGe, vp);
            }
            // back-le: every v' derived-below v needs w' derived-below w, w'Rv'
            if let Some(vp) = d
                .row(v)
                .iter_ones()
                .find(|&vp| !d.row(w).iter_ones().any(|wp| rset.contains(&(wp, vp))))
            {
                push(BisimClause::BackLe, vp);
            }
        }
    }
    Ok(BisimReport { holds: violations.is_empty(), violations })
}

/// Fast clause check for an equivalence partition taken as the relation R.
/// Back clauses follow from the forth clauses of the swapped pair, so only
/// the forth directions are tested, over every ordered same-block pair.
pub(crate) fn partition_is_autobisimulation(m: &PlausibilityModel, part: &Partition) -> bool {
    let n = m.n();
    if n == 0 {
        return false;
    }
    let drels = derived_rels(m, part);
    let block_mask: Vec<Bits> = (0..n).map(|w| part.block_of(w)).collect();
    for (w, v) in part.pairs() {
        if m.val_at(w) != m.val_at(v) {
            return false;
        }
        for d in &drels {
            for (x, y) in [(w, v), (v, w)] {
                let ge_ok = d
                    .col(x)
                    .iter_ones()
                    .all(|xp| !block_mask[xp].and(d.col(y)).is_empty());
                if !ge_ok {
                    return false;
                }
                let le_ok = d
                    .row(x)
                    .iter_ones()
                    .all(|xp| !block_mask[xp].and(d.row(y)).is_empty());
                if !le_ok {
                    return false;
                }
            }
        }
    }
    true
}

/// Position of a world's own block relative to another block, for one agent.
/// "Below" means the own block's most plausible members sit strictly below
/// (more plausible than) the other block's, within the world's class.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) enum Pos {
    Below,
    Equal,
    Above,
    Absent,
    Incomparable,
}

pub(crate) struct RefineRound {
    pub(crate) part: Partition,
    /// Signature key order: (agent index, block index into `part.blocks()`).
    pub(crate) keys: Vec<(usize, usize)>,
    /// `sigs[w][k]` is world w's position for `keys[k]`.
    pub(crate) sigs: Vec<Vec<Pos>>,
}

pub(crate) struct RefineHistory {
    pub(crate) rounds: Vec<RefineRound>,
    pub(crate) final_part: Partition,
}

fn block_class_mins(
    m: &PlausibilityModel,
    cache: &mut BTreeMap<(usize, usize, usize), Option<Bits>>,
    blocks: &[Bits],
    ai: usize,
    bi: usize,
    w: usize,
) -> Option<Bits> {
    let cls = m.agent_classes(ai).class_of[w];
    cache
        .entry((ai, bi, cls))
        .or_insert_with(|| {
            let cc = blocks[bi].and(m.class_mask(ai, w));
            if cc.is_empty() {
                None
            } else {
                Some(m.min_in(ai, &cc))
            }
        })
        .clone()
}

fn compute_round(m: &PlausibilityModel, part: &Partition) -> RefineRound {
    let n = m.n();
    let blocks = part.blocks();
    let mut blk_idx = vec![0usize; n];
    for (bi, b) in blocks.iter().enumerate() {
        for w in b.iter_ones() {
            blk_idx[w] = bi;
        }
    }
    let mut keys = Vec::with_capacity(m.agents().len() * blocks.len());
    for ai in 0..m.agents().len() {
        for bi in 0..blocks.len() {
            keys.push((ai, bi));
        }
    }
    let mut cache: BTreeMap<(usize, usize, usize), Option<Bits>> = BTreeMap::new();
    let mut sigs = Vec::with_capacity(n);
    for w in 0..n {
        let mut sig = Vec::with_capacity(keys.len());
        for &(ai, bi) in &keys {
            let own = block_class_mins(m, &mut cache, &blocks, ai, blk_idx[w], w)
                .expect("a world's own block meets its own class");
            let pos = match block_class_mins(m, &mut cache, &blocks, ai, bi, w) {
                None => Pos::Absent,
                Some(mc) => {
                    let other_above_own = m.set_leq_idx(ai, &mc, &own);
                    let own_above_other = m.set_leq_idx(ai, &own, &mc);
                    match (other_above_own, own_above_other) {
                        (true, true) => Pos::Equal,
                        (true, false) => Pos::Below,
                        (false, true) => Pos::Above,
                        (false, false) => Pos::Incomparable,
                    }
                }
            };
            sig.push(pos);
        }
        sigs.push(sig);
    }
    RefineRound { part: part.clone(), keys, sigs }
}

/// Refine the valuation partition by position signatures to a fixpoint.
/// Signatures only separate worlds that no autobisimulation can relate, so
/// the fixpoint can only be too fine, never too coarse; callers verify it.
pub(crate) fn refine(m: &PlausibilityModel) -> RefineHistory {
    let n = m.n();
    let labels: Vec<_> = (0..n).map(|i| m.val_at(i)).collect();
    let mut part = Partition::from_labels(&labels);
    let mut rounds = Vec::new();
    loop {
        if part.count() == n {
            return RefineHistory { rounds, final_part: part };
        }
        let round = compute_round(m, &part);
        let labels: Vec<(usize, Vec<Pos>)> =
            (0..n).map(|w| (part.rep_of(w), round.sigs[w].clone())).collect();
        let next = Partition::from_labels(&labels);
        debug_assert!(next.refines(&part), "rounds only ever split blocks");
        let stop = next == part;
        rounds.push(round);
        if stop {
            return RefineHistory { rounds, final_part: next };
        }
        part = next;
    }
}

fn brute_force_largest(m: &PlausibilityModel) -> Result<Partition, EngineError> {
    let n = m.n();
    let labels: Vec<_> = (0..n).map(|i| m.val_at(i)).collect();
    let vpart = Partition::from_labels(&labels);
    let vlab: Vec<usize> = (0..n).map(|i| vpart.rep_of(i)).collect();
    let mut pass_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut assign = vec![0usize; n];
    let mut block_lab: Vec<usize> = Vec::new();
    search_partitions(m, 0, &vlab, &mut assign, &mut block_lab, &mut pass_pairs);
    let union = Partition::from_pairs(n, pass_pairs);
    if partition_is_autobisimulation(m, &union) {
        Ok(union)
    } else {
        Err(EngineError::NoLargest)
    }
}

/// Enumerate equivalence partitions in restricted-growth order, pruned so a
/// world only joins blocks with its own valuation.
fn search_partitions(
    m: &PlausibilityModel,
    i: usize,
    vlab: &[usize],
    assign: &mut Vec<usize>,
    block_lab: &mut Vec<usize>,
    out: &mut BTreeSet<(usize, usize)>,
) {
    if i == m.n() {
        let part = Partition::from_labels(assign);
        if partition_is_autobisimulation(m, &part) {
            out.extend(part.pairs());
        }
        return;
    }
    for b in 0..block_lab.len() {
        if block_lab[b] == vlab[i] {
            assign[i] = b;
            search_partitions(m, i + 1, vlab, assign, block_lab, out);
        }
    }
    block_lab.push(vlab[i]);
    assign[i] = block_lab.len() - 1;
    search_partitions(m, i + 1, vlab, assign, block_lab, out);
    block_lab.pop();
}

pub(crate) fn largest_partition(
    m: &PlausibilityModel,
    max_brute: usize,
) -> Result<(Partition, bool), EngineError> {
    let n = m.n();
    if n == 0 {
        return Ok((Partition::identity(0), false));
    }
    let cand = refine(m).final_part;
    // the identity relation is always an autobisimulation, so a discrete
    // fixpoint needs no clause check
    if cand.count() == n || partition_is_autobisimulation(m, &cand) {
        return Ok((cand, false));
    }
    if n > max_brute {
        return Err(EngineError::FallbackExhausted { n, max: max_brute });
    }
    Ok((brute_force_largest(m)?, true))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LargestOutcome {
    pub blocks: Vec<BTreeSet<WorldId>>,
    /// True when the refined partition failed verification and the result
    /// came from the exhaustive search instead.
    pub used_fallback: bool,
}

pub fn largest_autobisimulation(
    m: &PlausibilityModel,
) -> Result<Vec<BTreeSet<WorldId>>, EngineError> {
    largest_autobisimulation_detailed(m, DEFAULT_MAX_BRUTE).map(|o| o.blocks)
}

pub fn largest_autobisimulation_detailed(
    m: &PlausibilityModel,
    max_brute: usize,
) -> Result<LargestOutcome, EngineError> {
    let (part, used_fallback) = largest_partition(m, max_brute)?;
    let blocks = part.blocks().iter().map(|b| m.to_world_set(b)).collect();
    Ok(LargestOutcome { blocks, used_fallback })
}

/// Cached largest autobisimulation plus the normal relations it derives.
pub(crate) fn normal_data(m: &PlausibilityModel) -> Result<&NormalData, EngineError> {
    m.extras
        .normal
        .get_or_init(|| {
            largest_partition(m, DEFAULT_MAX_BRUTE).map(|(part, _)| {
                let rels = derived_rels(m, &part);
                NormalData { part, rels }
            })
        })
        .as_ref()
        .map_err(Clone::clone)
}

/// Same worlds and valuation, with each plausibility order replaced by the
/// one derived from the largest autobisimulation. Idempotent.
pub fn normalize(m: &PlausibilityModel) -> Result<PlausibilityModel, EngineError> {
    let nd = normal_data(m)?;
    let mut rels = nd.rels.clone();
    for r in &mut rels {
        r.close_reflexive_transitive();
    }
    let valuation = (0..m.n()).map(|i| m.val_at(i).clone()).collect();
    Ok(PlausibilityModel::from_matrices(
        m.worlds().to_vec(),
        valuation,
        m.agents().to_vec(),
        rels,
    ))
}

/// Quotient by the largest autobisimulation. Each block becomes one world,
/// named `c:` plus the block's least member; block X sits above block Y when
/// some member of X sits above some member of Y in the normal order. Also
/// returns the map from original worlds to their block's world.
pub fn contract(
    m: &PlausibilityModel,
) -> Result<(PlausibilityModel, BTreeMap<WorldId, WorldId>), EngineError> {
    let nd = normal_data(m)?;
    let blocks = nd.part.blocks();
    let reps: Vec<usize> = blocks
        .iter()
        .map(|b| b.iter_ones().next().expect("non-empty block"))
        .collect();
    let names: Vec<WorldId> = reps
        .iter()
        .map(|&r| {
            WorldId::new(format!("c:{}", m.world_at(r)))
                .expect("contracted id keeps the allowed charset")
        })
        .collect();
    let worlds: Vec<_> = reps
        .iter()
        .zip(&names)
        .map(|(&r, name)| (name.clone(), m.val_at(r).clone()))
        .collect();
    let mut map = BTreeMap::new();
    for (bi, b) in blocks.iter().enumerate() {
        for w in b.iter_ones() {
            map.insert(m.world_at(w).clone(), names[bi].clone());
        }
    }
    let mut edges: BTreeMap<Agent, Vec<(WorldId, WorldId)>> = BTreeMap::new();
    for (ai, agent) in m.agents().iter().enumerate() {
        let rel = &nd.rels[ai];
        let list = edges.entry(agent.clone()).or_default();
        for (bi, bx) in blocks.iter().enumerate() {
            for (bj, by) in blocks.iter().enumerate() {
                if bx.iter_ones().any(|x| !by.and(rel.row(x)).is_empty()) {
                    list.push((names[bi].clone(), names[bj].clone()));
                }
            }
        }
    }
    let contracted = PlausibilityModel::from_parts(worlds, m.agents().to_vec(), &edges)
        .expect("quotient of a well-formed model is well-formed");
    Ok((contracted, map))
}

/// Are two pointed models bisimilar? Checked on the disjoint union: the
/// points must share a block of its largest autobisimulation.
pub fn bisimilar(left: &PointedModel, right: &PointedModel) -> Result<bool, EngineError> {
    let (u, lmap, rmap) = left.model.disjoint_union(&right.model);
    let (part, _) = largest_partition(&u, DEFAULT_MAX_BRUTE)?;
    let li = u.require_world(&lmap[&left.world]).expect("union keeps left worlds");
    let ri = u.require_world(&rmap[&right.world]).expect("union keeps right worlds");
    Ok(part.same(li, ri))
}

/// Maximal bisimulation between two models, as pairs in their original world
/// names: (x, y) is listed when L:x and R:y share a block of the disjoint
/// union's largest autobisimulation.
pub fn maximal_cross_bisimulation(
    m1: &PlausibilityModel,
    m2: &PlausibilityModel,
) -> Result<Vec<(WorldId, WorldId)>, EngineError> {
    let (u, lmap, rmap) = m1.disjoint_union(m2);
    let (part, _) = largest_partition(&u, DEFAULT_MAX_BRUTE)?;
    let mut out = Vec::new();
    for w1 in m1.worlds() {
        for w2 in m2.worlds() {
            let i = u.require_world(&lmap[w1]).expect("union keeps left worlds");
            let j = u.require_world(&rmap[w2]).expect("union keeps right worlds");
            if part.same(i, j) {
                out.push((w1.clone(), w2.clone()));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_model, FixtureId};

    fn w(s: &str) -> WorldId {
        WorldId::new(s).unwrap()
    }

    fn ag(s: &str) -> Agent {
        Agent::new(s).unwrap()
    }

    fn ws(ids: &[&str]) -> BTreeSet<WorldId> {
        ids.iter().map(|s| w(s)).collect()
    }

    fn pairs(ps: &[(&str, &str)]) -> Vec<(WorldId, WorldId)> {
        ps.iter().map(|(x, y)| (w(x), w(y))).collect()
    }

    #[test]
    fn derived_over_identity_is_the_raw_order() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        let d = derived_relation(&m, &ag("a"), &[]).unwrap();
        for x in m.worlds() {
            for y in m.worlds() {
                let raw = m.ge(&ag("a"), x, y).unwrap();
                assert_eq!(d.contains(&(x.clone(), y.clone())), raw, "({x}, {y})");
            }
        }
    }

    #[test]
    fn derived_order_uses_block_minima() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        // merging w1 and w3 drags w3's minimum down to w1
        let d = derived_relation(&m, &ag("a"), &pairs(&[("w1", "w3")])).unwrap();
        assert!(d.contains(&(w("w1"), w("w3"))));
        assert!(d.contains(&(w("w3"), w("w1"))));
        assert!(!d.contains(&(w("w3"), w("w2"))), "raw w3 >= w2 disappears");
        assert!(d.contains(&(w("w2"), w("w3"))));
        assert!(!d.contains(&(w("w1"), w("w2"))));
    }

    #[test]
    fn equivalence_closure_blocks() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        let blocks = equivalence_closure(&m, &pairs(&[("w1", "w3"), ("w4", "w5")])).unwrap();
        assert_eq!(
            blocks,
            vec![ws(&["w1", "w3"]), ws(&["w2"]), ws(&["w4", "w5"])]
        );
    }

    #[test]
    fn checker_requires_enough_pairs() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        // without the diagonal, w2 has no partner for the zig-zag
        let r = pairs(&[("w1", "w3"), ("w3", "w1"), ("w4", "w5"), ("w5", "w4")]);
        let report = check_autobisimulation(&m, &r).unwrap();
        assert!(!report.holds);
        assert!(report.violations.iter().any(|v| v.clause == BisimClause::ForthGe
            || v.clause == BisimClause::BackGe
            || v.clause == BisimClause::ForthLe
            || v.clause == BisimClause::BackLe));

        let mut full = r;
        for x in m.worlds() {
            full.push((x.clone(), x.clone()));
        }
        let report = check_autobisimulation(&m, &full).unwrap();
        assert!(report.holds, "{:?}", report.violations);
    }

    #[test]
    fn empty_relation_is_rejected() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        let report = check_autobisimulation(&m, &[]).unwrap();
        assert!(!report.holds);
        assert_eq!(report.violations[0].clause, BisimClause::NonEmpty);
    }

    #[test]
    fn atoms_clause_is_checked() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        let report = check_autobisimulation(&m, &pairs(&[("w1", "w4")])).unwrap();
        assert!(!report.holds);
        assert!(report.violations.iter().any(|v| v.clause == BisimClause::Atoms));
    }

    #[test]
    fn largest_on_the_redundant_chain_model() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        let out = largest_autobisimulation_detailed(&m, DEFAULT_MAX_BRUTE).unwrap();
        assert_eq!(
            out.blocks,
            vec![ws(&["w1", "w3"]), ws(&["w2"]), ws(&["w4", "w5"])]
        );
        assert!(!out.used_fallback);
    }

    #[test]
    fn largest_on_the_contracted_model_is_discrete() {
        let m = fixture_model(FixtureId::Mc).unwrap();
        let blocks = largest_autobisimulation(&m).unwrap();
        assert_eq!(blocks, vec![ws(&["v1"]), ws(&["v2"]), ws(&["v3"])]);
    }

    #[test]
    fn refinement_agrees_with_exhaustive_search() {
        for id in [FixtureId::Ml, FixtureId::Mc, FixtureId::Mr, FixtureId::P] {
            let m = fixture_model(id).unwrap();
            let refined = refine(&m).final_part;
            let brute = brute_force_largest(&m).unwrap();
            assert_eq!(refined, brute, "{id:?}");
        }
    }

    #[test]
    fn normalize_straightens_the_redundant_chain() {
        let ml = fixture_model(FixtureId::Ml).unwrap();
        let mr = fixture_model(FixtureId::Mr).unwrap();
        let normal = normalize(&ml).unwrap();
        assert!(normal.validate().is_empty());
        let rename: BTreeMap<WorldId, WorldId> = [
            (w("w1"), w("u1")),
            (w("w2"), w("u2")),
            (w("w3"), w("u3")),
            (w("w4"), w("u4")),
            (w("w5"), w("u5")),
        ]
        .into();
        assert_eq!(normal.rename_worlds(&rename).unwrap(), mr);
        let again = normalize(&normal).unwrap();
        assert_eq!(again, normal, "normalization is idempotent");
    }

    #[test]
    fn contraction_quotients_to_the_small_model() {
        let ml = fixture_model(FixtureId::Ml).unwrap();
        let mc = fixture_model(FixtureId::Mc).unwrap();
        let (small, map) = contract(&ml).unwrap();
        assert!(small.validate().is_empty());
        assert_eq!(small.n(), 3);
        assert_eq!(map[&w("w1")], w("c:w1"));
        assert_eq!(map[&w("w3")], w("c:w1"));
        assert_eq!(map[&w("w4")], w("c:w4"));
        let rename: BTreeMap<WorldId, WorldId> =
            [(w("c:w1"), w("v1")), (w("c:w2"), w("v2")), (w("c:w4"), w("v3"))].into();
        assert_eq!(small.rename_worlds(&rename).unwrap(), mc);
    }

    #[test]
    fn pointed_bisimilarity_within_and_across_models() {
        let ml = fixture_model(FixtureId::Ml).unwrap();
        let mc = fixture_model(FixtureId::Mc).unwrap();
        let pm = |m: &PlausibilityModel, id: &str| PointedModel::new(m.clone(), w(id)).unwrap();
        assert!(bisimilar(&pm(&ml, "w1"), &pm(&ml, "w3")).unwrap());
        assert!(!bisimilar(&pm(&ml, "w1"), &pm(&ml, "w2")).unwrap());
        assert!(bisimilar(&pm(&ml, "w1"), &pm(&mc, "v1")).unwrap());
        assert!(bisimilar(&pm(&ml, "w4"), &pm(&mc, "v3")).unwrap());
        assert!(!bisimilar(&pm(&ml, "w1"), &pm(&mc, "v2")).unwrap());
    }

    #[test]
    fn cross_bisimulation_between_straightened_and_contracted() {
        let mr = fixture_model(FixtureId::Mr).unwrap();
        let mc = fixture_model(FixtureId::Mc).unwrap();
        let got = maximal_cross_bisimulation(&mr, &mc).unwrap();
        let want = pairs(&[("u1", "v1"), ("u2", "v2"), ("u3", "v1"), ("u4", "v3"), ("u5", "v3")]);
        assert_eq!(got, want);
    }
}
