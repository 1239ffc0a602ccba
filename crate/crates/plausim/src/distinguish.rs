//! Synthesis of conditional-belief formulas telling two non-bisimilar worlds
//! apart, mirroring the block splits of partition refinement.
//!
//! Candidates are tried cheapest-first: a valuation literal, then a small
//! pool of one-step probes, then the signature construction (conjunctions of
//! block-characterizing formulas with `Bhat`/`Khat` witnesses for the split),
//! and finally a bounded closure search over extensions. Every candidate is
//! model-checked before it is returned.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::bisim::{normal_data, refine, EngineError, Pos, RefineHistory, RefineRound};
use crate::bits::Bits;
use crate::formula::Formula;
use crate::model::{Agent, ModelError, PlausibilityModel, WorldId};
use crate::semantics::{eval, SemanticsMode};

#[derive(Error, Debug)]
pub enum DistinguishError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("the worlds are bisimilar, so no formula can tell them apart")]
    Bisimilar,
    #[error("no distinguishing formula survived verification")]
    ConstructionFailed,
}

fn ext(m: &PlausibilityModel, f: &Formula) -> Bits {
    eval(m, f, SemanticsMode::Normal)
        .expect("conditional-language formulas over the model's own vocabulary evaluate")
}

/// Keep `f` if it separates the pair, negate it if it separates the pair the
/// other way around, and drop it otherwise.
fn oriented(m: &PlausibilityModel, wi: usize, vi: usize, f: Formula) -> Option<Formula> {
    let e = ext(m, &f);
    match (e.get(wi), e.get(vi)) {
        (true, false) => Some(f),
        (false, true) => Some(Formula::not(f)),
        _ => None,
    }
}

/// A formula of the conditional-belief language true at `w` and false at `v`.
/// Errors if the worlds are bisimilar (no such formula exists).
pub fn distinguishing_formula(
    m: &PlausibilityModel,
    w: &WorldId,
    v: &WorldId,
) -> Result<Formula, DistinguishError> {
    let wi = m.require_world(w)?;
    let vi = m.require_world(v)?;
    let nd = normal_data(m)?;
    if nd.part.same(wi, vi) {
        return Err(DistinguishError::Bisimilar);
    }
    let verify = |f: Formula| -> Option<Formula> {
        let e = ext(m, &f);
        (e.get(wi) && !e.get(vi)).then_some(f)
    };
    literal_candidate(m, wi, vi)
        .and_then(&verify)
        .or_else(|| probe_candidate(m, wi, vi).and_then(&verify))
        .or_else(|| schema_candidate(m, wi, vi).and_then(&verify))
        .or_else(|| closure_candidate(m, wi, vi).and_then(&verify))
        .ok_or(DistinguishError::ConstructionFailed)
}

fn literal_candidate(m: &PlausibilityModel, wi: usize, vi: usize) -> Option<Formula> {
    let vw = m.val_at(wi);
    let vv = m.val_at(vi);
    if let Some(p) = vw.difference(vv).next() {
        return Some(Formula::atom(p.clone()));
    }
    if let Some(p) = vv.difference(vw).next() {
        return Some(Formula::not(Formula::atom(p.clone())));
    }
    None
}

fn probe_candidate(m: &PlausibilityModel, wi: usize, vi: usize) -> Option<Formula> {
    // positive literals first, so a plain-atom witness wins over its negation
    let mut lits: Vec<Formula> = m.props().into_iter().map(Formula::atom).collect();
    let negated: Vec<Formula> = lits.iter().cloned().map(Formula::not).collect();
    lits.extend(negated);
    for a in m.agents() {
        let mut probes = Vec::new();
        for l in &lits {
            probes.push(Formula::khat(a.clone(), l.clone()));
        }
        for l in &lits {
            probes.push(Formula::know(a.clone(), l.clone()));
        }
        for l in &lits {
            probes.push(Formula::belief(a.clone(), l.clone()));
        }
        for c in &lits {
            for l in &lits {
                probes.push(Formula::cond_belief(a.clone(), c.clone(), l.clone()));
            }
        }
        for c in &lits {
            for l in &lits {
                probes.push(Formula::bhat(a.clone(), c.clone(), l.clone()));
            }
        }
        for f in probes {
            if let Some(hit) = oriented(m, wi, vi, f) {
                return Some(hit);
            }
        }
    }
    None
}

// --- the signature construction ---------------------------------------------

fn chi1(a: &Agent, psi_b: &Formula, psi_c: &Formula) -> Formula {
    Formula::bhat(a.clone(), Formula::or(psi_b.clone(), psi_c.clone()), psi_c.clone())
}

fn chi2(a: &Agent, psi_b: &Formula, psi_c: &Formula) -> Formula {
    Formula::bhat(a.clone(), Formula::or(psi_b.clone(), psi_c.clone()), psi_b.clone())
}

fn chi3(a: &Agent, psi_c: &Formula) -> Formula {
    Formula::khat(a.clone(), psi_c.clone())
}

/// Truth values of (chi1, chi2, chi3) at a world of block B whose position
/// relative to block C is `pos`. None for incomparable positions, which only
/// arise on invalid models.
fn chi_profile(pos: Pos) -> Option<(bool, bool, bool)> {
    match pos {
        Pos::Below => Some((false, true, true)),
        Pos::Equal => Some((true, true, true)),
        Pos::Above => Some((true, false, true)),
        Pos::Absent => Some((false, true, false)),
        Pos::Incomparable => None,
    }
}

/// A formula holding exactly at the worlds of B whose position relative to C
/// is `pos` (assuming the B-characterizer is conjoined by the caller).
fn position_characterizer(
    a: &Agent,
    pos: Pos,
    psi_b: &Formula,
    psi_c: &Formula,
) -> Option<Formula> {
    Some(match pos {
        Pos::Below => {
            Formula::and(Formula::not(chi1(a, psi_b, psi_c)), chi3(a, psi_c))
        }
        Pos::Equal => Formula::and(chi1(a, psi_b, psi_c), chi2(a, psi_b, psi_c)),
        Pos::Above => {
            Formula::and(chi1(a, psi_b, psi_c), Formula::not(chi2(a, psi_b, psi_c)))
        }
        Pos::Absent => Formula::not(chi3(a, psi_c)),
        Pos::Incomparable => return None,
    })
}

fn literal_conjunction(m: &PlausibilityModel, rep: usize) -> Formula {
    let val = m.val_at(rep);
    let mut out: Option<Formula> = None;
    for p in m.props() {
        let lit = if val.contains(&p) {
            Formula::atom(p)
        } else {
            Formula::not(Formula::atom(p))
        };
        out = Some(match out {
            None => lit,
            Some(g) => Formula::and(g, lit),
        });
    }
    out.unwrap_or(Formula::Top)
}

type PsiMemo = HashMap<(usize, usize), Option<Formula>>;

/// Characteristic formula of the round-`j` block containing `rep`: the
/// valuation literals for round 0, and for later rounds the previous block's
/// formula conjoined with position characterizers that exclude each sibling
/// block the round split off.
fn psi(m: &PlausibilityModel, hist: &RefineHistory, j: usize, rep: usize, memo: &mut PsiMemo) -> Option<Formula> {
    if let Some(hit) = memo.get(&(j, rep)) {
        return hit.clone();
    }
    let out = psi_uncached(m, hist, j, rep, memo);
    memo.insert((j, rep), out.clone());
    out
}

fn psi_uncached(
    m: &PlausibilityModel,
    hist: &RefineHistory,
    j: usize,
    rep: usize,
    memo: &mut PsiMemo,
) -> Option<Formula> {
    if j == 0 {
        return Some(literal_conjunction(m, rep));
    }
    let prev = &hist.rounds[j - 1];
    let cur = &hist.rounds[j].part;
    let prev_rep = prev.part.rep_of(rep);
    let own_rep = cur.rep_of(rep);
    let base = psi(m, hist, j - 1, prev_rep, memo)?;
    let prev_blocks = prev.part.blocks();
    let mut sib_reps: BTreeSet<usize> = prev
        .part
        .block_of(prev_rep)
        .iter_ones()
        .map(|x| cur.rep_of(x))
        .collect();
    sib_reps.remove(&own_rep);
    let mut out = base.clone();
    let mut used = BTreeSet::new();
    for s in sib_reps {
        let k = (0..prev.keys.len())
            .find(|&k| prev.sigs[own_rep][k] != prev.sigs[s][k])
            .expect("sibling blocks differ on some signature key");
        if !used.insert(k) {
            continue;
        }
        let (ai, ci) = prev.keys[k];
        let c_rep = prev_blocks[ci].iter_ones().next().expect("blocks are non-empty");
        let psi_c = psi(m, hist, j - 1, c_rep, memo)?;
        let pc = position_characterizer(
            &m.agents()[ai],
            prev.sigs[own_rep][k],
            &base,
            &psi_c,
        )?;
        out = Formula::and(out, pc);
    }
    Some(out)
}

fn schema_candidate(m: &PlausibilityModel, wi: usize, vi: usize) -> Option<Formula> {
    let hist = refine(m);
    for (j, round) in hist.rounds.iter().enumerate() {
        if !round.part.same(wi, vi) {
            // split before signatures entered: a valuation difference,
            // which the literal candidate already covers
            return None;
        }
        if let Some(k) = (0..round.keys.len()).find(|&k| round.sigs[wi][k] != round.sigs[vi][k]) {
            return build_split_formula(m, &hist, j, round, wi, vi, k);
        }
    }
    None
}

fn build_split_formula(
    m: &PlausibilityModel,
    hist: &RefineHistory,
    j: usize,
    round: &RefineRound,
    wi: usize,
    vi: usize,
    k: usize,
) -> Option<Formula> {
    let (ai, ci) = round.keys[k];
    let agent = &m.agents()[ai];
    let blocks = round.part.blocks();
    let b_rep = round.part.rep_of(wi);
    let c_rep = blocks[ci].iter_ones().next().expect("blocks are non-empty");
    let mut memo = PsiMemo::new();
    let psi_b = psi(m, hist, j, b_rep, &mut memo)?;
    let psi_c = psi(m, hist, j, c_rep, &mut memo)?;
    let pw = chi_profile(round.sigs[wi][k])?;
    let pv = chi_profile(round.sigs[vi][k])?;
    let (f, holds_at_w) = if pw.0 != pv.0 {
        (chi1(agent, &psi_b, &psi_c), pw.0)
    } else if pw.1 != pv.1 {
        (chi2(agent, &psi_b, &psi_c), pw.1)
    } else {
        (chi3(agent, &psi_c), pw.2)
    };
    Some(if holds_at_w { f } else { Formula::not(f) })
}

// --- bounded closure search --------------------------------------------------

/// Last-resort search: close a set of extensions under negation, conjunction,
/// `Khat`, and conditional belief until one separates the pair. Extensions
/// are tracked as bitmasks, so this is limited to small models.
fn closure_candidate(m: &PlausibilityModel, wi: usize, vi: usize) -> Option<Formula> {
    let n = m.n();
    if n > 8 {
        return None;
    }
    let mask_of = |b: &Bits| -> u32 { b.iter_ones().fold(0u32, |acc, i| acc | (1 << i)) };
    let bits_of = |mask: u32| -> Bits {
        let mut b = Bits::new(n);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                b.set(i);
            }
        }
        b
    };
    let target = |mask: u32| -> Option<bool> {
        let at_w = mask & (1 << wi) != 0;
        let at_v = mask & (1 << vi) != 0;
        match (at_w, at_v) {
            (true, false) => Some(true),
            (false, true) => Some(false),
            _ => None,
        }
    };
    let class_masks: Vec<Vec<u32>> = (0..m.agents().len())
        .map(|ai| (0..n).map(|w| mask_of(m.class_mask(ai, w))).collect())
        .collect();

    let mut known: BTreeMap<u32, Formula> = BTreeMap::new();
    let mut queue: Vec<(u32, Formula)> = vec![(mask_of(&Bits::full(n)), Formula::Top)];
    for p in m.props() {
        queue.push((mask_of(&m.prop_extension(&p)), Formula::atom(p)));
    }
    let full = mask_of(&Bits::full(n));
    let add = |known: &mut BTreeMap<u32, Formula>, mask: u32, f: Formula| -> Option<Formula> {
        if known.contains_key(&mask) {
            return None;
        }
        let hit = target(mask);
        known.insert(mask, f.clone());
        match hit {
            Some(true) => Some(f),
            Some(false) => Some(Formula::not(f)),
            None => None,
        }
    };
    for (mask, f) in queue {
        if let Some(hit) = add(&mut known, mask, f) {
            return Some(hit);
        }
    }
    for _pass in 0..16 {
        let snapshot: Vec<(u32, Formula)> =
            known.iter().map(|(k, v)| (*k, v.clone())).collect();
        let before = known.len();
        for &(mask, ref f) in &snapshot {
            if let Some(hit) = add(&mut known, !mask & full, Formula::not(f.clone())) {
                return Some(hit);
            }
            for (ai, a) in m.agents().iter().enumerate() {
                // Khat over the extension: every class that meets it
                let mut km = 0u32;
                for w in 0..n {
                    if class_masks[ai][w] & mask != 0 {
                        km |= 1 << w;
                    }
                }
                if let Some(hit) = add(&mut known, km, Formula::khat(a.clone(), f.clone())) {
                    return Some(hit);
                }
            }
        }
        for &(cm, ref cf) in &snapshot {
            for &(gm, ref gf) in &snapshot {
                if let Some(hit) =
                    add(&mut known, cm & gm, Formula::and(cf.clone(), gf.clone()))
                {
                    return Some(hit);
                }
                for (ai, a) in m.agents().iter().enumerate() {
                    // conditional belief: classes whose most plausible
                    // condition-worlds all satisfy the body
                    let mut bm = 0u32;
                    for w in 0..n {
                        let restricted = bits_of(cm & class_masks[ai][w]);
                        let min = mask_of(&m.min_in(ai, &restricted));
                        if min & !gm == 0 {
                            bm |= 1 << w;
                        }
                    }
                    if let Some(hit) = add(
                        &mut known,
                        bm,
                        Formula::cond_belief(a.clone(), cf.clone(), gf.clone()),
                    ) {
                        return Some(hit);
                    }
                }
            }
        }
        if known.len() == before {
            break;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_model, FixtureId};
    use crate::formula::classify;
    use crate::formula::LanguageTag;
    use crate::semantics::satisfies;

    fn wid(s: &str) -> WorldId {
        WorldId::new(s).unwrap()
    }

    fn check(m: &PlausibilityModel, w: &str, v: &str, f: &Formula) {
        assert!(classify(f).is_subset(LanguageTag::C), "{f} stays in the conditional language");
        assert!(satisfies(m, &wid(w), f, SemanticsMode::Normal).unwrap(), "{f} at {w}");
        assert!(!satisfies(m, &wid(v), f, SemanticsMode::Normal).unwrap(), "{f} at {v}");
    }

    #[test]
    fn valuation_split_yields_a_literal() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        let f = distinguishing_formula(&m, &wid("w1"), &wid("w4")).unwrap();
        assert_eq!(f.to_string(), "p");
        check(&m, "w1", "w4", &f);
        let g = distinguishing_formula(&m, &wid("w4"), &wid("w1")).unwrap();
        assert_eq!(g.to_string(), "q");
        check(&m, "w4", "w1", &g);
    }

    #[test]
    fn probe_finds_the_knowledge_witness() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        let f = distinguishing_formula(&m, &wid("w1"), &wid("w2")).unwrap();
        assert_eq!(f.to_string(), "Khat[b] q");
        check(&m, "w1", "w2", &f);

        let mc = fixture_model(FixtureId::Mc).unwrap();
        let g = distinguishing_formula(&mc, &wid("v1"), &wid("v2")).unwrap();
        assert_eq!(g.to_string(), "Khat[b] q");
        check(&mc, "v1", "v2", &g);
        // and with the pair flipped the formula comes back negated
        let h = distinguishing_formula(&mc, &wid("v2"), &wid("v1")).unwrap();
        check(&mc, "v2", "v1", &h);
    }

    #[test]
    fn bisimilar_pairs_are_rejected() {
        let m = fixture_model(FixtureId::Ml).unwrap();
        assert!(matches!(
            distinguishing_formula(&m, &wid("w1"), &wid("w3")),
            Err(DistinguishError::Bisimilar)
        ));
        assert!(matches!(
            distinguishing_formula(&m, &wid("w2"), &wid("w2")),
            Err(DistinguishError::Bisimilar)
        ));
        assert!(matches!(
            distinguishing_formula(&m, &wid("w1"), &wid("nope")),
            Err(DistinguishError::Model(_))
        ));
    }

    #[test]
    fn signature_construction_is_verified_on_its_own() {
        let cases = [
            (FixtureId::Ml, "w1", "w2"),
            (FixtureId::Mc, "v1", "v2"),
            (FixtureId::Mr, "u1", "u2"),
            (FixtureId::P, "w", "z"),
        ];
        for (id, w, v) in cases {
            let m = fixture_model(id).unwrap();
            let wi = m.require_world(&wid(w)).unwrap();
            let vi = m.require_world(&wid(v)).unwrap();
            let f = literal_candidate(&m, wi, vi)
                .or_else(|| schema_candidate(&m, wi, vi))
                .unwrap_or_else(|| panic!("{id}: no candidate for {w},{v}"));
            check(&m, w, v, &f);
        }
    }

    #[test]
    fn closure_search_is_verified_on_its_own() {
        let m = fixture_model(FixtureId::Mc).unwrap();
        let wi = m.require_world(&wid("v1")).unwrap();
        let vi = m.require_world(&wid("v2")).unwrap();
        let f = closure_candidate(&m, wi, vi).unwrap();
        check(&m, "v1", "v2", &f);
    }

    #[test]
    fn block_formulas_characterize_their_blocks() {
        for id in [FixtureId::Ml, FixtureId::Mr, FixtureId::P, FixtureId::DemeyChain(4)] {
            let m = fixture_model(id).unwrap();
            let hist = refine(&m);
            let mut memo = PsiMemo::new();
            for (j, round) in hist.rounds.iter().enumerate() {
                for block in round.part.blocks() {
                    let rep = block.iter_ones().next().unwrap();
                    let f = psi(&m, &hist, j, rep, &mut memo)
                        .unwrap_or_else(|| panic!("{id}: psi failed at round {j}"));
                    assert_eq!(ext(&m, &f), block, "{id} round {j} rep {rep}: {f}");
                }
            }
        }
    }
}
