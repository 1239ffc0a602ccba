//! Built-in example models, addressable by name (`ML`, `P`, `MK?k=2`, ...).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{load_model, Agent, PlausibilityModel, Prop, WorldId};

/// Upper bound on the `k` parameter of the model families.
pub const MAX_FIXTURE_PARAM: u32 = 1000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FixtureId {
    /// Five-world, two-agent model with a redundant plausibility chain.
    Ml,
    /// Its three-world contraction.
    Mc,
    /// The same five worlds with the chain straightened (the normal form).
    Mr,
    /// Four-world chain with two bisimilar worlds.
    P,
    /// Its three-world contraction.
    Pprime,
    /// Worked example for the conditional-to-degrees translation.
    ExpCdM,
    ExpCdMprime,
    /// Worked example for the conditional-to-safe translation.
    ExpSM,
    ExpSMprime,
    /// Chain separating degree k+1 from every lower degree.
    Mk(u32),
    /// Companion to `Mk` with the two top worlds swapped.
    Nk(u32),
    /// Single-agent chains separated by counting formulas of growing depth.
    DemeyChain(u32),
}

#[derive(Error, Debug)]
pub enum FixtureError {
    #[error("unknown fixture {0:?}; available: ML, MC, MR, P, Pprime, EXP_CD_M, EXP_CD_Mprime, EXP_S_M, EXP_S_Mprime, MK?k=N, NK?k=N, DEMEY_CHAIN?k=N")]
    Unknown(String),
    #[error("fixture {0} needs a parameter, e.g. {0}?k=2")]
    MissingParam(String),
    #[error("fixture {0} takes no parameter")]
    UnexpectedParam(String),
    #[error("bad fixture parameter {0:?}; expected k=N")]
    BadParam(String),
    #[error("fixture parameter {got} is out of range ({lo}..={hi})")]
    ParamOutOfRange { got: u32, lo: u32, hi: u32 },
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureId::Ml => f.write_str("ML"),
            FixtureId::Mc => f.write_str("MC"),
            FixtureId::Mr => f.write_str("MR"),
            FixtureId::P => f.write_str("P"),
            FixtureId::Pprime => f.write_str("Pprime"),
            FixtureId::ExpCdM => f.write_str("EXP_CD_M"),
            FixtureId::ExpCdMprime => f.write_str("EXP_CD_Mprime"),
            FixtureId::ExpSM => f.write_str("EXP_S_M"),
            FixtureId::ExpSMprime => f.write_str("EXP_S_Mprime"),
            FixtureId::Mk(k) => write!(f, "MK?k={k}"),
            FixtureId::Nk(k) => write!(f, "NK?k={k}"),
            FixtureId::DemeyChain(k) => write!(f, "DEMEY_CHAIN?k={k}"),
        }
    }
}

impl FixtureId {
    pub fn parse(s: &str) -> Result<Self, FixtureError> {
        let (name, param) = match s.split_once('?') {
            Some((n, p)) => {
                let k = p
                    .strip_prefix("k=")
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| FixtureError::BadParam(p.to_owned()))?;
                (n, Some(k))
            }
            None => (s, None),
        };
        let plain = |id: FixtureId| match param {
            None => Ok(id),
            Some(_) => Err(FixtureError::UnexpectedParam(name.to_owned())),
        };
        let parametric = |mk: fn(u32) -> FixtureId| match param {
            Some(k) => Ok(mk(k)),
            None => Err(FixtureError::MissingParam(name.to_owned())),
        };
        match name {
            "ML" => plain(FixtureId::Ml),
            "MC" => plain(FixtureId::Mc),
            "MR" => plain(FixtureId::Mr),
            "P" => plain(FixtureId::P),
            "Pprime" => plain(FixtureId::Pprime),
            "EXP_CD_M" => plain(FixtureId::ExpCdM),
            "EXP_CD_Mprime" => plain(FixtureId::ExpCdMprime),
            "EXP_S_M" => plain(FixtureId::ExpSM),
            "EXP_S_Mprime" => plain(FixtureId::ExpSMprime),
            "MK" => parametric(FixtureId::Mk),
            "NK" => parametric(FixtureId::Nk),
            "DEMEY_CHAIN" => parametric(FixtureId::DemeyChain),
            _ => Err(FixtureError::Unknown(s.to_owned())),
        }
    }
}

const ML_JSON: &str = r#"{
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
}"#;

const MC_JSON: &str = r#"{
  "worlds": [
    {"id": "v1", "val": ["p"]},
    {"id": "v2", "val": ["p"]},
    {"id": "v3", "val": ["q"]}
  ],
  "agents": ["a", "b"],
  "plaus": {
    "a": [["v2", "v1"]],
    "b": [["v1", "v3"]]
  }
}"#;

const MR_JSON: &str = r#"{
  "worlds": [
    {"id": "u1", "val": ["p"]},
    {"id": "u2", "val": ["p"]},
    {"id": "u3", "val": ["p"]},
    {"id": "u4", "val": ["q"]},
    {"id": "u5", "val": ["q"]}
  ],
  "agents": ["a", "b"],
  "plaus": {
    "a": [["u2", "u3"], ["u2", "u1"], ["u1", "u3"], ["u3", "u1"]],
    "b": [["u1", "u4"], ["u3", "u5"]]
  }
}"#;

const P_JSON: &str = r#"{
  "worlds": [
    {"id": "w", "val": ["p"]},
    {"id": "x", "val": ["q"]},
    {"id": "y", "val": ["p"]},
    {"id": "z", "val": []}
  ],
  "agents": ["a"],
  "plaus": {
    "a": [["x", "y"], ["y", "z"], ["z", "w"]]
  }
}"#;

const PPRIME_JSON: &str = r#"{
  "worlds": [
    {"id": "w'", "val": ["p"]},
    {"id": "x'", "val": ["q"]},
    {"id": "z'", "val": []}
  ],
  "agents": ["a"],
  "plaus": {
    "a": [["x'", "z'"], ["z'", "w'"]]
  }
}"#;

const EXP_CD_M_JSON: &str = r#"{
  "worlds": [
    {"id": "w1", "val": []},
    {"id": "w2", "val": ["p", "q"]},
    {"id": "w3", "val": ["q"]}
  ],
  "agents": ["a"],
  "plaus": {
    "a": [["w3", "w2"], ["w2", "w1"]]
  }
}"#;

const EXP_CD_MPRIME_JSON: &str = r#"{
  "worlds": [
    {"id": "w1'", "val": []},
    {"id": "w2'", "val": ["p"]},
    {"id": "w3'", "val": []}
  ],
  "agents": ["a"],
  "plaus": {
    "a": [["w3'", "w2'"], ["w2'", "w1'"]]
  }
}"#;

const EXP_S_M_JSON: &str = r#"{
  "worlds": [
    {"id": "x1", "val": ["p", "q"]},
    {"id": "x2", "val": ["p"]},
    {"id": "y", "val": []}
  ],
  "agents": ["a"],
  "plaus": {
    "a": [["y", "x2"], ["x2", "x1"]]
  }
}"#;

const EXP_S_MPRIME_JSON: &str = r#"{
  "worlds": [
    {"id": "x'", "val": ["p"]},
    {"id": "y'", "val": []}
  ],
  "agents": ["a"],
  "plaus": {
    "a": [["y'", "x'"]]
  }
}"#;

fn wid(s: String) -> WorldId {
    WorldId::new(s).expect("generated world id")
}

fn prop(s: String) -> Prop {
    Prop::new(s).expect("generated proposition")
}

/// Single-agent chain given from least to most plausible.
fn chain_model(worlds: Vec<(WorldId, BTreeSet<Prop>)>, order: &[WorldId]) -> PlausibilityModel {
    let agent = Agent::new("a").expect("agent a");
    let edges: Vec<(WorldId, WorldId)> =
        order.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let mut emap = BTreeMap::new();
    emap.insert(agent.clone(), edges);
    PlausibilityModel::new(worlds, vec![agent], &emap).expect("chain fixture is well-formed")
}

fn graded_chain(k: u32, primed: bool) -> PlausibilityModel {
    let suffix = if primed { "'" } else { "" };
    let mut worlds: Vec<(WorldId, BTreeSet<Prop>)> = (0..=k)
        .map(|i| (wid(format!("w{i}{suffix}")), [prop(format!("p{i}"))].into()))
        .collect();
    let x = wid(format!("x{suffix}"));
    let y = wid(format!("y{suffix}"));
    worlds.push((x.clone(), [prop("q".into()), prop("r".into())].into()));
    worlds.push((y.clone(), [prop("q".into())].into()));
    // least plausible first; the primed family swaps the two top worlds
    let mut order: Vec<WorldId> = if primed { vec![x, y] } else { vec![y, x] };
    order.extend((0..=k).rev().map(|i| wid(format!("w{i}{suffix}"))));
    chain_model(worlds, &order)
}

fn demey_chain(k: u32) -> PlausibilityModel {
    let worlds: Vec<(WorldId, BTreeSet<Prop>)> = (1..=k)
        .map(|i| {
            let val: BTreeSet<Prop> =
                if i % 2 == 0 { [prop("p".into())].into() } else { BTreeSet::new() };
            (wid(format!("w{i}")), val)
        })
        .collect();
    let order: Vec<WorldId> = (1..=k).rev().map(|i| wid(format!("w{i}"))).collect();
    chain_model(worlds, &order)
}

fn check_param(k: u32, lo: u32) -> Result<(), FixtureError> {
    if k < lo || k > MAX_FIXTURE_PARAM {
        Err(FixtureError::ParamOutOfRange { got: k, lo, hi: MAX_FIXTURE_PARAM })
    } else {
        Ok(())
    }
}

pub fn fixture_model(id: FixtureId) -> Result<PlausibilityModel, FixtureError> {
    let from_json = |text: &str| load_model(text).expect("embedded fixture is well-formed");
    match id {
        FixtureId::Ml => Ok(from_json(ML_JSON)),
        FixtureId::Mc => Ok(from_json(MC_JSON)),
        FixtureId::Mr => Ok(from_json(MR_JSON)),
        FixtureId::P => Ok(from_json(P_JSON)),
        FixtureId::Pprime => Ok(from_json(PPRIME_JSON)),
        FixtureId::ExpCdM => Ok(from_json(EXP_CD_M_JSON)),
        FixtureId::ExpCdMprime => Ok(from_json(EXP_CD_MPRIME_JSON)),
        FixtureId::ExpSM => Ok(from_json(EXP_S_M_JSON)),
        FixtureId::ExpSMprime => Ok(from_json(EXP_S_MPRIME_JSON)),
        FixtureId::Mk(k) => {
            check_param(k, 0)?;
            Ok(graded_chain(k, false))
        }
        FixtureId::Nk(k) => {
            check_param(k, 0)?;
            Ok(graded_chain(k, true))
        }
        FixtureId::DemeyChain(k) => {
            check_param(k, 1)?;
            Ok(demey_chain(k))
        }
    }
}
