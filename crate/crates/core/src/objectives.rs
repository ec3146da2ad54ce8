//! Winning objectives and their evaluation on lassos.
//!
//! Parity is min-even: a play wins when the smallest priority seen infinitely often is even.

use crate::arena::{Arena, Lasso};
use crate::region::Region;
use serde::{Deserialize, Serialize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObjectiveError {
    #[error("profile mixes objective classes {0} and {1}")]
    MixedClasses(ObjClass, ObjClass),
    #[error("profile is empty")]
    EmptyProfile,
    #[error("expected {expected} objectives (one per player), got {got}")]
    WrongPlayerCount { expected: usize, got: usize },
    #[error("state {0} in an objective is not a state of the arena")]
    BadState(i64),
    #[error("priority missing for state {state} (player {player})")]
    MissingPriority { player: usize, state: usize },
    #[error("player {0}: expected `{1}`")]
    WrongShape(usize, &'static str),
    #[error("unknown objective class `{0}`")]
    UnknownClass(String),
    #[error("cannot drop {k} stem states of a lasso with stem length {len}")]
    BadShift { k: usize, len: usize },
    #[error("shift is only meaningful for tail objectives, not {0}")]
    NotTail(ObjClass),
    #[error("syntax error: {0}")]
    SyntaxError(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum ObjClass {
    Safety,
    Reach,
    Buchi,
    CoBuchi,
    Parity,
}

impl ObjClass {
    pub const ALL: [ObjClass; 5] = [ObjClass::Safety, ObjClass::Reach, ObjClass::Buchi, ObjClass::CoBuchi, ObjClass::Parity];

    /// Tail classes are insensitive to finite prefixes.
    pub fn is_tail(self) -> bool {
        matches!(self, ObjClass::Buchi | ObjClass::CoBuchi | ObjClass::Parity)
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjClass::Safety => "safety",
            ObjClass::Reach => "reach",
            ObjClass::Buchi => "buchi",
            ObjClass::CoBuchi => "cobuchi",
            ObjClass::Parity => "parity",
        }
    }

    pub fn parse(s: &str) -> Result<ObjClass, ObjectiveError> {
        ObjClass::ALL
            .into_iter()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| ObjectiveError::UnknownClass(s.to_string()))
    }
}

impl fmt::Display for ObjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Stay inside the target forever.
    Safety(Region),
    Reach(Region),
    Buchi(Region),
    CoBuchi(Region),
    Parity(Vec<u32>),
}

impl Objective {
    pub fn class(&self) -> ObjClass {
        match self {
            Objective::Safety(_) => ObjClass::Safety,
            Objective::Reach(_) => ObjClass::Reach,
            Objective::Buchi(_) => ObjClass::Buchi,
            Objective::CoBuchi(_) => ObjClass::CoBuchi,
            Objective::Parity(_) => ObjClass::Parity,
        }
    }

    pub fn target(&self) -> Option<&Region> {
        match self {
            Objective::Safety(t) | Objective::Reach(t) | Objective::Buchi(t) | Objective::CoBuchi(t) => Some(t),
            Objective::Parity(_) => None,
        }
    }

    pub fn priority(&self) -> Option<&[u32]> {
        match self {
            Objective::Parity(p) => Some(p),
            _ => None,
        }
    }

    pub fn universe(&self) -> usize {
        match self {
            Objective::Parity(p) => p.len(),
            o => o.target().unwrap().universe(),
        }
    }

    /// Evaluates the objective given the states visited at least once and the states
    /// visited infinitely often.
    pub fn holds(&self, visit: &Region, inf: &Region) -> bool {
        match self {
            Objective::Safety(t) => visit.is_subset(t),
            Objective::Reach(t) => visit.intersects(t),
            Objective::Buchi(t) => inf.intersects(t),
            Objective::CoBuchi(t) => inf.is_subset(t),
            Objective::Parity(p) => inf.iter().map(|s| p[s]).min().is_some_and(|m| m % 2 == 0),
        }
    }

    /// Tail evaluation: only meaningful for tail classes, where `visit` is irrelevant.
    pub fn holds_inf(&self, inf: &Region) -> bool {
        debug_assert!(self.class().is_tail());
        self.holds(inf, inf)
    }
}

pub fn visit_set(l: &Lasso, n_states: usize) -> Region {
    Region::from_ids(n_states, l.stem.states.iter().chain(&l.cycle.states).copied())
}

pub fn inf_set(l: &Lasso, n_states: usize) -> Region {
    Region::from_ids(n_states, l.cycle.states.iter().copied())
}

pub fn eval_lasso(l: &Lasso, o: &Objective) -> bool {
    let n = o.universe();
    o.holds(&visit_set(l, n), &inf_set(l, n))
}

/// Evaluates `o` on the lasso with its first `k` stem states dropped.
pub fn tail_shift_check(l: &Lasso, o: &Objective, k: usize) -> Result<bool, ObjectiveError> {
    if !o.class().is_tail() {
        return Err(ObjectiveError::NotTail(o.class()));
    }
    let len = l.stem.states.len();
    if k > len {
        return Err(ObjectiveError::BadShift { k, len });
    }
    let mut shifted = l.clone();
    if k == len {
        shifted.stem.states = vec![l.cycle.states[0]];
        shifted.stem.actions.clear();
    } else {
        shifted.stem.states.drain(..k);
        shifted.stem.actions.drain(..k);
    }
    Ok(eval_lasso(&shifted, o))
}

/// One objective per player, all of one class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    class: ObjClass,
    objs: Vec<Objective>,
}

impl Profile {
    pub fn new(objs: Vec<Objective>) -> Result<Profile, ObjectiveError> {
        let first = objs.first().ok_or(ObjectiveError::EmptyProfile)?.class();
        if let Some(o) = objs.iter().find(|o| o.class() != first) {
            return Err(ObjectiveError::MixedClasses(first, o.class()));
        }
        let n = objs[0].universe();
        if objs.iter().any(|o| o.universe() != n) {
            return Err(ObjectiveError::SyntaxError("objectives over different state sets".into()));
        }
        Ok(Profile { class: first, objs })
    }

    pub fn targets(class: ObjClass, targets: Vec<Region>) -> Profile {
        let objs = targets
            .into_iter()
            .map(|t| match class {
                ObjClass::Safety => Objective::Safety(t),
                ObjClass::Reach => Objective::Reach(t),
                ObjClass::Buchi => Objective::Buchi(t),
                ObjClass::CoBuchi => Objective::CoBuchi(t),
                ObjClass::Parity => panic!("parity objectives carry priorities"),
            })
            .collect();
        Profile::new(objs).expect("uniform target profile")
    }

    pub fn parity(priorities: Vec<Vec<u32>>) -> Profile {
        Profile::new(priorities.into_iter().map(Objective::Parity).collect()).expect("uniform parity profile")
    }

    pub fn class(&self) -> ObjClass {
        self.class
    }

    pub fn n_players(&self) -> usize {
        self.objs.len()
    }

    pub fn n_states(&self) -> usize {
        self.objs[0].universe()
    }

    pub fn objective(&self, i: usize) -> &Objective {
        &self.objs[i]
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objs
    }

    /// Target set of player `i`; panics for parity profiles.
    pub fn target(&self, i: usize) -> &Region {
        self.objs[i].target().expect("set-based objective")
    }

    /// Priority function of player `i`; panics for set-based profiles.
    pub fn priority(&self, i: usize) -> &[u32] {
        self.objs[i].priority().expect("parity objective")
    }

    pub fn check_against(&self, a: &Arena) -> Result<(), ObjectiveError> {
        if self.n_players() != a.n_players() {
            return Err(ObjectiveError::WrongPlayerCount { expected: a.n_players(), got: self.n_players() });
        }
        if self.n_states() != a.n_states() {
            return Err(ObjectiveError::SyntaxError(format!(
                "objectives range over {} states, arena has {}",
                self.n_states(),
                a.n_states()
            )));
        }
        Ok(())
    }

    /// All players win on a play with these visit and inf sets.
    pub fn all_hold(&self, visit: &Region, inf: &Region) -> bool {
        self.objs.iter().all(|o| o.holds(visit, inf))
    }

    pub fn eval_all(&self, l: &Lasso) -> Vec<bool> {
        self.objs.iter().map(|o| eval_lasso(l, o)).collect()
    }

    pub fn to_json(&self) -> String {
        let players: Vec<PlayerDoc> = self
            .objs
            .iter()
            .map(|o| match o {
                Objective::Parity(p) => PlayerDoc {
                    target: None,
                    priority: Some(p.iter().enumerate().map(|(s, &v)| (s.to_string(), v as i64)).collect()),
                },
                o => PlayerDoc { target: Some(o.target().unwrap().iter().map(|s| s as i64).collect()), priority: None },
            })
            .collect();
        let mut text = String::from("{\n");
        text.push_str(&format!("  \"class\": \"{}\",\n  \"players\": [\n", self.class));
        for (k, p) in players.iter().enumerate() {
            let sep = if k + 1 < players.len() { "," } else { "" };
            text.push_str(&format!("    {}{}\n", serde_json::to_string(p).unwrap(), sep));
        }
        text.push_str("  ]\n}\n");
        text
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlayerDoc {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    target: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    priority: Option<BTreeMap<String, i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    class: String,
    players: Vec<PlayerDoc>,
}

/// Parses an objectives document against the arena it refers to.
pub fn parse_objectives(text: &str, a: &Arena) -> Result<Profile, ObjectiveError> {
    let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| ObjectiveError::SyntaxError(e.to_string()))?;
    let class = ObjClass::parse(&doc.class)?;
    let n = a.n_states();
    let mut objs = Vec::new();
    for (i, p) in doc.players.into_iter().enumerate() {
        let o = if class == ObjClass::Parity {
            let map = p.priority.ok_or(ObjectiveError::WrongShape(i + 1, "priority"))?;
            let mut pr = vec![None; n];
            for (k, v) in map {
                let s: i64 = k.parse().map_err(|_| ObjectiveError::SyntaxError(format!("bad state key `{k}`")))?;
                if s < 0 || s as usize >= n {
                    return Err(ObjectiveError::BadState(s));
                }
                if v < 0 {
                    return Err(ObjectiveError::SyntaxError(format!("negative priority {v}")));
                }
                pr[s as usize] = Some(v as u32);
            }
            let pr = pr
                .into_iter()
                .enumerate()
                .map(|(s, v)| v.ok_or(ObjectiveError::MissingPriority { player: i + 1, state: s }))
                .collect::<Result<Vec<_>, _>>()?;
            Objective::Parity(pr)
        } else {
            let ids = p.target.ok_or(ObjectiveError::WrongShape(i + 1, "target"))?;
            if let Some(&bad) = ids.iter().find(|&&s| s < 0 || s as usize >= n) {
                return Err(ObjectiveError::BadState(bad));
            }
            let t = Region::from_ids(n, ids.into_iter().map(|s| s as usize));
            match class {
                ObjClass::Safety => Objective::Safety(t),
                ObjClass::Reach => Objective::Reach(t),
                ObjClass::Buchi => Objective::Buchi(t),
                _ => Objective::CoBuchi(t),
            }
        };
        objs.push(o);
    }
    let prof = Profile::new(objs)?;
    prof.check_against(a)?;
    Ok(prof)
}

/// Seeded random profile: targets keep each state with probability 1/2, priorities are
/// drawn from `0..=max_priority`.
pub fn random_profile(class: ObjClass, n_states: usize, n_players: usize, max_priority: u32, seed: u64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if class == ObjClass::Parity {
        return Profile::parity(
            (0..n_players).map(|_| (0..n_states).map(|_| rng.gen_range(0..=max_priority)).collect()).collect(),
        );
    }
    let targets = (0..n_players)
        .map(|_| Region::from_ids(n_states, (0..n_states).filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>()))
        .collect();
    Profile::targets(class, targets)
}
