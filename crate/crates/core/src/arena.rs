//! Turn-based n-player arenas with perfect information.
//!
//! States and actions are dense ids. Players are 0-based internally and 1-based in
//! documents (`owner: 1` is the first player).

use crate::graph::Graph;
use crate::region::Region;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArenaError {
    #[error("missing transition from state {state} on action {action}")]
    MissingTransition { state: usize, action: String },
    #[error("state {state} has owner {owner}, expected a player in 1..={n_players}")]
    BadOwner { state: usize, owner: i64, n_players: usize },
    #[error("initial state {0} is not a state of the arena")]
    BadInit(i64),
    #[error("state {0} is declared more than once")]
    DuplicateState(usize),
    #[error("unknown state {0}")]
    UnknownState(i64),
    #[error("unknown action index {0}")]
    UnknownAction(i64),
    #[error("conflicting transitions from state {state} on action {action}")]
    ConflictingTransition { state: usize, action: String },
    #[error("syntax error: {0}")]
    SyntaxError(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena {
    n_players: usize,
    owner: Vec<usize>,
    names: Vec<Option<String>>,
    init: usize,
    actions: Vec<String>,
    delta: Vec<usize>,
}

impl Arena {
    /// `delta[s * n_actions + a]` is the successor of `s` on action `a`.
    pub fn new(
        n_players: usize,
        owner: Vec<usize>,
        init: usize,
        actions: Vec<String>,
        delta: Vec<usize>,
    ) -> Result<Self, ArenaError> {
        let n = owner.len();
        if n == 0 || actions.is_empty() || n_players == 0 {
            return Err(ArenaError::BadParams(
                "an arena needs at least one state, one action and one player".into(),
            ));
        }
        for (s, &o) in owner.iter().enumerate() {
            if o >= n_players {
                return Err(ArenaError::BadOwner { state: s, owner: o as i64 + 1, n_players });
            }
        }
        if init >= n {
            return Err(ArenaError::BadInit(init as i64));
        }
        if delta.len() != n * actions.len() {
            return Err(ArenaError::BadParams(format!(
                "delta has {} entries, expected {}",
                delta.len(),
                n * actions.len()
            )));
        }
        if let Some(&bad) = delta.iter().find(|&&t| t >= n) {
            return Err(ArenaError::UnknownState(bad as i64));
        }
        Ok(Arena { n_players, owner, names: vec![None; n], init, actions, delta })
    }

    pub fn with_names(mut self, names: Vec<Option<String>>) -> Self {
        assert_eq!(names.len(), self.n_states());
        self.names = names;
        self
    }

    pub fn n_states(&self) -> usize {
        self.owner.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn owner(&self, s: usize) -> usize {
        self.owner[s]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn succ(&self, s: usize, a: usize) -> usize {
        self.delta[s * self.actions.len() + a]
    }

    /// `(action, successor)` pairs of `s`, in action order.
    pub fn moves(&self, s: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.actions.len();
        self.delta[s * k..(s + 1) * k].iter().copied().enumerate()
    }

    /// Smallest action leading from `s` to `t`.
    pub fn action_between(&self, s: usize, t: usize) -> Option<usize> {
        self.moves(s).find(|&(_, u)| u == t).map(|(a, _)| a)
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn state_name(&self, s: usize) -> String {
        self.names[s].clone().unwrap_or_else(|| s.to_string())
    }

    pub fn name(&self, s: usize) -> Option<&str> {
        self.names[s].as_deref()
    }

    pub fn state_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n.as_deref() == Some(name))
    }

    pub fn states_of(&self, player: usize) -> Region {
        Region::from_fn(self.n_states(), |s| self.owner[s] == player)
    }

    pub fn all_states(&self) -> Region {
        Region::full(self.n_states())
    }

    /// The same arena started from `s`.
    pub fn rebase(&self, s: usize) -> Result<Arena, ArenaError> {
        if s >= self.n_states() {
            return Err(ArenaError::BadInit(s as i64));
        }
        let mut a = self.clone();
        a.init = s;
        Ok(a)
    }

    /// Directed graph on `r` with an edge `s -> t` whenever some action leads from `s` to `t`.
    pub fn restrict_graph(&self, r: &Region) -> Graph {
        let succ = (0..self.n_states())
            .map(|s| self.moves(s).map(|(_, t)| t).collect())
            .collect();
        Graph::new(r.clone(), succ)
    }

    pub fn graph(&self) -> Graph {
        self.restrict_graph(&self.all_states())
    }

    pub fn check_prefix(&self, p: &PlayPrefix) -> bool {
        !p.states.is_empty()
            && p.actions.len() + 1 == p.states.len()
            && p.states.iter().all(|&s| s < self.n_states())
            && p.actions.iter().all(|&a| a < self.n_actions())
            && p.states
                .windows(2)
                .zip(&p.actions)
                .all(|(w, &a)| self.succ(w[0], a) == w[1])
    }

    pub fn check_lasso(&self, l: &Lasso) -> bool {
        self.check_prefix(&l.stem)
            && self.check_prefix(&l.cycle)
            && l.stem.states[0] == self.init
            && l.stem.last() == l.cycle.states[0]
            && l.cycle.last() == l.cycle.states[0]
            && !l.cycle.actions.is_empty()
    }

    /// Prefix following the given state sequence, using the smallest action per edge.
    pub fn prefix_along(&self, states: &[usize]) -> Option<PlayPrefix> {
        let actions = states
            .windows(2)
            .map(|w| self.action_between(w[0], w[1]))
            .collect::<Option<Vec<_>>>()?;
        Some(PlayPrefix { states: states.to_vec(), actions })
    }

    pub fn lasso_along(&self, stem: &[usize], cycle: &[usize]) -> Option<Lasso> {
        Some(Lasso { stem: self.prefix_along(stem)?, cycle: self.prefix_along(cycle)? })
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"n_players\": {},", self.n_players);
        out.push_str("  \"states\": [\n");
        for s in 0..self.n_states() {
            let doc = StateDoc { id: s as i64, owner: self.owner[s] as i64 + 1, name: self.names[s].clone() };
            let sep = if s + 1 < self.n_states() { "," } else { "" };
            let _ = writeln!(out, "    {}{}", serde_json::to_string(&doc).unwrap(), sep);
        }
        out.push_str("  ],\n");
        let _ = writeln!(out, "  \"init\": {},", self.init);
        let _ = writeln!(out, "  \"actions\": {},", serde_json::to_string(&self.actions).unwrap());
        out.push_str("  \"delta\": [\n");
        let total = self.delta.len();
        for (idx, &t) in self.delta.iter().enumerate() {
            let (s, a) = (idx / self.n_actions(), idx % self.n_actions());
            let sep = if idx + 1 < total { "," } else { "" };
            let _ = writeln!(out, "    [{}, {}, {}]{}", s, a, t, sep);
        }
        out.push_str("  ]\n}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    id: i64,
    owner: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    name: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ArenaDoc {
    n_players: i64,
    states: Vec<StateDoc>,
    init: i64,
    actions: Vec<String>,
    delta: Vec<(i64, i64, i64)>,
}

pub fn parse_arena(text: &str) -> Result<Arena, ArenaError> {
    let doc: ArenaDoc = serde_json::from_str(text).map_err(|e| ArenaError::SyntaxError(e.to_string()))?;
    if doc.n_players < 1 {
        return Err(ArenaError::BadParams(format!("n_players = {}", doc.n_players)));
    }
    let n_players = doc.n_players as usize;
    let n = doc.states.len();
    let mut owner = vec![usize::MAX; n];
    let mut names = vec![None; n];
    for st in &doc.states {
        if st.id < 0 || st.id as usize >= n {
            return Err(ArenaError::UnknownState(st.id));
        }
        let id = st.id as usize;
        if owner[id] != usize::MAX {
            return Err(ArenaError::DuplicateState(id));
        }
        if st.owner < 1 || st.owner as usize > n_players {
            return Err(ArenaError::BadOwner { state: id, owner: st.owner, n_players });
        }
        owner[id] = st.owner as usize - 1;
        names[id] = st.name.clone();
    }
    if doc.init < 0 || doc.init as usize >= n {
        return Err(ArenaError::BadInit(doc.init));
    }
    let k = doc.actions.len();
    let mut delta = vec![usize::MAX; n * k];
    for &(s, a, t) in &doc.delta {
        if s < 0 || s as usize >= n {
            return Err(ArenaError::UnknownState(s));
        }
        if t < 0 || t as usize >= n {
            return Err(ArenaError::UnknownState(t));
        }
        if a < 0 || a as usize >= k {
            return Err(ArenaError::UnknownAction(a));
        }
        let slot = &mut delta[s as usize * k + a as usize];
        if *slot != usize::MAX && *slot != t as usize {
            return Err(ArenaError::ConflictingTransition {
                state: s as usize,
                action: doc.actions[a as usize].clone(),
            });
        }
        *slot = t as usize;
    }
    if let Some(idx) = delta.iter().position(|&t| t == usize::MAX) {
        return Err(ArenaError::MissingTransition { state: idx / k, action: doc.actions[idx % k].clone() });
    }
    Ok(Arena::new(n_players, owner, doc.init as usize, doc.actions, delta)?.with_names(names))
}

/// Default action labels `a0, a1, ...`.
pub fn action_labels(k: usize) -> Vec<String> {
    (0..k).map(|a| format!("a{a}")).collect()
}

/// Seeded random arena. Owners are dealt round-robin and then shuffled, so every
/// player owns a state whenever `n_states >= n_players`.
pub fn random_arena(n_states: usize, n_players: usize, n_actions: usize, seed: u64) -> Result<Arena, ArenaError> {
    if n_states == 0 || n_players == 0 || n_actions == 0 {
        return Err(ArenaError::BadParams("all counts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut owner: Vec<usize> = (0..n_states).map(|s| s % n_players).collect();
    owner.shuffle(&mut rng);
    let delta = (0..n_states * n_actions).map(|_| rng.gen_range(0..n_states)).collect();
    Arena::new(n_players, owner, 0, action_labels(n_actions), delta)
}

/// Finite play prefix: `states[k+1] = delta(states[k], actions[k])`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayPrefix {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl PlayPrefix {
    pub fn single(s: usize) -> Self {
        PlayPrefix { states: vec![s], actions: vec![] }
    }

    pub fn last(&self) -> usize {
        *self.states.last().expect("nonempty prefix")
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Ultimately periodic play `stem . cycle^omega`. The stem ends where the cycle starts
/// and the cycle ends where it starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lasso {
    pub stem: PlayPrefix,
    pub cycle: PlayPrefix,
}

impl Lasso {
    /// Positions of the play as `(state, action)` pairs: the stem without its last
    /// state, then one period of the cycle. Position `k` moves to `next_pos(k)`.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> =
            self.stem.states.iter().zip(&self.stem.actions).map(|(&s, &a)| (s, a)).collect();
        out.extend(self.cycle.states.iter().zip(&self.cycle.actions).map(|(&s, &a)| (s, a)));
        out
    }

    pub fn stem_len(&self) -> usize {
        self.stem.actions.len()
    }

    pub fn period(&self) -> usize {
        self.cycle.actions.len()
    }

    pub fn next_pos(&self, k: usize) -> usize {
        let m = self.stem_len();
        if k + 1 < m + self.period() {
            k + 1
        } else {
            m
        }
    }
}

/// Serde adapter writing 0-based player indices as 1-based numbers.
pub mod one_based {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*p as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let v = u64::deserialize(d)?;
        v.checked_sub(1).map(|p| p as usize).ok_or_else(|| D::Error::custom("players are numbered from 1"))
    }
}

/// The two-state arena used throughout the unit tests: player 1 owns 0, player 2 owns 1,
/// `a` switches state and `b` stays.
#[cfg(test)]
pub(crate) fn a2() -> Arena {
    Arena::new(2, vec![0, 1], 0, vec!["a".into(), "b".into()], vec![1, 0, 0, 1]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    const A2_DOC: &str = r#"{"n_players": 2, "states": [{"id": 0, "owner": 1}, {"id": 1, "owner": 2}],
        "init": 0, "actions": ["a", "b"], "delta": [[0,0,1],[0,1,0],[1,0,0],[1,1,1]]}"#;

    #[test]
    fn smallest_arena_parses() {
        let a = parse_arena(r#"{"n_players":1,"states":[{"id":0,"owner":1}],"init":0,"actions":["x"],"delta":[[0,0,0]]}"#)
            .unwrap();
        assert_eq!(a.n_states(), 1);
        assert_eq!(a.succ(0, 0), 0);
    }

    #[test]
    fn a2_document_transcribes() {
        let a = parse_arena(A2_DOC).unwrap();
        assert_eq!(a, a2());
        assert_eq!(a.moves(0).count() + a.moves(1).count(), 4);
    }

    #[test]
    fn missing_transition_is_named() {
        let doc = A2_DOC.replace(",[1,1,1]", "");
        assert_eq!(parse_arena(&doc), Err(ArenaError::MissingTransition { state: 1, action: "b".into() }));
    }

    #[test]
    fn validation_errors() {
        let bad_owner = A2_DOC.replace(r#""owner": 2"#, r#""owner": 3"#);
        assert!(matches!(parse_arena(&bad_owner), Err(ArenaError::BadOwner { state: 1, owner: 3, .. })));
        let bad_init = A2_DOC.replace(r#""init": 0"#, r#""init": 5"#);
        assert_eq!(parse_arena(&bad_init), Err(ArenaError::BadInit(5)));
        let dup = A2_DOC.replace(r#"{"id": 1, "owner": 2}"#, r#"{"id": 0, "owner": 2}"#);
        assert_eq!(parse_arena(&dup), Err(ArenaError::DuplicateState(0)));
        assert!(matches!(parse_arena("{"), Err(ArenaError::SyntaxError(_))));
    }

    #[test]
    fn rebase_examples() {
        let a = a2();
        assert_eq!(a.rebase(1).unwrap().init(), 1);
        assert_eq!(a.rebase(0).unwrap(), a);
        assert_eq!(a.rebase(7), Err(ArenaError::BadInit(7)));
    }

    #[test]
    fn restrict_graph_examples() {
        let a = a2();
        let full = a.restrict_graph(&Region::full(2));
        let mut edges: Vec<_> = full.edges().collect();
        edges.sort();
        assert_eq!(edges, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(a.restrict_graph(&Region::empty(2)).edges().count(), 0);
        let only0: Vec<_> = a.restrict_graph(&Region::from_ids(2, [0])).edges().collect();
        assert_eq!(only0, vec![(0, 0)]);
    }

    #[test]
    fn random_arena_examples() {
        let one = random_arena(1, 1, 1, 9).unwrap();
        assert_eq!((one.n_states(), one.succ(0, 0)), (1, 0));
        assert_eq!(random_arena(6, 3, 2, 42).unwrap(), random_arena(6, 3, 2, 42).unwrap());
        let a = random_arena(6, 3, 2, 42).unwrap();
        assert!((0..3).all(|p| !a.states_of(p).is_empty()));
        assert!(matches!(random_arena(0, 1, 1, 0), Err(ArenaError::BadParams(_))));
    }

    #[test]
    fn lasso_positions_follow_the_play() {
        let a = a2();
        let l = a.lasso_along(&[0, 1], &[1, 0, 1]).unwrap();
        assert!(a.check_lasso(&l));
        assert_eq!(l.positions(), vec![(0, 0), (1, 0), (0, 0)]);
        assert_eq!(l.next_pos(2), 1);
    }
}
