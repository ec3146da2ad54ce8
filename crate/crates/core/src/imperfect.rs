//! Doomsday equilibria under imperfect information, for safety and reachability.
//!
//! For each player `i`, [`DoomsdayAutomaton`] reads `i`'s observations and accepts
//! exactly the sequences all of whose compatible plays are good for `i` (`i` wins, or
//! every other player loses). A compatible play is tracked as a thread `(state, bits)`
//! with monotone bits, so bad threads are co-Büchi recognizable and a breakpoint
//! construction determinizes their complement. The retaliation game on the automaton
//! marks the observation prefixes after which `i` can still enforce goodness.

use crate::arena::{action_labels, Arena, ArenaError, Lasso, PlayPrefix};
use crate::de_perfect::DeDecision;
use crate::graph::Graph;
use crate::objectives::{ObjClass, Profile};
use crate::region::Region;
use crate::zerosum::{solve_one_pair_streett, Edge, Side, TwoPlayerGame};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use std::collections::{BTreeSet, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImperfectError {
    #[error("imperfect information supports safety and reachability only, got {0}")]
    UnsupportedClass(ObjClass),
    #[error("{0} players exceed the bit-vector bound of {1}")]
    TooManyPlayers(usize, usize),
    #[error("observations of player {player} do not partition the states: {reason}")]
    NotPartition { player: usize, reason: String },
    #[error("state {state} of player {owner} moves to state {succ} of player {succ_owner}; turns must be round-robin")]
    NotRoundRobin { state: usize, owner: usize, succ: usize, succ_owner: usize },
    #[error("expected observations for {expected} players, got {got}")]
    WrongPlayerCount { expected: usize, got: usize },
    #[error("observation syntax error: {0}")]
    SyntaxError(String),
}

pub const IMPERFECT_BIT_BOUND: usize = 12;

/// Arena whose players observe states only up to a partition.
#[derive(Clone, Debug)]
pub struct ImperfectArena {
    pub base: Arena,
    /// `block[i][s]`: index of the block of player `i` containing `s`.
    block: Vec<Vec<usize>>,
    blocks: Vec<Vec<Vec<usize>>>,
}

impl ImperfectArena {
    pub fn new(base: Arena, blocks: Vec<Vec<Vec<usize>>>) -> Result<Self, ImperfectError> {
        let n = base.n_states();
        let np = base.n_players();
        if blocks.len() != np {
            return Err(ImperfectError::WrongPlayerCount { expected: np, got: blocks.len() });
        }
        let mut block = vec![vec![usize::MAX; n]; np];
        for (i, part) in blocks.iter().enumerate() {
            for (b, states) in part.iter().enumerate() {
                if states.is_empty() {
                    return Err(ImperfectError::NotPartition { player: i + 1, reason: format!("block {b} is empty") });
                }
                for &s in states {
                    if s >= n {
                        return Err(ImperfectError::NotPartition { player: i + 1, reason: format!("unknown state {s}") });
                    }
                    if block[i][s] != usize::MAX {
                        return Err(ImperfectError::NotPartition {
                            player: i + 1,
                            reason: format!("state {s} is in two blocks"),
                        });
                    }
                    block[i][s] = b;
                }
            }
            if let Some(s) = block[i].iter().position(|&b| b == usize::MAX) {
                return Err(ImperfectError::NotPartition { player: i + 1, reason: format!("state {s} is in no block") });
            }
        }
        for s in 0..n {
            let k = base.owner(s);
            for (_, t) in base.moves(s) {
                if base.owner(t) != (k + 1) % np {
                    return Err(ImperfectError::NotRoundRobin {
                        state: s,
                        owner: k + 1,
                        succ: t,
                        succ_owner: base.owner(t) + 1,
                    });
                }
            }
        }
        Ok(ImperfectArena { base, block, blocks })
    }

    /// Every player observes states exactly.
    pub fn perfect(base: Arena) -> Result<Self, ImperfectError> {
        let n = base.n_states();
        let blocks = vec![(0..n).map(|s| vec![s]).collect(); base.n_players()];
        ImperfectArena::new(base, blocks)
    }

    pub fn block_of(&self, i: usize, s: usize) -> usize {
        self.block[i][s]
    }

    pub fn blocks(&self, i: usize) -> &[Vec<usize>] {
        &self.blocks[i]
    }

    /// Observation letter of player `i` at state `s` when `action` is played there.
    pub fn letter(&self, i: usize, s: usize, action: usize) -> Letter {
        Letter { block: self.block[i][s], action: (self.base.owner(s) == i).then_some(action) }
    }
}

/// Parses `[[[states of block 0], ...] per player]`.
pub fn parse_observations(text: &str, base: Arena) -> Result<ImperfectArena, ImperfectError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Bare(Vec<Vec<Vec<usize>>>),
        Wrapped { observations: Vec<Vec<Vec<usize>>> },
    }
    let doc: Doc = serde_json::from_str(text).map_err(|e| ImperfectError::SyntaxError(e.to_string()))?;
    let blocks = match doc {
        Doc::Bare(b) => b,
        Doc::Wrapped { observations } => observations,
    };
    ImperfectArena::new(base, blocks)
}

/// `(block, action)`, the action being hidden (`None`, written τ) at other players' states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub block: usize,
    pub action: Option<usize>,
}

/// Observation sequence of player `i` along a prefix; the last state carries no action.
pub fn obs_of_prefix(ia: &ImperfectArena, i: usize, p: &PlayPrefix) -> Vec<Letter> {
    let mut out: Vec<Letter> = p.states.iter().zip(&p.actions).map(|(&s, &x)| ia.letter(i, s, x)).collect();
    let last = p.last();
    out.push(Letter { block: ia.block_of(i, last), action: None });
    out
}

/// Observation sequence of player `i` along the positions of a lasso (stem, then one period).
pub fn obs_of_lasso(ia: &ImperfectArena, i: usize, l: &Lasso) -> Vec<Letter> {
    l.positions().into_iter().map(|(s, x)| ia.letter(i, s, x)).collect()
}

type Thread = (usize, u32);

/// Bit `j` of a thread: safety, the thread has left `T_j`; reachability, it has visited `T_j`.
fn thread_bits(p: &Profile, s: usize) -> u32 {
    let reach = p.class() == ObjClass::Reach;
    (0..p.n_players()).filter(|&j| p.target(j).contains(s) == reach).map(|j| 1u32 << j).sum()
}

/// A thread whose bits are final and bad for `i`.
fn thread_bad(class: ObjClass, i: usize, n_pl: usize, bits: u32) -> bool {
    let mine = bits >> i & 1 == 1;
    let others = (0..n_pl).filter(|&j| j != i);
    match class {
        ObjClass::Safety => mine && others.clone().any(|j| bits >> j & 1 == 0),
        ObjClass::Reach => !mine && others.clone().any(|j| bits >> j & 1 == 1),
        _ => unreachable!(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct DVertex {
    threads: BTreeSet<Thread>,
    /// Threads that have stayed bad since the last breakpoint.
    watched: BTreeSet<Thread>,
}

/// Deterministic automaton over the observation letters of one player.
#[derive(Clone, Debug)]
pub struct DoomsdayAutomaton {
    pub player: usize,
    vertices: Vec<DVertex>,
    trans: HashMap<(usize, Letter), usize>,
}

impl DoomsdayAutomaton {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    /// `None` when no play is compatible with the letter: the run then accepts vacuously.
    pub fn step(&self, q: usize, l: Letter) -> Option<usize> {
        self.trans.get(&(q, l)).copied()
    }

    /// Acceptance marks: the breakpoint set is empty.
    pub fn is_breakpoint(&self, q: usize) -> bool {
        self.vertices[q].watched.is_empty()
    }

    /// Arena states of the threads of `q`.
    pub fn belief(&self, q: usize) -> BTreeSet<usize> {
        self.vertices[q].threads.iter().map(|&(s, _)| s).collect()
    }

    pub fn threads(&self, q: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.vertices[q].threads.iter().copied()
    }

    /// Observation blocks the next state may lie in.
    pub fn feasible_blocks(&self, ia: &ImperfectArena, q: usize) -> BTreeSet<usize> {
        self.vertices[q].threads.iter().map(|&(s, _)| ia.block_of(self.player, s)).collect()
    }

    /// Membership of the ultimately periodic word `stem . cycle^omega`.
    pub fn accepts(&self, stem: &[Letter], cycle: &[Letter]) -> bool {
        assert!(!cycle.is_empty());
        let mut q = self.initial();
        for &l in stem {
            match self.step(q, l) {
                Some(x) => q = x,
                None => return true,
            }
        }
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut trace: Vec<usize> = Vec::new();
        let mut k = 0;
        loop {
            if let Some(&first) = seen.get(&(q, k)) {
                return trace[first..].iter().any(|&v| self.is_breakpoint(v));
            }
            seen.insert((q, k), trace.len());
            trace.push(q);
            match self.step(q, cycle[k]) {
                Some(x) => q = x,
                None => return true,
            }
            k = (k + 1) % cycle.len();
        }
    }
}

fn check_class(ia: &ImperfectArena, p: &Profile) -> Result<(), ImperfectError> {
    if !matches!(p.class(), ObjClass::Safety | ObjClass::Reach) {
        return Err(ImperfectError::UnsupportedClass(p.class()));
    }
    if p.n_players() > IMPERFECT_BIT_BOUND {
        return Err(ImperfectError::TooManyPlayers(p.n_players(), IMPERFECT_BIT_BOUND));
    }
    debug_assert_eq!(ia.base.n_players(), p.n_players());
    Ok(())
}

/// Letters that some thread of `threads` can read.
fn letters_of(ia: &ImperfectArena, i: usize, threads: &BTreeSet<Thread>) -> Vec<Letter> {
    let mut out = BTreeSet::new();
    for &(s, _) in threads {
        let b = ia.block_of(i, s);
        if ia.base.owner(s) == i {
            for x in 0..ia.base.n_actions() {
                out.insert(Letter { block: b, action: Some(x) });
            }
        } else {
            out.insert(Letter { block: b, action: None });
        }
    }
    out.into_iter().collect()
}

fn post(ia: &ImperfectArena, p: &Profile, i: usize, threads: &BTreeSet<Thread>, l: Letter) -> BTreeSet<Thread> {
    let a = &ia.base;
    let mut out = BTreeSet::new();
    for &(s, bits) in threads {
        if ia.block_of(i, s) != l.block || (a.owner(s) == i) != l.action.is_some() {
            continue;
        }
        let mut push = |t: usize| {
            out.insert((t, bits | thread_bits(p, t)));
        };
        match l.action {
            Some(x) => push(a.succ(s, x)),
            None => a.moves(s).for_each(|(_, t)| push(t)),
        }
    }
    out
}

pub fn build_doomsday_automaton(ia: &ImperfectArena, p: &Profile, i: usize) -> Result<DoomsdayAutomaton, ImperfectError> {
    check_class(ia, p)?;
    let class = p.class();
    let n_pl = p.n_players();
    let init = ia.base.init();
    let start = DVertex { threads: BTreeSet::from([(init, thread_bits(p, init))]), watched: BTreeSet::new() };
    let mut ids: HashMap<DVertex, usize> = HashMap::from([(start.clone(), 0)]);
    let mut vertices = vec![start];
    let mut trans = HashMap::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(q) = queue.pop_front() {
        let v = vertices[q].clone();
        for l in letters_of(ia, i, &v.threads) {
            let threads = post(ia, p, i, &v.threads, l);
            if threads.is_empty() {
                continue;
            }
            let bad = |set: BTreeSet<Thread>| -> BTreeSet<Thread> {
                set.into_iter().filter(|&(_, b)| thread_bad(class, i, n_pl, b)).collect()
            };
            let watched = if v.watched.is_empty() {
                bad(threads.clone())
            } else {
                bad(post(ia, p, i, &v.watched, l))
            };
            let w = DVertex { threads, watched };
            let id = *ids.entry(w.clone()).or_insert_with(|| {
                vertices.push(w);
                queue.push_back(vertices.len() - 1);
                vertices.len() - 1
            });
            trans.insert((q, l), id);
        }
    }
    Ok(DoomsdayAutomaton { player: i, vertices, trans })
}

/// The retaliation game on a doomsday automaton and its winning region.
#[derive(Clone, Debug)]
pub struct RetaliationAutomaton {
    pub automaton: DoomsdayAutomaton,
    /// Winning choice vertices `(q, block)`: from `q`, once the observation `block` is
    /// seen, player `i` can still enforce goodness.
    win_after: HashMap<(usize, usize), bool>,
    /// Winning automaton vertices (before the next block is revealed).
    pub win: Region,
}

impl RetaliationAutomaton {
    /// The observation prefix ending in `q` followed by `block` is good for retaliation.
    pub fn ok(&self, q: usize, block: usize) -> bool {
        self.win_after.get(&(q, block)).copied().unwrap_or(false)
    }
}

/// Antagonist picks a feasible block, the protagonist then picks the action (or τ when
/// another player moves); the protagonist wins when breakpoints recur.
pub fn build_retaliation_automaton(ia: &ImperfectArena, d: DoomsdayAutomaton) -> RetaliationAutomaton {
    let i = d.player;
    let nq = d.n_vertices();
    let mut owner = vec![Side::Antagonist; nq];
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new(); nq];
    let mut choice_ids: HashMap<(usize, usize), usize> = HashMap::new();
    for q in 0..nq {
        for b in d.feasible_blocks(ia, q) {
            let id = owner.len();
            choice_ids.insert((q, b), id);
            owner.push(Side::Protagonist);
            edges.push(Vec::new());
            edges[q].push(Edge { to: id, action: b });
        }
    }
    for (&(q, b), &id) in &choice_ids {
        let mine = d.threads(q).any(|(s, _)| ia.block_of(i, s) == b && ia.base.owner(s) == i);
        let letters: Vec<Letter> = if mine {
            (0..ia.base.n_actions()).map(|x| Letter { block: b, action: Some(x) }).collect()
        } else {
            vec![Letter { block: b, action: None }]
        };
        for l in letters {
            let to = d.step(q, l).expect("feasible block has successors");
            edges[id].push(Edge { to, action: l.action.unwrap_or(usize::MAX) });
        }
    }
    let total = owner.len();
    let g = TwoPlayerGame::plain(owner, edges);
    let e = Region::full(total);
    let f = Region::from_fn(total, |v| v < nq && d.is_breakpoint(v));
    let w = solve_one_pair_streett(&g, &e, &f);
    let win_after = choice_ids.iter().map(|(&k, &id)| (k, w.contains(id))).collect();
    let win = Region::from_fn(nq, |q| w.contains(q));
    RetaliationAutomaton { automaton: d, win_after, win }
}

/// One retaliation automaton per player; the constructions are independent.
pub fn retaliation_automata(ia: &ImperfectArena, p: &Profile) -> Result<Vec<RetaliationAutomaton>, ImperfectError> {
    (0..p.n_players())
        .into_par_iter()
        .map(|i| build_doomsday_automaton(ia, p, i).map(|d| build_retaliation_automaton(ia, d)))
        .collect()
}

/// Decides DE existence: a play that satisfies every objective (F1), keeps every
/// observation prefix good for retaliation (F2), and whose observation sequences are
/// accepted by every doomsday automaton (F3).
pub fn decide_de_imperfect(ia: &ImperfectArena, p: &Profile) -> Result<DeDecision, ImperfectError> {
    check_class(ia, p)?;
    let a = &ia.base;
    let n_pl = p.n_players();
    let ret = retaliation_automata(ia, p)?;
    let reach = p.class() == ObjClass::Reach;
    let mut common = Region::full(a.n_states());
    if !reach {
        for j in 0..n_pl {
            common.intersect_with(p.target(j));
        }
    }
    let visit_bits = |s: usize| -> u32 {
        if reach {
            (0..n_pl).filter(|&j| p.target(j).contains(s)).map(|j| 1 << j).sum()
        } else {
            0
        }
    };
    let allowed = |s: usize, qs: &[usize]| common.contains(s) && (0..n_pl).all(|i| ret[i].ok(qs[i], ia.block_of(i, s)));
    type Key = (usize, Vec<usize>, u32);
    let start: Key = (a.init(), ret.iter().map(|r| r.automaton.initial()).collect(), visit_bits(a.init()));
    if !allowed(start.0, &start.1) {
        return Ok(negative());
    }
    let mut ids: HashMap<Key, usize> = HashMap::from([(start.clone(), 0)]);
    let mut verts = vec![start];
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    while k < verts.len() {
        let (s, qs, bits) = verts[k].clone();
        let mut out = Vec::new();
        for (x, t) in a.moves(s) {
            let q2: Option<Vec<usize>> =
                (0..n_pl).map(|i| ret[i].automaton.step(qs[i], ia.letter(i, s, x))).collect();
            let q2 = q2.expect("actual plays are compatible with their own observations");
            if !allowed(t, &q2) {
                continue;
            }
            let key = (t, q2, bits | visit_bits(t));
            let id = *ids.entry(key.clone()).or_insert_with(|| {
                verts.push(key);
                verts.len() - 1
            });
            out.push(id);
        }
        succ.push(out);
        k += 1;
    }
    let nv = verts.len();
    let g = Graph::new(Region::full(nv), succ);
    let full_bits = if reach { (1u32 << n_pl) - 1 } else { 0 };
    let mut comps: Vec<Vec<usize>> = g.sccs().into_iter().filter(|c| g.is_nontrivial(c)).collect();
    comps.sort();
    for c in comps {
        if verts[c[0]].2 != full_bits {
            continue;
        }
        let marks: Option<Vec<usize>> = (0..n_pl)
            .map(|i| c.iter().copied().find(|&v| ret[i].automaton.is_breakpoint(verts[v].1[i])))
            .collect();
        let Some(marks) = marks else { continue };
        let comp = Region::from_ids(nv, c.iter().copied());
        let start = marks[0];
        let stem = g.bfs_path(0, &Region::from_ids(nv, [start]), false).expect("all vertices are reachable");
        let cycle = g.thread_cycle(&comp, start, &marks[1..]);
        let proj = |xs: &[usize]| xs.iter().map(|&v| verts[v].0).collect::<Vec<_>>();
        let lasso = a.lasso_along(&proj(&stem), &proj(&cycle)).expect("product paths follow arena edges");
        return Ok(DeDecision { exists: true, witness_lasso: Some(lasso), witness_path: None, regions: Vec::new() });
    }
    Ok(negative())
}

/// Checks a lasso against the three conditions of [`decide_de_imperfect`].
pub fn verify_lasso(ia: &ImperfectArena, p: &Profile, l: &Lasso) -> Result<bool, ImperfectError> {
    check_class(ia, p)?;
    if !ia.base.check_lasso(l) || !p.eval_all(l).iter().all(|&b| b) {
        return Ok(false);
    }
    let n_pl = p.n_players();
    let ret = retaliation_automata(ia, p)?;
    let pos = l.positions();
    let mut qs: Vec<usize> = ret.iter().map(|r| r.automaton.initial()).collect();
    let mut k = 0;
    let mut seen = std::collections::HashSet::new();
    while seen.insert((k, qs.clone())) {
        let (s, x) = pos[k];
        if !(0..n_pl).all(|i| ret[i].ok(qs[i], ia.block_of(i, s))) {
            return Ok(false);
        }
        for i in 0..n_pl {
            qs[i] = ret[i].automaton.step(qs[i], ia.letter(i, s, x)).expect("plays are compatible with their observations");
        }
        k = l.next_pos(k);
    }
    Ok((0..n_pl).all(|i| {
        let w = obs_of_lasso(ia, i, l);
        let (stem, cycle) = w.split_at(l.stem_len());
        ret[i].automaton.accepts(stem, cycle)
    }))
}

fn negative() -> DeDecision {
    DeDecision { exists: false, witness_lasso: None, witness_path: None, regions: Vec::new() }
}

/// Brute-force membership: every play compatible with `stem . cycle^omega` is good
/// for player `i`. Searches the product of (state, bits) threads with word positions
/// for a reachable cycle of bad threads.
pub fn all_compatible_good(ia: &ImperfectArena, p: &Profile, i: usize, stem: &[Letter], cycle: &[Letter]) -> bool {
    let a = &ia.base;
    let len = stem.len() + cycle.len();
    let letter = |k: usize| if k < stem.len() { stem[k] } else { cycle[k - stem.len()] };
    let next = |k: usize| if k + 1 < len { k + 1 } else { stem.len() };
    let init = (a.init(), thread_bits(p, a.init()), 0usize);
    let mut ids: HashMap<(usize, u32, usize), usize> = HashMap::from([(init, 0)]);
    let mut verts = vec![init];
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    while k < verts.len() {
        let (s, bits, pos) = verts[k];
        let l = letter(pos);
        let mut out = Vec::new();
        if ia.block_of(i, s) == l.block && (a.owner(s) == i) == l.action.is_some() {
            let targets: Vec<usize> = match l.action {
                Some(x) => vec![a.succ(s, x)],
                None => a.moves(s).map(|(_, t)| t).collect(),
            };
            for t in targets {
                let key = (t, bits | thread_bits(p, t), next(pos));
                let id = *ids.entry(key).or_insert_with(|| {
                    verts.push(key);
                    verts.len() - 1
                });
                out.push(id);
            }
        }
        succ.push(out);
        k += 1;
    }
    let nv = verts.len();
    let bad = Region::from_fn(nv, |v| thread_bad(p.class(), i, p.n_players(), verts[v].1));
    let g = Graph::new(bad, succ);
    !g.sccs().iter().any(|c| g.is_nontrivial(c))
}

/// Seeded random arena where state `s` belongs to player `s mod n_players` and every move
/// goes to a state of the next player.
pub fn random_round_robin(n_states: usize, n_players: usize, n_actions: usize, seed: u64) -> Result<Arena, ArenaError> {
    if n_players == 0 || n_states < n_players || n_actions == 0 {
        return Err(ArenaError::BadParams("round-robin arenas need a state per player".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let owner: Vec<usize> = (0..n_states).map(|s| s % n_players).collect();
    let mut delta = Vec::with_capacity(n_states * n_actions);
    for s in 0..n_states {
        let next: Vec<usize> = (0..n_states).filter(|&t| owner[t] == (owner[s] + 1) % n_players).collect();
        for _ in 0..n_actions {
            delta.push(*next.choose(&mut rng).unwrap());
        }
    }
    Arena::new(n_players, owner, 0, action_labels(n_actions), delta)
}

/// Seeded random observation partition for every player, with at most `max_blocks` blocks each.
pub fn random_observations(n_states: usize, n_players: usize, max_blocks: usize, seed: u64) -> Vec<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_players)
        .map(|_| {
            let k = max_blocks.max(1);
            let mut part = vec![Vec::new(); k];
            for s in 0..n_states {
                part[rng.gen_range(0..k)].push(s);
            }
            part.retain(|b| !b.is_empty());
            part
        })
        .collect()
}
