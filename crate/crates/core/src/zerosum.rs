//! Two-player zero-sum games: attractors, safety, parity (Zielonka), one-pair Streett,
//! generalized reachability and a Zielonka-tree solver for Muller conditions given by
//! vectors of priorities.

use crate::arena::Arena;
use crate::region::Region;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("generalized reachability with {0} targets exceeds the bound of {1}")]
    TooManyTargets(usize, usize),
    #[error("vertex {0} is not in the winning region")]
    NotWinning(usize),
    #[error("vertex {0} is not owned by the protagonist")]
    NotProtagonist(usize),
}

pub const DEFAULT_TARGET_BOUND: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Protagonist,
    Antagonist,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::Protagonist => Side::Antagonist,
            Side::Antagonist => Side::Protagonist,
        }
    }

    fn index(self) -> usize {
        match self {
            Side::Protagonist => 0,
            Side::Antagonist => 1,
        }
    }

    fn from_parity(p: u32) -> Side {
        if p.is_multiple_of(2) {
            Side::Protagonist
        } else {
            Side::Antagonist
        }
    }
}

/// Edge with the action label that produced it (product games keep the arena action).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub to: usize,
    pub action: usize,
}

#[derive(Clone, Debug)]
pub struct TwoPlayerGame {
    owner: Vec<Side>,
    edges: Vec<Vec<Edge>>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    /// Arena state each vertex stands for.
    pub origin: Vec<usize>,
    /// Memory annotation of product vertices (0 for plain lifts).
    pub memory: Vec<usize>,
}

impl TwoPlayerGame {
    pub fn new(owner: Vec<Side>, edges: Vec<Vec<Edge>>, origin: Vec<usize>, memory: Vec<usize>) -> Self {
        let n = owner.len();
        assert_eq!(edges.len(), n);
        assert!(edges.iter().all(|e| !e.is_empty()), "every vertex needs a successor");
        let succ: Vec<Vec<usize>> = edges
            .iter()
            .map(|es| {
                let mut s: Vec<usize> = es.iter().map(|e| e.to).collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        let mut pred = vec![Vec::new(); n];
        for (v, ss) in succ.iter().enumerate() {
            for &w in ss {
                pred[w].push(v);
            }
        }
        TwoPlayerGame { owner, edges, succ, pred, origin, memory }
    }

    /// Game whose vertices are unlabelled (origin = vertex id).
    pub fn plain(owner: Vec<Side>, edges: Vec<Vec<Edge>>) -> Self {
        let n = owner.len();
        TwoPlayerGame::new(owner, edges, (0..n).collect(), vec![0; n])
    }

    pub fn n_vertices(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self, v: usize) -> Side {
        self.owner[v]
    }

    pub fn edges(&self, v: usize) -> &[Edge] {
        &self.edges[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn all(&self) -> Region {
        Region::full(self.n_vertices())
    }

    /// First edge (in stored order) of `v` that lands in `into`.
    fn edge_into(&self, v: usize, into: impl Fn(usize) -> bool) -> Option<Edge> {
        self.edges[v].iter().copied().find(|e| into(e.to))
    }
}

/// Lifts the arena with the players in `coalition` as protagonist.
pub fn coalition_lift(a: &Arena, coalition: &[usize]) -> TwoPlayerGame {
    let owner = (0..a.n_states())
        .map(|s| if coalition.contains(&a.owner(s)) { Side::Protagonist } else { Side::Antagonist })
        .collect();
    let edges = (0..a.n_states())
        .map(|s| a.moves(s).map(|(action, to)| Edge { to, action }).collect())
        .collect();
    TwoPlayerGame::plain(owner, edges)
}

/// Attractor for `side` to `target` inside the subgame `within`, with ranks
/// (`usize::MAX` outside the attractor).
pub fn attractor_in(g: &TwoPlayerGame, within: &Region, target: &Region, side: Side) -> (Region, Vec<usize>) {
    let n = g.n_vertices();
    let mut rank = vec![usize::MAX; n];
    let mut attr = Region::empty(n);
    let mut count = vec![0usize; n];
    for v in within.iter() {
        count[v] = g.succ[v].iter().filter(|&&w| within.contains(w)).count();
    }
    let mut queue = VecDeque::new();
    for v in target.iter().filter(|&v| within.contains(v)) {
        attr.insert(v);
        rank[v] = 0;
        queue.push_back(v);
    }
    while let Some(w) = queue.pop_front() {
        for &v in &g.pred[w] {
            if !within.contains(v) || attr.contains(v) {
                continue;
            }
            let take = if g.owner[v] == side {
                true
            } else {
                count[v] -= 1;
                count[v] == 0
            };
            if take {
                attr.insert(v);
                rank[v] = rank[w] + 1;
                queue.push_back(v);
            }
        }
    }
    (attr, rank)
}

/// Attractor for `side` to `target` in the full game, never entering `avoid`: vertices of
/// `avoid` are absorbing for the opponent.
pub fn attractor_avoiding(g: &TwoPlayerGame, target: &Region, avoid: &Region, side: Side) -> Region {
    let n = g.n_vertices();
    let mut attr = Region::empty(n);
    let mut count: Vec<usize> = (0..n).map(|v| g.succ[v].len()).collect();
    let mut queue = VecDeque::new();
    for v in target.iter().filter(|&v| !avoid.contains(v)) {
        attr.insert(v);
        queue.push_back(v);
    }
    while let Some(w) = queue.pop_front() {
        for &v in &g.pred[w] {
            if avoid.contains(v) || attr.contains(v) {
                continue;
            }
            let take = g.owner[v] == side || {
                count[v] -= 1;
                count[v] == 0
            };
            if take {
                attr.insert(v);
                queue.push_back(v);
            }
        }
    }
    attr
}

pub fn attractor(g: &TwoPlayerGame, target: &Region, side: Side) -> Region {
    attractor_in(g, &g.all(), target, side).0
}

/// Vertices from which `side` keeps the play inside `safe` forever.
pub fn safe_region(g: &TwoPlayerGame, safe: &Region, side: Side) -> Region {
    safe_region_in(g, &g.all(), safe, side)
}

pub fn safe_region_in(g: &TwoPlayerGame, within: &Region, safe: &Region, side: Side) -> Region {
    let bad = within.difference(safe);
    let (lost, _) = attractor_in(g, within, &bad, side.opponent());
    within.difference(&lost)
}

/// Winning regions and a memoryless strategy for each vertex's winner.
#[derive(Clone, Debug)]
pub struct ParitySolution {
    pub protagonist: Region,
    pub antagonist: Region,
    /// Chosen edge for every vertex owned by the player who wins it.
    pub choice: Vec<Option<Edge>>,
}

impl ParitySolution {
    pub fn winner(&self, v: usize) -> Side {
        if self.protagonist.contains(v) {
            Side::Protagonist
        } else {
            Side::Antagonist
        }
    }
}

/// Min-even parity game: the protagonist wins plays whose least priority seen
/// infinitely often is even.
pub fn solve_parity(g: &TwoPlayerGame, priority: &[u32]) -> (Region, Region) {
    let s = solve_parity_strategy(g, priority);
    (s.protagonist, s.antagonist)
}

pub fn solve_parity_strategy(g: &TwoPlayerGame, priority: &[u32]) -> ParitySolution {
    assert_eq!(priority.len(), g.n_vertices());
    let mut choice = vec![None; g.n_vertices()];
    let [w0, w1] = zielonka(g, priority, &g.all(), &mut choice);
    ParitySolution { protagonist: w0, antagonist: w1, choice }
}

fn zielonka(g: &TwoPlayerGame, prio: &[u32], within: &Region, choice: &mut [Option<Edge>]) -> [Region; 2] {
    let n = g.n_vertices();
    if within.is_empty() {
        return [Region::empty(n), Region::empty(n)];
    }
    let p = within.iter().map(|v| prio[v]).min().unwrap();
    let alpha = Side::from_parity(p);
    let beta = alpha.opponent();
    let top = Region::from_ids(n, within.iter().filter(|&v| prio[v] == p));
    let (a, rank_a) = attractor_in(g, within, &top, alpha);
    let rest = within.difference(&a);
    let w1 = zielonka(g, prio, &rest, choice);
    if w1[beta.index()].is_empty() {
        for v in a.iter().filter(|&v| g.owner[v] == alpha) {
            choice[v] = if top.contains(v) {
                g.edge_into(v, |w| within.contains(w))
            } else {
                g.edge_into(v, |w| a.contains(w) && rank_a[w] < rank_a[v])
            };
        }
        let mut out = [Region::empty(n), Region::empty(n)];
        out[alpha.index()] = within.clone();
        return out;
    }
    let (b, rank_b) = attractor_in(g, within, &w1[beta.index()], beta);
    let rest2 = within.difference(&b);
    let w2 = zielonka(g, prio, &rest2, choice);
    for v in b.iter().filter(|&v| g.owner[v] == beta && !w1[beta.index()].contains(v)) {
        choice[v] = g.edge_into(v, |w| b.contains(w) && rank_b[w] < rank_b[v]);
    }
    let mut out = w2;
    out[beta.index()].union_with(&b);
    out
}

/// Parity encoding of the one-pair Streett condition `Inf ∩ E ≠ ∅ → Inf ∩ F ≠ ∅`.
pub fn streett_priorities(n: usize, e: &Region, f: &Region) -> Vec<u32> {
    (0..n)
        .map(|v| {
            if f.contains(v) {
                0
            } else if e.contains(v) {
                1
            } else {
                2
            }
        })
        .collect()
}

pub fn solve_one_pair_streett(g: &TwoPlayerGame, e: &Region, f: &Region) -> Region {
    solve_parity(g, &streett_priorities(g.n_vertices(), e, f)).0
}

/// Protagonist region for visiting every target set at least once, via the
/// product with the set of targets already visited.
pub fn solve_generalized_reachability(g: &TwoPlayerGame, targets: &[Region]) -> Result<Region, GameError> {
    solve_generalized_reachability_bounded(g, targets, DEFAULT_TARGET_BOUND)
}

pub fn solve_generalized_reachability_bounded(
    g: &TwoPlayerGame,
    targets: &[Region],
    bound: usize,
) -> Result<Region, GameError> {
    let k = targets.len();
    if k > bound {
        return Err(GameError::TooManyTargets(k, bound));
    }
    let n = g.n_vertices();
    let masks = 1usize << k;
    let bits = |v: usize| -> usize {
        targets.iter().enumerate().filter(|(_, t)| t.contains(v)).map(|(j, _)| 1 << j).sum()
    };
    let vbits: Vec<usize> = (0..n).map(bits).collect();
    let id = |v: usize, m: usize| v * masks + m;
    let mut owner = Vec::with_capacity(n * masks);
    let mut edges = Vec::with_capacity(n * masks);
    let mut origin = Vec::with_capacity(n * masks);
    let mut memory = Vec::with_capacity(n * masks);
    for v in 0..n {
        for m in 0..masks {
            owner.push(g.owner[v]);
            edges.push(g.edges[v].iter().map(|e| Edge { to: id(e.to, m | vbits[e.to]), action: e.action }).collect());
            origin.push(v);
            memory.push(m);
        }
    }
    let prod = TwoPlayerGame::new(owner, edges, origin, memory);
    let goal = Region::from_fn(n * masks, |x| x % masks == masks - 1);
    let win = attractor(&prod, &goal, Side::Protagonist);
    Ok(Region::from_fn(n, |v| win.contains(id(v, vbits[v]))))
}

/// What a memoryless certificate should guarantee.
#[derive(Clone, Copy, Debug)]
pub enum Certificate<'a> {
    Reach(&'a Region),
    Safe(&'a Region),
    Parity(&'a [u32]),
    Streett1 { e: &'a Region, f: &'a Region },
}

#[derive(Clone, Debug)]
pub struct MemorylessStrategy {
    choice: Vec<Option<Edge>>,
    protagonist: Vec<bool>,
}

impl MemorylessStrategy {
    pub fn choice(&self, v: usize) -> Result<Edge, GameError> {
        if !self.protagonist[v] {
            return Err(GameError::NotProtagonist(v));
        }
        self.choice[v].ok_or(GameError::NotWinning(v))
    }

    pub fn choices(&self) -> &[Option<Edge>] {
        &self.choice
    }
}

/// Memoryless protagonist strategy that stays winning (and, for reachability, strictly
/// decreases the attractor rank) on every protagonist vertex of `winning`.
pub fn extract_memoryless_strategy(g: &TwoPlayerGame, winning: &Region, cert: Certificate) -> MemorylessStrategy {
    let n = g.n_vertices();
    let mut choice = vec![None; n];
    let prot = |v: usize| g.owner[v] == Side::Protagonist;
    match cert {
        Certificate::Reach(target) => {
            let (attr, rank) = attractor_in(g, &g.all(), target, Side::Protagonist);
            for v in winning.iter().filter(|&v| prot(v) && attr.contains(v)) {
                choice[v] = if target.contains(v) {
                    Some(g.edges[v][0])
                } else {
                    g.edge_into(v, |w| rank[w] < rank[v])
                };
            }
        }
        Certificate::Safe(safe) => {
            let keep = safe_region(g, safe, Side::Protagonist);
            for v in winning.iter().filter(|&v| prot(v) && keep.contains(v)) {
                choice[v] = g.edge_into(v, |w| keep.contains(w));
            }
        }
        Certificate::Parity(prio) => {
            let sol = solve_parity_strategy(g, prio);
            for v in winning.iter().filter(|&v| prot(v) && sol.protagonist.contains(v)) {
                choice[v] = sol.choice[v];
            }
        }
        Certificate::Streett1 { e, f } => {
            let sol = solve_parity_strategy(g, &streett_priorities(n, e, f));
            for v in winning.iter().filter(|&v| prot(v) && sol.protagonist.contains(v)) {
                choice[v] = sol.choice[v];
            }
        }
    }
    MemorylessStrategy { choice, protagonist: (0..n).map(prot).collect() }
}

/// Muller game whose acceptance depends only on the componentwise minimum of the
/// colour vectors seen infinitely often: the protagonist wins iff `good(min)`.
/// Solved with Zielonka's recursion over the Zielonka tree, whose children are
/// computed from threshold sets of the colours present in each subgame.
pub fn solve_vector_muller(g: &TwoPlayerGame, colors: &[Vec<u32>], good: &dyn Fn(&[u32]) -> bool) -> (Region, Region) {
    let [w0, w1] = muller(g, colors, good, &g.all());
    (w0, w1)
}

fn min_vector(colors: &[Vec<u32>], set: &Region) -> Vec<u32> {
    let dim = colors[set.first().unwrap()].len();
    (0..dim).map(|j| set.iter().map(|v| colors[v][j]).min().unwrap()).collect()
}

/// Maximal vertex sets `{v : colors[v] >= t}` whose acceptance differs from `root`.
fn muller_children(colors: &[Vec<u32>], good: &dyn Fn(&[u32]) -> bool, within: &Region, root: bool) -> Vec<Region> {
    let dim = colors[within.first().unwrap()].len();
    let mut values: Vec<Vec<u32>> = (0..dim)
        .map(|j| {
            let mut vs: Vec<u32> = within.iter().map(|v| colors[v][j]).collect();
            vs.sort_unstable();
            vs.dedup();
            vs
        })
        .collect();
    for vs in values.iter_mut() {
        vs.truncate(vs.len());
    }
    let mut cands: Vec<Region> = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let t: Vec<u32> = (0..dim).map(|j| values[j][idx[j]]).collect();
        let y = Region::from_ids(
            within.universe(),
            within.iter().filter(|&v| colors[v].iter().zip(&t).all(|(c, tt)| c >= tt)),
        );
        if !y.is_empty() && good(&min_vector(colors, &y)) != root && !cands.contains(&y) {
            cands.push(y);
        }
        let mut j = 0;
        while j < dim {
            idx[j] += 1;
            if idx[j] < values[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == dim {
            break;
        }
    }
    let maximal: Vec<Region> = cands
        .iter()
        .filter(|c| !cands.iter().any(|d| d != *c && c.is_subset(d)))
        .cloned()
        .collect();
    maximal
}

fn muller(g: &TwoPlayerGame, colors: &[Vec<u32>], good: &dyn Fn(&[u32]) -> bool, within: &Region) -> [Region; 2] {
    let n = g.n_vertices();
    if within.is_empty() {
        return [Region::empty(n), Region::empty(n)];
    }
    let root = good(&min_vector(colors, within));
    let sigma = if root { Side::Protagonist } else { Side::Antagonist };
    let children = muller_children(colors, good, within, root);
    let mut cur = within.clone();
    let mut lost = Region::empty(n);
    'outer: loop {
        if cur.is_empty() {
            break;
        }
        for child in &children {
            let outside = cur.difference(child);
            let (a, _) = attractor_in(g, &cur, &outside, sigma);
            let sub = cur.difference(&a);
            if sub.is_empty() {
                continue;
            }
            let w = muller(g, colors, good, &sub);
            let opp = &w[sigma.opponent().index()];
            if !opp.is_empty() {
                let (b, _) = attractor_in(g, &cur, opp, sigma.opponent());
                lost.union_with(&b);
                cur.subtract(&b);
                continue 'outer;
            }
        }
        break;
    }
    let mut out = [Region::empty(n), Region::empty(n)];
    out[sigma.index()] = cur;
    out[sigma.opponent().index()] = lost;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::a2;
    use crate::graph::Graph;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: usize, ids: &[usize]) -> Region {
        Region::from_ids(n, ids.iter().copied())
    }

    fn one_vertex(side: Side, loops: usize) -> TwoPlayerGame {
        TwoPlayerGame::plain(vec![side], vec![(0..loops).map(|k| Edge { to: 0, action: k }).collect()])
    }

    #[test]
    fn lift_examples() {
        let a = a2();
        assert!((0..2).all(|v| coalition_lift(&a, &[0, 1]).owner(v) == Side::Protagonist));
        assert!((0..2).all(|v| coalition_lift(&a, &[]).owner(v) == Side::Antagonist));
        let g = coalition_lift(&a, &[0]);
        assert_eq!((g.owner(0), g.owner(1)), (Side::Protagonist, Side::Antagonist));
    }

    #[test]
    fn attractor_examples() {
        let g = coalition_lift(&a2(), &[0]);
        assert_eq!(attractor(&g, &g.all(), Side::Protagonist), g.all());
        assert!(attractor(&g, &Region::empty(2), Side::Protagonist).is_empty());
        assert_eq!(attractor(&g, &r(2, &[1]), Side::Protagonist).to_vec(), vec![0, 1]);
    }

    #[test]
    fn safe_region_examples() {
        let g = coalition_lift(&a2(), &[0]);
        assert_eq!(safe_region(&g, &g.all(), Side::Protagonist), g.all());
        assert!(safe_region(&g, &Region::empty(2), Side::Protagonist).is_empty());
        assert_eq!(safe_region(&g, &r(2, &[0]), Side::Protagonist).to_vec(), vec![0]);
    }

    #[test]
    fn parity_examples() {
        let g = coalition_lift(&a2(), &[0]);
        assert_eq!(solve_parity(&g, &[0, 0]).0, g.all());
        assert!(solve_parity(&g, &[1, 1]).0.is_empty());
        let single = one_vertex(Side::Protagonist, 2);
        assert_eq!(solve_parity(&single, &[1]).1.to_vec(), vec![0]);
    }

    #[test]
    fn streett_examples() {
        let g = coalition_lift(&a2(), &[0]);
        assert_eq!(solve_one_pair_streett(&g, &Region::empty(2), &Region::empty(2)), g.all());
        assert_eq!(solve_one_pair_streett(&g, &g.all(), &g.all()), g.all());
        let single = one_vertex(Side::Antagonist, 1);
        assert!(solve_one_pair_streett(&single, &r(1, &[0]), &Region::empty(1)).is_empty());
    }

    #[test]
    fn generalized_reachability_examples() {
        let g = coalition_lift(&a2(), &[0]);
        assert_eq!(solve_generalized_reachability(&g, &[]).unwrap(), g.all());
        assert_eq!(solve_generalized_reachability(&g, &[g.all()]).unwrap(), g.all());
        let e = |to| Edge { to, action: 0 };
        let chain = TwoPlayerGame::plain(
            vec![Side::Protagonist, Side::Antagonist, Side::Antagonist],
            vec![vec![e(1), Edge { to: 2, action: 1 }], vec![e(1)], vec![e(2)]],
        );
        let w = solve_generalized_reachability(&chain, &[r(3, &[1]), r(3, &[2])]).unwrap();
        assert!(!w.contains(0));
        let many: Vec<Region> = (0..13).map(|_| chain.all()).collect();
        assert_eq!(solve_generalized_reachability(&chain, &many), Err(GameError::TooManyTargets(13, 12)));
    }

    #[test]
    fn certificate_examples() {
        let g = coalition_lift(&a2(), &[0]);
        let safe = r(2, &[0]);
        let s = extract_memoryless_strategy(&g, &safe_region(&g, &safe, Side::Protagonist), Certificate::Safe(&safe));
        assert_eq!(s.choice(0).unwrap().action, 1);
        let t = r(2, &[1]);
        let s = extract_memoryless_strategy(&g, &attractor(&g, &t, Side::Protagonist), Certificate::Reach(&t));
        assert_eq!(s.choice(0).unwrap().action, 0);
        let none = extract_memoryless_strategy(&g, &Region::empty(2), Certificate::Reach(&t));
        assert_eq!(none.choice(0), Err(GameError::NotWinning(0)));
        assert_eq!(none.choice(1), Err(GameError::NotProtagonist(1)));
    }

    fn random_game(seed: u64, max_n: usize) -> (TwoPlayerGame, Vec<u32>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=max_n);
        let owner = (0..n).map(|_| if rng.gen_bool(0.5) { Side::Protagonist } else { Side::Antagonist }).collect();
        let edges = (0..n)
            .map(|_| (0..rng.gen_range(1..=2)).map(|k| Edge { to: rng.gen_range(0..n), action: k }).collect())
            .collect();
        let prio = (0..n).map(|_| rng.gen_range(0..4)).collect();
        (TwoPlayerGame::plain(owner, edges), prio)
    }

    /// Whether the graph `succ` has, from `v`, a reachable cycle whose minimum priority is odd.
    fn odd_cycle_from(succ: &[Vec<usize>], prio: &[u32], v: usize) -> bool {
        let n = succ.len();
        let reach = Graph::new(Region::full(n), succ.to_vec()).reachable_from(v);
        (0..4).filter(|p| p % 2 == 1).any(|p| {
            let keep = Region::from_fn(n, |w| reach.contains(w) && prio[w] >= p);
            let g = Graph::new(keep, succ.to_vec());
            g.sccs().iter().any(|c| g.is_nontrivial(c) && c.iter().any(|&w| prio[w] == p))
        })
    }

    /// Protagonist region by enumerating its memoryless strategies.
    fn brute_parity(g: &TwoPlayerGame, prio: &[u32]) -> Region {
        let n = g.n_vertices();
        let mine: Vec<usize> = (0..n).filter(|&v| g.owner(v) == Side::Protagonist).collect();
        let mut win = Region::empty(n);
        let mut pick = vec![0usize; mine.len()];
        loop {
            let succ: Vec<Vec<usize>> = (0..n)
                .map(|v| match mine.iter().position(|&m| m == v) {
                    Some(k) => vec![g.edges(v)[pick[k]].to],
                    None => g.successors(v).to_vec(),
                })
                .collect();
            for v in 0..n {
                if !odd_cycle_from(&succ, prio, v) {
                    win.insert(v);
                }
            }
            let mut k = 0;
            while k < mine.len() {
                pick[k] += 1;
                if pick[k] < g.edges(mine[k]).len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == mine.len() {
                return win;
            }
        }
    }

    proptest! {
        #[test]
        fn parity_is_determined_and_matches_enumeration(seed in any::<u64>()) {
            let (g, prio) = random_game(seed, 5);
            let (w0, w1) = solve_parity(&g, &prio);
            prop_assert!(!w0.intersects(&w1));
            prop_assert_eq!(w0.union(&w1), g.all());
            prop_assert_eq!(w0, brute_parity(&g, &prio));
        }

        #[test]
        fn streett_matches_parity_encoding_enumeration(seed in any::<u64>()) {
            let (g, prio) = random_game(seed, 5);
            let n = g.n_vertices();
            let e = Region::from_fn(n, |v| prio[v] >= 2);
            let f = Region::from_fn(n, |v| prio[v] == 0);
            let w = solve_one_pair_streett(&g, &e, &f);
            prop_assert_eq!(w, brute_parity(&g, &streett_priorities(n, &e, &f)));
        }

        #[test]
        fn attractor_is_monotone_and_extensive(seed in any::<u64>(), bits in any::<u8>(), extra in any::<u8>()) {
            let (g, _) = random_game(seed, 6);
            let n = g.n_vertices();
            let t = Region::from_fn(n, |v| bits >> v & 1 == 1);
            let t2 = Region::from_fn(n, |v| (bits | extra) >> v & 1 == 1);
            let a = attractor(&g, &t, Side::Protagonist);
            prop_assert!(t.is_subset(&a));
            prop_assert!(a.is_subset(&attractor(&g, &t2, Side::Protagonist)));
            prop_assert!(safe_region(&g, &t, Side::Protagonist).is_subset(&t));
            // the two sides' attractor and trap partition the game
            let trap = safe_region(&g, &t.complement(), Side::Antagonist);
            prop_assert_eq!(a.union(&trap), g.all());
            prop_assert!(!a.intersects(&trap));
        }

        #[test]
        fn extracted_parity_strategy_wins(seed in any::<u64>()) {
            let (g, prio) = random_game(seed, 5);
            let n = g.n_vertices();
            let (w0, _) = solve_parity(&g, &prio);
            let s = extract_memoryless_strategy(&g, &w0, Certificate::Parity(&prio));
            let succ: Vec<Vec<usize>> = (0..n)
                .map(|v| match (g.owner(v), s.choice(v)) {
                    (Side::Protagonist, Ok(e)) => vec![e.to],
                    _ => g.successors(v).to_vec(),
                })
                .collect();
            for v in w0.iter() {
                prop_assert!(!odd_cycle_from(&succ, &prio, v));
            }
        }
    }
}
