//! Finite-memory strategies over arena states.

use crate::arena::Arena;
use crate::region::Region;
use crate::zerosum::{Edge, Side, TwoPlayerGame};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::hash::Hash;

/// Strategy of one player with memory `0..n_mem`.
///
/// Started at state `s` with memory `start[s]`; the memory is updated on entering
/// each subsequent state. Missing `update` entries keep the memory, missing `act`
/// entries play action 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteMemoryStrategy {
    #[serde(with = "crate::arena::one_based")]
    pub player: usize,
    pub n_mem: usize,
    pub start: Vec<Option<usize>>,
    #[serde(with = "triples")]
    pub update: BTreeMap<(usize, usize), usize>,
    #[serde(with = "triples")]
    pub act: BTreeMap<(usize, usize), usize>,
}

impl FiniteMemoryStrategy {
    /// The strategy that always plays action 0 and never changes memory.
    pub fn trivial(player: usize, n_states: usize) -> Self {
        FiniteMemoryStrategy { player, n_mem: 1, start: vec![Some(0); n_states], update: BTreeMap::new(), act: BTreeMap::new() }
    }

    pub fn start_at(&self, s: usize) -> Option<usize> {
        self.start.get(s).copied().flatten()
    }

    pub fn next_memory(&self, m: usize, entered: usize) -> usize {
        self.update.get(&(m, entered)).copied().unwrap_or(m)
    }

    pub fn action(&self, m: usize, s: usize) -> usize {
        self.act.get(&(m, s)).copied().unwrap_or(0)
    }

    pub fn is_defined_at(&self, s: usize) -> bool {
        self.start_at(s).is_some()
    }

    /// Structural sanity against an arena.
    pub fn well_formed(&self, a: &Arena) -> bool {
        self.player < a.n_players()
            && self.start.len() == a.n_states()
            && self.start.iter().flatten().all(|&m| m < self.n_mem)
            && self.update.iter().all(|(&(m, s), &m2)| m < self.n_mem && s < a.n_states() && m2 < self.n_mem)
            && self.act.iter().all(|(&(m, s), &x)| m < self.n_mem && s < a.n_states() && x < a.n_actions())
    }
}

mod triples {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<(usize, usize), usize>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<[usize; 3]> = m.iter().map(|(&(a, b), &c)| [a, b, c]).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize), usize>, D::Error> {
        let v: Vec<[usize; 3]> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|[a, b, c]| ((a, b), c)).collect())
    }
}

#[derive(Debug)]
pub(crate) struct TooLarge;

/// Product of an arena with a deterministic memory `upd(m, entered state)`, explored
/// from the given seeds. Player `i` is the protagonist.
pub(crate) struct MemoryProduct<M> {
    pub game: TwoPlayerGame,
    pub mems: Vec<M>,
    pub index: HashMap<(usize, usize), usize>,
    mem_ids: HashMap<M, usize>,
}

impl<M: Clone + Eq + Hash> MemoryProduct<M> {
    pub fn build(
        a: &Arena,
        i: usize,
        seeds: impl IntoIterator<Item = (usize, M)>,
        upd: impl Fn(&M, usize) -> M,
        cap: usize,
    ) -> Result<Self, TooLarge> {
        let mut mems: Vec<M> = Vec::new();
        let mut mem_ids: HashMap<M, usize> = HashMap::new();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut verts: Vec<(usize, usize)> = Vec::new();
        let mut queue = VecDeque::new();
        let mut intern = |m: M, mems: &mut Vec<M>| -> usize {
            *mem_ids.entry(m.clone()).or_insert_with(|| {
                mems.push(m);
                mems.len() - 1
            })
        };
        let mut add = |s: usize, mid: usize, verts: &mut Vec<(usize, usize)>, queue: &mut VecDeque<usize>| -> usize {
            *index.entry((s, mid)).or_insert_with(|| {
                verts.push((s, mid));
                queue.push_back(verts.len() - 1);
                verts.len() - 1
            })
        };
        for (s, m) in seeds {
            let mid = intern(m, &mut mems);
            add(s, mid, &mut verts, &mut queue);
        }
        let mut edges: Vec<Vec<Edge>> = Vec::new();
        while let Some(v) = queue.pop_front() {
            if verts.len() > cap {
                return Err(TooLarge);
            }
            let (s, mid) = verts[v];
            let mut out = Vec::with_capacity(a.n_actions());
            for (action, w) in a.moves(s) {
                let m2 = upd(&mems[mid], w);
                let mid2 = intern(m2, &mut mems);
                let to = add(w, mid2, &mut verts, &mut queue);
                out.push(Edge { to, action });
            }
            if edges.len() <= v {
                edges.resize(v + 1, Vec::new());
            }
            edges[v] = out;
        }
        let owner = verts.iter().map(|&(s, _)| if a.owner(s) == i { Side::Protagonist } else { Side::Antagonist }).collect();
        let origin = verts.iter().map(|&(s, _)| s).collect();
        let memory = verts.iter().map(|&(_, m)| m).collect();
        Ok(MemoryProduct { game: TwoPlayerGame::new(owner, edges, origin, memory), mems, index, mem_ids })
    }

    pub fn vertex(&self, s: usize, m: &M) -> Option<usize> {
        let mid = *self.mem_ids.get(m)?;
        self.index.get(&(s, mid)).copied()
    }

    /// Arena states whose seed vertex lies in `win`.
    pub fn project(&self, n_states: usize, win: &Region, seed: impl Fn(usize) -> M) -> Region {
        Region::from_fn(n_states, |s| self.vertex(s, &seed(s)).is_some_and(|v| win.contains(v)))
    }

    /// Turns a memoryless product strategy into a finite-memory arena strategy.
    pub fn to_strategy(
        &self,
        player: usize,
        n_states: usize,
        win: &Region,
        choice: impl Fn(usize) -> Option<Edge>,
        seed: impl Fn(usize) -> M,
    ) -> FiniteMemoryStrategy {
        let g = &self.game;
        let start = (0..n_states)
            .map(|s| {
                let v = self.vertex(s, &seed(s))?;
                win.contains(v).then(|| g.memory[v])
            })
            .collect();
        let mut update = BTreeMap::new();
        let mut act = BTreeMap::new();
        for v in 0..g.n_vertices() {
            let m = g.memory[v];
            for e in g.edges(v) {
                let m2 = g.memory[e.to];
                if m2 != m {
                    update.insert((m, g.origin[e.to]), m2);
                }
            }
            if win.contains(v) && g.owner(v) == Side::Protagonist {
                if let Some(e) = choice(v) {
                    if e.action != 0 {
                        act.insert((m, g.origin[v]), e.action);
                    }
                }
            }
        }
        FiniteMemoryStrategy { player, n_mem: self.mems.len(), start, update, act }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::random_arena;
    use proptest::prelude::*;

    fn strategy_strategy(n_states: usize, n_actions: usize) -> impl proptest::strategy::Strategy<Value = FiniteMemoryStrategy> {
        (1usize..4).prop_flat_map(move |n_mem| {
            (
                prop::collection::vec(prop::option::of(0..n_mem), n_states),
                prop::collection::btree_map((0..n_mem, 0..n_states), 0..n_mem, 0..6),
                prop::collection::btree_map((0..n_mem, 0..n_states), 0..n_actions, 0..6),
            )
                .prop_map(move |(start, update, act)| FiniteMemoryStrategy { player: 1, n_mem, start, update, act })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(s in strategy_strategy(4, 2)) {
            let text = serde_json::to_string(&s).unwrap();
            let back: FiniteMemoryStrategy = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert!(s.well_formed(&random_arena(4, 2, 2, 0).unwrap()));
        }
    }

    #[test]
    fn defaults_fill_missing_entries() {
        let s = FiniteMemoryStrategy::trivial(0, 3);
        assert_eq!(s.start_at(2), Some(0));
        assert_eq!(s.start_at(9), None);
        assert_eq!(s.next_memory(0, 1), 0);
        assert_eq!(s.action(0, 1), 0);
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["player"], 1);
    }

    #[test]
    fn ill_formed_strategies_are_caught() {
        let a = random_arena(3, 2, 2, 1).unwrap();
        let mut s = FiniteMemoryStrategy::trivial(0, 3);
        assert!(s.well_formed(&a));
        s.act.insert((0, 1), 5);
        assert!(!s.well_formed(&a));
        let mut t = FiniteMemoryStrategy::trivial(0, 4);
        assert!(!t.well_formed(&a));
        t.start.pop();
        t.player = 2;
        assert!(!t.well_formed(&a));
    }
}
