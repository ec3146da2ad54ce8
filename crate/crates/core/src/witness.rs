//! Doomsday witnesses: a main lasso plus one retaliation strategy per player, and an
//! independent checker that model-checks both DE conditions on the product of the
//! arena with each player's composed strategy.

use crate::arena::{Arena, Lasso, PlayPrefix};
use crate::de_perfect::DeDecision;
use crate::graph::Graph;
use crate::objectives::{ObjClass, Objective, Profile};
use crate::region::Region;
use crate::retaliation::{retaliation, RetaliationError};
use crate::strategy::FiniteMemoryStrategy;
use crate::zerosum::{attractor_in, coalition_lift, Side};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("no doomsday equilibrium to synthesize")]
    NoEquilibrium,
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error(transparent)]
    Retaliation(#[from] RetaliationError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoomsdayWitness {
    pub main: Lasso,
    /// Retaliation strategy of each player, entered at the first state after the play
    /// leaves `main`.
    pub retaliation: Vec<FiniteMemoryStrategy>,
}

impl DoomsdayWitness {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, WitnessError> {
        serde_json::from_str(text).map_err(|e| WitnessError::MalformedWitness(e.to_string()))
    }

    pub fn composed(&self, i: usize) -> ComposedStrategy<'_> {
        ComposedStrategy { main: &self.main, positions: self.main.positions(), ret: &self.retaliation[i] }
    }
}

/// Memory of a composed strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Following the main lasso at this position.
    Main(usize),
    /// Retaliating with this memory; `None` when the retaliation strategy is undefined
    /// at the deviation state (the player then plays action 0).
    Ret(Option<usize>),
}

/// Follow `main` while the play matches it, then retaliate for good.
pub struct ComposedStrategy<'a> {
    main: &'a Lasso,
    positions: Vec<(usize, usize)>,
    ret: &'a FiniteMemoryStrategy,
}

impl ComposedStrategy<'_> {
    pub fn initial(&self) -> Mode {
        Mode::Main(0)
    }

    pub fn action(&self, m: Mode, s: usize) -> usize {
        match m {
            Mode::Main(k) => self.positions[k].1,
            Mode::Ret(Some(r)) => self.ret.action(r, s),
            Mode::Ret(None) => 0,
        }
    }

    pub fn update(&self, m: Mode, entered: usize) -> Mode {
        match m {
            Mode::Main(k) => {
                let k2 = self.main.next_pos(k);
                if self.positions[k2].0 == entered {
                    Mode::Main(k2)
                } else {
                    Mode::Ret(self.ret.start_at(entered))
                }
            }
            Mode::Ret(Some(r)) => Mode::Ret(Some(self.ret.next_memory(r, entered))),
            Mode::Ret(None) => Mode::Ret(None),
        }
    }
}

pub fn synthesize_profile(a: &Arena, p: &Profile, d: &DeDecision) -> Result<DoomsdayWitness, WitnessError> {
    if !d.exists {
        return Err(WitnessError::NoEquilibrium);
    }
    let main = match (&d.witness_lasso, &d.witness_path) {
        (Some(l), _) => l.clone(),
        (None, Some(pp)) => reach_main_lasso(a, p, &pp.path),
        _ => return Err(WitnessError::MalformedWitness("decision carries no witness".into())),
    };
    let retaliation = (0..p.n_players())
        .map(|i| retaliation(a, p, i).map(|r| r.strategy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DoomsdayWitness { main, retaliation })
}

/// Extends a path ending in a pivot by letting every player run its attractor strategy
/// until its target is visited, and closes the lasso on a repeated (state, visited) pair.
pub fn reach_main_lasso(a: &Arena, p: &Profile, path: &PlayPrefix) -> Lasso {
    let n_pl = p.n_players();
    let ranks: Vec<Vec<usize>> = (0..n_pl)
        .map(|j| {
            let g = coalition_lift(a, &[j]);
            attractor_in(&g, &g.all(), p.target(j), Side::Protagonist).1
        })
        .collect();
    let bits = |s: usize| -> u32 { (0..n_pl).filter(|&j| p.target(j).contains(s)).map(|j| 1 << j).sum() };
    let mut mask: u32 = path.states.iter().map(|&s| bits(s)).fold(0, |x, y| x | y);
    let mut cur = path.last();
    let mut seen: HashMap<(usize, u32), usize> = HashMap::new();
    let mut sim = Vec::new();
    loop {
        if let Some(&k) = seen.get(&(cur, mask)) {
            let mut stem = path.states.clone();
            stem.extend_from_slice(&sim[1..=k]);
            let mut cycle = sim[k..].to_vec();
            cycle.push(sim[k]);
            return a.lasso_along(&stem, &cycle).expect("simulated play follows arena edges");
        }
        seen.insert((cur, mask), sim.len());
        sim.push(cur);
        let j = a.owner(cur);
        let action = if j < n_pl && mask & (1 << j) == 0 {
            let r = &ranks[j];
            a.moves(cur).find(|&(_, w)| r[w] < r[cur]).map(|(x, _)| x).unwrap_or(0)
        } else {
            0
        };
        cur = a.succ(cur, action);
        mask |= bits(cur);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    /// The player whose retaliation failed.
    #[serde(with = "crate::arena::one_based")]
    pub player: usize,
    /// A player who still wins on the counterexample.
    #[serde(with = "crate::arena::one_based")]
    pub winner: usize,
    pub lasso: Lasso,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub cond1: bool,
    pub cond2: Vec<bool>,
    pub counterexamples: Vec<Counterexample>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.cond1 && self.cond2.iter().all(|&b| b)
    }
}

fn validate(a: &Arena, p: &Profile, w: &DoomsdayWitness) -> Result<(), WitnessError> {
    let bad = |m: &str| Err(WitnessError::MalformedWitness(m.to_string()));
    if !a.check_lasso(&w.main) {
        return bad("main lasso is not a play of the arena from its initial state");
    }
    if w.retaliation.len() != p.n_players() {
        return bad("one retaliation strategy per player expected");
    }
    for (i, s) in w.retaliation.iter().enumerate() {
        if s.player != i || !s.well_formed(a) {
            return bad(&format!("retaliation strategy of player {} does not fit the arena", i + 1));
        }
    }
    Ok(())
}

/// Graph of all plays consistent with player `i`'s composed strategy.
struct StrategyProduct {
    graph: Graph,
    origin: Vec<usize>,
}

fn strategy_product(a: &Arena, w: &DoomsdayWitness, i: usize) -> StrategyProduct {
    let cs = w.composed(i);
    let mut ids: HashMap<(usize, Mode), usize> = HashMap::new();
    let mut verts: Vec<(usize, Mode)> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let start = (a.init(), cs.initial());
    ids.insert(start, 0);
    verts.push(start);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let (s, m) = verts[v];
        let moves: Vec<usize> = if a.owner(s) == i {
            vec![a.succ(s, cs.action(m, s))]
        } else {
            a.moves(s).map(|(_, t)| t).collect()
        };
        let mut out = Vec::new();
        for t in moves {
            let key = (t, cs.update(m, t));
            let id = *ids.entry(key).or_insert_with(|| {
                verts.push(key);
                queue.push_back(verts.len() - 1);
                verts.len() - 1
            });
            out.push(id);
        }
        if succ.len() <= v {
            succ.resize(v + 1, Vec::new());
        }
        succ[v] = out;
    }
    succ.resize(verts.len(), Vec::new());
    let n = verts.len();
    StrategyProduct { graph: Graph::new(Region::full(n), succ), origin: verts.iter().map(|&(s, _)| s).collect() }
}

/// Lasso from vertex `init` whose stem stays in `stem_keep` and whose cycle stays in
/// `cycle_keep` and meets every region of `must`.
fn find_lasso(
    g: &Graph,
    init: usize,
    stem_keep: &Region,
    cycle_keep: &Region,
    must: &[Region],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let sg = g.restrict(stem_keep);
    let reach = sg.reachable_from(init);
    let cg = sg.restrict(&reach.intersection(cycle_keep));
    for c in cg.sccs() {
        if !cg.is_nontrivial(&c) {
            continue;
        }
        let hits: Option<Vec<usize>> =
            must.iter().map(|m| c.iter().copied().find(|&v| m.contains(v))).collect();
        let Some(hits) = hits else { continue };
        let comp = Region::from_ids(g.universe(), c.iter().copied());
        let start = hits.first().copied().unwrap_or(c[0]);
        let stem = sg.bfs_path(init, &Region::from_ids(g.universe(), [start]), false)?;
        let cycle = cg.thread_cycle(&comp, start, hits.get(1..).unwrap_or(&[]));
        return Some((stem, cycle));
    }
    None
}

/// Product with a monotone flag; vertex `2v + f`.
fn flagged(g: &Graph, flag: &Region) -> (Graph, usize) {
    let n = g.universe();
    let mut succ = vec![Vec::new(); 2 * n];
    for v in g.vertices.iter() {
        for f in 0..2 {
            succ[2 * v + f] = g.succ[v].iter().map(|&w| 2 * w + (f | flag.contains(w) as usize)).collect();
        }
    }
    (Graph::new(Region::full(2 * n), succ), flag.contains(0) as usize)
}

/// Search for a play consistent with the product that violates `oi` and satisfies `oj`.
fn bad_lasso(sp: &StrategyProduct, oi: &Objective, oj: &Objective) -> Option<(Vec<usize>, Vec<usize>)> {
    let g = &sp.graph;
    let n = g.universe();
    let by_state = |r: &Region| Region::from_fn(n, |v| r.contains(sp.origin[v]));
    let all = Region::full(n);
    match (oi, oj) {
        (Objective::Buchi(ti), Objective::Buchi(tj)) => {
            find_lasso(g, 0, &all, &by_state(ti).complement(), &[by_state(tj)])
        }
        (Objective::CoBuchi(ti), Objective::CoBuchi(tj)) => {
            find_lasso(g, 0, &all, &by_state(tj), &[by_state(ti).complement()])
        }
        (Objective::Parity(pi), Objective::Parity(pj)) => {
            let mut odd: Vec<u32> = pi.iter().copied().filter(|x| x % 2 == 1).collect();
            let mut even: Vec<u32> = pj.iter().copied().filter(|x| x % 2 == 0).collect();
            odd.sort_unstable();
            odd.dedup();
            even.sort_unstable();
            even.dedup();
            for &x in &odd {
                for &y in &even {
                    let keep = Region::from_fn(n, |v| pi[sp.origin[v]] >= x && pj[sp.origin[v]] >= y);
                    let must = [
                        Region::from_fn(n, |v| pi[sp.origin[v]] == x),
                        Region::from_fn(n, |v| pj[sp.origin[v]] == y),
                    ];
                    if let Some(l) = find_lasso(g, 0, &all, &keep, &must) {
                        return Some(l);
                    }
                }
            }
            None
        }
        (Objective::Safety(ti), Objective::Safety(tj)) => {
            // Stay in T_j throughout, leave T_i at some point.
            let (fg, f0) = flagged(g, &by_state(ti).complement());
            let stay = Region::from_fn(2 * n, |x| tj.contains(sp.origin[x / 2]));
            let done = Region::from_fn(2 * n, |x| x % 2 == 1);
            find_lasso(&fg, f0, &stay, &stay.intersection(&done), &[]).map(unflag)
        }
        (Objective::Reach(ti), Objective::Reach(tj)) => {
            let (fg, f0) = flagged(g, &by_state(tj));
            let avoid = Region::from_fn(2 * n, |x| !ti.contains(sp.origin[x / 2]));
            let done = Region::from_fn(2 * n, |x| x % 2 == 1);
            find_lasso(&fg, f0, &avoid, &avoid.intersection(&done), &[]).map(unflag)
        }
        _ => unreachable!("uniform profile"),
    }
}

fn unflag((stem, cycle): (Vec<usize>, Vec<usize>)) -> (Vec<usize>, Vec<usize>) {
    (stem.into_iter().map(|x| x / 2).collect(), cycle.into_iter().map(|x| x / 2).collect())
}

/// Checks both DE conditions. Never consults retaliation regions: the composed
/// strategies are fixed in the arena and every consistent play is explored.
pub fn check_witness(a: &Arena, p: &Profile, w: &DoomsdayWitness) -> Result<WitnessReport, WitnessError> {
    validate(a, p, w)?;
    let cond1 = p.eval_all(&w.main).iter().all(|&b| b);
    let mut cond2 = Vec::with_capacity(p.n_players());
    let mut counterexamples = Vec::new();
    for i in 0..p.n_players() {
        let sp = strategy_product(a, w, i);
        let mut ok = true;
        for j in (0..p.n_players()).filter(|&j| j != i) {
            if let Some((stem, cycle)) = bad_lasso(&sp, p.objective(i), p.objective(j)) {
                let st: Vec<usize> = stem.iter().map(|&v| sp.origin[v]).collect();
                let cy: Vec<usize> = cycle.iter().map(|&v| sp.origin[v]).collect();
                let lasso = a.lasso_along(&st, &cy).expect("product paths follow arena edges");
                counterexamples.push(Counterexample { player: i, winner: j, lasso });
                ok = false;
                break;
            }
        }
        cond2.push(ok);
    }
    Ok(WitnessReport { cond1, cond2, counterexamples })
}

/// Whether the class admits strategy synthesis at this size.
pub fn synthesis_supported(a: &Arena, p: &Profile) -> bool {
    p.class() != ObjClass::Parity || a.n_states() <= crate::retaliation::DEFAULT_LAR_BOUND
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::a2;
    use crate::de_perfect::decide_de;
    use crate::oracle::random_instance;

    fn fixture(name: &str) -> String {
        std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
    }

    fn buchi_memory() -> (Arena, Profile) {
        let a = crate::arena::parse_arena(&fixture("buchi_memory_arena.json")).unwrap();
        let p = crate::objectives::parse_objectives(&fixture("buchi_memory_objectives.json"), &a).unwrap();
        (a, p)
    }

    #[test]
    fn synthesized_witness_round_trips_and_passes() {
        let (a, p) = buchi_memory();
        let w = synthesize_profile(&a, &p, &decide_de(&a, &p).unwrap()).unwrap();
        let back = DoomsdayWitness::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
        assert!(check_witness(&a, &p, &back).unwrap().passed());
    }

    #[test]
    fn sabotaged_witness_yields_a_counterexample() {
        let (a, p) = buchi_memory();
        let w = DoomsdayWitness::from_json(&fixture("buchi_memory_sabotaged_witness.json")).unwrap();
        let rep = check_witness(&a, &p, &w).unwrap();
        assert!(!rep.passed());
        let cx = &rep.counterexamples[0];
        assert!(a.check_lasso(&cx.lasso));
        assert!(!p.eval_all(&cx.lasso)[cx.player]);
        assert!(p.eval_all(&cx.lasso)[cx.winner]);
    }

    #[test]
    fn malformed_witnesses_are_rejected() {
        let a = a2();
        let p = Profile::targets(ObjClass::Buchi, vec![Region::full(2), Region::full(2)]);
        let w = synthesize_profile(&a, &p, &decide_de(&a, &p).unwrap()).unwrap();
        let mut short = w.clone();
        short.retaliation.pop();
        assert!(matches!(check_witness(&a, &p, &short), Err(WitnessError::MalformedWitness(_))));
        let mut off = w.clone();
        off.main.cycle.actions[0] = 1 - off.main.cycle.actions[0];
        assert!(matches!(check_witness(&a, &p, &off), Err(WitnessError::MalformedWitness(_))));
        assert!(DoomsdayWitness::from_json("{").is_err());
    }

    #[test]
    fn negative_decisions_cannot_be_synthesized() {
        let a = a2();
        let p = Profile::targets(ObjClass::CoBuchi, vec![Region::from_ids(2, [0]), Region::from_ids(2, [1])]);
        let d = decide_de(&a, &p).unwrap();
        assert_eq!(synthesize_profile(&a, &p, &d), Err(WitnessError::NoEquilibrium));
    }

    #[test]
    fn trivial_strategies_fail_where_retaliation_matters() {
        let (a, p) = buchi_memory();
        let mut w = synthesize_profile(&a, &p, &decide_de(&a, &p).unwrap()).unwrap();
        let mut failed = false;
        for i in 0..3 {
            for x in 0..a.n_actions() {
                let mut constant = FiniteMemoryStrategy::trivial(i, a.n_states());
                constant.act = (0..a.n_states()).map(|s| ((0, s), x)).collect();
                let keep = std::mem::replace(&mut w.retaliation[i], constant);
                failed |= !check_witness(&a, &p, &w).unwrap().passed();
                w.retaliation[i] = keep;
            }
        }
        assert!(failed);
    }

    #[test]
    fn random_positives_verify() {
        for class in ObjClass::ALL {
            for seed in 0..60 {
                let (a, p) = random_instance(class, 6, 3, 2, seed);
                let d = decide_de(&a, &p).unwrap();
                if d.exists && synthesis_supported(&a, &p) {
                    let w = synthesize_profile(&a, &p, &d).unwrap();
                    assert!(check_witness(&a, &p, &w).unwrap().passed(), "{class} seed {seed}");
                }
            }
        }
    }
}
