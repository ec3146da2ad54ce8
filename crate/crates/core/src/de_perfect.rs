//! Deciding doomsday equilibria under perfect information.
//!
//! A DE exists iff some play from the initial state satisfies every objective and stays
//! inside the intersection of the retaliation regions. Reachability needs the weaker
//! "pivot" form: a path inside the regions to a target state from which every player
//! can force its own target alone.

use crate::arena::{Arena, Lasso, PlayPrefix};
use crate::graph::Graph;
use crate::objectives::{ObjClass, Profile};
use crate::region::Region;
use crate::retaliation::{retaliation_region, RetaliationError};
use crate::zerosum::{attractor, coalition_lift, Side};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct PivotPath {
    pub path: PlayPrefix,
    pub pivot: usize,
    /// A player whose target contains the pivot.
    #[serde(with = "crate::arena::one_based")]
    pub player: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeDecision {
    pub exists: bool,
    pub witness_lasso: Option<Lasso>,
    pub witness_path: Option<PivotPath>,
    pub regions: Vec<Region>,
}

impl DeDecision {
    fn negative(regions: Vec<Region>) -> Self {
        DeDecision { exists: false, witness_lasso: None, witness_path: None, regions }
    }

    pub fn common_region(&self, n_states: usize) -> Region {
        intersect_all(n_states, &self.regions)
    }
}

fn intersect_all(n: usize, rs: &[Region]) -> Region {
    let mut out = Region::full(n);
    for r in rs {
        out.intersect_with(r);
    }
    out
}

pub fn decide_de(a: &Arena, p: &Profile) -> Result<DeDecision, RetaliationError> {
    Ok(decide_de_with_regions(a, p, retaliation_regions(a, p)?))
}

/// Second phase of [`decide_de`], given every player's retaliation region.
pub fn decide_de_with_regions(a: &Arena, p: &Profile, regions: Vec<Region>) -> DeDecision {
    assert_eq!(regions.len(), p.n_players());
    match p.class() {
        ObjClass::Safety => safety_given(a, p, regions),
        ObjClass::Reach => reach_given(a, p, regions),
        _ => tail_given(a, p, regions),
    }
}

pub fn retaliation_regions(a: &Arena, p: &Profile) -> Result<Vec<Region>, RetaliationError> {
    (0..p.n_players()).map(|i| retaliation_region(a, p, i)).collect()
}

/// Lasso that enters `comp` at `start` by a shortest path in `g` and then walks the
/// closed walk `cycle`.
fn lasso_into(a: &Arena, g: &Graph, start: usize, cycle: &[usize]) -> Lasso {
    let stem = g
        .bfs_path(a.init(), &Region::from_ids(a.n_states(), [start]), false)
        .expect("component reachable from init");
    a.lasso_along(&stem, cycle).expect("walk follows arena edges")
}

pub fn decide_de_tail(a: &Arena, p: &Profile) -> Result<DeDecision, RetaliationError> {
    assert!(p.class().is_tail(), "tail class expected");
    Ok(tail_given(a, p, retaliation_regions(a, p)?))
}

fn tail_given(a: &Arena, p: &Profile, regions: Vec<Region>) -> DeDecision {
    let n = a.n_states();
    let inter = intersect_all(n, &regions);
    if !inter.contains(a.init()) {
        return DeDecision::negative(regions);
    }
    let g = a.restrict_graph(&inter);
    let reach = g.reachable_from(a.init());
    let lasso = match p.class() {
        ObjClass::Buchi => {
            let sub = g.restrict(&reach);
            let mut comps: Vec<Vec<usize>> = sub
                .sccs()
                .into_iter()
                .filter(|c| sub.is_nontrivial(c))
                .filter(|c| (0..p.n_players()).all(|i| c.iter().any(|&s| p.target(i).contains(s))))
                .collect();
            comps.sort();
            comps.first().map(|c| {
                let comp = Region::from_ids(n, c.iter().copied());
                let hits: Vec<usize> = (0..p.n_players())
                    .map(|i| comp.intersection(p.target(i)).first().unwrap())
                    .collect();
                let start = hits[0];
                let cycle = g.thread_cycle(&comp, start, &hits[1..]);
                lasso_into(a, &g, start, &cycle)
            })
        }
        ObjClass::CoBuchi => {
            let mut keep = reach.clone();
            for i in 0..p.n_players() {
                keep.intersect_with(p.target(i));
            }
            let sub = g.restrict(&keep);
            let mut comps: Vec<Vec<usize>> = sub.sccs().into_iter().filter(|c| sub.is_nontrivial(c)).collect();
            comps.sort();
            comps.first().map(|c| {
                let comp = Region::from_ids(n, c.iter().copied());
                let cycle = g.thread_cycle(&comp, c[0], &[]);
                lasso_into(a, &g, c[0], &cycle)
            })
        }
        ObjClass::Parity => good_parity_component(&g, p, &reach).map(|c| {
            let comp = Region::from_ids(n, c.iter().copied());
            let cycle = g.thread_cycle(&comp, c[0], &c[1..]);
            lasso_into(a, &g, c[0], &cycle)
        }),
        _ => unreachable!(),
    };
    DeDecision { exists: lasso.is_some(), witness_lasso: lasso, witness_path: None, regions }
}

/// A strongly connected set inside `within` on which every priority function has an
/// even minimum. Bad components lose the states carrying the odd minimum of the first
/// violated function and are searched again.
pub fn good_parity_component(g: &Graph, p: &Profile, within: &Region) -> Option<Vec<usize>> {
    let sub = g.restrict(within);
    let mut comps: Vec<Vec<usize>> = sub.sccs().into_iter().filter(|c| sub.is_nontrivial(c)).collect();
    comps.sort();
    for c in comps {
        let bad = (0..p.n_players()).find_map(|i| {
            let m = c.iter().map(|&s| p.priority(i)[s]).min().unwrap();
            (m % 2 == 1).then_some((i, m))
        });
        match bad {
            None => return Some(c),
            Some((i, m)) => {
                let rest = Region::from_ids(g.universe(), c.iter().copied().filter(|&s| p.priority(i)[s] != m));
                if let Some(found) = good_parity_component(g, p, &rest) {
                    return Some(found);
                }
            }
        }
    }
    None
}

/// `s` lies in every player's attractor to its own target.
pub fn check_pivot(a: &Arena, p: &Profile, s: usize) -> bool {
    pivot_region(a, p).contains(s)
}

fn pivot_region(a: &Arena, p: &Profile) -> Region {
    let mut out = a.all_states();
    for j in 0..p.n_players() {
        out.intersect_with(&attractor(&coalition_lift(a, &[j]), p.target(j), Side::Protagonist));
    }
    out
}

pub fn decide_de_reach(a: &Arena, p: &Profile) -> Result<DeDecision, RetaliationError> {
    assert_eq!(p.class(), ObjClass::Reach);
    Ok(reach_given(a, p, retaliation_regions(a, p)?))
}

fn reach_given(a: &Arena, p: &Profile, regions: Vec<Region>) -> DeDecision {
    let n = a.n_states();
    let inter = intersect_all(n, &regions);
    let mut any_target = Region::empty(n);
    for j in 0..p.n_players() {
        any_target.union_with(p.target(j));
    }
    let pivots = pivot_region(a, p).intersection(&any_target);
    let g = a.restrict_graph(&inter);
    // Target states inside every region are pivots, so the first target met on a
    // shortest path is one.
    let found = g.bfs_path(a.init(), &pivots, false);
    match found {
        None => DeDecision::negative(regions),
        Some(states) => {
            let pivot = *states.last().unwrap();
            let player = (0..p.n_players()).find(|&j| p.target(j).contains(pivot)).unwrap();
            let path = a.prefix_along(&states).expect("path follows arena edges");
            DeDecision { exists: true, witness_lasso: None, witness_path: Some(PivotPath { path, pivot, player }), regions }
        }
    }
}

pub fn decide_de_safety(a: &Arena, p: &Profile) -> Result<DeDecision, RetaliationError> {
    assert_eq!(p.class(), ObjClass::Safety);
    Ok(safety_given(a, p, retaliation_regions(a, p)?))
}

fn safety_given(a: &Arena, p: &Profile, regions: Vec<Region>) -> DeDecision {
    let n = a.n_states();
    let mut good = intersect_all(n, &regions);
    for j in 0..p.n_players() {
        good.intersect_with(p.target(j));
    }
    if !good.contains(a.init()) {
        return DeDecision::negative(regions);
    }
    let g = a.restrict_graph(&good);
    let mut comps = g.reachable_cyclic_sccs(a.init());
    comps.sort();
    let lasso = comps.first().map(|c| {
        let comp = Region::from_ids(n, c.iter().copied());
        let cycle = g.thread_cycle(&comp, c[0], &[]);
        lasso_into(a, &g, c[0], &cycle)
    });
    DeDecision { exists: lasso.is_some(), witness_lasso: lasso, witness_path: None, regions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{a2, random_arena};
    use crate::objectives::random_profile;
    use crate::oracle::{brute_de, random_instance};

    fn r(ids: &[usize]) -> Region {
        Region::from_ids(2, ids.iter().copied())
    }

    #[test]
    fn a2_examples() {
        let a = a2();
        let buchi = Profile::targets(ObjClass::Buchi, vec![r(&[1]), r(&[0])]);
        let d = decide_de(&a, &buchi).unwrap();
        assert!(d.exists);
        assert!(buchi.eval_all(d.witness_lasso.as_ref().unwrap()).iter().all(|&b| b));

        // nobody can keep the play in both targets
        let disjoint = Profile::targets(ObjClass::CoBuchi, vec![r(&[0]), r(&[1])]);
        assert!(!decide_de(&a, &disjoint).unwrap().exists);

        let reach = Profile::targets(ObjClass::Reach, vec![r(&[1]), r(&[0])]);
        let d = decide_de(&a, &reach).unwrap();
        let pp = d.witness_path.unwrap();
        assert_eq!(pp.path.states, vec![0]);
        assert!(reach.target(pp.player).contains(pp.pivot));
    }

    #[test]
    fn empty_targets_have_no_equilibrium() {
        let a = a2();
        for class in [ObjClass::Buchi, ObjClass::Reach] {
            let p = Profile::targets(class, vec![r(&[]), r(&[0, 1])]);
            assert!(!decide_de(&a, &p).unwrap().exists, "{class}");
        }
    }

    #[test]
    fn parity_component_search_refines() {
        // one 3-cycle: player 1 sees 1,2,2 (odd min) unless state 0 is dropped, which breaks the cycle
        let ring = Arena::new(1, vec![0, 0, 0], 0, vec!["x".into()], vec![1, 2, 0]).unwrap();
        let p = Profile::parity(vec![vec![1, 2, 2]]);
        assert_eq!(good_parity_component(&ring.graph(), &p, &ring.all_states()), None);
        let q = Profile::parity(vec![vec![2, 3, 4]]);
        assert_eq!(good_parity_component(&ring.graph(), &q, &ring.all_states()), Some(vec![0, 1, 2]));
    }

    #[test]
    fn positive_decisions_carry_valid_witnesses() {
        for class in ObjClass::ALL {
            for seed in 0..100 {
                let (a, p) = random_instance(class, 6, 3, 2, seed);
                let d = decide_de(&a, &p).unwrap();
                let common = d.common_region(a.n_states());
                if !d.exists {
                    continue;
                }
                match class {
                    ObjClass::Reach => {
                        let pp = d.witness_path.as_ref().unwrap();
                        assert!(a.check_prefix(&pp.path));
                        assert!(check_pivot(&a, &p, pp.pivot));
                        assert!(pp.path.states.iter().all(|&s| common.contains(s)));
                    }
                    _ => {
                        let l = d.witness_lasso.as_ref().unwrap();
                        assert!(a.check_lasso(l));
                        assert!(p.eval_all(l).iter().all(|&b| b), "{class} seed {seed}");
                        let states = l.stem.states.iter().chain(&l.cycle.states);
                        assert!(states.clone().all(|&s| common.contains(s)));
                    }
                }
            }
        }
    }

    #[test]
    fn agrees_with_brute_force() {
        for class in ObjClass::ALL {
            let max = if class == ObjClass::Parity { 4 } else { 5 };
            for seed in 0..60 {
                let (a, p) = random_instance(class, max, 3, 2, seed + 7);
                assert_eq!(decide_de(&a, &p).unwrap().exists, brute_de(&a, &p).unwrap(), "{class} seed {seed}");
            }
        }
    }

    #[test]
    fn single_player_reduces_to_one_player_games() {
        // with one player, a DE is a play satisfying the objective from init
        for seed in 0..50 {
            let a = random_arena(5, 1, 2, seed).unwrap();
            let p = random_profile(ObjClass::Buchi, 5, 1, 0, seed);
            let g = a.graph();
            let reach = g.reachable_from(a.init());
            let sub = g.restrict(&reach);
            let expect = sub.sccs().iter().any(|c| sub.is_nontrivial(c) && c.iter().any(|&s| p.target(0).contains(s)));
            assert_eq!(decide_de(&a, &p).unwrap().exists, expect);
        }
    }
}
