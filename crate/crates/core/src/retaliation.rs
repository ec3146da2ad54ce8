//! Retaliation regions `R_i`: states from which player `i` alone forces
//! "my objective holds, or every objective fails".

use crate::arena::Arena;
use crate::objectives::{ObjClass, Profile};
use crate::region::Region;
use crate::strategy::{FiniteMemoryStrategy, MemoryProduct};
use crate::zerosum::{
    attractor_avoiding, attractor_in, coalition_lift, extract_memoryless_strategy, safe_region, solve_parity_strategy,
    solve_vector_muller, streett_priorities, Certificate, Edge, Side,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RetaliationError {
    #[error("latest-appearance-record product exceeds its bound ({0} states)")]
    LarBoundExceeded(usize),
    #[error("{0} players exceed the bit-vector bound of {1}")]
    TooManyPlayers(usize, usize),
    #[error("expected a {expected} profile, got {got}")]
    WrongClass { expected: ObjClass, got: ObjClass },
}

/// Arena-state bound for the LAR path.
pub const DEFAULT_LAR_BOUND: usize = 10;
/// Cap on explored LAR product vertices.
pub const LAR_PRODUCT_CAP: usize = 400_000;
pub const DEFAULT_BIT_BOUND: usize = 12;

#[derive(Clone, Debug)]
pub struct RetaliationResult {
    pub region: Region,
    pub strategy: FiniteMemoryStrategy,
}

fn expect_class(p: &Profile, c: ObjClass) -> Result<(), RetaliationError> {
    if p.class() != c {
        return Err(RetaliationError::WrongClass { expected: c, got: p.class() });
    }
    Ok(())
}

/// Dispatches on the profile class.
pub fn retaliation(a: &Arena, p: &Profile, i: usize) -> Result<RetaliationResult, RetaliationError> {
    match p.class() {
        ObjClass::Safety => retaliation_safety(a, p, i),
        ObjClass::Reach => retaliation_reach(a, p, i),
        ObjClass::Buchi => retaliation_buchi(a, p, i),
        ObjClass::CoBuchi => retaliation_cobuchi(a, p, i),
        ObjClass::Parity => retaliation_parity(a, p, i),
    }
}

/// Region only. Parity instances beyond the LAR bound fall back to the Muller solver.
pub fn retaliation_region(a: &Arena, p: &Profile, i: usize) -> Result<Region, RetaliationError> {
    match retaliation(a, p, i) {
        Ok(r) => Ok(r.region),
        Err(RetaliationError::LarBoundExceeded(_)) => Ok(parity_region_muller(a, p, i)),
        Err(e) => Err(e),
    }
}

/// `Buchi(T_i) or CoBuchi(complement of every T_j)`, i.e. the Streett pair
/// (union of all T_j, T_i).
pub fn retaliation_buchi(a: &Arena, p: &Profile, i: usize) -> Result<RetaliationResult, RetaliationError> {
    expect_class(p, ObjClass::Buchi)?;
    let g = coalition_lift(a, &[i]);
    let n = a.n_states();
    let mut e = Region::empty(n);
    for j in 0..p.n_players() {
        e.union_with(p.target(j));
    }
    let f = p.target(i);
    let sol = solve_parity_strategy(&g, &streett_priorities(n, &e, f));
    let region = sol.protagonist.clone();
    let strat = extract_memoryless_strategy(&g, &region, Certificate::Streett1 { e: &e, f });
    Ok(RetaliationResult { strategy: memoryless_to_fm(a, i, &region, strat.choices()), region })
}

fn memoryless_to_fm(a: &Arena, i: usize, region: &Region, choice: &[Option<Edge>]) -> FiniteMemoryStrategy {
    let mut s = FiniteMemoryStrategy::trivial(i, a.n_states());
    for (v, c) in choice.iter().enumerate().take(a.n_states()) {
        if !region.contains(v) {
            s.start[v] = None;
        }
        if let Some(e) = *c {
            if e.action != 0 {
                s.act.insert((0, v), e.action);
            }
        }
    }
    s
}

/// `CoBuchi(T_i) or Buchi(complement of T_j) for every j`; the conjunction of Büchi
/// sets is degeneralised by a counter that waits for a visit outside `T_c`.
pub fn retaliation_cobuchi(a: &Arena, p: &Profile, i: usize) -> Result<RetaliationResult, RetaliationError> {
    expect_class(p, ObjClass::CoBuchi)?;
    let n = p.n_players();
    let upd = |&c: &usize, w: usize| -> usize {
        let c0 = if c == n { 0 } else { c };
        if p.target(c0).contains(w) {
            c0
        } else {
            c0 + 1
        }
    };
    let prod = MemoryProduct::build(a, i, (0..a.n_states()).map(|s| (s, 0usize)), upd, usize::MAX)
        .expect("uncapped product");
    let g = &prod.game;
    let nv = g.n_vertices();
    let e = Region::from_fn(nv, |v| !p.target(i).contains(g.origin[v]));
    let f = Region::from_fn(nv, |v| prod.mems[g.memory[v]] == n);
    let sol = solve_parity_strategy(g, &streett_priorities(nv, &e, &f));
    let region = prod.project(a.n_states(), &sol.protagonist, |_| 0);
    let strategy = prod.to_strategy(i, a.n_states(), &sol.protagonist, |v| sol.choice[v], |_| 0);
    Ok(RetaliationResult { region, strategy })
}

/// LAR memory: colours ordered by latest appearance, plus the hit position of the
/// last move (`None` before the first move).
type Lar = (Vec<u8>, Option<u8>);

/// Distinct priority vectors of the arena states and the colour of each state.
pub fn parity_colors(p: &Profile) -> (Vec<Vec<u32>>, Vec<usize>) {
    let n = p.n_states();
    let vec_of = |s: usize| (0..p.n_players()).map(|j| p.priority(j)[s]).collect::<Vec<u32>>();
    let mut colors: Vec<Vec<u32>> = (0..n).map(vec_of).collect();
    colors.sort();
    colors.dedup();
    let col = (0..n).map(|s| colors.binary_search(&vec_of(s)).unwrap()).collect();
    (colors, col)
}

/// Acceptance of an inf-set with componentwise minimum `m` for player `i`.
pub fn parity_retaliation_good(m: &[u32], i: usize) -> bool {
    m[i].is_multiple_of(2) || m.iter().all(|x| x % 2 == 1)
}

/// Muller condition `min p_i even, or every min p_j odd`, solved through the
/// latest appearance record.
pub fn retaliation_parity(a: &Arena, p: &Profile, i: usize) -> Result<RetaliationResult, RetaliationError> {
    retaliation_parity_bounded(a, p, i, DEFAULT_LAR_BOUND, LAR_PRODUCT_CAP)
}

pub fn retaliation_parity_bounded(
    a: &Arena,
    p: &Profile,
    i: usize,
    state_bound: usize,
    cap: usize,
) -> Result<RetaliationResult, RetaliationError> {
    expect_class(p, ObjClass::Parity)?;
    let n = a.n_states();
    if n > state_bound {
        return Err(RetaliationError::LarBoundExceeded(n));
    }
    let (colors, col) = parity_colors(p);
    let c = colors.len();
    let seed = |s: usize| -> Lar {
        let mut perm = vec![col[s] as u8];
        perm.extend((0..c as u8).filter(|&x| x as usize != col[s]));
        (perm, None)
    };
    let upd = |(perm, _): &Lar, w: usize| -> Lar {
        let cw = col[w] as u8;
        let h = perm.iter().position(|&x| x == cw).unwrap();
        let mut next = perm.clone();
        next.remove(h);
        next.insert(0, cw);
        (next, Some(h as u8))
    };
    let prod = MemoryProduct::build(a, i, (0..n).map(|s| (s, seed(s))), upd, cap)
        .map_err(|_| RetaliationError::LarBoundExceeded(n))?;
    let g = &prod.game;
    let prio: Vec<u32> = (0..g.n_vertices())
        .map(|v| {
            let (perm, hit) = &prod.mems[g.memory[v]];
            match hit {
                None => 2 * c as u32,
                Some(h) => {
                    let h = *h as usize;
                    let dim = p.n_players();
                    let m: Vec<u32> =
                        (0..dim).map(|j| perm[..=h].iter().map(|&x| colors[x as usize][j]).min().unwrap()).collect();
                    let bad = !parity_retaliation_good(&m, i);
                    2 * (c - 1 - h) as u32 + bad as u32
                }
            }
        })
        .collect();
    let sol = solve_parity_strategy(g, &prio);
    let region = prod.project(n, &sol.protagonist, seed);
    let strategy = prod.to_strategy(i, n, &sol.protagonist, |v| sol.choice[v], seed);
    Ok(RetaliationResult { region, strategy })
}

/// Same region as `retaliation_parity`, computed with the Zielonka-tree Muller solver
/// directly on the arena (no memory product, no strategy).
pub fn parity_region_muller(a: &Arena, p: &Profile, i: usize) -> Region {
    let g = coalition_lift(a, &[i]);
    let vecs: Vec<Vec<u32>> =
        (0..a.n_states()).map(|s| (0..p.n_players()).map(|j| p.priority(j)[s]).collect()).collect();
    solve_vector_muller(&g, &vecs, &|m| parity_retaliation_good(m, i)).0
}

/// `Reach(T_i) or avoid every T_j`: stay inside the states that are either in the
/// attractor of `T_i` or outside all targets; switch to attracting once inside it.
pub fn retaliation_reach(a: &Arena, p: &Profile, i: usize) -> Result<RetaliationResult, RetaliationError> {
    expect_class(p, ObjClass::Reach)?;
    let n = a.n_states();
    let g = coalition_lift(a, &[i]);
    let (attr, rank) = attractor_in(&g, &g.all(), p.target(i), Side::Protagonist);
    let mut u = Region::full(n);
    for j in 0..p.n_players() {
        u.subtract(p.target(j));
    }
    u.union_with(&attr);
    // Attractor states are absorbing: once there the protagonist switches to attracting.
    let region = attractor_avoiding(&g, &u.complement(), &attr, Side::Antagonist).complement();
    let mut strategy = FiniteMemoryStrategy::trivial(i, n);
    strategy.n_mem = 2;
    for s in 0..n {
        strategy.start[s] = region.contains(s).then_some(attr.contains(s) as usize);
        if attr.contains(s) {
            strategy.update.insert((0, s), 1);
        }
        if a.owner(s) != i {
            continue;
        }
        if region.contains(s) && !attr.contains(s) {
            if let Some((x, _)) = a.moves(s).find(|&(_, w)| region.contains(w)) {
                if x != 0 {
                    strategy.act.insert((0, s), x);
                }
            }
        }
        if attr.contains(s) && !p.target(i).contains(s) {
            if let Some((x, _)) = a.moves(s).find(|&(_, w)| rank[w] < rank[s]) {
                if x != 0 {
                    strategy.act.insert((1, s), x);
                }
            }
        }
    }
    Ok(RetaliationResult { region, strategy })
}

/// `Safe(T_i) or leave every T_j`, on the product with the set of players whose
/// safe set has been left.
pub fn retaliation_safety(a: &Arena, p: &Profile, i: usize) -> Result<RetaliationResult, RetaliationError> {
    retaliation_safety_bounded(a, p, i, DEFAULT_BIT_BOUND)
}

/// Bit `j` is set once the play has visited a state outside `T_j`.
pub fn unsafe_bits(p: &Profile, s: usize) -> u32 {
    (0..p.n_players()).filter(|&j| !p.target(j).contains(s)).map(|j| 1u32 << j).sum()
}

pub fn retaliation_safety_bounded(
    a: &Arena,
    p: &Profile,
    i: usize,
    bound: usize,
) -> Result<RetaliationResult, RetaliationError> {
    expect_class(p, ObjClass::Safety)?;
    let n_pl = p.n_players();
    if n_pl > bound {
        return Err(RetaliationError::TooManyPlayers(n_pl, bound));
    }
    let n = a.n_states();
    let full = (1u32 << n_pl) - 1;
    let seed = |s: usize| unsafe_bits(p, s);
    let upd = |&m: &u32, w: usize| m | unsafe_bits(p, w);
    let prod = MemoryProduct::build(a, i, (0..n).map(|s| (s, seed(s))), upd, usize::MAX).expect("uncapped product");
    let g = &prod.game;
    let nv = g.n_vertices();
    let bits = |v: usize| prod.mems[g.memory[v]];
    let goal = Region::from_fn(nv, |v| bits(v) == full);
    let (attr, rank) = attractor_in(g, &g.all(), &goal, Side::Protagonist);
    let mut keep = Region::from_fn(nv, |v| bits(v) & (1 << i) == 0);
    keep.union_with(&attr);
    let win = safe_region(g, &keep, Side::Protagonist);
    let choice = |v: usize| -> Option<Edge> {
        if goal.contains(v) {
            Some(g.edges(v)[0])
        } else if attr.contains(v) {
            g.edges(v).iter().copied().find(|e| rank[e.to] < rank[v])
        } else {
            g.edges(v).iter().copied().find(|e| win.contains(e.to))
        }
    };
    let region = prod.project(n, &win, seed);
    let strategy = prod.to_strategy(i, n, &win, choice, seed);
    Ok(RetaliationResult { region, strategy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{a2, parse_arena, random_arena};
    use crate::graph::Graph;
    use crate::objectives::{parse_objectives, random_profile, Objective};
    use crate::oracle::brute_region;
    use std::collections::HashMap;

    fn r(n: usize, ids: &[usize]) -> Region {
        Region::from_ids(n, ids.iter().copied())
    }

    fn region(a: &Arena, p: &Profile, i: usize) -> Vec<usize> {
        retaliation(a, p, i).unwrap().region.to_vec()
    }

    #[test]
    fn buchi_examples() {
        let a = a2();
        let all = Profile::targets(ObjClass::Buchi, vec![Region::full(2), r(2, &[])]);
        assert_eq!(region(&a, &all, 0), vec![0, 1]);
        let none = Profile::targets(ObjClass::Buchi, vec![r(2, &[]), r(2, &[])]);
        assert_eq!(region(&a, &none, 0), vec![0, 1]);
        let p = Profile::targets(ObjClass::Buchi, vec![r(2, &[1]), r(2, &[0])]);
        assert_eq!(region(&a, &p, 0), vec![0, 1]);
    }

    #[test]
    fn cobuchi_examples() {
        let a = a2();
        let all = Profile::targets(ObjClass::CoBuchi, vec![Region::full(2), r(2, &[])]);
        assert_eq!(region(&a, &all, 0), vec![0, 1]);
        let single = Arena::new(1, vec![0, 0], 0, a.actions().to_vec(), vec![1, 0, 0, 1]).unwrap();
        let p1 = Profile::targets(ObjClass::CoBuchi, vec![r(2, &[1])]);
        assert_eq!(region(&single, &p1, 0), vec![0, 1]);
        // from state 1 player 2 can stay in T_2 forever, outside T_1
        let p = Profile::targets(ObjClass::CoBuchi, vec![r(2, &[0]), r(2, &[1])]);
        assert_eq!(region(&a, &p, 0), vec![0]);
    }

    #[test]
    fn parity_examples() {
        let a = a2();
        let even = Profile::parity(vec![vec![0, 0], vec![1, 3]]);
        assert_eq!(region(&a, &even, 0), vec![0, 1]);
        let single = Arena::new(1, vec![0, 0], 0, a.actions().to_vec(), vec![1, 0, 0, 1]).unwrap();
        assert_eq!(region(&single, &Profile::parity(vec![vec![1, 2]]), 0), vec![0, 1]);
        // 3-state loop owned by player 2: min p_1 = 1 is odd, min p_2 = 0 is even
        let ring = Arena::new(2, vec![1, 1, 1], 0, vec!["x".into()], vec![1, 2, 0]).unwrap();
        let p = Profile::parity(vec![vec![1, 2, 2], vec![0, 1, 1]]);
        assert!(region(&ring, &p, 0).is_empty());
        assert_eq!(parity_region_muller(&ring, &p, 0).to_vec(), Vec::<usize>::new());
    }

    #[test]
    fn parity_bound_and_fallback() {
        let a = random_arena(12, 3, 2, 4).unwrap();
        let p = random_profile(ObjClass::Parity, 12, 3, 3, 4);
        assert_eq!(retaliation_parity(&a, &p, 0).unwrap_err(), RetaliationError::LarBoundExceeded(12));
        assert_eq!(retaliation_region(&a, &p, 0).unwrap(), parity_region_muller(&a, &p, 0));
    }

    #[test]
    fn reach_examples() {
        let a = a2();
        let own = Profile::targets(ObjClass::Reach, vec![r(2, &[0]), r(2, &[1])]);
        assert!(region(&a, &own, 0).contains(&0));
        let none = Profile::targets(ObjClass::Reach, vec![r(2, &[]), r(2, &[])]);
        assert_eq!(region(&a, &none, 0), vec![0, 1]);
        let p = Profile::targets(ObjClass::Reach, vec![r(2, &[1]), r(2, &[0])]);
        assert_eq!(region(&a, &p, 0), vec![0, 1]);
    }

    #[test]
    fn safety_examples() {
        let a = a2();
        let all = Profile::targets(ObjClass::Safety, vec![Region::full(2), r(2, &[])]);
        assert_eq!(region(&a, &all, 0), vec![0, 1]);
        // T_2 = S: the doomsday disjunct is impossible, so R_1 is player 1's safe region
        let p = Profile::targets(ObjClass::Safety, vec![r(2, &[0]), Region::full(2)]);
        let g = coalition_lift(&a, &[0]);
        assert_eq!(region(&a, &p, 0), safe_region(&g, &r(2, &[0]), Side::Protagonist).to_vec());
        let e = retaliation_safety_bounded(&a, &p, 0, 1).unwrap_err();
        assert_eq!(e, RetaliationError::TooManyPlayers(2, 1));
    }

    #[test]
    fn every_state_of_the_safety_example_can_punish() {
        let text = |f: &str| std::fs::read_to_string(format!("{}/fixtures/{f}", env!("CARGO_MANIFEST_DIR"))).unwrap();
        let a = parse_arena(&text("safe_ring_arena.json")).unwrap();
        let p = parse_objectives(&text("safe_ring_objectives.json"), &a).unwrap();
        for i in 0..3 {
            assert_eq!(region(&a, &p, i), (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn wrong_class_is_rejected() {
        let p = Profile::targets(ObjClass::Reach, vec![r(2, &[1]), r(2, &[0])]);
        assert!(matches!(retaliation_buchi(&a2(), &p, 0), Err(RetaliationError::WrongClass { .. })));
    }

    /// Product of the arena with player `i`'s strategy fixed, from every region state.
    fn fixed_strategy_graph(a: &Arena, i: usize, res: &RetaliationResult) -> (Graph, Vec<usize>) {
        let s = &res.strategy;
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut verts = Vec::new();
        for st in res.region.iter() {
            let key = (st, s.start_at(st).unwrap());
            ids.entry(key).or_insert_with(|| {
                verts.push(key);
                verts.len() - 1
            });
        }
        let mut succ = Vec::new();
        let mut k = 0;
        while k < verts.len() {
            let (st, m) = verts[k];
            let next: Vec<usize> = if a.owner(st) == i {
                vec![a.succ(st, s.action(m, st))]
            } else {
                a.moves(st).map(|(_, t)| t).collect()
            };
            let mut out = Vec::new();
            for t in next {
                let key = (t, s.next_memory(m, t));
                let id = *ids.entry(key).or_insert_with(|| {
                    verts.push(key);
                    verts.len() - 1
                });
                out.push(id);
            }
            succ.push(out);
            k += 1;
        }
        let n = verts.len();
        (Graph::new(Region::full(n), succ), verts.into_iter().map(|(s, _)| s).collect())
    }

    /// A cycle whose states violate `o_i` while satisfying `o_j`, for tail objectives.
    fn bad_cycle(g: &Graph, origin: &[usize], oi: &Objective, oj: &Objective) -> bool {
        let n = origin.len();
        let search = |keep: &dyn Fn(usize) -> bool, need_i: &dyn Fn(usize) -> bool, need_j: &dyn Fn(usize) -> bool| {
            let sub = g.restrict(&Region::from_fn(n, |v| keep(origin[v])));
            sub.sccs().iter().any(|c| {
                sub.is_nontrivial(c) && c.iter().any(|&v| need_i(origin[v])) && c.iter().any(|&v| need_j(origin[v]))
            })
        };
        match (oi, oj) {
            (Objective::Buchi(ti), Objective::Buchi(tj)) => search(&|s| !ti.contains(s), &|_| true, &|s| tj.contains(s)),
            (Objective::CoBuchi(ti), Objective::CoBuchi(tj)) => search(&|s| tj.contains(s), &|s| !ti.contains(s), &|_| true),
            (Objective::Parity(pi), Objective::Parity(pj)) => (1..8).step_by(2).any(|x| {
                (0..8).step_by(2).any(|y| search(&|s| pi[s] >= x && pj[s] >= y, &|s| pi[s] == x, &|s| pj[s] == y))
            }),
            _ => unreachable!(),
        }
    }

    #[test]
    fn tail_certificates_are_sound() {
        for class in [ObjClass::Buchi, ObjClass::CoBuchi, ObjClass::Parity] {
            for seed in 0..60 {
                let n = 2 + seed as usize % 4;
                let a = random_arena(n, 3, 2, seed).unwrap();
                let p = random_profile(class, n, 3, 3, seed + 100);
                for i in 0..3 {
                    let res = retaliation(&a, &p, i).unwrap();
                    let (g, origin) = fixed_strategy_graph(&a, i, &res);
                    for j in (0..3).filter(|&j| j != i) {
                        assert!(!bad_cycle(&g, &origin, p.objective(i), p.objective(j)), "{class} seed {seed} i {i} j {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn regions_match_the_oracle_and_tail_regions_are_closed() {
        for class in ObjClass::ALL {
            for seed in 0..80 {
                let n = 1 + seed as usize % if class == ObjClass::Parity { 4 } else { 5 };
                let players = 1 + seed as usize % 3;
                let a = random_arena(n, players, 2, seed).unwrap();
                let p = random_profile(class, n, players, 3, seed + 1);
                for i in 0..players {
                    let got = retaliation_region(&a, &p, i).unwrap();
                    assert_eq!(got, brute_region(&a, &p, i).unwrap(), "{class} seed {seed} player {i}");
                    // prefix-independent objectives only: for reach/safety the memory carries history
                    if !class.is_tail() {
                        continue;
                    }
                    for s in got.iter().filter(|&s| a.owner(s) != i) {
                        assert!(a.moves(s).all(|(_, t)| got.contains(t)), "{class} seed {seed}");
                    }
                }
            }
        }
    }

    #[test]
    fn buchi_regions_grow_with_the_target() {
        for seed in 0..80 {
            let a = random_arena(5, 2, 2, seed).unwrap();
            let p = random_profile(ObjClass::Buchi, 5, 2, 0, seed);
            let mut bigger = p.target(0).clone();
            bigger.insert(seed as usize % 5);
            let q = Profile::targets(ObjClass::Buchi, vec![bigger, p.target(1).clone()]);
            assert!(retaliation_region(&a, &p, 0).unwrap().is_subset(&retaliation_region(&a, &q, 0).unwrap()));
        }
    }

    #[test]
    fn muller_fallback_agrees_with_the_record_product() {
        for seed in 0..60 {
            let n = 2 + seed as usize % 5;
            let a = random_arena(n, 3, 2, seed).unwrap();
            let p = random_profile(ObjClass::Parity, n, 3, 3, seed);
            for i in 0..3 {
                assert_eq!(retaliation_parity(&a, &p, i).unwrap().region, parity_region_muller(&a, &p, i));
            }
        }
    }
}
