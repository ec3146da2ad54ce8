//! Brute-force reference procedures for differential testing, plus generators for the
//! hardness reductions (see [`reductions`]).
//!
//! Everything here works on explicit subsets of arena states encoded as `u64` masks,
//! so arenas are limited to small sizes. Soundness of each enumeration:
//!
//! * tail classes: the retaliation objective is a Muller condition on inf-sets. When the
//!   losing family is union-closed the protagonist has memoryless winning strategies and
//!   they are enumerated; when the winning family is union-closed the antagonist is
//!   memoryless and its strategies are enumerated instead; otherwise McNaughton's
//!   recursion over the explicit family of state sets decides the game.
//! * safety and reachability: objectives depend only on the set of visited states, so the
//!   game is solved exactly by backward induction over (state, visited set) histories.

pub mod reductions;

use crate::arena::{random_arena, Arena};
use crate::objectives::{random_profile, ObjClass, Objective, Profile};
use crate::region::Region;
use crate::zerosum::{attractor_in, coalition_lift, Side, TwoPlayerGame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance with {states} states exceeds the oracle bound of {bound}")]
    TooLarge { states: usize, bound: usize },
    #[error("secure equilibria are defined for two players, got {0}")]
    NotTwoPlayer(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("bad targets: {0}")]
    BadTargets(String),
}

pub const DEFAULT_MAX_STATES: usize = 6;
pub const DEFAULT_MAX_PARITY_STATES: usize = 4;
pub const MAX_STATES_ENV: &str = "DOOMSDAY_ORACLE_MAX_STATES";

/// State bound for the given class; the environment variable overrides both defaults.
pub fn max_states(class: ObjClass) -> usize {
    if let Some(v) = std::env::var(MAX_STATES_ENV).ok().and_then(|s| s.parse().ok()) {
        return v;
    }
    match class {
        ObjClass::Parity => DEFAULT_MAX_PARITY_STATES,
        _ => DEFAULT_MAX_STATES,
    }
}

fn check_size(a: &Arena, class: ObjClass) -> Result<(), OracleError> {
    let bound = max_states(class).min(16);
    if a.n_states() > bound {
        return Err(OracleError::TooLarge { states: a.n_states(), bound });
    }
    Ok(())
}

fn mask_region(n: usize, m: u64) -> Region {
    Region::from_fn(n, |s| m >> s & 1 == 1)
}

fn bit(s: usize) -> u64 {
    1u64 << s
}

/// Distinct successors of every state.
fn successors(a: &Arena) -> Vec<Vec<usize>> {
    (0..a.n_states())
        .map(|s| {
            let mut v: Vec<usize> = a.moves(s).map(|(_, t)| t).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect()
}

fn reach_mask(succ: &[Vec<usize>], start: usize, allowed: u64) -> u64 {
    if allowed & bit(start) == 0 {
        return 0;
    }
    let mut seen = bit(start);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &succ[v] {
            if allowed & bit(w) != 0 && seen & bit(w) == 0 {
                seen |= bit(w);
                stack.push(w);
            }
        }
    }
    seen
}

/// `set` induces a strongly connected subgraph carrying a cycle.
fn is_loop(succ: &[Vec<usize>], set: u64) -> bool {
    if set == 0 {
        return false;
    }
    let v = set.trailing_zeros() as usize;
    if set.count_ones() == 1 {
        return succ[v].contains(&v);
    }
    if reach_mask(succ, v, set) != set {
        return false;
    }
    // Backward closure inside `set`.
    let mut seen = bit(v);
    let mut changed = true;
    while changed {
        changed = false;
        for (u, out) in succ.iter().enumerate() {
            if set & bit(u) != 0 && seen & bit(u) == 0 && out.iter().any(|&w| seen & bit(w) != 0) {
                seen |= bit(u);
                changed = true;
            }
        }
    }
    seen == set
}

/// Inf-sets of plays from `start` in the graph `succ` staying inside `allowed`.
fn realizable_inf_sets(succ: &[Vec<usize>], start: usize, allowed: u64) -> Vec<u64> {
    let reach = reach_mask(succ, start, allowed);
    let mut out = Vec::new();
    let mut sub = reach;
    while sub != 0 {
        if is_loop(succ, sub) {
            out.push(sub);
        }
        sub = (sub - 1) & reach;
    }
    out
}

/// All ways to fix one successor at each state of `owned`.
fn for_each_restriction(succ: &[Vec<usize>], owned: &[bool], mut f: impl FnMut(&[Vec<usize>]) -> bool) {
    let n = succ.len();
    let mut idx = vec![0usize; n];
    let mut cur: Vec<Vec<usize>> =
        (0..n).map(|s| if owned[s] { vec![succ[s][0]] } else { succ[s].clone() }).collect();
    loop {
        if !f(&cur) {
            return;
        }
        let mut s = 0;
        loop {
            if s == n {
                return;
            }
            if owned[s] && idx[s] + 1 < succ[s].len() {
                idx[s] += 1;
                cur[s] = vec![succ[s][idx[s]]];
                break;
            }
            if owned[s] {
                idx[s] = 0;
                cur[s] = vec![succ[s][0]];
            }
            s += 1;
        }
    }
}

fn union_closed(table: &[bool], n: usize) -> bool {
    let full = 1u64 << n;
    for x in 1..full {
        if !table[x as usize] {
            continue;
        }
        for y in (x + 1)..full {
            if table[y as usize] && !table[(x | y) as usize] {
                return false;
            }
        }
    }
    true
}

/// Winning region of player `i` for a Muller objective given as a table over inf-set masks.
fn tail_region(a: &Arena, i: usize, good: &[bool]) -> Region {
    let n = a.n_states();
    let succ = successors(a);
    let owned: Vec<bool> = (0..n).map(|s| a.owner(s) == i).collect();
    let others: Vec<bool> = owned.iter().map(|&b| !b).collect();
    let all = (1u64 << n) - 1;
    let bad: Vec<bool> = good.iter().map(|&g| !g).collect();
    let mut win = 0u64;
    if union_closed(&bad, n) {
        for_each_restriction(&succ, &owned, |g| {
            for s in 0..n {
                if win & bit(s) == 0 && realizable_inf_sets(g, s, all).iter().all(|&l| good[l as usize]) {
                    win |= bit(s);
                }
            }
            win != all
        });
    } else if union_closed(good, n) {
        win = all;
        for_each_restriction(&succ, &others, |g| {
            for s in 0..n {
                if win & bit(s) != 0 && !realizable_inf_sets(g, s, all).iter().any(|&l| good[l as usize]) {
                    win &= !bit(s);
                }
            }
            win != 0
        });
    } else {
        let g = coalition_lift(a, &[i]);
        return mcnaughton(&g, &g.all(), &|r: &Region| {
            good[r.iter().map(bit).fold(0, |x, y| x | y) as usize]
        })[0]
            .clone();
    }
    mask_region(n, win)
}

/// McNaughton's recursion for a Muller game whose family is given as a predicate on
/// vertex sets (protagonist wins iff the inf-set satisfies `good`).
pub fn mcnaughton(g: &TwoPlayerGame, within: &Region, good: &dyn Fn(&Region) -> bool) -> [Region; 2] {
    let n = g.n_vertices();
    if within.is_empty() {
        return [Region::empty(n), Region::empty(n)];
    }
    let sigma = if good(within) { Side::Protagonist } else { Side::Antagonist };
    let (si, oi) = if sigma == Side::Protagonist { (0, 1) } else { (1, 0) };
    let mut cur = within.clone();
    let mut lost = Region::empty(n);
    'outer: while !cur.is_empty() {
        for c in cur.iter().collect::<Vec<_>>() {
            let (a, _) = attractor_in(g, &cur, &Region::from_ids(n, [c]), sigma);
            let rest = cur.difference(&a);
            let w = mcnaughton(g, &rest, good);
            if !w[oi].is_empty() {
                let (b, _) = attractor_in(g, &cur, &w[oi], sigma.opponent());
                lost.union_with(&b);
                cur.subtract(&b);
                continue 'outer;
            }
        }
        break;
    }
    let mut out = [Region::empty(n), Region::empty(n)];
    out[si] = cur;
    out[oi] = lost;
    out
}

/// Value table of a game whose objective depends on the final visited set: `win[(s, vis)]`
/// for every history vertex with `s` in `vis`. Supersets are solved before subsets.
fn visit_game(a: &Arena, i: usize, good: &dyn Fn(u64) -> bool) -> HashMap<(usize, u64), bool> {
    let n = a.n_states();
    let succ = successors(a);
    let mut masks: Vec<u64> = (1..(1u64 << n)).collect();
    masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    let mut val: HashMap<(usize, u64), bool> = HashMap::new();
    for vis in masks {
        let layer: Vec<usize> = (0..n).filter(|&s| vis & bit(s) != 0).collect();
        let exit_ok = |w: usize, val: &HashMap<(usize, u64), bool>| val[&(w, vis | bit(w))];
        let stay = good(vis);
        // Greatest fixpoint (stay is good) or least fixpoint (must leave for a good exit).
        let mut x: u64 = if stay { vis } else { 0 };
        loop {
            let ok = |w: usize, x: u64| if vis & bit(w) != 0 { x & bit(w) != 0 } else { exit_ok(w, &val) };
            let mut next = 0u64;
            for &v in &layer {
                let mine = a.owner(v) == i;
                let keep = if mine { succ[v].iter().any(|&w| ok(w, x)) } else { succ[v].iter().all(|&w| ok(w, x)) };
                if keep {
                    next |= bit(v);
                }
            }
            if next == x {
                break;
            }
            x = next;
        }
        for &v in &layer {
            val.insert((v, vis), x & bit(v) != 0);
        }
    }
    val
}

/// Retaliation goodness of player `i` on a play with these visited / inf sets.
fn retaliation_good(p: &Profile, i: usize, visit: &Region, inf: &Region) -> bool {
    p.objective(i).holds(visit, inf) || p.objectives().iter().all(|o| !o.holds(visit, inf))
}

/// Two-player secure form: win, or the other player loses.
fn secure_good(p: &Profile, i: usize, visit: &Region, inf: &Region) -> bool {
    p.objective(i).holds(visit, inf) || !p.objective(1 - i).holds(visit, inf)
}

type Goodness = dyn Fn(&Profile, usize, &Region, &Region) -> bool;

fn region_with(a: &Arena, p: &Profile, i: usize, g: &Goodness) -> Region {
    let n = a.n_states();
    if p.class().is_tail() {
        let table: Vec<bool> = (0..(1u64 << n))
            .map(|m| {
                let r = mask_region(n, m);
                m != 0 && g(p, i, &r, &r)
            })
            .collect();
        tail_region(a, i, &table)
    } else {
        let val = visit_game(a, i, &|vis| {
            let r = mask_region(n, vis);
            g(p, i, &r, &r)
        });
        Region::from_fn(n, |s| val[&(s, bit(s))])
    }
}

/// Brute-force retaliation region of player `i`.
pub fn brute_region(a: &Arena, p: &Profile, i: usize) -> Result<Region, OracleError> {
    check_size(a, p.class())?;
    Ok(region_with(a, p, i, &retaliation_good))
}

/// Brute-force DE existence.
pub fn brute_de(a: &Arena, p: &Profile) -> Result<bool, OracleError> {
    check_size(a, p.class())?;
    Ok(de_with(a, p, &retaliation_good))
}

/// Existence of a secure equilibrium in which both players win.
pub fn brute_secure_eq_2p(a: &Arena, p: &Profile) -> Result<bool, OracleError> {
    if p.n_players() != 2 {
        return Err(OracleError::NotTwoPlayer(p.n_players()));
    }
    check_size(a, p.class())?;
    Ok(de_with(a, p, &secure_good))
}

fn de_with(a: &Arena, p: &Profile, g: &Goodness) -> bool {
    let n = a.n_states();
    let succ = successors(a);
    if p.class().is_tail() {
        let mut inter = (1u64 << n) - 1;
        for i in 0..p.n_players() {
            let r = region_with(a, p, i, g);
            inter &= r.iter().map(bit).fold(0, |x, y| x | y);
        }
        return realizable_inf_sets(&succ, a.init(), inter).into_iter().any(|l| {
            let r = mask_region(n, l);
            p.all_hold(&r, &r)
        });
    }
    // History vertices (state, visited set) from which every player can retaliate.
    let vals: Vec<HashMap<(usize, u64), bool>> = (0..p.n_players())
        .map(|i| {
            visit_game(a, i, &|vis| {
                let r = mask_region(n, vis);
                g(p, i, &r, &r)
            })
        })
        .collect();
    let safe = |key: &(usize, u64)| vals.iter().all(|v| v[key]);
    visit_lasso_exists(&succ, a.init(), &safe, &|vis| {
        let r = mask_region(n, vis);
        p.all_hold(&r, &r)
    })
}

/// Some play from `init` stays on allowed history vertices and its final visited set
/// satisfies `accept`.
fn visit_lasso_exists(
    succ: &[Vec<usize>],
    init: usize,
    allowed: &dyn Fn(&(usize, u64)) -> bool,
    accept: &dyn Fn(u64) -> bool,
) -> bool {
    let start = (init, bit(init));
    if !allowed(&start) {
        return false;
    }
    let mut seen = vec![start];
    let mut idx: HashMap<(usize, u64), usize> = HashMap::from([(start, 0)]);
    let mut k = 0;
    while k < seen.len() {
        let (v, vis) = seen[k];
        for &w in &succ[v] {
            let key = (w, vis | bit(w));
            if allowed(&key) && !idx.contains_key(&key) {
                idx.insert(key, seen.len());
                seen.push(key);
            }
        }
        k += 1;
    }
    let mut layers: HashMap<u64, u64> = HashMap::new();
    for &(v, vis) in &seen {
        *layers.entry(vis).or_default() |= bit(v);
    }
    layers.into_iter().any(|(vis, members)| {
        if !accept(vis) {
            return false;
        }
        // Peel vertices without a successor inside the layer; a cycle survives.
        let mut live = members;
        loop {
            let next = (0..succ.len())
                .filter(|&v| live & bit(v) != 0 && succ[v].iter().any(|&w| live & bit(w) != 0))
                .fold(0u64, |x, v| x | bit(v));
            if next == live {
                return live != 0;
            }
            live = next;
        }
    })
}

/// Per-player map from states to observation block ids; `None` means perfect information.
pub type BlockMap = Vec<Vec<usize>>;

/// Whether some profile of memoryless strategies (constant on observation blocks when
/// `obs` is given) is a doomsday equilibrium.
pub fn memoryless_de_exists(a: &Arena, p: &Profile, obs: Option<&BlockMap>) -> Result<bool, OracleError> {
    // Profiles are counted below; each check is cheap, so only the mask width limits size.
    if a.n_states() > 16 {
        return Err(OracleError::TooLarge { states: a.n_states(), bound: 16 });
    }
    let n = a.n_states();
    let n_pl = p.n_players();
    // Choice variables: one per (player, block) that contains a state of that player.
    let block = |j: usize, s: usize| obs.map_or(s, |o| o[j][s]);
    let mut vars: Vec<(usize, usize)> = Vec::new();
    for s in 0..n {
        let key = (a.owner(s), block(a.owner(s), s));
        if !vars.contains(&key) {
            vars.push(key);
        }
    }
    let k = a.n_actions();
    let total = (k as u128).checked_pow(vars.len() as u32).unwrap_or(u128::MAX);
    if total > 1 << 22 {
        return Err(OracleError::Unsupported(format!("{total} memoryless profiles")));
    }
    let var_of: Vec<usize> =
        (0..n).map(|s| vars.iter().position(|&v| v == (a.owner(s), block(a.owner(s), s))).unwrap()).collect();
    let full = (0..n).map(|s| a.moves(s).map(|(_, t)| t).collect::<Vec<_>>()).collect::<Vec<_>>();
    let mut choice = vec![0usize; vars.len()];
    loop {
        let fixed: Vec<usize> = (0..n).map(|s| a.succ(s, choice[var_of[s]])).collect();
        if profile_is_de(a, p, n_pl, &fixed, &full) {
            return Ok(true);
        }
        let mut x = 0;
        loop {
            if x == vars.len() {
                return Ok(false);
            }
            choice[x] += 1;
            if choice[x] < k {
                break;
            }
            choice[x] = 0;
            x += 1;
        }
    }
}

fn profile_is_de(a: &Arena, p: &Profile, n_pl: usize, fixed: &[usize], full: &[Vec<usize>]) -> bool {
    let n = a.n_states();
    // Outcome of the profile.
    let mut order = vec![usize::MAX; n];
    let mut cur = a.init();
    let mut seq = Vec::new();
    while order[cur] == usize::MAX {
        order[cur] = seq.len();
        seq.push(cur);
        cur = fixed[cur];
    }
    let visit = Region::from_ids(n, seq.iter().copied());
    let inf = Region::from_ids(n, seq[order[cur]..].iter().copied());
    if !p.all_hold(&visit, &inf) {
        return false;
    }
    (0..n_pl).all(|i| {
        let succ: Vec<Vec<usize>> =
            (0..n).map(|s| if a.owner(s) == i { vec![fixed[s]] } else { full[s].clone() }).collect();
        let bad = |vis: &Region, inf: &Region| {
            !p.objective(i).holds(vis, inf) && (0..n_pl).any(|j| j != i && p.objective(j).holds(vis, inf))
        };
        if p.class().is_tail() {
            !realizable_inf_sets(&succ, a.init(), (1u64 << n) - 1).into_iter().any(|l| {
                let r = mask_region(n, l);
                bad(&r, &r)
            })
        } else {
            !visit_lasso_exists(&succ, a.init(), &|_| true, &|vis| {
                let r = mask_region(n, vis);
                bad(&r, &r)
            })
        }
    })
}

/// Realizable inf-sets of the arena graph from `start` (test helper for tail objectives).
pub fn inf_sets_from(a: &Arena, start: usize) -> Vec<Region> {
    let n = a.n_states();
    realizable_inf_sets(&successors(a), start, (1u64 << n) - 1).into_iter().map(|m| mask_region(n, m)).collect()
}

/// Whether every play of the arena from `start` in which player `i` follows `succ_of`
/// (a memoryless choice of successor for its states) satisfies `o`.
pub fn memoryless_enforces(a: &Arena, i: usize, succ_of: &[usize], start: usize, o: &Objective) -> bool {
    let n = a.n_states();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|s| if a.owner(s) == i { vec![succ_of[s]] } else { a.moves(s).map(|(_, t)| t).collect() })
        .collect();
    if o.class().is_tail() {
        realizable_inf_sets(&succ, start, (1u64 << n) - 1).into_iter().all(|l| {
            let r = mask_region(n, l);
            o.holds_inf(&r)
        })
    } else {
        !visit_lasso_exists(&succ, start, &|_| true, &|vis| !o.holds(&mask_region(n, vis), &Region::empty(n)))
    }
}

/// Seeded random instance for differential suites: 1 to `max_players` players, between
/// the player count and `max_states` states.
pub fn random_instance(class: ObjClass, max_states: usize, max_players: usize, n_actions: usize, seed: u64) -> (Arena, Profile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let players = rng.gen_range(1..=max_players.max(1));
    let n = rng.gen_range(players.min(max_states)..=max_states).max(1);
    let a = random_arena(n, players, n_actions, rng.gen()).expect("valid parameters");
    let p = random_profile(class, n, players, 3, rng.gen());
    (a, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{a2, random_arena};
    use crate::objectives::random_profile;

    #[test]
    fn bound_is_enforced() {
        let a = random_arena(7, 2, 2, 0).unwrap();
        let p = random_profile(ObjClass::Buchi, 7, 2, 0, 0);
        assert_eq!(brute_de(&a, &p), Err(OracleError::TooLarge { states: 7, bound: 6 }));
        let a3 = random_arena(3, 3, 2, 0).unwrap();
        let p3 = random_profile(ObjClass::Buchi, 3, 3, 0, 0);
        assert_eq!(brute_secure_eq_2p(&a3, &p3), Err(OracleError::NotTwoPlayer(3)));
    }

    #[test]
    fn a2_by_hand() {
        let a = a2();
        let r = |ids: &[usize]| Region::from_ids(2, ids.iter().copied());
        let p = Profile::targets(ObjClass::CoBuchi, vec![r(&[0]), r(&[1])]);
        assert_eq!(brute_region(&a, &p, 0).unwrap().to_vec(), vec![0]);
        assert!(!brute_de(&a, &p).unwrap());
        let q = Profile::targets(ObjClass::Buchi, vec![r(&[1]), r(&[0])]);
        assert!(brute_de(&a, &q).unwrap());
        assert!(memoryless_de_exists(&a, &q, None).unwrap());
    }

    #[test]
    fn inf_sets_are_strongly_connected() {
        for seed in 0..30 {
            let a = random_arena(4, 2, 2, seed).unwrap();
            let g = a.graph();
            for set in inf_sets_from(&a, a.init()) {
                let sub = g.restrict(&set);
                let comps = sub.sccs();
                assert_eq!(comps.len(), 1);
                assert!(sub.is_nontrivial(&comps[0]));
            }
        }
    }

    #[test]
    fn random_instances_respect_the_size_limit() {
        for class in ObjClass::ALL {
            for seed in 0..30 {
                let (a, p) = random_instance(class, 5, 3, 2, seed);
                assert!(a.n_states() <= 5 && p.n_players() == a.n_players() && p.class() == class);
            }
        }
    }
}
