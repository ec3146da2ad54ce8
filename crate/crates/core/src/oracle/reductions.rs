//! Instance generators for the hardness reductions from two-player zero-sum games.
//!
//! Source games are two-player arenas where player index 0 is `A` and 1 is `B`.
//! Each generated instance records the source winner, computed independently of the
//! DE procedures, so that "DE exists iff A wins the source" can be tested.

use super::{for_each_restriction, realizable_inf_sets, successors, OracleError};
use crate::arena::{random_arena, Arena};
use crate::objectives::{ObjClass, Objective, Profile};
use crate::region::Region;
use crate::zerosum::{coalition_lift, solve_generalized_reachability, solve_one_pair_streett};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionKind {
    Buchi,
    ConjParity,
    DisjParity,
    MultiReach,
}

impl ReductionKind {
    pub fn name(self) -> &'static str {
        match self {
            ReductionKind::Buchi => "buchi-red",
            ReductionKind::ConjParity => "conj-parity-red",
            ReductionKind::DisjParity => "disj-parity-red",
            ReductionKind::MultiReach => "multireach-red",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub kind: ReductionKind,
    pub arena: Arena,
    pub profile: Profile,
    pub source: Arena,
    /// Source objectives: `[Buchi(T)]`, `[Parity(p1), Parity(p2)]` or `[Reach(T_1), ..]`.
    pub source_objectives: Profile,
    /// Whether `A` wins the source game from its initial state.
    pub expected: bool,
}

const DEVIATE: &str = "deviate";

fn labels_with_deviate(src: &Arena) -> Vec<String> {
    let mut acts = src.actions().to_vec();
    acts.push(DEVIATE.to_string());
    acts
}

fn check_source(src: &Arena) {
    assert_eq!(src.n_players(), 2, "source games have two players");
}

/// Same arena; player 1 keeps the source Büchi set, player 2 has the trivial objective.
pub fn gen_buchi_reduction(src: &Arena, t: &Region) -> ReductionInstance {
    check_source(src);
    let n = src.n_states();
    let profile = Profile::targets(ObjClass::Buchi, vec![t.clone(), Region::full(n)]);
    let g = coalition_lift(src, &[0]);
    let expected = solve_one_pair_streett(&g, &Region::full(n), t).contains(src.init());
    ReductionInstance {
        kind: ReductionKind::Buchi,
        arena: src.clone(),
        profile,
        source: src.clone(),
        source_objectives: Profile::targets(ObjClass::Buchi, vec![t.clone()]),
        expected,
    }
}

/// Inserts pass-through states so that `A` and `B` alternate and the initial state
/// belongs to `A`. Each pass-through state copies the priorities of its target.
pub fn pad_alternation(src: &Arena, p1: &[u32], p2: &[u32]) -> (Arena, Vec<u32>, Vec<u32>) {
    check_source(src);
    let n = src.n_states();
    let k = src.n_actions();
    let mut owner = src.owners().to_vec();
    let mut delta: Vec<usize> = (0..n).flat_map(|s| src.moves(s).map(|(_, t)| t)).collect();
    let mut q1 = p1.to_vec();
    let mut q2 = p2.to_vec();
    let mut pad: Vec<Option<usize>> = vec![None; n];
    for s in 0..n {
        for x in 0..k {
            let t = delta[s * k + x];
            if owner[t] == src.owner(s) {
                let id = *pad[t].get_or_insert_with(|| {
                    owner.push(1 - src.owner(t));
                    delta.extend(std::iter::repeat_n(t, k));
                    q1.push(p1[t]);
                    q2.push(p2[t]);
                    owner.len() - 1
                });
                delta[s * k + x] = id;
            }
        }
    }
    let mut init = src.init();
    if src.owner(init) == 1 {
        owner.push(0);
        delta.extend(std::iter::repeat_n(init, k));
        q1.push(p1[init]);
        q2.push(p2[init]);
        init = owner.len() - 1;
    }
    let a = Arena::new(2, owner, init, src.actions().to_vec(), delta).expect("padded arena is valid");
    (a, q1, q2)
}

/// Three-player parity instance with a DE iff `A` wins `parity(p1) and parity(p2)`.
pub fn gen_conj_parity_reduction(src: &Arena, p1: &[u32], p2: &[u32]) -> ReductionInstance {
    let (g, q1, q2) = pad_alternation(src, p1, p2);
    let n = g.n_states();
    let k = g.n_actions();
    let dev = k;
    let (init, bad1, bad123) = (0usize, 1usize, 2usize);
    let copy = |s: usize| 3 + s;
    let a_states: Vec<usize> = (0..n).filter(|&s| g.owner(s) == 0).collect();
    let three = |s: usize| 3 + n + a_states.iter().position(|&x| x == s).expect("A state");
    let total = 3 + n + a_states.len();
    let mut owner = vec![0usize; total];
    let mut delta = vec![0usize; total * (k + 1)];
    let mut set = |s: usize, x: usize, t: usize| delta[s * (k + 1) + x] = t;
    owner[init] = 2;
    owner[bad1] = 0;
    owner[bad123] = 2;
    for x in 0..=k {
        set(init, x, if x == dev { copy(g.init()) } else { init });
        set(bad1, x, bad1);
        set(bad123, x, bad123);
    }
    for s in 0..n {
        owner[copy(s)] = g.owner(s);
        for x in 0..k {
            let t = g.succ(s, x);
            set(copy(s), x, if g.owner(s) == 0 { copy(t) } else { three(t) });
        }
        set(copy(s), dev, if g.owner(s) == 0 { bad1 } else { bad123 });
    }
    for &s in &a_states {
        owner[three(s)] = 2;
        for x in 0..k {
            set(three(s), x, copy(s));
        }
        set(three(s), dev, bad123);
    }
    let mut pr = vec![vec![0u32; total]; 3];
    for (i, v) in [(bad1, [1, 0, 0]), (bad123, [1, 1, 1])] {
        for j in 0..3 {
            pr[j][i] = v[j];
        }
    }
    for s in 0..n {
        let mut ids = vec![copy(s)];
        if g.owner(s) == 0 {
            ids.push(three(s));
        }
        for id in ids {
            pr[0][id] = 1;
            pr[1][id] = q1[s] + 1;
            pr[2][id] = q2[s] + 1;
        }
    }
    let arena = Arena::new(3, owner, init, labels_with_deviate(&g), delta).expect("valid reduction arena");
    ReductionInstance {
        kind: ReductionKind::ConjParity,
        arena,
        profile: Profile::parity(pr),
        source: src.clone(),
        source_objectives: Profile::parity(vec![p1.to_vec(), p2.to_vec()]),
        expected: conj_parity_winner(src, p1, p2),
    }
}

/// Two-player parity instance with a DE iff `A` wins `parity(p1) or parity(p2)`.
pub fn gen_disj_parity_reduction(src: &Arena, p1: &[u32], p2: &[u32]) -> ReductionInstance {
    check_source(src);
    let n = src.n_states();
    let k = src.n_actions();
    let dev = k;
    let (init, bad1, bad12) = (0usize, 1usize, 2usize);
    let copy = |s: usize| 3 + s;
    let total = 3 + n;
    let mut owner = vec![1usize; total];
    let mut delta = vec![0usize; total * (k + 1)];
    let mut set = |s: usize, x: usize, t: usize| delta[s * (k + 1) + x] = t;
    for x in 0..=k {
        set(init, x, if x == dev { copy(src.init()) } else { init });
        set(bad1, x, bad1);
        set(bad12, x, bad12);
    }
    for s in 0..n {
        owner[copy(s)] = src.owner(s);
        for x in 0..k {
            set(copy(s), x, copy(src.succ(s, x)));
        }
        set(copy(s), dev, if src.owner(s) == 0 { bad1 } else { bad12 });
    }
    let mut r1 = vec![0u32; total];
    let mut r2 = vec![0u32; total];
    r1[bad1] = 1;
    r2[bad1] = 0;
    r1[bad12] = 1;
    r2[bad12] = 1;
    for s in 0..n {
        r1[copy(s)] = p1[s];
        r2[copy(s)] = p2[s] + 1;
    }
    let arena = Arena::new(2, owner, init, labels_with_deviate(src), delta).expect("valid reduction arena");
    ReductionInstance {
        kind: ReductionKind::DisjParity,
        arena,
        profile: Profile::parity(vec![r1, r2]),
        source: src.clone(),
        source_objectives: Profile::parity(vec![p1.to_vec(), p2.to_vec()]),
        expected: disj_parity_winner(src, p1, p2),
    }
}

/// `(k+1)`-player safety instance with a DE iff `A` can visit every target set.
/// Targets must be pairwise disjoint sets of `B` states.
pub fn gen_multireach_to_safety(src: &Arena, targets: &[Region]) -> Result<ReductionInstance, OracleError> {
    check_source(src);
    let n = src.n_states();
    let k = targets.len();
    if k == 0 {
        return Err(OracleError::BadTargets("at least one target set is required".into()));
    }
    for (x, t) in targets.iter().enumerate() {
        if t.universe() != n {
            return Err(OracleError::BadTargets(format!("target {} ranges over the wrong states", x + 1)));
        }
        if let Some(s) = t.iter().find(|&s| src.owner(s) != 1) {
            return Err(OracleError::BadTargets(format!("target {} contains state {s} not owned by B", x + 1)));
        }
        for (y, u) in targets.iter().enumerate().skip(x + 1) {
            if t.intersects(u) {
                return Err(OracleError::BadTargets(format!("targets {} and {} overlap", x + 1, y + 1)));
            }
        }
    }
    let na = src.n_actions();
    let dev = na;
    let (s0, s1) = (0usize, 1usize);
    let copy = |s: usize| 2 + s;
    let bad = 2 + n;
    let total = 3 + n;
    let mut owner = vec![0usize; total];
    let mut delta = vec![0usize; total * (na + 1)];
    let mut set = |s: usize, x: usize, t: usize| delta[s * (na + 1) + x] = t;
    owner[s1] = 1;
    for x in 0..=na {
        set(s0, x, s1);
        set(s1, x, if x == dev { copy(src.init()) } else { s0 });
        set(bad, x, bad);
    }
    for s in 0..n {
        owner[copy(s)] = if src.owner(s) == 0 {
            0
        } else {
            (1..k).find(|&t| targets[t].contains(s)).map_or(1, |t| t + 1)
        };
        for x in 0..na {
            set(copy(s), x, copy(src.succ(s, x)));
        }
        set(copy(s), dev, if src.owner(s) == 0 { copy(s) } else { bad });
    }
    let mut safe = vec![Region::from_ids(total, [s0, s1])];
    for t in targets {
        let mut r = Region::full(total);
        r.remove(bad);
        for s in t.iter() {
            r.remove(copy(s));
        }
        safe.push(r);
    }
    let arena = Arena::new(k + 1, owner, s0, labels_with_deviate(src), delta).expect("valid reduction arena");
    let g = coalition_lift(src, &[0]);
    let expected = solve_generalized_reachability(&g, targets)
        .map_err(|e| OracleError::BadTargets(e.to_string()))?
        .contains(src.init());
    Ok(ReductionInstance {
        kind: ReductionKind::MultiReach,
        arena,
        profile: Profile::targets(ObjClass::Safety, safe),
        source: src.clone(),
        source_objectives: Profile::new(targets.iter().cloned().map(Objective::Reach).collect())
            .expect("uniform reach profile"),
        expected,
    })
}

fn both_even(p1: &[u32], p2: &[u32], l: u64) -> (bool, bool) {
    let min = |p: &[u32]| (0..p.len()).filter(|&s| l >> s & 1 == 1).map(|s| p[s]).min().unwrap();
    (min(p1) % 2 == 0, min(p2) % 2 == 0)
}

/// `B`'s objective (some parity fails) is closed under union, so `B` is memoryless:
/// `A` wins iff against every memoryless `B` some play satisfies both parities.
pub fn conj_parity_winner(src: &Arena, p1: &[u32], p2: &[u32]) -> bool {
    let succ = successors(src);
    let owned_b: Vec<bool> = (0..src.n_states()).map(|s| src.owner(s) == 1).collect();
    let all = (1u64 << src.n_states()) - 1;
    let mut wins = true;
    for_each_restriction(&succ, &owned_b, |g| {
        let ok = realizable_inf_sets(g, src.init(), all).into_iter().any(|l| {
            let (a, b) = both_even(p1, p2, l);
            a && b
        });
        if !ok {
            wins = false;
        }
        wins
    });
    wins
}

/// `B`'s objective (both parities fail) is closed under union, so `A` is memoryless.
pub fn disj_parity_winner(src: &Arena, p1: &[u32], p2: &[u32]) -> bool {
    let succ = successors(src);
    let owned_a: Vec<bool> = (0..src.n_states()).map(|s| src.owner(s) == 0).collect();
    let all = (1u64 << src.n_states()) - 1;
    let mut wins = false;
    for_each_restriction(&succ, &owned_a, |g| {
        let ok = realizable_inf_sets(g, src.init(), all).into_iter().all(|l| {
            let (a, b) = both_even(p1, p2, l);
            a || b
        });
        if ok {
            wins = true;
        }
        !wins
    });
    wins
}

/// Random two-player source game.
pub fn random_source(n_states: usize, seed: u64) -> Arena {
    random_arena(n_states, 2, 2, seed).expect("valid parameters")
}

pub fn random_priorities(n_states: usize, max: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
    (0..n_states).map(|_| rng.gen_range(0..=max)).collect()
}

/// Random disjoint subsets of the `B` states of `src`.
pub fn random_targets(src: &Arena, k: usize, rng: &mut ChaCha8Rng) -> Vec<Region> {
    let n = src.n_states();
    let mut out = vec![Region::empty(n); k];
    for s in (0..n).filter(|&s| src.owner(s) == 1) {
        let x = rng.gen_range(0..=k);
        if x < k {
            out[x].insert(s);
        }
    }
    out
}

/// Deterministic random instance of the given reduction.
pub fn random_reduction(kind: ReductionKind, n_states: usize, k: usize, seed: u64) -> ReductionInstance {
    let src = random_source(n_states, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_5eed);
    match kind {
        ReductionKind::Buchi => {
            let t = Region::from_ids(n_states, (0..n_states).filter(|_| rng.gen_bool(0.4)).collect::<Vec<_>>());
            gen_buchi_reduction(&src, &t)
        }
        ReductionKind::ConjParity => {
            let p1 = random_priorities(n_states, 3, &mut rng);
            let p2 = random_priorities(n_states, 3, &mut rng);
            gen_conj_parity_reduction(&src, &p1, &p2)
        }
        ReductionKind::DisjParity => {
            let p1 = random_priorities(n_states, 3, &mut rng);
            let p2 = random_priorities(n_states, 3, &mut rng);
            gen_disj_parity_reduction(&src, &p1, &p2)
        }
        ReductionKind::MultiReach => {
            let t = random_targets(&src, k.max(1), &mut rng);
            gen_multireach_to_safety(&src, &t).expect("generated targets are well formed")
        }
    }
}
