//! One PASS/FAIL line per acceptance criterion. Run with `cargo test --test acceptance`.

use doomsday::arena::{parse_arena, random_arena, Arena, Lasso};
use doomsday::de_perfect::{decide_de, decide_de_tail, DeDecision};
use doomsday::imperfect::{
    all_compatible_good, build_doomsday_automaton, decide_de_imperfect, obs_of_lasso, parse_observations,
    random_observations, random_round_robin, ImperfectArena,
};
use doomsday::objectives::{parse_objectives, random_profile, ObjClass, Profile};
use doomsday::oracle::reductions::{random_reduction, ReductionKind};
use doomsday::oracle::{brute_de, brute_secure_eq_2p, memoryless_de_exists, random_instance, BlockMap};
use doomsday::witness::{check_witness, synthesis_supported, synthesize_profile};
use std::time::{Duration, Instant};

const TARGET_CLASSES: [ObjClass; 4] = [ObjClass::Safety, ObjClass::Reach, ObjClass::Buchi, ObjClass::CoBuchi];

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn load(arena: &str, objectives: &str) -> (Arena, Profile) {
    let a = parse_arena(&fixture(arena)).unwrap();
    let p = parse_objectives(&fixture(objectives), &a).unwrap();
    (a, p)
}

/// Positive instances found by criteria 1-5, replayed through the witness checker.
#[derive(Default)]
struct Positives {
    seen: usize,
    checked: usize,
    failures: Vec<String>,
}

impl Positives {
    fn record(&mut self, tag: &str, a: &Arena, p: &Profile, d: &DeDecision) {
        if !d.exists {
            return;
        }
        self.seen += 1;
        if !synthesis_supported(a, p) {
            return;
        }
        self.checked += 1;
        let ok = synthesize_profile(a, p, d).and_then(|w| check_witness(a, p, &w)).is_ok_and(|r| r.passed());
        if !ok {
            self.failures.push(tag.to_string());
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(k: usize, name: &str, o: Outcome) -> bool {
    println!("criterion {k} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    o.pass
}

fn c1(pos: &mut Positives) -> Outcome {
    let (a, p) = load("safe_ring_arena.json", "safe_ring_objectives.json");
    let t = Instant::now();
    let d = decide_de(&a, &p).unwrap();
    let w = synthesize_profile(&a, &p, &d).unwrap();
    let passed = check_witness(&a, &p, &w).unwrap().passed();
    let el = t.elapsed();
    let full = d.regions.iter().all(|r| r.len() == 6);
    pos.record("safe_ring", &a, &p, &d);
    Outcome {
        pass: d.exists && passed && full && el < Duration::from_millis(100),
        detail: format!("exists={} witness={passed} full_regions={full} {:.2?}", d.exists, el),
    }
}

fn c2(pos: &mut Positives) -> Outcome {
    let (a, p) = load("buchi_memory_arena.json", "buchi_memory_objectives.json");
    let t = Instant::now();
    let d = decide_de(&a, &p).unwrap();
    let memoryless = memoryless_de_exists(&a, &p, None).unwrap();
    let el = t.elapsed();
    pos.record("buchi_memory", &a, &p, &d);
    Outcome {
        pass: d.exists && !memoryless && el < Duration::from_secs(30),
        detail: format!("exists={} memoryless_de={memoryless} {:.2?}", d.exists, el),
    }
}

fn c3(pos: &mut Positives) -> Outcome {
    let t = Instant::now();
    let mut total = 0;
    let mut bad = Vec::new();
    let runs = TARGET_CLASSES.iter().map(|&c| (c, 500u64, 6)).chain([(ObjClass::Parity, 200, 4)]);
    for (class, count, max) in runs {
        for seed in 0..count {
            let (a, p) = random_instance(class, max, 3, 2, seed);
            let d = decide_de(&a, &p).unwrap();
            total += 1;
            if Ok(d.exists) != brute_de(&a, &p) {
                bad.push(format!("{class}#{seed}"));
            }
            pos.record(&format!("c3 {class}#{seed}"), &a, &p, &d);
        }
    }
    let el = t.elapsed();
    Outcome {
        pass: bad.is_empty() && el < Duration::from_secs(600),
        detail: format!("{total} instances, {} mismatches {bad:?} {:.2?}", bad.len(), el),
    }
}

fn c4(pos: &mut Positives) -> Outcome {
    let mut bad = Vec::new();
    let mut split = Vec::new();
    for (kind, n) in [
        (ReductionKind::Buchi, 6),
        (ReductionKind::DisjParity, 4),
        (ReductionKind::ConjParity, 4),
        (ReductionKind::MultiReach, 5),
    ] {
        let mut yes = 0;
        for seed in 0..100u64 {
            let r = random_reduction(kind, 1 + seed as usize % n, 1 + seed as usize % 3, seed);
            let d = decide_de(&r.arena, &r.profile).unwrap();
            if d.exists != r.expected {
                bad.push(format!("{}#{seed}", kind.name()));
            }
            yes += d.exists as usize;
            pos.record(&format!("c4 {}#{seed}", kind.name()), &r.arena, &r.profile, &d);
        }
        split.push(format!("{}: {yes}/100 positive", kind.name()));
    }
    Outcome { pass: bad.is_empty(), detail: format!("{} mismatches {bad:?}; {}", bad.len(), split.join(", ")) }
}

fn c5(pos: &mut Positives) -> Outcome {
    let mut bad = Vec::new();
    let mut total = 0;
    for class in ObjClass::ALL {
        let max = if class == ObjClass::Parity { 4 } else { 5 };
        for seed in 0..200u64 {
            let n = 2 + seed as usize % (max - 1);
            let a = random_arena(n, 2, 2, seed + 5000).unwrap();
            let p = random_profile(class, n, 2, 3, seed + 9000);
            let d = decide_de(&a, &p).unwrap();
            total += 1;
            if Ok(d.exists) != brute_secure_eq_2p(&a, &p) {
                bad.push(format!("{class}#{seed}"));
            }
            pos.record(&format!("c5 {class}#{seed}"), &a, &p, &d);
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("{total} instances, {} mismatches {bad:?}", bad.len()) }
}

fn c6(pos: &Positives) -> Outcome {
    Outcome {
        pass: pos.failures.is_empty() && pos.checked > 0,
        detail: format!(
            "{} positives, {} synthesized and checked, {} failures {:?}",
            pos.seen,
            pos.checked,
            pos.failures.len(),
            pos.failures
        ),
    }
}

fn block_map(ia: &ImperfectArena) -> BlockMap {
    let n = ia.base.n_states();
    (0..ia.base.n_players()).map(|i| (0..n).map(|s| ia.block_of(i, s)).collect()).collect()
}

/// Lassos from the initial state whose stem plus cycle has at most `max_len` states.
fn lassos(a: &Arena, max_len: usize) -> Vec<Lasso> {
    let mut out = Vec::new();
    let mut stack = vec![vec![a.init()]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        for (_, t) in a.moves(last) {
            for k in (0..path.len()).filter(|&k| path[k] == t) {
                let mut cycle = path[k..].to_vec();
                cycle.push(t);
                out.extend(a.lasso_along(&path[..=k], &cycle));
            }
            if path.len() < max_len {
                let mut q = path.clone();
                q.push(t);
                stack.push(q);
            }
        }
    }
    out
}

fn c7() -> Outcome {
    // (a) singleton observations
    let mut bad_a = Vec::new();
    for class in [ObjClass::Safety, ObjClass::Reach] {
        for seed in 0..200u64 {
            let np = 1 + seed as usize % 3;
            let n = np + seed as usize % (6 - np);
            let a = random_round_robin(n, np, 2, seed).unwrap();
            let p = random_profile(class, n, np, 0, seed + 1);
            let ia = ImperfectArena::perfect(a.clone()).unwrap();
            if decide_de_imperfect(&ia, &p).unwrap().exists != decide_de(&a, &p).unwrap().exists {
                bad_a.push(format!("{class}#{seed}"));
            }
        }
    }

    // (b) refine/coarsen pair, confirmed by observation-based memoryless enumeration
    let (a, p) = load("observe_arena.json", "observe_objectives.json");
    let fine = parse_observations(&fixture("observe_fine.json"), a.clone()).unwrap();
    let coarse = parse_observations(&fixture("observe_coarse.json"), a.clone()).unwrap();
    let fine_de = decide_de_imperfect(&fine, &p).unwrap().exists;
    let coarse_de = decide_de_imperfect(&coarse, &p).unwrap().exists;
    let fine_ml = memoryless_de_exists(&a, &p, Some(&block_map(&fine))).unwrap();
    let coarse_ml = memoryless_de_exists(&a, &p, Some(&block_map(&coarse))).unwrap();
    let ok_b = fine_de && !coarse_de && fine_ml && !coarse_ml;

    // (c) D_i language against enumeration of compatible plays
    let mut instances: Vec<(ImperfectArena, Profile)> = vec![(fine, p.clone()), (coarse, p)];
    for class in [ObjClass::Safety, ObjClass::Reach] {
        for seed in 0..40u64 {
            let np = 1 + seed as usize % 2;
            let n = 2 + seed as usize % 3;
            let a = random_round_robin(n, np, 2, seed).unwrap();
            let p = random_profile(class, n, np, 0, seed + 3);
            instances.push((ImperfectArena::new(a, random_observations(n, np, 2, seed + 5)).unwrap(), p));
        }
    }
    let (mut words, mut bad_c) = (0, 0);
    for (ia, p) in &instances {
        for i in 0..p.n_players() {
            let d = build_doomsday_automaton(ia, p, i).unwrap();
            for l in lassos(&ia.base, 5) {
                let w = obs_of_lasso(ia, i, &l);
                let (stem, cycle) = w.split_at(l.stem_len());
                words += 1;
                if d.accepts(stem, cycle) != all_compatible_good(ia, p, i, stem, cycle) {
                    bad_c += 1;
                }
            }
        }
    }

    Outcome {
        pass: bad_a.is_empty() && ok_b && bad_c == 0,
        detail: format!(
            "(a) 400 instances, {} mismatches; (b) fine={fine_de} coarse={coarse_de} memoryless fine={fine_ml} coarse={coarse_ml}; (c) {words} words on {} instances, {bad_c} disagreements",
            bad_a.len(),
            instances.len()
        ),
    }
}

fn c8() -> Outcome {
    let a = random_arena(200, 3, 2, 8).unwrap();
    let p = random_profile(ObjClass::Parity, 200, 3, 3, 8);
    let t = Instant::now();
    let parity = decide_de_tail(&a, &p).unwrap().exists;
    let t_parity = t.elapsed();

    let b = random_arena(2000, 3, 2, 9).unwrap();
    let q = random_profile(ObjClass::Buchi, 2000, 3, 0, 9);
    let t = Instant::now();
    let buchi = decide_de_tail(&b, &q).unwrap().exists;
    let t_buchi = t.elapsed();
    Outcome {
        pass: t_parity < Duration::from_secs(5) && t_buchi < Duration::from_secs(2),
        detail: format!("parity 200 states {t_parity:.2?} (exists={parity}); buchi 2000 states {t_buchi:.2?} (exists={buchi})"),
    }
}

fn main() {
    let mut pos = Positives::default();
    let results = [
        report(1, "safety example", c1(&mut pos)),
        report(2, "Büchi example", c2(&mut pos)),
        report(3, "differential suite", c3(&mut pos)),
        report(4, "reduction contracts", c4(&mut pos)),
        report(5, "two-player secure equilibria", c5(&mut pos)),
        report(6, "witness soundness", c6(&pos)),
        report(7, "imperfect information", c7()),
        report(8, "performance", c8()),
    ];
    let passed = results.iter().filter(|&&b| b).count();
    println!("{passed}/8 criteria passed");
    if passed != results.len() {
        std::process::exit(1);
    }
}
