//! Checking a witness from disk, then breaking one retaliation move and printing the
//! counterexample the checker finds.

use doomsday::arena::parse_arena;
use doomsday::objectives::parse_objectives;
use doomsday::witness::{check_witness, DoomsdayWitness};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let read = |f: &str| std::fs::read_to_string(format!("{dir}/{f}")).unwrap();
    let a = parse_arena(&read("buchi_memory_arena.json")).unwrap();
    let p = parse_objectives(&read("buchi_memory_objectives.json"), &a).unwrap();

    for file in ["buchi_memory_witness.json", "buchi_memory_sabotaged_witness.json"] {
        let w = DoomsdayWitness::from_json(&read(file)).unwrap();
        let r = check_witness(&a, &p, &w).unwrap();
        println!("{file}: main play wins={} retaliation={:?}", r.cond1, r.cond2);
        for cx in &r.counterexamples {
            let show = |v: &[usize]| v.iter().map(|&s| a.state_name(s)).collect::<Vec<_>>().join(" ");
            println!(
                "  player {} loses while player {} wins: {} ({})^w",
                cx.player + 1,
                cx.winner + 1,
                show(&cx.lasso.stem.states),
                show(&cx.lasso.cycle.states)
            );
        }
    }
}
