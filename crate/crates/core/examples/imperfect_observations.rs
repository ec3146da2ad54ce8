//! The same safety game under two observation partitions. Merging two states in
//! player 1's view destroys the equilibrium.

use doomsday::arena::parse_arena;
use doomsday::imperfect::{decide_de_imperfect, parse_observations};
use doomsday::objectives::parse_objectives;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let read = |f: &str| std::fs::read_to_string(format!("{dir}/{f}")).unwrap();
    let a = parse_arena(&read("observe_arena.json")).unwrap();
    let p = parse_objectives(&read("observe_objectives.json"), &a).unwrap();

    for file in ["observe_fine.json", "observe_coarse.json"] {
        let ia = parse_observations(&read(file), a.clone()).unwrap();
        let d = decide_de_imperfect(&ia, &p).unwrap();
        println!("{file}: player 1 blocks {:?}, equilibrium {}", ia.blocks(0), d.exists);
        if let Some(l) = d.witness_lasso {
            println!("  play: stem {:?} cycle {:?}", l.stem.states, l.cycle.states);
        }
    }
}
