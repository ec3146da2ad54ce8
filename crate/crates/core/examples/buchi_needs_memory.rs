//! A Büchi game where an equilibrium exists but only with memory: every memoryless
//! profile is enumerated and none of them works.

use doomsday::arena::parse_arena;
use doomsday::de_perfect::decide_de;
use doomsday::objectives::parse_objectives;
use doomsday::oracle::memoryless_de_exists;
use doomsday::witness::{check_witness, synthesize_profile};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let a = parse_arena(&std::fs::read_to_string(format!("{dir}/buchi_memory_arena.json")).unwrap()).unwrap();
    let p = parse_objectives(&std::fs::read_to_string(format!("{dir}/buchi_memory_objectives.json")).unwrap(), &a).unwrap();

    let d = decide_de(&a, &p).unwrap();
    println!("doomsday equilibrium: {}", d.exists);
    println!("memoryless equilibrium: {}", memoryless_de_exists(&a, &p, None).unwrap());

    let w = synthesize_profile(&a, &p, &d).unwrap();
    for (i, s) in w.retaliation.iter().enumerate() {
        println!("player {} retaliates with {} memory values", i + 1, s.n_mem);
    }
    println!("witness verified: {}", check_witness(&a, &p, &w).unwrap().passed());
}
