//! Three players on a six-state ring, each wanting to stay on the good states.
//! Every player can retaliate from everywhere, so the safe play is an equilibrium.

use doomsday::arena::parse_arena;
use doomsday::de_perfect::decide_de;
use doomsday::objectives::parse_objectives;
use doomsday::witness::{check_witness, synthesize_profile};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let a = parse_arena(&std::fs::read_to_string(format!("{dir}/safe_ring_arena.json")).unwrap()).unwrap();
    let p = parse_objectives(&std::fs::read_to_string(format!("{dir}/safe_ring_objectives.json")).unwrap(), &a).unwrap();

    let d = decide_de(&a, &p).unwrap();
    for (i, r) in d.regions.iter().enumerate() {
        let names: Vec<String> = r.iter().map(|s| a.state_name(s)).collect();
        println!("R_{} = {{{}}}", i + 1, names.join(", "));
    }
    println!("doomsday equilibrium: {}", d.exists);

    let w = synthesize_profile(&a, &p, &d).unwrap();
    let states: Vec<String> = w.main.cycle.states.iter().map(|&s| a.state_name(s)).collect();
    println!("main play cycles through {}", states.join(" -> "));
    println!("witness verified: {}", check_witness(&a, &p, &w).unwrap().passed());
}
