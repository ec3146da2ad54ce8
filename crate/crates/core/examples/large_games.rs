//! Timing the decision procedure on large random games.

use doomsday::arena::random_arena;
use doomsday::de_perfect::decide_de;
use doomsday::objectives::{random_profile, ObjClass};
use std::time::Instant;

fn main() {
    for (class, n, d) in [(ObjClass::Buchi, 2000, 0), (ObjClass::CoBuchi, 2000, 0), (ObjClass::Parity, 200, 3), (ObjClass::Safety, 2000, 0)] {
        let a = random_arena(n, 3, 2, 1).unwrap();
        let p = random_profile(class, n, 3, d, 1);
        let t = Instant::now();
        let e = decide_de(&a, &p).unwrap().exists;
        println!("{:>8} with {n} states: exists={e} in {:.2?}", class.to_string(), t.elapsed());
    }
}
