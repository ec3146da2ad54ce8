//! Hardness reductions: each generated instance has a DE iff player A wins the source
//! two-player game, which is solved independently.

use doomsday::de_perfect::decide_de;
use doomsday::oracle::reductions::{random_reduction, ReductionKind};

fn main() {
    for kind in [ReductionKind::Buchi, ReductionKind::ConjParity, ReductionKind::DisjParity, ReductionKind::MultiReach] {
        let mut agree = 0;
        for seed in 0..20 {
            let r = random_reduction(kind, 3 + seed as usize % 2, 2, seed);
            agree += (decide_de(&r.arena, &r.profile).unwrap().exists == r.expected) as usize;
        }
        println!("{:>16}: {agree}/20 agree with the source winner", kind.name());
    }
}
