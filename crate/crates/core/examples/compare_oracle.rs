//! Solver against the brute-force oracle on small random games of every class.

use doomsday::de_perfect::decide_de;
use doomsday::objectives::ObjClass;
use doomsday::oracle::{brute_de, random_instance};

fn main() {
    for class in ObjClass::ALL {
        let max = if class == ObjClass::Parity { 4 } else { 6 };
        let (mut pos, mut bad) = (0, 0);
        for seed in 0..100 {
            let (a, p) = random_instance(class, max, 3, 2, seed);
            let got = decide_de(&a, &p).unwrap().exists;
            pos += got as usize;
            bad += (Ok(got) != brute_de(&a, &p)) as usize;
        }
        println!("{:>8}: 100 games, {pos} with an equilibrium, {bad} mismatches", class.to_string());
    }
}
