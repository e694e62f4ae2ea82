//! Scratch probe: time full-plane automorphism groups per vendored plane.

use std::time::Instant;
use unitals16::automorphism_group;
use unitals16::catalog::{available_planes, load_plane};

fn main() {
    for name in available_planes() {
        let plane = load_plane(name).unwrap();
        let t = Instant::now();
        let g = automorphism_group(plane.structure(), None);
        eprintln!("{name}: |Aut| = {} in {:.2?}", g.order(), t.elapsed());
    }
}
