//! Analyze one cataloged unital: stabilizer, design group, 5-rank, parallel
//! classes, certificates, and the isomorphic partner if the catalog has one.
//!
//! Usage: `cargo run --release --example analyze_unital -- [PLANE] [INDEX]`
//! (defaults to HALL 6, the row with the largest group among the cataloged
//! unitals outside the classical one).

use unitals16::analytics::{analyze, DesignIndex};
use unitals16::catalog::{expected_rows, load_fixture, load_plane};
use unitals16::unitals::Unital;

fn main() {
    let mut args = std::env::args().skip(1);
    let plane_name = args.next().unwrap_or_else(|| "HALL".into());
    let index: u32 = args
        .next()
        .map(|s| s.parse().expect("index is an integer"))
        .unwrap_or(6);

    let plane = load_plane(&plane_name).expect("plane with vendored line set");
    let fx = load_fixture(&plane_name, index).expect("cataloged unital");
    let u = Unital::new(plane, fx.points.clone()).expect("catalog sets are unitals");
    let id = format!("{plane_name}.{index}");
    let report = analyze(&u, &id, Some(DesignIndex::catalog()));

    println!("unital {id} (listing {})", fx.listing);
    println!("  stabilizer in plane: {}", report.stabilizer_order);
    println!("  design automorphisms: {}", report.design_aut_order);
    println!("  5-rank: {}", report.p_rank_5);
    println!(
        "  parallel classes: {}/{}",
        report.parallel_classes, report.dual_parallel_classes
    );
    println!(
        "  self-dual design: {}",
        report.certificate == report.dual_certificate
    );
    if let Some(p) = &report.isomorphic_partner {
        println!("  isomorphic to: {p}");
    }

    // Cross-check against the expected table so the example doubles as a
    // spot verification.
    let row = expected_rows()
        .iter()
        .find(|r| r.plane == plane_name && r.index == index)
        .expect("every fixture has an expected row");
    assert_eq!(report.design_aut_order, row.aut_order.into());
    assert_eq!(report.p_rank_5 as u32, row.rank5);
    assert_eq!(report.parallel_classes as u32, row.classes);
    assert_eq!(report.dual_parallel_classes as u32, row.dual_classes);
    println!("  matches the expected table row");
}
