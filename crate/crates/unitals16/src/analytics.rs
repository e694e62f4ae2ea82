//! Numeric invariants of unital designs: p-ranks of incidence matrices,
//! parallel-class counts by exact-cover enumeration, and the per-unital
//! report combining them with group orders and certificates.
//!
//! The headline invariants for a unital are the order of its setwise
//! stabilizer inside the plane's collineation group, the order of the full
//! automorphism group of the associated 2-(q³+1, q+1, 1) design, the design
//! incidence matrix rank over GF(5), and the number of parallel classes of
//! the design and of the dual unital's design. Together these separate
//! almost every catalogued unital; canonical certificates settle the rest.

use crate::autom::{automorphism_group, canonical_certificate, setwise_stabilizer, Certificate};
use crate::incidence::IncidenceStructure;
use crate::unitals::{dual_unital, Unital};
use num_bigint::BigUint;
use std::collections::BTreeMap;

/// Errors from the numeric invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnalyticsError {
    /// The requested characteristic is not prime.
    NotPrime { p: u32 },
    /// Parallel classes need equal block sizes.
    NonUniformBlocks,
    /// Parallel classes need the block size to divide the point count.
    NotDivisible { v: usize, k: usize },
    /// The matrix has rows of unequal length.
    RaggedMatrix,
}

impl std::fmt::Display for AnalyticsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnalyticsError::NotPrime { p } => write!(f, "{} is not prime", p),
            AnalyticsError::NonUniformBlocks => write!(f, "blocks are not of uniform size"),
            AnalyticsError::NotDivisible { v, k } => {
                write!(f, "block size {} does not divide point count {}", k, v)
            }
            AnalyticsError::RaggedMatrix => write!(f, "matrix rows have unequal lengths"),
        }
    }
}

impl std::error::Error for AnalyticsError {}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Rank of a 0/1 matrix over GF(p), by modular Gaussian elimination.
/// Row and column order do not affect the result.
pub fn p_rank(matrix: &[Vec<u8>], p: u32) -> Result<usize, AnalyticsError> {
    if !is_prime(p) {
        return Err(AnalyticsError::NotPrime { p });
    }
    let rows = matrix.len();
    if rows == 0 {
        return Ok(0);
    }
    let cols = matrix[0].len();
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(AnalyticsError::RaggedMatrix);
    }
    let p64 = p as u64;
    let mut work: Vec<Vec<u64>> = matrix
        .iter()
        .map(|r| r.iter().map(|&x| x as u64 % p64).collect())
        .collect();
    // Modular inverse by Fermat, fine for the small primes used here.
    let inv = |a: u64| -> u64 {
        let mut acc = 1u64;
        let mut base = a % p64;
        let mut e = p64 - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p64;
            }
            base = base * base % p64;
            e >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| work[r][col] != 0) else {
            continue;
        };
        work.swap(rank, pivot);
        let scale = inv(work[rank][col]);
        for x in work[rank][col..].iter_mut() {
            *x = *x * scale % p64;
        }
        let pivot_row = work[rank].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (x, &pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = (*x + (p64 - factor) * pv) % p64;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Ok(rank)
}

/// Word-level bitset state for the exact-cover walk.
struct CoverCtx {
    masks: Vec<Vec<u64>>,
    by_point: Vec<Vec<u32>>,
    full: Vec<u64>,
}

fn disjoint(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & y == 0)
}

fn or_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= s;
    }
}

fn andnot_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d &= !s;
    }
}

fn cover_walk(
    ctx: &CoverCtx,
    cover: &mut Vec<u64>,
    chosen: &mut Vec<u32>,
    out: &mut Option<&mut Vec<Vec<u32>>>,
    count: &mut u64,
) {
    // First uncovered point drives the branching: every class must cover it
    // with exactly one block, so the walk never revisits a partial cover.
    let mut point = None;
    for (w, (&c, &f)) in cover.iter().zip(&ctx.full).enumerate() {
        let free = !c & f;
        if free != 0 {
            point = Some((w * 64 + free.trailing_zeros() as usize) as u32);
            break;
        }
    }
    let Some(p) = point else {
        *count += 1;
        if let Some(list) = out.as_deref_mut() {
            list.push(chosen.clone());
        }
        return;
    };
    for &b in &ctx.by_point[p as usize] {
        let mask = &ctx.masks[b as usize];
        if !disjoint(cover, mask) {
            continue;
        }
        or_into(cover, mask);
        chosen.push(b);
        cover_walk(ctx, cover, chosen, out, count);
        chosen.pop();
        andnot_into(cover, mask);
    }
}

fn cover_prepare(d: &IncidenceStructure) -> Result<CoverCtx, AnalyticsError> {
    let v = d.num_points();
    let k = d.blocks().first().map_or(0, |b| b.len());
    if k == 0 || d.blocks().iter().any(|b| b.len() != k) {
        return Err(AnalyticsError::NonUniformBlocks);
    }
    if v % k != 0 {
        return Err(AnalyticsError::NotDivisible { v, k });
    }
    let words = v / 64 + 1;
    let mut full = vec![0u64; words];
    for p in 0..v {
        full[p / 64] |= 1 << (p % 64);
    }
    let masks: Vec<Vec<u64>> = d
        .blocks()
        .iter()
        .map(|b| {
            let mut m = vec![0u64; words];
            for &p in b {
                m[p as usize / 64] |= 1 << (p % 64);
            }
            m
        })
        .collect();
    let by_point: Vec<Vec<u32>> =
        (0..d.num_points() as u32).map(|p| d.blocks_through(p)).collect();
    Ok(CoverCtx { masks, by_point, full })
}

/// Count the parallel classes of `d`: sets of pairwise disjoint blocks
/// partitioning the whole point set. The walk covers the lowest uncovered
/// point at each level, so each class is met exactly once and the order of
/// discovery is deterministic.
pub fn parallel_classes(d: &IncidenceStructure) -> Result<u64, AnalyticsError> {
    let ctx = cover_prepare(d)?;
    let mut cover = vec![0u64; ctx.full.len()];
    let mut chosen = Vec::new();
    let mut count = 0;
    cover_walk(&ctx, &mut cover, &mut chosen, &mut None, &mut count);
    Ok(count)
}

/// The parallel classes themselves, each as an ascending list of block
/// indices; classes appear in the deterministic discovery order of
/// [`parallel_classes`].
pub fn parallel_class_members(d: &IncidenceStructure) -> Result<Vec<Vec<u32>>, AnalyticsError> {
    let ctx = cover_prepare(d)?;
    let mut cover = vec![0u64; ctx.full.len()];
    let mut chosen = Vec::new();
    let mut count = 0;
    let mut classes = Vec::new();
    cover_walk(&ctx, &mut cover, &mut chosen, &mut Some(&mut classes), &mut count);
    Ok(classes)
}

/// Everything the catalog tabulates about one unital.
#[derive(Clone, Debug)]
pub struct DesignReport {
    /// Name of the hosting plane.
    pub plane: String,
    /// Identifier like "HALL.6", supplied by the caller.
    pub unital_id: String,
    /// Order of the unital's setwise stabilizer in the plane's group.
    pub stabilizer_order: BigUint,
    /// Order of the full automorphism group of the associated design.
    pub design_aut_order: BigUint,
    /// Rank of the design incidence matrix over GF(5).
    pub p_rank_5: usize,
    /// Parallel classes of the design.
    pub parallel_classes: u64,
    /// Parallel classes of the dual unital's design.
    pub dual_parallel_classes: u64,
    /// Canonical certificate of the design.
    pub certificate: Certificate,
    /// Canonical certificate of the dual unital's design.
    pub dual_certificate: Certificate,
    /// Catalog identifier of a different unital (or dual unital) with an
    /// isomorphic design, when the supplied index contains one.
    pub isomorphic_partner: Option<String>,
}

/// Certificate-to-identifier index for isomorphism lookups. Identifiers use
/// "PLANE.i" for fixture designs and "PLANE^T.i" for their dual unitals'
/// designs.
#[derive(Clone, Debug, Default)]
pub struct DesignIndex {
    ids_by_cert: BTreeMap<String, Vec<String>>,
}

impl DesignIndex {
    pub fn new() -> Self {
        DesignIndex::default()
    }

    /// Register one design certificate under an identifier.
    pub fn insert(&mut self, certificate: &Certificate, id: &str) {
        let ids = self.ids_by_cert.entry(certificate.to_string()).or_default();
        if !ids.iter().any(|x| x == id) {
            ids.push(id.to_string());
        }
    }

    /// All identifiers whose design matches `certificate`.
    pub fn matches(&self, certificate: &Certificate) -> &[String] {
        self.ids_by_cert
            .get(&certificate.to_string())
            .map_or(&[], |v| v.as_slice())
    }

    /// The first match different from `own_id`, if any.
    pub fn partner(&self, certificate: &Certificate, own_id: &str) -> Option<String> {
        self.matches(certificate).iter().find(|id| *id != own_id).cloned()
    }

    /// Index of every catalog fixture design and its dual unital's design,
    /// including the derived Hermitian unital. Built once per process; the
    /// first call pays for canonicalizing all of them.
    pub fn catalog() -> &'static DesignIndex {
        static INDEX: std::sync::OnceLock<DesignIndex> = std::sync::OnceLock::new();
        INDEX.get_or_init(|| {
            let mut index = DesignIndex::new();
            let mut entries: Vec<(&'static str, u32, Unital<'static>)> = Vec::new();
            for f in crate::catalog::available_fixtures() {
                let plane = crate::catalog::load_plane(f.plane).expect("fixture planes load");
                let u = Unital::new(plane, f.points.clone()).expect("fixtures are unitals");
                entries.push((f.plane, f.index, u));
            }
            if let Ok((plane, points)) = crate::catalog::hermitian_unital() {
                let u = Unital::new(plane, points.to_vec()).expect("the Hermitian set is a unital");
                entries.push(("PG(2,16)", 2, u));
            }
            for (plane, i, u) in &entries {
                let design = u.design();
                let dual_design = dual_unital(u).design();
                index.insert(
                    &canonical_certificate(&design.structure, None),
                    &format!("{}.{}", plane, i),
                );
                index.insert(
                    &canonical_certificate(&dual_design.structure, None),
                    &format!("{}^T.{}", plane, i),
                );
            }
            index
        })
    }
}

/// Compute the full report for one unital. `index` resolves the isomorphic
/// partner; pass [`DesignIndex::catalog`] to match against the catalog, or
/// `None` to leave the partner unresolved.
pub fn analyze(u: &Unital<'_>, unital_id: &str, index: Option<&DesignIndex>) -> DesignReport {
    let plane = u.plane();
    let stabilizer = setwise_stabilizer(plane.structure(), u.points());
    let design = u.design();
    let design_group = automorphism_group(&design.structure, None);
    let dual = dual_unital(u);
    let dual_design = dual.design();
    let certificate = canonical_certificate(&design.structure, None);
    let dual_certificate = canonical_certificate(&dual_design.structure, None);
    let isomorphic_partner =
        index.and_then(|ix| ix.partner(&certificate, unital_id));
    DesignReport {
        plane: plane.name().to_string(),
        unital_id: unital_id.to_string(),
        stabilizer_order: stabilizer.order(),
        design_aut_order: design_group.order(),
        p_rank_5: p_rank(&design.structure.incidence_matrix(), 5)
            .expect("5 is prime and the matrix is rectangular"),
        parallel_classes: parallel_classes(&design.structure)
            .expect("unital designs have uniform blocks dividing the point count"),
        dual_parallel_classes: parallel_classes(&dual_design.structure)
            .expect("dual unital designs have uniform blocks dividing the point count"),
        certificate,
        dual_certificate,
        isomorphic_partner,
    }
}

/// Number of pairwise non-isomorphic designs among the reports' designs and
/// dual designs together.
pub fn count_distinct_designs(reports: &[DesignReport]) -> usize {
    let mut certs: Vec<&str> = Vec::new();
    for r in reports {
        certs.push(&r.certificate.hex);
        certs.push(&r.dual_certificate.hex);
    }
    certs.sort_unstable();
    certs.dedup();
    certs.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn rank_basics() {
        let id3 = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(p_rank(&id3, 5).unwrap(), 3);
        assert_eq!(p_rank(&[], 7).unwrap(), 0);
        assert_eq!(p_rank(&id3, 6), Err(AnalyticsError::NotPrime { p: 6 }));
        let ragged = vec![vec![1, 0], vec![1]];
        assert_eq!(p_rank(&ragged, 2), Err(AnalyticsError::RaggedMatrix));
        // Two equal rows mod 2, distinct mod 3.
        let m = vec![vec![1, 1, 0], vec![1, 1, 2]];
        assert_eq!(p_rank(&m, 2).unwrap(), 1);
        assert_eq!(p_rank(&m, 3).unwrap(), 2);
    }

    #[test]
    fn rank_is_invariant_under_permutations() {
        let (_, points) = catalog::hermitian_unital().unwrap();
        let plane = catalog::load_plane("PG(2,16)").unwrap();
        let u = Unital::new(plane, points.to_vec()).unwrap();
        let m = u.design().structure.incidence_matrix();
        let base = p_rank(&m, 5).unwrap();
        let mut shuffled = m.clone();
        shuffled.reverse();
        for row in shuffled.iter_mut() {
            row.reverse();
        }
        assert_eq!(p_rank(&shuffled, 5).unwrap(), base);
    }

    #[test]
    fn unique_cover_counted_once() {
        // Ten points; the first two blocks form the unique partition, the
        // third overlaps both.
        let d = IncidenceStructure::new(
            10,
            vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9], vec![0, 1, 2, 3, 5]],
        )
        .unwrap();
        assert_eq!(parallel_classes(&d).unwrap(), 1);
        let classes = parallel_class_members(&d).unwrap();
        assert_eq!(classes, vec![vec![0, 1]]);
    }

    #[test]
    fn cover_errors() {
        let d = IncidenceStructure::new(5, vec![vec![0, 1], vec![1, 2, 3]]).unwrap();
        assert_eq!(parallel_classes(&d), Err(AnalyticsError::NonUniformBlocks));
        let d = IncidenceStructure::new(5, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(parallel_classes(&d), Err(AnalyticsError::NotDivisible { v: 5, k: 2 }));
    }

    #[test]
    fn hermitian_report_matches_the_table() {
        let (plane, points) = catalog::hermitian_unital().unwrap();
        let u = Unital::new(plane, points.to_vec()).unwrap();
        let report = analyze(&u, "PG(2,16).2", None);
        assert_eq!(report.p_rank_5, 52);
        assert_eq!(report.parallel_classes, 4304);
        assert_eq!(report.dual_parallel_classes, 4304);
        assert_eq!(report.design_aut_order, BigUint::from(249600u32));
        // Self-dual at the design level.
        assert_eq!(report.certificate, report.dual_certificate);
        // The stabilizer in PGammaL(3,16) is the full design group here.
        assert_eq!(report.stabilizer_order, BigUint::from(249600u32));
    }

    #[test]
    fn distinct_design_counting() {
        let (plane, points) = catalog::hermitian_unital().unwrap();
        let u = Unital::new(plane, points.to_vec()).unwrap();
        let report = analyze(&u, "PG(2,16).2", None);
        // Design and dual design coincide, so one distinct certificate.
        assert_eq!(count_distinct_designs(std::slice::from_ref(&report)), 1);
        assert_eq!(count_distinct_designs(&[]), 0);
    }
}
