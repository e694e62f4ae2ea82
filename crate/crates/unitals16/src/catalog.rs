//! Vendored data: the known planes of order 16, the cataloged unital point
//! sets, the expected invariant table, and the Hermitian unital constructed
//! from an explicit GF(16) model of PG(2,16).
//!
//! All data is embedded in the binary and digest-pinned, so a corrupted tree
//! fails loudly instead of producing silently wrong invariants. Planes are
//! verified against the plane axioms on first load and cached for the
//! process lifetime.
//!
//! Unital indices: the public `index` follows the numbering of the survey
//! table the expected values come from; the `listing` number is the position
//! of the point set in the raw catalog file. For most planes the two agree;
//! where the published orderings differ the mapping is pinned in
//! `expected.tsv` and locked down by the invariant tests.

use crate::autom::is_isomorphic;
use crate::incidence::{parse_plane_text, IncidenceError, IncidenceStructure, ProjectivePlane};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown plane {0:?}")]
    UnknownPlane(String),
    #[error("plane {0:?} has no vendored line set")]
    UnavailablePlane(String),
    #[error("no cataloged unital {index} in plane {plane:?}")]
    UnknownFixture { plane: String, index: u32 },
    #[error("vendored data corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
}

/// The known projective planes of order 16, one representative per
/// dual-equivalence class.
pub const PLANE_NAMES: [&str; 13] = [
    "BBH1", "BBH2", "BBS4", "DEMP", "DSFP", "HALL", "JOHN", "JOWK", "LMRH", "MATH", "SEMI2",
    "SEMI4", "PG(2,16)",
];

struct PlaneSource {
    name: &'static str,
    text: &'static str,
    sha256: &'static str,
}

const PLANE_SOURCES: [PlaneSource; 11] = [
    PlaneSource {
        name: "BBH1",
        text: include_str!("../data/planes/bbh1.plane"),
        sha256: "d27c82ef782f235868e99e60369e25394dda1f0ef47424069cfbe105e3a61110",
    },
    PlaneSource {
        name: "DEMP",
        text: include_str!("../data/planes/demp.plane"),
        sha256: "84d54fb08afb082ddf7b43ac3cc4bde791c56cf50ef39c60245f004ec0611ded",
    },
    PlaneSource {
        name: "DSFP",
        text: include_str!("../data/planes/dsfp.plane"),
        sha256: "bd5b5fc64c161bd887af9a80e1064995cf49285e38de418d8f62ac383ffdd7df",
    },
    PlaneSource {
        name: "HALL",
        text: include_str!("../data/planes/hall.plane"),
        sha256: "ad2a3f83d5d133d656b61b3fbb9043b7838400129c44a9c8976d09b879b9e2da",
    },
    PlaneSource {
        name: "JOHN",
        text: include_str!("../data/planes/john.plane"),
        sha256: "139f2f8542dc2e1ab1d7d9ed015fd2b5c8112dd9cca890e851a2975f6af3ea14",
    },
    PlaneSource {
        name: "JOWK",
        text: include_str!("../data/planes/jowk.plane"),
        sha256: "344b805d1c6f3b42bc08afeb1926c76db755f2170114c335bd938d3c0e570d64",
    },
    PlaneSource {
        name: "LMRH",
        text: include_str!("../data/planes/lmrh.plane"),
        sha256: "1ef20d9bc7aa527015431b56e64fe66990d2b1b8d6a4f180a4e58a3a652c47a8",
    },
    PlaneSource {
        name: "MATH",
        text: include_str!("../data/planes/math.plane"),
        sha256: "04973badfdad6ddd63da36f540fdaaca7f374594b34afa95d3fb8d5ce240bbf1",
    },
    PlaneSource {
        name: "PG(2,16)",
        text: include_str!("../data/planes/pg2_16.plane"),
        sha256: "c6dbdc4e16bad647779d21832ddb7236cff32eb55b86e02aa25ee6df75361d8b",
    },
    PlaneSource {
        name: "SEMI2",
        text: include_str!("../data/planes/semi2.plane"),
        sha256: "ac66391756c140508dba4f06a7846a937cfc758f7b4b720cda71f55208b96378",
    },
    PlaneSource {
        name: "SEMI4",
        text: include_str!("../data/planes/semi4.plane"),
        sha256: "2766e741ccc797d80963154db8f60d4bc6349a54dfbb876236a84511ae208e35",
    },
];

const FIXTURES_TEXT: &str = include_str!("../data/fixtures.dat");
const FIXTURES_SHA256: &str = "39976ff99a5bcdc39acd4c149a78b1f7e01ae70f64268a030455b4976f0f1f3d";
const EXPECTED_TEXT: &str = include_str!("../data/expected.tsv");

fn check_digest(label: &str, text: &str, want: &str) -> Result<(), CatalogError> {
    let got = hex::encode(Sha256::digest(text.as_bytes()));
    if got == want {
        Ok(())
    } else {
        Err(CatalogError::Corrupt(format!(
            "{label}: digest {got} does not match pinned {want}"
        )))
    }
}

/// Load one of the vendored planes by name, verified and cached.
pub fn load_plane(name: &str) -> Result<&'static ProjectivePlane, CatalogError> {
    static CACHE: OnceLock<HashMap<&'static str, ProjectivePlane>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        let mut map = HashMap::new();
        for src in &PLANE_SOURCES {
            check_digest(src.name, src.text, src.sha256)
                .unwrap_or_else(|e| panic!("vendored plane data: {e}"));
            let plane = parse_plane_text(src.text)
                .unwrap_or_else(|e| panic!("vendored plane {}: {e}", src.name));
            assert_eq!(plane.name(), src.name, "plane file header names itself");
            map.insert(src.name, plane);
        }
        map
    });
    if let Some(p) = cache.get(name) {
        return Ok(p);
    }
    if PLANE_NAMES.contains(&name) {
        Err(CatalogError::UnavailablePlane(name.to_string()))
    } else {
        Err(CatalogError::UnknownPlane(name.to_string()))
    }
}

/// Names of the planes that have a vendored line set, catalog order.
pub fn available_planes() -> Vec<&'static str> {
    PLANE_NAMES
        .iter()
        .copied()
        .filter(|n| load_plane(n).is_ok())
        .collect()
}

/// One cataloged unital: a 65-point set in a named plane.
#[derive(Clone, Debug)]
pub struct FixtureUnital {
    pub plane: &'static str,
    /// Index in the published numbering (keyed by the expected table).
    pub index: u32,
    /// Position of the point set in the raw catalog listing.
    pub listing: u32,
    /// 0-based point labels, ascending.
    pub points: Vec<u32>,
}

/// Expected invariants of one cataloged unital.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedRow {
    pub plane: &'static str,
    pub index: u32,
    pub listing: u32,
    /// Appeared in the earlier census of unitals with group order >= 9.
    pub previously_known: bool,
    pub aut_order: u64,
    pub rank5: u32,
    pub classes: u32,
    pub dual_classes: u32,
    /// A design this one is isomorphic to, when the table names one:
    /// (plane, index, true) means the dual of that unital's design.
    pub iso: Option<(&'static str, u32, bool)>,
    /// "fixture" rows have a stored point set; "derived" rows are
    /// constructed (the Hermitian unital).
    pub derived: bool,
}

fn parse_expected() -> Vec<ExpectedRow> {
    let mut rows = Vec::new();
    for line in EXPECTED_TEXT.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), 12, "expected.tsv has 12 columns");
        let plane = PLANE_NAMES
            .iter()
            .copied()
            .find(|n| *n == f[0])
            .unwrap_or_else(|| panic!("expected.tsv names unknown plane {:?}", f[0]));
        let iso = if f[8] == "-" {
            None
        } else {
            let iso_plane = PLANE_NAMES
                .iter()
                .copied()
                .find(|n| *n == f[8])
                .unwrap_or_else(|| panic!("expected.tsv iso column names unknown plane {:?}", f[8]));
            Some((iso_plane, f[10].parse().unwrap(), f[9] == "dual"))
        };
        rows.push(ExpectedRow {
            plane,
            index: f[1].parse().unwrap(),
            listing: f[2].parse().unwrap(),
            previously_known: f[3] == "1",
            aut_order: f[4].parse().unwrap(),
            rank5: f[5].parse().unwrap(),
            classes: f[6].parse().unwrap(),
            dual_classes: f[7].parse().unwrap(),
            iso,
            derived: f[11] == "derived",
        });
    }
    rows
}

/// The expected invariant rows (93 cataloged unitals plus the derived
/// Hermitian one).
pub fn expected_rows() -> &'static [ExpectedRow] {
    static ROWS: OnceLock<Vec<ExpectedRow>> = OnceLock::new();
    ROWS.get_or_init(parse_expected)
}

/// Raw point sets keyed by (plane, listing number).
fn fixture_sets() -> &'static HashMap<(String, u32), Vec<u32>> {
    static SETS: OnceLock<HashMap<(String, u32), Vec<u32>>> = OnceLock::new();
    SETS.get_or_init(|| {
        check_digest("fixtures.dat", FIXTURES_TEXT, FIXTURES_SHA256)
            .unwrap_or_else(|e| panic!("vendored fixture data: {e}"));
        let mut map = HashMap::new();
        let mut header: Option<(String, u32)> = None;
        for line in FIXTURES_TEXT.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("unital ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                assert_eq!(parts.len(), 3, "header is 'unital <plane> listing <k>'");
                assert_eq!(parts[1], "listing");
                header = Some((parts[0].to_string(), parts[2].parse().unwrap()));
            } else {
                let key = header.take().expect("point line follows a header line");
                let mut points: Vec<u32> = line
                    .split_whitespace()
                    .map(|t| {
                        let label: u32 = t.parse().expect("point label");
                        assert!((1..=273).contains(&label), "label in 1..=273");
                        label - 1
                    })
                    .collect();
                points.sort_unstable();
                points.dedup();
                assert_eq!(points.len(), 65, "each set has 65 distinct points");
                map.insert(key, points);
            }
        }
        map
    })
}

/// Load a cataloged unital by plane name and published index.
pub fn load_fixture(plane: &str, index: u32) -> Result<FixtureUnital, CatalogError> {
    let row = expected_rows()
        .iter()
        .find(|r| r.plane == plane && r.index == index && !r.derived)
        .ok_or_else(|| CatalogError::UnknownFixture {
            plane: plane.to_string(),
            index,
        })?;
    let points = fixture_sets()
        .get(&(plane.to_string(), row.listing))
        .ok_or_else(|| CatalogError::UnknownFixture {
            plane: plane.to_string(),
            index,
        })?
        .clone();
    Ok(FixtureUnital {
        plane: row.plane,
        index,
        listing: row.listing,
        points,
    })
}

/// All cataloged unitals whose plane data is available, table order.
pub fn available_fixtures() -> Vec<FixtureUnital> {
    expected_rows()
        .iter()
        .filter(|r| !r.derived && load_plane(r.plane).is_ok())
        .filter_map(|r| load_fixture(r.plane, r.index).ok())
        .collect()
}

// ---------------------------------------------------------------------------
// GF(16) model of PG(2,16) and the Hermitian unital.
// ---------------------------------------------------------------------------

/// GF(16) as polynomials over GF(2) modulo x^4 + x + 1, elements 0..15 in
/// bit representation.
struct Gf16 {
    mul: [[u8; 16]; 16],
}

impl Gf16 {
    fn new() -> Self {
        let mut mul = [[0u8; 16]; 16];
        for a in 0..16u32 {
            for b in 0..16u32 {
                let mut acc = 0u32;
                let mut x = a;
                let mut y = b;
                while y != 0 {
                    if y & 1 != 0 {
                        acc ^= x;
                    }
                    x <<= 1;
                    if x & 0x10 != 0 {
                        x ^= 0x13; // reduce by x^4 + x + 1
                    }
                    y >>= 1;
                }
                mul[a as usize][b as usize] = acc as u8;
            }
        }
        Gf16 { mul }
    }

    fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize][b as usize]
    }

    fn pow5(&self, a: u8) -> u8 {
        let a2 = self.mul(a, a);
        let a4 = self.mul(a2, a2);
        self.mul(a4, a)
    }
}

/// The model: points are normalized homogeneous triples over GF(16), lines
/// are the triples of the dual space, incidence is a zero dot product.
/// Returns the verified plane and, for each point index, its coordinates.
fn pg_model() -> (ProjectivePlane, Vec<[u8; 3]>) {
    let f = Gf16::new();
    let mut points: Vec<[u8; 3]> = Vec::with_capacity(273);
    points.push([1, 0, 0]);
    for x in 0..16u8 {
        points.push([x, 1, 0]);
    }
    for x in 0..16u8 {
        for y in 0..16u8 {
            points.push([x, y, 1]);
        }
    }
    // Lines carry the same coordinate shapes; point p is on line l when
    // p0*l0 + p1*l1 + p2*l2 = 0.
    let lines = points.clone();
    let mut blocks = Vec::with_capacity(273);
    for l in &lines {
        let mut line: Vec<u32> = Vec::with_capacity(17);
        for (pi, p) in points.iter().enumerate() {
            let dot = f.mul(p[0], l[0]) ^ f.mul(p[1], l[1]) ^ f.mul(p[2], l[2]);
            if dot == 0 {
                line.push(pi as u32);
            }
        }
        blocks.push(line);
    }
    let s = IncidenceStructure::new(273, blocks).expect("model incidence is well-formed");
    let plane = crate::incidence::verify_plane(s, 16)
        .expect("the coordinate model satisfies the plane axioms")
        .with_name("PG(2,16)-model");
    (plane, points)
}

/// The Hermitian unital of PG(2,16), as a point set of the vendored
/// PG(2,16) plane.
///
/// Construction: in the coordinate model, take the 65 zeros of
/// x0^5 + x1^5 + x2^5 (the absolute points of the Hermitian polarity for
/// GF(16)/GF(4)), then carry them through an isomorphism onto the vendored
/// plane. Any choice of isomorphism gives a projectively equivalent set; the
/// canonical-form maps make the choice deterministic.
pub fn hermitian_unital() -> Result<(&'static ProjectivePlane, &'static [u32]), CatalogError> {
    static CACHED: OnceLock<Vec<u32>> = OnceLock::new();
    let plane = load_plane("PG(2,16)")?;
    let points = CACHED.get_or_init(|| {
        let f = Gf16::new();
        let (model, coords) = pg_model();
        let in_model: Vec<u32> = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| f.pow5(c[0]) ^ f.pow5(c[1]) ^ f.pow5(c[2]) == 0)
            .map(|(i, _)| i as u32)
            .collect();
        assert_eq!(in_model.len(), 65, "Hermitian form has q^3+1 zeros");
        let iso = is_isomorphic(model.structure(), plane.structure())
            .expect("the vendored PG(2,16) line set is the desarguesian plane");
        let mut mapped: Vec<u32> = in_model
            .iter()
            .map(|&p| iso.point_map[p as usize])
            .collect();
        mapped.sort_unstable();
        mapped
    });
    Ok((plane, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autom::automorphism_group;
    use num_bigint::BigUint;

    #[test]
    fn all_vendored_planes_load_and_verify() {
        let names = available_planes();
        assert!(names.len() >= 11, "at least the vendored eleven");
        for name in names {
            let p = load_plane(name).unwrap();
            assert_eq!(p.order(), 16);
            assert_eq!(p.num_points(), 273);
            assert_eq!(p.name(), name);
        }
        assert!(matches!(
            load_plane("NOT A PLANE"),
            Err(CatalogError::UnknownPlane(_))
        ));
    }

    #[test]
    fn expected_rows_shape() {
        let rows = expected_rows();
        assert_eq!(rows.len(), 94);
        assert_eq!(rows.iter().filter(|r| !r.derived).count(), 93);
        assert_eq!(rows.iter().filter(|r| r.previously_known).count(), 29);
        let h = rows.last().unwrap();
        assert!(h.derived && h.plane == "PG(2,16)" && h.aut_order == 249_600);
        // Every non-derived row with available plane data has a point set.
        for r in rows.iter().filter(|r| !r.derived) {
            if load_plane(r.plane).is_ok() {
                let fx = load_fixture(r.plane, r.index).unwrap();
                assert_eq!(fx.points.len(), 65);
                assert_eq!(fx.listing, r.listing);
            }
        }
    }

    #[test]
    fn unknown_fixture_errors() {
        assert!(matches!(
            load_fixture("PG(2,16)", 2),
            Err(CatalogError::UnknownFixture { .. })
        ));
        assert!(matches!(
            load_fixture("HALL", 99),
            Err(CatalogError::UnknownFixture { .. })
        ));
    }

    #[test]
    fn model_plane_is_desarguesian_with_full_group() {
        let (model, _) = pg_model();
        let g = automorphism_group(model.structure(), None);
        // |PGammaL(3,16)| = 4 * 16^3 * (16^3 - 1) * (16^2 - 1).
        assert_eq!(g.order(), BigUint::from(17_108_582_400u64));
    }

    #[test]
    fn deriving_the_desarguesian_plane_at_a_baer_subline_gives_hall() {
        use crate::incidence::derive_plane;
        let (model, coords) = pg_model();
        // The line z = 0 is index 17 in the model's own coordinate order.
        assert_eq!(coords[0], [1, 0, 0]);
        assert!(model.structure().block(17).contains(&0));
        // GF(4) inside this GF(16) model is {0, 1, 6, 7}, so the Baer
        // subline on z = 0 consists of [1,0,0] and [x,1,0] for x in GF(4).
        let subline = [0u32, 1, 2, 7, 8];
        for &p in &subline {
            let c = coords[p as usize];
            assert!(c[2] == 0 && c[1] <= 1 && [0, 1, 6, 7].contains(&c[0]));
        }
        let derived = derive_plane(&model, 17, &subline).expect("sublines derive");
        let hall = load_plane("HALL").unwrap();
        assert!(is_isomorphic(derived.structure(), hall.structure()).is_some());

        // A 5-set that is not a Baer subline is not a derivation set.
        assert!(derive_plane(&model, 17, &[0, 1, 2, 3, 8]).is_err());
    }
}
