//! Unitals in projective planes: verification, tangent lines and duals, the
//! orbit-union search, and design-into-plane embedding.
//!
//! A unital in a plane of order q² is a set of q³+1 points meeting every
//! line in either 1 or q+1 points. Its secant-line intersections form a
//! 2-(q³+1, q+1, 1) design, and its tangent lines form a unital in the dual
//! plane. The search in this module looks for unitals among unions of point
//! orbits of small subgroups of the plane's automorphism group, which is how
//! the catalogued examples in planes of order 16 were originally found.

use crate::autom::{canonical_certificate, canonicalize, Certificate};
use crate::incidence::{
    verify_design, verify_plane, DesignParams, IncidenceStructure, ProjectivePlane,
};
use crate::permgroup::{enumerate_small_subgroups, orbits_under, PermGroup, Subgroup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

/// Errors from unital construction and the searches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitalError {
    /// The plane's order is not a perfect square, so no unital can exist.
    NotSquareOrder { order: usize },
    /// A point index outside the plane.
    InvalidPoint { point: u32 },
    /// A point listed twice.
    RepeatedPoint { point: u32 },
    /// The point set fails the unital conditions; the detail names the first
    /// violation.
    NotUnital { detail: String },
    /// The input to the embedding search is not a unital design of the
    /// plane's parameters.
    NotUnitalDesign { detail: String },
    /// A budget field is zero.
    InvalidBudget { field: &'static str },
    /// The subgroup acts on the wrong number of points.
    DegreeMismatch { expected: usize, found: usize },
}

impl std::fmt::Display for UnitalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnitalError::NotSquareOrder { order } => {
                write!(f, "plane order {} is not a perfect square", order)
            }
            UnitalError::InvalidPoint { point } => write!(f, "point {} is out of range", point),
            UnitalError::RepeatedPoint { point } => write!(f, "point {} is repeated", point),
            UnitalError::NotUnital { detail } => write!(f, "not a unital: {}", detail),
            UnitalError::NotUnitalDesign { detail } => {
                write!(f, "not a unital design: {}", detail)
            }
            UnitalError::InvalidBudget { field } => {
                write!(f, "budget field {} must be positive", field)
            }
            UnitalError::DegreeMismatch { expected, found } => {
                write!(f, "subgroup degree {} does not match {} points", found, expected)
            }
        }
    }
}

impl std::error::Error for UnitalError {}

fn integer_sqrt(n: usize) -> Option<usize> {
    let mut q = 0;
    while q * q < n {
        q += 1;
    }
    (q * q == n).then_some(q)
}

/// Does `pts` form a unital in `plane`? The first violation found is written
/// to `diagnostic` when a slot is provided. Fails with an error only when the
/// plane's order is not a square; any point-set defect yields `Ok(false)`.
pub fn is_unital(
    plane: &ProjectivePlane,
    pts: &[u32],
    mut diagnostic: Option<&mut String>,
) -> Result<bool, UnitalError> {
    let q = integer_sqrt(plane.order())
        .ok_or(UnitalError::NotSquareOrder { order: plane.order() })?;
    let expected = q * q * q + 1;
    let fail = |msg: String, diag: &mut Option<&mut String>| {
        if let Some(d) = diag.as_deref_mut() {
            *d = msg;
        }
        Ok(false)
    };
    let v = plane.num_points() as u32;
    let mut seen = vec![false; v as usize];
    for &p in pts {
        if p >= v {
            return fail(format!("point {} is out of range", p), &mut diagnostic);
        }
        if seen[p as usize] {
            return fail(format!("point {} is repeated", p), &mut diagnostic);
        }
        seen[p as usize] = true;
    }
    if pts.len() != expected {
        return fail(
            format!("expected {} points for q={}, found {}", expected, q, pts.len()),
            &mut diagnostic,
        );
    }
    let mut counts = vec![0u32; plane.lines().len()];
    for &p in pts {
        for &l in plane.lines_through_point(p) {
            counts[l as usize] += 1;
        }
    }
    for (l, &c) in counts.iter().enumerate() {
        if c != 1 && c != (q + 1) as u32 {
            return fail(
                format!("line {} meets the set in {} points, expected 1 or {}", l, c, q + 1),
                &mut diagnostic,
            );
        }
    }
    Ok(true)
}

/// A verified unital: q³+1 points of a plane of order q² meeting every line
/// in 1 or q+1 points.
#[derive(Clone, Debug)]
pub struct Unital<'a> {
    plane: &'a ProjectivePlane,
    q: usize,
    points: Vec<u32>,
}

impl<'a> Unital<'a> {
    /// Validate and wrap a point set. Points may arrive in any order.
    pub fn new(plane: &'a ProjectivePlane, mut points: Vec<u32>) -> Result<Self, UnitalError> {
        let q = integer_sqrt(plane.order())
            .ok_or(UnitalError::NotSquareOrder { order: plane.order() })?;
        points.sort_unstable();
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(UnitalError::RepeatedPoint { point: w[0] });
            }
        }
        if let Some(&p) = points.iter().find(|&&p| p as usize >= plane.num_points()) {
            return Err(UnitalError::InvalidPoint { point: p });
        }
        let mut detail = String::new();
        if !is_unital(plane, &points, Some(&mut detail))? {
            return Err(UnitalError::NotUnital { detail });
        }
        Ok(Unital { plane, q, points })
    }

    pub fn plane(&self) -> &'a ProjectivePlane {
        self.plane
    }

    /// The q with plane order q².
    pub fn q(&self) -> usize {
        self.q
    }

    /// The q³+1 points, ascending.
    pub fn points(&self) -> &[u32] {
        &self.points
    }

    pub fn contains(&self, p: u32) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    /// See [`tangent_lines`].
    pub fn tangents(&self) -> Vec<u32> {
        tangent_lines(self)
    }

    /// See [`design_from_unital`].
    pub fn design(&self) -> UnitalDesign {
        design_from_unital(self)
    }

    /// See [`dual_unital`].
    pub fn dual(&self) -> DualUnital {
        dual_unital(self)
    }
}

/// The lines meeting the unital in exactly one point, ascending. There are
/// exactly q³+1 of them, one through each unital point.
pub fn tangent_lines(u: &Unital<'_>) -> Vec<u32> {
    let mut counts = vec![0u32; u.plane.lines().len()];
    for &p in &u.points {
        for &l in u.plane.lines_through_point(p) {
            counts[l as usize] += 1;
        }
    }
    let tangents: Vec<u32> = counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == 1)
        .map(|(l, _)| l as u32)
        .collect();
    debug_assert_eq!(tangents.len(), u.points.len(), "one tangent per unital point");
    tangents
}

/// The 2-(q³+1, q+1, 1) design cut out of a unital by its secant lines,
/// with the plane labels that produced it.
#[derive(Clone, Debug)]
pub struct UnitalDesign {
    /// Blocks over points 0..q³+1.
    pub structure: IncidenceStructure,
    /// Design point i is plane point `point_labels[i]`; ascending.
    pub point_labels: Vec<u32>,
    /// Design block j is the intersection with plane line `secant_lines[j]`.
    pub secant_lines: Vec<u32>,
}

impl UnitalDesign {
    /// The parameters this design satisfies.
    pub fn params(&self) -> DesignParams {
        let v = self.structure.num_points();
        let k = self.structure.block(0).len();
        DesignParams::new(2, v as u32, k as u32, 1).expect("unital design parameters are admissible")
    }
}

/// Restrict the plane's secant lines to the unital: design points are the
/// unital points re-indexed to 0..q³+1 in ascending plane order, and each
/// line meeting the unital in q+1 points contributes one block.
pub fn design_from_unital(u: &Unital<'_>) -> UnitalDesign {
    let mut position = vec![u32::MAX; u.plane.num_points()];
    for (i, &p) in u.points.iter().enumerate() {
        position[p as usize] = i as u32;
    }
    let secant_size = (u.q + 1) as usize;
    let mut blocks = Vec::new();
    let mut secant_lines = Vec::new();
    for (l, line) in u.plane.lines().iter().enumerate() {
        let mut block: Vec<u32> = line
            .iter()
            .filter_map(|&p| {
                let pos = position[p as usize];
                (pos != u32::MAX).then_some(pos)
            })
            .collect();
        if block.len() == secant_size {
            block.sort_unstable();
            blocks.push(block);
            secant_lines.push(l as u32);
        }
    }
    let structure = IncidenceStructure::new(u.points.len(), blocks)
        .expect("secant intersections of a unital are distinct sorted blocks");
    debug_assert!(verify_design(&structure, &DesignParams::new(2, u.points.len() as u32, (u.q + 1) as u32, 1).unwrap(), None));
    UnitalDesign {
        structure,
        point_labels: u.points.clone(),
        secant_lines,
    }
}

/// A unital in the dual plane, owning that plane. The points are the tangent
/// line indices of the original unital.
#[derive(Clone, Debug)]
pub struct DualUnital {
    plane: ProjectivePlane,
    points: Vec<u32>,
}

impl DualUnital {
    pub fn plane(&self) -> &ProjectivePlane {
        &self.plane
    }

    /// The tangent-line indices of the original unital, as dual points.
    pub fn points(&self) -> &[u32] {
        &self.points
    }

    /// Borrow as a [`Unital`] of the owned dual plane.
    pub fn unital(&self) -> Unital<'_> {
        Unital::new(&self.plane, self.points.clone())
            .expect("the tangent lines of a unital form a unital in the dual plane")
    }

    /// The dual unital's design, for isomorphism comparisons.
    pub fn design(&self) -> UnitalDesign {
        self.unital().design()
    }
}

/// The tangent lines of `u`, viewed as points of the dual plane. The result
/// is verified to be a unital there.
pub fn dual_unital(u: &Unital<'_>) -> DualUnital {
    let dual_structure = crate::incidence::dual(u.plane.structure())
        .expect("a projective plane has a well-defined dual");
    let name = format!("{}^T", u.plane.name());
    let plane = verify_plane(dual_structure, u.plane.order())
        .expect("the dual of a projective plane is a projective plane")
        .with_name(&name);
    let points = tangent_lines(u);
    let dual = DualUnital { plane, points };
    // Fails only on an implementation bug, so check eagerly.
    let _ = dual.unital();
    dual
}

/// Work limits for the searches, recorded verbatim in outputs. All fields
/// must be positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Upper bound on subgroups tried by [`search_plane`].
    pub max_subgroups: usize,
    /// Upper bound on explored nodes per DFS.
    pub max_nodes: u64,
    /// Wall-clock cutoff per DFS; a safety net, not a determinism boundary.
    pub wall_clock_ms: u64,
    /// Seed for subgroup sampling.
    pub seed: u64,
}

impl SearchBudget {
    pub fn new(max_subgroups: usize, max_nodes: u64, wall_clock_ms: u64, seed: u64) -> Self {
        SearchBudget { max_subgroups, max_nodes, wall_clock_ms, seed }
    }

    fn validate(&self) -> Result<(), UnitalError> {
        if self.max_subgroups == 0 {
            return Err(UnitalError::InvalidBudget { field: "max_subgroups" });
        }
        if self.max_nodes == 0 {
            return Err(UnitalError::InvalidBudget { field: "max_nodes" });
        }
        if self.wall_clock_ms == 0 {
            return Err(UnitalError::InvalidBudget { field: "wall_clock_ms" });
        }
        Ok(())
    }
}

/// One unital found by the orbit-union search, with the orbits it claims to
/// be the union of.
#[derive(Clone, Debug)]
pub struct FoundUnital {
    /// The q³+1 points, ascending.
    pub points: Vec<u32>,
    /// The subgroup orbits whose union the point set is.
    pub orbits: Vec<Vec<u32>>,
    /// Canonical certificate of the associated design, the deduplication key.
    pub certificate: Certificate,
}

/// Result of one orbit-union DFS.
#[derive(Clone, Debug)]
pub struct OrbitSearchOutcome {
    /// Distinct unitals (by design certificate), certificate-ascending.
    pub unitals: Vec<FoundUnital>,
    /// False when a budget cut the DFS short; results are then partial.
    pub complete: bool,
    /// Explored DFS nodes.
    pub nodes: u64,
    /// The budget that governed the run.
    pub budget: SearchBudget,
}

struct DfsCtx {
    nodes: u64,
    max_nodes: u64,
    deadline: Instant,
    stopped: bool,
}

impl DfsCtx {
    fn new(budget: &SearchBudget) -> Self {
        DfsCtx {
            nodes: 0,
            max_nodes: budget.max_nodes,
            deadline: Instant::now() + std::time::Duration::from_millis(budget.wall_clock_ms),
            stopped: false,
        }
    }

    /// Count a node; false once any limit is hit.
    fn tick(&mut self) -> bool {
        if self.stopped {
            return false;
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes
            || (self.nodes % 1024 == 0 && Instant::now() >= self.deadline)
        {
            self.stopped = true;
        }
        !self.stopped
    }
}

/// Bitset of subset sums attainable from orbit sizes, capped at `target`.
fn reachable_sums(sizes: &[usize], target: usize) -> Vec<Vec<u64>> {
    let words = target / 64 + 1;
    let mut reach = vec![vec![0u64; words]; sizes.len() + 1];
    reach[sizes.len()][0] = 1;
    for i in (0..sizes.len()).rev() {
        let (head, tail) = reach.split_at_mut(i + 1);
        let src = &tail[0];
        let dst = &mut head[i];
        dst.copy_from_slice(src);
        let shift = sizes[i];
        let (w, b) = (shift / 64, shift % 64);
        for j in (w..words).rev() {
            let mut val = src[j - w] << b;
            if b > 0 && j > w {
                val |= src[j - w - 1] >> (64 - b);
            }
            dst[j] |= val;
        }
        // Mask sums beyond the target.
        let top = target % 64;
        if top < 63 {
            dst[words - 1] &= (1u64 << (top + 1)) - 1;
        }
    }
    reach
}

fn sum_reachable(reach: &[Vec<u64>], idx: usize, want: usize) -> bool {
    reach[idx][want / 64] >> (want % 64) & 1 == 1
}

/// Search for unitals among unions of point orbits of `h` in `plane`.
///
/// The DFS walks the orbits in decreasing-size order, keeps per-line
/// intersection counters, prunes any state where a line already exceeds q+1
/// points or where no suffix subset sums to the remaining deficit, and
/// verifies every full-size candidate from scratch. Results are H-invariant
/// by construction and deduplicated by design certificate. Runs with the
/// same inputs explore identically; only the wall-clock cutoff can make a
/// truncated run irreproducible.
pub fn search_orbit_unions(
    plane: &ProjectivePlane,
    h: &Subgroup,
    budget: &SearchBudget,
) -> Result<OrbitSearchOutcome, UnitalError> {
    budget.validate()?;
    let q = integer_sqrt(plane.order())
        .ok_or(UnitalError::NotSquareOrder { order: plane.order() })?;
    if h.degree() != plane.num_points() {
        return Err(UnitalError::DegreeMismatch {
            expected: plane.num_points(),
            found: h.degree(),
        });
    }
    let target = q * q * q + 1;
    let mut orbits = h.orbits();
    // Orbits larger than the unital can never contribute.
    orbits.retain(|o| o.len() <= target);
    orbits.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let sizes: Vec<usize> = orbits.iter().map(|o| o.len()).collect();
    let reach = reachable_sums(&sizes, target);

    let mut ctx = DfsCtx::new(budget);
    let mut counts = vec![0u32; plane.lines().len()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut by_cert: BTreeMap<String, FoundUnital> = BTreeMap::new();
    let cap = (q + 1) as u32;

    // Iterative would obscure the two prunes; the depth is at most the
    // number of orbits.
    fn dfs(
        idx: usize,
        size: usize,
        target: usize,
        cap: u32,
        plane: &ProjectivePlane,
        orbits: &[Vec<u32>],
        reach: &[Vec<u64>],
        counts: &mut Vec<u32>,
        chosen: &mut Vec<usize>,
        by_cert: &mut BTreeMap<String, FoundUnital>,
        ctx: &mut DfsCtx,
    ) {
        if !ctx.tick() {
            return;
        }
        if size == target {
            let mut points: Vec<u32> = chosen.iter().flat_map(|&i| orbits[i].iter().copied()).collect();
            points.sort_unstable();
            if let Ok(u) = Unital::new(plane, points) {
                let design = u.design();
                let certificate = canonical_certificate(&design.structure, None);
                by_cert.entry(certificate.to_string()).or_insert_with(|| FoundUnital {
                    points: u.points().to_vec(),
                    orbits: chosen.iter().map(|&i| orbits[i].clone()).collect(),
                    certificate,
                });
            }
            return;
        }
        if idx >= orbits.len() || !sum_reachable(reach, idx, target - size) {
            return;
        }
        // Include orbits[idx] if no line overflows.
        let mut overflow = false;
        for &p in &orbits[idx] {
            for &l in plane.lines_through_point(p) {
                counts[l as usize] += 1;
                if counts[l as usize] > cap {
                    overflow = true;
                }
            }
        }
        if !overflow {
            chosen.push(idx);
            dfs(idx + 1, size + orbits[idx].len(), target, cap, plane, orbits, reach, counts, chosen, by_cert, ctx);
            chosen.pop();
        }
        for &p in &orbits[idx] {
            for &l in plane.lines_through_point(p) {
                counts[l as usize] -= 1;
            }
        }
        // Exclude orbits[idx].
        dfs(idx + 1, size, target, cap, plane, orbits, reach, counts, chosen, by_cert, ctx);
    }

    dfs(0, 0, target, cap, plane, &orbits, &reach, &mut counts, &mut chosen, &mut by_cert, &mut ctx);

    Ok(OrbitSearchOutcome {
        unitals: by_cert.into_values().collect(),
        complete: !ctx.stopped,
        nodes: ctx.nodes,
        budget: *budget,
    })
}

/// One deduplicated hit from [`search_plane`], with provenance.
#[derive(Clone, Debug)]
pub struct SearchHit {
    pub unital: FoundUnital,
    /// Order of the first subgroup that found it.
    pub subgroup_order: usize,
    /// That subgroup's elements, for provenance and re-verification.
    pub subgroup: Subgroup,
}

/// Result of a whole-plane search over sampled subgroups.
#[derive(Clone, Debug)]
pub struct PlaneSearchOutcome {
    /// Distinct unitals (by design certificate), certificate-ascending.
    pub hits: Vec<SearchHit>,
    /// False when any per-subgroup DFS was truncated.
    pub complete: bool,
    /// Subgroups actually searched.
    pub subgroups_searched: usize,
    /// True when subgroup sampling hit its cap before exhausting candidates.
    pub sampling_truncated: bool,
    pub budget: SearchBudget,
}

/// Sample subgroups of the plane's automorphism group with orders in
/// `orders` and run [`search_orbit_unions`] for each, merging results by
/// design certificate. Identical inputs give identical output.
pub fn search_plane(
    plane: &ProjectivePlane,
    orders: &[usize],
    budget: &SearchBudget,
) -> Result<PlaneSearchOutcome, UnitalError> {
    budget.validate()?;
    if orders.is_empty() {
        return Ok(PlaneSearchOutcome {
            hits: Vec::new(),
            complete: true,
            subgroups_searched: 0,
            sampling_truncated: false,
            budget: *budget,
        });
    }
    let canonical = canonicalize(plane.structure(), None);
    let group = PermGroup::from_generators(plane.num_points(), &canonical.point_generators)
        .expect("canonical point generators are valid permutations");
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let samples = budget.max_subgroups.saturating_mul(16).clamp(128, 8192);
    let (subgroups, sampling_truncated) =
        enumerate_small_subgroups(&group, orders, budget.max_subgroups, samples, &mut rng);
    let mut by_cert: BTreeMap<String, SearchHit> = BTreeMap::new();
    let mut complete = true;
    for h in &subgroups {
        let outcome = search_orbit_unions(plane, h, budget)?;
        complete &= outcome.complete;
        for u in outcome.unitals {
            by_cert.entry(u.certificate.to_string()).or_insert_with(|| SearchHit {
                unital: u,
                subgroup_order: h.order(),
                subgroup: h.clone(),
            });
        }
    }
    Ok(PlaneSearchOutcome {
        hits: by_cert.into_values().collect(),
        complete,
        subgroups_searched: subgroups.len(),
        sampling_truncated,
        budget: *budget,
    })
}

/// Result of an embedding search.
#[derive(Clone, Debug)]
pub struct EmbedOutcome {
    /// Design point i maps to plane point `witness[i]`; `None` means no
    /// embedding was found within budget, not that none exists.
    pub witness: Option<Vec<u32>>,
    /// False when a budget cut the search short.
    pub complete: bool,
    pub nodes: u64,
    pub budget: SearchBudget,
}

/// Backtracking state for the embedding search.
struct Embedder<'a> {
    design: &'a IncidenceStructure,
    plane: &'a ProjectivePlane,
    /// Blocks through each design point.
    point_blocks: Vec<Vec<u32>>,
    /// Image of each design point, or `u32::MAX`.
    image: Vec<u32>,
    /// Whether each plane point is taken.
    used: Vec<bool>,
    /// Mapped points per design block.
    mapped: Vec<u32>,
    /// The plane line a block is pinned to once two of its points are
    /// mapped, or `u32::MAX`.
    pinned: Vec<u32>,
    /// line -> block that pinned it.
    claimed: HashMap<u32, u32>,
    ctx: DfsCtx,
}

impl<'a> Embedder<'a> {
    /// The unmapped design point on the most pinned blocks, ties to the most
    /// partially mapped blocks, then the lowest index. Returns `None` when
    /// every point is mapped.
    fn next_point(&self) -> Option<usize> {
        let mut best: Option<(usize, usize, usize)> = None;
        for x in 0..self.design.num_points() {
            if self.image[x] != u32::MAX {
                continue;
            }
            let mut det = 0;
            let mut semi = 0;
            for &b in &self.point_blocks[x] {
                if self.pinned[b as usize] != u32::MAX {
                    det += 1;
                } else if self.mapped[b as usize] > 0 {
                    semi += 1;
                }
            }
            if best.map_or(true, |(bd, bs, _)| (det, semi) > (bd, bs)) {
                best = Some((det, semi, x));
            }
        }
        best.map(|(_, _, x)| x)
    }

    /// Plane points compatible with mapping design point `x`: on every line
    /// pinned by a block through `x`, off every line pinned by a block
    /// avoiding `x`, and unused.
    fn candidates(&self, x: usize) -> Vec<u32> {
        let mut base: Option<Vec<u32>> = None;
        for &b in &self.point_blocks[x] {
            let l = self.pinned[b as usize];
            if l == u32::MAX {
                continue;
            }
            let line = &self.plane.lines()[l as usize];
            base = Some(match base {
                None => line.clone(),
                Some(prev) => prev
                    .into_iter()
                    .filter(|p| line.binary_search(p).is_ok())
                    .collect(),
            });
        }
        let pool = base.unwrap_or_else(|| (0..self.plane.num_points() as u32).collect());
        pool.into_iter()
            .filter(|&c| !self.used[c as usize] && self.admissible(x, c))
            .collect()
    }

    /// Check `c` against every claimed line and against the lines newly
    /// determined by blocks through `x` that already have one mapped point.
    fn admissible(&self, x: usize, c: u32) -> bool {
        let on = |l: u32, p: u32| self.plane.structure().block_bits(l as usize).test(p as usize);
        for (&l, &b) in &self.claimed {
            let b_has_x = self.design.block(b as usize).binary_search(&(x as u32)).is_ok();
            if !b_has_x && on(l, c) {
                return false;
            }
        }
        // Lines that pinning would create now: for each block through x with
        // exactly one mapped point, the line through that image and c. They
        // must be distinct from each other and from every claimed line, and
        // must avoid every mapped image outside their block.
        let mut new_lines: Vec<(u32, u32)> = Vec::new();
        for &b in &self.point_blocks[x] {
            if self.pinned[b as usize] != u32::MAX || self.mapped[b as usize] != 1 {
                continue;
            }
            let other = self
                .design
                .block(b as usize)
                .iter()
                .map(|&p| self.image[p as usize])
                .find(|&i| i != u32::MAX)
                .expect("block has one mapped point");
            if other == c {
                return false;
            }
            let l = self.plane.line_through(other, c);
            if self.claimed.contains_key(&l) || new_lines.iter().any(|&(nl, _)| nl == l) {
                return false;
            }
            new_lines.push((l, b));
        }
        for (l, b) in new_lines {
            for y in 0..self.design.num_points() {
                let img = self.image[y];
                if img == u32::MAX || img == c {
                    continue;
                }
                let in_block = self.design.block(b as usize).binary_search(&(y as u32)).is_ok();
                if !in_block && on(l, img) {
                    return false;
                }
            }
        }
        true
    }

    fn assign(&mut self, x: usize, c: u32) {
        self.image[x] = c;
        self.used[c as usize] = true;
        for &b in &self.point_blocks[x] {
            self.mapped[b as usize] += 1;
            if self.mapped[b as usize] == 2 && self.pinned[b as usize] == u32::MAX {
                let mut it = self
                    .design
                    .block(b as usize)
                    .iter()
                    .map(|&p| self.image[p as usize])
                    .filter(|&i| i != u32::MAX);
                let a = it.next().expect("two mapped points");
                let bb = it.next().expect("two mapped points");
                let l = self.plane.line_through(a, bb);
                self.pinned[b as usize] = l;
                self.claimed.insert(l, b);
            }
        }
    }

    fn unassign(&mut self, x: usize, c: u32) {
        for &b in &self.point_blocks[x] {
            if self.mapped[b as usize] == 2 && self.pinned[b as usize] != u32::MAX {
                self.claimed.remove(&self.pinned[b as usize]);
                self.pinned[b as usize] = u32::MAX;
            }
            self.mapped[b as usize] -= 1;
        }
        self.image[x] = u32::MAX;
        self.used[c as usize] = false;
    }

    fn dfs(&mut self) -> bool {
        if !self.ctx.tick() {
            return false;
        }
        let x = match self.next_point() {
            None => return true,
            Some(x) => x,
        };
        for c in self.candidates(x) {
            self.assign(x, c);
            if self.dfs() {
                return true;
            }
            self.unassign(x, c);
            if self.ctx.stopped {
                return false;
            }
        }
        false
    }
}

/// Try to embed a 2-(q³+1, q+1, 1) design into `plane` as a unital: an
/// injection of design points into plane points taking every block into a
/// line. The search maps points one at a time, most-constrained first,
/// pinning each block to a plane line as soon as two of its points are
/// mapped; the first point ranges over orbit representatives of the plane's
/// automorphism group only. A `None` witness within budget means "not
/// found", never "impossible". Witnesses are re-verified from scratch.
pub fn embed_design_in_plane(
    design: &IncidenceStructure,
    plane: &ProjectivePlane,
    budget: &SearchBudget,
) -> Result<EmbedOutcome, UnitalError> {
    budget.validate()?;
    let q = integer_sqrt(plane.order())
        .ok_or(UnitalError::NotSquareOrder { order: plane.order() })?;
    let params = DesignParams::new(2, (q * q * q + 1) as u32, (q + 1) as u32, 1)
        .expect("unital design parameters are admissible");
    let mut detail = String::new();
    if !verify_design(design, &params, Some(&mut detail)) {
        return Err(UnitalError::NotUnitalDesign { detail });
    }
    let canonical = canonicalize(plane.structure(), None);
    let reps: Vec<u32> = orbits_under(plane.num_points(), &canonical.point_generators)
        .iter()
        .map(|o| o[0])
        .collect();
    let v = design.num_points();
    let mut em = Embedder {
        design,
        plane,
        point_blocks: (0..v as u32).map(|p| design.blocks_through(p)).collect(),
        image: vec![u32::MAX; v],
        used: vec![false; plane.num_points()],
        mapped: vec![0; design.num_blocks()],
        pinned: vec![u32::MAX; design.num_blocks()],
        claimed: HashMap::new(),
        ctx: DfsCtx::new(budget),
    };
    let mut witness = None;
    for &r in &reps {
        em.assign(0, r);
        if em.dfs() {
            witness = Some(em.image.clone());
            break;
        }
        em.unassign(0, r);
        if em.ctx.stopped {
            break;
        }
    }
    if let Some(w) = &witness {
        // Re-verify from scratch: injectivity, blocks into lines, image a
        // unital.
        let mut points = w.clone();
        points.sort_unstable();
        let distinct: HashSet<u32> = points.iter().copied().collect();
        let blocks_in_lines = design.blocks().iter().all(|block| {
            let imgs: Vec<u32> = block.iter().map(|&p| w[p as usize]).collect();
            let l = plane.line_through(imgs[0], imgs[1]);
            imgs.iter().all(|&i| plane.structure().block_bits(l as usize).test(i as usize))
        });
        assert!(
            distinct.len() == points.len()
                && blocks_in_lines
                && is_unital(plane, &points, None).unwrap_or(false),
            "embedding witness failed re-verification"
        );
    }
    Ok(EmbedOutcome {
        witness,
        complete: !em.ctx.stopped,
        nodes: em.ctx.nodes,
        budget: *budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::permgroup::Perm;

    /// PG(2,4) built from GF(4) as polynomials over GF(2) mod x²+x+1.
    fn pg4() -> ProjectivePlane {
        let mul = |a: u32, b: u32| -> u32 {
            let mut acc = 0u32;
            let mut x = a;
            let mut y = b;
            while y != 0 {
                if y & 1 != 0 {
                    acc ^= x;
                }
                x <<= 1;
                if x & 4 != 0 {
                    x ^= 0b111;
                }
                y >>= 1;
            }
            acc
        };
        let mut pts: Vec<[u32; 3]> = vec![[1, 0, 0]];
        for x in 0..4 {
            pts.push([x, 1, 0]);
        }
        for x in 0..4 {
            for y in 0..4 {
                pts.push([x, y, 1]);
            }
        }
        let blocks: Vec<Vec<u32>> = pts
            .iter()
            .map(|l| {
                (0..pts.len() as u32)
                    .filter(|&pi| {
                        let p = pts[pi as usize];
                        mul(p[0], l[0]) ^ mul(p[1], l[1]) ^ mul(p[2], l[2]) == 0
                    })
                    .collect()
            })
            .collect();
        let s = IncidenceStructure::new(pts.len(), blocks).unwrap();
        verify_plane(s, 4).unwrap().with_name("PG(2,4)")
    }

    fn generous_budget(seed: u64) -> SearchBudget {
        SearchBudget::new(16, 5_000_000, 60_000, seed)
    }

    #[test]
    fn hermitian_unital_checks_out() {
        let (plane, points) = catalog::hermitian_unital().unwrap();
        let u = Unital::new(plane, points.to_vec()).unwrap();
        assert_eq!(u.q(), 4);
        assert_eq!(u.points().len(), 65);

        let tangents = tangent_lines(&u);
        assert_eq!(tangents.len(), 65);
        let mut sorted = tangents.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 65, "tangents are pairwise distinct");

        let design = u.design();
        assert_eq!(design.structure.num_blocks(), 208);
        assert!(verify_design(&design.structure, &design.params(), None));

        // The Hermitian unital is self-dual at the design level.
        let dual = u.dual();
        assert_eq!(dual.points().len(), 65);
        let c = canonical_certificate(&design.structure, None);
        let cd = canonical_certificate(&dual.design().structure, None);
        assert_eq!(c, cd);
    }

    #[test]
    fn every_catalog_fixture_is_a_unital() {
        let fixtures = catalog::available_fixtures();
        assert!(!fixtures.is_empty());
        for f in &fixtures {
            let plane = catalog::load_plane(f.plane).unwrap();
            let mut diag = String::new();
            let ok = is_unital(plane, &f.points, Some(&mut diag)).unwrap();
            assert!(ok, "{} #{}: {}", f.plane, f.index, diag);
        }
    }

    #[test]
    fn sixty_five_points_with_a_full_line_rejected() {
        let plane = catalog::load_plane("PG(2,16)").unwrap();
        // A full 17-point line plus 48 more points cannot be a unital.
        let mut pts: Vec<u32> = plane.lines()[0].clone();
        let mut p = 0u32;
        while pts.len() < 65 {
            if !pts.contains(&p) {
                pts.push(p);
            }
            p += 1;
        }
        let mut diag = String::new();
        assert!(!is_unital(plane, &pts, Some(&mut diag)).unwrap());
        assert!(diag.contains("line"), "diagnostic names the violated line: {diag}");
        assert!(Unital::new(plane, pts).is_err());
    }

    #[test]
    fn non_square_order_rejected() {
        let fano = crate::incidence::fano_plane();
        assert_eq!(
            is_unital(&fano, &[0, 1, 2], None),
            Err(UnitalError::NotSquareOrder { order: 2 })
        );
    }

    #[test]
    fn orbit_search_finds_unitals_in_pg_2_4() {
        // q = 2: unitals are 9-point sets meeting lines in 1 or 3 points,
        // and their designs are 2-(9,3,1). The classical one is Hermitian.
        let plane = pg4();
        let outcome = search_plane(&plane, &[3, 9], &generous_budget(7)).unwrap();
        assert!(outcome.complete);
        assert!(!outcome.hits.is_empty(), "small subgroups rediscover a unital");
        for hit in &outcome.hits {
            let u = Unital::new(&plane, hit.unital.points.clone()).unwrap();
            let d = u.design();
            assert_eq!(d.structure.num_points(), 9);
            assert_eq!(d.structure.num_blocks(), 12);
            assert!(verify_design(&d.structure, &DesignParams::new(2, 9, 3, 1).unwrap(), None));
            // Orbit-union soundness.
            let mut union: Vec<u32> = hit.unital.orbits.iter().flatten().copied().collect();
            union.sort_unstable();
            assert_eq!(union, hit.unital.points);
            assert_eq!(hit.unital.orbits.iter().map(|o| o.len()).sum::<usize>(), 9);
            // The searching subgroup stabilizes the result setwise.
            for h in hit.subgroup.elements() {
                let mut image: Vec<u32> = hit.unital.points.iter().map(|&p| h.apply(p)).collect();
                image.sort_unstable();
                assert_eq!(image, hit.unital.points);
            }
        }
    }

    #[test]
    fn trivial_subgroup_exhausts_budget_without_crashing() {
        let plane = pg4();
        let trivial = Subgroup::generated_by(plane.num_points(), &[], 2).unwrap();
        assert_eq!(trivial.order(), 1);
        let budget = SearchBudget::new(1, 2_000, 10_000, 1);
        let outcome = search_orbit_unions(&plane, &trivial, &budget).unwrap();
        assert!(!outcome.complete, "all 21-choose-9 subsets cannot be enumerated");
        assert!(outcome.nodes >= 2_000);
    }

    #[test]
    fn empty_order_set_yields_empty_result() {
        let plane = pg4();
        let outcome = search_plane(&plane, &[], &generous_budget(3)).unwrap();
        assert!(outcome.hits.is_empty());
        assert!(outcome.complete);
    }

    #[test]
    fn search_is_deterministic_under_a_seed() {
        let plane = pg4();
        let a = search_plane(&plane, &[9], &generous_budget(42)).unwrap();
        let b = search_plane(&plane, &[9], &generous_budget(42)).unwrap();
        assert_eq!(a.hits.len(), b.hits.len());
        for (x, y) in a.hits.iter().zip(&b.hits) {
            assert_eq!(x.unital.points, y.unital.points);
            assert_eq!(x.unital.certificate, y.unital.certificate);
            assert_eq!(x.subgroup_order, y.subgroup_order);
        }
    }

    #[test]
    fn embedding_roundtrip_at_q_2() {
        let plane = pg4();
        let found = search_plane(&plane, &[9], &generous_budget(7)).unwrap();
        let u = Unital::new(&plane, found.hits[0].unital.points.clone()).unwrap();
        let design = u.design();
        let outcome = embed_design_in_plane(&design.structure, &plane, &generous_budget(7)).unwrap();
        let witness = outcome.witness.expect("a design from the plane embeds back");
        // The witness maps blocks into lines and its image is a unital; the
        // search re-verified both. Spot-check injectivity here.
        let mut img = witness.clone();
        img.sort_unstable();
        img.dedup();
        assert_eq!(img.len(), design.structure.num_points());
    }

    #[test]
    fn embedding_rejects_non_unital_designs() {
        let plane = pg4();
        let junk = IncidenceStructure::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(matches!(
            embed_design_in_plane(&junk, &plane, &generous_budget(1)),
            Err(UnitalError::NotUnitalDesign { .. })
        ));
    }

    #[test]
    fn budget_validation() {
        let plane = pg4();
        let trivial = Subgroup::generated_by(plane.num_points(), &[], 2).unwrap();
        let bad = SearchBudget::new(1, 0, 1, 1);
        assert!(matches!(
            search_orbit_unions(&plane, &trivial, &bad),
            Err(UnitalError::InvalidBudget { field: "max_nodes" })
        ));
        let wrong_degree = Subgroup::generated_by(5, &[Perm::identity(5)], 2).unwrap();
        assert!(matches!(
            search_orbit_unions(&plane, &wrong_degree, &generous_budget(1)),
            Err(UnitalError::DegreeMismatch { .. })
        ));
    }
}
