//! Incidence structures, design parameters, projective planes, duality.
//!
//! An [`IncidenceStructure`] is a point set `0..v` together with a list of
//! blocks, each a strictly increasing list of point indices mirrored by a
//! dense bit-row. Projective planes and unital designs are both instances;
//! nothing here is specific to order 16.
//!
//! Indexing convention: internal APIs are 0-based, external text formats are
//! 1-based. The two converters are lossless and applied only at the I/O
//! boundary.

use crate::bits::BitRow;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IncidenceError {
    #[error("point index {index} out of range for {num_points} points")]
    IndexOutOfRange { index: u32, num_points: usize },
    #[error("block {block} is not strictly increasing")]
    BlockNotSorted { block: usize },
    #[error("blocks {first} and {second} are identical")]
    RepeatedBlock { first: usize, second: usize },
    #[error("structure has no points or no blocks")]
    EmptyStructure,
    #[error("point/line counts do not match order {order}: {detail}")]
    WrongCounts { order: usize, detail: String },
    #[error("point pair ({a}, {b}) lies on {count} lines, expected exactly 1")]
    PairCoverage { a: u32, b: u32, count: usize },
    #[error("lines {first} and {second} meet in {count} points, expected exactly 1")]
    NotLinear { first: usize, second: usize, count: usize },
    #[error("design parameters invalid: {0}")]
    InvalidParams(String),
    #[error("derivation failed: {0}")]
    NotDerivable(String),
}

/// Points `0..num_points` and a list of blocks over them.
///
/// Blocks keep their construction order; each block is strictly increasing.
/// Repeated blocks are rejected — every structure in this domain is simple.
#[derive(Clone, PartialEq, Eq)]
pub struct IncidenceStructure {
    num_points: usize,
    blocks: Vec<Vec<u32>>,
    bits: Vec<BitRow>,
}

impl IncidenceStructure {
    /// Validate and adopt `blocks` (order preserved, each must be strictly
    /// increasing).
    pub fn new(num_points: usize, blocks: Vec<Vec<u32>>) -> Result<Self, IncidenceError> {
        let mut bits = Vec::with_capacity(blocks.len());
        for (bi, block) in blocks.iter().enumerate() {
            for w in block.windows(2) {
                if w[0] >= w[1] {
                    return Err(IncidenceError::BlockNotSorted { block: bi });
                }
            }
            if let Some(&last) = block.last() {
                if last as usize >= num_points {
                    return Err(IncidenceError::IndexOutOfRange {
                        index: last,
                        num_points,
                    });
                }
            }
            bits.push(BitRow::from_indices(num_points, block));
        }
        let mut seen = std::collections::HashMap::with_capacity(blocks.len());
        for (bi, block) in blocks.iter().enumerate() {
            if let Some(&first) = seen.get(block.as_slice()) {
                return Err(IncidenceError::RepeatedBlock { first, second: bi });
            }
            seen.insert(block.as_slice(), bi);
        }
        // The map borrows from `blocks`; drop it before moving `blocks`.
        drop(seen);
        Ok(IncidenceStructure {
            num_points,
            blocks,
            bits,
        })
    }

    /// Convenience constructor sorting each block first (duplicates within a
    /// block are rejected by the sorted-strictly check afterwards).
    pub fn from_unsorted(num_points: usize, mut blocks: Vec<Vec<u32>>) -> Result<Self, IncidenceError> {
        for b in &mut blocks {
            b.sort_unstable();
        }
        Self::new(num_points, blocks)
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &[u32] {
        &self.blocks[i]
    }

    /// Bit-row of block `i`, for word-parallel intersection tests.
    pub fn block_bits(&self, i: usize) -> &BitRow {
        &self.bits[i]
    }

    /// Indices of the blocks containing point `p`, ascending.
    pub fn blocks_through(&self, p: u32) -> Vec<u32> {
        (0..self.blocks.len() as u32)
            .filter(|&b| self.bits[b as usize].test(p as usize))
            .collect()
    }

    /// The dense 0/1 incidence matrix, one row per block, one column per
    /// point. Row sums equal block sizes by construction.
    pub fn incidence_matrix(&self) -> Vec<Vec<u8>> {
        self.blocks
            .iter()
            .map(|block| {
                let mut row = vec![0u8; self.num_points];
                for &p in block {
                    row[p as usize] = 1;
                }
                row
            })
            .collect()
    }
}

impl std::fmt::Debug for IncidenceStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "IncidenceStructure(v={}, b={})",
            self.num_points,
            self.blocks.len()
        )
    }
}

/// Parameters of a t-(v,k,λ) design with the derived replication number `r`
/// and block count `b`.
///
/// For a 2-design, r = λ(v−1)/(k−1) and b = vr/k; both divisions must be
/// exact or the parameters are rejected outright.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DesignParams {
    pub t: u32,
    pub v: u32,
    pub k: u32,
    pub lambda: u32,
    pub r: u32,
    pub b: u32,
}

impl DesignParams {
    pub fn new(t: u32, v: u32, k: u32, lambda: u32) -> Result<Self, IncidenceError> {
        if t != 2 {
            return Err(IncidenceError::InvalidParams(format!(
                "only 2-designs are supported, got t={t}"
            )));
        }
        if v < 2 || k < 2 || k > v || lambda == 0 {
            return Err(IncidenceError::InvalidParams(format!(
                "degenerate parameter set (t={t}, v={v}, k={k}, lambda={lambda})"
            )));
        }
        let r_num = lambda as u64 * (v as u64 - 1);
        if r_num % (k as u64 - 1) != 0 {
            return Err(IncidenceError::InvalidParams(format!(
                "r = {lambda}({v}-1)/({k}-1) is not an integer"
            )));
        }
        let r = r_num / (k as u64 - 1);
        let b_num = v as u64 * r;
        if b_num % k as u64 != 0 {
            return Err(IncidenceError::InvalidParams(format!(
                "b = {v}·{r}/{k} is not an integer"
            )));
        }
        let b = b_num / k as u64;
        Ok(DesignParams {
            t,
            v,
            k,
            lambda,
            r: r as u32,
            b: b as u32,
        })
    }
}

/// Check that `s` is a t-(v,k,λ) design with the given parameters.
///
/// Returns `Ok(true)`/`Ok(false)`; the first violation found is written to
/// `diagnostic` when a slot is provided. Only 2-designs are supported.
pub fn verify_design(
    s: &IncidenceStructure,
    p: &DesignParams,
    mut diagnostic: Option<&mut String>,
) -> bool {
    let fail = |msg: String, diag: &mut Option<&mut String>| {
        if let Some(d) = diag.as_deref_mut() {
            *d = msg;
        }
        false
    };
    if s.num_points() != p.v as usize {
        return fail(
            format!("expected v={} points, found {}", p.v, s.num_points()),
            &mut diagnostic,
        );
    }
    if s.num_blocks() != p.b as usize {
        return fail(
            format!("expected b={} blocks, found {}", p.b, s.num_blocks()),
            &mut diagnostic,
        );
    }
    for (bi, block) in s.blocks().iter().enumerate() {
        if block.len() != p.k as usize {
            return fail(
                format!("block {} has size {}, expected k={}", bi, block.len(), p.k),
                &mut diagnostic,
            );
        }
    }
    // Pair coverage: count over all blocks, then check uniformly λ.
    let v = p.v as usize;
    let mut coverage = vec![0u32; v * v];
    for block in s.blocks() {
        for (i, &a) in block.iter().enumerate() {
            for &b in &block[i + 1..] {
                coverage[a as usize * v + b as usize] += 1;
            }
        }
    }
    for a in 0..v {
        for b in a + 1..v {
            let c = coverage[a * v + b];
            if c != p.lambda {
                return fail(
                    format!("pair ({}, {}) covered {} times, expected λ={}", a, b, c, p.lambda),
                    &mut diagnostic,
                );
            }
        }
    }
    // Replication: every point on exactly r blocks.
    let mut degree = vec![0u32; v];
    for block in s.blocks() {
        for &a in block {
            degree[a as usize] += 1;
        }
    }
    for (a, &d) in degree.iter().enumerate() {
        if d != p.r {
            return fail(
                format!("point {} lies on {} blocks, expected r={}", a, d, p.r),
                &mut diagnostic,
            );
        }
    }
    true
}

/// A verified projective plane of order `n`: a symmetric 2-(n²+n+1, n+1, 1)
/// design, with lookup tables for the line through a point pair and for the
/// pencil of lines through each point.
#[derive(Clone)]
pub struct ProjectivePlane {
    name: String,
    order: usize,
    structure: IncidenceStructure,
    /// Row-major (p, q) → line index table; the diagonal is unused.
    line_through: Vec<u32>,
    /// For each point, the n+1 lines through it, ascending.
    point_lines: Vec<Vec<u32>>,
}

impl ProjectivePlane {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn structure(&self) -> &IncidenceStructure {
        &self.structure
    }

    pub fn num_points(&self) -> usize {
        self.structure.num_points()
    }

    pub fn lines(&self) -> &[Vec<u32>] {
        self.structure.blocks()
    }

    /// The unique line through two distinct points.
    pub fn line_through(&self, p: u32, q: u32) -> u32 {
        debug_assert_ne!(p, q);
        self.line_through[p as usize * self.num_points() + q as usize]
    }

    /// The pencil of lines through `p` (n+1 of them).
    pub fn lines_through_point(&self, p: u32) -> &[u32] {
        &self.point_lines[p as usize]
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

impl std::fmt::Debug for ProjectivePlane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ProjectivePlane({}, order {})", self.name, self.order)
    }
}

/// Verify the plane axioms for order `n` and wrap the structure.
///
/// Checks, in order: point/line counts and line sizes (n²+n+1 lines of n+1
/// points), every point pair on exactly one line, every line pair meeting in
/// exactly one point, every point on exactly n+1 lines.
pub fn verify_plane(s: IncidenceStructure, n: usize) -> Result<ProjectivePlane, IncidenceError> {
    let v = n * n + n + 1;
    if s.num_points() != v || s.num_blocks() != v {
        return Err(IncidenceError::WrongCounts {
            order: n,
            detail: format!(
                "expected {} points and {} lines, found {} and {}",
                v,
                v,
                s.num_points(),
                s.num_blocks()
            ),
        });
    }
    for (li, line) in s.blocks().iter().enumerate() {
        if line.len() != n + 1 {
            return Err(IncidenceError::WrongCounts {
                order: n,
                detail: format!("line {} has {} points, expected {}", li, line.len(), n + 1),
            });
        }
    }
    // Pair coverage exactly once, building the line-through table as we go.
    let mut line_through = vec![u32::MAX; v * v];
    for (li, line) in s.blocks().iter().enumerate() {
        for (i, &a) in line.iter().enumerate() {
            for &b in &line[i + 1..] {
                let slot = a as usize * v + b as usize;
                if line_through[slot] != u32::MAX {
                    return Err(IncidenceError::PairCoverage { a, b, count: 2 });
                }
                line_through[slot] = li as u32;
                line_through[b as usize * v + a as usize] = li as u32;
            }
        }
    }
    for a in 0..v {
        for b in a + 1..v {
            if line_through[a * v + b] == u32::MAX {
                return Err(IncidenceError::PairCoverage {
                    a: a as u32,
                    b: b as u32,
                    count: 0,
                });
            }
        }
    }
    // Any two lines meet in exactly one point.
    for i in 0..s.num_blocks() {
        for j in i + 1..s.num_blocks() {
            let c = s.block_bits(i).intersection_count(s.block_bits(j));
            if c != 1 {
                return Err(IncidenceError::NotLinear {
                    first: i,
                    second: j,
                    count: c,
                });
            }
        }
    }
    // Point degrees.
    let mut point_lines = vec![Vec::with_capacity(n + 1); v];
    for (li, line) in s.blocks().iter().enumerate() {
        for &p in line {
            point_lines[p as usize].push(li as u32);
        }
    }
    for (p, pencil) in point_lines.iter().enumerate() {
        if pencil.len() != n + 1 {
            return Err(IncidenceError::WrongCounts {
                order: n,
                detail: format!("point {} lies on {} lines, expected {}", p, pencil.len(), n + 1),
            });
        }
    }
    Ok(ProjectivePlane {
        name: String::from("unnamed"),
        order: n,
        structure: s,
        line_through,
        point_lines,
    })
}

/// Transpose the incidence relation: points of the dual are the blocks of
/// `s` (in block order), and block `j` of the dual collects the indices of
/// the blocks of `s` through point `j`.
///
/// With both orderings inherited, `dual(dual(s))` is identical to `s`,
/// including block order.
pub fn dual(s: &IncidenceStructure) -> Result<IncidenceStructure, IncidenceError> {
    if s.num_points() == 0 || s.num_blocks() == 0 {
        return Err(IncidenceError::EmptyStructure);
    }
    let mut dual_blocks = vec![Vec::new(); s.num_points()];
    for (bi, block) in s.blocks().iter().enumerate() {
        for &p in block {
            dual_blocks[p as usize].push(bi as u32);
        }
    }
    IncidenceStructure::new(s.num_blocks(), dual_blocks)
}

/// Closure of a point set under joins and meets, aborted once it exceeds
/// `cap` points. Returns the closed point set when it stabilizes within the
/// cap, `None` otherwise. `meet[a * L + b]` must give the common point of
/// lines `a` and `b`.
fn subplane_closure(
    plane: &ProjectivePlane,
    seed: &[u32],
    meet: &[u32],
    cap: usize,
) -> Option<Vec<u32>> {
    let num_lines = plane.structure().num_blocks();
    let mut pts: Vec<u32> = seed.to_vec();
    let mut in_pts = vec![false; plane.num_points()];
    for &p in &pts {
        in_pts[p as usize] = true;
    }
    let mut lines: Vec<u32> = Vec::new();
    let mut in_lines = vec![false; num_lines];
    loop {
        let mut new_lines = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let l = plane.line_through(pts[i], pts[j]);
                if !in_lines[l as usize] {
                    in_lines[l as usize] = true;
                    new_lines.push(l);
                }
            }
        }
        if new_lines.is_empty() {
            break;
        }
        // Meets of each new line with every known line can add points; meets
        // of old pairs were already taken.
        let old_len = lines.len();
        lines.extend_from_slice(&new_lines);
        for ni in old_len..lines.len() {
            for oi in 0..ni {
                let p = meet[lines[ni] as usize * num_lines + lines[oi] as usize];
                if !in_pts[p as usize] {
                    in_pts[p as usize] = true;
                    pts.push(p);
                    if pts.len() > cap {
                        return None;
                    }
                }
            }
        }
    }
    pts.sort_unstable();
    Some(pts)
}

/// Table of pairwise line intersections: entry `a * L + b` is the unique
/// common point of distinct lines `a` and `b` (diagonal entries unused).
fn line_meet_table(plane: &ProjectivePlane) -> Vec<u32> {
    let num_lines = plane.structure().num_blocks();
    let mut meet = vec![u32::MAX; num_lines * num_lines];
    for p in 0..plane.num_points() as u32 {
        let through = plane.lines_through_point(p);
        for (i, &a) in through.iter().enumerate() {
            for &b in &through[i + 1..] {
                meet[a as usize * num_lines + b as usize] = p;
                meet[b as usize * num_lines + a as usize] = p;
            }
        }
    }
    meet
}

/// Derive a new projective plane of the same order by replacing the net of
/// a derivation set with Baer subplanes.
///
/// `plane` must have square order n = q². `d` names q+1 points on the line
/// `l_inf`. Writing A for the n² points off `l_inf`: the derived affine
/// plane keeps every affine line whose infinite point avoids `d` and
/// replaces the lines through `d` with the affine parts of the Baer
/// subplanes that meet `l_inf` exactly in `d`. The set `d` is a *derivation
/// set* when every affine point pair whose join crosses `d` lies in such a
/// subplane; otherwise this returns `NotDerivable` at the first failing
/// pair. The affine plane is then completed with one new point per parallel
/// class and a new line at infinity, and the result is checked against the
/// plane axioms from scratch.
///
/// The derived plane's points are numbered: affine points of `plane` in
/// ascending original order as 0..n², then the n+1 parallel classes.
pub fn derive_plane(
    plane: &ProjectivePlane,
    l_inf: u32,
    d: &[u32],
) -> Result<ProjectivePlane, IncidenceError> {
    let n = plane.order();
    let q = (1..=n).find(|&q| q * q == n).ok_or_else(|| {
        IncidenceError::NotDerivable(format!("order {n} is not a square"))
    })?;
    let v = plane.num_points();
    let s = plane.structure();
    if l_inf as usize >= s.num_blocks() {
        return Err(IncidenceError::NotDerivable(format!(
            "no line {l_inf} in a plane with {} lines",
            s.num_blocks()
        )));
    }
    let inf_line = s.block_bits(l_inf as usize);
    let mut seen = vec![false; v];
    for &p in d {
        if p as usize >= v || !inf_line.test(p as usize) || seen[p as usize] {
            return Err(IncidenceError::NotDerivable(format!(
                "derivation set point {p} is not a fresh point of line {l_inf}"
            )));
        }
        seen[p as usize] = true;
    }
    if d.len() != q + 1 {
        return Err(IncidenceError::NotDerivable(format!(
            "derivation set has {} points, want q+1 = {}",
            d.len(),
            q + 1
        )));
    }

    // Affine relabeling: points off l_inf, ascending.
    let mut affine_id = vec![u32::MAX; v];
    let mut next = 0u32;
    for p in 0..v {
        if !inf_line.test(p) {
            affine_id[p] = next;
            next += 1;
        }
    }
    debug_assert_eq!(next as usize, n * n);

    let affine_part = |line: &[u32]| -> Vec<u32> {
        line.iter()
            .filter(|&&p| affine_id[p as usize] != u32::MAX)
            .map(|&p| affine_id[p as usize])
            .collect()
    };

    // Kept lines: infinite point outside d.
    let mut new_lines: Vec<Vec<u32>> = Vec::with_capacity(n * (n + 1));
    for (li, line) in s.blocks().iter().enumerate() {
        if li as u32 == l_inf {
            continue;
        }
        let inf_pt = *line
            .iter()
            .find(|&&p| inf_line.test(p as usize))
            .expect("every other line meets l_inf");
        if !seen[inf_pt as usize] {
            new_lines.push(affine_part(line));
        }
    }

    // Replacement lines: affine parts of the Baer subplanes through d. Every
    // affine point pair joined across d must land in exactly one; sweeping
    // the pairs line by line and closing over the first uncovered pair finds
    // each subplane once.
    let meet = line_meet_table(plane);
    let baer = q * q + q + 1;
    let mut covered = vec![false; n * n * n * n];
    let mut seed: Vec<u32> = d.to_vec();
    for &dp in d {
        for &li in plane.lines_through_point(dp) {
            if li == l_inf {
                continue;
            }
            let aff_orig: Vec<u32> = s
                .block(li as usize)
                .iter()
                .copied()
                .filter(|&p| affine_id[p as usize] != u32::MAX)
                .collect();
            for i in 0..aff_orig.len() {
                for j in i + 1..aff_orig.len() {
                    let (ox, oy) = (aff_orig[i], aff_orig[j]);
                    let x = affine_id[ox as usize] as usize;
                    let y = affine_id[oy as usize] as usize;
                    if covered[x * n * n + y] {
                        continue;
                    }
                    seed.truncate(d.len());
                    seed.push(ox);
                    seed.push(oy);
                    let closure = subplane_closure(plane, &seed, &meet, baer)
                        .filter(|c| c.len() == baer)
                        .ok_or_else(|| {
                            IncidenceError::NotDerivable(format!(
                                "points {ox} and {oy} lie in no Baer subplane through the set"
                            ))
                        })?;
                    let aff_closure = affine_part(&closure);
                    debug_assert_eq!(aff_closure.len(), n);
                    for a in 0..aff_closure.len() {
                        for b in a + 1..aff_closure.len() {
                            covered[aff_closure[a] as usize * n * n
                                + aff_closure[b] as usize] = true;
                            covered[aff_closure[b] as usize * n * n
                                + aff_closure[a] as usize] = true;
                        }
                    }
                    new_lines.push(aff_closure);
                }
            }
        }
    }
    if new_lines.len() != n * (n + 1) {
        return Err(IncidenceError::NotDerivable(format!(
            "derived affine plane has {} lines, want {}",
            new_lines.len(),
            n * (n + 1)
        )));
    }

    // Completion: parallel classes become the new infinite points. In an
    // affine plane parallelism (disjointness) is transitive, so grouping by
    // the first disjoint anchor suffices; the axiom check below catches any
    // violation in a malformed input.
    let mut class_of = vec![u32::MAX; new_lines.len()];
    let mut classes = 0u32;
    let bit_lines: Vec<BitRow> = new_lines
        .iter()
        .map(|l| BitRow::from_indices(n * n, l))
        .collect();
    for i in 0..new_lines.len() {
        if class_of[i] != u32::MAX {
            continue;
        }
        class_of[i] = classes;
        for j in i + 1..new_lines.len() {
            if class_of[j] == u32::MAX && bit_lines[i].is_disjoint(&bit_lines[j]) {
                class_of[j] = classes;
            }
        }
        classes += 1;
    }
    if classes as usize != n + 1 {
        return Err(IncidenceError::NotDerivable(format!(
            "derived affine plane has {classes} parallel classes, want {}",
            n + 1
        )));
    }
    let mut blocks: Vec<Vec<u32>> = new_lines
        .iter()
        .zip(&class_of)
        .map(|(l, &c)| {
            let mut b = l.clone();
            b.push(n as u32 * n as u32 + c);
            b
        })
        .collect();
    blocks.push((0..classes).map(|c| n as u32 * n as u32 + c).collect());
    let structure = IncidenceStructure::from_unsorted(n * n + n + 1, blocks)?;
    verify_plane(structure, n)
}

/// The smallest projective plane, order 2 on 7 points. Used as an oracle all
/// over the test suite.
pub fn fano_plane() -> ProjectivePlane {
    let blocks = vec![
        vec![0, 1, 2],
        vec![0, 3, 4],
        vec![0, 5, 6],
        vec![1, 3, 5],
        vec![1, 4, 6],
        vec![2, 3, 6],
        vec![2, 4, 5],
    ];
    let s = IncidenceStructure::new(7, blocks).expect("fano blocks are well-formed");
    verify_plane(s, 2).expect("fano is a plane").with_name("FANO")
}

// ---------------------------------------------------------------------------
// Text formats.
// ---------------------------------------------------------------------------

/// Serialize a plane in the internal canonical format: a three-line header
/// (`plane <name>`, `order <n>`, `points <v>`) followed by one line per
/// block of space-separated 1-based indices. Round-trips bit-exact.
pub fn write_plane_text(plane: &ProjectivePlane) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "plane {}\norder {}\npoints {}\n",
        plane.name(),
        plane.order(),
        plane.num_points()
    ));
    for line in plane.lines() {
        let labels: Vec<String> = line.iter().map(|&p| (p + 1).to_string()).collect();
        out.push_str(&labels.join(" "));
        out.push('\n');
    }
    out
}

/// Parse the internal canonical plane format (see [`write_plane_text`]).
pub fn parse_plane_text(text: &str) -> Result<ProjectivePlane, IncidenceError> {
    let mut lines = text.lines();
    let bad = |msg: &str| IncidenceError::InvalidParams(format!("plane file: {msg}"));
    let name = lines
        .next()
        .and_then(|l| l.strip_prefix("plane "))
        .ok_or_else(|| bad("missing 'plane <name>' header"))?
        .trim()
        .to_string();
    let order: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("order "))
        .and_then(|x| x.trim().parse().ok())
        .ok_or_else(|| bad("missing 'order <n>' header"))?;
    let points: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("points "))
        .and_then(|x| x.trim().parse().ok())
        .ok_or_else(|| bad("missing 'points <v>' header"))?;
    let mut blocks = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut block = Vec::new();
        for tok in line.split_whitespace() {
            let label: u32 = tok
                .parse()
                .map_err(|_| bad(&format!("bad index token {tok:?}")))?;
            if label == 0 || label as usize > points {
                return Err(bad(&format!("1-based index {label} out of range")));
            }
            block.push(label - 1);
        }
        blocks.push(block);
    }
    let s = IncidenceStructure::new(points, blocks)?;
    Ok(verify_plane(s, order)?.with_name(&name))
}

/// Tolerant importer for externally distributed plane line sets.
///
/// Accepts a file of named sections: any line that is not pure whitespace or
/// integers starts a section and supplies its name; the integers that follow
/// (in any line arrangement) are the lines of a plane of order `n`, consumed
/// in groups of n+1 until n²+n+1 lines are read. Inputs may be 0- or 1-based;
/// the presence of index 0 anywhere selects 0-based.
pub fn import_plane_sections(
    text: &str,
    n: usize,
) -> Result<Vec<(String, IncidenceStructure)>, IncidenceError> {
    let v = n * n + n + 1;
    let per_plane = v * (n + 1);
    let mut sections: Vec<(String, Vec<u32>)> = Vec::new();
    let mut current: Option<(String, Vec<u32>)> = None;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let numeric = line
            .split_whitespace()
            .all(|t| t.chars().all(|c| c.is_ascii_digit()));
        if numeric {
            let target = match current.as_mut() {
                Some(t) => t,
                None => {
                    current = Some((String::from("plane-1"), Vec::new()));
                    current.as_mut().expect("just set")
                }
            };
            for tok in line.split_whitespace() {
                target.1.push(
                    tok.parse()
                        .map_err(|_| IncidenceError::InvalidParams(format!("token {tok:?}")))?,
                );
            }
        } else {
            if let Some(done) = current.take() {
                sections.push(done);
            }
            current = Some((line.to_string(), Vec::new()));
        }
    }
    if let Some(done) = current.take() {
        sections.push(done);
    }
    let mut out = Vec::new();
    for (name, nums) in sections {
        if nums.is_empty() {
            continue;
        }
        if nums.len() != per_plane {
            return Err(IncidenceError::InvalidParams(format!(
                "section {name:?} carries {} integers, expected {} for order {}",
                nums.len(),
                per_plane,
                n
            )));
        }
        let zero_based = nums.iter().any(|&x| x == 0);
        let blocks: Vec<Vec<u32>> = nums
            .chunks(n + 1)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|&x| if zero_based { x } else { x - 1 })
                    .collect()
            })
            .collect();
        out.push((name, IncidenceStructure::from_unsorted(v, blocks)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_params_formulas() {
        let p = DesignParams::new(2, 65, 5, 1).unwrap();
        assert_eq!((p.r, p.b), (16, 208));
        let p = DesignParams::new(2, 7, 3, 1).unwrap();
        assert_eq!((p.r, p.b), (3, 7));
        // λ(v−1)/(k−1) must divide exactly.
        assert!(DesignParams::new(2, 8, 3, 1).is_err());
        assert!(DesignParams::new(3, 8, 4, 1).is_err());
    }

    #[test]
    fn fano_verifies_as_plane_and_design() {
        let fano = fano_plane();
        assert_eq!(fano.order(), 2);
        assert_eq!(fano.num_points(), 7);
        let params = DesignParams::new(2, 7, 3, 1).unwrap();
        assert!(verify_design(fano.structure(), &params, None));
        assert_eq!(fano.line_through(0, 1), 0);
        assert_eq!(fano.line_through(4, 2), 6);
    }

    #[test]
    fn disjoint_blocks_fail_pair_coverage() {
        // 13 disjoint 5-blocks on 65 points leave cross pairs uncovered.
        let blocks: Vec<Vec<u32>> = (0..13u32)
            .map(|i| (5 * i..5 * i + 5).collect())
            .collect();
        let s = IncidenceStructure::new(65, blocks).unwrap();
        let p = DesignParams::new(2, 65, 5, 1).unwrap();
        let mut diag = String::new();
        assert!(!verify_design(&s, &p, Some(&mut diag)));
        assert!(!diag.is_empty());
    }

    #[test]
    fn dual_is_an_exact_involution() {
        let fano = fano_plane();
        let d = dual(fano.structure()).unwrap();
        let dd = dual(&d).unwrap();
        assert_eq!(&dd, fano.structure());
        // The dual of the Fano plane is again a plane of order 2.
        assert!(verify_plane(d, 2).is_ok());
    }

    #[test]
    fn dual_of_small_structures() {
        let s = IncidenceStructure::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let d = dual(&s).unwrap();
        assert_eq!(d.num_points(), 2);
        assert_eq!(d.blocks(), &[vec![0], vec![0, 1], vec![1]]);
        assert_eq!(&dual(&d).unwrap(), &s);
        assert!(dual(&IncidenceStructure::new(3, vec![]).unwrap()).is_err());
        // Repeated pencils give a repeated block in the dual, which the
        // constructor rejects; this only happens for degenerate inputs.
        let twin = IncidenceStructure::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert!(dual(&twin).is_err());
    }

    #[test]
    fn broken_plane_reports_the_right_error() {
        let fano = fano_plane();
        let mut blocks = fano.lines().to_vec();
        blocks.pop();
        let s = IncidenceStructure::new(7, blocks).unwrap();
        match verify_plane(s, 2) {
            Err(IncidenceError::WrongCounts { .. }) => {}
            other => panic!("expected WrongCounts, got {other:?}"),
        }
        // Swap one point so a pair is covered twice.
        let mut blocks = fano.lines().to_vec();
        blocks[6] = vec![0, 4, 5];
        let s = IncidenceStructure::new(7, blocks).unwrap();
        match verify_plane(s, 2) {
            Err(IncidenceError::PairCoverage { .. }) => {}
            other => panic!("expected PairCoverage, got {other:?}"),
        }
    }

    #[test]
    fn constructor_rejects_malformed_blocks() {
        assert_eq!(
            IncidenceStructure::new(5, vec![vec![0, 0, 1]]),
            Err(IncidenceError::BlockNotSorted { block: 0 })
        );
        assert_eq!(
            IncidenceStructure::new(5, vec![vec![3, 6]]),
            Err(IncidenceError::IndexOutOfRange {
                index: 6,
                num_points: 5
            })
        );
        assert_eq!(
            IncidenceStructure::new(5, vec![vec![0, 1], vec![2, 3], vec![0, 1]]),
            Err(IncidenceError::RepeatedBlock { first: 0, second: 2 })
        );
    }

    #[test]
    fn incidence_matrix_shape() {
        let fano = fano_plane();
        let m = fano.structure().incidence_matrix();
        assert_eq!(m.len(), 7);
        for row in &m {
            assert_eq!(row.iter().map(|&x| x as usize).sum::<usize>(), 3);
        }
        let empty = IncidenceStructure::new(4, vec![]).unwrap();
        assert!(empty.incidence_matrix().is_empty());
    }

    #[test]
    fn plane_text_roundtrip() {
        let fano = fano_plane();
        let text = write_plane_text(&fano);
        let back = parse_plane_text(&text).unwrap();
        assert_eq!(back.name(), "FANO");
        assert_eq!(back.structure(), fano.structure());
        assert_eq!(write_plane_text(&back), text);
    }

    #[test]
    fn tolerant_import_handles_basing_and_sections() {
        let fano = fano_plane();
        // 1-based body under a section name.
        let mut text = String::from("fano section\n");
        for line in fano.lines() {
            let labels: Vec<String> = line.iter().map(|&p| (p + 1).to_string()).collect();
            text.push_str(&labels.join(" "));
            text.push('\n');
        }
        let planes = import_plane_sections(&text, 2).unwrap();
        assert_eq!(planes.len(), 1);
        assert_eq!(planes[0].0, "fano section");
        assert_eq!(&planes[0].1, fano.structure());
        // 0-based flat body with no section header, odd line breaks.
        let flat: Vec<String> = fano
            .lines()
            .iter()
            .flatten()
            .map(|&p| p.to_string())
            .collect();
        let text = flat.join("\n");
        let planes = import_plane_sections(&text, 2).unwrap();
        assert_eq!(&planes[0].1, fano.structure());
    }
}
