//! Automorphisms, canonical certificates, and isomorphism testing for
//! incidence structures.
//!
//! The engine is a partition-refinement search in the style long used for
//! graph canonization: the structure becomes a bipartite graph on point and
//! block vertices, an equitable refinement procedure drives an
//! individualization tree, the minimal leaf supplies the canonical form, and
//! pairs of equal leaves supply automorphisms that prune the tree through
//! orbit merging. Certificates are SHA-256 digests of the canonically
//! relabeled incidence matrix behind a version byte, so they are stable
//! across runs and releases that keep the same version.

use crate::incidence::IncidenceStructure;
use crate::permgroup::{orbits_under, Perm, PermGroup};
use sha2::{Digest, Sha256};
use std::cmp::Ordering;

/// Certificate format version; bump on any change to the hashed payload.
const CERT_VERSION: u8 = 1;

/// An optional coloring of the points of a structure. Automorphisms must
/// preserve colors; certificates of differently colored copies differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    point_colors: Vec<u32>,
}

impl Coloring {
    pub fn new(point_colors: Vec<u32>) -> Self {
        Coloring { point_colors }
    }

    /// Color 1 on the subset, 0 elsewhere.
    pub fn from_subset(num_points: usize, subset: &[u32]) -> Self {
        let mut point_colors = vec![0u32; num_points];
        for &p in subset {
            point_colors[p as usize] = 1;
        }
        Coloring { point_colors }
    }

    pub fn point_colors(&self) -> &[u32] {
        &self.point_colors
    }
}

/// A versioned hex digest identifying a structure up to isomorphism
/// (equal certificates if and only if isomorphic, for a fixed version).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Certificate {
    pub version: u8,
    pub hex: String,
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "u{}:{}", self.version, self.hex)
    }
}

/// Everything the canonical search produces in one pass.
#[derive(Clone, Debug)]
pub struct Canonical {
    /// Point x of the input goes to canonical position point_map[x].
    pub point_map: Vec<u32>,
    /// Block j of the input goes to canonical position block_map[j].
    pub block_map: Vec<u32>,
    pub certificate: Certificate,
    /// Generators of the (color-preserving) automorphism group, acting on
    /// points.
    pub point_generators: Vec<Perm>,
    pub stats: SearchStats,
}

/// A verified isomorphism between two structures.
#[derive(Clone, Debug)]
pub struct Isomorphism {
    pub point_map: Vec<u32>,
    pub block_map: Vec<u32>,
}

struct Search<'a> {
    nv: usize,
    num_points: usize,
    adj: Vec<Vec<u32>>,
    s: &'a IncidenceStructure,
    first: Option<Leaf>,
    /// Node invariants along the first leaf's path, one entry per depth.
    first_inv: Vec<Vec<u8>>,
    best: Option<Leaf>,
    best_inv: Vec<Vec<u8>>,
    /// Node invariants along the current path.
    path_inv: Vec<Vec<u8>>,
    auts: Vec<Perm>,
    stats: SearchStats,
}

/// Tree-size counters from one canonical search, mostly for tests and
/// performance work.
#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub nodes: u64,
    pub leaves: u64,
    pub best_updates: u64,
    pub automorphisms: u64,
    pub nodes_by_depth: Vec<u64>,
}

struct Leaf {
    perm: Perm,
    rows: Vec<u8>,
    prefix: Vec<u32>,
}

/// Flow control for the individualization tree: either keep scanning, or
/// unwind to the given depth because an automorphism proved the rest of the
/// current subtree equivalent to an explored one.
enum Step {
    Continue,
    Unwind(usize),
}

impl<'a> Search<'a> {
    fn new(s: &'a IncidenceStructure) -> Self {
        let v = s.num_points();
        let b = s.num_blocks();
        let nv = v + b;
        let mut adj = vec![Vec::new(); nv];
        for (bi, block) in s.blocks().iter().enumerate() {
            for &p in block {
                adj[p as usize].push((v + bi) as u32);
                adj[v + bi].push(p);
            }
        }
        Search {
            nv,
            num_points: v,
            adj,
            s,
            first: None,
            first_inv: Vec::new(),
            best: None,
            best_inv: Vec::new(),
            path_inv: Vec::new(),
            auts: Vec::new(),
            stats: SearchStats::default(),
        }
    }

    fn initial_partition(&self, coloring: Option<&Coloring>) -> Vec<Vec<u32>> {
        let v = self.num_points;
        let mut cells: Vec<Vec<u32>> = Vec::new();
        match coloring {
            Some(c) => {
                assert_eq!(c.point_colors.len(), v, "coloring covers every point");
                let mut by_color: Vec<(u32, Vec<u32>)> = Vec::new();
                for p in 0..v as u32 {
                    let col = c.point_colors[p as usize];
                    match by_color.iter_mut().find(|(k, _)| *k == col) {
                        Some((_, cell)) => cell.push(p),
                        None => by_color.push((col, vec![p])),
                    }
                }
                by_color.sort_by_key(|(k, _)| *k);
                cells.extend(by_color.into_iter().map(|(_, cell)| cell));
            }
            None => {
                if v > 0 {
                    cells.push((0..v as u32).collect());
                }
            }
        }
        if self.nv > v {
            cells.push((v as u32..self.nv as u32).collect());
        }
        cells
    }

    /// Equitable refinement: split cells by neighbor counts into the current
    /// cells until stable. Subcells are ordered by their count signature, so
    /// the outcome is label-independent.
    fn refine(&self, cells: &mut Vec<Vec<u32>>) {
        let mut cell_of = vec![0u32; self.nv];
        loop {
            for (ci, c) in cells.iter().enumerate() {
                for &x in c {
                    cell_of[x as usize] = ci as u32;
                }
            }
            let mut next: Vec<Vec<u32>> = Vec::with_capacity(cells.len());
            let mut changed = false;
            for c in cells.iter() {
                if c.len() == 1 {
                    next.push(c.clone());
                    continue;
                }
                let mut keyed: Vec<(Vec<(u32, u32)>, u32)> = c
                    .iter()
                    .map(|&x| {
                        let mut ids: Vec<u32> =
                            self.adj[x as usize].iter().map(|&y| cell_of[y as usize]).collect();
                        ids.sort_unstable();
                        let mut key: Vec<(u32, u32)> = Vec::new();
                        for id in ids {
                            match key.last_mut() {
                                Some((k, n)) if *k == id => *n += 1,
                                _ => key.push((id, 1)),
                            }
                        }
                        (key, x)
                    })
                    .collect();
                keyed.sort();
                let mut start = 0;
                for i in 1..=keyed.len() {
                    if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                        next.push(keyed[start..i].iter().map(|(_, x)| *x).collect());
                        if i - start != c.len() {
                            changed = true;
                        }
                        start = i;
                    }
                }
            }
            *cells = next;
            if !changed {
                return;
            }
        }
    }

    /// First largest cell, if any non-singleton exists. Large cells hold the
    /// generic vertices, and individualizing a generic vertex collapses the
    /// partition fastest; small-cell selection tends to walk along a single
    /// block (fixing collinear points one by one on geometric structures),
    /// which deepens the tree while the stabilizer barely shrinks.
    fn target_cell(cells: &[Vec<u32>]) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (i, c) in cells.iter().enumerate() {
            if c.len() > 1 && best.map_or(true, |(_, len)| c.len() > len) {
                best = Some((i, c.len()));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Adjacency rows of the relabeled structure: one bit row per canonical
    /// block position over canonical point positions.
    fn leaf_rows(&self, perm: &Perm) -> Vec<u8> {
        let v = self.num_points;
        let b = self.nv - v;
        let stride = (v + 7) / 8;
        let mut rows = vec![0u8; b * stride];
        let inv = perm.inverse();
        for pos in 0..b {
            let vertex = inv.apply((v + pos) as u32);
            let bi = vertex as usize - v;
            for &p in self.s.block(bi) {
                let col = perm.apply(p) as usize;
                rows[pos * stride + col / 8] |= 1 << (col % 8);
            }
        }
        rows
    }

    /// Label-invariant summary of a refined partition: the cell sizes in
    /// order. Equivalent search paths produce identical summaries, so the
    /// sequence of summaries along a path can be compared across branches.
    fn node_invariant(cells: &[Vec<u32>]) -> Vec<u8> {
        let mut out = Vec::with_capacity(cells.len() * 2);
        for c in cells {
            out.extend_from_slice(&(c.len() as u16).to_le_bytes());
        }
        out
    }

    /// True when the current path's invariant sequence agrees with the first
    /// leaf's path so far. Such paths must stay open: they can still produce
    /// automorphisms even when they compare above the best leaf.
    fn path_matches_first(&self) -> bool {
        self.path_inv.len() <= self.first_inv.len()
            && self.path_inv.iter().zip(&self.first_inv).all(|(a, b)| a == b)
    }

    /// Lexicographic position of the current path's invariant sequence
    /// relative to the best leaf's: Less can still improve on the best,
    /// Greater never can.
    fn path_cmp_best(&self) -> Ordering {
        for (i, inv) in self.path_inv.iter().enumerate() {
            match self.best_inv.get(i) {
                None => return Ordering::Greater,
                Some(b) => match inv.cmp(b) {
                    Ordering::Equal => {}
                    o => return o,
                },
            }
        }
        Ordering::Equal
    }

    fn descend(&mut self, cells: Vec<Vec<u32>>, prefix: &mut Vec<u32>) -> Step {
        self.stats.nodes += 1;
        let depth = prefix.len();
        if self.stats.nodes_by_depth.len() <= depth {
            self.stats.nodes_by_depth.resize(depth + 1, 0);
        }
        self.stats.nodes_by_depth[depth] += 1;
        let mut cells = cells;
        self.refine(&mut cells);
        self.path_inv.truncate(depth);
        self.path_inv.push(Self::node_invariant(&cells));
        if self.first.is_some()
            && self.path_cmp_best() == Ordering::Greater
            && !self.path_matches_first()
        {
            // No leaf below this node can replace or equal the best leaf,
            // and none corresponds to an automorphism through the first.
            return Step::Continue;
        }
        let target = match Self::target_cell(&cells) {
            Some(t) => t,
            None => {
                let mut images = vec![0u32; self.nv];
                for (pos, c) in cells.iter().enumerate() {
                    images[c[0] as usize] = pos as u32;
                }
                let perm = Perm::from_images(images).expect("discrete partition is a bijection");
                let rows = self.leaf_rows(&perm);
                return self.visit_leaf(Leaf {
                    perm,
                    rows,
                    prefix: prefix.clone(),
                });
            }
        };
        let candidates = cells[target].clone();
        let mut explored: Vec<u32> = Vec::new();
        for &u in &candidates {
            if !explored.is_empty() {
                // Skip candidates equivalent to an explored one under an
                // automorphism fixing the current prefix pointwise.
                let fixing: Vec<Perm> = self
                    .auts
                    .iter()
                    .filter(|a| prefix.iter().all(|&x| a.apply(x) == x))
                    .cloned()
                    .collect();
                if !fixing.is_empty() {
                    let orbits = orbits_under(self.nv, &fixing);
                    let orbit_of = |x: u32| {
                        orbits
                            .iter()
                            .position(|o| o.binary_search(&x).is_ok())
                            .expect("orbits cover all vertices")
                    };
                    let ou = orbit_of(u);
                    if explored.iter().any(|&w| orbit_of(w) == ou) {
                        continue;
                    }
                }
            }
            explored.push(u);
            let mut child: Vec<Vec<u32>> = Vec::with_capacity(cells.len() + 1);
            for (ci, c) in cells.iter().enumerate() {
                if ci == target {
                    child.push(vec![u]);
                    child.push(c.iter().copied().filter(|&x| x != u).collect());
                } else {
                    child.push(c.clone());
                }
            }
            prefix.push(u);
            let step = self.descend(child, prefix);
            prefix.pop();
            if let Step::Unwind(to) = step {
                if to < depth {
                    return Step::Unwind(to);
                }
                // The discovered automorphism maps this branch onto an
                // explored sibling; move on to the next candidate.
            }
        }
        Step::Continue
    }

    fn visit_leaf(&mut self, leaf: Leaf) -> Step {
        self.stats.leaves += 1;
        let first = match self.first.as_ref() {
            None => {
                self.best = Some(Leaf {
                    perm: leaf.perm.clone(),
                    rows: leaf.rows.clone(),
                    prefix: leaf.prefix.clone(),
                });
                self.first_inv = self.path_inv.clone();
                self.best_inv = self.path_inv.clone();
                self.first = Some(leaf);
                return Step::Continue;
            }
            Some(f) => f,
        };
        // A leaf whose invariants and rows equal the first or the best leaf
        // yields an automorphism, and the search can unwind to where the two
        // paths diverged: DFS fully explored the matched branch before
        // reaching this one, and the automorphism maps everything left here
        // into that branch.
        if self.path_inv.len() == self.first_inv.len()
            && self.path_matches_first()
            && leaf.rows == first.rows
        {
            let a = leaf.perm.compose(&first.perm.inverse());
            let divergence = leaf
                .prefix
                .iter()
                .zip(&first.prefix)
                .take_while(|(x, y)| x == y)
                .count();
            if !a.is_identity() {
                self.stats.automorphisms += 1;
                self.auts.push(a);
            }
            return Step::Unwind(divergence);
        }
        let best = self.best.as_ref().expect("best is set at the first leaf");
        let order = match self.path_cmp_best() {
            Ordering::Equal if self.path_inv.len() < self.best_inv.len() => Ordering::Less,
            Ordering::Equal => leaf.rows.cmp(&best.rows),
            o => o,
        };
        match order {
            Ordering::Equal => {
                let a = leaf.perm.compose(&best.perm.inverse());
                let divergence = leaf
                    .prefix
                    .iter()
                    .zip(&best.prefix)
                    .take_while(|(x, y)| x == y)
                    .count();
                if !a.is_identity() {
                    self.stats.automorphisms += 1;
                    self.auts.push(a);
                }
                Step::Unwind(divergence)
            }
            Ordering::Less => {
                self.stats.best_updates += 1;
                self.best_inv = self.path_inv.clone();
                self.best = Some(leaf);
                Step::Continue
            }
            Ordering::Greater => Step::Continue,
        }
    }

    fn run(mut self, coloring: Option<&Coloring>) -> Canonical {
        let cells = self.initial_partition(coloring);
        let mut prefix = Vec::new();
        if self.nv > 0 {
            let _ = self.descend(cells, &mut prefix);
        }
        let v = self.num_points;
        let (point_map, block_map, rows) = match self.best.take() {
            Some(best) => {
                let point_map: Vec<u32> = (0..v as u32).map(|p| best.perm.apply(p)).collect();
                let block_map: Vec<u32> = (v..self.nv)
                    .map(|x| best.perm.apply(x as u32) - v as u32)
                    .collect();
                (point_map, block_map, best.rows)
            }
            None => (Vec::new(), Vec::new(), Vec::new()),
        };
        // Hash: version, shape, point colors in canonical position order,
        // then the relabeled incidence rows.
        let mut hasher = Sha256::new();
        hasher.update([CERT_VERSION]);
        hasher.update((v as u32).to_le_bytes());
        hasher.update(((self.nv - v) as u32).to_le_bytes());
        let mut color_at = vec![0u32; v];
        if let Some(c) = coloring {
            for (p, &col) in c.point_colors.iter().enumerate() {
                color_at[point_map[p] as usize] = col;
            }
        }
        for col in color_at {
            hasher.update(col.to_le_bytes());
        }
        hasher.update(&rows);
        let certificate = Certificate {
            version: CERT_VERSION,
            hex: hex::encode(hasher.finalize()),
        };
        // Restrict vertex automorphisms to points. Color-respecting leaves
        // always map points to points.
        let point_generators: Vec<Perm> = self
            .auts
            .iter()
            .map(|a| {
                Perm::from_images((0..v as u32).map(|p| a.apply(p)).collect())
                    .expect("automorphisms permute points among themselves")
            })
            .filter(|p| !p.is_identity())
            .collect();
        Canonical {
            point_map,
            block_map,
            certificate,
            point_generators,
            stats: self.stats,
        }
    }
}

/// Per-point Fano subplane counts for a projective plane, scaled by 9.
///
/// Plain degree refinement is useless on a projective plane: every point
/// lies on the same number of lines and every line carries the same number
/// of points, so the partition never splits and the search tree degenerates.
/// Counting Fano subplanes through each point breaks that symmetry for
/// non-Desarguesian planes of even order.
///
/// A quadrangle whose three diagonal points are collinear spans exactly a
/// Fano subplane: the seven points and seven spanned lines are closed under
/// joins. Enumerating over unordered line pairs (l1, l2) with common point
/// e, a point pair on each line forms such a quadrangle with e as one
/// diagonal point, and each Fano subplane arises from exactly 21 of these
/// configurations, with every one of its points taking a diagonal role
/// (e, f, or g) exactly 9 times. Incrementing only the diagonal points
/// therefore yields 9 times the number of Fano subplanes through each
/// point, which is invariant under isomorphism.
///
/// Returns None unless `s` is a projective plane by shape and linearity
/// (v = b = k^2 - k + 1 with uniform block size k, every point pair on one
/// line, every line pair meeting) with at most 400 points.
fn fano_point_counts(s: &IncidenceStructure) -> Option<Vec<u64>> {
    let v = s.num_points();
    let b = s.num_blocks();
    if v != b || v < 7 || v > 400 {
        return None;
    }
    let k = s.block(0).len();
    if k < 3 || v != k * k - k + 1 || s.blocks().iter().any(|bl| bl.len() != k) {
        return None;
    }
    // Join table: lt[p*v + q] is the unique line through points p and q.
    let mut lt = vec![u32::MAX; v * v];
    for (j, block) in s.blocks().iter().enumerate() {
        for (i, &p) in block.iter().enumerate() {
            for &q in &block[i + 1..] {
                let (pu, qu) = (p as usize, q as usize);
                if lt[pu * v + qu] != u32::MAX {
                    return None;
                }
                lt[pu * v + qu] = j as u32;
                lt[qu * v + pu] = j as u32;
            }
        }
    }
    if lt
        .iter()
        .enumerate()
        .any(|(i, &x)| x == u32::MAX && i / v != i % v)
    {
        return None;
    }
    // Meet table: mt[a*b + c] is the unique common point of lines a and c.
    let mut lines_through = vec![Vec::with_capacity(k); v];
    for (j, block) in s.blocks().iter().enumerate() {
        for &p in block {
            lines_through[p as usize].push(j as u32);
        }
    }
    let mut mt = vec![u32::MAX; b * b];
    for (p, ls) in lines_through.iter().enumerate() {
        for (i, &a) in ls.iter().enumerate() {
            for &c in &ls[i + 1..] {
                mt[a as usize * b + c as usize] = p as u32;
                mt[c as usize * b + a as usize] = p as u32;
            }
        }
    }
    if mt
        .iter()
        .enumerate()
        .any(|(i, &x)| x == u32::MAX && i / b != i % b)
    {
        return None;
    }
    // Line membership bitsets for the final collinearity test.
    let words = v.div_ceil(64);
    let mut bits = vec![0u64; b * words];
    for (j, block) in s.blocks().iter().enumerate() {
        for &p in block {
            bits[j * words + p as usize / 64] |= 1u64 << (p % 64);
        }
    }
    let mut counts = vec![0u64; v];
    let mut l1_pts = Vec::with_capacity(k - 1);
    let mut l2_pts = Vec::with_capacity(k - 1);
    for l1 in 0..b {
        for l2 in l1 + 1..b {
            let e = mt[l1 * b + l2];
            l1_pts.clear();
            l1_pts.extend(s.block(l1).iter().copied().filter(|&p| p != e));
            l2_pts.clear();
            l2_pts.extend(s.block(l2).iter().copied().filter(|&p| p != e));
            for (ai, &pa) in l1_pts.iter().enumerate() {
                let row_a = &lt[pa as usize * v..(pa as usize + 1) * v];
                for &pb in &l1_pts[ai + 1..] {
                    let row_b = &lt[pb as usize * v..(pb as usize + 1) * v];
                    for (ci, &pc) in l2_pts.iter().enumerate() {
                        let l_ac = row_a[pc as usize] as usize;
                        let l_bc = row_b[pc as usize] as usize;
                        for &pd in &l2_pts[ci + 1..] {
                            let l_ad = row_a[pd as usize] as usize;
                            let l_bd = row_b[pd as usize] as usize;
                            let f = mt[l_ac * b + l_bd];
                            let g = mt[l_ad * b + l_bc];
                            let ef = lt[e as usize * v + f as usize] as usize;
                            if bits[ef * words + g as usize / 64] >> (g % 64) & 1 == 1 {
                                counts[e as usize] += 1;
                                counts[f as usize] += 1;
                                counts[g as usize] += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Some(counts)
}

/// Structural coloring used when canonicalizing an uncolored projective
/// plane: points sharing a Fano count share a color. Dense ranks keep the
/// colors small and label-independent.
fn plane_invariant_coloring(s: &IncidenceStructure) -> Option<Coloring> {
    let counts = fano_point_counts(s)?;
    let mut distinct: Vec<u64> = counts.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let colors = counts
        .iter()
        .map(|c| distinct.binary_search(c).expect("count present") as u32)
        .collect();
    Some(Coloring::new(colors))
}

/// Run the canonical search once and return maps, certificate, and
/// automorphism generators together.
pub fn canonicalize(s: &IncidenceStructure, coloring: Option<&Coloring>) -> Canonical {
    let injected = match coloring {
        None => plane_invariant_coloring(s),
        Some(_) => None,
    };
    Search::new(s).run(coloring.or(injected.as_ref()))
}

/// Equitable refinement of the initial partition after individualizing the
/// given vertices in order (vertices `0..v` are points, `v..v+b` blocks).
/// Exposed for property tests; the search uses the same procedure.
#[doc(hidden)]
pub fn refined_cells(
    s: &IncidenceStructure,
    coloring: Option<&Coloring>,
    individualized: &[u32],
) -> Vec<Vec<u32>> {
    let search = Search::new(s);
    let mut cells = search.initial_partition(coloring);
    for &u in individualized {
        let at = cells
            .iter()
            .position(|c| c.contains(&u))
            .expect("vertex in some cell");
        if cells[at].len() > 1 {
            let rest: Vec<u32> = cells[at].iter().copied().filter(|&x| x != u).collect();
            cells[at] = vec![u];
            cells.insert(at + 1, rest);
        }
        search.refine(&mut cells);
    }
    search.refine(&mut cells);
    cells
}

/// The automorphism group of `s` acting on points, optionally restricted to
/// permutations preserving a point coloring.
///
/// Faithful because structures are simple: an automorphism fixing every
/// point fixes every block.
pub fn automorphism_group(s: &IncidenceStructure, coloring: Option<&Coloring>) -> PermGroup {
    let canonical = canonicalize(s, coloring);
    PermGroup::from_generators(s.num_points(), &canonical.point_generators)
        .expect("generators act on the points of s")
}

/// Canonical certificate of `s` (optionally colored): equal across all
/// relabelings, distinct between non-isomorphic structures.
pub fn canonical_certificate(s: &IncidenceStructure, coloring: Option<&Coloring>) -> Certificate {
    canonicalize(s, coloring).certificate
}

/// The subgroup of the automorphism group of `s` fixing `subset` setwise,
/// acting on points.
pub fn setwise_stabilizer(s: &IncidenceStructure, subset: &[u32]) -> PermGroup {
    let coloring = Coloring::from_subset(s.num_points(), subset);
    automorphism_group(s, Some(&coloring))
}

/// Test isomorphism and, on success, return an explicitly verified point and
/// block bijection mapping `s` onto `t`.
pub fn is_isomorphic(s: &IncidenceStructure, t: &IncidenceStructure) -> Option<Isomorphism> {
    if s.num_points() != t.num_points() || s.num_blocks() != t.num_blocks() {
        return None;
    }
    let cs = canonicalize(s, None);
    let ct = canonicalize(t, None);
    if cs.certificate != ct.certificate {
        return None;
    }
    // x -> canonical position -> t-point at that position.
    let mut t_point_at = vec![0u32; t.num_points()];
    for (p, &pos) in ct.point_map.iter().enumerate() {
        t_point_at[pos as usize] = p as u32;
    }
    let mut t_block_at = vec![0u32; t.num_blocks()];
    for (j, &pos) in ct.block_map.iter().enumerate() {
        t_block_at[pos as usize] = j as u32;
    }
    let point_map: Vec<u32> = cs
        .point_map
        .iter()
        .map(|&pos| t_point_at[pos as usize])
        .collect();
    let block_map: Vec<u32> = cs
        .block_map
        .iter()
        .map(|&pos| t_block_at[pos as usize])
        .collect();
    // Verify block-by-block before handing the maps out.
    for (j, block) in s.blocks().iter().enumerate() {
        let mut image: Vec<u32> = block.iter().map(|&p| point_map[p as usize]).collect();
        image.sort_unstable();
        if image != t.block(block_map[j] as usize) {
            return None;
        }
    }
    Some(Isomorphism { point_map, block_map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::{dual, fano_plane, verify_plane, IncidenceStructure};
    use num_bigint::BigUint;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn relabel(s: &IncidenceStructure, point_perm: &Perm) -> IncidenceStructure {
        let mut blocks: Vec<Vec<u32>> = s
            .blocks()
            .iter()
            .map(|b| {
                let mut img: Vec<u32> = b.iter().map(|&p| point_perm.apply(p)).collect();
                img.sort_unstable();
                img
            })
            .collect();
        // Shuffle block order too: certificates must not depend on it.
        blocks.reverse();
        IncidenceStructure::new(s.num_points(), blocks).unwrap()
    }

    #[test]
    fn fano_automorphism_group_order() {
        let fano = fano_plane();
        let g = automorphism_group(fano.structure(), None);
        assert_eq!(g.order(), BigUint::from(168u32));
    }

    /// The plane of order 2 is its own unique Fano subplane, so every point
    /// count equals the 9x scale factor exactly.
    #[test]
    fn fano_counts_on_the_fano_plane() {
        let fano = fano_plane();
        let counts = fano_point_counts(fano.structure()).expect("plane shaped");
        assert_eq!(counts, vec![9u64; 7]);
    }

    /// In odd characteristic no quadrangle has collinear diagonal points,
    /// so the plane of order 3 contains no Fano subplane at all.
    #[test]
    fn no_fano_subplanes_in_odd_characteristic() {
        // PG(2, 3) from homogeneous coordinates over GF(3): 13 points with
        // last nonzero coordinate 1, lines given by the dual vectors.
        let mut pts: Vec<[u32; 3]> = vec![[1, 0, 0]];
        for x in 0..3 {
            pts.push([x, 1, 0]);
        }
        for x in 0..3 {
            for y in 0..3 {
                pts.push([x, y, 1]);
            }
        }
        assert_eq!(pts.len(), 13);
        let blocks: Vec<Vec<u32>> = pts
            .iter()
            .map(|l| {
                (0..13)
                    .filter(|&p| {
                        let q = pts[p as usize];
                        (l[0] * q[0] + l[1] * q[1] + l[2] * q[2]) % 3 == 0
                    })
                    .collect()
            })
            .collect();
        let s = IncidenceStructure::new(13, blocks).unwrap();
        let plane = verify_plane(s, 3).unwrap();
        let counts = fano_point_counts(plane.structure()).expect("plane shaped");
        assert_eq!(counts, vec![0u64; 13]);
    }

    /// Structures that are not projective planes must not receive the
    /// structural coloring: the gate has to reject them.
    #[test]
    fn fano_counts_reject_non_planes() {
        let fano = fano_plane();
        assert!(fano_point_counts(&dual(fano.structure()).unwrap()).is_some());
        let pair = IncidenceStructure::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(fano_point_counts(&pair).is_none());
        let triangle =
            IncidenceStructure::new(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap();
        assert!(fano_point_counts(&triangle).is_none());
    }

    #[test]
    fn certificate_invariant_under_relabeling() {
        let fano = fano_plane();
        let base = canonical_certificate(fano.structure(), None);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let mut images: Vec<u32> = (0..7).collect();
            images.shuffle(&mut rng);
            let p = Perm::from_images(images).unwrap();
            let shuffled = relabel(fano.structure(), &p);
            assert_eq!(canonical_certificate(&shuffled, None), base);
        }
    }

    #[test]
    fn verified_isomorphism_and_self_duality() {
        let fano = fano_plane();
        let p = Perm::from_images(vec![3, 5, 1, 0, 6, 2, 4]).unwrap();
        let shuffled = relabel(fano.structure(), &p);
        let iso = is_isomorphic(fano.structure(), &shuffled).expect("relabeling is isomorphic");
        assert_eq!(iso.point_map.len(), 7);
        let d = dual(fano.structure()).unwrap();
        assert!(is_isomorphic(fano.structure(), &d).is_some());
    }

    #[test]
    fn non_isomorphic_structures_rejected() {
        let fano = fano_plane();
        // Same shape, one block bent out of line space: no longer a plane,
        // not isomorphic to one.
        let mut blocks = fano.lines().to_vec();
        blocks[6] = vec![0, 4, 6];
        let broken = IncidenceStructure::new(7, blocks).unwrap();
        assert!(is_isomorphic(fano.structure(), &broken).is_none());
    }

    #[test]
    fn setwise_stabilizer_of_a_line() {
        // The stabilizer of a line of the Fano plane has index 7.
        let fano = fano_plane();
        let g = setwise_stabilizer(fano.structure(), &fano.lines()[0]);
        assert_eq!(g.order(), BigUint::from(24u32));
        for gen in g.generators() {
            let mut img: Vec<u32> = fano.lines()[0].iter().map(|&p| gen.apply(p)).collect();
            img.sort_unstable();
            assert_eq!(img, fano.lines()[0]);
        }
    }

    #[test]
    fn colored_certificates_differ_from_uncolored() {
        let fano = fano_plane();
        let plain = canonical_certificate(fano.structure(), None);
        let colored = canonical_certificate(
            fano.structure(),
            Some(&Coloring::from_subset(7, &[0, 1, 2])),
        );
        assert_ne!(plain, colored);
        assert_eq!(plain.version, CERT_VERSION);
        assert_eq!(plain.hex.len(), 64);
    }

    #[test]
    fn affine_plane_of_order_three() {
        // AG(2,3): 9 points, 12 lines, automorphism group AGL(2,3) of order
        // 432; a handy second fixed point for the engine.
        let mut blocks = Vec::new();
        for m in 0..3u32 {
            for c in 0..3u32 {
                let mut line: Vec<u32> = (0..3u32).map(|x| 3 * ((m * x + c) % 3) + x).collect();
                line.sort_unstable();
                blocks.push(line);
            }
        }
        for x in 0..3u32 {
            blocks.push(vec![x, 3 + x, 6 + x]);
        }
        let s = IncidenceStructure::new(9, blocks).unwrap();
        let g = automorphism_group(&s, None);
        assert_eq!(g.order(), BigUint::from(432u32));
    }

    #[test]
    fn dual_certificate_reusable_for_planes() {
        let fano = fano_plane();
        let d = dual(fano.structure()).unwrap();
        assert!(verify_plane(d, 2).is_ok());
    }
}
