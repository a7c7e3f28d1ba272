//! Naive ground-truth checks.
//!
//! Everything here is recomputed from the gluing table by plain closure,
//! with no shared state or code with the incremental structures, so that
//! the two can be compared against each other.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::isosig::iso_signature;
use crate::perm::{face_maps, face_vertices, Perm4};
use crate::triangulation::{EdgeSlot, FaceSlot, Isomorphism, TriError, Triangulation};

/// A link edge as `(tet, vertex, face)`.
pub type LinkEdgeId = (usize, u8, u8);

/// The link of one vertex of the triangulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkSurfaceReport {
    /// Link triangles `(tet, vertex)` in this link, ascending.
    pub triangles: Vec<(usize, u8)>,
    pub vertices: usize,
    pub edges: usize,
    pub boundary_edges: usize,
    /// Boundary curves in cyclic order, each normalised by [`normalize_cycle`].
    pub boundary_cycles: Vec<Vec<LinkEdgeId>>,
    pub orientable: bool,
    pub euler: i64,
    /// For orientable links: `(2 - boundary curves - euler) / 2`.
    pub genus: Option<i64>,
}

impl LinkSurfaceReport {
    pub fn is_sphere(&self) -> bool {
        self.boundary_edges == 0 && self.orientable && self.euler == 2
    }

    pub fn is_punctured_sphere(&self) -> bool {
        self.orientable && self.genus == Some(0)
    }
}

/// Naive union-find: no ranks, no compression.
struct Closure {
    parent: Vec<usize>,
}

impl Closure {
    fn new(n: usize) -> Self {
        Closure { parent: (0..n).collect() }
    }

    fn root(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn join(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn edge_id(t: usize, v: u8, f: u8) -> usize {
    16 * t + 4 * v as usize + f as usize
}

fn corner_id(t: usize, v: u8, w: u8) -> usize {
    16 * t + 4 * v as usize + w as usize
}

/// The two other vertices of face `f` besides `v`, ascending.
fn ends_of(v: u8, f: u8) -> (u8, u8) {
    let fv = face_vertices(f);
    match fv.iter().position(|&w| w == v) {
        Some(0) => (fv[1], fv[2]),
        Some(1) => (fv[0], fv[2]),
        _ => (fv[0], fv[1]),
    }
}

fn faces_through(v: u8) -> impl Iterator<Item = u8> {
    (0..4u8).filter(move |&f| face_vertices(f).contains(&v))
}

/// Rotates and possibly reverses a cyclic sequence to its least form.
pub fn normalize_cycle<T: Ord + Clone>(cycle: &[T]) -> Vec<T> {
    let k = cycle.len();
    let mut best: Option<Vec<T>> = None;
    for rev in [false, true] {
        for r in 0..k {
            let c: Vec<T> = (0..k)
                .map(|i| if rev { cycle[(r + k - i) % k].clone() } else { cycle[(r + i) % k].clone() })
                .collect();
            if best.as_ref().map_or(true, |b| c < *b) {
                best = Some(c);
            }
        }
    }
    best.unwrap_or_default()
}

/// Builds every vertex link from scratch. One report per vertex class,
/// ordered by least triangle.
pub fn build_links(tri: &Triangulation) -> Vec<LinkSurfaceReport> {
    let n = tri.size();
    let mut tri_join = Closure::new(4 * n);
    let mut edge_join = Closure::new(16 * n);
    let mut corner_join = Closure::new(16 * n);
    // link edge -> (partner link edge, whether x's direction p->q maps to
    // the partner's low->high direction)
    let mut glued: Vec<Option<(LinkEdgeId, bool)>> = vec![None; 16 * n];
    for s in 0..4 * n {
        let a = FaceSlot::from_index(s);
        let Some(g) = tri.gluing(a) else { continue };
        for v in face_vertices(a.face) {
            let sv = g.perm.apply(v);
            tri_join.join(4 * a.tet + v as usize, 4 * g.dest.tet + sv as usize);
            edge_join.join(edge_id(a.tet, v, a.face), edge_id(g.dest.tet, sv, g.dest.face));
            for w in face_vertices(a.face) {
                if w != v {
                    corner_join.join(corner_id(a.tet, v, w), corner_id(g.dest.tet, sv, g.perm.apply(w)));
                }
            }
            let (p, q) = ends_of(v, a.face);
            glued[edge_id(a.tet, v, a.face)] = Some(((g.dest.tet, sv, g.dest.face), g.perm.apply(p) < g.perm.apply(q)));
        }
    }

    // roots are least members, so groups come out ordered by least triangle
    let mut groups: Vec<Vec<(usize, u8)>> = vec![Vec::new(); 4 * n];
    for t in 0..n {
        for v in 0..4u8 {
            groups[tri_join.root(4 * t + v as usize)].push((t, v));
        }
    }

    let mut reports = Vec::new();
    let mut vertex_roots = Vec::new();
    let mut edge_roots = Vec::new();
    for members in groups.into_iter().filter(|g| !g.is_empty()) {
        vertex_roots.clear();
        edge_roots.clear();
        let mut boundary = Vec::new();
        for &(t, v) in &members {
            for w in (0..4u8).filter(|&w| w != v) {
                vertex_roots.push(corner_join.root(corner_id(t, v, w)));
            }
            for f in faces_through(v) {
                edge_roots.push(edge_join.root(edge_id(t, v, f)));
                if glued[edge_id(t, v, f)].is_none() {
                    boundary.push((t, v, f));
                }
            }
        }
        for roots in [&mut vertex_roots, &mut edge_roots] {
            roots.sort_unstable();
            roots.dedup();
        }
        let f_count = members.len() as i64;
        let euler = vertex_roots.len() as i64 - edge_roots.len() as i64 + f_count;
        let orientable = link_orientable(&members, &glued);
        let boundary_cycles = trace_boundary(&boundary, &corner_join);
        let genus = orientable.then(|| (2 - boundary_cycles.len() as i64 - euler) / 2);
        reports.push(LinkSurfaceReport {
            triangles: members,
            vertices: vertex_roots.len(),
            edges: edge_roots.len(),
            boundary_edges: boundary.len(),
            boundary_cycles,
            orientable,
            euler,
            genus,
        });
    }
    reports
}

/// Direction of the link edge `(v, f)` induced by the triangle's
/// orientation `0 -> 1 -> 2 -> 0` on its corners sorted ascending: true when
/// it runs from the lower to the higher corner.
fn induced_forward(v: u8, f: u8) -> bool {
    let mut corners = [0u8; 3];
    for (slot, w) in corners.iter_mut().zip((0..4).filter(|&w| w != v)) {
        *slot = w;
    }
    let (p, q) = ends_of(v, f);
    let i = corners.iter().position(|&c| c == p).unwrap();
    corners[(i + 1) % 3] == q
}

fn link_orientable(members: &[(usize, u8)], glued: &[Option<(LinkEdgeId, bool)>]) -> bool {
    // sign per link triangle 4t+v
    let mut sign: Vec<Option<bool>> = vec![None; glued.len() / 4];
    let Some(&first) = members.first() else { return true };
    sign[4 * first.0 + first.1 as usize] = Some(true);
    let mut queue = VecDeque::from([first]);
    while let Some((t, v)) = queue.pop_front() {
        let s = sign[4 * t + v as usize].expect("queued triangles are signed");
        for f in faces_through(v) {
            let Some(((t2, v2, f2), keeps)) = glued[edge_id(t, v, f)] else { continue };
            // direction (low->high on this edge) induced by this triangle
            let here = induced_forward(v, f) == s;
            // the same direction seen on the partner edge
            let mapped = here == keeps;
            // the partner's own induced direction must be the opposite
            let there = induced_forward(v2, f2);
            let want = there == !mapped;
            match sign[4 * t2 + v2 as usize] {
                None => {
                    sign[4 * t2 + v2 as usize] = Some(want);
                    queue.push_back((t2, v2));
                }
                Some(got) if got != want => return false,
                _ => {}
            }
        }
    }
    true
}

fn trace_boundary(boundary: &[LinkEdgeId], corners: &Closure) -> Vec<Vec<LinkEdgeId>> {
    let corner_of = |e: LinkEdgeId, side: u8| {
        let (p, q) = ends_of(e.1, e.2);
        corners.root(corner_id(e.0, e.1, if side == 0 { p } else { q }))
    };
    let mut at: BTreeMap<usize, Vec<(LinkEdgeId, u8)>> = BTreeMap::new();
    for &e in boundary {
        for side in 0..2 {
            at.entry(corner_of(e, side)).or_default().push((e, side));
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &e in boundary {
        if seen.contains(&e) {
            continue;
        }
        let mut cycle = vec![e];
        seen.insert(e);
        let (mut cur, mut side) = (e, 1u8);
        loop {
            let here = &at[&corner_of(cur, side)];
            let next = here.iter().find(|&&(x, s)| !(x == cur && s == side)).copied();
            let Some((nx, ns)) = next else { break };
            if nx == e {
                break;
            }
            if !seen.insert(nx) {
                break;
            }
            cycle.push(nx);
            cur = nx;
            side = 1 - ns;
        }
        out.push(normalize_cycle(&cycle));
    }
    out.sort();
    out
}

/// Outcome of the direct edge-identification closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeCheck {
    Ok,
    /// An edge class containing some edge identified with itself in reverse.
    Reversed(Vec<EdgeSlot>),
}

/// Closes edge identifications with directions by repeated relaxation.
pub fn check_edges(tri: &Triangulation) -> EdgeCheck {
    let n = tri.size();
    // orient[e] = Some(true) when e agrees with its class seed
    let mut orient: Vec<Option<bool>> = vec![None; 6 * n];
    let mut class: Vec<usize> = (0..6 * n).collect();
    // each edge slot lies on two faces, and each gluing is seen from both
    // sides, so at most four entries per slot
    let mut links: Vec<[(usize, bool); 4]> = vec![[(0, false); 4]; 6 * n];
    let mut degree = vec![0usize; 6 * n];
    for s in 0..4 * n {
        let a = FaceSlot::from_index(s);
        let Some(g) = tri.gluing(a) else { continue };
        let fv = face_vertices(a.face);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let (u, w) = (fv[i], fv[j]);
            let here = EdgeSlot::new(a.tet, u, w).index();
            let there = EdgeSlot::new(g.dest.tet, g.perm.apply(u), g.perm.apply(w)).index();
            let flips = g.perm.apply(u) > g.perm.apply(w);
            for (x, y) in [(here, there), (there, here)] {
                links[x][degree[x]] = (y, flips);
                degree[x] += 1;
            }
        }
    }
    for seed in 0..6 * n {
        if orient[seed].is_some() {
            continue;
        }
        orient[seed] = Some(true);
        let mut stack = vec![seed];
        let mut members = vec![seed];
        let mut bad = false;
        while let Some(e) = stack.pop() {
            let o = orient[e].unwrap();
            for &(f, flips) in &links[e][..degree[e]] {
                let want = o != flips;
                match orient[f] {
                    None => {
                        orient[f] = Some(want);
                        class[f] = seed;
                        members.push(f);
                        stack.push(f);
                    }
                    Some(got) if got != want => bad = true,
                    _ => {}
                }
            }
        }
        if bad {
            members.sort_unstable();
            return EdgeCheck::Reversed(members.into_iter().map(EdgeSlot::from_index).collect());
        }
    }
    EdgeCheck::Ok
}

/// Why a complete triangulation is or is not a 3-manifold triangulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ManifoldVerdict {
    Manifold,
    BadLink(LinkSurfaceReport),
    ReversedEdge(Vec<EdgeSlot>),
}

impl ManifoldVerdict {
    pub fn is_manifold(&self) -> bool {
        matches!(self, ManifoldVerdict::Manifold)
    }
}

/// Checks that every vertex link is a sphere and no edge is reversed.
pub fn is_3manifold(tri: &Triangulation) -> Result<ManifoldVerdict, TriError> {
    if !tri.is_complete() {
        return Err(TriError::Incomplete);
    }
    if let EdgeCheck::Reversed(c) = check_edges(tri) {
        return Ok(ManifoldVerdict::ReversedEdge(c));
    }
    for r in build_links(tri) {
        if !r.is_sphere() {
            return Ok(ManifoldVerdict::BadLink(r));
        }
    }
    Ok(ManifoldVerdict::Manifold)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidateError {
    #[error("brute-force enumeration is limited to {max} tetrahedra, got {got}")]
    TooLarge { got: usize, max: usize },
}

/// Largest size accepted by the brute-force enumerators.
pub const BRUTE_MAX: usize = 2;

/// Calls `visit` on every complete labelled triangulation of `n`
/// tetrahedra: all face pairings and all six maps per pair.
pub fn for_each_gluing(n: usize, visit: &mut dyn FnMut(&Triangulation)) {
    fn rec(tri: &mut Triangulation, visit: &mut dyn FnMut(&Triangulation)) {
        let n = tri.size();
        let Some(s) = (0..4 * n).find(|&s| !tri.is_glued(FaceSlot::from_index(s))) else {
            visit(tri);
            return;
        };
        let a = FaceSlot::from_index(s);
        for s2 in s + 1..4 * n {
            let b = FaceSlot::from_index(s2);
            if tri.is_glued(b) {
                continue;
            }
            for p in face_maps(a.face, b.face) {
                tri.glue(a, b, p).expect("both free");
                rec(tri, visit);
                tri.unglue(a).expect("just glued");
            }
        }
    }
    let mut tri = Triangulation::new(n);
    rec(&mut tri, visit);
}

fn key(tri: &Triangulation) -> Vec<u16> {
    (0..4 * tri.size())
        .map(|s| {
            let g = tri.gluing(FaceSlot::from_index(s)).expect("complete");
            (g.dest.index() * 24 + g.perm.index()) as u16
        })
        .collect()
}

fn all_isomorphisms(n: usize) -> Vec<Isomorphism> {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for i in 0..n {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }
    let mut maps: Vec<Vec<Perm4>> = vec![vec![]];
    for _ in 0..n {
        maps = maps.into_iter().flat_map(|m| Perm4::all().map(move |p| [m.clone(), vec![p]].concat())).collect();
    }
    let mut out = Vec::new();
    for tet_image in perms(n) {
        for vm in &maps {
            out.push(Isomorphism { tet_image: tet_image.clone(), vertex_maps: vm.clone() });
        }
    }
    out
}

/// One representative per isomorphism class of connected complete
/// triangulations accepted by `keep`, found by marking whole orbits.
pub fn brute_classes(n: usize, keep: &dyn Fn(&Triangulation) -> bool) -> Result<Vec<Triangulation>, ValidateError> {
    if n == 0 || n > BRUTE_MAX {
        return Err(ValidateError::TooLarge { got: n, max: BRUTE_MAX });
    }
    let isos = all_isomorphisms(n);
    let mut seen: HashSet<Vec<u16>> = HashSet::new();
    let mut reps = Vec::new();
    for_each_gluing(n, &mut |tri| {
        if !tri.is_connected() || seen.contains(&key(tri)) {
            return;
        }
        for iso in &isos {
            seen.insert(key(&tri.relabel(iso)));
        }
        if keep(tri) {
            reps.push(tri.clone());
        }
    });
    Ok(reps)
}

/// Signatures of all closed 3-manifold triangulations of size `n`, by brute
/// force.
pub fn brute_census(n: usize) -> Result<BTreeSet<String>, ValidateError> {
    let reps = brute_classes(n, &|t| is_3manifold(t).map(|v| v.is_manifold()).unwrap_or(false))?;
    Ok(reps.iter().map(|t| iso_signature(t).expect("closed and connected")).collect())
}
