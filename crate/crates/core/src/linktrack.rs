//! Incremental tracking of partial vertex links.
//!
//! Each tetrahedron contributes four link triangles `(t, v)` and twelve link
//! edges `(t, v, f)` with `v` a vertex of face `f`. Gluing two faces glues
//! three pairs of link edges. Every partial link surface is kept a
//! punctured sphere: a gluing must keep the surface orientable, and two
//! edges of one surface may only be glued when they lie on the same
//! boundary cycle.
//!
//! A link edge `(t, v, f)` runs from its corner on tetrahedron edge `{v, a}`
//! (end 0) to its corner on `{v, b}` (end 1), where `a < b` are the other
//! two vertices of `f`. Boundary cycles live in a [`CyclicSkipList`] whose
//! nodes are link edges and whose node ends are these edge ends.

use std::fmt;

use thiserror::Error;

use crate::dsu::{Mark, Sign, SignedDsu, Union};
use crate::perm::{face_of, face_vertices, Perm4};
use crate::skiplist::{CyclicSkipList, End};
use crate::triangulation::{EdgeSlot, FaceSlot};

/// A vertex linking edge: the arc of face `face` of tetrahedron `tet` that
/// cuts off vertex `vertex`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinkEdge {
    pub tet: usize,
    pub vertex: u8,
    pub face: u8,
}

impl LinkEdge {
    pub fn new(tet: usize, vertex: u8, face: u8) -> Self {
        debug_assert!(vertex != 3 - face, "vertex {vertex} is not on face {face}");
        LinkEdge { tet, vertex, face }
    }

    #[inline]
    pub fn index(self) -> usize {
        let v = self.vertex as usize;
        let f = self.face as usize;
        let idx = if f < 3 - v { f } else { f - 1 };
        12 * self.tet + 3 * v + idx
    }

    pub fn from_index(i: usize) -> Self {
        let tet = i / 12;
        let v = ((i % 12) / 3) as u8;
        let idx = (i % 3) as u8;
        let face = if idx < 3 - v { idx } else { idx + 1 };
        LinkEdge { tet, vertex: v, face }
    }

    /// Link triangle index `4t + v`.
    #[inline]
    pub fn triangle(self) -> usize {
        4 * self.tet + self.vertex as usize
    }

    /// The other two vertices of the face, ascending: the corners at end 0
    /// and end 1.
    #[inline]
    pub fn corners(self) -> (u8, u8) {
        other_pair(self.vertex, self.face)
    }
}

impl fmt::Display for LinkEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.tet, self.vertex, self.face)
    }
}

#[inline]
fn other_pair(v: u8, f: u8) -> (u8, u8) {
    let fv = face_vertices(f);
    let mut it = fv.iter().copied().filter(|&w| w != v);
    let a = it.next().expect("face has three vertices");
    let b = it.next().expect("face has three vertices");
    (a, b)
}

/// `-1` when the edge's direction disagrees with the increasing cyclic
/// order of its triangle's corners.
#[inline]
fn delta(v: u8, f: u8) -> Sign {
    let (a, b) = other_pair(v, f);
    let lo = if v == 0 { 1 } else { 0 };
    let hi = if v == 3 { 2 } else { 3 };
    if a == lo && b == hi {
        Sign::Neg
    } else {
        Sign::Pos
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Error)]
pub enum PruneReason {
    #[error("a tetrahedron edge is identified with itself in reverse")]
    EdgeReversed,
    #[error("a vertex link is non-orientable")]
    Orientation,
    #[error("a vertex link has positive genus")]
    Genus,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("link edge {0} is not on the boundary")]
    NotBoundary(LinkEdge),
    #[error("cannot glue link edge {0} to itself")]
    SameEdge(LinkEdge),
    #[error("face slot {0} is already glued")]
    SlotGlued(FaceSlot),
    #[error("permutation {perm} does not map face {src} onto face {dst}")]
    FaceMismatch { src: u8, dst: u8, perm: Perm4 },
    #[error("undo out of order")]
    OutOfOrderUndo,
}

/// Result of an incremental gluing attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Glue<T> {
    Pass(T),
    Prune(PruneReason),
}

impl<T> Glue<T> {
    pub fn is_pass(&self) -> bool {
        matches!(self, Glue::Pass(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[must_use]
pub struct LinkToken(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[must_use]
pub struct FaceToken(usize);

#[derive(Clone, Copy, Debug)]
struct LinkRecord {
    x: u32,
    y: u32,
    merged: bool,
}

#[derive(Clone, Copy, Debug)]
struct FaceRecord {
    a: u32,
    b: u32,
    edge_mark: Mark,
    links: usize,
}

/// Partial vertex links of a partial triangulation under construction.
#[derive(Clone, Debug)]
pub struct LinkState {
    size: usize,
    triangles: SignedDsu,
    edges: SignedDsu,
    cycles: Option<CyclicSkipList>,
    boundary: Vec<bool>,
    slot_glued: Vec<bool>,
    boundary_count: usize,
    boundary_peak: usize,
    links: Vec<LinkRecord>,
    faces: Vec<FaceRecord>,
}

impl LinkState {
    /// Fresh state for `size` unglued tetrahedra. With `track_cycles` the
    /// genus test is active; without it only the union-find tests run.
    pub fn new(size: usize, track_cycles: bool, seed: u64) -> Self {
        let cycles = track_cycles.then(|| {
            let mut list = CyclicSkipList::new(12 * size, seed);
            for t in 0..size {
                for v in 0..4u8 {
                    let gaps = triangle_gaps(t, v);
                    let members: Vec<usize> =
                        (0..4u8).filter(|&f| f != 3 - v).map(|f| LinkEdge::new(t, v, f).index()).collect();
                    let _ = list.rewire(&[], &members, &gaps).expect("fresh triangle");
                }
            }
            list.clear_history();
            list
        });
        LinkState {
            size,
            triangles: SignedDsu::new(4 * size),
            edges: SignedDsu::new(6 * size),
            cycles,
            boundary: vec![true; 12 * size],
            slot_glued: vec![false; 4 * size],
            boundary_count: 12 * size,
            boundary_peak: 12 * size,
            links: Vec::new(),
            faces: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tracks_cycles(&self) -> bool {
        self.cycles.is_some()
    }

    /// Number of boundary link edges.
    pub fn boundary_count(&self) -> usize {
        self.boundary_count
    }

    pub fn boundary_peak(&self) -> usize {
        self.boundary_peak
    }

    pub fn is_boundary(&self, e: LinkEdge) -> bool {
        self.boundary[e.index()]
    }

    /// Number of connected link surfaces (triangle classes).
    pub fn surface_count(&self) -> usize {
        self.triangles.components()
    }

    /// Number of tetrahedron edge classes.
    pub fn edge_class_count(&self) -> usize {
        self.edges.components()
    }

    pub fn same_surface(&self, s: usize, t: usize) -> bool {
        self.triangles.same(s, t)
    }

    /// Glues link edge `x` to `y`, end `k` of `x` meeting end `k` of `y`
    /// (or end `1 - k` when `swap`).
    pub fn glue_link_edges(&mut self, x: LinkEdge, y: LinkEdge, swap: bool) -> Result<Glue<LinkToken>, LinkError> {
        if x == y {
            return Err(LinkError::SameEdge(x));
        }
        for e in [x, y] {
            if !self.boundary[e.index()] {
                return Err(LinkError::NotBoundary(e));
            }
        }
        Ok(self.glue_link_unchecked(x, y, swap))
    }

    fn glue_link_unchecked(&mut self, x: LinkEdge, y: LinkEdge, swap: bool) -> Glue<LinkToken> {
        let mu = Sign::from_bool_flip(swap);
        let rel = -delta(x.vertex, x.face).times(delta(y.vertex, y.face)).times(mu);
        let merged = match self.triangles.union(x.triangle(), y.triangle(), rel) {
            Union::Conflict => return Glue::Prune(PruneReason::Orientation),
            Union::Merged => true,
            Union::Redundant => false,
        };
        let (xi, yi) = (x.index(), y.index());
        if let Some(list) = self.cycles.as_mut() {
            if !merged && !list.same_cycle(xi, yi) {
                return Glue::Prune(PruneReason::Genus);
            }
            let gaps = surgery_gaps(list, xi, yi, swap);
            let _ = list.rewire_unchecked(&[xi, yi], &[], gaps.as_slice());
        }
        self.boundary[xi] = false;
        self.boundary[yi] = false;
        self.boundary_count -= 2;
        let token = LinkToken(self.links.len());
        self.links.push(LinkRecord { x: xi as u32, y: yi as u32, merged });
        Glue::Pass(token)
    }

    /// Reverses the most recent link-edge gluing.
    pub fn unglue_link_edges(&mut self, token: LinkToken) -> Result<(), LinkError> {
        if token.0 + 1 != self.links.len() {
            return Err(LinkError::OutOfOrderUndo);
        }
        if let Some(f) = self.faces.last() {
            // link gluings owned by a face are undone through the face
            if f.links > token.0 {
                return Err(LinkError::OutOfOrderUndo);
            }
        }
        self.pop_link();
        Ok(())
    }

    #[inline]
    fn pop_link(&mut self) {
        let r = self.links.pop().expect("a link gluing to undo");
        if let Some(list) = self.cycles.as_mut() {
            list.undo_last();
        }
        if r.merged {
            self.triangles.undo_last();
        }
        self.boundary[r.x as usize] = true;
        self.boundary[r.y as usize] = true;
        self.boundary_count += 2;
    }

    /// Glues face `a` to face `b` by `sigma`, running the edge-reversal test
    /// and then the three link-edge tests. A prune leaves the state as it
    /// was before the call.
    pub fn glue_faces(&mut self, a: FaceSlot, b: FaceSlot, sigma: Perm4) -> Result<Glue<FaceToken>, LinkError> {
        for s in [a, b] {
            if self.slot_glued[s.index()] {
                return Err(LinkError::SlotGlued(s));
            }
        }
        if sigma.face_image(a.face) != b.face {
            return Err(LinkError::FaceMismatch { src: a.face, dst: b.face, perm: sigma });
        }
        Ok(self.glue_faces_unchecked(a, b, sigma))
    }

    pub fn glue_faces_unchecked(&mut self, a: FaceSlot, b: FaceSlot, sigma: Perm4) -> Glue<FaceToken> {
        let edge_mark = self.edges.checkpoint();
        let links = self.links.len();
        let fv = face_vertices(a.face);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let (u, w) = (fv[i], fv[j]);
            let (su, sw) = (sigma.apply(u), sigma.apply(w));
            let rel = Sign::from_bool_flip(su > sw);
            let here = EdgeSlot::new(a.tet, u, w).index();
            let there = EdgeSlot::new(b.tet, su, sw).index();
            if self.edges.union(here, there, rel) == Union::Conflict {
                self.edges.rollback(edge_mark).expect("mark taken above");
                return Glue::Prune(PruneReason::EdgeReversed);
            }
        }
        // orientation for all three link-edge pairs first: these unions do
        // not depend on the boundary cycles, so a conflict costs no surgery
        let tri_mark = self.triangles.checkpoint();
        let mut pending = [(0usize, 0usize, false, false); 3];
        for (k, v) in fv.into_iter().enumerate() {
            let (p, q) = other_pair(v, a.face);
            let sv = sigma.apply(v);
            let swap = sigma.apply(p) > sigma.apply(q);
            let x = LinkEdge::new(a.tet, v, a.face);
            let y = LinkEdge::new(b.tet, sv, b.face);
            let rel = -delta(v, a.face).times(delta(sv, b.face)).times(Sign::from_bool_flip(swap));
            let merged = match self.triangles.union(x.triangle(), y.triangle(), rel) {
                Union::Conflict => {
                    self.triangles.rollback(tri_mark).expect("mark taken above");
                    self.edges.rollback(edge_mark).expect("mark taken above");
                    return Glue::Prune(PruneReason::Orientation);
                }
                Union::Merged => true,
                Union::Redundant => false,
            };
            pending[k] = (x.index(), y.index(), swap, merged);
        }
        for (k, &(xi, yi, swap, merged)) in pending.iter().enumerate() {
            if let Some(list) = self.cycles.as_mut() {
                if !merged && !list.same_cycle(xi, yi) {
                    for _ in 0..k {
                        list.undo_last();
                    }
                    for &(xj, yj, _, _) in &pending[..k] {
                        self.boundary[xj] = true;
                        self.boundary[yj] = true;
                        self.boundary_count += 2;
                    }
                    self.links.truncate(links);
                    self.triangles.rollback(tri_mark).expect("mark taken above");
                    self.edges.rollback(edge_mark).expect("mark taken above");
                    return Glue::Prune(PruneReason::Genus);
                }
                let gaps = surgery_gaps(list, xi, yi, swap);
                let _ = list.rewire_unchecked(&[xi, yi], &[], gaps.as_slice());
            }
            self.boundary[xi] = false;
            self.boundary[yi] = false;
            self.boundary_count -= 2;
            self.links.push(LinkRecord { x: xi as u32, y: yi as u32, merged });
        }
        self.slot_glued[a.index()] = true;
        self.slot_glued[b.index()] = true;
        self.boundary_peak = self.boundary_peak.max(self.boundary_count);
        let token = FaceToken(self.faces.len());
        self.faces.push(FaceRecord { a: a.index() as u32, b: b.index() as u32, edge_mark, links });
        Glue::Pass(token)
    }

    /// Reverses the most recent face gluing.
    pub fn unglue_faces(&mut self, token: FaceToken) -> Result<(), LinkError> {
        if token.0 + 1 != self.faces.len() || self.links.len() != self.faces[token.0].links + 3 {
            return Err(LinkError::OutOfOrderUndo);
        }
        self.unglue_last_face();
        Ok(())
    }

    #[inline]
    pub fn unglue_last_face(&mut self) {
        let r = self.faces.pop().expect("a face gluing to undo");
        while self.links.len() > r.links {
            self.pop_link();
        }
        self.edges.rollback(r.edge_mark).expect("journal is LIFO");
        self.slot_glued[r.a as usize] = false;
        self.slot_glued[r.b as usize] = false;
    }

    pub fn glued_faces(&self) -> usize {
        self.faces.len()
    }

    /// Boundary cycles as link edges in cyclic order, each starting from its
    /// least edge. Empty when cycles are not tracked.
    pub fn boundary_cycles(&self) -> Vec<Vec<LinkEdge>> {
        let Some(list) = self.cycles.as_ref() else { return Vec::new() };
        list.cycles().into_iter().map(|c| c.into_iter().map(|(n, _)| LinkEdge::from_index(n)).collect()).collect()
    }

    /// Link triangles grouped by surface, each group ascending, groups
    /// ordered by least member.
    pub fn surfaces(&self) -> Vec<Vec<usize>> {
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for t in 0..4 * self.size {
            by_root.entry(self.triangles.find(t).0).or_default().push(t);
        }
        let mut out: Vec<Vec<usize>> = by_root.into_values().collect();
        out.sort();
        out
    }

    /// Consistency check of the cycle structure against the boundary flags.
    pub fn audit(&self) -> Result<(), String> {
        let live = self.boundary.iter().filter(|&&b| b).count();
        if live != self.boundary_count {
            return Err(format!("boundary count {} but {live} boundary edges", self.boundary_count));
        }
        if let Some(list) = self.cycles.as_ref() {
            list.audit()?;
            for (i, &b) in self.boundary.iter().enumerate() {
                if list.is_live(i) != b {
                    return Err(format!("edge {} boundary flag disagrees with cycles", LinkEdge::from_index(i)));
                }
            }
        }
        Ok(())
    }

    /// Human-readable dump of surfaces and boundary cycles.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in self.surfaces() {
            let names: Vec<String> = s.iter().map(|t| format!("{}.{}", t / 4, t % 4)).collect();
            out.push_str(&format!("surface {}\n", names.join(" ")));
        }
        for c in self.boundary_cycles() {
            let names: Vec<String> = c.iter().map(|e| e.to_string()).collect();
            out.push_str(&format!("cycle {}\n", names.join(" ")));
        }
        out
    }
}

/// Bottom-level gaps closing the boundary of a fresh triangle `(t, v)`.
fn triangle_gaps(t: usize, v: u8) -> Vec<(End, End)> {
    let others: Vec<u8> = (0..4).filter(|&w| w != v).collect();
    let mut gaps = Vec::with_capacity(3);
    for &w in &others {
        // the two faces through v and w
        let ends: Vec<End> = others
            .iter()
            .filter(|&&z| z != w)
            .map(|&z| {
                let mut tri = [v, w, z];
                tri.sort_unstable();
                let f = face_of(tri);
                let e = LinkEdge::new(t, v, f);
                let side = if e.corners().0 == w { 0 } else { 1 };
                End::new(e.index(), side)
            })
            .collect();
        gaps.push((ends[0], ends[1]));
    }
    gaps
}

/// The new bottom-level gaps after link edges `x` and `y` are glued.
///
/// The ends of `x`, `y` and their boundary neighbours form a small graph:
/// neighbour links, plus the identification of `x`'s end `k` with `y`'s end
/// `k` (or `1 - k`). Each path between two surviving ends becomes a gap;
/// closed loops become interior vertices.
fn surgery_gaps(list: &CyclicSkipList, x: usize, y: usize, swap: bool) -> SmallGaps {
    let ident = |e: End| -> End {
        let side = if swap { 1 - e.side() } else { e.side() };
        if e.node() == x {
            End::new(y, side)
        } else {
            End::new(x, side)
        }
    };
    let inside = |e: End| e.node() == x || e.node() == y;
    let mut gaps = SmallGaps::default();
    let mut used = [End::default(); 4];
    let mut used_len = 0;
    for start in [End::new(x, 0), End::new(x, 1), End::new(y, 0), End::new(y, 1)] {
        let s = list.partner(start);
        if inside(s) || used[..used_len].contains(&s) {
            continue;
        }
        // walk s -> start ~ ident(start) -> partner ...
        let mut cur = start;
        let far = loop {
            let p = list.partner(ident(cur));
            if !inside(p) {
                break p;
            }
            cur = p;
        };
        used[used_len] = s;
        used[used_len + 1] = far;
        used_len += 2;
        gaps.push((s, far));
    }
    gaps
}

#[derive(Default)]
struct SmallGaps {
    items: [(End, End); 2],
    len: usize,
}

impl SmallGaps {
    fn push(&mut self, g: (End, End)) {
        self.items[self.len] = g;
        self.len += 1;
    }

    fn as_slice(&self) -> &[(End, End)] {
        &self.items[..self.len]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_table;
    use crate::triangulation::FaceSlot;

    #[test]
    fn link_edge_indexing() {
        for i in 0..24 {
            let e = LinkEdge::from_index(i);
            assert_ne!(e.vertex, 3 - e.face);
            assert_eq!(e.index(), i);
        }
    }

    #[test]
    fn fresh_state_has_triangle_cycles() {
        let s = LinkState::new(1, true, 0);
        let cycles = s.boundary_cycles();
        assert_eq!(cycles.len(), 4);
        assert!(cycles.iter().all(|c| c.len() == 3));
        assert_eq!(s.boundary_count(), 12);
        s.audit().unwrap();
    }

    #[test]
    fn torus_table_prunes_for_genus() {
        let tri = parse_table(
            "A | C: 013 | B: 012 | A: 312 | A: 230
             B | A: 013 | C: 120 | C: 231 | C: 302
             C | B: 301 | A: 012 | B: 231 | B: 302",
        )
        .unwrap();
        let mut s = LinkState::new(3, true, 0);
        let mut outcome = None;
        for i in 0..12 {
            let a = FaceSlot::from_index(i);
            let g = tri.gluing(a).unwrap();
            if g.dest.index() < i {
                continue;
            }
            match s.glue_faces(a, g.dest, g.perm).unwrap() {
                Glue::Pass(_) => s.audit().unwrap(),
                Glue::Prune(r) => {
                    outcome = Some(r);
                    break;
                }
            }
        }
        assert_eq!(outcome, Some(PruneReason::Genus));
    }

    #[test]
    fn glue_then_unglue_restores() {
        let mut s = LinkState::new(2, true, 5);
        let before = s.dump();
        let sigma = Perm4::IDENTITY;
        let t = match s.glue_faces(FaceSlot::new(0, 0), FaceSlot::new(1, 0), sigma).unwrap() {
            Glue::Pass(t) => t,
            other => panic!("{other:?}"),
        };
        assert_eq!(s.boundary_count(), 18);
        assert_eq!(s.surface_count(), 5);
        s.unglue_faces(t).unwrap();
        assert_eq!(s.dump(), before);
        assert_eq!(s.boundary_count(), 24);
    }

    #[test]
    fn contract_errors() {
        let mut s = LinkState::new(1, true, 0);
        let x = LinkEdge::new(0, 0, 0);
        assert_eq!(s.glue_link_edges(x, x, false), Err(LinkError::SameEdge(x)));
        let t = match s.glue_faces(FaceSlot::new(0, 0), FaceSlot::new(0, 1), Perm4::swap(2, 3)).unwrap() {
            Glue::Pass(t) => t,
            other => panic!("{other:?}"),
        };
        assert_eq!(
            s.glue_faces(FaceSlot::new(0, 0), FaceSlot::new(0, 2), Perm4::swap(1, 3)),
            Err(LinkError::SlotGlued(FaceSlot::new(0, 0)))
        );
        assert!(matches!(s.glue_link_edges(x, LinkEdge::new(0, 1, 0), false), Err(LinkError::NotBoundary(_))));
        s.unglue_faces(t).unwrap();
        assert_eq!(s.unglue_faces(t), Err(LinkError::OutOfOrderUndo));
    }
}
