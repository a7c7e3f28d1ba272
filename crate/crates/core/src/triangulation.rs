//! Gluing tables for (possibly partial) combinatorial triangulations.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{face_vertices, Perm4};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriError {
    #[error("slot {0} is out of range")]
    SlotOutOfRange(FaceSlot),
    #[error("slot {0} is already glued")]
    AlreadyGlued(FaceSlot),
    #[error("slot {0} is not glued")]
    NotGlued(FaceSlot),
    #[error("slot {0} cannot be glued to itself")]
    SelfGluing(FaceSlot),
    #[error("permutation {perm} does not carry face {src} onto face {dst}")]
    FaceMismatch { src: FaceSlot, dst: FaceSlot, perm: Perm4 },
    #[error("gluing at slot {0} is not an involution")]
    NotInvolution(FaceSlot),
    #[error("triangulation is incomplete")]
    Incomplete,
    #[error("triangulation is disconnected")]
    Disconnected,
    #[error("triangulation has no tetrahedra")]
    Empty,
}

/// One face of one tetrahedron.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct FaceSlot {
    pub tet: usize,
    pub face: u8,
}

impl FaceSlot {
    pub fn new(tet: usize, face: u8) -> Self {
        FaceSlot { tet, face }
    }

    #[inline]
    pub fn index(self) -> usize {
        4 * self.tet + self.face as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        FaceSlot { tet: i / 4, face: (i % 4) as u8 }
    }
}

impl fmt::Display for FaceSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.tet, self.face)
    }
}

/// Where a face slot is glued, and how.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Gluing {
    pub dest: FaceSlot,
    pub perm: Perm4,
}

const EDGE_PAIRS: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[inline]
pub fn edge_number(a: u8, b: u8) -> usize {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    match (lo, hi) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("not an edge: {a}{b}"),
    }
}

/// One of the six edges of a tetrahedron, directed from its lower vertex to
/// its higher vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeSlot {
    pub tet: usize,
    pub low: u8,
    pub high: u8,
}

impl EdgeSlot {
    pub fn new(tet: usize, a: u8, b: u8) -> Self {
        let (low, high) = if a < b { (a, b) } else { (b, a) };
        EdgeSlot { tet, low, high }
    }

    #[inline]
    pub fn index(self) -> usize {
        6 * self.tet + edge_number(self.low, self.high)
    }

    pub fn from_index(i: usize) -> Self {
        let (low, high) = EDGE_PAIRS[i % 6];
        EdgeSlot { tet: i / 6, low, high }
    }
}

impl fmt::Display for EdgeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}{}", self.tet, self.low, self.high)
    }
}

/// An equivalence class of tetrahedron edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeClass {
    pub members: Vec<EdgeSlot>,
    /// False when some member is identified with itself in reverse.
    pub consistent: bool,
}

/// A relabelling of tetrahedra and of the vertices within each tetrahedron.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    /// New index of each old tetrahedron.
    pub tet_image: Vec<usize>,
    /// Old vertex labels to new vertex labels, per old tetrahedron.
    pub vertex_maps: Vec<Perm4>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Triangulation {
    size: usize,
    gluings: Vec<Option<Gluing>>,
}

impl Triangulation {
    /// `size` tetrahedra with every face unglued.
    pub fn new(size: usize) -> Self {
        Triangulation { size, gluings: vec![None; 4 * size] }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn gluing(&self, slot: FaceSlot) -> Option<Gluing> {
        self.gluings.get(slot.index()).copied().flatten()
    }

    #[inline]
    pub fn is_glued(&self, slot: FaceSlot) -> bool {
        self.gluing(slot).is_some()
    }

    fn check_slot(&self, slot: FaceSlot) -> Result<(), TriError> {
        if slot.tet >= self.size || slot.face > 3 {
            Err(TriError::SlotOutOfRange(slot))
        } else {
            Ok(())
        }
    }

    /// Glues `a` to `b` so that vertex `v` of `a.tet` meets `perm(v)` of
    /// `b.tet`. Both directions of the table are written.
    pub fn glue(&mut self, a: FaceSlot, b: FaceSlot, perm: Perm4) -> Result<(), TriError> {
        self.check_slot(a)?;
        self.check_slot(b)?;
        if a == b {
            return Err(TriError::SelfGluing(a));
        }
        if perm.face_image(a.face) != b.face {
            return Err(TriError::FaceMismatch { src: a, dst: b, perm });
        }
        if self.is_glued(a) {
            return Err(TriError::AlreadyGlued(a));
        }
        if self.is_glued(b) {
            return Err(TriError::AlreadyGlued(b));
        }
        self.gluings[a.index()] = Some(Gluing { dest: b, perm });
        self.gluings[b.index()] = Some(Gluing { dest: a, perm: perm.inverse() });
        Ok(())
    }

    /// Removes the gluing at `a` (and its partner), returning it.
    pub fn unglue(&mut self, a: FaceSlot) -> Result<Gluing, TriError> {
        self.check_slot(a)?;
        let g = self.gluing(a).ok_or(TriError::NotGlued(a))?;
        self.gluings[a.index()] = None;
        self.gluings[g.dest.index()] = None;
        Ok(g)
    }

    pub fn glued_count(&self) -> usize {
        self.gluings.iter().filter(|g| g.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.gluings.iter().all(Option::is_some)
    }

    /// Checks that the gluing table is a fixed-point-free involution that
    /// respects faces.
    pub fn audit(&self) -> Result<(), TriError> {
        for i in 0..4 * self.size {
            let a = FaceSlot::from_index(i);
            if let Some(g) = self.gluing(a) {
                self.check_slot(g.dest)?;
                if g.dest == a {
                    return Err(TriError::SelfGluing(a));
                }
                if g.perm.face_image(a.face) != g.dest.face {
                    return Err(TriError::FaceMismatch { src: a, dst: g.dest, perm: g.perm });
                }
                match self.gluing(g.dest) {
                    Some(back) if back.dest == a && back.perm == g.perm.inverse() => {}
                    _ => return Err(TriError::NotInvolution(a)),
                }
            }
        }
        Ok(())
    }

    /// True when the face pairing graph is connected.
    pub fn is_connected(&self) -> bool {
        if self.size == 0 {
            return true;
        }
        let mut seen = vec![false; self.size];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(t) = queue.pop_front() {
            for f in 0..4 {
                if let Some(g) = self.gluing(FaceSlot::new(t, f)) {
                    if !seen[g.dest.tet] {
                        seen[g.dest.tet] = true;
                        queue.push_back(g.dest.tet);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub(crate) fn require_closed_connected(&self) -> Result<(), TriError> {
        if self.size == 0 {
            return Err(TriError::Empty);
        }
        if !self.is_complete() {
            return Err(TriError::Incomplete);
        }
        if !self.is_connected() {
            return Err(TriError::Disconnected);
        }
        Ok(())
    }

    /// Classes of `(tet, vertex)` pairs under the identifications induced by
    /// the current gluings. Classes are sorted, and listed by least member.
    pub fn vertex_classes(&self) -> Vec<Vec<(usize, u8)>> {
        let mut uf = PlainUnionFind::new(4 * self.size);
        for i in 0..4 * self.size {
            let a = FaceSlot::from_index(i);
            if let Some(g) = self.gluing(a) {
                for v in face_vertices(a.face) {
                    uf.union(4 * a.tet + v as usize, 4 * g.dest.tet + g.perm.apply(v) as usize);
                }
            }
        }
        uf.classes().into_iter().map(|c| c.into_iter().map(|x| (x / 4, (x % 4) as u8)).collect()).collect()
    }

    /// Classes of tetrahedron edges, each flagged with whether the induced
    /// identifications are direction-consistent.
    pub fn edge_classes(&self) -> Vec<EdgeClass> {
        let m = 6 * self.size;
        // relative direction of each edge slot to its class root, by BFS
        let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); m];
        for i in 0..4 * self.size {
            let a = FaceSlot::from_index(i);
            if let Some(g) = self.gluing(a) {
                let fv = face_vertices(a.face);
                for (x, y) in [(fv[0], fv[1]), (fv[0], fv[2]), (fv[1], fv[2])] {
                    let (px, py) = (g.perm.apply(x), g.perm.apply(y));
                    let src = EdgeSlot::new(a.tet, x, y).index();
                    let dst = EdgeSlot::new(g.dest.tet, px, py).index();
                    let flip = px > py;
                    adj[src].push((dst, flip));
                }
            }
        }
        let mut dir: Vec<Option<bool>> = vec![None; m];
        let mut out = Vec::new();
        for start in 0..m {
            if dir[start].is_some() {
                continue;
            }
            dir[start] = Some(false);
            let mut members = vec![start];
            let mut consistent = true;
            let mut queue = VecDeque::from([start]);
            while let Some(e) = queue.pop_front() {
                let de = dir[e].unwrap();
                for &(f, flip) in &adj[e] {
                    let want = de ^ flip;
                    match dir[f] {
                        None => {
                            dir[f] = Some(want);
                            members.push(f);
                            queue.push_back(f);
                        }
                        Some(d) if d != want => consistent = false,
                        _ => {}
                    }
                }
            }
            members.sort_unstable();
            out.push(EdgeClass { members: members.into_iter().map(EdgeSlot::from_index).collect(), consistent });
        }
        out
    }

    /// Sign-propagation orientability test. Odd gluings keep the tetrahedron
    /// sign, even gluings flip it.
    pub fn is_orientable(&self) -> Result<bool, TriError> {
        self.require_closed_connected()?;
        let mut sign = vec![0i8; self.size];
        sign[0] = 1;
        let mut queue = VecDeque::from([0usize]);
        while let Some(t) = queue.pop_front() {
            for f in 0..4 {
                let g = self.gluing(FaceSlot::new(t, f)).expect("complete");
                let want = if g.perm.is_even() { -sign[t] } else { sign[t] };
                match sign[g.dest.tet] {
                    0 => {
                        sign[g.dest.tet] = want;
                        queue.push_back(g.dest.tet);
                    }
                    s if s != want => return Ok(false),
                    _ => {}
                }
            }
        }
        Ok(true)
    }

    /// Applies a relabelling.
    pub fn relabel(&self, iso: &Isomorphism) -> Triangulation {
        let mut out = Triangulation::new(self.size);
        for i in 0..4 * self.size {
            let a = FaceSlot::from_index(i);
            if let Some(g) = self.gluing(a) {
                let phi_src = iso.vertex_maps[a.tet];
                let phi_dst = iso.vertex_maps[g.dest.tet];
                let new_src = FaceSlot::new(iso.tet_image[a.tet], phi_src.face_image(a.face));
                let new_dst = FaceSlot::new(iso.tet_image[g.dest.tet], phi_dst.face_image(g.dest.face));
                let perm = phi_dst.compose(g.perm).compose(phi_src.inverse());
                out.gluings[new_src.index()] = Some(Gluing { dest: new_dst, perm });
            }
        }
        out
    }
}

/// Minimal union-find used for class computations on immutable tables.
struct PlainUnionFind {
    parent: Vec<usize>,
}

impl PlainUnionFind {
    fn new(n: usize) -> Self {
        PlainUnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let r = self.find(x);
            by_root[r].push(x);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}
