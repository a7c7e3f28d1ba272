//! Face pairings and their 4-valent multigraphs.
//!
//! A pairing is encoded as the sequence, over slots `4t + f` in order, of
//! the partner slot index. Its canonical form is the least such sequence
//! over all relabellings of tetrahedra and of the faces within each
//! tetrahedron.
//!
//! In a least sequence every tetrahedron first met as a partner appears as
//! `(next unused label, face 0)`, and a partner face not yet placed takes the
//! smallest free face of its tetrahedron. The only freedom left is which
//! unplaced face of the current tetrahedron fills the current position, so
//! the minimum is found by a depth-first search that branches only on ties.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::triangulation::{FaceSlot, Triangulation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairingError {
    #[error("pairing has {got} entries, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("slot {0} is paired with itself")]
    FixedPoint(FaceSlot),
    #[error("slot {0} is not paired consistently")]
    NotInvolution(FaceSlot),
    #[error("slot {0}: partner out of range")]
    OutOfRange(FaceSlot),
    #[error("syntax error: {0}")]
    Syntax(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct FacePairing {
    size: usize,
    partner: Vec<usize>,
}

/// Loop and multi-edge summary of a pairing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FacePairingGraph {
    pub nodes: usize,
    pub loops: Vec<usize>,
    /// Edge multiplicity for each pair `a < b` of adjacent nodes.
    pub edges: BTreeMap<(usize, usize), usize>,
}

impl FacePairingGraph {
    /// Degree of a node, a loop counting twice.
    pub fn degree(&self, v: usize) -> usize {
        2 * self.loops[v] + self.edges.iter().filter(|((a, b), _)| *a == v || *b == v).map(|(_, m)| m).sum::<usize>()
    }
}

impl fmt::Display for FacePairingGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nodes={}", self.nodes)?;
        for (v, &l) in self.loops.iter().enumerate() {
            if l > 0 {
                write!(f, " loop({v})x{l}")?;
            }
        }
        for ((a, b), m) in &self.edges {
            write!(f, " {a}-{b}x{m}")?;
        }
        Ok(())
    }
}

impl FacePairing {
    pub fn new(size: usize, partner: Vec<usize>) -> Result<Self, PairingError> {
        if partner.len() != 4 * size {
            return Err(PairingError::WrongLength { got: partner.len(), expected: 4 * size });
        }
        for (s, &p) in partner.iter().enumerate() {
            let slot = FaceSlot::from_index(s);
            if p >= 4 * size {
                return Err(PairingError::OutOfRange(slot));
            }
            if p == s {
                return Err(PairingError::FixedPoint(slot));
            }
            if partner[p] != s {
                return Err(PairingError::NotInvolution(slot));
            }
        }
        Ok(FacePairing { size, partner })
    }

    /// The pairing underlying a complete triangulation.
    pub fn of_triangulation(tri: &Triangulation) -> Option<FacePairing> {
        let partner = (0..4 * tri.size())
            .map(|s| tri.gluing(FaceSlot::from_index(s)).map(|g| g.dest.index()))
            .collect::<Option<Vec<_>>>()?;
        Some(FacePairing { size: tri.size(), partner })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn partner(&self, slot: FaceSlot) -> FaceSlot {
        FaceSlot::from_index(self.partner[slot.index()])
    }

    #[inline]
    pub fn partner_index(&self, slot: usize) -> usize {
        self.partner[slot]
    }

    /// Slot pairs `(a, b)` with `a < b`, ordered by `a`.
    pub fn pairs(&self) -> Vec<(FaceSlot, FaceSlot)> {
        (0..4 * self.size)
            .filter(|&s| s < self.partner[s])
            .map(|s| (FaceSlot::from_index(s), FaceSlot::from_index(self.partner[s])))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.size == 0 {
            return false;
        }
        let mut seen = vec![false; self.size];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            for f in 0..4 {
                let u = self.partner[4 * t + f] / 4;
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn graph(&self) -> FacePairingGraph {
        let mut loops = vec![0; self.size];
        let mut edges = BTreeMap::new();
        for (a, b) in self.pairs() {
            if a.tet == b.tet {
                loops[a.tet] += 1;
            } else {
                *edges.entry((a.tet.min(b.tet), a.tet.max(b.tet))).or_insert(0) += 1;
            }
        }
        FacePairingGraph { nodes: self.size, loops, edges }
    }

    /// Applies a relabelling: tetrahedron `t` becomes `tet_image[t]` and its
    /// face `f` becomes `face_image[t][f]`.
    pub fn relabel(&self, tet_image: &[usize], face_image: &[[u8; 4]]) -> FacePairing {
        let map = |s: usize| 4 * tet_image[s / 4] + face_image[s / 4][s % 4] as usize;
        let mut partner = vec![0; 4 * self.size];
        for s in 0..4 * self.size {
            partner[map(s)] = map(self.partner[s]);
        }
        FacePairing { size: self.size, partner }
    }

    /// Least encoding in the orbit. Requires a connected pairing.
    pub fn canonical_form(&self) -> FacePairing {
        assert!(self.is_connected(), "canonical form needs a connected pairing");
        let mut search = Labeller::new(self, None);
        for start in 0..self.size {
            search.run_from(start);
        }
        FacePairing { size: self.size, partner: search.best }
    }

    /// True iff this pairing is connected and equals its canonical form.
    pub fn is_canonical(&self) -> bool {
        if !self.is_connected() {
            return false;
        }
        let mut search = Labeller::new(self, Some(self.partner.clone()));
        for start in 0..self.size {
            search.run_from(start);
            if search.improved {
                return false;
            }
        }
        true
    }

    /// `n ; T.F T.F T.F T.F ; ...`, giving each slot's partner.
    pub fn to_line(&self) -> String {
        let mut out = self.size.to_string();
        for t in 0..self.size {
            out.push_str(" ;");
            for f in 0..4 {
                let p = self.partner[4 * t + f];
                out.push_str(&format!(" {}.{}", p / 4, p % 4));
            }
        }
        out
    }

    pub fn parse_line(line: &str) -> Result<FacePairing, PairingError> {
        let mut groups = line.trim().split(';');
        let head = groups.next().unwrap_or("").trim();
        let size: usize = head.parse().map_err(|_| PairingError::Syntax(format!("bad size {head:?}")))?;
        let mut partner = Vec::with_capacity(4 * size);
        for g in groups {
            for tok in g.split_whitespace() {
                let (t, f) = tok.split_once('.').ok_or_else(|| PairingError::Syntax(format!("bad token {tok:?}")))?;
                let t: usize = t.parse().map_err(|_| PairingError::Syntax(format!("bad token {tok:?}")))?;
                let f: usize = f.parse().map_err(|_| PairingError::Syntax(format!("bad token {tok:?}")))?;
                if f >= 4 {
                    return Err(PairingError::Syntax(format!("bad face in {tok:?}")));
                }
                partner.push(4 * t + f);
            }
        }
        FacePairing::new(size, partner)
    }
}

impl fmt::Display for FacePairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

const UNSET: usize = usize::MAX;

/// Tie-branching search for the least relabelled encoding.
struct Labeller<'a> {
    fp: &'a FacePairing,
    new_of_tet: Vec<usize>,
    old_of_tet: Vec<usize>,
    /// Old slot to new face.
    new_face: Vec<u8>,
    /// New slot to old slot.
    old_at: Vec<usize>,
    /// Faces already placed, per new tetrahedron.
    used: Vec<u8>,
    best: Vec<usize>,
    have_best: bool,
    /// Set when a sequence strictly below the initial `best` is found.
    improved: bool,
    /// Stop at the first improvement (canonicity test).
    stop_on_improve: bool,
    /// Positions at and beyond this are not compared.
    limit: usize,
}

#[derive(Clone, Copy)]
enum Undo {
    Tet(usize),
    Face { old_slot: usize, new_slot: usize },
}

impl<'a> Labeller<'a> {
    fn new(fp: &'a FacePairing, target: Option<Vec<usize>>) -> Self {
        let n = fp.size;
        let stop = target.is_some();
        Labeller {
            fp,
            new_of_tet: vec![UNSET; n],
            old_of_tet: Vec::with_capacity(n),
            new_face: vec![u8::MAX; 4 * n],
            old_at: vec![UNSET; 4 * n],
            used: vec![0; n],
            have_best: target.is_some(),
            best: target.unwrap_or_else(|| vec![0; 4 * n]),
            improved: false,
            stop_on_improve: stop,
            limit: 4 * n,
        }
    }

    fn label_tet(&mut self, old: usize, undo: &mut Vec<Undo>) {
        self.new_of_tet[old] = self.old_of_tet.len();
        self.old_of_tet.push(old);
        undo.push(Undo::Tet(old));
    }

    fn place(&mut self, old_slot: usize, new_face: u8, undo: &mut Vec<Undo>) {
        let nt = self.new_of_tet[old_slot / 4];
        self.new_face[old_slot] = new_face;
        self.old_at[4 * nt + new_face as usize] = old_slot;
        self.used[nt] |= 1 << new_face;
        undo.push(Undo::Face { old_slot, new_slot: 4 * nt + new_face as usize });
    }

    fn revert(&mut self, undo: &mut Vec<Undo>) {
        while let Some(u) = undo.pop() {
            match u {
                Undo::Tet(old) => {
                    self.new_of_tet[old] = UNSET;
                    self.old_of_tet.pop();
                }
                Undo::Face { old_slot, new_slot } => {
                    self.new_face[old_slot] = u8::MAX;
                    self.old_at[new_slot] = UNSET;
                    self.used[new_slot / 4] &= !(1 << (new_slot % 4));
                }
            }
        }
    }

    /// Value the new slot would take if old slot `g` were placed there,
    /// without changing state.
    /// `None` when `g` is not paired yet.
    fn value_of(&self, g: usize, new_slot: usize) -> Option<usize> {
        let h = self.fp.partner[g];
        if h == UNSET {
            return None;
        }
        let w = h / 4;
        if self.new_of_tet[w] == UNSET {
            return Some(4 * self.old_of_tet.len());
        }
        let nw = self.new_of_tet[w];
        if self.new_face[h] != u8::MAX {
            return Some(4 * nw + self.new_face[h] as usize);
        }
        // smallest free face of w, with new_slot counted as taken
        let mut used = self.used[nw];
        if nw == new_slot / 4 {
            used |= 1 << (new_slot % 4);
        }
        Some(4 * nw + used.trailing_ones() as usize)
    }

    fn run_from(&mut self, start: usize) {
        let mut undo = Vec::new();
        self.label_tet(start, &mut undo);
        self.dfs(0, self.have_best);
        self.revert(&mut undo);
    }

    /// `tight`: the prefix so far equals `best`'s prefix.
    fn dfs(&mut self, pos: usize, tight: bool) {
        if self.improved && self.stop_on_improve {
            return;
        }
        if pos == self.limit {
            if !tight {
                self.have_best = true;
                if self.stop_on_improve {
                    self.improved = true;
                }
            }
            return;
        }
        let nt = pos / 4;
        let Some(&old_t) = self.old_of_tet.get(nt) else { return };
        let mut candidates = [0usize; 4];
        let mut values = [0usize; 4];
        let mut k = 0;
        if self.old_at[pos] != UNSET {
            let Some(v) = self.value_of(self.old_at[pos], pos) else { return };
            candidates[0] = self.old_at[pos];
            values[0] = v;
            k = 1;
        } else {
            for f in 0..4 {
                let g = 4 * old_t + f;
                if self.new_face[g] == u8::MAX {
                    // an unpaired face could take any value later, so only
                    // relabellings built from known pairs are tried
                    if let Some(v) = self.value_of(g, pos) {
                        candidates[k] = g;
                        values[k] = v;
                        k += 1;
                    }
                }
            }
        }
        let Some(&v) = values[..k].iter().min() else { return };
        let mut tight_next = tight;
        if tight {
            match v.cmp(&self.best[pos]) {
                std::cmp::Ordering::Greater => return,
                std::cmp::Ordering::Less => {
                    tight_next = false;
                    if self.stop_on_improve {
                        self.improved = true;
                        return;
                    }
                }
                std::cmp::Ordering::Equal => {}
            }
        }
        for i in 0..k {
            if values[i] != v {
                continue;
            }
            let g = candidates[i];
            let mut undo = Vec::with_capacity(3);
            if self.new_face[g] == u8::MAX {
                self.place(g, (pos % 4) as u8, &mut undo);
            }
            let h = self.fp.partner[g];
            let w = h / 4;
            if self.new_of_tet[w] == UNSET {
                self.label_tet(w, &mut undo);
            }
            if self.new_face[h] == u8::MAX {
                let free = self.used[self.new_of_tet[w]].trailing_ones() as u8;
                self.place(h, free, &mut undo);
            }
            if !tight_next {
                self.best[pos] = v;
            }
            self.dfs(pos + 1, tight_next);
            self.revert(&mut undo);
            if self.improved && self.stop_on_improve {
                return;
            }
            // best now runs through this branch, so siblings compare against it
            tight_next = true;
        }
    }
}

/// All canonical connected face pairings on `n` tetrahedra, in a fixed order.
pub fn enumerate_pairings(n: usize) -> Vec<FacePairing> {
    assert!(n >= 1, "need at least one tetrahedron");
    let mut partner = vec![UNSET; 4 * n];
    let mut out = Vec::new();
    extend(&mut partner, 1, n, &mut out);
    out
}

fn extend(partner: &mut Vec<usize>, next: usize, n: usize, out: &mut Vec<FacePairing>) {
    let Some(s) = partner.iter().position(|&p| p == UNSET) else {
        if next == n {
            let fp = FacePairing { size: n, partner: partner.clone() };
            if fp.is_canonical() {
                out.push(fp);
            }
        }
        return;
    };
    if s / 4 >= next || !prefix_may_be_canonical(partner, n, s) {
        return;
    }
    for s2 in s + 1..4 * next {
        if partner[s2] == UNSET {
            partner[s] = s2;
            partner[s2] = s;
            extend(partner, next, n, out);
            partner[s] = UNSET;
            partner[s2] = UNSET;
        }
    }
    if next < n {
        let s2 = 4 * next;
        partner[s] = s2;
        partner[s2] = s;
        extend(partner, next + 1, n, out);
        partner[s] = UNSET;
        partner[s2] = UNSET;
    }
}

/// False when some relabelling, using only the pairs already chosen, gives
/// an encoding whose first `filled` entries are strictly smaller.
fn prefix_may_be_canonical(partner: &[usize], n: usize, filled: usize) -> bool {
    if filled == 0 {
        return true;
    }
    let fp = FacePairing { size: n, partner: partner.to_vec() };
    let mut search = Labeller::new(&fp, Some(fp.partner.clone()));
    search.limit = filled;
    for start in 0..n {
        search.run_from(start);
        if search.improved {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_table;

    const TORUS_TABLE: &str = "
        A | C: 013 | B: 012 | A: 312 | A: 230
        B | A: 013 | C: 120 | C: 231 | C: 302
        C | B: 301 | A: 012 | B: 231 | B: 302
    ";

    #[test]
    fn torus_table_graph_shape() {
        let fp = FacePairing::of_triangulation(&parse_table(TORUS_TABLE).unwrap()).unwrap();
        let g = fp.graph();
        assert_eq!(g.loops, vec![1, 0, 0]);
        assert_eq!(g.edges, BTreeMap::from([((0, 1), 1), ((0, 2), 1), ((1, 2), 3)]));
        assert!((0..3).all(|v| g.degree(v) == 4));
        assert!(enumerate_pairings(3).contains(&fp.canonical_form()));
    }

    #[test]
    fn small_graphs() {
        let two_loops = FacePairing::new(1, vec![1, 0, 3, 2]).unwrap();
        assert_eq!(two_loops.graph().loops, vec![2]);
        let quad = FacePairing::new(2, vec![4, 5, 6, 7, 0, 1, 2, 3]).unwrap();
        assert_eq!(quad.graph().edges, BTreeMap::from([((0, 1), 4)]));
    }

    #[test]
    fn counts_for_one_and_two() {
        assert_eq!(enumerate_pairings(1), vec![FacePairing::new(1, vec![1, 0, 3, 2]).unwrap()]);
        assert_eq!(enumerate_pairings(2).len(), 2);
    }

    #[test]
    fn swapping_tetrahedra_breaks_canonicity() {
        for fp in enumerate_pairings(3) {
            assert!(fp.is_canonical());
            let swapped = fp.relabel(&[1, 0, 2], &[[0, 1, 2, 3]; 3]);
            if swapped != fp {
                assert!(!swapped.is_canonical());
                assert_eq!(swapped.canonical_form(), fp);
            }
        }
    }

    #[test]
    fn line_round_trip() {
        for fp in enumerate_pairings(3) {
            assert_eq!(FacePairing::parse_line(&fp.to_line()).unwrap(), fp);
        }
        assert!(FacePairing::parse_line("1 ; 0.0 0.1 0.2 0.3").is_err());
    }
}
