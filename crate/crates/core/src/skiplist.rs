//! Cyclic skip lists without a global direction.
//!
//! Boundary curves of partial vertex links are cycles of directed edges whose
//! directions need not agree with any traversal, and two curves may be
//! spliced with either relative orientation. Every node therefore has two
//! *ends* (`0` and `1`), and every layer of the list pairs ends of adjacent
//! nodes symmetrically: at level `L`, end `k` of a node is linked to the end
//! of the nearest node of height `> L` met by leaving through end `k`. The
//! bottom layer is the exact cyclic order (with links in both directions);
//! each higher layer is a sublist of the one below.
//!
//! Surgery is expressed as a [`CyclicSkipList::rewire`]: remove some nodes,
//! revive others, and re-pair a set of bottom-level ends ("gaps"). Higher
//! layers are repaired level by level by climbing outward from each new gap,
//! which touches expected `O(log m)` links. Every link write is journaled, so
//! undo restores the structure exactly, towers included.
//!
//! A cycle is identified by its *last* node: the least node id among the
//! nodes of greatest height in that cycle, found by climbing to the top
//! layer and walking one lap there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type NodeId = usize;

/// One end of a node.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct End(u32);

impl End {
    #[inline]
    pub fn new(node: NodeId, side: u8) -> End {
        debug_assert!(side < 2);
        End((node as u32) << 1 | side as u32)
    }

    #[inline]
    pub fn node(self) -> NodeId {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn side(self) -> u8 {
        (self.0 & 1) as u8
    }

    /// The opposite end of the same node.
    #[inline]
    pub fn other(self) -> End {
        End(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkipListError {
    #[error("node {0} is not in any cycle")]
    NotLive(NodeId),
    #[error("node {0} is already in a cycle")]
    AlreadyLive(NodeId),
    #[error("node {0} out of range")]
    OutOfRange(NodeId),
    #[error("ends are in the same cycle")]
    SameCycle,
    #[error("ends are in different cycles")]
    DifferentCycles,
    #[error("undo out of order: expected token {expected:?}, got {got}")]
    OutOfOrderUndo { expected: Option<usize>, got: usize },
    #[error("gap list is not a perfect matching of free ends")]
    BadGaps,
}

/// Handle for undoing one surgery.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[must_use]
pub struct SurgeryToken(usize);

#[derive(Clone, Copy, Debug)]
enum Write {
    Link { slot: u32, old: End },
    Live { node: u32, old: bool },
}

#[derive(Clone, Debug)]
pub struct CyclicSkipList {
    max_height: usize,
    height: Vec<u8>,
    links: Vec<End>,
    live: Vec<bool>,
    journal: Vec<Write>,
    surgeries: Vec<usize>,
}

/// `⌈log₂ capacity⌉ + 2`.
pub fn max_height_for(capacity: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < capacity.max(1) {
        bits += 1;
    }
    bits + 2
}

impl CyclicSkipList {
    /// `capacity` nodes, none of them in a cycle yet. Tower heights are
    /// drawn once here from a geometric distribution with promotion
    /// probability 1/2 and never change afterwards.
    pub fn new(capacity: usize, seed: u64) -> Self {
        let max_height = max_height_for(capacity);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let height = (0..capacity)
            .map(|_| {
                let mut h = 1;
                while h < max_height && rng.gen::<bool>() {
                    h += 1;
                }
                h as u8
            })
            .collect();
        let mut links = Vec::with_capacity(capacity * max_height * 2);
        for node in 0..capacity {
            for _ in 0..max_height {
                links.push(End::new(node, 1));
                links.push(End::new(node, 0));
            }
        }
        CyclicSkipList { max_height, height, links, live: vec![false; capacity], journal: Vec::new(), surgeries: Vec::new() }
    }

    pub fn capacity(&self) -> usize {
        self.height.len()
    }

    pub fn max_height(&self) -> usize {
        self.max_height
    }

    #[inline]
    pub fn height(&self, node: NodeId) -> usize {
        self.height[node] as usize
    }

    #[inline]
    pub fn is_live(&self, node: NodeId) -> bool {
        self.live[node]
    }

    #[inline]
    fn slot(&self, level: usize, end: End) -> usize {
        (end.node() * self.max_height + level) * 2 + end.side() as usize
    }

    /// The end paired with `end` at `level`.
    #[inline]
    pub fn link(&self, level: usize, end: End) -> End {
        self.links[self.slot(level, end)]
    }

    /// Bottom-level neighbour of `end`.
    #[inline]
    pub fn partner(&self, end: End) -> End {
        self.link(0, end)
    }

    #[inline]
    fn write_link(&mut self, level: usize, end: End, to: End) {
        let slot = self.slot(level, end);
        let old = self.links[slot];
        if old != to {
            self.journal.push(Write::Link { slot: slot as u32, old });
            self.links[slot] = to;
        }
    }

    fn write_live(&mut self, node: NodeId, live: bool) {
        let old = self.live[node];
        self.journal.push(Write::Live { node: node as u32, old });
        self.live[node] = live;
    }

    fn check_live(&self, node: NodeId) -> Result<(), SkipListError> {
        if node >= self.capacity() {
            Err(SkipListError::OutOfRange(node))
        } else if !self.live[node] {
            Err(SkipListError::NotLive(node))
        } else {
            Ok(())
        }
    }

    /// From `from` (an end facing a gap, on a node of height `>= level`),
    /// walks away from the gap at `level - 1` to the nearest node taller
    /// than `level`. Returns its end facing the gap, or `None` when the
    /// cycle has no such node.
    #[inline]
    fn climb(&self, from: End, level: usize) -> Option<End> {
        let start = from.node();
        let mut cur = from;
        loop {
            if self.height(cur.node()) > level {
                return Some(cur);
            }
            let next = self.link(level - 1, cur.other());
            if next.node() == start {
                return None;
            }
            cur = next;
        }
    }

    /// Core surgery. `removed` nodes leave their cycles (their links are
    /// left untouched), `revived` nodes join, and each `(a, b)` in `gaps`
    /// becomes adjacent at the bottom level. Every live end whose partner
    /// changes must appear in exactly one gap.
    pub fn rewire_unchecked(&mut self, removed: &[NodeId], revived: &[NodeId], gaps: &[(End, End)]) -> SurgeryToken {
        let token = SurgeryToken(self.surgeries.len());
        self.surgeries.push(self.journal.len());
        for &x in removed {
            self.write_live(x, false);
        }
        for &x in revived {
            self.write_live(x, true);
        }
        let mut anchors: smallvec_like::Anchors = smallvec_like::Anchors::new();
        for &(a, b) in gaps {
            self.write_link(0, a, b);
            self.write_link(0, b, a);
            anchors.push(Some((a, b)));
        }
        for level in 1..self.max_height {
            let mut any = false;
            for i in 0..anchors.len() {
                let Some((l, r)) = anchors.get(i) else { continue };
                match (self.climb(l, level), self.climb(r, level)) {
                    (Some(nl), Some(nr)) => {
                        self.write_link(level, nl, nr);
                        self.write_link(level, nr, nl);
                        anchors.set(i, Some((nl, nr)));
                        any = true;
                    }
                    _ => anchors.set(i, None),
                }
            }
            if !any {
                break;
            }
        }
        token
    }

    /// Checked form of [`CyclicSkipList::rewire_unchecked`].
    pub fn rewire(&mut self, removed: &[NodeId], revived: &[NodeId], gaps: &[(End, End)]) -> Result<SurgeryToken, SkipListError> {
        for &x in removed {
            self.check_live(x)?;
        }
        for &x in revived {
            if x >= self.capacity() {
                return Err(SkipListError::OutOfRange(x));
            }
            if self.live[x] {
                return Err(SkipListError::AlreadyLive(x));
            }
        }
        // every end mentioned must belong to a node that is live afterwards,
        // and appear once
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in gaps {
            for e in [a, b] {
                let n = e.node();
                if n >= self.capacity() {
                    return Err(SkipListError::OutOfRange(n));
                }
                let live_after = (self.live[n] && !removed.contains(&n)) || revived.contains(&n);
                if !live_after || !seen.insert(e) {
                    return Err(SkipListError::BadGaps);
                }
            }
        }
        // ends that lose their partner must be re-paired
        for &x in removed {
            for side in 0..2 {
                let p = self.partner(End::new(x, side));
                let n = p.node();
                if !removed.contains(&n) && !seen.contains(&p) {
                    return Err(SkipListError::BadGaps);
                }
            }
        }
        for &x in revived {
            for side in 0..2 {
                if !seen.contains(&End::new(x, side)) {
                    return Err(SkipListError::BadGaps);
                }
            }
        }
        // an end that keeps its node must either stay paired or be re-paired
        // together with its old partner
        for &e in &seen {
            if self.live[e.node()] && !removed.contains(&e.node()) {
                let p = self.partner(e);
                if !removed.contains(&p.node()) && !seen.contains(&p) {
                    return Err(SkipListError::BadGaps);
                }
            }
        }
        Ok(self.rewire_unchecked(removed, revived, gaps))
    }

    /// Builds a fresh cycle from `(node, exit side)` pairs in cyclic order.
    pub fn make_cycle(&mut self, seq: &[(NodeId, u8)]) -> Result<SurgeryToken, SkipListError> {
        let k = seq.len();
        let gaps: Vec<(End, End)> =
            (0..k).map(|i| (End::new(seq[i].0, seq[i].1), End::new(seq[(i + 1) % k].0, 1 - seq[(i + 1) % k].1))).collect();
        let nodes: Vec<NodeId> = seq.iter().map(|s| s.0).collect();
        self.rewire(&[], &nodes, &gaps)
    }

    /// Deletes `x`, closing the gap it leaves.
    pub fn delete(&mut self, x: NodeId) -> Result<SurgeryToken, SkipListError> {
        self.check_live(x)?;
        let a = self.partner(End::new(x, 0));
        let b = self.partner(End::new(x, 1));
        let gaps: Vec<(End, End)> = if a.node() == x { vec![] } else { vec![(a, b)] };
        Ok(self.rewire_unchecked(&[x], &[], &gaps))
    }

    /// Inserts `x` into the gap at `at`, with `x`'s end 0 facing `at`.
    pub fn insert(&mut self, x: NodeId, at: End) -> Result<SurgeryToken, SkipListError> {
        if x >= self.capacity() {
            return Err(SkipListError::OutOfRange(x));
        }
        if self.live[x] {
            return Err(SkipListError::AlreadyLive(x));
        }
        self.check_live(at.node())?;
        let b = self.partner(at);
        Ok(self.rewire_unchecked(&[], &[x], &[(at, End::new(x, 0)), (End::new(x, 1), b)]))
    }

    /// Replaces the gaps `a|partner(a)` and `c|partner(c)` by `a|c` and
    /// `partner(a)|partner(c)`.
    fn exchange(&mut self, a: End, c: End) -> SurgeryToken {
        let b = self.partner(a);
        let d = self.partner(c);
        self.rewire_unchecked(&[], &[], &[(a, c), (b, d)])
    }

    /// Joins the cycles through `a` and `c` into one, pairing `a` with `c`.
    pub fn splice(&mut self, a: End, c: End) -> Result<SurgeryToken, SkipListError> {
        self.check_live(a.node())?;
        self.check_live(c.node())?;
        if self.same_cycle(a.node(), c.node()) {
            return Err(SkipListError::SameCycle);
        }
        Ok(self.exchange(a, c))
    }

    /// Cuts one cycle into two. Leaving `partner(a)` away from `a`, the
    /// first of `c`/`partner(c)` reached must be `c`; the arc from
    /// `partner(a)` to `c` closes up on its own, as does the rest.
    pub fn split(&mut self, a: End, c: End) -> Result<SurgeryToken, SkipListError> {
        self.check_live(a.node())?;
        self.check_live(c.node())?;
        if !self.same_cycle(a.node(), c.node()) {
            return Err(SkipListError::DifferentCycles);
        }
        let b = self.partner(a);
        let d = self.partner(c);
        Ok(self.rewire_unchecked(&[], &[], &[(b, c), (a, d)]))
    }

    /// Undoes the most recent surgery; `token` must be the one it returned.
    pub fn undo(&mut self, token: SurgeryToken) -> Result<(), SkipListError> {
        match self.surgeries.last() {
            Some(_) if token.0 + 1 == self.surgeries.len() => {
                self.undo_last();
                Ok(())
            }
            _ => Err(SkipListError::OutOfOrderUndo { expected: self.surgeries.len().checked_sub(1), got: token.0 }),
        }
    }

    /// Undoes the most recent surgery without a token check.
    #[inline]
    pub fn undo_last(&mut self) {
        let mark = self.surgeries.pop().expect("no surgery to undo");
        while self.journal.len() > mark {
            match self.journal.pop().unwrap() {
                Write::Link { slot, old } => self.links[slot as usize] = old,
                Write::Live { node, old } => self.live[node as usize] = old,
            }
        }
    }

    /// Forgets the undo history, making the current state the base state.
    pub fn clear_history(&mut self) {
        self.journal.clear();
        self.surgeries.clear();
    }

    pub fn pending_surgeries(&self) -> usize {
        self.surgeries.len()
    }

    /// Identity of the cycle containing `x`, with the number of link steps
    /// taken to find it.
    pub fn find_last_counted(&self, x: NodeId) -> (NodeId, usize) {
        let mut steps = 0;
        let mut u = x;
        let mut exit = End::new(x, 1);
        'climb: loop {
            let h = self.height(u);
            let level = h - 1;
            let mut best = u;
            let mut cur = exit;
            loop {
                let next = self.link(level, cur);
                steps += 1;
                let w = next.node();
                if w == u {
                    return (best, steps);
                }
                if self.height(w) > h {
                    u = w;
                    exit = next.other();
                    continue 'climb;
                }
                best = best.min(w);
                cur = next.other();
            }
        }
    }

    /// Identity of the cycle containing `x` (the least-id node of greatest
    /// height).
    #[inline]
    pub fn find_last(&self, x: NodeId) -> NodeId {
        self.find_last_counted(x).0
    }

    #[inline]
    pub fn same_cycle(&self, x: NodeId, y: NodeId) -> bool {
        self.find_last(x) == self.find_last(y)
    }

    /// Bottom-level walk of the cycle through `x`, as `(node, exit side)`.
    pub fn cycle_of(&self, x: NodeId) -> Vec<(NodeId, u8)> {
        let mut out = vec![(x, 1)];
        let mut next = self.partner(End::new(x, 1));
        while next.node() != x {
            out.push((next.node(), 1 - next.side()));
            next = self.partner(next.other());
        }
        out
    }

    /// All cycles, each listed from its least node.
    pub fn cycles(&self) -> Vec<Vec<(NodeId, u8)>> {
        let mut seen = vec![false; self.capacity()];
        let mut out = Vec::new();
        for x in 0..self.capacity() {
            if self.live[x] && !seen[x] {
                let c = self.cycle_of(x);
                for &(n, _) in &c {
                    seen[n] = true;
                }
                out.push(c);
            }
        }
        out
    }

    /// Checks every layer against a recomputation from the bottom layer.
    pub fn audit(&self) -> Result<(), String> {
        for x in 0..self.capacity() {
            if !self.live[x] {
                continue;
            }
            for side in 0..2u8 {
                let e = End::new(x, side);
                let p = self.partner(e);
                if !self.live[p.node()] {
                    return Err(format!("{e:?} linked to dead {p:?}"));
                }
                if self.partner(p) != e {
                    return Err(format!("{e:?} -> {p:?} not symmetric"));
                }
            }
        }
        for x in 0..self.capacity() {
            if !self.live[x] {
                continue;
            }
            for level in 1..self.height(x) {
                for side in 0..2u8 {
                    // walk the bottom layer to the nearest node taller than level
                    let mut cur = self.partner(End::new(x, side));
                    let mut guard = 0;
                    while self.height(cur.node()) <= level {
                        cur = self.partner(cur.other());
                        guard += 1;
                        if guard > self.capacity() + 1 {
                            return Err(format!("walk from {x} does not terminate"));
                        }
                    }
                    let got = self.link(level, End::new(x, side));
                    if got != cur {
                        return Err(format!("node {x} level {level} side {side}: link {got:?}, expected {cur:?}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Tiny inline vector for the handful of gaps one surgery creates.
mod smallvec_like {
    use super::End;

    const INLINE: usize = 8;

    pub struct Anchors {
        inline: [Option<(End, End)>; INLINE],
        len: usize,
        spill: Vec<Option<(End, End)>>,
    }

    impl Anchors {
        pub fn new() -> Self {
            Anchors { inline: [None; INLINE], len: 0, spill: Vec::new() }
        }

        pub fn push(&mut self, v: Option<(End, End)>) {
            if self.len < INLINE {
                self.inline[self.len] = v;
            } else {
                self.spill.push(v);
            }
            self.len += 1;
        }

        pub fn len(&self) -> usize {
            self.len
        }

        pub fn get(&self, i: usize) -> Option<(End, End)> {
            if i < INLINE {
                self.inline[i]
            } else {
                self.spill[i - INLINE]
            }
        }

        pub fn set(&mut self, i: usize, v: Option<(End, End)>) {
            if i < INLINE {
                self.inline[i] = v;
            } else {
                self.spill[i - INLINE] = v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(c: &[(NodeId, u8)]) -> Vec<NodeId> {
        c.iter().map(|&(n, _)| n).collect()
    }

    #[test]
    fn singletons_are_separate() {
        let mut s = CyclicSkipList::new(4, 1);
        let _ = s.make_cycle(&[(0, 1)]).unwrap();
        let _ = s.make_cycle(&[(1, 1)]).unwrap();
        assert!(!s.same_cycle(0, 1));
        let _ = s.splice(End::new(0, 1), End::new(1, 0)).unwrap();
        assert!(s.same_cycle(0, 1));
        s.audit().unwrap();
    }

    #[test]
    fn splice_two_pairs() {
        let mut s = CyclicSkipList::new(4, 7);
        let _ = s.make_cycle(&[(0, 1), (1, 1)]).unwrap();
        let _ = s.make_cycle(&[(2, 1), (3, 1)]).unwrap();
        // a's forward gap is between a and b; c's backward gap between d and c
        let _ = s.splice(End::new(0, 1), End::new(2, 0)).unwrap();
        assert_eq!(nodes(&s.cycle_of(0)), vec![0, 2, 3, 1]);
        s.audit().unwrap();
    }

    #[test]
    fn split_four_cycle() {
        let mut s = CyclicSkipList::new(4, 3);
        let _ = s.make_cycle(&[(0, 1), (1, 1), (2, 1), (3, 1)]).unwrap();
        // cut between 1|2 and 3|0
        let t = s.split(End::new(1, 1), End::new(3, 1)).unwrap();
        let mut cs: Vec<Vec<NodeId>> = s.cycles().iter().map(|c| nodes(c)).collect();
        cs.sort();
        assert_eq!(cs, vec![vec![0, 1], vec![2, 3]]);
        s.audit().unwrap();
        s.undo(t).unwrap();
        assert_eq!(nodes(&s.cycle_of(0)), vec![0, 1, 2, 3]);
    }

    #[test]
    fn delete_and_reinsert_restore_order() {
        let mut s = CyclicSkipList::new(6, 11);
        let seq: Vec<(NodeId, u8)> = (0..6).map(|i| (i, 1)).collect();
        let _ = s.make_cycle(&seq).unwrap();
        let before = s.clone();
        let t1 = s.delete(2).unwrap();
        assert_eq!(nodes(&s.cycle_of(0)), vec![0, 1, 3, 4, 5]);
        let t2 = s.delete(5).unwrap();
        s.audit().unwrap();
        assert!(matches!(s.undo(t1), Err(SkipListError::OutOfOrderUndo { .. })));
        s.undo(t2).unwrap();
        s.undo(t1).unwrap();
        assert_eq!(s.links, before.links);
        assert_eq!(s.live, before.live);
    }

    #[test]
    fn dead_nodes_are_rejected() {
        let mut s = CyclicSkipList::new(3, 0);
        assert_eq!(s.delete(1).unwrap_err(), SkipListError::NotLive(1));
        let _ = s.make_cycle(&[(0, 1), (1, 0)]).unwrap();
        let _ = s.insert(2, End::new(0, 1)).unwrap();
        assert_eq!(s.cycle_of(0).len(), 3);
        assert_eq!(s.insert(2, End::new(0, 1)).unwrap_err(), SkipListError::AlreadyLive(2));
        s.audit().unwrap();
    }

    #[test]
    fn max_height_rule() {
        assert_eq!(max_height_for(12), 6);
        assert_eq!(max_height_for(16), 6);
        assert_eq!(max_height_for(84), 9);
    }
}
