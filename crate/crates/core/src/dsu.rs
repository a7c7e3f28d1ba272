//! Signed union-find with an undo journal.
//!
//! Each element carries a sign relative to its parent, so a find reports
//! both the class representative and the element's orientation relative to
//! it. Union is by rank without path compression: trees stay O(log n) deep
//! and every merge can be undone in O(1).

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    #[inline]
    pub fn from_bool_flip(flip: bool) -> Sign {
        if flip {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    #[inline]
    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    #[inline]
    pub fn value(self) -> i8 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Union {
    /// Two classes became one.
    Merged,
    /// Already in one class with the requested relative sign.
    Redundant,
    /// Already in one class with the opposite sign; nothing changed.
    Conflict,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DsuError {
    #[error("rollback mark {mark} is beyond the journal length {len}")]
    InvalidMark { mark: usize, len: usize },
}

/// Journal position returned by [`SignedDsu::checkpoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mark(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct MergeRecord {
    child: u32,
    parent: u32,
    rank_bumped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedDsu {
    parent: Vec<u32>,
    rank: Vec<u8>,
    flip: Vec<bool>,
    journal: Vec<MergeRecord>,
}

impl SignedDsu {
    pub fn new(n: usize) -> Self {
        SignedDsu {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            flip: vec![false; n],
            journal: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Number of classes.
    pub fn components(&self) -> usize {
        self.parent.len() - self.journal.len()
    }

    /// Root of `x` and the sign of `x` relative to that root.
    #[inline]
    pub fn find(&self, x: usize) -> (usize, Sign) {
        let mut x = x as u32;
        let mut flip = false;
        loop {
            let p = self.parent[x as usize];
            if p == x {
                return (x as usize, Sign::from_bool_flip(flip));
            }
            flip ^= self.flip[x as usize];
            x = p;
        }
    }

    /// Number of parent links followed by `find(x)`.
    pub fn depth(&self, x: usize) -> usize {
        let mut d = 0;
        let mut x = x;
        while self.parent[x] as usize != x {
            x = self.parent[x] as usize;
            d += 1;
        }
        d
    }

    pub fn same(&self, x: usize, y: usize) -> bool {
        self.find(x).0 == self.find(y).0
    }

    /// Records that `x` has sign `rel` relative to `y`.
    pub fn union(&mut self, x: usize, y: usize, rel: Sign) -> Union {
        let (rx, sx) = self.find(x);
        let (ry, sy) = self.find(y);
        if rx == ry {
            return if sx.times(sy) == rel { Union::Redundant } else { Union::Conflict };
        }
        let link = rel.times(sx).times(sy);
        let (child, parent) = if self.rank[rx] < self.rank[ry] { (rx, ry) } else { (ry, rx) };
        let rank_bumped = self.rank[rx] == self.rank[ry];
        self.parent[child] = parent as u32;
        self.flip[child] = link == Sign::Neg;
        if rank_bumped {
            self.rank[parent] += 1;
        }
        self.journal.push(MergeRecord { child: child as u32, parent: parent as u32, rank_bumped });
        Union::Merged
    }

    pub fn checkpoint(&self) -> Mark {
        Mark(self.journal.len())
    }

    /// Undoes every merge made since `mark`, most recent first.
    pub fn rollback(&mut self, mark: Mark) -> Result<(), DsuError> {
        if mark.0 > self.journal.len() {
            return Err(DsuError::InvalidMark { mark: mark.0, len: self.journal.len() });
        }
        while self.journal.len() > mark.0 {
            self.undo_last();
        }
        Ok(())
    }

    /// Undoes the most recent merge, if any.
    #[inline]
    pub fn undo_last(&mut self) -> bool {
        match self.journal.pop() {
            Some(r) => {
                self.parent[r.child as usize] = r.child;
                self.flip[r.child as usize] = false;
                if r.rank_bumped {
                    self.rank[r.parent as usize] -= 1;
                }
                true
            }
            None => false,
        }
    }
}
