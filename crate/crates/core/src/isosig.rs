//! Canonical isomorphism signatures.
//!
//! For every choice of starting tetrahedron and starting vertex labelling the
//! remaining tetrahedra are labelled in breadth-first order of discovery,
//! each newly discovered tetrahedron taking the labelling that makes its
//! discovering gluing the identity. The signature is the lexicographically
//! least resulting table, read as `n` followed by `(destination, perm index)`
//! for each face slot in order.

use crate::perm::Perm4;
use crate::triangulation::{FaceSlot, Gluing, TriError, Triangulation};

const ALPHABET: &[u8; 64] = b"+0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ_abcdefghijklmnopqrstuvwxyz";

fn digit_value(c: u8) -> Option<u32> {
    ALPHABET.iter().position(|&a| a == c).map(|p| p as u32)
}

fn width_for(max: usize) -> usize {
    let mut w = 1;
    let mut cap = 64usize;
    while max >= cap {
        w += 1;
        cap *= 64;
    }
    w
}

/// Result of canonicalising a closed connected triangulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canonical {
    pub signature: String,
    pub triangulation: Triangulation,
}

/// Reusable buffers for the labelling search.
struct Scratch {
    /// Flattened gluings: destination tetrahedron and perm per slot.
    dest: Vec<usize>,
    perm: Vec<Perm4>,
    new_of: Vec<usize>,
    old_of: Vec<usize>,
    maps: Vec<Perm4>,
    cur: Vec<u32>,
    best: Vec<u32>,
}

impl Scratch {
    fn new(tri: &Triangulation) -> Self {
        let n = tri.size();
        let mut dest = Vec::with_capacity(4 * n);
        let mut perm = Vec::with_capacity(4 * n);
        for s in 0..4 * n {
            let g = tri.gluing(FaceSlot::from_index(s)).expect("complete");
            dest.push(g.dest.tet);
            perm.push(g.perm);
        }
        Scratch {
            dest,
            perm,
            new_of: vec![usize::MAX; n],
            old_of: Vec::with_capacity(n),
            maps: vec![Perm4::IDENTITY; n],
            cur: Vec::with_capacity(1 + 8 * n),
            best: Vec::new(),
        }
    }

    /// Explores one starting choice, comparing against `best` as values are
    /// produced. Leaves the result in `best` only when strictly smaller.
    fn labelling_from(&mut self, start: usize, start_map: Perm4) {
        let n = self.new_of.len();
        self.new_of.fill(usize::MAX);
        self.old_of.clear();
        self.cur.clear();
        self.new_of[start] = 0;
        self.old_of.push(start);
        self.maps[start] = start_map;
        self.cur.push(n as u32);
        let mut smaller = self.best.is_empty();
        for i in 0..n {
            let t = self.old_of[i];
            let phi = self.maps[t];
            let phi_inv = phi.inverse();
            for j in 0..4u8 {
                // old face of t that becomes face j
                let f = 3 - phi_inv.apply(3 - j);
                let slot = 4 * t + f as usize;
                let d = self.dest[slot];
                let sigma = self.perm[slot];
                if self.new_of[d] == usize::MAX {
                    self.new_of[d] = self.old_of.len();
                    self.old_of.push(d);
                    self.maps[d] = phi.compose(sigma.inverse());
                }
                let relabelled = self.maps[d].compose(sigma).compose(phi_inv);
                for v in [self.new_of[d] as u32, relabelled.index() as u32] {
                    if !smaller {
                        let b = self.best[self.cur.len()];
                        if v > b {
                            return;
                        }
                        smaller = v < b;
                    }
                    self.cur.push(v);
                }
            }
        }
        if smaller {
            std::mem::swap(&mut self.cur, &mut self.best);
        }
    }
}

fn least_values(tri: &Triangulation) -> Result<Vec<u32>, TriError> {
    tri.require_closed_connected()?;
    let mut scratch = Scratch::new(tri);
    for start in 0..tri.size() {
        for map in Perm4::all() {
            scratch.labelling_from(start, map);
        }
    }
    Ok(scratch.best)
}

fn decode_values(tri_values: &[u32]) -> Triangulation {
    let n = tri_values[0] as usize;
    let mut tri = Triangulation::new(n);
    for s in 0..4 * n {
        let a = FaceSlot::from_index(s);
        if tri.is_glued(a) {
            continue;
        }
        let dest_tet = tri_values[1 + 2 * s] as usize;
        let perm = Perm4::from_index(tri_values[2 + 2 * s] as usize).expect("valid perm");
        tri.glue(a, FaceSlot::new(dest_tet, perm.face_image(a.face)), perm).expect("canonical table is consistent");
    }
    tri
}

fn encode_values(values: &[u32]) -> String {
    let n = values[0] as usize;
    let w = width_for(n.max(24));
    let mut s = String::with_capacity(1 + w * values.len());
    s.push(ALPHABET[w] as char);
    for &v in values {
        let mut x = v as usize;
        let mut digits = [0u8; 8];
        for d in digits[..w].iter_mut().rev() {
            *d = ALPHABET[x % 64];
            x /= 64;
        }
        s.extend(digits[..w].iter().map(|&d| char::from(d)));
    }
    s
}

/// Canonical signature and the relabelled triangulation achieving it.
pub fn canonical(tri: &Triangulation) -> Result<Canonical, TriError> {
    let values = least_values(tri)?;
    Ok(Canonical { signature: encode_values(&values), triangulation: decode_values(&values) })
}

/// Canonical isomorphism signature of a closed connected triangulation.
pub fn iso_signature(tri: &Triangulation) -> Result<String, TriError> {
    least_values(tri).map(|v| encode_values(&v))
}

/// Rebuilds the canonically labelled triangulation from its signature.
pub fn decode_signature(sig: &str) -> Option<Triangulation> {
    let bytes = sig.as_bytes();
    let w = digit_value(*bytes.first()?)? as usize;
    if w == 0 || (bytes.len() - 1) % w != 0 {
        return None;
    }
    let mut values = Vec::with_capacity((bytes.len() - 1) / w);
    for chunk in bytes[1..].chunks(w) {
        let mut v = 0u32;
        for &c in chunk {
            v = v * 64 + digit_value(c)?;
        }
        values.push(v);
    }
    let n = *values.first()? as usize;
    if n == 0 || values.len() != 1 + 8 * n {
        return None;
    }
    for s in 0..4 * n {
        if values[1 + 2 * s] as usize >= n || values[2 + 2 * s] >= 24 {
            return None;
        }
    }
    // reject tables that are not involutions
    let mut raw = vec![None; 4 * n];
    for (s, slot) in raw.iter_mut().enumerate() {
        let perm = Perm4::from_index(values[2 + 2 * s] as usize).ok()?;
        let a = FaceSlot::from_index(s);
        *slot = Some(Gluing { dest: FaceSlot::new(values[1 + 2 * s] as usize, perm.face_image(a.face)), perm });
    }
    for (s, g) in raw.iter().enumerate() {
        let g = g.unwrap();
        let back = raw[g.dest.index()]?;
        if back.dest != FaceSlot::from_index(s) || back.perm != g.perm.inverse() || g.dest.index() == s {
            return None;
        }
    }
    Some(decode_values(&values))
}
