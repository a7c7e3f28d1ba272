//! Permutations of tetrahedron vertices.
//!
//! A [`Perm4`] is stored as its index (0..24) in the lexicographic order of
//! image tuples, so index 0 is the identity and index 23 is `3210`. All
//! composition, inversion and parity lookups are table driven.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("images {0:?} do not form a permutation")]
    NotBijective(Vec<u8>),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u8),
    #[error("face {0} out of range")]
    FaceOutOfRange(u8),
    #[error("image vertices {images:?} are not the vertices of face {face}")]
    NotOnFace { images: [u8; 3], face: u8 },
    #[error("permutation index {0} out of range (expected 0..24)")]
    IndexOutOfRange(usize),
}

const fn build_images() -> [[u8; 4]; 24] {
    let mut out = [[0u8; 4]; 24];
    let mut k = 0;
    let mut code = 0;
    while code < 256 {
        let t = [
            (code >> 6) as u8 & 3,
            (code >> 4) as u8 & 3,
            (code >> 2) as u8 & 3,
            code as u8 & 3,
        ];
        if t[0] != t[1] && t[0] != t[2] && t[0] != t[3] && t[1] != t[2] && t[1] != t[3] && t[2] != t[3] {
            out[k] = t;
            k += 1;
        }
        code += 1;
    }
    out
}

const IMAGES: [[u8; 4]; 24] = build_images();

const fn code_of(t: [u8; 4]) -> usize {
    ((t[0] as usize) << 6) | ((t[1] as usize) << 4) | ((t[2] as usize) << 2) | t[3] as usize
}

const fn build_index_by_code() -> [u8; 256] {
    let mut out = [u8::MAX; 256];
    let mut k = 0;
    while k < 24 {
        out[code_of(IMAGES[k])] = k as u8;
        k += 1;
    }
    out
}

const INDEX_BY_CODE: [u8; 256] = build_index_by_code();

const fn build_compose() -> [[u8; 24]; 24] {
    let mut out = [[0u8; 24]; 24];
    let mut p = 0;
    while p < 24 {
        let mut q = 0;
        while q < 24 {
            let a = IMAGES[p];
            let b = IMAGES[q];
            let r = [a[b[0] as usize], a[b[1] as usize], a[b[2] as usize], a[b[3] as usize]];
            out[p][q] = INDEX_BY_CODE[code_of(r)];
            q += 1;
        }
        p += 1;
    }
    out
}

const COMPOSE: [[u8; 24]; 24] = build_compose();

const fn build_inverse() -> [u8; 24] {
    let mut out = [0u8; 24];
    let mut p = 0;
    while p < 24 {
        let a = IMAGES[p];
        let mut r = [0u8; 4];
        let mut v = 0;
        while v < 4 {
            r[a[v] as usize] = v as u8;
            v += 1;
        }
        out[p] = INDEX_BY_CODE[code_of(r)];
        p += 1;
    }
    out
}

const INVERSE: [u8; 24] = build_inverse();

const fn build_even() -> [bool; 24] {
    let mut out = [false; 24];
    let mut p = 0;
    while p < 24 {
        let a = IMAGES[p];
        let mut inversions = 0;
        let mut i = 0;
        while i < 4 {
            let mut j = i + 1;
            while j < 4 {
                if a[i] > a[j] {
                    inversions += 1;
                }
                j += 1;
            }
            i += 1;
        }
        out[p] = inversions % 2 == 0;
        p += 1;
    }
    out
}

const EVEN: [bool; 24] = build_even();

/// Sign of a permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

/// A permutation of `{0, 1, 2, 3}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm4(u8);

impl Perm4 {
    pub const IDENTITY: Perm4 = Perm4(0);
    pub const COUNT: usize = 24;

    pub fn from_index(index: usize) -> Result<Self, PermError> {
        if index < 24 {
            Ok(Perm4(index as u8))
        } else {
            Err(PermError::IndexOutOfRange(index))
        }
    }

    pub fn from_images(images: [u8; 4]) -> Result<Self, PermError> {
        if let Some(&v) = images.iter().find(|&&v| v > 3) {
            return Err(PermError::VertexOutOfRange(v));
        }
        match INDEX_BY_CODE[code_of(images)] {
            u8::MAX => Err(PermError::NotBijective(images.to_vec())),
            k => Ok(Perm4(k)),
        }
    }

    /// Transposition of `a` and `b` (identity when `a == b`).
    pub fn swap(a: u8, b: u8) -> Self {
        let mut t = [0, 1, 2, 3];
        t.swap(a as usize, b as usize);
        Perm4::from_images(t).expect("transposition is a permutation")
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn images(self) -> [u8; 4] {
        IMAGES[self.0 as usize]
    }

    #[inline]
    pub fn apply(self, v: u8) -> u8 {
        IMAGES[self.0 as usize][v as usize]
    }

    /// `self ∘ other`, i.e. `v ↦ self(other(v))`.
    #[inline]
    pub fn compose(self, other: Perm4) -> Perm4 {
        Perm4(COMPOSE[self.0 as usize][other.0 as usize])
    }

    #[inline]
    pub fn inverse(self) -> Perm4 {
        Perm4(INVERSE[self.0 as usize])
    }

    #[inline]
    pub fn is_even(self) -> bool {
        EVEN[self.0 as usize]
    }

    pub fn parity(self) -> Parity {
        if self.is_even() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn all() -> impl Iterator<Item = Perm4> {
        (0..24u8).map(Perm4)
    }

    /// Builds the unique permutation that sends the sorted vertices of
    /// `src_face` to `images` (vertices of `dst_face`, in that order) and the
    /// vertex opposite `src_face` to the vertex opposite `dst_face`.
    pub fn from_face_images(src_face: u8, dst_face: u8, images: [u8; 3]) -> Result<Self, PermError> {
        if src_face > 3 {
            return Err(PermError::FaceOutOfRange(src_face));
        }
        if dst_face > 3 {
            return Err(PermError::FaceOutOfRange(dst_face));
        }
        if let Some(&v) = images.iter().find(|&&v| v > 3) {
            return Err(PermError::VertexOutOfRange(v));
        }
        if images[0] == images[1] || images[0] == images[2] || images[1] == images[2] {
            return Err(PermError::NotBijective(images.to_vec()));
        }
        let off_dst = 3 - dst_face;
        if images.contains(&off_dst) {
            return Err(PermError::NotOnFace { images, face: dst_face });
        }
        let src = face_vertices(src_face);
        let mut t = [0u8; 4];
        for (i, &v) in src.iter().enumerate() {
            t[v as usize] = images[i];
        }
        t[(3 - src_face) as usize] = off_dst;
        Perm4::from_images(t)
    }

    /// Same as [`Perm4::from_face_images`] with the map given positionally:
    /// the `i`-th sorted vertex of `src_face` goes to the `p(i)`-th sorted
    /// vertex of `dst_face`.
    pub fn from_face_perm(src_face: u8, dst_face: u8, p: Perm3) -> Result<Self, PermError> {
        if dst_face > 3 {
            return Err(PermError::FaceOutOfRange(dst_face));
        }
        let dst = face_vertices(dst_face);
        let pi = p.images();
        Perm4::from_face_images(src_face, dst_face, [dst[pi[0] as usize], dst[pi[1] as usize], dst[pi[2] as usize]])
    }

    /// Images of the sorted vertices of `face`.
    pub fn restrict_to_face(self, face: u8) -> [u8; 3] {
        let f = face_vertices(face);
        [self.apply(f[0]), self.apply(f[1]), self.apply(f[2])]
    }

    /// The face that `face` is carried onto.
    #[inline]
    pub fn face_image(self, face: u8) -> u8 {
        3 - self.apply(3 - face)
    }
}

impl fmt::Debug for Perm4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.images();
        write!(f, "Perm4({}{}{}{})", t[0], t[1], t[2], t[3])
    }
}

impl fmt::Display for Perm4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.images();
        write!(f, "{}{}{}{}", t[0], t[1], t[2], t[3])
    }
}

/// A permutation of `{0, 1, 2}`, read as a map between two sorted vertex
/// triples.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Perm3([u8; 3]);

impl Perm3 {
    pub const ALL: [Perm3; 6] = [
        Perm3([0, 1, 2]),
        Perm3([0, 2, 1]),
        Perm3([1, 0, 2]),
        Perm3([1, 2, 0]),
        Perm3([2, 0, 1]),
        Perm3([2, 1, 0]),
    ];

    pub fn new(images: [u8; 3]) -> Result<Self, PermError> {
        let mut seen = [false; 3];
        for &v in &images {
            if v > 2 || seen[v as usize] {
                return Err(PermError::NotBijective(images.to_vec()));
            }
            seen[v as usize] = true;
        }
        Ok(Perm3(images))
    }

    pub fn images(self) -> [u8; 3] {
        self.0
    }
}

/// Sorted vertices of face `f`; face `f` omits vertex `3 - f`, so the faces
/// in order are `012`, `013`, `023`, `123`.
#[inline]
pub fn face_vertices(f: u8) -> [u8; 3] {
    const FACES: [[u8; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    FACES[f as usize]
}

/// The face containing the three given (distinct) vertices.
#[inline]
pub fn face_of(vertices: [u8; 3]) -> u8 {
    let sum: u8 = vertices.iter().sum();
    3 - (6 - sum)
}

const fn build_face_maps() -> [[[u8; 6]; 4]; 4] {
    let mut out = [[[0u8; 6]; 4]; 4];
    let mut src = 0;
    while src < 4 {
        let mut dst = 0;
        while dst < 4 {
            let mut k = 0;
            let mut p = 0;
            while p < 24 {
                if IMAGES[p][3 - src] == (3 - dst) as u8 {
                    out[src][dst][k] = p as u8;
                    k += 1;
                }
                p += 1;
            }
            dst += 1;
        }
        src += 1;
    }
    out
}

const FACE_MAPS: [[[u8; 6]; 4]; 4] = build_face_maps();

/// The six permutations carrying face `src` onto face `dst`, in index order.
#[inline]
pub fn face_maps(src: u8, dst: u8) -> [Perm4; 6] {
    FACE_MAPS[src as usize][dst as usize].map(Perm4)
}
