//! Text encodings of gluing tables.
//!
//! The compact form is one line per triangulation:
//!
//! ```text
//! n ; t0f0 t0f1 t0f2 t0f3 ; t1f0 ...
//! ```
//!
//! where each cell is `-` (unglued) or `T:P` with `T` the destination
//! tetrahedron and `P` the [`Perm4`] index. The table form writes one row
//! per tetrahedron with cells like `C:013`, giving the destination
//! tetrahedron and the images of the face's vertices in order.

use thiserror::Error;

use crate::perm::{face_of, face_vertices, Perm4, PermError};
use crate::triangulation::{FaceSlot, Gluing, Triangulation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("slot {slot}: {source}")]
    Perm { slot: FaceSlot, source: PermError },
    #[error("slot {0}: destination out of range")]
    OutOfRange(FaceSlot),
    #[error("slot {0}: glued to itself")]
    SelfGluing(FaceSlot),
    #[error("slot {0}: glued more than once")]
    SlotReused(FaceSlot),
    #[error("slot {0}: gluing is not matched by its partner")]
    NotInvolution(FaceSlot),
}

/// Assembles a triangulation from one claimed gluing per slot, checking that
/// the claims are mutually consistent.
fn assemble(size: usize, raw: Vec<Option<Gluing>>) -> Result<Triangulation, ParseError> {
    let mut claims = vec![0usize; 4 * size];
    for (i, g) in raw.iter().enumerate() {
        let Some(g) = g else { continue };
        let a = FaceSlot::from_index(i);
        if g.dest.tet >= size {
            return Err(ParseError::OutOfRange(a));
        }
        if g.dest == a {
            return Err(ParseError::SelfGluing(a));
        }
        claims[g.dest.index()] += 1;
    }
    if let Some(i) = claims.iter().position(|&c| c > 1) {
        return Err(ParseError::SlotReused(FaceSlot::from_index(i)));
    }
    let mut tri = Triangulation::new(size);
    for (i, g) in raw.iter().enumerate() {
        let Some(g) = *g else { continue };
        let a = FaceSlot::from_index(i);
        match raw[g.dest.index()] {
            Some(back) if back.dest == a && back.perm == g.perm.inverse() => {}
            _ => return Err(ParseError::NotInvolution(a)),
        }
        if !tri.is_glued(a) {
            tri.glue(a, g.dest, g.perm).map_err(|_| ParseError::NotInvolution(a))?;
        }
    }
    Ok(tri)
}

/// Parses one compact `.tri` line.
pub fn parse_tri(line: &str) -> Result<Triangulation, ParseError> {
    let mut groups = line.trim().split(';');
    let head = groups.next().unwrap_or("").trim();
    let size: usize = head.parse().map_err(|_| ParseError::Syntax(format!("bad size {head:?}")))?;
    let rows: Vec<&str> = groups.collect();
    if rows.len() != size {
        return Err(ParseError::Syntax(format!("expected {size} rows, found {}", rows.len())));
    }
    let mut raw = vec![None; 4 * size];
    for (t, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split_whitespace().collect();
        if cells.len() != 4 {
            return Err(ParseError::Syntax(format!("row {t} has {} cells, expected 4", cells.len())));
        }
        for (f, cell) in cells.iter().enumerate() {
            let slot = FaceSlot::new(t, f as u8);
            if *cell == "-" {
                continue;
            }
            let (dt, p) = cell.split_once(':').ok_or_else(|| ParseError::Syntax(format!("bad cell {cell:?}")))?;
            let dest_tet: usize = dt.parse().map_err(|_| ParseError::Syntax(format!("bad cell {cell:?}")))?;
            let pi: usize = p.parse().map_err(|_| ParseError::Syntax(format!("bad cell {cell:?}")))?;
            let perm = Perm4::from_index(pi).map_err(|source| ParseError::Perm { slot, source })?;
            raw[slot.index()] = Some(Gluing { dest: FaceSlot::new(dest_tet, perm.face_image(slot.face)), perm });
        }
    }
    assemble(size, raw)
}

/// Writes the compact `.tri` line.
pub fn to_tri(tri: &Triangulation) -> String {
    let mut out = tri.size().to_string();
    for t in 0..tri.size() {
        out.push_str(" ;");
        for f in 0..4 {
            out.push(' ');
            match tri.gluing(FaceSlot::new(t, f)) {
                None => out.push('-'),
                Some(g) => {
                    out.push_str(&g.dest.tet.to_string());
                    out.push(':');
                    out.push_str(&g.perm.index().to_string());
                }
            }
        }
    }
    out
}

/// Canonical spacing of a compact line, without interpreting it.
pub fn normalize_tri(line: &str) -> String {
    let mut groups = line.trim().split(';');
    let mut out = groups.next().unwrap_or("").trim().to_string();
    for g in groups {
        out.push_str(" ;");
        for cell in g.split_whitespace() {
            out.push(' ');
            out.push_str(cell);
        }
    }
    out
}

fn tet_label(t: usize, size: usize) -> String {
    if size <= 26 {
        char::from(b'A' + t as u8).to_string()
    } else {
        t.to_string()
    }
}

fn parse_label(s: &str) -> Option<usize> {
    let s = s.trim();
    if let Ok(v) = s.parse() {
        return Some(v);
    }
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_uppercase() => Some((c as u8 - b'A') as usize),
        _ => None,
    }
}

/// Renders the human-readable table, one row per tetrahedron.
pub fn to_table(tri: &Triangulation) -> String {
    let mut out = String::new();
    for t in 0..tri.size() {
        out.push_str(&tet_label(t, tri.size()));
        for f in 0..4 {
            out.push_str(" | ");
            match tri.gluing(FaceSlot::new(t, f)) {
                None => out.push('-'),
                Some(g) => {
                    let im = g.perm.restrict_to_face(f);
                    out.push_str(&format!("{}:{}{}{}", tet_label(g.dest.tet, tri.size()), im[0], im[1], im[2]));
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Parses the human-readable table. Rows are `label cell cell cell cell`;
/// `|` and `&` separators and blank lines are ignored, and a space may
/// follow the colon in a cell (`C: 013`).
pub fn parse_table(text: &str) -> Result<Triangulation, ParseError> {
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for line in text.lines() {
        let cleaned: String = line.replace(['|', '&'], " ").replace("\\\\", " ");
        let mut tokens: Vec<String> = Vec::new();
        for tok in cleaned.split_whitespace() {
            match tokens.last_mut() {
                Some(prev)
                    if prev.ends_with(':') && tok.len() == 3 && tok.bytes().all(|b| b.is_ascii_digit()) =>
                {
                    prev.push_str(tok)
                }
                _ => tokens.push(tok.to_string()),
            }
        }
        if tokens.is_empty() {
            continue;
        }
        let label = tokens[0].trim_end_matches(':');
        let t = parse_label(label).ok_or_else(|| ParseError::Syntax(format!("bad row label {label:?}")))?;
        if tokens.len() != 5 {
            return Err(ParseError::Syntax(format!("row {label} has {} cells, expected 4", tokens.len() - 1)));
        }
        rows.push((t, tokens[1..].to_vec()));
    }
    let size = rows.len();
    let mut raw = vec![None; 4 * size];
    for (t, cells) in rows {
        if t >= size {
            return Err(ParseError::Syntax(format!("row label {t} out of range")));
        }
        for (f, cell) in cells.iter().enumerate() {
            let slot = FaceSlot::new(t, f as u8);
            if cell == "-" {
                continue;
            }
            let (dl, im) = cell.split_once(':').ok_or_else(|| ParseError::Syntax(format!("bad cell {cell:?}")))?;
            let dest_tet = parse_label(dl).ok_or_else(|| ParseError::Syntax(format!("bad cell {cell:?}")))?;
            let digits: Vec<u8> = im.bytes().map(|b| b.wrapping_sub(b'0')).collect();
            if digits.len() != 3 || digits.iter().any(|&d| d > 3) {
                return Err(ParseError::Syntax(format!("bad cell {cell:?}")));
            }
            let images = [digits[0], digits[1], digits[2]];
            if images[0] == images[1] || images[0] == images[2] || images[1] == images[2] {
                return Err(ParseError::Perm { slot, source: PermError::NotBijective(digits) });
            }
            let dest_face = face_of(images);
            let perm = Perm4::from_face_images(slot.face, dest_face, images)
                .map_err(|source| ParseError::Perm { slot, source })?;
            raw[slot.index()] = Some(Gluing { dest: FaceSlot::new(dest_tet, dest_face), perm });
        }
    }
    assemble(size, raw)
}

/// The vertex triple of a face, as printed in table headers.
pub fn face_label(f: u8) -> String {
    face_vertices(f).iter().map(|v| v.to_string()).collect()
}
