//! Naive oracles shared by the property tests and the acceptance run.
#![allow(dead_code)]

use linkcensus::linktrack::FaceToken;
use linkcensus::skiplist::{End, SurgeryToken};
use linkcensus::validate::{brute_classes, build_links, check_edges, for_each_gluing, normalize_cycle, EdgeCheck};
use linkcensus::{
    canonical, decode_signature, enumerate, iso_signature, CyclicSkipList, FaceSlot, Glue, Isomorphism, LinkEdge,
    LinkState, Mode, Perm4, PruneReason, SearchConfig, Sign, SignedDsu, Triangulation, Union,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub const CASES: u32 = 10_000;

/// Runs a property for `cases` random inputs outside the `proptest!` macro.
pub fn run_cases<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- dsu

/// Component label and sign per element, relabelled wholesale on merge.
#[derive(Clone, PartialEq, Debug)]
pub struct Relations {
    comp: Vec<usize>,
    sign: Vec<i8>,
}

impl Relations {
    pub fn new(n: usize) -> Self {
        Relations { comp: (0..n).collect(), sign: vec![1; n] }
    }

    pub fn union(&mut self, x: usize, y: usize, rel: i8) -> Union {
        if self.comp[x] == self.comp[y] {
            return if self.sign[x] * self.sign[y] == rel { Union::Redundant } else { Union::Conflict };
        }
        let (from, to) = (self.comp[y], self.comp[x]);
        // y must end up with sign(x) * rel relative to the merged class
        let adjust = self.sign[x] * rel * self.sign[y];
        for i in 0..self.comp.len() {
            if self.comp[i] == from {
                self.comp[i] = to;
                self.sign[i] *= adjust;
            }
        }
        Union::Merged
    }
}

#[derive(Clone, Debug)]
pub enum DsuOp {
    Union(usize, usize, bool),
    Checkpoint,
    Rollback,
    UndoLast,
}

pub fn dsu_program() -> impl Strategy<Value = (usize, Vec<DsuOp>)> {
    let op = prop_oneof![
        6 => (0usize..13, 0usize..13, any::<bool>()).prop_map(|(x, y, f)| DsuOp::Union(x, y, f)),
        1 => Just(DsuOp::Checkpoint),
        1 => Just(DsuOp::Rollback),
        1 => Just(DsuOp::UndoLast),
    ];
    (1usize..14, prop::collection::vec(op, 1..40))
}

fn dsu_agrees(d: &SignedDsu, o: &Relations) -> Result<(), TestCaseError> {
    let n = o.comp.len();
    for x in 0..n {
        let (rx, sx) = d.find(x);
        prop_assert_eq!(d.find(rx).1, Sign::Pos, "root carries a sign");
        for y in 0..n {
            let (ry, sy) = d.find(y);
            prop_assert_eq!(rx == ry, o.comp[x] == o.comp[y]);
            if rx == ry {
                prop_assert_eq!(sx.times(sy).value(), o.sign[x] * o.sign[y]);
            }
        }
    }
    Ok(())
}

pub fn check_dsu((n, ops): (usize, Vec<DsuOp>)) -> Result<(), TestCaseError> {
    let mut d = SignedDsu::new(n);
    let mut o = Relations::new(n);
    // per checkpoint: mark, copies of both sides, merge count at the time
    let mut marks = Vec::new();
    let mut merges: Vec<(SignedDsu, Relations)> = Vec::new();
    let log_bound = usize::BITS as usize - n.leading_zeros() as usize;
    for op in ops {
        match op {
            DsuOp::Union(x, y, f) => {
                let (x, y) = (x % n, y % n);
                let rel = Sign::from_bool_flip(f);
                let before = (d.clone(), o.clone());
                let got = d.union(x, y, rel);
                prop_assert_eq!(got, o.union(x, y, rel.value()));
                if got == Union::Merged {
                    merges.push(before);
                    prop_assert!(d.depth(x).max(d.depth(y)) < log_bound);
                } else {
                    prop_assert_eq!(&d, &before.0, "non-merge changed the structure");
                }
            }
            DsuOp::Checkpoint => marks.push((d.checkpoint(), d.clone(), o.clone(), merges.len())),
            DsuOp::Rollback => {
                if let Some((m, snap, osnap, len)) = marks.pop() {
                    d.rollback(m).unwrap();
                    prop_assert_eq!(&d, &snap, "rollback is not exact");
                    o = osnap;
                    merges.truncate(len);
                }
            }
            DsuOp::UndoLast => {
                prop_assert_eq!(d.undo_last(), !merges.is_empty());
                if let Some((snap, osnap)) = merges.pop() {
                    prop_assert_eq!(&d, &snap, "undo is not exact");
                    o = osnap;
                    let depth = merges.len();
                    marks.retain(|(_, _, _, len)| *len <= depth);
                }
            }
        }
        prop_assert_eq!(d.components(), n - merges.len());
        dsu_agrees(&d, &o)?;
    }
    Ok(())
}

// ----------------------------------------------------------- skip list

/// Plain partner table over ends `(node, side)`.
#[derive(Clone, PartialEq, Debug)]
pub struct Ring {
    partner: Vec<Option<(usize, u8)>>,
}

impl Ring {
    pub fn new(cap: usize) -> Self {
        Ring { partner: vec![None; 2 * cap] }
    }

    fn live(&self, x: usize) -> bool {
        self.partner[2 * x].is_some()
    }

    fn get(&self, e: (usize, u8)) -> (usize, u8) {
        self.partner[2 * e.0 + e.1 as usize].expect("live end")
    }

    fn pair(&mut self, a: (usize, u8), b: (usize, u8)) {
        self.partner[2 * a.0 + a.1 as usize] = Some(b);
        self.partner[2 * b.0 + b.1 as usize] = Some(a);
    }

    fn kill(&mut self, x: usize) {
        self.partner[2 * x] = None;
        self.partner[2 * x + 1] = None;
    }

    /// Exit ends met walking from entry end `start` until `stop` is met as
    /// an exit.
    fn exits_from(&self, start: (usize, u8), stop: (usize, u8)) -> Vec<(usize, u8)> {
        let mut out = Vec::new();
        let mut exit = (start.0, 1 - start.1);
        loop {
            out.push(exit);
            if exit == stop {
                return out;
            }
            let entry = self.get(exit);
            exit = (entry.0, 1 - entry.1);
        }
    }

    fn cycle_nodes(&self, x: usize) -> Vec<usize> {
        let stop = (x, 1);
        self.exits_from(self.get(stop), stop).into_iter().map(|e| e.0).collect()
    }
}

fn end(e: (usize, u8)) -> End {
    End::new(e.0, e.1)
}

/// Every link at every level of every live tower.
fn towers(list: &CyclicSkipList) -> Vec<(usize, usize, u8, End)> {
    let mut out = Vec::new();
    for x in (0..list.capacity()).filter(|&x| list.is_live(x)) {
        for level in 0..list.height(x) {
            for side in 0..2 {
                out.push((x, level, side, list.link(level, End::new(x, side))));
            }
        }
    }
    out
}

fn ring_agrees(list: &CyclicSkipList, ring: &Ring) -> Result<(), TestCaseError> {
    list.audit().map_err(TestCaseError::fail)?;
    for x in 0..list.capacity() {
        prop_assert_eq!(list.is_live(x), ring.live(x));
        if !ring.live(x) {
            continue;
        }
        for side in 0..2 {
            prop_assert_eq!(list.partner(End::new(x, side)), end(ring.get((x, side))));
        }
        let members = ring.cycle_nodes(x);
        let top = members.iter().map(|&m| list.height(m)).max().unwrap();
        let expect = members.iter().copied().filter(|&m| list.height(m) == top).min().unwrap();
        prop_assert_eq!(list.find_last(x), expect);
    }
    Ok(())
}

pub type SkipProgram = (u64, Vec<(u8, u16, u16, u16)>);

pub fn skiplist_program() -> impl Strategy<Value = SkipProgram> {
    (any::<u64>(), prop::collection::vec((0u8..6, any::<u16>(), any::<u16>(), any::<u16>()), 1..40))
}

/// Interprets each step as make-cycle, insert, delete, splice, split or
/// undo, choosing valid arguments from the oracle's current state.
pub fn check_skiplist((seed, program): SkipProgram) -> Result<(), TestCaseError> {
    const CAP: usize = 20;
    let mut list = CyclicSkipList::new(CAP, seed);
    let mut ring = Ring::new(CAP);
    let mut history: Vec<(SurgeryToken, Ring, Vec<(usize, usize, u8, End)>)> = Vec::new();
    for (op, r1, r2, r3) in program {
        let live: Vec<usize> = (0..CAP).filter(|&x| ring.live(x)).collect();
        let dead: Vec<usize> = (0..CAP).filter(|&x| !ring.live(x)).collect();
        let pick_end = |r: u16| -> (usize, u8) { (live[r as usize % live.len()], (r / 1024 % 2) as u8) };
        let before = (ring.clone(), towers(&list));
        let token = match op {
            0 if !dead.is_empty() => {
                let k = 1 + (r1 as usize % 4).min(dead.len() - 1);
                let start = r2 as usize % dead.len();
                let seq: Vec<(usize, u8)> =
                    (0..k).map(|i| (dead[(start + i) % dead.len()], ((r3 >> i) & 1) as u8)).collect();
                for i in 0..k {
                    let next = seq[(i + 1) % k];
                    ring.pair(seq[i], (next.0, 1 - next.1));
                }
                Some(list.make_cycle(&seq).unwrap())
            }
            1 if !dead.is_empty() && !live.is_empty() => {
                let x = dead[r1 as usize % dead.len()];
                let at = pick_end(r2);
                let b = ring.get(at);
                ring.pair(at, (x, 0));
                ring.pair((x, 1), b);
                Some(list.insert(x, end(at)).unwrap())
            }
            2 if !live.is_empty() => {
                let x = live[r1 as usize % live.len()];
                let a = ring.get((x, 0));
                let b = ring.get((x, 1));
                ring.kill(x);
                if a.0 != x {
                    ring.pair(a, b);
                }
                Some(list.delete(x).unwrap())
            }
            3 if !live.is_empty() => {
                let (a, c) = (pick_end(r1), pick_end(r2));
                if ring.cycle_nodes(a.0).contains(&c.0) {
                    prop_assert!(list.splice(end(a), end(c)).is_err());
                    None
                } else {
                    let (b, d) = (ring.get(a), ring.get(c));
                    ring.pair(a, c);
                    ring.pair(b, d);
                    Some(list.splice(end(a), end(c)).unwrap())
                }
            }
            4 if !live.is_empty() => {
                let a = pick_end(r1);
                let b = ring.get(a);
                let exits = ring.exits_from(b, a);
                let c = exits[r2 as usize % exits.len()];
                if c == a {
                    None
                } else {
                    let d = ring.get(c);
                    ring.pair(b, c);
                    ring.pair(a, d);
                    Some(list.split(end(a), end(c)).unwrap())
                }
            }
            5 => {
                if let Some((t, old_ring, old_towers)) = history.pop() {
                    list.undo(t).unwrap();
                    ring = old_ring;
                    prop_assert_eq!(towers(&list), old_towers, "undo did not restore every level");
                }
                None
            }
            _ => None,
        };
        if let Some(t) = token {
            history.push((t, before.0, before.1));
        }
        prop_assert_eq!(list.pending_surgeries(), history.len());
        ring_agrees(&list, &ring)?;
    }
    while let Some((t, _, old_towers)) = history.pop() {
        list.undo(t).unwrap();
        prop_assert_eq!(towers(&list), old_towers);
    }
    prop_assert!((0..CAP).all(|x| !list.is_live(x)));
    Ok(())
}

/// Mean `find_last` step counts on single cycles of `2^6 .. 2^14` nodes
/// and the least-squares slope against `log2 m`.
pub struct FindCost {
    pub sizes: Vec<usize>,
    pub costs: Vec<f64>,
    pub slope: f64,
}

pub fn find_cost() -> FindCost {
    let sizes: Vec<usize> = (6..=14).map(|k| 1usize << k).collect();
    let costs: Vec<f64> = sizes
        .iter()
        .map(|&m| {
            let (mut total, mut count) = (0usize, 0usize);
            for seed in 0..20u64 {
                let mut list = CyclicSkipList::new(m, seed);
                let seq: Vec<(usize, u8)> = (0..m).map(|x| (x, 1)).collect();
                let _ = list.make_cycle(&seq).unwrap();
                for k in 0..500 {
                    let x = (k * 7919 + seed as usize * 104_729) % m;
                    total += list.find_last_counted(x).1;
                    count += 1;
                }
            }
            total as f64 / count as f64
        })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&m| (m as f64).log2()).collect();
    let k = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), costs.iter().sum::<f64>());
    let sxy: f64 = xs.iter().zip(&costs).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    FindCost { sizes, costs, slope }
}

impl FindCost {
    /// Every mean is at most `c log2 m`, and growth from the smallest to
    /// the largest size is far below the 256-fold of a linear scan.
    pub fn within(&self, c: f64) -> bool {
        let bounded = self.sizes.iter().zip(&self.costs).all(|(&m, &cost)| cost <= c * (m as f64).log2());
        bounded && self.costs[self.costs.len() - 1] < 4.0 * self.costs[0] && self.slope > 0.0 && self.slope < c
    }
}

// ----------------------------------------------------------- link tracker

fn link_id(e: LinkEdge) -> (usize, u8, u8) {
    (e.tet, e.vertex, e.face)
}

type LinkShape = (Vec<Vec<(usize, u8, u8)>>, Vec<Vec<usize>>);

fn tracked(state: &LinkState) -> LinkShape {
    let mut cycles: Vec<Vec<(usize, u8, u8)>> = state
        .boundary_cycles()
        .iter()
        .map(|c| normalize_cycle(&c.iter().map(|&e| link_id(e)).collect::<Vec<_>>()))
        .collect();
    cycles.sort();
    (cycles, state.surfaces())
}

fn rebuilt(tri: &Triangulation) -> LinkShape {
    let reports = build_links(tri);
    let mut cycles: Vec<Vec<(usize, u8, u8)>> =
        reports.iter().flat_map(|r| r.boundary_cycles.iter().map(|c| normalize_cycle(c))).collect();
    cycles.sort();
    let mut surfaces: Vec<Vec<usize>> = reports
        .iter()
        .map(|r| {
            let mut s: Vec<usize> = r.triangles.iter().map(|&(t, v)| 4 * t + v as usize).collect();
            s.sort();
            s
        })
        .collect();
    surfaces.sort();
    (cycles, surfaces)
}

/// Every link a sphere or punctured sphere and no edge reversed.
fn still_valid(tri: &Triangulation) -> bool {
    check_edges(tri) == EdgeCheck::Ok && build_links(tri).iter().all(|r| r.is_sphere() || r.is_punctured_sphere())
}

pub type LinkProgram = (usize, u64, Vec<(u16, u16, usize, u8)>);

pub fn link_program() -> impl Strategy<Value = LinkProgram> {
    (1usize..4, any::<u64>(), prop::collection::vec((any::<u16>(), any::<u16>(), 0usize..6, 0u8..5), 1..16))
}

/// Random face gluings and LIFO ungluings, compared after every step with
/// links rebuilt from scratch.
pub fn check_links((n, seed, program): LinkProgram) -> Result<(), TestCaseError> {
    let mut state = LinkState::new(n, true, seed);
    let mut tri = Triangulation::new(n);
    let mut stack: Vec<(FaceToken, FaceSlot, String)> = Vec::new();
    for (r1, r2, p, kind) in program {
        if kind == 0 {
            if let Some((token, a, dump)) = stack.pop() {
                state.unglue_faces(token).unwrap();
                tri.unglue(a).unwrap();
                prop_assert_eq!(state.dump(), dump, "unglue did not restore");
            }
        } else {
            let free: Vec<usize> = (0..4 * n).filter(|&i| !tri.is_glued(FaceSlot::from_index(i))).collect();
            if free.len() < 2 {
                continue;
            }
            let a = FaceSlot::from_index(free[r1 as usize % free.len()]);
            let rest: Vec<usize> = free.iter().copied().filter(|&i| i != a.index()).collect();
            let b = FaceSlot::from_index(rest[r2 as usize % rest.len()]);
            let sigma = Perm4::all().filter(|s| s.apply(3 - a.face) == 3 - b.face).nth(p).unwrap();
            let dump = state.dump();
            let mut trial = tri.clone();
            trial.glue(a, b, sigma).unwrap();
            match state.glue_faces(a, b, sigma).unwrap() {
                Glue::Pass(token) => {
                    prop_assert!(still_valid(&trial), "passed an invalid gluing");
                    tri = trial;
                    stack.push((token, a, dump));
                }
                Glue::Prune(reason) => {
                    prop_assert_eq!(state.dump(), dump, "prune left changes behind");
                    prop_assert!(!still_valid(&trial), "pruned a valid gluing");
                    match reason {
                        PruneReason::EdgeReversed => prop_assert!(check_edges(&trial) != EdgeCheck::Ok),
                        PruneReason::Orientation => prop_assert!(build_links(&trial).iter().any(|r| !r.orientable)),
                        PruneReason::Genus => {}
                    }
                }
            }
        }
        state.audit().map_err(TestCaseError::fail)?;
        prop_assert_eq!(tracked(&state), rebuilt(&tri));
        prop_assert_eq!(state.boundary_count(), 12 * n - 3 * tri.glued_count());
    }
    Ok(())
}

// ---------------------------------------------------------------- signatures

pub fn face_maps(a: FaceSlot, b: FaceSlot) -> Vec<Perm4> {
    Perm4::all().filter(|p| p.apply(3 - a.face) == 3 - b.face).collect()
}

/// Random complete triangulation, not necessarily connected.
pub fn random_triangulation(rng: &mut ChaCha8Rng, n: usize) -> Triangulation {
    let mut slots: Vec<usize> = (0..4 * n).collect();
    slots.shuffle(rng);
    let mut tri = Triangulation::new(n);
    for pair in slots.chunks(2) {
        let (a, b) = (FaceSlot::from_index(pair[0]), FaceSlot::from_index(pair[1]));
        let maps = face_maps(a, b);
        tri.glue(a, b, maps[rng.gen_range(0..6)]).unwrap();
    }
    tri
}

pub fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> Triangulation {
    loop {
        let t = random_triangulation(rng, n);
        if t.is_connected() {
            return t;
        }
    }
}

pub fn random_iso(rng: &mut ChaCha8Rng, n: usize) -> Isomorphism {
    let mut tet_image: Vec<usize> = (0..n).collect();
    tet_image.shuffle(rng);
    let vertex_maps = (0..n).map(|_| Perm4::from_index(rng.gen_range(0..24)).unwrap()).collect();
    Isomorphism { tet_image, vertex_maps }
}

/// Census triangulations plus random connected ones for each size up to
/// `max_n`, each checked against `relabels` random relabellings. Returns
/// the number of triangulations checked.
pub fn check_signature_invariance(max_n: usize, relabels: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    for n in 1..=max_n {
        let mut pool: Vec<Triangulation> = enumerate(SearchConfig::new(n, Mode::All))
            .signatures()
            .iter()
            .map(|s| decode_signature(s).unwrap())
            .collect();
        pool.extend((0..20).map(|_| random_connected(&mut rng, n)));
        for tri in &pool {
            let sig = iso_signature(tri).map_err(|e| e.to_string())?;
            let canon = canonical(tri).map_err(|e| e.to_string())?;
            if canon.signature != sig || iso_signature(&canon.triangulation).ok().as_ref() != Some(&sig) {
                return Err(format!("canonical form disagrees for {sig}"));
            }
            for _ in 0..relabels {
                let other = tri.relabel(&random_iso(&mut rng, n));
                if iso_signature(&other).ok().as_ref() != Some(&sig) {
                    return Err(format!("relabelling changed signature {sig}"));
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Signature classes over every connected complete gluing of `n`
/// tetrahedra against orbits found by applying all relabellings.
pub fn check_signature_classes(n: usize) -> Result<usize, String> {
    let reps = brute_classes(n, &|t: &Triangulation| t.is_connected()).map_err(|e| e.to_string())?;
    let rep_sigs: BTreeSet<String> = reps.iter().map(|t| iso_signature(t).unwrap()).collect();
    if rep_sigs.len() != reps.len() {
        return Err(format!("n={n}: {} classes but {} signatures", reps.len(), rep_sigs.len()));
    }
    let mut all = BTreeSet::new();
    for_each_gluing(n, &mut |t: &Triangulation| {
        if t.is_connected() {
            all.insert(iso_signature(t).unwrap());
        }
    });
    if all != rep_sigs {
        return Err(format!("n={n}: {} signatures over all gluings, {} orbits", all.len(), rep_sigs.len()));
    }
    Ok(reps.len())
}
