//! The census search.
//!
//! For each canonical face pairing, pairs of faces are glued in order of
//! their lower slot, trying the six face maps of each pair in index order.
//! Pruning levels:
//!
//! * `0`: no incremental tests; each complete table is checked by the
//!   naive validator.
//! * `1`: edge-reversal and link orientability tests; at a leaf the links
//!   are spheres exactly when `V - E + n = 0`.
//! * `2`: level 1 plus the boundary-cycle genus test, after which every
//!   leaf is a 3-manifold triangulation.
//!
//! Isomorphs are removed by signature within each pairing. Work can be cut
//! into jobs, each a gluing prefix that is replayed from a fresh state.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::to_tri;
use crate::fpg::{enumerate_pairings, FacePairing, PairingError};
use crate::isosig::{decode_signature, iso_signature};
use crate::linktrack::{Glue, LinkState, PruneReason};
use crate::perm::{face_maps, Perm4};
use crate::triangulation::{FaceSlot, Triangulation};
use crate::validate::is_3manifold;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    All,
    Orientable,
    NonOrientable,
}

impl Mode {
    pub fn accepts(self, orientable: bool) -> bool {
        match self {
            Mode::All => true,
            Mode::Orientable => orientable,
            Mode::NonOrientable => !orientable,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::All => "all",
            Mode::Orientable => "orientable",
            Mode::NonOrientable => "nonorientable",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(Mode::All),
            "orientable" => Ok(Mode::Orientable),
            "nonorientable" | "non-orientable" => Ok(Mode::NonOrientable),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub size: usize,
    pub mode: Mode,
    pub pruning: u8,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(size: usize, mode: Mode) -> Self {
        SearchConfig { size, mode, pruning: 2, seed: 0 }
    }

    pub fn with_pruning(mut self, pruning: u8) -> Self {
        self.pruning = pruning;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Gluings that survived every active test.
    pub nodes: u64,
    /// Gluings attempted.
    pub attempts: u64,
    pub prune_orient: u64,
    pub prune_edge: u64,
    pub prune_genus: u64,
    /// Complete tables reached.
    pub leaves: u64,
    /// Leaves accepted as closed 3-manifold triangulations in the mode.
    pub accepted: u64,
    pub boundary_peak: u64,
}

impl SearchStats {
    pub fn add(&mut self, o: &SearchStats) {
        self.nodes += o.nodes;
        self.attempts += o.attempts;
        self.prune_orient += o.prune_orient;
        self.prune_edge += o.prune_edge;
        self.prune_genus += o.prune_genus;
        self.leaves += o.leaves;
        self.accepted += o.accepted;
        self.boundary_peak = self.boundary_peak.max(o.boundary_peak);
    }
}

/// Classes found under one face pairing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingResult {
    /// Signature to orientability.
    pub signatures: BTreeMap<String, bool>,
    pub stats: SearchStats,
}

impl PairingResult {
    fn absorb(&mut self, other: PairingResult) {
        self.signatures.extend(other.signatures);
        self.stats.add(&other.stats);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub total: usize,
    pub orientable: usize,
    pub nonorientable: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusResult {
    pub config: SearchConfig,
    pub pairings: BTreeMap<usize, PairingResult>,
}

impl CensusResult {
    pub fn empty(config: SearchConfig) -> Self {
        CensusResult { config, pairings: BTreeMap::new() }
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for p in self.pairings.values() {
            for &o in p.signatures.values() {
                c.total += 1;
                if o {
                    c.orientable += 1;
                } else {
                    c.nonorientable += 1;
                }
            }
        }
        c
    }

    pub fn stats(&self) -> SearchStats {
        let mut s = SearchStats::default();
        for p in self.pairings.values() {
            s.add(&p.stats);
        }
        s
    }

    /// All signatures, sorted.
    pub fn signatures(&self) -> Vec<String> {
        let mut v: Vec<String> = self.pairings.values().flat_map(|p| p.signatures.keys().cloned()).collect();
        v.sort();
        v
    }

    /// Compact `.tri` lines of the canonical representatives, in pairing
    /// then signature order.
    pub fn tri_lines(&self) -> Vec<String> {
        self.pairings
            .values()
            .flat_map(|p| p.signatures.keys())
            .map(|s| to_tri(&decode_signature(s).expect("signatures come from the search")))
            .collect()
    }

    /// Adds another result for the same configuration.
    pub fn absorb(&mut self, other: CensusResult) {
        for (i, p) in other.pairings {
            self.pairings.entry(i).or_default().absorb(p);
        }
    }

    /// Merges results; order does not matter.
    pub fn merge(config: SearchConfig, parts: impl IntoIterator<Item = CensusResult>) -> CensusResult {
        let mut out = CensusResult::empty(config);
        for p in parts {
            out.absorb(p);
        }
        out
    }

    /// `n=<N> mode=<M> total=<T> orientable=<O> nonorientable=<X> nodes=<V>`
    pub fn summary_line(&self) -> String {
        let c = self.counts();
        format!(
            "n={} mode={} total={} orientable={} nonorientable={} nodes={}",
            self.config.size,
            self.config.mode,
            c.total,
            c.orientable,
            c.nonorientable,
            self.stats().nodes
        )
    }

    /// Per-pairing statistics as CSV with a header row.
    pub fn stats_csv(&self) -> String {
        let mut out = String::from("pairing_index,nodes,prune_orient,prune_edge,prune_genus,leaves,kept\n");
        for (i, p) in &self.pairings {
            let s = &p.stats;
            out.push_str(&format!(
                "{i},{},{},{},{},{},{}\n",
                s.nodes,
                s.prune_orient,
                s.prune_edge,
                s.prune_genus,
                s.leaves,
                p.signatures.len()
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JobError {
    #[error("job prefix does not follow the pairing at step {0}")]
    PrefixMismatch(usize),
    #[error("job prefix fails its own pruning tests at step {step}: {reason}")]
    CorruptPrefix { step: usize, reason: String },
    #[error("job syntax: {0}")]
    Syntax(String),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error("pairing index {index} out of range for size {size}")]
    NoSuchPairing { index: usize, size: usize },
}

/// One replayable piece of the search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobDescriptor {
    pub config: SearchConfig,
    pub pairing_index: usize,
    pub pairing: FacePairing,
    /// Face maps chosen for the first pairs, in search order.
    pub prefix: Vec<Perm4>,
}

impl JobDescriptor {
    /// `size mode pruning seed | index | pairing | slot=T:P ...`
    pub fn to_line(&self) -> String {
        let pairs = self.pairing.pairs();
        let prefix: Vec<String> = self
            .prefix
            .iter()
            .zip(&pairs)
            .map(|(p, (a, b))| format!("{}={}:{}", a, b.tet, p.index()))
            .collect();
        format!(
            "{} {} {} {} | {} | {} | {}",
            self.config.size,
            self.config.mode,
            self.config.pruning,
            self.config.seed,
            self.pairing_index,
            self.pairing.to_line(),
            prefix.join(" ")
        )
        .trim_end()
        .to_string()
    }

    pub fn parse_line(line: &str) -> Result<JobDescriptor, JobError> {
        let parts: Vec<&str> = line.split('|').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(JobError::Syntax(format!("expected 4 fields, found {}", parts.len())));
        }
        let head: Vec<&str> = parts[0].split_whitespace().collect();
        let bad = |what: &str| JobError::Syntax(format!("bad {what}"));
        if head.len() != 4 {
            return Err(bad("header"));
        }
        let config = SearchConfig {
            size: head[0].parse().map_err(|_| bad("size"))?,
            mode: head[1].parse().map_err(|_| bad("mode"))?,
            pruning: head[2].parse().ok().filter(|&p: &u8| p <= 2).ok_or_else(|| bad("pruning"))?,
            seed: head[3].parse().map_err(|_| bad("seed"))?,
        };
        let pairing_index = parts[1].parse().map_err(|_| bad("pairing index"))?;
        let pairing = FacePairing::parse_line(parts[2])?;
        if pairing.size() != config.size {
            return Err(bad("pairing size"));
        }
        let pairs = pairing.pairs();
        let mut prefix = Vec::new();
        for (i, tok) in parts[3].split_whitespace().enumerate() {
            let (slot, rest) = tok.split_once('=').ok_or_else(|| bad("prefix token"))?;
            let (t, p) = rest.split_once(':').ok_or_else(|| bad("prefix token"))?;
            let p: usize = p.parse().map_err(|_| bad("prefix perm"))?;
            let t: usize = t.parse().map_err(|_| bad("prefix tet"))?;
            let perm = Perm4::from_index(p).map_err(|_| bad("prefix perm"))?;
            match pairs.get(i) {
                Some((a, b)) if a.to_string() == slot && b.tet == t => {}
                _ => return Err(JobError::PrefixMismatch(i)),
            }
            prefix.push(perm);
        }
        Ok(JobDescriptor { config, pairing_index, pairing, prefix })
    }
}

/// Mutable search state for one pairing.
struct Engine<'a> {
    config: SearchConfig,
    pairs: Vec<(FaceSlot, FaceSlot)>,
    maps: Vec<[Perm4; 6]>,
    tri: Triangulation,
    links: Option<LinkState>,
    /// Tetrahedron signs in orientable mode (0 = unset).
    signs: Vec<i8>,
    result: PairingResult,
    frontier: Option<(usize, &'a mut Vec<Vec<Perm4>>)>,
    chosen: Vec<Perm4>,
}

enum Step {
    Pass { signed: Option<usize> },
    Prune(PruneReason),
}

impl<'a> Engine<'a> {
    fn new(config: SearchConfig, pairing: &FacePairing) -> Self {
        let pairs = pairing.pairs();
        let maps = pairs.iter().map(|(a, b)| face_maps(a.face, b.face)).collect();
        let n = config.size;
        let links = (config.pruning >= 1).then(|| LinkState::new(n, config.pruning >= 2, config.seed));
        let mut signs = vec![0i8; n];
        if n > 0 {
            signs[0] = 1;
        }
        Engine {
            config,
            pairs,
            maps,
            tri: Triangulation::new(n),
            links,
            signs,
            result: PairingResult::default(),
            frontier: None,
            chosen: Vec::new(),
        }
    }

    /// Applies the `depth`-th gluing with `perm`, running the active tests.
    #[inline]
    fn try_glue(&mut self, depth: usize, perm: Perm4) -> Step {
        let (a, b) = self.pairs[depth];
        let mut signed = None;
        if self.config.mode == Mode::Orientable {
            // odd gluings keep the sign, even gluings flip it
            let sa = self.signs[a.tet];
            debug_assert!(sa != 0, "pairs are ordered so the lower tetrahedron is already signed");
            let want = if perm.is_even() { -sa } else { sa };
            if a.tet == b.tet {
                if want != sa {
                    return Step::Prune(PruneReason::Orientation);
                }
            } else {
                match self.signs[b.tet] {
                    0 => {
                        self.signs[b.tet] = want;
                        signed = Some(b.tet);
                    }
                    s if s != want => return Step::Prune(PruneReason::Orientation),
                    _ => {}
                }
            }
        }
        if let Some(links) = self.links.as_mut() {
            if let Glue::Prune(r) = links.glue_faces_unchecked(a, b, perm) {
                if let Some(t) = signed {
                    self.signs[t] = 0;
                }
                return Step::Prune(r);
            }
        }
        self.tri.glue(a, b, perm).expect("pairs are disjoint");
        Step::Pass { signed }
    }

    #[inline]
    fn unglue(&mut self, depth: usize, signed: Option<usize>) {
        let (a, _) = self.pairs[depth];
        self.tri.unglue(a).expect("glued on the way down");
        if let Some(links) = self.links.as_mut() {
            links.unglue_last_face();
        }
        if let Some(t) = signed {
            self.signs[t] = 0;
        }
    }

    fn count_prune(&mut self, r: PruneReason) {
        match r {
            PruneReason::Orientation => self.result.stats.prune_orient += 1,
            PruneReason::EdgeReversed => self.result.stats.prune_edge += 1,
            PruneReason::Genus => self.result.stats.prune_genus += 1,
        }
    }

    fn dfs(&mut self, depth: usize) {
        if let Some((stop, _)) = self.frontier.as_ref() {
            if depth == *stop {
                let chosen = self.chosen.clone();
                self.frontier.as_mut().unwrap().1.push(chosen);
                return;
            }
        }
        if depth == self.pairs.len() {
            self.leaf();
            return;
        }
        for i in 0..6 {
            let perm = self.maps[depth][i];
            self.result.stats.attempts += 1;
            match self.try_glue(depth, perm) {
                Step::Prune(r) => self.count_prune(r),
                Step::Pass { signed } => {
                    self.result.stats.nodes += 1;
                    if let Some(l) = self.links.as_ref() {
                        let b = l.boundary_peak() as u64;
                        if b > self.result.stats.boundary_peak {
                            self.result.stats.boundary_peak = b;
                        }
                    }
                    self.chosen.push(perm);
                    self.dfs(depth + 1);
                    self.chosen.pop();
                    self.unglue(depth, signed);
                }
            }
        }
    }

    fn leaf(&mut self) {
        self.result.stats.leaves += 1;
        let n = self.config.size as i64;
        let manifold = match self.config.pruning {
            0 => is_3manifold(&self.tri).map(|v| v.is_manifold()).unwrap_or(false),
            1 => {
                let l = self.links.as_ref().expect("level 1 tracks links");
                l.surface_count() as i64 - l.edge_class_count() as i64 + n == 0
            }
            _ => true,
        };
        if !manifold {
            return;
        }
        let orientable = match self.config.mode {
            Mode::Orientable => true,
            _ => self.tri.is_orientable().expect("complete and connected"),
        };
        if !self.config.mode.accepts(orientable) {
            return;
        }
        self.result.stats.accepted += 1;
        let sig = iso_signature(&self.tri).expect("complete and connected");
        self.result.signatures.insert(sig, orientable);
    }

    /// Replays a prefix, failing if any step is pruned.
    fn replay(&mut self, prefix: &[Perm4]) -> Result<(), JobError> {
        for (depth, &perm) in prefix.iter().enumerate() {
            if depth >= self.pairs.len() || !self.maps[depth].contains(&perm) {
                return Err(JobError::PrefixMismatch(depth));
            }
            match self.try_glue(depth, perm) {
                Step::Prune(r) => return Err(JobError::CorruptPrefix { step: depth, reason: r.to_string() }),
                Step::Pass { .. } => self.chosen.push(perm),
            }
        }
        Ok(())
    }
}

/// Searches the subtree below one job's prefix.
pub fn run_job(job: &JobDescriptor) -> Result<CensusResult, JobError> {
    let mut engine = Engine::new(job.config, &job.pairing);
    engine.replay(&job.prefix)?;
    engine.dfs(job.prefix.len());
    let mut out = CensusResult::empty(job.config);
    out.pairings.insert(job.pairing_index, engine.result);
    Ok(out)
}

/// Runs the whole search, handing each pairing's result to `sink` as soon
/// as it is complete.
pub fn enumerate_with(config: SearchConfig, mut sink: impl FnMut(usize, &FacePairing, PairingResult)) {
    for (i, fp) in enumerate_pairings(config.size).iter().enumerate() {
        let mut engine = Engine::new(config, fp);
        engine.dfs(0);
        sink(i, fp, engine.result);
    }
}

/// Runs the whole search.
pub fn enumerate(config: SearchConfig) -> CensusResult {
    let mut out = CensusResult::empty(config);
    enumerate_with(config, |i, _, r| {
        out.pairings.insert(i, r);
    });
    out
}

/// The surviving search nodes at depth `min(depth, 2n)`, one job each.
pub fn split_jobs(config: SearchConfig, depth: usize) -> Vec<JobDescriptor> {
    let stop = depth.min(2 * config.size);
    let mut jobs = Vec::new();
    for (i, fp) in enumerate_pairings(config.size).into_iter().enumerate() {
        let mut prefixes = Vec::new();
        {
            let mut engine = Engine::new(config, &fp);
            engine.frontier = Some((stop, &mut prefixes));
            engine.dfs(0);
        }
        for prefix in prefixes {
            jobs.push(JobDescriptor { config, pairing_index: i, pairing: fp.clone(), prefix });
        }
    }
    jobs
}
