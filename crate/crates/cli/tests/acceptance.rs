//! One PASS/FAIL line per acceptance criterion. Runs sequentially so the
//! wall-time comparison is not disturbed by other tests.
//!
//! The seven-tetrahedron census only runs when `LINKCENSUS_NIGHTLY` is set.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use linkcensus::validate::{brute_census, build_links, is_3manifold};
use linkcensus::{enumerate, parse_table, FaceSlot, Glue, LinkState, Mode, SearchConfig};
use num_bigint::BigUint;
use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::Instant;

const TABLE: &str = "A | C: 013 | B: 012 | A: 312 | A: 230
                     B | A: 013 | C: 120 | C: 231 | C: 302
                     C | B: 301 | A: 012 | B: 231 | B: 302";

/// (total, orientable, non-orientable) for one through seven tetrahedra.
const TOTALS: [(usize, usize, usize); 7] = [
    (4, 4, 0),
    (17, 16, 1),
    (81, 76, 5),
    (577, 532, 45),
    (5184, 4807, 377),
    (57753, 52946, 4807),
    (722765, 658474, 64291),
];

const NODE_RATIO_MAX: f64 = 0.10;
const SPEEDUP_MIN: f64 = 5.0;

fn cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_linkcensus")).args(args).output().expect("cli runs");
    assert!(out.status.success(), "linkcensus {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8 output")
}

/// `key=value` fields of the last line starting with `n=`.
fn summary(text: &str) -> BTreeMap<String, String> {
    let line = text.lines().rev().find(|l| l.starts_with("n=")).expect("summary line");
    line.split_whitespace().filter_map(|kv| kv.split_once('=')).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn totals_of(s: &BTreeMap<String, String>) -> (usize, usize, usize) {
    let get = |k: &str| s[k].parse::<usize>().unwrap();
    (get("total"), get("orientable"), get("nonorientable"))
}

struct Outcome {
    failed: Vec<u32>,
}

impl Outcome {
    fn report(&mut self, id: u32, pass: bool, detail: String) {
        println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn census_totals(out: &mut Outcome, n6: &BTreeMap<String, String>) {
    let mut got = Vec::new();
    for n in 1..=5 {
        let s = summary(&cli(&["census", "--size", &n.to_string(), "--mode", "all", "--sigs"]));
        got.push(totals_of(&s));
    }
    got.push(totals_of(n6));
    let pass = got[..] == TOTALS[..6];
    out.report(1, pass, format!("census totals n=1..6 {got:?}"));
}

fn extended(out: &mut Outcome) {
    if std::env::var_os("LINKCENSUS_NIGHTLY").is_none() {
        println!("criterion 2: SKIP n=7 census runs only with LINKCENSUS_NIGHTLY set");
        return;
    }
    let t = Instant::now();
    let threads = std::thread::available_parallelism().map_or(1, |p| p.get()).to_string();
    let s = summary(&cli(&["census", "--size", "7", "--mode", "all", "--sigs", "--threads", &threads]));
    let got = totals_of(&s);
    out.report(2, got == TOTALS[6], format!("n=7 {got:?} in {:.0}s", t.elapsed().as_secs_f64()));
}

fn pruning_invariance(out: &mut Outcome) {
    let mut detail = Vec::new();
    let mut pass = true;
    for n in 1..=5usize {
        let levels: &[u8] = if n <= 4 { &[0, 1, 2] } else { &[1, 2] };
        let sigs: Vec<Vec<String>> =
            levels.iter().map(|&l| enumerate(SearchConfig::new(n, Mode::All).with_pruning(l)).signatures()).collect();
        let same = sigs.windows(2).all(|w| w[0] == w[1]);
        pass &= same;
        detail.push(format!("n={n} levels {levels:?} {}", if same { "equal" } else { "differ" }));
    }
    out.report(3, pass, detail.join(", "));
}

fn pruning_power(out: &mut Outcome, bench: &str) {
    let row = |level: &str| -> Vec<f64> {
        let line = bench.lines().find(|l| l.starts_with(&format!("{level},"))).expect("bench row");
        line.split(',').map(|x| x.parse().unwrap()).collect()
    };
    let (l1, l2) = (row("1"), row("2"));
    let node_ratio = l2[1] / l1[1];
    let speedup = l1[8] / l2[8];
    let pass = node_ratio < NODE_RATIO_MAX && speedup >= SPEEDUP_MIN;
    out.report(
        4,
        pass,
        format!(
            "n=6 nodes {} vs {} (ratio {node_ratio:.4}, need < {NODE_RATIO_MAX}), time {:.1}s vs {:.1}s (speed-up {speedup:.2}x, need >= {SPEEDUP_MIN}x)",
            l2[1], l1[1], l2[8], l1[8]
        ),
    );
}

fn appendix_bound(out: &mut Outcome) {
    let s = cli(&["bound", "9"]);
    let exact = s.split_whitespace().find_map(|kv| kv.strip_prefix("exact=")).expect("exact field");
    let (p, q) = exact.split_once('/').unwrap_or((exact, "1"));
    let (p, q): (BigUint, BigUint) = (p.parse().unwrap(), q.parse().unwrap());
    // |p/q - T| <= tol T  with tol = 5 / 100000
    let target = BigUint::from(64_435u64) * BigUint::from(10u64).pow(8);
    let qt = &q * &target;
    let diff = if p > qt { &p - &qt } else { &qt - &p };
    let within = diff * 100_000u64 <= qt * 5u64;
    let one = cli(&["bound", "1"]);
    let pass = within && one.contains("exact=9/2");
    out.report(5, pass, format!("bound(9) {}", s.trim()));
}

fn worked_example(out: &mut Outcome) {
    let tri = parse_table(TABLE).expect("table parses");
    let (v, e) = (tri.vertex_classes().len(), tri.edge_classes().len());
    let links = build_links(&tri);
    let torus = links.len() == 1 && links[0].orientable && links[0].genus == Some(1) && links[0].boundary_cycles.is_empty();
    let manifold = is_3manifold(&tri).unwrap().is_manifold();
    let mut state = LinkState::new(3, true, 0);
    let mut pruned = None;
    for i in 0..12 {
        let a = FaceSlot::from_index(i);
        let g = tri.gluing(a).unwrap();
        if g.dest.index() < i {
            continue;
        }
        if let Glue::Prune(r) = state.glue_faces(a, g.dest, g.perm).unwrap() {
            pruned = Some(r);
            break;
        }
    }
    let pass = v == 1 && e == 3 && torus && !manifold && pruned == Some(linkcensus::PruneReason::Genus);
    out.report(6, pass, format!("vertices={v} edges={e} torus_link={torus} manifold={manifold} replay={pruned:?}"));
}

fn oracle_equivalence(out: &mut Outcome) {
    let t = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for n in 1..=2 {
        let brute = brute_census(n).unwrap();
        let fast: BTreeSet<String> = enumerate(SearchConfig::new(n, Mode::All)).signatures().into_iter().collect();
        pass &= brute == fast;
        detail.push(format!("n={n} brute {} search {}", brute.len(), fast.len()));
    }
    let secs = t.elapsed().as_secs_f64();
    out.report(7, pass && secs < 60.0, format!("{} in {secs:.1}s", detail.join(", ")));
}

fn structures(out: &mut Outcome) {
    let runs = [
        ("dsu", common::run_cases(common::CASES, common::dsu_program(), common::check_dsu)),
        ("skiplist", common::run_cases(common::CASES, common::skiplist_program(), common::check_skiplist)),
        ("linktrack", common::run_cases(common::CASES, common::link_program(), common::check_links)),
    ];
    let fit = common::find_cost();
    let fit_ok = fit.within(4.0);
    let mut detail: Vec<String> =
        runs.iter().map(|(name, r)| format!("{name} {}", r.as_ref().map_or_else(|e| e.clone(), |_| "ok".into()))).collect();
    detail.push(format!(
        "find_last mean steps {:.1}..{:.1} for m=2^6..2^14, slope {:.2}/doubling",
        fit.costs[0],
        fit.costs[fit.costs.len() - 1],
        fit.slope
    ));
    let pass = runs.iter().all(|(_, r)| r.is_ok()) && fit_ok;
    out.report(8, pass, format!("{} cases each: {}", common::CASES, detail.join(", ")));
}

fn signatures(out: &mut Outcome) {
    let inv = common::check_signature_invariance(3, 1000);
    let classes: Vec<Result<usize, String>> = (1..=2).map(common::check_signature_classes).collect();
    let pass = inv.is_ok() && classes.iter().all(|c| c.is_ok());
    out.report(9, pass, format!("relabelling invariance {inv:?}, brute classes n=1,2 {classes:?}"));
}

fn main() {
    // the harness passes filters and flags; a listing request gets nothing
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut out = Outcome { failed: Vec::new() };
    appendix_bound(&mut out);
    worked_example(&mut out);
    oracle_equivalence(&mut out);
    signatures(&mut out);
    structures(&mut out);
    pruning_invariance(&mut out);
    let t = Instant::now();
    let bench = cli(&["bench", "--size", "6", "--mode", "all"]);
    println!("bench n=6 ({:.0}s):\n{}", t.elapsed().as_secs_f64(), bench.trim_end());
    census_totals(&mut out, &summary(&bench));
    pruning_power(&mut out, &bench);
    extended(&mut out);
    if !out.failed.is_empty() {
        println!("failed criteria: {:?}", out.failed);
        std::process::exit(1);
    }
}
