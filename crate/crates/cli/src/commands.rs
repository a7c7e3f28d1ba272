use crate::bound::Bound;
use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use linkcensus::validate::{build_links, is_3manifold, ManifoldVerdict};
use linkcensus::{
    enumerate_pairings, enumerate_with, parse_table, parse_tri, run_job, split_jobs, to_tri, CensusResult,
    JobDescriptor, Mode, SearchConfig,
};
use rayon::prelude::*;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "linkcensus", version, about = "Census of closed 3-manifold triangulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate all triangulations of a given size.
    Census(CensusArgs),
    /// List connected face pairings in canonical form.
    Fpg(FpgArgs),
    /// Split a census into independent job lines.
    Jobs(JobsArgs),
    /// Run job lines, writing one JSON result per job.
    RunJob(RunJobArgs),
    /// Merge JSON job results into one census.
    Merge(MergeArgs),
    /// Compare pruning levels on the same census.
    Bench(BenchArgs),
    /// Report vertex links and manifold status of triangulations.
    Validate(ValidateArgs),
    /// Lower bound on combinatorial triangulations up to relabelling.
    Bound(BoundArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=15))]
    pub size: u32,
    #[arg(long, default_value = "all")]
    pub mode: Mode,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=2))]
    pub pruning: u8,
    #[arg(long, env = "LINKCENSUS_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig::new(self.size as usize, self.mode).with_pruning(self.pruning).with_seed(self.seed)
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Where triangulation lines go; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit isomorphism signatures instead of `.tri` lines.
    #[arg(long)]
    pub sigs: bool,
    /// Write per-pairing statistics as CSV.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
    /// Split depth used when running on several threads.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct FpgArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=12))]
    pub size: u32,
    /// Also print each pairing's multigraph.
    #[arg(long)]
    pub graphs: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct JobsArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunJobArgs {
    /// File of job lines; stdin when absent or `-`.
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MergeArgs {
    /// Files of JSON job results; stdin when none are given.
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=15))]
    pub size: u32,
    #[arg(long, default_value = "all")]
    pub mode: Mode,
    #[arg(long, env = "LINKCENSUS_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// File of `.tri` lines, or one table with `--table`; stdin when absent.
    pub input: Option<PathBuf>,
    /// Read the input as a single gluing table.
    #[arg(long)]
    pub table: bool,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(value_parser = clap::value_parser!(u32).range(1..=10000))]
    pub n: u32,
    /// Significant figures in the decimal rendering.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=50))]
    pub digits: u32,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Census(a) => census(a, stdout),
        Command::Fpg(a) => fpg(a, stdout),
        Command::Jobs(a) => jobs(a, stdout),
        Command::RunJob(a) => run_jobs(a, stdout),
        Command::Merge(a) => merge(a, stdout),
        Command::Bench(a) => bench(a, stdout),
        Command::Validate(a) => validate(a, stdout),
        Command::Bound(a) => {
            writeln!(stdout, "{}", Bound::new(a.n).render(a.digits))?;
            Ok(())
        }
    }
}

/// Runs `body` with either the named file or `stdout` as the sink.
fn with_sink<T>(path: Option<&Path>, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<T>) -> Result<T> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(f);
            let r = body(&mut w)?;
            w.flush()?;
            Ok(r)
        }
        None => body(stdout),
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    let mut s = String::new();
    match path {
        Some(p) if p != Path::new("-") => {
            File::open(p).with_context(|| format!("opening {}", p.display()))?.read_to_string(&mut s)?;
        }
        _ => {
            io::stdin().read_to_string(&mut s)?;
        }
    }
    Ok(s)
}

fn write_result_lines(result: &CensusResult, sigs: bool, w: &mut dyn Write) -> Result<()> {
    if sigs {
        for s in result.signatures() {
            writeln!(w, "{s}")?;
        }
    } else {
        for line in result.tri_lines() {
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

fn finish(result: &CensusResult, output: &OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    if let Some(p) = &output.stats {
        std::fs::write(p, result.stats_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    writeln!(stdout, "{}", result.summary_line())?;
    Ok(())
}

fn census(a: CensusArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = a.search.config();
    let result = if a.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(a.threads as usize).build()?;
        let jobs = split_jobs(config, a.depth);
        let parts: Vec<CensusResult> =
            pool.install(|| jobs.par_iter().map(|j| run_job(j).map_err(anyhow::Error::from)).collect::<Result<_>>())?;
        let merged = CensusResult::merge(config, parts);
        with_sink(a.output.out.as_deref(), stdout, |w| write_result_lines(&merged, a.output.sigs, w))?;
        merged
    } else {
        // stream each pairing's triangulations as soon as it finishes
        with_sink(a.output.out.as_deref(), stdout, |w| {
            let mut all = CensusResult::empty(config);
            let mut err = Ok(());
            enumerate_with(config, |i, _, r| {
                let mut one = CensusResult::empty(config);
                one.pairings.insert(i, r);
                if err.is_ok() {
                    err = write_result_lines(&one, a.output.sigs, w);
                }
                all.absorb(one);
            });
            err.map(|_| all)
        })?
    };
    finish(&result, &a.output, stdout)
}

fn fpg(a: FpgArgs, stdout: &mut dyn Write) -> Result<()> {
    let pairings = enumerate_pairings(a.size as usize);
    with_sink(a.out.as_deref(), stdout, |w| {
        for p in &pairings {
            writeln!(w, "{}", p.to_line())?;
            if a.graphs {
                writeln!(w, "{}", p.graph())?;
            }
        }
        Ok(())
    })?;
    eprintln!("n={} pairings={}", a.size, pairings.len());
    Ok(())
}

fn jobs(a: JobsArgs, stdout: &mut dyn Write) -> Result<()> {
    let jobs = split_jobs(a.search.config(), a.depth);
    with_sink(a.out.as_deref(), stdout, |w| {
        for j in &jobs {
            writeln!(w, "{}", j.to_line())?;
        }
        Ok(())
    })?;
    eprintln!("jobs={}", jobs.len());
    Ok(())
}

fn run_jobs(a: RunJobArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = read_input(a.input.as_deref())?;
    with_sink(a.out.as_deref(), stdout, |w| {
        for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let job = JobDescriptor::parse_line(line).with_context(|| format!("job on line {}", k + 1))?;
            let result = run_job(&job).with_context(|| format!("job on line {}", k + 1))?;
            writeln!(w, "{}", serde_json::to_string(&result)?)?;
        }
        Ok(())
    })
}

fn read_results(inputs: &[PathBuf]) -> Result<Vec<CensusResult>> {
    let mut out = Vec::new();
    let mut parse = |name: &str, reader: &mut dyn BufRead| -> Result<()> {
        for (k, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).with_context(|| format!("{name}:{}", k + 1))?);
        }
        Ok(())
    };
    if inputs.is_empty() {
        parse("stdin", &mut io::stdin().lock())?;
    }
    for p in inputs {
        let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        parse(&p.display().to_string(), &mut BufReader::new(f))?;
    }
    Ok(out)
}

fn merge(a: MergeArgs, stdout: &mut dyn Write) -> Result<()> {
    let parts = read_results(&a.inputs)?;
    let Some(first) = parts.first() else { bail!("no job results to merge") };
    let config = first.config;
    for p in &parts {
        ensure!(p.config == config, "job results disagree on configuration: {:?} vs {:?}", p.config, config);
    }
    let result = CensusResult::merge(config, parts);
    with_sink(a.output.out.as_deref(), stdout, |w| write_result_lines(&result, a.output.sigs, w))?;
    finish(&result, &a.output, stdout)
}

fn bench(a: BenchArgs, stdout: &mut dyn Write) -> Result<()> {
    let levels: &[u8] = if a.size <= 4 { &[0, 1, 2] } else { &[1, 2] };
    writeln!(stdout, "level,nodes,attempts,prune_orient,prune_edge,prune_genus,leaves,kept,seconds")?;
    let mut runs = Vec::new();
    for &level in levels {
        let config = SearchConfig::new(a.size as usize, a.mode).with_pruning(level).with_seed(a.seed);
        let t = Instant::now();
        let mut result = CensusResult::empty(config);
        enumerate_with(config, |i, _, r| {
            result.pairings.insert(i, r);
        });
        let secs = t.elapsed().as_secs_f64();
        let s = result.stats();
        let kept = result.counts().total;
        writeln!(
            stdout,
            "{level},{},{},{},{},{},{},{kept},{secs:.3}",
            s.nodes, s.attempts, s.prune_orient, s.prune_edge, s.prune_genus, s.leaves
        )?;
        runs.push((level, result, secs));
    }
    let (_, base, _) = &runs[0];
    for (level, r, _) in &runs[1..] {
        ensure!(r.counts() == base.counts(), "level {level} kept {:?}, level {} kept {:?}", r.counts(), runs[0].0, base.counts());
        ensure!(r.signatures() == base.signatures(), "level {level} signatures differ from level {}", runs[0].0);
    }
    let find = |l: u8| runs.iter().find(|(x, _, _)| *x == l).expect("level was run");
    let (_, r1, t1) = find(1);
    let (_, r2, t2) = find(2);
    writeln!(
        stdout,
        "speedup level1/level2: time={:.2}x nodes={:.2}x node_ratio={:.4}",
        t1 / t2.max(1e-9),
        r1.stats().nodes as f64 / r2.stats().nodes.max(1) as f64,
        r2.stats().nodes as f64 / r1.stats().nodes.max(1) as f64
    )?;
    writeln!(stdout, "{}", r2.summary_line())?;
    Ok(())
}

fn validate(a: ValidateArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = read_input(a.input.as_deref())?;
    let tris = if a.table {
        vec![parse_table(&text)?]
    } else {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_tri(l).with_context(|| format!("parsing {l:?}")))
            .collect::<Result<Vec<_>>>()?
    };
    for tri in &tris {
        writeln!(
            stdout,
            "tri={} vertices={} edges={} complete={}",
            to_tri(tri),
            tri.vertex_classes().len(),
            tri.edge_classes().len(),
            tri.is_complete()
        )?;
        for (k, r) in build_links(tri).iter().enumerate() {
            let genus = r.genus.map_or_else(|| "-".to_string(), |g| g.to_string());
            writeln!(
                stdout,
                "  link {k}: triangles={} euler={} orientable={} genus={genus} boundary_cycles={}",
                r.triangles.len(),
                r.euler,
                r.orientable,
                r.boundary_cycles.len()
            )?;
        }
        if tri.is_complete() {
            let verdict = match is_3manifold(tri)? {
                ManifoldVerdict::Manifold => "manifold=true".to_string(),
                ManifoldVerdict::BadLink(r) => format!("manifold=false reason=link euler={}", r.euler),
                ManifoldVerdict::ReversedEdge(c) => format!("manifold=false reason=reversed-edge class_size={}", c.len()),
            };
            let orientable = if tri.is_connected() { tri.is_orientable()?.to_string() } else { "-".to_string() };
            writeln!(stdout, "  orientable={orientable} {verdict}")?;
        }
    }
    Ok(())
}
