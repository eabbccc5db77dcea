use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rwiso::canonical::{canonical_decomposition_with, detect_width, BoundTable, BoundsReport, NodeOptions};
use rwiso::connfn::{ConnFn, CutRank};
use rwiso::decomp::{DecompositionJson, WIDTH_EVAL_CAP};
use rwiso::graphio::{read_graph, Format};
use rwiso::isodp::{brute_force_iso, isomorphisms_with};
use rwiso::permgroup::CosetJson;
use rwiso::tangleset::{CoverPolicy, TangleJson, TangleStore};
use rwiso::{Error, Graph, VertexSet};

const EXIT_ISO: u8 = 0;
const EXIT_NOT_ISO: u8 = 1;
const EXIT_WIDTH: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "rwiso", version, about = "Isomorphism testing for graphs of bounded rank width")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Input format; by default `.g6`/`.graph6` files are graph6 and
    /// anything else an edge list.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    output: Output,

    /// Largest triple cover tried per tangle.
    #[arg(long, global = true, default_value_t = 6)]
    cover_cap: usize,

    /// Per-node cap on width evaluations, as a power of two.
    #[arg(long, global = true, default_value_t = WIDTH_EVAL_CAP)]
    width_eval_cap: usize,

    /// Print timings and counters to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the coset of all isomorphisms between two graphs.
    Iso {
        first: PathBuf,
        second: PathBuf,
        /// Rank-width bound; detected from the tangles when omitted.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Print the canonical decomposition of a graph.
    Decompose {
        graph: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Print all tangles of the cut-rank function up to order k.
    Tangles {
        graph: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Print the cut rank of a vertex set.
    Cutrank {
        graph: PathBuf,
        /// Comma-separated vertex IDs, e.g. `0,2,5`.
        #[arg(long)]
        set: String,
    },
    /// Isomorphisms by exhaustive search (small graphs only).
    Oracle { first: PathBuf, second: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Graph6,
    Edgelist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Serialize)]
struct IsoStats {
    cells: usize,
    cap_events: usize,
}

#[derive(Serialize)]
struct IsoReport {
    isomorphic: bool,
    k: usize,
    k_detected: bool,
    coset: CosetJson,
    stats: IsoStats,
}

#[derive(Serialize)]
struct DecomposeReport {
    k: usize,
    k_detected: bool,
    width: Option<usize>,
    nodes: usize,
    cap_events: usize,
    bounds: BoundsReport,
    decomposition: DecompositionJson,
}

#[derive(Serialize)]
struct TanglesReport {
    k: usize,
    k_detected: bool,
    count_by_order: Vec<usize>,
    tangles: Vec<TangleJson>,
}

#[derive(Serialize)]
struct CutRankReport {
    set: VertexSet,
    cut_rank: usize,
}

#[derive(Serialize)]
struct OracleReport {
    isomorphic: bool,
    coset: CosetJson,
}

/// What a command produced: the rendered output and the exit code.
struct Outcome {
    text: String,
    code: u8,
}

impl Common {
    fn read(&self, path: &Path) -> Result<Graph, Error> {
        read_graph(path, self.format.map(|f| match f {
            FormatArg::Graph6 => Format::Graph6,
            FormatArg::Edgelist => Format::EdgeList,
        }))
    }

    fn options(&self) -> NodeOptions {
        NodeOptions { covers: CoverPolicy::MinimumSize { cap: self.cover_cap }, ..NodeOptions::default() }
    }

    fn render<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> String {
        match self.output {
            Output::Json => serde_json::to_string_pretty(value).expect("reports serialize") + "\n",
            Output::Text => text(),
        }
    }

    fn log(&self, msg: impl FnOnce() -> String) {
        if self.verbose > 0 {
            eprintln!("{}", msg());
        }
    }
}

fn width_or_detect(k: Option<usize>, graphs: &[&Graph]) -> Result<(usize, bool), Error> {
    match k {
        Some(k) => Ok((k, false)),
        None => {
            let mut k = 0;
            for g in graphs {
                k = k.max(detect_width(g)?);
            }
            Ok((k, true))
        }
    }
}

fn coset_text(c: &CosetJson) -> String {
    if c.empty {
        return "coset: empty\n".into();
    }
    let mut out = format!("order: {}\nwitness: {:?}\n", c.order, c.witness);
    for g in &c.generators {
        out.push_str(&format!("generator: {g:?}\n"));
    }
    out
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let common = &cli.common;
    match &cli.command {
        Command::Iso { first, second, k } => {
            let g1 = common.read(first)?;
            let g2 = common.read(second)?;
            let (k, k_detected) = width_or_detect(*k, &[&g1, &g2])?;
            let start = Instant::now();
            let out = isomorphisms_with(&g1, &g2, k, common.options())?;
            common.log(|| format!("iso: {:?}, {} cap events, {:.3?}", out.stats, out.cap_events, start.elapsed()));
            let isomorphic = !out.coset.is_empty();
            let report = IsoReport {
                isomorphic,
                k,
                k_detected,
                coset: out.coset.to_json(),
                stats: IsoStats { cells: out.stats.cells, cap_events: out.cap_events },
            };
            let text = common.render(&report, || {
                format!("isomorphic: {}\nk: {k}\n{}", if isomorphic { "yes" } else { "no" }, coset_text(&report.coset))
            });
            Ok(Outcome { text, code: if isomorphic { EXIT_ISO } else { EXIT_NOT_ISO } })
        }
        Command::Decompose { graph, k } => {
            let g = common.read(graph)?;
            let (k, k_detected) = width_or_detect(*k, &[&g])?;
            let c = canonical_decomposition_with(&g, k, common.options())?;
            let f = CutRank::new(Arc::new(g));
            let json = c.decomposition.to_json_capped(Some(&f), common.width_eval_cap)?;
            let report = DecomposeReport {
                k,
                k_detected,
                width: json.width,
                nodes: c.decomposition.len(),
                cap_events: c.cap_events,
                bounds: BoundTable::new(k).report(),
                decomposition: json,
            };
            let text = common.render(&report, || {
                let mut out = format!("k: {k}\nwidth: {}\nnodes: {}\n", report.width.unwrap_or(0), report.nodes);
                for n in &report.decomposition.nodes {
                    out.push_str(&format!("node {}: cone {} children {:?}\n", n.id, n.cone, n.children));
                }
                out
            });
            Ok(Outcome { text, code: 0 })
        }
        Command::Tangles { graph, k } => {
            let g = common.read(graph)?;
            let (k, k_detected) = width_or_detect(*k, &[&g])?;
            let f = CutRank::new(Arc::new(g));
            let store = TangleStore::enumerate(&f, k)?;
            let report = TanglesReport { k, k_detected, count_by_order: store.count_by_order(), tangles: store.to_json() };
            let text = common.render(&report, || {
                let mut out = format!("k: {k}\n");
                for t in &report.tangles {
                    let sets: Vec<String> = t.minimal.iter().map(|s| s.to_string()).collect();
                    out.push_str(&format!("tangle {} order {}: {}\n", t.index, t.order, sets.join(" ")));
                }
                out
            });
            Ok(Outcome { text, code: 0 })
        }
        Command::Cutrank { graph, set } => {
            let g = common.read(graph)?;
            let mut x = VertexSet::EMPTY;
            for part in set.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let v: usize = part
                    .parse()
                    .map_err(|_| Error::Parse { location: "--set".into(), msg: format!("{part:?} is not a vertex") })?;
                if v >= g.n() {
                    return Err(Error::Parse { location: "--set".into(), msg: format!("vertex {v} is out of range 0..{}", g.n()) });
                }
                x.insert(v);
            }
            let f = CutRank::new(Arc::new(g));
            let report = CutRankReport { set: x, cut_rank: f.kappa(x) };
            let text = common.render(&report, || format!("{}\n", report.cut_rank));
            Ok(Outcome { text, code: 0 })
        }
        Command::Oracle { first, second } => {
            let g1 = common.read(first)?;
            let g2 = common.read(second)?;
            let coset = brute_force_iso(&g1, &g2)?;
            let isomorphic = !coset.is_empty();
            let report = OracleReport { isomorphic, coset: coset.to_json() };
            let text = common.render(&report, || {
                format!("isomorphic: {}\n{}", if isomorphic { "yes" } else { "no" }, coset_text(&report.coset))
            });
            Ok(Outcome { text, code: if isomorphic { EXIT_ISO } else { EXIT_NOT_ISO } })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::RankWidthExceeded { .. } => EXIT_WIDTH,
                _ => EXIT_INPUT,
            })
        }
    }
}
