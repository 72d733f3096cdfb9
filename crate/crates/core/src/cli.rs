//! Command-line front end. Every flag can also be set through an environment
//! variable named `KDSM_<FLAG>`.
//!
//! Exit codes: 0 success or stable, 1 unstable (or no stable matching, or a
//! failed experiment), 2 invalid input, 3 resource bound hit.
//!
//! Experiment reports are line-delimited:
//! ```text
//! report <id>
//! param <name> <value>
//! result <instance-hash> <verdict> index=<i> <detail>
//! summary <key> <value...>
//! failure <instance-hash> index=<i> <message>
//! end
//! ```
//! where the hash is [`format::instance_hash`] in 16 hex digits. Only the
//! first [`genlab::RESULT_CAP`] results are listed; summaries cover all.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::format::{self, MapKind};
use crate::genlab::{self, ExperimentId, ExperimentParams, ExperimentReport, SearchBudget};
use crate::model::{Instance, Matching};
use crate::par::{self, Exec};
use crate::reduce::{self, CorrMap3K, Direction, GadgetMap};
use crate::solve::{self, Budget, SolveOptions, SolveStatus};
use crate::verify::{self, Method};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSTABLE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "kdsm", version, about = "Stable matching in k dimensions with cyclic preferences")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "KDSM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceMode {
    #[value(name = "3k")]
    ThreeK,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMode {
    Find,
    Enumerate,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Naive,
    Cycle,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Up,
    Down,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random instance.
    Gen {
        #[arg(long, env = "KDSM_K")]
        k: usize,
        #[arg(long, env = "KDSM_N")]
        n: usize,
        #[arg(long, env = "KDSM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "KDSM_DENSITY", default_value_t = 1.0)]
        density: f64,
        /// Output file (default: standard output).
        #[arg(long, short, env = "KDSM_OUTPUT")]
        output: Option<PathBuf>,
    },
    /// Reduce an instance and write the agent map.
    Reduce {
        #[arg(long, value_enum, env = "KDSM_MODE")]
        mode: ReduceMode,
        #[arg(long, short, env = "KDSM_INPUT")]
        input: PathBuf,
        #[arg(long, short, env = "KDSM_OUTPUT")]
        output: Option<PathBuf>,
        #[arg(long, env = "KDSM_MAP_OUTPUT")]
        map_output: Option<PathBuf>,
        /// Dimension of the lifted instance (mode 3k).
        #[arg(long, env = "KDSM_TARGET_K")]
        target_k: Option<usize>,
        /// Shuffle the unconstrained list tails (mode complete).
        #[arg(long, env = "KDSM_SEED")]
        seed: Option<u64>,
    },
    /// Decide whether a matching is weakly stable.
    Verify {
        #[arg(long, env = "KDSM_INSTANCE")]
        instance: PathBuf,
        #[arg(long, env = "KDSM_MATCHING")]
        matching: PathBuf,
        #[arg(long, value_enum, env = "KDSM_METHOD", default_value = "auto")]
        method: MethodArg,
        /// `auto` uses the cycle search when k * n^k exceeds this.
        #[arg(long, env = "KDSM_AUTO_THRESHOLD", default_value_t = verify::DEFAULT_AUTO_THRESHOLD)]
        auto_threshold: f64,
    },
    /// Find, enumerate or count weakly stable matchings.
    Solve {
        #[arg(long, env = "KDSM_INSTANCE")]
        instance: PathBuf,
        #[arg(long, value_enum, env = "KDSM_MODE", default_value = "find")]
        mode: SolveMode,
        #[arg(long, env = "KDSM_MAX_NODES")]
        max_nodes: Option<u64>,
        #[arg(long, env = "KDSM_MAX_SECONDS")]
        max_seconds: Option<f64>,
        /// Stop enumerating after this many matchings.
        #[arg(long, env = "KDSM_LIMIT")]
        limit: Option<usize>,
        /// Refuse to enumerate instances with more candidate families.
        #[arg(long, env = "KDSM_FAMILY_LIMIT", default_value_t = solve::DEFAULT_FAMILY_LIMIT)]
        family_limit: u128,
    },
    /// Carry a matching across a reduction.
    Induce {
        #[arg(long, value_enum, env = "KDSM_DIRECTION")]
        direction: DirectionArg,
        #[arg(long, env = "KDSM_MAP")]
        map: PathBuf,
        #[arg(long, env = "KDSM_MATCHING")]
        matching: PathBuf,
        /// The reduction's input instance; required for completion maps.
        #[arg(long, env = "KDSM_INSTANCE")]
        instance: Option<PathBuf>,
        #[arg(long, short, env = "KDSM_OUTPUT")]
        output: Option<PathBuf>,
    },
    /// Run a scripted experiment and write its report.
    Experiment {
        #[arg(long, env = "KDSM_ID")]
        id: String,
        #[arg(long, env = "KDSM_K")]
        k: Option<usize>,
        #[arg(long, env = "KDSM_N")]
        n: Option<usize>,
        /// Random samples (default: exhaustive where supported).
        #[arg(long, env = "KDSM_SAMPLES")]
        samples: Option<u64>,
        #[arg(long, env = "KDSM_SEED", default_value_t = 0)]
        seed: u64,
        /// Node budget per search.
        #[arg(long, env = "KDSM_BUDGET")]
        budget: Option<u64>,
        #[arg(long, env = "KDSM_OUT")]
        out: Option<PathBuf>,
    },
    /// Look for a 3-dimensional instance with no weakly stable matching.
    Search {
        #[arg(long, env = "KDSM_MAX_N", default_value_t = 5)]
        max_n: usize,
        /// Random instances per size too large to scan exhaustively.
        #[arg(long, env = "KDSM_SAMPLES", default_value_t = SearchBudget::default().samples_per_n)]
        samples: u64,
        #[arg(long, env = "KDSM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, short, env = "KDSM_OUTPUT")]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_instance(path: &Path) -> Result<Instance> {
    format::parse_instance(&read(path)?)
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SpaceTooLarge { .. } => EXIT_RESOURCE,
        _ => EXIT_INVALID,
    }
}

/// Parses `std::env::args` and runs.
pub fn main() -> i32 {
    let cli = Cli::parse();
    run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "config {cli:?}");
    if let Some(threads) = cli.threads {
        par::configure_threads(threads);
    }
    match dispatch(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen {
            k,
            n,
            seed,
            density,
            output,
        } => {
            if *k < 2 {
                return Err(Error::Dimension(format!("k must be at least 2, got {k}")));
            }
            if !(0.0..=1.0).contains(density) {
                return Err(Error::Dimension(format!("density must lie in [0, 1], got {density}")));
            }
            let inst = genlab::random_instance(*seed, *k, *n, *density);
            emit(output.as_deref(), &format::write_instance(&inst), out)?;
            Ok(EXIT_OK)
        }
        Command::Reduce {
            mode,
            input,
            output,
            map_output,
            target_k,
            seed,
        } => {
            let x = read_instance(input)?;
            let (inst, map_text) = match mode {
                ReduceMode::ThreeK => {
                    let target_k =
                        target_k.ok_or_else(|| Error::Dimension("mode 3k needs --target-k".to_string()))?;
                    if x.k() != 3 {
                        return Err(Error::Dimension(format!("mode 3k needs a k=3 instance, got k={}", x.k())));
                    }
                    let (inst, map) = reduce::lift_3_to_k(&x, target_k)?;
                    (inst, format::write_corr_map(&map))
                }
                ReduceMode::Complete => {
                    let (inst, map) = reduce::complete_instance(&x, *seed)?;
                    (inst, format::write_gadget_map(&map))
                }
            };
            emit(output.as_deref(), &format::write_instance(&inst), out)?;
            if let Some(p) = map_output {
                fs::write(p, map_text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            instance,
            matching,
            method,
            auto_threshold,
        } => {
            let inst = read_instance(instance)?;
            let m = format::parse_matching(&read(matching)?, &inst)?;
            let method = match method {
                MethodArg::Naive => Method::Naive,
                MethodArg::Cycle => Method::Cycle,
                MethodArg::Auto => Method::Auto,
            };
            let verdict = verify::is_weakly_stable_with(&inst, &m, method, *auto_threshold);
            match verdict.witness {
                None => {
                    writeln!(out, "STABLE")?;
                    Ok(EXIT_OK)
                }
                Some(f) => {
                    writeln!(out, "UNSTABLE witness {f}")?;
                    Ok(EXIT_UNSTABLE)
                }
            }
        }
        Command::Solve {
            instance,
            mode,
            max_nodes,
            max_seconds,
            limit,
            family_limit,
        } => {
            let inst = read_instance(instance)?;
            let opts = SolveOptions {
                family_limit: *family_limit,
                exec: Exec::Parallel,
            };
            match mode {
                SolveMode::Find => {
                    let budget = Budget {
                        max_nodes: *max_nodes,
                        max_time: max_seconds.map(Duration::from_secs_f64),
                    };
                    let outcome = solve::find_weakly_stable(&inst, budget);
                    writeln!(out, "{}", outcome.status.label())?;
                    writeln!(out, "nodes {}", outcome.nodes_explored)?;
                    let _ = writeln!(err, "elapsed {:?}", outcome.elapsed);
                    if let Some(m) = &outcome.matching {
                        out.write_all(format::write_matching(m).as_bytes())?;
                    }
                    Ok(match outcome.status {
                        SolveStatus::Found => EXIT_OK,
                        SolveStatus::ExhaustedNone => EXIT_UNSTABLE,
                        SolveStatus::BudgetExceeded => EXIT_RESOURCE,
                    })
                }
                SolveMode::Enumerate => {
                    let all = solve::enumerate_weakly_stable_with(&inst, *limit, &opts)?;
                    writeln!(out, "count {}", all.len())?;
                    for m in &all {
                        writeln!(out)?;
                        out.write_all(format::write_matching(m).as_bytes())?;
                    }
                    Ok(EXIT_OK)
                }
                SolveMode::Count => {
                    writeln!(out, "{}", solve::count_weakly_stable_with(&inst, &opts)?)?;
                    Ok(EXIT_OK)
                }
            }
        }
        Command::Induce {
            direction,
            map,
            matching,
            instance,
            output,
        } => {
            let map_text = read(map)?;
            let families = format::parse_families(&read(matching)?)?;
            let result = match format::parse_map(&map_text)? {
                MapKind::Lift { target_k, n } => {
                    let map = CorrMap3K::new(n, target_k)?;
                    let (k, dims_n, dir) = match direction {
                        DirectionArg::Up => (3, n, Direction::Up),
                        DirectionArg::Down => (target_k, map.output_n(), Direction::Down),
                    };
                    let m = Matching::new(k, dims_n, families)?;
                    reduce::transport_matching_3k(&map, &m, dir)?
                }
                MapKind::Gadget { k, n } => {
                    let path = instance
                        .as_deref()
                        .ok_or_else(|| Error::Dimension("completion maps need --instance".to_string()))?;
                    let x = read_instance(path)?;
                    if (x.k(), x.n()) != (k, n) {
                        return Err(Error::Dimension(format!(
                            "map is for k={k} n={n}, instance has k={} n={}",
                            x.k(),
                            x.n()
                        )));
                    }
                    let gm = GadgetMap::new(&x)?;
                    match direction {
                        DirectionArg::Up => reduce::induce_up(&gm, &Matching::checked(&x, families)?)?,
                        DirectionArg::Down => reduce::induce_down(&gm, &Matching::new(k, gm.output_n(), families)?)?,
                    }
                }
            };
            emit(output.as_deref(), &format::write_matching(&result), out)?;
            Ok(EXIT_OK)
        }
        Command::Experiment {
            id,
            k,
            n,
            samples,
            seed,
            budget,
            out: path,
        } => {
            let id: ExperimentId = id.parse()?;
            let params = ExperimentParams {
                k: *k,
                n: *n,
                samples: *samples,
                seed: *seed,
                budget: *budget,
                exec: Exec::Parallel,
            };
            let report = genlab::run_experiment(id, &params)?;
            let text = write_report(&report);
            match path {
                Some(p) => {
                    fs::write(p, &text)?;
                    writeln!(out, "{}", report.headline)?;
                }
                None => out.write_all(text.as_bytes())?,
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_UNSTABLE })
        }
        Command::Search {
            max_n,
            samples,
            seed,
            output,
        } => {
            let budget = SearchBudget {
                samples_per_n: *samples,
                seed: *seed,
                ..SearchBudget::default()
            };
            match genlab::search_counterexample(*max_n, &budget) {
                Some((inst, cert)) => {
                    emit(output.as_deref(), &format::write_instance(&inst), out)?;
                    let _ = writeln!(err, "{}", write_certificate(&cert));
                    Ok(EXIT_OK)
                }
                None => {
                    let _ = writeln!(err, "no instance without a weakly stable matching found");
                    Ok(EXIT_RESOURCE)
                }
            }
        }
    }
}

pub fn write_certificate(cert: &genlab::Certificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n {}", cert.n);
    let _ = writeln!(s, "index {}", cert.index);
    let _ = writeln!(s, "exhaustive_scan {}", cert.exhaustive_scan);
    let _ = writeln!(s, "instances_scanned {}", cert.instances_scanned);
    let _ = writeln!(s, "families {}", cert.families);
    let _ = writeln!(s, "search_nodes {}", cert.search_nodes);
    let _ = write!(s, "stable_count {}", cert.stable_count);
    s
}

pub fn write_report(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "report {}", r.id);
    for (name, value) in &r.params {
        let _ = writeln!(s, "param {name} {value}");
    }
    for res in &r.results {
        let _ = write!(s, "result {:016x} {} index={}", res.hash, res.verdict, res.index);
        if !res.detail.is_empty() {
            let _ = write!(s, " {}", res.detail);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "summary instances {}", r.instances);
    for (verdict, count) in &r.verdicts {
        let _ = writeln!(s, "summary verdict {verdict} {count}");
    }
    let _ = writeln!(s, "summary failures {}", r.failures.len());
    let _ = writeln!(s, "summary headline {}", r.headline);
    for f in &r.failures {
        let _ = writeln!(s, "failure {:016x} index={} {}", f.hash, f.index, f.message);
    }
    s.push_str("end\n");
    s
}

