//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every criterion demands zero failures; the two runtime caps are
//! pinned below.

mod common;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kdsm::genlab::{self, ExperimentId, ExperimentParams, ExperimentReport, SearchBudget};
use kdsm::reduce::{self, Direction};
use kdsm::rng;
use kdsm::solve::{self, Budget, SolveStatus};
use kdsm::{format, Matching};
use rand::Rng as _;

const VERIFIER_RUNTIME_CAP: Duration = Duration::from_secs(60);
const EXHAUSTIVE_RUNTIME_CAP: Duration = Duration::from_secs(30 * 60);
const ROUND_TRIPS: u64 = 1000;

type Criterion = (&'static str, fn() -> Line);

struct Line {
    pass: bool,
    text: String,
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(id: ExperimentId, samples: Option<u64>, seed: u64, n: Option<usize>) -> ExperimentReport {
    let params = ExperimentParams {
        samples,
        seed,
        n,
        ..ExperimentParams::default()
    };
    genlab::run_experiment(id, &params).expect("experiment runs")
}

fn describe(r: &ExperimentReport) -> String {
    format!("{} ({} failures)", r.headline, r.failures.len())
}

fn verifier_equivalence() -> Line {
    let start = Instant::now();
    let r = run(ExperimentId::VerifierEquivalence, Some(1000), 1, None);
    let elapsed = start.elapsed();
    Line {
        pass: r.passed() && r.headline == "1000/1000 agree" && elapsed < VERIFIER_RUNTIME_CAP,
        text: format!("{}, {:.1?} (cap {:?})", describe(&r), elapsed, VERIFIER_RUNTIME_CAP),
    }
}

fn boros_bound() -> Line {
    let start = Instant::now();
    let small = run(ExperimentId::BorosBound, None, 0, Some(2));
    let large = run(ExperimentId::BorosBound, None, 0, Some(3));
    let elapsed = start.elapsed();
    let pass = small.passed()
        && small.headline == "64/64 stable"
        && large.passed()
        && large.instances == 6u64.pow(9)
        && elapsed < EXHAUSTIVE_RUNTIME_CAP;
    Line {
        pass,
        text: format!("n=2 {}; n=3 exhaustive {}; {:.1?}", describe(&small), describe(&large), elapsed),
    }
}

fn eriksson_bound() -> Line {
    let r = run(ExperimentId::ErikssonBound, Some(10_000), 0, None);
    Line {
        pass: r.passed() && r.instances == 10_000,
        text: describe(&r),
    }
}

/// The sampled counts, plus a cross-check of the first samples against the
/// test oracle that tries all `(5!)^2 = 14400` perfect matchings.
fn two_matchings() -> Line {
    let r = run(ExperimentId::PpTwoMatchings, Some(200), 1, None);
    let mut agree = 0;
    const CROSS: u64 = 10;
    for s in 0..CROSS {
        let inst = genlab::random_instance_from(&mut rng::stream(1, s), 3, 5, 1.0);
        let fast = solve::count_weakly_stable(&inst).unwrap();
        if fast as usize == common::stable_perfect_count_3(&inst) && fast >= 2 {
            agree += 1;
        }
    }
    Line {
        pass: r.passed() && r.instances == 200 && agree == CROSS,
        text: format!("{}; oracle agrees on {agree}/{CROSS}", describe(&r)),
    }
}

fn lift_equivalence() -> Line {
    let r = run(ExperimentId::Lift3kEquivalence, None, 0, None);
    Line {
        pass: r.passed() && r.instances == 15_625,
        text: describe(&r),
    }
}

fn complete_positive() -> Line {
    let r = run(ExperimentId::CompletePositive, Some(500), 1, None);
    Line {
        pass: r.passed() && r.instances == 500,
        text: describe(&r),
    }
}

fn complete_negative() -> Line {
    let r = run(ExperimentId::CompleteNegative, Some(500), 1, None);
    Line {
        pass: r.passed() && r.instances == 500,
        text: describe(&r),
    }
}

fn pipeline() -> Line {
    let text = fs::read_to_string(fixture("x0.kdsm")).expect("fixture present");
    let x0 = format::parse_instance(&text).unwrap();
    let oracle_none = common::stable_matchings(&x0).is_empty();
    let library_none = solve::enumerate_weakly_stable(&x0, None).unwrap().is_empty();
    let rediscovered = genlab::search_counterexample(x0.n(), &SearchBudget::default())
        .is_some_and(|(inst, _)| inst == x0);
    let (completed, _) = reduce::complete_instance(&x0, None).unwrap();
    let outcome = solve::find_weakly_stable(&completed, Budget::nodes(10_000_000));
    // the structural checks run inside both experiments; their failures
    // would appear there
    let checks = run(ExperimentId::CompletePositive, Some(500), 1, None).passed()
        && run(ExperimentId::CompleteNegative, Some(500), 1, None).passed();
    Line {
        pass: oracle_none && library_none && rediscovered && outcome.status != SolveStatus::Found && checks,
        text: format!(
            "X0 n={} has no stable matching (oracle {oracle_none}, solver {library_none}, rediscovered {rediscovered}); \
             completed n={} search {} after {} nodes; checkers clean {checks}",
            x0.n(),
            completed.n(),
            outcome.status.label(),
            outcome.nodes_explored
        ),
    }
}

fn round_trips() -> Line {
    let mut bad = Vec::new();
    for s in 0..ROUND_TRIPS {
        let mut rng = rng::stream(9, s);
        let n = rng.random_range(1..=3);
        let density = [0.5, 0.75, 1.0][rng.random_range(0..3)];
        let x = genlab::random_instance_from(&mut rng, 3, n, density);
        let mu = genlab::random_matching(&mut rng, &x);

        let (_, gmap) = reduce::complete_instance(&x, None).unwrap();
        let up = reduce::induce_up(&gmap, &mu).unwrap();
        if reduce::induce_down(&gmap, &up).unwrap() != mu {
            bad.push(format!("induce {s}"));
        }
        let (_, cmap) = reduce::lift_3_to_k(&x, 4 + (s as usize % 3)).unwrap();
        let lifted = reduce::transport_matching_3k(&cmap, &mu, Direction::Up).unwrap();
        if reduce::transport_matching_3k(&cmap, &lifted, Direction::Down).unwrap() != mu {
            bad.push(format!("transport {s}"));
        }

        let text = format::write_instance(&x);
        if format::write_instance(&format::parse_instance(&text).unwrap()) != text {
            bad.push(format!("instance text {s}"));
        }
        let mtext = format::write_matching(&mu);
        let back: Matching = format::parse_matching(&mtext, &x).unwrap();
        if format::write_matching(&back) != mtext {
            bad.push(format!("matching text {s}"));
        }
        if s < 50 {
            let gtext = format::write_gadget_map(&gmap);
            let ok = format::parse_map(&gtext).is_ok_and(|kind| kind == format::MapKind::Gadget { k: 3, n });
            let ctext = format::write_corr_map(&cmap);
            let ok = ok
                && format::parse_map(&ctext).is_ok_and(|kind| {
                    kind == format::MapKind::Lift {
                        target_k: cmap.target_k(),
                        n,
                    } && format::write_corr_map(&reduce::CorrMap3K::new(n, cmap.target_k()).unwrap()) == ctext
                });
            if !ok {
                bad.push(format!("map text {s}"));
            }
        }
    }
    let report = |seed| kdsm::cli::write_report(&run(ExperimentId::CompleteNegative, Some(50), seed, None));
    if report(4) != report(4) {
        bad.push("report text".to_string());
    }
    Line {
        pass: bad.is_empty(),
        text: format!("{ROUND_TRIPS} matchings, {} mismatches {:?}", bad.len(), bad.iter().take(5).collect::<Vec<_>>()),
    }
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--list`; nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [Criterion; 9] = [
        ("verifier oracle equivalence", verifier_equivalence),
        ("existence, complete n=2 and n=3 exhaustive", boros_bound),
        ("existence, complete n=4 sampled", eriksson_bound),
        ("two stable matchings, complete n=5 sampled", two_matchings),
        ("lift preserves existence, all n=2 instances", lift_equivalence),
        ("induced matching of a stable matching is stable", complete_positive),
        ("blocking families transport upward", complete_negative),
        ("no-stable instance through the completion", pipeline),
        ("round trips and canonical formats", round_trips),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let line = check();
        all &= line.pass;
        println!(
            "criterion {}: {} - {name}: {}",
            i + 1,
            if line.pass { "PASS" } else { "FAIL" },
            line.text
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
