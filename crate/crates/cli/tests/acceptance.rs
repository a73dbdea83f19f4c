//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs standalone with `cargo test -p etcausal-cli --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use etcausal::experiments::{canonical_system, run_paper_tables, MetcBranch, PaperReport};
use etcausal::{
    conditional_entropy, entropy, etc, metc, mutual_information, transfer_entropy, LogBase, Nsrps,
    SymbolEncoding, SymbolSequence, TeConfig,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const CASES: u32 = 1000;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn worked_trace() -> Verdict {
    let labels = [-1, -1, 0, 1, -1, -1, 1, 0];
    let enc = SymbolEncoding::from_labels(labels).unwrap();
    let x = enc.encode(&labels).unwrap();

    let started = Instant::now();
    let r = etc(&x).unwrap();
    let elapsed = started.elapsed();

    let mut nsrps = Nsrps::new(&x);
    let mut chain = vec![nsrps.len()];
    let mut rendered = Vec::new();
    while nsrps.step().is_some() {
        chain.push(nsrps.len());
        let text: Vec<String> = nsrps
            .current()
            .iter()
            .map(|&c| enc.display_label(c).to_string())
            .collect();
        rendered.push(text.join(" "));
    }
    let want = ["2 0 1 2 1 0", "3 1 2 1 0", "4 2 1 0", "5 1 0", "6 0", "7"];
    let ok = r.iterations == 6
        && chain == [8, 6, 5, 4, 3, 2, 1]
        && rendered == want
        && elapsed < Duration::from_millis(1);
    Verdict::new(
        ok,
        format!(
            "ETC = {}, lengths {:?}, chain [{}], {:?}",
            r.iterations,
            chain,
            rendered.join(" -> "),
            elapsed
        ),
    )
}

fn checks_with_prefix(report: &PaperReport, prefixes: &[&str]) -> Verdict {
    let selected: Vec<_> = report
        .checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.id.starts_with(p)))
        .collect();
    let failed: Vec<String> = selected
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.id, c.detail))
        .collect();
    if selected.is_empty() {
        return Verdict::new(false, "no checks produced");
    }
    if failed.is_empty() {
        Verdict::new(true, format!("{} checks passed", selected.len()))
    } else {
        Verdict::new(false, failed.join("; "))
    }
}

fn metc_verdict(report: &PaperReport) -> Verdict {
    match report.metc_branch {
        MetcBranch::Exact => {
            let v = checks_with_prefix(report, &["metc.table"]);
            Verdict::new(v.passed, format!("branch exact: {}", v.detail))
        }
        MetcBranch::Fallback => {
            let fallback = report.check("metc-fallback");
            let nearest: Vec<String> = report
                .checks
                .iter()
                .filter(|c| c.id.starts_with("metc.table") && !c.passed)
                .map(|c| format!("{} {}", c.id, c.detail))
                .collect();
            Verdict::new(
                fallback.is_some_and(|c| c.passed),
                format!(
                    "branch fallback: {}; nearest {}",
                    fallback.map_or("missing", |c| c.detail.as_str()),
                    nearest.join(", ")
                ),
            )
        }
    }
}

fn te_verdict(report: &PaperReport) -> Verdict {
    let te = &report.transfer_entropy;
    let setup = format!("{} surrogates at level {}", te.surrogates, te.level);
    if te.surrogates != 100 || te.level != 0.05 {
        return Verdict::new(false, format!("wrong surrogate setup: {setup}"));
    }
    let prefixes: &[&str] = match report.te_branch {
        MetcBranch::Exact => &["te.", "te-zero.", "te-symmetry."],
        MetcBranch::Fallback => &["te-fallback.", "te-zero.", "te-symmetry."],
    };
    let v = checks_with_prefix(report, prefixes);
    let branch = match report.te_branch {
        MetcBranch::Exact => "exact",
        MetcBranch::Fallback => "fallback",
    };
    Verdict::new(v.passed, format!("branch {branch}, {setup}: {}", v.detail))
}

fn sequence(k: u32, n: usize) -> BoxedStrategy<SymbolSequence> {
    proptest::collection::vec(0..k, n)
        .prop_map(move |v| SymbolSequence::new(v, k).unwrap())
        .boxed()
}

fn aligned_pair(max_k: u32, max_len: usize) -> BoxedStrategy<(SymbolSequence, SymbolSequence)> {
    (1..=max_k, 1..=max_k, 2..=max_len)
        .prop_flat_map(|(ka, kb, n)| (sequence(ka, n), sequence(kb, n)))
        .boxed()
}

fn run<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

/// TE(y -> x) for s = t = 1 as a triple loop over `(x[n+1], x[n], y[n])`.
fn naive_te(x: &[u32], y: &[u32]) -> f64 {
    let m = x.len() - 1;
    let count = |f: &dyn Fn(usize) -> bool| (0..m).filter(|&n| f(n)).count() as f64;
    let mut te = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let abc = count(&|n| x[n + 1] == a && x[n] == b && y[n] == c);
                if abc == 0.0 {
                    continue;
                }
                let bc = count(&|n| x[n] == b && y[n] == c);
                let ab = count(&|n| x[n + 1] == a && x[n] == b);
                let b_only = count(&|n| x[n] == b);
                te += abc / m as f64 * ((abc * b_only) / (bc * ab)).ln();
            }
        }
    }
    te.max(0.0)
}

fn exhaustive_te_oracle() -> Result<usize, String> {
    let cfg = TeConfig {
        log_base: LogBase::E,
        ..TeConfig::default()
    };
    let mut pairs = 0;
    for len in 3..=12usize {
        let all: Vec<Vec<u32>> = (0..1u32 << len)
            .map(|code| (0..len).map(|i| code >> i & 1).collect())
            .collect();
        let seqs: Vec<SymbolSequence> = all
            .iter()
            .map(|v| SymbolSequence::new(v.clone(), 2).unwrap())
            .collect();
        for (xi, x) in all.iter().enumerate() {
            for (yi, y) in all.iter().enumerate() {
                let got = transfer_entropy(&seqs[yi], &seqs[xi], &cfg)
                    .map_err(|e| e.to_string())?
                    .value;
                let want = naive_te(x, y);
                if (got - want).abs() > 1e-12 {
                    return Err(format!(
                        "TE oracle mismatch x={x:?} y={y:?}: {got} vs {want}"
                    ));
                }
                pairs += 1;
            }
        }
    }
    Ok(pairs)
}

fn property_suites() -> Verdict {
    let started = Instant::now();
    let bases = || prop_oneof![Just(LogBase::Two), Just(LogBase::E)];
    let mut outcome = Vec::new();

    outcome.push(run(
        "conditioning",
        (aligned_pair(6, 80), bases()),
        |((x, y), b)| {
            let hxy = conditional_entropy(&x, &y, b).unwrap();
            prop_assert!(hxy <= entropy(&x, b).unwrap() + 1e-12);
            Ok(())
        },
    ));
    outcome.push(run("mi", (aligned_pair(6, 80), bases()), |((x, y), b)| {
        let xy = mutual_information(&x, &y, b).unwrap();
        prop_assert_eq!(
            xy.to_bits(),
            mutual_information(&y, &x, b).unwrap().to_bits()
        );
        prop_assert!(xy >= 0.0);
        Ok(())
    }));
    let relabel = (1usize..=60).prop_flat_map(|n| {
        (
            sequence(5, n),
            Just((0..5u32).collect::<Vec<_>>()).prop_shuffle(),
        )
    });
    outcome.push(run("etc-relabel", relabel, |(x, perm)| {
        let y = SymbolSequence::new(x.symbols().iter().map(|&s| perm[s as usize]).collect(), 5)
            .unwrap();
        let (a, b) = (etc(&x).unwrap(), etc(&y).unwrap());
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert!(a.iterations < x.len());
        Ok(())
    }));
    let single = (1u32..=5, 2usize..=60).prop_flat_map(|(k, n)| sequence(k, n));
    outcome.push(run("metc-self", single, |x| {
        prop_assert_eq!(metc(&x, &x).unwrap(), etc(&x).unwrap().normalized);
        Ok(())
    }));
    let te_pair = (5usize..=60).prop_flat_map(|n| (sequence(3, n), sequence(3, n), 1usize..=3));
    outcome.push(run("te-base", te_pair, |(y, x, lags)| {
        let e = TeConfig {
            log_base: LogBase::E,
            ..TeConfig::with_lags(lags)
        };
        let te_e = transfer_entropy(&y, &x, &e).unwrap().value;
        let te_2 = transfer_entropy(&y, &x, &TeConfig::with_lags(lags))
            .unwrap()
            .value;
        prop_assert!((te_e - te_2 * std::f64::consts::LN_2).abs() <= 1e-12);
        Ok(())
    }));
    let oracle = exhaustive_te_oracle();

    let elapsed = started.elapsed();
    let mut failures: Vec<String> = outcome.into_iter().filter_map(Result::err).collect();
    let pairs = oracle.unwrap_or_else(|e| {
        failures.push(e);
        0
    });
    if elapsed >= Duration::from_secs(60) {
        failures.push(format!("took {elapsed:?}"));
    }
    if failures.is_empty() {
        Verdict::new(
            true,
            format!("5 suites x {CASES} cases, TE oracle on all {pairs} binary pairs of length 3..=12, {elapsed:.1?}"),
        )
    } else {
        Verdict::new(false, failures.join("; "))
    }
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("series.csv");
    std::fs::write(&input, etcausal::experiments::CANONICAL_SYSTEM_CSV).unwrap();
    let input = input.to_str().unwrap();
    let runs: [&[&str]; 3] = [
        &["reproduce-paper", "--seed", "3"],
        &[
            "measure",
            "--input",
            input,
            "--kind",
            "te,metc,mi",
            "--symbolic",
            "--surrogates",
            "50",
            "--seed",
            "9",
            "--lags",
            "2",
        ],
        &[
            "quantize",
            "--input",
            input,
            "--bins",
            "4",
            "--strategy",
            "equal-frequency",
        ],
    ];
    let exe = env!("CARGO_BIN_EXE_etcausal");
    for args in runs {
        let a = Command::new(exe).args(args).output().unwrap();
        let b = Command::new(exe).args(args).output().unwrap();
        if !a.status.success() || a.stdout.is_empty() {
            return Verdict::new(
                false,
                format!("{} failed: {}", args[0], String::from_utf8_lossy(&a.stderr)),
            );
        }
        if a.stdout != b.stdout {
            return Verdict::new(false, format!("{} reports differ", args[0]));
        }
    }
    Verdict::new(
        true,
        "reproduce-paper, measure and quantize reports byte-identical across runs",
    )
}

fn main() -> ExitCode {
    let report = run_paper_tables(&canonical_system().unwrap()).unwrap();
    let criteria: Vec<(&str, Verdict)> = vec![
        ("worked ETC trace", worked_trace()),
        (
            "first-order MI",
            checks_with_prefix(&report, &["table1.mi"]),
        ),
        (
            "primed MI and entropy",
            checks_with_prefix(&report, &["table2.mi", "table2.entropy"]),
        ),
        (
            "Pearson correlations",
            checks_with_prefix(&report, &["table1.rho", "table2.rho"]),
        ),
        ("METC", metc_verdict(&report)),
        ("lag-12 transfer entropy", te_verdict(&report)),
        ("ACF peak", checks_with_prefix(&report, &["acf.argmax"])),
        (
            "doubled-length MI",
            checks_with_prefix(&report, &["doubled.mi"]),
        ),
        ("property suites", property_suites()),
        ("CLI determinism", determinism()),
    ];
    let mut all = true;
    for (i, (name, v)) in criteria.iter().enumerate() {
        all &= v.passed;
        let mark = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {mark} {name}: {}", i + 1, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
