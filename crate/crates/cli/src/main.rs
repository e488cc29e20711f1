//! Command-line harness: exact spectra, regularity decompositions,
//! pseudorandomness checks, extremal search, matching surgery, the staged
//! pipeline, and the acceptance suite.
//!
//! Exit codes: 0 success, 2 verification or contract failure, 3 resource
//! limit, 4 I/O or parse failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use num::{BigInt, BigRational, One};
use serde_json::json;

use permjunta_core::io::{
    decomposition_to_json, family_from_json, family_to_json, rational_from_string,
    rational_to_string, report_to_json, spectrum_csv, step_to_json,
    threshold_from_string,
};
use permjunta_core::perm::PermFamily;
use permjunta_core::pipeline::{run_pipeline, EpsilonSpec, PipelineConfig};
use permjunta_core::pseudorandom::{
    check_captureable, check_quasirandom, check_quasiregular, GatePolicy,
};
use permjunta_core::regularity::{decompose, verify_decomposition};
use permjunta_core::spectral::FunctionOnSn;
use permjunta_core::surgery::{
    classify_edges, eliminate_cycle, eliminate_even_path, eliminate_odd_paths,
    quadruple_of, PathEnds, SurgeryOutcome,
};
use permjunta_core::{Error, Result};

#[derive(Parser)]
#[command(name = "permjunta", version, about = "Exact analytics for intersecting permutation families")]
struct Cli {
    /// Worker threads for the acceptance suite (falls back to
    /// PERMJUNTA_THREADS, then 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalue table of the agreement-a Cayley graph, as CSV on stdout.
    Spectrum {
        #[arg(long)]
        n: usize,
        /// Generators agree with the identity in exactly this many points.
        #[arg(long, default_value_t = 0)]
        a: usize,
    },
    /// Decompose a family file into a junta with certified slices.
    Decompose {
        /// Family JSON file.
        #[arg(long)]
        family: PathBuf,
        /// Junta depth bound (capture level n^-r).
        #[arg(long)]
        r: usize,
        /// Capture size bound.
        #[arg(long)]
        s: usize,
        /// Write the decomposition JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one checker against a family file; prints a JSON report.
    #[command(group(ArgGroup::new("mode").required(true).multiple(false)
        .args(["t_intersecting", "intersection_free", "captureable", "quasiregular", "quasirandom"])))]
    Check {
        #[arg(long)]
        family: PathBuf,
        /// Every two members agree in at least this many points.
        #[arg(long, value_name = "T")]
        t_intersecting: Option<usize>,
        /// No two members agree in exactly this many points.
        #[arg(long, value_name = "T_MINUS_1")]
        intersection_free: Option<usize>,
        /// Capture search: size bound and rational level, e.g. 2 1/36.
        #[arg(long, num_args = 2, value_names = ["S", "EPS"])]
        captureable: Option<Vec<String>>,
        /// Restriction-ratio check: size and threshold, e.g. 2 3/2 or 2 "2*sqrt(6)".
        #[arg(long, num_args = 2, value_names = ["S", "ALPHA"])]
        quasiregular: Option<Vec<String>>,
        /// Variance check: size and rational margin, e.g. 1 1/4.
        #[arg(long, num_args = 2, value_names = ["R", "EPS"])]
        quasirandom: Option<Vec<String>>,
    },
    /// Largest family avoiding any pair that agrees in exactly the
    /// forbidden number of points, with the eigenvalue certificate.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        forbidden_agreements: usize,
        /// Permit the n = 6 exhaustive search.
        #[arg(long)]
        allow_slow: bool,
    },
    /// Run one bundled matching-surgery instance and print its replayable
    /// step record.
    SurgeryDemo {
        /// cycle, even-path, or odd-paths.
        #[arg(long, default_value = "cycle")]
        kind: String,
        /// Record failing hypothesis gates instead of aborting.
        #[arg(long)]
        waive: bool,
    },
    /// The staged end-to-end run; prints every gate and postcondition.
    Pipeline {
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value_t = 4)]
        s: usize,
        /// Rational like 1/2, or the symbolic n^{-1/3}.
        #[arg(long, default_value = "n^{-1/3}")]
        epsilon: String,
        /// Record failing hypothesis gates instead of aborting.
        #[arg(long)]
        waive: bool,
    },
    /// Run the ten-point acceptance suite, one line per criterion.
    Accept,
}

fn read_family(path: &PathBuf) -> Result<PermFamily> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    family_from_json(&text)
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::InvalidInput(format!("cannot parse {what} {s:?}")))
}

fn run_spectrum(n: usize, a: usize) -> Result<()> {
    print!("{}", spectrum_csv(n, a)?);
    Ok(())
}

fn run_decompose(family: &PathBuf, r: usize, s: usize, out: Option<&PathBuf>) -> Result<()> {
    let f = read_family(family)?;
    let d = decompose(&f, r, s)?;
    let rep = verify_decomposition(&d, r, s)?;
    eprintln!("{}", d.tree.render());
    eprintln!(
        "leaves={} bad={} attained_constant={} remainder_scaled={}",
        rep.leaves, rep.bad_leaves, rep.c_attained, rep.remainder_scaled
    );
    let text = decomposition_to_json(&d);
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    if !rep.pass {
        return Err(Error::Contract("decomposition failed verification".into()));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    family: &PathBuf,
    t_intersecting: Option<usize>,
    intersection_free: Option<usize>,
    captureable: Option<&[String]>,
    quasiregular: Option<&[String]>,
    quasirandom: Option<&[String]>,
) -> Result<()> {
    let f = read_family(family)?;
    if let Some(t) = t_intersecting {
        let verdict = f.is_t_intersecting(t);
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "check": "t-intersecting", "t": t, "verdict": verdict
            }))
            .unwrap()
        );
        return Ok(());
    }
    if let Some(a) = intersection_free {
        let verdict = f.is_intersection_free(a);
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "check": "intersection-free", "forbidden_agreements": a, "verdict": verdict
            }))
            .unwrap()
        );
        return Ok(());
    }
    let report = if let Some(args) = captureable {
        let s = parse_usize(&args[0], "capture size")?;
        check_captureable(&f, s, &rational_from_string(&args[1])?)?
    } else if let Some(args) = quasiregular {
        let s = parse_usize(&args[0], "restriction size")?;
        check_quasiregular(&f, s, &threshold_from_string(&args[1])?)?
    } else if let Some(args) = quasirandom {
        let r = parse_usize(&args[0], "restriction size")?;
        check_quasirandom(&FunctionOnSn::indicator(&f), r, &rational_from_string(&args[1])?)?
    } else {
        unreachable!("clap enforces exactly one mode");
    };
    println!("{}", report_to_json(&report));
    Ok(())
}

fn run_search(n: usize, a: usize, allow_slow: bool) -> Result<()> {
    use permjunta_core::extremal::{
        build_agreement_graph, hoffman_bound, max_independent_family, turan_lower_bound,
    };
    let g = build_agreement_graph(n, a)?;
    let (size, family) = max_independent_family(&g, true, allow_slow)?;
    let family_doc: serde_json::Value =
        serde_json::from_str(&family_to_json(&family)).expect("valid family JSON");
    let doc = json!({
        "n": n,
        "forbidden_agreements": a,
        "degree": g.degree(),
        "size": size,
        "hoffman_bound": rational_to_string(&hoffman_bound(&g)?),
        "turan_lower_bound": turan_lower_bound(&g).to_string(),
        "family": family_doc,
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(())
}

fn print_surgery(out: &SurgeryOutcome) {
    for gate in &out.gates {
        eprintln!(
            "gate {}: {}",
            if gate.satisfied { "ok" } else { "waived" },
            gate.description
        );
    }
    eprintln!(
        "reduced from {} to {} points; families now {} and {} members",
        out.step.n_before,
        out.step.n_after,
        out.family1.members().count(),
        out.family2.members().count()
    );
    println!("{}", step_to_json(&out.step));
}

fn run_surgery_demo(kind: &str, waive: bool) -> Result<()> {
    use permjunta_core::perm::{PartialBijection, RestrictionClass};
    let policy = if waive { GatePolicy::Waive } else { GatePolicy::Enforce };
    let pb = |pairs: &[(usize, usize)]| PartialBijection::from_one_indexed(pairs).unwrap();
    let full = |n: usize, agree: Vec<PartialBijection>| -> Result<PermFamily> {
        PermFamily::full(RestrictionClass::new(n, agree, vec![])?)
    };
    let eta = BigRational::one();
    let out = match kind {
        "cycle" => {
            let f1 = full(6, vec![pb(&[(1, 1), (2, 2)])])?;
            let f2 = full(6, vec![pb(&[(2, 1), (1, 2)])])?;
            let cls = classify_edges(&quadruple_of(&f1, &f2)?)?;
            eliminate_cycle(&f1, &f2, 1, 2, &eta, &cls.cycles[0])?
        }
        "even-path" => {
            let f1 = full(6, vec![pb(&[(1, 1)])])?;
            let f2 = full(6, vec![pb(&[(2, 1)])])?;
            let cls = classify_edges(&quadruple_of(&f1, &f2)?)?;
            let path = cls
                .paths
                .iter()
                .find(|p| p.ends != PathEnds::Mixed)
                .expect("bundled instance has an even path");
            eliminate_even_path(&f1, &f2, 1, 2, &eta, path)?
        }
        "odd-paths" => {
            let f1 = full(6, vec![pb(&[(1, 1)])])?;
            let f2 = full(6, vec![])?;
            eliminate_odd_paths(&f1, &f2, 1, 2, &eta, policy)?
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown instance kind {other:?}; use cycle, even-path, or odd-paths"
            )))
        }
    };
    print_surgery(&out);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_pipeline_cmd(
    n: usize,
    t: usize,
    r: usize,
    s: usize,
    epsilon: &str,
    waive: bool,
) -> Result<()> {
    let epsilon = if epsilon.trim() == "n^{-1/3}" {
        EpsilonSpec::InverseCubeRoot
    } else if epsilon.contains('/') {
        EpsilonSpec::Exact(rational_from_string(epsilon)?)
    } else {
        EpsilonSpec::Exact(BigRational::from_integer(
            epsilon
                .trim()
                .parse::<BigInt>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse epsilon {epsilon:?}")))?,
        ))
    };
    let config = PipelineConfig {
        n,
        t,
        r,
        s,
        epsilon,
        gate_policy: if waive { GatePolicy::Waive } else { GatePolicy::Enforce },
    };
    let report = run_pipeline(&config)?;
    print!("{}", report.render());
    if !report.pass() {
        return Err(Error::Contract("pipeline postconditions failed".into()));
    }
    Ok(())
}

fn run_accept(threads: usize) -> Result<()> {
    use permjunta_core::acceptance as acc;
    type Criterion = fn() -> std::result::Result<String, String>;
    let criteria: Vec<(usize, Criterion)> = vec![
        (1, acc::criterion_1),
        (2, acc::criterion_2),
        (3, acc::criterion_3),
        (4, acc::criterion_4),
        (5, acc::criterion_5),
        (6, acc::criterion_6),
        (7, acc::criterion_7),
        (8, acc::criterion_8),
        (9, acc::criterion_9),
        (10, acc::criterion_10),
    ];
    let threads = threads.max(1).min(criteria.len());
    let mut outcomes: Vec<Option<std::result::Result<String, String>>> =
        vec![None; criteria.len()];
    std::thread::scope(|scope| {
        let chunks: Vec<_> = criteria.chunks(criteria.len().div_ceil(threads)).collect();
        let mut handles = Vec::new();
        for chunk in chunks {
            handles.push(scope.spawn(move || {
                chunk
                    .iter()
                    .map(|(id, f)| (*id, f()))
                    .collect::<Vec<_>>()
            }));
        }
        for h in handles {
            for (id, outcome) in h.join().expect("criterion thread panicked") {
                outcomes[id - 1] = Some(outcome);
            }
        }
    });
    let mut failures = 0usize;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome.expect("every criterion ran") {
            Ok(detail) => println!("criterion {}: PASS - {detail}", i + 1),
            Err(reason) => {
                println!("criterion {}: FAIL - {reason}", i + 1);
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(Error::Contract(format!("{failures} acceptance criteria failed")));
    }
    Ok(())
}

fn dispatch(cli: &Cli, threads: usize) -> Result<()> {
    match &cli.cmd {
        Cmd::Spectrum { n, a } => run_spectrum(*n, *a),
        Cmd::Decompose { family, r, s, out } => run_decompose(family, *r, *s, out.as_ref()),
        Cmd::Check {
            family,
            t_intersecting,
            intersection_free,
            captureable,
            quasiregular,
            quasirandom,
        } => run_check(
            family,
            *t_intersecting,
            *intersection_free,
            captureable.as_deref(),
            quasiregular.as_deref(),
            quasirandom.as_deref(),
        ),
        Cmd::Search {
            n,
            forbidden_agreements,
            allow_slow,
        } => run_search(*n, *forbidden_agreements, *allow_slow),
        Cmd::SurgeryDemo { kind, waive } => run_surgery_demo(kind, *waive),
        Cmd::Pipeline {
            n,
            t,
            r,
            s,
            epsilon,
            waive,
        } => run_pipeline_cmd(*n, *t, *r, *s, epsilon, *waive),
        Cmd::Accept => run_accept(threads),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("PERMJUNTA_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1);
    let args: Vec<String> = std::env::args().skip(1).collect();
    eprintln!("# permjunta {} (threads={threads})", args.join(" "));
    match dispatch(&cli, threads) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::ResourceLimit(_) => 3,
                Error::InvalidInput(_) => 4,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
