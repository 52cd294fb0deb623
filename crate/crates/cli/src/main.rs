use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Value};

use udg_core::brown_words::{alphabet, Word};
use udg_core::convolutions::{convolve, ProductKind};
use udg_core::haar_traces::{
    eval_free_haar, eval_tensor_haar, eval_tensor_haar_oracle, FreeHaarTrace, TensorHaarTrace,
};
use udg_core::matrix_lab::{free_bm_block_state, mc_estimate, sample_rng, MCReport, Source};
use udg_core::noncrossing::{catalan, enumerate_nc, kreweras_relative, NCPartition};
use udg_core::nonexistence::{
    boolean_counterexample, build_woronowicz_state, check_free_obstruction, free_counterexample,
    monotone_counterexample, phi1, phi2,
};
use udg_core::schurmann::{
    block_lift, bm_triple, conditional_positivity_min_eig, generator_vs_bm_finite_difference, load_triple_json,
    triple_from_whr, verify_triple_axioms,
};
use udg_core::states::{load_mixture_json, load_unitary_json, CharacterState};
use udg_core::validation::{run_all, Config, Faults, Level};
use udg_core::{Error, SharedState, StateEvaluator, C64};

mod output;

use output::{cval, emit};

#[derive(Parser)]
#[command(
    name = "udg",
    version,
    about = "Haar traces, products and random blocks on the unitary dual group"
)]
struct Cli {
    /// Seed for every randomized command.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the report as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceKind {
    Free,
    Tensor,
}

#[derive(Clone, Copy, ValueEnum)]
enum CounterKind {
    Boolean,
    Monotone,
    Free,
    Tensor,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelftestLevel {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of a Haar trace on a word.
    Eval {
        #[arg(long, value_enum)]
        trace: TraceKind,
        #[arg(short = 'n')]
        n: usize,
        word: String,
    },
    /// Value of a product state on a word.
    Convolve {
        /// free, tensor, boolean, monotone or anti-monotone
        #[arg(long)]
        kind: ProductKind,
        /// haar-free, haar-tensor, counit, phi1, phi2, woronowicz:K,
        /// free-bm:T, character:I, character:FILE or mixture:FILE
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        #[arg(short = 'n')]
        n: usize,
        word: String,
    },
    /// Monte Carlo block traces of Haar unitaries.
    McBlocks(McArgs),
    /// Monte Carlo block traces of unitary Brownian motion.
    McBm {
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Witnesses against boolean, monotone, free or tensor Haar states.
    Counterexample {
        #[arg(long, value_enum)]
        kind: CounterKind,
        #[arg(short = 'n', default_value_t = 2)]
        n: usize,
    },
    /// Non-crossing partitions and relative Kreweras complements.
    Nc {
        #[arg(short = 'm', default_value_t = 4)]
        m: usize,
        /// List the partitions, not just count them.
        #[arg(long)]
        list: bool,
        /// σ as blocks, e.g. "1,3|5"; needs --complement-of.
        #[arg(long, requires = "complement_of")]
        sigma: Option<String>,
        /// Ground of the complement, e.g. "2,4,6".
        #[arg(long)]
        complement_of: Option<String>,
    },
    /// Brownian generator: recursion, closed form and finite differences.
    Generator {
        #[arg(long, default_value = "bm")]
        triple: String,
        #[arg(short = 'k', default_value_t = 1)]
        k: u64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(short = 'N', default_value_t = 64)]
        big_n: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Evaluate the lifted generator L_n on this word.
        #[arg(long, requires = "lift")]
        word: Option<String>,
        #[arg(long)]
        lift: Option<usize>,
    },
    /// Checks the triple axioms for (W, h, R) data from a JSON file.
    TripleCheck {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        words: usize,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Runs the acceptance checks.
    Selftest {
        #[arg(long, value_enum, default_value_t = SelftestLevel::Quick)]
        level: SelftestLevel,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

#[derive(clap::Args)]
struct McArgs {
    #[arg(long)]
    word: String,
    #[arg(short = 'n', default_value_t = 2)]
    n: usize,
    #[arg(short = 'N', default_value_t = 64)]
    big_n: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Comma-separated N values; one report per N.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
}

fn state_from_spec(spec: &str, n: usize) -> udg_core::Result<SharedState> {
    let read = |path: &str| std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{path}: {e}")));
    let s: SharedState = match spec.split_once(':') {
        None => match spec {
            "haar-free" => Arc::new(FreeHaarTrace::new(n)),
            "haar-tensor" => Arc::new(TensorHaarTrace::new(n)),
            "counit" => Arc::new(CharacterState::counit(n)),
            "phi1" => Arc::new(phi1(n)),
            "phi2" => Arc::new(phi2(n)),
            _ => return Err(Error::Invalid(format!("unknown state spec `{spec}`"))),
        },
        Some(("character", "I")) => Arc::new(CharacterState::counit(n)),
        Some(("character", path)) => Arc::new(CharacterState::new(load_unitary_json(&read(path)?)?)?),
        Some(("mixture", path)) => Arc::new(load_mixture_json(&read(path)?)?),
        Some(("woronowicz", k)) => {
            let k = k
                .parse()
                .map_err(|_| Error::Invalid(format!("bad index in `{spec}`")))?;
            Arc::new(build_woronowicz_state(n, k)?)
        }
        Some(("free-bm", t)) => {
            let t: f64 = t.parse().map_err(|_| Error::Invalid(format!("bad time in `{spec}`")))?;
            Arc::new(free_bm_block_state(n, t))
        }
        _ => return Err(Error::Invalid(format!("unknown state spec `{spec}`"))),
    };
    if s.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s.dim(),
        });
    }
    Ok(s)
}

fn parse_list(text: &str) -> udg_core::Result<Vec<usize>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("not a position: `{s}`")))
        })
        .collect()
}

fn mc_rows(reports: &[(MCReport, C64)]) -> Vec<Value> {
    reports
        .iter()
        .map(|(r, exact)| {
            json!({
                "word": r.word, "n": r.n, "N": r.big_n, "samples": r.samples, "seed": r.seed,
                "mean": {"re": r.mean.re, "im": r.mean.im}, "stderr": r.stderr,
                "exact": cval(*exact), "sigmas": r.sigmas(*exact),
            })
        })
        .collect()
}

fn run_mc(args: &McArgs, source: Source, seed: u64, exact: &dyn StateEvaluator) -> udg_core::Result<Value> {
    let w = Word::parse(args.n, &args.word)?;
    let exact_value = exact.eval(&w)?;
    let sizes = if args.sweep.is_empty() {
        vec![args.big_n]
    } else {
        args.sweep.clone()
    };
    let mut reports = Vec::new();
    for big_n in sizes {
        reports.push((
            mc_estimate(&source, &w, args.n, big_n, args.samples, seed)?,
            exact_value,
        ));
    }
    let mut rows = mc_rows(&reports);
    if rows.len() == 1 {
        Ok(rows.remove(0))
    } else {
        Ok(json!({"word": w.to_string(), "rows": rows}))
    }
}

/// (report, success)
fn run(cli: &Cli) -> udg_core::Result<(Value, bool)> {
    let seed = cli.seed;
    Ok(match &cli.command {
        Command::Eval { trace, n, word } => {
            let w = Word::parse(*n, word)?;
            match trace {
                TraceKind::Free => (
                    json!({"command": "eval", "inputs": {"trace": "free", "n": n, "word": w.to_string()}, "value": cval(eval_free_haar(&w)?)}),
                    true,
                ),
                TraceKind::Tensor => {
                    let v = eval_tensor_haar(&w)?;
                    let o = eval_tensor_haar_oracle(&w)?;
                    (
                        json!({"command": "eval", "inputs": {"trace": "tensor", "n": n, "word": w.to_string()},
                               "value": cval(v), "oracle": cval(o), "diff": (v - o).norm()}),
                        true,
                    )
                }
            }
        }
        Command::Convolve {
            kind,
            lhs,
            rhs,
            n,
            word,
        } => {
            let w = Word::parse(*n, word)?;
            let conv = convolve(*kind, state_from_spec(lhs, *n)?, state_from_spec(rhs, *n)?)?;
            (
                json!({"command": "convolve", "inputs": {"kind": kind.name(), "lhs": lhs, "rhs": rhs, "n": n, "word": w.to_string()},
                       "value": cval(conv.eval(&w)?)}),
                true,
            )
        }
        Command::McBlocks(args) => {
            let mut r = run_mc(args, Source::Haar, seed, &FreeHaarTrace::new(args.n))?;
            r["command"] = json!("mc-blocks");
            r["exact_source"] = json!("haar-free");
            (r, true)
        }
        Command::McBm { mc, t, steps } => {
            let mut r = run_mc(
                mc,
                Source::Bm { t: *t, steps: *steps },
                seed,
                &free_bm_block_state(mc.n, *t),
            )?;
            r["command"] = json!("mc-bm");
            r["t"] = json!(t);
            r["steps"] = json!(steps);
            r["exact_source"] = json!("free-bm");
            (r, true)
        }
        Command::Counterexample { kind, n } => {
            let mut r = match kind {
                CounterKind::Boolean => serde_json::to_value(boolean_counterexample(*n)?),
                CounterKind::Monotone => serde_json::to_value(monotone_counterexample(*n)?),
                CounterKind::Free => serde_json::to_value(free_counterexample(*n, Arc::new(FreeHaarTrace::new(*n)))?),
                CounterKind::Tensor => serde_json::to_value(check_free_obstruction(
                    *n,
                    Arc::new(TensorHaarTrace::new(*n)),
                    ProductKind::Tensor,
                    1,
                )?),
            }
            .map_err(|e| Error::Json(e.to_string()))?;
            r["command"] = json!("counterexample");
            (r, true)
        }
        Command::Nc {
            m,
            list,
            sigma,
            complement_of,
        } => {
            if let (Some(sigma), Some(f)) = (sigma, complement_of) {
                let blocks: Vec<Vec<usize>> = sigma.split('|').map(parse_list).collect::<udg_core::Result<_>>()?;
                let ground: Vec<usize> = blocks.iter().flatten().copied().collect();
                let s = NCPartition::new(ground, blocks)?;
                let k = kreweras_relative(&s, &parse_list(f)?)?;
                (
                    json!({"command": "nc", "sigma": s.to_string(), "complement": k.to_string()}),
                    true,
                )
            } else {
                let parts = enumerate_nc(*m)?;
                let mut r = json!({"command": "nc", "m": m, "count": parts.len(), "catalan": catalan(*m)});
                if *list {
                    r["partitions"] = json!(parts.iter().map(|p| p.to_string()).collect::<Vec<_>>());
                }
                (r, true)
            }
        }
        Command::Generator {
            triple,
            k,
            dt,
            big_n,
            steps,
            samples,
            word,
            lift,
        } => {
            if triple != "bm" {
                return Err(Error::Invalid(format!(
                    "unknown triple `{triple}`; only `bm` is built in"
                )));
            }
            let fd = generator_vs_bm_finite_difference(*k, *dt, *big_n, *steps, *samples, seed)?;
            let mut r = json!({
                "command": "generator", "triple": "bm", "k": k,
                "recursion": fd.generator,
                "closed_form_derivative": udg_core::matrix_lab::bm_moment_derivative(*k, 0.0),
                "finite_difference": fd,
            });
            let mut ok = r["finite_difference"]["pass"].as_bool().unwrap_or(false);
            if let (Some(w), Some(n)) = (word, lift) {
                let t = block_lift(&bm_triple(), *n)?;
                let w = Word::parse(*n, w)?;
                let l = t.eval_l(&w)?;
                let slope = udg_core::schurmann::free_bm_block_slope(&w, 1e-7)?;
                r["lifted"] =
                    json!({"n": n, "word": w.to_string(), "generator": cval(l), "free_block_slope": cval(slope)});
                ok &= (l - slope).norm() < 1e-5;
            }
            (r, ok)
        }
        Command::TripleCheck {
            file,
            words,
            max_len,
            tol,
        } => {
            let text = std::fs::read_to_string(file).map_err(|e| Error::Invalid(format!("{}: {e}", file.display())))?;
            let data = load_triple_json(&text)?;
            let t = triple_from_whr(&data)?;
            let alpha = alphabet(data.n);
            let mut rng = sample_rng(seed, 0);
            let sample: Vec<Word> = (0..*words)
                .map(|_| {
                    let len = rng.random_range(0..=*max_len);
                    Word::new(
                        data.n,
                        (0..len).map(|_| alpha[rng.random_range(0..alpha.len())]).collect(),
                    )
                })
                .collect::<udg_core::Result<_>>()?;
            let rep = verify_triple_axioms(&t, &sample)?;
            let cp = conditional_positivity_min_eig(&t, &udg_core::brown_words::words_up_to(data.n, 2))?;
            let ok = rep.max_violation <= *tol && cp >= -1e-8;
            (
                json!({"command": "triple-check", "file": file.display().to_string(), "n": data.n, "d": data.d,
                       "axioms": rep, "conditional_positivity_min_eig": cp, "tol": tol, "pass": ok}),
                ok,
            )
        }
        Command::Selftest { level, inject_fault } => {
            let mut faults = Faults::default();
            match inject_fault.as_deref() {
                None => {}
                Some("catalan") => faults.corrupt_catalan = true,
                Some(other) => return Err(Error::Invalid(format!("unknown fault `{other}`"))),
            }
            let level = match level {
                SelftestLevel::Quick => Level::Quick,
                SelftestLevel::Full => Level::Full,
            };
            let cfg = Config { level, seed, faults };
            let quiet = cli.json;
            let results = run_all(&cfg, |r| {
                if !quiet {
                    println!("{}", r.line());
                }
            })?;
            let ok = results.iter().all(|r| r.pass);
            let rows: Vec<Value> = results
                .iter()
                .map(|r| json!({"id": r.id, "name": r.name, "pass": r.pass, "summary": r.summary}))
                .collect();
            (
                json!({"command": "selftest", "level": level, "pass": ok, "rows": rows,
                       "criteria": results.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect::<Vec<_>>()}),
                ok,
            )
        }
    })
}

fn is_randomized(c: &Command) -> bool {
    matches!(
        c,
        Command::McBlocks(_)
            | Command::McBm { .. }
            | Command::Generator { .. }
            | Command::TripleCheck { .. }
            | Command::Selftest { .. }
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok((mut report, ok)) => {
            report["version"] = json!(env!("CARGO_PKG_VERSION"));
            if is_randomized(&cli.command) {
                report["seed"] = json!(cli.seed);
            }
            let selftest_text = matches!(cli.command, Command::Selftest { .. }) && !cli.json;
            if let Err(e) = emit(&report, cli.json, selftest_text, cli.csv.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
