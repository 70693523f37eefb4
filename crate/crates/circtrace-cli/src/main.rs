//! Command-line front end for the circtrace library: seeded, reproducible
//! experiments with CSV (default) or JSON output. Every run echoes its full
//! configuration so any output file can be reproduced from its own header.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use serde_json::{Map, Value};

use circtrace::channel::{exact_trace_prob, rational_to_f64, sample_trace, ChannelParams};
use circtrace::cyclicstats::{canonical_tuples, min_distinguishing_stat, stat, stats_equal_up_to};
use circtrace::distinguish::{run_trials, DistinguishInstance, TestPlan, Verdict};
use circtrace::fourier::{default_zero_tol, dft, zero_pattern, ZeroPattern};
use circtrace::gapseq::GapSequence;
use circtrace::lowerbound::{
    fitted_slope, ratio_deviation_sweep, search_complement_pairs, search_matching_pairs,
    LowerBoundPair,
};

/// Seed used when none is given; always echoed into the output header.
const DEFAULT_SEED: u64 = 20260815;

#[derive(Parser)]
#[command(
    name = "circtrace",
    version,
    about = "Circular deletion channel workbench: sampling, exact trace probabilities, \
             cyclic-statistic tools, and distinguishing experiments",
    after_help = "All logarithms are natural. Output is CSV by default with the run \
                  configuration echoed as '# key=value' comment lines; --format json \
                  mirrors the same data."
)]
struct Cli {
    /// Cap the worker thread pool (output is identical for any value)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format (the fourier subcommand always emits JSON)
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    X,
    Y,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw traces of a circular string from the deletion channel
    Sample {
        /// Input gap sequence, e.g. 1,1 for the circular string 1010
        #[arg(long)]
        gaps: String,
        /// Deletion probability, decimal or fraction (e.g. 0.5 or 1/2)
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Number of traces to draw
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Exact probability of one specific trace, in rational arithmetic
    Prob {
        /// Input gap sequence
        #[arg(long)]
        gaps: String,
        /// Gap sequence of the trace (all ones surviving)
        #[arg(long)]
        trace_gaps: String,
        /// Deletion probability, decimal or fraction
        #[arg(long)]
        p: String,
    },
    /// Cyclic statistics of a gap sequence, or the minimal statistic
    /// separating two of them
    Stats {
        /// Gap sequence
        #[arg(long)]
        x: String,
        /// Optional second sequence: report the minimal separating statistic
        #[arg(long)]
        y: Option<String>,
        /// Index modulus (must divide k)
        #[arg(long, default_value_t = 1)]
        ell: usize,
        /// Largest statistic order to enumerate or search
        #[arg(long, default_value_t = 6)]
        cap: usize,
    },
    /// Discrete Fourier spectrum and per-divisor zero pattern (always JSON)
    Fourier {
        /// Integer sequence, e.g. 1,0,-2,1
        #[arg(long)]
        values: String,
        /// Zero tolerance (defaults to a scale-aware value)
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Exhaustively verify that order-6 statistics separate all cyclically
    /// distinct gap sequences in a box
    VerifyChar {
        #[arg(long)]
        k: usize,
        /// Gap values range over 0..=max-value
        #[arg(long)]
        max_value: u64,
        #[arg(long, default_value_t = 6)]
        cap: usize,
    },
    /// Run seeded distinguishing trials between two gap sequences
    Distinguish {
        /// First candidate gap sequence
        #[arg(long)]
        x: String,
        /// Second candidate gap sequence
        #[arg(long)]
        y: String,
        /// Deletion probability, decimal or fraction
        #[arg(long)]
        p: String,
        /// Separation constant for the cluster partition
        #[arg(long = "C", default_value_t = 3.0)]
        c_param: f64,
        /// Channel draws per trial (shared-pattern regime budget)
        #[arg(long, default_value_t = 100_000)]
        traces: usize,
        #[arg(long, default_value_t = 30)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Which source the channel actually samples
        #[arg(long, value_enum)]
        source: SourceArg,
    },
    /// Measure likelihood-ratio deviations of a matched pair across scales
    RatioSweep {
        /// 'builtin' for the order-4 matched pair, or a JSON file with
        /// {"x": [...], "y": [...], "matched_order": m}
        #[arg(long, default_value = "builtin")]
        pair: String,
        /// Deletion probability, decimal or fraction
        #[arg(long)]
        p: String,
        /// Scales to sweep, e.g. 64,128,256,512
        #[arg(long = "n-list")]
        n_list: String,
        /// Window-passing samples per scale
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Window half-width constant: keep |a_j - nq| <= window*sqrt(n ln n)
        #[arg(long, default_value_t = 3.0)]
        window: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Exhaustive search for matched permutation pairs
    #[command(group = clap::ArgGroup::new("space").required(true).multiple(false))]
    SearchPairs {
        #[arg(long)]
        k: usize,
        /// Search the full box {0..=max-value}^k (small boxes only)
        #[arg(long, group = "space")]
        max_value: Option<u64>,
        /// Search value-wise complement pairs y_j = complement - x_j instead
        #[arg(long, group = "space")]
        complement: Option<u64>,
        /// Statistics must agree through this order and differ at the next
        #[arg(long)]
        order: usize,
    },
    /// Show the built-in order-4 matched pair and its statistics
    PairDemo,
}

/// One run's output: echoed config, derived notes, scalar results, and an
/// optional table. CSV mode renders config and notes as '#' comments,
/// results as plain `key value` lines, and the table as CSV; JSON mode
/// mirrors everything in one object.
struct Output {
    subcommand: &'static str,
    config: Vec<(&'static str, String)>,
    notes: Vec<(&'static str, Value)>,
    results: Vec<(&'static str, Value)>,
    table: Option<Table>,
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Output {
    fn new(subcommand: &'static str) -> Self {
        Output {
            subcommand,
            config: Vec::new(),
            notes: Vec::new(),
            results: Vec::new(),
            table: None,
        }
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_csv(o: &Output) -> Result<String> {
    let mut s = String::new();
    writeln!(s, "# circtrace {}", o.subcommand)?;
    for (k, v) in &o.config {
        writeln!(s, "# {k}={v}")?;
    }
    for (k, v) in &o.notes {
        writeln!(s, "# {k}={}", cell(v))?;
    }
    for (k, v) in &o.results {
        writeln!(s, "{k} {}", cell(v))?;
    }
    if let Some(t) = &o.table {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&t.columns)?;
        for row in &t.rows {
            w.write_record(row.iter().map(cell))?;
        }
        s.push_str(std::str::from_utf8(&w.into_inner()?)?);
    }
    Ok(s)
}

fn render_json(o: &Output) -> Result<String> {
    let mut root = Map::new();
    let mut cfg = Map::new();
    cfg.insert("subcommand".into(), o.subcommand.into());
    for (k, v) in &o.config {
        cfg.insert((*k).into(), Value::String(v.clone()));
    }
    root.insert("config".into(), Value::Object(cfg));
    if !o.notes.is_empty() {
        let mut info = Map::new();
        for (k, v) in &o.notes {
            info.insert((*k).into(), v.clone());
        }
        root.insert("info".into(), Value::Object(info));
    }
    for (k, v) in &o.results {
        root.insert((*k).into(), v.clone());
    }
    if let Some(t) = &o.table {
        let rows: Vec<Value> = t
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, v) in t.columns.iter().zip(row) {
                    obj.insert((*col).into(), v.clone());
                }
                Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), Value::Array(rows));
    }
    Ok(serde_json::to_string_pretty(&Value::Object(root))? + "\n")
}

fn parse_gap_list(s: &str) -> Result<GapSequence> {
    s.parse::<GapSequence>()
        .with_context(|| format!("invalid gap sequence '{s}'"))
}

fn parse_prob(s: &str) -> Result<(BigRational, f64)> {
    let r = if let Some((a, b)) = s.split_once('/') {
        let denom: BigInt = b.trim().parse().context("invalid fraction denominator")?;
        if denom.is_zero() {
            bail!("probability denominator is zero");
        }
        BigRational::new(a.trim().parse().context("invalid fraction numerator")?, denom)
    } else if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{}{frac}", if int.is_empty() { "0" } else { int });
        let numer: BigInt = digits.parse().with_context(|| format!("invalid probability '{s}'"))?;
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        BigRational::new(numer, denom)
    } else {
        BigRational::from(s.parse::<BigInt>().with_context(|| format!("invalid probability '{s}'"))?)
    };
    let f = rational_to_f64(&r);
    if !(f > 0.0 && f < 1.0) {
        bail!("deletion probability must lie strictly between 0 and 1, got {s}");
    }
    Ok((r, f))
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("invalid integer '{t}'")))
        .collect()
}

fn parse_i64_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().with_context(|| format!("invalid integer '{t}'")))
        .collect()
}

fn pattern_text(p: &[usize]) -> String {
    p.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn load_pair(source: &str) -> Result<LowerBoundPair> {
    if source == "builtin" {
        return Ok(LowerBoundPair::order4_pair());
    }
    let text = std::fs::read_to_string(source)
        .with_context(|| format!("cannot read pair file '{source}'"))?;
    let v: Value = serde_json::from_str(&text).context("pair file is not valid JSON")?;
    let seq = |key: &str| -> Result<GapSequence> {
        let arr = v
            .get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| anyhow!("pair file needs an array field '{key}'"))?;
        let gaps: Vec<u64> = arr
            .iter()
            .map(|g| g.as_u64().ok_or_else(|| anyhow!("'{key}' entries must be nonnegative integers")))
            .collect::<Result<_>>()?;
        Ok(GapSequence::new(gaps)?)
    };
    let matched = v
        .get("matched_order")
        .and_then(Value::as_u64)
        .ok_or_else(|| anyhow!("pair file needs an integer field 'matched_order'"))?;
    Ok(LowerBoundPair::new(seq("x")?, seq("y")?, matched as usize)?)
}

fn run_sample(gaps: &str, p: &str, seed: u64, count: usize) -> Result<Output> {
    let x = parse_gap_list(gaps)?;
    let (_, pf) = parse_prob(p)?;
    let params = ChannelParams::new(pf, seed)?;
    let bits = x.to_binary();

    let mut o = Output::new("sample");
    o.config = vec![
        ("gaps", gaps.into()),
        ("p", p.into()),
        ("seed", seed.to_string()),
        ("count", count.to_string()),
    ];
    let rows = (0..count)
        .map(|t| {
            let mut rng = params.trial_rng(t as u64);
            let trace = sample_trace(&bits, &params, &mut rng);
            vec![
                Value::from(t),
                Value::from(trace.to_string()),
                Value::from(trace.len()),
                Value::from(trace.ones()),
            ]
        })
        .collect();
    o.table = Some(Table {
        columns: vec!["trial", "trace", "length", "ones"],
        rows,
    });
    Ok(o)
}

fn run_prob(gaps: &str, trace_gaps: &str, p: &str) -> Result<Output> {
    let x = parse_gap_list(gaps)?;
    let a = parse_gap_list(trace_gaps)?;
    if x.k() != a.k() {
        bail!(
            "the trace must keep all {} ones of the input, got {} trace gaps",
            x.k(),
            a.k()
        );
    }
    let (pr, _) = parse_prob(p)?;
    let exact = exact_trace_prob(&x, &a, &pr)?;

    let mut o = Output::new("prob");
    o.config = vec![
        ("gaps", gaps.into()),
        ("trace_gaps", trace_gaps.into()),
        ("p", p.into()),
    ];
    o.results = vec![
        ("exact", Value::from(exact.to_string())),
        ("decimal", num(rational_to_f64(&exact))),
    ];
    Ok(o)
}

fn run_stats(x: &str, y: Option<&str>, ell: usize, cap: usize) -> Result<Output> {
    let xs = parse_gap_list(x)?;
    let xi = xs.gaps_i64();

    let mut o = Output::new("stats");
    o.config = vec![
        ("x", x.into()),
        ("y", y.unwrap_or("").into()),
        ("ell", ell.to_string()),
        ("cap", cap.to_string()),
    ];
    match y {
        None => {
            let mut rows = Vec::new();
            for order in 1..=cap {
                for idx in canonical_tuples(xs.k(), ell, order)? {
                    let v = stat(&xi, &idx)?;
                    rows.push(vec![
                        Value::from(idx.to_string()),
                        Value::from(order),
                        Value::from(v.to_string()),
                    ]);
                }
            }
            o.table = Some(Table {
                columns: vec!["index", "order", "value"],
                rows,
            });
        }
        Some(y) => {
            let ys = parse_gap_list(y)?;
            let yi = ys.gaps_i64();
            let mut rows = Vec::new();
            match min_distinguishing_stat(&xi, &yi, ell, cap)? {
                Some(idx) => {
                    let (vx, vy) = (stat(&xi, &idx)?, stat(&yi, &idx)?);
                    o.notes.push(("separated", Value::from(true)));
                    rows.push(vec![
                        Value::from(idx.to_string()),
                        Value::from(idx.order()),
                        Value::from(vx.to_string()),
                        Value::from(vy.to_string()),
                    ]);
                }
                None => {
                    o.notes.push(("separated", Value::from(false)));
                    o.notes.push(("matched_through", Value::from(cap)));
                }
            }
            o.table = Some(Table {
                columns: vec!["index", "order", "x_value", "y_value"],
                rows,
            });
        }
    }
    Ok(o)
}

fn run_fourier(values: &str, tol: Option<f64>) -> Result<Output> {
    let x = parse_i64_list(values)?;
    if x.is_empty() {
        bail!("need at least one value");
    }
    let spectrum = dft(&x);
    let tol = tol.unwrap_or_else(|| default_zero_tol(&x));
    let classes = zero_pattern(&spectrum, tol);

    let mut o = Output::new("fourier");
    o.config = vec![("values", values.into()), ("tol", tol.to_string())];
    let mut zp = Map::new();
    for (alpha, pat) in &classes {
        let name = match pat {
            ZeroPattern::AllZero => "all_zero",
            ZeroPattern::AllNonzero => "all_nonzero",
            ZeroPattern::Mixed => "mixed",
        };
        zp.insert(alpha.to_string(), Value::from(name));
    }
    o.results = vec![("zero_pattern", Value::Object(zp))];
    let rows = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| vec![Value::from(j), num(c.re), num(c.im), num(c.norm())])
        .collect();
    o.table = Some(Table {
        columns: vec!["j", "re", "im", "norm"],
        rows,
    });
    Ok(o)
}

fn run_verify_char(k: usize, max_value: u64, cap: usize) -> Result<Output> {
    let size = (max_value + 1)
        .checked_pow(k.try_into().unwrap_or(u32::MAX))
        .filter(|&s| s <= 20_000_000)
        .ok_or_else(|| anyhow!("box {{0..={max_value}}}^{k} is too large to enumerate"))?;
    let counterexamples = circtrace::cyclicstats::verify_characterization(k, max_value, cap);

    let mut o = Output::new("verify-char");
    o.config = vec![
        ("k", k.to_string()),
        ("max_value", max_value.to_string()),
        ("cap", cap.to_string()),
    ];
    o.notes = vec![("box_size", Value::from(size))];
    o.results = vec![("counterexamples", Value::from(counterexamples.len()))];
    o.table = Some(Table {
        columns: vec!["x", "y"],
        rows: counterexamples
            .iter()
            .map(|(a, b)| vec![Value::from(a.to_string()), Value::from(b.to_string())])
            .collect(),
    });
    Ok(o)
}

#[allow(clippy::too_many_arguments)]
fn run_distinguish(
    x: &str,
    y: &str,
    p: &str,
    c_param: f64,
    traces: usize,
    trials: u64,
    seed: u64,
    source: SourceArg,
) -> Result<Output> {
    let xs = parse_gap_list(x)?;
    let ys = parse_gap_list(y)?;
    let (_, pf) = parse_prob(p)?;
    let inst = DistinguishInstance::new(xs, ys, pf, c_param, traces)?;
    let source = match source {
        SourceArg::X => Verdict::X,
        SourceArg::Y => Verdict::Y,
    };

    let mut o = Output::new("distinguish");
    o.config = vec![
        ("x", x.into()),
        ("y", y.into()),
        ("p", p.into()),
        ("C", c_param.to_string()),
        ("traces", traces.to_string()),
        ("trials", trials.to_string()),
        ("seed", seed.to_string()),
        ("source", source.to_string()),
    ];
    o.notes = vec![
        ("pattern_x", Value::from(pattern_text(inst.pattern_x()))),
        ("pattern_y", Value::from(pattern_text(inst.pattern_y()))),
        ("threshold", num(inst.partition().threshold())),
    ];
    let (tx, ty) = match inst.plan() {
        TestPlan::PatternSplit => {
            o.notes.push(("plan", Value::from("pattern_split")));
            o.notes.push(("split_budget", Value::from(inst.split_budget())));
            (Value::Null, Value::Null)
        }
        TestPlan::SharedPattern {
            idx,
            ell,
            target_x,
            target_y,
            ..
        } => {
            o.notes.push(("plan", Value::from("shared_pattern")));
            o.notes.push(("statistic", Value::from(idx.to_string())));
            o.notes.push(("ell", Value::from(*ell)));
            (num(*target_x), num(*target_y))
        }
    };

    let records = run_trials(&inst, source, trials, seed);
    let correct = records.iter().filter(|r| r.verdict == Some(source)).count();
    o.notes.push(("correct", Value::from(correct)));
    let rows = records
        .iter()
        .map(|r| {
            vec![
                Value::from(r.trial),
                Value::from(r.verdict.map_or_else(|| "none".to_string(), |v| v.to_string())),
                r.f_hat.map(num).unwrap_or(Value::Null),
                tx.clone(),
                ty.clone(),
                Value::from(r.useful_count),
            ]
        })
        .collect();
    o.table = Some(Table {
        columns: vec!["trial", "verdict", "f_hat", "target_x", "target_y", "useful_count"],
        rows,
    });
    Ok(o)
}

fn run_ratio_sweep(
    pair_arg: &str,
    p: &str,
    n_list: &str,
    samples: usize,
    window: f64,
    seed: u64,
) -> Result<Output> {
    let pair = load_pair(pair_arg)?;
    let (_, pf) = parse_prob(p)?;
    let ns = parse_u64_list(n_list)?;
    if ns.is_empty() {
        bail!("need at least one scale in --n-list");
    }
    if ns.iter().any(|&n| n < 2) {
        bail!("scales must be at least 2");
    }
    if samples == 0 {
        bail!("need at least one sample per scale");
    }
    if !(window > 0.0) {
        bail!("window constant must be positive");
    }

    let sweep = ratio_deviation_sweep(&pair, pf, &ns, samples, window, seed);

    let mut o = Output::new("ratio-sweep");
    o.config = vec![
        ("pair", pair_arg.into()),
        ("p", p.into()),
        ("n_list", n_list.into()),
        ("samples", samples.to_string()),
        ("window", window.to_string()),
        ("seed", seed.to_string()),
    ];
    o.notes = vec![
        ("pair_x", Value::from(pair.x().to_string())),
        ("pair_y", Value::from(pair.y().to_string())),
        ("matched_order", Value::from(pair.matched_order())),
    ];
    o.results = vec![(
        "slope",
        sweep.slope.map(num).unwrap_or(Value::Null),
    )];
    let rows = sweep
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let so_far = fitted_slope(&sweep.rows[..=i]);
            vec![
                Value::from(r.n),
                Value::from(r.samples_kept),
                num(r.max_dev),
                num(r.q99_dev),
                so_far.map(num).unwrap_or(Value::Null),
            ]
        })
        .collect();
    o.table = Some(Table {
        columns: vec!["n", "samples_kept", "max_dev", "q99_dev", "slope_so_far"],
        rows,
    });
    Ok(o)
}

fn run_search_pairs(
    k: usize,
    max_value: Option<u64>,
    complement: Option<u64>,
    order: usize,
) -> Result<Output> {
    let check_box = |v: u64, limit: u64| -> Result<()> {
        (v + 1)
            .checked_pow(k.try_into().unwrap_or(u32::MAX))
            .filter(|&s| s <= limit)
            .map(|_| ())
            .ok_or_else(|| anyhow!("box {{0..={v}}}^{k} is too large to enumerate"))
    };
    let (pairs, mode) = match (max_value, complement) {
        (Some(mv), None) => {
            check_box(mv, 20_000_000)?;
            (search_matching_pairs(k, mv, order), "box")
        }
        (None, Some(c)) => {
            check_box(c, 100_000_000)?;
            (search_complement_pairs(k, c, order), "complement")
        }
        _ => unreachable!("clap enforces exactly one search space"),
    };

    let mut o = Output::new("search-pairs");
    o.config = vec![
        ("k", k.to_string()),
        ("max_value", max_value.map(|v| v.to_string()).unwrap_or_default()),
        ("complement", complement.map(|v| v.to_string()).unwrap_or_default()),
        ("order", order.to_string()),
    ];
    o.notes = vec![("mode", Value::from(mode))];
    o.results = vec![("pairs_found", Value::from(pairs.len()))];
    let rows = pairs
        .iter()
        .map(|p| {
            vec![
                Value::from(p.x().to_string()),
                Value::from(p.y().to_string()),
                Value::from(p.matched_order()),
                Value::from(p.is_permutation()),
            ]
        })
        .collect();
    o.table = Some(Table {
        columns: vec!["x", "y", "matched_order", "is_permutation"],
        rows,
    });
    Ok(o)
}

fn run_pair_demo() -> Result<Output> {
    let pair = LowerBoundPair::order4_pair();
    let (xi, yi) = (pair.x().gaps_i64(), pair.y().gaps_i64());
    let k = pair.x().k();

    let mut o = Output::new("pair-demo");
    o.results = vec![
        ("x", Value::from(pair.x().to_string())),
        ("y", Value::from(pair.y().to_string())),
        ("matched_order", Value::from(pair.matched_order())),
        ("is_permutation", Value::from(pair.is_permutation())),
    ];
    let mut rows = Vec::new();
    for order in 1..=pair.matched_order() {
        let count = canonical_tuples(k, 1, order)?.len();
        let agree = stats_equal_up_to(&xi, &yi, order, 1)?;
        rows.push(vec![
            Value::from(order),
            Value::from(count),
            Value::from(agree),
        ]);
    }
    o.table = Some(Table {
        columns: vec!["order", "statistics", "all_agree"],
        rows,
    });
    let idx = min_distinguishing_stat(&xi, &yi, 1, 6)?
        .expect("the built-in pair separates by order 6");
    o.results.push(("first_distinguishing", Value::from(idx.to_string())));
    o.results.push(("first_order", Value::from(idx.order())));
    o.results.push(("x_value", Value::from(stat(&xi, &idx)?.to_string())));
    o.results.push(("y_value", Value::from(stat(&yi, &idx)?.to_string())));
    Ok(o)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("cannot size the thread pool")?;
    }
    let force_json = matches!(cli.cmd, Cmd::Fourier { .. });
    let output = match &cli.cmd {
        Cmd::Sample { gaps, p, seed, count } => run_sample(gaps, p, *seed, *count)?,
        Cmd::Prob { gaps, trace_gaps, p } => run_prob(gaps, trace_gaps, p)?,
        Cmd::Stats { x, y, ell, cap } => run_stats(x, y.as_deref(), *ell, *cap)?,
        Cmd::Fourier { values, tol } => run_fourier(values, *tol)?,
        Cmd::VerifyChar { k, max_value, cap } => run_verify_char(*k, *max_value, *cap)?,
        Cmd::Distinguish {
            x,
            y,
            p,
            c_param,
            traces,
            trials,
            seed,
            source,
        } => run_distinguish(x, y, p, *c_param, *traces, *trials, *seed, *source)?,
        Cmd::RatioSweep {
            pair,
            p,
            n_list,
            samples,
            window,
            seed,
        } => run_ratio_sweep(pair, p, n_list, *samples, *window, *seed)?,
        Cmd::SearchPairs {
            k,
            max_value,
            complement,
            order,
        } => run_search_pairs(*k, *max_value, *complement, *order)?,
        Cmd::PairDemo => run_pair_demo()?,
    };

    let format = if force_json { Format::Json } else { cli.format };
    let text = match format {
        Format::Csv => render_csv(&output)?,
        Format::Json => render_json(&output)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
