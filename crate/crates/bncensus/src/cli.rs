//! Command-line front end: reproducible census runs, cross-checks, and
//! report emission. All outputs are deterministic functions of the full
//! argument list; no timestamps.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::census::{
    counterexample_report, run_census, strata_counts, CensusQuery, CensusReport, Confidence,
    CountMode, CounterexampleKind,
};
use crate::chordspace::{run_crosscheck, ChordConfig, CrosscheckReport};
use crate::curvemodel::{make_polarization, random_curve, Component, MultiDegree};
use crate::ramification::{expected_dim, is_admissible};
use crate::sections::DivisorStep;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "bncensus",
    version,
    about = "Exact finite-field census of linear series on binary curves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the expected dimension and its correction terms.
    Rho(RhoArgs),
    /// Count points of a locus over several primes and estimate its
    /// dimension.
    Census(CensusArgs),
    /// Round-trip and dictionary checks of the chord model against the
    /// direct model.
    Crosscheck(CrosscheckArgs),
    /// List quasistable strata for a polarization, optionally with counts.
    Strata(StrataArgs),
    /// Verify one of the known excess-dimension loci.
    Counterexample(CounterexampleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CliMode {
    AtLeast,
    ExactH0,
    ExactSeq,
    Boundary,
}

impl From<CliMode> for CountMode {
    fn from(m: CliMode) -> CountMode {
        match m {
            CliMode::AtLeast => CountMode::AtLeast,
            CliMode::ExactH0 => CountMode::ExactH0,
            CliMode::ExactSeq => CountMode::ExactSequence,
            CliMode::Boundary => CountMode::Boundary,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CliKind {
    /// Negative degree on the second component; dimension exceeds rho.
    ExcessDim,
    /// Ramified locus with negative expected dimension, still nonempty.
    NegativeRho,
}

#[derive(Args, Debug)]
pub struct RhoArgs {
    #[arg(long)]
    pub g: i64,
    #[arg(long)]
    pub r: i64,
    #[arg(long)]
    pub d: i64,
    /// Ramification data, e.g. "0,2@(0,0);(2,0)".
    #[arg(long)]
    pub ram: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[arg(long)]
    pub g: usize,
    /// Multidegree, e.g. "3,-2".
    #[arg(long)]
    pub dd: String,
    #[arg(long)]
    pub r: i64,
    #[arg(long)]
    pub ram: Option<String>,
    #[arg(long, value_enum, default_value = "at-least")]
    pub mode: CliMode,
    #[arg(long, default_value = "7,11,13", value_delimiter = ',')]
    pub primes: Vec<u64>,
    #[arg(long, default_value = "0", value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Maximum torus points enumerated per count.
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub csv: bool,
    /// Base path for report files (suffixes .json/.csv appended).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Succeed when the measured dimension strictly exceeds rho.
    #[arg(long)]
    pub expect_counterexample: bool,
}

#[derive(Args, Debug)]
pub struct CrosscheckArgs {
    #[arg(long)]
    pub g: usize,
    #[arg(long)]
    pub dd: String,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value = "7,11", value_delimiter = ',')]
    pub primes: Vec<u64>,
    #[arg(long, default_value = "0", value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 200)]
    pub planes: usize,
    #[arg(long, default_value_t = 100)]
    pub dict: usize,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StrataArgs {
    #[arg(long)]
    pub d: i64,
    #[arg(long)]
    pub g: usize,
    #[arg(long, default_value_t = 0)]
    pub y: i64,
    /// Component carrying the quasistability base point (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub p: u8,
    /// Also count points per stratum.
    #[arg(long)]
    pub count: bool,
    #[arg(long, default_value_t = 0)]
    pub r: i64,
    #[arg(long)]
    pub ram: Option<String>,
    #[arg(long, default_value = "7", value_delimiter = ',')]
    pub primes: Vec<u64>,
    #[arg(long, default_value = "0", value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    /// Which family; inferred from the arguments when omitted.
    #[arg(long, value_enum)]
    pub kind: Option<CliKind>,
    #[arg(long)]
    pub g: usize,
    #[arg(long)]
    pub dd: String,
    #[arg(long)]
    pub r: i64,
    #[arg(long)]
    pub ram: Option<String>,
    #[arg(long, default_value = "5,7,11", value_delimiter = ',')]
    pub primes: Vec<u64>,
    #[arg(long, default_value = "0", value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse "d1,d2" into a multidegree.
pub fn parse_dd(s: &str) -> Result<MultiDegree> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::OutOfRange(format!("bad multidegree '{s}'")));
    }
    let d1 = parts[0]
        .trim()
        .parse::<i64>()
        .map_err(|_| Error::OutOfRange(format!("bad multidegree '{s}'")))?;
    let d2 = parts[1]
        .trim()
        .parse::<i64>()
        .map_err(|_| Error::OutOfRange(format!("bad multidegree '{s}'")))?;
    Ok(MultiDegree::new(d1, d2))
}

/// Parse "a0,a1,...@(x1,y1);(x2,y2);..." into the sequence and its
/// divisor steps.
pub fn parse_ram(s: &str) -> Result<(Vec<u64>, Vec<DivisorStep>)> {
    let bad = || Error::OutOfRange(format!("bad ramification spec '{s}'"));
    let (a_part, d_part) = s.split_once('@').ok_or_else(bad)?;
    let a = a_part
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
        .collect::<Result<Vec<u64>>>()?;
    let mut steps = Vec::new();
    for piece in d_part.split(';') {
        let inner = piece
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (x, y) = inner.split_once(',').ok_or_else(bad)?;
        steps.push(DivisorStep::new(
            x.trim().parse::<u64>().map_err(|_| bad())?,
            y.trim().parse::<u64>().map_err(|_| bad())?,
        ));
    }
    Ok((a, steps))
}

fn component_of(p: u8) -> Result<Component> {
    match p {
        1 => Ok(Component::Z1),
        2 => Ok(Component::Z2),
        _ => Err(Error::OutOfRange("component must be 1 or 2".into())),
    }
}

fn write_or_print(path: Option<&PathBuf>, suffix: &str, body: &str) -> Result<()> {
    match path {
        Some(base) => {
            let mut p = base.clone();
            let name = format!(
                "{}{suffix}",
                base.file_name().and_then(|n| n.to_str()).unwrap_or("report")
            );
            p.set_file_name(name);
            let mut f = std::fs::File::create(p)?;
            f.write_all(body.as_bytes())?;
            Ok(())
        }
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn census_csv(report: &CensusReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "seed_requested",
        "seed_used",
        "discards",
        "q",
        "count",
        "dim_estimate",
        "confidence",
    ])?;
    for run in &report.runs {
        for c in &run.counts {
            w.write_record([
                run.seed_requested.to_string(),
                run.seed_used.to_string(),
                run.discards.to_string(),
                c.q.to_string(),
                c.count.clone(),
                run.dim_estimate.map(|d| d.to_string()).unwrap_or_default(),
                format!("{:?}", run.confidence),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::OutOfRange(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cmd_rho(args: &RhoArgs) -> Result<i32> {
    let (a, d_seq) = match &args.ram {
        Some(s) => parse_ram(s)?,
        None => (Vec::new(), Vec::new()),
    };
    if !a.is_empty() && !is_admissible(&a, &d_seq)? {
        return Err(Error::Inadmissible("sequence not admissible".into()));
    }
    let rho = expected_dim(args.g, args.r, args.d, &a)?;
    let base = args.g - (args.r + 1) * (args.g - args.d + args.r);
    let shift: i64 = a.iter().enumerate().map(|(j, &x)| x as i64 - j as i64).sum();
    let mut repeats = 0i64;
    let mut i = 0;
    while i < a.len() {
        let mut k = i;
        while k < a.len() && a[k] == a[i] {
            k += 1;
        }
        let c = (k - i) as i64;
        repeats += c * (c - 1) / 2;
        i = k;
    }
    if args.json {
        println!(
            "{}",
            serde_json::json!({
                "schema_version": 1,
                "rho": rho,
                "base": base,
                "shift_sum": shift,
                "repetition_sum": repeats,
            })
        );
    } else {
        println!("rho = {rho}");
        println!("  base       = {base}");
        println!("  shift sum  = {shift}");
        println!("  repetition = {repeats}");
    }
    Ok(0)
}

fn cmd_census(args: &CensusArgs) -> Result<i32> {
    let dd = parse_dd(&args.dd)?;
    let (a, d_seq) = match &args.ram {
        Some(s) => parse_ram(s)?,
        None => (Vec::new(), Vec::new()),
    };
    let query = CensusQuery {
        g: args.g,
        dd,
        r: args.r,
        d_seq,
        a,
        mode: args.mode.into(),
        primes: args.primes.clone(),
        seeds: args.seeds.clone(),
        budget: args.budget,
    };
    let report = run_census(&query)?;
    if args.json || args.out.is_some() {
        let body = serde_json::to_string_pretty(&report)?;
        write_or_print(args.out.as_ref(), ".json", &body)?;
    }
    if args.csv {
        let body = census_csv(&report)?;
        write_or_print(args.out.as_ref(), ".csv", &body)?;
    }
    if !args.json && !args.csv {
        println!("expected rho = {}", report.expected_rho);
        for run in &report.runs {
            let counts: Vec<String> = run
                .counts
                .iter()
                .map(|c| format!("N({}) = {}", c.q, c.count))
                .collect();
            println!(
                "seed {} (used {}, discards {}): {}; estimate {:?} {:?}",
                run.seed_requested,
                run.seed_used,
                run.discards,
                counts.join(", "),
                run.dim_estimate,
                run.confidence
            );
        }
        println!("verdict: {}", report.verdict);
    }
    if args.expect_counterexample {
        let exceeds = report.runs.iter().all(|r| {
            r.confidence != Confidence::Inconsistent
                && r.dim_estimate.is_some_and(|m| m > report.expected_rho)
        });
        Ok(if exceeds { 0 } else { 1 })
    } else {
        Ok(if report.verdict == "verified" { 0 } else { 1 })
    }
}

fn cmd_crosscheck(args: &CrosscheckArgs) -> Result<i32> {
    let dd = parse_dd(&args.dd)?;
    let mut reports: Vec<CrosscheckReport> = Vec::new();
    for &p in &args.primes {
        for &seed in &args.seeds {
            let x = random_curve(args.g, p, seed)?;
            let cfg = ChordConfig::new(x, dd)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            reports.push(run_crosscheck(
                &cfg,
                args.r,
                args.planes,
                args.dict,
                seed,
                &mut rng,
            )?);
        }
    }
    let failures: usize = reports
        .iter()
        .map(|r| r.roundtrip_failures + r.membership_failures + r.dict_failures)
        .sum();
    if args.json || args.out.is_some() {
        let body = serde_json::to_string_pretty(&serde_json::json!({
            "schema_version": 1,
            "reports": reports,
            "total_failures": failures,
        }))?;
        write_or_print(args.out.as_ref(), ".json", &body)?;
    } else {
        for r in &reports {
            println!(
                "q={} seed={}: {} planes, {} roundtrip failures, {} membership failures, {}/{} dictionary failures",
                r.prime,
                r.seed,
                r.planes_tested,
                r.roundtrip_failures,
                r.membership_failures,
                r.dict_failures,
                r.dict_checks
            );
        }
    }
    Ok(if failures == 0 { 0 } else { 1 })
}

fn cmd_strata(args: &StrataArgs) -> Result<i32> {
    let comp = component_of(args.p)?;
    let e = make_polarization(args.d, args.g as i64, args.y);
    let (a, d_seq) = match &args.ram {
        Some(s) => parse_ram(s)?,
        None => (Vec::new(), Vec::new()),
    };
    if args.count {
        let p = *args.primes.first().ok_or_else(|| {
            Error::OutOfRange("need at least one prime".into())
        })?;
        let seed = args.seeds.first().copied().unwrap_or(0);
        let x = random_curve(args.g, p, seed)?;
        let rows = strata_counts(&x, args.d, &e, comp, args.r, &d_seq, &a, args.budget)?;
        if args.json {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|((j, dd), n)| {
                    serde_json::json!({
                        "freed_nodes": j.iter().collect::<Vec<usize>>(),
                        "d1": dd.d1,
                        "d2": dd.d2,
                        "count": n.to_string(),
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::json!({
                    "schema_version": 1,
                    "polarization": format!("{e}"),
                    "prime": p,
                    "seed": seed,
                    "strata": items,
                })
            );
        } else {
            println!("polarization E = {e}, q = {p}, seed = {seed}");
            println!("{:<12} {:>4} {:>4} {:>12}", "J", "d1", "d2", "N(q)");
            for ((j, dd), n) in &rows {
                println!("{:<12} {:>4} {:>4} {:>12}", format!("{j}"), dd.d1, dd.d2, n);
            }
        }
    } else {
        let strata = crate::curvemodel::quasistable_strata(args.d, args.g, &e, comp);
        if args.json {
            let items: Vec<serde_json::Value> = strata
                .iter()
                .map(|(j, dd)| {
                    serde_json::json!({
                        "freed_nodes": j.iter().collect::<Vec<usize>>(),
                        "d1": dd.d1,
                        "d2": dd.d2,
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::json!({
                    "schema_version": 1,
                    "polarization": format!("{e}"),
                    "strata": items,
                })
            );
        } else {
            println!("polarization E = {e}");
            println!("{:<12} {:>4} {:>4}", "J", "d1", "d2");
            for (j, dd) in &strata {
                println!("{:<12} {:>4} {:>4}", format!("{j}"), dd.d1, dd.d2);
            }
        }
    }
    Ok(0)
}

fn cmd_counterexample(args: &CounterexampleArgs) -> Result<i32> {
    let dd = parse_dd(&args.dd)?;
    let (a, d_seq) = match &args.ram {
        Some(s) => parse_ram(s)?,
        None => (Vec::new(), Vec::new()),
    };
    let kind = match args.kind {
        Some(CliKind::ExcessDim) => CounterexampleKind::ExcessDimension,
        Some(CliKind::NegativeRho) => CounterexampleKind::NegativeExpectedDimension,
        None => {
            if a.is_empty() {
                CounterexampleKind::ExcessDimension
            } else {
                CounterexampleKind::NegativeExpectedDimension
            }
        }
    };
    let query = CensusQuery {
        g: args.g,
        dd,
        r: args.r,
        d_seq,
        a,
        mode: CountMode::AtLeast,
        primes: args.primes.clone(),
        seeds: args.seeds.clone(),
        budget: args.budget,
    };
    let report = counterexample_report(kind, &query)?;
    if args.json || args.out.is_some() {
        let body = serde_json::to_string_pretty(&report)?;
        write_or_print(args.out.as_ref(), ".json", &body)?;
    } else {
        println!("kind: {:?}", report.kind);
        println!("rho = {}", report.rho);
        if let Some(p) = report.predicted_dim {
            println!("predicted dimension = {p}");
        }
        if let Some(m) = report.measured_dim {
            println!("measured dimension  = {m}");
        }
        println!("inequality holds: {}", report.inequality_holds);
    }
    Ok(if report.inequality_holds { 0 } else { 1 })
}

/// Run a parsed command; the returned code is the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Rho(a) => cmd_rho(a),
        Command::Census(a) => cmd_census(a),
        Command::Crosscheck(a) => cmd_crosscheck(a),
        Command::Strata(a) => cmd_strata(a),
        Command::Counterexample(a) => cmd_counterexample(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => 3,
                Error::TooManyDiscards { .. } => 1,
                _ => 2,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_dd_cases() {
        assert_eq!(parse_dd("3,-2").unwrap(), MultiDegree::new(3, -2));
        assert_eq!(parse_dd(" 1 , 0 ").unwrap(), MultiDegree::new(1, 0));
        assert!(parse_dd("3").is_err());
        assert!(parse_dd("a,b").is_err());
    }

    #[test]
    fn parse_ram_cases() {
        let (a, d) = parse_ram("0,2@(0,0);(2,0)").unwrap();
        assert_eq!(a, vec![0, 2]);
        assert_eq!(d, vec![DivisorStep::new(0, 0), DivisorStep::new(2, 0)]);
        let (a, d) = parse_ram("3@(0,3)").unwrap();
        assert_eq!(a, vec![3]);
        assert_eq!(d, vec![DivisorStep::new(0, 3)]);
        assert!(parse_ram("0,2").is_err());
        assert!(parse_ram("0,2@(0,0);(2").is_err());
    }

    #[test]
    fn rho_command_examples() {
        let args = RhoArgs {
            g: 2,
            r: 0,
            d: 1,
            ram: None,
            json: false,
        };
        assert_eq!(cmd_rho(&args).unwrap(), 0);
        let args = RhoArgs {
            g: 0,
            r: 1,
            d: 4,
            ram: Some("0,2@(0,0);(2,0)".into()),
            json: true,
        };
        assert_eq!(cmd_rho(&args).unwrap(), 0);
        // inadmissible ramification: repeated value without room
        let args = RhoArgs {
            g: 0,
            r: 2,
            d: 4,
            ram: Some("0,1,1@(1,0);(2,0)".into()),
            json: false,
        };
        assert!(cmd_rho(&args).is_err());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from([
            "bncensus", "census", "--g", "2", "--dd", "3,-2", "--r", "0", "--primes", "5,7",
            "--seeds", "0", "--expect-counterexample",
        ])
        .unwrap();
        match cli.command {
            Command::Census(ref a) => {
                assert_eq!(a.primes, vec![5, 7]);
                assert!(a.expect_counterexample);
            }
            _ => panic!("wrong command"),
        }
    }
}
