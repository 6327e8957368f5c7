//! `dispset`: validate, enumerate, compare, generate, and time phylogenetic
//! networks from the command line.
//!
//! Exit codes are a stable scripting contract: 0 = yes/ok, 1 = no/inequivalent,
//! 2 = usage or parse error, 3 = precondition violation, 4 = internal
//! disagreement between the fast decision and the brute-force oracle.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dispset_core::{
    display_sets_equal_bruteforce, enumerate_display_set, fit_loglog_exponent, is_normal,
    is_tree_child, measure_scaling, parse_arclist, parse_enewick, random_network,
    same_display_set, serialize_enewick, GenError, GenSpec, Network, ParseError,
    DEFAULT_MAX_RETICULATIONS,
};

#[derive(Parser)]
#[command(name = "dispset", version, about = "Display sets of phylogenetic networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network file against the model axioms and classify it.
    Validate(ValidateArgs),
    /// Enumerate every displayed tree by brute force, sorted.
    DisplaySet(DisplaySetArgs),
    /// Decide whether two networks display the same set of trees.
    Equiv(EquivArgs),
    /// Generate a seeded random network.
    Gen(GenArgs),
    /// Time the decision on generated equivalent pairs of growing size.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Enewick,
    Arclist,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Class {
    Normal,
    TreeChild,
}

#[derive(Args)]
struct ValidateArgs {
    /// Network file.
    file: PathBuf,
    /// Input format; default is by extension (.arcs/.tsv as arc list,
    /// anything else as extended Newick).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct DisplaySetArgs {
    /// Network file.
    file: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Refuse networks with more reticulations than this; overrides the
    /// DISPSET_MAX_RET environment variable (default 20).
    #[arg(long)]
    max_ret: Option<usize>,
}

#[derive(Args)]
struct EquivArgs {
    /// The normal network.
    first: PathBuf,
    /// The tree-child network.
    second: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Decide by brute-force enumeration instead of the fast reduction.
    #[arg(long, conflicts_with_all = ["trace", "json", "both_oracle_check"])]
    oracle: bool,
    /// Print one line per reduction step.
    #[arg(long)]
    trace: bool,
    /// Print the full decision as JSON instead of key=value lines.
    #[arg(long)]
    json: bool,
    /// Run both the fast reduction and the oracle; disagreement is a bug,
    /// reported with a reproducer dump and exit code 4.
    #[arg(long)]
    both_oracle_check: bool,
    /// Reticulation bound for the oracle runs (see display-set).
    #[arg(long)]
    max_ret: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    /// Number of leaves (at least 2).
    #[arg(short = 'n', long)]
    leaves: usize,
    /// Number of reticulations.
    #[arg(short = 'r', long, default_value_t = 0)]
    reticulations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Class::Normal)]
    class: Class,
}

#[derive(Args)]
struct BenchArgs {
    /// Strictly increasing leaf counts, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Timed repetitions per size; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    reps: usize,
}

/// A failed run: the message goes to stderr, the code becomes the exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn precondition(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }
}

fn detect_format(path: &Path) -> Format {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("arcs") | Some("tsv") => Format::Arclist,
        _ => Format::Enewick,
    }
}

fn parse_file(path: &Path, format: Option<Format>) -> Result<Result<Network, ParseError>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(match format.unwrap_or_else(|| detect_format(path)) {
        Format::Enewick => parse_enewick(&text),
        Format::Arclist => parse_arclist(&text),
    })
}

/// Reads and parses one input. Structural violations are precondition
/// failures (exit 3); anything else wrong with the file is a usage error.
fn read_network(path: &Path, format: Option<Format>) -> Result<Network, Failure> {
    parse_file(path, format)?.map_err(|e| match e {
        ParseError::Validation(_) => Failure::precondition(format!("{}: {e}", path.display())),
        other => Failure::usage(format!("{}: {other}", path.display())),
    })
}

/// The oracle bound: flag, then DISPSET_MAX_RET, then the built-in default.
fn resolve_max_ret(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(k) = flag {
        return Ok(k);
    }
    match std::env::var("DISPSET_MAX_RET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("DISPSET_MAX_RET must be a number, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_RETICULATIONS),
        Err(e) => Err(Failure::usage(format!("DISPSET_MAX_RET: {e}"))),
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8, Failure> {
    let net = match parse_file(&args.file, args.format)? {
        Ok(net) => net,
        Err(ParseError::Validation(report)) => {
            println!("valid=false");
            for v in &report.violations {
                println!("violation={v}");
            }
            return Ok(3);
        }
        Err(e) => return Err(Failure::usage(format!("{}: {e}", args.file.display()))),
    };
    println!("valid=true");
    println!("tree_child={}", is_tree_child(&net));
    println!("normal={}", is_normal(&net));
    println!("leaves={}", net.leaf_count());
    println!("reticulations={}", net.reticulation_count());
    Ok(0)
}

fn cmd_display_set(args: &DisplaySetArgs) -> Result<u8, Failure> {
    let net = read_network(&args.file, args.format)?;
    let bound = resolve_max_ret(args.max_ret)?;
    let set = enumerate_display_set(&net, bound)
        .map_err(|e| Failure::precondition(e.to_string()))?;
    for tree in &set {
        println!("{tree}");
    }
    println!("count={}", set.len());
    Ok(0)
}

fn cmd_equiv(args: &EquivArgs) -> Result<u8, Failure> {
    let first = read_network(&args.first, args.format)?;
    let second = read_network(&args.second, args.format)?;

    if args.oracle {
        let bound = resolve_max_ret(args.max_ret)?;
        let equal = display_sets_equal_bruteforce(&first, &second, bound)
            .map_err(|e| Failure::precondition(e.to_string()))?;
        println!("verdict={}", if equal { "YES" } else { "NO" });
        return Ok(u8::from(!equal));
    }

    let decision =
        same_display_set(&first, &second).map_err(|e| Failure::precondition(e.to_string()))?;

    if args.both_oracle_check {
        let bound = resolve_max_ret(args.max_ret)?;
        let equal = display_sets_equal_bruteforce(&first, &second, bound)
            .map_err(|e| Failure::precondition(e.to_string()))?;
        if equal != decision.equivalent {
            // A reproducer in canonical form, so the bug report is
            // independent of the original files.
            return Err(Failure {
                code: 4,
                message: format!(
                    "fast decision ({}) disagrees with the oracle ({}); reproducer:\n{}\n{}",
                    decision.equivalent,
                    equal,
                    serialize_enewick(&first),
                    serialize_enewick(&second),
                ),
            });
        }
    }

    if args.json {
        let rendered = serde_json::to_string_pretty(&decision)
            .expect("decisions serialize without fallible types");
        println!("{rendered}");
        return Ok(u8::from(!decision.equivalent));
    }

    println!("verdict={}", if decision.equivalent { "YES" } else { "NO" });
    if let Some(reason) = &decision.reason {
        println!("reason={reason}");
    }
    println!("iterations={}", decision.trace.len());
    println!("removed_trivial_shortcuts={}", decision.removed_trivial_shortcuts);
    if args.both_oracle_check {
        println!("oracle_agrees=true");
    }
    if args.trace {
        for record in &decision.trace {
            println!("{record}");
        }
    }
    Ok(u8::from(!decision.equivalent))
}

fn cmd_gen(args: &GenArgs) -> Result<u8, Failure> {
    let spec = match args.class {
        Class::Normal => GenSpec::normal(args.leaves, args.reticulations, args.seed),
        Class::TreeChild => GenSpec::tree_child(args.leaves, args.reticulations, args.seed),
    };
    let net = random_network(spec).map_err(|e| match e {
        GenError::InvalidSpec => Failure::usage(e.to_string()),
        _ => Failure::precondition(e.to_string()),
    })?;
    println!("{}", serialize_enewick(&net));
    Ok(0)
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, Failure> {
    if !args.sizes.windows(2).all(|w| w[0] < w[1]) {
        return Err(Failure::usage("sizes must be strictly increasing"));
    }
    if args.sizes.iter().any(|&n| n < 3) {
        return Err(Failure::usage("each size needs at least 3 leaves"));
    }
    if args.reps == 0 {
        return Err(Failure::usage("reps must be at least 1"));
    }
    let points = measure_scaling(&args.sizes, args.seed, args.reps);
    for p in &points {
        println!("n={} ms={:.3}", p.n_leaves, p.millis);
    }
    if let Some(exponent) = fit_loglog_exponent(&points) {
        println!("exponent={exponent:.3}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match &cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::DisplaySet(args) => cmd_display_set(args),
        Command::Equiv(args) => cmd_equiv(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match run {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
