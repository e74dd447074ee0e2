//! `mulsynth`: generate, verify and count gate-level multipliers.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 invalid input or
//! flags, 3 internal invariant violation.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mulsynth_core::bounds::{self, bounds_report, recurrence_l_table};
use mulsynth_core::karatsuba::predict_overhead;
use mulsynth_core::school::predict_school_count;
use mulsynth_core::synth::{check_profile, predict_count};
use mulsynth_core::verify::{selftest, EXHAUSTIVE_MAX_BITS};
use mulsynth_core::{
    exhaustive_equivalence, export_text, import_text, random_equivalence, synthesize, BlockCensus, BlockKind,
    KaratsubaOptions, Method, Netlist, SynthError, Synthesis,
};

/// Widths verified exhaustively when no mode is requested.
const DEFAULT_EXHAUSTIVE_BITS: usize = 8;
const DEFAULT_TRIALS: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;
/// Largest `m` tabulated for the `table` column of `bounds`.
const BOUNDS_TABLE_LIMIT: usize = (1 << 22) + 2;

#[derive(Parser)]
#[command(name = "mulsynth", version, about = "Gate-level multiplier synthesis and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a multiplier and write it as a MULNET v1 netlist.
    Gen(GenArgs),
    /// Check a netlist file against the big-integer oracle.
    Verify(VerifyArgs),
    /// Build a multiplier and compare its gate count with the predicted bound.
    Count(CountArgs),
    /// Print the complexity table L(1..max).
    Table(TableArgs),
    /// Compare the closed form, matrix recursion, table and legacy bounds.
    Bounds(BoundsArgs),
    /// Run the built-in block, adder and construction checks.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    School,
    Karatsuba,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct BuildArgs {
    /// Operand width m.
    #[arg(long)]
    bits: usize,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Allow Karatsuba at widths where the school method is cheaper.
    #[arg(long)]
    force: bool,
    /// Disable XOR/ANDNOT sharing in the final adder-subtractor.
    #[arg(long)]
    no_sharing: bool,
}

impl BuildArgs {
    fn options(&self) -> KaratsubaOptions {
        KaratsubaOptions { force: self.force, sharing: !self.no_sharing }
    }

    fn method(&self) -> Option<Method> {
        match self.method {
            MethodArg::Auto => None,
            MethodArg::School => Some(Method::School),
            MethodArg::Karatsuba => Some(Method::Karatsuba),
        }
    }

    fn build(&self) -> Result<Synthesis, Failure> {
        if self.bits == 0 {
            return Err(Failure::Input("--bits must be at least 1".into()));
        }
        if self.force && self.method != MethodArg::Karatsuba {
            return Err(Failure::Input("--force only applies to --method karatsuba".into()));
        }
        let mut s = synthesize(self.bits, self.method(), self.options())?;
        if let Some(Fault::Profile) = fault_from_env()? {
            if let Some(level) = s.profiles.last_mut() {
                level.plus[0] += 1;
            }
        }
        for level in &s.profiles {
            check_profile(level)?;
        }
        Ok(s)
    }
}

/// Fault injection for the exit-code contract, read from `MULSYNTH_FAULT`.
/// A block token plants a stray gate in that block during `selftest`;
/// `PROFILE` perturbs a recorded column height before `gen` and `count`
/// re-check it.
enum Fault {
    Block(BlockKind),
    Profile,
}

fn fault_from_env() -> Result<Option<Fault>, Failure> {
    match std::env::var("MULSYNTH_FAULT") {
        Ok(token) if token == "PROFILE" => Ok(Some(Fault::Profile)),
        Ok(token) if !token.is_empty() => BlockKind::from_token(&token)
            .map(|k| Some(Fault::Block(k)))
            .ok_or_else(|| Failure::Input(format!("MULSYNTH_FAULT names no block: `{token}`"))),
        _ => Ok(None),
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// Output file; the netlist goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Netlist file in MULNET v1 format.
    file: PathBuf,
    /// Operand width; inferred from the input count when omitted.
    #[arg(long)]
    bits: Option<usize>,
    /// Check every operand pair.
    #[arg(long, conflicts_with_all = ["trials", "seed"])]
    exhaustive: bool,
    /// Random trials on top of the corner vectors.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    build: BuildArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 18)]
    max: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 20)]
    kmax: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Input(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        if e.is_invariant() {
            Failure::Invariant(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Invariant(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a, &mut out),
        Command::Verify(a) => cmd_verify(&a, &mut out),
        Command::Count(a) => cmd_count(&a, &mut out),
        Command::Table(a) => cmd_table(&a, &mut out),
        Command::Bounds(a) => cmd_bounds(&a, &mut out),
        Command::Selftest(a) => cmd_selftest(&a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn reject_format(format: Format, allowed: &[Format], command: &str) -> Result<(), Failure> {
    if allowed.contains(&format) {
        return Ok(());
    }
    let names: Vec<String> = allowed
        .iter()
        .filter_map(|f| f.to_possible_value())
        .map(|v| v.get_name().to_string())
        .collect();
    Err(Failure::Input(format!("{command} supports --format {}", names.join("|"))))
}

#[derive(Serialize)]
struct GenSummary<'a> {
    bits: usize,
    method: Method,
    trace: &'a str,
    gates: usize,
    blocks: &'a BTreeMap<BlockKind, usize>,
    conversion_xors: usize,
}

fn cmd_gen(a: &GenArgs, out: &mut impl Write) -> Result<(), Failure> {
    reject_format(a.format, &[Format::Text, Format::Json], "gen")?;
    let s = a.build.build()?;
    let report = s.netlist.validate();
    if !report.is_valid() {
        return Err(Failure::Invariant(format!("generated netlist is invalid:\n{report}")));
    }
    let summary = match a.format {
        Format::Json => serde_json::to_string_pretty(&GenSummary {
            bits: s.bits,
            method: s.method,
            trace: &s.trace,
            gates: s.gate_count(),
            blocks: &s.census.blocks,
            conversion_xors: s.census.conversion_xors,
        })?,
        _ => format!(
            "gates: {}\nmethod: {}\ntrace: {}\ncensus: {} conversion XOR={}",
            s.gate_count(),
            s.method,
            s.trace,
            s.census.summary(),
            s.census.conversion_xors
        ),
    };
    let text = export_text(&s.netlist);
    match &a.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            writeln!(out, "{summary}")?;
        }
        None => {
            out.write_all(text.as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn load_netlist(path: &PathBuf) -> Result<Netlist, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    import_text(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn cmd_verify(a: &VerifyArgs, out: &mut impl Write) -> Result<(), Failure> {
    reject_format(a.format, &[Format::Text, Format::Json], "verify")?;
    let net = load_netlist(&a.file)?;
    let bits = match a.bits {
        Some(b) => b,
        None if net.num_inputs() % 2 == 0 && net.num_inputs() > 0 => net.num_inputs() / 2,
        None => {
            return Err(Failure::Input(format!(
                "cannot infer --bits from {} inputs",
                net.num_inputs()
            )))
        }
    };
    if a.exhaustive && bits > EXHAUSTIVE_MAX_BITS {
        return Err(Failure::Input(format!(
            "--exhaustive supports at most {EXHAUSTIVE_MAX_BITS} bits, got {bits}"
        )));
    }
    let random = a.trials.is_some() || a.seed.is_some();
    let verdict = if a.exhaustive || (!random && bits <= DEFAULT_EXHAUSTIVE_BITS) {
        exhaustive_equivalence(&net, bits)?
    } else {
        random_equivalence(&net, bits, a.trials.unwrap_or(DEFAULT_TRIALS), a.seed.unwrap_or(DEFAULT_SEED))?
    };
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&verdict)?)?,
        _ => writeln!(out, "{verdict}")?,
    }
    if verdict.passed() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{} is not a {bits}-bit multiplier", a.file.display())))
    }
}

#[derive(Serialize)]
struct CountReport<'a> {
    bits: usize,
    method: Method,
    gates: usize,
    by_kind: BTreeMap<&'static str, usize>,
    blocks: &'a BTreeMap<BlockKind, usize>,
    conversion_xors: usize,
    bound: usize,
    meets_bound: bool,
}

/// The predicted count and a human-readable derivation of it.
fn predicted_bound(s: &Synthesis, sharing: bool) -> (usize, String) {
    let m = s.bits;
    match s.method {
        Method::School => {
            let bound = predict_school_count(m);
            (bound, format!("school formula M({m}) = {bound}"))
        }
        Method::Karatsuba => {
            let n = m.div_ceil(2);
            let subs = [n + 1, m - n, n].map(|w| predict_count(w, sharing));
            let overhead = predict_overhead(m, sharing);
            let bound = subs.iter().sum::<usize>() + overhead;
            let note = format!(
                "recurrence L({}) + L({}) + L({}) + overhead = {} + {} + {} + {overhead} = {bound}",
                n + 1,
                m - n,
                n,
                subs[0],
                subs[1],
                subs[2]
            );
            (bound, note)
        }
    }
}

fn cmd_count(a: &CountArgs, out: &mut impl Write) -> Result<(), Failure> {
    reject_format(a.format, &[Format::Text, Format::Json], "count")?;
    let s = a.build.build()?;
    let sharing = !a.build.no_sharing;
    let (bound, derivation) = predicted_bound(&s, sharing);
    let gates = s.gate_count();
    let by_kind = s.netlist.histogram().into_iter().map(|(k, c)| (k.token(), c)).collect();
    match a.format {
        Format::Json => {
            let report = CountReport {
                bits: s.bits,
                method: s.method,
                gates,
                by_kind,
                blocks: &s.census.blocks,
                conversion_xors: s.census.conversion_xors,
                bound,
                meets_bound: gates == bound,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        _ => write_count_text(out, &s, &by_kind, &s.census, bound, &derivation)?,
    }
    if gates != bound {
        return Err(Failure::Invariant(format!("{gates} gates built, bound predicts {bound}")));
    }
    Ok(())
}

fn write_count_text(
    out: &mut impl Write,
    s: &Synthesis,
    by_kind: &BTreeMap<&'static str, usize>,
    census: &BlockCensus,
    bound: usize,
    derivation: &str,
) -> io::Result<()> {
    let kinds: Vec<String> = by_kind.iter().map(|(k, c)| format!("{k}={c}")).collect();
    writeln!(out, "bits: {}", s.bits)?;
    writeln!(out, "method: {}", s.method)?;
    writeln!(out, "trace: {}", s.trace)?;
    writeln!(out, "total: {}", s.gate_count())?;
    writeln!(out, "by kind: {}", kinds.join(" "))?;
    writeln!(out, "blocks: {}", census.summary())?;
    writeln!(out, "conversion XOR={}", census.conversion_xors)?;
    if census.shared_savings > 0 {
        writeln!(out, "shared savings: {}", census.shared_savings)?;
    }
    writeln!(out, "bound: {bound} ({derivation})")?;
    writeln!(out, "equal={}", s.gate_count() == bound)
}

fn cmd_table(a: &TableArgs, out: &mut impl Write) -> Result<(), Failure> {
    if a.max == 0 {
        return Err(Failure::Input("--max must be at least 1".into()));
    }
    let table = recurrence_l_table(a.max);
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(table.rows())?)?,
        Format::Csv => {
            writeln!(out, "m,L,method")?;
            for r in table.rows() {
                writeln!(out, "{},{},{}", r.m, r.l, r.method)?;
            }
        }
        Format::Text => {
            writeln!(out, "{:>6} {:>12}  method", "m", "L(m)")?;
            for r in table.rows() {
                writeln!(out, "{:>6} {:>12}  {}", r.m, r.l, r.method)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsLine {
    #[serde(flatten)]
    row: bounds::BoundsRow,
    improvement: String,
}

fn cmd_bounds(a: &BoundsArgs, out: &mut impl Write) -> Result<(), Failure> {
    if a.kmax < 4 {
        return Err(Failure::Input(format!("--kmax must be at least 4, got {}", a.kmax)));
    }
    let rows = bounds_report(a.kmax, BOUNDS_TABLE_LIMIT)?;
    let lines: Vec<BoundsLine> = rows
        .into_iter()
        .map(|row| {
            let improvement = improvement(&row.legacy, &row.closed);
            BoundsLine { row, improvement }
        })
        .collect();
    let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
    let opt_flag = |v: Option<bool>| v.map_or("-".to_string(), |b| b.to_string());
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&lines)?)?,
        Format::Csv => {
            writeln!(out, "k,closed,matrix,table,legacy,improvement,closed_eq_matrix,table_eq_matrix")?;
            for l in &lines {
                let r = &l.row;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.k,
                    r.closed,
                    r.matrix,
                    opt(&r.table),
                    r.legacy,
                    l.improvement,
                    r.closed_eq_matrix,
                    opt_flag(r.table_eq_matrix)
                )?;
            }
        }
        Format::Text => {
            for l in &lines {
                let r = &l.row;
                writeln!(
                    out,
                    "k={} closed={} matrix={} table={} equal={} table_equal={} legacy={} improvement={}",
                    r.k,
                    r.closed,
                    r.matrix,
                    opt(&r.table),
                    r.closed_eq_matrix,
                    opt_flag(r.table_eq_matrix),
                    r.legacy,
                    l.improvement
                )?;
            }
        }
    }
    let bad: Vec<u32> = lines
        .iter()
        .filter(|l| !l.row.closed_eq_matrix || l.row.table_eq_matrix == Some(false))
        .map(|l| l.row.k)
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("bounds disagree at k = {bad:?}")))
    }
}

fn improvement(legacy: &str, closed: &str) -> String {
    match (legacy.parse::<num_bigint::BigInt>(), closed.parse::<num_bigint::BigInt>()) {
        (Ok(l), Ok(c)) => (l - c).to_string(),
        _ => "-".into(),
    }
}

fn cmd_selftest(a: &SelftestArgs, out: &mut impl Write) -> Result<(), Failure> {
    reject_format(a.format, &[Format::Text, Format::Json], "selftest")?;
    let fault = match fault_from_env()? {
        Some(Fault::Block(kind)) => Some(kind),
        Some(Fault::Profile) => return Err(Failure::Input("MULSYNTH_FAULT=PROFILE applies to gen and count".into())),
        None => None,
    };
    let report = selftest(fault);
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        _ => {
            for s in &report.suites {
                writeln!(out, "{s}")?;
            }
            let passed = report.suites.iter().filter(|s| s.passed).count();
            writeln!(out, "selftest: {passed}/{} suites passed", report.suites.len())?;
        }
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
        Err(Failure::Mismatch(format!("failing suites: {}", failed.join(", "))))
    }
}
