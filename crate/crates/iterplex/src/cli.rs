//! The `iterplex` command-line front end.
//!
//! Subcommands map one-to-one onto the library: `validate` (table
//! ingestion), `oracle …` (backtracking counts), `chain …` (signature-chain
//! recurrences), `constant` (limit constants), and `summary` (chain counts
//! against the closed forms for the four smallest groups).
//!
//! Every command is deterministic: the same inputs produce byte-identical
//! output. Counts are printed as decimal strings, exact rationals as
//! `p/q`. Exit codes: 0 success, 1 invalid input, 2 feasibility or size cap,
//! 3 lumpability failure, 4 all-ones state unreachable (no constant exists).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{builtin_table, CayleyTable, TableError};
use crate::chain::{self, ChainError, ChainLimits, Subsequence, TransitionMatrix};
use crate::oracle::{self, EnumerationMode, Feasibility, OracleError};
use crate::reference::{self, SmallGroup};
use crate::spectral::{self, SpectralError};

/// Parse the command line, dispatch, and map errors to exit codes.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Table(_) | CliError::Io { .. } => 1,
            CliError::Oracle(OracleError::FeasibilityExceeded { .. }) => 2,
            CliError::Oracle(_) => 1,
            CliError::Chain(err) => chain_exit_code(err),
            CliError::Spectral(SpectralError::Chain(err)) => chain_exit_code(err),
            CliError::Spectral(SpectralError::MixedParity) => 4,
            CliError::Spectral(_) => 1,
        }
    }
}

fn chain_exit_code(err: &ChainError) -> u8 {
    match err {
        ChainError::StateSpaceTooLarge { .. } => 2,
        ChainError::NotLumpable { .. } => 3,
        ChainError::EUnreachable => 4,
        _ => 1,
    }
}

#[derive(Parser)]
#[command(
    name = "iterplex",
    version,
    about = "Exact transversal, plex, and multiplex counts for iterated quasigroups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a table file encodes a quasigroup.
    Validate(ValidateArgs),
    /// Exhaustive backtracking counts and classifications.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Signature-chain matrices and recurrences.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Limit constant of the normalized all-ones counts.
    Constant(ConstantArgs),
    /// Chain counts versus closed forms for the four smallest groups.
    Summary(SummaryArgs),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Count transversals of the depth-d iterated table.
    Transversals(TransversalsArgs),
    /// Count k-plexes or k-multiplexes of the D-dimensional table.
    Multiplexes(MultiplexesArgs),
    /// Count partial k-multiplexes of a given length.
    Partial(PartialArgs),
    /// Enumerate multiplexes and tally their classifications.
    Classify(ClassifyArgs),
}

#[derive(Subcommand)]
enum ChainCommand {
    /// Build (or load from cache) the step matrix and print it.
    Matrix(MatrixArgs),
    /// Run the count recurrence to a depth and print the derived counts.
    Count(CountArgs),
    /// Exact convergence diagnostics for every depth up to a bound.
    Sequence(SequenceArgs),
    /// Check a partition file against the chain and print the quotients.
    VerifyLumping(VerifyLumpingArgs),
}

#[derive(Args)]
struct TableArg {
    /// Table source: a file path, or `builtin:cyclic:<n>`, `builtin:klein`,
    /// `builtin:product:<spec>x<spec>`.
    #[arg(long)]
    table: String,
}

impl TableArg {
    fn load(&self) -> Result<CayleyTable, CliError> {
        if self.table.starts_with("builtin:") {
            Ok(builtin_table(&self.table)?)
        } else {
            let text = fs::read_to_string(&self.table).map_err(|err| CliError::Io {
                path: self.table.clone(),
                source: err,
            })?;
            Ok(CayleyTable::parse(&text)?)
        }
    }
}

#[derive(Args)]
struct OracleCaps {
    /// Node budget for the backtracking search.
    #[arg(long = "max-nodes", default_value_t = 200_000_000)]
    max_nodes: u64,
    /// Largest table order the transversal counter admits.
    #[arg(long = "max-order", default_value_t = 6)]
    max_order: usize,
    /// Largest iteration depth the transversal counter admits.
    #[arg(long = "max-depth", default_value_t = 5)]
    max_depth: usize,
}

impl OracleCaps {
    fn feasibility(&self) -> Feasibility {
        Feasibility {
            max_nodes: u128::from(self.max_nodes),
            max_order: self.max_order,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Args)]
struct ChainCaps {
    /// Cap on the number of signature states.
    #[arg(long = "max-states", default_value_t = 5_000)]
    max_states: usize,
    /// Cap on build effort (states × admissible columns).
    #[arg(long = "max-build-work", default_value_t = 50_000_000)]
    max_build_work: u64,
    /// Cap on raw vector states in unlumped builds.
    #[arg(long = "max-vectors", default_value_t = 1_000_000)]
    max_vectors: u64,
}

impl ChainCaps {
    fn limits(&self) -> ChainLimits {
        ChainLimits {
            max_states: self.max_states,
            max_build_work: u128::from(self.max_build_work),
            max_vectors: u128::from(self.max_vectors),
        }
    }
}

#[derive(Args)]
struct CacheArg {
    /// Directory for cached step matrices; falls back to `QG_CACHE_DIR`.
    #[arg(long = "cache-dir")]
    cache_dir: Option<PathBuf>,
}

impl CacheArg {
    fn resolve(&self) -> Option<PathBuf> {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os("QG_CACHE_DIR").map(PathBuf::from))
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Json,
    Csv,
}

#[derive(Args)]
struct FormatArg {
    /// Output format.
    #[arg(long, value_enum, default_value = "plain")]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Distinct index vectors only: k-plexes.
    Sets,
    /// Repeated index vectors allowed: all k-multiplexes.
    Multisets,
}

impl ModeArg {
    fn label(self) -> &'static str {
        match self {
            ModeArg::Sets => "sets",
            ModeArg::Multisets => "multisets",
        }
    }
}

impl From<ModeArg> for EnumerationMode {
    fn from(mode: ModeArg) -> EnumerationMode {
        match mode {
            ModeArg::Sets => EnumerationMode::Sets,
            ModeArg::Multisets => EnumerationMode::Multisets,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// Table file to check.
    path: PathBuf,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct TransversalsArgs {
    #[command(flatten)]
    table: TableArg,
    /// Iteration depth d; the counted table is (d+1)-dimensional.
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    caps: OracleCaps,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct MultiplexesArgs {
    #[command(flatten)]
    table: TableArg,
    /// Hypercube dimension D.
    #[arg(long)]
    dim: usize,
    /// Indices per hyperplane.
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "multisets")]
    mode: ModeArg,
    /// Emit each multiplex as one JSON line (array of 1-based index vectors)
    /// instead of the count.
    #[arg(long)]
    stream: bool,
    #[command(flatten)]
    caps: OracleCaps,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct PartialArgs {
    #[command(flatten)]
    table: TableArg,
    /// Hypercube dimension D.
    #[arg(long)]
    dim: usize,
    /// Indices per covered hyperplane.
    #[arg(long)]
    k: usize,
    /// Number of covered hyperplanes per direction.
    #[arg(long)]
    l: usize,
    #[command(flatten)]
    caps: OracleCaps,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    table: TableArg,
    /// Hypercube dimension D.
    #[arg(long)]
    dim: usize,
    /// Indices per hyperplane.
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "multisets")]
    mode: ModeArg,
    #[command(flatten)]
    caps: OracleCaps,
    #[command(flatten)]
    format: FormatArg,
}

/// Shared selector for every chain-backed command: which table, which chain
/// (full or partial), which caps, which cache.
#[derive(Args)]
struct ChainSelector {
    #[command(flatten)]
    table: TableArg,
    /// Indices per hyperplane (the multiplex multiplicity).
    #[arg(long)]
    k: usize,
    /// Column length for partial chains; omit for full columns.
    #[arg(long)]
    l: Option<usize>,
    #[command(flatten)]
    caps: ChainCaps,
    #[command(flatten)]
    cache: CacheArg,
}

impl ChainSelector {
    fn matrix(&self) -> Result<TransitionMatrix, CliError> {
        let table = self.table.load()?;
        let length = self.l.unwrap_or(table.order());
        let matrix = chain::cached_transition(
            &table,
            self.k,
            length,
            self.cache.resolve().as_deref(),
            &self.caps.limits(),
        )?;
        Ok(matrix)
    }
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    selector: ChainSelector,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    selector: ChainSelector,
    /// Iteration depth d.
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct SequenceArgs {
    #[command(flatten)]
    selector: ChainSelector,
    /// Largest depth to report.
    #[arg(long = "d-max")]
    d_max: usize,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyLumpingArgs {
    #[command(flatten)]
    selector: ChainSelector,
    /// Partition file: a JSON list of blocks, each either a list of
    /// signature arrays or `{"label": …, "states": […]}`.
    #[arg(long)]
    classes: PathBuf,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct ConstantArgs {
    #[command(flatten)]
    selector: ChainSelector,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct SummaryArgs {
    /// Largest depth to tabulate.
    #[arg(long = "d-max", default_value_t = 12)]
    d_max: usize,
    #[command(flatten)]
    caps: ChainCaps,
    #[command(flatten)]
    format: FormatArg,
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate(args) => cmd_validate(args),
        Command::Oracle(OracleCommand::Transversals(args)) => cmd_oracle_transversals(args),
        Command::Oracle(OracleCommand::Multiplexes(args)) => cmd_oracle_multiplexes(args),
        Command::Oracle(OracleCommand::Partial(args)) => cmd_oracle_partial(args),
        Command::Oracle(OracleCommand::Classify(args)) => cmd_oracle_classify(args),
        Command::Chain(ChainCommand::Matrix(args)) => cmd_chain_matrix(args),
        Command::Chain(ChainCommand::Count(args)) => cmd_chain_count(args),
        Command::Chain(ChainCommand::Sequence(args)) => cmd_chain_sequence(args),
        Command::Chain(ChainCommand::VerifyLumping(args)) => cmd_chain_verify_lumping(args),
        Command::Constant(args) => cmd_constant(args),
        Command::Summary(args) => cmd_summary(args),
    }
}

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("reports always serialize");
    println!("{text}");
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn print_csv(header: &[&str], rows: &[Vec<String>]) {
    let mut out = String::new();
    let head: Vec<String> = header.iter().map(|h| csv_escape(h)).collect();
    out.push_str(&head.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|f| csv_escape(f)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    print!("{out}");
}

fn format_signature(signature: &[u32]) -> String {
    let cells: Vec<String> = signature.iter().map(|c| c.to_string()).collect();
    format!("({})", cells.join(","))
}

#[derive(Serialize)]
struct ValidateReport {
    valid: bool,
    order: usize,
    fingerprint: String,
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let path = args.path.display().to_string();
    let text = fs::read_to_string(&args.path).map_err(|err| CliError::Io {
        path: path.clone(),
        source: err,
    })?;
    let table = CayleyTable::parse(&text)?;
    let report = ValidateReport {
        valid: true,
        order: table.order(),
        fingerprint: table.fingerprint(),
    };
    match args.format.format {
        Format::Plain => {
            println!("valid quasigroup, order {}", report.order);
            println!("fingerprint {}", report.fingerprint);
        }
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &["valid", "order", "fingerprint"],
            &[vec![
                report.valid.to_string(),
                report.order.to_string(),
                report.fingerprint.clone(),
            ]],
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct TransversalsReport {
    fingerprint: String,
    d: usize,
    dimension: usize,
    count: String,
}

fn cmd_oracle_transversals(args: TransversalsArgs) -> Result<(), CliError> {
    let table = args.table.load()?;
    let count = oracle::count_transversals(&table, args.d, &args.caps.feasibility())?;
    let report = TransversalsReport {
        fingerprint: table.fingerprint(),
        d: args.d,
        dimension: args.d + 1,
        count: count.to_string(),
    };
    match args.format.format {
        Format::Plain => println!("{}", report.count),
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &["fingerprint", "d", "dimension", "count"],
            &[vec![
                report.fingerprint.clone(),
                report.d.to_string(),
                report.dimension.to_string(),
                report.count.clone(),
            ]],
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct MultiplexesReport {
    fingerprint: String,
    dimension: usize,
    k: usize,
    mode: &'static str,
    count: String,
}

fn cmd_oracle_multiplexes(args: MultiplexesArgs) -> Result<(), CliError> {
    let table = args.table.load()?;
    let feasibility = args.caps.feasibility();
    if args.stream {
        let stdout = io::stdout();
        let mut out = stdout.lock();
        oracle::enumerate_multiplexes(
            &table,
            args.dim,
            args.k,
            args.mode.into(),
            &feasibility,
            |multiplex| {
                let line = serde_json::to_string(&multiplex.to_index_arrays())
                    .expect("index arrays always serialize");
                writeln!(out, "{line}").expect("stdout write");
            },
        )?;
        return Ok(());
    }
    let count =
        oracle::count_multiplexes(&table, args.dim, args.k, args.mode.into(), &feasibility)?;
    let report = MultiplexesReport {
        fingerprint: table.fingerprint(),
        dimension: args.dim,
        k: args.k,
        mode: args.mode.label(),
        count: count.to_string(),
    };
    match args.format.format {
        Format::Plain => println!("{}", report.count),
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &["fingerprint", "dimension", "k", "mode", "count"],
            &[vec![
                report.fingerprint.clone(),
                report.dimension.to_string(),
                report.k.to_string(),
                report.mode.to_string(),
                report.count.clone(),
            ]],
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct PartialReport {
    fingerprint: String,
    dimension: usize,
    k: usize,
    l: usize,
    count: String,
}

fn cmd_oracle_partial(args: PartialArgs) -> Result<(), CliError> {
    let table = args.table.load()?;
    let count = oracle::count_partial_multiplexes(
        &table,
        args.dim,
        args.k,
        args.l,
        &args.caps.feasibility(),
    )?;
    let report = PartialReport {
        fingerprint: table.fingerprint(),
        dimension: args.dim,
        k: args.k,
        l: args.l,
        count: count.to_string(),
    };
    match args.format.format {
        Format::Plain => println!("{}", report.count),
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &["fingerprint", "dimension", "k", "l", "count"],
            &[vec![
                report.fingerprint.clone(),
                report.dimension.to_string(),
                report.k.to_string(),
                report.l.to_string(),
                report.count.clone(),
            ]],
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport {
    fingerprint: String,
    dimension: usize,
    k: usize,
    mode: &'static str,
    total: String,
    plex: String,
    #[serde(rename = "true")]
    true_multiplexes: String,
    divisible: String,
    indivisible: String,
    connected: String,
    disconnected: String,
}

fn cmd_oracle_classify(args: ClassifyArgs) -> Result<(), CliError> {
    let table = args.table.load()?;
    let mut total = 0u128;
    let mut plex = 0u128;
    let mut true_multiplexes = 0u128;
    let mut divisible = 0u128;
    let mut connected = 0u128;
    oracle::enumerate_multiplexes(
        &table,
        args.dim,
        args.k,
        args.mode.into(),
        &args.caps.feasibility(),
        |multiplex| {
            let class = oracle::classify_multiplex(&multiplex);
            total += 1;
            plex += u128::from(class.is_plex);
            true_multiplexes += u128::from(class.is_true);
            divisible += u128::from(class.divisible);
            connected += u128::from(class.connected);
        },
    )?;
    let report = ClassifyReport {
        fingerprint: table.fingerprint(),
        dimension: args.dim,
        k: args.k,
        mode: args.mode.label(),
        total: total.to_string(),
        plex: plex.to_string(),
        true_multiplexes: true_multiplexes.to_string(),
        divisible: divisible.to_string(),
        indivisible: (total - divisible).to_string(),
        connected: connected.to_string(),
        disconnected: (total - connected).to_string(),
    };
    match args.format.format {
        Format::Plain => {
            println!("total {}", report.total);
            println!("plex {}", report.plex);
            println!("true {}", report.true_multiplexes);
            println!("divisible {}", report.divisible);
            println!("indivisible {}", report.indivisible);
            println!("connected {}", report.connected);
            println!("disconnected {}", report.disconnected);
        }
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &["metric", "count"],
            &[
                vec!["total".into(), report.total.clone()],
                vec!["plex".into(), report.plex.clone()],
                vec!["true".into(), report.true_multiplexes.clone()],
                vec!["divisible".into(), report.divisible.clone()],
                vec!["indivisible".into(), report.indivisible.clone()],
                vec!["connected".into(), report.connected.clone()],
                vec!["disconnected".into(), report.disconnected.clone()],
            ],
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct MatrixReport {
    fingerprint: String,
    order: usize,
    k: usize,
    length: usize,
    lambda: String,
    states: Vec<Vec<u32>>,
    entries: Vec<Vec<String>>,
}

fn matrix_report(matrix: &TransitionMatrix) -> MatrixReport {
    let m = matrix.state_count();
    MatrixReport {
        fingerprint: matrix.fingerprint().to_string(),
        order: matrix.order(),
        k: matrix.k(),
        length: matrix.length(),
        lambda: matrix.lambda().to_string(),
        states: matrix.states().to_vec(),
        entries: (0..m)
            .map(|s| matrix.row(s).iter().map(|e| e.to_string()).collect())
            .collect(),
    }
}

fn cmd_chain_matrix(args: MatrixArgs) -> Result<(), CliError> {
    let matrix = args.selector.matrix()?;
    let report = matrix_report(&matrix);
    match args.format.format {
        Format::Plain => {
            println!(
                "order {} k {} length {} lambda {} states {}",
                report.order,
                report.k,
                report.length,
                report.lambda,
                report.states.len()
            );
            for (signature, row) in report.states.iter().zip(&report.entries) {
                println!("{} {}", format_signature(signature), row.join(" "));
            }
        }
        Format::Json => print_json(&report),
        Format::Csv => {
            let mut header = vec!["state".to_string()];
            header.extend(report.states.iter().map(|s| format_signature(s)));
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = report
                .states
                .iter()
                .zip(&report.entries)
                .map(|(signature, row)| {
                    let mut cells = vec![format_signature(signature)];
                    cells.extend(row.iter().cloned());
                    cells
                })
                .collect();
            print_csv(&header_refs, &rows);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CountReport {
    fingerprint: String,
    k: usize,
    length: usize,
    d: usize,
    tables: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    transversals: Option<String>,
}

fn cmd_chain_count(args: CountArgs) -> Result<(), CliError> {
    let matrix = args.selector.matrix()?;
    let derived = chain::derived_counts(&matrix, args.d)?;
    let report = CountReport {
        fingerprint: matrix.fingerprint().to_string(),
        k: matrix.k(),
        length: matrix.length(),
        d: derived.depth,
        tables: derived.tables.to_string(),
        transversals: derived.transversals.as_ref().map(|t| t.to_string()),
    };
    match args.format.format {
        Format::Plain => {
            println!("tables {}", report.tables);
            if let Some(t) = &report.transversals {
                println!("transversals {t}");
            }
        }
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &["fingerprint", "k", "length", "d", "tables", "transversals"],
            &[vec![
                report.fingerprint.clone(),
                report.k.to_string(),
                report.length.to_string(),
                report.d.to_string(),
                report.tables.clone(),
                report.transversals.clone().unwrap_or_default(),
            ]],
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct SequenceRowReport {
    d: usize,
    tables: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    transversals: Option<String>,
    normalized: String,
    deviation: String,
}

#[derive(Serialize)]
struct SequenceReportOut {
    fingerprint: String,
    k: usize,
    length: usize,
    limit: String,
    subsequence: Subsequence,
    rows: Vec<SequenceRowReport>,
}

fn cmd_chain_sequence(args: SequenceArgs) -> Result<(), CliError> {
    let matrix = args.selector.matrix()?;
    let report = spectral::sequence_report(&matrix, args.d_max)?;
    let out = SequenceReportOut {
        fingerprint: matrix.fingerprint().to_string(),
        k: matrix.k(),
        length: matrix.length(),
        limit: report.limit.to_string(),
        subsequence: report.subsequence,
        rows: report
            .rows
            .iter()
            .map(|row| SequenceRowReport {
                d: row.depth,
                tables: row.tables.to_string(),
                transversals: row.transversals.as_ref().map(|t| t.to_string()),
                normalized: row.normalized.to_string(),
                deviation: row.deviation.to_string(),
            })
            .collect(),
    };
    match args.format.format {
        Format::Plain => {
            println!("limit {} subsequence {}", out.limit, out.subsequence);
            for row in &out.rows {
                match &row.transversals {
                    Some(t) => println!(
                        "d={} tables={} transversals={} x={} deviation={}",
                        row.d, row.tables, t, row.normalized, row.deviation
                    ),
                    None => println!(
                        "d={} tables={} x={} deviation={}",
                        row.d, row.tables, row.normalized, row.deviation
                    ),
                }
            }
        }
        Format::Json => print_json(&out),
        Format::Csv => {
            let rows: Vec<Vec<String>> = out
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.d.to_string(),
                        row.tables.clone(),
                        row.transversals.clone().unwrap_or_default(),
                        row.normalized.clone(),
                        row.deviation.clone(),
                    ]
                })
                .collect();
            print_csv(
                &["d", "tables", "transversals", "normalized", "deviation"],
                &rows,
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct LumpingReport {
    fingerprint: String,
    k: usize,
    length: usize,
    labels: Vec<String>,
    block_sizes: Vec<String>,
    row_matrix: Vec<Vec<String>>,
    block_matrix: Vec<Vec<String>>,
}

fn cmd_chain_verify_lumping(args: VerifyLumpingArgs) -> Result<(), CliError> {
    let matrix = args.selector.matrix()?;
    let path = args.classes.display().to_string();
    let text = fs::read_to_string(&args.classes).map_err(|err| CliError::Io {
        path,
        source: err,
    })?;
    let blocks = chain::parse_partition(&text)?;
    let lumped = chain::verify_lumping(&matrix, &blocks)?;
    let stringify = |m: &Vec<Vec<num_bigint::BigUint>>| -> Vec<Vec<String>> {
        m.iter()
            .map(|row| row.iter().map(|e| e.to_string()).collect())
            .collect()
    };
    let report = LumpingReport {
        fingerprint: matrix.fingerprint().to_string(),
        k: matrix.k(),
        length: matrix.length(),
        labels: lumped.labels.clone(),
        block_sizes: lumped.block_sizes.iter().map(|s| s.to_string()).collect(),
        row_matrix: stringify(&lumped.row_matrix),
        block_matrix: stringify(&lumped.block_matrix),
    };
    match args.format.format {
        Format::Plain => {
            println!("labels {}", report.labels.join(" "));
            println!("block sizes {}", report.block_sizes.join(" "));
            println!("row matrix:");
            for row in &report.row_matrix {
                println!("  {}", row.join(" "));
            }
            println!("block matrix:");
            for row in &report.block_matrix {
                println!("  {}", row.join(" "));
            }
        }
        Format::Json => print_json(&report),
        Format::Csv => {
            let mut header = vec!["block".to_string()];
            header.extend(report.labels.iter().cloned());
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = report
                .labels
                .iter()
                .zip(&report.block_matrix)
                .map(|(label, row)| {
                    let mut cells = vec![label.clone()];
                    cells.extend(row.iter().cloned());
                    cells
                })
                .collect();
            print_csv(&header_refs, &rows);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ConstantReport {
    fingerprint: String,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    c: String,
    decimal: String,
    subsequence: Subsequence,
    scc_size: usize,
    period: usize,
    lambda: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_alternate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decimal_alternate: Option<String>,
}

fn cmd_constant(args: ConstantArgs) -> Result<(), CliError> {
    let matrix = args.selector.matrix()?;
    let constant = spectral::constant_from_matrix(&matrix)?;
    let report = ConstantReport {
        fingerprint: constant.fingerprint.clone(),
        k: constant.k,
        l: matrix.is_partial().then_some(constant.length),
        c: constant.value.to_string(),
        decimal: constant.decimal.clone(),
        subsequence: constant.subsequence,
        scc_size: constant.scc_size,
        period: constant.period,
        lambda: constant.lambda.to_string(),
        c_alternate: constant.alternate.as_ref().map(|a| a.to_string()),
        decimal_alternate: constant
            .alternate
            .as_ref()
            .map(|a| spectral::decimal_string(a, 12)),
    };
    match args.format.format {
        Format::Plain => {
            println!("c = {} ({})", report.c, report.decimal);
            println!("subsequence {}", report.subsequence);
            println!(
                "period {} closed-class size {} lambda {}",
                report.period, report.scc_size, report.lambda
            );
            if let (Some(alt), Some(alt_decimal)) = (&report.c_alternate, &report.decimal_alternate)
            {
                println!("c under the multiset convention = {alt} ({alt_decimal})");
            }
        }
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &[
                "fingerprint",
                "k",
                "l",
                "c",
                "decimal",
                "subsequence",
                "scc_size",
                "period",
                "lambda",
                "c_alternate",
            ],
            &[vec![
                report.fingerprint.clone(),
                report.k.to_string(),
                report.l.map(|l| l.to_string()).unwrap_or_default(),
                report.c.clone(),
                report.decimal.clone(),
                report.subsequence.to_string(),
                report.scc_size.to_string(),
                report.period.to_string(),
                report.lambda.clone(),
                report.c_alternate.clone().unwrap_or_default(),
            ]],
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow {
    d: usize,
    chain: String,
    closed_form: String,
    verdict: &'static str,
}

#[derive(Serialize)]
struct GroupSummary {
    group: &'static str,
    rows: Vec<SummaryRow>,
}

fn cmd_summary(args: SummaryArgs) -> Result<(), CliError> {
    let limits = args.caps.limits();
    let mut groups = Vec::new();
    for group in SmallGroup::ALL {
        let table = group.table();
        let matrix = chain::build_transition(&table, 1, &limits)?;
        let mut rows = Vec::new();
        for d in 1..=args.d_max {
            let derived = chain::derived_counts(&matrix, d)?;
            let counted = derived
                .transversals
                .expect("full chains at k = 1 always derive transversal counts");
            let closed = reference::transversal_closed_form(group, d);
            let verdict = if counted == closed { "EQUAL" } else { "DIFFER" };
            rows.push(SummaryRow {
                d,
                chain: counted.to_string(),
                closed_form: closed.to_string(),
                verdict,
            });
        }
        groups.push(GroupSummary {
            group: group.label(),
            rows,
        });
    }
    match args.format.format {
        Format::Plain => {
            for summary in &groups {
                println!("{}:", summary.group);
                for row in &summary.rows {
                    println!(
                        "  d={} chain={} closed={} {}",
                        row.d, row.chain, row.closed_form, row.verdict
                    );
                }
            }
        }
        Format::Json => print_json(&groups),
        Format::Csv => {
            let rows: Vec<Vec<String>> = groups
                .iter()
                .flat_map(|summary| {
                    summary.rows.iter().map(|row| {
                        vec![
                            summary.group.to_string(),
                            row.d.to_string(),
                            row.chain.clone(),
                            row.closed_form.clone(),
                            row.verdict.to_string(),
                        ]
                    })
                })
                .collect();
            print_csv(&["group", "d", "chain", "closed_form", "verdict"], &rows);
        }
    }
    Ok(())
}
