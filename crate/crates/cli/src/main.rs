use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdcorr_core::analysis::{search_decimations, verify_theorem1, SearchRecord, VerifyReport};
use pdcorr_core::decimation::{
    derive_params, enumerate_decimations, params_for, solve_congruence, DecimationParams,
};
use pdcorr_core::gf2m::{build_field, Field, LOG_TABLE_MAX_DEGREE};
use pdcorr_core::quadform::{rank_census, FormParams, RankCensus};
use pdcorr_core::sequences::{CorrelationSpectrum, Correlator, Route, ValueCount};
use pdcorr_core::Error;
use serde::Serialize;

/// Relative `--output` paths are resolved against this directory when it is set.
const OUTPUT_DIR_VAR: &str = "PDCORR_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "pdcorr",
    version,
    about = "Cross correlation of an m-sequence and a decimated short m-sequence"
)]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format (default depends on the command)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct FieldArgs {
    /// Field degree, even, 4..=26
    #[arg(long)]
    m: u32,
    /// Primitive polynomial as a hex mask, e.g. 0x43
    #[arg(long, value_parser = parse_hex)]
    poly: Option<u64>,
}

impl FieldArgs {
    fn build(&self) -> Result<Field, Error> {
        Ok(build_field(self.m, self.poly)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Folded,
    Direct,
    Charsum,
    Quadform,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Folded => Route::Folded,
            RouteArg::Direct => Route::Direct,
            RouteArg::Charsum => Route::CharacterSum,
            RouteArg::Quadform => Route::QuadraticForm,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Field summary: polynomial, T, orders of alpha and beta
    FieldInfo(FieldArgs),
    /// Decimations solving d (2^l + 1) = 2^i mod 2^n - 1
    Enumerate {
        #[arg(long, required_unless_present = "m", conflicts_with = "m")]
        n: Option<u32>,
        /// Alternative to --n: the full degree m = 2n
        #[arg(long)]
        m: Option<u32>,
    },
    /// Correlation values and their counts over all shifts
    Spectrum {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        d: u64,
        #[arg(long, value_enum, default_value = "folded")]
        route: RouteArg,
    },
    /// Ranks of the quadratic forms over all a in GF(2^n)*
    RankCensus {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        l: u32,
    },
    /// Compare the spectrum of d against the closed-form distribution
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        d: u64,
        /// Use this exponent instead of the smallest normalized one
        #[arg(long)]
        l: Option<u32>,
    },
    /// Coset leaders whose spectrum has at most --max-values distinct values
    Search {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 4)]
        max_values: usize,
        /// Allow m up to 20
        #[arg(long)]
        extended: bool,
    },
}

fn parse_hex(s: &str) -> Result<u64, String> {
    let digits = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| format!("invalid hex polynomial {s:?}: {e}"))
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_verification_failure() {
            Failure::Verification(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

macro_rules! lift {
    ($e:expr) => {
        $e.map_err(|e| Failure::from(Error::from(e)))
    };
}

struct Output {
    text: String,
    pass: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, pass: true }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let result = run(&cli).and_then(|out| {
        write_output(cli.output.as_ref(), &out.text).map_err(Failure::Usage)?;
        Ok(out.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Verification(msg)) => {
            eprintln!("error: verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
        Some(p) => {
            let path = match std::env::var_os(OUTPUT_DIR_VAR) {
                Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
                _ => p.clone(),
            };
            std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let fmt = |default| cli.format.unwrap_or(default);
    match &cli.command {
        Command::FieldInfo(args) => field_info(&args.build()?, fmt(Format::Table)),
        Command::Enumerate { n, m } => {
            let n = match (n, m) {
                (Some(n), _) => *n,
                (None, Some(m)) if m % 2 == 0 => m / 2,
                (None, Some(m)) => return Err(Failure::Usage(format!("m = {m} must be even"))),
                (None, None) => unreachable!("clap requires one of --n, --m"),
            };
            enumerate(n, fmt(Format::Csv))
        }
        Command::Spectrum { field, d, route } => {
            let field = field.build()?;
            let spec = lift!(Correlator::new(&field).spectrum_by(*d, (*route).into()))?;
            Ok(Output::ok(render_spectrum(&spec, fmt(Format::Json))))
        }
        Command::RankCensus { field, l } => {
            let f = field.build()?;
            let form = lift!(FormParams::new(f.n(), *l))?;
            let census = lift!(rank_census(&f, form))?;
            Ok(Output::ok(render_census(&census, fmt(Format::Json))))
        }
        Command::Verify { field, d, l } => {
            let f = field.build()?;
            let params = verify_params(*d, f.n(), *l)?;
            let report = lift!(verify_theorem1(&f, &params))?;
            let pass = report.pass;
            if !pass {
                eprintln!("verification failed for m = {}, d = {}", report.m, report.d);
            }
            Ok(Output {
                text: render_report(&report, fmt(Format::Json)),
                pass,
            })
        }
        Command::Search {
            field,
            max_values,
            extended,
        } => {
            let f = field.build()?;
            let records = lift!(search_decimations(&f, *max_values, *extended))?;
            Ok(Output::ok(render_search(&records, fmt(Format::Csv))))
        }
    }
}

fn verify_params(d: u64, n: u32, l: Option<u32>) -> Result<DecimationParams, Failure> {
    match l {
        None => lift!(params_for(d, n))?.ok_or_else(|| {
            Failure::Usage(format!(
                "d = {d} does not solve d (2^l + 1) = 2^i mod 2^{n} - 1 with a normalized l"
            ))
        }),
        Some(l) => {
            let i = lift!(solve_congruence(d, n))?
                .into_iter()
                .find(|&(l2, _)| l2 == l)
                .map(|(_, i)| i)
                .ok_or_else(|| {
                    Failure::Usage(format!(
                        "d = {d}, l = {l} does not solve the congruence for n = {n}"
                    ))
                })?;
            lift!(derive_params(d, l, i, n))
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>, header: Option<&[&str]>) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header.is_none())
        .from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Right-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(&mut header.iter().copied());
    for r in rows {
        line(&mut r.iter().map(String::as_str));
    }
    out
}

#[derive(Serialize)]
struct FieldInfo {
    m: u32,
    n: u32,
    poly: String,
    #[serde(rename = "T")]
    t: u32,
    alpha_order: u64,
    beta_order: u64,
    log_tables: bool,
}

fn field_info(f: &Field, format: Format) -> Result<Output, Failure> {
    let info = FieldInfo {
        m: f.m(),
        n: f.n(),
        poly: format!("{:#x}", f.poly()),
        t: f.t_exponent(),
        alpha_order: lift!(f.multiplicative_order(f.alpha()))?,
        beta_order: lift!(f.multiplicative_order(f.beta()))?,
        log_tables: f.m() <= LOG_TABLE_MAX_DEGREE,
    };
    let text = match format {
        Format::Json => json(&info),
        Format::Csv => csv_string([&info], None),
        Format::Table => {
            let mut s = String::new();
            for (k, v) in [
                ("m", info.m.to_string()),
                ("n", info.n.to_string()),
                ("poly", info.poly.clone()),
                ("T", info.t.to_string()),
                ("alpha order", info.alpha_order.to_string()),
                ("beta order", info.beta_order.to_string()),
                ("log tables", info.log_tables.to_string()),
            ] {
                writeln!(s, "{k:<12}{v}").unwrap();
            }
            s
        }
    };
    Ok(Output::ok(text))
}

#[derive(Serialize)]
struct EnumerateRow {
    n: u32,
    d: u32,
    coset_leader: u32,
    l: u32,
    i: u32,
    k: u32,
    r: u32,
    s: u32,
}

fn enumerate(n: u32, format: Format) -> Result<Output, Failure> {
    let rows: Vec<EnumerateRow> = lift!(enumerate_decimations(n))?
        .into_iter()
        .map(|p| EnumerateRow {
            n: p.n,
            d: p.d,
            coset_leader: p.coset_leader,
            l: p.l,
            i: p.i,
            k: p.k,
            r: p.r,
            s: p.s,
        })
        .collect();
    let header = ["n", "d", "coset_leader", "l", "i", "k", "r", "s"];
    let text = match format {
        Format::Json => json(&rows),
        Format::Csv if rows.is_empty() => {
            csv_string(std::iter::empty::<EnumerateRow>(), Some(&header))
        }
        Format::Csv => csv_string(&rows, None),
        Format::Table => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    [r.n, r.d, r.coset_leader, r.l, r.i, r.k, r.r, r.s]
                        .iter()
                        .map(u32::to_string)
                        .collect()
                })
                .collect();
            table(&header, &cells)
        }
    };
    Ok(Output::ok(text))
}

fn render_spectrum(spec: &CorrelationSpectrum, format: Format) -> String {
    let rec = spec.to_record();
    match format {
        Format::Json => json(&rec),
        Format::Csv => csv_string(&rec.values, Some(&["c", "count"])),
        Format::Table => {
            let cells: Vec<Vec<String>> = rec
                .values
                .iter()
                .map(|v| vec![v.c.to_string(), v.count.to_string()])
                .collect();
            format!(
                "m = {}, d = {}\n{}",
                rec.m,
                rec.d,
                table(&["c", "count"], &cells)
            )
        }
    }
}

fn render_census(census: &RankCensus, format: Format) -> String {
    match format {
        Format::Json => json(census),
        Format::Csv => {
            let rows = census
                .ranks
                .iter()
                .map(|(&rank, &count)| (census.m, census.l, census.k, rank, count));
            csv_string(rows, Some(&["m", "l", "k", "rank", "count"]))
        }
        Format::Table => {
            let cells: Vec<Vec<String>> = census
                .ranks
                .iter()
                .map(|(r, c)| vec![r.to_string(), c.to_string()])
                .collect();
            format!(
                "m = {}, l = {}, k = {}\n{}",
                census.m,
                census.l,
                census.k,
                table(&["rank", "count"], &cells)
            )
        }
    }
}

/// Union of empirical and predicted values with both counts, ascending by value.
fn report_rows(report: &VerifyReport) -> Vec<(i128, u64, u64)> {
    let mut values: Vec<i128> = report
        .empirical
        .iter()
        .map(|v| v.c.into())
        .chain(report.predicted.iter().map(|p| p.c))
        .collect();
    values.sort_unstable();
    values.dedup();
    let emp = |c| {
        report
            .empirical
            .iter()
            .find(|v: &&ValueCount| i128::from(v.c) == c)
            .map_or(0, |v| v.count)
    };
    let pred = |c| {
        report
            .predicted
            .iter()
            .find(|p| p.c == c)
            .map_or(0, |p| p.count)
    };
    values.into_iter().map(|c| (c, emp(c), pred(c))).collect()
}

fn render_report(report: &VerifyReport, format: Format) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => csv_string(report_rows(report), Some(&["c", "empirical", "predicted"])),
        Format::Table => {
            let cells: Vec<Vec<String>> = report_rows(report)
                .into_iter()
                .map(|(c, e, p)| {
                    let mark = if e == p { "" } else { "*" };
                    vec![
                        c.to_string(),
                        e.to_string(),
                        p.to_string(),
                        mark.to_string(),
                    ]
                })
                .collect();
            format!(
                "m = {}, d = {}, l = {}, i = {}, k = {}\n{}full-rank forms: {}\nresult: {}\n",
                report.m,
                report.d,
                report.l,
                report.i,
                report.k,
                table(&["c", "empirical", "predicted", ""], &cells),
                report.rank_census.full_rank(),
                if report.pass { "pass" } else { "FAIL" },
            )
        }
    }
}

#[derive(Serialize)]
struct SearchRow {
    m: u32,
    d: u32,
    num_values: usize,
    values: String,
    l: Option<u32>,
    i: Option<u32>,
    k: Option<u32>,
}

#[derive(Serialize)]
struct SearchJson<'a> {
    m: u32,
    d: u32,
    num_values: usize,
    values: Vec<ValueCount>,
    l: Option<u32>,
    i: Option<u32>,
    k: Option<u32>,
    solutions: &'a [(u32, u32)],
}

fn render_search(records: &[SearchRecord], format: Format) -> String {
    let header = ["m", "d", "num_values", "values", "l", "i", "k"];
    let rows = records.iter().map(|r| SearchRow {
        m: r.m,
        d: r.d,
        num_values: r.num_values,
        values: r.spectrum.compact(),
        l: r.matched.map(|(l, _)| l),
        i: r.matched.map(|(_, i)| i),
        k: r.k,
    });
    match format {
        Format::Json => {
            let out: Vec<SearchJson> = records
                .iter()
                .map(|r| SearchJson {
                    m: r.m,
                    d: r.d,
                    num_values: r.num_values,
                    values: r.spectrum.to_record().values,
                    l: r.matched.map(|(l, _)| l),
                    i: r.matched.map(|(_, i)| i),
                    k: r.k,
                    solutions: &r.solutions,
                })
                .collect();
            json(&out)
        }
        Format::Csv if records.is_empty() => {
            csv_string(std::iter::empty::<SearchRow>(), Some(&header))
        }
        Format::Csv => csv_string(rows, None),
        Format::Table => {
            let opt = |v: Option<u32>| v.map_or(String::new(), |x| x.to_string());
            let cells: Vec<Vec<String>> = rows
                .map(|r| {
                    vec![
                        r.m.to_string(),
                        r.d.to_string(),
                        r.num_values.to_string(),
                        r.values,
                        opt(r.l),
                        opt(r.i),
                        opt(r.k),
                    ]
                })
                .collect();
            table(&header, &cells)
        }
    }
}
