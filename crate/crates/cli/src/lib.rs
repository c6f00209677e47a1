//! Command-line front end for `isodescent`.
//!
//! Parsing, execution and output live here so they can be tested without
//! spawning the binary; `main.rs` only maps results to exit codes.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use isodescent::arith::{is_prime_i128, primes_up_to, SquareClass};
use isodescent::descent::{descend, CurveModel, SelmerGroup, DEFAULT_HEIGHT_BOUND};
use isodescent::family::{
    classify, closed_form_selmer_psi, closed_form_selmer_psibar, find_witness, theorem_bound,
    verify_prime, FamilyReport, PrimeClass, ReprKind,
};

/// Value of the `spec_version` field in every record.
pub const SPEC_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Residue class, quartic symbol and rank ceiling of p
    Classify {
        #[arg(long, value_parser = parse_prime)]
        p: i128,
    },
    /// Closed-form and computed Selmer groups of E_p
    Selmer {
        #[arg(long, value_parser = parse_prime)]
        p: i128,
    },
    /// Rank bounds of E_p
    Rank {
        #[arg(long, value_parser = parse_prime)]
        p: i128,
    },
    /// Solutions of 3p = a^4 + 2b^4 and p = a^4 + 18b^4
    Repr {
        #[arg(long, value_parser = parse_prime)]
        p: i128,
    },
    /// Rank records for every prime up to --max
    Scan {
        #[arg(long)]
        max: u64,
    },
    /// Descent on y^2 = x^3 + a x^2 + b x
    Descent {
        #[arg(long, allow_hyphen_values = true)]
        a: i128,
        #[arg(long, allow_hyphen_values = true)]
        b: i128,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Parser)]
#[command(name = "isodescent", version, about = "2-isogeny descent on y^2 = x^3 + a x^2 + b x")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Largest numerator or denominator tried in point searches
    #[arg(long, global = true, default_value_t = DEFAULT_HEIGHT_BOUND,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub height_bound: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for scan (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
}

fn parse_prime(s: &str) -> Result<i128, String> {
    let p: i128 = s.parse().map_err(|e| format!("{e}"))?;
    match is_prime_i128(p) {
        Ok(true) => Ok(p),
        Ok(false) => Err(format!("{p} is not prime")),
        Err(e) => Err(e.to_string()),
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    RunConfig::try_parse_from(std::iter::once("isodescent".into()).chain(argv.into_iter().map(Into::into)))
}

/// Failures mapped onto exit codes by the binary.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Library(#[from] isodescent::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(isodescent::Error::Inconsistent(_)) => 1,
            CliError::Library(_) => 2,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 3,
        }
    }
}

/// A flat row; `FIELDS` is the CSV header, written even for empty output.
pub trait Record: Serialize + for<'de> Deserialize<'de> {
    const FIELDS: &'static [&'static str];

    fn consistent(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyRecord {
    pub spec_version: u32,
    pub p: i128,
    pub mod24: u8,
    pub quartic2: Option<i8>,
    pub theorem_bound: String,
}

impl Record for ClassifyRecord {
    const FIELDS: &'static [&'static str] = &["spec_version", "p", "mod24", "quartic2", "theorem_bound"];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerRecord {
    pub spec_version: u32,
    pub p: i128,
    pub mod24: u8,
    pub quartic2: Option<i8>,
    pub closed_psibar: String,
    pub closed_psibar_symbolic: String,
    pub engine_psibar: String,
    pub closed_psi: String,
    pub closed_psi_symbolic: String,
    pub engine_psi: String,
    pub consistent: bool,
}

impl Record for SelmerRecord {
    const FIELDS: &'static [&'static str] = &[
        "spec_version",
        "p",
        "mod24",
        "quartic2",
        "closed_psibar",
        "closed_psibar_symbolic",
        "engine_psibar",
        "closed_psi",
        "closed_psi_symbolic",
        "engine_psi",
        "consistent",
    ];

    fn consistent(&self) -> bool {
        self.consistent
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRecord {
    pub spec_version: u32,
    pub p: i128,
    pub mod24: u8,
    pub quartic2: Option<i8>,
    pub dim_selmer_psibar: u32,
    pub dim_selmer_psi: u32,
    pub dim_im_alpha: u32,
    pub dim_im_alphabar: u32,
    pub lower: u32,
    pub upper: i64,
    pub theorem_bound: String,
    pub proposition: String,
    pub height_bound: u64,
    pub consistent: bool,
}

impl Record for RankRecord {
    const FIELDS: &'static [&'static str] = &[
        "spec_version",
        "p",
        "mod24",
        "quartic2",
        "dim_selmer_psibar",
        "dim_selmer_psi",
        "dim_im_alpha",
        "dim_im_alphabar",
        "lower",
        "upper",
        "theorem_bound",
        "proposition",
        "height_bound",
        "consistent",
    ];

    fn consistent(&self) -> bool {
        self.consistent
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReprRecord {
    pub spec_version: u32,
    pub p: i128,
    pub kind: String,
    pub target: i128,
    pub a: Option<i128>,
    pub b: Option<i128>,
}

impl Record for ReprRecord {
    const FIELDS: &'static [&'static str] = &["spec_version", "p", "kind", "target", "a", "b"];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentRecord {
    pub spec_version: u32,
    pub a: i128,
    pub b: i128,
    pub selmer_psibar: String,
    pub selmer_psi: String,
    pub image_alpha: String,
    pub image_alphabar: String,
    pub dim_selmer_psibar: u32,
    pub dim_selmer_psi: u32,
    pub dim_im_alpha: u32,
    pub dim_im_alphabar: u32,
    pub lower: u32,
    pub upper: i64,
    pub height_bound: u64,
}

impl Record for DescentRecord {
    const FIELDS: &'static [&'static str] = &[
        "spec_version",
        "a",
        "b",
        "selmer_psibar",
        "selmer_psi",
        "image_alpha",
        "image_alphabar",
        "dim_selmer_psibar",
        "dim_selmer_psi",
        "dim_im_alpha",
        "dim_im_alphabar",
        "lower",
        "upper",
        "height_bound",
    ];
}

/// Records produced by one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Output {
    Classify(Vec<ClassifyRecord>),
    Selmer(Vec<SelmerRecord>),
    Rank(Vec<RankRecord>),
    Repr(Vec<ReprRecord>),
    Descent(Vec<DescentRecord>),
}

impl Output {
    pub fn consistent(&self) -> bool {
        fn all<R: Record>(rs: &[R]) -> bool {
            rs.iter().all(Record::consistent)
        }
        match self {
            Output::Classify(r) => all(r),
            Output::Selmer(r) => all(r),
            Output::Rank(r) => all(r),
            Output::Repr(r) => all(r),
            Output::Descent(r) => all(r),
        }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match self {
            Output::Classify(r) => emit(r, format),
            Output::Selmer(r) => emit(r, format),
            Output::Rank(r) => emit(r, format),
            Output::Repr(r) => emit(r, format),
            Output::Descent(r) => emit(r, format),
        }
    }
}

/// Sorted signed integers joined by `;`.
pub fn classes_column<'a>(classes: impl IntoIterator<Item = &'a SquareClass>) -> String {
    let mut v: Vec<i128> = classes.into_iter().map(|c| c.value()).collect();
    v.sort();
    join(v.iter())
}

fn join<T: fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Same order as [`classes_column`], with multiples of `p` written as `2p`,
/// `-p` and so on. Left numeric for `p <= 3`, where `p` would be ambiguous.
pub fn symbolic_column(group: &SelmerGroup, p: i128) -> String {
    let mut v: Vec<i128> = group.values();
    v.sort();
    join(v.into_iter().map(|c| match (p > 3 && c % p == 0, c / p) {
        (true, 1) => "p".to_string(),
        (true, -1) => "-p".to_string(),
        (true, k) => format!("{k}p"),
        (false, _) => c.to_string(),
    }))
}

fn quartic2(c: &PrimeClass) -> Option<i8> {
    c.quartic2.map(|s| s.value())
}

pub fn rank_record(r: &FamilyReport, height_bound: u64) -> RankRecord {
    let b = &r.rank_bounds;
    RankRecord {
        spec_version: SPEC_VERSION,
        p: r.prime_class.p,
        mod24: r.prime_class.residue_mod_24,
        quartic2: quartic2(&r.prime_class),
        dim_selmer_psibar: b.dim_selmer_psibar,
        dim_selmer_psi: b.dim_selmer_psi,
        dim_im_alpha: b.dim_im_alpha,
        dim_im_alphabar: b.dim_im_alphabar,
        lower: b.lower,
        upper: b.upper,
        theorem_bound: r.theorem_bound.to_string(),
        proposition: r.proposition.as_ref().map(|c| c.to_string()).unwrap_or_default(),
        height_bound,
        consistent: r.consistent,
    }
}

fn selmer_record(p: i128) -> Result<SelmerRecord, CliError> {
    let class = classify(p)?;
    let e = isodescent::family::curve_for_prime(p)?;
    let closed_psibar = closed_form_selmer_psibar(p)?;
    let closed_psi = closed_form_selmer_psi(p)?;
    let engine_psibar = isodescent::descent::selmer(&e, isodescent::descent::Isogeny::PsiBar)?;
    let engine_psi = isodescent::descent::selmer(&e, isodescent::descent::Isogeny::Psi)?;
    Ok(SelmerRecord {
        spec_version: SPEC_VERSION,
        p,
        mod24: class.residue_mod_24,
        quartic2: quartic2(&class),
        closed_psibar: classes_column(&closed_psibar.classes),
        closed_psibar_symbolic: symbolic_column(&closed_psibar, p),
        engine_psibar: classes_column(&engine_psibar.classes),
        closed_psi: classes_column(&closed_psi.classes),
        closed_psi_symbolic: symbolic_column(&closed_psi, p),
        engine_psi: classes_column(&engine_psi.classes),
        consistent: closed_psibar.classes == engine_psibar.classes
            && closed_psi.classes == engine_psi.classes,
    })
}

/// Rank records for all primes up to `max`, in order of `p`, computed on a
/// pool of `jobs` threads.
pub fn scan(max: u64, height_bound: u64, jobs: usize) -> Result<Vec<RankRecord>, CliError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let primes = primes_up_to(max);
    pool.install(|| {
        primes
            .par_iter()
            .map(|&p| Ok(rank_record(&verify_prime(p as i128, height_bound)?, height_bound)))
            .collect()
    })
}

pub fn execute(config: &RunConfig) -> Result<Output, CliError> {
    let h = config.height_bound;
    Ok(match config.command {
        Command::Classify { p } => {
            let class = classify(p)?;
            Output::Classify(vec![ClassifyRecord {
                spec_version: SPEC_VERSION,
                p,
                mod24: class.residue_mod_24,
                quartic2: quartic2(&class),
                theorem_bound: theorem_bound(p)?.to_string(),
            }])
        }
        Command::Selmer { p } => Output::Selmer(vec![selmer_record(p)?]),
        Command::Rank { p } => Output::Rank(vec![rank_record(&verify_prime(p, h)?, h)]),
        Command::Repr { p } => {
            let mut records = Vec::new();
            for kind in [ReprKind::ThreeP, ReprKind::P] {
                let w = find_witness(p, kind)?;
                records.push(ReprRecord {
                    spec_version: SPEC_VERSION,
                    p,
                    kind: kind.to_string(),
                    target: kind.target(p),
                    a: w.map(|w| w.a),
                    b: w.map(|w| w.b),
                });
            }
            Output::Repr(records)
        }
        Command::Scan { max } => {
            let jobs = match config.jobs {
                Some(j) => j as usize,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            Output::Rank(scan(max, h, jobs)?)
        }
        Command::Descent { a, b } => {
            let e = CurveModel::new(a, b).map_err(|e| CliError::Usage(e.to_string()))?;
            let d = descend(&e, h)?;
            Output::Descent(vec![DescentRecord {
                spec_version: SPEC_VERSION,
                a,
                b,
                selmer_psibar: classes_column(&d.selmer_psibar.classes),
                selmer_psi: classes_column(&d.selmer_psi.classes),
                image_alpha: classes_column(&d.image_alpha.classes),
                image_alphabar: classes_column(&d.image_alphabar.classes),
                dim_selmer_psibar: d.bounds.dim_selmer_psibar,
                dim_selmer_psi: d.bounds.dim_selmer_psi,
                dim_im_alpha: d.bounds.dim_im_alpha,
                dim_im_alphabar: d.bounds.dim_im_alphabar,
                lower: d.bounds.lower,
                upper: d.bounds.upper,
                height_bound: h,
            }])
        }
    })
}

fn to_csv<R: Record>(records: &[R]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(R::FIELDS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn to_text<R: Record>(records: &[R]) -> Result<Vec<u8>, CliError> {
    let csv = to_csv(records)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(csv.as_slice());
    let rows: Vec<Vec<String>> = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    let mut widths = vec![0; R::FIELDS.len()];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = Vec::new();
    for row in &rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", line.join("  ").trim_end())?;
    }
    Ok(out)
}

/// Serializes records; identical input gives identical bytes.
pub fn emit<R: Record>(records: &[R], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => to_csv(records),
        Format::Text => to_text(records),
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(records)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Runs a parsed config end to end and returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let result = execute(config).and_then(|output| {
        let bytes = output.render(config.format)?;
        match &config.out {
            Some(path) => write_atomic(path, &bytes)?,
            None => std::io::stdout().write_all(&bytes)?,
        }
        Ok(output.consistent())
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("isodescent: inconsistency detected");
            1
        }
        Err(e) => {
            eprintln!("isodescent: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_columns() {
        let g = closed_form_selmer_psibar(11).unwrap();
        assert_eq!(classes_column(&g.classes), "1;2;3;6;11;22;33;66");
        assert_eq!(symbolic_column(&g, 11), "1;2;3;6;p;2p;3p;6p");
        let g = closed_form_selmer_psi(23).unwrap();
        assert_eq!(symbolic_column(&g, 23), "-p;-2;1;2p");
        let g = closed_form_selmer_psibar(3).unwrap();
        assert_eq!(symbolic_column(&g, 3), "1;2");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Library(isodescent::Error::Inconsistent("x".into())).exit_code(), 1);
        let io = std::io::Error::new(std::io::ErrorKind::PermissionDenied, "x");
        assert_eq!(CliError::Io(io).exit_code(), 3);
    }
}
