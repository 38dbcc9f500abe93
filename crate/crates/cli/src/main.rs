//! `overbressoud`: verification campaigns, count tables, series expansion and
//! bijection audits from the command line.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
//! or input errors.

use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Number, Value};

use overbressoud::bijections::{self, MapAudit};
use overbressoud::enumerate::{self, ConditionFamily, ResidueFamily};
use overbressoud::qexpr;
use overbressoud::series::{self, QSeries, XQSeries};
use overbressoud::verify::{self, Campaign, Config, Record, VerificationReport};

#[derive(Parser)]
#[command(name = "overbressoud", version, about = "Exact verification of overpartition identities")]
struct Cli {
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "tsv")]
    json: bool,
    /// Emit tab-separated values.
    #[arg(long, global = true)]
    tsv: bool,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized campaigns.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Stream verification records as JSON lines.
    #[arg(long, global = true)]
    stream: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification campaign.
    Verify(VerifyArgs),
    /// Expand a product formula or a built-in series.
    Series(SeriesArgs),
    /// Print a count table D(m, n) by number of parts and weight.
    Table(TableArgs),
    /// Audit one of the maps iota, phi, chi on finite cells.
    Bijection(BijectionArgs),
    /// Count (and optionally list) the members of a family.
    Count(CountArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: gordon, bressoud, lovejoy-b, lovejoy-d, css, clm, main,
    /// w-recurrence, d-recurrence, decomposition, phi, chi, jtp, genfun,
    /// ring-laws, parser-fuzz.
    theorem: String,
    #[arg(long, default_value_t = 4)]
    kmax: u32,
    #[arg(long, default_value_t = 12)]
    nmax: u32,
    /// Largest number of parts for table campaigns (defaults to nmax).
    #[arg(long)]
    mmax: Option<u32>,
    /// Series truncation order (defaults to nmax).
    #[arg(long)]
    order: Option<usize>,
    /// Sample count for ring-laws and parser-fuzz.
    #[arg(long)]
    samples: Option<usize>,
    /// Also check i = k for bressoud, where the identity is known to fail.
    #[arg(long)]
    include_i_equals_k: bool,
    /// Also check k = 1 where the identity degenerates.
    #[arg(long)]
    include_k_equals_1: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    #[value(name = "W", alias = "w")]
    W,
    #[value(name = "Dgen", alias = "dgen")]
    Dgen,
    #[value(name = "theta")]
    Theta,
    #[value(name = "J1", alias = "j1")]
    J1,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["expr", "builtin"])))]
struct SeriesArgs {
    #[arg(long)]
    expr: Option<String>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    i: Option<u32>,
    #[arg(long, default_value_t = 10)]
    order: usize,
    /// Evaluate an expression containing x as a bivariate series.
    #[arg(long)]
    bivariate: bool,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value = "D")]
    family: String,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    i: u32,
    #[arg(long)]
    mmax: usize,
    #[arg(long)]
    nmax: usize,
    /// Also check the count recurrence on every cell (family D only).
    #[arg(long)]
    check_recurrence: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapName {
    Iota,
    Phi,
    Chi,
}

#[derive(Args)]
struct BijectionArgs {
    #[arg(long, value_enum)]
    map: MapName,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    i: u32,
    /// Audit a single cell (requires --n); otherwise every cell m <= n <= nmax.
    #[arg(long, requires = "n")]
    m: Option<i64>,
    #[arg(long, requires = "m")]
    n: Option<i64>,
    #[arg(long, default_value_t = 8)]
    nmax: i64,
}

#[derive(Args)]
struct CountArgs {
    /// A condition family (F, B, Bbar, Dbar, P, B3, D) or residue family
    /// (E, A, Abar, Cbar, Q, A3, C).
    #[arg(long)]
    family: String,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 1)]
    i: u32,
    #[arg(long)]
    n: u32,
    /// Restrict to this number of parts.
    #[arg(long)]
    m: Option<usize>,
    /// Print every member.
    #[arg(long)]
    list: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Tsv,
}

/// Which family a `--family` name refers to.
enum AnyFamily {
    Condition(ConditionFamily),
    Residue(ResidueFamily),
}

impl FromStr for AnyFamily {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(f) = s.parse::<ConditionFamily>() {
            return Ok(AnyFamily::Condition(f));
        }
        s.parse::<ResidueFamily>().map(AnyFamily::Residue).map_err(Into::into)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = if cli.json {
        Format::Json
    } else if cli.tsv {
        Format::Tsv
    } else {
        Format::Text
    };
    let outcome = (|| {
        if let Some(jobs) = cli.jobs {
            if jobs == 0 {
                bail!("--jobs must be at least 1");
            }
            rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().context("starting worker pool")?;
        }
        let stdout = io::stdout();
        let mut out = BufWriter::new(stdout.lock());
        let passed = match &cli.command {
            Command::Verify(args) => cmd_verify(args, &cli, format, &mut out)?,
            Command::Series(args) => cmd_series(args, format, &mut out)?,
            Command::Table(args) => cmd_table(args, format, &mut out)?,
            Command::Bijection(args) => cmd_bijection(args, format, &mut out)?,
            Command::Count(args) => cmd_count(args, format, &mut out)?,
        };
        out.flush()?;
        Ok(passed)
    })();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn big(c: impl ToString) -> Value {
    Value::Number(Number::from_str(&c.to_string()).expect("decimal integer"))
}

fn cmd_verify(args: &VerifyArgs, cli: &Cli, format: Format, out: &mut impl Write) -> Result<bool> {
    let campaign: Campaign = args.theorem.parse()?;
    let config = Config {
        kmax: args.kmax,
        nmax: args.nmax,
        mmax: args.mmax,
        order: args.order,
        include_i_equals_k: args.include_i_equals_k,
        include_k_equals_1: args.include_k_equals_1,
        seed: cli.seed,
        samples: args.samples,
    };
    if cli.stream {
        let header = json!({"type": "header", "schema": verify::SCHEMA, "campaign": campaign, "parameters": config});
        writeln!(out, "{header}")?;
        out.flush()?;
        let mut io_error = None;
        let report = verify::run_with(campaign, &config, |record| {
            if io_error.is_some() {
                return;
            }
            let mut line = serde_json::to_value(record).expect("records serialize");
            line["type"] = "record".into();
            if let Err(e) = writeln!(out, "{line}").and_then(|_| out.flush()) {
                io_error = Some(e);
            }
        })?;
        if let Some(e) = io_error {
            return Err(e.into());
        }
        let footer = json!({
            "type": "summary",
            "schema": verify::SCHEMA,
            "campaign": campaign,
            "summary": report.summary,
            "status": report.status,
            "counterexample": report.counterexample,
            "duration_ms": report.duration_ms,
        });
        writeln!(out, "{footer}")?;
        return Ok(report.passed());
    }
    let report = verify::run(campaign, &config)?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Tsv => write_report_tsv(&report, out)?,
        Format::Text => write_report_text(&report, out)?,
    }
    Ok(report.passed())
}

fn write_report_tsv(report: &VerificationReport, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "check\tparams\tpass\texpected_discrepancy\texpected\tactual\tcounterexample")?;
    for r in &report.records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.check,
            r.params,
            r.pass,
            r.expected_discrepancy,
            r.expected,
            r.actual,
            r.counterexample.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

fn record_line(r: &Record) -> String {
    let mut line = format!("{} {} {} {}", if r.pass { "PASS" } else { "FAIL" }, r.check, r.params, r.statement);
    if r.expected_discrepancy {
        line.push_str(" [expected discrepancy]");
    }
    if let Some(cx) = &r.counterexample {
        line.push_str(&format!("\n     counterexample: {cx}"));
    }
    line
}

fn write_report_text(report: &VerificationReport, out: &mut impl Write) -> io::Result<()> {
    for r in &report.records {
        writeln!(out, "{}", record_line(r))?;
    }
    let s = &report.summary;
    writeln!(
        out,
        "{}: {} ({} checks, {} passed, {} failed, {} expected discrepancies) in {} ms",
        report.campaign,
        if report.passed() { "pass" } else { "fail" },
        s.checks,
        s.passed,
        s.failed,
        s.expected_discrepancies,
        report.duration_ms
    )?;
    if let Some(cx) = &report.counterexample {
        writeln!(out, "first counterexample: {cx}")?;
    }
    Ok(())
}

enum Expansion {
    Q(QSeries),
    XQ(XQSeries),
}

fn need(value: Option<u32>, flag: &str) -> Result<u32> {
    value.with_context(|| format!("this builtin needs --{flag}"))
}

fn cmd_series(args: &SeriesArgs, format: Format, out: &mut impl Write) -> Result<bool> {
    if args.order > verify::MAX_SERIES_ORDER {
        bail!("order {} exceeds the limit {}", args.order, verify::MAX_SERIES_ORDER);
    }
    let order = args.order;
    let expansion = match (&args.expr, args.builtin) {
        (Some(text), _) => {
            let ast = qexpr::parse(text)?;
            if args.bivariate {
                Expansion::XQ(qexpr::eval_xq(&ast, text, order)?)
            } else {
                Expansion::Q(qexpr::eval(&ast, text, order)?)
            }
        }
        (None, Some(builtin)) => {
            let k = need(args.k, "k")?;
            match builtin {
                Builtin::W => Expansion::XQ(series::series_w(k, need(args.i, "i")?, order)?),
                Builtin::Dgen => Expansion::Q(series::dgen_product(k, need(args.i, "i")?, order)?),
                Builtin::Theta => Expansion::Q(series::bilateral_theta(k, need(args.i, "i")?, order)?),
                Builtin::J1 => Expansion::XQ(series::series_j_tilde_spec(k, 1, order)?),
            }
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    match (expansion, format) {
        (Expansion::Q(s), Format::Json) => {
            let coeffs: Vec<Value> = s.coeffs().iter().map(big).collect();
            writeln!(out, "{}", json!({"kind": "q", "order": s.order(), "coefficients": coeffs}))?;
        }
        (Expansion::XQ(s), Format::Json) => {
            let terms: Vec<Value> = s.triples().into_iter().map(|(m, n, c)| json!([m, n, big(c)])).collect();
            writeln!(out, "{}", json!({"kind": "xq", "order": s.order(), "terms": terms}))?;
        }
        (Expansion::Q(s), _) => write!(out, "{}", s.to_tsv())?,
        (Expansion::XQ(s), _) => write!(out, "{}", s.to_tsv())?,
    }
    Ok(true)
}

fn cmd_table(args: &TableArgs, format: Format, out: &mut impl Write) -> Result<bool> {
    let family: ConditionFamily = args.family.parse()?;
    if args.nmax > verify::MAX_ENUMERATION_N as usize {
        bail!("nmax {} exceeds the enumeration limit {}", args.nmax, verify::MAX_ENUMERATION_N);
    }
    let table = enumerate::count_table(family, args.k, args.i, args.mmax, args.nmax)?;
    let recurrence = if args.check_recurrence {
        if family != ConditionFamily::DMain {
            bail!("--check-recurrence applies to family D only");
        }
        if args.i == 0 {
            bail!("--check-recurrence needs 1 <= i <= k");
        }
        Some(verify::check_d_recurrence(args.k, args.i, args.mmax, args.nmax))
    } else {
        None
    };
    match format {
        Format::Json => {
            let mut cells = Vec::new();
            for n in 0..=table.nmax {
                for m in 0..=table.mmax {
                    cells.push(json!([m, n, table.at(m as i64, n as i64)]));
                }
            }
            let mut doc = json!({
                "family": family.name(),
                "k": table.k,
                "i": table.i,
                "mmax": table.mmax,
                "nmax": table.nmax,
                "cells": cells,
            });
            if let Some(r) = &recurrence {
                doc["recurrence"] = serde_json::to_value(r)?;
            }
            writeln!(out, "{doc}")?;
        }
        _ => {
            write!(out, "{}", table.to_tsv())?;
            if let Some(r) = &recurrence {
                writeln!(out, "# recurrence {}", record_line(r))?;
            }
        }
    }
    Ok(recurrence.map_or(true, |r| r.pass))
}

fn cmd_bijection(args: &BijectionArgs, format: Format, out: &mut impl Write) -> Result<bool> {
    let (k, i) = (args.k, args.i);
    if !(1..=k).contains(&i) {
        bail!("need 1 <= i <= k, got k={k}, i={i}");
    }
    if matches!(args.map, MapName::Chi | MapName::Iota) && i < 2 {
        bail!("this map is defined for 2 <= i <= k");
    }
    if args.nmax > i64::from(verify::MAX_ENUMERATION_N) || args.n.is_some_and(|n| n > i64::from(verify::MAX_ENUMERATION_N)) {
        bail!("weights above {} are out of range", verify::MAX_ENUMERATION_N);
    }
    let cells: Vec<(i64, i64)> = match (args.m, args.n) {
        (Some(m), Some(n)) => vec![(m, n)],
        _ => (0..=args.nmax).flat_map(|n| (0..=n).map(move |m| (m, n))).collect(),
    };
    let audit = |m, n| match args.map {
        MapName::Iota => bijections::audit_iota(k, i, m, n),
        MapName::Phi => bijections::audit_phi(k, i, m, n),
        MapName::Chi => bijections::audit_chi(k, i, m, n),
    };
    let audits: Vec<MapAudit> = cells.into_iter().map(|(m, n)| audit(m, n)).collect();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&audits)?)?,
        Format::Tsv => {
            writeln!(out, "map\tcell\tdomain\tcodomain\timage\tpassed\tcounterexample")?;
            for a in &audits {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    a.map,
                    a.cell,
                    a.domain,
                    a.codomain,
                    a.image,
                    a.passed,
                    a.counterexample.as_deref().unwrap_or("")
                )?;
            }
        }
        Format::Text => {
            for a in &audits {
                write!(
                    out,
                    "{} {} {} domain={} codomain={} image={}",
                    if a.passed { "PASS" } else { "FAIL" },
                    a.map,
                    a.cell,
                    a.domain,
                    a.codomain,
                    a.image
                )?;
                match &a.counterexample {
                    Some(cx) => writeln!(out, " counterexample: {cx}")?,
                    None => writeln!(out)?,
                }
            }
        }
    }
    Ok(audits.iter().all(|a| a.passed))
}

fn cmd_count(args: &CountArgs, format: Format, out: &mut impl Write) -> Result<bool> {
    if args.n > verify::MAX_ENUMERATION_N {
        bail!("n {} exceeds the enumeration limit {}", args.n, verify::MAX_ENUMERATION_N);
    }
    let family: AnyFamily = args.family.parse()?;
    let (k, i) = (args.k, args.i);
    let members: Vec<String> = match family {
        AnyFamily::Condition(f) => {
            f.check_params(i64::from(k), i64::from(i))?;
            let stream = if f.partitions_only() {
                enumerate::partitions_of(args.n, args.m)
            } else {
                enumerate::overpartitions_of(args.n, args.m)
            };
            let mut members = Vec::new();
            for lambda in stream {
                if enumerate::satisfies(f, k, i, &lambda)? {
                    members.push(lambda.to_string());
                }
            }
            members
        }
        AnyFamily::Residue(f) => {
            let rule = f.rule(k, i)?;
            enumerate::overpartitions_of(args.n, args.m)
                .filter(|lambda| lambda.parts().iter().all(|&p| rule.allows(p)))
                .map(|lambda| lambda.to_string())
                .collect()
        }
    };
    match format {
        Format::Json => {
            let mut doc = json!({"family": args.family, "k": k, "i": i, "n": args.n, "m": args.m, "count": members.len()});
            if args.list {
                doc["members"] = json!(members);
            }
            writeln!(out, "{doc}")?;
        }
        _ => {
            if args.list {
                for m in &members {
                    writeln!(out, "{m}")?;
                }
            } else {
                writeln!(out, "{}", members.len())?;
            }
        }
    }
    Ok(true)
}
