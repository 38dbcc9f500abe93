//! Verification campaigns and their reports.
//!
//! A campaign expands into independent checks (one per `(k, i, n)` cell for
//! count identities, one per `(k, i)` for series and table identities). The
//! checks run on the current rayon pool; records are always assembled in
//! canonical order, so a report does not depend on the degree of parallelism.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::bijections::{self, CellKind, CellSpec, MapAudit};
use crate::enumerate::{self, count_condition_unchecked, count_restricted, ConditionFamily, CountTable, ResidueFamily};
use crate::qexpr;
use crate::series::{self, QSeries, XQSeries};

pub const SCHEMA: u32 = 1;

/// Largest weight an enumeration campaign accepts.
pub const MAX_ENUMERATION_N: u32 = 60;
/// Largest truncation order a series campaign accepts.
pub const MAX_SERIES_ORDER: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("unknown theorem `{0}` (expected one of: {})", Campaign::names().join(", "))]
    UnknownTheorem(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Campaign {
    Gordon,
    Bressoud,
    LovejoyB,
    LovejoyD,
    Css,
    Clm,
    Main,
    WRecurrence,
    DRecurrence,
    Decomposition,
    Phi,
    Chi,
    Jtp,
    Genfun,
    RingLaws,
    ParserFuzz,
}

impl Campaign {
    pub const ALL: [Campaign; 16] = [
        Campaign::Gordon,
        Campaign::Bressoud,
        Campaign::LovejoyB,
        Campaign::LovejoyD,
        Campaign::Css,
        Campaign::Clm,
        Campaign::Main,
        Campaign::WRecurrence,
        Campaign::DRecurrence,
        Campaign::Decomposition,
        Campaign::Phi,
        Campaign::Chi,
        Campaign::Jtp,
        Campaign::Genfun,
        Campaign::RingLaws,
        Campaign::ParserFuzz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::Gordon => "gordon",
            Campaign::Bressoud => "bressoud",
            Campaign::LovejoyB => "lovejoy-b",
            Campaign::LovejoyD => "lovejoy-d",
            Campaign::Css => "css",
            Campaign::Clm => "clm",
            Campaign::Main => "main",
            Campaign::WRecurrence => "w-recurrence",
            Campaign::DRecurrence => "d-recurrence",
            Campaign::Decomposition => "decomposition",
            Campaign::Phi => "phi",
            Campaign::Chi => "chi",
            Campaign::Jtp => "jtp",
            Campaign::Genfun => "genfun",
            Campaign::RingLaws => "ring-laws",
            Campaign::ParserFuzz => "parser-fuzz",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|c| c.name()).collect()
    }

    /// The count identity behind a count campaign.
    fn families(self) -> Option<(ConditionFamily, ResidueFamily)> {
        let cond = match self {
            Campaign::Gordon => ConditionFamily::FGordon,
            Campaign::Bressoud => ConditionFamily::BBressoud,
            Campaign::LovejoyB => ConditionFamily::BbarLovejoy,
            Campaign::LovejoyD => ConditionFamily::DbarLovejoy,
            Campaign::Css => ConditionFamily::PCss,
            Campaign::Clm => ConditionFamily::B3Clm,
            Campaign::Main => ConditionFamily::DMain,
            _ => return None,
        };
        Some((cond, cond.residue_partner()))
    }

    /// Campaigns whose identity is known to fail at `k = 1`; that range is
    /// skipped unless requested.
    pub fn degenerate_at_k1(self) -> bool {
        matches!(
            self,
            Campaign::Main
                | Campaign::Clm
                | Campaign::LovejoyD
                | Campaign::Genfun
                | Campaign::DRecurrence
                | Campaign::Decomposition
        )
    }

    fn enumerates(self) -> bool {
        !matches!(self, Campaign::WRecurrence | Campaign::Jtp | Campaign::RingLaws | Campaign::ParserFuzz)
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Campaign {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| VerifyError::UnknownTheorem(s.to_string()))
    }
}

impl Serialize for Campaign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Campaign bounds. `mmax` defaults to `nmax`; `order` (series truncation)
/// defaults to `nmax`; `samples` defaults per campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Config {
    pub kmax: u32,
    pub nmax: u32,
    pub mmax: Option<u32>,
    pub order: Option<usize>,
    pub include_i_equals_k: bool,
    pub include_k_equals_1: bool,
    pub seed: u64,
    pub samples: Option<usize>,
}

impl Config {
    pub fn new(kmax: u32, nmax: u32) -> Self {
        Config {
            kmax,
            nmax,
            mmax: None,
            order: None,
            include_i_equals_k: false,
            include_k_equals_1: false,
            seed: 0,
            samples: None,
        }
    }

    fn mmax(&self) -> usize {
        self.mmax.unwrap_or(self.nmax) as usize
    }

    fn order(&self) -> usize {
        self.order.unwrap_or(self.nmax as usize)
    }
}

/// Named integer parameters, serialized as a map in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Params(pub Vec<(&'static str, i64)>);

impl Params {
    pub fn get(&self, key: &str) -> Option<i64> {
        self.0.iter().find(|(k, _)| *k == key).map(|&(_, v)| v)
    }
}

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub check: String,
    pub params: Params,
    pub statement: String,
    pub expected_source: String,
    pub expected: String,
    pub actual_source: String,
    pub actual: String,
    pub pass: bool,
    /// A failure inside a range where the identity is known not to hold.
    pub expected_discrepancy: bool,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub expected_discrepancies: usize,
}

impl Summary {
    fn of(records: &[Record]) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        Summary {
            checks: records.len(),
            passed,
            failed: records.len() - passed,
            expected_discrepancies: records.iter().filter(|r| r.expected_discrepancy).count(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub campaign: Campaign,
    pub parameters: Config,
    pub records: Vec<Record>,
    pub summary: Summary,
    pub status: Status,
    /// Counterexample of the first failing record in canonical order.
    pub counterexample: Option<String>,
    pub duration_ms: u64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }
}

type Task = Box<dyn Fn() -> Vec<Record> + Send + Sync>;

pub fn run(campaign: Campaign, config: &Config) -> Result<VerificationReport, VerifyError> {
    run_with(campaign, config, |_| {})
}

/// Runs a campaign, handing each record to `sink` in canonical order as soon
/// as it and all its predecessors are done.
pub fn run_with<F: FnMut(&Record)>(
    campaign: Campaign,
    config: &Config,
    mut sink: F,
) -> Result<VerificationReport, VerifyError> {
    validate(campaign, config)?;
    let start = Instant::now();
    let tasks = plan(campaign, config);
    let batch = rayon::current_num_threads().max(1) * 4;
    let mut records = Vec::new();
    for chunk in tasks.chunks(batch) {
        let done: Vec<Vec<Record>> = chunk.par_iter().map(|task| task()).collect();
        for r in done.into_iter().flatten() {
            sink(&r);
            records.push(r);
        }
    }
    let summary = Summary::of(&records);
    let counterexample = records.iter().find(|r| !r.pass).and_then(|r| r.counterexample.clone());
    Ok(VerificationReport {
        schema: SCHEMA,
        campaign,
        parameters: config.clone(),
        status: if summary.failed == 0 { Status::Pass } else { Status::Fail },
        records,
        summary,
        counterexample,
        duration_ms: start.elapsed().as_millis() as u64,
    })
}

fn validate(campaign: Campaign, config: &Config) -> Result<(), VerifyError> {
    if campaign.enumerates() && config.nmax > MAX_ENUMERATION_N {
        return Err(VerifyError::InvalidBounds(format!(
            "nmax {} exceeds the enumeration limit {MAX_ENUMERATION_N}",
            config.nmax
        )));
    }
    if config.order() > MAX_SERIES_ORDER {
        return Err(VerifyError::InvalidBounds(format!(
            "order {} exceeds the series limit {MAX_SERIES_ORDER}",
            config.order()
        )));
    }
    if config.kmax > 1000 {
        return Err(VerifyError::InvalidBounds(format!("kmax {} is too large", config.kmax)));
    }
    if config.samples.is_some_and(|s| s > 10_000_000) {
        return Err(VerifyError::InvalidBounds("samples must be at most 10^7".into()));
    }
    Ok(())
}

/// `(k, i)` pairs in canonical order with `lo <= i <= k <= kmax`.
fn pairs(campaign: Campaign, config: &Config, lo: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for k in 1..=config.kmax {
        if k == 1 && campaign.degenerate_at_k1() && !config.include_k_equals_1 {
            continue;
        }
        for i in lo..=k {
            out.push((k, i));
        }
    }
    out
}

fn discrepant(campaign: Campaign, k: u32) -> bool {
    k == 1 && campaign.degenerate_at_k1()
}

fn plan(campaign: Campaign, config: &Config) -> Vec<Task> {
    if let Some((cond, res)) = campaign.families() {
        return count_tasks(campaign, cond, res, config);
    }
    match campaign {
        Campaign::WRecurrence => per_pair(pairs(campaign, config, 1), config, w_recurrence),
        Campaign::DRecurrence => per_pair(pairs(campaign, config, 1), config, d_recurrence),
        Campaign::Decomposition => per_pair(pairs(campaign, config, 1), config, decomposition),
        Campaign::Phi => per_pair(pairs(campaign, config, 1), config, |k, i, c| vec![map_check("phi", k, i, c)]),
        Campaign::Chi => per_pair(pairs(campaign, config, 2), config, |k, i, c| vec![map_check("chi", k, i, c)]),
        Campaign::Jtp => per_pair(pairs(campaign, config, 1), config, jtp),
        Campaign::Genfun => per_pair(pairs(campaign, config, 1), config, genfun),
        Campaign::RingLaws => {
            let config = config.clone();
            vec![Box::new(move || ring_laws(&config))]
        }
        Campaign::ParserFuzz => {
            let config = config.clone();
            vec![Box::new(move || parser_fuzz(&config))]
        }
        _ => unreachable!("count campaigns are handled above"),
    }
}

fn per_pair(
    pairs: Vec<(u32, u32)>,
    config: &Config,
    check: fn(u32, u32, &Config) -> Vec<Record>,
) -> Vec<Task> {
    pairs
        .into_iter()
        .map(|(k, i)| {
            let config = config.clone();
            Box::new(move || check(k, i, &config)) as Task
        })
        .collect()
}

fn count_tasks(campaign: Campaign, cond: ConditionFamily, res: ResidueFamily, config: &Config) -> Vec<Task> {
    let mut cells = Vec::new();
    for k in 1..=config.kmax {
        if k == 1 && campaign.degenerate_at_k1() && !config.include_k_equals_1 {
            continue;
        }
        let is: Vec<u32> = if cond.single_index() {
            vec![1]
        } else if campaign == Campaign::Bressoud && !config.include_i_equals_k {
            (1..k).collect()
        } else {
            (1..=k).collect()
        };
        for i in is {
            for n in 0..=config.nmax {
                cells.push((k, i, n));
            }
        }
    }
    cells
        .into_iter()
        .map(|(k, i, n)| {
            let discrepancy = discrepant(campaign, k) || (campaign == Campaign::Bressoud && i == k);
            Box::new(move || vec![count_cell(cond, res, k, i, n, discrepancy)]) as Task
        })
        .collect()
}

fn count_cell(cond: ConditionFamily, res: ResidueFamily, k: u32, i: u32, n: u32, discrepancy: bool) -> Record {
    let single = cond.single_index();
    let index = if single { format!("{k}") } else { format!("{k},{i}") };
    let expected = count_restricted(n, &res.rule_unchecked(k, i));
    let actual = count_condition_unchecked(cond, k, i, n, None);
    let (rn, cn) = (res.name(), cond.name());
    let pass = expected == actual;
    let statement = if pass {
        format!("{rn}_{{{index}}}({n})={cn}_{{{index}}}({n})={expected}")
    } else {
        format!("{rn}_{{{index}}}({n})={expected}, {cn}_{{{index}}}({n})={actual}")
    };
    let params = if single {
        Params(vec![("k", i64::from(k)), ("n", i64::from(n))])
    } else {
        Params(vec![("k", i64::from(k)), ("i", i64::from(i)), ("n", i64::from(n))])
    };
    let counterexample = (!pass).then(|| {
        let names = if single { "(k,n)" } else { "(k,i,n)" };
        let values = if single { format!("({k},{n})") } else { format!("({k},{i},{n})") };
        format!("{names}={values}: {rn}={expected}, {cn}={actual}")
    });
    Record {
        check: format!("{rn}={cn}"),
        params,
        statement,
        expected_source: format!("residue count {rn}"),
        expected: expected.to_string(),
        actual_source: format!("condition count {cn}"),
        actual: actual.to_string(),
        pass,
        expected_discrepancy: discrepancy && !pass,
        counterexample,
    }
}

fn ki(k: u32, i: u32) -> Params {
    Params(vec![("k", i64::from(k)), ("i", i64::from(i))])
}

/// A `(k, i)`-level record comparing two sides that are summarized as text.
#[allow(clippy::too_many_arguments)]
fn pair_record(
    check: &str,
    k: u32,
    i: u32,
    discrepancy: bool,
    expected_source: String,
    expected: String,
    actual_source: String,
    actual: String,
    counterexample: Option<String>,
) -> Record {
    let pass = counterexample.is_none();
    let statement = if pass {
        format!("{check} holds at (k,i)=({k},{i})")
    } else {
        format!("{check} fails at (k,i)=({k},{i})")
    };
    Record {
        check: check.to_string(),
        params: ki(k, i),
        statement,
        expected_source,
        expected,
        actual_source,
        actual,
        pass,
        expected_discrepancy: discrepancy && !pass,
        counterexample,
    }
}

fn first_q_diff(a: &QSeries, b: &QSeries) -> Option<(usize, BigInt, BigInt)> {
    (0..=a.order().min(b.order()))
        .find(|&n| a.coeff(n) != b.coeff(n))
        .map(|n| (n, a.coeff(n).clone(), b.coeff(n).clone()))
}

fn first_xq_diff(a: &XQSeries, b: &XQSeries) -> Option<(usize, usize, BigInt, BigInt)> {
    for n in 0..=a.order().min(b.order()) {
        let deg = a.q_coeff(n).len().max(b.q_coeff(n).len());
        if let Some(m) = (0..deg).find(|&m| a.coeff(m, n) != b.coeff(m, n)) {
            return Some((m, n, a.coeff(m, n), b.coeff(m, n)));
        }
    }
    None
}

/// Compares two q-series and builds the value/counterexample fields.
fn compare_q(a: &QSeries, b: &QSeries, label: &str) -> (String, String, Option<String>) {
    match first_q_diff(a, b) {
        None => {
            let same = format!("equal through q^{}", a.order());
            (same.clone(), same, None)
        }
        Some((n, x, y)) => (
            format!("[q^{n}] = {x}"),
            format!("[q^{n}] = {y}"),
            Some(format!("{label}: coefficient of q^{n} is {x} vs {y}")),
        ),
    }
}

fn compare_xq(a: &XQSeries, b: &XQSeries, label: &str) -> (String, String, Option<String>) {
    match first_xq_diff(a, b) {
        None => {
            let same = format!("equal through q^{}", a.order());
            (same.clone(), same, None)
        }
        Some((m, n, x, y)) => (
            format!("[x^{m} q^{n}] = {x}"),
            format!("[x^{m} q^{n}] = {y}"),
            Some(format!("{label}: coefficient of x^{m} q^{n} is {x} vs {y}")),
        ),
    }
}

fn series_failure(check: &str, k: u32, i: u32, err: impl fmt::Display) -> Vec<Record> {
    let msg = err.to_string();
    vec![pair_record(check, k, i, false, "series".into(), msg.clone(), "series".into(), msg.clone(), Some(msg))]
}

fn w_recurrence(k: u32, i: u32, config: &Config) -> Vec<Record> {
    let order = config.order();
    let sides = (|| {
        let lhs = &series::series_w(k, i, order)? - &series::series_w(k, i - 1, order)?;
        let inner = series::series_w(k, k - i, order)?.substitute_xq();
        let shifted = inner.shifted(false, i - 1, (i - 1) as usize);
        let rhs = &shifted + &shifted.shifted(false, 1, 1);
        Ok::<_, series::SeriesError>((lhs, rhs))
    })();
    let (lhs, rhs) = match sides {
        Ok(s) => s,
        Err(e) => return series_failure("W-recurrence", k, i, e),
    };
    let label = format!("(k,i)=({k},{i})");
    let (expected, actual, cx) = compare_xq(&rhs, &lhs, &label);
    vec![pair_record(
        "W-recurrence",
        k,
        i,
        false,
        "(1+xq)(xq)^(i-1) W_{k,k-i}(xq;q)".into(),
        expected,
        "W_{k,i}(x;q) - W_{k,i-1}(x;q)".into(),
        actual,
        cx,
    )]
}

fn d_tables(k: u32, i: u32, mmax: usize, nmax: usize) -> (CountTable, CountTable, CountTable) {
    let table = |j: u32| {
        enumerate::count_table(ConditionFamily::DMain, k, j, mmax, nmax).expect("admissible table parameters")
    };
    (table(i), table(i - 1), table(k - i))
}

fn d_recurrence(k: u32, i: u32, config: &Config) -> Vec<Record> {
    vec![check_d_recurrence(k, i, config.mmax(), config.nmax as usize)]
}

/// Checks `D_{k,i}(m,n) - D_{k,i-1}(m,n) = D_{k,k-i}(m-i,n-m) + D_{k,k-i}(m-i+1,n-m)`
/// on every cell `m <= mmax`, `n <= nmax`. Requires `1 <= i <= k`.
pub fn check_d_recurrence(k: u32, i: u32, mmax: usize, nmax: usize) -> Record {
    let (di, dprev, dcomp) = d_tables(k, i, mmax + 1, nmax);
    let (i64k, i) = (i64::from(k), i64::from(i));
    let mut cells = 0u64;
    let mut cx = None;
    'outer: for n in 0..=nmax as i64 {
        for m in 0..=mmax as i64 {
            cells += 1;
            let lhs = di.at(m, n) as i64 - dprev.at(m, n) as i64;
            let rhs = (dcomp.at(m - i, n - m) + dcomp.at(m - i + 1, n - m)) as i64;
            if lhs != rhs {
                cx = Some(format!(
                    "(k,i,m,n)=({i64k},{i},{m},{n}): D_{{k,i}}-D_{{k,i-1}}={lhs}, D_{{k,k-i}}(m-i,n-m)+D_{{k,k-i}}(m-i+1,n-m)={rhs}"
                ));
                break 'outer;
            }
        }
    }
    let value = if cx.is_none() { format!("{cells} cells agree") } else { "mismatch".to_string() };
    pair_record(
        "D-recurrence",
        k,
        i as u32,
        discrepant(Campaign::DRecurrence, k),
        "D_{k,k-i}(m-i,n-m) + D_{k,k-i}(m-i+1,n-m)".into(),
        value.clone(),
        "D_{k,i}(m,n) - D_{k,i-1}(m,n)".into(),
        value,
        cx,
    )
}

fn decomposition(k: u32, i: u32, config: &Config) -> Vec<Record> {
    let (mmax, nmax) = (config.mmax().min(config.nmax as usize), config.nmax as usize);
    let (di, dprev, dcomp) = d_tables(k, i, mmax + 1, nmax);
    let discrepancy = discrepant(Campaign::Decomposition, k);
    let mut split_cx = None;
    let mut s_cx = None;
    let mut t_cx = None;
    let mut cells = 0u64;
    for n in 0..=nmax as i64 {
        for m in 0..=(mmax as i64).min(n) {
            cells += 1;
            let s = bijections::card(&CellSpec::new(CellKind::S, k, i, m, n));
            let t = bijections::card(&CellSpec::new(CellKind::T, k, i, m, n));
            let cell = format!("(k,i,m,n)=({k},{i},{m},{n})");
            let diff = di.at(m, n) as i64 - dprev.at(m, n) as i64;
            if split_cx.is_none() && diff != (s + t) as i64 {
                split_cx = Some(format!("{cell}: D_{{k,i}}-D_{{k,i-1}}={diff}, cardS+cardT={}", s + t));
            }
            let is = i64::from(i);
            let ds = dcomp.at(m - is, n - m);
            if s_cx.is_none() && s != ds {
                s_cx = Some(format!("{cell}: cardS={s}, D_{{k,k-i}}(m-i,n-m)={ds}"));
            }
            let dt = dcomp.at(m - is + 1, n - m);
            if t_cx.is_none() && t != dt {
                t_cx = Some(format!("{cell}: cardT={t}, D_{{k,k-i}}(m-i+1,n-m)={dt}"));
            }
        }
    }
    let summary = |cx: &Option<String>| if cx.is_none() { format!("{cells} cells agree") } else { "mismatch".into() };
    let mut out = vec![
        pair_record(
            "decomposition",
            k,
            i,
            discrepancy,
            "cardS + cardT".into(),
            summary(&split_cx),
            "D_{k,i}(m,n) - D_{k,i-1}(m,n)".into(),
            summary(&split_cx),
            split_cx.clone(),
        ),
        pair_record(
            "cardS",
            k,
            i,
            discrepancy,
            "D_{k,k-i}(m-i,n-m)".into(),
            summary(&s_cx),
            "|S_{k,i}(m,n)|".into(),
            summary(&s_cx),
            s_cx.clone(),
        ),
        pair_record(
            "cardT",
            k,
            i,
            discrepancy,
            "D_{k,k-i}(m-i+1,n-m)".into(),
            summary(&t_cx),
            "|T_{k,i}(m,n)|".into(),
            summary(&t_cx),
            t_cx.clone(),
        ),
    ];
    if i >= 2 {
        out.push(map_check("iota", k, i, config));
    }
    out
}

/// Aggregates per-cell audits of one map over all cells `m <= n <= nmax`.
fn map_check(map: &str, k: u32, i: u32, config: &Config) -> Record {
    let (mmax, nmax) = (config.mmax() as i64, i64::from(config.nmax));
    let mut domain = 0usize;
    let mut image = 0usize;
    let mut codomain = 0usize;
    let mut cx = None;
    for n in 0..=nmax {
        for m in 0..=mmax.min(n) {
            let audit: MapAudit = match map {
                "phi" => bijections::audit_phi(k, i, m, n),
                "chi" => bijections::audit_chi(k, i, m, n),
                _ => bijections::audit_iota(k, i, m, n),
            };
            domain += audit.domain;
            image += audit.image;
            codomain += audit.codomain;
            if !audit.passed && cx.is_none() {
                cx = Some(format!(
                    "{}: {}",
                    audit.cell,
                    audit.counterexample.clone().unwrap_or_else(|| "audit failed".into())
                ));
            }
        }
    }
    let target = match map {
        "phi" => "U_{k,k-i}(m-i,n-m)",
        "chi" => "U_{k,k-i}(m-i+1,n-m)",
        _ => "U_{k,i}(m,n) \\ (S u T)",
    };
    let source = match map {
        "phi" => "S_{k,i}(m,n)",
        "chi" => "T_{k,i}(m,n)",
        _ => "U_{k,i-1}(m,n)",
    };
    pair_record(
        map,
        k,
        i,
        false,
        format!("target {target}"),
        format!("{codomain} elements"),
        format!("image of {source} ({domain} elements)"),
        format!("{image} elements"),
        cx,
    )
}

fn jtp(k: u32, i: u32, config: &Config) -> Vec<Record> {
    let order = config.order();
    let sides = (|| {
        let bilateral = series::bilateral_theta(k, i, order)?;
        let product = series::theta_product(k, i, order)?;
        let (a, b) = series::unilateral_theta_pair(k, i, order)?;
        Ok::<_, series::SeriesError>((bilateral, product, &a + &b))
    })();
    let (bilateral, product, unfolded) = match sides {
        Ok(s) => s,
        Err(e) => return series_failure("JTP", k, i, e),
    };
    let label = format!("(k,i)=({k},{i})");
    let (e1, a1, cx1) = compare_q(&product, &bilateral, &label);
    let (e2, a2, cx2) = compare_q(&bilateral, &unfolded, &label);
    let (e3, a3, cx3) = compare_q(&product, &unfolded, &label);
    vec![
        pair_record(
            "JTP",
            k,
            i,
            false,
            "(q^i,q^(M-i),q^M;q^M)_inf".into(),
            e1,
            "bilateral theta sum".into(),
            a1,
            cx1,
        ),
        pair_record("theta-unfolding", k, i, false, "bilateral theta sum".into(), e2, "two one-sided sums".into(), a2, cx2),
        pair_record(
            "theta-unfolding-product",
            k,
            i,
            false,
            "(q^i,q^(M-i),q^M;q^M)_inf".into(),
            e3,
            "two one-sided sums".into(),
            a3,
            cx3,
        ),
    ]
}

fn genfun(k: u32, i: u32, config: &Config) -> Vec<Record> {
    let discrepancy = discrepant(Campaign::Genfun, k);
    let nmax = config.nmax as usize;
    let order = config.order();
    let label = format!("(k,i)=({k},{i})");
    let mut out = Vec::new();

    let table = enumerate::count_table(ConditionFamily::DMain, k, i, nmax, nmax).expect("admissible");
    match series::series_w(k, i, nmax) {
        Ok(w) => {
            let enumerated = XQSeries::from_triples(
                nmax,
                (0..=nmax).flat_map(|m| (0..=nmax).map(move |n| (m, n))).map(|(m, n)| (m, n, table.at(m as i64, n as i64))),
            );
            let (e, a, cx) = compare_xq(&enumerated, &w, &label);
            out.push(pair_record(
                "W=D(m,n)",
                k,
                i,
                discrepancy,
                "enumerated D_{k,i}(m,n)".into(),
                e,
                "[x^m q^n] W_{k,i}(x;q)".into(),
                a,
                cx,
            ));
        }
        Err(e) => out.extend(series_failure("W=D(m,n)", k, i, e)),
    }

    let sides = (|| {
        let w1 = series::gen_d(k, i, order)?;
        let rule = ResidueFamily::CMain.rule_unchecked(k, i);
        let residue = series::residue_product(rule.modulus(), &rule.allowed_plain(), &rule.allowed_overlined(), order)?;
        let product = series::dgen_product(k, i, order)?;
        Ok::<_, series::SeriesError>((w1, residue, product))
    })();
    match sides {
        Ok((w1, residue, product)) => {
            let (e, a, cx) = compare_q(&residue, &w1, &label);
            out.push(pair_record(
                "W(1)=C",
                k,
                i,
                discrepancy,
                "residue product for C_{k,i}".into(),
                e,
                "W_{k,i}(1;q)".into(),
                a,
                cx,
            ));
            let (e, a, cx) = compare_q(&product, &w1, &label);
            out.push(pair_record(
                "W(1)=Dgen",
                k,
                i,
                discrepancy,
                "(q^i,q^(M-i),q^M;q^M)_inf (-q;q)_inf / (q;q)_inf".into(),
                e,
                "W_{k,i}(1;q)".into(),
                a,
                cx,
            ));
        }
        Err(e) => out.extend(series_failure("W(1)=C", k, i, e)),
    }
    out
}

fn random_q(rng: &mut ChaCha8Rng, order: usize, unit: bool) -> QSeries {
    let mut s = QSeries::from_coeffs(order, (0..=order).map(|_| rng.gen_range(-3i64..=3)));
    if unit {
        let c0 = if rng.gen_bool(0.5) { 1 } else { -1 };
        s = &s + &QSeries::from_coeffs(order, [c0 - i64::try_from(s.coeff(0)).unwrap_or(0)]);
    }
    s
}

fn random_xq(rng: &mut ChaCha8Rng, order: usize, unit: bool) -> XQSeries {
    let mut triples = Vec::new();
    for n in 0..=order {
        for m in 0..=n {
            triples.push((m, n, rng.gen_range(-2i64..=2)));
        }
    }
    if unit {
        triples[0].2 = if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    XQSeries::from_triples(order, triples)
}

fn law_record(law: &str, samples: usize, failure: Option<String>) -> Record {
    let pass = failure.is_none();
    let held = if pass { samples.to_string() } else { "fewer".into() };
    Record {
        check: law.to_string(),
        params: Params(vec![("samples", samples as i64)]),
        statement: format!("{law} on {samples} random samples"),
        expected_source: "ring axioms".into(),
        expected: format!("{samples} samples satisfy the law"),
        actual_source: "series arithmetic".into(),
        actual: format!("{held} samples satisfy the law"),
        pass,
        expected_discrepancy: false,
        counterexample: failure,
    }
}

fn ring_laws(config: &Config) -> Vec<Record> {
    let order = config.order().max(1);
    let samples = config.samples.unwrap_or(64);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    type Law = (&'static str, Box<dyn Fn(&mut ChaCha8Rng) -> bool>);
    let laws: Vec<Law> = vec![
        ("add-commutative", Box::new(move |r| {
            let (a, b) = (random_q(r, order, false), random_q(r, order, false));
            &a + &b == &b + &a
        })),
        ("add-associative", Box::new(move |r| {
            let (a, b, c) = (random_q(r, order, false), random_q(r, order, false), random_q(r, order, false));
            &(&a + &b) + &c == &a + &(&b + &c)
        })),
        ("additive-inverse", Box::new(move |r| {
            let a = random_q(r, order, false);
            (&a + &(-&a)).is_zero() && (&a - &a).is_zero()
        })),
        ("mul-commutative", Box::new(move |r| {
            let (a, b) = (random_q(r, order, false), random_q(r, order, false));
            &a * &b == &b * &a
        })),
        ("mul-associative", Box::new(move |r| {
            let (a, b, c) = (random_q(r, order, false), random_q(r, order, false), random_q(r, order, false));
            &(&a * &b) * &c == &a * &(&b * &c)
        })),
        ("mul-identity", Box::new(move |r| {
            let a = random_q(r, order, false);
            &a * &QSeries::one(order) == a
        })),
        ("distributive", Box::new(move |r| {
            let (a, b, c) = (random_q(r, order, false), random_q(r, order, false), random_q(r, order, false));
            &a * &(&b + &c) == &(&a * &b) + &(&a * &c)
        })),
        ("inverse", Box::new(move |r| {
            let a = random_q(r, order, true);
            a.invert().is_ok_and(|inv| &a * &inv == QSeries::one(order))
        })),
        ("division", Box::new(move |r| {
            let (a, b) = (random_q(r, order, false), random_q(r, order, true));
            a.checked_div(&b).is_ok_and(|d| &d * &b == a)
        })),
        ("power-law", Box::new(move |r| {
            let a = random_q(r, order, true);
            let (j, l) = (r.gen_range(-4i64..=4), r.gen_range(-4i64..=4));
            match (a.pow(j), a.pow(l), a.pow(j + l)) {
                (Ok(x), Ok(y), Ok(z)) => &x * &y == z,
                _ => false,
            }
        })),
        ("xq-mul-associative", Box::new(move |r| {
            let (a, b, c) = (random_xq(r, order, false), random_xq(r, order, false), random_xq(r, order, false));
            &(&a * &b) * &c == &a * &(&b * &c)
        })),
        ("xq-distributive", Box::new(move |r| {
            let (a, b, c) = (random_xq(r, order, false), random_xq(r, order, false), random_xq(r, order, false));
            &a * &(&b + &c) == &(&a * &b) + &(&a * &c)
        })),
        ("xq-inverse", Box::new(move |r| {
            let a = random_xq(r, order, true);
            a.invert().is_ok_and(|inv| &a * &inv == XQSeries::one(order))
        })),
        ("xq-degree-bound", Box::new(move |r| {
            let (a, b) = (random_xq(r, order, true), random_xq(r, order, false));
            (&a * &b).respects_degree_bound() && a.invert().is_ok_and(|inv| inv.respects_degree_bound())
        })),
        ("x=1-homomorphism", Box::new(move |r| {
            let (a, b) = (random_xq(r, order, false), random_xq(r, order, false));
            (&a * &b).at_x_one() == &a.at_x_one() * &b.at_x_one()
        })),
        ("x->xq-homomorphism", Box::new(move |r| {
            let (a, b) = (random_xq(r, order, false), random_xq(r, order, false));
            (&a * &b).substitute_xq() == &a.substitute_xq() * &b.substitute_xq()
        })),
    ];
    laws.iter()
        .map(|(name, law)| {
            let failure = (0..samples)
                .find(|_| !law(&mut rng))
                .map(|s| format!("sample {s} (seed {}, order {order}) violates {name}", config.seed));
            law_record(name, samples, failure)
        })
        .collect()
}

const FUZZ_TOKENS: &[&str] = &[
    "(", ")", ",", ";", "*", "/", "^", "-", "_", "x", "q", "inf", "∞", "_inf", "1", "2", "0", "17", " ", "\n",
    "(q;q)_inf", "(-q;q)_inf", "q^", "x^2", "y", "99999999999999999999", "9223372036854775807", "_3", "^-1",
];

/// A random token soup, biased toward well-formed fragments.
pub fn fuzz_input(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(0..24);
    (0..len).map(|_| FUZZ_TOKENS[rng.gen_range(0..FUZZ_TOKENS.len())]).collect()
}

/// Whether `pos` points into `text` (or just past its last character).
fn position_in(text: &str, pos: qexpr::Position) -> bool {
    let lines: Vec<&str> = text.split('\n').collect();
    pos.line >= 1 && pos.line <= lines.len() && pos.column >= 1 && pos.column <= lines[pos.line - 1].chars().count() + 1
}

/// Parses and evaluates one input; `Err` describes a totality violation.
pub fn fuzz_one(text: &str) -> Result<bool, String> {
    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<bool, String> {
        match qexpr::parse(text) {
            Err(e) => {
                if position_in(text, e.position()) {
                    Ok(false)
                } else {
                    Err(format!("error position {} outside input: {e}", e.position()))
                }
            }
            Ok(ast) => {
                let printed = qexpr::unparse(&ast);
                match qexpr::parse(&printed) {
                    Ok(again) if again == ast => {}
                    _ => return Err(format!("unparse round-trip failed: {printed:?}")),
                }
                for e in [qexpr::eval(&ast, text, 8).err(), qexpr::eval_xq(&ast, text, 8).err()].into_iter().flatten() {
                    if !position_in(text, e.position()) {
                        return Err(format!("evaluation error position {} outside input: {e}", e.position()));
                    }
                }
                Ok(true)
            }
        }
    }));
    outcome.unwrap_or_else(|_| Err("panic".into()))
}

fn parser_fuzz(config: &Config) -> Vec<Record> {
    let samples = config.samples.unwrap_or(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let inputs: Vec<String> = (0..samples).map(|_| fuzz_input(&mut rng)).collect();
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let results: Vec<Result<bool, String>> = inputs.par_iter().map(|t| fuzz_one(t)).collect();
    std::panic::set_hook(hook);
    let parsed = results.iter().filter(|r| matches!(r, Ok(true))).count();
    let failure = results
        .iter()
        .zip(&inputs)
        .find_map(|(r, t)| r.as_ref().err().map(|e| format!("input {t:?}: {e}")));
    let pass = failure.is_none();
    vec![Record {
        check: "parser-totality".into(),
        params: Params(vec![("samples", samples as i64), ("seed", config.seed as i64)]),
        statement: format!("{samples} random inputs: {parsed} parsed, {} rejected with positioned errors", samples - parsed),
        expected_source: "no panics, positioned errors, round-trip".into(),
        expected: format!("{samples} inputs handled"),
        actual_source: "qexpr parse/unparse/eval".into(),
        actual: if pass { format!("{samples} inputs handled") } else { "violation".into() },
        pass,
        expected_discrepancy: false,
        counterexample: failure,
    }]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(kmax: u32, nmax: u32) -> Config {
        Config::new(kmax, nmax)
    }

    #[test]
    fn campaign_names_round_trip() {
        for c in Campaign::ALL {
            assert_eq!(c.name().parse::<Campaign>().unwrap(), c);
        }
        assert!(matches!("nope".parse::<Campaign>(), Err(VerifyError::UnknownTheorem(_))));
    }

    #[test]
    fn main_small() {
        let report = run(Campaign::Main, &config(3, 12)).unwrap();
        assert!(report.passed(), "{:?}", report.counterexample);
        let rec = report
            .records
            .iter()
            .find(|r| r.params.0 == vec![("k", 3), ("i", 2), ("n", 2)])
            .unwrap();
        assert_eq!(rec.statement, "C_{3,2}(2)=D_{3,2}(2)=3");
        assert_eq!(report.summary.checks, 5 * 13);
    }

    #[test]
    fn vacuous_campaign() {
        let report = run(Campaign::Main, &config(0, 0)).unwrap();
        assert!(report.passed());
        assert!(report.records.is_empty());
    }

    #[test]
    fn bressoud_edge() {
        let mut c = config(2, 4);
        assert!(run(Campaign::Bressoud, &c).unwrap().passed());
        c.include_i_equals_k = true;
        let report = run(Campaign::Bressoud, &c).unwrap();
        assert!(!report.passed());
        assert_eq!(report.counterexample.as_deref(), Some("(k,i,n)=(2,2,2): A=1, B=0"));
        assert!(report.failures().all(|r| r.expected_discrepancy));
    }

    #[test]
    fn k1_is_excluded_unless_requested() {
        let mut c = config(2, 3);
        assert!(run(Campaign::Main, &c).unwrap().passed());
        c.include_k_equals_1 = true;
        let report = run(Campaign::Main, &c).unwrap();
        assert!(!report.passed());
        assert!(report.failures().all(|r| r.expected_discrepancy && r.params.get("k") == Some(1)));
    }

    #[test]
    fn series_campaigns_small() {
        for campaign in [Campaign::WRecurrence, Campaign::Jtp, Campaign::Genfun] {
            let report = run(campaign, &config(3, 10)).unwrap();
            assert!(report.passed(), "{campaign}: {:?}", report.counterexample);
        }
    }

    #[test]
    fn structural_campaigns_small() {
        for campaign in [Campaign::DRecurrence, Campaign::Decomposition, Campaign::Phi, Campaign::Chi] {
            let report = run(campaign, &config(3, 8)).unwrap();
            assert!(report.passed(), "{campaign}: {:?}", report.counterexample);
        }
    }

    #[test]
    fn infrastructure_campaigns() {
        let mut c = config(0, 6);
        c.samples = Some(300);
        c.seed = 7;
        assert!(run(Campaign::RingLaws, &c).unwrap().passed());
        assert!(run(Campaign::ParserFuzz, &c).unwrap().passed());
    }

    #[test]
    fn bounds_are_validated() {
        assert!(matches!(run(Campaign::Main, &config(2, 500)), Err(VerifyError::InvalidBounds(_))));
        let mut c = config(2, 4);
        c.order = Some(1_000_000);
        assert!(matches!(run(Campaign::Jtp, &c), Err(VerifyError::InvalidBounds(_))));
    }

    #[test]
    fn reports_are_deterministic_and_streamed_in_order() {
        let c = config(3, 6);
        let mut streamed = Vec::new();
        let a = run_with(Campaign::Css, &c, |r| streamed.push(r.clone())).unwrap();
        let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run(Campaign::Css, &c)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(streamed, a.records);
        let mut ja = serde_json::to_value(&a).unwrap();
        let mut jb = serde_json::to_value(&b).unwrap();
        ja["duration_ms"] = 0.into();
        jb["duration_ms"] = 0.into();
        assert_eq!(ja, jb);
        assert_eq!(ja["schema"], 1);
        assert_eq!(ja["status"], "pass");
    }
}
