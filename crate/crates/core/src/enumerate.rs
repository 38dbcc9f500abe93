//! Exhaustive generation of (over)partitions and the counting functions of
//! both sides of each identity.
//!
//! Condition families count objects satisfying multiplicity or difference
//! conditions; residue families count objects whose parts avoid residue
//! classes. Everything here is brute force and serves as the oracle for the
//! generating-function code in [`crate::series`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::overpartition::{FrequencyProfile, Overpartition, Part};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("invalid parameters for {family}: k={k}, i={i} ({reason})")]
    InvalidParameters { family: String, k: i64, i: i64, reason: &'static str },
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
}

/// Lazy, deterministic stream of the overpartitions of `n`.
///
/// Objects come out in descending lexicographic order of their canonical part
/// sequences, comparing parts by size and then overlined before nonoverlined.
#[derive(Debug, Clone)]
pub struct Overpartitions {
    n: u32,
    parts: Option<usize>,
    allow_overlines: bool,
    stack: Vec<u32>,
    rem: u32,
    state: IterState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum IterState {
    Start,
    Running,
    Done,
}

impl Overpartitions {
    fn new(n: u32, parts: Option<usize>, allow_overlines: bool) -> Self {
        Overpartitions { n, parts, allow_overlines, stack: Vec::new(), rem: n, state: IterState::Start }
    }

    fn max_rank(&self) -> u32 {
        match self.stack.last() {
            None => 2 * self.n + 1,
            Some(&r) => 2 * (r / 2),
        }
    }

    /// Whether the part of this rank can be placed next so that the remaining
    /// weight is still fillable with the remaining number of parts.
    fn feasible(&self, rank: u32) -> bool {
        let size = rank / 2;
        if size == 0 || size > self.rem || (rank % 2 == 1 && !self.allow_overlines) {
            return false;
        }
        match self.parts {
            None => true,
            Some(m) => {
                let depth = self.stack.len();
                if depth >= m {
                    return false;
                }
                let left = (m - depth - 1) as u64;
                let rest = u64::from(self.rem - size);
                left <= rest && rest <= left * u64::from(size)
            }
        }
    }

    fn largest_feasible(&self, upper: u32) -> Option<u32> {
        (2..=upper).rev().find(|&r| self.feasible(r))
    }

    fn push(&mut self, rank: u32) {
        self.stack.push(rank);
        self.rem -= rank / 2;
    }

    fn extend(&mut self) -> bool {
        while self.rem > 0 {
            match self.largest_feasible(self.max_rank()) {
                Some(r) => self.push(r),
                None => return false,
            }
        }
        true
    }

    fn backtrack(&mut self) -> bool {
        while let Some(r0) = self.stack.pop() {
            self.rem += r0 / 2;
            if let Some(r) = self.largest_feasible(r0 - 1) {
                self.push(r);
                return true;
            }
        }
        false
    }

    fn current(&self) -> Overpartition {
        Overpartition::from_canonical_unchecked(self.stack.iter().map(|&r| Part::from_rank(r)).collect())
    }
}

impl Iterator for Overpartitions {
    type Item = Overpartition;

    fn next(&mut self) -> Option<Overpartition> {
        let found = match self.state {
            IterState::Done => false,
            IterState::Start => {
                self.state = IterState::Running;
                if self.n == 0 {
                    self.state = IterState::Done;
                    self.parts.map_or(true, |m| m == 0)
                } else {
                    self.extend()
                }
            }
            IterState::Running => self.backtrack() && self.extend(),
        };
        if found {
            Some(self.current())
        } else {
            self.state = IterState::Done;
            None
        }
    }
}

/// Every overpartition of `n`, optionally restricted to exactly `m` parts.
pub fn overpartitions_of(n: u32, m: Option<usize>) -> Overpartitions {
    Overpartitions::new(n, m, true)
}

/// Every ordinary partition of `n`, optionally with exactly `m` parts.
pub fn partitions_of(n: u32, m: Option<usize>) -> Overpartitions {
    Overpartitions::new(n, m, false)
}

/// One text line per object, in stream order.
pub fn dump_stream<I: Iterator<Item = Overpartition>>(stream: I) -> String {
    let mut out = String::new();
    for lambda in stream {
        out.push_str(&lambda.to_string());
        out.push('\n');
    }
    out
}

/// Sides of the identities defined by multiplicity or difference conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionFamily {
    /// `F_{k,i}`: Gordon's difference conditions on partitions.
    FGordon,
    /// `B_{k,i}`: Bressoud's multiplicity and parity conditions on partitions.
    BBressoud,
    /// `B-bar_k`: Lovejoy, overpartitions with the overline-aware gap condition.
    BbarLovejoy,
    /// `D-bar_k`: as `B-bar_k` with no nonoverlined 1.
    DbarLovejoy,
    /// `P_{k,i}`: Chen-Sang-Shi.
    PCss,
    /// `B-bar^3_k`: Corteel-Lovejoy-Mallet.
    B3Clm,
    /// `D_{k,i}`: the main family.
    DMain,
}

/// Sides of the identities defined by residue restrictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResidueFamily {
    EGordon,
    ABressoud,
    AbarLovejoy,
    CbarLovejoy,
    QCss,
    A3Clm,
    CMain,
}

impl ConditionFamily {
    pub const ALL: [ConditionFamily; 7] = [
        ConditionFamily::FGordon,
        ConditionFamily::BBressoud,
        ConditionFamily::BbarLovejoy,
        ConditionFamily::DbarLovejoy,
        ConditionFamily::PCss,
        ConditionFamily::B3Clm,
        ConditionFamily::DMain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionFamily::FGordon => "F",
            ConditionFamily::BBressoud => "B",
            ConditionFamily::BbarLovejoy => "Bbar",
            ConditionFamily::DbarLovejoy => "Dbar",
            ConditionFamily::PCss => "P",
            ConditionFamily::B3Clm => "B3",
            ConditionFamily::DMain => "D",
        }
    }

    /// The residue family on the other side of the same identity.
    pub fn residue_partner(self) -> ResidueFamily {
        match self {
            ConditionFamily::FGordon => ResidueFamily::EGordon,
            ConditionFamily::BBressoud => ResidueFamily::ABressoud,
            ConditionFamily::BbarLovejoy => ResidueFamily::AbarLovejoy,
            ConditionFamily::DbarLovejoy => ResidueFamily::CbarLovejoy,
            ConditionFamily::PCss => ResidueFamily::QCss,
            ConditionFamily::B3Clm => ResidueFamily::A3Clm,
            ConditionFamily::DMain => ResidueFamily::CMain,
        }
    }

    /// Ordinary partitions only (no overlined parts admitted).
    pub fn partitions_only(self) -> bool {
        matches!(self, ConditionFamily::FGordon | ConditionFamily::BBressoud)
    }

    /// Families indexed by `k` alone; their `i` is accepted and ignored.
    pub fn single_index(self) -> bool {
        matches!(
            self,
            ConditionFamily::BbarLovejoy | ConditionFamily::DbarLovejoy | ConditionFamily::B3Clm
        )
    }

    pub fn check_params(self, k: i64, i: i64) -> Result<(), EnumerateError> {
        check_params(self.name(), matches!(self, ConditionFamily::BBressoud), k, i)
    }
}

impl ResidueFamily {
    pub const ALL: [ResidueFamily; 7] = [
        ResidueFamily::EGordon,
        ResidueFamily::ABressoud,
        ResidueFamily::AbarLovejoy,
        ResidueFamily::CbarLovejoy,
        ResidueFamily::QCss,
        ResidueFamily::A3Clm,
        ResidueFamily::CMain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResidueFamily::EGordon => "E",
            ResidueFamily::ABressoud => "A",
            ResidueFamily::AbarLovejoy => "Abar",
            ResidueFamily::CbarLovejoy => "Cbar",
            ResidueFamily::QCss => "Q",
            ResidueFamily::A3Clm => "A3",
            ResidueFamily::CMain => "C",
        }
    }

    pub fn single_index(self) -> bool {
        matches!(self, ResidueFamily::AbarLovejoy | ResidueFamily::CbarLovejoy | ResidueFamily::A3Clm)
    }

    pub fn check_params(self, k: i64, i: i64) -> Result<(), EnumerateError> {
        check_params(self.name(), matches!(self, ResidueFamily::ABressoud), k, i)
    }

    /// The residue restriction defining this family at `(k, i)`.
    pub fn rule(self, k: u32, i: u32) -> Result<ResidueRule, EnumerateError> {
        self.check_params(i64::from(k), i64::from(i))?;
        Ok(self.rule_unchecked(k, i))
    }

    /// The same rule outside the admissible range (`k >= 1`, `i <= k`).
    pub(crate) fn rule_unchecked(self, k: u32, i: u32) -> ResidueRule {
        match self {
            ResidueFamily::EGordon => ResidueRule::partitions(2 * k + 1, &[0, i, 2 * k + 1 - i]),
            ResidueFamily::ABressoud => ResidueRule::partitions(2 * k, &[0, i, 2 * k - i]),
            ResidueFamily::AbarLovejoy => ResidueRule::new(k, &[0], &[0]),
            ResidueFamily::CbarLovejoy => ResidueRule::new(2 * k, &[0, 1, 2 * k - 1], &[]),
            ResidueFamily::QCss if i == k => ResidueRule::new(k, &[0], &[0]),
            ResidueFamily::QCss => ResidueRule::new(2 * k, &[0, i, 2 * k - i], &[]),
            ResidueFamily::A3Clm => ResidueRule::new(2 * k - 1, &[0, 1, 2 * k - 2], &[]),
            ResidueFamily::CMain => ResidueRule::new(2 * k - 1, &[0, i, 2 * k - 1 - i], &[]),
        }
    }
}

fn check_params(family: &str, strict_i: bool, k: i64, i: i64) -> Result<(), EnumerateError> {
    let err = |reason| Err(EnumerateError::InvalidParameters { family: family.to_string(), k, i, reason });
    if k < 1 {
        return err("k must be at least 1");
    }
    if i < 1 || i > k {
        return err("need 1 <= i <= k");
    }
    if strict_i && i == k {
        return err("Bressoud's identity is verified for i < k only");
    }
    Ok(())
}

impl fmt::Display for ConditionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for ResidueFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConditionFamily {
    type Err = EnumerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let family = match s {
            "F" | "F_gordon" => ConditionFamily::FGordon,
            "B" | "B_bressoud" => ConditionFamily::BBressoud,
            "Bbar" | "Bbar_lovejoy" => ConditionFamily::BbarLovejoy,
            "Dbar" | "Dbar_lovejoy" => ConditionFamily::DbarLovejoy,
            "P" | "P_css" => ConditionFamily::PCss,
            "B3" | "B3_clm" => ConditionFamily::B3Clm,
            "D" | "D_main" => ConditionFamily::DMain,
            _ => return Err(EnumerateError::UnknownFamily(s.to_string())),
        };
        Ok(family)
    }
}

impl FromStr for ResidueFamily {
    type Err = EnumerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let family = match s {
            "E" | "E_gordon" => ResidueFamily::EGordon,
            "A" | "A_bressoud" => ResidueFamily::ABressoud,
            "Abar" | "Abar_lovejoy" => ResidueFamily::AbarLovejoy,
            "Cbar" | "Cbar_lovejoy" => ResidueFamily::CbarLovejoy,
            "Q" | "Q_css" => ResidueFamily::QCss,
            "A3" | "A3_clm" => ResidueFamily::A3Clm,
            "C" | "C_main" => ResidueFamily::CMain,
            _ => return Err(EnumerateError::UnknownFamily(s.to_string())),
        };
        Ok(family)
    }
}

/// Overline-aware gap condition on the canonical part sequence:
/// `lambda_j - lambda_{j+k-1} >= 1` if `lambda_j` is overlined, `>= 2` otherwise.
fn gap_condition(lambda: &Overpartition, k: u32) -> bool {
    let parts = lambda.parts();
    let span = (k - 1) as usize;
    parts.iter().zip(parts.iter().skip(span)).all(|(a, b)| {
        let need = if a.overlined { 1 } else { 2 };
        a.size - b.size >= need
    })
}

fn parity_ok(lhs: u64, rhs: u64) -> bool {
    (lhs + rhs) % 2 == 0
}

/// Conditions (i)-(iii) of the main family `D_{k,i}`.
fn main_conditions(p: &FrequencyProfile, k: u32, i: u32) -> bool {
    if p.f(1) > i - 1 {
        return false;
    }
    let mut v = 0u64;
    // Levels past max_size + 1 repeat the all-zero level at max_size + 1.
    for l in 1..=p.max_size() + 1 {
        v += u64::from(p.fbar(l));
        let level = p.f(l) + p.fbar(l) + p.f(l + 1);
        if level > k - 1 {
            return false;
        }
        if level == k - 1 {
            let weighted = u64::from(l) * u64::from(p.f(l) + p.fbar(l)) + u64::from(l + 1) * u64::from(p.f(l + 1));
            if !parity_ok(weighted, v + u64::from(i - 1)) {
                return false;
            }
        }
    }
    true
}

/// Corteel-Lovejoy-Mallet: `f_1 = 0`, the three-term level bound, and parity
/// against `V(l)` at equality.
fn clm_conditions(p: &FrequencyProfile, k: u32) -> bool {
    if p.f(1) != 0 {
        return false;
    }
    (1..=p.max_size() + 1).all(|l| {
        let level = p.f(l) + p.fbar(l) + p.f(l + 1);
        let weighted = u64::from(l) * u64::from(p.f(l)) + u64::from(l) * u64::from(p.fbar(l))
            + u64::from(l + 1) * u64::from(p.f(l + 1));
        level < k - 1 || (level == k - 1 && parity_ok(weighted, u64::from(p.v_stat(l))))
    })
}

fn bressoud_conditions(p: &FrequencyProfile, k: u32, i: u32) -> bool {
    if p.f(1) > i - 1 {
        return false;
    }
    (1..=p.max_size() + 1).all(|l| {
        let level = p.f(l) + p.f(l + 1);
        let weighted = u64::from(l) * u64::from(p.f(l)) + u64::from(l + 1) * u64::from(p.f(l + 1));
        level < k - 1 || (level == k - 1 && parity_ok(weighted, u64::from(i - 1)))
    })
}

/// Whether `lambda` meets every condition of `family` at `(k, i)`.
///
/// Families defined on ordinary partitions reject any overpartition with an
/// overlined part.
pub fn satisfies(family: ConditionFamily, k: u32, i: u32, lambda: &Overpartition) -> Result<bool, EnumerateError> {
    family.check_params(i64::from(k), i64::from(i))?;
    Ok(satisfies_unchecked(family, k, i, lambda))
}

pub(crate) fn satisfies_unchecked(family: ConditionFamily, k: u32, i: u32, lambda: &Overpartition) -> bool {
    if family.partitions_only() && !lambda.is_partition() {
        return false;
    }
    match family {
        ConditionFamily::FGordon | ConditionFamily::PCss => {
            lambda.f(1) < i as usize && gap_condition(lambda, k)
        }
        ConditionFamily::BbarLovejoy => gap_condition(lambda, k),
        ConditionFamily::DbarLovejoy => lambda.f(1) == 0 && gap_condition(lambda, k),
        ConditionFamily::BBressoud => bressoud_conditions(&lambda.frequency_profile(), k, i),
        ConditionFamily::B3Clm => clm_conditions(&lambda.frequency_profile(), k),
        ConditionFamily::DMain => main_conditions(&lambda.frequency_profile(), k, i),
    }
}

fn stream_for(partitions_only: bool, n: u32, m: Option<usize>) -> Overpartitions {
    if partitions_only {
        partitions_of(n, m)
    } else {
        overpartitions_of(n, m)
    }
}

/// Number of objects of weight `n` (and `m` parts, if given) in `family`.
pub fn count_condition_side(
    family: ConditionFamily,
    k: u32,
    i: u32,
    n: u32,
    m: Option<usize>,
) -> Result<u64, EnumerateError> {
    family.check_params(i64::from(k), i64::from(i))?;
    Ok(count_condition_unchecked(family, k, i, n, m))
}

pub(crate) fn count_condition_unchecked(family: ConditionFamily, k: u32, i: u32, n: u32, m: Option<usize>) -> u64 {
    stream_for(family.partitions_only(), n, m)
        .filter(|lambda| satisfies_unchecked(family, k, i, lambda))
        .count() as u64
}

/// Residue restriction: parts whose size falls in a forbidden class (chosen
/// separately for nonoverlined and overlined parts) are excluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueRule {
    modulus: u32,
    forbidden_plain: Vec<bool>,
    forbidden_overlined: Vec<bool>,
}

impl ResidueRule {
    pub fn new(modulus: u32, forbidden_plain: &[u32], forbidden_overlined: &[u32]) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        let mark = |res: &[u32]| {
            let mut v = vec![false; modulus as usize];
            for r in res {
                v[(r % modulus) as usize] = true;
            }
            v
        };
        ResidueRule {
            modulus,
            forbidden_plain: mark(forbidden_plain),
            forbidden_overlined: mark(forbidden_overlined),
        }
    }

    /// A rule on ordinary partitions: every overlined part is forbidden.
    pub fn partitions(modulus: u32, forbidden: &[u32]) -> Self {
        let all: Vec<u32> = (0..modulus).collect();
        ResidueRule::new(modulus, forbidden, &all)
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn allows(&self, part: Part) -> bool {
        let r = (part.size % self.modulus) as usize;
        if part.overlined {
            !self.forbidden_overlined[r]
        } else {
            !self.forbidden_plain[r]
        }
    }

    pub fn allowed_plain(&self) -> Vec<u32> {
        (0..self.modulus).filter(|&r| !self.forbidden_plain[r as usize]).collect()
    }

    pub fn allowed_overlined(&self) -> Vec<u32> {
        (0..self.modulus).filter(|&r| !self.forbidden_overlined[r as usize]).collect()
    }

    fn overlines_forbidden(&self) -> bool {
        self.forbidden_overlined.iter().all(|&b| b)
    }
}

/// Number of overpartitions of `n` whose parts all pass `rule`.
pub fn count_restricted(n: u32, rule: &ResidueRule) -> u64 {
    stream_for(rule.overlines_forbidden(), n, None)
        .filter(|lambda| lambda.parts().iter().all(|&p| rule.allows(p)))
        .count() as u64
}

pub fn count_residue_side(family: ResidueFamily, k: u32, i: u32, n: u32) -> Result<u64, EnumerateError> {
    Ok(count_restricted(n, &family.rule(k, i)?))
}

/// Exact counts indexed by number of parts `m` and weight `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub family: ConditionFamily,
    pub k: u32,
    pub i: u32,
    pub mmax: usize,
    pub nmax: usize,
    cells: Vec<Vec<u64>>,
}

impl CountTable {
    /// The cell at `(m, n)`; negative indices read as zero, indices past the
    /// truncation bounds give `None`.
    pub fn get(&self, m: i64, n: i64) -> Option<u64> {
        if m < 0 || n < 0 {
            return Some(0);
        }
        let (m, n) = (m as usize, n as usize);
        if m > self.mmax || n > self.nmax {
            return None;
        }
        Some(self.cells[m][n])
    }

    /// Like [`CountTable::get`] but panics outside the truncation bounds.
    pub fn at(&self, m: i64, n: i64) -> u64 {
        self.get(m, n)
            .unwrap_or_else(|| panic!("cell ({m},{n}) outside table bounds ({},{})", self.mmax, self.nmax))
    }

    /// Total over all part counts at weight `n` (equal to the single-index
    /// count when `mmax >= n`).
    pub fn weight_total(&self, n: usize) -> u64 {
        self.cells.iter().map(|row| row[n]).sum()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.cells
    }

    /// TSV dump: one `m<TAB>n<TAB>count` line per cell, n-major.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("m\tn\tcount\n");
        for n in 0..=self.nmax {
            for m in 0..=self.mmax {
                out.push_str(&format!("{m}\t{n}\t{}\n", self.cells[m][n]));
            }
        }
        out
    }
}

/// Fills the `(m, n)` grid by enumeration. `i = 0` yields the all-zero table.
pub fn count_table(
    family: ConditionFamily,
    k: u32,
    i: u32,
    mmax: usize,
    nmax: usize,
) -> Result<CountTable, EnumerateError> {
    let mut cells = vec![vec![0u64; nmax + 1]; mmax + 1];
    if i == 0 {
        family.check_params(i64::from(k), 1)?;
    } else {
        family.check_params(i64::from(k), i64::from(i))?;
        for n in 0..=nmax {
            for lambda in stream_for(family.partitions_only(), n as u32, None) {
                let m = lambda.num_parts();
                if m <= mmax && satisfies_unchecked(family, k, i, &lambda) {
                    cells[m][n] += 1;
                }
            }
        }
    }
    Ok(CountTable { family, k, i, mmax, nmax, cells })
}
