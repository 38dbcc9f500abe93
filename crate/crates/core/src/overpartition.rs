//! Overpartitions, their multiplicity profiles and the `V` statistic.
//!
//! An overpartition is stored as a canonical sequence of parts: sizes are
//! non-increasing, and for a given size the (at most one) overlined copy comes
//! before the nonoverlined copies. Ordinary partitions are overpartitions with
//! no overlined part.
//!
//! The text form writes parts comma-separated with a trailing `~` for an
//! overline, e.g. `7~,7,6,5~,2,1~`; the empty overpartition is `-`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverpartitionError {
    #[error("size {0} carries more than one overlined copy")]
    DuplicateOverline(u32),
    #[error("part size {0} is not positive")]
    NonPositivePart(i64),
    #[error("part size {0} is out of range")]
    PartTooLarge(i64),
    #[error("cannot parse part `{0}`")]
    BadToken(String),
}

/// A single part: an underlying size and whether it carries the overline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Part {
    pub size: u32,
    pub overlined: bool,
}

impl Part {
    pub fn plain(size: u32) -> Self {
        Part { size, overlined: false }
    }

    pub fn overlined(size: u32) -> Self {
        Part { size, overlined: true }
    }

    /// Position in the canonical order: `2*size + overlined`. Parts appear in
    /// non-increasing rank.
    pub(crate) fn rank(self) -> u32 {
        2 * self.size + u32::from(self.overlined)
    }

    pub(crate) fn from_rank(rank: u32) -> Self {
        Part { size: rank / 2, overlined: rank % 2 == 1 }
    }
}

impl Ord for Part {
    /// Canonical order is descending, so "less" means "comes first".
    fn cmp(&self, other: &Self) -> Ordering {
        other.rank().cmp(&self.rank())
    }
}

impl PartialOrd for Part {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.overlined {
            write!(f, "{}~", self.size)
        } else {
            write!(f, "{}", self.size)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Overpartition {
    parts: Vec<Part>,
}

impl Overpartition {
    /// Builds a canonical overpartition from parts given in any order.
    pub fn new<I>(raw: I) -> Result<Self, OverpartitionError>
    where
        I: IntoIterator<Item = (i64, bool)>,
    {
        let mut parts = Vec::new();
        for (size, overlined) in raw {
            if size < 1 {
                return Err(OverpartitionError::NonPositivePart(size));
            }
            let size = u32::try_from(size).map_err(|_| OverpartitionError::PartTooLarge(size))?;
            parts.push(Part { size, overlined });
        }
        Self::from_parts(parts)
    }

    pub fn from_parts(mut parts: Vec<Part>) -> Result<Self, OverpartitionError> {
        if let Some(p) = parts.iter().find(|p| p.size == 0) {
            return Err(OverpartitionError::NonPositivePart(i64::from(p.size)));
        }
        parts.sort();
        for w in parts.windows(2) {
            if w[0].overlined && w[0] == w[1] {
                return Err(OverpartitionError::DuplicateOverline(w[0].size));
            }
        }
        Ok(Overpartition { parts })
    }

    /// Wraps parts already known to be canonical (used by the enumerators).
    pub(crate) fn from_canonical_unchecked(parts: Vec<Part>) -> Self {
        debug_assert!(Self::is_canonical(&parts));
        Overpartition { parts }
    }

    fn is_canonical(parts: &[Part]) -> bool {
        parts.iter().all(|p| p.size >= 1)
            && parts.windows(2).all(|w| {
                w[0].rank() > w[1].rank() || (w[0].rank() == w[1].rank() && !w[0].overlined)
            })
    }

    pub fn empty() -> Self {
        Overpartition::default()
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|p| u64::from(p.size)).sum()
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_partition(&self) -> bool {
        self.parts.iter().all(|p| !p.overlined)
    }

    pub fn overlined_count(&self) -> usize {
        self.parts.iter().filter(|p| p.overlined).count()
    }

    /// Largest part size, 0 for the empty overpartition.
    pub fn max_size(&self) -> u32 {
        self.parts.first().map_or(0, |p| p.size)
    }

    pub fn smallest_size(&self) -> Option<u32> {
        self.parts.last().map(|p| p.size)
    }

    /// `f_l`: nonoverlined occurrences of `l`.
    pub fn f(&self, l: u32) -> usize {
        self.parts.iter().filter(|p| p.size == l && !p.overlined).count()
    }

    /// `f_{l bar}`: overlined occurrences of `l`, either 0 or 1.
    pub fn fbar(&self, l: u32) -> usize {
        usize::from(self.parts.iter().any(|p| p.size == l && p.overlined))
    }

    /// `V(l)`: number of overlined parts of size at most `l`.
    pub fn v_stat(&self, l: u32) -> usize {
        self.parts.iter().filter(|p| p.overlined && p.size <= l).count()
    }

    pub fn frequency_profile(&self) -> FrequencyProfile {
        FrequencyProfile::of(self)
    }
}

impl fmt::Display for Overpartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("-");
        }
        for (idx, p) in self.parts.iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for Overpartition {
    type Err = OverpartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(Overpartition::empty());
        }
        let mut raw = Vec::new();
        for token in s.split(',') {
            let token = token.trim();
            let (digits, overlined) = match token.strip_suffix('~') {
                Some(d) => (d.trim_end(), true),
                None => (token, false),
            };
            let size: i64 = digits
                .parse()
                .map_err(|_| OverpartitionError::BadToken(token.to_string()))?;
            raw.push((size, overlined));
        }
        Overpartition::new(raw)
    }
}

/// Multiplicities `l -> f_l` and `l -> f_{l bar}` of an overpartition.
///
/// Both vectors are indexed by size (index 0 is unused and always zero) and
/// have length `max_size + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyProfile {
    f: Vec<u32>,
    fbar: Vec<bool>,
}

impl FrequencyProfile {
    pub fn of(lambda: &Overpartition) -> Self {
        let len = lambda.max_size() as usize + 1;
        let mut f = vec![0; len];
        let mut fbar = vec![false; len];
        for p in lambda.parts() {
            if p.overlined {
                fbar[p.size as usize] = true;
            } else {
                f[p.size as usize] += 1;
            }
        }
        FrequencyProfile { f, fbar }
    }

    pub fn max_size(&self) -> u32 {
        (self.f.len() - 1) as u32
    }

    pub fn f(&self, l: u32) -> u32 {
        self.f.get(l as usize).copied().unwrap_or(0)
    }

    pub fn fbar(&self, l: u32) -> u32 {
        u32::from(self.fbar.get(l as usize).copied().unwrap_or(false))
    }

    pub fn v_stat(&self, l: u32) -> u32 {
        let upto = (l as usize).min(self.fbar.len() - 1);
        self.fbar[1..=upto].iter().filter(|&&b| b).count() as u32
    }

    pub fn weight(&self) -> u64 {
        (1..=self.max_size())
            .map(|l| u64::from(l) * u64::from(self.f(l) + self.fbar(l)))
            .sum()
    }

    /// Rebuilds the canonical overpartition with these multiplicities.
    pub fn to_overpartition(&self) -> Overpartition {
        let mut parts = Vec::new();
        for l in (1..=self.max_size()).rev() {
            if self.fbar(l) == 1 {
                parts.push(Part::overlined(l));
            }
            parts.extend(std::iter::repeat(Part::plain(l)).take(self.f(l) as usize));
        }
        Overpartition::from_canonical_unchecked(parts)
    }
}
