//! The maps behind the recurrence for `D_{k,i}(m,n)`.
//!
//! Cells are the sets
//! - `U_{k,i}(m,n)`: overpartitions counted by `D_{k,i}(m,n)`;
//! - `S_{k,i}(m,n)`: members of `U` with one overlined 1 and `i-1` plain 1s;
//! - `T_{k,i}(m,n)`: members of `U` with one overlined 1 and `i-2` plain 1s
//!   when `i >= 2`, and with no part of size 1 at all when `i = 1`.
//!
//! [`iota`] maps `U_{k,i-1}` into `U_{k,i} \ (S ∪ T)`, [`phi`] maps `S_{k,i}(m,n)`
//! onto `U_{k,k-i}(m-i,n-m)` and [`chi`] maps `T_{k,i}(m,n)` onto
//! `U_{k,k-i}(m-i+1,n-m)`. All membership checks are recomputed from the
//! conditions; no caller-supplied claim is trusted.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::enumerate::{overpartitions_of, satisfies_unchecked, ConditionFamily};
use crate::overpartition::{Overpartition, Part};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BijectionError {
    #[error("{map}: {input} is not in the domain {domain}")]
    DomainViolation { map: &'static str, input: String, domain: String },
    #[error("{0} is only defined for i >= 2")]
    UnsupportedRange(&'static str),
    #[error("invalid parameters k={k}, i={i}")]
    InvalidParameters { k: u32, i: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CellKind {
    U,
    S,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellSpec {
    pub k: u32,
    pub i: u32,
    pub m: i64,
    pub n: i64,
    pub which: CellKind,
}

impl CellSpec {
    pub fn new(which: CellKind, k: u32, i: u32, m: i64, n: i64) -> Self {
        CellSpec { k, i, m, n, which }
    }

    /// Whether `lambda` belongs to the cell.
    pub fn contains(&self, lambda: &Overpartition) -> bool {
        if self.i == 0 || self.i > self.k || self.m < 0 || self.n < 0 {
            return false;
        }
        if lambda.num_parts() as i64 != self.m || lambda.weight() as i64 != self.n {
            return false;
        }
        in_kind(self.which, self.k, self.i, lambda)
    }

    pub fn members(&self) -> Vec<Overpartition> {
        if self.i == 0 || self.i > self.k || self.m < 0 || self.n < 0 {
            return Vec::new();
        }
        overpartitions_of(self.n as u32, Some(self.m as usize))
            .filter(|l| in_kind(self.which, self.k, self.i, l))
            .collect()
    }
}

impl fmt::Display for CellSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}[k={},i={}](m={},n={})", self.which, self.k, self.i, self.m, self.n)
    }
}

fn in_u(k: u32, i: u32, lambda: &Overpartition) -> bool {
    i >= 1 && i <= k && satisfies_unchecked(ConditionFamily::DMain, k, i, lambda)
}

fn in_kind(which: CellKind, k: u32, i: u32, lambda: &Overpartition) -> bool {
    if !in_u(k, i, lambda) {
        return false;
    }
    let (plain1, over1) = (lambda.f(1), lambda.fbar(1));
    match which {
        CellKind::U => true,
        CellKind::S => over1 == 1 && plain1 == (i - 1) as usize,
        CellKind::T if i == 1 => over1 == 0 && plain1 == 0,
        CellKind::T => over1 == 1 && plain1 == (i - 2) as usize,
    }
}

/// `|S|`, `|T|` or `|U|` of the cell.
pub fn card(cell: &CellSpec) -> u64 {
    cell.members().len() as u64
}

fn check_ki(k: u32, i: u32) -> Result<(), BijectionError> {
    if k < 1 || i < 1 || i > k {
        return Err(BijectionError::InvalidParameters { k, i });
    }
    Ok(())
}

fn violation(map: &'static str, lambda: &Overpartition, domain: String) -> BijectionError {
    BijectionError::DomainViolation { map, input: lambda.to_string(), domain }
}

/// Removes every part of size 1 and lowers the remaining parts by one.
fn strip_and_lower(lambda: &Overpartition) -> Overpartition {
    let parts = lambda
        .parts()
        .iter()
        .filter(|p| p.size > 1)
        .map(|p| Part { size: p.size - 1, overlined: p.overlined })
        .collect();
    Overpartition::from_canonical_unchecked(parts)
}

/// Raises every part by one, then appends an overlined 1 and `plain_ones`
/// plain 1s.
fn raise_and_adjoin(mu: &Overpartition, plain_ones: usize) -> Overpartition {
    let mut parts: Vec<Part> = mu.parts().iter().map(|p| Part { size: p.size + 1, overlined: p.overlined }).collect();
    parts.push(Part::overlined(1));
    parts.extend(std::iter::repeat(Part::plain(1)).take(plain_ones));
    Overpartition::from_canonical_unchecked(parts)
}

/// The switch map from `U_{k,i-1}(m,n)` to `U_{k,i}(m,n)`: if the smallest
/// size present has an overlined copy, that copy loses its overline;
/// otherwise one copy of the smallest part gains an overline.
pub fn iota(k: u32, i: u32, lambda: &Overpartition) -> Result<Overpartition, BijectionError> {
    check_ki(k, i)?;
    if !in_u(k, i - 1, lambda) {
        return Err(violation("iota", lambda, format!("U[k={k},i={}]", i - 1)));
    }
    let Some(smallest) = lambda.smallest_size() else {
        return Ok(Overpartition::empty());
    };
    let mut parts = lambda.parts().to_vec();
    let switch_to = lambda.fbar(smallest) == 0;
    let idx = parts
        .iter()
        .position(|p| p.size == smallest && p.overlined != switch_to)
        .expect("smallest size present");
    parts[idx].overlined = switch_to;
    Ok(Overpartition::from_parts(parts).expect("switching keeps at most one overline per size"))
}

/// `S_{k,i}(m,n) -> U_{k,k-i}(m-i,n-m)`: drop the `i` parts of size 1, lower
/// the rest by one.
pub fn phi(k: u32, i: u32, lambda: &Overpartition) -> Result<Overpartition, BijectionError> {
    check_ki(k, i)?;
    if !in_kind(CellKind::S, k, i, lambda) {
        return Err(violation("phi", lambda, format!("S[k={k},i={i}]")));
    }
    Ok(strip_and_lower(lambda))
}

pub fn phi_inv(k: u32, i: u32, mu: &Overpartition) -> Result<Overpartition, BijectionError> {
    check_ki(k, i)?;
    if !in_u(k, k - i, mu) {
        return Err(violation("phi_inv", mu, format!("U[k={k},i={}]", k - i)));
    }
    Ok(raise_and_adjoin(mu, (i - 1) as usize))
}

/// `T_{k,i}(m,n) -> U_{k,k-i}(m-i+1,n-m)` for `i >= 2`: drop the `i-1` parts
/// of size 1, lower the rest by one.
pub fn chi(k: u32, i: u32, lambda: &Overpartition) -> Result<Overpartition, BijectionError> {
    check_ki(k, i)?;
    if i == 1 {
        return Err(BijectionError::UnsupportedRange("chi"));
    }
    if !in_kind(CellKind::T, k, i, lambda) {
        return Err(violation("chi", lambda, format!("T[k={k},i={i}]")));
    }
    Ok(strip_and_lower(lambda))
}

pub fn chi_inv(k: u32, i: u32, mu: &Overpartition) -> Result<Overpartition, BijectionError> {
    check_ki(k, i)?;
    if i == 1 {
        return Err(BijectionError::UnsupportedRange("chi_inv"));
    }
    if !in_u(k, k - i, mu) {
        return Err(violation("chi_inv", mu, format!("U[k={k},i={}]", k - i)));
    }
    Ok(raise_and_adjoin(mu, (i - 2) as usize))
}

/// Outcome of checking one map on one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapAudit {
    pub map: &'static str,
    pub cell: String,
    pub k: u32,
    pub i: u32,
    pub m: i64,
    pub n: i64,
    pub domain: usize,
    pub codomain: usize,
    pub image: usize,
    pub passed: bool,
    pub counterexample: Option<String>,
}

type MapFn = fn(u32, u32, &Overpartition) -> Result<Overpartition, BijectionError>;

/// Shared bijection audit: the map is defined on the whole domain, lands in
/// the codomain, is inverted by `inverse` on both sides and hits every
/// codomain element.
fn audit_bijection(
    name: &'static str,
    forward: MapFn,
    inverse: MapFn,
    domain: CellSpec,
    codomain: CellSpec,
) -> MapAudit {
    let (k, i) = (domain.k, domain.i);
    let dom = domain.members();
    let cod: BTreeSet<Overpartition> = codomain.members().into_iter().collect();
    let mut image = BTreeSet::new();
    let mut counterexample = None;
    for lambda in &dom {
        match forward(k, i, lambda) {
            Ok(mu) if !cod.contains(&mu) => {
                counterexample.get_or_insert(format!("{lambda} -> {mu}, outside {codomain}"));
            }
            Ok(mu) => {
                match inverse(k, i, &mu) {
                    Ok(back) if &back == lambda => {}
                    Ok(back) => {
                        counterexample.get_or_insert(format!("{lambda} -> {mu} -> {back}"));
                    }
                    Err(e) => {
                        counterexample.get_or_insert(e.to_string());
                    }
                }
                image.insert(mu);
            }
            Err(e) => {
                counterexample.get_or_insert(e.to_string());
            }
        }
    }
    if counterexample.is_none() {
        if image.len() != dom.len() {
            counterexample = Some("two domain elements share an image".to_string());
        } else if let Some(missed) = cod.difference(&image).next() {
            counterexample = Some(format!("{missed} in {codomain} is not hit"));
        }
    }
    MapAudit {
        map: name,
        cell: domain.to_string(),
        k,
        i,
        m: domain.m,
        n: domain.n,
        domain: dom.len(),
        codomain: cod.len(),
        image: image.len(),
        passed: counterexample.is_none(),
        counterexample,
    }
}

pub fn audit_phi(k: u32, i: u32, m: i64, n: i64) -> MapAudit {
    let ik = i64::from(i);
    audit_bijection(
        "phi",
        phi,
        phi_inv,
        CellSpec::new(CellKind::S, k, i, m, n),
        CellSpec::new(CellKind::U, k, k - i, m - ik, n - m),
    )
}

pub fn audit_chi(k: u32, i: u32, m: i64, n: i64) -> MapAudit {
    let ik = i64::from(i);
    audit_bijection(
        "chi",
        chi,
        chi_inv,
        CellSpec::new(CellKind::T, k, i, m, n),
        CellSpec::new(CellKind::U, k, k - i, m - ik + 1, n - m),
    )
}

/// Checks that the switch map is an injection from `U_{k,i-1}(m,n)` whose
/// image is exactly `U_{k,i}(m,n) \ (S_{k,i}(m,n) ∪ T_{k,i}(m,n))`.
pub fn audit_iota(k: u32, i: u32, m: i64, n: i64) -> MapAudit {
    let domain = CellSpec::new(CellKind::U, k, i - 1, m, n);
    let target = CellSpec::new(CellKind::U, k, i, m, n);
    let dom = domain.members();
    let s = CellSpec::new(CellKind::S, k, i, m, n);
    let t = CellSpec::new(CellKind::T, k, i, m, n);
    let expected: BTreeSet<Overpartition> =
        target.members().into_iter().filter(|l| !s.contains(l) && !t.contains(l)).collect();
    let mut image = BTreeSet::new();
    let mut counterexample = None;
    for lambda in &dom {
        match iota(k, i, lambda) {
            Ok(mu) => {
                if !target.contains(&mu) {
                    counterexample.get_or_insert(format!("{lambda} -> {mu}, outside {target}"));
                }
                if !image.insert(mu.clone()) {
                    counterexample.get_or_insert(format!("{mu} has two preimages"));
                }
            }
            Err(e) => {
                counterexample.get_or_insert(e.to_string());
            }
        }
    }
    if counterexample.is_none() {
        if let Some(extra) = image.symmetric_difference(&expected).next() {
            counterexample = Some(format!("{extra} breaks image(iota) = U \\ (S u T)"));
        }
    }
    MapAudit {
        map: "iota",
        cell: domain.to_string(),
        k,
        i,
        m,
        n,
        domain: dom.len(),
        codomain: expected.len(),
        image: image.len(),
        passed: counterexample.is_none(),
        counterexample,
    }
}
