//! Truncated formal power series with exact integer coefficients.
//!
//! [`QSeries`] tracks the coefficients of `q^0, ..., q^N`. [`XQSeries`] does
//! the same with coefficients that are integer polynomials in `x`. Every value
//! carries its truncation order and binary operations refuse to mix orders.
//!
//! Pochhammer products are expanded one binomial factor at a time; division
//! by a factor `1 + c x^a q^b` with `b >= 1` is a single forward pass, so
//! infinite products in numerators and denominators cost the same.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("constant term is not +1 or -1")]
    NonUnitConstantTerm,
    #[error("ill-formed monomial `{0}`: {1}")]
    IllFormedMonomial(Monomial, &'static str),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// `sign * x^x_exp * q^q_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub negative: bool,
    pub x_exp: u32,
    pub q_exp: i64,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { negative: false, x_exp: 0, q_exp: 0 };

    pub fn q(q_exp: i64) -> Self {
        Monomial { negative: false, x_exp: 0, q_exp }
    }

    pub fn xq(x_exp: u32, q_exp: i64) -> Self {
        Monomial { negative: false, x_exp, q_exp }
    }

    pub fn neg(self) -> Self {
        Monomial { negative: !self.negative, ..self }
    }

    fn is_constant(self) -> bool {
        self.x_exp == 0 && self.q_exp == 0
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        if self.is_constant() {
            return f.write_str("1");
        }
        match self.x_exp {
            0 => {}
            1 => f.write_str("x")?,
            e => write!(f, "x^{e}")?,
        }
        match self.q_exp {
            0 => {}
            1 => f.write_str("q")?,
            e => write!(f, "q^{e}")?,
        }
        Ok(())
    }
}

/// Number of factors in a Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Length {
    Finite(u64),
    Infinite,
}

/// Series operations needed to expand products factor by factor.
trait FactorOps {
    /// Multiplies by `1 + c x^a q^b`.
    fn mul_binomial(&mut self, c: i64, x_exp: u32, q_exp: usize);
    /// Divides by `1 + c x^a q^b`; requires `b >= 1`.
    fn div_binomial(&mut self, c: i64, x_exp: u32, q_exp: usize);
    fn order(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QSeries {
    order: usize,
    coeffs: Vec<BigInt>,
}

impl QSeries {
    pub fn zero(order: usize) -> Self {
        QSeries { order, coeffs: vec![BigInt::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// Builds a series from leading coefficients; missing ones are zero and
    /// extra ones are truncated.
    pub fn from_coeffs<I, T>(order: usize, coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut s = Self::zero(order);
        for (n, c) in coeffs.into_iter().take(order + 1).enumerate() {
            s.coeffs[n] = c.into();
        }
        s
    }

    /// `sign * q^e`, zero when `e` exceeds the order.
    pub fn monomial(order: usize, negative: bool, q_exp: usize) -> Self {
        let mut s = Self::zero(order);
        if q_exp <= order {
            s.coeffs[q_exp] = if negative { -BigInt::one() } else { BigInt::one() };
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Drops coefficients above `order`. Raising the order is refused
    /// because the missing coefficients are unknown.
    pub fn truncate(&self, order: usize) -> Result<Self, SeriesError> {
        if order > self.order {
            return Err(SeriesError::OrderMismatch(self.order, order));
        }
        Ok(QSeries { order, coeffs: self.coeffs[..=order].to_vec() })
    }

    fn same_order(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order == other.order {
            Ok(())
        } else {
            Err(SeriesError::OrderMismatch(self.order, other.order))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(QSeries { order: self.order, coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(QSeries { order: self.order, coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_order(other)?;
        let mut out = Self::zero(self.order);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=self.order - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.checked_mul(&other.invert()?)
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let c0 = unit_inverse(&self.coeffs[0])?;
        let mut out = Self::zero(self.order);
        out.coeffs[0] = c0.clone();
        for n in 1..=self.order {
            let mut acc = BigInt::zero();
            for j in 1..=n {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out.coeffs[n - j];
                }
            }
            out.coeffs[n] = -(&c0 * acc);
        }
        Ok(out)
    }

    /// Integer power; negative exponents need a unit constant term.
    pub fn pow(&self, exp: i64) -> Result<Self, SeriesError> {
        let base = if exp < 0 { self.invert()? } else { self.clone() };
        Ok(power(base, exp.unsigned_abs(), Self::one(self.order), |a, b| a.checked_mul(b).expect("same order")))
    }

    /// Multiplies by `sign * q^shift`.
    pub fn shifted(&self, negative: bool, shift: usize) -> Self {
        let mut out = Self::zero(self.order);
        for n in shift..=self.order {
            out.coeffs[n] = if negative { -&self.coeffs[n - shift] } else { self.coeffs[n - shift].clone() };
        }
        out
    }

    /// TSV dump with one `n<TAB>coefficient` line per exponent.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tcoefficient\n");
        for (n, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{n}\t{c}\n"));
        }
        out
    }
}

fn unit_inverse(c: &BigInt) -> Result<BigInt, SeriesError> {
    if c.abs().is_one() {
        Ok(c.clone())
    } else {
        Err(SeriesError::NonUnitConstantTerm)
    }
}

fn power<T: Clone>(mut base: T, mut exp: u64, one: T, mul: impl Fn(&T, &T) -> T) -> T {
    let mut acc = one;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(&acc, &base);
        }
        exp >>= 1;
        if exp > 0 {
            base = mul(&base, &base);
        }
    }
    acc
}

impl FactorOps for QSeries {
    fn mul_binomial(&mut self, c: i64, x_exp: u32, q_exp: usize) {
        debug_assert_eq!(x_exp, 0);
        if q_exp == 0 {
            let scale = BigInt::from(1 + c);
            self.coeffs.iter_mut().for_each(|a| *a *= &scale);
            return;
        }
        for n in (q_exp..=self.order).rev() {
            let t = &self.coeffs[n - q_exp] * c;
            self.coeffs[n] += t;
        }
    }

    fn div_binomial(&mut self, c: i64, x_exp: u32, q_exp: usize) {
        debug_assert!(x_exp == 0 && q_exp >= 1);
        for n in q_exp..=self.order {
            let t = &self.coeffs[n - q_exp] * c;
            self.coeffs[n] -= t;
        }
    }

    fn order(&self) -> usize {
        self.order
    }
}

macro_rules! forward_ops {
    ($ty:ty) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: Self) -> $ty {
                self.checked_add(rhs).expect("series orders must match")
            }
        }
        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: Self) -> $ty {
                self.checked_sub(rhs).expect("series orders must match")
            }
        }
        impl Mul for &$ty {
            type Output = $ty;
            fn mul(self, rhs: Self) -> $ty {
                self.checked_mul(rhs).expect("series orders must match")
            }
        }
        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                <$ty>::zero(self.order()).checked_sub(self).expect("same order")
            }
        }
    };
}

forward_ops!(QSeries);
forward_ops!(XQSeries);

type Poly = Vec<BigInt>;

fn trim(p: &mut Poly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_add_scaled(dst: &mut Poly, src: &[BigInt], scale: i64, shift: usize) {
    if src.is_empty() {
        return;
    }
    if dst.len() < src.len() + shift {
        dst.resize(src.len() + shift, BigInt::zero());
    }
    for (j, c) in src.iter().enumerate() {
        dst[j + shift] += c * scale;
    }
    trim(dst);
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    trim(&mut out);
    out
}

/// Truncated series in `q` whose coefficients are polynomials in `x`.
///
/// `coeffs[n]` holds the polynomial multiplying `q^n`, lowest `x` power first,
/// with trailing zeros removed so structural equality is series equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct XQSeries {
    order: usize,
    coeffs: Vec<Poly>,
}

impl XQSeries {
    pub fn zero(order: usize) -> Self {
        XQSeries { order, coeffs: vec![Vec::new(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = vec![BigInt::one()];
        s
    }

    /// `sign * x^a * q^b`, zero when `b` exceeds the order.
    pub fn monomial(order: usize, negative: bool, x_exp: u32, q_exp: usize) -> Self {
        let mut s = Self::zero(order);
        if q_exp <= order {
            let mut p = vec![BigInt::zero(); x_exp as usize + 1];
            p[x_exp as usize] = if negative { -BigInt::one() } else { BigInt::one() };
            s.coeffs[q_exp] = p;
        }
        s
    }

    /// Builds a series from `(m, n, coefficient)` triples for `x^m q^n`.
    pub fn from_triples<I, T>(order: usize, triples: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, T)>,
        T: Into<BigInt>,
    {
        let mut s = Self::zero(order);
        for (m, n, c) in triples {
            if n <= order {
                let mut p = vec![BigInt::zero(); m + 1];
                p[m] = c.into();
                poly_add_scaled(&mut s.coeffs[n], &p, 1, 0);
            }
        }
        s
    }

    pub fn from_q_series(s: &QSeries) -> Self {
        let coeffs = s
            .coeffs
            .iter()
            .map(|c| {
                let mut p = vec![c.clone()];
                trim(&mut p);
                p
            })
            .collect();
        XQSeries { order: s.order, coeffs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `x^m q^n`.
    pub fn coeff(&self, m: usize, n: usize) -> BigInt {
        self.coeffs[n].get(m).cloned().unwrap_or_default()
    }

    /// Polynomial in `x` multiplying `q^n`, lowest power first.
    pub fn q_coeff(&self, n: usize) -> &[BigInt] {
        &self.coeffs[n]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Vec::is_empty)
    }

    /// Highest power of `x` present in the coefficient of `q^n`.
    pub fn x_degree(&self, n: usize) -> Option<usize> {
        self.coeffs[n].len().checked_sub(1)
    }

    /// Whether the `x`-degree of every `q^n` coefficient is at most `n`.
    pub fn respects_degree_bound(&self) -> bool {
        (0..=self.order).all(|n| self.x_degree(n).map_or(true, |d| d <= n))
    }

    fn same_order(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order == other.order {
            Ok(())
        } else {
            Err(SeriesError::OrderMismatch(self.order, other.order))
        }
    }

    pub fn truncate(&self, order: usize) -> Result<Self, SeriesError> {
        if order > self.order {
            return Err(SeriesError::OrderMismatch(self.order, order));
        }
        Ok(XQSeries { order, coeffs: self.coeffs[..=order].to_vec() })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_order(other)?;
        let mut out = self.clone();
        for (dst, src) in out.coeffs.iter_mut().zip(&other.coeffs) {
            poly_add_scaled(dst, src, 1, 0);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_order(other)?;
        let mut out = self.clone();
        for (dst, src) in out.coeffs.iter_mut().zip(&other.coeffs) {
            poly_add_scaled(dst, src, -1, 0);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_order(other)?;
        let mut out = Self::zero(self.order);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            for (j, b) in other.coeffs[..=self.order - i].iter().enumerate() {
                if !b.is_empty() {
                    let prod = poly_mul(a, b);
                    poly_add_scaled(&mut out.coeffs[i + j], &prod, 1, 0);
                }
            }
        }
        Ok(out)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.checked_mul(&other.invert()?)
    }

    /// Multiplicative inverse; the `q^0` coefficient must be the constant
    /// polynomial `+1` or `-1`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let c0 = match self.coeffs[0].as_slice() {
            [c] => unit_inverse(c)?,
            _ => return Err(SeriesError::NonUnitConstantTerm),
        };
        let sign: i64 = if c0.is_negative() { 1 } else { -1 };
        let mut out = Self::zero(self.order);
        out.coeffs[0] = vec![c0];
        for n in 1..=self.order {
            let mut acc = Vec::new();
            for j in 1..=n {
                if !self.coeffs[j].is_empty() && !out.coeffs[n - j].is_empty() {
                    let prod = poly_mul(&self.coeffs[j], &out.coeffs[n - j]);
                    poly_add_scaled(&mut acc, &prod, sign, 0);
                }
            }
            out.coeffs[n] = acc;
        }
        Ok(out)
    }

    pub fn pow(&self, exp: i64) -> Result<Self, SeriesError> {
        let base = if exp < 0 { self.invert()? } else { self.clone() };
        Ok(power(base, exp.unsigned_abs(), Self::one(self.order), |a, b| a.checked_mul(b).expect("same order")))
    }

    /// Multiplies by `sign * x^a * q^b`.
    pub fn shifted(&self, negative: bool, x_exp: u32, q_exp: usize) -> Self {
        let mut out = Self::zero(self.order);
        let scale = if negative { -1 } else { 1 };
        for n in q_exp..=self.order {
            poly_add_scaled(&mut out.coeffs[n], &self.coeffs[n - q_exp], scale, x_exp as usize);
        }
        out
    }

    /// The substitution `x -> xq`: `x^m q^n` becomes `x^m q^(m+n)`.
    pub fn substitute_xq(&self) -> Self {
        let mut out = Self::zero(self.order);
        for (n, p) in self.coeffs.iter().enumerate() {
            for (m, c) in p.iter().enumerate() {
                if !c.is_zero() && n + m <= self.order {
                    let target = &mut out.coeffs[n + m];
                    if target.len() <= m {
                        target.resize(m + 1, BigInt::zero());
                    }
                    target[m] += c;
                }
            }
        }
        out.coeffs.iter_mut().for_each(trim);
        out
    }

    /// Specialization `x = 1`.
    pub fn at_x_one(&self) -> QSeries {
        QSeries {
            order: self.order,
            coeffs: self.coeffs.iter().map(|p| p.iter().sum()).collect(),
        }
    }

    /// Nonzero coefficients as `(m, n, coefficient)`, n-major.
    pub fn triples(&self) -> Vec<(usize, usize, BigInt)> {
        let mut out = Vec::new();
        for (n, p) in self.coeffs.iter().enumerate() {
            for (m, c) in p.iter().enumerate() {
                if !c.is_zero() {
                    out.push((m, n, c.clone()));
                }
            }
        }
        out
    }

    /// TSV dump with one `m<TAB>n<TAB>coefficient` line per nonzero term.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("m\tn\tcoefficient\n");
        for (m, n, c) in self.triples() {
            out.push_str(&format!("{m}\t{n}\t{c}\n"));
        }
        out
    }
}

impl FactorOps for XQSeries {
    fn mul_binomial(&mut self, c: i64, x_exp: u32, q_exp: usize) {
        if q_exp == 0 {
            for p in &mut self.coeffs {
                let src = p.clone();
                if x_exp == 0 {
                    p.iter_mut().for_each(|a| *a *= 1 + c);
                    trim(p);
                } else {
                    poly_add_scaled(p, &src, c, x_exp as usize);
                }
            }
            return;
        }
        for n in (q_exp..=self.order).rev() {
            let src = self.coeffs[n - q_exp].clone();
            poly_add_scaled(&mut self.coeffs[n], &src, c, x_exp as usize);
        }
    }

    fn div_binomial(&mut self, c: i64, x_exp: u32, q_exp: usize) {
        debug_assert!(q_exp >= 1);
        for n in q_exp..=self.order {
            let src = self.coeffs[n - q_exp].clone();
            poly_add_scaled(&mut self.coeffs[n], &src, -c, x_exp as usize);
        }
    }

    fn order(&self) -> usize {
        self.order
    }
}

/// The monomials `a * base^t` whose factors `1 - a base^t` are nontrivial at
/// the given order, as `(c, x_exp, q_exp)` with factor `1 + c x^.. q^..`.
fn factors(
    args: &[Monomial],
    base: Monomial,
    length: Length,
    order: usize,
) -> Result<Vec<(i64, u32, usize)>, SeriesError> {
    if base.q_exp < 1 {
        return Err(SeriesError::IllFormedMonomial(base, "a Pochhammer base needs a positive power of q"));
    }
    let mut out = Vec::new();
    for &a in args {
        if a.q_exp < 0 || (a.q_exp == 0 && a.x_exp != 0) {
            return Err(SeriesError::IllFormedMonomial(a, "a Pochhammer argument needs a positive power of q"));
        }
        let mut t: u64 = 0;
        loop {
            if let Length::Finite(len) = length {
                if t >= len {
                    break;
                }
            }
            let q_exp = a.q_exp as u128 + u128::from(t) * base.q_exp as u128;
            if q_exp > order as u128 {
                break;
            }
            let negative = a.negative ^ (base.negative && t % 2 == 1);
            let x_exp = u64::from(a.x_exp) + t * u64::from(base.x_exp);
            let x_exp = u32::try_from(x_exp)
                .map_err(|_| SeriesError::InvalidParameters("x exponent overflow".to_string()))?;
            out.push((if negative { 1 } else { -1 }, x_exp, q_exp as usize));
            t += 1;
        }
    }
    Ok(out)
}

fn has_x(args: &[Monomial], base: Monomial) -> bool {
    base.x_exp != 0 || args.iter().any(|a| a.x_exp != 0)
}

/// `(a_1, ..., a_r; base)_length` as a bivariate series.
///
/// Each argument must carry a positive power of `q` (the constants `1` and
/// `-1` are also accepted, contributing the single factor `1 - a`), and the
/// base must carry a positive power of `q`, so infinite products terminate at
/// the truncation order.
pub fn pochhammer(args: &[Monomial], base: Monomial, length: Length, order: usize) -> Result<XQSeries, SeriesError> {
    let mut s = XQSeries::one(order);
    for (c, x, q) in factors(args, base, length, order)? {
        s.mul_binomial(c, x, q);
    }
    Ok(s)
}

/// `(a_1, ..., a_r; base)_length` for arguments and base free of `x`.
pub fn pochhammer_q(args: &[Monomial], base: Monomial, length: Length, order: usize) -> Result<QSeries, SeriesError> {
    if has_x(args, base) {
        return Err(SeriesError::InvalidParameters("x in a q-only product".to_string()));
    }
    let mut s = QSeries::one(order);
    for (c, x, q) in factors(args, base, length, order)? {
        s.mul_binomial(c, x, q);
    }
    Ok(s)
}

fn divide_by_product<S: FactorOps>(
    s: &mut S,
    args: &[Monomial],
    base: Monomial,
    length: Length,
) -> Result<(), SeriesError> {
    for (c, x, q) in factors(args, base, length, s.order())? {
        if q == 0 {
            // Constant factor 1 - a is 0 or 2.
            return Err(SeriesError::NonUnitConstantTerm);
        }
        s.div_binomial(c, x, q);
    }
    Ok(())
}

/// `s / (a_1, ..., a_r; base)_length`.
pub fn divide_by_pochhammer(s: &XQSeries, args: &[Monomial], base: Monomial, length: Length) -> Result<XQSeries, SeriesError> {
    let mut out = s.clone();
    divide_by_product(&mut out, args, base, length)?;
    Ok(out)
}

pub fn divide_by_pochhammer_q(s: &QSeries, args: &[Monomial], base: Monomial, length: Length) -> Result<QSeries, SeriesError> {
    if has_x(args, base) {
        return Err(SeriesError::InvalidParameters("x in a q-only product".to_string()));
    }
    let mut out = s.clone();
    divide_by_product(&mut out, args, base, length)?;
    Ok(out)
}

fn check_ki(k: u32, i: u32, allow_zero_i: bool) -> Result<(), SeriesError> {
    let low = u32::from(!allow_zero_i);
    if k < 1 || i < low || i > k {
        return Err(SeriesError::InvalidParameters(format!("need {low} <= i <= k and k >= 1, got k={k}, i={i}")));
    }
    Ok(())
}

fn binom2(n: u64) -> u64 {
    n * (n.saturating_sub(1)) / 2
}

/// `W_{k,i}(x;q)`: the sum over `n >= 0` of
/// `(-1)^n q^((2k-1)C(n+1,2) - in) x^((k-1)n) (1 - x^i q^((2n+1)i)) (-xq;q)_inf
/// / ((q;q)_n (xq^(n+1);q)_inf)`.
///
/// The `n`-th term starts at `q^((2k-1)C(n+1,2) - in)`, which grows
/// quadratically, so only finitely many terms reach the truncation order.
pub fn series_w(k: u32, i: u32, order: usize) -> Result<XQSeries, SeriesError> {
    check_ki(k, i, true)?;
    let modulus = u64::from(2 * k - 1);
    let (k, i) = (u64::from(k), u64::from(i));
    let q = Monomial::q(1);
    let common = pochhammer(&[Monomial::xq(1, 1).neg()], q, Length::Infinite, order)?;
    let mut acc = XQSeries::zero(order);
    for n in 0u64.. {
        let lead = modulus * binom2(n + 1) - i * n;
        if lead > order as u64 {
            break;
        }
        let mut term = common.clone();
        let kill_q = ((2 * n + 1) * i).min(order as u64 + 1);
        if i == 0 {
            term.mul_binomial(-1, 0, 0);
        } else if kill_q <= order as u64 {
            term.mul_binomial(-1, i as u32, kill_q as usize);
        }
        let mut term = term.shifted(n % 2 == 1, ((k - 1) * n) as u32, lead as usize);
        for t in 1..=n.min(order as u64) {
            term.div_binomial(-1, 0, t as usize);
        }
        for t in (n + 1)..=(order as u64) {
            term.div_binomial(-1, 1, t as usize);
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

/// `J~_{k,i}(-1/q;x;q) = W_{k,i}(x;q) - x W_{k,i-1}(x;q)`.
pub fn series_j_tilde_spec(k: u32, i: u32, order: usize) -> Result<XQSeries, SeriesError> {
    check_ki(k, i, false)?;
    let lower = series_w(k, i - 1, order)?.shifted(false, 1, 0);
    Ok(&series_w(k, i, order)? - &lower)
}

/// Generating function of `D_{k,i}(n)`: `W_{k,i}(1;q)`.
pub fn gen_d(k: u32, i: u32, order: usize) -> Result<QSeries, SeriesError> {
    check_ki(k, i, false)?;
    Ok(series_w(k, i, order)?.at_x_one())
}

/// Exponent and sign of the `n`-th theta term
/// `(-1)^n q^((2k-1)C(n+1,2) - in)` for any integer `n`.
fn theta_exponent(modulus: i64, i: i64, n: i64) -> i64 {
    modulus * n * (n + 1) / 2 - i * n
}

/// The bilateral sum over all integers `n` of `(-1)^n q^((2k-1)C(n+1,2) - in)`.
pub fn bilateral_theta(k: u32, i: u32, order: usize) -> Result<QSeries, SeriesError> {
    check_ki(k, i, false)?;
    let (modulus, i) = (i64::from(2 * k - 1), i64::from(i));
    let mut s = QSeries::zero(order);
    // Exponents are non-decreasing in n >= 0 and increasing in n <= -1.
    for range in [Box::new(0i64..) as Box<dyn Iterator<Item = i64>>, Box::new((1i64..).map(|p| -p))] {
        for n in range {
            let e = theta_exponent(modulus, i, n);
            if e > order as i64 {
                break;
            }
            let sign = if n.rem_euclid(2) == 1 { -1 } else { 1 };
            s.coeffs[e as usize] += sign;
        }
    }
    Ok(s)
}

/// The two one-sided sums whose sum is the bilateral theta series:
/// `sum (-1)^n q^((2k-1)C(n+1,2) - in)` and
/// `-sum (-1)^n q^((2k-1)C(n+1,2) + i(n+1))`, both over `n >= 0`.
pub fn unilateral_theta_pair(k: u32, i: u32, order: usize) -> Result<(QSeries, QSeries), SeriesError> {
    check_ki(k, i, false)?;
    let (modulus, i) = (u64::from(2 * k - 1), u64::from(i));
    let mut first = QSeries::zero(order);
    let mut second = QSeries::zero(order);
    for n in 0u64.. {
        let e1 = modulus * binom2(n + 1) - i * n;
        let e2 = modulus * binom2(n + 1) + i * (n + 1);
        if e1 > order as u64 && e2 > order as u64 {
            break;
        }
        let sign: i64 = if n % 2 == 1 { -1 } else { 1 };
        if e1 <= order as u64 {
            first.coeffs[e1 as usize] += sign;
        }
        if e2 <= order as u64 {
            second.coeffs[e2 as usize] -= sign;
        }
    }
    Ok((first, second))
}

/// `(q^i, q^(2k-1-i), q^(2k-1); q^(2k-1))_inf`.
pub fn theta_product(k: u32, i: u32, order: usize) -> Result<QSeries, SeriesError> {
    check_ki(k, i, false)?;
    let modulus = i64::from(2 * k - 1);
    let i = i64::from(i);
    pochhammer_q(
        &[Monomial::q(i), Monomial::q(modulus - i), Monomial::q(modulus)],
        Monomial::q(modulus),
        Length::Infinite,
        order,
    )
}

/// `theta_product(k, i) * (-q;q)_inf / (q;q)_inf`.
pub fn dgen_product(k: u32, i: u32, order: usize) -> Result<QSeries, SeriesError> {
    let q = Monomial::q(1);
    let num = &theta_product(k, i, order)? * &pochhammer_q(&[q.neg()], q, Length::Infinite, order)?;
    divide_by_pochhammer_q(&num, &[q], q, Length::Infinite)
}

/// Product over positive `j` of `1/(1-q^j)` for `j mod M` in
/// `allowed_plain` and `(1+q^j)` for `j mod M` in `allowed_overlined`.
pub fn residue_product(
    modulus: u32,
    allowed_plain: &[u32],
    allowed_overlined: &[u32],
    order: usize,
) -> Result<QSeries, SeriesError> {
    if modulus == 0 {
        return Err(SeriesError::InvalidParameters("modulus must be positive".to_string()));
    }
    if let Some(r) = allowed_plain.iter().chain(allowed_overlined).find(|&&r| r >= modulus) {
        return Err(SeriesError::InvalidParameters(format!("residue {r} not below modulus {modulus}")));
    }
    let mut s = QSeries::one(order);
    for j in 1..=order {
        let r = (j % modulus as usize) as u32;
        if allowed_overlined.contains(&r) {
            s.mul_binomial(1, 0, j);
        }
        if allowed_plain.contains(&r) {
            s.div_binomial(-1, 0, j);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &QSeries) -> Vec<i64> {
        s.coeffs().iter().map(|c| i64::try_from(c).unwrap()).collect()
    }

    const Q: Monomial = Monomial { negative: false, x_exp: 0, q_exp: 1 };

    #[test]
    fn pochhammer_basics() {
        let dist = pochhammer_q(&[Q.neg()], Q, Length::Infinite, 4).unwrap();
        assert_eq!(ints(&dist), vec![1, 1, 1, 2, 2]);
        assert_eq!(pochhammer_q(&[Q], Q, Length::Finite(0), 5).unwrap(), QSeries::one(5));
        let triple = pochhammer_q(&[Monomial::q(1), Monomial::q(4), Monomial::q(5)], Monomial::q(5), Length::Infinite, 12)
            .unwrap();
        assert_eq!(triple.coeff(0), &BigInt::one());
        // (q;q)_3 = (1-q)(1-q^2)(1-q^3)
        let finite = pochhammer_q(&[Q], Q, Length::Finite(3), 7).unwrap();
        assert_eq!(ints(&finite), vec![1, -1, -1, 0, 1, 1, -1, 0]);
        // A constant argument contributes 1 - a.
        assert!(pochhammer_q(&[Monomial::ONE], Q, Length::Infinite, 5).unwrap().is_zero());
    }

    #[test]
    fn pochhammer_rejects_ill_formed() {
        assert!(matches!(
            pochhammer_q(&[Q], Monomial::q(0), Length::Infinite, 4),
            Err(SeriesError::IllFormedMonomial(..))
        ));
        assert!(matches!(
            pochhammer(&[Monomial::xq(1, 0)], Q, Length::Infinite, 4),
            Err(SeriesError::IllFormedMonomial(..))
        ));
        assert!(matches!(
            pochhammer_q(&[Monomial::q(-1)], Q, Length::Infinite, 4),
            Err(SeriesError::IllFormedMonomial(..))
        ));
    }

    #[test]
    fn inversion() {
        let one_minus_q = QSeries::from_coeffs(3, [1, -1]);
        assert_eq!(ints(&one_minus_q.invert().unwrap()), vec![1, 1, 1, 1]);
        let euler = pochhammer_q(&[Q], Q, Length::Infinite, 4).unwrap();
        assert_eq!(ints(&euler.invert().unwrap()), vec![1, 1, 2, 3, 5]);
        assert_eq!(QSeries::from_coeffs(3, [2, 1]).invert(), Err(SeriesError::NonUnitConstantTerm));
        let neg = QSeries::from_coeffs(5, [-1, 3, 0, 2]);
        assert_eq!(&neg * &neg.invert().unwrap(), QSeries::one(5));
        assert_eq!(euler.pow(-1).unwrap(), euler.invert().unwrap());
        assert_eq!(euler.pow(0).unwrap(), QSeries::one(4));
    }

    #[test]
    fn division_by_product_matches_inverse() {
        let euler = pochhammer_q(&[Q], Q, Length::Infinite, 10).unwrap();
        let direct = divide_by_pochhammer_q(&QSeries::one(10), &[Q], Q, Length::Infinite).unwrap();
        assert_eq!(direct, euler.invert().unwrap());
        let num = XQSeries::one(8);
        let args = [Monomial::xq(1, 2)];
        let prod = pochhammer(&args, Q, Length::Infinite, 8).unwrap();
        let divided = divide_by_pochhammer(&num, &args, Q, Length::Infinite).unwrap();
        assert_eq!(divided, prod.invert().unwrap());
        assert!(matches!(
            divide_by_pochhammer_q(&QSeries::one(3), &[Monomial::ONE], Q, Length::Infinite),
            Err(SeriesError::NonUnitConstantTerm)
        ));
    }

    #[test]
    fn mixing_orders_is_an_error() {
        let a = QSeries::one(3);
        let b = QSeries::one(4);
        assert_eq!(a.checked_add(&b), Err(SeriesError::OrderMismatch(3, 4)));
        assert_eq!(XQSeries::one(2).checked_mul(&XQSeries::one(5)), Err(SeriesError::OrderMismatch(2, 5)));
        assert!(a.truncate(5).is_err());
        assert_eq!(b.truncate(3).unwrap(), a);
    }

    #[test]
    fn substitution_and_specialization() {
        // x^2 q^3 -> x^2 q^5
        let s = XQSeries::from_triples(6, [(2usize, 3usize, 7), (0, 1, 1)]);
        let t = s.substitute_xq();
        assert_eq!(t.coeff(2, 5), BigInt::from(7));
        assert_eq!(t.coeff(0, 1), BigInt::one());
        assert_eq!(t.coeff(2, 3), BigInt::zero());
        assert_eq!(ints(&s.at_x_one()), vec![0, 1, 0, 7, 0, 0, 0]);
        // Terms pushed beyond the order disappear.
        assert!(XQSeries::from_triples(3, [(2usize, 2usize, 1)]).substitute_xq().is_zero());
    }

    #[test]
    fn w_small_values() {
        for k in 1..=4 {
            assert!(series_w(k, 0, 10).unwrap().is_zero());
        }
        for k in 2..=4 {
            for i in 1..=k {
                let w = series_w(k, i, 10).unwrap();
                assert_eq!(w.coeff(0, 0), BigInt::one(), "k={k} i={i}");
                assert!(w.respects_degree_bound());
            }
        }
        let w = series_w(3, 2, 6).unwrap();
        assert_eq!(w.coeff(2, 3), BigInt::from(3));
        assert_eq!(w.coeff(1, 1), BigInt::from(2));
        let d = gen_d(3, 2, 6).unwrap();
        assert_eq!(ints(&d)[..3], [1, 2, 3]);
        assert!(series_w(3, 4, 5).is_err());
        assert!(series_w(0, 0, 5).is_err());
    }

    #[test]
    fn j_tilde_at_i_one_is_w() {
        for k in 1..=4 {
            assert_eq!(series_j_tilde_spec(k, 1, 12).unwrap(), series_w(k, 1, 12).unwrap());
        }
        // x W_{3,1} contributes -x^2 q, beyond the x-degree bound.
        let j = series_j_tilde_spec(3, 2, 6).unwrap();
        assert_eq!(j.coeff(2, 1), BigInt::from(-1));
        assert!(!j.respects_degree_bound());
    }

    #[test]
    fn residue_products() {
        let all = residue_product(1, &[0], &[0], 4).unwrap();
        assert_eq!(ints(&all), vec![1, 2, 4, 8, 14]);
        assert_eq!(residue_product(5, &[], &[], 6).unwrap(), QSeries::one(6));
        // C_{3,2}: nonoverlined residues 0, 2, 3 mod 5 forbidden.
        let c = residue_product(5, &[1, 4], &[0, 1, 2, 3, 4], 2).unwrap();
        assert_eq!(c.coeff(2), &BigInt::from(3));
        assert!(residue_product(0, &[], &[], 3).is_err());
        assert!(residue_product(3, &[3], &[], 3).is_err());
    }

    #[test]
    fn theta_at_three_two() {
        let theta = bilateral_theta(3, 2, 30).unwrap();
        assert_eq!(theta.coeff(0), &BigInt::one());
        assert_eq!(theta, theta_product(3, 2, 30).unwrap());
        let (a, b) = unilateral_theta_pair(3, 2, 30).unwrap();
        assert_eq!(&a + &b, theta);
        assert_eq!(ints(&theta)[..4], [1, 0, -1, -1]);
    }

    #[test]
    fn tsv_dumps() {
        let s = QSeries::from_coeffs(2, [1, -3]);
        assert_eq!(s.to_tsv(), "n\tcoefficient\n0\t1\n1\t-3\n2\t0\n");
        let x = XQSeries::from_triples(3, [(2usize, 3usize, 3), (0, 0, 1)]);
        assert_eq!(x.to_tsv(), "m\tn\tcoefficient\n0\t0\t1\n2\t3\t3\n");
    }

    #[test]
    fn monomial_display() {
        assert_eq!(Monomial::q(1).to_string(), "q");
        assert_eq!(Monomial::xq(2, 3).neg().to_string(), "-x^2q^3");
        assert_eq!(Monomial::ONE.neg().to_string(), "-1");
        assert_eq!(Monomial::xq(1, 0).to_string(), "x");
    }
}
