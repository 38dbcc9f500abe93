//! A small language for Pochhammer-product formulas.
//!
//! ```text
//! expr := term {("*" | "/") term}
//! term := atom ["^" int]
//! atom := poch | "(" expr ")" | mono
//! poch := "(" mono {"," mono} ";" mono ")" ("_inf" | "_∞" | "_" digits)
//! mono := ["-"] ("1" | ["x" ["^" int]] ["q" ["^" int]])
//! int  := ["-"] digits
//! ```
//!
//! Whitespace is insignificant. For example the generating function of
//! `C_{3,2}(n)` is written `(q^2,q^3,q^5;q^5)_inf * (-q;q)_inf / (q;q)_inf`.
//! Errors carry 1-based `line:column` positions.

use std::fmt;

use thiserror::Error;

use crate::series::{self, Length, Monomial, QSeries, SeriesError, XQSeries};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QexprError {
    #[error("{pos}: syntax error, expected {expected}")]
    Syntax { pos: Position, expected: String },
    #[error("{pos}: ill-formed monomial `{monomial}`: {reason}")]
    IllFormedMonomial { pos: Position, monomial: String, reason: &'static str },
    #[error("{start}-{end}: constant term is not +1 or -1")]
    NonUnitConstantTerm { start: Position, end: Position },
    #[error("{pos}: {reason}")]
    Unsupported { pos: Position, reason: String },
}

impl QexprError {
    pub fn position(&self) -> Position {
        match self {
            QexprError::Syntax { pos, .. }
            | QexprError::IllFormedMonomial { pos, .. }
            | QexprError::Unsupported { pos, .. } => *pos,
            QexprError::NonUnitConstantTerm { start, .. } => *start,
        }
    }
}

/// Byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Product(Box<Expr>, Box<Expr>),
    Quotient(Box<Expr>, Box<Expr>),
    Power(Box<Expr>, i64),
    Poch { args: Vec<Monomial>, base: Monomial, length: Length },
    Mono(Monomial),
    Paren(Box<Expr>),
}

/// Structural equality; source spans are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Semi,
    Star,
    Slash,
    Caret,
    Minus,
    Underscore,
    X,
    Q,
    Inf,
    Int(u64),
}

impl Tok {
    fn describe(self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Underscore => "`_`".into(),
            Tok::X => "`x`".into(),
            Tok::Q => "`q`".into(),
            Tok::Inf => "`inf`".into(),
            Tok::Int(n) => format!("`{n}`"),
        }
    }
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn position(&self, offset: usize) -> Position {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Position { line, column }
    }
}

fn lex(src: &Source<'_>) -> Result<Vec<(Tok, Span)>, QexprError> {
    let text = src.text;
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        let single = match c {
            c if c.is_whitespace() => continue,
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '-' => Some(Tok::Minus),
            '_' => Some(Tok::Underscore),
            'x' => Some(Tok::X),
            'q' => Some(Tok::Q),
            '∞' => Some(Tok::Inf),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, Span { start, end: start + c.len_utf8() }));
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = start + 1;
            while let Some(&(i, d)) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = i + 1;
                chars.next();
            }
            let value = text[start..end].parse::<u64>().map_err(|_| QexprError::Syntax {
                pos: src.position(start),
                expected: "an integer that fits in 64 bits".into(),
            })?;
            out.push((Tok::Int(value), Span { start, end }));
            continue;
        }
        if text[start..].starts_with("inf") {
            chars.next();
            chars.next();
            out.push((Tok::Inf, Span { start, end: start + 3 }));
            continue;
        }
        return Err(QexprError::Syntax { pos: src.position(start), expected: "one of ( ) , ; * / ^ - _ x q inf or a digit".into() });
    }
    Ok(out)
}

struct Parser<'a> {
    src: Source<'a>,
    toks: Vec<(Tok, Span)>,
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|t| t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src.text.len(), |t| t.1.start)
    }

    fn last_end(&self) -> usize {
        self.pos.checked_sub(1).map_or(0, |p| self.toks[p].1.end)
    }

    fn error<T>(&self, expected: &str) -> Result<T, QexprError> {
        let found = self.peek().map_or("end of input".to_string(), Tok::describe);
        Err(QexprError::Syntax { pos: self.src.position(self.offset()), expected: format!("{expected}, found {found}") })
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), QexprError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.error(&tok.describe())
        }
    }

    fn int(&mut self) -> Result<i64, QexprError> {
        let negative = self.eat(Tok::Minus);
        match self.peek() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                let v = i64::try_from(v).map_err(|_| QexprError::Syntax {
                    pos: self.src.position(self.toks[self.pos - 1].1.start),
                    expected: "an exponent below 2^63".into(),
                })?;
                Ok(if negative { -v } else { v })
            }
            _ => self.error("an integer"),
        }
    }

    fn expr(&mut self) -> Result<Expr, QexprError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(QexprError::Syntax { pos: self.src.position(self.offset()), expected: "less deeply nested input".into() });
        }
        let start = self.offset();
        let mut lhs = self.term()?;
        loop {
            let quotient = match self.peek() {
                Some(Tok::Star) => false,
                Some(Tok::Slash) => true,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            let span = Span { start, end: self.last_end() };
            let kind = if quotient {
                ExprKind::Quotient(Box::new(lhs), Box::new(rhs))
            } else {
                ExprKind::Product(Box::new(lhs), Box::new(rhs))
            };
            lhs = Expr { kind, span };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, QexprError> {
        let start = self.offset();
        let atom = self.atom()?;
        if self.eat(Tok::Caret) {
            let exp = self.int()?;
            return Ok(Expr { kind: ExprKind::Power(Box::new(atom), exp), span: Span { start, end: self.last_end() } });
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Expr, QexprError> {
        let start = self.offset();
        if self.peek() == Some(Tok::LParen) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(first) = self.mono() {
                if matches!(self.peek(), Some(Tok::Comma | Tok::Semi)) {
                    return self.poch_rest(start, first);
                }
            }
            self.pos = save + 1;
            let inner = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Expr { kind: ExprKind::Paren(Box::new(inner)), span: Span { start, end: self.last_end() } });
        }
        let (mono, _) = self.mono()?;
        Ok(Expr { kind: ExprKind::Mono(mono), span: Span { start, end: self.last_end() } })
    }

    fn poch_rest(&mut self, start: usize, first: (Monomial, usize)) -> Result<Expr, QexprError> {
        let mut args = vec![first];
        while self.eat(Tok::Comma) {
            args.push(self.mono()?);
        }
        self.expect(Tok::Semi)?;
        let base = self.mono()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Underscore)?;
        let length = match self.peek() {
            Some(Tok::Inf) => Length::Infinite,
            Some(Tok::Int(n)) => Length::Finite(n),
            _ => return self.error("`inf` or a length"),
        };
        self.pos += 1;
        for &(m, at) in args.iter().chain(std::iter::once(&base)) {
            if m.q_exp < 1 {
                return Err(QexprError::IllFormedMonomial {
                    pos: self.src.position(at),
                    monomial: m.to_string(),
                    reason: "Pochhammer arguments and bases need a positive power of q",
                });
            }
        }
        Ok(Expr {
            kind: ExprKind::Poch { args: args.into_iter().map(|a| a.0).collect(), base: base.0, length },
            span: Span { start, end: self.last_end() },
        })
    }

    /// Parses a monomial, returning it with its start offset.
    fn mono(&mut self) -> Result<(Monomial, usize), QexprError> {
        let start = self.offset();
        let negative = self.eat(Tok::Minus);
        if self.peek() == Some(Tok::Int(1)) {
            self.pos += 1;
            return Ok((Monomial { negative, x_exp: 0, q_exp: 0 }, start));
        }
        let mut mono = Monomial { negative, x_exp: 0, q_exp: 0 };
        let mut any = false;
        if self.eat(Tok::X) {
            any = true;
            let e = if self.eat(Tok::Caret) { self.int()? } else { 1 };
            mono.x_exp = u32::try_from(e).map_err(|_| QexprError::IllFormedMonomial {
                pos: self.src.position(start),
                monomial: format!("x^{e}"),
                reason: "powers of x must be between 0 and 2^32",
            })?;
        }
        if self.eat(Tok::Q) {
            any = true;
            mono.q_exp = if self.eat(Tok::Caret) { self.int()? } else { 1 };
        }
        if !any {
            return self.error("a monomial (`1`, `x`, `q`, ...)");
        }
        Ok((mono, start))
    }
}

pub fn parse(text: &str) -> Result<Expr, QexprError> {
    let src = Source { text };
    let toks = lex(&src)?;
    let mut parser = Parser { src, toks, pos: 0, depth: 0 };
    let expr = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return parser.error("`*`, `/` or end of input");
    }
    Ok(expr)
}

/// Monomial with every exponent spelled out, so that a following `^n` is
/// read back as a power of the whole monomial.
fn explicit_mono(m: &Monomial) -> String {
    let mut s = String::new();
    if m.negative {
        s.push('-');
    }
    if m.x_exp == 0 && m.q_exp == 0 {
        s.push('1');
        return s;
    }
    if m.x_exp != 0 {
        s.push_str(&format!("x^{}", m.x_exp));
    }
    if m.q_exp != 0 {
        s.push_str(&format!("q^{}", m.q_exp));
    }
    s
}

/// Canonical text for an expression; parsing it gives back an equal tree.
pub fn unparse(expr: &Expr) -> String {
    match &expr.kind {
        ExprKind::Product(a, b) => format!("{}*{}", unparse(a), unparse(b)),
        ExprKind::Quotient(a, b) => format!("{}/{}", unparse(a), unparse(b)),
        ExprKind::Power(base, e) => match &base.kind {
            ExprKind::Mono(m) => format!("{}^{e}", explicit_mono(m)),
            _ => format!("{}^{e}", unparse(base)),
        },
        ExprKind::Poch { args, base, length } => {
            let args: Vec<String> = args.iter().map(ToString::to_string).collect();
            let len = match length {
                Length::Infinite => "inf".to_string(),
                Length::Finite(n) => n.to_string(),
            };
            format!("({};{base})_{len}", args.join(","))
        }
        ExprKind::Mono(m) => m.to_string(),
        ExprKind::Paren(inner) => format!("({})", unparse(inner)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&unparse(self))
    }
}

/// Binds an AST to its source text for error reporting.
struct Evaluator<'a> {
    src: Source<'a>,
    order: usize,
}

impl Evaluator<'_> {
    fn pos(&self, span: Span) -> Position {
        self.src.position(span.start)
    }

    fn non_unit(&self, span: Span) -> QexprError {
        QexprError::NonUnitConstantTerm { start: self.src.position(span.start), end: self.src.position(span.end) }
    }

    fn series_error(&self, span: Span, e: SeriesError) -> QexprError {
        match e {
            SeriesError::NonUnitConstantTerm => self.non_unit(span),
            SeriesError::IllFormedMonomial(m, reason) => {
                QexprError::IllFormedMonomial { pos: self.pos(span), monomial: m.to_string(), reason }
            }
            other => QexprError::Unsupported { pos: self.pos(span), reason: other.to_string() },
        }
    }

    fn q_only(&self, expr: &Expr) -> Result<QSeries, QexprError> {
        let lift = |r: Result<QSeries, SeriesError>, span| r.map_err(|e| self.series_error(span, e));
        match &expr.kind {
            ExprKind::Product(a, b) => Ok(&self.q_only(a)? * &self.q_only(b)?),
            ExprKind::Quotient(a, b) => {
                let den = self.q_only(b)?;
                let inv = lift(den.invert(), b.span)?;
                Ok(&self.q_only(a)? * &inv)
            }
            ExprKind::Power(base, e) => lift(self.q_only(base)?.pow(*e), base.span),
            ExprKind::Paren(inner) => self.q_only(inner),
            ExprKind::Poch { args, base, length } => {
                if args.iter().chain(std::iter::once(base)).any(|m| m.x_exp != 0) {
                    return Err(self.needs_x(expr.span));
                }
                lift(series::pochhammer_q(args, *base, *length, self.order), expr.span)
            }
            ExprKind::Mono(m) => {
                if m.x_exp != 0 {
                    return Err(self.needs_x(expr.span));
                }
                let q_exp = self.nonnegative_q(m, expr.span)?;
                Ok(QSeries::monomial(self.order, m.negative, q_exp))
            }
        }
    }

    fn needs_x(&self, span: Span) -> QexprError {
        QexprError::Unsupported { pos: self.pos(span), reason: "expression contains x; use the bivariate evaluator".into() }
    }

    fn nonnegative_q(&self, m: &Monomial, span: Span) -> Result<usize, QexprError> {
        if m.q_exp < 0 {
            return Err(QexprError::Unsupported { pos: self.pos(span), reason: format!("negative power of q in `{m}`") });
        }
        Ok(usize::try_from(m.q_exp).unwrap_or(usize::MAX))
    }

    fn bivariate(&self, expr: &Expr) -> Result<XQSeries, QexprError> {
        let lift = |r: Result<XQSeries, SeriesError>, span| r.map_err(|e| self.series_error(span, e));
        match &expr.kind {
            ExprKind::Product(a, b) => Ok(&self.bivariate(a)? * &self.bivariate(b)?),
            ExprKind::Quotient(a, b) => {
                let inv = lift(self.bivariate(b)?.invert(), b.span)?;
                Ok(&self.bivariate(a)? * &inv)
            }
            ExprKind::Power(base, e) => lift(self.bivariate(base)?.pow(*e), base.span),
            ExprKind::Paren(inner) => self.bivariate(inner),
            ExprKind::Poch { args, base, length } => {
                for m in args.iter().chain(std::iter::once(base)) {
                    self.degree_bounded(m, expr.span)?;
                }
                lift(series::pochhammer(args, *base, *length, self.order), expr.span)
            }
            ExprKind::Mono(m) => {
                let q_exp = self.degree_bounded(m, expr.span)?;
                Ok(XQSeries::monomial(self.order, m.negative, m.x_exp, q_exp))
            }
        }
    }

    /// Keeps every x-degree at most the q-degree, so values stay bounded by
    /// the truncation order.
    fn degree_bounded(&self, m: &Monomial, span: Span) -> Result<usize, QexprError> {
        let q_exp = self.nonnegative_q(m, span)?;
        if m.x_exp as usize > q_exp {
            return Err(QexprError::Unsupported {
                pos: self.pos(span),
                reason: format!("power of x exceeds power of q in `{m}`"),
            });
        }
        Ok(q_exp)
    }
}

/// Expands a q-only expression to the given order. `source` must be the text
/// `expr` was parsed from; it is used for error positions.
pub fn eval(expr: &Expr, source: &str, order: usize) -> Result<QSeries, QexprError> {
    Evaluator { src: Source { text: source }, order }.q_only(expr)
}

/// Expands an expression that may contain `x`. Every monomial must have
/// `x`-degree at most its `q`-degree.
pub fn eval_xq(expr: &Expr, source: &str, order: usize) -> Result<XQSeries, QexprError> {
    Evaluator { src: Source { text: source }, order }.bivariate(expr)
}

/// Parses and evaluates in one step.
pub fn eval_str(text: &str, order: usize) -> Result<QSeries, QexprError> {
    eval(&parse(text)?, text, order)
}

pub fn eval_xq_str(text: &str, order: usize) -> Result<XQSeries, QexprError> {
    eval_xq(&parse(text)?, text, order)
}
