//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients.
//!
//! Variables follow one global ordering: index 0 is `n` (the sequence
//! index) and index `i >= 1` is `m{i}`, the offset variable introduced by
//! the `i`-th reduction. A polynomial records how many of these variables
//! it ranges over; two polynomials can only be combined when that count
//! agrees. Use [`MultiPoly::extend_vars`] to read a polynomial in more
//! variables.
//!
//! The canonical text form lists terms in descending graded lexicographic
//! order, for instance `2*n^2 + n*m1 - 3`, and parses back to the same
//! term map.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Index of a variable in the global ordering `(n, m1, m2, ...)`.
pub type Var = usize;

/// The sequence variable.
pub const N: Var = 0;

/// Name of variable `v` in the global ordering.
pub fn var_name(v: Var) -> String {
    if v == N {
        "n".to_string()
    } else {
        format!("m{v}")
    }
}

/// Inverse of [`var_name`]. A bare `m` is accepted as `m1`.
pub fn parse_var(name: &str) -> Option<Var> {
    match name {
        "n" => Some(N),
        "m" => Some(1),
        _ => {
            let digits = name.strip_prefix('m')?;
            if digits.is_empty() || digits.starts_with('0') {
                return None;
            }
            digits.parse::<usize>().ok().filter(|&v| v >= 1)
        }
    }
}

/// Exponent vector, one slot per variable.
pub type Exponents = Vec<u32>;

/// Multivariate polynomial over ℤ in normal form.
///
/// No stored coefficient is zero and every exponent vector has length
/// `nvars`, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exponents, BigInt>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(BigInt::one(), nvars)
    }

    pub fn constant(c: impl Into<BigInt>, nvars: usize) -> Self {
        let c = c.into();
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The polynomial `v` in `nvars` variables.
    ///
    /// # Panics
    ///
    /// Panics if `v >= nvars`.
    pub fn var(v: Var, nvars: usize) -> Self {
        assert!(
            v < nvars,
            "variable {} outside of {nvars} variables",
            var_name(v)
        );
        let mut e = vec![0; nvars];
        e[v] = 1;
        Self::monomial(BigInt::one(), e)
    }

    pub fn monomial(c: impl Into<BigInt>, exponents: Exponents) -> Self {
        let c = c.into();
        let nvars = exponents.len();
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exponents, c);
        }
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// repeated exponents and dropping zeros.
    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, Exponents)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(Error::VarMismatch {
                    left: nvars,
                    right: e.len(),
                });
            }
            p.add_term(e, c.into());
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponents, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(e, c)| c.is_one() && e.iter().all(|&x| x == 0))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    /// The constant coefficient.
    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Degree in variable `v`; `None` for the zero polynomial.
    pub fn degree_in(&self, v: Var) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.get(v).copied().unwrap_or(0))
            .max()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// True iff no term has a positive exponent on `v`.
    pub fn is_independent_of(&self, v: Var) -> bool {
        self.terms
            .keys()
            .all(|e| e.get(v).copied().unwrap_or(0) == 0)
    }

    /// Largest absolute coefficient (zero for the zero polynomial).
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Reads the polynomial in `nvars` variables, `nvars >= self.nvars()`.
    /// The new variables do not occur.
    pub fn extend_vars(&self, nvars: usize) -> Result<Self> {
        if nvars < self.nvars {
            return Err(Error::VarMismatch {
                left: self.nvars,
                right: nvars,
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut e = e.clone();
                e.resize(nvars, 0);
                (e, c.clone())
            })
            .collect();
        Ok(Self { nvars, terms })
    }

    /// Drops trailing variables that do not occur; fails if one of them does.
    pub fn truncate_vars(&self, nvars: usize) -> Result<Self> {
        if nvars > self.nvars {
            return self.extend_vars(nvars);
        }
        for v in nvars..self.nvars {
            if !self.is_independent_of(v) {
                return Err(Error::VariableInUse(var_name(v)));
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e[..nvars].to_vec(), c.clone()))
            .collect();
        Ok(Self { nvars, terms })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zero(self.nvars);
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Replaces variable `v` by the polynomial `replacement` and expands.
    ///
    /// `replacement` must range over the same variables as `self`.
    pub fn substitute(&self, v: Var, replacement: &MultiPoly) -> Result<Self> {
        self.check_same(replacement)?;
        if v >= self.nvars {
            return Err(Error::UnknownVariable(var_name(v)));
        }
        let max_deg = self.degree_in(v).unwrap_or(0) as usize;
        let mut powers = Vec::with_capacity(max_deg + 1);
        powers.push(Self::one(self.nvars));
        for i in 1..=max_deg {
            let next = &powers[i - 1] * replacement;
            powers.push(next);
        }
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[v] as usize;
            let mut rest = e.clone();
            rest[v] = 0;
            if k == 0 {
                out.add_term(rest, c.clone());
                continue;
            }
            for (pe, pc) in &powers[k].terms {
                let merged = rest.iter().zip(pe).map(|(a, b)| a + b).collect();
                out.add_term(merged, c * pc);
            }
        }
        Ok(out)
    }

    /// Substitutes `v := v + offset_var`, appending `offset_var` to the
    /// variable list when it is not already present.
    pub fn shift_by_var(&self, v: Var, offset_var: Var) -> Result<Self> {
        if v >= self.nvars {
            return Err(Error::UnknownVariable(var_name(v)));
        }
        let nvars = self.nvars.max(offset_var + 1);
        let p = self.extend_vars(nvars)?;
        let rep = &MultiPoly::var(v, nvars) + &MultiPoly::var(offset_var, nvars);
        p.substitute(v, &rep)
    }

    /// Substitutes `v := v + offset` for an integer offset.
    pub fn shift_by_const(&self, v: Var, offset: impl Into<BigInt>) -> Result<Self> {
        if v >= self.nvars {
            return Err(Error::UnknownVariable(var_name(v)));
        }
        let rep = &MultiPoly::var(v, self.nvars) + &MultiPoly::constant(offset, self.nvars);
        self.substitute(v, &rep)
    }

    /// Substitutes the integer `value` for `v`. The variable count is kept.
    pub fn fix_var(&self, v: Var, value: impl Into<BigInt>) -> Result<Self> {
        if v >= self.nvars {
            return Err(Error::UnknownVariable(var_name(v)));
        }
        self.substitute(v, &MultiPoly::constant(value, self.nvars))
    }

    /// Renames variable `from` to `to`; `to` must not occur.
    pub fn rename_var(&self, from: Var, to: Var) -> Result<Self> {
        if from >= self.nvars {
            return Err(Error::UnknownVariable(var_name(from)));
        }
        if to >= self.nvars {
            return Err(Error::UnknownVariable(var_name(to)));
        }
        if from != to && !self.is_independent_of(to) {
            return Err(Error::VariableInUse(var_name(to)));
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut e = e.clone();
                e.swap(from, to);
                (e, c.clone())
            })
            .collect();
        Ok(Self {
            nvars: self.nvars,
            terms,
        })
    }

    /// Evaluates at an integer point. `point[v]` is the value of variable
    /// `v`; variables that do not occur may be omitted from the end.
    pub fn eval(&self, point: &[BigInt]) -> Result<BigInt> {
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let x = point
                    .get(v)
                    .ok_or_else(|| Error::MissingVariable(var_name(v)))?;
                t *= num_traits::pow(x.clone(), k as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Evaluates with `i64` inputs.
    pub fn eval_i64(&self, point: &[i64]) -> Result<BigInt> {
        let point: Vec<BigInt> = point.iter().map(|&x| BigInt::from(x)).collect();
        self.eval(&point)
    }

    /// Parses the text form in `nvars` variables. Accepts integers,
    /// variable names, `+ - *`, `^` with a non-negative integer exponent,
    /// and parentheses.
    pub fn parse(input: &str, nvars: usize) -> Result<Self> {
        let mut parser = Parser {
            input,
            chars: input.char_indices().peekable(),
            nvars,
        };
        let p = parser.expr()?;
        parser.skip_ws();
        if let Some(&(i, c)) = parser.chars.peek() {
            return Err(parser.err(format!("unexpected `{c}` at offset {i}")));
        }
        Ok(p)
    }

    /// Terms in canonical (descending graded lexicographic) order.
    pub fn sorted_terms(&self) -> Vec<(&Exponents, &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| grlex(b, a));
        v
    }
}

fn grlex(a: &Exponents, b: &Exponents) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors = Vec::new();
            let constant = e.iter().all(|&k| k == 0);
            if constant || !abs.is_one() {
                factors.push(abs.to_string());
            }
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(var_name(v)),
                    _ => factors.push(format!("{}^{k}", var_name(v))),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.nvars, self)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&MultiPoly> for &MultiPoly {
            type Output = MultiPoly;

            /// # Panics
            ///
            /// Panics when the variable counts differ.
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                self.$checked(rhs)
                    .expect("polynomial variable counts differ")
            }
        }

        impl $trait<MultiPoly> for MultiPoly {
            type Output = MultiPoly;

            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        -&self
    }
}

struct Parser<'a> {
    input: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            input: self.input.to_string(),
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.peek().map(|&(_, c)| c)
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.chars.next();
                    acc = &acc + &self.term()?;
                }
                Some('-') => {
                    self.chars.next();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.unary()?;
        while self.peek() == Some('*') {
            self.chars.next();
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some('-') => {
                self.chars.next();
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.chars.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.chars.next();
            self.skip_ws();
            let digits = self.take_while(|c| c.is_ascii_digit());
            let k: u32 = digits
                .parse()
                .map_err(|_| self.err("expected a non-negative integer exponent"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.chars.next();
        }
        s
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some('(') => {
                self.chars.next();
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.chars.next();
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.take_while(|c| c.is_ascii_digit());
                let value: BigInt = digits.parse().map_err(|_| self.err("bad integer"))?;
                Ok(MultiPoly::constant(value, self.nvars))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.take_while(|c| c.is_ascii_alphanumeric());
                let v = parse_var(&name).ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                if v >= self.nvars {
                    return Err(Error::UnknownVariable(name));
                }
                Ok(MultiPoly::var(v, self.nvars))
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}
