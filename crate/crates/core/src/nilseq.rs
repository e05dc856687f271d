//! Upper unitriangular matrices over [`MultiPoly`], their integer
//! evaluations, and ordered tuples of them.
//!
//! A [`NilSeq`] at level `r` ranges over the variables `(n, m1, .., mr)`.
//! Read as a function of `n`, it is a sequence with values in the
//! level-`r` group: `UT(d, ℤ)` at level 0, sequences of those at level 1,
//! and so on. Group operations act entrywise on the inner variables, so a
//! single matrix product implements the coordinate-wise group law at
//! every level.
//!
//! Common groups embed as follows:
//!
//! * `ℤ^r` sits in `UT(r + 1, ℤ)` as `I + Σ v_i E_{1,i+1}` (see
//!   [`NilSeq::first_row`]);
//! * the discrete Heisenberg group is `UT(3, ℤ)`, with `(a, b, c)` stored
//!   at positions `(1,2)`, `(2,3)` and `(1,3)` (see [`NilSeq::heisenberg`]).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{MultiPoly, Var};

/// Upper unitriangular `dim × dim` matrix of polynomials.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NilSeq {
    dim: usize,
    nvars: usize,
    entries: Vec<MultiPoly>,
}

impl NilSeq {
    pub fn identity(dim: usize, level: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let nvars = level + 1;
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(if i == j {
                    MultiPoly::one(nvars)
                } else {
                    MultiPoly::zero(nvars)
                });
            }
        }
        Self {
            dim,
            nvars,
            entries,
        }
    }

    /// Builds a matrix from rows, validating the unitriangular shape.
    pub fn from_rows(rows: Vec<Vec<MultiPoly>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::NotUnitriangular("empty matrix".into()));
        }
        let nvars = rows[0]
            .first()
            .map(MultiPoly::nvars)
            .ok_or_else(|| Error::NotUnitriangular("empty row".into()))?;
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotUnitriangular(format!(
                    "row {} has {} entries, expected {dim}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, e) in row.into_iter().enumerate() {
                if e.nvars() != nvars {
                    return Err(Error::VarMismatch {
                        left: nvars,
                        right: e.nvars(),
                    });
                }
                let ok = match i.cmp(&j) {
                    std::cmp::Ordering::Equal => e.is_one(),
                    std::cmp::Ordering::Greater => e.is_zero(),
                    std::cmp::Ordering::Less => true,
                };
                if !ok {
                    return Err(Error::NotUnitriangular(format!(
                        "entry ({}, {}) is {e}",
                        i + 1,
                        j + 1
                    )));
                }
                entries.push(e);
            }
        }
        Ok(Self {
            dim,
            nvars,
            entries,
        })
    }

    /// `I + Σ v_i E_{1,i+1}`, the image of `v ∈ ℤ^r` in `UT(r + 1, ℤ)`.
    pub fn first_row(v: &[MultiPoly]) -> Result<Self> {
        let nvars = v
            .first()
            .map(MultiPoly::nvars)
            .ok_or_else(|| Error::InvalidParameter("empty coordinate vector".into()))?;
        let mut m = Self::identity(v.len() + 1, nvars - 1);
        for (i, x) in v.iter().enumerate() {
            if x.nvars() != nvars {
                return Err(Error::VarMismatch {
                    left: nvars,
                    right: x.nvars(),
                });
            }
            m.set(0, i + 1, x.clone());
        }
        Ok(m)
    }

    /// The Heisenberg element with `(1,2) = a`, `(2,3) = b`, `(1,3) = c`.
    pub fn heisenberg(a: MultiPoly, b: MultiPoly, c: MultiPoly) -> Result<Self> {
        let nvars = a.nvars();
        if b.nvars() != nvars || c.nvars() != nvars {
            return Err(Error::VarMismatch {
                left: nvars,
                right: if b.nvars() != nvars {
                    b.nvars()
                } else {
                    c.nvars()
                },
            });
        }
        let mut m = Self::identity(3, nvars - 1);
        m.set(0, 1, a);
        m.set(1, 2, b);
        m.set(0, 2, c);
        Ok(m)
    }

    /// Parses the row-major bracketed form, e.g. `[[1, n], [0, 1]]`, at
    /// the given level.
    pub fn parse(input: &str, level: usize) -> Result<Self> {
        let rows = split_matrix(input)?;
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|s| MultiPoly::parse(&s, level + 1))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.nvars - 1
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Entry `(i, j)`, zero-based.
    pub fn get(&self, i: usize, j: usize) -> &MultiPoly {
        &self.entries[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, e: MultiPoly) {
        debug_assert!(i < j);
        self.entries[i * self.dim + j] = e;
    }

    pub fn rows(&self) -> Vec<Vec<MultiPoly>> {
        self.entries.chunks(self.dim).map(<[_]>::to_vec).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.upper_entries().all(|(_, _, e)| e.is_zero())
    }

    /// Iterates over the strictly upper entries as `(i, j, entry)`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, &MultiPoly)> {
        let d = self.dim;
        (0..d).flat_map(move |i| ((i + 1)..d).map(move |j| (i, j, self.get(i, j))))
    }

    /// True iff only the first row carries off-diagonal entries, i.e. the
    /// matrix lies in the abelian first-row subgroup.
    pub fn is_first_row(&self) -> bool {
        self.upper_entries().all(|(i, _, e)| i == 0 || e.is_zero())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.nvars != other.nvars {
            return Err(Error::LevelMismatch {
                left: self.level(),
                right: other.level(),
            });
        }
        Ok(())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.dim;
        let mut out = Self::identity(d, self.level());
        for i in 0..d {
            for j in (i + 1)..d {
                let mut acc = &self.get(i, j).clone() + other.get(i, j);
                for l in (i + 1)..j {
                    let a = self.get(i, l);
                    let b = other.get(l, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Inverse via the finite series `(I + U)^{-1} = Σ_k (-U)^k`.
    pub fn inverse(&self) -> Self {
        let d = self.dim;
        let neg_u = StrictUpper::negated(self);
        let mut sum = StrictUpper::zero(d, self.nvars);
        let mut power = neg_u.clone();
        // U is nilpotent of index at most d.
        for _ in 1..d {
            sum.add_assign(&power);
            power = power.mul(&neg_u);
        }
        sum.into_nilseq()
    }

    /// Applies `f` to every strictly upper entry.
    pub fn map_entries(&self, f: impl Fn(&MultiPoly) -> Result<MultiPoly>) -> Result<Self> {
        let mut out = self.clone();
        let mut nvars = None;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let e = f(self.get(i, j))?;
                nvars.get_or_insert(e.nvars());
                out.set(i, j, e);
            }
        }
        let nvars = nvars.unwrap_or(self.nvars);
        if nvars != self.nvars {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let idx = i * self.dim + j;
                    if i >= j {
                        out.entries[idx] = out.entries[idx].extend_vars(nvars)?;
                    }
                }
            }
            out.nvars = nvars;
        }
        Ok(out)
    }

    /// Reads the matrix at level `level >= self.level()`; the added inner
    /// variables do not occur. This is the constant embedding of the
    /// level-`r` group into sequences over it.
    pub fn lift_to(&self, level: usize) -> Result<Self> {
        self.map_entries(|e| e.extend_vars(level + 1))
    }

    /// [`NilSeq::lift_to`] one level up.
    pub fn lift(&self) -> Self {
        self.lift_to(self.level() + 1)
            .expect("lifting never lowers the level")
    }

    /// Drops trailing unused variables to reach `level`.
    pub fn truncate_to(&self, level: usize) -> Result<Self> {
        self.map_entries(|e| e.truncate_vars(level + 1))
    }

    pub fn substitute(&self, v: Var, replacement: &MultiPoly) -> Result<Self> {
        self.map_entries(|e| e.substitute(v, replacement))
    }

    pub fn shift_by_var(&self, v: Var, offset_var: Var) -> Result<Self> {
        if offset_var >= self.nvars {
            let lifted = self.lift_to(offset_var)?;
            return lifted.map_entries(|e| e.shift_by_var(v, offset_var));
        }
        self.map_entries(|e| e.shift_by_var(v, offset_var))
    }

    pub fn shift_by_const(&self, v: Var, offset: i64) -> Result<Self> {
        self.map_entries(|e| e.shift_by_const(v, offset))
    }

    pub fn fix_var(&self, v: Var, value: i64) -> Result<Self> {
        self.map_entries(|e| e.fix_var(v, value))
    }

    pub fn rename_var(&self, from: Var, to: Var) -> Result<Self> {
        self.map_entries(|e| e.rename_var(from, to))
    }

    pub fn is_independent_of(&self, v: Var) -> bool {
        self.upper_entries().all(|(_, _, e)| e.is_independent_of(v))
    }

    /// Largest degree in `v` over all entries (0 for constants).
    pub fn degree_in(&self, v: Var) -> u32 {
        self.upper_entries()
            .filter_map(|(_, _, e)| e.degree_in(v))
            .max()
            .unwrap_or(0)
    }

    /// Degree in `v` weighted by distance from the diagonal: the maximum
    /// of `deg_v(a_ij) / (j - i)`. Products, inverses and substitutions
    /// that map `v` to a polynomial of degree one in `v` never increase it.
    pub fn filtered_degree_in(&self, v: Var) -> num_rational::Ratio<u32> {
        self.upper_entries()
            .filter_map(|(i, j, e)| {
                e.degree_in(v)
                    .map(|deg| num_rational::Ratio::new(deg, (j - i) as u32))
            })
            .max()
            .unwrap_or_else(|| num_rational::Ratio::from_integer(0))
    }

    /// Evaluates at an integer point (see [`MultiPoly::eval`]).
    pub fn eval(&self, point: &[BigInt]) -> Result<IntMatrix> {
        let d = self.dim;
        let mut m = IntMatrix::identity(d);
        for (i, j, e) in self.upper_entries() {
            m.entries[i * d + j] = e.eval(point)?;
        }
        Ok(m)
    }

    pub fn eval_i64(&self, point: &[i64]) -> Result<IntMatrix> {
        let point: Vec<BigInt> = point.iter().map(|&x| BigInt::from(x)).collect();
        self.eval(&point)
    }

    /// The constant matrix with the given integer entries at `level`.
    pub fn from_int(m: &IntMatrix, level: usize) -> Self {
        let d = m.dim();
        let mut out = Self::identity(d, level);
        for i in 0..d {
            for j in (i + 1)..d {
                out.set(i, j, MultiPoly::constant(m.get(i, j).clone(), level + 1));
            }
        }
        out
    }
}

impl fmt::Display for NilSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.dim {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.dim {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for NilSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NilSeq[level {}]{}", self.level(), self)
    }
}

impl std::ops::Mul<&NilSeq> for &NilSeq {
    type Output = NilSeq;

    /// # Panics
    ///
    /// Panics on dimension or level mismatch; use [`NilSeq::checked_mul`]
    /// to get an error instead.
    fn mul(self, rhs: &NilSeq) -> NilSeq {
        self.checked_mul(rhs)
            .expect("incompatible unitriangular matrices")
    }
}

/// Dense strictly upper part, used for the inverse series.
#[derive(Clone)]
struct StrictUpper {
    dim: usize,
    nvars: usize,
    entries: Vec<MultiPoly>,
}

impl StrictUpper {
    fn zero(dim: usize, nvars: usize) -> Self {
        Self {
            dim,
            nvars,
            entries: vec![MultiPoly::zero(nvars); dim * dim],
        }
    }

    fn negated(m: &NilSeq) -> Self {
        let mut s = Self::zero(m.dim, m.nvars);
        for (i, j, e) in m.upper_entries() {
            s.entries[i * m.dim + j] = -e;
        }
        s
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            if !b.is_zero() {
                *a = &*a + b;
            }
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = Self::zero(d, self.nvars);
        for i in 0..d {
            for j in (i + 1)..d {
                let mut acc = MultiPoly::zero(self.nvars);
                for l in (i + 1)..j {
                    let a = &self.entries[i * d + l];
                    let b = &other.entries[l * d + j];
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.entries[i * d + j] = acc;
            }
        }
        out
    }

    fn into_nilseq(self) -> NilSeq {
        let mut m = NilSeq::identity(self.dim, self.nvars - 1);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                m.set(i, j, self.entries[i * self.dim + j].clone());
            }
        }
        m
    }
}

/// Splits `[[a, b], [c, d]]` into rows of entry strings.
fn split_matrix(input: &str) -> Result<Vec<Vec<String>>> {
    let err = |msg: &str| Error::Parse {
        input: input.to_string(),
        msg: msg.to_string(),
    };
    let body = input
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| err("matrix must be enclosed in brackets"))?;
    let mut rows = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('[')
            .ok_or_else(|| err("expected `[` at start of row"))?;
        let close = inner.find(']').ok_or_else(|| err("unterminated row"))?;
        let row = &inner[..close];
        let mut cells = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (i, c) in row.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    cells.push(row[start..i].trim().to_string());
                    start = i + 1;
                }
                _ => {}
            }
        }
        cells.push(row[start..].trim().to_string());
        rows.push(cells);
        rest = inner[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(err("expected `,` between rows"));
        }
    }
    Ok(rows)
}

/// Integer unitriangular matrix, the value of a [`NilSeq`] at a point.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::one();
        }
        Self { dim, entries }
    }

    /// Builds from rows of integers; the shape must be unitriangular.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = Self::identity(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotUnitriangular(format!(
                    "row {} has wrong length",
                    i + 1
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                let expected = match i.cmp(&j) {
                    std::cmp::Ordering::Equal => Some(1),
                    std::cmp::Ordering::Greater => Some(0),
                    std::cmp::Ordering::Less => None,
                };
                match expected {
                    Some(e) if e != x => {
                        return Err(Error::NotUnitriangular(format!(
                            "entry ({}, {}) is {x}",
                            i + 1,
                            j + 1
                        )))
                    }
                    Some(_) => {}
                    None => m.entries[i * dim + j] = BigInt::from(x),
                }
            }
        }
        Ok(m)
    }

    pub fn first_row(v: &[i64]) -> Self {
        let mut m = Self::identity(v.len() + 1);
        for (i, &x) in v.iter().enumerate() {
            m.entries[i + 1] = BigInt::from(x);
        }
        m
    }

    pub fn heisenberg(a: i64, b: i64, c: i64) -> Self {
        let mut m = Self::identity(3);
        m.entries[1] = a.into();
        m.entries[5] = b.into();
        m.entries[2] = c.into();
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| ((i + 1)..self.dim).all(|j| self.get(i, j).is_zero()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = Self::identity(d);
        for i in 0..d {
            for j in (i + 1)..d {
                let mut acc = self.get(i, j) + other.get(i, j);
                for l in (i + 1)..j {
                    acc += self.get(i, l) * other.get(l, j);
                }
                out.entries[i * d + j] = acc;
            }
        }
        out
    }

    pub fn inverse(&self) -> Self {
        NilSeq::from_int(self, 0)
            .inverse()
            .eval(&[])
            .expect("constant matrix evaluates without variables")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .chunks(self.dim)
            .map(|r| {
                let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Nonempty ordered tuple of [`NilSeq`] sharing dimension and level.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GSystem {
    entries: Vec<NilSeq>,
}

impl GSystem {
    pub fn new(entries: Vec<NilSeq>) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptySystem)?;
        for e in &entries[1..] {
            if e.dim() != first.dim() {
                return Err(Error::DimMismatch {
                    left: first.dim(),
                    right: e.dim(),
                });
            }
            if e.level() != first.level() {
                return Err(Error::LevelMismatch {
                    left: first.level(),
                    right: e.level(),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Parses one matrix string per entry at the given level.
    pub fn parse(entries: &[&str], level: usize) -> Result<Self> {
        Self::new(
            entries
                .iter()
                .map(|s| NilSeq::parse(s, level))
                .collect::<Result<_>>()?,
        )
    }

    pub fn entries(&self) -> &[NilSeq] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    pub fn level(&self) -> usize {
        self.entries[0].level()
    }

    /// The last entry, `p_k`.
    pub fn last(&self) -> &NilSeq {
        self.entries.last().expect("systems are nonempty")
    }

    pub fn into_entries(self) -> Vec<NilSeq> {
        self.entries
    }

    /// Entry strings in order.
    pub fn to_strings(&self) -> Vec<String> {
        self.entries.iter().map(ToString::to_string).collect()
    }

    /// True iff every entry lies in the first-row abelian subgroup.
    pub fn is_abelian_first_row(&self) -> bool {
        self.entries.iter().all(NilSeq::is_first_row)
    }
}

impl fmt::Display for GSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for GSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GSystem[level {}]{}", self.level(), self)
    }
}
