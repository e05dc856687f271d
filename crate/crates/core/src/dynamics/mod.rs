//! Concrete measure-preserving actions of integer unitriangular matrices,
//! observables on them, and the multiple averages
//!
//! ```text
//! Λ_N(f_1, .., f_k)(x) = (1/N) Σ_{n=1}^{N} f_1(T^{p_1(n)} x) ⋯ f_k(T^{p_k(n)} x)
//! ```
//!
//! Finite systems carry the uniform measure and all values are exact
//! rationals. The torus carries Lebesgue measure; norms there are Monte
//! Carlo estimates from seeded samples, with the character oracle in
//! [`oracle`] as an independent closed form.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::nilseq::IntMatrix;

pub mod average;
pub mod oracle;
pub mod report;

pub use average::{l2_norm_sq, lambda_at_point, lambda_average, lambda_exact, Average, Estimator};
pub use oracle::{character_oracle, CharacterLimit, CharacterOracle, Rate};
pub use report::{convergence_report, AverageReport, ReportRow};

/// A measure-preserving action of `UT(d, ℤ)` (or a subgroup of it).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DynSystem {
    /// `ℤ/q_1 × ⋯ × ℤ/q_r` with `ℤ^r` acting by translation through the
    /// first-row embedding into `UT(r + 1, ℤ)`.
    #[serde(rename = "finite-cyclic-product")]
    CyclicProduct { moduli: Vec<u64> },
    /// The finite Heisenberg group `H(ℤ/q)` under left translation by
    /// `UT(3, ℤ)` reduced mod `q`.
    #[serde(rename = "finite-group-translation")]
    Heisenberg { modulus: u64 },
    /// `𝕋^r` with `ℤ^r ⊂ UT(r + 1, ℤ)` acting by `x ↦ x + v ⊙ α`.
    TorusRotation { rotation: Vec<f64> },
}

impl DynSystem {
    pub fn cyclic_product(moduli: Vec<u64>) -> Result<Self> {
        let sys = DynSystem::CyclicProduct { moduli };
        sys.validate()?;
        Ok(sys)
    }

    pub fn heisenberg(modulus: u64) -> Result<Self> {
        let sys = DynSystem::Heisenberg { modulus };
        sys.validate()?;
        Ok(sys)
    }

    pub fn torus(rotation: Vec<f64>) -> Result<Self> {
        let sys = DynSystem::TorusRotation { rotation };
        sys.validate()?;
        Ok(sys)
    }

    /// Checks the parameters; deserialized systems should pass through this.
    pub fn validate(&self) -> Result<()> {
        match self {
            DynSystem::CyclicProduct { moduli } => {
                if moduli.is_empty() {
                    return Err(Error::InvalidParameter("moduli vector is empty".into()));
                }
                if let Some(q) = moduli.iter().find(|&&q| q < 2) {
                    return Err(Error::InvalidParameter(format!("modulus {q} < 2")));
                }
                let size = moduli
                    .iter()
                    .try_fold(1u64, |acc, &q| acc.checked_mul(q))
                    .filter(|&s| s <= 1 << 24);
                if size.is_none() {
                    return Err(Error::InvalidParameter("state space too large".into()));
                }
            }
            DynSystem::Heisenberg { modulus } => {
                if *modulus < 2 {
                    return Err(Error::InvalidParameter(format!("modulus {modulus} < 2")));
                }
                if *modulus > 256 {
                    return Err(Error::InvalidParameter("state space too large".into()));
                }
            }
            DynSystem::TorusRotation { rotation } => {
                if rotation.is_empty() {
                    return Err(Error::InvalidParameter("rotation vector is empty".into()));
                }
                if rotation.iter().any(|a| !a.is_finite()) {
                    return Err(Error::InvalidParameter("rotation must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, DynSystem::TorusRotation { .. })
    }

    /// Dimension `d` of the acting `UT(d, ℤ)`.
    pub fn group_dim(&self) -> usize {
        match self {
            DynSystem::CyclicProduct { moduli } => moduli.len() + 1,
            DynSystem::Heisenberg { .. } => 3,
            DynSystem::TorusRotation { rotation } => rotation.len() + 1,
        }
    }

    /// Number of states of a finite system.
    pub fn state_count(&self) -> Option<usize> {
        match self {
            DynSystem::CyclicProduct { moduli } => Some(moduli.iter().product::<u64>() as usize),
            DynSystem::Heisenberg { modulus } => Some(modulus.pow(3) as usize),
            DynSystem::TorusRotation { .. } => None,
        }
    }

    fn moduli(&self) -> Vec<u64> {
        match self {
            DynSystem::CyclicProduct { moduli } => moduli.clone(),
            DynSystem::Heisenberg { modulus } => vec![*modulus; 3],
            DynSystem::TorusRotation { .. } => Vec::new(),
        }
    }

    /// A common period in `n` of every polynomial sequence's action: the
    /// least common multiple of the moduli.
    pub fn period(&self) -> Option<u64> {
        if !self.is_finite() {
            return None;
        }
        Some(self.moduli().iter().fold(1u64, |acc, &q| acc.lcm(&q)))
    }

    /// Coordinates of a finite state; Heisenberg states are `(a, b, c)`.
    pub fn state_coords(&self, index: usize) -> Vec<u64> {
        let moduli = self.moduli();
        let mut rest = index as u64;
        let mut coords = vec![0; moduli.len()];
        for (slot, q) in coords.iter_mut().zip(&moduli).rev() {
            *slot = rest % q;
            rest /= q;
        }
        coords
    }

    pub fn state_index(&self, coords: &[u64]) -> Result<usize> {
        let moduli = self.moduli();
        if coords.len() != moduli.len() {
            return Err(Error::InvalidParameter(format!(
                "state needs {} coordinates",
                moduli.len()
            )));
        }
        let mut idx = 0u64;
        for (&x, &q) in coords.iter().zip(&moduli) {
            if x >= q {
                return Err(Error::InvalidParameter(format!("coordinate {x} >= {q}")));
            }
            idx = idx * q + x;
        }
        Ok(idx as usize)
    }

    fn check_dim(&self, g: &IntMatrix) -> Result<()> {
        if g.dim() != self.group_dim() {
            return Err(Error::DimMismatch {
                left: self.group_dim(),
                right: g.dim(),
            });
        }
        Ok(())
    }

    fn first_row_coords(&self, g: &IntMatrix) -> Result<Vec<BigInt>> {
        self.check_dim(g)?;
        let d = g.dim();
        for i in 1..d {
            for j in (i + 1)..d {
                if !g.get(i, j).is_zero() {
                    return Err(Error::Unsupported(format!(
                        "{g} is outside the first-row abelian subgroup acting on this system"
                    )));
                }
            }
        }
        Ok((1..d).map(|j| g.get(0, j).clone()).collect())
    }

    /// The image `T^g x` of a finite state.
    pub fn act_index(&self, g: &IntMatrix, x: usize) -> Result<usize> {
        Ok(self.permutation(g)?[x])
    }

    /// `T^g` as a permutation of the finite state indices.
    pub fn permutation(&self, g: &IntMatrix) -> Result<Vec<usize>> {
        let count = self
            .state_count()
            .ok_or_else(|| Error::Unsupported("permutations need a finite system".into()))?;
        match self {
            DynSystem::CyclicProduct { moduli } => {
                let shift: Vec<u64> = self
                    .first_row_coords(g)?
                    .iter()
                    .zip(moduli)
                    .map(|(v, &q)| reduce_mod(v, q))
                    .collect();
                Ok((0..count)
                    .map(|x| {
                        let c = self.state_coords(x);
                        let moved: Vec<u64> = c
                            .iter()
                            .zip(&shift)
                            .zip(moduli)
                            .map(|((&a, &s), &q)| (a + s) % q)
                            .collect();
                        self.state_index(&moved).expect("coordinates reduced")
                    })
                    .collect())
            }
            DynSystem::Heisenberg { modulus } => {
                self.check_dim(g)?;
                let q = *modulus;
                let a = reduce_mod(g.get(0, 1), q);
                let b = reduce_mod(g.get(1, 2), q);
                let c = reduce_mod(g.get(0, 2), q);
                Ok((0..count)
                    .map(|x| {
                        let s = self.state_coords(x);
                        let moved = [(a + s[0]) % q, (b + s[1]) % q, (c + s[2] + a * s[1]) % q];
                        self.state_index(&moved).expect("coordinates reduced")
                    })
                    .collect())
            }
            DynSystem::TorusRotation { .. } => unreachable!("finite systems only"),
        }
    }

    /// The image `T^g x` of a torus point.
    pub fn act_point(&self, g: &IntMatrix, x: &[f64]) -> Result<Vec<f64>> {
        let DynSystem::TorusRotation { rotation } = self else {
            return Err(Error::Unsupported("points need the torus".into()));
        };
        if x.len() != rotation.len() {
            return Err(Error::DimMismatch {
                left: rotation.len(),
                right: x.len(),
            });
        }
        let v = self.first_row_coords(g)?;
        Ok(x.iter()
            .zip(&v)
            .zip(rotation)
            .map(|((&xi, vi), &a)| frac(xi + frac_mul(vi, a)))
            .collect())
    }

    /// Dimension of the torus, or of the coordinate tuple of a finite state.
    pub fn space_dim(&self) -> usize {
        match self {
            DynSystem::TorusRotation { rotation } => rotation.len(),
            _ => self.moduli().len(),
        }
    }
}

fn reduce_mod(v: &BigInt, q: u64) -> u64 {
    v.mod_floor(&BigInt::from(q))
        .to_u64()
        .expect("residue fits in u64")
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Fractional part of `v * a`, splitting large `v` to limit rounding.
fn frac_mul(v: &BigInt, a: f64) -> f64 {
    match v.to_i64() {
        Some(small) if small.unsigned_abs() < 1 << 26 => frac(small as f64 * a),
        _ => {
            // v = hi * 2^26 + lo
            let base = BigInt::from(1i64 << 26);
            let (hi, lo) = v.div_mod_floor(&base);
            let lo = lo.to_f64().unwrap_or(0.0);
            let hi_part = frac_mul(&hi, frac(a * (1u64 << 26) as f64));
            frac(hi_part + frac(lo * a))
        }
    }
}

/// `e(t) = exp(2πi t)`.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * t)
}

/// A bounded function on the state space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Observable {
    /// Indicator of a set of finite states, by index.
    Indicator { states: BTreeSet<usize> },
    /// Exact rational value per finite state.
    Tabulated {
        #[serde(with = "exact::text_vec")]
        values: Vec<Rational>,
    },
    /// The character `x ↦ e(a · x)` on the torus.
    Character { frequency: Vec<i64> },
}

impl Observable {
    pub fn indicator(states: impl IntoIterator<Item = usize>) -> Self {
        Observable::Indicator {
            states: states.into_iter().collect(),
        }
    }

    pub fn tabulated(values: Vec<Rational>) -> Self {
        Observable::Tabulated { values }
    }

    pub fn constant(value: Rational, states: usize) -> Self {
        Observable::Tabulated {
            values: vec![value; states],
        }
    }

    pub fn character(frequency: Vec<i64>) -> Self {
        Observable::Character { frequency }
    }

    /// Checks that the observable lives on `sys`.
    pub fn validate(&self, sys: &DynSystem) -> Result<()> {
        match (self, sys.state_count()) {
            (Observable::Indicator { states }, Some(count)) => {
                if let Some(s) = states.iter().find(|&&s| s >= count) {
                    return Err(Error::InvalidParameter(format!("state {s} out of range")));
                }
                Ok(())
            }
            (Observable::Tabulated { values }, Some(count)) => {
                if values.len() != count {
                    return Err(Error::InvalidParameter(format!(
                        "table has {} values for {count} states",
                        values.len()
                    )));
                }
                Ok(())
            }
            (Observable::Character { frequency }, None) => {
                if frequency.len() != sys.space_dim() {
                    return Err(Error::DimMismatch {
                        left: sys.space_dim(),
                        right: frequency.len(),
                    });
                }
                Ok(())
            }
            (Observable::Character { .. }, Some(_)) => Err(Error::Unsupported(
                "characters are only provided on the torus".into(),
            )),
            (_, None) => Err(Error::Unsupported(
                "indicator and tabulated observables need a finite system".into(),
            )),
        }
    }

    pub fn is_character(&self) -> bool {
        matches!(self, Observable::Character { .. })
    }

    /// Exact value at a finite state.
    pub fn value(&self, x: usize) -> Result<Rational> {
        match self {
            Observable::Indicator { states } => Ok(if states.contains(&x) {
                Rational::one()
            } else {
                Rational::zero()
            }),
            Observable::Tabulated { values } => values
                .get(x)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("state {x} out of range"))),
            Observable::Character { .. } => Err(Error::Unsupported(
                "characters have no exact rational values".into(),
            )),
        }
    }

    /// Values at every finite state.
    pub fn table(&self, sys: &DynSystem) -> Result<Vec<Rational>> {
        self.validate(sys)?;
        let count = sys.state_count().expect("validated as finite");
        (0..count).map(|x| self.value(x)).collect()
    }

    /// Complex value at a torus point.
    pub fn value_at_point(&self, x: &[f64]) -> Result<Complex64> {
        match self {
            Observable::Character { frequency } => {
                let t: f64 = frequency.iter().zip(x).map(|(&a, &xi)| a as f64 * xi).sum();
                Ok(e(t))
            }
            _ => Err(Error::Unsupported(
                "only characters are evaluated on the torus".into(),
            )),
        }
    }

    /// Exact sup norm on a finite system; characters have sup norm one.
    pub fn sup_norm(&self) -> Rational {
        match self {
            Observable::Indicator { states } => {
                if states.is_empty() {
                    Rational::zero()
                } else {
                    Rational::one()
                }
            }
            Observable::Tabulated { values } => exact::max_abs(values),
            Observable::Character { .. } => Rational::one(),
        }
    }

    /// True when every value lies in `[-1, 1]`.
    pub fn is_bounded_by_one(&self) -> bool {
        self.sup_norm() <= Rational::one()
    }
}
