//! Closed forms for character averages along abelian polynomial systems on
//! the torus.
//!
//! With `f_i = e(a_i · x)` and `p_i(n)` in the first row,
//!
//! ```text
//! Λ_N(x) = e(A · x) (1/N) Σ_n e(Σ_j c_j(n) α_j),   A = Σ a_i,  c_j = Σ_i a_ij p_ij
//! ```
//!
//! so everything is decided by the integer polynomials `c_j`.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{DynSystem, Observable};
use crate::error::{Error, Result};
use crate::nilseq::GSystem;
use crate::poly::{MultiPoly, N};

/// The `N → ∞` limit of `Λ_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CharacterLimit {
    Zero,
    /// `x ↦ e(frequency · x + phase)`.
    Character {
        frequency: Vec<i64>,
        phase: f64,
    },
}

/// How fast `Λ_N` approaches its limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rate {
    /// `Λ_N` equals the limit for every `N`.
    ExactAtAllN,
    /// Linear phase `β n`: `|Λ_N| = |sin(πNβ) / (N sin(πβ))| ≤ 2 / (N |1 − e(β)|)`.
    Geometric { beta: f64 },
    /// Phase of degree at least two: equidistribution, no elementary rate.
    NoElementaryRate { degree: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterOracle {
    pub resonant: bool,
    pub limit: CharacterLimit,
    pub rate: Rate,
    /// Sum of the frequencies, the character in front of the average.
    pub frequency: Vec<i64>,
    /// Coefficients of the phase polynomial `Σ_j c_j(n) α_j`, constant first.
    pub phase_coefficients: Vec<f64>,
}

impl CharacterOracle {
    /// `2 / (N |1 − e(β)|)` for the geometric case.
    pub fn envelope(&self, n_terms: u64) -> Option<f64> {
        match self.rate {
            Rate::Geometric { beta } => {
                Some(2.0 / (n_terms as f64 * (1.0 - super::e(beta)).norm()))
            }
            Rate::ExactAtAllN => Some(0.0),
            Rate::NoElementaryRate { .. } => None,
        }
    }

    /// Exact `∥Λ_N∥_2` where a closed form exists. `|Λ_N(x)|` does not
    /// depend on `x`, so this is the modulus of the exponential sum.
    pub fn l2_norm(&self, n_terms: u64) -> Option<f64> {
        match self.rate {
            Rate::ExactAtAllN => Some(1.0),
            Rate::Geometric { beta } => {
                let n = n_terms as f64;
                let s = (std::f64::consts::PI * beta).sin();
                Some(((std::f64::consts::PI * n * beta).sin() / (n * s)).abs())
            }
            Rate::NoElementaryRate { .. } => None,
        }
    }

    /// `∥Λ_N − limit∥_2` where a closed form exists.
    pub fn limit_deviation(&self, n_terms: u64) -> Option<f64> {
        match self.rate {
            Rate::ExactAtAllN => Some(0.0),
            _ => self.l2_norm(n_terms),
        }
    }
}

fn dist_to_integer(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Symbolic evaluation of a character average along an abelian system.
pub fn character_oracle(
    frequencies: &[Observable],
    gsys: &GSystem,
    rotation: &[f64],
) -> Result<CharacterOracle> {
    let freqs: Vec<&Vec<i64>> = frequencies
        .iter()
        .map(|f| match f {
            Observable::Character { frequency } => Ok(frequency),
            _ => Err(Error::Unsupported(
                "the character oracle needs character observables".into(),
            )),
        })
        .collect::<Result<_>>()?;
    let sys = DynSystem::torus(rotation.to_vec())?;
    super::average::check_inputs(&sys, gsys, frequencies)?;
    if !gsys.is_abelian_first_row() {
        return Err(Error::Unsupported(
            "the character oracle needs a first-row abelian system".into(),
        ));
    }
    let r = rotation.len();
    let frequency: Vec<i64> = (0..r).map(|j| freqs.iter().map(|a| a[j]).sum()).collect();

    // c_j(n) = Σ_i a_ij p_ij(n), then the phase Σ_j c_j(n) α_j by degree.
    let mut phase: Vec<f64> = vec![0.0];
    for j in 0..r {
        let mut c = MultiPoly::zero(1);
        for (a, p) in freqs.iter().zip(gsys.entries()) {
            c = &c + &p.get(0, j + 1).scale(&a[j].into());
        }
        for (exps, coef) in c.terms() {
            let d = exps[N] as usize;
            let coef = coef
                .to_f64()
                .ok_or_else(|| Error::InvalidParameter("coefficient too large".into()))?;
            if phase.len() <= d {
                phase.resize(d + 1, 0.0);
            }
            phase[d] += coef * rotation[j];
        }
    }
    for c in phase.iter_mut() {
        *c -= c.floor();
    }
    // Coefficients within rounding of an integer do not move the phase;
    // the rest are treated as irrational.
    let degree = (1..phase.len())
        .rev()
        .find(|&d| dist_to_integer(phase[d]) >= 1e-12)
        .unwrap_or(0) as u32;

    let (resonant, limit, rate) = match degree {
        0 => {
            let constant = phase[0];
            (
                true,
                CharacterLimit::Character {
                    frequency: frequency.clone(),
                    phase: constant,
                },
                Rate::ExactAtAllN,
            )
        }
        1 => (
            false,
            CharacterLimit::Zero,
            Rate::Geometric { beta: phase[1] },
        ),
        _ => (
            false,
            CharacterLimit::Zero,
            Rate::NoElementaryRate { degree },
        ),
    };
    Ok(CharacterOracle {
        resonant,
        limit,
        rate,
        frequency,
        phase_coefficients: phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilseq::NilSeq;
    use num_complex::Complex64;

    fn z(s: &str) -> NilSeq {
        NilSeq::first_row(&[MultiPoly::parse(s, 1).unwrap()]).unwrap()
    }

    fn direct_sum(beta: f64, n: u64) -> Complex64 {
        (1..=n)
            .map(|k| super::super::e(beta * k as f64))
            .sum::<Complex64>()
            / n as f64
    }

    #[test]
    fn resonant_linear_pair() {
        let gsys = GSystem::new(vec![z("n"), z("2*n")]).unwrap();
        let fs = [
            Observable::character(vec![2]),
            Observable::character(vec![-1]),
        ];
        let o = character_oracle(&fs, &gsys, &[2f64.sqrt() - 1.0]).unwrap();
        assert!(o.resonant);
        assert_eq!(o.rate, Rate::ExactAtAllN);
        assert_eq!(
            o.limit,
            CharacterLimit::Character {
                frequency: vec![1],
                phase: 0.0
            }
        );
    }

    #[test]
    fn single_linear_character() {
        let alpha = 2f64.sqrt() - 1.0;
        let gsys = GSystem::new(vec![z("n")]).unwrap();
        let o = character_oracle(&[Observable::character(vec![1])], &gsys, &[alpha]).unwrap();
        assert!(!o.resonant);
        assert_eq!(o.limit, CharacterLimit::Zero);
        for n in [1, 5, 17, 100] {
            let norm = direct_sum(alpha, n).norm();
            assert!((o.l2_norm(n).unwrap() - norm).abs() < 1e-12);
            assert!(norm <= o.envelope(n).unwrap() + 1e-12);
        }
    }

    #[test]
    fn zero_frequencies_give_one() {
        let gsys = GSystem::new(vec![z("n^2"), z("3*n")]).unwrap();
        let fs = [
            Observable::character(vec![0]),
            Observable::character(vec![0]),
        ];
        let o = character_oracle(&fs, &gsys, &[0.3]).unwrap();
        assert!(o.resonant);
        assert_eq!(
            o.limit,
            CharacterLimit::Character {
                frequency: vec![0],
                phase: 0.0
            }
        );
    }

    #[test]
    fn quadratic_phase_has_no_rate() {
        let gsys = GSystem::new(vec![z("n^2")]).unwrap();
        let o = character_oracle(&[Observable::character(vec![1])], &gsys, &[0.3]).unwrap();
        assert_eq!(o.rate, Rate::NoElementaryRate { degree: 2 });
        assert_eq!(o.envelope(10), None);
    }

    #[test]
    fn rejects_non_characters() {
        let gsys = GSystem::new(vec![z("n")]).unwrap();
        assert!(character_oracle(&[Observable::indicator([0])], &gsys, &[0.3]).is_err());
    }
}
