//! Evaluation of `Λ_N`: exact tables on finite systems, seeded samples on
//! the torus (or on finite systems when asked).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DynSystem, Observable};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::nilseq::{GSystem, IntMatrix};

/// How a norm is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Estimator {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

impl Estimator {
    pub fn label(&self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// A computed average.
#[derive(Clone, Debug, PartialEq)]
pub enum Average {
    /// One exact value per finite state.
    Exact(Vec<Rational>),
    /// Values at seeded sample points.
    Sampled {
        samples: usize,
        seed: u64,
        values: Vec<Complex64>,
    },
}

impl Average {
    /// `∥Λ_N∥_2` with its standard error (zero when exact).
    pub fn l2_norm(&self) -> (f64, f64) {
        match self {
            Average::Exact(t) => (exact::to_f64(&l2_norm_sq(t)).sqrt(), 0.0),
            Average::Sampled { values, .. } => {
                let sq: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
                sampled_norm(&sq)
            }
        }
    }
}

/// Root of a sample mean of squares, with the delta-method standard error.
pub(crate) fn sampled_norm(squares: &[f64]) -> (f64, f64) {
    let n = squares.len() as f64;
    if squares.is_empty() {
        return (0.0, 0.0);
    }
    let mean = squares.iter().sum::<f64>() / n;
    let var = if squares.len() > 1 {
        squares.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let se_mean = (var / n).sqrt();
    let norm = mean.sqrt();
    let se = if norm > 0.0 {
        se_mean / (2.0 * norm)
    } else {
        se_mean.sqrt()
    };
    (norm, se)
}

/// `∫ |f|² dμ` for the uniform measure.
pub fn l2_norm_sq(table: &[Rational]) -> Rational {
    inner(table, table)
}

/// `∫ f g dμ` for the uniform measure.
pub fn inner(a: &[Rational], b: &[Rational]) -> Rational {
    assert_eq!(a.len(), b.len(), "tables over different state spaces");
    if a.is_empty() {
        return Rational::zero();
    }
    let sum: Rational = a.iter().zip(b).map(|(x, y)| x * y).sum();
    sum / BigInt::from(a.len())
}

pub(crate) fn check_inputs(sys: &DynSystem, gsys: &GSystem, fs: &[Observable]) -> Result<()> {
    if gsys.level() != 0 {
        return Err(Error::Unsupported(format!(
            "averages need a level-0 system, got level {}; reduced systems act on extended spaces",
            gsys.level()
        )));
    }
    if fs.len() != gsys.len() {
        return Err(Error::InvalidParameter(format!(
            "{} observables for {} sequences",
            fs.len(),
            gsys.len()
        )));
    }
    if gsys.dim() != sys.group_dim() {
        return Err(Error::DimMismatch {
            left: sys.group_dim(),
            right: gsys.dim(),
        });
    }
    for f in fs {
        f.validate(sys)?;
    }
    Ok(())
}

/// Values `p_i(n)` of every entry.
pub(crate) fn values_at(gsys: &GSystem, n: i64) -> Result<Vec<IntMatrix>> {
    gsys.entries().iter().map(|p| p.eval_i64(&[n])).collect()
}

/// The summand `x ↦ ∏ f_i(T^{p_i(n)} x)` as a table.
pub(crate) fn exact_term(
    sys: &DynSystem,
    gsys: &GSystem,
    tables: &[Vec<Rational>],
    n: i64,
) -> Result<Vec<Rational>> {
    let perms: Vec<Vec<usize>> = values_at(gsys, n)?
        .iter()
        .map(|g| sys.permutation(g))
        .collect::<Result<_>>()?;
    let count = sys.state_count().expect("finite");
    Ok((0..count)
        .map(|x| {
            let mut v = Rational::one();
            for (t, perm) in tables.iter().zip(&perms) {
                v *= &t[perm[x]];
                if v.is_zero() {
                    break;
                }
            }
            v
        })
        .collect())
}

/// Exact `Λ_N` on a finite system, one value per state.
pub fn lambda_exact(
    sys: &DynSystem,
    gsys: &GSystem,
    fs: &[Observable],
    n_terms: u64,
) -> Result<Vec<Rational>> {
    check_inputs(sys, gsys, fs)?;
    if !sys.is_finite() {
        return Err(Error::Unsupported(
            "exact averages need a finite system".into(),
        ));
    }
    let count = sys.state_count().expect("finite");
    if n_terms == 0 {
        return Ok(vec![Rational::zero(); count]);
    }
    let tables: Vec<Vec<Rational>> = fs.iter().map(|f| f.table(sys)).collect::<Result<_>>()?;
    let mut acc = vec![Rational::zero(); count];
    for n in 1..=n_terms as i64 {
        for (a, t) in acc.iter_mut().zip(exact_term(sys, gsys, &tables, n)?) {
            *a += t;
        }
    }
    let n = BigInt::from(n_terms);
    Ok(acc.into_iter().map(|a| a / &n).collect())
}

/// A sample point: a finite state or a torus point.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Point {
    State(usize),
    Torus(Vec<f64>),
}

pub(crate) fn sample_points(sys: &DynSystem, samples: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match sys.state_count() {
        Some(count) => (0..samples)
            .map(|_| Point::State(rng.gen_range(0..count)))
            .collect(),
        None => (0..samples)
            .map(|_| Point::Torus((0..sys.space_dim()).map(|_| rng.gen::<f64>()).collect()))
            .collect(),
    }
}

pub(crate) fn point_term(
    sys: &DynSystem,
    values: &[IntMatrix],
    fs: &[Observable],
    x: &Point,
) -> Result<Complex64> {
    let mut v = Complex64::one();
    for (g, f) in values.iter().zip(fs) {
        v *= match x {
            Point::State(s) => Complex64::new(exact::to_f64(&f.value(sys.act_index(g, *s)?)?), 0.0),
            Point::Torus(p) => f.value_at_point(&sys.act_point(g, p)?)?,
        };
    }
    Ok(v)
}

/// `Λ_N(x)` at a single torus point.
pub fn lambda_at_point(
    sys: &DynSystem,
    gsys: &GSystem,
    fs: &[Observable],
    n_terms: u64,
    x: &[f64],
) -> Result<Complex64> {
    check_inputs(sys, gsys, fs)?;
    if sys.is_finite() {
        return Err(Error::Unsupported("points need the torus".into()));
    }
    let point = Point::Torus(x.to_vec());
    let mut acc = Complex64::zero();
    for n in 1..=n_terms as i64 {
        acc += point_term(sys, &values_at(gsys, n)?, fs, &point)?;
    }
    Ok(if n_terms == 0 {
        acc
    } else {
        acc / n_terms as f64
    })
}

/// `Λ_N` with the requested estimator.
pub fn lambda_average(
    sys: &DynSystem,
    gsys: &GSystem,
    fs: &[Observable],
    n_terms: u64,
    estimator: &Estimator,
) -> Result<Average> {
    match *estimator {
        Estimator::Exact => Ok(Average::Exact(lambda_exact(sys, gsys, fs, n_terms)?)),
        Estimator::MonteCarlo { samples, seed } => {
            check_inputs(sys, gsys, fs)?;
            let points = sample_points(sys, samples, seed);
            let mut acc = vec![Complex64::zero(); samples];
            for n in 1..=n_terms as i64 {
                let vals = values_at(gsys, n)?;
                for (a, x) in acc.iter_mut().zip(&points) {
                    *a += point_term(sys, &vals, fs, x)?;
                }
            }
            if n_terms > 0 {
                for a in &mut acc {
                    *a /= n_terms as f64;
                }
            }
            Ok(Average::Sampled {
                samples,
                seed,
                values: acc,
            })
        }
    }
}
