//! Basic functions, the pairing rearrangement and the conditional
//! expectation identity chain, evaluated atom by atom.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::coupling::EmpiricalCoupling;
use super::window::{bracket_at, embed, iota, IndexWindow, SemidirectElement};
use crate::dynamics::{lambda_exact, Observable};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::nilseq::{GSystem, NilSeq};

/// The two coordinate indices of the rearrangement identity,
/// `ι(r(n))⁻¹ α⁻ⁿ(r p⁻¹)` through `H̃` arithmetic and `(⟨r|p⟩(n))⁻¹`
/// through the bracket.
pub fn rearrange_indices(r: &NilSeq, p: &NilSeq, n: i64) -> Result<(NilSeq, NilSeq)> {
    let h = SemidirectElement::new(iota(&r.eval_i64(&[n])?), n)?;
    let lhs = h.pull(&embed(&r.checked_mul(&p.inverse())?)?)?;
    let rhs = bracket_at(r, p, n)?.inverse();
    Ok((lhs, rhs))
}

/// Evaluates `φ_{rp⁻¹} ∘ S^{ι(r(n))} ∘ S^{αⁿ}` and `φ_e ∘ S^{⟨r|p⟩(n)}`
/// on a block `y` over `window` and compares them.
pub fn canon_rearrange_check(
    r: &NilSeq,
    p: &NilSeq,
    n: i64,
    window: &IndexWindow,
    y: &[Rational],
) -> Result<bool> {
    if y.len() != window.len() {
        return Err(Error::InvalidParameter(format!(
            "block has {} values for {} coordinates",
            y.len(),
            window.len()
        )));
    }
    let (lhs, rhs) = rearrange_indices(r, p, n)?;
    let (i, j) = (window.require(&lhs)?, window.require(&rhs)?);
    Ok(y[i] == y[j])
}

fn check_slots(coupling: &EmpiricalCoupling, gsys: &GSystem) -> Result<()> {
    if gsys.len() != coupling.slots() {
        return Err(Error::InvalidParameter(format!(
            "{} sequences for a coupling with {} slots",
            gsys.len(),
            coupling.slots()
        )));
    }
    if gsys.level() != 0 {
        return Err(Error::LevelMismatch {
            left: 0,
            right: gsys.level(),
        });
    }
    Ok(())
}

/// Coordinates `(p_k p_1⁻¹, .., p_k p_{k-1}⁻¹, p_k)` read by `g̃`, each
/// optionally translated by `ι(c)⁻¹`.
fn gtilde_elements(gsys: &GSystem) -> Result<Vec<NilSeq>> {
    let (last, rest) = gsys.entries().split_last().expect("nonempty");
    let pk = embed(last)?;
    let mut out: Vec<NilSeq> = rest
        .iter()
        .map(|p| pk.checked_mul(&embed(p)?.inverse()))
        .collect::<Result<_>>()?;
    out.push(pk);
    Ok(out)
}

/// `g̃(y) = ∏_i y^i_{c_i}` for coordinate positions `c`.
fn product_at(coupling: &EmpiricalCoupling, block: &[u32], positions: &[usize]) -> Rational {
    let mut v = Rational::one();
    for (slot, &w) in positions.iter().enumerate() {
        v *= coupling.coordinate(block, w, slot);
        if v.is_zero() {
            break;
        }
    }
    v
}

fn positions(window: &IndexWindow, elems: &[NilSeq]) -> Result<Vec<usize>> {
    elems.iter().map(|q| window.require(q)).collect()
}

/// Per-state conditional expectation `E_λ(G | X)` of an atom function.
fn conditional<F>(coupling: &EmpiricalCoupling, mut f: F) -> Vec<Rational>
where
    F: FnMut(usize, &[u32]) -> Rational,
{
    let mut out = vec![Rational::zero(); coupling.base_weights().len()];
    for ((x, block), w) in coupling.atoms() {
        out[*x] += w * f(*x, block);
    }
    for (o, mu) in out.iter_mut().zip(coupling.base_weights()) {
        *o /= mu;
    }
    out
}

/// The basic function `g = E_λ(∏_{i<k} φ^i_{p_k p_i⁻¹} · φ^k_{p_k} | X)`.
pub fn basic_function(coupling: &EmpiricalCoupling, gsys: &GSystem) -> Result<Vec<Rational>> {
    check_slots(coupling, gsys)?;
    let pos = positions(coupling.window(), &gtilde_elements(gsys)?)?;
    Ok(conditional(coupling, |_, block| {
        product_at(coupling, block, &pos)
    }))
}

/// Both sides of the pairing rearrangement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    /// `∫ f_k g̃ dλ_N`.
    #[serde(with = "exact::text")]
    pub coupling_side: Rational,
    /// `⟨Λ_N(f_1, .., f_k), last⟩_μ`.
    #[serde(with = "exact::text")]
    pub dynamics_side: Rational,
}

impl Pairing {
    pub fn agrees(&self) -> bool {
        self.coupling_side == self.dynamics_side
    }
}

/// `∫ f_k g̃ dλ_N` against `⟨Λ_N(f_1, .., f_k), last⟩`. With
/// `last = A_N` (see [`super::cesaro_last`]) the right side is
/// `⟨Λ_N(f_1, .., f_k), Λ_N(f_1, .., f_{k-1}, f'')⟩`.
pub fn pairing(coupling: &EmpiricalCoupling, f_k: &Observable, gsys: &GSystem) -> Result<Pairing> {
    check_slots(coupling, gsys)?;
    let sys = coupling.system();
    let fk = f_k.table(sys)?;
    let pos = positions(coupling.window(), &gtilde_elements(gsys)?)?;
    let mut coupling_side = Rational::zero();
    for ((x, block), w) in coupling.atoms() {
        coupling_side += w * &fk[*x] * product_at(coupling, block, &pos);
    }

    let k = coupling.slots();
    let mut fs = coupling.observables()[..k - 1].to_vec();
    fs.push(f_k.clone());
    let average = lambda_exact(sys, gsys, &fs, coupling.n_terms())?;
    let last = coupling.observables()[k - 1].table(sys)?;
    let dynamics_side = average
        .iter()
        .zip(&last)
        .zip(coupling.base_weights())
        .map(|((a, l), mu)| a * l * mu)
        .sum();
    Ok(Pairing {
        coupling_side,
        dynamics_side,
    })
}

/// Discrepancies along the identity chain
///
/// ```text
/// E1 = Λ_n(f_1, .., f_{k-1}, g)
/// E2 = E_λ(Λ̃_n(f̃_1, .., f̃_{k-1}, g̃) | X)
/// E3 = E_λ((1/n) Σ_m ∏ f_i(T^{p_i(m)} x) ∏ φ^i_e(S^{⟨p_k|p_i⟩(m)} y) φ^k_e(S^{⟨p_k|e⟩(m)} y) | X)
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondExpReport {
    pub n_avg: u64,
    pub n_coupling: u64,
    pub periodized: bool,
    /// `max_x |E1 − E2|`; zero for every diagonally invariant coupling.
    #[serde(with = "exact::text")]
    pub linearity: Rational,
    /// `max_x |E2 − E3|`; zero when periodized.
    #[serde(with = "exact::text")]
    pub rearranged: Rational,
    /// `2 n ∏∥f_i∥_∞ ∥last∥_∞ / N`.
    #[serde(with = "exact::text")]
    pub budget: Rational,
}

impl CondExpReport {
    pub fn holds(&self) -> bool {
        self.linearity.is_zero()
            && if self.periodized {
                self.rearranged.is_zero()
            } else {
                self.rearranged <= self.budget
            }
    }
}

/// Runs the identity chain for averages of length `n_avg`. The window must
/// contain the brackets, their inverses and the translates for every
/// `n ∈ [1, n_avg]`, as [`super::build_window`] provides.
pub fn cond_exp_identity_check(
    coupling: &EmpiricalCoupling,
    gsys: &GSystem,
    n_avg: u64,
) -> Result<CondExpReport> {
    check_slots(coupling, gsys)?;
    if n_avg == 0 {
        return Err(Error::InvalidParameter("averages need n >= 1".into()));
    }
    let sys = coupling.system();
    let window = coupling.window();
    let k = coupling.slots();
    let (last, rest) = gsys.entries().split_last().expect("nonempty");
    let fs = &coupling.observables()[..k - 1];
    let tables: Vec<Vec<Rational>> = fs.iter().map(|f| f.table(sys)).collect::<Result<_>>()?;
    let count = coupling.base_weights().len();

    let g = basic_function(coupling, gsys)?;
    let mut e1_inputs = fs.to_vec();
    e1_inputs.push(Observable::tabulated(g));
    let e1 = lambda_exact(sys, gsys, &e1_inputs, n_avg)?;

    let base = gtilde_elements(gsys)?;
    let identity = NilSeq::identity(gsys.dim(), 0);
    // weights[n - 1][x] = ∏_{i<k} f_i(T^{p_i(n)} x)
    let mut weights: Vec<Vec<Rational>> = Vec::new();
    let mut translated: Vec<Vec<usize>> = Vec::new();
    let mut rearranged: Vec<Vec<usize>> = Vec::new();
    for n in 1..=n_avg as i64 {
        let perms: Vec<Vec<usize>> = rest
            .iter()
            .map(|p| sys.permutation(&p.eval_i64(&[n])?))
            .collect::<Result<_>>()?;
        weights.push(
            (0..count)
                .map(|x| {
                    tables
                        .iter()
                        .zip(&perms)
                        .map(|(t, perm)| t[perm[x]].clone())
                        .product()
                })
                .collect(),
        );
        let shift = iota(&last.eval_i64(&[n])?).inverse();
        let elems: Vec<NilSeq> = base
            .iter()
            .map(|q| shift.checked_mul(q))
            .collect::<Result<_>>()?;
        translated.push(positions(window, &elems)?);
        let mut brackets: Vec<NilSeq> = rest
            .iter()
            .map(|p| Ok(bracket_at(last, p, n)?.inverse()))
            .collect::<Result<_>>()?;
        brackets.push(bracket_at(last, &identity, n)?.inverse());
        rearranged.push(positions(window, &brackets)?);
    }

    let avg = BigInt::from(n_avg);
    let chain = |pos: &[Vec<usize>]| {
        conditional(coupling, |x, block| {
            let total: Rational = weights
                .iter()
                .zip(pos)
                .map(|(wn, p)| &wn[x] * product_at(coupling, block, p))
                .sum();
            total / &avg
        })
    };
    let e2 = chain(&translated);
    let e3 = chain(&rearranged);

    let max_gap = |a: &[Rational], b: &[Rational]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    };
    let sup: Rational = coupling
        .observables()
        .iter()
        .map(Observable::sup_norm)
        .product();
    let budget =
        Rational::from_integer(BigInt::from(2 * n_avg)) * sup / BigInt::from(coupling.n_terms());
    Ok(CondExpReport {
        n_avg,
        n_coupling: coupling.n_terms(),
        periodized: coupling.is_periodized(),
        linearity: max_gap(&e1, &e2),
        rearranged: max_gap(&e2, &e3),
        budget,
    })
}
