//! Seeded random symbolic objects for the verification batteries.

use nilavg::{MultiPoly, NilSeq};
use rand::Rng;

/// Polynomial in `nvars` variables with total degree at most `max_deg`.
pub fn poly<R: Rng>(rng: &mut R, nvars: usize, max_deg: u32) -> MultiPoly {
    let terms = rng.gen_range(0..=3);
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut budget = rng.gen_range(0..=max_deg);
        let mut e = vec![0u32; nvars];
        for slot in e.iter_mut() {
            let d = rng.gen_range(0..=budget);
            *slot = d;
            budget -= d;
        }
        out.push((rng.gen_range(-5i64..=5), e));
    }
    MultiPoly::from_terms(nvars, out).expect("shapes match")
}

/// Random element of `UT(dim)` at `level`.
pub fn nilseq<R: Rng>(rng: &mut R, dim: usize, level: usize, max_deg: u32) -> NilSeq {
    let rows = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Less => poly(rng, level + 1, max_deg),
                    std::cmp::Ordering::Equal => MultiPoly::one(level + 1),
                    std::cmp::Ordering::Greater => MultiPoly::zero(level + 1),
                })
                .collect()
        })
        .collect();
    NilSeq::from_rows(rows).expect("square unitriangular")
}

/// Level-0 sequence in `ℤ^rank`.
pub fn first_row<R: Rng>(rng: &mut R, rank: usize, max_deg: u32) -> NilSeq {
    let v: Vec<MultiPoly> = (0..rank).map(|_| poly(rng, 1, max_deg)).collect();
    NilSeq::first_row(&v).expect("nonempty")
}

/// Level-0 Heisenberg sequence.
pub fn heisenberg<R: Rng>(rng: &mut R, max_deg: u32) -> NilSeq {
    NilSeq::heisenberg(
        poly(rng, 1, max_deg),
        poly(rng, 1, max_deg),
        poly(rng, 1, max_deg),
    )
    .expect("same variables")
}

/// Level-0 sequence over ℤ, ℤ² or the Heisenberg group, cycling by `i`.
pub fn group_sequence<R: Rng>(rng: &mut R, i: usize, max_deg: u32) -> NilSeq {
    match i % 3 {
        0 => first_row(rng, 1, max_deg),
        1 => first_row(rng, 2, max_deg),
        _ => heisenberg(rng, max_deg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degrees_are_bounded_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = nilseq(&mut a, 4, 1, 3);
            assert_eq!(p, nilseq(&mut b, 4, 1, 3));
            for (_, _, e) in p.upper_entries() {
                assert!(e.total_degree().unwrap_or(0) <= 3);
            }
        }
    }
}
