//! Independent oracle for e^{B(η)} on the two-mode pair kernel: the
//! generator matrix is re-derived from occupation combinatorics without the
//! ladder-operator machinery, and exponentiated by plain Taylor summation
//! with scaling and squaring.

use bosegas_core::bogoliubov::{build_generator, two_mode_pair_kernel};
use bosegas_core::fock::build_basis;
use nalgebra::DMatrix;

/// B = s·(b†₁b†₂ − b₁b₂) assembled entrywise from first principles: the
/// state (0, m₁, m₂) couples to (0, m₁+1, m₂+1) with amplitude
/// √(m₁+1)√(m₂+1)·√((N−t)/N)·√((N−t−1)/N), t = m₁+m₂,
/// because b† = a†·√((N−𝒩)/N) acts right-to-left.
fn oracle_generator(s: f64, cap: usize, total_n: usize) -> DMatrix<f64> {
    let states: Vec<(u32, u32)> = {
        let mut v = Vec::new();
        for m1 in 0..=cap as u32 {
            for m2 in 0..=(cap as u32 - m1) {
                v.push((m1, m2));
            }
        }
        v.sort();
        v
    };
    let index = |m1: u32, m2: u32| states.iter().position(|&s| s == (m1, m2)).unwrap();
    let dim = states.len();
    let nf = total_n as f64;
    let mut b = DMatrix::zeros(dim, dim);
    for (col, &(m1, m2)) in states.iter().enumerate() {
        let t = (m1 + m2) as f64;
        if (m1 + m2) as usize + 2 <= cap {
            // b†₂ then b†₁: weights √((N−t)/N) then √((N−t−1)/N)
            let amp = ((m1 + 1) as f64).sqrt()
                * ((m2 + 1) as f64).sqrt()
                * ((nf - t) / nf).sqrt()
                * ((nf - t - 1.0) / nf).sqrt();
            let row = index(m1 + 1, m2 + 1);
            b[(row, col)] += s * amp;
        }
        if m1 >= 1 && m2 >= 1 {
            let amp = (m1 as f64).sqrt()
                * (m2 as f64).sqrt()
                * ((nf - t + 1.0) / nf).sqrt()
                * ((nf - t + 2.0) / nf).sqrt();
            let row = index(m1 - 1, m2 - 1);
            b[(row, col)] -= s * amp;
        }
    }
    b
}

/// Taylor exponential with scaling and squaring, independent of the Padé
/// route used by the library.
fn taylor_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = m.amax();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings as i32);
    let dim = m.nrows();
    let mut result = DMatrix::identity(dim, dim);
    let mut term = DMatrix::identity(dim, dim);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[test]
fn exp_b_matches_independent_taylor_oracle() {
    let hs = 0.3;
    let cap = 6usize;
    let total_n = 8usize;
    let eta = two_mode_pair_kernel(hs);
    let basis = build_basis(3, cap, true).unwrap();
    let gen = build_generator(&eta, &basis, total_n).unwrap();
    let lib = gen.exp_b(1.0);

    let s = hs / 2f64.sqrt();
    // the oracle carries the coefficient ½(η₁₂ + η₂₁) = s for the (1,2) pair
    let oracle = taylor_exp(&oracle_generator(s, cap, total_n));

    // the two bases enumerate (m₁, m₂) lexicographically in both cases
    assert_eq!(lib.nrows(), oracle.nrows());
    let mut worst = 0.0f64;
    for i in 0..lib.nrows() {
        for j in 0..lib.ncols() {
            worst = worst.max((lib[(i, j)].re - oracle[(i, j)]).abs());
            worst = worst.max(lib[(i, j)].im.abs());
        }
    }
    assert!(worst < 1e-10, "e^B deviates from the oracle by {worst:e}");
}
