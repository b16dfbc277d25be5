//! Seeded random instances. Every generator draws from a ChaCha stream, so
//! a fixed seed gives the same instance on every platform.

use ncschur::linalg;
use ncschur::schur::synthesize_rows;
use ncschur::series::NcSeries;
use ncschur::toeplitz::schur_to_kernel;
use ncschur::{Generator, Matrix, Series, Symbol, Word, C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut Stream) -> C<f64> {
    C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix(rng: &mut Stream, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| complex(rng))
}

/// Random matrix with operator norm drawn uniformly from `[0, max_norm)`.
pub fn contraction(rng: &mut Stream, rows: usize, cols: usize, max_norm: f64) -> Matrix {
    let m = matrix(rng, rows, cols);
    let norm = linalg::operator_norm(&m);
    let target = rng.random_range(0.0..max_norm);
    if norm == 0.0 {
        m
    } else {
        m * C::new(target / norm, 0.0)
    }
}

/// Rows `Γ_k : C^{N^k e1} → C^{e2}` for `k = 0..=depth`.
pub fn contractive_rows(rng: &mut Stream, letters: usize, e1: usize, e2: usize, depth: usize, max_norm: f64) -> Vec<Matrix> {
    (0..=depth)
        .map(|k| contraction(rng, e2, letters.pow(k as u32) * e1, max_norm))
        .collect()
}

/// Schur-class series of the given degree: contractive rows pushed through
/// synthesis. Rows are halved until the truncation is contractive at
/// `levels` within `1e-8`.
pub fn schur_instance(rng: &mut Stream, letters: usize, degree: usize, levels: usize) -> Series {
    let mut rows = contractive_rows(rng, letters, 1, 1, degree, 0.95);
    loop {
        let t = synthesize_rows(letters, &rows, degree).expect("contractive rows synthesize");
        if t.is_contraction(levels.max(degree), 1e-8) {
            return t;
        }
        for r in rows.iter_mut() {
            *r *= C::new(0.5, 0.0);
        }
    }
}

/// Scalar series with `z_∅ = 0` and `‖Φ_degree(z)‖ = target`.
pub fn vanishing_contraction(rng: &mut Stream, letters: usize, degree: usize, target: f64) -> Series {
    let mut z = NcSeries::zero(letters, 1, 1, degree);
    for len in 1..=degree {
        for w in ncschur::word::words_of_length(letters, len) {
            z.set(w, linalg::scalar(complex(rng))).expect("valid word");
        }
    }
    let norm = ncschur::series::operator_norm(&z.phi_embed(degree));
    if norm == 0.0 {
        z
    } else {
        z.scale(C::new(target / norm, 0.0))
    }
}

/// Scalar symbol whose kernel is positive definite at `degree`: the image of
/// a strict contraction under the Schur-to-kernel map.
pub fn psd_symbol(rng: &mut Stream, letters: usize, degree: usize, max_norm: f64) -> Symbol {
    let target = rng.random_range(0.1..max_norm);
    let z = vanishing_contraction(rng, letters, degree, target);
    schur_to_kernel(&z, degree).expect("vanishing constant term")
}

/// Arbitrary scalar symbol with entries of modulus below `scale`.
pub fn symbol(rng: &mut Stream, letters: usize, degree: usize, scale: f64) -> Symbol {
    let entries: Vec<(Word, C<f64>)> = (1..=degree)
        .flat_map(|len| ncschur::word::words_of_length(letters, len))
        .map(|w| (w, complex(rng) * scale))
        .collect();
    Symbol::scalar(letters, &entries).expect("valid words")
}

/// Two-column generator `[u, v]` with signature `diag(1, -1)`.
pub fn generator(rng: &mut Stream, rows: usize) -> Generator {
    Generator::new(matrix(rng, rows, 2), 1, 1).expect("two columns")
}

/// `count` distinct points in the ball of radius `max_norm` in `C^letters`
/// and values of modulus below `value_norm`.
pub fn pick_data(
    rng: &mut Stream,
    letters: usize,
    count: usize,
    max_norm: f64,
    value_norm: f64,
) -> (Vec<Vec<C<f64>>>, Vec<C<f64>>) {
    let points = (0..count)
        .map(|_| {
            let p: Vec<C<f64>> = (0..letters).map(|_| complex(rng)).collect();
            let norm = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let r = rng.random_range(0.0..max_norm);
            p.into_iter().map(|z| z * (r / norm)).collect()
        })
        .collect();
    let values = (0..count)
        .map(|_| {
            let z = complex(rng);
            z * (rng.random_range(0.0..value_norm) / z.norm())
        })
        .collect();
    (points, values)
}
