//! Truncated noncommutative power series with matrix coefficients and their
//! images as block operators on the truncated full Fock space.
//!
//! Fock-space layout: level `l` holds `N^l` blocks of size `dim`, one per
//! word of length `l` in lexicographic order, so the basis vector for
//! `(word, e)` sits at `level_offset(l)·dim + index(word)·dim + e`.
//!
//! The symbol map sends a series with coefficients `c_σ` to the operator
//! whose `(τ, τσ)` block is `c_σ`. Its first block row is `[c_σ]` and the
//! `(i, j)` block equals `I_N ⊗` the `(i-1, j-1)` block.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, zeros};
use crate::scalar::{lit, re, CMatrix, Real, C};
use crate::word::{self, level_offset, level_size, Word};

/// Truncated series `Σ_{|σ| ≤ d} c_σ e_σ` with `out_dim × in_dim`
/// coefficients. Absent words have zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct NcSeries<T: Real> {
    letters: usize,
    in_dim: usize,
    out_dim: usize,
    max_degree: usize,
    coeffs: BTreeMap<Word, CMatrix<T>>,
}

impl<T: Real> NcSeries<T> {
    pub fn zero(letters: usize, out_dim: usize, in_dim: usize, max_degree: usize) -> Self {
        assert!(letters >= 1, "alphabet must be nonempty");
        NcSeries {
            letters,
            in_dim,
            out_dim,
            max_degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(letters: usize, value: CMatrix<T>, max_degree: usize) -> Self {
        let mut s = Self::zero(letters, value.nrows(), value.ncols(), max_degree);
        s.insert_unchecked(Word::empty(), value);
        s
    }

    pub fn identity(letters: usize, dim: usize, max_degree: usize) -> Self {
        Self::constant(letters, linalg::identity(dim), max_degree)
    }

    /// Scalar series with a single coefficient `value` at `word`.
    pub fn monomial(letters: usize, word: Word, value: C<T>, max_degree: usize) -> Result<Self> {
        let mut s = Self::zero(letters, 1, 1, max_degree.max(word.len()));
        s.set(word, linalg::scalar(value))?;
        Ok(s)
    }

    /// Builds a series from `(word, coefficient)` pairs, validating words
    /// and shapes.
    pub fn from_coeffs(
        letters: usize,
        out_dim: usize,
        in_dim: usize,
        max_degree: usize,
        coeffs: impl IntoIterator<Item = (Word, CMatrix<T>)>,
    ) -> Result<Self> {
        let mut s = Self::zero(letters, out_dim, in_dim, max_degree);
        for (w, c) in coeffs {
            s.set(w, c)?;
        }
        Ok(s)
    }

    pub fn letters(&self) -> usize {
        self.letters
    }
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }
    pub fn out_dim(&self) -> usize {
        self.out_dim
    }
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn set(&mut self, word: Word, value: CMatrix<T>) -> Result<()> {
        if !word.is_valid(self.letters) && !word.is_empty() {
            return Err(Error::InvalidWord {
                word: word.letters().to_vec(),
                letters: self.letters,
            });
        }
        if word.len() > self.max_degree {
            return Err(Error::Invalid(format!(
                "word {word} longer than truncation degree {}",
                self.max_degree
            )));
        }
        if value.shape() != (self.out_dim, self.in_dim) {
            return Err(Error::Dimension(format!(
                "coefficient at {word} is {}x{}, expected {}x{}",
                value.nrows(),
                value.ncols(),
                self.out_dim,
                self.in_dim
            )));
        }
        self.insert_unchecked(word, value);
        Ok(())
    }

    fn insert_unchecked(&mut self, word: Word, value: CMatrix<T>) {
        self.coeffs.insert(word, value);
    }

    pub fn get(&self, word: &Word) -> Option<&CMatrix<T>> {
        self.coeffs.get(word)
    }

    /// Coefficient at `word`, zero if absent.
    pub fn coeff(&self, word: &Word) -> CMatrix<T> {
        self.coeffs
            .get(word)
            .cloned()
            .unwrap_or_else(|| zeros(self.out_dim, self.in_dim))
    }

    pub fn constant_term(&self) -> CMatrix<T> {
        self.coeff(&Word::empty())
    }

    /// Stored coefficients in length-then-lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, &CMatrix<T>)> {
        self.coeffs.iter()
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    /// Same coefficients with a different truncation degree; coefficients
    /// beyond the new degree are dropped.
    pub fn truncate(&self, max_degree: usize) -> Self {
        NcSeries {
            letters: self.letters,
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            max_degree,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(w, _)| w.len() <= max_degree)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.letters != other.letters || self.in_dim != other.in_dim || self.out_dim != other.out_dim {
            return Err(Error::Dimension(format!(
                "series shapes differ: (N={}, {}x{}) vs (N={}, {}x{})",
                self.letters, self.out_dim, self.in_dim, other.letters, other.out_dim, other.in_dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.truncate(self.max_degree.min(other.max_degree));
        let degree = out.max_degree;
        for (w, c) in other.iter().filter(|(w, _)| w.len() <= degree) {
            let sum = out.coeff(w) + c;
            out.insert_unchecked(w.clone(), sum);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(re(-T::one())))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= s;
        }
        out
    }

    /// `m · self` for a constant matrix `m`.
    pub fn left_mul(&self, m: &CMatrix<T>) -> Result<Self> {
        if m.ncols() != self.out_dim {
            return Err(Error::Dimension(format!(
                "left factor has {} columns, series has {} rows",
                m.ncols(),
                self.out_dim
            )));
        }
        let mut out = Self::zero(self.letters, m.nrows(), self.in_dim, self.max_degree);
        for (w, c) in self.iter() {
            out.insert_unchecked(w.clone(), m * c);
        }
        Ok(out)
    }

    /// `self · m` for a constant matrix `m`.
    pub fn right_mul(&self, m: &CMatrix<T>) -> Result<Self> {
        if m.nrows() != self.in_dim {
            return Err(Error::Dimension(format!(
                "right factor has {} rows, series has {} columns",
                m.nrows(),
                self.in_dim
            )));
        }
        let mut out = Self::zero(self.letters, self.out_dim, m.ncols(), self.max_degree);
        for (w, c) in self.iter() {
            out.insert_unchecked(w.clone(), c * m);
        }
        Ok(out)
    }

    /// Cauchy product `self · other`: the coefficient at `σ` is the sum of
    /// `x_α y_β` over all factorizations `σ = αβ`. The result is truncated
    /// at `min(deg x + deg y, cap)`.
    pub fn multiply(&self, other: &Self, cap: Option<usize>) -> Result<Self> {
        if self.letters != other.letters {
            return Err(Error::Dimension("alphabet sizes differ".into()));
        }
        if self.in_dim != other.out_dim {
            return Err(Error::Dimension(format!(
                "inner dimensions differ: {} vs {}",
                self.in_dim, other.out_dim
            )));
        }
        let mut degree = self.max_degree + other.max_degree;
        if let Some(cap) = cap {
            degree = degree.min(cap);
        }
        let mut out = Self::zero(self.letters, self.out_dim, other.in_dim, degree);
        for (a, xa) in self.iter() {
            if a.len() > degree {
                break;
            }
            for (b, yb) in other.iter() {
                if a.len() + b.len() > degree {
                    break;
                }
                let w = a.concat(b);
                let term = xa * yb;
                match out.coeffs.get_mut(&w) {
                    Some(acc) => *acc += term,
                    None => {
                        out.coeffs.insert(w, term);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Two-sided inverse up to `target_degree`, computed degree by degree:
    /// `y_∅ = x_∅⁻¹` and `y_σ = -x_∅⁻¹ Σ_{σ=αβ, α≠∅} x_α y_β`.
    ///
    /// `tol_inv` is the relative threshold on the smallest singular value of
    /// `x_∅` (default `1e-10`).
    pub fn invert(&self, target_degree: usize, tol_inv: Option<T>) -> Result<Self> {
        if self.in_dim != self.out_dim {
            return Err(Error::Dimension(format!(
                "cannot invert a {}x{} series",
                self.out_dim, self.in_dim
            )));
        }
        let x0 = self.constant_term();
        let tol = tol_inv.unwrap_or_else(|| lit(1e-10));
        let dim = self.in_dim;
        let inv0 = if dim == 0 {
            zeros(0, 0)
        } else {
            let sv = x0.clone().singular_values();
            let (smin, smax) = (sv.min(), sv.max());
            if smax <= T::zero() || smin <= tol * smax {
                return Err(Error::SingularConstant {
                    smallest: smin.to_f64().unwrap_or(f64::NAN),
                });
            }
            x0.clone().try_inverse().ok_or(Error::SingularConstant {
                smallest: smin.to_f64().unwrap_or(f64::NAN),
            })?
        };
        let neg_inv0 = -inv0.clone();
        let mut out = Self::zero(self.letters, dim, dim, target_degree);
        out.insert_unchecked(Word::empty(), inv0);
        for len in 1..=target_degree {
            for sigma in word::words_of_length(self.letters, len) {
                let mut acc = zeros(dim, dim);
                let mut any = false;
                for (alpha, beta) in sigma.splits().skip(1) {
                    if let (Some(xa), Some(yb)) = (self.coeffs.get(&alpha), out.coeffs.get(&beta)) {
                        acc += xa * yb;
                        any = true;
                    }
                }
                if any {
                    let y = &neg_inv0 * acc;
                    if y.iter().any(|z| *z != C::new(T::zero(), T::zero())) {
                        out.insert_unchecked(sigma, y);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of the coefficient difference over all
    /// words of length `≤ degree`.
    pub fn max_coeff_diff(&self, other: &Self, degree: usize) -> T {
        let mut words: Vec<&Word> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        words.sort();
        words.dedup();
        words
            .into_iter()
            .filter(|w| w.len() <= degree)
            .map(|w| {
                let a = self.coeff(w);
                let b = other.coeff(w);
                if a.shape() != b.shape() {
                    return T::max_value().unwrap_or_else(|| lit(f64::MAX));
                }
                linalg::max_abs(&(a - b))
            })
            .fold(T::zero(), |m, v| m.max(v))
    }

    /// Image under the symbol map truncated to Fock levels `0..=levels`.
    pub fn phi_embed(&self, levels: usize) -> FockBlockOperator<T> {
        let n = self.letters;
        let (rd, cd) = (self.out_dim, self.in_dim);
        let rows = level_offset(n, levels + 1) * rd;
        let cols = level_offset(n, levels + 1) * cd;
        let mut data = zeros(rows, cols);
        for (sigma, c) in self.iter() {
            let k = sigma.len();
            if k > levels {
                break;
            }
            let sidx = sigma.index(n);
            for i in 0..=(levels - k) {
                let j = i + k;
                let stride = level_size(n, k);
                for tau in 0..level_size(n, i) {
                    let r = (level_offset(n, i) + tau) * rd;
                    let col = (level_offset(n, j) + tau * stride + sidx) * cd;
                    data.view_mut((r, col), (rd, cd)).copy_from(c);
                }
            }
        }
        FockBlockOperator {
            letters: n,
            levels,
            in_dim: cd,
            out_dim: rd,
            data,
        }
    }

    /// `‖Φ_n(x)‖ ≤ 1 + tol`. Callers should pass `levels ≥ max_degree` so
    /// that every coefficient participates.
    pub fn is_contraction(&self, levels: usize, tol: T) -> bool {
        linalg::operator_norm(self.phi_embed(levels).matrix()) <= T::one() + tol
    }

    /// `Σ_σ c_σ λ_{i_1}···λ_{i_k}` over all stored words `σ = i_1···i_k`.
    pub fn evaluate_at_point(&self, point: &[C<T>]) -> Result<CMatrix<T>> {
        if point.len() != self.letters {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, alphabet has {} letters",
                point.len(),
                self.letters
            )));
        }
        let mut acc = zeros(self.out_dim, self.in_dim);
        for (w, c) in self.iter() {
            let weight = w
                .letters()
                .iter()
                .fold(C::new(T::one(), T::zero()), |p, &l| p * point[l - 1]);
            acc += c * weight;
        }
        Ok(acc)
    }

    /// Coefficientwise complex conjugate (not the adjoint).
    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.map(|z| z.conj());
        }
        out
    }
}

/// Dense block operator on `⊕_{l=0}^{n} H_l ⊗ E`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBlockOperator<T: Real> {
    pub letters: usize,
    pub levels: usize,
    pub in_dim: usize,
    pub out_dim: usize,
    pub data: CMatrix<T>,
}

impl<T: Real> FockBlockOperator<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.data
    }

    fn row_range(&self, level: usize) -> (usize, usize) {
        let n = self.letters;
        (level_offset(n, level) * self.out_dim, level_size(n, level) * self.out_dim)
    }

    fn col_range(&self, level: usize) -> (usize, usize) {
        let n = self.letters;
        (level_offset(n, level) * self.in_dim, level_size(n, level) * self.in_dim)
    }

    /// Block `T_{ij}` mapping level `j` into level `i`.
    pub fn block(&self, i: usize, j: usize) -> CMatrix<T> {
        let (r0, h) = self.row_range(i);
        let (c0, w) = self.col_range(j);
        linalg::block(&self.data, r0, c0, h, w)
    }

    /// Scans every block pair and checks `T_{ij} = I_N ⊗ T_{i-1,j-1}`
    /// bit-exactly for `1 ≤ i ≤ j ≤ n`.
    pub fn check_replication(&self) -> bool {
        for i in 1..=self.levels {
            for j in i..=self.levels {
                let expected = linalg::kron_identity(self.letters, &self.block(i - 1, j - 1));
                if self.block(i, j) != expected {
                    return false;
                }
            }
        }
        true
    }

    /// True iff every block strictly below the diagonal is exactly zero.
    pub fn is_upper_triangular(&self) -> bool {
        (0..=self.levels).all(|i| (0..i).all(|j| self.block(i, j).iter().all(|z| *z == C::new(T::zero(), T::zero()))))
    }
}

/// Dimension of the truncated Fock space `⊕_{l ≤ levels} H_l ⊗ C^dim`.
pub fn fock_dim(letters: usize, levels: usize, dim: usize) -> usize {
    word::count_words(letters, levels) * dim
}

/// Matrix of the truncated creation operator `C_{k,n} ⊗ I_e`, which maps the
/// basis vector of `τ` to that of `kτ` and annihilates level `n`.
pub fn creation_matrix<T: Real>(letters: usize, k: usize, levels: usize, e_dim: usize) -> Result<FockBlockOperator<T>> {
    if k == 0 || k > letters {
        return Err(Error::InvalidWord {
            word: vec![k],
            letters,
        });
    }
    let dim = fock_dim(letters, levels, e_dim);
    let mut data = zeros(dim, dim);
    for i in 0..levels {
        for tau in 0..level_size(letters, i) {
            let src = (level_offset(letters, i) + tau) * e_dim;
            let dst = (level_offset(letters, i + 1) + (k - 1) * level_size(letters, i) + tau) * e_dim;
            for e in 0..e_dim {
                data[(dst + e, src + e)] = C::new(T::one(), T::zero());
            }
        }
    }
    Ok(FockBlockOperator {
        letters,
        levels,
        in_dim: e_dim,
        out_dim: e_dim,
        data,
    })
}

/// Block shift with identities on the subdiagonal blocks `(l+1, l)`.
/// `dims[l]` is the dimension of level `l`; consecutive levels must agree.
pub fn shift_matrix<T: Real>(dims: &[usize]) -> Result<CMatrix<T>> {
    for (l, pair) in dims.windows(2).enumerate() {
        if pair[0] != pair[1] {
            return Err(Error::Dimension(format!(
                "levels {l} and {} have dimensions {} and {}",
                l + 1,
                pair[0],
                pair[1]
            )));
        }
    }
    let total: usize = dims.iter().sum();
    let mut out = zeros(total, total);
    let mut offset = 0;
    for l in 0..dims.len().saturating_sub(1) {
        let d = dims[l];
        for e in 0..d {
            out[(offset + d + e, offset + e)] = C::new(T::one(), T::zero());
        }
        offset += d;
    }
    Ok(out)
}

/// Largest singular value of a block operator.
pub fn operator_norm<T: Real>(a: &FockBlockOperator<T>) -> T {
    linalg::operator_norm(&a.data)
}
