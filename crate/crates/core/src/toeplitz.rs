//! Multi-Toeplitz kernels on the free semigroup and their correspondence
//! with contractive series that vanish at the root.
//!
//! A kernel is invariant under left translation, `K(τσ, τσ') = K(σ, σ')`,
//! so it is determined by its symbol `s_α = K(α, ∅)`: `K(τα, τ) = s_α`,
//! `K(τ, τα) = s_α*`, and `K` vanishes on pairs where neither word is a
//! prefix of the other.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, zeros};
use crate::scalar::{re, CMatrix, Real, C};
use crate::series::{fock_dim, NcSeries};
use crate::word::{level_offset, level_size, Word};

/// Symbol of a multi-Toeplitz kernel. `s_∅ = I` is implicit; only nonempty
/// words are stored and absent words carry zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiToeplitzSymbol<T: Real> {
    letters: usize,
    e_dim: usize,
    entries: BTreeMap<Word, CMatrix<T>>,
}

impl<T: Real> MultiToeplitzSymbol<T> {
    /// The trivial symbol `s = δ_∅`, whose kernel is the identity.
    pub fn identity(letters: usize, e_dim: usize) -> Self {
        assert!(letters >= 1, "alphabet must be nonempty");
        MultiToeplitzSymbol {
            letters,
            e_dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(
        letters: usize,
        e_dim: usize,
        entries: impl IntoIterator<Item = (Word, CMatrix<T>)>,
    ) -> Result<Self> {
        let mut s = Self::identity(letters, e_dim);
        for (w, v) in entries {
            s.set(w, v)?;
        }
        Ok(s)
    }

    /// Scalar symbol from `(word, value)` pairs.
    pub fn scalar(letters: usize, entries: &[(Word, C<T>)]) -> Result<Self> {
        Self::from_entries(letters, 1, entries.iter().map(|(w, v)| (w.clone(), linalg::scalar(*v))))
    }

    /// Sets `s_word`. The empty word must map to the identity.
    pub fn set(&mut self, word: Word, value: CMatrix<T>) -> Result<()> {
        if !word.is_valid(self.letters) {
            return Err(Error::InvalidWord {
                word: word.letters().to_vec(),
                letters: self.letters,
            });
        }
        if value.shape() != (self.e_dim, self.e_dim) {
            return Err(Error::Dimension(format!(
                "symbol value at {word} is {}x{}, expected {}x{}",
                value.nrows(),
                value.ncols(),
                self.e_dim,
                self.e_dim
            )));
        }
        if word.is_empty() {
            if value != linalg::identity(self.e_dim) {
                return Err(Error::Invalid("symbol at the empty word must be the identity".into()));
            }
            return Ok(());
        }
        self.entries.insert(word, value);
        Ok(())
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn e_dim(&self) -> usize {
        self.e_dim
    }

    /// `s_word`, with `s_∅ = I` and zero for absent words.
    pub fn value(&self, word: &Word) -> CMatrix<T> {
        if word.is_empty() {
            return linalg::identity(self.e_dim);
        }
        self.entries
            .get(word)
            .cloned()
            .unwrap_or_else(|| zeros(self.e_dim, self.e_dim))
    }

    /// Stored entries at nonempty words.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, &CMatrix<T>)> {
        self.entries.iter()
    }

    /// Length of the longest stored word.
    pub fn max_degree(&self) -> usize {
        self.entries.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn truncate(&self, degree: usize) -> Self {
        MultiToeplitzSymbol {
            letters: self.letters,
            e_dim: self.e_dim,
            entries: self
                .entries
                .iter()
                .filter(|(w, _)| w.len() <= degree)
                .map(|(w, v)| (w.clone(), v.clone()))
                .collect(),
        }
    }

    /// Largest entrywise difference over words of length `≤ degree`.
    pub fn max_diff(&self, other: &Self, degree: usize) -> T {
        let mut words: Vec<&Word> = self.entries.keys().chain(other.entries.keys()).collect();
        words.sort();
        words.dedup();
        words
            .into_iter()
            .filter(|w| w.len() <= degree)
            .map(|w| linalg::max_abs(&(self.value(w) - other.value(w))))
            .fold(T::zero(), |m, v| m.max(v))
    }
}

/// `K(σ, τ)`.
pub fn kernel_value<T: Real>(symbol: &MultiToeplitzSymbol<T>, sigma: &Word, tau: &Word) -> CMatrix<T> {
    if let Some(alpha) = sigma.strip_prefix(tau) {
        return symbol.value(&alpha);
    }
    if let Some(alpha) = tau.strip_prefix(sigma) {
        return symbol.value(&alpha).adjoint();
    }
    zeros(symbol.e_dim(), symbol.e_dim())
}

/// The block matrix `K_n = [K(σ, τ)]_{|σ|, |τ| ≤ n}` in the Fock layout.
pub fn build_kn<T: Real>(symbol: &MultiToeplitzSymbol<T>, levels: usize) -> CMatrix<T> {
    let (n, e) = (symbol.letters(), symbol.e_dim());
    let size = fock_dim(n, levels, e);
    let mut k = linalg::identity(size);
    for (alpha, s) in symbol.iter() {
        let a = alpha.len();
        if a > levels {
            break;
        }
        let aidx = alpha.index(n);
        let sa = s.adjoint();
        for i in 0..=(levels - a) {
            let stride = level_size(n, a);
            for tau in 0..level_size(n, i) {
                let col = (level_offset(n, i) + tau) * e;
                let row = (level_offset(n, i + a) + tau * stride + aidx) * e;
                k.view_mut((row, col), (e, e)).copy_from(s);
                k.view_mut((col, row), (e, e)).copy_from(&sa);
            }
        }
    }
    k
}

/// Checks `S_{ij} = I_N ⊗ S_{i-1,j-1}` bit-exactly for all `1 ≤ i, j ≤ n`.
pub fn satisfies_replication<T: Real>(k: &CMatrix<T>, letters: usize, levels: usize, e_dim: usize) -> bool {
    let blk = |i: usize, j: usize| {
        linalg::block(
            k,
            level_offset(letters, i) * e_dim,
            level_offset(letters, j) * e_dim,
            level_size(letters, i) * e_dim,
            level_size(letters, j) * e_dim,
        )
    };
    (1..=levels).all(|i| (1..=levels).all(|j| blk(i, j) == linalg::kron_identity(letters, &blk(i - 1, j - 1))))
}

/// `min eig(M) ≥ -tol` for a Hermitian `M`.
pub fn is_positive<T: Real>(m: &CMatrix<T>, tol: T) -> Result<bool> {
    Ok(linalg::checked_min_eigenvalue(m)? >= -tol)
}

/// Result of [`kernel_to_schur`].
#[derive(Debug, Clone)]
pub struct KernelSchur<T: Real> {
    pub z: NcSeries<T>,
    pub min_eigenvalue: T,
    /// False when `K_n` is not positive semidefinite; `z` is then only
    /// diagnostic.
    pub positive: bool,
}

/// Series `x` with `x_∅ = 1` and `x_σ = s_σ` up to degree `n`.
fn symbol_series<T: Real>(symbol: &MultiToeplitzSymbol<T>, degree: usize) -> Result<NcSeries<T>> {
    let mut x = NcSeries::identity(symbol.letters(), 1, degree);
    for (w, s) in symbol.iter().filter(|(w, _)| w.len() <= degree) {
        x.set(w.clone(), s.clone())?;
    }
    Ok(x)
}

/// `z = y · x⁻¹` with `x = 1 + Σ s_σ e_σ` and `y = x - 1`, truncated at
/// degree `n`. Positivity of `K_n` is checked with tolerance `tol_psd`
/// (default `1e-10` relative to the largest eigenvalue).
pub fn kernel_to_schur<T: Real>(symbol: &MultiToeplitzSymbol<T>, degree: usize, tol_psd: Option<T>) -> Result<KernelSchur<T>> {
    if symbol.e_dim() != 1 {
        return Err(Error::Dimension(format!(
            "kernel to Schur map needs a scalar symbol, got e_dim = {}",
            symbol.e_dim()
        )));
    }
    let (values, _) = linalg::hermitian_eigen(&build_kn(symbol, degree));
    let min_eig = values.first().copied().unwrap_or_else(T::zero);
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = tol_psd.unwrap_or_else(|| crate::scalar::lit::<T>(1e-10) * scale);
    let x = symbol_series(symbol, degree)?;
    let y = x.sub(&NcSeries::identity(symbol.letters(), 1, degree))?;
    let z = y.multiply(&x.invert(degree, None)?, Some(degree))?;
    Ok(KernelSchur {
        z,
        min_eigenvalue: min_eig,
        positive: min_eig >= -tol,
    })
}

/// Inverse of [`kernel_to_schur`]: `s_σ = y_σ` where `y = (1 - z)⁻¹ z`.
pub fn schur_to_kernel<T: Real>(z: &NcSeries<T>, degree: usize) -> Result<MultiToeplitzSymbol<T>> {
    if z.in_dim() != 1 || z.out_dim() != 1 {
        return Err(Error::Dimension("Schur to kernel map needs a scalar series".into()));
    }
    let z0 = z.constant_term()[(0, 0)];
    if z0 != re(T::zero()) {
        return Err(Error::Invalid("series must vanish at the empty word".into()));
    }
    let z = z.truncate(degree);
    let one = NcSeries::identity(z.letters(), 1, degree);
    let y = one.sub(&z)?.invert(degree, None)?.multiply(&z, Some(degree))?;
    MultiToeplitzSymbol::from_entries(
        z.letters(),
        1,
        y.iter()
            .filter(|(w, _)| !w.is_empty())
            .map(|(w, v)| (w.clone(), v.clone())),
    )
}
