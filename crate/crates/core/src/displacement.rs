//! Displacement structure with respect to the creation operators:
//! residuals `A - Σ_k C_k A C_k*`, generators for Schur-class series and
//! multi-Toeplitz kernels, the explicit inverse of the displacement map and
//! the factorization of its solutions.

use crate::error::{Error, Result};
use crate::linalg::{self, zeros};
use crate::scalar::{lit, re, CMatrix, Real};
use crate::series::{fock_dim, NcSeries};
use crate::toeplitz::MultiToeplitzSymbol;
use crate::word::{self, level_offset, level_size};

/// Generator `G` with signature `J = diag(I_p, -I_q)`: positive columns
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorPair<T: Real> {
    pub g: CMatrix<T>,
    pub p: usize,
    pub q: usize,
}

impl<T: Real> GeneratorPair<T> {
    pub fn new(g: CMatrix<T>, p: usize, q: usize) -> Result<Self> {
        if g.ncols() != p + q {
            return Err(Error::Dimension(format!(
                "generator has {} columns, signature needs {}",
                g.ncols(),
                p + q
            )));
        }
        Ok(GeneratorPair { g, p, q })
    }

    pub fn signature(&self) -> CMatrix<T> {
        let mut j = linalg::identity(self.p + self.q);
        for i in self.p..self.p + self.q {
            j[(i, i)] = -j[(i, i)];
        }
        j
    }

    /// `G J G* = G_+ G_+* - G_- G_-*`.
    pub fn gjg(&self) -> CMatrix<T> {
        let pos = self.g.columns(0, self.p);
        let neg = self.g.columns(self.p, self.q);
        pos * pos.adjoint() - neg * neg.adjoint()
    }

    pub fn rows(&self) -> usize {
        self.g.nrows()
    }
}

/// `Σ_k C_k A C_k*` for `A` on `⊕_{l ≤ levels} H_l ⊗ C^dim`.
///
/// `C_k` moves the level-`i` block of `τ` to the block of `kτ`, so the
/// congruence copies every level-pair block of `A` (below the top level)
/// into `N` diagonal positions one level down.
pub fn creation_congruence<T: Real>(a: &CMatrix<T>, letters: usize, levels: usize, dim: usize) -> Result<CMatrix<T>> {
    let size = fock_dim(letters, levels, dim);
    if a.shape() != (size, size) {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, Fock space with N={letters}, {levels} levels, multiplicity {dim} has dimension {size}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut out = zeros(size, size);
    for i in 0..levels {
        let (ri, hi) = (level_offset(letters, i) * dim, level_size(letters, i) * dim);
        for j in 0..levels {
            let (cj, wj) = (level_offset(letters, j) * dim, level_size(letters, j) * dim);
            let src = a.view((ri, cj), (hi, wj));
            for k in 0..letters {
                let r = (level_offset(letters, i + 1) + k * level_size(letters, i)) * dim;
                let c = (level_offset(letters, j + 1) + k * level_size(letters, j)) * dim;
                let mut dst = out.view_mut((r, c), (hi, wj));
                dst += src;
            }
        }
    }
    Ok(out)
}

/// `A - Σ_k C_{k,n} A C_{k,n}*` at scalar multiplicity.
pub fn displacement_residual<T: Real>(a: &CMatrix<T>, letters: usize, levels: usize) -> Result<CMatrix<T>> {
    displacement_residual_with_dim(a, letters, levels, 1)
}

pub fn displacement_residual_with_dim<T: Real>(
    a: &CMatrix<T>,
    letters: usize,
    levels: usize,
    dim: usize,
) -> Result<CMatrix<T>> {
    Ok(a - creation_congruence(a, letters, levels, dim)?)
}

/// Frobenius norm of `a - b` restricted to rows and columns below the top
/// level.
pub fn interior_mismatch<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, letters: usize, levels: usize, dim: usize) -> T {
    let inner = fock_dim(letters, levels.saturating_sub(1), dim);
    let inner = if levels == 0 { 0 } else { inner };
    linalg::frobenius(&(a.view((0, 0), (inner, inner)) - b.view((0, 0), (inner, inner))))
}

/// Generator of `I - Φ_n(T)*Φ_n(T)`: `G = [E_∅, Φ_n(T)* E'_∅]` where `E_∅`
/// embeds the input space at the root and `E'_∅` the output space.
pub fn generator_from_schur<T: Real>(t: &NcSeries<T>, levels: usize) -> GeneratorPair<T> {
    let (e1, e2) = (t.in_dim(), t.out_dim());
    let phi = t.phi_embed(levels).into_matrix();
    let rows = phi.ncols();
    let mut g = zeros(rows, e1 + e2);
    for e in 0..e1 {
        g[(e, e)] = re(T::one());
    }
    let first_rows = phi.rows(0, e2).adjoint();
    g.view_mut((0, e1), (rows, e2)).copy_from(&first_rows);
    GeneratorPair { g, p: e1, q: e2 }
}

/// Generator of the kernel matrix `K_n`: `G = [E_∅ + V, V]` where `V`
/// carries `s_σ` in the block of every nonempty `σ`.
pub fn generator_from_kernel<T: Real>(symbol: &MultiToeplitzSymbol<T>, levels: usize) -> GeneratorPair<T> {
    let (n, e) = (symbol.letters(), symbol.e_dim());
    let rows = fock_dim(n, levels, e);
    let mut v = zeros(rows, e);
    for (w, s) in symbol.iter().filter(|(w, _)| !w.is_empty() && w.len() <= levels) {
        let at = w.global_index(n) * e;
        v.view_mut((at, 0), (e, e)).copy_from(s);
    }
    let mut pos = v.clone();
    let mut top = pos.view_mut((0, 0), (e, e));
    top += linalg::identity::<T>(e);
    GeneratorPair {
        g: linalg::hcat(rows, &[pos, v]),
        p: e,
        q: e,
    }
}

/// Unique solution of `A - Σ_k C_k A C_k* = G J G*` at truncation `levels`,
/// i.e. `Σ_{|σ| ≤ n} C_σ GJG* C_σ*`, accumulated by Horner's rule.
pub fn solve_displacement<T: Real>(gen: &GeneratorPair<T>, letters: usize, levels: usize) -> Result<CMatrix<T>> {
    solve_displacement_with_dim(gen, letters, levels, 1)
}

pub fn solve_displacement_with_dim<T: Real>(
    gen: &GeneratorPair<T>,
    letters: usize,
    levels: usize,
    dim: usize,
) -> Result<CMatrix<T>> {
    let size = fock_dim(letters, levels, dim);
    if gen.rows() != size {
        return Err(Error::Dimension(format!(
            "generator has {} rows, Fock dimension is {size}",
            gen.rows()
        )));
    }
    let x = gen.gjg();
    let mut a = x.clone();
    for _ in 0..levels {
        a = &x + creation_congruence(&a, letters, levels, dim)?;
    }
    Ok(a)
}

/// Output of [`factor_solution`].
#[derive(Debug, Clone)]
pub struct SolutionFactors<T: Real> {
    pub x: NcSeries<T>,
    pub y: NcSeries<T>,
    /// `y · x⁻¹`, present when the solution is positive semidefinite.
    pub z: Option<NcSeries<T>>,
    /// Smallest eigenvalue of the solution.
    pub min_eigenvalue: T,
}

/// Reads `x` and `y` from the two generator columns (conjugated, so that
/// the columns are `Φ(x)* e_∅` and `Φ(y)* e_∅`) and, when the solution is
/// positive semidefinite, returns `z = y · x⁻¹`.
///
/// `tol_psd` defaults to `1e-10` times the largest eigenvalue magnitude.
pub fn factor_solution<T: Real>(
    gen: &GeneratorPair<T>,
    letters: usize,
    levels: usize,
    tol_psd: Option<T>,
) -> Result<SolutionFactors<T>> {
    if gen.p != 1 || gen.q != 1 {
        return Err(Error::Dimension(format!(
            "factorization needs a two-column generator, got p={}, q={}",
            gen.p, gen.q
        )));
    }
    let a = solve_displacement(gen, letters, levels)?;
    let mut x = NcSeries::zero(letters, 1, 1, levels);
    let mut y = NcSeries::zero(letters, 1, 1, levels);
    for (slot, w) in word::enumerate_words(letters, levels).into_iter().enumerate() {
        let (gx, gy) = (gen.g[(slot, 0)].conj(), gen.g[(slot, 1)].conj());
        if gx.re != T::zero() || gx.im != T::zero() {
            x.set(w.clone(), linalg::scalar(gx))?;
        }
        if gy.re != T::zero() || gy.im != T::zero() {
            y.set(w, linalg::scalar(gy))?;
        }
    }
    let (values, _) = linalg::hermitian_eigen(&a);
    let min_eig = values.first().copied().unwrap_or_else(T::zero);
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = tol_psd.unwrap_or_else(|| lit::<T>(1e-10) * scale);
    if min_eig < -tol {
        return Ok(SolutionFactors {
            x,
            y,
            z: None,
            min_eigenvalue: min_eig,
        });
    }
    let inv = x.invert(levels, None).map_err(|e| match e {
        Error::SingularConstant { .. } => Error::DegenerateFactor,
        other => other,
    })?;
    let z = y.multiply(&inv, Some(levels))?;
    Ok(SolutionFactors {
        x,
        y,
        z: Some(z),
        min_eigenvalue: min_eig,
    })
}

/// Column `Φ_n(s)* E_∅` of a generator built from a series.
pub fn root_column<T: Real>(s: &NcSeries<T>, levels: usize) -> CMatrix<T> {
    let phi = s.phi_embed(levels).into_matrix();
    phi.rows(0, s.out_dim()).adjoint()
}

/// Generator `[Φ(x)* e_∅, Φ(y)* e_∅]` for scalar series `x`, `y`.
pub fn generator_from_pair<T: Real>(x: &NcSeries<T>, y: &NcSeries<T>, levels: usize) -> Result<GeneratorPair<T>> {
    if x.out_dim() != 1 || y.out_dim() != 1 || x.in_dim() != 1 || y.in_dim() != 1 {
        return Err(Error::Dimension("generator pair needs scalar series".into()));
    }
    let (cx, cy) = (root_column(x, levels), root_column(y, levels));
    GeneratorPair::new(linalg::hcat(cx.nrows(), &[cx, cy]), 1, 1)
}
