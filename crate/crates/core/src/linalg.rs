//! Dense complex helpers on top of `nalgebra`: norms, Hermitian spectra,
//! square roots, pseudo-inverses and orthonormal bases.

use nalgebra::{ComplexField, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{lit, re, CMatrix, Real, C};

/// Relative singular-value cutoff shared by pseudo-inverses and rank decisions.
pub const RANK_CUTOFF: f64 = 1e-10;

pub fn zeros<T: Real>(rows: usize, cols: usize) -> CMatrix<T> {
    CMatrix::zeros(rows, cols)
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

pub fn scalar<T: Real>(x: C<T>) -> CMatrix<T> {
    CMatrix::from_element(1, 1, x)
}

pub fn from_real<T: Real>(rows: usize, cols: usize, data: &[f64]) -> CMatrix<T> {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| re(lit::<T>(x))))
}

/// Largest singular value; zero for empty matrices.
pub fn operator_norm<T: Real>(a: &CMatrix<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    a.clone().singular_values().max()
}

pub fn frobenius<T: Real>(a: &CMatrix<T>) -> T {
    a.norm()
}

pub fn max_abs<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(z.modulus()))
}

/// Frobenius norm of `a - a*`.
pub fn hermitian_deviation<T: Real>(a: &CMatrix<T>) -> T {
    (a - a.adjoint()).norm()
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
///
/// The input is symmetrized first, so only the Hermitian part is used.
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let sym = (a + a.adjoint()).scale(lit(0.5));
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue<T: Real>(a: &CMatrix<T>) -> T {
    hermitian_eigen(a).0.first().copied().unwrap_or_else(T::zero)
}

/// Checks Hermitian symmetry to `1e-12` (relative to the Frobenius norm,
/// absolute for small matrices) and returns the minimum eigenvalue.
pub fn checked_min_eigenvalue<T: Real>(a: &CMatrix<T>) -> Result<T> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    let dev = hermitian_deviation(a);
    let scale = a.norm().max(T::one());
    if dev > lit::<T>(1e-12) * scale {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(min_eigenvalue(a))
}

/// Positive semidefinite square root of a Hermitian matrix. Eigenvalues
/// above `-tol` are clipped at zero; anything more negative is an error.
pub fn psd_sqrt<T: Real>(a: &CMatrix<T>, tol: T) -> Result<CMatrix<T>> {
    let (values, vectors) = hermitian_eigen(a);
    if let Some(&m) = values.first() {
        if m < -tol {
            return Err(Error::NotPositive {
                min_eigenvalue: m.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(spectral_apply(&values, &vectors, |x| x.max(T::zero()).sqrt()))
}

fn spectral_apply<T: Real>(values: &[T], vectors: &CMatrix<T>, f: impl Fn(T) -> T) -> CMatrix<T> {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let s = re(f(v));
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * vectors.adjoint()
}

/// Moore-Penrose pseudo-inverse with singular values below
/// `cutoff · σ_max` treated as zero.
pub fn pinv<T: Real>(a: &CMatrix<T>, cutoff: T) -> CMatrix<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return zeros(n, m);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    let thr = cutoff * smax;
    let mut out = zeros(n, m);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > thr && s > T::zero() {
            let inv = re(T::one() / s);
            out += vt.row(k).adjoint() * u.column(k).adjoint() * inv;
        }
    }
    out
}

/// Orthonormal basis (as columns) of the range of a positive semidefinite
/// matrix: eigenvectors whose eigenvalue exceeds `tol`, ordered by
/// decreasing eigenvalue.
pub fn psd_range_basis<T: Real>(a: &CMatrix<T>, tol: T) -> CMatrix<T> {
    let (values, vectors) = hermitian_eigen(a);
    let keep: Vec<usize> = (0..values.len()).rev().filter(|&i| values[i] > tol).collect();
    select_columns(&vectors, &keep)
}

/// Orthonormal bases of the column space of `a` and of its orthogonal
/// complement, in that order.
pub fn column_space_split<T: Real>(a: &CMatrix<T>, cutoff: T) -> (CMatrix<T>, CMatrix<T>) {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return (zeros(m, 0), identity(m));
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.unwrap();
    let thr = cutoff * svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > thr && svd.singular_values[k] > T::zero())
        .collect();
    let range = select_columns(&u, &keep);
    // the complement spans the unit eigenspace of I - PP*
    let projector = identity::<T>(m) - &range * range.adjoint();
    let (values, vectors) = hermitian_eigen(&projector);
    let half = T::one() / (T::one() + T::one());
    let complement: Vec<usize> = (0..m).filter(|&i| values[i] > half).collect();
    (range, select_columns(&vectors, &complement))
}

pub fn select_columns<T: Real>(a: &CMatrix<T>, cols: &[usize]) -> CMatrix<T> {
    let mut out = zeros(a.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.set_column(dst, &a.column(src));
    }
    out
}

/// `I_copies ⊗ m`.
pub fn kron_identity<T: Real>(copies: usize, m: &CMatrix<T>) -> CMatrix<T> {
    let (r, c) = m.shape();
    let mut out = zeros(copies * r, copies * c);
    for k in 0..copies {
        out.view_mut((k * r, k * c), (r, c)).copy_from(m);
    }
    out
}

/// Horizontal concatenation.
pub fn hcat<T: Real>(rows: usize, blocks: &[CMatrix<T>]) -> CMatrix<T> {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hcat row mismatch");
        out.view_mut((0, at), b.shape()).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Vertical concatenation.
pub fn vcat<T: Real>(cols: usize, blocks: &[CMatrix<T>]) -> CMatrix<T> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vcat column mismatch");
        out.view_mut((at, 0), b.shape()).copy_from(b);
        at += b.nrows();
    }
    out
}

pub fn block<T: Real>(a: &CMatrix<T>, r: usize, c: usize, h: usize, w: usize) -> CMatrix<T> {
    a.view((r, c), (h, w)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        let z: CMatrix<f64> = zeros(3, 3);
        assert_eq!(operator_norm(&z), 0.0);
        let a: CMatrix<f64> = from_real(1, 2, &[0.6, 0.8]);
        assert!((operator_norm(&a) - 1.0).abs() < 1e-15);
        assert_eq!(operator_norm::<f64>(&zeros(0, 4)), 0.0);
    }

    #[test]
    fn eigen_sorted_and_sqrt() {
        let a: CMatrix<f64> = from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let (vals, _) = hermitian_eigen(&a);
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!(psd_sqrt(&a, 1e-10).is_err());
        let b: CMatrix<f64> = from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = psd_sqrt(&b, 1e-10).unwrap();
        assert!((&s * &s - &b).norm() < 1e-13);
    }

    #[test]
    fn pinv_of_rank_one() {
        let a: CMatrix<f64> = from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = pinv(&a, 1e-10);
        assert!((&a * &p * &a - &a).norm() < 1e-13);
        assert!((p[(0, 0)].re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn column_space_complement() {
        let a: CMatrix<f64> = from_real(3, 1, &[1.0, 1.0, 0.0]);
        let (r, c) = column_space_split(&a, 1e-10);
        assert_eq!((r.ncols(), c.ncols()), (1, 2));
        assert!((r.adjoint() * &c).norm() < 1e-14);
        assert!((c.adjoint() * &a).norm() < 1e-14);
    }
}
