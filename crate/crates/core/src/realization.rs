//! Time-variant systems whose transfer maps are contractive series.
//!
//! A system is a coisometric colligation
//!
//! ```text
//!     M = [ A0  B0 ] : F ⊕ E2 → F'^{⊕N} ⊕ E1
//!         [ C0  D0 ]
//! ```
//!
//! where the next-state space `F'` sits inside `F` as its leading
//! coordinates. Copy `l` of `F'^{⊕N}` is the state reached after reading the
//! letter `l`. The transfer coefficient at `l_1 l_2 … l_j` is
//! `(C0 A_{l_j} ··· A_{l_2} B_{l_1})*` and the constant one is `D0*`.

use crate::error::{Error, Result};
use crate::linalg::{self, zeros};
use crate::scalar::{tol, CMatrix, Real};
use crate::schur::{defect, defect_adjoint};
use crate::series::NcSeries;
use crate::word::{self, Word};

const CONTRACTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemBsn<T: Real> {
    pub letters: usize,
    pub e1: usize,
    pub e2: usize,
    /// Dimension of the state space `F`.
    pub f_dim: usize,
    /// Dimension of the next-state space `F'`, `≤ f_dim`.
    pub f_next_dim: usize,
    /// `N f' × f`, copy `l` in rows `l f' .. (l+1) f'`.
    pub a0: CMatrix<T>,
    /// `N f' × e2`.
    pub b0: CMatrix<T>,
    /// `e1 × f`.
    pub c0: CMatrix<T>,
    /// `e1 × e2`.
    pub d0: CMatrix<T>,
}

impl<T: Real> SystemBsn<T> {
    pub fn new(
        letters: usize,
        a0: CMatrix<T>,
        b0: CMatrix<T>,
        c0: CMatrix<T>,
        d0: CMatrix<T>,
    ) -> Result<Self> {
        let (e1, e2) = d0.shape();
        let f_dim = c0.ncols();
        if letters == 0 || !a0.nrows().is_multiple_of(letters) {
            return Err(Error::Dimension(format!(
                "A0 has {} rows, not a multiple of N = {letters}",
                a0.nrows()
            )));
        }
        let f_next_dim = a0.nrows() / letters;
        let ok = c0.nrows() == e1
            && a0.ncols() == f_dim
            && b0.shape() == (a0.nrows(), e2)
            && f_next_dim <= f_dim;
        if !ok {
            return Err(Error::Dimension(format!(
                "inconsistent system blocks: A0 {:?}, B0 {:?}, C0 {:?}, D0 {:?}",
                a0.shape(),
                b0.shape(),
                c0.shape(),
                d0.shape()
            )));
        }
        Ok(SystemBsn {
            letters,
            e1,
            e2,
            f_dim,
            f_next_dim,
            a0,
            b0,
            c0,
            d0,
        })
    }

    /// The colligation `[[A0, B0], [C0, D0]]`.
    pub fn colligation(&self) -> CMatrix<T> {
        let top = linalg::hcat(self.a0.nrows(), &[self.a0.clone(), self.b0.clone()]);
        let bottom = linalg::hcat(self.e1, &[self.c0.clone(), self.d0.clone()]);
        linalg::vcat(self.f_dim + self.e2, &[top, bottom])
    }

    /// `A_l : F → F`, copy `l` of `A0` padded with zero rows.
    pub fn state_map(&self, l: usize) -> CMatrix<T> {
        let fp = self.f_next_dim;
        let mut out = zeros(self.f_dim, self.f_dim);
        out.view_mut((0, 0), (fp, self.f_dim))
            .copy_from(&self.a0.rows((l - 1) * fp, fp));
        out
    }

    /// `B_l : E2 → F`, copy `l` of `B0` padded with zero rows.
    pub fn input_map(&self, l: usize) -> CMatrix<T> {
        let fp = self.f_next_dim;
        let mut out = zeros(self.f_dim, self.e2);
        out.view_mut((0, 0), (fp, self.e2))
            .copy_from(&self.b0.rows((l - 1) * fp, fp));
        out
    }

    /// Same system with `A0` multiplied by `s`.
    pub fn with_scaled_state(&self, s: T) -> Self {
        let mut out = self.clone();
        out.a0 *= crate::scalar::re(s);
        out
    }
}

/// Builds the colligation of a contractive row sequence `Γ_0, …, Γ_d`.
///
/// The isometry `V` has column blocks `0..=d` (sources of the rows) and row
/// blocks `0..=d+1` (`E2`, then the sources again one level down):
///
/// * row 0, column `j`: `D_{Γ_0*} ··· D_{Γ_{j-1}*} Γ_j`
/// * row `i`, column `i-1`: `D_{Γ_{i-1}}`
/// * row `i`, column `j ≥ i`: `-Γ_{i-1}* D_{Γ_i*} ··· D_{Γ_{j-1}*} Γ_j`
///
/// and `M = V*` after regrouping the state columns by first letter.
pub fn realize_from_rows<T: Real>(letters: usize, rows: &[CMatrix<T>]) -> Result<SystemBsn<T>> {
    let Some(first) = rows.first() else {
        return Err(Error::Invalid("at least one row is required".into()));
    };
    let (e2, e1) = first.shape();
    let d = rows.len() - 1;
    let tol = tol::<T>(CONTRACTION_TOL);
    let widths: Vec<usize> = (0..=d).map(|k| word::level_size(letters, k) * e1).collect();
    for (k, row) in rows.iter().enumerate() {
        if row.shape() != (e2, widths[k]) {
            return Err(Error::Dimension(format!(
                "row {k} is {}x{}, expected {}x{}",
                row.nrows(),
                row.ncols(),
                e2,
                widths[k]
            )));
        }
    }
    let d_star: Vec<CMatrix<T>> = rows.iter().map(|g| defect_adjoint(g, tol)).collect::<Result<_>>()?;
    let d_src: Vec<CMatrix<T>> = rows.iter().map(|g| defect(g, tol)).collect::<Result<_>>()?;

    let f: usize = widths.iter().sum();
    let col_off: Vec<usize> = (0..=d).map(|k| widths[..k].iter().sum()).collect();
    let row_off: Vec<usize> = (0..=d + 1).map(|i| if i == 0 { 0 } else { e2 + col_off[i - 1] }).collect();
    let mut v = zeros::<T>(e2 + f, f);

    // row 0
    let mut prefix = linalg::identity::<T>(e2);
    for j in 0..=d {
        let entry = &prefix * &rows[j];
        v.view_mut((0, col_off[j]), entry.shape()).copy_from(&entry);
        prefix *= &d_star[j];
    }
    // rows 1..=d+1
    for i in 1..=d + 1 {
        let diag = &d_src[i - 1];
        v.view_mut((row_off[i], col_off[i - 1]), diag.shape()).copy_from(diag);
        let mut path = -rows[i - 1].adjoint();
        for j in i..=d {
            let entry = &path * &rows[j];
            v.view_mut((row_off[i], col_off[j]), entry.shape()).copy_from(&entry);
            path *= &d_star[j];
        }
    }

    // state columns: block-major by level, then regrouped by first letter
    let f_next: usize = widths[..d].iter().sum();
    let mut perm = Vec::with_capacity(f);
    perm.extend(0..e1);
    for l in 0..letters {
        for k in 1..=d {
            let sub = widths[k - 1];
            let start = col_off[k] + l * sub;
            perm.extend(start..start + sub);
        }
    }
    let v_perm = linalg::select_columns(&v, &perm);
    let m = v_perm.adjoint();
    // M rows: E1 (first e1), then F'^{⊕N}; M columns: E2, then F
    let d0 = linalg::block(&m, 0, 0, e1, e2);
    let c0 = linalg::block(&m, 0, e2, e1, f);
    let b0 = linalg::block(&m, e1, 0, letters * f_next, e2);
    let a0 = linalg::block(&m, e1, e2, letters * f_next, f);
    SystemBsn::new(letters, a0, b0, c0, d0)
}

/// Transfer series up to `degree`, by accumulating `A_{l_j} ··· B_{l_1}`
/// word by word.
pub fn transfer_coefficients<T: Real>(sys: &SystemBsn<T>, degree: usize) -> Result<NcSeries<T>> {
    let n = sys.letters;
    let mut out = NcSeries::zero(n, sys.e2, sys.e1, degree);
    out.set(Word::empty(), sys.d0.adjoint())?;
    if degree == 0 {
        return Ok(out);
    }
    let states: Vec<CMatrix<T>> = (1..=n).map(|l| sys.state_map(l)).collect();
    let mut level: Vec<CMatrix<T>> = (1..=n).map(|l| sys.input_map(l)).collect();
    for len in 1..=degree {
        for (idx, p) in level.iter().enumerate() {
            let w = Word::from_index(idx, len, n);
            out.set(w, (&sys.c0 * p).adjoint())?;
        }
        if len == degree {
            break;
        }
        // words are lexicographic, so the extension by l of word idx sits at idx·N + l
        let mut next = Vec::with_capacity(level.len() * n);
        for p in &level {
            for a in &states {
                next.push(a * p);
            }
        }
        level = next;
    }
    Ok(out)
}

/// `D0* + (Σ_j B_j* e_j)(I - Σ_j A_j* e_j)⁻¹ C0*` in truncated series
/// arithmetic; requires `‖A0‖ < 1`.
pub fn realization_series<T: Real>(sys: &SystemBsn<T>, degree: usize) -> Result<NcSeries<T>> {
    let norm = linalg::operator_norm(&sys.a0);
    if norm >= T::one() - tol::<T>(CONTRACTION_TOL) {
        return Err(Error::ResolventDivergent {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = sys.letters;
    let f = sys.f_dim;
    let mut pencil = NcSeries::identity(n, f, degree.max(1));
    let mut inputs = NcSeries::zero(n, sys.e2, f, degree.max(1));
    for l in 1..=n {
        let letter = Word::letter(l);
        pencil.set(letter.clone(), -sys.state_map(l).adjoint())?;
        inputs.set(letter, sys.input_map(l).adjoint())?;
    }
    let resolvent = pencil.invert(degree, None)?;
    let tail = inputs
        .multiply(&resolvent, Some(degree))?
        .right_mul(&sys.c0.adjoint())?;
    let constant = NcSeries::constant(n, sys.d0.adjoint(), degree);
    constant.add(&tail.truncate(degree))
}

/// `‖M M* - I‖_F` for the colligation `M`.
pub fn verify_coisometry<T: Real>(sys: &SystemBsn<T>) -> T {
    let m = sys.colligation();
    linalg::frobenius(&(&m * m.adjoint() - linalg::identity::<T>(m.nrows())))
}
