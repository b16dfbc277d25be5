//! The graded Schur algorithm for contractive series.
//!
//! Analysis peels off the constant coefficient `γ_k` of `T_k` and passes to
//! `T_{k+1}`, whose input space is `N` copies of the previous one; synthesis
//! runs the same map backwards. The constants form the rows `Γ_k`
//! (`e2 × N^k e1` contractions), and each row factors further into one
//! refined parameter per word of length `k`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, zeros};
use crate::scalar::{lit, re, tol, CMatrix, Real};
use crate::series::NcSeries;
use crate::word::{self, Word};

/// Eigenvalue threshold on `I - C*C` below which a defect direction is
/// treated as absent.
pub const DEFECT_CUTOFF: f64 = 1e-10;

const CONTRACTION_TOL: f64 = 1e-8;
const UNITARY_TOL: f64 = 1e-10;
const TAIL_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-9;

/// Spectral data of `I - C*C`, shared by the defect, its pseudo-inverse
/// and the basis of its range.
struct DefectSpectrum<T: Real> {
    values: Vec<T>,
    vectors: CMatrix<T>,
}

impl<T: Real> DefectSpectrum<T> {
    fn of(c: &CMatrix<T>) -> Self {
        let gram = linalg::identity::<T>(c.ncols()) - c.adjoint() * c;
        let (values, vectors) = linalg::hermitian_eigen(&gram);
        DefectSpectrum { values, vectors }
    }

    fn of_adjoint(c: &CMatrix<T>) -> Self {
        Self::of(&c.adjoint())
    }

    fn weighted(&self, f: impl Fn(T) -> Option<T>) -> CMatrix<T> {
        let n = self.values.len();
        let mut out = zeros(n, n);
        for (j, &v) in self.values.iter().enumerate() {
            if let Some(s) = f(v) {
                let col = self.vectors.column(j);
                out += col * col.adjoint() * re(s);
            }
        }
        out
    }

    fn sqrt(&self) -> CMatrix<T> {
        self.weighted(|v| Some(v.max(T::zero()).sqrt()))
    }

    fn pinv(&self) -> CMatrix<T> {
        let thr = tol::<T>(DEFECT_CUTOFF);
        self.weighted(|v| (v > thr).then(|| T::one() / v.sqrt()))
    }

    fn range_basis(&self) -> CMatrix<T> {
        let thr = tol::<T>(DEFECT_CUTOFF);
        let keep: Vec<usize> = (0..self.values.len()).rev().filter(|&i| self.values[i] > thr).collect();
        linalg::select_columns(&self.vectors, &keep)
    }

    fn rank(&self) -> usize {
        let thr = tol::<T>(DEFECT_CUTOFF);
        self.values.iter().filter(|&&v| v > thr).count()
    }
}

/// `D_C = (I - C*C)^{1/2}`. Fails when `‖C‖ > 1 + tol`.
pub fn defect<T: Real>(c: &CMatrix<T>, tol: T) -> Result<CMatrix<T>> {
    let norm = linalg::operator_norm(c);
    if norm > T::one() + tol {
        return Err(Error::NotContraction {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(DefectSpectrum::of(c).sqrt())
}

/// `D_{C*} = (I - CC*)^{1/2}`.
pub fn defect_adjoint<T: Real>(c: &CMatrix<T>, tol: T) -> Result<CMatrix<T>> {
    defect(&c.adjoint(), tol)
}

/// Dimension of the range of `D_C`.
pub fn defect_rank<T: Real>(c: &CMatrix<T>) -> usize {
    DefectSpectrum::of(c).rank()
}

/// Factors a row contraction `[a_1, …, a_m]` in ambient coordinates as
/// `a_j = D_{γ_1*}···D_{γ_{j-1}*} γ_j`.
pub fn factor_row_contraction<T: Real>(blocks: &[CMatrix<T>]) -> Result<Vec<CMatrix<T>>> {
    let Some(first) = blocks.first() else {
        return Ok(Vec::new());
    };
    let h = first.nrows();
    let mut chain = linalg::identity::<T>(h);
    let mut out = Vec::with_capacity(blocks.len());
    for (j, a) in blocks.iter().enumerate() {
        if a.nrows() != h {
            return Err(Error::Dimension(format!("block {j} has {} rows, expected {h}", a.nrows())));
        }
        let gamma = linalg::pinv(&chain, lit(linalg::RANK_CUTOFF)) * a;
        let residual = linalg::frobenius(&(&chain * &gamma - a));
        let norm = linalg::operator_norm(&gamma);
        if residual > tol::<T>(RESIDUAL_TOL) || norm > T::one() + tol::<T>(RESIDUAL_TOL) {
            return Err(Error::RowFactorization {
                block: j,
                residual: residual.max(norm - T::one()).to_f64().unwrap_or(f64::NAN),
            });
        }
        chain *= DefectSpectrum::of_adjoint(&gamma).sqrt();
        out.push(gamma);
    }
    Ok(out)
}

/// Row factorization in minimal coordinates: every parameter maps into the
/// range of the previous adjoint defect, written in an orthonormal basis of
/// that range.
#[derive(Debug, Clone)]
pub struct MinimalFactorization<T: Real> {
    pub params: Vec<CMatrix<T>>,
    /// Partial isometry from the source of the row onto `⊕_j D_{γ_j}`.
    pub source_map: CMatrix<T>,
    /// Partial isometry from the target of the row onto `D_{γ_m*}`.
    pub target_map: CMatrix<T>,
}

/// `Q_j`: basis of the range of `D_{γ_j*}`, and `D_{γ_j*} Q_j`.
fn chain_link<T: Real>(gamma: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    let spec = DefectSpectrum::of_adjoint(gamma);
    let q = spec.range_basis();
    let dq = spec.sqrt() * &q;
    (q, dq)
}

pub fn factor_row_minimal<T: Real>(blocks: &[CMatrix<T>]) -> Result<MinimalFactorization<T>> {
    let Some(first) = blocks.first() else {
        return Err(Error::Dimension("empty row".into()));
    };
    let h = first.nrows();
    let widths: Vec<usize> = blocks.iter().map(|b| b.ncols()).collect();
    let total: usize = widths.iter().sum();
    let row = linalg::hcat(h, blocks);

    let mut chain = linalg::identity::<T>(h);
    let mut params = Vec::with_capacity(blocks.len());
    let mut links = Vec::with_capacity(blocks.len());
    for (j, a) in blocks.iter().enumerate() {
        let gamma = linalg::pinv(&chain, lit(linalg::RANK_CUTOFF)) * a;
        let residual = linalg::frobenius(&(&chain * &gamma - a));
        let norm = linalg::operator_norm(&gamma);
        if residual > tol::<T>(RESIDUAL_TOL) || norm > T::one() + tol::<T>(CONTRACTION_TOL) {
            return Err(Error::RowFactorization {
                block: j,
                residual: residual.max(norm - T::one()).to_f64().unwrap_or(f64::NAN),
            });
        }
        let (q, dq) = chain_link(&gamma);
        chain *= &dq;
        links.push((q, dq));
        params.push(gamma);
    }

    // D_L^2 = F*F with F upper triangular: F_jj = D_{γ_j},
    // F_ij = -γ_i* Q_i (D_{γ_{i+1}*} Q_{i+1}) ··· (D_{γ_{j-1}*} Q_{j-1}) γ_j.
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut at = 0;
    for &w in &widths {
        offsets.push(at);
        at += w;
    }
    let source_specs: Vec<DefectSpectrum<T>> = params.iter().map(DefectSpectrum::of).collect();
    let bases: Vec<CMatrix<T>> = source_specs.iter().map(DefectSpectrum::range_basis).collect();
    let min_dims: Vec<usize> = bases.iter().map(|b| b.ncols()).collect();
    let min_total: usize = min_dims.iter().sum();
    let mut f_min = zeros(min_total, total);
    let mut row_at = 0;
    for i in 0..params.len() {
        let qi = bases[i].adjoint();
        let diag = &qi * source_specs[i].sqrt();
        f_min.view_mut((row_at, offsets[i]), diag.shape()).copy_from(&diag);
        let head = -params[i].adjoint();
        let mut path = links[i].0.clone();
        for j in (i + 1)..params.len() {
            let entry = &qi * &head * &path * &params[j];
            f_min.view_mut((row_at, offsets[j]), entry.shape()).copy_from(&entry);
            path *= &links[j].1;
        }
        row_at += min_dims[i];
    }
    let source_map = f_min * DefectSpectrum::of(&row).pinv();
    let target_map = chain.adjoint() * DefectSpectrum::of_adjoint(&row).pinv();
    Ok(MinimalFactorization {
        params,
        source_map,
        target_map,
    })
}

/// Re-assembles `[γ_1, D_{γ_1*}Q_1 γ_2, …]` from minimal-coordinate
/// parameters.
pub fn assemble_row_minimal<T: Real>(params: &[CMatrix<T>]) -> CMatrix<T> {
    let Some(first) = params.first() else {
        return zeros(0, 0);
    };
    let h = first.nrows();
    let mut chain = linalg::identity::<T>(h);
    let mut blocks = Vec::with_capacity(params.len());
    for gamma in params {
        blocks.push(&chain * gamma);
        chain *= chain_link(gamma).1;
    }
    linalg::hcat(h, &blocks)
}

/// `R ↦ T` with `T_σ = [R_{σ1}, …, R_{σN}]`; drops the constant term of
/// `R` and lowers the degree by one.
pub fn deshift<T: Real>(r: &NcSeries<T>) -> NcSeries<T> {
    let n = r.letters();
    let degree = r.max_degree().saturating_sub(1);
    let mut out = NcSeries::zero(n, r.out_dim(), n * r.in_dim(), degree);
    if r.max_degree() == 0 {
        return out;
    }
    let mut seen: Vec<Word> = r
        .iter()
        .filter(|(w, _)| !w.is_empty())
        .map(|(w, _)| Word::from_letters(&w.letters()[..w.len() - 1]))
        .collect();
    seen.dedup();
    for sigma in seen {
        let blocks: Vec<CMatrix<T>> = (1..=n).map(|k| r.coeff(&sigma.push(k))).collect();
        out.set(sigma, linalg::hcat(r.out_dim(), &blocks))
            .expect("deshifted coefficient is well formed");
    }
    out
}

/// Inverse of [`deshift`]: `R_{σk}` is block `k` of `X_σ` and `R_∅ = 0`.
pub fn shift<T: Real>(x: &NcSeries<T>) -> Result<NcSeries<T>> {
    let n = x.letters();
    if !x.in_dim().is_multiple_of(n) {
        return Err(Error::Dimension(format!(
            "input dimension {} is not a multiple of {n}",
            x.in_dim()
        )));
    }
    let w = x.in_dim() / n;
    let mut out = NcSeries::zero(n, x.out_dim(), w, x.max_degree() + 1);
    for (sigma, c) in x.iter() {
        for k in 1..=n {
            out.set(sigma.push(k), linalg::block(c, 0, (k - 1) * w, x.out_dim(), w))?;
        }
    }
    Ok(out)
}

/// One step of the algorithm without the contraction check on `T`.
fn step_unchecked<T: Real>(t: &NcSeries<T>) -> Result<(CMatrix<T>, NcSeries<T>)> {
    let n = t.letters();
    let gamma = t.constant_term();
    let degree = t.max_degree();
    let next_degree = degree.saturating_sub(1);
    let gnorm = linalg::operator_norm(&gamma);
    if gnorm > T::one() + tol::<T>(CONTRACTION_TOL) {
        return Err(Error::NotContraction {
            norm: gnorm.to_f64().unwrap_or(f64::NAN),
        });
    }
    let zero_next = || NcSeries::zero(n, t.out_dim(), n * t.in_dim(), next_degree);
    let spec = DefectSpectrum::of(&gamma);
    let spec_star = DefectSpectrum::of_adjoint(&gamma);
    // T - γ = D_{γ*} X D_γ, so a vanishing defect forces a vanishing tail
    let unitary_tol = tol::<T>(UNITARY_TOL);
    let saturated = spec.values.last().is_none_or(|&v| v <= unitary_tol)
        || spec_star.values.last().is_none_or(|&v| v <= unitary_tol);
    if saturated {
        let tail = t
            .iter()
            .filter(|(w, _)| !w.is_empty())
            .map(|(_, c)| linalg::max_abs(c))
            .fold(T::zero(), |m, v| m.max(v));
        if tail > tol::<T>(TAIL_TOL) {
            return Err(Error::UnitaryWithTail {
                max_tail: tail.to_f64().unwrap_or(f64::NAN),
            });
        }
        return Ok((gamma, zero_next()));
    }
    if degree == 0 {
        return Ok((gamma, zero_next()));
    }
    let (dp, dsp) = (spec.pinv(), spec_star.pinv());
    let mut m = NcSeries::zero(n, t.out_dim(), t.in_dim(), degree);
    for (w, c) in t.iter().filter(|(w, _)| !w.is_empty()) {
        m.set(w.clone(), &dsp * c * &dp)?;
    }
    let one = NcSeries::identity(n, t.out_dim(), degree);
    let mg = m.right_mul(&gamma.adjoint())?;
    let r = one.sub(&mg)?.invert(degree, None)?.multiply(&m, Some(degree))?;
    Ok((gamma, deshift(&r)))
}

/// `T ↦ (γ, T_1)` with `γ = T_∅` and
/// `T = γ + D_{γ*} R (I + γ*R)⁻¹ D_γ`, `R = shift(T_1)`.
pub fn schur_step<T: Real>(t: &NcSeries<T>) -> Result<(CMatrix<T>, NcSeries<T>)> {
    let norm = crate::series::operator_norm(&t.phi_embed(t.max_degree()));
    if norm > T::one() + tol::<T>(CONTRACTION_TOL) {
        return Err(Error::NotContraction {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    step_unchecked(t)
}

/// Rows, refined parameters and the basis identifications used to build
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurData<T: Real> {
    pub letters: usize,
    pub e1: usize,
    pub e2: usize,
    /// `rows[k]` is `e2 × N^k e1`.
    pub rows: Vec<CMatrix<T>>,
    /// One parameter per word of length `≤ depth`, in minimal coordinates
    /// (ambient for the empty word).
    pub tree: BTreeMap<Word, CMatrix<T>>,
    /// Per level: map from `N^k e1` onto `⊕_{|w| = k} D_{γ_w}`.
    source_frames: Vec<CMatrix<T>>,
    /// Per level: map from `e2` onto `D_{γ_w*}` for the last word `w` of
    /// the level.
    target_frames: Vec<CMatrix<T>>,
}

impl<T: Real> SchurData<T> {
    /// Validates the rows and builds the refined parameter tree.
    pub fn from_rows(letters: usize, e1: usize, e2: usize, rows: Vec<CMatrix<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("at least one row is required".into()));
        }
        for (k, row) in rows.iter().enumerate() {
            let expected = (e2, word::level_size(letters, k) * e1);
            if row.shape() != expected {
                return Err(Error::Dimension(format!(
                    "row {k} is {}x{}, expected {}x{}",
                    row.nrows(),
                    row.ncols(),
                    expected.0,
                    expected.1
                )));
            }
            let norm = linalg::operator_norm(row);
            if norm > T::one() + tol::<T>(CONTRACTION_TOL) {
                return Err(Error::NotContraction {
                    norm: norm.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let mut data = SchurData {
            letters,
            e1,
            e2,
            rows,
            tree: BTreeMap::new(),
            source_frames: Vec::new(),
            target_frames: Vec::new(),
        };
        data.build_tree()?;
        Ok(data)
    }

    pub fn depth(&self) -> usize {
        self.rows.len() - 1
    }

    fn build_tree(&mut self) -> Result<()> {
        let n = self.letters;
        let g0 = self.rows[0].clone();
        self.source_frames.push(DefectSpectrum::of(&g0).range_basis().adjoint());
        self.target_frames.push(DefectSpectrum::of_adjoint(&g0).range_basis().adjoint());
        self.tree.insert(Word::empty(), g0);
        for k in 1..self.rows.len() {
            let (u_prev, v_prev) = (&self.source_frames[k - 1], &self.target_frames[k - 1]);
            let lifted = linalg::kron_identity(n, u_prev);
            let row = v_prev * &self.rows[k] * lifted.adjoint();
            let words: Vec<Word> = word::words_of_length(n, k).collect();
            let block_widths: Vec<usize> = words
                .iter()
                .map(|w| {
                    let tail = Word::from_letters(&w.letters()[1..]);
                    defect_rank(&self.tree[&tail])
                })
                .collect();
            let mut blocks = Vec::with_capacity(words.len());
            let mut at = 0;
            for &wd in &block_widths {
                blocks.push(linalg::block(&row, 0, at, row.nrows(), wd));
                at += wd;
            }
            let fact = factor_row_minimal(&blocks).map_err(|e| match e {
                Error::RowFactorization { block, residual } => Error::RowFactorization {
                    block: word::level_offset(n, k) + block,
                    residual,
                },
                other => other,
            })?;
            for (w, p) in words.into_iter().zip(fact.params) {
                self.tree.insert(w, p);
            }
            self.source_frames.push(&fact.source_map * &lifted);
            self.target_frames.push(&fact.target_map * v_prev);
        }
        Ok(())
    }

    /// `(rows, cols)` of every refined parameter.
    pub fn dims(&self) -> BTreeMap<Word, (usize, usize)> {
        self.tree.iter().map(|(w, g)| (w.clone(), g.shape())).collect()
    }

    /// Checks `γ_{kσ} : D_{γ_σ} → D_{γ*_{pred(kσ)}}` for every nonempty word.
    pub fn is_compatible(&self) -> bool {
        self.tree.iter().filter(|(w, _)| !w.is_empty()).all(|(w, g)| {
            let tail = Word::from_letters(&w.letters()[1..]);
            let pred = w.global_predecessor(self.letters).expect("nonempty word");
            g.ncols() == defect_rank(&self.tree[&tail]) && g.nrows() == defect_rank(&self.tree[&pred].adjoint())
        })
    }

    /// Row `k` re-assembled from the refined parameters of level `k`.
    pub fn reconstruct_row(&self, k: usize) -> CMatrix<T> {
        if k == 0 {
            return self.tree[&Word::empty()].clone();
        }
        let params: Vec<CMatrix<T>> = word::words_of_length(self.letters, k).map(|w| self.tree[&w].clone()).collect();
        let minimal = assemble_row_minimal(&params);
        let lifted = linalg::kron_identity(self.letters, &self.source_frames[k - 1]);
        self.target_frames[k - 1].adjoint() * minimal * lifted
    }

    /// Largest operator norm among rows and refined parameters.
    pub fn max_norm(&self) -> T {
        self.rows
            .iter()
            .chain(self.tree.values())
            .map(linalg::operator_norm)
            .fold(T::zero(), |m, v| m.max(v))
    }
}

/// Runs `depth` analysis steps and records the constants of `T_0, …,
/// T_depth` together with their refined parameters.
pub fn schur_analyze<T: Real>(t: &NcSeries<T>, depth: usize) -> Result<SchurData<T>> {
    if depth > t.max_degree() {
        return Err(Error::Invalid(format!(
            "depth {depth} exceeds the series degree {}",
            t.max_degree()
        )));
    }
    let norm = crate::series::operator_norm(&t.phi_embed(t.max_degree()));
    if norm > T::one() + tol::<T>(CONTRACTION_TOL) {
        return Err(Error::NotContraction {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut rows = Vec::with_capacity(depth + 1);
    let mut current = t.clone();
    for k in 0..=depth {
        if k == depth {
            rows.push(current.constant_term());
            break;
        }
        let (gamma, next) = step_unchecked(&current)?;
        rows.push(gamma);
        current = next;
    }
    SchurData::from_rows(t.letters(), t.in_dim(), t.out_dim(), rows)
}

/// Runs the recursion `T_k = γ_k + D_{γ_k*} (I + Rγ_k*)⁻¹ R D_{γ_k}`,
/// `R = shift(T_{k+1})`, from `T_{depth+1} = 0` down to `T_0`, truncated at
/// `degree`.
pub fn schur_synthesize<T: Real>(data: &SchurData<T>, degree: usize) -> Result<NcSeries<T>> {
    synthesize_rows(data.letters, &data.rows, degree)
}

/// [`schur_synthesize`] directly on rows.
pub fn synthesize_rows<T: Real>(letters: usize, rows: &[CMatrix<T>], degree: usize) -> Result<NcSeries<T>> {
    let Some(first) = rows.first() else {
        return Err(Error::Invalid("at least one row is required".into()));
    };
    let (e2, e1) = first.shape();
    for (k, row) in rows.iter().enumerate() {
        if row.shape() != (e2, word::level_size(letters, k) * e1) {
            return Err(Error::Dimension(format!(
                "row {k} is {}x{}, expected {}x{}",
                row.nrows(),
                row.ncols(),
                e2,
                word::level_size(letters, k) * e1
            )));
        }
    }
    let top = (rows.len() - 1).min(degree);
    let mut t = NcSeries::constant(letters, rows[top].clone(), degree - top);
    for k in (0..top).rev() {
        let gamma = &rows[k];
        let deg = degree - k;
        let r = shift(&t)?;
        let x = NcSeries::identity(letters, e2, deg).add(&r.right_mul(&gamma.adjoint())?.truncate(deg))?;
        let core = x.invert(deg, None)?.multiply(&r, Some(deg))?;
        let ds = DefectSpectrum::of_adjoint(gamma).sqrt();
        let d = DefectSpectrum::of(gamma).sqrt();
        let body = core.left_mul(&ds)?.right_mul(&d)?;
        t = NcSeries::constant(letters, gamma.clone(), deg).add(&body)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real, scalar};
    use crate::scalar::C;

    type S = NcSeries<f64>;

    fn w(l: &[usize]) -> Word {
        Word::from_letters(l)
    }

    fn c(x: f64) -> C<f64> {
        re(x)
    }

    fn series(n: usize, d: usize, terms: &[(&[usize], f64)]) -> S {
        S::from_coeffs(n, 1, 1, d, terms.iter().map(|(l, v)| (w(l), scalar(c(*v))))).unwrap()
    }

    #[test]
    fn defect_examples() {
        assert_eq!(defect(&zeros::<f64>(2, 2), 1e-12).unwrap(), linalg::identity(2));
        let row = from_real::<f64>(1, 2, &[0.6, 0.8]);
        let d = defect(&row, 1e-12).unwrap();
        let expected = from_real::<f64>(2, 2, &[0.64, -0.48, -0.48, 0.36]);
        assert!((&d - &expected).norm() < 1e-14);
        assert!((&d * &d - &d).norm() < 1e-14);
        let d = defect(&scalar(c(0.5)), 1e-12).unwrap();
        assert!((d[(0, 0)].re - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(defect(&scalar(c(1.5)), 1e-12).is_err());
    }

    #[test]
    fn defect_squares_back() {
        let m = CMatrix::<f64>::from_fn(3, 2, |i, j| C::new(0.2 * i as f64 - 0.1, 0.15 * j as f64));
        let d = defect(&m, 1e-12).unwrap();
        let gram = linalg::identity::<f64>(2) - m.adjoint() * &m;
        assert!((&d * &d - gram).norm() < 1e-12);
        assert!(linalg::min_eigenvalue(&d) >= 0.0);
    }

    #[test]
    fn row_factorization_examples() {
        let g = factor_row_contraction(&[scalar(c(0.5)), scalar(c(0.3))]).unwrap();
        assert_eq!(g[0][(0, 0)], c(0.5));
        assert!((g[1][(0, 0)].re - 0.3 / 0.75f64.sqrt()).abs() < 1e-14);
        let g = factor_row_contraction(&vec![zeros::<f64>(1, 1); 3]).unwrap();
        assert!(g.iter().all(|x| x[(0, 0)] == c(0.0)));
        assert!(matches!(
            factor_row_contraction(&[scalar(c(1.0)), scalar(c(0.1))]),
            Err(Error::RowFactorization { block: 1, .. })
        ));
    }

    #[test]
    fn minimal_factorization_reassembles() {
        let a = [
            from_real::<f64>(2, 1, &[0.3, 0.1]),
            from_real::<f64>(2, 2, &[0.2, -0.1, 0.05, 0.3]),
            from_real::<f64>(2, 1, &[-0.2, 0.25]),
        ];
        let row = linalg::hcat(2, &a);
        assert!(linalg::operator_norm(&row) < 1.0);
        let f = factor_row_minimal(&a).unwrap();
        assert!((assemble_row_minimal(&f.params) - &row).norm() < 1e-12);
        let u = &f.source_map;
        let gram = u.adjoint() * u;
        let dl = defect(&row, 1e-12).unwrap();
        let proj = linalg::pinv(&dl, 1e-10) * &dl;
        assert!((gram - proj).norm() < 1e-10);
        let v = &f.target_map;
        assert!((v * v.adjoint() - linalg::identity::<f64>(v.nrows())).norm() < 1e-10);
    }

    #[test]
    fn shift_deshift_inverse() {
        let x = S::from_coeffs(
            2,
            1,
            2,
            2,
            [
                (w(&[]), from_real(1, 2, &[0.1, 0.2])),
                (w(&[2]), from_real(1, 2, &[-0.3, 0.4])),
                (w(&[1, 2]), from_real(1, 2, &[0.5, 0.0])),
            ],
        )
        .unwrap();
        let r = shift(&x).unwrap();
        assert_eq!(r.coeff(&w(&[2]))[(0, 0)], c(0.2));
        assert_eq!(r.coeff(&w(&[2, 1]))[(0, 0)], c(-0.3));
        assert_eq!(r.coeff(&w(&[1, 2, 1]))[(0, 0)], c(0.5));
        assert_eq!(deshift(&r), x);
    }

    #[test]
    fn step_examples() {
        let (g, next) = schur_step(&series(2, 2, &[(&[], 0.4)])).unwrap();
        assert_eq!(g[(0, 0)], c(0.4));
        assert_eq!(next.max_coeff_diff(&S::zero(2, 1, 2, 1), 1), 0.0);
        assert_eq!(next.in_dim(), 2);

        let (g, next) = schur_step(&series(1, 1, &[(&[], 0.5), (&[1], 0.25)])).unwrap();
        assert_eq!(g[(0, 0)], c(0.5));
        assert!((next.constant_term()[(0, 0)].re - 1.0 / 3.0).abs() < 1e-15);

        let bad = series(1, 1, &[(&[], 1.0), (&[1], 0.2)]);
        assert!(schur_step(&bad).is_err());
        assert!(matches!(step_unchecked(&bad), Err(Error::UnitaryWithTail { .. })));
        let unimodular = series(1, 1, &[(&[], 1.0)]);
        assert!(schur_step(&unimodular).is_ok());
    }

    #[test]
    fn synthesize_examples() {
        let zero_rows = vec![zeros::<f64>(1, 1), zeros(1, 2), zeros(1, 4)];
        let t = synthesize_rows(2, &zero_rows, 3).unwrap();
        assert_eq!(t.max_coeff_diff(&S::zero(2, 1, 1, 3), 3), 0.0);
        let t = synthesize_rows(2, &[scalar(c(0.5))], 3).unwrap();
        assert!(t.max_coeff_diff(&series(2, 3, &[(&[], 0.5)]), 3) == 0.0);
        let t = synthesize_rows(1, &[scalar(c(0.5)), scalar(c(1.0 / 3.0))], 2).unwrap();
        assert!((t.coeff(&w(&[1]))[(0, 0)].re - 0.25).abs() < 1e-12);
        assert!(synthesize_rows(2, &[scalar(c(0.5)), zeros(1, 3)], 2).is_err());
    }

    /// Classical recursion `f ↦ (f - γ)/(t(1 - γ̄ f))` on coefficient vectors.
    fn classical_parameters(mut f: Vec<C<f64>>, depth: usize) -> Vec<C<f64>> {
        let mut out = Vec::new();
        for _ in 0..=depth {
            let g = f[0];
            out.push(g);
            if f.len() == 1 {
                break;
            }
            let num: Vec<C<f64>> = f.iter().enumerate().map(|(i, &x)| if i == 0 { x - g } else { x }).collect();
            let den: Vec<C<f64>> = f
                .iter()
                .enumerate()
                .map(|(i, &x)| if i == 0 { c(1.0) - g.conj() * x } else { -g.conj() * x })
                .collect();
            let len = f.len();
            let mut q = vec![c(0.0); len];
            for k in 0..len {
                let mut acc = num[k];
                for j in 0..k {
                    acc -= q[j] * den[k - j];
                }
                q[k] = acc / den[0];
            }
            f = q[1..].to_vec();
        }
        out
    }

    #[test]
    fn single_letter_matches_classical() {
        let params = [C::new(0.3, 0.1), C::new(-0.5, 0.2), C::new(0.1, -0.4), C::new(0.6, 0.0), C::new(-0.2, -0.2)];
        let rows: Vec<CMatrix<f64>> = params.iter().map(|&p| scalar(p)).collect();
        let t = synthesize_rows(1, &rows, 4).unwrap();
        let coeffs: Vec<C<f64>> = (0..=4).map(|k| t.coeff(&w(&vec![1; k]))[(0, 0)]).collect();
        let classical = classical_parameters(coeffs, 4);
        for (a, b) in classical.iter().zip(&params) {
            assert!((a - b).norm() < 1e-12);
        }
        let data = schur_analyze(&t, 4).unwrap();
        for (row, p) in data.rows.iter().zip(&params) {
            assert!((row[(0, 0)] - p).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_with_tree() {
        let rows = vec![
            scalar(C::new(0.2, -0.1)),
            CMatrix::from_row_slice(1, 2, &[C::new(0.3, 0.2), C::new(-0.4, 0.1)]),
            CMatrix::from_fn(1, 4, |_, j| C::new(0.1 * j as f64 - 0.15, 0.05 * j as f64)),
            CMatrix::from_fn(1, 8, |_, j| C::new(0.08 * ((j * 3) % 5) as f64 - 0.1, -0.04 * j as f64 + 0.1)),
        ];
        let t = synthesize_rows(2, &rows, 3).unwrap();
        let data = schur_analyze(&t, 3).unwrap();
        for (a, b) in data.rows.iter().zip(&rows) {
            assert!((a - b).norm() < 1e-12);
        }
        let back = schur_synthesize(&data, 3).unwrap();
        assert!(back.max_coeff_diff(&t, 3) < 1e-12);
        assert!(data.is_compatible());
        assert!(data.max_norm() <= 1.0 + 1e-8);
        for k in 0..=3 {
            assert!((data.reconstruct_row(k) - &rows[k]).norm() < 1e-10, "row {k}");
        }
        assert_eq!(data.tree.len(), 15);
    }

    #[test]
    fn zero_series_has_zero_parameters() {
        let data = schur_analyze(&S::zero(2, 1, 1, 3), 3).unwrap();
        assert!(data.rows.iter().all(|r| r.iter().all(|z| *z == c(0.0))));
        assert!(data.tree.values().all(|g| g.iter().all(|z| *z == c(0.0))));
        assert!(data.is_compatible());
    }

    #[test]
    fn boundary_row_collapses_tree() {
        // a coisometric first-level row leaves no room below it
        let rows = vec![scalar(c(0.0)), from_real::<f64>(1, 2, &[0.6, 0.8]), zeros(1, 4)];
        let data = SchurData::from_rows(2, 1, 1, rows).unwrap();
        assert!(data.is_compatible());
        assert_eq!(data.tree[&w(&[1, 1])].nrows(), 0);
        assert!((data.reconstruct_row(1) - from_real::<f64>(1, 2, &[0.6, 0.8])).norm() < 1e-12);
        let t = schur_synthesize(&data, 3).unwrap();
        let again = schur_analyze(&t, 2).unwrap();
        assert!((&again.rows[1] - &data.rows[1]).norm() < 1e-12);
    }

    #[test]
    fn analyze_rejects_excess_depth() {
        assert!(schur_analyze(&series(2, 1, &[(&[], 0.1)]), 2).is_err());
        assert!(schur_analyze(&series(2, 1, &[(&[1], 0.9), (&[2], 0.9)]), 1).is_err());
    }
}
