//! Displacement equations `A - Σ_k F_k A F_k* = UU* - VV*` with contractive
//! `F_k`, their series solutions, and the interpolant built from a unitary
//! extension. Nevanlinna-Pick data on the unit ball of `C^N` is the special
//! case of diagonal `F_k`.

use crate::error::{Error, Result};
use crate::linalg::{self, zeros};
use crate::scalar::{lit, re, CMatrix, Real, C};
use crate::series::NcSeries;
use crate::word::{self, Word};

const F_NORM_TOL: f64 = 1e-10;
const DECAY_TARGET: f64 = 1e-8;
const K_MAX_CAP: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData<T: Real> {
    pub letters: usize,
    pub g_dim: usize,
    pub f: Vec<CMatrix<T>>,
    /// `g × e1`.
    pub u: CMatrix<T>,
    /// `g × e2`.
    pub v: CMatrix<T>,
}

impl<T: Real> ScatteringData<T> {
    pub fn new(f: Vec<CMatrix<T>>, u: CMatrix<T>, v: CMatrix<T>) -> Result<Self> {
        let g = u.nrows();
        if f.is_empty() {
            return Err(Error::Invalid("at least one operator F_k is required".into()));
        }
        if v.nrows() != g || f.iter().any(|fk| fk.shape() != (g, g)) {
            return Err(Error::Dimension(format!(
                "F_k must be {g}x{g} and V must have {g} rows"
            )));
        }
        for (k, fk) in f.iter().enumerate() {
            let norm = linalg::operator_norm(fk);
            if norm > T::one() + lit(F_NORM_TOL) {
                return Err(Error::Invalid(format!(
                    "F_{} has norm {} > 1",
                    k + 1,
                    norm.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        Ok(ScatteringData {
            letters: f.len(),
            g_dim: g,
            f,
            u,
            v,
        })
    }

    pub fn e1(&self) -> usize {
        self.u.ncols()
    }

    pub fn e2(&self) -> usize {
        self.v.ncols()
    }

    /// `G J G* = UU* - VV*`.
    pub fn gjg(&self) -> CMatrix<T> {
        &self.u * self.u.adjoint() - &self.v * self.v.adjoint()
    }

    /// `Σ_k F_k X F_k*`.
    pub fn congruence(&self, x: &CMatrix<T>) -> CMatrix<T> {
        self.f
            .iter()
            .fold(zeros(self.g_dim, self.g_dim), |acc, fk| acc + fk * x * fk.adjoint())
    }

    /// `A - Σ_k F_k A F_k* - GJG*`.
    pub fn residual(&self, a: &CMatrix<T>) -> CMatrix<T> {
        a - self.congruence(a) - self.gjg()
    }
}

/// `sqrt‖Σ_{|σ| = k} F_σ F_σ*‖` for `k = 0, 1, …`.
pub fn word_decay<T: Real>(data: &ScatteringData<T>, k: usize) -> T {
    let mut q = linalg::identity::<T>(data.g_dim);
    for _ in 0..k {
        q = data.congruence(&q);
    }
    linalg::operator_norm(&q).sqrt()
}

/// Smallest `k` with `sqrt‖Σ_{|σ| = k} F_σ F_σ*‖ < 1e-8`, capped at 60;
/// the flag is set when the cap binds.
pub fn default_k_max<T: Real>(data: &ScatteringData<T>) -> (usize, bool) {
    let mut q = linalg::identity::<T>(data.g_dim);
    for k in 0..=K_MAX_CAP {
        if linalg::operator_norm(&q).sqrt() < lit(DECAY_TARGET) {
            return (k, false);
        }
        q = data.congruence(&q);
    }
    (K_MAX_CAP, true)
}

#[derive(Debug, Clone)]
pub struct WaveOperators<T: Real> {
    /// `U_k = [F_σ U]_{|σ| = k}`, `k = 0..=k_max`.
    pub u_levels: Vec<CMatrix<T>>,
    pub v_levels: Vec<CMatrix<T>>,
    /// `max_g Σ_{|σ| = k_max} ‖F_σ* g‖` over standard basis vectors `g`.
    pub decay: T,
}

/// Explicit wave operators; the number of blocks grows like `N^k`, so this
/// is meant for small `k_max`.
pub fn wave_operators<T: Real>(data: &ScatteringData<T>, k_max: usize) -> WaveOperators<T> {
    let g = data.g_dim;
    let mut u_levels = vec![data.u.clone()];
    let mut v_levels = vec![data.v.clone()];
    let mut words = vec![linalg::identity::<T>(g)];
    for _ in 0..k_max {
        let (pu, pv) = (u_levels.last().unwrap(), v_levels.last().unwrap());
        let us: Vec<CMatrix<T>> = data.f.iter().map(|fk| fk * pu).collect();
        let vs: Vec<CMatrix<T>> = data.f.iter().map(|fk| fk * pv).collect();
        u_levels.push(linalg::hcat(g, &us));
        v_levels.push(linalg::hcat(g, &vs));
        words = data
            .f
            .iter()
            .flat_map(|fk| words.iter().map(move |w| fk * w))
            .collect();
    }
    let decay = (0..g)
        .map(|i| {
            words
                .iter()
                .map(|fs| fs.row(i).norm())
                .fold(T::zero(), |a, b| a + b)
        })
        .fold(T::zero(), |m, v| m.max(v));
    WaveOperators {
        u_levels,
        v_levels,
        decay,
    }
}

#[derive(Debug, Clone)]
pub struct DisplacementSolution<T: Real> {
    pub a: CMatrix<T>,
    pub k_max: usize,
    /// `sqrt‖Σ_{|σ| = k_max+1} F_σ F_σ*‖`.
    pub decay: T,
    /// `‖A - Σ F_k A F_k* - GJG*‖_F`, which equals the first omitted term.
    pub residual: T,
}

/// `A = Σ_{|σ| ≤ k_max} F_σ (UU* - VV*) F_σ*`, accumulated level by level.
/// With `k_max = None` the level count comes from [`default_k_max`].
pub fn solve_a<T: Real>(data: &ScatteringData<T>, k_max: Option<usize>) -> DisplacementSolution<T> {
    let k_max = k_max.unwrap_or_else(|| default_k_max(data).0);
    let mut term = data.gjg();
    let mut a = term.clone();
    for _ in 0..k_max {
        term = data.congruence(&term);
        a += &term;
    }
    let residual = linalg::frobenius(&data.residual(&a));
    DisplacementSolution {
        a,
        k_max,
        decay: word_decay(data, k_max + 1),
        residual,
    }
}

/// Pick matrix and the matching displacement data.
#[derive(Debug, Clone)]
pub struct PickInstance<T: Real> {
    pub points: Vec<Vec<C<T>>>,
    pub values: Vec<C<T>>,
    pub r: CMatrix<T>,
    pub data: ScatteringData<T>,
}

/// `⟨λ_j, λ_l⟩ = Σ_i λ_j^{(i)} conj(λ_l^{(i)})`.
fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(C::new(T::zero(), T::zero()), |acc, (x, y)| acc + *x * y.conj())
}

/// `R = [(1 - b_j conj(b_l)) / (1 - ⟨λ_j, λ_l⟩)]` with `F_j = diag(λ^{(j)})`,
/// `U = 1`, `V = b`.
pub fn pick_instance<T: Real>(points: &[Vec<C<T>>], values: &[C<T>]) -> Result<PickInstance<T>> {
    let l = points.len();
    if l == 0 {
        return Err(Error::Invalid("at least one interpolation point is required".into()));
    }
    if values.len() != l {
        return Err(Error::Dimension(format!("{l} points but {} values", values.len())));
    }
    let n = points[0].len();
    if n == 0 {
        return Err(Error::InvalidPoint {
            index: 0,
            reason: "point has no coordinates".into(),
        });
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(Error::InvalidPoint {
                index: i,
                reason: format!("has {} coordinates, expected {n}", p.len()),
            });
        }
        let norm2 = inner(p, p).re;
        if norm2 >= T::one() {
            return Err(Error::InvalidPoint {
                index: i,
                reason: format!("norm {} is not below 1", norm2.sqrt().to_f64().unwrap_or(f64::NAN)),
            });
        }
        if points[..i].iter().any(|q| q == p) {
            return Err(Error::InvalidPoint {
                index: i,
                reason: "repeats an earlier point".into(),
            });
        }
    }
    let one = C::new(T::one(), T::zero());
    let r = CMatrix::from_fn(l, l, |j, k| {
        (one - values[j] * values[k].conj()) / (one - inner(&points[j], &points[k]))
    });
    let f: Vec<CMatrix<T>> = (0..n)
        .map(|i| CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(l, points.iter().map(|p| p[i]))))
        .collect();
    let u = CMatrix::from_element(l, 1, one);
    let v = CMatrix::from_iterator(l, 1, values.iter().copied());
    Ok(PickInstance {
        points: points.to_vec(),
        values: values.to_vec(),
        r,
        data: ScatteringData::new(f, u, v)?,
    })
}

/// Blocks of the unitary extension `θ : (C^f)^N ⊕ E1 ⊕ R1 → C^f ⊕ E2 ⊕ R2`.
#[derive(Debug, Clone)]
pub struct ThetaBlocks<T: Real> {
    /// `f × f`, one per letter.
    pub x: Vec<CMatrix<T>>,
    /// `f × e1`.
    pub z: CMatrix<T>,
    /// `e2 × f`, one per letter.
    pub y: Vec<CMatrix<T>>,
    /// `e2 × e1`.
    pub w: CMatrix<T>,
    pub r1: usize,
    pub r2: usize,
    pub theta: CMatrix<T>,
}

impl<T: Real> ThetaBlocks<T> {
    pub fn state_dim(&self) -> usize {
        self.z.nrows()
    }

    /// `max(‖θθ* - I‖_F, ‖θ*θ - I‖_F)`.
    pub fn unitarity_defect(&self) -> T {
        let n = self.theta.nrows();
        let id = linalg::identity::<T>(n);
        let a = linalg::frobenius(&(&self.theta * self.theta.adjoint() - &id));
        let b = linalg::frobenius(&(self.theta.adjoint() * &self.theta - &id));
        a.max(b)
    }

    /// `c_∅ = W`, `c_{kσ} = Y_k X_σ Z` for words up to `degree`.
    pub fn series(&self, degree: usize) -> Result<NcSeries<T>> {
        let n = self.x.len();
        let mut out = NcSeries::zero(n, self.w.nrows(), self.w.ncols(), degree);
        out.set(Word::empty(), self.w.clone())?;
        // level[idx] = X_σ Z for the idx-th word σ of the current length
        let mut level = vec![self.z.clone()];
        for len in 1..=degree {
            for k in 0..n {
                for (idx, p) in level.iter().enumerate() {
                    let sigma = Word::from_index(idx, len - 1, n);
                    out.set(sigma.prepend(k + 1), &self.y[k] * p)?;
                }
            }
            if len < degree {
                level = self.x.iter().flat_map(|xk| level.iter().map(move |p| xk * p)).collect();
            }
        }
        Ok(out)
    }

    /// `W + Σ_k λ_k Y_k Σ_{m < degree} (Σ_j λ_j X_j)^m Z`: the series of
    /// [`ThetaBlocks::series`] evaluated at `λ` without enumerating words.
    pub fn evaluate(&self, point: &[C<T>], degree: usize) -> Result<CMatrix<T>> {
        if point.len() != self.x.len() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                self.x.len()
            )));
        }
        let f = self.state_dim();
        let pencil = self
            .x
            .iter()
            .zip(point)
            .fold(zeros::<T>(f, f), |acc, (xk, &lk)| acc + xk * lk);
        let mut power = self.z.clone();
        let mut geometric = zeros::<T>(f, self.z.ncols());
        for _ in 0..degree {
            geometric += &power;
            power = &pencil * power;
        }
        let out_map = self
            .y
            .iter()
            .zip(point)
            .fold(zeros::<T>(self.w.nrows(), f), |acc, (yk, &lk)| acc + yk * lk);
        Ok(&self.w + out_map * geometric)
    }
}

#[derive(Debug, Clone)]
pub struct Interpolant<T: Real> {
    pub theta: ThetaBlocks<T>,
    /// Coefficients `c_w` with `V* = Σ_w c_w U* F_w*`.
    pub series: NcSeries<T>,
    pub solution: DisplacementSolution<T>,
    /// `‖(L L* + V V*) - (Σ F_k L L* F_k* + U U*)‖_F`.
    pub gram_mismatch: T,
}

impl<T: Real> Interpolant<T> {
    /// The series with conjugated coefficients, which interpolates Pick
    /// data: `T(λ_l) = b_l`.
    pub fn pick_series(&self) -> NcSeries<T> {
        self.series.conjugate()
    }

    /// `conj(T(conj λ))` through the θ blocks, i.e. the Pick-oriented
    /// interpolant at `λ`, summed up to words of length `degree`.
    pub fn evaluate_pick(&self, point: &[C<T>], degree: usize) -> Result<CMatrix<T>> {
        let conj: Vec<C<T>> = point.iter().map(|z| z.conj()).collect();
        Ok(self.theta.evaluate(&conj, degree)?.map(|z| z.conj()))
    }
}

/// Builds `θ` from a factorization `A = LL*` of the series solution and
/// reads the interpolant off its blocks.
///
/// `tol_psd` defaults to `1e-10` times the largest eigenvalue magnitude of
/// `A`. When `A` is not positive semidefinite the error carries the most
/// negative eigenvalue as a certificate of infeasibility.
pub fn construct_interpolant<T: Real>(
    data: &ScatteringData<T>,
    k_max: Option<usize>,
    degree: usize,
    tol_psd: Option<T>,
) -> Result<Interpolant<T>> {
    let solution = solve_a(data, k_max);
    let (values, vectors) = linalg::hermitian_eigen(&solution.a);
    let top = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let min_eig = values.first().copied().unwrap_or_else(T::zero);
    let tol = tol_psd.unwrap_or_else(|| lit::<T>(1e-10) * top);
    if min_eig < -tol {
        return Err(Error::NotPositive {
            min_eigenvalue: min_eig.to_f64().unwrap_or(f64::NAN),
        });
    }
    let cutoff = lit::<T>(linalg::RANK_CUTOFF) * top;
    let keep: Vec<usize> = (0..values.len()).rev().filter(|&i| values[i] > cutoff).collect();
    let mut l_factor = linalg::select_columns(&vectors, &keep);
    for (j, &i) in keep.iter().enumerate() {
        let s = values[i].sqrt();
        l_factor.column_mut(j).iter_mut().for_each(|z| *z = z.scale(s));
    }
    let theta = extend_to_unitary(data, &l_factor)?;

    let ll = &l_factor * l_factor.adjoint();
    let lhs = &ll + &data.v * data.v.adjoint();
    let rhs = data.congruence(&ll) + &data.u * data.u.adjoint();
    let gram_mismatch = linalg::frobenius(&(lhs - rhs));
    let series = theta.series(degree)?;
    Ok(Interpolant {
        theta,
        series,
        solution,
        gram_mismatch,
    })
}

/// Stacks `P = [L*; V*]`, `Q = [L*F_1*; …; L*F_N*; U*]`, takes the
/// isometry with `θ₀ Q = P` on the range of `Q`, and completes it by
/// pairing orthonormal complements in order, padding the smaller side.
fn extend_to_unitary<T: Real>(data: &ScatteringData<T>, l_factor: &CMatrix<T>) -> Result<ThetaBlocks<T>> {
    let n = data.letters;
    let g = data.g_dim;
    let f = l_factor.ncols();
    let (e1, e2) = (data.e1(), data.e2());
    let lt = l_factor.adjoint();
    let p = linalg::vcat(g, &[lt.clone(), data.v.adjoint()]);
    let mut q_blocks: Vec<CMatrix<T>> = data.f.iter().map(|fk| &lt * fk.adjoint()).collect();
    q_blocks.push(data.u.adjoint());
    let q = linalg::vcat(g, &q_blocks);
    let (dom, cod) = (n * f + e1, f + e2);
    let size = dom.max(cod);
    let (r1, r2) = (size - dom, size - cod);

    let cutoff = lit::<T>(linalg::RANK_CUTOFF);
    let (range_in, comp_in) = linalg::column_space_split(&q, cutoff);
    // θ₀ on the range of Q, made exactly isometric by its polar factor
    let image = &p * linalg::pinv(&q, cutoff) * &range_in;
    let image = polar_isometry(&image);
    let (_, comp_out) = linalg::column_space_split(&image, cutoff);

    let mut theta = zeros::<T>(size, size);
    let pad = |m: &CMatrix<T>, rows: usize| {
        let mut out = zeros::<T>(size, m.ncols());
        out.view_mut((0, 0), (rows, m.ncols())).copy_from(m);
        out
    };
    let mut domain_basis = vec![pad(&range_in, dom), pad(&comp_in, dom)];
    let mut target_basis = vec![pad(&image, cod), pad(&comp_out, cod)];
    let mut extra_in = zeros::<T>(size, r1);
    for i in 0..r1 {
        extra_in[(dom + i, i)] = re(T::one());
    }
    let mut extra_out = zeros::<T>(size, r2);
    for i in 0..r2 {
        extra_out[(cod + i, i)] = re(T::one());
    }
    domain_basis.push(extra_in);
    target_basis.push(extra_out);
    let dom_all = linalg::hcat(size, &domain_basis);
    let cod_all = linalg::hcat(size, &target_basis);
    if dom_all.ncols() != size || cod_all.ncols() != size {
        return Err(Error::Dimension(format!(
            "unitary completion mismatch: {} domain and {} target basis vectors for size {size}",
            dom_all.ncols(),
            cod_all.ncols()
        )));
    }
    theta += &cod_all * dom_all.adjoint();

    let x = (0..n).map(|k| linalg::block(&theta, 0, k * f, f, f)).collect();
    let y = (0..n).map(|k| linalg::block(&theta, f, k * f, e2, f)).collect();
    let z = linalg::block(&theta, 0, n * f, f, e1);
    let w = linalg::block(&theta, f, n * f, e2, e1);
    Ok(ThetaBlocks {
        x,
        z,
        y,
        w,
        r1,
        r2,
        theta,
    })
}

/// `U V*` from the singular value decomposition `M = U Σ V*`.
fn polar_isometry<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    if m.is_empty() {
        return m.clone();
    }
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Largest Euclidean norm among the points.
pub fn max_point_norm<T: Real>(points: &[Vec<C<T>>]) -> T {
    points
        .iter()
        .map(|p| inner(p, p).re.sqrt())
        .fold(T::zero(), |m, v| m.max(v))
}

/// Smallest degree `d` with `ρ^{d+1} / (1 - ρ) < target`.
pub fn degree_for_tail<T: Real>(rho: T, target: T) -> usize {
    let mut d = 0;
    let mut power = rho;
    while power / (T::one() - rho) >= target && d < 10_000 {
        power *= rho;
        d += 1;
    }
    d
}

/// Number of words of length `≤ degree`, to warn before enumerating.
pub fn series_size(letters: usize, degree: usize) -> usize {
    word::count_words(letters, degree)
}
