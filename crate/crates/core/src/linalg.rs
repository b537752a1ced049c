//! Dense complex operators on tensor-product spin spaces.
//!
//! Basis order: `|s_1 … s_L⟩` has index `Σ bit(s_j) 2^{L−j}` with `bit(↑) = 0`
//! and `bit(↓) = 1`, so site 1 is the most significant bit. On `V_0 ⊗ V^L`
//! the auxiliary space is the most significant slot.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{abs_c, cplx, creal, eps, lit, tiny, to_f64, Real, C};

pub type CMatrix<T> = DMatrix<C<T>>;
pub type CVector<T> = DVector<C<T>>;

/// Largest matrix dimension handled by dense methods.
pub const DENSE_CAP: usize = 1 << 12;

/// Complex matrix with explicit (possibly different) domain and codomain.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> DenseOperator<T> {
    pub fn new(m: CMatrix<T>) -> Self {
        DenseOperator { m }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(CMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(CMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C<T>) -> Self {
        Self::new(CMatrix::from_fn(rows, cols, f))
    }

    /// Real matrix given row by row.
    pub fn from_real_rows(rows: usize, cols: usize, data: &[T]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| creal(data[i * cols + j]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.m[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.m.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m.transpose())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::new(self.m.map(|x| x * s))
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.scale(creal(s))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::new(self.m.kronecker(&other.m))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.m.iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.m.iter().fold(T::zero(), |acc, z| acc.max(abs_c(*z)))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows().min(self.cols())).fold(C::new(T::zero(), T::zero()), |acc, i| acc + self.m[(i, i)])
    }

    pub fn apply(&self, v: &CVector<T>) -> CVector<T> {
        &self.m * v
    }

    /// `‖self − other‖_F / max(‖self‖_F, tiny)`.
    pub fn rel_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        let d = (&self.m - &other.m).iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im).sqrt();
        d / self.norm().max(tiny::<T>())
    }

    /// `‖H − H†‖_F / ‖H‖_F`.
    pub fn hermiticity_residual(&self) -> T {
        self.rel_diff(&self.adjoint())
    }

    /// Least-squares scalar `s` minimising `‖other − s·self‖_F`.
    pub fn best_scalar_to(&self, other: &Self) -> C<T> {
        let num = self.m.iter().zip(other.m.iter()).fold(C::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
        let den = self.m.iter().fold(T::zero(), |acc, a| acc + a.re * a.re + a.im * a.im);
        num / creal(den)
    }
}

impl<T: Real> Mul for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn mul(self, rhs: Self) -> DenseOperator<T> {
        assert_eq!(self.cols(), rhs.rows(), "operator product dimension mismatch");
        DenseOperator::new(&self.m * &rhs.m)
    }
}

impl<T: Real> Add for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn add(self, rhs: Self) -> DenseOperator<T> {
        DenseOperator::new(&self.m + &rhs.m)
    }
}

impl<T: Real> Sub for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn sub(self, rhs: Self) -> DenseOperator<T> {
        DenseOperator::new(&self.m - &rhs.m)
    }
}

impl<T: Real> Neg for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn neg(self) -> DenseOperator<T> {
        DenseOperator::new(-&self.m)
    }
}

/// A state on `V^L`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    l: usize,
    amps: CVector<T>,
}

impl<T: Real> StateVector<T> {
    pub fn new(l: usize, amps: CVector<T>) -> Result<Self> {
        if amps.len() != 1usize << l {
            return Err(Error::Dimension(format!("{} amplitudes for L = {l}", amps.len())));
        }
        Ok(StateVector { l, amps })
    }

    pub fn from_slice(l: usize, amps: &[C<T>]) -> Result<Self> {
        Self::new(l, CVector::from_column_slice(amps))
    }

    pub fn basis(l: usize, index: usize) -> Self {
        let mut amps = CVector::zeros(1 << l);
        amps[index] = creal(T::one());
        StateVector { l, amps }
    }

    #[inline]
    pub fn len_sites(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector<T> {
        self.amps
    }

    pub fn norm(&self) -> T {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        StateVector { l: self.l, amps: self.amps.map(|z| z / creal(n)) }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        StateVector { l: self.l, amps: self.amps.map(|z| z * s) }
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.amps.dotc(&other.amps)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        StateVector { l: self.l + other.l, amps: self.amps.kronecker(&other.amps) }
    }

    pub fn tensor_power(&self, n: usize) -> Self {
        assert!(n >= 1);
        (1..n).fold(self.clone(), |acc, _| acc.tensor(self))
    }
}

/// A linear functional on `V^L`. Pairing with a state involves no complex
/// conjugation; this keeps dual basis vectors distinct from bras of kets.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector<T: Real> {
    l: usize,
    coeffs: CVector<T>,
}

impl<T: Real> Covector<T> {
    pub fn new(l: usize, coeffs: CVector<T>) -> Result<Self> {
        if coeffs.len() != 1usize << l {
            return Err(Error::Dimension(format!("{} coefficients for L = {l}", coeffs.len())));
        }
        Ok(Covector { l, coeffs })
    }

    pub fn from_slice(l: usize, coeffs: &[C<T>]) -> Result<Self> {
        Self::new(l, CVector::from_column_slice(coeffs))
    }

    #[inline]
    pub fn len_sites(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn coeffs(&self) -> &CVector<T> {
        &self.coeffs
    }

    pub fn pair(&self, v: &StateVector<T>) -> C<T> {
        assert_eq!(self.l, v.l);
        self.coeffs.dot(&v.amps)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Covector { l: self.l + other.l, coeffs: self.coeffs.kronecker(&other.coeffs) }
    }

    pub fn tensor_power(&self, n: usize) -> Self {
        assert!(n >= 1);
        (1..n).fold(self.clone(), |acc, _| acc.tensor(self))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Covector { l: self.l, coeffs: self.coeffs.map(|z| z * s) }
    }

    /// `⟨self| M` as a covector on the domain of `M`.
    pub fn compose(&self, m: &DenseOperator<T>) -> Result<Self> {
        if m.rows() != self.coeffs.len() || !m.cols().is_power_of_two() {
            return Err(Error::Dimension("covector/operator mismatch".into()));
        }
        let row = m.matrix().transpose() * &self.coeffs;
        Covector::new(m.cols().trailing_zeros() as usize, row)
    }

    /// The row vector as a `1 × 2^L` operator.
    pub fn as_operator(&self) -> DenseOperator<T> {
        let n = self.coeffs.len();
        DenseOperator::from_fn(1, n, |_, j| self.coeffs[j])
    }
}

/// Pauli matrix `σ^α`, `α ∈ {1,2,3}`; `α = 0` gives the identity.
pub fn pauli<T: Real>(alpha: usize) -> DenseOperator<T> {
    let (o, z) = (T::one(), T::zero());
    let c = |re: T, im: T| cplx(re, im);
    let e = match alpha {
        0 => [c(o, z), c(z, z), c(z, z), c(o, z)],
        1 => [c(z, z), c(o, z), c(o, z), c(z, z)],
        2 => [c(z, z), c(z, -o), c(z, o), c(z, z)],
        3 => [c(o, z), c(z, z), c(z, z), c(-o, z)],
        _ => panic!("Pauli index {alpha} not in 0..=3"),
    };
    DenseOperator::new(CMatrix::from_row_slice(2, 2, &e))
}

fn log2_exact(n: usize, what: &str) -> Result<usize> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros() as usize)
    } else {
        Err(Error::Dimension(format!("{what} = {n} is not a power of two")))
    }
}

/// `1^{⊗(first−1)} ⊗ op ⊗ 1^{⊗(L−first−k+1)}` where `op` acts on `k` adjacent
/// sites starting at `first_site` (1-based). `op` may change the number of
/// sites, e.g. a local supercharge `V → V⊗V`.
pub fn kron_place<T: Real>(op: &DenseOperator<T>, first_site: usize, l: usize) -> Result<DenseOperator<T>> {
    let k = log2_exact(op.cols(), "operator domain")?;
    log2_exact(op.rows(), "operator codomain")?;
    if first_site == 0 || first_site + k - 1 > l {
        return Err(Error::Dimension(format!(
            "cannot place a {k}-site operator at site {first_site} of a chain of length {l}"
        )));
    }
    let left = 1usize << (first_site - 1);
    let right = 1usize << (l + 1 - first_site - k);
    Ok(DenseOperator::identity(left).kron(op).kron(&DenseOperator::identity(right)))
}

/// A two-slot operator (4×4, slot order `(s1, s2)`) acting on slots `s1 ≠ s2`
/// of an `n`-slot space, slots 0-based from the most significant.
pub fn place_pair<T: Real>(op: &DenseOperator<T>, s1: usize, s2: usize, n: usize) -> DenseOperator<T> {
    assert!(op.rows() == 4 && op.cols() == 4 && s1 != s2 && s1 < n && s2 < n);
    let dim = 1usize << n;
    let (b1, b2) = (n - 1 - s1, n - 1 - s2);
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let i_in = (((col >> b1) & 1) << 1) | ((col >> b2) & 1);
        let rest = col & !(1 << b1) & !(1 << b2);
        for i_out in 0..4 {
            let v = op.get(i_out, i_in);
            if v.re != T::zero() || v.im != T::zero() {
                let row = rest | ((i_out >> 1) << b1) | ((i_out & 1) << b2);
                out[(row, col)] += v;
            }
        }
    }
    DenseOperator::new(out)
}

/// `M ← M·G` where `G` is the two-slot operator `op` on slots `(s1, s2)`;
/// costs `O(4·rows·cols)` instead of a full product.
pub fn right_mul_pair<T: Real>(m: &mut CMatrix<T>, op: &[C<T>; 16], s1: usize, s2: usize, n: usize) {
    let dim = 1usize << n;
    assert_eq!(m.ncols(), dim);
    let (b1, b2) = (n - 1 - s1, n - 1 - s2);
    let mask = (1usize << b1) | (1usize << b2);
    let mut tmp = [C::new(T::zero(), T::zero()); 4];
    for base in (0..dim).filter(|c| c & mask == 0) {
        let idx = [base, base | (1 << b2), base | (1 << b1), base | mask];
        for r in 0..m.nrows() {
            for (jo, t) in tmp.iter_mut().enumerate() {
                *t = idx.iter().enumerate().fold(C::new(T::zero(), T::zero()), |acc, (ji, &c)| acc + m[(r, c)] * op[ji * 4 + jo]);
            }
            for (jo, &c) in idx.iter().enumerate() {
                m[(r, c)] = tmp[jo];
            }
        }
    }
}

/// `M ← G·M` for a two-slot operator on slots `(s1, s2)`.
pub fn left_mul_pair<T: Real>(m: &mut CMatrix<T>, op: &[C<T>; 16], s1: usize, s2: usize, n: usize) {
    let dim = 1usize << n;
    assert_eq!(m.nrows(), dim);
    let (b1, b2) = (n - 1 - s1, n - 1 - s2);
    let mask = (1usize << b1) | (1usize << b2);
    let mut tmp = [C::new(T::zero(), T::zero()); 4];
    for base in (0..dim).filter(|c| c & mask == 0) {
        let idx = [base, base | (1 << b2), base | (1 << b1), base | mask];
        for c in 0..m.ncols() {
            for (io, t) in tmp.iter_mut().enumerate() {
                *t = idx.iter().enumerate().fold(C::new(T::zero(), T::zero()), |acc, (ii, &r)| acc + op[io * 4 + ii] * m[(r, c)]);
            }
            for (io, &r) in idx.iter().enumerate() {
                m[(r, c)] = tmp[io];
            }
        }
    }
}

/// Row-major entries of a 4×4 operator.
pub fn entries16<T: Real>(op: &DenseOperator<T>) -> [C<T>; 16] {
    assert!(op.rows() == 4 && op.cols() == 4);
    std::array::from_fn(|k| op.get(k / 4, k % 4))
}

/// The swap of sites `k` and `k+1` on `V^L`.
pub fn permutation<T: Real>(k: usize, l: usize) -> Result<DenseOperator<T>> {
    kron_place(&swap(), k, l)
}

pub fn swap<T: Real>() -> DenseOperator<T> {
    let (o, z) = (T::one(), T::zero());
    DenseOperator::from_real_rows(4, 4, &[o, z, z, z, z, z, o, z, z, o, z, z, z, z, z, o])
}

/// `ℛ^α(θ) = exp(iθ/2 Σ_j σ^α_j) = ⊗_j (cos(θ/2) + i sin(θ/2) σ^α)`.
pub fn rotation<T: Real>(alpha: usize, angle: T, l: usize) -> DenseOperator<T> {
    assert!((1..=3).contains(&alpha) && l >= 1);
    let half = angle / lit(2.0);
    let single = &DenseOperator::identity(2).scale_re(half.cos()) + &pauli::<T>(alpha).scale(cplx(T::zero(), half.sin()));
    (1..l).fold(single.clone(), |acc, _| acc.kron(&single))
}

/// `tr_0` over the auxiliary (most significant) slot.
pub fn partial_trace_aux<T: Real>(m: &DenseOperator<T>) -> Result<DenseOperator<T>> {
    if !m.rows().is_multiple_of(2) || !m.cols().is_multiple_of(2) || m.rows() < 2 {
        return Err(Error::Dimension(format!("{}x{} has no auxiliary qubit slot", m.rows(), m.cols())));
    }
    let (r, c) = (m.rows() / 2, m.cols() / 2);
    let a = m.matrix();
    Ok(DenseOperator::from_fn(r, c, |i, j| a[(i, j)] + a[(i + r, j + c)]))
}

/// Transpose on the auxiliary slot only.
pub fn partial_transpose_aux<T: Real>(m: &DenseOperator<T>) -> Result<DenseOperator<T>> {
    if !m.rows().is_multiple_of(2) || !m.cols().is_multiple_of(2) {
        return Err(Error::Dimension(format!("{}x{} has no auxiliary qubit slot", m.rows(), m.cols())));
    }
    let (r, c) = (m.rows() / 2, m.cols() / 2);
    let a = m.matrix();
    Ok(DenseOperator::from_fn(m.rows(), m.cols(), |i, j| {
        let (ai, ii) = (i / r, i % r);
        let (bj, jj) = (j / c, j % c);
        a[(bj * r + ii, ai * c + jj)]
    }))
}

/// Singular-value rank decision.
#[derive(Clone, Debug)]
pub struct RankInfo<T: Real> {
    pub rank: usize,
    /// Orthonormal basis of the numerical kernel.
    pub kernel: Vec<CVector<T>>,
    /// Singular values, descending, padded with zeros to the column count.
    pub singular_values: Vec<T>,
    /// Absolute threshold used (`tol_rel · σ_max`).
    pub threshold: T,
    /// Smallest singular value counted as nonzero, relative to `σ_max`.
    pub smallest_kept_rel: T,
    /// Largest singular value counted as zero, relative to `σ_max`.
    pub largest_dropped_rel: T,
}

/// Upper edge of the ambiguity band, relative to `σ_max`.
pub const RANK_AMBIGUITY_CEIL: f64 = 1e-6;

/// Default relative tolerance `dim · ε · 64`.
pub fn default_rank_tol<T: Real>(m: &DenseOperator<T>) -> T {
    lit::<T>(m.rows().max(m.cols()) as f64 * 64.0) * eps::<T>()
}

/// Numerical rank and kernel. Singular values in the band
/// `(tol_rel, 1e−6]·σ_max` make the decision inconclusive.
pub fn numeric_rank<T: Real>(m: &DenseOperator<T>, tol_rel: Option<T>) -> Result<RankInfo<T>> {
    let tol_rel = tol_rel.unwrap_or_else(|| default_rank_tol(m));
    let (rows, cols) = (m.rows(), m.cols());
    if m.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("non-finite matrix entry".into()));
    }
    // A wide matrix is padded with zero rows so that the SVD returns a full V.
    let a = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m.matrix());
        p
    } else {
        m.matrix().clone()
    };
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let sv: Vec<T> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(T::zero());
    let threshold = tol_rel * smax;
    let ceil = lit::<T>(RANK_AMBIGUITY_CEIL).max(tol_rel) * smax;
    let rank = if smax == T::zero() { 0 } else { sv.iter().filter(|&&s| s > threshold).count() };
    if let Some(s) = sv.iter().find(|&&s| s > threshold && s <= ceil) {
        return Err(Error::Inconclusive(format!(
            "singular value {:e} lies in the ambiguity band ({:e}, {:e}]",
            to_f64(*s / smax),
            to_f64(tol_rel),
            to_f64(ceil / smax)
        )));
    }
    let kernel = order[rank..]
        .iter()
        .map(|&i| v_t.row(i).transpose().map(|z| z.conj()))
        .collect();
    let smallest_kept_rel = if rank > 0 { sv[rank - 1] / smax } else { T::zero() };
    let largest_dropped_rel = if rank < sv.len() && smax > T::zero() { sv[rank] / smax } else { T::zero() };
    let mut singular_values = sv;
    singular_values.resize(cols, T::zero());
    Ok(RankInfo { rank, kernel, singular_values, threshold, smallest_kept_rel, largest_dropped_rel })
}

/// Eigenvalues (and, when available, eigenvectors) sorted by descending
/// real part, ties by descending imaginary part.
#[derive(Clone, Debug)]
pub struct SpectralResult<T: Real> {
    pub eigenvalues: Vec<C<T>>,
    pub eigenvectors: Option<Vec<CVector<T>>>,
    /// `|λ_i − λ_{i+1}|` for consecutive sorted eigenvalues.
    pub degeneracy_gaps: Vec<T>,
}

/// Relative distance below which two eigenvalues count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[allow(dead_code)]
fn degenerate<T: Real>(a: C<T>, b: C<T>, tol: T) -> bool {
    abs_c(a - b) < tol * T::one().max(abs_c(a))
}

impl<T: Real> SpectralResult<T> {
    fn assemble(mut pairs: Vec<(C<T>, Option<CVector<T>>)>) -> Self {
        pairs.sort_by(|x, y| y.0.re.partial_cmp(&x.0.re).unwrap_or(std::cmp::Ordering::Equal));
        // Tie groups: consecutive values whose real parts agree to the
        // degeneracy tolerance are reordered by imaginary part.
        let tol = lit::<T>(DEGENERACY_TOL);
        let mut start = 0;
        while start < pairs.len() {
            let lead = pairs[start].0.re;
            let mut end = start + 1;
            while end < pairs.len() && (pairs[end].0.re - lead).abs() < tol * T::one().max(lead.abs()) {
                end += 1;
            }
            pairs[start..end].sort_by(|x, y| y.0.im.partial_cmp(&x.0.im).unwrap_or(std::cmp::Ordering::Equal));
            start = end;
        }
        let gaps = pairs.windows(2).map(|w| abs_c(w[0].0 - w[1].0)).collect();
        let has_vecs = pairs.iter().all(|p| p.1.is_some());
        let (vals, vecs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        SpectralResult {
            eigenvalues: vals,
            eigenvectors: if has_vecs { Some(vecs.into_iter().map(Option::unwrap).collect()) } else { None },
            degeneracy_gaps: gaps,
        }
    }

    /// Index and distance of the eigenvalue closest to `target`.
    pub fn nearest(&self, target: C<T>) -> Option<(usize, T)> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| (i, abs_c(l - target)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }

    /// Number of eigenvalues within `tol · max(1, |target|)` of `target`.
    pub fn multiplicity_near(&self, target: C<T>, tol: T) -> usize {
        let r = tol * T::one().max(abs_c(target));
        self.eigenvalues.iter().filter(|&&l| abs_c(l - target) < r).count()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Full spectrum of a square matrix of dimension at most [`DENSE_CAP`].
/// Hermitian input goes through the symmetric solver and returns
/// eigenvectors; general input returns eigenvalues only (use
/// [`eigenvector_for`] for specific vectors).
pub fn eig_dense<T: Real>(m: &DenseOperator<T>) -> Result<SpectralResult<T>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n > DENSE_CAP {
        return Err(Error::CapExceeded { dim: n, cap: DENSE_CAP });
    }
    if n == 0 {
        return Ok(SpectralResult { eigenvalues: vec![], eigenvectors: Some(vec![]), degeneracy_gaps: vec![] });
    }
    // Both iterations test deflation against an absolute epsilon, so a matrix
    // with tiny entries can stall; rescale by an exact power of two.
    let fro = to_f64(m.norm());
    if fro == 0.0 {
        let zero = C::new(T::zero(), T::zero());
        let pairs = (0..n).map(|i| (zero, Some(CVector::from_fn(n, |j, _| if i == j { creal(T::one()) } else { zero })))).collect();
        return Ok(SpectralResult::assemble(pairs));
    }
    let k = -fro.log2().round() as i32;
    let up = creal(lit::<T>(2f64.powi(k)));
    let down = creal(lit::<T>(2f64.powi(-k)));
    let max_iter = 1000 * n;
    if m.hermiticity_residual() <= lit::<T>(100.0) * eps::<T>() {
        let h = (m.matrix() + m.matrix().adjoint()).map(|z| z * creal(lit::<T>(0.5)) * up);
        let e = nalgebra::SymmetricEigen::try_new(h, eps::<T>(), max_iter)
            .ok_or(Error::NoConvergence { iterations: max_iter, best_residual: f64::NAN })?;
        let pairs = (0..n)
            .map(|i| (creal(e.eigenvalues[i]) * down, Some(e.eigenvectors.column(i).into_owned())))
            .collect();
        return Ok(SpectralResult::assemble(pairs));
    }
    // General matrices go through faer's Hessenberg QR, which carries the
    // exceptional shifts nalgebra's complex Schur lacks (it stalls on some
    // strongly non-normal transfer matrices).
    let scaled = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = m.get(i, j) * up;
        faer::c64::new(to_f64(z.re), to_f64(z.im))
    });
    let vals = scaled
        .eigenvalues()
        .map_err(|_| Error::NoConvergence { iterations: max_iter, best_residual: f64::NAN })?;
    Ok(SpectralResult::assemble(vals.iter().map(|v| (cplx(lit::<T>(v.re), lit::<T>(v.im)) * down, None)).collect()))
}

/// Eigenvector for an (approximate) eigenvalue by shifted inverse iteration.
/// Returns a unit vector and its residual `‖Mv − λv‖ / ‖M‖_F`.
pub fn eigenvector_for<T: Real>(m: &CMatrix<T>, lambda: C<T>) -> Result<(CVector<T>, T)> {
    let n = m.nrows();
    if n != m.ncols() || n == 0 {
        return Err(Error::Dimension("eigenvector_for needs a non-empty square matrix".into()));
    }
    let norm = m.norm().max(tiny::<T>());
    // Offset the shift slightly so the factorisation stays regular.
    let delta = norm * lit::<T>(64.0) * eps::<T>();
    let shift = lambda + cplx(delta, delta);
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let lu = a.lu();
    let mut v = CVector::from_fn(n, |i, _| cplx(T::one(), lit::<T>(((i * 7919) % 97) as f64 / 97.0)));
    v /= creal(v.norm());
    for _ in 0..4 {
        let w = lu.solve(&v).ok_or_else(|| Error::Domain("singular shifted matrix".into()))?;
        let wn = w.norm();
        if !wn.is_finite() || wn == T::zero() {
            return Err(Error::Domain("inverse iteration broke down".into()));
        }
        v = w / creal(wn);
    }
    let res = (m * &v - &v * lambda).norm() / norm;
    Ok((v, res))
}

/// Which end of the spectrum [`eig_extreme`] targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    LargestReal,
    LargestMagnitude,
}

#[derive(Clone, Copy, Debug)]
pub struct ArnoldiOptions {
    /// Krylov subspace dimension per restart (capped by the problem size).
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Relative residual target `‖Ax − θx‖ ≤ tol·|θ|`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        ArnoldiOptions { krylov_dim: 40, max_restarts: 200, tol: 1e-11, seed: 0x5eed }
    }
}

/// Top-`k` eigenpairs of a matrix-free operator by explicitly restarted
/// Arnoldi with DGKS reorthogonalisation.
pub fn eig_extreme<T: Real, F>(apply: F, dim: usize, which: Which, k: usize, opts: ArnoldiOptions) -> Result<SpectralResult<T>>
where
    F: Fn(&CVector<T>) -> CVector<T>,
{
    if k == 0 || k > dim {
        return Err(Error::Dimension(format!("k = {k} for dimension {dim}")));
    }
    let m = opts.krylov_dim.max(2 * k + 2).min(dim);
    let tol = lit::<T>(opts.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start = CVector::from_fn(dim, |_, _| cplx(lit::<T>(rng.gen::<f64>() - 0.5), lit::<T>(rng.gen::<f64>() - 0.5)));
    start /= creal(start.norm());
    let mut best = f64::INFINITY;
    let zero = C::new(T::zero(), T::zero());

    for restart in 0..opts.max_restarts {
        let mut basis: Vec<CVector<T>> = vec![start.clone()];
        let mut h = CMatrix::<T>::zeros(m + 1, m);
        let mut steps = m;
        for j in 0..m {
            let mut w = apply(&basis[j]);
            // Two passes of classical Gram–Schmidt.
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = b.dotc(&w);
                    h[(i, j)] += c;
                    w -= b * c;
                }
            }
            let beta = w.norm();
            h[(j + 1, j)] = creal(beta);
            let scale = (0..=j).fold(T::zero(), |acc, i| acc + abs_c(h[(i, j)])).max(tiny::<T>());
            if beta <= scale * eps::<T>() * lit(16.0) {
                steps = j + 1;
                break;
            }
            basis.push(w / creal(beta));
        }
        let hm = h.view((0, 0), (steps, steps)).into_owned();
        let theta = eig_dense(&DenseOperator::new(hm.clone()))
            .map_err(|_| Error::NoConvergence { iterations: restart, best_residual: best })?
            .eigenvalues;
        let mut idx: Vec<usize> = (0..steps).collect();
        let key = |z: C<T>| match which {
            Which::LargestReal => z.re,
            Which::LargestMagnitude => abs_c(z),
        };
        idx.sort_by(|&a, &b| key(theta[b]).partial_cmp(&key(theta[a])).unwrap());
        let kk = k.min(steps);
        let mut pairs = Vec::with_capacity(kk);
        let mut worst = T::zero();
        let mut next = CVector::<T>::zeros(dim);
        for &i in idx.iter().take(kk) {
            let (s, _) = eigenvector_for(&hm, theta[i])?;
            let mut x = CVector::<T>::zeros(dim);
            for (c, b) in s.iter().zip(basis.iter()) {
                x += b * *c;
            }
            x /= creal(x.norm());
            let r = (apply(&x) - &x * theta[i]).norm() / abs_c(theta[i]).max(tiny::<T>());
            worst = worst.max(r);
            next += &x;
            pairs.push((theta[i], Some(x)));
        }
        best = best.min(to_f64(worst));
        if worst <= tol || steps < m && kk == k {
            return Ok(SpectralResult::assemble(pairs));
        }
        let nn = next.norm();
        start = if nn > T::zero() { next / creal(nn) } else { basis[0].clone() };
        if start.iter().all(|z| *z == zero) {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_restarts, best_residual: best })
}

/// `v^{⊗n}` as a plain vector.
pub fn kron_power<T: Real>(v: &CVector<T>, n: usize) -> CVector<T> {
    (1..n).fold(v.clone(), |acc, _| acc.kronecker(v))
}

/// Complex number from two reals (re-exported for downstream convenience).
pub fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Op = DenseOperator<f64>;

    fn rand_op(rows: usize, cols: usize, seed: u64) -> Op {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Op::from_fn(rows, cols, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn sigma3_on_first_site() {
        let m = kron_place(&pauli::<f64>(3), 1, 2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(m.max_abs(), 1.0);
    }

    #[test]
    fn spin_flip_on_second_site() {
        let m = kron_place(&pauli::<f64>(1), 2, 2).unwrap();
        let up_up = StateVector::<f64>::basis(2, 0);
        let out = m.apply(up_up.amplitudes());
        assert_eq!(out, StateVector::<f64>::basis(2, 1).into_amplitudes());
    }

    #[test]
    fn two_site_placement_factorises() {
        let s1 = pauli::<f64>(1);
        let pair = kron_place(&s1.kron(&s1), 1, 3).unwrap();
        let prod = &kron_place(&s1, 1, 3).unwrap() * &kron_place(&s1, 2, 3).unwrap();
        assert_eq!(pair, prod);
    }

    #[test]
    fn placement_is_validated() {
        assert!(kron_place(&pauli::<f64>(1), 0, 2).is_err());
        assert!(kron_place(&swap::<f64>(), 2, 2).is_err());
    }

    #[test]
    fn place_pair_agrees_with_kron() {
        let r = rand_op(4, 4, 3);
        let a = place_pair(&r, 1, 2, 3);
        let b = kron_place(&r, 2, 3).unwrap();
        assert!(a.rel_diff(&b) < 1e-15);
        // Non-adjacent slots: conjugate by a swap.
        let p = permutation::<f64>(2, 3).unwrap();
        let direct = place_pair(&r, 0, 2, 3);
        let via_swap = &(&p * &place_pair(&r, 0, 1, 3)) * &p;
        assert!(direct.rel_diff(&via_swap) < 1e-15);
    }

    #[test]
    fn in_place_pair_products() {
        let r = rand_op(4, 4, 5);
        let m = rand_op(8, 8, 6);
        let g = place_pair(&r, 0, 2, 3);
        let mut right = m.matrix().clone();
        right_mul_pair(&mut right, &entries16(&r), 0, 2, 3);
        assert!(Op::new(right).rel_diff(&(&m * &g)) < 1e-14);
        let mut left = m.matrix().clone();
        left_mul_pair(&mut left, &entries16(&r), 0, 2, 3);
        assert!(Op::new(left).rel_diff(&(&g * &m)) < 1e-14);
    }

    #[test]
    fn rotations() {
        assert!(rotation::<f64>(2, 0.0, 3).rel_diff(&Op::identity(8)) < 1e-16);
        let r = rotation::<f64>(1, 0.7, 3);
        let back = &r * &rotation(1, -0.7, 3);
        assert!(back.rel_diff(&Op::identity(8)) < 1e-15);
        // ℛ³(π)|↑↓⟩ = (i)(−i)|↑↓⟩ = |↑↓⟩.
        let v = rotation::<f64>(3, std::f64::consts::PI, 2).apply(StateVector::basis(2, 1).amplitudes());
        assert!((v[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn partial_traces() {
        let k = rand_op(2, 2, 9);
        let m = k.kron(&Op::identity(4));
        let t = partial_trace_aux(&m).unwrap();
        assert!(t.rel_diff(&Op::identity(4).scale(k.trace())) < 1e-15);
        let swap_tr = partial_trace_aux(&swap::<f64>()).unwrap();
        assert_eq!(swap_tr, Op::identity(2));
        let b = rand_op(4, 4, 10);
        let t = partial_trace_aux(&k.kron(&b)).unwrap();
        assert!(t.rel_diff(&b.scale(k.trace())) < 1e-14);
        let big = rand_op(16, 16, 11);
        assert!((partial_trace_aux(&big).unwrap().trace() - big.trace()).norm() < 1e-13);
    }

    #[test]
    fn partial_transpose_of_product_state() {
        let a = rand_op(2, 2, 12);
        let b = rand_op(4, 2, 13);
        let pt = partial_transpose_aux(&a.kron(&b)).unwrap();
        assert!(pt.rel_diff(&a.transpose().kron(&b)) < 1e-15);
    }

    #[test]
    fn rank_of_constructed_matrix() {
        let zero = Op::zeros(4, 4);
        let r = numeric_rank(&zero, None).unwrap();
        assert_eq!((r.rank, r.kernel.len()), (0, 4));
        let mut m = Op::zeros(8, 8);
        for s in 0..3 {
            m = &m + &(&rand_op(8, 1, 20 + s) * &rand_op(1, 8, 30 + s));
        }
        let r = numeric_rank(&m, None).unwrap();
        assert_eq!(r.rank, 3);
        for k in &r.kernel {
            assert!((m.apply(k)).norm() < 1e-12 * r.singular_values[0]);
        }
    }

    #[test]
    fn rank_of_wide_matrix_has_full_kernel() {
        let m = rand_op(3, 8, 40);
        let r = numeric_rank(&m, None).unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.kernel.len(), 5);
        for k in &r.kernel {
            assert!(m.apply(k).norm() < 1e-13);
        }
    }

    #[test]
    fn rank_ambiguity_band_is_inconclusive() {
        let m = Op::from_real_rows(2, 2, &[1.0, 0.0, 0.0, 1e-9]);
        assert!(matches!(numeric_rank(&m, None), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn dense_spectra() {
        let d = Op::from_real_rows(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let e: Vec<f64> = eig_dense(&d).unwrap().eigenvalues.iter().map(|z| z.re).collect();
        assert_eq!(e, vec![3.0, 2.0, 1.0]);
        let x = Op::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = eig_dense(&x).unwrap();
        assert!((e.eigenvalues[0].re - 1.0).abs() < 1e-15 && (e.eigenvalues[1].re + 1.0).abs() < 1e-15);
        let a = rand_op(16, 16, 50);
        let h = &a + &a.adjoint();
        let e = eig_dense(&h).unwrap();
        assert!(e.eigenvalues.iter().all(|z| z.im.abs() < 1e-12 * h.norm()));
        let vecs = e.eigenvectors.as_ref().unwrap();
        for (l, v) in e.eigenvalues.iter().zip(vecs) {
            assert!((h.apply(v) - v * *l).norm() < 1e-12 * h.norm());
        }
    }

    #[test]
    fn complex_pairs_ordered_by_imaginary_part() {
        // Rotation generator: eigenvalues ±i share real part 0.
        let m = Op::from_real_rows(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let e = eig_dense(&m).unwrap();
        assert!(e.eigenvalues[0].im > 0.0 && e.eigenvalues[1].im < 0.0);
    }

    #[test]
    fn dense_cap_enforced() {
        let m = Op::zeros(DENSE_CAP + 1, DENSE_CAP + 1);
        assert!(matches!(eig_dense(&m), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn arnoldi_on_diagonal() {
        let n = 200;
        let diag: Vec<f64> = (0..n).map(|i| if i == 0 { 5.0 } else if i == 1 { 3.0 } else { 1.0 / (i as f64) }).collect();
        let apply = |v: &CVector<f64>| CVector::from_fn(n, |i, _| v[i] * diag[i]);
        let r = eig_extreme(apply, n, Which::LargestReal, 2, ArnoldiOptions::default()).unwrap();
        assert!((r.eigenvalues[0].re - 5.0).abs() < 1e-10);
        assert!((r.eigenvalues[1].re - 3.0).abs() < 1e-10);
        assert!((r.degeneracy_gaps[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn arnoldi_agrees_with_dense_on_positive_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = Op::from_fn(64, 64, |_, _| c(rng.gen::<f64>(), 0.0));
        let dense = eig_dense(&a).unwrap().eigenvalues[0];
        let r = eig_extreme(|v: &CVector<f64>| a.apply(v), 64, Which::LargestMagnitude, 1, ArnoldiOptions::default()).unwrap();
        assert!((r.eigenvalues[0] - dense).norm() < 1e-9 * dense.norm());
    }

    #[test]
    fn covectors_do_not_conjugate() {
        let w = Covector::<f64>::from_slice(1, &[c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        let v = StateVector::<f64>::from_slice(1, &[c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(w.pair(&v), c(-1.0, 0.0));
        let s = StateVector::<f64>::from_slice(1, &[c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(s.inner(&v), c(1.0, 0.0));
    }

    #[test]
    fn inverse_iteration_recovers_eigenvector() {
        let a = rand_op(12, 12, 90);
        let e = eig_dense(&a).unwrap();
        let (v, res) = eigenvector_for(a.matrix(), e.eigenvalues[3]).unwrap();
        assert!(res < 1e-13, "{res}");
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn f32_operators() {
        let m = kron_place(&pauli::<f32>(2), 2, 3).unwrap();
        assert!(m.hermiticity_residual() < 1e-7);
        let e = eig_dense(&m).unwrap();
        assert!((e.eigenvalues[0].re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn eig_dense_is_scale_invariant() {
        let a = DenseOperator::<f64>::from_fn(24, 24, |i, j| C::new(((i * 31 + j * 17) % 13) as f64 / 13.0 + if j == i + 1 { 3.0 } else { 0.0 }, 0.0));
        let big = eig_dense(&a).unwrap().eigenvalues;
        for s in [1e-9, 1e-12, 1e7] {
            let small = eig_dense(&a.scale_re(s)).unwrap().eigenvalues;
            let d = spectra_gap(&big, &small, s);
            assert!(d < 1e-10, "scale {s}: {d}");
        }
    }

    fn spectra_gap(a: &[C<f64>], b: &[C<f64>], s: f64) -> f64 {
        let top = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        a.iter()
            .map(|x| b.iter().map(|y| (x * s - y).norm() / s).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
            / top
    }
}
