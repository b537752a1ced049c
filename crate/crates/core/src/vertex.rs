//! Eight-vertex R-matrix, boundary K-matrices and the `A` operators that
//! intertwine the supercharge with the R-matrix.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::linalg::{kron_place, partial_transpose_aux, pauli, permutation, place_pair, DenseOperator};
use crate::params::{mu_of, weights, SpectralPoint, VertexWeights};
use crate::report::{CheckRecord, Report};
use crate::scalar::{abs2_c, abs_c, creal, lit, to_f64, Real, C};
use crate::susy::{local_supercharge, phi};
use crate::theta::{theta_deriv_re, theta_re, Nome, ThetaIndex};

/// Tolerance for the local identities checked here.
pub const TOL_VERTEX: f64 = 1e-10;

/// `R = [[a,0,0,d],[0,b,c,0],[0,c,b,0],[d,0,0,a]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix<T: Real> {
    pub matrix: DenseOperator<T>,
    pub weights: VertexWeights<T>,
}

pub fn r_matrix<T: Real>(w: VertexWeights<T>) -> RMatrix<T> {
    let z = T::zero();
    let VertexWeights { a, b, c, d } = w;
    let matrix = DenseOperator::from_real_rows(4, 4, &[a, z, z, d, z, b, c, z, z, c, b, z, d, z, z, a]);
    RMatrix { matrix, weights: w }
}

/// `R(u)` at the spectral parameter `u` of `sp` shifted to `u`.
pub fn r_at<T: Real>(sp: &SpectralPoint<T>, u: T) -> RMatrix<T> {
    r_matrix(weights(&sp.with_u(u)))
}

/// `u`-derivative of `R` at `sp.u`.
pub fn r_deriv<T: Real>(sp: &SpectralPoint<T>) -> DenseOperator<T> {
    r_matrix(crate::params::weight_derivatives(sp, 1)).matrix
}

/// `R_{0j}` on `V_0 ⊗ V^L` (auxiliary space first).
pub fn r0j<T: Real>(r: &DenseOperator<T>, j: usize, l: usize) -> DenseOperator<T> {
    place_pair(r, 0, j, l + 1)
}

/// Yang–Baxter residual for three given R-matrices
/// `‖R12 R13 R23 − R23 R13 R12‖ / ‖R12 R13 R23‖`.
pub fn ybe_residual_of<T: Real>(r12: &DenseOperator<T>, r13: &DenseOperator<T>, r23: &DenseOperator<T>) -> T {
    let (a, b, c) = (place_pair(r12, 0, 1, 3), place_pair(r13, 0, 2, 3), place_pair(r23, 1, 2, 3));
    let lhs = &(&a * &b) * &c;
    let rhs = &(&c * &b) * &a;
    (&lhs - &rhs).norm() / lhs.norm()
}

/// `R12(u−v) R13(u) R23(v) = R23(v) R13(u) R12(u−v)` at the nome and `η` of `sp`.
pub fn ybe_residual<T: Real>(sp: &SpectralPoint<T>, u: T, v: T) -> T {
    ybe_residual_of(&r_at(sp, u - v).matrix, &r_at(sp, u).matrix, &r_at(sp, v).matrix)
}

fn k_coeffs<T: Real>(q: Nome<T>, u: T, mu: [T; 3], deriv: bool) -> Result<[T; 3]> {
    let mut out = [T::zero(); 3];
    let t1 = theta_re(ThetaIndex::One, u, q);
    let d1 = theta_deriv_re(ThetaIndex::One, u, q, 1);
    for alpha in 1..=3 {
        let j = ThetaIndex::paired_with(alpha);
        let den = theta_re(j, u, q);
        if den.abs() < lit(1e-13) {
            return Err(domain(format!("ϑ{}(u, p) vanishes at u = {u}: K-matrix has a pole", j.index())));
        }
        out[alpha - 1] = if deriv {
            let dd = theta_deriv_re(j, u, q, 1);
            (d1 * den - t1 * dd) / (den * den) * mu[alpha - 1]
        } else {
            t1 / den * mu[alpha - 1]
        };
    }
    Ok(out)
}

fn from_coeffs<T: Real>(identity: T, k: [C<T>; 3]) -> DenseOperator<T> {
    (1..=3).fold(DenseOperator::identity(2).scale_re(identity), |acc, a| &acc + &pauli::<T>(a).scale(k[a - 1]))
}

/// `K(u) = 1 + Σ_α ϑ1(u,p)/ϑ_{5−α}(u,p) μ_α σ^α` at `u = sp.u`.
pub fn k_general<T: Real>(sp: &SpectralPoint<T>, mu: [T; 3]) -> Result<DenseOperator<T>> {
    Ok(from_coeffs(T::one(), k_coeffs(sp.q, sp.u, mu, false)?.map(creal)))
}

/// `dK/du` at `u = sp.u`.
pub fn k_general_deriv<T: Real>(sp: &SpectralPoint<T>, mu: [T; 3]) -> Result<DenseOperator<T>> {
    Ok(from_coeffs(T::zero(), k_coeffs(sp.q, sp.u, mu, true)?.map(creal)))
}

/// Residual of the reflection equation
/// `R12(u−v) K1(u) R12(u+v) K2(v) = K2(v) R12(u+v) K1(u) R12(u−v)`.
pub fn reflection_residual<T: Real>(sp: &SpectralPoint<T>, u: T, v: T, mu: [T; 3]) -> Result<T> {
    let ku = k_general(&sp.with_u(u), mu)?;
    let kv = k_general(&sp.with_u(v), mu)?;
    let id = DenseOperator::identity(2);
    let (k1, k2) = (ku.kron(&id), id.kron(&kv));
    let (rm, rp) = (r_at(sp, u - v).matrix, r_at(sp, u + v).matrix);
    let lhs = &(&(&rm * &k1) * &rp) * &k2;
    let rhs = &(&(&k2 * &rp) * &k1) * &rm;
    Ok((&lhs - &rhs).norm() / lhs.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KForm {
    ThetaGeneral,
    WeightSpecialized,
}

/// Boundary matrices `K^−` (left of the double row) and `K^+`.
#[derive(Clone, Debug, PartialEq)]
pub struct KPair<T: Real> {
    pub k_minus: DenseOperator<T>,
    pub k_plus: DenseOperator<T>,
    pub form: KForm,
}

impl<T: Real> KPair<T> {
    /// `tr(K^+ K^−)`.
    pub fn trace_product(&self) -> C<T> {
        (&self.k_plus * &self.k_minus).trace()
    }
}

/// `K^− = K(u)`, `K^+ = K(u + 2η)` with general `μ`.
pub fn k_pair_theta<T: Real>(sp: &SpectralPoint<T>, mu: [T; 3]) -> Result<KPair<T>> {
    Ok(KPair {
        k_minus: k_general(sp, mu)?,
        k_plus: k_general(&sp.with_u(sp.u + sp.eta + sp.eta), mu)?,
        form: KForm::ThetaGeneral,
    })
}

/// The theta-form pair with `μ` matched to the boundary fields at `y`.
pub fn k_pair_theta_at<T: Real>(sp: &SpectralPoint<T>, y: C<T>) -> Result<KPair<T>> {
    k_pair_theta(sp, mu_of(sp.q, sp.eta, y))
}

fn nonzero<T: Real>(x: T, name: &str) -> Result<T> {
    if !(x.abs() > crate::scalar::tiny::<T>()) {
        Err(domain(format!("denominator {name} vanishes")))
    } else {
        Ok(x)
    }
}

/// The K-matrices written in the vertex weights:
/// `K^− = 1 + k1 (ab+cd)/(ac+bd) σ¹ + k2 (ab−cd)/(ac−bd) σ² + k3 (b²−d²)/(2ab+b²+d²) σ³` and
/// `K^+ = 1 + k1 (ab+cd)/(ad+bc) σ¹ + k2 (ab−cd)/(bc−ad) σ² + k3 (b²−c²)/(2ab+b²+c²) σ³`,
/// where `k1 = 2Re y/(1+|y|²)`, `k2 = 2Im y/(1+|y|²)`, `k3 = (1−|y|²)/(1+|y|²)`.
pub fn k_pair_weights<T: Real>(w: VertexWeights<T>, y: C<T>) -> Result<KPair<T>> {
    let VertexWeights { a, b, c, d } = w;
    let two = lit::<T>(2.0);
    let ay = abs2_c(y);
    let n = T::one() + ay;
    let (k1, k2, k3) = (two * y.re / n, two * y.im / n, (T::one() - ay) / n);
    let (s, m) = (a * b + c * d, a * b - c * d);
    let km = [
        k1 * s / nonzero(a * c + b * d, "ac+bd")?,
        k2 * m / nonzero(a * c - b * d, "ac−bd")?,
        k3 * (b * b - d * d) / nonzero(two * a * b + b * b + d * d, "2ab+b²+d²")?,
    ];
    let kp = [
        k1 * s / nonzero(a * d + b * c, "ad+bc")?,
        k2 * m / nonzero(b * c - a * d, "bc−ad")?,
        k3 * (b * b - c * c) / nonzero(two * a * b + b * b + c * c, "2ab+b²+c²")?,
    ];
    Ok(KPair {
        k_minus: from_coeffs(T::one(), km.map(creal)),
        k_plus: from_coeffs(T::one(), kp.map(creal)),
        form: KForm::WeightSpecialized,
    })
}

/// Agreement of the weight-form pair with the theta-form pair at `(u, u+2η)`.
/// Each matrix is matched by one least-squares scalar, recorded as `scale_minus`/`scale_plus`.
pub fn check_k_forms<T: Real>(sp: &SpectralPoint<T>) -> Report {
    let cit = "weight-form K^± equal K(u), K(u+2η) up to an overall factor";
    let y = creal(sp.y());
    let run = || -> Result<CheckRecord> {
        let theta = k_pair_theta_at(sp, y)?;
        let wf = k_pair_weights(weights(sp), y)?;
        let sm = theta.k_minus.best_scalar_to(&wf.k_minus);
        let sp_ = theta.k_plus.best_scalar_to(&wf.k_plus);
        let res = wf.k_minus.rel_diff(&theta.k_minus.scale(sm)).max(wf.k_plus.rel_diff(&theta.k_plus.scale(sp_)));
        Ok(CheckRecord::below("K-matrix forms agree", cit, to_f64(res), TOL_VERTEX).with_all(&[
            ("scale_minus", to_f64(sm.re)),
            ("scale_plus", to_f64(sp_.re)),
        ]))
    };
    let rec = run().unwrap_or_else(|e| CheckRecord::error("K-matrix forms agree", cit, &e));
    Report::from(vec![rec]).tag(&[("p", to_f64(sp.q.p())), ("u", to_f64(sp.u)), ("t", to_f64(sp.t))])
}

/// `A : V → V ⊗ V`, the partner of the local supercharge in the local
/// intertwining relations.
#[derive(Clone, Debug, PartialEq)]
pub struct AOperator<T: Real> {
    pub matrix: DenseOperator<T>,
}

fn cols<T: Real>(up: [C<T>; 4], down: [C<T>; 4]) -> DenseOperator<T> {
    DenseOperator::from_fn(4, 2, |i, j| if j == 0 { up[i] } else { down[i] })
}

/// `(A↑, A↓, A_φ)` with
/// `A↑|↑⟩ = d(−(c/a)|↑↓⟩ + |↓↑⟩)`, `A↑|↓⟩ = c(|↑↑⟩ − (d/b)|↓↓⟩)`,
/// `A↓|↑⟩ = c(|↓↓⟩ − (d/b)|↑↑⟩)`, `A↓|↓⟩ = d(|↑↓⟩ − (c/a)|↓↑⟩)`,
/// `A_φ|↑⟩ = (2a+b)φ↑|↑↑⟩ + (a+2b)φ↓|↑↓⟩ + cφ↓|↓↑⟩ + dφ↑|↓↓⟩`,
/// `A_φ|↓⟩ = dφ↓|↑↑⟩ + cφ↑|↑↓⟩ + (a+2b)φ↑|↓↑⟩ + (2a+b)φ↓|↓↓⟩`.
pub fn a_parts<T: Real>(w: VertexWeights<T>, zeta: T, y: C<T>) -> Result<[DenseOperator<T>; 3]> {
    let VertexWeights { a, b, c, d } = w;
    if a == T::zero() || b == T::zero() {
        return Err(domain("A operators need a ≠ 0 and b ≠ 0"));
    }
    let r = creal::<T>;
    let z = r(T::zero());
    let (ca, db) = (c / a, d / b);
    let up = cols([z, r(-d * ca), r(d), z], [r(c), z, z, r(-c * db)]);
    let down = cols([r(-c * db), z, z, r(c)], [z, r(d), r(-d * ca), z]);
    let [fu, fd] = phi(zeta, y);
    let two = lit::<T>(2.0);
    let (p, q) = (r(two * a + b), r(a + two * b));
    let ap = cols([p * fu, q * fd, r(c) * fd, r(d) * fu], [r(d) * fd, r(c) * fu, q * fu, p * fd]);
    Ok([up, down, ap])
}

/// `A = (1 − y²ζ)A↑ + y(y² − ζ)A↓ + A_φ`.
pub fn a_operators<T: Real>(w: VertexWeights<T>, zeta: T, y: C<T>) -> Result<AOperator<T>> {
    let [up, down, ap] = a_parts(w, zeta, y)?;
    let y2 = y * y;
    let m = &(&up.scale(creal(T::one()) - y2 * zeta) + &down.scale(y * (y2 - creal(zeta)))) + &ap;
    Ok(AOperator { matrix: m })
}

/// `B_0^j : V_0 ⊗ V^L → V_0 ⊗ V^{L+1}` for a map `B : V_0 → V_0 ⊗ V`,
/// defined by `B_0^1 = B ⊗ 1` and `B_0^{j+1} = P_{j,j+1} B_0^j`.
pub fn insertion<T: Real>(b: &DenseOperator<T>, j: usize, l: usize) -> Result<DenseOperator<T>> {
    if j == 0 || j > l + 1 {
        return Err(domain(format!("insertion site {j} outside 1..={}", l + 1)));
    }
    let mut m = b.kron(&DenseOperator::identity(1 << l));
    for k in 1..j {
        // Swap of chain sites k, k+1 on V_0 ⊗ V^{L+1}: slots k, k+1 of L+2.
        let p = DenseOperator::identity(2).kron(&permutation(k, l + 1)?);
        m = &p * &m;
    }
    Ok(m)
}

/// The supercharge built with `ζ = cd/ab` from the weights and `y` of `sp`,
/// which on the supersymmetric slice is the chain's own `𝔔`.
fn supercharge_for<T: Real>(w: VertexWeights<T>, y: C<T>) -> DenseOperator<T> {
    local_supercharge(w.zeta(), y).matrix
}

/// Both local intertwining relations on `V_0 ⊗ V^L → V_0 ⊗ V^{L+1}` at site `j`:
/// `R_{0j}R_{0j+1}(1⊗q_j) + (a+b)(1⊗q_j)R_{0j} = R_{0j}A_0^{j+1} + A_0^j R_{0j}` and
/// `R_{0j+1}R_{0j}(1⊗q_j) + (a+b)(1⊗q_j)R_{0j} = R_{0j+1}A_0^j + A_0^{j+1}R_{0j}`.
pub fn a_relation_residuals<T: Real>(sp: &SpectralPoint<T>, l: usize, j: usize) -> Result<(T, T)> {
    if j == 0 || j > l {
        return Err(domain(format!("site {j} outside 1..={l}")));
    }
    let w = weights(sp);
    let y = creal(sp.y());
    let r = r_matrix(w).matrix;
    let a = a_operators(w, w.zeta(), y)?.matrix;
    let qj = DenseOperator::identity(2).kron(&kron_place(&supercharge_for(w, y), j, l)?);
    let ab = creal(w.a_plus_b());
    let (r_small, r_j, r_j1) = (r0j(&r, j, l), r0j(&r, j, l + 1), r0j(&r, j + 1, l + 1));
    let (a_j, a_j1) = (insertion(&a, j, l)?, insertion(&a, j + 1, l)?);
    let tail = (&qj * &r_small).scale(ab);

    let lhs = &(&(&r_j * &r_j1) * &qj) + &tail;
    let rhs = &(&r_j * &a_j1) + &(&a_j * &r_small);
    let lhs2 = &(&(&r_j1 * &r_j) * &qj) + &tail;
    let rhs2 = &(&r_j1 * &a_j) + &(&a_j1 * &r_small);
    Ok(((&lhs - &rhs).norm() / lhs.norm(), (&lhs2 - &rhs2).norm() / lhs2.norm()))
}

pub fn check_lemma31<T: Real>(sp: &SpectralPoint<T>, l: usize, j: usize) -> Report {
    let cit = "R_{0j}R_{0j+1}(1⊗q_j) + (a+b)(1⊗q_j)R_{0j} = R_{0j}A_0^{j+1} + A_0^jR_{0j} and the swapped form";
    let recs = match a_relation_residuals(sp, l, j) {
        Ok((r1, r2)) => vec![
            CheckRecord::below("local relation with A (first form)", cit, to_f64(r1), TOL_VERTEX),
            CheckRecord::below("local relation with A (second form)", cit, to_f64(r2), TOL_VERTEX),
        ],
        Err(e) => vec![CheckRecord::error("local relation with A", cit, &e)],
    };
    Report::from(recs).tag(&[
        ("L", l as f64),
        ("j", j as f64),
        ("p", to_f64(sp.q.p())),
        ("u", to_f64(sp.u)),
        ("eta", to_f64(sp.eta)),
    ])
}

/// Residuals of the boundary relations
/// `(a+b) A K^−_0 = R_{01} K^−_0 A` and
/// `(a+b) A^{t0} (K^+_0)^t = R_{01}^{t0} (K^+_0)^t A^{t0}`, with `A` built at
/// `y_a` and `K^±` in weight form at `y_k`. Both hold whenever `y_a = y_k`.
pub fn boundary_a_residuals<T: Real>(sp: &SpectralPoint<T>, y_a: C<T>, y_k: C<T>) -> Result<(T, T)> {
    let w = weights(sp);
    let a = a_operators(w, w.zeta(), y_a)?.matrix;
    let k = k_pair_weights(w, y_k)?;
    let r = r_matrix(w).matrix;
    let id = DenseOperator::identity(2);
    let ab = creal(w.a_plus_b());
    let lhs = (&a * &k.k_minus).scale(ab);
    let rhs = &(&r * &k.k_minus.kron(&id)) * &a;
    let at = partial_transpose_aux(&a)?;
    let rt = partial_transpose_aux(&r)?;
    let kt = k.k_plus.transpose();
    let lhs2 = (&at * &kt).scale(ab);
    let rhs2 = &(&rt * &kt.kron(&id)) * &at;
    Ok(((&lhs - &rhs).norm() / lhs.norm(), (&lhs2 - &rhs2).norm() / lhs2.norm()))
}

pub fn check_lemma32<T: Real>(sp: &SpectralPoint<T>) -> Report {
    let cit_a = "(a+b) A_0^1 K_0^− = R_{01} K_0^− A_0^1";
    let cit_b = "(a+b) (A_0^1)^{t0} (K_0^+)^t = R_{01}^{t0} (K_0^+)^t (A_0^1)^{t0}";
    let y = creal(sp.y());
    let recs = match boundary_a_residuals(sp, y, y) {
        Ok((r1, r2)) => vec![
            CheckRecord::below("boundary relation K-", cit_a, to_f64(r1), TOL_VERTEX),
            CheckRecord::below("boundary relation K+", cit_b, to_f64(r2), TOL_VERTEX),
        ],
        Err(e) => vec![CheckRecord::error("boundary relation", cit_a, &e)],
    };
    Report::from(recs).tag(&[("p", to_f64(sp.q.p())), ("u", to_f64(sp.u)), ("t", to_f64(sp.t))])
}

/// Unitarity-type sanity: `R(0) = a(0) P`.
pub fn r_at_zero_residual<T: Real>(sp: &SpectralPoint<T>) -> T {
    let r = r_at(sp, T::zero());
    let p = crate::linalg::swap::<T>().scale_re(r.weights.a);
    r.matrix.rel_diff(&p)
}

/// Largest entry magnitude of `K − K^t` off the Pauli pattern; zero for real `y`.
pub fn k_antisymmetric_part<T: Real>(k: &DenseOperator<T>) -> T {
    let d = k - &k.transpose();
    d.matrix().iter().fold(T::zero(), |m, z| m.max(abs_c(*z)))
}

pub fn check_ybe<T: Real>(sp: &SpectralPoint<T>, u: T, v: T) -> Report {
    let r = CheckRecord::below("yang-baxter equation", "R12(u−v)R13(u)R23(v) = R23(v)R13(u)R12(u−v)", to_f64(ybe_residual(sp, u, v)), TOL_VERTEX);
    Report::from(vec![r]).tag(&[("p", to_f64(sp.q.p())), ("eta", to_f64(sp.eta)), ("u", to_f64(u)), ("v", to_f64(v))])
}

pub fn check_reflection<T: Real>(sp: &SpectralPoint<T>, u: T, v: T, mu: [T; 3]) -> Report {
    let cit = "R12(u−v)K1(u)R12(u+v)K2(v) = K2(v)R12(u+v)K1(u)R12(u−v)";
    let r = match reflection_residual(sp, u, v, mu) {
        Ok(x) => CheckRecord::below("reflection equation", cit, to_f64(x), TOL_VERTEX),
        Err(e) => CheckRecord::error("reflection equation", cit, &e),
    };
    Report::from(vec![r]).tag(&[("p", to_f64(sp.q.p())), ("eta", to_f64(sp.eta)), ("u", to_f64(u)), ("v", to_f64(v))])
}

/// Negative control for the A relations: the same relations off the slice `η = π/3`.
pub fn check_a_relation_control<T: Real>(sp: &SpectralPoint<T>, l: usize, j: usize, eta: T) -> Report {
    let cit = "local relation with A fails for η ≠ π/3";
    let off = sp.with_eta(eta);
    let recs = match a_relation_residuals(&off, l, j) {
        Ok((r1, r2)) => vec![CheckRecord::above("local relation control off the slice", cit, to_f64(r1.max(r2)), 1e-5)],
        Err(e) => vec![CheckRecord::error("local relation control off the slice", cit, &e)],
    };
    Report::from(recs).tag(&[("L", l as f64), ("j", j as f64), ("p", to_f64(sp.q.p())), ("u", to_f64(sp.u)), ("eta", to_f64(eta))])
}

/// Boundary relations with `A` at the root but `K^±` at `scale·y`.
pub fn check_boundary_a_control<T: Real>(sp: &SpectralPoint<T>, scale: T) -> Report {
    let cit = "boundary relations fail when A and K± are built at different y";
    let y = creal(sp.y());
    let recs = match boundary_a_residuals(sp, y, y * creal(scale)) {
        Ok((r1, r2)) => vec![CheckRecord::above("boundary relation control with mismatched y", cit, to_f64(r1.min(r2)), 1e-5)],
        Err(e) => vec![CheckRecord::error("boundary relation control with mismatched y", cit, &e)],
    };
    Report::from(recs).tag(&[("p", to_f64(sp.q.p())), ("u", to_f64(sp.u)), ("y_scale", to_f64(scale))])
}
