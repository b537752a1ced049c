//! Lattice supersymmetry of the XYZ chain: local and global supercharges,
//! the theta basis of `V`, cohomology dimensions and the supersymmetry
//! singlet.

use crate::error::{domain, Error, Result};
use crate::linalg::{
    eig_dense, kron_place, numeric_rank, rotation, CVector, Covector, DenseOperator, StateVector, DENSE_CAP,
};
use crate::params::{y_roots, zeta_of_nome};
use crate::report::{CheckRecord, Report};
use crate::scalar::{abs_c, cplx, creal, lit, pi, to_f64, Real, C};
use crate::theta::{theta_deriv_re, theta_re, Nome, ThetaIndex};

use ThetaIndex::{Four, One, Three, Two};

/// Tolerance for the identities of the theta basis.
pub const TOL_BASIS: f64 = 1e-10;

/// `q : V → V ⊗ V` as a 4×2 matrix, together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSupercharge<T: Real> {
    pub matrix: DenseOperator<T>,
    pub zeta: T,
    pub y: C<T>,
}

fn column_op<T: Real>(up: [C<T>; 4], down: [C<T>; 4]) -> DenseOperator<T> {
    DenseOperator::from_fn(4, 2, |i, j| if j == 0 { up[i] } else { down[i] })
}

/// `q↑|↑⟩ = 0`, `q↑|↓⟩ = |↑↑⟩ − ζ|↓↓⟩`.
pub fn q_up<T: Real>(zeta: T) -> DenseOperator<T> {
    let (o, z) = (creal(T::one()), creal(T::zero()));
    column_op([z; 4], [o, z, z, -creal(zeta)])
}

/// `q↓|↑⟩ = |↓↓⟩ − ζ|↑↑⟩`, `q↓|↓⟩ = 0`.
pub fn q_down<T: Real>(zeta: T) -> DenseOperator<T> {
    let (o, z) = (creal(T::one()), creal(T::zero()));
    column_op([-creal(zeta), z, z, o], [z; 4])
}

/// `|φ⟩ = y(y²ζ − 1)|↑⟩ + (ζ − y²)|↓⟩`.
pub fn phi<T: Real>(zeta: T, y: C<T>) -> [C<T>; 2] {
    let y2 = y * y;
    [y * (y2 * zeta - creal(T::one())), creal(zeta) - y2]
}

/// `q_φ|ψ⟩ = |φ⟩ ⊗ |ψ⟩ + |ψ⟩ ⊗ |φ⟩`.
pub fn q_phi<T: Real>(zeta: T, y: C<T>) -> DenseOperator<T> {
    let f = phi(zeta, y);
    let z = creal(T::zero());
    // Column ↑: φ⊗|↑⟩ + |↑⟩⊗φ; column ↓: φ⊗|↓⟩ + |↓⟩⊗φ.
    column_op([f[0] + f[0], f[1], f[1], z], [z, f[0], f[0], f[1] + f[1]])
}

/// `q = (1 − y²ζ) q↑ + y(y² − ζ) q↓ + q_φ`.
pub fn local_supercharge<T: Real>(zeta: T, y: C<T>) -> LocalSupercharge<T> {
    let y2 = y * y;
    let one = creal(T::one());
    let m = &(&q_up(zeta).scale(one - y2 * zeta) + &q_down(zeta).scale(y * (y2 - creal(zeta)))) + &q_phi(zeta, y);
    LocalSupercharge { matrix: m, zeta, y }
}

impl<T: Real> LocalSupercharge<T> {
    /// `‖(q⊗1 − 1⊗q) q‖ / ‖q‖²`.
    pub fn coassociativity_residual(&self) -> T {
        let id = DenseOperator::identity(2);
        let d = &self.matrix.kron(&id) - &id.kron(&self.matrix);
        let n = self.matrix.norm();
        (&d * &self.matrix).norm() / (n * n)
    }
}

fn check_cap(dim: usize) -> Result<()> {
    if dim > DENSE_CAP {
        Err(Error::CapExceeded { dim, cap: DENSE_CAP })
    } else {
        Ok(())
    }
}

/// `𝔔 = Σ_{j=1}^L (−1)^j q_j : V^L → V^{L+1}`.
pub fn global_supercharge<T: Real>(q: &LocalSupercharge<T>, l: usize) -> Result<DenseOperator<T>> {
    if l == 0 {
        return Err(domain("chain length must be at least 1"));
    }
    check_cap(1 << (l + 1))?;
    let mut out = DenseOperator::zeros(1 << (l + 1), 1 << l);
    for j in 1..=l {
        let placed = kron_place(&q.matrix, j, l)?;
        out = if j % 2 == 0 { &out + &placed } else { &out - &placed };
    }
    Ok(out)
}

/// `‖𝔔_{L+1}𝔔_L‖ / (‖𝔔_{L+1}‖‖𝔔_L‖)` and the same for the adjoints.
pub fn nilpotency_residuals<T: Real>(q: &LocalSupercharge<T>, l: usize) -> Result<(T, T)> {
    let a = global_supercharge(q, l)?;
    let b = global_supercharge(q, l + 1)?;
    let scale = a.norm() * b.norm();
    let qq = (&b * &a).norm() / scale;
    let dd = (&a.adjoint() * &b.adjoint()).norm() / scale;
    Ok((qq, dd))
}

/// The states `|v_±⟩`, dual states `⟨w_±|` and the constants attached to them.
#[derive(Clone, Debug)]
pub struct ThetaBasis<T: Real> {
    pub q: Nome<T>,
    pub t: T,
    pub zeta: T,
    pub y: T,
    pub v_plus: StateVector<T>,
    pub v_minus: StateVector<T>,
    pub w_plus: Covector<T>,
    pub w_minus: Covector<T>,
    /// `d/dt |v_+⟩` at `t = π/2` (the only point where it is needed).
    pub vdot_plus: Option<StateVector<T>>,
    pub lambda_plus: C<T>,
    pub lambda_minus: C<T>,
    /// `d/dt Λ_+` at `t = π/2`.
    pub lambda_dot_plus: Option<C<T>>,
    pub kappa: T,
    /// Proportionality constants to the polynomial forms (only at `t = π/6`).
    pub c_plus: Option<C<T>>,
    pub c_minus: Option<C<T>>,
    pub d_plus: Option<C<T>>,
    pub d_minus: Option<C<T>>,
}

fn near<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() < lit(1e-12)
}

fn ket<T: Real>(up: T, down: T) -> StateVector<T> {
    StateVector::from_slice(1, &[creal(up), creal(down)]).expect("two amplitudes")
}

fn bra<T: Real>(up: T, down: T) -> Covector<T> {
    Covector::from_slice(1, &[creal(up), creal(down)]).expect("two coefficients")
}

/// `Λ_ε(t) = 2ε ϑ1(π/3,p²)ϑ4(0,p²)² / (ϑ4(π/3,p²)ϑ2(0,p)) · ϑ2(t+επ/3,p)/ϑ4(t,p²)³`
/// and, for `order = 1`, its `t`-derivative.
fn lambda_eps<T: Real>(q: Nome<T>, t: T, eps: T, order: u32) -> T {
    let q2 = q.squared();
    let third = pi::<T>() / lit(3.0);
    let z = T::zero();
    let t40 = theta_re(Four, z, q2);
    let pref = lit::<T>(2.0) * eps * theta_re(One, third, q2) * t40 * t40
        / (theta_re(Four, third, q2) * theta_re(Two, z, q));
    let num = theta_re(Two, t + eps * third, q);
    let den = theta_re(Four, t, q2);
    let den3 = den * den * den;
    if order == 0 {
        pref * num / den3
    } else {
        let dnum = theta_deriv_re(Two, t + eps * third, q, 1);
        let dden = theta_deriv_re(Four, t, q2, 1);
        pref * (dnum / den3 - lit::<T>(3.0) * num * dden / (den3 * den))
    }
}

pub fn theta_basis<T: Real>(q: Nome<T>, t: T) -> Result<ThetaBasis<T>> {
    let half_pi = pi::<T>() / lit(2.0);
    if !(t >= -lit::<T>(1e-12) && t <= half_pi + lit(1e-12)) {
        return Err(domain(format!("t = {t} outside [0, π/2]")));
    }
    let q2 = q.squared();
    let third = pi::<T>() / lit(3.0);
    let v = |e: T| ket(theta_re(Four, t + e * third, q2), theta_re(One, t + e * third, q2));
    let w = |e: T| bra(-e * theta_re(One, t - e * third, q2), e * theta_re(Four, t - e * third, q2));
    let (one, m_one) = (T::one(), -T::one());
    let zeta = zeta_of_nome(q);
    let y = crate::params::y_of_t(q, t);
    let at_half_pi = near(t, half_pi);
    let at_sixth = near(t, pi::<T>() / lit(6.0));

    let (vdot_plus, lambda_dot_plus) = if at_half_pi {
        let vd = ket(theta_deriv_re(Four, t + third, q2, 1), theta_deriv_re(One, t + third, q2, 1));
        (Some(vd), Some(creal(lambda_eps(q, t, one, 1))))
    } else {
        (None, None)
    };

    let (c_plus, c_minus, d_plus, d_minus) = if at_sixth {
        let th3 = theta_re(Three, third, q2);
        let cp = (T::one() - zeta * zeta).powf(lit(-2.0 / 3.0)) / y * th3;
        let cm = th3;
        let dp = zeta * (y * y - T::one()) * cp * cp;
        let dm = zeta * (y * y - T::one()) / (y * (zeta - T::one())) * cm * cm;
        (Some(creal(cp)), Some(creal(cm)), Some(creal(dp)), Some(creal(dm)))
    } else {
        (None, None, None, None)
    };

    Ok(ThetaBasis {
        q,
        t,
        zeta,
        y,
        v_plus: v(one),
        v_minus: v(m_one),
        w_plus: w(one),
        w_minus: w(m_one),
        vdot_plus,
        lambda_plus: creal(lambda_eps(q, t, one, 0)),
        lambda_minus: creal(lambda_eps(q, t, m_one, 0)),
        lambda_dot_plus,
        kappa: theta_re(Three, third, q) / theta_re(Three, T::zero(), q),
        c_plus,
        c_minus,
        d_plus,
        d_minus,
    })
}

impl<T: Real> ThetaBasis<T> {
    /// `⟨w_ε|v_ε⟩ = ϑ1(π/3, p) ϑ2(t, p)`.
    pub fn pairing(&self) -> T {
        theta_re(One, pi::<T>() / lit(3.0), self.q) * theta_re(Two, self.t, self.q)
    }

    pub fn v(&self, eps: i8) -> &StateVector<T> {
        if eps > 0 {
            &self.v_plus
        } else {
            &self.v_minus
        }
    }

    pub fn w(&self, eps: i8) -> &Covector<T> {
        if eps > 0 {
            &self.w_plus
        } else {
            &self.w_minus
        }
    }

    pub fn lambda(&self, eps: i8) -> C<T> {
        if eps > 0 {
            self.lambda_plus
        } else {
            self.lambda_minus
        }
    }
}

fn vec_rel<T: Real>(a: &CVector<T>, b: &CVector<T>) -> T {
    (a - b).norm() / a.norm().max(b.norm()).max(crate::scalar::tiny::<T>())
}

/// Certifies the action of `q` on the theta basis and its dual.
pub fn check_q_on_basis<T: Real>(q: &LocalSupercharge<T>, basis: &ThetaBasis<T>) -> Report {
    let tol = TOL_BASIS;
    let mut r = Report::new();
    let pr = basis.pairing();
    for e in [1i8, -1] {
        let v = basis.v(e);
        let lhs = q.matrix.apply(v.amplitudes());
        let rhs = v.tensor(v).amplitudes() * basis.lambda(e);
        let scale = q.matrix.norm() * v.norm();
        let res = (&lhs - &rhs).norm() / scale;
        r.push(CheckRecord::below("q on v_eps", "q|v_ε⟩ = Λ_ε |v_ε⟩⊗|v_ε⟩", to_f64(res), tol).with("eps", e as f64));
        for e2 in [1i8, -1] {
            let pair = basis.w(e).pair(basis.v(e2));
            let want = if e == e2 { pr } else { T::zero() };
            // ϑ2(π/2, p) = 0, so normalise by the vectors rather than by the pairing.
            let res = abs_c(pair - creal(want)) / (basis.w(e).coeffs().norm() * basis.v(e2).norm());
            r.push(
                CheckRecord::below("dual pairing", "⟨w_ε|v_ε'⟩ = ϑ1(π/3,p)ϑ2(t,p) δ_εε'", to_f64(res), tol)
                    .with_all(&[("eps", e as f64), ("eps2", e2 as f64)]),
            );
            let ww = basis.w(e).tensor(basis.w(e2));
            let lhs = ww.compose(&q.matrix).expect("4-dim covector");
            let want = if e == e2 { basis.lambda(e) * creal(pr) } else { creal(T::zero()) };
            let rhs = basis.w(e).coeffs() * want;
            let scale = ww.coeffs().norm() * q.matrix.norm();
            let res = (lhs.coeffs() - &rhs).norm() / scale;
            r.push(
                CheckRecord::below("dual q action", "(⟨w_ε|⊗⟨w_ε'|) q = ϑ1ϑ2 Λ_ε δ_εε' ⟨w_ε|", to_f64(res), tol)
                    .with_all(&[("eps", e as f64), ("eps2", e2 as f64)]),
            );
        }
    }
    if let (Some(vd), Some(ld)) = (&basis.vdot_plus, basis.lambda_dot_plus) {
        let vp = &basis.v_plus;
        let lhs = q.matrix.apply(vd.amplitudes());
        let rhs = vp.tensor(vp).amplitudes() * ld
            + (vd.tensor(vp).amplitudes() + vp.tensor(vd).amplitudes()) * basis.lambda_plus;
        let res = (&lhs - &rhs).norm() / (q.matrix.norm() * vd.norm().max(vp.norm()));
        r.push(CheckRecord::below("q on vdot_plus", "q|v̇_+⟩ = Λ̇_+|v_+⟩⊗|v_+⟩ + Λ_+(|v̇_+⟩⊗|v_+⟩ + |v_+⟩⊗|v̇_+⟩) at t = π/2", to_f64(res), tol));
        let vm = &basis.v_minus;
        let res = vec_rel(vp.amplitudes(), vm.amplitudes());
        r.push(CheckRecord::below("v_minus equals v_plus", "|v_−⟩ = |v_+⟩ at t = π/2", to_f64(res), 1e-12));
        // Central difference of Λ_+ in t as an independent estimate of Λ̇_+.
        let h = lit::<T>(1e-5);
        let fd = (lambda_eps(basis.q, basis.t + h, T::one(), 0) - lambda_eps(basis.q, basis.t - h, T::one(), 0)) / (h + h);
        let res = (fd - ld.re).abs() / T::one().max(ld.re.abs());
        r.push(CheckRecord::below("lambda_dot finite difference", "Λ̇_+ = dΛ_+/dt at t = π/2", to_f64(res), 1e-8));
    }
    if let (Some(cp), Some(cm)) = (basis.c_plus, basis.c_minus) {
        let (y, z) = (basis.y, basis.zeta);
        let one = T::one();
        let prop = |got: &CVector<T>, bar: [T; 2], c: C<T>| {
            let want = CVector::from_vec(vec![creal(bar[0]) * c, creal(bar[1]) * c]);
            to_f64(vec_rel(got, &want))
        };
        let cit = "polynomial forms of |v_±⟩, |w_±⟩ at t = π/6";
        r.push(CheckRecord::below("v_plus polynomial form", cit, prop(basis.v_plus.amplitudes(), [y * (one - z * y * y), z - y * y], cp), tol));
        r.push(CheckRecord::below("v_minus polynomial form", cit, prop(basis.v_minus.amplitudes(), [one, -y], cm), tol));
        r.push(CheckRecord::below("w_plus polynomial form", cit, prop(basis.w_plus.coeffs(), [y, one], cm), tol));
        r.push(CheckRecord::below("w_minus polynomial form", cit, prop(basis.w_minus.coeffs(), [z - y * y, -y * (one - z * y * y)], cp), tol));
        let res = abs_c(basis.lambda_plus) / abs_c(basis.lambda_minus);
        r.push(CheckRecord::below("lambda_plus vanishes", "Λ_+ = 0 and Λ_− ≠ 0 at t = π/6", to_f64(res), 1e-11));
    }
    r
}

/// Dimensions of the cohomology of `𝔔` and of the homology of `𝔔†` on `V^L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CohomologyDims {
    pub upper: usize,
    pub lower: usize,
    /// Smallest singular value kept as nonzero, relative to the largest, over
    /// all rank decisions made.
    pub min_kept_rel: f64,
    /// Largest singular value treated as zero, relative to the largest.
    pub max_dropped_rel: f64,
}

/// `dim ℋ^L = dim ker 𝔔_L − rank 𝔔_{L−1}` and `dim ℋ_L = dim ker 𝔔†_{L−1} − rank 𝔔†_L`,
/// each rank computed by its own SVD.
pub fn cohomology_dims<T: Real>(q: &LocalSupercharge<T>, l: usize) -> Result<CohomologyDims> {
    let ql = global_supercharge(q, l)?;
    let mut kept = f64::INFINITY;
    let mut dropped = 0.0f64;
    let mut rank_of = |m: &DenseOperator<T>| -> Result<usize> {
        let info = numeric_rank(m, None)?;
        if info.rank > 0 {
            kept = kept.min(to_f64(info.smallest_kept_rel));
        }
        dropped = dropped.max(to_f64(info.largest_dropped_rel));
        Ok(info.rank)
    };
    let dim = 1usize << l;
    let rank_l = rank_of(&ql)?;
    let rank_l_adj = rank_of(&ql.adjoint())?;
    let (upper, lower) = if l == 1 {
        (dim - rank_l, dim - rank_l_adj)
    } else {
        let qm = global_supercharge(q, l - 1)?;
        let rank_m = rank_of(&qm)?;
        let rank_m_adj = rank_of(&qm.adjoint())?;
        (dim - rank_l - rank_m, dim - rank_m_adj - rank_l_adj)
    };
    Ok(CohomologyDims { upper, lower, min_kept_rel: kept, max_dropped_rel: dropped })
}

/// The zero-energy ground state of `H = 𝔔𝔔† + 𝔔†𝔔` at `t = π/6`.
#[derive(Clone, Debug)]
pub struct SingletData<T: Real> {
    pub l: usize,
    /// Unit norm, phase fixed so that `⟨w_+^{⊗L}|Ψ⟩ > 0`.
    pub psi: StateVector<T>,
    pub mu_l: C<T>,
    pub energy: T,
    /// Distance to the next eigenvalue of `H`.
    pub gap: T,
    /// `‖𝔔 Ψ‖` and `‖𝔔† Ψ‖` for unit `Ψ`.
    pub q_residual: T,
    pub qdag_residual: T,
    /// `⟨w_+^{⊗L}|Ψ⟩` for the phase-fixed unit `Ψ`.
    pub w_overlap: T,
}

/// Extracts the singlet from a dense eigensolve of `H`. `basis` must be the
/// theta basis at the same `(p, t = π/6)`; it fixes phase and `μ_L`.
pub fn singlet<T: Real>(
    q: &LocalSupercharge<T>,
    l: usize,
    h: &DenseOperator<T>,
    basis: &ThetaBasis<T>,
) -> Result<SingletData<T>> {
    if h.rows() != 1 << l {
        return Err(Error::Dimension(format!("H has dimension {} for L = {l}", h.rows())));
    }
    let spec = eig_dense(h)?;
    let vecs = spec.eigenvectors.as_ref().ok_or_else(|| domain("H is not Hermitian"))?;
    let n = spec.len();
    let energy = spec.eigenvalues[n - 1].re;
    let hnorm = spec.eigenvalues[0].re.abs().max(energy.abs());
    if energy.abs() > lit::<T>(1e-9) * hnorm {
        return Err(domain(format!("ground energy {energy} of H is not zero: no singlet at this point")));
    }
    let gap = if n > 1 { spec.eigenvalues[n - 2].re - energy } else { T::zero() };
    let w_l = basis.w_plus.tensor_power(l);
    let raw = StateVector::new(l, vecs[n - 1].clone())?;
    let s = w_l.pair(&raw);
    if abs_c(s) < lit::<T>(1e-12) {
        return Err(domain("ground state has no overlap with ⟨w_+|^{⊗L}"));
    }
    let psi = raw.scale(s.conj() / creal(abs_c(s))).normalized();
    let w_overlap = w_l.pair(&psi).re;
    // Normalise as |v_+⟩^{⊗L} + 𝔔|γ⟩, i.e. ⟨w_+^{⊗L}|Ψ⟩ = ⟨w_+|v_+⟩^L.
    let target = basis.w_plus.pair(&basis.v_plus).powu(l as u32);
    let psi_std = psi.scale(target / creal(w_overlap));
    let th = theta_re(One, pi::<T>() / lit(3.0), basis.q);
    let mu_l = basis.v_plus.tensor_power(l).inner(&psi_std) / creal(th.powi(2 * l as i32));
    let qg = global_supercharge(q, l)?;
    let q_residual = qg.apply(psi.amplitudes()).norm();
    let qdag_residual = if l == 1 {
        T::zero()
    } else {
        global_supercharge(q, l - 1)?.adjoint().apply(psi.amplitudes()).norm()
    };
    Ok(SingletData { l, psi, mu_l, energy, gap, q_residual, qdag_residual, w_overlap })
}

/// `|χ⟩ = |v_+⟩⊗|v_+⟩ − κ²|v_−⟩⊗|v_−⟩` and `⟨α| = ⟨w_+|⊗⟨w_+| + κ^{−1}⟨w_−|⊗⟨w_+|`.
#[derive(Clone, Debug)]
pub struct ChiAlpha<T: Real> {
    pub chi: StateVector<T>,
    pub alpha: Covector<T>,
    /// Residuals of `|χ⟩ = D_+|χ̄⟩` and `|α⟩ = D_−|ᾱ⟩`.
    pub chi_poly_residual: T,
    pub alpha_poly_residual: T,
}

pub fn chi_alpha<T: Real>(basis: &ThetaBasis<T>) -> Result<ChiAlpha<T>> {
    let (dp, dm) = match (basis.d_plus, basis.d_minus) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(domain("|χ⟩ and ⟨α| are defined at t = π/6 only")),
    };
    let k = basis.kappa;
    let vp = &basis.v_plus;
    let vm = &basis.v_minus;
    let chi = StateVector::new(2, vp.tensor(vp).amplitudes() - vm.tensor(vm).amplitudes() * creal(k * k))?;
    let wp = &basis.w_plus;
    let alpha = Covector::new(
        2,
        wp.tensor(wp).coeffs() + basis.w_minus.tensor(wp).coeffs() * creal(T::one() / k),
    )?;
    let (y, z) = (basis.y, basis.zeta);
    let one = T::one();
    let two = lit::<T>(2.0);
    let chi_bar = [y * y * (z - two + z * y * y), y * (y * y - one), y * (y * y - one), -(z + (z - two) * y * y)];
    let alpha_bar = [y, one, -y * y, -y];
    let mk = |b: [T; 4], c: C<T>| CVector::from_iterator(4, b.iter().map(|&x| creal(x) * c));
    Ok(ChiAlpha {
        chi_poly_residual: vec_rel(chi.amplitudes(), &mk(chi_bar, dp)),
        alpha_poly_residual: vec_rel(alpha.coeffs(), &mk(alpha_bar, dm)),
        chi,
        alpha,
    })
}

/// Checks for `|χ⟩`, `⟨α|` and the adjoint action on dual states at `t = π/6`.
pub fn check_chi_alpha<T: Real>(q: &LocalSupercharge<T>, basis: &ThetaBasis<T>) -> Report {
    let mut r = Report::new();
    let ca = match chi_alpha(basis) {
        Ok(ca) => ca,
        Err(e) => {
            r.push(CheckRecord::error("chi/alpha", "|χ⟩, ⟨α| at t = π/6", &e));
            return r;
        }
    };
    let cit = "polynomial forms of |χ⟩ and |α⟩";
    r.push(CheckRecord::below("chi polynomial form", cit, to_f64(ca.chi_poly_residual), TOL_BASIS));
    r.push(CheckRecord::below("alpha polynomial form", cit, to_f64(ca.alpha_poly_residual), TOL_BASIS));
    let ac = abs_c(ca.alpha.pair(&ca.chi)) / (ca.alpha.coeffs().norm() * ca.chi.norm());
    r.push(CheckRecord::above("alpha-chi pairing nonzero", "⟨α|χ⟩ ≠ 0", to_f64(ac), 1e-6));
    // 𝔔†(|w_ε⟩⊗|w_ε'⟩) = −ϑ1(π/3,p)² Λ_ε δ_εε' |w_ε⟩ with kets |w⟩ = ⟨w|†.
    let qd = match global_supercharge(q, 1) {
        Ok(m) => m.adjoint(),
        Err(e) => {
            r.push(CheckRecord::error("adjoint on dual states", "𝔔†|w_ε w_ε'⟩", &e));
            return r;
        }
    };
    let th = theta_re(One, pi::<T>() / lit(3.0), basis.q);
    for e in [1i8, -1] {
        for e2 in [1i8, -1] {
            let ket_ww = basis.w(e).tensor(basis.w(e2)).coeffs().map(|z| z.conj());
            let lhs = qd.apply(&ket_ww);
            let want = if e == e2 { -basis.lambda(e) * creal(th * th) } else { creal(T::zero()) };
            let rhs = basis.w(e).coeffs().map(|z| z.conj()) * want.conj();
            let res = (&lhs - &rhs).norm() / (qd.norm() * ket_ww.norm());
            r.push(
                CheckRecord::below("adjoint on dual states", "𝔔†(|w_ε⟩⊗|w_ε'⟩) = −ϑ1(π/3,p)² Λ_ε δ_εε' |w_ε⟩", to_f64(res), TOL_BASIS)
                    .with_all(&[("eps", e as f64), ("eps2", e2 as f64)]),
            );
        }
    }
    r
}

/// Covariance of the supercharge under `π` rotations:
/// `𝔔(ζ, y_α) ∝ ℛ^α(−π) 𝔔(ζ, y_0) ℛ^α(π)`. The proportionality constant is
/// fitted by least squares and recorded (`scale_re`, `scale_im`).
pub fn check_q_rotation<T: Real>(q: Nome<T>, l: usize) -> Report {
    let mut r = Report::new();
    let zeta = zeta_of_nome(q);
    let roots = match y_roots(zeta) {
        Ok(x) => x,
        Err(e) => {
            r.push(CheckRecord::error("supercharge rotation covariance", "𝔔(ζ,y_α) ∝ ℛ^α(−π)𝔔(ζ,y_0)ℛ^α(π)", &e));
            return r;
        }
    };
    let run = || -> Result<Report> {
        let mut r = Report::new();
        let q0 = global_supercharge(&local_supercharge(zeta, creal(roots.y0())), l)?;
        for alpha in 1..=3 {
            let qa = global_supercharge(&local_supercharge(zeta, creal(roots.rotated(alpha))), l)?;
            let rot = &(&rotation(alpha, -pi::<T>(), l + 1) * &q0) * &rotation(alpha, pi::<T>(), l);
            let s = rot.best_scalar_to(&qa);
            let res = qa.rel_diff(&rot.scale(s));
            r.push(
                CheckRecord::below("supercharge rotation covariance", "𝔔(ζ,y_α) = s·ℛ^α(−π)𝔔(ζ,y_0)ℛ^α(π), s ≠ 0", to_f64(res), 1e-10)
                    .with_all(&[("alpha", alpha as f64), ("scale_re", to_f64(s.re)), ("scale_im", to_f64(s.im))]),
            );
            r.push(CheckRecord::above("supercharge rotation scalar nonzero", "s ≠ 0", to_f64(abs_c(s)), 1e-8).with("alpha", alpha as f64));
        }
        Ok(r)
    };
    match run() {
        Ok(x) => r.extend(x),
        Err(e) => r.push(CheckRecord::error("supercharge rotation covariance", "𝔔(ζ,y_α) ∝ ℛ^α(−π)𝔔(ζ,y_0)ℛ^α(π)", &e)),
    }
    r
}

/// Convenience: the supercharge at `(ζ(p), y(t))`.
pub fn supercharge_at<T: Real>(q: Nome<T>, t: T) -> LocalSupercharge<T> {
    local_supercharge(zeta_of_nome(q), creal(crate::params::y_of_t(q, t)))
}

#[allow(dead_code)]
fn c<T: Real>(re: f64, im: f64) -> C<T> {
    cplx(lit(re), lit(im))
}

pub fn check_nilpotency<T: Real>(q: &LocalSupercharge<T>, l: usize) -> Report {
    let rec = match nilpotency_residuals(q, l) {
        Ok((qq, dd)) => vec![
            CheckRecord::below("supercharge nilpotent", "𝔔_{L+1}𝔔_L = 0", to_f64(qq), TOL_BASIS),
            CheckRecord::below("adjoint supercharge nilpotent", "𝔔_L†𝔔_{L+1}† = 0", to_f64(dd), TOL_BASIS),
        ],
        Err(e) => vec![CheckRecord::error("supercharge nilpotent", "𝔔_{L+1}𝔔_L = 0", &e)],
    };
    Report::from(rec).tag(&[("L", l as f64)])
}

/// Cohomology dimensions at `(p, t)`: `(1, 1)` when `t = π/6`, `(0, 0)` otherwise.
pub fn check_cohomology<T: Real>(q: Nome<T>, t: T, l: usize) -> Report {
    let at_root = (t - pi::<T>() / lit(6.0)).abs() < lit(1e-12);
    let want = usize::from(at_root);
    let cit = if at_root {
        "cohomology of 𝔔 and 𝔔† is one-dimensional at t = π/6"
    } else {
        "cohomology of 𝔔 and 𝔔† vanishes off t = π/6"
    };
    let rec = match cohomology_dims(&supercharge_at(q, t), l) {
        Ok(d) => CheckRecord::truth("cohomology dimensions", cit, d.upper == want && d.lower == want).with_all(&[
            ("upper", d.upper as f64),
            ("lower", d.lower as f64),
            ("expected", want as f64),
            ("min_kept_rel", d.min_kept_rel),
            ("max_dropped_rel", d.max_dropped_rel),
        ]),
        Err(e) => CheckRecord::error("cohomology dimensions", cit, &e),
    };
    Report::from(vec![rec]).tag(&[("L", l as f64), ("p", to_f64(q.p())), ("t", to_f64(t))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::susy_hamiltonian;
    use std::f64::consts::PI;

    fn nome(p: f64) -> Nome<f64> {
        Nome::new(p).unwrap()
    }

    #[test]
    fn trivial_point_reduces_to_q_up() {
        let q = local_supercharge(0.0, C::new(0.0, 0.0));
        assert_eq!(q.matrix, q_up(0.0));
        assert_eq!(q.matrix.get(0, 1), C::new(1.0, 0.0));
    }

    #[test]
    fn phi_components() {
        let f = phi(0.0f64, C::new(1.0, 0.0));
        assert_eq!(f, [C::new(-1.0, 0.0), C::new(-1.0, 0.0)]);
        let f = phi(0.5f64, C::new(0.3, 0.0));
        assert!((f[0].re - 0.3 * (0.09 * 0.5 - 1.0)).abs() < 1e-16);
        assert!((f[1].re - (0.5 - 0.09)).abs() < 1e-16);
    }

    #[test]
    fn coassociative_for_generic_parameters() {
        let q = local_supercharge(0.5, C::new(0.3, 0.1));
        assert!(q.coassociativity_residual() < 1e-12);
    }

    #[test]
    fn global_supercharge_basics() {
        let q = local_supercharge(0.5, C::new(0.3, 0.1));
        let q1 = global_supercharge(&q, 1).unwrap();
        assert_eq!(q1, -&q.matrix);
        for l in 1..=3 {
            let (a, b) = nilpotency_residuals(&q, l).unwrap();
            assert!(a < 1e-14 && b < 1e-14, "L={l}: {a} {b}");
        }
    }

    #[test]
    fn basis_identities() {
        for (p, t) in [(0.3, 0.4), (0.3, PI / 6.0), (0.2, 1.0), (0.5, PI / 2.0)] {
            let b = theta_basis(nome(p), t).unwrap();
            let q = supercharge_at(nome(p), t);
            let rep = check_q_on_basis(&q, &b);
            for rec in &rep.records {
                assert!(rec.passed(), "p={p} t={t}: {rec:?}");
            }
        }
    }

    #[test]
    fn special_points_populate_optional_fields() {
        let b = theta_basis(nome(0.3), PI / 2.0).unwrap();
        assert!(b.vdot_plus.is_some() && b.c_plus.is_none());
        let b = theta_basis(nome(0.3), PI / 6.0).unwrap();
        assert!(b.vdot_plus.is_none() && b.d_minus.is_some());
    }

    #[test]
    fn chi_alpha_at_singlet_point() {
        let b = theta_basis(nome(0.3), PI / 6.0).unwrap();
        let q = supercharge_at(nome(0.3), PI / 6.0);
        let rep = check_chi_alpha(&q, &b);
        assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
        assert!(chi_alpha(&theta_basis(nome(0.3), 0.4).unwrap()).is_err());
    }

    #[test]
    fn cohomology_branches() {
        let q = supercharge_at(nome(0.3), PI / 6.0);
        for l in 1..=4 {
            let d = cohomology_dims(&q, l).unwrap();
            assert_eq!((d.upper, d.lower), (1, 1), "L={l}");
        }
        let q = supercharge_at(nome(0.3), 0.4);
        for l in 1..=4 {
            let d = cohomology_dims(&q, l).unwrap();
            assert_eq!((d.upper, d.lower), (0, 0), "L={l}");
        }
    }

    #[test]
    fn singlet_for_small_chains() {
        let qn = nome(0.3);
        let b = theta_basis(qn, PI / 6.0).unwrap();
        let q = supercharge_at(qn, PI / 6.0);
        let h1 = susy_hamiltonian(&q, 1).unwrap();
        let s1 = singlet(&q, 1, &h1, &b).unwrap();
        let vp = b.v_plus.normalized();
        assert!((s1.psi.inner(&vp).norm() - 1.0).abs() < 1e-12);
        let h3 = susy_hamiltonian(&q, 3).unwrap();
        let s3 = singlet(&q, 3, &h3, &b).unwrap();
        assert!(s3.q_residual < 1e-9 && s3.qdag_residual < 1e-9);
        assert!(s3.mu_l.norm() > 1e-10);
        assert!(s3.w_overlap > 0.0);
    }

    #[test]
    fn singlet_absent_off_the_root() {
        let qn = nome(0.3);
        let b = theta_basis(qn, PI / 6.0).unwrap();
        let q = supercharge_at(qn, 0.4);
        let h = susy_hamiltonian(&q, 2).unwrap();
        assert!(matches!(singlet(&q, 2, &h, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn rotation_covariance_up_to_scalar() {
        let rep = check_q_rotation(nome(0.3), 2);
        assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn f32_supercharge() {
        let q = local_supercharge(0.5f32, C::new(0.3, 0.0));
        assert!(q.coassociativity_residual() < 1e-6);
    }
}
