//! The open XYZ chain with boundary fields, the supersymmetric Hamiltonian
//! `H = 𝔔𝔔† + 𝔔†𝔔`, the affine relation between the two, rotation
//! covariances and the ground-state certificate.

use crate::error::{Error, Result};
use crate::linalg::{eig_dense, kron_place, pauli, rotation, CVector, DenseOperator, StateVector, DENSE_CAP};
use crate::params::{ground_energy, j_of_zeta, lambda_of, susy_normalization, y_roots, zeta_of_nome, ChainCouplings};
use crate::report::{CheckRecord, Report};
use crate::scalar::{abs_c, cplx, creal, lit, pi, to_f64, Real, C};
use crate::susy::{global_supercharge, local_supercharge, LocalSupercharge};
use crate::theta::Nome;

/// Tolerance for the affine relation and rotation identities.
pub const TOL_HAMILTONIAN: f64 = 1e-10;
/// Absolute tolerance on the ground energy.
pub const TOL_ENERGY: f64 = 1e-9;

fn check_dim(l: usize, extra: usize) -> Result<()> {
    if l == 0 {
        return Err(crate::error::domain("chain length must be at least 1"));
    }
    let dim = 1usize.checked_shl((l + extra) as u32).unwrap_or(usize::MAX);
    if dim > DENSE_CAP {
        return Err(Error::CapExceeded { dim, cap: DENSE_CAP });
    }
    Ok(())
}

fn field<T: Real>(h: [C<T>; 3]) -> DenseOperator<T> {
    (1..=3).fold(DenseOperator::zeros(2, 2), |acc, a| &acc + &pauli::<T>(a).scale(h[a - 1]))
}

/// `−½ Σ_j Σ_α J_α σ^α_j σ^α_{j+1} + h_1 + h_L` with `h = Σ h_α σ^α`
/// (`2h` for `L = 1`), built from raw constants with no domain checks.
pub fn xyz_hamiltonian_raw<T: Real>(l: usize, j: [C<T>; 3], h: [C<T>; 3]) -> Result<DenseOperator<T>> {
    check_dim(l, 0)?;
    let hb = field(h);
    if l == 1 {
        return Ok(hb.scale_re(lit(2.0)));
    }
    let mut bond = DenseOperator::zeros(4, 4);
    for a in 1..=3 {
        let s = pauli::<T>(a);
        bond = &bond + &s.kron(&s).scale(j[a - 1] * creal(lit::<T>(-0.5)));
    }
    let mut out = &kron_place(&hb, 1, l)? + &kron_place(&hb, l, l)?;
    for site in 1..l {
        out = &out + &kron_place(&bond, site, l)?;
    }
    Ok(out)
}

/// `H_XYZ` with anisotropies `J_α` and equal boundary fields `λ_α` on sites 1 and `L`.
pub fn xyz_hamiltonian<T: Real>(l: usize, couplings: &ChainCouplings<T>) -> Result<DenseOperator<T>> {
    xyz_hamiltonian_raw(l, couplings.j.map(creal), couplings.lambda.map(creal))
}

/// `H_XYZ(ζ, y)` for any complex `ζ, y`: `J = (1+ζ, 1−ζ, (ζ²−1)/2)` and the
/// supersymmetric boundary fields, continued analytically in `y` and `ȳ`.
pub fn xyz_hamiltonian_zy<T: Real>(l: usize, zeta: T, y: C<T>) -> Result<DenseOperator<T>> {
    let j = j_of_zeta(zeta).map(creal);
    xyz_hamiltonian_raw(l, j, lambda_of(zeta, y).map(creal))
}

/// `H = 𝔔_L†𝔔_L + 𝔔_{L−1}𝔔_{L−1}†`, symmetrised to be exactly Hermitian.
pub fn susy_hamiltonian<T: Real>(q: &LocalSupercharge<T>, l: usize) -> Result<DenseOperator<T>> {
    check_dim(l, 1)?;
    let ql = global_supercharge(q, l)?;
    let mut h = &ql.adjoint() * &ql;
    if l > 1 {
        let qm = global_supercharge(q, l - 1)?;
        h = &h + &(&qm * &qm.adjoint());
    }
    Ok((&h + &h.adjoint()).scale_re(lit(0.5)))
}

/// Both Hamiltonians at one `(ζ, y)` and the constants of their affine relation.
#[derive(Clone, Debug)]
pub struct HamiltonianPair<T: Real> {
    pub h_xyz: DenseOperator<T>,
    pub h_susy: DenseOperator<T>,
    pub x: T,
    pub lambda0: T,
    pub l: usize,
}

impl<T: Real> HamiltonianPair<T> {
    pub fn new(l: usize, zeta: T, y: C<T>) -> Result<Self> {
        let norm = susy_normalization(zeta, y)?;
        Ok(HamiltonianPair {
            h_xyz: xyz_hamiltonian_zy(l, zeta, y)?,
            h_susy: susy_hamiltonian(&local_supercharge(zeta, y), l)?,
            x: norm.x,
            lambda0: norm.lambda0,
            l,
        })
    }

    /// `(L−1)(ζ²+3)/4 + 2λ0`.
    pub fn shift(&self, zeta: T) -> T {
        lit::<T>(self.l as f64 - 1.0) * (zeta * zeta + lit(3.0)) / lit(4.0) + self.lambda0 + self.lambda0
    }

    /// `‖H − x(H_XYZ + shift)‖ / ‖H‖`.
    pub fn affine_residual(&self, zeta: T) -> T {
        let n = self.h_xyz.rows();
        let rhs = (&self.h_xyz + &DenseOperator::identity(n).scale_re(self.shift(zeta))).scale_re(self.x);
        (&self.h_susy - &rhs).norm() / self.h_susy.norm()
    }
}

/// Affine relation between the supersymmetric Hamiltonian and `H_XYZ` at any
/// `(ζ, y)` with `x > 0`.
pub fn check_affine_at<T: Real>(l: usize, zeta: T, y: C<T>) -> Report {
    let cit = "H = x(H_XYZ + (L−1)(ζ²+3)/4 + 2λ0)";
    let tags = [("L", l as f64), ("zeta", to_f64(zeta)), ("y_re", to_f64(y.re)), ("y_im", to_f64(y.im))];
    let rep = match HamiltonianPair::new(l, zeta, y) {
        Ok(pair) => {
            let mut r = Report::new();
            r.push(CheckRecord::below("affine relation", cit, to_f64(pair.affine_residual(zeta)), TOL_HAMILTONIAN));
            r.push(CheckRecord::below(
                "hamiltonian hermiticity",
                "H_XYZ and H are Hermitian",
                to_f64(pair.h_xyz.hermiticity_residual().max(pair.h_susy.hermiticity_residual())),
                1e-12,
            ));
            r
        }
        Err(e) => Report::from(vec![CheckRecord::error("affine relation", cit, &e)]),
    };
    rep.tag(&tags)
}

pub fn check_prop21<T: Real>(l: usize, sp: &crate::params::SpectralPoint<T>) -> Report {
    check_affine_at(l, sp.zeta(), creal(sp.y()))
}

/// `ℛ^α(θ) H(ζ, y) ℛ^α(−θ)` for the six rotations, each compared with the
/// chain at the mapped parameters (built from raw constants).
pub fn check_rotations<T: Real>(l: usize, zeta: T, y: C<T>) -> Report {
    let one = creal(T::one());
    let i = cplx(T::zero(), T::one());
    let z = creal(zeta);
    let half = pi::<T>() / lit(2.0);
    let full = pi::<T>();
    // Complex-ζ version of `xyz_hamiltonian_zy`.
    let hx = |zeta: C<T>, y: C<T>| -> Result<DenseOperator<T>> {
        let j = [one + zeta, one - zeta, (zeta * zeta - one) / lit::<T>(2.0)];
        let ay = abs_c(y) * abs_c(y);
        let n = T::one() + ay;
        let h = [
            -(one + zeta) * y.re / n,
            -(one - zeta) * y.im / n,
            (zeta * zeta - one) / lit::<T>(4.0) * (T::one() - ay) / n,
        ];
        xyz_hamiltonian_raw(l, j, h)
    };
    let quarter = |x: C<T>| x * x / lit::<T>(4.0);
    let cases: [(usize, T, C<T>, C<T>, C<T>, &str); 6] = [
        (1, half, quarter(one + z), (creal(lit::<T>(3.0)) - z) / (one + z), (y - i) / (one - i * y), "ℛ¹(π/2): ((1+ζ)/2)² H((3−ζ)/(1+ζ), (y−i)/(1−iy))"),
        (2, half, quarter(one - z), (z + lit::<T>(3.0)) / (z - one), (one + y) / (one - y), "ℛ²(π/2): ((1−ζ)/2)² H((ζ+3)/(ζ−1), (1+y)/(1−y))"),
        (3, half, one, -z, -i * y, "ℛ³(π/2): H(−ζ, −iy)"),
        (1, full, one, z, one / y, "ℛ¹(π): H(ζ, 1/y)"),
        (2, full, one, z, -one / y, "ℛ²(π): H(ζ, −1/y)"),
        (3, full, one, z, -y, "ℛ³(π): H(ζ, −y)"),
    ];
    let mut rep = Report::new();
    let base = match hx(z, y) {
        Ok(h) => h,
        Err(e) => {
            rep.push(CheckRecord::error("rotation covariance", "ℛ^α H ℛ^α†", &e));
            return rep;
        }
    };
    for (alpha, angle, pref, z2, y2, cit) in cases {
        let rec = match hx(z2, y2) {
            Ok(target) => {
                let lhs = &(&rotation(alpha, angle, l) * &base) * &rotation(alpha, -angle, l);
                let res = lhs.rel_diff(&target.scale(pref));
                CheckRecord::below("rotation covariance", cit, to_f64(res), TOL_HAMILTONIAN)
            }
            Err(e) => CheckRecord::error("rotation covariance", cit, &e),
        };
        rep.push(rec.with_all(&[("alpha", alpha as f64), ("angle", to_f64(angle))]));
    }
    rep.tag(&[("L", l as f64), ("zeta", to_f64(zeta)), ("y_re", to_f64(y.re)), ("y_im", to_f64(y.im))])
}

/// Ground data of `H_XYZ(ζ, y)` together with the annihilation residuals of the
/// ground state under `𝔔(ζ, y)` and `𝔔†`.
#[derive(Clone, Debug)]
pub struct GroundState<T: Real> {
    pub energy: T,
    /// Gap to the next level (zero for `L = 0`).
    pub gap: T,
    pub psi: StateVector<T>,
    /// `max(‖𝔔_L Ψ‖, ‖𝔔_{L−1}† Ψ‖)` relative to `‖𝔔_L‖`.
    pub annihilation: T,
}

pub fn ground_state<T: Real>(l: usize, zeta: T, y: C<T>) -> Result<GroundState<T>> {
    let h = xyz_hamiltonian_zy(l, zeta, y)?;
    let spec = eig_dense(&h)?;
    let vecs = spec.eigenvectors.as_ref().ok_or_else(|| crate::error::domain("H_XYZ is not Hermitian"))?;
    let n = spec.len();
    let energy = spec.eigenvalues[n - 1].re;
    let gap = if n > 1 { spec.eigenvalues[n - 2].re - energy } else { T::zero() };
    let psi = StateVector::new(l, vecs[n - 1].clone())?;
    let q = local_supercharge(zeta, y);
    let ql = global_supercharge(&q, l)?;
    let mut ann = ql.apply(psi.amplitudes()).norm();
    if l > 1 {
        ann = ann.max(global_supercharge(&q, l - 1)?.adjoint().apply(psi.amplitudes()).norm());
    }
    Ok(GroundState { energy, gap, psi, annihilation: ann / ql.norm() })
}

/// Off-root values of `y` used as controls: `0, y0/2, 0.9 y0, 1.1 y0, (1+y0)/2`.
pub fn off_root_grid<T: Real>(y0: T) -> [T; 5] {
    [T::zero(), y0 / lit(2.0), lit::<T>(0.9) * y0, lit::<T>(1.1) * y0, (T::one() + y0) / lit(2.0)]
}

/// Ground-state certificate of the chain at the roots `y0` and `y1 = 1/y0`
/// and sampled off-root controls.
pub fn check_theorem1<T: Real>(l: usize, q: Nome<T>) -> Report {
    let zeta = zeta_of_nome(q);
    let e0 = ground_energy(l, zeta);
    let mut rep = Report::new();
    let cit = "E0 = −(L−1)(3+ζ²)/4 − (1+ζ)²/2 at y = y0";
    let roots = match y_roots(zeta) {
        Ok(r) => r,
        Err(e) => {
            rep.push(CheckRecord::error("ground energy", cit, &e));
            return rep;
        }
    };
    let y0 = roots.y0();
    match ground_state(l, zeta, creal(y0)) {
        Ok(g) => {
            rep.push(CheckRecord::below("ground energy", cit, to_f64((g.energy - e0).abs()), TOL_ENERGY).with("y", to_f64(y0)));
            if l > 0 && (1usize << l) > 1 {
                rep.push(
                    CheckRecord::above("ground state unique", "ground space of H_XYZ is one-dimensional at y = y0", to_f64(g.gap), 1e-6)
                        .with("y", to_f64(y0)),
                );
            }
            rep.push(
                CheckRecord::below("ground state annihilated", "𝔔Ψ = 𝔔†Ψ = 0 for the ground state at y = y0", to_f64(g.annihilation), TOL_ENERGY)
                    .with("y", to_f64(y0)),
            );
            // The rotated root: same energy, ground state ℛ¹(π)Ψ.
            match ground_state(l, zeta, creal(roots.rotated(1))) {
                Ok(g1) => {
                    rep.push(
                        CheckRecord::below("ground energy", "E0 at y = y1 = 1/y0", to_f64((g1.energy - e0).abs()), TOL_ENERGY)
                            .with("y", to_f64(roots.rotated(1))),
                    );
                    let rotated = rotation(1, pi::<T>(), l).apply(g.psi.amplitudes());
                    let ov = abs_c(g1.psi.amplitudes().dotc(&rotated));
                    rep.push(
                        CheckRecord::below("rotated singlet", "ground state at y1 is ℛ¹(±π)Ψ", to_f64((T::one() - ov).abs()), 1e-9)
                            .with("y", to_f64(roots.rotated(1))),
                    );
                }
                Err(e) => rep.push(CheckRecord::error("ground energy", "E0 at y = y1", &e)),
            }
        }
        Err(e) => rep.push(CheckRecord::error("ground energy", cit, &e)),
    }
    for y in off_root_grid(y0) {
        let cit = "sampled only-if: off the roots the ground state is not a singlet";
        let rec = match ground_state(l, zeta, creal(y)) {
            Ok(g) => {
                let de = (g.energy - e0).abs();
                let mut r = CheckRecord::above("off-root control", cit, to_f64(de), 1e-6)
                    .with_all(&[("y", to_f64(y)), ("annihilation", to_f64(g.annihilation))]);
                if !r.passed() && g.annihilation > lit(1e-4) {
                    r.status = crate::report::Status::Pass;
                }
                r
            }
            Err(e) => CheckRecord::error("off-root control", cit, &e),
        };
        rep.push(rec);
    }
    rep.tag(&[("L", l as f64), ("p", to_f64(q.p())), ("zeta", to_f64(zeta))])
}

/// Perron property of the ground state: with `λ = 1 + max_i Σ_j |H_ij|`, the
/// top eigenvector of `λ − H_XYZ` at `y = y0` has strictly positive components
/// after one overall phase. Returns `(min component, max |imaginary part|)`
/// of the unit, phase-fixed vector.
pub fn perron_components<T: Real>(l: usize, zeta: T, y: T) -> Result<(T, T)> {
    let h = xyz_hamiltonian_zy(l, zeta, creal(y))?;
    let m = h.matrix();
    let lam = (0..m.nrows())
        .map(|i| m.row(i).iter().fold(T::zero(), |s, z| s + abs_c(*z)))
        .fold(T::zero(), |a, b| a.max(b))
        + T::one();
    let shifted = &DenseOperator::identity(m.nrows()).scale_re(lam) - &h;
    let spec = eig_dense(&shifted)?;
    let v: &CVector<T> = &spec.eigenvectors.as_ref().expect("Hermitian")[0];
    let k = (0..v.len()).fold(0, |b, i| if abs_c(v[i]) > abs_c(v[b]) { i } else { b });
    let phase = v[k].conj() / creal(abs_c(v[k]));
    let w = v * phase;
    let min_re = w.iter().map(|z| z.re).fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
    let max_im = w.iter().map(|z| z.im.abs()).fold(T::zero(), |a, b| a.max(b));
    Ok((min_re, max_im))
}

pub fn check_perron<T: Real>(l: usize, q: Nome<T>) -> Report {
    let zeta = zeta_of_nome(q);
    let cit = "ground state of H_XYZ at y0 is a Perron vector up to a constant";
    let rec = match y_roots(zeta).and_then(|r| perron_components(l, zeta, r.y0())) {
        Ok((min_re, max_im)) => {
            let mut r = CheckRecord::above("perron ground state", cit, to_f64(min_re), 0.0).with("max_imag", to_f64(max_im));
            if max_im > lit(1e-12) {
                r.status = crate::report::Status::Fail;
            }
            r
        }
        Err(e) => CheckRecord::error("perron ground state", cit, &e),
    };
    Report::from(vec![rec]).tag(&[("L", l as f64), ("p", to_f64(q.p()))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron_power;
    use crate::params::SpectralPoint;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn single_site_is_twice_the_field() {
        let h = xyz_hamiltonian_zy(1, 0.5, c(0.3, 0.2)).unwrap();
        let lam = lambda_of(0.5, c(0.3, 0.2));
        let want = field(lam.map(creal)).scale_re(2.0);
        assert!(h.rel_diff(&want) < 1e-15);
    }

    #[test]
    fn two_sites_against_direct_assembly() {
        // ζ = 0, y = 0: J = (1, 1, −1/2), λ = (0, 0, −1/4).
        let h = xyz_hamiltonian_zy(2, 0.0, c(0.0, 0.0)).unwrap();
        let s = |a| pauli::<f64>(a);
        let id = DenseOperator::identity(2);
        let bond = &(&s(1).kron(&s(1)) + &s(2).kron(&s(2))) - &s(3).kron(&s(3)).scale_re(0.5);
        let fields = &s(3).kron(&id) + &id.kron(&s(3));
        let want = &bond.scale_re(-0.5) + &fields.scale_re(-0.25);
        assert!(h.rel_diff(&want) < 1e-15);
        let spec = eig_dense(&h).unwrap();
        let flip = rotation(1, PI, 2);
        let hf = &(&flip * &h) * &flip.adjoint();
        let spec_f = eig_dense(&hf).unwrap();
        for (a, b) in spec.eigenvalues.iter().zip(&spec_f.eigenvalues) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn real_y_gives_real_matrix() {
        let h = xyz_hamiltonian_zy(3, 0.4, c(0.3, 0.0)).unwrap();
        assert!(h.matrix().iter().all(|z| z.im == 0.0));
        assert!(h.hermiticity_residual() < 1e-15);
    }

    #[test]
    fn susy_hamiltonian_is_psd_and_commutes_with_q() {
        let q = local_supercharge(0.5, c(0.3, 0.1));
        let h1 = susy_hamiltonian(&q, 1).unwrap();
        let q1 = global_supercharge(&q, 1).unwrap();
        assert!(h1.rel_diff(&(&q1.adjoint() * &q1)) < 1e-15);
        for l in 1..=4 {
            let h = susy_hamiltonian(&q, l).unwrap();
            let hn = susy_hamiltonian(&q, l + 1).unwrap();
            let ql = global_supercharge(&q, l).unwrap();
            let comm = (&(&hn * &ql) - &(&ql * &h)).norm() / (hn.norm() * ql.norm());
            assert!(comm < 1e-12, "L={l}: {comm}");
            let spec = eig_dense(&h).unwrap();
            assert!(spec.eigenvalues.last().unwrap().re > -1e-10 * h.norm());
        }
    }

    #[test]
    fn affine_relation_on_a_grid_and_at_y_zero() {
        for l in 1..=4 {
            for (z, y) in [(0.5, c(0.3, 0.0)), (0.2, c(0.1, 0.4)), (0.8, c(-0.5, 0.2)), (0.3, c(0.0, 0.0))] {
                let r = check_affine_at(l, z, y);
                assert!(r.all_pass(), "{:?}", r.records);
            }
        }
        let n = susy_normalization(0.4, c(0.0, 0.0)).unwrap();
        assert!((n.x - 1.0).abs() < 1e-15 && (n.lambda0 - (1.0 + 3.0 * 0.16) / 4.0).abs() < 1e-15);
        let sp = SpectralPoint::<f64>::supersymmetric(0.3, 0.2).unwrap();
        assert!(check_prop21(3, &sp).all_pass());
    }

    #[test]
    fn rotations_hold() {
        for l in 1..=3 {
            let r = check_rotations(l, 0.5, c(0.3, 0.2));
            assert_eq!(r.records.len(), 6);
            assert!(r.all_pass(), "{:?}", r.records);
        }
    }

    #[test]
    fn rotation_by_pi_about_z_flips_y() {
        let a = eig_dense(&xyz_hamiltonian_zy(3, 0.5, c(0.3, 0.2)).unwrap()).unwrap();
        let b = eig_dense(&xyz_hamiltonian_zy(3, 0.5, c(-0.3, -0.2)).unwrap()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn ground_state_small_chains() {
        let q = Nome::new(0.3).unwrap();
        for l in 1..=5 {
            let r = check_theorem1(l, q);
            assert!(r.all_pass(), "L={l}: {:?}", r.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn perron_vector_at_root() {
        let q = Nome::new(0.3).unwrap();
        for l in 1..=5 {
            assert!(check_perron(l, q).all_pass());
        }
    }

    #[test]
    fn off_root_grid_avoids_roots() {
        let y0 = 0.4f64;
        for y in off_root_grid(y0) {
            assert!((y - y0).abs() > 1e-3);
        }
        let _ = kron_power(&CVector::<f64>::from_vec(vec![c(1.0, 0.0)]), 1);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(xyz_hamiltonian_zy(13, 0.5, c(0.3, 0.0)), Err(Error::CapExceeded { .. })));
        let q = local_supercharge(0.5, c(0.3, 0.0));
        assert!(matches!(susy_hamiltonian(&q, 12), Err(Error::CapExceeded { .. })));
    }
}
