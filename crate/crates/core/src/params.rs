//! Model parameters: the `(p, t) → (ζ, y)` map, vertex weights, roots of the
//! singlet polynomial, chain and boundary couplings.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::scalar::{abs2_c, creal, lit, pi, Real, C};
use crate::theta::{theta_deriv_re, theta_re, Nome, ThetaIndex};

use ThetaIndex::{Four, One};

/// One instance of the model in the theta parameterisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint<T: Real> {
    pub q: Nome<T>,
    /// Crossing parameter.
    pub eta: T,
    /// Spectral parameter.
    pub u: T,
    /// Real parameter in `[0, π/2]` fixing `y`.
    pub t: T,
    /// Overall weight scale.
    pub rho: T,
}

impl<T: Real> SpectralPoint<T> {
    pub fn new(p: T, eta: T, u: T, t: T, rho: T) -> Result<Self> {
        let q = Nome::new(p)?;
        let half_pi = pi::<T>() / lit(2.0);
        let slack = lit::<T>(1e-12);
        if !(t >= -slack && t <= half_pi + slack) {
            return Err(domain(format!("t = {t} outside [0, π/2]")));
        }
        if !(rho > T::zero()) {
            return Err(domain(format!("rho = {rho} must be positive")));
        }
        if !u.is_finite() || !eta.is_finite() {
            return Err(domain("non-finite u or eta"));
        }
        Ok(SpectralPoint { q, eta, u, t, rho })
    }

    /// `η = π/3`, `t = π/6`, `ρ = 1`: the point where the exact results hold.
    pub fn supersymmetric(p: T, u: T) -> Result<Self> {
        Self::new(p, pi::<T>() / lit(3.0), u, pi::<T>() / lit(6.0), T::one())
    }

    pub fn with_u(self, u: T) -> Self {
        SpectralPoint { u, ..self }
    }

    pub fn with_t(self, t: T) -> Result<Self> {
        Self::new(self.q.p(), self.eta, self.u, t, self.rho)
    }

    pub fn with_eta(self, eta: T) -> Self {
        SpectralPoint { eta, ..self }
    }

    pub fn with_rho(self, rho: T) -> Result<Self> {
        Self::new(self.q.p(), self.eta, self.u, self.t, rho)
    }

    /// `ζ` from the nome (valid on the `η = π/3` slice).
    pub fn zeta(&self) -> T {
        zeta_of_nome(self.q)
    }

    pub fn y(&self) -> T {
        y_of_t(self.q, self.t)
    }

    pub fn weights(&self) -> VertexWeights<T> {
        weights(self)
    }

    pub fn couplings(&self) -> ChainCouplings<T> {
        chain_couplings(self)
    }
}

/// The four eight-vertex weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VertexWeights<T: Real> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> VertexWeights<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        VertexWeights { a, b, c, d }
    }

    /// Relative residual of `(a²+ab)(b²+ab) = (c²+ab)(d²+ab)`.
    pub fn combined_weight_residual(&self) -> T {
        let VertexWeights { a, b, c, d } = *self;
        let ab = a * b;
        let lhs = (a * a + ab) * (b * b + ab);
        let rhs = (c * c + ab) * (d * d + ab);
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(crate::scalar::tiny::<T>())
    }

    /// `cd/ab`, which equals `ζ` on the supersymmetric slice.
    pub fn zeta(&self) -> T {
        self.c * self.d / (self.a * self.b)
    }

    pub fn a_plus_b(&self) -> T {
        self.a + self.b
    }

    pub fn scaled(&self, s: T) -> Self {
        VertexWeights { a: s * self.a, b: s * self.b, c: s * self.c, d: s * self.d }
    }
}

/// Couplings of the open XYZ chain and of its K-matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainCouplings<T: Real> {
    pub zeta: T,
    pub y: C<T>,
    /// Bulk anisotropies `(J1, J2, J3)`.
    pub j: [T; 3],
    /// Boundary fields `(λ1, λ2, λ3)`.
    pub lambda: [T; 3],
    /// K-matrix parameters `(μ1, μ2, μ3)`.
    pub mu: [T; 3],
}

/// Constants relating the supersymmetric Hamiltonian to `H_XYZ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SusyNormalization<T: Real> {
    pub x: T,
    pub lambda0: T,
}

/// `ζ = (ϑ1(2π/3, p²)/ϑ4(2π/3, p²))²`.
pub fn zeta_of_nome<T: Real>(q: Nome<T>) -> T {
    let q2 = q.squared();
    let z = lit::<T>(2.0) * pi::<T>() / lit(3.0);
    let r = theta_re(One, z, q2) / theta_re(Four, z, q2);
    r * r
}

/// `y = ϑ1(t, p²)/ϑ4(t, p²)`.
pub fn y_of_t<T: Real>(q: Nome<T>, t: T) -> T {
    let q2 = q.squared();
    theta_re(One, t, q2) / theta_re(Four, t, q2)
}

fn weights_at<T: Real>(sp: &SpectralPoint<T>, order: u32) -> VertexWeights<T> {
    let q2 = sp.q.squared();
    let two_eta = sp.eta + sp.eta;
    let th = |j: ThetaIndex, x: T| theta_re(j, x, q2);
    let dth = |j: ThetaIndex, x: T| theta_deriv_re(j, x, q2, order);
    // Each weight is ρ·f(2η)·g(u)·h(u+2η); only g and h depend on u.
    let w = |f: ThetaIndex, g: ThetaIndex, h: ThetaIndex| {
        let gu = th(g, sp.u);
        let hu = th(h, sp.u + two_eta);
        let uu = match order {
            0 => gu * hu,
            1 => dth(g, sp.u) * hu + gu * dth(h, sp.u + two_eta),
            _ => {
                let d1 = theta_deriv_re(g, sp.u, q2, 1) * theta_deriv_re(h, sp.u + two_eta, q2, 1);
                dth(g, sp.u) * hu + lit::<T>(2.0) * d1 + gu * dth(h, sp.u + two_eta)
            }
        };
        sp.rho * th(f, two_eta) * uu
    };
    VertexWeights {
        a: w(Four, Four, One),
        b: w(Four, One, Four),
        c: w(One, Four, Four),
        d: w(One, One, One),
    }
}

/// `a = ρϑ4(2η)ϑ4(u)ϑ1(u+2η)`, `b = ρϑ4(2η)ϑ1(u)ϑ4(u+2η)`,
/// `c = ρϑ1(2η)ϑ4(u)ϑ4(u+2η)`, `d = ρϑ1(2η)ϑ1(u)ϑ1(u+2η)`, all at nome `p²`.
pub fn weights<T: Real>(sp: &SpectralPoint<T>) -> VertexWeights<T> {
    weights_at(sp, 0)
}

/// `u`-derivatives of the weights, `order ∈ {1, 2}`.
pub fn weight_derivatives<T: Real>(sp: &SpectralPoint<T>, order: u32) -> VertexWeights<T> {
    assert!((1..=2).contains(&order));
    weights_at(sp, order)
}

/// The four real roots of `P(ζ, y) = ζ(1+y⁴) − (3−ζ²)y²`, ascending:
/// `[−1/y0, −y0, y0, 1/y0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YRoots<T: Real> {
    pub roots: [T; 4],
}

impl<T: Real> YRoots<T> {
    /// The root in `(0, 1)`.
    pub fn y0(&self) -> T {
        self.roots[2]
    }

    /// `y_α` obtained from `y0` by the rotation `ℛ^α(π)`:
    /// `y_1 = 1/y0`, `y_2 = −1/y0`, `y_3 = −y0`, and `y_0` for `α = 0`.
    pub fn rotated(&self, alpha: usize) -> T {
        match alpha {
            0 => self.roots[2],
            1 => self.roots[3],
            2 => self.roots[0],
            3 => self.roots[1],
            _ => panic!("rotation index {alpha} not in 0..=3"),
        }
    }
}

pub fn singlet_polynomial<T: Real>(zeta: T, y: T) -> T {
    let y2 = y * y;
    zeta * (T::one() + y2 * y2) - (lit::<T>(3.0) - zeta * zeta) * y2
}

pub fn y_roots<T: Real>(zeta: T) -> Result<YRoots<T>> {
    if !(zeta > T::zero() && zeta < T::one()) {
        return Err(domain(format!("zeta = {zeta} outside (0, 1)")));
    }
    // ζ w² − (3−ζ²) w + ζ = 0 in w = y²; the small root avoids cancellation.
    let b = lit::<T>(3.0) - zeta * zeta;
    let disc = (b * b - lit::<T>(4.0) * zeta * zeta).sqrt();
    let w_small = lit::<T>(2.0) * zeta / (b + disc);
    let y0 = w_small.sqrt();
    let y1 = T::one() / y0;
    Ok(YRoots { roots: [-y1, -y0, y0, y1] })
}

pub fn j_of_zeta<T: Real>(zeta: T) -> [T; 3] {
    [T::one() + zeta, T::one() - zeta, (zeta * zeta - T::one()) / lit(2.0)]
}

/// Boundary fields `λ_α` of the supersymmetric chain.
pub fn lambda_of<T: Real>(zeta: T, y: C<T>) -> [T; 3] {
    let ay = abs2_c(y);
    let n = T::one() + ay;
    [
        -(T::one() + zeta) * y.re / n,
        -(T::one() - zeta) * y.im / n,
        (zeta * zeta - T::one()) / lit(4.0) * (T::one() - ay) / n,
    ]
}

/// K-matrix parameters `μ_α` matched to the boundary fields.
pub fn mu_of<T: Real>(q: Nome<T>, eta: T, y: C<T>) -> [T; 3] {
    let ay = abs2_c(y);
    let n = T::one() + ay;
    let t1 = theta_re(One, eta, q);
    let two = lit::<T>(2.0);
    [
        theta_re(Four, eta, q) / t1 * two * y.re / n,
        theta_re(ThetaIndex::Three, eta, q) / t1 * two * y.im / n,
        theta_re(ThetaIndex::Two, eta, q) / t1 * (T::one() - ay) / n,
    ]
}

pub fn chain_couplings<T: Real>(sp: &SpectralPoint<T>) -> ChainCouplings<T> {
    let zeta = sp.zeta();
    let y = creal(sp.y());
    ChainCouplings {
        zeta,
        y,
        j: j_of_zeta(zeta),
        lambda: lambda_of(zeta, y),
        mu: mu_of(sp.q, sp.eta, y),
    }
}

/// `J_α = J ϑ_{5−α}(2η, p)/ϑ_{5−α}(0, p)` with `J = (ϑ4(0, p²)/ϑ4(2η, p²))²`,
/// the anisotropies produced by the logarithmic derivative of the transfer
/// matrix at general `η`.
pub fn theta_anisotropies<T: Real>(q: Nome<T>, eta: T) -> [T; 3] {
    let two_eta = eta + eta;
    let r = theta_re(Four, T::zero(), q.squared()) / theta_re(Four, two_eta, q.squared());
    let j = r * r;
    [1, 2, 3].map(|alpha| {
        let th = ThetaIndex::paired_with(alpha);
        j * theta_re(th, two_eta, q) / theta_re(th, T::zero(), q)
    })
}

pub fn susy_normalization<T: Real>(zeta: T, y: C<T>) -> Result<SusyNormalization<T>> {
    let ay = abs2_c(y);
    let re_y2 = y.re * y.re - y.im * y.im;
    let z2 = zeta * zeta;
    let den = T::one() + ay * ay + (z2 - T::one()) * ay - lit::<T>(2.0) * zeta * re_y2;
    let x = (T::one() + ay) * den;
    if !(x > T::zero()) {
        return Err(domain(format!("x = {x} is not positive: (zeta, y) outside the domain")));
    }
    let lambda0 = (T::one() + lit::<T>(3.0) * z2) / lit(4.0)
        - (z2 - T::one()) * ((lit::<T>(3.0) + z2) * ay - lit::<T>(4.0) * zeta * re_y2) / (lit::<T>(2.0) * den);
    Ok(SusyNormalization { x, lambda0 })
}

/// `E0 = −(L−1)(3+ζ²)/4 − (1+ζ)²/2`.
pub fn ground_energy<T: Real>(l: usize, zeta: T) -> T {
    let lm1 = lit::<T>(l as f64 - 1.0);
    let op = T::one() + zeta;
    -lm1 * (lit::<T>(3.0) + zeta * zeta) / lit(4.0) - op * op / lit(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn nome(p: f64) -> Nome<f64> {
        Nome::new(p).unwrap()
    }

    #[test]
    fn zeta_regression_and_limits() {
        assert!((zeta_of_nome(nome(0.3)) - 0.7576023913331009).abs() < 1e-14);
        assert!(zeta_of_nome(nome(1e-8)) < 1e-7);
        assert!(zeta_of_nome(nome(0.2)) < zeta_of_nome(nome(0.4)));
    }

    #[test]
    fn y_values() {
        assert_eq!(y_of_t(nome(0.4), 0.0), 0.0);
        // Series oracle at t = π/4, p = 0.2.
        assert!((y_of_t(nome(0.2), PI / 4.0) - 0.6314468335996722).abs() < 1e-14);
    }

    #[test]
    fn weights_vanish_at_zero() {
        let w = SpectralPoint::<f64>::supersymmetric(0.3, 0.0).unwrap().weights();
        assert_eq!(w.b, 0.0);
        assert_eq!(w.d, 0.0);
    }

    #[test]
    fn supersymmetric_slice_relations() {
        for (p, u) in [(0.3, 0.2), (0.05, 0.9), (0.7, -0.4)] {
            let sp = SpectralPoint::<f64>::supersymmetric(p, u).unwrap();
            let w = sp.weights();
            assert!(w.combined_weight_residual() < 1e-11);
            assert!((w.zeta() / sp.zeta() - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn roots_of_singlet_polynomial() {
        let r = y_roots(0.5f64).unwrap();
        // ζ=1/2: w² − 5.5w + 1 = 0 ⇒ w = (5.5 − √26.25)/2.
        let w = (5.5 - 26.25f64.sqrt()) / 2.0;
        assert!((r.y0() - w.sqrt()).abs() < 1e-15);
        assert!((r.roots[3] * r.y0() - 1.0).abs() < 1e-15);
        for y in r.roots {
            assert!(singlet_polynomial(0.5, y).abs() < 1e-12);
        }
        assert!(y_roots(1.0f64).is_err());
        assert!(y_roots(0.0f64).is_err());
    }

    #[test]
    fn theta_root_matches_algebraic_root() {
        let q = nome(0.3);
        let y0 = y_roots(zeta_of_nome(q)).unwrap().y0();
        assert!((y0 - y_of_t(q, PI / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn coupling_special_cases() {
        let sp = SpectralPoint::<f64>::supersymmetric(0.3, 0.2).unwrap();
        let c = sp.couplings();
        assert_eq!(c.lambda[1], 0.0);
        assert_eq!(c.mu[1], 0.0);
        assert!(((c.j[0] - c.j[1]) / 2.0 - c.zeta).abs() < 1e-15);
        let on_circle = lambda_of(0.4f64, C::new(0.6, 0.8));
        assert!(on_circle[2].abs() < 1e-16);
        let mu = mu_of(nome(0.3), PI / 3.0, C::new(0.6, 0.8));
        assert!(mu[2].abs() < 1e-15);
    }

    #[test]
    fn theta_form_of_anisotropies() {
        for p in [0.1, 0.3, 0.6] {
            let q = nome(p);
            let jt = theta_anisotropies(q, PI / 3.0);
            let j = j_of_zeta(zeta_of_nome(q));
            for k in 0..3 {
                assert!((jt[k] - j[k]).abs() < 1e-11, "p={p} α={}", k + 1);
            }
        }
    }

    #[test]
    fn normalization() {
        let n = susy_normalization(0.5f64, C::new(0.0, 0.0)).unwrap();
        assert_eq!(n.x, 1.0);
        assert!((n.lambda0 - (1.0 + 3.0 * 0.25) / 4.0).abs() < 1e-16);
        // Direct evaluation at ζ = 1/2, y = 0.3.
        let n = susy_normalization(0.5f64, C::new(0.3, 0.0)).unwrap();
        let den = 1.0 + 0.0081 - 0.75 * 0.09 - 0.09;
        assert!((n.x - 1.09 * den).abs() < 1e-15);
        let l0 = 0.4375 + 0.75 * (3.25 * 0.09 - 2.0 * 0.09) / (2.0 * den);
        assert!((n.lambda0 - l0).abs() < 1e-14);
    }

    #[test]
    fn ground_energy_values() {
        assert_eq!(ground_energy(1, 0.5f64), -1.125);
        assert_eq!(ground_energy(2, 0.5f64), -31.0 / 16.0);
        let d = ground_energy(7, 0.3f64) - ground_energy(6, 0.3f64);
        assert!((d + (3.0 + 0.09) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn weight_derivative_matches_difference() {
        let sp = SpectralPoint::<f64>::new(0.3, 0.8, 0.17, 0.4, 1.0).unwrap();
        let h = 1e-5;
        let wp = sp.with_u(sp.u + h).weights();
        let wm = sp.with_u(sp.u - h).weights();
        let d = weight_derivatives(&sp, 1);
        assert!(((wp.a - wm.a) / (2.0 * h) - d.a).abs() < 1e-8);
        assert!(((wp.d - wm.d) / (2.0 * h) - d.d).abs() < 1e-8);
        let w0 = sp.weights();
        let d2 = weight_derivatives(&sp, 2);
        assert!(((wp.b - 2.0 * w0.b + wm.b) / (h * h) - d2.b).abs() < 1e-4);
    }
}
