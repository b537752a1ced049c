//! Jacobi theta functions in the nome convention.
//!
//! With nome `q = e^{-s}`, `0 < q < 1`:
//!
//! ```text
//! ϑ1(z, q) = 2 Σ_{n≥0} (-1)^n q^{(n+1/2)^2} sin((2n+1) z)
//! ϑ2(z, q) = 2 Σ_{n≥0}        q^{(n+1/2)^2} cos((2n+1) z)
//! ϑ3(z, q) = 1 + 2 Σ_{n≥1}        q^{n^2} cos(2n z)
//! ϑ4(z, q) = 1 + 2 Σ_{n≥1} (-1)^n q^{n^2} cos(2n z)
//! ```
//!
//! The second argument is the nome itself; callers that need `ϑ(z, p²)` pass
//! [`Nome::squared`]. Derivatives are summed term by term.

use crate::error::{domain, Error, Result};
use crate::scalar::{cplx, lit, Real, C};

/// Relative truncation threshold for the series.
pub const TOL_THETA: f64 = 1e-16;
/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 64;

/// Elliptic nome `p = e^{-s}` with `0 < p < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nome<T: Real> {
    p: T,
    s: T,
}

impl<T: Real> Nome<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p > T::zero() && p < T::one()) {
            return Err(domain(format!("nome p = {p} outside (0, 1)")));
        }
        Ok(Nome { p, s: -p.ln() })
    }

    #[inline]
    pub fn p(&self) -> T {
        self.p
    }

    #[inline]
    pub fn s(&self) -> T {
        self.s
    }

    /// The nome `p²`, used by the weight and basis parameterisation.
    pub fn squared(&self) -> Self {
        Nome { p: self.p * self.p, s: self.s + self.s }
    }
}

/// Which of the four theta functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThetaIndex {
    One,
    Two,
    Three,
    Four,
}

impl ThetaIndex {
    pub fn new(j: u8) -> Result<Self> {
        match j {
            1 => Ok(ThetaIndex::One),
            2 => Ok(ThetaIndex::Two),
            3 => Ok(ThetaIndex::Three),
            4 => Ok(ThetaIndex::Four),
            _ => Err(domain(format!("theta index {j} not in 1..=4"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            ThetaIndex::One => 1,
            ThetaIndex::Two => 2,
            ThetaIndex::Three => 3,
            ThetaIndex::Four => 4,
        }
    }

    /// `ϑ_{5-α}` for a Pauli direction `α ∈ {1,2,3}`: the function paired
    /// with `σ^α` in the K-matrix and the boundary couplings.
    pub fn paired_with(alpha: usize) -> Self {
        match alpha {
            1 => ThetaIndex::Four,
            2 => ThetaIndex::Three,
            3 => ThetaIndex::Two,
            _ => panic!("Pauli direction {alpha} not in 1..=3"),
        }
    }
}

/// `ϑ_j(z, q)` for complex `z`.
pub fn theta<T: Real>(j: ThetaIndex, z: C<T>, q: Nome<T>) -> Result<C<T>> {
    series(j, z, q, 0)
}

/// `d^order/dz^order ϑ_j(z, q)`, `order ∈ {1, 2}`.
pub fn theta_deriv<T: Real>(j: ThetaIndex, z: C<T>, q: Nome<T>, order: u32) -> Result<C<T>> {
    if !(1..=2).contains(&order) {
        return Err(domain(format!("derivative order {order} not in 1..=2")));
    }
    series(j, z, q, order)
}

/// Real-argument fast path of [`theta`].
pub fn theta_re<T: Real>(j: ThetaIndex, x: T, q: Nome<T>) -> T {
    real_series(j, x, q, 0)
}

/// Real-argument fast path of [`theta_deriv`]; `order ≤ 2`.
pub fn theta_deriv_re<T: Real>(j: ThetaIndex, x: T, q: Nome<T>, order: u32) -> T {
    assert!(order <= 2, "derivative order {order} not supported");
    real_series(j, x, q, order)
}

/// Coefficient, frequency and "is sine" for term `n` of series `j`.
#[inline]
fn term<T: Real>(j: ThetaIndex, n: usize, s: T) -> (T, T, bool) {
    let two = lit::<T>(2.0);
    let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    match j {
        ThetaIndex::One | ThetaIndex::Two => {
            let h = lit::<T>(n as f64 + 0.5);
            let c = two * (-s * h * h).exp();
            let c = if j == ThetaIndex::One { sign * c } else { c };
            (c, lit(2.0 * n as f64 + 1.0), j == ThetaIndex::One)
        }
        ThetaIndex::Three | ThetaIndex::Four => {
            let m = lit::<T>(n as f64 + 1.0);
            let c = two * (-s * m * m).exp();
            // n counts from 0 but the cosine series starts at frequency 2.
            let c = if j == ThetaIndex::Four && n.is_multiple_of(2) { -c } else { c };
            (c, two * m, false)
        }
    }
}

#[inline]
fn constant<T: Real>(j: ThetaIndex, order: u32) -> T {
    match j {
        ThetaIndex::Three | ThetaIndex::Four if order == 0 => T::one(),
        _ => T::zero(),
    }
}

/// `d^order/dx^order` of `sin(kx)` or `cos(kx)`, as (sin kx, cos kx) weights.
#[inline]
fn deriv_weights<T: Real>(is_sin: bool, k: T, order: u32) -> (T, T) {
    // Returns (α, β) with the derivative equal to α sin(kx) + β cos(kx).
    match (is_sin, order) {
        (true, 0) => (T::one(), T::zero()),
        (true, 1) => (T::zero(), k),
        (true, _) => (-k * k, T::zero()),
        (false, 0) => (T::zero(), T::one()),
        (false, 1) => (-k, T::zero()),
        (false, _) => (T::zero(), -k * k),
    }
}

fn real_series<T: Real>(j: ThetaIndex, x: T, q: Nome<T>, order: u32) -> T {
    let tol = lit::<T>(TOL_THETA);
    let mut sum = constant::<T>(j, order);
    let mut scale = sum.abs();
    for n in 0..MAX_TERMS {
        let (c, k, is_sin) = term(j, n, q.s());
        let (a, b) = deriv_weights(is_sin, k, order);
        let bound = c.abs() * (a.abs() + b.abs());
        let kx = k * x;
        sum += c * (a * kx.sin() + b * kx.cos());
        scale += bound;
        if bound <= tol * scale {
            break;
        }
    }
    sum
}

fn series<T: Real>(j: ThetaIndex, z: C<T>, q: Nome<T>, order: u32) -> Result<C<T>> {
    if z.im == T::zero() {
        return Ok(cplx(real_series(j, z.re, q, order), T::zero()));
    }
    let y = z.im.abs();
    // The n-th term behaves like exp(-s n² + 2n|y|); it peaks near n = |y|/s.
    let peak = y / q.s();
    if !(peak < lit(MAX_TERMS as f64 / 2.0)) {
        return Err(non_convergent(j, z, q));
    }
    let tol = lit::<T>(TOL_THETA);
    let mut re = constant::<T>(j, order);
    let mut im = T::zero();
    let mut scale = re.abs();
    for n in 0..MAX_TERMS {
        let (c, k, is_sin) = term(j, n, q.s());
        let (a, b) = deriv_weights(is_sin, k, order);
        let (kx, ky) = (k * z.re, k * z.im);
        let (ch, sh) = (ky.cosh(), ky.sinh());
        // sin(kz) = sin kx cosh ky + i cos kx sinh ky
        // cos(kz) = cos kx cosh ky - i sin kx sinh ky
        let (s, co) = (kx.sin(), kx.cos());
        re += c * (a * s * ch + b * co * ch);
        im += c * (a * co * sh - b * s * sh);
        let bound = c.abs() * (a.abs() + b.abs()) * ch;
        scale += bound;
        if lit::<T>(n as f64) > peak && bound <= tol * scale {
            return Ok(cplx(re, im));
        }
    }
    Err(non_convergent(j, z, q))
}

fn non_convergent<T: Real>(j: ThetaIndex, z: C<T>, q: Nome<T>) -> Error {
    domain(format!(
        "theta_{} series does not converge in {MAX_TERMS} terms: |Im z| = {} too large for nome {}",
        j.index(),
        z.im.abs(),
        q.p()
    ))
}

/// Classical identities at nome `q`: Jacobi's derivative identity, the quartic
/// identity and the half-period shifts, each as a relative residual.
pub fn selftest_residuals<T: Real>(q: Nome<T>) -> [(&'static str, &'static str, T); 4] {
    use ThetaIndex::{Four, One, Three, Two};
    let z = T::zero();
    let th = |j, x| theta_re(j, x, q);
    let (t2, t3, t4) = (th(Two, z), th(Three, z), th(Four, z));
    let jac = theta_deriv_re(One, z, q, 1);
    let rel = |a: T, b: T| (a - b).abs() / b.abs().max(T::one());
    let pi = crate::scalar::pi::<T>();
    let xs = [lit::<T>(0.3), lit(0.9), lit(1.7)];
    let shift1 = xs.iter().map(|&x| rel(th(One, x + pi), -th(One, x))).fold(T::zero(), T::max);
    let shift4 = xs.iter().map(|&x| rel(th(Four, x + pi), th(Four, x))).fold(T::zero(), T::max);
    [
        ("theta jacobi identity", "ϑ1′(0) = ϑ2(0)ϑ3(0)ϑ4(0)", rel(jac, t2 * t3 * t4)),
        ("theta quartic identity", "ϑ3(0)^4 = ϑ2(0)^4 + ϑ4(0)^4", rel(t3.powi(4), t2.powi(4) + t4.powi(4))),
        ("theta1 half-period", "ϑ1(x+π) = −ϑ1(x)", shift1),
        ("theta4 half-period", "ϑ4(x+π) = ϑ4(x)", shift4),
    ]
}

pub fn selftest<T: Real>(q: Nome<T>) -> crate::report::Report {
    let recs = selftest_residuals(q)
        .into_iter()
        .map(|(name, cit, r)| crate::report::CheckRecord::below(name, cit, crate::scalar::to_f64(r), 1e-13))
        .collect::<Vec<_>>();
    crate::report::Report::from(recs).tag(&[("p", crate::scalar::to_f64(q.p()))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::creal;

    fn nome(p: f64) -> Nome<f64> {
        Nome::new(p).unwrap()
    }

    #[test]
    fn theta2_matches_high_precision_oracle() {
        // 50-digit evaluation of the defining series at z = 0.3, q = 0.25.
        let v = theta_re(ThetaIndex::Two, 0.3, nome(0.25));
        assert!((v - 1.406017278192195).abs() < 2e-15, "{v}");
    }

    #[test]
    fn theta1_is_odd() {
        for p in [0.1, 0.5, 0.9] {
            let q = nome(p);
            assert!((theta_re(ThetaIndex::One, 0.7, q) + theta_re(ThetaIndex::One, -0.7, q)).abs() < 1e-15);
        }
    }

    #[test]
    fn small_nome_limit() {
        let q = nome(1e-12);
        for z in [0.1, 1.3] {
            assert!((theta_re(ThetaIndex::Three, z, q) - 1.0).abs() < 1e-11);
            assert!((theta_re(ThetaIndex::Four, z, q) - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn jacobi_derivative_identity() {
        for p in [0.05, 0.2, 0.5, 0.8] {
            let q = nome(p);
            let lhs = theta_deriv_re(ThetaIndex::One, 0.0, q, 1);
            let rhs = theta_re(ThetaIndex::Two, 0.0, q)
                * theta_re(ThetaIndex::Three, 0.0, q)
                * theta_re(ThetaIndex::Four, 0.0, q);
            assert!((lhs / rhs - 1.0).abs() < 1e-12, "p={p}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn theta2_derivative_vanishes_at_origin() {
        let q = nome(0.4);
        assert_eq!(theta_deriv_re(ThetaIndex::Two, 0.0, q, 1), 0.0);
    }

    #[test]
    fn derivative_matches_richardson_difference() {
        let q = nome(0.3);
        let f = |x: f64| theta_re(ThetaIndex::One, x, q);
        let d = |h: f64| (f(0.5 + h) - f(0.5 - h)) / (2.0 * h);
        let h = 1e-3;
        let fd = (4.0 * d(h / 2.0) - d(h)) / 3.0;
        let an = theta_deriv_re(ThetaIndex::One, 0.5, q, 1);
        assert!((fd - an).abs() < 1e-10, "{fd} vs {an}");
    }

    #[test]
    fn complex_path_agrees_with_real_path_on_axis() {
        let q = nome(0.6);
        for j in 1..=4 {
            let j = ThetaIndex::new(j).unwrap();
            let z = cplx(0.37, 1e-300);
            let a = theta(j, z, q).unwrap();
            let b = theta_re(j, 0.37, q);
            assert!((a.re - b).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_argument_quasi_periodicity() {
        let q = nome(0.35);
        let z = cplx(0.3, 0.4);
        let a = theta(ThetaIndex::One, z, q).unwrap();
        let b = theta(ThetaIndex::One, z + creal(std::f64::consts::PI), q).unwrap();
        assert!((a + b).norm() < 1e-13);
    }

    #[test]
    fn huge_imaginary_part_is_a_domain_error() {
        let q = nome(0.9);
        let err = theta(ThetaIndex::Three, cplx(0.0, 50.0), q).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn nome_validation() {
        assert!(Nome::new(0.0).is_err());
        assert!(Nome::new(1.0).is_err());
        let q = nome(0.5);
        assert!((q.s() - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((q.squared().p() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn selftest_passes() {
        for p in [0.01, 0.2, 0.5, 0.8] {
            assert!(selftest(nome(p)).all_pass(), "p = {p}");
        }
    }

    #[test]
    fn f32_evaluation() {
        let q = Nome::<f32>::new(0.25).unwrap();
        let v = theta_re(ThetaIndex::Two, 0.3f32, q);
        assert!((v - 1.406_017_3).abs() < 1e-6);
    }
}
