//! Transfer-matrix behaviour against frozen values from an independent dense
//! implementation, plus the boundary cases of the public operations.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use susy8v_core::linalg::{eig_dense, CVector, StateVector};
use susy8v_core::params::{mu_of, weights, SpectralPoint};
use susy8v_core::susy::theta_basis;
use susy8v_core::transfer::*;
use susy8v_core::vertex::{k_pair_theta, KForm};
use susy8v_core::{Nome64, C};

fn nome(p: f64) -> Nome64 {
    Nome64::new(p).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// (L, Λ_L, top eigenvalue, second eigenvalue, tr 𝒯, 𝒯_00) at p = 0.3, u = 0.2.
const FROZEN: [(usize, f64, f64, f64, f64, f64); 4] = [
    (1, 2.60052588726200939, 2.60052588726200895, 0.428966154305038705, 3.02949204156704788, 1.58673274804850761),
    (2, 2.49155318327063036, 2.49155318327062902, 0.410990712497528388, 3.59754399179267903, 0.869164584984697619),
    (3, 2.38714688266456632, 2.38714688266456454, 0.455163112454718355, 4.44697210457745484, 0.488561262212449665),
    (4, 2.28711563440714816, 2.28711563440714993, 0.436089910621089649, 5.61252511593540859, 0.279431542707592684),
];

#[test]
fn frozen_homogeneous_spectra() {
    for (l, lam, top, second, tr, t00) in FROZEN {
        let spec = susy_spec(l, nome(0.3), 0.2).unwrap();
        let t = transfer_dense(&spec).unwrap();
        assert!(rel(lambda_formula(l, weights(&spec.sp), &spec.kpair), lam) < 1e-12, "L = {l}");
        let ev = eig_dense(&t).unwrap().eigenvalues;
        assert!(rel(ev[0].re, top) < 1e-12 && ev[0].im.abs() < 1e-12, "L = {l}");
        assert!(rel(ev[1].re, second) < 1e-10, "L = {l}");
        assert!(rel(t.trace().re, tr) < 1e-12, "L = {l}");
        assert!(rel(t.get(0, 0).re, t00) < 1e-12, "L = {l}");
    }
}

#[test]
fn frozen_inhomogeneous_value() {
    let inh = [0.05, -0.03, 0.07];
    let r = check_conjecture(3, nome(0.3), 0.2, &inh);
    assert!(r.all_pass(), "{:?}", r.records);
    assert!(rel(r.records[0].params["value"], 2.35362994368317713) < 1e-12);
    let sp = SpectralPoint::supersymmetric(0.3, 0.2).unwrap();
    let kp = k_pair_theta(&sp, mu_of(sp.q, sp.eta, C::new(sp.y(), 0.0))).unwrap();
    let t = transfer_dense(&TransferSpec::new(3, sp, kp, inh.to_vec()).unwrap()).unwrap();
    assert!(rel(t.trace().re, 4.38051475944144642) < 1e-12);
}

#[test]
fn single_site_closed_form() {
    let spec = susy_spec(1, nome(0.3), 0.2).unwrap();
    let t = transfer_dense(&spec).unwrap();
    let (a, b, c, d) = (t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1));
    let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
    let roots = [(a + d + disc) / 2.0, (a + d - disc) / 2.0];
    let lam = lambda_formula(1, weights(&spec.sp), &spec.kpair);
    assert!(roots.iter().any(|z| (z - lam).norm() / lam < 1e-12), "{roots:?} vs {lam}");
}

#[test]
fn single_site_lambda_is_dual_pairing_quotient() {
    let q = nome(0.3);
    let spec = susy_spec(1, q, 0.2).unwrap();
    let basis = theta_basis(q, PI / 6.0).unwrap();
    let t = transfer_dense(&spec).unwrap();
    let tv = StateVector::new(1, t.apply(basis.v_plus.amplitudes())).unwrap();
    let quotient = basis.w_plus.pair(&tv) / basis.w_plus.pair(&basis.v_plus);
    let lam = lambda_formula(1, weights(&spec.sp), &spec.kpair);
    assert!((quotient - lam).norm() / lam < 1e-12);
}

#[test]
fn transfer_family_commutes_on_four_points() {
    let sp = SpectralPoint::supersymmetric(0.3, 0.0).unwrap();
    let mu = mu_of(sp.q, sp.eta, C::new(sp.y(), 0.0));
    let grid = [-0.2, 0.05, 0.2, 0.45];
    let ts: Vec<_> = grid
        .iter()
        .map(|&u| {
            let s = sp.with_u(u);
            transfer_dense(&TransferSpec::homogeneous(4, s, k_pair_theta(&s, mu).unwrap()).unwrap()).unwrap()
        })
        .collect();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            assert!(commutator_residual(&ts[i], &ts[j]) < 1e-10, "{i} {j}");
        }
    }
}

#[test]
fn matrix_free_agrees_with_dense_at_every_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for l in 1..=8 {
        let spec = susy_spec(l, nome(0.2), 0.3).unwrap();
        let inh = TransferSpec::new(l, spec.sp, spec.kpair.clone(), random_inhomogeneities(l, l as u64)).unwrap();
        for s in [&spec, &inh] {
            let psi = CVector::from_fn(1 << l, |_, _| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let dense = transfer_dense(s).unwrap().apply(&psi);
            let free = TransferOperator::new(s).apply(&psi);
            assert!((&dense - &free).norm() / dense.norm() < 1e-11, "L = {l}");
        }
    }
}

#[test]
fn matrix_free_at_sixteen_sites() {
    let spec = susy_spec(16, nome(0.3), 0.2).unwrap();
    let psi = StateVector::new(16, CVector::from_element(1 << 16, C::new(1.0, 0.0))).unwrap();
    let t0 = Instant::now();
    let out = transfer_apply(&spec, &psi).unwrap();
    assert!(t0.elapsed().as_secs_f64() < 30.0);
    // The all-ones vector has positive overlap with every column of a positive matrix.
    assert!(out.amplitudes().iter().all(|z| z.re > 0.0));
    assert!(transfer_dense(&spec).is_err());
}

#[test]
fn zero_inhomogeneities_reproduce_the_homogeneous_eigenvalue() {
    for l in 1..=4 {
        let r = check_conjecture(l, nome(0.3), 0.2, &vec![0.0; l]);
        let value = r.records[0].params["value"];
        let cert = certify_theorem2(l, nome(0.3), 0.2).unwrap();
        assert!(r.all_pass());
        assert!(rel(value, cert.lambda_formula) < 1e-12, "L = {l}");
        assert_eq!(cert.form, KForm::WeightSpecialized);
    }
}

#[test]
fn telescoping_specialisation_u_equals_u1() {
    let u = 0.2;
    for l in 1..=4 {
        let mut inh = random_inhomogeneities(l, 99);
        inh[0] = u;
        let r = check_conjecture(l, nome(0.3), u, &inh);
        assert!(r.all_pass(), "L = {l}: {:?}", r.records);
    }
}

#[test]
fn rotated_roots_share_the_eigenvalue() {
    for l in 1..=5 {
        let r = check_transfer_rotations(l, nome(0.3), 0.2);
        assert!(r.all_pass(), "L = {l}: {:?}", r.failures().collect::<Vec<_>>());
    }
}

#[test]
fn matrix_free_dominance_at_twelve_sites() {
    let c = certify_theorem3(12, nome(0.3), 0.2, 5).unwrap();
    assert_eq!(c.method, "matrix-free");
    assert!(c.positivity.sampled);
    assert!(c.eigen.match_distance < 1e-8);
    assert!(c.report().all_pass(), "{c:?}");
}

#[test]
fn negative_controls() {
    for l in 1..=4 {
        let r = check_tq_commutation(l, nome(0.3), 0.2);
        let ctrl = r.records.iter().find(|x| x.check.contains("control")).unwrap();
        assert!(ctrl.passed() && ctrl.residual > 1e-4, "{ctrl:?}");
    }
    let (a, b, _) = two_site_reduction_residuals(nome(0.3), 0.2, 0.3).unwrap();
    assert!(a > 1e-5 && b > 1e-5);
}

#[test]
fn outside_positive_box_is_rejected() {
    for u in [0.0, -0.1, PI / 3.0, 1.2] {
        assert!(certify_theorem3(3, nome(0.3), u, 1).is_err(), "u = {u}");
    }
}
