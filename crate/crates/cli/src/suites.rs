//! Suites as lists of independent tasks over the grid, and the parallel
//! runner that executes them in a fixed order.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use susy8v_core::hamiltonian::{check_perron, check_prop21, check_rotations, check_theorem1};
use susy8v_core::params::{weights, SpectralPoint};
use susy8v_core::report::{timed, CheckRecord, Report};
use susy8v_core::susy::{check_chi_alpha, check_cohomology, check_nilpotency, check_q_on_basis, check_q_rotation, supercharge_at, theta_basis};
use susy8v_core::theta::selftest;
use susy8v_core::transfer::{
    certify_theorem2, check_commutation, check_conjecture, check_lemmas_38_39, check_log_derivative, check_recurrence,
    check_theorem3, check_tq_commutation, check_transfer_rotations, random_inhomogeneities,
};
use susy8v_core::vertex::{
    check_k_forms, check_lemma31, check_a_relation_control, check_lemma32, check_boundary_a_control, check_reflection, check_ybe,
};
use susy8v_core::{Error, Nome64, C};

use crate::config::{Grid, RunConfig, Suite};

/// Inhomogeneity vectors drawn per `(p, u, L)` in the conjecture suite.
pub const CONJECTURE_SAMPLES: u64 = 10;
/// Off-slice anisotropy used by negative controls.
pub const CONTROL_ETA: f64 = 0.9;
/// Largest L for the log-derivative and rotation checks, which assemble
/// several dense matrices per point.
const HEAVY_MAX_L: usize = 6;

pub struct Task {
    pub label: String,
    run: Box<dyn Fn() -> Report + Send + Sync>,
}

impl Task {
    fn new(label: String, run: impl Fn() -> Report + Send + Sync + 'static) -> Self {
        Task { label, run: Box::new(run) }
    }

    /// Runs the task, timing it and turning a panic into a failed record.
    pub fn execute(&self) -> Report {
        match catch_unwind(AssertUnwindSafe(|| timed(|| (self.run)()))) {
            Ok(r) => r,
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Report::from(vec![CheckRecord::error(&self.label, "task aborted", &Error::Domain(msg))])
            }
        }
    }
}

/// Seed for one randomized control, a pure function of the run seed and the
/// task coordinates.
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &c in coords {
        let s = c ^ rng.gen::<u64>();
        rng.set_stream(s);
    }
    rng.gen()
}

fn nome(p: f64) -> Nome64 {
    Nome64::new(p).expect("validated")
}

fn random_mu(seed: u64) -> [f64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
}

/// The tasks of one suite, in report order.
pub fn tasks(suite: Suite, grid: &Grid, seed: u64) -> Vec<Task> {
    let mut out = Vec::new();
    let pi6 = PI / 6.0;
    let sid = suite as u64;
    match suite {
        Suite::ThetaSelftest => {
            for &p in &grid.p {
                out.push(Task::new(format!("theta p={p}"), move || selftest(nome(p))));
            }
        }
        Suite::Susy => {
            for &p in &grid.p {
                for &t in &grid.t {
                    out.push(Task::new(format!("basis p={p} t={t}"), move || {
                        let q = nome(p);
                        match theta_basis(q, t) {
                            Ok(b) => check_q_on_basis(&supercharge_at(q, t), &b).tag(&[("p", p), ("t", t)]),
                            Err(e) => Report::from(vec![CheckRecord::error("theta basis", "q acts on the theta basis", &e)]),
                        }
                    }));
                    for &l in &grid.l {
                        out.push(Task::new(format!("nilpotency p={p} t={t} L={l}"), move || {
                            check_nilpotency(&supercharge_at(nome(p), t), l).tag(&[("p", p), ("t", t)])
                        }));
                        out.push(Task::new(format!("cohomology p={p} t={t} L={l}"), move || check_cohomology(nome(p), t, l)));
                    }
                }
                out.push(Task::new(format!("chi alpha p={p}"), move || {
                    let q = nome(p);
                    match theta_basis(q, pi6) {
                        Ok(b) => check_chi_alpha(&supercharge_at(q, pi6), &b).tag(&[("p", p)]),
                        Err(e) => Report::from(vec![CheckRecord::error("two-site states", "χ and α at t = π/6", &e)]),
                    }
                }));
                for &l in grid.l.iter().filter(|&&l| l <= HEAVY_MAX_L) {
                    out.push(Task::new(format!("supercharge rotation p={p} L={l}"), move || check_q_rotation(nome(p), l).tag(&[("L", l as f64), ("p", p)])));
                }
            }
        }
        Suite::Hamiltonian => {
            for &p in &grid.p {
                for &t in &grid.t {
                    for &l in &grid.l {
                        out.push(Task::new(format!("affine p={p} t={t} L={l}"), move || {
                            let sp = SpectralPoint::new(p, PI / 3.0, 0.0, t, 1.0).expect("validated");
                            check_prop21(l, &sp).tag(&[("L", l as f64), ("p", p), ("t", t)])
                        }));
                    }
                    for &l in grid.l.iter().filter(|&&l| l <= HEAVY_MAX_L) {
                        out.push(Task::new(format!("rotations p={p} t={t} L={l}"), move || {
                            let sp = SpectralPoint::new(p, PI / 3.0, 0.0, t, 1.0).expect("validated");
                            check_rotations(l, sp.zeta(), C::new(sp.y(), 0.0)).tag(&[("L", l as f64), ("p", p), ("t", t)])
                        }));
                    }
                }
                for &l in &grid.l {
                    out.push(Task::new(format!("perron p={p} L={l}"), move || check_perron(l, nome(p))));
                }
            }
        }
        Suite::Vertex => {
            for (ip, &p) in grid.p.iter().enumerate() {
                for (iu, &u) in grid.u.iter().enumerate() {
                    let mu = random_mu(derive_seed(seed, &[sid, ip as u64, iu as u64]));
                    out.push(Task::new(format!("local relations p={p} u={u}"), move || {
                        let sp = SpectralPoint::supersymmetric(p, u).expect("validated");
                        let generic = sp.with_eta(CONTROL_ETA);
                        let mut r = Report::new();
                        for (a, b) in [(u, 0.11), (0.25, -0.3)] {
                            r.extend(check_ybe(&sp, a, b));
                            r.extend(check_ybe(&generic, a, b));
                            r.extend(check_reflection(&sp, a, b, mu).tag(&[("mu1", mu[0]), ("mu2", mu[1]), ("mu3", mu[2])]));
                        }
                        r.extend(check_k_forms(&sp));
                        r.extend(check_lemma32(&sp));
                        r.extend(check_boundary_a_control(&sp, 1.1));
                        r
                    }));
                    for &l in grid.l.iter().filter(|&&l| l >= 2) {
                        out.push(Task::new(format!("A relations p={p} u={u} L={l}"), move || {
                            let sp = SpectralPoint::supersymmetric(p, u).expect("validated");
                            let mut r = Report::new();
                            for j in 1..l {
                                r.extend(check_lemma31(&sp, l, j));
                            }
                            r.extend(check_a_relation_control(&sp, l, 1, CONTROL_ETA));
                            r
                        }));
                    }
                }
            }
        }
        Suite::Transfer => {
            for (ip, &p) in grid.p.iter().enumerate() {
                for (iu, &u) in grid.u.iter().enumerate() {
                    out.push(Task::new(format!("two-site reductions p={p} u={u}"), move || check_lemmas_38_39(nome(p), u)));
                    for &l in &grid.l {
                        let mu = random_mu(derive_seed(seed, &[sid, ip as u64, iu as u64, l as u64]));
                        out.push(Task::new(format!("transfer p={p} u={u} L={l}"), move || {
                            let sp = SpectralPoint::supersymmetric(p, u).expect("validated");
                            let mut r = check_commutation(l, &sp, 0.5 * u - 0.07);
                            r.extend(check_tq_commutation(l, nome(p), u));
                            if l <= HEAVY_MAX_L {
                                let sp0 = sp.with_u(0.0);
                                r.extend(check_log_derivative(l, &sp0, mu).tag(&[("mu1", mu[0]), ("mu2", mu[1]), ("mu3", mu[2])]));
                                r.extend(check_transfer_rotations(l, nome(p), u));
                            }
                            r
                        }));
                    }
                }
            }
        }
        Suite::Theorem1 => {
            for &p in &grid.p {
                for &l in &grid.l {
                    out.push(Task::new(format!("ground state p={p} L={l}"), move || check_theorem1(l, nome(p))));
                }
            }
        }
        Suite::Theorem2 => {
            for &p in &grid.p {
                for &u in &grid.u {
                    let ls = grid.l.clone();
                    out.push(Task::new(format!("eigenvalue p={p} u={u}"), move || {
                        let mut r = Report::new();
                        let mut certs = Vec::new();
                        for &l in &ls {
                            match certify_theorem2(l, nome(p), u) {
                                Ok(c) => {
                                    r.extend(c.eigen_report());
                                    certs.push(c);
                                }
                                Err(e) => r.push(
                                    CheckRecord::error("eigenvalue in spectrum", "Λ_L is an eigenvalue of 𝒯", &e)
                                        .with_all(&[("L", l as f64), ("p", p), ("u", u)]),
                                ),
                            }
                        }
                        let ab = weights(&SpectralPoint::supersymmetric(p, u).expect("validated")).a_plus_b();
                        r.extend(check_recurrence(&certs, ab));
                        r
                    }));
                }
            }
        }
        Suite::Theorem3 => {
            for (ip, &p) in grid.p.iter().enumerate() {
                for (iu, &u) in grid.u.iter().enumerate() {
                    for &l in &grid.l {
                        let s = derive_seed(seed, &[sid, ip as u64, iu as u64, l as u64]);
                        out.push(Task::new(format!("dominance p={p} u={u} L={l}"), move || check_theorem3(l, nome(p), u, s)));
                    }
                }
            }
        }
        Suite::Conjecture => {
            for (ip, &p) in grid.p.iter().enumerate() {
                for (iu, &u) in grid.u.iter().enumerate() {
                    for &l in &grid.l {
                        out.push(Task::new(format!("conjecture p={p} u={u} L={l}"), move || {
                            let mut r = Report::new();
                            for k in 0..CONJECTURE_SAMPLES {
                                let s = derive_seed(seed, &[sid, ip as u64, iu as u64, l as u64, k]);
                                r.extend(check_conjecture(l, nome(p), u, &random_inhomogeneities(l, s)).tag(&[("sample", k as f64)]));
                            }
                            r
                        }));
                    }
                }
            }
        }
    }
    out
}

/// Runs every selected suite on a pool of `threads` workers. Records come
/// back in task order regardless of scheduling; tolerance overrides are
/// applied afterwards.
pub fn run_records(config: &RunConfig) -> Report {
    let all: Vec<Task> = config.suite.iter().flat_map(|&s| tasks(s, &config.grid, config.seed)).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build().expect("thread pool");
    let reports: Vec<Report> = pool.install(|| all.par_iter().map(Task::execute).collect());
    let mut out = Report::new();
    for r in reports {
        out.extend(r);
    }
    for rec in &mut out.records {
        if let Some(&tol) = config.tolerances.get(&rec.check) {
            rec.set_tol(tol);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_every_coordinate() {
        let a = derive_seed(1, &[2, 0, 0]);
        assert_eq!(a, derive_seed(1, &[2, 0, 0]));
        assert_ne!(a, derive_seed(2, &[2, 0, 0]));
        assert_ne!(a, derive_seed(1, &[2, 0, 1]));
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
    }

    #[test]
    fn panics_become_records() {
        let t = Task::new("boom".into(), || panic!("broken"));
        let r = t.execute();
        assert_eq!(r.records.len(), 1);
        assert!(!r.records[0].passed());
        assert!(r.records[0].citation.contains("broken"));
    }

    #[test]
    fn every_suite_has_tasks_on_the_default_grid() {
        for s in Suite::ALL {
            assert!(!tasks(s, &Grid::default(), 1).is_empty(), "{}", s.name());
        }
    }
}
