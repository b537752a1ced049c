//! Human-readable dumps of single constructions, with an optional CSV copy.

use std::f64::consts::PI;
use std::fmt::Write as _;

use susy8v_core::hamiltonian::xyz_hamiltonian_zy;
use susy8v_core::params::{weights, SpectralPoint};
use susy8v_core::transfer::{singlet_at, susy_spec, transfer_dense, DENSE_T_MAX};
use susy8v_core::vertex::k_pair_weights;
use susy8v_core::{DenseOperator64, Error, Nome64, C};

use crate::config::UsageError;

/// Largest chain printed as a dense Hamiltonian or singlet.
pub const PRINT_MAX_L: usize = 10;
/// Matrices up to this dimension are drawn as a grid; larger ones are
/// listed entry by entry.
const GRID_MAX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Weights,
    KMatrix,
    Hamiltonian,
    Transfer,
    Singlet,
}

impl std::str::FromStr for Kind {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        Ok(match s {
            "weights" => Kind::Weights,
            "kmatrix" => Kind::KMatrix,
            "hamiltonian" => Kind::Hamiltonian,
            "transfer" => Kind::Transfer,
            "singlet" => Kind::Singlet,
            _ => {
                return Err(UsageError::new(
                    "kind",
                    format!("unknown kind `{s}` (expected weights, kmatrix, hamiltonian, transfer or singlet)"),
                ))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrintParams {
    pub p: f64,
    pub u: f64,
    pub t: f64,
    pub l: usize,
    /// Boundary parameter for `kmatrix`; `y(t)` when absent.
    pub y: Option<f64>,
}

impl Default for PrintParams {
    fn default() -> Self {
        PrintParams { p: 0.3, u: 0.2, t: PI / 6.0, l: 3, y: None }
    }
}

#[derive(Debug)]
pub enum PrintError {
    Usage(UsageError),
    Compute(Error),
}

impl std::fmt::Display for PrintError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrintError::Usage(e) => e.fmt(f),
            PrintError::Compute(e) => e.fmt(f),
        }
    }
}

impl From<UsageError> for PrintError {
    fn from(e: UsageError) -> Self {
        PrintError::Usage(e)
    }
}

impl From<Error> for PrintError {
    fn from(e: Error) -> Self {
        PrintError::Compute(e)
    }
}

/// Printed text plus the same data as CSV rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub text: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

fn cnum(z: C<f64>) -> String {
    format!("{:+.10e} {:+.10e}i", z.re, z.im)
}

fn bits(i: usize, l: usize) -> String {
    (0..l).rev().map(|k| if i >> k & 1 == 0 { '0' } else { '1' }).collect()
}

fn matrix_table(name: &str, m: &DenseOperator64, t: &mut Table) {
    let n = m.rows();
    let _ = writeln!(t.text, "{name} ({n}x{n})");
    if n <= GRID_MAX_DIM {
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| cnum(m.get(i, j))).collect();
            let _ = writeln!(t.text, "  {}", row.join("  "));
        }
    } else {
        let _ = writeln!(t.text, "  nonzero entries (row col re im):");
    }
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            if n > GRID_MAX_DIM && z.norm() > 0.0 {
                let _ = writeln!(t.text, "  {i:>5} {j:>5} {:+.16e} {:+.16e}", z.re, z.im);
            }
            t.rows.push(vec![name.into(), i.to_string(), j.to_string(), crate::num(z.re), crate::num(z.im)]);
        }
    }
}

fn matrix_header() -> Vec<String> {
    ["matrix", "row", "col", "re", "im"].map(String::from).to_vec()
}

fn check_l(l: usize, max: usize, hint: &str) -> Result<(), UsageError> {
    if l == 0 {
        return Err(UsageError::new("L", "must be at least 1"));
    }
    if l > max {
        return Err(UsageError::new("L", format!("L = {l} exceeds the dense cap {max}; {hint}")));
    }
    Ok(())
}

pub fn print_object(kind: Kind, prm: &PrintParams) -> Result<Table, PrintError> {
    let q = Nome64::new(prm.p)?;
    let sp = SpectralPoint::new(prm.p, PI / 3.0, prm.u, prm.t, 1.0)?;
    let mut t = Table::default();
    match kind {
        Kind::Weights => {
            let w = weights(&sp);
            let _ = writeln!(t.text, "vertex weights at p = {}, u = {}, eta = pi/3", prm.p, prm.u);
            t.header = ["name", "value"].map(String::from).to_vec();
            for (name, v) in [("a", w.a), ("b", w.b), ("c", w.c), ("d", w.d)] {
                let _ = writeln!(t.text, "  {name} = {v:+.16e}");
                t.rows.push(vec![name.into(), crate::num(v)]);
            }
            let r = w.combined_weight_residual();
            let _ = writeln!(t.text, "  combined-weight residual = {r:.3e}  (zeta = {:.16e})", w.zeta());
            t.rows.push(vec!["combined_weight_residual".into(), crate::num(r)]);
        }
        Kind::KMatrix => {
            let y = prm.y.unwrap_or_else(|| sp.y());
            let kp = k_pair_weights(weights(&sp), C::new(y, 0.0))?;
            let _ = writeln!(t.text, "boundary matrices at p = {}, u = {}, y = {y}", prm.p, prm.u);
            t.header = matrix_header();
            matrix_table("K-", &kp.k_minus, &mut t);
            matrix_table("K+", &kp.k_plus, &mut t);
        }
        Kind::Hamiltonian => {
            check_l(prm.l, PRINT_MAX_L, "the run suites work with larger chains")?;
            let h = xyz_hamiltonian_zy(prm.l, sp.zeta(), C::new(sp.y(), 0.0))?;
            let _ = writeln!(t.text, "XYZ Hamiltonian at p = {}, t = {}, L = {}", prm.p, prm.t, prm.l);
            t.header = matrix_header();
            matrix_table("H", &h, &mut t);
        }
        Kind::Transfer => {
            check_l(
                prm.l,
                DENSE_T_MAX,
                &format!("use the matrix-free path, e.g. `susy8v run --suite theorem3 --L {}`", prm.l),
            )?;
            let m = transfer_dense(&susy_spec(prm.l, q, prm.u)?)?;
            let _ = writeln!(t.text, "transfer matrix at p = {}, u = {}, L = {}, t = pi/6", prm.p, prm.u, prm.l);
            t.header = matrix_header();
            matrix_table("T", &m, &mut t);
        }
        Kind::Singlet => {
            check_l(prm.l, PRINT_MAX_L, "the run suites work with larger chains")?;
            let psi = singlet_at(prm.l, q)?;
            let _ = writeln!(t.text, "unit singlet at p = {}, L = {}, phase fixed by <w+^L|psi> > 0", prm.p, prm.l);
            t.header = ["index", "state", "re", "im"].map(String::from).to_vec();
            for (i, z) in psi.amplitudes().iter().enumerate() {
                let s = bits(i, prm.l);
                let _ = writeln!(t.text, "  |{s}>  {:+.16e} {:+.16e}", z.re, z.im);
                t.rows.push(vec![i.to_string(), s, crate::num(z.re), crate::num(z.im)]);
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_table_has_four_numbers_and_a_residual() {
        let t = print_object(Kind::Weights, &PrintParams::default()).unwrap();
        assert_eq!(t.rows.len(), 5);
        let r: f64 = t.rows[4][1].parse().unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn kmatrix_at_y_zero_is_diagonal() {
        let prm = PrintParams { y: Some(0.0), ..Default::default() };
        let t = print_object(Kind::KMatrix, &prm).unwrap();
        assert_eq!(t.rows.len(), 8);
        for r in &t.rows {
            let (i, j) = (&r[1], &r[2]);
            let v: f64 = r[3].parse::<f64>().unwrap().abs() + r[4].parse::<f64>().unwrap().abs();
            if i != j {
                assert_eq!(v, 0.0, "{r:?}");
            }
        }
    }

    #[test]
    fn singlet_has_two_to_the_l_amplitudes() {
        let t = print_object(Kind::Singlet, &PrintParams::default()).unwrap();
        assert_eq!(t.rows.len(), 8);
        let norm: f64 = t.rows.iter().map(|r| r[2].parse::<f64>().unwrap().powi(2) + r[3].parse::<f64>().unwrap().powi(2)).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_beyond_cap_points_to_matrix_free() {
        let prm = PrintParams { l: DENSE_T_MAX + 1, ..Default::default() };
        let e = print_object(Kind::Transfer, &prm).unwrap_err().to_string();
        assert!(e.contains("matrix-free"), "{e}");
    }

    #[test]
    fn bits_are_msb_first() {
        assert_eq!(bits(1, 3), "001");
        assert_eq!(bits(6, 3), "110");
    }
}
