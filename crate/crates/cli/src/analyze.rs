//! The `analyze` subcommand: decoherence measures of a serialized density
//! matrix, in its native determinant basis and optionally in a rotated
//! single-particle basis.

use anyhow::{bail, Context};
use distill_core::fock::enumerate_determinants;
use distill_core::purity::PurityReport;
use distill_core::rdm::PairTable;
use distill_core::{coherence_order, ManyBodyDensityMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Row-major complex matrix file: column `i` expands new creation operator
/// `i` in the old basis.
#[derive(Serialize, Deserialize)]
pub struct UnitaryJson {
    pub m: usize,
    pub u: Vec<[f64; 2]>,
}

impl UnitaryJson {
    pub fn into_matrix(self) -> anyhow::Result<DMatrix<Complex64>> {
        if self.u.len() != self.m * self.m {
            bail!("unitary file holds {} entries, expected {}", self.u.len(), self.m * self.m);
        }
        Ok(DMatrix::from_fn(self.m, self.m, |i, j| {
            let [re, im] = self.u[i * self.m + j];
            Complex64::new(re, im)
        }))
    }
}

#[derive(Serialize)]
pub struct AnalysisOutput {
    pub native: PurityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotated: Option<PurityReport>,
    pub renormalized_input: bool,
    pub min_eigenvalue: f64,
}

/// Largest sector size for which the rotated-basis populations (and hence
/// the population-weighted bounds) are still enumerated exactly.
const MAX_ROTATED_SECTOR: usize = 20_000;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Populations of `rho` in the determinant basis generated by the rotated
/// single-particle orbitals, over the full (M, N) sector, plus that
/// sector's coherence-order matrix.
fn rotated_populations(
    rho: &ManyBodyDensityMatrix,
    u: &DMatrix<Complex64>,
) -> anyhow::Result<(Vec<f64>, Vec<u8>)> {
    let m = rho.basis().num_orbitals();
    let n = rho.basis().num_particles();
    let sector = binomial(m, n);
    if sector > MAX_ROTATED_SECTOR {
        bail!(
            "rotated-basis bounds need the full (M = {m}, N = {n}) sector of {sector} \
             determinants; that exceeds the supported size"
        );
    }
    let full = enumerate_determinants(m, n)?;
    let k_old = rho.basis().len();
    let k_new = full.len();
    // W[m_old][n_new] = <Phi_old_m | Phi_new_n> = det(u[occ_old, occ_new]).
    let mut w = DMatrix::from_element(k_old, k_new, Complex64::new(0.0, 0.0));
    for (mi, old) in rho.basis().dets().iter().enumerate() {
        let rows = old.orbitals();
        for (ni, new) in full.iter().enumerate() {
            let cols = new.orbitals();
            let sub = DMatrix::from_fn(n, n, |r, c| u[(rows[r], cols[c])]);
            w[(mi, ni)] = sub.determinant();
        }
    }
    let a_new = w.adjoint() * rho.coefficients() * &w;
    let pops: Vec<f64> = (0..k_new).map(|i| a_new[(i, i)].re).collect();
    let mut orders = vec![0u8; k_new * k_new];
    for i in 0..k_new {
        for j in 0..k_new {
            orders[i * k_new + j] = coherence_order(&full[i], &full[j]).unwrap() as u8;
        }
    }
    Ok((pops, orders))
}

pub fn analyze(
    rho: &ManyBodyDensityMatrix,
    unitary: Option<DMatrix<Complex64>>,
) -> anyhow::Result<AnalysisOutput> {
    rho.check_positive_semidefinite()
        .context("input violates an invariant")?;
    let min_eigenvalue = rho.eigenvalues().first().copied().unwrap_or(0.0);
    let native = PurityReport::from_density_matrix("native", rho)?;
    let rotated = match unitary {
        None => None,
        Some(u) => {
            let table = PairTable::new(rho.basis());
            let g = table.one_rdm(rho).rotate(&u)?;
            let gamma = table.two_rdm(rho).rotate(&u)?;
            let (pops, orders) = rotated_populations(rho, &u)?;
            Some(PurityReport::from_rdms(
                "rotated",
                rho.purity(),
                &g,
                &gamma,
                &pops,
                &orders,
                rho.basis().num_particles(),
            )?)
        }
    };
    Ok(AnalysisOutput {
        native,
        rotated,
        renormalized_input: rho.was_renormalized(),
        min_eigenvalue,
    })
}

pub fn render_table(out: &AnalysisOutput) -> String {
    let mut s = String::new();
    let width = 26;
    let header = match &out.rotated {
        Some(_) => format!("{:<width$} {:>18} {:>18}", "measure", "native", "rotated"),
        None => format!("{:<width$} {:>18}", "measure", "native"),
    };
    s.push_str(&header);
    s.push('\n');
    let row = |s: &mut String, name: &str, a: f64, b: Option<f64>| {
        match b {
            Some(b) => s.push_str(&format!("{name:<width$} {a:>18.12} {b:>18.12}\n")),
            None => s.push_str(&format!("{name:<width$} {a:>18.12}\n")),
        };
    };
    let r = out.rotated.as_ref();
    row(&mut s, "purity P", out.native.p, r.map(|x| x.p));
    row(&mut s, "reduced purity P1", out.native.p1, r.map(|x| x.p1));
    row(&mut s, "reduced purity P2", out.native.p2, r.map(|x| x.p2));
    row(&mut s, "distilled purity dP1", out.native.dp1, r.map(|x| x.dp1));
    row(&mut s, "distilled purity dP2", out.native.dp2, r.map(|x| x.dp2));
    row(
        &mut s,
        "dP1 bound (tight)",
        out.native.bounds.p1_max_tight,
        r.map(|x| x.bounds.p1_max_tight),
    );
    row(
        &mut s,
        "dP1 bound (loose)",
        out.native.bounds.p1_max_loose,
        r.map(|x| x.bounds.p1_max_loose),
    );
    row(
        &mut s,
        "dP2 bound (tight)",
        out.native.bounds.p2_max_tight,
        r.map(|x| x.bounds.p2_max_tight),
    );
    row(
        &mut s,
        "dP2 bound (loose)",
        out.native.bounds.p2_max_loose,
        r.map(|x| x.bounds.p2_max_loose),
    );
    if out.renormalized_input {
        s.push_str("note: input state vector was renormalized\n");
    }
    s.push_str(&format!("min eigenvalue: {:+.3e}\n", out.min_eigenvalue));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use distill_core::density::pure_state_from_re;
    use distill_core::{DeterminantBasis, SlaterDeterminant};
    use std::sync::Arc;

    #[test]
    fn single_determinant_analysis() {
        let det = SlaterDeterminant::from_orbitals(8, &[0, 1, 2, 3]).unwrap();
        let basis = Arc::new(DeterminantBasis::new(vec![det]).unwrap());
        let rho = pure_state_from_re(basis, &[1.0]).unwrap();
        let out = analyze(&rho, None).unwrap();
        assert!((out.native.p - 1.0).abs() < 1e-14);
        assert!((out.native.p1 - 4.0).abs() < 1e-12);
        assert!((out.native.p2 - 6.0).abs() < 1e-12);
        assert_eq!(out.native.dp1, 0.0);
        assert_eq!(out.native.dp2, 0.0);
        let table = render_table(&out);
        assert!(table.contains("purity P"));
    }

    #[test]
    fn mixed_state_over_an_order_one_pair() {
        let dets = vec![
            SlaterDeterminant::from_orbitals(8, &[0, 1, 2, 3]).unwrap(),
            SlaterDeterminant::from_orbitals(8, &[0, 1, 2, 5]).unwrap(),
        ];
        let basis = Arc::new(DeterminantBasis::new(dets).unwrap());
        let p0 = pure_state_from_re(Arc::clone(&basis), &[1.0, 0.0]).unwrap();
        let p1 = pure_state_from_re(Arc::clone(&basis), &[0.0, 1.0]).unwrap();
        let rho = ManyBodyDensityMatrix::ensemble_average(&[(0.5, &p0), (0.5, &p1)]).unwrap();
        let out = analyze(&rho, None).unwrap();
        assert!((out.native.p - 0.5).abs() < 1e-14);
        assert!(out.native.dp1.abs() < 1e-14);
        assert!(out.native.dp2.abs() < 1e-14);
    }

    #[test]
    fn rotation_through_analysis_matches_direct_state_rotation() {
        // One particle in three orbitals: rotate with a permutation, where
        // populations in the rotated basis are easy to see.
        let m = 3;
        let dets = enumerate_determinants(m, 1).unwrap();
        let basis = Arc::new(DeterminantBasis::new(dets).unwrap());
        let rho = pure_state_from_re(basis, &[1.0, 0.0, 0.0]).unwrap();
        // New orbital 0 = old orbital 1, new 1 = old 0, new 2 = old 2.
        let mut u = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
        u[(1, 0)] = Complex64::new(1.0, 0.0);
        u[(0, 1)] = Complex64::new(1.0, 0.0);
        u[(2, 2)] = Complex64::new(1.0, 0.0);
        let out = analyze(&rho, Some(u)).unwrap();
        let rot = out.rotated.unwrap();
        assert!((rot.p1 - out.native.p1).abs() < 1e-12);
        // Occupied old orbital 0 is new orbital 1: bounds see populations
        // (0, 1, 0), so every tight bound vanishes.
        assert!(rot.bounds.p1_max_tight.abs() < 1e-12);
    }
}
