//! JSON interchange forms.
//!
//! Density matrices serialize as the determinant basis plus the row-major
//! coefficient matrix with complex entries as `[re, im]` pairs; RDMs as the
//! orbital count, a basis tag and the flattened entries.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{DeterminantBasis, ManyBodyDensityMatrix};
use crate::error::Result;
use crate::fock::SlaterDeterminant;
use crate::rdm::{OneBodyRDM, TwoBodyRDM};

#[derive(Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub basis: Vec<SlaterDeterminant>,
    pub a: Vec<Vec<[f64; 2]>>,
}

impl DensityMatrixJson {
    pub fn from_density(rho: &ManyBodyDensityMatrix) -> Self {
        let k = rho.basis().len();
        let a = (0..k)
            .map(|n| {
                (0..k)
                    .map(|m| {
                        let z = rho.coefficients()[(n, m)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        Self {
            basis: rho.basis().dets().to_vec(),
            a,
        }
    }

    pub fn into_density(self) -> Result<ManyBodyDensityMatrix> {
        let basis = Arc::new(DeterminantBasis::new(self.basis)?);
        let k = basis.len();
        let a = DMatrix::from_fn(k, k, |n, m| {
            let row = self.a.get(n);
            let entry = row.and_then(|r| r.get(m)).copied().unwrap_or([0.0, 0.0]);
            Complex64::new(entry[0], entry[1])
        });
        if self.a.len() != k || self.a.iter().any(|row| row.len() != k) {
            return Err(crate::error::Error::CoefficientShape {
                rows: self.a.len(),
                cols: self.a.first().map(Vec::len).unwrap_or(0),
                k,
            });
        }
        ManyBodyDensityMatrix::new(basis, a)
    }
}

#[derive(Serialize, Deserialize)]
pub struct OneBodyRdmJson {
    pub m: usize,
    pub basis: String,
    /// Row-major `m*m` entries as `[re, im]`.
    pub g: Vec<[f64; 2]>,
}

impl OneBodyRdmJson {
    pub fn from_rdm(g: &OneBodyRDM, basis_tag: impl Into<String>) -> Self {
        let m = g.num_orbitals();
        let mut data = Vec::with_capacity(m * m);
        for e1 in 0..m {
            for e2 in 0..m {
                let z = g.get(e1, e2);
                data.push([z.re, z.im]);
            }
        }
        Self {
            m,
            basis: basis_tag.into(),
            g: data,
        }
    }

    pub fn into_rdm(self) -> OneBodyRDM {
        let m = self.m;
        OneBodyRDM::new(DMatrix::from_fn(m, m, |e1, e2| {
            let entry = self.g.get(e1 * m + e2).copied().unwrap_or([0.0, 0.0]);
            Complex64::new(entry[0], entry[1])
        }))
    }
}

#[derive(Serialize, Deserialize)]
pub struct TwoBodyRdmJson {
    pub m: usize,
    pub basis: String,
    /// Flattened `m^4` entries in `[e1][e2][e4][e3]` order as `[re, im]`.
    pub gamma: Vec<[f64; 2]>,
}

impl TwoBodyRdmJson {
    pub fn from_rdm(gamma: &TwoBodyRDM, basis_tag: impl Into<String>) -> Self {
        Self {
            m: gamma.num_orbitals(),
            basis: basis_tag.into(),
            gamma: gamma.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn into_rdm(self) -> TwoBodyRDM {
        let mut out = TwoBodyRDM::zeros(self.m);
        let m = self.m;
        let mut it = self.gamma.into_iter();
        for e1 in 0..m {
            for e2 in 0..m {
                for e4 in 0..m {
                    for e3 in 0..m {
                        if let Some([re, im]) = it.next() {
                            out.add(e1, e2, e4, e3, Complex64::new(re, im));
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_matrix_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random::random_mixed_state(&mut rng, 6, 2, 2);
        let json = serde_json::to_string(&DensityMatrixJson::from_density(&rho)).unwrap();
        let back: DensityMatrixJson = serde_json::from_str(&json).unwrap();
        let rho2 = back.into_density().unwrap();
        assert_eq!(rho.basis().dets(), rho2.basis().dets());
        let dev = (rho.coefficients() - rho2.coefficients())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-15);
    }

    #[test]
    fn rdm_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::random_mixed_state(&mut rng, 5, 2, 2);
        let g = crate::rdm::one_rdm_closed(&rho);
        let j = OneBodyRdmJson::from_rdm(&g, "site");
        assert_eq!(j.basis, "site");
        let g2 = serde_json::from_str::<OneBodyRdmJson>(&serde_json::to_string(&j).unwrap())
            .unwrap()
            .into_rdm();
        assert!((g.matrix() - g2.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);

        let gamma = crate::rdm::two_rdm_closed(&rho);
        let j = TwoBodyRdmJson::from_rdm(&gamma, "energy");
        let gamma2 = serde_json::from_str::<TwoBodyRdmJson>(&serde_json::to_string(&j).unwrap())
            .unwrap()
            .into_rdm();
        assert!(gamma.max_abs_diff(&gamma2) < 1e-15);
    }
}
