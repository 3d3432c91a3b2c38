//! Many-body machinery over the S_z = 0 determinant sector: basis
//! construction, the one-body Hamiltonian in the determinant basis, the
//! exact propagator, and determinant-basis transformations.
//!
//! The S_z = 0 sector factorizes into (up string) x (down string); a
//! determinant is indexed `n = u_idx * n_str + d_idx`. Spin-orbital
//! indexing is interleaved, `(site i, spin s) -> 2 i + s`, so every sector
//! determinant carries a fixed reordering sign between its canonical
//! interleaved form and the ups-then-downs product used by the factorized
//! propagator.

use std::sync::Arc;

use distill_core::density::DeterminantBasis;
use distill_core::fock::SlaterDeterminant;
use distill_core::rdm::PairTable;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SshError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// All site bitmasks with `n_up` of `l` bits set, ascending.
fn spin_strings(l: usize, n_up: usize) -> Vec<u32> {
    (0u32..1 << l).filter(|s| s.count_ones() as usize == n_up).collect()
}

fn string_sites(s: u32) -> Vec<u8> {
    let mut v = Vec::with_capacity(s.count_ones() as usize);
    let mut bits = s;
    while bits != 0 {
        v.push(bits.trailing_zeros() as u8);
        bits &= bits - 1;
    }
    v
}

/// The S_z = 0 sector basis together with the lookup tables the propagator
/// and the mean-field forces need.
pub struct SectorBasis {
    pub l_sites: usize,
    pub n_up: usize,
    /// Site bitmasks shared by the up and down channels, ascending.
    pub strings: Vec<u32>,
    /// Occupied sites per string.
    pub string_sites: Vec<Vec<u8>>,
    /// Spin-orbital determinants, `n = u_idx * strings.len() + d_idx`.
    pub basis: Arc<DeterminantBasis>,
    /// Transition structure of the basis (shared with the purity evaluators).
    pub pairs: PairTable,
    /// Sign relating the canonical interleaved ordering to ups-then-downs.
    pub reorder_sign: Vec<f64>,
    /// Electrons per site (0..=2) for every determinant.
    pub site_occupation: Vec<Vec<u8>>,
    /// Per bond `k`: entries `(n, m, sign)` with
    /// `<Phi_n| c†_{(k,s)} c_{(k+1,s)} |Phi_m> = sign`, both spins merged.
    pub bond_pairs: Vec<Vec<(u32, u32, f64)>>,
}

impl SectorBasis {
    pub fn new(l_sites: usize, n_electrons: usize) -> Result<Self> {
        if n_electrons % 2 != 0 || n_electrons == 0 || n_electrons > 2 * l_sites {
            return Err(SshError::InvalidParams(format!(
                "cannot build an S_z = 0 sector for {n_electrons} electrons on {l_sites} sites"
            )));
        }
        let n_up = n_electrons / 2;
        let strings = spin_strings(l_sites, n_up);
        let string_sites_list: Vec<Vec<u8>> = strings.iter().map(|&s| string_sites(s)).collect();
        let n_str = strings.len();
        let m_orbs = 2 * l_sites;

        let mut dets = Vec::with_capacity(n_str * n_str);
        let mut reorder_sign = Vec::with_capacity(n_str * n_str);
        let mut site_occupation = Vec::with_capacity(n_str * n_str);
        for up in &strings {
            for dn in &strings {
                let mut occ = 0u64;
                for i in string_sites(*up) {
                    occ |= 1 << (2 * i);
                }
                for j in string_sites(*dn) {
                    occ |= 1 << (2 * j + 1);
                }
                dets.push(SlaterDeterminant::new(m_orbs, occ)?);
                // Inversions between down orbitals and the up orbitals that
                // sit above them in the interleaved ordering.
                let mut inversions = 0u32;
                for j in string_sites(*dn) {
                    inversions += (*up >> (j as u32 + 1)).count_ones();
                }
                reorder_sign.push(if inversions % 2 == 0 { 1.0 } else { -1.0 });
                let occ_sites: Vec<u8> = (0..l_sites)
                    .map(|i| ((up >> i) & 1) as u8 + ((dn >> i) & 1) as u8)
                    .collect();
                site_occupation.push(occ_sites);
            }
        }
        let basis = Arc::new(DeterminantBasis::new(dets)?);
        let pairs = PairTable::new(&basis);

        let mut bond_pairs: Vec<Vec<(u32, u32, f64)>> = vec![Vec::new(); l_sites - 1];
        for p in pairs.singles() {
            let (c, d) = (p.created as usize, p.destroyed as usize);
            if c % 2 != d % 2 {
                continue;
            }
            let (ci, di) = (c / 2, d / 2);
            if di == ci + 1 {
                bond_pairs[ci].push((p.n, p.m, p.phase));
            }
        }

        Ok(Self {
            l_sites,
            n_up,
            strings,
            string_sites: string_sites_list,
            basis,
            pairs,
            reorder_sign,
            site_occupation,
            bond_pairs,
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Determinant index for an (up, down) string pair.
    pub fn index_of(&self, up: u32, dn: u32) -> Option<usize> {
        let u = self.strings.binary_search(&up).ok()?;
        let d = self.strings.binary_search(&dn).ok()?;
        Some(u * self.strings.len() + d)
    }

    /// Spin-summed bond order `2 Re <c†_{k} c_{k+1}>` for each bond.
    pub fn bond_orders(&self, psi: &[Complex64], out: &mut [f64]) {
        for (k, pairs) in self.bond_pairs.iter().enumerate() {
            let mut acc = ZERO;
            for &(n, m, sign) in pairs {
                acc += psi[n as usize].conj() * psi[m as usize] * sign;
            }
            out[k] = 2.0 * acc.re;
        }
    }

    /// Electron density per site.
    pub fn site_densities(&self, psi: &[Complex64], out: &mut [f64]) {
        out.fill(0.0);
        for (n, occ) in self.site_occupation.iter().enumerate() {
            let w = psi[n].norm_sqr();
            for (i, &c) in occ.iter().enumerate() {
                out[i] += w * c as f64;
            }
        }
    }
}

/// Matrix of a one-body operator in a determinant basis: the diagonal sums
/// occupied diagonal elements of `h1`, single transitions pick up
/// `phase * h1[created][destroyed]`, and nothing couples pairs further apart.
pub fn many_body_hamiltonian(h1: &DMatrix<f64>, basis: &DeterminantBasis) -> DMatrix<f64> {
    let k = basis.len();
    let pairs = PairTable::new(basis);
    let mut h = DMatrix::zeros(k, k);
    for n in 0..k {
        h[(n, n)] = basis
            .det(n)
            .orbitals()
            .iter()
            .map(|&e| h1[(e, e)])
            .sum::<f64>();
    }
    for p in pairs.singles() {
        h[(p.n as usize, p.m as usize)] +=
            p.phase * h1[(p.created as usize, p.destroyed as usize)];
    }
    h
}

/// Determinant of a small complex minor, rows/cols ascending.
fn complex_minor_det(u: &[Complex64], l: usize, rows: &[u8], cols: &[u8]) -> Complex64 {
    match rows.len() {
        0 => ONE,
        1 => u[rows[0] as usize * l + cols[0] as usize],
        2 => {
            let a = u[rows[0] as usize * l + cols[0] as usize];
            let b = u[rows[0] as usize * l + cols[1] as usize];
            let c = u[rows[1] as usize * l + cols[0] as usize];
            let d = u[rows[1] as usize * l + cols[1] as usize];
            a * d - b * c
        }
        k => {
            let mut m = [ZERO; 36];
            assert!(k <= 6, "minor determinants supported up to 6x6");
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    m[i * k + j] = u[r as usize * l + c as usize];
                }
            }
            small_det(&mut m[..k * k], k)
        }
    }
}

fn small_det(m: &mut [Complex64], k: usize) -> Complex64 {
    let mut det = ONE;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| m[a * k + col].norm_sqr().total_cmp(&m[b * k + col].norm_sqr()))
            .unwrap();
        if m[pivot * k + col].norm_sqr() == 0.0 {
            return ZERO;
        }
        if pivot != col {
            for j in 0..k {
                m.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        let p = m[col * k + col];
        det *= p;
        for row in (col + 1)..k {
            let f = m[row * k + col] / p;
            for j in col..k {
                let v = m[col * k + j];
                m[row * k + j] -= f * v;
            }
        }
    }
    det
}

fn real_minor_det(c: &DMatrix<f64>, rows: &[u8], cols: &[u8]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => c[(rows[0] as usize, cols[0] as usize)],
        2 => {
            c[(rows[0] as usize, cols[0] as usize)] * c[(rows[1] as usize, cols[1] as usize)]
                - c[(rows[0] as usize, cols[1] as usize)]
                    * c[(rows[1] as usize, cols[0] as usize)]
        }
        k => {
            let sub = DMatrix::from_fn(k, k, |i, j| {
                c[(rows[i] as usize, cols[j] as usize)]
            });
            sub.determinant()
        }
    }
}

/// Overlap matrix `T[n][m] = <Phi_n^old | Phi_m^new>` between the sector
/// determinants built on the old single-particle basis and those built on
/// the new one, where column `i` of `c` expands new orbital `i` in the old
/// basis (identically for both spins). `T` is orthogonal;
/// `psi_old = T psi_new` and `rho_new = Tᵀ rho_old T`.
pub fn determinant_transform(c: &DMatrix<f64>, sector: &SectorBasis) -> DMatrix<f64> {
    let n_str = sector.strings.len();
    let k = sector.len();
    let mut minors = vec![0.0; n_str * n_str];
    for i in 0..n_str {
        for j in 0..n_str {
            minors[i * n_str + j] =
                real_minor_det(c, &sector.string_sites[i], &sector.string_sites[j]);
        }
    }
    let mut t = DMatrix::zeros(k, k);
    for n in 0..k {
        let (un, dn) = (n / n_str, n % n_str);
        for m in 0..k {
            let (um, dm) = (m / n_str, m % n_str);
            t[(n, m)] = sector.reorder_sign[n]
                * sector.reorder_sign[m]
                * minors[un * n_str + um]
                * minors[dn * n_str + dm];
        }
    }
    t
}

/// Spin-orbital unitary induced by a spatial orbital rotation, for RDM
/// rotations: `U[2p+s][2i+s] = c[p][i]`.
pub fn spin_orbital_unitary(c: &DMatrix<f64>) -> DMatrix<Complex64> {
    let l = c.nrows();
    DMatrix::from_fn(2 * l, 2 * l, |a, b| {
        if a % 2 == b % 2 {
            Complex64::new(c[(a / 2, b / 2)], 0.0)
        } else {
            ZERO
        }
    })
}

/// Exact propagator over the sector for a one-body spin-diagonal
/// Hamiltonian. Exponentiates the spatial single-particle matrix and lifts
/// it to the determinant basis through spin-factorized minors; this equals
/// the exponential of the sector-restricted many-body Hamiltonian.
pub struct SectorPropagator {
    l: usize,
    n_str: usize,
    // scratch, all preallocated: per-step application allocates nothing
    h_flat: Vec<f64>,
    u_mat: Vec<Complex64>,
    b_mat: Vec<Complex64>,
    term: Vec<Complex64>,
    accum: Vec<Complex64>,
    mul_tmp: Vec<Complex64>,
    minors: Vec<Complex64>,
    phi: Vec<Complex64>,
    phi_tmp: Vec<Complex64>,
}

impl SectorPropagator {
    pub fn new(sector: &SectorBasis) -> Self {
        let l = sector.l_sites;
        let n_str = sector.strings.len();
        Self {
            l,
            n_str,
            h_flat: vec![0.0; l * l],
            u_mat: vec![ZERO; l * l],
            b_mat: vec![ZERO; l * l],
            term: vec![ZERO; l * l],
            accum: vec![ZERO; l * l],
            mul_tmp: vec![ZERO; l * l],
            minors: vec![ZERO; n_str * n_str],
            phi: vec![ZERO; n_str * n_str],
            phi_tmp: vec![ZERO; n_str * n_str],
        }
    }

    /// Loads the spatial Hamiltonian: nearest-neighbor hoppings `hop[k]`
    /// between sites k and k+1 plus a local diagonal.
    pub fn load_h(&mut self, diag: &[f64], hop: &[f64]) {
        self.h_flat.fill(0.0);
        for i in 0..self.l {
            self.h_flat[i * self.l + i] = diag[i];
        }
        for k in 0..self.l - 1 {
            self.h_flat[k * self.l + k + 1] = hop[k];
            self.h_flat[(k + 1) * self.l + k] = hop[k];
        }
    }

    fn mat_mul(l: usize, a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
        for i in 0..l {
            for j in 0..l {
                let mut acc = ZERO;
                for p in 0..l {
                    acc += a[i * l + p] * b[p * l + j];
                }
                out[i * l + j] = acc;
            }
        }
    }

    /// `u_mat = exp(-i H tau)` by scaling and a degree-14 Taylor sum; the
    /// truncation error is below 1e-19 at the scaled norm, so the result is
    /// unitary to machine precision.
    fn exponentiate(&mut self, tau: f64) {
        let l = self.l;
        let norm_inf = (0..l)
            .map(|i| (0..l).map(|j| self.h_flat[i * l + j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let theta = norm_inf * tau.abs();
        let squarings = if theta > 0.25 {
            (theta / 0.25).log2().ceil() as u32
        } else {
            0
        };
        let scale = tau / f64::from(1u32 << squarings);
        for i in 0..l * l {
            self.b_mat[i] = Complex64::new(0.0, -self.h_flat[i] * scale);
        }
        self.accum.fill(ZERO);
        self.term.fill(ZERO);
        for i in 0..l {
            self.accum[i * l + i] = ONE;
            self.term[i * l + i] = ONE;
        }
        for k in 1..=14 {
            Self::mat_mul(l, &self.term, &self.b_mat, &mut self.mul_tmp);
            let inv_k = 1.0 / k as f64;
            let mut largest = 0.0f64;
            for i in 0..l * l {
                self.term[i] = self.mul_tmp[i] * inv_k;
                self.accum[i] += self.term[i];
                largest = largest.max(self.term[i].norm_sqr());
            }
            if largest < 1e-38 {
                break;
            }
        }
        for _ in 0..squarings {
            Self::mat_mul(l, &self.accum, &self.accum, &mut self.mul_tmp);
            self.accum.copy_from_slice(&self.mul_tmp);
        }
        self.u_mat.copy_from_slice(&self.accum);
    }

    /// Applies `exp(-i H_mb tau)` in place, where `H_mb` is the lift of the
    /// loaded spatial Hamiltonian to the sector.
    pub fn apply(&mut self, sector: &SectorBasis, tau: f64, psi: &mut [Complex64]) {
        debug_assert_eq!(psi.len(), sector.len());
        self.exponentiate(tau);
        let n = self.n_str;
        for i in 0..n {
            for j in 0..n {
                self.minors[i * n + j] = complex_minor_det(
                    &self.u_mat,
                    self.l,
                    &sector.string_sites[i],
                    &sector.string_sites[j],
                );
            }
        }
        for (idx, v) in psi.iter().enumerate() {
            self.phi[idx] = v * sector.reorder_sign[idx];
        }
        // phi' = A phi Aᵀ over (up, down) indices.
        Self::mat_mul(n, &self.minors, &self.phi, &mut self.phi_tmp);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for p in 0..n {
                    acc += self.phi_tmp[i * n + p] * self.minors[j * n + p];
                }
                self.phi[i * n + j] = acc;
            }
        }
        for (idx, v) in psi.iter_mut().enumerate() {
            *v = self.phi[idx] * sector.reorder_sign[idx];
        }
    }
}
