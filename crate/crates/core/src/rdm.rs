//! One- and two-body reduced density matrices.
//!
//! Each RDM has two construction routes: a brute-force route that applies
//! ladder-operator chains to every basis determinant (the oracle), and a
//! closed-form route driven by precomputed transition labels. The two must
//! agree entrywise; the validation suites assert exactly that.
//!
//! Index conventions, fixed throughout the crate:
//!   `g[e1][e2]          = Tr[c†_{e1} c_{e2} rho]`
//!   `G[e1][e2][e4][e3]  = (1/2) Tr[c†_{e1} c†_{e2} c_{e3} c_{e4} rho]`

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::{DeterminantBasis, ManyBodyDensityMatrix};
use crate::error::{Error, Result};
use crate::fock::{transition_descriptor, LadderKind};

/// Unitarity tolerance for basis rotations.
pub const UNITARY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The one-body reduced density matrix over M spin-orbitals.
#[derive(Clone, Debug)]
pub struct OneBodyRDM {
    g: DMatrix<Complex64>,
}

impl OneBodyRDM {
    pub fn new(g: DMatrix<Complex64>) -> Self {
        assert_eq!(g.nrows(), g.ncols(), "1-RDM must be square");
        Self { g }
    }

    pub fn num_orbitals(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.g
    }

    pub fn get(&self, e1: usize, e2: usize) -> Complex64 {
        self.g[(e1, e2)]
    }

    /// `Tr g`, equal to the particle number for a unit-trace state.
    pub fn trace(&self) -> f64 {
        (0..self.g.nrows()).map(|e| self.g[(e, e)].re).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let m = self.g.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..m {
            for j in i..m {
                dev = dev.max((self.g[(i, j)] - self.g[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Natural-occupation spectrum (eigenvalues), ascending.
    pub fn occupations(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.g.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|x, y| x.total_cmp(y));
        v
    }

    /// Rotates into the single-particle basis defined by `u`, where column
    /// `i` of `u` expands the new creation operator in the old ones:
    /// `c†_new,i = sum_j u[j][i] c†_old,j`. Hence `g_new = uᵀ g conj(u)`.
    pub fn rotate(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        check_unitary(u, self.num_orbitals())?;
        let g = u.transpose() * &self.g * u.conjugate();
        Ok(Self::new(g))
    }
}

/// The two-body reduced density matrix, stored dense over M^4.
#[derive(Clone, Debug)]
pub struct TwoBodyRDM {
    m: usize,
    data: Vec<Complex64>,
}

impl TwoBodyRDM {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![ZERO; m * m * m * m],
        }
    }

    pub fn num_orbitals(&self) -> usize {
        self.m
    }

    #[inline]
    fn idx(&self, e1: usize, e2: usize, e4: usize, e3: usize) -> usize {
        ((e1 * self.m + e2) * self.m + e4) * self.m + e3
    }

    #[inline]
    pub fn get(&self, e1: usize, e2: usize, e4: usize, e3: usize) -> Complex64 {
        self.data[self.idx(e1, e2, e4, e3)]
    }

    #[inline]
    pub fn add(&mut self, e1: usize, e2: usize, e4: usize, e3: usize, v: Complex64) {
        let i = self.idx(e1, e2, e4, e3);
        self.data[i] += v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// `sum_{e1,e2} G[e1][e2][e1][e2]`, equal to N(N-1)/2 for a unit-trace
    /// state; the 1/2! prefactor of the definition fixes this normalization.
    pub fn pair_trace(&self) -> f64 {
        let m = self.m;
        let mut t = 0.0;
        for e1 in 0..m {
            for e2 in 0..m {
                t += self.get(e1, e2, e1, e2).re;
            }
        }
        t
    }

    /// Max deviation from antisymmetry under swapping either index pair.
    pub fn antisymmetry_deviation(&self) -> f64 {
        let m = self.m;
        let mut dev: f64 = 0.0;
        for e1 in 0..m {
            for e2 in 0..m {
                for e4 in 0..m {
                    for e3 in 0..m {
                        let v = self.get(e1, e2, e4, e3);
                        dev = dev.max((v + self.get(e2, e1, e4, e3)).norm());
                        dev = dev.max((v + self.get(e1, e2, e3, e4)).norm());
                    }
                }
            }
        }
        dev
    }

    /// Max deviation from Hermiticity under exchanging upper and lower pairs.
    pub fn hermiticity_deviation(&self) -> f64 {
        let m = self.m;
        let mut dev: f64 = 0.0;
        for e1 in 0..m {
            for e2 in 0..m {
                for e4 in 0..m {
                    for e3 in 0..m {
                        let v = self.get(e1, e2, e4, e3);
                        dev = dev.max((v - self.get(e4, e3, e1, e2).conj()).norm());
                    }
                }
            }
        }
        dev
    }

    pub fn max_abs_diff(&self, other: &TwoBodyRDM) -> f64 {
        assert_eq!(self.m, other.m);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Rotates both lower indices with `u` and both upper indices with
    /// `conj(u)`, matching the one-body convention.
    pub fn rotate(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        check_unitary(u, self.m)?;
        let m = self.m;
        let contract = |src: &[Complex64], axis: usize, mat: &DMatrix<Complex64>| {
            // Replaces index `axis` (0-based in [e1, e2, e4, e3] layout):
            // out[.. i ..] = sum_j mat[j][i] src[.. j ..]
            let mut out = vec![ZERO; src.len()];
            let stride = m.pow(3 - axis as u32);
            let outer = m.pow(axis as u32);
            for o in 0..outer {
                for rest in 0..stride {
                    let base = o * stride * m + rest;
                    for i in 0..m {
                        let mut acc = ZERO;
                        for j in 0..m {
                            acc += mat[(j, i)] * src[base + j * stride];
                        }
                        out[base + i * stride] = acc;
                    }
                }
            }
            out
        };
        let uc = u.conjugate();
        let mut data = contract(&self.data, 0, u);
        data = contract(&data, 1, u);
        data = contract(&data, 2, &uc);
        data = contract(&data, 3, &uc);
        Ok(Self { m, data })
    }
}

fn check_unitary(u: &DMatrix<Complex64>, m: usize) -> Result<()> {
    if u.nrows() != m || u.ncols() != m {
        return Err(Error::MatrixShape {
            rows: u.nrows(),
            cols: u.ncols(),
            expected: m,
        });
    }
    let id = u * u.adjoint();
    let mut dev: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((id[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary { dev });
    }
    Ok(())
}

/// A single-particle transition connecting the ordered determinant pair
/// `(n, m)`: determinant `n` arises from `m` by moving one particle from
/// `destroyed` to `created`.
#[derive(Clone, Copy, Debug)]
pub struct SinglePair {
    pub n: u32,
    pub m: u32,
    pub created: u8,
    pub destroyed: u8,
    pub phase: f64,
}

/// A two-particle transition connecting the ordered pair `(n, m)`; label
/// arrays are ascending.
#[derive(Clone, Copy, Debug)]
pub struct DoublePair {
    pub n: u32,
    pub m: u32,
    pub created: [u8; 2],
    pub destroyed: [u8; 2],
    pub phase: f64,
}

/// Precomputed transition structure of a determinant basis: every ordered
/// pair with coherence order 1 or 2, its labels and phase, the full
/// coherence-order matrix, and reverse-transition lookup groups. This is the
/// executable form of the Kronecker-delta bookkeeping in the closed-form
/// evaluators.
pub struct PairTable {
    k: usize,
    m: usize,
    n_particles: usize,
    singles: Vec<SinglePair>,
    doubles: Vec<DoublePair>,
    orders: Vec<u8>,
    single_groups: HashMap<(u8, u8), Vec<u32>>,
    double_groups: HashMap<([u8; 2], [u8; 2]), Vec<u32>>,
}

impl PairTable {
    pub fn new(basis: &DeterminantBasis) -> Self {
        let k = basis.len();
        let mut singles = Vec::new();
        let mut doubles = Vec::new();
        let mut single_groups: HashMap<(u8, u8), Vec<u32>> = HashMap::new();
        let mut double_groups: HashMap<([u8; 2], [u8; 2]), Vec<u32>> = HashMap::new();
        for n in 0..k {
            for m in 0..k {
                if n == m {
                    continue;
                }
                let Some(t) = transition_descriptor(basis.det(m), basis.det(n)).unwrap() else {
                    continue;
                };
                if t.order() == 1 {
                    let entry = SinglePair {
                        n: n as u32,
                        m: m as u32,
                        created: t.created()[0],
                        destroyed: t.destroyed()[0],
                        phase: t.phase() as f64,
                    };
                    single_groups
                        .entry((entry.created, entry.destroyed))
                        .or_default()
                        .push(singles.len() as u32);
                    singles.push(entry);
                } else {
                    let entry = DoublePair {
                        n: n as u32,
                        m: m as u32,
                        created: [t.created()[0], t.created()[1]],
                        destroyed: [t.destroyed()[0], t.destroyed()[1]],
                        phase: t.phase() as f64,
                    };
                    double_groups
                        .entry((entry.created, entry.destroyed))
                        .or_default()
                        .push(doubles.len() as u32);
                    doubles.push(entry);
                }
            }
        }
        Self {
            k,
            m: basis.num_orbitals(),
            n_particles: basis.num_particles(),
            singles,
            doubles,
            orders: basis.order_matrix(),
            single_groups,
            double_groups,
        }
    }

    pub fn singles(&self) -> &[SinglePair] {
        &self.singles
    }

    pub fn doubles(&self) -> &[DoublePair] {
        &self.doubles
    }

    pub fn order(&self, n: usize, m: usize) -> usize {
        self.orders[n * self.k + m] as usize
    }

    pub fn order_matrix(&self) -> &[u8] {
        &self.orders
    }

    pub fn num_particles(&self) -> usize {
        self.n_particles
    }

    /// Ordered pairs whose transition is the reverse of `(created,
    /// destroyed)`; these are the partners picked out by the distinct-pair
    /// delta products.
    pub fn reverse_single_group(&self, created: u8, destroyed: u8) -> &[u32] {
        self.single_groups
            .get(&(destroyed, created))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn reverse_double_group(&self, created: [u8; 2], destroyed: [u8; 2]) -> &[u32] {
        self.double_groups
            .get(&(destroyed, created))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Phase-folded coefficient of a single pair: `phase * a[n][m]`.
    #[inline]
    fn eff_single(&self, rho: &ManyBodyDensityMatrix, p: &SinglePair) -> Complex64 {
        rho.coefficients()[(p.n as usize, p.m as usize)] * p.phase
    }

    #[inline]
    fn eff_double(&self, rho: &ManyBodyDensityMatrix, p: &DoublePair) -> Complex64 {
        rho.coefficients()[(p.n as usize, p.m as usize)] * p.phase
    }

    /// Closed-form 1-RDM: populations fill the diagonal through the
    /// occupations, order-1 pairs deposit their phase-folded coefficient at
    /// `[destroyed][created]`, and nothing else contributes.
    pub fn one_rdm(&self, rho: &ManyBodyDensityMatrix) -> OneBodyRDM {
        let basis = rho.basis();
        let m_orbs = self.m;
        let mut g = DMatrix::from_element(m_orbs, m_orbs, ZERO);
        for (n, pop) in rho.populations().iter().enumerate() {
            for e in basis.det(n).orbitals() {
                g[(e, e)] += Complex64::new(*pop, 0.0);
            }
        }
        for p in &self.singles {
            g[(p.destroyed as usize, p.created as usize)] += self.eff_single(rho, p);
        }
        OneBodyRDM::new(g)
    }

    /// Closed-form 2-RDM: the antisymmetrized population block plus the
    /// order-1 block (one free occupied index) and the order-2 block.
    pub fn two_rdm(&self, rho: &ManyBodyDensityMatrix) -> TwoBodyRDM {
        let basis = rho.basis();
        let mut gamma = TwoBodyRDM::zeros(self.m);
        for (n, pop) in rho.populations().iter().enumerate() {
            let w = Complex64::new(0.5 * pop, 0.0);
            let orbs = basis.det(n).orbitals();
            for &e1 in &orbs {
                for &e2 in &orbs {
                    if e1 == e2 {
                        continue;
                    }
                    gamma.add(e1, e2, e1, e2, w);
                    gamma.add(e1, e2, e2, e1, -w);
                }
            }
        }
        for p in &self.singles {
            let w = self.eff_single(rho, p) * 0.5;
            let c = p.created as usize;
            let d = p.destroyed as usize;
            for e in basis.det(p.m as usize).orbitals() {
                if e == d {
                    continue;
                }
                gamma.add(d, e, c, e, w);
                gamma.add(d, e, e, c, -w);
                gamma.add(e, d, c, e, -w);
                gamma.add(e, d, e, c, w);
            }
        }
        for p in &self.doubles {
            let w = self.eff_double(rho, p) * 0.5;
            let [c1, c2] = [p.created[0] as usize, p.created[1] as usize];
            let [d1, d2] = [p.destroyed[0] as usize, p.destroyed[1] as usize];
            // The +w slot pairs the ascending-ordered labels (d2,d1 | c1,c2):
            // the adjoint of the canonical order-2 string reproduces the
            // descriptor phase with the created pair entering reversed.
            gamma.add(d2, d1, c1, c2, w);
            gamma.add(d2, d1, c2, c1, -w);
            gamma.add(d1, d2, c1, c2, -w);
            gamma.add(d1, d2, c2, c1, w);
        }
        gamma
    }
}

/// Brute-force 1-RDM: applies `c†_{e1} c_{e2}` to every basis determinant
/// and accumulates signed coefficients. Makes no use of transition labels;
/// this is the independent reference for the closed form.
pub fn one_rdm_oracle(rho: &ManyBodyDensityMatrix) -> OneBodyRDM {
    let basis = rho.basis();
    let m_orbs = basis.num_orbitals();
    let a = rho.coefficients();
    let mut g = DMatrix::from_element(m_orbs, m_orbs, ZERO);
    for n in 0..basis.len() {
        let det = basis.det(n);
        for e2 in det.orbitals() {
            for e1 in 0..m_orbs {
                let chain = det
                    .apply_chain(&[(e1, LadderKind::Create), (e2, LadderKind::Annihilate)])
                    .unwrap();
                if let Some((sign, reached)) = chain {
                    if let Some(m) = basis.position(&reached) {
                        g[(e1, e2)] += a[(n, m)] * sign as f64;
                    }
                }
            }
        }
    }
    OneBodyRDM::new(g)
}

/// Brute-force 2-RDM via four-operator chains and the 1/2! prefactor.
pub fn two_rdm_oracle(rho: &ManyBodyDensityMatrix) -> TwoBodyRDM {
    let basis = rho.basis();
    let m_orbs = basis.num_orbitals();
    let a = rho.coefficients();
    let mut gamma = TwoBodyRDM::zeros(m_orbs);
    for n in 0..basis.len() {
        let det = basis.det(n);
        for e4 in det.orbitals() {
            let (s4, d4) = det.apply_ladder(e4, LadderKind::Annihilate).unwrap().unwrap();
            for e3 in d4.orbitals() {
                let (s3, d3) = d4.apply_ladder(e3, LadderKind::Annihilate).unwrap().unwrap();
                for e2 in 0..m_orbs {
                    let Some((s2, d2)) = d3.apply_ladder(e2, LadderKind::Create).unwrap() else {
                        continue;
                    };
                    for e1 in 0..m_orbs {
                        let Some((s1, d1)) = d2.apply_ladder(e1, LadderKind::Create).unwrap()
                        else {
                            continue;
                        };
                        if let Some(m) = basis.position(&d1) {
                            let sign = (s4 * s3 * s2 * s1) as f64;
                            gamma.add(e1, e2, e4, e3, a[(n, m)] * (0.5 * sign));
                        }
                    }
                }
            }
        }
    }
    gamma
}

/// Closed-form 1-RDM for one-off use; build a [`PairTable`] to amortize.
pub fn one_rdm_closed(rho: &ManyBodyDensityMatrix) -> OneBodyRDM {
    PairTable::new(rho.basis()).one_rdm(rho)
}

/// Closed-form 2-RDM for one-off use.
pub fn two_rdm_closed(rho: &ManyBodyDensityMatrix) -> TwoBodyRDM {
    PairTable::new(rho.basis()).two_rdm(rho)
}
