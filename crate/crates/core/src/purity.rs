//! Reduced purities, distilled purities, their closed forms over
//! determinant-pair sums, and the limiting-value bounds.
//!
//! The RDM-based definitions are the production path; the pair-sum closed
//! forms exist so that their equality stays a permanent regression test.

use serde::{Deserialize, Serialize};

use crate::density::ManyBodyDensityMatrix;
use crate::error::{Error, Result};
use crate::rdm::{OneBodyRDM, PairTable, TwoBodyRDM};

/// Distilled purities within this margin below zero are cancellation noise
/// and are clipped to exactly zero.
pub const CLIP_TOL: f64 = 1e-12;

fn clip(x: f64) -> f64 {
    if x < 0.0 && x >= -CLIP_TOL {
        0.0
    } else {
        x
    }
}

/// One-body reduced purity `P_1 = Tr[g^2]`, basis independent.
pub fn reduced_purity_1(g: &OneBodyRDM) -> f64 {
    let m = g.num_orbitals();
    let mut p = 0.0;
    for e1 in 0..m {
        for e2 in 0..m {
            p += (g.get(e1, e2) * g.get(e2, e1)).re;
        }
    }
    p
}

/// Two-body reduced purity `P_2 = sum G[e1,e2,e4,e3] G[e4,e3,e1,e2]`.
pub fn reduced_purity_2(gamma: &TwoBodyRDM) -> f64 {
    let m = gamma.num_orbitals();
    let mut p = 0.0;
    for e1 in 0..m {
        for e2 in 0..m {
            for e4 in 0..m {
                for e3 in 0..m {
                    p += (gamma.get(e1, e2, e4, e3) * gamma.get(e4, e3, e1, e2)).re;
                }
            }
        }
    }
    p
}

/// One-body distilled purity `P_1 - sum_e (g[e][e])^2`, the pure
/// off-diagonal weight `sum_{e1 != e2} |g[e1][e2]|^2`. Basis dependent.
pub fn distilled_p1(g: &OneBodyRDM) -> f64 {
    let diag_sq: f64 = (0..g.num_orbitals()).map(|e| g.get(e, e).re.powi(2)).sum();
    clip(reduced_purity_1(g) - diag_sq)
}

/// Two-body distilled purity `P_2 - 2 sum_{e1,e2} (G[e1,e2,e1,e2])^2`.
pub fn distilled_p2(gamma: &TwoBodyRDM) -> f64 {
    let m = gamma.num_orbitals();
    let mut diag_sq = 0.0;
    for e1 in 0..m {
        for e2 in 0..m {
            diag_sq += gamma.get(e1, e2, e1, e2).re.powi(2);
        }
    }
    clip(reduced_purity_2(gamma) - 2.0 * diag_sq)
}

/// The population part of `P_1`: `sum_e (sum_m a_mm f_m(e))^2`.
fn p1_population(rho: &ManyBodyDensityMatrix) -> f64 {
    let basis = rho.basis();
    let pops = rho.populations();
    let mut density = vec![0.0; basis.num_orbitals()];
    for (n, pop) in pops.iter().enumerate() {
        for e in basis.det(n).orbitals() {
            density[e] += pop;
        }
    }
    density.iter().map(|d| d * d).sum()
}

/// The population part of `P_2`:
/// `(1/2) sum_{n,p} a_nn a_pp [(N - s_np)^2 - (N - s_np)]`.
fn p2_population(rho: &ManyBodyDensityMatrix, table: &PairTable) -> f64 {
    let pops = rho.populations();
    let n_part = table.num_particles() as f64;
    let k = pops.len();
    let mut acc = 0.0;
    for n in 0..k {
        for p in 0..k {
            let shared = n_part - table.order(n, p) as f64;
            acc += pops[n] * pops[p] * (shared * shared - shared);
        }
    }
    0.5 * acc
}

/// Coherence part shared by `P_1` and the one-body distilled purity: the
/// double primed sum over ordered order-1 pairs whose transitions are
/// mutually reversed, with phase-folded coefficients. Factorizes into
/// `sum_{(c,d)} S(c,d) S(d,c)` over transition groups.
fn p1_coherence(rho: &ManyBodyDensityMatrix, table: &PairTable) -> f64 {
    // BTreeMap keeps the reduction order independent of hasher state.
    use std::collections::BTreeMap;
    let a = rho.coefficients();
    let mut group_sums: BTreeMap<(u8, u8), num_complex::Complex64> = BTreeMap::new();
    for p in table.singles() {
        let eff = a[(p.n as usize, p.m as usize)] * p.phase;
        *group_sums.entry((p.created, p.destroyed)).or_default() += eff;
    }
    let mut acc = 0.0;
    for (&(c, d), s) in &group_sums {
        if let Some(rev) = group_sums.get(&(d, c)) {
            acc += (s * rev).re;
        }
    }
    acc
}

/// Coherence part shared by `P_2` and the two-body distilled purity: the
/// order-1 block carries the `(N - s_mq)` weight between the source
/// determinants of the matched pairs; the order-2 block pairs mutually
/// reversed two-particle transitions.
fn p2_coherence(rho: &ManyBodyDensityMatrix, table: &PairTable) -> f64 {
    let a = rho.coefficients();
    let n_part = table.num_particles() as f64;
    let mut acc = 0.0;
    for p in table.singles() {
        let eff_p = a[(p.n as usize, p.m as usize)] * p.phase;
        for &j in table.reverse_single_group(p.created, p.destroyed) {
            let q = &table.singles()[j as usize];
            let eff_q = a[(q.n as usize, q.m as usize)] * q.phase;
            let weight = n_part - table.order(p.m as usize, q.m as usize) as f64;
            acc += (eff_p * eff_q).re * weight;
        }
    }
    for p in table.doubles() {
        let eff_p = a[(p.n as usize, p.m as usize)] * p.phase;
        for &j in table.reverse_double_group(p.created, p.destroyed) {
            let q = &table.doubles()[j as usize];
            let eff_q = a[(q.n as usize, q.m as usize)] * q.phase;
            acc += (eff_p * eff_q).re;
        }
    }
    acc
}

/// Closed-form one-body reduced purity evaluated from the coefficients.
pub fn p1_closed(rho: &ManyBodyDensityMatrix) -> f64 {
    let table = PairTable::new(rho.basis());
    p1_closed_with(rho, &table)
}

pub fn p1_closed_with(rho: &ManyBodyDensityMatrix, table: &PairTable) -> f64 {
    p1_population(rho) + p1_coherence(rho, table)
}

/// Closed-form two-body reduced purity evaluated from the coefficients.
pub fn p2_closed(rho: &ManyBodyDensityMatrix) -> f64 {
    let table = PairTable::new(rho.basis());
    p2_closed_with(rho, &table)
}

pub fn p2_closed_with(rho: &ManyBodyDensityMatrix, table: &PairTable) -> f64 {
    p2_population(rho, table) + p2_coherence(rho, table)
}

/// Closed-form one-body distilled purity (the coherence part alone).
pub fn distilled_p1_closed(rho: &ManyBodyDensityMatrix) -> f64 {
    let table = PairTable::new(rho.basis());
    distilled_p1_closed_with(rho, &table)
}

pub fn distilled_p1_closed_with(rho: &ManyBodyDensityMatrix, table: &PairTable) -> f64 {
    clip(p1_coherence(rho, table))
}

/// Closed-form two-body distilled purity (the coherence part alone).
pub fn distilled_p2_closed(rho: &ManyBodyDensityMatrix) -> f64 {
    let table = PairTable::new(rho.basis());
    distilled_p2_closed_with(rho, &table)
}

pub fn distilled_p2_closed_with(rho: &ManyBodyDensityMatrix, table: &PairTable) -> f64 {
    clip(p2_coherence(rho, table))
}

/// Limiting values for the distilled purities in a given basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistilledBounds {
    /// `sum_{m != n} a_mm a_nn s_nm`
    pub p1_max_tight: f64,
    /// `N (1 - 1/K)`
    pub p1_max_loose: f64,
    /// `sum_{n > m} a_mm a_nn s_nm (2N - s_nm - 1)`
    pub p2_max_tight: f64,
    /// `N(N-1)/2 (1 - 1/K)`
    pub p2_max_loose: f64,
}

/// Population-weighted and population-free upper bounds on the distilled
/// purities, evaluated in the same basis as the populations and coherence
/// orders supplied.
pub fn distilled_bounds(
    populations: &[f64],
    orders: &[u8],
    n_particles: usize,
) -> Result<DistilledBounds> {
    let k = populations.len();
    let sum: f64 = populations.iter().sum();
    if populations.iter().any(|&p| p < -1e-12) || (sum - 1.0).abs() > 1e-8 {
        return Err(Error::BadPopulations { sum });
    }
    if orders.len() != k * k {
        return Err(Error::MatrixShape {
            rows: orders.len(),
            cols: 1,
            expected: k * k,
        });
    }
    for n in 0..k {
        for m in 0..k {
            let bad_diag = n == m && orders[n * k + m] != 0;
            if bad_diag || orders[n * k + m] != orders[m * k + n] {
                return Err(Error::BadOrderMatrix { n, m });
            }
        }
    }
    let nf = n_particles as f64;
    let kf = k as f64;
    let mut p1_tight = 0.0;
    let mut p2_tight = 0.0;
    for n in 0..k {
        for m in 0..k {
            if n == m {
                continue;
            }
            let s = orders[n * k + m] as f64;
            let w = populations[n] * populations[m];
            p1_tight += w * s;
            if n > m {
                p2_tight += w * s * (2.0 * nf - s - 1.0);
            }
        }
    }
    Ok(DistilledBounds {
        p1_max_tight: p1_tight,
        p1_max_loose: nf * (1.0 - 1.0 / kf),
        p2_max_tight: p2_tight,
        p2_max_loose: nf * (nf - 1.0) / 2.0 * (1.0 - 1.0 / kf),
    })
}

/// All decoherence measures of one state in one single-particle basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PurityReport {
    pub basis_tag: String,
    /// Full purity `Tr[rho^2]`.
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    /// One-body distilled purity in this basis.
    pub dp1: f64,
    /// Two-body distilled purity in this basis.
    pub dp2: f64,
    pub bounds: DistilledBounds,
}

impl PurityReport {
    /// Assembles a report from the RDM route: purity from the coefficients,
    /// reduced/distilled purities from the supplied RDMs, bounds from the
    /// populations and coherence orders in the same basis.
    pub fn from_rdms(
        basis_tag: impl Into<String>,
        purity: f64,
        g: &OneBodyRDM,
        gamma: &TwoBodyRDM,
        populations: &[f64],
        orders: &[u8],
        n_particles: usize,
    ) -> Result<Self> {
        let bounds = distilled_bounds(populations, orders, n_particles)?;
        Ok(Self {
            basis_tag: basis_tag.into(),
            p: purity,
            p1: reduced_purity_1(g),
            p2: reduced_purity_2(gamma),
            dp1: distilled_p1(g),
            dp2: distilled_p2(gamma),
            bounds,
        })
    }

    /// Report for a density matrix in its native determinant basis.
    pub fn from_density_matrix(
        basis_tag: impl Into<String>,
        rho: &ManyBodyDensityMatrix,
    ) -> Result<Self> {
        let table = PairTable::new(rho.basis());
        let g = table.one_rdm(rho);
        let gamma = table.two_rdm(rho);
        Self::from_rdms(
            basis_tag,
            rho.purity(),
            &g,
            &gamma,
            &rho.populations(),
            table.order_matrix(),
            table.num_particles(),
        )
    }
}
