//! The `validate` subcommand: oracle-equivalence and property suites over
//! the numerical kernels, with per-property instance counts and the worst
//! observed deviation.

use distill_core::fock::{enumerate_determinants, transition_descriptor, LadderKind};
use distill_core::purity::{
    distilled_bounds, distilled_p1, distilled_p1_closed_with, distilled_p2,
    distilled_p2_closed_with, p1_closed_with, p2_closed_with, reduced_purity_1, reduced_purity_2,
};
use distill_core::rdm::{one_rdm_oracle, two_rdm_oracle, PairTable};
use distill_core::{random, ManyBodyDensityMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Scope {
    All,
    Fock,
    Rdm,
    Purity,
    Ssh,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub suite: &'static str,
    pub name: &'static str,
    pub instances: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub passed: bool,
}

impl PropertyReport {
    fn new(
        suite: &'static str,
        name: &'static str,
        instances: usize,
        max_deviation: f64,
        tolerance: f64,
        seed: u64,
    ) -> Self {
        Self {
            suite,
            name,
            instances,
            max_deviation,
            tolerance,
            seed,
            passed: max_deviation <= tolerance,
        }
    }
}

pub fn run_scope(scope: Scope, seed: u64) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    if matches!(scope, Scope::All | Scope::Fock) {
        out.extend(validate_fock());
    }
    if matches!(scope, Scope::All | Scope::Rdm) {
        out.extend(validate_rdm(seed));
    }
    if matches!(scope, Scope::All | Scope::Purity) {
        out.extend(validate_purity(seed));
    }
    if matches!(scope, Scope::All | Scope::Ssh) {
        out.extend(validate_ssh(seed));
    }
    out
}

/// Exact enumerations over small orbital spaces: sign algebra and
/// transition-label reconstruction.
pub fn validate_fock() -> Vec<PropertyReport> {
    let mut anticommutation_dev: f64 = 0.0;
    let mut anticommutation_count = 0usize;
    let mut phase_dev: f64 = 0.0;
    let mut phase_count = 0usize;
    let mut order_dev: f64 = 0.0;
    let mut order_count = 0usize;
    for m in 2..=6usize {
        for n in 0..=m {
            let dets = enumerate_determinants(m, n).unwrap();
            for d in &dets {
                for p in 0..m {
                    for q in 0..m {
                        if p == q {
                            continue;
                        }
                        let pq = d
                            .apply_chain(&[(p, LadderKind::Create), (q, LadderKind::Create)])
                            .unwrap();
                        let qp = d
                            .apply_chain(&[(q, LadderKind::Create), (p, LadderKind::Create)])
                            .unwrap();
                        anticommutation_count += 1;
                        match (pq, qp) {
                            (Some((s1, d1)), Some((s2, d2))) => {
                                if d1 != d2 || s1 != -s2 {
                                    anticommutation_dev = 1.0;
                                }
                            }
                            (None, None) => {}
                            _ => anticommutation_dev = 1.0,
                        }
                    }
                }
            }
            for a in &dets {
                for b in &dets {
                    let s = distill_core::coherence_order(a, b).unwrap();
                    order_count += 1;
                    if s != distill_core::coherence_order(b, a).unwrap() || (s == 0) != (a == b) {
                        order_dev = 1.0;
                    }
                    let Some(t) = transition_descriptor(a, b).unwrap() else {
                        continue;
                    };
                    phase_count += 1;
                    let ops: Vec<(usize, LadderKind)> = t
                        .created()
                        .iter()
                        .rev()
                        .map(|&c| (c as usize, LadderKind::Create))
                        .chain(
                            t.destroyed()
                                .iter()
                                .rev()
                                .map(|&d| (d as usize, LadderKind::Annihilate)),
                        )
                        .collect();
                    match a.apply_chain(&ops).unwrap() {
                        Some((sign, reached)) if reached == *b && sign == t.phase() => {}
                        _ => phase_dev = 1.0,
                    }
                }
            }
        }
    }
    vec![
        PropertyReport::new(
            "fock",
            "creation anticommutation by enumeration (M <= 6)",
            anticommutation_count,
            anticommutation_dev,
            0.0,
            0,
        ),
        PropertyReport::new(
            "fock",
            "coherence order symmetry and faithfulness",
            order_count,
            order_dev,
            0.0,
            0,
        ),
        PropertyReport::new(
            "fock",
            "descriptor phase reconstructs canonical target (s <= 2)",
            phase_count,
            phase_dev,
            0.0,
            0,
        ),
    ]
}

const SECTORS: [(usize, usize); 3] = [(4, 2), (6, 3), (8, 4)];

/// Closed-form RDMs against the brute-force ladder oracles on random
/// coefficient matrices, with and without high-order coherence support.
pub fn validate_rdm(seed: u64) -> Vec<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev1: f64 = 0.0;
    let mut dev2: f64 = 0.0;
    let mut count = 0usize;
    let mut trace_dev: f64 = 0.0;
    for &(m, n) in &SECTORS {
        let basis = random::full_basis(m, n);
        let table = PairTable::new(&basis);
        let per_sector = 500 / SECTORS.len() + 1;
        for i in 0..per_sector {
            let masked = i % 2 == 0;
            let rho = random::random_hermitian_state(&mut rng, &basis, masked.then_some(2));
            let g_oracle = one_rdm_oracle(&rho);
            let g_closed = table.one_rdm(&rho);
            dev1 = dev1.max(
                (g_oracle.matrix() - g_closed.matrix())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
            );
            let gamma_oracle = two_rdm_oracle(&rho);
            let gamma_closed = table.two_rdm(&rho);
            dev2 = dev2.max(gamma_oracle.max_abs_diff(&gamma_closed));
            let pair_trace = (n * (n - 1)) as f64 / 2.0;
            trace_dev = trace_dev.max((gamma_oracle.pair_trace() - pair_trace).abs());
            count += 1;
        }
    }
    vec![
        PropertyReport::new("rdm", "closed-form 1-RDM vs ladder oracle", count, dev1, 1e-12, seed),
        PropertyReport::new("rdm", "closed-form 2-RDM vs ladder oracle", count, dev2, 1e-12, seed),
        PropertyReport::new("rdm", "2-RDM pair trace = N(N-1)/2", count, trace_dev, 1e-10, seed),
    ]
}

/// Purity closed forms against the RDM definitions, basis invariance and
/// the limiting-value bounds.
pub fn validate_purity(seed: u64) -> Vec<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let mut closed_dev: f64 = 0.0;
    let mut closed_count = 0usize;
    for &(m, n) in &SECTORS {
        let basis = random::full_basis(m, n);
        let table = PairTable::new(&basis);
        for i in 0..34 {
            let masked = i % 2 == 0;
            let rho = random::random_hermitian_state(&mut rng, &basis, masked.then_some(2));
            let g = one_rdm_oracle(&rho);
            let gamma = two_rdm_oracle(&rho);
            closed_dev = closed_dev
                .max((p1_closed_with(&rho, &table) - reduced_purity_1(&g)).abs())
                .max((p2_closed_with(&rho, &table) - reduced_purity_2(&gamma)).abs())
                .max((distilled_p1_closed_with(&rho, &table) - distilled_p1(&g)).abs())
                .max((distilled_p2_closed_with(&rho, &table) - distilled_p2(&gamma)).abs());
            closed_count += 1;
        }
    }

    let mut invariance_dev: f64 = 0.0;
    let basis = random::full_basis(6, 3);
    let rho = random::random_mixed_state_on(&mut rng, &basis, 3);
    let g = one_rdm_oracle(&rho);
    let gamma = two_rdm_oracle(&rho);
    let (p1, p2) = (reduced_purity_1(&g), reduced_purity_2(&gamma));
    for _ in 0..20 {
        let u = random::random_unitary(&mut rng, 6);
        invariance_dev = invariance_dev
            .max((reduced_purity_1(&g.rotate(&u).unwrap()) - p1).abs())
            .max((reduced_purity_2(&gamma.rotate(&u).unwrap()) - p2).abs());
    }

    let mut bound_violation: f64 = 0.0;
    let mut bound_count = 0usize;
    for _ in 0..60 {
        let n_pure = rng.gen_range(1..4);
        let rho = random::random_mixed_state(&mut rng, 6, 3, n_pure);
        let table = PairTable::new(rho.basis());
        let b = distilled_bounds(&rho.populations(), table.order_matrix(), 3).unwrap();
        let dp1 = distilled_p1(&one_rdm_oracle(&rho));
        let dp2 = distilled_p2(&two_rdm_oracle(&rho));
        bound_violation = bound_violation
            .max(dp1 - b.p1_max_tight)
            .max(dp1 - b.p1_max_loose)
            .max(dp2 - b.p2_max_tight)
            .max(dp2 - b.p2_max_loose)
            .max(-dp1)
            .max(-dp2)
            .max(0.0);
        bound_count += 1;
    }

    // Ratio law on pure order-1 two-determinant superpositions.
    let mut ratio_dev: f64 = 0.0;
    for n in [2usize, 3, 4] {
        let m = n + 4;
        let base: Vec<usize> = (0..n).collect();
        let mut excited = base.clone();
        excited[n - 1] = n + 1;
        let dets = vec![
            distill_core::SlaterDeterminant::from_orbitals(m, &base).unwrap(),
            distill_core::SlaterDeterminant::from_orbitals(m, &excited).unwrap(),
        ];
        let basis =
            std::sync::Arc::new(distill_core::DeterminantBasis::new(dets).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = ManyBodyDensityMatrix::from_pure(
            basis,
            &[Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        )
        .unwrap();
        let dp1 = distilled_p1(&one_rdm_oracle(&rho));
        let dp2 = distilled_p2(&two_rdm_oracle(&rho));
        ratio_dev = ratio_dev.max((dp2 - (n as f64 - 1.0) * dp1).abs());
    }

    vec![
        PropertyReport::new(
            "purity",
            "closed forms vs RDM definitions (P1, P2, dP1, dP2)",
            closed_count,
            closed_dev,
            1e-10,
            seed,
        ),
        PropertyReport::new(
            "purity",
            "P1/P2 invariance under random unitaries",
            20,
            invariance_dev,
            1e-10,
            seed,
        ),
        PropertyReport::new(
            "purity",
            "distilled bounds hold on valid states",
            bound_count,
            bound_violation,
            1e-10,
            seed,
        ),
        PropertyReport::new(
            "purity",
            "dP2 = (N-1) dP1 for pure order-1 pairs",
            3,
            ratio_dev,
            1e-12,
            seed,
        ),
    ]
}

/// Model-level checks: Hamiltonian structure, propagator exactness, Wigner
/// statistics and short-run conservation.
pub fn validate_ssh(seed: u64) -> Vec<PropertyReport> {
    use distill_ssh::*;

    let params = SshParams::default();
    let mut reports = Vec::new();

    // Chiral symmetry of the single-particle spectrum.
    let geom = optimize_geometry(&params).expect("geometry optimization");
    let h = spatial_h1(&params, &geom.u_star, 0.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut evs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    evs.sort_by(f64::total_cmp);
    let chiral_dev = (0..evs.len())
        .map(|i| (evs[i] + evs[evs.len() - 1 - i]).abs())
        .fold(0.0, f64::max);
    reports.push(PropertyReport::new(
        "ssh",
        "single-particle spectrum symmetric about zero",
        evs.len(),
        chiral_dev,
        1e-10,
        seed,
    ));

    // Factorized propagator against the dense many-body exponential.
    let sector = SectorBasis::new(4, 4).expect("sector");
    let mut prop = SectorPropagator::new(&sector);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    let mut prop_dev: f64 = 0.0;
    for _ in 0..3 {
        let u: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.05..0.05)).collect();
        let spatial = spatial_h1(&params, &u, 0.0);
        let h1 = build_h1(&params, &u);
        let h_mb = many_body_hamiltonian(&h1, &sector.basis);
        let eig = nalgebra::SymmetricEigen::new(h_mb);
        let tau = 0.31;
        let mut psi = distill_core::random::random_amplitudes(&mut rng, sector.len());
        let k = sector.len();
        let mut reference = vec![Complex64::new(0.0, 0.0); k];
        for a in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..k {
                acc += Complex64::new(eig.eigenvectors[(n, a)], 0.0) * psi[n];
            }
            let ph = Complex64::from_polar(1.0, -eig.eigenvalues[a] * tau);
            for n in 0..k {
                reference[n] += Complex64::new(eig.eigenvectors[(n, a)], 0.0) * acc * ph;
            }
        }
        let diag = vec![0.0; 4];
        let hop: Vec<f64> = (0..3).map(|b| spatial[(b, b + 1)]).collect();
        prop.load_h(&diag, &hop);
        prop.apply(&sector, tau, &mut psi);
        prop_dev = prop_dev.max(
            psi.iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        );
    }
    reports.push(PropertyReport::new(
        "ssh",
        "factorized propagator vs dense many-body exponential",
        3,
        prop_dev,
        1e-12,
        seed,
    ));

    // Wigner first moments and per-mode zero-point energy.
    let modes = normal_modes(&params, &geom.u_star).expect("normal modes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n_samp = 10_000;
    let n_modes = modes.frequencies.len();
    let mut mode_energy = vec![0.0; n_modes];
    for _ in 0..n_samp {
        let (u, p) = wigner_sample(&params, &modes, &geom.u_star, &mut rng);
        for k in 0..n_modes {
            let mut q = 0.0;
            let mut pk = 0.0;
            for site in 0..params.n_sites {
                q += modes.site_vectors[(site, k)] * (u[site] - geom.u_star[site]);
                pk += modes.site_vectors[(site, k)] * p[site];
            }
            let w = modes.frequencies[k];
            mode_energy[k] +=
                (pk * pk / (2.0 * params.mass) + 0.5 * params.mass * w * w * q * q) / n_samp as f64;
        }
    }
    let zpe_rel_dev = (0..n_modes)
        .map(|k| {
            let expect = HBAR_EV_FS * modes.frequencies[k] / 2.0;
            (mode_energy[k] - expect).abs() / expect
        })
        .fold(0.0, f64::max);
    reports.push(PropertyReport::new(
        "ssh",
        "Wigner per-mode energy = hbar w / 2 (relative)",
        n_samp,
        zpe_rel_dev,
        0.05,
        seed,
    ));

    // Short conservation run and single-trajectory purity.
    let exp = Experiment {
        params: params.clone(),
        initial: InitialState::SuperpositionOneBody,
        excite_spin_up: true,
        pulse: None,
        n_traj: 1,
        seed,
        t_final: 20.0,
        dt: 1e-3,
        sample_every: 0.5,
        wigner: true,
    };
    let out = run_ensemble(&exp).expect("short ensemble");
    let e0 = out.samples[0].total_energy;
    let energy_drift = out
        .samples
        .iter()
        .map(|s| (s.total_energy - e0).abs())
        .fold(0.0, f64::max);
    reports.push(PropertyReport::new(
        "ssh",
        "field-free energy conservation over 20 fs",
        out.samples.len(),
        energy_drift,
        1e-6,
        seed,
    ));
    let purity_dev = out
        .samples
        .iter()
        .map(|s| (s.site.p - 1.0).abs())
        .fold(0.0, f64::max);
    reports.push(PropertyReport::new(
        "ssh",
        "single trajectory stays pure",
        out.samples.len(),
        purity_dev,
        1e-9,
        seed,
    ));
    reports.push(PropertyReport::new(
        "ssh",
        "per-step norm preservation",
        out.samples.len(),
        out.max_norm_dev,
        1e-10,
        seed,
    ));
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_and_rdm_suites_pass() {
        for r in validate_fock().iter().chain(validate_rdm(7).iter()) {
            assert!(r.passed, "{}: {} -> {:e}", r.suite, r.name, r.max_deviation);
        }
    }

    #[test]
    fn purity_suite_passes() {
        for r in validate_purity(7) {
            assert!(r.passed, "{}: {} -> {:e}", r.suite, r.name, r.max_deviation);
        }
    }
}
