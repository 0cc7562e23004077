use proptest::prelude::*;
use wedgetrap::geometry::{volume_fractions, CouplingPattern, Geometry, JacobiFrame, MassSystem, Statistics};
use wedgetrap::quench::{evolve_quench, Schedule};
use wedgetrap::spectral::converged_sector_levels;
use wedgetrap::twobody::solve_two_body;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn jacobi_round_trip_and_hamiltonian(
        masses in prop::collection::vec(0.1f64..20.0, 4),
        q in prop::collection::vec(-3.0f64..3.0, 4),
        p in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let sys = MassSystem::with_pattern(&masses, "ABCD", "bbbb", CouplingPattern::AllInfinite).unwrap();
        let frame = JacobiFrame::new(&sys).unwrap();
        let (rel, cm) = frame.to_jacobi(&q);
        let back = frame.from_jacobi(&rel, cm);
        for (a, b) in q.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let pj = frame.momenta_to_jacobi(&p);
        let jacobi: f64 = rel.iter().chain([cm].iter()).zip(&pj).map(|(x, k)| 0.5 * (x * x + k * k)).sum();
        prop_assert!((jacobi - frame.particle_hamiltonian(&q, &p)).abs() < 1e-9 * (1.0 + jacobi));
    }

    #[test]
    fn two_body_energy_is_monotone_and_bracketed(g1 in 0.01f64..30.0, g2 in 0.01f64..30.0, ratio in 0.2f64..5.0) {
        let pair = MassSystem::with_pattern(&[1.0, ratio], "AB", "bb", CouplingPattern::AllInfinite).unwrap();
        let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
        let (e_lo, e_hi) = (solve_two_body(lo, &pair, 0).unwrap().energy_rel, solve_two_body(hi, &pair, 0).unwrap().energy_rel);
        prop_assert!(e_lo <= e_hi + 1e-12);
        prop_assert!(e_lo > 0.5 && e_hi < 1.5);
    }

    #[test]
    fn volume_fractions_sum_to_one(beta in 0.05f64..50.0, seed in any::<u64>()) {
        let sys = MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson).unwrap();
        let t = volume_fractions(&sys, 20_000, seed).unwrap();
        prop_assert!((t.total() - 1.0).abs() < 1e-12);
        prop_assert_eq!(t.sectors.iter().map(|s| s.count).sum::<u64>(), 20_000);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn ermakov_first_integral(omega0 in 0.3f64..3.0, omega1 in 0.3f64..3.0) {
        // λ̇² + ω1² λ² + ω0² / λ² is conserved after a sudden change
        let sol = evolve_quench(Schedule::Sudden { omega0, omega1 }, 4.0, 0.05).unwrap();
        let integral = |i: usize| {
            let (l, d) = (sol.lambda[i], sol.dlambda[i]);
            d * d + omega1 * omega1 * l * l + omega0 * omega0 / (l * l)
        };
        let first = integral(0);
        for i in 0..sol.times.len() {
            prop_assert!((integral(i) - first).abs() < 1e-9 * first);
        }
    }

    #[test]
    fn species_swap_maps_beta_to_inverse(beta in 0.2f64..5.0) {
        // exchanging the species labels is a change of mass unit, which leaves the angular problem invariant
        let a = Geometry::new(MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson).unwrap()).unwrap();
        let b = Geometry::new(MassSystem::two_plus_two(1.0 / beta, Statistics::Boson, Statistics::Boson).unwrap()).unwrap();
        for (wa, wb) in [("ABBA", "BAAB"), ("AABB", "BBAA"), ("ABAB", "BABA")] {
            let mut la: Vec<f64> = converged_sector_levels(&a, wa, [10, 12, 14], 2).unwrap().iter().map(|l| l.eigenvalue).collect();
            let mut lb: Vec<f64> = converged_sector_levels(&b, wb, [10, 12, 14], 2).unwrap().iter().map(|l| l.eigenvalue).collect();
            la.sort_by(f64::total_cmp);
            lb.sort_by(f64::total_cmp);
            prop_assert_eq!(la.len(), lb.len());
            for (x, y) in la.iter().zip(&lb) {
                prop_assert!((x - y).abs() < 1e-5 * x, "{wa}/{wb} at β={beta}: {x} vs {y}");
            }
        }
    }
}
