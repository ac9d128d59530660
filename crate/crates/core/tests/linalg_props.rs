use proptest::prelude::*;
use tripc_core::linalg::{hermitian_eigen, polar_decompose, psd_sqrt, range_projection, rel_residual};
use tripc_core::rng::SplitMix64;
use tripc_core::{CMatrix, TolerancePolicy};

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

/// Ginibre matrix of the given rank.
fn low_rank(rng: &mut SplitMix64, p: usize, q: usize, rank: usize) -> CMatrix {
    &rng.ginibre(p, rank) * &rng.ginibre(rank, q)
}

fn hermitian(rng: &mut SplitMix64, n: usize) -> CMatrix {
    rng.ginibre(n, n).hermitian_part()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn polar_factor_is_a_tripotent(seed: u64, p in 1usize..7, q in 1usize..7, k in 0usize..7) {
        let mut rng = SplitMix64::new(seed);
        let x = low_rank(&mut rng, p, q, k.min(p).min(q));
        let polar = polar_decompose(&x, &tol());
        let r = &polar.r;
        let defect = (&(&(r * &r.adjoint()) * r) - r).frob_norm();
        prop_assert!(defect <= 10.0 * tol().eq_tol * r.frob_norm().max(1.0));
        prop_assert!(rel_residual(&(r * &polar.abs), &x) <= 10.0 * tol().eq_tol);
    }

    #[test]
    fn eigen_reconstructs(seed: u64, n in 1usize..=16) {
        let mut rng = SplitMix64::new(seed);
        let a = hermitian(&mut rng, n);
        let eig = hermitian_eigen(&a, &tol()).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(rel_residual(&eig.apply(|l| l), &a) <= 10.0 * tol().eq_tol);
        let v = &eig.vectors;
        prop_assert!((&(&v.adjoint() * v) - &CMatrix::identity(n)).frob_norm() <= 1e-10 * n as f64);
    }

    #[test]
    fn psd_sqrt_squares_back(seed: u64, n in 1usize..9, k in 0usize..9) {
        let mut rng = SplitMix64::new(seed);
        let g = rng.ginibre(n, k.min(n));
        let a = (&g * &g.adjoint()).hermitian_part();
        let s = psd_sqrt(&a, &tol()).unwrap();
        prop_assert!(rel_residual(&(&s * &s), &a) <= 10.0 * tol().eq_tol);
    }

    #[test]
    fn range_projection_fixes_range(seed: u64, p in 1usize..8, q in 1usize..8, k in 0usize..8) {
        let mut rng = SplitMix64::new(seed);
        let a = low_rank(&mut rng, p, q, k.min(p).min(q));
        let e = range_projection(&a, &tol());
        let scale = a.frob_norm().max(1.0);
        prop_assert!((&(&e * &a) - &a).frob_norm() <= tol().eq_tol * scale);
        prop_assert!(e.hermitian_defect() <= tol().eq_tol);
        prop_assert!((&(&e * &e) - &e).frob_norm() <= tol().eq_tol * p as f64);
        prop_assert_eq!(e.trace().re.round() as usize, k.min(p).min(q));
    }
}
