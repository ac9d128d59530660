use std::sync::Arc;

use proptest::prelude::*;
use tripc_core::conelab::{boundary_cone, OrderedSpace};
use tripc_core::instance::{random_cone_element, random_element, random_instance, random_subtripotent, random_tro};
use tripc_core::linalg::is_psd_lenient;
use tripc_core::peirce::{range_tripotent, PeirceAlgebra};
use tripc_core::rng::SplitMix64;
use tripc_core::subspace::Subspace;
use tripc_core::tripotent::{amplify, inf_commuting, leq, sup, sup_exists, Tripotent};
use tripc_core::tro::{inject, theta, TroSpace};
use tripc_core::{CMatrix, TolerancePolicy};

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

/// Pair `a ≤ b` with `b` random and `a` cut from the Peirce pieces of `b`.
fn ordered_pair(seed: u64) -> (Tripotent, Tripotent) {
    let inst = random_instance(4, seed).unwrap();
    let b = inst.tripotents[0].clone();
    let mut rng = SplitMix64::new(seed ^ 0x5eed);
    let a = random_subtripotent(&b, &mut rng, &tol()).unwrap();
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generation_is_idempotent(seed: u64) {
        let z = random_instance(5, seed).unwrap().z;
        let again = TroSpace::generate(z.p(), z.q(), z.basis(), &tol()).unwrap();
        prop_assert!(again.same_as(&z, &tol()));
        prop_assert_eq!(again.dim(), z.dim());
    }

    #[test]
    fn natural_cone_is_j_intersect_psd(seed: u64) {
        let mut rng = SplitMix64::new(seed);
        let n = rng.range_inclusive(1, 4);
        let z = random_tro(n, n, rng.coin(), &mut rng, &tol()).unwrap();
        let j = z.j_subalgebra(&tol()).unwrap();
        for _ in 0..20 {
            let x = if rng.coin() && j.dim() > 0 {
                let y = random_element(j.subspace(), &mut rng);
                &y.adjoint() * &y
            } else {
                random_element(z.subspace(), &mut rng).hermitian_part()
            };
            let oracle = j.subspace().contains(&x, &tol()) && is_psd_lenient(&x, &tol());
            prop_assert_eq!(z.natural_cone_membership(&x, &tol()).unwrap(), oracle);
        }
    }

    #[test]
    fn quotient_kills_ideal_and_is_onto(seed: u64) {
        let mut rng = SplitMix64::new(seed);
        let (n1, n2) = (rng.range_inclusive(1, 3), rng.range_inclusive(1, 3));
        let z1 = random_tro(n1, n1, false, &mut rng, &tol()).unwrap();
        let z2 = random_tro(n2, n2, false, &mut rng, &tol()).unwrap();
        let z = TroSpace::direct_sum(&[z1.clone(), z2], &tol());
        let j_basis: Vec<CMatrix> = z1
            .basis()
            .iter()
            .map(|b| {
                let mut m = CMatrix::zeros(z.p(), z.q());
                m.set_block(0, 0, b);
                m
            })
            .collect();
        let j = Subspace::span(z.p(), z.q(), &j_basis, &tol());
        let (quotient, map) = z.quotient_by_ideal(&j, &tol()).unwrap();
        for b in j.basis() {
            prop_assert!(map.apply(b, &tol()).unwrap().frob_norm() <= tol().eq_tol);
        }
        prop_assert_eq!(quotient.dim() + j.dim(), z.dim());
        let image = Subspace::span(
            z.p(),
            z.q(),
            &z.basis().iter().map(|b| map.apply(b, &tol()).unwrap()).collect::<Vec<_>>(),
            &tol(),
        );
        prop_assert!(image.same_span(quotient.subspace(), &tol()));
    }

    #[test]
    fn inject_squares_to_diagonal_pair(seed: u64) {
        let z = random_instance(4, seed).unwrap().z;
        for b in z.basis() {
            let i = inject(b);
            let expect = CMatrix::block_diag(&[b * &b.adjoint(), &b.adjoint() * b]);
            prop_assert!((&(&i * &i) - &expect).frob_norm() <= tol().eq_tol);
        }
    }

    #[test]
    fn order_implies_support_order(seed: u64) {
        let (a, b) = ordered_pair(seed);
        prop_assert!(leq(&a, &b, &tol()).unwrap());
        prop_assert!(is_psd_lenient(&(&b.right() - &a.right()), &tol()));
        prop_assert!(is_psd_lenient(&(&b.left() - &a.left()), &tol()));
    }

    #[test]
    fn breve_is_theta_of_hat(seed: u64) {
        let u = random_instance(4, seed).unwrap().tripotents[1].clone();
        let p = u.space().p();
        prop_assert!((&u.breve() - &theta(&u.hat(), p)).frob_norm() <= tol().eq_tol);
        prop_assert!((&u.neg().hat() - &u.breve()).frob_norm() <= tol().eq_tol);
    }

    #[test]
    fn supremum_dominates_both(seed: u64) {
        let inst = random_instance(4, seed).unwrap();
        let (a, b) = (&inst.tripotents[1], &inst.tripotents[2]);
        prop_assert!(sup_exists(a, a, &tol()).unwrap());
        if sup_exists(a, b, &tol()).unwrap() {
            let w = sup(a, b, &tol()).unwrap();
            prop_assert!(leq(a, &w, &tol()).unwrap() && leq(b, &w, &tol()).unwrap());
        }
        if !a.is_zero() {
            prop_assert!(!sup_exists(a, &a.neg(), &tol()).unwrap());
        }
    }

    #[test]
    fn amplification_respects_order_and_infima(seed: u64) {
        let (a, b) = ordered_pair(seed);
        let (a2, b2) = (amplify(&a, 2, &tol()).unwrap(), amplify(&b, 2, &tol()).unwrap());
        prop_assert!(leq(&a2, &b2, &tol()).unwrap());
        let i = inf_commuting(&a, &b, &tol()).unwrap();
        let i2 = inf_commuting(&a2, &b2, &tol()).unwrap();
        let expect = amplify(&i, 2, &tol()).unwrap();
        prop_assert!((i2.matrix() - expect.matrix()).frob_norm() <= 1e-8);
    }

    #[test]
    fn cone_membership_matches_range_order(seed: u64) {
        let (a, b) = ordered_pair(seed);
        let mut rng = SplitMix64::new(seed);
        let pa = PeirceAlgebra::build(&b, None, &tol()).unwrap();
        let pa_small = PeirceAlgebra::build(&a, None, &tol()).unwrap();
        let z = b.space().clone();
        for _ in 0..10 {
            let x = random_cone_element(&a, &mut rng, &tol());
            prop_assert!(pa_small.cone_membership(&x, &tol()).unwrap());
            prop_assert!(pa.cone_membership(&x, &tol()).unwrap());
            let y = random_element(z.subspace(), &mut rng);
            let r = range_tripotent(&z, &y, &tol()).unwrap();
            prop_assert_eq!(pa.cone_membership(&y, &tol()).unwrap(), leq(&r, &b, &tol()).unwrap());
        }
    }

    #[test]
    fn boundary_tripotent_grows_with_generators(seed: u64) {
        let mut rng = SplitMix64::new(seed);
        let n = rng.range_inclusive(1, 4);
        let gens: Vec<CMatrix> = (0..3)
            .map(|_| {
                let k = rng.range_inclusive(1, n);
                let g = rng.ginibre(n, k);
                (&g * &g.adjoint()).hermitian_part()
            })
            .collect();
        let full = Arc::new(TroSpace::full(n, n));
        let mut previous: Option<Tripotent> = None;
        for k in 1..=gens.len() {
            let x = OrderedSpace::new(full.basis().to_vec(), gens[..k].to_vec()).unwrap();
            let bc = boundary_cone(&x, &tol()).unwrap();
            prop_assert_eq!(bc.report.verdict, Some(true));
            if let Some(prev) = &previous {
                let prev = Tripotent::new(bc.u.space().clone(), prev.matrix(), &tol()).unwrap();
                prop_assert!(leq(&prev, &bc.u, &tol()).unwrap());
            }
            previous = Some(bc.u);
        }
    }
}
