//! Seeded random TROs, tripotents and cone elements.
//!
//! A random TRO is `U (⊕ M_{pᵢ×qᵢ} ⊗ I_{mᵢ}) V*` for Haar unitaries `U, V`,
//! recovered by closing `max(p, q)` Ginibre elements of that pattern under the
//! triple product. *-TROs use square blocks and `U = V`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{eigh_unchecked, svd, CMatrix, TolerancePolicy};
use crate::peirce::spectral_tripotent;
use crate::rng::SplitMix64;
use crate::subspace::Subspace;
use crate::tripotent::Tripotent;
use crate::tro::TroSpace;

/// One block `M_{p×q} ⊗ I_m` of a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub p: usize,
    pub q: usize,
    pub m: usize,
}

/// Block pattern of a TRO before conjugation.
#[derive(Clone, Debug, Serialize)]
pub struct Pattern {
    pub p: usize,
    pub q: usize,
    pub blocks: Vec<Block>,
}

impl Pattern {
    /// Random pattern inside `p × q`; square blocks only when `square_blocks`.
    pub fn random(p: usize, q: usize, square_blocks: bool, rng: &mut SplitMix64) -> Self {
        let mut blocks = Vec::new();
        let (mut rows, mut cols) = (0, 0);
        for _ in 0..3 {
            let room_p = p - rows;
            let room_q = q - cols;
            if room_p == 0 || room_q == 0 {
                break;
            }
            let bp = rng.range_inclusive(1, room_p);
            let bq = if square_blocks {
                bp.min(room_q)
            } else {
                rng.range_inclusive(1, room_q)
            };
            let bp = if square_blocks { bq } else { bp };
            let max_m = (room_p / bp).min(room_q / bq).min(2);
            let m = rng.range_inclusive(1, max_m);
            blocks.push(Block { p: bp, q: bq, m });
            rows += bp * m;
            cols += bq * m;
            if rng.next_f64() < 0.4 {
                break;
            }
        }
        Self { p, q, blocks }
    }

    /// Ginibre element of the unconjugated pattern.
    pub fn ginibre(&self, rng: &mut SplitMix64) -> CMatrix {
        let mut out = CMatrix::zeros(self.p, self.q);
        let (mut r, mut c) = (0, 0);
        for b in &self.blocks {
            let g = rng.ginibre(b.p, b.q);
            let block = CMatrix::identity(b.m).kron(&g);
            out.set_block(r, c, &block);
            r += b.p * b.m;
            c += b.q * b.m;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.p * b.q).sum()
    }
}

/// Random TRO of ambient `p × q` with a block pattern conjugated by Haar unitaries.
pub fn random_tro(p: usize, q: usize, star: bool, rng: &mut SplitMix64, tol: &TolerancePolicy) -> Result<TroSpace> {
    let pattern = Pattern::random(p, q, star, rng);
    let left = rng.haar_unitary(p);
    let right = if star { left.clone() } else { rng.haar_unitary(q) };
    let gens: Vec<CMatrix> = (0..p.max(q).max(2))
        .map(|_| &(&left * &pattern.ginibre(rng)) * &right.adjoint())
        .collect();
    TroSpace::generate(p, q, &gens, tol)
}

/// Random element of `Z` with complex Gaussian coordinates.
pub fn random_element(space: &Subspace, rng: &mut SplitMix64) -> CMatrix {
    let coeffs: Vec<_> = (0..space.dim()).map(|_| rng.complex_normal()).collect();
    space.combine(&coeffs)
}

/// Tripotent `r(x) χ(|x|)` for a random element `x` and a random window of its
/// singular values, so ranks vary from zero to full.
pub fn random_tripotent(z: &Arc<TroSpace>, rng: &mut SplitMix64, tol: &TolerancePolicy) -> Result<Tripotent> {
    let x = random_element(z.subspace(), rng);
    let s = svd(&x).singular;
    let rank = s.iter().filter(|&&v| v > tol.rank_tol * s[0].max(1.0)).count();
    if rank == 0 {
        return Ok(Tripotent::zero(z.clone()));
    }
    let i = rng.below(rank);
    let j = rng.range_inclusive(i, rank - 1);
    let (hi, lo) = (s[i], s[j]);
    let pad = 1e-6 * s[0];
    spectral_tripotent(z, &x, (lo - pad).max(0.0), hi + pad, tol)
}

/// Mutually orthogonal projections `e_k` with `Σ e_k = b*b`: the eigenspaces
/// of `b*s` for a random selfadjoint `s ∈ Z₂(b)`. Each `b e_k` is a tripotent
/// of `Z` below `b`.
pub fn peirce_pieces(b: &Tripotent, rng: &mut SplitMix64, tol: &TolerancePolicy) -> Vec<CMatrix> {
    if b.rank() == 0 {
        return vec![];
    }
    let u = b.matrix();
    let y = random_element(&b.peirce2_space(tol), rng);
    let s = &y + &(&(u * &y.adjoint()) * u);
    let h = (&u.adjoint() * &s).hermitian_part();
    let eig = eigh_unchecked(&(&h + &b.right().scale(1e-3)));
    eig.clusters(1e-7)
        .into_iter()
        .filter(|c| eig.values[c[0]].abs() > 1e-7)
        .map(|c| eig.projection(&c))
        .collect()
}

/// `b·e` for a random sum `e` of pieces from [`peirce_pieces`]; always `≤ b`.
pub fn random_subtripotent(b: &Tripotent, rng: &mut SplitMix64, tol: &TolerancePolicy) -> Result<Tripotent> {
    let pieces = peirce_pieces(b, rng, tol);
    let keep = rng.range_inclusive(0, pieces.len());
    let q = b.matrix().cols();
    let mut e = CMatrix::zeros(q, q);
    for k in rng.subset(pieces.len(), keep) {
        e += &pieces[k];
    }
    Tripotent::new(b.space().clone(), &(b.matrix() * &e), tol)
}

/// Element `u Σ μ_k e_k` of `c_u` over the pieces of [`peirce_pieces`], each
/// weight zero or in `[0.1, 1]` so that ranks are well separated from zero.
pub fn random_cone_element(u: &Tripotent, rng: &mut SplitMix64, tol: &TolerancePolicy) -> CMatrix {
    let q = u.matrix().cols();
    let mut h = CMatrix::zeros(q, q);
    for e in peirce_pieces(u, rng, tol) {
        if rng.next_f64() < 0.8 {
            h += &e.scale(rng.uniform(0.1, 1.0));
        }
    }
    u.matrix() * &h
}

/// A random TRO with sample tripotents and elements of the cone of the first one.
#[derive(Clone, Debug)]
pub struct Instance {
    pub z: Arc<TroSpace>,
    pub tripotents: Vec<Tripotent>,
    pub cone_elements: Vec<CMatrix>,
}

/// Deterministic instance with ambient dimensions at most `dim_max`.
pub fn random_instance(dim_max: usize, seed: u64) -> Result<Instance> {
    let tol = TolerancePolicy::default();
    let mut rng = SplitMix64::new(seed);
    let dim_max = dim_max.max(1);
    let star = rng.coin();
    let p = rng.range_inclusive(1, dim_max);
    let q = if star { p } else { rng.range_inclusive(1, dim_max) };
    let z = Arc::new(random_tro(p, q, star, &mut rng, &tol)?);
    let tripotents = (0..3)
        .map(|_| random_tripotent(&z, &mut rng, &tol))
        .collect::<Result<Vec<_>>>()?;
    let cone_elements = (0..3)
        .map(|_| random_cone_element(&tripotents[0], &mut rng, &tol))
        .collect();
    Ok(Instance {
        z,
        tripotents,
        cone_elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_psd_lenient;
    use crate::peirce::PeirceAlgebra;
    use crate::tripotent::{leq, tripotent_defect};

    #[test]
    fn same_seed_same_instance() {
        let a = random_instance(4, 0).unwrap();
        let b = random_instance(4, 0).unwrap();
        assert_eq!(a.z.basis(), b.z.basis());
        for (x, y) in a.tripotents.iter().zip(&b.tripotents) {
            assert_eq!(x.matrix(), y.matrix());
        }
        assert_eq!(a.cone_elements, b.cone_elements);
    }

    #[test]
    fn instances_validate() {
        let tol = TolerancePolicy::default();
        for seed in 0..40 {
            let inst = random_instance(5, seed).unwrap();
            let z = &inst.z;
            assert!(z.p() <= 5 && z.q() <= 5);
            assert!(z.closure_defect() < 1e-8, "seed {seed}");
            let again = TroSpace::generate(z.p(), z.q(), z.basis(), &tol).unwrap();
            assert!(again.same_as(z, &tol));
            for t in &inst.tripotents {
                assert!(tripotent_defect(t.matrix()) < 1e-9);
                assert!(z.contains(t.matrix(), &tol).unwrap());
            }
            let pa = PeirceAlgebra::build(&inst.tripotents[0], None, &tol).unwrap();
            for x in &inst.cone_elements {
                assert!(pa.cone_membership(x, &tol).unwrap());
                assert!(is_psd_lenient(&(&inst.tripotents[0].matrix().adjoint() * x), &tol));
            }
        }
    }

    #[test]
    fn star_patterns_are_star_closed() {
        let tol = TolerancePolicy::default();
        let mut rng = SplitMix64::new(5);
        for _ in 0..10 {
            let n = rng.range_inclusive(1, 5);
            let z = random_tro(n, n, true, &mut rng, &tol).unwrap();
            assert!(z.star_closed());
        }
    }

    #[test]
    fn pattern_dimension_is_recovered() {
        let tol = TolerancePolicy::default();
        let mut rng = SplitMix64::new(8);
        for _ in 0..20 {
            let (p, q) = (rng.range_inclusive(1, 5), rng.range_inclusive(1, 5));
            let pattern = Pattern::random(p, q, false, &mut rng);
            let gens: Vec<CMatrix> = (0..p.max(q)).map(|_| pattern.ginibre(&mut rng)).collect();
            let z = TroSpace::generate(p, q, &gens, &tol).unwrap();
            assert_eq!(z.dim(), pattern.dim(), "{pattern:?}");
        }
    }

    #[test]
    fn subtripotents_are_below() {
        let tol = TolerancePolicy::default();
        let mut rng = SplitMix64::new(2);
        for seed in 0..20 {
            let inst = random_instance(4, seed).unwrap();
            let b = &inst.tripotents[0];
            let a = random_subtripotent(b, &mut rng, &tol).unwrap();
            assert!(leq(&a, b, &tol).unwrap());
        }
    }
}
