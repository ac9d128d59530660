//! Tripotents `uu*u = u` and their order, lattice operations and tests.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh_unchecked, is_psd_lenient, polar_decompose, psd_part, range_projection, svd, CMatrix,
    TolerancePolicy,
};
use crate::rng::SplitMix64;
use crate::subspace::{RealSubspace, Subspace};
use crate::tro::{inject, theta, TroSpace};

/// A tripotent of a [`TroSpace`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TripotentRepr", into = "TripotentRepr")]
pub struct Tripotent {
    space: Arc<TroSpace>,
    u: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct TripotentRepr {
    space: TroSpace,
    u: CMatrix,
}

impl From<Tripotent> for TripotentRepr {
    fn from(t: Tripotent) -> Self {
        TripotentRepr {
            space: (*t.space).clone(),
            u: t.u,
        }
    }
}

impl TryFrom<TripotentRepr> for Tripotent {
    type Error = Error;

    fn try_from(r: TripotentRepr) -> Result<Self> {
        Tripotent::new(Arc::new(r.space), &r.u, &TolerancePolicy::default())
    }
}

/// `‖uu*u − u‖_F`.
pub fn tripotent_defect(u: &CMatrix) -> f64 {
    (&(&(u * &u.adjoint()) * u) - u).frob_norm()
}

/// Replaces singular values by exactly 0 or 1, failing on anything else.
fn snap(u: &CMatrix, tol: &TolerancePolicy) -> Result<CMatrix> {
    let dec = svd(u);
    for &s in &dec.singular {
        if (s - 1.0).abs() > tol.one_tol && s > tol.rank_tol {
            return Err(Error::NotTripotent(format!("singular value {s} is neither 0 nor 1")));
        }
    }
    let snapped = dec.partial_isometry(|_, s| (s - 1.0).abs() <= tol.one_tol);
    if (&snapped - u).frob_norm() <= 16.0 * f64::EPSILON * u.frob_norm().max(1.0) {
        Ok(u.clone())
    } else {
        Ok(snapped)
    }
}

impl Tripotent {
    /// Validates `u` as a tripotent of `space` and snaps its singular values.
    pub fn new(space: Arc<TroSpace>, u: &CMatrix, tol: &TolerancePolicy) -> Result<Self> {
        space.ensure_contains(u, tol)?;
        let defect = tripotent_defect(u);
        if !tol.is_small(defect, u.frob_norm()) {
            return Err(Error::NotTripotent(format!("‖uu*u − u‖ = {defect:.3e}")));
        }
        Ok(Self {
            u: snap(u, tol)?,
            space,
        })
    }

    pub fn zero(space: Arc<TroSpace>) -> Self {
        let u = CMatrix::zeros(space.p(), space.q());
        Self { space, u }
    }

    pub fn space(&self) -> &Arc<TroSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn into_matrix(self) -> CMatrix {
        self.u
    }

    pub fn rank(&self) -> usize {
        self.u.frob_norm().powi(2).round() as usize
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn neg(&self) -> Tripotent {
        Tripotent {
            space: self.space.clone(),
            u: self.u.scale(-1.0),
        }
    }

    pub(crate) fn sibling_checked(&self, u: &CMatrix, tol: &TolerancePolicy) -> Result<Tripotent> {
        Tripotent::new(self.space.clone(), u, tol)
    }

    /// Left support `uu*`.
    pub fn left(&self) -> CMatrix {
        &self.u * &self.u.adjoint()
    }

    /// Right support `u*u`.
    pub fn right(&self) -> CMatrix {
        &self.u.adjoint() * &self.u
    }

    /// `û = ½(I(u) + I(u)²)`.
    pub fn hat(&self) -> CMatrix {
        let i = inject(&self.u);
        (&i + &(&i * &i)).scale(0.5)
    }

    /// `ŭ = ½(−I(u) + I(u)²)`.
    pub fn breve(&self) -> CMatrix {
        let i = inject(&self.u);
        (&(&i * &i) - &i).scale(0.5)
    }

    /// `Z₂(u) = uZ*u`.
    pub fn peirce2_space(&self, tol: &TolerancePolicy) -> Subspace {
        let (p, q) = (self.space.p(), self.space.q());
        let u = &self.u;
        self.space
            .subspace()
            .map_span(p, q, |b| &(u * &b.adjoint()) * u, tol)
    }

    /// `Z₀(u) = (1 − uu*)Z(1 − u*u)`.
    pub fn peirce0_space(&self, tol: &TolerancePolicy) -> Subspace {
        let (p, q) = (self.space.p(), self.space.q());
        let (l, r) = self.peirce0_compressors();
        self.space.subspace().map_span(p, q, |b| &(&l * b) * &r, tol)
    }

    fn peirce0_compressors(&self) -> (CMatrix, CMatrix) {
        let (p, q) = (self.space.p(), self.space.q());
        (
            &CMatrix::identity(p) - &self.left(),
            &CMatrix::identity(q) - &self.right(),
        )
    }

    /// `‖u v* u − u‖_F`, the defining residual of `u ≤ v`.
    pub fn order_residual(&self, v: &Tripotent) -> f64 {
        (&(&(&self.u * &v.u.adjoint()) * &self.u) - &self.u).frob_norm()
    }

    pub(crate) fn leq_fast(&self, v: &Tripotent, tol: &TolerancePolicy) -> bool {
        tol.is_small(self.order_residual(v), self.u.frob_norm())
    }
}

fn ensure_same_space(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<()> {
    if Arc::ptr_eq(&a.space, &b.space) || a.space.same_as(&b.space, tol) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// Verdicts and residuals of the five equivalent descriptions of `a ≤ b`:
/// `ab*a = a`, `ba*a = a`, `aa*b = a`, `a` a projection in `Z₂(b)`, and `b̂ − â ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderCheck {
    pub verdicts: [bool; 5],
    pub residuals: [f64; 5],
}

impl OrderCheck {
    pub fn agree(&self) -> bool {
        self.verdicts.iter().all(|&v| v == self.verdicts[0])
    }

    /// Largest residual among criteria that hold.
    pub fn max_true_residual(&self) -> f64 {
        self.verdicts
            .iter()
            .zip(&self.residuals)
            .filter(|(v, _)| **v)
            .map(|(_, r)| *r)
            .fold(0.0, f64::max)
    }
}

pub fn order_criteria(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<OrderCheck> {
    ensure_same_space(a, b, tol)?;
    let (x, y) = (&a.u, &b.u);
    let xs = x.adjoint();
    let ys = y.adjoint();
    let scale = x.frob_norm();
    let r1 = a.order_residual(b);
    let r2 = (&(&(y * &xs) * x) - x).frob_norm();
    let r3 = (&(&(x * &xs) * y) - x).frob_norm();
    let in_peirce = (&(&(&(y * &ys) * x) * &ys) * y - x.clone()).frob_norm();
    let selfadjoint = (&(&(y * &xs) * y) - x).frob_norm();
    let r4 = in_peirce.max(selfadjoint).max(r1);
    let diff = &b.hat() - &a.hat();
    let lambda_min = eigh_unchecked(&diff.hermitian_part())
        .values
        .last()
        .copied()
        .unwrap_or(0.0);
    let r5 = (-lambda_min).max(0.0);
    let small = |r: f64| tol.is_small(r, scale);
    Ok(OrderCheck {
        verdicts: [
            small(r1),
            small(r2),
            small(r3),
            small(r4),
            is_psd_lenient(&diff, tol),
        ],
        residuals: [r1, r2, r3, r4, r5],
    })
}

/// `a ≤ b`, cross-validated by all five criteria of [`order_criteria`].
pub fn leq(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<bool> {
    let check = order_criteria(a, b, tol)?;
    if !check.agree() {
        return Err(Error::InternalInconsistency(format!(
            "order criteria disagree: {:?} (residuals {:?})",
            check.verdicts, check.residuals
        )));
    }
    Ok(check.verdicts[0])
}

/// `b*a = a*b` and `ba* = ab*`.
pub fn commutes(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<bool> {
    ensure_same_space(a, b, tol)?;
    let (x, y) = (&a.u, &b.u);
    let r1 = (&(&y.adjoint() * x) - &(&x.adjoint() * y)).frob_norm();
    let r2 = (&(y * &x.adjoint()) - &(x * &y.adjoint())).frob_norm();
    let scale = x.frob_norm().max(y.frob_norm());
    Ok(tol.is_small(r1.max(r2), scale))
}

/// `a*b = 0` and `ab* = 0`.
pub fn orthogonal(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<bool> {
    ensure_same_space(a, b, tol)?;
    let (x, y) = (&a.u, &b.u);
    let r = (&x.adjoint() * y).frob_norm().max((x * &y.adjoint()).frob_norm());
    Ok(tol.is_small(r, 1.0))
}

/// Residuals of `ab*b = aa*b, bb*a = ba*a` and of `â ⊥ b̆`.
fn sup_residuals(a: &Tripotent, b: &Tripotent) -> (f64, f64) {
    let (x, y) = (&a.u, &b.u);
    let (xs, ys) = (x.adjoint(), y.adjoint());
    let r1 = (&(&(x * &ys) * y) - &(&(x * &xs) * y)).frob_norm();
    let r2 = (&(&(y * &ys) * x) - &(&(y * &xs) * x)).frob_norm();
    let orth = (&a.hat() * &b.breve()).frob_norm();
    (r1.max(r2), orth)
}

/// Whether `a ∨ b` exists, cross-validated against `â ⊥ b̆`.
pub fn sup_exists(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<bool> {
    ensure_same_space(a, b, tol)?;
    let (algebraic, orth) = sup_residuals(a, b);
    let scale = a.u.frob_norm().max(b.u.frob_norm());
    let v1 = tol.is_small(algebraic, scale);
    let v2 = tol.is_small(orth, scale);
    if v1 != v2 {
        return Err(Error::InternalInconsistency(format!(
            "sup criteria disagree (algebraic residual {algebraic:.3e}, orthogonality residual {orth:.3e})"
        )));
    }
    Ok(v1)
}

/// `a ∨ b = r(a + b)`; errors when the pair has no common upper bound.
pub fn sup(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<Tripotent> {
    if !sup_exists(a, b, tol)? {
        return Err(Error::SupDoesNotExist);
    }
    let w = sup_unchecked(a, b, tol)?;
    if w.space.dim() <= 6 {
        let mut rng = SplitMix64::new(0x5EED_0F5B);
        sup_minimality_probe(a, b, &w, 16, &mut rng, tol)?;
    }
    Ok(w)
}

/// `r(a + b)` with the upper-bound and hat postconditions, without the sampling probe.
pub(crate) fn sup_unchecked(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<Tripotent> {
    let r = polar_decompose(&(&a.u + &b.u), tol).r;
    let w = a.sibling_checked(&r, tol)?;
    if !a.leq_fast(&w, tol) || !b.leq_fast(&w, tol) {
        return Err(Error::InternalInconsistency("r(a + b) does not dominate both inputs".into()));
    }
    let hat_sum = range_projection(&(&a.hat() + &b.hat()), tol);
    let residual = (&hat_sum - &w.hat()).frob_norm();
    if !tol.is_small(residual, w.u.frob_norm()) {
        return Err(Error::InternalInconsistency(format!(
            "hat of the supremum differs from r(â + b̂) by {residual:.3e}"
        )));
    }
    Ok(w)
}

/// Outcome of [`sup_minimality_probe`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct MinimalityProbe {
    /// Sampled upper bounds of both inputs, each checked to dominate the supremum.
    pub dominating: usize,
    /// Sampled strict sub-tripotents of the supremum, each checked not to be an upper bound.
    pub strict_below: usize,
}

/// Samples upper bounds `t ≥ a, b` and checks `w ≤ t`, and samples strict
/// sub-tripotents `t < w` and checks that none dominates both inputs.
pub fn sup_minimality_probe(
    a: &Tripotent,
    b: &Tripotent,
    w: &Tripotent,
    samples: usize,
    rng: &mut SplitMix64,
    tol: &TolerancePolicy,
) -> Result<MinimalityProbe> {
    let mut out = MinimalityProbe::default();
    let zero_space = w.peirce0_space(tol);
    let two_space = w.peirce2_space(tol);
    let ambient = w.space.subspace();
    for k in 0..samples {
        let lambda = rng.uniform(0.2, 2.0);
        let mu = rng.uniform(0.2, 2.0);
        let mut x = &a.u.scale(lambda) + &b.u.scale(mu);
        match k % 3 {
            0 => x += &random_element(&zero_space, rng),
            1 => x += &random_element(ambient, rng).scale(rng.uniform(0.0, 0.5)),
            _ => {
                x += &random_element(&zero_space, rng);
                x += &random_element(&two_space, rng).scale(0.3);
            }
        }
        let t = w.sibling_checked(&polar_decompose(&x, tol).r, tol)?;
        if a.leq_fast(&t, tol) && b.leq_fast(&t, tol) {
            out.dominating += 1;
            if !w.leq_fast(&t, tol) {
                return Err(Error::InternalInconsistency(
                    "an upper bound of both inputs does not dominate r(a + b)".into(),
                ));
            }
        }
        if let Some(s) = strict_subtripotent(w, &two_space, rng, tol) {
            out.strict_below += 1;
            if a.leq_fast(&s, tol) && b.leq_fast(&s, tol) {
                return Err(Error::InternalInconsistency(
                    "a strict sub-tripotent of r(a + b) dominates both inputs".into(),
                ));
            }
        }
    }
    Ok(out)
}

pub(crate) fn random_element(space: &Subspace, rng: &mut SplitMix64) -> CMatrix {
    let coeffs: Vec<_> = (0..space.dim()).map(|_| rng.complex_normal()).collect();
    space.combine(&coeffs)
}

/// `w·e` for a random proper spectral projection `e` of a selfadjoint element of `Z₂(w)`.
fn strict_subtripotent(
    w: &Tripotent,
    two_space: &Subspace,
    rng: &mut SplitMix64,
    tol: &TolerancePolicy,
) -> Option<Tripotent> {
    let rank = w.rank();
    if rank == 0 {
        return None;
    }
    let y = random_element(two_space, rng);
    let h = &w.u.adjoint() * &(&y + &(&(&w.u * &y.adjoint()) * &w.u));
    let eig = eigh_unchecked(&(&h + &w.right().scale(1e-3)).hermitian_part());
    let clusters: Vec<Vec<usize>> = eig
        .clusters(1e-7)
        .into_iter()
        .filter(|c| eig.values[c[0]].abs() > 1e-9)
        .collect();
    if clusters.iter().map(Vec::len).sum::<usize>() != rank {
        return None;
    }
    let keep = rng.below(clusters.len());
    let chosen: Vec<usize> = clusters.iter().take(keep).flatten().copied().collect();
    let e = eig.projection(&chosen);
    w.sibling_checked(&(&w.u * &e), tol).ok()
}

/// `a ∨ b = a + b − bb*a` for commuting pairs with `ba*a = bb*a`.
pub fn sup_commuting(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<Tripotent> {
    if !commutes(a, b, tol)? {
        return Err(Error::PreconditionFailed("tripotents do not commute".into()));
    }
    let (x, y) = (&a.u, &b.u);
    let lhs = &(y * &x.adjoint()) * x;
    let rhs = &(y * &y.adjoint()) * x;
    let residual = (&lhs - &rhs).frob_norm();
    if !tol.is_small(residual, x.frob_norm().max(y.frob_norm())) {
        return Err(Error::PreconditionFailed(format!("ba*a ≠ bb*a (residual {residual:.3e})")));
    }
    let w = &(x + y) - &rhs;
    let w = a.sibling_checked(&w, tol).map_err(|_| Error::NotTripotentResult {
        residual: tripotent_defect(&w),
    })?;
    let reference = sup(a, b, tol)?;
    if !tol.is_small((&reference.u - &w.u).frob_norm(), w.u.frob_norm()) {
        return Err(Error::InternalInconsistency("a + b − bb*a differs from r(a + b)".into()));
    }
    Ok(w)
}

/// `a ∧ b = ½(bb*a + ba*a)` for commuting pairs.
pub fn inf_commuting(a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<Tripotent> {
    if !commutes(a, b, tol)? {
        return Err(Error::NotCommuting);
    }
    let (x, y) = (&a.u, &b.u);
    let w = (&(&(y * &y.adjoint()) * x) + &(&(y * &x.adjoint()) * x)).scale(0.5);
    let residual = tripotent_defect(&w);
    if !tol.is_small(residual, w.frob_norm()) {
        return Err(Error::NotTripotentResult { residual });
    }
    let w = a
        .sibling_checked(&w, tol)
        .map_err(|_| Error::NotTripotentResult { residual })?;
    if !w.leq_fast(a, tol) || !w.leq_fast(b, tol) {
        return Err(Error::NotTripotentResult {
            residual: w.order_residual(a).max(w.order_residual(b)),
        });
    }
    Ok(w)
}

/// Options for [`inf_family`].
#[derive(Clone, Copy, Debug)]
pub struct InfFamilyOptions {
    pub seed: u64,
    /// Consecutive samples without rank growth before stopping.
    pub stabilization_k: usize,
    pub max_samples: usize,
    pub dykstra_iterations: usize,
}

impl Default for InfFamilyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            stabilization_k: 8,
            max_samples: 256,
            dykstra_iterations: 2000,
        }
    }
}

/// Real subspace `{z ∈ Z : z = u z* u for every u in the family}`.
pub fn common_selfadjoint_space(us: &[Tripotent], tol: &TolerancePolicy) -> RealSubspace {
    let z = us[0].space.subspace().realify();
    z.solve(
        |x| {
            us.iter()
                .map(|u| x - &(&(&u.u * &x.adjoint()) * &u.u))
                .collect()
        },
        tol,
    )
}

/// Nearest point of `{u h : h ≥ 0, h = e h e}` with `e = u*u`.
fn project_peirce_cone(u: &CMatrix, e: &CMatrix, z: &CMatrix) -> CMatrix {
    let h = (&(&u.adjoint() * z) * e).hermitian_part();
    u * &psd_part(&(&(e * &h) * e))
}

/// Largest tripotent below every member, found by sampling the common cone
/// `{z : z = u z* u, u*z ≥ 0 for all u}` with Dykstra projections and taking the
/// range tripotent of the running sum of samples.
pub fn inf_family(us: &[Tripotent], opts: InfFamilyOptions, tol: &TolerancePolicy) -> Result<Tripotent> {
    let first = us
        .first()
        .ok_or_else(|| Error::InvalidInput("inf_family needs at least one tripotent".into()))?;
    for u in us {
        ensure_same_space(first, u, tol)?;
    }
    let v = common_selfadjoint_space(us, tol);
    if v.is_zero() {
        return Ok(Tripotent::zero(first.space.clone()));
    }
    let supports: Vec<CMatrix> = us.iter().map(Tripotent::right).collect();
    let mut rng = SplitMix64::new(opts.seed);
    let (p, q) = (first.space.p(), first.space.q());
    let mut total = CMatrix::zeros(p, q);
    let mut rank = 0;
    let mut samples = Vec::new();
    let mut stable = 0;
    for _ in 0..opts.max_samples {
        let coeffs: Vec<f64> = (0..v.dim()).map(|_| rng.normal()).collect();
        let start = v.combine(&coeffs);
        let x = dykstra(&start, &v, us, &supports, opts.dykstra_iterations);
        let norm = x.frob_norm();
        if norm > 1e-8 {
            let x = x.scale(1.0 / norm);
            total += &x;
            samples.push(x);
        }
        let new_rank = loose_rank(&total);
        if new_rank > rank {
            rank = new_rank;
            stable = 0;
        } else {
            stable += 1;
            if stable >= opts.stabilization_k {
                break;
            }
        }
    }
    if rank == 0 {
        return Ok(Tripotent::zero(first.space.clone()));
    }
    let w = polish(&total, rank, &v);
    let w = first.sibling_checked(&w, tol)?;
    for u in us {
        if !w.leq_fast(u, tol) {
            return Err(Error::InternalInconsistency(format!(
                "sampled infimum is not below a family member (residual {:.3e})",
                w.order_residual(u)
            )));
        }
    }
    let (l, r) = (w.left(), w.right());
    for x in &samples {
        let residual = (&(&(&l * x) * &r) - x).frob_norm();
        if residual > 1e-6 {
            return Err(Error::InternalInconsistency(format!(
                "sampled cone element escapes the Peirce space of the infimum ({residual:.3e})"
            )));
        }
    }
    Ok(w)
}

fn dykstra(
    start: &CMatrix,
    v: &RealSubspace,
    us: &[Tripotent],
    supports: &[CMatrix],
    iterations: usize,
) -> CMatrix {
    let mut x = start.clone();
    let mut increments = vec![CMatrix::zeros(x.rows(), x.cols()); us.len()];
    for _ in 0..iterations {
        let previous = x.clone();
        for ((u, e), y) in us.iter().zip(supports).zip(increments.iter_mut()) {
            let z = &x + &*y;
            x = project_peirce_cone(&u.u, e, &z);
            *y = &z - &x;
        }
        x = v.project(&x);
        if (&x - &previous).frob_norm() <= 1e-13 * x.frob_norm().max(1e-300) {
            break;
        }
    }
    x
}

fn loose_rank(x: &CMatrix) -> usize {
    let s = svd(x).singular;
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > 1e-6 * smax && v > 0.0).count()
}

/// Alternates between the rank-`rank` partial isometries and the subspace `v`.
fn polish(x: &CMatrix, rank: usize, v: &RealSubspace) -> CMatrix {
    let mut w = svd(x).partial_isometry(|k, _| k < rank);
    for _ in 0..200 {
        let projected = v.project(&w);
        let next = svd(&projected).partial_isometry(|k, _| k < rank);
        let change = (&next - &w).frob_norm();
        w = next;
        if change <= 1e-14 {
            break;
        }
    }
    w
}

/// `I_n ⊗ u` inside `M_n(Z)`.
pub fn amplify(a: &Tripotent, n: usize, tol: &TolerancePolicy) -> Result<Tripotent> {
    if n == 0 {
        return Err(Error::InvalidInput("amplification level must be at least 1".into()));
    }
    let space = Arc::new(a.space.amplify(n, tol));
    let u = CMatrix::identity(n).kron(&a.u);
    Ok(Tripotent { space, u })
}

/// Verdicts for openness of `a` relative to a subTRO `z`.
#[derive(Clone, Debug, Serialize)]
pub struct OpennessCheck {
    /// `a ∈ z`.
    pub in_space: bool,
    /// `â` lies in the linking algebra of `z`.
    pub hat_in_linking: bool,
    /// `a ∈ Z₂(a) ∩ z`.
    pub in_relative_peirce: bool,
    /// The same three criteria for `−a`.
    pub negated: [bool; 3],
}

pub fn openness_criteria(a: &Tripotent, z: &TroSpace, tol: &TolerancePolicy) -> Result<OpennessCheck> {
    if (z.p(), z.q()) != (a.space.p(), a.space.q()) {
        return Err(Error::ShapeMismatch {
            expected: (a.space.p(), a.space.q()),
            found: (z.p(), z.q()),
        });
    }
    if !z.is_subtro_of(&a.space, tol) {
        return Err(Error::NotSubspace);
    }
    let linking = z.linking_algebra(tol);
    let criteria = |t: &Tripotent| -> [bool; 3] {
        let relative = t.peirce2_space(tol).intersect(z.subspace(), tol);
        [
            z.subspace().contains(&t.u, tol),
            linking.contains(&t.hat(), tol),
            relative.contains(&t.u, tol),
        ]
    };
    let own = criteria(a);
    Ok(OpennessCheck {
        in_space: own[0],
        hat_in_linking: own[1],
        in_relative_peirce: own[2],
        negated: criteria(&a.neg()),
    })
}

/// Whether `a` is open relative to the subTRO `z`; all criteria must agree.
pub fn is_open_relative(a: &Tripotent, z: &TroSpace, tol: &TolerancePolicy) -> Result<bool> {
    let c = openness_criteria(a, z, tol)?;
    let all = [c.in_space, c.hat_in_linking, c.in_relative_peirce];
    let verdict = all[0];
    if all.iter().chain(&c.negated).any(|&v| v != verdict) {
        return Err(Error::InternalInconsistency(format!("openness criteria disagree: {c:?}")));
    }
    Ok(verdict)
}

/// `(1 − aa*) Z (1 − a*a) = 0`.
pub fn is_maximal(a: &Tripotent, tol: &TolerancePolicy) -> bool {
    let (l, r) = a.peirce0_compressors();
    a.space
        .basis()
        .iter()
        .all(|b| (&(&l * b) * &r).frob_norm() <= tol.rank_tol)
}

/// Recovers `v` from an antisymmetric projection `r = v̂` in `M_{p+q}`.
pub fn antisymmetric_decompose(
    space: Arc<TroSpace>,
    r: &CMatrix,
    tol: &TolerancePolicy,
) -> Result<Tripotent> {
    let (p, q) = (space.p(), space.q());
    r.ensure_shape(p + q, p + q)?;
    let proj_residual = (&(r * r) - r).frob_norm().max(r.hermitian_defect());
    if !tol.is_small(proj_residual, r.frob_norm()) {
        return Err(Error::NotProjection {
            residual: proj_residual,
        });
    }
    let anti = (r * &theta(r, p)).frob_norm();
    if !tol.is_small(anti, r.frob_norm()) {
        return Err(Error::NotAntisymmetric { residual: anti });
    }
    let v = r.block(0, p, p, q).scale(2.0);
    let corner = r.block(0, 0, p, p).scale(2.0);
    let corner_residual = (&(&corner * &corner) - &corner).frob_norm();
    if !tol.is_small(corner_residual, corner.frob_norm()) {
        return Err(Error::InternalInconsistency(format!(
            "twice the upper-left corner is not a projection ({corner_residual:.3e})"
        )));
    }
    let t = Tripotent::new(space, &v, tol)?;
    let residual = (&t.hat() - r).frob_norm();
    if !tol.is_small(residual, r.frob_norm()) {
        return Err(Error::InternalInconsistency(format!(
            "hat of the recovered tripotent differs from the input ({residual:.3e})"
        )));
    }
    Ok(t)
}
