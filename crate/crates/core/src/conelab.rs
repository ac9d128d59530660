//! Annihilators, central selfadjoint maximality, the orderability probe and
//! the boundary cone `u = ∨ r(g)` of an operator space with cone generators.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh_unchecked, is_psd_lenient, psd_part, CMatrix, TolerancePolicy, C64};
use crate::peirce::{range_tripotent, PeirceAlgebra};
use crate::report::ConeReport;
use crate::rng::SplitMix64;
use crate::subspace::{RealSubspace, Subspace};
use crate::tripotent::{amplify, sup, sup_exists, Tripotent};
use crate::tro::{theta, TroSpace};

fn ensure_star_tro(z: &TroSpace) -> Result<()> {
    if z.square_mode() && z.star_closed() {
        Ok(())
    } else {
        Err(Error::NotStarTro)
    }
}

/// `S_⊢ = {x ∈ Z : yx = xy = 0 for all y ∈ S}`.
pub fn annihilator(z: &TroSpace, s: &[CMatrix], tol: &TolerancePolicy) -> Result<Subspace> {
    ensure_star_tro(z)?;
    for y in s {
        y.ensure_shape(z.p(), z.q())?;
    }
    let solved = z.subspace().realify().solve(
        |x| s.iter().flat_map(|y| [y * x, x * y]).collect(),
        tol,
    );
    Ok(solved.complex_span(tol))
}

fn ensure_central_selfadjoint(u: &Tripotent, tol: &TolerancePolicy) -> Result<()> {
    let m = u.matrix();
    if !tol.is_small(m.hermitian_defect(), m.frob_norm()) {
        return Err(Error::NotSelfadjoint);
    }
    if !u
        .space()
        .basis()
        .iter()
        .all(|b| tol.is_small((&(m * b) - &(b * m)).frob_norm(), 1.0))
    {
        return Err(Error::NotCentral);
    }
    Ok(())
}

/// `{w ∈ Z : w = w*, w central, uw = wu = 0}`.
pub fn central_orthogonal_space(u: &Tripotent, tol: &TolerancePolicy) -> RealSubspace {
    let z = u.space();
    let m = u.matrix();
    z.subspace().realify().solve(
        |w| {
            let mut out = vec![w - &w.adjoint(), m * w, w * m];
            out.extend(z.basis().iter().map(|b| &(w * b) - &(b * w)));
            out
        },
        tol,
    )
}

/// Whether the central selfadjoint `u` is maximal: no nonzero central
/// selfadjoint element of `Z` is orthogonal to it.
pub fn central_sa_maximal(u: &Tripotent, tol: &TolerancePolicy) -> Result<bool> {
    ensure_star_tro(u.space())?;
    ensure_central_selfadjoint(u, tol)?;
    Ok(central_orthogonal_space(u, tol).is_zero())
}

/// Reports `dim u_⊢` for a maximal central selfadjoint `u`; verdict is `dim = 0`.
pub fn orderable_probe(u: &Tripotent, tol: &TolerancePolicy) -> Result<ConeReport> {
    if !central_sa_maximal(u, tol)? {
        return Err(Error::NotMaximal);
    }
    let ann = annihilator(u.space(), std::slice::from_ref(u.matrix()), tol)?;
    let mut report = ConeReport::new(Some(ann.is_zero()));
    report.residual("annihilator_dim", ann.dim() as f64);
    for b in ann.basis() {
        report.witness(b.clone());
    }
    report.note("evidence for this tripotent only, not a decision over all maximal central selfadjoint tripotents");
    Ok(report)
}

/// An operator space `X ⊂ M_{p×q}` with a generated cone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderedSpace {
    pub p: usize,
    pub q: usize,
    pub square_mode: bool,
    pub space_basis: Vec<CMatrix>,
    pub cone_generators: Vec<CMatrix>,
}

impl OrderedSpace {
    pub fn new(space_basis: Vec<CMatrix>, cone_generators: Vec<CMatrix>) -> Result<Self> {
        let (p, q) = space_basis
            .first()
            .or(cone_generators.first())
            .map(CMatrix::shape)
            .ok_or_else(|| Error::InvalidInput("ordered space needs a basis".into()))?;
        let x = Self {
            p,
            q,
            square_mode: p == q,
            space_basis,
            cone_generators,
        };
        x.validate(&TolerancePolicy::default())?;
        Ok(x)
    }

    pub fn span(&self, tol: &TolerancePolicy) -> Subspace {
        Subspace::span(self.p, self.q, &self.space_basis, tol)
    }

    /// Shapes, generator containment and, in square mode, positivity.
    pub fn validate(&self, tol: &TolerancePolicy) -> Result<()> {
        for m in self.space_basis.iter().chain(&self.cone_generators) {
            m.ensure_shape(self.p, self.q)?;
        }
        let span = self.span(tol);
        for g in &self.cone_generators {
            let distance = span.distance(g);
            if !tol.is_small(distance, g.frob_norm()) {
                return Err(Error::NotInSpace { distance });
            }
        }
        if self.square_mode {
            if self.p != self.q {
                return Err(Error::NotSquareAmbient);
            }
            for g in &self.cone_generators {
                if !is_psd_lenient(g, tol) {
                    let lambda = eigh_unchecked(&g.hermitian_part())
                        .values
                        .last()
                        .copied()
                        .unwrap_or(0.0);
                    return Err(Error::NotPsd {
                        min_eigenvalue: lambda,
                    });
                }
            }
        }
        Ok(())
    }

    /// `span(generators) = span(X)`.
    pub fn densely_spanning(&self, tol: &TolerancePolicy) -> bool {
        let gens = Subspace::span(self.p, self.q, &self.cone_generators, tol);
        gens.same_span(&self.span(tol), tol)
    }
}

/// Result of [`boundary_cone`].
#[derive(Clone, Debug)]
pub struct BoundaryCone {
    pub w: Arc<TroSpace>,
    pub u: Tripotent,
    pub report: ConeReport,
}

/// `W = ⟨X⟩` and `u = ∨ r(g)`, with every generator checked to lie in `d_u`
/// at level 1 and, through `u ⊗ I₂`, at level 2.
pub fn boundary_cone(x: &OrderedSpace, tol: &TolerancePolicy) -> Result<BoundaryCone> {
    if !x.square_mode {
        return Err(Error::NotSquareAmbient);
    }
    x.validate(tol)?;
    let w = Arc::new(TroSpace::generate(x.p, x.q, &x.space_basis, tol)?);
    let mut u = Tripotent::zero(w.clone());
    for g in &x.cone_generators {
        let r = range_tripotent(&w, g, tol)?;
        if !sup_exists(&u, &r, tol)? {
            return Err(Error::SupDoesNotExist);
        }
        u = sup(&u, &r, tol)?;
    }
    let pa = PeirceAlgebra::build(&u, Some(&w), tol)?;
    let mut report = ConeReport::new(None);
    let mut ok = true;
    let mut worst1 = 0.0f64;
    for g in &x.cone_generators {
        let member = pa.relative_cone_membership(g, tol)?;
        ok &= member;
        worst1 = worst1.max(cone_residual(u.matrix(), g));
        if !member {
            report.witness(g.clone());
        }
    }
    let u2 = amplify(&u, 2, tol)?;
    let mut worst2 = 0.0f64;
    let gens = &x.cone_generators;
    let zero = CMatrix::zeros(x.p, x.q);
    let mut level2 = Vec::new();
    for (i, gi) in gens.iter().enumerate() {
        level2.push(CMatrix::from_blocks(gi, gi, gi, gi));
        for gj in &gens[i..] {
            level2.push(CMatrix::from_blocks(gi, &zero, &zero, gj));
        }
    }
    for m in &level2 {
        let member = direct_cone_membership(&u2, m, tol);
        ok &= member;
        worst2 = worst2.max(cone_residual(u2.matrix(), m));
        if !member {
            report.witness(m.clone());
        }
    }
    report.residual("level1_max_residual", worst1);
    report.residual("level2_max_residual", worst2);
    report.verdict = Some(ok);
    if !x.densely_spanning(tol) {
        report.note("cone generators do not densely span X");
    }
    Ok(BoundaryCone { w, u, report })
}

/// `x ∈ Z`, `x = u x* u` and `u*x ≥ 0`.
pub fn direct_cone_membership(u: &Tripotent, x: &CMatrix, tol: &TolerancePolicy) -> bool {
    let scale = x.frob_norm();
    let m = u.matrix();
    let in_space = u.space().subspace().contains(x, tol);
    let selfadjoint = tol.is_small((&(&(m * &x.adjoint()) * m) - x).frob_norm(), scale);
    let rep = &m.adjoint() * x;
    in_space
        && selfadjoint
        && rep.hermitian_defect() <= tol.eq_tol * scale.max(1.0)
        && is_psd_lenient(&rep, tol)
}

/// Largest violation among `x = ux*u` and `u*x ≥ 0`.
fn cone_residual(u: &CMatrix, x: &CMatrix) -> f64 {
    let sa = (&(&(u * &x.adjoint()) * u) - x).frob_norm();
    let rep = &u.adjoint() * x;
    let lambda = eigh_unchecked(&rep.hermitian_part())
        .values
        .last()
        .copied()
        .unwrap_or(0.0);
    sa.max(rep.hermitian_defect()).max(-lambda)
}

/// Checks that `⟨X⟩` is a C*-algebra, `⟨X⟩ = J(⟨X⟩)`, and that `u W* u = W`.
pub fn bk_check(x: &OrderedSpace, tol: &TolerancePolicy) -> Result<ConeReport> {
    x.validate(tol)?;
    if !x.densely_spanning(tol) {
        return Err(Error::NotDenselySpanning);
    }
    let bc = boundary_cone(x, tol)?;
    let w = &bc.w;
    let j = w.j_subalgebra(tol)?;
    let is_algebra = j.dim() == w.dim() && w.is_subtro_of(&j, tol);
    let u = bc.u.matrix();
    let peirce = w.subspace().map_span(w.p(), w.q(), |b| &(u * &b.adjoint()) * u, tol);
    let peirce_gap = w
        .basis()
        .iter()
        .map(|b| peirce.distance(b))
        .fold(0.0, f64::max);
    let fills = peirce.dim() == w.dim() && tol.is_small(peirce_gap, 1.0);
    let mut report = ConeReport::new(Some(is_algebra && fills));
    report.residual("j_dim_gap", (w.dim() - j.dim()) as f64);
    report.residual("peirce_gap", peirce_gap);
    report.witness(u.clone());
    Ok(report)
}

/// Options for [`completeness_check`].
#[derive(Clone, Copy, Debug)]
pub struct CompletenessOptions {
    pub seed: u64,
    pub samples: usize,
    /// Highest matrix level checked (1 or 2).
    pub max_level: usize,
    pub max_iterations: usize,
}

impl Default for CompletenessOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 24,
            max_level: 2,
            max_iterations: 10_000,
        }
    }
}

/// Three-valued outcome of a conic feasibility solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Member,
    NonMember,
    Unknown,
}

/// Decides `target ∈ {Σ_k θ_k-weighted generators}` by alternating projections
/// between the affine solution set of `G θ = target` and a closed convex cone
/// of parameters.
fn conic_membership(
    g: &DMatrix<f64>,
    target: &DVector<f64>,
    project_cone: impl Fn(&DVector<f64>) -> DVector<f64>,
    max_iterations: usize,
    tol: &TolerancePolicy,
) -> Membership {
    let scale = target.norm().max(1.0);
    let pinv = match g.clone().pseudo_inverse(1e-12) {
        Ok(p) => p,
        Err(_) => return Membership::Unknown,
    };
    let particular = &pinv * target;
    if (g * &particular - target).norm() > tol.eq_tol * scale {
        return Membership::NonMember;
    }
    let null_proj = DMatrix::<f64>::identity(g.ncols(), g.ncols()) - &pinv * g;
    let to_affine = |t: &DVector<f64>| &particular + &null_proj * (t - &particular);
    let mut theta = particular.clone();
    let mut last_gap = f64::INFINITY;
    for _ in 0..max_iterations {
        let c = project_cone(&theta);
        let gap = (g * &c - target).norm();
        if gap <= tol.eq_tol * scale {
            return Membership::Member;
        }
        let next = to_affine(&c);
        let moved = (&next - &theta).norm();
        theta = next;
        if moved <= 1e-15 * scale || (last_gap - gap).abs() <= 1e-16 * scale {
            return Membership::NonMember;
        }
        last_gap = gap;
    }
    Membership::Unknown
}

fn realify_vec(m: &CMatrix) -> Vec<f64> {
    m.to_row_major().into_iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Membership in `{Σ λ_k g_k : λ ≥ 0}`.
pub fn generated_cone_membership(
    gens: &[CMatrix],
    x: &CMatrix,
    max_iterations: usize,
    tol: &TolerancePolicy,
) -> Membership {
    if gens.is_empty() {
        return if x.frob_norm() <= tol.eq_tol {
            Membership::Member
        } else {
            Membership::NonMember
        };
    }
    let cols: Vec<Vec<f64>> = gens.iter().map(realify_vec).collect();
    let g = DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i]);
    let target = DVector::from_vec(realify_vec(x));
    conic_membership(&g, &target, |t| t.map(|v| v.max(0.0)), max_iterations, tol)
}

/// Orthonormal real coordinates of a Hermitian 2×2 matrix.
fn herm2_basis() -> [CMatrix; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        CMatrix::diag_real(&[1.0, 0.0]),
        CMatrix::diag_real(&[0.0, 1.0]),
        CMatrix::from_real(2, 2, &[0.0, s, s, 0.0]),
        CMatrix::from_row_major(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, s), C64::new(0.0, -s), C64::new(0.0, 0.0)],
        )
        .expect("2×2 data"),
    ]
}

/// Membership in `{Σ P_k ⊗ g_k : P_k ∈ M₂⁺}`, the level-2 cone generated by the generators.
pub fn generated_cone_membership_level2(
    gens: &[CMatrix],
    x: &CMatrix,
    max_iterations: usize,
    tol: &TolerancePolicy,
) -> Membership {
    let basis = herm2_basis();
    let mut cols = Vec::with_capacity(4 * gens.len());
    for g in gens {
        for h in &basis {
            cols.push(realify_vec(&h.kron(g)));
        }
    }
    if cols.is_empty() {
        return generated_cone_membership(&[], x, max_iterations, tol);
    }
    let g = DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i]);
    let target = DVector::from_vec(realify_vec(x));
    let project = |t: &DVector<f64>| {
        let mut out = t.clone();
        for k in 0..gens.len() {
            let mut p = CMatrix::zeros(2, 2);
            for (i, h) in basis.iter().enumerate() {
                p += &h.scale(t[4 * k + i]);
            }
            let clipped = psd_part(&p.hermitian_part());
            for (i, h) in basis.iter().enumerate() {
                out[4 * k + i] = h.real_inner(&clipped);
            }
        }
        out
    };
    conic_membership(&g, &target, project, max_iterations, tol)
}

/// Samples `X ∩ d_u` at levels 1 and 2 and tests each sample for membership in
/// the cone generated by the generators.
pub fn completeness_check(
    x: &OrderedSpace,
    opts: CompletenessOptions,
    tol: &TolerancePolicy,
) -> Result<ConeReport> {
    let bc = boundary_cone(x, tol)?;
    let xs = x.span(tol);
    let mut rng = SplitMix64::new(opts.seed);
    let mut report = ConeReport::new(None);
    let mut unknown = 0usize;
    let mut non_members = 0usize;
    let mut checked = 0usize;
    for level in 1..=opts.max_level.clamp(1, 2) {
        let (u, space) = if level == 1 {
            (bc.u.clone(), xs.clone())
        } else {
            (amplify(&bc.u, 2, tol)?, amplify_subspace(&xs))
        };
        let v = selfadjoint_part(&space, u.matrix(), tol);
        for s in sample_cone(&v, u.matrix(), opts.samples, &mut rng) {
            checked += 1;
            let verdict = if level == 1 {
                generated_cone_membership(&x.cone_generators, &s, opts.max_iterations, tol)
            } else {
                generated_cone_membership_level2(&x.cone_generators, &s, opts.max_iterations, tol)
            };
            match verdict {
                Membership::Member => {}
                Membership::NonMember => {
                    non_members += 1;
                    if report.witnesses.len() < 4 {
                        report.witness(s);
                    }
                }
                Membership::Unknown => unknown += 1,
            }
        }
    }
    report.verdict = if non_members > 0 {
        Some(false)
    } else if unknown > 0 {
        None
    } else {
        Some(true)
    };
    report.residual("samples", checked as f64);
    report.residual("non_members", non_members as f64);
    report.residual("undecided", unknown as f64);
    Ok(report)
}

fn amplify_subspace(s: &Subspace) -> Subspace {
    let mut basis = Vec::with_capacity(4 * s.dim());
    for i in 0..2 {
        for j in 0..2 {
            let e = CMatrix::unit(2, 2, i, j);
            basis.extend(s.basis().iter().map(|b| e.kron(b)));
        }
    }
    Subspace::from_orthonormal(2 * s.rows(), 2 * s.cols(), basis)
}

/// `{x ∈ space : x = u x* u}`.
fn selfadjoint_part(space: &Subspace, u: &CMatrix, tol: &TolerancePolicy) -> RealSubspace {
    space
        .realify()
        .solve(|x| vec![x - &(&(u * &x.adjoint()) * u)], tol)
}

/// Points of `{x ∈ v : u*x ≥ 0}` from Dykstra projections of random points,
/// plus the extreme candidates `u·e` for eigenprojections `e` of samples.
fn sample_cone(v: &RealSubspace, u: &CMatrix, count: usize, rng: &mut SplitMix64) -> Vec<CMatrix> {
    if v.is_zero() {
        return vec![];
    }
    let e = &u.adjoint() * u;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let coeffs: Vec<f64> = (0..v.dim()).map(|_| rng.normal()).collect();
        let mut x = v.combine(&coeffs);
        let mut y = CMatrix::zeros(x.rows(), x.cols());
        for _ in 0..500 {
            let z = &x + &y;
            let h = (&(&u.adjoint() * &z) * &e).hermitian_part();
            let c = u * &psd_part(&(&(&e * &h) * &e));
            y = &z - &c;
            let next = v.project(&c);
            let moved = (&next - &x).frob_norm();
            x = next;
            if moved <= 1e-14 {
                break;
            }
        }
        let n = x.frob_norm();
        if n > 1e-8 {
            out.push(clean_sample(&x.scale(1.0 / n), u));
        }
    }
    out
}

/// Removes the tiny negative part left by finite Dykstra iterations.
fn clean_sample(x: &CMatrix, u: &CMatrix) -> CMatrix {
    let e = &u.adjoint() * u;
    let h = (&u.adjoint() * x).hermitian_part();
    let eig = eigh_unchecked(&(&(&e * &h) * &e));
    let smax = eig.values.first().copied().unwrap_or(0.0);
    u * &eig.apply(|l| if l > 1e-9 * smax { l } else { 0.0 })
}

/// `(u, q)` with `pmat = û + q ⊗ I₂` for a central projection `pmat` in the
/// restricted linking algebra `{[[a, b], [b, a]]}` of a *-TRO.
pub fn restricted_linking_decompose(
    z: &Arc<TroSpace>,
    pmat: &CMatrix,
    tol: &TolerancePolicy,
) -> Result<(Tripotent, CMatrix)> {
    ensure_star_tro(z)?;
    let n = z.p();
    pmat.ensure_shape(2 * n, 2 * n)?;
    let scale = pmat.frob_norm();
    let proj = (&(pmat * pmat) - pmat).frob_norm().max(pmat.hermitian_defect());
    if !tol.is_small(proj, scale) {
        return Err(Error::NotProjection { residual: proj });
    }
    let a = pmat.block(0, 0, n, n);
    let b = pmat.block(0, n, n, n);
    let diag_gap = (&a - &pmat.block(n, n, n, n)).frob_norm();
    let off_gap = (&b - &pmat.block(n, 0, n, n)).frob_norm();
    if !tol.is_small(diag_gap.max(off_gap), scale) {
        return Err(Error::NotInRestrictedLinking(format!(
            "blocks are not of the form [[a, b], [b, a]] (residual {:.3e})",
            diag_gap.max(off_gap)
        )));
    }
    let diff = pmat - &theta(pmat, n);
    let u = diff.block(0, n, n, n);
    let u = Tripotent::new(z.clone(), &u, tol).map_err(|e| match e {
        Error::NotInSpace { distance } => {
            Error::NotInRestrictedLinking(format!("off-diagonal block is not in Z ({distance:.3e})"))
        }
        other => other,
    })?;
    let q = &(&a * &a) - &(&b * &b);
    let commutator = (&(&a * &b) - &(&b * &a)).frob_norm();
    if !tol.is_small(commutator, scale) {
        return Err(Error::InternalInconsistency(format!(
            "diagonal and off-diagonal blocks do not commute ({commutator:.3e})"
        )));
    }
    let um = u.matrix();
    let central = |m: &CMatrix| {
        z.basis()
            .iter()
            .all(|x| tol.is_small((&(m * x) - &(x * m)).frob_norm(), 1.0))
    };
    if !central(um) || !central(&q) {
        return Err(Error::NotCentral);
    }
    if !tol.is_small(um.hermitian_defect(), um.frob_norm()) {
        return Err(Error::NotSelfadjoint);
    }
    let orth = (&q * um).frob_norm().max((um * &q).frob_norm());
    let rebuilt = &u.hat() + &CMatrix::identity(2).kron(&q);
    let rebuild_gap = (&rebuilt - pmat).frob_norm();
    if !tol.is_small(orth, 1.0) || !tol.is_small(rebuild_gap, scale) {
        return Err(Error::InternalInconsistency(format!(
            "decomposition check failed (qu residual {orth:.3e}, rebuild residual {rebuild_gap:.3e})"
        )));
    }
    Ok((u, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn e(i: usize, j: usize) -> CMatrix {
        CMatrix::unit(2, 2, i, j)
    }

    fn offdiag() -> Arc<TroSpace> {
        Arc::new(TroSpace::generate(2, 2, &[e(0, 1), e(1, 0)], &tol()).unwrap())
    }

    fn diag() -> Arc<TroSpace> {
        Arc::new(TroSpace::generate(2, 2, &[e(0, 0), e(1, 1)], &tol()).unwrap())
    }

    fn m2() -> Arc<TroSpace> {
        Arc::new(TroSpace::full(2, 2))
    }

    fn trip(z: &Arc<TroSpace>, u: CMatrix) -> Tripotent {
        Tripotent::new(z.clone(), &u, &tol()).unwrap()
    }

    #[test]
    fn annihilator_examples() {
        let t = tol();
        assert_eq!(annihilator(&offdiag(), &[CMatrix::zeros(2, 2)], &t).unwrap().dim(), 2);
        assert!(annihilator(&m2(), &[CMatrix::identity(2)], &t).unwrap().is_zero());
        let a = annihilator(&diag(), &[e(0, 0)], &t).unwrap();
        assert_eq!(a.dim(), 1);
        assert!(a.contains(&e(1, 1), &t));
        let row = TroSpace::generate(2, 2, &[e(0, 1)], &t).unwrap();
        assert!(matches!(annihilator(&row, &[], &t), Err(Error::NotStarTro)));
    }

    #[test]
    fn central_sa_maximal_examples() {
        let t = tol();
        assert!(central_sa_maximal(&Tripotent::zero(offdiag()), &t).unwrap());
        assert!(!central_sa_maximal(&Tripotent::zero(m2()), &t).unwrap());
        assert!(!central_sa_maximal(&trip(&diag(), e(0, 0)), &t).unwrap());
        assert!(central_sa_maximal(&trip(&diag(), CMatrix::identity(2)), &t).unwrap());
        assert!(matches!(
            central_sa_maximal(&trip(&m2(), e(0, 0)), &t),
            Err(Error::NotCentral)
        ));
        assert!(matches!(
            central_sa_maximal(&trip(&offdiag(), e(0, 1)), &t),
            Err(Error::NotSelfadjoint)
        ));
    }

    #[test]
    fn orderable_probe_examples() {
        let t = tol();
        let r = orderable_probe(&Tripotent::zero(offdiag()), &t).unwrap();
        assert_eq!(r.verdict, Some(false));
        assert_eq!(r.residuals["annihilator_dim"], 2.0);
        let r = orderable_probe(&trip(&m2(), CMatrix::identity(2)), &t).unwrap();
        assert_eq!(r.verdict, Some(true));
        let r = orderable_probe(&trip(&diag(), CMatrix::identity(2)), &t).unwrap();
        assert_eq!(r.residuals["annihilator_dim"], 0.0);
        assert!(matches!(
            orderable_probe(&Tripotent::zero(m2()), &t),
            Err(Error::NotMaximal)
        ));
    }

    #[test]
    fn boundary_cone_examples() {
        let t = tol();
        let x = OrderedSpace::new(vec![e(0, 0)], vec![e(0, 0)]).unwrap();
        let bc = boundary_cone(&x, &t).unwrap();
        assert_eq!(bc.w.dim(), 1);
        assert_eq!(bc.u.matrix(), &e(0, 0));
        assert_eq!(bc.report.verdict, Some(true));

        let x = OrderedSpace::new(
            vec![CMatrix::identity(2), e(0, 0)],
            vec![CMatrix::identity(2), e(0, 0)],
        )
        .unwrap();
        let bc = boundary_cone(&x, &t).unwrap();
        assert!((bc.u.matrix() - &CMatrix::identity(2)).frob_norm() < 1e-12);
        assert_eq!(bc.report.verdict, Some(true));

        let all: Vec<CMatrix> = (0..2).flat_map(|i| (0..2).map(move |j| e(i, j))).collect();
        let x = OrderedSpace::new(all, vec![e(0, 0)]).unwrap();
        let bc = boundary_cone(&x, &t).unwrap();
        assert_eq!(bc.w.dim(), 4);
        assert_eq!(bc.u.matrix(), &e(0, 0));
        assert_eq!(bc.report.notes.len(), 1);
    }

    #[test]
    fn boundary_cone_grows_with_generators() {
        let t = tol();
        let h = CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let basis = vec![e(0, 0), e(0, 1), e(1, 0), e(1, 1)];
        let small = OrderedSpace::new(basis.clone(), vec![e(0, 0)]).unwrap();
        let large = OrderedSpace::new(basis, vec![e(0, 0), h]).unwrap();
        let a = boundary_cone(&small, &t).unwrap().u;
        let b = boundary_cone(&large, &t).unwrap().u;
        let b = Tripotent::new(a.space().clone(), b.matrix(), &t).unwrap();
        assert!(crate::tripotent::leq(&a, &b, &t).unwrap());
    }

    #[test]
    fn bk_check_examples() {
        let t = tol();
        let x = OrderedSpace::new(vec![e(0, 0), e(1, 1)], vec![e(0, 0), e(1, 1)]).unwrap();
        assert_eq!(bk_check(&x, &t).unwrap().verdict, Some(true));
        let k = CMatrix::from_real(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let x = OrderedSpace::new(vec![CMatrix::identity(2), k.clone()], vec![CMatrix::identity(2), k]).unwrap();
        assert_eq!(bk_check(&x, &t).unwrap().verdict, Some(true));
        assert!(matches!(
            OrderedSpace::new(vec![e(0, 1)], vec![e(0, 1)]),
            Err(Error::NotPsd { .. })
        ));
        let x = OrderedSpace::new(vec![e(0, 0), e(1, 1)], vec![e(0, 0)]).unwrap();
        assert!(matches!(bk_check(&x, &t), Err(Error::NotDenselySpanning)));
    }

    #[test]
    fn completeness_examples() {
        let t = tol();
        let opts = CompletenessOptions::default();
        let x = OrderedSpace::new(vec![e(0, 0), e(1, 1)], vec![e(0, 0), e(1, 1)]).unwrap();
        assert_eq!(completeness_check(&x, opts, &t).unwrap().verdict, Some(true));
        let x = OrderedSpace::new(vec![e(0, 0), e(1, 1)], vec![CMatrix::identity(2)]).unwrap();
        let r = completeness_check(&x, opts, &t).unwrap();
        assert_eq!(r.verdict, Some(false));
        assert!(!r.witnesses.is_empty());
        let x = OrderedSpace::new(vec![e(0, 0)], vec![e(0, 0)]).unwrap();
        assert_eq!(completeness_check(&x, opts, &t).unwrap().verdict, Some(true));
    }

    /// Exact cone membership for diagonal data: some subset of generators
    /// solves the system with nonnegative coefficients.
    fn brute_force_member(gens: &[Vec<f64>], x: &[f64]) -> bool {
        let k = gens.len();
        for mask in 0u32..(1 << k) {
            let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            if idx.is_empty() {
                if x.iter().all(|v| v.abs() < 1e-12) {
                    return true;
                }
                continue;
            }
            let a = DMatrix::from_fn(x.len(), idx.len(), |i, j| gens[idx[j]][i]);
            let b = DVector::from_column_slice(x);
            let sol = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
            if (&a * &sol - &b).norm() < 1e-9 && sol.iter().all(|&v| v >= -1e-12) {
                return true;
            }
        }
        false
    }

    #[test]
    fn completeness_matches_brute_force_on_diagonals() {
        let t = tol();
        let mut rng = SplitMix64::new(11);
        for _ in 0..12 {
            let d = rng.range_inclusive(2, 3);
            let k = rng.range_inclusive(1, 3);
            let gens: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    (0..d)
                        .map(|_| if rng.coin() { rng.uniform(0.2, 1.0) } else { 0.0 })
                        .collect()
                })
                .filter(|g: &Vec<f64>| g.iter().any(|&v| v > 0.0))
                .collect();
            if gens.is_empty() {
                continue;
            }
            let basis: Vec<CMatrix> = (0..d).map(|i| CMatrix::unit(d, d, i, i)).collect();
            let cone: Vec<CMatrix> = gens.iter().map(|g| CMatrix::diag_real(g)).collect();
            let x = OrderedSpace::new(basis, cone).unwrap();
            let opts = CompletenessOptions {
                max_level: 1,
                ..CompletenessOptions::default()
            };
            let verdict = completeness_check(&x, opts, &t).unwrap().verdict;
            let support: Vec<usize> = (0..d).filter(|&i| gens.iter().any(|g| g[i] > 0.0)).collect();
            let oracle = support.iter().all(|&i| {
                let mut unit = vec![0.0; d];
                unit[i] = 1.0;
                brute_force_member(&gens, &unit)
            });
            assert_eq!(verdict, Some(oracle), "generators {gens:?}");
        }
    }

    #[test]
    fn generated_cone_membership_basics() {
        let t = tol();
        let gens = [e(0, 0), e(1, 1)];
        assert_eq!(
            generated_cone_membership(&gens, &CMatrix::diag_real(&[2.0, 0.5]), 10_000, &t),
            Membership::Member
        );
        assert_eq!(
            generated_cone_membership(&gens, &CMatrix::diag_real(&[2.0, -0.5]), 10_000, &t),
            Membership::NonMember
        );
        assert_eq!(
            generated_cone_membership(&gens, &e(0, 1), 10_000, &t),
            Membership::NonMember
        );
        let p = CMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            generated_cone_membership_level2(&[CMatrix::identity(1)], &p, 10_000, &t),
            Membership::Member
        );
        let q = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(
            generated_cone_membership_level2(&[CMatrix::identity(1)], &q, 10_000, &t),
            Membership::NonMember
        );
    }

    #[test]
    fn restricted_linking_examples() {
        let t = tol();
        let z = diag();
        let u = trip(&z, CMatrix::diag_real(&[1.0, -1.0]));
        let (v, q) = restricted_linking_decompose(&z, &u.hat(), &t).unwrap();
        assert!((v.matrix() - u.matrix()).frob_norm() < 1e-12);
        assert!(q.frob_norm() < 1e-12);

        let q0 = e(1, 1);
        let pmat = CMatrix::identity(2).kron(&q0);
        let (v, q) = restricted_linking_decompose(&z, &pmat, &t).unwrap();
        assert!(v.is_zero());
        assert!((&q - &q0).frob_norm() < 1e-12);

        let u = trip(&z, e(0, 0));
        let mixed = &u.hat() + &CMatrix::identity(2).kron(&e(1, 1));
        let (v, q) = restricted_linking_decompose(&z, &mixed, &t).unwrap();
        assert!((v.matrix() - &e(0, 0)).frob_norm() < 1e-12);
        assert!((&q - &e(1, 1)).frob_norm() < 1e-12);

        let bad = CMatrix::block_diag(&[e(0, 0), CMatrix::zeros(2, 2)]);
        assert!(matches!(
            restricted_linking_decompose(&z, &bad, &t),
            Err(Error::NotInRestrictedLinking(_))
        ));
        assert!(matches!(
            restricted_linking_decompose(&z, &CMatrix::identity(4).scale(2.0), &t),
            Err(Error::NotProjection { .. })
        ));
    }

    #[test]
    fn offdiagonal_m2_witness() {
        let t = tol();
        let z = offdiag();
        assert_eq!(z.j_subalgebra(&t).unwrap().dim(), 0);
        let zero = Tripotent::zero(z.clone());
        assert!(central_sa_maximal(&zero, &t).unwrap());
        assert_eq!(annihilator(&z, &[CMatrix::zeros(2, 2)], &t).unwrap().dim(), 2);
        assert_eq!(orderable_probe(&zero, &t).unwrap().verdict, Some(false));
    }
}
