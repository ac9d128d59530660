//! The Peirce 2-space `Z₂(u)` as a unital C*-algebra, its cones, and the
//! range, limit, spectral and support tripotents.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh_unchecked, is_psd_lenient, min_eigenvalue, range_projection, svd, CMatrix, Svd,
    TolerancePolicy, C64,
};
use crate::report::ConeReport;
use crate::rng::SplitMix64;
use crate::subspace::Subspace;
use crate::tripotent::{inf_family, InfFamilyOptions, Tripotent};
use crate::tro::TroSpace;

/// `Z₂(u)` with product `x·y = xu*y`, involution `x♯ = ux*u` and unit `u`.
#[derive(Clone, Debug)]
pub struct PeirceAlgebra {
    u: Tripotent,
    space: Subspace,
    relative: Option<Subspace>,
}

/// Largest residual of each C*-algebra identity over basis pairs.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomResiduals {
    pub product_closure: f64,
    pub involution_closure: f64,
    pub involution_period: f64,
    pub anti_multiplicative: f64,
    pub unit: f64,
    pub associativity: f64,
    pub iso_product: f64,
    pub iso_involution: f64,
    pub cstar_norm: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        [
            self.product_closure,
            self.involution_closure,
            self.involution_period,
            self.anti_multiplicative,
            self.unit,
            self.associativity,
            self.iso_product,
            self.iso_involution,
            self.cstar_norm,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl PeirceAlgebra {
    /// Builds `Z₂(u)` and, when `relative` is given, `Z(u) = Z₂(u) ∩ relative`.
    pub fn build(u: &Tripotent, relative: Option<&TroSpace>, tol: &TolerancePolicy) -> Result<Self> {
        let relative = match relative {
            Some(r) => {
                if (r.p(), r.q()) != (u.space().p(), u.space().q()) {
                    return Err(Error::ShapeMismatch {
                        expected: (u.space().p(), u.space().q()),
                        found: (r.p(), r.q()),
                    });
                }
                if !r.is_subtro_of(u.space(), tol) {
                    return Err(Error::NotSubspace);
                }
                Some(r.subspace().clone())
            }
            None => None,
        };
        let space = u.peirce2_space(tol);
        let relative = relative.map(|r| space.intersect(&r, tol));
        let pa = Self {
            u: u.clone(),
            space,
            relative,
        };
        let res = pa.axiom_residuals();
        if !tol.is_small(res.max(), 1.0) {
            return Err(Error::AlgebraAxiomFailure(format!("{res:?}")));
        }
        Ok(pa)
    }

    pub fn unit(&self) -> &Tripotent {
        &self.u
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    /// `Z(u)`, present when built with a relative subTRO.
    pub fn relative(&self) -> Option<&Subspace> {
        self.relative.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn product(&self, x: &CMatrix, y: &CMatrix) -> CMatrix {
        &(x * &self.u.matrix().adjoint()) * y
    }

    pub fn involution(&self, x: &CMatrix) -> CMatrix {
        let u = self.u.matrix();
        &(u * &x.adjoint()) * u
    }

    /// The *-isomorphism `x ↦ u*x` into `M_q`.
    pub fn represent(&self, x: &CMatrix) -> CMatrix {
        &self.u.matrix().adjoint() * x
    }

    /// Checks every C*-identity on basis pairs and triples.
    pub fn axiom_residuals(&self) -> AxiomResiduals {
        let b = self.space.basis();
        let u = self.u.matrix();
        let mut r = AxiomResiduals::default();
        let dist = |x: &CMatrix| self.space.distance(x);
        if !self.u.is_zero() {
            r.unit = dist(u);
        }
        for x in b {
            let xs = self.involution(x);
            r.involution_closure = r.involution_closure.max(dist(&xs));
            r.involution_period = r.involution_period.max((&self.involution(&xs) - x).frob_norm());
            r.unit = r
                .unit
                .max((&self.product(u, x) - x).frob_norm())
                .max((&self.product(x, u) - x).frob_norm());
            let rx = self.represent(x);
            r.iso_involution = r
                .iso_involution
                .max((&self.represent(&xs) - &rx.adjoint()).frob_norm());
            let sq = self.product(&xs, x);
            let lhs = self.represent(&sq).spectral_norm();
            let rhs = rx.spectral_norm().powi(2);
            r.cstar_norm = r.cstar_norm.max((lhs - rhs).abs());
            for y in b {
                let xy = self.product(x, y);
                r.product_closure = r.product_closure.max(dist(&xy));
                let anti = &self.involution(&xy) - &self.product(&self.involution(y), &xs);
                r.anti_multiplicative = r.anti_multiplicative.max(anti.frob_norm());
                let iso = &self.represent(&xy) - &(&rx * &self.represent(y));
                r.iso_product = r.iso_product.max(iso.frob_norm());
            }
        }
        if let (Some(x), Some(y)) = (b.first(), b.last()) {
            for z in b {
                let left = self.product(&self.product(x, y), z);
                let right = self.product(x, &self.product(y, z));
                r.associativity = r.associativity.max((&left - &right).frob_norm());
            }
        }
        r
    }

    /// Membership in `c_u = {x : u*x ≥ 0, x = ux*u}`, cross-checked against `u*x = |x|`.
    pub fn cone_membership(&self, x: &CMatrix, tol: &TolerancePolicy) -> Result<bool> {
        x.ensure_shape(self.u.space().p(), self.u.space().q())?;
        let scale = x.frob_norm();
        let in_space = tol.is_small(self.space.distance(x), scale);
        let selfadjoint = tol.is_small((&self.involution(x) - x).frob_norm(), scale);
        let rep = self.represent(x);
        let positive = rep.hermitian_defect() <= tol.eq_tol * scale.max(1.0) && is_psd_lenient(&rep, tol);
        let verdict = in_space && selfadjoint && positive;
        if verdict {
            let abs = abs_of(x, tol);
            let residual = (&rep - &abs).frob_norm();
            if !tol.is_small(residual, scale) {
                return Err(Error::InternalInconsistency(format!(
                    "cone member with u*x ≠ |x| (residual {residual:.3e})"
                )));
            }
        }
        Ok(verdict)
    }

    /// Membership in `d_u = c_u ∩ Z(u)`; equals `c_u` without a relative subTRO.
    pub fn relative_cone_membership(&self, x: &CMatrix, tol: &TolerancePolicy) -> Result<bool> {
        let in_relative = match &self.relative {
            Some(r) => r.contains(x, tol),
            None => true,
        };
        Ok(self.cone_membership(x, tol)? && in_relative)
    }
}

/// `|x| = (x*x)^{1/2}` from the singular value decomposition.
pub fn abs_of(x: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let dec = svd(x);
    weighted_outer(&dec.v, &dec.v, &dec.singular, dec.rank(tol))
}

/// `|x*| = (xx*)^{1/2}`.
pub fn abs_of_adjoint(x: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let dec = svd(x);
    weighted_outer(&dec.u, &dec.u, &dec.singular, dec.rank(tol))
}

fn weighted_outer(a: &CMatrix, b: &CMatrix, weights: &[f64], count: usize) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows(), b.rows());
    for (k, &w) in weights.iter().enumerate().take(count) {
        let ak = a.block(0, k, a.rows(), 1);
        let bk = b.block(0, k, b.rows(), 1);
        out += &(&ak * &bk.adjoint()).scale(w);
    }
    out
}

/// `r(x)` from `x = r(x)|x|`.
pub fn range_tripotent(z: &Arc<TroSpace>, x: &CMatrix, tol: &TolerancePolicy) -> Result<Tripotent> {
    z.ensure_contains(x, tol)?;
    let dec = svd(x);
    let rank = dec.rank(tol);
    let r = dec.partial_isometry(|k, _| k < rank);
    let distance = z.distance(&r);
    if !tol.is_small(distance, r.frob_norm()) {
        return Err(Error::RangeEscape { distance });
    }
    let t = Tripotent::new(z.clone(), &r, tol)?;
    check_in_own_cone(&t, x, tol)?;
    check_range_minimal(&dec, rank, x, tol)?;
    Ok(t)
}

fn check_in_own_cone(t: &Tripotent, x: &CMatrix, tol: &TolerancePolicy) -> Result<()> {
    let r = t.matrix();
    let scale = x.frob_norm();
    let sa = (&(&(r * &x.adjoint()) * r) - x).frob_norm();
    let rep = &r.adjoint() * x;
    let abs = abs_of(x, tol);
    let polar = (&rep - &abs).frob_norm();
    if !tol.is_small(sa, scale) || !tol.is_small(polar, scale) {
        return Err(Error::InternalInconsistency(format!(
            "x is not in the cone of its range tripotent (residuals {sa:.3e}, {polar:.3e})"
        )));
    }
    Ok(())
}

/// Dropping any singular piece of `r(x)` must break `x = r r* x`.
fn check_range_minimal(dec: &Svd, rank: usize, x: &CMatrix, tol: &TolerancePolicy) -> Result<()> {
    let smax = dec.singular.first().copied().unwrap_or(0.0);
    for k in 0..rank {
        let smaller = dec.partial_isometry(|i, _| i < rank && i != k);
        let residual = (x - &(&(&smaller * &smaller.adjoint()) * x)).frob_norm();
        if residual <= 0.5 * tol.rank_tol * smax {
            return Err(Error::InternalInconsistency(
                "a strictly smaller tripotent reproduces x".into(),
            ));
        }
    }
    Ok(())
}

fn ensure_contraction(x: &CMatrix, tol: &TolerancePolicy) -> Result<()> {
    let norm = x.spectral_norm();
    if norm > 1.0 + tol.one_tol {
        return Err(Error::NormExceedsOne { norm });
    }
    Ok(())
}

/// Odd powers `x ↦ x x* x` of a contraction until they stop moving.
pub fn odd_power_limit(x: &CMatrix, tol: &TolerancePolicy, max_steps: usize) -> CMatrix {
    let mut y = x.clone();
    for _ in 0..max_steps {
        let next = &(&y * &y.adjoint()) * &y;
        let change = (&next - &y).frob_norm();
        y = next;
        if change <= tol.eq_tol * 1e-3 {
            break;
        }
    }
    y
}

/// `u(x)`: the part of a contraction with singular value one.
pub fn limit_tripotent(z: &Arc<TroSpace>, x: &CMatrix, tol: &TolerancePolicy) -> Result<Tripotent> {
    z.ensure_contains(x, tol)?;
    ensure_contraction(x, tol)?;
    let dec = svd(x);
    let band = |s: f64| s >= 1.0 - tol.one_tol;
    let u = dec.partial_isometry(|_, s| band(s));
    let snapped_values: Vec<f64> = dec
        .singular
        .iter()
        .map(|&s| if band(s) { 1.0 } else { s })
        .collect();
    let snapped = Svd {
        singular: snapped_values.clone(),
        ..dec.clone()
    };
    let snapped_x = weighted_outer(&snapped.u, &snapped.v, &snapped_values, snapped_values.len());
    let oracle = odd_power_limit(&snapped_x, tol, 200);
    let residual = (&oracle - &u).frob_norm();
    if residual > 10.0 * tol.eq_tol * u.frob_norm().max(1.0) {
        return Err(Error::InternalInconsistency(format!(
            "odd-power limit differs from band selection by {residual:.3e}"
        )));
    }
    let t = Tripotent::new(z.clone(), &u, tol)?;
    let rank = dec.rank(tol);
    let r = dec.partial_isometry(|k, _| k < rank);
    if t.order_residual_to(&r) > tol.eq_tol * u.frob_norm().max(1.0) {
        return Err(Error::InternalInconsistency("u(x) is not below r(x)".into()));
    }
    Ok(t)
}

/// `r(x) χ(|x|)` for singular values in `[lo, hi]`.
pub fn spectral_tripotent(
    z: &Arc<TroSpace>,
    x: &CMatrix,
    lo: f64,
    hi: f64,
    tol: &TolerancePolicy,
) -> Result<Tripotent> {
    if lo.is_nan() || hi.is_nan() || lo < 0.0 || lo > hi {
        return Err(Error::InvalidInput(format!("invalid interval [{lo}, {hi}]")));
    }
    z.ensure_contains(x, tol)?;
    let dec = svd(x);
    let rank = dec.rank(tol);
    let u = dec.partial_isometry(|k, s| k < rank && s >= lo && s <= hi);
    let t = Tripotent::new(z.clone(), &u, tol)?;
    let r = dec.partial_isometry(|k, _| k < rank);
    if t.order_residual_to(&r) > tol.eq_tol * u.frob_norm().max(1.0) {
        return Err(Error::InternalInconsistency("spectral tripotent is not below r(x)".into()));
    }
    Ok(t)
}

impl Tripotent {
    /// `‖u r* u − u‖` against a raw matrix `r`.
    fn order_residual_to(&self, r: &CMatrix) -> f64 {
        let u = self.matrix();
        (&(&(u * &r.adjoint()) * u) - u).frob_norm()
    }
}

/// `‖J − uJ*u‖` as the larger of the two subspace distances, plus `dist(u, J)`.
fn support_residual(j: &Subspace, u: &CMatrix, tol: &TolerancePolicy) -> f64 {
    let image = j.map_span(j.rows(), j.cols(), |b| &(u * &b.adjoint()) * u, tol);
    let forward = j.basis().iter().map(|b| image.distance(b)).fold(0.0, f64::max);
    let backward = image.basis().iter().map(|b| j.distance(b)).fold(0.0, f64::max);
    let dim_gap = if image.dim() == j.dim() { 0.0 } else { 1.0 };
    forward.max(backward).max(dim_gap).max(j.distance(u))
}

/// Support tripotent `u` of an inner ideal `J` with `J = uJ*u`.
///
/// A selfadjoint `J` first tries the positive candidate `r(Σ b*b)`; otherwise
/// range tripotents of random positive combinations of the basis are tried.
pub fn support_tripotent(
    z: &Arc<TroSpace>,
    j: &Subspace,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<Tripotent> {
    if !z.is_inner_ideal(j, tol)? {
        return Err(Error::NotInnerIdeal);
    }
    if j.is_zero() {
        return Ok(Tripotent::zero(z.clone()));
    }
    let selfadjoint = z.square_mode() && j.adjoints().same_span(j, tol);
    if selfadjoint {
        let mut g = CMatrix::zeros(j.rows(), j.cols());
        for b in j.basis() {
            g += &(&b.adjoint() * b);
        }
        let u = range_projection(&g, tol);
        if tol.is_small(support_residual(j, &u, tol), 1.0) {
            return Tripotent::new(z.clone(), &u, tol);
        }
    }
    const ATTEMPTS: usize = 16;
    let mut rng = SplitMix64::new(seed);
    for _ in 0..ATTEMPTS {
        let coeffs: Vec<_> = (0..j.dim())
            .map(|_| C64::new(rng.uniform(0.5, 1.5), 0.0))
            .collect();
        let g = j.combine(&coeffs);
        let dec = svd(&g);
        let rank = dec.rank(tol);
        let u = dec.partial_isometry(|k, _| k < rank);
        if tol.is_small(support_residual(j, &u, tol), 1.0) {
            return Tripotent::new(z.clone(), &u, tol);
        }
    }
    Err(Error::NoUnitaryFound { attempts: ATTEMPTS })
}

/// `x̂` together with the residuals of its defining properties.
#[derive(Clone, Debug, Serialize)]
pub struct HatElement {
    pub xhat: CMatrix,
    pub min_eigenvalue: f64,
    pub norm: f64,
    /// `max(0, −λ_min(r̂(x) − x̂))`.
    pub below_range_hat: f64,
    /// `‖u(x̂) − û(x)‖`.
    pub limit_residual: f64,
    /// `‖r(x̂) − r̂(x)‖`.
    pub range_residual: f64,
}

/// `x̂ = ½[[|x*|, x], [x*, |x|]]` for a contraction `x ∈ Z`.
pub fn hat_element(z: &Arc<TroSpace>, x: &CMatrix, tol: &TolerancePolicy) -> Result<HatElement> {
    z.ensure_contains(x, tol)?;
    ensure_contraction(x, tol)?;
    let xhat = CMatrix::from_blocks(
        &abs_of_adjoint(x, tol),
        x,
        &x.adjoint(),
        &abs_of(x, tol),
    )
    .scale(0.5);
    let eig = eigh_unchecked(&xhat.hermitian_part());
    let min_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
    let norm = eig.values.first().copied().unwrap_or(0.0).max(-min_eigenvalue);
    let limit_hat = eig.apply(|l| if l >= 1.0 - tol.one_tol { 1.0 } else { 0.0 });
    let range_hat = range_projection(&xhat, tol);
    let ux = limit_tripotent(z, x, tol)?;
    let rx = range_tripotent(z, x, tol)?;
    let below = min_eigenvalue_of(&(&rx.hat() - &xhat), tol);
    Ok(HatElement {
        limit_residual: (&limit_hat - &ux.hat()).frob_norm(),
        range_residual: (&range_hat - &rx.hat()).frob_norm(),
        below_range_hat: (-below).max(0.0),
        xhat,
        min_eigenvalue,
        norm,
    })
}

fn min_eigenvalue_of(h: &CMatrix, tol: &TolerancePolicy) -> f64 {
    min_eigenvalue(&h.hermitian_part(), tol).unwrap_or(f64::NEG_INFINITY)
}

/// Checks `(∧ u(x_ii)) ⊗ I ≤ u(x) ≤ x ≤ r(x) ≤ (∨ r(x_ii)) ⊗ I` for a positive
/// contraction `x ∈ M_n(A)` over a C*-algebra `A` in square mode.
pub fn block_bounds_check(
    a: &Arc<TroSpace>,
    x: &CMatrix,
    n: usize,
    opts: InfFamilyOptions,
    tol: &TolerancePolicy,
) -> Result<ConeReport> {
    if !a.square_mode() {
        return Err(Error::NotSquareAmbient);
    }
    let k = a.p();
    x.ensure_shape(n * k, n * k)?;
    let lambda_min = min_eigenvalue(x, tol)?;
    if lambda_min < -tol.psd_tol * x.spectral_norm().max(1.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: lambda_min,
        });
    }
    let x = x.hermitian_part();
    let eig = eigh_unchecked(&x);
    let norm = eig.values.first().copied().unwrap_or(0.0);
    if norm > 1.0 + tol.one_tol {
        return Err(Error::NotContraction { norm });
    }
    let diagonal: Vec<CMatrix> = (0..n).map(|i| x.block(i * k, i * k, k, k)).collect();
    let mut lower = Vec::with_capacity(n);
    let mut upper_sum = CMatrix::zeros(k, k);
    for d in &diagonal {
        lower.push(limit_tripotent(a, d, tol)?);
        upper_sum += range_tripotent(a, d, tol)?.matrix();
    }
    let inf = inf_family(&lower, opts, tol)?;
    let inf_direct = projection_intersection(lower.iter().map(Tripotent::matrix), tol);
    let inf_gap = (inf.matrix() - &inf_direct).frob_norm();
    if !tol.is_small(inf_gap, 1.0) {
        return Err(Error::InternalInconsistency(format!(
            "sampled infimum differs from the range intersection by {inf_gap:.3e}"
        )));
    }
    let sup = range_projection(&upper_sum, tol);
    let ux = eig.apply(|l| if l >= 1.0 - tol.one_tol { 1.0 } else { 0.0 });
    let rx = range_projection(&x, tol);
    let id = CMatrix::identity(n);
    let bottom = id.kron(inf.matrix());
    let top = id.kron(&sup);
    let steps = [
        ("inf_below_limit", &ux - &bottom),
        ("limit_below_x", &x - &ux),
        ("x_below_range", &rx - &x),
        ("range_below_sup", &top - &rx),
    ];
    let mut report = ConeReport::new(None);
    let mut ok = true;
    for (name, diff) in steps {
        let slack = min_eigenvalue_of(&diff, tol);
        ok &= is_psd_lenient(&diff.hermitian_part(), tol);
        report.residual(name, -slack);
    }
    report.residual("inf_cross_check", inf_gap);
    report.verdict = Some(ok);
    report.witness(bottom).witness(ux).witness(rx).witness(top);
    Ok(report)
}

/// Projection onto the intersection of the ranges of the given projections.
pub fn projection_intersection<'a>(
    ps: impl Iterator<Item = &'a CMatrix>,
    tol: &TolerancePolicy,
) -> CMatrix {
    let ps: Vec<&CMatrix> = ps.collect();
    let k = ps.first().map(|p| p.rows()).unwrap_or(0);
    let mut complement = CMatrix::zeros(k, k);
    for p in &ps {
        complement += &(&CMatrix::identity(k) - *p);
    }
    let eig = eigh_unchecked(&complement.hermitian_part());
    let cutoff = tol.rank_tol * (ps.len().max(1) as f64);
    eig.apply(|l| if l.abs() <= cutoff { 1.0 } else { 0.0 })
}
