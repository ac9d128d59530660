//! Ternary rings of operators `Z ⊂ M_{p×q}` closed under `xy*z`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_psd_lenient, range_projection, CMatrix, TolerancePolicy, C64};
use crate::subspace::Subspace;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TroSpaceRepr {
    p: usize,
    q: usize,
    square_mode: bool,
    basis: Vec<CMatrix>,
}

/// A subspace of `p×q` matrices closed under the triple product.
///
/// In square mode (`p = q`) the space is viewed inside `M_p` itself, which is
/// where natural cones `Z ∩ M_p⁺` make sense.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TroSpaceRepr", into = "TroSpaceRepr")]
pub struct TroSpace {
    p: usize,
    q: usize,
    square_mode: bool,
    star_closed: bool,
    space: Subspace,
}

impl From<TroSpace> for TroSpaceRepr {
    fn from(z: TroSpace) -> Self {
        TroSpaceRepr {
            p: z.p,
            q: z.q,
            square_mode: z.square_mode,
            basis: z.space.basis().to_vec(),
        }
    }
}

impl TryFrom<TroSpaceRepr> for TroSpace {
    type Error = Error;

    fn try_from(r: TroSpaceRepr) -> Result<Self> {
        TroSpace::from_basis(r.p, r.q, r.square_mode, r.basis, &TolerancePolicy::default())
    }
}

impl TroSpace {
    /// The smallest subTRO containing `gens`.
    pub fn generate(p: usize, q: usize, gens: &[CMatrix], tol: &TolerancePolicy) -> Result<Self> {
        for g in gens {
            g.ensure_shape(p, q)?;
        }
        let mut space = Subspace::span(p, q, gens, tol);
        close_ternary(&mut space, tol);
        Ok(Self::from_subspace(space, p == q, tol))
    }

    /// Wraps an explicit basis, re-orthonormalizing it if needed, and checks
    /// ternary closure.
    pub fn from_basis(
        p: usize,
        q: usize,
        square_mode: bool,
        basis: Vec<CMatrix>,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        for b in &basis {
            b.ensure_shape(p, q)?;
            if !b.is_finite() {
                return Err(Error::InvalidInput("non-finite basis entry".into()));
            }
        }
        if square_mode && p != q {
            return Err(Error::NotSquareAmbient);
        }
        let space = if is_orthonormal(&basis, tol) {
            Subspace::from_orthonormal(p, q, basis)
        } else {
            Subspace::span(p, q, &basis, tol)
        };
        let z = Self::from_subspace(space, square_mode, tol);
        let residual = z.closure_defect();
        if !tol.is_small(residual, 1.0) {
            return Err(Error::NotTro(format!(
                "triple product leaves the span (distance {residual:.3e})"
            )));
        }
        Ok(z)
    }

    pub fn full(p: usize, q: usize) -> Self {
        Self::from_subspace(Subspace::full(p, q), p == q, &TolerancePolicy::default())
    }

    pub fn zero(p: usize, q: usize) -> Self {
        Self {
            p,
            q,
            square_mode: p == q,
            star_closed: p == q,
            space: Subspace::zero(p, q),
        }
    }

    pub(crate) fn from_subspace(space: Subspace, square_mode: bool, tol: &TolerancePolicy) -> Self {
        let (p, q) = (space.rows(), space.cols());
        let square_mode = square_mode && p == q;
        let star_closed = square_mode && space.basis().iter().all(|b| space.contains(&b.adjoint(), tol));
        Self {
            p,
            q,
            square_mode,
            star_closed,
            space,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn square_mode(&self) -> bool {
        self.square_mode
    }

    pub fn star_closed(&self) -> bool {
        self.star_closed
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn basis(&self) -> &[CMatrix] {
        self.space.basis()
    }

    pub fn subspace(&self) -> &Subspace {
        &self.space
    }

    pub fn distance(&self, x: &CMatrix) -> f64 {
        self.space.distance(x)
    }

    pub fn contains(&self, x: &CMatrix, tol: &TolerancePolicy) -> Result<bool> {
        x.ensure_shape(self.p, self.q)?;
        Ok(self.space.contains(x, tol))
    }

    pub(crate) fn ensure_contains(&self, x: &CMatrix, tol: &TolerancePolicy) -> Result<()> {
        x.ensure_shape(self.p, self.q)?;
        let distance = self.space.distance(x);
        if tol.is_small(distance, x.frob_norm()) {
            Ok(())
        } else {
            Err(Error::NotInSpace { distance })
        }
    }

    fn ensure_square(&self) -> Result<()> {
        if self.square_mode && self.p == self.q {
            Ok(())
        } else {
            Err(Error::NotSquareAmbient)
        }
    }

    /// Largest distance of a basis triple product from the span.
    pub fn closure_defect(&self) -> f64 {
        let b = self.basis();
        let mut worst = 0.0f64;
        for x in b {
            for y in b {
                let xy = x * &y.adjoint();
                for z in b {
                    worst = worst.max(self.space.distance(&(&xy * z)));
                }
            }
        }
        worst
    }

    /// Same ambient shape and same span.
    pub fn same_as(&self, other: &TroSpace, tol: &TolerancePolicy) -> bool {
        self.p == other.p
            && self.q == other.q
            && self.square_mode == other.square_mode
            && self.space.same_span(&other.space, tol)
    }

    pub fn is_subtro_of(&self, other: &TroSpace, tol: &TolerancePolicy) -> bool {
        self.space.is_within(&other.space, tol)
    }

    /// `J(Z) = Z ∩ Z* ∩ span(Z*Z) ∩ span(ZZ*)`.
    pub fn j_subalgebra(&self, tol: &TolerancePolicy) -> Result<TroSpace> {
        self.ensure_square()?;
        let b = self.basis();
        let mut left = Vec::with_capacity(b.len() * b.len());
        let mut right = Vec::with_capacity(b.len() * b.len());
        for x in b {
            for y in b {
                left.push(x * &y.adjoint());
                right.push(&x.adjoint() * y);
            }
        }
        let zz = Subspace::span(self.p, self.p, &left, tol);
        let zsz = Subspace::span(self.q, self.q, &right, tol);
        let j = self
            .space
            .intersect(&self.space.adjoints(), tol)
            .intersect(&zsz, tol)
            .intersect(&zz, tol);
        Ok(TroSpace::from_subspace(j, true, tol))
    }

    /// Cached natural cone `J(Z)₊` for repeated membership queries.
    pub fn natural_cone(&self, tol: &TolerancePolicy) -> Result<NaturalCone<'_>> {
        Ok(NaturalCone {
            z: self,
            j: self.j_subalgebra(tol)?,
        })
    }

    /// `x ∈ Z ∩ M_p⁺`.
    pub fn natural_cone_membership(&self, x: &CMatrix, tol: &TolerancePolicy) -> Result<bool> {
        self.natural_cone(tol)?.contains(x, tol)
    }

    pub fn linking_algebra(&self, tol: &TolerancePolicy) -> LinkingAlgebra {
        let b = self.basis();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for x in b {
            for y in b {
                left.push(x * &y.adjoint());
                right.push(&x.adjoint() * y);
            }
        }
        LinkingAlgebra {
            p: self.p,
            q: self.q,
            corners: [
                Subspace::span(self.p, self.p, &left, tol),
                self.space.clone(),
                self.space.adjoints(),
                Subspace::span(self.q, self.q, &right, tol),
            ],
        }
    }

    /// `J Z* J ⊂ J`.
    pub fn is_inner_ideal(&self, j: &Subspace, tol: &TolerancePolicy) -> Result<bool> {
        self.ensure_ideal_shape(j, tol)?;
        for a in j.basis() {
            for y in self.basis() {
                let ay = a * &y.adjoint();
                for c in j.basis() {
                    if !j.contains(&(&ay * c), tol) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// `J Z*Z ⊂ J` and `Z Z*J ⊂ J`.
    pub fn is_ternary_ideal(&self, j: &Subspace, tol: &TolerancePolicy) -> Result<bool> {
        self.ensure_ideal_shape(j, tol)?;
        let b = self.basis();
        for a in j.basis() {
            for y in b {
                for z in b {
                    let right = &(a * &y.adjoint()) * z;
                    let left = &(y * &z.adjoint()) * a;
                    if !j.contains(&right, tol) || !j.contains(&left, tol) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    fn ensure_ideal_shape(&self, j: &Subspace, tol: &TolerancePolicy) -> Result<()> {
        if (j.rows(), j.cols()) != (self.p, self.q) {
            return Err(Error::ShapeMismatch {
                expected: (self.p, self.q),
                found: (j.rows(), j.cols()),
            });
        }
        if !j.is_within(&self.space, tol) {
            return Err(Error::NotSubspace);
        }
        Ok(())
    }

    /// Quotient `Z → Z(1 − q)` where `q` is the support projection of `J*J`.
    pub fn quotient_by_ideal(
        &self,
        j: &Subspace,
        tol: &TolerancePolicy,
    ) -> Result<(TroSpace, TernaryMorphism)> {
        if !self.is_ternary_ideal(j, tol)? {
            return Err(Error::NotTernaryIdeal);
        }
        let support = self.ideal_support(j, tol);
        let zq = self.space.map_span(self.p, self.q, |z| z * &support, tol);
        let residual = j
            .basis()
            .iter()
            .chain(zq.basis())
            .map(|x| j.distance(x).max(zq.distance(x)))
            .fold(0.0, f64::max);
        if zq.dim() != j.dim() || !tol.is_small(residual, 1.0) {
            return Err(Error::SupportMismatch { residual });
        }
        let complement = &CMatrix::identity(self.q) - &support;
        let image = self.space.map_span(self.p, self.q, |z| z * &complement, tol);
        let quotient = TroSpace::from_subspace(image, self.square_mode, tol);
        let map = TernaryMorphism::from_fn(self.clone(), quotient.clone(), |z| z * &complement, tol)?;
        Ok((quotient, map))
    }

    /// Range projection of `Σ b*b` over a basis of `J`.
    pub fn ideal_support(&self, j: &Subspace, tol: &TolerancePolicy) -> CMatrix {
        let mut g = CMatrix::zeros(self.q, self.q);
        for b in j.basis() {
            g += &(&b.adjoint() * b);
        }
        range_projection(&g, tol)
    }

    /// Block-diagonal direct sum. The empty sum is the `0×0` zero space.
    pub fn direct_sum(zs: &[TroSpace], tol: &TolerancePolicy) -> TroSpace {
        let p: usize = zs.iter().map(|z| z.p).sum();
        let q: usize = zs.iter().map(|z| z.q).sum();
        let square = zs.iter().all(|z| z.square_mode);
        let mut basis = Vec::new();
        let (mut r0, mut c0) = (0, 0);
        for z in zs {
            for b in z.basis() {
                let mut m = CMatrix::zeros(p, q);
                m.set_block(r0, c0, b);
                basis.push(m);
            }
            r0 += z.p;
            c0 += z.q;
        }
        TroSpace::from_subspace(Subspace::from_orthonormal(p, q, basis), square, tol)
    }

    /// `M_n(Z)` inside `M_{np×nq}`, spanned by `E_ij ⊗ b`.
    pub fn amplify(&self, n: usize, tol: &TolerancePolicy) -> TroSpace {
        let mut basis = Vec::with_capacity(n * n * self.dim());
        for i in 0..n {
            for j in 0..n {
                let e = CMatrix::unit(n, n, i, j);
                for b in self.basis() {
                    basis.push(e.kron(b));
                }
            }
        }
        let space = Subspace::from_orthonormal(n * self.p, n * self.q, basis);
        TroSpace::from_subspace(space, self.square_mode, tol)
    }
}

fn is_orthonormal(basis: &[CMatrix], tol: &TolerancePolicy) -> bool {
    basis.iter().enumerate().all(|(i, a)| {
        basis.iter().enumerate().all(|(j, b)| {
            let target = if i == j { 1.0 } else { 0.0 };
            (a.inner_product(b) - C64::new(target, 0.0)).norm() <= tol.eq_tol
        })
    })
}

/// Extends `space` by triple products until the dimension stabilizes. Only
/// triples touching a newly added basis element are formed after the first round.
/// Closes under `xy*z` through `Z ← span(L·Z)` with `L = span(ZZ*)`.
fn close_ternary(space: &mut Subspace, tol: &TolerancePolicy) {
    let full = space.rows() * space.cols();
    loop {
        let n = space.dim();
        if n == 0 || n == full {
            return;
        }
        let rows = space.rows();
        let mut left = Subspace::zero(rows, rows);
        for x in space.basis() {
            for y in space.basis() {
                left.try_extend(&(x * &y.adjoint()), 1.0, tol);
            }
        }
        let mut next = space.clone();
        for l in left.basis() {
            for z in space.basis() {
                next.try_extend(&(l * z), 1.0, tol);
                if next.dim() == full {
                    *space = next;
                    return;
                }
            }
        }
        if next.dim() == n {
            return;
        }
        *space = next;
    }
}

/// `J(Z)₊ = Z ∩ M_p⁺` with `J(Z)` precomputed.
#[derive(Clone, Debug)]
pub struct NaturalCone<'a> {
    z: &'a TroSpace,
    j: TroSpace,
}

impl NaturalCone<'_> {
    pub fn j(&self) -> &TroSpace {
        &self.j
    }

    /// Membership in `Z ∩ M_p⁺`, cross-checked against `J(Z) ∩ M_p⁺`.
    pub fn contains(&self, x: &CMatrix, tol: &TolerancePolicy) -> Result<bool> {
        let in_z = self.z.contains(x, tol)?;
        let psd = is_psd_lenient(x, tol);
        let direct = in_z && psd;
        let via_j = psd && self.j.subspace().contains(x, tol);
        if direct != via_j {
            return Err(Error::InternalInconsistency(format!(
                "natural cone membership {direct} disagrees with J(Z)-membership {via_j}"
            )));
        }
        Ok(direct)
    }
}

/// `I(z) = [[0, z], [z*, 0]]`.
pub fn inject(z: &CMatrix) -> CMatrix {
    let (p, q) = z.shape();
    CMatrix::from_blocks(&CMatrix::zeros(p, p), z, &z.adjoint(), &CMatrix::zeros(q, q))
}

/// Negates the off-diagonal blocks of a `(p+q)×(p+q)` matrix.
pub fn theta(m: &CMatrix, p: usize) -> CMatrix {
    let n = m.rows();
    CMatrix::from_fn(n, n, |i, j| {
        let z = m.get(i, j);
        if (i < p) == (j < p) {
            z
        } else {
            -z
        }
    })
}

/// Linking algebra of `Z` with corners `span(ZZ*)`, `Z`, `Z*`, `span(Z*Z)`.
#[derive(Clone, Debug)]
pub struct LinkingAlgebra {
    p: usize,
    q: usize,
    corners: [Subspace; 4],
}

impl LinkingAlgebra {
    pub fn ambient_dim(&self) -> usize {
        self.p + self.q
    }

    pub fn corners(&self) -> &[Subspace; 4] {
        &self.corners
    }

    pub fn inject(&self, z: &CMatrix) -> CMatrix {
        inject(z)
    }

    pub fn theta(&self, m: &CMatrix) -> CMatrix {
        theta(m, self.p)
    }

    /// Whether every block of `m` lies in the matching corner.
    pub fn contains(&self, m: &CMatrix, tol: &TolerancePolicy) -> bool {
        let (p, q) = (self.p, self.q);
        if m.shape() != (p + q, p + q) {
            return false;
        }
        let blocks = [
            m.block(0, 0, p, p),
            m.block(0, p, p, q),
            m.block(p, 0, q, p),
            m.block(p, p, q, q),
        ];
        blocks
            .iter()
            .zip(&self.corners)
            .all(|(b, c)| c.contains(b, tol))
    }
}

/// Linear map between TROs, stored by its matrix in the orthonormal bases.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TernaryMorphism {
    domain: TroSpace,
    codomain: TroSpace,
    action: CMatrix,
}

impl TernaryMorphism {
    /// Tabulates a complex-linear `f` on the domain basis.
    pub fn from_fn(
        domain: TroSpace,
        codomain: TroSpace,
        f: impl Fn(&CMatrix) -> CMatrix,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        let mut action = DMatrix::<C64>::zeros(codomain.dim(), domain.dim());
        for (k, b) in domain.basis().iter().enumerate() {
            let image = f(b);
            codomain.ensure_contains(&image, tol)?;
            for (i, c) in codomain.subspace().coordinates(&image).into_iter().enumerate() {
                action[(i, k)] = c;
            }
        }
        Ok(Self {
            domain,
            codomain,
            action: CMatrix::from_inner(action),
        })
    }

    pub fn identity(z: &TroSpace) -> Self {
        Self {
            domain: z.clone(),
            codomain: z.clone(),
            action: CMatrix::identity(z.dim()),
        }
    }

    pub fn domain(&self) -> &TroSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &TroSpace {
        &self.codomain
    }

    pub fn action(&self) -> &CMatrix {
        &self.action
    }

    pub fn apply(&self, x: &CMatrix, tol: &TolerancePolicy) -> Result<CMatrix> {
        self.domain.ensure_contains(x, tol)?;
        Ok(self.apply_coords(&self.domain.subspace().coordinates(x)))
    }

    fn apply_coords(&self, coords: &[C64]) -> CMatrix {
        let a = self.action.inner();
        let image: Vec<C64> = (0..a.nrows())
            .map(|i| coords.iter().enumerate().map(|(k, c)| a[(i, k)] * c).sum())
            .collect();
        self.codomain.subspace().combine(&image)
    }

    /// Largest `‖T(xy*z) − T(x)T(y)*T(z)‖` over basis triples.
    pub fn ternary_residual(&self) -> f64 {
        let b = self.domain.basis();
        let images: Vec<CMatrix> = (0..b.len())
            .map(|k| {
                let mut e = vec![C64::new(0.0, 0.0); b.len()];
                e[k] = C64::new(1.0, 0.0);
                self.apply_coords(&e)
            })
            .collect();
        let space = self.domain.subspace();
        let mut worst = 0.0f64;
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let xy = x * &y.adjoint();
                let txy = &images[i] * &images[j].adjoint();
                for (k, z) in b.iter().enumerate() {
                    let lhs = self.apply_coords(&space.coordinates(&(&xy * z)));
                    let rhs = &txy * &images[k];
                    worst = worst.max((&lhs - &rhs).frob_norm());
                }
            }
        }
        worst
    }

    pub fn validate_ternary(&self, tol: &TolerancePolicy) -> Result<()> {
        let residual = self.ternary_residual();
        if tol.is_small(residual, 1.0) {
            Ok(())
        } else {
            Err(Error::NotTernary { residual })
        }
    }
}
