//! Finite-dimensional subspaces of `p×q` complex matrices.
//!
//! [`Subspace`] is a complex-linear span with a trace-orthonormal basis;
//! [`RealSubspace`] is a real-linear span orthonormal for `Re tr(a*b)`, used
//! for conjugate-linear constraints such as `z = u z* u` or `w = w*`.

use nalgebra::DMatrix;

use crate::linalg::{jacobi_columns, CMatrix, TolerancePolicy, C64};

/// Complex-linear subspace of `rows × cols` matrices.
#[derive(Clone, Debug)]
pub struct Subspace {
    rows: usize,
    cols: usize,
    basis: Vec<CMatrix>,
}

impl Subspace {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            basis: Vec::new(),
        }
    }

    /// All of `M_{rows×cols}`, spanned by matrix units.
    pub fn full(rows: usize, cols: usize) -> Self {
        let basis = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| CMatrix::unit(rows, cols, i, j)))
            .collect();
        Self { rows, cols, basis }
    }

    /// Orthonormalized span of `gens`. Generators must have shape `rows × cols`.
    pub fn span(rows: usize, cols: usize, gens: &[CMatrix], tol: &TolerancePolicy) -> Self {
        let scale = gens.iter().map(CMatrix::frob_norm).fold(0.0, f64::max);
        let mut s = Self::zero(rows, cols);
        for g in gens {
            s.try_extend(g, scale, tol);
        }
        s
    }

    /// Builds a subspace from an already orthonormal basis.
    pub(crate) fn from_orthonormal(rows: usize, cols: usize, basis: Vec<CMatrix>) -> Self {
        Self { rows, cols, basis }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Adds the component of `x` orthogonal to the current span when it is
    /// larger than `rank_tol · max(‖x‖, scale)`. Returns whether the dimension grew.
    pub fn try_extend(&mut self, x: &CMatrix, scale: f64, tol: &TolerancePolicy) -> bool {
        debug_assert_eq!(x.shape(), (self.rows, self.cols));
        let reference = x.frob_norm().max(scale);
        if reference == 0.0 {
            return false;
        }
        let mut v = x.clone();
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.inner_product(&v);
                v = &v - &b.scale_c(c);
            }
        }
        let norm = v.frob_norm();
        if norm <= tol.rank_tol * reference {
            return false;
        }
        self.basis.push(normalize_phase(&v.scale(1.0 / norm)));
        true
    }

    pub fn coordinates(&self, x: &CMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| b.inner_product(x)).collect()
    }

    pub fn combine(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for (b, c) in self.basis.iter().zip(coeffs) {
            out += &b.scale_c(*c);
        }
        out
    }

    pub fn project(&self, x: &CMatrix) -> CMatrix {
        self.combine(&self.coordinates(x))
    }

    pub fn distance(&self, x: &CMatrix) -> f64 {
        (x - &self.project(x)).frob_norm()
    }

    /// `dist(x, span) ≤ eq_tol · max(1, ‖x‖_F)`. Shape must already match.
    pub fn contains(&self, x: &CMatrix, tol: &TolerancePolicy) -> bool {
        tol.is_small(self.distance(x), x.frob_norm())
    }

    pub fn is_within(&self, other: &Subspace, tol: &TolerancePolicy) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.basis.iter().all(|b| other.contains(b, tol))
    }

    pub fn same_span(&self, other: &Subspace, tol: &TolerancePolicy) -> bool {
        self.dim() == other.dim() && self.is_within(other, tol)
    }

    /// `{x* : x ∈ self}`.
    pub fn adjoints(&self) -> Subspace {
        Subspace {
            rows: self.cols,
            cols: self.rows,
            basis: self.basis.iter().map(CMatrix::adjoint).collect(),
        }
    }

    /// Span of `f(b)` over basis elements; `f` must be complex-linear. Images
    /// are measured against the unit scale of the orthonormal basis.
    pub fn map_span(
        &self,
        rows: usize,
        cols: usize,
        f: impl Fn(&CMatrix) -> CMatrix,
        tol: &TolerancePolicy,
    ) -> Subspace {
        let mut out = Subspace::zero(rows, cols);
        for b in &self.basis {
            out.try_extend(&f(b), 1.0, tol);
        }
        out
    }

    pub fn sum(&self, other: &Subspace, tol: &TolerancePolicy) -> Subspace {
        let mut s = self.clone();
        for b in &other.basis {
            s.try_extend(b, 1.0, tol);
        }
        s
    }

    /// Intersection via the nullspace of `(I − P_other)` restricted to `self`.
    pub fn intersect(&self, other: &Subspace, tol: &TolerancePolicy) -> Subspace {
        if self.is_zero() || other.is_zero() {
            return Subspace::zero(self.rows, self.cols);
        }
        let n = self.rows * self.cols;
        let k = self.dim();
        let mut residual = DMatrix::<C64>::zeros(n, k);
        for (j, b) in self.basis.iter().enumerate() {
            let r = b - &other.project(b);
            for (i, z) in r.to_row_major().into_iter().enumerate() {
                residual[(i, j)] = z;
            }
        }
        let null = complex_nullspace(residual, tol.rank_tol);
        let vectors: Vec<CMatrix> = null.iter().map(|c| self.combine(c)).collect();
        Subspace::span(self.rows, self.cols, &vectors, tol)
    }

    /// Real-linear version of this space: basis `{b, i·b}`.
    pub fn realify(&self) -> RealSubspace {
        let i = C64::new(0.0, 1.0);
        let basis = self
            .basis
            .iter()
            .flat_map(|b| [b.clone(), b.scale_c(i)])
            .collect();
        RealSubspace {
            rows: self.rows,
            cols: self.cols,
            basis,
        }
    }
}

/// Multiplies a unit vector by a phase so that its first (near-)maximal entry is
/// real and positive. Gives reproducible bases such as `E12` rather than `−E12`.
fn normalize_phase(v: &CMatrix) -> CMatrix {
    let entries = v.to_row_major();
    let max = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v.clone();
    }
    let pivot = entries
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    v.scale_c(pivot.conj() / pivot.norm())
}

/// Null vectors of a complex `n × k` matrix (columns are images of basis vectors).
fn complex_nullspace(m: DMatrix<C64>, rel_tol: f64) -> Vec<Vec<C64>> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return vec![];
    }
    let padded = if rows < cols {
        let mut p = DMatrix::<C64>::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(&m);
        p
    } else {
        m
    };
    let (av, v) = jacobi_columns(padded);
    let norms: Vec<f64> = av.column_iter().map(|c| c.norm()).collect();
    let smax = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let thresh = rel_tol * smax.max(1.0);
    (0..cols)
        .filter(|&j| norms[j] <= thresh)
        .map(|j| v.column(j).iter().copied().collect())
        .collect()
}

fn real_nullspace(m: DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return vec![];
    }
    let padded = if rows < cols {
        let mut p = DMatrix::<f64>::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(&m);
        p
    } else {
        m
    };
    let (av, v) = jacobi_columns(padded.map(|x| C64::new(x, 0.0)));
    let norms: Vec<f64> = av.column_iter().map(|c| c.norm()).collect();
    let smax = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let thresh = rel_tol * smax.max(1.0);
    (0..cols)
        .filter(|&j| norms[j] <= thresh)
        .map(|j| v.column(j).iter().map(|z| z.re).collect())
        .collect()
}

/// Real-linear subspace of `rows × cols` complex matrices, orthonormal for
/// the real inner product `Re tr(a* b)`.
#[derive(Clone, Debug)]
pub struct RealSubspace {
    rows: usize,
    cols: usize,
    basis: Vec<CMatrix>,
}

impl RealSubspace {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            basis: Vec::new(),
        }
    }

    /// Real-orthonormalized span of `gens`.
    pub fn span(rows: usize, cols: usize, gens: &[CMatrix], tol: &TolerancePolicy) -> Self {
        let scale = gens.iter().map(CMatrix::frob_norm).fold(0.0, f64::max);
        let mut basis: Vec<CMatrix> = Vec::new();
        for g in gens {
            let reference = g.frob_norm().max(scale);
            if reference == 0.0 {
                continue;
            }
            let mut v = g.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.real_inner(&v);
                    v = &v - &b.scale(c);
                }
            }
            let norm = v.frob_norm();
            if norm > tol.rank_tol * reference {
                basis.push(v.scale(1.0 / norm));
            }
        }
        Self { rows, cols, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for (b, c) in self.basis.iter().zip(coeffs) {
            out += &b.scale(*c);
        }
        out
    }

    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let coeffs: Vec<f64> = self.basis.iter().map(|b| b.real_inner(x)).collect();
        self.combine(&coeffs)
    }

    pub fn contains(&self, x: &CMatrix, tol: &TolerancePolicy) -> bool {
        tol.is_small((x - &self.project(x)).frob_norm(), x.frob_norm())
    }

    /// Elements `x` of this space with `f(x) = 0`, for a real-linear `f`
    /// returning any number of matrices.
    pub fn solve(
        &self,
        f: impl Fn(&CMatrix) -> Vec<CMatrix>,
        tol: &TolerancePolicy,
    ) -> RealSubspace {
        if self.is_zero() {
            return self.clone();
        }
        let images: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|b| {
                f(b).iter()
                    .flat_map(|m| m.to_row_major())
                    .flat_map(|z| [z.re, z.im])
                    .collect()
            })
            .collect();
        let rows = images[0].len();
        let cols = images.len();
        let m = DMatrix::from_fn(rows, cols, |i, j| images[j][i]);
        let null = real_nullspace(m, tol.rank_tol);
        let vectors: Vec<CMatrix> = null.iter().map(|c| self.combine(c)).collect();
        RealSubspace::span(self.rows, self.cols, &vectors, tol)
    }

    /// Complex span of this real subspace.
    pub fn complex_span(&self, tol: &TolerancePolicy) -> Subspace {
        Subspace::span(self.rows, self.cols, &self.basis, tol)
    }
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

    #[test]
    fn span_drops_dependent_generators() {
        let s = Subspace::span(2, 2, &[e(0, 1), e(0, 1).scale(3.0), e(1, 0)], &tol());
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&(e(0, 1) + e(1, 0)), &tol()));
        assert!(!s.contains(&e(0, 0), &tol()));
    }

    #[test]
    fn phase_normalization_makes_pivot_positive() {
        let s = Subspace::span(2, 2, &[e(0, 1).scale(-2.0)], &tol());
        assert_eq!(s.basis()[0], e(0, 1));
    }

    #[test]
    fn intersection_of_coordinate_planes() {
        let a = Subspace::span(2, 2, &[e(0, 0), e(0, 1)], &tol());
        let b = Subspace::span(2, 2, &[e(0, 1), e(1, 1)], &tol());
        let c = a.intersect(&b, &tol());
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&e(0, 1), &tol()));
        let d = a.intersect(&Subspace::span(2, 2, &[e(1, 0)], &tol()), &tol());
        assert!(d.is_zero());
    }

    #[test]
    fn hermitian_part_of_m2_is_four_real_dimensions() {
        let full = Subspace::full(2, 2).realify();
        let herm = full.solve(|x| vec![x - &x.adjoint()], &tol());
        assert_eq!(herm.dim(), 4);
        assert!(herm.contains(&CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, -1.0]), &tol()));
        assert!(!herm.contains(&e(0, 1), &tol()));
    }
}
