use nalgebra::{DMatrix, SymmetricEigen};

use super::matrix::{CMatrix, C64};
use super::tolerance::TolerancePolicy;
use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V f(Λ) V*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let v = self.vectors.inner();
        let mut scaled = v.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        CMatrix::from_inner(scaled * v.adjoint())
    }

    /// Groups of indices whose eigenvalues differ by at most `gap`, in order.
    pub fn clusters(&self, gap: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, &l) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(c) if (self.values[*c.last().unwrap()] - l).abs() <= gap => c.push(i),
                _ => out.push(vec![i]),
            }
        }
        out
    }

    /// Projection onto the span of the eigenvectors with the given indices.
    pub fn projection(&self, indices: &[usize]) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for &i in indices {
            let v = self.vectors.block(0, i, n, 1);
            out += &(&v * &v.adjoint());
        }
        out
    }
}

/// Thin singular value decomposition `a = u diag(singular) v*`, values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub singular: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    /// Sum of `u_i v_i*` over the selected indices.
    pub fn partial_isometry(&self, keep: impl Fn(usize, f64) -> bool) -> CMatrix {
        let (p, q) = (self.u.rows(), self.v.rows());
        let mut out = DMatrix::<C64>::zeros(p, q);
        for (k, &s) in self.singular.iter().enumerate() {
            if keep(k, s) {
                let uk = self.u.inner().column(k);
                let vk = self.v.inner().column(k);
                out += uk * vk.adjoint();
            }
        }
        CMatrix::from_inner(out)
    }

    /// Number of singular values above `rank_tol · σ_max`.
    pub fn rank(&self, tol: &TolerancePolicy) -> usize {
        let smax = self.singular.first().copied().unwrap_or(0.0);
        self.singular
            .iter()
            .filter(|&&s| s > tol.rank_tol * smax && s > 0.0)
            .count()
    }
}

pub fn hermitian_eigen(a: &CMatrix, tol: &TolerancePolicy) -> Result<Eigen> {
    ensure_hermitian(a, tol)?;
    Ok(eigh_unchecked(&a.hermitian_part()))
}

fn ensure_hermitian(a: &CMatrix, tol: &TolerancePolicy) -> Result<()> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (a.rows(), a.rows()),
            found: a.shape(),
        });
    }
    let defect = a.hermitian_defect();
    let norm = a.frob_norm();
    if defect > tol.eq_tol * norm {
        return Err(Error::NotHermitian {
            residual: defect / norm.max(f64::MIN_POSITIVE),
        });
    }
    Ok(())
}

/// Eigendecomposition of a matrix already known to be Hermitian.
pub(crate) fn eigh_unchecked(a: &CMatrix) -> Eigen {
    let n = a.rows();
    if n == 0 {
        return Eigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(a.inner().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Eigen {
        values,
        vectors: CMatrix::from_inner(vectors),
    }
}

/// One-sided Jacobi: returns `(a v, v)` with the columns of `a v` mutually
/// orthogonal and `v` unitary.
pub(crate) fn jacobi_columns(mut a: DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let cols = a.ncols();
    let mut v = DMatrix::<C64>::identity(cols, cols);
    for _ in 0..80 {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dotc(&a.column(j));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, phase, c, s);
                rotate(&mut v, i, j, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    (a, v)
}

fn rotate(m: &mut DMatrix<C64>, i: usize, j: usize, phase: C64, c: f64, s: f64) {
    for k in 0..m.nrows() {
        let xi = m[(k, i)];
        let xj = m[(k, j)] * phase;
        m[(k, i)] = xi * c - xj * s;
        m[(k, j)] = xi * s + xj * c;
    }
}

/// Orthonormal columns extending `known` (a `n × r` matrix with orthonormal
/// columns) to `n × n`.
fn complete_basis(known: &DMatrix<C64>) -> DMatrix<C64> {
    let n = known.nrows();
    let mut cols: Vec<nalgebra::DVector<C64>> = known.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut x = nalgebra::DVector::<C64>::zeros(n);
        x[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&x);
                x -= c * proj;
            }
        }
        let norm = x.norm();
        if norm > 1e-6 {
            cols.push(x / C64::new(norm, 0.0));
        }
    }
    DMatrix::from_columns(&cols)
}

pub fn svd(a: &CMatrix) -> Svd {
    let (p, q) = a.shape();
    let k = p.min(q);
    if k == 0 {
        return Svd {
            u: CMatrix::zeros(p, 0),
            singular: vec![],
            v: CMatrix::zeros(q, 0),
        };
    }
    if p < q {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            singular: t.singular,
            v: t.u,
        };
    }
    let (av, v) = jacobi_columns(a.inner().clone());
    let norms: Vec<f64> = av.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let smax = norms[order[0]];
    let singular: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let cutoff = smax * f64::EPSILON * (p.max(q) as f64);
    let live = singular.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    let mut u = DMatrix::<C64>::zeros(p, live);
    for (col, &i) in order.iter().take(live).enumerate() {
        u.set_column(col, &(av.column(i) / C64::new(norms[i], 0.0)));
    }
    let u = complete_basis(&u).columns(0, k).into_owned();
    let v = DMatrix::from_fn(q, k, |r, c| v[(r, order[c])]);
    Svd {
        u: CMatrix::from_inner(u),
        singular,
        v: CMatrix::from_inner(v),
    }
}

/// Polar decomposition `x = r · abs`.
#[derive(Clone, Debug)]
pub struct Polar {
    /// Partial isometry with `r*r` the support projection of `abs`.
    pub r: CMatrix,
    /// `|x| = (x*x)^{1/2}` with sub-threshold singular values zeroed.
    pub abs: CMatrix,
}

pub fn polar_decompose(x: &CMatrix, tol: &TolerancePolicy) -> Polar {
    let dec = svd(x);
    let rank = dec.rank(tol);
    let r = dec.partial_isometry(|k, _| k < rank);
    let q = x.cols();
    let mut abs = DMatrix::<C64>::zeros(q, q);
    for k in 0..rank {
        let vk = dec.v.inner().column(k);
        abs += (vk * vk.adjoint()) * C64::new(dec.singular[k], 0.0);
    }
    Polar {
        r,
        abs: CMatrix::from_inner(abs),
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMatrix, tol: &TolerancePolicy) -> Result<f64> {
    let eig = hermitian_eigen(a, tol)?;
    Ok(eig.values.last().copied().unwrap_or(0.0))
}

/// `λ_min(a) ≥ −psd_tol · max(1, ‖a‖₂)`.
pub fn is_psd(a: &CMatrix, tol: &TolerancePolicy) -> Result<bool> {
    let eig = hermitian_eigen(a, tol)?;
    Ok(psd_verdict(&eig, tol))
}

fn psd_verdict(eig: &Eigen, tol: &TolerancePolicy) -> bool {
    let norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.values.last().copied().unwrap_or(0.0);
    min >= -tol.psd_tol * norm.max(1.0)
}

/// Like [`is_psd`] but answers `false` for non-Hermitian input instead of failing.
pub fn is_psd_lenient(a: &CMatrix, tol: &TolerancePolicy) -> bool {
    match hermitian_eigen(a, tol) {
        Ok(eig) => psd_verdict(&eig, tol),
        Err(_) => false,
    }
}

pub fn psd_sqrt(a: &CMatrix, tol: &TolerancePolicy) -> Result<CMatrix> {
    let eig = hermitian_eigen(a, tol)?;
    if !psd_verdict(&eig, tol) {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.values.last().copied().unwrap_or(0.0),
        });
    }
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}

/// Positive part of a Hermitian matrix (nearest PSD matrix in Frobenius norm).
pub fn psd_part(h: &CMatrix) -> CMatrix {
    eigh_unchecked(&h.hermitian_part()).apply(|l| l.max(0.0))
}

/// Orthogonal projection onto the column range of `a`.
pub fn range_projection(a: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let dec = svd(a);
    let rank = dec.rank(tol);
    let p = a.rows();
    let mut out = DMatrix::<C64>::zeros(p, p);
    for k in 0..rank {
        let uk = dec.u.inner().column(k);
        out += uk * uk.adjoint();
    }
    CMatrix::from_inner(out)
}

/// `‖a − b‖_F ≤ eq_tol · max(1, ‖a‖_F, ‖b‖_F)`.
pub fn approx_eq(a: &CMatrix, b: &CMatrix, tol: &TolerancePolicy) -> Result<bool> {
    a.ensure_same_shape(b)?;
    Ok(close(a, b, tol))
}

/// Shape-unchecked [`approx_eq`] for internal use.
pub(crate) fn close(a: &CMatrix, b: &CMatrix, tol: &TolerancePolicy) -> bool {
    let scale = a.frob_norm().max(b.frob_norm());
    tol.is_small((a - b).frob_norm(), scale)
}

/// Relative Frobenius residual `‖a − b‖ / max(1, ‖a‖, ‖b‖)`.
pub fn rel_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = a.frob_norm().max(b.frob_norm()).max(1.0);
    (a - b).frob_norm() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // Deterministic pseudo-random Hermitian matrix that does not go through the crate RNG.
    fn lcg_hermitian(n: usize, mut state: u64) -> CMatrix {
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        g.hermitian_part()
    }

    #[test]
    fn eigen_of_diagonal() {
        let e = hermitian_eigen(&CMatrix::diag_real(&[1.0, 2.0]), &tol()).unwrap();
        assert_eq!(e.values, vec![2.0, 1.0]);
        // Columns are unit vectors up to phase: e₂ then e₁.
        assert!((e.vectors.get(1, 0).norm() - 1.0).abs() < 1e-14);
        assert!((e.vectors.get(0, 1).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_of_swap() {
        let a = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = hermitian_eigen(&a, &tol()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        let v0 = e.vectors.block(0, 0, 2, 1);
        let v1 = e.vectors.block(0, 1, 2, 1);
        let plus = CMatrix::from_real(2, 1, &[s, s]);
        let minus = CMatrix::from_real(2, 1, &[s, -s]);
        assert!((plus.inner_product(&v0).norm() - 1.0).abs() < 1e-12);
        assert!((minus.inner_product(&v1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        for n in [5, 9, 16] {
            let a = lcg_hermitian(n, 17 + n as u64);
            let e = hermitian_eigen(&a, &tol()).unwrap();
            let rebuilt = e.apply(|l| l);
            assert!(rel_residual(&rebuilt, &a) <= 10.0 * tol().eq_tol);
            let vv = e.vectors.adjoint() * &e.vectors;
            assert!(rel_residual(&vv, &CMatrix::identity(n)) <= 10.0 * tol().eq_tol);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let a = CMatrix::unit(2, 2, 0, 1);
        assert!(matches!(hermitian_eigen(&a, &tol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn svd_reconstructs_deficient_wide_and_tall() {
        let g = |rows: usize, cols: usize, state: u64| {
            let h = lcg_hermitian(rows.max(cols), state);
            h.block(0, 0, rows, cols)
        };
        let cases = [
            g(4, 3, 3),
            g(3, 5, 7),
            &g(5, 2, 11) * &g(2, 5, 13),
            CMatrix::block_diag(&[g(3, 1, 17), g(1, 2, 19)]),
        ];
        for a in &cases {
            let d = svd(a);
            let sigma = CMatrix::diag_real(&d.singular);
            let rebuilt = &(&d.u * &sigma) * &d.v.adjoint();
            assert!((&rebuilt - a).frob_norm() < 1e-12 * a.frob_norm().max(1.0));
            let k = d.singular.len();
            assert!((&(&d.u.adjoint() * &d.u) - &CMatrix::identity(k)).frob_norm() < 1e-12);
            assert!((&(&d.v.adjoint() * &d.v) - &CMatrix::identity(k)).frob_norm() < 1e-12);
            assert!(d.singular.windows(2).all(|w| w[0] >= w[1]));
        }
        assert_eq!(svd(&cases[2]).rank(&tol()), 2);
    }

    #[test]
    fn polar_of_matrix_unit() {
        let e12 = CMatrix::unit(2, 2, 0, 1);
        let p = polar_decompose(&e12, &tol());
        assert!(close(&p.r, &e12, &tol()));
        assert!(close(&p.abs, &CMatrix::unit(2, 2, 1, 1), &tol()));
    }

    #[test]
    fn polar_of_positive_diagonal_and_zero() {
        let p = polar_decompose(&CMatrix::diag_real(&[3.0, 0.0]), &tol());
        assert!(close(&p.r, &CMatrix::diag_real(&[1.0, 0.0]), &tol()));
        assert!(close(&p.abs, &CMatrix::diag_real(&[3.0, 0.0]), &tol()));
        let z = polar_decompose(&CMatrix::zeros(2, 3), &tol());
        assert_eq!(z.r.frob_norm(), 0.0);
        assert_eq!(z.abs.frob_norm(), 0.0);
        assert_eq!(z.abs.shape(), (3, 3));
    }

    #[test]
    fn polar_factor_is_partial_isometry_of_exact_rank() {
        // rank-2 3x4 matrix
        let a = CMatrix::from_fn(3, 1, |i, _| c(1.0 + i as f64, 0.5));
        let b = CMatrix::from_fn(1, 4, |_, j| c(j as f64 - 1.0, 1.0));
        let a2 = CMatrix::from_fn(3, 1, |i, _| c(0.0, i as f64 - 1.0));
        let b2 = CMatrix::from_fn(1, 4, |_, j| c(1.0, -(j as f64)));
        let x = &a * &b + &a2 * &b2;
        let p = polar_decompose(&x, &tol());
        assert!(rel_residual(&(&p.r * &p.abs), &x) <= tol().eq_tol);
        let rrr = &p.r * &p.r.adjoint() * &p.r;
        assert!(rel_residual(&rrr, &p.r) <= 10.0 * tol().eq_tol);
        assert_eq!(svd(&p.r).rank(&tol()), 2);
        let support = range_projection(&p.abs, &tol());
        assert!(rel_residual(&(p.r.adjoint() * &p.r), &support) <= tol().eq_tol);
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&CMatrix::diag_real(&[1.0, 0.0]), &tol()).unwrap());
        assert!(!is_psd(&CMatrix::diag_real(&[1.0, -1e-3]), &tol()).unwrap());
        assert!(is_psd(&CMatrix::unit(2, 2, 0, 1), &tol()).is_err());
    }

    #[test]
    fn sqrt_examples() {
        let r = psd_sqrt(&CMatrix::diag_real(&[4.0, 9.0]), &tol()).unwrap();
        assert!(close(&r, &CMatrix::diag_real(&[2.0, 3.0]), &tol()));
        let s = 0.5;
        let proj = CMatrix::from_real(2, 2, &[s, s, s, s]);
        assert!(close(&psd_sqrt(&proj, &tol()).unwrap(), &proj, &tol()));
        let g = lcg_hermitian(6, 5) + CMatrix::from_fn(6, 6, |i, j| c((i * j) as f64 * 0.1, 0.0));
        let bb = g.adjoint() * &g;
        let root = psd_sqrt(&bb, &tol()).unwrap();
        assert!(rel_residual(&(&root * &root), &bb) <= 10.0 * tol().eq_tol);
        assert!(matches!(
            psd_sqrt(&CMatrix::diag_real(&[1.0, -1.0]), &tol()),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn range_projection_examples() {
        assert!(close(
            &range_projection(&CMatrix::diag_real(&[5.0, 0.0]), &tol()),
            &CMatrix::diag_real(&[1.0, 0.0]),
            &tol()
        ));
        assert!(close(
            &range_projection(&CMatrix::unit(2, 2, 0, 1), &tol()),
            &CMatrix::unit(2, 2, 0, 0),
            &tol()
        ));
        assert_eq!(range_projection(&CMatrix::zeros(2, 2), &tol()).frob_norm(), 0.0);
    }

    #[test]
    fn approx_eq_examples() {
        let a = CMatrix::identity(2);
        assert!(approx_eq(&a, &a, &tol()).unwrap());
        let b = &a + &CMatrix::unit(2, 2, 0, 0).scale(1e-12);
        assert!(approx_eq(&a, &b, &tol()).unwrap());
        assert!(!approx_eq(&CMatrix::unit(2, 2, 0, 0), &CMatrix::unit(2, 2, 1, 1), &tol()).unwrap());
        assert!(matches!(
            approx_eq(&a, &CMatrix::zeros(2, 3), &tol()),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
