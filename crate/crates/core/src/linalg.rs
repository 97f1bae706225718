//! Dense complex linear-algebra helpers shared by the combiner designs and
//! the metric evaluators.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// One draw of CN(0, 1): real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    // Column-major fill so that the draw order is fixed regardless of shape
    // arithmetic elsewhere.
    let mut m = CMat::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_gaussian(rng);
        }
    }
    m
}

/// `W^H W`.
pub fn gram(w: &CMat) -> CMat {
    w.adjoint() * w
}

/// Largest entrywise deviation of `W^H W` from the identity.
pub fn semi_unitary_defect(w: &CMat) -> f64 {
    let g = gram(w);
    let mut worst = 0.0_f64;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Rotates `v` so that its largest-magnitude entry (first on ties) is real
/// and positive.
pub fn normalize_phase(v: &mut CVec) {
    let mut best = 0usize;
    let mut best_mag = -1.0_f64;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best] / best_mag;
        let rot = phase.conj();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Extends the orthonormal columns of `basis` to `target` orthonormal
/// columns using canonical basis vectors projected off the current span.
///
/// At each step the canonical vector with the largest residual is used
/// (lowest index on ties), which keeps the completion well conditioned and
/// deterministic.
pub fn orthonormal_completion(basis: &CMat, target: usize) -> Result<CMat> {
    let n = basis.nrows();
    let k = basis.ncols();
    if target > n {
        return Err(Error::Contract(format!(
            "cannot build {target} orthonormal columns in dimension {n}"
        )));
    }
    if target <= k {
        return Ok(basis.columns(0, target).into_owned());
    }
    let mut out = CMat::zeros(n, target);
    out.columns_mut(0, k).copy_from(basis);

    // residual[i] = squared norm of e_i after projecting off the span.
    let mut residual: Vec<f64> = (0..n)
        .map(|i| 1.0 - (0..k).map(|c| basis[(i, c)].norm_sqr()).sum::<f64>())
        .collect();

    for col in k..target {
        let mut pick = 0usize;
        for i in 1..n {
            if residual[i] > residual[pick] {
                pick = i;
            }
        }
        let mut v = CVec::zeros(n);
        v[pick] = Complex64::new(1.0, 0.0);
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for c in 0..col {
                let q = out.column(c);
                let coeff = q.dotc(&v);
                v.axpy(-coeff, &q, Complex64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm < 1e-8 {
            return Err(Error::Numeric(
                "orthonormal completion lost rank".to_string(),
            ));
        }
        v.unscale_mut(norm);
        for i in 0..n {
            residual[i] -= v[i].norm_sqr();
        }
        out.set_column(col, &v);
    }
    Ok(out)
}

/// Left singular structure of a (tall) channel matrix.
#[derive(Debug, Clone)]
pub struct LeftSingular {
    /// Orthonormal left singular vectors in descending singular-value order,
    /// phase-normalized, only for numerically nonzero singular values.
    pub vectors: CMat,
    /// Eigenvalues of `H H^H` (squared singular values), descending, one per
    /// min(rows, cols) singular value including numerical zeros.
    pub eigenvalues: Vec<f64>,
}

pub fn left_singular(h: &CMat) -> LeftSingular {
    let n = h.nrows();
    let svd = h.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));

    let smax = order.first().map(|&i| sigma[i]).unwrap_or(0.0);
    let tol = smax * (n.max(h.ncols()) as f64) * f64::EPSILON * 8.0;
    let keep: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| sigma[i] > tol && sigma[i] > 0.0)
        .collect();

    let mut vectors = CMat::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let mut v: CVec = u.column(i).into_owned();
        normalize_phase(&mut v);
        vectors.set_column(c, &v);
    }
    let eigenvalues = order.iter().map(|&i| sigma[i] * sigma[i]).collect();
    LeftSingular {
        vectors,
        eigenvalues,
    }
}

/// First `count` left singular vectors of `h`, completed with a
/// deterministic orthonormal basis when `count` exceeds the numerical rank.
pub fn leading_left_singular_vectors(h: &CMat, count: usize) -> Result<CMat> {
    let ls = left_singular(h);
    let avail = ls.vectors.ncols().min(count);
    let head = ls.vectors.columns(0, avail).into_owned();
    orthonormal_completion(&head, count)
}

/// `log2 det(M)` for a Hermitian positive-definite `M` through its Cholesky
/// factor.
pub fn hermitian_log2_det(m: &CMat) -> Result<f64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let chol = Cholesky::new(herm)
        .ok_or_else(|| Error::Numeric("matrix is not positive definite".to_string()))?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        // Complex square roots never fail, so indefiniteness shows up here.
        let d = l[(i, i)];
        if !(d.re > 0.0 && d.re.is_finite()) || d.im.abs() > 1e-12 * d.re {
            return Err(Error::Numeric(
                "matrix is not positive definite".to_string(),
            ));
        }
        acc += 2.0 * d.re.log2();
    }
    Ok(acc)
}

/// Haar-distributed `rows x cols` matrix with orthonormal columns.
pub fn random_semi_unitary<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    assert!(cols <= rows, "semi-unitary needs cols <= rows");
    let g = complex_gaussian_matrix(rows, cols, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..cols {
        let d = r[(c, c)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            for i in 0..rows {
                q[(i, c)] *= phase;
            }
        }
    }
    q
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
