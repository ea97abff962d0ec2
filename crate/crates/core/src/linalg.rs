//! Dense complex linear algebra: the substrate every other module builds on.
//!
//! Index convention: in all tensor products the leftmost factor is the most
//! significant index, i.e. the composite index of `(i_a, i_b)` is
//! `i_a * dim_b + i_b`. Every module inherits this single flattening rule.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::tol::{Tol, MAX_EMBEDDED_DIM};

pub type C64 = Complex<f64>;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged row lengths".into()));
        }
        Ok(ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vec(values: &[C64]) -> Self {
        ComplexMatrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance to another matrix.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let lhs_row = i * rhs.cols;
                let rhs_row = k * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[lhs_row + j] += a * rhs.data[rhs_row + j];
                }
            }
        }
        out
    }

    /// A B A^dag.
    pub fn conjugate_by(&self, a: &Self) -> Self {
        a.matmul(self).matmul(&a.dagger())
    }

    /// Hermitian part (H + H^dag)/2.
    pub fn hermitize(&self) -> Self {
        let d = self.dagger();
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + d[(i, j)]) * 0.5
        })
    }

    /// Frobenius norm of the anti-Hermitian part.
    pub fn herm_defect(&self) -> f64 {
        self.dist(&self.dagger()) / 2.0_f64.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.herm_defect() <= tol * self.frob_norm().max(1.0)
    }

    /// Exchange the two tensor factors of an operator on H_a (x) H_b.
    pub fn swap_factors(&self, dim_a: usize, dim_b: usize) -> Self {
        let n = dim_a * dim_b;
        assert_eq!(self.rows, n);
        assert_eq!(self.cols, n);
        Self::from_fn(n, n, |r, c| {
            let (ra, rb) = (r / dim_a, r % dim_a);
            let (ca, cb) = (c / dim_a, c % dim_a);
            self[(rb * dim_b + ra, cb * dim_b + ca)]
        })
    }

    /// Partial transpose over the trailing factor of an operator on
    /// H_a (x) H_b.
    pub fn partial_transpose_b(&self, dim_a: usize, dim_b: usize) -> Self {
        let n = dim_a * dim_b;
        assert_eq!(self.rows, n);
        assert_eq!(self.cols, n);
        Self::from_fn(n, n, |r, c| {
            let (ra, rb) = (r / dim_b, r % dim_b);
            let (ca, cb) = (c / dim_b, c % dim_b);
            self[(ra * dim_b + cb, ca * dim_b + rb)]
        })
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product with the composite index `(i_a, i_b) -> i_a * rows_b + i_b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a
        .rows()
        .checked_mul(b.rows())
        .filter(|r| *r <= MAX_EMBEDDED_DIM * MAX_EMBEDDED_DIM)
        .ok_or_else(|| Error::Capacity("kron dimension overflow".into()))?;
    let cols = a.cols() * b.cols();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let v = a[(ia, ja)];
            if v == ZERO {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = v * b[(ib, jb)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of several factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut it = factors.iter();
    let first = it.next().expect("kron_all of empty list");
    let mut acc = (*first).clone();
    for f in it {
        acc = kron(&acc, f)?;
    }
    Ok(acc)
}

/// Partial trace of an operator on a tensor product with factor dimensions
/// `dims`, keeping the factors listed in `keep` (in their induced order).
/// The trace is preserved: `Tr[result] = Tr[op]`.
pub fn partial_trace(op: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !op.is_square() || op.rows() != total {
        return Err(Error::Dimension(format!(
            "partial_trace: operator is {}x{}, dims product is {}",
            op.rows(),
            op.cols(),
            total
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension("partial_trace: keep index out of range".into()));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let trace_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Strides of each factor in the flattened index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let unflatten = |flat: usize, factors: &[usize]| -> usize {
        // Map a flat index over `factors` (most significant first) to the
        // corresponding full-space offset.
        let mut rem = flat;
        let mut offset = 0usize;
        for (pos, &f) in factors.iter().enumerate() {
            let size: usize = factors[pos + 1..].iter().map(|&g| dims[g]).product();
            let idx = rem / size;
            rem %= size;
            offset += idx * strides[f];
        }
        offset
    };

    let mut out = ComplexMatrix::zeros(keep_dim, keep_dim);
    for r in 0..keep_dim {
        let r_off = unflatten(r, &keep);
        for c in 0..keep_dim {
            let c_off = unflatten(c, &keep);
            let mut acc = ZERO;
            for t in 0..trace_dim {
                let t_off = unflatten(t, &traced);
                acc += op[(r_off + t_off, c_off + t_off)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Vectorization |C>> = sum_ij C_ij |i> (x) |j>.
pub fn double_ket(c: &ComplexMatrix) -> ComplexMatrix {
    let mut data = Vec::with_capacity(c.rows() * c.cols());
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            data.push(c[(i, j)]);
        }
    }
    ComplexMatrix {
        rows: data.len(),
        cols: 1,
        data,
    }
}

/// Inverse of [`double_ket`]: reshape a vector back into a `rows x cols` matrix.
pub fn unket(v: &ComplexMatrix, rows: usize, cols: usize) -> ComplexMatrix {
    assert_eq!(v.cols(), 1);
    assert_eq!(v.rows(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| v[(i * cols + j, 0)])
}

/// The unnormalized maximally entangled vector |I>> on C^d (x) C^d.
pub fn max_entangled(d: usize) -> ComplexMatrix {
    double_ket(&ComplexMatrix::identity(d))
}

/// Outer product |v><w|.
pub fn outer(v: &ComplexMatrix, w: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(v.cols(), 1);
    assert_eq!(w.cols(), 1);
    ComplexMatrix::from_fn(v.rows(), w.rows(), |i, j| v[(i, 0)] * w[(j, 0)].conj())
}

/// Hermitian eigendecomposition, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Columns are the orthonormal eigenvectors, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().unwrap_or(&0.0)
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.first().unwrap_or(&0.0)
    }

    /// Reassemble V f(diag) V^dag for a scalar function of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(*lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = v[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vi * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized as (H + H^dag)/2 if it is Hermitian within the
/// configured tolerance, which defends against round-off accumulated in long
/// tensor contractions; a genuinely non-Hermitian input is rejected.
pub fn hermitian_eig(op: &ComplexMatrix) -> Result<HermitianEig> {
    hermitian_eig_tol(op, Tol::default())
}

pub fn hermitian_eig_tol(op: &ComplexMatrix, tol: Tol) -> Result<HermitianEig> {
    if !op.is_square() {
        return Err(Error::Dimension("hermitian_eig: non-square input".into()));
    }
    if !op.is_finite() {
        return Err(Error::Contract("hermitian_eig: non-finite entries".into()));
    }
    if !op.is_hermitian(tol.herm) {
        return Err(Error::Contract(format!(
            "hermitian_eig: input not Hermitian (defect {:.3e})",
            op.herm_defect()
        )));
    }
    let n = op.rows();
    let mut a = op.hermitize();
    let mut v = ComplexMatrix::identity(n);
    if n <= 1 {
        return Ok(HermitianEig {
            eigenvalues: (0..n).map(|i| a[(i, i)].re).collect(),
            eigenvectors: v,
        });
    }

    let norm = a.frob_norm().max(1e-300);
    let target = 1e-14 * norm;
    let max_sweeps = 60;
    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= target {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(Error::Numeric(format!(
                "jacobi eigensolver did not converge in {max_sweeps} sweeps \
                 (off-diagonal {:.3e}, target {:.3e})",
                (2.0 * off).sqrt(),
                target
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let beta = apq.norm();
                if beta <= 1e-300 {
                    continue;
                }
                let phase = apq / beta;
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                let mut two_theta = (2.0 * beta).atan2(alpha - gamma);
                // Keep |theta| <= pi/4 (same zeroing condition, guaranteed
                // cyclic convergence).
                if two_theta > std::f64::consts::FRAC_PI_2 {
                    two_theta -= std::f64::consts::PI;
                } else if two_theta < -std::f64::consts::FRAC_PI_2 {
                    two_theta += std::f64::consts::PI;
                }
                let (s, c) = (0.5 * two_theta).sin_cos();
                // Rotation columns: col p = (c, s e^{-i phi}), col q = (-s e^{i phi}, c).
                let sp = phase.conj() * s; // R[q][p]
                let sq = -phase * s; // R[p][q]

                // A <- R^dag A R : update columns p, q then rows p, q.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * sp;
                    a[(i, q)] = aip * sq + aiq * c;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c + aqj * sp.conj();
                    a[(q, j)] = apj * sq.conj() + aqj * c;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * sp;
                    v[(i, q)] = vip * sq + viq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// PSD check: true iff the minimum eigenvalue is >= -tol; the minimum
/// eigenvalue is returned as evidence either way.
pub fn psd_check(op: &ComplexMatrix, tol: f64) -> Result<(bool, f64)> {
    let eig = hermitian_eig(op)?;
    let min = eig.min();
    Ok((min >= -tol, min))
}

/// Principal square root of a PSD operator.
pub fn sqrt_psd(op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let tol = Tol::default();
    let eig = hermitian_eig(op)?;
    let floor = -tol.psd * op.frob_norm().max(1.0);
    if eig.min() < floor {
        return Err(Error::Contract(format!(
            "sqrt_psd: negative eigenvalue {:.3e}",
            eig.min()
        )));
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// Inverse square root on the support: eigenvalues above `rank_tol` are
/// inverted under the square root, the rest are zeroed.
pub fn pinv_sqrt_psd(op: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    let tol = Tol::default();
    let eig = hermitian_eig(op)?;
    let floor = -tol.psd * op.frob_norm().max(1.0);
    if eig.min() < floor {
        return Err(Error::Contract(format!(
            "pinv_sqrt_psd: negative eigenvalue {:.3e}",
            eig.min()
        )));
    }
    Ok(eig.map(|l| if l > rank_tol { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Matrix with independent uniform entries in the centered unit square.
pub fn random_matrix(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

/// Full-rank random density matrix (normalized Wishart-type).
pub fn random_density(rng: &mut impl rand::Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    let w = g.matmul(&g.dagger());
    w.scale_re(1.0 / w.trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut impl rand::Rng, n: usize) -> ComplexMatrix {
        let g = random_matrix(rng, n, n);
        g.hermitize()
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = kron(&i2, &i2).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));

        let a = ComplexMatrix::diag_real(&[1.0, 2.0]);
        let b = ComplexMatrix::diag_real(&[3.0, 4.0]);
        let ab = kron(&a, &b).unwrap();
        assert!(ab.dist(&ComplexMatrix::diag_real(&[3.0, 4.0, 6.0, 8.0])) < 1e-15);
    }

    #[test]
    fn kron_matches_four_index_definition() {
        // Brute-force oracle: (A (x) B)_{(i,k),(j,l)} = A_ij B_kl.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 2, 2);
        let k = kron(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        let expect = a[(i, j)] * b[(p, q)];
                        assert!((k[(i * 2 + p, j * 2 + q)] - expect).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(&mut rng, 3);
        let sigma = random_density(&mut rng, 3).scale_re(0.7);
        let joint = kron(&rho, &sigma).unwrap();
        let reduced = partial_trace(&joint, &[3, 3], &[0]).unwrap();
        assert!(reduced.dist(&rho.scale(sigma.trace())) < 1e-12);
        // Tracing the other factor instead.
        let reduced2 = partial_trace(&joint, &[3, 3], &[1]).unwrap();
        assert!(reduced2.dist(&sigma.scale(rho.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_of_max_entangled() {
        for d in 2..=4 {
            let v = max_entangled(d);
            let proj = outer(&v, &v);
            let reduced = partial_trace(&proj, &[d, d], &[0]).unwrap();
            assert!(reduced.dist(&ComplexMatrix::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_three_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density(&mut rng, 2);
        let b = random_density(&mut rng, 3);
        let c = random_density(&mut rng, 2);
        let joint = kron_all(&[&a, &b, &c]).unwrap();
        let kept = partial_trace(&joint, &[2, 3, 2], &[0, 2]).unwrap();
        assert!(kept.dist(&kron(&a, &c).unwrap()) < 1e-12);
        // Full trace equals tracing all factors.
        let all = partial_trace(&joint, &[2, 3, 2], &[]).unwrap();
        assert!((all[(0, 0)] - joint.trace()).norm() < 1e-12);
    }

    #[test]
    fn eig_diagonal() {
        let eig = hermitian_eig(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn eig_max_entangled_projector() {
        let v = max_entangled(2);
        let proj = outer(&v, &v);
        let eig = hermitian_eig(&proj).unwrap();
        assert!((eig.eigenvalues[0] - 2.0).abs() < 1e-12);
        for l in &eig.eigenvalues[1..] {
            assert!(l.abs() < 1e-12);
        }
    }

    #[test]
    fn eig_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [2usize, 5, 9] {
            let h = random_hermitian(&mut rng, n);
            let eig = hermitian_eig(&h).unwrap();
            let recon = eig.map(|l| l);
            assert!(recon.dist(&h) < 1e-9 * h.frob_norm().max(1.0));
            let v = &eig.eigenvectors;
            assert!(v.dagger().matmul(v).dist(&ComplexMatrix::identity(n)) < 1e-9);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[
            vec![ONE, C64::new(1.0, 0.0)],
            vec![ZERO, ONE],
        ])
        .unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn double_ket_identity() {
        let v = double_ket(&ComplexMatrix::identity(2));
        let expect = ComplexMatrix::col_vec(&[ONE, ZERO, ZERO, ONE]);
        assert_eq!(v, expect);
    }

    #[test]
    fn double_ket_inner_product_is_hs_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_matrix(&mut rng, 3, 3);
        let d = random_matrix(&mut rng, 3, 3);
        let lhs = double_ket(&c).dagger().matmul(&double_ket(&d))[(0, 0)];
        let rhs = c.dagger().matmul(&d).trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn psd_check_examples() {
        let (ok, min) = psd_check(&ComplexMatrix::identity(3), 1e-9).unwrap();
        assert!(ok);
        assert!((min - 1.0).abs() < 1e-12);

        let (ok, min) = psd_check(&ComplexMatrix::diag_real(&[1.0, -1e-6]), 1e-9).unwrap();
        assert!(!ok);
        assert!((min + 1e-6).abs() < 1e-12);
    }

    #[test]
    fn identity_channel_bound_saturates_at_inverse_d_squared() {
        // rho0 (x) I - p |I>><<I| at p = 1/d^2, rho0 = I/d has min eigenvalue 0:
        // analytic oracle: eigenvalues are 1/d - p d (once per Bell direction)
        // and 1/d elsewhere.
        for d in 2..=3 {
            let df = d as f64;
            let v = max_entangled(d);
            let lhs = &ComplexMatrix::identity(d * d).scale_re(1.0 / df)
                - &outer(&v, &v).scale_re(1.0 / (df * df));
            let (ok, min) = psd_check(&lhs, 1e-12).unwrap();
            assert!(ok);
            assert!(min.abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_and_pinv_sqrt() {
        let s = sqrt_psd(&ComplexMatrix::diag_real(&[4.0, 9.0])).unwrap();
        assert!(s.dist(&ComplexMatrix::diag_real(&[2.0, 3.0])) < 1e-12);

        let p = pinv_sqrt_psd(&ComplexMatrix::diag_real(&[4.0, 0.0]), 1e-10).unwrap();
        assert!(p.dist(&ComplexMatrix::diag_real(&[0.5, 0.0])) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_density(&mut rng, 4);
        let root = sqrt_psd(&rho).unwrap();
        assert!(root.matmul(&root).dist(&rho) < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_kron_associativity(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 2, 3);
            let b = random_matrix(&mut rng, 2, 2);
            let c = random_matrix(&mut rng, 3, 2);
            let lhs = kron(&kron(&a, &b).unwrap(), &c).unwrap();
            let rhs = kron(&a, &kron(&b, &c).unwrap()).unwrap();
            prop_assert!(lhs.dist(&rhs) < 1e-12);
        }

        #[test]
        fn prop_double_ket_algebra(seed in 0u64..1000) {
            // (A (x) B)|C>> = |A C B^T>>.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 2, 2);
            let b = random_matrix(&mut rng, 3, 3);
            let c = random_matrix(&mut rng, 2, 3);
            let lhs = kron(&a, &b).unwrap().matmul(&double_ket(&c));
            let rhs = double_ket(&a.matmul(&c).matmul(&b.transpose()));
            prop_assert!(lhs.dist(&rhs) < 1e-12);
        }

        #[test]
        fn prop_double_ket_norm(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_matrix(&mut rng, 3, 2);
            let v = double_ket(&c);
            let norm2 = v.dagger().matmul(&v)[(0, 0)].re;
            prop_assert!((norm2 - c.frob_norm().powi(2)).abs() < 1e-12);
            // Bijection: unket inverts double_ket.
            prop_assert!(unket(&v, 3, 2).dist(&c) < 1e-15);
        }

        #[test]
        fn prop_partial_trace_linear_and_trace_preserving(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 12, 12);
            let b = random_matrix(&mut rng, 12, 12);
            let s = C64::new(rng.gen::<f64>(), rng.gen::<f64>());
            let dims = [2usize, 3, 2];
            let lin_lhs = partial_trace(&(&a + &b.scale(s)), &dims, &[1]).unwrap();
            let lin_rhs = &partial_trace(&a, &dims, &[1]).unwrap()
                + &partial_trace(&b, &dims, &[1]).unwrap().scale(s);
            prop_assert!(lin_lhs.dist(&lin_rhs) < 1e-12);
            prop_assert!((lin_lhs.trace() - (a.trace() + s * b.trace())).norm() < 1e-12);
        }
    }
}
