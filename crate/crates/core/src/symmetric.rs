//! Symmetric-subspace machinery: permutation operators, projectors P_+^(k),
//! their dimensions d_+^(k) = binomial(d+k-1, k), and orthonormal symmetric
//! bases built from occupation-number vectors.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE};
use crate::tol::MAX_EMBEDDED_DIM;

/// A bijection on {0..n-1}, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || seen[i] {
                return Err(Error::Contract("not a permutation".into()));
            }
            seen[i] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// Where position `i` is sent.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { image: inv }
    }

    /// Composition (self after other): (self ∘ other)(i) = self(other(i)).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Permutation {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    /// All n! permutations of n elements, in a deterministic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        heap_permutations(&mut current, n, &mut out);
        out
    }

    /// Sample a uniformly random permutation (Fisher-Yates).
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            image.swap(i, j);
        }
        Permutation { image }
    }
}

fn heap_permutations(a: &mut Vec<usize>, k: usize, out: &mut Vec<Permutation>) {
    if k <= 1 {
        out.push(Permutation { image: a.clone() });
        return;
    }
    for i in 0..k {
        heap_permutations(a, k - 1, out);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

/// d_+^(k) = binomial(d+k-1, k), computed exactly in integer arithmetic.
pub fn sym_dim(d: usize, k: usize) -> Result<u64> {
    binomial(d as u64 + k as u64 - if k > 0 { 1 } else { 0 }, k as u64)
}

fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Capacity("binomial overflow".into()))?;
        acc /= (i + 1) as u128;
    }
    u64::try_from(acc).map_err(|_| Error::Capacity("binomial exceeds u64".into()))
}

pub(crate) fn multinomial(k: usize, occ: &[usize]) -> u64 {
    // k! / prod occ_i!  via iterated binomials; desk-scale, no overflow risk.
    let mut rem = k as u64;
    let mut acc = 1u64;
    for &o in occ {
        acc *= binomial(rem, o as u64).expect("multinomial overflow");
        rem -= o as u64;
    }
    acc
}

/// The d^N x d^N unitary permuting tensor factors: basis ket |i_1 ... i_N> is
/// sent to |i_{pi^-1(1)} ... i_{pi^-1(N)}>, i.e. the value at slot k moves to
/// slot pi(k).
pub fn permutation_operator(d: usize, perm: &Permutation) -> ComplexMatrix {
    let n = perm.len();
    let dim = d.pow(n as u32);
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; n];
    for col in 0..dim {
        let mut rem = col;
        for slot in (0..n).rev() {
            digits[slot] = rem % d;
            rem /= d;
        }
        let mut row = 0usize;
        let mut permuted = vec![0usize; n];
        for (k, &digit) in digits.iter().enumerate() {
            permuted[perm.apply(k)] = digit;
        }
        for &digit in &permuted {
            row = row * d + digit;
        }
        out[(row, col)] = ONE;
    }
    out
}

/// Symmetric subspace of k copies of C^d.
#[derive(Debug)]
pub struct SymmetricSpace {
    pub d: usize,
    pub k: usize,
    /// d_+^(k).
    pub dim: usize,
    /// d^k x d_+^(k) matrix whose columns are an orthonormal basis of the
    /// symmetric subspace (occupation tuples in lexicographically decreasing
    /// order). Satisfies basis^dag basis = I and basis basis^dag = projector.
    pub basis: ComplexMatrix,
    /// Occupation tuple of each basis column.
    pub occupations: Vec<Vec<usize>>,
    /// Lazily materialized projector (d^k x d^k can be large; most callers
    /// only need the basis).
    projector_cell: OnceLock<ComplexMatrix>,
}

impl SymmetricSpace {
    pub fn embedded_dim(&self) -> usize {
        self.d.pow(self.k as u32)
    }

    /// Projector on the symmetric subspace of (C^d)^(x k), size d^k,
    /// materialized on first use as basis basis^dag.
    pub fn projector(&self) -> &ComplexMatrix {
        self.projector_cell
            .get_or_init(|| self.basis.matmul(&self.basis.dagger()))
    }

    /// Compress an embedded operator: basis^dag . op . basis.
    pub fn compress(&self, op: &ComplexMatrix) -> ComplexMatrix {
        self.basis.dagger().matmul(op).matmul(&self.basis)
    }

    /// Embed a compressed operator back into the full tensor space.
    pub fn embed(&self, op: &ComplexMatrix) -> ComplexMatrix {
        self.basis.matmul(op).matmul(&self.basis.dagger())
    }

    /// Compress an embedded column vector.
    pub fn compress_vec(&self, v: &ComplexMatrix) -> ComplexMatrix {
        self.basis.dagger().matmul(v)
    }

    /// The symmetric-irrep image of a one-particle unitary: basis^dag U^(x k) basis.
    ///
    /// U^(x k) is never materialized; it is applied to the basis columns one
    /// tensor slot at a time (O(k d^(k+1)) per column instead of O(d^2k)).
    pub fn irrep(&self, u: &ComplexMatrix) -> ComplexMatrix {
        let mut w = self.basis.clone();
        for slot in 0..self.k {
            apply_one_slot(&mut w, u, self.d, self.k, slot);
        }
        self.basis.dagger().matmul(&w)
    }
}

/// In-place application of `u` on tensor slot `slot` (0 = most significant)
/// of every column of `w`, whose rows index the embedded space of k slots of
/// dimension d each.
fn apply_one_slot(w: &mut ComplexMatrix, u: &ComplexMatrix, d: usize, k: usize, slot: usize) {
    let n = w.rows();
    let cols = w.cols();
    let stride = d.pow((k - 1 - slot) as u32);
    let block = stride * d;
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for c in 0..cols {
        let mut outer = 0;
        while outer < n {
            for r in 0..stride {
                let base = outer + r;
                for (j, slot_val) in buf.iter_mut().enumerate() {
                    *slot_val = w[(base + j * stride, c)];
                }
                for i in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, slot_val) in buf.iter().enumerate() {
                        acc += u[(i, j)] * slot_val;
                    }
                    w[(base + i * stride, c)] = acc;
                }
            }
            outer += block;
        }
    }
}

/// Build the symmetric space for (d, k): orthonormal basis from normalized
/// occupation-number symmetrized kets (O(d^k) work, no permutation sum).
pub fn symmetric_projector(d: usize, k: usize) -> Result<SymmetricSpace> {
    let dim_embedded = d
        .checked_pow(k as u32)
        .filter(|&n| n <= MAX_EMBEDDED_DIM)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "d^k = {d}^{k} exceeds the embedded-space limit {MAX_EMBEDDED_DIM}; \
                 use a smaller number of copies or dimension"
            ))
        })?;
    let dim_plus = sym_dim(d, k)? as usize;

    // Basis: one column per occupation tuple, lexicographically decreasing.
    let occupations = occupation_tuples(d, k);
    debug_assert_eq!(occupations.len(), dim_plus);
    let mut basis = ComplexMatrix::zeros(dim_embedded, dim_plus);
    let mut occ_index: HashMap<Vec<usize>, usize> = HashMap::new();
    for (col, occ) in occupations.iter().enumerate() {
        occ_index.insert(occ.clone(), col);
    }
    for ket in 0..dim_embedded {
        let mut occ = vec![0usize; d];
        let mut rem = ket;
        for _ in 0..k {
            occ[rem % d] += 1;
            rem /= d;
        }
        let col = occ_index[&occ];
        let mult = multinomial(k, &occ) as f64;
        basis[(ket, col)] = C64::new(1.0 / mult.sqrt(), 0.0);
    }

    Ok(SymmetricSpace {
        d,
        k,
        dim: dim_plus,
        basis,
        occupations,
        projector_cell: OnceLock::new(),
    })
}

/// Reference projector built by the explicit (1/k!) permutation sum over
/// S_k — exponential in k, used as a small-case oracle for the basis route.
pub fn permutation_sum_projector(d: usize, k: usize) -> ComplexMatrix {
    let dim_embedded = d.pow(k as u32);
    let mut projector = ComplexMatrix::zeros(dim_embedded, dim_embedded);
    let perms = Permutation::all(k.max(1));
    let weight = 1.0 / perms.len() as f64;
    let mut digits = vec![0usize; k];
    for col in 0..dim_embedded {
        let mut rem = col;
        for slot in (0..k).rev() {
            digits[slot] = rem % d;
            rem /= d;
        }
        for perm in &perms {
            let mut row = 0usize;
            let mut permuted = vec![0usize; k];
            for (slot, &digit) in digits.iter().enumerate() {
                permuted[perm.apply(slot)] = digit;
            }
            for &digit in &permuted {
                row = row * d + digit;
            }
            projector[(row, col)] += C64::new(weight, 0.0);
        }
    }
    projector
}

/// Occupation tuples (length d, entries summing to k) in lexicographically
/// decreasing order.
fn occupation_tuples(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; d];
    fill_occupations(&mut current, 0, k, &mut out);
    out.sort_by(|a, b| b.cmp(a));
    out
}

fn fill_occupations(current: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        fill_occupations(current, pos + 1, remaining - v, out);
    }
}

/// Shared per-process cache of symmetric spaces keyed by (d, k).
pub fn symmetric_space(d: usize, k: usize) -> Result<Arc<SymmetricSpace>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SymmetricSpace>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(d, k)) {
        return Ok(hit.clone());
    }
    let built = Arc::new(symmetric_projector(d, k)?);
    cache
        .lock()
        .unwrap()
        .entry((d, k))
        .or_insert_with(|| built.clone());
    Ok(built)
}

/// Report of the partial-trace identity
/// Tr over m factors of P_+^(N) = (d_+^(N) / d_+^(N-m)) P_+^(N-m).
#[derive(Debug, Clone)]
pub struct TraceDownReport {
    pub d: usize,
    pub big: usize,
    pub traced: usize,
    pub expected_factor: f64,
    pub max_deviation: f64,
}

pub fn trace_down_ratio(d: usize, big: usize, m: usize) -> Result<TraceDownReport> {
    if m == 0 || m >= big {
        return Err(Error::Contract("trace_down_ratio requires 1 <= m < N".into()));
    }
    let upper = symmetric_space(d, big)?;
    let lower = symmetric_space(d, big - m)?;
    let dims = vec![d; big];
    let keep: Vec<usize> = (m..big).collect();
    let traced = crate::linalg::partial_trace(&upper.projector(), &dims, &keep)?;
    let factor = sym_dim(d, big)? as f64 / sym_dim(d, big - m)? as f64;
    let expected = lower.projector().scale_re(factor);
    Ok(TraceDownReport {
        d,
        big,
        traced: m,
        expected_factor: factor,
        max_deviation: traced.dist(&expected),
    })
}

/// Exact Haar-random unitary: Gram-Schmidt orthonormalization of a matrix of
/// independent standard complex Gaussians, with positive-real R diagonal
/// (the phase-fixed QR construction).
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        let mut cols: Vec<Vec<C64>> = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                    })
                    .collect()
            })
            .collect();
        let mut ok = true;
        for j in 0..d {
            for i in 0..j {
                let proj: C64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev = cols[i].clone();
                for (x, p) in cols[j].iter_mut().zip(&prev) {
                    *x -= proj * p;
                }
            }
            let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for x in cols[j].iter_mut() {
                *x /= norm;
            }
        }
        if ok {
            return ComplexMatrix::from_fn(d, d, |i, j| cols[j][i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, partial_trace, ZERO};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sym_dim_values() {
        // Empty tensor factor.
        assert_eq!(sym_dim(3, 0).unwrap(), 1);
        // d = 2 gives k + 1.
        assert_eq!(sym_dim(2, 3).unwrap(), 4);
        // Enumeration oracle: multisets of size 4 from 3 symbols.
        let by_enumeration = occupation_tuples(3, 4).len() as u64;
        assert_eq!(by_enumeration, 15);
        assert_eq!(sym_dim(3, 4).unwrap(), by_enumeration);
    }

    #[test]
    fn sym_dim_recurrence() {
        // d_+^(k) = d_+^(k-1) (d + k - 1) / k, exactly.
        for d in 2..=4u64 {
            for k in 1..=8u64 {
                let prev = sym_dim(d as usize, k as usize - 1).unwrap();
                let cur = sym_dim(d as usize, k as usize).unwrap();
                assert_eq!(cur * k, prev * (d + k - 1));
            }
        }
    }

    #[test]
    fn permutation_operator_identity_and_swap() {
        let id = permutation_operator(2, &Permutation::identity(3));
        assert_eq!(id, ComplexMatrix::identity(8));

        // Swap on two qubits sends |01> -> |10>.
        let swap = permutation_operator(2, &Permutation::new(vec![1, 0]).unwrap());
        let ket01 = ComplexMatrix::col_vec(&[ZERO, ONE, ZERO, ZERO]);
        let moved = swap.matmul(&ket01);
        assert!((moved[(2, 0)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn permutation_operator_is_group_homomorphism() {
        // U_pi U_sigma = U_{pi . sigma}, direct matrix-multiply oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let pi = Permutation::random(4, &mut rng);
            let sigma = Permutation::random(4, &mut rng);
            let lhs = permutation_operator(2, &pi).matmul(&permutation_operator(2, &sigma));
            let rhs = permutation_operator(2, &pi.compose(&sigma));
            assert!(lhs.dist(&rhs) < 1e-14);
        }
    }

    #[test]
    fn projector_small_cases() {
        let s = symmetric_projector(2, 1).unwrap();
        assert!(s.projector().dist(&ComplexMatrix::identity(2)) < 1e-15);
        assert!(s.basis.dist(&ComplexMatrix::identity(2)) < 1e-15);

        let s = symmetric_projector(2, 2).unwrap();
        assert_eq!(s.dim, 3);
        assert!((s.projector().trace().re - 3.0).abs() < 1e-10);
    }

    #[test]
    fn projector_invariants() {
        for (d, k) in [(2usize, 2usize), (2, 4), (3, 3)] {
            let s = symmetric_projector(d, k).unwrap();
            let p = &s.projector();
            // Idempotent and Hermitian.
            assert!(p.matmul(p).dist(p) < 1e-10, "idempotency d={d} k={k}");
            assert!(p.herm_defect() < 1e-12);
            // Trace matches the binomial dimension.
            assert!((p.trace().re - sym_dim(d, k).unwrap() as f64).abs() < 1e-8);
            // Basis relations.
            let b = &s.basis;
            assert!(b.dagger().matmul(b).dist(&ComplexMatrix::identity(s.dim)) < 1e-10);
            // Independent oracle: explicit (1/k!) permutation sum.
            assert!(permutation_sum_projector(d, k).dist(p) < 1e-10);
        }
    }

    #[test]
    fn projector_absorbs_permutations() {
        let s = symmetric_projector(2, 3).unwrap();
        for perm in Permutation::all(3) {
            let u = permutation_operator(2, &perm);
            assert!(u.matmul(&s.projector()).dist(&s.projector()) < 1e-12);
            assert!(s.projector().matmul(&u).dist(&s.projector()) < 1e-12);
            // Basis columns are +1 eigenvectors of every U_pi.
            assert!(u.matmul(&s.basis).dist(&s.basis) < 1e-12);
        }
    }

    #[test]
    fn projector_commutes_with_tensor_power_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = symmetric_projector(2, 3).unwrap();
        for _ in 0..6 {
            let u = haar_unitary(2, &mut rng);
            let u3 = kron(&kron(&u, &u).unwrap(), &u).unwrap();
            let lhs = u3.matmul(&s.projector());
            let rhs = s.projector().matmul(&u3);
            assert!(lhs.dist(&rhs) < 1e-8);
        }
    }

    #[test]
    fn trace_down_examples() {
        // d=2, N=2, m=1: Tr_1[P+^2] = (3/2) I_2.
        let p2 = symmetric_projector(2, 2).unwrap();
        let traced = partial_trace(&p2.projector(), &[2, 2], &[1]).unwrap();
        assert!(traced.dist(&ComplexMatrix::identity(2).scale_re(1.5)) < 1e-10);

        let r = trace_down_ratio(2, 2, 1).unwrap();
        assert!((r.expected_factor - 1.5).abs() < 1e-12);
        assert!(r.max_deviation < 1e-10);

        let r = trace_down_ratio(2, 3, 2).unwrap();
        assert!((r.expected_factor - 2.0).abs() < 1e-12);
        assert!(r.max_deviation < 1e-10);

        let r = trace_down_ratio(3, 2, 1).unwrap();
        assert!((r.expected_factor - 2.0).abs() < 1e-12);
        assert!(r.max_deviation < 1e-10);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [2usize, 3, 5] {
            let u = haar_unitary(d, &mut rng);
            let defect = u.dagger().matmul(&u).dist(&ComplexMatrix::identity(d));
            assert!(defect < 1e-12);
        }
    }

    #[test]
    fn capacity_error() {
        assert!(matches!(
            symmetric_projector(2, 20),
            Err(crate::error::Error::Capacity(_))
        ));
    }
}
