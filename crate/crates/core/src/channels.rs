//! Channel catalog: declarative channel descriptions, their Choi operators,
//! and application to states.
//!
//! Copy channels (symmetrized partial trace from N to M <= N copies, and
//! universal cloning from N to M >= N copies) are represented in compressed
//! symmetric bases: the input space has dimension d_+^(N) and the output
//! space d_+^(M). Embedded tensor-space constructions are used transiently.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    double_ket, hermitian_eig, kron, max_entangled, outer, partial_trace, pinv_sqrt_psd, psd_check,
    sqrt_psd, ComplexMatrix, C64, ONE, ZERO,
};
use crate::symmetric::{haar_unitary, symmetric_space, Permutation, SymmetricSpace};
use crate::tol::Tol;

/// A density matrix: Hermitian, PSD, unit trace (validated on construction).
#[derive(Debug, Clone)]
pub struct QuantumState {
    matrix: ComplexMatrix,
}

impl QuantumState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let tol = Tol::default();
        if !matrix.is_square() {
            return Err(Error::Dimension("state must be square".into()));
        }
        if !matrix.is_hermitian(tol.herm) {
            return Err(Error::Contract("state not Hermitian".into()));
        }
        let (ok, min) = psd_check(&matrix.hermitize(), tol.psd * matrix.frob_norm().max(1.0))?;
        if !ok {
            return Err(Error::Contract(format!(
                "state not PSD (min eigenvalue {min:.3e})"
            )));
        }
        if (matrix.trace().re - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "state trace {} != 1",
                matrix.trace().re
            )));
        }
        Ok(QuantumState {
            matrix: matrix.hermitize(),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        QuantumState {
            matrix: ComplexMatrix::identity(d).scale_re(1.0 / d as f64),
        }
    }

    pub fn pure(ket: &ComplexMatrix) -> Result<Self> {
        let norm2 = ket.frob_norm().powi(2);
        if norm2 < 1e-12 {
            return Err(Error::Contract("zero vector".into()));
        }
        Ok(QuantumState {
            matrix: outer(ket, ket).scale_re(1.0 / norm2),
        })
    }

    pub fn basis_state(d: usize, index: usize) -> Self {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(index, index)] = ONE;
        QuantumState { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 between density matrices.
pub fn fidelity(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let ra = sqrt_psd(&a.hermitize())?;
    let inner = ra.matmul(b).matmul(&ra).hermitize();
    let eig = hermitian_eig(&inner)?;
    let tr: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok((tr * tr).min(1.0))
}

/// Positive operator valued measure: elements sum to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    pub elements: Vec<ComplexMatrix>,
    pub labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() || elements.len() != labels.len() {
            return Err(Error::Contract("POVM needs matching elements/labels".into()));
        }
        let povm = Povm { elements, labels };
        povm.validate()?;
        Ok(povm)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = Tol::default();
        let d = self.elements[0].rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &self.elements {
            if e.rows() != d || e.cols() != d {
                return Err(Error::Dimension("POVM elements on different spaces".into()));
            }
            let (ok, min) = psd_check(&e.hermitize(), tol.psd * e.frob_norm().max(1.0))?;
            if !ok {
                return Err(Error::Contract(format!(
                    "POVM element not PSD (min {min:.3e})"
                )));
            }
            sum = &sum + e;
        }
        if sum.dist(&ComplexMatrix::identity(d)) > 1e-9 * (d as f64).sqrt().max(1.0) {
            return Err(Error::Contract("POVM elements do not sum to identity".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }
}

/// Declarative channel description.
#[derive(Debug, Clone)]
pub enum ChannelSpec {
    /// Ideal quantum channel on C^d.
    Identity { d: usize },
    /// Von Neumann measurement on the computational basis of C^d.
    IdealClassical { d: usize },
    /// Constant channel producing `rho0` from any input on C^input_dim.
    Erasure { rho0: QuantumState, input_dim: usize },
    /// Optimal pure-state estimation channel on C^d.
    Estimation { d: usize },
    /// Universal NOT channel on C^d.
    UniversalNot { d: usize },
    /// Channel given by Kraus operators (trace-preserving).
    Kraus { operators: Vec<ComplexMatrix> },
    /// Measure with `povm`, then prepare `outputs[i]`.
    MeasureAndPrepare { povm: Povm, outputs: Vec<QuantumState> },
    /// Symmetrized partial trace from N to M <= N copies, restricted to the
    /// symmetric subspaces (compressed representation).
    SymmetricTrace { d: usize, copies_in: usize, copies_out: usize },
    /// Optimal universal cloning from N to M >= N copies (compressed).
    UniversalCloning { d: usize, copies_in: usize, copies_out: usize },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        let tol = Tol::default();
        match self {
            ChannelSpec::Identity { d }
            | ChannelSpec::IdealClassical { d }
            | ChannelSpec::Estimation { d }
            | ChannelSpec::UniversalNot { d } => {
                if *d < 2 {
                    return Err(Error::Spec("dimension must be >= 2".into()));
                }
            }
            ChannelSpec::Erasure { input_dim, .. } => {
                if *input_dim < 1 {
                    return Err(Error::Spec("input dimension must be >= 1".into()));
                }
            }
            ChannelSpec::Kraus { operators } => {
                if operators.is_empty() {
                    return Err(Error::Spec("empty Kraus list".into()));
                }
                let d_in = operators[0].cols();
                let d_out = operators[0].rows();
                let mut sum = ComplexMatrix::zeros(d_in, d_in);
                for k in operators {
                    if k.cols() != d_in || k.rows() != d_out {
                        return Err(Error::Dimension("inconsistent Kraus shapes".into()));
                    }
                    sum = &sum + &k.dagger().matmul(k);
                }
                if sum.dist(&ComplexMatrix::identity(d_in))
                    > tol.trace.max(1e-9) * (d_in as f64).sqrt().max(1.0)
                {
                    return Err(Error::Contract(
                        "Kraus operators not trace-preserving (sum K^dag K != I)".into(),
                    ));
                }
            }
            ChannelSpec::MeasureAndPrepare { povm, outputs } => {
                povm.validate()?;
                if povm.elements.len() != outputs.len() {
                    return Err(Error::Spec("POVM/outputs length mismatch".into()));
                }
                let d_out = outputs[0].dim();
                if outputs.iter().any(|s| s.dim() != d_out) {
                    return Err(Error::Dimension("outputs on different spaces".into()));
                }
            }
            ChannelSpec::SymmetricTrace { d, copies_in, copies_out } => {
                if *d < 2 || *copies_out < 1 || copies_out > copies_in {
                    return Err(Error::Spec("trace channel requires 1 <= M <= N".into()));
                }
            }
            ChannelSpec::UniversalCloning { d, copies_in, copies_out } => {
                if *d < 2 || *copies_in < 1 || copies_out < copies_in {
                    return Err(Error::Spec("cloning channel requires M >= N >= 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> Result<usize> {
        Ok(match self {
            ChannelSpec::Identity { d }
            | ChannelSpec::IdealClassical { d }
            | ChannelSpec::Estimation { d }
            | ChannelSpec::UniversalNot { d } => *d,
            ChannelSpec::Erasure { input_dim, .. } => *input_dim,
            ChannelSpec::Kraus { operators } => operators[0].cols(),
            ChannelSpec::MeasureAndPrepare { povm, .. } => povm.dim(),
            ChannelSpec::SymmetricTrace { d, copies_in, .. }
            | ChannelSpec::UniversalCloning { d, copies_in, .. } => {
                crate::symmetric::sym_dim(*d, *copies_in)? as usize
            }
        })
    }

    pub fn output_dim(&self) -> Result<usize> {
        Ok(match self {
            ChannelSpec::Identity { d }
            | ChannelSpec::IdealClassical { d }
            | ChannelSpec::Estimation { d }
            | ChannelSpec::UniversalNot { d } => *d,
            ChannelSpec::Erasure { rho0, .. } => rho0.dim(),
            ChannelSpec::Kraus { operators } => operators[0].rows(),
            ChannelSpec::MeasureAndPrepare { outputs, .. } => outputs[0].dim(),
            ChannelSpec::SymmetricTrace { d, copies_out, .. }
            | ChannelSpec::UniversalCloning { d, copies_out, .. } => {
                crate::symmetric::sym_dim(*d, *copies_out)? as usize
            }
        })
    }

    /// Unitary representations under which the Choi operator is invariant,
    /// used by the covariant solver path. `None` if no covariance is declared.
    pub fn covariance_reps(&self) -> Result<Option<(RepFactor, RepFactor)>> {
        Ok(match self {
            ChannelSpec::Identity { .. }
            | ChannelSpec::Estimation { .. }
            | ChannelSpec::UniversalNot { .. } => Some((
                RepFactor::plain(1, false, GroupKind::Unitary),
                RepFactor::plain(1, true, GroupKind::Unitary),
            )),
            // The classical channel is covariant under the monomial group
            // (basis permutations times diagonal phases), which acts
            // irreducibly, so the invariant-state argument still applies.
            ChannelSpec::IdealClassical { .. } => Some((
                RepFactor::plain(1, false, GroupKind::Monomial),
                RepFactor::plain(1, true, GroupKind::Monomial),
            )),
            ChannelSpec::SymmetricTrace { d, copies_in, copies_out }
            | ChannelSpec::UniversalCloning { d, copies_in, copies_out } => Some((
                RepFactor::compressed(symmetric_space(*d, *copies_out)?, false),
                RepFactor::compressed(symmetric_space(*d, *copies_in)?, true),
            )),
            _ => None,
        })
    }

    /// Short family name for reports.
    pub fn family(&self) -> &'static str {
        match self {
            ChannelSpec::Identity { .. } => "identity",
            ChannelSpec::IdealClassical { .. } => "classical",
            ChannelSpec::Erasure { .. } => "erasure",
            ChannelSpec::Estimation { .. } => "estimation",
            ChannelSpec::UniversalNot { .. } => "unot",
            ChannelSpec::Kraus { .. } => "kraus",
            ChannelSpec::MeasureAndPrepare { .. } => "measure-and-prepare",
            ChannelSpec::SymmetricTrace { .. } => "trace",
            ChannelSpec::UniversalCloning { .. } => "cloning",
        }
    }
}

/// Choi operator on H_out (x) H_in.
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    pub matrix: ComplexMatrix,
    pub d_out: usize,
    pub d_in: usize,
    /// Projector onto the channel domain inside H_in; `None` means identity.
    pub domain_projector: Option<ComplexMatrix>,
}

impl ChoiOperator {
    pub fn new(matrix: ComplexMatrix, d_out: usize, d_in: usize) -> Self {
        debug_assert_eq!(matrix.rows(), d_out * d_in);
        ChoiOperator {
            matrix,
            d_out,
            d_in,
            domain_projector: None,
        }
    }

    pub fn domain(&self) -> ComplexMatrix {
        self.domain_projector
            .clone()
            .unwrap_or_else(|| ComplexMatrix::identity(self.d_in))
    }

    /// PSD + trace-preservation-on-domain validation.
    pub fn validate(&self) -> Result<()> {
        let tol = Tol::default();
        let (ok, min) = psd_check(
            &self.matrix.hermitize(),
            tol.psd * self.matrix.frob_norm().max(1.0),
        )?;
        if !ok {
            return Err(Error::Contract(format!(
                "Choi operator not PSD (min eigenvalue {min:.3e})"
            )));
        }
        let marginal = self.trace_out()?;
        if marginal.dist(&self.domain()) > 1e-8 * (self.d_in as f64).max(1.0) {
            return Err(Error::Contract(
                "Tr_out[C] differs from the domain projector".into(),
            ));
        }
        Ok(())
    }

    /// Tr_out of the Choi operator (an operator on H_in).
    pub fn trace_out(&self) -> Result<ComplexMatrix> {
        partial_trace(&self.matrix, &[self.d_out, self.d_in], &[1])
    }

    /// Apply the corresponding map to a density matrix on H_in.
    pub fn apply_to(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(rho.rows(), self.d_in);
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for o in 0..self.d_out {
            for op in 0..self.d_out {
                let mut acc = ZERO;
                for i in 0..self.d_in {
                    for ip in 0..self.d_in {
                        acc += self.matrix[(o * self.d_in + i, op * self.d_in + ip)] * rho[(i, ip)];
                    }
                }
                out[(o, op)] = acc;
            }
        }
        out
    }

    /// Apply the map tensored with an identity on a reference system of
    /// dimension `ref_dim` to a state on H_in (x) H_R.
    pub fn apply_tensor_ref(&self, rho: &ComplexMatrix, ref_dim: usize) -> ComplexMatrix {
        assert_eq!(rho.rows(), self.d_in * ref_dim);
        let dims_out = self.d_out * ref_dim;
        let mut out = ComplexMatrix::zeros(dims_out, dims_out);
        for o in 0..self.d_out {
            for r in 0..ref_dim {
                for op in 0..self.d_out {
                    for rp in 0..ref_dim {
                        let mut acc = ZERO;
                        for i in 0..self.d_in {
                            for ip in 0..self.d_in {
                                acc += self.matrix[(o * self.d_in + i, op * self.d_in + ip)]
                                    * rho[(i * ref_dim + r, ip * ref_dim + rp)];
                            }
                        }
                        out[(o * ref_dim + r, op * ref_dim + rp)] = acc;
                    }
                }
            }
        }
        out
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eig(&self.matrix.hermitize())?.max())
    }
}

/// Group to sample from in covariance checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// Haar-random unitaries on C^d.
    Unitary,
    /// Random monomial unitaries: permutation times diagonal phases.
    Monomial,
}

/// One tensor slot of a covariance representation: U |-> (U or U^*)^(x copies),
/// optionally compressed onto a symmetric subspace.
#[derive(Debug, Clone)]
pub struct RepFactor {
    pub copies: usize,
    pub conjugate: bool,
    pub group: GroupKind,
    pub compressed: Option<Arc<SymmetricSpace>>,
}

impl RepFactor {
    pub fn plain(copies: usize, conjugate: bool, group: GroupKind) -> Self {
        RepFactor {
            copies,
            conjugate,
            group,
            compressed: None,
        }
    }

    pub fn compressed(space: Arc<SymmetricSpace>, conjugate: bool) -> Self {
        RepFactor {
            copies: space.k,
            conjugate,
            group: GroupKind::Unitary,
            compressed: Some(space),
        }
    }

    /// Representation matrix for a one-particle unitary.
    pub fn matrix(&self, u: &ComplexMatrix) -> ComplexMatrix {
        let base = if self.conjugate { u.conj() } else { u.clone() };
        match &self.compressed {
            Some(space) => space.irrep(&base),
            None => {
                let mut acc = ComplexMatrix::identity(1);
                for _ in 0..self.copies {
                    acc = kron(&acc, &base).expect("rep capacity");
                }
                acc
            }
        }
    }
}

fn sample_group(d: usize, kind: GroupKind, rng: &mut impl Rng) -> ComplexMatrix {
    match kind {
        GroupKind::Unitary => haar_unitary(d, rng),
        GroupKind::Monomial => {
            let perm = Permutation::random(d, rng);
            let mut m = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                let phase = rng.gen::<f64>() * std::f64::consts::TAU;
                m[(perm.apply(j), j)] = C64::new(phase.cos(), phase.sin());
            }
            m
        }
    }
}

/// Covariance report: maximum Frobenius residual of
/// (R_out(U) (x) R_in(U)) C (.)^dag - C over sampled group elements.
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    pub samples: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

pub fn covariance_check(
    choi: &ChoiOperator,
    out_rep: &RepFactor,
    in_rep: &RepFactor,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<CovarianceReport> {
    let d = one_particle_dim(choi, out_rep, in_rep)?;
    let mut max_residual: f64 = 0.0;
    for _ in 0..samples {
        let u = sample_group(d, out_rep.group, rng);
        let g = kron(&out_rep.matrix(&u), &in_rep.matrix(&u))?;
        let rotated = choi.matrix.conjugate_by(&g);
        max_residual = max_residual.max(rotated.dist(&choi.matrix));
    }
    Ok(CovarianceReport {
        samples,
        max_residual,
        tol,
        passed: max_residual <= tol,
    })
}

fn one_particle_dim(
    choi: &ChoiOperator,
    out_rep: &RepFactor,
    in_rep: &RepFactor,
) -> Result<usize> {
    let dim_of = |rep: &RepFactor, target: usize| -> Option<usize> {
        match &rep.compressed {
            Some(space) => (space.dim == target).then_some(space.d),
            None => {
                // d^copies = target
                (2..=target).find(|d| d.pow(rep.copies as u32) == target)
            }
        }
    };
    let d_out = dim_of(out_rep, choi.d_out);
    let d_in = dim_of(in_rep, choi.d_in);
    match (d_out, d_in) {
        (Some(a), Some(b)) if a == b => Ok(a),
        _ => Err(Error::Dimension(
            "representation powers do not match the Choi dimensions".into(),
        )),
    }
}

/// Choi operator C = (E (x) I)(|I>><<I|) of a channel spec.
pub fn choi_of(spec: &ChannelSpec) -> Result<ChoiOperator> {
    spec.validate()?;
    match spec {
        ChannelSpec::Identity { d } => {
            let v = max_entangled(*d);
            Ok(ChoiOperator::new(outer(&v, &v), *d, *d))
        }
        ChannelSpec::IdealClassical { d } => {
            let dim = d * d;
            let mut m = ComplexMatrix::zeros(dim, dim);
            for i in 0..*d {
                let idx = i * d + i;
                m[(idx, idx)] = ONE;
            }
            Ok(ChoiOperator::new(m, *d, *d))
        }
        ChannelSpec::Erasure { rho0, input_dim } => {
            let m = kron(rho0.matrix(), &ComplexMatrix::identity(*input_dim))?;
            Ok(ChoiOperator::new(m, rho0.dim(), *input_dim))
        }
        ChannelSpec::Estimation { d } => {
            let df = *d as f64;
            let v = max_entangled(*d);
            let bell = outer(&v, &v);
            let ident = ComplexMatrix::identity(d * d);
            let m = &bell.scale_re(1.0 / df)
                + &(&ident - &bell.scale_re(1.0 / df)).scale_re(1.0 / (df + 1.0));
            Ok(ChoiOperator::new(m, *d, *d))
        }
        ChannelSpec::UniversalNot { d } => {
            let df = *d as f64;
            let v = max_entangled(*d);
            let bell = outer(&v, &v);
            let ident = ComplexMatrix::identity(d * d);
            let m = (&ident - &bell.scale_re(1.0 / df)).scale_re(df / (df * df - 1.0));
            Ok(ChoiOperator::new(m, *d, *d))
        }
        ChannelSpec::Kraus { operators } => {
            let d_in = operators[0].cols();
            let d_out = operators[0].rows();
            let mut m = ComplexMatrix::zeros(d_out * d_in, d_out * d_in);
            for k in operators {
                let v = double_ket(k);
                m = &m + &outer(&v, &v);
            }
            Ok(ChoiOperator::new(m, d_out, d_in))
        }
        ChannelSpec::MeasureAndPrepare { povm, outputs } => {
            let d_in = povm.dim();
            let d_out = outputs[0].dim();
            let mut m = ComplexMatrix::zeros(d_out * d_in, d_out * d_in);
            for (p, rho) in povm.elements.iter().zip(outputs) {
                m = &m + &kron(rho.matrix(), &p.transpose())?;
            }
            Ok(ChoiOperator::new(m, d_out, d_in))
        }
        ChannelSpec::SymmetricTrace { d, copies_in, copies_out } => {
            trace_choi_compressed(*d, *copies_in, *copies_out)
        }
        ChannelSpec::UniversalCloning { d, copies_in, copies_out } => {
            cloning_choi_direct(*d, *copies_in, *copies_out)
        }
    }
}

/// Compressed Choi operator of the symmetrized trace channel from N to
/// M <= N copies: a sum of d_+^(N-M) equal-norm rank-one terms built from
/// |I^(x M)>> (x) |phi_n> vectors projected onto the symmetric subspaces.
fn trace_choi_compressed(d: usize, n: usize, m: usize) -> Result<ChoiOperator> {
    let s_out = symmetric_space(d, m)?;
    let s_in = symmetric_space(d, n)?;
    let s_rest = symmetric_space(d, n - m)?;
    let dm = d.pow(m as u32);
    let d_rest = d.pow((n - m) as u32);

    let mut choi = ComplexMatrix::zeros(s_out.dim * s_in.dim, s_out.dim * s_in.dim);
    for col in 0..s_rest.dim {
        // Embedded vector: sum_j |j>_out (x) |j>_{in,1..M} (x) |phi_col>,
        // arranged as a d^M x d^N matrix (row = out index, col = in index).
        let mut w = ComplexMatrix::zeros(dm, d.pow(n as u32));
        for j in 0..dm {
            for t in 0..d_rest {
                w[(j, j * d_rest + t)] = s_rest.basis[(t, col)];
            }
        }
        // Compress both sides: (B_out^dag (x) B_in^dag)|w>> = |B_out^dag W conj(B_in)>>.
        let compressed = s_out.basis.dagger().matmul(&w).matmul(&s_in.basis.conj());
        let v = double_ket(&compressed);
        choi = &choi + &outer(&v, &v);
    }
    Ok(ChoiOperator::new(choi, s_out.dim, s_in.dim))
}

/// Compressed Choi operator of the optimal universal cloning channel,
/// built directly from its defining map applied to compressed matrix units.
fn cloning_choi_direct(d: usize, n: usize, m: usize) -> Result<ChoiOperator> {
    let s_in = symmetric_space(d, n)?;
    let s_out = symmetric_space(d, m)?;
    let scale = s_in.dim as f64 / s_out.dim as f64;
    let extra = ComplexMatrix::identity(d.pow((m - n) as u32));

    let dim = s_out.dim * s_in.dim;
    let mut choi = ComplexMatrix::zeros(dim, dim);
    for a in 0..s_in.dim {
        for b in 0..s_in.dim {
            // Embedded matrix unit |a><b| of the compressed input basis.
            let col_a = ComplexMatrix::from_fn(s_in.embedded_dim(), 1, |i, _| s_in.basis[(i, a)]);
            let col_b = ComplexMatrix::from_fn(s_in.embedded_dim(), 1, |i, _| s_in.basis[(i, b)]);
            let unit = outer(&col_a, &col_b);
            let big = kron(&unit, &extra)?;
            let out = s_out
                .basis
                .dagger()
                .matmul(&big)
                .matmul(&s_out.basis)
                .scale_re(scale);
            for o in 0..s_out.dim {
                for op in 0..s_out.dim {
                    choi[(o * s_in.dim + a, op * s_in.dim + b)] += out[(o, op)];
                }
            }
        }
    }
    Ok(ChoiOperator::new(choi, s_out.dim, s_in.dim))
}

/// Embedded (uncompressed) Choi operator of the symmetrized two-copy trace
/// channel C(rho) = (Tr_2 + Tr_1)(rho)/2 on the full two-copy input space.
/// Its nonzero eigenvalues are (d+1)/2 and (d-1)/2, each d-fold.
pub fn two_copy_trace_choi_embedded(d: usize) -> Result<ChoiOperator> {
    let ident = ComplexMatrix::identity(d);
    let v = max_entangled(d);
    let bell = outer(&v, &v);
    // |I>><<I|_{01} (x) I_2 and the factor-permuted |I>><<I|_{02} (x) I_1.
    let first = kron(&bell, &ident)?;
    // Swap the two input factors (labels 1 and 2) of `first`.
    let dims = [d, d, d];
    let n = d * d * d;
    let second = ComplexMatrix::from_fn(n, n, |r, c| {
        let dec = |x: usize| (x / (dims[1] * dims[2]), (x / dims[2]) % dims[1], x % dims[2]);
        let (r0, r1, r2) = dec(r);
        let (c0, c1, c2) = dec(c);
        first[(r0 * d * d + r2 * d + r1, c0 * d * d + c2 * d + c1)]
    });
    let m = (&first + &second).scale_re(0.5);
    Ok(ChoiOperator::new(m, d, d * d))
}

/// Report of the time-reversal duality between cloning and partial trace:
/// C_clone(N->M) = (d_+^(N)/d_+^(M)) S C_trace(M->N) S in compressed bases.
#[derive(Debug, Clone)]
pub struct DualityReport {
    pub d: usize,
    pub copies_in: usize,
    pub copies_out: usize,
    pub scale: f64,
    pub deviation: f64,
}

pub fn duality_check(d: usize, n: usize, m: usize) -> Result<DualityReport> {
    if m < n {
        return Err(Error::Contract("duality_check requires M >= N".into()));
    }
    let clone = choi_of(&ChannelSpec::UniversalCloning { d, copies_in: n, copies_out: m })?;
    let trace = choi_of(&ChannelSpec::SymmetricTrace { d, copies_in: m, copies_out: n })?;
    let dn = crate::symmetric::sym_dim(d, n)? as f64;
    let dm = crate::symmetric::sym_dim(d, m)? as f64;
    let scale = dn / dm;
    // S exchanges the two compressed tensor slots (sym N <-> sym M).
    let swapped = trace.matrix.swap_factors(trace.d_out, trace.d_in).scale_re(scale);
    Ok(DualityReport {
        d,
        copies_in: n,
        copies_out: m,
        scale,
        deviation: clone.matrix.dist(&swapped),
    })
}

/// Apply a catalog channel to a density matrix (compressed representation
/// for copy channels).
pub fn apply(spec: &ChannelSpec, rho: &QuantumState) -> Result<QuantumState> {
    let out = apply_matrix(spec, rho.matrix())?;
    QuantumState::new(out.hermitize())
}

/// Raw linear action of the channel on an operator.
pub fn apply_matrix(spec: &ChannelSpec, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    spec.validate()?;
    if rho.rows() != spec.input_dim()? {
        return Err(Error::Dimension(format!(
            "state dimension {} does not match channel input {}",
            rho.rows(),
            spec.input_dim()?
        )));
    }
    Ok(match spec {
        ChannelSpec::Identity { .. } => rho.clone(),
        ChannelSpec::IdealClassical { d } => {
            ComplexMatrix::from_fn(*d, *d, |i, j| if i == j { rho[(i, i)] } else { ZERO })
        }
        ChannelSpec::Erasure { rho0, .. } => rho0.matrix().scale(rho.trace()),
        ChannelSpec::Estimation { .. } | ChannelSpec::UniversalNot { .. } => {
            choi_of(spec)?.apply_to(rho)
        }
        ChannelSpec::Kraus { operators } => {
            let d_out = operators[0].rows();
            let mut out = ComplexMatrix::zeros(d_out, d_out);
            for k in operators {
                out = &out + &rho.conjugate_by(k);
            }
            out
        }
        ChannelSpec::MeasureAndPrepare { povm, outputs } => {
            let d_out = outputs[0].dim();
            let mut out = ComplexMatrix::zeros(d_out, d_out);
            for (p, sigma) in povm.elements.iter().zip(outputs) {
                let prob = p.matmul(rho).trace();
                out = &out + &sigma.matrix().scale(prob);
            }
            out
        }
        ChannelSpec::SymmetricTrace { d, copies_in, copies_out } => {
            let s_in = symmetric_space(*d, *copies_in)?;
            let s_out = symmetric_space(*d, *copies_out)?;
            let embedded = s_in.embed(rho);
            let dims = vec![*d; *copies_in];
            let keep: Vec<usize> = (0..*copies_out).collect();
            let reduced = partial_trace(&embedded, &dims, &keep)?;
            s_out.compress(&reduced)
        }
        ChannelSpec::UniversalCloning { d, copies_in, copies_out } => {
            let s_in = symmetric_space(*d, *copies_in)?;
            let s_out = symmetric_space(*d, *copies_out)?;
            let embedded = s_in.embed(rho);
            let extra = ComplexMatrix::identity(d.pow((*copies_out - *copies_in) as u32));
            let big = kron(&embedded, &extra)?;
            s_out
                .compress(&big)
                .scale_re(s_in.dim as f64 / s_out.dim as f64)
        }
    })
}

/// Compress N identical copies of a pure one-particle state into the
/// symmetric basis representation.
pub fn compressed_copies(d: usize, copies: usize, ket: &ComplexMatrix) -> Result<QuantumState> {
    let space = symmetric_space(d, copies)?;
    let mut product = ComplexMatrix::identity(1);
    for _ in 0..copies {
        product = kron(&product, ket)?;
    }
    let v = space.compress_vec(&product);
    QuantumState::pure(&v)
}

/// Random measure-and-prepare channel: POVM from Gaussian-random PSD
/// elements normalized against their sum, outputs from normalized
/// Wishart-type matrices.
pub fn random_mp_channel(
    d_in: usize,
    d_out: usize,
    outcomes: usize,
    rng: &mut impl Rng,
) -> Result<ChannelSpec> {
    let ginibre = |rng: &mut dyn rand::RngCore, r: usize, c: usize| {
        ComplexMatrix::from_fn(r, c, |_, _| {
            C64::new(
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            )
        })
    };
    let mut raw: Vec<ComplexMatrix> = Vec::with_capacity(outcomes);
    let mut sum = ComplexMatrix::zeros(d_in, d_in);
    for _ in 0..outcomes {
        let g = ginibre(rng, d_in, d_in);
        let w = g.matmul(&g.dagger());
        sum = &sum + &w;
        raw.push(w);
    }
    let normalizer = pinv_sqrt_psd(&sum, 1e-12)?;
    let elements: Vec<ComplexMatrix> = raw
        .iter()
        .map(|w| w.conjugate_by(&normalizer).hermitize())
        .collect();
    let labels = (0..outcomes).map(|i| format!("m{i}")).collect();
    let povm = Povm::new(elements, labels)?;
    let outputs: Result<Vec<QuantumState>> = (0..outcomes)
        .map(|_| {
            let g = ginibre(rng, d_out, d_out);
            let w = g.matmul(&g.dagger());
            QuantumState::new(w.scale_re(1.0 / w.trace().re))
        })
        .collect();
    Ok(ChannelSpec::MeasureAndPrepare {
        povm,
        outputs: outputs?,
    })
}

/// Random trace-preserving Kraus channel.
pub fn random_kraus_channel(
    d_in: usize,
    d_out: usize,
    kraus: usize,
    rng: &mut impl Rng,
) -> Result<ChannelSpec> {
    let mut raw: Vec<ComplexMatrix> = Vec::with_capacity(kraus);
    let mut gram = ComplexMatrix::zeros(d_in, d_in);
    for _ in 0..kraus {
        let g = ComplexMatrix::from_fn(d_out, d_in, |_, _| {
            C64::new(
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            )
        });
        gram = &gram + &g.dagger().matmul(&g);
        raw.push(g);
    }
    let fix = pinv_sqrt_psd(&gram, 1e-12)?;
    let operators = raw.iter().map(|g| g.matmul(&fix)).collect();
    Ok(ChannelSpec::Kraus { operators })
}
