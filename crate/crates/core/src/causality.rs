//! The causality-bound solver: the maximum probability p and witness state
//! rho0 such that p C <= rho0 (x) I_in, with an analytic fast path for
//! covariant channels and a generic numeric path for arbitrary Choi operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{
    choi_of, covariance_check, ChannelSpec, ChoiOperator, QuantumState, RepFactor,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, ComplexMatrix};
use crate::symmetric::sym_dim;
use crate::tol::Tol;

/// How a certificate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    CovariantAnalytic,
    GenericNumeric,
}

impl SolverMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            SolverMethod::CovariantAnalytic => "covariant-analytic",
            SolverMethod::GenericNumeric => "generic-numeric",
        }
    }
}

/// Solution of the causality bound for one Choi operator.
#[derive(Debug, Clone)]
pub struct CausalityCertificate {
    pub p_max: f64,
    pub rho0: QuantumState,
    /// Smallest eigenvalue of rho0 (x) I - p_max C (feasibility evidence).
    pub min_residual_eig: f64,
    pub method: SolverMethod,
}

impl CausalityCertificate {
    /// Recompute the feasibility residual against a Choi operator and check
    /// the certificate invariants.
    pub fn validate(&self, choi: &ChoiOperator) -> Result<()> {
        if !(0.0..=1.0 + 1e-12).contains(&self.p_max) {
            return Err(Error::Contract(format!("p_max {} outside [0,1]", self.p_max)));
        }
        let residual = feasibility_residual(choi, self.rho0.matrix(), self.p_max)?;
        if residual < -1e-8 {
            return Err(Error::Contract(format!(
                "certificate infeasible: min residual eigenvalue {residual:.3e}"
            )));
        }
        Ok(())
    }
}

/// Smallest eigenvalue of rho0 (x) I_in - p C.
pub fn feasibility_residual(choi: &ChoiOperator, rho0: &ComplexMatrix, p: f64) -> Result<f64> {
    let lhs = kron(rho0, &ComplexMatrix::identity(choi.d_in))?;
    let shifted = &lhs - &choi.matrix.scale_re(p);
    Ok(hermitian_eig(&shifted.hermitize())?.min())
}

/// Largest p with p C <= rho0 (x) I, obtained from the top eigenvalue of the
/// matrix pencil (rho0^{-1/2} (x) I) C (rho0^{-1/2} (x) I) after flooring the
/// eigenvalues of rho0. The returned p is feasible by construction.
pub fn certified_probability(
    choi: &ChoiOperator,
    rho0: &ComplexMatrix,
    floor: f64,
) -> Result<(f64, ComplexMatrix)> {
    let eig = hermitian_eig(&rho0.hermitize())?;
    // When the Choi operator is entirely supported inside supp(rho0) (x) I,
    // use the pseudo-inverse on the support: this keeps rank-deficient
    // witnesses (e.g. pure erasure targets) exact instead of floored.
    let support = eig.map(|l| if l > floor { 1.0 } else { 0.0 });
    let lifted = kron(&support, &ComplexMatrix::identity(choi.d_in))?;
    let leak = (&choi.matrix - &choi.matrix.conjugate_by(&lifted)).max_abs();
    let clipped = if leak <= 1e-12 * choi.matrix.frob_norm().max(1.0) {
        eig.map(|l| if l > floor { l } else { 0.0 })
    } else {
        eig.map(|l| l.max(floor))
    };
    let state = clipped.scale_re(1.0 / clipped.trace().re);
    let inv_root = hermitian_eig(&state)?.map(|l| if l > 0.0 { 1.0 / l.sqrt() } else { 0.0 });
    let pencil = choi
        .matrix
        .conjugate_by(&kron(&inv_root, &ComplexMatrix::identity(choi.d_in))?);
    let lambda = hermitian_eig(&pencil.hermitize())?.max();
    let p = if lambda <= 1.0 { 1.0 } else { 1.0 / lambda };
    Ok((p, state))
}

/// Closed-form maximum probability for catalog channels, `None` when the
/// family has no closed form.
pub fn analytic_p_max(spec: &ChannelSpec) -> Result<Option<f64>> {
    Ok(match spec {
        ChannelSpec::Identity { d } => Some(1.0 / (*d as f64).powi(2)),
        ChannelSpec::IdealClassical { d } => Some(1.0 / *d as f64),
        ChannelSpec::Erasure { .. } => Some(1.0),
        ChannelSpec::Estimation { d } => Some(1.0 / *d as f64),
        ChannelSpec::UniversalNot { d } => {
            let df = *d as f64;
            Some(1.0 - 1.0 / (df * df))
        }
        ChannelSpec::SymmetricTrace { d, copies_in, copies_out }
        | ChannelSpec::UniversalCloning { d, copies_in, copies_out } => {
            let n = *copies_in;
            let m = *copies_out;
            let diff = n.abs_diff(m);
            Some(
                sym_dim(*d, diff)? as f64
                    / (sym_dim(*d, n)? as f64 * sym_dim(*d, m)? as f64),
            )
        }
        ChannelSpec::Kraus { .. } | ChannelSpec::MeasureAndPrepare { .. } => None,
    })
}

/// Analytic path: for a Choi operator invariant under an irreducible output
/// representation, the optimal witness is rho0 = I/d_out and
/// p = 1/(d_out gamma_max) with gamma_max the top Choi eigenvalue.
pub fn max_probability_covariant(
    choi: &ChoiOperator,
    out_rep: &RepFactor,
    in_rep: &RepFactor,
    rng: &mut impl Rng,
) -> Result<CausalityCertificate> {
    let tol = Tol::default();
    let cov_tol = tol.herm.max(1e-8) * choi.matrix.frob_norm().max(1.0);
    let report = covariance_check(choi, out_rep, in_rep, 20, cov_tol, rng)?;
    if !report.passed {
        return Err(Error::Contract(format!(
            "channel not covariant (residual {:.3e}); use the generic path",
            report.max_residual
        )));
    }
    let gamma_max = choi.max_eigenvalue()?;
    let d_out = choi.d_out as f64;
    let p_max = (1.0 / (d_out * gamma_max)).min(1.0);
    let rho0 = QuantumState::maximally_mixed(choi.d_out);
    let min_residual_eig = feasibility_residual(choi, rho0.matrix(), p_max)?;
    Ok(CausalityCertificate {
        p_max,
        rho0,
        min_residual_eig,
        method: SolverMethod::CovariantAnalytic,
    })
}

/// Options for the generic numeric solver.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub restarts: usize,
    pub stage_iterations: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            restarts: 3,
            stage_iterations: 160,
            seed: 0,
        }
    }
}

/// Generic numeric path: solves p_max = 1 / min{Tr X : X >= 0, X (x) I >= C}
/// by a quadratic-penalty descent on X, certifying every candidate witness
/// through the eigenvalue pencil so the returned p is always feasible.
pub fn max_probability_generic(
    choi: &ChoiOperator,
    options: &SolverOptions,
) -> Result<CausalityCertificate> {
    let tol = Tol::default();
    let d_out = choi.d_out;
    let d_in = choi.d_in;
    let norm = choi.matrix.frob_norm();

    // Vacuous constraint: any rho0 works with p = 1.
    if norm < tol.herm {
        let rho0 = QuantumState::maximally_mixed(d_out);
        return Ok(CausalityCertificate {
            p_max: 1.0,
            rho0,
            min_residual_eig: 0.0,
            method: SolverMethod::GenericNumeric,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let floor = 1e-8;

    let mut best_p = 0.0;
    let mut best_rho0 = ComplexMatrix::identity(d_out).scale_re(1.0 / d_out as f64);
    let consider = |rho0: &ComplexMatrix, best_p: &mut f64, best_rho0: &mut ComplexMatrix| -> Result<f64> {
        let (p, state) = certified_probability(choi, rho0, floor)?;
        if p > *best_p {
            *best_p = p;
            *best_rho0 = state;
        }
        Ok(p)
    };

    // Warm starts: the normalized output marginal (optimal for covariant
    // channels and erasure channels), the maximally mixed state, and a few
    // random full-rank states.
    let out_marginal = crate::linalg::partial_trace(&choi.matrix, &[d_out, d_in], &[0])?;
    let mm = ComplexMatrix::identity(d_out).scale_re(1.0 / d_out as f64);
    consider(&out_marginal.scale_re(1.0 / out_marginal.trace().re), &mut best_p, &mut best_rho0)?;
    consider(&mm, &mut best_p, &mut best_rho0)?;
    for _ in 0..options.restarts {
        let r = crate::linalg::random_density(&mut rng, d_out);
        consider(&r, &mut best_p, &mut best_rho0)?;
    }

    // Penalty descent on X (best current scale: X = lambda rho0 is feasible).
    let gamma = choi.max_eigenvalue()?.max(1e-12);
    let mut x = best_rho0.scale_re(1.0 / best_p.max(1e-12));
    let mut stalled = 0;
    for stage in 0..9 {
        let beta = 4.0_f64.powi(stage + 1) / gamma;
        let step = 0.45 / (1.0 + 2.0 * beta * d_in as f64 * gamma);
        for _ in 0..options.stage_iterations {
            let diff = &choi.matrix - &kron(&x, &ComplexMatrix::identity(d_in))?;
            let positive = hermitian_eig(&diff.hermitize())?.map(|l| l.max(0.0));
            let grad = &ComplexMatrix::identity(d_out)
                - &crate::linalg::partial_trace(&positive, &[d_out, d_in], &[0])?
                    .scale_re(2.0 * beta);
            x = &x - &grad.scale_re(step);
            // Keep X in the PSD cone.
            x = hermitian_eig(&x.hermitize())?.map(|l| l.max(0.0));
        }
        let prev = best_p;
        consider(&x, &mut best_p, &mut best_rho0)?;
        if best_p - prev < options.tol * 0.1 {
            stalled += 1;
            if stalled >= 2 && stage >= 3 {
                break;
            }
        } else {
            stalled = 0;
        }
    }

    let rho0 = QuantumState::new(best_rho0.hermitize())?;
    let min_residual_eig = feasibility_residual(choi, rho0.matrix(), best_p)?;
    Ok(CausalityCertificate {
        p_max: best_p,
        rho0,
        min_residual_eig,
        method: SolverMethod::GenericNumeric,
    })
}

/// End-to-end solve for a catalog channel: covariant path when a covariance
/// representation is declared, generic path otherwise.
pub fn solve_channel(spec: &ChannelSpec, seed: u64) -> Result<(ChoiOperator, CausalityCertificate)> {
    let choi = choi_of(spec)?;
    let cert = match spec.covariance_reps()? {
        Some((out_rep, in_rep)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            max_probability_covariant(&choi, &out_rep, &in_rep, &mut rng)?
        }
        None => max_probability_generic(
            &choi,
            &SolverOptions {
                seed,
                ..SolverOptions::default()
            },
        )?,
    };
    cert.validate(&choi)?;
    Ok((choi, cert))
}

/// Report for the universal lower bounds p >= max{1/d_in^2, 1/d_out^2}
/// (plus the classical/measure-and-prepare strengthenings).
#[derive(Debug, Clone)]
pub struct LowerBoundReport {
    pub bound: f64,
    pub margin: f64,
    pub passed: bool,
}

pub fn verify_lower_bounds(spec: &ChannelSpec, cert: &CausalityCertificate) -> Result<LowerBoundReport> {
    let d_in = spec.input_dim()? as f64;
    let d_out = spec.output_dim()? as f64;
    let mut bound: f64 = (1.0 / (d_in * d_in)).max(1.0 / (d_out * d_out));
    match spec {
        ChannelSpec::IdealClassical { .. } => {
            bound = bound.max((1.0 / d_in).max(1.0 / d_out));
        }
        ChannelSpec::MeasureAndPrepare { .. } | ChannelSpec::Estimation { .. } => {
            bound = bound.max(1.0 / d_out);
        }
        _ => {}
    }
    let margin = cert.p_max - bound;
    Ok(LowerBoundReport {
        bound,
        margin,
        passed: margin >= -1e-9,
    })
}

/// True iff the Choi operator has the erasure product form
/// C = rho_hat (x) Pi_domain, the only form allowing p = 1.
pub fn erasure_classifier(choi: &ChoiOperator, tol: f64) -> Result<bool> {
    let domain = choi.domain();
    let rank = domain.trace().re;
    if rank < 0.5 {
        return Err(Error::Contract("empty channel domain".into()));
    }
    let rho_hat = crate::linalg::partial_trace(&choi.matrix, &[choi.d_out, choi.d_in], &[0])?
        .scale_re(1.0 / rank);
    let product = kron(&rho_hat, &domain)?;
    Ok(choi.matrix.dist(&product) <= tol * choi.matrix.frob_norm().max(1.0))
}
