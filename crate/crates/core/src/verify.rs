//! Named invariant batteries for the verification harness.
//!
//! Each suite runs a battery of checks at desk scale and reports one
//! [`InvariantResult`] per named invariant: a pass/fail flag together with
//! the numerical residual that was compared against the tolerance. The CLI
//! `verify` command serializes these into a machine-readable summary.
//!
//! Fault injection: [`VerifyOptions::perturb_choi`] adds a Hermitian
//! perturbation of the given relative magnitude to selected Choi operators
//! before checking them, so that the duality and feasibility invariants fail
//! on purpose. This is a self-test that the batteries actually have teeth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::causality::{
    analytic_p_max, erasure_classifier, feasibility_residual,
    max_probability_generic, solve_channel, verify_lower_bounds, SolverOptions,
};
use crate::channels::{
    choi_of, covariance_check, random_kraus_channel, random_mp_channel,
    two_copy_trace_choi_embedded, ChannelSpec, ChoiOperator, QuantumState,
};
use crate::error::{Error, Result};
use crate::infogame::{
    asymptotic_convergence_report, expected_payoff, f_pi, information_bound_check, lottery_game,
    PayoffGame,
};
use crate::linalg::{
    double_ket, hermitian_eig, kron, max_entangled, partial_trace, random_density, random_matrix,
    unket, ComplexMatrix,
};
use crate::protocol::{induced_choi, realize};
use crate::symmetric::{haar_unitary, permutation_sum_projector, sym_dim, symmetric_space};

/// Names of all invariant suites, in the order `run_all` executes them.
pub const SUITES: &[&str] = &[
    "linalg",
    "symmetric",
    "channels",
    "causality",
    "protocol",
    "infogame",
    "mp-gamma",
];

/// One named invariant check: the residual actually measured and the
/// tolerance it was compared against.
#[derive(Debug, Clone)]
pub struct InvariantResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl InvariantResult {
    fn new(suite: &str, name: &str, residual: f64, tolerance: f64) -> Self {
        InvariantResult {
            suite: suite.into(),
            name: name.into(),
            passed: residual <= tolerance,
            residual,
            tolerance,
        }
    }
}

/// Options shared by all suites.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Base RNG seed; every randomized check derives its stream from it.
    pub seed: u64,
    /// Relative magnitude of the injected Choi perturbation (0 disables).
    pub perturb_choi: f64,
    /// Number of random measure-and-prepare channels in the mp-gamma suite.
    pub mp_channels: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            perturb_choi: 0.0,
            mp_channels: 200,
        }
    }
}

/// Run one suite by name.
pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    match name {
        "linalg" => linalg_suite(opts),
        "symmetric" => symmetric_suite(opts),
        "channels" => channels_suite(opts),
        "causality" => causality_suite(opts),
        "protocol" => protocol_suite(opts),
        "infogame" => infogame_suite(opts),
        "mp-gamma" => mp_gamma_suite(opts),
        other => Err(Error::Spec(format!(
            "unknown suite '{other}'; known suites: {}",
            SUITES.join(", ")
        ))),
    }
}

/// Run every suite and concatenate the results.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    let mut out = Vec::new();
    for suite in SUITES {
        out.extend(run_suite(suite, opts)?);
    }
    Ok(out)
}

fn rng_for(opts: &VerifyOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Add a Hermitian perturbation of relative Frobenius magnitude `eps`.
fn perturbed(choi: &ChoiOperator, eps: f64, rng: &mut impl Rng) -> ChoiOperator {
    if eps == 0.0 {
        return choi.clone();
    }
    let n = choi.matrix.rows();
    let noise = random_matrix(rng, n, n).hermitize();
    let scale = eps * choi.matrix.frob_norm().max(1.0) / noise.frob_norm().max(1e-300);
    ChoiOperator::new(&choi.matrix + &noise.scale_re(scale), choi.d_out, choi.d_in)
}

fn linalg_suite(opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    let suite = "linalg";
    let mut rng = rng_for(opts, 1);
    let mut out = Vec::new();

    // Eigendecomposition reconstructs random Hermitian matrices.
    let mut worst = 0.0_f64;
    for n in [2usize, 3, 5, 8] {
        let h = random_matrix(&mut rng, n, n).hermitize();
        let recon = hermitian_eig(&h)?.map(|l| l);
        worst = worst.max(recon.dist(&h) / h.frob_norm().max(1.0));
    }
    out.push(InvariantResult::new(suite, "eig-reconstruction", worst, 1e-10));

    // Partial trace is trace preserving and consistent with the full trace.
    let joint = random_density(&mut rng, 6);
    let left = partial_trace(&joint, &[2, 3], &[0])?;
    let right = partial_trace(&joint, &[2, 3], &[1])?;
    let residual = (left.trace().re - 1.0)
        .abs()
        .max((right.trace().re - 1.0).abs());
    out.push(InvariantResult::new(suite, "partial-trace-normalization", residual, 1e-12));

    // Double-ket calculus: (A (x) B)|C>> = |A C B^T>>.
    let a = random_matrix(&mut rng, 3, 3);
    let b = random_matrix(&mut rng, 3, 3);
    let c = random_matrix(&mut rng, 3, 3);
    let lhs = kron(&a, &b)?.matmul(&double_ket(&c));
    let rhs = double_ket(&a.matmul(&c).matmul(&b.transpose()));
    out.push(InvariantResult::new(
        suite,
        "double-ket-transport",
        lhs.dist(&rhs) / rhs.frob_norm().max(1.0),
        1e-12,
    ));

    // <<I|I>> = d for the unnormalized maximally entangled vector.
    let v = max_entangled(4);
    let norm2 = v.dagger().matmul(&v)[(0, 0)].re;
    out.push(InvariantResult::new(suite, "max-entangled-norm", (norm2 - 4.0).abs(), 1e-12));

    // unket inverts double_ket.
    let rt = unket(&double_ket(&c), 3, 3);
    out.push(InvariantResult::new(suite, "double-ket-roundtrip", rt.dist(&c), 1e-14));
    Ok(out)
}

fn symmetric_suite(opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    let suite = "symmetric";
    let mut rng = rng_for(opts, 2);
    let mut out = Vec::new();

    // Projector idempotence and rank d_+^(k).
    let mut worst_idem = 0.0_f64;
    let mut worst_rank = 0.0_f64;
    for (d, k) in [(2usize, 2usize), (2, 3), (3, 2), (3, 3)] {
        let space = symmetric_space(d, k)?;
        let p = space.projector();
        worst_idem = worst_idem.max(p.matmul(p).dist(p));
        worst_rank = worst_rank.max((p.trace().re - sym_dim(d, k)? as f64).abs());
    }
    out.push(InvariantResult::new(suite, "projector-idempotent", worst_idem, 1e-10));
    out.push(InvariantResult::new(suite, "projector-rank", worst_rank, 1e-9));

    // Basis construction agrees with the permutation-sum projector.
    let space = symmetric_space(2, 3)?;
    let reference = permutation_sum_projector(2, 3);
    out.push(InvariantResult::new(
        suite,
        "projector-permutation-sum",
        space.projector().dist(&reference),
        1e-10,
    ));

    // Haar samples are unitary.
    let mut worst_u = 0.0_f64;
    for d in [2usize, 3, 4] {
        let u = haar_unitary(d, &mut rng);
        worst_u = worst_u.max(u.dagger().matmul(&u).dist(&ComplexMatrix::identity(d)));
    }
    out.push(InvariantResult::new(suite, "haar-unitarity", worst_u, 1e-12));
    Ok(out)
}

fn channels_suite(opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    let suite = "channels";
    let mut rng = rng_for(opts, 3);
    let mut out = Vec::new();

    // Every catalog Choi operator is PSD with Tr_out C = I_domain.
    let catalog: Vec<ChannelSpec> = vec![
        ChannelSpec::Identity { d: 3 },
        ChannelSpec::IdealClassical { d: 3 },
        ChannelSpec::Estimation { d: 2 },
        ChannelSpec::UniversalNot { d: 2 },
        ChannelSpec::SymmetricTrace { d: 2, copies_in: 3, copies_out: 1 },
        ChannelSpec::UniversalCloning { d: 2, copies_in: 1, copies_out: 3 },
        ChannelSpec::Erasure {
            rho0: QuantumState::maximally_mixed(2),
            input_dim: 3,
        },
    ];
    let mut worst = 0.0_f64;
    for spec in &catalog {
        let choi = choi_of(spec)?;
        choi.validate()?;
        let marginal = choi.trace_out()?;
        worst = worst.max(marginal.dist(&choi.domain()));
    }
    out.push(InvariantResult::new(suite, "catalog-choi-trace-preserving", worst, 1e-8));

    // Group covariance of the covariant catalog entries.
    let mut worst_cov = 0.0_f64;
    for spec in &catalog {
        if let Some((out_rep, in_rep)) = spec.covariance_reps()? {
            let choi = choi_of(spec)?;
            let report = covariance_check(&choi, &out_rep, &in_rep, 10, 1e-8, &mut rng)?;
            worst_cov = worst_cov.max(report.max_residual);
        }
    }
    out.push(InvariantResult::new(suite, "catalog-covariance", worst_cov, 1e-8));

    // Two-copy trace Choi eigenvalues (d+1)/2 and (d-1)/2, each d-fold.
    let mut worst_eig = 0.0_f64;
    for d in [2usize, 3, 4] {
        let df = d as f64;
        let choi = two_copy_trace_choi_embedded(d)?;
        let eigs = hermitian_eig(&choi.matrix)?.eigenvalues;
        for (k, &lambda) in eigs.iter().enumerate() {
            let expect = if k < d {
                (df + 1.0) / 2.0
            } else if k < 2 * d {
                (df - 1.0) / 2.0
            } else {
                0.0
            };
            worst_eig = worst_eig.max((lambda - expect).abs());
        }
    }
    out.push(InvariantResult::new(suite, "two-copy-eigenvalues", worst_eig, 1e-9));

    // Time-reversal duality between cloning and partial trace (compressed
    // bases); this is the check the fault injection must defeat.
    let mut worst_dual = 0.0_f64;
    for (n, m) in [(1usize, 2usize), (1, 3), (2, 3)] {
        let clone_choi = choi_of(&ChannelSpec::UniversalCloning { d: 2, copies_in: n, copies_out: m })?;
        let clone_choi = perturbed(&clone_choi, opts.perturb_choi, &mut rng);
        let trace_choi = choi_of(&ChannelSpec::SymmetricTrace { d: 2, copies_in: m, copies_out: n })?;
        let scale = sym_dim(2, n)? as f64 / sym_dim(2, m)? as f64;
        let swapped = trace_choi
            .matrix
            .swap_factors(trace_choi.d_out, trace_choi.d_in)
            .scale_re(scale);
        worst_dual = worst_dual.max(clone_choi.matrix.dist(&swapped));
    }
    out.push(InvariantResult::new(suite, "clone-trace-duality", worst_dual, 1e-9));
    Ok(out)
}

fn causality_suite(opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    let suite = "causality";
    let mut rng = rng_for(opts, 4);
    let mut out = Vec::new();

    // Closed forms through the full covariant pipeline.
    let mut worst_closed = 0.0_f64;
    let closed: Vec<ChannelSpec> = vec![
        ChannelSpec::Identity { d: 2 },
        ChannelSpec::Identity { d: 3 },
        ChannelSpec::IdealClassical { d: 2 },
        ChannelSpec::IdealClassical { d: 4 },
        ChannelSpec::Estimation { d: 2 },
        ChannelSpec::UniversalNot { d: 2 },
        ChannelSpec::SymmetricTrace { d: 2, copies_in: 3, copies_out: 1 },
        ChannelSpec::UniversalCloning { d: 2, copies_in: 1, copies_out: 2 },
    ];
    for spec in &closed {
        let expect = analytic_p_max(spec)?.ok_or_else(|| {
            Error::Contract("catalog channel missing an analytic value".into())
        })?;
        let (_, cert) = solve_channel(spec, opts.seed)?;
        worst_closed = worst_closed.max((cert.p_max - expect).abs());
    }
    out.push(InvariantResult::new(suite, "closed-form-p-max", worst_closed, 1e-9));

    // Generic numeric path agrees with the analytic path.
    let mut worst_generic = 0.0_f64;
    for spec in [ChannelSpec::Identity { d: 2 }, ChannelSpec::Estimation { d: 2 }] {
        let expect = analytic_p_max(&spec)?.unwrap();
        let choi = choi_of(&spec)?;
        let cert = max_probability_generic(
            &choi,
            &SolverOptions { seed: opts.seed, ..SolverOptions::default() },
        )?;
        worst_generic = worst_generic.max((cert.p_max - expect).abs());
    }
    out.push(InvariantResult::new(suite, "generic-solver-agreement", worst_generic, 1e-6));

    // Certificate feasibility: rho0 (x) I - p C >= 0. The fault injection
    // perturbs the Choi after the certificate was computed, so this check
    // must then fail.
    let mut worst_feas = 0.0_f64;
    for spec in &closed {
        let (choi, cert) = solve_channel(spec, opts.seed)?;
        let choi = perturbed(&choi, opts.perturb_choi, &mut rng);
        let residual = feasibility_residual(&choi, cert.rho0.matrix(), cert.p_max)?;
        worst_feas = worst_feas.max((-residual).max(0.0));
    }
    out.push(InvariantResult::new(suite, "certificate-feasibility", worst_feas, 1e-8));

    // Universal lower bounds hold for solved channels, including the
    // strengthened bounds for classical and measure-and-prepare families.
    let mut worst_lower = 0.0_f64;
    let mut lower_specs = closed.clone();
    for _ in 0..3 {
        lower_specs.push(random_kraus_channel(2, 2, 3, &mut rng)?);
        lower_specs.push(random_mp_channel(2, 2, 3, &mut rng)?);
    }
    for spec in &lower_specs {
        let (_, cert) = solve_channel(spec, opts.seed)?;
        let report = verify_lower_bounds(spec, &cert)?;
        worst_lower = worst_lower.max((-report.margin).max(0.0));
    }
    out.push(InvariantResult::new(suite, "universal-lower-bounds", worst_lower, 1e-9));

    // p = 1 exactly for erasure channels, and the classifier recognizes them.
    let mut worst_erasure = 0.0_f64;
    for _ in 0..5 {
        let rho0 = QuantumState::new(random_density(&mut rng, 2))?;
        let spec = ChannelSpec::Erasure { rho0, input_dim: 3 };
        let (choi, cert) = solve_channel(&spec, opts.seed)?;
        worst_erasure = worst_erasure.max((cert.p_max - 1.0).abs());
        if !erasure_classifier(&choi, 1e-8)? {
            worst_erasure = worst_erasure.max(1.0);
        }
    }
    // Non-erasure channels must classify false.
    for spec in [ChannelSpec::Identity { d: 2 }, ChannelSpec::IdealClassical { d: 3 }] {
        if erasure_classifier(&choi_of(&spec)?, 1e-8)? {
            worst_erasure = worst_erasure.max(1.0);
        }
    }
    out.push(InvariantResult::new(suite, "erasure-iff-p-one", worst_erasure, 1e-9));
    Ok(out)
}

fn protocol_suite(opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    let suite = "protocol";
    let mut out = Vec::new();

    let mut worst_induced = 0.0_f64;
    let mut worst_sum = 0.0_f64;
    let specs: Vec<ChannelSpec> = vec![
        ChannelSpec::Identity { d: 2 },
        ChannelSpec::SymmetricTrace { d: 2, copies_in: 2, copies_out: 1 },
        ChannelSpec::Estimation { d: 2 },
    ];
    for spec in &specs {
        let (choi, cert) = solve_channel(spec, opts.seed)?;
        let protocol = realize(&choi, cert.p_max, &cert.rho0)?;
        let success = induced_choi(&protocol, protocol.success_outcome)?;
        let target = choi.matrix.scale_re(cert.p_max);
        worst_induced = worst_induced
            .max(success.matrix.dist(&target) / target.frob_norm().max(1.0));

        let mut sum = ComplexMatrix::zeros(success.matrix.rows(), success.matrix.cols());
        for outcome in 0..protocol.povm.elements.len() {
            sum = &sum + &induced_choi(&protocol, outcome)?.matrix;
        }
        let expect = kron(cert.rho0.matrix(), &ComplexMatrix::identity(choi.d_in))?;
        worst_sum = worst_sum.max(sum.dist(&expect));
    }
    out.push(InvariantResult::new(suite, "induced-success-choi", worst_induced, 1e-9));
    out.push(InvariantResult::new(suite, "outcome-sum-completeness", worst_sum, 1e-8));
    Ok(out)
}

fn infogame_suite(opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    let suite = "infogame";
    let mut out = Vec::new();

    // Copy-game statistical information bounds for small N, M.
    let mut worst_bound = 0.0_f64;
    for d in [2usize, 3] {
        for n in 1..=4usize {
            for m in 1..=4usize {
                let spec = if m <= n {
                    ChannelSpec::SymmetricTrace { d, copies_in: n, copies_out: m }
                } else {
                    ChannelSpec::UniversalCloning { d, copies_in: n, copies_out: m }
                };
                let p = analytic_p_max(&spec)?.unwrap();
                let cap = 1.0 / sym_dim(d, m.min(n))? as f64;
                worst_bound = worst_bound.max((p - cap).max(0.0));
            }
        }
    }
    out.push(InvariantResult::new(suite, "copy-game-bounds", worst_bound, 1e-12));

    // Lottery-game equality for the ideal classical channel.
    let mut worst_lottery = 0.0_f64;
    for d in [2usize, 3, 4] {
        let spec = ChannelSpec::IdealClassical { d };
        let game = PayoffGame::Discrete(lottery_game(d)?);
        let (_, cert) = solve_channel(&spec, opts.seed)?;
        let report = information_bound_check(&spec, &game, &cert)?;
        worst_lottery = worst_lottery
            .max((report.e_ave - d as f64).abs())
            .max((f_pi(&game) - 1.0).abs())
            .max((report.bound - cert.p_max).abs());
        if !report.satisfied {
            worst_lottery = worst_lottery.max(1.0);
        }
    }
    out.push(InvariantResult::new(suite, "lottery-equality", worst_lottery, 1e-9));

    // Continuous symmetric game evaluates to the exact closed forms.
    let trace_spec = ChannelSpec::SymmetricTrace { d: 2, copies_in: 3, copies_out: 1 };
    let e = expected_payoff(&trace_spec, &PayoffGame::ContinuousSymmetric)?;
    out.push(InvariantResult::new(
        suite,
        "continuous-game-payoff",
        (e - 2.0).abs(),
        1e-12,
    ));

    // Gap to the classical limit decreases monotonically in N.
    let rows = asymptotic_convergence_report(2, 1, 8)?;
    let mut worst_gap = 0.0_f64;
    for pair in rows.windows(2) {
        worst_gap = worst_gap.max((pair[1].gap - pair[0].gap).max(0.0));
        worst_gap = worst_gap.max((pair[1].choi_distance - pair[0].choi_distance).max(0.0));
    }
    out.push(InvariantResult::new(suite, "asymptotic-gap-monotone", worst_gap, 0.0));
    Ok(out)
}

fn mp_gamma_suite(opts: &VerifyOptions) -> Result<Vec<InvariantResult>> {
    let suite = "mp-gamma";
    let mut rng = rng_for(opts, 7);
    let mut worst = 0.0_f64;
    for k in 0..opts.mp_channels {
        let d_in = 2 + k % 3;
        let d_out = 2 + (k / 3) % 3;
        let outcomes = 2 + k % 4;
        let spec = random_mp_channel(d_in, d_out, outcomes, &mut rng)?;
        let choi = choi_of(&spec)?;
        worst = worst.max(choi.max_eigenvalue()? - 1.0);
    }
    Ok(vec![InvariantResult::new(
        suite,
        "mp-gamma-max-eigenvalue",
        worst.max(0.0),
        1e-8,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_by_default() {
        let opts = VerifyOptions {
            mp_channels: 40,
            ..VerifyOptions::default()
        };
        let results = run_all(&opts).unwrap();
        assert!(results.len() >= 15);
        for r in &results {
            assert!(r.passed, "{}/{} residual {:.3e} > {:.3e}", r.suite, r.name, r.residual, r.tolerance);
        }
        let suites: std::collections::BTreeSet<_> =
            results.iter().map(|r| r.suite.clone()).collect();
        assert_eq!(suites.len(), SUITES.len());
    }

    #[test]
    fn fault_injection_breaks_duality_and_feasibility() {
        let opts = VerifyOptions {
            perturb_choi: 1e-3,
            mp_channels: 1,
            ..VerifyOptions::default()
        };
        let channels = run_suite("channels", &opts).unwrap();
        let duality = channels
            .iter()
            .find(|r| r.name == "clone-trace-duality")
            .unwrap();
        assert!(!duality.passed, "perturbed duality unexpectedly passed");

        let causality = run_suite("causality", &opts).unwrap();
        let feas = causality
            .iter()
            .find(|r| r.name == "certificate-feasibility")
            .unwrap();
        assert!(!feas.passed, "perturbed feasibility unexpectedly passed");

        // Invariants that do not involve the perturbed operator still pass.
        for r in channels.iter().filter(|r| r.name != "clone-trace-duality") {
            assert!(r.passed, "{} failed under fault injection", r.name);
        }
    }

    #[test]
    fn mp_gamma_suite_respects_channel_count() {
        let opts = VerifyOptions {
            mp_channels: 200,
            ..VerifyOptions::default()
        };
        let results = run_suite("mp-gamma", &opts).unwrap();
        assert_eq!(results.len(), 1);
        assert!(results[0].passed, "gamma residual {:.3e}", results[0].residual);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", &VerifyOptions::default()).is_err());
    }

    #[test]
    fn results_are_deterministic_for_a_seed() {
        let opts = VerifyOptions {
            seed: 11,
            mp_channels: 10,
            ..VerifyOptions::default()
        };
        let a = run_suite("mp-gamma", &opts).unwrap();
        let b = run_suite("mp-gamma", &opts).unwrap();
        assert_eq!(a[0].residual.to_bits(), b[0].residual.to_bits());
    }
}
