//! Realization of the achievability construction: build an explicit
//! generalized teleportation protocol (resource state Psi on ancilla (x)
//! output, POVM on input (x) ancilla) from a feasible (p, rho0, C), verify
//! it algebraically through the induced Choi operators, and run Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{fidelity, ChoiOperator, Povm, QuantumState};
use crate::error::{Error, Result};
use crate::linalg::{double_ket, hermitian_eig, kron, ComplexMatrix, ZERO};
use crate::tol::Tol;

/// Generalized teleportation protocol: prepare `psi` on H_A (x) H_out at the
/// early time, measure `povm` on H_in (x) H_A at the late time; the
/// `success_outcome` element heralds the simulation.
#[derive(Debug, Clone)]
pub struct TeleportationProtocol {
    /// Unit column vector on H_A (x) H_out (ancilla factor first).
    pub psi: ComplexMatrix,
    pub d_ancilla: usize,
    pub d_out: usize,
    pub d_in: usize,
    /// POVM on H_in (x) H_A (input factor first).
    pub povm: Povm,
    pub success_outcome: usize,
    pub p_declared: f64,
}

/// Monte Carlo record for one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationStats {
    pub trials: u64,
    pub successes: u64,
    pub conditional_output_fidelity_min: f64,
    pub seed: u64,
}

impl SimulationStats {
    pub fn frequency(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Standard deviation of the success frequency estimator at probability p.
    pub fn sigma(p: f64, trials: u64) -> f64 {
        (p * (1.0 - p) / trials as f64).sqrt()
    }
}

const SHARD: u64 = 1024;

/// Build the protocol achieving probability p for the Choi operator C with
/// witness rho0: the success and failure operations have Choi operators
/// E0 = pC and E1 = rho0 (x) I - pC.
pub fn realize(choi: &ChoiOperator, p: f64, rho0: &QuantumState) -> Result<TeleportationProtocol> {
    let tol = Tol::default();
    if rho0.dim() != choi.d_out {
        return Err(Error::Dimension("rho0 must live on the output space".into()));
    }
    let e0 = choi.matrix.scale_re(p).hermitize();
    let e1 = (&kron(rho0.matrix(), &ComplexMatrix::identity(choi.d_in))? - &e0).hermitize();
    let min_e1 = hermitian_eig(&e1)?.min();
    if min_e1 < -1e-8 * e1.frob_norm().max(1.0) {
        return Err(Error::Contract(format!(
            "(p, rho0) infeasible: residual eigenvalue {min_e1:.3e}"
        )));
    }

    // Purify rho0 = W W^dag with the ancilla as its support space.
    let eig = hermitian_eig(rho0.matrix())?;
    let support: Vec<usize> = (0..rho0.dim())
        .filter(|&k| eig.eigenvalues[k] > 1e-10)
        .collect();
    let d_a = support.len();
    let d_out = choi.d_out;
    let d_in = choi.d_in;
    // W: d_out x d_A with columns sqrt(lambda_k) u_k; W^+: its pseudo-inverse.
    let mut w = ComplexMatrix::zeros(d_out, d_a);
    let mut w_pinv = ComplexMatrix::zeros(d_a, d_out);
    for (col, &k) in support.iter().enumerate() {
        let root = eig.eigenvalues[k].sqrt();
        for r in 0..d_out {
            w[(r, col)] = eig.eigenvectors[(r, k)] * root;
            w_pinv[(col, r)] = eig.eigenvectors[(r, k)].conj() / root;
        }
    }
    // Resource state Psi = |W^T>> on H_A (x) H_out.
    let psi = double_ket(&w.transpose());
    let norm = psi.frob_norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Numeric(format!("purification norm {norm} != 1")));
    }

    // POVM elements: conjugate each E_i by (W^+ (x) I_in), swap the two
    // factors (ancilla <-> input), and transpose. This inverts the induced-
    // Choi contraction on the support of rho0.
    let lift = kron(&w_pinv, &ComplexMatrix::identity(d_in))?;
    let to_povm = |e: &ComplexMatrix| -> Result<ComplexMatrix> {
        Ok(e.conjugate_by(&lift).swap_factors(d_a, d_in).transpose())
    };
    let f0 = to_povm(&e0)?;
    let mut elements = vec![f0];
    let mut labels = vec!["success".to_string()];
    if e1.frob_norm() > 1e-12 * e0.frob_norm().max(1.0) {
        elements.push(to_povm(&e1)?);
        labels.push("failure".to_string());
    }
    // Completeness fix-up: any deficit (zero when the ancilla equals the
    // support of rho0) is absorbed into the failure outcome.
    let mut sum = ComplexMatrix::zeros(d_in * d_a, d_in * d_a);
    for e in &elements {
        sum = &sum + e;
    }
    let deficit = &ComplexMatrix::identity(d_in * d_a) - &sum;
    if deficit.max_abs() > tol.herm {
        if elements.len() == 1 {
            elements.push(deficit.hermitize());
            labels.push("failure".to_string());
        } else {
            elements[1] = (&elements[1] + &deficit).hermitize();
        }
    }
    let povm = Povm::new(
        elements.iter().map(|e| e.hermitize()).collect(),
        labels,
    )?;
    Ok(TeleportationProtocol {
        psi,
        d_ancilla: d_a,
        d_out,
        d_in,
        povm,
        success_outcome: 0,
        p_declared: p,
    })
}

/// Choi operator (unnormalized) of the quantum operation induced by one
/// POVM outcome, computed by direct contraction of the Born rule — an
/// independent reconstruction, not the inverse of `realize`.
pub fn induced_choi(protocol: &TeleportationProtocol, outcome: usize) -> Result<ChoiOperator> {
    let f = &protocol.povm.elements[outcome];
    let (d_in, d_a, d_out) = (protocol.d_in, protocol.d_ancilla, protocol.d_out);
    let psi = &protocol.psi; // amplitudes Psi[(a, o)]
    let amp = |a: usize, o: usize| psi[(a * d_out + o, 0)];
    let dim = d_out * d_in;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for o in 0..d_out {
        for ic in 0..d_in {
            for op in 0..d_out {
                for icp in 0..d_in {
                    let mut acc = ZERO;
                    for a in 0..d_a {
                        for b in 0..d_a {
                            acc += f[(icp * d_a + a, ic * d_a + b)]
                                * amp(b, o)
                                * amp(a, op).conj();
                        }
                    }
                    m[(o * d_in + ic, op * d_in + icp)] = acc;
                }
            }
        }
    }
    let mut choi = ChoiOperator::new(m.hermitize(), d_out, d_in);
    choi.domain_projector = None;
    Ok(choi)
}

/// Exact outcome probabilities for an input state (Born rule through the
/// induced Choi operators).
pub fn outcome_probabilities(
    protocol: &TeleportationProtocol,
    input: &QuantumState,
) -> Result<Vec<f64>> {
    if input.dim() != protocol.d_in {
        return Err(Error::Dimension("input on the wrong space".into()));
    }
    let mut probs = Vec::with_capacity(protocol.povm.elements.len());
    for i in 0..protocol.povm.elements.len() {
        let e = induced_choi(protocol, i)?;
        probs.push(e.apply_to(input.matrix()).trace().re.clamp(0.0, 1.0));
    }
    Ok(probs)
}

/// Monte Carlo simulation: sample outcomes with Born probabilities in
/// deterministic shards of 1024 trials, one RNG stream per shard, so results
/// are reproducible (and shard-parallelizable) for a fixed seed.
pub fn simulate(
    protocol: &TeleportationProtocol,
    input: &QuantumState,
    trials: u64,
    seed: u64,
    target: Option<&ChoiOperator>,
) -> Result<SimulationStats> {
    let probs = outcome_probabilities(protocol, input)?;
    let p_success = probs[protocol.success_outcome];

    // The conditional output state is computed exactly from the algebra; it
    // is the same for every success trial, so the minimum over trials is a
    // single fidelity against the target channel output C(rho)/Tr[C(rho)].
    let fidelity_min = match (target, p_success > 0.0) {
        (Some(choi), true) => conditional_fidelity_against(protocol, choi, input)?,
        _ => 1.0,
    };

    let mut successes = 0u64;
    let mut done = 0u64;
    let mut shard = 0u64;
    while done < trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard);
        let count = SHARD.min(trials - done);
        for _ in 0..count {
            let x: f64 = rng.gen();
            // Invert the CDF over outcomes.
            let mut acc = 0.0;
            let mut picked = probs.len() - 1;
            for (i, q) in probs.iter().enumerate() {
                acc += q;
                if x < acc {
                    picked = i;
                    break;
                }
            }
            if picked == protocol.success_outcome {
                successes += 1;
            }
        }
        done += count;
        shard += 1;
    }
    Ok(SimulationStats {
        trials,
        successes,
        conditional_output_fidelity_min: fidelity_min,
        seed,
    })
}

/// Minimum fidelity between the success-conditioned output and a target
/// channel output C(rho)/Tr[C(rho)] for a given input.
pub fn conditional_fidelity_against(
    protocol: &TeleportationProtocol,
    choi: &ChoiOperator,
    input: &QuantumState,
) -> Result<f64> {
    let e0 = induced_choi(protocol, protocol.success_outcome)?;
    let raw = e0.apply_to(input.matrix());
    let p = raw.trace().re;
    if p <= 0.0 {
        return Ok(1.0);
    }
    let conditional = raw.scale_re(1.0 / p).hermitize();
    let target_raw = choi.apply_to(input.matrix());
    let target = target_raw
        .scale_re(1.0 / target_raw.trace().re)
        .hermitize();
    fidelity(&conditional, &target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::solve_channel;
    use crate::channels::{choi_of, compressed_copies, ChannelSpec};
    use crate::linalg::{max_entangled, outer, partial_trace};
    use crate::symmetric::haar_unitary;

    fn realized(spec: &ChannelSpec) -> (ChoiOperator, f64, QuantumState, TeleportationProtocol) {
        let (choi, cert) = solve_channel(spec, 11).unwrap();
        let protocol = realize(&choi, cert.p_max, &cert.rho0).unwrap();
        (choi, cert.p_max, cert.rho0, protocol)
    }

    #[test]
    fn induced_success_choi_equals_p_times_c() {
        let specs = [
            ChannelSpec::Identity { d: 2 },
            ChannelSpec::Identity { d: 3 },
            ChannelSpec::SymmetricTrace { d: 2, copies_in: 2, copies_out: 1 },
            ChannelSpec::SymmetricTrace { d: 2, copies_in: 3, copies_out: 1 },
            ChannelSpec::Estimation { d: 2 },
            ChannelSpec::UniversalNot { d: 2 },
        ];
        for spec in &specs {
            let (choi, p, rho0, protocol) = realized(spec);
            let success = induced_choi(&protocol, 0).unwrap();
            let expect = choi.matrix.scale_re(p);
            let rel = success.matrix.dist(&expect) / expect.frob_norm();
            assert!(rel <= 1e-9, "{}: relative deviation {rel:.3e}", spec.family());

            // Completeness: outcomes sum to rho0 (x) I.
            let mut sum = ComplexMatrix::zeros(choi.matrix.rows(), choi.matrix.rows());
            for i in 0..protocol.povm.elements.len() {
                sum = &sum + &induced_choi(&protocol, i).unwrap().matrix;
            }
            let erasure = kron(rho0.matrix(), &ComplexMatrix::identity(choi.d_in)).unwrap();
            assert!(sum.dist(&erasure) <= 1e-8, "{}", spec.family());
        }
    }

    #[test]
    fn failure_choi_is_direct_subtraction() {
        let (choi, p, rho0, protocol) = realized(&ChannelSpec::Identity { d: 2 });
        let failure = induced_choi(&protocol, 1).unwrap();
        let expect = &kron(rho0.matrix(), &ComplexMatrix::identity(choi.d_in)).unwrap()
            - &choi.matrix.scale_re(p);
        assert!(failure.matrix.dist(&expect) < 1e-10);
        let min = hermitian_eig(&failure.matrix).unwrap().min();
        assert!(min >= -1e-10);
    }

    #[test]
    fn identity_success_element_is_bell_projector() {
        let (_, _, _, protocol) = realized(&ChannelSpec::Identity { d: 2 });
        // Psi is maximally entangled on two qubits.
        let reduced = partial_trace(&outer(&protocol.psi, &protocol.psi), &[2, 2], &[1]).unwrap();
        assert!(reduced.dist(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-12);
        // The success element is a Bell projector: rank one, with maximally
        // mixed marginals on both factors. (Which Bell state it is depends on
        // the eigenbasis chosen for the degenerate rho0 = I/2.)
        let f0 = &protocol.povm.elements[0];
        let eigs = hermitian_eig(&f0.hermitize()).unwrap().eigenvalues;
        assert!((eigs[0] - 1.0).abs() < 1e-10 && eigs[1].abs() < 1e-10);
        for keep in [0usize, 1] {
            let marg = partial_trace(f0, &[2, 2], &[keep]).unwrap();
            assert!(marg.dist(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-10);
        }
        // Cross-check that a genuine Bell projector has the same signature.
        let bell = max_entangled(2).scale_re(1.0 / 2.0_f64.sqrt());
        let reference = outer(&bell, &bell);
        assert!((reference.trace().re - 1.0).abs() < 1e-12);
        for keep in [0usize, 1] {
            let marg = partial_trace(&reference, &[2, 2], &[keep]).unwrap();
            assert!(marg.dist(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-12);
        }
    }

    #[test]
    fn psi_marginal_is_rho0() {
        let (_, _, rho0, protocol) =
            realized(&ChannelSpec::SymmetricTrace { d: 2, copies_in: 3, copies_out: 1 });
        let marginal = partial_trace(
            &outer(&protocol.psi, &protocol.psi),
            &[protocol.d_ancilla, protocol.d_out],
            &[1],
        )
        .unwrap();
        assert!(marginal.dist(rho0.matrix()) < 1e-9);
        assert!((protocol.psi.frob_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn erasure_protocol_is_single_outcome() {
        let rho0 = QuantumState::basis_state(2, 0);
        let spec = ChannelSpec::Erasure { rho0: rho0.clone(), input_dim: 2 };
        let choi = choi_of(&spec).unwrap();
        let protocol = realize(&choi, 1.0, &rho0).unwrap();
        assert_eq!(protocol.povm.elements.len(), 1);
        assert!(protocol.povm.elements[0]
            .dist(&ComplexMatrix::identity(protocol.d_in * protocol.d_ancilla))
            < 1e-10);
        let stats = simulate(&protocol, &QuantumState::basis_state(2, 1), 500, 5, Some(&choi)).unwrap();
        assert_eq!(stats.successes, stats.trials);
    }

    #[test]
    fn infeasible_pair_rejected() {
        let choi = choi_of(&ChannelSpec::Identity { d: 2 }).unwrap();
        let rho0 = QuantumState::maximally_mixed(2);
        // p = 1/2 exceeds the bound 1/4.
        assert!(realize(&choi, 0.5, &rho0).is_err());
    }

    #[test]
    fn success_probability_input_independent_for_covariant_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for spec in [
            ChannelSpec::Identity { d: 2 },
            ChannelSpec::Estimation { d: 2 },
            ChannelSpec::UniversalNot { d: 2 },
        ] {
            let (_, p, rho0, protocol) = realized(&spec);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for _ in 0..20 {
                let u = haar_unitary(2, &mut rng);
                let ket = ComplexMatrix::from_fn(2, 1, |i, _| u[(i, 0)]);
                let input = QuantumState::pure(&ket).unwrap();
                let q = outcome_probabilities(&protocol, &input).unwrap()[0];
                lo = lo.min(q);
                hi = hi.max(q);
            }
            assert!(hi - lo <= 1e-9, "{}: spread {}", spec.family(), hi - lo);
            assert!((lo - p).abs() < 1e-9);

            // No signalling to the past: the unconditioned output marginal is
            // rho0 for every input.
            let u = haar_unitary(2, &mut rng);
            let ket = ComplexMatrix::from_fn(2, 1, |i, _| u[(i, 1)]);
            let input = QuantumState::pure(&ket).unwrap();
            let mut marginal = ComplexMatrix::zeros(protocol.d_out, protocol.d_out);
            for i in 0..protocol.povm.elements.len() {
                let e = induced_choi(&protocol, i).unwrap();
                marginal = &marginal + &e.apply_to(input.matrix());
            }
            assert!(marginal.dist(rho0.matrix()) <= 1e-9);
        }
    }

    #[test]
    fn monte_carlo_identity_frequency_and_fidelity() {
        let (choi, p, _, protocol) = realized(&ChannelSpec::Identity { d: 2 });
        let input = QuantumState::basis_state(2, 0);
        let trials = 100_000;
        let stats = simulate(&protocol, &input, trials, 7, Some(&choi)).unwrap();
        let sigma = SimulationStats::sigma(p, trials);
        assert!(
            (stats.frequency() - p).abs() <= 3.0 * sigma,
            "frequency {} vs p {p}",
            stats.frequency()
        );
        let fid = conditional_fidelity_against(&protocol, &choi, &input).unwrap();
        assert!(fid >= 1.0 - 1e-9, "fidelity {fid}");
    }

    #[test]
    fn monte_carlo_three_copy_trace() {
        let spec = ChannelSpec::SymmetricTrace { d: 2, copies_in: 3, copies_out: 1 };
        let (_, p, _, protocol) = realized(&spec);
        assert!((p - 3.0 / 8.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let u = haar_unitary(2, &mut rng);
        let ket = ComplexMatrix::from_fn(2, 1, |i, _| u[(i, 0)]);
        let input = compressed_copies(2, 3, &ket).unwrap();
        let trials = 100_000;
        let stats = simulate(&protocol, &input, trials, 9, None).unwrap();
        let sigma = SimulationStats::sigma(p, trials);
        assert!((stats.frequency() - p).abs() <= 3.0 * sigma);
        // Teleported copy matches the original pure state.
        let choi = choi_of(&spec).unwrap();
        let fid = conditional_fidelity_against(&protocol, &choi, &input).unwrap();
        assert!(fid >= 1.0 - 1e-9);
    }

    #[test]
    fn simulation_reproducible_for_fixed_seed() {
        let (_, _, _, protocol) = realized(&ChannelSpec::Identity { d: 2 });
        let input = QuantumState::basis_state(2, 0);
        let a = simulate(&protocol, &input, 5000, 123, None).unwrap();
        let b = simulate(&protocol, &input, 5000, 123, None).unwrap();
        assert_eq!(a, b);
        let c = simulate(&protocol, &input, 5000, 124, None).unwrap();
        assert_ne!(a.successes, c.successes);
    }
}
