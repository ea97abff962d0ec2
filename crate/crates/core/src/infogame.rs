//! Statistical information bounds: communication-game payoffs, the bound
//! p <= f_pi / E_ave, its entanglement-assisted variant, and the
//! asymptotic-limit checks for the copy channels.

use crate::causality::{analytic_p_max, CausalityCertificate};
use crate::channels::{choi_of, ChannelSpec, ChoiOperator, Povm, QuantumState};
use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace, ComplexMatrix, C64, ZERO};
use crate::symmetric::{multinomial, sym_dim, symmetric_space};

/// A communication game played through a channel.
#[derive(Debug, Clone)]
pub enum PayoffGame {
    Discrete(DiscreteGame),
    /// Haar-distributed pure-state-copy encodings with a delta payoff. Not
    /// discretized: its average payoff and f_pi use the exact
    /// symmetric-subspace evaluations (E = d_+^(M) for the trace channel,
    /// E = d_+^(N) for cloning; f_pi = 1).
    ContinuousSymmetric,
}

/// Finite game: encode message i as `encodings[i]` (on H_in (x) H_R), decode
/// with `decoding` (on H_out (x) H_R); `ref_dim` = 1 means no reference.
#[derive(Debug, Clone)]
pub struct DiscreteGame {
    pub encodings: Vec<QuantumState>,
    pub ref_dim: usize,
    pub prior: Vec<f64>,
    /// payoff[i][j] for encoded message i and decoded outcome j.
    pub payoff: Vec<Vec<f64>>,
    pub decoding: Povm,
}

impl DiscreteGame {
    pub fn validate(&self) -> Result<()> {
        let n = self.encodings.len();
        if n == 0 || self.prior.len() != n || self.payoff.len() != n {
            return Err(Error::Contract("game shape mismatch".into()));
        }
        let total: f64 = self.prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("prior sums to {total}")));
        }
        let outcomes = self.decoding.elements.len();
        if self.payoff.iter().any(|row| row.len() != outcomes) {
            return Err(Error::Contract("payoff columns != decoding outcomes".into()));
        }
        if self
            .payoff
            .iter()
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(Error::Contract("payoff not finite".into()));
        }
        self.decoding.validate()
    }
}

/// Outcome of checking one information bound against a certificate.
#[derive(Debug, Clone)]
pub struct GameReport {
    pub e_ave: f64,
    pub f_pi: f64,
    pub bound: f64,
    pub p_max: f64,
    pub satisfied: bool,
}

/// Average expected payoff E_ave(f) = sum_i pi_i sum_j f(i,j) Tr[C(rho_i) P_j].
pub fn expected_payoff(spec: &ChannelSpec, game: &PayoffGame) -> Result<f64> {
    match game {
        PayoffGame::Discrete(g) => {
            g.validate()?;
            let choi = choi_of(spec)?;
            let mut total = 0.0;
            for (i, rho) in g.encodings.iter().enumerate() {
                let out = choi.apply_tensor_ref(rho.matrix(), g.ref_dim);
                for (j, p) in g.decoding.elements.iter().enumerate() {
                    total += g.prior[i] * g.payoff[i][j] * p.matmul(&out).trace().re;
                }
            }
            Ok(total)
        }
        PayoffGame::ContinuousSymmetric => match spec {
            ChannelSpec::SymmetricTrace { d, copies_out, .. } => {
                Ok(sym_dim(*d, *copies_out)? as f64)
            }
            ChannelSpec::UniversalCloning { d, copies_in, .. } => {
                Ok(sym_dim(*d, *copies_in)? as f64)
            }
            _ => Err(Error::Spec(
                "continuous symmetric game only applies to copy channels".into(),
            )),
        },
    }
}

/// f_pi = max_j sum_i pi_i f(i,j); exactly 1 for the continuous games.
pub fn f_pi(game: &PayoffGame) -> f64 {
    match game {
        PayoffGame::Discrete(g) => {
            let outcomes = g.decoding.elements.len();
            (0..outcomes)
                .map(|j| {
                    g.prior
                        .iter()
                        .zip(&g.payoff)
                        .map(|(pi, row)| pi * row[j])
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }
        PayoffGame::ContinuousSymmetric => 1.0,
    }
}

/// Check p_max <= f_pi / E_ave for a witness game.
pub fn information_bound_check(
    spec: &ChannelSpec,
    game: &PayoffGame,
    cert: &CausalityCertificate,
) -> Result<GameReport> {
    let e_ave = expected_payoff(spec, game)?;
    let f = f_pi(game);
    if e_ave <= 0.0 {
        return Err(Error::Numeric("nonpositive average payoff".into()));
    }
    let bound = f / e_ave;
    Ok(GameReport {
        e_ave,
        f_pi: f,
        bound,
        p_max: cert.p_max,
        satisfied: cert.p_max <= bound + 1e-9,
    })
}

/// Entanglement-assisted bound p <= E^(R)_ave / E^(SR)_ave, where E^(SR)
/// plays the game through the channel (reference sent ideally) and E^(R)
/// replaces the channel output by the erasure state rho0.
pub fn assisted_bound(
    spec: &ChannelSpec,
    game: &DiscreteGame,
    cert: &CausalityCertificate,
) -> Result<GameReport> {
    game.validate()?;
    let e_sr = expected_payoff(spec, &PayoffGame::Discrete(game.clone()))?;
    let d_in = spec.input_dim()?;
    let mut e_r = 0.0;
    for (i, rho) in game.encodings.iter().enumerate() {
        let ref_marginal = partial_trace(rho.matrix(), &[d_in, game.ref_dim], &[1])?;
        let replaced = kron(cert.rho0.matrix(), &ref_marginal)?;
        for (j, p) in game.decoding.elements.iter().enumerate() {
            e_r += game.prior[i] * game.payoff[i][j] * p.matmul(&replaced).trace().re;
        }
    }
    if e_sr <= 0.0 {
        return Err(Error::Numeric("nonpositive assisted payoff".into()));
    }
    let bound = e_r / e_sr;
    Ok(GameReport {
        e_ave: e_sr,
        f_pi: e_r,
        bound,
        p_max: cert.p_max,
        satisfied: cert.p_max <= bound + 1e-9,
    })
}

/// The lottery game for a d-level channel: basis-state encodings, uniform
/// prior, payoff d*delta_{ij}, basis-projector decoding.
pub fn lottery_game(d: usize) -> Result<DiscreteGame> {
    let encodings = (0..d).map(|i| QuantumState::basis_state(d, i)).collect();
    let prior = vec![1.0 / d as f64; d];
    let payoff = (0..d)
        .map(|i| (0..d).map(|j| if i == j { d as f64 } else { 0.0 }).collect())
        .collect();
    let elements = (0..d)
        .map(|i| {
            ComplexMatrix::from_fn(d, d, |r, c| {
                if r == i && c == i {
                    C64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            })
        })
        .collect();
    let labels = (0..d).map(|i| format!("guess{i}")).collect();
    Ok(DiscreteGame {
        encodings,
        ref_dim: 1,
        prior,
        payoff,
        decoding: Povm::new(elements, labels)?,
    })
}

/// The Bell-state game for a qubit channel with a qubit reference: four Bell
/// encodings, Bell-basis decoding, delta payoff.
pub fn bell_game() -> Result<DiscreteGame> {
    let mut bells: Vec<ComplexMatrix> = Vec::with_capacity(4);
    let amp = 1.0 / 2.0_f64.sqrt();
    // (|00> + |11>)/sqrt2, (|00> - |11>)/sqrt2, (|01> + |10>)/sqrt2, (|01> - |10>)/sqrt2
    let coords: [[(usize, f64); 2]; 4] = [
        [(0, amp), (3, amp)],
        [(0, amp), (3, -amp)],
        [(1, amp), (2, amp)],
        [(1, amp), (2, -amp)],
    ];
    for spec in &coords {
        let mut v = ComplexMatrix::zeros(4, 1);
        for &(idx, a) in spec {
            v[(idx, 0)] = C64::new(a, 0.0);
        }
        bells.push(v);
    }
    let encodings: Result<Vec<QuantumState>> =
        bells.iter().map(QuantumState::pure).collect();
    let elements = bells
        .iter()
        .map(|v| crate::linalg::outer(v, v))
        .collect();
    let labels = (0..4).map(|i| format!("bell{i}")).collect();
    let payoff = (0..4)
        .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(DiscreteGame {
        encodings: encodings?,
        ref_dim: 2,
        prior: vec![0.25; 4],
        payoff,
        decoding: Povm::new(elements, labels)?,
    })
}

/// Compressed Choi operator of the generalized estimation channel from N to
/// M copies (estimate the state from N copies, prepare M fresh copies), the
/// N -> infinity limit of the symmetrized trace channel. Built from the
/// occupation-number overlap <u_a (x) v_b | c> = sqrt(m_a m_b / m_c) for
/// occ(a) + occ(b) = occ(c), avoiding any d^(M+N)-dimensional operator.
pub fn estimation_choi_compressed(d: usize, n: usize, m: usize) -> Result<ChoiOperator> {
    let s_out = symmetric_space(d, m)?;
    let s_in = symmetric_space(d, n)?;
    let s_joint = symmetric_space(d, m + n)?;
    let rows = s_out.dim * s_in.dim;
    let mut t = ComplexMatrix::zeros(rows, s_joint.dim);
    for (a, occ_a) in s_out.occupations.iter().enumerate() {
        let m_a = multinomial(m, occ_a) as f64;
        for (b, occ_b) in s_in.occupations.iter().enumerate() {
            let m_b = multinomial(n, occ_b) as f64;
            let joint: Vec<usize> = occ_a.iter().zip(occ_b).map(|(x, y)| x + y).collect();
            if let Some(c) = s_joint.occupations.iter().position(|o| *o == joint) {
                let m_c = multinomial(m + n, &joint) as f64;
                t[(a * s_in.dim + b, c)] = C64::new((m_a * m_b / m_c).sqrt(), 0.0);
            }
        }
    }
    let gram = t.matmul(&t.dagger());
    let scale = s_in.dim as f64 / s_joint.dim as f64;
    let matrix = gram.partial_transpose_b(s_out.dim, s_in.dim).scale_re(scale);
    Ok(ChoiOperator::new(matrix, s_out.dim, s_in.dim))
}

/// One row of the asymptotic-convergence table for fixed (d, M).
#[derive(Debug, Clone)]
pub struct AsymptoticRow {
    pub n: usize,
    pub p: f64,
    /// 1/d_+^(M) - p, the distance to the information-bound ceiling.
    pub gap: f64,
    /// Frobenius distance between the compressed trace and estimation Chois.
    pub choi_distance: f64,
}

/// Table of p+(N->M), its gap to 1/d_+^(M), and the Choi-operator distance
/// to the estimation channel, for N = M..n_max.
pub fn asymptotic_convergence_report(d: usize, m: usize, n_max: usize) -> Result<Vec<AsymptoticRow>> {
    let ceiling = 1.0 / sym_dim(d, m)? as f64;
    let mut rows = Vec::new();
    for n in m..=n_max {
        let spec = ChannelSpec::SymmetricTrace { d, copies_in: n, copies_out: m };
        let p = analytic_p_max(&spec)?.expect("copy channel has a closed form");
        let trace = choi_of(&spec)?;
        let est = estimation_choi_compressed(d, n, m)?;
        rows.push(AsymptoticRow {
            n,
            p,
            gap: ceiling - p,
            choi_distance: trace.matrix.dist(&est.matrix),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::solve_channel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lottery_game_on_classical_channel() {
        for d in 2..=4usize {
            let spec = ChannelSpec::IdealClassical { d };
            let game = PayoffGame::Discrete(lottery_game(d).unwrap());
            // Direct-sum oracle: the channel transmits basis states
            // faithfully, so E = sum_i (1/d) * d * 1 = d.
            let e = expected_payoff(&spec, &game).unwrap();
            assert!((e - d as f64).abs() < 1e-12);
            assert!((f_pi(&game) - 1.0).abs() < 1e-12);
            let (_, cert) = solve_channel(&spec, 3).unwrap();
            let report = information_bound_check(&spec, &game, &cert).unwrap();
            assert!(report.satisfied);
            // Lottery equality: bound = 1/d = p_max.
            assert!((report.bound - 1.0 / d as f64).abs() < 1e-12);
            assert!((report.p_max - report.bound).abs() < 1e-9);
        }
    }

    #[test]
    fn erasure_channel_scores_unit_payoff() {
        let d = 3;
        let rho0 = QuantumState::maximally_mixed(d);
        let spec = ChannelSpec::Erasure { rho0, input_dim: d };
        let game = PayoffGame::Discrete(lottery_game(d).unwrap());
        let e = expected_payoff(&spec, &game).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_pi_examples() {
        let g = lottery_game(3).unwrap();
        assert!((f_pi(&PayoffGame::Discrete(g)) - 1.0).abs() < 1e-12);
        assert!((f_pi(&PayoffGame::ContinuousSymmetric) - 1.0).abs() < 1e-15);
        // Single message: f_pi = max_j f(0, j).
        let mut single = lottery_game(2).unwrap();
        single.encodings.truncate(1);
        single.prior = vec![1.0];
        single.payoff = vec![vec![0.3, 1.7]];
        assert!((f_pi(&PayoffGame::Discrete(single)) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn copy_channel_bounds_hold() {
        for d in 2..=3usize {
            for n in 1..=6usize {
                for m in 1..=6usize {
                    let spec = if m <= n {
                        ChannelSpec::SymmetricTrace { d, copies_in: n, copies_out: m }
                    } else {
                        ChannelSpec::UniversalCloning { d, copies_in: n, copies_out: m }
                    };
                    let p = analytic_p_max(&spec).unwrap().unwrap();
                    let e = expected_payoff(&spec, &PayoffGame::ContinuousSymmetric).unwrap();
                    let bound = f_pi(&PayoffGame::ContinuousSymmetric) / e;
                    let expect_ceiling = if m <= n {
                        1.0 / sym_dim(d, m).unwrap() as f64
                    } else {
                        1.0 / sym_dim(d, n).unwrap() as f64
                    };
                    assert!((bound - expect_ceiling).abs() < 1e-12);
                    assert!(p <= bound + 1e-12, "d={d} N={n} M={m}: {p} vs {bound}");
                }
            }
        }
        // Pinned example: trace 4 -> 1 at d=2 gives p = 4/10 <= 1/2.
        let spec = ChannelSpec::SymmetricTrace { d: 2, copies_in: 4, copies_out: 1 };
        assert!((analytic_p_max(&spec).unwrap().unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn bell_game_assisted_bound_tight_for_identity() {
        let spec = ChannelSpec::Identity { d: 2 };
        let (_, cert) = solve_channel(&spec, 5).unwrap();
        let game = bell_game().unwrap();
        let report = assisted_bound(&spec, &game, &cert).unwrap();
        // Direct expectation oracle over the 4 Bell states: E^(SR) = 1 (the
        // ideal channel preserves each Bell state), E^(R) = 1/4.
        assert!((report.e_ave - 1.0).abs() < 1e-10);
        assert!((report.f_pi - 0.25).abs() < 1e-10);
        assert!((report.bound - 0.25).abs() < 1e-10);
        assert!(report.satisfied);
        assert!((report.p_max - 0.25).abs() < 1e-10);
    }

    #[test]
    fn product_reference_reduces_to_unassisted_value() {
        // Embed the lottery game with an uncorrelated qubit reference; the
        // assisted bound must equal the unassisted one (1/d).
        let d = 2;
        let spec = ChannelSpec::IdealClassical { d };
        let (_, cert) = solve_channel(&spec, 5).unwrap();
        let base = lottery_game(d).unwrap();
        let anchor = QuantumState::basis_state(2, 0);
        let encodings: Vec<QuantumState> = base
            .encodings
            .iter()
            .map(|r| {
                QuantumState::new(kron(r.matrix(), anchor.matrix()).unwrap()).unwrap()
            })
            .collect();
        let elements = base
            .decoding
            .elements
            .iter()
            .map(|p| kron(p, &ComplexMatrix::identity(2)).unwrap())
            .collect();
        let labels = base.decoding.labels.clone();
        let game = DiscreteGame {
            encodings,
            ref_dim: 2,
            prior: base.prior.clone(),
            payoff: base.payoff.clone(),
            decoding: Povm::new(elements, labels).unwrap(),
        };
        let assisted = assisted_bound(&spec, &game, &cert).unwrap();
        let unassisted =
            information_bound_check(&spec, &PayoffGame::Discrete(base), &cert).unwrap();
        assert!((assisted.bound - unassisted.bound).abs() < 1e-12);
        assert!((assisted.bound - 0.5).abs() < 1e-12);
    }

    #[test]
    fn erasure_assisted_payoffs_coincide() {
        let rho0 = QuantumState::maximally_mixed(2);
        let spec = ChannelSpec::Erasure { rho0, input_dim: 2 };
        let (_, cert) = solve_channel(&spec, 5).unwrap();
        let game = bell_game().unwrap();
        let report = assisted_bound(&spec, &game, &cert).unwrap();
        assert!((report.e_ave - report.f_pi).abs() < 1e-10);
        assert!((report.bound - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expected_payoff_linear_in_prior_and_payoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let d = 2;
        let spec = ChannelSpec::IdealClassical { d };
        let base = lottery_game(d).unwrap();
        let e_base = expected_payoff(&spec, &PayoffGame::Discrete(base.clone())).unwrap();
        for _ in 0..10 {
            // Payoff linearity: scale + shift by a random payoff delta.
            let alpha: f64 = rng.gen_range(0.1..2.0);
            let mut scaled = base.clone();
            for row in &mut scaled.payoff {
                for v in row {
                    *v *= alpha;
                }
            }
            let e_scaled = expected_payoff(&spec, &PayoffGame::Discrete(scaled)).unwrap();
            assert!((e_scaled - alpha * e_base).abs() < 1e-10);

            // Prior linearity: a convex mixture of two priors mixes payoffs.
            let w: f64 = rng.gen_range(0.0..1.0);
            let prior_a = vec![0.7, 0.3];
            let prior_b = vec![0.2, 0.8];
            let mix: Vec<f64> = prior_a
                .iter()
                .zip(&prior_b)
                .map(|(a, b)| w * a + (1.0 - w) * b)
                .collect();
            let eval = |prior: Vec<f64>| {
                let mut g = base.clone();
                g.prior = prior;
                expected_payoff(&spec, &PayoffGame::Discrete(g)).unwrap()
            };
            let lhs = eval(mix);
            let rhs = w * eval(prior_a) + (1.0 - w) * eval(prior_b);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn estimation_choi_reduces_to_single_copy_catalog_form() {
        for d in 2..=3usize {
            let general = estimation_choi_compressed(d, 1, 1).unwrap();
            let catalog = choi_of(&ChannelSpec::Estimation { d }).unwrap();
            assert!(
                general.matrix.dist(&catalog.matrix) < 1e-12,
                "d={d}: dist {}",
                general.matrix.dist(&catalog.matrix)
            );
        }
    }

    #[test]
    fn estimation_choi_is_a_valid_channel() {
        for (d, n, m) in [(2usize, 3usize, 1usize), (2, 4, 2), (3, 2, 1)] {
            estimation_choi_compressed(d, n, m).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn asymptotic_report_matches_closed_forms() {
        let rows = asymptotic_convergence_report(2, 1, 12).unwrap();
        let p_of = |n: usize| rows.iter().find(|r| r.n == n).unwrap().p;
        assert!((p_of(1) - 0.25).abs() < 1e-12);
        assert!((p_of(2) - 1.0 / 3.0).abs() < 1e-12);
        assert!((p_of(4) - 0.4).abs() < 1e-12);
        for r in &rows {
            let expect = 1.0 / (2.0 * (r.n as f64 + 1.0));
            assert!((r.gap - expect).abs() < 1e-12, "gap at N={}", r.n);
        }
        for pair in rows.windows(2) {
            assert!(pair[1].gap < pair[0].gap, "gap not decreasing");
            assert!(
                pair[1].choi_distance < pair[0].choi_distance,
                "Choi distance not decreasing at N={}",
                pair[1].n
            );
        }
        // The Choi distance shrinks slowly (roughly as 1/sqrt(N)); check that the
        // final value has dropped well below the single-copy starting point.
        let first = rows.first().unwrap().choi_distance;
        let last = rows.last().unwrap().choi_distance;
        assert!(last < 0.5 * first, "distance {last} vs initial {first}");

        let rows3 = asymptotic_convergence_report(3, 1, 6).unwrap();
        assert!((rows3[0].p - 1.0 / 9.0).abs() < 1e-12);
        for r in &rows3 {
            let expect = 2.0 / (3.0 * (2.0 + r.n as f64));
            assert!((r.gap - expect).abs() < 1e-12);
        }
    }
}
