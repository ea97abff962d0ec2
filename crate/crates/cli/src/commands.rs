//! Implementations of the four subcommands.

use std::path::Path;
use std::time::Instant;

use retropast_core::causality::{
    max_probability_generic, solve_channel, CausalityCertificate, SolverOptions,
};
use retropast_core::channels::{ChannelSpec, ChoiOperator, QuantumState};
use retropast_core::protocol::{realize, simulate, SimulationStats};
use retropast_core::tol::MAX_EMBEDDED_DIM;
use retropast_core::verify::{run_all, run_suite, InvariantResult, VerifyOptions};

use crate::jsonfmt::{fmt17, matrix_json, Json};
use crate::specfile::{load_channel, LoadedChannel};
use crate::{resolve_seed, ChannelArgs, CliError, CurveArgs, ProbArgs, SimulateArgs, VerifyArgs};

/// Build a catalog channel spec from the family flags.
fn build_spec(args: &ChannelArgs) -> Result<ChannelSpec, CliError> {
    let family = args
        .family
        .as_deref()
        .ok_or_else(|| CliError::Usage("either --family or --spec-file is required".into()))?;
    let d = args
        .d
        .ok_or_else(|| CliError::Usage("--d is required with --family".into()))?;
    let spec = match family {
        "identity" => ChannelSpec::Identity { d },
        "classical" => ChannelSpec::IdealClassical { d },
        "erasure" => ChannelSpec::Erasure {
            rho0: QuantumState::maximally_mixed(d),
            input_dim: d,
        },
        "estimation" => ChannelSpec::Estimation { d },
        "unot" => ChannelSpec::UniversalNot { d },
        "trace" => ChannelSpec::SymmetricTrace {
            d,
            copies_in: args
                .copies_in
                .ok_or_else(|| CliError::Usage("--N is required for --family trace".into()))?,
            copies_out: args.copies_out.unwrap_or(1),
        },
        "cloning" => ChannelSpec::UniversalCloning {
            d,
            copies_in: args.copies_in.unwrap_or(1),
            copies_out: args
                .copies_out
                .ok_or_else(|| CliError::Usage("--M is required for --family cloning".into()))?,
        },
        other => {
            return Err(CliError::Usage(format!(
                "unknown family '{other}' (expected identity | classical | erasure | \
                 estimation | unot | trace | cloning)"
            )))
        }
    };
    spec.validate()
        .map_err(|e| CliError::Usage(format!("invalid channel parameters: {e}")))?;
    Ok(spec)
}

/// Resolve the channel flags to a Choi operator plus its certificate.
fn solve_from_args(
    args: &ChannelArgs,
    seed: u64,
) -> Result<(ChoiOperator, CausalityCertificate, Vec<(String, Json)>), CliError> {
    let mut params: Vec<(String, Json)> = Vec::new();
    let (choi, cert) = if let Some(path) = &args.spec_file {
        params.push(("spec_file".into(), Json::Str(path.display().to_string())));
        match load_channel(path)? {
            LoadedChannel::Spec(spec) => {
                solve_channel(&spec, seed).map_err(|e| CliError::Numeric(e.to_string()))?
            }
            LoadedChannel::Choi(choi) => {
                let cert = max_probability_generic(
                    &choi,
                    &SolverOptions { seed, ..SolverOptions::default() },
                )
                .map_err(|e| CliError::Numeric(e.to_string()))?;
                (choi, cert)
            }
        }
    } else {
        let spec = build_spec(args)?;
        params.push(("family".into(), Json::Str(spec.family().into())));
        params.push(("d".into(), Json::Int(args.d.unwrap_or(0) as i64)));
        if let Some(n) = args.copies_in {
            params.push(("N".into(), Json::Int(n as i64)));
        }
        if let Some(m) = args.copies_out {
            params.push(("M".into(), Json::Int(m as i64)));
        }
        solve_channel(&spec, seed).map_err(|e| CliError::Numeric(e.to_string()))?
    };
    params.push(("d_out".into(), Json::Int(choi.d_out as i64)));
    params.push(("d_in".into(), Json::Int(choi.d_in as i64)));
    Ok((choi, cert, params))
}

/// Write `payload` to the file if requested, and echo it to stdout.
fn emit(payload: &str, output: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = output {
        std::fs::write(path, payload)
            .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))?;
    }
    println!("{payload}");
    Ok(())
}

pub fn cmd_prob(args: &ProbArgs) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed);
    let start = Instant::now();
    let (choi, cert, params) = solve_from_args(&args.channel, seed)?;
    let wall = start.elapsed().as_secs_f64();

    let payload = match args.format.as_str() {
        "json" => {
            let record = Json::Obj(vec![
                ("command".into(), Json::Str("prob".into())),
                ("parameters".into(), Json::Obj(params)),
                ("seed".into(), Json::Int(seed as i64)),
                ("p_max".into(), Json::Num(cert.p_max)),
                ("method".into(), Json::Str(cert.method.tag().into())),
                ("residual".into(), Json::Num(cert.min_residual_eig)),
                ("rho0".into(), matrix_json(cert.rho0.matrix())),
                ("version".into(), Json::Str(retropast_core::VERSION.into())),
            ]);
            record.render()
        }
        "csv" => {
            let mut csv = String::from("d_out,d_in,p_max,method,residual\n");
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                choi.d_out,
                choi.d_in,
                fmt17(cert.p_max),
                cert.method.tag(),
                fmt17(cert.min_residual_eig),
            ));
            csv
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown format '{other}' (expected json or csv)"
            )))
        }
    };
    emit(&payload, args.output.as_deref())?;
    // Wall time goes to stdout only, never into the (byte-stable) files.
    println!("wall_time_s: {wall:.3}");
    Ok(())
}

/// Parse an inclusive copy range: `a..b`, `a..=b`, or a single value.
fn parse_range(s: &str) -> Result<(usize, usize), CliError> {
    let parse = |x: &str| {
        x.parse::<usize>()
            .map_err(|_| CliError::Usage(format!("invalid copy count '{x}'")))
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi || lo == 0 {
            return Err(CliError::Usage(format!("empty or invalid range '{s}'")));
        }
        Ok((lo, hi))
    } else {
        let n = parse(s)?;
        Ok((n, n))
    }
}

pub fn cmd_curve(args: &CurveArgs) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed);
    let (n_lo, n_hi) = parse_range(&args.copies_in)?;
    let d = args.d;
    let m = args.copies_out;
    if d < 2 {
        return Err(CliError::Usage("--d must be >= 2".into()));
    }
    if m == 0 || n_lo < m {
        return Err(CliError::Usage(
            "the partial-trace curve requires 1 <= M <= N for every N in the range".into(),
        ));
    }

    let start = Instant::now();
    let mut csv = String::from("N,p_analytic,p_solver,classical_limit\n");
    let classical = fmt17(1.0 / d as f64);
    let mut first_skipped: Option<usize> = None;
    for n in n_lo..=n_hi {
        let spec = ChannelSpec::SymmetricTrace { d, copies_in: n, copies_out: m };
        let p_analytic = retropast_core::causality::analytic_p_max(&spec)
            .map_err(|e| CliError::Numeric(e.to_string()))?
            .expect("copy channels always have a closed form");
        // The solver column honors the embedded-amplitude capacity default.
        let embedded = (d as u128).checked_pow((n + m) as u32);
        let solver_cell = match embedded {
            Some(amps) if amps <= MAX_EMBEDDED_DIM as u128 => {
                let (_, cert) =
                    solve_channel(&spec, seed).map_err(|e| CliError::Numeric(e.to_string()))?;
                fmt17(cert.p_max)
            }
            _ => {
                first_skipped.get_or_insert(n);
                String::new()
            }
        };
        csv.push_str(&format!("{n},{},{solver_cell},{classical}\n", fmt17(p_analytic)));
    }
    if let Some(n) = first_skipped {
        csv.push_str(&format!(
            "# p_solver omitted for N >= {n}: embedded dimension {d}^(N+{m}) exceeds the \
             capacity of {MAX_EMBEDDED_DIM} amplitudes\n"
        ));
    }
    let wall = start.elapsed().as_secs_f64();
    emit(&csv, args.output.as_deref())?;
    println!("wall_time_s: {wall:.3}");
    Ok(())
}

fn invariant_json(r: &InvariantResult) -> Json {
    Json::Obj(vec![
        ("suite".into(), Json::Str(r.suite.clone())),
        ("name".into(), Json::Str(r.name.clone())),
        ("passed".into(), Json::Bool(r.passed)),
        ("residual".into(), Json::Num(r.residual)),
        ("tolerance".into(), Json::Num(r.tolerance)),
    ])
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let opts = VerifyOptions {
        seed: resolve_seed(args.seed),
        perturb_choi: args.perturb_choi,
        mp_channels: args.mp_channels,
    };
    let start = Instant::now();
    let results = match &args.suite {
        Some(name) => run_suite(name, &opts).map_err(|e| CliError::Usage(e.to_string()))?,
        None => run_all(&opts).map_err(|e| CliError::Numeric(e.to_string()))?,
    };
    let wall = start.elapsed().as_secs_f64();

    let all_passed = results.iter().all(|r| r.passed);
    let summary = Json::Obj(vec![
        ("command".into(), Json::Str("verify".into())),
        (
            "suite".into(),
            match &args.suite {
                Some(s) => Json::Str(s.clone()),
                None => Json::Str("all".into()),
            },
        ),
        ("seed".into(), Json::Int(opts.seed as i64)),
        ("perturb_choi".into(), Json::Num(opts.perturb_choi)),
        (
            "invariants".into(),
            Json::Arr(results.iter().map(invariant_json).collect()),
        ),
        ("all_passed".into(), Json::Bool(all_passed)),
        ("version".into(), Json::Str(retropast_core::VERSION.into())),
    ]);
    emit(&summary.render(), args.output.as_deref())?;
    for r in &results {
        println!(
            "{} {}/{} residual={} tolerance={}",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.name,
            fmt17(r.residual),
            fmt17(r.tolerance),
        );
    }
    println!("wall_time_s: {wall:.3}");
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "{} invariant(s) failed",
            results.iter().filter(|r| !r.passed).count()
        )))
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    if args.trials < 1000 {
        eprintln!(
            "warning: {} trials gives a wide confidence interval; >= 1000 recommended",
            args.trials
        );
    }
    let seed = resolve_seed(args.seed);
    let start = Instant::now();
    let (choi, cert, params) = solve_from_args(&args.channel, seed)?;
    let protocol =
        realize(&choi, cert.p_max, &cert.rho0).map_err(|e| CliError::Numeric(e.to_string()))?;
    let input = QuantumState::maximally_mixed(choi.d_in);
    let stats: SimulationStats = simulate(&protocol, &input, args.trials, seed, Some(&choi))
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let wall = start.elapsed().as_secs_f64();

    let freq = stats.frequency();
    let sigma = SimulationStats::sigma(cert.p_max, stats.trials);
    let record = Json::Obj(vec![
        ("command".into(), Json::Str("simulate".into())),
        ("parameters".into(), Json::Obj(params)),
        ("seed".into(), Json::Int(seed as i64)),
        ("p_declared".into(), Json::Num(protocol.p_declared)),
        ("method".into(), Json::Str(cert.method.tag().into())),
        ("trials".into(), Json::Int(stats.trials as i64)),
        ("successes".into(), Json::Int(stats.successes as i64)),
        ("frequency".into(), Json::Num(freq)),
        ("sigma".into(), Json::Num(sigma)),
        (
            "interval_3sigma".into(),
            Json::Arr(vec![
                Json::Num(cert.p_max - 3.0 * sigma),
                Json::Num(cert.p_max + 3.0 * sigma),
            ]),
        ),
        (
            "conditional_fidelity_min".into(),
            Json::Num(stats.conditional_output_fidelity_min),
        ),
        ("version".into(), Json::Str(retropast_core::VERSION.into())),
    ]);
    emit(&record.render(), args.output.as_deref())?;
    println!("wall_time_s: {wall:.3}");
    Ok(())
}
