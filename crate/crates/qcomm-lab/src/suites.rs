//! One function per subcommand. Each suite draws its randomness from
//! `seed::derive(master, &[suite index])`, and every trial inside a suite
//! from a further `derive(suite_seed, &[part, trial, ...])`, so results do not
//! depend on the worker count or on which other suites ran.

use rand::Rng;
use rayon::prelude::*;

use qcomm::bhm::{
    self, brute_force_one_way, correlation_identity_audit, edges_for, match_probability,
    match_probability_by_enumeration, minimal_disagreement, quantum_round, run_protocol, sample,
    verify_moment_agreement, weighted_delta, DistKind, HardDistributionSpec, Matching,
};
use qcomm::entanglement::{
    decompose, entry_average, epr_measurement_protocol, epr_parity_protocol,
    random_entangled_smp, sample_stripped_oneway, simulate_qsmp, strip_entanglement_oneway,
    strip_entanglement_qsmp, verify_decomposition,
};
use qcomm::exact::{to_f64, RatioDoc};
use qcomm::forrelation::{
    default_reps as forr_default_reps, plant_acceptance_rate, plant_instance, swap_acceptance,
    swap_test_protocol, ForrConvention, ForrXorInstance,
};
use qcomm::hyperfourier::{level_k_audit, matrix_level_k_audit, random_bounded, random_matrix_function};
use qcomm::protocol::{
    compile_two_way, eval_two_way, fourier_growth_report, monte_carlo_transcript, random_one_way,
    random_smp, random_two_way, ProtocolRef,
};
use qcomm::qcore::linalg::real;
use qcomm::qcore::random::{random_density, random_hermitian_contraction, random_real_density};
use qcomm::{seed, Label};

use crate::config::Config;
use crate::error::{LabError, Result};
use crate::record::SuiteReport;

/// Numerical tolerance shared by the exactness checks.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance of the inequality audits.
pub const AUDIT_TOL: f64 = 1e-9;
/// Width of the statistical acceptance band, in standard errors.
pub const SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    ForrDemo,
    BhmDemo,
    MomentCheck,
    FourierGrowth,
    LevelkAudit,
    DecomposeCheck,
    StripQsmp,
    StripOneway,
    ClassicalOracle,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::ForrDemo,
        Suite::BhmDemo,
        Suite::MomentCheck,
        Suite::FourierGrowth,
        Suite::LevelkAudit,
        Suite::DecomposeCheck,
        Suite::StripQsmp,
        Suite::StripOneway,
        Suite::ClassicalOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ForrDemo => "forr-demo",
            Suite::BhmDemo => "bhm-demo",
            Suite::MomentCheck => "moment-check",
            Suite::FourierGrowth => "fourier-growth",
            Suite::LevelkAudit => "levelk-audit",
            Suite::DecomposeCheck => "decompose-check",
            Suite::StripQsmp => "strip-qsmp",
            Suite::StripOneway => "strip-oneway",
            Suite::ClassicalOracle => "classical-oracle",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| LabError::UnknownSubcommand(name.to_string()))
    }

    /// Position in [`Suite::ALL`], used as the seed counter.
    pub fn index(self) -> u64 {
        Self::ALL.iter().position(|&s| s == self).expect("listed") as u64
    }

    pub fn audits(self) -> &'static str {
        match self {
            Suite::ForrDemo => "swap-test protocol success on planted forrelation instances",
            Suite::BhmDemo => "BHM quantum protocol relation, edge-hit rate and success",
            Suite::MomentCheck => "hard-distribution moments, correlation identity, matching probability",
            Suite::FourierGrowth => "two-way POVM completeness, exact vs sampled evaluation, SMP growth chain",
            Suite::LevelkAudit => "scalar and matrix level-k inequalities",
            Suite::DecomposeCheck => "decomposition of shared states into locally equivalent simple states",
            Suite::StripQsmp => "entanglement removal for simultaneous quantum protocols",
            Suite::StripOneway => "entanglement removal for one-way protocols",
            Suite::ClassicalOracle => "exhaustive one-way classical optimum for BHM",
        }
    }

    pub fn seed(self, master: u64) -> u64 {
        seed::derive(master, &[self.index()])
    }

    pub fn run(self, cfg: &Config, master: u64) -> Result<SuiteReport> {
        let seed = self.seed(master);
        let mut r = SuiteReport::new(self.name(), self.audits(), seed);
        match self {
            Suite::ForrDemo => forr_demo(cfg, seed, &mut r)?,
            Suite::BhmDemo => bhm_demo(cfg, seed, &mut r)?,
            Suite::MomentCheck => moment_check(cfg, &mut r)?,
            Suite::FourierGrowth => fourier_growth(cfg, seed, &mut r)?,
            Suite::LevelkAudit => levelk_audit(cfg, seed, &mut r)?,
            Suite::DecomposeCheck => decompose_check(cfg, seed, &mut r)?,
            Suite::StripQsmp => strip_qsmp(cfg, seed, &mut r)?,
            Suite::StripOneway => strip_oneway(cfg, seed, &mut r)?,
            Suite::ClassicalOracle => classical_oracle(cfg, seed, &mut r)?,
        }
        Ok(r)
    }
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn binomial_sd(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn decompose_check(cfg: &Config, seed: u64, r: &mut SuiteReport) -> Result<()> {
    for (d, count) in [(1usize, cfg.decompose_states_d1), (2, cfg.decompose_states_d2)] {
        let reports = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed::rng_at(seed, &[d as u64, i as u64]);
                let rho = random_real_density(2 * d, &mut rng);
                let dec = decompose(&rho)?;
                Ok((verify_decomposition(&rho, &dec), dec.components.len()))
            })
            .collect::<Result<Vec<_>>>()?;
        let bound = (1u64 << d) as f64;
        let recon = max_of(reports.iter().map(|(v, _)| v.reconstruction_residual));
        let coef = max_of(reports.iter().map(|(v, _)| v.max_coefficient));
        let wit = max_of(reports.iter().map(|(v, _)| v.max_witness_residual));
        let p = format!("d{d}");
        r.metric(&format!("{p}.states"), count);
        r.metric(&format!("{p}.components_per_state"), reports.first().map_or(0, |(_, c)| *c));
        r.metric(&format!("{p}.max_reconstruction_residual"), recon);
        r.metric(&format!("{p}.max_abs_coefficient"), coef);
        r.metric(&format!("{p}.coefficient_bound"), bound);
        r.metric(&format!("{p}.max_witness_residual"), wit);
        r.check(&format!("{p}.reconstruction"), recon <= EXACT_TOL);
        r.check(&format!("{p}.coefficients_bounded"), coef <= bound + EXACT_TOL);
        r.check(&format!("{p}.witnesses"), wit <= EXACT_TOL);
    }
    Ok(())
}

fn fourier_growth(cfg: &Config, seed: u64, r: &mut SuiteReport) -> Result<()> {
    // POVM completeness of the compiled transcript operators.
    let povm = (0..cfg.povm_protocols)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng_at(seed, &[0, i as u64]);
            let p = random_two_way(2, 1, 1, 2, &mut rng);
            let mut worst = (0.0f64, f64::INFINITY);
            for x in 0..4 {
                for y in 0..4 {
                    let c = compile_two_way(&p, x, y)?;
                    worst.0 = worst.0.max(c.completeness_residual());
                    worst.1 = worst.1.min(c.min_eigenvalue());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let residual = max_of(povm.iter().map(|w| w.0));
    let min_eig = povm.iter().map(|w| w.1).fold(f64::INFINITY, f64::min);
    r.metric("povm.protocols", cfg.povm_protocols);
    r.metric("povm.max_completeness_residual", residual);
    r.metric("povm.min_eigenvalue", min_eig);
    r.check("povm.complete", residual <= AUDIT_TOL);
    r.check("povm.positive", min_eig >= -AUDIT_TOL);

    // Exact evaluation against sequential collapse.
    let mut worst_z = 0.0f64;
    for i in 0..cfg.mc_protocols {
        let mut rng = seed::rng_at(seed, &[1, i as u64]);
        let p = random_two_way(2, 1, 1, 2, &mut rng);
        let (x, y) = (rng.random_range(0..4), rng.random_range(0..4));
        let exact = eval_two_way(&p, x, y)?;
        let hist = monte_carlo_transcript(&p, x, y, seed::derive(seed, &[2, i as u64]), cfg.mc_shots)?;
        let sd = ((1.0 - exact * exact).max(1e-12) / cfg.mc_shots as f64).sqrt();
        worst_z = worst_z.max((hist.mean_output(&p) - exact).abs() / sd);
    }
    r.metric("sampling.protocols", cfg.mc_protocols);
    r.metric("sampling.shots", cfg.mc_shots);
    r.metric("sampling.max_z", worst_z);
    r.check("sampling.within_4_sigma", worst_z <= SIGMAS);

    // measured <= 2 * sum Tr|rho^(S)| Tr|sigma^(S)| <= Cauchy-Schwarz, per level.
    let rows = (0..cfg.growth_protocols)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng_at(seed, &[3, i as u64]);
            let p = random_smp(cfg.growth_n, 1 + i % 2, &mut rng);
            Ok(fourier_growth_report(ProtocolRef::Smp(&p), cfg.growth_n)?.rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<_> = rows.into_iter().flatten().collect();
    let violations = rows.iter().filter(|row| row.chain_holds == Some(false)).count();
    let ratio = |a: f64, b: Option<f64>| b.filter(|&b| b > 0.0).map_or(0.0, |b| a / b);
    r.metric("growth.protocols", cfg.growth_protocols);
    r.metric("growth.rows", rows.len());
    r.metric("growth.violations", violations);
    r.metric(
        "growth.max_measured_over_intermediate",
        max_of(rows.iter().map(|row| ratio(row.measured, row.intermediate))),
    );
    r.metric(
        "growth.max_intermediate_over_cauchy_schwarz",
        max_of(rows.iter().map(|row| ratio(row.intermediate.unwrap_or(0.0), row.cauchy_schwarz))),
    );
    r.check("growth.chain_holds", violations == 0);
    Ok(())
}

fn levelk_audit(cfg: &Config, seed: u64, r: &mut SuiteReport) -> Result<()> {
    let scalar = (0..cfg.levelk_scalar_cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng_at(seed, &[0, i as u64]);
            let f = random_bounded(cfg.levelk_scalar_n, &mut rng);
            (1..=cfg.levelk_scalar_max_level)
                .map(|ell| level_k_audit(&f, ell).map(|a| (a.lhs, a.rhs)))
                .collect::<qcomm::Result<Vec<_>>>()
        })
        .collect::<qcomm::Result<Vec<_>>>()?;
    let matrix = (0..cfg.levelk_matrix_cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng_at(seed, &[1, i as u64]);
            let f = random_matrix_function(cfg.levelk_matrix_n, cfg.levelk_matrix_c, &mut rng);
            (1..=cfg.levelk_matrix_max_level)
                .map(|ell| matrix_level_k_audit(&f, ell).map(|a| (a.lhs, a.rhs)))
                .collect::<qcomm::Result<Vec<_>>>()
        })
        .collect::<qcomm::Result<Vec<_>>>()?;
    for (name, cases, audits) in [("scalar", cfg.levelk_scalar_cases, scalar), ("matrix", cfg.levelk_matrix_cases, matrix)] {
        let flat: Vec<(f64, f64)> = audits.into_iter().flatten().collect();
        let violations = flat.iter().filter(|(l, rhs)| *l > rhs + AUDIT_TOL).count();
        let tightest = max_of(flat.iter().filter(|(_, rhs)| *rhs > 0.0).map(|(l, rhs)| l / rhs));
        r.metric(&format!("{name}.cases"), cases);
        r.metric(&format!("{name}.audits"), flat.len());
        r.metric(&format!("{name}.violations"), violations);
        r.metric(&format!("{name}.max_lhs_over_rhs"), tightest);
        r.check(&format!("{name}.no_violations"), violations == 0);
    }
    Ok(())
}

fn moment_check(cfg: &Config, r: &mut SuiteReport) -> Result<()> {
    for &[n, m, k] in &cfg.moment_configs {
        let p = format!("moments.{n}-{m}-{k}");
        let up_to_k = verify_moment_agreement(n, m, k, k)?;
        let next = verify_moment_agreement(n, m, k, k + 1)?;
        let first = minimal_disagreement(n, m, k)?;
        r.metric(&format!("{p}.checked_up_to_k"), up_to_k.checked);
        r.metric(&format!("{p}.agree_up_to_k"), up_to_k.agree);
        r.metric(&format!("{p}.counterexample_at_k_plus_1"), &next.counterexample);
        r.metric(&format!("{p}.first_disagreement"), &first);
        r.check(&format!("{p}.agree_up_to_k"), up_to_k.agree);
        r.check(&format!("{p}.counterexample_at_k_plus_1"), !next.agree);
    }

    let (mut audits, mut failures) = (0u64, 0u64);
    let (mut probs, mut prob_mismatches) = (0u64, 0u64);
    for n in (2..=cfg.identity_max_n).step_by(2) {
        for m in 1..=n / 2 {
            for mm in Matching::all(n, m)? {
                for s in 0..1u64 << n {
                    for w in 0..1u64 << m {
                        audits += 1;
                        if !correlation_identity_audit(&mm, s, w)?.holds {
                            failures += 1;
                        }
                    }
                }
            }
            let singles = (0..=m).map(|l| vec![l]);
            let pairs = (0..=m).flat_map(|a| (0..=m).map(move |b| vec![a, b]));
            for blocks in singles.chain(pairs) {
                probs += 1;
                if match_probability(n, m, &blocks)? != match_probability_by_enumeration(n, m, &blocks)? {
                    prob_mismatches += 1;
                }
            }
        }
    }
    r.metric("identity.audits", audits);
    r.metric("identity.failures", failures);
    r.metric("match_probability.cases", probs);
    r.metric("match_probability.mismatches", prob_mismatches);
    r.check("identity.exact", failures == 0);
    r.check("match_probability.equals_enumeration", prob_mismatches == 0);
    Ok(())
}

fn bhm_demo(cfg: &Config, seed: u64, r: &mut SuiteReport) -> Result<()> {
    // Every shot recovers the parity of the measured pair.
    let n = cfg.bhm_relation_n;
    let m = edges_for(n, cfg.alpha)?;
    let all = Matching::all(n, m)?;
    let violations: u64 = all
        .par_iter()
        .enumerate()
        .map(|(mi, mm)| {
            let mut bad = 0u64;
            for x in 0..1u64 << n {
                for shot in 0..cfg.bhm_relation_shots {
                    let out = quantum_round(x, mm, seed::derive(seed, &[0, mi as u64, x, shot]))?;
                    if out.recovered_parity() != (x >> out.i ^ x >> out.j) & 1 {
                        bad += 1;
                    }
                }
            }
            Ok(bad)
        })
        .collect::<qcomm::Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let shots = all.len() as u64 * (1 << n) * cfg.bhm_relation_shots;
    r.metric("relation.n", n);
    r.metric("relation.shots", shots);
    r.metric("relation.violations", violations);
    r.check("relation.holds_on_every_shot", violations == 0);

    let n = cfg.bhm_n;
    let m = edges_for(n, cfg.alpha)?;
    let hits = (0..cfg.bhm_hit_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng_at(seed, &[1, t]);
            let mm = Matching::random(n, m, &mut rng)?;
            let x = rng.random::<u64>() & ((1u64 << n) - 1);
            Ok(quantum_round(x, &mm, seed::derive(seed, &[2, t]))?.edge_in_matching as u64)
        })
        .collect::<qcomm::Result<Vec<_>>>()?
        .into_iter()
        .sum::<u64>();
    let target = 2.0 * m as f64 / n as f64;
    let rate = hits as f64 / cfg.bhm_hit_trials as f64;
    r.metric("edge_hit.rate", rate);
    r.metric("edge_hit.expected", target);
    r.check(
        "edge_hit.within_4_sigma",
        (rate - target).abs() <= SIGMAS * binomial_sd(target, cfg.bhm_hit_trials),
    );

    let k = cfg.bhm_k;
    let reps = if cfg.bhm_reps == 0 { bhm::default_reps(k, cfg.alpha) } else { cfg.bhm_reps };
    let runs = (0..cfg.bhm_trials)
        .into_par_iter()
        .map(|t| {
            let kind = if t % 2 == 0 { DistKind::MuPlus } else { DistKind::MuMinus };
            let spec = HardDistributionSpec::new(kind, n, m, k)?;
            let inst = sample(&spec, seed::derive(seed, &[3, t]))?;
            let run = run_protocol(&inst, reps, seed::derive(seed, &[4, t]))?;
            Ok((run.correct == Some(true), run.decided.iter().all(|&d| d)))
        })
        .collect::<qcomm::Result<Vec<_>>>()?;
    let wins = runs.iter().filter(|(ok, _)| *ok).count();
    let decided = runs.iter().filter(|(_, d)| *d).count();
    let decided_correct = runs.iter().filter(|(ok, d)| *ok && *d).count();
    let success = wins as f64 / runs.len() as f64;
    let conditional = if decided == 0 { 0.0 } else { decided_correct as f64 / decided as f64 };
    r.metric("protocol.n", n);
    r.metric("protocol.m", m);
    r.metric("protocol.k", k);
    r.metric("protocol.reps", reps);
    r.metric("protocol.trials", cfg.bhm_trials);
    r.metric("protocol.success", success);
    r.metric("protocol.fully_decided_runs", decided);
    r.metric("protocol.conditional_correctness", conditional);
    r.check("protocol.conditional_correctness_is_one", decided > 0 && decided_correct == decided);
    r.check("protocol.success_at_least_two_thirds", success >= 2.0 / 3.0);
    Ok(())
}

fn forr_demo(cfg: &Config, seed: u64, r: &mut SuiteReport) -> Result<()> {
    let (n, k, eps) = (cfg.forr_n, cfg.forr_k, cfg.forr_epsilon);
    let conv = ForrConvention::FullPair;
    let reps = if cfg.forr_reps == 0 { forr_default_reps(k, eps) } else { cfg.forr_reps };
    let trials = (0..cfg.forr_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng_at(seed, &[0, t]);
            let copies = (0..k)
                .map(|c| {
                    let label = if rng.random::<bool>() { Label::Minus } else { Label::Plus };
                    plant_instance(n, eps, label, conv, seed::derive(seed, &[1, t, c as u64]), cfg.forr_feasibility)
                })
                .collect::<qcomm::Result<Vec<_>>>()?;
            let acc = copies
                .iter()
                .map(|c| Ok((c.label, swap_acceptance(&c.x, &c.y)?)))
                .collect::<qcomm::Result<Vec<_>>>()?;
            let inst = ForrXorInstance::new(copies)?;
            let out = swap_test_protocol(&inst, reps, seed::derive(seed, &[2, t]))?;
            Ok((Some(out.output) == inst.xor_label(), acc))
        })
        .collect::<qcomm::Result<Vec<_>>>()?;
    let wins = trials.iter().filter(|(ok, _)| *ok).count();
    let success = wins as f64 / trials.len() as f64;
    let acc: Vec<(Label, f64)> = trials.into_iter().flat_map(|(_, a)| a).collect();
    let min_minus = acc.iter().filter(|(l, _)| *l == Label::Minus).map(|(_, p)| *p).fold(f64::INFINITY, f64::min);
    let max_plus = acc.iter().filter(|(l, _)| *l == Label::Plus).map(|(_, p)| *p).fold(f64::NEG_INFINITY, f64::max);
    // Acceptance is 1/2 + overlap^2 / 2, so the promise gap in acceptance is
    // ((eps/4)^2 - (eps/8)^2) / 2.
    let gap = 3.0 * eps * eps / 128.0;
    r.metric("convention", "full-pair");
    r.metric("n", n);
    r.metric("k", k);
    r.metric("epsilon", eps);
    r.metric("reps", reps);
    r.metric("trials", cfg.forr_trials);
    r.metric("success", success);
    r.metric("acceptance.min_minus", min_minus);
    r.metric("acceptance.max_plus", max_plus);
    r.metric("acceptance.required_gap", gap);
    r.metric(
        "planting.plus_acceptance_rate",
        plant_acceptance_rate(n, eps, Label::Plus, conv, seed::derive(seed, &[3]), 10_000)?,
    );
    r.check("success_at_least_two_thirds", success >= 2.0 / 3.0);
    if min_minus.is_finite() && max_plus.is_finite() {
        r.check("acceptance_gap", min_minus - max_plus >= gap - EXACT_TOL);
    }
    Ok(())
}

/// `(E[out | x = y] - E[out | x != y]) / 2` over one-bit inputs.
fn parity_advantage(out: impl Fn(usize, usize) -> f64) -> f64 {
    let same = (out(0, 0) + out(1, 1)) / 2.0;
    let diff = (out(0, 1) + out(1, 0)) / 2.0;
    (same - diff) / 2.0
}

fn strip_qsmp(cfg: &Config, seed: u64, r: &mut SuiteReport) -> Result<()> {
    let d = cfg.strip_d;
    let p = if d == 1 {
        epr_parity_protocol()
    } else {
        random_entangled_smp(1, d, 1, &mut seed::rng_at(seed, &[0]))
    };
    let target_flag = 2f64.powi(-4 * d as i32);
    let shots = cfg.strip_shots;
    let mut exact = [[None, None], [None, None]];
    let mut sims = [[None, None], [None, None]];
    for x in 0..2 {
        for y in 0..2 {
            let s = strip_entanglement_qsmp(&p, x, y)?;
            sims[x][y] = Some(simulate_qsmp(&s, &p, shots, seed::derive(seed, &[1, x as u64, y as u64]))?);
            exact[x][y] = Some(s);
        }
    }
    let ex = |x: usize, y: usize| exact[x][y].as_ref().expect("filled");
    let sim = |x: usize, y: usize| sims[x][y].as_ref().expect("filled");
    let pairs = [(0, 0), (0, 1), (1, 0), (1, 1)];

    let flag_exact = ex(0, 0).flag_probability;
    let flag_rates: Vec<f64> = pairs.iter().map(|&(x, y)| sim(x, y).flag_rate()).collect();
    let tv = max_of(pairs.iter().map(|&(x, y)| ex(x, y).trace_distance));
    let original = parity_advantage(|x, y| ex(x, y).original_output);
    let stripped_exact = parity_advantage(|x, y| ex(x, y).stripped_output);
    let stripped_sampled = parity_advantage(|x, y| sim(x, y).mean_output());
    let adv_sd = pairs
        .iter()
        .map(|&(x, y)| 1.0 - ex(x, y).stripped_output.powi(2))
        .sum::<f64>()
        .sqrt()
        / (4.0 * (shots as f64).sqrt());
    let flag_band = |q: f64| flag_rates.iter().all(|f| (f - q).abs() <= SIGMAS * binomial_sd(q, shots));

    r.metric("d", d);
    r.metric("shots_per_input", shots);
    r.metric("flag.exact", flag_exact);
    r.metric("flag.required", target_flag);
    r.metric("flag.sampled", &flag_rates);
    r.metric("equal_projection.exact", ex(0, 0).equal_probability);
    r.metric("max_trace_distance", tv);
    r.metric("advantage.original", original);
    r.metric("advantage.required", original * target_flag);
    r.metric("advantage.stripped_exact", stripped_exact);
    r.metric("advantage.stripped_sampled", stripped_sampled);
    r.metric("advantage.sampled_sd", adv_sd);
    r.check("flag_rate_within_4_sigma_of_required", flag_band(target_flag));
    r.check("flag_rate_within_4_sigma_of_exact", flag_band(flag_exact));
    r.check("conditional_state_exact", tv <= AUDIT_TOL);
    r.check(
        "advantage_within_4_sigma_of_required",
        (stripped_sampled - original * target_flag).abs() <= SIGMAS * adv_sd,
    );
    r.check(
        "advantage_within_4_sigma_of_exact",
        (stripped_sampled - stripped_exact).abs() <= SIGMAS * adv_sd,
    );
    Ok(())
}

fn strip_oneway(cfg: &Config, seed: u64, r: &mut SuiteReport) -> Result<()> {
    for d in 1..=2usize {
        let dim = 1usize << (2 * d);
        let worst = max_of(
            (0..cfg.oneway_pairs)
                .into_par_iter()
                .map(|i| {
                    let mut rng = seed::rng_at(seed, &[0, d as u64, i as u64]);
                    let f = random_hermitian_contraction(dim, &mut rng);
                    let s = random_density(2 * d, &mut rng);
                    let lhs = entry_average(&f, s.matrix());
                    let rhs = (&f * s.matrix()).trace() / real((dim * dim) as f64);
                    (lhs - rhs).norm()
                })
                .collect::<Vec<_>>(),
        );
        let mut ratio = 0.0f64;
        for i in 0..cfg.oneway_random_protocols {
            let mut rng = seed::rng_at(seed, &[1, d as u64, i as u64]);
            let p = random_one_way(1, d, 1, &mut rng);
            for x in 0..2 {
                for y in 0..2 {
                    let s = strip_entanglement_oneway(&p, x, y)?;
                    ratio = ratio.max(s.quantization_error / s.quantization_bound);
                }
            }
        }
        r.metric(&format!("d{d}.identity_max_error"), worst);
        r.metric(&format!("d{d}.max_quantization_error_over_bound"), ratio);
        r.check(&format!("d{d}.identity"), worst <= 1e-12);
        r.check(&format!("d{d}.quantization_bound"), ratio <= 1.0);
    }

    let p = epr_measurement_protocol();
    let mut exact = [[None, None], [None, None]];
    let mut sampled = [[0.0; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            exact[x][y] = Some(strip_entanglement_oneway(&p, x, y)?);
            let sum: i64 = (0..cfg.strip_shots)
                .into_par_iter()
                .map(|s| {
                    let mut rng = seed::rng_at(seed, &[2, x as u64, y as u64, s]);
                    sample_stripped_oneway(&p, x, y, &mut rng).map(i64::from)
                })
                .collect::<qcomm::Result<Vec<_>>>()?
                .into_iter()
                .sum();
            sampled[x][y] = sum as f64 / cfg.strip_shots as f64;
        }
    }
    let ex = |x: usize, y: usize| exact[x][y].as_ref().expect("filled");
    let d = 1;
    let floor = 2f64.powi(-4 * d) / 6.0;
    let original = parity_advantage(|x, y| ex(x, y).original_output);
    let stripped = parity_advantage(|x, y| ex(x, y).stripped_output);
    let stripped_sampled = parity_advantage(|x, y| sampled[x][y]);
    let sd = 1.0 / (2.0 * (cfg.strip_shots as f64).sqrt());
    let cost = ex(0, 0).cost;
    r.metric("family.advantage.original", original);
    r.metric("family.advantage.stripped_exact", stripped);
    r.metric("family.advantage.stripped_sampled", stripped_sampled);
    r.metric("family.advantage.floor", floor);
    r.metric("family.cost", cost);
    r.check("family.advantage_above_floor", stripped >= floor);
    r.check("family.sampled_within_4_sigma", (stripped_sampled - stripped).abs() <= SIGMAS * sd);
    r.check("family.cost_within_budget", cost.within_budget);
    Ok(())
}

fn classical_oracle(cfg: &Config, seed: u64, r: &mut SuiteReport) -> Result<()> {
    let (n, m, c) = (cfg.oracle_n, cfg.oracle_m, cfg.oracle_c);
    let opt = brute_force_one_way(n, m, c)?;
    let parts: Vec<Vec<u64>> = (0..1u32 << c.min(n))
        .map(|z| (0..1u64 << n).filter(|&x| opt.messages[x as usize] == z).collect())
        .collect();
    let consistent = weighted_delta(&parts, n, m, 1)? == &opt.advantage + &opt.advantage;

    // Quantum side: one round per instance; decided copies are always right.
    let trials = 4000u64;
    let runs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let kind = if t % 2 == 0 { DistKind::MuPlus } else { DistKind::MuMinus };
            let inst = sample(&HardDistributionSpec::new(kind, n, m, 1)?, seed::derive(seed, &[0, t]))?;
            let run = run_protocol(&inst, 1, seed::derive(seed, &[1, t]))?;
            Ok((run.decided[0], run.correct == Some(true)))
        })
        .collect::<qcomm::Result<Vec<_>>>()?;
    let decided = runs.iter().filter(|(d, _)| *d).count();
    let decided_correct = runs.iter().filter(|(d, ok)| *d && *ok).count();

    r.metric("advantage_convention", "(E+[out] - E-[out]) / 2");
    r.metric("n", n);
    r.metric("m", m);
    r.metric("c", c);
    r.metric("classical.advantage", RatioDoc::encode(&opt.advantage));
    r.metric("classical.advantage_f64", to_f64(&opt.advantage));
    r.metric("classical.messages", &opt.messages);
    r.metric("quantum.reps", 1);
    r.metric("quantum.decided_rounds", decided);
    r.metric(
        "quantum.conditional_correctness",
        if decided == 0 { 0.0 } else { decided_correct as f64 / decided as f64 },
    );
    r.check("classical.matches_weighted_delta", consistent);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()).unwrap(), s);
        }
        assert!(Suite::from_name("nope").is_err());
    }

    #[test]
    fn suite_seeds_are_distinct() {
        let mut seeds: Vec<u64> = Suite::ALL.iter().map(|s| s.seed(1)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), Suite::ALL.len());
    }

    #[test]
    fn moment_check_small() {
        let cfg = Config { moment_configs: vec![[4, 1, 2]], identity_max_n: 4, ..Config::default() };
        let r = Suite::MomentCheck.run(&cfg, 1).unwrap();
        assert!(r.checks["moments.4-1-2.agree_up_to_k"]);
        assert!(r.checks["identity.exact"]);
        assert!(r.checks["match_probability.equals_enumeration"]);
    }

    #[test]
    fn classical_oracle_reports_rational() {
        let r = Suite::ClassicalOracle.run(&Config::default(), 1).unwrap();
        assert_eq!(r.metrics["classical.advantage"], serde_json::json!({"num": "1", "den": "3"}));
        assert_eq!(r.metrics["quantum.conditional_correctness"], serde_json::json!(1.0));
        assert!(r.pass());
    }

    #[test]
    fn budget_violations_surface_as_errors() {
        let cfg = Config { moment_configs: vec![[8, 2, 2]], ..Config::default() };
        assert!(Suite::MomentCheck.run(&cfg, 1).is_err());
        let cfg = Config { oracle_c: 2, ..Config::default() };
        assert!(Suite::ClassicalOracle.run(&cfg, 1).is_err());
    }
}
