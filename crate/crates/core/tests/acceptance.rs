//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! print.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use filter_lab::bench::{
    cliff_witness_row, golden_diffs, growth_fits, run_sweep, trace_rows, StopSpec, SweepSpec,
};
use filter_lab::envs::{cliff_adversarial_policy, EnvSpec, DANTE_STRAIGHT, DANTE_UP};
use filter_lab::error::Result;
use filter_lab::game::SimplexWeights;
use filter_lab::irl::{
    audit_transcript, chain_variance_ratio, run, sequence_errors, stationary_errors, Algorithm,
    EvalMode, Evaluator, RunConfig, AUDIT_TOL,
};
use filter_lab::mdp::PolicySequence;
use filter_lab::rng::child_rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

// ---------------------------------------------------------------- 1

fn golden_tables() -> Result<Outcome> {
    let diffs = golden_diffs()?;
    outcome(diffs.is_empty(), format!("{} entry diffs across 4 tables", diffs.len()))
}

// ---------------------------------------------------------------- 2

fn labels(algo: Algorithm, rounds: usize) -> Result<Vec<(String, String)>> {
    let inst = EnvSpec::ForkedTree.build()?;
    let mut cfg = RunConfig::for_algorithm(algo);
    cfg.rounds = rounds;
    let t = run(&inst, &cfg, 0)?;
    Ok(trace_rows(&t, &inst).into_iter().map(|(_, p, f)| (p, f)).collect())
}

fn rows_match(got: &[(String, String)], want: &[(&str, &[&str])]) -> bool {
    got.len() >= want.len()
        && got
            .iter()
            .zip(want)
            .all(|((p, f), (wp, wf))| p == wp && wf.contains(&f.as_str()))
}

fn forked_tree_traces() -> Result<Outcome> {
    const ANY: &[&str] = &["r", "r~"];
    const TILDE: &[&str] = &["r~"];
    let primal: &[(&str, &[&str])] = &[("pi_1", TILDE), ("pi_2", TILDE), ("pi_E", ANY)];
    let nr: &[(&str, &[&str])] = &[("pi_1", TILDE), ("pi_2", TILDE), ("pi_E", TILDE)];
    let irl: &[(&str, &[&str])] = &[("pi_1", TILDE), ("pi_E", ANY)];
    let dual_prefix: &[(&str, &[&str])] = &[
        ("pi_1", TILDE),
        ("pi_2", TILDE),
        ("pi_1", TILDE),
        ("pi_2", TILDE),
    ];
    let mut failures = Vec::new();
    for (algo, want) in [
        (Algorithm::NrmmBr, primal),
        (Algorithm::NrmmNr, nr),
        (Algorithm::DualIrl, irl),
        (Algorithm::PrimalIrl, irl),
    ] {
        let got = labels(algo, 4)?;
        let reaches = got.iter().take(4).any(|(p, _)| p == "pi_E");
        if !rows_match(&got, want) || !reaches {
            failures.push(algo.name());
        }
    }
    let dual = labels(Algorithm::NrmmDual, 100)?;
    let dual_expert = dual.iter().filter(|(p, _)| p == "pi_E").count();
    if !rows_match(&dual, dual_prefix) || dual.len() != 100 || dual_expert != 0 {
        failures.push("nrmm_dual");
    }
    outcome(
        failures.is_empty(),
        format!("dual picks pi_E {dual_expert}/100 rounds; mismatched traces: {failures:?}"),
    )
}

// ---------------------------------------------------------------- 3

fn cliff_lower_bounds() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for horizon in [4, 8, 16] {
        let eps = 1.0 / (2.0 * horizon as f64);
        let t = horizon as f64;
        let inst = EnvSpec::Cliff { horizon }.build()?;
        let rho = inst.expert_profile()?;
        let ev = Evaluator::new(&inst.mdp, &rho, &inst.reward_class, &inst.policy_class)?;
        let pi = PolicySequence::repeat(&cliff_adversarial_policy(horizon, eps)?, horizon);
        let seq = sequence_errors(&ev, &inst.expert, &pi);
        let plays = vec![(pi, SimplexWeights::point(inst.reward_class.len(), 0)); 4];
        let st = stationary_errors(&ev, &inst.expert, &plays)?;
        let row = cliff_witness_row(horizon, eps, 4)?;
        let ok = (seq.eps_bar - eps).abs() <= 1e-9
            && (st.eps_bar - eps).abs() <= 1e-9
            && (seq.mixture_gap - eps * t * t).abs() <= 1e-9
            && (st.mixture_gap - eps * t * t).abs() <= 1e-9
            && (st.eps_rl_bar - eps * t).abs() <= 1e-9
            && (row.ratio - 1.0).abs() <= 1e-6
            && row.gap <= row.min_bound + AUDIT_TOL;
        pass &= ok;
        parts.push(format!("T={horizon} gap {:.4} ratio {:.6}", st.mixture_gap, row.ratio));
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------- 4

fn dante_separation() -> Result<Outcome> {
    let (horizon, eps) = (10, 0.05);
    let inst = EnvSpec::Dante { horizon, eps }.build()?;
    let first_choice = |algo| -> Result<(Option<usize>, f64)> {
        let mut cfg = RunConfig::for_algorithm(algo);
        cfg.fixed_suffix = true;
        let t = run(&inst, &cfg, 0)?;
        let first = t.output.as_ref().expect("sequence output").at(1).clone();
        let k = inst.policy_class.iter().position(|p| *p == first);
        Ok((k, t.returned().gap))
    };
    let (bc, bc_gap) = first_choice(Algorithm::BehavioralCloning)?;
    let (mm, mm_gap) = first_choice(Algorithm::Mmdp)?;
    let target = eps * (horizon * (horizon - 1)) as f64;
    let pass = bc == Some(DANTE_STRAIGHT)
        && (bc_gap - target).abs() <= 1e-9
        && mm == Some(DANTE_UP)
        && mm_gap.abs() <= 1e-9;
    outcome(
        pass,
        format!("BC {bc:?} gap {bc_gap:.4} (eps*T*(T-1) = {target:.4}); MMDP {mm:?} gap {mm_gap:.4}"),
    )
}

// ---------------------------------------------------------------- 5

fn sample_complexity() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let sampled = |a| RunConfig {
        eval: EvalMode::Sampled,
        ..RunConfig::for_algorithm(a)
    };
    let spec = SweepSpec {
        envs: (2..=6)
            .map(|horizon| EnvSpec::Tree { branching: 2, horizon })
            .collect(),
        algorithms: vec![sampled(Algorithm::DualIrl), sampled(Algorithm::Mmdp)],
        seeds: (0..20).collect(),
        stop: StopSpec {
            rounds: 50,
            eps_threshold: None,
            gap_threshold: Some(0.5),
        },
        threshold: 0.5,
        output_dir: dir.path().to_path_buf(),
        workers: 0,
    };
    let outcomes = run_sweep(&spec)?;
    let censored = outcomes.iter().filter(|o| o.censored()).count();
    let fits = growth_fits(&outcomes)?;
    let (Some(dual), Some(mmdp)) = (fits.get(&Algorithm::DualIrl), fits.get(&Algorithm::Mmdp)) else {
        return outcome(false, "missing growth fit");
    };
    let ratios = dual.successive_ratios();
    let pass = dual.x.len() == 5
        && mmdp.x.len() == 5
        && ratios.iter().all(|r| *r >= 1.5)
        && mmdp.loglog_slope() <= 4.0;
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    outcome(
        pass,
        format!(
            "dual IRL ratios [{}]; MMDP log-log slope {:.2}; {censored} censored cells",
            shown.join(", "),
            mmdp.loglog_slope()
        ),
    )
}

// ---------------------------------------------------------------- 6

fn suffix_vs_trajectory_variance() -> Result<Outcome> {
    let horizon = 10;
    let t = horizon as f64;
    let (s, tr) = chain_variance_ratio(horizon, false, 100_000, 6)?;
    let iid = s / tr;
    let iid_target = (t - 1.0) / 2.0;
    let iid_ok = iid >= 0.85 * iid_target && iid <= 1.15 * iid_target;
    let (s, tr) = chain_variance_ratio(horizon, true, 100_000, 6)?;
    let dep = s / tr;
    let dep_target = (t + 1.0) * (2.0 * t + 1.0) / 6.0;
    let dep_ok = (dep / dep_target - 1.0).abs() <= 0.15;
    outcome(
        iid_ok && dep_ok,
        format!(
            "iid ratio {iid:.3} vs band [{:.3}, {:.3}] {}; dependent ratio {dep:.3} vs {dep_target:.1} +-15% {}",
            0.85 * iid_target,
            1.15 * iid_target,
            if iid_ok { "ok" } else { "OUT" },
            if dep_ok { "ok" } else { "OUT" }
        ),
    )
}

// ---------------------------------------------------------------- 7

fn random_bound_audits() -> Result<Outcome> {
    use rand::Rng;
    let mut rng = child_rng(7, 0);
    let specs: Vec<EnvSpec> = (0..50)
        .map(|seed| EnvSpec::RandomMdp {
            num_states: rng.gen_range(2..=8),
            num_actions: rng.gen_range(2..=3),
            horizon: rng.gen_range(1..=5),
            seed,
        })
        .collect();
    let results: Vec<Result<(usize, usize)>> = specs
        .par_iter()
        .map(|spec| {
            let inst = spec.build()?;
            let profile = inst.expert_profile()?;
            let mut audited = 0;
            let mut violated = 0;
            for (algo, eval) in [
                (Algorithm::Mmdp, EvalMode::Exact),
                (Algorithm::Mmdp, EvalMode::Sampled),
                (Algorithm::NrmmNr, EvalMode::Exact),
                (Algorithm::NrmmNr, EvalMode::Sampled),
            ] {
                let mut cfg = RunConfig::for_algorithm(algo);
                cfg.eval = eval;
                cfg.rounds = 25;
                cfg.mmdp.samples = Some(500);
                let t = run(&inst, &cfg, 3)?;
                let audit = audit_transcript(&t, &inst, &profile)?;
                let name = if algo == Algorithm::Mmdp {
                    "gap<=eps*T^2"
                } else {
                    "mix-gap<=(eps+delta)*T^2"
                };
                for c in audit.checks.iter().filter(|c| c.name == name) {
                    audited += 1;
                    if c.measured > c.bound + 1e-6 {
                        violated += 1;
                    }
                }
            }
            Ok((audited, violated))
        })
        .collect();
    let mut audited = 0;
    let mut violated = 0;
    for r in results {
        let (a, v) = r?;
        audited += a;
        violated += v;
    }
    outcome(
        audited == 200 && violated == 0,
        format!("{audited} audits on 50 random MDPs, {violated} violations"),
    )
}

// ---------------------------------------------------------------- 8

fn hoeffding_instantiation() -> Result<Outcome> {
    let inst = EnvSpec::ForkedTree.build()?;
    let mut cfg = RunConfig::for_algorithm(Algorithm::Mmdp);
    cfg.eval = EvalMode::Sampled;
    cfg.mmdp.samples = None;
    cfg.mmdp.hoeffding_eps = 0.1;
    cfg.mmdp.hoeffding_delta = 0.1;
    let eps = cfg.mmdp.hoeffding_eps;
    let reps: Vec<Result<(bool, f64, usize)>> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let t = run(&inst, &cfg, seed)?;
            let worst = t.games.iter().map(|g| g.max_abs_error()).fold(0.0, f64::max);
            let samples = t.games.first().map_or(0, |g| g.samples);
            Ok((t.games.len() == inst.horizon() && worst <= eps, worst, samples))
        })
        .collect();
    let mut good = 0;
    let mut worst = 0.0f64;
    let mut samples = 0;
    for r in reps {
        let (ok, w, m) = r?;
        good += ok as usize;
        worst = worst.max(w);
        samples = m;
    }
    outcome(
        good >= 90,
        format!("{good}/100 repetitions within eps = {eps} (M = {samples} per timestep, worst error {worst:.4})"),
    )
}

// ---------------------------------------------------------------- 9

fn determinism() -> Result<Outcome> {
    let mut cells = Vec::new();
    for env in [
        EnvSpec::ForkedTree,
        EnvSpec::Cliff { horizon: 4 },
        EnvSpec::Tree { branching: 2, horizon: 3 },
        EnvSpec::RandomGrid {
            width: 3,
            height: 3,
            horizon: 4,
            slip: 0.1,
            seed: 2,
        },
    ] {
        for algo in Algorithm::ALL {
            for eval in [EvalMode::Exact, EvalMode::Sampled] {
                cells.push((env.clone(), algo, eval));
            }
        }
    }
    let mismatches: Vec<String> = cells
        .par_iter()
        .filter_map(|(env, algo, eval)| {
            let replay = || -> Result<bool> {
                let inst = env.build()?;
                let mut cfg = RunConfig::for_algorithm(*algo);
                cfg.eval = *eval;
                cfg.rounds = 8;
                cfg.demos = 50;
                cfg.mmdp.samples = Some(300);
                let first = run(&inst, &cfg, 11)?.to_json()?;
                let stored = filter_lab::irl::RunTranscript::from_json(&first)?;
                let again = run(&stored.env.build()?, &stored.config, stored.seed)?.to_json()?;
                Ok(first == again)
            };
            match replay() {
                Ok(true) => None,
                Ok(false) => Some(format!("{}/{}/{eval:?}", algo.name(), env.label())),
                Err(e) => Some(format!("{}/{}: {e}", algo.name(), env.label())),
            }
        })
        .collect();
    outcome(
        mismatches.is_empty(),
        format!("{} cells replayed, mismatches: {mismatches:?}", cells.len()),
    )
}

fn main() {
    type Check = fn() -> Result<Outcome>;
    let criteria: [(u32, &str, Check, Duration); 9] = [
        (1, "golden payoff tables", golden_tables, Duration::from_secs(1)),
        (2, "forked tree counterexample traces", forked_tree_traces, Duration::from_secs(10)),
        (3, "cliff quadratic lower bound", cliff_lower_bounds, Duration::from_secs(5)),
        (4, "dante separation", dante_separation, Duration::from_secs(5)),
        (5, "sample-complexity growth contrast", sample_complexity, Duration::from_secs(600)),
        (6, "suffix vs trajectory variance", suffix_vs_trajectory_variance, Duration::from_secs(60)),
        (7, "bound audits on random MDPs", random_bound_audits, Duration::from_secs(300)),
        (8, "hoeffding sample size", hoeffding_instantiation, Duration::from_secs(300)),
        (9, "byte-identical replay", determinism, Duration::from_secs(600)),
    ];
    let mut failed = Vec::new();
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "[{id}] {name}: {} ({:.2}s, limit {}s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
