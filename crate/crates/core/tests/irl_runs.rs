//! End-to-end runs of the algorithm family: bandit edge case, bound audits
//! on random MDPs, replay and config round trips.

use proptest::prelude::*;

use filter_lab::envs::EnvSpec;
use filter_lab::irl::{
    audit_transcript, expert_profile_for, run, AdversaryMode, Algorithm, AlphaSchedule, EvalMode,
    RunConfig, RunTranscript, StopReason,
};

#[test]
fn bandit_is_solved_after_one_update() {
    let inst = EnvSpec::Tree { branching: 3, horizon: 1 }.build().unwrap();
    for algo in Algorithm::ALL {
        for eval in [EvalMode::Exact, EvalMode::Sampled] {
            let mut cfg = RunConfig::for_algorithm(algo);
            cfg.eval = eval;
            cfg.rounds = 2;
            let t = run(&inst, &cfg, 0).unwrap();
            // stationary runs play the initial policy first, then the update
            let solved = t.iterates.last().unwrap();
            assert!(t.iterates.len() <= 2, "{}", algo.name());
            assert_eq!(solved.gap, 0.0, "{} {eval:?}", algo.name());
        }
    }
}

fn random_mdp() -> impl Strategy<Value = EnvSpec> {
    (2usize..=8, 2usize..=3, 1usize..=5, any::<u64>()).prop_map(|(num_states, num_actions, horizon, seed)| {
        EnvSpec::RandomMdp {
            num_states,
            num_actions,
            horizon,
            seed,
        }
    })
}

fn algorithm() -> impl Strategy<Value = Algorithm> {
    prop::sample::select(Algorithm::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_algorithm_meets_its_audit(
        spec in random_mdp(),
        algo in algorithm(),
        sampled in any::<bool>(),
        seed in 0u64..1000,
    ) {
        let inst = spec.build().unwrap();
        let mut cfg = RunConfig::for_algorithm(algo);
        cfg.rounds = 12;
        cfg.eval = if sampled { EvalMode::Sampled } else { EvalMode::Exact };
        cfg.mmdp.samples = Some(200);
        cfg.filter.rollouts_per_round = 16;
        cfg.filter.alpha = 0.5;
        let t = run(&inst, &cfg, seed).unwrap();
        let profile = expert_profile_for(&inst, &cfg, seed).unwrap();
        let audit = audit_transcript(&t, &inst, &profile).unwrap();
        prop_assert!(!audit.checks.is_empty());
        for c in &audit.checks {
            prop_assert!(c.holds, "{} on {}: {} = {} > {}", algo.name(), spec.label(), c.name, c.measured, c.bound);
        }
    }

    #[test]
    fn replay_is_byte_identical(spec in random_mdp(), algo in algorithm(), seed in any::<u64>()) {
        let inst = spec.build().unwrap();
        let mut cfg = RunConfig::for_algorithm(algo);
        cfg.rounds = 6;
        cfg.eval = EvalMode::Sampled;
        cfg.demos = 20;
        cfg.mmdp.samples = Some(100);
        let json = run(&inst, &cfg, seed).unwrap().to_json().unwrap();
        let stored = RunTranscript::from_json(&json).unwrap();
        let again = run(&stored.env.build().unwrap(), &stored.config, stored.seed).unwrap();
        prop_assert_eq!(json, again.to_json().unwrap());
    }

    #[test]
    fn interaction_counts_never_decrease(spec in random_mdp(), algo in algorithm(), seed in 0u64..100) {
        let inst = spec.build().unwrap();
        let mut cfg = RunConfig::for_algorithm(algo);
        cfg.rounds = 8;
        cfg.eval = EvalMode::Sampled;
        cfg.mmdp.samples = Some(50);
        let t = run(&inst, &cfg, seed).unwrap();
        prop_assert!(t.iterates.windows(2).all(|w| w[0].env_interactions <= w[1].env_interactions));
        prop_assert_eq!(t.iterates.last().unwrap().env_interactions, t.total_interactions);
    }
}

#[test]
fn exact_runs_use_no_interactions() {
    let inst = EnvSpec::Cliff { horizon: 5 }.build().unwrap();
    for algo in Algorithm::ALL {
        let t = run(&inst, &RunConfig::for_algorithm(algo), 0).unwrap();
        assert_eq!(t.total_interactions, 0, "{}", algo.name());
    }
}

#[test]
fn gap_threshold_stops_early() {
    let inst = EnvSpec::ForkedTree.build().unwrap();
    let mut cfg = RunConfig::for_algorithm(Algorithm::NrmmBr);
    cfg.rounds = 50;
    cfg.gap_threshold = Some(0.0);
    let t = run(&inst, &cfg, 0).unwrap();
    assert_eq!(t.stop_reason, StopReason::GapThreshold);
    assert_eq!(t.iterates.len(), 3);
    assert_eq!(t.returned().gap, 0.0);
}

#[test]
fn budget_exhaustion_censors_the_run() {
    let inst = EnvSpec::Tree { branching: 2, horizon: 5 }.build().unwrap();
    let mut cfg = RunConfig::for_algorithm(Algorithm::DualIrl);
    cfg.eval = EvalMode::Sampled;
    cfg.exploration.budget = 20;
    let t = run(&inst, &cfg, 0).unwrap();
    assert_eq!(t.stop_reason, StopReason::Budget);
}

#[test]
fn filter_variants_run_on_a_grid() {
    let inst = EnvSpec::RandomGrid {
        width: 3,
        height: 3,
        horizon: 4,
        slip: 0.1,
        seed: 5,
    }
    .build()
    .unwrap();
    let profile = inst.expert_profile().unwrap();
    for schedule in [AlphaSchedule::Fixed, AlphaSchedule::LinearAnneal] {
        for mode in [AdversaryMode::BestResponse, AdversaryMode::NoRegret] {
            let mut cfg = RunConfig::for_algorithm(Algorithm::Filter);
            cfg.eval = EvalMode::Sampled;
            cfg.rounds = 10;
            cfg.filter.alpha = 0.3;
            cfg.filter.alpha_schedule = schedule;
            cfg.filter.adversary_mode = mode;
            let t = run(&inst, &cfg, 2).unwrap();
            assert!(audit_transcript(&t, &inst, &profile).unwrap().holds());
            if schedule == AlphaSchedule::LinearAnneal {
                assert_eq!(t.iterates[0].alpha, 1.0);
                assert_eq!(t.iterates.last().unwrap().alpha, 0.0);
            }
        }
    }
}
