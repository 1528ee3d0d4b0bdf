mod common;

use std::time::{Duration, Instant};

use anytime_pibt::anytime::{GroupSolver, SearchOptions};
use anytime_pibt::djag::extract_groups;
use anytime_pibt::oracle::brute_force_step;
use anytime_pibt::*;
use common::{cells_of, f_of, step_is_valid, Prepared};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = Prepared> {
    (3u32..10, 3u32..10, 0.0f64..0.3, 1usize..14, any::<u64>()).prop_map(|(w, h, ratio, n, seed)| {
        let probe = anytime_pibt::instances::random_map(w, h, ratio, seed);
        let n = n.min(probe.num_passable());
        Prepared::random(w, h, ratio, n, seed)
    })
}

fn small_instance() -> impl Strategy<Value = Prepared> {
    (any::<u64>(), 1usize..6).prop_map(|(seed, n)| Prepared::random(5, 5, 0.2, n, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn pibt_plans_are_complete_and_collision_free(p in instance()) {
        let i = &p.inst;
        let plan = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 0, None);
        prop_assert!(plan.is_complete());
        prop_assert!(step_is_valid(&i.map, &i.config, &cells_of(&plan)));
    }

    #[test]
    fn grouping_does_not_change_the_plan(p in instance()) {
        let i = &p.inst;
        let plain = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 0, None);
        let mut set = GroupSet::new(i.config.len());
        let grouped = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 0, Some(&mut set));
        prop_assert_eq!(plain, grouped);
    }

    #[test]
    fn ungrouped_agents_take_their_best_move(p in instance()) {
        let i = &p.inst;
        let mut set = GroupSet::new(i.config.len());
        let plan = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 0, Some(&mut set));
        let next = cells_of(&plan);
        let f = f_of(&p.tables, &i.goals, &i.config, &next);
        for (a, &fa) in f.iter().enumerate() {
            if set.is_touched(a) {
                continue;
            }
            let best = i.map.neighbors(i.config[a]).into_iter()
                .map(|c| f_of(&p.tables[a..=a], &i.goals[a..=a], &i.config[a..=a], &[c])[0])
                .min()
                .unwrap();
            prop_assert_eq!(fa, best, "agent {}", a);
        }
    }

    #[test]
    fn pibt_is_deterministic(p in instance()) {
        let i = &p.inst;
        let a = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 3, None);
        let b = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 3, None);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn anytime_outcome_is_valid_and_monotone(p in instance(), nodes in 0u64..5_000, tb in any::<bool>()) {
        let i = &p.inst;
        let ctx = p.ctx();
        let mode = if tb { SolveMode::Tiebreak } else { SolveMode::Optimal };
        let out = anytime_pibt(&ctx, &AnytimeOptions::new(Budget::Nodes(nodes), mode));
        let next = cells_of(&out.plan);
        prop_assert!(step_is_valid(&i.map, &i.config, &next));
        let fsum: u64 = f_of(&p.tables, &i.goals, &i.config, &next).iter().sum();
        prop_assert_eq!(fsum, out.f_final);
        let init: u64 = f_of(&p.tables, &i.goals, &i.config, &cells_of(&out.initial_plan)).iter().sum();
        prop_assert_eq!(init, out.f_initial);
        prop_assert!(out.f_lowerbound <= out.f_final && out.f_final <= out.f_initial);
        for trace in &out.fb_traces {
            prop_assert!(trace.windows(2).all(|w| w[1] < w[0]), "{:?}", trace);
        }
        prop_assert!(out.fsum_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tiebreak_never_worsens_any_agent(p in instance(), nodes in 0u64..5_000) {
        let i = &p.inst;
        let ctx = p.ctx();
        let out = anytime_pibt(&ctx, &AnytimeOptions::new(Budget::Nodes(nodes), SolveMode::Tiebreak));
        let before = f_of(&p.tables, &i.goals, &i.config, &cells_of(&out.initial_plan));
        let after = f_of(&p.tables, &i.goals, &i.config, &cells_of(&out.plan));
        for a in 0..before.len() {
            prop_assert!(after[a] <= before[a], "agent {}: {} > {}", a, after[a], before[a]);
        }
    }

    #[test]
    fn zero_budget_is_pibt(p in instance(), wall in any::<bool>()) {
        let i = &p.inst;
        let budget = if wall { Budget::Wall(Duration::ZERO) } else { Budget::Nodes(0) };
        let out = anytime_pibt(&p.ctx(), &AnytimeOptions::new(budget, SolveMode::Optimal));
        let pibt = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 0, None);
        prop_assert_eq!(out.plan, pibt);
    }

    #[test]
    fn unlimited_optimal_matches_oracle(p in small_instance()) {
        let i = &p.inst;
        let out = anytime_pibt(&p.ctx(), &AnytimeOptions::new(Budget::Unlimited, SolveMode::Optimal));
        let best = brute_force_step(&i.map, &i.config, &p.tables).unwrap();
        prop_assert!(out.finished);
        prop_assert_eq!(out.f_final, best.fsum);
    }

    #[test]
    fn oracle_is_bounded_by_every_planner(p in small_instance()) {
        let i = &p.inst;
        let best = brute_force_step(&i.map, &i.config, &p.tables).unwrap();
        prop_assert!(step_is_valid(&i.map, &i.config, &best.next));
        let lb: u64 = i.config.iter().enumerate().map(|(a, &s)| {
            i.map.neighbors(s).into_iter()
                .map(|c| f_of(&p.tables[a..=a], &i.goals[a..=a], &[s], &[c])[0])
                .min()
                .unwrap()
        }).sum();
        prop_assert!(lb <= best.fsum);
        let pibt = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 0, None);
        let pibt_f: u64 = f_of(&p.tables, &i.goals, &i.config, &cells_of(&pibt)).iter().sum();
        prop_assert!(best.fsum <= pibt_f);
        let tb = anytime_pibt(&p.ctx(), &AnytimeOptions::new(Budget::Unlimited, SolveMode::Tiebreak));
        prop_assert!(best.fsum <= tb.f_final);
    }

    #[test]
    fn pruning_keeps_each_group_optimum(p in small_instance()) {
        let i = &p.inst;
        let ctx = p.ctx();
        let mut set = GroupSet::new(i.config.len());
        let plan = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, i.seed, 0, Some(&mut set));
        let f = f_of(&p.tables, &i.goals, &i.config, &cells_of(&plan));
        let groups = extract_groups(&mut set.clone(), &p.priorities, |m| m.iter().map(|&a| f[a]).sum());
        for group in groups {
            let mut results = Vec::new();
            for pruning in [true, false] {
                let options = SearchOptions { mode: SolveMode::Optimal, pruning };
                let mut solver = GroupSolver::new(&ctx, &plan, set.clone(), options);
                let mut g = group.clone();
                let r = solver.solve_group(&mut g, &mut Deadline::unlimited());
                prop_assert!(!r.early_exit);
                results.push((g.best_f, r.nodes));
            }
            prop_assert_eq!(results[0].0, results[1].0);
            prop_assert!(results[0].1 <= results[1].1);
        }
    }
}

#[test]
fn wall_deadline_is_honored() {
    let map = anytime_pibt::instances::random_32_32_20(0);
    let scen = anytime_pibt::instances::random_scenario(&map, 300, 0);
    let starts: Vec<Cell> = scen.iter().map(|e| e.start).collect();
    let goals: Vec<Cell> = scen.iter().map(|e| e.goal).collect();
    let tables = compute_tables(&map, &goals);
    let p = PriorityState::new(300, 0);
    let ctx = StepContext::new(&map, &tables, &starts, &p, 0, 0);
    let options = AnytimeOptions {
        grouping: false,
        ..AnytimeOptions::new(Budget::Wall(Duration::from_millis(20)), SolveMode::Optimal)
    };
    let t = Instant::now();
    let out = anytime_pibt(&ctx, &options);
    let took = t.elapsed();
    assert!(!out.finished);
    // the initial pass plus one candidate iteration of slack
    assert!(took < Duration::from_millis(20 + 30), "{took:?}");
}

#[test]
fn pibt_completes_ten_thousand_instances() {
    for seed in 0..10_000u64 {
        let side = 4 + (seed % 9) as u32;
        let n = 1 + (seed as usize * 7) % (side as usize * side as usize / 2);
        let probe = anytime_pibt::instances::random_map(side, side, 0.25, seed);
        let p = Prepared::random(side, side, 0.25, n.min(probe.num_passable()), seed);
        let i = &p.inst;
        let plan = pibt_step(&i.map, &i.config, &p.priorities, &p.tables, seed, 0, None);
        assert!(step_is_valid(&i.map, &i.config, &cells_of(&plan)), "seed {seed}");
    }
}
