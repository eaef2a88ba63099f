use chargeplan::extensions::{
    multi_period_solve, subsidy_solve, validate_outcome, validate_schedule, Bid, Expansion,
    MultiPeriodInstance, Period, Provider, SubsidyInstance,
};
use chargeplan::ipac::ipac_solve;
use chargeplan::oracle::{exact_mpc, exact_subsidy, gen_instance, GenParams, Generated};
use chargeplan::reachability::{objective, radius_candidates, sweep, RadiusFamily, SweepOptions};
use chargeplan::{DistanceTable, SiteId, SolverKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(seed: u64, sites: usize) -> Generated {
    gen_instance(&GenParams {
        site_count: sites,
        interest_count: 6,
        budget_fraction: 0.45,
        seed,
        ..GenParams::default()
    })
    .unwrap()
}

fn family(g: &Generated) -> RadiusFamily {
    let i = &g.instance;
    RadiusFamily::new(i.demand.clone(), i.cost.clone(), i.budget, g.distances.clone())
}

#[test]
fn exact_demand_is_a_nondecreasing_step_function() {
    for seed in 0..20 {
        let f = family(&small(seed, 10));
        let set = radius_candidates(&f.distances).unwrap();
        let d = |r: f64| exact_mpc(&f.at(r)).map_or(0.0, |s| s.total_demand);
        let values: Vec<f64> = set.radii.iter().map(|&r| d(r)).collect();
        for (k, w) in set.radii.windows(2).enumerate() {
            assert!(values[k] <= values[k + 1], "seed {seed}: drop at {}", w[1]);
            assert_eq!(d(0.5 * (w[0] + w[1])), values[k], "seed {seed}: not constant after {}", w[0]);
        }
    }
}

#[test]
fn sweep_over_candidates_matches_dense_grid() {
    for seed in 0..10 {
        let f = family(&small(100 + seed, 9));
        let set = radius_candidates(&f.distances).unwrap();
        for alpha in [0.0, 0.3, 0.7, 1.0] {
            let on_set = sweep(&f, &set.radii, alpha, &SolverKind::Oracle, SweepOptions::default()).unwrap();
            let grid: Vec<f64> = (0..=200)
                .map(|k| set.r_min + (set.r_max - set.r_min) * k as f64 / 200.0)
                .collect();
            let dense = sweep(&f, &grid, alpha, &SolverKind::Oracle, SweepOptions::default()).unwrap();
            let best = |r: &chargeplan::reachability::RadiusSweepResult| {
                r.records
                    .iter()
                    .filter(|x| x.feasible)
                    .filter_map(|x| x.objective)
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            assert!(best(&on_set) >= best(&dense) - 1e-12, "seed {seed} alpha {alpha}");
        }
    }
}

#[test]
fn sweep_records_use_the_trade_off_formula() {
    let f = family(&small(5, 8));
    let set = radius_candidates(&f.distances).unwrap();
    let r = sweep(&f, &set.radii, 0.4, &SolverKind::Ipac, SweepOptions::default()).unwrap();
    for rec in &r.records {
        let want = objective(0.4, rec.demand_star, f.total_demand(), rec.radius, set.r_min, set.r_max);
        assert_eq!(rec.objective, Some(want));
    }
}

#[test]
fn one_period_plans_equal_single_ipac_runs() {
    for seed in 0..25 {
        let g = small(200 + seed, 12);
        let i = &g.instance;
        let p = Period {
            site_count: i.site_count,
            demand: i.demand.clone(),
            cost: i.cost.clone(),
            budget_release: i.budget,
            distances: g.distances.clone(),
            radius: Some(i.radius),
            radius_grid: None,
            expansions: vec![],
        };
        let mp = MultiPeriodInstance { periods: vec![p], alpha: 1.0 };
        match (multi_period_solve(&mp, &SolverKind::Ipac), ipac_solve(i)) {
            (Ok(s), Ok(run)) => {
                assert_eq!(s.selections[0], run.solution.selected);
                assert_eq!(s.plans[0].spend, run.solution.total_cost);
            }
            (Err(_), Err(_)) => {}
            (a, b) => panic!("seed {seed}: {a:?} vs {b:?}"),
        }
    }
}

/// Three periods over a growing site list with moving interest points.
fn growing(seed: u64) -> MultiPeriodInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = [6usize, 9, 12];
    let sites: Vec<(f64, f64)> = (0..12).map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))).collect();
    let periods = counts
        .iter()
        .enumerate()
        .map(|(t, &n)| {
            let pts: Vec<(f64, f64)> = (0..3 + t).map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))).collect();
            let expansions = (0..2)
                .map(|_| Expansion { site: SiteId(rng.random_range(0..n)), cost: rng.random_range(1.0..3.0), demand_gain: rng.random_range(0.0..20.0) })
                .collect();
            Period {
                site_count: n,
                demand: (0..n).map(|_| rng.random_range(1.0..60.0)).collect(),
                cost: (0..n).map(|_| rng.random_range(1.0..8.0)).collect(),
                budget_release: rng.random_range(8.0..20.0),
                distances: DistanceTable::euclidean(&pts, &sites[..n]),
                radius: Some(6.0),
                radius_grid: None,
                expansions,
            }
        })
        .collect();
    MultiPeriodInstance { periods, alpha: if seed % 2 == 0 { 1.0 } else { 0.6 } }
}

#[test]
fn schedules_pass_their_validator() {
    let mut solved = 0;
    for seed in 0..50 {
        let mp = growing(seed);
        if let Ok(s) = multi_period_solve(&mp, &SolverKind::Ipac) {
            solved += 1;
            assert!(validate_schedule(&mp, &s).is_empty(), "seed {seed}: {:?}", validate_schedule(&mp, &s));
            for w in s.plans.windows(2) {
                assert!((w[1].available - (w[0].carry_out + mp.periods[w[1].period - 1].budget_release)).abs() < 1e-9);
            }
        }
    }
    assert!(solved >= 25, "only {solved} schedules");
}

fn with_providers(g: &Generated, seed: u64) -> SubsidyInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.instance.site_count;
    let mut providers = Vec::new();
    for _ in 0..2 {
        let budget = rng.random_range(0.0..15.0);
        let mut bids = Vec::new();
        for i in 0..n {
            if rng.random_bool(0.5) {
                let subsidy = g.instance.cost[i] * rng.random_range(0.2..1.2);
                bids.push(Bid { site: SiteId(i), subsidy, price: rng.random_range(0.5..6.0) });
            }
        }
        providers.push(Provider { budget, bids });
    }
    SubsidyInstance { base: g.instance.clone(), providers }
}

#[test]
fn government_only_subsidy_equals_ipac() {
    for seed in 0..50 {
        let g = small(300 + seed, 12);
        let s = SubsidyInstance { base: g.instance.clone(), providers: vec![] };
        match (subsidy_solve(&s), ipac_solve(&g.instance)) {
            (Ok(o), Ok(run)) => {
                assert_eq!(o.selected(), run.solution.selected);
                assert_eq!(o.subsidy_paid, run.solution.total_cost);
            }
            (Err(_), Err(_)) => {}
            (a, b) => panic!("seed {seed}: {a:?} vs {b:?}"),
        }
    }
}

#[test]
fn subsidy_outcomes_validate_and_respect_the_optimum() {
    let mut solved = 0;
    for seed in 0..50 {
        let g = gen_instance(&GenParams {
            site_count: 7,
            interest_count: 5,
            radius: 6.0,
            budget_fraction: 0.5,
            seed: 400 + seed,
            ..GenParams::default()
        })
        .unwrap();
        let s = with_providers(&g, seed);
        let exact = exact_subsidy(&s);
        if let Ok(o) = subsidy_solve(&s) {
            solved += 1;
            assert!(validate_outcome(&s, &o).is_empty(), "seed {seed}");
            let opt = exact.expect("heuristic found a feasible allocation");
            assert!(validate_outcome(&s, &opt).is_empty());
            assert!(o.total_demand <= opt.total_demand + 1e-9);
        }
    }
    assert!(solved >= 40, "only {solved} outcomes");
}
