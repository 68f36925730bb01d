//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Run with `cargo test -p marketlab --test acceptance -- --nocapture` to see
//! the report.

mod common;

use std::time::{Duration, Instant};

use common::*;
use marketlab::bridge::{
    embed_pi_fixed_m, market_to_system, system_to_fi_market, system_to_pi_market, LinearSystem,
    Realization,
};
use marketlab::circuit::{
    circuit_to_inequalities, compile_market, extend_solution, inequalities_to_equations,
};
use marketlab::dsmc::{simulate_dsmc, summary_stats};
use marketlab::market::{
    net_flow, simulate_as, Action, MarketModel, Population, PopulationCounts, PriceRule,
    PriceSeries, Strategy,
};
use marketlab::predict::{
    estimate_cone_ratio, gaussian_covariance, predict_exact, predict_limit, ConeOptions,
};
use marketlab::{DsmcParams, Market, Prices, Rational};
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

fn report(criterion: &str, ok: bool, elapsed: Duration, detail: &str) {
    println!(
        "criterion {criterion}: {} ({:.2?}) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_inequality_counts() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = Vec::new();
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let m = rng.random_range(1..=20);
        let sys = circuit_to_inequalities(&random_circuit(&mut rng, n, m));
        let cols_ok = sys.variables.len() == n + m + 2
            && sys.target.len() == n + m + 2
            && sys.rows.iter().all(|r| r.len() == n + m + 2);
        if sys.rows.len() != 3 * m + 2 || !cols_ok {
            bad.push((n, m, sys.rows.len()));
        }
    }
    let elapsed = start.elapsed();
    report(
        "1",
        bad.is_empty() && elapsed < Duration::from_secs(1),
        elapsed,
        &format!("200 circuits, mismatches {bad:?}"),
    );
}

#[test]
fn criterion_2_inequality_semantics() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut vectors = 0u64;
    for case in 0..50 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=12);
        let circuit = random_circuit(&mut rng, n, m);
        let sys = circuit_to_inequalities(&circuit);
        let cols = n + m + 2;
        let rows: Vec<_> = sys.rows.iter().map(|r| masks(r)).collect();
        let target = masks(&sys.target);
        let input_mask = (1u64 << n) - 1;
        let sols: Vec<u64> = (0..1u64 << cols)
            .into_par_iter()
            .filter(|&x| rows.iter().all(|&r| eval_mask(r, x) > 0))
            .collect();
        vectors += 1 << cols;
        let mut per_input = vec![0u32; 1 << n];
        for &x in &sols {
            let r = x & input_mask;
            per_input[r as usize] += 1;
            let out = circuit.eval(&bits(r, n)).unwrap();
            if (eval_mask(target, x) > 0) != out {
                failures.push(format!("case {case}: target sign wrong for input {r:b}"));
            }
        }
        if let Some(r) = per_input.iter().position(|&c| c != 1) {
            failures.push(format!(
                "case {case}: input {r:b} has {} extensions",
                per_input[r]
            ));
        }
    }
    let elapsed = start.elapsed();
    report(
        "2",
        failures.is_empty() && elapsed < Duration::from_secs(120),
        elapsed,
        &format!("50 circuits, {vectors} vectors enumerated, failures {failures:?}"),
    );
}

#[test]
fn criterion_3_slack_equations() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    for case in 0..50 {
        let m = rng.random_range(1..=3);
        let n = rng.random_range(3..=5);
        let a: Vec<Vec<i8>> = (0..m).map(|_| random_row(&mut rng, n)).collect();
        let eq = inequalities_to_equations(&a, n).unwrap();
        let cols = eq.columns();
        if eq.rows.len() != m * n - m + 1 || cols != 2 * m * n - 3 * m + n + 1 {
            failures.push(format!("case {case}: shape {}x{cols}", eq.rows.len()));
            continue;
        }
        let a_masks: Vec<_> = a.iter().map(|r| masks(r)).collect();
        let mut xs: Vec<u64> = (0..1u64 << n)
            .filter(|&x| a_masks.iter().all(|&r| eval_mask(r, x) > 0))
            .collect();
        let b_masks: Vec<_> = eq.rows.iter().map(|r| masks(r)).collect();
        let x_mask = (1u64 << n) - 1;
        let ys: Vec<u64> = (0..1u64 << cols)
            .into_par_iter()
            .filter(|&y| b_masks.iter().all(|&r| eval_mask(r, y) == 1))
            .collect();
        let mut projections: Vec<u64> = ys.iter().map(|y| y & x_mask).collect();
        projections.sort_unstable();
        xs.sort_unstable();
        if projections != xs {
            failures.push(format!(
                "case {case}: {} inequality solutions, {} equation solutions",
                xs.len(),
                ys.len()
            ));
        }
        // The closed-form extension is the solution found by enumeration.
        for &y in &ys {
            let ext = extend_solution(&a, &bits(y & x_mask, n)).unwrap().unwrap();
            if ext != bits(y, cols) {
                failures.push(format!("case {case}: extension mismatch"));
                break;
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "3",
        failures.is_empty() && elapsed < Duration::from_secs(60),
        elapsed,
        &format!("50 systems, failures {failures:?}"),
    );
}

#[test]
fn criterion_4_reduction_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut cases = 0;
    let mut largest_pi = 0;
    while cases < 30 {
        let n = rng.random_range(1..=8);
        let (m_out, m_cond) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let out = random_circuit(&mut rng, n, m_out);
        let cond = random_circuit(&mut rng, n, m_cond);
        let (mut hits, mut ups) = (0i64, 0i64);
        for r in 0..1u64 << n {
            let x = bits(r, n);
            if cond.eval(&x).unwrap() {
                hits += 1;
                ups += out.eval(&x).unwrap() as i64;
            }
        }
        if hits == 0 {
            continue;
        }
        cases += 1;
        let expected = ratio(ups, hits);
        let fi = compile_market(&out, Some(&cond), PriceRule::FixedIncrement).unwrap();
        let pi = compile_market(&out, Some(&cond), PriceRule::ProportionalIncrement).unwrap();
        largest_pi = largest_pi.max(pi.market.h());
        let p_fi = predict_exact(&fi.market, &fi.history).map(|p| p.up);
        let p_pi = predict_exact(&pi.market, &pi.history).map(|p| p.up);
        if p_fi.as_ref() != Ok(&expected) || p_pi.as_ref() != Ok(&expected) {
            failures.push(format!(
                "n={n}: expected {expected}, FI {p_fi:?}, PI {p_pi:?}"
            ));
        }
    }
    let elapsed = start.elapsed();
    report(
        "4",
        failures.is_empty() && elapsed < Duration::from_secs(120),
        elapsed,
        &format!("30 circuit pairs, FI = PI = brute force; largest PI market {largest_pi} strategies; failures {failures:?}"),
    );
}

/// Conditional binomials; independent of the library's sampler.
fn draw_multinomial(rng: &mut ChaCha8Rng, p: &[f64], m: u64) -> Vec<u64> {
    let mut remaining = m;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(p.len());
    for (i, &pi) in p.iter().enumerate() {
        if i + 1 == p.len() {
            out.push(remaining);
            break;
        }
        let q = (pi / mass).clamp(0.0, 1.0);
        let x = if remaining == 0 {
            0
        } else {
            Binomial::new(remaining, q).unwrap().sample(rng)
        };
        out.push(x);
        remaining -= x;
        mass -= pi;
    }
    out
}

/// Empirical `Pr[up | history]` at finite `m` from `samples` populations.
fn finite_m_frequency(model: &Market, history: &Prices, samples: u64, seed: u64) -> (u64, u64) {
    let Population::Multinomial { p } = &model.population else {
        panic!("multinomial market expected")
    };
    let pf: Vec<f64> = p.iter().map(|x| x.to_f64().unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = PriceSeries::single(history.prices()[0].clone());
    let target = model.action_row(history.prices(), history.len()).unwrap();
    let (mut hits, mut ups) = (0, 0);
    for _ in 0..samples {
        let counts = PopulationCounts(draw_multinomial(&mut rng, &pf, model.traders));
        let replay = simulate_as(model, &counts, &initial, history.trading_days()).unwrap();
        if replay == *history {
            hits += 1;
            ups += (net_flow(&target, &counts.0) > 0) as u64;
        }
    }
    (hits, ups)
}

fn passive_fi_market(columns: &[[i64; 3]], p: Vec<Rational>, m: u64) -> Market {
    let strategies = columns
        .iter()
        .map(|c| Strategy::Passive(c.iter().map(|&a| Action::try_from(a).unwrap()).collect()))
        .collect();
    MarketModel::new(
        m,
        ratio(1, 1),
        strategies,
        PriceRule::FixedIncrement,
        Population::Multinomial { p },
    )
    .unwrap()
}

fn limit_vs_finite(model: &Market, history: &Prices, seed: u64) -> (f64, f64, f64, u64) {
    let opts = ConeOptions::new(0.01, 0.01, seed);
    let limit = predict_limit(model, history, &opts).unwrap();
    let (hits, ups) = finite_m_frequency(model, history, 100_000, seed);
    (limit.p_up, limit.half_width, ups as f64 / hits as f64, hits)
}

#[test]
fn criterion_5_limit_predictor_vs_finite_m() {
    let start = Instant::now();
    // Day 1 up with actions (1, -1, -1), day 2 down with (-1, 1, 1): both
    // rows are (1, -1, -1), orthogonal to p. Target day actions (1, -1, -1).
    let model = passive_fi_market(
        &[[1, -1, 1], [-1, 1, -1], [-1, 1, -1]],
        vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)],
        10_000,
    );
    let history = PriceSeries::new(vec![ratio(100, 1), ratio(101, 1), ratio(100, 1)]).unwrap();
    let (limit, hw, freq, hits) = limit_vs_finite(&model, &history, 5);
    let ok = (limit - freq).abs() <= 0.02 && hits > 0;
    report(
        "5",
        ok && start.elapsed() < Duration::from_secs(300),
        start.elapsed(),
        &format!("p=(1/2,1/3,1/6): limit {limit:.4} (+/- {hw:.4}), empirical {freq:.4} over {hits} conditioned of 100000 samples at m=10^4"),
    );
}

#[test]
fn criterion_5b_limit_predictor_nondegenerate_cone() {
    // With p = (1/2, 1/3, 1/6) every balanced row is a multiple of
    // (1, -1, -1), so the ratio above is necessarily 0 or 1. This case has a
    // correlated cone: limit 2/3.
    let start = Instant::now();
    let model = passive_fi_market(
        &[[1, 1, 0], [-1, 0, 0], [0, -1, 0]],
        vec![ratio(1, 3); 3],
        10_000,
    );
    let history = PriceSeries::new(vec![ratio(100, 1), ratio(101, 1)]).unwrap();
    let (limit, hw, freq, hits) = limit_vs_finite(&model, &history, 55);
    let ok = (limit - freq).abs() <= 0.02 && (limit - 2.0 / 3.0).abs() <= 0.01;
    report(
        "5b",
        ok,
        start.elapsed(),
        &format!("p uniform: limit {limit:.4} (+/- {hw:.4}), analytic 0.6667, empirical {freq:.4} over {hits} conditioned samples"),
    );
}

#[test]
fn criterion_6_cone_ratio_orthant() {
    let start = Instant::now();
    let cov: Vec<Vec<f64>> = gaussian_covariance(&[ratio(1, 3), ratio(1, 3), ratio(1, 3)])
        .unwrap()
        .iter()
        .map(|r| r.iter().map(|x| x.to_f64().unwrap()).collect())
        .collect();
    let rho: f64 = -0.5;
    let oracle = (0.25 + rho.asin() / (2.0 * std::f64::consts::PI)) / 0.5;
    let est = estimate_cone_ratio(
        &[vec![1, 0]],
        &[0, 1],
        &cov,
        &ConeOptions::new(0.005, 0.01, 6),
    )
    .unwrap();
    let elapsed = start.elapsed();
    report(
        "6",
        (est.ratio - oracle).abs() <= 0.005 && elapsed < Duration::from_secs(60),
        elapsed,
        &format!(
            "estimate {:.5} vs orthant formula {oracle:.5}; {} cone hits in {} samples",
            est.ratio, est.cone_hits, est.samples
        ),
    );
}

#[test]
fn criterion_7_dsmc_reproduction() {
    let params = DsmcParams {
        traders: 20,
        max_period: 8,
        memory: 2,
        alpha: ratio(1, 4),
        days: 250,
        initial_prices: vec![ratio(80, 1), ratio(82, 1), ratio(90, 1)],
        seed: 1,
    };
    let start = Instant::now();
    let run = simulate_dsmc(&params).unwrap();
    let elapsed = start.elapsed();
    let again = simulate_dsmc(&params).unwrap();

    let alpha = ratio(1, 4);
    let first = params.first_trading_day();
    let steps_ok = (first..run.series.len()).all(|d| {
        let change = run.series.change(d);
        let units = change.clone() / alpha.clone();
        units.is_integer() && change.abs() <= ratio(5, 1)
    });
    let (model, counts, initial) = run.as_market(&params).unwrap();
    let replay = simulate_as(&model, &counts, &initial, params.days).unwrap();
    let stats = summary_stats(&run.series).unwrap();
    let ok = elapsed < Duration::from_secs(1)
        && run.series == again.series
        && steps_ok
        && model.rule == PriceRule::ProportionalIncrement
        && replay == run.series;
    report(
        "7",
        ok,
        elapsed,
        &format!(
            "{} prices, rerun identical {}, steps ok {steps_ok}, switching replay identical {}; \
             mean_change {:.4} change_std {:.4} lag1 {:.4} max_drawup {} max_drawdown {} longest_run {}",
            run.series.len(),
            run.series == again.series,
            replay == run.series,
            stats.mean_change,
            stats.change_std,
            stats.lag1_autocorrelation,
            stats.max_drawup,
            stats.max_drawdown,
            stats.longest_monotone_run
        ),
    );
}

fn realization(rule: PriceRule) -> Realization<Rational> {
    Realization {
        alpha: match rule {
            PriceRule::FixedIncrement => ratio(1, 1),
            PriceRule::ProportionalIncrement => ratio(1, 2),
        },
        initial_price: ratio(100, 1),
    }
}

/// `(solutions, signs)`: the 0-1 solution set and `sgn(c . x)` of each.
fn solutions_with_signs(sys: &LinearSystem) -> Vec<(u64, i64)> {
    let target = masks(&sys.target);
    solution_set(sys)
        .into_iter()
        .map(|x| (x, eval_mask(target, x).signum()))
        .collect()
}

fn market_round_trip(rng: &mut ChaCha8Rng, rule: PriceRule) -> Result<(), String> {
    let h = rng.random_range(1..=12);
    let beta = rng.random_range(1..=10);
    let strategies: Vec<Strategy> = (0..h).map(|_| random_strategy(rng, beta + 1)).collect();
    let r = realization(rule);
    let model = MarketModel::new(
        h as u64,
        r.alpha.clone(),
        strategies,
        rule,
        Population::BernoulliSubset,
    )
    .map_err(|e| e.to_string())?;
    let hidden = PopulationCounts((0..h).map(|_| rng.random_range(0..=1)).collect());
    let initial = PriceSeries::single(r.initial_price.clone());
    let history = simulate_as(&model, &hidden, &initial, beta).map_err(|e| e.to_string())?;

    let (sys, _) = market_to_system(&model, &history).map_err(|e| e.to_string())?;
    let extracted = solutions_with_signs(&sys);
    // Oracle: replay every 0-1 population through the market engine.
    let target = model.action_row(history.prices(), history.len()).unwrap();
    let replayed: Vec<(u64, i64)> = (0..1u64 << h)
        .filter_map(|x| {
            let counts = PopulationCounts(bits(x, h).into_iter().map(u64::from).collect());
            let run = simulate_as(&model, &counts, &initial, beta).ok()?;
            (run == history).then(|| (x, net_flow(&target, &counts.0).signum()))
        })
        .collect();
    if extracted != replayed {
        return Err(format!("{rule:?} h={h}: extraction disagrees with replay"));
    }
    let (m2, h2, _) = match rule {
        PriceRule::FixedIncrement => system_to_fi_market(&sys, &r),
        PriceRule::ProportionalIncrement => system_to_pi_market(&sys, &r),
    }
    .map_err(|e| e.to_string())?;
    let (sys2, _) = market_to_system(&m2, &h2).map_err(|e| e.to_string())?;
    if solutions_with_signs(&sys2) != extracted {
        return Err(format!(
            "{rule:?} h={h}: market -> system -> market changed the solution set"
        ));
    }
    Ok(())
}

fn system_round_trip(rng: &mut ChaCha8Rng, rule: PriceRule) -> Result<(), String> {
    let h = rng.random_range(1..=12);
    let beta = rng.random_range(0..=10);
    let mut sys = LinearSystem::new(h);
    let witness: Vec<i64> = (0..h).map(|_| rng.random_range(0..=1)).collect();
    for _ in 0..beta {
        let row = random_row(rng, h);
        match rule {
            PriceRule::FixedIncrement if rng.random_bool(0.6) => sys.strict.push(row),
            PriceRule::FixedIncrement => {
                sys.equalities.push(row);
                sys.rhs.push(0);
            }
            PriceRule::ProportionalIncrement => {
                // Half the time keep the system satisfiable by a witness.
                let b = if rng.random_bool(0.5) {
                    row.iter().zip(&witness).map(|(&a, &x)| a as i64 * x).sum()
                } else {
                    rng.random_range(-2..=2)
                };
                sys.equalities.push(row);
                sys.rhs.push(b);
            }
        }
    }
    sys.target = random_row(rng, h);
    let r = realization(rule);
    let (model, history, _) = match rule {
        PriceRule::FixedIncrement => system_to_fi_market(&sys, &r),
        PriceRule::ProportionalIncrement => system_to_pi_market(&sys, &r),
    }
    .map_err(|e| e.to_string())?;
    let (back, _) = market_to_system(&model, &history).map_err(|e| e.to_string())?;
    if solutions_with_signs(&back) != solutions_with_signs(&sys) {
        return Err(format!(
            "{rule:?} h={h}: system -> market -> system changed the solution set"
        ));
    }
    Ok(())
}

#[test]
fn criterion_8_round_trips() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    for _ in 0..100 {
        for rule in [PriceRule::FixedIncrement, PriceRule::ProportionalIncrement] {
            if let Err(e) = market_round_trip(&mut rng, rule) {
                failures.push(e);
            }
            if let Err(e) = system_round_trip(&mut rng, rule) {
                failures.push(e);
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "8",
        failures.is_empty() && elapsed < Duration::from_secs(60),
        elapsed,
        &format!("100 markets and 100 systems per rule, failures {failures:?}"),
    );
}

#[test]
fn criterion_9_fixed_m_embedding() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    let mut checked = 0;
    for case in 0..10 {
        let h = rng.random_range(1..=4);
        let m0 = rng.random_range(1..=6u64);
        let beta = rng.random_range(1..=3);
        let strategies: Vec<Strategy> = (0..h)
            .map(|_| Strategy::Passive((0..=beta).map(|_| random_action(&mut rng)).collect()))
            .collect();
        let p = random_probabilities(&mut rng, h);
        let model = MarketModel::new(
            m0,
            ratio(1, 1),
            strategies,
            PriceRule::ProportionalIncrement,
            Population::Multinomial { p },
        )
        .unwrap();
        // A feasible history: replay a random composition of m0.
        let mut counts = vec![0u64; h];
        for _ in 0..m0 {
            counts[rng.random_range(0..h)] += 1;
        }
        let history = simulate_as(
            &model,
            &PopulationCounts(counts),
            &PriceSeries::single(ratio(100, 1)),
            beta,
        )
        .unwrap();
        let original = predict_exact(&model, &history).unwrap();
        for m in m0..=m0 + 3 {
            let (embedded, extended) = embed_pi_fixed_m(&model, &history, m).unwrap();
            checked += 1;
            match predict_exact(&embedded, &extended) {
                Ok(p) if p == original => {}
                other => failures.push(format!(
                    "case {case} m0={m0} m={m}: {other:?} vs {original:?}"
                )),
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "9",
        failures.is_empty() && elapsed < Duration::from_secs(60),
        elapsed,
        &format!(
            "10 markets, {checked} embeddings equal the original exactly; failures {failures:?}"
        ),
    );
}
