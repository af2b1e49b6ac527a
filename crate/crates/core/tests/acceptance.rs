//! Acceptance suite. Runs every criterion, prints one pass/fail line each and
//! exits non-zero if any criterion fails or exceeds its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hotelling::equilibrium::{
    construct_even, construct_mixed, construct_odd, construct_pure, find_partition,
    optimal_locations, verify_multi_unit, Condition, Witness,
};
use hotelling::mixed::{make_olk, mixed_payoff, mu, MeasureQuery, MixedProfile, MixedStrategy};
use hotelling::oracle::{certify_no_deviation, SearchOptions};
use hotelling::{
    has_dominant_player, limit_payoff, masses, q, social_cost, Error, Game, OffsetLocation,
    OffsetProfile, PureProfile, PureStrategy, Rational, Side,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `m` distinct points `j/den` for random `j` in `0..=den`.
fn grid_strategy(r: &mut ChaCha8Rng, m: usize, den: usize) -> PureStrategy {
    let xs = sample(r, den + 1, m)
        .into_iter()
        .map(|j| q(j as i64, den as i64))
        .collect();
    PureStrategy::from_unsorted(xs).expect("distinct grid points")
}

fn random_strategy(r: &mut ChaCha8Rng, m: usize) -> PureStrategy {
    const DENS: [usize; 10] = [7, 8, 9, 10, 12, 16, 20, 24, 30, 64];
    let den = DENS[r.gen_range(0..DENS.len())].max(m);
    grid_strategy(r, m, den)
}

fn game(counts: &[usize]) -> Game {
    Game::new(counts.to_vec()).expect("valid game")
}

fn ac1() -> Check {
    for k in 1..=5usize {
        for l in 1..=k {
            let g = game(&[l, k]);
            let prof =
                MixedProfile::new(vec![make_olk(l, k).unwrap(), make_olk(k, k).unwrap()]).unwrap();
            let u = mixed_payoff(&g, &prof).map_err(|e| e.to_string())?;
            let first = q(l as i64, 2 * k as i64);
            let second = q(1, 1) - &first;
            ensure(u == vec![first.clone(), second.clone()], || {
                format!("(l,k)=({l},{k}): got {u:?}, expected [{first}, {second}]")
            })?;
        }
    }
    Ok("15 games exact".into())
}

fn ac2() -> Check {
    let opts = SearchOptions::default();
    let mut r = rng(2);
    let mut tested = 0usize;
    for k in 1..=5usize {
        let opt = optimal_locations(k).unwrap();
        for l in 1..=k {
            let g = game(&[l, k]);
            let x1 = make_olk(l, k).unwrap();
            let prof = MixedProfile::new(vec![x1.clone(), make_olk(k, k).unwrap()]).unwrap();
            let res = certify_no_deviation(&g, &prof, &opts).map_err(|e| e.to_string())?;
            for (i, d) in res.iter().enumerate() {
                ensure(d.exhaustive, || {
                    format!("({l},{k}) player {}: search not exhaustive", i + 1)
                })?;
                ensure(!d.gain.is_positive(), || {
                    format!("({l},{k}) player {}: gain {}", i + 1, d.gain)
                })?;
            }
            let target = q(1, 1) - q(l as i64, 2 * k as i64);
            let mut count = 0;
            while count < 200 {
                let s2 = match count % 3 {
                    0 => random_strategy(&mut r, k),
                    1 => {
                        let den = 2 * k * r.gen_range(1..=4);
                        grid_strategy(&mut r, k, den)
                    }
                    _ => {
                        // Move one optimal location slightly.
                        let mut xs = opt.clone();
                        let j = r.gen_range(0..k);
                        let shift = q(r.gen_range(1..=5), 40 * k as i64);
                        xs[j] = if r.gen_bool(0.5) {
                            &xs[j] + &shift
                        } else {
                            &xs[j] - &shift
                        };
                        match PureStrategy::from_unsorted(xs) {
                            Ok(s) if s.locations().iter().all(Rational::in_unit_interval) => s,
                            _ => continue,
                        }
                    }
                };
                if s2.locations() == opt.as_slice() {
                    continue;
                }
                let p =
                    MixedProfile::new(vec![x1.clone(), MixedStrategy::pure(s2.clone())]).unwrap();
                let u2 = mixed_payoff(&g, &p).map_err(|e| e.to_string())?.remove(1);
                ensure(u2 < target, || {
                    format!(
                        "({l},{k}) s2={:?}: u2={u2} not below {target}",
                        s2.locations()
                    )
                })?;
                count += 1;
                tested += 1;
            }
        }
    }
    Ok(format!("15 games certified, {tested} strict deviations"))
}

fn ac3() -> Check {
    let mut r = rng(3);
    let half = q(1, 2);
    let mut equalities = 0;
    for k in 1..=4usize {
        let opt = PureStrategy::new(optimal_locations(k).unwrap()).unwrap();
        for t in 0..1000 {
            let s = if t == 0 {
                opt.clone()
            } else if t % 2 == 0 {
                let den = 2 * k * r.gen_range(1..=6);
                grid_strategy(&mut r, k, den)
            } else {
                random_strategy(&mut r, k)
            };
            let prof = PureProfile::new(vec![opt.clone(), s.clone()]).unwrap();
            let u2 = masses(&prof).payoffs[1].clone();
            ensure(u2 <= half, || {
                format!("k={k} s={:?}: u2={u2} above 1/2", s.locations())
            })?;
            ensure((u2 == half) == (s == opt), || {
                format!(
                    "k={k} s={:?}: u2={u2}, equality must hold only at the optimum",
                    s.locations()
                )
            })?;
            if u2 == half {
                equalities += 1;
            }
        }
    }
    Ok(format!(
        "4000 profiles, {equalities} equalities all at the optimum"
    ))
}

fn ac4() -> Check {
    let mut r = rng(4);
    for k in 1..=8usize {
        let opt = social_cost(&optimal_locations(k).unwrap()).unwrap();
        ensure(opt == q(1, 4 * k as i64), || {
            format!("k={k}: optimum cost {opt}")
        })?;
        for _ in 0..1000 {
            let s = random_strategy(&mut r, k);
            let c = social_cost(s.locations()).unwrap();
            ensure(c >= opt, || {
                format!("k={k}: {:?} costs {c} < {opt}", s.locations())
            })?;
        }
    }
    Ok("8 optima exact, 8000 random sets dominated".into())
}

/// Every ordered count tuple with at most 5 players, counts 1..=4 and
/// 4 <= n <= 12.
fn sweep_games() -> Vec<Game> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (1..=4).map(|c| vec![c]).collect();
    while let Some(counts) = stack.pop() {
        let n: usize = counts.iter().sum();
        if (4..=12).contains(&n) {
            out.push(game(&counts));
        }
        if counts.len() < 5 {
            for c in 1..=4 {
                let mut next = counts.clone();
                next.push(c);
                stack.push(next);
            }
        }
    }
    out.sort_by(|a, b| a.counts().cmp(b.counts()));
    out
}

fn ac5() -> Check {
    let (mut built, mut refused) = (0, 0);
    for g in sweep_games() {
        if has_dominant_player(&g).is_some() {
            for (name, res) in [("even", construct_even(&g)), ("odd", construct_odd(&g))] {
                ensure(
                    matches!(res, Err(Error::ConstructionUnavailable(_))),
                    || format!("{g}: {name} constructor accepted a dominant-player game"),
                )?;
            }
            refused += 1;
            continue;
        }
        let s = construct_pure(&g).map_err(|e| format!("{g}: {e}"))?;
        let report = multi_unit(&g, &s)?;
        ensure(report, || {
            format!("{g}: constructed profile fails verification")
        })?;
        built += 1;
    }
    Ok(format!(
        "{built} constructed and verified, {refused} dominant games refused"
    ))
}

fn multi_unit(g: &Game, s: &PureProfile) -> Result<bool, String> {
    verify_multi_unit(g, s)
        .map(|r| r.verdict)
        .map_err(|e| format!("{g}: {e}"))
}

fn ac6() -> Check {
    let mut checked = 0;
    for g in sweep_games() {
        if g.total() % 2 == 0 || has_dominant_player(&g).is_some() {
            continue;
        }
        let s = construct_odd(&g).map_err(|e| format!("{g}: {e}"))?;
        let p = q(1, g.total() as i64 + 1);
        let smallest = g.ascending_order()[0];
        let bonus = &p * (q(1, 1) + q(1, g.count(smallest) as i64));
        for f in masses(&s).facilities {
            let expected = if f.player == smallest { &bonus } else { &p };
            ensure(f.mass == *expected, || {
                format!(
                    "{g}: player {} at {} attracts {}, expected {expected}",
                    f.player + 1,
                    f.location,
                    f.mass
                )
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} facility masses exact"))
}

fn ac7() -> Check {
    let g = game(&[1, 1, 4]);
    let plan = find_partition(&g)
        .map_err(|e| e.to_string())?
        .ok_or("no plan for (1,1,4)")?;
    let prof = construct_mixed(&g, &plan).map_err(|e| e.to_string())?;
    let u = mixed_payoff(&g, &prof).map_err(|e| e.to_string())?;
    ensure(u == vec![q(1, 8), q(1, 8), q(3, 4)], || {
        format!("payoffs {u:?}")
    })?;
    let res =
        certify_no_deviation(&g, &prof, &SearchOptions::default()).map_err(|e| e.to_string())?;
    for (i, d) in res.iter().enumerate() {
        ensure(d.exhaustive && !d.gain.is_positive(), || {
            format!("player {}: gain {}", i + 1, d.gain)
        })?;
    }
    Ok("payoffs (1/8, 1/8, 3/4), no beneficial deviation".into())
}

fn strat(xs: &[(i64, i64)]) -> PureStrategy {
    PureStrategy::new(xs.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
}

fn ac8() -> Check {
    let g = game(&[1, 1, 2, 2]);
    let s3 = PureProfile::new(vec![
        strat(&[(6, 7)]),
        strat(&[(4, 7)]),
        strat(&[(1, 7), (3, 7)]),
        strat(&[(1, 7), (6, 7)]),
    ])
    .unwrap();
    let u3 = masses(&s3).payoffs[2].clone();
    ensure(u3 == q(5, 14), || {
        format!("reconstruction gives u3 = {u3}, expected 5/14")
    })?;
    let r3 = verify_multi_unit(&g, &s3).map_err(|e| e.to_string())?;
    let c = r3
        .condition(Condition::NoOwnNeighbor)
        .ok_or("missing condition")?;
    ensure(!c.passed, || "lone own-neighbor condition passed".into())?;
    ensure(
        matches!(&c.witness, Some(Witness::OwnNeighbor { player: 2, position, .. }) if *position == q(3, 7)),
        || format!("unexpected witness {:?}", c.witness),
    )?;
    let deviation = vec![
        OffsetLocation {
            position: q(1, 7),
            side: Side::Above,
        },
        OffsetLocation {
            position: q(4, 7),
            side: Side::Below,
        },
    ];
    let lim = limit_payoff(&OffsetProfile::with_deviation(&s3, 2, deviation), 2)
        .map_err(|e| e.to_string())?;
    ensure(lim.payoffs[2] == q(3, 7), || {
        format!("deviation payoff {}", lim.payoffs[2])
    })?;

    let s4 = PureProfile::new(vec![
        strat(&[(1, 7)]),
        strat(&[(4, 7)]),
        strat(&[(3, 7), (6, 7)]),
        strat(&[(1, 7), (6, 7)]),
    ])
    .unwrap();
    let r4 = verify_multi_unit(&g, &s4).map_err(|e| e.to_string())?;
    let c = r4
        .condition(Condition::EqualMasses)
        .ok_or("missing condition")?;
    ensure(!r4.verdict && !c.passed, || {
        "equal-mass condition passed".into()
    })?;
    match &c.witness {
        Some(Witness::UnequalMasses {
            player: 2,
            low_mass,
            high_mass,
            low_position,
            high_position,
        }) => ensure(
            *low_mass == q(1, 7)
                && *high_mass == q(3, 14)
                && *low_position == q(6, 7)
                && *high_position == q(3, 7),
            || format!("masses {low_mass} at {low_position}, {high_mass} at {high_position}"),
        )?,
        other => return Err(format!("unexpected witness {other:?}")),
    }
    Ok("u3 = 5/14, own-neighbor at 3/7, deviation 3/7, masses 1/7 vs 3/14".into())
}

fn random_mixed(r: &mut ChaCha8Rng) -> MixedStrategy {
    let m = r.gen_range(1..=4);
    let size = r.gen_range(1..=5);
    let mut strategies: Vec<PureStrategy> = Vec::new();
    while strategies.len() < size {
        let s = random_strategy(r, m);
        if !strategies.contains(&s) {
            strategies.push(s);
        }
    }
    let weights: Vec<i64> = (0..size).map(|_| r.gen_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    MixedStrategy::new(
        strategies
            .into_iter()
            .zip(weights)
            .map(|(s, w)| (s, q(w, total)))
            .collect(),
    )
    .unwrap()
}

fn random_point(r: &mut ChaCha8Rng) -> Rational {
    const DENS: [i64; 6] = [7, 8, 10, 16, 20, 64];
    let d = DENS[r.gen_range(0..DENS.len())];
    q(r.gen_range(0..=d), d)
}

/// Two disjoint queries.
fn disjoint_pair(r: &mut ChaCha8Rng) -> (MeasureQuery, MeasureQuery) {
    let mut pts = [random_point(r), random_point(r), random_point(r)];
    pts.sort();
    let [a, b, c] = pts;
    match r.gen_range(0..4) {
        0 => (
            MeasureQuery::interval(a, b.clone(), true, false).unwrap(),
            MeasureQuery::interval(b, c, true, true).unwrap(),
        ),
        1 => (
            MeasureQuery::Point(b.clone()),
            MeasureQuery::interval(b, q(1, 1), false, true).unwrap(),
        ),
        2 if a != b => (MeasureQuery::Point(a), MeasureQuery::Point(b)),
        _ => (
            MeasureQuery::closed(a.clone(), a).unwrap(),
            MeasureQuery::interval(b, c, false, true).unwrap(),
        ),
    }
}

fn ac9() -> Check {
    let mut r = rng(9);
    let empty = MeasureQuery::interval(q(1, 3), q(1, 3), false, false).unwrap();
    for _ in 0..500 {
        let x = random_mixed(&mut r);
        ensure(mu(&x, &empty).is_zero(), || {
            "empty set has positive measure".into()
        })?;
        for _ in 0..4 {
            let (a, b) = disjoint_pair(&mut r);
            let (ma, mb) = (mu(&x, &a), mu(&x, &b));
            ensure(!ma.is_negative() && !mb.is_negative(), || {
                "negative measure".into()
            })?;
            let disjoint = x
                .support()
                .iter()
                .flat_map(|e| e.strategy.locations())
                .all(|f| !(a.contains(f) && b.contains(f)));
            ensure(disjoint, || format!("queries {a:?} and {b:?} overlap"))?;
            let union: Rational = x
                .support()
                .iter()
                .map(|e| {
                    let n = e
                        .strategy
                        .locations()
                        .iter()
                        .filter(|f| a.contains(f) || b.contains(f))
                        .count();
                    &e.prob * Rational::from(n as i64)
                })
                .sum();
            ensure(&ma + &mb == union, || {
                format!("additivity fails for {a:?}, {b:?}")
            })?;
        }
        let whole = MeasureQuery::closed(q(0, 1), q(1, 1)).unwrap();
        ensure(
            mu(&x, &whole) == Rational::from(x.facility_count() as i64),
            || "total mass".into(),
        )?;
    }
    Ok("500 strategies, 2000 disjoint pairs".into())
}

fn random_small_game(r: &mut ChaCha8Rng) -> Game {
    loop {
        let players = r.gen_range(2..=5);
        let counts: Vec<usize> = (0..players).map(|_| r.gen_range(1..=4)).collect();
        if counts.iter().sum::<usize>() <= 8 {
            return game(&counts);
        }
    }
}

fn random_profile(r: &mut ChaCha8Rng, g: &Game, kind: usize) -> PureProfile {
    let n = g.total();
    let constructed = construct_pure(g).ok();
    let lattice = |r: &mut ChaCha8Rng| {
        let den = [2 * n, n + 1, 2 * (n + 1), 7, 8][r.gen_range(0..5)];
        let strategies = g
            .counts()
            .iter()
            .map(|&c| grid_strategy(r, c, den))
            .collect();
        PureProfile::new(strategies).unwrap()
    };
    match (kind, constructed) {
        (0, Some(s)) => s,
        (2, Some(s)) => {
            // Move one facility of one player to another lattice point.
            let player = r.gen_range(0..g.players());
            let den = if n.is_multiple_of(2) {
                2 * n
            } else {
                2 * (n + 1)
            };
            loop {
                let mut xs = s.strategy(player).locations().to_vec();
                let j = r.gen_range(0..xs.len());
                xs[j] = q(r.gen_range(0..=den as i64), den as i64);
                if let Ok(next) = PureStrategy::from_unsorted(xs) {
                    if next.len() == g.count(player) {
                        return s.with_strategy(player, next);
                    }
                }
            }
        }
        (3, _) => {
            PureProfile::new(g.counts().iter().map(|&c| random_strategy(r, c)).collect()).unwrap()
        }
        _ => lattice(r),
    }
}

fn ac10() -> Check {
    let mut r = rng(10);
    let opts = SearchOptions::default();
    let (mut accepted, mut rejected) = (0, 0);
    for t in 0..500 {
        let g = random_small_game(&mut r);
        let s = random_profile(&mut r, &g, t % 4);
        let verdict = multi_unit(&g, &s)?;
        let res = certify_no_deviation(&g, &MixedProfile::from_pure(&s), &opts)
            .map_err(|e| format!("{g}: {e}"))?;
        ensure(res.iter().all(|d| d.exhaustive), || {
            format!("{g}: oracle search not exhaustive")
        })?;
        let stable = res.iter().all(|d| !d.gain.is_positive());
        ensure(verdict == stable, || {
            let gains: Vec<String> = res.iter().map(|d| d.gain.to_string()).collect();
            format!(
                "{g} {:?}: verifier says {verdict}, oracle gains {gains:?}",
                s.strategies()
                    .iter()
                    .map(|x| x.locations().to_vec())
                    .collect::<Vec<_>>()
            )
        })?;
        if verdict {
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    ensure(accepted > 0 && rejected > 0, || {
        format!("degenerate suite: {accepted} equilibria, {rejected} others")
    })?;
    Ok(format!(
        "500 profiles agree ({accepted} equilibria, {rejected} refuted)"
    ))
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion {
            id: 1,
            name: "two-player equilibrium values",
            budget: secs(1),
            run: ac1,
        },
        Criterion {
            id: 2,
            name: "two-player no-deviation",
            budget: secs(30),
            run: ac2,
        },
        Criterion {
            id: 3,
            name: "symmetric uniqueness probe",
            budget: secs(30),
            run: ac3,
        },
        Criterion {
            id: 4,
            name: "social-cost optimum",
            budget: secs(10),
            run: ac4,
        },
        Criterion {
            id: 5,
            name: "constructor soundness sweep",
            budget: secs(60),
            run: ac5,
        },
        Criterion {
            id: 6,
            name: "odd-construction masses",
            budget: None,
            run: ac6,
        },
        Criterion {
            id: 7,
            name: "dominant-player mixed equilibrium",
            budget: secs(10),
            run: ac7,
        },
        Criterion {
            id: 8,
            name: "lone-neighbor and unequal-mass diagnostics",
            budget: None,
            run: ac8,
        },
        Criterion {
            id: 9,
            name: "measure axioms",
            budget: secs(10),
            run: ac9,
        },
        Criterion {
            id: 10,
            name: "oracle and verifier agreement",
            budget: secs(300),
            run: ac10,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("[PASS] AC-{} {}: {detail} ({elapsed:.2?})", c.id, c.name),
            Err(why) => {
                failures += 1;
                println!("[FAIL] AC-{} {}: {why} ({elapsed:.2?})", c.id, c.name);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
