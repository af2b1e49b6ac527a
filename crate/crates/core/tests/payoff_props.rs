use hotelling::{
    limit_payoff, masses, q, social_cost, OffsetLocation, OffsetProfile, PureProfile, PureStrategy,
    Rational, Side,
};
use proptest::prelude::*;

fn any_profile() -> impl Strategy<Value = PureProfile> {
    prop_oneof![Just(7i64), Just(8), Just(10), Just(12)].prop_flat_map(|den| {
        let player = (1usize..=3)
            .prop_flat_map(move |m| prop::sample::subsequence((0..=den).collect::<Vec<_>>(), m));
        prop::collection::vec(player, 1..=4).prop_map(move |players| {
            let strategies = players
                .into_iter()
                .map(|nums| {
                    PureStrategy::new(nums.into_iter().map(|j| q(j, den)).collect()).unwrap()
                })
                .collect();
            PureProfile::new(strategies).unwrap()
        })
    })
}

/// Independent floating-point payoff: each uniform customer on a fine grid
/// goes to the nearest occupied point and splits among players there.
fn sampled_payoffs(profile: &PureProfile, cells: usize) -> Vec<f64> {
    let occ: Vec<(f64, Vec<usize>)> = profile
        .occupancy()
        .into_iter()
        .map(|(x, owners)| (x.to_f64(), owners.into_iter().collect()))
        .collect();
    let mut pay = vec![0.0; profile.players()];
    for c in 0..cells {
        let t = (c as f64 + 0.5) / cells as f64;
        let (_, owners) = occ
            .iter()
            .min_by(|a, b| (a.0 - t).abs().partial_cmp(&(b.0 - t).abs()).unwrap())
            .unwrap();
        for &p in owners {
            pay[p] += 1.0 / (cells as f64 * owners.len() as f64);
        }
    }
    pay
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn payoffs_sum_to_one(s in any_profile()) {
        let total: Rational = masses(&s).payoffs.iter().sum();
        prop_assert_eq!(total, q(1, 1));
    }

    #[test]
    fn side_masses_are_consistent(s in any_profile()) {
        let report = masses(&s);
        for f in &report.facilities {
            prop_assert!(!f.c_l.is_negative() && !f.c_r.is_negative());
            prop_assert!(f.mass <= &f.c_l + &f.c_r);
        }
    }

    #[test]
    fn relabelling_players_permutes_payoffs(s in any_profile(), rot in 0usize..4) {
        let n = s.players();
        let order: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let base = masses(&s).payoffs;
        let moved = masses(&s.permuted(&order)).payoffs;
        for (i, &j) in order.iter().enumerate() {
            prop_assert_eq!(&moved[i], &base[j]);
        }
    }

    #[test]
    fn closed_form_matches_sampling(s in any_profile()) {
        let exact = masses(&s).payoffs;
        let approx = sampled_payoffs(&s, 20_000);
        for (e, a) in exact.iter().zip(approx) {
            prop_assert!((e.to_f64() - a).abs() < 1e-3, "{} vs {}", e, a);
        }
    }

    #[test]
    fn limit_payoff_is_the_limit_of_small_offsets(
        s in any_profile(),
        pick in 0usize..8,
        sides in prop::collection::vec(0u8..3, 3),
    ) {
        let player = pick % s.players();
        let locs = s.strategy(player).locations();
        let dev: Vec<OffsetLocation> = locs
            .iter()
            .zip(sides.iter().cycle())
            .filter_map(|(x, &k)| {
                let side = [Side::Below, Side::Exact, Side::Above][k as usize];
                OffsetLocation::new(x.clone(), side).ok().or_else(|| Some(OffsetLocation::exact(x.clone())))
            })
            .collect();
        let lim = limit_payoff(&OffsetProfile::with_deviation(&s, player, dev.clone()), player).unwrap();
        for d in [q(1, 1_000), q(1, 100_000)] {
            let realized = PureStrategy::from_unsorted(dev.iter().map(|o| o.realize(&d)).collect()).unwrap();
            let u = masses(&s.with_strategy(player, realized)).payoffs;
            for (a, b) in u.iter().zip(&lim.payoffs) {
                let bound = &d * Rational::from(4 * s.facilities().count() as i64);
                prop_assert!((a - b).abs() <= bound, "offset {}: {} vs {}", d, a, b);
            }
        }
    }

    #[test]
    fn social_cost_is_bounded_below(den in 2i64..40, nums in prop::collection::vec(0i64..40, 1..8)) {
        let xs: Vec<Rational> = nums.iter().map(|&j| q(j % (den + 1), den)).collect();
        let k = xs.iter().collect::<std::collections::BTreeSet<_>>().len();
        let c = social_cost(&xs).unwrap();
        prop_assert!(c >= q(1, 4 * k as i64));
    }
}

#[test]
fn social_cost_matches_riemann_sum() {
    let sets = [
        vec![q(1, 3)],
        vec![q(0, 1), q(1, 2)],
        vec![q(1, 10), q(2, 5), q(9, 10)],
        vec![q(0, 1), q(1, 1)],
    ];
    for xs in sets {
        let exact = social_cost(&xs).unwrap().to_f64();
        let pts: Vec<f64> = xs.iter().map(Rational::to_f64).collect();
        let cells = 200_000;
        let approx: f64 = (0..cells)
            .map(|c| {
                let t = (c as f64 + 0.5) / cells as f64;
                pts.iter()
                    .map(|x| (x - t).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / cells as f64;
        assert!((exact - approx).abs() < 1e-6, "{xs:?}: {exact} vs {approx}");
    }
}
