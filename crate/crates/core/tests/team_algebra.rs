//! Algebraic laws of restriction and extension on relational and
//! probabilistic teams.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use teamcheck::random::{self, Rng64};
use teamcheck::value::vars;
use teamcheck::{Dist, ProbTeam, Team, Value, Var};

fn sample_team(rng: &mut Rng64) -> Team {
    let k = rng.gen_range(1..=3);
    random::team(rng, &vars("x y z"), k, 8)
}

fn sample_vars(rng: &mut Rng64, from: &[Var]) -> Vec<Var> {
    let k = rng.gen_range(0..=from.len());
    from.choose_multiple(rng, k).cloned().collect()
}

fn total(pt: &ProbTeam) -> Ratio<BigInt> {
    pt.weights().fold(Ratio::zero(), |acc, (_, w)| acc + w)
}

fn random_dist(rng: &mut Rng64, values: &[Value]) -> Dist<BigInt> {
    let k = rng.gen_range(1..=values.len());
    let chosen: Vec<&Value> = values.choose_multiple(rng, k).collect();
    let parts = random::composition(rng, 12, k);
    chosen.into_iter().zip(parts).map(|(v, p)| (v.clone(), Ratio::new(BigInt::from(p), BigInt::from(12)))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn restrict_is_idempotent_and_composes(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let t = sample_team(&mut rng);
        let outer = sample_vars(&mut rng, t.domain());
        let inner = sample_vars(&mut rng, &outer);
        let once = t.restrict(&outer).unwrap();
        prop_assert_eq!(once.restrict(&outer).unwrap(), once.clone());
        prop_assert_eq!(once.restrict(&inner).unwrap(), t.restrict(&inner).unwrap());
        // a longer list never has fewer rows
        prop_assert!(t.restrict(&inner).unwrap().len() <= once.len().max(1));
    }

    #[test]
    fn full_universe_skolem_extension_is_generalisation(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let t = sample_team(&mut rng);
        let u = t.universe().clone();
        for x in [Var::from("w"), Var::from("y")] {
            let full: BTreeMap<_, BTreeSet<Value>> = t.rows().map(|r| (r.clone(), u.clone())).collect();
            prop_assert_eq!(t.skolem_extend(&x, &full).unwrap(), t.generalize(&x, &u).unwrap());
        }
    }

    #[test]
    fn fresh_probabilistic_extension_restricts_back(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let t = sample_team(&mut rng);
        let pt: ProbTeam = random::weigh(&mut rng, &t, random::DENOMINATOR);
        let values = random::symbols(3);
        let family: BTreeMap<_, _> = pt.weights().map(|(r, _)| (r.clone(), random_dist(&mut rng, &values))).collect();
        let ext = pt.prob_skolem_extend(&Var::from("w"), &family).unwrap();
        prop_assert!(total(&ext).is_one());
        let back = ext.prob_restrict(t.domain()).unwrap();
        prop_assert!(back.same_distribution(&pt));
        // overwriting an existing variable also keeps the total
        let over = pt.prob_skolem_extend(&Var::from("x"), &family).unwrap();
        prop_assert!(total(&over).is_one());
    }

    #[test]
    fn weights_sum_to_one_after_restriction(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let t = sample_team(&mut rng);
        let pt: ProbTeam = random::weigh(&mut rng, &t, random::DENOMINATOR);
        prop_assert!(total(&pt).is_one());
        let vs = sample_vars(&mut rng, t.domain());
        prop_assert!(total(&pt.prob_restrict(&vs).unwrap()).is_one());
    }

    #[test]
    fn uniform_extension_supports_the_generalisation(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let t = sample_team(&mut rng);
        let pt: ProbTeam = random::weigh(&mut rng, &t, random::DENOMINATOR);
        let k = rng.gen_range(1..=3);
        let a: BTreeSet<Value> = random::symbols(3).into_iter().take(k).collect();
        for x in [Var::from("w"), Var::from("z")] {
            let ext = pt.prob_uniform_extend(&x, &a).unwrap();
            prop_assert!(total(&ext).is_one());
            prop_assert!(ext.support().same_rows(&pt.support().generalize(&x, &a).unwrap()));
        }
    }
}
