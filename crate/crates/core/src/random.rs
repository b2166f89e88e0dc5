//! Seeded generators for teams and models used by the verification suites.
//!
//! Weights are multiples of `1/D` so every sampled distribution is exact.

use std::collections::BTreeSet;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::hvmodel::{empirical_domain, hidden_domain, Model};
use crate::json::TeamData;
use crate::prob::ProbTeam;
use crate::scalar::Scalar;
use crate::team::{Row, Team};
use crate::value::{Value, Var};

pub use rand::SeedableRng;
pub type Rng64 = ChaCha8Rng;

/// Default weight denominator.
pub const DENOMINATOR: usize = 120;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symbols `0..k`.
pub fn symbols(k: usize) -> Vec<Value> {
    (0..k).map(|i| Value::new(i.to_string())).collect()
}

/// Splits `total` into `parts` positive integers, uniformly over compositions.
pub fn composition(rng: &mut Rng64, total: usize, parts: usize) -> Vec<usize> {
    assert!(parts >= 1 && parts <= total, "cannot split {total} into {parts} positive parts");
    let mut cuts: Vec<usize> = (1..total).collect::<Vec<_>>();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain([total]) {
        out.push(c - prev);
        prev = c;
    }
    out
}

/// Random weights `k/D` on the rows of a nonempty team.
pub fn weigh<T: Scalar>(rng: &mut Rng64, team: &Team, denominator: usize) -> ProbTeam<T> {
    let d = denominator.max(team.len());
    let ks = composition(rng, d, team.len());
    let den = T::from_usize(d).expect("denominator fits the scalar");
    let rows = team.rows().cloned().zip(ks).map(|(r, k)| (r, Ratio::new(T::from_usize(k).expect("fits"), den.clone())));
    ProbTeam::with_universe(team.domain().to_vec(), rows, team.universe().iter().cloned())
        .expect("a composition of D sums to one")
}

/// A team with between `1` and `max_rows` distinct rows over `k` symbols.
pub fn team(rng: &mut Rng64, domain: &[Var], k: usize, max_rows: usize) -> Team {
    let syms = symbols(k);
    let space = k.checked_pow(domain.len() as u32).unwrap_or(usize::MAX);
    let want = rng.gen_range(1..=max_rows.min(space).max(1));
    let mut rows: BTreeSet<Row> = BTreeSet::new();
    while rows.len() < want {
        rows.insert(domain.iter().map(|_| syms[rng.gen_range(0..k)].clone()).collect());
    }
    Team::with_universe(domain.to_vec(), rows, syms).expect("rows match the domain")
}

/// Empirical model whose measurement and outcome columns each take at most
/// `values` symbols, prefixed so components stay distinguishable.
pub fn empirical_team(rng: &mut Rng64, arity: usize, values: usize, max_rows: usize) -> Team {
    let domain = empirical_domain(arity);
    let mut rows: BTreeSet<Row> = BTreeSet::new();
    let want = rng.gen_range(1..=max_rows);
    for _ in 0..want {
        let r: Row = (0..2 * arity)
            .map(|c| {
                let tag = if c < arity { "a" } else { "b" };
                Value::new(format!("{tag}{}", rng.gen_range(0..values)))
            })
            .collect();
        rows.insert(r);
    }
    Team::new(domain, rows).expect("rows match the domain")
}

pub fn empirical_model<T: Scalar>(
    rng: &mut Rng64,
    arity: usize,
    values: usize,
    max_rows: usize,
    probabilistic: bool,
) -> Model<T> {
    let t = empirical_team(rng, arity, values, max_rows);
    let data =
        if probabilistic { TeamData::Probabilistic(weigh(rng, &t, DENOMINATOR)) } else { TeamData::Relational(t) };
    Model::empirical(data).expect("generated team is a model")
}

/// Random probabilistic hidden-variable team of the given arity.
pub fn hidden_prob_team<T: Scalar>(rng: &mut Rng64, arity: usize, values: usize, max_rows: usize) -> ProbTeam<T> {
    let t = team(rng, &hidden_domain(arity), values, max_rows);
    weigh(rng, &t, DENOMINATOR)
}

fn nonempty_subset(rng: &mut Rng64, from: &[Value]) -> Vec<Value> {
    loop {
        let s: Vec<Value> = from.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// A hidden-variable model satisfying Locality and λ-Independence.
///
/// Every chosen measurement tuple meets every hidden value, and under a fixed
/// hidden value the outcome sets (or conditional distributions) of component
/// `i` depend only on `mᵢ`, combined as a product.
pub fn local_model<T: Scalar>(
    rng: &mut Rng64,
    arity: usize,
    values: usize,
    hidden: usize,
    probabilistic: bool,
) -> Model<T> {
    let ms: Vec<Vec<Value>> =
        (0..arity).map(|i| (0..values).map(|k| Value::new(format!("m{}{k}", i + 1))).collect()).collect();
    let os: Vec<Value> = (0..values).map(|k| Value::new(format!("o{k}"))).collect();
    let lambdas: Vec<Value> = (0..hidden).map(|k| Value::new(format!("c{k}"))).collect();
    let mut grid: Vec<Row> = vec![Vec::new()];
    for m in &ms {
        grid = grid.into_iter().flat_map(|r| m.iter().map(move |a| [r.clone(), vec![a.clone()]].concat())).collect();
    }
    let grid: Vec<Row> = grid.into_iter().filter(|_| rng.gen_bool(0.7)).collect();
    let grid = if grid.is_empty() { vec![ms.iter().map(|m| m[0].clone()).collect()] } else { grid };
    // outcome weights per (component, measurement index, hidden index)
    let mut local: Vec<Vec<Vec<Vec<(Value, usize)>>>> = Vec::new();
    for m in &ms {
        let mut per_a = Vec::new();
        for _ in m {
            let mut per_c = Vec::new();
            for _ in &lambdas {
                let outs = nonempty_subset(rng, &os);
                let ks = composition(rng, 6.max(outs.len()), outs.len());
                per_c.push(outs.into_iter().zip(ks).collect());
            }
            per_a.push(per_c);
        }
        local.push(per_a);
    }
    let pm = composition(rng, DENOMINATOR.max(grid.len()), grid.len());
    let pl = composition(rng, 6.max(hidden), hidden);
    let mut rows: Vec<(Row, usize, usize)> = Vec::new();
    for (g, wm) in grid.iter().zip(&pm) {
        for (ci, (c, wl)) in lambdas.iter().zip(&pl).enumerate() {
            let mut partial: Vec<(Row, usize, usize)> = vec![(Vec::new(), 1, 1)];
            for i in 0..arity {
                let ai = ms[i].iter().position(|a| *a == g[i]).expect("grid value");
                let dist = &local[i][ai][ci];
                let total: usize = dist.iter().map(|(_, k)| k).sum();
                partial = partial
                    .into_iter()
                    .flat_map(|(r, num, den)| {
                        dist.iter().map(move |(b, k)| ([r.clone(), vec![b.clone()]].concat(), num * k, den * total))
                    })
                    .collect();
            }
            let lt: usize = pl.iter().sum();
            let mt: usize = pm.iter().sum();
            for (outs, num, den) in partial {
                let row = [g.clone(), outs, vec![c.clone()]].concat();
                rows.push((row, num * wm * wl, den * mt * lt));
            }
        }
    }
    let data = if probabilistic {
        let weighted = rows.into_iter().map(|(r, num, den)| {
            let q = Ratio::new(T::from_usize(num).expect("fits"), T::from_usize(den).expect("fits"));
            (r, q)
        });
        TeamData::Probabilistic(ProbTeam::new(hidden_domain(arity), weighted).expect("product weights sum to one"))
    } else {
        TeamData::Relational(Team::new(hidden_domain(arity), rows.into_iter().map(|(r, _, _)| r)).expect("rows"))
    };
    Model::hidden(data).expect("generated team is a model")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::EvalBudget;
    use crate::properties::{check_property, PropertyName};
    use num_bigint::BigInt;

    #[test]
    fn compositions_are_positive() {
        let mut r = rng(3);
        for parts in 1..10 {
            let c = composition(&mut r, 12, parts);
            assert_eq!(c.len(), parts);
            assert_eq!(c.iter().sum::<usize>(), 12);
            assert!(c.iter().all(|&k| k > 0));
        }
    }

    #[test]
    fn local_models_are_local() {
        let mut r = rng(11);
        for i in 0..40 {
            let m: Model<BigInt> = local_model(&mut r, 1 + i % 3, 2, 1 + i % 2, i % 2 == 0);
            for p in [PropertyName::LocH, PropertyName::LambdaIndepH] {
                assert!(check_property(&m, p, &EvalBudget::default()).unwrap(), "{p} on sample {i}");
            }
        }
    }

    #[test]
    fn same_seed_same_team() {
        let d = hidden_domain(2);
        assert_eq!(team(&mut rng(5), &d, 2, 6), team(&mut rng(5), &d, 2, 6));
    }
}
