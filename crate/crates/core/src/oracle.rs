//! Brute-force references for small instances.
//!
//! Nothing here calls into the solvers it is used to check: values come from
//! exhaustive strategy enumeration with Karp's minimum mean cycle, potentials and
//! progress measures from plain Kleene iteration, truncated games from explicit
//! game-tree expansion.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arena::{reweight, Arc, Arena, GameGraph, Owner, VertexId};
use crate::energy::{ominus, EnergyFunction, EnergyValue};
use crate::error::{Result, SolveError};
use crate::potentials::{restrict, PositionalStrategy};
use crate::rational::Rational;
use crate::values::ValueAssignment;

pub const DEFAULT_STRATEGY_BOUND: u128 = 1_000_000;

fn reachable(graph: &impl GameGraph, from: VertexId) -> Vec<VertexId> {
    let mut seen = vec![false; graph.vertex_count()];
    let mut stack = vec![from];
    seen[from] = true;
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        out.push(u);
        for (_, a) in graph.successors(u) {
            if !seen[a.dst] {
                seen[a.dst] = true;
                stack.push(a.dst);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Minimum mean weight over cycles reachable from `from` (Karp's algorithm on
/// the reachable part, exact rationals).
pub fn min_cycle_mean_reachable(graph: &impl GameGraph, from: VertexId) -> Rational {
    let verts = reachable(graph, from);
    let r = verts.len();
    let mut local = vec![usize::MAX; graph.vertex_count()];
    for (i, &v) in verts.iter().enumerate() {
        local[v] = i;
    }
    let arcs: Vec<(usize, usize, i128)> = verts
        .iter()
        .flat_map(|&u| graph.successors(u).map(|(_, a)| (local[a.src], local[a.dst], a.weight as i128)))
        .collect();
    // walks[k][x]: least weight of a k-arc walk ending at x, starting anywhere.
    let mut walks = vec![vec![None::<i128>; r]; r + 1];
    walks[0] = vec![Some(0); r];
    for k in 1..=r {
        for &(s, d, w) in &arcs {
            if let Some(base) = walks[k - 1][s] {
                let cand = base + w;
                if walks[k][d].is_none_or(|cur| cand < cur) {
                    walks[k][d] = Some(cand);
                }
            }
        }
    }
    let mut best: Option<(i128, i128)> = None;
    for x in 0..r {
        let Some(full) = walks[r][x] else { continue };
        let mut worst: Option<(i128, i128)> = None;
        for (k, row) in walks[..r].iter().enumerate() {
            if let Some(part) = row[x] {
                let cand = (full - part, (r - k) as i128);
                if worst.is_none_or(|(n, d)| cand.0 * d > n * cand.1) {
                    worst = Some(cand);
                }
            }
        }
        if let Some(cand) = worst {
            if best.is_none_or(|(n, d)| cand.0 * d < n * cand.1) {
                best = Some(cand);
            }
        }
    }
    let (n, d) = best.expect("every vertex reaches a cycle");
    Rational::new(n as i64, d as i64)
}

/// Every Player-0 strategy, in mixed-radix order over canonical arc indices.
pub fn all_strategies(arena: &Arena) -> impl Iterator<Item = PositionalStrategy> + '_ {
    let options: Vec<(VertexId, Vec<VertexId>)> = arena
        .player_vertices(Owner::Zero)
        .map(|u| (u, arena.out_arcs(u).map(|id| arena.arc(id).dst).collect()))
        .collect();
    strategy_product(arena.vertex_count(), options)
}

/// Cartesian product of per-vertex successor lists, first vertex varying slowest.
pub fn strategy_product(
    n: usize,
    options: Vec<(VertexId, Vec<VertexId>)>,
) -> impl Iterator<Item = PositionalStrategy> {
    let mut digits = vec![0usize; options.len()];
    let mut done = options.iter().any(|(_, o)| o.is_empty());
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let mut choice = vec![None; n];
        for ((u, opts), &d) in options.iter().zip(&digits) {
            choice[*u] = Some(opts[d]);
        }
        done = true;
        for i in (0..digits.len()).rev() {
            digits[i] += 1;
            if digits[i] < options[i].1.len() {
                done = false;
                break;
            }
            digits[i] = 0;
        }
        Some(PositionalStrategy::new(choice))
    })
}

pub fn strategy_count(arena: &Arena) -> u128 {
    arena
        .player_vertices(Owner::Zero)
        .map(|u| arena.out_degree(u) as u128)
        .try_fold(1u128, |acc, d| acc.checked_mul(d))
        .unwrap_or(u128::MAX)
}

/// Ground truth from exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct ExhaustiveOpt {
    pub values: ValueAssignment,
    /// Optimal strategies, in enumeration order.
    pub opt: Vec<PositionalStrategy>,
    pub strategies_evaluated: u128,
}

/// Evaluates every Player-0 strategy against Player 1's best response (the
/// least reachable cycle mean) and keeps those achieving the maximum everywhere.
pub fn exhaustive_opt(arena: &Arena, bound: u128) -> Result<ExhaustiveOpt> {
    exhaustive_opt_with(arena, bound, false)
}

pub fn exhaustive_opt_with(arena: &Arena, bound: u128, parallel: bool) -> Result<ExhaustiveOpt> {
    let count = strategy_count(arena);
    if count > bound {
        return Err(SolveError::BoundExceeded { count, bound });
    }
    let payoff = |s: &PositionalStrategy| -> Result<Vec<Rational>> {
        let g = restrict(arena, s)?;
        Ok(arena.vertices().map(|v| min_cycle_mean_reachable(&g, v)).collect())
    };
    let strategies: Vec<PositionalStrategy> = all_strategies(arena).collect();
    let payoffs: Vec<Vec<Rational>> = if parallel {
        strategies.par_iter().map(payoff).collect::<Result<_>>()?
    } else {
        strategies.iter().map(payoff).collect::<Result<_>>()?
    };
    let mut best = payoffs[0].clone();
    for p in &payoffs[1..] {
        for (b, &x) in best.iter_mut().zip(p) {
            if x > *b {
                *b = x;
            }
        }
    }
    let opt = strategies
        .into_iter()
        .zip(&payoffs)
        .filter(|(_, p)| **p == best)
        .map(|(s, _)| s)
        .collect();
    Ok(ExhaustiveOpt {
        values: ValueAssignment::new(best),
        opt,
        strategies_evaluated: count,
    })
}

/// Least fixpoint of `π(u) ⪰ π(v) ⊖ w` over every retained arc, by full sweeps.
pub fn naive_least_fp(graph: &impl GameGraph, cap: i64) -> EnergyFunction {
    let arcs: Vec<Arc> = graph.retained_arcs().map(|(_, a)| *a).collect();
    let mut f = vec![EnergyValue::Finite(0); graph.vertex_count()];
    loop {
        let prev = f.clone();
        for a in &arcs {
            let need = ominus(prev[a.dst], a.weight, cap);
            if need > f[a.src] {
                f[a.src] = need;
            }
        }
        if f == prev {
            return EnergyFunction::new(cap, f);
        }
    }
}

/// Least SEPM by Kleene iteration from zero: every vertex lifted each round
/// from the previous round's levels.
pub fn naive_least_sepm(graph: &impl GameGraph, cap: i64) -> EnergyFunction {
    let n = graph.vertex_count();
    let mut f = vec![EnergyValue::Finite(0); n];
    loop {
        let next: Vec<EnergyValue> = (0..n)
            .map(|u| {
                let needs = graph.successors(u).map(|(_, a)| ominus(f[a.dst], a.weight, cap));
                let lift = match graph.owner(u) {
                    Owner::Zero => needs.min(),
                    Owner::One => needs.max(),
                }
                .unwrap();
                lift.max(f[u])
            })
            .collect();
        if next == f {
            return EnergyFunction::new(cap, f);
        }
        f = next;
    }
}

/// Distinct least feasible potentials of `G(arena^{w-ν}, σ)` over `opt`, each
/// with the strategies producing it, in first-seen order.
pub fn reference_decomposition(
    arena: &Arena,
    nu: Rational,
    opt: &[PositionalStrategy],
) -> Result<Vec<(EnergyFunction, Vec<PositionalStrategy>)>> {
    let shifted = reweight(arena, nu)?;
    let mut index: HashMap<EnergyFunction, usize> = HashMap::new();
    let mut blocks: Vec<(EnergyFunction, Vec<PositionalStrategy>)> = Vec::new();
    for s in opt {
        let pi = naive_least_fp(&restrict(&shifted, s)?, shifted.cap());
        match index.get(&pi) {
            Some(&i) => blocks[i].1.push(s.clone()),
            None => {
                index.insert(pi.clone(), blocks.len());
                blocks.push((pi, vec![s.clone()]));
            }
        }
    }
    Ok(blocks)
}

/// `{π*(G(arena^{w-ν}, σ)) : σ ∈ opt}`.
pub fn reference_energy_lattice(
    arena: &Arena,
    nu: Rational,
    opt: &[PositionalStrategy],
) -> Result<Vec<EnergyFunction>> {
    Ok(reference_decomposition(arena, nu, opt)?
        .into_iter()
        .map(|(f, _)| f)
        .collect())
}

/// A seeded random arena: `n` vertices `v0..`, uniform owners, out-degree
/// uniform in `[1, min(max_out, n)]` with distinct targets, weights uniform in
/// `[-w_max, w_max]`.
pub fn gen_random_arena(n: usize, max_out: usize, w_max: i64, seed: u64) -> Arena {
    assert!(n >= 1 && max_out >= 1 && w_max >= 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices: Vec<(String, Owner)> = (0..n)
        .map(|i| {
            let owner = if rng.random_bool(0.5) { Owner::Zero } else { Owner::One };
            (format!("v{i}"), owner)
        })
        .collect();
    let mut arcs = Vec::new();
    for src in 0..n {
        let degree = rng.random_range(1..=max_out.min(n));
        for dst in sample(&mut rng, n, degree).into_iter() {
            arcs.push(Arc {
                src,
                dst,
                weight: rng.random_range(-w_max..=w_max),
            });
        }
    }
    Arena::new(vertices, arcs).expect("generated arena is valid")
}

/// `k`-step truncated total payoff by explicit game-tree expansion (no sharing
/// between subtrees). Row `j` holds the value of the `j`-step game.
pub fn brute_force_truncated(arena: &Arena, k: usize) -> Vec<Vec<i64>> {
    fn play(arena: &Arena, u: VertexId, left: usize) -> i64 {
        if left == 0 {
            return 0;
        }
        let outcomes = arena
            .out_arcs(u)
            .map(|id| arena.arc(id))
            .map(|a| a.weight + play(arena, a.dst, left - 1));
        match arena.owner(u) {
            Owner::Zero => outcomes.max(),
            Owner::One => outcomes.min(),
        }
        .unwrap()
    }
    (0..=k)
        .map(|j| arena.vertices().map(|u| play(arena, u, j)).collect())
        .collect()
}

/// Min-`k` truncated game straight from its rules: before each move Player 1
/// may cut the remaining horizon to any `r' <= r`, ending the game at `r' = 0`.
pub fn brute_force_min_truncated(arena: &Arena, k: usize) -> Vec<Vec<i64>> {
    fn play(arena: &Arena, u: VertexId, left: usize) -> i64 {
        (0..=left)
            .map(|r| {
                if r == 0 {
                    return 0;
                }
                let outcomes = arena
                    .out_arcs(u)
                    .map(|id| arena.arc(id))
                    .map(|a| a.weight + play(arena, a.dst, r - 1));
                match arena.owner(u) {
                    Owner::Zero => outcomes.max(),
                    Owner::One => outcomes.min(),
                }
                .unwrap()
            })
            .min()
            .unwrap()
    }
    (0..=k)
        .map(|j| arena.vertices().map(|u| play(arena, u, j)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{parse_arena, serialize_arena};
    use crate::fixtures;

    #[test]
    fn karp_on_example_strategy() {
        let a = fixtures::gamma_ex();
        let s = PositionalStrategy::from_names(&a, &[("E", "F"), ("B", "C"), ("D", "A"), ("G", "F")]).unwrap();
        let g = restrict(&a, &s).unwrap();
        for v in a.vertices() {
            assert_eq!(min_cycle_mean_reachable(&g, v), Rational::from_integer(-1));
        }
    }

    #[test]
    fn karp_small_cases() {
        let a = parse_arena("v x 1\ne x x 7\n").unwrap();
        assert_eq!(min_cycle_mean_reachable(&a, 0), Rational::from_integer(7));
        // From s: a two-cycle of mean 1/2 and a three-cycle of mean -1/3.
        let b = parse_arena(
            "v s 1\nv a 1\nv b 1\nv c 1\nv d 1\nv e 1\n\
             e s a 0\ne s c 0\ne a b 1\ne b a 0\ne c d 0\ne d e 0\ne e c -1\n",
        )
        .unwrap();
        assert_eq!(min_cycle_mean_reachable(&b, 0), Rational::new(-1, 3));
        assert_eq!(min_cycle_mean_reachable(&b, 1), Rational::new(1, 2));
    }

    #[test]
    fn exhaustive_on_examples() {
        let ex = fixtures::gamma_ex();
        let res = exhaustive_opt(&ex, DEFAULT_STRATEGY_BOUND).unwrap();
        assert!(res.values.values().iter().all(|&v| v == Rational::from_integer(-1)));
        assert_eq!(res.opt.len(), 4);

        let forced = parse_arena("v a 0\nv b 1\ne a b 1\ne b a -3\n").unwrap();
        let res = exhaustive_opt(&forced, 10).unwrap();
        assert_eq!(res.opt.len(), 1);
        assert_eq!(res.values.get(0), Rational::from_integer(-1));

        let d = fixtures::gamma_d();
        let res = exhaustive_opt(&d, 100).unwrap();
        assert_eq!(res.opt.len(), 8);
        assert!(matches!(
            exhaustive_opt(&d, 4),
            Err(SolveError::BoundExceeded { count: 8, bound: 4 })
        ));
    }

    #[test]
    fn reference_lattice_of_example() {
        let ex = fixtures::gamma_ex();
        let res = exhaustive_opt(&ex, 100).unwrap();
        let x = reference_energy_lattice(&ex, Rational::from_integer(-1), &res.opt).unwrap();
        let mut e_levels: Vec<i64> = x.iter().map(|f| f.get(4).finite().unwrap()).collect();
        e_levels.sort();
        assert_eq!(e_levels, [0, 3, 7]);
    }

    #[test]
    fn naive_least_sepm_cases() {
        let a = reweight(&fixtures::gamma_ex(), Rational::from_integer(-1)).unwrap();
        assert_eq!(
            naive_least_sepm(&a, a.cap()),
            EnergyFunction::from_finite(24, &[0, 4, 8, 4, 0, 4, 0])
        );
        let pos = parse_arena("v a 0\nv b 1\ne a b 2\ne b a 0\ne b b 1\n").unwrap();
        assert_eq!(naive_least_sepm(&pos, pos.cap()), EnergyFunction::zero(2, 2));
    }

    #[test]
    fn random_arenas_are_deterministic() {
        let one = gen_random_arena(1, 1, 3, 99);
        assert_eq!(one.arc_count(), 1);
        assert_eq!(one.arc(0).src, one.arc(0).dst);
        assert_eq!(gen_random_arena(6, 3, 4, 7), gen_random_arena(6, 3, 4, 7));
        for seed in 0..50 {
            let a = gen_random_arena(5, 3, 4, seed);
            assert!(a.max_weight() <= 4);
            assert!(a.vertices().all(|v| (1..=3).contains(&a.out_degree(v))));
        }
    }

    #[test]
    fn golden_random_arena() {
        let text = serialize_arena(&gen_random_arena(6, 3, 4, 7));
        assert_eq!(text, include_str!("../tests/data/random_6_3_4_7.arena"));
    }

    #[test]
    fn truncated_trees_on_a_loop() {
        let a = parse_arena("v x 0\ne x x -2\n").unwrap();
        assert_eq!(brute_force_truncated(&a, 3), [[0], [-2], [-4], [-6]]);
        assert_eq!(brute_force_min_truncated(&a, 3), [[0], [-2], [-4], [-6]]);
        let b = parse_arena("v x 0\ne x x 2\n").unwrap();
        assert_eq!(brute_force_min_truncated(&b, 2), [[0], [0], [0]]);
    }

    #[test]
    fn product_order() {
        let opts = vec![(0, vec![1, 2]), (2, vec![0, 1])];
        let all: Vec<_> = strategy_product(3, opts).map(|s| s.choices().to_vec()).collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0], [Some(1), None, Some(0)]);
        assert_eq!(all[1], [Some(1), None, Some(1)]);
        assert_eq!(all[3], [Some(2), None, Some(1)]);
    }
}
